//! Entrywise function application and rank experiments on the Walsh matrix
//! family `M(a)`.
//!
//! The family `M(a)[i][j] = <a, B(i XOR j)>` is the hyperrectangle distance
//! matrix of the identity function, so its eigenstructure is fully known:
//! rank at most `d + 1` for `a` in general position. Applying a function
//! entrywise keeps the Hadamard eigenvectors, which makes the eigenvalue
//! functions `λ_χ^f(a)` explicit and lets the experiments here measure how
//! entrywise application moves rank around: which characters' eigenvalues
//! vanish identically, how the alternating difference quotient converges to
//! the d-th derivative, and how observed ranks compare with the claimed
//! binomial bound for polynomials.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::linalg::{numeric_rank, Matrix, SymMatrix, DEFAULT_RANK_REL_TOL};
use crate::spectrum::{eigenvalue_subset_sum, spectrum_of_fn};
use crate::walsh::{subset_weight, BitVector};

/// Dense cap for the `2^d × 2^d` family matrices.
pub const MAX_FAMILY_DIM: usize = 12;

/// Apply `f` to every entry of `m` independently.
///
/// Every entry must lie in `f`'s domain; the error names the first offender.
pub fn entrywise(m: &Matrix, f: &FunctionSpec) -> Result<Matrix> {
    f.validate()?;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if !f.admits(m.get(i, j)) {
                return Err(Error::RejectedInput(format!(
                    "entry ({i}, {j}) = {} is outside the function domain",
                    m.get(i, j)
                )));
            }
        }
    }
    Ok(Matrix::from_fn(m.rows(), m.cols(), |i, j| {
        f.value(m.get(i, j))
    }))
}

/// The binomial rank bound `2 * C(r + floor(deg/2) - 1, floor(deg/2))` for a
/// degree-`deg` polynomial applied entrywise to a rank-`r` matrix.
///
/// Returned as a big integer so large arguments never saturate silently.
pub fn poly_rank_bound(r: u64, deg: u64) -> Result<BigUint> {
    if r == 0 {
        return Err(Error::RejectedInput("rank must be >= 1".into()));
    }
    let k = deg / 2;
    // C(r + k - 1, k) by the multiplicative formula over big integers.
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= BigUint::from(r + k - 1 - i);
        acc /= BigUint::from(i + 1);
    }
    Ok(acc * BigUint::from(2u32))
}

/// Which indexing the family matrix uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WalshVariant {
    /// `M[i][j] = <a, B(i XOR j)>`: the hyperrectangle distance matrix, with
    /// exact Hadamard eigenstructure.
    Xor,
    /// `M[i][j] = <a, B(|i - j|)>`: the absolute-difference indexing. Kept
    /// for comparison; its Hadamard eigenvector residual is measured, not
    /// assumed.
    AbsDiff,
}

/// The `2^d × 2^d` family matrix `M(a)` under the chosen variant.
pub fn walsh_family(a: &[f64], variant: WalshVariant) -> Result<SymMatrix> {
    let d = a.len();
    if d == 0 || d > MAX_FAMILY_DIM {
        return Err(Error::Capability(format!(
            "family dimension {d} outside 1..={MAX_FAMILY_DIM}"
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::RejectedInput("non-finite side entry".into()));
    }
    let n = 1usize << d;
    let weights: Vec<f64> = (0..n).map(|m| subset_weight(m, a)).collect();
    match variant {
        WalshVariant::Xor => SymMatrix::from_fn(n, |i, j| weights[i ^ j]),
        WalshVariant::AbsDiff => SymMatrix::from_fn(n, |i, j| weights[i.abs_diff(j)]),
    }
}

/// Worst-case residual `max_χ ‖M h_χ - ρ_χ h_χ‖_∞` over Hadamard columns,
/// with `ρ_χ` the Rayleigh quotient. Zero (to round-off) for the XOR
/// variant; generally large for the absolute-difference variant.
#[derive(Debug, Clone, Serialize)]
pub struct EigenvectorResidualReport {
    pub xor_max_residual: f64,
    pub abs_diff_max_residual: f64,
    pub matrix_scale: f64,
}

/// Compare how well the Hadamard columns serve as eigenvectors for both
/// family variants on the same `a`.
pub fn walsh_family_residuals(a: &[f64]) -> Result<EigenvectorResidualReport> {
    let xor = walsh_family(a, WalshVariant::Xor)?;
    let abs = walsh_family(a, WalshVariant::AbsDiff)?;
    let n = xor.n();
    let d = a.len();
    let residual = |m: &SymMatrix| -> f64 {
        let mut worst = 0.0f64;
        for chi in 0..n {
            let h = crate::walsh::hadamard_column(chi, d).expect("valid column");
            let image = m.mul_vec(&h);
            let rayleigh: f64 = image.iter().zip(&h).map(|(x, s)| x * s).sum::<f64>() / n as f64;
            for i in 0..n {
                worst = worst.max((image[i] - rayleigh * h[i]).abs());
            }
        }
        worst
    };
    Ok(EigenvectorResidualReport {
        xor_max_residual: residual(&xor),
        abs_diff_max_residual: residual(&abs),
        matrix_scale: xor.max_abs().max(abs.max_abs()),
    })
}

/// The eigenvalue function `λ_χ^f(a) = Σ_b (-1)^{<B(χ), b>} f(<b, a>)`;
/// the same quantity `spectrum` computes, exposed for nonnegative `a` that
/// may include zero components.
pub fn lambda_f(a: &[f64], f: &FunctionSpec, chi: &BitVector) -> Result<f64> {
    f.validate()?;
    if chi.d() != a.len() {
        return Err(Error::RejectedInput(format!(
            "character dimension {} does not match side count {}",
            chi.d(),
            a.len()
        )));
    }
    if a.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::RejectedInput("sides must be finite and >= 0".into()));
    }
    eigenvalue_subset_sum(a, f, chi.index())
}

/// Sampled zero-eigenvalue scan across characters.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroScanReport {
    pub d: usize,
    pub samples: usize,
    /// Smallest flagged character index, if any.
    pub index_identically_zero: Option<usize>,
    /// All characters whose eigenvalue stayed below tolerance on every sample.
    pub flagged: Vec<usize>,
    /// Per-character max |λ| over the samples.
    pub evidence: Vec<f64>,
    /// Absolute threshold used: `1e-10 * (1 + max |λ|)`.
    pub tolerance: f64,
}

/// Sampling range for the scan and the converse experiment, chosen away from
/// degenerate tiny sides so numeric rank stays unambiguous.
pub const SAMPLE_RANGE: (f64, f64) = (0.5, 2.0);

/// Scan for characters whose eigenvalue vanishes on every sampled `a`.
///
/// "Identically zero" is claimed only as "zero on all samples within
/// tolerance"; `a` is drawn uniformly from [`SAMPLE_RANGE`] per coordinate
/// with the given seed.
pub fn zero_eigenvalue_scan(
    f: &FunctionSpec,
    d: usize,
    samples: usize,
    seed: u64,
) -> Result<ZeroScanReport> {
    f.validate()?;
    if samples == 0 {
        return Err(Error::RejectedInput("need at least one sample".into()));
    }
    if d == 0 || d > MAX_FAMILY_DIM {
        return Err(Error::Capability(format!(
            "scan dimension {d} outside 1..={MAX_FAMILY_DIM}"
        )));
    }
    let n = 1usize << d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evidence = vec![0.0f64; n];
    for _ in 0..samples {
        let a: Vec<f64> = (0..d)
            .map(|_| rng.gen_range(SAMPLE_RANGE.0..SAMPLE_RANGE.1))
            .collect();
        let lambdas = spectrum_of_fn(&a, |x| f.value(x))?;
        for (e, l) in evidence.iter_mut().zip(&lambdas) {
            *e = e.max(l.abs());
        }
    }
    let global = evidence.iter().fold(0.0f64, |m, &x| m.max(x));
    let tolerance = 1e-10 * (1.0 + global);
    let flagged: Vec<usize> = (0..n).filter(|&chi| evidence[chi] <= tolerance).collect();
    Ok(ZeroScanReport {
        d,
        samples,
        index_identically_zero: flagged.first().copied(),
        flagged,
        evidence,
        tolerance,
    })
}

/// The scaled alternating difference
/// `(-1)^d ε^{-d} Σ_b (-1)^{|b|} f(<a + εb, 1>)`, which converges to
/// `f^(d)(<a, 1>)` as `ε → 0` for smooth members. The `(-1)^d` factor makes
/// the limit hold with that sign for every `d`.
pub fn dth_difference(f: &FunctionSpec, a: &[f64], eps: f64) -> Result<f64> {
    f.validate()?;
    if a.is_empty() {
        return Err(Error::RejectedInput("need at least one coordinate".into()));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::RejectedInput(format!("eps must be > 0, got {eps}")));
    }
    let d = a.len();
    if d > MAX_FAMILY_DIM {
        return Err(Error::Capability(format!(
            "difference dimension {d} above cap {MAX_FAMILY_DIM}"
        )));
    }
    let x0: f64 = a.iter().sum();
    // Group the 2^d terms by popcount: Σ_s (-1)^s C(d, s) f(x0 + s ε).
    let mut acc = 0.0;
    let mut choose = 1.0f64;
    for s in 0..=d {
        if s > 0 {
            choose = choose * (d - s + 1) as f64 / s as f64;
        }
        let arg = x0 + s as f64 * eps;
        if !f.admits(arg) {
            return Err(Error::RejectedInput(format!(
                "argument {arg} is outside the function domain"
            )));
        }
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * choose * f.value(arg);
    }
    let parity = if d % 2 == 0 { 1.0 } else { -1.0 };
    Ok(parity * acc / eps.powi(d as i32))
}

/// Both sides of the eigenvalue-sum rewrite: perturbing `λ_χ^f` over the
/// cube `a + εb` collapses to a signed difference sum of `f` along the
/// diagonal.
#[derive(Debug, Clone, Serialize)]
pub struct EigsumCheck {
    /// `Σ_{b} (-1)^{|b|} λ_χ^f(a + εb)`.
    pub lhs: f64,
    /// `(-1)^{<B(χ), 1>} Σ_b (-1)^{|b|} f(<a + εb, 1>)`.
    pub rhs: f64,
    /// Magnitude the comparison should be scaled by.
    pub scale: f64,
}

pub fn eigsum_identity_check(
    f: &FunctionSpec,
    a: &[f64],
    eps: f64,
    chi: &BitVector,
) -> Result<EigsumCheck> {
    f.validate()?;
    let d = a.len();
    if d == 0 || d > 10 {
        return Err(Error::Capability(format!(
            "identity check needs 1 <= d <= 10, got {d}"
        )));
    }
    if chi.d() != d {
        return Err(Error::RejectedInput("character dimension mismatch".into()));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::RejectedInput(format!("eps must be > 0, got {eps}")));
    }
    if a.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::RejectedInput(
            "base point must be finite and >= 0".into(),
        ));
    }

    let mut lhs = 0.0;
    let mut scale = 0.0f64;
    let mut shifted = vec![0.0; d];
    for b in 0..(1usize << d) {
        for (j, slot) in shifted.iter_mut().enumerate() {
            let bit = (b >> (d - 1 - j)) & 1;
            *slot = a[j] + eps * bit as f64;
        }
        let lambda = eigenvalue_subset_sum(&shifted, f, chi.index())?;
        scale = scale.max(lambda.abs());
        let sign = if (b as u32).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        lhs += sign * lambda;
    }

    let x0: f64 = a.iter().sum();
    let mut inner = 0.0;
    let mut choose = 1.0f64;
    for s in 0..=d {
        if s > 0 {
            choose = choose * (d - s + 1) as f64 / s as f64;
        }
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        inner += sign * choose * f.value(x0 + s as f64 * eps);
    }
    let chi_parity = if chi.weight() % 2 == 0 { 1.0 } else { -1.0 };
    let rhs = chi_parity * inner;
    Ok(EigsumCheck {
        lhs,
        rhs,
        scale: 1.0 + scale,
    })
}

/// One trial of the converse experiment.
#[derive(Debug, Clone, Serialize)]
pub struct RankTrial {
    pub a: Vec<f64>,
    pub rank_m: usize,
    pub rank_fm: usize,
}

/// Report of [`converse_experiment`]: per-trial ranks of `M(a)` and of the
/// entrywise image, the binomial bound when `f` is a polynomial, and the
/// fraction of trials at full rank.
#[derive(Debug, Clone, Serialize)]
pub struct RankExperimentReport {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    pub rel_tol: f64,
    pub trial_results: Vec<RankTrial>,
    /// `poly_rank_bound(d + 1, deg)` as a decimal string when `f` is a
    /// polynomial; absent otherwise.
    pub bound_from_fact: Option<String>,
    pub full_rank_fraction: f64,
}

fn polynomial_degree(f: &FunctionSpec) -> Option<usize> {
    match f {
        FunctionSpec::Polynomial { coeffs } => {
            Some(coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0))
        }
        _ => None,
    }
}

/// Rank experiment for the entrywise map on the `M(a)` family.
///
/// `n` must be a power of two at most 256; `d = log2 n`. Each trial draws
/// `a` from [`SAMPLE_RANGE`]^d (ChaCha stream = trial index, so results are
/// independent of scheduling), forms `M(a)` in the XOR variant, applies `f`
/// entrywise and measures both numeric ranks. Trials are distributed over
/// `threads` worker threads; the report is ordered by trial index either way.
pub fn converse_experiment(
    f: &FunctionSpec,
    n: usize,
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<RankExperimentReport> {
    f.validate()?;
    if !n.is_power_of_two() || !(2..=256).contains(&n) {
        return Err(Error::RejectedInput(format!(
            "n must be a power of two in 2..=256, got {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::RejectedInput("need at least one trial".into()));
    }
    let d = n.trailing_zeros() as usize;

    let run_trial = |trial: usize| -> Result<RankTrial> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let a: Vec<f64> = (0..d)
            .map(|_| rng.gen_range(SAMPLE_RANGE.0..SAMPLE_RANGE.1))
            .collect();
        let m = walsh_family(&a, WalshVariant::Xor)?;
        let fm = entrywise(&m.to_matrix(), f)?;
        let rank_m = numeric_rank(&m.to_matrix(), DEFAULT_RANK_REL_TOL)?.rank;
        let rank_fm = numeric_rank(&fm, DEFAULT_RANK_REL_TOL)?.rank;
        Ok(RankTrial { a, rank_m, rank_fm })
    };

    let workers = threads.max(1).min(trials);
    let trial_results: Vec<RankTrial> = if workers == 1 {
        (0..trials).map(run_trial).collect::<Result<_>>()?
    } else {
        let chunk = trials.div_ceil(workers);
        let mut collected: Vec<Option<RankTrial>> = vec![None; trials];
        std::thread::scope(|scope| -> Result<()> {
            let mut handles = Vec::new();
            for w in 0..workers {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(trials);
                if lo >= hi {
                    break;
                }
                handles.push((
                    lo,
                    scope.spawn(move || -> Result<Vec<RankTrial>> {
                        (lo..hi).map(run_trial).collect()
                    }),
                ));
            }
            for (lo, handle) in handles {
                let part = handle.join().expect("trial worker panicked")?;
                for (offset, trial) in part.into_iter().enumerate() {
                    collected[lo + offset] = Some(trial);
                }
            }
            Ok(())
        })?;
        collected
            .into_iter()
            .map(|t| t.expect("all trials filled"))
            .collect()
    };

    let full = trial_results.iter().filter(|t| t.rank_fm == n).count();
    let bound_from_fact = polynomial_degree(f)
        .map(|deg| poly_rank_bound((d + 1) as u64, deg as u64))
        .transpose()?
        .map(|b| b.to_string());
    Ok(RankExperimentReport {
        n,
        d,
        trials,
        seed,
        rel_tol: DEFAULT_RANK_REL_TOL,
        trial_results,
        bound_from_fact,
        full_rank_fraction: full as f64 / trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{spectrum, Hyperrectangle};
    use crate::walsh::bits;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplace() -> FunctionSpec {
        FunctionSpec::ExpMixture {
            w: vec![1.0],
            t: vec![1.0],
            c0: 0.0,
        }
    }

    #[test]
    fn entrywise_examples() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let id = entrywise(&m, &FunctionSpec::identity()).unwrap();
        assert_eq!(id, m);

        let ones = entrywise(&m, &FunctionSpec::constant(1.0)).unwrap();
        assert!(ones.row(0).iter().all(|&x| x == 1.0));

        let e = entrywise(&m, &laplace()).unwrap();
        assert_eq!(e.get(0, 0), 1.0);
        assert_abs_diff_eq!(e.get(0, 1), (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn entrywise_rejects_domain_violations() {
        let m = Matrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let err = entrywise(&m, &laplace()).unwrap_err();
        assert!(err.to_string().contains("(0, 0)"), "{err}");
        // Polynomials take the whole real line.
        assert!(entrywise(&m, &FunctionSpec::identity()).is_ok());
    }

    #[test]
    fn poly_rank_bound_examples() {
        assert_eq!(poly_rank_bound(2, 2).unwrap(), BigUint::from(4u32));
        for r in [1u64, 3, 10, 1000] {
            assert_eq!(poly_rank_bound(r, 0).unwrap(), BigUint::from(2u32));
        }
        assert_eq!(poly_rank_bound(3, 4).unwrap(), BigUint::from(12u32));
        assert!(poly_rank_bound(0, 2).is_err());
    }

    #[test]
    fn poly_rank_bound_large_arguments() {
        // 2 * C(2^40 + 2, 3) overflows u64; the big-integer result must not.
        let big = poly_rank_bound(1 << 40, 6).unwrap();
        assert!(big > BigUint::from(u64::MAX));
    }

    #[test]
    fn walsh_family_xor_matches_distance_matrix() {
        let a = [1.0, 2.0];
        let fam = walsh_family(&a, WalshVariant::Xor).unwrap();
        let r = Hyperrectangle::new(a.to_vec()).unwrap();
        let dm = crate::spectrum::distance_matrix(&r, &FunctionSpec::identity()).unwrap();
        assert_eq!(fam, dm);
    }

    #[test]
    fn walsh_family_rank_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        for trial in 0..50 {
            let d = rng.gen_range(1..=8);
            let a: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..4.0)).collect();
            let m = walsh_family(&a, WalshVariant::Xor).unwrap();
            let rank = numeric_rank(&m.to_matrix(), DEFAULT_RANK_REL_TOL)
                .unwrap()
                .rank;
            assert!(rank <= d + 1, "trial {trial}: d={d} rank={rank}");
        }
    }

    #[test]
    fn walsh_family_zero_sides() {
        let m = walsh_family(&[0.0, 0.0], WalshVariant::Xor).unwrap();
        assert_eq!(m.max_abs(), 0.0);
        let rank = numeric_rank(&m.to_matrix(), DEFAULT_RANK_REL_TOL)
            .unwrap()
            .rank;
        assert_eq!(rank, 0);
    }

    #[test]
    fn abs_diff_variant_matches_printed_indexing() {
        let a = [1.0, 2.0];
        let m = walsh_family(&a, WalshVariant::AbsDiff).unwrap();
        // B(|i-j|) weights: w(1) = 2, w(2) = 1, w(3) = 3.
        let expected = [
            [0.0, 2.0, 1.0, 3.0],
            [2.0, 0.0, 2.0, 1.0],
            [1.0, 2.0, 0.0, 2.0],
            [3.0, 1.0, 2.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.get(i, j), expected[i][j]);
            }
        }
    }

    #[test]
    fn residual_report_separates_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        for d in 2..=5 {
            let a: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..2.0)).collect();
            let report = walsh_family_residuals(&a).unwrap();
            assert!(
                report.xor_max_residual <= 1e-10 * (1.0 + report.matrix_scale),
                "xor residual {}",
                report.xor_max_residual
            );
            assert!(
                report.abs_diff_max_residual > 1e-3,
                "abs_diff residual unexpectedly small: {}",
                report.abs_diff_max_residual
            );
        }
    }

    #[test]
    fn lambda_matches_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        for d in 1..=6 {
            let a: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..3.0)).collect();
            let r = Hyperrectangle::new(a.clone()).unwrap();
            for f in [FunctionSpec::identity(), laplace()] {
                let s = spectrum(&r, &f).unwrap();
                for chi in 0..(1usize << d) {
                    let l = lambda_f(&a, &f, &bits(chi, d).unwrap()).unwrap();
                    let tol = 1e-12 * (1.0 + l.abs());
                    assert!((l - s.eigenvalues[chi]).abs() <= tol);
                }
            }
        }
    }

    #[test]
    fn lambda_all_ones_vanishes_for_low_degree_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(127);
        let quad = FunctionSpec::Polynomial {
            coeffs: vec![0.5, -1.0, 0.25],
        };
        for _ in 0..20 {
            let d = 3;
            let a: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..2.0)).collect();
            let ones = BitVector::ones(d).unwrap();
            let l = lambda_f(&a, &quad, &ones).unwrap();
            assert!(l.abs() <= 1e-10, "lambda = {l}");
        }
    }

    #[test]
    fn lambda_exponential_never_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(131);
        for _ in 0..100 {
            let d = 3;
            let a: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..2.0)).collect();
            let ones = BitVector::ones(d).unwrap();
            let l = lambda_f(&a, &laplace(), &ones).unwrap();
            assert!(l.abs() > 1e-12);
        }
    }

    #[test]
    fn zero_scan_flags_high_characters_of_polynomials() {
        let quad = FunctionSpec::Polynomial {
            coeffs: vec![1.0, 1.0, 1.0],
        };
        let report = zero_eigenvalue_scan(&quad, 3, 50, 7).unwrap();
        // Characters of weight > 2 vanish; for d = 3 that is only the
        // all-ones character, index 7.
        assert_eq!(report.flagged, vec![7]);
        assert_eq!(report.index_identically_zero, Some(7));
    }

    #[test]
    fn zero_scan_exponential_flags_nothing() {
        let report = zero_eigenvalue_scan(&laplace(), 3, 50, 7).unwrap();
        assert!(report.flagged.is_empty());
        assert_eq!(report.index_identically_zero, None);
    }

    #[test]
    fn zero_scan_constant_one_dimensional() {
        let report = zero_eigenvalue_scan(&FunctionSpec::constant(2.0), 1, 10, 3).unwrap();
        assert_eq!(report.flagged, vec![1]);
        assert_eq!(report.evidence[1], 0.0);
    }

    #[test]
    fn dth_difference_square_is_exact() {
        let sq = FunctionSpec::Polynomial {
            coeffs: vec![0.0, 0.0, 1.0],
        };
        let got = dth_difference(&sq, &[0.0, 0.0], 0.1).unwrap();
        assert_eq!(got, 2.0);
    }

    #[test]
    fn dth_difference_annihilates_low_degree() {
        let affine = FunctionSpec::Polynomial {
            coeffs: vec![1.0, 1.0],
        };
        for &eps in &[0.5, 0.25, 1.0] {
            let got = dth_difference(&affine, &[1.0, 2.0], eps).unwrap();
            assert_eq!(got, 0.0);
        }
    }

    #[test]
    fn dth_difference_first_derivative() {
        let got = dth_difference(&laplace(), &[1.0], 1e-4).unwrap();
        let want = -(-1.0f64).exp();
        assert!((got - want).abs() <= 1e-4, "{got} vs {want}");
    }

    #[test]
    fn dth_difference_error_scales_linearly() {
        let f = FunctionSpec::ExpMixture {
            w: vec![1.0, 0.5],
            t: vec![1.0, 2.0],
            c0: 0.0,
        };
        for d in 1..=4usize {
            let a = vec![1.0 / d as f64; d];
            let x0: f64 = a.iter().sum();
            let exact = f.derivative(d, x0).unwrap();
            let errors: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
                .iter()
                .map(|&eps| (dth_difference(&f, &a, eps).unwrap() - exact).abs())
                .collect();
            for pair in errors.windows(2) {
                let ratio = pair[0] / pair[1];
                assert!(
                    (1.7..=2.3).contains(&ratio),
                    "d={d}: errors {errors:?}, ratio {ratio}"
                );
            }
        }
    }

    #[test]
    fn eigsum_identity_examples() {
        let sq = FunctionSpec::Polynomial {
            coeffs: vec![0.0, 0.0, 1.0],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(137);
        for _ in 0..10 {
            let a: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..2.0)).collect();
            let chi = bits(rng.gen_range(0..4), 2).unwrap();
            let check = eigsum_identity_check(&sq, &a, 0.5, &chi).unwrap();
            assert!(
                (check.lhs - check.rhs).abs() <= 1e-8 * check.scale,
                "{check:?}"
            );
        }

        let c = FunctionSpec::constant(4.0);
        let check = eigsum_identity_check(&c, &[1.0, 1.0], 0.25, &bits(1, 2).unwrap()).unwrap();
        assert_eq!(check.lhs, 0.0);
        assert_eq!(check.rhs, 0.0);

        let id3 = eigsum_identity_check(
            &FunctionSpec::identity(),
            &[0.5, 1.0, 1.5],
            0.3,
            &bits(0, 3).unwrap(),
        )
        .unwrap();
        assert!((id3.lhs - id3.rhs).abs() <= 1e-8 * id3.scale);
    }

    #[test]
    fn converse_experiment_identity_tracks_family_rank() {
        let report = converse_experiment(&FunctionSpec::identity(), 64, 5, 11, 1).unwrap();
        assert_eq!(report.d, 6);
        for trial in &report.trial_results {
            assert_eq!(trial.rank_m, trial.rank_fm);
            assert!(trial.rank_m <= 7);
        }
    }

    #[test]
    fn converse_experiment_exponential_full_rank() {
        let report = converse_experiment(&laplace(), 64, 10, 13, 2).unwrap();
        assert_eq!(report.full_rank_fraction, 1.0);
        assert!(report.bound_from_fact.is_none());
    }

    #[test]
    fn converse_experiment_reports_polynomial_bound() {
        let quad = FunctionSpec::Polynomial {
            coeffs: vec![1.0, 1.0, 1.0],
        };
        let report = converse_experiment(&quad, 16, 3, 5, 1).unwrap();
        // d = 4: bound is 2 * C(5, 1) = 10.
        assert_eq!(report.bound_from_fact.as_deref(), Some("10"));
    }

    #[test]
    fn converse_experiment_thread_count_does_not_change_results() {
        let f = laplace();
        let sequential = converse_experiment(&f, 32, 8, 42, 1).unwrap();
        let parallel = converse_experiment(&f, 32, 8, 42, 4).unwrap();
        let s = serde_json::to_string(&sequential).unwrap();
        let p = serde_json::to_string(&parallel).unwrap();
        assert_eq!(s, p);
    }

    #[test]
    fn converse_experiment_rejects_bad_sizes() {
        assert!(converse_experiment(&laplace(), 48, 3, 0, 1).is_err());
        assert!(converse_experiment(&laplace(), 512, 3, 0, 1).is_err());
        assert!(converse_experiment(&laplace(), 64, 0, 0, 1).is_err());
    }
}
