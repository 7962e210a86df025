//! Hyperrectangle distance matrices and their full spectrum, computed along
//! three independent routes.
//!
//! For side lengths `a_1..a_d > 0` the vertices `p_0..p_{2^d - 1}` are
//! enumerated lexicographically (see [`crate::walsh`] for the bit
//! convention), and for a catalog function `f` the matrix
//! `D[i][j] = f(||p_i - p_j||_1) = f(<B(i XOR j), a>)` has the Hadamard
//! columns as eigenvectors. The eigenvalue attached to a character `χ` is
//!
//! ```text
//! λ_χ = Σ_{b ∈ {0,1}^d} (-1)^{<B(χ), b>} f(<b, a>),
//! ```
//!
//! which is exactly the Walsh–Hadamard transform of the sequence
//! `g[b] = f(<b, a>)`. [`spectrum`] computes it that way in `O(d 2^d)`;
//! [`spectrum_subset_sum`] re-derives a single eigenvalue by brute-force
//! subset enumeration; [`spectrum_integral`] evaluates the equivalent
//! iterated-integral form via Gauss–Legendre quadrature. Agreement of the
//! three routes (and of a dense eigensolver on `D` itself) is the contract
//! the test suite enforces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::linalg::SymMatrix;
use crate::walsh::{fwht_in_place, hadamard_sign, subset_weight, BitVector};

/// Dimension cap for the transform route (`2^d` buffer).
pub const MAX_SPECTRUM_DIM: usize = 20;

/// Dimension cap for routes that materialize the dense `2^d × 2^d` matrix.
pub const MAX_DENSE_DIM: usize = 12;

/// Axis-aligned box in `R^d` given by its side lengths; its `2^d` vertices
/// index every matrix in this module.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hyperrectangle {
    sides: Vec<f64>,
}

impl Hyperrectangle {
    /// Side lengths must be finite and strictly positive; dimension is
    /// capped at [`MAX_SPECTRUM_DIM`] to bound the `2^d` buffers.
    pub fn new(sides: Vec<f64>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::RejectedInput(
                "hyperrectangle needs at least one side".into(),
            ));
        }
        if sides.len() > MAX_SPECTRUM_DIM {
            return Err(Error::Capability(format!(
                "dimension {} above cap {MAX_SPECTRUM_DIM}",
                sides.len()
            )));
        }
        if sides.iter().any(|&a| !a.is_finite() || a <= 0.0) {
            return Err(Error::RejectedInput(
                "side lengths must be finite and > 0".into(),
            ));
        }
        Ok(Self { sides })
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    /// Number of vertices, `2^d`.
    pub fn vertex_count(&self) -> usize {
        1usize << self.dim()
    }

    /// Vertex `i` in lexicographic order: coordinate `j` is `+a_j/2` when
    /// bit `j` of `B(i)` is 0 and `-a_j/2` when it is 1.
    pub fn vertex(&self, i: usize) -> Vec<f64> {
        let d = self.dim();
        debug_assert!(i < self.vertex_count());
        (0..d)
            .map(|j| {
                let bit = (i >> (d - 1 - j)) & 1;
                if bit == 0 {
                    self.sides[j] / 2.0
                } else {
                    -self.sides[j] / 2.0
                }
            })
            .collect()
    }

    /// All `2^d` vertices in lexicographic order.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        (0..self.vertex_count()).map(|i| self.vertex(i)).collect()
    }
}

/// How a [`SpectrumResult`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    Fwht,
    SubsetSum,
    DenseOracle,
    Integral,
}

/// Eigenvalues of a hyperrectangle distance matrix, indexed by character.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub d: usize,
    /// `eigenvalues[χ]` is the eigenvalue paired with Hadamard column `χ`.
    pub eigenvalues: Vec<f64>,
    pub method: SpectrumMethod,
}

/// Transform-route spectrum of `g[b] = value(<b, a>)` for an arbitrary
/// evaluator. Sides need only be finite and nonnegative here; the public
/// wrappers restrict to genuine hyperrectangles.
pub fn spectrum_of_fn(sides: &[f64], mut value: impl FnMut(f64) -> f64) -> Result<Vec<f64>> {
    let d = sides.len();
    if d == 0 || d > MAX_SPECTRUM_DIM {
        return Err(Error::Capability(format!(
            "dimension {d} outside 1..={MAX_SPECTRUM_DIM}"
        )));
    }
    if sides.iter().any(|&a| !a.is_finite() || a < 0.0) {
        return Err(Error::RejectedInput("sides must be finite and >= 0".into()));
    }
    let n = 1usize << d;
    let mut g: Vec<f64> = (0..n).map(|b| value(subset_weight(b, sides))).collect();
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::RejectedInput("function value is not finite".into()));
    }
    fwht_in_place(&mut g)?;
    Ok(g)
}

/// Full spectrum via the fast Walsh–Hadamard transform, `O(d 2^d)`.
pub fn spectrum(r: &Hyperrectangle, f: &FunctionSpec) -> Result<SpectrumResult> {
    f.validate()?;
    let eigenvalues = spectrum_of_fn(r.sides(), |x| f.value(x))?;
    Ok(SpectrumResult {
        d: r.dim(),
        eigenvalues,
        method: SpectrumMethod::Fwht,
    })
}

/// Single eigenvalue by the relaxed subset-sum route; shared with the rank
/// experiments, which feed nonnegative (not necessarily positive) sides.
pub(crate) fn eigenvalue_subset_sum(sides: &[f64], f: &FunctionSpec, chi: usize) -> Result<f64> {
    let d = sides.len();
    if d == 0 || d > MAX_SPECTRUM_DIM {
        return Err(Error::Capability(format!(
            "dimension {d} outside 1..={MAX_SPECTRUM_DIM}"
        )));
    }
    if chi >= (1usize << d) {
        return Err(Error::RejectedInput(format!(
            "character index {chi} out of range"
        )));
    }
    let mut acc = 0.0;
    for t in 0..(1usize << d) {
        acc += hadamard_sign(t, chi) * f.value(subset_weight(t, sides));
    }
    Ok(acc)
}

/// One eigenvalue by brute-force enumeration of all `2^d` subsets:
/// `Σ_{T ⊆ [d]} (-1)^{Σ_{t∈T} χ(t)} f(Σ_{t∈T} a_t)`.
pub fn spectrum_subset_sum(r: &Hyperrectangle, f: &FunctionSpec, chi: &BitVector) -> Result<f64> {
    f.validate()?;
    if chi.d() != r.dim() {
        return Err(Error::RejectedInput(format!(
            "character dimension {} does not match hyperrectangle dimension {}",
            chi.d(),
            r.dim()
        )));
    }
    eigenvalue_subset_sum(r.sides(), f, chi.index())
}

/// The distance matrix `D[i][j] = f(||p_i - p_j||_1)`; dense, so capped at
/// [`MAX_DENSE_DIM`].
pub fn distance_matrix(r: &Hyperrectangle, f: &FunctionSpec) -> Result<SymMatrix> {
    f.validate()?;
    if r.dim() > MAX_DENSE_DIM {
        return Err(Error::Capability(format!(
            "dense route needs d <= {MAX_DENSE_DIM}, got {}",
            r.dim()
        )));
    }
    let n = r.vertex_count();
    // Precompute g over XOR masks; D[i][j] = g[i ^ j].
    let g: Vec<f64> = (0..n)
        .map(|m| f.value(subset_weight(m, r.sides())))
        .collect();
    SymMatrix::from_fn(n, |i, j| g[i ^ j])
}

/// Conjugation report for `Σ = H D H`: how diagonal `Σ` is, and how well
/// `4^{-d} H Σ H` reconstructs `D`.
#[derive(Debug, Clone, Serialize)]
pub struct DiagonalizationCheck {
    pub d: usize,
    pub max_offdiag: f64,
    pub reconstruction_error: f64,
    /// `‖D‖_max`, the scale both errors should be compared against.
    pub matrix_scale: f64,
}

fn fwht_rows(data: &mut [f64], n: usize) -> Result<()> {
    for row in data.chunks_mut(n) {
        fwht_in_place(row)?;
    }
    Ok(())
}

fn fwht_cols(data: &mut [f64], n: usize) -> Result<()> {
    let mut buf = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            buf[i] = data[i * n + j];
        }
        fwht_in_place(&mut buf)?;
        for i in 0..n {
            data[i * n + j] = buf[i];
        }
    }
    Ok(())
}

/// Form `Σ = H D H` by transform passes and report the largest off-diagonal
/// entry together with the max-norm error of `D = 4^{-d} H Σ H`.
pub fn diagonalization_check(r: &Hyperrectangle, f: &FunctionSpec) -> Result<DiagonalizationCheck> {
    let d = r.dim();
    let matrix = distance_matrix(r, f)?;
    let n = matrix.n();
    let mut sigma: Vec<f64> = (0..n * n).map(|idx| matrix.get(idx / n, idx % n)).collect();
    fwht_rows(&mut sigma, n)?;
    fwht_cols(&mut sigma, n)?;

    let mut max_offdiag = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                max_offdiag = max_offdiag.max(sigma[i * n + j].abs());
            }
        }
    }

    let mut back = sigma.clone();
    fwht_rows(&mut back, n)?;
    fwht_cols(&mut back, n)?;
    let scale = 0.25f64.powi(d as i32);
    let mut reconstruction_error = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let err = (back[i * n + j] * scale - matrix.get(i, j)).abs();
            reconstruction_error = reconstruction_error.max(err);
        }
    }

    Ok(DiagonalizationCheck {
        d,
        max_offdiag,
        reconstruction_error,
        matrix_scale: matrix.max_abs(),
    })
}

/// `Δ_eps^k(f, t)`: the alternating inclusion–exclusion sum of `f` over
/// offset subsets, `Σ_{S} (-1)^{|S|} f(t + Σ_{i∈S} eps_i)`.
pub fn delta_k(f: &FunctionSpec, t: f64, eps: &[f64]) -> Result<f64> {
    f.validate()?;
    if eps.len() > 10 {
        return Err(Error::Capability(format!(
            "difference order {} above supported max 10",
            eps.len()
        )));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::RejectedInput(format!(
            "base point must be >= 0, got {t}"
        )));
    }
    if eps.iter().any(|&e| !e.is_finite() || e <= 0.0) {
        return Err(Error::RejectedInput(
            "offsets must be finite and > 0".into(),
        ));
    }
    Ok(crate::functions::alternating_difference(f, t, eps))
}

// ---------------------------------------------------------------------------
// Gauss–Legendre quadrature for the integral eigenvalue form.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for k in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    (nodes, weights)
}

fn map_rule(lo: f64, hi: f64, nodes: &[f64], weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mid = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo);
    (
        nodes.iter().map(|&x| mid + half * x).collect(),
        weights.iter().map(|&w| w * half).collect(),
    )
}

const QUAD_POINTS: usize = 32;

/// Largest number of set character bits the integral route supports; the
/// nested quadrature grows as `32^k`.
pub const MAX_INTEGRAL_ORDER: usize = 3;

fn power_exponent_below(f: &FunctionSpec, k: usize) -> Option<f64> {
    match f {
        FunctionSpec::Power { s } if *s < k as f64 => Some(*s),
        FunctionSpec::AffineOf { inner, .. } => power_exponent_below(inner, k),
        FunctionSpec::SumOf { terms } => terms.iter().find_map(|t| power_exponent_below(t, k)),
        _ => None,
    }
}

/// One eigenvalue by the iterated-integral form: with `Q = {q : χ(q) = 1}`
/// and `k = |Q|`,
///
/// ```text
/// λ_χ = Σ_{T ⊆ [d] \ Q} (-1)^k ∫_{[0, a_{q_1}] × … × [0, a_{q_k}]}
///           f^{(k)}(δ_T + u_1 + … + u_k) du,    δ_T = Σ_{t∈T} a_t,
/// ```
///
/// evaluated with a nested 32-point Gauss–Legendre rule per axis. Requires
/// `1 ≤ k ≤ 3` and closed-form derivatives that stay integrable near zero
/// (power kinds need exponent `s ≥ k`).
pub fn spectrum_integral(r: &Hyperrectangle, f: &FunctionSpec, chi: &BitVector) -> Result<f64> {
    f.validate()?;
    let d = r.dim();
    if chi.d() != d {
        return Err(Error::RejectedInput(format!(
            "character dimension {} does not match hyperrectangle dimension {d}",
            chi.d()
        )));
    }
    let k = chi.weight();
    if k == 0 || k > MAX_INTEGRAL_ORDER {
        return Err(Error::Capability(format!(
            "integral route needs 1 <= |χ| <= {MAX_INTEGRAL_ORDER}, got {k}"
        )));
    }
    if let Some(s) = power_exponent_below(f, k) {
        return Err(Error::Capability(format!(
            "power exponent {s} has an unintegrable order-{k} derivative near 0"
        )));
    }

    let sides = r.sides();
    let q_axes: Vec<usize> = (0..d).filter(|&j| chi.bit(j) == 1).collect();
    let free_axes: Vec<usize> = (0..d).filter(|&j| chi.bit(j) == 0).collect();

    let (base_nodes, base_weights) = gauss_legendre(QUAD_POINTS);
    let rules: Vec<(Vec<f64>, Vec<f64>)> = q_axes
        .iter()
        .map(|&q| map_rule(0.0, sides[q], &base_nodes, &base_weights))
        .collect();

    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut total = 0.0;
    for t_mask in 0..(1usize << free_axes.len()) {
        let mut delta = 0.0;
        for (pos, &axis) in free_axes.iter().enumerate() {
            if (t_mask >> pos) & 1 == 1 {
                delta += sides[axis];
            }
        }
        let mut box_sum = 0.0;
        match k {
            1 => {
                let (xs, ws) = &rules[0];
                for (x, w) in xs.iter().zip(ws) {
                    box_sum += w * f.derivative_value(1, delta + x);
                }
            }
            2 => {
                let (xs0, ws0) = &rules[0];
                let (xs1, ws1) = &rules[1];
                for (x0, w0) in xs0.iter().zip(ws0) {
                    for (x1, w1) in xs1.iter().zip(ws1) {
                        box_sum += w0 * w1 * f.derivative_value(2, delta + x0 + x1);
                    }
                }
            }
            _ => {
                let (xs0, ws0) = &rules[0];
                let (xs1, ws1) = &rules[1];
                let (xs2, ws2) = &rules[2];
                for (x0, w0) in xs0.iter().zip(ws0) {
                    for (x1, w1) in xs1.iter().zip(ws1) {
                        for (x2, w2) in xs2.iter().zip(ws2) {
                            box_sum += w0 * w1 * w2 * f.derivative_value(3, delta + x0 + x1 + x2);
                        }
                    }
                }
            }
        }
        total += sign * box_sum;
    }
    Ok(total)
}

/// Instantiation of the binomial eigenvalue identity: on the hyperrectangle
/// with sides `(eps_1, .., eps_k, 2c/d, .., 2c/d)` and `χ` the first `k`
/// ones, the spectrum eigenvalue equals
/// `Σ_{s=0}^{d-k} C(d-k, s) Δ_eps^k(f, 2sc/d)`.
#[derive(Debug, Clone, Serialize)]
pub struct BinomIdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn binom_eigenvalue_identity(
    f: &FunctionSpec,
    eps: &[f64],
    c: f64,
    d: usize,
) -> Result<BinomIdentityCheck> {
    let k = eps.len();
    if k == 0 || d < k || d > 16 {
        return Err(Error::RejectedInput(format!(
            "need 1 <= k <= d <= 16, got k={k}, d={d}"
        )));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::RejectedInput(format!("c must be > 0, got {c}")));
    }
    if eps.iter().any(|&e| !e.is_finite() || e <= 0.0) {
        return Err(Error::RejectedInput(
            "offsets must be finite and > 0".into(),
        ));
    }

    let tail = 2.0 * c / d as f64;
    let mut sides = eps.to_vec();
    sides.extend(std::iter::repeat_n(tail, d - k));
    let r = Hyperrectangle::new(sides)?;
    let chi_index = ((1usize << k) - 1) << (d - k);
    let lhs = spectrum(&r, f)?.eigenvalues[chi_index];

    let mut rhs = 0.0;
    let mut choose = 1.0f64;
    for s in 0..=(d - k) {
        if s > 0 {
            choose = choose * (d - k - s + 1) as f64 / s as f64;
        }
        rhs += choose * delta_k(f, tail * s as f64, eps)?;
    }
    Ok(BinomIdentityCheck { lhs, rhs })
}
