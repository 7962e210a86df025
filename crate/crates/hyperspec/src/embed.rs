//! Constructive Manhattan metric pipeline: embed finite l1 point sets onto
//! weighted hypercube corners, realize Bernstein-transformed distances as
//! squared Euclidean and as Manhattan distances with explicit output points,
//! and test the negative-type criterion for squared-Euclidean embeddability.
//!
//! The pipeline behind [`manhattan_transform`] is
//!
//! 1. [`cut_embedding`]: rewrite the points as bit rows on a weighted
//!    hypercube (one axis per gap between consecutive distinct coordinate
//!    values), preserving every pairwise l1 distance exactly;
//! 2. spectrum of the corresponding hyperrectangle under `f`: the scaled
//!    eigenvalues `μ_χ = -λ_χ / 2` (and `μ_0 = 0`) are the squared
//!    half-side lengths of a new box on whose corners the transformed
//!    distances live;
//! 3. per-axis re-encoding: a coordinate that only takes the two values
//!    `±c_χ` contributes `(2 c_χ)^2 · bit` to an l1 axis, which turns the
//!    squared Euclidean realization into a Manhattan one.
//!
//! A negative `μ_χ` certifies that `f` does not map these distances to
//! squared Euclidean at all; the error carries the offending character.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{bernstein_test, FunctionSpec, SampleGrid};
use crate::linalg::{default_psd_tol, project_off_ones, sym_eigen, SymMatrix};
use crate::spectrum::{spectrum, Hyperrectangle};
use crate::walsh::hadamard_sign;

/// Metric tag carried by a [`PointSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L1,
    L2,
}

/// A finite list of points with a metric tag. Rows are points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet {
    metric: Metric,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(metric: Metric, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::RejectedInput(
                "point set needs at least one point".into(),
            ));
        }
        let m = points[0].len();
        if points.iter().any(|p| p.len() != m) {
            return Err(Error::RejectedInput(
                "points have inconsistent dimensions".into(),
            ));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::RejectedInput("non-finite coordinate".into()));
        }
        Ok(Self { metric, points })
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Pairwise l1 distance.
    pub fn l1_distance(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Pairwise squared Euclidean distance.
    pub fn sq_l2_distance(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Points rewritten as bit rows on a weighted hypercube: row `i` of `bits`
/// selects corners, `sides[k]` is the axis weight, and weighted Hamming
/// distance between rows reproduces the original l1 distances.
#[derive(Debug, Clone, Serialize)]
pub struct CubeEmbedding {
    pub bits: Vec<Vec<u8>>,
    pub sides: Vec<f64>,
}

impl CubeEmbedding {
    /// Number of cube axes.
    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    /// Weighted l1 distance between two bit rows.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.bits[i]
            .iter()
            .zip(&self.bits[j])
            .zip(&self.sides)
            .filter(|((a, b), _)| a != b)
            .map(|(_, &s)| s)
            .sum()
    }

    /// Lexicographic vertex index of row `i` (bit 0 most significant).
    pub fn vertex_index(&self, i: usize) -> usize {
        self.bits[i]
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }
}

/// Rewrite an l1 point set as corners of a weighted hypercube.
///
/// Per original coordinate, the sorted distinct values `v_1 < … < v_m` yield
/// `m - 1` axes of side `v_{t+1} - v_t`; a point's bit on that axis is 1 iff
/// its coordinate exceeds `v_t`. Distances telescope exactly. Point sets
/// with a single distinct value per coordinate produce an empty cube.
pub fn cut_embedding(x: &PointSet) -> Result<CubeEmbedding> {
    if x.metric() != Metric::L1 {
        return Err(Error::RejectedInput(
            "cut embedding requires an l1 point set".into(),
        ));
    }
    let n = x.len();
    let mut bits: Vec<Vec<u8>> = vec![Vec::new(); n];
    let mut sides = Vec::new();
    for c in 0..x.dim() {
        let mut values: Vec<f64> = (0..n).map(|i| x.point(i)[c]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for t in 0..values.len().saturating_sub(1) {
            sides.push(values[t + 1] - values[t]);
            for (i, row) in bits.iter_mut().enumerate() {
                row.push(u8::from(x.point(i)[c] > values[t]));
            }
        }
    }
    Ok(CubeEmbedding { bits, sides })
}

/// `M = -1/2 Π D Π` for a symmetric zero-diagonal matrix of squared
/// distances. If centered points `y` realize `D`, then `M[i][j] = <y_i, y_j>`.
pub fn gram_from_squared_distances(d: &SymMatrix) -> Result<SymMatrix> {
    for i in 0..d.n() {
        if d.get(i, i) != 0.0 {
            return Err(Error::RejectedInput(format!(
                "diagonal entry ({i}, {i}) = {} is not zero",
                d.get(i, i)
            )));
        }
    }
    let centered = project_off_ones(d)?;
    SymMatrix::from_fn(d.n(), |i, j| -0.5 * centered.get(i, j))
}

/// Outcome of the negative-type test on a zero-diagonal symmetric matrix.
#[derive(Debug, Clone, Serialize)]
pub struct NegativeTypeVerdict {
    pub holds: bool,
    /// Largest eigenvalue of `Π D Π`.
    pub max_projected_eigenvalue: f64,
    /// Direction attaining it; orthogonal to the all-ones vector whenever
    /// the verdict fails.
    pub witness: Vec<f64>,
    pub tolerance: f64,
}

/// Negative-type criterion: `x' D x ≤ 0` for all `x ⊥ 1`, equivalently the
/// largest eigenvalue of `Π D Π` is nonpositive. Exactly the condition for
/// `D` to embed as squared Euclidean distances.
pub fn negative_type_test(d: &SymMatrix) -> Result<NegativeTypeVerdict> {
    for i in 0..d.n() {
        if d.get(i, i) != 0.0 {
            return Err(Error::RejectedInput(format!(
                "diagonal entry ({i}, {i}) = {} is not zero",
                d.get(i, i)
            )));
        }
    }
    let projected = project_off_ones(d)?;
    let eig = sym_eigen(&projected)?;
    let top = eig.values.len() - 1;
    let max_projected_eigenvalue = eig.values[top];
    let tolerance = default_psd_tol(d);
    Ok(NegativeTypeVerdict {
        holds: max_projected_eigenvalue <= tolerance,
        max_projected_eigenvalue,
        witness: eig.vector(top),
        tolerance,
    })
}

/// Squared half-side weights `μ_χ` of the transformed box: `μ_0 = 0` and
/// `μ_χ = -λ_χ / 2` for `χ ≠ 0`. Fails with the offending character when a
/// weight is meaningfully negative; round-off negatives are clamped to 0.
fn transform_weights(sides: &[f64], f: &FunctionSpec) -> Result<Vec<f64>> {
    let r = Hyperrectangle::new(sides.to_vec())?;
    let s = spectrum(&r, f)?;
    let scale = 1.0 + s.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * scale;
    let mut mu = vec![0.0; s.eigenvalues.len()];
    for (chi, &lambda) in s.eigenvalues.iter().enumerate().skip(1) {
        let weight = -lambda / 2.0;
        if weight < -tol {
            return Err(Error::NegativeType { chi, lambda });
        }
        mu[chi] = weight.max(0.0);
    }
    Ok(mu)
}

fn require_bernstein(f: &FunctionSpec) -> Result<()> {
    let verdict = bernstein_test(f, &SampleGrid::standard(), 6)?;
    match verdict.holds {
        true => Ok(()),
        false => Err(Error::NotBernstein(
            verdict.witness.expect("failing verdict has witness"),
        )),
    }
}

/// Dense-route cap: the output has `2^d` points with `2^d` coordinates.
pub const MAX_EMBED_DIM: usize = 12;

/// Realize `f` of the hyperrectangle's l1 distances as squared Euclidean
/// distances: returns `2^d` points (coordinates indexed by character) with
///
/// ```text
/// point_i[χ] = (-1)^{<B(i), B(χ)>} sqrt(μ_χ) / 2^{d/2},
/// ```
///
/// so that `||p_i - p_j||_2^2 = f(||x_i - x_j||_1)` for the vertices `x` of
/// `r`. Requires `f` to pass the sampled Bernstein test.
pub fn squared_euclidean_points(r: &Hyperrectangle, f: &FunctionSpec) -> Result<PointSet> {
    if r.dim() > MAX_EMBED_DIM {
        return Err(Error::Capability(format!(
            "dense embedding needs d <= {MAX_EMBED_DIM}, got {}",
            r.dim()
        )));
    }
    require_bernstein(f)?;
    squared_euclidean_points_unchecked(r, f)
}

/// [`squared_euclidean_points`] without the Bernstein precondition; a
/// non-Bernstein `f` surfaces as a negative-type violation instead.
pub fn squared_euclidean_points_unchecked(
    r: &Hyperrectangle,
    f: &FunctionSpec,
) -> Result<PointSet> {
    let mu = transform_weights(r.sides(), f)?;
    let n = mu.len();
    let norm = 1.0 / (n as f64).sqrt();
    let half: Vec<f64> = mu.iter().map(|&m| m.sqrt() * norm).collect();
    let points = (0..n)
        .map(|i| {
            (0..n)
                .map(|chi| hadamard_sign(i, chi) * half[chi])
                .collect()
        })
        .collect();
    PointSet::new(Metric::L2, points)
}

/// Apply a Bernstein transform to an l1 point set, producing explicit output
/// points whose pairwise l1 distances are `f` of the input distances.
///
/// Output axes are indexed by the characters of the cut-embedding cube; axes
/// whose half-length `c_χ = sqrt(μ_χ / 2^d)` falls below `1e-12` of the
/// largest are dropped. Only rows for the input points are materialized, so
/// memory is `n × (kept axes)` even though the ambient cube has `2^d`
/// corners.
pub fn manhattan_transform(x: &PointSet, f: &FunctionSpec) -> Result<PointSet> {
    if x.metric() != Metric::L1 {
        return Err(Error::RejectedInput(
            "manhattan transform requires an l1 point set".into(),
        ));
    }
    require_bernstein(f)?;
    manhattan_transform_unchecked(x, f)
}

/// [`manhattan_transform`] without the Bernstein precondition.
pub fn manhattan_transform_unchecked(x: &PointSet, f: &FunctionSpec) -> Result<PointSet> {
    f.validate()?;
    let cube = cut_embedding(x)?;
    let n = x.len();
    if cube.dim() == 0 {
        // All points coincide; f(0) = 0 for any admissible transform.
        return PointSet::new(Metric::L1, vec![Vec::new(); n]);
    }

    let mu = transform_weights(&cube.sides, f)?;
    let cube_size = mu.len() as f64;

    // Axis weight (2 c_χ)^2 = 4 μ_χ / 2^d; drop negligible axes.
    let weights: Vec<f64> = mu.iter().map(|&m| 4.0 * m / cube_size).collect();
    let max_half = mu.iter().fold(0.0f64, |acc, &m| acc.max(m.sqrt()));
    let cutoff = 1e-12 * max_half;
    let kept: Vec<usize> = (0..weights.len())
        .filter(|&chi| mu[chi].sqrt() > cutoff)
        .collect();

    let corner: Vec<usize> = (0..n).map(|i| cube.vertex_index(i)).collect();
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            kept.iter()
                .map(|&chi| {
                    // Bit of the transformed corner on axis χ.
                    if hadamard_sign(corner[i], chi) < 0.0 {
                        weights[chi]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    PointSet::new(Metric::L1, points)
}
