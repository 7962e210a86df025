//! Exact spectra for hyperrectangle distance matrices, with the metric and
//! kernel machinery built on top of them.
//!
//! Every matrix of the form `D[i][j] = f(||p_i - p_j||_1)`, where the `p_i`
//! are the `2^d` vertices of an axis-aligned box, is diagonalized by the
//! Walsh–Hadamard columns, and its eigenvalues are a single unnormalized
//! Walsh–Hadamard transform of `f` sampled at subset sums of the side
//! lengths. That one fact powers everything in this crate:
//!
//! - [`walsh`]: the bit conventions and the `O(d 2^d)` transform;
//! - [`spectrum`]: box spectra along three independent routes (transform,
//!   subset sums, iterated integrals), the alternating difference operator,
//!   and the binomial eigenvalue identity;
//! - [`functions`]: a closed catalog of analytic functions with exact
//!   derivatives, and sampled testers for complete monotonicity and the
//!   Bernstein property;
//! - [`embed`]: cut embeddings of finite l1 point sets onto weighted
//!   hypercube corners, the negative-type criterion, and constructive
//!   Manhattan-to-Manhattan metric transforms for Bernstein functions;
//! - [`kernel`]: positive-definiteness of Manhattan kernel matrices, with
//!   closed-form counterexample search;
//! - [`rank_lab`]: entrywise application and rank experiments on the
//!   `M(a) = <a, B(i XOR j)>` matrix family;
//! - [`linalg`]: the dense symmetric Jacobi eigensolver, one-sided Jacobi
//!   singular values, and numeric rank underneath it all.
//!
//! The guide in `book/` walks through the same material chapter by chapter;
//! its code snippets compile and run as part of `cargo test --doc`.

pub mod book;
pub mod embed;
pub mod error;
pub mod functions;
pub mod kernel;
pub mod linalg;
pub mod rank_lab;
pub mod spectrum;
pub mod walsh;

pub use embed::{
    cut_embedding, gram_from_squared_distances, manhattan_transform, negative_type_test,
    squared_euclidean_points, CubeEmbedding, Metric, NegativeTypeVerdict, PointSet,
};
pub use error::{Error, Result};
pub use functions::{
    bernstein_test, cm_test, FunctionSpec, MonotoneVerdict, MonotoneWitness, SampleGrid,
};
pub use kernel::{
    cm_witness_search, kernel_matrix, kernel_to_bernstein_link, psd_on_pointset, simplex_witness,
    CmWitness, KernelVerdict, SimplexWitness,
};
pub use linalg::{
    numeric_rank, project_off_ones, psd_verdict, sym_eigen, EigenDecomposition, Matrix, PsdVerdict,
    RankReport, SymMatrix, DEFAULT_RANK_REL_TOL,
};
pub use rank_lab::{
    converse_experiment, dth_difference, eigsum_identity_check, entrywise, lambda_f,
    poly_rank_bound, walsh_family, zero_eigenvalue_scan, RankExperimentReport, WalshVariant,
};
pub use spectrum::{
    binom_eigenvalue_identity, delta_k, diagonalization_check, distance_matrix, spectrum,
    spectrum_integral, spectrum_of_fn, spectrum_subset_sum, DiagonalizationCheck, Hyperrectangle,
    SpectrumMethod, SpectrumResult,
};
pub use walsh::{bits, fwht, fwht_in_place, hadamard_column, BitVector};
