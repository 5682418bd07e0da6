//! Numerical toolkit for the spectral analysis of integer-translate
//! systems in L²(ℝ).
//!
//! Given a generator ψ, the periodization of |ψ^|² over the integer
//! lattice is a 1-periodic density that completely describes the system
//! {ψ(· - k)}: whether the translates form an orthonormal basis, a
//! Parseval or plain frame, a Riesz basis or only a Bessel family; how to
//! renormalize ψ so its density becomes an indicator; and when nontrivial
//! l² relations among the translates exist, together with explicit
//! coefficients realizing them.  Finite families get the matrix-valued
//! analogue, whose pointwise rank profile produces the nested supports of
//! the cyclic decomposition.  The same densities drive the stochastic
//! side: set-indexed Gaussian processes with covariance ∫_A∩B p, the
//! stochastic-integral isometry, and Karhunen-Loève eigenanalysis of
//! covariance kernels.
//!
//! Every quantitative path is cross-checked against an independent route:
//! closed forms against lattice sums, density Fourier coefficients against
//! exact translation overlaps, density norms against time-domain
//! assembly, frame bounds against Toeplitz Gram eigenvalues, Monte-Carlo
//! moments against analytic values.

pub mod classify;
pub mod cli;
pub mod density;
pub mod funcs;
pub mod io;
pub mod kl;
pub mod matrix_density;
pub mod renorm;
pub mod stochastic;
pub mod wavelets;

pub use classify::{classify, gram_frame_bounds_oracle, FrameReport, Verdict};
pub use density::{
    autocorrelation_coeffs, closability_check, density_fourier_coeffs, periodize_abs2,
    spectral_density, CoefficientSequence, PeriodicDensity,
};
pub use funcs::{
    fourier_transform, inner_product, translate, Domain, LineFunction, PeriodicGridFunction,
    PiecewiseConstantSpec, SampledLineFunction,
};
pub use matrix_density::{
    cyclic_decomposition, gram_integral, lemma22_check, matrix_density, weighted_norm,
    MatrixDensityGrid,
};
pub use kl::{kl_coefficients, kl_decompose, kl_reconstruct, KlExpansion};
pub use renorm::{
    construct_dependence_coeffs, detect_l2_dependence, essential_support, renormalize,
    verify_dependence, GridSet,
};
pub use stochastic::{
    brownian_paths, mu_gaussian_increments, multiplication_unitary, nongaussian_realization,
    stationary_gaussian, stochastic_integral, CovarianceSequence, PathEnsemble, ProcessKind,
};
pub use wavelets::{
    consistency_check, parseval_wavelet_check, qmf_check, stretched_haar,
    stretched_haar_density, DyadicFilter, HaarKind, StretchedHaar,
};
