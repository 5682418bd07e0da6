//! Frame classification of translate systems from their spectral density.
//!
//! The five nested conditions on {ψ(· - k)} — orthonormal basis, Parseval
//! frame, Riesz basis, frame, Bessel family — are each equivalent to a
//! pointwise condition on the density p: identically 1, an indicator,
//! bounded above and below a.e., bounded above and below on the essential
//! support, bounded above.  On a grid "essential" bounds are plain min/max
//! and a tolerance absorbs both grid error and the almost-everywhere
//! qualifier.  An independent cross-check diagonalizes finite sections of
//! the Toeplitz Gram matrix of the translates, whose extreme eigenvalues
//! squeeze into the essential range of p as the section grows.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{autocorrelation_coeffs, DensityError, PeriodicDensity};
use crate::funcs::LineFunction;

/// Values at or below this are treated as exact zeros of the density when
/// separating "bounded below on the support" from "decays into the support".
pub const ZERO_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("density is identically zero; the generator must be nonzero")]
    ZeroDensity,
    #[error("tolerance must lie in (0, 1/2), got {0}")]
    BadTolerance(f64),
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// Verdicts ordered from strongest to weakest; `None` flags a density that
/// exceeded the caller's boundedness cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "ONB")]
    Onb,
    #[serde(rename = "PARSEVAL")]
    Parseval,
    #[serde(rename = "RIESZ")]
    Riesz,
    #[serde(rename = "FRAME")]
    Frame,
    #[serde(rename = "BESSEL")]
    Bessel,
    #[serde(rename = "NONE")]
    None,
}

impl Verdict {
    /// True when `self` implies `weaker` in the verdict lattice
    /// (ONB ⇒ PARSEVAL ⇒ FRAME ⇒ BESSEL, RIESZ ⇒ FRAME).
    pub fn implies(self, weaker: Verdict) -> bool {
        use Verdict::*;
        if self == weaker {
            return true;
        }
        matches!(
            (self, weaker),
            (Onb, Parseval | Frame | Bessel)
                | (Parseval, Frame | Bessel)
                | (Riesz, Frame | Bessel)
                | (Frame, Bessel)
        )
    }
}

/// Classification outcome: verdict plus the numeric bounds it rests on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameReport {
    pub verdict: Verdict,
    #[serde(rename = "A")]
    pub lower: f64,
    #[serde(rename = "B")]
    pub upper: f64,
    pub support_mass: f64,
    pub tol: f64,
}

impl FrameReport {
    /// Numeric coherence of the report with its own verdict; used by the
    /// property suites.
    pub fn lattice_consistent(&self) -> bool {
        let t = self.tol;
        self.lower <= self.upper + t
            && match self.verdict {
                Verdict::Onb => {
                    (self.lower - 1.0).abs() <= t
                        && (self.upper - 1.0).abs() <= t
                        && (self.support_mass - 1.0).abs() <= t
                }
                Verdict::Parseval => (self.upper - 1.0).abs() <= t && self.support_mass > 0.0,
                Verdict::Riesz => self.lower >= t && self.support_mass >= 1.0 - t,
                Verdict::Frame => self.lower >= t,
                Verdict::Bessel => self.upper.is_finite(),
                Verdict::None => true,
            }
    }
}

/// Classify with the default (infinite) boundedness cap.
pub fn classify(p: &PeriodicDensity, tol: f64) -> Result<FrameReport, ClassifyError> {
    classify_with_cap(p, tol, f64::INFINITY)
}

/// Classify a density at tolerance `tol`.
///
/// Decision ladder over the grid samples:
/// - every value within `tol` of 1 → ONB;
/// - every value within `tol` of 0 or of 1 (some near 1) → PARSEVAL;
/// - min over the whole grid at least `tol` → RIESZ (bounds hold a.e.);
/// - min over the positive samples (above [`ZERO_FLOOR`]) at least `tol`
///   → FRAME: the density is cleanly bounded below on its support;
/// - otherwise BESSEL: bounded above but with values decaying into the
///   support, so no frame lower bound survives grid refinement.
///
/// `A` is the candidate lower bound the verdict rests on (min over the
/// positive samples for FRAME, min over the grid otherwise) and `B` the
/// grid maximum.  Densities whose maximum exceeds `cap` report NONE.
pub fn classify_with_cap(
    p: &PeriodicDensity,
    tol: f64,
    cap: f64,
) -> Result<FrameReport, ClassifyError> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(ClassifyError::BadTolerance(tol));
    }
    let vals = p.values();
    let upper = p.max();
    if upper <= ZERO_FLOOR {
        return Err(ClassifyError::ZeroDensity);
    }
    let min_all = p.min();
    let support_count = vals.iter().filter(|&&v| v > tol).count();
    let support_mass = support_count as f64 / vals.len() as f64;
    let min_positive = vals
        .iter()
        .copied()
        .filter(|&v| v > ZERO_FLOOR)
        .fold(f64::INFINITY, f64::min);

    let all_near_one = vals.iter().all(|&v| (v - 1.0).abs() <= tol);
    let all_near_zero_or_one = vals.iter().all(|&v| v <= tol || (v - 1.0).abs() <= tol);

    let (verdict, lower) = if upper > cap {
        (Verdict::None, min_all)
    } else if all_near_one {
        (Verdict::Onb, min_all)
    } else if all_near_zero_or_one && support_mass > 0.0 {
        (Verdict::Parseval, min_positive)
    } else if support_mass >= 1.0 - tol && min_all >= tol {
        (Verdict::Riesz, min_all)
    } else if min_positive >= tol {
        (Verdict::Frame, min_positive)
    } else {
        (Verdict::Bessel, min_all)
    };

    Ok(FrameReport { verdict, lower, upper, support_mass, tol })
}

/// Extreme eigenvalues of a finite Gram section of the translate system.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GramBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Independent verification route for the frame bounds: assemble the
/// `(2 k_max + 1)²` Toeplitz Gram matrix `G_{jk} = <ψ_j|ψ_k>` from direct
/// inner products and diagonalize it.  As `k_max` grows the extreme
/// eigenvalues converge to the essential bounds of the density (restricted
/// Riesz bounds); nested sections interlace, so `lambda_max` is
/// nondecreasing and `lambda_min` nonincreasing in `k_max`.
pub fn gram_frame_bounds_oracle(
    psi: &LineFunction,
    k_max: usize,
) -> Result<GramBounds, ClassifyError> {
    let r = autocorrelation_coeffs(psi, 2 * k_max)?;
    let n = 2 * k_max + 1;
    let gram = DMatrix::from_fn(n, n, |row, col| {
        // G_{jk} = <T^j ψ | T^k ψ> = r_{k - j}
        r.get(col as i64 - row as i64)
    });
    let eigen = gram.symmetric_eigen();
    let mut lambda_min = f64::INFINITY;
    let mut lambda_max = f64::NEG_INFINITY;
    for ev in eigen.eigenvalues.iter() {
        lambda_min = lambda_min.min(*ev);
        lambda_max = lambda_max.max(*ev);
    }
    Ok(GramBounds { lambda_min, lambda_max })
}

/// Hermitian Toeplitz matrix from an autocorrelation-style sequence; shared
/// by the Gram oracle above and the stationary Gaussian sampler.
pub fn toeplitz_from_coeffs(
    get: impl Fn(i64) -> Complex64,
    n: usize,
) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |row, col| get(col as i64 - row as i64))
}
