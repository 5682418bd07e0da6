//! Periodized spectral densities and their Fourier coefficients.
//!
//! The central object is `p(x) = Σ_n |f(x + n)|²`, the periodization of a
//! squared modulus over the integer lattice.  Applied to the Fourier
//! transform of a generator ψ it produces the spectral density of the
//! integer-translate system {ψ(· - k)}: the Radon-Nikodym derivative of the
//! spectral measure of the unit translation restricted to the cyclic
//! subspace of ψ.  The lattice sum is truncated at a caller-chosen shell
//! count and the last shell's contribution is reported as `tail_bound`
//! rather than hidden.

use num_complex::Complex64;
use thiserror::Error;

use crate::funcs::{Evaluate, FuncError, LineFunction};

/// Grid values more negative than this are treated as corrupt rather than
/// rounding noise.
pub const NEGATIVE_CLAMP: f64 = -1e-14;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("n_grid must be positive")]
    EmptyGrid,
    #[error("n_terms must be at least 1")]
    NoShells,
    #[error("function window [{lo}, {hi}) does not cover the requested shells [{need_lo}, {need_hi})")]
    DomainTooSmall { lo: f64, hi: f64, need_lo: f64, need_hi: f64 },
    #[error("density value {0} at index {1} is more negative than the clamp threshold")]
    NegativeDensity(f64, usize),
    #[error("generator has zero norm")]
    ZeroFunction,
    #[error("k_max {k_max} must be below n_grid/2 = {limit} to avoid aliasing")]
    Aliasing { k_max: usize, limit: usize },
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// Nonnegative samples of a 1-periodic density at `x_j = j / n_grid`,
/// together with the reported truncation error of the lattice sum that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicDensity {
    values: Vec<f64>,
    tail_bound: f64,
}

impl PeriodicDensity {
    /// Validates nonnegativity: values in `[NEGATIVE_CLAMP, 0)` are clamped
    /// to zero, anything lower is rejected.
    pub fn new(values: Vec<f64>, tail_bound: f64) -> Result<Self, DensityError> {
        if values.is_empty() {
            return Err(DensityError::EmptyGrid);
        }
        let mut clamped = values;
        for (j, v) in clamped.iter_mut().enumerate() {
            if *v < NEGATIVE_CLAMP {
                return Err(DensityError::NegativeDensity(*v, j));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(Self { values: clamped, tail_bound })
    }

    pub fn from_fn(n_grid: usize, f: impl Fn(f64) -> f64) -> Result<Self, DensityError> {
        let values = (0..n_grid).map(|j| f(j as f64 / n_grid as f64)).collect();
        Self::new(values, 0.0)
    }

    pub fn n_grid(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.values.len() as f64
    }

    /// ∫₀¹ p dx.  For a periodic function sampled at left endpoints the
    /// trapezoid rule with wrap-around equals the plain mean.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// ∫₀¹ p² dx on the grid.
    pub fn integral_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Complex coefficients indexed `k_min ..= k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    k_min: i64,
    values: Vec<Complex64>,
}

impl CoefficientSequence {
    pub fn new(k_min: i64, values: Vec<Complex64>) -> Self {
        Self { k_min, values }
    }

    /// Symmetric sequence over `-k_max ..= k_max`.
    pub fn symmetric(k_max: usize, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), 2 * k_max + 1);
        Self { k_min: -(k_max as i64), values }
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.values.len() as i64 - 1
    }

    /// Coefficient at `k`, zero outside the stored range.
    pub fn get(&self, k: i64) -> Complex64 {
        let idx = k - self.k_min;
        if idx < 0 || idx >= self.values.len() as i64 {
            Complex64::ZERO
        } else {
            self.values[idx as usize]
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (self.k_min + i as i64, *v))
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// `values[j] = Σ_{|n| <= n_terms} |f(j/n_grid + n)|²` with the last
/// shell's largest contribution (both signs, doubled) reported as the tail
/// bound.  Errors if the evaluator's window does not cover the shells.
pub fn periodize_abs2(
    f: &dyn Evaluate,
    n_grid: usize,
    n_terms: usize,
) -> Result<PeriodicDensity, DensityError> {
    if n_grid == 0 {
        return Err(DensityError::EmptyGrid);
    }
    if n_terms == 0 {
        return Err(DensityError::NoShells);
    }
    let need_lo = -(n_terms as f64);
    let need_hi = n_terms as f64 + 1.0;
    if let Some((lo, hi)) = f.coverage() {
        if lo > need_lo || hi < need_hi {
            return Err(DensityError::DomainTooSmall { lo, hi, need_lo, need_hi });
        }
    }
    let mut values = vec![0.0f64; n_grid];
    let mut last_shell = 0.0f64;
    for (j, acc) in values.iter_mut().enumerate() {
        let x = j as f64 / n_grid as f64;
        let mut sum = 0.0;
        for n in -(n_terms as i64)..=(n_terms as i64) {
            let term = f.value_at(x + n as f64).norm_sqr();
            sum += term;
            if n.unsigned_abs() as usize == n_terms {
                last_shell = last_shell.max(term);
            }
        }
        *acc = sum;
    }
    PeriodicDensity::new(values, 2.0 * last_shell)
}

/// Spectral density of the translate system of ψ: the periodization of
/// |ψ^|² sampled on the grid.  ∫₀¹ p equals ‖ψ‖² up to the reported
/// truncation and grid error.
pub fn spectral_density(
    psi: &LineFunction,
    n_grid: usize,
    n_terms: usize,
) -> Result<PeriodicDensity, DensityError> {
    if psi.is_zero() {
        return Err(DensityError::ZeroFunction);
    }
    let eval = psi.frequency_evaluator()?;
    periodize_abs2(&eval, n_grid, n_terms)
}

/// The autocorrelation sequence `r_k = <ψ | ψ(· - k)>` for `|k| <= k_max`,
/// Hermitian by construction (`r_{-k} = conj(r_k)`).
pub fn autocorrelation_coeffs(
    psi: &LineFunction,
    k_max: usize,
) -> Result<CoefficientSequence, DensityError> {
    let mut values = vec![Complex64::ZERO; 2 * k_max + 1];
    for k in 0..=k_max {
        let r = match psi {
            LineFunction::Piecewise(_) | LineFunction::Samples(_) => {
                psi.inner(&psi.translate(k as i64)?)?
            }
            // <ψ|ψ_k> = ∫ |ψ^(t)|² e^{-i2πkt} dt: the transform of the
            // step function |ψ^|² evaluated at integer k, in closed form.
            LineFunction::PiecewiseTransform(spec) => {
                spec.abs_squared().transform_at(k as f64)
            }
            // Riemann sum of the same integral over the sample window.
            LineFunction::TransformSamples(s) => {
                let mut acc = Complex64::ZERO;
                for (j, v) in s.values().iter().enumerate() {
                    let t = s.point(j);
                    acc += v.norm_sqr()
                        * Complex64::from_polar(
                            1.0,
                            -2.0 * std::f64::consts::PI * k as f64 * t,
                        );
                }
                acc * s.step()
            }
        };
        values[k_max + k] = r;
        values[k_max - k] = r.conj();
    }
    Ok(CoefficientSequence::symmetric(k_max, values))
}

/// Discrete Fourier coefficients of the density samples, normalized by
/// `1/n_grid`: `p^(k) = (1/n) Σ_j p_j e^{-i2πkj/n}` for `|k| <= k_max`.
pub fn density_fourier_coeffs(
    p: &PeriodicDensity,
    k_max: usize,
) -> Result<CoefficientSequence, DensityError> {
    let n = p.n_grid();
    if 2 * k_max >= n {
        return Err(DensityError::Aliasing { k_max, limit: n / 2 });
    }
    let mut values = vec![Complex64::ZERO; 2 * k_max + 1];
    for k in 0..=k_max {
        let mut acc = Complex64::ZERO;
        for (j, &v) in p.values().iter().enumerate() {
            let angle = -2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64;
            acc += v * Complex64::from_polar(1.0, angle);
        }
        acc /= n as f64;
        values[k_max + k] = acc;
        values[k_max - k] = acc.conj();
    }
    Ok(CoefficientSequence::symmetric(k_max, values))
}

/// Outcome of the L²-membership diagnostic for a density: partial sums
/// `S_K = Σ_{|k| <= K} |p^(k)|²` and whether they have numerically
/// converged (which, with the grid-finite ∫p², certifies `p ∈ L²(0,1)` at
/// grid resolution and hence closability of the synthesis operator).
#[derive(Debug, Clone)]
pub struct ClosabilityReport {
    pub in_l2: bool,
    pub partial_sums: Vec<f64>,
}

/// Default relative convergence tolerance for [`closability_check`].
pub const CLOSABILITY_TOL: f64 = 1e-3;

pub fn closability_check(
    p: &PeriodicDensity,
    k_max: usize,
) -> Result<ClosabilityReport, DensityError> {
    let coeffs = density_fourier_coeffs(p, k_max)?;
    let mut partial_sums = Vec::with_capacity(k_max + 1);
    let mut running = coeffs.get(0).norm_sqr();
    partial_sums.push(running);
    for k in 1..=k_max {
        running += coeffs.get(k as i64).norm_sqr() + coeffs.get(-(k as i64)).norm_sqr();
        partial_sums.push(running);
    }
    let s_full = partial_sums[k_max];
    let s_half = partial_sums[k_max / 2];
    let converged = (s_full - s_half).abs() < CLOSABILITY_TOL * s_full.max(f64::MIN_POSITIVE);
    let in_l2 = p.integral_sq().is_finite() && converged;
    Ok(ClosabilityReport { in_l2, partial_sums })
}
