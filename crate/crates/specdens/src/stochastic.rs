//! Gaussian realizations of the spectral data: stationary sequences with a
//! prescribed autocorrelation, Brownian motion, set-indexed processes with
//! covariance μ(A ∩ B) for dμ = p dx, stochastic integrals against their
//! increments, and the two-variable lattice kernel of the deterministic
//! l²-realization.
//!
//! All randomness flows from a single 64-bit seed.  Path i draws from
//! ChaCha stream i of that seed, so ensembles are bit-reproducible for a
//! given seed and parameters no matter how the paths would be scheduled.
//! Monte-Carlo assertions in the test suites are stated as four standard
//! errors, putting the per-assertion false-alarm probability near 6e-5.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::density::PeriodicDensity;
use crate::funcs::{FuncError, LineFunction, PeriodicGridFunction};

#[derive(Debug, Error)]
pub enum StochasticError {
    #[error("covariance sequence must be nonempty")]
    EmptyCovariance,
    #[error("covariance Toeplitz section is not positive semidefinite: min eigenvalue {0}")]
    NotPsd(f64),
    #[error("covariance r_0 must be real and the sequence Hermitian; found imaginary part {0}")]
    NotHermitian(f64),
    #[error("complex-valued covariances are outside the real-ensemble model")]
    ComplexCovariance,
    #[error("need at least 2 time points, got {0}")]
    TooFewTimes(usize),
    #[error("integrand grid size {0} does not match the ensemble's {1} cells")]
    GridMismatch(usize, usize),
    #[error("ensemble time grid is not the uniform grid on [0,1]")]
    NonUniformGrid,
    #[error("process kind {0:?} does not support stochastic integrals")]
    UnsupportedKind(ProcessKind),
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// How an ensemble was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Brownian,
    MuGaussian,
    Stationary,
}

/// M sampled paths of a centered real process on a common time grid.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    time_grid: Vec<f64>,
    paths: Vec<Vec<f64>>,
    seed: u64,
    kind: ProcessKind,
}

impl PathEnsemble {
    /// Assemble an ensemble from externally produced paths; every path
    /// must match the grid length.
    pub fn from_parts(
        time_grid: Vec<f64>,
        paths: Vec<Vec<f64>>,
        seed: u64,
        kind: ProcessKind,
    ) -> Result<Self, StochasticError> {
        if time_grid.len() < 2 {
            return Err(StochasticError::TooFewTimes(time_grid.len()));
        }
        for p in &paths {
            if p.len() != time_grid.len() {
                return Err(StochasticError::GridMismatch(p.len(), time_grid.len()));
            }
        }
        Ok(Self { time_grid, paths, seed, kind })
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.time_grid
    }

    pub fn paths(&self) -> &[Vec<f64>] {
        &self.paths
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn n_times(&self) -> usize {
        self.time_grid.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    /// Sample mean of X at time index j.
    pub fn empirical_mean(&self, j: usize) -> f64 {
        self.paths.iter().map(|p| p[j]).sum::<f64>() / self.paths.len() as f64
    }

    /// Raw second moment E(X_j X_k) over the ensemble (the processes here
    /// are centered, so no mean subtraction).
    pub fn empirical_cov(&self, j: usize, k: usize) -> f64 {
        self.paths.iter().map(|p| p[j] * p[k]).sum::<f64>() / self.paths.len() as f64
    }
}

/// Hermitian covariance sequence r_0..r_K with r_{-k} = conj(r_k) implied.
#[derive(Debug, Clone)]
pub struct CovarianceSequence {
    values: Vec<Complex64>,
}

impl CovarianceSequence {
    /// Validates Hermitian structure (real r_0) and positive
    /// semidefiniteness of the (K+1)-point Toeplitz section, which covers
    /// every smaller section by eigenvalue interlacing.
    pub fn new(values: Vec<Complex64>) -> Result<Self, StochasticError> {
        if values.is_empty() {
            return Err(StochasticError::EmptyCovariance);
        }
        if values[0].im.abs() > 1e-12 {
            return Err(StochasticError::NotHermitian(values[0].im));
        }
        let seq = Self { values };
        let section = seq.toeplitz(seq.values.len());
        let min_eig = section
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(StochasticError::NotPsd(min_eig));
        }
        Ok(seq)
    }

    pub fn from_real(values: Vec<f64>) -> Result<Self, StochasticError> {
        Self::new(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn k_max(&self) -> usize {
        self.values.len() - 1
    }

    /// r_k with Hermitian reflection; zero beyond the stored lags.
    pub fn get(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        if idx >= self.values.len() {
            Complex64::ZERO
        } else if k >= 0 {
            self.values[idx]
        } else {
            self.values[idx].conj()
        }
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im.abs() <= 1e-12)
    }

    /// The n x n Hermitian Toeplitz matrix with entries r_{col - row}.
    pub fn toeplitz(&self, n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |row, col| self.get(col as i64 - row as i64))
    }
}

/// Independent ChaCha stream for path `i` of a seeded ensemble.
fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Draw M stationary Gaussian vectors of length n whose covariance is the
/// n x n Toeplitz section of `r`, via the symmetric eigenvalue square
/// root.  Sections that fail positive semidefiniteness (beyond -1e-10) are
/// refused with the offending minimum eigenvalue; nothing is jittered.
pub fn stationary_gaussian(
    r: &CovarianceSequence,
    n: usize,
    m_paths: usize,
    seed: u64,
) -> Result<PathEnsemble, StochasticError> {
    if n < 2 {
        return Err(StochasticError::TooFewTimes(n));
    }
    if !r.is_real() {
        return Err(StochasticError::ComplexCovariance);
    }
    let section = DMatrix::from_fn(n, n, |row, col| r.get(col as i64 - row as i64).re);
    let eig = section.symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-10 {
        return Err(StochasticError::NotPsd(min_eig));
    }
    // factor = V diag(sqrt(max(lambda, 0))): factor * factor^T = section
    let mut factor = eig.eigenvectors.clone();
    for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        for r_idx in 0..n {
            factor[(r_idx, c)] *= s;
        }
    }
    let mut paths = Vec::with_capacity(m_paths);
    for i in 0..m_paths {
        let mut rng = path_rng(seed, i as u64);
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut x = vec![0.0; n];
        for (row, xv) in x.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (col, gv) in g.iter().enumerate() {
                acc += factor[(row, col)] * gv;
            }
            *xv = acc;
        }
        paths.push(x);
    }
    let time_grid = (0..n).map(|j| j as f64).collect();
    Ok(PathEnsemble { time_grid, paths, seed, kind: ProcessKind::Stationary })
}

/// Shared increment sampler: X_0 = 0 and independent increments of the
/// given variances, accumulated in order.  Identical variance vectors and
/// seeds produce bit-identical ensembles, which is what makes Brownian
/// motion literally the Lebesgue case of the μ-Gaussian sampler.
fn cumulative_paths(variances: &[f64], m_paths: usize, seed: u64) -> Vec<Vec<f64>> {
    let stds: Vec<f64> = variances.iter().map(|v| v.max(0.0).sqrt()).collect();
    (0..m_paths)
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let mut path = Vec::with_capacity(stds.len() + 1);
            let mut x = 0.0;
            path.push(x);
            for s in &stds {
                let g: f64 = rng.sample(StandardNormal);
                x += s * g;
                path.push(x);
            }
            path
        })
        .collect()
}

/// Normalized Brownian motion on [0, 1]: `E(X_s X_t) = min(s, t)` on the
/// uniform grid of `n_times` points, `X_0 = 0` exactly.
pub fn brownian_paths(
    n_times: usize,
    m_paths: usize,
    seed: u64,
) -> Result<PathEnsemble, StochasticError> {
    if n_times < 2 {
        return Err(StochasticError::TooFewTimes(n_times));
    }
    let n_cells = n_times - 1;
    let dt = 1.0 / n_cells as f64;
    let paths = cumulative_paths(&vec![dt; n_cells], m_paths, seed);
    let time_grid = (0..n_times).map(|j| j as f64 * dt).collect();
    Ok(PathEnsemble { time_grid, paths, seed, kind: ProcessKind::Brownian })
}

/// Set-indexed Gaussian process for dμ = p dx, realized through its cell
/// increments: cell j of the density grid carries an independent centered
/// Gaussian of variance `p_j / n_grid`, so for unions of cells
/// `E(X_A X_B) = μ(A ∩ B)`.  Paths hold the cumulative sums on the grid
/// boundaries; the value on a cell union is the sum of its increments.
pub fn mu_gaussian_increments(
    mu_density: &PeriodicDensity,
    m_paths: usize,
    seed: u64,
) -> Result<PathEnsemble, StochasticError> {
    let n = mu_density.n_grid();
    let variances: Vec<f64> = mu_density.values().iter().map(|&p| p / n as f64).collect();
    let paths = cumulative_paths(&variances, m_paths, seed);
    let time_grid = (0..=n).map(|j| j as f64 / n as f64).collect();
    Ok(PathEnsemble { time_grid, paths, seed, kind: ProcessKind::MuGaussian })
}

/// μ-measure of a cell union [a, b) read off one path: X_b - X_a.
pub fn increment_over(ensemble: &PathEnsemble, path: usize, j_from: usize, j_to: usize) -> f64 {
    ensemble.paths[path][j_to] - ensemble.paths[path][j_from]
}

/// Per-path Riemann–Stieltjes sums `Σ_j m(t_j) (X_{t_{j+1}} - X_{t_j})`.
/// The integrand is sampled at the left endpoints of the ensemble's cells,
/// so its grid must have exactly one point per cell.
pub fn stochastic_integral(
    m: &PeriodicGridFunction,
    ensemble: &PathEnsemble,
) -> Result<Vec<Complex64>, StochasticError> {
    match ensemble.kind {
        ProcessKind::Brownian | ProcessKind::MuGaussian => {}
        k => return Err(StochasticError::UnsupportedKind(k)),
    }
    let n_cells = ensemble.n_times() - 1;
    if m.n_grid() != n_cells {
        return Err(StochasticError::GridMismatch(m.n_grid(), n_cells));
    }
    for (j, &t) in ensemble.time_grid.iter().enumerate() {
        if (t - j as f64 / n_cells as f64).abs() > 1e-9 {
            return Err(StochasticError::NonUniformGrid);
        }
    }
    Ok(ensemble
        .paths
        .iter()
        .map(|path| {
            let mut acc = Complex64::ZERO;
            for j in 0..n_cells {
                acc += m.values()[j] * (path[j + 1] - path[j]);
            }
            acc
        })
        .collect())
}

/// The multiplication unitary `m(t) ↦ e_1(t) m(t)` on the density side:
/// pointwise multiplication by `e^{i2πt}`, which preserves `∫ |m|² dμ`
/// exactly because `|e_1| ≡ 1`.
pub fn multiplication_unitary(m: &PeriodicGridFunction) -> PeriodicGridFunction {
    let n = m.n_grid();
    PeriodicGridFunction::new(
        m.values()
            .iter()
            .enumerate()
            .map(|(j, v)| {
                v * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64)
            })
            .collect(),
    )
    .expect("nonempty")
}

/// The two-variable lattice kernel `K(s, t) = Σ_n conj(ψ^(s+n)) ψ^(t+n)`
/// of the deterministic l²-realization `X_t(n) = ψ^(t+n)`: Hermitian, PSD
/// as a Gram matrix, with diagonal equal to the spectral density.
pub fn nongaussian_realization(
    psi: &LineFunction,
    s_grid: &[f64],
    t_grid: &[f64],
    n_terms: usize,
) -> Result<Vec<Vec<Complex64>>, StochasticError> {
    let eval = psi.frequency_evaluator()?;
    let shells: Vec<i64> = (-(n_terms as i64)..=(n_terms as i64)).collect();
    let sample = |grid: &[f64]| -> Vec<Vec<Complex64>> {
        grid.iter()
            .map(|&x| {
                shells
                    .iter()
                    .map(|&n| crate::funcs::Evaluate::value_at(&eval, x + n as f64))
                    .collect()
            })
            .collect()
    };
    let s_rows = sample(s_grid);
    let t_rows = sample(t_grid);
    let kernel = s_rows
        .iter()
        .map(|srow| {
            t_rows
                .iter()
                .map(|trow| {
                    srow.iter()
                        .zip(trow.iter())
                        .map(|(a, b)| a.conj() * b)
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::spectral_density;
    use crate::funcs::PiecewiseConstantSpec;
    use approx::assert_abs_diff_eq;

    fn phi3_covariance() -> CovarianceSequence {
        CovarianceSequence::from_real(vec![1.0 / 3.0, 2.0 / 9.0, 1.0 / 9.0, 0.0]).unwrap()
    }

    #[test]
    fn white_noise_covariance_is_identity() {
        let r = CovarianceSequence::from_real(vec![1.0]).unwrap();
        let e = stationary_gaussian(&r, 4, 100_000, 7).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (e.empirical_cov(j, k) - want).abs() < 0.02,
                    "cov({j},{k}) = {}",
                    e.empirical_cov(j, k)
                );
            }
        }
    }

    #[test]
    fn haar_autocorrelation_gives_independent_samples() {
        // the delta covariance from the density module: identity again
        let phi = LineFunction::Piecewise(PiecewiseConstantSpec::indicator(0.0, 1.0));
        let r = crate::density::autocorrelation_coeffs(&phi, 3).unwrap();
        let cov = CovarianceSequence::new(
            (0..=3).map(|k| r.get(k)).collect(),
        )
        .unwrap();
        let e = stationary_gaussian(&cov, 3, 50_000, 11).unwrap();
        assert!((e.empirical_cov(0, 0) - 1.0).abs() < 0.03);
        assert!(e.empirical_cov(0, 1).abs() < 0.03);
    }

    #[test]
    fn stretched_covariance_reproduces_overlap() {
        let m = 10_000usize;
        let e = stationary_gaussian(&phi3_covariance(), 4, m, 13).unwrap();
        let tol = 3.0 / (m as f64).sqrt();
        assert!(
            (e.empirical_cov(0, 1) - 2.0 / 9.0).abs() < tol,
            "cov(0,1) = {}",
            e.empirical_cov(0, 1)
        );
    }

    #[test]
    fn stationarity_in_the_mean_and_lags() {
        let m = 20_000usize;
        let e = stationary_gaussian(&phi3_covariance(), 6, m, 17).unwrap();
        // centered within 4 standard errors
        for j in 0..6 {
            let se = (e.empirical_cov(j, j) / m as f64).sqrt();
            assert!(e.empirical_mean(j).abs() <= 4.0 * se);
        }
        // covariance depends on the lag only, within 4 SE of each other
        let lag1 = [(0, 1), (1, 2), (4, 5)];
        let vals: Vec<f64> = lag1.iter().map(|&(j, k)| e.empirical_cov(j, k)).collect();
        let se = 4.0 * (0.2 / (m as f64).sqrt());
        for w in vals.windows(2) {
            assert!((w[0] - w[1]).abs() < 2.0 * se, "{vals:?}");
        }
    }

    #[test]
    fn non_psd_sections_are_refused_with_diagnostic() {
        // (1, 0.9) is fine at size 2 but its zero-padded size-3 Toeplitz
        // has a negative eigenvalue
        let r = CovarianceSequence::from_real(vec![1.0, 0.9]).unwrap();
        assert!(stationary_gaussian(&r, 2, 10, 1).is_ok());
        match stationary_gaussian(&r, 3, 10, 1) {
            Err(StochasticError::NotPsd(ev)) => assert!(ev < -1e-10),
            other => panic!("expected NotPsd, got {other:?}"),
        }
        // an outright non-PSD sequence never constructs
        assert!(matches!(
            CovarianceSequence::from_real(vec![1.0, 1.5]),
            Err(StochasticError::NotPsd(_))
        ));
    }

    #[test]
    fn brownian_moments() {
        let m = 10_000usize;
        let e = brownian_paths(513, m, 23).unwrap();
        // X_0 = 0 exactly
        assert!(e.paths().iter().all(|p| p[0] == 0.0));
        // E(X_1²) = 1 and E(X_{1/2} X_1) = 1/2 within 4 SE
        let var1 = e.empirical_cov(512, 512);
        assert!((var1 - 1.0).abs() < 4.0 * (2.0f64 / m as f64).sqrt(), "{var1}");
        let cov = e.empirical_cov(256, 512);
        let se = {
            let mut s = 0.0;
            for p in e.paths() {
                s += (p[256] * p[512] - cov).powi(2);
            }
            (s / m as f64).sqrt() / (m as f64).sqrt()
        };
        assert!((cov - 0.5).abs() < 4.0 * se, "cov {cov} se {se}");
    }

    #[test]
    fn brownian_is_the_lebesgue_mu_gaussian() {
        let p = PeriodicDensity::from_fn(64, |_| 1.0).unwrap();
        let a = mu_gaussian_increments(&p, 50, 31).unwrap();
        let b = brownian_paths(65, 50, 31).unwrap();
        assert_eq!(a.paths(), b.paths());
        assert_eq!(a.time_grid(), b.time_grid());
    }

    #[test]
    fn mu_gaussian_disjoint_increments_are_uncorrelated() {
        let m = 10_000usize;
        let p = PeriodicDensity::from_fn(
            32,
            |x| 1.0 / 3.0 - (2.0 / 9.0) * (4.0 * std::f64::consts::PI * x).cos(),
        )
        .unwrap();
        let e = mu_gaussian_increments(&p, m, 37).unwrap();
        let mass = p.integral();
        // Var(X_[0,1)) = μ([0,1))
        let var = e.empirical_cov(32, 32);
        assert!((var - mass).abs() < 4.0 * mass * (2.0f64 / m as f64).sqrt());
        // disjoint halves: E(X_A X_B) ≈ 0
        let mut acc = 0.0;
        for i in 0..m {
            let xa = increment_over(&e, i, 0, 16);
            let xb = increment_over(&e, i, 16, 32);
            acc += xa * xb;
        }
        acc /= m as f64;
        assert!(acc.abs() < 4.0 / (m as f64).sqrt(), "{acc}");
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let a = brownian_paths(33, 8, 99).unwrap();
        let b = brownian_paths(33, 8, 99).unwrap();
        assert_eq!(a.paths(), b.paths());
        let c = brownian_paths(33, 8, 100).unwrap();
        assert_ne!(a.paths(), c.paths());
    }

    #[test]
    fn integral_of_one_telescopes_to_endpoint() {
        let e = brownian_paths(129, 500, 41).unwrap();
        let one = PeriodicGridFunction::from_fn(128, |_| Complex64::new(1.0, 0.0));
        let ints = stochastic_integral(&one, &e).unwrap();
        for (i, v) in ints.iter().enumerate() {
            assert_abs_diff_eq!(v.re, e.paths()[i][128], epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn integral_isometry_for_harmonic_over_brownian() {
        // ∫|e_1|² dt = 1
        let m = 10_000usize;
        let e = brownian_paths(257, m, 43).unwrap();
        let e1 = PeriodicGridFunction::harmonic(256, 1);
        let ints = stochastic_integral(&e1, &e).unwrap();
        let moment: f64 = ints.iter().map(|v| v.norm_sqr()).sum::<f64>() / m as f64;
        let se = {
            let mut s = 0.0;
            for v in &ints {
                s += (v.norm_sqr() - moment).powi(2);
            }
            (s / m as f64).sqrt() / (m as f64).sqrt()
        };
        assert!((moment - 1.0).abs() < 4.0 * se, "moment {moment} se {se}");
    }

    #[test]
    fn integral_isometry_against_density_weight() {
        // E|∫ m dX|² = ∫ |m|² p for a trig polynomial against the stretched
        // mother density
        let m_paths = 10_000usize;
        let n = 64usize;
        let psi3 = LineFunction::Piecewise(
            PiecewiseConstantSpec::new(
                vec![0.0, 1.5, 3.0],
                vec![Complex64::new(1.0 / 3.0, 0.0), Complex64::new(-1.0 / 3.0, 0.0)],
            )
            .unwrap(),
        );
        let p = spectral_density(&psi3, n, 800).unwrap();
        let e = mu_gaussian_increments(&p, m_paths, 47).unwrap();
        let m = PeriodicGridFunction::from_fn(n, |t| {
            Complex64::new(1.0, 0.0)
                + Complex64::from_polar(0.7, 2.0 * std::f64::consts::PI * t)
                + Complex64::from_polar(0.3, -6.0 * std::f64::consts::PI * t)
        });
        let want: f64 = m
            .values()
            .iter()
            .zip(p.values())
            .map(|(mv, &pv)| mv.norm_sqr() * pv)
            .sum::<f64>()
            / n as f64;
        let ints = stochastic_integral(&m, &e).unwrap();
        let got: f64 = ints.iter().map(|v| v.norm_sqr()).sum::<f64>() / m_paths as f64;
        let se = {
            let mut s = 0.0;
            for v in &ints {
                s += (v.norm_sqr() - got).powi(2);
            }
            (s / m_paths as f64).sqrt() / (m_paths as f64).sqrt()
        };
        assert!((got - want).abs() < 4.0 * se, "got {got} want {want} se {se}");
    }

    #[test]
    fn zero_integrand_gives_zero() {
        let e = brownian_paths(17, 10, 3).unwrap();
        let zero = PeriodicGridFunction::from_fn(16, |_| Complex64::ZERO);
        let ints = stochastic_integral(&zero, &e).unwrap();
        assert!(ints.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn integral_grid_mismatch_is_rejected() {
        let e = brownian_paths(17, 10, 3).unwrap();
        let wrong = PeriodicGridFunction::from_fn(8, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(
            stochastic_integral(&wrong, &e),
            Err(StochasticError::GridMismatch(8, 16))
        ));
    }

    #[test]
    fn multiplication_preserves_weighted_norm() {
        let n = 128usize;
        let p = PeriodicDensity::from_fn(n, |x| 0.5 + x).unwrap();
        let m = PeriodicGridFunction::from_fn(n, |x| {
            Complex64::new((7.0 * x).sin(), (3.0 * x).cos())
        });
        let tm = multiplication_unitary(&m);
        let norm = |f: &PeriodicGridFunction| -> f64 {
            f.values()
                .iter()
                .zip(p.values())
                .map(|(v, &pv)| v.norm_sqr() * pv)
                .sum::<f64>()
        };
        assert_abs_diff_eq!(norm(&m), norm(&tm), epsilon = 1e-12);
        // n applications of the unitary cycle back to the start
        let mut cur = m.clone();
        for _ in 0..n {
            cur = multiplication_unitary(&cur);
        }
        for (a, b) in cur.values().iter().zip(m.values()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
        // T(0) = 0
        let zero = PeriodicGridFunction::from_fn(n, |_| Complex64::ZERO);
        assert!(multiplication_unitary(&zero).values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn lattice_kernel_diagonal_is_the_density() {
        let phi = LineFunction::Piecewise(PiecewiseConstantSpec::indicator(0.0, 1.0));
        let grid: Vec<f64> = (0..16).map(|j| j as f64 / 16.0).collect();
        let k = nongaussian_realization(&phi, &grid, &grid, 3000).unwrap();
        for (i, row) in k.iter().enumerate() {
            assert_abs_diff_eq!(row[i].re, 1.0, epsilon = 1e-4);
            assert_abs_diff_eq!(row[i].im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lattice_kernel_is_hermitian_and_psd() {
        let psi3 = LineFunction::Piecewise(
            PiecewiseConstantSpec::new(
                vec![0.0, 1.5, 3.0],
                vec![Complex64::new(1.0 / 3.0, 0.0), Complex64::new(-1.0 / 3.0, 0.0)],
            )
            .unwrap(),
        );
        let grid: Vec<f64> = (0..32).map(|j| j as f64 / 32.0).collect();
        let k = nongaussian_realization(&psi3, &grid, &grid, 400).unwrap();
        let m = DMatrix::from_fn(32, 32, |r, c| k[r][c]);
        let herm_defect = (&m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(herm_defect < 1e-12);
        let min_eig = m
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(min_eig >= -1e-8, "min eigenvalue {min_eig}");
    }
}
