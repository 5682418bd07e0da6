//! Discrete Karhunen-Loève analysis of covariance kernels.
//!
//! The integral eigenproblem `∫ K(t,s) φ(s) ds = λ φ(t)` is discretized
//! with the uniform rectangle weight: `(K Δt) v = λ v`.  Eigenfunctions
//! come back orthonormal in the Δt-weighted inner product, eigenvalues
//! sorted nonincreasing with tiny negatives clamped to zero, and the trace
//! identity `Σ λ_k = Δt Σ_j K(t_j, t_j)` holds to rounding.  Coefficients
//! extracted from a path ensemble are uncorrelated with unit variance up
//! to Monte-Carlo error, and truncated resynthesis loses exactly the
//! eigenvalue tail — the optimality that makes the transform useful for
//! coding.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::stochastic::PathEnsemble;

/// Modes with eigenvalues at or below this are refused by the coefficient
/// extraction; dividing by their square roots would amplify noise.
pub const MODE_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum KlError {
    #[error("kernel must be square, got {0} x {1}")]
    NotSquare(usize, usize),
    #[error("kernel size {0} does not match grid size {1}")]
    SizeMismatch(usize, usize),
    #[error("grid must be uniform and increasing with at least 2 points")]
    BadGrid,
    #[error("kernel is not symmetric: max asymmetry {0}")]
    NotSymmetric(f64),
    #[error("kernel is not positive semidefinite: min eigenvalue {0}")]
    Indefinite(f64),
    #[error("mode {k} has eigenvalue {lambda}, below the extraction floor")]
    DegenerateMode { k: usize, lambda: f64 },
    #[error("requested {0} modes but only {1} are available")]
    TooManyModes(usize, usize),
    #[error("ensemble grid does not match the expansion grid")]
    GridMismatch,
}

/// Eigen-decomposition of a discretized covariance kernel.
#[derive(Debug, Clone)]
pub struct KlExpansion {
    eigenvalues: Vec<f64>,
    /// modes[k][j] = φ_k(t_j), orthonormal under Σ_j φ_a φ_b Δt = δ_ab.
    modes: Vec<Vec<f64>>,
    grid: Vec<f64>,
    dt: f64,
}

impl KlExpansion {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn modes(&self) -> &[Vec<f64>] {
        &self.modes
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Σ λ_k, equal to Δt · trace(K) by similarity.
    pub fn total_energy(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Energy fraction beyond the first `n_modes` eigenvalues.
    pub fn tail_ratio(&self, n_modes: usize) -> f64 {
        let total = self.total_energy();
        if total == 0.0 {
            return 0.0;
        }
        self.eigenvalues.iter().skip(n_modes).sum::<f64>() / total
    }
}

/// The Brownian covariance `min(s, t)` sampled on a grid.
pub fn brownian_kernel(grid: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(grid.len(), grid.len(), |i, j| grid[i].min(grid[j]))
}

fn check_uniform(grid: &[f64]) -> Result<f64, KlError> {
    if grid.len() < 2 {
        return Err(KlError::BadGrid);
    }
    let dt = grid[1] - grid[0];
    if dt <= 0.0 || dt.is_nan() {
        return Err(KlError::BadGrid);
    }
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(KlError::BadGrid);
        }
    }
    Ok(dt)
}

/// Solve the discretized eigenproblem for a symmetric PSD kernel given on
/// a uniform grid.  Rejects asymmetric kernels (beyond 1e-8 of the scale)
/// and indefinite ones; eigenvalue noise down to -1e-8 of the largest
/// eigenvalue is clamped to zero.
pub fn kl_decompose(kernel: &DMatrix<f64>, grid: &[f64]) -> Result<KlExpansion, KlError> {
    let (rows, cols) = kernel.shape();
    if rows != cols {
        return Err(KlError::NotSquare(rows, cols));
    }
    if rows != grid.len() {
        return Err(KlError::SizeMismatch(rows, grid.len()));
    }
    let dt = check_uniform(grid)?;
    let scale = kernel.iter().map(|v| v.abs()).fold(f64::MIN_POSITIVE, f64::max);
    let asym = (kernel - kernel.transpose())
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    if asym > 1e-8 * scale {
        return Err(KlError::NotSymmetric(asym));
    }
    let sym = (kernel + kernel.transpose()) * (0.5 * dt);
    let eig = sym.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lambda_min < -1e-8 * lambda_max.max(1e-300) {
        return Err(KlError::Indefinite(lambda_min));
    }
    let n = rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
    });
    let inv_sqrt_dt = 1.0 / dt.sqrt();
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let modes = order
        .iter()
        .map(|&i| {
            (0..n)
                .map(|j| eig.eigenvectors[(j, i)] * inv_sqrt_dt)
                .collect()
        })
        .collect();
    Ok(KlExpansion { eigenvalues, modes, grid: grid.to_vec(), dt })
}

/// Project an ensemble onto the leading modes:
/// `Z_{i,k} = (Δt Σ_j X^{(i)}(t_j) φ_k(t_j)) / sqrt(λ_k)`.
///
/// Returns the M x n_modes coefficient matrix.  For a Gaussian ensemble
/// drawn from the decomposed kernel the coefficients are centered,
/// uncorrelated and of unit variance up to Monte-Carlo error.
pub fn kl_coefficients(
    ensemble: &PathEnsemble,
    expansion: &KlExpansion,
    n_modes: usize,
) -> Result<Vec<Vec<f64>>, KlError> {
    if n_modes > expansion.n_modes() {
        return Err(KlError::TooManyModes(n_modes, expansion.n_modes()));
    }
    if ensemble.time_grid().len() != expansion.grid.len()
        || ensemble
            .time_grid()
            .iter()
            .zip(&expansion.grid)
            .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(KlError::GridMismatch);
    }
    for (k, &lambda) in expansion.eigenvalues.iter().take(n_modes).enumerate() {
        if lambda <= MODE_FLOOR {
            return Err(KlError::DegenerateMode { k, lambda });
        }
    }
    let dt = expansion.dt;
    Ok(ensemble
        .paths()
        .iter()
        .map(|path| {
            (0..n_modes)
                .map(|k| {
                    let mode = &expansion.modes[k];
                    let mut acc = 0.0;
                    for (x, phi) in path.iter().zip(mode) {
                        acc += x * phi;
                    }
                    acc * dt / expansion.eigenvalues[k].sqrt()
                })
                .collect()
        })
        .collect())
}

/// Truncated resynthesis `X(t) ≈ Σ_{k < n_modes} sqrt(λ_k) Z_k φ_k(t)`,
/// returned as a path matrix on the expansion's grid.
pub fn kl_reconstruct(
    expansion: &KlExpansion,
    coefficients: &[Vec<f64>],
    n_modes: usize,
) -> Result<Vec<Vec<f64>>, KlError> {
    if n_modes > expansion.n_modes() {
        return Err(KlError::TooManyModes(n_modes, expansion.n_modes()));
    }
    let n = expansion.grid.len();
    Ok(coefficients
        .iter()
        .map(|z| {
            let mut path = vec![0.0; n];
            for ((lambda, mode), zk) in expansion
                .eigenvalues
                .iter()
                .zip(&expansion.modes)
                .take(n_modes)
                .zip(z)
            {
                let amp = lambda.sqrt() * zk;
                for (p, phi) in path.iter_mut().zip(mode) {
                    *p += amp * phi;
                }
            }
            path
        })
        .collect())
}

/// Mean-square relative reconstruction error of an ensemble against a
/// reconstruction: `Σ ‖X - X^‖² / Σ ‖X‖²` over paths and grid points.
pub fn reconstruction_error(ensemble: &PathEnsemble, reconstructed: &[Vec<f64>]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (path, rec) in ensemble.paths().iter().zip(reconstructed) {
        for (x, y) in path.iter().zip(rec) {
            num += (x - y) * (x - y);
            den += x * x;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::brownian_paths;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn uniform_grid(n: usize) -> Vec<f64> {
        (0..n).map(|j| j as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn brownian_kernel_leading_eigenvalue() {
        // analytic KL eigenvalues of min(s,t) on [0,1]: ((k-1/2)π)^{-2}
        let grid = uniform_grid(512);
        let k = brownian_kernel(&grid);
        let kl = kl_decompose(&k, &grid).unwrap();
        assert_abs_diff_eq!(kl.eigenvalues()[0], 4.0 / (PI * PI), epsilon = 2e-3);
        for (idx, want) in (1..=5).map(|k| (k - 1, 1.0 / ((k as f64 - 0.5) * PI).powi(2))) {
            let got = kl.eigenvalues()[idx];
            assert!(
                (got - want).abs() < 5e-3 * (idx as f64 + 1.0),
                "mode {idx}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn scaled_identity_has_flat_spectrum() {
        let grid = uniform_grid(32);
        let c = 2.5;
        let k = DMatrix::from_diagonal_element(32, 32, c);
        let kl = kl_decompose(&k, &grid).unwrap();
        let dt = 1.0 / 31.0;
        for &l in kl.eigenvalues() {
            assert_abs_diff_eq!(l, c * dt, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(kl.total_energy(), c * dt * 32.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_one_kernel_has_single_mode() {
        let grid = uniform_grid(24);
        let v: Vec<f64> = grid.iter().map(|t| 1.0 + t).collect();
        let k = DMatrix::from_fn(24, 24, |i, j| v[i] * v[j]);
        let kl = kl_decompose(&k, &grid).unwrap();
        let dt = 1.0 / 23.0;
        let norm_sq: f64 = v.iter().map(|x| x * x).sum();
        assert_abs_diff_eq!(kl.eigenvalues()[0], dt * norm_sq, epsilon = 1e-10);
        for &l in &kl.eigenvalues()[1..] {
            assert!(l.abs() < 1e-10);
        }
    }

    #[test]
    fn trace_identity_and_bound() {
        let grid = uniform_grid(96);
        let k = brownian_kernel(&grid);
        let kl = kl_decompose(&k, &grid).unwrap();
        let dt = grid[1] - grid[0];
        let trace = dt * (0..96).map(|j| k[(j, j)]).sum::<f64>();
        assert_abs_diff_eq!(kl.total_energy(), trace, epsilon = 1e-9);
        assert!(kl.eigenvalues()[0] <= trace + 1e-12);
    }

    #[test]
    fn modes_are_weighted_orthonormal() {
        let grid = uniform_grid(64);
        let kl = kl_decompose(&brownian_kernel(&grid), &grid).unwrap();
        let dt = kl.dt();
        for a in 0..6 {
            for b in 0..6 {
                let g: f64 = kl.modes()[a]
                    .iter()
                    .zip(&kl.modes()[b])
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
                    * dt;
                let want = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(g, want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn asymmetric_and_indefinite_kernels_are_rejected() {
        let grid = uniform_grid(8);
        let mut k = brownian_kernel(&grid);
        k[(0, 5)] += 0.5;
        assert!(matches!(kl_decompose(&k, &grid), Err(KlError::NotSymmetric(_))));
        let indef = DMatrix::from_fn(8, 8, |i, j| if i == j { -1.0 } else { 0.0 });
        assert!(matches!(kl_decompose(&indef, &grid), Err(KlError::Indefinite(_))));
    }

    #[test]
    fn coefficients_are_uncorrelated_unit_variance() {
        let m = 10_000usize;
        let n = 129usize;
        let e = brownian_paths(n, m, 51).unwrap();
        let grid = e.time_grid().to_vec();
        let kl = kl_decompose(&brownian_kernel(&grid), &grid).unwrap();
        let z = kl_coefficients(&e, &kl, 5).unwrap();
        for a in 0..5 {
            let mean: f64 = z.iter().map(|row| row[a]).sum::<f64>() / m as f64;
            assert!(mean.abs() < 4.0 / (m as f64).sqrt(), "mode {a} mean {mean}");
            for b in 0..5 {
                let cov: f64 = z.iter().map(|row| row[a] * row[b]).sum::<f64>() / m as f64;
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((cov - want).abs() < 0.05, "corr({a},{b}) = {cov}");
            }
        }
    }

    #[test]
    fn coefficients_are_gaussian_by_kurtosis() {
        let m = 10_000usize;
        let e = brownian_paths(129, m, 53).unwrap();
        let grid = e.time_grid().to_vec();
        let kl = kl_decompose(&brownian_kernel(&grid), &grid).unwrap();
        let z = kl_coefficients(&e, &kl, 3).unwrap();
        for k in 0..3 {
            let m2: f64 = z.iter().map(|r| r[k] * r[k]).sum::<f64>() / m as f64;
            let m4: f64 = z.iter().map(|r| r[k].powi(4)).sum::<f64>() / m as f64;
            let kurt = m4 / (m2 * m2);
            assert!(
                (kurt - 3.0).abs() < 4.0 * (24.0 / m as f64).sqrt(),
                "mode {k} kurtosis {kurt}"
            );
        }
    }

    #[test]
    fn zero_ensemble_gives_zero_coefficients() {
        let grid = uniform_grid(17);
        let kl = kl_decompose(&brownian_kernel(&grid), &grid).unwrap();
        let zero = crate::stochastic::PathEnsemble::from_parts(
            grid.clone(),
            vec![vec![0.0; 17]; 4],
            0,
            crate::stochastic::ProcessKind::Brownian,
        )
        .unwrap();
        let z = kl_coefficients(&zero, &kl, 3).unwrap();
        assert!(z.iter().all(|row| row.iter().all(|&v| v == 0.0)));
        let rec = kl_reconstruct(&kl, &z, 3).unwrap();
        assert!(rec.iter().all(|p| p.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn full_reconstruction_is_exact() {
        let m = 64usize;
        let n = 65usize;
        let e = brownian_paths(n, m, 57).unwrap();
        let grid = e.time_grid().to_vec();
        let kl = kl_decompose(&brownian_kernel(&grid), &grid).unwrap();
        // every mode with λ above the floor: X_0 = 0 lives in the kernel
        // of the covariance, so nothing is lost
        let usable = kl
            .eigenvalues()
            .iter()
            .filter(|&&l| l > MODE_FLOOR)
            .count();
        let z = kl_coefficients(&e, &kl, usable).unwrap();
        let rec = kl_reconstruct(&kl, &z, usable).unwrap();
        assert!(reconstruction_error(&e, &rec) < 1e-8);
    }

    #[test]
    fn truncation_error_matches_eigenvalue_tail() {
        let m = 4_000usize;
        let e = brownian_paths(129, m, 59).unwrap();
        let grid = e.time_grid().to_vec();
        let kl = kl_decompose(&brownian_kernel(&grid), &grid).unwrap();
        let n_keep = 10usize;
        let z = kl_coefficients(&e, &kl, n_keep).unwrap();
        let rec = kl_reconstruct(&kl, &z, n_keep).unwrap();
        let got = reconstruction_error(&e, &rec);
        let want = kl.tail_ratio(n_keep);
        assert!(
            (got - want).abs() < 4.0 * want / (m as f64).sqrt() + 2e-3,
            "got {got} want {want}"
        );
        // zero modes: reconstruction is the zero path
        let rec0 = kl_reconstruct(&kl, &z, 0).unwrap();
        assert_abs_diff_eq!(reconstruction_error(&e, &rec0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kl_basis_beats_fourier_and_standard_bases() {
        // energy captured by the first m modes: KL is optimal on average
        let m_paths = 2_000usize;
        let n = 64usize;
        let e = brownian_paths(n, m_paths, 61).unwrap();
        let grid = e.time_grid().to_vec();
        let kl = kl_decompose(&brownian_kernel(&grid), &grid).unwrap();
        let dt = kl.dt();

        // orthonormal real Fourier basis w.r.t. the dt weight
        let mut fourier: Vec<Vec<f64>> = Vec::with_capacity(n);
        let norm = 1.0 / (n as f64 * dt).sqrt();
        fourier.push(vec![norm; n]);
        let mut freq = 1usize;
        while fourier.len() < n {
            let c: Vec<f64> = (0..n)
                .map(|j| (2.0 * PI * freq as f64 * j as f64 / n as f64).cos() * norm * 2f64.sqrt())
                .collect();
            fourier.push(c);
            if fourier.len() < n {
                let s: Vec<f64> = (0..n)
                    .map(|j| {
                        (2.0 * PI * freq as f64 * j as f64 / n as f64).sin() * norm * 2f64.sqrt()
                    })
                    .collect();
                fourier.push(s);
            }
            freq += 1;
        }
        let standard: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut v = vec![0.0; n];
                v[j] = 1.0 / dt.sqrt();
                v
            })
            .collect();

        let captured = |basis: &[Vec<f64>], keep: usize| -> f64 {
            let mut acc = 0.0;
            for path in e.paths() {
                for b in basis.iter().take(keep) {
                    let c: f64 =
                        path.iter().zip(b).map(|(x, phi)| x * phi).sum::<f64>() * dt;
                    acc += c * c;
                }
            }
            acc
        };
        for keep in [1usize, 3, 8, 16] {
            let kl_energy = captured(kl.modes(), keep);
            assert!(
                kl_energy + 1e-9 >= captured(&fourier, keep),
                "fourier beats KL at {keep}"
            );
            assert!(
                kl_energy + 1e-9 >= captured(&standard, keep),
                "standard beats KL at {keep}"
            );
        }
    }

    #[test]
    fn degenerate_modes_are_refused() {
        let grid = uniform_grid(16);
        let v: Vec<f64> = grid.to_vec();
        let k = DMatrix::from_fn(16, 16, |i, j| v[i] * v[j]);
        let kl = kl_decompose(&k, &grid).unwrap();
        let e = brownian_paths(16, 4, 1).unwrap();
        // grid of brownian_paths(16) is j/15 — same as uniform_grid(16)
        assert!(matches!(
            kl_coefficients(&e, &kl, 2),
            Err(KlError::DegenerateMode { k: 1, .. })
        ));
    }
}
