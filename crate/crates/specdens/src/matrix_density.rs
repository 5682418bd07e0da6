//! Matrix-valued densities for finite generating families.
//!
//! For a family F = {ψ_1, ..., ψ_N} the pointwise matrix
//! `P_{r,s}(x) = Σ_n conj(f_r(x+n)) f_s(x+n)` (with f either the functions
//! themselves or their transforms) is Hermitian positive semidefinite at
//! every grid point, integrates to the Gram matrix of the family, carries
//! the weighted norm `‖m‖_P² = ∫ <m|P m>`, and its pointwise rank profile
//! yields the nested supports of the cyclic decomposition of the
//! translation-invariant space the family generates.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::funcs::{Domain, Evaluate, FuncError, LineFunction, PeriodicGridFunction};
use crate::renorm::GridSet;

#[derive(Debug, Error)]
pub enum MatrixDensityError {
    #[error("family must be nonempty")]
    EmptyFamily,
    #[error("family member {0} has zero norm")]
    ZeroMember(usize),
    #[error("component count {0} does not match family size {1}")]
    ComponentCount(usize, usize),
    #[error("grid sizes differ: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("vector length {0} does not match family size {1}")]
    VectorLength(usize, usize),
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// One N x N Hermitian PSD matrix per grid point `x_j = j / n_grid`.
#[derive(Debug, Clone)]
pub struct MatrixDensityGrid {
    n_family: usize,
    matrices: Vec<DMatrix<Complex64>>,
}

impl MatrixDensityGrid {
    /// Wrap a precomputed grid of square matrices of a common size.
    pub fn from_matrices(matrices: Vec<DMatrix<Complex64>>) -> Result<Self, MatrixDensityError> {
        let n_family = match matrices.first() {
            Some(m) => m.nrows(),
            None => return Err(MatrixDensityError::EmptyFamily),
        };
        for m in &matrices {
            if m.nrows() != n_family || m.ncols() != n_family {
                return Err(MatrixDensityError::ComponentCount(m.nrows(), n_family));
            }
        }
        Ok(Self { n_family, matrices })
    }

    pub fn n_family(&self) -> usize {
        self.n_family
    }

    pub fn n_grid(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[DMatrix<Complex64>] {
        &self.matrices
    }

    pub fn at(&self, j: usize) -> &DMatrix<Complex64> {
        &self.matrices[j]
    }

    /// Largest entrywise deviation from Hermitian symmetry over the grid.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in &self.matrices {
            for r in 0..self.n_family {
                for s in 0..self.n_family {
                    worst = worst.max((m[(r, s)] - m[(s, r)].conj()).norm());
                }
            }
        }
        worst
    }

    /// Smallest eigenvalue over all grid points.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| {
                m.clone()
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Scalar density along a diagonal entry.
    pub fn diagonal(&self, r: usize) -> Vec<f64> {
        self.matrices.iter().map(|m| m[(r, r)].re).collect()
    }
}

/// Assemble the matrix density of a family by the truncated lattice sum, in
/// the requested domain.
pub fn matrix_density(
    family: &[LineFunction],
    n_grid: usize,
    n_terms: usize,
    domain: Domain,
) -> Result<MatrixDensityGrid, MatrixDensityError> {
    if family.is_empty() {
        return Err(MatrixDensityError::EmptyFamily);
    }
    for (i, f) in family.iter().enumerate() {
        if f.is_zero() {
            return Err(MatrixDensityError::ZeroMember(i));
        }
    }
    let n = family.len();
    let evals: Vec<_> = family
        .iter()
        .map(|f| match domain {
            Domain::Time => f.time_evaluator(),
            Domain::Frequency => f.frequency_evaluator(),
        })
        .collect::<Result<_, _>>()?;
    let mut matrices = Vec::with_capacity(n_grid);
    let mut row = vec![Complex64::ZERO; n];
    for j in 0..n_grid {
        let x = j as f64 / n_grid as f64;
        let mut m = DMatrix::from_element(n, n, Complex64::ZERO);
        for shell in -(n_terms as i64)..=(n_terms as i64) {
            let point = x + shell as f64;
            for (r, e) in evals.iter().enumerate() {
                row[r] = e.value_at(point);
            }
            for r in 0..n {
                for s in 0..n {
                    m[(r, s)] += row[r].conj() * row[s];
                }
            }
        }
        matrices.push(m);
    }
    Ok(MatrixDensityGrid { n_family: n, matrices })
}

/// ∫₀¹ P(x) dx on the grid; equals the Gram matrix of the family up to
/// truncation and quadrature error.
pub fn gram_integral(p: &MatrixDensityGrid) -> DMatrix<Complex64> {
    let n = p.n_family;
    let mut acc = DMatrix::from_element(n, n, Complex64::ZERO);
    for m in &p.matrices {
        acc += m;
    }
    acc / Complex64::new(p.matrices.len() as f64, 0.0)
}

/// Outcome of the quadratic-form inequality check
/// `‖P(x)v‖² <= λ <v|P(x)v>` with `λ = sup_x ‖P(x)‖`.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticBoundReport {
    pub max_violation: f64,
    pub lambda: f64,
}

/// For PSD matrices `P² ⪯ λ P` with λ the largest eigenvalue, so the
/// violation is nonpositive up to rounding at every grid point.
pub fn lemma22_check(
    p: &MatrixDensityGrid,
    v: &[Complex64],
) -> Result<QuadraticBoundReport, MatrixDensityError> {
    if v.len() != p.n_family {
        return Err(MatrixDensityError::VectorLength(v.len(), p.n_family));
    }
    let vec = nalgebra::DVector::from_column_slice(v);
    let lambda = p
        .matrices
        .iter()
        .map(|m| {
            m.clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let mut max_violation = f64::NEG_INFINITY;
    for m in &p.matrices {
        let pv = m * &vec;
        let lhs = pv.norm_squared();
        let rhs = lambda * vec.dotc(&pv).re;
        max_violation = max_violation.max(lhs - rhs);
    }
    Ok(QuadraticBoundReport { max_violation, lambda })
}

/// `(∫₀¹ Σ_{r,s} conj(m_r) P_{r,s} m_s dx)^{1/2}`: the norm of
/// `Σ_r m_r(T) ψ_r` carried over to the density side.
pub fn weighted_norm(
    components: &[PeriodicGridFunction],
    p: &MatrixDensityGrid,
) -> Result<f64, MatrixDensityError> {
    if components.len() != p.n_family {
        return Err(MatrixDensityError::ComponentCount(components.len(), p.n_family));
    }
    for c in components {
        if c.n_grid() != p.n_grid() {
            return Err(MatrixDensityError::GridMismatch(c.n_grid(), p.n_grid()));
        }
    }
    let n = p.n_family;
    let mut acc = 0.0;
    for (j, m) in p.matrices.iter().enumerate() {
        let mut point = Complex64::ZERO;
        for r in 0..n {
            for s in 0..n {
                point += components[r].values()[j].conj() * m[(r, s)] * components[s].values()[j];
            }
        }
        acc += point.re;
    }
    Ok((acc / p.n_grid() as f64).max(0.0).sqrt())
}

/// Pointwise rank profile and the nested support chain it induces.
#[derive(Debug, Clone)]
pub struct CyclicDecomposition {
    /// Number of eigenvalues of P(x_j) above the rank threshold.
    pub multiplicity: Vec<usize>,
    /// `S_i = { x : multiplicity(x) >= i }` for `i = 1..=N`; nested by
    /// construction.
    pub supports: Vec<GridSet>,
}

/// Rank-count the matrices pointwise.  The threshold defaults to
/// `1e-6 * trace(P(x))` per point so families at different scales are
/// treated alike.
pub fn cyclic_decomposition(
    p: &MatrixDensityGrid,
    tol: Option<f64>,
) -> CyclicDecomposition {
    let n = p.n_family;
    let multiplicity: Vec<usize> = p
        .matrices
        .iter()
        .map(|m| {
            let trace = m.trace().re;
            let cut = tol.unwrap_or(1e-6 * trace.max(f64::MIN_POSITIVE));
            m.clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .filter(|&&ev| ev > cut)
                .count()
        })
        .collect();
    let supports = (1..=n)
        .map(|i| GridSet::new(multiplicity.iter().map(|&m| m >= i).collect()))
        .collect();
    CyclicDecomposition { multiplicity, supports }
}
