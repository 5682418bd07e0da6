//! Exact and sampled representations of functions on the line.
//!
//! Two representations share one interface: an exact piecewise-constant
//! description (preferred whenever a generator is a step function, because
//! inner products and Fourier transforms then have closed forms), and
//! uniform complex samples on a truncation window.  A function may be given
//! in the time domain or directly through its Fourier transform; the
//! transform convention is
//!
//! ```text
//!   f^(t) = ∫ e^{-i 2π t x} f(x) dx
//! ```
//!
//! with no 1/sqrt(2π) factor.  All removable singularities (t = 0 in the
//! transform of an indicator, and friends) are evaluated through a guarded
//! sinc so the closed forms are exact up to rounding.

use num_complex::Complex64;
use thiserror::Error;

/// Guard band below which `sin(u)/u` switches to its series expansion.
pub const SINC_GUARD: f64 = 1e-8;

/// Tolerance for deciding that two sample grids are commensurate.
const GRID_ALIGN_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FuncError {
    #[error("piecewise spec needs at least 2 breakpoints, got {0}")]
    TooFewBreakpoints(usize),
    #[error("breakpoints must be strictly increasing and finite (index {0})")]
    BreakpointsNotIncreasing(usize),
    #[error("value count {values} does not match interval count {intervals}")]
    ValueCountMismatch { values: usize, intervals: usize },
    #[error("sample step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("sampled grids are incompatible: steps {0} vs {1} or misaligned offsets")]
    GridMismatch(f64, f64),
    #[error("operation needs both operands in the same representation and domain")]
    RepresentationMismatch,
    #[error("translate is only defined for time-domain representations")]
    TranslateUnsupported,
    #[error("no pointwise evaluator exists for this representation in the requested domain")]
    EvaluatorUnsupported,
    #[error("periodic grid function must have at least one sample")]
    EmptyGrid,
}

fn sinc(u: f64) -> f64 {
    if u.abs() < SINC_GUARD {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// A finite step function: constant value `values[i]` on
/// `[breakpoints[i], breakpoints[i+1])`, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantSpec {
    breakpoints: Vec<f64>,
    values: Vec<Complex64>,
}

impl PiecewiseConstantSpec {
    pub fn new(breakpoints: Vec<f64>, values: Vec<Complex64>) -> Result<Self, FuncError> {
        if breakpoints.len() < 2 {
            return Err(FuncError::TooFewBreakpoints(breakpoints.len()));
        }
        for (i, w) in breakpoints.windows(2).enumerate() {
            if w[0] >= w[1] || !w[0].is_finite() || !w[1].is_finite() {
                return Err(FuncError::BreakpointsNotIncreasing(i));
            }
        }
        if values.len() != breakpoints.len() - 1 {
            return Err(FuncError::ValueCountMismatch {
                values: values.len(),
                intervals: breakpoints.len() - 1,
            });
        }
        Ok(Self { breakpoints, values })
    }

    /// The indicator of `[a, b)`.
    pub fn indicator(a: f64, b: f64) -> Self {
        Self::new(vec![a, b], vec![Complex64::new(1.0, 0.0)]).expect("a < b")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Support interval `[b_0, b_last)`.
    pub fn support(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    /// Pointwise value; intervals are closed on the left, open on the right.
    pub fn eval(&self, x: f64) -> Complex64 {
        let (lo, hi) = self.support();
        if x < lo || x >= hi {
            return Complex64::ZERO;
        }
        // partition_point returns the first breakpoint > x
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        self.values[idx - 1]
    }

    /// Exact squared L2 norm: sum of |v_i|^2 (b_{i+1} - b_i).
    pub fn norm_sq(&self) -> f64 {
        self.values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, w)| v.norm_sqr() * (w[1] - w[0]))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm_sqr() == 0.0)
    }

    /// Shift by an integer: breakpoints move right by `k`, values unchanged.
    pub fn translate(&self, k: i64) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().map(|b| b + k as f64).collect(),
            values: self.values.clone(),
        }
    }

    /// The step function |f|^2 on the same partition.
    pub fn abs_squared(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(v.norm_sqr(), 0.0))
                .collect(),
        }
    }

    /// Closed-form Fourier transform at `t`.
    ///
    /// Each piece `v` on `[a, b)` contributes
    /// `v (b-a) e^{-iπt(a+b)} sinc(πt(b-a))`, which equals
    /// `v (e^{-i2πta} - e^{-i2πtb}) / (i2πt)` away from `t = 0` and extends
    /// it analytically through the singularity.
    pub fn transform_at(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (v, w) in self.values.iter().zip(self.breakpoints.windows(2)) {
            let (a, b) = (w[0], w[1]);
            let len = b - a;
            let phase = Complex64::from_polar(1.0, -std::f64::consts::PI * t * (a + b));
            acc += v * len * sinc(std::f64::consts::PI * t * len) * phase;
        }
        acc
    }

    /// Closed-form inverse transform at `x` (kernel `e^{+i2πtx}`), used when
    /// the spec describes a transform and the time-domain value is needed.
    pub fn inverse_transform_at(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (v, w) in self.values.iter().zip(self.breakpoints.windows(2)) {
            let (a, b) = (w[0], w[1]);
            let len = b - a;
            let phase = Complex64::from_polar(1.0, std::f64::consts::PI * x * (a + b));
            acc += v * len * sinc(std::f64::consts::PI * x * len) * phase;
        }
        acc
    }

    /// Exact inner product `<f|g> = ∫ conj(f) g` by interval overlap
    /// arithmetic; conjugate-linear in the first slot.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let (lo_a, hi_a) = self.support();
        let (lo_b, hi_b) = other.support();
        let lo = lo_a.max(lo_b);
        let hi = hi_a.min(hi_b);
        if lo >= hi {
            return Complex64::ZERO;
        }
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .filter(|&b| b > lo && b < hi)
            .collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut acc = Complex64::ZERO;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            acc += self.eval(mid).conj() * other.eval(mid) * (w[1] - w[0]);
        }
        acc
    }
}

/// Uniform complex samples: value `values[j]` at `window_start + j * step`.
/// The function is zero outside its window by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledLineFunction {
    window_start: f64,
    step: f64,
    values: Vec<Complex64>,
}

impl SampledLineFunction {
    pub fn new(window_start: f64, step: f64, values: Vec<Complex64>) -> Result<Self, FuncError> {
        if step <= 0.0 || !step.is_finite() {
            return Err(FuncError::BadStep(step));
        }
        Ok(Self { window_start, step, values })
    }

    pub fn window_start(&self) -> f64 {
        self.window_start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Half-open interval covered by the samples.
    pub fn window(&self) -> (f64, f64) {
        (
            self.window_start,
            self.window_start + self.step * self.values.len() as f64,
        )
    }

    pub fn point(&self, j: usize) -> f64 {
        self.window_start + self.step * j as f64
    }

    /// Discrete squared L2 norm: sum |v_j|^2 * step.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.step
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm_sqr() == 0.0)
    }

    pub fn translate(&self, k: i64) -> Self {
        Self {
            window_start: self.window_start + k as f64,
            step: self.step,
            values: self.values.clone(),
        }
    }

    /// Value at `x`: the sample when `x` lands on the grid (within a
    /// relative guard), linear interpolation between neighbours otherwise,
    /// zero outside the window.
    pub fn eval(&self, x: f64) -> Complex64 {
        let pos = (x - self.window_start) / self.step;
        if pos < -GRID_ALIGN_TOL || pos > (self.values.len() as f64) - 1.0 + GRID_ALIGN_TOL {
            return Complex64::ZERO;
        }
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-6 {
            let j = nearest as usize;
            return self.values[j.min(self.values.len() - 1)];
        }
        let j = pos.floor() as usize;
        let frac = pos - j as f64;
        let hi = (j + 1).min(self.values.len() - 1);
        self.values[j] * (1.0 - frac) + self.values[hi] * frac
    }

    fn aligned_with(&self, other: &Self) -> bool {
        let rel_step = (self.step - other.step).abs() / self.step;
        if rel_step > GRID_ALIGN_TOL {
            return false;
        }
        let offset = (other.window_start - self.window_start) / self.step;
        (offset - offset.round()).abs() < 1e-6
    }

    /// Discrete inner product over the window overlap; requires identical
    /// steps and offsets differing by a whole number of steps.
    pub fn inner(&self, other: &Self) -> Result<Complex64, FuncError> {
        if !self.aligned_with(other) {
            return Err(FuncError::GridMismatch(self.step, other.step));
        }
        let shift = ((other.window_start - self.window_start) / self.step).round() as i64;
        let mut acc = Complex64::ZERO;
        for (j, v) in self.values.iter().enumerate() {
            let idx = j as i64 - shift;
            if idx >= 0 && (idx as usize) < other.values.len() {
                acc += v.conj() * other.values[idx as usize];
            }
        }
        Ok(acc * self.step)
    }
}

/// Complex samples on the circle: value `values[j]` at `x = j / n_grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGridFunction {
    values: Vec<Complex64>,
}

impl PeriodicGridFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self, FuncError> {
        if values.is_empty() {
            return Err(FuncError::EmptyGrid);
        }
        Ok(Self { values })
    }

    pub fn from_fn(n_grid: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..n_grid).map(|j| f(j as f64 / n_grid as f64)).collect();
        Self { values }
    }

    /// The Fourier basis function e_k(x) = e^{i2πkx} sampled on the grid.
    pub fn harmonic(n_grid: usize, k: i64) -> Self {
        Self::from_fn(n_grid, |x| {
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * x)
        })
    }

    pub fn n_grid(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
}

/// Either pointwise-evaluable view of a [`LineFunction`]: the function
/// itself or its Fourier transform.  `coverage` is the half-open interval
/// outside which values are unavailable (`None` meaning all of the line);
/// lattice sums refuse to silently extend a finite window by zero.
pub trait Evaluate {
    fn value_at(&self, x: f64) -> Complex64;
    fn coverage(&self) -> Option<(f64, f64)>;
}

impl Evaluate for PiecewiseConstantSpec {
    fn value_at(&self, x: f64) -> Complex64 {
        self.eval(x)
    }

    fn coverage(&self) -> Option<(f64, f64)> {
        None
    }
}

impl Evaluate for SampledLineFunction {
    fn value_at(&self, x: f64) -> Complex64 {
        self.eval(x)
    }

    fn coverage(&self) -> Option<(f64, f64)> {
        Some(self.window())
    }
}

/// Evaluation adapters tying a representation to the requested domain.
#[derive(Debug, Clone, Copy)]
pub enum Evaluator<'a> {
    /// Values of an exact step function.
    Exact(&'a PiecewiseConstantSpec),
    /// Closed-form transform of an exact step function.
    Transform(&'a PiecewiseConstantSpec),
    /// Closed-form inverse transform of an exact step function.
    InverseTransform(&'a PiecewiseConstantSpec),
    /// Stored samples.
    Grid(&'a SampledLineFunction),
}

impl Evaluate for Evaluator<'_> {
    fn value_at(&self, x: f64) -> Complex64 {
        match self {
            Evaluator::Exact(spec) => spec.eval(x),
            Evaluator::Transform(spec) => spec.transform_at(x),
            Evaluator::InverseTransform(spec) => spec.inverse_transform_at(x),
            Evaluator::Grid(s) => s.eval(x),
        }
    }

    fn coverage(&self) -> Option<(f64, f64)> {
        match self {
            Evaluator::Grid(s) => Some(s.window()),
            _ => None,
        }
    }
}

/// Which domain a stored description lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Time,
    Frequency,
}

/// A function in L2 of the line, in one of four concrete representations.
#[derive(Debug, Clone, PartialEq)]
pub enum LineFunction {
    /// Exact step function in the time domain.
    Piecewise(PiecewiseConstantSpec),
    /// The function whose Fourier transform is the given exact step
    /// function (Shannon-type generators).
    PiecewiseTransform(PiecewiseConstantSpec),
    /// Time-domain samples.
    Samples(SampledLineFunction),
    /// Samples of the Fourier transform (renormalized generators).
    TransformSamples(SampledLineFunction),
}

impl LineFunction {
    /// Squared L2 norm; exact for step specs (Parseval covers the
    /// transform-side representations).
    pub fn norm_sq(&self) -> f64 {
        match self {
            LineFunction::Piecewise(s) | LineFunction::PiecewiseTransform(s) => s.norm_sq(),
            LineFunction::Samples(s) | LineFunction::TransformSamples(s) => s.norm_sq(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            LineFunction::Piecewise(s) | LineFunction::PiecewiseTransform(s) => s.is_zero(),
            LineFunction::Samples(s) | LineFunction::TransformSamples(s) => s.is_zero(),
        }
    }

    /// `(T^k f)(x) = f(x - k)`; norm preserving.  Only time-domain
    /// representations shift losslessly (the transform side would pick up a
    /// modulation that leaves the step-function class).
    pub fn translate(&self, k: i64) -> Result<LineFunction, FuncError> {
        match self {
            LineFunction::Piecewise(s) => Ok(LineFunction::Piecewise(s.translate(k))),
            LineFunction::Samples(s) => Ok(LineFunction::Samples(s.translate(k))),
            _ => Err(FuncError::TranslateUnsupported),
        }
    }

    /// `<f|g>`, conjugate-linear in `f`.  Step x step uses exact overlap
    /// arithmetic (in either domain, by Parseval); samples x samples needs
    /// commensurate grids; mixed representations are rejected.
    pub fn inner(&self, other: &LineFunction) -> Result<Complex64, FuncError> {
        use LineFunction::*;
        match (self, other) {
            (Piecewise(a), Piecewise(b)) => Ok(a.inner(b)),
            (PiecewiseTransform(a), PiecewiseTransform(b)) => Ok(a.inner(b)),
            (Samples(a), Samples(b)) => a.inner(b),
            (TransformSamples(a), TransformSamples(b)) => a.inner(b),
            _ => Err(FuncError::RepresentationMismatch),
        }
    }

    /// Pointwise evaluator for the time-domain values.
    pub fn time_evaluator(&self) -> Result<Evaluator<'_>, FuncError> {
        match self {
            LineFunction::Piecewise(s) => Ok(Evaluator::Exact(s)),
            LineFunction::PiecewiseTransform(s) => Ok(Evaluator::InverseTransform(s)),
            LineFunction::Samples(s) => Ok(Evaluator::Grid(s)),
            LineFunction::TransformSamples(_) => Err(FuncError::EvaluatorUnsupported),
        }
    }

    /// Pointwise evaluator for the Fourier transform.
    pub fn frequency_evaluator(&self) -> Result<Evaluator<'_>, FuncError> {
        match self {
            LineFunction::Piecewise(s) => Ok(Evaluator::Transform(s)),
            LineFunction::PiecewiseTransform(s) => Ok(Evaluator::Exact(s)),
            LineFunction::TransformSamples(s) => Ok(Evaluator::Grid(s)),
            LineFunction::Samples(_) => Err(FuncError::EvaluatorUnsupported),
        }
    }
}

/// Evaluates the closed-form transform of an exact spec on a uniform grid,
/// producing a frequency-domain sampled function.
pub fn fourier_transform(
    spec: &PiecewiseConstantSpec,
    t_start: f64,
    t_step: f64,
    n: usize,
) -> Result<SampledLineFunction, FuncError> {
    if t_step <= 0.0 || !t_step.is_finite() {
        return Err(FuncError::BadStep(t_step));
    }
    let values = (0..n)
        .map(|j| spec.transform_at(t_start + j as f64 * t_step))
        .collect();
    SampledLineFunction::new(t_start, t_step, values)
}

/// `<f|g>` as a free function mirroring the operation table.
pub fn inner_product(f: &LineFunction, g: &LineFunction) -> Result<Complex64, FuncError> {
    f.inner(g)
}

/// `T^k f` as a free function mirroring the operation table.
pub fn translate(f: &LineFunction, k: i64) -> Result<LineFunction, FuncError> {
    f.translate(k)
}
