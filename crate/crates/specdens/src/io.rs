//! File formats: JSON function specs, CSV tables, and builtin generators.
//!
//! Complex values are serialized as `[re, im]` pairs throughout.  Sampled
//! functions exchange as CSV with columns `x,re,im`, densities as
//! `x,p`, ensembles as `path_id,t,value`.  A `FunctionSpecFile` names a
//! generator either inline (piecewise or samples, in the time or frequency
//! domain) or through a builtin: `haar_father`, `haar_mother`,
//! `stretched_haar_father:k`, `stretched_haar_mother:k`, and
//! `shannon:[a,b)` (optionally a union of intervals joined by `+`) whose
//! transform is the indicator of the named set.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::PeriodicDensity;
use crate::funcs::{Domain, LineFunction, PiecewiseConstantSpec, SampledLineFunction};
use crate::wavelets::stretched_haar;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("unknown builtin '{0}'")]
    UnknownBuiltin(String),
    #[error("builtin '{0}': {1}")]
    BadBuiltin(String, String),
    #[error("malformed {what}: {detail}")]
    Malformed { what: String, detail: String },
    #[error("i/o failure on {path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Func(#[from] crate::funcs::FuncError),
    #[error(transparent)]
    Density(#[from] crate::density::DensityError),
    #[error(transparent)]
    Wavelet(#[from] crate::wavelets::WaveletError),
}

fn read_file(path: &str) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.into(), source })
}

pub fn write_file(path: &std::path::Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

/// On-disk form of a generator.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpecFile {
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<(f64, f64)>,
        #[serde(default = "default_domain")]
        domain: String,
    },
    Samples {
        window_start: f64,
        step: f64,
        values: Vec<(f64, f64)>,
        #[serde(default = "default_domain")]
        domain: String,
    },
    Builtin { name: String },
}

fn default_domain() -> String {
    "time".into()
}

fn parse_domain(s: &str) -> Result<Domain, IoError> {
    match s {
        "time" => Ok(Domain::Time),
        "frequency" => Ok(Domain::Frequency),
        other => Err(IoError::Malformed {
            what: "domain".into(),
            detail: format!("expected 'time' or 'frequency', got '{other}'"),
        }),
    }
}

impl FunctionSpecFile {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &str) -> Result<LineFunction, IoError> {
        Self::from_json(&read_file(path)?)?.build()
    }

    /// Validate the payload and build the generator.
    pub fn build(&self) -> Result<LineFunction, IoError> {
        match self {
            FunctionSpecFile::Piecewise { breakpoints, values, domain } => {
                let vals = values.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
                let spec = PiecewiseConstantSpec::new(breakpoints.clone(), vals)?;
                Ok(match parse_domain(domain)? {
                    Domain::Time => LineFunction::Piecewise(spec),
                    Domain::Frequency => LineFunction::PiecewiseTransform(spec),
                })
            }
            FunctionSpecFile::Samples { window_start, step, values, domain } => {
                let vals = values.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
                let s = SampledLineFunction::new(*window_start, *step, vals)?;
                Ok(match parse_domain(domain)? {
                    Domain::Time => LineFunction::Samples(s),
                    Domain::Frequency => LineFunction::TransformSamples(s),
                })
            }
            FunctionSpecFile::Builtin { name } => builtin(name),
        }
    }
}

/// Resolve a builtin generator name.
pub fn builtin(name: &str) -> Result<LineFunction, IoError> {
    if name == "haar_father" {
        return Ok(LineFunction::Piecewise(stretched_haar(1)?.father));
    }
    if name == "haar_mother" {
        return Ok(LineFunction::Piecewise(stretched_haar(1)?.mother));
    }
    if let Some(arg) = name.strip_prefix("stretched_haar_father:") {
        let k = parse_stretch(name, arg)?;
        return Ok(LineFunction::Piecewise(stretched_haar(k)?.father));
    }
    if let Some(arg) = name.strip_prefix("stretched_haar_mother:") {
        let k = parse_stretch(name, arg)?;
        return Ok(LineFunction::Piecewise(stretched_haar(k)?.mother));
    }
    if let Some(arg) = name.strip_prefix("shannon:") {
        let spec = parse_interval_union(name, arg)?;
        return Ok(LineFunction::PiecewiseTransform(spec));
    }
    Err(IoError::UnknownBuiltin(name.into()))
}

fn parse_stretch(name: &str, arg: &str) -> Result<u64, IoError> {
    arg.parse::<u64>()
        .map_err(|e| IoError::BadBuiltin(name.into(), e.to_string()))
}

/// `[a,b)` or a union `[a,b)+[c,d)` with strictly increasing, disjoint
/// intervals; the indicator of the union becomes the transform.
fn parse_interval_union(name: &str, arg: &str) -> Result<PiecewiseConstantSpec, IoError> {
    let bad = |detail: String| IoError::BadBuiltin(name.into(), detail);
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for part in arg.split('+') {
        let part = part.trim();
        let inner = part
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| bad(format!("interval '{part}' must look like [a,b)")))?;
        let mut nums = inner.split(',');
        let a: f64 = nums
            .next()
            .ok_or_else(|| bad("missing left endpoint".into()))?
            .trim()
            .parse()
            .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
        let b: f64 = nums
            .next()
            .ok_or_else(|| bad("missing right endpoint".into()))?
            .trim()
            .parse()
            .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
        if nums.next().is_some() {
            return Err(bad(format!("too many numbers in '{part}'")));
        }
        if a >= b || a.is_nan() || b.is_nan() {
            return Err(bad(format!("interval '{part}' is empty")));
        }
        intervals.push((a, b));
    }
    intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    for w in intervals.windows(2) {
        if w[0].1 > w[1].0 {
            return Err(bad("intervals overlap".into()));
        }
    }
    // breakpoints with zero-valued pieces bridging any gaps
    let mut breaks = Vec::new();
    let mut vals = Vec::new();
    for (i, &(a, b)) in intervals.iter().enumerate() {
        if i == 0 {
            breaks.push(a);
        } else if a > *breaks.last().unwrap() {
            vals.push(Complex64::ZERO);
            breaks.push(a);
        }
        vals.push(Complex64::new(1.0, 0.0));
        breaks.push(b);
    }
    Ok(PiecewiseConstantSpec::new(breaks, vals)?)
}

/// Exact-spec JSON: `{"breakpoints": [...], "values": [[re,im], ...]}`.
pub fn piecewise_to_json(spec: &PiecewiseConstantSpec) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        breakpoints: &'a [f64],
        values: Vec<(f64, f64)>,
    }
    serde_json::to_string_pretty(&Doc {
        breakpoints: spec.breakpoints(),
        values: spec.values().iter().map(|v| (v.re, v.im)).collect(),
    })
    .expect("serializable")
}

pub fn piecewise_from_json(text: &str) -> Result<PiecewiseConstantSpec, IoError> {
    #[derive(Deserialize)]
    struct Doc {
        breakpoints: Vec<f64>,
        values: Vec<(f64, f64)>,
    }
    let doc: Doc = serde_json::from_str(text)?;
    Ok(PiecewiseConstantSpec::new(
        doc.breakpoints,
        doc.values.into_iter().map(|(re, im)| Complex64::new(re, im)).collect(),
    )?)
}

/// CSV with header `x,re,im`.
pub fn samples_to_csv(s: &SampledLineFunction) -> String {
    let mut out = String::from("x,re,im\n");
    for (j, v) in s.values().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", s.point(j), v.re, v.im));
    }
    out
}

pub fn samples_from_csv(text: &str) -> Result<SampledLineFunction, IoError> {
    let malformed = |detail: String| IoError::Malformed { what: "samples csv".into(), detail };
    let mut xs: Vec<f64> = Vec::new();
    let mut vals: Vec<Complex64> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with('x')) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(malformed(format!("line {}: expected 3 columns", i + 1)));
        }
        let parse = |s: &str| -> Result<f64, IoError> {
            s.trim().parse().map_err(|e: std::num::ParseFloatError| malformed(e.to_string()))
        };
        xs.push(parse(cols[0])?);
        vals.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
    }
    if xs.len() < 2 {
        return Err(malformed("need at least 2 samples".into()));
    }
    let step = xs[1] - xs[0];
    for w in xs.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0) {
            return Err(malformed("x column is not uniformly spaced".into()));
        }
    }
    Ok(SampledLineFunction::new(xs[0], step, vals)?)
}

/// CSV with header `x,p`.
pub fn density_to_csv(p: &PeriodicDensity) -> String {
    let mut out = String::from("x,p\n");
    for (j, v) in p.values().iter().enumerate() {
        out.push_str(&format!("{},{}\n", p.x(j), v));
    }
    out
}

pub fn density_from_csv(text: &str) -> Result<PeriodicDensity, IoError> {
    let malformed = |detail: String| IoError::Malformed { what: "density csv".into(), detail };
    let mut vals: Vec<f64> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with('x')) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 2 {
            return Err(malformed(format!("line {}: expected 2 columns", i + 1)));
        }
        vals.push(
            cols[1]
                .trim()
                .parse()
                .map_err(|e: std::num::ParseFloatError| malformed(e.to_string()))?,
        );
    }
    if vals.is_empty() {
        return Err(malformed("no rows".into()));
    }
    Ok(PeriodicDensity::new(vals, 0.0)?)
}

/// JSON form of a density for downstream consumers.
#[derive(Debug, Serialize, Deserialize)]
pub struct DensityDoc {
    pub n_grid: usize,
    pub values: Vec<f64>,
    pub tail_bound: f64,
}

impl From<&PeriodicDensity> for DensityDoc {
    fn from(p: &PeriodicDensity) -> Self {
        DensityDoc { n_grid: p.n_grid(), values: p.values().to_vec(), tail_bound: p.tail_bound() }
    }
}

impl DensityDoc {
    pub fn into_density(self) -> Result<PeriodicDensity, IoError> {
        Ok(PeriodicDensity::new(self.values, self.tail_bound)?)
    }
}

/// Load a density from `.json` (DensityDoc) or `.csv` (`x,p`).
pub fn load_density(path: &str) -> Result<PeriodicDensity, IoError> {
    let text = read_file(path)?;
    if path.ends_with(".json") {
        let doc: DensityDoc = serde_json::from_str(&text)?;
        doc.into_density()
    } else {
        density_from_csv(&text)
    }
}

/// CSV with header `path_id,t,value`.
pub fn ensemble_to_csv(e: &crate::stochastic::PathEnsemble) -> String {
    let mut out = String::from("path_id,t,value\n");
    for (i, path) in e.paths().iter().enumerate() {
        for (t, v) in e.time_grid().iter().zip(path) {
            out.push_str(&format!("{i},{t},{v}\n"));
        }
    }
    out
}

/// Per-point matrices as nested `[re, im]` pairs.
pub fn matrix_density_to_json(p: &crate::matrix_density::MatrixDensityGrid) -> String {
    #[derive(Serialize)]
    struct Doc {
        n_family: usize,
        n_grid: usize,
        matrices: Vec<Vec<Vec<(f64, f64)>>>,
    }
    let n = p.n_family();
    let matrices = p
        .matrices()
        .iter()
        .map(|m| {
            (0..n)
                .map(|r| (0..n).map(|s| (m[(r, s)].re, m[(r, s)].im)).collect())
                .collect()
        })
        .collect();
    serde_json::to_string_pretty(&Doc { n_family: n, n_grid: p.n_grid(), matrices })
        .expect("serializable")
}
