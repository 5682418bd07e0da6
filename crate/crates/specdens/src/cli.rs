//! Batch command-line front end.
//!
//! Every subcommand reads a generator (builtin or spec file), runs one
//! pipeline, and writes a JSON report plus CSV plot data into the output
//! directory.  All resolved parameters are echoed into the report, so a
//! report fully determines its reproduction.  Exit codes: 0 success,
//! 1 validation problem (arguments, files, malformed input), 2 computation
//! failure inside a pipeline.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::classify::classify_with_cap;
use crate::density::{periodize_abs2, spectral_density};
use crate::funcs::{Domain, LineFunction};
use crate::io::{self, IoError};
use crate::kl::{brownian_kernel, kl_coefficients, kl_decompose, kl_reconstruct, reconstruction_error};
use crate::matrix_density::{cyclic_decomposition, gram_integral, matrix_density};
use crate::renorm::{construct_dependence_coeffs, detect_l2_dependence, renormalize, verify_dependence, GridSetReport};
use crate::stochastic::{brownian_paths, mu_gaussian_increments, stationary_gaussian, CovarianceSequence};
use crate::wavelets::{consistency_check, qmf_check, stretched_haar_density, DyadicFilter, HaarKind};

/// Central defaults, echoed into every report.
pub mod defaults {
    pub const N_GRID: usize = 4096;
    pub const N_TERMS: usize = 1000;
    pub const TOL: f64 = 1e-3;
    pub const K_MAX: usize = 10;
    pub const M_PATHS: usize = 10_000;
    pub const SEED: u64 = 1;
    /// Environment variable naming the default output directory.
    pub const OUT_ENV: &str = "SPECDENS_OUT";
}

#[derive(Debug, Parser)]
#[command(name = "specdens", version, about = "Spectral densities of integer-translate systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Periodized spectral density of a generator.
    Density(DensityArgs),
    /// Frame classification of a generator's translate system.
    Classify(ClassifyArgs),
    /// Renormalize a generator so its density becomes an indicator.
    Renormalize(RenormalizeArgs),
    /// Detect and construct l2 relations among the translates.
    Depend(DependArgs),
    /// Matrix density, Gram integral and cyclic decomposition of a family.
    Matrix(MatrixArgs),
    /// Stretched-Haar densities, consistency and filter checks.
    Wavelet(WaveletArgs),
    /// Sample Gaussian process ensembles.
    Simulate(SimulateArgs),
    /// Karhunen-Loeve analysis of a covariance kernel.
    Kl(KlArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Builtin generator name (haar_father, stretched_haar_mother:3,
    /// shannon:[0,0.5), ...).
    #[arg(long, conflicts_with = "spec_file")]
    builtin: Option<String>,
    /// JSON function spec file.
    #[arg(long)]
    spec_file: Option<String>,
}

impl InputArgs {
    fn resolve(&self) -> Result<LineFunction, CliError> {
        match (&self.builtin, &self.spec_file) {
            (Some(name), None) => Ok(io::builtin(name)?),
            (None, Some(path)) => Ok(io::FunctionSpecFile::load(path)?),
            _ => Err(CliError::Validation(
                "exactly one of --builtin or --spec-file is required".into(),
            )),
        }
    }

    fn describe(&self) -> String {
        self.builtin
            .clone()
            .or_else(|| self.spec_file.clone())
            .unwrap_or_default()
    }
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory (default: $SPECDENS_OUT or the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArgs {
    fn dir(&self) -> Result<PathBuf, CliError> {
        let dir = self
            .out
            .clone()
            .or_else(|| std::env::var_os(defaults::OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
        Ok(dir)
    }
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = defaults::N_GRID)]
    n_grid: usize,
    #[arg(long, default_value_t = defaults::N_TERMS)]
    n_terms: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = defaults::N_GRID)]
    n_grid: usize,
    #[arg(long, default_value_t = defaults::N_TERMS)]
    n_terms: usize,
    #[arg(long, default_value_t = defaults::TOL)]
    tol: f64,
    /// Boundedness cap; densities exceeding it classify as NONE.
    #[arg(long)]
    cap: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct RenormalizeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = defaults::N_GRID)]
    n_grid: usize,
    #[arg(long, default_value_t = 200)]
    n_terms: usize,
    #[arg(long, default_value_t = defaults::TOL)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct DependArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = defaults::N_GRID)]
    n_grid: usize,
    #[arg(long, default_value_t = defaults::N_TERMS)]
    n_terms: usize,
    #[arg(long, default_value_t = defaults::TOL)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    k_max: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    /// Builtin generator names; repeat for each family member.
    #[arg(long = "builtin", required = true, num_args = 1..)]
    builtins: Vec<String>,
    /// Which domain the lattice sum runs over.
    #[arg(long, default_value = "time")]
    domain: String,
    #[arg(long, default_value_t = 512)]
    n_grid: usize,
    #[arg(long, default_value_t = 16)]
    n_terms: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct WaveletArgs {
    /// Odd stretch factor of the Haar pair.
    #[arg(long, default_value_t = 3)]
    stretch: u64,
    #[arg(long, default_value_t = defaults::N_GRID)]
    n_grid: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// brownian, mu-gaussian, or stationary.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = defaults::M_PATHS)]
    m_paths: usize,
    #[arg(long, default_value_t = defaults::SEED)]
    seed: u64,
    /// Time points for brownian / stationary length.
    #[arg(long, default_value_t = 257)]
    n_times: usize,
    /// Density file (csv x,p or json) driving a mu-gaussian process.
    #[arg(long)]
    density_file: Option<String>,
    /// Generator whose density (mu-gaussian) or autocorrelation
    /// (stationary) drives the process.
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = defaults::N_GRID)]
    n_grid: usize,
    #[arg(long, default_value_t = defaults::N_TERMS)]
    n_terms: usize,
    #[arg(long, default_value_t = defaults::K_MAX)]
    k_max: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct KlArgs {
    /// brownian or file.
    #[arg(long, default_value = "brownian")]
    kernel: String,
    /// Square CSV matrix when --kernel file.
    #[arg(long)]
    kernel_file: Option<String>,
    #[arg(long, default_value_t = 512)]
    n_grid: usize,
    #[arg(long, default_value_t = 10)]
    modes: usize,
    #[arg(long, default_value_t = defaults::M_PATHS)]
    m_paths: usize,
    #[arg(long, default_value_t = defaults::SEED)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

/// Failures split by exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Computation(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Computation(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Computation(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Validation(e.to_string())
    }
}

macro_rules! computation_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Computation(e.to_string())
            }
        }
    )*};
}

computation_from!(
    crate::density::DensityError,
    crate::classify::ClassifyError,
    crate::renorm::RenormError,
    crate::matrix_density::MatrixDensityError,
    crate::wavelets::WaveletError,
    crate::stochastic::StochasticError,
    crate::kl::KlError,
    crate::funcs::FuncError
);

/// Entry point shared by `main` and the test harnesses.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Density(a) => run_density(a),
        Command::Classify(a) => run_classify(a),
        Command::Renormalize(a) => run_renormalize(a),
        Command::Depend(a) => run_depend(a),
        Command::Matrix(a) => run_matrix(a),
        Command::Wavelet(a) => run_wavelet(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Kl(a) => run_kl(a),
    }
}

fn write_json(dir: &std::path::Path, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    Ok(io::write_file(&dir.join(name), &text)?)
}

fn write_text(dir: &std::path::Path, name: &str, text: &str) -> Result<(), CliError> {
    Ok(io::write_file(&dir.join(name), text)?)
}

fn run_density(a: DensityArgs) -> Result<(), CliError> {
    let f = a.input.resolve()?;
    let dir = a.out.dir()?;
    let p = spectral_density(&f, a.n_grid, a.n_terms)?;
    write_text(&dir, "density.csv", &io::density_to_csv(&p))?;
    write_json(
        &dir,
        "density.json",
        &json!({
            "params": {
                "input": a.input.describe(),
                "n_grid": a.n_grid,
                "n_terms": a.n_terms,
                "defaults": defaults_block(),
            },
            "tail_bound": p.tail_bound(),
            "integral": p.integral(),
            "generator_norm_sq": f.norm_sq(),
            "min": p.min(),
            "max": p.max(),
        }),
    )
}

fn run_classify(a: ClassifyArgs) -> Result<(), CliError> {
    let f = a.input.resolve()?;
    let dir = a.out.dir()?;
    let p = spectral_density(&f, a.n_grid, a.n_terms)?;
    let report = classify_with_cap(&p, a.tol, a.cap.unwrap_or(f64::INFINITY))?;
    write_json(
        &dir,
        "classify.json",
        &json!({
            "params": {
                "input": a.input.describe(),
                "n_grid": a.n_grid,
                "n_terms": a.n_terms,
                "tol": a.tol,
                "cap": a.cap,
                "defaults": defaults_block(),
            },
            "report": report,
        }),
    )
}

fn run_renormalize(a: RenormalizeArgs) -> Result<(), CliError> {
    let f = a.input.resolve()?;
    let dir = a.out.dir()?;
    let p = spectral_density(&f, a.n_grid, a.n_terms)?;
    let ren = renormalize(&f, &p, a.tol, a.n_terms)?;
    // verify: the renormalized density is the support indicator
    let p_ren = periodize_abs2(&ren.psi_ren, a.n_grid, a.n_terms)?;
    let sup_gap = p_ren
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let want = if ren.support.contains(j) { 1.0 } else { 0.0 };
            (v - want).abs()
        })
        .fold(0.0f64, f64::max);
    write_text(&dir, "psi_ren.csv", &io::samples_to_csv(&ren.psi_ren))?;
    write_json(
        &dir,
        "renormalize.json",
        &json!({
            "params": {
                "input": a.input.describe(),
                "n_grid": a.n_grid,
                "n_terms": a.n_terms,
                "tol": a.tol,
                "defaults": defaults_block(),
            },
            "support": GridSetReport::from(&ren.support),
            "density_sup_gap": sup_gap,
        }),
    )
}

fn run_depend(a: DependArgs) -> Result<(), CliError> {
    let f = a.input.resolve()?;
    let dir = a.out.dir()?;
    let p = spectral_density(&f, a.n_grid, a.n_terms)?;
    let params = json!({
        "input": a.input.describe(),
        "n_grid": a.n_grid,
        "n_terms": a.n_terms,
        "tol": a.tol,
        "k_max": a.k_max,
        "defaults": defaults_block(),
    });
    match detect_l2_dependence(&p, a.tol, None) {
        None => write_json(
            &dir,
            "depend.json",
            &json!({ "params": params, "independent": true }),
        ),
        Some(zero_set) => {
            let coeffs = construct_dependence_coeffs(&zero_set, a.k_max)?;
            let residual = verify_dependence(&f, &coeffs)?;
            let half = construct_dependence_coeffs(&zero_set, a.k_max / 2)?;
            let residual_half = verify_dependence(&f, &half)?;
            let mut csv = String::from("k,re,im\n");
            for (k, c) in coeffs.iter() {
                csv.push_str(&format!("{k},{},{}\n", c.re, c.im));
            }
            write_text(&dir, "coeffs.csv", &csv)?;
            write_json(
                &dir,
                "depend.json",
                &json!({
                    "params": params,
                    "independent": false,
                    "zero_set": GridSetReport::from(&zero_set),
                    "coeff_norm": coeffs.norm_sq().sqrt(),
                    "residual": residual,
                    "residual_at_half_k_max": residual_half,
                }),
            )
        }
    }
}

fn run_matrix(a: MatrixArgs) -> Result<(), CliError> {
    let domain = match a.domain.as_str() {
        "time" => Domain::Time,
        "frequency" => Domain::Frequency,
        other => {
            return Err(CliError::Validation(format!(
                "--domain must be time or frequency, got '{other}'"
            )))
        }
    };
    let family: Vec<LineFunction> = a
        .builtins
        .iter()
        .map(|name| io::builtin(name))
        .collect::<Result<_, _>>()?;
    let dir = a.out.dir()?;
    let p = matrix_density(&family, a.n_grid, a.n_terms, domain)?;
    let gram = gram_integral(&p);
    let dec = cyclic_decomposition(&p, None);
    let n = p.n_family();
    let gram_json: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|r| (0..n).map(|s| (gram[(r, s)].re, gram[(r, s)].im)).collect())
        .collect();
    let mut histogram = vec![0usize; n + 1];
    for &m in &dec.multiplicity {
        histogram[m.min(n)] += 1;
    }
    write_text(&dir, "matrix_density.json", &io::matrix_density_to_json(&p))?;
    write_json(
        &dir,
        "matrix.json",
        &json!({
            "params": {
                "family": a.builtins,
                "domain": a.domain,
                "n_grid": a.n_grid,
                "n_terms": a.n_terms,
                "defaults": defaults_block(),
            },
            "gram": gram_json,
            "hermitian_defect": p.hermitian_defect(),
            "min_eigenvalue": p.min_eigenvalue(),
            "decomposition": {
                "multiplicity_histogram": histogram,
                "supports": dec.supports.iter().map(GridSetReport::from).collect::<Vec<_>>(),
            },
        }),
    )
}

fn run_wavelet(a: WaveletArgs) -> Result<(), CliError> {
    let dir = a.out.dir()?;
    let pf = stretched_haar_density(a.stretch, HaarKind::Father, a.n_grid)?;
    let pm = stretched_haar_density(a.stretch, HaarKind::Mother, a.n_grid)?;
    let defect = consistency_check(&pf, &pm)?;
    let filter = DyadicFilter::haar(a.n_grid)?;
    let qmf = qmf_check(&filter);
    let mut csv = String::from("t,p_father,p_mother\n");
    for j in 0..a.n_grid {
        csv.push_str(&format!(
            "{},{},{}\n",
            pf.x(j),
            pf.values()[j],
            pm.values()[j]
        ));
    }
    write_text(&dir, "wavelet.csv", &csv)?;
    write_json(
        &dir,
        "wavelet.json",
        &json!({
            "params": {
                "stretch": a.stretch,
                "n_grid": a.n_grid,
                "defaults": defaults_block(),
            },
            "consistency_defect": defect,
            "qmf": { "max_defect": qmf.max_defect, "lowpass_defect": qmf.lowpass_defect },
            "father": { "min": pf.min(), "max": pf.max() },
            "mother": { "min": pm.min(), "max": pm.max() },
        }),
    )
}

fn run_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let dir = a.out.dir()?;
    let ensemble = match a.kind.as_str() {
        "brownian" => brownian_paths(a.n_times, a.m_paths, a.seed)?,
        "mu-gaussian" => {
            let density = if let Some(path) = &a.density_file {
                io::load_density(path)?
            } else {
                let f = a.input.resolve()?;
                spectral_density(&f, a.n_grid, a.n_terms)?
            };
            mu_gaussian_increments(&density, a.m_paths, a.seed)?
        }
        "stationary" => {
            let f = a.input.resolve()?;
            let r = crate::density::autocorrelation_coeffs(&f, a.k_max)?;
            let cov = CovarianceSequence::new((0..=a.k_max as i64).map(|k| r.get(k)).collect())?;
            stationary_gaussian(&cov, a.n_times, a.m_paths, a.seed)?
        }
        other => {
            return Err(CliError::Validation(format!(
                "--kind must be brownian, mu-gaussian or stationary, got '{other}'"
            )))
        }
    };
    write_text(&dir, "paths.csv", &io::ensemble_to_csv(&ensemble))?;
    write_json(
        &dir,
        "simulate.json",
        &json!({
            "params": {
                "kind": a.kind,
                "m_paths": a.m_paths,
                "seed": a.seed,
                "n_times": a.n_times,
                "density_file": a.density_file,
                "input": a.input.describe(),
                "n_grid": a.n_grid,
                "n_terms": a.n_terms,
                "k_max": a.k_max,
                "defaults": defaults_block(),
            },
            "n_paths": ensemble.n_paths(),
            "n_times": ensemble.n_times(),
            "kind": ensemble.kind(),
        }),
    )
}

fn run_kl(a: KlArgs) -> Result<(), CliError> {
    let dir = a.out.dir()?;
    let (kernel, grid) = match a.kernel.as_str() {
        "brownian" => {
            let grid: Vec<f64> =
                (0..a.n_grid).map(|j| j as f64 / (a.n_grid - 1) as f64).collect();
            (brownian_kernel(&grid), grid)
        }
        "file" => {
            let path = a.kernel_file.as_ref().ok_or_else(|| {
                CliError::Validation("--kernel file requires --kernel-file".into())
            })?;
            let kernel = kernel_from_csv(path)?;
            let n = kernel.nrows();
            let grid: Vec<f64> = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
            (kernel, grid)
        }
        other => {
            return Err(CliError::Validation(format!(
                "--kernel must be brownian or file, got '{other}'"
            )))
        }
    };
    let expansion = kl_decompose(&kernel, &grid)?;
    let mut eig_csv = String::from("k,lambda\n");
    for (k, l) in expansion.eigenvalues().iter().enumerate() {
        eig_csv.push_str(&format!("{},{}\n", k + 1, l));
    }
    write_text(&dir, "eigenvalues.csv", &eig_csv)?;

    // reconstruction-error table against a matched Brownian ensemble
    let recon = if a.kernel == "brownian" {
        let ensemble = brownian_paths(a.n_grid, a.m_paths, a.seed)?;
        let usable = expansion
            .eigenvalues()
            .iter()
            .take(a.modes)
            .filter(|&&l| l > crate::kl::MODE_FLOOR)
            .count();
        let z = kl_coefficients(&ensemble, &expansion, usable)?;
        let mut table = String::from("n_modes,relative_error,eigenvalue_tail_ratio\n");
        for keep in 0..=usable {
            let rec = kl_reconstruct(&expansion, &z, keep)?;
            let err = reconstruction_error(&ensemble, &rec);
            table.push_str(&format!("{keep},{err},{}\n", expansion.tail_ratio(keep)));
        }
        write_text(&dir, "recon_error.csv", &table)?;
        true
    } else {
        false
    };
    write_json(
        &dir,
        "kl.json",
        &json!({
            "params": {
                "kernel": a.kernel,
                "kernel_file": a.kernel_file,
                "n_grid": a.n_grid,
                "modes": a.modes,
                "m_paths": a.m_paths,
                "seed": a.seed,
                "defaults": defaults_block(),
            },
            "lambda_1": expansion.eigenvalues().first(),
            "total_energy": expansion.total_energy(),
            "tail_ratio_at_modes": expansion.tail_ratio(a.modes),
            "reconstruction_table": recon,
        }),
    )
}

fn kernel_from_csv(path: &str) -> Result<nalgebra::DMatrix<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse()).collect();
        rows.push(row.map_err(|e| CliError::Validation(format!("bad kernel row: {e}")))?);
    }
    let n = rows.len();
    if n < 2 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Validation("kernel csv must be a square matrix".into()));
    }
    Ok(nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn defaults_block() -> serde_json::Value {
    json!({
        "n_grid": defaults::N_GRID,
        "n_terms": defaults::N_TERMS,
        "tol": defaults::TOL,
        "k_max": defaults::K_MAX,
        "m_paths": defaults::M_PATHS,
        "seed": defaults::SEED,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_input_is_a_validation_error() {
        let code = run(["specdens", "density"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn unknown_subcommand_is_a_validation_error() {
        let code = run(["specdens", "frobnicate"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["specdens", "--help"]), 0);
    }

    #[test]
    fn zero_generator_is_a_computation_error() {
        let dir = tempfile::tempdir().unwrap();
        let spec = dir.path().join("zero.json");
        std::fs::write(
            &spec,
            r#"{"kind":"piecewise","breakpoints":[0.0,1.0],"values":[[0.0,0.0]]}"#,
        )
        .unwrap();
        let code = run([
            "specdens",
            "density",
            "--spec-file",
            spec.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 2);
    }
}
