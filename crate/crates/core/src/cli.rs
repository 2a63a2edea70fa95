//! The `erasure-spectra` command line.
//!
//! Every command writes its primary output (CSV or JSON) plus a
//! `<stem>.manifest.json` next to it. Primary outputs are a pure function of
//! the flags and the seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::empirics::{self, EmpiricalDistribution, ExperimentConfig, DEFAULT_ATOM_TOL};
use crate::error::{Error, Result};
use crate::mats::Ensemble;
use crate::spectra::{SpectralSample, SpectrumKind};
use crate::theory::{LawParams, Normalization, SpectralLaw};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "ERASURE_SPECTRA_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "erasure-spectra", version, about = "Spectra of randomly restricted unitary and DFT matrices")]
pub struct Cli {
    /// Worker threads for Monte Carlo trials (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the limiting density on a grid.
    Theory(TheoryArgs),
    /// Draw restricted spectra and write them as `trial,rank,value`.
    Sample(SampleArgs),
    /// Score a samples file against the limiting law.
    Compare(CompareArgs),
    /// Histogram of a fresh experiment next to the limiting density.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, default_value_t = Normalization::Theorem)]
    pub norm: Normalization,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub ensemble: Ensemble,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    /// Expected dimension of the restricted matrix.
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// CSV written by `sample`.
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(long, default_value_t = DEFAULT_ATOM_TOL)]
    pub atom_tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(long)]
    pub ensemble: Ensemble,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Record written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub seed_source: Option<String>,
    pub tool_version: String,
    pub duration_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

/// Comparison report as written by `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CompareOutput {
    #[serde(flatten)]
    pub report: empirics::ComparisonReport,
    pub samples_file: String,
    pub warnings: Vec<String>,
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn write_file(path: &Path, contents: &[u8]) -> Result<OutputDigest> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    Ok(OutputDigest {
        path: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        sha256: hex::encode(Sha256::digest(contents)),
        bytes: contents.len() as u64,
    })
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s.into_bytes()
}

fn resolve_seed(flag: Option<u64>) -> Result<(u64, &'static str)> {
    if let Some(seed) = flag {
        return Ok((seed, "flag"));
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .trim()
            .parse()
            .map(|s| (s, "env"))
            .map_err(|_| Error::param("seed", f64::NAN, "ERASURE_SPECTRA_SEED must be an unsigned 64-bit integer")),
        Err(_) => Ok((DEFAULT_SEED, "default")),
    }
}

fn run_config(config: &ExperimentConfig, threads: Option<usize>) -> Result<EmpiricalDistribution> {
    match threads {
        Some(t) => empirics::run_experiment_with_threads(config, t),
        None => empirics::run_experiment(config),
    }
}

struct Finished {
    outputs: Vec<OutputDigest>,
    parameters: serde_json::Value,
    seed: Option<(u64, &'static str)>,
}

/// Runs one parsed command line and returns the manifest it wrote.
pub fn run(cli: &Cli) -> Result<RunManifest> {
    let start = Instant::now();
    let (name, out, finished) = match &cli.command {
        Command::Theory(a) => ("theory", &a.out, cmd_theory(a)?),
        Command::Sample(a) => ("sample", &a.out, cmd_sample(a, cli.threads)?),
        Command::Compare(a) => ("compare", &a.out, cmd_compare(a)?),
        Command::Figure(a) => ("figure", &a.out, cmd_figure(a, cli.threads)?),
    };
    let manifest = RunManifest {
        command: name.to_string(),
        parameters: finished.parameters,
        seed: finished.seed.map(|s| s.0),
        seed_source: finished.seed.map(|s| s.1.to_string()),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: start.elapsed().as_secs_f64(),
        outputs: finished.outputs,
    };
    write_file(&manifest_path(out), &to_json(&manifest))?;
    Ok(manifest)
}

fn cmd_theory(args: &TheoryArgs) -> Result<Finished> {
    let params = LawParams::new(args.p, args.q)?;
    let law = SpectralLaw::new(params, args.norm);
    let curve = law.sample_curve(args.grid)?;

    let mut csv = String::from("x,density\n");
    for (x, d) in curve.grid.iter().zip(&curve.values) {
        writeln!(csv, "{},{}", fmt_f64(*x), fmt_f64(*d)).unwrap();
    }
    let continuous = law.continuous_mass();
    let sidecar = json!({
        "p": args.p,
        "q": args.q,
        "normalization": args.norm,
        "edges": law.edges(),
        "atoms": { "atom0": curve.atom0, "atom1": curve.atom1 },
        "continuous_mass": continuous,
        "total_mass": curve.atom0 + curve.atom1 + continuous,
        "mean": law.mean(),
    });
    let outputs = vec![
        write_file(&args.out, csv.as_bytes())?,
        write_file(&args.out.with_extension("json"), &to_json(&sidecar))?,
    ];
    Ok(Finished {
        outputs,
        parameters: json!({ "p": args.p, "q": args.q, "grid": args.grid, "norm": args.norm }),
        seed: None,
    })
}

fn samples_csv(emp: &EmpiricalDistribution) -> String {
    let mut csv = String::from("trial,rank,value\n");
    for (trial, sample) in emp.samples.iter().enumerate() {
        for (rank, v) in sample.values.iter().enumerate() {
            writeln!(csv, "{trial},{rank},{}", fmt_f64(*v)).unwrap();
        }
    }
    csv
}

fn cmd_sample(args: &SampleArgs, threads: Option<usize>) -> Result<Finished> {
    let params = LawParams::new(args.p, args.q)?;
    let seed = resolve_seed(args.seed)?;
    let config = ExperimentConfig::new(args.ensemble, params, args.dim, args.trials, seed.0);
    let emp = run_config(&config, threads)?;
    let outputs = vec![write_file(&args.out, samples_csv(&emp).as_bytes())?];
    let retries: u32 = emp.samples.iter().map(|s| s.retries).sum();
    Ok(Finished {
        outputs,
        parameters: json!({
            "ensemble": args.ensemble,
            "p": args.p,
            "q": args.q,
            "dim": args.dim,
            "ambient_n": config.ambient_dim(),
            "trials": args.trials,
            "pooled_size": emp.len(),
            "mask_retries": retries,
        }),
        seed: Some(seed),
    })
}

/// Reads a `trial,rank,value` file back into per-trial samples.
pub fn read_samples(path: &Path) -> Result<Vec<SpectralSample>> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(1, format!("{other:?}")),
        })?;
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["trial", "rank", "value"] {
        return Err(parse_err(1, "expected header `trial,rank,value`".into()));
    }
    let mut by_trial: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 3 {
            return Err(parse_err(line, format!("expected 3 fields, found {}", record.len())));
        }
        let trial: u64 = record[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad trial id `{}`", &record[0])))?;
        record[1]
            .trim()
            .parse::<u64>()
            .map_err(|_| parse_err(line, format!("bad rank `{}`", &record[1])))?;
        let value: f64 = record[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad value `{}`", &record[2])))?;
        if !value.is_finite() {
            return Err(parse_err(line, format!("non-finite value `{}`", &record[2])));
        }
        by_trial.entry(trial).or_default().push(value);
    }
    Ok(by_trial
        .into_values()
        .map(|mut values| {
            values.sort_by(|a, b| b.total_cmp(a));
            SpectralSample {
                ambient_n: 0,
                rows_kept: values.len(),
                cols_kept: values.len(),
                values,
                kind: SpectrumKind::Eigen,
                retries: 0,
            }
        })
        .collect())
}

fn manifest_warnings(samples: &Path, p: f64, q: f64) -> Vec<String> {
    let path = manifest_path(samples);
    let Ok(raw) = fs::read_to_string(&path) else {
        return vec![format!("no manifest found at {}", path.display())];
    };
    let Ok(manifest) = serde_json::from_str::<RunManifest>(&raw) else {
        return vec![format!("unreadable manifest at {}", path.display())];
    };
    let mut warnings = Vec::new();
    for (name, given) in [("p", p), ("q", q)] {
        match manifest.parameters.get(name).and_then(|v| v.as_f64()) {
            Some(recorded) if recorded != given => warnings.push(format!(
                "parameter mismatch: samples were drawn with {name}={recorded}, compared with {name}={given}"
            )),
            None => warnings.push(format!("manifest does not record {name}")),
            _ => {}
        }
    }
    warnings
}

fn cmd_compare(args: &CompareArgs) -> Result<Finished> {
    let params = LawParams::new(args.p, args.q)?;
    if args.bins < 2 {
        return Err(Error::param("bins", args.bins as f64, "bins >= 2"));
    }
    let samples = read_samples(&args.samples)?;
    let emp = EmpiricalDistribution::from_samples(samples, args.bins, args.atom_tol);
    let law = SpectralLaw::new(params, Normalization::Theorem);
    let report = empirics::compare(&emp, &law)?;
    let output = CompareOutput {
        report,
        samples_file: args
            .samples
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        warnings: manifest_warnings(&args.samples, args.p, args.q),
    };
    let outputs = vec![write_file(&args.out, &to_json(&output))?];
    Ok(Finished {
        outputs,
        parameters: json!({
            "samples": output.samples_file,
            "p": args.p,
            "q": args.q,
            "bins": args.bins,
            "atom_tol": args.atom_tol,
        }),
        seed: None,
    })
}

fn cmd_figure(args: &FigureArgs, threads: Option<usize>) -> Result<Finished> {
    let params = LawParams::new(args.p, args.q)?;
    let seed = resolve_seed(args.seed)?;
    let mut config = ExperimentConfig::new(args.ensemble, params, args.dim, args.trials, seed.0);
    config.bins = args.bins;
    let emp = run_config(&config, threads)?;
    let law = SpectralLaw::new(params, Normalization::Theorem);

    let mut csv = String::from("x,empirical_density,theory_density\n");
    for (x, d) in emp.histogram.centers().iter().zip(emp.histogram.density()) {
        writeln!(csv, "{},{},{}", fmt_f64(*x), fmt_f64(d), fmt_f64(law.density(*x)?)).unwrap();
    }
    let outputs = vec![write_file(&args.out, csv.as_bytes())?];
    Ok(Finished {
        outputs,
        parameters: json!({
            "ensemble": args.ensemble,
            "p": args.p,
            "q": args.q,
            "dim": args.dim,
            "ambient_n": config.ambient_dim(),
            "trials": args.trials,
            "bins": args.bins,
        }),
        seed: Some(seed),
    })
}
