//! Experiment configuration: per-experiment defaults, an optional
//! `key=value` file, and command-line overrides, applied in that order.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::error::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    SpdConvex,
    SparseMean,
    ConstrainedMean,
    CheckInequalities,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::SpdConvex => "spd-convex",
            Self::SparseMean => "sparse-mean",
            Self::ConstrainedMean => "constrained-mean",
            Self::CheckInequalities => "check-inequalities",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which CRPG stepsize rules to run. `Both` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StepsizeMode {
    Constant,
    Backtracking,
    Both,
}

impl StepsizeMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::Backtracking => "backtracking",
            Self::Both => "both",
        }
    }

    pub fn constant(self) -> bool {
        self != Self::Backtracking
    }

    pub fn backtracking(self) -> bool {
        self != Self::Constant
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// `n` for `P(n)` or `H^n`; several values run one after another.
    pub dimensions: Vec<usize>,
    pub seed: u64,
    /// Sparsity weights of the sparse mean.
    pub mu: Vec<f64>,
    /// Weight of the distance term of the SPD problem.
    pub tau: f64,
    /// Radius of the constraint ball.
    pub radius: f64,
    pub stepsize: StepsizeMode,
    /// Backtracking initial guess; `None` uses the experiment's multiple of `1/L`.
    pub s: Option<f64>,
    pub eta: f64,
    pub theta: f64,
    pub max_iter: usize,
    /// Gradient-mapping tolerance of CRPG and PGA; cost-change tolerance of CPPA.
    pub tol: f64,
    pub runs: usize,
    /// Size of the data cloud.
    pub points: usize,
    /// Initial CPPA stepsize `lambda_0` of `lambda_k = lambda_0 / (k + 1)`.
    pub cppa_lambda0: f64,
    /// Random triples per geometry in the inequality suite.
    pub samples: usize,
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            dimensions: vec![2],
            seed: 42,
            mu: vec![0.1, 0.5, 1.0],
            tau: 0.5,
            radius: 1.0,
            stepsize: StepsizeMode::Both,
            s: None,
            eta: 0.9,
            theta: 2.0,
            max_iter: 5000,
            tol: 1e-7,
            runs: 1,
            points: 1000,
            cppa_lambda0: 1.0,
            samples: 500,
            output: PathBuf::from("results"),
        };
        match experiment {
            Experiment::SpdConvex => Self { dimensions: vec![2, 3, 4, 5], max_iter: 20000, ..base },
            Experiment::SparseMean => Self { dimensions: vec![10, 50, 100], runs: 10, ..base },
            Experiment::ConstrainedMean => Self {
                dimensions: vec![2, 5, 10, 20, 50, 100, 200],
                points: 400,
                eta: 0.995,
                theta: 1.0,
                ..base
            },
            Experiment::CheckInequalities => Self { points: 30, ..base },
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |field: &str, msg: String| Err(BenchError::Config(format!("{field}: {msg}")));
        let min_dim = match self.experiment {
            Experiment::SparseMean => 2,
            _ => 1,
        };
        if self.dimensions.is_empty() {
            return bad("dimension", "at least one value required".into());
        }
        if let Some(&d) = self.dimensions.iter().find(|&&d| d < min_dim) {
            return bad("dimension", format!("{d} is below {min_dim}"));
        }
        if self.mu.is_empty() || self.mu.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return bad("mu", format!("{:?} must be finite and nonnegative", self.mu));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad("tau", format!("{} must be positive", self.tau));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return bad("radius", format!("{} must be positive", self.radius));
        }
        if let Some(s) = self.s {
            if !(s.is_finite() && s > 0.0) {
                return bad("s", format!("{s} must be positive"));
            }
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad("eta", format!("{} must lie in (0, 1)", self.eta));
        }
        if !(self.theta.is_finite() && self.theta >= 1.0) {
            return bad("theta", format!("{} must be at least 1", self.theta));
        }
        if self.max_iter == 0 {
            return bad("max_iter", "must be at least 1".into());
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad("tol", format!("{} must be positive", self.tol));
        }
        if self.runs == 0 {
            return bad("runs", "must be at least 1".into());
        }
        if self.points == 0 {
            return bad("points", "must be at least 1".into());
        }
        if !(self.cppa_lambda0.is_finite() && self.cppa_lambda0 > 0.0) {
            return bad("cppa_lambda0", format!("{} must be positive", self.cppa_lambda0));
        }
        if self.samples == 0 {
            return bad("samples", "must be at least 1".into());
        }
        Ok(())
    }

    /// Applies one `key=value` setting. Keys use underscores or dashes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), BenchError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let err = |what: &str| BenchError::Config(format!("{key}: cannot parse {value:?} as {what}"));
        let float = |v: &str| v.parse::<f64>().map_err(|_| err("a number"));
        let uint = |v: &str| v.parse::<usize>().map_err(|_| err("a nonnegative integer"));
        match key.as_str() {
            "experiment" => {
                self.experiment = Experiment::from_str(value, true).map_err(|_| err("an experiment"))?;
            }
            "dimension" | "dimensions" => self.dimensions = split_list(value).map(uint).collect::<Result<_, _>>()?,
            "seed" => self.seed = value.parse().map_err(|_| err("a 64-bit seed"))?,
            "mu" => self.mu = split_list(value).map(float).collect::<Result<_, _>>()?,
            "tau" => self.tau = float(value)?,
            "radius" => self.radius = float(value)?,
            "stepsize" => {
                self.stepsize = StepsizeMode::from_str(value, true).map_err(|_| err("constant|backtracking|both"))?;
            }
            "s" => self.s = Some(float(value)?),
            "eta" => self.eta = float(value)?,
            "theta" => self.theta = float(value)?,
            "max_iter" => self.max_iter = uint(value)?,
            "tol" => self.tol = float(value)?,
            "runs" => self.runs = uint(value)?,
            "points" => self.points = uint(value)?,
            "cppa_lambda0" => self.cppa_lambda0 = float(value)?,
            "samples" => self.samples = uint(value)?,
            "output" => self.output = PathBuf::from(value),
            _ => return Err(BenchError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies every `key=value` line of `text`; `#` starts a comment.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), BenchError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| BenchError::Config(format!("line {}: expected key=value, got {raw:?}", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("config file {}: {e}", path.display())))?;
        self.apply_file_text(&text)
    }

    /// `(key, value)` pairs describing the full configuration, in a fixed order.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        vec![
            ("experiment", self.experiment.name().to_string()),
            ("dimension", self.dimensions.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")),
            ("seed", self.seed.to_string()),
            ("mu", list(&self.mu)),
            ("tau", self.tau.to_string()),
            ("radius", self.radius.to_string()),
            ("stepsize", self.stepsize.name().to_string()),
            ("s", self.s.map_or_else(|| "default".to_string(), |s| s.to_string())),
            ("eta", self.eta.to_string()),
            ("theta", self.theta.to_string()),
            ("max_iter", self.max_iter.to_string()),
            ("tol", self.tol.to_string()),
            ("runs", self.runs.to_string()),
            ("points", self.points.to_string()),
            ("cppa_lambda0", self.cppa_lambda0.to_string()),
            ("samples", self.samples.to_string()),
        ]
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Command line of the `bench` binary.
#[derive(Debug, Parser)]
#[command(name = "bench", version, about = "Run proximal gradient experiments and theory checks")]
pub struct Cli {
    pub experiment: Experiment,
    /// Comma-separated list of dimensions.
    #[arg(long)]
    pub dimension: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated list of sparsity weights.
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum)]
    pub stepsize: Option<StepsizeMode>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub cppa_lambda0: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// `key=value` file applied before the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl Cli {
    /// Defaults for the experiment, then the config file, then the flags.
    pub fn resolve(&self) -> Result<ExperimentConfig, BenchError> {
        let mut cfg = ExperimentConfig::defaults(self.experiment);
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
            if cfg.experiment != self.experiment {
                return Err(BenchError::Config(format!(
                    "experiment: config file names {} but the command line names {}",
                    cfg.experiment, self.experiment
                )));
            }
        }
        let flags: [(&str, Option<String>); 15] = [
            ("dimension", self.dimension.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
            ("mu", self.mu.clone()),
            ("tau", self.tau.map(|v| v.to_string())),
            ("radius", self.radius.map(|v| v.to_string())),
            ("stepsize", self.stepsize.map(|v| v.name().to_string())),
            ("s", self.s.map(|v| v.to_string())),
            ("eta", self.eta.map(|v| v.to_string())),
            ("theta", self.theta.map(|v| v.to_string())),
            ("max_iter", self.max_iter.map(|v| v.to_string())),
            ("tol", self.tol.map(|v| v.to_string())),
            ("runs", self.runs.map(|v| v.to_string())),
            ("points", self.points.map(|v| v.to_string())),
            ("cppa_lambda0", self.cppa_lambda0.map(|v| v.to_string())),
            ("samples", self.samples.map(|v| v.to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
