//! Run configuration: a flat `key = value` file plus per-key overrides.
//!
//! ```text
//! # market
//! s0 = 1
//! sigma = 0.2
//! horizon-years = 0.0821917808219178
//! steps = 120
//! dim = 1
//! seed = 42
//! # claim
//! payoff = call          # call | put | asian-call
//! strike = 1
//! coordinate = 0
//! # experiment
//! train-sizes = 10,50,100,200
//! test-count = 500
//! lambda = 0.0000001
//! refinement = 4
//! pi0 = bs               # bs | train-mean | <number>
//! eval-path = 0
//! out = out
//! ```
//!
//! `#` starts a comment. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sighedge_core::{GbmSpec, PayoffKind, PayoffSpec, Pi0Policy, DEFAULT_LAMBDA, DEFAULT_REFINEMENT};

use crate::error::Failure;

pub const KEYS: &[&str] = &[
    "s0",
    "sigma",
    "horizon-years",
    "steps",
    "dim",
    "seed",
    "payoff",
    "strike",
    "coordinate",
    "train-sizes",
    "test-count",
    "lambda",
    "refinement",
    "pi0",
    "eval-path",
    "out",
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub market: GbmSpec,
    pub payoff: PayoffSpec,
    pub train_sizes: Vec<usize>,
    pub test_count: usize,
    pub lambda: f64,
    pub refinement: usize,
    pub pi0: Pi0Policy,
    /// Test path whose positions are written by `evaluate`.
    pub eval_path: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let market = GbmSpec::default();
        Self {
            payoff: PayoffSpec::call(market.s0),
            market,
            train_sizes: vec![10, 50, 100, 200],
            test_count: 500,
            lambda: DEFAULT_LAMBDA,
            refinement: DEFAULT_REFINEMENT,
            pi0: Pi0Policy::BlackScholes,
            eval_path: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, Failure> {
    value
        .parse()
        .map_err(|_| Failure::config(format!("invalid value {value:?} for {key}")))
}

impl RunConfig {
    /// Reads a config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), Failure> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Failure::config(format!("line {}: expected key = value, found {raw:?}", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Failure> {
        match key {
            "s0" => self.market.s0 = parse(key, value)?,
            "sigma" => self.market.sigma = parse(key, value)?,
            "horizon-years" => self.market.horizon_years = parse(key, value)?,
            "steps" => self.market.steps = parse(key, value)?,
            "dim" => self.market.dim = parse(key, value)?,
            "seed" => self.market.seed = parse(key, value)?,
            "payoff" => {
                self.payoff.kind = match value {
                    "call" => PayoffKind::EuropeanCall,
                    "put" => PayoffKind::EuropeanPut,
                    "asian-call" => PayoffKind::AsianCall,
                    _ => return Err(Failure::config(format!("unknown payoff {value:?}"))),
                }
            }
            "strike" => self.payoff.strike = parse(key, value)?,
            "coordinate" => self.payoff.coordinate = parse(key, value)?,
            "train-sizes" => {
                self.train_sizes = value
                    .split(',')
                    .map(|s| parse(key, s.trim()))
                    .collect::<Result<_, _>>()?
            }
            "test-count" => self.test_count = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "refinement" => self.refinement = parse(key, value)?,
            "pi0" => {
                self.pi0 = match value {
                    "bs" => Pi0Policy::BlackScholes,
                    "train-mean" => Pi0Policy::TrainMean,
                    v => Pi0Policy::Explicit(parse(key, v)?),
                }
            }
            "eval-path" => self.eval_path = parse(key, value)?,
            "out" => self.output_dir = PathBuf::from(value),
            _ => return Err(Failure::config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.market.validate().map_err(Failure::from)?;
        if self.train_sizes.is_empty() || self.train_sizes.contains(&0) {
            return Err(Failure::config("train-sizes must be a nonempty list of sizes >= 1"));
        }
        if self.test_count == 0 {
            return Err(Failure::config("test-count must be >= 1"));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Failure::config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.refinement == 0 {
            return Err(Failure::config("refinement must be >= 1"));
        }
        if !self.payoff.strike.is_finite() {
            return Err(Failure::config("strike must be finite"));
        }
        if self.payoff.coordinate >= self.market.dim {
            return Err(Failure::config(format!(
                "coordinate {} out of range for dim {}",
                self.payoff.coordinate, self.market.dim
            )));
        }
        if let Pi0Policy::Explicit(v) = self.pi0 {
            if !v.is_finite() {
                return Err(Failure::config("pi0 must be finite"));
            }
        }
        if self.eval_path >= self.test_count {
            return Err(Failure::config(format!(
                "eval-path {} out of range for test-count {}",
                self.eval_path, self.test_count
            )));
        }
        Ok(())
    }

    pub fn max_train_size(&self) -> usize {
        self.train_sizes.iter().copied().max().unwrap_or(0)
    }

    /// Canonical `key = value` text; parses back to the same config.
    pub fn to_text(&self) -> String {
        let m = &self.market;
        let mut s = String::new();
        let sizes: Vec<String> = self.train_sizes.iter().map(|n| n.to_string()).collect();
        let pi0 = match self.pi0 {
            Pi0Policy::BlackScholes => "bs".to_string(),
            Pi0Policy::TrainMean => "train-mean".to_string(),
            Pi0Policy::Explicit(v) => v.to_string(),
        };
        let _ = writeln!(s, "s0 = {}", m.s0);
        let _ = writeln!(s, "sigma = {}", m.sigma);
        let _ = writeln!(s, "horizon-years = {}", m.horizon_years);
        let _ = writeln!(s, "steps = {}", m.steps);
        let _ = writeln!(s, "dim = {}", m.dim);
        let _ = writeln!(s, "seed = {}", m.seed);
        let _ = writeln!(s, "payoff = {}", self.payoff.kind.name());
        let _ = writeln!(s, "strike = {}", self.payoff.strike);
        let _ = writeln!(s, "coordinate = {}", self.payoff.coordinate);
        let _ = writeln!(s, "train-sizes = {}", sizes.join(","));
        let _ = writeln!(s, "test-count = {}", self.test_count);
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "refinement = {}", self.refinement);
        let _ = writeln!(s, "pi0 = {pi0}");
        let _ = writeln!(s, "eval-path = {}", self.eval_path);
        let _ = writeln!(s, "out = {}", self.output_dir.display());
        s
    }
}
