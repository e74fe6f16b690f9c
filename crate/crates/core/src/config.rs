//! Run configuration: flat `key = value` text, with every key optional and
//! unknown keys rejected.

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::{parse_list, Domain};
use crate::levy_models::{meixner_model_with, LevyModel, DEFAULT_MAX_MOMENT_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Isometry,
    Orthogonality,
    Marginals,
    Genfun,
    WickPathwise,
    Jacobi,
    ProductFormula,
    Coefficients,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Coefficients,
        Suite::Genfun,
        Suite::WickPathwise,
        Suite::Jacobi,
        Suite::ProductFormula,
        Suite::Marginals,
        Suite::Isometry,
        Suite::Orthogonality,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Isometry => "isometry",
            Suite::Orthogonality => "orthogonality",
            Suite::Marginals => "marginals",
            Suite::Genfun => "genfun",
            Suite::WickPathwise => "wick-pathwise",
            Suite::Jacobi => "jacobi",
            Suite::ProductFormula => "product-formula",
            Suite::Coefficients => "coefficients",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
                Error::Config(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lambda: f64,
    pub cells: usize,
    /// σ-mass per cell; `cells` copies of [`RunConfig::DEFAULT_MASS`] when unset.
    pub masses: Option<Vec<f64>>,
    /// Small-jump truncation; each suite has its own default.
    pub eps: Option<f64>,
    pub seed: u64,
    pub replicates: usize,
    pub max_order: usize,
    pub suite: Option<Suite>,
    pub workers: usize,
    /// σ(Δ) for marginal laws.
    pub sigma_delta: f64,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            lambda: 3.0,
            cells: 4,
            masses: None,
            eps: None,
            seed: 20_240_601,
            replicates: 100_000,
            max_order: 10,
            suite: None,
            workers: 1,
            sigma_delta: 1.0,
        }
    }
}

const KEYS: [&str; 10] = [
    "lambda",
    "cells",
    "masses",
    "eps",
    "seed",
    "replicates",
    "max_order",
    "suite",
    "workers",
    "sigma_delta",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

impl RunConfig {
    pub const DEFAULT_MASS: f64 = 2.5;

    /// Set one key; unknown keys and malformed values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "lambda" => self.lambda = parse_num(key, v)?,
            "cells" => self.cells = parse_num(key, v)?,
            "masses" => self.masses = Some(parse_list(v).map_err(|e| Error::Config(format!("masses: {e}")))?),
            "eps" => self.eps = Some(parse_num(key, v)?),
            "seed" => self.seed = parse_num(key, v)?,
            "replicates" => self.replicates = parse_num(key, v)?,
            "max_order" => self.max_order = parse_num(key, v)?,
            "suite" => self.suite = Some(Suite::parse(v)?),
            "workers" => self.workers = parse_num(key, v)?,
            "sigma_delta" => self.sigma_delta = parse_num(key, v)?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown key {key:?}; expected one of {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Apply `key = value` lines on top of `self`; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {line:?}", no + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "lambda = {}\ncells = {}\n",
            self.lambda, self.cells
        );
        if let Some(m) = &self.masses {
            let m: Vec<String> = m.iter().map(|x| x.to_string()).collect();
            out += &format!("masses = {}\n", m.join(","));
        }
        if let Some(e) = self.eps {
            out += &format!("eps = {e}\n");
        }
        out += &format!(
            "seed = {}\nreplicates = {}\nmax_order = {}\nworkers = {}\nsigma_delta = {}\n",
            self.seed, self.replicates, self.max_order, self.workers, self.sigma_delta
        );
        if let Some(s) = self.suite {
            out += &format!("suite = {s}\n");
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be finite and ≥ 0, got {}", self.lambda));
        }
        if self.cells == 0 || self.cells > 64 {
            return bad(format!("cells must be in 1..=64, got {}", self.cells));
        }
        if let Some(m) = &self.masses {
            if m.len() != self.cells {
                return bad(format!("{} masses for {} cells", m.len(), self.cells));
            }
            if m.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return bad("masses must be positive and finite".into());
            }
        }
        if let Some(e) = self.eps {
            if !(e >= 0.0 && e.is_finite()) {
                return bad(format!("eps must be finite and ≥ 0, got {e}"));
            }
        }
        if self.replicates < 2 {
            return bad(format!("replicates must be ≥ 2, got {}", self.replicates));
        }
        if self.max_order == 0 || self.max_order > 16 {
            return bad(format!("max_order must be in 1..=16, got {}", self.max_order));
        }
        if self.workers == 0 || self.workers > 256 {
            return bad(format!("workers must be in 1..=256, got {}", self.workers));
        }
        if !(self.sigma_delta > 0.0 && self.sigma_delta.is_finite()) {
            return bad(format!("sigma_delta must be positive, got {}", self.sigma_delta));
        }
        Ok(())
    }

    pub fn masses(&self) -> Vec<f64> {
        self.masses.clone().unwrap_or_else(|| vec![Self::DEFAULT_MASS; self.cells])
    }

    /// Unit-length grid with the configured masses.
    pub fn domain(&self) -> Result<Domain> {
        Domain::uniform(1.0, self.masses())
    }

    /// Meixner model at the configured λ; `default_eps` applies when no
    /// truncation was configured and λ ≤ 2.
    pub fn model(&self, default_eps: f64) -> Result<LevyModel> {
        let eps = if self.lambda > 2.0 { 0.0 } else { self.eps.unwrap_or(default_eps) };
        meixner_model_with(self.lambda, eps, DEFAULT_MAX_MOMENT_ORDER)
    }
}
