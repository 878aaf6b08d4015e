use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::parsers::strip_comment;

/// Query distribution family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Free variables drawn uniformly.
    Uniform,
    /// Free variables drawn with weight equal to the level of their
    /// elimination node.
    Skewed,
    /// Queries read from a log.
    Empirical,
    /// `lambda * uniform + (1 - lambda) * skewed`.
    Mixture(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub scheme: Scheme,
    /// Query sizes `r` (number of free variables).
    pub sizes: Vec<usize>,
    pub samples_per_size: usize,
    pub seed: u64,
    /// Query log for the empirical scheme.
    pub log: Option<PathBuf>,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec { scheme: Scheme::Uniform, sizes: vec![1, 2, 3, 4, 5], samples_per_size: 50, seed: 0, log: None }
    }
}

impl WorkloadSpec {
    pub fn uniform(sizes: Vec<usize>) -> Self {
        WorkloadSpec { sizes, ..Default::default() }
    }

    pub fn skewed(sizes: Vec<usize>) -> Self {
        WorkloadSpec { scheme: Scheme::Skewed, sizes, ..Default::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples_per_size = samples;
        self
    }

    /// Checks the spec against a network with `n` variables.
    pub fn check(&self, n: usize) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::contract("workload needs at least one query size"));
        }
        if let Some(&r) = self.sizes.iter().find(|&&r| r == 0 || r > n) {
            return Err(Error::contract(format!("query size {r} outside 1..={n}")));
        }
        if let Scheme::Mixture(l) = self.scheme {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::contract(format!("mixture weight {l} outside [0, 1]")));
            }
        }
        if self.scheme == Scheme::Empirical && self.log.is_none() {
            return Err(Error::contract("empirical workload needs `log=<path>`"));
        }
        Ok(())
    }

    /// Parses `key=value` lines: `scheme`, `sizes`, `samples`, `seed`,
    /// `lambda`, `log`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = WorkloadSpec::default();
        let mut scheme = "uniform".to_string();
        let mut lambda = None;
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| Error::Syntax { line: i + 1, column: 1, message };
            let (key, value) =
                line.split_once('=').ok_or_else(|| syntax(format!("expected key=value, found `{line}`")))?;
            let value = value.trim();
            let num = |what: &str| syntax(format!("bad {what} `{value}`"));
            match key.trim() {
                "scheme" => scheme = value.to_ascii_lowercase(),
                "sizes" => {
                    spec.sizes = value
                        .split(',')
                        .map(|s| s.trim().parse::<usize>().map_err(|_| num("size list")))
                        .collect::<Result<_>>()?
                }
                "samples" => spec.samples_per_size = value.parse().map_err(|_| num("sample count"))?,
                "seed" => spec.seed = value.parse().map_err(|_| num("seed"))?,
                "lambda" => lambda = Some(value.parse::<f64>().map_err(|_| num("lambda"))?),
                "log" => spec.log = Some(PathBuf::from(value)),
                other => return Err(syntax(format!("unknown workload key `{other}`"))),
            }
        }
        spec.scheme = match scheme.as_str() {
            "uniform" => Scheme::Uniform,
            "skewed" => Scheme::Skewed,
            "empirical" => Scheme::Empirical,
            "mixture" => Scheme::Mixture(lambda.unwrap_or(0.5)),
            other => return Err(Error::Syntax { line: 1, column: 1, message: format!("unknown scheme `{other}`") }),
        };
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let name = match self.scheme {
            Scheme::Uniform => "uniform",
            Scheme::Skewed => "skewed",
            Scheme::Empirical => "empirical",
            Scheme::Mixture(_) => "mixture",
        };
        let _ = writeln!(s, "scheme={name}");
        let sizes: Vec<String> = self.sizes.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "sizes={}", sizes.join(","));
        let _ = writeln!(s, "samples={}", self.samples_per_size);
        let _ = writeln!(s, "seed={}", self.seed);
        if let Scheme::Mixture(l) = self.scheme {
            let _ = writeln!(s, "lambda={l}");
        }
        if let Some(p) = &self.log {
            let _ = writeln!(s, "log={}", p.display());
        }
        s
    }
}
