//! Flat `key = value` run configuration with `#` comments.
//!
//! ```text
//! # Exponential design, lasso only
//! design = exponential
//! n = 100,200,400
//! c = 0.3,0.5,0.8,0.98
//! sigma2 = 100
//! penalty = l1
//! selectors = cv10,aic,aicc,bic,cp,gcv,gamma
//! reps = 200
//! seed = 1
//! ```
//!
//! Lists are comma separated. [`SimConfig::serialize`] writes every key in a
//! fixed order, so parse → serialize → parse is a fixed point.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::generators::{DesignKind, PenaltyMode, Scenario};
use crate::selectors::Selector;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub design: DesignKind,
    pub n: Vec<usize>,
    pub c: Vec<f64>,
    pub sigma2: f64,
    pub rho: f64,
    pub penalty: Vec<PenaltyMode>,
    pub selectors: Vec<Selector>,
    pub reps: usize,
    pub seed: u64,
    pub design_seed: Option<u64>,
    pub workers: usize,
    pub grid_size: usize,
    pub cv_folds: usize,
    pub out: String,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            design: DesignKind::Exponential,
            n: vec![100, 200, 400],
            c: vec![0.3, 0.5, 0.8, 0.98],
            sigma2: 100.0,
            rho: 0.0,
            penalty: vec![PenaltyMode::L1],
            selectors: Selector::ALL.to_vec(),
            reps: 200,
            seed: 1,
            design_seed: None,
            workers: 1,
            grid_size: crate::linear::DEFAULT_GRID_SIZE,
            cv_folds: 10,
            out: "results".to_string(),
        }
    }
}

fn parse_list<T>(value: &str, key: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("`{key}` needs at least one value")));
    }
    Ok(items)
}

fn parse_num<T: std::str::FromStr>(value: &str, key: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "design" => self.design = value.parse()?,
            "n" => self.n = parse_list(value, key, |s| parse_num(s, key))?,
            "c" => self.c = parse_list(value, key, |s| parse_num(s, key))?,
            "sigma2" => self.sigma2 = parse_num(value, key)?,
            "rho" => self.rho = parse_num(value, key)?,
            "penalty" => self.penalty = parse_list(value, key, str::parse)?,
            "selectors" => self.selectors = parse_list(value, key, str::parse)?,
            "reps" => self.reps = parse_num(value, key)?,
            "seed" => self.seed = parse_num(value, key)?,
            "design_seed" => {
                self.design_seed = if value.is_empty() || value == "none" { None } else { Some(parse_num(value, key)?) }
            }
            "workers" => self.workers = parse_num(value, key)?,
            "grid_size" => self.grid_size = parse_num(value, key)?,
            "cv_folds" => self.cv_folds = parse_num(value, key)?,
            "out" => self.out = value.to_string(),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "design = {}", self.design);
        let _ = writeln!(s, "n = {}", join(&self.n));
        let _ = writeln!(s, "c = {}", join(&self.c));
        let _ = writeln!(s, "sigma2 = {}", self.sigma2);
        let _ = writeln!(s, "rho = {}", self.rho);
        let _ = writeln!(s, "penalty = {}", join(&self.penalty));
        let _ = writeln!(s, "selectors = {}", join(&self.selectors));
        let _ = writeln!(s, "reps = {}", self.reps);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(
            s,
            "design_seed = {}",
            self.design_seed.map_or_else(|| "none".to_string(), |v| v.to_string())
        );
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "grid_size = {}", self.grid_size);
        let _ = writeln!(s, "cv_folds = {}", self.cv_folds);
        let _ = writeln!(s, "out = {}", self.out);
        s
    }

    /// Scenarios in output order: penalty, then `n`, then `c`.
    ///
    /// All scenarios share `seed`, so realization `r` sees the same noise
    /// stream across penalties and dimensions.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        if self.grid_size < 4 || !self.grid_size.is_multiple_of(2) {
            return Err(Error::Config(format!("grid_size must be even and >= 4, got {}", self.grid_size)));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        let mut out = Vec::new();
        for &penalty in &self.penalty {
            for &n in &self.n {
                for &c in &self.c {
                    let mut s = Scenario::new(
                        self.design,
                        n,
                        c,
                        self.sigma2,
                        self.rho,
                        penalty,
                        self.selectors.clone(),
                        self.reps,
                        self.seed,
                    )?
                    .with_design_seed(self.design_seed.unwrap_or(self.seed));
                    if self.selectors.contains(&Selector::Cv10) && n < 2 * self.cv_folds {
                        return Err(Error::Config(format!("n = {n} is too small for {}-fold CV", self.cv_folds)));
                    }
                    s.grid_size = self.grid_size;
                    s.cv_folds = self.cv_folds;
                    out.push(s);
                }
            }
        }
        Ok(out)
    }
}
