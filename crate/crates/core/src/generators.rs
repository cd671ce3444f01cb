//! Data generators for the simulation designs and the projection-bias
//! diagnostic.
//!
//! Three designs are provided:
//!
//! * `Exponential`: `y_i = exp(4i/n) + ε_i`, `i = 1..n`, fitted on the
//!   trigonometric design.
//! * `OmittedPredictor`: `y = 3x₁ + 1.5x₂ + 2x₁₀ + x₁₃ + ε` with AR(ρ)
//!   Gaussian predictors drawn once; column 13 is never a candidate and the
//!   loss is measured on `n` hold-out rows.
//! * `PoissonTrig`: `θ_i = exp(-5i/n)`, `i = 0..n-1`, `y_i ~ Poisson(exp(θ_i))`
//!   on the trigonometric design.
//!
//! All randomness flows through caller-supplied RNGs; [`realization_rng`]
//! gives each replication its own ChaCha stream.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::linear::ols_refit;
use crate::selectors::Selector;

/// Coefficients of the omitted-predictor truth on (1-based) columns 1, 2, 10, 13.
pub const OMITTED_TRUTH: [(usize, f64); 4] = [(1, 3.0), (2, 1.5), (10, 2.0), (13, 1.0)];
/// 1-based index of the column withheld from every candidate model.
pub const OMITTED_COLUMN: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignKind {
    Exponential,
    OmittedPredictor,
    PoissonTrig,
}

impl DesignKind {
    pub fn name(&self) -> &'static str {
        match self {
            DesignKind::Exponential => "exponential",
            DesignKind::OmittedPredictor => "omitted",
            DesignKind::PoissonTrig => "poisson",
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exponential" => Ok(DesignKind::Exponential),
            "omitted" => Ok(DesignKind::OmittedPredictor),
            "poisson" => Ok(DesignKind::PoissonTrig),
            other => Err(Error::Config(format!("unknown design `{other}`"))),
        }
    }
}

/// How the penalty is chosen for a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyMode {
    L1,
    /// SCAD with `a = max(3.7, 1 + 1/c*)`.
    ScadAuto,
    /// SCAD with `a = 3.7` regardless of convexity.
    ScadFixed,
}

impl PenaltyMode {
    pub fn name(&self) -> &'static str {
        match self {
            PenaltyMode::L1 => "l1",
            PenaltyMode::ScadAuto => "scad",
            PenaltyMode::ScadFixed => "scad37",
        }
    }
}

impl fmt::Display for PenaltyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PenaltyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "l1" => Ok(PenaltyMode::L1),
            "scad" => Ok(PenaltyMode::ScadAuto),
            "scad37" => Ok(PenaltyMode::ScadFixed),
            other => Err(Error::Config(format!("unknown penalty `{other}`"))),
        }
    }
}

/// `2 ⌊n^c / 2⌋`.
pub fn dimension(n: usize, c: f64) -> usize {
    // a relative nudge keeps exact powers such as 100^0.5 from rounding down
    let half = (n as f64).powf(c) / 2.0;
    2 * (half * (1.0 + 1e-12)).floor() as usize
}

/// One Monte Carlo design.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub design_kind: DesignKind,
    pub n: usize,
    pub c: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub penalty: PenaltyMode,
    pub selectors: Vec<Selector>,
    pub reps: usize,
    pub base_seed: u64,
    /// Seed of the fixed omitted-predictor design.
    pub design_seed: u64,
    pub grid_size: usize,
    pub cv_folds: usize,
    d_n: usize,
}

impl Scenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        design_kind: DesignKind,
        n: usize,
        c: f64,
        sigma2: f64,
        rho: f64,
        penalty: PenaltyMode,
        selectors: Vec<Selector>,
        reps: usize,
        base_seed: u64,
    ) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::Config(format!("dimension exponent c must lie in (0,1), got {c}")));
        }
        let d_n = dimension(n, c);
        if d_n < 2 || d_n >= n {
            return Err(Error::Config(format!("d_n = {d_n} must satisfy 2 <= d_n < n = {n}")));
        }
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::Config(format!("noise variance must be finite and nonnegative, got {sigma2}")));
        }
        if !(rho > -1.0 && rho < 1.0) {
            return Err(Error::Config(format!("rho must lie in (-1,1), got {rho}")));
        }
        if reps == 0 {
            return Err(Error::Config("reps must be positive".into()));
        }
        if selectors.is_empty() {
            return Err(Error::Config("at least one selector is required".into()));
        }
        if design_kind == DesignKind::PoissonTrig {
            if penalty != PenaltyMode::L1 {
                return Err(Error::Config("the Poisson design is fitted with the l1 penalty only".into()));
            }
            if let Some(s) = selectors.iter().find(|s| matches!(s, Selector::Cp | Selector::Gcv | Selector::Gamma)) {
                return Err(Error::Config(format!("selector `{s}` is not defined for the Poisson design")));
            }
        }
        if selectors.contains(&Selector::Cp) && n <= d_n + 1 {
            return Err(Error::Config(format!("cp needs n > d_n + 1 (n = {n}, d_n = {d_n})")));
        }
        Ok(Scenario {
            design_kind,
            n,
            c,
            sigma2,
            rho,
            penalty,
            selectors,
            reps,
            base_seed,
            design_seed: base_seed,
            grid_size: crate::linear::DEFAULT_GRID_SIZE,
            cv_folds: 10,
            d_n,
        })
    }

    pub fn d_n(&self) -> usize {
        self.d_n
    }

    pub fn with_design_seed(mut self, seed: u64) -> Self {
        self.design_seed = seed;
        self
    }
}

/// Independent RNG stream for replication `rep` of a scenario.
pub fn realization_rng(base_seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(rep);
    rng
}

/// `n × d_n` trigonometric design: `sin(2πji/n)` for `j = 1..d_n/2`, then the
/// matching cosines, rows `i = 1..n`.
pub fn trig_design(n: usize, d_n: usize) -> Result<DesignMatrix> {
    if !d_n.is_multiple_of(2) || d_n == 0 {
        return Err(Error::InvalidInput(format!("trigonometric design needs even d_n, got {d_n}")));
    }
    if d_n >= n {
        return Err(Error::InvalidInput(format!("d_n = {d_n} must be below n = {n}")));
    }
    let half = d_n / 2;
    let values = DMatrix::from_fn(n, d_n, |r, col| {
        let i = (r + 1) as f64;
        let j = (col % half + 1) as f64;
        let arg = 2.0 * PI * j * i / n as f64;
        if col < half {
            arg.sin()
        } else {
            arg.cos()
        }
    });
    let names = (1..=half)
        .map(|j| format!("sin{j}"))
        .chain((1..=half).map(|j| format!("cos{j}")))
        .collect();
    DesignMatrix::with_names(values, true, names)
}

/// `μ_i = exp(4i/n)`, `i = 1..n`.
pub fn exponential_mean(n: usize) -> Vec<f64> {
    (1..=n).map(|i| (4.0 * i as f64 / n as f64).exp()).collect()
}

/// `mu + N(0, σ²)` noise.
pub fn add_gaussian_noise<R: Rng + ?Sized>(mu: &[f64], sigma2: f64, rng: &mut R) -> Vec<f64> {
    if sigma2 == 0.0 {
        return mu.to_vec();
    }
    let normal = Normal::new(0.0, sigma2.sqrt()).expect("finite positive standard deviation");
    mu.iter().map(|m| m + normal.sample(rng)).collect()
}

#[derive(Debug, Clone)]
pub struct ExponentialData {
    pub design: DesignMatrix,
    pub mu: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn gen_exponential<R: Rng + ?Sized>(n: usize, c: f64, sigma2: f64, rng: &mut R) -> Result<ExponentialData> {
    let design = trig_design(n, dimension(n, c))?;
    let mu = exponential_mean(n);
    let y = add_gaussian_noise(&mu, sigma2, rng);
    Ok(ExponentialData { design, mu, y })
}

/// The fixed part of the omitted-predictor design.
#[derive(Debug, Clone)]
pub struct OmittedDesign {
    pub train: DesignMatrix,
    pub holdout: DesignMatrix,
    pub mu_train: Vec<f64>,
    pub mu_holdout: Vec<f64>,
    /// 1-based generated-column index of each candidate column.
    pub candidate_columns: Vec<usize>,
}

impl OmittedDesign {
    /// Draws the `2n × m` AR(ρ) predictor block once from `design_seed`,
    /// with `m = max(d_n + 1, 13)`. Candidates are the first `d_n` columns
    /// other than column 13; rows `1..n` train and `n+1..2n` are held out.
    pub fn new(n: usize, c: f64, rho: f64, design_seed: u64) -> Result<Self> {
        let d_n = dimension(n, c);
        if d_n < 1 || d_n >= n {
            return Err(Error::InvalidInput(format!("d_n = {d_n} must lie in [1, n)")));
        }
        let m = (d_n + 1).max(OMITTED_COLUMN);
        let sigma = DMatrix::from_fn(m, m, |i, j| rho.powi((i as i32 - j as i32).abs()));
        let chol = sigma
            .cholesky()
            .ok_or_else(|| Error::InvalidInput(format!("AR covariance with rho = {rho} is not positive definite")))?;
        let lower = chol.l();
        let mut rng = ChaCha8Rng::seed_from_u64(design_seed);
        let z: DMatrix<f64> = DMatrix::from_fn(2 * n, m, |_, _| StandardNormal.sample(&mut rng));
        let full = z * lower.transpose();

        let mu_all: Vec<f64> = (0..2 * n)
            .map(|i| OMITTED_TRUTH.iter().map(|&(col, b)| b * full[(i, col - 1)]).sum())
            .collect();
        let candidate_columns: Vec<usize> = (1..=m).filter(|&j| j != OMITTED_COLUMN).take(d_n).collect();
        let zero_based: Vec<usize> = candidate_columns.iter().map(|j| j - 1).collect();
        let names: Vec<String> = candidate_columns.iter().map(|j| format!("x{j}")).collect();
        let cand = full.select_columns(&zero_based);
        let train_rows: Vec<usize> = (0..n).collect();
        let hold_rows: Vec<usize> = (n..2 * n).collect();
        let train = DesignMatrix::with_names(cand.select_rows(&train_rows), true, names.clone())?;
        let holdout = DesignMatrix::with_names(cand.select_rows(&hold_rows), true, names)?;
        Ok(OmittedDesign {
            train,
            holdout,
            mu_train: mu_all[..n].to_vec(),
            mu_holdout: mu_all[n..].to_vec(),
            candidate_columns,
        })
    }
}

#[derive(Debug, Clone)]
pub struct OmittedData {
    pub design: OmittedDesign,
    pub y_train: Vec<f64>,
}

pub fn gen_omitted<R: Rng + ?Sized>(
    n: usize,
    c: f64,
    rho: f64,
    sigma2: f64,
    design_seed: u64,
    rng: &mut R,
) -> Result<OmittedData> {
    let design = OmittedDesign::new(n, c, rho, design_seed)?;
    let y_train = add_gaussian_noise(&design.mu_train, sigma2, rng);
    Ok(OmittedData { design, y_train })
}

/// `θ_i = exp(-5i/n)` for `i = 0..n-1`.
pub fn poisson_theta(n: usize) -> Vec<f64> {
    (0..n).map(|i| (-5.0 * i as f64 / n as f64).exp()).collect()
}

pub fn draw_poisson<R: Rng + ?Sized>(mu: &[f64], rng: &mut R) -> Vec<f64> {
    mu.iter()
        .map(|&m| Poisson::new(m).expect("positive Poisson mean").sample(rng))
        .collect()
}

#[derive(Debug, Clone)]
pub struct PoissonData {
    pub design: DesignMatrix,
    pub theta0: Vec<f64>,
    pub mu: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn gen_poisson<R: Rng + ?Sized>(n: usize, c: f64, rng: &mut R) -> Result<PoissonData> {
    let design = trig_design(n, dimension(n, c))?;
    let theta0 = poisson_theta(n);
    let mu: Vec<f64> = theta0.iter().map(|t| t.exp()).collect();
    let y = draw_poisson(&mu, rng);
    Ok(PoissonData { design, theta0, mu, y })
}

/// `‖μ - Hμ‖²` with `H` the projection onto the intercept and all columns.
pub fn projection_bias(design: &DesignMatrix, mu: &[f64]) -> Result<f64> {
    let all: Vec<usize> = (0..design.ncols()).collect();
    let fit = ols_refit(design, &all, mu)?;
    Ok(fit.rss)
}

/// Column Euclidean norms of the raw design.
pub fn column_norms(design: &DesignMatrix) -> DVector<f64> {
    DVector::from_iterator(design.ncols(), design.values().column_iter().map(|c| c.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(100, 0.3), 2);
        assert_eq!(dimension(100, 0.5), 10);
        assert_eq!(dimension(400, 0.3), 6);
        assert_eq!(dimension(100, 0.98), 90);
        for n in [100, 200, 400] {
            let ds: Vec<usize> = [0.3, 0.5, 0.8, 0.98].iter().map(|&c| dimension(n, c)).collect();
            assert!(ds.windows(2).all(|w| w[0] <= w[1]), "{ds:?}");
        }
    }

    #[test]
    fn trig_quadrant_values() {
        let d = trig_design(4, 2).unwrap();
        let expect = [1.0, 0.0, -1.0, 0.0];
        for i in 0..4 {
            assert!((d.values()[(i, 0)] - expect[i]).abs() < 1e-15);
        }
        let cos_expect = [0.0, -1.0, 0.0, 1.0];
        for i in 0..4 {
            assert!((d.values()[(i, 1)] - cos_expect[i]).abs() < 1e-15);
        }
        assert!(trig_design(10, 3).is_err());
    }

    #[test]
    fn trig_orthogonality_and_norms() {
        let n = 50;
        let d = trig_design(n, 12).unwrap();
        let x = d.values();
        let g = x.tr_mul(x);
        for j in 0..12 {
            assert!((g[(j, j)].sqrt() - (n as f64 / 2.0).sqrt()).abs() < 1e-8);
            for k in 0..12 {
                if j != k {
                    assert!(g[(j, k)].abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn exponential_mean_endpoint() {
        let mu = exponential_mean(100);
        assert!((mu[99] - 4f64.exp()).abs() < 1e-12);
        assert!((mu[99] - 54.59815).abs() < 1e-5);
        let mut rng = realization_rng(1, 0);
        let data = gen_exponential(100, 0.3, 0.0, &mut rng).unwrap();
        assert_eq!(data.y, data.mu);
    }

    #[test]
    fn poisson_theta_start() {
        let t = poisson_theta(200);
        assert_eq!(t[0], 1.0);
        assert!((t[0].exp() - std::f64::consts::E).abs() < 1e-15);
        assert!(t.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }

    #[test]
    fn omitted_design_is_fixed_by_seed() {
        let a = OmittedDesign::new(100, 0.5, 0.5, 9).unwrap();
        let b = OmittedDesign::new(100, 0.5, 0.5, 9).unwrap();
        assert_eq!(a.train.values(), b.train.values());
        assert_eq!(a.mu_holdout, b.mu_holdout);
        assert_eq!(a.candidate_columns, (1..=10).collect::<Vec<_>>());
        let big = OmittedDesign::new(100, 0.8, 0.0, 9).unwrap();
        assert_eq!(big.train.ncols(), dimension(100, 0.8));
        assert!(!big.candidate_columns.contains(&OMITTED_COLUMN));
    }

    #[test]
    fn realization_streams_differ_and_repeat() {
        let draw = |seed, rep| {
            let mut r = realization_rng(seed, rep);
            (0..4).map(|_| r.random::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(draw(5, 3), draw(5, 3));
        assert_ne!(draw(5, 3), draw(5, 4));
        assert_ne!(draw(5, 3), draw(6, 3));
    }

    #[test]
    fn projection_bias_cases() {
        let d = trig_design(40, 4).unwrap();
        let mu: Vec<f64> = (0..40).map(|i| 1.0 + 2.0 * d.values()[(i, 1)]).collect();
        assert!(projection_bias(&d, &mu).unwrap() < 1e-20);
        // a frequency outside the design is orthogonal to it
        let q: Vec<f64> = (1..=40).map(|i| (2.0 * PI * 7.0 * i as f64 / 40.0).sin()).collect();
        let norm2: f64 = q.iter().map(|v| v * v).sum();
        assert!((projection_bias(&d, &q).unwrap() - norm2).abs() < 1e-9);
    }

    #[test]
    fn scenario_validation() {
        let sel = vec![Selector::Aic];
        assert!(Scenario::new(DesignKind::Exponential, 100, 0.3, 100.0, 0.0, PenaltyMode::L1, sel.clone(), 10, 1).is_ok());
        assert!(Scenario::new(DesignKind::Exponential, 100, 0.1, 100.0, 0.0, PenaltyMode::L1, sel.clone(), 10, 1).is_err());
        assert!(Scenario::new(DesignKind::PoissonTrig, 100, 0.3, 0.0, 0.0, PenaltyMode::ScadAuto, sel.clone(), 10, 1).is_err());
        assert!(Scenario::new(DesignKind::PoissonTrig, 100, 0.3, 0.0, 0.0, PenaltyMode::L1, vec![Selector::Gcv], 10, 1).is_err());
        assert!(Scenario::new(DesignKind::Exponential, 100, 0.3, 100.0, 0.0, PenaltyMode::L1, vec![], 10, 1).is_err());
    }
}
