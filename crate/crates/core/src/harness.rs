//! Monte Carlo runner: one fitted path per realization, every selector
//! applied to it, and loss efficiency against the per-realization oracle.

use rayon::prelude::*;
use rand::RngCore;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::generators::{
    add_gaussian_noise, draw_poisson, exponential_mean, poisson_theta, realization_rng, trig_design, DesignKind,
    OmittedDesign, PenaltyMode, Scenario,
};
use crate::glm::{glm_fit_path_with, glm_lambda_grid, GlmFamily, IrlsOptions};
use crate::linear::{fit_path_with, lambda_grid, sigma_tilde, CdOptions};
use crate::loss::{gaussian_loss_curve, glm_loss_curve, holdout_l2_loss, LossReport};
use crate::penalties::{convex_scad_a, PenaltyKind, SCAD_DEFAULT_A};
use crate::selectors::{cv_curve, gaussian_criterion, glm_criterion, CvSpec, Model, Selector, SelectorScore};

/// Name used for the oracle in records and summaries.
pub const ORACLE_NAME: &str = "optimal";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeFlag {
    Ok,
    /// Every criterion value was infinite.
    NoAdmissible,
    /// The selector is undefined for this data.
    Unavailable,
    /// The whole realization failed; no path was fitted.
    FitFailed,
}

impl OutcomeFlag {
    pub fn name(&self) -> &'static str {
        match self {
            OutcomeFlag::Ok => "ok",
            OutcomeFlag::NoAdmissible => "no_admissible",
            OutcomeFlag::Unavailable => "unavailable",
            OutcomeFlag::FitFailed => "fit_failed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(OutcomeFlag::Ok),
            "no_admissible" => Ok(OutcomeFlag::NoAdmissible),
            "unavailable" => Ok(OutcomeFlag::Unavailable),
            "fit_failed" => Ok(OutcomeFlag::FitFailed),
            other => Err(Error::Data(format!("unknown record flag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorOutcome {
    pub selector: Selector,
    pub lambda: f64,
    pub df: usize,
    pub loss: f64,
    pub efficiency: f64,
    pub flag: OutcomeFlag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub lambda: f64,
    pub df: usize,
    pub min_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationRecord {
    pub rep: usize,
    pub outcomes: Vec<SelectorOutcome>,
    /// `None` when the realization failed.
    pub oracle: Option<OracleOutcome>,
    pub failure: Option<String>,
    pub lambda_max: f64,
    pub lambda_min: f64,
}

impl RealizationRecord {
    pub fn failed(&self) -> bool {
        self.oracle.is_none()
    }
}

/// Five-number summary `(min, q1, median, q3, max)`.
pub type Quantiles = [f64; 5];

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorSummary {
    /// Selector name, or [`ORACLE_NAME`].
    pub name: String,
    pub median_efficiency: Option<f64>,
    pub df_quantiles: Option<Quantiles>,
    /// Realizations excluded for this selector (failed fits included).
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub selectors: Vec<SelectorSummary>,
    pub median_min_loss: Option<f64>,
    pub failed_reps: usize,
    pub reps: usize,
}

impl ScenarioSummary {
    pub fn get(&self, name: &str) -> Option<&SelectorSummary> {
        self.selectors.iter().find(|s| s.name == name)
    }

    pub fn median_efficiency(&self, sel: Selector) -> Option<f64> {
        self.get(sel.name()).and_then(|s| s.median_efficiency)
    }

    pub fn median_df(&self, sel: Selector) -> Option<f64> {
        self.get(sel.name()).and_then(|s| s.df_quantiles).map(|q| q[2])
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub records: Vec<RealizationRecord>,
    pub summary: ScenarioSummary,
    /// SCAD shape used, when the penalty is SCAD.
    pub scad_a: Option<f64>,
}

/// Median; the mean of the two central order statistics for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

/// Linearly interpolated sample quantile (order statistics at `p (m-1)`).
pub fn quantile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = p * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    // equal neighbours skip interpolation so infinite values stay finite-safe
    if lo == hi || v[lo] == v[hi] {
        Some(v[lo])
    } else {
        Some(v[lo] + frac * (v[hi] - v[lo]))
    }
}

pub fn five_number(values: &[f64]) -> Option<Quantiles> {
    Some([
        quantile(values, 0.0)?,
        quantile(values, 0.25)?,
        quantile(values, 0.5)?,
        quantile(values, 0.75)?,
        quantile(values, 1.0)?,
    ])
}

/// Aggregates records in rep order. Medians use successful outcomes only.
pub fn summarize(records: &[RealizationRecord], selectors: &[Selector]) -> ScenarioSummary {
    let failed_reps = records.iter().filter(|r| r.failed()).count();
    let mut out = Vec::with_capacity(selectors.len() + 1);
    for &sel in selectors {
        let mut eff = Vec::new();
        let mut df = Vec::new();
        for rec in records {
            if let Some(o) = rec.outcomes.iter().find(|o| o.selector == sel && o.flag == OutcomeFlag::Ok) {
                eff.push(o.efficiency);
                df.push(o.df as f64);
            }
        }
        out.push(SelectorSummary {
            name: sel.name().to_string(),
            median_efficiency: median(&eff),
            df_quantiles: five_number(&df),
            failures: records.len() - eff.len(),
        });
    }
    let oracle: Vec<&OracleOutcome> = records.iter().filter_map(|r| r.oracle.as_ref()).collect();
    let oracle_df: Vec<f64> = oracle.iter().map(|o| o.df as f64).collect();
    let min_losses: Vec<f64> = oracle.iter().map(|o| o.min_loss).collect();
    out.push(SelectorSummary {
        name: ORACLE_NAME.to_string(),
        median_efficiency: if oracle.is_empty() { None } else { Some(1.0) },
        df_quantiles: five_number(&oracle_df),
        failures: failed_reps,
    });
    ScenarioSummary { selectors: out, median_min_loss: median(&min_losses), failed_reps, reps: records.len() }
}

/// Everything about a scenario that is fixed across realizations.
struct Fixed {
    design: DesignMatrix,
    mu: Vec<f64>,
    holdout: Option<(DesignMatrix, Vec<f64>)>,
    theta0: Option<Vec<f64>>,
    kind: PenaltyKind,
    cd: CdOptions,
    irls: IrlsOptions,
    model: Model,
}

fn prepare(s: &Scenario) -> Result<Fixed> {
    let d_n = s.d_n();
    let (design, mu, holdout, theta0) = match s.design_kind {
        DesignKind::Exponential => (trig_design(s.n, d_n)?, exponential_mean(s.n), None, None),
        DesignKind::OmittedPredictor => {
            let od = OmittedDesign::new(s.n, s.c, s.rho, s.design_seed)?;
            (od.train, od.mu_train, Some((od.holdout, od.mu_holdout)), None)
        }
        DesignKind::PoissonTrig => {
            let theta0 = poisson_theta(s.n);
            let mu = theta0.iter().map(|t| t.exp()).collect();
            (trig_design(s.n, d_n)?, mu, None, Some(theta0))
        }
    };
    let mut cd = CdOptions::default();
    let kind = match s.penalty {
        PenaltyMode::L1 => PenaltyKind::L1,
        PenaltyMode::ScadAuto => PenaltyKind::scad(convex_scad_a(design.gram_min_eigenvalue())?)?,
        PenaltyMode::ScadFixed => {
            cd.allow_nonconvex = true;
            PenaltyKind::scad(SCAD_DEFAULT_A)?
        }
    };
    let model = match s.design_kind {
        DesignKind::PoissonTrig => Model::Glm(GlmFamily::Poisson),
        _ => Model::Gaussian,
    };
    Ok(Fixed { design, mu, holdout, theta0, kind, cd, irls: IrlsOptions::default(), model })
}

fn failed_record(rep: usize, selectors: &[Selector], reason: String) -> RealizationRecord {
    RealizationRecord {
        rep,
        outcomes: selectors
            .iter()
            .map(|&selector| SelectorOutcome {
                selector,
                lambda: f64::NAN,
                df: 0,
                loss: f64::NAN,
                efficiency: f64::NAN,
                flag: OutcomeFlag::FitFailed,
            })
            .collect(),
        oracle: None,
        failure: Some(reason),
        lambda_max: f64::NAN,
        lambda_min: f64::NAN,
    }
}

fn run_realization(s: &Scenario, fx: &Fixed, rep: usize) -> RealizationRecord {
    match try_realization(s, fx, rep) {
        Ok(r) => r,
        Err(e) => failed_record(rep, &s.selectors, e.to_string()),
    }
}

fn try_realization(s: &Scenario, fx: &Fixed, rep: usize) -> Result<RealizationRecord> {
    let mut rng = realization_rng(s.base_seed, rep as u64);
    let y = match fx.model {
        Model::Gaussian => add_gaussian_noise(&fx.mu, s.sigma2, &mut rng),
        Model::Glm(_) => draw_poisson(&fx.mu, &mut rng),
    };
    let cv_seed = rng.next_u64();
    let n = s.n;

    let (lambdas, df, losses, criteria): (Vec<f64>, Vec<usize>, Vec<f64>, Box<dyn Fn(Selector) -> Result<Vec<f64>>>) =
        match fx.model {
            Model::Gaussian => {
                let grid = lambda_grid(&fx.design, &y, s.grid_size)?;
                let fit = fit_path_with(&fx.design, &y, fx.kind, &grid, &fx.cd)?;
                let losses = match &fx.holdout {
                    Some((hold, mu_hold)) => (0..fit.len())
                        .map(|g| holdout_l2_loss(hold, fit.intercept(g), &fit.slopes(g), mu_hold))
                        .collect(),
                    None => gaussian_loss_curve(&fx.design, &fit, &fx.mu),
                };
                let st = sigma_tilde(&fx.design, &y).ok();
                let (s2, dfc) = (fit.sigma2_hat.clone(), fit.df.clone());
                let crit = move |sel: Selector| gaussian_criterion(sel, &s2, &dfc, n, st);
                (grid, fit.df, losses, Box::new(crit))
            }
            Model::Glm(family) => {
                let grid = glm_lambda_grid(&fx.design, &y, family, s.grid_size)?;
                let fit = glm_fit_path_with(&fx.design, &y, family, fx.kind, &grid, &fx.irls)?;
                let theta0 = fx.theta0.as_ref().expect("GLM scenarios carry the true natural parameter");
                let losses = glm_loss_curve(&fx.design, &fit, &fx.mu, theta0, family);
                let (ll, dfc) = (fit.loglik.clone(), fit.df.clone());
                let crit = move |sel: Selector| glm_criterion(sel, &ll, &dfc, n);
                (grid, fit.df, losses, Box::new(crit))
            }
        };

    let report = LossReport::new(losses)?;
    let mut outcomes = Vec::with_capacity(s.selectors.len());
    for &sel in &s.selectors {
        let values = if sel == Selector::Cv10 {
            let spec = CvSpec {
                model: fx.model,
                kind: fx.kind,
                lambdas: &lambdas,
                k: s.cv_folds,
                seed: cv_seed,
                cd: fx.cd,
                irls: fx.irls,
            };
            cv_curve(&fx.design, &y, &spec)
        } else {
            criteria(sel)
        };
        let outcome = match values.and_then(|v| SelectorScore::from_values(sel, v, &lambdas, &df)) {
            Ok(score) => SelectorOutcome {
                selector: sel,
                lambda: score.selected_lambda,
                df: score.selected_df,
                loss: report.selected_loss(score.selected_index),
                efficiency: report.efficiency(score.selected_index),
                flag: OutcomeFlag::Ok,
            },
            Err(e) => SelectorOutcome {
                selector: sel,
                lambda: f64::NAN,
                df: 0,
                loss: f64::NAN,
                efficiency: f64::NAN,
                flag: if matches!(e, Error::NoAdmissibleLambda) {
                    OutcomeFlag::NoAdmissible
                } else {
                    OutcomeFlag::Unavailable
                },
            },
        };
        outcomes.push(outcome);
    }
    Ok(RealizationRecord {
        rep,
        outcomes,
        oracle: Some(OracleOutcome {
            lambda: lambdas[report.oracle_index],
            df: df[report.oracle_index],
            min_loss: report.min_loss,
        }),
        failure: None,
        lambda_max: lambdas[0],
        lambda_min: *lambdas.last().expect("nonempty grid"),
    })
}

/// SCAD shape a scenario will use, if any.
pub fn scenario_scad_a(s: &Scenario) -> Result<Option<f64>> {
    let fx = prepare(s)?;
    Ok(match fx.kind {
        PenaltyKind::Scad { a } => Some(a),
        PenaltyKind::L1 => None,
    })
}

/// Runs every realization of `scenario` on `workers` threads. Results do
/// not depend on `workers`.
pub fn run_scenario(scenario: &Scenario, workers: usize) -> Result<ScenarioRun> {
    let fx = prepare(scenario)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let records: Vec<RealizationRecord> =
        pool.install(|| (0..scenario.reps).into_par_iter().map(|rep| run_realization(scenario, &fx, rep)).collect());
    let failed = records.iter().filter(|r| r.failed()).count();
    if 2 * failed > records.len() {
        let first = records.iter().find_map(|r| r.failure.clone()).unwrap_or_default();
        return Err(Error::InvalidInput(format!(
            "{failed} of {} realizations failed (first: {first})",
            records.len()
        )));
    }
    let summary = summarize(&records, &scenario.selectors);
    let scad_a = match fx.kind {
        PenaltyKind::Scad { a } => Some(a),
        PenaltyKind::L1 => None,
    };
    Ok(ScenarioRun { records, summary, scad_a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_examples() {
        assert_eq!(median(&[1.0, 2.0, 3.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&[5.0]), Some(5.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn quartiles() {
        let q = five_number(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(q, [1.0, 2.0, 3.0, 4.0, 5.0]);
        let q = five_number(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(q[1], 1.75);
        assert_eq!(q[3], 3.25);
    }
}
