//! Tuning-parameter selection: information criteria, GCV, `Γn` and k-fold
//! cross-validation.
//!
//! Every criterion is minimized over the grid. Degenerate points (a zero
//! residual variance under a log, a vanished denominator) score `+∞` so they
//! can never be selected.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::glm::{glm_fit_path_partial, log_likelihood, GlmFamily, IrlsOptions};
use crate::linear::{fit_path_partial, CdOptions};
use crate::penalties::PenaltyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selector {
    Cv10,
    Aic,
    Aicc,
    Bic,
    Cp,
    Gcv,
    Gamma,
}

impl Selector {
    pub const ALL: [Selector; 7] = [
        Selector::Cv10,
        Selector::Aic,
        Selector::Aicc,
        Selector::Bic,
        Selector::Cp,
        Selector::Gcv,
        Selector::Gamma,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Selector::Cv10 => "cv10",
            Selector::Aic => "aic",
            Selector::Aicc => "aicc",
            Selector::Bic => "bic",
            Selector::Cp => "cp",
            Selector::Gcv => "gcv",
            Selector::Gamma => "gamma",
        }
    }

    pub fn supports(&self, model: Model) -> bool {
        match model {
            Model::Gaussian => true,
            Model::Glm(_) => matches!(self, Selector::Cv10 | Selector::Aic | Selector::Aicc | Selector::Bic),
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Selector::ALL
            .iter()
            .copied()
            .find(|sel| sel.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown selector `{s}`")))
    }
}

/// Response model for a path fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Gaussian,
    Glm(GlmFamily),
}

pub fn aic_gauss(sigma2_hat: f64, df: usize, n: usize) -> f64 {
    if !(sigma2_hat > 0.0) {
        return f64::INFINITY;
    }
    sigma2_hat.ln() + 2.0 * df as f64 / n as f64
}

pub fn aicc_gauss(sigma2_hat: f64, df: usize, n: usize) -> f64 {
    if !(sigma2_hat > 0.0) || df + 2 >= n {
        return f64::INFINITY;
    }
    sigma2_hat.ln() + 2.0 * (df as f64 + 1.0) / (n as f64 - df as f64 - 2.0)
}

pub fn bic_gauss(sigma2_hat: f64, df: usize, n: usize) -> f64 {
    if !(sigma2_hat > 0.0) {
        return f64::INFINITY;
    }
    sigma2_hat.ln() + (n as f64).ln() * df as f64 / n as f64
}

pub fn gcv(sigma2_hat: f64, df: usize, n: usize) -> f64 {
    if df >= n {
        return f64::INFINITY;
    }
    sigma2_hat / (1.0 - df as f64 / n as f64).powi(2)
}

/// Mallows' `Cp` with full-model variance `sigma_tilde2`.
pub fn cp(sigma2_hat: f64, df: usize, n: usize, sigma_tilde2: f64) -> f64 {
    sigma2_hat + 2.0 * df as f64 * sigma_tilde2 / n as f64
}

/// `σ̂²_λ (1 + 2 df / n)`.
pub fn gamma_n(sigma2_hat: f64, df: usize, n: usize) -> f64 {
    sigma2_hat * (1.0 + 2.0 * df as f64 / n as f64)
}

pub fn aic_glm(loglik: f64, df: usize, n: usize) -> f64 {
    -2.0 * loglik / n as f64 + 2.0 * df as f64 / n as f64
}

pub fn aicc_glm(loglik: f64, df: usize, n: usize) -> f64 {
    if df + 2 >= n {
        return f64::INFINITY;
    }
    -2.0 * loglik / n as f64 + 2.0 * (df as f64 + 1.0) / (n as f64 - df as f64 - 2.0)
}

pub fn bic_glm(loglik: f64, df: usize, n: usize) -> f64 {
    -2.0 * loglik / n as f64 + (n as f64).ln() * df as f64 / n as f64
}

/// Index of the smallest value; ties go to the smallest index (largest λ).
pub fn select(values: &[f64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i).ok_or(Error::NoAdmissibleLambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorScore {
    pub selector: Selector,
    pub values: Vec<f64>,
    pub selected_index: usize,
    pub selected_lambda: f64,
    pub selected_df: usize,
}

impl SelectorScore {
    pub fn from_values(selector: Selector, values: Vec<f64>, lambdas: &[f64], df: &[usize]) -> Result<Self> {
        if values.len() != lambdas.len() || df.len() != lambdas.len() {
            return Err(Error::InvalidInput("criterion, lambda and df lengths differ".into()));
        }
        let idx = select(&values)?;
        Ok(SelectorScore {
            selector,
            values,
            selected_index: idx,
            selected_lambda: lambdas[idx],
            selected_df: df[idx],
        })
    }
}

/// Criterion values along a Gaussian path. `sigma_tilde2` is required for
/// `cp`; cross-validation is not handled here.
pub fn gaussian_criterion(
    selector: Selector,
    sigma2_hat: &[f64],
    df: &[usize],
    n: usize,
    sigma_tilde2: Option<f64>,
) -> Result<Vec<f64>> {
    let f: Box<dyn Fn(f64, usize) -> f64> = match selector {
        Selector::Aic => Box::new(|s, k| aic_gauss(s, k, n)),
        Selector::Aicc => Box::new(|s, k| aicc_gauss(s, k, n)),
        Selector::Bic => Box::new(|s, k| bic_gauss(s, k, n)),
        Selector::Gcv => Box::new(|s, k| gcv(s, k, n)),
        Selector::Gamma => Box::new(|s, k| gamma_n(s, k, n)),
        Selector::Cp => {
            let st = sigma_tilde2.ok_or_else(|| {
                Error::SelectorUnavailable("cp".into(), "full-model variance needs n > d + 1".into())
            })?;
            Box::new(move |s, k| cp(s, k, n, st))
        }
        Selector::Cv10 => {
            return Err(Error::InvalidInput("cross-validation is not a closed-form criterion".into()))
        }
    };
    Ok(sigma2_hat.iter().zip(df).map(|(s, k)| f(*s, *k)).collect())
}

/// Criterion values along a GLM path.
pub fn glm_criterion(selector: Selector, loglik: &[f64], df: &[usize], n: usize) -> Result<Vec<f64>> {
    let f: fn(f64, usize, usize) -> f64 = match selector {
        Selector::Aic => aic_glm,
        Selector::Aicc => aicc_glm,
        Selector::Bic => bic_glm,
        other => {
            return Err(Error::SelectorUnavailable(
                other.name().into(),
                "not defined for GLM paths".into(),
            ))
        }
    };
    Ok(loglik.iter().zip(df).map(|(l, k)| f(*l, *k, n)).collect())
}

/// Fold label for each observation: a seeded shuffle dealt round-robin, so
/// fold sizes differ by at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut folds = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        folds[i] = pos % k;
    }
    folds
}

/// Settings for a cross-validated path.
#[derive(Debug, Clone, Copy)]
pub struct CvSpec<'a> {
    pub model: Model,
    pub kind: PenaltyKind,
    pub lambdas: &'a [f64],
    pub k: usize,
    pub seed: u64,
    pub cd: CdOptions,
    pub irls: IrlsOptions,
}

/// Mean held-out error at each λ, averaged over folds.
///
/// Gaussian folds score squared prediction error, GLM folds score deviance
/// `-(2/m) Σ [y θ̂ - b(θ̂)]`. A fold whose fit fails from grid index `g`
/// onwards contributes `+∞` there.
pub fn cv_curve(design: &DesignMatrix, y: &[f64], spec: &CvSpec) -> Result<Vec<f64>> {
    let n = design.nrows();
    if spec.k < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {}", spec.k)));
    }
    if n < spec.k {
        return Err(Error::InvalidInput(format!("{n} observations cannot fill {} folds", spec.k)));
    }
    if y.len() != n {
        return Err(Error::InvalidInput("response length does not match design".into()));
    }
    let folds = fold_assignment(n, spec.k, spec.seed);
    let g = spec.lambdas.len();
    let mut total = vec![0.0; g];
    for fold in 0..spec.k {
        let errs = fold_errors(design, y, &folds, fold, spec);
        for (t, e) in total.iter_mut().zip(errs) {
            *t += e;
        }
    }
    Ok(total.into_iter().map(|t| t / spec.k as f64).collect())
}

fn fold_errors(design: &DesignMatrix, y: &[f64], folds: &[usize], fold: usize, spec: &CvSpec) -> Vec<f64> {
    let g = spec.lambdas.len();
    let train: Vec<usize> = (0..folds.len()).filter(|&i| folds[i] != fold).collect();
    let test: Vec<usize> = (0..folds.len()).filter(|&i| folds[i] == fold).collect();
    let mut out = vec![f64::INFINITY; g];
    let Ok(train_design) = design.select_rows(&train) else {
        return out;
    };
    let test_values = design.values().select_rows(&test);
    let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    let y_test: Vec<f64> = test.iter().map(|&i| y[i]).collect();
    let m = test.len() as f64;
    let predict = |intercept: f64, slopes: Vec<f64>| {
        let mut p = &test_values * nalgebra::DVector::from_vec(slopes);
        p.add_scalar_mut(intercept);
        p
    };
    match spec.model {
        Model::Gaussian => {
            let Ok((fit, _)) = fit_path_partial(&train_design, &y_train, spec.kind, spec.lambdas, &spec.cd) else {
                return out;
            };
            for (gi, slot) in out.iter_mut().enumerate().take(fit.len()) {
                let pred = predict(fit.intercept(gi), fit.slopes(gi));
                *slot = y_test.iter().zip(pred.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / m;
            }
        }
        Model::Glm(family) => {
            let Ok((fit, _)) =
                glm_fit_path_partial(&train_design, &y_train, family, spec.kind, spec.lambdas, &spec.irls)
            else {
                return out;
            };
            for (gi, slot) in out.iter_mut().enumerate().take(fit.len()) {
                let theta = predict(fit.coefficients[(gi, 0)], fit.slopes(gi));
                *slot = -2.0 * log_likelihood(&family, &y_test, theta.as_slice()) / m;
            }
        }
    }
    out
}

/// k-fold cross-validation score; `df` comes from the full-data path fit.
pub fn kfold_cv(design: &DesignMatrix, y: &[f64], spec: &CvSpec) -> Result<SelectorScore> {
    let values = cv_curve(design, y, spec)?;
    let df = match spec.model {
        Model::Gaussian => crate::linear::fit_path_with(design, y, spec.kind, spec.lambdas, &spec.cd)?.df,
        Model::Glm(family) => {
            crate::glm::glm_fit_path_with(design, y, family, spec.kind, spec.lambdas, &spec.irls)?.df
        }
    };
    SelectorScore::from_values(Selector::Cv10, values, spec.lambdas, &df)
}
