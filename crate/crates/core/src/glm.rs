//! Penalized GLM paths for dispersion-free exponential families.
//!
//! Minimizes `-(1/n) Σ [y_i θ_i - b(θ_i)] + Σ_j p_λ(|β̃_j|)` with
//! `θ = β₀ + X̃β̃` by iteratively reweighted penalized least squares: each
//! outer step forms the working response and weights at the current `θ` and
//! solves the weighted penalized subproblem by coordinate descent. A step
//! that raises the objective is halved until it does not.

use nalgebra::{DMatrix, DVector};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::linear::{check_lambdas, check_response, grid_from_max};
use crate::penalties::{weighted_update, PenaltyKind};

/// `λ_min / λ_max` for GLM paths.
pub const GLM_LAMBDA_RATIO: f64 = 1e-3;
/// Linear predictor bound for Poisson fits.
pub const POISSON_THETA_BOUND: f64 = 30.0;

/// Cumulant function `b(θ)` of a one-parameter exponential family with its
/// first two derivatives.
pub trait Cumulant {
    fn b(&self, theta: f64) -> f64;
    fn b_prime(&self, theta: f64) -> f64;
    fn b_double_prime(&self, theta: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GlmFamily {
    Poisson,
    BernoulliLogit,
}

impl Cumulant for GlmFamily {
    fn b(&self, theta: f64) -> f64 {
        match self {
            GlmFamily::Poisson => theta.exp(),
            // log(1 + e^θ) without overflow
            GlmFamily::BernoulliLogit => theta.max(0.0) + (-theta.abs()).exp().ln_1p(),
        }
    }

    fn b_prime(&self, theta: f64) -> f64 {
        match self {
            GlmFamily::Poisson => theta.exp(),
            GlmFamily::BernoulliLogit => {
                if theta >= 0.0 {
                    1.0 / (1.0 + (-theta).exp())
                } else {
                    let e = theta.exp();
                    e / (1.0 + e)
                }
            }
        }
    }

    fn b_double_prime(&self, theta: f64) -> f64 {
        match self {
            GlmFamily::Poisson => theta.exp(),
            GlmFamily::BernoulliLogit => {
                let p = self.b_prime(theta);
                p * (1.0 - p)
            }
        }
    }
}

impl GlmFamily {
    /// Inverse of `b'`, the canonical link.
    pub fn link(&self, mean: f64) -> f64 {
        match self {
            GlmFamily::Poisson => mean.ln(),
            GlmFamily::BernoulliLogit => (mean / (1.0 - mean)).ln(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GlmFamily::Poisson => "poisson",
            GlmFamily::BernoulliLogit => "logit",
        }
    }

    fn check_response(&self, y: &[f64]) -> Result<f64> {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        match self {
            GlmFamily::Poisson => {
                if y.iter().any(|v| *v < 0.0) {
                    return Err(Error::InvalidInput("Poisson response must be nonnegative".into()));
                }
                if !(mean > 0.0) {
                    return Err(Error::InvalidInput("Poisson response is identically zero".into()));
                }
            }
            GlmFamily::BernoulliLogit => {
                if y.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::InvalidInput("Bernoulli response must lie in [0, 1]".into()));
                }
                if !(mean > 0.0 && mean < 1.0) {
                    return Err(Error::InvalidInput("Bernoulli response has a single class".into()));
                }
            }
        }
        Ok(mean)
    }

    fn theta_bound(&self) -> Option<f64> {
        match self {
            GlmFamily::Poisson => Some(POISSON_THETA_BOUND),
            GlmFamily::BernoulliLogit => None,
        }
    }
}

/// `Σ [y_i θ_i - b(θ_i)]`; the `c(y)` term is omitted.
pub fn log_likelihood<F: Cumulant>(family: &F, y: &[f64], theta: &[f64]) -> f64 {
    y.iter().zip(theta).map(|(yi, t)| yi * t - family.b(*t)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrlsOptions {
    /// Outer convergence threshold on the penalized objective change.
    pub tol: f64,
    /// Outer iterations allowed per grid point.
    pub max_iter: usize,
    /// Inner coordinate-descent threshold (max coefficient change).
    pub inner_tol: f64,
    pub inner_max_iter: usize,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        IrlsOptions { tol: 1e-7, max_iter: 200, inner_tol: 1e-10, inner_max_iter: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlmPathFit {
    pub lambdas: Vec<f64>,
    /// `G × (d+1)` raw-scale coefficients; column 0 is the intercept.
    pub coefficients: DMatrix<f64>,
    pub df: Vec<usize>,
    /// `Σ [y_i θ̂_i - b(θ̂_i)]` at each grid point.
    pub loglik: Vec<f64>,
    pub objective: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Outer iterations that raised the objective after step halving.
    pub monotonicity_violations: usize,
}

impl GlmPathFit {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn slopes(&self, g: usize) -> Vec<f64> {
        self.coefficients.row(g).iter().skip(1).copied().collect()
    }

    /// Linear predictor `θ̂` at grid point `g` for the rows of `design`.
    pub fn theta(&self, design: &DesignMatrix, g: usize) -> DVector<f64> {
        design.predict(self.coefficients[(g, 0)], &self.slopes(g))
    }
}

/// `max_j |x̃_jᵀ(y - b'(θ̂₀))| / n` with `θ̂₀` the intercept-only MLE.
pub fn glm_lambda_max(design: &DesignMatrix, y: &[f64], family: GlmFamily) -> Result<f64> {
    check_response(design, y)?;
    let ybar = family.check_response(y)?;
    let center = if design.intercept() { ybar } else { family.b_prime(0.0) };
    let xs = design.standardized();
    let r = DVector::from_iterator(y.len(), y.iter().map(|v| v - center));
    let n = y.len() as f64;
    let lmax = xs.column_iter().map(|c| c.dot(&r).abs() / n).fold(0.0, f64::max);
    if !(lmax > 0.0) {
        return Err(Error::DegenerateResponse);
    }
    Ok(lmax)
}

pub fn glm_lambda_grid(design: &DesignMatrix, y: &[f64], family: GlmFamily, count: usize) -> Result<Vec<f64>> {
    grid_from_max(glm_lambda_max(design, y, family)?, GLM_LAMBDA_RATIO, count)
}

pub fn glm_fit_path(
    design: &DesignMatrix,
    y: &[f64],
    family: GlmFamily,
    kind: PenaltyKind,
    lambdas: &[f64],
) -> Result<GlmPathFit> {
    glm_fit_path_with(design, y, family, kind, lambdas, &IrlsOptions::default())
}

pub fn glm_fit_path_with(
    design: &DesignMatrix,
    y: &[f64],
    family: GlmFamily,
    kind: PenaltyKind,
    lambdas: &[f64],
    opts: &IrlsOptions,
) -> Result<GlmPathFit> {
    let (fit, failure) = glm_fit_path_partial(design, y, family, kind, lambdas, opts)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(fit),
    }
}

struct IrlsState<'a> {
    xs: &'a DMatrix<f64>,
    y: &'a [f64],
    family: GlmFamily,
    kind: PenaltyKind,
    intercept: bool,
    n: f64,
}

impl IrlsState<'_> {
    fn theta(&self, b0: f64, beta: &[f64]) -> DVector<f64> {
        let mut t = self.xs * DVector::from_column_slice(beta);
        t.add_scalar_mut(b0);
        t
    }

    fn objective(&self, theta: &DVector<f64>, beta: &[f64], lambda: f64) -> f64 {
        -log_likelihood(&self.family, self.y, theta.as_slice()) / self.n
            + beta.iter().map(|b| self.kind.value(lambda, *b)).sum::<f64>()
    }

    /// Solves the weighted penalized least-squares subproblem at `theta`,
    /// starting from `(b0, beta)`. Returns the proposed coefficients.
    fn inner_solve(
        &self,
        theta: &DVector<f64>,
        b0: f64,
        beta: &[f64],
        lambda: f64,
        opts: &IrlsOptions,
    ) -> (f64, Vec<f64>) {
        let n = theta.len();
        let mut w = DVector::zeros(n);
        let mut resid = DVector::zeros(n);
        for i in 0..n {
            let wi = self.family.b_double_prime(theta[i]).max(1e-10);
            w[i] = wi;
            // working response minus current linear predictor
            resid[i] = (self.y[i] - self.family.b_prime(theta[i])) / wi;
        }
        let wsum = w.sum();
        let d = beta.len();
        let curv: Vec<f64> = (0..d)
            .map(|j| self.xs.column(j).iter().zip(w.iter()).map(|(x, wi)| wi * x * x).sum::<f64>() / self.n)
            .collect();
        let mut b0 = b0;
        let mut beta = beta.to_vec();
        let mut wr = resid.component_mul(&w);
        for _ in 0..opts.inner_max_iter {
            let mut max_change = 0.0f64;
            if self.intercept {
                let shift = wr.sum() / wsum;
                if shift != 0.0 {
                    b0 += shift;
                    resid.add_scalar_mut(-shift);
                    wr = resid.component_mul(&w);
                    max_change = max_change.max(shift.abs());
                }
            }
            for j in 0..d {
                let col = self.xs.column(j);
                let old = beta[j];
                let u = col.dot(&wr) / self.n + curv[j] * old;
                let new = weighted_update(u, curv[j], lambda, self.kind);
                let delta = new - old;
                if delta != 0.0 {
                    beta[j] = new;
                    for i in 0..n {
                        resid[i] -= delta * col[i];
                        wr[i] = w[i] * resid[i];
                    }
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < opts.inner_tol {
                break;
            }
        }
        (b0, beta)
    }
}

pub(crate) fn glm_fit_path_partial(
    design: &DesignMatrix,
    y: &[f64],
    family: GlmFamily,
    kind: PenaltyKind,
    lambdas: &[f64],
    opts: &IrlsOptions,
) -> Result<(GlmPathFit, Option<Error>)> {
    check_response(design, y)?;
    check_lambdas(lambdas)?;
    let ybar = family.check_response(y)?;

    let d = design.ncols();
    let xs = design.standardized();
    let state = IrlsState { xs: &xs, y, family, kind, intercept: design.intercept(), n: y.len() as f64 };

    let mut b0 = if design.intercept() { family.link(ybar) } else { 0.0 };
    let mut beta = vec![0.0; d];
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut loglik = Vec::new();
    let mut objective = Vec::new();
    let mut iterations = Vec::new();
    let mut violations = 0usize;
    let mut failure = None;

    'grid: for (g, &lambda) in lambdas.iter().enumerate() {
        let mut theta = state.theta(b0, &beta);
        let mut obj = state.objective(&theta, &beta, lambda);
        let mut iters = 0usize;
        let mut converged = false;
        while iters < opts.max_iter {
            iters += 1;
            let (nb0, nbeta) = state.inner_solve(&theta, b0, &beta, lambda, opts);
            // step halving on the full objective
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let cb0 = b0 + step * (nb0 - b0);
                let cbeta: Vec<f64> = beta.iter().zip(&nbeta).map(|(o, n)| o + step * (n - o)).collect();
                let ctheta = state.theta(cb0, &cbeta);
                let cobj = state.objective(&ctheta, &cbeta, lambda);
                if cobj.is_finite() && cobj <= obj {
                    accepted = Some((cb0, cbeta, ctheta, cobj));
                    break;
                }
                step *= 0.5;
            }
            let Some((cb0, cbeta, ctheta, cobj)) = accepted else {
                // no descent direction left: the current point is stationary up to rounding
                converged = true;
                break;
            };
            if cobj > obj {
                violations += 1;
            }
            let coef_change = beta
                .iter()
                .zip(&cbeta)
                .map(|(o, n)| (o - n).abs())
                .fold((b0 - cb0).abs(), f64::max);
            let obj_change = obj - cobj;
            b0 = cb0;
            beta = cbeta;
            theta = ctheta;
            obj = cobj;
            if let Some(bound) = family.theta_bound() {
                if theta.iter().any(|t| t.abs() > bound) {
                    failure = Some(Error::Divergence {
                        index: g,
                        reason: format!("linear predictor left [-{bound}, {bound}]"),
                    });
                    break 'grid;
                }
            }
            if obj_change.abs() < opts.tol * obj.abs().max(1.0) && coef_change < 1e3 * opts.tol {
                converged = true;
                break;
            }
        }
        if !converged {
            failure = Some(Error::NonConvergence { index: g, lambda });
            break;
        }
        objective.push(obj);
        loglik.push(log_likelihood(&family, y, theta.as_slice()));
        iterations.push(iters);
        let mut row = vec![0.0; d + 1];
        let mut shift = 0.0;
        for j in 0..d {
            let b = beta[j] / design.column_scales()[j];
            row[j + 1] = b;
            shift += design.column_means()[j] * b;
        }
        row[0] = if design.intercept() { b0 - shift } else { 0.0 };
        rows.push(row);
    }

    let g_done = rows.len();
    let coefficients = DMatrix::from_fn(g_done, d + 1, |g, j| rows[g][j]);
    let df = rows
        .iter()
        .map(|r| r[1..].iter().filter(|b| **b != 0.0).count() + usize::from(design.intercept()))
        .collect();
    let fit = GlmPathFit {
        lambdas: lambdas[..g_done].to_vec(),
        coefficients,
        df,
        loglik,
        objective,
        iterations,
        monotonicity_violations: violations,
    };
    Ok((fit, failure))
}

/// Pseudo-true linear predictor: solves `X_αᵀ(μ - b'(X_α β)) = 0` over the
/// columns in `support` (plus the intercept when the design has one) and
/// returns `X_α β*`.
pub fn pseudo_true_theta(
    design: &DesignMatrix,
    mu: &[f64],
    family: GlmFamily,
    support: &[usize],
) -> Result<DVector<f64>> {
    let n = design.nrows();
    if mu.len() != n {
        return Err(Error::InvalidInput("mean vector length does not match design".into()));
    }
    let icpt = usize::from(design.intercept());
    let p = support.len() + icpt;
    if p == 0 {
        return Err(Error::InvalidInput("empty candidate model".into()));
    }
    let mut xa = DMatrix::zeros(n, p);
    if icpt == 1 {
        xa.column_mut(0).fill(1.0);
    }
    for (k, &j) in support.iter().enumerate() {
        if j >= design.ncols() {
            return Err(Error::InvalidInput(format!("support index {j} out of range")));
        }
        xa.column_mut(k + icpt).copy_from(&design.values().column(j));
    }
    let muv = DVector::from_column_slice(mu);
    let mut beta = DVector::zeros(p);
    if icpt == 1 {
        beta[0] = family.link(muv.mean());
    }
    // negative expected log-likelihood under μ; convex in β
    let risk = |theta: &DVector<f64>| theta.iter().zip(mu).map(|(t, m)| family.b(*t) - m * t).sum::<f64>();
    let mut theta = &xa * &beta;
    let mut current = risk(&theta);
    for _ in 0..200 {
        let score = xa.tr_mul(&(&muv - theta.map(|t| family.b_prime(t))));
        if score.norm() < 1e-10 {
            return Ok(theta);
        }
        let w = theta.map(|t| family.b_double_prime(t));
        let mut info = DMatrix::zeros(p, p);
        for i in 0..n {
            let row = xa.row(i);
            info += w[i] * row.transpose() * row;
        }
        let step = info
            .cholesky()
            .ok_or_else(|| Error::RankDeficient("singular information matrix".into()))?
            .solve(&score);
        let mut t = 1.0;
        loop {
            let cand = &beta + t * &step;
            let ctheta = &xa * &cand;
            let cval = risk(&ctheta);
            if cval.is_finite() && cval <= current + 1e-14 * current.abs().max(1.0) {
                beta = cand;
                theta = ctheta;
                current = cval;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::NonConvergence { index: 0, lambda: 0.0 });
            }
        }
    }
    let score = xa.tr_mul(&(&muv - theta.map(|t| family.b_prime(t))));
    if score.norm() < 1e-8 {
        Ok(theta)
    } else {
        Err(Error::NonConvergence { index: 0, lambda: 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logit_cumulant_is_overflow_safe() {
        let f = GlmFamily::BernoulliLogit;
        assert!((f.b(800.0) - 800.0).abs() < 1e-12);
        assert!(f.b(-800.0) >= 0.0 && f.b(-800.0) < 1e-300);
        assert_eq!(f.b_prime(800.0), 1.0);
        assert_eq!(f.b_prime(-800.0), 0.0);
        assert!((f.b(0.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for fam in [GlmFamily::Poisson, GlmFamily::BernoulliLogit] {
            for k in 0..100 {
                let t = -5.0 + 10.0 * (k as f64 + 0.5) / 100.0;
                let fd1 = (fam.b(t + h) - fam.b(t - h)) / (2.0 * h);
                let fd2 = (fam.b_prime(t + h) - fam.b_prime(t - h)) / (2.0 * h);
                let tol1 = 1e-7 * fam.b_prime(t).abs().max(1.0);
                let tol2 = 1e-7 * fam.b_double_prime(t).abs().max(1.0);
                assert!((fd1 - fam.b_prime(t)).abs() < tol1, "{fam:?} b' at {t}");
                assert!((fd2 - fam.b_double_prime(t)).abs() < tol2, "{fam:?} b'' at {t}");
                assert!(fam.b_double_prime(t) > 0.0);
            }
        }
    }

    #[test]
    fn degenerate_responses_rejected() {
        let x = DMatrix::from_fn(4, 1, |i, _| i as f64);
        let d = DesignMatrix::new(x, true).unwrap();
        assert!(glm_lambda_max(&d, &[0.0; 4], GlmFamily::Poisson).is_err());
        assert!(glm_lambda_max(&d, &[1.0; 4], GlmFamily::BernoulliLogit).is_err());
        assert!(glm_lambda_max(&d, &[0.0; 4], GlmFamily::BernoulliLogit).is_err());
    }

    #[test]
    fn unit_mean_poisson_lambda_max() {
        let x = DMatrix::from_row_slice(4, 1, &[1.0, 2.0, 3.0, 6.0]);
        let d = DesignMatrix::new(x, true).unwrap();
        let y = [0.0, 1.0, 1.0, 2.0];
        let xs = d.standardized();
        let expected = xs.column(0).iter().zip(&y).map(|(a, b)| a * (b - 1.0)).sum::<f64>().abs() / 4.0;
        let got = glm_lambda_max(&d, &y, GlmFamily::Poisson).unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn pseudo_true_intercept_only_is_log_mean() {
        let x = DMatrix::from_fn(5, 1, |i, _| i as f64);
        let d = DesignMatrix::new(x, true).unwrap();
        let mu = [1.0, 2.0, 3.0, 4.0, 5.0];
        let theta = pseudo_true_theta(&d, &mu, GlmFamily::Poisson, &[]).unwrap();
        for t in theta.iter() {
            assert!((t - 3f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn pseudo_true_recovers_true_model() {
        let x = DMatrix::from_fn(8, 2, |i, j| ((i + 1) as f64 * (j as f64 + 1.3)).sin());
        let d = DesignMatrix::new(x, true).unwrap();
        let theta0 = d.predict(0.4, &[0.7, -0.3]);
        let mu: Vec<f64> = theta0.iter().map(|t| t.exp()).collect();
        let theta = pseudo_true_theta(&d, &mu, GlmFamily::Poisson, &[0, 1]).unwrap();
        assert!((theta - theta0).amax() < 1e-9);
    }
}
