//! Penalized least squares by cyclic coordinate descent.
//!
//! The objective minimized at each `λ` is
//!
//! ```text
//! (1/2n) ‖ỹ - X̃β̃‖² + Σ_j p_λ(|β̃_j|)
//! ```
//!
//! on standardized columns `X̃` and centered response `ỹ` (when an intercept
//! is fitted). Coefficients are reported on the raw scale.

use nalgebra::{DMatrix, DVector};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::penalties::{convex_scad_a, univariate_update, PenaltyKind};

/// Default grid size.
pub const DEFAULT_GRID_SIZE: usize = 200;
/// `λ_min / λ_max` for Gaussian paths.
pub const GAUSSIAN_LAMBDA_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Permit SCAD with `a` below the convexity bound for this design.
    pub allow_nonconvex: bool,
}

impl Default for CdOptions {
    fn default() -> Self {
        CdOptions { tol: 1e-8, max_iter: 10_000, allow_nonconvex: false }
    }
}

/// A fitted regularization path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFit {
    pub lambdas: Vec<f64>,
    /// `G × (d+1)`; column 0 is the intercept (0 when not fitted).
    pub coefficients: DMatrix<f64>,
    /// Nonzero count including the intercept when fitted.
    pub df: Vec<usize>,
    /// `‖y - Xβ̂_λ‖² / n` from the returned coefficients.
    pub sigma2_hat: Vec<f64>,
    pub objective: Vec<f64>,
    /// Coordinate-descent sweeps spent at each grid point.
    pub sweeps: Vec<usize>,
    /// Sweeps where the penalized objective increased. Zero for a sound solver.
    pub monotonicity_violations: usize,
}

impl PathFit {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn intercept(&self, g: usize) -> f64 {
        self.coefficients[(g, 0)]
    }

    /// Slope coefficients at grid point `g`.
    pub fn slopes(&self, g: usize) -> Vec<f64> {
        self.coefficients.row(g).iter().skip(1).copied().collect()
    }

    pub fn fitted(&self, design: &DesignMatrix, g: usize) -> DVector<f64> {
        design.predict(self.intercept(g), &self.slopes(g))
    }
}

/// Grid of `count` strictly decreasing values from `lambda_max` to
/// `ratio · lambda_max`: the first half log-spaced down to the geometric
/// midpoint, the second half equally spaced below it.
pub fn grid_from_max(lambda_max: f64, ratio: f64, count: usize) -> Result<Vec<f64>> {
    if count < 4 || !count.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("grid size must be even and >= 4, got {count}")));
    }
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::DegenerateResponse);
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidInput(format!("grid ratio must lie in (0,1), got {ratio}")));
    }
    let half = count / 2;
    let lambda_min = ratio * lambda_max;
    let lambda_mid = lambda_max * ratio.sqrt();
    let mut grid = Vec::with_capacity(count);
    let log_step = (lambda_mid / lambda_max).ln() / (half - 1) as f64;
    for k in 0..half {
        grid.push(lambda_max * (log_step * k as f64).exp());
    }
    grid[half - 1] = lambda_mid;
    let lin_step = (lambda_mid - lambda_min) / half as f64;
    for k in 1..=half {
        grid.push(lambda_mid - lin_step * k as f64);
    }
    grid[count - 1] = lambda_min;
    Ok(grid)
}

/// Smallest `λ` at which every slope is zero, `max_j |x̃_jᵀ(y - ȳ)| / n`.
pub fn lambda_max(design: &DesignMatrix, y: &[f64]) -> Result<f64> {
    check_response(design, y)?;
    let xs = design.standardized();
    let ytil = centered_response(design, y);
    let n = design.nrows() as f64;
    let lmax = xs.column_iter().map(|c| c.dot(&ytil).abs() / n).fold(0.0, f64::max);
    if !(lmax > 0.0) {
        return Err(Error::DegenerateResponse);
    }
    Ok(lmax)
}

/// The default Gaussian `λ` grid for `(design, y)`.
pub fn lambda_grid(design: &DesignMatrix, y: &[f64], count: usize) -> Result<Vec<f64>> {
    grid_from_max(lambda_max(design, y)?, GAUSSIAN_LAMBDA_RATIO, count)
}

pub(crate) fn check_response(design: &DesignMatrix, y: &[f64]) -> Result<()> {
    if y.len() != design.nrows() {
        return Err(Error::InvalidInput(format!(
            "response has {} entries, design has {} rows",
            y.len(),
            design.nrows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("response contains non-finite values".into()));
    }
    Ok(())
}

fn centered_response(design: &DesignMatrix, y: &[f64]) -> DVector<f64> {
    let mut v = DVector::from_column_slice(y);
    if design.intercept() {
        let mean = v.mean();
        v.add_scalar_mut(-mean);
    }
    v
}

pub(crate) fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("empty lambda grid".into()));
    }
    if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::InvalidInput("lambdas must be finite and nonnegative".into()));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("lambdas must be strictly decreasing".into()));
    }
    Ok(())
}

/// Rejects SCAD shapes below the convexity bound unless opted in.
pub(crate) fn check_scad_convexity(design: &DesignMatrix, kind: PenaltyKind, opts: &CdOptions) -> Result<()> {
    if let PenaltyKind::Scad { a } = kind {
        if !opts.allow_nonconvex {
            let needed = convex_scad_a(design.gram_min_eigenvalue())?;
            if a < needed * (1.0 - 1e-12) {
                return Err(Error::InvalidInput(format!(
                    "SCAD a = {a} is below the convexity bound {needed} for this design; \
                     enable nonconvex mode to fit it anyway"
                )));
            }
        }
    }
    Ok(())
}

/// Fits the path with default solver options.
pub fn fit_path(design: &DesignMatrix, y: &[f64], kind: PenaltyKind, lambdas: &[f64]) -> Result<PathFit> {
    fit_path_with(design, y, kind, lambdas, &CdOptions::default())
}

pub fn fit_path_with(
    design: &DesignMatrix,
    y: &[f64],
    kind: PenaltyKind,
    lambdas: &[f64],
    opts: &CdOptions,
) -> Result<PathFit> {
    let (fit, failure) = fit_path_partial(design, y, kind, lambdas, opts)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(fit),
    }
}

/// Fits as many grid points as converge. Returns the path up to the first
/// failing grid point together with that failure, if any.
pub(crate) fn fit_path_partial(
    design: &DesignMatrix,
    y: &[f64],
    kind: PenaltyKind,
    lambdas: &[f64],
    opts: &CdOptions,
) -> Result<(PathFit, Option<Error>)> {
    check_response(design, y)?;
    check_lambdas(lambdas)?;
    check_scad_convexity(design, kind, opts)?;

    let (n, d) = (design.nrows(), design.ncols());
    let nf = n as f64;
    let xs = design.standardized();
    let ytil = centered_response(design, y);
    let ybar = if design.intercept() { y.iter().sum::<f64>() / nf } else { 0.0 };

    let mut beta = vec![0.0; d];
    let mut resid = ytil.clone();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(lambdas.len());
    let mut objective = Vec::with_capacity(lambdas.len());
    let mut sweeps = Vec::with_capacity(lambdas.len());
    let mut violations = 0usize;
    let mut failure = None;
    let mut gram: Option<DMatrix<f64>> = None;

    let penalized_objective = |resid: &DVector<f64>, beta: &[f64], lambda: f64| {
        resid.norm_squared() / (2.0 * nf) + beta.iter().map(|b| kind.value(lambda, *b)).sum::<f64>()
    };

    'grid: for (g, &lambda) in lambdas.iter().enumerate() {
        let mut obj = penalized_objective(&resid, &beta, lambda);
        let mut count = 0usize;
        let mut active: Vec<usize> = Vec::new();
        let mut newton_gap = NEWTON_EVERY;
        let mut next_newton = NEWTON_EVERY;
        loop {
            // full sweep
            let change = sweep(&xs, &mut resid, &mut beta, 0..d, lambda, kind, nf);
            count += 1;
            let new_obj = penalized_objective(&resid, &beta, lambda);
            if new_obj > obj + 1e-12 * obj.abs().max(1.0) {
                violations += 1;
            }
            obj = new_obj;
            if change < opts.tol {
                break;
            }
            if count >= opts.max_iter {
                failure = Some(Error::NonConvergence { index: g, lambda });
                break 'grid;
            }
            active.clear();
            active.extend((0..d).filter(|&j| beta[j] != 0.0));
            loop {
                let change = sweep(&xs, &mut resid, &mut beta, active.iter().copied(), lambda, kind, nf);
                count += 1;
                let mut new_obj = penalized_objective(&resid, &beta, lambda);
                if count >= next_newton && change >= opts.tol {
                    let gram = gram.get_or_insert_with(|| xs.tr_mul(&xs) / nf);
                    match newton_step(&xs, gram, &mut resid, &mut beta, &active, lambda, kind, nf, new_obj) {
                        Some(o) => {
                            new_obj = o;
                            next_newton = count + NEWTON_EVERY;
                        }
                        None => {
                            newton_gap = (2 * newton_gap).min(NEWTON_MAX_GAP);
                            next_newton = count + newton_gap;
                        }
                    }
                }
                if new_obj > obj + 1e-12 * obj.abs().max(1.0) {
                    violations += 1;
                }
                obj = new_obj;
                if change < opts.tol {
                    break;
                }
                if count >= opts.max_iter {
                    failure = Some(Error::NonConvergence { index: g, lambda });
                    break 'grid;
                }
            }
        }
        objective.push(obj);
        sweeps.push(count);

        let mut row = vec![0.0; d + 1];
        let mut shift = 0.0;
        for j in 0..d {
            let b = beta[j] / design.column_scales()[j];
            row[j + 1] = b;
            shift += design.column_means()[j] * b;
        }
        row[0] = if design.intercept() { ybar - shift } else { 0.0 };
        rows.push(row);
    }

    let g_done = rows.len();
    let coefficients = DMatrix::from_fn(g_done, d + 1, |g, j| rows[g][j]);
    let yv = DVector::from_column_slice(y);
    let mut df = Vec::with_capacity(g_done);
    let mut sigma2_hat = Vec::with_capacity(g_done);
    for row in &rows {
        let nz = row[1..].iter().filter(|b| **b != 0.0).count();
        df.push(nz + usize::from(design.intercept()));
        let fitted = design.predict(row[0], &row[1..]);
        sigma2_hat.push((&yv - fitted).norm_squared() / nf);
    }

    let fit = PathFit {
        lambdas: lambdas[..g_done].to_vec(),
        coefficients,
        df,
        sigma2_hat,
        objective,
        sweeps,
        monotonicity_violations: violations,
    };
    Ok((fit, failure))
}

/// Sweeps before the first Newton attempt at a grid point; the gap doubles
/// after each rejected attempt.
const NEWTON_EVERY: usize = 10;
const NEWTON_MAX_GAP: usize = 160;

/// Newton step on the active coefficients with the penalty's local
/// quadratic, kept only if it lowers the penalized objective. The objective
/// is piecewise quadratic, so once signs and SCAD regions settle the step
/// lands on the minimizer; coordinate descent then confirms convergence.
/// Returns the new objective when the step is taken.
#[allow(clippy::too_many_arguments)]
fn newton_step(
    xs: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    resid: &mut DVector<f64>,
    beta: &mut [f64],
    active: &[usize],
    lambda: f64,
    kind: PenaltyKind,
    n: f64,
    obj: f64,
) -> Option<f64> {
    let k = active.len();
    // centred columns span at most n - 1 dimensions
    if k == 0 || k as f64 >= n - 1.0 {
        return None;
    }
    let xa = xs.select_columns(active);
    let mut h = DMatrix::from_fn(k, k, |r, c| gram[(active[r], active[c])]);
    let mut grad = -(xa.tr_mul(resid)) / n;
    for (i, &j) in active.iter().enumerate() {
        let b = beta[j];
        grad[i] += b.signum() * kind.derivative(lambda, b.abs());
        if let PenaltyKind::Scad { a } = kind {
            if b.abs() > lambda && b.abs() < a * lambda {
                h[(i, i)] -= 1.0 / (a - 1.0);
            }
        }
    }
    let mut step = h.cholesky()?.solve(&grad);
    // the quadratic model is exact up to the first kink along the step
    let mut t = 1.0f64;
    let mut lands_on_zero = None;
    for (i, &j) in active.iter().enumerate() {
        let (b, s) = (beta[j].abs(), step[i] * beta[j].signum());
        if s <= 0.0 {
            // moving away from zero: only SCAD boundaries above b matter
            for edge in scad_edges(kind, lambda) {
                if edge > b && s < 0.0 && (edge - b) / -s < t {
                    t = (edge - b) / -s;
                    lands_on_zero = None;
                }
            }
            continue;
        }
        for edge in scad_edges(kind, lambda).into_iter().chain(std::iter::once(0.0)) {
            if edge < b && (b - edge) / s < t {
                t = (b - edge) / s;
                lands_on_zero = (edge == 0.0).then_some(j);
            }
        }
    }
    step *= t;
    let mut trial = beta.to_vec();
    for (i, &j) in active.iter().enumerate() {
        trial[j] -= step[i];
    }
    if let Some(j) = lands_on_zero {
        trial[j] = 0.0;
    }
    let delta = DVector::from_fn(k, |i, _| beta[active[i]] - trial[active[i]]);
    let new_resid = &*resid + &xa * &delta;
    let new_obj = new_resid.norm_squared() / (2.0 * n) + trial.iter().map(|b| kind.value(lambda, *b)).sum::<f64>();
    if new_obj.is_finite() && new_obj < obj {
        *resid = new_resid;
        beta.copy_from_slice(&trial);
        Some(new_obj)
    } else {
        None
    }
}

fn scad_edges(kind: PenaltyKind, lambda: f64) -> Vec<f64> {
    match kind {
        PenaltyKind::L1 => vec![],
        PenaltyKind::Scad { a } => vec![lambda, a * lambda],
    }
}

/// One pass of exact coordinate minimization over `coords`; returns the
/// largest absolute coefficient change.
fn sweep(
    xs: &DMatrix<f64>,
    resid: &mut DVector<f64>,
    beta: &mut [f64],
    coords: impl Iterator<Item = usize>,
    lambda: f64,
    kind: PenaltyKind,
    n: f64,
) -> f64 {
    let mut max_change = 0.0f64;
    for j in coords {
        let col = xs.column(j);
        let old = beta[j];
        let z = col.dot(resid) / n + old;
        let new = univariate_update(z, lambda, kind);
        let delta = new - old;
        if delta != 0.0 {
            resid.axpy(-delta, &col, 1.0);
            beta[j] = new;
            max_change = max_change.max(delta.abs());
        }
    }
    max_change
}

/// Least-squares fit on a subset of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub intercept: f64,
    /// One coefficient per support column, in support order.
    pub coefficients: Vec<f64>,
    pub rss: f64,
}

/// Exact least squares of `y` on `[1, X_support]` (intercept per design).
pub fn ols_refit(design: &DesignMatrix, support: &[usize], y: &[f64]) -> Result<OlsFit> {
    check_response(design, y)?;
    let n = design.nrows();
    let icpt = usize::from(design.intercept());
    let p = support.len() + icpt;
    if let Some(&bad) = support.iter().find(|&&j| j >= design.ncols()) {
        return Err(Error::InvalidInput(format!("support index {bad} out of range")));
    }
    let yv = DVector::from_column_slice(y);
    if p == 0 {
        return Ok(OlsFit { intercept: 0.0, coefficients: vec![], rss: yv.norm_squared() });
    }
    if p > n {
        return Err(Error::RankDeficient(format!("{p} parameters for {n} observations")));
    }
    let mut a = DMatrix::zeros(n, p);
    if icpt == 1 {
        a.column_mut(0).fill(1.0);
    }
    for (k, &j) in support.iter().enumerate() {
        a.column_mut(k + icpt).copy_from(&design.values().column(j));
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let max_diag = (0..p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..p).any(|i| r[(i, i)].abs() <= 1e-10 * max_diag.max(f64::MIN_POSITIVE)) {
        return Err(Error::RankDeficient("selected columns are linearly dependent".into()));
    }
    let qty = qr.q().tr_mul(&yv);
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient("singular triangular factor".into()))?;
    let rss = (&yv - &a * &coef).norm_squared();
    let intercept = if icpt == 1 { coef[0] } else { 0.0 };
    Ok(OlsFit { intercept, coefficients: coef.iter().skip(icpt).copied().collect(), rss })
}

/// Full-model residual variance `RSS / (n - d - 1)`.
pub fn sigma_tilde(design: &DesignMatrix, y: &[f64]) -> Result<f64> {
    let (n, d) = (design.nrows(), design.ncols());
    if n <= d + 1 {
        return Err(Error::InvalidInput(format!(
            "full-model variance needs n > d + 1 (n = {n}, d = {d})"
        )));
    }
    let all: Vec<usize> = (0..d).collect();
    let fit = ols_refit(design, &all, y)?;
    Ok(fit.rss / (n - d - 1) as f64)
}
