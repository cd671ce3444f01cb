//! Oracle losses against the true mean and the loss-efficiency ratio.

use nalgebra::DVector;

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::glm::{Cumulant, GlmFamily, POISSON_THETA_BOUND};

/// `‖μ - μ̂‖² / n`.
pub fn l2_loss(mu: &[f64], mu_hat: &[f64]) -> f64 {
    assert_eq!(mu.len(), mu_hat.len(), "mean vectors differ in length");
    mu.iter().zip(mu_hat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / mu.len() as f64
}

/// Twice the average Kullback-Leibler loss,
/// `(2/n) Σ [μ_i (θ₀ᵢ - θ̂ᵢ) + b(θ̂ᵢ) - b(θ₀ᵢ)]`.
///
/// `mu` must equal `b'(theta0)`.
pub fn kl_loss<F: Cumulant>(mu: &[f64], theta0: &[f64], theta_hat: &[f64], family: &F) -> f64 {
    assert!(mu.len() == theta0.len() && mu.len() == theta_hat.len(), "length mismatch");
    let n = mu.len() as f64;
    let mut acc = 0.0;
    for ((m, t0), t) in mu.iter().zip(theta0).zip(theta_hat) {
        debug_assert!((family.b_prime(*t0) - m).abs() <= 1e-10 * m.abs().max(1.0));
        acc += m * (t0 - t) + family.b(*t) - family.b(*t0);
    }
    // rounding can leave a tiny negative residue when θ̂ = θ₀
    (2.0 * acc / n).max(0.0)
}

/// [`kl_loss`] for a fitted GLM, returning `+∞` when the fit left the
/// Poisson linear-predictor bound.
pub fn glm_kl_loss(mu: &[f64], theta0: &[f64], theta_hat: &[f64], family: GlmFamily) -> f64 {
    if family == GlmFamily::Poisson && theta_hat.iter().any(|t| t.abs() > POISSON_THETA_BOUND) {
        return f64::INFINITY;
    }
    kl_loss(mu, theta0, theta_hat, &family)
}

/// L2 loss of `intercept + X_new β` against `mu_new` on hold-out rows.
pub fn holdout_l2_loss(design_new: &DesignMatrix, intercept: f64, beta: &[f64], mu_new: &[f64]) -> f64 {
    let pred = design_new.predict(intercept, beta);
    l2_loss(mu_new, pred.as_slice())
}

/// `losses[selected] / min(losses)`. A zero minimum gives 1 when the selected
/// loss is also zero and `+∞` otherwise.
pub fn efficiency(losses: &[f64], selected: usize) -> Result<f64> {
    let sel = *losses
        .get(selected)
        .ok_or_else(|| Error::InvalidInput(format!("selected index {selected} out of range")))?;
    let min = min_finite(losses).ok_or(Error::NoAdmissibleLambda)?.1;
    if min == 0.0 {
        return Ok(if sel == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Ok(sel / min)
}

/// Index and value of the smallest loss; ties resolve to the smallest index.
pub fn min_finite(losses: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &l) in losses.iter().enumerate() {
        if l.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if l >= b => {}
            _ => best = Some((i, l)),
        }
    }
    best.filter(|(_, v)| v.is_finite())
}

/// Per-λ losses for one realization and the oracle point.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub losses: Vec<f64>,
    pub oracle_index: usize,
    pub min_loss: f64,
}

impl LossReport {
    pub fn new(losses: Vec<f64>) -> Result<Self> {
        let (oracle_index, min_loss) = min_finite(&losses).ok_or(Error::NoAdmissibleLambda)?;
        Ok(LossReport { losses, oracle_index, min_loss })
    }

    pub fn selected_loss(&self, index: usize) -> f64 {
        self.losses[index]
    }

    pub fn efficiency(&self, index: usize) -> f64 {
        efficiency(&self.losses, index).expect("index within the loss curve")
    }
}

/// L2 loss curve of a fitted Gaussian path against `mu` on the fitting rows.
pub fn gaussian_loss_curve(design: &DesignMatrix, fit: &crate::linear::PathFit, mu: &[f64]) -> Vec<f64> {
    (0..fit.len()).map(|g| l2_loss(mu, fit.fitted(design, g).as_slice())).collect()
}

/// KL loss curve of a fitted GLM path.
pub fn glm_loss_curve(
    design: &DesignMatrix,
    fit: &crate::glm::GlmPathFit,
    mu: &[f64],
    theta0: &[f64],
    family: GlmFamily,
) -> Vec<f64> {
    (0..fit.len())
        .map(|g| {
            let theta: DVector<f64> = fit.theta(design, g);
            glm_kl_loss(mu, theta0, theta.as_slice(), family)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn l2_examples() {
        assert_eq!(l2_loss(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(l2_loss(&[1.0, 1.0], &[0.0, 0.0]), 1.0);
        assert_eq!(l2_loss(&[3.0, -3.0], &[0.0, 0.0]), 9.0);
    }

    #[test]
    fn kl_examples() {
        let p = GlmFamily::Poisson;
        assert_eq!(kl_loss(&[2.0f64.exp()], &[2.0], &[2.0], &p), 0.0);
        let e = 1f64.exp();
        assert!((kl_loss(&[e], &[1.0], &[0.0], &p) - 2.0).abs() < 1e-12);
        let got = kl_loss(&[1.0], &[0.0], &[2f64.ln()], &p);
        assert!((got - 2.0 * (1.0 - 2f64.ln())).abs() < 1e-12);
        assert!((got - 0.613706).abs() < 1e-6);
    }

    #[test]
    fn kl_clamp_gives_infinity() {
        let p = GlmFamily::Poisson;
        assert_eq!(glm_kl_loss(&[1.0], &[0.0], &[31.0], p), f64::INFINITY);
    }

    #[test]
    fn holdout_examples() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let d = DesignMatrix::new(x, true).unwrap();
        let mu = [2.0, -1.0, 3.0];
        let zero = holdout_l2_loss(&d, 0.0, &[0.0, 0.0], &mu);
        assert!((zero - 14.0 / 3.0).abs() < 1e-12);
        let beta = [0.5, 2.0];
        let exact = d.predict(0.3, &beta);
        assert_eq!(holdout_l2_loss(&d, 0.3, &beta, exact.as_slice()), 0.0);
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(efficiency(&[4.0, 2.0, 8.0], 0).unwrap(), 2.0);
        assert_eq!(efficiency(&[4.0, 2.0, 8.0], 1).unwrap(), 1.0);
        assert_eq!(efficiency(&[3.0, 3.0, 3.0], 2).unwrap(), 1.0);
        assert_eq!(efficiency(&[0.0, 1.0], 0).unwrap(), 1.0);
        assert_eq!(efficiency(&[0.0, 1.0], 1).unwrap(), f64::INFINITY);
        assert!(efficiency(&[1.0], 3).is_err());
    }

    #[test]
    fn report_picks_first_minimum() {
        let r = LossReport::new(vec![3.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(r.oracle_index, 1);
        assert_eq!(r.min_loss, 1.0);
        assert!(LossReport::new(vec![f64::INFINITY; 3]).is_err());
    }
}
