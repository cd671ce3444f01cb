use nalgebra::{DMatrix, DVector};
use penreg::generators::{draw_poisson, realization_rng};
use penreg::glm::*;
use penreg::loss::{glm_kl_loss, kl_loss};
use penreg::{DesignMatrix, GlmFamily, PenaltyKind};
use rand::Rng;
use rand_distr::StandardNormal;

fn poisson_instance(seed: u64, n: usize, d: usize) -> (DesignMatrix, Vec<f64>) {
    let mut rng = realization_rng(seed, 0);
    let x = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mu: Vec<f64> = (0..n).map(|i| (0.5 + 0.4 * x[(i, 0)] - 0.3 * x[(i, d - 1)]).exp()).collect();
    let y = draw_poisson(&mu, &mut rng);
    (DesignMatrix::new(x, true).unwrap(), y)
}

/// Plain Newton-Raphson on the unpenalized Poisson likelihood with an
/// explicit intercept column.
fn newton_mle(x: &DMatrix<f64>, y: &[f64]) -> DVector<f64> {
    let (n, d) = x.shape();
    let a = DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let yv = DVector::from_column_slice(y);
    let mut beta = DVector::zeros(d + 1);
    beta[0] = (y.iter().sum::<f64>() / n as f64).ln();
    for _ in 0..100 {
        let mu = (&a * &beta).map(f64::exp);
        let score = a.tr_mul(&(&yv - &mu));
        let w = DMatrix::from_diagonal(&mu);
        let info = a.tr_mul(&(w * &a));
        let step = info.cholesky().unwrap().solve(&score);
        beta += &step;
        if step.amax() < 1e-14 {
            break;
        }
    }
    beta
}

#[test]
fn unpenalized_poisson_matches_newton() {
    for seed in 0..5 {
        let (des, y) = poisson_instance(seed, 30, 2);
        let oracle = newton_mle(des.values(), &y);
        let fit = glm_fit_path(&des, &y, GlmFamily::Poisson, PenaltyKind::L1, &[0.0]).unwrap();
        for j in 0..3 {
            assert!((fit.coefficients[(0, j)] - oracle[j]).abs() < 1e-5, "seed {seed} j {j}");
        }
    }
}

#[test]
fn logit_single_binary_predictor_is_log_odds() {
    // 2×2 table: x=0 has 6 ones of 10, x=1 has 3 ones of 12
    let mut x = vec![0.0; 10];
    x.extend(vec![1.0; 12]);
    let mut y = vec![1.0; 6];
    y.extend(vec![0.0; 4]);
    y.extend(vec![1.0; 3]);
    y.extend(vec![0.0; 9]);
    let des = DesignMatrix::new(DMatrix::from_column_slice(22, 1, &x), true).unwrap();
    let fit = glm_fit_path(&des, &y, GlmFamily::BernoulliLogit, PenaltyKind::L1, &[0.0]).unwrap();
    let b0 = (6.0f64 / 4.0).ln();
    let b1 = (3.0f64 / 9.0).ln() - b0;
    assert!((fit.coefficients[(0, 0)] - b0).abs() < 1e-6);
    assert!((fit.coefficients[(0, 1)] - b1).abs() < 1e-6);
}

#[test]
fn lambda_max_gives_intercept_only() {
    for seed in 0..5 {
        let (des, y) = poisson_instance(10 + seed, 50, 4);
        let grid = glm_lambda_grid(&des, &y, GlmFamily::Poisson, 30).unwrap();
        let fit = glm_fit_path(&des, &y, GlmFamily::Poisson, PenaltyKind::L1, &grid).unwrap();
        assert_eq!(fit.df[0], 1);
        let ybar = y.iter().sum::<f64>() / 50.0;
        assert!((fit.coefficients[(0, 0)].exp() - ybar).abs() < 1e-8, "{} vs {ybar}", fit.coefficients[(0, 0)].exp());
        assert_eq!(fit.monotonicity_violations, 0);
        assert!(fit.df.last().copied().unwrap() >= 3);
    }
}

#[test]
fn scad_glm_path_runs() {
    let (des, y) = poisson_instance(77, 60, 3);
    let grid = glm_lambda_grid(&des, &y, GlmFamily::Poisson, 40).unwrap();
    let fit = glm_fit_path(&des, &y, GlmFamily::Poisson, PenaltyKind::scad(3.7).unwrap(), &grid).unwrap();
    assert_eq!(fit.len(), 40);
    assert!(fit.objective.iter().all(|o| o.is_finite()));
}

#[test]
fn pseudo_true_fixed_point_residual() {
    let n = 10;
    let x = DMatrix::from_fn(n, 2, |i, j| ((i + 1) as f64 * (j + 1) as f64 * 0.7).sin());
    let des = DesignMatrix::new(x, true).unwrap();
    // misspecified: mean not log-linear in the columns
    let mu: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 / 3.0).powi(2)).collect();
    let theta = pseudo_true_theta(&des, &mu, GlmFamily::Poisson, &[0, 1]).unwrap();
    let r: Vec<f64> = mu.iter().zip(theta.iter()).map(|(m, t)| m - t.exp()).collect();
    let r = DVector::from_vec(r);
    let mut score = vec![r.sum()];
    for j in 0..2 {
        score.push(des.values().column(j).dot(&r));
    }
    assert!(DVector::from_vec(score).norm() < 1e-8);
}

#[test]
fn kl_loss_at_pseudo_true_shrinks_with_n() {
    // the minimal attainable KL loss for a fixed trig model is positive and
    // the fitted loss of the largest model decreases as n grows
    let mut prev = f64::INFINITY;
    for n in [100, 200, 400] {
        let des = penreg::generators::trig_design(n, 10).unwrap();
        let theta0 = penreg::generators::poisson_theta(n);
        let mu: Vec<f64> = theta0.iter().map(|t| t.exp()).collect();
        let all: Vec<usize> = (0..10).collect();
        let star = pseudo_true_theta(&des, &mu, GlmFamily::Poisson, &all).unwrap();
        let loss = kl_loss(&mu, &theta0, star.as_slice(), &GlmFamily::Poisson);
        assert!(loss > 0.0 && loss.is_finite());
        assert!(loss <= prev + 1e-12, "n={n}: {loss} vs {prev}");
        prev = loss;
        assert_eq!(glm_kl_loss(&mu, &theta0, &theta0, GlmFamily::Poisson), 0.0);
    }
}
