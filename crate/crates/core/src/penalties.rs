//! L1 and SCAD penalties: values, derivatives and the univariate proximal
//! updates used by coordinate descent.
//!
//! Penalties act on the magnitude of a coefficient, `p_λ(|β|)`, and every
//! function here is pure.

use crate::error::{Error, Result};

/// Default SCAD shape parameter.
pub const SCAD_DEFAULT_A: f64 = 3.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyKind {
    L1,
    Scad { a: f64 },
}

impl PenaltyKind {
    /// SCAD penalty with shape `a`; `a` must exceed 2.
    pub fn scad(a: f64) -> Result<Self> {
        if !(a > 2.0) || !a.is_finite() {
            return Err(Error::InvalidScadShape(a));
        }
        Ok(PenaltyKind::Scad { a })
    }

    pub fn is_scad(&self) -> bool {
        matches!(self, PenaltyKind::Scad { .. })
    }

    /// Derivative `p'_λ(β)` for `β ≥ 0`.
    pub fn derivative(&self, lambda: f64, beta: f64) -> f64 {
        penalty_derivative(*self, lambda, beta)
    }

    pub fn value(&self, lambda: f64, beta: f64) -> f64 {
        penalty_value(*self, lambda, beta)
    }
}

/// `p'_λ(β)` for nonnegative `β`.
///
/// SCAD: `λ` on `[0, λ]`, `(aλ - β)₊ / (a - 1)` beyond.
pub fn penalty_derivative(kind: PenaltyKind, lambda: f64, beta: f64) -> f64 {
    match kind {
        PenaltyKind::L1 => lambda,
        PenaltyKind::Scad { a } => {
            if beta <= lambda {
                lambda
            } else {
                (a * lambda - beta).max(0.0) / (a - 1.0)
            }
        }
    }
}

/// `p_λ(|β|)`, with `p_λ(0) = 0`.
pub fn penalty_value(kind: PenaltyKind, lambda: f64, beta: f64) -> f64 {
    let b = beta.abs();
    match kind {
        PenaltyKind::L1 => lambda * b,
        PenaltyKind::Scad { a } => {
            if b <= lambda {
                lambda * b
            } else if b <= a * lambda {
                (2.0 * a * lambda * b - b * b - lambda * lambda) / (2.0 * (a - 1.0))
            } else {
                lambda * lambda * (a + 1.0) / 2.0
            }
        }
    }
}

/// Soft threshold `sign(z) (|z| - t)₊`.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Minimizer of `½(z - β)² + p_λ(|β|)`.
pub fn univariate_update(z: f64, lambda: f64, kind: PenaltyKind) -> f64 {
    match kind {
        PenaltyKind::L1 => soft_threshold(z, lambda),
        PenaltyKind::Scad { a } => {
            let az = z.abs();
            if az <= 2.0 * lambda {
                soft_threshold(z, lambda)
            } else if az <= a * lambda {
                let shrunk = (az - a * lambda / (a - 1.0)).max(0.0) / (1.0 - 1.0 / (a - 1.0));
                shrunk.copysign(z)
            } else {
                z
            }
        }
    }
}

/// Minimizer of `½ v β² - u β + p_λ(|β|)` for curvature `v > 0`.
///
/// With `v = 1` this is [`univariate_update`] at `z = u`. Weighted
/// coordinate descent (IRLS inner loop, unstandardized weights) lands here.
/// When `v ≤ 1/(a-1)` the SCAD subproblem is nonconvex and the global
/// minimizer is found by comparing the stationary point of each region.
pub fn weighted_update(u: f64, v: f64, lambda: f64, kind: PenaltyKind) -> f64 {
    debug_assert!(v > 0.0);
    if v == 1.0 {
        return univariate_update(u, lambda, kind);
    }
    match kind {
        PenaltyKind::L1 => soft_threshold(u, lambda) / v,
        PenaltyKind::Scad { a } => {
            let au = u.abs();
            if v > 1.0 / (a - 1.0) {
                if au <= lambda * (1.0 + v) {
                    soft_threshold(u, lambda) / v
                } else if au <= a * lambda * v {
                    let b = (au - a * lambda / (a - 1.0)) / (v - 1.0 / (a - 1.0));
                    b.copysign(u)
                } else {
                    u / v
                }
            } else {
                scad_weighted_by_regions(u, v, lambda, a)
            }
        }
    }
}

fn scad_weighted_by_regions(u: f64, v: f64, lambda: f64, a: f64) -> f64 {
    let au = u.abs();
    let objective = |b: f64| 0.5 * v * b * b - au * b + penalty_value(PenaltyKind::Scad { a }, lambda, b);
    let mut candidates = vec![0.0, lambda, a * lambda];
    candidates.push(((au - lambda) / v).clamp(0.0, lambda));
    let mid_curv = v - 1.0 / (a - 1.0);
    if mid_curv.abs() > 0.0 {
        let b = (au - a * lambda / (a - 1.0)) / mid_curv;
        candidates.push(b.clamp(lambda, a * lambda));
    }
    candidates.push((au / v).max(a * lambda));
    let mut best = 0.0;
    let mut best_val = objective(0.0);
    for &b in &candidates {
        let val = objective(b);
        if val < best_val {
            best = b;
            best_val = val;
        }
    }
    best.copysign(u)
}

/// Shape parameter `max(3.7, 1 + 1/c*)` that keeps the SCAD least-squares
/// objective convex, where `c*` is the smallest eigenvalue of `XᵀX/n`.
pub fn convex_scad_a(gram_min_eigenvalue: f64) -> Result<f64> {
    if !(gram_min_eigenvalue > 0.0) {
        return Err(Error::RankDeficient(format!(
            "minimum eigenvalue of the Gram matrix is {gram_min_eigenvalue}"
        )));
    }
    Ok(SCAD_DEFAULT_A.max(1.0 + 1.0 / gram_min_eigenvalue))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCAD: PenaltyKind = PenaltyKind::Scad { a: 3.7 };

    #[test]
    fn derivative_examples() {
        assert_eq!(penalty_derivative(SCAD, 1.0, 0.5), 1.0);
        assert_eq!(penalty_derivative(SCAD, 1.0, 5.0), 0.0);
        assert!((penalty_derivative(SCAD, 1.0, 2.0) - 1.7 / 2.7).abs() < 1e-12);
        assert_eq!(penalty_derivative(PenaltyKind::L1, 0.3, 100.0), 0.3);
    }

    #[test]
    fn value_examples() {
        assert_eq!(penalty_value(PenaltyKind::L1, 0.5, -2.0), 1.0);
        assert!((penalty_value(SCAD, 1.0, 10.0) - 2.35).abs() < 1e-12);
        assert_eq!(penalty_value(SCAD, 0.0, 7.0), 0.0);
        assert_eq!(penalty_value(PenaltyKind::L1, 0.0, 7.0), 0.0);
    }

    #[test]
    fn scad_value_matches_integrated_derivative() {
        // trapezoid rule on p'_λ from 0 to 10
        let steps = 200_000;
        let h = 10.0 / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            let b0 = i as f64 * h;
            acc += 0.5 * h * (penalty_derivative(SCAD, 1.0, b0) + penalty_derivative(SCAD, 1.0, b0 + h));
        }
        assert!((acc - 2.35).abs() < 1e-6, "{acc}");
    }

    #[test]
    fn update_examples() {
        assert_eq!(univariate_update(2.0, 0.5, PenaltyKind::L1), 1.5);
        assert_eq!(univariate_update(5.0, 1.0, SCAD), 5.0);
        assert!((univariate_update(3.0, 1.0, SCAD) - 2.588235294117647).abs() < 1e-9);
        assert_eq!(univariate_update(0.9, 1.0, SCAD), 0.0);
        assert_eq!(univariate_update(-1.0, 1.0, SCAD), 0.0);
    }

    #[test]
    fn scad_update_is_continuous_at_kinks() {
        for &a in &[3.7, 5.0, 11.0] {
            let k = PenaltyKind::Scad { a };
            for &z in &[2.0, a] {
                let left = univariate_update(z - 1e-9, 1.0, k);
                let right = univariate_update(z + 1e-9, 1.0, k);
                assert!((left - right).abs() < 1e-6, "a={a} z={z}");
            }
        }
    }

    #[test]
    fn weighted_update_matches_brute_force() {
        for &(u, v) in &[(0.3, 0.2), (2.5, 0.5), (4.0, 0.1), (-3.0, 2.0), (1.3, 0.25)] {
            for &a in &[3.7, 11.0] {
                let k = PenaltyKind::Scad { a };
                let got = weighted_update(u, v, 1.0, k);
                let f = |b: f64| 0.5 * v * b * b - u * b + penalty_value(k, 1.0, b);
                let mut best = (0.0, f(0.0));
                let mut b = -60.0;
                while b <= 60.0 {
                    let val = f(b);
                    if val < best.1 {
                        best = (b, val);
                    }
                    b += 1e-4;
                }
                assert!((f(got) - best.1).abs() < 1e-6, "u={u} v={v} a={a} got={got} best={:?}", best);
            }
        }
    }

    #[test]
    fn convex_a_examples() {
        assert_eq!(convex_scad_a(1.0).unwrap(), 3.7);
        assert!((convex_scad_a(0.1).unwrap() - 11.0).abs() < 1e-12);
        assert!((convex_scad_a(1.0 / 2.7).unwrap() - 3.7).abs() < 1e-12);
        assert!(convex_scad_a(0.0).is_err());
        assert!(convex_scad_a(-1.0).is_err());
    }

    #[test]
    fn scad_construction_rejects_small_a() {
        assert!(PenaltyKind::scad(2.0).is_err());
        assert!(PenaltyKind::scad(1.5).is_err());
        assert!(PenaltyKind::scad(f64::NAN).is_err());
        assert!(PenaltyKind::scad(2.0001).is_ok());
    }
}
