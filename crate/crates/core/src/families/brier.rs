use crate::error::{GeomError, Result};
use crate::loss::{LossModel, ProperLoss};

use super::{outside_cone, require_dim};

/// Brier loss `l(p) = (1 + ‖p‖₂²/‖p‖₁²)·1 − 2p/‖p‖₁`,
/// Bayes risk `‖p‖₁ − ‖p‖₂²/‖p‖₁`.
pub fn brier_loss(n: usize) -> Result<ProperLoss> {
    require_dim(n)?;
    Ok(ProperLoss::from_model(Brier { n }))
}

/// Closed-form antipolar of the binary Brier loss.
pub fn brier_antipolar_binary() -> ProperLoss {
    ProperLoss::from_model(BrierAntipolar2)
}

struct Brier {
    n: usize,
}

impl LossModel for Brier {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        format!("brier:n={}", self.n)
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        if outside_cone(p) {
            return f64::NEG_INFINITY;
        }
        let s: f64 = p.iter().sum();
        if s == 0.0 {
            return 0.0;
        }
        s - p.iter().map(|v| v * v).sum::<f64>() / s
    }

    fn loss(&self, p: &[f64]) -> Vec<f64> {
        let s: f64 = p.iter().sum();
        let q: Vec<f64> = p.iter().map(|v| v / s).collect();
        let sq: f64 = q.iter().map(|v| v * v).sum();
        q.iter().map(|v| ((1.0 + sq) - 2.0 * v).max(0.0)).collect()
    }

    fn antipolar_hint(&self) -> Option<ProperLoss> {
        (self.n == 2).then(brier_antipolar_binary)
    }
}

/// Antipolar Bayes risk of the binary Brier loss on the simplex,
/// `f(t) = ½ + √(t(1−t))`.
///
/// This is the quotient `(2t−1)²√(t(1−t)) / (4t² + 2√(t(1−t)) − 4t)` with
/// the common factor cancelled: writing `u = 2t − 1` the denominator is
/// `2s(1 − 2s)` with `s = √(1−u²)/2` and `1 − 2s = u²/(1 + 2s)`. The
/// cancelled form has no removable singularities at `t ∈ {0, ½, 1}`.
pub fn brier_antipolar_value(t: f64) -> f64 {
    0.5 + (t * (1.0 - t)).max(0.0).sqrt()
}

/// Homogeneous extension `ρ^∧(x) = ‖x‖₁/2 + √(x₁x₂)` and its gradient.
pub struct BrierAntipolar2;

impl LossModel for BrierAntipolar2 {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> String {
        "antipolar:base=[brier:n=2]".to_string()
    }

    fn bayes_risk(&self, x: &[f64]) -> f64 {
        if outside_cone(x) {
            return f64::NEG_INFINITY;
        }
        0.5 * (x[0] + x[1]) + (x[0] * x[1]).sqrt()
    }

    fn loss(&self, x: &[f64]) -> Vec<f64> {
        let partial = |num: f64, den: f64| {
            if den == 0.0 {
                if num == 0.0 {
                    0.5
                } else {
                    f64::INFINITY
                }
            } else {
                0.5 + 0.5 * (num / den).sqrt()
            }
        };
        vec![partial(x[1], x[0]), partial(x[0], x[1])]
    }

    fn antipolar_hint(&self) -> Option<ProperLoss> {
        Some(ProperLoss::from_model(Brier { n: 2 }))
    }
}

impl BrierAntipolar2 {
    pub fn on_simplex(t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GeomError::InvalidParameter(format!("t = {t} outside [0, 1]")));
        }
        Ok(brier_antipolar_value(t))
    }
}
