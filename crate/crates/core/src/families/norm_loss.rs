use crate::error::{GeomError, Result};
use crate::loss::{LossModel, ProperLoss};

use super::{argmax_weights, fmt_num, min_loss, outside_cone, require_dim};

/// Parameter `α ∈ [1, ∞]` of the norm-ball losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormAlpha {
    Inf,
    Finite(f64),
}

impl NormAlpha {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha == f64::INFINITY {
            return Ok(NormAlpha::Inf);
        }
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(GeomError::InvalidParameter(format!(
                "norm loss alpha must lie in [1, inf], got {alpha}"
            )));
        }
        Ok(NormAlpha::Finite(alpha))
    }

    pub fn value(self) -> f64 {
        match self {
            NormAlpha::Inf => f64::INFINITY,
            NormAlpha::Finite(a) => a,
        }
    }
}

/// Loss whose superprediction set is `c·1 − B_α` intersected with the
/// orthant, `c = 1 + n^{−1/α}`:
/// `ρ(p) = c‖p‖₁ − ‖p‖_{α*}`, `l(p)_y = c − (p_y/‖p‖_{α*})^{α*−1}`,
/// `α* = α/(α−1)`. `α = 1` is `0/1 + 1_n/n` and `α = ∞` the constant loss.
pub fn norm_loss(alpha: NormAlpha, n: usize) -> Result<ProperLoss> {
    require_dim(n)?;
    let alpha = NormAlpha::new(alpha.value())?;
    Ok(ProperLoss::from_model(NormLoss { alpha, n }))
}

struct NormLoss {
    alpha: NormAlpha,
    n: usize,
}

impl NormLoss {
    fn offset(&self) -> f64 {
        match self.alpha {
            NormAlpha::Inf => 2.0,
            NormAlpha::Finite(a) => 1.0 + (self.n as f64).powf(-1.0 / a),
        }
    }

    fn conjugate(a: f64) -> f64 {
        a / (a - 1.0)
    }
}

fn pnorm(q: f64, p: &[f64]) -> f64 {
    let m = p.iter().cloned().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    m * p.iter().map(|&v| (v / m).powf(q)).sum::<f64>().powf(1.0 / q)
}

impl LossModel for NormLoss {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        format!("normloss:alpha={};n={}", fmt_num(self.alpha.value()), self.n)
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        if outside_cone(p) {
            return f64::NEG_INFINITY;
        }
        let s: f64 = p.iter().sum();
        match self.alpha {
            NormAlpha::Inf => s,
            NormAlpha::Finite(a) if a == 1.0 => {
                let m = p.iter().cloned().fold(0.0, f64::max);
                s - m + s / self.n as f64
            }
            NormAlpha::Finite(a) => self.offset() * s - pnorm(Self::conjugate(a), p),
        }
    }

    fn loss(&self, p: &[f64]) -> Vec<f64> {
        match self.alpha {
            NormAlpha::Inf => vec![1.0; self.n],
            NormAlpha::Finite(a) if a == 1.0 => {
                let k = 1.0 / self.n as f64;
                argmax_weights(p).into_iter().map(|w| 1.0 - w + k).collect()
            }
            NormAlpha::Finite(a) => {
                let q = Self::conjugate(a);
                let c = self.offset();
                let r = pnorm(q, p);
                p.iter().map(|&v| c - (v / r).powf(q - 1.0)).collect()
            }
        }
    }

    fn antipolar_hint(&self) -> Option<ProperLoss> {
        match self.alpha {
            NormAlpha::Inf => min_loss(self.n).ok(),
            NormAlpha::Finite(_) => None,
        }
    }

    fn strictly_proper(&self) -> bool {
        matches!(self.alpha, NormAlpha::Finite(a) if a > 1.0)
    }
}
