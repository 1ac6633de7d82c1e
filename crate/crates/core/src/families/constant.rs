use crate::error::Result;
use crate::loss::{LossModel, ProperLoss};

use super::{min_loss, outside_cone, require_dim};

/// The constant loss `l(p) = 1_n` with Bayes risk `‖p‖₁`.
pub fn constant_loss(n: usize) -> Result<ProperLoss> {
    require_dim(n)?;
    Ok(ProperLoss::from_model(Constant { n }))
}

pub(crate) struct Constant {
    pub(crate) n: usize,
}

impl LossModel for Constant {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        format!("const:n={}", self.n)
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        if outside_cone(p) {
            return f64::NEG_INFINITY;
        }
        p.iter().sum()
    }

    fn loss(&self, _p: &[f64]) -> Vec<f64> {
        vec![1.0; self.n]
    }

    /// `inf_q ⟨x, q⟩ / ‖q‖₁ = min_y x_y`.
    fn antipolar_hint(&self) -> Option<ProperLoss> {
        min_loss(self.n).ok()
    }

    fn strictly_proper(&self) -> bool {
        false
    }
}
