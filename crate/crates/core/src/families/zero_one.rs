use crate::error::Result;
use crate::loss::{LossModel, ProperLoss};

use super::{argmax_weights, constant_loss, outside_cone, require_dim};

/// Misclassification loss with tie splitting:
/// `l(p)_y = 1 − [p_y = max]/|argmax|`, Bayes risk `‖p‖₁ − max_y p_y`.
pub fn zero_one_loss(n: usize) -> Result<ProperLoss> {
    require_dim(n)?;
    Ok(ProperLoss::from_model(ZeroOne { n }))
}

pub(crate) struct ZeroOne {
    pub(crate) n: usize,
}

impl LossModel for ZeroOne {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        format!("zeroone:n={}", self.n)
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        if outside_cone(p) {
            return f64::NEG_INFINITY;
        }
        let s: f64 = p.iter().sum();
        let m = p.iter().cloned().fold(0.0, f64::max);
        s - m
    }

    fn loss(&self, p: &[f64]) -> Vec<f64> {
        argmax_weights(p).into_iter().map(|w| 1.0 - w).collect()
    }

    /// Only for two outcomes is the antipolar Bayes risk the plain sum; the
    /// constant loss is returned as the canonical selection there.
    fn antipolar_hint(&self) -> Option<ProperLoss> {
        if self.n == 2 {
            constant_loss(2).ok()
        } else {
            None
        }
    }

    fn strictly_proper(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::PosVector;

    fn pv(v: &[f64]) -> PosVector {
        PosVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn misclassification_rows() {
        let l = zero_one_loss(2).unwrap();
        assert_eq!(l.loss(&pv(&[0.7, 0.3])).unwrap().as_slice(), &[0.0, 1.0]);
        assert!((l.bayes_risk(&pv(&[0.7, 0.3])).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(l.loss(&pv(&[0.5, 0.5])).unwrap().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn three_way_tie() {
        let l = zero_one_loss(3).unwrap();
        let third = 1.0 / 3.0;
        let v = l.loss(&pv(&[third, third, third])).unwrap();
        for &x in v.as_slice() {
            assert!((x - 2.0 / 3.0).abs() < 1e-15);
        }
        assert!((l.bayes_risk(&pv(&[third, third, third])).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn near_tie_within_tolerance_splits() {
        let l = zero_one_loss(2).unwrap();
        let v = l.loss(&pv(&[0.5 + 1e-14, 0.5 - 1e-14])).unwrap();
        assert_eq!(v.as_slice(), &[0.5, 0.5]);
        let v = l.loss(&pv(&[0.5 + 1e-9, 0.5 - 1e-9])).unwrap();
        assert_eq!(v.as_slice(), &[0.0, 1.0]);
    }
}
