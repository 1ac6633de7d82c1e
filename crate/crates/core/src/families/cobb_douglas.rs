use crate::error::{GeomError, Result};
use crate::loss::{LossModel, ProperLoss};

use super::{fmt_num, outside_cone};

/// Weighted geometric mean `ψ_a(p) = Π p_i^{a_i/‖a‖₁}`.
pub fn psi(a: &[f64], p: &[f64]) -> f64 {
    if outside_cone(p) {
        return f64::NEG_INFINITY;
    }
    if p.iter().any(|&v| v == 0.0) {
        return 0.0;
    }
    let s: f64 = a.iter().sum();
    a.iter().zip(p).map(|(ai, pi)| ai / s * pi.ln()).sum::<f64>().exp()
}

/// Cobb–Douglas loss: Bayes risk `ψ_a` and loss `∇ψ_a(p) = ψ_a(p)·a/(‖a‖₁ p)`.
pub fn cobb_douglas_loss(a: &[f64]) -> Result<ProperLoss> {
    CobbDouglas::new(a.to_vec(), 1.0).map(ProperLoss::from_model)
}

/// `scale · ψ_a`. The antipolar of `ψ_a` is `(‖a‖₁/ψ_a(a))·ψ_a`, so the
/// family is closed under antipolars with the scale inverted.
#[derive(Debug, Clone)]
pub struct CobbDouglas {
    a: Vec<f64>,
    scale: f64,
}

impl CobbDouglas {
    pub fn new(a: Vec<f64>, scale: f64) -> Result<Self> {
        if a.len() < 2 {
            return Err(GeomError::DimensionTooSmall(a.len()));
        }
        if let Some((i, &v)) = a.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(GeomError::NotStrictlyPositive { index: i, value: v });
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(GeomError::InvalidParameter(format!("scale must be positive, got {scale}")));
        }
        Ok(Self { a, scale })
    }

    pub fn weights(&self) -> &[f64] {
        &self.a
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `‖a‖₁ / ψ_a(a)`.
    pub fn self_polar_factor(&self) -> f64 {
        self.a.iter().sum::<f64>() / psi(&self.a, &self.a)
    }
}

impl LossModel for CobbDouglas {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn name(&self) -> String {
        let a: Vec<String> = self.a.iter().map(|v| fmt_num(*v)).collect();
        if self.scale == 1.0 {
            format!("cd:a={}", a.join(","))
        } else {
            format!("cd:a={};scale={}", a.join(","), fmt_num(self.scale))
        }
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        let v = psi(&self.a, p);
        if v == f64::NEG_INFINITY {
            v
        } else {
            self.scale * v
        }
    }

    fn loss(&self, p: &[f64]) -> Vec<f64> {
        let s: f64 = self.a.iter().sum();
        if p.iter().any(|&v| v == 0.0) {
            return p.iter().map(|&v| if v == 0.0 { f64::INFINITY } else { 0.0 }).collect();
        }
        let r = self.scale * psi(&self.a, p) / s;
        self.a.iter().zip(p).map(|(ai, pi)| r * ai / pi).collect()
    }

    fn antipolar_hint(&self) -> Option<ProperLoss> {
        Some(ProperLoss::from_model(CobbDouglas {
            a: self.a.clone(),
            scale: self.self_polar_factor() / self.scale,
        }))
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
    fn boosting_loss_values() {
        let l = cobb_douglas_loss(&[1.0, 1.0]).unwrap();
        let v = l.loss(&pv(&[0.5, 0.5])).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);
        let v = l.loss(&pv(&[0.7, 0.3])).unwrap();
        assert!((v[0] - 0.5 * (3.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert!((v[1] - 0.5 * (7.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn loss_at_weights_is_uniform() {
        let l = cobb_douglas_loss(&[2.0, 1.0]).unwrap();
        let v = l.loss(&pv(&[2.0, 1.0])).unwrap();
        let expect = psi(&[2.0, 1.0], &[2.0, 1.0]) / 3.0;
        assert!((v[0] - expect).abs() < 1e-15 && (v[1] - expect).abs() < 1e-15);
    }

    #[test]
    fn scaled_weight_identity() {
        let a = [2.0, 1.0, 0.5];
        for p in [[0.2, 0.3, 0.5], [0.6, 0.3, 0.1], [1.0, 2.0, 3.0]] {
            let pa: Vec<f64> = p.iter().zip(&a).map(|(x, y)| x / y).collect();
            let lhs = psi(&a, &pa);
            let rhs = psi(&a, &p) / psi(&a, &a);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn antipolar_scale() {
        let cd = CobbDouglas::new(vec![1.0, 1.0], 1.0).unwrap();
        assert!((cd.self_polar_factor() - 2.0).abs() < 1e-15);
        let hint = cd.antipolar_hint().unwrap();
        assert_eq!(hint.name(), "cd:a=1,1;scale=2");
        assert!(CobbDouglas::new(vec![1.0, 0.0], 1.0).is_err());
    }
}
