use crate::error::{GeomError, Result};
use crate::loss::{LossModel, ProperLoss};

use super::{argmin_weights, fmt_num, outside_cone, require_dim};

/// Parameter `a ∈ [−∞, 1] \ {0}` of the concave-norm family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CnormParam {
    NegInf,
    Finite(f64),
}

impl CnormParam {
    pub fn new(a: f64) -> Result<Self> {
        if a == f64::NEG_INFINITY {
            return Ok(CnormParam::NegInf);
        }
        if !a.is_finite() || a > 1.0 || a == 0.0 {
            return Err(GeomError::InvalidParameter(format!(
                "cnorm parameter a must lie in [-inf, 1] without 0, got {a}"
            )));
        }
        Ok(CnormParam::Finite(a))
    }

    pub fn value(self) -> f64 {
        match self {
            CnormParam::NegInf => f64::NEG_INFINITY,
            CnormParam::Finite(a) => a,
        }
    }

    /// Exponent `b = a/(a − 1)` of the Bayes risk `β_b`.
    pub fn exponent(self) -> f64 {
        match self {
            CnormParam::NegInf => 1.0,
            CnormParam::Finite(a) if a == 1.0 => f64::NEG_INFINITY,
            CnormParam::Finite(a) => a / (a - 1.0),
        }
    }

    /// Parameter of the antipolar loss: `a ↦ a/(a − 1)`.
    pub fn dual(self) -> Self {
        match self.exponent() {
            b if b == f64::NEG_INFINITY => CnormParam::NegInf,
            b => CnormParam::Finite(b),
        }
    }
}

/// Concave norm `β_b(p) = (Σ p_i^b)^{1/b}` for `b ∈ [−∞, 1] \ {0}`;
/// `b = −∞` is `min_i p_i`. Zero whenever `b < 0` and some `p_i = 0`.
pub fn beta(b: f64, p: &[f64]) -> f64 {
    if outside_cone(p) {
        return f64::NEG_INFINITY;
    }
    if b == 1.0 {
        return p.iter().sum();
    }
    if b == f64::NEG_INFINITY {
        return p.iter().cloned().fold(f64::INFINITY, f64::min);
    }
    let m = if b > 0.0 {
        p.iter().cloned().fold(0.0, f64::max)
    } else {
        p.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = p.iter().map(|&v| (v / m).powf(b)).sum();
    m * s.powf(1.0 / b)
}

/// Concave-norm loss `l_a(p) = (p/β_b(p))^{b−1}` with Bayes risk `β_b`,
/// `b = a/(a−1)`. `a = −∞` is the constant loss and `a = 1` the min loss.
pub fn cnorm_loss(a: CnormParam, n: usize) -> Result<ProperLoss> {
    require_dim(n)?;
    let a = CnormParam::new(a.value())?;
    Ok(ProperLoss::from_model(Cnorm { a, n }))
}

/// The loss of the Bayes risk `min_i p_i`: unit mass split over the argmin.
/// For two outcomes it coincides with the 0/1 loss.
pub fn min_loss(n: usize) -> Result<ProperLoss> {
    cnorm_loss(CnormParam::Finite(1.0), n)
}

struct Cnorm {
    a: CnormParam,
    n: usize,
}

impl LossModel for Cnorm {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        format!("cnorm:a={};n={}", fmt_num(self.a.value()), self.n)
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        beta(self.a.exponent(), p)
    }

    fn loss(&self, p: &[f64]) -> Vec<f64> {
        let b = self.a.exponent();
        if b == 1.0 {
            return vec![1.0; self.n];
        }
        if b == f64::NEG_INFINITY {
            return argmin_weights(p);
        }
        let zeros = p.iter().filter(|&&v| v == 0.0).count();
        if b < 0.0 && zeros > 0 {
            let w = (zeros as f64).powf((1.0 - b) / b);
            return p.iter().map(|&v| if v == 0.0 { w } else { 0.0 }).collect();
        }
        let r = beta(b, p);
        p.iter()
            .map(|&v| if v == 0.0 { f64::INFINITY } else { (v / r).powf(b - 1.0) })
            .collect()
    }

    fn antipolar_hint(&self) -> Option<ProperLoss> {
        Some(ProperLoss::from_model(Cnorm {
            a: self.a.dual(),
            n: self.n,
        }))
    }

    fn strictly_proper(&self) -> bool {
        let b = self.a.exponent();
        b != 1.0 && b != f64::NEG_INFINITY
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
    fn a_minus_one_at_uniform() {
        let l = cnorm_loss(CnormParam::new(-1.0).unwrap(), 2).unwrap();
        let p = pv(&[0.5, 0.5]);
        assert!((l.bayes_risk(&p).unwrap() - 2.0).abs() < 1e-14);
        let v = l.loss(&p).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-14 && (v[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn limits() {
        let c = cnorm_loss(CnormParam::NegInf, 3).unwrap();
        assert_eq!(c.loss(&pv(&[0.2, 0.3, 0.5])).unwrap().as_slice(), &[1.0, 1.0, 1.0]);
        let m = min_loss(2).unwrap();
        assert_eq!(m.loss(&pv(&[0.7, 0.3])).unwrap().as_slice(), &[0.0, 1.0]);
        assert!((m.bayes_risk(&pv(&[0.7, 0.3])).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn forbidden_parameters() {
        assert!(CnormParam::new(0.0).is_err());
        assert!(CnormParam::new(1.5).is_err());
        assert!(CnormParam::new(f64::NAN).is_err());
        assert!(CnormParam::new(f64::INFINITY).is_err());
    }

    #[test]
    fn dual_pairs() {
        let cases = [(0.75, -3.0), (-3.0, 0.75), (0.5, -1.0), (-1.0, 0.5)];
        for (a, b) in cases {
            assert_eq!(CnormParam::Finite(a).dual(), CnormParam::Finite(b));
        }
        assert_eq!(CnormParam::NegInf.dual(), CnormParam::Finite(1.0));
        assert_eq!(CnormParam::Finite(1.0).dual(), CnormParam::NegInf);
    }

    #[test]
    fn beta_matches_direct_sum() {
        let p = [0.2, 0.3, 0.5];
        for a in [-3.0, -1.0, 0.5, 0.75] {
            let b: f64 = a / (a - 1.0);
            let direct = p.iter().map(|v: &f64| v.powf(b)).sum::<f64>().powf(1.0 / b);
            assert!((beta(b, &p) - direct).abs() < 1e-13, "a={a}");
        }
    }

    #[test]
    fn boundary_loss_is_limit() {
        let l = cnorm_loss(CnormParam::new(0.5).unwrap(), 3).unwrap();
        let at = l.loss_raw(&[0.0, 0.0, 1.0]);
        let near = l.loss_raw(&[1e-9, 1e-9, 1.0]);
        for i in 0..3 {
            assert!((at[i] - near[i]).abs() < 1e-6, "{at:?} vs {near:?}");
        }
    }
}
