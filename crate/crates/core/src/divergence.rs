//! Regret, Bregman divergences, the anti semi inner product and binary
//! weight functions.

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::loss::ProperLoss;
use crate::vector::{dot, PosVector};

/// Default step of [`weight_function`].
pub const WEIGHT_STEP: f64 = 1e-4;

/// `B(p, q) = ⟨l(q) − l(p), p⟩ = L(p, q) − ρ(p)`, with `0·∞ = 0`.
pub fn bregman(loss: &ProperLoss, p: &PosVector, q: &PosVector) -> Result<f64> {
    loss.check_dim(p.dim())?;
    loss.check_dim(q.dim())?;
    let lp = loss.loss(p)?;
    let lq = loss.loss(q)?;
    Ok(p.as_slice()
        .iter()
        .zip(lq.as_slice().iter().zip(lp.as_slice()))
        .map(|(&w, (&a, &b))| if w == 0.0 || a == b { 0.0 } else { w * (a - b) })
        .sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct RegretReport {
    pub p: PosVector,
    pub q: PosVector,
    /// `L(p, q) − ρ(p)`.
    pub regret: f64,
    pub bregman: f64,
    pub discrepancy: f64,
}

pub fn regret_report(loss: &ProperLoss, p: &PosVector, q: &PosVector) -> Result<RegretReport> {
    let b = bregman(loss, p, q)?;
    let regret = loss.conditional_risk(p, q)? - loss.bayes_risk(p)?;
    Ok(RegretReport {
        p: p.clone(),
        q: q.clone(),
        regret,
        bregman: b,
        discrepancy: (regret - b).abs(),
    })
}

/// Anti semi inner product `[y, x]^∧ = ρ(x)·⟨l(x), y⟩`.
pub fn anti_sip(loss: &ProperLoss, y: &PosVector, x: &PosVector) -> Result<f64> {
    loss.check_dim(y.dim())?;
    let r = loss.bayes_risk(x)?;
    let lx = loss.loss(x)?;
    Ok(r * dot(lx.as_slice(), y.as_slice()))
}

/// Weight function `w(t) = −d²/dt² ρ(t, 1 − t)` of a binary loss, by a
/// central second difference with one Richardson extrapolation.
pub fn weight_function(loss: &ProperLoss, p1: f64, h: Option<f64>) -> Result<f64> {
    if loss.dim() != 2 {
        return Err(GeomError::DimensionMismatch {
            expected: 2,
            got: loss.dim(),
        });
    }
    let h = h.unwrap_or(WEIGHT_STEP);
    if !(h > 0.0) {
        return Err(GeomError::InvalidParameter(format!("step must be positive, got {h}")));
    }
    if !(p1 - 2.0 * h > 0.0 && p1 + 2.0 * h < 1.0) {
        return Err(GeomError::InvalidParameter(format!(
            "p1 = {p1} is within {} of the simplex boundary",
            2.0 * h
        )));
    }
    let f = |t: f64| loss.risk_raw(&[t, 1.0 - t]);
    let f0 = f(p1);
    let second = |s: f64| (f(p1 + s) - 2.0 * f0 + f(p1 - s)) / (s * s);
    let d1 = second(h);
    let d2 = second(2.0 * h);
    let w = -(4.0 * d1 - d2) / 3.0;
    if !w.is_finite() {
        return Err(GeomError::NonFiniteRisk);
    }
    Ok(w)
}
