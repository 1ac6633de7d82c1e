//! Finite-difference supergradients of 1-homogeneous Bayes risks.

use crate::error::{GeomError, Result};
use crate::loss::BayesRisk;
use crate::vector::{dot, LossVector, PosVector};

/// Relative step of the central differences.
pub const SUPERGRADIENT_STEP: f64 = 1e-6;

/// Central-difference supergradient of `rho` at `p`, repaired with Euler's
/// identity so that `⟨g, p⟩ = rho(p)` holds exactly, then clamped to `≥ 0`.
///
/// At kinks the returned vector is one representative of the
/// superdifferential (the average of one-sided slopes per coordinate); which
/// one is not prescribed.
pub fn numeric_supergradient(rho: &dyn BayesRisk, p: &PosVector, h: Option<f64>) -> Result<LossVector> {
    if p.dim() != rho.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: rho.dim(),
            got: p.dim(),
        });
    }
    p.require_strictly_positive()?;
    let g = supergradient_with_step(rho, p.as_slice(), h)?;
    Ok(LossVector::from_raw(g))
}

pub(crate) fn supergradient_raw(rho: &dyn BayesRisk, p: &[f64]) -> Result<Vec<f64>> {
    supergradient_with_step(rho, p, None)
}

fn supergradient_with_step(rho: &dyn BayesRisk, p: &[f64], h: Option<f64>) -> Result<Vec<f64>> {
    let sup = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = h.unwrap_or(SUPERGRADIENT_STEP * sup.max(1.0));
    let center = rho.eval(p);
    if !center.is_finite() {
        return Err(GeomError::NonFiniteRisk);
    }
    let mut x = p.to_vec();
    let mut g = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        x[i] = p[i] + h;
        let up = rho.eval(&x);
        x[i] = p[i] - h;
        let down = rho.eval(&x);
        x[i] = p[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(GeomError::NonFiniteRisk);
        }
        g.push((up - down) / (2.0 * h));
    }
    let gp = dot(&g, p);
    if !(gp > 0.0) {
        return Err(GeomError::DegenerateSupergradient(gp));
    }
    let scale = center / gp;
    for v in g.iter_mut() {
        *v = (*v * scale).max(0.0);
    }
    Ok(g)
}
