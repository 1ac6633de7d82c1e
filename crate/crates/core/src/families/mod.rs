//! Closed-form loss families. Each one is a [`ProperLoss`] with an analytic
//! Bayes risk and loss map, evaluated on arbitrary nonnegative points through
//! their homogeneous extensions.

mod brier;
mod cnorm;
mod cobb_douglas;
mod constant;
mod log;
mod norm_loss;
mod zero_one;

pub use brier::{brier_antipolar_binary, brier_loss, BrierAntipolar2};
pub use cnorm::{beta, cnorm_loss, min_loss, CnormParam};
pub use cobb_douglas::{cobb_douglas_loss, psi, CobbDouglas};
pub use constant::constant_loss;
pub use log::{log_antipolar, log_loss};
pub use norm_loss::{norm_loss, NormAlpha};
pub use zero_one::zero_one_loss;

use crate::error::{GeomError, Result};

/// Two entries of a normalized direction closer than this are a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Family tag and parameters, as accepted by the spec mini-language.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyParam {
    Log { n: usize },
    Brier { n: usize },
    ZeroOne { n: usize },
    Cnorm { a: CnormParam, n: usize },
    CobbDouglas { a: Vec<f64>, scale: f64 },
    NormLoss { alpha: NormAlpha, n: usize },
    Constant { n: usize },
}

impl FamilyParam {
    pub fn build(&self) -> Result<crate::loss::ProperLoss> {
        match self {
            FamilyParam::Log { n } => log_loss(*n),
            FamilyParam::Brier { n } => brier_loss(*n),
            FamilyParam::ZeroOne { n } => zero_one_loss(*n),
            FamilyParam::Cnorm { a, n } => cnorm_loss(*a, *n),
            FamilyParam::CobbDouglas { a, scale } => {
                CobbDouglas::new(a.clone(), *scale).map(crate::loss::ProperLoss::from_model)
            }
            FamilyParam::NormLoss { alpha, n } => norm_loss(*alpha, *n),
            FamilyParam::Constant { n } => constant_loss(*n),
        }
    }
}

pub(crate) fn require_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(GeomError::DimensionTooSmall(n));
    }
    Ok(())
}

/// `true` if some entry is negative or NaN; Bayes risks are `-inf` there.
pub(crate) fn outside_cone(p: &[f64]) -> bool {
    p.iter().any(|v| v.is_nan() || *v < 0.0)
}

/// Indicator weights `1/|argmax|` on the (tolerance-)maximal entries of a
/// direction.
pub(crate) fn argmax_weights(p: &[f64]) -> Vec<f64> {
    extreme_weights(p, true)
}

pub(crate) fn argmin_weights(p: &[f64]) -> Vec<f64> {
    extreme_weights(p, false)
}

fn extreme_weights(p: &[f64], max: bool) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    let q: Vec<f64> = p.iter().map(|v| v / s).collect();
    let best = if max {
        q.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    } else {
        q.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let hits: Vec<bool> = q.iter().map(|v| (v - best).abs() <= TIE_TOLERANCE).collect();
    let k = hits.iter().filter(|h| **h).count() as f64;
    hits.iter().map(|&h| if h { 1.0 / k } else { 0.0 }).collect()
}

pub(crate) fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}
