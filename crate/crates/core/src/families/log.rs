use crate::error::Result;
use crate::loss::{LossModel, ProperLoss};

use super::{outside_cone, require_dim};

/// Log loss `l(p)_y = -ln(p_y / ‖p‖₁)` with Bayes risk `‖p‖₁ · H(p/‖p‖₁)`.
pub fn log_loss(n: usize) -> Result<ProperLoss> {
    require_dim(n)?;
    Ok(ProperLoss::from_model(LogLoss { n }))
}

/// Closed-form antipolar of the log loss.
pub fn log_antipolar(n: usize) -> Result<ProperLoss> {
    require_dim(n)?;
    Ok(ProperLoss::from_model(LogAntipolar { n }))
}

struct LogLoss {
    n: usize,
}

impl LossModel for LogLoss {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        format!("log:n={}", self.n)
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        if outside_cone(p) {
            return f64::NEG_INFINITY;
        }
        let s: f64 = p.iter().sum();
        if s == 0.0 {
            return 0.0;
        }
        -p.iter()
            .map(|&v| if v > 0.0 { v * (v / s).ln() } else { 0.0 })
            .sum::<f64>()
    }

    fn loss(&self, p: &[f64]) -> Vec<f64> {
        let s: f64 = p.iter().sum();
        p.iter()
            .map(|&v| if v > 0.0 { -(v / s).ln() } else { f64::INFINITY })
            .collect()
    }

    fn antipolar_hint(&self) -> Option<ProperLoss> {
        Some(ProperLoss::from_model(LogAntipolar { n: self.n }))
    }
}

/// Antipolar of the log loss.
///
/// The antigauge of the log superprediction set at `x` is the `β` with
/// `Σ exp(-x_y/β) = 1`; the boundary point `x/β` is `l(q)` for
/// `q = exp(-x/β)`, and the antipolar loss there is `q / H(q)`.
struct LogAntipolar {
    n: usize,
}

impl LogAntipolar {
    /// Root `u = 1/β` of `Σ exp(-u x_y) = 1`, or `None` when some `x_y = 0`.
    fn rate(x: &[f64]) -> Option<f64> {
        if x.iter().any(|&v| v == 0.0) {
            return None;
        }
        let n = x.len() as f64;
        let lo_x = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi_x = x.iter().cloned().fold(0.0, f64::max);
        let excess = |u: f64| x.iter().map(|&v| (-u * v).exp()).sum::<f64>() - 1.0;
        let mut lo = n.ln() / hi_x;
        let mut hi = n.ln() / lo_x;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

impl LossModel for LogAntipolar {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        format!("antipolar:base=[log:n={}]", self.n)
    }

    fn bayes_risk(&self, x: &[f64]) -> f64 {
        if outside_cone(x) {
            return f64::NEG_INFINITY;
        }
        match Self::rate(x) {
            Some(u) => 1.0 / u,
            None => 0.0,
        }
    }

    fn loss(&self, x: &[f64]) -> Vec<f64> {
        match Self::rate(x) {
            Some(u) => {
                let q: Vec<f64> = x.iter().map(|&v| (-u * v).exp()).collect();
                let qs: f64 = q.iter().sum();
                let q: Vec<f64> = q.iter().map(|v| v / qs).collect();
                let h = -q.iter().map(|&v| v * v.ln()).sum::<f64>();
                q.iter().map(|v| v / h).collect()
            }
            None => {
                let k = x.iter().filter(|&&v| v == 0.0).count();
                if k == 1 {
                    x.iter()
                        .map(|&v| if v == 0.0 { f64::INFINITY } else { 0.0 })
                        .collect()
                } else {
                    let w = 1.0 / (k as f64 * (k as f64).ln());
                    x.iter().map(|&v| if v == 0.0 { w } else { 0.0 }).collect()
                }
            }
        }
    }

    fn antipolar_hint(&self) -> Option<ProperLoss> {
        Some(ProperLoss::from_model(LogLoss { n: self.n }))
    }
}
