//! Grid verification of the properness inequality
//! `⟨l(q), q⟩ ≤ ⟨l(p), q⟩` for every pair of grid points.

use serde::Serialize;

use crate::grid::SimplexGrid;
use crate::loss::ProperLoss;
use crate::par::{self, Execution};
use crate::vector::{dot, PosVector};

/// Maximum number of failing pairs kept in a report.
const MAX_RECORDED: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    /// Reported distribution (`p`).
    pub predicted: PosVector,
    /// True distribution (`q`).
    pub truth: PosVector,
    pub amount: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropernessReport {
    pub loss: String,
    pub tolerance: f64,
    pub pairs_checked: usize,
    /// Largest `⟨l(q), q⟩ − ⟨l(p), q⟩` over all pairs; `inf` if any value is NaN.
    pub worst_violation: f64,
    pub worst: Option<Violation>,
    pub failures: Vec<Violation>,
    pub failure_count: usize,
}

impl PropernessReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

pub fn check_properness(loss: &ProperLoss, grid: &SimplexGrid, tol: f64) -> PropernessReport {
    check_properness_with(loss, grid.points(), tol, Execution::default())
}

pub fn check_properness_with(
    loss: &ProperLoss,
    points: &[PosVector],
    tol: f64,
    exec: Execution,
) -> PropernessReport {
    let losses: Vec<Vec<f64>> = par::map(exec, points, |p| loss.loss_raw(p.as_slice()));
    // self-risk ⟨l(q), q⟩
    let own: Vec<f64> = points
        .iter()
        .zip(&losses)
        .map(|(q, lq)| dot(lq, q.as_slice()))
        .collect();

    let per_truth = par::map_range(exec, points.len(), |j| {
        let q = points[j].as_slice();
        let mut worst = (f64::NEG_INFINITY, 0usize);
        let mut fails = Vec::new();
        for (i, lp) in losses.iter().enumerate() {
            let mut v = own[j] - dot(lp, q);
            if v.is_nan() {
                v = f64::INFINITY;
            }
            if v > worst.0 {
                worst = (v, i);
            }
            if v > tol {
                fails.push((i, v));
            }
        }
        (worst, fails)
    });

    let mut worst_violation = f64::NEG_INFINITY;
    let mut worst = None;
    let mut failures = Vec::new();
    let mut failure_count = 0;
    for (j, ((v, i), fails)) in per_truth.into_iter().enumerate() {
        if v > worst_violation {
            worst_violation = v;
            worst = Some((i, j));
        }
        failure_count += fails.len();
        for (i, amount) in fails {
            if failures.len() < MAX_RECORDED {
                failures.push(Violation {
                    predicted: points[i].clone(),
                    truth: points[j].clone(),
                    amount,
                });
            }
        }
    }
    PropernessReport {
        loss: loss.name(),
        tolerance: tol,
        pairs_checked: points.len() * points.len(),
        worst_violation,
        worst: worst.map(|(i, j)| Violation {
            predicted: points[i].clone(),
            truth: points[j].clone(),
            amount: worst_violation,
        }),
        failures,
        failure_count,
    }
}
