//! Consolidated property checks for a single loss.

use serde::Serialize;
use serde_json::{json, Value};

use crate::grid::SimplexGrid;
use crate::loss::ProperLoss;
use crate::par::{self, Execution};
use crate::polar::{antipolar_loss, check_pseudo_inverse_points};
use crate::properness::check_properness_with;
use crate::vector::{dot, sup_distance, PosVector};

/// Points used by the pairwise checks (superadditivity, supergradient,
/// Bregman), and by the pseudo-inverse check.
const PAIR_POINTS: usize = 200;
const PSEUDO_POINTS: usize = 100;
const HOLDER_POINTS: usize = 12;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub properness: f64,
    pub homogeneity: f64,
    pub superadditivity: f64,
    pub supergradient: f64,
    pub consistency: f64,
    pub pseudo_inverse: f64,
    pub reverse_holder: f64,
    pub bregman: f64,
}

impl Tolerances {
    pub fn analytic() -> Self {
        Self {
            properness: 1e-9,
            homogeneity: 1e-10,
            superadditivity: 1e-9,
            supergradient: 1e-9,
            consistency: 1e-9,
            pseudo_inverse: 1e-8,
            reverse_holder: 1e-9,
            bregman: 1e-10,
        }
    }

    pub fn numeric() -> Self {
        Self {
            properness: 1e-4,
            homogeneity: 1e-6,
            superadditivity: 1e-6,
            supergradient: 1e-4,
            consistency: 1e-5,
            pseudo_inverse: 1e-3,
            reverse_holder: 1e-4,
            bregman: 1e-4,
        }
    }

    /// Analytic tolerances for closed-form losses, numeric ones otherwise.
    /// Checks going through the antipolar use numeric tolerances unless the
    /// antipolar is known in closed form.
    pub fn for_loss(loss: &ProperLoss) -> Self {
        if loss.is_numeric() {
            return Self::numeric();
        }
        let mut t = Self::analytic();
        if loss.antipolar_hint().is_none_or(|h| h.is_numeric()) {
            let n = Self::numeric();
            t.pseudo_inverse = n.pseudo_inverse;
            t.reverse_holder = n.reverse_holder;
        }
        t
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check_name: String,
    pub pass: bool,
    pub worst_violation: f64,
    pub witness: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub loss: String,
    pub grid_points: usize,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check_name == name)
    }
}

fn nan_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Worst value and its index.
fn worst_of(values: impl IntoIterator<Item = f64>) -> (f64, Option<usize>) {
    let mut worst = (f64::NEG_INFINITY, None);
    for (i, v) in values.into_iter().enumerate() {
        let v = nan_inf(v);
        if v > worst.0 {
            worst = (v, Some(i));
        }
    }
    worst
}

fn result(name: &str, worst: f64, tol: f64, witness: Value) -> CheckResult {
    let worst = if worst == f64::NEG_INFINITY { 0.0 } else { worst };
    CheckResult {
        check_name: name.to_string(),
        pass: worst <= tol,
        worst_violation: worst,
        witness,
    }
}

fn pair_witness(points: &[PosVector], k: Option<usize>) -> Value {
    match k {
        Some(k) => {
            let n = points.len();
            json!({ "p": points[k / n].as_slice(), "q": points[k % n].as_slice() })
        }
        None => Value::Null,
    }
}

pub fn verify_all(loss: &ProperLoss, grid: &SimplexGrid, tol: &Tolerances) -> SuiteReport {
    verify_all_with(loss, grid, tol, Execution::default())
}

pub fn verify_all_with(loss: &ProperLoss, grid: &SimplexGrid, tol: &Tolerances, exec: Execution) -> SuiteReport {
    let points = grid.points();
    let mut checks = Vec::new();

    let prop = check_properness_with(loss, points, tol.properness, exec);
    checks.push(result(
        "properness",
        prop.worst_violation,
        tol.properness,
        prop.worst
            .as_ref()
            .map_or(Value::Null, |w| json!({ "p": w.predicted.as_slice(), "q": w.truth.as_slice() })),
    ));

    let risks: Vec<f64> = par::map(exec, points, |p| loss.risk_raw(p.as_slice()));
    let losses: Vec<Vec<f64>> = par::map(exec, points, |p| loss.loss_raw(p.as_slice()));

    let homog = par::map(exec, points, |p| {
        let r = loss.risk_raw(p.as_slice());
        let l = loss.loss_raw(p.as_slice());
        [0.5, 2.0, 10.0]
            .iter()
            .map(|&a| {
                let ap: Vec<f64> = p.as_slice().iter().map(|v| a * v).collect();
                let dr = (loss.risk_raw(&ap) - a * r).abs() / (1.0 + a * r.abs());
                let dl = sup_distance(&loss.loss_raw(&ap), &l);
                nan_inf(dr).max(nan_inf(dl))
            })
            .fold(0.0, f64::max)
    });
    let (w, k) = worst_of(homog);
    checks.push(result(
        "homogeneity",
        w,
        tol.homogeneity,
        k.map_or(Value::Null, |k| json!({ "p": points[k].as_slice() })),
    ));

    let consistency = points
        .iter()
        .zip(&losses)
        .zip(&risks)
        .map(|((p, l), r)| (dot(l, p.as_slice()) - r).abs());
    let (w, k) = worst_of(consistency);
    checks.push(result(
        "consistency",
        w,
        tol.consistency,
        k.map_or(Value::Null, |k| json!({ "p": points[k].as_slice() })),
    ));

    let sub = grid.subsample(PAIR_POINTS);
    let sub_risk: Vec<f64> = sub.iter().map(|p| loss.risk_raw(p.as_slice())).collect();
    let sub_loss: Vec<Vec<f64>> = sub.iter().map(|p| loss.loss_raw(p.as_slice())).collect();
    let m = sub.len();

    let superadd = par::map_range(exec, m * m, |k| {
        let (i, j) = (k / m, k % m);
        let s: Vec<f64> = sub[i].as_slice().iter().zip(sub[j].as_slice()).map(|(a, b)| a + b).collect();
        sub_risk[i] + sub_risk[j] - loss.risk_raw(&s)
    });
    let (w, k) = worst_of(superadd);
    checks.push(result("superadditivity", w, tol.superadditivity, pair_witness(&sub, k)));

    // ρ(q) − ρ(p) − ⟨l(p), q − p⟩ ≤ 0
    let supergrad = par::map_range(exec, m * m, |k| {
        let (i, j) = (k / m, k % m);
        let lp = &sub_loss[i];
        sub_risk[j] - sub_risk[i] - (dot(lp, sub[j].as_slice()) - dot(lp, sub[i].as_slice()))
    });
    let (w, k) = worst_of(supergrad);
    checks.push(result("supergradient", w, tol.supergradient, pair_witness(&sub, k)));

    let breg = par::map_range(exec, m * m, |k| {
        let (i, j) = (k / m, k % m);
        let p = sub[i].as_slice();
        let v: f64 = p
            .iter()
            .zip(sub_loss[j].iter().zip(&sub_loss[i]))
            .map(|(&w, (&a, &b))| if w == 0.0 || a == b { 0.0 } else { w * (a - b) })
            .sum();
        -v
    });
    let (w, k) = worst_of(breg);
    checks.push(result("bregman_nonnegativity", w, tol.bregman, pair_witness(&sub, k)));

    if loss.is_strictly_proper() {
        let pts = grid.subsample(PSEUDO_POINTS);
        match check_pseudo_inverse_points(loss, &pts, tol.pseudo_inverse, exec) {
            Ok(r) => checks.push(result(
                "pseudo_inverse",
                r.worst_loss_gap.max(r.worst_direction_gap),
                tol.pseudo_inverse,
                r.witness.map_or(Value::Null, |w| json!({ "p": w.as_slice() })),
            )),
            Err(e) => checks.push(CheckResult {
                check_name: "pseudo_inverse".into(),
                pass: false,
                worst_violation: f64::INFINITY,
                witness: json!({ "error": e.to_string() }),
            }),
        }
    } else {
        checks.push(CheckResult {
            check_name: "pseudo_inverse".into(),
            pass: true,
            worst_violation: 0.0,
            witness: json!({ "skipped": "loss is not strictly proper" }),
        });
    }

    checks.push(reverse_holder(loss, grid, tol.reverse_holder, exec));

    SuiteReport {
        loss: loss.name(),
        grid_points: points.len(),
        tolerances: *tol,
        checks,
    }
}

/// `⟨x, p⟩ ≥ ρ^∧(x)·ρ(p)` for grid `p` and a spread of `x`: `1_n`, grid
/// points, and loss vectors of grid points.
fn reverse_holder(loss: &ProperLoss, grid: &SimplexGrid, tol: f64, exec: Execution) -> CheckResult {
    let anti = match antipolar_loss(loss) {
        Ok(a) => a,
        Err(e) => {
            return CheckResult {
                check_name: "reverse_holder".into(),
                pass: false,
                worst_violation: f64::INFINITY,
                witness: json!({ "error": e.to_string() }),
            }
        }
    };
    let n = loss.dim();
    let mut xs: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for q in grid.subsample(HOLDER_POINTS / 2) {
        xs.push(q.as_slice().to_vec());
        let l = loss.loss_raw(q.as_slice());
        if l.iter().all(|v| v.is_finite()) {
            xs.push(l);
        }
    }
    let xr: Vec<f64> = par::map(exec, &xs, |x| anti.risk_raw(x));
    let points = grid.points();
    let risks: Vec<f64> = points.iter().map(|p| loss.risk_raw(p.as_slice())).collect();
    let mut worst = (f64::NEG_INFINITY, Value::Null);
    for (x, rx) in xs.iter().zip(&xr) {
        for (p, rp) in points.iter().zip(&risks) {
            let xp = dot(x, p.as_slice());
            let v = nan_inf((rx * rp - xp) / (1.0 + xp.abs()));
            if v > worst.0 {
                worst = (v, json!({ "x": x, "p": p.as_slice() }));
            }
        }
    }
    result("reverse_holder", worst.0, tol, worst.1)
}
