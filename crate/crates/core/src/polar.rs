//! Antipolar Bayes risks `ρ^∧(x) = inf_{q≠0} ⟨x, q⟩/ρ(q)`, antipolar losses,
//! the substitution function and the canonical link.

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::families::outside_cone;
use crate::grid::{closed_lattice, SimplexGrid};
use crate::loss::{FnRisk, LossModel, ProperLoss};
use crate::numeric::supergradient_raw;
use crate::optim::{golden_section, projected_descent, simplex_pattern_search};
use crate::par::{self, Execution};
use crate::vector::{direction, dot, sup_distance, LossVector, PosVector};

/// Points of the coarse scan used for two outcomes.
const SCAN_POINTS: usize = 200;
/// Lattice resolution seeding the search for three or more outcomes.
const SEED_RESOLUTION: usize = 12;
/// Best lattice points refined by local search.
const SEED_COUNT: usize = 4;
/// Relative slack of the superprediction membership test.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Numeric,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Numeric => "numeric",
        }
    }
}

/// Whether a known closed form may be used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AntipolarMethod {
    #[default]
    Auto,
    Numeric,
}

#[derive(Debug, Clone, Serialize)]
pub struct AntipolarResult {
    pub value: f64,
    /// Direction `q` on the closed simplex attaining the infimum.
    pub minimizer: PosVector,
    pub method: Method,
    /// Excess of the returned value over the best value seen on the
    /// verification lattice; zero when the optimizer beats every grid point.
    pub certified_gap: f64,
}

pub fn antipolar_bayes_risk(loss: &ProperLoss, x: &PosVector) -> Result<AntipolarResult> {
    antipolar_bayes_risk_with(loss, x, AntipolarMethod::Auto)
}

pub fn antipolar_bayes_risk_with(
    loss: &ProperLoss,
    x: &PosVector,
    method: AntipolarMethod,
) -> Result<AntipolarResult> {
    loss.check_dim(x.dim())?;
    if x.is_zero() {
        return Err(GeomError::ZeroVector);
    }
    if method == AntipolarMethod::Auto {
        if let Some(hint) = loss.antipolar_hint() {
            let value = hint.risk_raw(x.as_slice());
            let minimizer = PosVector::new(loss_direction(&hint.loss_raw(x.as_slice())))?;
            return Ok(AntipolarResult {
                value,
                minimizer,
                method: if hint.is_numeric() { Method::Numeric } else { Method::ClosedForm },
                certified_gap: 0.0,
            });
        }
    }
    let (value, q, gap) = minimize_quotient(loss, x.as_slice(), Execution::default())?;
    Ok(AntipolarResult {
        value,
        minimizer: PosVector::new(q)?,
        method: Method::Numeric,
        certified_gap: gap,
    })
}

/// Direction of a loss vector; infinite entries take all the mass.
fn loss_direction(v: &[f64]) -> Vec<f64> {
    let inf = v.iter().filter(|x| x.is_infinite()).count();
    if inf > 0 {
        return v
            .iter()
            .map(|x| if x.is_infinite() { 1.0 / inf as f64 } else { 0.0 })
            .collect();
    }
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

fn quotient(loss: &ProperLoss, x: &[f64], q: &[f64]) -> f64 {
    let r = loss.risk_raw(q);
    if !(r > 0.0) || !r.is_finite() {
        return f64::INFINITY;
    }
    dot(x, q) / r
}

/// Minimizes `⟨x, q⟩/ρ(q)` over the closed simplex. Returns the value, the
/// minimizer and the certified gap.
fn minimize_quotient(loss: &ProperLoss, x: &[f64], exec: Execution) -> Result<(f64, Vec<f64>, f64)> {
    let n = x.len();
    let f = |q: &[f64]| quotient(loss, x, q);
    if n == 2 {
        let scan: Vec<f64> = (0..=SCAN_POINTS)
            .map(|i| {
                let t = i as f64 / SCAN_POINTS as f64;
                f(&[t, 1.0 - t])
            })
            .collect();
        let (k, &grid_min) = scan
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("scan is nonempty");
        if !grid_min.is_finite() {
            return Err(GeomError::VanishingRisk);
        }
        let lo = k.saturating_sub(1) as f64 / SCAN_POINTS as f64;
        let hi = (k + 1).min(SCAN_POINTS) as f64 / SCAN_POINTS as f64;
        let (t, ft) = golden_section(|t| f(&[t, 1.0 - t]), lo, hi, 1e-10);
        let tk = k as f64 / SCAN_POINTS as f64;
        let (t, value) = if ft <= grid_min { (t, ft) } else { (tk, grid_min) };
        return Ok((value, vec![t, 1.0 - t], (value - grid_min).max(0.0)));
    }

    let lattice = closed_lattice(n, SEED_RESOLUTION);
    let mut seeds: Vec<(f64, Vec<f64>)> = lattice.into_iter().map(|q| (f(&q), q)).collect();
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let grid_min = seeds[0].0;
    if !grid_min.is_finite() {
        return Err(GeomError::VanishingRisk);
    }
    seeds.truncate(SEED_COUNT);
    seeds.retain(|s| s.0.is_finite());

    let grad = |q: &[f64]| -> Option<Vec<f64>> {
        let r = loss.risk_raw(q);
        if !(r > 0.0) {
            return None;
        }
        let l = loss.loss_raw(q);
        let xq = dot(x, q);
        let g: Vec<f64> = x.iter().zip(&l).map(|(xi, li)| xi / r - xq * li / (r * r)).collect();
        g.iter().all(|v| v.is_finite()).then_some(g)
    };
    let step = 1.0 / SEED_RESOLUTION as f64;
    let results = par::map(exec, &seeds, |(_, q)| {
        let (q, _) = projected_descent(&f, &grad, q.clone(), 500);
        simplex_pattern_search(&f, q, step, 1e-12)
    });
    let (q, value) = results
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one finite seed");
    Ok((value, q, (value - grid_min).max(0.0)))
}

/// The antipolar loss: closed form when known, otherwise the numeric
/// antipolar Bayes risk paired with its finite-difference supergradient.
pub fn antipolar_loss(loss: &ProperLoss) -> Result<ProperLoss> {
    if let Some(hint) = loss.antipolar_hint() {
        return Ok(hint);
    }
    Ok(numeric_antipolar(loss))
}

/// Numeric antipolar loss, ignoring any closed form.
pub fn numeric_antipolar(loss: &ProperLoss) -> ProperLoss {
    ProperLoss::from_model(NumericAntipolar { base: loss.clone() })
}

struct NumericAntipolar {
    base: ProperLoss,
}

impl NumericAntipolar {
    fn solve(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        if x.iter().all(|&v| v == 0.0) {
            return None;
        }
        minimize_quotient(&self.base, x, Execution::Sequential)
            .ok()
            .map(|(v, q, _)| (v, q))
    }
}

impl LossModel for NumericAntipolar {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn name(&self) -> String {
        format!("antipolar:base=[{}]", self.base.name())
    }

    fn bayes_risk(&self, x: &[f64]) -> f64 {
        if outside_cone(x) {
            return f64::NEG_INFINITY;
        }
        if x.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        self.solve(x).map_or(f64::NAN, |(v, _)| v)
    }

    fn loss(&self, x: &[f64]) -> Vec<f64> {
        if x.iter().all(|&v| v > 0.0) {
            let risk = FnRisk::new(self.dim(), |y: &[f64]| self.bayes_risk(y));
            if let Ok(g) = supergradient_raw(&risk, x) {
                return g;
            }
        }
        // Danskin: the gradient of the infimum is q*/ρ(q*)
        match self.solve(x) {
            Some((_, q)) => {
                let r = self.base.risk_raw(&q);
                q.iter().map(|v| v / r).collect()
            }
            None => vec![f64::NAN; self.dim()],
        }
    }

    fn antipolar_hint(&self) -> Option<ProperLoss> {
        Some(self.base.clone())
    }

    fn strictly_proper(&self) -> bool {
        self.base.is_strictly_proper()
    }

    fn numeric(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PseudoInverseReport {
    pub loss: String,
    pub tolerance: f64,
    pub points_checked: usize,
    /// Largest `‖l(p) − l(l^∧(l(p)))‖∞`.
    pub worst_loss_gap: f64,
    /// Largest `‖dir(l^∧(l(p))) − p‖∞`.
    pub worst_direction_gap: f64,
    pub witness: Option<PosVector>,
    pub passed: bool,
}

pub fn check_pseudo_inverse(loss: &ProperLoss, grid: &SimplexGrid, tol: f64) -> Result<PseudoInverseReport> {
    check_pseudo_inverse_points(loss, grid.points(), tol, Execution::default())
}

pub fn check_pseudo_inverse_points(
    loss: &ProperLoss,
    points: &[PosVector],
    tol: f64,
    exec: Execution,
) -> Result<PseudoInverseReport> {
    let anti = antipolar_loss(loss)?;
    let gaps = par::map(exec, points, |p| {
        let lp = loss.loss_raw(p.as_slice());
        let x = anti.loss_raw(&lp);
        let back = direction(&x).map(|d| (loss.loss_raw(&d), d));
        match back {
            Some((lb, d)) => {
                let g1 = sup_distance(&lp, &lb);
                let pd = direction(p.as_slice()).unwrap_or_default();
                let g2 = sup_distance(&d, &pd);
                (nan_to_inf(g1), nan_to_inf(g2))
            }
            None => (f64::INFINITY, f64::INFINITY),
        }
    });
    let mut worst_loss_gap = 0.0f64;
    let mut worst_direction_gap = 0.0f64;
    let mut witness = None;
    let mut worst_any = 0.0f64;
    for (p, (g1, g2)) in points.iter().zip(gaps) {
        worst_loss_gap = worst_loss_gap.max(g1);
        worst_direction_gap = worst_direction_gap.max(g2);
        if g1.max(g2) > worst_any {
            worst_any = g1.max(g2);
            witness = Some(p.clone());
        }
    }
    Ok(PseudoInverseReport {
        loss: loss.name(),
        tolerance: tol,
        points_checked: points.len(),
        worst_loss_gap,
        worst_direction_gap,
        witness,
        passed: worst_loss_gap <= tol && worst_direction_gap <= tol,
    })
}

fn nan_to_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn finite_point(x: &LossVector) -> Result<PosVector> {
    if let Some((i, &v)) = x.as_slice().iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(GeomError::InvalidEntry { index: i, value: v });
    }
    PosVector::new(x.as_slice().to_vec())
}

/// Antigauge `β_S(x) = sup{λ > 0 : x ∈ λS}` of the superprediction set,
/// computed as the antipolar Bayes risk.
pub fn antigauge(loss: &ProperLoss, x: &LossVector) -> Result<f64> {
    Ok(antipolar_bayes_risk(loss, &finite_point(x)?)?.value)
}

/// Antigauge by bisection on `λ` with the membership test
/// `λ·ρ(p) ≤ ⟨x, p⟩` for every point `p` of `grid`.
pub fn antigauge_bisection(loss: &ProperLoss, x: &LossVector, grid: &SimplexGrid) -> Result<f64> {
    let x = finite_point(x)?;
    loss.check_dim(x.dim())?;
    if x.is_zero() {
        return Err(GeomError::ZeroVector);
    }
    let pairs: Vec<(f64, f64)> = grid
        .points()
        .iter()
        .map(|p| (loss.risk_raw(p.as_slice()), dot(x.as_slice(), p.as_slice())))
        .collect();
    if pairs.iter().all(|(r, _)| !(*r > 0.0)) {
        return Err(GeomError::VanishingRisk);
    }
    let member = |lambda: f64| pairs.iter().all(|(r, xp)| lambda * r <= *xp);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while member(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(GeomError::VanishingRisk);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if member(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Substitution function: a prediction `p` whose loss vector is dominated by
/// the superprediction point `x`.
pub fn substitute(loss: &ProperLoss, x: &LossVector) -> Result<PosVector> {
    let xp = finite_point(x)?;
    let res = antipolar_bayes_risk(loss, &xp)?;
    if res.value < 1.0 - MEMBERSHIP_TOL {
        return Err(GeomError::NotSuperprediction { antigauge: res.value });
    }
    crate::vector::normalize_direction(&res.minimizer)
}

/// The canonical link composite `l̃ = l ∘ l^∧`, mapping a loss vector to the
/// superprediction boundary point on its ray.
#[derive(Debug, Clone)]
pub struct CanonicalLink {
    loss: ProperLoss,
    anti: ProperLoss,
}

impl CanonicalLink {
    pub fn apply(&self, x: &LossVector) -> Result<LossVector> {
        let xp = finite_point(x)?;
        let q = self.anti.loss(&xp)?;
        let d = direction(&loss_direction(q.as_slice())).ok_or(GeomError::ZeroVector)?;
        self.loss.loss(&PosVector::new(d)?)
    }

    pub fn loss(&self) -> &ProperLoss {
        &self.loss
    }
}

pub fn canonical_link_composite(loss: &ProperLoss) -> Result<CanonicalLink> {
    if !loss.is_strictly_proper() {
        return Err(GeomError::NotStrictlyProper(loss.name()));
    }
    Ok(CanonicalLink {
        loss: loss.clone(),
        anti: antipolar_loss(loss)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::*;
    use std::f64::consts::LN_2;

    fn pv(v: &[f64]) -> PosVector {
        PosVector::new(v.to_vec()).unwrap()
    }

    fn lv(v: &[f64]) -> LossVector {
        LossVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn brier_binary_values() {
        let b = brier_loss(2).unwrap();
        let r = antipolar_bayes_risk(&b, &pv(&[0.5, 0.5])).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.method, Method::ClosedForm);
        let num = antipolar_bayes_risk_with(&b, &pv(&[0.5, 0.5]), AntipolarMethod::Numeric).unwrap();
        assert!((num.value - 1.0).abs() < 1e-12);
        let r = antipolar_bayes_risk(&b, &pv(&[0.75, 0.25])).unwrap();
        assert!((r.value - 0.933_012_701_892_219_3).abs() < 1e-12);
        let num = antipolar_bayes_risk_with(&b, &pv(&[0.75, 0.25]), AntipolarMethod::Numeric).unwrap();
        assert!((num.value - r.value).abs() < 1e-10);
    }

    #[test]
    fn zero_one_binary_is_sum() {
        let z = zero_one_loss(2).unwrap();
        let r = antipolar_bayes_risk_with(&z, &pv(&[0.3, 0.7]), AntipolarMethod::Numeric).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!((r.minimizer[0] - 0.5).abs() < 1e-6);
        let r = antipolar_bayes_risk(&z, &pv(&[0.3, 0.7])).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_one_three_outcomes() {
        let z = zero_one_loss(3).unwrap();
        assert!(z.antipolar_hint().is_none());
        let g = antigauge(&z, &lv(&[1.0, 1.0, 1.0])).unwrap();
        assert!((g - 1.5).abs() < 1e-9, "{g}");
        let grid = SimplexGrid::new(3, 12).unwrap();
        let gb = antigauge_bisection(&z, &lv(&[1.0, 1.0, 1.0]), &grid).unwrap();
        assert!((gb - 1.5).abs() < 1e-9, "{gb}");
    }

    #[test]
    fn log_antigauge_scales() {
        let l = log_loss(2).unwrap();
        assert!((antigauge(&l, &lv(&[LN_2, LN_2])).unwrap() - 1.0).abs() < 1e-14);
        assert!((antigauge(&l, &lv(&[2.0 * LN_2, 2.0 * LN_2])).unwrap() - 2.0).abs() < 1e-14);
        let grid = SimplexGrid::new(2, 50).unwrap();
        let gb = antigauge_bisection(&l, &lv(&[LN_2, LN_2]), &grid).unwrap();
        assert!((gb - 1.0).abs() < 1e-9);
    }

    #[test]
    fn antipolar_losses_by_pairing() {
        let c = cnorm_loss(CnormParam::Finite(0.75), 2).unwrap();
        assert_eq!(antipolar_loss(&c).unwrap().name(), "cnorm:a=-3;n=2");
        let cd = cobb_douglas_loss(&[1.0, 1.0]).unwrap();
        let anti = antipolar_loss(&cd).unwrap();
        for p in [[0.5, 0.5], [0.7, 0.3]] {
            let a = anti.loss_raw(&p);
            let b = cd.loss_raw(&p);
            assert!((a[0] - 2.0 * b[0]).abs() < 1e-14 && (a[1] - 2.0 * b[1]).abs() < 1e-14);
        }
        assert_eq!(antipolar_loss(&zero_one_loss(2).unwrap()).unwrap().name(), "const:n=2");
    }

    #[test]
    fn substitution_examples() {
        let l = log_loss(2).unwrap();
        let x = lv(&[LN_2 + 0.1, LN_2]);
        let p = substitute(&l, &x).unwrap();
        assert!(l.loss(&p).unwrap().dominated_by(&x, 1e-12));
        let q = pv(&[0.3, 0.7]);
        let p = substitute(&l, &l.loss(&q).unwrap()).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-12);
        assert!(matches!(
            substitute(&l, &lv(&[0.01, 0.01])),
            Err(GeomError::NotSuperprediction { .. })
        ));
    }

    #[test]
    fn canonical_link_fixes_boundary() {
        let link = canonical_link_composite(&log_loss(2).unwrap()).unwrap();
        for x in [[LN_2, LN_2], [2.0 * LN_2, 2.0 * LN_2]] {
            let y = link.apply(&lv(&x)).unwrap();
            assert!((y[0] - LN_2).abs() < 1e-12 && (y[1] - LN_2).abs() < 1e-12);
        }
        assert!(canonical_link_composite(&zero_one_loss(2).unwrap()).is_err());
    }

    #[test]
    fn zero_x_rejected() {
        let l = log_loss(2).unwrap();
        assert!(matches!(
            antipolar_bayes_risk(&l, &pv(&[0.0, 0.0])),
            Err(GeomError::ZeroVector)
        ));
    }
}
