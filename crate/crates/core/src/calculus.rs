//! Loss calculus: functional M-sums and their duals, affine cone maps,
//! canonical normalization and maximum shifting.

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::families::{fmt_num, outside_cone};
use crate::loss::{FnRisk, LossModel, ProperLoss};
use crate::numeric::supergradient_raw;
use crate::optim::{coordinate_polish, ellipsoid_maximize};
use crate::polar::antipolar_bayes_risk;
use crate::vector::{dot, LossVector, PosVector};

/// Largest `n·(m−1)` accepted by [`dual_msum`].
pub const DUAL_BUDGET: usize = 8;
/// Relative gap above which the dual M-sum reports non-convergence.
pub const DUAL_GAP_TOL: f64 = 1e-6;
/// Loss entries are clamped to this magnitude inside the ellipsoid oracle.
const CLAMP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MSumMode {
    #[default]
    Direct,
    Dual,
}

/// A combiner loss over `R^m` and `m` component losses over `R^n`.
#[derive(Debug, Clone)]
pub struct MSumSpec {
    pub combiner: ProperLoss,
    pub parts: Vec<ProperLoss>,
    pub mode: MSumMode,
}

impl MSumSpec {
    pub fn new(combiner: ProperLoss, parts: Vec<ProperLoss>, mode: MSumMode) -> Result<Self> {
        if combiner.dim() != parts.len() {
            return Err(GeomError::DimensionMismatch {
                expected: combiner.dim(),
                got: parts.len(),
            });
        }
        let n = parts[0].dim();
        for part in &parts[1..] {
            if part.dim() != n {
                return Err(GeomError::DimensionMismatch {
                    expected: n,
                    got: part.dim(),
                });
            }
        }
        Ok(Self { combiner, parts, mode })
    }

    pub fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn name(&self) -> String {
        let parts: Vec<String> = self.parts.iter().map(|p| format!("[{}]", p.name())).collect();
        let mut s = format!("msum:combiner=[{}];parts={}", self.combiner.name(), parts.join(","));
        if self.mode == MSumMode::Dual {
            s.push_str(";mode=dual");
        }
        s
    }

    /// The antipolar of an M-sum is the opposite-mode M-sum of the antipolars,
    /// with the antipolar combiner. Only built when every piece has a closed
    /// form.
    fn antipolars(&self, mode: MSumMode) -> Option<MSumSpec> {
        let combiner = self.combiner.antipolar_hint()?;
        let parts = self
            .parts
            .iter()
            .map(|p| p.antipolar_hint())
            .collect::<Option<Vec<_>>>()?;
        MSumSpec::new(combiner, parts, mode).ok()
    }

    /// Combiner weights `m(r)`; at `r = 0` the weights at `1_m` are used.
    fn weights(&self, r: &[f64]) -> Vec<f64> {
        if r.iter().all(|&v| v == 0.0) {
            return self.combiner.loss_raw(&vec![1.0; r.len()]);
        }
        self.combiner.loss_raw(r)
    }
}

/// Builds the M-sum described by `spec`, dispatching on its mode.
pub fn compose(spec: MSumSpec) -> Result<ProperLoss> {
    match spec.mode {
        MSumMode::Direct => msum(spec),
        MSumMode::Dual => dual_msum(spec),
    }
}

/// Functional M-sum `p ↦ ρ_M(ρ₁(p), …, ρ_m(p))` with loss
/// `Σ_i m_i(r) l_i(p)`.
pub fn msum(spec: MSumSpec) -> Result<ProperLoss> {
    let spec = MSumSpec::new(spec.combiner, spec.parts, MSumMode::Direct)?;
    Ok(ProperLoss::from_model(MSum { spec }))
}

struct MSum {
    spec: MSumSpec,
}

impl MSum {
    fn risks(&self, p: &[f64]) -> Vec<f64> {
        self.spec.parts.iter().map(|l| l.risk_raw(p)).collect()
    }
}

impl LossModel for MSum {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn name(&self) -> String {
        self.spec.name()
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        if outside_cone(p) {
            return f64::NEG_INFINITY;
        }
        let r = self.risks(p);
        if r.iter().any(|v| !(*v >= 0.0)) {
            return f64::NEG_INFINITY;
        }
        self.spec.combiner.risk_raw(&r)
    }

    fn loss(&self, p: &[f64]) -> Vec<f64> {
        let w = self.spec.weights(&self.risks(p));
        let mut out = vec![0.0; p.len()];
        for (wi, part) in w.iter().zip(&self.spec.parts) {
            if *wi == 0.0 {
                continue;
            }
            for (o, li) in out.iter_mut().zip(part.loss_raw(p)) {
                *o += wi * li;
            }
        }
        out
    }

    fn strictly_proper(&self) -> bool {
        self.spec.parts.iter().all(|p| p.is_strictly_proper())
    }

    fn numeric(&self) -> bool {
        self.spec.parts.iter().any(|p| p.is_numeric()) || self.spec.combiner.is_numeric()
    }

    fn antipolar_hint(&self) -> Option<ProperLoss> {
        dual_msum(self.spec.antipolars(MSumMode::Dual)?).ok()
    }
}

/// Optimal split found by the dual M-sum solver.
#[derive(Debug, Clone, Serialize)]
pub struct DualSolution {
    pub value: f64,
    /// `a_1, …, a_m` with `Σ a_i = p`.
    pub split: Vec<Vec<f64>>,
    /// Certified bound on `max − value`.
    pub gap: f64,
}

/// Dual functional M-sum
/// `p ↦ sup{ρ_M(ρ₁(a₁), …, ρ_m(a_m)) : Σ a_i = p, a_i ≥ 0}` with a numeric
/// supergradient loss map.
pub fn dual_msum(spec: MSumSpec) -> Result<ProperLoss> {
    let spec = MSumSpec::new(spec.combiner, spec.parts, MSumMode::Dual)?;
    let d = spec.dim() * (spec.parts.len() - 1);
    if d > DUAL_BUDGET {
        return Err(GeomError::BudgetExceeded(format!(
            "n·(m−1) = {d} exceeds {DUAL_BUDGET}"
        )));
    }
    Ok(ProperLoss::from_model(DualMSum { spec }))
}

/// Direct handle on the dual M-sum solver.
pub fn dual_msum_solve(spec: &MSumSpec, p: &PosVector) -> Result<DualSolution> {
    if spec.dim() != p.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: spec.dim(),
            got: p.dim(),
        });
    }
    let d = spec.dim() * (spec.parts.len() - 1);
    if d > DUAL_BUDGET {
        return Err(GeomError::BudgetExceeded(format!(
            "n·(m−1) = {d} exceeds {DUAL_BUDGET}"
        )));
    }
    let sol = solve_split(spec, p.as_slice());
    if sol.gap > DUAL_GAP_TOL * (1.0 + sol.value.abs()) {
        return Err(GeomError::NonConvergence { gap: sol.gap });
    }
    Ok(sol)
}

struct DualMSum {
    spec: MSumSpec,
}

/// Splits `z = (a_1, …, a_{m−1})` into all `m` blocks, or `None` if some
/// entry is negative.
fn blocks(z: &[f64], p: &[f64], m: usize) -> (Vec<Vec<f64>>, Option<(usize, usize)>) {
    let n = p.len();
    let mut out: Vec<Vec<f64>> = z.chunks(n).map(|c| c.to_vec()).collect();
    let last: Vec<f64> = (0..n)
        .map(|j| p[j] - (0..m - 1).map(|i| z[i * n + j]).sum::<f64>())
        .collect();
    out.push(last);
    let mut bad = None;
    'outer: for (i, b) in out.iter().enumerate() {
        for (j, &v) in b.iter().enumerate() {
            if v < 0.0 {
                bad = Some((i, j));
                break 'outer;
            }
        }
    }
    (out, bad)
}

fn clamp(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-CLAMP, CLAMP)
    }
}

fn split_value(spec: &MSumSpec, a: &[Vec<f64>]) -> f64 {
    let r: Vec<f64> = spec.parts.iter().zip(a).map(|(l, ai)| l.risk_raw(ai)).collect();
    spec.combiner.risk_raw(&r)
}

fn solve_split(spec: &MSumSpec, p: &[f64]) -> DualSolution {
    let n = p.len();
    let m = spec.parts.len();
    let d = n * (m - 1);
    if p.iter().all(|&v| v == 0.0) {
        return DualSolution {
            value: 0.0,
            split: vec![vec![0.0; n]; m],
            gap: 0.0,
        };
    }

    let objective = |z: &[f64]| -> f64 {
        let (a, bad) = blocks(z, p, m);
        if bad.is_some() {
            return f64::NEG_INFINITY;
        }
        split_value(spec, &a)
    };
    let oracle = |z: &[f64]| -> std::result::Result<(f64, Vec<f64>), Vec<f64>> {
        let (a, bad) = blocks(z, p, m);
        if let Some((i, j)) = bad {
            let mut h = vec![0.0; d];
            if i < m - 1 {
                h[i * n + j] = -1.0;
            } else {
                for k in 0..m - 1 {
                    h[k * n + j] = 1.0;
                }
            }
            return Err(h);
        }
        let r: Vec<f64> = spec.parts.iter().zip(&a).map(|(l, ai)| l.risk_raw(ai)).collect();
        let value = spec.combiner.risk_raw(&r);
        let w = spec.weights(&r);
        let grads: Vec<Vec<f64>> = spec
            .parts
            .iter()
            .zip(&a)
            .map(|(l, ai)| {
                if ai.iter().all(|&v| v == 0.0) {
                    l.loss_raw(&vec![1.0; n])
                } else {
                    l.loss_raw(ai)
                }
            })
            .collect();
        let mut s = vec![0.0; d];
        for i in 0..m - 1 {
            for j in 0..n {
                let gi = if w[i] == 0.0 { 0.0 } else { w[i] * clamp(grads[i][j]) };
                let gm = if w[m - 1] == 0.0 { 0.0 } else { w[m - 1] * clamp(grads[m - 1][j]) };
                s[i * n + j] = clamp(gi - gm);
            }
        }
        Ok((value, s))
    };

    // seed lattice: every coordinate a_ij = p_j k_ij / r with Σ_i k_ij ≤ r
    let res = seed_resolution(n, m);
    let per_coord = crate::grid::compositions(m, res);
    let mut best: (Vec<f64>, f64) = (vec![0.0; d], f64::NEG_INFINITY);
    let mut idx = vec![0usize; n];
    loop {
        let mut z = vec![0.0; d];
        for j in 0..n {
            let k = &per_coord[idx[j]];
            for i in 0..m - 1 {
                z[i * n + j] = p[j] * k[i] as f64 / res as f64;
            }
        }
        let v = objective(&z);
        if v > best.1 {
            best = (z, v);
        }
        let mut j = 0;
        loop {
            if j == n {
                break;
            }
            idx[j] += 1;
            if idx[j] < per_coord.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
    }

    let center: Vec<f64> = (0..d).map(|k| p[k % n] / m as f64).collect();
    let pmax = p.iter().cloned().fold(0.0, f64::max);
    let radius = (d as f64).sqrt() * pmax * 1.01;
    let max_iter = 60 * d * (d + 1) + 200;
    let lower = best.1.is_finite().then(|| best.clone());
    let e = ellipsoid_maximize(&oracle, center, radius, lower, 1e-13, max_iter);
    let (z, value) = coordinate_polish(&objective, e.argmax, 1e-3 * pmax, 1e-14 * pmax.max(1.0));
    let gap = (e.upper_bound - value).max(0.0);
    let (split, _) = blocks(&z, p, m);
    DualSolution { value, split, gap }
}

/// Largest even per-coordinate resolution (at most 24) keeping the seed
/// count at or below about a thousand.
fn seed_resolution(n: usize, m: usize) -> usize {
    let count = |r: usize| -> f64 {
        // compositions of r into m parts, per coordinate
        let mut c = 1.0;
        for i in 0..(m - 1) {
            c = c * (r + m - 1 - i) as f64 / (i + 1) as f64;
        }
        c.powi(n as i32)
    };
    let mut r = 24;
    while r > 2 && count(r) > 1000.0 {
        r -= 2;
    }
    r
}

impl LossModel for DualMSum {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn name(&self) -> String {
        self.spec.name()
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        if outside_cone(p) {
            return f64::NEG_INFINITY;
        }
        let sol = solve_split(&self.spec, p);
        if sol.gap > DUAL_GAP_TOL * (1.0 + sol.value.abs()) {
            return f64::NAN;
        }
        sol.value
    }

    fn loss(&self, p: &[f64]) -> Vec<f64> {
        let risk = FnRisk::new(self.dim(), |x: &[f64]| self.bayes_risk(x));
        if let Ok(g) = supergradient_raw(&risk, p) {
            return g;
        }
        // first block's weighted loss is a supergradient at the optimal split
        let sol = solve_split(&self.spec, p);
        let r: Vec<f64> = self
            .spec
            .parts
            .iter()
            .zip(&sol.split)
            .map(|(l, a)| l.risk_raw(a))
            .collect();
        let w = self.spec.weights(&r);
        let i = w.iter().position(|&v| v > 0.0).unwrap_or(0);
        let li = self.spec.parts[i].loss_raw(&sol.split[i]);
        li.iter().map(|v| w[i] * v).collect()
    }

    fn strictly_proper(&self) -> bool {
        self.spec.parts.iter().all(|p| p.is_strictly_proper())
    }

    fn numeric(&self) -> bool {
        true
    }

    fn antipolar_hint(&self) -> Option<ProperLoss> {
        msum(self.spec.antipolars(MSumMode::Direct)?).ok()
    }
}

/// Cone map `S ↦ αS + t`: Bayes risk `αρ(p) + ⟨t, p⟩`, loss `αl(p) + t`.
pub fn scale_translate(loss: &ProperLoss, alpha: f64, t: &LossVector) -> Result<ProperLoss> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(GeomError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    loss.check_dim(t.dim())?;
    if !t.is_finite() {
        return Err(GeomError::InvalidParameter("translation must be finite".into()));
    }
    Ok(ProperLoss::from_model(Affine {
        base: loss.clone(),
        alpha,
        t: t.as_slice().to_vec(),
    }))
}

struct Affine {
    base: ProperLoss,
    alpha: f64,
    t: Vec<f64>,
}

impl LossModel for Affine {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn name(&self) -> String {
        let mut s = format!("affine:base=[{}];alpha={}", self.base.name(), fmt_num(self.alpha));
        if self.t.iter().any(|&v| v != 0.0) {
            let t: Vec<String> = self.t.iter().map(|v| fmt_num(*v)).collect();
            s.push_str(&format!(";t={}", t.join(",")));
        }
        s
    }

    fn bayes_risk(&self, p: &[f64]) -> f64 {
        let r = self.base.risk_raw(p);
        if r == f64::NEG_INFINITY {
            return r;
        }
        self.alpha * r + dot(&self.t, p)
    }

    fn loss(&self, p: &[f64]) -> Vec<f64> {
        self.base
            .loss_raw(p)
            .iter()
            .zip(&self.t)
            .map(|(l, t)| self.alpha * l + t)
            .collect()
    }

    /// Antipolars are closed under positive scaling: `(αρ)^∧ = ρ^∧/α`.
    fn antipolar_hint(&self) -> Option<ProperLoss> {
        if self.t.iter().any(|&v| v != 0.0) {
            return None;
        }
        let hint = self.base.antipolar_hint()?;
        let zero = LossVector::new(vec![0.0; self.t.len()]).ok()?;
        scale_translate(&hint, 1.0 / self.alpha, &zero).ok()
    }

    fn strictly_proper(&self) -> bool {
        self.base.is_strictly_proper()
    }

    fn numeric(&self) -> bool {
        self.base.is_numeric()
    }
}

#[derive(Debug, Clone)]
pub struct Normalization {
    pub loss: ProperLoss,
    pub coefficient: f64,
    pub maximizer: PosVector,
}

/// Rescales `loss` so its Bayes risk peaks at exactly 1 on the simplex.
/// The coefficient is the antigauge of `1_n`; the peak is at the direction
/// of `l^∧(1_n)`.
pub fn normalize_canonical(loss: &ProperLoss) -> Result<Normalization> {
    let n = loss.dim();
    let ones = PosVector::ones(n)?;
    let res = antipolar_bayes_risk(loss, &ones)?;
    let c = res.value;
    if !(c.is_finite() && c > 0.0) {
        return Err(GeomError::InvalidParameter(format!(
            "Bayes risk is unbounded on the simplex (antigauge of 1 is {c})"
        )));
    }
    let maximizer = crate::vector::normalize_direction(&res.minimizer)?;
    let zero = LossVector::new(vec![0.0; n])?;
    Ok(Normalization {
        loss: scale_translate(loss, c, &zero)?,
        coefficient: c,
        maximizer,
    })
}

/// Moves the Bayes-risk maximizer to `p0`:
/// `l̃(q) = c·(l(q) + l(p⋆) − l(p0) + max_y l(p0)_y·1)`.
///
/// `l(p⋆) = 1_n/β_S(1_n)` at the current maximizer. The default `c` makes
/// `l̃(p0) = 1_n`; `scale` overrides it.
pub fn shift_maximum(loss: &ProperLoss, p0: &PosVector, scale: Option<f64>) -> Result<ProperLoss> {
    loss.check_dim(p0.dim())?;
    p0.require_strictly_positive()?;
    if !p0.is_normalized(1e-9) {
        return Err(GeomError::InvalidParameter("p0 must sum to 1".into()));
    }
    if !loss.is_strictly_proper() {
        return Err(GeomError::NotStrictlyProper(loss.name()));
    }
    let n = loss.dim();
    let beta = antipolar_bayes_risk(loss, &PosVector::ones(n)?)?.value;
    let star = 1.0 / beta;
    let l0 = loss.loss(p0)?;
    let top = l0.as_slice().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let c = match scale {
        Some(c) if !(c.is_finite() && c > 0.0) => {
            return Err(GeomError::InvalidParameter(format!("scale must be positive, got {c}")))
        }
        Some(c) => c,
        None => 1.0 / (star + top),
    };
    let t: Vec<f64> = l0.as_slice().iter().map(|v| c * (star - v + top)).collect();
    scale_translate(loss, c, &LossVector::new(t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::*;

    fn pv(v: &[f64]) -> PosVector {
        PosVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn constant_combiner_sums_losses() {
        let spec = MSumSpec::new(
            constant_loss(2).unwrap(),
            vec![log_loss(2).unwrap(), brier_loss(2).unwrap()],
            MSumMode::Direct,
        )
        .unwrap();
        let l = msum(spec).unwrap();
        let p = pv(&[0.3, 0.7]);
        let a = l.loss(&p).unwrap();
        let b1 = log_loss(2).unwrap().loss(&p).unwrap();
        let b2 = brier_loss(2).unwrap().loss(&p).unwrap();
        for i in 0..2 {
            assert!((a[i] - b1[i] - b2[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn min_combiner_of_equal_parts() {
        let log = log_loss(2).unwrap();
        let spec = MSumSpec::new(zero_one_loss(2).unwrap(), vec![log.clone(), log.clone()], MSumMode::Direct)
            .unwrap();
        let l = msum(spec).unwrap();
        let p = pv(&[0.3, 0.7]);
        assert_eq!(l.bayes_risk(&p).unwrap(), log.bayes_risk(&p).unwrap());
        assert_eq!(l.loss(&p).unwrap().as_slice(), log.loss(&p).unwrap().as_slice());
    }

    #[test]
    fn dual_min_halves() {
        for part in [log_loss(2).unwrap(), brier_loss(2).unwrap()] {
            let spec = MSumSpec::new(zero_one_loss(2).unwrap(), vec![part.clone(), part.clone()], MSumMode::Dual)
                .unwrap();
            for p in [[0.5, 0.5], [0.2, 0.8]] {
                let sol = dual_msum_solve(&spec, &pv(&p)).unwrap();
                let want = 0.5 * part.risk_raw(&p);
                assert!((sol.value - want).abs() < 1e-9, "{} {p:?}: {} vs {want}", part.name(), sol.value);
                assert!((sol.split[0][0] - p[0] / 2.0).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn dual_budget() {
        let parts: Vec<ProperLoss> = (0..3).map(|_| log_loss(5).unwrap()).collect();
        let spec = MSumSpec::new(constant_loss(3).unwrap(), parts, MSumMode::Dual).unwrap();
        assert!(matches!(dual_msum(spec), Err(GeomError::BudgetExceeded(_))));
    }

    #[test]
    fn affine_examples() {
        let b = brier_loss(2).unwrap();
        let t = LossVector::new(vec![1.0, 1.0]).unwrap();
        let a = scale_translate(&b, 2.0, &t).unwrap();
        let v = a.loss(&pv(&[0.5, 0.5])).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-15 && (v[1] - 2.0).abs() < 1e-15);
        assert!(scale_translate(&b, 0.0, &t).is_err());
        let zero = LossVector::new(vec![0.0, 0.0]).unwrap();
        let id = scale_translate(&log_loss(2).unwrap(), 1.0, &zero).unwrap();
        assert_eq!(id.loss_raw(&[0.3, 0.7]), log_loss(2).unwrap().loss_raw(&[0.3, 0.7]));
    }

    #[test]
    fn normalization_coefficients() {
        let r = normalize_canonical(&log_loss(2).unwrap()).unwrap();
        assert!((r.coefficient - 1.0 / std::f64::consts::LN_2).abs() < 1e-12);
        assert!((r.maximizer[0] - 0.5).abs() < 1e-12);
        let r = normalize_canonical(&brier_loss(3).unwrap()).unwrap();
        assert!((r.coefficient - 1.5).abs() < 1e-9);
        let r = normalize_canonical(&cnorm_loss(CnormParam::Finite(-1.0), 2).unwrap()).unwrap();
        assert!((r.coefficient - 0.5).abs() < 1e-14);
    }

    #[test]
    fn shift_sets_unit_loss_at_p0() {
        let p0 = pv(&[0.25, 0.75]);
        let s = shift_maximum(&log_loss(2).unwrap(), &p0, None).unwrap();
        let v = s.loss(&p0).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
        assert!(shift_maximum(&zero_one_loss(2).unwrap(), &p0, None).is_err());
        assert!(shift_maximum(&log_loss(2).unwrap(), &pv(&[0.0, 1.0]), None).is_err());
    }
}
