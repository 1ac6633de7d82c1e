//! Small derivative-light optimizers over the probability simplex and over
//! splitting polytopes.

/// Golden-section search for a minimizer of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if x1 >= x2 {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    [(x1, f1), (x2, f2), (mid, fm)]
        .into_iter()
        .fold((mid, fm), |best, c| if c.1 < best.1 { c } else { best })
}

/// Euclidean projection onto `{q ≥ 0, Σq = 1}`.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projected gradient descent with backtracking on the simplex. `grad` may
/// return `None` (or non-finite entries) where no gradient is available, in
/// which case descent stops.
pub fn projected_descent<F, G>(f: &F, grad: &G, start: Vec<f64>, max_iter: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let mut x = start;
    let mut fx = f(&x);
    let mut step = f64::NAN;
    for _ in 0..max_iter {
        let g = match grad(&x) {
            Some(g) if g.iter().all(|v| v.is_finite()) => g,
            _ => break,
        };
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax == 0.0 {
            break;
        }
        if !step.is_finite() {
            step = 0.1 / gmax;
        }
        let mut improved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            let y = project_simplex(&trial);
            let fy = f(&y);
            if fy < fx {
                let moved = x.iter().zip(&y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                x = y;
                let gain = fx - fy;
                fx = fy;
                improved = moved > 1e-15 && gain > 1e-16 * fx.abs();
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, fx)
}

/// Upper bound on the sweeps of [`simplex_pattern_search`].
const PATTERN_SWEEPS: usize = 20_000;

/// Compass search on the simplex. The moves are the edge directions
/// `e_i − e_j` plus `±(e_i − q)`, which keep the ratios of the other
/// coordinates fixed and so slide along ties between them. The step doubles
/// after a move and halves after a failed sweep; the search stops once it
/// drops below `min_step`.
pub fn simplex_pattern_search<F>(f: &F, start: Vec<f64>, initial_step: f64, min_step: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let mut x = start;
    let mut fx = f(&x);
    let mut step = initial_step;
    let mut trial = x.clone();
    let consider = |trial: &[f64], best: &mut Option<(Vec<f64>, f64)>, fx: f64| {
        let ft = f(trial);
        if ft < fx && best.as_ref().is_none_or(|b| ft < b.1) {
            *best = Some((trial.to_vec(), ft));
        }
    };
    for _ in 0..PATTERN_SWEEPS {
        if step < min_step {
            break;
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        for i in 0..n {
            for j in 0..n {
                if i == j || x[j] <= 0.0 {
                    continue;
                }
                let s = step.min(x[j]);
                trial.copy_from_slice(&x);
                trial[i] += s;
                trial[j] -= s;
                if s == x[j] {
                    trial[j] = 0.0;
                }
                consider(&trial, &mut best, fx);
            }
        }
        // vertex moves only when no edge move helps
        for i in 0..n {
            if best.is_some() {
                break;
            }
            let s = step.min(1.0);
            for k in 0..n {
                trial[k] = (1.0 - s) * x[k] + if k == i { s } else { 0.0 };
            }
            consider(&trial, &mut best, fx);
            if x[i] > 0.0 && x[i] < 1.0 {
                let s = step.min(x[i] / (1.0 - x[i]));
                for k in 0..n {
                    trial[k] = (1.0 + s) * x[k] - if k == i { s } else { 0.0 };
                }
                trial[i] = trial[i].max(0.0);
                consider(&trial, &mut best, fx);
            }
        }
        match best.take() {
            Some((y, fy)) => {
                x = y;
                fx = fy;
                step = (2.0 * step).min(initial_step);
            }
            None => step *= 0.5,
        }
    }
    (x, fx)
}

/// Outcome of [`ellipsoid_maximize`].
#[derive(Debug, Clone)]
pub struct EllipsoidResult {
    pub argmax: Vec<f64>,
    pub value: f64,
    /// Certified upper bound on the maximum over the feasible set.
    pub upper_bound: f64,
    pub iterations: usize,
}

/// Central-cut ellipsoid method for a concave `f` over a polytope.
///
/// `oracle(z)` returns `Err(h)` when `z` is infeasible, with `h` the normal
/// of a violated constraint `⟨h, z⟩ ≤ b`, and `Ok((f(z), s))` with `s` a
/// supergradient otherwise. `start` and `radius` describe a ball containing
/// the feasible set. `lower` is a known feasible value (e.g. from seeding).
pub fn ellipsoid_maximize<O>(
    oracle: &O,
    start: Vec<f64>,
    radius: f64,
    lower: Option<(Vec<f64>, f64)>,
    rel_tol: f64,
    max_iter: usize,
) -> EllipsoidResult
where
    O: Fn(&[f64]) -> Result<(f64, Vec<f64>), Vec<f64>>,
{
    let d = start.len();
    let df = d as f64;
    let mut c = start;
    // E = {c + B u : ‖u‖ ≤ 1}; keeping the factor B makes sᵀPs = ‖Bᵀs‖²
    // a sum of squares even when E becomes very flat.
    let mut b = vec![0.0; d * d];
    for i in 0..d {
        b[i * d + i] = radius;
    }
    let (mut best_x, mut best) = lower.unwrap_or((c.clone(), f64::NEG_INFINITY));
    let mut upper = f64::INFINITY;
    let mut iterations = 0;
    let mut bt_g = vec![0.0; d];
    let mut bp = vec![0.0; d];
    let transposed = |b: &[f64], v: &[f64], out: &mut [f64]| {
        for j in 0..d {
            out[j] = (0..d).map(|i| b[i * d + j] * v[i]).sum();
        }
    };
    let a1 = df / (df * df - 1.0).sqrt();
    let a2 = df / (df + 1.0) - a1;
    for it in 0..max_iter {
        iterations = it + 1;
        let g = match oracle(&c) {
            Err(h) => h,
            Ok((fc, s)) => {
                if fc > best {
                    best = fc;
                    best_x = c.clone();
                }
                transposed(&b, &s, &mut bt_g);
                let width = bt_g.iter().map(|v| v * v).sum::<f64>().sqrt();
                upper = upper.min(fc + width);
                if upper - best <= rel_tol * (1.0 + best.abs()) {
                    break;
                }
                s.iter().map(|v| -v).collect()
            }
        };
        transposed(&b, &g, &mut bt_g);
        let norm = bt_g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            break;
        }
        for v in bt_g.iter_mut() {
            *v /= norm;
        }
        for i in 0..d {
            bp[i] = (0..d).map(|j| b[i * d + j] * bt_g[j]).sum();
        }
        for i in 0..d {
            c[i] -= bp[i] / (df + 1.0);
        }
        for i in 0..d {
            for j in 0..d {
                b[i * d + j] = a1 * b[i * d + j] + a2 * bp[i] * bt_g[j];
            }
        }
    }
    EllipsoidResult {
        argmax: best_x,
        value: best,
        upper_bound: upper,
        iterations,
    }
}

/// Coordinate compass search for maximization with a feasibility predicate
/// folded into `f` (return `-inf` when infeasible).
pub fn coordinate_polish<F>(f: &F, start: Vec<f64>, initial_step: f64, min_step: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let mut x = start;
    let mut fx = f(&x);
    let mut step = initial_step;
    let mut trial = x.clone();
    for _ in 0..PATTERN_SWEEPS {
        if step < min_step {
            break;
        }
        let mut moved = false;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                trial.copy_from_slice(&x);
                trial[i] += sign * step;
                let ft = f(&trial);
                if ft > fx {
                    x.copy_from_slice(&trial);
                    fx = ft;
                    moved = true;
                }
            }
        }
        step = if moved { (2.0 * step).min(initial_step) } else { 0.5 * step };
    }
    (x, fx)
}
