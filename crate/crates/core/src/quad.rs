//! Double-exponential quadrature.
//!
//! `tanh_sinh` integrates over a finite interval and tolerates integrable
//! power singularities at either endpoint. `exp_sinh` integrates over
//! `[a, inf)` and copes with algebraically decaying (heavy) tails, which the
//! Mittag-Leffler densities have for `nu < 1`. Both refine by halving the
//! step until two successive levels agree.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const MAX_LEVEL: usize = 9;
/// Largest |t| for tanh-sinh: the endpoint distance falls to ~1e-300 here.
const TS_T_MAX: f64 = 6.1;
/// exp-sinh runs from x - a ~ 1e-300 to x - a ~ 1e300.
const ES_T_MIN: f64 = -6.1;
const ES_T_MAX: f64 = 6.1;

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_level: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_level: MAX_LEVEL,
        }
    }
}

impl QuadOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// Integral of |f|, used to judge cancellation.
    pub abs_value: f64,
    pub evals: usize,
}

impl QuadResult {
    fn zero() -> Self {
        QuadResult {
            value: 0.0,
            error: 0.0,
            abs_value: 0.0,
            evals: 0,
        }
    }

    fn add(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            abs_value: self.abs_value + other.abs_value,
            evals: self.evals + other.evals,
        }
    }
}

/// One node of a level: endpoint complement and weight (before the step factor).
#[derive(Clone, Copy)]
struct Node {
    t: f64,
    y: f64,
    w: f64,
}

fn ts_levels() -> &'static Vec<Vec<Node>> {
    static TABLE: OnceLock<Vec<Vec<Node>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=MAX_LEVEL)
            .map(|level| {
                let h = 0.5f64.powi(level as i32);
                let (start, stride) = if level == 0 { (0usize, 1usize) } else { (1, 2) };
                let mut nodes = Vec::new();
                let mut j = start;
                loop {
                    let t = j as f64 * h;
                    if t > TS_T_MAX {
                        break;
                    }
                    let u = FRAC_PI_2 * t.sinh();
                    // 1 - tanh(u), computed without cancellation
                    let y = 2.0 / (1.0 + (2.0 * u).exp());
                    let cu = u.cosh();
                    let w = FRAC_PI_2 * t.cosh() / (cu * cu);
                    if y > 0.0 && w.is_finite() {
                        nodes.push(Node { t, y, w });
                    }
                    j += stride;
                }
                nodes
            })
            .collect()
    })
}

fn es_levels() -> &'static Vec<Vec<Node>> {
    static TABLE: OnceLock<Vec<Vec<Node>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=MAX_LEVEL)
            .map(|level| {
                let h = 0.5f64.powi(level as i32);
                let lo = (ES_T_MIN / h).ceil() as i64;
                let hi = (ES_T_MAX / h).floor() as i64;
                (lo..=hi)
                    .filter(|j| level == 0 || j.rem_euclid(2) == 1)
                    .filter_map(|j| {
                        let t = j as f64 * h;
                        let e = (FRAC_PI_2 * t.sinh()).exp();
                        let w = FRAC_PI_2 * t.cosh() * e;
                        (e > 0.0 && w.is_finite()).then_some(Node { t, y: e, w })
                    })
                    .collect()
            })
            .collect()
    })
}

fn check(v: f64, x: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::convergence(
            "quadrature",
            format!("integrand is not finite at x = {x:e}"),
        ))
    }
}

/// Integrate `f` over `[a, b]` with the tanh-sinh rule.
pub fn tanh_sinh<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("tanh_sinh needs finite limits"));
    }
    if a == b {
        return Ok(QuadResult::zero());
    }
    if b < a {
        let r = tanh_sinh(f, b, a, opts)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    let half = 0.5 * (b - a);
    let levels = ts_levels();
    let max_level = opts.max_level.min(MAX_LEVEL);

    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut evals = 0;
    let mut prev = f64::NAN;
    for (level, nodes) in levels.iter().enumerate().take(max_level + 1) {
        for node in nodes {
            let d = half * node.y;
            if node.t == 0.0 {
                let x = a + half;
                let v = check(f(x)?, x)?;
                sum += node.w * v;
                abs_sum += node.w * v.abs();
                evals += 1;
                continue;
            }
            for x in [a + d, b - d] {
                if x <= a || x >= b {
                    continue;
                }
                let v = check(f(x)?, x)?;
                sum += node.w * v;
                abs_sum += node.w * v.abs();
                evals += 1;
            }
        }
        let h = 0.5f64.powi(level as i32);
        let estimate = half * h * sum;
        if level >= 3 {
            let diff = (estimate - prev).abs();
            let tol = opts.abs_tol.max(opts.rel_tol * estimate.abs());
            if diff <= tol {
                return Ok(QuadResult {
                    value: estimate,
                    error: diff,
                    abs_value: half * h * abs_sum,
                    evals,
                });
            }
        }
        prev = estimate;
    }
    let h = 0.5f64.powi(max_level as i32);
    let value = half * h * sum;
    Err(Error::convergence(
        "tanh_sinh",
        format!(
            "no convergence on [{a:e}, {b:e}] after {evals} evaluations (estimate {value:e}, last change {:e})",
            (value - prev).abs()
        ),
    ))
}

/// Integrate `f` over `[a, inf)`; `scale` sets where the nodes concentrate.
pub fn exp_sinh<F>(mut f: F, a: f64, scale: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !a.is_finite() || !(scale > 0.0) {
        return Err(Error::domain("exp_sinh needs a finite start and positive scale"));
    }
    let levels = es_levels();
    let max_level = opts.max_level.min(MAX_LEVEL);
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut evals = 0;
    let mut prev = f64::NAN;
    for (level, nodes) in levels.iter().enumerate().take(max_level + 1) {
        for node in nodes {
            let d = scale * node.y;
            let x = a + d;
            if !x.is_finite() || x <= a {
                continue;
            }
            let w = scale * node.w;
            if !w.is_finite() {
                continue;
            }
            let v = check(f(x)?, x)?;
            sum += w * v;
            abs_sum += w * v.abs();
            evals += 1;
        }
        let h = 0.5f64.powi(level as i32);
        let estimate = h * sum;
        if level >= 3 {
            let diff = (estimate - prev).abs();
            let tol = opts.abs_tol.max(opts.rel_tol * estimate.abs());
            if diff <= tol {
                return Ok(QuadResult {
                    value: estimate,
                    error: diff,
                    abs_value: h * abs_sum,
                    evals,
                });
            }
        }
        prev = estimate;
    }
    Err(Error::convergence(
        "exp_sinh",
        format!("no convergence on [{a:e}, inf) after {evals} evaluations"),
    ))
}

/// Adaptive finite-interval integration: tanh-sinh on each panel, bisecting
/// panels that fail to converge.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_rec(&mut f, a, b, opts, 0)
}

fn integrate_rec<F>(f: &mut F, a: f64, b: f64, opts: &QuadOptions, depth: usize) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    match tanh_sinh(&mut *f, a, b, opts) {
        Ok(r) => Ok(r),
        Err(e) if depth < 10 => {
            let _ = e;
            let m = 0.5 * (a + b);
            let sub = QuadOptions {
                abs_tol: 0.5 * opts.abs_tol,
                ..*opts
            };
            let left = integrate_rec(f, a, m, &sub, depth + 1)?;
            let right = integrate_rec(f, m, b, &sub, depth + 1)?;
            Ok(left.add(right))
        }
        Err(e) => Err(e),
    }
}

/// Integrate over `[0, inf)` by splitting at the given interior breakpoints:
/// finite panels use tanh-sinh, the last breakpoint starts an exp-sinh tail.
pub fn integrate_half_line<F>(mut f: F, breakpoints: &[f64], opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut points: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > 0.0)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut total = QuadResult::zero();
    let mut lo = 0.0;
    for &p in &points {
        total = total.add(integrate(&mut f, lo, p, opts)?);
        lo = p;
    }
    let scale = if lo > 0.0 { lo } else { 1.0 };
    total = total.add(exp_sinh(&mut f, lo, scale, opts)?);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64> {
        move |x| Ok(f(x))
    }

    #[test]
    fn polynomial_and_smooth() {
        let o = QuadOptions::default();
        let r = tanh_sinh(ok(|x| x * x), 0.0, 3.0, &o).unwrap();
        assert!((r.value - 9.0).abs() < 1e-13);
        let r = tanh_sinh(ok(f64::cos), 0.0, 1.0, &o).unwrap();
        assert!((r.value - 1f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn endpoint_power_singularities() {
        let o = QuadOptions::default();
        // int_0^1 x^{-0.7} dx = 1/0.3
        let r = tanh_sinh(ok(|x: f64| x.powf(-0.7)), 0.0, 1.0, &o).unwrap();
        assert!((r.value - 1.0 / 0.3).abs() < 1e-10, "{}", r.value);
        // reversed limits put the singularity at the right end of the node set
        let r = tanh_sinh(ok(|x: f64| x.powf(-0.5)), 1.0, 0.0, &o).unwrap();
        assert!((r.value + 2.0).abs() < 1e-10);
    }

    #[test]
    fn half_line_heavy_tail() {
        let o = QuadOptions::default();
        // int_0^inf (1+x)^{-1.3} dx = 1/0.3
        let r = exp_sinh(ok(|x: f64| (1.0 + x).powf(-1.3)), 0.0, 1.0, &o).unwrap();
        assert!((r.value - 1.0 / 0.3).abs() < 1e-9, "{}", r.value);
        let r = integrate_half_line(ok(|x: f64| (-x).exp()), &[1.0], &o).unwrap();
        assert!((r.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_negate() {
        let o = QuadOptions::default();
        let r = tanh_sinh(ok(|x| x), 1.0, 0.0, &o).unwrap();
        assert!((r.value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let o = QuadOptions::default();
        let r = tanh_sinh(ok(|x| if x > 0.5 { f64::NAN } else { 1.0 }), 0.0, 1.0, &o);
        assert!(r.is_err());
    }
}
