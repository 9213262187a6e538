//! Method-of-moments estimation from log waiting times.
//!
//! Both generalizations have closed-form mean, variance and third central
//! moment of ln T. Generalization I solves the variance and skewness
//! equations for (nu, delta) and then reads lambda from the mean;
//! Generalization II inverts its equations algebraically.

use serde::{Deserialize, Serialize};

use crate::dist::{GenIIParams, GenIParams};
use crate::error::{Error, Result};
use crate::numeric::brent;
use crate::process::Model;
use crate::specfun::{digamma, polygamma, EULER_GAMMA, PI_SQ_OVER_6, ZETA3};

/// Panels of the sign-change scan for nu.
const SCAN_PANELS: usize = 64;
/// Upper end of the unconstrained nu search. The moment equations stay
/// well defined past 1 even though no distribution exists there.
pub const NU_SEARCH_MAX: f64 = 5.0;

/// Mean, variance and third central moment of ln(samples), all with denominator n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogMomentSummary {
    pub n: usize,
    pub mean_log: f64,
    pub var_log: f64,
    pub mu3_log: f64,
}

pub fn log_moment_summary(samples: &[f64]) -> Result<LogMomentSummary> {
    if samples.len() < 3 {
        return Err(Error::domain(format!("need at least 3 samples, got {}", samples.len())));
    }
    if let Some((i, &x)) = samples.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!("sample {i} is not a positive finite number: {x}")));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|x| x.ln()).sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for x in samples {
        let d = x.ln() - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    Ok(LogMomentSummary {
        n: samples.len(),
        mean_log: mean,
        var_log: m2 / n,
        mu3_log: m3 / n,
    })
}

/// Population log-moments (mean, variance, mu3) of a Generalization I waiting time.
///
/// Defined for any nu > 0 so that unconstrained estimates can be scored.
pub fn gen1_log_moments(nu: f64, delta: f64, lambda: f64) -> Result<(f64, f64, f64)> {
    let mean = EULER_GAMMA * (1.0 / nu - 1.0) + (digamma(delta)? - lambda.ln()) / nu;
    let var = PI_SQ_OVER_6 * (1.0 / (nu * nu) - 1.0) + polygamma(1, delta)? / (nu * nu);
    let nu3 = nu * nu * nu;
    let mu3 = (polygamma(2, delta)? - 2.0 * (nu3 - 1.0) * ZETA3) / nu3;
    Ok((mean, var, mu3))
}

/// Population log-moments of a Generalization II waiting time.
pub fn gen2_log_moments(nu: f64, gamma: f64, lambda: f64) -> (f64, f64, f64) {
    let r = nu / gamma;
    let mean = r * (-lambda.ln() / nu - EULER_GAMMA);
    let var = r * r * std::f64::consts::PI.powi(2) * (1.0 / (3.0 * nu * nu) - 1.0 / 6.0);
    let mu3 = -2.0 * ZETA3 * r * r * r;
    (mean, var, mu3)
}

/// Exact population summary for a model, as if from an infinite sample.
pub fn population_summary(model: &Model) -> Result<LogMomentSummary> {
    model.validate()?;
    let (mean_log, var_log, mu3_log) = match model {
        Model::Gen1(p) => gen1_log_moments(p.nu, p.delta, p.lambda)?,
        Model::Gen2(p) => gen2_log_moments(p.nu, p.gamma_exp, p.lambda),
    };
    Ok(LogMomentSummary { n: usize::MAX, mean_log, var_log, mu3_log })
}

/// (nu, delta-or-gamma, lambda) solving the moment equations, before any clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawEstimate {
    pub nu: f64,
    pub shape: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Root-finder iterations (0 for closed forms).
    pub iterations: usize,
    /// nu was clamped to 1.
    pub nu_clamped: bool,
    /// Derivative of the reduced skewness equation at the root; near zero
    /// means nu is poorly determined.
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    /// Admissible parameters: nu in (0, 1].
    pub params: Model,
    /// Solution of the moment equations without the nu <= 1 restriction,
    /// when one exists in (0, NU_SEARCH_MAX].
    pub unconstrained: Option<RawEstimate>,
    /// Variance and third-moment equation residuals at `params`.
    pub residuals: [f64; 2],
    pub residual_norm: f64,
    pub diagnostics: Diagnostics,
}

impl EstimationResult {
    /// (nu, delta or gamma, lambda) of the admissible estimate.
    pub fn triple(&self) -> [f64; 3] {
        match self.params {
            Model::Gen1(p) => [p.nu, p.delta, p.lambda],
            Model::Gen2(p) => [p.nu, p.gamma_exp, p.lambda],
        }
    }
}

/// Solve trigamma(delta) = a for delta > 0 (trigamma decreases from inf to 0).
pub fn inverse_trigamma(a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("trigamma takes only positive values, got {a}")));
    }
    // a delta^2 - delta - 1/2 = 0 from trigamma ~ 1/delta + 1/(2 delta^2)
    let mut d = (1.0 + (1.0 + 2.0 * a).sqrt()) / (2.0 * a);
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..200 {
        let f = polygamma(1, d)? - a;
        if f > 0.0 {
            lo = d;
        } else {
            hi = d;
        }
        if f.abs() <= 4.0 * f64::EPSILON * a {
            return Ok(d);
        }
        let step = f / polygamma(2, d)?;
        let mut next = d - step;
        if !(next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * d };
        }
        if (next - d).abs() <= 1e-16 * d {
            return Ok(next);
        }
        d = next;
    }
    Err(Error::convergence("inverse_trigamma", format!("no convergence for a = {a}")))
}

struct Gen1System {
    var: f64,
    mu3: f64,
}

impl Gen1System {
    /// Smallest nu with trigamma(delta) = nu^2 var - (pi^2/6)(1 - nu^2) > 0.
    fn nu_min(&self) -> f64 {
        (PI_SQ_OVER_6 / (self.var + PI_SQ_OVER_6)).sqrt()
    }

    fn delta(&self, nu: f64) -> Result<f64> {
        inverse_trigamma(nu * nu * self.var - PI_SQ_OVER_6 * (1.0 - nu * nu))
    }

    /// Third-moment equation with delta eliminated, times nu^3.
    fn g(&self, nu: f64) -> Result<f64> {
        let nu3 = nu * nu * nu;
        let base = -2.0 * (nu3 - 1.0) * ZETA3 - nu3 * self.mu3;
        if nu <= self.nu_min() {
            // delta -> inf and tetragamma -> 0
            return Ok(base);
        }
        Ok(polygamma(2, self.delta(nu)?)? + base)
    }

    /// Root of g on (nu_min, hi] by sign-change scan and Brent refinement.
    /// `Err(true)` if g stays positive (root beyond hi), `Err(false)` if it
    /// stays negative.
    fn solve(&self, hi: f64) -> Result<std::result::Result<(f64, usize), bool>> {
        let lo = self.nu_min();
        let h = (hi - lo) / SCAN_PANELS as f64;
        let mut a = lo;
        let mut ga = self.g(a)?;
        if ga < 0.0 {
            // g decreases in nu over the attainable range, so nothing lies to the right
            let mut any_positive = false;
            for i in 1..=SCAN_PANELS {
                if self.g(lo + h * i as f64)? > 0.0 {
                    any_positive = true;
                    break;
                }
            }
            if !any_positive {
                return Ok(Err(false));
            }
        }
        for i in 1..=SCAN_PANELS {
            let b = if i == SCAN_PANELS { hi } else { lo + h * i as f64 };
            let gb = self.g(b)?;
            if ga == 0.0 && a > lo {
                return Ok(Ok((a, 0)));
            }
            if ga.signum() != gb.signum() || gb == 0.0 {
                let mut failure = None;
                let root = brent(
                    |x| match self.g(x) {
                        Ok(v) => v,
                        Err(e) => {
                            failure = Some(e);
                            f64::NAN
                        }
                    },
                    a,
                    b,
                    1e-15,
                    200,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                return match root {
                    Some(r) => Ok(Ok((r.x, r.iterations))),
                    None => Err(Error::convergence("estimate_gen1", "Brent iteration failed")),
                };
            }
            a = b;
            ga = gb;
        }
        Ok(Err(ga > 0.0))
    }

    fn slope(&self, nu: f64) -> f64 {
        let h = 1e-6 * nu;
        match (self.g(nu + h), self.g((nu - h).max(self.nu_min()))) {
            (Ok(a), Ok(b)) => (a - b) / (nu + h - (nu - h).max(self.nu_min())),
            _ => f64::NAN,
        }
    }
}

fn gen1_lambda(mean: f64, nu: f64, delta: f64) -> Result<f64> {
    Ok((-(nu * (mean - EULER_GAMMA * (1.0 / nu - 1.0)) - digamma(delta)?)).exp())
}

fn require_spread(s: &LogMomentSummary) -> Result<()> {
    if !(s.var_log > 0.0) || !s.var_log.is_finite() || !s.mean_log.is_finite() || !s.mu3_log.is_finite() {
        return Err(Error::NoSolution(format!(
            "log waiting times need positive finite variance, got {}",
            s.var_log
        )));
    }
    Ok(())
}

/// Generalization I estimator.
///
/// For fixed nu the variance equation fixes delta through inverse trigamma;
/// the remaining scalar equation in nu is bracketed by a 64-panel scan and
/// refined by Brent's method. If the root lies beyond 1, `params` is clamped
/// to nu = 1 (delta re-solved there) and flagged, while `unconstrained`
/// keeps the root.
pub fn estimate_gen1(summary: &LogMomentSummary) -> Result<EstimationResult> {
    require_spread(summary)?;
    let sys = Gen1System { var: summary.var_log, mu3: summary.mu3_log };
    let unconstrained = match sys.solve(NU_SEARCH_MAX)? {
        Ok((nu, _)) => {
            let delta = sys.delta(nu)?;
            Some(RawEstimate { nu, shape: delta, lambda: gen1_lambda(summary.mean_log, nu, delta)? })
        }
        Err(_) => None,
    };
    let (nu, iterations, clamped) = match sys.solve(1.0)? {
        Ok((nu, it)) => (nu, it, false),
        Err(true) => (1.0, 0, true),
        Err(false) => {
            return Err(Error::NoSolution(format!(
                "third central moment {} is not attainable with variance {} (nu > {:.6} required)",
                summary.mu3_log,
                summary.var_log,
                sys.nu_min()
            )))
        }
    };
    let delta = sys.delta(nu)?;
    let lambda = gen1_lambda(summary.mean_log, nu, delta)?;
    let params = GenIParams::new(nu, delta, lambda)?;
    let (_, v, m3) = gen1_log_moments(nu, delta, lambda)?;
    let residuals = [v - summary.var_log, m3 - summary.mu3_log];
    Ok(EstimationResult {
        params: Model::Gen1(params),
        unconstrained,
        residuals,
        residual_norm: residuals[0].hypot(residuals[1]),
        diagnostics: Diagnostics { iterations, nu_clamped: clamped, slope: sys.slope(nu) },
    })
}

/// How the sign of gamma is chosen in the Generalization II estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSign {
    /// sign(gamma) = -sign(mu3), as the population third moment dictates.
    #[default]
    SignRule,
    /// Always positive, taking gamma as the positive square root.
    Positive,
}

pub fn estimate_gen2(summary: &LogMomentSummary) -> Result<EstimationResult> {
    estimate_gen2_with(summary, GammaSign::SignRule)
}

/// Closed-form Generalization II estimator:
/// c = |mu3|^{2/3} / var, nu = sqrt(c pi^2 / (3 [(2 zeta3)^{2/3} + c pi^2/6])),
/// |gamma| = nu pi sqrt(1/(3 nu^2) - 1/6) / sd, lambda = exp(-(mean gamma + eta nu)).
pub fn estimate_gen2_with(summary: &LogMomentSummary, sign: GammaSign) -> Result<EstimationResult> {
    require_spread(summary)?;
    if summary.mu3_log == 0.0 {
        return Err(Error::Degenerate("third central moment is zero; the sign of gamma is indeterminate".into()));
    }
    let pi2 = std::f64::consts::PI.powi(2);
    let sd = summary.var_log.sqrt();
    let c = summary.mu3_log.abs().powf(2.0 / 3.0) / summary.var_log;
    let raw_nu = (c * pi2 / (3.0 * ((2.0 * ZETA3).powf(2.0 / 3.0) + c * pi2 / 6.0))).sqrt();
    let sgn = match sign {
        GammaSign::SignRule => -summary.mu3_log.signum(),
        GammaSign::Positive => 1.0,
    };
    let gamma_for = |nu: f64| sgn * nu * std::f64::consts::PI * (1.0 / (3.0 * nu * nu) - 1.0 / 6.0).sqrt() / sd;
    let lambda_for = |nu: f64, g: f64| (-(summary.mean_log * g + EULER_GAMMA * nu)).exp();
    let raw_gamma = gamma_for(raw_nu);
    let unconstrained = Some(RawEstimate {
        nu: raw_nu,
        shape: raw_gamma,
        lambda: lambda_for(raw_nu, raw_gamma),
    });
    let clamped = raw_nu > 1.0;
    let nu = raw_nu.min(1.0);
    let g = gamma_for(nu);
    let lambda = lambda_for(nu, g);
    let params = GenIIParams::new(nu, g, lambda)?;
    let (_, v, m3) = gen2_log_moments(nu, g, lambda);
    let residuals = [v - summary.var_log, m3 - summary.mu3_log];
    Ok(EstimationResult {
        params: Model::Gen2(params),
        unconstrained,
        residuals,
        residual_norm: residuals[0].hypot(residuals[1]),
        diagnostics: Diagnostics { iterations: 0, nu_clamped: clamped, slope: f64::NAN },
    })
}

/// Estimate the parameters of `model`'s family from observed waiting times.
pub fn estimate_from_samples(samples: &[f64], gen1: bool, sign: GammaSign) -> Result<EstimationResult> {
    let s = log_moment_summary(samples)?;
    if gen1 {
        estimate_gen1(&s)
    } else {
        estimate_gen2_with(&s, sign)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summaries() {
        let c = log_moment_summary(&[2.5; 5]).unwrap();
        assert!((c.mean_log - 2.5f64.ln()).abs() < 1e-15);
        assert_eq!(c.var_log, 0.0);
        assert_eq!(c.mu3_log, 0.0);
        let e = std::f64::consts::E;
        let s = log_moment_summary(&[e, e * e, e, e * e]).unwrap();
        assert!((s.mean_log - 1.5).abs() < 1e-15);
        assert!((s.var_log - 0.25).abs() < 1e-15);
        assert!(s.mu3_log.abs() < 1e-15);
        assert!(log_moment_summary(&[1.0, 0.0, 2.0]).is_err());
        assert!(log_moment_summary(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn trigamma_inverse() {
        for &d in &[1e-3, 0.05, 0.5, 1.0, 3.0, 40.0, 1e4] {
            let a = polygamma(1, d).unwrap();
            let back = inverse_trigamma(a).unwrap();
            assert!((back - d).abs() < 1e-12 * d, "{d} {back}");
        }
    }

    #[test]
    fn gen1_round_trips() {
        for &(nu, d, l) in &[(1.0, 1.0, 1.0), (0.5, 0.5, 0.5), (0.3, 2.0, 1.0), (0.8, 1.0, 0.5)] {
            let s = population_summary(&Model::Gen1(GenIParams::new(nu, d, l).unwrap())).unwrap();
            let r = estimate_gen1(&s).unwrap();
            let [a, b, c] = r.triple();
            assert!((a - nu).abs() < 1e-8 && (b - d).abs() < 1e-8 && (c - l).abs() < 1e-8, "{nu} {d} {l}: {a} {b} {c}");
            assert!(r.residual_norm < 1e-10);
        }
    }

    #[test]
    fn gen1_clamps_beyond_one() {
        // moments of an 'nu = 1.1' waiting time
        let (m, v, m3) = gen1_log_moments(1.1, 0.5, 0.8).unwrap();
        let s = LogMomentSummary { n: 100, mean_log: m, var_log: v, mu3_log: m3 };
        let r = estimate_gen1(&s).unwrap();
        assert!(r.diagnostics.nu_clamped);
        assert_eq!(r.triple()[0], 1.0);
        let u = r.unconstrained.unwrap();
        assert!((u.nu - 1.1).abs() < 1e-8 && (u.shape - 0.5).abs() < 1e-8 && (u.lambda - 0.8).abs() < 1e-8);
    }

    #[test]
    fn gen2_round_trips_and_sign_rule() {
        for &(nu, g, l) in &[(1.0, 1.0, 1.0), (0.5, -0.5, 1.0), (0.8, 5.0, 0.5), (0.3, -1.0, 1.0)] {
            let s = population_summary(&Model::Gen2(GenIIParams::new(nu, g, l).unwrap())).unwrap();
            let [a, b, c] = estimate_gen2(&s).unwrap().triple();
            assert!((a - nu).abs() < 1e-8 && (b - g).abs() < 1e-8 && (c - l).abs() < 1e-8, "{a} {b} {c}");
        }
        let s = population_summary(&Model::Gen2(GenIIParams::new(0.5, -0.5, 1.0).unwrap())).unwrap();
        assert!(estimate_gen2_with(&s, GammaSign::Positive).unwrap().triple()[1] > 0.0);
    }

    #[test]
    fn degenerate_inputs() {
        let zero = LogMomentSummary { n: 10, mean_log: 0.0, var_log: 0.0, mu3_log: 0.0 };
        assert!(matches!(estimate_gen1(&zero), Err(Error::NoSolution(_))));
        let flat = LogMomentSummary { n: 10, mean_log: 0.0, var_log: 1.0, mu3_log: 0.0 };
        assert!(matches!(estimate_gen2(&flat), Err(Error::Degenerate(_))));
    }
}
