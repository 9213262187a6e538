//! State probabilities and count moments.

use std::f64::consts::LN_2;

use rug::Float;

use super::StatePmf;
use crate::dist::{gml_cdf, GenIParams};
use crate::error::{Error, Result};
use crate::specfun::{evaluate_scaled, gamma, ln_gamma, mittag_leffler_1, PrabhakarArgs};

/// Tail mass below which the automatic truncation stops.
pub const TAIL_TOL: f64 = 1e-10;
const MAX_K: usize = 1 << 20;
const MEAN_MAX_TERMS: usize = 10_000;

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("t must be nonnegative and finite, got {t}")))
    }
}

/// p_k(t) = Pr{T_k <= t} - Pr{T_{k+1} <= t} for k = 0..K.
///
/// With `k_max = None`, K starts at 16 and doubles until Pr{T_{K+1} <= t},
/// which is exactly the mass beyond K, drops below 1e-10.
pub fn state_pmf(p: &GenIParams, t: f64, k_max: Option<usize>) -> Result<StatePmf> {
    p.validate()?;
    check_time(t)?;
    if t == 0.0 {
        let k = k_max.unwrap_or(0);
        let mut probs = vec![0.0; k + 1];
        probs[0] = 1.0;
        return Ok(StatePmf { t, probs, tail_bound: 0.0, std_errors: None });
    }
    // cdfs[k] = Pr{T_k <= t}
    let mut cdfs = vec![1.0];
    let extend_to = |cdfs: &mut Vec<f64>, n: usize| -> Result<()> {
        while cdfs.len() <= n {
            let k = cdfs.len() as f64;
            // once the arrival CDF underflows every later one does too
            let c = if *cdfs.last().unwrap() == 0.0 { 0.0 } else { gml_cdf(p.nu, p.delta * k, p.lambda, t)? };
            cdfs.push(c);
        }
        Ok(())
    };
    let k = match k_max {
        Some(k) => {
            extend_to(&mut cdfs, k + 1)?;
            k
        }
        None => {
            let mut k = 16;
            loop {
                extend_to(&mut cdfs, k + 1)?;
                if cdfs[k + 1] < TAIL_TOL {
                    break k;
                }
                if k >= MAX_K {
                    return Err(Error::convergence(
                        "state_pmf",
                        format!("tail mass {} beyond k = {k}", cdfs[k + 1]),
                    ));
                }
                k *= 2;
            }
        }
    };
    let probs = (0..=k).map(|i| (cdfs[i] - cdfs[i + 1]).max(0.0)).collect();
    Ok(StatePmf { t, probs, tail_bound: cdfs[k + 1], std_errors: None })
}

fn check_fpp(nu: f64, lambda: f64, t: f64) -> Result<()> {
    GenIParams::new(nu, 1.0, lambda)?;
    check_time(t)
}

/// Fractional Poisson state probability p_k(t) = (lambda t^nu)^k E^{k+1}_{nu, nu k + 1}(-lambda t^nu).
pub fn fpp_state_pmf(nu: f64, lambda: f64, t: f64, k: u32) -> Result<f64> {
    check_fpp(nu, lambda, t)?;
    if t == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let ln_x = lambda.ln() + nu * t.ln();
    let kf = k as f64;
    let args = PrabhakarArgs::new(nu, nu * kf + 1.0, kf + 1.0, -ln_x.exp());
    Ok(evaluate_scaled(args, kf * ln_x)?.value.clamp(0.0, 1.0))
}

/// The same probability from the double series
/// (x^k / k!) sum_r (r+k)!/r! (-x)^r / Gamma(nu (r+k) + 1), x = lambda t^nu,
/// summed directly in multiprecision arithmetic.
pub fn fpp_state_pmf_double_series(nu: f64, lambda: f64, t: f64, k: u32) -> Result<f64> {
    check_fpp(nu, lambda, t)?;
    if t == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let x = lambda * t.powf(nu);
    let kf = k as f64;
    // float scan of ln|term| for the working precision
    let lead = kf * x.ln() - ln_gamma(kf + 1.0);
    let mut max_ln = f64::NEG_INFINITY;
    let mut peak = 0usize;
    let mut r = 0usize;
    loop {
        let rf = r as f64;
        let l = lead + ln_gamma(rf + kf + 1.0) - ln_gamma(rf + 1.0) + rf * x.ln() - ln_gamma(nu * (rf + kf) + 1.0);
        if l > max_ln {
            max_ln = l;
            peak = r;
        }
        if r > peak + 2 && l < max_ln - 60.0 {
            break;
        }
        r += 1;
        if r > 1_000_000 {
            return Err(Error::convergence("fpp double series", "scan did not terminate"));
        }
    }
    let mut guess = lead - ln_gamma(nu * kf + 1.0) + ln_gamma(kf + 1.0);
    for _ in 0..8 {
        let bits = ((max_ln - guess).max(0.0) / LN_2 + 80.0).ceil();
        if bits > 50_000.0 {
            return Err(Error::convergence("fpp double series", "precision budget exceeded"));
        }
        let prec = bits as u32;
        let mut ratio = Float::with_val(prec, 1); // (r+k)!/(r! k!)
        let mut zpow = Float::with_val(prec, 1);
        let mut sum = Float::with_val(prec, 0);
        let mut small = 0;
        let mut r = 0u32;
        loop {
            if r > 0 {
                ratio *= r + k;
                ratio /= r;
                zpow *= -x;
            }
            let mut g = Float::with_val(prec, nu);
            g *= r + k;
            g += 1u32;
            g.gamma_mut();
            let mut term = Float::with_val(prec, &ratio * &zpow);
            term /= &g;
            sum += &term;
            let negligible = match (term.get_exp(), sum.get_exp()) {
                (None, _) => true,
                (Some(a), Some(b)) => a < b - 80,
                _ => false,
            };
            if r as usize > peak && negligible {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
            r += 1;
        }
        let pow = Float::with_val(prec, rug::ops::Pow::pow(Float::with_val(prec, x), k));
        sum *= &pow;
        if sum.is_zero() {
            guess -= 64.0 * LN_2;
            continue;
        }
        let ln_abs = Float::with_val(64, sum.abs_ref()).ln().to_f64();
        if ln_abs >= guess - 8.0 * LN_2 {
            return Ok(sum.to_f64());
        }
        guess = ln_abs - 4.0 * LN_2;
    }
    Err(Error::convergence("fpp double series", "cancellation estimate did not stabilise"))
}

/// E N(t) = sum_{r >= 0} Pr{T_{r+1} <= t}.
pub fn mean_count(p: &GenIParams, t: f64) -> Result<f64> {
    Ok(mean_count_detail(p, t)?.value)
}

/// Mean count with the truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCount {
    pub value: f64,
    pub terms: usize,
    pub remainder: f64,
}

impl MeanCount {
    pub fn of(p: &GenIParams, t: f64) -> Result<MeanCount> {
        mean_count_detail(p, t)
    }
}

fn mean_count_detail(p: &GenIParams, t: f64) -> Result<MeanCount> {
    p.validate()?;
    check_time(t)?;
    if t == 0.0 {
        return Ok(MeanCount { value: 0.0, terms: 0, remainder: 0.0 });
    }
    let mut sum = 0.0;
    let mut prev = f64::NAN;
    let mut small = 0;
    for r in 0..MEAN_MAX_TERMS {
        let c = gml_cdf(p.nu, p.delta * (r + 1) as f64, p.lambda, t)?;
        sum += c;
        // terms are decreasing in r; bound the rest geometrically by the last ratio
        let q = if prev > 0.0 { c / prev } else { 1.0 };
        let remainder = if c == 0.0 {
            0.0
        } else if q < 1.0 {
            c * q / (1.0 - q)
        } else {
            f64::INFINITY
        };
        if c <= 1e-14 * sum {
            small += 1;
            if small >= 3 && remainder < TAIL_TOL {
                return Ok(MeanCount { value: sum, terms: r + 1, remainder });
            }
        } else {
            small = 0;
        }
        prev = c;
    }
    Err(Error::convergence(
        "mean_count",
        format!("{MEAN_MAX_TERMS} outer terms were not enough at t = {t}"),
    ))
}

/// Var N(t) for the fractional Poisson process:
/// x/Gamma(nu+1) + x^2 [1/(nu Gamma(2 nu)) - 1/Gamma(nu+1)^2], x = lambda t^nu.
pub fn fpp_count_variance(nu: f64, lambda: f64, t: f64) -> Result<f64> {
    check_fpp(nu, lambda, t)?;
    let x = lambda * t.powf(nu);
    let g1 = gamma(nu + 1.0);
    Ok(x / g1 + x * x * (1.0 / (nu * gamma(2.0 * nu)) - 1.0 / (g1 * g1)))
}

/// E e^{-s N(t)} = E_nu(lambda (e^{-s} - 1) t^nu).
pub fn fpp_mgf(nu: f64, lambda: f64, s: f64, t: f64) -> Result<f64> {
    check_fpp(nu, lambda, t)?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("s must be nonnegative, got {s}")));
    }
    mittag_leffler_1(nu, lambda * (-s).exp_m1() * t.powf(nu))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(nu: f64, d: f64, l: f64) -> GenIParams {
        GenIParams::new(nu, d, l).unwrap()
    }

    #[test]
    fn poisson_collapse() {
        let pmf = state_pmf(&p(1.0, 1.0, 1.0), 2.0, None).unwrap();
        for (k, &pk) in pmf.probs.iter().enumerate() {
            let expect = (-2f64).exp() * 2f64.powi(k as i32) / gamma(k as f64 + 1.0);
            assert!((pk - expect).abs() < 1e-12, "{k}");
        }
        assert!((pmf.probs[2] - 0.270_670_566_473_225_4).abs() < 1e-12);
        assert!(pmf.tail_bound < TAIL_TOL);
        let total: f64 = pmf.probs.iter().sum::<f64>() + pmf.tail_bound;
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn initial_condition() {
        let pmf = state_pmf(&p(0.5, 0.7, 1.0), 0.0, Some(3)).unwrap();
        assert_eq!(pmf.probs, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn fpp_representations_agree() {
        for &nu in &[0.5, 0.7, 0.9] {
            for &x in &[0.1, 1.0, 5.0] {
                for k in 0..=20 {
                    let a = fpp_state_pmf(nu, x, 1.0, k).unwrap();
                    let b = fpp_state_pmf_double_series(nu, x, 1.0, k).unwrap();
                    assert!((a - b).abs() < 1e-12, "{nu} {x} {k}: {a} {b}");
                }
            }
        }
        assert!((fpp_state_pmf(1.0, 1.0, 1.0, 0).unwrap() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gen1_pmf_matches_fpp_at_delta_one() {
        let pmf = state_pmf(&p(0.5, 1.0, 1.0), 1.0, Some(5)).unwrap();
        for k in 0..=5 {
            let f = fpp_state_pmf(0.5, 1.0, 1.0, k as u32).unwrap();
            assert!((pmf.probs[k] - f).abs() < 1e-12);
        }
    }

    #[test]
    fn means() {
        assert!((mean_count(&p(1.0, 1.0, 3.0), 2.0).unwrap() - 6.0).abs() < 1e-9);
        let m = mean_count(&p(0.5, 1.0, 1.0), 1.0).unwrap();
        assert!((m - 1.0 / gamma(1.5)).abs() < 1e-9, "{m}");
        let q = p(0.6, 1.4, 0.7);
        let m = mean_count(&q, 2.0).unwrap();
        let pmf = state_pmf(&q, 2.0, None).unwrap();
        assert!((m - pmf.mean()).abs() < 1e-8);
        assert_eq!(mean_count(&q, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn variance_and_mgf() {
        assert!((fpp_count_variance(1.0, 2.0, 3.0).unwrap() - 6.0).abs() < 1e-12);
        assert!((fpp_count_variance(0.5, 1.0, 1.0).unwrap() - 1.855_139_622_360_35).abs() < 1e-12);
        let pmf = state_pmf(&p(0.6, 1.0, 1.2), 1.5, None).unwrap();
        let mean = pmf.mean();
        let m2: f64 = pmf.probs.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum();
        let v = fpp_count_variance(0.6, 1.2, 1.5).unwrap();
        assert!((m2 - mean * mean - v).abs() < 1e-7, "{} vs {v}", m2 - mean * mean);
        assert_eq!(fpp_mgf(0.5, 1.0, 0.0, 1.0).unwrap(), 1.0);
        let s = 0.5;
        let pmf = state_pmf(&p(0.5, 1.0, 1.0), 1.0, None).unwrap();
        let direct: f64 = pmf.probs.iter().enumerate().map(|(k, p)| (-s * k as f64).exp() * p).sum();
        assert!((fpp_mgf(0.5, 1.0, s, 1.0).unwrap() - direct).abs() < 1e-9);
        let poisson = (2.0 * (-s).exp_m1() * 1.5).exp();
        assert!((fpp_mgf(1.0, 2.0, s, 1.5).unwrap() - poisson).abs() < 1e-14);
    }

    #[test]
    fn volterra_recursion() {
        use crate::process::prabhakar_integral;
        for &(nu, d) in &[(0.6, 0.8), (0.9, 1.5)] {
            let q = p(nu, d, 1.0);
            for &t in &[0.5, 1.0, 2.0] {
                let pmf = state_pmf(&q, t, Some(4)).unwrap();
                for k in 1..=3usize {
                    let prev = |w: f64| -> Result<f64> {
                        let a = if k == 1 { 1.0 } else { gml_cdf(nu, d * (k - 1) as f64, 1.0, w)? };
                        Ok(a - gml_cdf(nu, d * k as f64, 1.0, w)?)
                    };
                    let v = prabhakar_integral(nu, nu * d, d, -1.0, prev, t).unwrap();
                    assert!((v - pmf.probs[k]).abs() < 1e-8, "{nu} {d} {t} {k}: {v} {}", pmf.probs[k]);
                }
            }
        }
    }

    #[test]
    fn riemann_liouville_reduction() {
        use crate::process::prabhakar_integral;
        let (mu, x) = (0.7, 1.3);
        let v = prabhakar_integral(0.5, mu, 0.0, 3.0, |_| Ok(1.0), x).unwrap();
        assert!((v - x.powf(mu) / gamma(mu + 1.0)).abs() < 1e-12);
    }
}
