//! Multiprecision power series for the Prabhakar function.
//!
//! The working precision is chosen from a floating-point scan of the term
//! magnitudes: bits lost to cancellation are roughly
//! log2(max_r |t_r|) - log2|E|, and |E| is refined until the guess holds.

use std::f64::consts::LN_2;

use rug::Float;

use super::{ln_gamma_sign, ln_rgamma_sign};
use crate::error::{Error, Result};

const GUARD_BITS: f64 = 64.0;
const MAX_BITS: u32 = 40_000;
const MAX_TERMS: usize = 400_000;
/// Cap on bits * terms, a proxy for the cost of the evaluation.
const MAX_WORK: f64 = 4e9;

struct Scan {
    max_ln: f64,
    first_ln: f64,
    peak: usize,
    terms: usize,
}

fn scan(beta: f64, gamma: f64, xi: f64, z: f64) -> Scan {
    let ln_x = z.abs().ln();
    let lg_xi = if xi > 0.0 { ln_gamma_sign(xi).0 } else { 0.0 };
    let mut poch_ln = 0.0;
    let mut max_ln = f64::NEG_INFINITY;
    let mut first_ln = f64::NAN;
    let mut peak = 0;
    let mut r = 0usize;
    loop {
        let rf = r as f64;
        if r > 0 {
            if xi > 0.0 {
                poch_ln = ln_gamma_sign(xi + rf).0 - lg_xi;
            } else {
                let factor = xi + rf - 1.0;
                if factor == 0.0 {
                    break;
                }
                poch_ln += factor.abs().ln();
            }
        }
        let l = poch_ln - ln_gamma_sign(rf + 1.0).0 + ln_rgamma_sign(beta * rf + gamma).0 + rf * ln_x;
        if first_ln.is_nan() {
            first_ln = l;
        }
        if l > max_ln {
            max_ln = l;
            peak = r;
        }
        r += 1;
        if (r > peak + 2 && l < max_ln - 60.0) || r >= MAX_TERMS {
            break;
        }
    }
    Scan {
        max_ln,
        first_ln,
        peak,
        terms: r,
    }
}

fn sum_at(beta: f64, gamma: f64, xi: f64, z: f64, prec: u32, peak: usize) -> Result<Float> {
    let mut poch = Float::with_val(prec, 1);
    let mut zpow = Float::with_val(prec, 1);
    let mut fact = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 0);
    let mut small_run = 0;
    for r in 0..MAX_TERMS {
        if r > 0 {
            let mut factor = Float::with_val(prec, xi);
            factor += (r - 1) as u32;
            if factor.is_zero() {
                return Ok(sum);
            }
            poch *= &factor;
            zpow *= z;
            fact *= r as u32;
        }
        let mut g = Float::with_val(prec, beta);
        g *= r as u32;
        g += gamma;
        g.gamma_mut();
        let mut t = Float::with_val(prec, &poch * &zpow);
        t /= &fact;
        t /= &g;
        sum += &t;
        let negligible = match (t.get_exp(), sum.get_exp()) {
            (None, _) => true,
            (Some(et), Some(es)) => et < es - 80,
            (Some(_), None) => false,
        };
        if r > peak && negligible {
            small_run += 1;
            if small_run >= 3 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::convergence("multiprecision series", "term budget exhausted"))
}

/// Sum the series at adaptive precision. Returns the value and an error estimate.
pub(super) fn series(beta: f64, gamma: f64, xi: f64, z: f64, ln_scale: f64) -> Result<(f64, f64)> {
    let s = scan(beta, gamma, xi, z);
    let mut guess_ln = s.first_ln;
    for _ in 0..10 {
        let bits = ((s.max_ln - guess_ln).max(0.0) / LN_2 + GUARD_BITS).ceil();
        if bits > MAX_BITS as f64 || bits * s.terms as f64 > MAX_WORK {
            return Err(Error::convergence(
                "multiprecision series",
                format!("required precision of {bits} bits over {} terms exceeds the budget", s.terms),
            ));
        }
        let mut sum = sum_at(beta, gamma, xi, z, bits as u32, s.peak)?;
        if sum.is_zero() {
            guess_ln -= 64.0 * LN_2;
            continue;
        }
        let ln_abs = Float::with_val(64, sum.abs_ref()).ln().to_f64();
        if ln_abs >= guess_ln - 8.0 * LN_2 {
            if ln_scale != 0.0 {
                let scale = Float::with_val(sum.prec(), ln_scale).exp();
                sum *= &scale;
            }
            let value = sum.to_f64();
            return Ok((value, value.abs() * 2f64.powi(-60)));
        }
        guess_ln = ln_abs - 4.0 * LN_2;
    }
    Err(Error::convergence(
        "multiprecision series",
        "cancellation estimate did not stabilise",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_with_heavy_cancellation() {
        let (v, _) = series(1.0, 1.0, 1.0, -40.0, 0.0).unwrap();
        assert!(((v - (-40f64).exp()) / (-40f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn positive_axis() {
        let (v, _) = series(1.0, 1.0, 1.0, 3.0, 0.0).unwrap();
        assert!((v - 3f64.exp()).abs() < 1e-13 * 3f64.exp());
    }
}
