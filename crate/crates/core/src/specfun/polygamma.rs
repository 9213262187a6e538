use crate::error::{Error, Result};

/// Shift arguments up to this point before applying the asymptotic series.
/// At 10 the first neglected digamma term, 691/(32760 tau^12), is below 1e-13.
const SHIFT_TO: f64 = 10.0;

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("tau must be positive and finite, got {tau}")))
    }
}

/// Asymptotic expansion of the digamma function, accurate for large `tau`.
fn digamma_expansion(tau: f64) -> f64 {
    let r = 1.0 / tau;
    let r2 = r * r;
    tau.ln()
        - 0.5 * r
        - r2 * (1.0 / 12.0
            - r2 * (1.0 / 120.0 - r2 * (1.0 / 252.0 - r2 * (1.0 / 240.0 - r2 / 132.0))))
}

/// Digamma function psi(tau) for tau > 0.
///
/// Uses psi(tau) = psi(tau + 1) - 1/tau to move the argument past 10, then
/// the asymptotic series ln tau - 1/(2 tau) - sum_k B_2k / (2k tau^2k).
pub fn digamma(tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let mut x = tau;
    let mut shift = 0.0;
    while x < SHIFT_TO {
        shift += 1.0 / x;
        x += 1.0;
    }
    Ok(digamma_expansion(x) - shift)
}

fn trigamma(tau: f64) -> f64 {
    let mut x = tau;
    let mut shift = 0.0;
    while x < SHIFT_TO {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        + 0.5 * r2
        + r * r2
            * (1.0 / 6.0
                - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * 5.0 / 66.0))));
    series + shift
}

fn tetragamma(tau: f64) -> f64 {
    let mut x = tau;
    let mut shift = 0.0;
    while x < SHIFT_TO {
        shift += 2.0 / (x * x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    let series = -r2
        - r * r2
        - r2 * r2
            * (0.5 - r2 * (1.0 / 6.0 - r2 * (1.0 / 6.0 - r2 * (3.0 / 10.0 - r2 * 5.0 / 6.0))));
    series - shift
}

/// Polygamma function psi^(n)(tau) for n = 1 (trigamma) and n = 2 (tetragamma).
pub fn polygamma(n: u32, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    match n {
        1 => Ok(trigamma(tau)),
        2 => Ok(tetragamma(tau)),
        _ => Err(Error::domain(format!("polygamma order must be 1 or 2, got {n}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{EULER_GAMMA, PI_SQ_OVER_6, ZETA3};
    use proptest::prelude::*;

    #[test]
    fn digamma_known_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-12);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-12);
        // psi(1/2) = -gamma - 2 ln 2
        let half = -EULER_GAMMA - 2.0 * 2f64.ln();
        assert!((digamma(0.5).unwrap() - half).abs() < 1e-11);
    }

    #[test]
    fn digamma_at_ten_is_the_bare_expansion() {
        // psi(10) = H_9 - gamma
        let h9: f64 = (1..=9).map(|k| 1.0 / k as f64).sum();
        let exact = h9 - EULER_GAMMA;
        let bare = digamma_expansion(10.0);
        assert!((bare - exact).abs() < 1e-10);
        assert_eq!(digamma(10.0).unwrap(), bare);
    }

    #[test]
    fn polygamma_known_values() {
        assert!((polygamma(1, 1.0).unwrap() - PI_SQ_OVER_6).abs() < 1e-12);
        assert!((polygamma(2, 1.0).unwrap() + 2.0 * ZETA3).abs() < 1e-12);
    }

    #[test]
    fn trigamma_half_matches_brute_force_series() {
        // oracle: direct partial sum of 1/(0.5+k)^2 with an integral tail correction
        let n = 1_000_000usize;
        let mut s = 0.0;
        for k in (0..n).rev() {
            let d = 0.5 + k as f64;
            s += 1.0 / (d * d);
        }
        let a = 0.5 + n as f64;
        s += 1.0 / a + 0.5 / (a * a) + 1.0 / (6.0 * a * a * a);
        let v = polygamma(1, 0.5).unwrap();
        assert!((v - s).abs() < 1e-9, "{v} vs {s}");
        // and the closed form pi^2/2
        assert!((v - 3.0 * PI_SQ_OVER_6).abs() < 1e-11);
    }

    #[test]
    fn domain_errors() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.0).is_err());
        assert!(polygamma(3, 1.0).is_err());
        assert!(polygamma(1, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn recurrences_hold(tau in 0.05f64..50.0) {
            let d = digamma(tau + 1.0).unwrap() - digamma(tau).unwrap();
            prop_assert!((d - 1.0 / tau).abs() < 1e-10 * (1.0 + 1.0 / tau));
            let t = polygamma(1, tau + 1.0).unwrap() - polygamma(1, tau).unwrap();
            prop_assert!((t + 1.0 / (tau * tau)).abs() < 1e-10 * (1.0 + 1.0 / (tau * tau)));
            let q = polygamma(2, tau + 1.0).unwrap() - polygamma(2, tau).unwrap();
            prop_assert!((q - 2.0 / tau.powi(3)).abs() < 1e-10 * (1.0 + 2.0 / tau.powi(3)));
        }
    }
}
