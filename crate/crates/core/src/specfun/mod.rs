//! Special functions: the Mittag-Leffler family, digamma/polygamma and the
//! constants used by the moment estimators.

mod mittag_leffler;
mod mp;
mod polygamma;

pub use mittag_leffler::{
    evaluate, evaluate_scaled, mittag_leffler, mittag_leffler_1, mittag_leffler_2, Evaluation, PrabhakarArgs, Route,
    Z_MAX,
};
pub use polygamma::{digamma, polygamma};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Riemann zeta function at 3 (Apery's constant).
pub const ZETA3: f64 = 1.202_056_903_159_594_3;
/// pi^2 / 6 = zeta(2) = trigamma(1).
pub const PI_SQ_OVER_6: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// The constants appearing in the log-moment estimating equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub euler_gamma: f64,
    pub zeta3: f64,
    pub pi_sq_over6: f64,
}

pub const CONSTANTS: Constants = Constants {
    euler_gamma: EULER_GAMMA,
    zeta3: ZETA3,
    pi_sq_over6: PI_SQ_OVER_6,
};

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln |Gamma(x)|` together with the sign of `Gamma(x)`.
pub fn ln_gamma_sign(x: f64) -> (f64, f64) {
    let (v, s) = libm::lgamma_r(x);
    (v, if s < 0 { -1.0 } else { 1.0 })
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// True when `x` is one of the poles 0, -1, -2, ... of the Gamma function.
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Reciprocal Gamma function, entire: zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return 0.0;
    }
    if x > 0.0 && x < 170.0 {
        return 1.0 / libm::tgamma(x);
    }
    let (lg, s) = ln_gamma_sign(x);
    s * (-lg).exp()
}

/// `ln |1/Gamma(x)|` and its sign; `(-inf, 0)` at the poles.
pub(crate) fn ln_rgamma_sign(x: f64) -> (f64, f64) {
    if is_gamma_pole(x) {
        return (f64::NEG_INFINITY, 0.0);
    }
    let (lg, s) = ln_gamma_sign(x);
    (-lg, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_match_their_definitions() {
        assert!((CONSTANTS.euler_gamma - 0.577_215_66).abs() < 1e-8);
        assert!((polygamma(1, 1.0).unwrap() - CONSTANTS.pi_sq_over6).abs() < 1e-12);
        assert!((polygamma(2, 1.0).unwrap() + 2.0 * CONSTANTS.zeta3).abs() < 1e-12);
        assert!((digamma(1.0).unwrap() + CONSTANTS.euler_gamma).abs() < 1e-12);
    }

    #[test]
    fn reciprocal_gamma_poles_and_reflection() {
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        assert!((rgamma(0.5) - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        // 1/Gamma(-0.5) = -1/(2 sqrt(pi))
        assert!((rgamma(-0.5) + 0.5 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!((rgamma(172.5) * 171.5 - rgamma(171.5)).abs() < 1e-12 * rgamma(171.5));
    }
}
