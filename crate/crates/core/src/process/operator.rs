//! Prabhakar integral operator by quadrature.

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::specfun::{mittag_leffler, PrabhakarArgs};

/// int_0^x (x-y)^{mu-1} E^xi_{rho,mu}(omega (x-y)^rho) f(y) dy.
///
/// The interval is split at x/2 so that each half has its singular endpoint
/// on the left, where the distance to it is exact in floating point: the
/// kernel half is written in the lag w = x - y and flattened by u = w^mu, the
/// other half keeps y, where `f` may itself be singular at 0.
pub fn prabhakar_integral<F>(rho: f64, mu: f64, xi: f64, omega: f64, mut f: F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(rho > 0.0 && mu > 0.0) {
        return Err(Error::domain(format!("rho and mu must be positive, got {rho}, {mu}")));
    }
    if !(x >= 0.0 && x.is_finite() && xi.is_finite() && omega.is_finite()) {
        return Err(Error::domain("x must be nonnegative and finite"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let kernel = |w: f64| mittag_leffler(PrabhakarArgs::new(rho, mu, xi, omega * w.powf(rho)));
    let opts = QuadOptions::with_tolerances(1e-11, 1e-12);
    let h = 0.5 * x;

    // w in (0, h]: (1/mu) int_0^{h^mu} E(omega w^rho) f(x - w) du, w = u^{1/mu}
    let near = quad::integrate(
        |u: f64| {
            let w = u.powf(1.0 / mu);
            Ok(kernel(w)? * f(x - w)?)
        },
        0.0,
        h.powf(mu),
        &opts,
    )?;
    // y in (0, h]
    let far = quad::integrate(
        |y: f64| {
            let w = x - y;
            Ok(w.powf(mu - 1.0) * kernel(w)? * f(y)?)
        },
        0.0,
        h,
        &opts,
    )?;
    Ok(near.value / mu + far.value)
}
