//! Stieltjes expectation pieces against one bounding CDF, in both the
//! x parameterization (density form) and the level parameterization
//! (quantile form). The two routes are kept independent so they can
//! cross-check each other.

use crate::error::Result;
use crate::numerics::{integrate, QuadResult, Tolerance};
use crate::objective::ObjectiveFn;
use crate::pbox::{Curve, PBox};

/// Integral of h dF over [xa, xb] in the x form, using the curve's density.
pub fn expect_x_form(
    pbox: &PBox,
    which: Curve,
    h: &ObjectiveFn,
    xa: f64,
    xb: f64,
    tol: &Tolerance,
) -> Result<QuadResult> {
    let (dlo, dhi) = pbox.domain();
    let a = xa.clamp(dlo, dhi);
    let b = xb.clamp(dlo, dhi);
    let spec = pbox.spec(which);
    let scale = dhi - dlo;
    // density lookups cannot fail for in-domain x except on malformed
    // expressions, which PBox::new() has already rejected
    let f = |x: f64| h.value(x) * spec.density(x, scale).unwrap_or(0.0);
    Ok(integrate(f, a, b, tol))
}

/// Integral of h dF over [xa, xb] rewritten as an integral over levels:
/// from F(xa) to F(xb) of h(F^{-1}(g)) dg.
pub fn expect_gamma_form(
    pbox: &PBox,
    which: Curve,
    h: &ObjectiveFn,
    xa: f64,
    xb: f64,
    tol: &Tolerance,
) -> Result<QuadResult> {
    let ga = pbox.eval_cdf(which, xa)?;
    let gb = pbox.eval_cdf(which, xb)?;
    expect_gamma_range(pbox, which, h, ga, gb, tol)
}

/// Integral over levels [ga, gb] of h(F^{-1}(g)) dg for one curve.
pub fn expect_gamma_range(
    pbox: &PBox,
    which: Curve,
    h: &ObjectiveFn,
    ga: f64,
    gb: f64,
    tol: &Tolerance,
) -> Result<QuadResult> {
    let f = |g: f64| {
        let x = pbox
            .quantile(which, g.clamp(0.0, 1.0))
            .unwrap_or(pbox.domain().1);
        h.value(x)
    };
    Ok(integrate(f, ga, gb, tol))
}
