//! Root finding and quadrature shared by every engine.

use crate::error::{Error, Result};

/// Tolerances used across root finding and quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Absolute x-tolerance for root brackets.
    pub abs_x: f64,
    /// Absolute residual tolerance |f(x)|.
    pub abs_f: f64,
    /// Relative tolerance for adaptive quadrature.
    pub quad_rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_x: 1e-12,
            abs_f: 1e-12,
            quad_rel: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        if self.abs_x > 0.0 && self.abs_f > 0.0 && self.quad_rel > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain("tolerances must be strictly positive".into()))
        }
    }
}

/// Quadrature value together with an accuracy flag.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// True when the recursion depth cap was hit somewhere.
    pub depth_exhausted: bool,
}

/// Bracketed root search: bisection with a secant step whenever the secant
/// point falls safely inside the current bracket.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: &Tolerance) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{a}, {b}]: f(lo)={fa}, f(hi)={fb}"
        )));
    }
    for _ in 0..200 {
        if (b - a).abs() <= tol.abs_x {
            break;
        }
        // secant candidate, else midpoint
        let mut x = if (fb - fa).abs() > f64::MIN_POSITIVE {
            b - fb * (b - a) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        let margin = 0.01 * (b - a).abs();
        if !(x > a.min(b) + margin && x < a.max(b) - margin) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 || fx.abs() <= tol.abs_f {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}

/// All roots on [lo, hi]: bisection on every sign-change cell of a scan grid,
/// sorted and deduplicated within `abs_x`. Grid points that are exact zeros
/// count as roots.
pub fn find_all_roots<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    scan_size: usize,
    tol: &Tolerance,
) -> Vec<f64> {
    let n = scan_size.max(8);
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_x = lo;
    let mut prev_v = f(lo);
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = f(x);
        if prev_v == 0.0 {
            roots.push(prev_x);
        } else if prev_v.signum() != v.signum() && v != 0.0 {
            if let Ok(r) = find_root(&f, prev_x, x, tol) {
                roots.push(r);
            }
        }
        prev_x = x;
        prev_v = v;
    }
    if prev_v == 0.0 {
        roots.push(prev_x);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= tol.abs_x.max(1e-15));
    roots
}

const QUAD_ABS_FLOOR: f64 = 1e-12;
const QUAD_MAX_DEPTH: usize = 48;

/// Adaptive Simpson quadrature with the classic |S2 - S1| <= 15 eps test and
/// Richardson correction.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: &Tolerance) -> QuadResult {
    if lo == hi {
        return QuadResult {
            value: 0.0,
            depth_exhausted: false,
        };
    }
    let (a, b) = (lo, hi);
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = (tol.quad_rel * whole.abs()).max(QUAD_ABS_FLOOR);
    let mut exhausted = false;
    let value = simpson_rec(
        &f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        eps,
        QUAD_MAX_DEPTH,
        &mut exhausted,
    );
    QuadResult {
        value,
        depth_exhausted: exhausted,
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: usize,
    exhausted: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 {
        *exhausted = true;
        return left + right + delta / 15.0;
    }
    if delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1, exhausted)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1, exhausted)
}

/// Golden-section minimization on [lo, hi] to x-tolerance `tol_x`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol_x: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol_x {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
