//! Discretized primal and dual linear programs for the expectation bounds,
//! the guaranteed-inner primal variant, and gap-driven refinement.
//!
//! After the cumulative-sum change of variables the primal is a chain
//! program solved exactly in O(N); the explicit dual rows are kept and
//! solved by the dense simplex so the pair can audit each other.

use crate::chain::solve_chain;
use crate::error::{Error, Result};
use crate::objective::{ObjectiveFn, Shape};
use crate::pbox::{Curve, PBox};
use crate::result::{BoundsResult, Method};
use crate::simplex::{solve_lp, Constraint, ConstraintOp, LpSolution, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Lower,
    Upper,
}

/// Point-placement policy for the sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Uniform,
    /// Equal level increments on both bounding curves, with geometric tail
    /// coverage; the default.
    QuantileSpaced,
    /// Quantile-spaced plus the declared extrema and a cluster around each.
    ShapeAware,
}

/// Sample N points with positive upper CDF and lower CDF below one.
pub fn sample_points(
    pbox: &PBox,
    shape: &Shape,
    sampler: Sampler,
    n: usize,
) -> Result<Vec<f64>> {
    let n = n.max(2);
    let (lo, hi) = pbox.domain();
    let mut points: Vec<f64> = Vec::with_capacity(n + 64);
    match sampler {
        Sampler::Uniform => {
            for i in 1..=n {
                points.push(lo + (hi - lo) * i as f64 / (n + 1) as f64);
            }
        }
        Sampler::QuantileSpaced | Sampler::ShapeAware => {
            // half the budget on level quantiles of both curves, half spread
            // evenly in x: the quantiles resolve the mass structure, the
            // even points keep steep stretches of h covered in the tails
            let quarter = (n / 4).max(1);
            let mut push_level = |g: f64| -> Result<()> {
                points.push(pbox.quantile(Curve::Upper, g)?);
                points.push(pbox.quantile(Curve::Lower, g)?);
                Ok(())
            };
            // smoothstep-spaced levels cluster quadratically at both ends
            for i in 1..=quarter {
                let t = i as f64 / (quarter + 1) as f64;
                push_level(t * t * (3.0 - 2.0 * t))?;
            }
            // geometric endcap levels down to the truncation tail
            let mut t = 0.5 / ((quarter * quarter) as f64);
            while t > 1e-9 {
                push_level(t)?;
                push_level(1.0 - t)?;
                t *= 0.5;
            }
            let even = n - 2 * quarter.min(n / 2);
            for i in 1..=even {
                points.push(lo + (hi - lo) * i as f64 / (even + 1) as f64);
            }
            if sampler == Sampler::ShapeAware {
                let cluster = |points: &mut Vec<f64>, at: f64| {
                    let d = (hi - lo) / (4.0 * n as f64);
                    for k in -3i32..=3 {
                        points.push(at + k as f64 * d);
                    }
                };
                match shape {
                    Shape::UnimodalMax(a) | Shape::UnimodalMin(a) => cluster(&mut points, *a),
                    Shape::Alternating(ext) => {
                        for e in ext {
                            cluster(&mut points, e.location);
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    points.retain(|&x| x > lo && x < hi);
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (hi - lo));
    if points.is_empty() {
        return Err(Error::Domain("no usable sample points".into()));
    }
    Ok(points)
}

/// Assembled primal program in the cumulative variables.
#[derive(Debug, Clone)]
pub struct DiscretizedPrimal {
    pub points: Vec<f64>,
    pub objective: Vec<f64>,
    /// Partial-sum lower bounds; shifted one point right in the inner variant.
    pub lower_bounds: Vec<f64>,
    /// Partial-sum upper bounds; the last is lifted to 1, standing for the
    /// band constraint in the limit past the last sample.
    pub upper_bounds: Vec<f64>,
    pub target: Target,
    pub inner_variant: bool,
}

pub fn build_primal(
    pbox: &PBox,
    h: &ObjectiveFn,
    points: &[f64],
    target: Target,
    inner_variant: bool,
) -> Result<DiscretizedPrimal> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Domain("empty point set".into()));
    }
    for w in points.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Domain(format!(
                "points must strictly increase (at {})",
                w[1]
            )));
        }
    }
    let fl: Vec<f64> = points
        .iter()
        .map(|&x| pbox.eval_cdf(Curve::Lower, x))
        .collect::<Result<_>>()?;
    let fu: Vec<f64> = points
        .iter()
        .map(|&x| pbox.eval_cdf(Curve::Upper, x))
        .collect::<Result<_>>()?;
    for i in 0..n {
        if fu[i] <= 0.0 || fl[i] >= 1.0 {
            return Err(Error::Domain(format!(
                "point {} (x={}) leaves no band freedom: F_upper={}, F_lower={}",
                i, points[i], fu[i], fl[i]
            )));
        }
    }
    let lower_bounds: Vec<f64> = if inner_variant {
        let shifted: Vec<f64> =
            (0..n).map(|i| if i + 1 < n { fl[i + 1] } else { 1.0 }).collect();
        // feasibility against the raw band: the membership argument needs
        // F_upper(x_i) >= F_lower(x_{i+1}); at the last point, reaching 1
        // within the truncation tolerance stands in for the limit
        for i in 0..n {
            let slack = if i + 1 == n { 1e-6 } else { 1e-12 };
            if fu[i] < shifted[i] - slack {
                return Err(Error::Infeasible(format!(
                    "inner variant infeasible at point {i} (x={}): F_upper={} < shifted lower {}",
                    points[i], fu[i], shifted[i]
                )));
            }
        }
        shifted
    } else {
        fl
    };
    let mut upper_bounds = fu;
    upper_bounds[n - 1] = 1.0;
    // keep the band ordered under roundoff after the lift
    let lower_bounds: Vec<f64> = lower_bounds
        .iter()
        .zip(&upper_bounds)
        .map(|(&l, &u)| l.min(u))
        .collect();
    let objective: Vec<f64> = points.iter().map(|&x| h.value(x)).collect();
    Ok(DiscretizedPrimal {
        points: points.to_vec(),
        objective,
        lower_bounds,
        upper_bounds,
        target,
        inner_variant,
    })
}

/// Solution of the discretized primal: the bound plus the optimal weights.
#[derive(Debug, Clone)]
pub struct PrimalSolution {
    pub value: f64,
    /// Optimal point masses z_k (a discrete distribution).
    pub weights: Vec<f64>,
    /// Optimal cumulative sums.
    pub cumulative: Vec<f64>,
}

/// Optimal objective of the assembled primal via the chain solver.
pub fn primal_bound(built: &DiscretizedPrimal) -> Result<PrimalSolution> {
    let n = built.points.len();
    let sign = match built.target {
        Target::Lower => 1.0,
        Target::Upper => -1.0,
    };
    // Abel summation: sum h_k z_k = sum_{k<N} s_k (h_k - h_{k+1}) + h_N
    let mut c = vec![0.0f64; n];
    for k in 0..n - 1 {
        c[k] = sign * (built.objective[k] - built.objective[k + 1]);
    }
    let mut l = built.lower_bounds.clone();
    let mut u = built.upper_bounds.clone();
    for i in 0..n {
        l[i] = l[i].clamp(0.0, 1.0);
        u[i] = u[i].clamp(0.0, 1.0);
    }
    // total mass is one
    l[n - 1] = 1.0;
    u[n - 1] = 1.0;
    let sol = solve_chain(&c[..n], &l, &u)?;
    let value = sign * (sol.objective + sign * built.objective[n - 1]);
    let mut weights = Vec::with_capacity(n);
    let mut prev = 0.0;
    for &s in &sol.s {
        weights.push((s - prev).max(0.0));
        prev = s;
    }
    Ok(PrimalSolution {
        value,
        weights,
        cumulative: sol.s,
    })
}

/// Midpoints y_i = (x_{i-1} + x_i)/2 with x_0 at the domain start.
pub fn midpoints(pbox: &PBox, points: &[f64]) -> Vec<f64> {
    let (lo, _) = pbox.domain();
    let mut prev = lo;
    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        out.push(0.5 * (prev + x));
        prev = x;
    }
    out.dedup_by(|a, b| a == b);
    out
}

/// Dual value at the midpoints of the given grid. Strong duality lets the
/// chain solver produce the optimum exactly; `dual_bound_via_simplex` solves
/// the explicit dual rows instead and is used to audit this path.
pub fn dual_bound(
    pbox: &PBox,
    h: &ObjectiveFn,
    points: &[f64],
    target: Target,
) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Domain("dual needs at least two points".into()));
    }
    let mids = midpoints(pbox, points);
    let built = build_primal(pbox, h, &mids, target, false)?;
    Ok(primal_bound(&built)?.value)
}

/// Explicit dual program, solved with the dense simplex:
/// max c0 + sum(d_i Fl(y_i) - c_i Fu(y_i)) subject to
/// c0 + sum_{k>=i}(d_k - c_k) <= h(y_i).
pub fn dual_bound_via_simplex(
    pbox: &PBox,
    h: &ObjectiveFn,
    points: &[f64],
    target: Target,
) -> Result<LpSolution> {
    let mids = midpoints(pbox, points);
    let n = mids.len();
    let fl: Vec<f64> = mids
        .iter()
        .map(|&y| pbox.eval_cdf(Curve::Lower, y))
        .collect::<Result<_>>()?;
    let mut fu: Vec<f64> = mids
        .iter()
        .map(|&y| pbox.eval_cdf(Curve::Upper, y))
        .collect::<Result<_>>()?;
    // same lift as the primal: the final band constraint is the limit at
    // the right end, else the dual is unbounded along c0 + c_N
    fu[n - 1] = 1.0;
    let hy: Vec<f64> = mids.iter().map(|&y| h.value(y)).collect();
    let sign = match target {
        Target::Lower => 1.0,
        Target::Upper => -1.0,
    };
    // variables: [c0, c_1..c_N, d_1..d_N]; minimize the negated objective
    let nv = 1 + 2 * n;
    let mut cost = vec![0.0f64; nv];
    cost[0] = -1.0;
    for i in 0..n {
        cost[1 + i] = fu[i];
        cost[1 + n + i] = -fl[i];
    }
    let mut cons = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![0.0f64; nv];
        row[0] = 1.0;
        for k in i..n {
            row[1 + k] = -1.0;
            row[1 + n + k] = 1.0;
        }
        cons.push(Constraint::new(row, ConstraintOp::Le, sign * hy[i]));
    }
    let mut sol = solve_lp(&cost, &cons, &[0])?;
    match sol.status {
        LpStatus::Optimal => {
            sol.objective = sign * -sol.objective;
            Ok(sol)
        }
        LpStatus::Unbounded => Err(Error::Unbounded(
            "dual program unbounded: degenerate point placement".into(),
        )),
        LpStatus::Infeasible => Err(Error::Infeasible("dual program infeasible".into())),
    }
}

const POINT_CAP: usize = 1 << 16;

/// Grow the grid until |E* - E**| <= epsilon for both bounds.
pub fn refine_lp(
    pbox: &PBox,
    h: &ObjectiveFn,
    shape: &Shape,
    epsilon: f64,
    n0: usize,
    sampler: Sampler,
) -> Result<BoundsResult> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain("epsilon must be positive".into()));
    }
    let mut n = n0.max(4);
    loop {
        let points = sample_points(pbox, shape, sampler, n)?;
        let lo_primal =
            primal_bound(&build_primal(pbox, h, &points, Target::Lower, false)?)?.value;
        let up_primal =
            primal_bound(&build_primal(pbox, h, &points, Target::Upper, false)?)?.value;
        let lo_dual = dual_bound(pbox, h, &points, Target::Lower)?;
        let up_dual = dual_bound(pbox, h, &points, Target::Upper)?;
        let gap_lo = (lo_primal - lo_dual).abs();
        let gap_up = (up_primal - up_dual).abs();
        let done = gap_lo <= epsilon && gap_up <= epsilon;
        let capped = n >= POINT_CAP;
        if done || capped {
            let mut res = BoundsResult::new(
                Method::Lp,
                lo_primal.min(up_primal),
                up_primal.max(lo_primal),
            )
            .with_size(points.len());
            res.detail("e_star_lower", lo_primal);
            res.detail("e_dstar_lower", lo_dual);
            res.detail("e_star_upper", up_primal);
            res.detail("e_dstar_upper", up_dual);
            res.detail("gap_lower", gap_lo);
            res.detail("gap_upper", gap_up);
            // guaranteed-inner values when the shifted program is feasible
            match build_primal(pbox, h, &points, Target::Lower, true)
                .and_then(|b| primal_bound(&b))
            {
                Ok(inner) => res.detail("inner_lower", inner.value),
                Err(e) => res.warn(format!("inner variant unavailable: {e}")),
            }
            if let Ok(inner) = build_primal(pbox, h, &points, Target::Upper, true)
                .and_then(|b| primal_bound(&b))
            {
                res.detail("inner_upper", inner.value);
            }
            if capped && !done {
                res.warn(format!(
                    "point cap {POINT_CAP} reached with gaps {gap_lo:.3e}/{gap_up:.3e}"
                ));
            }
            return Ok(res);
        }
        n *= 2;
    }
}
