//! Closed-form extremizing distributions and expectation bounds for
//! monotone, unimodal, and alternating-extrema objectives.

use crate::error::{Error, Result};
use crate::integrals::{expect_gamma_form, expect_x_form};
use crate::numerics::{find_all_roots, Tolerance};
use crate::objective::{Extremum, ExtremumKind, ObjectiveFn, Shape};
use crate::pbox::{Curve, PBox};
use crate::result::{BoundsResult, Method};

/// Which parameterization the closed-form integrals use. The two routes are
/// independent and cross-check each other in the tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralRoute {
    GammaForm,
    XForm,
}

/// One piece of an extremizing distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// F(x) = F_upper(x) on [from, to].
    FollowUpper { from: f64, to: f64 },
    /// F(x) = F_lower(x) on [from, to].
    FollowLower { from: f64, to: f64 },
    /// F(x) = level on [from, to].
    Constant { level: f64, from: f64, to: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct Jump {
    pub at: f64,
    pub mass: f64,
}

/// Piecewise description of the optimizing distribution: band-following and
/// constant segments plus point masses.
#[derive(Debug, Clone, Default)]
pub struct ExtremizingCdf {
    pub segments: Vec<Segment>,
    pub jumps: Vec<Jump>,
}

impl ExtremizingCdf {
    fn push_segment(&mut self, seg: Segment) {
        let (from, to) = match seg {
            Segment::FollowUpper { from, to }
            | Segment::FollowLower { from, to }
            | Segment::Constant { from, to, .. } => (from, to),
        };
        if to - from > 1e-13 * (1.0 + to.abs()) {
            self.segments.push(seg);
        }
    }

    fn push_jump(&mut self, at: f64, mass: f64) {
        if mass > 1e-15 {
            self.jumps.push(Jump { at, mass });
        }
    }

    /// Integral of h against this distribution (segment pieces by the level
    /// parameterization, jumps as point masses).
    pub fn expectation(&self, pbox: &PBox, h: &ObjectiveFn, tol: &Tolerance) -> Result<f64> {
        let mut total = 0.0;
        for seg in &self.segments {
            match *seg {
                Segment::FollowUpper { from, to } => {
                    total += expect_gamma_form(pbox, Curve::Upper, h, from, to, tol)?.value;
                }
                Segment::FollowLower { from, to } => {
                    total += expect_gamma_form(pbox, Curve::Lower, h, from, to, tol)?.value;
                }
                Segment::Constant { .. } => {}
            }
        }
        for j in &self.jumps {
            total += j.mass * h.value(j.at);
        }
        Ok(total)
    }

    fn span(seg: &Segment) -> (f64, f64) {
        match *seg {
            Segment::FollowUpper { from, to }
            | Segment::FollowLower { from, to }
            | Segment::Constant { from, to, .. } => (from, to),
        }
    }

    /// F(x) for trace export. Jumps sit at segment boundaries; after the last
    /// segment the reached level holds.
    pub fn eval(&self, pbox: &PBox, x: f64) -> Result<f64> {
        let mut level = 0.0f64;
        let mut ji = 0usize;
        for seg in &self.segments {
            let (from, to) = Self::span(seg);
            while ji < self.jumps.len() && self.jumps[ji].at <= from + 1e-12 {
                if self.jumps[ji].at <= x {
                    level += self.jumps[ji].mass;
                }
                ji += 1;
            }
            if x < from {
                return Ok(level.clamp(0.0, 1.0));
            }
            let at = x.min(to);
            level = match *seg {
                Segment::FollowUpper { .. } => pbox.eval_cdf(Curve::Upper, at)?,
                Segment::FollowLower { .. } => pbox.eval_cdf(Curve::Lower, at)?,
                Segment::Constant { level, .. } => level,
            };
            if x <= to {
                return Ok(level.clamp(0.0, 1.0));
            }
        }
        while ji < self.jumps.len() {
            if self.jumps[ji].at <= x {
                level += self.jumps[ji].mass;
            }
            ji += 1;
        }
        Ok(level.clamp(0.0, 1.0))
    }

    /// Verify the assembled levels never decrease along the merged
    /// segment-and-jump walk.
    pub fn check_monotone(&self, pbox: &PBox) -> Result<()> {
        let mut level = 0.0f64;
        let mut ji = 0usize;
        for seg in &self.segments {
            let (from, to) = Self::span(seg);
            while ji < self.jumps.len() && self.jumps[ji].at <= from + 1e-12 {
                level += self.jumps[ji].mass;
                ji += 1;
            }
            let (start, end) = match *seg {
                Segment::FollowUpper { .. } => (
                    pbox.eval_cdf(Curve::Upper, from)?,
                    pbox.eval_cdf(Curve::Upper, to)?,
                ),
                Segment::FollowLower { .. } => (
                    pbox.eval_cdf(Curve::Lower, from)?,
                    pbox.eval_cdf(Curve::Lower, to)?,
                ),
                Segment::Constant { level, .. } => (level, level),
            };
            if start < level - 1e-9 {
                return Err(Error::InternalConsistency(format!(
                    "extremizing cdf level drops from {level} to {start} at x={from}"
                )));
            }
            if end < start - 1e-9 {
                return Err(Error::InternalConsistency(format!(
                    "segment on [{from}, {to}] decreases from {start} to {end}"
                )));
            }
            level = end.max(level);
        }
        Ok(())
    }

    /// Verify every sampled point of the covered span lies inside the band.
    /// A truncated assembly holds its last level past the final segment, so
    /// only the span the segments tile is meaningful.
    pub fn check_in_band(&self, pbox: &PBox, grid: usize) -> Result<()> {
        let (lo, hi) = match (self.segments.first(), self.segments.last()) {
            (Some(first), Some(last)) => (Self::span(first).0, Self::span(last).1),
            _ => return Ok(()),
        };
        let n = grid.max(2);
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let v = self.eval(pbox, x)?;
            let fl = pbox.eval_cdf(Curve::Lower, x)?;
            let fu = pbox.eval_cdf(Curve::Upper, x)?;
            if v < fl - 1e-7 || v > fu + 1e-7 {
                return Err(Error::InternalConsistency(format!(
                    "extremizing cdf leaves the band at x={x}: F={v}, band=[{fl}, {fu}]"
                )));
            }
        }
        Ok(())
    }
}

/// Solved level of the flat stretch of an extremizing distribution.
#[derive(Debug, Clone, Copy)]
pub struct AlphaLevel {
    pub value: f64,
    pub interval_index: usize,
    pub bracket: (f64, f64),
    pub residual: f64,
}

/// Root of h(max(Fu^{-1}(a), clamp_lo)) = h(min(Fl^{-1}(a), clamp_hi)) inside
/// [F_lower(peak), F_upper(peak)]. Roots whose flat stretch misses the peak,
/// or with coinciding quantiles, are rejected; among survivors the smallest
/// residual wins.
pub fn solve_alpha(
    pbox: &PBox,
    h: &ObjectiveFn,
    peak: f64,
    clamp: (f64, f64),
    tol: &Tolerance,
) -> Result<AlphaLevel> {
    let g_lo = pbox.eval_cdf(Curve::Lower, peak)?;
    let g_hi = pbox.eval_cdf(Curve::Upper, peak)?;
    let (c_lo, c_hi) = clamp;
    let phi = |g: f64| -> f64 {
        let a = pbox.quantile(Curve::Upper, g).unwrap_or(c_lo).max(c_lo);
        let b = pbox.quantile(Curve::Lower, g).unwrap_or(c_hi).min(c_hi);
        h.value(a) - h.value(b)
    };
    if g_hi - g_lo <= 1e-9 {
        // pinched bracket: the flat level is pinned by the band itself
        let value = 0.5 * (g_lo + g_hi);
        return Ok(AlphaLevel {
            value,
            interval_index: 0,
            bracket: (g_lo, g_hi),
            residual: phi(value).abs(),
        });
    }
    let mut candidates = find_all_roots(&phi, g_lo, g_hi, 512, tol);
    for end in [g_lo, g_hi] {
        if phi(end).abs() <= 1e-10 {
            candidates.push(end);
        }
    }
    let scale = 1e-9 * (1.0 + c_hi.abs().max(c_lo.abs()));
    let mut best: Option<AlphaLevel> = None;
    for root in candidates {
        let a_prime = pbox.quantile(Curve::Upper, root)?.max(c_lo);
        let a_dprime = pbox.quantile(Curve::Lower, root)?.min(c_hi);
        if (a_dprime - a_prime).abs() <= scale {
            continue; // degenerate: both quantiles coincide
        }
        if peak < a_prime - scale || peak > a_dprime + scale {
            continue; // flat stretch does not cover the peak
        }
        let residual = phi(root).abs();
        if best.map_or(true, |b| residual < b.residual) {
            best = Some(AlphaLevel {
                value: root,
                interval_index: 0,
                bracket: (g_lo, g_hi),
                residual,
            });
        }
    }
    best.ok_or_else(|| {
        Error::Bracket(format!(
            "no admissible level in [{g_lo}, {g_hi}] for peak at {peak}; shape may be misdeclared"
        ))
    })
}

fn whole_line_expect(
    pbox: &PBox,
    which: Curve,
    h: &ObjectiveFn,
    route: IntegralRoute,
    tol: &Tolerance,
) -> Result<f64> {
    let (lo, hi) = pbox.domain();
    Ok(match route {
        IntegralRoute::GammaForm => expect_gamma_form(pbox, which, h, lo, hi, tol)?.value,
        IntegralRoute::XForm => expect_x_form(pbox, which, h, lo, hi, tol)?.value,
    })
}

/// Bounds for monotone h: each bound integrates against one named curve.
pub fn bounds_monotone(
    pbox: &PBox,
    h: &ObjectiveFn,
    nondecreasing: bool,
    route: IntegralRoute,
    tol: &Tolerance,
) -> Result<(BoundsResult, (ExtremizingCdf, ExtremizingCdf))> {
    let (lo, hi) = pbox.domain();
    let against_upper = whole_line_expect(pbox, Curve::Upper, h, route, tol)?;
    let against_lower = whole_line_expect(pbox, Curve::Lower, h, route, tol)?;
    let follow_upper = ExtremizingCdf {
        segments: vec![Segment::FollowUpper { from: lo, to: hi }],
        jumps: vec![],
    };
    let follow_lower = ExtremizingCdf {
        segments: vec![Segment::FollowLower { from: lo, to: hi }],
        jumps: vec![],
    };
    let (lower, upper, ex_lo, ex_up) = if nondecreasing {
        (against_upper, against_lower, follow_upper, follow_lower)
    } else {
        (against_lower, against_upper, follow_lower, follow_upper)
    };
    Ok((
        BoundsResult::new(Method::Analytic, lower, upper),
        (ex_lo, ex_up),
    ))
}

/// Bounds for h with one maximum at `peak`.
pub fn bounds_unimodal(
    pbox: &PBox,
    h: &ObjectiveFn,
    peak: f64,
    route: IntegralRoute,
    tol: &Tolerance,
) -> Result<(BoundsResult, (ExtremizingCdf, ExtremizingCdf))> {
    let (lo, hi) = pbox.domain();
    let fl_a = pbox.eval_cdf(Curve::Lower, peak)?;
    let fu_a = pbox.eval_cdf(Curve::Upper, peak)?;

    // upper: all reachable mass concentrated on the peak
    let upper = match route {
        IntegralRoute::XForm => {
            expect_x_form(pbox, Curve::Lower, h, lo, peak, tol)?.value
                + h.value(peak) * (fu_a - fl_a)
                + expect_x_form(pbox, Curve::Upper, h, peak, hi, tol)?.value
        }
        IntegralRoute::GammaForm => {
            crate::integrals::expect_gamma_range(pbox, Curve::Lower, h, 0.0, fl_a, tol)?.value
                + h.value(peak) * (fu_a - fl_a)
                + crate::integrals::expect_gamma_range(pbox, Curve::Upper, h, fu_a, 1.0, tol)?
                    .value
        }
    };

    // lower: horizontal stretch at the solved level avoids the peak
    let alpha = solve_alpha(pbox, h, peak, (lo, hi), tol)?;
    let x_a = pbox.quantile(Curve::Upper, alpha.value)?;
    let x_b = pbox.quantile(Curve::Lower, alpha.value)?;
    let lower = match route {
        IntegralRoute::XForm => {
            expect_x_form(pbox, Curve::Upper, h, lo, x_a, tol)?.value
                + expect_x_form(pbox, Curve::Lower, h, x_b, hi, tol)?.value
        }
        IntegralRoute::GammaForm => {
            crate::integrals::expect_gamma_range(pbox, Curve::Upper, h, 0.0, alpha.value, tol)?
                .value
                + crate::integrals::expect_gamma_range(
                    pbox,
                    Curve::Lower,
                    h,
                    alpha.value,
                    1.0,
                    tol,
                )?
                .value
        }
    };

    let mut ex_up = ExtremizingCdf::default();
    ex_up.push_segment(Segment::FollowLower { from: lo, to: peak });
    ex_up.push_jump(peak, fu_a - fl_a);
    ex_up.push_segment(Segment::FollowUpper { from: peak, to: hi });

    let mut ex_lo = ExtremizingCdf::default();
    ex_lo.push_segment(Segment::FollowUpper { from: lo, to: x_a });
    ex_lo.push_segment(Segment::Constant {
        level: alpha.value,
        from: x_a,
        to: x_b,
    });
    ex_lo.push_segment(Segment::FollowLower { from: x_b, to: hi });

    let mut result = BoundsResult::new(Method::Analytic, lower, upper);
    result.detail("alpha", alpha.value);
    result.detail("alpha_residual", alpha.residual);
    Ok((result, (ex_lo, ex_up)))
}

/// Per-interval record of the alternating-shape construction.
#[derive(Debug, Clone, Copy)]
pub struct IntervalReport {
    pub index: usize,
    pub from: f64,
    pub to: f64,
    pub peak: f64,
    pub alpha: f64,
    pub a_prime: f64,
    pub a_dprime: f64,
    /// Mass of the jump at `to`, available once the next interval is solved.
    pub jump_mass: f64,
    /// Running lower-expectation partial sum through this interval.
    pub partial_sum: f64,
}

#[derive(Debug, Clone)]
pub struct GeneralLower {
    pub bound: f64,
    pub extremizer: ExtremizingCdf,
    pub intervals: Vec<IntervalReport>,
    pub stopped_early: bool,
    pub warnings: Vec<String>,
}

struct IntervalSpec {
    from: f64,
    to: f64,
    peak: f64,
}

/// Split the domain at local minima; every piece carries one maximum. A
/// piece without an interior maximum is monotone, so the higher end acts as
/// its pseudo-peak.
fn build_intervals(h: &ObjectiveFn, domain: (f64, f64), extrema: &[Extremum]) -> Vec<IntervalSpec> {
    let (lo, hi) = domain;
    let minima: Vec<f64> = extrema
        .iter()
        .filter(|e| e.kind == ExtremumKind::Min)
        .map(|e| e.location)
        .collect();
    let maxima: Vec<f64> = extrema
        .iter()
        .filter(|e| e.kind == ExtremumKind::Max)
        .map(|e| e.location)
        .collect();
    let mut bounds = Vec::with_capacity(minima.len() + 2);
    bounds.push(lo);
    bounds.extend(minima.iter().copied());
    bounds.push(hi);

    let mut intervals = Vec::with_capacity(bounds.len() - 1);
    for w in bounds.windows(2) {
        let (from, to) = (w[0], w[1]);
        let peak = maxima
            .iter()
            .copied()
            .find(|&m| from <= m && m <= to)
            .unwrap_or(if h.value(to) >= h.value(from) { to } else { from });
        intervals.push(IntervalSpec { from, to, peak });
    }
    intervals
}

/// Lower expectation for alternating-extrema h: per-interval flat levels,
/// probability masses at local minima, and the summed-mass assembly.
/// Intervals are processed left to right until the partial sums move by at
/// most `epsilon` (always at least two intervals when available).
pub fn bounds_general_lower(
    pbox: &PBox,
    h: &ObjectiveFn,
    extrema: &[Extremum],
    epsilon: f64,
    tol: &Tolerance,
) -> Result<GeneralLower> {
    if epsilon <= 0.0 {
        return Err(Error::Domain("epsilon must be positive".into()));
    }
    let domain = pbox.domain();
    // re-validate alternation and interiority before trusting the list
    Shape::alternating(extrema.to_vec())?;
    for e in extrema {
        if e.location <= domain.0 || e.location >= domain.1 {
            return Err(Error::ShapeDetection(format!(
                "extremum at {} lies outside the open domain ({}, {})",
                e.location, domain.0, domain.1
            )));
        }
    }
    let intervals = build_intervals(h, domain, extrema);
    let n = intervals.len();

    // The total splits into one term per interval level:
    //   g_i(a) = int_{from}^{a'} h dFu + int_{a''}^{to} h dFl
    //            + h(from) min(Fu(from), a) - h(to) max(Fl(to), a),
    // whose derivative is exactly the clamped level equation. The optimal
    // level is therefore a root of that equation or a bracket endpoint,
    // whichever gives the smallest contribution. This also settles the
    // wide-band case, where a fully flat stretch competes with the root.
    let solve_interval = |iv: &IntervalSpec| -> Result<(f64, f64, f64)> {
        let g_lo = pbox.eval_cdf(Curve::Lower, iv.peak)?;
        let g_hi = pbox.eval_cdf(Curve::Upper, iv.peak)?;
        let fu_from = pbox.eval_cdf(Curve::Upper, iv.from)?;
        let fl_to = pbox.eval_cdf(Curve::Lower, iv.to)?;
        let h_from = h.value(iv.from);
        let h_to = h.value(iv.to);
        let ends = |alpha: f64| -> Result<(f64, f64)> {
            let ap = pbox.quantile(Curve::Upper, alpha)?.clamp(iv.from, iv.to);
            let app = pbox.quantile(Curve::Lower, alpha)?.clamp(iv.from, iv.to);
            Ok((ap, app.max(ap)))
        };
        let local = |alpha: f64| -> Result<f64> {
            let (ap, app) = ends(alpha)?;
            let mut v = h_from * fu_from.min(alpha) - h_to * fl_to.max(alpha);
            if ap > iv.from {
                v += expect_gamma_form(pbox, Curve::Upper, h, iv.from, ap, tol)?.value;
            }
            if iv.to > app {
                v += expect_gamma_form(pbox, Curve::Lower, h, app, iv.to, tol)?.value;
            }
            Ok(v)
        };
        let phi = |g: f64| -> f64 {
            let a = pbox.quantile(Curve::Upper, g).unwrap_or(iv.from).max(iv.from);
            let b = pbox.quantile(Curve::Lower, g).unwrap_or(iv.to).min(iv.to);
            h.value(a) - h.value(b)
        };
        let mut candidates = if g_hi - g_lo > 1e-12 {
            crate::numerics::find_all_roots(&phi, g_lo, g_hi, 512, tol)
        } else {
            Vec::new()
        };
        candidates.push(g_lo);
        candidates.push(g_hi);
        let mut best: Option<(f64, f64)> = None;
        for alpha in candidates {
            let v = local(alpha)?;
            if best.map_or(true, |(_, bv)| v < bv) {
                best = Some((alpha, v));
            }
        }
        let (alpha, _) = best.expect("bracket endpoints always evaluated");
        let (ap, app) = ends(alpha)?;
        Ok((alpha, ap, app))
    };

    let mut reports: Vec<IntervalReport> = Vec::new();
    let mut extremizer = ExtremizingCdf::default();
    let mut warnings = Vec::new();
    let mut total = 0.0f64;
    let mut stopped_early = false;

    let mut cur = solve_interval(&intervals[0])?;
    let mut finished = 0usize;
    for i in 0..n {
        let next = if i + 1 < n {
            Some(solve_interval(&intervals[i + 1])?)
        } else {
            None
        };
        let iv = &intervals[i];
        let (alpha, a_prime, a_dprime) = cur;
        let alpha_next = next.map(|c| c.0).unwrap_or(1.0);

        let seg_upper = if a_prime > iv.from {
            expect_gamma_form(pbox, Curve::Upper, h, iv.from, a_prime, tol)?.value
        } else {
            0.0
        };
        let seg_lower = if iv.to > a_dprime {
            expect_gamma_form(pbox, Curve::Lower, h, a_dprime, iv.to, tol)?.value
        } else {
            0.0
        };
        let fu_to = pbox.eval_cdf(Curve::Upper, iv.to)?;
        let fl_to = pbox.eval_cdf(Curve::Lower, iv.to)?;
        let mut jump = fu_to.min(alpha_next) - fl_to.max(alpha);
        if jump < 0.0 {
            if jump > -1e-12 {
                jump = 0.0; // tangent band
            } else {
                return Err(Error::InternalConsistency(format!(
                    "negative jump mass {jump} at x={}; flat levels {alpha} -> {alpha_next}",
                    iv.to
                )));
            }
        }
        total += seg_upper + seg_lower + jump * h.value(iv.to);

        extremizer.push_segment(Segment::FollowUpper {
            from: iv.from,
            to: a_prime,
        });
        extremizer.push_segment(Segment::Constant {
            level: alpha,
            from: a_prime,
            to: a_dprime,
        });
        extremizer.push_segment(Segment::FollowLower {
            from: a_dprime,
            to: iv.to,
        });
        extremizer.push_jump(iv.to, jump);

        reports.push(IntervalReport {
            index: i + 1,
            from: iv.from,
            to: iv.to,
            peak: iv.peak,
            alpha,
            a_prime,
            a_dprime,
            jump_mass: jump,
            partial_sum: total,
        });
        finished = i + 1;

        if i >= 1 {
            let prev = reports[i - 1].partial_sum;
            if (total - prev).abs() <= epsilon && i + 1 < n {
                stopped_early = true;
                break;
            }
        }
        if let Some(c) = next {
            cur = c;
        }
    }
    if stopped_early {
        warnings.push(format!(
            "stopped after {finished} of {n} intervals (partial-sum increment below epsilon)"
        ));
    }

    extremizer.check_monotone(pbox)?;

    Ok(GeneralLower {
        bound: total,
        extremizer,
        intervals: reports,
        stopped_early,
        warnings,
    })
}

/// Both bounds for any declared shape; the upper bound of the alternating
/// case comes from the lower bound of -h with reflected extrema.
pub fn bounds_general(
    pbox: &PBox,
    h: &ObjectiveFn,
    shape: &Shape,
    epsilon: f64,
    tol: &Tolerance,
) -> Result<(BoundsResult, (ExtremizingCdf, ExtremizingCdf))> {
    match shape {
        Shape::Nondecreasing => bounds_monotone(pbox, h, true, IntegralRoute::GammaForm, tol),
        Shape::Nonincreasing => bounds_monotone(pbox, h, false, IntegralRoute::GammaForm, tol),
        Shape::UnimodalMax(a) => bounds_unimodal(pbox, h, *a, IntegralRoute::GammaForm, tol),
        Shape::UnimodalMin(a) => {
            let neg = h.negated();
            let (res, (ex_lo, ex_up)) =
                bounds_unimodal(pbox, &neg, *a, IntegralRoute::GammaForm, tol)?;
            let mut out = BoundsResult::new(Method::Analytic, -res.upper, -res.lower);
            out.details = res.details;
            out.warnings = res.warnings;
            // extremizers swap roles under negation
            Ok((out, (ex_up, ex_lo)))
        }
        Shape::Alternating(extrema) => {
            let low = bounds_general_lower(pbox, h, extrema, epsilon, tol)?;
            let neg = h.negated();
            let reflected = match Shape::Alternating(extrema.clone()).reflected() {
                Shape::Alternating(e) => e,
                _ => unreachable!(),
            };
            let up = bounds_general_lower(pbox, &neg, &reflected, epsilon, tol)?;
            let mut result = BoundsResult::new(Method::Analytic, low.bound, -up.bound);
            for (k, rep) in low.intervals.iter().enumerate() {
                result.detail(format!("alpha_{}", k + 1), rep.alpha);
                result.detail(format!("jump_{}", k + 1), rep.jump_mass);
                result.detail(format!("partial_sum_{}", k + 1), rep.partial_sum);
            }
            for w in low.warnings.iter().chain(up.warnings.iter()) {
                result.warn(w.clone());
            }
            result.size = low.intervals.len();
            Ok((result, (low.extremizer, up.extremizer)))
        }
        Shape::Unknown => Err(Error::ShapeDetection(
            "analytic bounds require a known shape".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::locate_extrema;
    use approx::assert_relative_eq;

    fn example_pbox() -> PBox {
        PBox::exponential(0.2, 0.5).unwrap()
    }

    #[test]
    fn monotone_worked_example() {
        let pb = example_pbox();
        let h = ObjectiveFn::affine(20.0, -1.0);
        let tol = Tolerance::default();
        for route in [IntegralRoute::GammaForm, IntegralRoute::XForm] {
            let (res, (ex_lo, ex_up)) = bounds_monotone(&pb, &h, false, route, &tol).unwrap();
            assert_relative_eq!(res.lower, 15.0, epsilon = 1e-5);
            assert_relative_eq!(res.upper, 18.0, epsilon = 1e-5);
            assert_relative_eq!(ex_lo.expectation(&pb, &h, &tol).unwrap(), 15.0, epsilon = 1e-5);
            assert_relative_eq!(ex_up.expectation(&pb, &h, &tol).unwrap(), 18.0, epsilon = 1e-5);
        }
    }

    #[test]
    fn monotone_negated_identity() {
        // h = -x has bounds (-5, -2): the exponential means flip roles
        let pb = example_pbox();
        let h = ObjectiveFn::affine(0.0, -1.0);
        let tol = Tolerance::default();
        let (res, _) =
            bounds_monotone(&pb, &h, false, IntegralRoute::GammaForm, &tol).unwrap();
        assert_relative_eq!(res.lower, -5.0, epsilon = 1e-5);
        assert_relative_eq!(res.upper, -2.0, epsilon = 1e-5);
    }

    #[test]
    fn alpha_for_quadratic_peak() {
        let pb = example_pbox();
        let h = ObjectiveFn::quadratic_peak(60.0, 5.0);
        let tol = Tolerance::default();
        let (lo, hi) = pb.domain();
        let al = solve_alpha(&pb, &h, 5.0, (lo, hi), &tol).unwrap();
        assert_relative_eq!(al.value, 1.0 - (-10.0_f64 / 7.0).exp(), epsilon = 1e-9);
        assert_relative_eq!(al.value, 0.7603, epsilon = 1e-4);
        assert!(al.residual < 1e-8);
    }

    #[test]
    fn alpha_symmetric_peak_does_not_depend_on_h() {
        // symmetric h about the peak: the level solves a geometric equation,
        // so any strictly increasing transform of -(x-a)^2 gives the same root
        let pb = example_pbox();
        let tol = Tolerance::default();
        let (lo, hi) = pb.domain();
        let h1 = ObjectiveFn::quadratic_peak(60.0, 5.0);
        let h2 = ObjectiveFn::from_fn(|x| -((x - 5.0) * (x - 5.0)).sqrt(), "-|x-5|");
        let a1 = solve_alpha(&pb, &h1, 5.0, (lo, hi), &tol).unwrap();
        let a2 = solve_alpha(&pb, &h2, 5.0, (lo, hi), &tol).unwrap();
        assert_relative_eq!(a1.value, a2.value, epsilon = 1e-8);
    }

    #[test]
    fn unimodal_worked_example_both_routes() {
        let pb = example_pbox();
        let h = ObjectiveFn::quadratic_peak(60.0, 5.0);
        let tol = Tolerance::default();
        for route in [IntegralRoute::GammaForm, IntegralRoute::XForm] {
            let (res, (ex_lo, ex_up)) = bounds_unimodal(&pb, &h, 5.0, route, &tol).unwrap();
            assert_relative_eq!(res.lower, 29.7451253761921, epsilon = 1e-4);
            assert_relative_eq!(res.upper, 52.7372920695809, epsilon = 1e-4);
            ex_lo.check_monotone(&pb).unwrap();
            ex_up.check_monotone(&pb).unwrap();
            ex_lo.check_in_band(&pb, 400).unwrap();
            ex_up.check_in_band(&pb, 400).unwrap();
            assert_relative_eq!(
                ex_lo.expectation(&pb, &h, &tol).unwrap(),
                res.lower,
                epsilon = 1e-4
            );
            assert_relative_eq!(
                ex_up.expectation(&pb, &h, &tol).unwrap(),
                res.upper,
                epsilon = 1e-4
            );
        }
    }

    #[test]
    fn unimodal_on_degenerate_pbox_is_precise_mean() {
        // E[60 - (X-5)^2] for X ~ exp(0.2): 60 - (Var + (mean-5)^2) = 35
        let pb = PBox::degenerate(crate::pbox::CdfSpec::exponential(0.2).unwrap()).unwrap();
        let h = ObjectiveFn::quadratic_peak(60.0, 5.0);
        let tol = Tolerance::default();
        let (res, _) = bounds_unimodal(&pb, &h, 5.0, IntegralRoute::GammaForm, &tol).unwrap();
        assert_relative_eq!(res.lower, 35.0, epsilon = 1e-3);
        assert_relative_eq!(res.upper, 35.0, epsilon = 1e-3);
    }

    #[test]
    fn unimodal_far_peak_matches_monotone() {
        // peak pushed past the support: unimodal formulas degrade to the
        // nondecreasing case
        let pb = example_pbox();
        let hi = pb.domain().1;
        let peak = hi - 1e-9;
        let h = ObjectiveFn::from_fn(move |x| -(x - peak) * (x - peak), "far peak");
        let tol = Tolerance::default();
        let (uni, _) = bounds_unimodal(&pb, &h, peak, IntegralRoute::GammaForm, &tol).unwrap();
        let (mono, _) = bounds_monotone(&pb, &h, true, IntegralRoute::GammaForm, &tol).unwrap();
        assert_relative_eq!(uni.lower, mono.lower, epsilon = 1e-3);
        assert_relative_eq!(uni.upper, mono.upper, epsilon = 1e-3);
    }

    #[test]
    fn general_lower_oscillating_example() {
        let pb = example_pbox();
        let h = ObjectiveFn::scaled_x_cos(0.6);
        let tol = Tolerance::default();
        let extrema = match locate_extrema(&h, pb.domain(), 4096).unwrap() {
            Shape::Alternating(e) => e,
            _ => unreachable!(),
        };
        let low = bounds_general_lower(&pb, &h, &extrema, 0.1, &tol).unwrap();
        // partial sums and construction data, frozen from an independent
        // high-precision reference
        let expect_alpha = [0.21475471, 0.80845887, 0.94849541, 0.98574783, 0.99601463];
        let expect_jump = [0.312487, 0.0971891, 0.0284179, 0.00820268, 0.00235554];
        let expect_sum = [-0.820571, -1.55596, -1.89572, -2.02856, -2.07652];
        assert!(low.intervals.len() >= 5);
        for i in 0..5 {
            assert_relative_eq!(low.intervals[i].alpha, expect_alpha[i], epsilon = 1e-4);
            assert_relative_eq!(low.intervals[i].jump_mass, expect_jump[i], max_relative = 1e-3);
            assert_relative_eq!(low.intervals[i].partial_sum, expect_sum[i], epsilon = 1e-3);
        }
        // first interval construction values
        assert_relative_eq!(low.intervals[0].a_prime, 0.483518, epsilon = 1e-4);
        assert_relative_eq!(low.intervals[0].a_dprime, 1.2088, epsilon = 1e-4);
        // epsilon = 0.1 stops after five intervals, like the worked example
        assert_eq!(low.intervals.len(), 5);
        assert!(low.stopped_early);
        low.extremizer.check_monotone(&pb).unwrap();
        low.extremizer.check_in_band(&pb, 500).unwrap();
        assert_relative_eq!(
            low.extremizer.expectation(&pb, &h, &tol).unwrap(),
            low.bound,
            epsilon = 2e-3
        );
    }

    #[test]
    fn general_lower_converges() {
        let pb = example_pbox();
        let h = ObjectiveFn::scaled_x_cos(0.6);
        let tol = Tolerance::default();
        let extrema = match locate_extrema(&h, pb.domain(), 8192).unwrap() {
            Shape::Alternating(e) => e,
            _ => unreachable!(),
        };
        let low = bounds_general_lower(&pb, &h, &extrema, 1e-4, &tol).unwrap();
        assert_relative_eq!(low.bound, -2.1011867, epsilon = 2e-3);
        // duality: upper via -h
        let neg = h.negated();
        let reflected = match Shape::Alternating(extrema).reflected() {
            Shape::Alternating(e) => e,
            _ => unreachable!(),
        };
        let up = bounds_general_lower(&pb, &neg, &reflected, 1e-4, &tol).unwrap();
        assert_relative_eq!(-up.bound, 1.9151781, epsilon = 2e-3);
    }

    #[test]
    fn general_single_peak_degenerates_to_unimodal() {
        let pb = example_pbox();
        let h = ObjectiveFn::quadratic_peak(60.0, 5.0);
        let tol = Tolerance::default();
        let extrema = vec![Extremum {
            location: 5.0,
            kind: ExtremumKind::Max,
        }];
        let low = bounds_general_lower(&pb, &h, &extrema, 1e-6, &tol).unwrap();
        assert_relative_eq!(low.bound, 29.7451253761921, epsilon = 1e-3);
    }

    #[test]
    fn general_dispatch_consistency() {
        let pb = example_pbox();
        let tol = Tolerance::default();
        let h = ObjectiveFn::affine(20.0, -1.0);
        let (via_general, _) =
            bounds_general(&pb, &h, &Shape::Nonincreasing, 1e-3, &tol).unwrap();
        let (via_mono, _) =
            bounds_monotone(&pb, &h, false, IntegralRoute::GammaForm, &tol).unwrap();
        assert_relative_eq!(via_general.lower, via_mono.lower, epsilon = 1e-10);
        assert_relative_eq!(via_general.upper, via_mono.upper, epsilon = 1e-10);

        let q = ObjectiveFn::quadratic_peak(60.0, 5.0);
        let (res, _) = bounds_general(&pb, &q, &Shape::UnimodalMax(5.0), 1e-3, &tol).unwrap();
        assert_relative_eq!(res.lower, 29.7451, epsilon = 1e-3);
        assert_relative_eq!(res.upper, 52.7373, epsilon = 1e-3);
    }

    #[test]
    fn unimodal_min_by_duality() {
        let pb = example_pbox();
        let h = ObjectiveFn::from_fn(|x| (x - 5.0) * (x - 5.0) - 60.0, "valley");
        let tol = Tolerance::default();
        let (res, (ex_lo, ex_up)) =
            bounds_general(&pb, &h, &Shape::UnimodalMin(5.0), 1e-3, &tol).unwrap();
        assert_relative_eq!(res.lower, -52.7372920695809, epsilon = 1e-3);
        assert_relative_eq!(res.upper, -29.7451253761921, epsilon = 1e-3);
        assert_relative_eq!(
            ex_lo.expectation(&pb, &h, &tol).unwrap(),
            res.lower,
            epsilon = 1e-3
        );
        assert_relative_eq!(
            ex_up.expectation(&pb, &h, &tol).unwrap(),
            res.upper,
            epsilon = 1e-3
        );
    }
}
