//! Conditional lower/upper expectations given an interval event, through the
//! two-level fractional program over the distribution values at the event
//! endpoints.

use crate::analytic::solve_alpha;
use crate::error::{Error, Result};
use crate::integrals::{expect_gamma_form, expect_gamma_range};
use crate::numerics::{golden_min, integrate, Tolerance};
use crate::objective::{interval_inf, interval_sup, ObjectiveFn, Shape};
use crate::pbox::{ConditioningEvent, Curve, PBox};
use crate::result::{BoundsResult, Method};

/// A conditioning problem with the endpoint-level boxes precomputed.
#[derive(Debug, Clone)]
pub struct ConditionalProblem {
    pub pbox: PBox,
    pub h: ObjectiveFn,
    pub shape: Shape,
    pub event: ConditioningEvent,
    pub alpha_range: (f64, f64),
    pub beta_range: (f64, f64),
}

impl ConditionalProblem {
    pub fn new(
        pbox: PBox,
        h: ObjectiveFn,
        shape: Shape,
        event: ConditioningEvent,
    ) -> Result<Self> {
        event.validate_for(&pbox)?;
        let alpha_range = (
            pbox.eval_cdf(Curve::Lower, event.b0)?,
            pbox.eval_cdf(Curve::Upper, event.b0)?,
        );
        let beta_range = (
            pbox.eval_cdf(Curve::Lower, event.b1)?,
            pbox.eval_cdf(Curve::Upper, event.b1)?,
        );
        Ok(ConditionalProblem {
            pbox,
            h,
            shape,
            event,
            alpha_range,
            beta_range,
        })
    }

    /// Clipped focal interval A_g intersected with the event.
    fn clipped(&self, g: f64) -> Result<(f64, f64)> {
        let a = self
            .pbox
            .quantile(Curve::Upper, g.clamp(0.0, 1.0))?
            .max(self.event.b0);
        let b = self
            .pbox
            .quantile(Curve::Lower, g.clamp(0.0, 1.0))?
            .min(self.event.b1);
        Ok(if a <= b { (a, b) } else { (b, b) })
    }
}

/// The numerators of the fractional program: integrals over levels of the
/// supremum and infimum of h over the clipped focal elements.
pub fn psi_phi(problem: &ConditionalProblem, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !(alpha < beta) {
        return Err(Error::Domain(format!(
            "need alpha < beta, got [{alpha}, {beta}]"
        )));
    }
    if alpha < problem.alpha_range.0 - 1e-9 || beta > problem.beta_range.1 + 1e-9 {
        return Err(Error::Event(format!(
            "levels [{alpha}, {beta}] clip empty focal elements inside the event"
        )));
    }
    let tol = Tolerance::default();
    let sup = integrate(
        |g| {
            let (a, b) = problem.clipped(g).unwrap_or((problem.event.b1, problem.event.b1));
            interval_sup(&problem.h, &problem.shape, a, b)
        },
        alpha,
        beta,
        &tol,
    );
    let inf = integrate(
        |g| {
            let (a, b) = problem.clipped(g).unwrap_or((problem.event.b1, problem.event.b1));
            interval_inf(&problem.h, &problem.shape, a, b)
        },
        alpha,
        beta,
        &tol,
    );
    Ok((sup.value, inf.value))
}

/// Closed forms for monotone h: the optimal endpoint levels are pinned by
/// the direction, no search needed.
pub fn conditional_bounds_monotone(problem: &ConditionalProblem) -> Result<BoundsResult> {
    let nondecreasing = match problem.shape {
        Shape::Nondecreasing => true,
        Shape::Nonincreasing => false,
        _ => {
            return Err(Error::ShapeDetection(
                "monotone conditional bounds need a monotone shape".into(),
            ))
        }
    };
    let tol = Tolerance::default();
    let pb = &problem.pbox;
    let h = &problem.h;
    let (b0, b1) = (problem.event.b0, problem.event.b1);
    let fl_b0 = problem.alpha_range.0;
    let fu_b0 = problem.alpha_range.1;
    let fl_b1 = problem.beta_range.0;
    let fu_b1 = problem.beta_range.1;

    // rising value: mass rides the lower curve from Fl^{-1}(Fu(b0)) to b1,
    // with the leftover upper-band mass parked on b1
    let x_start = pb.quantile(Curve::Lower, fu_b0)?.clamp(b0, b1);
    let rising = (expect_gamma_form(pb, Curve::Lower, h, x_start, b1, &tol)?.value
        + h.value(b1) * (fu_b1 - fl_b1))
        / (fu_b1 - fu_b0);

    // falling value: mass parked on b0 plus the upper curve up to Fu^{-1}(Fl(b1))
    let x_end = pb.quantile(Curve::Upper, fl_b1)?.clamp(b0, b1);
    let falling = (h.value(b0) * (fu_b0 - fl_b0)
        + expect_gamma_form(pb, Curve::Upper, h, b0, x_end, &tol)?.value)
        / (fl_b1 - fl_b0);

    let (lower, upper) = if nondecreasing {
        (falling, rising)
    } else {
        (rising, falling)
    };
    Ok(BoundsResult::new(
        Method::ConditionalClosedForm,
        lower,
        upper,
    ))
}

/// Indicator-branch formula for the conditional supremum numerator. The
/// branch fixes each indicator instead of evaluating it, matching the
/// branch-by-branch optimization of the worked example.
fn psi_branch(
    problem: &ConditionalProblem,
    peak: f64,
    ia: bool,
    ib: bool,
    alpha: f64,
    beta: f64,
    tol: &Tolerance,
) -> Result<f64> {
    let pb = &problem.pbox;
    let h = &problem.h;
    let fl_a = pb.eval_cdf(Curve::Lower, peak)?;
    let fu_a = pb.eval_cdf(Curve::Upper, peak)?;
    let mut v = 0.0;
    if ia {
        v += expect_gamma_range(pb, Curve::Lower, h, alpha, fl_a, tol)?.value;
    }
    if ib {
        v += expect_gamma_range(pb, Curve::Upper, h, fu_a, beta, tol)?.value;
    }
    let top = if ib { fu_a } else { beta };
    let bot = if ia { fl_a } else { alpha };
    v += h.value(peak) * (top - bot);
    Ok(v)
}

fn maximize_ratio_on_box<F: Fn(f64, f64) -> Result<f64>>(
    numerator: F,
    alpha_range: (f64, f64),
    beta_range: (f64, f64),
    grid: usize,
) -> Result<(f64, (f64, f64))> {
    let n = grid.max(8);
    let mut best = f64::NEG_INFINITY;
    let mut arg = (alpha_range.0, beta_range.1);
    for i in 0..=n {
        let al = alpha_range.0 + (alpha_range.1 - alpha_range.0) * i as f64 / n as f64;
        for j in 0..=n {
            let be = beta_range.0 + (beta_range.1 - beta_range.0) * j as f64 / n as f64;
            if be <= al + 1e-9 {
                continue;
            }
            let v = numerator(al, be)? / (be - al);
            if v > best {
                best = v;
                arg = (al, be);
            }
        }
    }
    // coordinate golden polish around the best cell
    let da = (alpha_range.1 - alpha_range.0) / n as f64;
    let db = (beta_range.1 - beta_range.0) / n as f64;
    for _ in 0..2 {
        let (al0, be0) = arg;
        let a_lo = (al0 - da).max(alpha_range.0);
        let a_hi = (al0 + da).min(alpha_range.1).min(be0 - 1e-9);
        if a_hi > a_lo {
            let (al, neg) = golden_min(
                |al| -numerator(al, be0).unwrap_or(f64::NEG_INFINITY) / (be0 - al),
                a_lo,
                a_hi,
                1e-10,
            );
            if -neg > best {
                best = -neg;
                arg = (al, be0);
            }
        }
        let (al0, be0) = arg;
        let b_lo = (be0 - db).max(beta_range.0).max(al0 + 1e-9);
        let b_hi = (be0 + db).min(beta_range.1);
        if b_hi > b_lo {
            let (be, neg) = golden_min(
                |be| -numerator(al0, be).unwrap_or(f64::NEG_INFINITY) / (be - al0),
                b_lo,
                b_hi,
                1e-10,
            );
            if -neg > best {
                best = -neg;
                arg = (al0, be);
            }
        }
    }
    Ok((best, arg))
}

/// Closed-form machinery for h with one maximum at `peak` inside the event:
/// the supremum side optimizes each indicator branch over the whole level
/// box, the infimum side uses the flat-level formula whose ratio is
/// corner-optimal.
pub fn conditional_bounds_unimodal(problem: &ConditionalProblem) -> Result<BoundsResult> {
    let tol = Tolerance::default();
    match problem.shape {
        Shape::UnimodalMax(peak) => {
            let (b0, b1) = (problem.event.b0, problem.event.b1);
            if peak <= b0 {
                // restriction of h to the event is nonincreasing
                let mut p = problem.clone();
                p.shape = Shape::Nonincreasing;
                return conditional_bounds_monotone(&p);
            }
            if peak >= b1 {
                let mut p = problem.clone();
                p.shape = Shape::Nondecreasing;
                return conditional_bounds_monotone(&p);
            }
            let pb = &problem.pbox;
            let h = &problem.h;
            let fl_a = pb.eval_cdf(Curve::Lower, peak)?;
            let fu_a = pb.eval_cdf(Curve::Upper, peak)?;

            // upper: enumerate the indicator branches whose region meets the box
            let mut branch_values: Vec<(bool, bool, f64)> = Vec::new();
            let mut upper = f64::NEG_INFINITY;
            for ia in [true, false] {
                let ia_possible = if ia {
                    problem.alpha_range.0 < fl_a
                } else {
                    problem.alpha_range.1 >= fl_a
                };
                if !ia_possible {
                    continue;
                }
                for ib in [true, false] {
                    let ib_possible = if ib {
                        problem.beta_range.1 > fu_a
                    } else {
                        problem.beta_range.0 <= fu_a
                    };
                    if !ib_possible {
                        continue;
                    }
                    let (value, _) = maximize_ratio_on_box(
                        |al, be| psi_branch(problem, peak, ia, ib, al, be, &tol),
                        problem.alpha_range,
                        problem.beta_range,
                        48,
                    )?;
                    branch_values.push((ia, ib, value));
                    upper = upper.max(value);
                }
            }

            // lower: flat level from the root equation; the ratio is affine
            // over affine in each coordinate, so corners suffice
            let eps = solve_alpha(pb, h, peak, pb.domain(), &tol)?;
            let x_u = pb.quantile(Curve::Upper, eps.value)?.clamp(b0, b1);
            let x_l = pb.quantile(Curve::Lower, eps.value)?.clamp(b0, b1);
            let mid = expect_gamma_form(pb, Curve::Upper, h, b0, x_u, &tol)?.value
                + expect_gamma_form(pb, Curve::Lower, h, x_l, b1, &tol)?.value;
            let fl_b1 = problem.beta_range.0;
            let fu_b0 = problem.alpha_range.1;
            let phi =
                |al: f64, be: f64| {
                    h.value(b0) * (fu_b0 - al) + mid + h.value(b1) * (be - fl_b1)
                };
            let mut lower = f64::INFINITY;
            let mut arg = (0.0, 0.0);
            for al in [problem.alpha_range.0, problem.alpha_range.1] {
                for be in [problem.beta_range.0, problem.beta_range.1] {
                    if be <= al + 1e-9 {
                        continue;
                    }
                    let v = phi(al, be) / (be - al);
                    if v < lower {
                        lower = v;
                        arg = (al, be);
                    }
                }
            }

            let mut res = BoundsResult::new(Method::ConditionalClosedForm, lower, upper);
            for (ia, ib, v) in branch_values {
                res.detail(
                    format!("psi_branch_a{}_b{}", u8::from(ia), u8::from(ib)),
                    v,
                );
            }
            res.detail("epsilon_level", eps.value);
            res.detail("phi_argmin_alpha", arg.0);
            res.detail("phi_argmin_beta", arg.1);
            Ok(res)
        }
        Shape::UnimodalMin(peak) => {
            // duality: bounds of h given B are the negated swapped bounds of -h
            let neg = ConditionalProblem {
                pbox: problem.pbox.clone(),
                h: problem.h.negated(),
                shape: Shape::UnimodalMax(peak),
                event: problem.event,
                alpha_range: problem.alpha_range,
                beta_range: problem.beta_range,
            };
            let res = conditional_bounds_unimodal(&neg)?;
            let mut out =
                BoundsResult::new(Method::ConditionalClosedForm, -res.upper, -res.lower);
            out.details = res.details;
            Ok(out)
        }
        _ => Err(Error::ShapeDetection(
            "unimodal conditional bounds need a unimodal shape".into(),
        )),
    }
}

/// Route to the applicable closed form.
pub fn conditional_bounds_closed(problem: &ConditionalProblem) -> Result<BoundsResult> {
    match problem.shape {
        Shape::Nondecreasing | Shape::Nonincreasing => conditional_bounds_monotone(problem),
        Shape::UnimodalMax(_) | Shape::UnimodalMin(_) => conditional_bounds_unimodal(problem),
        _ => Err(Error::ShapeDetection(
            "no conditional closed form for this shape; use the level search".into(),
        )),
    }
}

/// Grid search over the level box with golden polish; works for any shape
/// with computable per-level optima and cross-checks the closed forms.
pub fn conditional_bounds_search(
    problem: &ConditionalProblem,
    grid: (usize, usize),
) -> Result<BoundsResult> {
    let (na, nb) = (grid.0.max(4), grid.1.max(4));
    let (a_lo, a_hi) = problem.alpha_range;
    let (b_lo, b_hi) = problem.beta_range;

    // shared fine partition carrying cumulative integrals of the clipped
    // optima, so every grid cell is a difference of prefix sums
    let mut nodes: Vec<f64> = Vec::new();
    for i in 0..=na {
        nodes.push(a_lo + (a_hi - a_lo) * i as f64 / na as f64);
    }
    for j in 0..=nb {
        nodes.push(b_lo + (b_hi - b_lo) * j as f64 / nb as f64);
    }
    let fine = 4096usize;
    for k in 0..=fine {
        nodes.push(a_lo + (b_hi - a_lo) * k as f64 / fine as f64);
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);

    let mut cum_sup = vec![0.0f64; nodes.len()];
    let mut cum_inf = vec![0.0f64; nodes.len()];
    let eval = |g: f64| -> (f64, f64) {
        let (a, b) = problem
            .clipped(g)
            .unwrap_or((problem.event.b1, problem.event.b1));
        (
            interval_sup(&problem.h, &problem.shape, a, b),
            interval_inf(&problem.h, &problem.shape, a, b),
        )
    };
    let mut prev = eval(nodes[0]);
    for k in 1..nodes.len() {
        let cur = eval(nodes[k]);
        let midg = 0.5 * (nodes[k - 1] + nodes[k]);
        let mid = eval(midg);
        let w = nodes[k] - nodes[k - 1];
        // Simpson on the cell
        cum_sup[k] = cum_sup[k - 1] + w / 6.0 * (prev.0 + 4.0 * mid.0 + cur.0);
        cum_inf[k] = cum_inf[k - 1] + w / 6.0 * (prev.1 + 4.0 * mid.1 + cur.1);
        prev = cur;
    }
    let idx_of = |v: f64| -> usize {
        nodes
            .binary_search_by(|p| p.partial_cmp(&v).unwrap())
            .unwrap_or_else(|e| e.min(nodes.len() - 1))
    };

    let mut best_up = f64::NEG_INFINITY;
    let mut best_lo = f64::INFINITY;
    let mut arg_up = (a_lo, b_hi);
    let mut arg_lo = (a_lo, b_hi);
    let mut any = false;
    for i in 0..=na {
        let al = a_lo + (a_hi - a_lo) * i as f64 / na as f64;
        let ia = idx_of(al);
        for j in 0..=nb {
            let be = b_lo + (b_hi - b_lo) * j as f64 / nb as f64;
            if be <= al + 1e-9 {
                continue;
            }
            any = true;
            let ib = idx_of(be);
            let denom = be - al;
            let up = (cum_sup[ib] - cum_sup[ia]) / denom;
            let lo = (cum_inf[ib] - cum_inf[ia]) / denom;
            if up > best_up {
                best_up = up;
                arg_up = (al, be);
            }
            if lo < best_lo {
                best_lo = lo;
                arg_lo = (al, be);
            }
        }
    }
    if !any {
        return Err(Error::Event(
            "level box admits no pair with beta > alpha".into(),
        ));
    }

    // polish against the adaptive quadrature (independent of the prefix grid)
    let da = (a_hi - a_lo) / na as f64;
    let db = (b_hi - b_lo) / nb as f64;
    let polish = |start: (f64, f64), maximize: bool| -> Result<(f64, (f64, f64))> {
        let mut arg = start;
        let sign = if maximize { -1.0 } else { 1.0 };
        let mut best = sign
            * {
                let (s, i) = psi_phi(problem, arg.0, arg.1)?;
                (if maximize { s } else { i }) / (arg.1 - arg.0)
            };
        for _ in 0..2 {
            let (al0, be0) = arg;
            let lo = (al0 - da).max(a_lo);
            let hi = (al0 + da).min(a_hi).min(be0 - 1e-9);
            if hi > lo {
                let (al, v) = golden_min(
                    |al| {
                        let (s, i) = psi_phi(problem, al, be0).unwrap_or((0.0, 0.0));
                        sign * (if maximize { s } else { i }) / (be0 - al)
                    },
                    lo,
                    hi,
                    1e-10,
                );
                if v < best {
                    best = v;
                    arg = (al, be0);
                }
            }
            let (al0, be0) = arg;
            let lo = (be0 - db).max(b_lo).max(al0 + 1e-9);
            let hi = (be0 + db).min(b_hi);
            if hi > lo {
                let (be, v) = golden_min(
                    |be| {
                        let (s, i) = psi_phi(problem, al0, be).unwrap_or((0.0, 0.0));
                        sign * (if maximize { s } else { i }) / (be - al0)
                    },
                    lo,
                    hi,
                    1e-10,
                );
                if v < best {
                    best = v;
                    arg = (al0, be);
                }
            }
        }
        Ok((sign * best, arg))
    };
    let (up, arg_up) = polish(arg_up, true).map(|(v, a)| (v.max(best_up), a))?;
    let (lo, arg_lo) = polish(arg_lo, false).map(|(v, a)| (v.min(best_lo), a))?;

    let mut res = BoundsResult::new(Method::ConditionalSearch, lo, up)
        .with_size((na + 1) * (nb + 1));
    res.detail("argmax_alpha", arg_up.0);
    res.detail("argmax_beta", arg_up.1);
    res.detail("argmin_alpha", arg_lo.0);
    res.detail("argmin_beta", arg_lo.1);
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn example_problem(h: ObjectiveFn, shape: Shape) -> ConditionalProblem {
        let pb = PBox::exponential(0.2, 0.5).unwrap();
        let ev = ConditioningEvent::new(1.0, 8.0).unwrap();
        ConditionalProblem::new(pb, h, shape, ev).unwrap()
    }

    #[test]
    fn boundary_levels_of_worked_example() {
        let p = example_problem(ObjectiveFn::affine(20.0, -1.0), Shape::Nonincreasing);
        assert_relative_eq!(p.alpha_range.0, 0.18127, epsilon = 1e-4);
        assert_relative_eq!(p.alpha_range.1, 0.39347, epsilon = 1e-4);
        assert_relative_eq!(p.beta_range.0, 0.79810, epsilon = 1e-4);
        assert_relative_eq!(p.beta_range.1, 0.98168, epsilon = 1e-4);
    }

    #[test]
    fn monotone_closed_form_values() {
        // exact optima of the fractional program; the worked example's
        // printed 18.298/14.219 round the boundary levels to two digits first
        let p = example_problem(ObjectiveFn::affine(20.0, -1.0), Shape::Nonincreasing);
        let res = conditional_bounds_monotone(&p).unwrap();
        assert_relative_eq!(res.upper, 18.40812, epsilon = 1e-3);
        assert_relative_eq!(res.lower, 14.23174, epsilon = 1e-3);
    }

    #[test]
    fn monotone_closed_form_matches_search() {
        let p = example_problem(ObjectiveFn::affine(20.0, -1.0), Shape::Nonincreasing);
        let closed = conditional_bounds_monotone(&p).unwrap();
        let search = conditional_bounds_search(&p, (64, 64)).unwrap();
        assert_relative_eq!(closed.upper, search.upper, epsilon = 1e-2);
        assert_relative_eq!(closed.lower, search.lower, epsilon = 1e-2);
    }

    #[test]
    fn vacuous_event_recovers_unconditional_bounds() {
        let pb = PBox::exponential(0.2, 0.5).unwrap();
        let hi = pb.domain().1;
        let ev = ConditioningEvent::new(0.0, hi).unwrap();
        let p = ConditionalProblem::new(
            pb,
            ObjectiveFn::affine(20.0, -1.0),
            Shape::Nonincreasing,
            ev,
        )
        .unwrap();
        let res = conditional_bounds_monotone(&p).unwrap();
        assert_relative_eq!(res.lower, 15.0, epsilon = 1e-3);
        assert_relative_eq!(res.upper, 18.0, epsilon = 1e-3);
    }

    #[test]
    fn unimodal_branch_values() {
        // exact branch optima; the worked example's 56.52/59.57/47.32 carry
        // its rounded intermediate constants
        let p = example_problem(ObjectiveFn::quadratic_peak(60.0, 5.0), Shape::UnimodalMax(5.0));
        let res = conditional_bounds_unimodal(&p).unwrap();
        let psi1 = res.get_detail("psi_branch_a1_b0").unwrap();
        let psi2 = res.get_detail("psi_branch_a1_b1").unwrap();
        assert_relative_eq!(psi1, 59.04778, epsilon = 2e-3);
        assert_relative_eq!(psi2, 59.00866, epsilon = 2e-3);
        assert_relative_eq!(res.upper, 59.04778, epsilon = 2e-3);
        assert_relative_eq!(res.lower, 47.78678, epsilon = 2e-3);
        assert_relative_eq!(res.get_detail("epsilon_level").unwrap(), 0.76035, epsilon = 1e-4);
        // the infimum settles at the lowest corner of the level box
        assert_relative_eq!(res.get_detail("phi_argmin_alpha").unwrap(), 0.18127, epsilon = 1e-4);
        assert_relative_eq!(res.get_detail("phi_argmin_beta").unwrap(), 0.79810, epsilon = 1e-4);
    }

    #[test]
    fn unimodal_search_stays_below_branch_envelope() {
        let p = example_problem(ObjectiveFn::quadratic_peak(60.0, 5.0), Shape::UnimodalMax(5.0));
        let closed = conditional_bounds_unimodal(&p).unwrap();
        let search = conditional_bounds_search(&p, (128, 128)).unwrap();
        // true supremum, frozen from a high-precision evaluation
        assert_relative_eq!(search.upper, 58.9765, epsilon = 2e-2);
        assert_relative_eq!(search.lower, 47.78675, epsilon = 1e-2);
        // branch formulas dominate the true numerator pointwise
        assert!(search.upper <= closed.upper + 1e-6);
        // the infimum side has no indicator slack: both routes agree
        assert_relative_eq!(search.lower, closed.lower, epsilon = 1e-2);
    }

    #[test]
    fn peak_outside_event_reduces_to_monotone() {
        // event right of the peak: on B the objective is falling
        let pb = PBox::exponential(0.2, 0.5).unwrap();
        let ev = ConditioningEvent::new(5.5, 16.0).unwrap();
        let h = ObjectiveFn::quadratic_peak(60.0, 5.0);
        let p = ConditionalProblem::new(pb, h.clone(), Shape::UnimodalMax(5.0), ev).unwrap();
        let via_unimodal = conditional_bounds_unimodal(&p).unwrap();
        let mut mono = p.clone();
        mono.shape = Shape::Nonincreasing;
        let via_mono = conditional_bounds_monotone(&mono).unwrap();
        assert_relative_eq!(via_unimodal.lower, via_mono.lower, epsilon = 1e-9);
        assert_relative_eq!(via_unimodal.upper, via_mono.upper, epsilon = 1e-9);
    }

    #[test]
    fn constant_objective_conditions_to_itself() {
        let p = example_problem(ObjectiveFn::from_fn(|_| 7.0, "7"), Shape::Nondecreasing);
        let res = conditional_bounds_monotone(&p).unwrap();
        assert_relative_eq!(res.lower, 7.0, epsilon = 1e-9);
        assert_relative_eq!(res.upper, 7.0, epsilon = 1e-9);
        let s = conditional_bounds_search(&p, (32, 32)).unwrap();
        assert_relative_eq!(s.lower, 7.0, epsilon = 1e-6);
        assert_relative_eq!(s.upper, 7.0, epsilon = 1e-6);
    }

    #[test]
    fn degenerate_pbox_is_plain_bayes() {
        // precise exponential(0.2): E[20 - X | 1 <= X <= 8]
        let spec = crate::pbox::CdfSpec::exponential(0.2).unwrap();
        let pb = PBox::degenerate(spec).unwrap();
        let ev = ConditioningEvent::new(1.0, 8.0).unwrap();
        let p = ConditionalProblem::new(
            pb,
            ObjectiveFn::affine(20.0, -1.0),
            Shape::Nonincreasing,
            ev,
        )
        .unwrap();
        let res = conditional_bounds_search(&p, (16, 16)).unwrap();
        // reference: int_1^8 (20-x) 0.2 e^{-0.2x} dx / (F(8) - F(1))
        let tol = Tolerance::default();
        let num = integrate(
            |x| (20.0 - x) * 0.2 * (-0.2 * x).exp(),
            1.0,
            8.0,
            &tol,
        )
        .value;
        let den = (1.0 - (-1.6f64).exp()) - (1.0 - (-0.2f64).exp());
        let expect = num / den;
        assert_relative_eq!(res.lower, expect, epsilon = 1e-3);
        assert_relative_eq!(res.upper, expect, epsilon = 1e-3);
    }

    #[test]
    fn psi_phi_behaviour() {
        let p = example_problem(ObjectiveFn::quadratic_peak(60.0, 5.0), Shape::UnimodalMax(5.0));
        // degenerate range shrinks both numerators to zero
        let (s, i) = psi_phi(&p, 0.5, 0.5 + 1e-7).unwrap();
        assert!(s.abs() < 1e-4 && i.abs() < 1e-4);
        // psi dominates phi pointwise
        let (s, i) = psi_phi(&p, 0.39, 0.8).unwrap();
        assert!(s >= i);
        // true numerator at the worked example's branch point
        assert_relative_eq!(s / (0.8 - 0.39), 58.56, epsilon = 0.05);
        assert!(psi_phi(&p, 0.8, 0.4).is_err());
        assert!(psi_phi(&p, 0.01, 0.8).is_err());
    }

    #[test]
    fn conditional_duality() {
        let h = ObjectiveFn::quadratic_peak(60.0, 5.0);
        let p = example_problem(h.clone(), Shape::UnimodalMax(5.0));
        let neg = example_problem(h.negated(), Shape::UnimodalMin(5.0));
        let a = conditional_bounds_closed(&p).unwrap();
        let b = conditional_bounds_closed(&neg).unwrap();
        assert_relative_eq!(a.lower, -b.upper, epsilon = 1e-6);
        assert_relative_eq!(a.upper, -b.lower, epsilon = 1e-6);
        let sa = conditional_bounds_search(&p, (48, 48)).unwrap();
        let sb = conditional_bounds_search(&neg, (48, 48)).unwrap();
        assert_relative_eq!(sa.lower, -sb.upper, epsilon = 1e-6);
        assert_relative_eq!(sa.upper, -sb.lower, epsilon = 1e-6);
    }
}
