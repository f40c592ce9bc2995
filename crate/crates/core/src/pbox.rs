//! P-boxes: validated pairs of cumulative distributions with quantile access.
//!
//! The two bounding curves use the pseudo-inverse conventions
//! `sup{x : F(x) < g}` for the upper curve and `inf{x : F(x) > g}` for the
//! lower curve, so the pair of quantiles at a level always brackets a
//! nonempty focal interval. Plateau ties resolve to the left and right
//! plateau edge respectively.

use crate::error::{Error, Result};
use crate::expr::{Ast, Parser};

/// Tail mass below which infinite supports are truncated.
pub const TAIL_EPS: f64 = 1e-10;

/// One bounding cumulative distribution.
#[derive(Debug, Clone)]
pub enum CdfSpec {
    /// F(x) = 1 - exp(-rate * x) on x >= 0.
    Exponential { rate: f64 },
    /// Piecewise-linear interpolation between (x, p) knots.
    Tabulated { points: Vec<(f64, f64)> },
    /// Arbitrary nondecreasing formula of x, clamped to [0, 1].
    Expression {
        source: String,
        ast: Ast,
        support_hint: Option<(f64, f64)>,
    },
}

impl CdfSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        if rate > 0.0 && rate.is_finite() {
            Ok(CdfSpec::Exponential { rate })
        } else {
            Err(Error::MalformedSpec(format!(
                "exponential rate must be positive, got {rate}"
            )))
        }
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::MalformedSpec(
                "tabulated cdf needs at least two points".into(),
            ));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::MalformedSpec(format!(
                    "tabulated x values must strictly increase at x={}",
                    w[1].0
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::MalformedSpec(format!(
                    "tabulated p values must not decrease at x={}",
                    w[1].0
                )));
            }
        }
        for &(_, p) in &points {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::MalformedSpec(format!("p={p} outside [0,1]")));
            }
        }
        Ok(CdfSpec::Tabulated { points })
    }

    pub fn expression(source: &str, support_hint: Option<(f64, f64)>) -> Result<Self> {
        let ast = Parser::parse(source)?;
        Ok(CdfSpec::Expression {
            source: source.to_string(),
            ast,
            support_hint,
        })
    }

    /// CDF value, clamped to [0, 1].
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = match self {
            CdfSpec::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            CdfSpec::Tabulated { points } => {
                if x <= points[0].0 {
                    points[0].1
                } else if x >= points[points.len() - 1].0 {
                    points[points.len() - 1].1
                } else {
                    let k = points.partition_point(|&(px, _)| px <= x);
                    let (x0, p0) = points[k - 1];
                    let (x1, p1) = points[k];
                    p0 + (p1 - p0) * (x - x0) / (x1 - x0)
                }
            }
            CdfSpec::Expression { ast, source, .. } => {
                let v = ast.eval(x);
                if !v.is_finite() {
                    return Err(Error::MalformedSpec(format!(
                        "cdf expression `{source}` evaluates to {v} at x={x}"
                    )));
                }
                v
            }
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// Probability density, used by x-form Stieltjes integrals.
    /// Tabulated specs use the segment slope, expressions a central difference.
    pub fn density(&self, x: f64, scale: f64) -> Result<f64> {
        match self {
            CdfSpec::Exponential { rate } => Ok(if x < 0.0 {
                0.0
            } else {
                rate * (-rate * x).exp()
            }),
            CdfSpec::Tabulated { points } => {
                if x < points[0].0 || x > points[points.len() - 1].0 {
                    return Ok(0.0);
                }
                let k = points.partition_point(|&(px, _)| px <= x).clamp(1, points.len() - 1);
                let (x0, p0) = points[k - 1];
                let (x1, p1) = points[k];
                Ok((p1 - p0) / (x1 - x0))
            }
            CdfSpec::Expression { .. } => {
                let dl = 1e-7 * scale.max(1e-6);
                Ok(((self.eval(x + dl)? - self.eval(x - dl)?) / (2.0 * dl)).max(0.0))
            }
        }
    }

    /// sup{x : F(x) < g} clamped to [lo, hi]; left plateau edge.
    fn quantile_sup_below(&self, g: f64, lo: f64, hi: f64) -> Result<f64> {
        match self {
            CdfSpec::Exponential { rate } => {
                if g <= 0.0 {
                    Ok(lo)
                } else if g >= 1.0 {
                    Ok(hi)
                } else {
                    Ok((-(-g).ln_1p() / rate).clamp(lo, hi))
                }
            }
            CdfSpec::Tabulated { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if g <= first.1 {
                    return Ok(first.0.max(lo));
                }
                if g > last.1 {
                    return Ok(last.0.min(hi));
                }
                let k = points.partition_point(|&(_, p)| p < g);
                let (x0, p0) = points[k - 1];
                let (x1, p1) = points[k];
                Ok((x0 + (x1 - x0) * (g - p0) / (p1 - p0)).clamp(lo, hi))
            }
            CdfSpec::Expression { .. } => {
                if self.eval(lo)? >= g {
                    return Ok(lo);
                }
                if self.eval(hi)? < g {
                    return Ok(hi);
                }
                // invariant: F(a) < g <= F(b)
                let (mut a, mut b) = (lo, hi);
                let tol = 1e-12 * (hi - lo).abs().max(1.0);
                while b - a > tol {
                    let m = 0.5 * (a + b);
                    if self.eval(m)? < g {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                Ok(0.5 * (a + b))
            }
        }
    }

    /// inf{x : F(x) > g} clamped to [lo, hi]; right plateau edge.
    fn quantile_inf_above(&self, g: f64, lo: f64, hi: f64) -> Result<f64> {
        match self {
            CdfSpec::Exponential { rate } => {
                if g <= 0.0 {
                    Ok(lo.max(0.0))
                } else if g >= 1.0 {
                    Ok(hi)
                } else {
                    Ok((-(-g).ln_1p() / rate).clamp(lo, hi))
                }
            }
            CdfSpec::Tabulated { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if g < first.1 {
                    return Ok(first.0.max(lo));
                }
                if g >= last.1 {
                    return Ok(last.0.min(hi));
                }
                // last index with p <= g, then invert on the rising segment
                let k = points.partition_point(|&(_, p)| p <= g) - 1;
                let (x0, p0) = points[k];
                let (x1, p1) = points[k + 1];
                Ok((x0 + (x1 - x0) * (g - p0) / (p1 - p0)).clamp(lo, hi))
            }
            CdfSpec::Expression { .. } => {
                if self.eval(lo)? > g {
                    return Ok(lo);
                }
                if self.eval(hi)? <= g {
                    return Ok(hi);
                }
                // invariant: F(a) <= g < F(b)
                let (mut a, mut b) = (lo, hi);
                let tol = 1e-12 * (hi - lo).abs().max(1.0);
                while b - a > tol {
                    let m = 0.5 * (a + b);
                    if self.eval(m)? <= g {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                Ok(0.5 * (a + b))
            }
        }
    }

    /// Natural support bounds when the spec knows them.
    fn natural_support(&self) -> (Option<f64>, Option<f64>) {
        match self {
            CdfSpec::Exponential { .. } => (Some(0.0), None),
            CdfSpec::Tabulated { points } => {
                (Some(points[0].0), Some(points[points.len() - 1].0))
            }
            CdfSpec::Expression { support_hint, .. } => match support_hint {
                Some((lo, hi)) => (
                    lo.is_finite().then_some(*lo),
                    hi.is_finite().then_some(*hi),
                ),
                None => (None, None),
            },
        }
    }
}

/// Which bounding curve of the p-box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    /// F_lower, the smaller CDF (right focal ends).
    Lower,
    /// F_upper, the larger CDF (left focal ends).
    Upper,
}

/// A pair of CDFs with F_lower <= F_upper, plus a working domain obtained by
/// truncating infinite supports where tail mass drops below `TAIL_EPS`.
#[derive(Debug, Clone)]
pub struct PBox {
    lower: CdfSpec,
    upper: CdfSpec,
    domain: (f64, f64),
    truncated: bool,
}

impl PBox {
    pub fn new(lower: CdfSpec, upper: CdfSpec) -> Result<Self> {
        let (l_lo, l_hi) = lower.natural_support();
        let (u_lo, u_hi) = upper.natural_support();
        let mut truncated = false;

        let lo = match (l_lo, u_lo) {
            (Some(a), Some(b)) => a.min(b),
            _ => {
                truncated = true;
                search_down(&upper)?
            }
        };
        let hi = match (l_hi, u_hi) {
            (Some(a), Some(b)) => a.max(b),
            _ => {
                truncated = true;
                search_up(&lower, lo)?
            }
        };
        if !(lo < hi) {
            return Err(Error::MalformedSpec(format!(
                "degenerate domain [{lo}, {hi}]"
            )));
        }
        let pbox = PBox {
            lower,
            upper,
            domain: (lo, hi),
            truncated,
        };
        let report = pbox.validate(64)?;
        if let Some(v) = report.violations.first() {
            return Err(Error::MalformedSpec(format!(
                "{} at x={}",
                v.what, v.location
            )));
        }
        Ok(pbox)
    }

    /// Convenience constructor for the exponential band used in the tests:
    /// lower curve 1-exp(-rate_lower x), upper curve 1-exp(-rate_upper x).
    pub fn exponential(rate_lower: f64, rate_upper: f64) -> Result<Self> {
        PBox::new(
            CdfSpec::exponential(rate_lower)?,
            CdfSpec::exponential(rate_upper)?,
        )
    }

    /// A precise distribution seen as a zero-width p-box.
    pub fn degenerate(spec: CdfSpec) -> Result<Self> {
        PBox::new(spec.clone(), spec)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn spec(&self, which: Curve) -> &CdfSpec {
        match which {
            Curve::Lower => &self.lower,
            Curve::Upper => &self.upper,
        }
    }

    /// F_lower(x) or F_upper(x), clamped to [0, 1].
    pub fn eval_cdf(&self, which: Curve, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("cdf argument must be finite, got {x}")));
        }
        self.spec(which).eval(x)
    }

    /// Pseudo-inverse at level `gamma`. The upper curve uses
    /// sup{x : F(x) < g}, the lower curve inf{x : F(x) > g}.
    pub fn quantile(&self, which: Curve, gamma: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Domain(format!("gamma={gamma} outside [0,1]")));
        }
        let (lo, hi) = self.domain;
        match which {
            Curve::Upper => self.upper.quantile_sup_below(gamma, lo, hi),
            Curve::Lower => self.lower.quantile_inf_above(gamma, lo, hi),
        }
    }

    /// Check all invariants on a grid; collects violations instead of failing.
    pub fn validate(&self, grid_size: usize) -> Result<ValidationReport> {
        let n = grid_size.max(2);
        let (lo, hi) = self.domain;
        let mut report = ValidationReport::default();
        let mut prev_l = f64::NEG_INFINITY;
        let mut prev_u = f64::NEG_INFINITY;
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let fl = self.lower.eval(x)?;
            let fu = self.upper.eval(x)?;
            if fl > fu + 1e-12 {
                report.push("F_lower > F_upper", x);
            }
            if fl + 1e-12 < prev_l {
                report.push("F_lower decreases", x);
            }
            if fu + 1e-12 < prev_u {
                report.push("F_upper decreases", x);
            }
            prev_l = fl;
            prev_u = fu;
        }
        if self.upper.eval(lo)? > 1e-6 {
            report.push("F_upper does not vanish at domain start", lo);
        }
        if self.lower.eval(hi)? < 1.0 - 1e-6 {
            report.push("F_lower does not reach 1 at domain end", hi);
        }
        Ok(report)
    }
}

fn search_up(lower: &CdfSpec, lo: f64) -> Result<f64> {
    let mut x = lo.abs().max(1.0);
    let mut steps = 0;
    while lower.eval(x)? < 1.0 - TAIL_EPS {
        x *= 2.0;
        steps += 1;
        if steps > 1100 {
            return Err(Error::MalformedSpec(
                "lower cdf never approaches 1; cannot truncate support".into(),
            ));
        }
    }
    // tighten by bisection so the domain is not twice as wide as needed
    let (mut a, mut b) = (x / 2.0, x);
    for _ in 0..64 {
        let m = 0.5 * (a + b);
        if lower.eval(m)? < 1.0 - TAIL_EPS {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(b)
}

fn search_down(upper: &CdfSpec) -> Result<f64> {
    let mut x = -1.0;
    let mut steps = 0;
    while upper.eval(x)? > TAIL_EPS {
        x *= 2.0;
        steps += 1;
        if steps > 1100 {
            return Err(Error::MalformedSpec(
                "upper cdf never approaches 0; cannot truncate support".into(),
            ));
        }
    }
    let (mut a, mut b) = (x, x / 2.0);
    for _ in 0..64 {
        let m = 0.5 * (a + b);
        if upper.eval(m)? > TAIL_EPS {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(a)
}

/// Interval event B = [b0, b1] used for conditioning.
#[derive(Debug, Clone, Copy)]
pub struct ConditioningEvent {
    pub b0: f64,
    pub b1: f64,
}

impl ConditioningEvent {
    pub fn new(b0: f64, b1: f64) -> Result<Self> {
        if b0 < b1 && b0.is_finite() && b1.is_finite() {
            Ok(ConditioningEvent { b0, b1 })
        } else {
            Err(Error::Event(format!("need finite b0 < b1, got [{b0}, {b1}]")))
        }
    }

    /// The event must have strictly positive lower probability.
    pub fn validate_for(&self, pbox: &PBox) -> Result<()> {
        let fl_b1 = pbox.eval_cdf(Curve::Lower, self.b1)?;
        let fu_b0 = pbox.eval_cdf(Curve::Upper, self.b0)?;
        if fl_b1 > fu_b0 {
            Ok(())
        } else {
            Err(Error::Event(format!(
                "event [{}, {}] has lower probability zero (F_lower(b1)={fl_b1} <= F_upper(b0)={fu_b0})",
                self.b0, self.b1
            )))
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub what: String,
    pub location: f64,
}

impl ValidationReport {
    fn push(&mut self, what: &str, location: f64) {
        self.violations.push(Violation {
            what: what.to_string(),
            location,
        });
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}
