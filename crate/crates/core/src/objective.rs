//! The objective function h and its declared monotonicity structure.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Parser;
use crate::numerics::{find_root, golden_min, Tolerance};

/// A univariate objective, either parsed from a formula or built in.
#[derive(Clone)]
pub struct ObjectiveFn {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    source: String,
}

impl fmt::Debug for ObjectiveFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ObjectiveFn({})", self.source)
    }
}

impl ObjectiveFn {
    /// Parse a formula in the expression grammar.
    pub fn parse(source: &str) -> Result<Self> {
        let ast = Parser::parse(source)?;
        Ok(ObjectiveFn {
            eval: Arc::new(move |x| ast.eval(x)),
            source: source.to_string(),
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, source: &str) -> Self {
        ObjectiveFn {
            eval: Arc::new(f),
            source: source.to_string(),
        }
    }

    /// a + b x
    pub fn affine(a: f64, b: f64) -> Self {
        Self::from_fn(move |x| a + b * x, &format!("{a} + {b}*x"))
    }

    /// c - (x - a)^2
    pub fn quadratic_peak(c: f64, a: f64) -> Self {
        Self::from_fn(move |x| c - (x - a) * (x - a), &format!("{c} - (x - {a})^2"))
    }

    /// k x cos(x)
    pub fn scaled_x_cos(k: f64) -> Self {
        Self::from_fn(move |x| k * x * x.cos(), &format!("{k}*x*cos(x)"))
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// -h, for the duality between lower and upper expectations.
    pub fn negated(&self) -> Self {
        let inner = Arc::clone(&self.eval);
        ObjectiveFn {
            eval: Arc::new(move |x| -(inner)(x)),
            source: format!("-({})", self.source),
        }
    }

    /// Evaluation must stay finite on the working domain.
    pub fn check_finite(&self, domain: (f64, f64), grid_size: usize) -> Result<()> {
        let n = grid_size.max(2);
        for i in 0..=n {
            let x = domain.0 + (domain.1 - domain.0) * i as f64 / n as f64;
            let v = self.value(x);
            if !v.is_finite() {
                return Err(Error::MalformedSpec(format!(
                    "objective `{}` evaluates to {v} at x={x}",
                    self.source
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy)]
pub struct Extremum {
    pub location: f64,
    pub kind: ExtremumKind,
}

/// Declared monotonicity structure of h.
#[derive(Debug, Clone)]
pub enum Shape {
    Nondecreasing,
    Nonincreasing,
    UnimodalMax(f64),
    UnimodalMin(f64),
    /// Strictly increasing locations with strictly alternating kinds.
    Alternating(Vec<Extremum>),
    Unknown,
}

impl Shape {
    pub fn alternating(extrema: Vec<Extremum>) -> Result<Self> {
        for w in extrema.windows(2) {
            if w[1].location <= w[0].location {
                return Err(Error::ShapeDetection(format!(
                    "extrema locations must strictly increase near x={}",
                    w[1].location
                )));
            }
            if w[1].kind == w[0].kind {
                return Err(Error::ShapeDetection(format!(
                    "extrema kinds must alternate near x={}",
                    w[1].location
                )));
            }
        }
        Ok(Shape::Alternating(extrema))
    }

    /// Shape of -h: maxima and minima swap roles.
    pub fn reflected(&self) -> Shape {
        match self {
            Shape::Nondecreasing => Shape::Nonincreasing,
            Shape::Nonincreasing => Shape::Nondecreasing,
            Shape::UnimodalMax(a) => Shape::UnimodalMin(*a),
            Shape::UnimodalMin(a) => Shape::UnimodalMax(*a),
            Shape::Alternating(ext) => Shape::Alternating(
                ext.iter()
                    .map(|e| Extremum {
                        location: e.location,
                        kind: match e.kind {
                            ExtremumKind::Min => ExtremumKind::Max,
                            ExtremumKind::Max => ExtremumKind::Min,
                        },
                    })
                    .collect(),
            ),
            Shape::Unknown => Shape::Unknown,
        }
    }

    pub fn is_known(&self) -> bool {
        !matches!(self, Shape::Unknown)
    }
}

/// Infimum of h over [lo, hi], resolved from the declared shape.
pub fn interval_inf(h: &ObjectiveFn, shape: &Shape, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return h.value(lo.min(hi));
    }
    let ends = h.value(lo).min(h.value(hi));
    match shape {
        Shape::Nondecreasing => h.value(lo),
        Shape::Nonincreasing => h.value(hi),
        Shape::UnimodalMax(_) => ends,
        Shape::UnimodalMin(a) => {
            if (lo..=hi).contains(a) {
                ends.min(h.value(*a))
            } else {
                ends
            }
        }
        Shape::Alternating(ext) => {
            let mut best = ends;
            for e in ext {
                if e.kind == ExtremumKind::Min && (lo..=hi).contains(&e.location) {
                    best = best.min(h.value(e.location));
                }
            }
            best
        }
        Shape::Unknown => scan_opt(h, lo, hi, false),
    }
}

/// Supremum of h over [lo, hi], resolved from the declared shape.
pub fn interval_sup(h: &ObjectiveFn, shape: &Shape, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return h.value(lo.min(hi));
    }
    let ends = h.value(lo).max(h.value(hi));
    match shape {
        Shape::Nondecreasing => h.value(hi),
        Shape::Nonincreasing => h.value(lo),
        Shape::UnimodalMin(_) => ends,
        Shape::UnimodalMax(a) => {
            if (lo..=hi).contains(a) {
                ends.max(h.value(*a))
            } else {
                ends
            }
        }
        Shape::Alternating(ext) => {
            let mut best = ends;
            for e in ext {
                if e.kind == ExtremumKind::Max && (lo..=hi).contains(&e.location) {
                    best = best.max(h.value(e.location));
                }
            }
            best
        }
        Shape::Unknown => scan_opt(h, lo, hi, true),
    }
}

// 65-point scan plus golden-section refinement around the best cell.
fn scan_opt(h: &ObjectiveFn, lo: f64, hi: f64, maximize: bool) -> f64 {
    const POINTS: usize = 65;
    let sign = if maximize { -1.0 } else { 1.0 };
    let g = |x: f64| sign * h.value(x);
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..POINTS {
        let x = lo + (hi - lo) * i as f64 / (POINTS - 1) as f64;
        let v = g(x);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let cell = (hi - lo) / (POINTS - 1) as f64;
    let a = (lo + cell * (best_i as f64 - 1.0)).max(lo);
    let b = (lo + cell * (best_i as f64 + 1.0)).min(hi);
    let (_, v) = golden_min(g, a, b, 1e-10 * (hi - lo).max(1.0));
    sign * v.min(best)
}

/// Report from `verify_shape`: empty means consistent.
#[derive(Debug, Clone, Default)]
pub struct ShapeReport {
    pub violations: Vec<(f64, String)>,
}

impl ShapeReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sample h on a grid and check the declared monotonicity pattern between
/// consecutive declared extrema.
pub fn verify_shape(
    h: &ObjectiveFn,
    shape: &Shape,
    domain: (f64, f64),
    grid_size: usize,
) -> ShapeReport {
    let n = grid_size.max(3);
    let (lo, hi) = domain;
    let slack = 1e-9 * (1.0 + h.value(lo).abs().max(h.value(hi).abs()));
    let mut report = ShapeReport::default();

    // direction expected at position x: +1 rising, -1 falling, 0 anything
    let expected = |x: f64| -> i32 {
        match shape {
            Shape::Nondecreasing => 1,
            Shape::Nonincreasing => -1,
            Shape::UnimodalMax(a) => {
                if x < *a {
                    1
                } else {
                    -1
                }
            }
            Shape::UnimodalMin(a) => {
                if x < *a {
                    -1
                } else {
                    1
                }
            }
            Shape::Alternating(ext) => {
                if ext.is_empty() {
                    return 0;
                }
                // direction between extrema: rising into a max, falling into a min
                match ext.iter().find(|e| x < e.location) {
                    Some(e) => match e.kind {
                        ExtremumKind::Max => 1,
                        ExtremumKind::Min => -1,
                    },
                    None => match ext.last().unwrap().kind {
                        ExtremumKind::Max => -1,
                        ExtremumKind::Min => 1,
                    },
                }
            }
            Shape::Unknown => 0,
        }
    };

    let mut prev_x = lo;
    let mut prev_v = h.value(lo);
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = h.value(x);
        let mid = 0.5 * (prev_x + x);
        let dir = expected(mid);
        // skip cells that straddle a declared extremum
        let straddles = match shape {
            Shape::UnimodalMax(a) | Shape::UnimodalMin(a) => prev_x < *a && *a < x,
            Shape::Alternating(ext) => ext.iter().any(|e| prev_x < e.location && e.location < x),
            _ => false,
        };
        if !straddles {
            if dir > 0 && v < prev_v - slack {
                report
                    .violations
                    .push((mid, format!("expected nondecreasing, h fell at x~{mid:.6}")));
            }
            if dir < 0 && v > prev_v + slack {
                report
                    .violations
                    .push((mid, format!("expected nonincreasing, h rose at x~{mid:.6}")));
            }
        }
        prev_x = x;
        prev_v = v;
    }
    report
}

const PLATEAU_SLOPE: f64 = 1e-12;

/// Locate all interior extrema of h by refining sign changes of the
/// central finite-difference slope on a scan grid.
pub fn locate_extrema(h: &ObjectiveFn, domain: (f64, f64), scan_size: usize) -> Result<Shape> {
    let n = scan_size.max(16);
    let (lo, hi) = domain;
    let width = hi - lo;
    let step = width / (64.0 * n as f64);
    let slope = |x: f64| (h.value(x + step) - h.value(x - step)) / (2.0 * step);
    let tol = Tolerance {
        abs_x: 1e-9,
        abs_f: 0.0, // drive bisection purely by bracket width
        quad_rel: 1e-10,
    };

    // classify slope signs on the grid, treating tiny magnitudes as flat
    let xs: Vec<f64> = (0..=n)
        .map(|i| lo + width * (i as f64 + 0.5) / (n as f64 + 1.0))
        .collect();
    let signs: Vec<i32> = xs
        .iter()
        .map(|&x| {
            let s = slope(x);
            if s.abs() < PLATEAU_SLOPE {
                0
            } else if s > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();

    let mut extrema: Vec<Extremum> = Vec::new();
    let mut last_sign = 0i32;
    let mut last_idx = 0usize;
    for (i, &s) in signs.iter().enumerate() {
        if s == 0 {
            continue;
        }
        if last_sign != 0 && s != last_sign {
            let kind = if last_sign > 0 {
                ExtremumKind::Max
            } else {
                ExtremumKind::Min
            };
            let (a, b) = (xs[last_idx], xs[i]);
            let location = match find_root(slope, a, b, &tol) {
                Ok(r) => r,
                // plateau between opposite slopes collapses to its midpoint
                Err(_) => 0.5 * (a + b),
            };
            extrema.push(Extremum { location, kind });
        }
        last_sign = s;
        last_idx = i;
    }
    Shape::alternating(extrema)
}

/// Classify h on the domain: monotone, unimodal, or alternating.
pub fn detect_shape(h: &ObjectiveFn, domain: (f64, f64), scan_size: usize) -> Result<Shape> {
    let detected = locate_extrema(h, domain, scan_size)?;
    let ext = match &detected {
        Shape::Alternating(e) => e.clone(),
        _ => unreachable!(),
    };
    Ok(match ext.len() {
        0 => {
            if h.value(domain.1) >= h.value(domain.0) {
                Shape::Nondecreasing
            } else {
                Shape::Nonincreasing
            }
        }
        1 => match ext[0].kind {
            ExtremumKind::Max => Shape::UnimodalMax(ext[0].location),
            ExtremumKind::Min => Shape::UnimodalMin(ext[0].location),
        },
        _ => detected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parse_and_eval() {
        let h = ObjectiveFn::parse("20 - x").unwrap();
        assert_eq!(h.value(2.0), 18.0);
        let id = ObjectiveFn::parse("x").unwrap();
        assert_eq!(id.value(7.0), 7.0);
        let osc = ObjectiveFn::parse("0.6*x*cos(x)").unwrap();
        assert_relative_eq!(osc.value(3.426), -1.97297, epsilon = 1e-4);
    }

    #[test]
    fn verify_monotone_affine() {
        let h = ObjectiveFn::parse("20 - x").unwrap();
        let rep = verify_shape(&h, &Shape::Nonincreasing, (0.0, 50.0), 200);
        assert!(rep.is_consistent());
    }

    #[test]
    fn verify_unimodal_quadratic() {
        let h = ObjectiveFn::parse("60 - (x-5)^2").unwrap();
        let rep = verify_shape(&h, &Shape::UnimodalMax(5.0), (0.0, 50.0), 200);
        assert!(rep.is_consistent());
    }

    #[test]
    fn verify_catches_oscillation() {
        let h = ObjectiveFn::parse("0.6*x*cos(x)").unwrap();
        let rep = verify_shape(&h, &Shape::Nondecreasing, (0.0, 30.0), 512);
        assert!(!rep.is_consistent());
        // first violation just past the first stationary point near 0.86
        assert!(rep.violations[0].0 > 0.5 && rep.violations[0].0 < 1.5);
    }

    #[test]
    fn locate_extrema_of_x_cos_x() {
        let h = ObjectiveFn::scaled_x_cos(0.6);
        let shape = locate_extrema(&h, (0.0, 28.4), 2048).unwrap();
        let ext = match shape {
            Shape::Alternating(e) => e,
            other => panic!("expected alternating, got {other:?}"),
        };
        let expected = [
            (0.860334, ExtremumKind::Max),
            (3.425618, ExtremumKind::Min),
            (6.437298, ExtremumKind::Max),
            (9.529334, ExtremumKind::Min),
            (12.645287, ExtremumKind::Max),
            (15.771285, ExtremumKind::Min),
            (18.902410, ExtremumKind::Max),
            (22.036497, ExtremumKind::Min),
            (25.172446, ExtremumKind::Max),
            (28.309642, ExtremumKind::Min),
        ];
        assert_eq!(ext.len(), expected.len());
        for (e, (loc, kind)) in ext.iter().zip(expected) {
            assert_relative_eq!(e.location, loc, epsilon = 1e-5);
            assert_eq!(e.kind, kind);
        }
    }

    #[test]
    fn locate_extrema_quadratic_and_affine() {
        let q = ObjectiveFn::quadratic_peak(60.0, 5.0);
        match detect_shape(&q, (0.0, 50.0), 256).unwrap() {
            Shape::UnimodalMax(a) => assert_relative_eq!(a, 5.0, epsilon = 1e-6),
            other => panic!("expected unimodal max, got {other:?}"),
        }
        let l = ObjectiveFn::affine(20.0, -1.0);
        match detect_shape(&l, (0.0, 50.0), 256).unwrap() {
            Shape::Nonincreasing => {}
            other => panic!("expected nonincreasing, got {other:?}"),
        }
    }

    #[test]
    fn detected_shape_is_consistent_for_catalog() {
        let domain = (0.0, 30.0);
        for h in [
            ObjectiveFn::affine(20.0, -1.0),
            ObjectiveFn::quadratic_peak(60.0, 5.0),
            ObjectiveFn::scaled_x_cos(0.6),
        ] {
            let shape = locate_extrema(&h, domain, 1024).unwrap();
            let rep = verify_shape(&h, &shape, domain, 1024);
            assert!(rep.is_consistent(), "shape of {h:?} inconsistent: {rep:?}");
        }
    }

    #[test]
    fn interval_opt_respects_shape() {
        let h = ObjectiveFn::quadratic_peak(60.0, 5.0);
        let shape = Shape::UnimodalMax(5.0);
        assert_relative_eq!(interval_sup(&h, &shape, 0.0, 10.0), 60.0);
        assert_relative_eq!(interval_inf(&h, &shape, 0.0, 10.0), 35.0);
        // unknown shape falls back to a scan and agrees
        assert_relative_eq!(
            interval_sup(&h, &Shape::Unknown, 0.0, 10.0),
            60.0,
            epsilon = 1e-9
        );
        let osc = ObjectiveFn::scaled_x_cos(0.6);
        let alt = locate_extrema(&osc, (0.0, 30.0), 1024).unwrap();
        for (lo, hi) in [(0.0, 4.0), (2.0, 11.0), (5.0, 25.0)] {
            assert_relative_eq!(
                interval_inf(&osc, &alt, lo, hi),
                interval_inf(&osc, &Shape::Unknown, lo, hi),
                epsilon = 1e-6
            );
            assert_relative_eq!(
                interval_sup(&osc, &alt, lo, hi),
                interval_sup(&osc, &Shape::Unknown, lo, hi),
                epsilon = 1e-6
            );
        }
    }
}
