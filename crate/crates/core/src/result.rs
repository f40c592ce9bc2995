//! Shared result types for the bound-computing engines.

use std::fmt;

/// Which engine produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    Lp,
    RandomSet,
    Oracle,
    ConditionalClosedForm,
    ConditionalSearch,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::Analytic => "analytic",
            Method::Lp => "lp",
            Method::RandomSet => "randomset",
            Method::Oracle => "oracle",
            Method::ConditionalClosedForm => "conditional-closed",
            Method::ConditionalSearch => "conditional-search",
        };
        f.write_str(name)
    }
}

/// Certified interval for one bound.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        Bracket { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        v >= self.lo - slack && v <= self.hi + slack
    }
}

/// Certified enclosure of the two expectation bounds.
#[derive(Debug, Clone, Copy)]
pub struct Enclosure {
    pub lower: Bracket,
    pub upper: Bracket,
    pub resolution: usize,
}

/// Lower and upper expectation with provenance and diagnostics.
#[derive(Debug, Clone)]
pub struct BoundsResult {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub enclosure: Option<Enclosure>,
    pub size: usize,
    pub warnings: Vec<String>,
    /// Named numeric diagnostics (gaps, alpha levels, partial sums, ...).
    pub details: Vec<(String, f64)>,
}

impl BoundsResult {
    pub fn new(method: Method, lower: f64, upper: f64) -> Self {
        debug_assert!(
            lower <= upper + 1e-9 * (1.0 + lower.abs().max(upper.abs())),
            "bounds out of order: {lower} > {upper}"
        );
        BoundsResult {
            lower,
            upper,
            method,
            enclosure: None,
            size: 0,
            warnings: Vec::new(),
            details: Vec::new(),
        }
    }

    pub fn with_size(mut self, size: usize) -> Self {
        self.size = size;
        self
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn detail(&mut self, key: impl Into<String>, value: f64) {
        self.details.push((key.into(), value));
    }

    pub fn get_detail(&self, key: &str) -> Option<f64> {
        self.details
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }
}
