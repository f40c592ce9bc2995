//! Result tables, the machine-readable CSV record, and extremizer traces.

use std::fmt::Write as _;

use pbox_expect::analytic::{ExtremizingCdf, Segment};
use pbox_expect::pbox::PBox;
use pbox_expect::result::BoundsResult;

pub struct ResultRow {
    pub result: BoundsResult,
    pub seconds: f64,
}

/// Six significant digits for human output.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (5 - mag).clamp(0, 17) as usize;
    format!("{v:.decimals$}")
}

pub fn text_table(rows: &[ResultRow], timings: bool) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<20} {:>14} {:>14} {:>10} {:>9}",
        "method", "lower", "upper", "size", "seconds"
    )
    .unwrap();
    for row in rows {
        let secs = if timings { row.seconds } else { 0.0 };
        writeln!(
            out,
            "{:<20} {:>14} {:>14} {:>10} {:>9.3}",
            row.result.method.to_string(),
            sig6(row.result.lower),
            sig6(row.result.upper),
            row.result.size,
            secs
        )
        .unwrap();
        if let Some(enc) = &row.result.enclosure {
            writeln!(
                out,
                "{:<20} lower in [{}, {}], upper in [{}, {}]",
                "  enclosure",
                sig6(enc.lower.lo),
                sig6(enc.lower.hi),
                sig6(enc.upper.lo),
                sig6(enc.upper.hi)
            )
            .unwrap();
        }
        for w in &row.result.warnings {
            writeln!(out, "{:<20} warning: {w}", "").unwrap();
        }
    }
    out
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Full-precision results record.
pub fn results_csv(rows: &[ResultRow], timings: bool) -> String {
    let mut out = String::from(
        "method,lower,upper,encl_lo_lo,encl_lo_hi,encl_up_lo,encl_up_hi,size,seconds,warnings\n",
    );
    for row in rows {
        let r = &row.result;
        let (a, b, c, d) = match &r.enclosure {
            Some(e) => (
                e.lower.lo.to_string(),
                e.lower.hi.to_string(),
                e.upper.lo.to_string(),
                e.upper.hi.to_string(),
            ),
            None => Default::default(),
        };
        let secs = if timings { row.seconds } else { 0.0 };
        writeln!(
            out,
            "{},{},{},{a},{b},{c},{d},{},{:.3},{}",
            r.method,
            r.lower,
            r.upper,
            r.size,
            secs,
            csv_quote(&r.warnings.join("; "))
        )
        .unwrap();
    }
    out
}

/// Trace of an extremizing distribution: x, F(x), segment-kind. Jumps get
/// one row each carrying the post-jump level.
pub fn trace_csv(pbox: &PBox, cdf: &ExtremizingCdf, samples_per_segment: usize) -> String {
    let mut out = String::from("x,F,segment_kind\n");
    let n = samples_per_segment.max(2);
    let mut jumps = cdf.jumps.iter().peekable();
    for seg in &cdf.segments {
        let (from, to, kind) = match *seg {
            Segment::FollowUpper { from, to } => (from, to, "follow-upper"),
            Segment::FollowLower { from, to } => (from, to, "follow-lower"),
            Segment::Constant { from, to, .. } => (from, to, "constant"),
        };
        while let Some(j) = jumps.peek() {
            if j.at <= from + 1e-12 {
                let level = cdf.eval(pbox, j.at).unwrap_or(f64::NAN);
                writeln!(out, "{},{},jump", j.at, level).unwrap();
                jumps.next();
            } else {
                break;
            }
        }
        for i in 0..=n {
            let x = from + (to - from) * i as f64 / n as f64;
            let level = cdf.eval(pbox, x).unwrap_or(f64::NAN);
            writeln!(out, "{x},{level},{kind}").unwrap();
        }
    }
    for j in jumps {
        let level = cdf.eval(pbox, j.at).unwrap_or(f64::NAN);
        writeln!(out, "{},{},jump", j.at, level).unwrap();
    }
    out
}

pub struct ConvergenceRow {
    pub size: usize,
    pub e_star: Option<f64>,
    pub e_dstar: Option<f64>,
    pub lp_gap: Option<f64>,
    pub rs_outer: Option<f64>,
    pub rs_inner: Option<f64>,
    pub rs_gap: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt6(v: Option<f64>) -> String {
    v.map(sig6).unwrap_or_else(|| "-".into())
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("size,e_star,e_dstar,lp_gap,rs_outer,rs_inner,rs_gap\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.size,
            opt(r.e_star),
            opt(r.e_dstar),
            opt(r.lp_gap),
            opt(r.rs_outer),
            opt(r.rs_inner),
            opt(r.rs_gap)
        )
        .unwrap();
    }
    out
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:>8} {:>13} {:>13} {:>11} {:>13} {:>13} {:>11}",
        "size", "E*", "E**", "lp_gap", "rs_outer", "rs_inner", "rs_gap"
    )
    .unwrap();
    for r in rows {
        writeln!(
            out,
            "{:>8} {:>13} {:>13} {:>11} {:>13} {:>13} {:>11}",
            r.size,
            opt6(r.e_star),
            opt6(r.e_dstar),
            opt6(r.lp_gap),
            opt6(r.rs_outer),
            opt6(r.rs_inner),
            opt6(r.rs_gap)
        )
        .unwrap();
    }
    out
}
