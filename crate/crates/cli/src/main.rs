//! `pbox-expect`: expectation bounds under p-box uncertainty from a JSON
//! problem file. Exit codes: 0 success, 2 validation failure, 3 engine
//! failure.

mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};

use pbox_expect::analytic;
use pbox_expect::conditional::{
    conditional_bounds_closed, conditional_bounds_search, ConditionalProblem,
};
use pbox_expect::lp::{
    build_primal, dual_bound, primal_bound, refine_lp, sample_points, Sampler, Target,
};
use pbox_expect::randomset::{default_levels, refine_bounds, sandwich_bounds};
use pbox_expect::result::{BoundsResult, Enclosure, Method};
use pbox_expect::Tolerance;

use problem::{CompiledProblem, MethodSpec, ProblemFile, SamplerSpec};
use report::{ConvergenceRow, ResultRow};

#[derive(Parser)]
#[command(name = "pbox-expect", about = "Expectation bounds under p-box uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute bounds for a problem file.
    Run {
        file: PathBuf,
        /// Override the problem file's method.
        #[arg(long)]
        method: Option<String>,
        /// Refinement tolerance; overrides the problem file.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Seed recorded in the report (reserved for sampling utilities).
        #[arg(long)]
        seed: Option<u64>,
        /// Write the lower-bound extremizing distribution trace here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Write the machine-readable results record here.
        #[arg(long)]
        report_out: Option<PathBuf>,
        /// Include wall-clock timings in outputs (off keeps bytes reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Per-size primal/dual and random-set values with gaps.
    Converge {
        file: PathBuf,
        /// Comma-separated discretization sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Check the problem file and report violations.
    Validate { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<pbox_expect::Error>() {
                // engine-level failures
                Some(_) => ExitCode::from(3),
                // file, schema, and semantic validation failures
                None => ExitCode::from(2),
            }
        }
    }
}

fn load(path: &PathBuf) -> anyhow::Result<ProblemFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    ProblemFile::parse(&text)
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            file,
            method,
            epsilon,
            seed,
            trace_out,
            report_out,
            timings,
        } => {
            let mut spec = load(&file)?;
            if let Some(m) = method {
                spec.method = match m.as_str() {
                    "analytic" => MethodSpec::Analytic,
                    "lp" => MethodSpec::Lp,
                    "randomset" => MethodSpec::Randomset,
                    "all" => MethodSpec::All,
                    other => anyhow::bail!("unknown method `{other}`"),
                };
            }
            if let Some(e) = epsilon {
                spec.tolerances.epsilon = Some(e);
            }
            if let Some(s) = seed {
                spec.seed = s;
            }
            let compiled = spec.compile()?;
            run(&spec, &compiled, trace_out, report_out, timings)
        }
        Command::Converge {
            file,
            sizes,
            report_out,
        } => {
            anyhow::ensure!(sizes.len() >= 2, "need at least two sizes");
            let spec = load(&file)?;
            let compiled = spec.compile()?;
            converge(&spec, &compiled, &sizes, report_out)
        }
        Command::Validate { file } => {
            let spec = load(&file)?;
            let compiled = spec.compile()?;
            let report = compiled.pbox.validate(512)?;
            if report.is_valid() {
                println!("valid");
                Ok(())
            } else {
                for v in &report.violations {
                    println!("violation: {} at x={}", v.what, v.location);
                }
                anyhow::bail!("{} violation(s)", report.violations.len());
            }
        }
    }
}

fn describe_shape(shape: &pbox_expect::Shape) -> String {
    use pbox_expect::Shape;
    match shape {
        Shape::Nondecreasing => "nondecreasing".into(),
        Shape::Nonincreasing => "nonincreasing".into(),
        Shape::UnimodalMax(a) => format!("one maximum at {}", report::sig6(*a)),
        Shape::UnimodalMin(a) => format!("one minimum at {}", report::sig6(*a)),
        Shape::Alternating(ext) => format!("{} alternating extrema", ext.len()),
        Shape::Unknown => "unknown".into(),
    }
}

fn to_sampler(spec: SamplerSpec) -> Sampler {
    match spec {
        SamplerSpec::Uniform => Sampler::Uniform,
        SamplerSpec::Quantile => Sampler::QuantileSpaced,
        SamplerSpec::ShapeAware => Sampler::ShapeAware,
    }
}

fn tolerance(spec: &ProblemFile) -> Tolerance {
    let mut tol = Tolerance::default();
    if let Some(q) = spec.tolerances.quad_rel {
        tol.quad_rel = q;
    }
    tol
}

fn run(
    spec: &ProblemFile,
    compiled: &CompiledProblem,
    trace_out: Option<PathBuf>,
    report_out: Option<PathBuf>,
    timings: bool,
) -> anyhow::Result<()> {
    let tol = tolerance(spec);
    let epsilon = spec.tolerances.epsilon;
    let sampler = to_sampler(spec.discretization.sampler);
    let mut rows: Vec<ResultRow> = Vec::new();
    let mut trace: Option<String> = None;

    if compiled.shape_was_auto {
        println!("detected shape: {}", describe_shape(&compiled.shape));
    }

    if let Some(event) = compiled.event {
        // conditional problem: closed form for the analytic method, level
        // search as the generic numeric route
        let problem = ConditionalProblem::new(
            compiled.pbox.clone(),
            compiled.objective.clone(),
            compiled.shape.clone(),
            event,
        )?;
        if matches!(spec.method, MethodSpec::Analytic | MethodSpec::All) {
            let t = Instant::now();
            let result = conditional_bounds_closed(&problem)?;
            rows.push(ResultRow {
                result,
                seconds: t.elapsed().as_secs_f64(),
            });
        }
        if matches!(
            spec.method,
            MethodSpec::Lp | MethodSpec::Randomset | MethodSpec::All
        ) {
            let g = spec.discretization.search_grid;
            let t = Instant::now();
            let result = conditional_bounds_search(&problem, (g, g))?;
            rows.push(ResultRow {
                result,
                seconds: t.elapsed().as_secs_f64(),
            });
        }
    } else {
        if matches!(spec.method, MethodSpec::Analytic | MethodSpec::All) {
            let t = Instant::now();
            let (result, (ex_lo, _ex_up)) = analytic::bounds_general(
                &compiled.pbox,
                &compiled.objective,
                &compiled.shape,
                epsilon.unwrap_or(1e-3),
                &tol,
            )?;
            rows.push(ResultRow {
                result,
                seconds: t.elapsed().as_secs_f64(),
            });
            trace = Some(report::trace_csv(&compiled.pbox, &ex_lo, 200));
        }
        if matches!(spec.method, MethodSpec::Lp | MethodSpec::All) {
            let t = Instant::now();
            let result = match epsilon {
                Some(e) => refine_lp(
                    &compiled.pbox,
                    &compiled.objective,
                    &compiled.shape,
                    e,
                    64,
                    sampler,
                )?,
                None => {
                    let points = sample_points(
                        &compiled.pbox,
                        &compiled.shape,
                        sampler,
                        spec.discretization.lp_points,
                    )?;
                    let lower = primal_bound(&build_primal(
                        &compiled.pbox,
                        &compiled.objective,
                        &points,
                        Target::Lower,
                        false,
                    )?)?
                    .value;
                    let upper = primal_bound(&build_primal(
                        &compiled.pbox,
                        &compiled.objective,
                        &points,
                        Target::Upper,
                        false,
                    )?)?
                    .value;
                    let mut r = BoundsResult::new(Method::Lp, lower.min(upper), upper.max(lower))
                        .with_size(points.len());
                    let d_lo =
                        dual_bound(&compiled.pbox, &compiled.objective, &points, Target::Lower)?;
                    let d_up =
                        dual_bound(&compiled.pbox, &compiled.objective, &points, Target::Upper)?;
                    r.detail("e_dstar_lower", d_lo);
                    r.detail("e_dstar_upper", d_up);
                    r
                }
            };
            rows.push(ResultRow {
                result,
                seconds: t.elapsed().as_secs_f64(),
            });
        }
        if matches!(spec.method, MethodSpec::Randomset | MethodSpec::All) {
            let t = Instant::now();
            let result = match epsilon {
                Some(e) => refine_bounds(
                    &compiled.pbox,
                    &compiled.objective,
                    &compiled.shape,
                    e,
                    64,
                )?,
                None => {
                    let levels = default_levels(spec.discretization.rs_levels);
                    let sw = sandwich_bounds(
                        &compiled.pbox,
                        &compiled.objective,
                        &compiled.shape,
                        &levels,
                    )?;
                    let mut r = BoundsResult::new(
                        Method::RandomSet,
                        sw.lower.center(),
                        sw.upper.center(),
                    )
                    .with_size(sw.cells);
                    r.enclosure = Some(Enclosure {
                        lower: sw.lower,
                        upper: sw.upper,
                        resolution: sw.cells,
                    });
                    if !sw.inner_consistent {
                        r.warn(
                            "inner discretization inconsistent at the band pinch; certified \
                             inner values use the outer-cell completion",
                        );
                    }
                    r
                }
            };
            rows.push(ResultRow {
                result,
                seconds: t.elapsed().as_secs_f64(),
            });
        }
    }

    print!("{}", report::text_table(&rows, timings));
    let report_path = report_out.or_else(|| spec.output.report.as_ref().map(PathBuf::from));
    if let Some(path) = report_path {
        std::fs::write(&path, report::results_csv(&rows, timings))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("results record written to {}", path.display());
    }
    let trace_path = trace_out.or_else(|| spec.output.trace.as_ref().map(PathBuf::from));
    if let Some(path) = trace_path {
        match &trace {
            Some(csv) => {
                std::fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("extremizer trace written to {}", path.display());
            }
            None => println!("trace requested but no analytic extremizer was computed"),
        }
    }
    Ok(())
}

fn converge(
    spec: &ProblemFile,
    compiled: &CompiledProblem,
    sizes: &[usize],
    report_out: Option<PathBuf>,
) -> anyhow::Result<()> {
    anyhow::ensure!(
        compiled.event.is_none(),
        "convergence tables apply to unconditional problems"
    );
    let sampler = to_sampler(spec.discretization.sampler);
    let want_lp = matches!(spec.method, MethodSpec::Lp | MethodSpec::All);
    let want_rs = matches!(spec.method, MethodSpec::Randomset | MethodSpec::All);
    let mut rows = Vec::new();
    for &size in sizes {
        let mut row = ConvergenceRow {
            size,
            e_star: None,
            e_dstar: None,
            lp_gap: None,
            rs_outer: None,
            rs_inner: None,
            rs_gap: None,
        };
        if want_lp {
            let points =
                sample_points(&compiled.pbox, &compiled.shape, sampler, size)?;
            let e_star = primal_bound(&build_primal(
                &compiled.pbox,
                &compiled.objective,
                &points,
                Target::Lower,
                false,
            )?)?
            .value;
            let e_dstar =
                dual_bound(&compiled.pbox, &compiled.objective, &points, Target::Lower)?;
            row.e_star = Some(e_star);
            row.e_dstar = Some(e_dstar);
            row.lp_gap = Some((e_star - e_dstar).abs());
        }
        if want_rs {
            let sw = sandwich_bounds(
                &compiled.pbox,
                &compiled.objective,
                &compiled.shape,
                &default_levels(size),
            )?;
            row.rs_outer = Some(sw.lower.lo);
            row.rs_inner = Some(sw.lower.hi);
            row.rs_gap = Some(sw.lower.width());
        }
        rows.push(row);
    }
    print!("{}", report::convergence_table(&rows));
    if let Some(path) = report_out {
        std::fs::write(&path, report::convergence_csv(&rows))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("convergence record written to {}", path.display());
    }
    Ok(())
}
