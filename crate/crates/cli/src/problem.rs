//! Problem-file schema: a single self-describing JSON document with a
//! versioned schema field.

use anyhow::{bail, Context};
use serde::Deserialize;

use pbox_expect::objective::{Extremum, ExtremumKind, ObjectiveFn, Shape};
use pbox_expect::pbox::{CdfSpec, ConditioningEvent, PBox};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    pub pbox: PBoxSpec,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub shape: ShapeSpec,
    #[serde(default)]
    pub event: Option<EventSpec>,
    #[serde(default)]
    pub method: MethodSpec,
    #[serde(default)]
    pub tolerances: TolerancesSpec,
    #[serde(default)]
    pub discretization: DiscretizationSpec,
    /// Reserved for member-sampling utilities; recorded in reports.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PBoxSpec {
    pub lower: CdfFileSpec,
    pub upper: CdfFileSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CdfFileSpec {
    Exponential {
        rate: f64,
    },
    Tabulated {
        points: Vec<(f64, f64)>,
    },
    Expression {
        source: String,
        #[serde(default)]
        support: Option<(f64, f64)>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ObjectiveSpec {
    Expression { expression: String },
    Catalog { catalog: CatalogFn },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CatalogFn {
    Affine { intercept: f64, slope: f64 },
    QuadraticPeak { peak: f64, center: f64 },
    ScaledCosine { amplitude: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ShapeSpec {
    Auto(AutoKeyword),
    Named(NamedShape),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AutoKeyword {
    Auto,
}

impl Default for ShapeSpec {
    fn default() -> Self {
        ShapeSpec::Auto(AutoKeyword::Auto)
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NamedShape {
    Nondecreasing,
    Nonincreasing,
    UnimodalMax { location: f64 },
    UnimodalMin { location: f64 },
    Alternating { extrema: Vec<ExtremumSpec> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremumSpec {
    pub location: f64,
    pub kind: ExtremumKindSpec,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumKindSpec {
    Min,
    Max,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub b0: f64,
    pub b1: f64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MethodSpec {
    Analytic,
    Lp,
    Randomset,
    #[default]
    All,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSpec {
    /// Refinement tolerance; absent means one pass at the configured sizes.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub quad_rel: Option<f64>,
}

impl Default for TolerancesSpec {
    fn default() -> Self {
        TolerancesSpec {
            epsilon: None,
            quad_rel: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSpec {
    #[serde(default = "default_lp_points")]
    pub lp_points: usize,
    #[serde(default = "default_rs_levels")]
    pub rs_levels: usize,
    #[serde(default = "default_search_grid")]
    pub search_grid: usize,
    #[serde(default = "default_scan_size")]
    pub scan_size: usize,
    #[serde(default)]
    pub sampler: SamplerSpec,
}

fn default_lp_points() -> usize {
    2048
}
fn default_rs_levels() -> usize {
    2048
}
fn default_search_grid() -> usize {
    128
}
fn default_scan_size() -> usize {
    4096
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        DiscretizationSpec {
            lp_points: default_lp_points(),
            rs_levels: default_rs_levels(),
            search_grid: default_search_grid(),
            scan_size: default_scan_size(),
            sampler: SamplerSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerSpec {
    Uniform,
    #[default]
    Quantile,
    ShapeAware,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub trace: Option<String>,
    #[serde(default)]
    pub report: Option<String>,
}

/// The problem file compiled into core types.
pub struct CompiledProblem {
    pub pbox: PBox,
    pub objective: ObjectiveFn,
    pub shape: Shape,
    pub shape_was_auto: bool,
    pub event: Option<ConditioningEvent>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> anyhow::Result<ProblemFile> {
        let file: ProblemFile = serde_json::from_str(text).context("problem file schema")?;
        if file.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            );
        }
        Ok(file)
    }

    pub fn compile(&self) -> anyhow::Result<CompiledProblem> {
        let lower = build_cdf(&self.pbox.lower).context("pbox.lower")?;
        let upper = build_cdf(&self.pbox.upper).context("pbox.upper")?;
        let pbox = PBox::new(lower, upper).context("pbox")?;

        let objective = match &self.objective {
            ObjectiveSpec::Expression { expression } => {
                ObjectiveFn::parse(expression).context("objective.expression")?
            }
            ObjectiveSpec::Catalog { catalog } => match catalog {
                CatalogFn::Affine { intercept, slope } => {
                    ObjectiveFn::affine(*intercept, *slope)
                }
                CatalogFn::QuadraticPeak { peak, center } => {
                    ObjectiveFn::quadratic_peak(*peak, *center)
                }
                CatalogFn::ScaledCosine { amplitude } => ObjectiveFn::scaled_x_cos(*amplitude),
            },
        };
        objective
            .check_finite(pbox.domain(), 512)
            .context("objective")?;

        let (shape, shape_was_auto) = match &self.shape {
            ShapeSpec::Auto(_) => (
                pbox_expect::objective::detect_shape(
                    &objective,
                    pbox.domain(),
                    self.discretization.scan_size,
                )
                .context("shape detection")?,
                true,
            ),
            ShapeSpec::Named(named) => {
                let shape = match named {
                    NamedShape::Nondecreasing => Shape::Nondecreasing,
                    NamedShape::Nonincreasing => Shape::Nonincreasing,
                    NamedShape::UnimodalMax { location } => Shape::UnimodalMax(*location),
                    NamedShape::UnimodalMin { location } => Shape::UnimodalMin(*location),
                    NamedShape::Alternating { extrema } => Shape::alternating(
                        extrema
                            .iter()
                            .map(|e| Extremum {
                                location: e.location,
                                kind: match e.kind {
                                    ExtremumKindSpec::Min => ExtremumKind::Min,
                                    ExtremumKindSpec::Max => ExtremumKind::Max,
                                },
                            })
                            .collect(),
                    )
                    .context("shape")?,
                };
                let report = pbox_expect::objective::verify_shape(
                    &objective,
                    &shape,
                    pbox.domain(),
                    self.discretization.scan_size,
                );
                if let Some((x, what)) = report.violations.first() {
                    bail!("declared shape inconsistent with objective at x={x}: {what}");
                }
                (shape, false)
            }
        };

        let event = match &self.event {
            Some(ev) => {
                let event = ConditioningEvent::new(ev.b0, ev.b1).context("event")?;
                event.validate_for(&pbox).context("event")?;
                Some(event)
            }
            None => None,
        };
        if event.is_some()
            && matches!(self.method, MethodSpec::Analytic | MethodSpec::All)
            && !matches!(
                shape,
                Shape::Nondecreasing
                    | Shape::Nonincreasing
                    | Shape::UnimodalMax(_)
                    | Shape::UnimodalMin(_)
            )
        {
            bail!("analytic conditional bounds need a monotone or unimodal shape");
        }

        Ok(CompiledProblem {
            pbox,
            objective,
            shape,
            shape_was_auto,
            event,
        })
    }
}

fn build_cdf(spec: &CdfFileSpec) -> anyhow::Result<CdfSpec> {
    Ok(match spec {
        CdfFileSpec::Exponential { rate } => CdfSpec::exponential(*rate)?,
        CdfFileSpec::Tabulated { points } => CdfSpec::tabulated(points.clone())?,
        CdfFileSpec::Expression { source, support } => CdfSpec::expression(source, *support)?,
    })
}
