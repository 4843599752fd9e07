//! Identity verification: every formula of the library is checked against an
//! independent route (direct recomputation on the changed metric, finite
//! differences, or a structural property) over seeded sample sets, and the
//! outcomes are aggregated into reproducible reports.

mod autodiff_suite;
mod change_suites;
mod core_suite;
pub mod fd;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::catalog::{sample_points, CatalogError, FieldSpec, MetricSpec};
use crate::change::{ChangeError, ChangeFields, ChangeFrame};
use crate::geometry::{Frame, GeomError, PointState};
use crate::jet::JetContext;
use crate::math;

use alloc::sync::Arc;

/// The named suites. Each identity lives in exactly one suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Unbarred geometry invariants plus the barred-metric closed forms.
    CoreIdentities,
    /// The three-stage difference-tensor construction against the direct
    /// pipeline on the changed metric.
    DifferenceTensor,
    /// Closed forms of the special change kinds against the general tensor.
    Specializations,
    /// Spray, nonlinear-connection and torsion transformation laws.
    DerivedObjects,
    /// Homothety / parallelism / vanishing predicates and their laws.
    VanishingLaws,
    /// Jet derivatives against Richardson finite differences.
    AutodiffOracle,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::CoreIdentities,
        Suite::DifferenceTensor,
        Suite::Specializations,
        Suite::DerivedObjects,
        Suite::VanishingLaws,
        Suite::AutodiffOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::CoreIdentities => "core_identities",
            Suite::DifferenceTensor => "difference_tensor",
            Suite::Specializations => "specializations",
            Suite::DerivedObjects => "derived_objects",
            Suite::VanishingLaws => "vanishing_laws",
            Suite::AutodiffOracle => "autodiff_oracle",
        }
    }

    pub fn parse(name: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|s| s.name() == name)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a report's verdict is decided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CheckKind {
    /// Pass iff max relative residual (denominator `1 + |reference|`)
    /// stays at or below the tolerance.
    Residual,
    /// Pass iff the measured magnitude reaches at least the stated floor
    /// (used for "genuinely nonzero" assertions).
    Floor,
    /// Pass iff a boolean predicate held on the instance.
    Predicate,
}

/// One identity definition: id, owning suite, default tolerance.
#[derive(Debug, Clone, Copy)]
pub struct IdentityDef {
    pub id: &'static str,
    pub suite: Suite,
    pub tolerance: f64,
    pub kind: CheckKind,
}

/// The registry: the single source of truth for identity ids, their suites
/// and their default tolerances. Tests cross-check suite coverage against a
/// hard-coded manifest.
pub const REGISTRY: &[IdentityDef] = &[
    // -- core_identities: unbarred geometry -------------------------------
    def("metric.euler", Suite::CoreIdentities, 1e-10),
    def("metric.homogeneity_l", Suite::CoreIdentities, 1e-9),
    def("metric.homogeneity_g", Suite::CoreIdentities, 1e-9),
    def("metric.homogeneity_c", Suite::CoreIdentities, 1e-9),
    def("metric.homogeneity_n", Suite::CoreIdentities, 1e-9),
    def("metric.homogeneity_gamma", Suite::CoreIdentities, 1e-9),
    def("angular.y_orthogonal", Suite::CoreIdentities, 1e-10),
    def("cartan.y_orthogonal", Suite::CoreIdentities, 1e-10),
    def("support.unit_norm", Suite::CoreIdentities, 1e-10),
    def("connection.n_from_gamma", Suite::CoreIdentities, 1e-9),
    def("connection.deflection", Suite::CoreIdentities, 1e-8),
    def("metricity.fundamental", Suite::CoreIdentities, 1e-8),
    def("metricity.support", Suite::CoreIdentities, 1e-8),
    def("structure.gamma_symmetric", Suite::CoreIdentities, 1e-12),
    def("structure.cartan_symmetric", Suite::CoreIdentities, 1e-12),
    def("structure.curvature_antisymmetric", Suite::CoreIdentities, 1e-12),
    def("cartan.angular_ratio", Suite::CoreIdentities, 1e-10),
    def("cartan.third_derivative_form", Suite::CoreIdentities, 1e-10),
    def("riemannian.cartan_vanishes", Suite::CoreIdentities, 1e-12),
    def("riemannian.christoffel_match", Suite::CoreIdentities, 1e-9),
    def("riemannian.v_torsion_vanishes", Suite::CoreIdentities, 1e-9),
    floor("quartic.cartan_nonzero", Suite::CoreIdentities, 0.01),
    // -- core_identities: barred closed forms ------------------------------
    def("barred_metric.fundamental_form", Suite::CoreIdentities, 1e-9),
    def("barred_metric.inverse_closed_form", Suite::CoreIdentities, 1e-9),
    def("barred_metric.sigma_invariance", Suite::CoreIdentities, 1e-11),
    def("barred_metric.m_orthogonal", Suite::CoreIdentities, 1e-10),
    def("barred_metric.support_shift", Suite::CoreIdentities, 1e-10),
    def("barred_cartan.closed_form", Suite::CoreIdentities, 1e-9),
    def("barred_cartan.y_orthogonal", Suite::CoreIdentities, 1e-10),
    def("barred_cartan.difference_closed_form", Suite::CoreIdentities, 1e-9),
    def("dcartan_barred.closed_form", Suite::CoreIdentities, 1e-9),
    def("dcartan_barred.euler_degree", Suite::CoreIdentities, 1e-9),
    // -- difference_tensor --------------------------------------------------
    def("difference.full_vs_direct", Suite::DifferenceTensor, 1e-7),
    def("difference.symmetric", Suite::DifferenceTensor, 1e-9),
    def("difference.contract_once", Suite::DifferenceTensor, 1e-9),
    def("difference.contract_twice", Suite::DifferenceTensor, 1e-9),
    def("difference.barred_gamma_symmetric", Suite::DifferenceTensor, 1e-9),
    def("solver.vector_orthogonality", Suite::DifferenceTensor, 1e-10),
    def("solver.vector_two_routes", Suite::DifferenceTensor, 1e-12),
    def("solver.vector_plugback", Suite::DifferenceTensor, 1e-10),
    def("solver.one_index_compat", Suite::DifferenceTensor, 1e-9),
    def("solver.one_index_plugback", Suite::DifferenceTensor, 1e-10),
    def("solver.two_index_compat", Suite::DifferenceTensor, 1e-9),
    def("solver.two_index_plugback", Suite::DifferenceTensor, 1e-10),
    // -- specializations ----------------------------------------------------
    def("special.conformal", Suite::Specializations, 1e-8),
    def("special.c_conformal", Suite::Specializations, 1e-8),
    def("special.h_conformal", Suite::Specializations, 1e-8),
    def("special.randers", Suite::Specializations, 1e-8),
    def("special.beta_change", Suite::Specializations, 1e-8),
    // -- derived_objects ----------------------------------------------------
    def("derived.spray_shift", Suite::DerivedObjects, 1e-8),
    def("derived.nonlinear_shift", Suite::DerivedObjects, 1e-8),
    def("derived.contracted_derivative", Suite::DerivedObjects, 1e-8),
    def("derived.contracted_derivative_fd", Suite::DerivedObjects, 1e-6),
    def("derived.rhs_difference_free", Suite::DerivedObjects, 1e-9),
    def("derived.hv_torsion_shift", Suite::DerivedObjects, 1e-9),
    def("derived.v_torsion_shift", Suite::DerivedObjects, 1e-5),
    def("derived.curvature_shift", Suite::DerivedObjects, 1e-5),
    def("derived.lowered_v_torsion", Suite::DerivedObjects, 1e-5),
    // -- vanishing_laws -----------------------------------------------------
    pred("laws.homothety_consistency", Suite::VanishingLaws),
    pred("laws.vanishing_consistency", Suite::VanishingLaws),
    def("laws.null_instance", Suite::VanishingLaws, 1e-10),
    floor("laws.nonvanishing_floor", Suite::VanishingLaws, 1e-4),
    // -- autodiff_oracle ----------------------------------------------------
    def("autodiff.metric", Suite::AutodiffOracle, 1e-5),
    def("autodiff.sigma", Suite::AutodiffOracle, 1e-5),
    def("autodiff.b", Suite::AutodiffOracle, 1e-5),
];

const fn def(id: &'static str, suite: Suite, tolerance: f64) -> IdentityDef {
    IdentityDef { id, suite, tolerance, kind: CheckKind::Residual }
}

const fn floor(id: &'static str, suite: Suite, threshold: f64) -> IdentityDef {
    IdentityDef { id, suite, tolerance: threshold, kind: CheckKind::Floor }
}

const fn pred(id: &'static str, suite: Suite) -> IdentityDef {
    IdentityDef { id, suite, tolerance: 0.0, kind: CheckKind::Predicate }
}

pub fn lookup(id: &str) -> Option<&'static IdentityDef> {
    REGISTRY.iter().find(|d| d.id == id)
}

/// Per-identity verification outcome over a sample set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub id: String,
    pub suite: String,
    pub metric_digest: u64,
    pub change_digest: u64,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub max_abs: f64,
    pub max_rel: f64,
    pub mean_abs: f64,
    /// Relative residual per recorded comparison in sample order, capped at
    /// [`RESIDUAL_TRACE_CAP`] entries.
    pub residuals: Vec<f64>,
    pub pass: bool,
    pub notes: Option<String>,
}

/// Upper bound on the per-point residual trace kept in a report.
pub const RESIDUAL_TRACE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyError {
    Config { message: String },
    Catalog(CatalogError),
    Change(ChangeError),
    Geom(GeomError),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Config { message } => write!(f, "config error: {message}"),
            VerifyError::Catalog(e) => write!(f, "{e}"),
            VerifyError::Change(e) => write!(f, "{e}"),
            VerifyError::Geom(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for VerifyError {}

impl From<CatalogError> for VerifyError {
    fn from(e: CatalogError) -> Self {
        VerifyError::Catalog(e)
    }
}

impl From<ChangeError> for VerifyError {
    fn from(e: ChangeError) -> Self {
        VerifyError::Change(e)
    }
}

impl From<GeomError> for VerifyError {
    fn from(e: GeomError) -> Self {
        VerifyError::Geom(e)
    }
}

impl From<crate::jet::JetError> for VerifyError {
    fn from(e: crate::jet::JetError) -> Self {
        VerifyError::Geom(GeomError::Jet(e))
    }
}

/// One verification run: a metric, a change, and sampling parameters.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub metric: MetricSpec,
    pub change: FieldSpec,
    pub samples: usize,
    pub seed: u64,
    pub order: usize,
    /// `(identity id, tolerance)` overrides applied over the registry.
    pub tolerance_overrides: Vec<(String, f64)>,
}

impl VerifyConfig {
    pub fn new(metric: MetricSpec, change: FieldSpec) -> Self {
        VerifyConfig {
            metric,
            change,
            samples: 50,
            seed: 0xf1a5_1e55,
            order: crate::jet::DEFAULT_ORDER,
            tolerance_overrides: Vec::new(),
        }
    }

    fn tolerance_for(&self, def: &IdentityDef) -> f64 {
        self.tolerance_overrides
            .iter()
            .rev()
            .find(|(id, _)| id == def.id)
            .map(|(_, t)| *t)
            .unwrap_or(def.tolerance)
    }
}

/// Residual accumulator for one identity across the sample set.
pub(crate) struct Acc {
    id: &'static str,
    points: usize,
    max_abs: f64,
    max_rel: f64,
    sum_abs: f64,
    trace: Vec<f64>,
    notes: Option<String>,
}

impl Acc {
    pub fn new(id: &'static str) -> Acc {
        Acc {
            id,
            points: 0,
            max_abs: 0.0,
            max_rel: 0.0,
            sum_abs: 0.0,
            trace: Vec::new(),
            notes: None,
        }
    }

    /// Records a formula-vs-reference comparison of equal-shape component
    /// slices; the relative denominator is `1 + |reference|_inf`.
    pub fn record_vs(&mut self, formula: &[f64], reference: &[f64]) {
        debug_assert_eq!(formula.len(), reference.len());
        let mut diff = 0.0f64;
        let mut refmax = 0.0f64;
        for (a, b) in formula.iter().zip(reference) {
            diff = math::max(diff, math::abs(a - b));
            refmax = math::max(refmax, math::abs(*b));
        }
        self.push(diff, diff / (1.0 + refmax));
    }

    /// Records a should-be-zero quantity.
    pub fn record_zero(&mut self, values: &[f64]) {
        let mut m = 0.0f64;
        for v in values {
            m = math::max(m, math::abs(*v));
        }
        self.push(m, m);
    }

    /// Records a precomputed residual pair.
    pub fn push(&mut self, abs: f64, rel: f64) {
        self.points += 1;
        self.max_abs = math::max(self.max_abs, abs);
        self.max_rel = math::max(self.max_rel, rel);
        self.sum_abs += abs;
        if self.trace.len() < RESIDUAL_TRACE_CAP {
            self.trace.push(rel);
        }
    }

    pub fn note(&mut self, text: String) {
        match &mut self.notes {
            Some(existing) => {
                existing.push_str("; ");
                existing.push_str(&text);
            }
            None => self.notes = Some(text),
        }
    }

    pub fn finish(self, config: &VerifyConfig) -> VerificationReport {
        let def = lookup(self.id).expect("identity registered");
        let tolerance = config.tolerance_for(def);
        let pass = match def.kind {
            CheckKind::Residual => self.max_rel <= tolerance,
            CheckKind::Floor => self.max_abs >= tolerance,
            CheckKind::Predicate => self.max_abs == 0.0,
        };
        VerificationReport {
            id: self.id.to_string(),
            suite: def.suite.name().to_string(),
            metric_digest: config.metric.digest(),
            change_digest: config.change.digest(),
            seed: config.seed,
            samples: self.points,
            tolerance,
            max_abs: self.max_abs,
            max_rel: self.max_rel,
            mean_abs: if self.points == 0 { 0.0 } else { self.sum_abs / self.points as f64 },
            residuals: self.trace,
            pass,
            notes: self.notes,
        }
    }
}

/// Both pipelines at one point: the frame of L, the change data, the formula
/// route, and the direct frame of Lbar.
pub(crate) struct Bundle {
    pub frame: Frame,
    pub cf: ChangeFrame,
    pub barred: Frame,
}

pub(crate) fn build_bundle(
    config: &VerifyConfig,
    ctx: &Arc<JetContext>,
    point: &PointState,
) -> Result<Bundle, VerifyError> {
    let l = config.metric.eval(ctx, point)?;
    let frame = Frame::build(ctx, point.clone(), l)?;
    let fields = ChangeFields::from_spec(&config.change, ctx, &point.x)?;
    let cf = ChangeFrame::build(&frame, &fields)?;
    let barred = Frame::build(ctx, point.clone(), cf.lbar.clone())?;
    Ok(Bundle { frame, cf, barred })
}

pub(crate) fn draw_points(
    config: &VerifyConfig,
    ctx: &Arc<JetContext>,
) -> Result<Vec<PointState>, VerifyError> {
    let batch =
        sample_points(&config.metric, Some(&config.change), config.samples, config.seed, ctx)?;
    Ok(batch.points)
}

/// Runs one suite and returns its reports in registry order.
pub fn run_suite(
    suite: Suite,
    config: &VerifyConfig,
) -> Result<Vec<VerificationReport>, VerifyError> {
    if config.samples == 0 {
        return Err(VerifyError::Config { message: "samples must be positive".to_string() });
    }
    if config.order < 4 {
        return Err(VerifyError::Config {
            message: "jet order must be at least 4 for the Cartan pipeline".to_string(),
        });
    }
    config.metric.validate()?;
    let ctx = JetContext::new(config.metric.dim(), config.order);
    match suite {
        Suite::CoreIdentities => core_suite::run(config, &ctx),
        Suite::DifferenceTensor => change_suites::run_difference(config, &ctx),
        Suite::Specializations => change_suites::run_specializations(config, &ctx),
        Suite::DerivedObjects => change_suites::run_derived(config, &ctx),
        Suite::VanishingLaws => change_suites::run_laws(config, &ctx),
        Suite::AutodiffOracle => autodiff_suite::run(config, &ctx),
    }
}

/// Runs several suites back to back.
pub fn run_suites(
    suites: &[Suite],
    config: &VerifyConfig,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let mut out = Vec::new();
    for &s in suites {
        out.extend(run_suite(s, config)?);
    }
    Ok(out)
}

/// Formats a one-line summary, used by the CLI and the acceptance harness.
pub fn summary_line(r: &VerificationReport) -> String {
    format!(
        "{} [{}] max_rel={:.3e} tol={:.1e} -> {}",
        r.id,
        r.suite,
        r.max_rel,
        r.tolerance,
        if r.pass { "pass" } else { "FAIL" }
    )
}
