// Suite registry coverage against a hard-coded manifest, report
// reproducibility, and the suite-level error paths.

use std::collections::BTreeSet;

use finslerlab_core::catalog::{CovectorField, FieldSpec, MetricSpec, RiemannianBase, ScalarField};
use finslerlab_core::verify::{run_suite, run_suites, Suite, VerifyConfig, VerifyError, REGISTRY};

/// The identity manifest: every identity the library claims to check, with
/// its owning suite. Kept verbatim so registry drift is loud.
const MANIFEST: &[(&str, &str)] = &[
    ("metric.euler", "core_identities"),
    ("metric.homogeneity_l", "core_identities"),
    ("metric.homogeneity_g", "core_identities"),
    ("metric.homogeneity_c", "core_identities"),
    ("metric.homogeneity_n", "core_identities"),
    ("metric.homogeneity_gamma", "core_identities"),
    ("angular.y_orthogonal", "core_identities"),
    ("cartan.y_orthogonal", "core_identities"),
    ("support.unit_norm", "core_identities"),
    ("connection.n_from_gamma", "core_identities"),
    ("connection.deflection", "core_identities"),
    ("metricity.fundamental", "core_identities"),
    ("metricity.support", "core_identities"),
    ("structure.gamma_symmetric", "core_identities"),
    ("structure.cartan_symmetric", "core_identities"),
    ("structure.curvature_antisymmetric", "core_identities"),
    ("cartan.angular_ratio", "core_identities"),
    ("cartan.third_derivative_form", "core_identities"),
    ("riemannian.cartan_vanishes", "core_identities"),
    ("riemannian.christoffel_match", "core_identities"),
    ("riemannian.v_torsion_vanishes", "core_identities"),
    ("quartic.cartan_nonzero", "core_identities"),
    ("barred_metric.fundamental_form", "core_identities"),
    ("barred_metric.inverse_closed_form", "core_identities"),
    ("barred_metric.sigma_invariance", "core_identities"),
    ("barred_metric.m_orthogonal", "core_identities"),
    ("barred_metric.support_shift", "core_identities"),
    ("barred_cartan.closed_form", "core_identities"),
    ("barred_cartan.y_orthogonal", "core_identities"),
    ("barred_cartan.difference_closed_form", "core_identities"),
    ("dcartan_barred.closed_form", "core_identities"),
    ("dcartan_barred.euler_degree", "core_identities"),
    ("difference.full_vs_direct", "difference_tensor"),
    ("difference.symmetric", "difference_tensor"),
    ("difference.contract_once", "difference_tensor"),
    ("difference.contract_twice", "difference_tensor"),
    ("difference.barred_gamma_symmetric", "difference_tensor"),
    ("solver.vector_orthogonality", "difference_tensor"),
    ("solver.vector_two_routes", "difference_tensor"),
    ("solver.vector_plugback", "difference_tensor"),
    ("solver.one_index_compat", "difference_tensor"),
    ("solver.one_index_plugback", "difference_tensor"),
    ("solver.two_index_compat", "difference_tensor"),
    ("solver.two_index_plugback", "difference_tensor"),
    ("special.conformal", "specializations"),
    ("special.c_conformal", "specializations"),
    ("special.h_conformal", "specializations"),
    ("special.randers", "specializations"),
    ("special.beta_change", "specializations"),
    ("derived.spray_shift", "derived_objects"),
    ("derived.nonlinear_shift", "derived_objects"),
    ("derived.contracted_derivative", "derived_objects"),
    ("derived.contracted_derivative_fd", "derived_objects"),
    ("derived.rhs_difference_free", "derived_objects"),
    ("derived.hv_torsion_shift", "derived_objects"),
    ("derived.v_torsion_shift", "derived_objects"),
    ("derived.curvature_shift", "derived_objects"),
    ("derived.lowered_v_torsion", "derived_objects"),
    ("laws.homothety_consistency", "vanishing_laws"),
    ("laws.vanishing_consistency", "vanishing_laws"),
    ("laws.null_instance", "vanishing_laws"),
    ("laws.nonvanishing_floor", "vanishing_laws"),
    ("autodiff.metric", "autodiff_oracle"),
    ("autodiff.sigma", "autodiff_oracle"),
    ("autodiff.b", "autodiff_oracle"),
];

#[test]
fn registry_matches_manifest() {
    let registry: BTreeSet<(&str, &str)> =
        REGISTRY.iter().map(|d| (d.id, d.suite.name())).collect();
    let manifest: BTreeSet<(&str, &str)> = MANIFEST.iter().copied().collect();
    assert_eq!(registry, manifest, "registry and manifest drifted apart");
    assert_eq!(REGISTRY.len(), MANIFEST.len(), "duplicate identity ids");
}

/// Configs that jointly exercise every conditional identity.
fn coverage_configs() -> Vec<VerifyConfig> {
    let mut configs = Vec::new();
    // Riemannian base + conformal: the riemannian.* ids, all three
    // conformal specializations, and the nonvanishing floor.
    configs.push(VerifyConfig::new(
        MetricSpec::Riemannian {
            n: 2,
            base: RiemannianBase::GaussianBump { amplitude: 0.4, width: 1.3 },
        },
        FieldSpec {
            sigma: ScalarField::Linear { coeffs: vec![0.3, -0.1] },
            b: CovectorField::Zero,
        },
    ));
    // Quartic + constant 1-form: quartic id, beta-change specialization,
    // and the null instance (constant b is parallel over an x-independent
    // metric).
    configs.push(VerifyConfig::new(
        MetricSpec::Quartic { n: 2 },
        FieldSpec {
            sigma: ScalarField::Zero,
            b: CovectorField::Constant { values: vec![0.12, -0.04] },
        },
    ));
    // Riemannian + 1-form: the randers specialization.
    configs.push(VerifyConfig::new(
        MetricSpec::Riemannian {
            n: 2,
            base: RiemannianBase::DiagonalPoly { coeffs: vec![0.4, 0.2] },
        },
        FieldSpec {
            sigma: ScalarField::Zero,
            b: CovectorField::Constant { values: vec![0.15, 0.05] },
        },
    ));
    for c in &mut configs {
        c.samples = 3;
    }
    // The laws suite needs 30 samples.
    let mut laws_a = configs[0].clone();
    laws_a.samples = 30;
    let mut laws_b = configs[1].clone();
    laws_b.samples = 30;
    configs.push(laws_a);
    configs.push(laws_b);
    configs
}

#[test]
fn every_identity_is_emitted_by_some_config() {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for config in coverage_configs() {
        for suite in Suite::ALL {
            if suite == Suite::VanishingLaws && config.samples < 30 {
                continue;
            }
            for report in run_suite(suite, &config).unwrap() {
                assert_eq!(report.suite, Suite::parse(&report.suite).unwrap().name());
                seen.insert(report.id.clone());
            }
        }
    }
    let expected: BTreeSet<String> = REGISTRY.iter().map(|d| d.id.to_string()).collect();
    let missing: Vec<&String> = expected.difference(&seen).collect();
    assert!(missing.is_empty(), "never emitted: {missing:?}");
    let stray: Vec<&String> = seen.difference(&expected).collect();
    assert!(stray.is_empty(), "unregistered ids: {stray:?}");
}

#[test]
fn parallel_one_form_instance_is_numerically_silent() {
    // Over the flat base with a constant 1-form the difference tensor is
    // identically zero and every difference-suite residual sits at the
    // floating-point floor.
    let mut config = VerifyConfig::new(
        MetricSpec::Randers {
            n: 2,
            base: RiemannianBase::DiagonalPoly { coeffs: vec![0.0, 0.0] },
            b: CovectorField::Constant { values: vec![0.1, 0.0] },
        },
        FieldSpec {
            sigma: ScalarField::Zero,
            b: CovectorField::Constant { values: vec![0.05, -0.02] },
        },
    );
    config.samples = 20;
    let reports = run_suite(Suite::DifferenceTensor, &config).unwrap();
    for r in &reports {
        assert!(r.pass && r.max_rel <= 1e-12, "{} at {:.3e}", r.id, r.max_rel);
    }
    let flagship = reports.iter().find(|r| r.id == "difference.full_vs_direct").unwrap();
    assert!(flagship.max_abs <= 1e-12, "difference tensor should vanish identically");
}

#[test]
fn reports_are_bit_reproducible() {
    let mut config = VerifyConfig::new(
        MetricSpec::Randers {
            n: 2,
            base: RiemannianBase::DiagonalPoly { coeffs: vec![0.4, 0.2] },
            b: CovectorField::Constant { values: vec![0.2, -0.1] },
        },
        FieldSpec {
            sigma: ScalarField::Linear { coeffs: vec![0.2, 0.3] },
            b: CovectorField::Constant { values: vec![0.1, 0.05] },
        },
    );
    config.samples = 10;
    let suites = [Suite::CoreIdentities, Suite::DifferenceTensor, Suite::DerivedObjects];
    let first = run_suites(&suites, &config).unwrap();
    let second = run_suites(&suites, &config).unwrap();
    assert_eq!(first, second, "same config + seed must reproduce bit-identical reports");

    let mut other_seed = config.clone();
    other_seed.seed ^= 1;
    let third = run_suites(&suites, &other_seed).unwrap();
    assert_ne!(first, third, "a different seed must actually change the samples");
}

#[test]
fn tolerance_overrides_apply() {
    let mut config = VerifyConfig::new(
        MetricSpec::Euclidean { n: 2 },
        FieldSpec { sigma: ScalarField::Linear { coeffs: vec![0.5, 0.0] }, b: CovectorField::Zero },
    );
    config.samples = 5;
    config.tolerance_overrides = vec![("difference.full_vs_direct".to_string(), 1e-300)];
    let reports = run_suite(Suite::DifferenceTensor, &config).unwrap();
    let flagship = reports.iter().find(|r| r.id == "difference.full_vs_direct").unwrap();
    assert!(!flagship.pass, "an absurd tolerance must fail the identity");
    assert_eq!(flagship.tolerance, 1e-300);
}

#[test]
fn config_errors_are_reported() {
    let base = VerifyConfig::new(MetricSpec::Euclidean { n: 2 }, FieldSpec::identity());
    let mut zero_samples = base.clone();
    zero_samples.samples = 0;
    assert!(matches!(
        run_suite(Suite::CoreIdentities, &zero_samples),
        Err(VerifyError::Config { .. })
    ));

    let bad_metric = VerifyConfig::new(
        MetricSpec::Riemannian {
            n: 2,
            base: RiemannianBase::DiagonalPoly { coeffs: vec![-3.0, 0.0] },
        },
        FieldSpec::identity(),
    );
    assert!(matches!(run_suite(Suite::CoreIdentities, &bad_metric), Err(VerifyError::Catalog(_))));

    assert!(Suite::parse("difference_tensor").is_some());
    assert!(Suite::parse("no_such_suite").is_none());
}

#[test]
fn reduced_order_skips_deep_torsion_checks() {
    let mut config = VerifyConfig::new(
        MetricSpec::Quartic { n: 2 },
        FieldSpec {
            sigma: ScalarField::Linear { coeffs: vec![0.2, 0.1] },
            b: CovectorField::Constant { values: vec![0.1, 0.0] },
        },
    );
    config.samples = 3;
    config.order = 4;
    let reports = run_suite(Suite::DerivedObjects, &config).unwrap();
    let ids: Vec<&str> = reports.iter().map(|r| r.id.as_str()).collect();
    assert!(!ids.contains(&"derived.curvature_shift"), "order-4 run must skip it");
    assert!(!ids.contains(&"derived.lowered_v_torsion"), "order-4 run must skip it");
    assert!(ids.contains(&"derived.spray_shift"));
    for r in &reports {
        assert!(r.pass, "{} failed at order 4", r.id);
    }
}
