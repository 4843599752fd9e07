//! The built-in catalog matrix: every metric kind crossed with every change
//! kind, the default universe for `finslerlab verify`.

use finslerlab_core::catalog::{CovectorField, FieldSpec, MetricSpec, RiemannianBase, ScalarField};

/// Metric entries exercised by the default run at dimension `n`.
pub fn metric_entries(n: usize) -> Vec<(String, MetricSpec)> {
    vec![
        (format!("euclidean_n{n}"), MetricSpec::Euclidean { n }),
        (
            format!("riemannian_n{n}"),
            MetricSpec::Riemannian {
                n,
                base: RiemannianBase::GaussianBump { amplitude: 0.4, width: 1.3 },
            },
        ),
        (
            format!("randers_n{n}"),
            MetricSpec::Randers {
                n,
                base: RiemannianBase::DiagonalPoly { coeffs: vec![0.4; n] },
                b: CovectorField::Constant {
                    values: (0..n).map(|i| if i == 0 { 0.2 } else { -0.1 }).collect(),
                },
            },
        ),
        (format!("quartic_n{n}"), MetricSpec::Quartic { n }),
    ]
}

/// Scalar-field entries for the change.
pub fn sigma_entries(n: usize) -> Vec<(String, ScalarField)> {
    vec![
        ("sigma_zero".to_string(), ScalarField::Zero),
        ("sigma_const".to_string(), ScalarField::Constant { value: 0.3 }),
        (
            "sigma_linear".to_string(),
            ScalarField::Linear { coeffs: (0..n).map(|i| 0.2 + 0.1 * i as f64).collect() },
        ),
        (
            "sigma_bump".to_string(),
            ScalarField::Bump { amplitude: 0.25, center: vec![0.1; n], width: 1.4 },
        ),
    ]
}

/// Covector-field entries for the change.
pub fn b_entries(n: usize) -> Vec<(String, CovectorField)> {
    vec![
        ("b_zero".to_string(), CovectorField::Zero),
        (
            "b_const".to_string(),
            CovectorField::Constant {
                values: (0..n).map(|i| if i == 0 { 0.15 } else { 0.05 }).collect(),
            },
        ),
        (
            "b_linear".to_string(),
            CovectorField::Linear {
                matrix: (0..n)
                    .map(|i| (0..n).map(|j| 0.04 * ((i + 2 * j) % 3) as f64 - 0.02).collect())
                    .collect(),
                offset: (0..n).map(|i| 0.1 - 0.03 * i as f64).collect(),
            },
        ),
    ]
}

/// All metric x sigma x b combinations at dimension `n`.
pub fn combinations(n: usize) -> Vec<(String, MetricSpec, FieldSpec)> {
    let mut out = Vec::new();
    for (mname, metric) in metric_entries(n) {
        for (sname, sigma) in sigma_entries(n) {
            for (bname, b) in b_entries(n) {
                out.push((
                    format!("{mname}+{sname}+{bname}"),
                    metric.clone(),
                    FieldSpec { sigma: sigma.clone(), b: b.clone() },
                ));
            }
        }
    }
    out
}

/// A reduced dimension-3 sweep: one change per metric kind.
pub fn combinations_n3() -> Vec<(String, MetricSpec, FieldSpec)> {
    let n = 3;
    let sigma = ScalarField::Linear { coeffs: vec![0.2, 0.3, -0.1] };
    let b = CovectorField::Constant { values: vec![0.1, 0.05, -0.02] };
    metric_entries(n)
        .into_iter()
        .map(|(mname, metric)| {
            (
                format!("{mname}+sigma_linear+b_const"),
                metric,
                FieldSpec { sigma: sigma.clone(), b: b.clone() },
            )
        })
        .collect()
}
