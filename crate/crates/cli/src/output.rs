//! Report and tensor serialization: JSON documents and the CSV summary.

use serde::Serialize;
use serde_json::{json, Value};

use finslerlab_core::change::{BarredDerived, ChangeFrame};
use finslerlab_core::geometry::Frame;
use finslerlab_core::jet::Jet;
use finslerlab_core::tensor::{Grid1, Grid2, Grid3};
use finslerlab_core::verify::VerificationReport;

/// Envelope for verification output: the run parameters echoed back plus the
/// reports, serialized deterministically.
#[derive(Serialize)]
pub struct ReportDocument<'a> {
    pub run: &'a crate::RunConfig,
    pub reports: &'a [VerificationReport],
}

/// Owned counterpart used to read report files back.
#[derive(serde::Deserialize)]
pub struct OwnedReportDocument {
    pub run: crate::RunConfig,
    pub reports: Vec<VerificationReport>,
}

pub fn reports_to_json(config: &crate::RunConfig, reports: &[VerificationReport]) -> String {
    let doc = ReportDocument { run: config, reports };
    let mut text = serde_json::to_string_pretty(&doc).expect("report serialization");
    text.push('\n');
    text
}

/// Parses a report document, which doubles as schema validation of emitted
/// JSON in tests.
pub fn parse_reports(text: &str) -> Result<OwnedReportDocument, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn reports_to_csv(reports: &[VerificationReport]) -> String {
    let mut out =
        String::from("identity,suite,samples,max_abs,max_rel,mean_abs,tolerance,verdict\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{:e},{:e},{:e},{:e},{}\n",
            r.id,
            r.suite,
            r.samples,
            r.max_abs,
            r.max_rel,
            r.mean_abs,
            r.tolerance,
            if r.pass { "pass" } else { "fail" }
        ));
    }
    out
}

fn vec1(g: &Grid1<Jet>) -> Value {
    Value::from(g.data().iter().map(Jet::value).collect::<Vec<f64>>())
}

fn vec2(g: &Grid2<Jet>) -> Value {
    let n = g.dim();
    Value::from(
        (0..n)
            .map(|i| (0..n).map(|j| g.at(i, j).value()).collect::<Vec<f64>>())
            .collect::<Vec<_>>(),
    )
}

fn vec3(g: &Grid3<Jet>) -> Value {
    let n = g.dim();
    Value::from(
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| g.at(i, j, k).value()).collect::<Vec<f64>>())
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>(),
    )
}

fn vec3_values(g: &Grid3<f64>) -> Value {
    let n = g.dim();
    Value::from(
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| *g.at(i, j, k)).collect::<Vec<f64>>())
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>(),
    )
}

/// The tensor dump for `compute`: index convention is row-major with the
/// contravariant slot first, so `connection[i][j][k]` holds the coefficient
/// with upper index i and lower indices (j, k).
pub fn frame_to_json(frame: &Frame) -> Value {
    json!({
        "layout": "row-major nested arrays, contravariant index first",
        "point": { "x": frame.point.x, "y": frame.point.y },
        "metric_value": frame.l.value(),
        "energy": frame.energy.value(),
        "support_covector": vec1(&frame.l1),
        "support_vector": vec1(&frame.l_up),
        "fundamental": vec2(&frame.g),
        "fundamental_inverse": vec2(&frame.g_inv),
        "angular": vec2(&frame.h),
        "cartan": vec3(&frame.c_low),
        "cartan_raised": vec3(&frame.c_up),
        "spray": Value::from(
            frame.spray_g.data().iter().map(|j| 2.0 * j.value()).collect::<Vec<f64>>()
        ),
        "nonlinear": vec2(&frame.nl),
        "connection": vec3(&frame.gamma),
        "torsion_v": vec3(&frame.p_tor),
        "torsion_curvature": vec3(&frame.r_tor),
    })
}

/// The barred blocks of the dump: closed-form change data plus the
/// difference tensor and its contractions.
pub fn change_to_json(frame: &Frame, cf: &ChangeFrame, barred: &Frame) -> Value {
    let derived = BarredDerived::build(frame, cf);
    json!({
        "metric_value": cf.lbar.value(),
        "conformal_factor": cf.e_sigma.value(),
        "one_form_value": cf.beta.value(),
        "tau": cf.tau.value(),
        "fundamental": vec2(&cf.gbar),
        "cartan": vec3(&cf.cbar_low),
        "difference": vec3(&cf.d),
        "difference_y": vec2(&cf.d0j),
        "difference_yy": vec1(&cf.d00),
        "spray_direct": Value::from(
            barred.spray_g.data().iter().map(|j| 2.0 * j.value()).collect::<Vec<f64>>()
        ),
        "nonlinear_direct": vec2(&barred.nl),
        "connection_direct": vec3(&barred.gamma),
        "connection_shifted": vec3_values(&Grid3::from_fn(frame.n, |i, j, k| {
            frame.gamma.at(i, j, k).value() + cf.d.at(i, j, k).value()
        })),
        "hv_torsion_shift": vec3(&cf.a_diff),
        "torsion_v_shifted": vec3_values(&Grid3::from_fn(frame.n, |i, j, k| {
            *derived.pbar.at(i, j, k)
        })),
    })
}
