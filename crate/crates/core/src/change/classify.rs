//! Predicates over a sample set: homothety of sigma, Cartan-parallelism of b,
//! vanishing of the difference tensor, and the consistency laws tying them
//! together.

use alloc::sync::Arc;

use super::{ChangeError, ChangeFields, ChangeFrame};
use crate::catalog::{FieldSpec, MetricSpec};
use crate::geometry::{Frame, PointState};
use crate::jet::JetContext;
use crate::math;

pub const HOMOTHETY_TOL: f64 = 1e-10;
pub const PARALLEL_TOL: f64 = 1e-9;
pub const VANISHING_TOL: f64 = 1e-8;
const MIN_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeClassification {
    pub samples: usize,
    pub max_sigma_grad: f64,
    pub max_b_cov: f64,
    pub max_d: f64,
    pub is_homothetic: bool,
    pub is_b_parallel: bool,
    pub d_is_zero: bool,
    /// Parallel + vanishing difference forces homothety, and under homothety
    /// the two are equivalent.
    pub homothety_law_ok: bool,
    /// For a pure conformal change the difference vanishes iff sigma is
    /// homothetic; for a pure beta-change iff b is Cartan-parallel.
    pub vanishing_law_ok: bool,
}

pub fn classify_change(
    metric: &MetricSpec,
    spec: &FieldSpec,
    points: &[PointState],
    ctx: &Arc<JetContext>,
) -> Result<ChangeClassification, ChangeError> {
    if points.len() < MIN_SAMPLES {
        return Err(ChangeError::InsufficientSamples { got: points.len(), need: MIN_SAMPLES });
    }

    let mut max_sigma_grad = 0.0f64;
    let mut max_b_cov = 0.0f64;
    let mut max_d = 0.0f64;
    let mut used = 0usize;

    for p in points {
        let l = match metric.eval(ctx, p) {
            Ok(l) => l,
            Err(_) => continue,
        };
        let frame = Frame::build(ctx, p.clone(), l)?;
        let fields = ChangeFields::from_spec(spec, ctx, &p.x)?;
        let cf = ChangeFrame::build(&frame, &fields)?;
        used += 1;

        for i in 0..frame.n {
            max_sigma_grad = math::max(max_sigma_grad, math::abs(cf.sigma_grad.at(i).value()));
        }
        for v in cf.b_cov.data() {
            max_b_cov = math::max(max_b_cov, math::abs(v.value()));
        }
        for v in cf.d.data() {
            max_d = math::max(max_d, math::abs(v.value()));
        }
    }

    if used < MIN_SAMPLES {
        return Err(ChangeError::InsufficientSamples { got: used, need: MIN_SAMPLES });
    }

    let is_homothetic = max_sigma_grad <= HOMOTHETY_TOL;
    let is_b_parallel = max_b_cov <= PARALLEL_TOL;
    let d_is_zero = max_d <= VANISHING_TOL;

    let mut homothety_law_ok = true;
    if is_b_parallel && d_is_zero && !is_homothetic {
        homothety_law_ok = false;
    }
    if is_homothetic && (is_b_parallel != d_is_zero) {
        homothety_law_ok = false;
    }

    let mut vanishing_law_ok = true;
    if spec.b.is_zero() && (d_is_zero != is_homothetic) {
        vanishing_law_ok = false;
    }
    if spec.sigma.is_zero() && (d_is_zero != is_b_parallel) {
        vanishing_law_ok = false;
    }

    Ok(ChangeClassification {
        samples: used,
        max_sigma_grad,
        max_b_cov,
        max_d,
        is_homothetic,
        is_b_parallel,
        d_is_zero,
        homothety_law_ok,
        vanishing_law_ok,
    })
}
