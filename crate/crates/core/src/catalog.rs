//! Declarative catalog of metrics, scalar fields and 1-forms with known
//! analytic structure, plus deterministic rejection sampling of valid points.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::PointState;
use crate::jet::{Jet, JetContext, JetError, LuFactors, Var};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum CatalogError {
    /// Spec fails its structural checks (dimension mismatch, non-SPD base, ...).
    InvalidSpec {
        reason: String,
    },
    /// Point outside the metric's validity domain.
    InvalidPoint {
        l_value: f64,
    },
    /// More than the allowed number of consecutive rejections while sampling.
    SamplingExhausted {
        rejections: usize,
    },
    Jet(JetError),
}

impl fmt::Display for CatalogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogError::InvalidSpec { reason } => write!(f, "invalid spec: {reason}"),
            CatalogError::InvalidPoint { l_value } => {
                write!(f, "metric value {l_value} invalid at requested point")
            }
            CatalogError::SamplingExhausted { rejections } => {
                write!(f, "sampling exhausted after {rejections} consecutive rejections")
            }
            CatalogError::Jet(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CatalogError {}

impl From<JetError> for CatalogError {
    fn from(e: JetError) -> Self {
        CatalogError::Jet(e)
    }
}

/// Riemannian base descriptors; both are smooth and SPD on the sample box.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum RiemannianBase {
    /// `a_ii(x) = 1 + c_i (x^i)^2`, off-diagonal zero.
    DiagonalPoly { coeffs: Vec<f64> },
    /// `a_ij = delta_ij + amplitude * exp(-|x|^2 / width^2) u_i u_j` with
    /// `u = (1, .., 1)/sqrt(n)`.
    GaussianBump { amplitude: f64, width: f64 },
}

impl RiemannianBase {
    fn validate(&self, n: usize) -> Result<(), CatalogError> {
        match self {
            RiemannianBase::DiagonalPoly { coeffs } => {
                if coeffs.len() != n {
                    return Err(CatalogError::InvalidSpec {
                        reason: format!("diagonal coefficients arity {} != n {}", coeffs.len(), n),
                    });
                }
                for &c in coeffs {
                    // 1 + c x^2 must stay positive on |x| <= 1.
                    if c <= -1.0 {
                        return Err(CatalogError::InvalidSpec {
                            reason: format!("diagonal coefficient {c} breaks positivity"),
                        });
                    }
                }
            }
            RiemannianBase::GaussianBump { amplitude, width } => {
                if !(*width > 0.0) {
                    return Err(CatalogError::InvalidSpec {
                        reason: format!("bump width {width} not positive"),
                    });
                }
                // Rank-one perturbation keeps SPD iff 1 + amplitude * bump > 0.
                if *amplitude <= -1.0 {
                    return Err(CatalogError::InvalidSpec {
                        reason: format!("bump amplitude {amplitude} breaks positivity"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Jets of a_ij around `x`.
    fn eval_jets(&self, ctx: &Arc<JetContext>, x: &[f64]) -> Vec<Jet> {
        let n = ctx.dim();
        let xs: Vec<Jet> = (0..n).map(|i| Jet::seed(ctx, Var::X(i), x[i])).collect();
        let mut a = vec![Jet::constant(ctx, 0.0); n * n];
        match self {
            RiemannianBase::DiagonalPoly { coeffs } => {
                for i in 0..n {
                    let xi2 = &xs[i] * &xs[i];
                    a[i * n + i] = &Jet::constant(ctx, 1.0) + &xi2.scale(coeffs[i]);
                }
            }
            RiemannianBase::GaussianBump { amplitude, width } => {
                let mut norm2 = Jet::constant(ctx, 0.0);
                for xi in &xs {
                    norm2 = &norm2 + &(xi * xi);
                }
                let bump = norm2.scale(-1.0 / (width * width)).exp().scale(*amplitude);
                let u = 1.0 / n as f64; // u_i u_j with u = ones / sqrt(n)
                for i in 0..n {
                    for j in 0..n {
                        let base = if i == j { 1.0 } else { 0.0 };
                        a[i * n + j] = &Jet::constant(ctx, base) + &bump.scale(u);
                    }
                }
            }
        }
        a
    }
}

/// Scalar fields sigma(x).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum ScalarField {
    Zero,
    Constant {
        value: f64,
    },
    /// sigma = sum_i coeffs_i x^i
    Linear {
        coeffs: Vec<f64>,
    },
    /// sigma = amplitude * exp(-|x - center|^2 / width^2)
    Bump {
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
    },
}

impl ScalarField {
    pub fn is_zero(&self) -> bool {
        match self {
            ScalarField::Zero => true,
            ScalarField::Constant { value } => *value == 0.0,
            _ => false,
        }
    }

    /// Plain f64 evaluation, independent of the jet path.
    pub fn eval_value(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Zero => 0.0,
            ScalarField::Constant { value } => *value,
            ScalarField::Linear { coeffs } => coeffs.iter().zip(x).map(|(c, xi)| c * xi).sum(),
            ScalarField::Bump { amplitude, center, width } => {
                let mut norm2 = 0.0;
                for (i, xi) in x.iter().enumerate() {
                    let d = xi - center.get(i).copied().unwrap_or(0.0);
                    norm2 += d * d;
                }
                amplitude * math::exp(-norm2 / (width * width))
            }
        }
    }

    /// Constant fields have vanishing gradient; the homothety predicate.
    pub fn is_constant(&self) -> bool {
        matches!(self, ScalarField::Zero | ScalarField::Constant { .. })
    }

    pub fn eval_jet(&self, ctx: &Arc<JetContext>, x: &[f64]) -> Result<Jet, JetError> {
        let n = ctx.dim();
        Ok(match self {
            ScalarField::Zero => Jet::constant(ctx, 0.0),
            ScalarField::Constant { value } => Jet::constant(ctx, *value),
            ScalarField::Linear { coeffs } => {
                let mut acc = Jet::constant(ctx, 0.0);
                for i in 0..n.min(coeffs.len()) {
                    acc = &acc + &Jet::seed(ctx, Var::X(i), x[i]).scale(coeffs[i]);
                }
                acc
            }
            ScalarField::Bump { amplitude, center, width } => {
                let mut norm2 = Jet::constant(ctx, 0.0);
                for i in 0..n {
                    let c = center.get(i).copied().unwrap_or(0.0);
                    let d = &Jet::seed(ctx, Var::X(i), x[i]) - &Jet::constant(ctx, c);
                    norm2 = &norm2 + &(&d * &d);
                }
                norm2.scale(-1.0 / (width * width)).exp().scale(*amplitude)
            }
        })
    }
}

/// Covector fields b_i(x).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum CovectorField {
    Zero,
    Constant {
        values: Vec<f64>,
    },
    /// `b_i = sum_j matrix[i][j] x^j + offset_i`
    Linear {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
}

impl CovectorField {
    pub fn is_zero(&self) -> bool {
        match self {
            CovectorField::Zero => true,
            CovectorField::Constant { values } => values.iter().all(|&v| v == 0.0),
            _ => false,
        }
    }

    /// Plain f64 evaluation of component `i`, independent of the jet path.
    pub fn eval_value(&self, x: &[f64], i: usize) -> f64 {
        match self {
            CovectorField::Zero => 0.0,
            CovectorField::Constant { values } => values.get(i).copied().unwrap_or(0.0),
            CovectorField::Linear { matrix, offset } => {
                let mut acc = offset.get(i).copied().unwrap_or(0.0);
                if let Some(row) = matrix.get(i) {
                    for (j, m) in row.iter().enumerate() {
                        if j < x.len() {
                            acc += m * x[j];
                        }
                    }
                }
                acc
            }
        }
    }

    pub fn eval_jets(
        &self,
        ctx: &Arc<JetContext>,
        x: &[f64],
    ) -> Result<crate::tensor::Grid1<Jet>, JetError> {
        let n = ctx.dim();
        Ok(crate::tensor::Grid1::from_fn(n, |i| match self {
            CovectorField::Zero => Jet::constant(ctx, 0.0),
            CovectorField::Constant { values } => {
                Jet::constant(ctx, values.get(i).copied().unwrap_or(0.0))
            }
            CovectorField::Linear { matrix, offset } => {
                let mut acc = Jet::constant(ctx, offset.get(i).copied().unwrap_or(0.0));
                if let Some(row) = matrix.get(i) {
                    for j in 0..n.min(row.len()) {
                        acc = &acc + &Jet::seed(ctx, Var::X(j), x[j]).scale(row[j]);
                    }
                }
                acc
            }
        }))
    }
}

/// The change data (sigma, b) as declarative fields.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(deny_unknown_fields)
)]
pub struct FieldSpec {
    pub sigma: ScalarField,
    pub b: CovectorField,
}

impl FieldSpec {
    pub fn identity() -> FieldSpec {
        FieldSpec { sigma: ScalarField::Zero, b: CovectorField::Zero }
    }

    pub fn digest(&self) -> u64 {
        fnv1a(format!("{self:?}").as_bytes())
    }
}

/// Concrete metric functions L(x, y).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum MetricSpec {
    /// L = |y|.
    Euclidean { n: usize },
    /// L = sqrt(a_ij(x) y^i y^j).
    Riemannian { n: usize, base: RiemannianBase },
    /// L = sqrt(a_ij(x) y^i y^j) + b_i(x) y^i with |b|_a < 1.
    Randers { n: usize, base: RiemannianBase, b: CovectorField },
    /// L = e^{sigma(x)} |y|.
    ConformalFlat { n: usize, sigma: ScalarField },
    /// L = (sum_i (y^i)^4)^{1/4}; the genuinely non-Riemannian workhorse.
    Quartic { n: usize },
}

impl MetricSpec {
    pub fn dim(&self) -> usize {
        match self {
            MetricSpec::Euclidean { n }
            | MetricSpec::Riemannian { n, .. }
            | MetricSpec::Randers { n, .. }
            | MetricSpec::ConformalFlat { n, .. }
            | MetricSpec::Quartic { n } => *n,
        }
    }

    pub fn is_riemannian(&self) -> bool {
        matches!(
            self,
            MetricSpec::Euclidean { .. }
                | MetricSpec::Riemannian { .. }
                | MetricSpec::ConformalFlat { .. }
        )
    }

    pub fn digest(&self) -> u64 {
        fnv1a(format!("{self:?}").as_bytes())
    }

    /// Structural checks, including SPD of Riemannian bases on the sample box.
    pub fn validate(&self) -> Result<(), CatalogError> {
        let n = self.dim();
        if !(2..=4).contains(&n) {
            return Err(CatalogError::InvalidSpec {
                reason: format!("dimension {n} outside supported range 2..=4"),
            });
        }
        match self {
            MetricSpec::Riemannian { base, .. } => base.validate(n)?,
            MetricSpec::Randers { base, b, .. } => {
                base.validate(n)?;
                // Constant b must satisfy |b|_a < 1 everywhere on the box; for
                // the catalog bases a >= lower bound I, so |b|_euclid < 1 is
                // checked here and per-point validity covers the rest.
                if let CovectorField::Constant { values } = b {
                    let norm = math::hypot_slice(values);
                    if norm >= 1.0 {
                        return Err(CatalogError::InvalidSpec {
                            reason: format!("Randers 1-form norm {norm} >= 1"),
                        });
                    }
                }
            }
            _ => {}
        }
        if let MetricSpec::Riemannian { base, .. } | MetricSpec::Randers { base, .. } = self {
            spd_probe(base, n)?;
        }
        Ok(())
    }

    /// Jet of L around the point. Fails when L is not positive there.
    pub fn eval(&self, ctx: &Arc<JetContext>, p: &PointState) -> Result<Jet, CatalogError> {
        assert_eq!(ctx.dim(), self.dim(), "context dimension");
        let n = self.dim();
        let ys: Vec<Jet> = (0..n).map(|i| Jet::seed(ctx, Var::Y(i), p.y[i])).collect();
        let l = match self {
            MetricSpec::Euclidean { .. } => {
                let mut sum = Jet::constant(ctx, 0.0);
                for yi in &ys {
                    sum = &sum + &(yi * yi);
                }
                sum.sqrt()?
            }
            MetricSpec::Riemannian { base, .. } => riemann_root(base, ctx, p, &ys)?,
            MetricSpec::Randers { base, b, .. } => {
                let alpha = riemann_root(base, ctx, p, &ys)?;
                let bs = b.eval_jets(ctx, &p.x)?;
                let mut beta = Jet::constant(ctx, 0.0);
                for i in 0..n {
                    beta = &beta + &(bs.at(i) * &ys[i]);
                }
                &alpha + &beta
            }
            MetricSpec::ConformalFlat { sigma, .. } => {
                let mut sum = Jet::constant(ctx, 0.0);
                for yi in &ys {
                    sum = &sum + &(yi * yi);
                }
                let norm = sum.sqrt()?;
                &sigma.eval_jet(ctx, &p.x)?.exp() * &norm
            }
            MetricSpec::Quartic { .. } => {
                let mut sum = Jet::constant(ctx, 0.0);
                for yi in &ys {
                    let sq = yi * yi;
                    sum = &sum + &(&sq * &sq);
                }
                sum.powf(0.25)?
            }
        };
        if !(l.value() > 0.0) {
            return Err(CatalogError::InvalidPoint { l_value: l.value() });
        }
        Ok(l)
    }
}

impl MetricSpec {
    /// Plain f64 evaluation of L, independent of the jet path; the finite
    /// difference oracle differentiates this.
    pub fn eval_value(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        match self {
            MetricSpec::Euclidean { .. } => math::hypot_slice(y),
            MetricSpec::Riemannian { base, .. } => math::sqrt(quad_value(base, n, x, y)),
            MetricSpec::Randers { base, b, .. } => {
                let alpha = math::sqrt(quad_value(base, n, x, y));
                let beta: f64 = (0..n).map(|i| b.eval_value(x, i) * y[i]).sum();
                alpha + beta
            }
            MetricSpec::ConformalFlat { sigma, .. } => {
                math::exp(sigma.eval_value(x)) * math::hypot_slice(y)
            }
            MetricSpec::Quartic { .. } => {
                let s: f64 = y.iter().map(|v| v * v * v * v).sum();
                math::pow(s, 0.25)
            }
        }
    }

    /// Values of the Riemannian base a_ij(x), when the metric has one (the
    /// Christoffel oracle differentiates this).
    pub fn riemannian_base_values(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = self.dim();
        match self {
            MetricSpec::Euclidean { .. } => {
                let mut a = vec![0.0; n * n];
                for i in 0..n {
                    a[i * n + i] = 1.0;
                }
                Some(a)
            }
            MetricSpec::Riemannian { base, .. } => Some(base_values(base, n, x)),
            MetricSpec::ConformalFlat { sigma, .. } => {
                let f = math::exp(2.0 * sigma.eval_value(x));
                let mut a = vec![0.0; n * n];
                for i in 0..n {
                    a[i * n + i] = f;
                }
                Some(a)
            }
            _ => None,
        }
    }
}

fn base_values(base: &RiemannianBase, n: usize, x: &[f64]) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    match base {
        RiemannianBase::DiagonalPoly { coeffs } => {
            for i in 0..n {
                a[i * n + i] = 1.0 + coeffs[i] * x[i] * x[i];
            }
        }
        RiemannianBase::GaussianBump { amplitude, width } => {
            let norm2: f64 = x.iter().map(|v| v * v).sum();
            let bump = amplitude * math::exp(-norm2 / (width * width)) / n as f64;
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] = if i == j { 1.0 + bump } else { bump };
                }
            }
        }
    }
    a
}

fn quad_value(base: &RiemannianBase, n: usize, x: &[f64], y: &[f64]) -> f64 {
    let a = base_values(base, n, x);
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[i * n + j] * y[i] * y[j];
        }
    }
    acc
}

fn riemann_root(
    base: &RiemannianBase,
    ctx: &Arc<JetContext>,
    p: &PointState,
    ys: &[Jet],
) -> Result<Jet, CatalogError> {
    let n = ctx.dim();
    let a = base.eval_jets(ctx, &p.x);
    let mut quad = Jet::constant(ctx, 0.0);
    for i in 0..n {
        for j in 0..n {
            quad = &quad + &(&(&a[i * n + j] * &ys[i]) * &ys[j]);
        }
    }
    Ok(quad.sqrt()?)
}

/// Probes SPD of a Riemannian base on a coarse grid over the sample box.
fn spd_probe(base: &RiemannianBase, n: usize) -> Result<(), CatalogError> {
    let ctx = JetContext::new(n, 1);
    let steps = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut grid_point = vec![0usize; n];
    loop {
        let x: Vec<f64> = grid_point.iter().map(|&i| steps[i]).collect();
        let a = base.eval_jets(&ctx, &x);
        let values: Vec<f64> = a.iter().map(Jet::value).collect();
        if !is_spd(&values, n) {
            return Err(CatalogError::InvalidSpec {
                reason: format!("Riemannian base not positive definite at x = {x:?}"),
            });
        }
        // Advance the odometer.
        let mut idx = 0;
        loop {
            if idx == n {
                return Ok(());
            }
            grid_point[idx] += 1;
            if grid_point[idx] < steps.len() {
                break;
            }
            grid_point[idx] = 0;
            idx += 1;
        }
    }
}

/// Cholesky-style SPD test.
fn is_spd(a: &[f64], n: usize) -> bool {
    let mut m = a.to_vec();
    for k in 0..n {
        let mut d = m[k * n + k];
        for r in 0..k {
            d -= m[k * n + r] * m[k * n + r];
        }
        if d <= 0.0 {
            return false;
        }
        let root = math::sqrt(d);
        m[k * n + k] = root;
        for i in k + 1..n {
            let mut v = m[i * n + k];
            for r in 0..k {
                v -= m[i * n + r] * m[k * n + r];
            }
            m[i * n + k] = v / root;
        }
    }
    true
}

/// Splitmix64: tiny, seedable, identical on every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[lo, hi)` from the top 53 bits.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + u * (hi - lo)
    }
}

/// Sample box defaults: x in [-1, 1]^n, y in [-2, 2]^n with |y| >= 0.2.
#[derive(Debug, Clone, Copy)]
pub struct SampleBox {
    pub x_half_width: f64,
    pub y_half_width: f64,
    pub y_min_norm: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox { x_half_width: 1.0, y_half_width: 2.0, y_min_norm: 0.2 }
    }
}

pub struct SampleBatch {
    pub points: Vec<PointState>,
    pub rejections: usize,
}

const MAX_CONSECUTIVE_REJECTIONS: usize = 1000;

/// Draws `count` points that satisfy every validity flag for the metric and
/// (when given) the change: y away from zero, L > 0, g nondegenerate,
/// Lbar > 0 and gbar nondegenerate.
pub fn sample_points(
    metric: &MetricSpec,
    change: Option<&FieldSpec>,
    count: usize,
    seed: u64,
    ctx: &Arc<JetContext>,
) -> Result<SampleBatch, CatalogError> {
    metric.validate()?;
    let n = metric.dim();
    let sample_box = SampleBox::default();
    let mut rng = SplitMix64::new(seed);
    let mut points = Vec::with_capacity(count);
    let mut total_rejections = 0usize;
    let mut consecutive = 0usize;

    while points.len() < count {
        if consecutive > MAX_CONSECUTIVE_REJECTIONS {
            return Err(CatalogError::SamplingExhausted { rejections: consecutive });
        }
        let x: Vec<f64> = (0..n)
            .map(|_| rng.uniform(-sample_box.x_half_width, sample_box.x_half_width))
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|_| rng.uniform(-sample_box.y_half_width, sample_box.y_half_width))
            .collect();
        if math::hypot_slice(&y) < sample_box.y_min_norm {
            total_rejections += 1;
            consecutive += 1;
            continue;
        }
        let p = PointState::new(x, y);
        match point_is_valid(metric, change, ctx, &p) {
            Ok(true) => {
                consecutive = 0;
                let mut p = p;
                p.l_positive = true;
                points.push(p);
            }
            Ok(false) | Err(_) => {
                total_rejections += 1;
                consecutive += 1;
            }
        }
    }

    Ok(SampleBatch { points, rejections: total_rejections })
}

/// Re-checks every validity flag for one point (also used post hoc by tests).
pub fn point_is_valid(
    metric: &MetricSpec,
    change: Option<&FieldSpec>,
    ctx: &Arc<JetContext>,
    p: &PointState,
) -> Result<bool, CatalogError> {
    let n = metric.dim();
    let l = match metric.eval(ctx, p) {
        Ok(l) => l,
        Err(CatalogError::InvalidPoint { .. }) | Err(CatalogError::Jet(_)) => return Ok(false),
        Err(other) => return Err(other),
    };
    if !(l.value() > 0.0) {
        return Ok(false);
    }
    if !metric_tensor_ok(&l, ctx, n) {
        return Ok(false);
    }
    if let Some(fields) = change {
        let sigma = match fields.sigma.eval_jet(ctx, &p.x) {
            Ok(s) => s,
            Err(_) => return Ok(false),
        };
        let b = match fields.b.eval_jets(ctx, &p.x) {
            Ok(b) => b,
            Err(_) => return Ok(false),
        };
        let mut lbar = &sigma.exp() * &l;
        for i in 0..n {
            lbar = &lbar + &(b.at(i) * &Jet::seed(ctx, Var::Y(i), p.y[i]));
        }
        if !(lbar.value() > 0.0) {
            return Ok(false);
        }
        if !metric_tensor_ok(&lbar, ctx, n) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Value-part nondegeneracy of the fundamental tensor of a metric jet.
fn metric_tensor_ok(l: &Jet, ctx: &Arc<JetContext>, n: usize) -> bool {
    let energy = (l * l).scale(0.5);
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        let di = energy.deriv(Var::Y(i));
        for j in 0..n {
            g[i * n + j] = di.deriv(Var::Y(j)).value();
        }
    }
    LuFactors::factor(&g, n, ctx.guards().cond_bound).is_ok()
}

/// FNV-1a over bytes; used for reproducible spec digests in reports.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use crate::jet::DEFAULT_ORDER;

    #[test]
    fn quartic_value() {
        let ctx = JetContext::new(2, DEFAULT_ORDER);
        let spec = MetricSpec::Quartic { n: 2 };
        let p = PointState::new(vec![0.0, 0.0], vec![1.0, 1.0]);
        let l = spec.eval(&ctx, &p).unwrap();
        assert!((l.value() - math::pow(2.0, 0.25)).abs() < 1e-14);
    }

    #[test]
    fn riemannian_diagonal_value() {
        let ctx = JetContext::new(2, DEFAULT_ORDER);
        let spec = MetricSpec::Riemannian {
            n: 2,
            base: RiemannianBase::DiagonalPoly { coeffs: vec![1.0, 0.0] },
        };
        let p = PointState::new(vec![1.0, 0.0], vec![1.0, 0.0]);
        let l = spec.eval(&ctx, &p).unwrap();
        assert!((l.value() - math::sqrt(2.0)).abs() < 1e-14);
    }

    #[test]
    fn randers_flat_value() {
        let ctx = JetContext::new(2, DEFAULT_ORDER);
        let spec = MetricSpec::Randers {
            n: 2,
            base: RiemannianBase::DiagonalPoly { coeffs: vec![0.0, 0.0] },
            b: CovectorField::Constant { values: vec![0.1, 0.0] },
        };
        let p = PointState::new(vec![0.0, 0.0], vec![3.0, 4.0]);
        let l = spec.eval(&ctx, &p).unwrap();
        assert!((l.value() - 5.3).abs() < 1e-14);
    }

    #[test]
    fn sampling_is_deterministic() {
        let ctx = JetContext::new(2, DEFAULT_ORDER);
        let spec = MetricSpec::Quartic { n: 2 };
        let a = sample_points(&spec, None, 10, 42, &ctx).unwrap();
        let b = sample_points(&spec, None, 10, 42, &ctx).unwrap();
        for (pa, pb) in a.points.iter().zip(&b.points) {
            assert_eq!(pa.x, pb.x);
            assert_eq!(pa.y, pb.y);
        }
    }

    #[test]
    fn mild_randers_needs_no_rejections() {
        let ctx = JetContext::new(2, DEFAULT_ORDER);
        let spec = MetricSpec::Randers {
            n: 2,
            base: RiemannianBase::DiagonalPoly { coeffs: vec![0.0, 0.0] },
            b: CovectorField::Constant { values: vec![0.1, 0.0] },
        };
        let batch = sample_points(&spec, None, 50, 7, &ctx).unwrap();
        assert_eq!(batch.rejections, 0, "|b| = 0.1 keeps L positive everywhere");
    }

    #[test]
    fn adversarial_randers_points_remain_valid() {
        let ctx = JetContext::new(2, DEFAULT_ORDER);
        let spec = MetricSpec::Randers {
            n: 2,
            base: RiemannianBase::DiagonalPoly { coeffs: vec![0.0, 0.0] },
            b: CovectorField::Constant { values: vec![0.99, 0.0] },
        };
        let batch = sample_points(&spec, None, 30, 11, &ctx).unwrap();
        for p in &batch.points {
            assert!(point_is_valid(&spec, None, &ctx, p).unwrap());
        }
    }

    #[test]
    fn overlong_randers_b_rejected_at_load() {
        let spec = MetricSpec::Randers {
            n: 2,
            base: RiemannianBase::DiagonalPoly { coeffs: vec![0.0, 0.0] },
            b: CovectorField::Constant { values: vec![1.2, 0.0] },
        };
        assert!(matches!(spec.validate(), Err(CatalogError::InvalidSpec { .. })));
    }

    #[test]
    fn non_spd_base_rejected() {
        let spec = MetricSpec::Riemannian {
            n: 2,
            base: RiemannianBase::DiagonalPoly { coeffs: vec![-2.0, 0.0] },
        };
        assert!(matches!(spec.validate(), Err(CatalogError::InvalidSpec { .. })));
    }
}
