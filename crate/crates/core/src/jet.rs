//! Truncated multivariate Taylor-polynomial ("jet") arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients (derivative / multi-index
//! factorial) of a scalar quantity in the `2n` joint variables
//! `(x^1..x^n, y^1..y^n)` up to a fixed total order `K`. Arithmetic is exact
//! truncated-polynomial arithmetic, so extracted derivatives of order <= K
//! match analytic derivatives to machine precision for analytic inputs.
//!
//! Coefficients are stored densely in graded-lexicographic order; the
//! enumeration, multiplication table and per-variable differentiation tables
//! live in a shared [`JetContext`].

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

/// Total-order truncation default. Covers four y-derivatives of the metric
/// function plus one x-derivative of any third-y-derivative quantity.
pub const DEFAULT_ORDER: usize = 5;

/// Errors surfaced by jet construction and arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub enum JetError {
    /// Two jets from different contexts were combined.
    ContextMismatch,
    /// Value part of a divisor is below the configured epsilon.
    DivisionByZeroValue { value: f64 },
    /// Argument of a univariate composition lies outside its domain.
    DomainError { func: &'static str, value: f64 },
    /// A derivative of order beyond the jet's remaining valid order was requested.
    OrderExceeded { requested: usize, available: usize },
    /// Value-part matrix of a linear system is singular or too ill-conditioned.
    SingularValuePart { cond_estimate: f64 },
}

impl fmt::Display for JetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JetError::ContextMismatch => write!(f, "jets belong to different contexts"),
            JetError::DivisionByZeroValue { value } => {
                write!(f, "division by jet with value part {value:e}")
            }
            JetError::DomainError { func, value } => {
                write!(f, "{func} applied to jet with value part {value:e} outside domain")
            }
            JetError::OrderExceeded { requested, available } => {
                write!(f, "derivative order {requested} exceeds available order {available}")
            }
            JetError::SingularValuePart { cond_estimate } => {
                write!(f, "value-part matrix singular (condition estimate {cond_estimate:e})")
            }
        }
    }
}

impl core::error::Error for JetError {}

/// Tunable guard thresholds for jet arithmetic.
#[derive(Debug, Clone, Copy)]
pub struct JetGuards {
    /// Minimum |value part| accepted for a divisor.
    pub div_epsilon: f64,
    /// Maximum accepted condition estimate for linear-system value parts.
    pub cond_bound: f64,
}

impl Default for JetGuards {
    fn default() -> Self {
        JetGuards { div_epsilon: 1e-300, cond_bound: 1e12 }
    }
}

/// Shared enumeration of all multi-indices over `2n` variables with total
/// degree <= `order`, plus the derived multiplication and differentiation
/// tables. Read-only after construction; safe to share across threads.
pub struct JetContext {
    n: usize,
    num_vars: usize,
    order: usize,
    guards: JetGuards,
    /// Exponent tuples in graded-lex order (`monomials[0]` is the constant).
    monomials: Vec<Vec<u8>>,
    /// Exponents -> position in `monomials`.
    rank: BTreeMap<Vec<u8>, u32>,
    /// For output monomial `t`: ordered coefficient pairs `(p, q)` with
    /// `monomials[p] + monomials[q] = monomials[t]`.
    mul_pairs: Vec<(u32, u32)>,
    mul_offsets: Vec<u32>,
    /// Per variable `v`: `(dst, src, factor)` with
    /// `coeff_out[dst] = coeff_in[src] * factor` implementing d/dv.
    deriv_tables: Vec<Vec<(u32, u32, f64)>>,
    factorials: Vec<f64>,
}

impl fmt::Debug for JetContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetContext")
            .field("n", &self.n)
            .field("order", &self.order)
            .field("coeff_count", &self.monomials.len())
            .finish()
    }
}

fn enumerate_degree(vars: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if vars == 1 {
        prefix.push(degree as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    // Descending leading exponent gives lexicographic order within a degree.
    for e in (0..=degree).rev() {
        prefix.push(e as u8);
        enumerate_degree(vars - 1, degree - e, prefix, out);
        prefix.pop();
    }
}

impl JetContext {
    pub fn new(n: usize, order: usize) -> Arc<Self> {
        Self::with_guards(n, order, JetGuards::default())
    }

    pub fn with_guards(n: usize, order: usize, guards: JetGuards) -> Arc<Self> {
        assert!(n >= 1, "dimension must be positive");
        assert!(order >= 1, "truncation order must be at least 1");
        let num_vars = 2 * n;

        let mut monomials = Vec::new();
        for d in 0..=order {
            let mut prefix = Vec::with_capacity(num_vars);
            enumerate_degree(num_vars, d, &mut prefix, &mut monomials);
        }
        let mut rank = BTreeMap::new();
        for (i, m) in monomials.iter().enumerate() {
            rank.insert(m.clone(), i as u32);
        }

        // Multiplication table grouped by output monomial.
        let mut grouped: Vec<Vec<(u32, u32)>> = vec![Vec::new(); monomials.len()];
        for (p, mp) in monomials.iter().enumerate() {
            let dp: usize = mp.iter().map(|&e| e as usize).sum();
            for (q, mq) in monomials.iter().enumerate() {
                let dq: usize = mq.iter().map(|&e| e as usize).sum();
                if dp + dq > order {
                    continue;
                }
                let sum: Vec<u8> = mp.iter().zip(mq).map(|(a, b)| a + b).collect();
                let t = rank[&sum] as usize;
                grouped[t].push((p as u32, q as u32));
            }
        }
        let mut mul_pairs = Vec::new();
        let mut mul_offsets = Vec::with_capacity(monomials.len() + 1);
        mul_offsets.push(0u32);
        for g in &grouped {
            mul_pairs.extend_from_slice(g);
            mul_offsets.push(mul_pairs.len() as u32);
        }

        let mut deriv_tables = Vec::with_capacity(num_vars);
        for v in 0..num_vars {
            let mut table = Vec::new();
            for (src, m) in monomials.iter().enumerate() {
                if m[v] == 0 {
                    continue;
                }
                let mut lowered = m.clone();
                lowered[v] -= 1;
                let dst = rank[&lowered];
                // Taylor storage: d/dv maps c_{a} -> c_{a - e_v} * a_v.
                table.push((dst, src as u32, m[v] as f64));
            }
            deriv_tables.push(table);
        }

        let mut factorials = vec![1.0f64; order + 1];
        for k in 1..=order {
            factorials[k] = factorials[k - 1] * k as f64;
        }

        Arc::new(JetContext {
            n,
            num_vars,
            order,
            guards,
            monomials,
            rank,
            mul_pairs,
            mul_offsets,
            deriv_tables,
            factorials,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff_count(&self) -> usize {
        self.monomials.len()
    }

    pub fn guards(&self) -> &JetGuards {
        &self.guards
    }

    /// Total degree of the monomial at a coefficient position.
    pub fn monomial_degree(&self, index: usize) -> usize {
        self.monomials[index].iter().map(|&e| e as usize).sum()
    }

    fn position(&self, exponents: &[u8]) -> Option<u32> {
        self.rank.get(exponents).copied()
    }
}

/// Variable slots: `x^i` occupies slot `i`, `y^i` occupies slot `n + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Y(usize),
}

impl Var {
    pub fn slot(self, n: usize) -> usize {
        match self {
            Var::X(i) => {
                assert!(i < n);
                i
            }
            Var::Y(i) => {
                assert!(i < n);
                n + i
            }
        }
    }
}

/// A truncated Taylor expansion tied to a [`JetContext`].
///
/// `valid` is the total order up to which the stored coefficients are
/// trustworthy: fresh seeds carry the full context order, every
/// differentiation lowers it by one, and binary operations take the minimum.
#[derive(Clone)]
pub struct Jet {
    ctx: Arc<JetContext>,
    valid: usize,
    coeff: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(value = {}, valid <= {})", self.value(), self.valid)
    }
}

fn same_ctx(a: &Jet, b: &Jet) -> bool {
    Arc::ptr_eq(&a.ctx, &b.ctx)
}

impl Jet {
    /// Constant jet: value `c`, all derivatives zero (exact at every order).
    pub fn constant(ctx: &Arc<JetContext>, c: f64) -> Jet {
        let mut coeff = vec![0.0; ctx.coeff_count()];
        coeff[0] = c;
        Jet { ctx: Arc::clone(ctx), valid: ctx.order, coeff }
    }

    /// Coordinate seed: value `at`, unit first-order coefficient in `var`.
    pub fn seed(ctx: &Arc<JetContext>, var: Var, at: f64) -> Jet {
        let slot = var.slot(ctx.n);
        let mut coeff = vec![0.0; ctx.coeff_count()];
        coeff[0] = at;
        let mut exps = vec![0u8; ctx.num_vars];
        exps[slot] = 1;
        let pos = ctx.position(&exps).expect("order >= 1 guarantees first-order slots");
        coeff[pos as usize] = 1.0;
        Jet { ctx: Arc::clone(ctx), valid: ctx.order, coeff }
    }

    pub fn context(&self) -> &Arc<JetContext> {
        &self.ctx
    }

    /// Order-0 coefficient: the represented value at the base point.
    pub fn value(&self) -> f64 {
        self.coeff[0]
    }

    /// Remaining trustworthy total order.
    pub fn valid_order(&self) -> usize {
        self.valid
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeff
    }

    /// Mixed partial derivative at the base point for the given exponents
    /// (one entry per variable slot, x-block then y-block).
    pub fn extract(&self, exponents: &[u8]) -> Result<f64, JetError> {
        assert_eq!(exponents.len(), self.ctx.num_vars, "exponent tuple arity");
        let total: usize = exponents.iter().map(|&e| e as usize).sum();
        if total > self.valid {
            return Err(JetError::OrderExceeded { requested: total, available: self.valid });
        }
        let pos = self
            .ctx
            .position(exponents)
            .ok_or(JetError::OrderExceeded { requested: total, available: self.valid })?;
        let mut factor = 1.0;
        for &e in exponents {
            factor *= self.ctx.factorials[e as usize];
        }
        Ok(self.coeff[pos as usize] * factor)
    }

    /// First partial derivative value, convenience over [`Jet::extract`].
    pub fn d1(&self, var: Var) -> f64 {
        let mut exps = vec![0u8; self.ctx.num_vars];
        exps[var.slot(self.ctx.n)] = 1;
        self.extract(&exps).expect("first order available")
    }

    /// Jet of the partial derivative with respect to `var`.
    ///
    /// Panics if no valid order remains; the truncation budget is a static
    /// property of each pipeline, so running out is a programming error.
    pub fn deriv(&self, var: Var) -> Jet {
        assert!(self.valid > 0, "jet differentiated beyond its valid order");
        let slot = var.slot(self.ctx.n);
        let mut coeff = vec![0.0; self.ctx.coeff_count()];
        for &(dst, src, factor) in &self.ctx.deriv_tables[slot] {
            coeff[dst as usize] = self.coeff[src as usize] * factor;
        }
        Jet { ctx: Arc::clone(&self.ctx), valid: self.valid - 1, coeff }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        for c in &mut out.coeff {
            *c *= s;
        }
        out
    }

    fn zip(&self, rhs: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert!(same_ctx(self, rhs), "jets belong to different contexts");
        let coeff = self.coeff.iter().zip(&rhs.coeff).map(|(&a, &b)| f(a, b)).collect();
        Jet { ctx: Arc::clone(&self.ctx), valid: self.valid.min(rhs.valid), coeff }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, rhs: &Jet) -> Jet {
        assert!(same_ctx(self, rhs), "jets belong to different contexts");
        let ctx = &self.ctx;
        let mut coeff = vec![0.0; ctx.coeff_count()];
        for t in 0..ctx.coeff_count() {
            let lo = ctx.mul_offsets[t] as usize;
            let hi = ctx.mul_offsets[t + 1] as usize;
            let mut acc = 0.0;
            for &(p, q) in &ctx.mul_pairs[lo..hi] {
                acc += self.coeff[p as usize] * rhs.coeff[q as usize];
            }
            coeff[t] = acc;
        }
        Jet { ctx: Arc::clone(ctx), valid: self.valid.min(rhs.valid), coeff }
    }

    /// Truncated series division, solved coefficient-by-coefficient in
    /// graded order against the divisor's value part.
    pub fn div(&self, rhs: &Jet) -> Result<Jet, JetError> {
        if !same_ctx(self, rhs) {
            return Err(JetError::ContextMismatch);
        }
        let ctx = &self.ctx;
        let b0 = rhs.coeff[0];
        if math::abs(b0) < ctx.guards.div_epsilon {
            return Err(JetError::DivisionByZeroValue { value: b0 });
        }
        let inv_b0 = 1.0 / b0;
        let mut coeff = vec![0.0; ctx.coeff_count()];
        for t in 0..ctx.coeff_count() {
            let lo = ctx.mul_offsets[t] as usize;
            let hi = ctx.mul_offsets[t + 1] as usize;
            let mut acc = self.coeff[t];
            for &(p, q) in &ctx.mul_pairs[lo..hi] {
                if p == 0 {
                    continue; // handled by the value part below
                }
                acc -= rhs.coeff[p as usize] * coeff[q as usize];
            }
            coeff[t] = acc * inv_b0;
        }
        Ok(Jet { ctx: Arc::clone(ctx), valid: self.valid.min(rhs.valid), coeff })
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        Jet::constant(&self.ctx, 1.0).div(self)
    }

    /// Composition with a univariate power series about the value part,
    /// evaluated by Horner recursion on the nilpotent part.
    fn compose(&self, derivs: &[f64]) -> Jet {
        let mut nilpotent = self.clone();
        nilpotent.coeff[0] = 0.0;
        let mut acc = Jet::constant(&self.ctx, derivs[self.ctx.order]);
        for k in (0..self.ctx.order).rev() {
            acc = acc.mul(&nilpotent);
            acc.coeff[0] += derivs[k];
        }
        acc.valid = self.valid;
        acc
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.powf_impl(0.5, "sqrt")
    }

    /// Real power `a^r` for a jet with positive value part.
    pub fn powf(&self, r: f64) -> Result<Jet, JetError> {
        self.powf_impl(r, "powf")
    }

    fn powf_impl(&self, r: f64, func: &'static str) -> Result<Jet, JetError> {
        let a0 = self.coeff[0];
        if a0 <= 0.0 {
            return Err(JetError::DomainError { func, value: a0 });
        }
        let k = self.ctx.order;
        // c_m = binom(r, m) * a0^(r - m)
        let mut derivs = Vec::with_capacity(k + 1);
        let mut c = math::pow(a0, r);
        derivs.push(c);
        for m in 0..k {
            c *= (r - m as f64) / (m as f64 + 1.0) / a0;
            derivs.push(c);
        }
        Ok(self.compose(&derivs))
    }

    pub fn exp(&self) -> Jet {
        let e0 = math::exp(self.coeff[0]);
        let k = self.ctx.order;
        let mut derivs = Vec::with_capacity(k + 1);
        for m in 0..=k {
            derivs.push(e0 / self.ctx.factorials[m]);
        }
        self.compose(&derivs)
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let a0 = self.coeff[0];
        if a0 <= 0.0 {
            return Err(JetError::DomainError { func: "ln", value: a0 });
        }
        let k = self.ctx.order;
        let mut derivs = Vec::with_capacity(k + 1);
        derivs.push(math::ln(a0));
        // d^m/da^m ln a / m! = (-1)^(m-1) / (m a0^m)
        let mut p = 1.0;
        for m in 1..=k {
            p /= a0;
            let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
            derivs.push(sign * p / m as f64);
        }
        Ok(self.compose(&derivs))
    }

    /// Integer power by repeated squaring (exact, no domain restriction).
    pub fn powi(&self, mut e: u32) -> Jet {
        let mut acc = Jet::constant(&self.ctx, 1.0);
        acc.valid = self.valid;
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

impl core::ops::Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a + b)
    }
}

impl core::ops::Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a - b)
    }
}

impl core::ops::Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul(rhs)
    }
}

impl core::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Solves `A x = b` for jet-valued square systems by LU-factoring the value
/// part once and back-substituting coefficient layer by coefficient layer in
/// graded order.
pub fn solve_linear(a: &[Jet], b: &[Jet], m: usize) -> Result<Vec<Jet>, JetError> {
    assert_eq!(a.len(), m * m, "matrix shape");
    assert_eq!(b.len(), m, "rhs shape");
    let ctx = Arc::clone(b[0].context());
    for j in a.iter().chain(b.iter()) {
        if !Arc::ptr_eq(j.context(), &ctx) {
            return Err(JetError::ContextMismatch);
        }
    }

    let mut a0 = vec![0.0; m * m];
    for (slot, jet) in a0.iter_mut().zip(a) {
        *slot = jet.value();
    }
    let lu = LuFactors::factor(&a0, m, ctx.guards().cond_bound)?;

    let valid = a.iter().chain(b.iter()).map(Jet::valid_order).min().unwrap_or(ctx.order());

    let count = ctx.coeff_count();
    let mut x: Vec<Vec<f64>> = vec![vec![0.0; count]; m];
    let mut rhs = vec![0.0; m];
    for t in 0..count {
        for (i, slot) in rhs.iter_mut().enumerate() {
            *slot = b[i].coefficients()[t];
        }
        let lo = ctx.mul_offsets[t] as usize;
        let hi = ctx.mul_offsets[t + 1] as usize;
        for &(p, q) in &ctx.mul_pairs[lo..hi] {
            if p == 0 {
                continue; // value part handled by the LU solve
            }
            let (p, q) = (p as usize, q as usize);
            for i in 0..m {
                let mut acc = 0.0;
                for (k, xk) in x.iter().enumerate() {
                    acc += a[i * m + k].coefficients()[p] * xk[q];
                }
                rhs[i] -= acc;
            }
        }
        let layer = lu.solve(&rhs);
        for (i, xi) in x.iter_mut().enumerate() {
            xi[t] = layer[i];
        }
    }

    Ok(x.into_iter().map(|coeff| Jet { ctx: Arc::clone(&ctx), valid, coeff }).collect())
}

/// Inverts a jet-valued square matrix column by column.
pub fn invert_matrix(a: &[Jet], m: usize) -> Result<Vec<Jet>, JetError> {
    let ctx = a[0].context();
    let mut out = vec![Jet::constant(ctx, 0.0); m * m];
    for col in 0..m {
        let mut e = vec![Jet::constant(ctx, 0.0); m];
        e[col] = Jet::constant(ctx, 1.0);
        let solution = solve_linear(a, &e, m)?;
        for (row, jet) in solution.into_iter().enumerate() {
            out[row * m + col] = jet;
        }
    }
    // Keep the conservative valid order of the inputs.
    let valid = a.iter().map(Jet::valid_order).min().unwrap_or(ctx.order());
    for jet in &mut out {
        jet.valid = jet.valid.min(valid);
    }
    Ok(out)
}

/// Dense LU with partial pivoting for the tiny value-part systems (m <= 4 in
/// practice, but written for any m).
pub struct LuFactors {
    m: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(a: &[f64], m: usize, cond_bound: f64) -> Result<LuFactors, JetError> {
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let mut pivot_row = k;
            let mut pivot_val = math::abs(lu[k * m + k]);
            for r in k + 1..m {
                let v = math::abs(lu[r * m + k]);
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = r;
                }
            }
            if pivot_val == 0.0 {
                return Err(JetError::SingularValuePart { cond_estimate: f64::INFINITY });
            }
            if pivot_row != k {
                for c in 0..m {
                    lu.swap(k * m + c, pivot_row * m + c);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * m + k];
            for r in k + 1..m {
                let factor = lu[r * m + k] / pivot;
                lu[r * m + k] = factor;
                for c in k + 1..m {
                    lu[r * m + c] -= factor * lu[k * m + c];
                }
            }
        }
        let factors = LuFactors { m, lu, perm };
        let cond = factors.cond_estimate(a);
        if !(cond <= cond_bound) {
            return Err(JetError::SingularValuePart { cond_estimate: cond });
        }
        Ok(factors)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 1..m {
            for c in 0..r {
                x[r] -= self.lu[r * m + c] * x[c];
            }
        }
        for r in (0..m).rev() {
            for c in r + 1..m {
                x[r] -= self.lu[r * m + c] * x[c];
            }
            x[r] /= self.lu[r * m + r];
        }
        x
    }

    /// Infinity-norm condition estimate via the explicit inverse.
    fn cond_estimate(&self, a: &[f64]) -> f64 {
        let m = self.m;
        let mut norm_a = 0.0f64;
        let mut norm_inv = 0.0f64;
        let mut inv_rows = vec![0.0; m * m];
        for col in 0..m {
            let mut e = vec![0.0; m];
            e[col] = 1.0;
            let x = self.solve(&e);
            for r in 0..m {
                inv_rows[r * m + col] = x[r];
            }
        }
        for r in 0..m {
            let ra: f64 = (0..m).map(|c| math::abs(a[r * m + c])).sum();
            let ri: f64 = (0..m).map(|c| math::abs(inv_rows[r * m + c])).sum();
            norm_a = norm_a.max(ra);
            norm_inv = norm_inv.max(ri);
        }
        norm_a * norm_inv
    }
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;

    fn ctx2() -> Arc<JetContext> {
        JetContext::new(2, 5)
    }

    fn exps(ctx: &JetContext, pairs: &[(usize, u8)]) -> Vec<u8> {
        let mut e = vec![0u8; ctx.num_vars()];
        for &(slot, v) in pairs {
            e[slot] = v;
        }
        e
    }

    #[test]
    fn coefficient_count_matches_binomial() {
        // binomial(2n + K, K) with n = 2, K = 5 -> C(9, 5) = 126
        assert_eq!(ctx2().coeff_count(), 126);
        // n = 3, K = 5 -> C(11, 5) = 462
        assert_eq!(JetContext::new(3, 5).coeff_count(), 462);
    }

    #[test]
    fn seed_square_has_polynomial_derivatives() {
        let ctx = ctx2();
        let x1 = Jet::seed(&ctx, Var::X(0), 3.0);
        let sq = &x1 * &x1;
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.extract(&exps(&ctx, &[(0, 1)])).unwrap(), 6.0);
        assert_eq!(sq.extract(&exps(&ctx, &[(0, 2)])).unwrap(), 2.0);
        assert_eq!(sq.extract(&exps(&ctx, &[(0, 3)])).unwrap(), 0.0);
        assert_eq!(sq.extract(&exps(&ctx, &[(0, 1), (2, 1)])).unwrap(), 0.0);
    }

    #[test]
    fn self_division_is_one() {
        let ctx = ctx2();
        let x = Jet::seed(&ctx, Var::X(0), 0.7);
        let y = Jet::seed(&ctx, Var::Y(1), -1.3);
        let a = &(&x.exp() + &(&x * &y)) + &Jet::constant(&ctx, 2.0);
        let q = a.div(&a).unwrap();
        assert!((q.value() - 1.0).abs() < 1e-14);
        for &c in &q.coefficients()[1..] {
            assert!(c.abs() < 1e-14);
        }
    }

    #[test]
    fn division_by_zero_value_reported() {
        let ctx = ctx2();
        let zero_value = Jet::seed(&ctx, Var::X(0), 0.0);
        let err = Jet::constant(&ctx, 1.0).div(&zero_value).unwrap_err();
        assert!(matches!(err, JetError::DivisionByZeroValue { .. }));
    }

    #[test]
    fn context_mismatch_detected() {
        let a = Jet::constant(&ctx2(), 1.0);
        let b = Jet::constant(&ctx2(), 1.0);
        assert_eq!(a.div(&b).unwrap_err(), JetError::ContextMismatch);
    }

    #[test]
    fn sqrt_of_constant() {
        let ctx = ctx2();
        let c = Jet::constant(&ctx, 25.0).sqrt().unwrap();
        assert_eq!(c.value(), 5.0);
        assert!(c.coefficients()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exp_seed_coefficients_are_inverse_factorials() {
        let ctx = ctx2();
        let e = Jet::seed(&ctx, Var::X(0), 0.0).exp();
        for k in 0..=5usize {
            let expected: f64 = (1..=k).map(|i| i as f64).product::<f64>().recip();
            let got =
                e.coefficients()[ctx.position(&exps(&ctx, &[(0, k as u8)])).unwrap() as usize];
            assert!((got - expected).abs() < 1e-15, "order {k}");
        }
    }

    #[test]
    fn euclidean_norm_jet_matches_analytic() {
        let ctx = ctx2();
        let y1 = Jet::seed(&ctx, Var::Y(0), 3.0);
        let y2 = Jet::seed(&ctx, Var::Y(1), 4.0);
        let norm = (&(&y1 * &y1) + &(&y2 * &y2)).sqrt().unwrap();
        assert!((norm.value() - 5.0).abs() < 1e-15);
        assert!((norm.extract(&exps(&ctx, &[(2, 1)])).unwrap() - 0.6).abs() < 1e-15);
        assert!((norm.extract(&exps(&ctx, &[(3, 1)])).unwrap() - 0.8).abs() < 1e-15);
        // d^2/dy1^2 |y| = y2^2 / |y|^3 = 16 / 125
        assert!((norm.extract(&exps(&ctx, &[(2, 2)])).unwrap() - 16.0 / 125.0).abs() < 1e-15);
    }

    #[test]
    fn extract_mixed_polynomial_orders() {
        let ctx = ctx2();
        let y1 = Jet::seed(&ctx, Var::Y(0), 1.5);
        let y2 = Jet::seed(&ctx, Var::Y(1), -2.0);
        let p = &y1 * &y2;
        assert_eq!(p.extract(&exps(&ctx, &[(2, 1), (3, 1)])).unwrap(), 1.0);
        let p2 = &p * &p;
        assert_eq!(p2.extract(&exps(&ctx, &[(2, 2), (3, 2)])).unwrap(), 4.0);
    }

    #[test]
    fn extract_rejects_order_above_truncation() {
        let ctx = ctx2();
        let x = Jet::seed(&ctx, Var::X(0), 1.0);
        let err = x.extract(&exps(&ctx, &[(0, 6)])).unwrap_err();
        assert!(matches!(err, JetError::OrderExceeded { .. }));
    }

    #[test]
    fn derivative_lowers_valid_order() {
        let ctx = ctx2();
        let x = Jet::seed(&ctx, Var::X(0), 1.0);
        let d = x.exp().deriv(Var::X(0));
        assert_eq!(d.valid_order(), 4);
        let err = d.extract(&exps(&ctx, &[(0, 5)])).unwrap_err();
        assert!(matches!(err, JetError::OrderExceeded { requested: 5, available: 4 }));
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let ctx = ctx2();
        let one = Jet::constant(&ctx, 1.0);
        let zero = Jet::constant(&ctx, 0.0);
        let a = vec![one.clone(), zero.clone(), zero.clone(), one.clone()];
        let b = vec![Jet::seed(&ctx, Var::X(0), 2.0).exp(), Jet::seed(&ctx, Var::Y(1), 0.5)];
        let x = solve_linear(&a, &b, 2).unwrap();
        for (got, want) in x.iter().zip(&b) {
            for (g, w) in got.coefficients().iter().zip(want.coefficients()) {
                assert!((g - w).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn solve_geometric_series_diagonal() {
        let ctx = ctx2();
        let x1 = Jet::seed(&ctx, Var::X(0), 0.0);
        let a = vec![&Jet::constant(&ctx, 1.0) + &x1];
        let b = vec![Jet::constant(&ctx, 1.0)];
        let sol = solve_linear(&a, &b, 1).unwrap();
        // 1 / (1 + x) = 1 - x + x^2 - ...
        for k in 0..=5usize {
            let got =
                sol[0].coefficients()[ctx.position(&exps(&ctx, &[(0, k as u8)])).unwrap() as usize];
            let want = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((got - want).abs() < 1e-14, "order {k}");
        }
    }

    #[test]
    fn solve_random_system_residual() {
        let ctx = ctx2();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..5 {
            let mut a = Vec::new();
            for r in 0..3 {
                for c in 0..3 {
                    let mut jet = Jet::constant(&ctx, if r == c { 2.0 } else { 0.0 } + next());
                    let bump = Jet::seed(&ctx, Var::X(r % 2), 0.0).scale(next());
                    jet = &jet + &(&bump * &Jet::seed(&ctx, Var::Y(c % 2), 0.0));
                    a.push(jet);
                }
            }
            let b: Vec<Jet> = (0..3)
                .map(|i| {
                    let s = Jet::seed(&ctx, Var::Y(i % 2), next());
                    &s.exp() + &Jet::constant(&ctx, next())
                })
                .collect();
            let x = solve_linear(&a, &b, 3).unwrap();
            for i in 0..3 {
                let mut acc = Jet::constant(&ctx, 0.0);
                for k in 0..3 {
                    acc = &acc + &(&a[i * 3 + k] * &x[k]);
                }
                for (g, w) in acc.coefficients().iter().zip(b[i].coefficients()) {
                    assert!((g - w).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn singular_value_part_rejected() {
        let ctx = ctx2();
        let one = Jet::constant(&ctx, 1.0);
        let a = vec![one.clone(), one.clone(), one.clone(), one.clone()];
        let b = vec![one.clone(), one.clone()];
        assert!(matches!(solve_linear(&a, &b, 2), Err(JetError::SingularValuePart { .. })));
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let ctx = ctx2();
        let a = &Jet::seed(&ctx, Var::Y(0), 1.2) + &Jet::seed(&ctx, Var::X(1), -0.4);
        let p3 = a.powi(3);
        let manual = &(&a * &a) * &a;
        for (g, w) in p3.coefficients().iter().zip(manual.coefficients()) {
            assert!((g - w).abs() < 1e-13);
        }
    }
}
