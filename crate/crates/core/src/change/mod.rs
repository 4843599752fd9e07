//! The beta-conformal change `L -> Lbar = e^sigma L + beta` and the closed-form
//! difference tensor between the two Cartan connections.
//!
//! The pipeline mirrors the construction order of the change: barred metric
//! objects first, then the auxiliary deformation tensors of the 1-form, then
//! the three-stage solve for the y-contracted difference tensor, its single
//! contraction, and finally the full difference tensor. Every stage keeps its
//! results jet-valued so later stages can differentiate them.

mod classify;
mod derived;
mod special;

pub use classify::{classify_change, ChangeClassification};
pub use derived::{BarredDerived, CurvatureReading};
pub use special::{special_case_d, SpecialCase};

use alloc::vec::Vec;
use core::fmt;

use crate::catalog::FieldSpec;
use crate::geometry::{Frame, GeomError};
use crate::jet::{Jet, JetContext, JetError, Var};
use crate::math;
use crate::tensor::{Grid1, Grid2, Grid3, Grid4};

use alloc::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum ChangeError {
    /// Changed metric not positive or its fundamental tensor degenerate.
    InvalidChange {
        lbar_value: f64,
    },
    /// A right-hand side handed to the angular constrained solver failed its
    /// structural preconditions; signals an upstream formula bug.
    CompatibilityViolated {
        stage: &'static str,
        residual: f64,
    },
    /// A specialization was requested on an instance that does not satisfy
    /// its hypothesis.
    HypothesisViolated {
        case: &'static str,
        residual: f64,
    },
    /// Too few valid samples for a classification.
    InsufficientSamples {
        got: usize,
        need: usize,
    },
    Geom(GeomError),
    Jet(JetError),
}

impl fmt::Display for ChangeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChangeError::InvalidChange { lbar_value } => {
                write!(f, "changed metric value {lbar_value} invalid at sample point")
            }
            ChangeError::CompatibilityViolated { stage, residual } => {
                write!(f, "solver precondition violated at {stage} (residual {residual:e})")
            }
            ChangeError::HypothesisViolated { case, residual } => {
                write!(f, "hypothesis of special case `{case}` violated (residual {residual:e})")
            }
            ChangeError::InsufficientSamples { got, need } => {
                write!(f, "classification needs {need} samples, got {got}")
            }
            ChangeError::Geom(e) => write!(f, "{e}"),
            ChangeError::Jet(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ChangeError {}

impl From<GeomError> for ChangeError {
    fn from(e: GeomError) -> Self {
        ChangeError::Geom(e)
    }
}

impl From<JetError> for ChangeError {
    fn from(e: JetError) -> Self {
        ChangeError::Jet(e)
    }
}

/// Jets of the change data at one point: the scalar field, its x-gradient and
/// the covector field.
pub struct ChangeFields {
    pub sigma: Jet,
    pub sigma_grad: Grid1<Jet>,
    pub b: Grid1<Jet>,
}

impl ChangeFields {
    pub fn from_spec(
        spec: &FieldSpec,
        ctx: &Arc<JetContext>,
        x: &[f64],
    ) -> Result<ChangeFields, ChangeError> {
        let sigma = spec.sigma.eval_jet(ctx, x)?;
        let sigma_grad = Grid1::from_fn(ctx.dim(), |i| sigma.deriv(Var::X(i)));
        let b = spec.b.eval_jets(ctx, x)?;
        Ok(ChangeFields { sigma, sigma_grad, b })
    }
}

/// Residual bundle recorded by the solver plug-back checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveResiduals {
    pub plugback_small: f64,
    pub plugback_big: f64,
}

/// Every barred object and auxiliary tensor produced by the change formulas.
pub struct ChangeFrame {
    pub lbar: Jet,
    pub inv_lbar: Jet,
    pub e_sigma: Jet,
    pub inv_e_sigma: Jet,
    pub beta: Jet,
    pub tau: Jet,
    pub inv_tau: Jet,
    pub mu: Jet,
    pub b_low: Grid1<Jet>,
    pub b_up: Grid1<Jet>,
    pub b_sq: Jet,
    pub m_low: Grid1<Jet>,
    pub m_up: Grid1<Jet>,
    pub m_sq: Jet,
    pub lbar1: Grid1<Jet>,
    pub lbar2: Grid2<Jet>,
    pub gbar: Grid2<Jet>,
    /// Direct matrix inverse of `gbar`; the authoritative inverse.
    pub gbar_inv: Grid2<Jet>,
    /// Rank-structured closed-form inverse (value level, checked in reports).
    pub gbar_inv_closed: Grid2<f64>,
    /// The closed-form inverse with the sigma = 0 coefficients applied
    /// verbatim (the classical Randers-change inverse); coincides with the
    /// corrected form when sigma = 0 and is reported for comparison
    /// otherwise.
    pub gbar_inv_sigma0_form: Grid2<f64>,
    pub cbar_low: Grid3<Jet>,
    pub cbar_up: Grid3<Jet>,
    /// A^i_jk = Cbar^i_jk - C^i_jk, defined as the difference.
    pub a_diff: Grid3<Jet>,
    /// sigma_i, sigma_0, sigma^i, sigma_beta.
    pub sigma_grad: Grid1<Jet>,
    pub sigma_0: Jet,
    pub sigma_up: Grid1<Jet>,
    pub sigma_beta: Jet,
    /// Covariant derivative of b under the unbarred connection and its
    /// symmetric / antisymmetric parts.
    pub b_cov: Grid2<Jet>,
    pub e_sym: Grid2<Jet>,
    pub f_skew: Grid2<Jet>,
    pub sigma_pair: Grid2<Jet>,
    pub mu_pair: Grid2<Jet>,
    /// Right-hand sides of the y-contracted system and its solution.
    pub b_vec: Grid1<Jet>,
    pub b_scal: Jet,
    pub d00: Grid1<Jet>,
    pub d00_solver: Grid1<Jet>,
    pub d00_residuals: SolveResiduals,
    /// One-index right-hand sides and D^i_0j.
    pub g_mat: Grid2<Jet>,
    pub g_vec: Grid1<Jet>,
    pub d0j: Grid2<Jet>,
    pub d0j_residuals: SolveResiduals,
    /// Two-index right-hand sides and the full difference tensor D^i_jk.
    pub h3: Grid3<Jet>,
    pub h2: Grid2<Jet>,
    pub d: Grid3<Jet>,
    pub d_residuals: SolveResiduals,
}

fn dot(a: &Grid1<Jet>, b: &Grid1<Jet>) -> Jet {
    let n = a.dim();
    let mut acc = a.at(0).mul(b.at(0));
    for i in 1..n {
        acc = &acc + &(a.at(i) * b.at(i));
    }
    acc
}

fn raise(frame: &Frame, low: &Grid1<Jet>) -> Grid1<Jet> {
    let n = frame.n;
    Grid1::from_fn(n, |i| {
        let mut acc = frame.g_inv.at(i, 0).mul(low.at(0));
        for r in 1..n {
            acc = &acc + &(frame.g_inv.at(i, r) * low.at(r));
        }
        acc
    })
}

/// Core of the constrained solver shared by all three stages: given a
/// covector right-hand side `rho_i` with `rho_i y^i = 0` and a scalar
/// right-hand side `rho`, returns the unique `X^r` with
/// `L_ir X^r = rho_i` and `Lbar_r X^r = rho`:
///
/// `X^r = L rho^r + (L / Lbar)(rho - L rho_beta) l^r`.
pub fn angular_solve(
    frame: &Frame,
    cf_b_up: &Grid1<Jet>,
    lbar: &Jet,
    rhs_small: &Grid1<Jet>,
    rhs_big: &Jet,
) -> Result<Grid1<Jet>, ChangeError> {
    let n = frame.n;
    let raised = raise(frame, rhs_small);
    let rhs_beta = dot(rhs_small, cf_b_up);
    let l_over_lbar = frame.l.div(lbar)?;
    let tail = &l_over_lbar * &(rhs_big - &(&frame.l * &rhs_beta));
    Ok(Grid1::from_fn(n, |r| &(&frame.l * raised.at(r)) + &(&tail * frame.l_up.at(r))))
}

const COMPATIBILITY_TOL: f64 = 1e-8;

/// [`angular_solve`] preceded by the solvability check `rho_i y^i = 0`; a
/// right-hand side that violates it signals an upstream formula bug.
pub fn angular_solve_checked(
    frame: &Frame,
    cf_b_up: &Grid1<Jet>,
    lbar: &Jet,
    rhs_small: &Grid1<Jet>,
    rhs_big: &Jet,
    stage: &'static str,
) -> Result<Grid1<Jet>, ChangeError> {
    let n = frame.n;
    let mut contraction = 0.0;
    let mut scale = 0.0f64;
    for i in 0..n {
        contraction += rhs_small.at(i).value() * frame.point.y[i];
        scale = math::max(scale, math::abs(rhs_small.at(i).value()));
    }
    let residual = math::abs(contraction) / (1.0 + scale);
    if residual > COMPATIBILITY_TOL {
        return Err(ChangeError::CompatibilityViolated { stage, residual });
    }
    angular_solve(frame, cf_b_up, lbar, rhs_small, rhs_big)
}

/// Plug-back residuals of an angular system solution (value level), scaled
/// by `1 + |rhs|_inf` like every other identity residual.
pub fn plugback_residuals(
    frame: &Frame,
    lbar1: &Grid1<Jet>,
    solution: &Grid1<Jet>,
    rhs_small: &Grid1<Jet>,
    rhs_big: &Jet,
) -> SolveResiduals {
    let n = frame.n;
    let mut small = 0.0f64;
    let mut small_ref = 0.0f64;
    for i in 0..n {
        let mut acc = 0.0;
        for r in 0..n {
            acc += frame.l2.at(i, r).value() * solution.at(r).value();
        }
        small = math::max(small, math::abs(acc - rhs_small.at(i).value()));
        small_ref = math::max(small_ref, math::abs(rhs_small.at(i).value()));
    }
    let mut big_acc = 0.0;
    for r in 0..n {
        big_acc += lbar1.at(r).value() * solution.at(r).value();
    }
    SolveResiduals {
        plugback_small: small / (1.0 + small_ref),
        plugback_big: math::abs(big_acc - rhs_big.value()) / (1.0 + math::abs(rhs_big.value())),
    }
}

impl ChangeFrame {
    pub fn build(frame: &Frame, fields: &ChangeFields) -> Result<ChangeFrame, ChangeError> {
        let n = frame.n;

        // -- barred metric ---------------------------------------------------
        let e_sigma = fields.sigma.exp();
        let inv_e_sigma = e_sigma.recip()?;
        let beta = dot(&fields.b, &frame.y_seed);
        let lbar = &(&e_sigma * &frame.l) + &beta;
        if !(lbar.value() > 0.0) {
            return Err(ChangeError::InvalidChange { lbar_value: lbar.value() });
        }
        let inv_lbar = lbar.recip()?;
        let tau = &(&e_sigma * &lbar) * &frame.inv_l;
        let inv_tau = tau.recip()?;

        let b_low = Grid1::from_fn(n, |i| fields.b.at(i).clone());
        let b_up = raise(frame, &b_low);
        let b_sq = dot(&b_low, &b_up);
        let beta_over_l = beta.mul(&frame.inv_l);
        let m_low = Grid1::from_fn(n, |i| b_low.at(i) - &(&beta_over_l * frame.l1.at(i)));
        let m_up = raise(frame, &m_low);
        let m_sq = dot(&m_low, &m_up);

        let lbar1 = Grid1::from_fn(n, |i| &(&e_sigma * frame.l1.at(i)) + b_low.at(i));
        let lbar2 = Grid2::from_fn(n, |i, j| e_sigma.mul(frame.l2.at(i, j)));

        let gbar =
            Grid2::from_fn(n, |i, j| &(&tau * frame.h.at(i, j)) + &(lbar1.at(i) * lbar1.at(j)));
        let gbar_inv_flat = crate::jet::invert_matrix(gbar.data(), n).map_err(|e| match e {
            JetError::SingularValuePart { .. } => {
                ChangeError::InvalidChange { lbar_value: lbar.value() }
            }
            other => ChangeError::Jet(other),
        })?;
        let gbar_inv = Grid2::from_fn(n, |i, j| gbar_inv_flat[i * n + j].clone());

        // Closed-form inverse. The corrected coefficients carry e^sigma
        // factors that the classical sigma = 0 form lacks; both variants are
        // recorded so reports can show the gap.
        let es = e_sigma.value();
        let l_val = frame.l.value();
        let lbar_val = lbar.value();
        let tau_val = tau.value();
        let b_sq_val = b_sq.value();
        let beta_val = beta.value();
        let mu_num_corrected = es * l_val * b_sq_val + es * es * beta_val;
        let mu_num_sigma0 = es * l_val * b_sq_val + beta_val;
        let mu_corrected = mu_num_corrected / (lbar_val * tau_val * tau_val);
        let mu_sigma0 = mu_num_sigma0 / (lbar_val * tau_val * tau_val);
        let cross_corrected = es / (tau_val * tau_val);
        let cross_sigma0 = 1.0 / (tau_val * tau_val);
        let closed = |mu_v: f64, cross: f64| {
            Grid2::from_fn(n, |i, j| {
                let li = frame.l_up.at(i).value();
                let lj = frame.l_up.at(j).value();
                let bi = b_up.at(i).value();
                let bj = b_up.at(j).value();
                frame.g_inv.at(i, j).value() / tau_val + mu_v * li * lj
                    - cross * (li * bj + lj * bi)
            })
        };
        let gbar_inv_closed = closed(mu_corrected, cross_corrected);
        let gbar_inv_sigma0_form = closed(mu_sigma0, cross_sigma0);
        // Jet-valued corrected mu, kept because the closed form is also the
        // documented meaning of the scalar.
        let mu = {
            let num = &(&(&e_sigma * &frame.l) * &b_sq) + &(&(&e_sigma * &e_sigma) * &beta);
            let denom = &lbar * &(&tau * &tau);
            num.div(&denom)?
        };

        // -- barred Cartan tensor --------------------------------------------
        let h3m = Grid3::from_fn(n, |i, j, k| {
            let t1 = frame.h.at(i, j) * m_low.at(k);
            let t2 = frame.h.at(j, k) * m_low.at(i);
            let t3 = frame.h.at(k, i) * m_low.at(j);
            &(&t1 + &t2) + &t3
        });
        let half_inv_lbar = inv_lbar.scale(0.5);
        let cbar_low = Grid3::from_fn(n, |i, j, k| {
            &tau * &(frame.c_low.at(i, j, k) + &(&half_inv_lbar * h3m.at(i, j, k)))
        });
        let cbar_up = Grid3::from_fn(n, |i, j, k| {
            let mut acc = gbar_inv.at(i, 0).mul(cbar_low.at(0, j, k));
            for r in 1..n {
                acc = &acc + &(gbar_inv.at(i, r) * cbar_low.at(r, j, k));
            }
            acc
        });
        let a_diff = Grid3::from_fn(n, |i, j, k| cbar_up.at(i, j, k) - frame.c_up.at(i, j, k));

        // -- deformation tensors of (sigma, b) --------------------------------
        let sigma_grad = Grid1::from_fn(n, |i| fields.sigma_grad.at(i).clone());
        let sigma_0 = dot(&sigma_grad, &frame.y_seed);
        let sigma_up = raise(frame, &sigma_grad);
        let sigma_beta = dot(&sigma_grad, &b_up);

        let b_cov = frame.cov_deriv_covector(&b_low);
        let e_sym = Grid2::from_fn(n, |i, j| (b_cov.at(i, j) + b_cov.at(j, i)).scale(0.5));
        let f_skew = Grid2::from_fn(n, |i, j| (b_cov.at(i, j) - b_cov.at(j, i)).scale(0.5));
        let sigma_pair = Grid2::from_fn(n, |i, j| {
            &(sigma_grad.at(i) * frame.l1.at(j)) + &(sigma_grad.at(j) * frame.l1.at(i))
        });
        let mu_pair = Grid2::from_fn(n, |i, j| {
            &(sigma_grad.at(i) * frame.l1.at(j)) - &(sigma_grad.at(j) * frame.l1.at(i))
        });

        // -- y-contracted difference vector ----------------------------------
        let f_y = frame.contract_y2(&f_skew); // F_i0 = F_ij y^j
        let e_y = frame.contract_y2(&e_sym);
        let e_00 = dot(&e_y, &frame.y_seed);
        let f_up_y = raise(frame, &f_y); // F^r_0
        let f_beta_y = dot(&f_y, &b_up); // F_{beta 0}

        let b_vec = Grid1::from_fn(n, |i| {
            let fd = (&inv_e_sigma * f_y.at(i)).scale(2.0);
            let sig = &(&sigma_0 * frame.l1.at(i)) - &(sigma_grad.at(i) * &frame.l);
            &fd + &sig
        });
        let b_scal = &e_00 + &(&(&e_sigma * &sigma_0) * &frame.l);

        // Closed form of D^r_{00}.
        let l_over_lbar = frame.l.div(&lbar)?;
        let l_sq = frame.l.mul(&frame.l);
        let d00 = {
            let lead =
                Grid1::from_fn(n, |r| (&(&frame.l * &inv_e_sigma) * f_up_y.at(r)).scale(2.0));
            let tail_f = &e_00 - &(&(&frame.l * &inv_e_sigma) * &f_beta_y).scale(2.0);
            let tail_s = &(&(&frame.l * &e_sigma) * &sigma_0).scale(2.0) + &(&l_sq * &sigma_beta);
            let tail = &l_over_lbar * &(&tail_f + &tail_s);
            Grid1::from_fn(n, |r| {
                &(lead.at(r) - &(&l_sq * sigma_up.at(r))) + &(&tail * frame.l_up.at(r))
            })
        };

        // Second path through the generic solver; both must agree.
        let d00_solver =
            angular_solve_checked(frame, &b_up, &lbar, &b_vec, &b_scal, "y-contracted system")?;
        let d00_residuals = plugback_residuals(frame, &lbar1, &d00, &b_vec, &b_scal);

        // -- one-index stage ---------------------------------------------------
        let g_mat = Grid2::from_fn(n, |i, j| {
            let mut contraction = frame.l3.at(i, j, 0).mul(d00.at(0));
            for r in 1..n {
                contraction = &contraction + &(frame.l3.at(i, j, r) * d00.at(r));
            }
            let lead = &inv_e_sigma * f_skew.at(i, j);
            let tail = &(&sigma_0 * frame.l2.at(i, j)) - mu_pair.at(i, j);
            &(&lead - &contraction.scale(0.5)) + &tail.scale(0.5)
        });
        let g_vec = Grid1::from_fn(n, |i| {
            let mut contraction = frame.l2.at(i, 0).mul(d00.at(0));
            for r in 1..n {
                contraction = &contraction + &(frame.l2.at(i, r) * d00.at(r));
            }
            let tail = &(&sigma_0 * frame.l1.at(i)) + &(sigma_grad.at(i) * &frame.l);
            &(e_y.at(i) - &(&e_sigma * &contraction).scale(0.5)) + &(&e_sigma * &tail).scale(0.5)
        });

        let d0j = {
            let mut cols: Vec<Grid1<Jet>> = Vec::with_capacity(n);
            for j in 0..n {
                let rhs_small = Grid1::from_fn(n, |i| g_mat.at(i, j).clone());
                cols.push(angular_solve_checked(
                    frame,
                    &b_up,
                    &lbar,
                    &rhs_small,
                    g_vec.at(j),
                    "one-index system",
                )?);
            }
            Grid2::from_fn(n, |i, j| cols[j].at(i).clone())
        };
        let d0j_residuals = {
            let mut acc = SolveResiduals::default();
            for j in 0..n {
                let rhs_small = Grid1::from_fn(n, |i| g_mat.at(i, j).clone());
                let sol = Grid1::from_fn(n, |i| d0j.at(i, j).clone());
                let r = plugback_residuals(frame, &lbar1, &sol, &rhs_small, g_vec.at(j));
                acc.plugback_small = math::max(acc.plugback_small, r.plugback_small);
                acc.plugback_big = math::max(acc.plugback_big, r.plugback_big);
            }
            acc
        };

        // -- two-index stage ----------------------------------------------------
        let contraction3 = |t3: &Grid3<Jet>, v: &Grid2<Jet>, a: usize, b_ix: usize, col: usize| {
            let mut acc = t3.at(a, b_ix, 0).mul(v.at(0, col));
            for r in 1..n {
                acc = &acc + &(t3.at(a, b_ix, r) * v.at(r, col));
            }
            acc
        };
        let h3 = Grid3::from_fn(n, |i, j, k| {
            let t1 = contraction3(&frame.l3, &d0j, j, k, i);
            let t2 = contraction3(&frame.l3, &d0j, i, j, k);
            let t3 = contraction3(&frame.l3, &d0j, i, k, j);
            let s = &(&(sigma_grad.at(j) * frame.l2.at(i, k))
                + &(sigma_grad.at(k) * frame.l2.at(i, j)))
                - &(sigma_grad.at(i) * frame.l2.at(j, k));
            &(&(&t1 - &t2) - &t3).scale(0.5) + &s.scale(0.5)
        });
        let h2 = Grid2::from_fn(n, |j, k| {
            let mut lj = frame.l2.at(j, 0).mul(d0j.at(0, k));
            let mut lk = frame.l2.at(k, 0).mul(d0j.at(0, j));
            for r in 1..n {
                lj = &lj + &(frame.l2.at(j, r) * d0j.at(r, k));
                lk = &lk + &(frame.l2.at(k, r) * d0j.at(r, j));
            }
            let inner = &(&lj + &lk) - sigma_pair.at(j, k);
            e_sym.at(j, k) - &(&e_sigma * &inner).scale(0.5)
        });

        let d = {
            let mut cols: Vec<Grid1<Jet>> = Vec::with_capacity(n * n);
            for j in 0..n {
                for k in 0..n {
                    let rhs_small = Grid1::from_fn(n, |i| h3.at(i, j, k).clone());
                    cols.push(angular_solve_checked(
                        frame,
                        &b_up,
                        &lbar,
                        &rhs_small,
                        h2.at(j, k),
                        "two-index system",
                    )?);
                }
            }
            Grid3::from_fn(n, |i, j, k| cols[j * n + k].at(i).clone())
        };
        let d_residuals = {
            let mut acc = SolveResiduals::default();
            for j in 0..n {
                for k in 0..n {
                    let rhs_small = Grid1::from_fn(n, |i| h3.at(i, j, k).clone());
                    let sol = Grid1::from_fn(n, |i| d.at(i, j, k).clone());
                    let r = plugback_residuals(frame, &lbar1, &sol, &rhs_small, h2.at(j, k));
                    acc.plugback_small = math::max(acc.plugback_small, r.plugback_small);
                    acc.plugback_big = math::max(acc.plugback_big, r.plugback_big);
                }
            }
            acc
        };

        Ok(ChangeFrame {
            lbar,
            inv_lbar,
            e_sigma,
            inv_e_sigma,
            beta,
            tau,
            inv_tau,
            mu,
            b_low,
            b_up,
            b_sq,
            m_low,
            m_up,
            m_sq,
            lbar1,
            lbar2,
            gbar,
            gbar_inv,
            gbar_inv_closed,
            gbar_inv_sigma0_form,
            cbar_low,
            cbar_up,
            a_diff,
            sigma_grad,
            sigma_0,
            sigma_up,
            sigma_beta,
            b_cov,
            e_sym,
            f_skew,
            sigma_pair,
            mu_pair,
            b_vec,
            b_scal,
            d00,
            d00_solver,
            d00_residuals,
            g_mat,
            g_vec,
            d0j,
            d0j_residuals,
            h3,
            h2,
            d,
            d_residuals,
        })
    }

    /// Scaled max-norm of the compatibility residuals that the one-index
    /// right-hand sides must satisfy before the solve: `G_ij y^i = 0`,
    /// `G_ij y^j = B_i`, `G_j y^j = B`.
    pub fn one_index_compatibility(&self, frame: &Frame) -> f64 {
        let n = frame.n;
        let y = &frame.point.y;
        let mut worst = 0.0f64;
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += self.g_mat.at(i, j).value() * y[i];
            }
            worst = math::max(worst, math::abs(acc));
        }
        let mut b_ref = 0.0f64;
        for i in 0..n {
            b_ref = math::max(b_ref, math::abs(self.b_vec.at(i).value()));
        }
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.g_mat.at(i, j).value() * y[j];
            }
            worst = math::max(worst, math::abs(acc - self.b_vec.at(i).value()) / (1.0 + b_ref));
        }
        let mut acc = 0.0;
        for j in 0..n {
            acc += self.g_vec.at(j).value() * y[j];
        }
        worst = math::max(
            worst,
            math::abs(acc - self.b_scal.value()) / (1.0 + math::abs(self.b_scal.value())),
        );
        worst
    }

    /// Scaled max-norm of the two-index right-hand-side properties:
    /// `H_ijk = H_ikj`, `H_ijk y^i = 0`, `H_ijk y^j = G_ik`, `H_jk y^j = G_k`.
    pub fn two_index_compatibility(&self, frame: &Frame) -> f64 {
        let n = frame.n;
        let y = &frame.point.y;
        let mut h_ref = 0.0f64;
        let mut g_ref = 0.0f64;
        for v in self.h3.data() {
            h_ref = math::max(h_ref, math::abs(v.value()));
        }
        for v in self.g_mat.data() {
            g_ref = math::max(g_ref, math::abs(v.value()));
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = math::max(
                        worst,
                        math::abs(self.h3.at(i, j, k).value() - self.h3.at(i, k, j).value())
                            / (1.0 + h_ref),
                    );
                }
            }
        }
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += self.h3.at(i, j, k).value() * y[i];
                }
                worst = math::max(worst, math::abs(acc) / (1.0 + h_ref));
            }
        }
        for i in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += self.h3.at(i, j, k).value() * y[j];
                }
                worst =
                    math::max(worst, math::abs(acc - self.g_mat.at(i, k).value()) / (1.0 + g_ref));
            }
        }
        let mut g_vec_ref = 0.0f64;
        for k in 0..n {
            g_vec_ref = math::max(g_vec_ref, math::abs(self.g_vec.at(k).value()));
        }
        for k in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.h2.at(j, k).value() * y[j];
            }
            worst = math::max(worst, math::abs(acc - self.g_vec.at(k).value()) / (1.0 + g_vec_ref));
        }
        worst
    }

    /// Three value-level forms of the closed expression for the raised
    /// difference `A^i_jk`: the corrected one (conformal factors restored,
    /// symmetric middle terms), a variant with the middle term doubled
    /// instead of symmetrized, and a variant keeping the sigma = 0
    /// coefficients. The first must match [`ChangeFrame::a_diff`]; the other
    /// two are recorded for comparison.
    pub fn raised_difference_variants(
        &self,
        frame: &Frame,
    ) -> (Grid3<f64>, Grid3<f64>, Grid3<f64>) {
        let n = frame.n;
        let l = frame.l.value();
        let lbar = self.lbar.value();
        let tau = self.tau.value();
        let m_sq = self.m_sq.value();
        let h = frame.h.values();
        let g_inv = frame.g_inv.values();
        let c_low = frame.c_low.values();
        let l_up = frame.l_up.values();
        let m_low: Vec<f64> = (0..n).map(|i| self.m_low.at(i).value()).collect();
        let m_up: Vec<f64> = (0..n).map(|i| self.m_up.at(i).value()).collect();
        let b_up: Vec<f64> = (0..n).map(|i| self.b_up.at(i).value()).collect();
        let h_up =
            Grid2::from_fn(n, |i, j| (0..n).map(|r| g_inv.at(i, r) * h.at(r, j)).sum::<f64>());

        let entry = |i: usize, j: usize, k: usize| {
            let c_beta: f64 = (0..n).map(|s| c_low.at(j, k, s) * b_up[s]).sum();
            let head_sym =
                (h.at(j, k) * m_up[i] + h_up.at(i, j) * m_low[k] + h_up.at(i, k) * m_low[j])
                    / (2.0 * lbar);
            let head_doubled =
                (h.at(j, k) * m_up[i] + 2.0 * h_up.at(i, j) * m_low[k]) / (2.0 * lbar);
            let tail = |coef: f64| {
                coef * c_beta * l_up.at(i)
                    + coef / (2.0 * lbar)
                        * (2.0 * m_low[j] * m_low[k] + m_sq * h.at(j, k))
                        * l_up.at(i)
            };
            (head_sym - tail(l / lbar), head_doubled - tail(1.0 / tau), head_sym - tail(1.0 / tau))
        };
        (
            Grid3::from_fn(n, |i, j, k| entry(i, j, k).0),
            Grid3::from_fn(n, |i, j, k| entry(i, j, k).1),
            Grid3::from_fn(n, |i, j, k| entry(i, j, k).2),
        )
    }

    /// The cyclic closed form of `d Cbar_ijk / d y^r` in unbarred data
    /// (value level); verified against direct jets on the changed metric.
    pub fn dcartan_closed_form(&self, frame: &Frame) -> Grid4<f64> {
        let n = frame.n;
        let l = frame.l.value();
        let es = self.e_sigma.value();
        let tau = self.tau.value();
        let beta = self.beta.value();
        let h = frame.h.values();
        let c_low = frame.c_low.values();
        let l_low = frame.l1.values();
        let m_low: Vec<f64> = (0..n).map(|i| self.m_low.at(i).value()).collect();

        let dc = Grid4::from_fn(n, |i, j, k, r| frame.c_low.at(i, j, k).deriv(Var::Y(r)).value());
        let nn = |r: usize, k: usize| m_low[r] * l_low.at(k) + m_low[k] * l_low.at(r);

        Grid4::from_fn(n, |i, j, k, r| {
            let cyc = |a: usize, b: usize, c: usize| {
                es / l * c_low.at(a, b, r) * m_low[c]
                    - es / (2.0 * l * l)
                        * (h.at(a, b) * (nn(r, c) + beta / l * h.at(r, c)) + h.at(a, r) * nn(b, c))
            };
            tau * dc.at(i, j, k, r)
                + es / l * c_low.at(i, j, k) * m_low[r]
                + cyc(i, j, k)
                + cyc(j, k, i)
                + cyc(k, i, j)
        })
    }

    /// The D-free form of the one-index right-hand side (value level).
    pub fn g_mat_difference_free(&self, frame: &Frame) -> Grid2<f64> {
        let n = frame.n;
        let l = frame.l.value();
        let lbar = self.lbar.value();
        let es = self.e_sigma.value();
        let inv_es = 1.0 / es;
        let e00 = {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += self.e_sym.at(i, j).value() * frame.point.y[i] * frame.point.y[j];
                }
            }
            acc
        };
        let f_y: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| self.f_skew.at(i, j).value() * frame.point.y[j]).sum())
            .collect();
        let f_beta_y: f64 = (0..n).map(|i| f_y[i] * self.b_up.at(i).value()).sum();
        let g_scal = (e00 - 2.0 * l * inv_es * f_beta_y) / (2.0 * l * lbar);
        Grid2::from_fn(n, |i, j| {
            let mut c_term = 0.0;
            for k in 0..n {
                c_term += frame.c_up.at(k, i, j).value() * f_y[k];
            }
            let mut l3_sigma = 0.0;
            for r in 0..n {
                l3_sigma += frame.l3.at(i, j, r).value() * self.sigma_up.at(r).value();
            }
            let lij = frame.l2.at(i, j).value();
            inv_es * self.f_skew.at(i, j).value()
                + inv_es / l * (frame.l1.at(i).value() * f_y[j] + frame.l1.at(j).value() * f_y[i])
                - 2.0 * inv_es * c_term
                + g_scal * frame.h.at(i, j).value()
                + 0.5
                    * (l * l * l3_sigma
                        + l * l / lbar * lij * self.sigma_beta.value()
                        + (self.sigma_0.value() * lij - self.mu_pair.at(i, j).value()))
                + l / lbar * es * self.sigma_0.value() * lij
        })
    }
}
