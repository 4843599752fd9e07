//! Suites exercising the difference-tensor construction, its special cases,
//! the derived barred objects and the vanishing laws.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::core_suite::{bundle_values1, bundle_values2, bundle_values3};
use super::{build_bundle, draw_points, fd, Acc, VerificationReport, VerifyConfig, VerifyError};
use crate::change::{
    classify_change, special_case_d, BarredDerived, ChangeError, ChangeFields, ChangeFrame,
    SpecialCase,
};
use crate::geometry::{Frame, PointState};
use crate::jet::{JetContext, Var};
use crate::math;
use crate::tensor::Grid3;

pub fn run_difference(
    config: &VerifyConfig,
    ctx: &Arc<JetContext>,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let n = config.metric.dim();
    let points = draw_points(config, ctx)?;

    let mut full = Acc::new("difference.full_vs_direct");
    let mut sym = Acc::new("difference.symmetric");
    let mut once = Acc::new("difference.contract_once");
    let mut twice = Acc::new("difference.contract_twice");
    let mut barred_sym = Acc::new("difference.barred_gamma_symmetric");
    let mut orth = Acc::new("solver.vector_orthogonality");
    let mut two_routes = Acc::new("solver.vector_two_routes");
    let mut vec_plug = Acc::new("solver.vector_plugback");
    let mut one_compat = Acc::new("solver.one_index_compat");
    let mut one_plug = Acc::new("solver.one_index_plugback");
    let mut two_compat = Acc::new("solver.two_index_compat");
    let mut two_plug = Acc::new("solver.two_index_plugback");

    for p in &points {
        let bundle = build_bundle(config, ctx, p)?;
        let frame = &bundle.frame;
        let cf = &bundle.cf;
        let barred = &bundle.barred;
        let y = &p.y;

        // Gamma + D against the direct connection of the changed metric.
        {
            let mut formula = Vec::with_capacity(n * n * n);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        formula.push(frame.gamma.at(i, j, k).value() + cf.d.at(i, j, k).value());
                    }
                }
            }
            full.record_vs(&formula, &bundle_values3(&barred.gamma));
        }

        // Structural checks on D.
        {
            let mut s = Vec::new();
            let mut bs = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        s.push(cf.d.at(i, j, k).value() - cf.d.at(i, k, j).value());
                        let g1 = frame.gamma.at(i, j, k).value() + cf.d.at(i, j, k).value();
                        let g2 = frame.gamma.at(i, k, j).value() + cf.d.at(i, k, j).value();
                        bs.push(g1 - g2);
                    }
                }
            }
            sym.record_zero(&s);
            barred_sym.record_zero(&bs);
        }
        {
            let mut formula1 = Vec::new();
            let mut reference1 = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for k in 0..n {
                        acc += cf.d.at(i, j, k).value() * y[k];
                    }
                    formula1.push(acc);
                    reference1.push(cf.d0j.at(i, j).value());
                }
            }
            once.record_vs(&formula1, &reference1);
            let mut formula2 = Vec::new();
            let mut reference2 = Vec::new();
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += cf.d0j.at(i, j).value() * y[j];
                }
                formula2.push(acc);
                reference2.push(cf.d00.at(i).value());
            }
            twice.record_vs(&formula2, &reference2);
        }

        // Solver health.
        {
            let mut by = 0.0;
            for i in 0..n {
                by += cf.b_vec.at(i).value() * y[i];
            }
            orth.record_zero(&[by]);
            two_routes.record_vs(&bundle_values1(&cf.d00), &bundle_values1(&cf.d00_solver));
            vec_plug.push(
                math::max(cf.d00_residuals.plugback_small, cf.d00_residuals.plugback_big),
                math::max(cf.d00_residuals.plugback_small, cf.d00_residuals.plugback_big),
            );
            let oc = cf.one_index_compatibility(frame);
            one_compat.push(oc, oc);
            one_plug.push(
                math::max(cf.d0j_residuals.plugback_small, cf.d0j_residuals.plugback_big),
                math::max(cf.d0j_residuals.plugback_small, cf.d0j_residuals.plugback_big),
            );
            let tc = cf.two_index_compatibility(frame);
            two_compat.push(tc, tc);
            two_plug.push(
                math::max(cf.d_residuals.plugback_small, cf.d_residuals.plugback_big),
                math::max(cf.d_residuals.plugback_small, cf.d_residuals.plugback_big),
            );
        }
    }

    Ok(alloc::vec![
        full.finish(config),
        sym.finish(config),
        once.finish(config),
        twice.finish(config),
        barred_sym.finish(config),
        orth.finish(config),
        two_routes.finish(config),
        vec_plug.finish(config),
        one_compat.finish(config),
        one_plug.finish(config),
        two_compat.finish(config),
        two_plug.finish(config),
    ])
}

pub fn run_specializations(
    config: &VerifyConfig,
    ctx: &Arc<JetContext>,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let points = draw_points(config, ctx)?;

    let conformal_applies = config.change.b.is_zero();
    let beta_applies = config.change.sigma.is_zero();
    let randers_applies = beta_applies && config.metric.is_riemannian();

    let mut candidates: Vec<(SpecialCase, Acc)> = Vec::new();
    if conformal_applies {
        candidates.push((SpecialCase::Conformal, Acc::new("special.conformal")));
        candidates.push((SpecialCase::CConformal, Acc::new("special.c_conformal")));
        candidates.push((SpecialCase::HConformal, Acc::new("special.h_conformal")));
    }
    if randers_applies {
        candidates.push((SpecialCase::Randers, Acc::new("special.randers")));
    }
    if beta_applies {
        candidates.push((SpecialCase::BetaChange, Acc::new("special.beta_change")));
    }

    let mut dropped: Vec<SpecialCase> = Vec::new();
    for p in &points {
        let bundle = build_bundle(config, ctx, p)?;
        let reference = bundle_values3(&bundle.cf.d);
        for (case, acc) in &mut candidates {
            if dropped.contains(case) {
                continue;
            }
            match special_case_d(*case, &bundle.frame, &bundle.cf) {
                Ok(special) => acc.record_vs(special.data(), &reference),
                Err(ChangeError::HypothesisViolated { .. }) => dropped.push(*case),
                Err(e) => return Err(e.into()),
            }
        }
    }

    Ok(candidates
        .into_iter()
        .filter(|(case, _)| !dropped.contains(case))
        .map(|(_, acc)| acc.finish(config))
        .collect())
}

pub fn run_derived(
    config: &VerifyConfig,
    ctx: &Arc<JetContext>,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let n = config.metric.dim();
    let points = draw_points(config, ctx)?;

    let mut spray = Acc::new("derived.spray_shift");
    let mut nonlinear = Acc::new("derived.nonlinear_shift");
    let mut contracted = Acc::new("derived.contracted_derivative");
    let mut contracted_fd = Acc::new("derived.contracted_derivative_fd");
    let mut rhs_free = Acc::new("derived.rhs_difference_free");
    let mut hv_shift = Acc::new("derived.hv_torsion_shift");
    let mut v_shift = Acc::new("derived.v_torsion_shift");
    let mut curvature = Acc::new("derived.curvature_shift");
    let mut lowered = Acc::new("derived.lowered_v_torsion");

    let order_ok = ctx.order() >= 5;
    let mut reading_worst: Vec<(&'static str, f64, f64)> = Vec::new();
    const FD_POINTS: usize = 3;

    for (idx, p) in points.iter().enumerate() {
        let bundle = build_bundle(config, ctx, p)?;
        let frame = &bundle.frame;
        let cf = &bundle.cf;
        let barred = &bundle.barred;
        let derived = BarredDerived::build(frame, cf);

        spray.record_vs(
            derived.sbar.data(),
            &barred.spray().data().iter().map(|j| j.value()).collect::<Vec<_>>(),
        );
        nonlinear.record_vs(
            &derived.nbar.data().iter().map(|j| j.value()).collect::<Vec<_>>(),
            &bundle_values2(&barred.nl),
        );

        // d(D00)/dy^j = 2 D0j through jets.
        {
            let mut formula = Vec::new();
            let mut reference = Vec::new();
            for r in 0..n {
                for j in 0..n {
                    formula.push(cf.d00.at(r).deriv(Var::Y(j)).value());
                    reference.push(2.0 * cf.d0j.at(r, j).value());
                }
            }
            contracted.record_vs(&formula, &reference);
        }

        // The same through the slow finite-difference oracle on a few points.
        if idx < FD_POINTS {
            let mut formula = Vec::new();
            let mut reference = Vec::new();
            for r in 0..n {
                for j in 0..n {
                    let mut f = |yv: &[f64]| d00_component_value(config, ctx, &p.x, yv, r);
                    formula.push(fd::central1(&mut f, &p.y, j));
                    reference.push(2.0 * cf.d0j.at(r, j).value());
                }
            }
            contracted_fd.record_vs(&formula, &reference);
        }

        rhs_free.record_vs(cf.g_mat_difference_free(frame).data(), &bundle_values2(&cf.g_mat));
        hv_shift.record_vs(derived.cbar_up.data(), &bundle_values3(&barred.c_up));
        v_shift.record_vs(derived.pbar.data(), &bundle_values3(&barred.p_tor));

        if order_ok {
            let r_direct = bundle_values3(&barred.r_tor);
            let cands = derived.rbar_candidates.as_ref().expect("order checked");
            if reading_worst.is_empty() {
                for (reading, _) in cands {
                    reading_worst.push((reading.name(), 0.0, 0.0));
                }
            }
            for (slot, (_, grid)) in cands.iter().enumerate() {
                let (abs, rel) = diff_stats(grid.data(), &r_direct);
                reading_worst[slot].1 = math::max(reading_worst[slot].1, abs);
                reading_worst[slot].2 = math::max(reading_worst[slot].2, rel);
            }

            let pbar_low = derived.pbar_low.as_ref().expect("order checked");
            let direct_low = lowered_v_torsion_direct(barred);
            lowered.record_vs(pbar_low.data(), direct_low.data());
        }
    }

    if order_ok && !reading_worst.is_empty() {
        let best = reading_worst
            .iter()
            .min_by(|a, b| a.2.partial_cmp(&b.2).expect("finite residuals"))
            .expect("nonempty");
        curvature.push(best.1, best.2);
        let mut note = format!("matching reading: {}", best.0);
        for (name, _, rel) in &reading_worst {
            note.push_str(&format!("; {name} max_rel {rel:.3e}"));
        }
        curvature.note(note);
    }

    let mut out = alloc::vec![
        spray.finish(config),
        nonlinear.finish(config),
        contracted.finish(config),
        contracted_fd.finish(config),
        rhs_free.finish(config),
        hv_shift.finish(config),
        v_shift.finish(config),
    ];
    if order_ok {
        out.push(curvature.finish(config));
        out.push(lowered.finish(config));
    }
    Ok(out)
}

fn diff_stats(formula: &[f64], reference: &[f64]) -> (f64, f64) {
    let mut diff = 0.0f64;
    let mut refmax = 0.0f64;
    for (a, b) in formula.iter().zip(reference) {
        diff = math::max(diff, math::abs(a - b));
        refmax = math::max(refmax, math::abs(*b));
    }
    (diff, diff / (1.0 + refmax))
}

/// Value of D^r_{00} at an arbitrary support element, for the FD oracle.
fn d00_component_value(
    config: &VerifyConfig,
    ctx: &Arc<JetContext>,
    x: &[f64],
    y: &[f64],
    r: usize,
) -> f64 {
    let p = PointState::new(x.to_vec(), y.to_vec());
    let l = config.metric.eval(ctx, &p).expect("FD probe point valid");
    let frame = Frame::build(ctx, p, l).expect("FD probe point valid");
    let fields = ChangeFields::from_spec(&config.change, ctx, x).expect("FD probe point valid");
    let cf = ChangeFrame::build(&frame, &fields).expect("FD probe point valid");
    cf.d00.at(r).value()
}

/// gbar_ih Pbar^i_jk from the direct pipeline.
fn lowered_v_torsion_direct(barred: &Frame) -> Grid3<f64> {
    let n = barred.n;
    Grid3::from_fn(n, |h, j, k| {
        (0..n).map(|i| barred.g.at(i, h).value() * barred.p_tor.at(i, j, k).value()).sum::<f64>()
    })
}

pub fn run_laws(
    config: &VerifyConfig,
    ctx: &Arc<JetContext>,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let points = draw_points(config, ctx)?;
    let class = classify_change(&config.metric, &config.change, &points, ctx)?;

    let mut homothety = Acc::new("laws.homothety_consistency");
    homothety.push(if class.homothety_law_ok { 0.0 } else { 1.0 }, 0.0);
    homothety.note(format!(
        "homothetic={} parallel={} vanishing={} (max |sigma_i| {:.3e}, max |b_cov| {:.3e}, max |D| {:.3e})",
        class.is_homothetic,
        class.is_b_parallel,
        class.d_is_zero,
        class.max_sigma_grad,
        class.max_b_cov,
        class.max_d
    ));

    let mut vanishing = Acc::new("laws.vanishing_consistency");
    vanishing.push(if class.vanishing_law_ok { 0.0 } else { 1.0 }, 0.0);

    let mut out = alloc::vec![homothety.finish(config), vanishing.finish(config)];

    if class.is_homothetic && class.is_b_parallel {
        let mut null_instance = Acc::new("laws.null_instance");
        null_instance.push(class.max_d, class.max_d);
        out.push(null_instance.finish(config));
    }
    let conformal_nonhomothetic = config.change.b.is_zero() && !class.is_homothetic;
    let beta_nonparallel = config.change.sigma.is_zero() && !class.is_b_parallel;
    if conformal_nonhomothetic || beta_nonparallel {
        let mut floor_acc = Acc::new("laws.nonvanishing_floor");
        floor_acc.push(class.max_d, class.max_d);
        floor_acc.note(format!("measured max |D| = {:.6e}", class.max_d));
        out.push(floor_acc.finish(config));
    }
    Ok(out)
}
