//! Jets against Richardson finite differences for every catalog function,
//! all mixed partials up to total order 3.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{draw_points, fd, Acc, VerificationReport, VerifyConfig, VerifyError};
use crate::jet::JetContext;
use crate::math;

pub fn run(
    config: &VerifyConfig,
    ctx: &Arc<JetContext>,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let n = config.metric.dim();
    let points = draw_points(config, ctx)?;
    let alphas = multi_indices(2 * n, 3);

    let mut metric_acc = Acc::new("autodiff.metric");
    let mut sigma_acc = Acc::new("autodiff.sigma");
    let mut b_acc = Acc::new("autodiff.b");

    for p in &points {
        let joint: Vec<f64> = p.x.iter().chain(p.y.iter()).copied().collect();

        let l_jet = config.metric.eval(ctx, p)?;
        let metric = &config.metric;
        for alpha in &alphas {
            let jet_val = l_jet.extract(alpha).map_err(crate::geometry::GeomError::Jet)?;
            let mut f = |joint: &[f64]| metric.eval_value(&joint[..n], &joint[n..]);
            let fd_val = fd::partial(&mut f, &joint, alpha);
            record_pair(&mut metric_acc, jet_val, fd_val);
        }

        let sigma_jet = config.change.sigma.eval_jet(ctx, &p.x)?;
        let sigma = &config.change.sigma;
        for alpha in &alphas {
            if alpha[n..].iter().any(|&e| e > 0) {
                continue; // x-only fields
            }
            let jet_val = sigma_jet.extract(alpha).map_err(crate::geometry::GeomError::Jet)?;
            let mut f = |joint: &[f64]| sigma.eval_value(&joint[..n]);
            let fd_val = fd::partial(&mut f, &joint, alpha);
            record_pair(&mut sigma_acc, jet_val, fd_val);
        }

        let b_jets = config.change.b.eval_jets(ctx, &p.x)?;
        let b_field = &config.change.b;
        for i in 0..n {
            for alpha in &alphas {
                if alpha[n..].iter().any(|&e| e > 0) {
                    continue;
                }
                let jet_val =
                    b_jets.at(i).extract(alpha).map_err(crate::geometry::GeomError::Jet)?;
                let mut f = |joint: &[f64]| b_field.eval_value(&joint[..n], i);
                let fd_val = fd::partial(&mut f, &joint, alpha);
                record_pair(&mut b_acc, jet_val, fd_val);
            }
        }
    }

    Ok(alloc::vec![metric_acc.finish(config), sigma_acc.finish(config), b_acc.finish(config),])
}

fn record_pair(acc: &mut Acc, jet_val: f64, fd_val: f64) {
    let abs = math::abs(jet_val - fd_val);
    acc.push(abs, abs / (1.0 + math::abs(fd_val)));
}

/// All exponent tuples over `vars` variables with 1 <= total degree <= `max`.
fn multi_indices(vars: usize, max: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut current = alloc::vec![0u8; vars];
    fill(vars, max, 0, &mut current, &mut out);
    out.retain(|a| a.iter().any(|&e| e > 0));
    out
}

fn fill(vars: usize, budget: usize, at: usize, current: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if at == vars {
        out.push(current.clone());
        return;
    }
    for e in 0..=budget {
        current[at] = e as u8;
        fill(vars, budget - e, at + 1, current, out);
    }
    current[at] = 0;
}
