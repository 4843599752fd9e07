//! Barred spray, nonlinear connection, connection coefficients and torsions
//! expressed through the difference tensor, ready to be compared against the
//! direct pipeline on the changed metric.

use alloc::vec::Vec;

use super::ChangeFrame;
use crate::geometry::Frame;
use crate::jet::{Jet, Var};
use crate::tensor::{Grid1, Grid2, Grid3};

/// Reading choices for the curvature-torsion transformation law: the
/// covariant derivative of the one-contracted difference tensor may be taken
/// with either connection, and the overall sign of the shift is resolved
/// empirically; reports record which reading matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureReading {
    UnbarredPlus,
    UnbarredMinus,
    BarredPlus,
    BarredMinus,
}

impl CurvatureReading {
    pub const ALL: [CurvatureReading; 4] = [
        CurvatureReading::UnbarredPlus,
        CurvatureReading::UnbarredMinus,
        CurvatureReading::BarredPlus,
        CurvatureReading::BarredMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CurvatureReading::UnbarredPlus => "unbarred_plus",
            CurvatureReading::UnbarredMinus => "unbarred_minus",
            CurvatureReading::BarredPlus => "barred_plus",
            CurvatureReading::BarredMinus => "barred_minus",
        }
    }
}

/// Formula-route barred objects.
pub struct BarredDerived {
    /// Sbar^r = S^r + D^r_{00}.
    pub sbar: Grid1<f64>,
    /// Nbar^i_j = N^i_j + D^i_{0j}, jet-valued for the barred readings.
    pub nbar: Grid2<Jet>,
    /// Gammabar^i_jk = Gamma^i_jk + D^i_jk.
    pub gammabar: Grid3<Jet>,
    /// Cbar^i_jk = C^i_jk + A^i_jk.
    pub cbar_up: Grid3<f64>,
    /// The y-derivative of the one-contracted difference tensor.
    pub d0_dy: Grid3<Jet>,
    /// Pbar^i_jk = P^i_jk - D^i_jk + (d/dy^k) D^i_{0j}.
    pub pbar: Grid3<f64>,
    /// The four candidate right-hand sides for the curvature-torsion law,
    /// present when the jet order allows them (order >= 5).
    pub rbar_candidates: Option<Vec<(CurvatureReading, Grid3<f64>)>>,
    /// Lowered (v)hv-torsion of the changed metric from the transformation
    /// law; present when the jet order allows it.
    pub pbar_low: Option<Grid3<f64>>,
}

impl BarredDerived {
    pub fn build(frame: &Frame, cf: &ChangeFrame) -> BarredDerived {
        let n = frame.n;

        let sbar = Grid1::from_fn(n, |r| 2.0 * frame.spray_g.at(r).value() + cf.d00.at(r).value());
        let nbar = Grid2::from_fn(n, |i, j| frame.nl.at(i, j) + cf.d0j.at(i, j));
        let gammabar = Grid3::from_fn(n, |i, j, k| frame.gamma.at(i, j, k) + cf.d.at(i, j, k));
        let cbar_up = Grid3::from_fn(n, |i, j, k| {
            frame.c_up.at(i, j, k).value() + cf.a_diff.at(i, j, k).value()
        });

        let d0_dy = Grid3::from_fn(n, |i, j, k| cf.d0j.at(i, j).deriv(Var::Y(k)));
        let pbar = Grid3::from_fn(n, |i, j, k| {
            frame.p_tor.at(i, j, k).value() - cf.d.at(i, j, k).value() + d0_dy.at(i, j, k).value()
        });

        let order_ok = frame.ctx.order() >= 5;
        let rbar_candidates = order_ok.then(|| {
            let unbarred_cov = frame.cov_deriv_11(&cf.d0j);
            let barred_cov = cov_deriv_11_with(frame, &cf.d0j, &nbar, &gammabar);
            let shift = |cov: &Grid3<Jet>| -> Grid3<f64> {
                // U_{j,k}( D^i_{0j|k} - (B^i_jr + P^i_jr) D^r_{0k} )
                let cand = Grid3::from_fn(n, |i, j, k| {
                    let mut v = cov.at(i, j, k).value();
                    for r in 0..n {
                        v -= (d0_dy.at(i, j, r).value() + frame.p_tor.at(i, j, r).value())
                            * cf.d0j.at(r, k).value();
                    }
                    v
                });
                Grid3::from_fn(n, |i, j, k| *cand.at(i, j, k) - *cand.at(i, k, j))
            };
            let shift_unbarred = shift(&unbarred_cov);
            let shift_barred = shift(&barred_cov);
            CurvatureReading::ALL
                .iter()
                .map(|&reading| {
                    let (sh, sign) = match reading {
                        CurvatureReading::UnbarredPlus => (&shift_unbarred, 1.0),
                        CurvatureReading::UnbarredMinus => (&shift_unbarred, -1.0),
                        CurvatureReading::BarredPlus => (&shift_barred, 1.0),
                        CurvatureReading::BarredMinus => (&shift_barred, -1.0),
                    };
                    let grid = Grid3::from_fn(n, |i, j, k| {
                        frame.r_tor.at(i, j, k).value() + sign * sh.at(i, j, k)
                    });
                    (reading, grid)
                })
                .collect()
        });

        let pbar_low = order_ok.then(|| {
            let tau = cf.tau.value();
            let l = frame.l.value();
            let sigma_0 = cf.sigma_0.value();
            let g = frame.g.values();
            let l3 = frame.l3.values();
            let l4 = frame.l4.values();
            let d00: Vec<f64> = (0..n).map(|r| cf.d00.at(r).value()).collect();
            let d0 = cf.d0j.values();
            // Unbarred lowered torsion P_hjk = g_ih P^i_jk.
            let p_low = Grid3::from_fn(n, |h, j, k| {
                (0..n).map(|i| g.at(i, h) * frame.p_tor.at(i, j, k).value()).sum::<f64>()
            });
            Grid3::from_fn(n, |h, j, k| {
                let quad: f64 = (0..n).map(|r| l4.at(h, j, k, r) * d00[r]).sum();
                let tjk: f64 = (0..n).map(|r| l3.at(h, j, r) * d0.at(r, k)).sum();
                let tkj: f64 = (0..n).map(|r| l3.at(h, k, r) * d0.at(r, j)).sum();
                let thh: f64 = (0..n).map(|r| l3.at(j, k, r) * d0.at(r, h)).sum();
                tau * p_low.at(h, j, k)
                    - tau * l / 2.0 * (quad + tjk + tkj + thh - sigma_0 * l3.at(h, j, k))
            })
        });

        BarredDerived { sbar, nbar, gammabar, cbar_up, d0_dy, pbar, rbar_candidates, pbar_low }
    }
}

/// Covariant derivative of a (1,1) jet field using explicitly supplied
/// connection data (used for the barred reading).
fn cov_deriv_11_with(
    frame: &Frame,
    field: &Grid2<Jet>,
    nl: &Grid2<Jet>,
    gamma: &Grid3<Jet>,
) -> Grid3<Jet> {
    let n = frame.n;
    Grid3::from_fn(n, |i, j, k| {
        let mut acc = field.at(i, j).deriv(Var::X(k));
        for r in 0..n {
            acc = &acc - &(nl.at(r, k) * &field.at(i, j).deriv(Var::Y(r)));
        }
        for r in 0..n {
            acc = &acc + &(field.at(r, j) * gamma.at(i, r, k));
            acc = &acc - &(field.at(i, r) * gamma.at(r, j, k));
        }
        acc
    })
}
