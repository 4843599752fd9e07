//! Cartan-connection apparatus of a Finsler metric at a sample point.
//!
//! Everything is carried as jets so that later stages can take further x- or
//! y-derivatives of any tensor without finite differencing: the fundamental
//! tensor, its inverse, the Cartan tensor, the spray, the nonlinear
//! connection, the connection coefficients and the torsions.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::jet::{invert_matrix, Jet, JetContext, JetError, Var};
use crate::math;
use crate::tensor::{Grid1, Grid2, Grid3, Grid4};

#[derive(Debug, Clone, PartialEq)]
pub enum GeomError {
    /// Metric function not positive (or undefined) at the point.
    InvalidPoint {
        l_value: f64,
    },
    /// Fundamental tensor singular at the point.
    DegenerateMetric {
        cond_estimate: f64,
    },
    Jet(JetError),
}

impl fmt::Display for GeomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeomError::InvalidPoint { l_value } => {
                write!(f, "metric value {l_value} not positive at sample point")
            }
            GeomError::DegenerateMetric { cond_estimate } => {
                write!(f, "fundamental tensor degenerate (condition {cond_estimate:e})")
            }
            GeomError::Jet(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for GeomError {}

impl From<JetError> for GeomError {
    fn from(e: JetError) -> Self {
        match e {
            JetError::SingularValuePart { cond_estimate } => {
                GeomError::DegenerateMetric { cond_estimate }
            }
            other => GeomError::Jet(other),
        }
    }
}

/// A sample `(x, y)` with its support element.
#[derive(Debug, Clone, PartialEq)]
pub struct PointState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_nonzero: bool,
    pub l_positive: bool,
}

impl PointState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len(), "coordinate arity");
        let y_nonzero = math::hypot_slice(&y) > 1e-12;
        PointState { x, y, y_nonzero, l_positive: false }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// All unbarred objects of the Cartan pipeline at one point, jet-valued.
pub struct Frame {
    pub n: usize,
    pub point: PointState,
    pub ctx: Arc<JetContext>,
    /// Coordinate seeds, shared by downstream contractions with y.
    pub y_seed: Grid1<Jet>,
    /// Metric function L and energy E = L^2 / 2.
    pub l: Jet,
    pub energy: Jet,
    pub inv_l: Jet,
    /// L_i, L_ij, L_ijk, L_ijkl (successive y-derivatives of L).
    pub l1: Grid1<Jet>,
    pub l2: Grid2<Jet>,
    pub l3: Grid3<Jet>,
    pub l4: Grid4<Jet>,
    /// l^i = y^i / L.
    pub l_up: Grid1<Jet>,
    pub g: Grid2<Jet>,
    pub g_inv: Grid2<Jet>,
    pub h: Grid2<Jet>,
    /// Cartan tensor C_ijk and its raised form C^i_jk.
    pub c_low: Grid3<Jet>,
    pub c_up: Grid3<Jet>,
    /// Spray coefficients G^i (so S^r = 2 G^r).
    pub spray_g: Grid1<Jet>,
    /// Nonlinear connection N^i_j.
    pub nl: Grid2<Jet>,
    /// Cartan connection coefficients.
    pub gamma: Grid3<Jet>,
    /// Torsions P^i_jk and R^i_jk.
    pub p_tor: Grid3<Jet>,
    pub r_tor: Grid3<Jet>,
}

impl Frame {
    /// Builds the full pipeline from a jet of the metric function L.
    ///
    /// Needs truncation order at least 4 (four y-derivatives of L plus the
    /// torsions); order 5 additionally covers the x-derivatives of the
    /// deepest change-pipeline objects.
    pub fn build(ctx: &Arc<JetContext>, point: PointState, l: Jet) -> Result<Frame, GeomError> {
        let n = ctx.dim();
        assert_eq!(point.dim(), n, "point dimension");
        if ctx.order() < 4 {
            return Err(GeomError::Jet(JetError::OrderExceeded {
                requested: 4,
                available: ctx.order(),
            }));
        }
        if !point.y_nonzero {
            return Err(GeomError::InvalidPoint { l_value: f64::NAN });
        }
        if !(l.value() > 0.0) {
            return Err(GeomError::InvalidPoint { l_value: l.value() });
        }

        let y_seed = Grid1::from_fn(n, |i| Jet::seed(ctx, Var::Y(i), point.y[i]));
        let energy = (&l * &l).scale(0.5);
        let inv_l = l.recip()?;

        let l1 = Grid1::from_fn(n, |i| l.deriv(Var::Y(i)));
        let l2 = Grid2::from_fn(n, |i, j| l1.at(i).deriv(Var::Y(j)));
        let l3 = Grid3::from_fn(n, |i, j, k| l2.at(i, j).deriv(Var::Y(k)));
        let l4 = Grid4::from_fn(n, |i, j, k, h| l3.at(i, j, k).deriv(Var::Y(h)));

        let l_up = Grid1::from_fn(n, |i| y_seed.at(i).mul(&inv_l));

        let de_dy = Grid1::from_fn(n, |i| energy.deriv(Var::Y(i)));
        let g = Grid2::from_fn(n, |i, j| de_dy.at(i).deriv(Var::Y(j)));
        let g_inv_flat = invert_matrix(g.data(), n)?;
        let g_inv = Grid2::from_fn(n, |i, j| g_inv_flat[i * n + j].clone());

        let h = Grid2::from_fn(n, |i, j| g.at(i, j) - &(l1.at(i) * l1.at(j)));

        let c_low = Grid3::from_fn(n, |i, j, k| g.at(i, j).deriv(Var::Y(k)).scale(0.5));
        let c_up = Grid3::from_fn(n, |i, j, k| {
            let mut acc = g_inv.at(i, 0).mul(c_low.at(0, j, k));
            for r in 1..n {
                acc = &acc + &(g_inv.at(i, r) * c_low.at(r, j, k));
            }
            acc
        });

        // G^i = 1/4 g^{il} (y^k d_k dy_l L^2 - d_l L^2), written through E = L^2/2.
        let spray_rhs = Grid1::from_fn(n, |l_idx| {
            let mut acc = -(&energy.deriv(Var::X(l_idx)));
            for k in 0..n {
                acc = &acc + &(y_seed.at(k) * &de_dy.at(l_idx).deriv(Var::X(k)));
            }
            acc
        });
        let spray_g = Grid1::from_fn(n, |i| {
            let mut acc = g_inv.at(i, 0).mul(spray_rhs.at(0));
            for l_idx in 1..n {
                acc = &acc + &(g_inv.at(i, l_idx) * spray_rhs.at(l_idx));
            }
            acc.scale(0.5)
        });

        let nl = Grid2::from_fn(n, |i, j| spray_g.at(i).deriv(Var::Y(j)));

        let delta = |f: &Jet, k: usize| -> Jet {
            let mut acc = f.deriv(Var::X(k));
            for r in 0..n {
                acc = &acc - &(nl.at(r, k) * &f.deriv(Var::Y(r)));
            }
            acc
        };

        let dg = Grid3::from_fn(n, |l_idx, k, s| delta(g.at(l_idx, k), s));
        let gamma = Grid3::from_fn(n, |i, j, k| {
            let mut acc = Jet::constant(ctx, 0.0);
            for l_idx in 0..n {
                let sym = &(dg.at(l_idx, k, j) + dg.at(j, l_idx, k)) - dg.at(j, k, l_idx);
                acc = &acc + &(g_inv.at(i, l_idx) * &sym);
            }
            acc.scale(0.5)
        });

        let p_tor = Grid3::from_fn(n, |i, j, k| &nl.at(i, j).deriv(Var::Y(k)) - gamma.at(i, j, k));
        let r_tor = Grid3::from_fn(n, |i, j, k| &delta(nl.at(i, j), k) - &delta(nl.at(i, k), j));

        let mut point = point;
        point.l_positive = true;

        Ok(Frame {
            n,
            point,
            ctx: Arc::clone(ctx),
            y_seed,
            l,
            energy,
            inv_l,
            l1,
            l2,
            l3,
            l4,
            l_up,
            g,
            g_inv,
            h,
            c_low,
            c_up,
            spray_g,
            nl,
            gamma,
            p_tor,
            r_tor,
        })
    }

    /// Horizontal basis derivative applied to an arbitrary jet.
    pub fn delta(&self, f: &Jet, k: usize) -> Jet {
        let mut acc = f.deriv(Var::X(k));
        for r in 0..self.n {
            acc = &acc - &(self.nl.at(r, k) * &f.deriv(Var::Y(r)));
        }
        acc
    }

    /// Spray vector S^r = 2 G^r.
    pub fn spray(&self) -> Grid1<Jet> {
        Grid1::from_fn(self.n, |i| self.spray_g.at(i).scale(2.0))
    }

    /// Horizontal covariant derivative of a covector field.
    pub fn cov_deriv_covector(&self, field: &Grid1<Jet>) -> Grid2<Jet> {
        Grid2::from_fn(self.n, |i, j| {
            let mut acc = self.delta(field.at(i), j);
            for r in 0..self.n {
                acc = &acc - &(field.at(r) * self.gamma.at(r, i, j));
            }
            acc
        })
    }

    /// Horizontal covariant derivative of a (0,2) field.
    pub fn cov_deriv_02(&self, field: &Grid2<Jet>) -> Grid3<Jet> {
        Grid3::from_fn(self.n, |i, j, k| {
            let mut acc = self.delta(field.at(i, j), k);
            for r in 0..self.n {
                acc = &acc - &(field.at(r, j) * self.gamma.at(r, i, k));
                acc = &acc - &(field.at(i, r) * self.gamma.at(r, j, k));
            }
            acc
        })
    }

    /// Horizontal covariant derivative of a (1,1) field.
    pub fn cov_deriv_11(&self, field: &Grid2<Jet>) -> Grid3<Jet> {
        Grid3::from_fn(self.n, |i, j, k| {
            let mut acc = self.delta(field.at(i, j), k);
            for r in 0..self.n {
                acc = &acc + &(field.at(r, j) * self.gamma.at(i, r, k));
                acc = &acc - &(field.at(i, r) * self.gamma.at(r, j, k));
            }
            acc
        })
    }

    /// Contracts the last index of a rank-3 jet grid with y.
    pub fn contract_y3(&self, t: &Grid3<Jet>) -> Grid2<Jet> {
        Grid2::from_fn(self.n, |i, j| {
            let mut acc = t.at(i, j, 0).mul(self.y_seed.at(0));
            for k in 1..self.n {
                acc = &acc + &(t.at(i, j, k) * self.y_seed.at(k));
            }
            acc
        })
    }

    /// Contracts the last index of a rank-2 jet grid with y.
    pub fn contract_y2(&self, t: &Grid2<Jet>) -> Grid1<Jet> {
        Grid1::from_fn(self.n, |i| {
            let mut acc = t.at(i, 0).mul(self.y_seed.at(0));
            for k in 1..self.n {
                acc = &acc + &(t.at(i, k) * self.y_seed.at(k));
            }
            acc
        })
    }
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use crate::jet::DEFAULT_ORDER;

    fn euclidean_l(ctx: &Arc<JetContext>, p: &PointState) -> Jet {
        let n = ctx.dim();
        let mut sum = Jet::constant(ctx, 0.0);
        for i in 0..n {
            let yi = Jet::seed(ctx, Var::Y(i), p.y[i]);
            sum = &sum + &(&yi * &yi);
        }
        sum.sqrt().unwrap()
    }

    #[test]
    fn euclidean_frame_values() {
        let ctx = JetContext::new(2, DEFAULT_ORDER);
        let p = PointState::new(alloc::vec![0.3, -0.2], alloc::vec![3.0, 4.0]);
        let l = euclidean_l(&ctx, &p);
        let f = Frame::build(&ctx, p, l).unwrap();

        assert!((f.l.value() - 5.0).abs() < 1e-14);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((f.g.at(i, j).value() - want).abs() < 1e-13);
            }
        }
        let h_expected = [[16.0 / 25.0, -12.0 / 25.0], [-12.0 / 25.0, 9.0 / 25.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((f.h.at(i, j).value() - h_expected[i][j]).abs() < 1e-13);
            }
        }
        // Flat metric: spray, nonlinear connection, connection and torsions vanish.
        for i in 0..2 {
            assert!(f.spray_g.at(i).value().abs() < 1e-13);
            for j in 0..2 {
                assert!(f.nl.at(i, j).value().abs() < 1e-13);
                for k in 0..2 {
                    assert!(f.gamma.at(i, j, k).value().abs() < 1e-13);
                    assert!(f.p_tor.at(i, j, k).value().abs() < 1e-12);
                    assert!(f.r_tor.at(i, j, k).value().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_nonpositive_metric() {
        let ctx = JetContext::new(2, DEFAULT_ORDER);
        let p = PointState::new(alloc::vec![0.0, 0.0], alloc::vec![1.0, 0.0]);
        let l = Jet::constant(&ctx, -1.0);
        assert!(matches!(Frame::build(&ctx, p, l), Err(GeomError::InvalidPoint { .. })));
    }
}
