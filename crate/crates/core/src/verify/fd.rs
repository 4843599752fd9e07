//! Central finite differences with one Richardson extrapolation step; the
//! slow, jet-independent oracle.
//!
//! Mixed partials are evaluated with a tensor-product stencil whose step is
//! chosen from the total order: higher orders need larger steps to keep the
//! rounding amplification `eps / h^order` below the truncation error.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

const H1: f64 = 1e-4;
const H2: f64 = 1e-3;
const H3: f64 = 3e-3;

fn scale_for(at: f64) -> f64 {
    math::max(1.0, math::abs(at))
}

/// First derivative in coordinate `var` of `f` at `at`.
pub fn central1(f: &mut dyn FnMut(&[f64]) -> f64, at: &[f64], var: usize) -> f64 {
    let h = H1 * scale_for(at[var]);
    let d = |f: &mut dyn FnMut(&[f64]) -> f64, h: f64| {
        let mut p = at.to_vec();
        p[var] = at[var] + h;
        let fp = f(&p);
        p[var] = at[var] - h;
        let fm = f(&p);
        (fp - fm) / (2.0 * h)
    };
    let coarse = d(f, h);
    let fine = d(f, h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// Second derivative in coordinate `var` of `f` at `at`.
pub fn central2(f: &mut dyn FnMut(&[f64]) -> f64, at: &[f64], var: usize) -> f64 {
    let h = H2 * scale_for(at[var]);
    let d = |f: &mut dyn FnMut(&[f64]) -> f64, h: f64| {
        let f0 = f(at);
        let mut p = at.to_vec();
        p[var] = at[var] + h;
        let fp = f(&p);
        p[var] = at[var] - h;
        let fm = f(&p);
        (fp - 2.0 * f0 + fm) / (h * h)
    };
    let coarse = d(f, h);
    let fine = d(f, h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// One-dimensional symmetric stencil for derivative order 1..3: offsets (in
/// units of h) and weights, to be divided by h^order.
fn stencil(order: u8) -> (&'static [f64], &'static [f64]) {
    match order {
        1 => (&[-1.0, 1.0], &[-0.5, 0.5]),
        2 => (&[-1.0, 0.0, 1.0], &[1.0, -2.0, 1.0]),
        3 => (&[-2.0, -1.0, 1.0, 2.0], &[-0.5, 1.0, -1.0, 0.5]),
        _ => panic!("stencil order out of range"),
    }
}

/// Mixed partial derivative for an exponent tuple over the coordinates via a
/// tensor-product stencil with one Richardson step. Total order <= 3.
pub fn partial(f: &mut dyn FnMut(&[f64]) -> f64, at: &[f64], alpha: &[u8]) -> f64 {
    let total: usize = alpha.iter().map(|&e| e as usize).sum();
    if total == 0 {
        return f(at);
    }
    assert!(total <= 3, "oracle supports total order <= 3");
    let h_base = match total {
        1 => H1,
        2 => H2,
        _ => H3,
    };
    let active: Vec<usize> = (0..alpha.len()).filter(|&v| alpha[v] > 0).collect();
    let steps: Vec<f64> = active.iter().map(|&v| h_base * scale_for(at[v])).collect();

    let eval = |f: &mut dyn FnMut(&[f64]) -> f64, shrink: f64| -> f64 {
        let mut acc = 0.0;
        let mut divisor = 1.0;
        for (k, &v) in active.iter().enumerate() {
            let h = steps[k] * shrink;
            divisor *= math::pow(h, alpha[v] as f64);
        }
        // Walk the product of the per-variable stencils.
        let mut cursors = vec![0usize; active.len()];
        loop {
            let mut point = at.to_vec();
            let mut weight = 1.0;
            for (k, &v) in active.iter().enumerate() {
                let (offsets, weights) = stencil(alpha[v]);
                point[v] = at[v] + offsets[cursors[k]] * steps[k] * shrink;
                weight *= weights[cursors[k]];
            }
            acc += weight * f(&point);
            // Advance the odometer over stencil nodes.
            let mut k = 0;
            loop {
                if k == active.len() {
                    return acc / divisor;
                }
                cursors[k] += 1;
                if cursors[k] < stencil(alpha[active[k]]).0.len() {
                    break;
                }
                cursors[k] = 0;
                k += 1;
            }
        }
    };

    let coarse = eval(f, 1.0);
    let fine = eval(f, 0.5);
    (4.0 * fine - coarse) / 3.0
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;

    #[test]
    fn first_derivative_of_norm() {
        // d|y|/dy1 at y = (3, 4) is 0.6.
        let mut f = |p: &[f64]| math::sqrt(p[0] * p[0] + p[1] * p[1]);
        let got = central1(&mut f, &[3.0, 4.0], 0);
        assert!((got - 0.6).abs() < 1e-9);
    }

    #[test]
    fn constant_field_derivative_vanishes() {
        let mut f = |_: &[f64]| 4.2;
        assert!(central1(&mut f, &[1.0, 1.0], 1).abs() < 1e-10);
        assert!(central2(&mut f, &[1.0, 1.0], 0).abs() < 1e-10);
    }

    #[test]
    fn mixed_third_partial_of_polynomial() {
        // f = x^2 y, d^3 f / dx^2 dy = 2.
        let mut f = |p: &[f64]| p[0] * p[0] * p[1];
        let got = partial(&mut f, &[0.7, -1.3], &[2, 1]);
        assert!((got - 2.0).abs() < 1e-6, "got {got}");
    }

    #[test]
    fn pure_third_partial_of_exponential() {
        let mut f = |p: &[f64]| math::exp(2.0 * p[0]);
        let got = partial(&mut f, &[0.3, 0.0], &[3, 0]);
        let want = 8.0 * math::exp(0.6);
        assert!((got - want).abs() / want < 1e-7, "got {got} want {want}");
    }

    #[test]
    fn triple_mixed_partial() {
        // f = x y z e^x: d^3/dxdydz = (1 + x) e^x.
        let mut f = |p: &[f64]| p[0] * p[1] * p[2] * math::exp(p[0]);
        let got = partial(&mut f, &[0.4, -0.2, 0.9], &[1, 1, 1]);
        let want = 1.4 * math::exp(0.4);
        assert!((got - want).abs() / want < 1e-7, "got {got} want {want}");
    }
}
