//! Dense rank-1..4 component grids for tensors at a point.
//!
//! Components are stored row-major over a small dimension (n <= 4); symmetry
//! is maintained by construction in the pipelines, not by packed storage.

use alloc::vec;
use alloc::vec::Vec;

use crate::jet::Jet;
use crate::math;

#[derive(Clone, Debug)]
pub struct Grid1<T> {
    n: usize,
    data: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct Grid2<T> {
    n: usize,
    data: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct Grid3<T> {
    n: usize,
    data: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct Grid4<T> {
    n: usize,
    data: Vec<T>,
}

macro_rules! grid_common {
    ($name:ident, $rank:literal) => {
        impl<T> $name<T> {
            pub fn dim(&self) -> usize {
                self.n
            }

            pub fn len(&self) -> usize {
                self.data.len()
            }

            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            pub fn data(&self) -> &[T] {
                &self.data
            }

            pub fn map<U>(&self, f: impl Fn(&T) -> U) -> $name<U> {
                $name { n: self.n, data: self.data.iter().map(f).collect() }
            }
        }
    };
}

grid_common!(Grid1, 1);
grid_common!(Grid2, 2);
grid_common!(Grid3, 3);
grid_common!(Grid4, 4);

impl<T> Grid1<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> T) -> Self {
        Grid1 { n, data: (0..n).map(&mut f).collect() }
    }

    pub fn at(&self, i: usize) -> &T {
        &self.data[i]
    }

    pub fn at_mut(&mut self, i: usize) -> &mut T {
        &mut self.data[i]
    }
}

impl<T> Grid2<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Grid2 { n, data }
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

impl<T> Grid3<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data.push(f(i, j, k));
                }
            }
        }
        Grid3 { n, data }
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> &T {
        &self.data[(i * self.n + j) * self.n + k]
    }

    pub fn at_mut(&mut self, i: usize, j: usize, k: usize) -> &mut T {
        &mut self.data[(i * self.n + j) * self.n + k]
    }
}

impl<T> Grid4<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        data.push(f(i, j, k, l));
                    }
                }
            }
        }
        Grid4 { n, data }
    }

    pub fn at(&self, i: usize, j: usize, k: usize, l: usize) -> &T {
        &self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }

    pub fn at_mut(&mut self, i: usize, j: usize, k: usize, l: usize) -> &mut T {
        &mut self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }
}

macro_rules! grid_values {
    ($name:ident) => {
        impl $name<Jet> {
            /// Order-0 extraction into a plain value grid.
            pub fn values(&self) -> $name<f64> {
                self.map(Jet::value)
            }
        }

        impl $name<f64> {
            pub fn max_abs(&self) -> f64 {
                self.data.iter().fold(0.0, |m, &v| math::max(m, math::abs(v)))
            }

            pub fn zeros(n: usize, len: usize) -> Self {
                $name { n, data: vec![0.0; len] }
            }
        }
    };
}

grid_values!(Grid1);
grid_values!(Grid2);
grid_values!(Grid3);
grid_values!(Grid4);

/// Max-norm of the component-wise difference of two equal-shape value grids.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (&x, &y)| math::max(m, math::abs(x - y)))
}
