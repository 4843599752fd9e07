//! Thin wrappers over `libm` so the crate stays `no_std`.

pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn pow(x: f64, r: f64) -> f64 {
    libm::pow(x, r)
}

pub fn hypot_slice(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|&x| x * x).sum())
}

pub fn max(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}
