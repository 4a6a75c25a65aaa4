//! Dense vector kernels on `f64` slices.
//!
//! Every reduction runs sequentially in index order so that repeated runs
//! produce bit-identical results.

use alloc::vec::Vec;

use crate::error::{check_len, Result};

pub fn dot(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len("dot", x.len(), y.len())?;
    Ok(dot_unchecked(x, y))
}

/// Returns `a * x + y`.
pub fn axpy(a: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_len("axpy", x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect())
}

pub fn scale(a: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|xi| a * xi).collect()
}

/// Returns `x - y`.
pub fn sub(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_len("sub", x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(xi, yi)| xi - yi).collect())
}

pub fn norm2(x: &[f64]) -> f64 {
    libm::sqrt(dot_unchecked(x, x))
}

#[inline]
pub(crate) fn dot_unchecked(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        acc += xi * yi;
    }
    acc
}

/// `y += a * x`
#[inline]
pub(crate) fn axpy_in_place(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}
