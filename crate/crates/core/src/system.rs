use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::linalg::vector::all_finite;
use crate::linalg::SparseMatrix;

/// Relative tolerance for the symmetry check on `M`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// The block system
///
/// ```text
/// [ M   A ] [w]   [g]
/// [ A^T 0 ] [p] = [r]
/// ```
///
/// together with the scalar `eta` that fixes the dual weight `N = (1/eta) I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSystem {
    m: SparseMatrix,
    a: SparseMatrix,
    eta: f64,
    g: Vec<f64>,
    r: Vec<f64>,
}

impl SaddleSystem {
    /// Validates dimensions, `eta > 0`, finiteness and symmetry of `M`.
    pub fn new(m: SparseMatrix, a: SparseMatrix, eta: f64, g: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        check_len("saddle system: M rows", m.n_rows(), m.n_cols())?;
        check_len("saddle system: A rows vs M", m.n_rows(), a.n_rows())?;
        check_len("saddle system: g length", m.n_rows(), g.len())?;
        check_len("saddle system: r length", a.n_cols(), r.len())?;
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                reason: "must be positive and finite",
            });
        }
        if !all_finite(&g) || !all_finite(&r) {
            return Err(Error::NonFinite("saddle system right-hand side"));
        }
        m.check_symmetric(SYMMETRY_TOL)?;
        Ok(Self { m, a, eta, g, r })
    }

    pub fn m(&self) -> &SparseMatrix {
        &self.m
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Primal dimension (rows of `M`).
    pub fn primal_dim(&self) -> usize {
        self.m.n_rows()
    }

    /// Dual dimension (columns of `A`).
    pub fn dual_dim(&self) -> usize {
        self.a.n_cols()
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.m.clone(), self.a.clone(), eta, self.g.clone(), self.r.clone())
    }
}
