//! Lowest-order Raviart-Thomas / piecewise-constant discretization of
//! `σ - ∇u = 0`, `-div σ = f` on the unit square, `u = 0` on the boundary.
//!
//! Unknowns are normal velocities on edges (normals point in `+x` / `+y`).
//! On a square of side `h` the basis function of the left edge is
//! `(1 - s, 0)` with `s = (x - x0) / h`, so the element mass matrix per
//! direction is `h² [1/3 1/6; 1/6 1/3]` and the divergence of an edge
//! function integrates to `±h` over its cell.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::distributions::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GeneratedProblem;
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::system::SaddleSystem;

/// Edge numbering of an `n x n` grid.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rt0Mesh {
    pub n: usize,
}

impl Rt0Mesh {
    /// Vertical edge at `x = k h`, row `j`.
    pub fn vertical(&self, k: usize, j: usize) -> usize {
        k * self.n + j
    }

    /// Horizontal edge at `y = l h`, column `i`.
    pub fn horizontal(&self, i: usize, l: usize) -> usize {
        (self.n + 1) * self.n + l * self.n + i
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn n_edges(&self) -> usize {
        2 * self.n * (self.n + 1)
    }
}

pub fn gen_mixed_poisson_rt0(n: usize, seed: u64) -> Result<GeneratedProblem> {
    if n < 2 {
        return Err(Error::Invalid(format!("mixed Poisson needs n >= 2 (got {n})")));
    }
    let mesh = Rt0Mesh { n };
    let h = 1.0 / n as f64;
    let h2 = h * h;
    let m = mesh.n_edges();
    let cells = n * n;

    let mut mt: Vec<(usize, usize, f64)> = Vec::with_capacity(8 * cells);
    let mut at: Vec<(usize, usize, f64)> = Vec::with_capacity(4 * cells);
    for j in 0..n {
        for i in 0..n {
            let c = mesh.cell(i, j);
            let pairs = [
                (mesh.vertical(i, j), mesh.vertical(i + 1, j)),
                (mesh.horizontal(i, j), mesh.horizontal(i, j + 1)),
            ];
            for (lo, hi) in pairs {
                mt.push((lo, lo, h2 / 3.0));
                mt.push((hi, hi, h2 / 3.0));
                mt.push((lo, hi, h2 / 6.0));
                mt.push((hi, lo, h2 / 6.0));
                at.push((lo, c, -h));
                at.push((hi, c, h));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r: Vec<f64> = (0..cells)
        .map(|_| {
            let f: f64 = Open01.sample(&mut rng);
            -f * h2
        })
        .collect();

    let m_mat = SparseMatrix::from_triplets(m, m, &mt)?;
    let a_mat = SparseMatrix::from_triplets(m, cells, &at)?;
    let system = SaddleSystem::new(m_mat, a_mat, 1.0, vec![0.0; m], r)?;
    Ok(GeneratedProblem {
        system,
        w_exact: None,
        p_exact: None,
        description: format!(
            "RT0 mixed Poisson on the unit square, {n} x {n} cells, {m} flux and {cells} pressure unknowns, seed {seed}"
        ),
        h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_and_interior_diagonal() {
        let p = gen_mixed_poisson_rt0(3, 1).unwrap();
        assert_eq!(p.system.primal_dim(), 24);
        assert_eq!(p.system.dual_dim(), 9);
        let mesh = Rt0Mesh { n: 3 };
        let h2 = 1.0 / 9.0;
        let interior = mesh.vertical(1, 0);
        assert!((p.system.m().get(interior, interior) - 2.0 * h2 / 3.0).abs() < 1e-15);
        let boundary = mesh.vertical(0, 0);
        assert!((p.system.m().get(boundary, boundary) - h2 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn forcing_is_in_range_and_seeded() {
        let a = gen_mixed_poisson_rt0(4, 7).unwrap();
        let b = gen_mixed_poisson_rt0(4, 7).unwrap();
        let c = gen_mixed_poisson_rt0(4, 8).unwrap();
        assert_eq!(a.system, b.system);
        assert_ne!(a.system.r(), c.system.r());
        let h2 = 1.0 / 16.0;
        assert!(a.system.r().iter().all(|&r| r < 0.0 && r > -h2));
    }
}
