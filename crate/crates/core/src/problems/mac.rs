//! Staggered-grid (MAC) Stokes flow in the channel `[-1, L] x [-1, 1]`.
//!
//! Horizontal velocities live on vertical cell faces, vertical velocities on
//! horizontal faces, pressures at cell centers. The equations are integrated
//! over the control volume of each unknown, which keeps `M` symmetric:
//!
//! * inflow `x = -1`: Dirichlet Poiseuille profile `u_x = 1 - y^2`, `u_y = 0`;
//! * walls `y = ±1`: no slip;
//! * outflow `x = L`: zero traction, so the outflow faces carry a half
//!   control volume and no pressure to the right.
//!
//! The continuous solution is `u_x = 1 - y^2`, `u_y = 0`, `p = 2 (L - x)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::GeneratedProblem;
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::system::SaddleSystem;

fn inflow(y: f64) -> f64 {
    1.0 - y * y
}

pub fn gen_mac_stokes_channel(nx: usize, ny: usize, length: f64) -> Result<GeneratedProblem> {
    if nx < 4 || ny < 4 {
        return Err(Error::Invalid(format!(
            "MAC channel needs nx, ny >= 4 (got nx = {nx}, ny = {ny})"
        )));
    }
    if !(length > -1.0 && length.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "length",
            value: length,
            reason: "the channel end must lie right of x = -1",
        });
    }
    let hx = (length + 1.0) / nx as f64;
    let hy = 2.0 / ny as f64;
    let y_center = |j: usize| -1.0 + (j as f64 + 0.5) * hy;
    let x_center = |i: usize| -1.0 + (i as f64 + 0.5) * hx;

    let n_ux = nx * ny;
    let n_uy = nx * (ny - 1);
    let m = n_ux + n_uy;
    let n = nx * ny;
    // ux on face i = 1..=nx, row j
    let iu = |i: usize, j: usize| (i - 1) * ny + j;
    // uy on face j = 1..ny-1, column i
    let iv = |i: usize, j: usize| n_ux + i * (ny - 1) + (j - 1);
    let cell = |i: usize, j: usize| i * ny + j;

    let mut mt: Vec<(usize, usize, f64)> = Vec::new();
    let mut at: Vec<(usize, usize, f64)> = Vec::new();
    let mut g = vec![0.0; m];
    let mut r = vec![0.0; n];

    let cx = hy / hx;
    let cy = hx / hy;

    for i in 1..=nx {
        let outflow = i == nx;
        // width of the control volume in x
        let wx = if outflow { 0.5 * hx } else { hx };
        let cyw = wx / hy;
        for j in 0..ny {
            let row = iu(i, j);
            let mut diag = 0.0;
            // x-neighbors
            if i == 1 {
                diag += cx;
                g[row] += cx * inflow(y_center(j));
            } else {
                diag += cx;
                mt.push((row, iu(i - 1, j), -cx));
            }
            if !outflow {
                diag += cx;
                mt.push((row, iu(i + 1, j), -cx));
            }
            // y-neighbors, walls at half a cell distance
            if j == 0 {
                diag += 2.0 * cyw;
            } else {
                diag += cyw;
                mt.push((row, iu(i, j - 1), -cyw));
            }
            if j == ny - 1 {
                diag += 2.0 * cyw;
            } else {
                diag += cyw;
                mt.push((row, iu(i, j + 1), -cyw));
            }
            mt.push((row, row, diag));

            at.push((row, cell(i - 1, j), -hy));
            if !outflow {
                at.push((row, cell(i, j), hy));
            }
        }
    }

    for i in 0..nx {
        for j in 1..ny {
            let row = iv(i, j);
            let mut diag = 0.0;
            if i == 0 {
                diag += 2.0 * cx;
            } else {
                diag += cx;
                mt.push((row, iv(i - 1, j), -cx));
            }
            if i + 1 < nx {
                diag += cx;
                mt.push((row, iv(i + 1, j), -cx));
            }
            diag += 2.0 * cy;
            if j > 1 {
                mt.push((row, iv(i, j - 1), -cy));
            }
            if j + 1 < ny {
                mt.push((row, iv(i, j + 1), -cy));
            }
            mt.push((row, row, diag));

            at.push((row, cell(i, j - 1), -hx));
            at.push((row, cell(i, j), hx));
        }
    }

    // inflow flux enters the divergence of the first cell column
    for j in 0..ny {
        r[cell(0, j)] = -hy * inflow(y_center(j));
    }

    let m_mat = SparseMatrix::from_triplets(m, m, &mt)?;
    let a_mat = SparseMatrix::from_triplets(m, n, &at)?;
    let system = SaddleSystem::new(m_mat, a_mat, 1.0, g, r)?;

    let mut w_exact = vec![0.0; m];
    for i in 1..=nx {
        for j in 0..ny {
            w_exact[iu(i, j)] = inflow(y_center(j));
        }
    }
    let mut p_exact = vec![0.0; n];
    for i in 0..nx {
        for j in 0..ny {
            p_exact[cell(i, j)] = 2.0 * (length - x_center(i));
        }
    }
    Ok(GeneratedProblem {
        system,
        w_exact: Some(w_exact),
        p_exact: Some(p_exact),
        description: format!(
            "MAC Stokes channel [-1, {length}] x [-1, 1], {nx} x {ny} cells, {m} velocity and {n} pressure unknowns"
        ),
        h: hx.max(hy),
    })
}
