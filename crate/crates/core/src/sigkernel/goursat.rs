//! Stratonovich signature kernel via the Goursat problem
//! `k(s,t) = 1 + ∫∫ k(σ,τ) ⟨dx_σ, dy_τ⟩` with `k ≡ 1` on both boundaries.

use std::io::Write;

use crate::error::{Error, Result};
use crate::paths::{SampledPath, TimeGrid};

/// Kernel values beyond this magnitude are reported as overflow.
pub(crate) const KERNEL_LIMIT: f64 = 1e300;

/// Signature-kernel values `k(x|[0,s_i], y|[0,t_j])` on the sample grids.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    grid_x: TimeGrid,
    grid_y: TimeGrid,
    values: Vec<f64>,
    refinement: usize,
}

impl KernelGrid {
    pub(crate) fn from_parts(
        grid_x: TimeGrid,
        grid_y: TimeGrid,
        values: Vec<f64>,
        refinement: usize,
    ) -> Self {
        debug_assert_eq!(values.len(), grid_x.len() * grid_y.len());
        Self {
            grid_x,
            grid_y,
            values,
            refinement,
        }
    }

    pub fn grid_x(&self) -> &TimeGrid {
        &self.grid_x
    }

    pub fn grid_y(&self) -> &TimeGrid {
        &self.grid_y
    }

    pub fn refinement(&self) -> usize {
        self.refinement
    }

    pub fn rows(&self) -> usize {
        self.grid_x.len()
    }

    pub fn cols(&self) -> usize {
        self.grid_y.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Kernel of the two full paths.
    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Debug dump: one CSV line per row `i`, column `j` across.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.rows() {
            let line: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn check_refinement(refinement: usize) -> Result<()> {
    if refinement == 0 {
        Err(Error::InvalidRefinement(refinement))
    } else {
        Ok(())
    }
}

pub(crate) fn check_dims(x: &SampledPath, y: &SampledPath) -> Result<()> {
    if x.dim() != y.dim() {
        Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        })
    } else {
        Ok(())
    }
}

/// `½⟨Δx_a, Δy_b⟩ / r²` for every pair of sample steps, row-major.
///
/// Each sample step is split into `r` equal sub-steps, so every fine cell
/// inside coarse cell `(a, b)` shares this coefficient.
pub(crate) fn half_inner_products(x: &SampledPath, y: &SampledPath, refinement: usize) -> Vec<f64> {
    let dx = x.increments();
    let dy = y.increments();
    let r2 = (refinement * refinement) as f64;
    let mut out = Vec::with_capacity(dx.len() * dy.len());
    for a in dx.rows() {
        for b in dy.rows() {
            let ip: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
            out.push(0.5 * (ip / r2));
        }
    }
    out
}

/// Stratonovich signature kernel of two (already time-augmented, if wanted)
/// paths on the product of their sample grids.
///
/// Every sample step is subdivided into `refinement` equal pieces and the
/// explicit corner update
///
/// ```text
/// k(i+1,j+1) = k(i+1,j) + k(i,j+1) - k(i,j) + ½⟨Δx,Δy⟩ (k(i+1,j) + k(i,j+1))
/// ```
///
/// is swept row by row. Only the rows and columns at the original sample
/// times are kept: the value at a corner depends on the paths up to that
/// corner alone, so entry `(i, j)` is the kernel of the prefixes
/// `x|[0,s_i]` and `y|[0,t_j]`.
///
/// The update is written so that swapping `x` and `y` gives the transposed
/// grid bit for bit.
pub fn strat_kernel_grid(x: &SampledPath, y: &SampledPath, refinement: usize) -> Result<KernelGrid> {
    check_dims(x, y)?;
    check_refinement(refinement)?;
    let coeff = half_inner_products(x, y, refinement);
    let values = sweep(&coeff, x.steps(), y.steps(), refinement)?;
    Ok(KernelGrid::from_parts(
        x.grid().clone(),
        y.grid().clone(),
        values,
        refinement,
    ))
}

fn sweep(coeff: &[f64], mx: usize, my: usize, r: usize) -> Result<Vec<f64>> {
    let cols = my + 1;
    let fine_cols = my * r + 1;
    let mut out = vec![1.0; (mx + 1) * cols];
    let mut prev = vec![1.0; fine_cols];
    let mut cur = vec![1.0; fine_cols];
    for fi in 0..mx * r {
        let crow = &coeff[(fi / r) * my..(fi / r + 1) * my];
        cur[0] = 1.0;
        for (b, h) in crow.iter().enumerate() {
            for fj in b * r..(b + 1) * r {
                let s = cur[fj] + prev[fj + 1];
                cur[fj + 1] = s - prev[fj] + h * s;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
        if (fi + 1) % r == 0 {
            let i = (fi + 1) / r;
            let dst = &mut out[i * cols..(i + 1) * cols];
            for (j, v) in dst.iter_mut().enumerate() {
                *v = prev[j * r];
            }
            if dst.iter().any(|v| !(v.abs() <= KERNEL_LIMIT)) {
                return Err(Error::NonFiniteKernel);
            }
        }
    }
    Ok(out)
}
