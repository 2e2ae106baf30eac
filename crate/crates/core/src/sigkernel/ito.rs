//! Itô signature kernel from Stratonovich data.
//!
//! The kernel `K` is coupled to two `d`-vector fields `G` and `F`:
//!
//! ```text
//! G(s,t) = ∫∫ K d[Y,Y]ᵀ ∘dX  - ½ ∫_0^t d[Y,Y]ᵀ F(s,τ)
//! F(s,t) = ∫∫ K d[X,X]ᵀ ∘dY  - ½ ∫_0^s d[X,X]ᵀ G(σ,t)
//! K(s,t) = 1 + ∫∫ K (⟨∘dX, ∘dY⟩ + ¼ Tr(d[X,X]ᵀ d[Y,Y]))
//!            - ½ ∫_0^s ⟨G(σ,t), ∘dX_σ⟩ - ½ ∫_0^t ⟨F(s,τ), ∘dY_τ⟩
//! ```
//!
//! Each field is advanced with the Goursat corner combination
//! `Q(n+1,m+1) = Q(n,m+1) + Q(n+1,m) - Q(n,m) + cell terms`. The cell terms
//! that involve differences of `G` across a row or `F` across a column use
//! the trapezoidal average of the two cell edges; the unknown far edge comes
//! from an explicit predictor step. With zero quadratic variation `G` and
//! `F` stay zero and the `K` update reduces to the Stratonovich one exactly.

use crate::error::{Error, Result};
use crate::paths::{QuadraticVariationPath, SampledPath};

use super::goursat::{check_dims, check_refinement, half_inner_products, KernelGrid, KERNEL_LIMIT};

/// The Itô kernel together with its auxiliary fields, on the sample grids.
#[derive(Debug, Clone, PartialEq)]
pub struct ItoKernelGrids {
    pub k: KernelGrid,
    dim: usize,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl ItoKernelGrids {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `F(s_i, t_j)`.
    pub fn f(&self, i: usize, j: usize) -> &[f64] {
        let o = (i * self.k.cols() + j) * self.dim;
        &self.f[o..o + self.dim]
    }

    /// `G(s_i, t_j)`.
    pub fn g(&self, i: usize, j: usize) -> &[f64] {
        let o = (i * self.k.cols() + j) * self.dim;
        &self.g[o..o + self.dim]
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g
    }
}

fn check_qv(p: &SampledPath, qv: &QuadraticVariationPath) -> Result<()> {
    if qv.grid() != p.grid() {
        return Err(Error::QvGridMismatch);
    }
    if qv.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: qv.dim(),
        });
    }
    Ok(())
}

/// Per-step chord increments and quadratic-variation increments, each
/// divided by the refinement factor.
fn fine_steps(p: &SampledPath, qv: &QuadraticVariationPath, r: f64) -> (Vec<f64>, Vec<f64>) {
    let inc: Vec<f64> = p.increments().as_slice().iter().map(|v| v / r).collect();
    let dq: Vec<f64> = (0..p.steps())
        .flat_map(|i| qv.increment(i))
        .map(|v| v / r)
        .collect();
    (inc, dq)
}

/// Itô signature kernel of `x` and `y` given their quadratic variations.
///
/// Stratonovich differentials are the chord increments of the samples,
/// quadratic-variation differentials the block increments; both are spread
/// evenly over `refinement` sub-steps per sample step.
pub fn ito_kernel_grid(
    x: &SampledPath,
    y: &SampledPath,
    qv_x: &QuadraticVariationPath,
    qv_y: &QuadraticVariationPath,
    refinement: usize,
) -> Result<ItoKernelGrids> {
    check_dims(x, y)?;
    check_refinement(refinement)?;
    check_qv(x, qv_x)?;
    check_qv(y, qv_y)?;

    let d = x.dim();
    let r = refinement;
    let (mx, my) = (x.steps(), y.steps());
    let rf = r as f64;
    let half_ip = half_inner_products(x, y, r);
    let (ax, qa) = fine_steps(x, qv_x, rf);
    let (by, qb) = fine_steps(y, qv_y, rf);

    // ⅛ Tr(Aᵀ B) per coarse cell, so that `trace_term * s = kav · ¼ Tr(AᵀB)`.
    let mut trace_term = vec![0.0; mx * my];
    for a in 0..mx {
        let am = &qa[a * d * d..(a + 1) * d * d];
        for b in 0..my {
            let bm = &qb[b * d * d..(b + 1) * d * d];
            let tr: f64 = am.iter().zip(bm).map(|(u, v)| u * v).sum();
            trace_term[a * my + b] = 0.125 * tr;
        }
    }

    let cols = my + 1;
    let fc = my * r + 1;
    let mut k_out = vec![1.0; (mx + 1) * cols];
    let mut g_out = vec![0.0; (mx + 1) * cols * d];
    let mut f_out = vec![0.0; (mx + 1) * cols * d];

    let mut kp = vec![1.0; fc];
    let mut kc = vec![1.0; fc];
    let mut gp = vec![0.0; fc * d];
    let mut gc = vec![0.0; fc * d];
    let mut fp = vec![0.0; fc * d];
    let mut fcur = vec![0.0; fc * d];

    let mut dgt0 = vec![0.0; d];
    let mut dfs0 = vec![0.0; d];
    let mut dgt = vec![0.0; d];
    let mut dfs = vec![0.0; d];
    let mut g_pred = vec![0.0; d];
    let mut f_pred = vec![0.0; d];
    let mut bta = vec![0.0; d];
    let mut atb = vec![0.0; d];

    for fi in 0..mx * r {
        let ci = fi / r;
        let a = &ax[ci * d..(ci + 1) * d];
        let am = &qa[ci * d * d..(ci + 1) * d * d];
        kc[0] = 1.0;
        gc[..d].iter_mut().for_each(|v| *v = 0.0);
        fcur[..d].iter_mut().for_each(|v| *v = 0.0);
        for fj in 0..my * r {
            let cj = fj / r;
            let b = &by[cj * d..(cj + 1) * d];
            let bm = &qb[cj * d * d..(cj + 1) * d * d];
            let h = half_ip[ci * my + cj];
            let q = trace_term[ci * my + cj];

            let k00 = kp[fj];
            let s = kc[fj] + kp[fj + 1];
            let kav = 0.5 * s;
            let base = s - k00 + h * s + q * s;

            let (o0, o1) = (fj * d, (fj + 1) * d);
            for c in 0..d {
                dgt0[c] = gp[o1 + c] - gp[o0 + c];
                dfs0[c] = fcur[o0 + c] - fp[o0 + c];
                bta[c] = (0..d).map(|m| bm[m * d + c] * a[m]).sum();
                atb[c] = (0..d).map(|m| am[m * d + c] * b[m]).sum();
            }

            // predictor
            for c in 0..d {
                let bt_df: f64 = (0..d).map(|m| bm[m * d + c] * dfs0[m]).sum();
                let at_dg: f64 = (0..d).map(|m| am[m * d + c] * dgt0[m]).sum();
                g_pred[c] = gc[o0 + c] + gp[o1 + c] - gp[o0 + c] + kav * bta[c] - 0.5 * bt_df;
                f_pred[c] = fcur[o0 + c] + fp[o1 + c] - fp[o0 + c] + kav * atb[c] - 0.5 * at_dg;
            }
            // trapezoidal edge differences
            for c in 0..d {
                dgt[c] = 0.5 * (dgt0[c] + (g_pred[c] - gc[o0 + c]));
                dfs[c] = 0.5 * (dfs0[c] + (f_pred[c] - fp[o1 + c]));
            }

            let g_corr: f64 = dgt.iter().zip(a).map(|(u, v)| u * v).sum();
            let f_corr: f64 = dfs.iter().zip(b).map(|(u, v)| u * v).sum();
            kc[fj + 1] = base - 0.5 * g_corr - 0.5 * f_corr;
            for c in 0..d {
                let bt_df: f64 = (0..d).map(|m| bm[m * d + c] * dfs[m]).sum();
                let at_dg: f64 = (0..d).map(|m| am[m * d + c] * dgt[m]).sum();
                gc[o1 + c] = gc[o0 + c] + gp[o1 + c] - gp[o0 + c] + kav * bta[c] - 0.5 * bt_df;
                fcur[o1 + c] = fcur[o0 + c] + fp[o1 + c] - fp[o0 + c] + kav * atb[c] - 0.5 * at_dg;
            }
        }
        std::mem::swap(&mut kp, &mut kc);
        std::mem::swap(&mut gp, &mut gc);
        std::mem::swap(&mut fp, &mut fcur);

        if (fi + 1) % r == 0 {
            let i = (fi + 1) / r;
            for j in 0..cols {
                let v = kp[j * r];
                if !(v.abs() <= KERNEL_LIMIT) {
                    return Err(Error::NonFiniteKernel);
                }
                k_out[i * cols + j] = v;
                let dst = (i * cols + j) * d;
                g_out[dst..dst + d].copy_from_slice(&gp[j * r * d..(j * r + 1) * d]);
                f_out[dst..dst + d].copy_from_slice(&fp[j * r * d..(j * r + 1) * d]);
            }
        }
    }

    Ok(ItoKernelGrids {
        k: KernelGrid::from_parts(x.grid().clone(), y.grid().clone(), k_out, r),
        dim: d,
        f: f_out,
        g: g_out,
    })
}
