//! The hedging kernel `𝒦_Φ` and the evaluation map `Γ`.
//!
//! Both integrate the Stratonovich signature kernel of the time-augmented
//! paths against left-point (Itô) increments of the raw price coordinates:
//!
//! ```text
//! 𝒦_Φ(x, y)      = Σ_i Σ_j k(x̂|[0,t_i], ŷ|[0,s_j]) ⟨Δx_i, Δy_j⟩
//! Γ(q|[0,s])_{c,j} = Σ_t   k(q̂|[0,s], x̂_j|[0,t]) Δ(x_j)^c_t
//! ```
//!
//! Time enters the kernel arguments only, never the integrators: the hedge
//! holds `d` assets.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::paths::{Increments, SampledPath};
use crate::sigkernel::strat_kernel_grid;

struct Prepared {
    augmented: SampledPath,
    increments: Increments,
}

impl Prepared {
    fn new(p: &SampledPath) -> Self {
        Self {
            augmented: p.time_augment(),
            increments: p.increments(),
        }
    }
}

fn check_same_dim(expected: usize, p: &SampledPath) -> Result<()> {
    if p.dim() != expected {
        Err(Error::DimensionMismatch {
            expected,
            found: p.dim(),
        })
    } else {
        Ok(())
    }
}

fn double_sum(x: &Prepared, y: &Prepared, refinement: usize) -> Result<f64> {
    let grid = strat_kernel_grid(&x.augmented, &y.augmented, refinement)?;
    let mut acc = 0.0;
    for (i, dx) in x.increments.rows().enumerate() {
        let row = grid.row(i);
        for (j, dy) in y.increments.rows().enumerate() {
            let ip: f64 = dx.iter().zip(dy).map(|(a, b)| a * b).sum();
            acc += row[j] * ip;
        }
    }
    Ok(acc)
}

/// One entry of the hedging Gram matrix, `𝒦_Φ(x, y)`.
pub fn gram_entry(x: &SampledPath, y: &SampledPath, refinement: usize) -> Result<f64> {
    check_same_dim(x.dim(), y)?;
    double_sum(&Prepared::new(x), &Prepared::new(y), refinement)
}

/// `𝒦_Φ` over a training set, with identifiers for CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    path_ids: Vec<String>,
}

pub(crate) fn default_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("path_{i:04}")).collect()
}

/// Gram matrix of `train` (not divided by `n`). Entries above the diagonal
/// are computed in parallel and mirrored.
pub fn gram_matrix(train: &[SampledPath], refinement: usize) -> Result<GramMatrix> {
    gram_matrix_with_ids(train, default_ids(train.len()), refinement)
}

pub fn gram_matrix_with_ids(
    train: &[SampledPath],
    path_ids: Vec<String>,
    refinement: usize,
) -> Result<GramMatrix> {
    let n = train.len();
    if n == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if path_ids.len() != n {
        return Err(Error::SizeMismatch(format!(
            "{} ids for {n} paths",
            path_ids.len()
        )));
    }
    let d = train[0].dim();
    for p in train {
        check_same_dim(d, p)?;
    }
    let prepared: Vec<Prepared> = train.iter().map(Prepared::new).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let values = pairs
        .par_iter()
        .map(|&(a, b)| double_sum(&prepared[a], &prepared[b], refinement))
        .collect::<Result<Vec<f64>>>()?;
    let mut entries = DMatrix::zeros(n, n);
    for (&(a, b), v) in pairs.iter().zip(values) {
        entries[(a, b)] = v;
        entries[(b, a)] = v;
    }
    Ok(GramMatrix { entries, path_ids })
}

impl GramMatrix {
    pub fn from_entries(entries: DMatrix<f64>, path_ids: Vec<String>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() != path_ids.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} Gram matrix with {} ids",
                entries.nrows(),
                entries.ncols(),
                path_ids.len()
            )));
        }
        Ok(Self { entries, path_ids })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[(a, b)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn path_ids(&self) -> &[String] {
        &self.path_ids
    }

    /// Leading `k × k` block, i.e. the Gram matrix of the first `k` paths.
    pub fn leading(&self, k: usize) -> GramMatrix {
        GramMatrix {
            entries: self.entries.view((0, 0), (k, k)).into_owned(),
            path_ids: self.path_ids[..k].to_vec(),
        }
    }

    /// `max |G_ab - G_ba| / max |G_ab|` (0 for the zero matrix).
    pub fn relative_asymmetry(&self) -> f64 {
        let scale = self.entries.amax();
        if scale == 0.0 {
            return 0.0;
        }
        let diff = (&self.entries - self.entries.transpose()).amax();
        diff / scale
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// `Γ(q|[0,s])` at one evaluation index: a `d × n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSlice {
    index: usize,
    dim: usize,
    n: usize,
    values: Vec<f64>,
}

impl GammaSlice {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(coordinate, training path)`.
    pub fn get(&self, coord: usize, j: usize) -> f64 {
        self.values[coord * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Γ β`, a vector in `ℝ^d`.
    pub fn apply(&self, beta: &[f64]) -> Vec<f64> {
        self.values
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(beta).map(|(g, b)| g * b).sum())
            .collect()
    }
}

/// `Γ` at every sample index of the query, from one kernel solve per
/// training path.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTable {
    dim: usize,
    n: usize,
    rows: usize,
    values: Vec<f64>,
}

impl GammaTable {
    /// Number of evaluation indices (`M + 1` of the query).
    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn slice(&self, index: usize) -> Result<GammaSlice> {
        if index >= self.rows {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.rows,
            });
        }
        let w = self.dim * self.n;
        Ok(GammaSlice {
            index,
            dim: self.dim,
            n: self.n,
            values: self.values[index * w..(index + 1) * w].to_vec(),
        })
    }
}

/// `Γ(query|[0,s])` for all `s`.
///
/// Row `s` of the kernel grid between the query and training path `j` is
/// the kernel of the frozen query prefix against every prefix of `x_j`; it
/// is integrated over the whole training horizon.
pub fn gamma_table(query: &SampledPath, train: &[SampledPath], refinement: usize) -> Result<GammaTable> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let d = query.dim();
    for p in train {
        check_same_dim(d, p)?;
    }
    let q_aug = query.time_augment();
    let rows = query.len();
    let n = train.len();
    let per_path = train
        .par_iter()
        .map(|x| {
            let grid = strat_kernel_grid(&q_aug, &x.time_augment(), refinement)?;
            let inc = x.increments();
            let mut out = vec![0.0; rows * d];
            for s in 0..rows {
                let krow = grid.row(s);
                for c in 0..d {
                    let mut acc = 0.0;
                    for (t, dx) in inc.rows().enumerate() {
                        acc += krow[t] * dx[c];
                    }
                    out[s * d + c] = acc;
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut values = vec![0.0; rows * d * n];
    for (j, col) in per_path.iter().enumerate() {
        for s in 0..rows {
            for c in 0..d {
                values[(s * d + c) * n + j] = col[s * d + c];
            }
        }
    }
    Ok(GammaTable {
        dim: d,
        n,
        rows,
        values,
    })
}

/// `Γ(query|[0, s_{up_to}])`.
pub fn gamma_slice(
    query: &SampledPath,
    up_to: usize,
    train: &[SampledPath],
    refinement: usize,
) -> Result<GammaSlice> {
    if up_to >= query.len() {
        return Err(Error::IndexOutOfRange {
            index: up_to,
            len: query.len(),
        });
    }
    gamma_table(query, train, refinement)?.slice(up_to)
}
