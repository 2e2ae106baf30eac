//! Sampled price paths and their level-2 data.
//!
//! A [`SampledPath`] is a strictly increasing time grid `t_0 < ... < t_M`
//! (years) together with `M + 1` rows of `d` finite values. Between samples
//! the path is read as piecewise linear, which makes the Stratonovich
//! (geometric) lift of every segment explicit: the area of a linear chord
//! with increment `ΔX` is `½ ΔX ⊗ ΔX`.

use crate::error::{Error, Result};

/// Strictly increasing, finite sample times with at least three points.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 3 {
            return Err(Error::GridTooShort { points: times.len() });
        }
        for (i, t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::NonFiniteValue { row: i, col: 0 });
            }
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneGrid { index: i + 1 });
        }
        Ok(Self { times })
    }

    /// `steps + 1` equally spaced times on `[start, end]`.
    pub fn uniform(start: f64, end: f64, steps: usize) -> Result<Self> {
        let h = (end - start) / steps as f64;
        let mut times: Vec<f64> = (0..=steps).map(|i| start + h * i as f64).collect();
        if let Some(last) = times.last_mut() {
            *last = end;
        }
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of samples, `M + 1`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of steps `M`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn horizon(&self) -> f64 {
        self.end() - self.start()
    }
}

/// A discretely observed `d`-dimensional trajectory.
///
/// Values are stored row-major, one row of `dim` entries per sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: TimeGrid,
    values: Vec<f64>,
    dim: usize,
}

/// Validates raw samples and builds a [`SampledPath`].
pub fn validate_path(times: &[f64], values: &[Vec<f64>]) -> Result<SampledPath> {
    let grid = TimeGrid::new(times.to_vec())?;
    if values.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} value rows for {} sample times",
            values.len(),
            grid.len()
        )));
    }
    let dim = values[0].len();
    let mut flat = Vec::with_capacity(dim * values.len());
    for (i, row) in values.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "row {i} has {} columns, expected {dim}",
                row.len()
            )));
        }
        flat.extend_from_slice(row);
    }
    SampledPath::from_flat(grid, flat, dim)
}

impl SampledPath {
    pub fn new(times: &[f64], values: &[Vec<f64>]) -> Result<Self> {
        validate_path(times, values)
    }

    /// Builds a path from row-major values.
    pub fn from_flat(grid: TimeGrid, values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ShapeMismatch("path dimension must be >= 1".into()));
        }
        if values.len() != dim * grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not fill {} rows of dimension {dim}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: k / dim,
                col: k % dim,
            });
        }
        Ok(Self { grid, values, dim })
    }

    /// A one-dimensional path.
    pub fn from_series(times: &[f64], series: &[f64]) -> Result<Self> {
        Self::from_flat(TimeGrid::new(times.to_vec())?, series.to_vec(), 1)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples, `M + 1`.
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.grid.steps()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn value(&self, i: usize, coord: usize) -> f64 {
        self.values[i * self.dim + coord]
    }

    /// Values of one coordinate along the grid.
    pub fn coordinate(&self, coord: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i, coord)).collect()
    }

    /// The path `t ↦ (t, X_t)`: time is prepended as coordinate 0.
    pub fn time_augment(&self) -> SampledPath {
        let dim = self.dim + 1;
        let mut values = Vec::with_capacity(dim * self.len());
        for (i, t) in self.grid.times().iter().enumerate() {
            values.push(*t);
            values.extend_from_slice(self.row(i));
        }
        SampledPath {
            grid: self.grid.clone(),
            values,
            dim,
        }
    }

    /// Left-point increments `X_{t_{i+1}} - X_{t_i}`.
    pub fn increments(&self) -> Increments {
        let d = self.dim;
        let data = self
            .values
            .windows(2 * d)
            .step_by(d)
            .flat_map(|w| (0..d).map(move |c| w[d + c] - w[c]))
            .collect();
        Increments { data, dim: d }
    }

    /// Same grid, values replaced row by row. Used to build perturbed copies.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::from_flat(self.grid.clone(), values, self.dim)
    }
}

/// `M` rows of `d` increments.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    data: Vec<f64>,
    dim: usize,
}

impl Increments {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Cumulative quadratic variation `[X, X]` sampled on a grid.
///
/// `blocks[i]` is a row-major `d × d` matrix; `blocks[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticVariationPath {
    grid: TimeGrid,
    dim: usize,
    blocks: Vec<f64>,
}

/// Realized quadratic variation: cumulative sums of increment outer products.
pub fn realized_quadratic_variation(p: &SampledPath) -> QuadraticVariationPath {
    let d = p.dim();
    let inc = p.increments();
    let mut blocks = vec![0.0; d * d * p.len()];
    for (i, dx) in inc.rows().enumerate() {
        let (done, rest) = blocks.split_at_mut((i + 1) * d * d);
        let prev = &done[i * d * d..];
        let next = &mut rest[..d * d];
        for a in 0..d {
            for b in 0..d {
                next[a * d + b] = prev[a * d + b] + dx[a] * dx[b];
            }
        }
    }
    QuadraticVariationPath {
        grid: p.grid().clone(),
        dim: d,
        blocks,
    }
}

impl QuadraticVariationPath {
    /// Identically zero quadratic variation (a bounded-variation path).
    pub fn zero(grid: &TimeGrid, dim: usize) -> Self {
        Self {
            grid: grid.clone(),
            dim,
            blocks: vec![0.0; dim * dim * grid.len()],
        }
    }

    /// Externally supplied quadratic variation.
    ///
    /// Rejects a non-zero starting block, asymmetric blocks, and increments
    /// with an eigenvalue below `-1e-12` times the increment's scale.
    pub fn from_blocks(grid: TimeGrid, dim: usize, blocks: Vec<f64>) -> Result<Self> {
        if dim == 0 || blocks.len() != dim * dim * grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for {} blocks of size {dim}x{dim}",
                blocks.len(),
                grid.len()
            )));
        }
        if let Some(k) = blocks.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: k / (dim * dim),
                col: k % (dim * dim),
            });
        }
        if blocks[..dim * dim].iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidQuadraticVariation(
                "first block must be zero".into(),
            ));
        }
        let qv = Self { grid, dim, blocks };
        for i in 0..qv.grid.steps() {
            let inc = qv.increment(i);
            let scale = inc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for a in 0..dim {
                for b in 0..a {
                    if (inc[a * dim + b] - inc[b * dim + a]).abs() > 1e-12 * scale {
                        return Err(Error::InvalidQuadraticVariation(format!(
                            "increment {i} is not symmetric"
                        )));
                    }
                }
            }
            if min_symmetric_eigenvalue(&inc, dim) < -1e-12 * scale {
                return Err(Error::InvalidQuadraticVariation(format!(
                    "increment {i} is not positive semi-definite"
                )));
            }
        }
        Ok(qv)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self, i: usize) -> &[f64] {
        let s = self.dim * self.dim;
        &self.blocks[i * s..(i + 1) * s]
    }

    /// `blocks[i + 1] - blocks[i]`.
    pub fn increment(&self, i: usize) -> Vec<f64> {
        self.block(i + 1)
            .iter()
            .zip(self.block(i))
            .map(|(b, a)| b - a)
            .collect()
    }

    pub fn terminal(&self) -> &[f64] {
        self.block(self.grid.steps())
    }
}

/// Smallest eigenvalue of a row-major symmetric `dim × dim` matrix.
pub fn min_symmetric_eigenvalue(m: &[f64], dim: usize) -> f64 {
    let mat = nalgebra::DMatrix::from_row_slice(dim, dim, m);
    mat.symmetric_eigenvalues().min()
}

/// Per-step level-2 data of the lead-lag lift.
///
/// For each step the `2d × 2d` block matrix is
///
/// ```text
/// | A          A - ½Q |
/// | A + ½Q     A      |
/// ```
///
/// where `A` is the Stratonovich area of the step and `Q` its quadratic
/// variation increment. The off-diagonal blocks are the Itô level-2 term and
/// its mirror.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadLagBlocks {
    dim: usize,
    area: Vec<f64>,
    qv: QuadraticVariationPath,
    blocks: Vec<f64>,
}

/// Lead-lag level-2 blocks with realized quadratic variation.
pub fn lead_lag_level2(p: &SampledPath) -> LeadLagBlocks {
    lead_lag_with_qv(p, realized_quadratic_variation(p))
        .expect("realized quadratic variation always matches its path")
}

/// Lead-lag level-2 blocks with a supplied quadratic variation.
pub fn lead_lag_with_qv(p: &SampledPath, qv: QuadraticVariationPath) -> Result<LeadLagBlocks> {
    if qv.grid() != p.grid() {
        return Err(Error::QvGridMismatch);
    }
    if qv.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: qv.dim(),
        });
    }
    let d = p.dim();
    let w = 2 * d;
    let steps = p.steps();
    let inc = p.increments();
    let mut area = Vec::with_capacity(steps * d * d);
    let mut blocks = vec![0.0; steps * w * w];
    for (i, dx) in inc.rows().enumerate() {
        let q = qv.increment(i);
        let blk = &mut blocks[i * w * w..(i + 1) * w * w];
        for a in 0..d {
            for b in 0..d {
                let ar = 0.5 * dx[a] * dx[b];
                let half_q = 0.5 * q[a * d + b];
                area.push(ar);
                blk[a * w + b] = ar;
                blk[a * w + d + b] = ar - half_q;
                blk[(d + a) * w + b] = ar + half_q;
                blk[(d + a) * w + d + b] = ar;
            }
        }
    }
    Ok(LeadLagBlocks {
        dim: d,
        area,
        qv,
        blocks,
    })
}

impl LeadLagBlocks {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> usize {
        self.area.len() / (self.dim * self.dim)
    }

    /// Stratonovich area `𝕏` of step `i`, row-major `d × d`.
    pub fn area(&self, i: usize) -> &[f64] {
        let s = self.dim * self.dim;
        &self.area[i * s..(i + 1) * s]
    }

    pub fn qv(&self) -> &QuadraticVariationPath {
        &self.qv
    }

    /// Full `2d × 2d` level-2 block of step `i`, row-major.
    pub fn block(&self, i: usize) -> &[f64] {
        let w = 2 * self.dim;
        &self.blocks[i * w * w..(i + 1) * w * w]
    }

    fn sub_block(&self, i: usize, row_off: usize, col_off: usize) -> Vec<f64> {
        let d = self.dim;
        let w = 2 * d;
        let blk = self.block(i);
        (0..d)
            .flat_map(|a| (0..d).map(move |b| (a, b)))
            .map(|(a, b)| blk[(row_off + a) * w + col_off + b])
            .collect()
    }

    pub fn upper_left(&self, i: usize) -> Vec<f64> {
        self.sub_block(i, 0, 0)
    }

    pub fn upper_right(&self, i: usize) -> Vec<f64> {
        self.sub_block(i, 0, self.dim)
    }

    pub fn lower_left(&self, i: usize) -> Vec<f64> {
        self.sub_block(i, self.dim, 0)
    }

    pub fn lower_right(&self, i: usize) -> Vec<f64> {
        self.sub_block(i, self.dim, self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_path() -> SampledPath {
        validate_path(&[0.0, 0.5, 1.0], &[vec![1.0], vec![1.0], vec![1.0]]).unwrap()
    }

    #[test]
    fn validate_accepts_constant_path() {
        let p = constant_path();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.steps(), 2);
    }

    #[test]
    fn validate_rejects_repeated_time() {
        let err = validate_path(&[0.0, 0.0, 1.0], &[vec![1.0], vec![2.0], vec![3.0]]).unwrap_err();
        assert!(matches!(err, Error::NonMonotoneGrid { index: 1 }));
    }

    #[test]
    fn validate_two_dimensional_path() {
        let times = [0.0, 0.25, 0.5, 0.75, 1.0];
        let values: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, -(i as f64)]).collect();
        let p = validate_path(&times, &values).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.len(), 5);
    }

    #[test]
    fn validate_rejects_bad_shapes_and_values() {
        assert!(matches!(
            validate_path(&[0.0, 0.5, 1.0], &[vec![1.0], vec![1.0]]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            validate_path(&[0.0, 0.5, 1.0], &[vec![1.0], vec![1.0, 2.0], vec![1.0]]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            validate_path(&[0.0, 0.5, 1.0], &[vec![1.0], vec![f64::NAN], vec![1.0]]),
            Err(Error::NonFiniteValue { row: 1, col: 0 })
        ));
        assert!(matches!(
            validate_path(&[0.0, 1.0], &[vec![1.0], vec![1.0]]),
            Err(Error::GridTooShort { points: 2 })
        ));
        assert!(matches!(
            validate_path(&[0.0, f64::INFINITY, 1.0], &[vec![1.0], vec![1.0], vec![1.0]]),
            Err(Error::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn zero_length_increments_are_allowed() {
        let p = validate_path(&[0.0, 0.1, 0.2], &[vec![2.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!(p.increments().row(0), &[0.0]);
    }

    #[test]
    fn time_augment_prepends_grid() {
        let p = constant_path().time_augment();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.coordinate(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(p.coordinate(1), vec![1.0, 1.0, 1.0]);

        let twice = p.time_augment();
        assert_eq!(twice.coordinate(0), twice.coordinate(1));
        assert!(twice.coordinate(0).windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn time_augment_keeps_grid_for_wide_paths() {
        let grid = TimeGrid::uniform(0.0, 1.0, 120).unwrap();
        let p = SampledPath::from_flat(grid.clone(), vec![0.5; 121 * 2], 2).unwrap();
        let a = p.time_augment();
        assert_eq!(a.dim(), 3);
        assert_eq!(a.grid(), &grid);
    }

    #[test]
    fn increments_arithmetic() {
        let p = SampledPath::from_series(&[0.0, 1.0, 2.0], &[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(p.increments().as_slice(), &[1.0, 2.0]);
        assert!(constant_path().increments().as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn realized_qv_of_linear_path() {
        let m = 8;
        let grid = TimeGrid::uniform(0.0, 1.0, m).unwrap();
        let vals = grid.times().to_vec();
        let p = SampledPath::from_flat(grid, vals, 1).unwrap();
        let qv = realized_quadratic_variation(&p);
        assert_eq!(qv.block(0), &[0.0]);
        assert!((qv.terminal()[0] - 1.0 / m as f64).abs() < 1e-15);
        let flat = realized_quadratic_variation(&constant_path());
        assert!(flat.terminal().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn external_qv_validation() {
        let grid = TimeGrid::uniform(0.0, 1.0, 2).unwrap();
        assert!(QuadraticVariationPath::from_blocks(grid.clone(), 1, vec![0.0, 1.0, 2.0]).is_ok());
        assert!(matches!(
            QuadraticVariationPath::from_blocks(grid.clone(), 1, vec![1.0, 1.0, 2.0]),
            Err(Error::InvalidQuadraticVariation(_))
        ));
        assert!(matches!(
            QuadraticVariationPath::from_blocks(grid, 1, vec![0.0, 1.0, 0.5]),
            Err(Error::InvalidQuadraticVariation(_))
        ));
    }

    #[test]
    fn lead_lag_single_step() {
        // ΔX = 1, Δ[X,X] = 1 gives [[½, 0], [1, ½]].
        let p = SampledPath::from_series(&[0.0, 0.5, 1.0], &[0.0, 1.0, 1.0]).unwrap();
        let ll = lead_lag_level2(&p);
        assert_eq!(ll.block(0), &[0.5, 0.0, 1.0, 0.5]);
        assert_eq!(ll.block(1), &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn lead_lag_of_constant_path_vanishes() {
        let ll = lead_lag_level2(&constant_path());
        for i in 0..ll.steps() {
            assert!(ll.block(i).iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn lead_lag_rejects_foreign_qv() {
        let p = constant_path();
        let other = TimeGrid::uniform(0.0, 2.0, 2).unwrap();
        assert!(matches!(
            lead_lag_with_qv(&p, QuadraticVariationPath::zero(&other, 1)),
            Err(Error::QvGridMismatch)
        ));
    }
}
