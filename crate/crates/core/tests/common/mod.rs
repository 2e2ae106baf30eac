#![allow(dead_code)]

//! Test-only references: a small truncated tensor algebra kept separate from
//! the library's signature code, plus random path generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sighedge_core::{QuadraticVariationPath, SampledPath, TimeGrid};

/// Element of the truncated tensor algebra over `ℝ^dim`, level `k` stored
/// flat in base-`dim` word order.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub dim: usize,
    pub levels: Vec<Vec<f64>>,
}

impl Tensor {
    pub fn zero(dim: usize, depth: usize) -> Self {
        Self {
            dim,
            levels: (0..=depth).map(|k| vec![0.0; dim.pow(k as u32)]).collect(),
        }
    }

    pub fn one(dim: usize, depth: usize) -> Self {
        let mut t = Self::zero(dim, depth);
        t.levels[0][0] = 1.0;
        t
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Truncated tensor product, computed word by word.
    pub fn mul(&self, other: &Tensor) -> Tensor {
        let depth = self.depth();
        let d = self.dim;
        let mut out = Tensor::zero(d, depth);
        for n in 0..=depth {
            for k in 0..=n {
                let right_len = d.pow((n - k) as u32);
                for (i, a) in self.levels[k].iter().enumerate() {
                    for (j, b) in other.levels[n - k].iter().enumerate() {
                        out.levels[n][i * right_len + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Tensor {
        Tensor {
            dim: self.dim,
            levels: self
                .levels
                .iter()
                .map(|l| l.iter().map(|v| v * s).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        Tensor {
            dim: self.dim,
            levels: self
                .levels
                .iter()
                .zip(&other.levels)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }

    /// `Σ_k x^k / k!` for `x` without scalar part; exact after `depth` terms.
    pub fn exp(x: &Tensor) -> Tensor {
        let depth = x.depth();
        let mut sum = Tensor::one(x.dim, depth);
        let mut term = Tensor::one(x.dim, depth);
        for k in 1..=depth {
            term = term.mul(x).scale(1.0 / k as f64);
            sum = sum.add(&term);
        }
        sum
    }

    pub fn dot(&self, other: &Tensor) -> f64 {
        self.levels
            .iter()
            .zip(&other.levels)
            .flat_map(|(a, b)| a.iter().zip(b))
            .map(|(x, y)| x * y)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        self.levels
            .iter()
            .zip(&other.levels)
            .flat_map(|(a, b)| a.iter().zip(b))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

fn step_element(dim: usize, depth: usize, inc: &[f64], level2: Option<&[f64]>) -> Tensor {
    let mut x = Tensor::zero(dim, depth);
    x.levels[1].copy_from_slice(inc);
    if let (Some(q), true) = (level2, depth >= 2) {
        for (dst, v) in x.levels[2].iter_mut().zip(q) {
            *dst = -0.5 * v;
        }
    }
    x
}

/// Signature of the piecewise-linear interpolation of `rows`.
pub fn reference_signature(p: &SampledPath, depth: usize) -> Tensor {
    let d = p.dim();
    let mut s = Tensor::one(d, depth);
    for i in 0..p.steps() {
        let inc: Vec<f64> = (0..d).map(|c| p.value(i + 1, c) - p.value(i, c)).collect();
        s = s.mul(&Tensor::exp(&step_element(d, depth, &inc, None)));
    }
    s
}

/// Itô signature: `S ← S ⊗ exp(Δx - ½ΔQ)` per step, with `ΔQ` at level 2.
pub fn reference_ito_signature(p: &SampledPath, qv: &QuadraticVariationPath, depth: usize) -> Tensor {
    let d = p.dim();
    let mut s = Tensor::one(d, depth);
    for i in 0..p.steps() {
        let inc: Vec<f64> = (0..d).map(|c| p.value(i + 1, c) - p.value(i, c)).collect();
        let dq = qv.increment(i);
        s = s.mul(&Tensor::exp(&step_element(d, depth, &inc, Some(&dq))));
    }
    s
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A time-augmented piecewise-linear path `(t, x)` in `ℝ^{1+dim}` whose
/// total variation (sum of Euclidean segment lengths) equals `variation`.
pub fn random_augmented_path(rng: &mut ChaCha8Rng, segments: usize, dim: usize, variation: f64) -> SampledPath {
    let mut incs: Vec<Vec<f64>> = (0..segments)
        .map(|_| {
            let mut v = vec![rng.random_range(0.05..1.0)];
            v.extend((0..dim).map(|_| rng.random_range(-1.0..1.0)));
            v
        })
        .collect();
    let total: f64 = incs
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .sum();
    for v in &mut incs {
        for x in v.iter_mut() {
            *x *= variation / total;
        }
    }
    let mut values = vec![0.0; 1 + dim];
    let mut times = vec![0.0];
    let mut row = values.clone();
    for v in &incs {
        for (r, x) in row.iter_mut().zip(v) {
            *r += x;
        }
        times.push(row[0]);
        values.extend_from_slice(&row);
    }
    SampledPath::from_flat(TimeGrid::new(times).unwrap(), values, 1 + dim).unwrap()
}

/// Random-walk path on a uniform grid of `[0, 1]` with N(0, scale²) steps.
pub fn random_walk(rng: &mut ChaCha8Rng, steps: usize, dim: usize, scale: f64) -> SampledPath {
    use rand_distr::{Distribution, StandardNormal};
    let grid = TimeGrid::uniform(0.0, 1.0, steps).unwrap();
    let mut values = vec![0.0; dim];
    for i in 0..steps {
        for c in 0..dim {
            let z: f64 = StandardNormal.sample(rng);
            let prev = values[i * dim + c];
            values.push(prev + scale * z);
        }
    }
    SampledPath::from_flat(grid, values, dim).unwrap()
}

/// Path whose values are multiples of `2^-10`, so sums and differences of a
/// few values are exact.
pub fn dyadic_path(rng: &mut ChaCha8Rng, steps: usize, dim: usize) -> SampledPath {
    let grid = TimeGrid::uniform(0.0, 0.25, steps).unwrap();
    let values = (0..(steps + 1) * dim)
        .map(|_| 1.0 + rng.random_range(-64i32..=64) as f64 / 1024.0)
        .collect();
    SampledPath::from_flat(grid, values, dim).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
