//! Truncated signatures of piecewise-linear paths.
//!
//! Level `k` of a signature over `ℝ^d` holds `d^k` coefficients, indexed by
//! words `i_1 … i_k` (letters `0..d`) in base-`d` order. A linear segment
//! with increment `v` has signature `exp(v)`, i.e. `v^{⊗k}/k!` at level `k`;
//! segments are glued with Chen's product.

use crate::error::{Error, Result};
use crate::paths::SampledPath;

/// Default depth cap: 15 for one- and two-dimensional paths, 8 above.
pub fn default_depth_cap(dim: usize) -> usize {
    if dim <= 2 {
        15
    } else {
        8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSignature {
    dim: usize,
    levels: Vec<Vec<f64>>,
}

/// Signature of `p` read as a piecewise-linear path, truncated at `depth`.
pub fn truncated_signature(p: &SampledPath, depth: usize) -> Result<TruncatedSignature> {
    truncated_signature_with_cap(p, depth, default_depth_cap(p.dim()))
}

pub fn truncated_signature_with_cap(
    p: &SampledPath,
    depth: usize,
    cap: usize,
) -> Result<TruncatedSignature> {
    if depth > cap {
        return Err(Error::DepthTooLarge { depth, cap });
    }
    let mut sig = TruncatedSignature::identity(p.dim(), depth);
    for inc in p.increments().rows() {
        sig.extend_linear(inc);
    }
    Ok(sig)
}

/// `Σ_I a_I b_I` over all words up to the common depth.
pub fn signature_inner_product(a: &TruncatedSignature, b: &TruncatedSignature) -> Result<f64> {
    a.check_compatible(b)?;
    Ok(a.levels
        .iter()
        .zip(&b.levels)
        .map(|(u, v)| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>())
        .sum())
}

/// `⟨S, e_I⟩⟨S, e_J⟩ - ⟨S, e_I ⧢ e_J⟩`; zero for group-like `S`.
pub fn shuffle_check(sig: &TruncatedSignature, word_i: &[usize], word_j: &[usize]) -> Result<f64> {
    let len = word_i.len() + word_j.len();
    if len > sig.depth() {
        return Err(Error::WordTooLong {
            len,
            depth: sig.depth(),
        });
    }
    let lhs = sig.coeff(word_i)? * sig.coeff(word_j)?;
    let mut rhs = 0.0;
    for w in shuffle_product(word_i, word_j) {
        rhs += sig.coeff(&w)?;
    }
    Ok(lhs - rhs)
}

/// All interleavings of `a` and `b`, with multiplicity.
pub fn shuffle_product(a: &[usize], b: &[usize]) -> Vec<Vec<usize>> {
    if a.is_empty() {
        return vec![b.to_vec()];
    }
    if b.is_empty() {
        return vec![a.to_vec()];
    }
    let (a_last, a_init) = a.split_last().unwrap();
    let (b_last, b_init) = b.split_last().unwrap();
    let mut out = Vec::new();
    for mut w in shuffle_product(a_init, b) {
        w.push(*a_last);
        out.push(w);
    }
    for mut w in shuffle_product(a, b_init) {
        w.push(*b_last);
        out.push(w);
    }
    out
}

impl TruncatedSignature {
    /// The signature of a constant path: 1 on the empty word, 0 elsewhere.
    pub fn identity(dim: usize, depth: usize) -> Self {
        let levels = (0..=depth)
            .map(|k| {
                let mut v = vec![0.0; dim.pow(k as u32)];
                if k == 0 {
                    v[0] = 1.0;
                }
                v
            })
            .collect();
        Self { dim, levels }
    }

    /// `exp(v)` truncated at `depth`: the signature of one linear segment.
    pub fn segment(increment: &[f64], depth: usize) -> Self {
        let mut s = Self::identity(increment.len(), depth);
        s.extend_linear(increment);
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    /// Coefficient of a word (letters `0..dim`).
    pub fn coeff(&self, word: &[usize]) -> Result<f64> {
        if word.len() > self.depth() {
            return Err(Error::WordTooLong {
                len: word.len(),
                depth: self.depth(),
            });
        }
        let mut idx = 0;
        for &l in word {
            if l >= self.dim {
                return Err(Error::BadLetter {
                    letter: l,
                    dim: self.dim,
                });
            }
            idx = idx * self.dim + l;
        }
        Ok(self.levels[word.len()][idx])
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.depth() != other.depth() {
            return Err(Error::DepthMismatch {
                left: self.depth(),
                right: other.depth(),
            });
        }
        Ok(())
    }

    /// Chen product `self ⊗ other`, truncated.
    pub fn chen(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let depth = self.depth();
        let mut levels = Vec::with_capacity(depth + 1);
        for n in 0..=depth {
            let mut out = vec![0.0; self.dim.pow(n as u32)];
            for k in 0..=n {
                let a = &self.levels[k];
                let b = &other.levels[n - k];
                let bl = b.len();
                for (ia, va) in a.iter().enumerate() {
                    if *va == 0.0 {
                        continue;
                    }
                    let dst = &mut out[ia * bl..(ia + 1) * bl];
                    for (o, vb) in dst.iter_mut().zip(b) {
                        *o += va * vb;
                    }
                }
            }
            levels.push(out);
        }
        Ok(Self {
            dim: self.dim,
            levels,
        })
    }

    /// In place `self ← self ⊗ exp(v)`.
    ///
    /// Level `n` of the product is `Σ_k S_{n-k} ⊗ v^{⊗k}/k!`, evaluated by
    /// Horner's rule from the top level down so that lower levels are still
    /// the old ones when they are read.
    pub fn extend_linear(&mut self, v: &[f64]) {
        debug_assert_eq!(v.len(), self.dim);
        if v.iter().all(|x| *x == 0.0) {
            return;
        }
        let d = self.dim;
        for n in (1..=self.depth()).rev() {
            // acc = S_0; acc = acc ⊗ v / (n - k + 1) + S_k  for k = 1..n
            let mut acc = self.levels[0].clone();
            for k in 1..=n {
                let scale = 1.0 / (n - k + 1) as f64;
                let prev = &self.levels[k];
                let mut next = Vec::with_capacity(acc.len() * d);
                for (a, s) in acc.iter().zip(prev.chunks_exact(d)) {
                    let a = a * scale;
                    next.extend(v.iter().zip(s).map(|(x, p)| a * x + p));
                }
                acc = next;
            }
            self.levels[n] = acc;
        }
    }
}
