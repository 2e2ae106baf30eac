//! Regularised quadratic hedging in closed form.
//!
//! For training paths `x_1..x_n` with payoffs `π`, initial capital `π₀` and
//! regularisation `λ > 0`, the minimiser of
//!
//! ```text
//! (1/n) Σ_a (π_a - π₀ - ⟨f, Φ_{x_a}⟩)² + (λ/2) ‖f‖²
//! ```
//!
//! is `f* = Σ_a β_a Φ_{x_a}` with `(½ I + G/(nλ)) (nλ β) = π - π₀ 1`, where
//! `G` is the hedging Gram matrix. The position held at time `s` along a
//! query path `y` is `f*(y|[0,s]) = Γ(y|[0,s]) β`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::featuremap::{gamma_table, gram_matrix, GramMatrix};
use crate::market::{bs_initial_price, GbmSpec, PayoffSpec};
use crate::paths::{SampledPath, TimeGrid};

/// Regularisation used when none is configured.
pub const DEFAULT_LAMBDA: f64 = 1e-7;

/// Kernel sub-steps per sample step used when none is configured.
pub const DEFAULT_REFINEMENT: usize = 4;

/// Positions held at each sample time; the last row is never traded.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTrajectory {
    grid: TimeGrid,
    positions: Vec<f64>,
    dim: usize,
}

impl StrategyTrajectory {
    pub fn new(grid: TimeGrid, positions: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || positions.len() != grid.len() * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} positions for {} times of dimension {dim}",
                positions.len(),
                grid.len()
            )));
        }
        if let Some(k) = positions.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: k / dim,
                col: k % dim,
            });
        }
        Ok(Self {
            grid,
            positions,
            dim,
        })
    }

    pub fn zeros(grid: TimeGrid, dim: usize) -> Self {
        let positions = vec![0.0; grid.len() * dim];
        Self {
            grid,
            positions,
            dim,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }
}

/// `payoff - π₀ - Σ_{i<M} ⟨positions[i], Δpath_i⟩`.
pub fn pnl_of_positions(
    traj: &StrategyTrajectory,
    path: &SampledPath,
    payoff: f64,
    pi0: f64,
) -> Result<f64> {
    if traj.dim() != path.dim() {
        return Err(Error::DimensionMismatch {
            expected: path.dim(),
            found: traj.dim(),
        });
    }
    if traj.len() != path.len() {
        return Err(Error::SizeMismatch(format!(
            "{} positions for a path with {} samples",
            traj.len(),
            path.len()
        )));
    }
    let mut gains = 0.0;
    for (i, dx) in path.increments().rows().enumerate() {
        gains += traj
            .position(i)
            .iter()
            .zip(dx)
            .map(|(h, x)| h * x)
            .sum::<f64>();
    }
    Ok((payoff - pi0) - gains)
}

/// P&L values with summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PnLReport {
    pnls: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator; 0 for one path).
    pub std: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

impl PnLReport {
    pub fn from_pnls(pnls: Vec<f64>) -> Self {
        let n = pnls.len();
        if n == 0 {
            return Self {
                pnls,
                mean: f64::NAN,
                std: f64::NAN,
                q05: f64::NAN,
                q50: f64::NAN,
                q95: f64::NAN,
            };
        }
        let mean = pnls.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (pnls.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = pnls.clone();
        sorted.sort_by(f64::total_cmp);
        Self {
            q05: quantile(&sorted, 0.05),
            q50: quantile(&sorted, 0.50),
            q95: quantile(&sorted, 0.95),
            pnls,
            mean,
            std,
        }
    }

    pub fn pnls(&self) -> &[f64] {
        &self.pnls
    }

    pub fn len(&self) -> usize {
        self.pnls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pnls.is_empty()
    }
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// How the initial capital `π₀` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pi0Policy {
    Explicit(f64),
    /// Black-Scholes price of a vanilla payoff at `s0` (zero rate).
    BlackScholes,
    /// Mean of the training payoffs.
    TrainMean,
}

impl Pi0Policy {
    pub fn resolve(&self, payoff: &PayoffSpec, market: &GbmSpec, train_payoffs: &[f64]) -> Result<f64> {
        match *self {
            Pi0Policy::Explicit(v) => Ok(v),
            Pi0Policy::TrainMean => {
                if train_payoffs.is_empty() {
                    return Err(Error::EmptyTrainingSet);
                }
                Ok(train_payoffs.iter().sum::<f64>() / train_payoffs.len() as f64)
            }
            Pi0Policy::BlackScholes => {
                let grid = market.grid()?;
                let spot = SampledPath::from_flat(grid.clone(), vec![market.s0; grid.len()], 1)?;
                bs_initial_price(payoff, &spot, market.sigma)
            }
        }
    }
}

/// A fitted kernel hedge.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeModel {
    train: Vec<SampledPath>,
    payoffs: Vec<f64>,
    dual: Vec<f64>,
    lambda: f64,
    pi0: f64,
    refinement: usize,
    gram: GramMatrix,
}

/// Fits the hedge on `train`, assembling the Gram matrix first.
pub fn fit(
    train: Vec<SampledPath>,
    payoffs: &[f64],
    pi0: f64,
    lambda: f64,
    refinement: usize,
) -> Result<HedgeModel> {
    check_inputs(&train, payoffs, pi0, lambda)?;
    let gram = gram_matrix(&train, refinement)?;
    fit_with_gram(train, gram, payoffs, pi0, lambda, refinement)
}

fn check_inputs(train: &[SampledPath], payoffs: &[f64], pi0: f64, lambda: f64) -> Result<()> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    if payoffs.len() != train.len() {
        return Err(Error::SizeMismatch(format!(
            "{} payoffs for {} training paths",
            payoffs.len(),
            train.len()
        )));
    }
    if let Some(index) = payoffs.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinitePayoff { index });
    }
    if !pi0.is_finite() {
        return Err(Error::NonFinitePayoff { index: usize::MAX });
    }
    Ok(())
}

/// Fits the hedge from a precomputed Gram matrix of `train`.
pub fn fit_with_gram(
    train: Vec<SampledPath>,
    gram: GramMatrix,
    payoffs: &[f64],
    pi0: f64,
    lambda: f64,
    refinement: usize,
) -> Result<HedgeModel> {
    check_inputs(&train, payoffs, pi0, lambda)?;
    let n = train.len();
    if gram.n() != n {
        return Err(Error::SizeMismatch(format!(
            "{}x{} Gram matrix for {n} paths",
            gram.n(),
            gram.n()
        )));
    }
    let n_lambda = n as f64 * lambda;
    let system = system_matrix(&gram, n_lambda);
    let rhs = DVector::from_iterator(n, payoffs.iter().map(|p| p - pi0));
    // ½I shifts the spectrum of the (numerically) PSD Gram part, so Cholesky
    // succeeds unless the Gram matrix is badly indefinite.
    let a = match system.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => system
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SolveFailed("singular hedging system".into()))?,
    };
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolveFailed("non-finite dual coefficients".into()));
    }
    let dual = a.iter().map(|v| v / n_lambda).collect();
    Ok(HedgeModel {
        train,
        payoffs: payoffs.to_vec(),
        dual,
        lambda,
        pi0,
        refinement,
        gram,
    })
}

fn system_matrix(gram: &GramMatrix, n_lambda: f64) -> DMatrix<f64> {
    let n = gram.n();
    let mut m = gram.as_matrix() / n_lambda;
    for i in 0..n {
        m[(i, i)] += 0.5;
    }
    m
}

impl HedgeModel {
    /// Reassembles a model from stored parts (e.g. a model file).
    pub fn from_parts(
        train: Vec<SampledPath>,
        payoffs: Vec<f64>,
        dual: Vec<f64>,
        lambda: f64,
        pi0: f64,
        refinement: usize,
        gram: GramMatrix,
    ) -> Result<Self> {
        check_inputs(&train, &payoffs, pi0, lambda)?;
        let n = train.len();
        if dual.len() != n || gram.n() != n {
            return Err(Error::SizeMismatch(format!(
                "{n} paths, {} dual weights, {}x{} Gram matrix",
                dual.len(),
                gram.n(),
                gram.n()
            )));
        }
        Ok(Self {
            train,
            payoffs,
            dual,
            lambda,
            pi0,
            refinement,
            gram,
        })
    }

    pub fn train(&self) -> &[SampledPath] {
        &self.train
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }

    /// Dual weights `β`.
    pub fn dual(&self) -> &[f64] {
        &self.dual
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    pub fn refinement(&self) -> usize {
        self.refinement
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn n(&self) -> usize {
        self.train.len()
    }

    pub fn dim(&self) -> usize {
        self.train[0].dim()
    }

    /// The same model with different dual weights.
    pub fn with_dual(&self, dual: Vec<f64>) -> Result<Self> {
        if dual.len() != self.n() {
            return Err(Error::SizeMismatch(format!(
                "{} dual weights for {} paths",
                dual.len(),
                self.n()
            )));
        }
        Ok(Self {
            dual,
            ..self.clone()
        })
    }

    /// `π - π₀ 1`.
    pub fn targets(&self) -> Vec<f64> {
        self.payoffs.iter().map(|p| p - self.pi0).collect()
    }

    /// `‖(½I + G/(nλ))(nλβ) - (π - π₀1)‖ / ‖π - π₀1‖`; the absolute residual
    /// when the targets vanish.
    pub fn relative_residual(&self) -> f64 {
        let n_lambda = self.n() as f64 * self.lambda;
        let system = system_matrix(&self.gram, n_lambda);
        let a = DVector::from_iterator(self.n(), self.dual.iter().map(|b| b * n_lambda));
        let y = DVector::from_vec(self.targets());
        let res = (system * a - &y).norm();
        let scale = y.norm();
        if scale > 0.0 {
            res / scale
        } else {
            res
        }
    }

    /// Regularised empirical objective at dual weights `beta`:
    /// `(1/n)‖π - π₀1 - Gβ‖² + (λ/2) βᵀGβ`.
    pub fn objective(&self, beta: &[f64]) -> f64 {
        let g = self.gram.as_matrix();
        let b = DVector::from_column_slice(beta);
        let gb = g * &b;
        let y = DVector::from_vec(self.targets());
        (&y - &gb).norm_squared() / self.n() as f64 + 0.5 * self.lambda * b.dot(&gb)
    }

    fn check_query(&self, query: &SampledPath) -> Result<()> {
        if query.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: query.dim(),
            });
        }
        Ok(())
    }

    /// `positions[s] = Γ(query|[0,s]) β` at every sample index.
    pub fn positions(&self, query: &SampledPath) -> Result<StrategyTrajectory> {
        self.check_query(query)?;
        let d = self.dim();
        if self.dual.iter().all(|b| *b == 0.0) {
            return Ok(StrategyTrajectory::zeros(query.grid().clone(), d));
        }
        let table = gamma_table(query, &self.train, self.refinement)?;
        let mut positions = Vec::with_capacity(query.len() * d);
        for s in 0..table.len() {
            positions.extend(table.slice(s)?.apply(&self.dual));
        }
        StrategyTrajectory::new(query.grid().clone(), positions, d)
    }

    pub fn pnl(&self, query: &SampledPath, payoff: f64) -> Result<f64> {
        let traj = self.positions(query)?;
        pnl_of_positions(&traj, query, payoff, self.pi0)
    }

    /// Trajectories for many query paths, in parallel.
    pub fn positions_batch(&self, queries: &[SampledPath]) -> Result<Vec<StrategyTrajectory>> {
        queries.par_iter().map(|q| self.positions(q)).collect()
    }

    pub fn evaluate(&self, test: &[SampledPath], payoffs: &[f64]) -> Result<PnLReport> {
        if test.len() != payoffs.len() {
            return Err(Error::SizeMismatch(format!(
                "{} test paths, {} payoffs",
                test.len(),
                payoffs.len()
            )));
        }
        let pnls = test
            .par_iter()
            .zip(payoffs)
            .map(|(q, p)| self.pnl(q, *p))
            .collect::<Result<Vec<f64>>>()?;
        Ok(PnLReport::from_pnls(pnls))
    }
}
