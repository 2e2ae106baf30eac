//! Synthetic market: driftless GBM scenarios, payoffs, and the Black-Scholes
//! delta hedge that serves as the ground-truth strategy.
//!
//! Rates and drift are zero throughout, so the Black-Scholes formulas reduce
//! to
//!
//! ```text
//! C = S N(d1) - K N(d2),  d1 = (ln(S/K) + ½σ²τ) / (σ√τ),  d2 = d1 - σ√τ
//! ```

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hedger::{pnl_of_positions, PnLReport, StrategyTrajectory};
use crate::paths::{SampledPath, TimeGrid};

/// Independent driftless geometric Brownian motions on an equal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GbmSpec {
    pub s0: f64,
    pub sigma: f64,
    pub horizon_years: f64,
    pub steps: usize,
    pub dim: usize,
    pub seed: u64,
}

impl Default for GbmSpec {
    /// σ = 0.2, S₀ = 1, 30 days sampled 120 times.
    fn default() -> Self {
        Self {
            s0: 1.0,
            sigma: 0.2,
            horizon_years: 30.0 / 365.0,
            steps: 120,
            dim: 1,
            seed: 42,
        }
    }
}

impl GbmSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        if !(self.s0.is_finite() && self.s0 > 0.0) {
            return bad("s0 must be positive and finite");
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad("sigma must be non-negative and finite");
        }
        if !(self.horizon_years.is_finite() && self.horizon_years > 0.0) {
            return bad("horizon must be positive and finite");
        }
        if self.steps < 2 {
            return bad("steps must be >= 2");
        }
        if self.dim == 0 {
            return bad("dim must be >= 1");
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(0.0, self.horizon_years, self.steps)
    }
}

/// First RNG stream used for held-out test paths. Training paths use
/// streams counted from 0, so the two sets never overlap for one seed.
pub const TEST_STREAM_OFFSET: u64 = 1 << 32;

/// `count` paths drawn from RNG streams `0..count`.
pub fn simulate_gbm(spec: &GbmSpec, count: usize) -> Result<Vec<SampledPath>> {
    simulate_gbm_streams(spec, 0, count)
}

/// Test paths: streams from [`TEST_STREAM_OFFSET`].
pub fn simulate_gbm_test(spec: &GbmSpec, count: usize) -> Result<Vec<SampledPath>> {
    simulate_gbm_streams(spec, TEST_STREAM_OFFSET, count)
}

/// Paths drawn from RNG streams `first..first + count`.
///
/// Path `i` uses its own ChaCha stream keyed by `(seed, i)`, so output does
/// not depend on the number of worker threads or on how many other paths
/// are drawn.
pub fn simulate_gbm_streams(spec: &GbmSpec, first: u64, count: usize) -> Result<Vec<SampledPath>> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::InvalidSpec("path count must be >= 1".into()));
    }
    let grid = spec.grid()?;
    (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(first + k);
            simulate_one(spec, &grid, &mut rng)
        })
        .collect()
}

fn simulate_one(spec: &GbmSpec, grid: &TimeGrid, rng: &mut ChaCha8Rng) -> Result<SampledPath> {
    let d = spec.dim;
    let mut values = Vec::with_capacity(grid.len() * d);
    values.extend(std::iter::repeat_n(spec.s0, d));
    for w in grid.times().windows(2) {
        let dt = w[1] - w[0];
        let drift = -0.5 * spec.sigma * spec.sigma * dt;
        let vol = spec.sigma * dt.sqrt();
        let base = values.len() - d;
        for c in 0..d {
            let z: f64 = StandardNormal.sample(rng);
            let next = values[base + c] * (drift + vol * z).exp();
            values.push(next);
        }
    }
    SampledPath::from_flat(grid.clone(), values, d)
}

pub type CustomPayoff = Arc<dyn Fn(&SampledPath) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum PayoffKind {
    EuropeanCall,
    EuropeanPut,
    /// Call on the arithmetic mean over all grid points.
    AsianCall,
    Custom(CustomPayoff),
}

impl fmt::Debug for PayoffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PayoffKind {
    pub fn name(&self) -> &'static str {
        match self {
            PayoffKind::EuropeanCall => "call",
            PayoffKind::EuropeanPut => "put",
            PayoffKind::AsianCall => "asian-call",
            PayoffKind::Custom(_) => "custom",
        }
    }
}

/// Payoff on one coordinate of the path.
#[derive(Debug, Clone)]
pub struct PayoffSpec {
    pub kind: PayoffKind,
    pub strike: f64,
    pub coordinate: usize,
}

impl PayoffSpec {
    pub fn call(strike: f64) -> Self {
        Self {
            kind: PayoffKind::EuropeanCall,
            strike,
            coordinate: 0,
        }
    }

    pub fn put(strike: f64) -> Self {
        Self {
            kind: PayoffKind::EuropeanPut,
            strike,
            coordinate: 0,
        }
    }
}

pub fn payoff(spec: &PayoffSpec, p: &SampledPath) -> Result<f64> {
    if spec.coordinate >= p.dim() {
        return Err(Error::BadCoordinate {
            coordinate: spec.coordinate,
            dim: p.dim(),
        });
    }
    let last = p.value(p.steps(), spec.coordinate);
    Ok(match &spec.kind {
        PayoffKind::EuropeanCall => (last - spec.strike).max(0.0),
        PayoffKind::EuropeanPut => (spec.strike - last).max(0.0),
        PayoffKind::AsianCall => {
            let mean = p.coordinate(spec.coordinate).iter().sum::<f64>() / p.len() as f64;
            (mean - spec.strike).max(0.0)
        }
        PayoffKind::Custom(f) => f(p),
    })
}

pub fn payoffs(spec: &PayoffSpec, paths: &[SampledPath]) -> Result<Vec<f64>> {
    paths.iter().map(|p| payoff(spec, p)).collect()
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn check_spot(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveSpot(s))
    }
}

/// `σ√τ`, or `None` when the option is effectively at expiry.
fn total_vol(sigma: f64, tau: f64) -> Option<f64> {
    let v = sigma * tau.max(0.0).sqrt();
    (v > 0.0).then_some(v)
}

fn d1(s: f64, strike: f64, vol: f64) -> f64 {
    ((s / strike).ln() + 0.5 * vol * vol) / vol
}

/// Black-Scholes call price with zero rate. `tau = 0` or `sigma = 0` gives
/// the intrinsic value.
pub fn bs_price(s: f64, strike: f64, sigma: f64, tau: f64) -> Result<f64> {
    check_spot(s)?;
    Ok(match total_vol(sigma, tau) {
        None => (s - strike).max(0.0),
        Some(v) => {
            let d1 = d1(s, strike, v);
            s * norm_cdf(d1) - strike * norm_cdf(d1 - v)
        }
    })
}

/// Put price by parity (zero rate).
pub fn bs_put_price(s: f64, strike: f64, sigma: f64, tau: f64) -> Result<f64> {
    Ok(bs_price(s, strike, sigma, tau)? - s + strike)
}

/// Call delta `N(d1)`. At expiry: `1{s > K}`, with `½` at the money.
pub fn bs_delta(s: f64, strike: f64, sigma: f64, tau: f64) -> Result<f64> {
    check_spot(s)?;
    Ok(match total_vol(sigma, tau) {
        None => {
            if s > strike {
                1.0
            } else if s < strike {
                0.0
            } else {
                0.5
            }
        }
        Some(v) => norm_cdf(d1(s, strike, v)),
    })
}

pub fn bs_put_delta(s: f64, strike: f64, sigma: f64, tau: f64) -> Result<f64> {
    Ok(bs_delta(s, strike, sigma, tau)? - 1.0)
}

fn check_delta_hedgeable(spec: &PayoffSpec, p: &SampledPath) -> Result<()> {
    if p.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: p.dim(),
        });
    }
    match spec.kind {
        PayoffKind::EuropeanCall | PayoffKind::EuropeanPut => Ok(()),
        ref k => Err(Error::UnsupportedPayoff(k.name().into())),
    }
}

/// Black-Scholes price at the first grid time.
pub fn bs_initial_price(spec: &PayoffSpec, p: &SampledPath, sigma: f64) -> Result<f64> {
    check_delta_hedgeable(spec, p)?;
    let tau = p.grid().horizon();
    match spec.kind {
        PayoffKind::EuropeanPut => bs_put_price(p.value(0, 0), spec.strike, sigma, tau),
        _ => bs_price(p.value(0, 0), spec.strike, sigma, tau),
    }
}

/// Delta-hedge positions `Δ(S_{t_i}, K, σ, T - t_i)` along one path.
pub fn delta_hedge_positions(spec: &PayoffSpec, p: &SampledPath, sigma: f64) -> Result<StrategyTrajectory> {
    check_delta_hedgeable(spec, p)?;
    let end = p.grid().end();
    let positions = p
        .times()
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let tau = end - t;
            match spec.kind {
                PayoffKind::EuropeanPut => bs_put_delta(p.value(i, 0), spec.strike, sigma, tau),
                _ => bs_delta(p.value(i, 0), spec.strike, sigma, tau),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    StrategyTrajectory::new(p.grid().clone(), positions, 1)
}

/// P&L of the Black-Scholes delta hedge, financed with the Black-Scholes
/// price, on every path.
pub fn delta_hedge_pnl(spec: &PayoffSpec, paths: &[SampledPath], sigma: f64) -> Result<PnLReport> {
    let pnls = paths
        .par_iter()
        .map(|p| {
            let pi0 = bs_initial_price(spec, p, sigma)?;
            let traj = delta_hedge_positions(spec, p, sigma)?;
            pnl_of_positions(&traj, p, payoff(spec, p)?, pi0)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(PnLReport::from_pnls(pnls))
}
