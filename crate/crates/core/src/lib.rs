//! Model-free quadratic hedging with signature kernels.
//!
//! The pipeline: sampled price paths ([`paths`]) → Stratonovich signature
//! kernels on the sample grids ([`sigkernel`]) → the hedging Gram matrix and
//! the evaluation map Γ ([`featuremap`]) → the closed-form regularised hedge,
//! its positions and P&L ([`hedger`]). [`market`] supplies GBM scenarios,
//! payoffs and the Black-Scholes delta hedge used as ground truth; [`io`]
//! holds the file formats.

pub mod error;
pub mod featuremap;
pub mod hedger;
pub mod io;
pub mod market;
pub mod paths;
pub mod sigkernel;

pub use error::{Error, Result};
pub use featuremap::{gamma_slice, gamma_table, gram_entry, gram_matrix, GammaSlice, GammaTable, GramMatrix};
pub use hedger::{
    fit, fit_with_gram, HedgeModel, Pi0Policy, PnLReport, StrategyTrajectory, DEFAULT_LAMBDA,
    DEFAULT_REFINEMENT,
};
pub use market::{
    bs_delta, bs_price, delta_hedge_pnl, payoff, simulate_gbm, simulate_gbm_test, GbmSpec, PayoffKind,
    PayoffSpec,
};
pub use paths::{
    lead_lag_level2, realized_quadratic_variation, validate_path, QuadraticVariationPath,
    SampledPath, TimeGrid,
};
pub use sigkernel::{
    ito_kernel_grid, strat_kernel_grid, truncated_signature, ItoKernelGrids, KernelGrid,
    TruncatedSignature,
};
