//! Signature kernels of sampled paths.
//!
//! - [`strat_kernel_grid`]: Stratonovich kernel, Goursat PDE on a refined grid.
//! - [`ito_kernel_grid`]: Itô kernel from Stratonovich increments plus
//!   quadratic variation.
//! - [`truncated_signature`] and friends: brute-force truncated signatures,
//!   used as an independent check of the PDE solvers.

mod goursat;
mod ito;
mod signature;

pub use goursat::{strat_kernel_grid, KernelGrid};
pub use ito::{ito_kernel_grid, ItoKernelGrids};
pub use signature::{
    default_depth_cap, shuffle_check, shuffle_product, signature_inner_product,
    truncated_signature, truncated_signature_with_cap, TruncatedSignature,
};
