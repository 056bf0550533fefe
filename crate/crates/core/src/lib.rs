//! Decision engine for choosing between a sale-leaseback, new amortizing
//! debt, or no action, from the retailer's (seller-lessee's) side.
//!
//! * [`cashflow`]: annuities, amortization, depreciation, present values.
//! * [`deal`]: deal parameters, validation, derived present values.
//! * [`engine`]: net positions, the two condition sets, the recommendation.
//! * [`curve`]: sampled credit curves and finite-difference derivatives.
//! * [`sensitivity`]: breakeven solver, parameter sweeps, tornado ranking.
//! * [`scenario`]: JSON scenario and report documents, batch runs.

pub mod cashflow;
pub mod curve;
pub mod deal;
pub mod engine;
pub mod error;
pub mod scenario;
pub mod sensitivity;

pub use error::{Error, Result};

pub const TOOL_NAME: &str = "slb-decider";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
