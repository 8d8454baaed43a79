//! Truthful random-sampling spectrum auctions over interference models.
//!
//! Instances describe bidders (links or small secondary networks) sharing
//! `k` channels under SINR, conflict-graph or edge-conflict interference.
//! [`packing`] holds bid-oblivious packers, [`mechanism`] wraps any of them
//! in a universally truthful auction, [`oracle`] solves small instances
//! exactly, and [`harness`] drives reproducible experiments.

pub mod error;
pub mod harness;
pub mod mechanism;
pub mod model;
pub mod oracle;
pub mod packing;
pub mod power;

pub use error::{Error, Result};
