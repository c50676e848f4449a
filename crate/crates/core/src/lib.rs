// Parameter checks use negated comparisons so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antnet;
pub mod baselines;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod network;
pub mod routing;
pub mod sim;
pub mod topologies;
pub mod traffic;

pub use error::{Error, Result};
