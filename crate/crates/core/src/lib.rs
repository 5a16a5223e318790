//! Kobayashi, Caratheodory and Hilbert metrics on domains of real Grassmannians.

// NaN-rejecting `!(a > b)` tests are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::needless_range_loop)]

pub mod error;
pub mod numerics;
pub mod rng;

pub use error::{Error, Result};
pub mod grassmann;
pub mod domains;
pub mod metrics;
pub mod nagano;
pub mod cli;
