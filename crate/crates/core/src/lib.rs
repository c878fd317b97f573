//! Demand-private coded caching for `N` files and `K` users.
//!
//! Each user's cache holds the YMA delivery signals of a virtual demand
//! vector over `NK-K+1` positions, selected by a private key. The server only
//! sees key-masked demands, so the broadcast carries no information about
//! other users' requests.

pub mod bits;
pub mod cli;
pub mod combinatorics;
pub mod demand;
pub mod error;
pub mod library;
pub mod params;
pub mod scheme;
pub mod tradeoff;
pub mod verification;
pub mod yma;

pub use bits::BitString;
pub use combinatorics::{binomial, enumerate_r_subsets, subset_rank, subset_unrank, SubsetIndex};
pub use demand::{aux_demand, build_v, f_map, g_map, AuxDemand, DemandClass, VVector};
pub use error::{Error, Result};
pub use library::FileLibrary;
pub use params::{memory_rate_of, SchemeParams};
pub use scheme::{
    assemble_delivery, decode, deliver, place, recover_segment, x_segment, CacheContent,
    DeliverySignal, SessionRandomness,
};
pub use tradeoff::{RatePoint, Rational};
