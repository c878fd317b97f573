//! The private scheme: placement, delivery, segment recovery and decoding.

mod decoding;
mod delivery;
mod placement;
mod randomness;

pub use decoding::decode;
pub use delivery::{
    assemble_delivery, assemble_with, deliver, recover_segment, x_segment, DeliverySignal,
};
pub use placement::{place, place_user, CacheContent};
pub use randomness::{stream, stream_rng, SessionRandomness};
