//! Slepian-Wolf codes: encoders, MAP decoding, decoder repair, error
//! probability and the converse bound.

mod converse;
mod decoder;
mod encoder;

pub use converse::{
    alpha_grid, converse_bound, default_alpha_grid, rate_to_m, second_order_rate,
    DEFAULT_GRID_POINTS,
};
pub use decoder::{
    error_probability, estimate_error, map_decoder, repair_decoder, CodePair, Decoder,
    ErrorEstimate, ErrorMode,
};
pub use encoder::{bin_of, EncoderForm, EncoderMap};
