//! Polar codes with higher-order combining memory.
//!
//! Classical polar codes double the block length at every combining level. A
//! memory order `m` delays the auxiliary block by `m` levels instead of one,
//! so the length follows `N(n) = N(n-1) + N(n-m)` and grows like `phi^n` for
//! the dominant root `phi` of `rho^m - rho^(m-1) - 1`. `m = 1` recovers the
//! classical construction. This crate provides the code geometry, state
//! ordering, GF(2) encoder, BEC construction, successive-cancellation
//! decoder, exact polarization-ensemble analysis, and a Monte Carlo
//! block-error simulation harness.

pub mod channel;
pub mod construction;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod geometry;
pub mod polarization;
pub mod sim;
pub mod state;

pub use channel::{bec_transform, transform_pair, DiscreteChannel, ErasureChannel};
pub use construction::{bec_reliabilities, select_info_set, ReliabilityVector};
pub use decoder::{BecSymbol, DecodeResult, DecoderWorkspace};
pub use encoder::{build_generator, encode, encode_message, CodeSpec, GeneratorMatrix};
pub use error::{Error, Result};
pub use geometry::{
    achievable_exponent, code_length, code_lengths, decoding_complexity, dominant_root,
    encoding_complexity, typical_frequencies, MemoryParams,
};
pub use polarization::{evolve_ensemble, BranchEnsemble, ProcessTrace};
pub use sim::{simulate_bler, NoiseModel, TrialReport};
pub use state::{
    assign_states, bit_reversed_order, count_type_classes, ordered_code_indices, to_binary,
    validate_state_vector, OrderedCodeIndex, StateSymbol, StateVector, TypeClassTable,
};
