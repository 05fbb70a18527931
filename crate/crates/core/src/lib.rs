//! Rotated planar surface code simulation with conventional and recursive
//! minimum-weight perfect-matching decoders.

pub mod code;
pub mod decoder;
pub mod experiment;
pub mod matching;
pub mod noise;
pub mod pauli;

pub use code::{CheckFlavor, CodeLayout, FlavorPair};
pub use decoder::{DecodeOutcome, Decoder, DecoderConfig};
pub use noise::{Bias, CalibrationEntry, NoiseModel, QubitChannel};
pub use pauli::{Pauli, PauliString};
