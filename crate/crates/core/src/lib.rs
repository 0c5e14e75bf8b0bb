//! Multilingual phoneme recognition with connectionist temporal
//! classification: a shared bidirectional LSTM encoder feeding one softmax
//! head per language, trained with CTC and portable to unseen languages by
//! retraining a fresh head (encoder frozen) or the whole network.
//!
//! Everything is plain `f64` on the CPU and deterministic given its seeds.

pub mod cli;
pub mod ctc;
pub mod data;
pub mod encoder;
pub mod error;
pub mod model;
pub mod numerics;
pub mod training;

pub use error::{Error, Result};
