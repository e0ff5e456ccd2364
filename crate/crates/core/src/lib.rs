//! Pairwise comparison of space-time trellis code generator matrices.
//!
//! Two generator matrices compete either through a many-iteration Monte-Carlo
//! BER simulation, or through a single-iteration microsimulation on a fixed
//! 12-bit elementary frame whose channel draw is accepted or rejected by a
//! small multilayer perceptron.
//!
//! The system is a 2×1 MIMO link with QPSK, a 4-state STTC and quasi-static
//! flat Rayleigh fading.

pub mod benchmark;
pub mod channel;
pub mod code;
pub mod dataset;
mod error;
pub mod microsim;
pub mod mlp;
pub mod rng;
pub mod sim;

pub use channel::{ChannelMatrix, SnrPoint};
pub use code::{BitFrame, GeneratorMatrix, SymbolStreams, Trellis};
pub use dataset::{FeatureVector, LabeledRow};
pub use error::{Error, Result};
pub use microsim::{MicrosimConfig, MicrosimResult, MicrosimStatus};
pub use mlp::{MlpModel, TrainConfig, TrainReport};
pub use sim::{BerCurve, CompetitionRecord, MetricTriple, SnrGrid};
