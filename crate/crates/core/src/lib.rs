//! Finite-blocklength key-length bounds for privacy amplification.
//!
//! Distributions are dense tables over finite alphabets. All entropies are
//! in nats; bits appear only at the CLI.

pub mod bounds;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod numeric;
pub mod optimize;
pub mod oracle;
pub mod prob;
pub mod real;

pub use bounds::{
    ell_exponential_lower, ell_hybrid_lower, ell_smooth_min_lower, ell_smooth_min_upper, ell_spectral_lower,
    ell_spectral_upper, gaussian_approx, optimal_rz, BoundKind, BoundParams, BoundResult, Source,
};
pub use entropy::{EntropyKind, EntropyValue, SpectrumTable};
pub use error::{Error, Result};
pub use numeric::{LogProb, QuantileConvention};
pub use prob::{BscSource, IidModel, JointTable, MarginalTable};
pub use real::Real;

pub type JointTableF64 = JointTable<f64>;
pub type JointTableF32 = JointTable<f32>;
pub type MarginalTableF64 = MarginalTable<f64>;
pub type MarginalTableF32 = MarginalTable<f32>;
pub type SpectrumTableF64 = SpectrumTable<f64>;
pub type SpectrumTableF32 = SpectrumTable<f32>;
pub type BinomialModelF64 = numeric::BinomialModel<f64>;
pub type BinomialModelF32 = numeric::BinomialModel<f32>;
