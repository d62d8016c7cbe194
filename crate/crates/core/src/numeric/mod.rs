//! Tail-accurate binomial and Gaussian distribution functions.

mod binomial;
mod normal;

pub use binomial::{
    binom_cdf_inverse, binom_cdf_inverse_with, log_binom_cdf, BinomialModel, LogProb, QuantileConvention,
};
pub use normal::{normal_cdf, normal_pdf, normal_quantile};
