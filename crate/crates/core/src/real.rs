//! Scalar abstraction shared by the table and entropy code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable for probability tables and entropies.
///
/// `f64` is the working type; `f32` is supported for memory-bound tables at
/// correspondingly looser tolerances.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute slack on total mass when classifying a table as normalized.
    const MASS_TOL: f64;
    /// Relative width within which two log-likelihood atoms are merged.
    const ATOM_TOL: f64;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    fn mass_tol() -> Self {
        Self::of(Self::MASS_TOL)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const MASS_TOL: f64 = 1e-12;
    const ATOM_TOL: f64 = 1e-11;
}

impl Real for f32 {
    const MASS_TOL: f64 = 1e-5;
    const ATOM_TOL: f64 = 1e-5;
}

/// `ln Σ exp(v)` without overflow; empty or all `-inf` input gives `-inf`.
pub fn log_sum_exp<T: Real>(values: impl IntoIterator<Item = T> + Clone) -> T {
    let max = values.clone().into_iter().fold(T::neg_infinity(), |acc, v| if v > acc { v } else { acc });
    if max == T::neg_infinity() {
        return max;
    }
    if max == T::infinity() {
        return max;
    }
    let sum: T = values.into_iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Compensated (Kahan–Babuška) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> KahanSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry = self.carry + ((self.sum - t) + v);
        } else {
            self.carry = self.carry + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}
