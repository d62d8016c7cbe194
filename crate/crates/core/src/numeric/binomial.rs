use crate::error::{Error, Result};
use crate::real::{KahanSum, Real};

/// Terms this far (in nats) below the largest summand are dropped. The pmf
/// is log-concave, so every term beyond the first such one is smaller still.
const TAIL_CUTOFF: f64 = 60.0;

/// `Binomial(n, q)` with a cached table of `ln j!` for `j ≤ n`.
#[derive(Debug, Clone)]
pub struct BinomialModel<T = f64> {
    n: u64,
    q: T,
    log_q: T,
    log_1mq: T,
    log_fact: Vec<T>,
}

impl<T: Real> BinomialModel<T> {
    pub fn new(n: u64, q: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("binomial model needs n ≥ 1".into()));
        }
        if !(q > T::zero() && q < T::one()) {
            return Err(Error::Parameter(format!("q = {q} outside (0, 1)")));
        }
        let mut log_fact = Vec::with_capacity(n as usize + 1);
        let mut acc = KahanSum::new();
        log_fact.push(T::zero());
        for j in 1..=n {
            acc.add(T::of(j as f64).ln());
            log_fact.push(acc.value());
        }
        Ok(Self { n, q, log_q: q.ln(), log_1mq: (-q).ln_1p(), log_fact })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn log_pmf(&self, j: u64) -> T {
        let n = self.n as usize;
        let j = j as usize;
        let jf = T::of(j as f64);
        let rest = T::of((n - j) as f64);
        self.log_fact[n] - self.log_fact[j] - self.log_fact[n - j] + jf * self.log_q + rest * self.log_1mq
    }

    fn mode(&self) -> u64 {
        let m = (T::of((self.n + 1) as f64) * self.q).floor().to_u64().unwrap_or(0);
        m.min(self.n)
    }
}

/// Natural log of a probability.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb<T = f64>(pub T);

impl<T: Real> LogProb<T> {
    pub fn value(self) -> T {
        self.0
    }

    pub fn prob(self) -> T {
        self.0.exp()
    }
}

/// `ln B(n, q, k) = ln Σ_{j ≤ k} C(n,j) q^j (1-q)^{n-j}`; `k = -1` gives `-inf`.
///
/// Summation is anchored at the largest term and only ever adds positive
/// terms, so there is no complementary subtraction at small tails.
pub fn log_binom_cdf<T: Real>(model: &BinomialModel<T>, k: i64) -> Result<LogProb<T>> {
    if k < -1 || k > model.n as i64 {
        return Err(Error::Range(format!("k = {k} outside [-1, {}]", model.n)));
    }
    if k == -1 {
        return Ok(LogProb(T::neg_infinity()));
    }
    let k = k as u64;
    if k == model.n {
        return Ok(LogProb(T::zero()));
    }
    let peak = k.min(model.mode());
    let anchor = model.log_pmf(peak);
    let cutoff = T::of(TAIL_CUTOFF);
    let mut acc = KahanSum::new();
    for j in (0..=peak).rev() {
        let d = model.log_pmf(j) - anchor;
        if d < -cutoff {
            break;
        }
        acc.add(d.exp());
    }
    for j in peak + 1..=k {
        let d = model.log_pmf(j) - anchor;
        if d < -cutoff {
            break;
        }
        acc.add(d.exp());
    }
    Ok(LogProb((anchor + acc.value().ln()).min(T::zero())))
}

/// Which side of the `B(k) ≤ ε` boundary the quantile reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantileConvention {
    /// `min{k : B(k) > ε}`, the first count whose cumulative exceeds `ε`.
    #[default]
    FirstExceeding,
    /// `max{k ≥ -1 : B(k) ≤ ε}`, one less than the default.
    LastWithin,
}

/// `1 + max{k ≥ -1 : B(n, q, k) ≤ ε}` for `ε ∈ (0, 1)`.
pub fn binom_cdf_inverse<T: Real>(model: &BinomialModel<T>, eps: T) -> Result<i64> {
    binom_cdf_inverse_with(model, eps, QuantileConvention::FirstExceeding)
}

pub fn binom_cdf_inverse_with<T: Real>(
    model: &BinomialModel<T>,
    eps: T,
    convention: QuantileConvention,
) -> Result<i64> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::Range(format!("ε = {eps} outside (0, 1)")));
    }
    // Invariant: B(lo) ≤ ε < B(hi).
    let mut lo = -1i64;
    let mut hi = model.n as i64;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if log_binom_cdf(model, mid)?.prob() <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(match convention {
        QuantileConvention::FirstExceeding => hi,
        QuantileConvention::LastWithin => lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_examples() {
        let m = BinomialModel::new(10, 0.5).unwrap();
        assert_eq!(log_binom_cdf(&m, 10).unwrap().value(), 0.0);
        assert_eq!(log_binom_cdf(&m, -1).unwrap().value(), f64::NEG_INFINITY);
        let l5 = log_binom_cdf(&m, 5).unwrap().value();
        assert!((l5 - (638.0f64 / 1024.0).ln()).abs() < 1e-14);
        let l4 = log_binom_cdf(&m, 4).unwrap().value();
        assert!((l4 - (386.0f64 / 1024.0).ln()).abs() < 1e-14);
        assert!(log_binom_cdf(&m, 11).is_err());
        assert!(log_binom_cdf(&m, -2).is_err());
    }

    #[test]
    fn quantile_examples() {
        let m = BinomialModel::new(10, 0.5).unwrap();
        assert_eq!(binom_cdf_inverse(&m, 0.5).unwrap(), 5);
        assert_eq!(binom_cdf_inverse_with(&m, 0.5, QuantileConvention::LastWithin).unwrap(), 4);

        let m = BinomialModel::new(20, 0.11).unwrap();
        let p0 = 0.89f64.powi(20);
        assert_eq!(binom_cdf_inverse(&m, p0 * 0.5).unwrap(), 0);

        // ε = 1 - q^n/2 lies strictly between B(n-1) = 1 - q^n and 1.
        let m = BinomialModel::new(6, 0.25).unwrap();
        assert_eq!(binom_cdf_inverse(&m, 1.0 - 0.25f64.powi(6) / 2.0).unwrap(), 6);

        assert!(binom_cdf_inverse(&m, 0.0).is_err());
        assert!(binom_cdf_inverse(&m, 1.0).is_err());
    }

    #[test]
    fn cdf_is_monotone_at_large_n() {
        let m = BinomialModel::new(1_000_000, 0.11).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in (100_000..120_000).step_by(97) {
            let v = log_binom_cdf(&m, k).unwrap().value();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn deep_tail_quantile_is_sane() {
        let n = 1_000_000u64;
        let m = BinomialModel::new(n, 0.11).unwrap();
        let k = binom_cdf_inverse(&m, 1e-10).unwrap();
        // Gaussian estimate nq + Φ⁻¹(1e-10)·sqrt(nq(1-q)) ≈ 108009.
        let approx = 110_000.0 - 6.3613 * (n as f64 * 0.11 * 0.89).sqrt();
        assert!((k as f64 - approx).abs() < 50.0, "{k}");
        assert!(log_binom_cdf(&m, k - 1).unwrap().prob() <= 1e-10);
        assert!(log_binom_cdf(&m, k).unwrap().prob() > 1e-10);
    }

    #[test]
    fn half_symmetry() {
        for n in 1..=30u64 {
            let m = BinomialModel::new(n, 0.5f64).unwrap();
            for k in 0..n as i64 {
                let a = log_binom_cdf(&m, k).unwrap().prob();
                let b = log_binom_cdf(&m, n as i64 - k - 1).unwrap().prob();
                assert!((a + b - 1.0).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn round_trip_small_n() {
        for q in [0.11, 0.25, 0.5] {
            for n in 1..=30u64 {
                let m = BinomialModel::new(n, q).unwrap();
                for k in 0..n as i64 {
                    let p = log_binom_cdf(&m, k).unwrap().prob();
                    let next = log_binom_cdf(&m, k + 1).unwrap().prob();
                    if p >= 1.0 || next <= p {
                        continue;
                    }
                    assert_eq!(binom_cdf_inverse(&m, p).unwrap(), k + 1, "q={q} n={n} k={k}");
                }
            }
        }
    }
}
