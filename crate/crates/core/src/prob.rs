//! Finite joint tables, reference marginals, the security distance and the
//! i.i.d./BSC source models.
//!
//! Cells are stored row-major: `index = x * z_size + z`. Every table caches
//! the natural log of each weight, with `-inf` for empty cells.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::real::{KahanSum, Real};

/// Largest number of cells `product_extension` will materialize by default.
pub const DEFAULT_PRODUCT_CAP: u128 = 1 << 20;

/// A finite, possibly sub-normalized, non-negative weight table on `X × Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable<T = f64> {
    x_size: usize,
    z_size: usize,
    weights: Vec<T>,
    log_weights: Vec<T>,
    total: T,
    normalized: bool,
}

impl<T: Real> JointTable<T> {
    pub fn new(x_size: usize, z_size: usize, weights: Vec<T>) -> Result<Self> {
        if x_size == 0 || z_size == 0 {
            return Err(Error::AlphabetMismatch("alphabets must be nonempty".into()));
        }
        if weights.len() != x_size * z_size {
            return Err(Error::AlphabetMismatch(format!(
                "expected {}x{} = {} weights, got {}",
                x_size,
                z_size,
                x_size * z_size,
                weights.len()
            )));
        }
        if let Some((index, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < T::zero()) {
            return Err(Error::InvalidWeight { index, value: w.as_f64() });
        }
        let table = Self::from_weights_unchecked(x_size, z_size, weights);
        if table.total > T::one() + T::mass_tol() {
            return Err(Error::MassExceedsOne(table.total.as_f64()));
        }
        Ok(table)
    }

    pub fn from_fn(x_size: usize, z_size: usize, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        let mut weights = Vec::with_capacity(x_size * z_size);
        for x in 0..x_size {
            for z in 0..z_size {
                weights.push(f(x, z));
            }
        }
        Self::new(x_size, z_size, weights)
    }

    pub(crate) fn from_weights_unchecked(x_size: usize, z_size: usize, weights: Vec<T>) -> Self {
        let log_weights = weights.iter().map(|&w| log_or_neg_inf(w)).collect();
        let mut acc = KahanSum::new();
        for &w in &weights {
            acc.add(w);
        }
        let total = acc.value();
        let normalized = (total - T::one()).abs() <= T::mass_tol();
        Self { x_size, z_size, weights, log_weights, total, normalized }
    }

    /// The uniform distribution on `X × Z`.
    pub fn uniform(x_size: usize, z_size: usize) -> Result<Self> {
        let w = T::one() / T::of((x_size * z_size) as f64);
        Self::new(x_size, z_size, vec![w; x_size * z_size])
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn cells(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn index(&self, x: usize, z: usize) -> usize {
        x * self.z_size + z
    }

    #[inline]
    pub fn weight(&self, x: usize, z: usize) -> T {
        self.weights[self.index(x, z)]
    }

    #[inline]
    pub fn log_weight(&self, x: usize, z: usize) -> T {
        self.log_weights[self.index(x, z)]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[T] {
        &self.log_weights
    }

    pub fn total_mass(&self) -> T {
        self.total
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.total.as_f64()))
        }
    }

    /// Unnormalized Z-marginal `Σ_x P(x, z)`.
    pub fn z_weights(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.z_size];
        for x in 0..self.x_size {
            let row = &self.weights[x * self.z_size..(x + 1) * self.z_size];
            for (acc, &w) in out.iter_mut().zip(row) {
                *acc = *acc + w;
            }
        }
        out
    }

    /// `P_Z` rescaled to a normalized reference distribution.
    pub fn z_marginal(&self) -> Result<MarginalTable<T>> {
        if self.total <= T::zero() {
            return Err(Error::NotNormalized(0.0));
        }
        let total = self.total;
        MarginalTable::new(self.z_weights().into_iter().map(|w| w / total).collect())
    }

    /// A copy rescaled to unit mass.
    pub fn renormalized(&self) -> Result<Self> {
        if self.total <= T::zero() {
            return Err(Error::NotNormalized(0.0));
        }
        let total = self.total;
        Self::new(self.x_size, self.z_size, self.weights.iter().map(|&w| w / total).collect())
    }

    pub fn distance(&self, other: &Self) -> Result<T> {
        if self.x_size != other.x_size || self.z_size != other.z_size {
            return Err(Error::AlphabetMismatch(format!(
                "{}x{} vs {}x{}",
                self.x_size, self.z_size, other.x_size, other.z_size
            )));
        }
        total_variation(&self.weights, &other.weights)
    }
}

fn log_or_neg_inf<T: Real>(w: T) -> T {
    if w > T::zero() {
        w.ln()
    } else {
        T::neg_infinity()
    }
}

#[derive(Serialize, Deserialize)]
struct TableRepr<W> {
    x_size: usize,
    z_size: usize,
    weights: W,
}

impl<T: Real + Serialize> Serialize for JointTable<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TableRepr { x_size: self.x_size, z_size: self.z_size, weights: &self.weights }.serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for JointTable<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = TableRepr::<Vec<T>>::deserialize(deserializer)?;
        JointTable::new(repr.x_size, repr.z_size, repr.weights).map_err(D::Error::custom)
    }
}

/// A normalized distribution on `Z`, used as the reference `R_Z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalTable<T = f64> {
    probs: Vec<T>,
    #[serde(skip)]
    log_probs: Vec<T>,
}

impl<T: Real> MarginalTable<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::AlphabetMismatch("empty marginal".into()));
        }
        if let Some((index, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < T::zero()) {
            return Err(Error::InvalidWeight { index, value: p.as_f64() });
        }
        let total: T = probs.iter().copied().sum();
        if (total - T::one()).abs() > T::mass_tol() {
            return Err(Error::NotNormalized(total.as_f64()));
        }
        let log_probs = probs.iter().map(|&p| log_or_neg_inf(p)).collect();
        Ok(Self { probs, log_probs })
    }

    pub fn uniform(z_size: usize) -> Result<Self> {
        let p = T::one() / T::of(z_size as f64);
        Self::new(vec![p; z_size])
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(weights: Vec<T>) -> Result<Self> {
        let total: T = weights.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::NotNormalized(total.as_f64()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn z_size(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, z: usize) -> T {
        self.probs[z]
    }

    pub fn log_prob(&self, z: usize) -> T {
        self.log_probs[z]
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn in_support(&self, z: usize) -> bool {
        self.probs[z] > T::zero()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len()).filter(|&z| self.in_support(z)).collect()
    }

    pub fn has_full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > T::zero())
    }
}

/// Fails unless `R` lives on the same `Z` and covers the support of `P_Z`.
pub fn check_reference<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>) -> Result<()> {
    if p.z_size() != r.z_size() {
        return Err(Error::AlphabetMismatch(format!("table has |Z| = {}, reference has {}", p.z_size(), r.z_size())));
    }
    for (z, w) in p.z_weights().into_iter().enumerate() {
        if w > T::zero() && !r.in_support(z) {
            return Err(Error::ReferenceSupport { z });
        }
    }
    Ok(())
}

/// Half-L1 distance between two weight vectors on the same alphabet.
pub fn total_variation<T: Real>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::AlphabetMismatch(format!("{} vs {} outcomes", p.len(), q.len())));
    }
    let sum: T = p.iter().zip(q).map(|(&a, &b)| (a - b).abs()).sum();
    Ok(sum / T::of(2.0))
}

/// Distribution of `(f(X), Z)`; `map[x]` is the key assigned to `x`.
pub fn push_forward<T: Real>(map: &[usize], s_size: usize, p: &JointTable<T>) -> Result<JointTable<T>> {
    if map.len() != p.x_size() {
        return Err(Error::AlphabetMismatch(format!(
            "map covers {} inputs, table has |X| = {}",
            map.len(),
            p.x_size()
        )));
    }
    if s_size == 0 {
        return Err(Error::AlphabetMismatch("empty key alphabet".into()));
    }
    if let Some(&s) = map.iter().find(|&&s| s >= s_size) {
        return Err(Error::AlphabetMismatch(format!("key {s} outside |S| = {s_size}")));
    }
    let zs = p.z_size();
    let mut out = vec![T::zero(); s_size * zs];
    for (x, &s) in map.iter().enumerate() {
        let row = &p.weights()[x * zs..(x + 1) * zs];
        for (acc, &w) in out[s * zs..(s + 1) * zs].iter_mut().zip(row) {
            *acc = *acc + w;
        }
    }
    Ok(JointTable::from_weights_unchecked(s_size, zs, out))
}

/// `d(P_SZ, U_S × P_Z)` where `P_Z` is the Z-marginal of `p_sz` itself.
///
/// Defined for sub-normalized tables as well; callers that need the
/// operational quantity use [`security_distance`].
pub fn ideal_distance<T: Real>(p_sz: &JointTable<T>) -> T {
    let s_size = T::of(p_sz.x_size() as f64);
    let pz = p_sz.z_weights();
    let mut acc = T::zero();
    for s in 0..p_sz.x_size() {
        for (z, &m) in pz.iter().enumerate() {
            acc = acc + (p_sz.weight(s, z) - m / s_size).abs();
        }
    }
    acc / T::of(2.0)
}

/// Security distance `d(f | P_XZ)` of the key `f(X)` against `Z`.
pub fn security_distance<T: Real>(map: &[usize], s_size: usize, p: &JointTable<T>) -> Result<T> {
    p.ensure_normalized()?;
    Ok(ideal_distance(&push_forward(map, s_size, p)?))
}

/// Zeroes every cell whose log-likelihood ratio `-ln(P/R)` is at most `threshold`.
pub fn clip_below<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>, threshold: T) -> Result<JointTable<T>> {
    check_reference(p, r)?;
    let zs = p.z_size();
    let weights = p
        .weights()
        .iter()
        .zip(p.log_weights())
        .enumerate()
        .map(|(i, (&w, &lw))| if w > T::zero() && r.log_prob(i % zs) - lw > threshold { w } else { T::zero() })
        .collect();
    Ok(JointTable::from_weights_unchecked(p.x_size(), zs, weights))
}

/// Materializes `P^n` with the default cap of 2^20 cells.
pub fn product_extension<T: Real>(p: &JointTable<T>, n: u32) -> Result<JointTable<T>> {
    product_extension_with_cap(p, n, DEFAULT_PRODUCT_CAP)
}

/// Materializes `P^n`; sequences are indexed most-significant letter first.
pub fn product_extension_with_cap<T: Real>(p: &JointTable<T>, n: u32, cap: u128) -> Result<JointTable<T>> {
    if n == 0 {
        return Err(Error::Parameter("block length must be at least 1".into()));
    }
    let size = (p.cells() as u128).checked_pow(n).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::Size { size, cap });
    }
    let (xs, zs) = (p.x_size(), p.z_size());
    let mut cur_x = xs;
    let mut cur_z = zs;
    let mut cur = p.weights().to_vec();
    for _ in 1..n {
        let (nx, nz) = (cur_x * xs, cur_z * zs);
        let mut next = vec![T::zero(); nx * nz];
        for xo in 0..cur_x {
            for zo in 0..cur_z {
                let wo = cur[xo * cur_z + zo];
                if wo == T::zero() {
                    continue;
                }
                for xn in 0..xs {
                    let base = (xo * xs + xn) * nz + zo * zs;
                    for zn in 0..zs {
                        next[base + zn] = wo * p.weight(xn, zn);
                    }
                }
            }
        }
        cur = next;
        cur_x = nx;
        cur_z = nz;
    }
    Ok(JointTable::from_weights_unchecked(cur_x, cur_z, cur))
}

/// Uniform input bits observed through a binary symmetric channel, `n` uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BscSource {
    q: f64,
    n: u64,
}

impl BscSource {
    pub fn new(q: f64, n: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Parameter(format!("crossover probability {q} outside [0, 1]")));
        }
        if n == 0 {
            return Err(Error::Parameter("block length must be at least 1".into()));
        }
        Ok(Self { q, n })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Crossover folded into `[0, 1/2]`; `q` and `1 - q` are relabelings of each other.
    pub fn folded_q(&self) -> f64 {
        self.q.min(1.0 - self.q)
    }

    /// `P(x, x) = (1 - q)/2`, `P(x, x ⊕ 1) = q/2`.
    pub fn single_letter<T: Real>(&self) -> JointTable<T> {
        let stay = T::of((1.0 - self.q) / 2.0);
        let flip = T::of(self.q / 2.0);
        JointTable::from_weights_unchecked(2, 2, vec![stay, flip, flip, stay])
    }

    pub fn materialize<T: Real>(&self) -> Result<JointTable<T>> {
        let n = u32::try_from(self.n).map_err(|_| Error::Size { size: self.n as u128, cap: DEFAULT_PRODUCT_CAP })?;
        product_extension(&self.single_letter(), n)
    }

    /// Per-letter `H(X|Z) = h(q)` in nats.
    pub fn conditional_entropy(&self) -> f64 {
        binary_entropy(self.q)
    }

    /// Per-letter dispersion `q(1-q) ln²((1-q)/q)`.
    pub fn dispersion(&self) -> f64 {
        let q = self.folded_q();
        if q == 0.0 {
            return 0.0;
        }
        let l = ((1.0 - q) / q).ln();
        q * (1.0 - q) * l * l
    }

    /// `ln(q^{1+θ} + (1-q)^{1+θ})`, the per-letter Rényi log-sum at `R_Z = P_Z`.
    pub fn renyi_log_sum(&self, theta: f64) -> f64 {
        let q = self.folded_q();
        let a = 1.0 + theta;
        (q.powf(a) + (1.0 - q).powf(a)).ln()
    }
}

/// Binary entropy in nats.
pub fn binary_entropy(q: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    term(q) + term(1.0 - q)
}

/// An i.i.d. source either as an explicit table or as a BSC handle.
#[derive(Debug, Clone, PartialEq)]
pub enum IidModel<T = f64> {
    Table(JointTable<T>),
    Bsc(BscSource),
}

impl BscSource {
    /// Materializes when `4^n` fits under `cap`, else keeps the closed-form handle.
    pub fn model<T: Real>(&self, cap: u128) -> IidModel<T> {
        let fits = u32::try_from(self.n).ok().and_then(|n| 4u128.checked_pow(n)).is_some_and(|size| size <= cap);
        if fits {
            IidModel::Table(product_extension_with_cap(&self.single_letter(), self.n as u32, cap).expect("within cap"))
        } else {
            IidModel::Bsc(*self)
        }
    }
}
