//! Conditional entropies relative to a reference marginal `R_Z`.
//!
//! Every quantity is in nats. Cells whose `z` lies outside `supp(R)` never
//! contribute; a source that puts mass there is rejected with
//! [`Error::ReferenceSupport`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{check_reference, JointTable, MarginalTable};
use crate::real::{log_sum_exp, KahanSum, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntropyKind {
    Min,
    /// Order `1 + θ`; `θ = 0` is the conditional Shannon limit.
    Renyi {
        theta: f64,
    },
    Order2,
    Spectral {
        eps: f64,
    },
    SmoothMinBar {
        eps: f64,
    },
    SmoothMin {
        eps: f64,
    },
    Phi {
        rho: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue<T = f64> {
    pub value: T,
    pub kind: EntropyKind,
    /// Set when the source carries no mass, so the value is `+inf` by convention.
    pub empty_source: bool,
}

impl<T: Real> EntropyValue<T> {
    fn new(value: T, kind: EntropyKind) -> Self {
        Self { value, kind, empty_source: false }
    }

    fn empty(kind: EntropyKind) -> Self {
        Self { value: T::infinity(), kind, empty_source: true }
    }
}

/// `(ln P(x,z), ln R(z))` over the cells with positive mass.
fn log_cells<'a, T: Real>(p: &'a JointTable<T>, r: &'a MarginalTable<T>) -> impl Iterator<Item = (T, T)> + Clone + 'a {
    let zs = p.z_size();
    p.log_weights()
        .iter()
        .enumerate()
        .filter(|(_, lw)| **lw > T::neg_infinity())
        .map(move |(i, &lw)| (lw, r.log_prob(i % zs)))
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("θ = {theta} outside (0, 1]")))
    }
}

/// `-ln max P(x,z)/R(z)`.
pub fn h_min<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>) -> Result<EntropyValue<T>> {
    check_reference(p, r)?;
    let max = log_cells(p, r).map(|(lw, lr)| lw - lr).fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return Ok(EntropyValue::empty(EntropyKind::Min));
    }
    Ok(EntropyValue::new(-max, EntropyKind::Min))
}

/// Collision entropy `-ln Σ P(x,z)²/R(z)`.
pub fn h2<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>) -> Result<EntropyValue<T>> {
    check_reference(p, r)?;
    let two = T::of(2.0);
    let ls = log_sum_exp(log_cells(p, r).map(|(lw, lr)| two * lw - lr));
    if ls == T::neg_infinity() {
        return Ok(EntropyValue::empty(EntropyKind::Order2));
    }
    Ok(EntropyValue::new(-ls, EntropyKind::Order2))
}

/// `ln Σ R(z) (P(x,z)/R(z))^{1+θ}` for `θ ∈ [0, 1]`, i.e. `-θ H_{1+θ}`.
///
/// At `θ = 0` this is the log of the total mass, so it vanishes for
/// normalized sources.
pub fn renyi_log_sum<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>, theta: T) -> Result<T> {
    check_reference(p, r)?;
    let a = T::one() + theta;
    Ok(log_sum_exp(log_cells(p, r).map(|(lw, lr)| a * lw - theta * lr)))
}

/// Rényi entropy of order `1 + θ`, `θ ∈ (0, 1]`.
pub fn h_renyi<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>, theta: T) -> Result<EntropyValue<T>> {
    let kind = EntropyKind::Renyi { theta: theta.as_f64() };
    check_theta(theta.as_f64())?;
    let ls = renyi_log_sum(p, r, theta)?;
    if ls == T::neg_infinity() {
        return Ok(EntropyValue::empty(kind));
    }
    Ok(EntropyValue::new(-ls / theta, kind))
}

/// `H(X|Z)` of a normalized table.
pub fn conditional_entropy<T: Real>(p: &JointTable<T>) -> Result<T> {
    p.ensure_normalized()?;
    let log_pz: Vec<T> = p.z_weights().into_iter().map(|w| w.ln()).collect();
    let zs = p.z_size();
    let mut acc = KahanSum::new();
    for (i, (&w, &lw)) in p.weights().iter().zip(p.log_weights()).enumerate() {
        if w > T::zero() {
            acc.add(-w * (lw - log_pz[i % zs]));
        }
    }
    Ok(acc.value())
}

/// The `θ → 0` limit `H(X|Z) - D(P_Z ‖ R)`.
pub fn h1<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>) -> Result<EntropyValue<T>> {
    p.ensure_normalized()?;
    check_reference(p, r)?;
    let h = conditional_entropy(p)?;
    let mut div = KahanSum::new();
    for (z, pz) in p.z_weights().into_iter().enumerate() {
        if pz > T::zero() {
            div.add(pz * (pz.ln() - r.log_prob(z)));
        }
    }
    Ok(EntropyValue::new(h - div.value(), EntropyKind::Renyi { theta: 0.0 }))
}

/// Gallager-type function `ln Σ_z P_Z(z) (Σ_x P(x|z)^{1/(1-ρ)})^{1-ρ}` for
/// `ρ ∈ [0, 1/2]`; exactly zero at `ρ = 0`.
pub fn phi<T: Real>(rho: T, p: &JointTable<T>) -> Result<EntropyValue<T>> {
    let kind = EntropyKind::Phi { rho: rho.as_f64() };
    if !(rho >= T::zero() && rho <= T::of(0.5)) {
        return Err(Error::Parameter(format!("ρ = {rho} outside (0, 1/2]")));
    }
    p.ensure_normalized()?;
    if rho == T::zero() {
        return Ok(EntropyValue::new(T::zero(), kind));
    }
    let keep = T::one() - rho;
    let s = T::one() / keep;
    let zs = p.z_size();
    let pz = p.z_weights();
    let per_z: Vec<T> = (0..zs)
        .filter(|&z| pz[z] > T::zero())
        .map(|z| {
            let lpz = pz[z].ln();
            let inner = log_sum_exp((0..p.x_size()).map(|x| s * (p.log_weight(x, z) - lpz)));
            lpz + keep * inner
        })
        .collect();
    Ok(EntropyValue::new(log_sum_exp(per_z.iter().copied()), kind))
}

/// One atom of the log-likelihood-ratio distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralAtom<T = f64> {
    pub r: T,
    pub mass: T,
}

/// Distribution of `-ln(P(x,z)/R(z))` under `P`, as sorted merged atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable<T = f64> {
    atoms: Vec<SpectralAtom<T>>,
    cumulative: Vec<T>,
}

impl<T: Real> SpectrumTable<T> {
    /// Builds from arbitrary `(r, mass)` pairs; zero masses are dropped and
    /// values within a relative `ATOM_TOL` of their predecessor are merged.
    pub fn from_pairs(mut pairs: Vec<(T, T)>) -> Self {
        pairs.retain(|(_, m)| *m > T::zero());
        pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite log-ratio"));
        let tol = T::of(T::ATOM_TOL);
        let mut atoms: Vec<SpectralAtom<T>> = Vec::new();
        for (r, mass) in pairs {
            match atoms.last_mut() {
                Some(last) if (r - last.r).abs() <= tol * last.r.abs().max(T::one()) => {
                    last.mass = last.mass + mass;
                }
                _ => atoms.push(SpectralAtom { r, mass }),
            }
        }
        let mut acc = KahanSum::new();
        let cumulative = atoms
            .iter()
            .map(|a| {
                acc.add(a.mass);
                acc.value()
            })
            .collect();
        Self { atoms, cumulative }
    }

    pub fn atoms(&self) -> &[SpectralAtom<T>] {
        &self.atoms
    }

    pub fn cumulative(&self, i: usize) -> T {
        self.cumulative[i]
    }

    pub fn total_mass(&self) -> T {
        self.cumulative.last().copied().unwrap_or_else(T::zero)
    }

    /// `P{-ln(P/R) ≤ r}`.
    pub fn mass_at_most(&self, r: T) -> T {
        let idx = self.atoms.partition_point(|a| a.r <= r);
        if idx == 0 {
            T::zero()
        } else {
            self.cumulative[idx - 1]
        }
    }
}

pub fn spectrum<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>) -> Result<SpectrumTable<T>> {
    check_reference(p, r)?;
    let zs = p.z_size();
    let pairs = p
        .weights()
        .iter()
        .zip(p.log_weights())
        .enumerate()
        .filter(|(_, (w, _))| **w > T::zero())
        .map(|(i, (&w, &lw))| (r.log_prob(i % zs) - lw, w))
        .collect();
    Ok(SpectrumTable::from_pairs(pairs))
}

/// Inf-spectral entropy `sup{r : P{-ln(P/R) ≤ r} ≤ ε}`.
///
/// The supremum is the first atom whose cumulative mass strictly exceeds
/// `ε`; it is `+inf` when no atom does.
pub fn h_spectral<T: Real>(spec: &SpectrumTable<T>, eps: T) -> Result<EntropyValue<T>> {
    let kind = EntropyKind::Spectral { eps: eps.as_f64() };
    if !(eps >= T::zero() && eps < T::one()) {
        return Err(Error::Parameter(format!("ε = {eps} outside [0, 1)")));
    }
    if spec.atoms.is_empty() {
        return Ok(EntropyValue::empty(kind));
    }
    let idx = spec.cumulative.partition_point(|&c| c <= eps);
    Ok(match spec.atoms.get(idx) {
        Some(atom) => EntropyValue::new(atom.r, kind),
        None => EntropyValue::new(T::infinity(), kind),
    })
}

pub fn h_spectral_of<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>, eps: T) -> Result<EntropyValue<T>> {
    h_spectral(&spectrum(p, r)?, eps)
}

/// Smallest `t ≥ 0` with `Σ max(0, P(x,z) - t R(z)) ≤ budget`.
///
/// The excess is piecewise linear in `t` with breakpoints at the ratios
/// `P/R`; the root is solved exactly on the bracketing segment.
fn clip_level<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>, budget: T) -> T {
    let zs = p.z_size();
    let mut cells: Vec<(T, T, T)> = p
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > T::zero())
        .map(|(i, &w)| {
            let rz = r.prob(i % zs);
            (w / rz, w, rz)
        })
        .collect();
    cells.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).expect("finite ratio"));
    let mut sp = T::zero();
    let mut sr = T::zero();
    for j in 0..cells.len() {
        let (ratio, w, rz) = cells[j];
        sp = sp + w;
        sr = sr + rz;
        let next = cells.get(j + 1).map_or(T::zero(), |c| c.0);
        if sp - next * sr > budget {
            return ((sp - budget) / sr).max(next).min(ratio);
        }
    }
    T::zero()
}

fn check_radius<T: Real>(eps: T) -> Result<()> {
    if eps >= T::zero() && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("smoothing radius {eps} must be a finite non-negative number")))
    }
}

fn neg_log_level<T: Real>(t: T, kind: EntropyKind) -> EntropyValue<T> {
    if t > T::zero() {
        EntropyValue::new(-t.ln(), kind)
    } else {
        EntropyValue::new(T::infinity(), kind)
    }
}

/// Smooth min-entropy over the sub-normalized ball of radius `ε`.
///
/// The optimum clips `P` at `t·R(z)`; clipping mass `m` costs `m/2` in
/// distance, so the clip budget is `2ε`.
pub fn smooth_hmin_bar<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>, eps: T) -> Result<EntropyValue<T>> {
    check_radius(eps)?;
    check_reference(p, r)?;
    let kind = EntropyKind::SmoothMinBar { eps: eps.as_f64() };
    if p.total_mass() <= T::zero() {
        return Ok(EntropyValue::empty(kind));
    }
    Ok(neg_log_level(clip_level(p, r, T::of(2.0) * eps), kind))
}

/// Smooth min-entropy over the normalized ball of radius `ε`.
///
/// A level `t` is feasible iff the clipped excess is at most `ε` and the
/// headroom below `t·R` can absorb it. With `R` of full support the
/// headroom condition reduces to `t ≥ 1/|X|`; otherwise cells outside
/// `supp(R)` absorb any excess for free.
pub fn smooth_hmin<T: Real>(p: &JointTable<T>, r: &MarginalTable<T>, eps: T) -> Result<EntropyValue<T>> {
    check_radius(eps)?;
    p.ensure_normalized()?;
    check_reference(p, r)?;
    let kind = EntropyKind::SmoothMin { eps: eps.as_f64() };
    let mut t = clip_level(p, r, eps);
    if r.has_full_support() {
        t = t.max(T::one() / T::of(p.x_size() as f64));
    }
    Ok(neg_log_level(t, kind))
}

/// Dispersion `Σ P (−ln P(x|z) − H(X|Z))²`.
pub fn dispersion<T: Real>(p: &JointTable<T>) -> Result<T> {
    let h = conditional_entropy(p)?;
    let log_pz: Vec<T> = p.z_weights().into_iter().map(|w| w.ln()).collect();
    let zs = p.z_size();
    let mut acc = KahanSum::new();
    for (i, (&w, &lw)) in p.weights().iter().zip(p.log_weights()).enumerate() {
        if w > T::zero() {
            let dev = log_pz[i % zs] - lw - h;
            acc.add(w * dev * dev);
        }
    }
    Ok(acc.value())
}

/// Columns of a table grouped by their multiset of conditional
/// probabilities `P(x|z)`, with repeated values merged into counted atoms.
///
/// Product sources have few distinct conditional values per column and
/// many identical columns, so order-`1+θ` sums, `φ(ρ)` and spectra over
/// the profile cost `O(|Z| + atoms)` instead of `O(|X||Z|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalProfile<T = f64> {
    log_pz: Vec<T>,
    group_of: Vec<Option<usize>>,
    /// Per group, `(ln P(x|z), ln count)` sorted by the first entry.
    groups: Vec<Vec<(T, T)>>,
}

fn atoms_close<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> bool {
    let tol = T::of(T::ATOM_TOL);
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.1 == y.1 && (x.0 - y.0).abs() <= tol * x.0.abs().max(T::one()))
}

fn lexicographic<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.0.partial_cmp(&y.0).expect("finite").then(x.1.partial_cmp(&y.1).expect("finite"));
        if o.is_ne() {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

impl<T: Real> ConditionalProfile<T> {
    pub fn new(p: &JointTable<T>) -> Self {
        let zs = p.z_size();
        let tol = T::of(T::ATOM_TOL);
        let log_pz: Vec<T> =
            p.z_weights().into_iter().map(|w| if w > T::zero() { w.ln() } else { T::neg_infinity() }).collect();
        let mut columns: Vec<(usize, Vec<(T, T)>)> = Vec::new();
        let mut lp = Vec::with_capacity(p.x_size());
        for z in 0..zs {
            if log_pz[z] == T::neg_infinity() {
                continue;
            }
            lp.clear();
            lp.extend(
                (0..p.x_size()).map(|x| p.log_weight(x, z)).filter(|&l| l > T::neg_infinity()).map(|l| l - log_pz[z]),
            );
            lp.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
            let mut atoms: Vec<(T, usize)> = Vec::new();
            for &v in &lp {
                match atoms.last_mut() {
                    Some(last) if (v - last.0).abs() <= tol * last.0.abs().max(T::one()) => last.1 += 1,
                    _ => atoms.push((v, 1)),
                }
            }
            columns.push((z, atoms.into_iter().map(|(v, c)| (v, T::of(c as f64).ln())).collect()));
        }
        columns.sort_by(|a, b| lexicographic(&a.1, &b.1));
        let mut group_of = vec![None; zs];
        let mut groups: Vec<Vec<(T, T)>> = Vec::new();
        for (z, atoms) in columns {
            if !groups.last().is_some_and(|g| atoms_close(g, &atoms)) {
                groups.push(atoms);
            }
            group_of[z] = Some(groups.len() - 1);
        }
        Self { log_pz, group_of, groups }
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// `ln Σ_x P(x|z)^a` per group.
    fn group_power_sums(&self, a: T) -> Vec<T> {
        self.groups.iter().map(|g| log_sum_exp(g.iter().map(|&(lp, lc)| lc + a * lp))).collect()
    }

    fn check_reference(&self, r: &MarginalTable<T>) -> Result<()> {
        if r.z_size() != self.log_pz.len() {
            return Err(Error::AlphabetMismatch(format!(
                "reference has |Z| = {}, table has {}",
                r.z_size(),
                self.log_pz.len()
            )));
        }
        match self.group_of.iter().enumerate().find(|(z, g)| g.is_some() && !r.in_support(*z)) {
            Some((z, _)) => Err(Error::ReferenceSupport { z }),
            None => Ok(()),
        }
    }

    /// Same value as [`renyi_log_sum`] on the profiled table.
    pub fn renyi_log_sum(&self, r: &MarginalTable<T>, theta: T) -> Result<T> {
        self.check_reference(r)?;
        let a = T::one() + theta;
        let sums = self.group_power_sums(a);
        Ok(log_sum_exp(
            self.group_of
                .iter()
                .enumerate()
                .filter_map(|(z, g)| g.map(|g| a * self.log_pz[z] - theta * r.log_prob(z) + sums[g])),
        ))
    }

    /// Same value as [`phi`] on the profiled (normalized) table.
    pub fn phi(&self, rho: T) -> Result<T> {
        if !(rho >= T::zero() && rho <= T::of(0.5)) {
            return Err(Error::Parameter(format!("ρ = {rho} outside (0, 1/2]")));
        }
        if rho == T::zero() {
            return Ok(T::zero());
        }
        let keep = T::one() - rho;
        let sums = self.group_power_sums(T::one() / keep);
        Ok(log_sum_exp(
            self.group_of.iter().enumerate().filter_map(|(z, g)| g.map(|g| self.log_pz[z] + keep * sums[g])),
        ))
    }

    /// Log-weights `ln (Σ_x P(x,z)^{1+θ})^{1/(1+θ)}` before normalization.
    pub fn optimal_log_weights(&self, theta: T) -> Vec<T> {
        let a = T::one() + theta;
        let sums = self.group_power_sums(a);
        self.group_of
            .iter()
            .enumerate()
            .map(|(z, g)| g.map_or(T::neg_infinity(), |g| self.log_pz[z] + sums[g] / a))
            .collect()
    }

    /// Same atoms as [`spectrum`] on the profiled table.
    pub fn spectrum(&self, r: &MarginalTable<T>) -> Result<SpectrumTable<T>> {
        self.check_reference(r)?;
        let mut pairs = Vec::new();
        for (z, g) in self.group_of.iter().enumerate() {
            if let Some(g) = g {
                for &(lp, lc) in &self.groups[*g] {
                    let lw = lp + self.log_pz[z];
                    pairs.push((r.log_prob(z) - lw, (lc + lw).exp()));
                }
            }
        }
        Ok(SpectrumTable::from_pairs(pairs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{product_extension, BscSource};

    const Q: f64 = 0.11;

    fn bsc(q: f64) -> (JointTable, MarginalTable) {
        let t = BscSource::new(q, 1).unwrap().single_letter::<f64>();
        let r = t.z_marginal().unwrap();
        (t, r)
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn h_min_examples() {
        let u = JointTable::uniform(2, 2).unwrap();
        close(h_min(&u, &MarginalTable::uniform(2).unwrap()).unwrap().value, 2f64.ln(), 1e-15);
        let point = JointTable::new(1, 1, vec![1.0]).unwrap();
        assert_eq!(h_min(&point, &MarginalTable::uniform(1).unwrap()).unwrap().value, 0.0);
        let (t, r) = bsc(Q);
        close(h_min(&t, &r).unwrap().value, -(0.89f64).ln(), 1e-14);
        close(h_min(&t, &r).unwrap().value, 0.11653, 1e-5);
    }

    #[test]
    fn empty_source_is_flagged_infinite() {
        let z = JointTable::new(2, 1, vec![0.0, 0.0]).unwrap();
        let r = MarginalTable::uniform(1).unwrap();
        let v = h_min(&z, &r).unwrap();
        assert!(v.empty_source && v.value == f64::INFINITY);
        assert!(h2(&z, &r).unwrap().empty_source);
    }

    #[test]
    fn support_violation_is_an_error() {
        let p = JointTable::new(1, 2, vec![0.5, 0.5]).unwrap();
        let r = MarginalTable::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(h_min(&p, &r), Err(Error::ReferenceSupport { z: 1 }));
        assert_eq!(h1(&p, &r), Err(Error::ReferenceSupport { z: 1 }));
    }

    #[test]
    fn h2_examples() {
        let u = JointTable::uniform(5, 1).unwrap();
        close(h2(&u, &MarginalTable::uniform(1).unwrap()).unwrap().value, 5f64.ln(), 1e-14);
        let (t, r) = bsc(Q);
        let v = h2(&t, &r).unwrap().value;
        close(v, -(0.8042f64).ln(), 1e-14);
        close(v, 0.21791, 1e-5);
        assert!(v >= h_min(&t, &r).unwrap().value);
    }

    #[test]
    fn renyi_examples() {
        let (half, rh) = bsc(0.5);
        for theta in [0.1, 0.5, 1.0] {
            close(h_renyi(&half, &rh, theta).unwrap().value, 2f64.ln(), 1e-14);
        }
        let (t, r) = bsc(Q);
        close(h_renyi(&t, &r, 1.0).unwrap().value, h2(&t, &r).unwrap().value, 1e-14);
        let expect = -2.0 * (0.11f64.powf(1.5) + 0.89f64.powf(1.5)).ln();
        close(h_renyi(&t, &r, 0.5).unwrap().value, expect, 1e-14);
        assert!(matches!(h_renyi(&t, &r, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(h_renyi(&t, &r, 1.5), Err(Error::Parameter(_))));
    }

    #[test]
    fn h1_examples() {
        let (t, r) = bsc(Q);
        close(h1(&t, &r).unwrap().value, 0.34652, 1e-5);
        close(h1(&t, &r).unwrap().value, crate::prob::binary_entropy(Q), 1e-14);
        close(h1(&t, &r).unwrap().value, h_renyi(&t, &r, 1e-4).unwrap().value, 1e-4);

        let ind = JointTable::from_fn(3, 2, |_, z| [0.4, 0.6][z] / 3.0).unwrap();
        close(h1(&ind, &ind.z_marginal().unwrap()).unwrap().value, 3f64.ln(), 1e-14);

        // Off-marginal reference subtracts the divergence.
        let skew = MarginalTable::new(vec![0.2, 0.8]).unwrap();
        let d = 0.5 * (0.5f64 / 0.2).ln() + 0.5 * (0.5f64 / 0.8).ln();
        close(h1(&t, &skew).unwrap().value, crate::prob::binary_entropy(Q) - d, 1e-14);
    }

    #[test]
    fn h1_is_the_renyi_limit() {
        let p: JointTable = JointTable::new(2, 3, vec![0.1, 0.05, 0.2, 0.3, 0.15, 0.2]).unwrap();
        let r = MarginalTable::new(vec![0.5, 0.3, 0.2]).unwrap();
        let lim = h1(&p, &r).unwrap().value;
        assert!((h_renyi(&p, &r, 1e-4).unwrap().value - lim).abs() <= 1e-4);
        assert!((h_renyi(&p, &r, 1e-7).unwrap().value - lim).abs() <= 1e-6);
    }

    #[test]
    fn phi_examples() {
        let (t, _) = bsc(Q);
        assert_eq!(phi(0.0, &t).unwrap().value, 0.0);
        assert!(phi(1e-9, &t).unwrap().value.abs() < 1e-8);
        for rho in [0.1, 0.25, 0.5] {
            let s = 1.0 / (1.0 - rho);
            let expect = (1.0 - rho) * (Q.powf(s) + (1.0 - Q).powf(s)).ln();
            close(phi(rho, &t).unwrap().value, expect, 1e-14);
            // ρ = θ/(1+θ) with θ = ρ/(1-ρ).
            let theta = rho / (1.0 - rho);
            let h = h_renyi(&t, &t.z_marginal().unwrap(), theta).unwrap().value;
            close(phi(rho, &t).unwrap().value, -(theta / (1.0 + theta)) * h, 1e-14);
        }
        assert!(phi(0.6, &t).is_err());
        assert!(phi(-0.1, &t).is_err());
    }

    #[test]
    fn spectrum_examples() {
        let ind = JointTable::from_fn(4, 2, |_, z| [0.3, 0.7][z] / 4.0).unwrap();
        let s = spectrum(&ind, &ind.z_marginal().unwrap()).unwrap();
        assert_eq!(s.atoms().len(), 1);
        close(s.atoms()[0].r, 4f64.ln(), 1e-14);
        close(s.atoms()[0].mass, 1.0, 1e-14);

        let (t, r) = bsc(Q);
        let s = spectrum(&t, &r).unwrap();
        assert_eq!(s.atoms().len(), 2);
        close(s.atoms()[0].r, -(1.0 - Q).ln(), 1e-14);
        close(s.atoms()[0].mass, 1.0 - Q, 1e-15);
        close(s.atoms()[1].r, -Q.ln(), 1e-14);
        close(s.atoms()[1].mass, Q, 1e-15);

        let t2 = product_extension(&t, 2).unwrap();
        let s2 = spectrum(&t2, &t2.z_marginal().unwrap()).unwrap();
        let masses: Vec<f64> = s2.atoms().iter().map(|a| a.mass).collect();
        assert_eq!(masses.len(), 3);
        close(masses[0], 0.89 * 0.89, 1e-14);
        close(masses[1], 2.0 * 0.11 * 0.89, 1e-14);
        close(masses[2], 0.11 * 0.11, 1e-14);
    }

    #[test]
    fn h_spectral_examples() {
        let ind = JointTable::from_fn(3, 1, |_, _| 1.0 / 3.0).unwrap();
        let r1 = MarginalTable::uniform(1).unwrap();
        close(h_spectral_of(&ind, &r1, 0.3).unwrap().value, 3f64.ln(), 1e-14);

        let (t, r) = bsc(Q);
        close(h_spectral_of(&t, &r, 0.05).unwrap().value, -(0.89f64).ln(), 1e-14);
        close(h_spectral_of(&t, &r, 0.95).unwrap().value, -(0.11f64).ln(), 1e-14);
        close(h_spectral_of(&t, &r, 0.95).unwrap().value, 2.2073, 1e-4);
        assert!(h_spectral_of(&t, &r, 1.0).is_err());

        // Sub-normalized: nothing exceeds ε.
        let sub = JointTable::new(2, 1, vec![0.2, 0.1]).unwrap();
        assert_eq!(h_spectral_of(&sub, &r1, 0.5).unwrap().value, f64::INFINITY);
    }

    #[test]
    fn h_spectral_boundary_is_strict() {
        // Cumulative exactly equal to ε does not stop the scan.
        let p = JointTable::new(2, 1, vec![0.5, 0.5 - 1e-3]).unwrap();
        let s = SpectrumTable::from_pairs(vec![(1.0, 0.25), (2.0, 0.75)]);
        assert_eq!(h_spectral(&s, 0.25).unwrap().value, 2.0);
        assert_eq!(h_spectral(&s, 0.2499).unwrap().value, 1.0);
        assert!(h_spectral_of(&p, &MarginalTable::uniform(1).unwrap(), 0.0).is_ok());
    }

    #[test]
    fn smooth_bar_examples() {
        let point = JointTable::new(1, 1, vec![1.0]).unwrap();
        let r1 = MarginalTable::uniform(1).unwrap();
        for eps in [0.0, 0.05, 0.2, 0.4] {
            close(smooth_hmin_bar(&point, &r1, eps).unwrap().value, -(1.0 - 2.0 * eps).ln(), 1e-14);
        }
        let m = 3.0;
        let u = JointTable::uniform(3, 1).unwrap();
        for eps in [0.01, 0.1, 0.3] {
            close(smooth_hmin_bar(&u, &r1, eps).unwrap().value, (m / (1.0 - 2.0 * eps)).ln(), 1e-14);
        }
        let (t, r) = bsc(Q);
        close(smooth_hmin_bar(&t, &r, 0.0).unwrap().value, h_min(&t, &r).unwrap().value, 1e-14);
        assert_eq!(smooth_hmin_bar(&point, &r1, 0.5).unwrap().value, f64::INFINITY);
        assert!(smooth_hmin_bar(&point, &r1, -0.1).is_err());
    }

    #[test]
    fn smooth_normalized_examples() {
        let (t, r) = bsc(Q);
        close(smooth_hmin(&t, &r, 0.0).unwrap().value, h_min(&t, &r).unwrap().value, 1e-14);
        for eps in [0.01, 0.1, 0.3] {
            let a = smooth_hmin(&t, &r, eps).unwrap().value;
            let b = smooth_hmin_bar(&t, &r, eps).unwrap().value;
            assert!(a <= b + 1e-14);
        }
        // The normalized ball can never beat the uniform conditional.
        close(smooth_hmin(&t, &r, 0.9).unwrap().value, 2f64.ln(), 1e-14);
        // Hand solution: clip the two heavy cells (ratio 0.89) down to t with 2(0.445 - t/2) = ε.
        close(smooth_hmin(&t, &r, 0.1).unwrap().value, -(0.79f64).ln(), 1e-14);
    }

    #[test]
    fn dispersion_examples() {
        let det = JointTable::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(dispersion(&det).unwrap(), 0.0);
        let (t, _) = bsc(Q);
        let l = (0.89f64 / 0.11).ln();
        close(dispersion(&t).unwrap(), 0.11 * 0.89 * l * l, 1e-14);
        close(dispersion(&t).unwrap(), 0.42794, 1e-5);
        assert!(dispersion(&bsc(0.5).0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn profile_compresses_products() {
        let p: JointTable = BscSource::new(Q, 8).unwrap().materialize().unwrap();
        let prof = ConditionalProfile::new(&p);
        assert_eq!(prof.group_count(), 1);
        assert_eq!(prof.groups[0].len(), 9);
    }

    #[test]
    fn profile_matches_direct_sums() {
        let tables: Vec<JointTable> = vec![
            BscSource::new(0.2, 5).unwrap().materialize().unwrap(),
            JointTable::new(3, 3, vec![0.1, 0.05, 0.0, 0.3, 0.15, 0.0, 0.2, 0.1, 0.1]).unwrap(),
            JointTable::new(2, 2, vec![0.25, 0.25, 0.25, 0.25]).unwrap(),
        ];
        for p in &tables {
            let prof = ConditionalProfile::new(p);
            let pz = p.z_marginal().unwrap();
            for theta in [0.0, 0.1, 0.5, 1.0] {
                let want = renyi_log_sum(p, &pz, theta).unwrap();
                close(prof.renyi_log_sum(&pz, theta).unwrap(), want, 1e-12);
            }
            for rho in [0.0, 0.05, 0.3, 0.5] {
                close(prof.phi(rho).unwrap(), phi(rho, p).unwrap().value, 1e-12);
            }
            let a = spectrum(p, &pz).unwrap();
            let b = prof.spectrum(&pz).unwrap();
            assert_eq!(a.atoms().len(), b.atoms().len());
            for (x, y) in a.atoms().iter().zip(b.atoms()) {
                close(x.r, y.r, 1e-12);
                close(x.mass, y.mass, 1e-12);
            }
        }
    }
}
