use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::instances::{instance_rng, mixed_reference, random_joint_table, random_map};
use super::toeplitz::ToeplitzFamily;
use crate::entropy::{h2, h_spectral_of, phi, smooth_hmin, smooth_hmin_bar, EntropyValue};
use crate::error::{Error, Result};
use crate::prob::{push_forward, JointTable, MarginalTable};

/// Elementary accumulations (members × |X| × |Z|) allowed per exact call.
pub const WORK_CAP: u128 = 1 << 26;

/// Floating-point slack granted to inequalities that hold exactly in theory.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub lemma: String,
    pub instances: usize,
    pub min_slack: f64,
    pub worst_instance: Option<Value>,
    pub pass: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub sampled: bool,
}

impl VerificationReport {
    pub fn new(lemma: impl Into<String>) -> Self {
        Self {
            lemma: lemma.into(),
            instances: 0,
            min_slack: f64::INFINITY,
            worst_instance: None,
            pass: true,
            sampled: false,
        }
    }

    /// Records one inequality check `slack ≥ -allowance`.
    pub fn record(&mut self, slack: f64, allowance: f64, instance: impl FnOnce() -> Value) {
        let ok = slack >= -allowance;
        if slack < self.min_slack || (!ok && self.pass) {
            self.min_slack = self.min_slack.min(slack);
            if !ok || self.pass {
                self.worst_instance = Some(instance());
            }
        }
        self.pass &= ok;
    }

    /// Folds another report on the same lemma into this one.
    pub fn merge(&mut self, other: VerificationReport) {
        self.instances += other.instances;
        if other.min_slack < self.min_slack || (!other.pass && self.pass) {
            self.worst_instance = other.worst_instance;
        }
        self.min_slack = self.min_slack.min(other.min_slack);
        self.pass &= other.pass;
        self.sampled |= other.sampled;
    }
}

/// Exact (or stride-sampled) average of `d(f | P_XZ)` over a hash family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedDistance {
    pub mean: f64,
    pub min: f64,
    pub argmin_seed: u64,
    pub members: u64,
    pub sampled: bool,
    /// Standard error of the mean when sampled, zero otherwise.
    pub std_error: f64,
}

fn family_work(family: &ToeplitzFamily, p: &JointTable) -> u128 {
    family.size() as u128 * p.x_size() as u128 * p.z_size() as u128
}

fn check_input_alphabet(family: &ToeplitzFamily, p: &JointTable) -> Result<()> {
    if p.x_size() != family.input_size() {
        return Err(Error::AlphabetMismatch(format!(
            "table has |X| = {}, family expects 2^{}",
            p.x_size(),
            family.input_bits()
        )));
    }
    Ok(())
}

/// `d(P_SZ, U_S × P_Z)` for one member without materializing `P_SZ` as a table.
fn member_distance(p: &JointTable, map: &[usize], s_size: usize, pz: &[f64], buf: &mut Vec<f64>) -> f64 {
    let zs = p.z_size();
    buf.clear();
    buf.resize(s_size * zs, 0.0);
    for (x, &s) in map.iter().enumerate() {
        let row = &p.weights()[x * zs..(x + 1) * zs];
        for (acc, &w) in buf[s * zs..(s + 1) * zs].iter_mut().zip(row) {
            *acc += w;
        }
    }
    let inv = 1.0 / s_size as f64;
    let sum: f64 = buf.iter().enumerate().map(|(i, &v)| (v - pz[i % zs] * inv).abs()).sum();
    sum / 2.0
}

fn distances_over(family: &ToeplitzFamily, p: &JointTable, seeds: &[u64]) -> Vec<f64> {
    let pz = p.z_weights();
    let s_size = family.output_size();
    seeds
        .par_chunks(64)
        .flat_map_iter(|chunk| {
            let mut buf = Vec::new();
            chunk.iter().map(|&seed| member_distance(p, &family.map(seed), s_size, &pz, &mut buf)).collect::<Vec<_>>()
        })
        .collect()
}

fn summarize(seeds: &[u64], d: &[f64], sampled: bool) -> ExpectedDistance {
    let count = d.len() as f64;
    let mean = d.iter().sum::<f64>() / count;
    let (argmin, min) =
        d.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let std_error = if sampled && d.len() > 1 {
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    ExpectedDistance { mean, min, argmin_seed: seeds[argmin], members: d.len() as u64, sampled, std_error }
}

/// Exact `E_F[d(F | P_XZ)]` over every member of the family.
///
/// Accepts sub-normalized tables, for which the distance is taken against
/// `U_S × P_Z` with the table's own (sub-normalized) `P_Z`.
pub fn expected_security_distance(family: &ToeplitzFamily, p: &JointTable) -> Result<ExpectedDistance> {
    check_input_alphabet(family, p)?;
    let work = family_work(family, p);
    if work > WORK_CAP {
        return Err(Error::Size { size: work, cap: WORK_CAP });
    }
    let seeds: Vec<u64> = (0..family.size()).collect();
    let d = distances_over(family, p, &seeds);
    Ok(summarize(&seeds, &d, false))
}

/// Like [`expected_security_distance`], but above `cap` evaluates every
/// `stride`-th member only and marks the result as sampled.
pub fn sampled_security_distance(family: &ToeplitzFamily, p: &JointTable, cap: u128) -> Result<ExpectedDistance> {
    check_input_alphabet(family, p)?;
    let work = family_work(family, p);
    if work <= cap {
        let seeds: Vec<u64> = (0..family.size()).collect();
        let d = distances_over(family, p, &seeds);
        return Ok(summarize(&seeds, &d, false));
    }
    let per_member = (p.x_size() * p.z_size()) as u128;
    let budget = (cap / per_member).max(2) as u64;
    let stride = family.size().div_ceil(budget);
    let seeds: Vec<u64> = (0..family.size()).step_by(stride as usize).collect();
    let d = distances_over(family, p, &seeds);
    Ok(summarize(&seeds, &d, true))
}

/// Entropy routines the verifiers call; swappable so mutation tests can
/// confirm a broken implementation is caught.
#[derive(Clone, Copy)]
pub struct Hooks {
    pub h2: fn(&JointTable, &MarginalTable) -> Result<EntropyValue>,
}

impl Default for Hooks {
    fn default() -> Self {
        Self { h2 }
    }
}

fn allowance(e: &ExpectedDistance) -> f64 {
    if e.sampled {
        3.0 * e.std_error
    } else {
        CHECK_TOLERANCE
    }
}

/// Checks `E_F[d] ≤ ½ sqrt(|S| e^{−H₂(P|R)})` for every probe reference.
pub fn verify_leftover(
    family: &ToeplitzFamily,
    p: &JointTable,
    probes: &[MarginalTable],
) -> Result<VerificationReport> {
    verify_leftover_with(family, p, probes, &Hooks::default())
}

pub fn verify_leftover_with(
    family: &ToeplitzFamily,
    p: &JointTable,
    probes: &[MarginalTable],
    hooks: &Hooks,
) -> Result<VerificationReport> {
    let e = sampled_security_distance(family, p, WORK_CAP)?;
    let s = family.output_size() as f64;
    let mut report = VerificationReport::new("leftover_hash");
    report.sampled = e.sampled;
    for r in probes {
        let h = (hooks.h2)(p, r)?.value;
        let rhs = 0.5 * (s * (-h).exp()).sqrt();
        report.instances += 1;
        report.record(rhs - e.mean, allowance(&e), || {
            json!({ "table": p, "reference": r, "output_bits": family.output_bits(), "expected_distance": e.mean, "bound": rhs })
        });
    }
    Ok(report)
}

/// Checks `E_F[d] ≤ (3/2) |S|^ρ e^{φ(ρ)}` at each grid point.
pub fn verify_exponential(family: &ToeplitzFamily, p: &JointTable, rho_grid: &[f64]) -> Result<VerificationReport> {
    p.ensure_normalized()?;
    let e = sampled_security_distance(family, p, WORK_CAP)?;
    let s = family.output_size() as f64;
    let mut report = VerificationReport::new("exponential");
    report.sampled = e.sampled;
    for &rho in rho_grid {
        let rhs = 1.5 * s.powf(rho) * phi(rho, p)?.value.exp();
        report.instances += 1;
        report.record(rhs - e.mean, allowance(&e), || {
            json!({ "table": p, "rho": rho, "output_bits": family.output_bits(), "expected_distance": e.mean, "bound": rhs })
        });
    }
    Ok(report)
}

/// Universal-2 collision property, checked over every pair and member.
pub fn verify_universal(family: &ToeplitzFamily) -> VerificationReport {
    let mut report = VerificationReport::new("universal_2");
    let limit = 1.0 / family.output_size() as f64;
    let worst = family.max_collision_fraction();
    report.instances = 1;
    report.record(limit - worst, 0.0, || {
        json!({ "input_bits": family.input_bits(), "output_bits": family.output_bits(), "collision_fraction": worst })
    });
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixConfig {
    pub instances: usize,
    /// Largest `|X|` and `|Z|` drawn; at most 8.
    pub alphabet_cap: usize,
    pub eps_grid: Vec<f64>,
    pub zeta_grid: Vec<f64>,
    pub seed: u64,
}

fn finite_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        a - b
    }
}

/// Monotonicity of the smooth min-entropy under hashing, and the two
/// smooth-min/spectral comparisons, on random instances.
///
/// Returns one report per lemma: `monotonicity`, `spectral_direct`,
/// `spectral_converse`.
pub fn verify_appendix_lemmas(config: &AppendixConfig) -> Result<Vec<VerificationReport>> {
    if !(2..=8).contains(&config.alphabet_cap) {
        return Err(Error::Parameter(format!("alphabet cap {} outside [2, 8]", config.alphabet_cap)));
    }
    let per_instance: Vec<Result<[VerificationReport; 3]>> =
        (0..config.instances).into_par_iter().map(|i| check_instance(config, i as u64)).collect();
    let mut out = [
        VerificationReport::new("monotonicity"),
        VerificationReport::new("spectral_direct"),
        VerificationReport::new("spectral_converse"),
    ];
    for reports in per_instance {
        for (acc, r) in out.iter_mut().zip(reports?) {
            acc.merge(r);
        }
    }
    Ok(out.into())
}

fn check_instance(config: &AppendixConfig, index: u64) -> Result<[VerificationReport; 3]> {
    let mut rng = instance_rng(config.seed, index);
    let cap = config.alphabet_cap;
    let x_size = rng.gen_range(2..=cap);
    let z_size = rng.gen_range(1..=cap);
    let p = random_joint_table(&mut rng, x_size, z_size);
    let s_size = rng.gen_range(1..=x_size);
    let map = random_map(&mut rng, x_size, s_size);
    let p_sz = push_forward(&map, s_size, &p)?;
    let pz = p.z_marginal()?;
    let references = [pz.clone(), mixed_reference(&mut rng, z_size)];
    let dump = |r: &MarginalTable, eps: f64, zeta: Option<f64>| json!({ "index": index, "table": p, "map": map, "key_size": s_size, "reference": r, "eps": eps, "zeta": zeta });

    let mut mono = VerificationReport::new("monotonicity");
    let mut direct = VerificationReport::new("spectral_direct");
    let mut converse = VerificationReport::new("spectral_converse");
    mono.instances = 1;
    direct.instances = 1;
    converse.instances = 1;

    for &eps in &config.eps_grid {
        for r in &references {
            let slack = finite_gap(smooth_hmin(&p, r, eps)?.value, smooth_hmin(&p_sz, r, eps)?.value);
            mono.record(slack, CHECK_TOLERANCE, || dump(r, eps, None));

            let slack = finite_gap(smooth_hmin_bar(&p, r, eps / 2.0)?.value, h_spectral_of(&p, r, eps)?.value);
            direct.record(slack, CHECK_TOLERANCE, || dump(r, eps, None));
        }
        let h_eps = smooth_hmin(&p, &pz, eps)?.value;
        for &zeta in &config.zeta_grid {
            if !(zeta > 0.0 && eps + zeta < 1.0) {
                continue;
            }
            let rhs = h_spectral_of(&p, &pz, eps + zeta)?.value - zeta.ln();
            converse.record(finite_gap(rhs, h_eps), CHECK_TOLERANCE, || dump(&pz, eps, Some(zeta)));
        }
    }
    Ok([mono, direct, converse])
}
