use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::instances::{instance_rng, probe_references, random_joint_table};
use super::toeplitz::ToeplitzFamily;
use super::verify::{
    verify_appendix_lemmas, verify_exponential, verify_leftover_with, verify_universal, AppendixConfig, Hooks,
    VerificationReport,
};
use crate::entropy::h_spectral_of;
use crate::error::{Error, Result};
use crate::numeric::{log_binom_cdf, BinomialModel};
use crate::prob::{clip_below, BscSource, JointTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    #[default]
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(Error::Parameter(format!("unknown level '{other}'"))),
        }
    }
}

const RHO_GRID: [f64; 4] = [0.05, 0.1, 0.25, 0.5];
const BSC_QS: [f64; 3] = [0.11, 0.25, 0.4];

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub level: Level,
    pub pass: bool,
    pub reports: Vec<VerificationReport>,
}

struct Limits {
    random_max_m: u32,
    random_tables_per_m: u64,
    appendix_instances: usize,
    appendix_cap: usize,
    universal_max_m: u32,
}

impl Level {
    fn limits(self) -> Limits {
        match self {
            Level::Quick => Limits {
                random_max_m: 4,
                random_tables_per_m: 3,
                appendix_instances: 50,
                appendix_cap: 4,
                universal_max_m: 4,
            },
            Level::Full => Limits {
                random_max_m: 8,
                random_tables_per_m: 4,
                appendix_instances: 200,
                appendix_cap: 8,
                universal_max_m: 8,
            },
        }
    }
}

/// Tables the hash checks run on: BSC products for `n ≤ 4` (plain and
/// clipped to sub-normalized form) and random tables up to `max_m` input bits.
fn hash_cases(seed: u64, limits: &Limits) -> Result<Vec<(String, JointTable)>> {
    let mut cases = Vec::new();
    for q in BSC_QS {
        for n in 1..=4u64 {
            let p: JointTable = BscSource::new(q, n)?.materialize()?;
            let pz = p.z_marginal()?;
            let threshold = h_spectral_of(&p, &pz, 0.3)?.value;
            let clipped = clip_below(&p, &pz, threshold)?;
            cases.push((format!("bsc q={q} n={n}"), p));
            if clipped.total_mass() > 0.0 {
                cases.push((format!("bsc q={q} n={n} clipped"), clipped));
            }
        }
    }
    for m in 1..=limits.random_max_m {
        for t in 0..limits.random_tables_per_m {
            let mut rng = instance_rng(seed, (m as u64) << 32 | t);
            let z_size = 1 + (t as usize % 3);
            cases.push((format!("random m={m} #{t}"), random_joint_table(&mut rng, 1 << m, z_size)));
        }
    }
    Ok(cases)
}

fn hash_checks(seed: u64, limits: &Limits, hooks: &Hooks) -> Result<(VerificationReport, VerificationReport)> {
    let cases = hash_cases(seed, limits)?;
    let results: Vec<Result<(VerificationReport, Option<VerificationReport>)>> = cases
        .par_iter()
        .enumerate()
        .map(|(i, (_, p))| {
            let m = p.x_size().trailing_zeros();
            let mut rng = instance_rng(seed ^ 0x5eed, i as u64);
            let probes = probe_references(p, &mut rng);
            let mut leftover = VerificationReport::new("leftover_hash");
            let mut exponential = None::<VerificationReport>;
            for k in 1..=3 {
                let family = ToeplitzFamily::new(m, k)?;
                leftover.merge(verify_leftover_with(&family, p, &probes, hooks)?);
                if p.is_normalized() {
                    let r = verify_exponential(&family, p, &RHO_GRID)?;
                    match exponential.as_mut() {
                        Some(acc) => acc.merge(r),
                        None => exponential = Some(r),
                    }
                }
            }
            Ok((leftover, exponential))
        })
        .collect();
    let mut leftover = VerificationReport::new("leftover_hash");
    let mut exponential = VerificationReport::new("exponential");
    for r in results {
        let (l, e) = r?;
        leftover.merge(l);
        if let Some(e) = e {
            exponential.merge(e);
        }
    }
    Ok((leftover, exponential))
}

/// Compares the log-space binomial CDF against a plain forward recurrence.
fn binomial_check() -> Result<VerificationReport> {
    let mut report = VerificationReport::new("binomial_cdf");
    for q in [0.11f64, 0.25, 0.5] {
        for n in 1..=30u64 {
            let model = BinomialModel::new(n, q)?;
            let mut term = (1.0 - q).powi(n as i32);
            let mut cdf = 0.0f64;
            for k in 0..=n {
                if k > 0 {
                    term *= (n - k + 1) as f64 / k as f64 * q / (1.0 - q);
                }
                cdf += term;
                let got = log_binom_cdf(&model, k as i64)?.prob();
                let rel = (got - cdf.min(1.0)).abs() / cdf;
                report.instances += 1;
                report.record(1e-10 - rel, 0.0, || json!({ "n": n, "k": k, "q": q, "got": got, "expected": cdf }));
            }
        }
    }
    Ok(report)
}

fn appendix_config(seed: u64, limits: &Limits) -> AppendixConfig {
    AppendixConfig {
        instances: limits.appendix_instances,
        alphabet_cap: limits.appendix_cap,
        eps_grid: vec![1e-9, 0.01, 0.1, 0.3],
        zeta_grid: vec![0.05, 0.1, 0.3],
        seed,
    }
}

/// Runs every exact check at the given level; `pass` is the conjunction.
pub fn verification_suite(seed: u64, level: Level, hooks: &Hooks) -> Result<SuiteReport> {
    let limits = level.limits();
    let mut reports = Vec::new();
    let (leftover, exponential) = hash_checks(seed, &limits, hooks)?;
    reports.push(leftover);
    reports.push(exponential);
    reports.extend(verify_appendix_lemmas(&appendix_config(seed, &limits))?);
    reports.push(binomial_check()?);
    let mut universal = VerificationReport::new("universal_2");
    for m in 1..=limits.universal_max_m {
        for k in 1..=m.min(3) {
            universal.merge(verify_universal(&ToeplitzFamily::new(m, k)?));
        }
    }
    reports.push(universal);
    let pass = reports.iter().all(|r| r.pass);
    Ok(SuiteReport { seed, level, pass, reports })
}
