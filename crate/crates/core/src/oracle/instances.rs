use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::prob::{JointTable, MarginalTable};

/// Independent stream for instance `index` under a 64-bit run seed.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn exponential_weights(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Uniformly distributed point of the simplex on `X × Z` (normalized
/// exponential draws).
pub fn random_joint_table(rng: &mut impl Rng, x_size: usize, z_size: usize) -> JointTable {
    JointTable::new(x_size, z_size, exponential_weights(rng, x_size * z_size)).expect("normalized by construction")
}

pub fn random_map(rng: &mut impl Rng, x_size: usize, s_size: usize) -> Vec<usize> {
    (0..x_size).map(|_| rng.gen_range(0..s_size)).collect()
}

/// Random marginal with 1% uniform mass mixed in, so it covers all of `Z`.
pub fn mixed_reference(rng: &mut impl Rng, z_size: usize) -> MarginalTable {
    let u = 1.0 / z_size as f64;
    let probs = exponential_weights(rng, z_size).into_iter().map(|w| 0.99 * w + 0.01 * u).collect();
    MarginalTable::from_weights(probs).expect("positive weights")
}

/// `{P_Z, uniform, random}` references for the leftover-hash check.
pub fn probe_references(p: &JointTable, rng: &mut impl Rng) -> Vec<MarginalTable> {
    let zs = p.z_size();
    let mut out = Vec::with_capacity(3);
    if let Ok(pz) = p.z_marginal() {
        out.push(pz);
    }
    out.push(MarginalTable::uniform(zs).expect("nonempty"));
    out.push(mixed_reference(rng, zs));
    out
}
