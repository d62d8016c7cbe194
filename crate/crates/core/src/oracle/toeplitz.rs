use crate::error::{Error, Result};

/// All `k × m` binary Toeplitz matrices acting on `m`-bit inputs over GF(2).
///
/// A seed of `m + k − 1` bits fixes the matrix: entry `(i, j)` is seed bit
/// `i + m − 1 − j`, so every diagonal is constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToeplitzFamily {
    m: u32,
    k: u32,
}

impl ToeplitzFamily {
    pub fn new(m: u32, k: u32) -> Result<Self> {
        if m == 0 || m > 24 || k > 24 {
            return Err(Error::Parameter(format!("unsupported Toeplitz shape m = {m}, k = {k}")));
        }
        Ok(Self { m, k })
    }

    pub fn input_bits(&self) -> u32 {
        self.m
    }

    pub fn output_bits(&self) -> u32 {
        self.k
    }

    pub fn input_size(&self) -> usize {
        1 << self.m
    }

    pub fn output_size(&self) -> usize {
        1 << self.k
    }

    fn seed_bits(&self) -> u32 {
        (self.m + self.k).saturating_sub(1)
    }

    pub fn size(&self) -> u64 {
        1 << self.seed_bits()
    }

    /// Row `i` as an `m`-bit mask.
    pub fn rows(&self, seed: u64) -> Vec<u64> {
        (0..self.k)
            .map(|i| {
                (0..self.m).fold(0u64, |row, j| {
                    let bit = (seed >> (i + self.m - 1 - j)) & 1;
                    row | (bit << j)
                })
            })
            .collect()
    }

    fn hash_with(rows: &[u64], x: u64) -> usize {
        rows.iter().enumerate().fold(0usize, |s, (i, &row)| s | ((((row & x).count_ones() & 1) as usize) << i))
    }

    pub fn apply(&self, seed: u64, x: u64) -> usize {
        Self::hash_with(&self.rows(seed), x)
    }

    /// `f_seed(x)` for every input `x`.
    pub fn map(&self, seed: u64) -> Vec<usize> {
        let rows = self.rows(seed);
        (0..self.input_size() as u64).map(|x| Self::hash_with(&rows, x)).collect()
    }

    /// Largest fraction of members under which two distinct inputs collide,
    /// by enumeration of every member and every pair.
    pub fn max_collision_fraction(&self) -> f64 {
        let maps: Vec<Vec<usize>> = (0..self.size()).map(|s| self.map(s)).collect();
        let n = self.input_size();
        let mut worst = 0u64;
        for x in 0..n {
            for y in x + 1..n {
                let hits = maps.iter().filter(|f| f[x] == f[y]).count() as u64;
                worst = worst.max(hits);
            }
        }
        worst as f64 / self.size() as f64
    }
}
