//! Path storage and reproducible simulation of independent walks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{logistic_pair, ModelParams, OccupancyDistribution};
use crate::triangular::TriangularArray;

/// Root seed for every random computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

impl Seed {
    /// Generator for stream `index` of this seed. Streams never overlap, so
    /// work split by index gives the same numbers in any order.
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }

    /// Independent child seed, used to key whole sub-experiments.
    pub fn child(self, index: u64) -> Seed {
        // splitmix64 finalizer over (seed, index)
        let mut z = self.0 ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }
}

/// `N` binary paths of common length `n`; 1 is a red (right) draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSet {
    n: usize,
    choices: Vec<u8>,
}

impl PathSet {
    /// Builds a set from a flat row-major buffer of `N * n` choices.
    pub fn new(n: usize, choices: Vec<u8>) -> Result<Self> {
        if choices.is_empty() {
            return Err(Error::EmptyData);
        }
        if n == 0 || !choices.len().is_multiple_of(n) {
            return Err(Error::InvalidArgument(format!(
                "{} choices do not split into paths of length {n}",
                choices.len()
            )));
        }
        if let Some(pos) = choices.iter().position(|&x| x > 1) {
            return Err(Error::InvalidArgument(format!(
                "choice {} at path {} is not binary",
                choices[pos],
                pos / n
            )));
        }
        Ok(Self { n, choices })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.first().map(Vec::len).ok_or(Error::EmptyData)?;
        if let Some(j) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "path {j} has length {}, expected {n}",
                rows[j].len()
            )));
        }
        Self::new(n, rows.concat())
    }

    /// Path length.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Number of paths.
    pub fn n_paths(&self) -> usize {
        self.choices.len() / self.n
    }

    pub fn path(&self, j: usize) -> &[u8] {
        &self.choices[j * self.n..(j + 1) * self.n]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.choices.chunks_exact(self.n)
    }

    /// Final red count `Z_n` of every path.
    pub fn final_counts(&self) -> Vec<usize> {
        self.iter()
            .map(|p| p.iter().map(|&x| x as usize).sum())
            .collect()
    }

    /// New set made of the listed paths (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> PathSet {
        let mut choices = Vec::with_capacity(indices.len() * self.n);
        for &j in indices {
            choices.extend_from_slice(self.path(j));
        }
        PathSet { n: self.n, choices }
    }
}

/// `ln(c + m)` for `m = 0..len`.
pub(crate) fn log_shift_table(c: f64, len: usize) -> Vec<f64> {
    (0..len).map(|m| (c + m as f64).ln()).collect()
}

fn simulate_one(params: &ModelParams, ln_shift: &[f64], out: &mut [u8], rng: &mut impl Rng) {
    let mut red = 0usize;
    for (k, slot) in out.iter_mut().enumerate() {
        let green = k - red;
        let eta = params.alpha() * (ln_shift[red] - ln_shift[green]);
        let (f, _) = logistic_pair(eta);
        let u: f64 = rng.random();
        if u < f {
            *slot = 1;
            red += 1;
        } else {
            *slot = 0;
        }
    }
}

/// Simulates `n_paths` independent walks of length `n`. Path `j` draws from
/// stream `j` of `seed`, so the output does not depend on scheduling.
pub fn simulate_paths(
    params: &ModelParams,
    n_paths: usize,
    n: usize,
    seed: Seed,
) -> Result<PathSet> {
    if n_paths == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "need at least one path of positive length".into(),
        ));
    }
    let ln_shift = log_shift_table(params.c(), n);
    let mut choices = vec![0u8; n_paths * n];
    choices.par_chunks_mut(n).enumerate().for_each(|(j, out)| {
        let mut rng = seed.stream(j as u64);
        simulate_one(params, &ln_shift, out, &mut rng);
    });
    Ok(PathSet { n, choices })
}

/// Fraction of paths with `Z_k = i`, for every cell.
pub fn empirical_occupancy(paths: &PathSet) -> OccupancyDistribution {
    let n = paths.len();
    let mut counts = vec![0u64; crate::triangular::tri_len(n)];
    for path in paths.iter() {
        let mut red = 0usize;
        for (k, &x) in path.iter().enumerate() {
            counts[crate::triangular::tri_offset(k, red)] += 1;
            red += x as usize;
        }
    }
    let total = paths.n_paths() as f64;
    let mut idx = 0;
    let rows = TriangularArray::from_fn(n, |_, _| {
        let v = counts[idx] as f64 / total;
        idx += 1;
        v
    });
    OccupancyDistribution::from_rows(rows)
}
