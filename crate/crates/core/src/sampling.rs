//! Seedable randomness: the PRNG stream, standard normals and the
//! squared-norm weighted row/column distributions.
//!
//! # Stream definition
//!
//! Everything random in the crate is derived from one recurrence so that any
//! implementation can reproduce it bit for bit:
//!
//! * `splitmix64(x)`: `z = x + 0x9E3779B97F4A7C15` (wrapping);
//!   `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`;
//!   `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`; return `z ^ (z >> 31)`.
//! * `Prng::new(seed)`: xoshiro256++ whose four state words are the first four
//!   outputs of a splitmix64 generator started at `seed` (state advanced by
//!   the golden-ratio increment before each mix).
//! * `uniform()`: `(next_u64() >> 11) * 2^-53`, in `[0, 1)`.
//! * `gaussian()`: Box-Muller on two successive uniforms `u1, u2`:
//!   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`. Each call consumes exactly two
//!   64-bit outputs; the sine branch is discarded.
//! * Weighted draws consume one uniform `u` and return the first index whose
//!   cumulative weight exceeds `u * total`.
//! * Trial `k` of a run seeded with `base` uses `Prng::new(splitmix64(base + k))`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// One step of the splitmix64 mixer applied to `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic xoshiro256++ stream.
#[derive(Debug, Clone)]
pub struct Prng {
    inner: Xoshiro256PlusPlus,
    seed: u64,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate (Box-Muller, cosine branch).
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

pub fn gaussian(rng: &mut Prng) -> f64 {
    rng.gaussian()
}

/// Independent stream for trial `trial` of an experiment seeded with `base_seed`.
pub fn spawn_trial_rng(base_seed: u64, trial: u64) -> Prng {
    Prng::new(splitmix64(base_seed.wrapping_add(trial)))
}

/// Discrete distribution over `0..len` with probabilities proportional to
/// nonnegative weights, sampled by binary search over cumulative sums.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedIndex {
    cum_weights: Vec<f64>,
    last_positive: usize,
    support_size: usize,
}

impl WeightedIndex {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Config(format!("invalid sampling weight {w}")));
        }
        let mut acc = 0.0;
        let cum_weights: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let last_positive = weights
            .iter()
            .rposition(|&w| w > 0.0)
            .ok_or(Error::EmptyDistribution)?;
        let support_size = weights.iter().filter(|&&w| w > 0.0).count();
        Ok(Self {
            cum_weights,
            last_positive,
            support_size,
        })
    }

    pub fn len(&self) -> usize {
        self.cum_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cum_weights.is_empty()
    }

    /// Number of indices with positive weight.
    pub fn support_size(&self) -> usize {
        self.support_size
    }

    pub fn total(&self) -> f64 {
        *self.cum_weights.last().unwrap()
    }

    pub fn cum_weights(&self) -> &[f64] {
        &self.cum_weights
    }

    pub fn probability(&self, i: usize) -> f64 {
        let lo = if i == 0 { 0.0 } else { self.cum_weights[i - 1] };
        (self.cum_weights[i] - lo) / self.total()
    }

    #[inline]
    pub fn sample(&self, rng: &mut Prng) -> usize {
        let u = rng.uniform() * self.total();
        let i = self.cum_weights.partition_point(|&c| c <= u);
        // u * total can round up to total
        i.min(self.last_positive)
    }
}

/// Rows drawn with probability `||X^i||^2 / ||X||_F^2`.
pub fn row_distribution(x: &DenseMatrix) -> Result<WeightedIndex> {
    WeightedIndex::new(x.row_norms_sq())
}

/// Columns drawn with probability `||X_(j)||^2 / ||X||_F^2`.
pub fn col_distribution(x: &DenseMatrix) -> Result<WeightedIndex> {
    WeightedIndex::new(x.col_norms_sq())
}
