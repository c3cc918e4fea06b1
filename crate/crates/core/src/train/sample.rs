//! Per-prompt rollout batches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numeric::mix_seed;

/// Draws for one prompt at one iteration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSample {
    /// `y_1..y_M ∼ π_t`
    pub y: Vec<usize>,
    /// `y′_1..y′_M ∼ π_ref`
    pub y_ref: Vec<usize>,
    /// Rollouts `z_1..z_K ∼ π_t`.
    pub z: Vec<usize>,
    /// Rollouts `z′_1..z′_K ∼ π_ref`.
    pub z_ref: Vec<usize>,
    /// Separate `(y, y′)` draws for the gradient weights, when requested.
    pub gradient_draws: Option<(Vec<usize>, Vec<usize>)>,
}

impl BatchSample {
    /// Samples used for the gradient weights: the fresh pair if present, else `(y, y′)`.
    pub fn gradient_samples(&self) -> (&[usize], &[usize]) {
        match &self.gradient_draws {
            Some((y, yr)) => (y, yr),
            None => (&self.y, &self.y_ref),
        }
    }
}

/// Inverse-CDF categorical draw; zero-probability entries are never selected.
pub fn draw_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

fn draws<R: Rng + ?Sized>(probs: &[f64], count: usize, rng: &mut R) -> Vec<usize> {
    (0..count).map(|_| draw_categorical(probs, rng)).collect()
}

/// Draws one prompt's batch from `rng`.
pub fn sample_batch<R: Rng + ?Sized>(
    pi_t: &[f64],
    pi_ref: &[f64],
    m: usize,
    k: usize,
    fresh_gradient_draws: bool,
    rng: &mut R,
) -> BatchSample {
    let y = draws(pi_t, m, rng);
    let y_ref = draws(pi_ref, m, rng);
    let z = draws(pi_t, k, rng);
    let z_ref = draws(pi_ref, k, rng);
    let gradient_draws = fresh_gradient_draws.then(|| (draws(pi_t, m, rng), draws(pi_ref, m, rng)));
    BatchSample {
        y,
        y_ref,
        z,
        z_ref,
        gradient_draws,
    }
}

/// RNG stream for `(seed, iteration, prompt)`, independent of thread scheduling.
pub fn prompt_rng(seed: u64, iteration: u64, prompt: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(&[seed, iteration, prompt as u64]))
}
