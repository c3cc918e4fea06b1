//! Finite-sample estimators of the worst-case criterion and the gradient,
//! plus their large-β (fixed comparator) limits and exact counterparts.

use super::sample::BatchSample;
use crate::game::PromptGame;
use crate::numeric::{argmin, dot, log_sum_exp};
use crate::solver::PromptKernel;

/// `s_j = (1/M) Σ_i P^k(y_i ≻ y′_j)` for each reference draw.
fn mean_pref_against(game: &PromptGame, k: usize, ys: &[usize], y_refs: &[usize]) -> Vec<f64> {
    let inv = 1.0 / ys.len() as f64;
    y_refs
        .iter()
        .map(|&yr| ys.iter().map(|&y| game.pref(k, y, yr)).sum::<f64>() * inv)
        .collect()
}

/// `(k̂, −β ln Ẑ^k)` with `Ẑ^k = (1/M) Σ_j exp(−(1/(Mβ)) Σ_i P^k(y_i ≻ y′_j))`.
pub fn estimate_khat(batch: &BatchSample, game: &PromptGame, beta: f64) -> (usize, Vec<f64>) {
    khat_from(game, &batch.y, &batch.y_ref, beta)
}

pub(crate) fn khat_from(game: &PromptGame, ys: &[usize], y_refs: &[usize], beta: f64) -> (usize, Vec<f64>) {
    let ln_m = (y_refs.len() as f64).ln();
    let values: Vec<f64> = (0..game.n_criteria())
        .map(|k| {
            let expo: Vec<f64> = mean_pref_against(game, k, ys, y_refs)
                .into_iter()
                .map(|s| -s / beta)
                .collect();
            -beta * (log_sum_exp(&expo) - ln_m)
        })
        .collect();
    (argmin(&values), values)
}

/// Self-normalized importance weights over the reference draws for criterion `k`.
#[derive(Clone, Debug)]
pub struct GradientEstimator<'a> {
    game: &'a PromptGame,
    k: usize,
    y_refs: Vec<usize>,
    weights: Vec<f64>,
}

impl<'a> GradientEstimator<'a> {
    pub fn new(batch: &BatchSample, game: &'a PromptGame, k: usize, beta: f64) -> Self {
        let (ys, y_refs) = batch.gradient_samples();
        let expo: Vec<f64> = mean_pref_against(game, k, ys, y_refs)
            .into_iter()
            .map(|s| -s / beta)
            .collect();
        let max = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = expo.iter().map(|e| (e - max).exp()).collect();
        let total: f64 = w.iter().sum();
        Self {
            game,
            k,
            y_refs: y_refs.to_vec(),
            weights: w.into_iter().map(|v| v / total).collect(),
        }
    }

    /// `ĝ(x, z)`.
    pub fn at(&self, z: usize) -> f64 {
        self.y_refs
            .iter()
            .zip(&self.weights)
            .map(|(&yr, &w)| w * self.game.pref(self.k, z, yr))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }
}

/// `ĝ(x, z) = Σ_j P^k(z ≻ y′_j) w_j / Σ_j w_j`.
pub fn estimate_gradient(batch: &BatchSample, game: &PromptGame, k: usize, beta: f64, z: usize) -> f64 {
    GradientEstimator::new(batch, game, k, beta).at(z)
}

// Large-β limits. Expanding −β ln E[exp(−s/β)] = E[s] − Var(s)/(2β) + O(β⁻²)
// sends the partition value to the mean preference, and the weights
// exp(−s_j/β)/Σ exp(−s_·/β) = 1/M + O(1/β) go uniform.

/// `k̂ = argmin_k (1/M²) Σ_{i,j} P^k(y_i ≻ y′_j)`; the second element holds those means.
pub fn estimate_khat_vb(batch: &BatchSample, game: &PromptGame) -> (usize, Vec<f64>) {
    let values: Vec<f64> = (0..game.n_criteria())
        .map(|k| {
            let s = mean_pref_against(game, k, &batch.y, &batch.y_ref);
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect();
    (argmin(&values), values)
}

/// `ĝ(z) = (1/M) Σ_j P^k(z ≻ y′_j)`.
pub fn estimate_gradient_vb(batch: &BatchSample, game: &PromptGame, k: usize, z: usize) -> f64 {
    let (_, y_refs) = batch.gradient_samples();
    y_refs.iter().map(|&yr| game.pref(k, z, yr)).sum::<f64>() / y_refs.len() as f64
}

/// Exact worst-case criterion and gradient over every response.
pub(crate) fn exact_targets(game: &PromptGame, pi: &[f64], pi_ref: &[f64], beta: f64) -> (usize, Vec<f64>) {
    let mut kern = PromptKernel::new(pi_ref, game.n_criteria());
    let (k, _) = kern.evaluate(game, pi, beta, None);
    (k, kern.g)
}

/// Exact fixed-comparator limit: `k = argmin_k πᵀ P^k π_ref`, `g(z) = Σ π_ref(y′) P^k(z ≻ y′)`.
pub(crate) fn exact_targets_vb(game: &PromptGame, pi: &[f64], pi_ref: &[f64]) -> (usize, Vec<f64>) {
    let values: Vec<f64> = (0..game.n_criteria())
        .map(|k| dot(&game.pref_against(k, pi), pi_ref))
        .collect();
    let k = argmin(&values);
    let n = game.n_responses();
    let g = (0..n)
        .map(|z| dot(&game.matrix(k)[z * n..(z + 1) * n], pi_ref))
        .collect();
    (k, g)
}
