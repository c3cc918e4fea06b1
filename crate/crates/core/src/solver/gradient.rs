//! Functional gradient of the single-player objective and the
//! exponentiated-gradient (KL mirror-descent) step.

use serde::{Deserialize, Serialize};

use super::value::{check_value_bounds, Workspace};
use crate::error::{invalid, Result};
use crate::exec;
use crate::game::{GameSet, PromptGame};
use crate::numeric::{check_simplex, dot, log_sum_exp};
use crate::policy::TabularPolicy;

/// Value, worst-case criterion and gradient of one prompt, computed in one pass.
#[derive(Clone, Debug)]
pub(crate) struct PromptKernel {
    ws: Workspace,
    best_logits: Vec<f64>,
    pub values: Vec<f64>,
    pub g: Vec<f64>,
}

impl PromptKernel {
    pub fn new(pi_ref: &[f64], n_criteria: usize) -> Self {
        let n = pi_ref.len();
        Self {
            ws: Workspace::new(pi_ref),
            best_logits: vec![0.0; n],
            values: vec![0.0; n_criteria],
            g: vec![0.0; n],
        }
    }

    /// Fills `values` and `g`; returns `(k⋆, value)`. `fixed_k` bypasses the argmin.
    pub fn evaluate(&mut self, game: &PromptGame, pi: &[f64], beta: f64, fixed_k: Option<usize>) -> (usize, f64) {
        let mut best = usize::MAX;
        let mut best_lse = 0.0;
        for k in 0..game.n_criteria() {
            let lse = self.ws.log_partition(game, pi, k, beta);
            let v = -beta * lse;
            check_value_bounds(v);
            self.values[k] = v;
            let take = match fixed_k {
                Some(fk) => fk == k,
                None => best == usize::MAX || v < self.values[best],
            };
            if take {
                best = k;
                best_lse = lse;
                self.best_logits.copy_from_slice(&self.ws.logits);
            }
        }
        // adversary distribution q = π′⋆ at the worst-case vertex
        for l in self.best_logits.iter_mut() {
            *l = (*l - best_lse).exp();
        }
        let n = game.n_responses();
        let mat = game.matrix(best);
        for (z, gz) in self.g.iter_mut().enumerate() {
            let row = &mat[z * n..(z + 1) * n];
            *gz = dot(row, &self.best_logits);
            debug_assert!((-1e-12..=1.0 + 1e-12).contains(gz));
        }
        (best, self.values[best])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptGradient {
    pub k_star: usize,
    /// `g(z | π, x)` for every response.
    pub g: Vec<f64>,
    /// `g − E_{z∼π}[g]`.
    pub advantage: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientField {
    pub prompts: Vec<PromptGradient>,
}

pub(crate) fn center(g: &[f64], pi: &[f64]) -> Vec<f64> {
    let mean = dot(g, pi);
    g.iter().map(|v| v - mean).collect()
}

/// Gradient of `−β ln Z^k` at a fixed criterion `k`.
pub fn gradient_at(game: &PromptGame, pi: &[f64], pi_ref: &[f64], k: usize, beta: f64) -> Result<Vec<f64>> {
    let n = game.n_responses();
    check_simplex(pi, n, "policy")?;
    check_simplex(pi_ref, n, "reference policy")?;
    if k >= game.n_criteria() || !(beta > 0.0) {
        return Err(invalid("criterion out of range or beta not positive"));
    }
    let mut kern = PromptKernel::new(pi_ref, game.n_criteria());
    kern.evaluate(game, pi, beta, Some(k));
    Ok(kern.g)
}

/// `g(z) = E_{y′∼π_ref}[P^{k⋆}(z ≻ y′) e^{−P_π^{k⋆}(y′)/β}] / Z^{k⋆}` per prompt.
pub fn exact_gradient(gs: &GameSet, pi: &TabularPolicy, pi_ref: &TabularPolicy, beta: f64) -> Result<GradientField> {
    pi.check_shape(gs)?;
    pi_ref.check_shape(gs)?;
    if !(beta > 0.0) {
        return Err(invalid("beta must be positive"));
    }
    let prompts = exec::map_indexed(gs.len(), |x| {
        let game = gs.game(x);
        let mut kern = PromptKernel::new(pi_ref.probs(x), game.n_criteria());
        let (k_star, _) = kern.evaluate(game, pi.probs(x), beta, None);
        let advantage = center(&kern.g, pi.probs(x));
        PromptGradient {
            k_star,
            g: kern.g,
            advantage,
        }
    });
    Ok(GradientField { prompts })
}

/// `π_{t+1} ∝ π_t exp(η A)` computed in the log domain.
pub(crate) fn md_step_in_place(pi: &mut [f64], advantage: &[f64], eta: f64, scratch: &mut Vec<f64>) {
    scratch.clear();
    scratch.extend(pi.iter().zip(advantage).map(|(&p, &a)| {
        if p > 0.0 {
            p.ln() + eta * a
        } else {
            f64::NEG_INFINITY
        }
    }));
    let lse = log_sum_exp(scratch);
    for (p, &l) in pi.iter_mut().zip(scratch.iter()) {
        *p = (l - lse).exp();
    }
}

/// Exponentiated-gradient update of every prompt's policy.
pub fn mirror_descent_step(pi: &TabularPolicy, grad: &GradientField, eta: f64) -> Result<TabularPolicy> {
    if !(eta > 0.0) {
        return Err(invalid("eta must be positive"));
    }
    if grad.prompts.len() != pi.len() {
        return Err(invalid("gradient and policy cover different prompts"));
    }
    let probs = exec::map_indexed(pi.len(), |x| {
        let mut p = pi.probs(x).to_vec();
        let mut scratch = Vec::with_capacity(p.len());
        md_step_in_place(&mut p, &grad.prompts[x].advantage, eta, &mut scratch);
        p
    });
    Ok(TabularPolicy::from_probs_unchecked(probs))
}
