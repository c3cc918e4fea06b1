//! Exact exponentiated-gradient ascent on the game value.


use super::gradient::{md_step_in_place, PromptKernel};
use crate::config::default_step_size;
use crate::error::{invalid, Result};
use crate::exec;
use crate::game::{GameSet, PromptGame};
use crate::numeric::dot;
use crate::policy::TabularPolicy;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Keep every iterate's policy (memory grows as `T · Σ N`).
    pub record_policies: bool,
    /// Keep the per-iteration histogram of `k⋆` over prompts.
    pub record_k_star: bool,
}

/// Result of [`solve_exact`]. Iterate `t` is the policy after `t` steps; iterate 0 is `π_ref`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactTrace {
    pub beta: f64,
    pub eta: f64,
    /// `V(π_t)` for `t = 0..=T`.
    pub values: Vec<f64>,
    /// Present with [`SolveOptions::record_k_star`]: counts of prompts per criterion.
    pub k_star_hist: Option<Vec<Vec<u32>>>,
    /// Present with [`SolveOptions::record_policies`].
    pub policies: Option<Vec<TabularPolicy>>,
    pub best_iteration: usize,
    pub best_value: f64,
    pub best: TabularPolicy,
    pub last: TabularPolicy,
}

impl ExactTrace {
    /// `iteration,V,k0,k1,…` rows, every `stride`-th iterate plus the last.
    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let m = self
            .k_star_hist
            .as_ref()
            .and_then(|h| h.first().map(|r| r.len()))
            .unwrap_or(0);
        let mut out = String::from("iteration,V");
        for k in 0..m {
            out.push_str(&format!(",k{k}"));
        }
        out.push('\n');
        let last = self.values.len() - 1;
        for (t, v) in self.values.iter().enumerate() {
            if t % stride != 0 && t != last {
                continue;
            }
            out.push_str(&format!("{t},{v:.17e}"));
            if let Some(h) = &self.k_star_hist {
                for c in &h[t] {
                    out.push_str(&format!(",{c}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

struct PromptRun {
    values: Vec<f64>,
    k_star: Vec<u32>,
    policies: Vec<Vec<f64>>,
    last: Vec<f64>,
}

/// Runs `steps` exact mirror-descent steps on one prompt.
fn run_prompt(
    game: &PromptGame,
    pi_ref: &[f64],
    beta: f64,
    eta: f64,
    steps: usize,
    record_policies: bool,
    record_k: bool,
) -> PromptRun {
    let mut kern = PromptKernel::new(pi_ref, game.n_criteria());
    let mut pi = pi_ref.to_vec();
    let mut adv = vec![0.0; pi.len()];
    let mut scratch = Vec::with_capacity(pi.len());
    let mut values = Vec::with_capacity(steps + 1);
    let mut k_star = Vec::with_capacity(if record_k { steps + 1 } else { 0 });
    let mut policies = Vec::new();
    for t in 0..=steps {
        let (k, v) = kern.evaluate(game, &pi, beta, None);
        values.push(v);
        if record_k {
            k_star.push(k as u32);
        }
        if record_policies {
            policies.push(pi.clone());
        }
        if t == steps {
            break;
        }
        let mean = dot(&kern.g, &pi);
        for (a, g) in adv.iter_mut().zip(&kern.g) {
            *a = g - mean;
        }
        md_step_in_place(&mut pi, &adv, eta, &mut scratch);
    }
    PromptRun {
        values,
        k_star,
        policies,
        last: pi,
    }
}

/// Policy after exactly `steps` exact steps from `π_ref`.
fn replay_prompt(game: &PromptGame, pi_ref: &[f64], beta: f64, eta: f64, steps: usize) -> Vec<f64> {
    run_prompt(game, pi_ref, beta, eta, steps, false, false).last
}

/// Exact mirror descent from `π_ref` for `T` steps, returning the full value trace
/// and the best iterate by `V`.
///
/// Prompts evolve independently under the update, so each prompt's trajectory
/// runs as one parallel task; the value trace is their weighted sum.
/// `eta = None` uses `√(ln N_max / T)`.
pub fn solve_exact(
    gs: &GameSet,
    pi_ref: &TabularPolicy,
    beta: f64,
    eta: Option<f64>,
    iterations: usize,
    opts: SolveOptions,
) -> Result<ExactTrace> {
    pi_ref.check_shape(gs)?;
    if iterations == 0 {
        return Err(invalid("iterations must be at least 1"));
    }
    if !(beta > 0.0) {
        return Err(invalid("beta must be positive"));
    }
    let max_n = gs.games().iter().map(|g| g.n_responses()).max().unwrap_or(2);
    let eta = eta.unwrap_or_else(|| default_step_size(max_n, iterations));
    if !(eta > 0.0) {
        return Err(invalid("eta must be positive"));
    }
    let runs: Vec<PromptRun> = exec::map_indexed(gs.len(), |x| {
        run_prompt(
            gs.game(x),
            pi_ref.probs(x),
            beta,
            eta,
            iterations,
            opts.record_policies,
            opts.record_k_star,
        )
    });
    let weights = gs.weights();
    let mut values = vec![0.0; iterations + 1];
    for (run, &w) in runs.iter().zip(weights) {
        for (v, rv) in values.iter_mut().zip(&run.values) {
            *v += w * rv;
        }
    }
    let mut best_iteration = 0;
    for (t, &v) in values.iter().enumerate() {
        if v > values[best_iteration] {
            best_iteration = t;
        }
    }
    let k_star_hist = opts.record_k_star.then(|| {
        let m = gs.games().iter().map(|g| g.n_criteria()).max().unwrap_or(1);
        (0..=iterations)
            .map(|t| {
                let mut h = vec![0u32; m];
                for run in &runs {
                    h[run.k_star[t] as usize] += 1;
                }
                h
            })
            .collect()
    });
    let best = if opts.record_policies {
        runs.iter().map(|r| r.policies[best_iteration].clone()).collect()
    } else if best_iteration == iterations {
        runs.iter().map(|r| r.last.clone()).collect()
    } else {
        exec::map_indexed(gs.len(), |x| {
            replay_prompt(gs.game(x), pi_ref.probs(x), beta, eta, best_iteration)
        })
    };
    let policies = opts.record_policies.then(|| {
        (0..=iterations)
            .map(|t| TabularPolicy::from_probs_unchecked(runs.iter().map(|r| r.policies[t].clone()).collect()))
            .collect()
    });
    let last = TabularPolicy::from_probs_unchecked(runs.into_iter().map(|r| r.last).collect());
    Ok(ExactTrace {
        beta,
        eta,
        best_value: values[best_iteration],
        values,
        k_star_hist,
        policies,
        best_iteration,
        best: TabularPolicy::from_probs_unchecked(best),
        last,
    })
}
