//! Sample-based training: sample → estimate `k̂` → estimate `ĝ` → filter pairs → regress.

mod estimate;
mod pairs;
mod regression;
mod sample;

pub use estimate::{
    estimate_gradient, estimate_gradient_vb, estimate_khat, estimate_khat_vb, GradientEstimator,
};
pub use pairs::{build_and_filter_pairs, build_pairs, filter_pairs, RegressionPair};
pub use regression::{regression_update, RegressionOutcome};
pub use sample::{draw_categorical, prompt_rng, sample_batch, BatchSample};

use serde::{Deserialize, Serialize};

use crate::config::{Estimator, SolverConfig, Variant};
use crate::error::{invalid, Result};
use crate::exec;
use crate::game::{GameSet, PromptGame};
use crate::judge::scalarize_gameset;
use crate::policy::{concentrability, Policy, TabularPolicy};
use crate::solver::game_value;

/// One segment of a training schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    pub iterations: usize,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationDiagnostics {
    /// Global iteration index across epochs.
    pub iteration: usize,
    /// `V(π_t)` under the original multi-criterion games.
    pub value: f64,
    /// Mean squared regression residual of the update taken at this iterate.
    pub epsilon: f64,
    /// `None` when `π_ref` has zeros.
    pub concentrability: Option<f64>,
    /// Prompts per selected criterion.
    pub khat_histogram: Vec<usize>,
    pub khat_mode: usize,
    pub n_pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainDiagnostics {
    pub variant: Variant,
    pub estimator: Estimator,
    pub beta: f64,
    pub eta: Vec<f64>,
    pub iterations: Vec<IterationDiagnostics>,
    pub final_value: f64,
    pub final_concentrability: Option<f64>,
}

impl TrainDiagnostics {
    /// `V(π_t)` for every iterate, ending with the final policy.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.iterations.iter().map(|d| d.value).collect();
        v.push(self.final_value);
        v
    }

    /// `iteration,V,epsilon,concentrability,khat_mode`; the final row has empty
    /// `epsilon` and `khat_mode`.
    pub fn to_csv(&self) -> String {
        let fmt_c = |c: Option<f64>| c.map(|v| format!("{v:.17e}")).unwrap_or_default();
        let mut out = String::from("iteration,V,epsilon,concentrability,khat_mode\n");
        for d in &self.iterations {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{},{}\n",
                d.iteration,
                d.value,
                d.epsilon,
                fmt_c(d.concentrability),
                d.khat_mode
            ));
        }
        let last = self.iterations.last().map(|d| d.iteration + 1).unwrap_or(0);
        out.push_str(&format!(
            "{last},{:.17e},,{},\n",
            self.final_value,
            fmt_c(self.final_concentrability)
        ));
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub policy: Policy,
    pub diagnostics: TrainDiagnostics,
}

struct PromptStep {
    batch: BatchSample,
    targets: Vec<f64>,
    k_hat: usize,
}

fn support(p: &[f64]) -> Vec<usize> {
    (0..p.len()).filter(|&i| p[i] > 0.0).collect()
}

fn prompt_step(
    game: &PromptGame,
    pi: &[f64],
    pi_ref: &[f64],
    config: &SolverConfig,
    iteration: u64,
    prompt: usize,
) -> PromptStep {
    let n = game.n_responses();
    match config.estimator {
        Estimator::Exact => {
            let (k_hat, targets) = match config.variant {
                Variant::Vb => estimate::exact_targets_vb(game, pi, pi_ref),
                _ => estimate::exact_targets(game, pi, pi_ref, config.beta),
            };
            let batch = BatchSample {
                y: Vec::new(),
                y_ref: Vec::new(),
                z: support(pi),
                z_ref: support(pi_ref),
                gradient_draws: None,
            };
            PromptStep { batch, targets, k_hat }
        }
        Estimator::MonteCarlo => {
            let mut rng = prompt_rng(config.seed, iteration, prompt);
            let batch = sample_batch(
                pi,
                pi_ref,
                config.samples,
                config.responses,
                config.fresh_gradient_samples,
                &mut rng,
            );
            let mut targets = vec![0.0; n];
            let mut needed = vec![false; n];
            for &z in batch.z.iter().chain(&batch.z_ref) {
                needed[z] = true;
            }
            let k_hat = match config.variant {
                Variant::Vb => {
                    let (k, _) = estimate_khat_vb(&batch, game);
                    for z in (0..n).filter(|&z| needed[z]) {
                        targets[z] = estimate_gradient_vb(&batch, game, k, z);
                    }
                    k
                }
                _ => {
                    let (k, _) = estimate_khat(&batch, game, config.beta);
                    let est = GradientEstimator::new(&batch, game, k, config.beta);
                    for z in (0..n).filter(|&z| needed[z]) {
                        targets[z] = est.at(z);
                    }
                    k
                }
            };
            PromptStep { batch, targets, k_hat }
        }
    }
}

fn check_policy(gs: &GameSet, policy: &Policy) -> Result<()> {
    match policy {
        Policy::Tabular(t) => t.check_shape(gs),
        Policy::Linear(l) => {
            if l.n_prompts() != gs.len() || (0..gs.len()).any(|x| l.n_responses(x) != gs.game(x).n_responses()) {
                return Err(invalid("linear policy features do not match the game set"));
            }
            Ok(())
        }
    }
}

/// Runs `config.iterations` steps from `start`, regularizing toward `pi_ref`.
///
/// `iteration_offset` shifts the global iteration index used to seed the
/// per-prompt sampling streams and to label diagnostics.
pub fn train_from(
    gs: &GameSet,
    start: &Policy,
    pi_ref: &TabularPolicy,
    config: &SolverConfig,
    iteration_offset: usize,
) -> Result<TrainOutcome> {
    config.validate()?;
    check_policy(gs, start)?;
    pi_ref.check_shape(gs)?;
    let train_gs = match config.variant {
        Variant::Jc => scalarize_gameset(gs, config.jc_weights.as_deref())?,
        _ => gs.clone(),
    };
    let max_n = gs.games().iter().map(|g| g.n_responses()).max().unwrap_or(2);
    let eta = config.step_size(max_n);
    let max_m = train_gs.games().iter().map(|g| g.n_criteria()).max().unwrap_or(1);

    let mut policy = start.clone();
    let mut rows = Vec::with_capacity(config.iterations);
    for t in 0..config.iterations {
        let global = iteration_offset + t;
        let pi = policy.to_tabular();
        let value = game_value(gs, &pi, pi_ref, config.beta)?.total;
        let steps = exec::map_indexed(gs.len(), |x| {
            prompt_step(train_gs.game(x), pi.probs(x), pi_ref.probs(x), config, global as u64, x)
        });
        let mut hist = vec![0usize; max_m];
        for s in &steps {
            hist[s.k_hat] += 1;
        }
        let khat_mode = (0..max_m).fold(0, |best, k| if hist[k] > hist[best] { k } else { best });
        let (batches, targets): (Vec<_>, Vec<_>) = steps.into_iter().map(|s| (s.batch, s.targets)).unzip();
        let pairs = build_and_filter_pairs(&batches, &targets, config.rho, config.include_same_policy_pairs)?;
        let update = regression_update(&policy, &pairs, eta, config.ridge)?;
        rows.push(IterationDiagnostics {
            iteration: global,
            value,
            epsilon: update.epsilon,
            concentrability: concentrability(&pi, pi_ref, gs).ok(),
            khat_histogram: hist,
            khat_mode,
            n_pairs: pairs.len(),
        });
        policy = update.policy;
    }
    let last = policy.to_tabular();
    let final_value = game_value(gs, &last, pi_ref, config.beta)?.total;
    Ok(TrainOutcome {
        diagnostics: TrainDiagnostics {
            variant: config.variant,
            estimator: config.estimator,
            beta: config.beta,
            eta: vec![eta],
            iterations: rows,
            final_value,
            final_concentrability: concentrability(&last, pi_ref, gs).ok(),
        },
        policy,
    })
}

/// Trains from the reference policy itself.
pub fn train(gs: &GameSet, reference: &Policy, config: &SolverConfig) -> Result<TrainOutcome> {
    train_from(gs, reference, &reference.to_tabular(), config, 0)
}

/// Runs the epochs back to back, each continuing from the previous policy with
/// its own `T` and `rho`; diagnostics are concatenated.
pub fn train_schedule(gs: &GameSet, reference: &Policy, config: &SolverConfig, schedule: &[Epoch]) -> Result<TrainOutcome> {
    if schedule.is_empty() {
        return train(gs, reference, config);
    }
    let pi_ref = reference.to_tabular();
    let mut policy = reference.clone();
    let mut offset = 0;
    let mut merged: Option<TrainDiagnostics> = None;
    for epoch in schedule {
        let cfg = SolverConfig {
            iterations: epoch.iterations,
            rho: epoch.rho,
            ..config.clone()
        };
        let out = train_from(gs, &policy, &pi_ref, &cfg, offset)?;
        offset += epoch.iterations;
        policy = out.policy;
        merged = Some(match merged {
            None => out.diagnostics,
            Some(mut m) => {
                m.iterations.extend(out.diagnostics.iterations);
                m.eta.extend(out.diagnostics.eta);
                m.final_value = out.diagnostics.final_value;
                m.final_concentrability = out.diagnostics.final_concentrability;
                m
            }
        });
    }
    Ok(TrainOutcome {
        policy,
        diagnostics: merged.expect("nonempty schedule"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::judge::{cyclic_gameset, random_utility_gameset};
    use crate::solver::{solve_exact, SolveOptions};

    fn flat(n: usize, m: usize) -> GameSet {
        let g = PromptGame::from_matrices("flat", vec![vec![vec![0.5; n]; n]; m]).unwrap();
        GameSet::uniform(vec![g.clone(), g]).unwrap()
    }

    #[test]
    fn constant_game_keeps_reference() {
        let gs = flat(4, 2);
        let pi_ref = TabularPolicy::new(vec![vec![0.1, 0.2, 0.3, 0.4]; 2]).unwrap();
        for variant in [Variant::Full, Variant::Jc, Variant::Vb] {
            for estimator in [Estimator::Exact, Estimator::MonteCarlo] {
                let cfg = SolverConfig {
                    variant,
                    estimator,
                    iterations: 5,
                    ..Default::default()
                };
                let out = train(&gs, &Policy::Tabular(pi_ref.clone()), &cfg).unwrap();
                assert!(out.policy.to_tabular().max_tv(&pi_ref) < 1e-15);
            }
        }
    }

    #[test]
    fn exact_pipeline_matches_solver() {
        let gs = random_utility_gameset(3, 4, 5, 3, 1.0).unwrap();
        let pi_ref = TabularPolicy::uniform(&gs);
        let cfg = SolverConfig {
            estimator: Estimator::Exact,
            iterations: 30,
            rho: 1.0,
            ridge: 0.0,
            ..Default::default()
        };
        let out = train(&gs, &Policy::Tabular(pi_ref.clone()), &cfg).unwrap();
        let trace = solve_exact(&gs, &pi_ref, cfg.beta, None, 30, SolveOptions::default()).unwrap();
        for (a, b) in out.diagnostics.values().iter().zip(&trace.values) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(out.policy.to_tabular().max_tv(&trace.last) < 1e-10);
        assert!(out.diagnostics.iterations.iter().all(|d| d.epsilon <= 1e-16));
    }

    #[test]
    fn reruns_are_identical() {
        let gs = cyclic_gameset(9, 5, 5, 3, 0.3).unwrap();
        let r = Policy::Tabular(TabularPolicy::uniform(&gs));
        let cfg = SolverConfig {
            iterations: 10,
            responses: 4,
            ..Default::default()
        };
        let a = train(&gs, &r, &cfg).unwrap();
        let b = train(&gs, &r, &cfg).unwrap();
        assert_eq!(a, b);
        let c = exec::with_threads(1, || train(&gs, &r, &cfg).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn schedule_concatenates() {
        let gs = cyclic_gameset(2, 3, 4, 2, 0.3).unwrap();
        let r = Policy::Tabular(TabularPolicy::uniform(&gs));
        let sched = [Epoch { iterations: 3, rho: 0.15 }, Epoch { iterations: 4, rho: 0.17 }];
        let out = train_schedule(&gs, &r, &SolverConfig::default(), &sched).unwrap();
        let its: Vec<_> = out.diagnostics.iterations.iter().map(|d| d.iteration).collect();
        assert_eq!(its, (0..7).collect::<Vec<_>>());
        assert_eq!(out.diagnostics.eta.len(), 2);
        let csv = out.diagnostics.to_csv();
        assert!(csv.starts_with("iteration,V,epsilon,concentrability,khat_mode\n"));
        assert_eq!(csv.lines().count(), 9);
    }
}
