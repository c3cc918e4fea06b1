//! Partition values, the worst-case criterion, the game value and the
//! closed-form entropy-regularized comparator.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec;
use crate::game::{policy_pref_vector, GameSet, PromptGame};
use crate::numeric::{argmin, check_simplex, log_sum_exp};
use crate::policy::TabularPolicy;

/// Scratch buffers for repeated evaluation on one prompt.
#[derive(Clone, Debug)]
pub(crate) struct Workspace {
    pub col: Vec<f64>,
    pub logits: Vec<f64>,
    /// `ln π_ref`, `-inf` where the reference has no mass.
    pub log_ref: Vec<f64>,
}

impl Workspace {
    pub fn new(pi_ref: &[f64]) -> Self {
        let n = pi_ref.len();
        Self {
            col: vec![0.0; n],
            logits: vec![0.0; n],
            log_ref: pi_ref
                .iter()
                .map(|&r| if r > 0.0 { r.ln() } else { f64::NEG_INFINITY })
                .collect(),
        }
    }

    /// Fills `logits` with `ln π_ref(y′) − P_π^k(y′)/β` and returns `ln Z^k`.
    pub fn log_partition(&mut self, game: &PromptGame, pi: &[f64], k: usize, beta: f64) -> f64 {
        game.pref_against_into(k, pi, &mut self.col);
        for ((l, &lr), &c) in self.logits.iter_mut().zip(&self.log_ref).zip(&self.col) {
            *l = if lr == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                lr - c / beta
            };
        }
        log_sum_exp(&self.logits)
    }
}

#[inline]
pub(crate) fn check_value_bounds(v: f64) {
    debug_assert!(
        (-1e-9..=1.0 + 1e-9).contains(&v),
        "soft worst-case value {v} left [0, 1]"
    );
}

fn check_inputs(game: &PromptGame, pi: &[f64], pi_ref: &[f64], beta: f64) -> Result<()> {
    let n = game.n_responses();
    check_simplex(pi, n, "policy")?;
    check_simplex(pi_ref, n, "reference policy")?;
    if !(beta > 0.0) {
        return Err(invalid("beta must be positive"));
    }
    Ok(())
}

/// `−β ln Σ_{y′} π_ref(y′) exp(−P_π^k(y′)/β)`.
pub fn partition_value(game: &PromptGame, pi: &[f64], pi_ref: &[f64], k: usize, beta: f64) -> Result<f64> {
    check_inputs(game, pi, pi_ref, beta)?;
    if k >= game.n_criteria() {
        return Err(invalid(format!("criterion {k} out of range")));
    }
    let mut ws = Workspace::new(pi_ref);
    let v = -beta * ws.log_partition(game, pi, k, beta);
    check_value_bounds(v);
    Ok(v)
}

/// Per-criterion partition values and the lowest-index argmin `k⋆`.
pub fn worst_case_criterion(
    game: &PromptGame,
    pi: &[f64],
    pi_ref: &[f64],
    beta: f64,
) -> Result<(usize, Vec<f64>)> {
    check_inputs(game, pi, pi_ref, beta)?;
    let mut ws = Workspace::new(pi_ref);
    let values: Vec<f64> = (0..game.n_criteria())
        .map(|k| -beta * ws.log_partition(game, pi, k, beta))
        .collect();
    values.iter().copied().for_each(check_value_bounds);
    Ok((argmin(&values), values))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptValue {
    pub prompt_id: String,
    /// `−β ln Z^k` for each criterion.
    pub values: Vec<f64>,
    pub k_star: usize,
    pub value: f64,
}

/// Game value of a policy, per prompt and in total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueReport {
    pub beta: f64,
    pub prompts: Vec<PromptValue>,
    pub total: f64,
}

impl ValueReport {
    /// Long-format CSV: `prompt_id,criterion,neg_beta_log_z,is_worst`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("prompt_id,criterion,neg_beta_log_z,is_worst\n");
        for p in &self.prompts {
            for (k, v) in p.values.iter().enumerate() {
                out.push_str(&format!("{},{},{:.17e},{}\n", p.prompt_id, k, v, (k == p.k_star) as u8));
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Histogram of `k⋆` over prompts.
    pub fn k_star_histogram(&self) -> Vec<usize> {
        let m = self.prompts.iter().map(|p| p.values.len()).max().unwrap_or(0);
        let mut h = vec![0; m];
        for p in &self.prompts {
            h[p.k_star] += 1;
        }
        h
    }
}

/// `V(π) = Σ_x weight(x) · min_k −β ln Z^k(π|x)`.
pub fn game_value(gs: &GameSet, pi: &TabularPolicy, pi_ref: &TabularPolicy, beta: f64) -> Result<ValueReport> {
    pi.check_shape(gs)?;
    pi_ref.check_shape(gs)?;
    let prompts = exec::try_map_indexed(gs.len(), |x| {
        let g = gs.game(x);
        let (k_star, values) = worst_case_criterion(g, pi.probs(x), pi_ref.probs(x), beta)?;
        Ok::<_, crate::Error>(PromptValue {
            prompt_id: g.prompt_id().to_string(),
            value: values[k_star],
            values,
            k_star,
        })
    })?;
    let total = prompts
        .iter()
        .zip(gs.weights())
        .map(|(p, w)| w * p.value)
        .sum();
    Ok(ValueReport { beta, prompts, total })
}

/// Closed-form comparator `π′⋆ ∝ π_ref · exp(−⟨w, P_π(y′)⟩/β)`.
pub fn adversary_best_response(
    game: &PromptGame,
    pi: &[f64],
    pi_ref: &[f64],
    w: &[f64],
    beta: f64,
) -> Result<Vec<f64>> {
    check_inputs(game, pi, pi_ref, beta)?;
    check_simplex(w, game.n_criteria(), "criterion weights")?;
    let n = game.n_responses();
    let mut mixed = vec![0.0; n];
    for (k, &wk) in w.iter().enumerate() {
        if wk == 0.0 {
            continue;
        }
        for (m, c) in mixed.iter_mut().zip(game.pref_against(k, pi)) {
            *m += wk * c;
        }
    }
    let logits: Vec<f64> = pi_ref
        .iter()
        .zip(&mixed)
        .map(|(&r, &c)| if r > 0.0 { r.ln() - c / beta } else { f64::NEG_INFINITY })
        .collect();
    Ok(crate::numeric::softmax(&logits))
}

/// `Σ_y′ π′ ln(π′/π_ref)`; infinite when `π′` leaves the reference support.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            if a == 0.0 {
                0.0
            } else if b == 0.0 {
                f64::INFINITY
            } else {
                a * (a / b).ln()
            }
        })
        .sum()
}

/// Comparator's regularized objective `⟨w, P(π ≻ π′)⟩ + β KL(π′ ‖ π_ref)`.
pub fn regularized_objective(
    game: &PromptGame,
    pi: &[f64],
    pi_prime: &[f64],
    pi_ref: &[f64],
    w: &[f64],
    beta: f64,
) -> Result<f64> {
    check_simplex(w, game.n_criteria(), "criterion weights")?;
    let v = policy_pref_vector(game, pi, pi_prime)?;
    Ok(crate::numeric::dot(w, &v) + beta * kl_divergence(pi_prime, pi_ref))
}
