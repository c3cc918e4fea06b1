//! Win-rate tournaments, convergence-rate studies and Blackwell-distance summaries.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec;
use crate::game::{blackwell_distance, policy_pref_vector, GameSet};
use crate::numeric::{loglog_slope, mix_seed, one_hot};
use crate::policy::TabularPolicy;
use crate::solver::{solve_exact, SolveOptions};
use crate::train::{draw_categorical, prompt_rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum TournamentMode {
    Expected,
    Sampled { n: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinRateMatrix {
    pub labels: Vec<String>,
    /// `w[i][j]`: rate at which policy `i` beats policy `j`.
    pub w: Vec<Vec<f64>>,
}

impl WinRateMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i][j]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,winrate\n");
        for (i, row) in self.w.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out.push_str(&format!("{},{},{v:.17e}\n", self.labels[i], self.labels[j]));
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Mean over criteria of `π_aᵀ P[k] π_b`, then gameset-weighted over prompts.
fn expected_rate(gs: &GameSet, a: &TabularPolicy, b: &TabularPolicy) -> Result<f64> {
    let mut total = 0.0;
    for (x, w) in gs.weights().iter().enumerate() {
        let v = policy_pref_vector(gs.game(x), a.probs(x), b.probs(x))?;
        total += w * v.iter().sum::<f64>() / v.len() as f64;
    }
    Ok(total)
}

/// `n` sampled response pairs per prompt. For each criterion the judge picks
/// `a` with probability `P^k(a ≻ b)`; exact ties (`P = ½`) credit ½ to each.
fn sampled_rate(gs: &GameSet, a: &TabularPolicy, b: &TabularPolicy, n: usize, seed: u64) -> f64 {
    let per_prompt = exec::map_indexed(gs.len(), |x| {
        let g = gs.game(x);
        let mut rng = prompt_rng(seed, 0, x);
        let m = g.n_criteria();
        let mut credit = 0.0;
        for _ in 0..n {
            let ya = draw_categorical(a.probs(x), &mut rng);
            let yb = draw_categorical(b.probs(x), &mut rng);
            let mut item = 0.0;
            for k in 0..m {
                let p = g.pref(k, ya, yb);
                let u: f64 = rng.random();
                item += if p == 0.5 {
                    0.5
                } else if u < p {
                    1.0
                } else {
                    0.0
                };
            }
            credit += item / m as f64;
        }
        credit / n as f64
    });
    per_prompt.iter().zip(gs.weights()).map(|(r, w)| r * w).sum()
}

/// Pairwise win rates. The lower triangle is the complement of the upper, so
/// antisymmetry holds exactly in both modes.
pub fn tournament(policies: &[(String, TabularPolicy)], gs: &GameSet, mode: TournamentMode) -> Result<WinRateMatrix> {
    if policies.len() < 2 {
        return Err(invalid("a tournament needs at least two policies"));
    }
    for (label, p) in policies {
        p.check_shape(gs)
            .map_err(|e| invalid(format!("policy {label}: {e}")))?;
    }
    if let TournamentMode::Sampled { n, .. } = mode {
        if n == 0 {
            return Err(invalid("sampled tournament needs n ≥ 1"));
        }
    }
    let np = policies.len();
    let pairs: Vec<(usize, usize)> = (0..np).flat_map(|i| (i + 1..np).map(move |j| (i, j))).collect();
    let rates = exec::try_map_indexed(pairs.len(), |idx| {
        let (i, j) = pairs[idx];
        let (a, b) = (&policies[i].1, &policies[j].1);
        match mode {
            TournamentMode::Expected => expected_rate(gs, a, b),
            TournamentMode::Sampled { n, seed } => Ok(sampled_rate(gs, a, b, n, mix_seed(&[seed, i as u64, j as u64]))),
        }
    })?;
    let mut w = vec![vec![0.5; np]; np];
    for (&(i, j), r) in pairs.iter().zip(rates) {
        w[i][j] = r;
        w[j][i] = 1.0 - r;
    }
    Ok(WinRateMatrix {
        labels: policies.iter().map(|p| p.0.clone()).collect(),
        w,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCell {
    pub beta: f64,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
    /// `V(oracle) − max_{t ≤ T} V(π_t)`.
    pub gap: f64,
    /// `V(oracle) − V(π_ref)`.
    pub initial_gap: f64,
    #[serde(skip)]
    pub runtime_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSlope {
    pub beta: f64,
    /// Log-log slope of the seed-averaged gap against `T`.
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub oracle_iterations: usize,
    pub cells: Vec<ConvergenceCell>,
    pub slopes: Vec<ConvergenceSlope>,
}

/// Gaps below this are treated as this value in slope fits.
pub const GAP_FLOOR: f64 = 1e-14;

impl ConvergenceTable {
    /// `beta,T,seed,gap,initial_gap`; wall-clock timings are kept out of the table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("beta,T,seed,gap,initial_gap\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{:.17e},{:.17e}\n",
                c.beta, c.t, c.seed, c.gap, c.initial_gap
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Mean over seeds of the gap at `(beta, t)`.
    pub fn mean_gap(&self, beta: f64, t: usize) -> f64 {
        let g: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.beta == beta && c.t == t)
            .map(|c| c.gap)
            .collect();
        g.iter().sum::<f64>() / g.len().max(1) as f64
    }
}

/// Best-iterate gap of exact mirror descent against a long-horizon oracle run,
/// for every `(β, T, seed)` cell. `factory(seed)` builds the games; the
/// reference policy is uniform.
pub fn convergence_study<F>(factory: F, betas: &[f64], horizons: &[usize], seeds: &[u64], oracle_iterations: usize) -> Result<ConvergenceTable>
where
    F: Fn(u64) -> Result<GameSet> + Sync,
{
    if betas.is_empty() || horizons.is_empty() || seeds.is_empty() {
        return Err(invalid("convergence grids must be nonempty"));
    }
    let jobs: Vec<(f64, u64)> = betas.iter().flat_map(|&b| seeds.iter().map(move |&s| (b, s))).collect();
    let per_job = exec::try_map_indexed(jobs.len(), |j| {
        let (beta, seed) = jobs[j];
        let gs = factory(seed)?;
        let pi_ref = TabularPolicy::uniform(&gs);
        let oracle = solve_exact(&gs, &pi_ref, beta, None, oracle_iterations, SolveOptions::default())?;
        let initial_gap = oracle.best_value - oracle.values[0];
        horizons
            .iter()
            .map(|&t| {
                let start = Instant::now();
                let trace = solve_exact(&gs, &pi_ref, beta, None, t, SolveOptions::default())?;
                Ok(ConvergenceCell {
                    beta,
                    t,
                    seed,
                    gap: oracle.best_value - trace.best_value,
                    initial_gap,
                    runtime_ms: start.elapsed().as_secs_f64() * 1e3,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = ConvergenceTable {
        oracle_iterations,
        cells: per_job.into_iter().flatten().collect(),
        slopes: Vec::new(),
    };
    if horizons.len() >= 2 {
        let xs: Vec<f64> = horizons.iter().map(|&t| t as f64).collect();
        for &beta in betas {
            let ys: Vec<f64> = horizons
                .iter()
                .map(|&t| table.mean_gap(beta, t).max(GAP_FLOOR))
                .collect();
            table.slopes.push(ConvergenceSlope {
                beta,
                slope: loglog_slope(&xs, &ys),
            });
        }
    }
    Ok(table)
}

/// Comparators for [`blackwell_summary`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComparatorSet {
    pub policies: Vec<TabularPolicy>,
    /// Also compare against every pure response.
    pub include_pure: bool,
}

impl ComparatorSet {
    /// `π_ref` plus all pure responses.
    pub fn reference_and_pure(pi_ref: &TabularPolicy) -> Self {
        Self {
            policies: vec![pi_ref.clone()],
            include_pure: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlackwellReport {
    pub p: f64,
    /// Worst-case distance per prompt.
    pub per_prompt: Vec<f64>,
    pub mean: f64,
}

/// `max_{π′} dist(P(π ≻ π′), [p, ∞)^m)` per prompt and its weighted mean.
pub fn blackwell_summary(pi: &TabularPolicy, gs: &GameSet, p: f64, comparators: &ComparatorSet) -> Result<BlackwellReport> {
    if !(0.5..=1.0).contains(&p) {
        return Err(invalid("p must lie in [1/2, 1]"));
    }
    pi.check_shape(gs)?;
    for c in &comparators.policies {
        c.check_shape(gs)?;
    }
    if comparators.policies.is_empty() && !comparators.include_pure {
        return Err(invalid("comparator set is empty"));
    }
    let per_prompt = exec::try_map_indexed(gs.len(), |x| {
        let g = gs.game(x);
        let mut worst: f64 = 0.0;
        for c in &comparators.policies {
            worst = worst.max(blackwell_distance(&policy_pref_vector(g, pi.probs(x), c.probs(x))?, p));
        }
        if comparators.include_pure {
            for y in 0..g.n_responses() {
                let d = one_hot(g.n_responses(), y);
                worst = worst.max(blackwell_distance(&policy_pref_vector(g, pi.probs(x), &d)?, p));
            }
        }
        Ok::<_, crate::Error>(worst)
    })?;
    let mean = per_prompt.iter().zip(gs.weights()).map(|(d, w)| d * w).sum();
    Ok(BlackwellReport { p, per_prompt, mean })
}
