//! Synthetic judges: latent-utility and cyclic generators, joint-check
//! scalarization, the Likert scoring protocol, and judgment-log ingestion.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{GameSet, PromptGame};
use crate::numeric::{check_simplex, logistic, mix_seed};

/// Per-criterion utilities `u_k(i)` with a shared temperature.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentUtilityModel {
    utilities: Vec<Vec<f64>>,
    tau: f64,
}

impl LatentUtilityModel {
    /// `utilities[k][i]` is response `i`'s utility under criterion `k`.
    pub fn new(utilities: Vec<Vec<f64>>, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(invalid("temperature must be positive"));
        }
        if utilities.is_empty() || utilities[0].is_empty() {
            return Err(invalid("need at least one criterion and one response"));
        }
        let n = utilities[0].len();
        if utilities.iter().any(|u| u.len() != n || u.iter().any(|v| !v.is_finite())) {
            return Err(invalid("utilities must be finite with equal lengths"));
        }
        Ok(Self { utilities, tau })
    }

    /// Utilities drawn i.i.d. from a seeded unit normal.
    pub fn sample(seed: u64, n: usize, m: usize, tau: f64) -> Result<Self> {
        if n < 2 || m < 1 {
            return Err(invalid("random-utility game needs N >= 2 and m >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let utilities = (0..m)
            .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        Self::new(utilities, tau)
    }

    pub fn utilities(&self) -> &[Vec<f64>] {
        &self.utilities
    }

    /// `P[k][i][j] = logistic((u_k(i) − u_k(j)) / τ)`.
    pub fn to_game(&self, prompt_id: impl Into<String>) -> PromptGame {
        let n = self.utilities[0].len();
        let m = self.utilities.len();
        let mut pref = Vec::with_capacity(m * n * n);
        for u in &self.utilities {
            for i in 0..n {
                for j in 0..n {
                    pref.push(logistic((u[i] - u[j]) / self.tau));
                }
            }
        }
        let names = (0..m).map(|k| format!("c{k}")).collect();
        PromptGame::from_flat(prompt_id.into(), names, n, pref)
    }
}

/// Transitive-per-criterion game from seeded random utilities.
pub fn gen_random_utility_game(seed: u64, n: usize, m: usize, tau: f64) -> Result<PromptGame> {
    Ok(LatentUtilityModel::sample(seed, n, m, tau)?.to_game(format!("ru-{seed}")))
}

/// Circulant tournament of strength `s`; criterion 0 uses the identity
/// labeling, later criteria a seeded random relabeling of the responses.
pub fn gen_cyclic_game(seed: u64, n: usize, m: usize, strength: f64) -> Result<PromptGame> {
    if n < 3 {
        return Err(invalid("cyclic game needs N >= 3"));
    }
    if m < 1 {
        return Err(invalid("cyclic game needs m >= 1"));
    }
    if !(0.0..=0.5).contains(&strength) {
        return Err(invalid("cyclic strength must lie in [0, 1/2]"));
    }
    let half = (n - 1) / 2;
    let base = |i: usize, j: usize| -> f64 {
        let d = (j + n - i) % n;
        if d == 0 {
            0.5
        } else if d <= half {
            0.5 + strength
        } else if d >= n - half {
            0.5 - strength
        } else {
            0.5
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pref = vec![0.0; m * n * n];
    for k in 0..m {
        let mut perm: Vec<usize> = (0..n).collect();
        if k > 0 {
            use rand::seq::SliceRandom;
            perm.shuffle(&mut rng);
        }
        for i in 0..n {
            for j in 0..n {
                pref[(k * n + perm[i]) * n + perm[j]] = base(i, j);
            }
        }
    }
    let names = (0..m).map(|k| format!("c{k}")).collect();
    Ok(PromptGame::from_flat(format!("cyc-{seed}"), names, n, pref))
}

/// Collapses all criteria into one: `P_JC = Σ_k w_k P[k]`.
pub fn scalarize_to_jc(game: &PromptGame, weights: &[f64]) -> Result<PromptGame> {
    check_simplex(weights, game.n_criteria(), "scalarization weights")?;
    let n = game.n_responses();
    let mut pref = vec![0.0; n * n];
    for (k, &w) in weights.iter().enumerate() {
        for (o, &p) in pref.iter_mut().zip(game.matrix(k)) {
            *o += w * p;
        }
    }
    for v in pref.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(PromptGame::from_flat(game.prompt_id().to_string(), vec!["joint".into()], n, pref))
}

/// Uniform-weight scalarization of every game in a set.
pub fn scalarize_gameset(gs: &GameSet, weights: Option<&[f64]>) -> Result<GameSet> {
    gs.map_games(|g| match weights {
        Some(w) => scalarize_to_jc(g, w),
        None => scalarize_to_jc(g, &vec![1.0 / g.n_criteria() as f64; g.n_criteria()]),
    })
}

/// Simulated Likert judging: repeated quantized queries, optionally averaged
/// over both presentation orders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LikertConfig {
    pub levels: usize,
    /// Queries per presentation order.
    pub n_queries: usize,
    pub noise_sd: f64,
    pub swap_average: bool,
}

impl Default for LikertConfig {
    fn default() -> Self {
        Self {
            levels: 5,
            n_queries: 5,
            noise_sd: 0.1,
            swap_average: true,
        }
    }
}

impl LikertConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(invalid("Likert levels must be at least 2"));
        }
        if self.n_queries < 1 {
            return Err(invalid("Likert n_queries must be at least 1"));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(invalid("Likert noise_sd must be nonnegative"));
        }
        Ok(())
    }
}

/// Nearest point of `{0, 1/(L−1), …, 1}`; exact ties round toward 1/2.
pub fn quantize(x: f64, levels: usize) -> f64 {
    let steps = (levels - 1) as f64;
    let t = x.clamp(0.0, 1.0) * steps;
    let lo = t.floor();
    let frac = t - lo;
    let idx = if frac > 0.5 {
        lo + 1.0
    } else if frac < 0.5 {
        lo
    } else if (lo + 0.5) < 0.5 * steps {
        lo + 1.0
    } else {
        lo
    };
    idx / steps
}

/// Likert score of one pair from explicit noise draws.
///
/// `fwd_noise` perturbs the queries that show `a` first, `swp_noise` the
/// queries that show `b` first; an empty `swp_noise` disables swap averaging.
/// Exchanging the roles of the two responses maps the score to its complement:
/// `likert_pair_score(1 − p, swp, fwd) = 1 − likert_pair_score(p, fwd, swp)`.
pub fn likert_pair_score(p: f64, fwd_noise: &[f64], swp_noise: &[f64], levels: usize) -> f64 {
    let mean = |p: f64, noise: &[f64]| {
        noise.iter().map(|e| quantize((p + e).clamp(0.0, 1.0), levels)).sum::<f64>() / noise.len() as f64
    };
    let fwd = mean(p, fwd_noise);
    if swp_noise.is_empty() {
        fwd
    } else {
        0.5 * (fwd + (1.0 - mean(1.0 - p, swp_noise)))
    }
}

/// Runs the Likert protocol on every unordered pair of every criterion.
///
/// Every query draws its own Gaussian noise, independently for the forward and
/// the swapped presentation. Pairs are visited criterion-major with `i < j`.
pub fn apply_likert_protocol(game: &PromptGame, cfg: &LikertConfig, seed: u64) -> Result<PromptGame> {
    cfg.validate()?;
    let n = game.n_responses();
    let m = game.n_criteria();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, cfg.noise_sd).map_err(|e| invalid(e.to_string()))?;
    let mut pref = Vec::with_capacity(m * n * n);
    for k in 0..m {
        pref.extend_from_slice(game.matrix(k));
    }
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..cfg.n_queries)
            .map(|_| if cfg.noise_sd > 0.0 { noise.sample(rng) } else { 0.0 })
            .collect()
    };
    for k in 0..m {
        for i in 0..n {
            for j in (i + 1)..n {
                let fwd = draw(&mut rng);
                let swp = if cfg.swap_average { draw(&mut rng) } else { Vec::new() };
                let s = likert_pair_score(game.pref(k, i, j), &fwd, &swp, cfg.levels);
                pref[(k * n + i) * n + j] = s;
                pref[(k * n + j) * n + i] = 1.0 - s;
            }
        }
    }
    Ok(PromptGame::from_flat(
        game.prompt_id().to_string(),
        game.criterion_names().to_vec(),
        n,
        pref,
    ))
}

/// One line of a judgment log.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub prompt_id: String,
    pub criterion: String,
    pub a: usize,
    pub b: usize,
    /// Probability that `a` beats `b`.
    pub score: f64,
}

#[derive(Default)]
struct PairScores {
    fwd_sum: f64,
    fwd_n: usize,
    rev_sum: f64,
    rev_n: usize,
}

/// Reads a line-delimited JSON judgment log into a uniformly weighted game set.
pub fn ingest_log(path: impl AsRef<Path>) -> Result<GameSet> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(std::io::BufReader::new(file))
}

/// As [`ingest_log`], from any buffered reader.
///
/// Orientation `a < b` is forward; a reversed record contributes `1 − score`.
/// When both orders are present the two order means are averaged.
pub fn ingest_reader(reader: impl BufRead) -> Result<GameSet> {
    // prompt -> (criteria in first-seen order, max index, pair table)
    let mut prompt_order: Vec<String> = Vec::new();
    let mut prompts: HashMap<String, (Vec<String>, usize, HashMap<(usize, usize, usize), PairScores>)> =
        HashMap::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JudgmentRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if !(0.0..=1.0).contains(&rec.score) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("score {} outside [0, 1]", rec.score),
            });
        }
        if rec.a == rec.b {
            return Err(Error::Parse {
                line: lineno,
                message: format!("self-comparison of response {}", rec.a),
            });
        }
        let entry = prompts.entry(rec.prompt_id.clone()).or_insert_with(|| {
            prompt_order.push(rec.prompt_id.clone());
            (Vec::new(), 0, HashMap::new())
        });
        let k = match entry.0.iter().position(|c| *c == rec.criterion) {
            Some(k) => k,
            None => {
                entry.0.push(rec.criterion.clone());
                entry.0.len() - 1
            }
        };
        entry.1 = entry.1.max(rec.a).max(rec.b);
        let (lo, hi) = (rec.a.min(rec.b), rec.a.max(rec.b));
        let cell = entry.2.entry((k, lo, hi)).or_default();
        if rec.a < rec.b {
            cell.fwd_sum += rec.score;
            cell.fwd_n += 1;
        } else {
            cell.rev_sum += 1.0 - rec.score;
            cell.rev_n += 1;
        }
    }

    if prompt_order.is_empty() {
        return Err(invalid("judgment log is empty"));
    }
    let mut games = Vec::with_capacity(prompt_order.len());
    for pid in prompt_order {
        let (criteria, max_idx, table) = prompts.remove(&pid).expect("prompt recorded");
        let n = max_idx + 1;
        let m = criteria.len();
        let mut pref = vec![0.5; m * n * n];
        for (k, cname) in criteria.iter().enumerate() {
            for i in 0..n {
                for j in (i + 1)..n {
                    let cell = table.get(&(k, i, j)).ok_or_else(|| Error::IncompleteLog {
                        prompt: pid.clone(),
                        criterion: cname.clone(),
                        a: i,
                        b: j,
                    })?;
                    let fwd = (cell.fwd_n > 0).then(|| cell.fwd_sum / cell.fwd_n as f64);
                    let rev = (cell.rev_n > 0).then(|| cell.rev_sum / cell.rev_n as f64);
                    let s = match (fwd, rev) {
                        (Some(f), Some(r)) => 0.5 * (f + r),
                        (Some(f), None) => f,
                        (None, Some(r)) => r,
                        (None, None) => unreachable!("cell exists only after a record"),
                    };
                    pref[(k * n + i) * n + j] = s;
                    pref[(k * n + j) * n + i] = 1.0 - s;
                }
            }
        }
        games.push(PromptGame::from_flat(pid, criteria, n, pref));
    }
    GameSet::uniform(games)
}

/// Game-set generators keyed by a base seed; prompt `x` uses `mix_seed([seed, x])`.
pub fn random_utility_gameset(seed: u64, prompts: usize, n: usize, m: usize, tau: f64) -> Result<GameSet> {
    let games = (0..prompts)
        .map(|x| {
            let model = LatentUtilityModel::sample(mix_seed(&[seed, x as u64]), n, m, tau)?;
            Ok(model.to_game(format!("p{x:04}")))
        })
        .collect::<Result<Vec<_>>>()?;
    GameSet::uniform(games)
}

pub fn cyclic_gameset(seed: u64, prompts: usize, n: usize, m: usize, strength: f64) -> Result<GameSet> {
    let games = (0..prompts)
        .map(|x| {
            let g = gen_cyclic_game(mix_seed(&[seed, x as u64]), n, m, strength)?;
            Ok(rename(g, format!("p{x:04}")))
        })
        .collect::<Result<Vec<_>>>()?;
    GameSet::uniform(games)
}

/// Likert protocol on every prompt; prompt `x` uses `mix_seed([seed, x, 1])`.
pub fn likert_gameset(gs: &GameSet, cfg: &LikertConfig, seed: u64) -> Result<GameSet> {
    let games = gs
        .games()
        .iter()
        .enumerate()
        .map(|(x, g)| apply_likert_protocol(g, cfg, mix_seed(&[seed, x as u64, 1])))
        .collect::<Result<Vec<_>>>()?;
    GameSet::new(games, gs.weights().to_vec())
}

pub(crate) fn rename(g: PromptGame, id: String) -> PromptGame {
    let n = g.n_responses();
    let names = g.criterion_names().to_vec();
    let flat = (0..g.n_criteria()).flat_map(|k| g.matrix(k).to_vec()).collect();
    PromptGame::from_flat(id, names, n, flat)
}
