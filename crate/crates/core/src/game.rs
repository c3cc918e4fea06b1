//! Multi-criterion preference games and the bilinear preference algebra.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::check_simplex;

/// Tolerance used when validating complementarity.
pub const COMPLEMENT_TOL: f64 = 1e-12;

/// One prompt's preference tensor `P[k][i][j]`: the probability that response
/// `i` beats response `j` under criterion `k`.
///
/// Construction symmetrizes the input (`P[i][j] ← (P[i][j] + 1 − P[j][i]) / 2`)
/// and pins the diagonal at one half, so every stored tensor satisfies
/// `P[k][i][j] + P[k][j][i] = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PromptGame {
    prompt_id: String,
    n: usize,
    criteria: Vec<String>,
    /// Dense `m × n × n`, row-major.
    pref: Vec<f64>,
}

impl PromptGame {
    /// Builds a game from named criterion matrices.
    pub fn new(
        prompt_id: impl Into<String>,
        criteria: Vec<(String, Vec<Vec<f64>>)>,
    ) -> Result<Self> {
        let prompt_id = prompt_id.into();
        if criteria.is_empty() {
            return Err(invalid(format!("prompt `{prompt_id}`: at least one criterion required")));
        }
        let n = criteria[0].1.len();
        if n == 0 {
            return Err(invalid(format!("prompt `{prompt_id}`: no responses")));
        }
        let mut names = Vec::with_capacity(criteria.len());
        let mut flat = Vec::with_capacity(criteria.len() * n * n);
        for (name, rows) in criteria {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(invalid(format!(
                    "prompt `{prompt_id}` criterion `{name}`: matrix must be {n}x{n}"
                )));
            }
            for row in &rows {
                for &v in row {
                    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                        return Err(invalid(format!(
                            "prompt `{prompt_id}` criterion `{name}`: entry {v} outside [0, 1]"
                        )));
                    }
                }
            }
            names.push(name);
            flat.extend(rows.into_iter().flatten());
        }
        Ok(Self::from_flat(prompt_id, names, n, flat))
    }

    /// Unnamed criteria get the names `c0, c1, …`.
    pub fn from_matrices(prompt_id: impl Into<String>, matrices: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let criteria = matrices
            .into_iter()
            .enumerate()
            .map(|(k, m)| (format!("c{k}"), m))
            .collect();
        Self::new(prompt_id, criteria)
    }

    /// Symmetrizes a flat tensor whose entries are already known to lie in [0, 1].
    pub(crate) fn from_flat(prompt_id: String, criteria: Vec<String>, n: usize, mut pref: Vec<f64>) -> Self {
        let m = criteria.len();
        debug_assert_eq!(pref.len(), m * n * n);
        for k in 0..m {
            let base = k * n * n;
            for i in 0..n {
                pref[base + i * n + i] = 0.5;
                for j in (i + 1)..n {
                    let (a, b) = (pref[base + i * n + j], pref[base + j * n + i]);
                    if b == 1.0 - a {
                        continue;
                    }
                    let upper = 0.5 * (a + 1.0 - b);
                    pref[base + i * n + j] = upper;
                    pref[base + j * n + i] = 1.0 - upper;
                }
            }
        }
        Self {
            prompt_id,
            n,
            criteria,
            pref,
        }
    }

    pub fn prompt_id(&self) -> &str {
        &self.prompt_id
    }

    pub fn n_responses(&self) -> usize {
        self.n
    }

    pub fn n_criteria(&self) -> usize {
        self.criteria.len()
    }

    pub fn criterion_names(&self) -> &[String] {
        &self.criteria
    }

    #[inline]
    pub fn pref(&self, k: usize, i: usize, j: usize) -> f64 {
        self.pref[(k * self.n + i) * self.n + j]
    }

    /// Criterion `k` as a row-major `n × n` slice.
    #[inline]
    pub fn matrix(&self, k: usize) -> &[f64] {
        let nn = self.n * self.n;
        &self.pref[k * nn..(k + 1) * nn]
    }

    pub fn matrix_rows(&self, k: usize) -> Vec<Vec<f64>> {
        self.matrix(k).chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// `P_π^k(y′) = Σ_y π(y) P[k][y][y′]` for every `y′`, written into `out`.
    pub fn pref_against_into(&self, k: usize, pi: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mat = self.matrix(k);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (y, &w) in pi.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let row = &mat[y * n..(y + 1) * n];
            for (o, &p) in out.iter_mut().zip(row) {
                *o += w * p;
            }
        }
    }

    pub fn pref_against(&self, k: usize, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.pref_against_into(k, pi, &mut out);
        out
    }

    /// Restricts the game to the given responses (in the given order).
    pub fn restrict(&self, responses: &[usize]) -> Result<Self> {
        if let Some(&bad) = responses.iter().find(|&&r| r >= self.n) {
            return Err(invalid(format!("response {bad} out of range for N = {}", self.n)));
        }
        let s = responses.len();
        let mut pref = Vec::with_capacity(self.n_criteria() * s * s);
        for k in 0..self.n_criteria() {
            for &i in responses {
                for &j in responses {
                    pref.push(self.pref(k, i, j));
                }
            }
        }
        Ok(Self {
            prompt_id: self.prompt_id.clone(),
            n: s,
            criteria: self.criteria.clone(),
            pref,
        })
    }

    /// Checks range, diagonal and complementarity.
    pub fn validate(&self) -> Result<()> {
        for k in 0..self.n_criteria() {
            for i in 0..self.n {
                if self.pref(k, i, i) != 0.5 {
                    return Err(invalid(format!("criterion {k}: diagonal entry {i} is not 1/2")));
                }
                for j in 0..self.n {
                    let v = self.pref(k, i, j);
                    if !(0.0..=1.0).contains(&v) {
                        return Err(invalid(format!("criterion {k}: entry ({i},{j}) = {v} outside [0,1]")));
                    }
                    if (v + self.pref(k, j, i) - 1.0).abs() > COMPLEMENT_TOL {
                        return Err(invalid(format!("criterion {k}: pair ({i},{j}) not complementary")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A weighted collection of prompt games (the prompt distribution).
#[derive(Clone, Debug, PartialEq)]
pub struct GameSet {
    games: Vec<PromptGame>,
    weights: Vec<f64>,
}

impl GameSet {
    pub fn new(games: Vec<PromptGame>, weights: Vec<f64>) -> Result<Self> {
        if games.is_empty() {
            return Err(invalid("game set must contain at least one game"));
        }
        check_simplex(&weights, games.len(), "prompt weights")?;
        Ok(Self { games, weights })
    }

    /// Equal weight on every game.
    pub fn uniform(games: Vec<PromptGame>) -> Result<Self> {
        let w = vec![1.0 / games.len().max(1) as f64; games.len()];
        Self::new(games, w)
    }

    pub fn games(&self) -> &[PromptGame] {
        &self.games
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }

    pub fn game(&self, x: usize) -> &PromptGame {
        &self.games[x]
    }

    /// Applies a per-game transform, keeping the weights.
    pub fn map_games<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&PromptGame) -> Result<PromptGame>,
    {
        let games = self.games.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(games, self.weights.clone())
    }

    /// True when both sets describe the same prompts and response counts.
    pub fn same_shape(&self, other: &GameSet) -> bool {
        self.len() == other.len()
            && self
                .games
                .iter()
                .zip(&other.games)
                .all(|(a, b)| a.prompt_id == b.prompt_id && a.n == b.n)
    }

    pub fn to_doc(&self) -> GameSetDoc {
        GameSetDoc {
            games: self
                .games
                .iter()
                .map(|g| GameDoc {
                    prompt_id: g.prompt_id.clone(),
                    n_responses: g.n,
                    criteria: (0..g.n_criteria())
                        .map(|k| CriterionDoc {
                            name: g.criteria[k].clone(),
                            matrix: g.matrix_rows(k),
                        })
                        .collect(),
                })
                .collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn from_doc(doc: GameSetDoc) -> Result<Self> {
        let games = doc
            .games
            .into_iter()
            .map(|g| {
                if g.criteria.iter().any(|c| c.matrix.len() != g.n_responses) {
                    return Err(invalid(format!(
                        "prompt `{}`: matrices do not match n_responses = {}",
                        g.prompt_id, g.n_responses
                    )));
                }
                PromptGame::new(
                    g.prompt_id,
                    g.criteria.into_iter().map(|c| (c.name, c.matrix)).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(games, doc.weights)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// Serialized form of a [`GameSet`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameSetDoc {
    pub games: Vec<GameDoc>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameDoc {
    pub prompt_id: String,
    pub n_responses: usize,
    pub criteria: Vec<CriterionDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionDoc {
    pub name: String,
    pub matrix: Vec<Vec<f64>>,
}

/// Preference of mixed policy `a` over `b` on each criterion: `aᵀ P[k] b`.
pub fn policy_pref_vector(game: &PromptGame, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = game.n_responses();
    if a.len() != n || b.len() != n {
        return Err(invalid(format!(
            "policy lengths ({}, {}) do not match N = {n}",
            a.len(),
            b.len()
        )));
    }
    // ½ + Σ_{i<j} (a_i b_j − a_j b_i)(P_ij − ½): exact ½ for a = b and exact complementarity
    Ok((0..game.n_criteria())
        .map(|k| {
            let mat = game.matrix(k);
            let mut s = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    s += (a[i] * b[j] - a[j] * b[i]) * (mat[i * n + j] - 0.5);
                }
            }
            (0.5 + s).clamp(0.0, 1.0)
        })
        .collect())
}

/// ℓ∞ distance from `v` to the target set `[p, ∞)^m`.
pub fn blackwell_distance(v: &[f64], p: f64) -> f64 {
    debug_assert!((0.5..=1.0).contains(&p));
    v.iter().map(|&x| (p - x).max(0.0)).fold(0.0, f64::max)
}
