//! Condorcet-winner and cycle audits over strict preference tournaments.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec;
use crate::game::{GameSet, PromptGame};
use crate::numeric::mix_seed;

/// Strict-preference digraph of one criterion: `i → j` iff `P[i][j] > threshold`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrictTournament {
    n: usize,
    edges: Vec<(usize, usize)>,
    ties: Vec<(usize, usize)>,
    out_degree: Vec<usize>,
}

impl StrictTournament {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Unordered tied pairs `(i, j)` with `i < j`.
    pub fn ties(&self) -> &[(usize, usize)] {
        &self.ties
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_degree[i]
    }

    /// Builds a tournament directly from strict edges (for tests and hand-built cases).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut dir = vec![None; n * n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(invalid(format!("bad edge ({a}, {b}) for n = {n}")));
            }
            if dir[b * n + a].is_some() || dir[a * n + b].is_some() {
                return Err(invalid(format!("pair ({a}, {b}) has more than one edge")));
            }
            dir[a * n + b] = Some(());
        }
        let mut out_degree = vec![0; n];
        let mut ties = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if dir[i * n + j].is_none() && dir[j * n + i].is_none() {
                    ties.push((i, j));
                }
            }
        }
        for &(a, _) in edges {
            out_degree[a] += 1;
        }
        Ok(Self {
            n,
            edges: edges.to_vec(),
            ties,
            out_degree,
        })
    }
}

/// Binarizes a row-major `n × n` preference matrix.
pub fn strict_tournament(matrix: &[f64], n: usize, threshold: f64) -> StrictTournament {
    assert_eq!(matrix.len(), n * n);
    let mut edges = Vec::new();
    let mut ties = Vec::new();
    let mut out_degree = vec![0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let p = matrix[i * n + j];
            if p > threshold {
                edges.push((i, j));
                out_degree[i] += 1;
            } else if p < threshold {
                edges.push((j, i));
                out_degree[j] += 1;
            } else {
                ties.push((i, j));
            }
        }
    }
    StrictTournament {
        n,
        edges,
        ties,
        out_degree,
    }
}

/// The response that strictly beats every other one, if any.
pub fn condorcet_winner(t: &StrictTournament) -> Option<usize> {
    if t.n == 1 {
        return Some(0);
    }
    (0..t.n).find(|&i| t.out_degree[i] == t.n - 1)
}

/// Whether the strict digraph has a directed cycle (some SCC with ≥ 2 nodes).
pub fn has_cycle(t: &StrictTournament) -> bool {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(t.n, t.edges.len());
    let nodes: Vec<_> = (0..t.n).map(|_| g.add_node(())).collect();
    for &(a, b) in &t.edges {
        g.add_edge(nodes[a], nodes[b], ());
    }
    tarjan_scc(&g).iter().any(|c| c.len() >= 2)
}

/// How criteria are handled before auditing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMode {
    /// Metrics per (prompt, criterion), averaged over criteria then prompts.
    PerCriterion,
    /// Criteria scalarized first (uniform weights when `None`).
    Aggregate(Option<Vec<f64>>),
}

impl AuditMode {
    pub fn label(&self) -> &'static str {
        match self {
            AuditMode::PerCriterion => "per_criterion",
            AuditMode::Aggregate(_) => "aggregate",
        }
    }
}

/// One row per response-subset size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub mode: String,
    pub fraction_no_condorcet: f64,
    pub fraction_intransitive: f64,
    pub n_prompts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
}

impl AuditReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| invalid(e.to_string()))?)
            .expect("csv is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn row(&self, n: usize) -> Option<&AuditRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Seeded response order for prompt `x`; subsets of size `N` are its prefixes.
pub fn subset_order(n_responses: usize, seed: u64, x: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_responses).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, x as u64]));
    order.shuffle(&mut rng);
    order
}

/// (no Condorcet winner, has cycle) indicators for one criterion matrix.
fn criterion_flags(game: &PromptGame, k: usize) -> (bool, bool) {
    let t = strict_tournament(game.matrix(k), game.n_responses(), 0.5);
    (condorcet_winner(&t).is_none(), has_cycle(&t))
}

/// Audits nested response subsets of every prompt.
pub fn audit(gs: &GameSet, subset_sizes: &[usize], mode: &AuditMode, seed: u64) -> Result<AuditReport> {
    let min_n = gs.games().iter().map(|g| g.n_responses()).min().unwrap_or(0);
    if let Some(&bad) = subset_sizes.iter().find(|&&n| n > min_n || n == 0) {
        return Err(invalid(format!(
            "subset size {bad} is not in 1..={min_n} (smallest game)"
        )));
    }
    let source = match mode {
        AuditMode::PerCriterion => gs.clone(),
        AuditMode::Aggregate(w) => crate::judge::scalarize_gameset(gs, w.as_deref())?,
    };
    // per prompt, per size: (no-CW fraction over criteria, cyclic fraction over criteria)
    let per_prompt: Vec<Vec<(f64, f64)>> = exec::try_map_indexed(source.len(), |x| {
        let g = source.game(x);
        let order = subset_order(g.n_responses(), seed, x);
        subset_sizes
            .iter()
            .map(|&n| {
                let sub = g.restrict(&order[..n])?;
                let m = sub.n_criteria() as f64;
                let (mut no_cw, mut cyc) = (0.0, 0.0);
                for k in 0..sub.n_criteria() {
                    let (a, b) = criterion_flags(&sub, k);
                    no_cw += a as u8 as f64;
                    cyc += b as u8 as f64;
                }
                Ok((no_cw / m, cyc / m))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let rows = subset_sizes
        .iter()
        .enumerate()
        .map(|(s, &n)| {
            let (mut a, mut b) = (0.0, 0.0);
            for (x, w) in source.weights().iter().enumerate() {
                a += w * per_prompt[x][s].0;
                b += w * per_prompt[x][s].1;
            }
            AuditRow {
                n,
                mode: mode.label().to_string(),
                fraction_no_condorcet: a.clamp(0.0, 1.0),
                fraction_intransitive: b.clamp(0.0, 1.0),
                n_prompts: source.len(),
            }
        })
        .collect();
    Ok(AuditReport { rows })
}
