//! Reference solver for the single-criterion (unregularized) preference game:
//! `max_π min_{y′ ∈ S} P_π(y′)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::game::PromptGame;

/// Largest response count solved by exhaustive vertex enumeration.
pub const ENUMERATION_LIMIT: usize = 12;

/// Value and a maximizing policy of the single-criterion game against
/// comparators restricted to `support`.
///
/// Up to [`ENUMERATION_LIMIT`] responses the linear program is solved exactly
/// by enumerating (policy support, active comparator) vertex pairs. Larger
/// games fall back to averaged multiplicative-weights self-play, accurate to
/// roughly `1e-3`.
pub fn von_neumann_value(game: &PromptGame, support: &[usize]) -> Result<(f64, Vec<f64>)> {
    if game.n_criteria() != 1 {
        return Err(invalid("von Neumann value needs a single-criterion game"));
    }
    let n = game.n_responses();
    if support.is_empty() || support.iter().any(|&s| s >= n) {
        return Err(invalid("comparator support must be a nonempty subset of the responses"));
    }
    if n <= ENUMERATION_LIMIT {
        Ok(enumerate_vertices(game, support))
    } else {
        Ok(multiplicative_weights(game, support, 200_000))
    }
}

fn subsets_of_size(items: &[usize], size: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(items: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < size - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, size, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, size, 0, &mut Vec::with_capacity(size), out);
}

fn enumerate_vertices(game: &PromptGame, support: &[usize]) -> (f64, Vec<f64>) {
    const FEAS: f64 = 1e-10;
    let n = game.n_responses();
    let all: Vec<usize> = (0..n).collect();
    let mut best_v = f64::NEG_INFINITY;
    let mut best_pi = vec![0.0; n];
    for s in 1..=n.min(support.len()) {
        let mut rows = Vec::new();
        subsets_of_size(&all, s, &mut rows);
        let mut cols = Vec::new();
        subsets_of_size(support, s, &mut cols);
        for rset in &rows {
            for cset in &cols {
                // unknowns (π_I, v): Σ_i π_i P[i][j] − v = 0 for j ∈ J, Σ π_i = 1
                let mut a = DMatrix::<f64>::zeros(s + 1, s + 1);
                let mut b = DVector::<f64>::zeros(s + 1);
                for (r, &j) in cset.iter().enumerate() {
                    for (c, &i) in rset.iter().enumerate() {
                        a[(r, c)] = game.pref(0, i, j);
                    }
                    a[(r, s)] = -1.0;
                }
                for c in 0..s {
                    a[(s, c)] = 1.0;
                }
                b[s] = 1.0;
                let Some(sol) = a.lu().solve(&b) else { continue };
                if sol.iter().any(|v| !v.is_finite()) {
                    continue;
                }
                let v = sol[s];
                if v <= best_v || (0..s).any(|c| sol[c] < -FEAS) {
                    continue;
                }
                let mut pi = vec![0.0; n];
                for (c, &i) in rset.iter().enumerate() {
                    pi[i] = sol[c].max(0.0);
                }
                let total: f64 = pi.iter().sum();
                pi.iter_mut().for_each(|p| *p /= total);
                let worst = support
                    .iter()
                    .map(|&j| (0..n).map(|i| pi[i] * game.pref(0, i, j)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                if worst >= v - FEAS {
                    best_v = worst;
                    best_pi = pi;
                }
            }
        }
    }
    (best_v, best_pi)
}

fn multiplicative_weights(game: &PromptGame, support: &[usize], rounds: usize) -> (f64, Vec<f64>) {
    let n = game.n_responses();
    let eta = ((n as f64).ln() / rounds as f64).sqrt();
    let mut row_log = vec![0.0; n];
    let mut col_log = vec![0.0; support.len()];
    let mut avg = vec![0.0; n];
    for _ in 0..rounds {
        let p = crate::numeric::softmax(&row_log);
        let q = crate::numeric::softmax(&col_log);
        for (a, pi) in avg.iter_mut().zip(&p) {
            *a += pi / rounds as f64;
        }
        for i in 0..n {
            row_log[i] += eta * support.iter().zip(&q).map(|(&j, qj)| qj * game.pref(0, i, j)).sum::<f64>();
        }
        for (c, &j) in support.iter().enumerate() {
            col_log[c] -= eta * (0..n).map(|i| p[i] * game.pref(0, i, j)).sum::<f64>();
        }
    }
    let worst = support
        .iter()
        .map(|&j| (0..n).map(|i| avg[i] * game.pref(0, i, j)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (worst, avg)
}
