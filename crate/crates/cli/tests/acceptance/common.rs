use maxent_bw::game::PromptGame;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Normalized exponentials: a uniform draw from the open simplex.
pub fn simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-12).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Independent uniform upper-triangle entries, complemented below the diagonal.
pub fn random_game(rng: &mut ChaCha8Rng, n: usize, m: usize) -> PromptGame {
    let mats = (0..m)
        .map(|_| {
            let mut a = vec![vec![0.5; n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    let p: f64 = rng.random();
                    a[i][j] = p;
                    a[j][i] = 1.0 - p;
                }
            }
            a
        })
        .collect();
    PromptGame::from_matrices("inst", mats).unwrap()
}

/// `P_π^k(y′) = Σ_y π(y) P^k(y ≻ y′)` by direct summation.
pub fn pref_col(game: &PromptGame, k: usize, pi: &[f64]) -> Vec<f64> {
    let n = pi.len();
    (0..n)
        .map(|yp| (0..n).map(|y| pi[y] * game.pref(k, y, yp)).sum())
        .collect()
}

/// `−β ln Σ π_ref(y′) exp(−⟨w, P_π(y′)⟩/β)` by direct summation with a max shift.
pub fn soft_value(game: &PromptGame, pi: &[f64], pi_ref: &[f64], w: &[f64], beta: f64) -> f64 {
    let n = pi.len();
    let mut mixed = vec![0.0; n];
    for (k, wk) in w.iter().enumerate() {
        for (m, c) in mixed.iter_mut().zip(pref_col(game, k, pi)) {
            *m += wk * c;
        }
    }
    let lo = mixed.iter().copied().fold(f64::INFINITY, f64::min);
    let z: f64 = pi_ref
        .iter()
        .zip(&mixed)
        .map(|(r, c)| r * (-(c - lo) / beta).exp())
        .sum();
    lo - beta * z.ln()
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub fn mix(a: &[f64], b: &[f64], lambda: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect()
}

pub fn rmse(errors: &[f64]) -> f64 {
    (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt()
}
