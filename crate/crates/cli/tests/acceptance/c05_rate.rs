use maxent_bw::eval::convergence_study;
use maxent_bw::game::GameSet;
use rand::Rng;

use crate::common::{random_game, rng};
use crate::Outcome;

const HORIZONS: [usize; 3] = [100, 1_000, 10_000];
const ORACLE_T: usize = 1_000_000;

fn factory(seed: u64) -> maxent_bw::Result<GameSet> {
    let mut r = rng(5_000 + seed);
    let n = r.random_range(3..=10);
    let m = r.random_range(1..=5);
    GameSet::uniform(vec![random_game(&mut r, n, m)])
}

pub fn run() -> Outcome {
    let seeds: Vec<u64> = (0..20).collect();
    let table = convergence_study(factory, &[0.5], &HORIZONS, &seeds, ORACLE_T).unwrap();
    let slope = table.slopes[0].slope;
    let last: Vec<_> = table.cells.iter().filter(|c| c.t == 10_000).collect();
    let ratio = |gap: f64, init: f64| if init > 0.0 { gap.max(0.0) / init } else { 0.0 };
    let per_game: Vec<f64> = last.iter().map(|c| ratio(c.gap, c.initial_gap)).collect();
    let worst_ratio = per_game.iter().copied().fold(0.0, f64::max);
    let games_ok = per_game.iter().filter(|&&r| r <= 1e-2).count();
    let mean_initial = last.iter().map(|c| c.initial_gap).sum::<f64>() / last.len() as f64;
    let agg_ratio = ratio(table.mean_gap(0.5, 10_000), mean_initial);
    let means: Vec<String> = HORIZONS
        .iter()
        .map(|&t| format!("{:.2e}", table.mean_gap(0.5, t)))
        .collect();
    Outcome::new(
        slope <= -0.4 && agg_ratio <= 1e-2,
        format!(
            "20 games, mean gaps [{}], slope {slope:.3} (need <= -0.4), mean gap(1e4)/mean initial {agg_ratio:.2e} (need <= 1e-2); per game {games_ok}/20 within 1e-2, worst {worst_ratio:.2e}",
            means.join(", ")
        ),
    )
}
