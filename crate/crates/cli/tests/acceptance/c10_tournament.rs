use maxent_bw::eval::{tournament, TournamentMode};
use maxent_bw::game::GameSet;
use maxent_bw::policy::TabularPolicy;
use rand::Rng;

use crate::common::{random_game, rng, simplex};
use crate::Outcome;

pub fn run() -> Outcome {
    let mut r = rng(10_000);
    let prompts = 6;
    let games: Vec<_> = (0..prompts)
        .map(|_| {
            let n = r.random_range(3..=8);
            let m = r.random_range(1..=4);
            random_game(&mut r, n, m)
        })
        .collect();
    let gs = GameSet::new(games, simplex(&mut r, prompts)).unwrap();
    let pols: Vec<(String, TabularPolicy)> = (0..4)
        .map(|i| {
            let p = gs.games().iter().map(|g| simplex(&mut r, g.n_responses())).collect();
            (format!("pi{i}"), TabularPolicy::new(p).unwrap())
        })
        .collect();
    let exp = tournament(&pols, &gs, TournamentMode::Expected).unwrap();
    let s4 = tournament(&pols, &gs, TournamentMode::Sampled { n: 10_000, seed: 1 }).unwrap();
    let s5 = tournament(&pols, &gs, TournamentMode::Sampled { n: 100_000, seed: 2 }).unwrap();
    let k = pols.len();
    let (mut anti_e, mut anti_s, mut diag, mut agree): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..k {
        diag = diag.max((exp.w[i][i] - 0.5).abs()).max((s4.w[i][i] - 0.5).abs());
        for j in 0..k {
            anti_e = anti_e.max((exp.w[i][j] + exp.w[j][i] - 1.0).abs());
            anti_s = anti_s.max((s4.w[i][j] + s4.w[j][i] - 1.0).abs());
            agree = agree.max((s5.w[i][j] - exp.w[i][j]).abs());
        }
    }
    let tol_s = 2.0 / (10_000f64).sqrt();
    Outcome::new(
        anti_e <= 1e-10 && anti_s <= tol_s && diag == 0.0 && agree <= 0.01,
        format!(
            "antisymmetry expected {anti_e:.1e} (tol 1e-10), sampled {anti_s:.1e} (tol {tol_s}); diagonal dev {diag:.1e}; sampled(1e5) vs expected {agree:.4} (tol 0.01)"
        ),
    )
}
