use maxent_bw::game::GameSet;
use maxent_bw::judge::gen_cyclic_game;
use maxent_bw::policy::TabularPolicy;
use maxent_bw::solver::{solve_exact, SolveOptions};

use crate::common::tv;
use crate::Outcome;

pub fn run() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, n) in [3usize, 5, 7].into_iter().enumerate() {
        for strength in [0.1, 0.3, 0.5] {
            let g = gen_cyclic_game(7_000 + i as u64, n, 1, strength).unwrap();
            let gs = GameSet::uniform(vec![g]).unwrap();
            let uni = TabularPolicy::uniform(&gs);
            let trace = solve_exact(&gs, &uni, 0.1, None, 100_000, SolveOptions::default()).unwrap();
            let u = vec![1.0 / n as f64; n];
            worst = worst.max(tv(trace.best.probs(0), &u)).max(tv(trace.last.probs(0), &u));
        }
    }
    Outcome::new(
        worst <= 1e-3,
        format!("N in {{3,5,7}}, strengths {{0.1,0.3,0.5}}: max TV to uniform {worst:.2e} (tol 1e-3)"),
    )
}
