use maxent_bw::game::GameSet;
use maxent_bw::policy::TabularPolicy;
use maxent_bw::solver::{adversary_best_response, game_value, partition_value, regularized_objective};
use rand::Rng;

use crate::common::{mix, random_game, rng, simplex};
use crate::Outcome;

const TOL: f64 = 1e-9;

pub fn run() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for i in 0..1000u64 {
        let mut r = rng(1_000 + i);
        let n = r.random_range(2..=10);
        let m = r.random_range(1..=5);
        let beta = if i % 2 == 0 { 0.1 } else { 1.0 };
        let lambda: f64 = r.random();
        let prompts = r.random_range(1..=3);
        let games: Vec<_> = (0..prompts).map(|_| random_game(&mut r, n, m)).collect();
        let p1: Vec<Vec<f64>> = (0..prompts).map(|_| simplex(&mut r, n)).collect();
        let p2: Vec<Vec<f64>> = (0..prompts).map(|_| simplex(&mut r, n)).collect();
        let pr: Vec<Vec<f64>> = (0..prompts).map(|_| simplex(&mut r, n)).collect();
        let pm: Vec<Vec<f64>> = p1.iter().zip(&p2).map(|(a, b)| mix(a, b, lambda)).collect();

        let mut slacks = Vec::new();
        let g = &games[0];
        for k in 0..m {
            let f = |p: &[f64]| partition_value(g, p, &pr[0], k, beta).unwrap();
            slacks.push(f(&pm[0]) - lambda * f(&p1[0]) - (1.0 - lambda) * f(&p2[0]));
        }
        // concavity in the criterion weights at fixed π
        let (w1, w2) = (simplex(&mut r, m), simplex(&mut r, m));
        let wm = mix(&w1, &w2, lambda);
        let h = |w: &[f64]| {
            let adv = adversary_best_response(g, &p1[0], &pr[0], w, beta).unwrap();
            regularized_objective(g, &p1[0], &adv, &pr[0], w, beta).unwrap()
        };
        slacks.push(h(&wm) - lambda * h(&w1) - (1.0 - lambda) * h(&w2));

        let weights = simplex(&mut r, prompts);
        let gs = GameSet::new(games, weights).unwrap();
        let refp = TabularPolicy::new(pr).unwrap();
        let v = |p: Vec<Vec<f64>>| game_value(&gs, &TabularPolicy::new(p).unwrap(), &refp, beta).unwrap().total;
        slacks.push(v(pm) - lambda * v(p1) - (1.0 - lambda) * v(p2));

        for s in slacks {
            worst = worst.min(s);
            if s < -TOL {
                violations += 1;
            }
        }
    }
    Outcome::new(
        violations == 0,
        format!("1000 instances, {violations} violations, min slack {worst:.3e} (tol -1e-9)"),
    )
}
