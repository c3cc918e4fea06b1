use maxent_bw::numeric::one_hot;
use maxent_bw::solver::{adversary_best_response, partition_value, regularized_objective};
use rand::Rng;

use crate::common::{random_game, rng, simplex, soft_value};
use crate::Outcome;

pub fn run() -> Outcome {
    let mut max_identity_err: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    let mut bad = 0;
    for i in 0..100u64 {
        let mut r = rng(3_000 + i);
        let n = r.random_range(2..=10);
        let m = r.random_range(1..=5);
        let beta = [0.05, 0.3, 1.0, 3.0][(i % 4) as usize];
        let g = random_game(&mut r, n, m);
        let pi = simplex(&mut r, n);
        let pr = simplex(&mut r, n);
        let w = if i % 2 == 0 { simplex(&mut r, m) } else { one_hot(m, r.random_range(0..m)) };

        let star = adversary_best_response(&g, &pi, &pr, &w, beta).unwrap();
        let obj_star = regularized_objective(&g, &pi, &star, &pr, &w, beta).unwrap();
        let mut err = (obj_star - soft_value(&g, &pi, &pr, &w, beta)).abs();
        if let Some(k) = w.iter().position(|&v| v == 1.0) {
            err = err.max((obj_star - partition_value(&g, &pi, &pr, k, beta).unwrap()).abs());
        }
        max_identity_err = max_identity_err.max(err);
        if err > 1e-10 {
            bad += 1;
        }
        for c in 0..100 {
            let mut cmp = simplex(&mut r, n);
            if c % 4 == 0 {
                // sparse comparator on a random subset
                for v in cmp.iter_mut() {
                    if r.random::<f64>() < 0.5 {
                        *v = 0.0;
                    }
                }
                let s: f64 = cmp.iter().sum();
                if s == 0.0 {
                    cmp = one_hot(n, 0);
                } else {
                    cmp.iter_mut().for_each(|v| *v /= s);
                }
            }
            let margin = regularized_objective(&g, &pi, &cmp, &pr, &w, beta).unwrap() - obj_star;
            min_margin = min_margin.min(margin);
            if margin < -1e-12 {
                bad += 1;
            }
        }
    }
    Outcome::new(
        bad == 0,
        format!("100 instances x 100 comparators, identity error {max_identity_err:.2e} (tol 1e-10), min comparator margin {min_margin:.2e}"),
    )
}
