use maxent_bw::game::GameSet;
use maxent_bw::policy::TabularPolicy;
use maxent_bw::solver::{exact_gradient, gradient_at, partition_value};
use rand::Rng;

use crate::common::{random_game, rng, simplex};
use crate::Outcome;

const H: f64 = 1e-6;
const TOL: f64 = 1e-5;
/// Directional derivatives smaller than this are compared absolutely at this scale.
const SCALE_FLOOR: f64 = 1e-6;

pub fn run() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut kstar_mismatch = 0;
    for i in 0..200u64 {
        let mut r = rng(2_000 + i);
        let n = r.random_range(2..=10);
        let m = r.random_range(1..=5);
        let beta = [0.1, 0.5, 1.0][(i % 3) as usize];
        let g = random_game(&mut r, n, m);
        let pi = simplex(&mut r, n);
        let other = simplex(&mut r, n);
        let pr = simplex(&mut r, n);
        let dir: Vec<f64> = other.iter().zip(&pi).map(|(a, b)| a - b).collect();
        let k = r.random_range(0..m);
        let at = |t: f64| {
            let p: Vec<f64> = pi.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            partition_value(&g, &p, &pr, k, beta).unwrap()
        };
        let fd = (at(H) - at(-H)) / (2.0 * H);
        let grad = gradient_at(&g, &pi, &pr, k, beta).unwrap();
        let analytic: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let rel = (fd - analytic).abs() / analytic.abs().max(SCALE_FLOOR);
        worst = worst.max(rel);
        if rel > TOL {
            failures += 1;
        }

        let gs = GameSet::uniform(vec![g.clone()]).unwrap();
        let field = exact_gradient(&gs, &TabularPolicy::new(vec![pi.clone()]).unwrap(), &TabularPolicy::new(vec![pr.clone()]).unwrap(), beta).unwrap();
        let ks = field.prompts[0].k_star;
        let at_ks = gradient_at(&g, &pi, &pr, ks, beta).unwrap();
        if at_ks.iter().zip(&field.prompts[0].g).any(|(a, b)| (a - b).abs() > 1e-12) {
            kstar_mismatch += 1;
        }
    }
    Outcome::new(
        failures == 0 && kstar_mismatch == 0,
        format!("200 instances, max relative error {worst:.2e} (tol 1e-5), {failures} failures, {kstar_mismatch} k* mismatches"),
    )
}
