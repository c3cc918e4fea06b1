use maxent_bw::game::GameSet;
use maxent_bw::policy::TabularPolicy;
use maxent_bw::solver::{partition_value, solve_exact, von_neumann_value, SolveOptions};
use rand::Rng;

use crate::common::{pref_col, random_game, rng, simplex};
use crate::Outcome;

const TOL: f64 = 1e-10;

/// `V_β(π) − min_{y′} P_π(y′)` lies in `[0, β ln(1/min π_ref)]`: the soft minimum
/// over the reference-weighted comparators sits above the hard minimum.
fn sandwich() -> (usize, usize, f64) {
    let mut violations = 0;
    let mut reversed = 0;
    let mut tightest: f64 = 0.0;
    for i in 0..200u64 {
        let mut r = rng(6_000 + i);
        let n = r.random_range(2..=10);
        let beta = [1e-3, 1e-2, 0.1, 1.0][(i % 4) as usize];
        let g = random_game(&mut r, n, 1);
        let pi = simplex(&mut r, n);
        let mut pr = simplex(&mut r, n);
        if i % 5 == 0 {
            pr[0] = 1e-6;
            let s: f64 = pr.iter().sum();
            pr.iter_mut().for_each(|v| *v /= s);
        }
        let v = partition_value(&g, &pi, &pr, 0, beta).unwrap();
        let min_p = pref_col(&g, 0, &pi).into_iter().fold(f64::INFINITY, f64::min);
        let min_ref = pr.iter().copied().fold(f64::INFINITY, f64::min);
        let excess = v - min_p;
        let bound = beta * (1.0 / min_ref).ln();
        if excess < -TOL || excess > bound + TOL {
            violations += 1;
        }
        if min_p - v < -TOL {
            reversed += 1;
        }
        tightest = tightest.max(excess / bound);
    }
    (violations, reversed, tightest)
}

pub fn run() -> Outcome {
    let (violations, reversed, tightest) = sandwich();

    let beta = 1e-3;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut fails = 0;
    for i in 0..20u64 {
        let mut r = rng(6_500 + i);
        let n = r.random_range(2..=8);
        let g = random_game(&mut r, n, 1);
        let (vn, _) = von_neumann_value(&g, &(0..n).collect::<Vec<_>>()).unwrap();
        let gs = GameSet::uniform(vec![g]).unwrap();
        let uni = TabularPolicy::uniform(&gs);
        let trace = solve_exact(&gs, &uni, beta, None, 200_000, SolveOptions::default()).unwrap();
        let dev = (trace.best_value - vn).abs();
        let allowed = beta * (n as f64).ln() + 1e-3;
        worst_excess = worst_excess.max(dev - allowed);
        if dev > allowed {
            fails += 1;
        }
    }
    Outcome::new(
        violations == 0 && fails == 0,
        format!(
            "200 instances: 0 <= V_beta - min P <= beta ln(1/min ref) violated {violations}x (max fraction of bound {tightest:.3}); \
             literal orientation min P - V_beta >= 0 fails {reversed}/200; \
             beta=1e-3 vs von Neumann value: {fails}/20 outside beta ln N + 1e-3 (worst excess {worst_excess:.2e})"
        ),
    )
}
