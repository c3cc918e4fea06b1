use maxent_bw::solver::{gradient_at, partition_value};
use maxent_bw::train::{estimate_khat, prompt_rng, sample_batch, GradientEstimator};

use crate::common::{random_game, rmse, rng, simplex};
use crate::Outcome;

const SAMPLES: [usize; 3] = [4, 16, 64];
const SEEDS: u64 = 200;
const BETA: f64 = 1.0;

/// RMSE of the partition-value and gradient estimators at each `M`.
fn study(instance: u64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(8_000 + instance);
    let (n, m) = (6, 3);
    let g = random_game(&mut r, n, m);
    let pi = simplex(&mut r, n);
    let pr = simplex(&mut r, n);
    let exact_v: Vec<f64> = (0..m).map(|k| partition_value(&g, &pi, &pr, k, BETA).unwrap()).collect();
    let exact_g: Vec<Vec<f64>> = (0..m).map(|k| gradient_at(&g, &pi, &pr, k, BETA).unwrap()).collect();
    let mut rv = Vec::new();
    let mut rg = Vec::new();
    for &mm in &SAMPLES {
        let mut ev = Vec::new();
        let mut eg = Vec::new();
        for s in 0..SEEDS {
            let mut stream = prompt_rng(s, mm as u64, instance as usize);
            let batch = sample_batch(&pi, &pr, mm, 1, false, &mut stream);
            let (_, vals) = estimate_khat(&batch, &g, BETA);
            for k in 0..m {
                ev.push(vals[k] - exact_v[k]);
                let est = GradientEstimator::new(&batch, &g, k, BETA);
                for z in 0..n {
                    eg.push(est.at(z) - exact_g[k][z]);
                }
            }
        }
        rv.push(rmse(&ev));
        rg.push(rmse(&eg));
    }
    (rv, rg)
}

pub fn run() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for inst in 0..3 {
        let (rv, rg) = study(inst);
        let ratios: Vec<f64> = [rv[0] / rv[1], rv[1] / rv[2], rg[0] / rg[1], rg[1] / rg[2]].to_vec();
        ok &= ratios.iter().all(|r| (1.4..=2.6).contains(r));
        parts.push(format!(
            "[value {:.2}/{:.2}, gradient {:.2}/{:.2}]",
            ratios[0], ratios[1], ratios[2], ratios[3]
        ));
    }
    Outcome::new(
        ok,
        format!("RMSE ratios per 4x M over 200 seeds, 3 instances {} (need 2 +/- 30%)", parts.join(" ")),
    )
}
