use maxent_bw::game::{GameSet, PromptGame};
use maxent_bw::policy::{LinearSoftmaxPolicy, Policy, TabularPolicy};
use maxent_bw::train::{regression_update, RegressionPair};
use rand::Rng;

use crate::common::{rng, simplex, tv};
use crate::Outcome;

const TOL: f64 = 1e-8;

fn eg(pi: &[f64], g: &[f64], eta: f64) -> Vec<f64> {
    let w: Vec<f64> = pi.iter().zip(g).map(|(p, v)| p * (eta * v).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

pub fn run() -> Outcome {
    let mut worst_eg: f64 = 0.0;
    let mut worst_lin: f64 = 0.0;
    for i in 0..100u64 {
        let mut r = rng(4_000 + i);
        let prompts = r.random_range(1..=4);
        let sizes: Vec<usize> = (0..prompts).map(|_| r.random_range(2..=10)).collect();
        let pi: Vec<Vec<f64>> = sizes.iter().map(|&n| simplex(&mut r, n)).collect();
        let g: Vec<Vec<f64>> = sizes.iter().map(|&n| (0..n).map(|_| r.random::<f64>()).collect()).collect();
        let eta = r.random_range(0.05..2.0);
        let mut pairs = Vec::new();
        for (x, &n) in sizes.iter().enumerate() {
            if i % 2 == 0 {
                for z in 0..n {
                    for zr in 0..n {
                        pairs.push(RegressionPair::new(x, z, zr, g[x][z], g[x][zr]));
                    }
                }
            } else {
                // random spanning tree plus a few extra edges
                for z in 1..n {
                    let parent = r.random_range(0..z);
                    pairs.push(RegressionPair::new(x, z, parent, g[x][z], g[x][parent]));
                }
                for _ in 0..n {
                    let (a, b) = (r.random_range(0..n), r.random_range(0..n));
                    pairs.push(RegressionPair::new(x, a, b, g[x][a], g[x][b]));
                }
            }
        }
        let tab = TabularPolicy::new(pi.clone()).unwrap();
        let out = regression_update(&Policy::Tabular(tab.clone()), &pairs, eta, 0.0).unwrap();
        let next = out.policy.to_tabular();
        for x in 0..prompts {
            worst_eg = worst_eg.max(tv(next.probs(x), &eg(&pi[x], &g[x], eta)));
        }

        let games = sizes
            .iter()
            .enumerate()
            .map(|(x, &n)| PromptGame::from_matrices(format!("p{x}"), vec![vec![vec![0.5; n]; n]]).unwrap())
            .collect();
        let gs = GameSet::uniform(games).unwrap();
        let lin = LinearSoftmaxPolicy::one_hot_from_tabular(&gs, &tab).unwrap();
        let ridge = 1e-8;
        let a = regression_update(&Policy::Tabular(tab), &pairs, eta, ridge).unwrap();
        let b = regression_update(&Policy::Linear(lin), &pairs, eta, ridge).unwrap();
        worst_lin = worst_lin.max(a.policy.to_tabular().max_tv(&b.policy.to_tabular()));
    }
    Outcome::new(
        worst_eg <= TOL && worst_lin <= TOL,
        format!("100 instances, TV to exponentiated gradient {worst_eg:.2e}, one-hot linear vs tabular {worst_lin:.2e} (tol 1e-8)"),
    )
}
