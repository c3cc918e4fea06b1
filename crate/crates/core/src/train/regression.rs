//! Square-loss regression form of the mirror-descent step.
//!
//! Both classes minimize
//! `Σ_pairs ((Δ(z) − Δ(z′))/η − (ĝ(z) − ĝ(z′)))² + ridge · ‖Δ‖²`
//! where `Δ` is the parameter change. Substituting `u = Δ/η` gives the
//! normal equations `(AᵀA + ridge·η² I) u = Aᵀc`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::pairs::RegressionPair;
use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::policy::{LinearSoftmaxPolicy, Policy, TabularPolicy};
use crate::solver::md_step_in_place;

const CONSISTENCY_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionOutcome {
    pub policy: Policy,
    /// Mean squared residual over the pairs.
    pub epsilon: f64,
}

pub fn regression_update(policy: &Policy, pairs: &[RegressionPair], eta: f64, ridge: f64) -> Result<RegressionOutcome> {
    if pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid("eta must be positive"));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(invalid("ridge must be nonnegative"));
    }
    if pairs.iter().any(|p| !(0.0..=1.0).contains(&p.target_z) || !(0.0..=1.0).contains(&p.target_z_ref)) {
        return Err(invalid("regression targets must lie in [0, 1]"));
    }
    match policy {
        Policy::Tabular(t) => tabular_update(t, pairs, eta, ridge),
        Policy::Linear(l) => linear_update(l, pairs, eta, ridge),
    }
}

fn check_pair_bounds(pairs: &[RegressionPair], n_prompts: usize, n_responses: impl Fn(usize) -> usize) -> Result<()> {
    for p in pairs {
        if p.prompt >= n_prompts {
            return Err(invalid(format!("pair references prompt {} of {n_prompts}", p.prompt)));
        }
        let n = n_responses(p.prompt);
        if p.z >= n || p.z_ref >= n {
            return Err(invalid(format!("pair ({}, {}) out of range for prompt {}", p.z, p.z_ref, p.prompt)));
        }
    }
    Ok(())
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = i;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Min-norm `u` for one prompt with `ridge = 0`.
///
/// When the pair targets come from one potential per response the residual is
/// zero and the minimizer is that potential centered within each connected
/// component of the pair graph. Otherwise falls back to the pseudo-inverse.
fn prompt_solve_exact(n: usize, pairs: &[&RegressionPair]) -> Vec<f64> {
    let mut potential: Vec<Option<f64>> = vec![None; n];
    let mut consistent = true;
    let mut dsu = Dsu((0..n).collect());
    for p in pairs {
        for (node, t) in [(p.z, p.target_z), (p.z_ref, p.target_z_ref)] {
            match potential[node] {
                None => potential[node] = Some(t),
                Some(prev) if (prev - t).abs() > CONSISTENCY_TOL => consistent = false,
                _ => {}
            }
        }
        dsu.union(p.z, p.z_ref);
    }
    if !consistent {
        return prompt_solve_normal(n, pairs, 0.0);
    }
    let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (node, pot) in potential.iter().enumerate() {
        if let Some(v) = pot {
            let e = sums.entry(dsu.find(node)).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    (0..n)
        .map(|node| match potential[node] {
            Some(v) => {
                let (s, c) = sums[&dsu.find(node)];
                v - s / c as f64
            }
            None => 0.0,
        })
        .collect()
}

/// Solves the per-prompt normal equations; `lambda = ridge·η²`.
fn prompt_solve_normal(n: usize, pairs: &[&RegressionPair], lambda: f64) -> Vec<f64> {
    let mut lap = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for p in pairs {
        let (a, b, c) = (p.z, p.z_ref, p.target_diff());
        if a == b {
            continue;
        }
        lap[(a, a)] += 1.0;
        lap[(b, b)] += 1.0;
        lap[(a, b)] -= 1.0;
        lap[(b, a)] -= 1.0;
        rhs[a] += c;
        rhs[b] -= c;
    }
    if lambda > 0.0 {
        for i in 0..n {
            lap[(i, i)] += lambda;
        }
        if let Some(ch) = lap.clone().cholesky() {
            return ch.solve(&rhs).iter().copied().collect();
        }
    }
    let svd = lap.svd(true, true);
    let u = svd.solve(&rhs, RANK_TOL).expect("svd with both factors");
    u.iter().copied().collect()
}

fn tabular_update(pi: &TabularPolicy, pairs: &[RegressionPair], eta: f64, ridge: f64) -> Result<RegressionOutcome> {
    check_pair_bounds(pairs, pi.len(), |x| pi.probs(x).len())?;
    let mut by_prompt: Vec<Vec<&RegressionPair>> = vec![Vec::new(); pi.len()];
    for p in pairs {
        by_prompt[p.prompt].push(p);
    }
    let lambda = ridge * eta * eta;
    let solved: Vec<(Vec<f64>, f64)> = exec::map_indexed(pi.len(), |x| {
        let probs = pi.probs(x);
        let own = &by_prompt[x];
        if own.is_empty() {
            return (probs.to_vec(), 0.0);
        }
        let n = probs.len();
        let u = if lambda == 0.0 {
            prompt_solve_exact(n, own)
        } else {
            prompt_solve_normal(n, own, lambda)
        };
        let sse: f64 = own
            .iter()
            .map(|p| (u[p.z] - u[p.z_ref] - p.target_diff()).powi(2))
            .sum();
        let mut next = probs.to_vec();
        let mut scratch = Vec::with_capacity(n);
        md_step_in_place(&mut next, &u, eta, &mut scratch);
        (next, sse)
    });
    let sse: f64 = solved.iter().map(|s| s.1).sum();
    let probs = solved.into_iter().map(|s| s.0).collect();
    Ok(RegressionOutcome {
        policy: Policy::Tabular(TabularPolicy::from_probs_unchecked(probs)),
        epsilon: sse / pairs.len() as f64,
    })
}

fn linear_update(pol: &LinearSoftmaxPolicy, pairs: &[RegressionPair], eta: f64, ridge: f64) -> Result<RegressionOutcome> {
    check_pair_bounds(pairs, pol.n_prompts(), |x| pol.n_responses(x))?;
    let d = pol.dim();
    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    let mut a = DVector::<f64>::zeros(d);
    for p in pairs {
        let (fz, fr) = (pol.feature(p.prompt, p.z), pol.feature(p.prompt, p.z_ref));
        for i in 0..d {
            a[i] = fz[i] - fr[i];
        }
        gram.ger(1.0, &a, &a, 1.0);
        rhs.axpy(p.target_diff(), &a, 1.0);
    }
    let lambda = ridge * eta * eta;
    let u = if lambda > 0.0 {
        for i in 0..d {
            gram[(i, i)] += lambda;
        }
        gram.clone()
            .cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or(Error::RankDeficient)?
    } else {
        let eig = gram.clone().symmetric_eigen();
        let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if !(min > RANK_TOL * max.max(1.0)) {
            return Err(Error::RankDeficient);
        }
        gram.cholesky().map(|c| c.solve(&rhs)).ok_or(Error::RankDeficient)?
    };
    let sse: f64 = pairs
        .iter()
        .map(|p| {
            let (fz, fr) = (pol.feature(p.prompt, p.z), pol.feature(p.prompt, p.z_ref));
            let pred: f64 = (0..d).map(|i| (fz[i] - fr[i]) * u[i]).sum();
            (pred - p.target_diff()).powi(2)
        })
        .sum();
    let theta = pol.theta().iter().zip(u.iter()).map(|(t, du)| t + eta * du).collect();
    Ok(RegressionOutcome {
        policy: Policy::Linear(pol.with_theta(theta)),
        epsilon: sse / pairs.len() as f64,
    })
}
