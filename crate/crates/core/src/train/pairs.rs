//! Pair construction and gap filtering.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::sample::BatchSample;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionPair {
    pub prompt: usize,
    pub z: usize,
    pub z_ref: usize,
    pub target_z: f64,
    pub target_z_ref: f64,
    pub gap: f64,
}

impl RegressionPair {
    pub fn new(prompt: usize, z: usize, z_ref: usize, target_z: f64, target_z_ref: f64) -> Self {
        Self {
            prompt,
            z,
            z_ref,
            target_z,
            target_z_ref,
            gap: (target_z - target_z_ref).abs(),
        }
    }

    /// `ĝ(z) − ĝ(z′)`.
    pub fn target_diff(&self) -> f64 {
        self.target_z - self.target_z_ref
    }
}

/// All `K×K` cross pairs of each prompt's rollouts, in `(prompt, z-slot, z′-slot)` order.
///
/// `targets[x][y]` is `ĝ(x, y)`; entries for responses never drawn are ignored.
/// With `include_same_policy`, pairs within the `π_t` rollouts and within the
/// `π_ref` rollouts are added after the cross pairs.
pub fn build_pairs(batches: &[BatchSample], targets: &[Vec<f64>], include_same_policy: bool) -> Vec<RegressionPair> {
    let mut out = Vec::new();
    for (x, (b, t)) in batches.iter().zip(targets).enumerate() {
        for &z in &b.z {
            for &zr in &b.z_ref {
                out.push(RegressionPair::new(x, z, zr, t[z], t[zr]));
            }
        }
        if include_same_policy {
            for side in [&b.z, &b.z_ref] {
                for (i, &a) in side.iter().enumerate() {
                    for &c in &side[i + 1..] {
                        out.push(RegressionPair::new(x, a, c, t[a], t[c]));
                    }
                }
            }
        }
    }
    out
}

/// Keeps the `⌈rho · count⌉` pairs with largest gap; ties go to the smaller `(prompt, z, z′)`.
pub fn filter_pairs(mut pairs: Vec<RegressionPair>, rho: f64) -> Result<Vec<RegressionPair>> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(invalid("rho must lie in (0, 1]"));
    }
    if pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    let keep = ((rho * pairs.len() as f64).ceil() as usize).clamp(1, pairs.len());
    pairs.sort_by(|a, b| {
        b.gap
            .total_cmp(&a.gap)
            .then(a.prompt.cmp(&b.prompt))
            .then(a.z.cmp(&b.z))
            .then(a.z_ref.cmp(&b.z_ref))
    });
    pairs.truncate(keep);
    pairs.sort_by(|a, b| match a.prompt.cmp(&b.prompt) {
        Ordering::Equal => (a.z, a.z_ref).cmp(&(b.z, b.z_ref)),
        o => o,
    });
    Ok(pairs)
}

pub fn build_and_filter_pairs(
    batches: &[BatchSample],
    targets: &[Vec<f64>],
    rho: f64,
    include_same_policy: bool,
) -> Result<Vec<RegressionPair>> {
    filter_pairs(build_pairs(batches, targets, include_same_policy), rho)
}
