//! Solver configuration.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Which objective the trainer optimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Worst-case criterion against the entropy-regularized comparator.
    Full,
    /// Criteria scalarized into a single joint-check score before training.
    Jc,
    /// Fixed comparator: the large-β limit, comparing against the reference policy.
    Vb,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Jc => "jc",
            Variant::Vb => "vb",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Variant::Full),
            "jc" => Ok(Variant::Jc),
            "vb" => Ok(Variant::Vb),
            other => Err(invalid(format!("unknown variant `{other}` (full|jc|vb)"))),
        }
    }
}

/// How partitions and gradients are computed during training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Exact sums over the response set.
    Exact,
    /// Finite-sample estimates from `M` policy and reference draws.
    MonteCarlo,
}

impl std::str::FromStr for Estimator {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "exact" => Ok(Estimator::Exact),
            "monte_carlo" | "mc" => Ok(Estimator::MonteCarlo),
            other => Err(invalid(format!("unknown estimator `{other}` (exact|monte_carlo)"))),
        }
    }
}

/// Default seed for every command.
pub const DEFAULT_SEED: u64 = 555_134;

/// Filtration ratios of the two-epoch schedule.
pub const FIRST_EPOCH_RHO: f64 = 0.15;
pub const SECOND_EPOCH_RHO: f64 = 0.17;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// KL strength β.
    pub beta: f64,
    /// Step size η; `None` means `√(ln N / T)` with `N` the largest response count.
    pub eta: Option<f64>,
    /// Iteration count T.
    pub iterations: usize,
    /// Gradient-estimation sample count M.
    pub samples: usize,
    /// Rollouts per side per prompt per iteration (K from π_t and K from π_ref).
    pub responses: usize,
    /// Fraction of pooled pairs kept by gap.
    pub rho: f64,
    /// Target-set threshold p.
    pub p: f64,
    pub variant: Variant,
    pub estimator: Estimator,
    pub seed: u64,
    pub ridge: f64,
    /// Draw separate `y, y′` samples for the gradient weights instead of reusing
    /// the ones that picked `k̂`.
    pub fresh_gradient_samples: bool,
    /// Also regress on (π_t, π_t) and (π_ref, π_ref) rollout pairs.
    pub include_same_policy_pairs: bool,
    /// Scalarization weights for the JC variant; uniform when absent.
    pub jc_weights: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            eta: None,
            iterations: 100,
            samples: 2,
            responses: 2,
            rho: FIRST_EPOCH_RHO,
            p: 0.5,
            variant: Variant::Full,
            estimator: Estimator::MonteCarlo,
            seed: DEFAULT_SEED,
            ridge: 1e-8,
            fresh_gradient_samples: false,
            include_same_policy_pairs: false,
            jc_weights: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid("beta must be positive"));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(invalid("eta must be positive"));
            }
        }
        if self.iterations == 0 {
            return Err(invalid("iterations must be at least 1"));
        }
        if self.samples == 0 || self.responses == 0 {
            return Err(invalid("samples and responses must be at least 1"));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(invalid("rho must lie in (0, 1]"));
        }
        if !(0.5..=1.0).contains(&self.p) {
            return Err(invalid("p must lie in [1/2, 1]"));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(invalid("ridge must be nonnegative"));
        }
        Ok(())
    }

    /// The configured step size or the default `√(ln N / T)`.
    pub fn step_size(&self, max_responses: usize) -> f64 {
        self.eta
            .unwrap_or_else(|| default_step_size(max_responses, self.iterations))
    }
}

/// `√(ln N / (A² T))` with `A = 1`.
pub fn default_step_size(n_responses: usize, iterations: usize) -> f64 {
    let n = n_responses.max(2) as f64;
    (n.ln() / iterations.max(1) as f64).sqrt()
}
