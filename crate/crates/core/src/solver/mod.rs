//! Exact machinery for the maximum-entropy Blackwell winner: soft worst-case
//! values, the closed-form comparator, gradients, mirror descent, and oracles.

mod exact;
mod gradient;
mod value;
mod von_neumann;

pub use exact::{solve_exact, ExactTrace, SolveOptions};
pub use gradient::{exact_gradient, gradient_at, mirror_descent_step, GradientField, PromptGradient};
pub(crate) use gradient::{md_step_in_place, PromptKernel};
pub use value::{
    adversary_best_response, game_value, kl_divergence, partition_value, regularized_objective,
    worst_case_criterion, PromptValue, ValueReport,
};
pub use von_neumann::{von_neumann_value, ENUMERATION_LIMIT};
