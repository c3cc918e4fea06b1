//! End-to-end acceptance checks; one line per criterion.
//!
//! `cargo test --test acceptance -- 3 7` runs a subset.

mod c01_concavity;
mod c02_gradient;
mod c03_adversary;
mod c04_regression;
mod c05_rate;
mod c06_sandwich;
mod c07_cyclic;
mod c08_monte_carlo;
mod c09_audit;
mod c10_tournament;
mod c11_ablation;
mod c12_determinism;
mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "concavity", limit: Duration::from_secs(10), run: c01_concavity::run },
        Criterion { id: 2, name: "gradient oracle", limit: Duration::from_secs(10), run: c02_gradient::run },
        Criterion { id: 3, name: "closed-form adversary", limit: Duration::from_secs(10), run: c03_adversary::run },
        Criterion { id: 4, name: "regression = mirror descent", limit: Duration::from_secs(10), run: c04_regression::run },
        Criterion { id: 5, name: "convergence rate", limit: Duration::from_secs(300), run: c05_rate::run },
        Criterion { id: 6, name: "soft-min sandwich", limit: Duration::from_secs(60), run: c06_sandwich::run },
        Criterion { id: 7, name: "symmetric cyclic game", limit: Duration::from_secs(60), run: c07_cyclic::run },
        Criterion { id: 8, name: "Monte-Carlo consistency", limit: Duration::from_secs(120), run: c08_monte_carlo::run },
        Criterion { id: 9, name: "audit correctness", limit: Duration::from_secs(60), run: c09_audit::run },
        Criterion { id: 10, name: "tournament properties", limit: Duration::from_secs(60), run: c10_tournament::run },
        Criterion { id: 11, name: "ablation dominance", limit: Duration::from_secs(300), run: c11_ablation::run },
        Criterion { id: 12, name: "CLI determinism", limit: Duration::from_secs(60), run: c12_determinism::run },
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let out = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "acceptance {:>2} {} {}: {} [{:.1}s of {}s{}]",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.name,
            out.detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", over time" }
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
