use maxent_bw::audit::{has_cycle, strict_tournament};
use maxent_bw::config::{Estimator, SolverConfig, Variant};
use maxent_bw::eval::{tournament, TournamentMode};
use maxent_bw::game::{GameSet, PromptGame};
use maxent_bw::policy::{Policy, TabularPolicy};
use maxent_bw::train::train;

use crate::common::{random_game, rng};
use crate::Outcome;

const SEEDS: u64 = 50;
const TOL: f64 = 1e-3;

fn intransitive(g: &PromptGame) -> bool {
    (0..g.n_criteria()).any(|k| has_cycle(&strict_tournament(g.matrix(k), g.n_responses(), 0.5)))
}

/// Eight prompts, each with a cycle in at least one criterion.
fn games(seed: u64) -> GameSet {
    let mut r = rng(11_000 + seed);
    let mut out = Vec::new();
    while out.len() < 8 {
        let g = random_game(&mut r, 6, 3);
        if intransitive(&g) {
            out.push(g);
        }
    }
    GameSet::uniform(out).unwrap()
}

pub struct SeedResult {
    pub full: f64,
    pub vb: f64,
    pub jc: f64,
    pub win_vs_ref: f64,
}

pub fn seed_result(seed: u64, base: &SolverConfig) -> SeedResult {
    let gs = games(seed);
    let reference = TabularPolicy::uniform(&gs);
    let value = |variant: Variant| {
        let cfg = SolverConfig {
            variant,
            seed,
            ..base.clone()
        };
        let out = train(&gs, &Policy::Tabular(reference.clone()), &cfg).unwrap();
        (out.diagnostics.final_value, out.policy.to_tabular())
    };
    let (full, full_pi) = value(Variant::Full);
    let (vb, _) = value(Variant::Vb);
    let (jc, _) = value(Variant::Jc);
    let pols = vec![("full".to_string(), full_pi), ("ref".to_string(), reference)];
    let w = tournament(&pols, &gs, TournamentMode::Expected).unwrap();
    SeedResult {
        full,
        vb,
        jc,
        win_vs_ref: w.w[0][1],
    }
}

struct Tally {
    vb_ok: usize,
    jc_ok: usize,
    win_ok: usize,
    summary: String,
}

fn tally(base: &SolverConfig) -> Tally {
    let results: Vec<SeedResult> = (0..SEEDS).map(|s| seed_result(s, base)).collect();
    let n = results.len() as f64;
    let mean = |f: fn(&SeedResult) -> f64| results.iter().map(f).sum::<f64>() / n;
    let t = Tally {
        vb_ok: results.iter().filter(|r| r.full >= r.vb - TOL).count(),
        jc_ok: results.iter().filter(|r| r.full >= r.jc - TOL).count(),
        win_ok: results.iter().filter(|r| r.win_vs_ref > 0.5).count(),
        summary: String::new(),
    };
    Tally {
        summary: format!(
            ">=VB on {}, >=JC on {}, win > 0.5 on {}; mean V full {:.4} vb {:.4} jc {:.4}, mean win {:.4}",
            t.vb_ok,
            t.jc_ok,
            t.win_ok,
            mean(|r| r.full),
            mean(|r| r.vb),
            mean(|r| r.jc),
            mean(|r| r.win_vs_ref)
        ),
        ..t
    }
}

pub fn run() -> Outcome {
    let exact = SolverConfig {
        iterations: 200,
        estimator: Estimator::Exact,
        rho: 1.0,
        ..SolverConfig::default()
    };
    let gated = tally(&exact);
    let mc = tally(&SolverConfig {
        iterations: 200,
        ..SolverConfig::default()
    });
    let need = (0.9 * SEEDS as f64).ceil() as usize;
    Outcome::new(
        gated.vb_ok >= need && gated.jc_ok >= need && gated.win_ok >= need,
        format!(
            "50 seeds, need {need}; exact estimators: {} | default MC (not gated): {}",
            gated.summary, mc.summary
        ),
    )
}
