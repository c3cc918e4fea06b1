//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use maxent_bw::audit::{audit, AuditMode};
use maxent_bw::config::{Estimator, SolverConfig};
use maxent_bw::eval::{blackwell_summary, convergence_study, tournament, ComparatorSet};
use maxent_bw::game::GameSet;
use maxent_bw::judge::{cyclic_gameset, ingest_log, likert_gameset, random_utility_gameset};
use maxent_bw::numeric::mix_seed;
use maxent_bw::policy::{concentrability, load_policy, save_policy, LinearSoftmaxPolicy, Policy, TabularPolicy};
use maxent_bw::solver::{game_value, solve_exact, SolveOptions};
use maxent_bw::train::train_schedule;
use serde::Serialize;

use crate::output::OutDir;
use crate::settings::{GenKind, GenSpec, PolicyClass, RunConfig};

const DEFAULT_AUDIT_SIZES: [usize; 4] = [2, 4, 8, 16];

pub fn build_games(spec: &GenSpec, seed: u64) -> Result<GameSet> {
    let gs = match spec.kind {
        GenKind::Cyclic => cyclic_gameset(seed, spec.prompts, spec.n, spec.m, spec.strength)?,
        GenKind::RandomUtility => random_utility_gameset(seed, spec.prompts, spec.n, spec.m, spec.tau)?,
        GenKind::Log => {
            let path = spec.log.as_ref().context("gen.kind = log requires gen.log")?;
            ingest_log(path)?
        }
    };
    Ok(match &spec.likert {
        Some(cfg) => likert_gameset(&gs, cfg, seed)?,
        None => gs,
    })
}

fn load_games(cfg: &RunConfig) -> Result<GameSet> {
    Ok(GameSet::load(cfg.games_path())?)
}

fn reference_policy(cfg: &RunConfig, gs: &GameSet) -> Result<TabularPolicy> {
    match &cfg.solve.reference {
        Some(p) => Ok(load_policy(gs, p)?.to_tabular()),
        None => Ok(TabularPolicy::uniform(gs)),
    }
}

fn audit_sizes(requested: &[usize], gs: &GameSet) -> Vec<usize> {
    if !requested.is_empty() {
        return requested.to_vec();
    }
    let min_n = gs.games().iter().map(|g| g.n_responses()).min().unwrap_or(0);
    let mut sizes: Vec<usize> = DEFAULT_AUDIT_SIZES.iter().copied().filter(|&n| n <= min_n).collect();
    if sizes.is_empty() {
        sizes.push(min_n);
    }
    sizes
}

pub fn gen(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let gs = out.time("gen", || build_games(&cfg.gen, cfg.seed))?;
    out.write("games/games.json", &gs.to_json()?)?;
    let min_n = gs.games().iter().map(|g| g.n_responses()).min().unwrap_or(0);
    let max_m = gs.games().iter().map(|g| g.n_criteria()).max().unwrap_or(0);
    let quick = audit(&gs, &[min_n], &AuditMode::PerCriterion, cfg.seed)?;
    let row = &quick.rows[0];
    println!(
        "prompts={} N={} m={} no_condorcet={:.4} intransitive={:.4}",
        gs.len(),
        min_n,
        max_m,
        row.fraction_no_condorcet,
        row.fraction_intransitive
    );
    Ok(())
}

pub fn audit_cmd(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let gs = load_games(cfg)?;
    let mode = cfg.audit.mode();
    let sizes = audit_sizes(&cfg.audit.sizes, &gs);
    let report = out.time("audit", || audit(&gs, &sizes, &mode, cfg.seed))?;
    let label = mode.label();
    out.write(&format!("reports/audit_{label}.csv"), &report.to_csv()?)?;
    out.write(&format!("reports/audit_{label}.json"), &report.to_json()?)?;
    for r in &report.rows {
        println!(
            "N={} mode={} no_condorcet={:.4} intransitive={:.4}",
            r.n, r.mode, r.fraction_no_condorcet, r.fraction_intransitive
        );
    }
    Ok(())
}

fn start_policy(cfg: &RunConfig, gs: &GameSet) -> Result<Policy> {
    let reference = reference_policy(cfg, gs)?;
    match cfg.solve.policy_class {
        PolicyClass::Tabular => Ok(Policy::Tabular(reference)),
        PolicyClass::Linear => match &cfg.solve.features {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let doc: BTreeMap<String, Vec<Vec<f64>>> = serde_json::from_str(&text)?;
                let dim = doc.values().flatten().next().map(|r| r.len()).unwrap_or(0);
                Ok(Policy::Linear(LinearSoftmaxPolicy::from_features_doc(&doc, gs, vec![0.0; dim])?))
            }
            None => Ok(Policy::Linear(LinearSoftmaxPolicy::one_hot_from_tabular(gs, &reference)?)),
        },
    }
}

pub fn solve(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let gs = load_games(cfg)?;
    let start = start_policy(cfg, &gs)?;
    let pi_ref = start.to_tabular();
    if cfg.solve.variants.is_empty() {
        bail!("solve.variants is empty");
    }
    for &variant in &cfg.solve.variants {
        let name = variant.as_str();
        let solver = SolverConfig {
            variant,
            ..cfg.solve.solver.clone()
        };
        let outcome = out.time(&format!("solve/{name}"), || train_schedule(&gs, &start, &solver, &cfg.solve.schedule))?;
        let rel = format!("policies/{name}.json");
        save_policy(&outcome.policy, &gs, out.path(&rel))?;
        out.record(&rel);
        if matches!(outcome.policy, Policy::Linear(_)) {
            out.record(&format!("policies/{name}.features.json"));
        }
        out.write(&format!("reports/train_{name}.csv"), &outcome.diagnostics.to_csv())?;
        out.write(&format!("reports/train_{name}.json"), &outcome.diagnostics.to_json()?)?;
        let value = game_value(&gs, &outcome.policy.to_tabular(), &pi_ref, solver.beta)?;
        out.write(&format!("reports/value_{name}.csv"), &value.to_csv())?;
        out.write(&format!("reports/value_{name}.json"), &value.to_json()?)?;
        println!("variant={name} V={:.10}", value.total);
    }
    let s = &cfg.solve;
    if s.solver.estimator == Estimator::Exact && s.schedule.is_empty() && s.policy_class == PolicyClass::Tabular {
        let trace = out.time("solve/exact_oracle", || {
            solve_exact(
                &gs,
                &pi_ref,
                s.solver.beta,
                s.solver.eta,
                s.solver.iterations,
                SolveOptions {
                    record_k_star: true,
                    ..Default::default()
                },
            )
        })?;
        out.write("reports/solve_exact.csv", &trace.to_csv(1))?;
    }
    Ok(())
}

fn scan_policies(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut found = Vec::new();
    if !dir.exists() {
        return Ok(found);
    }
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        if name.ends_with(".json") && !name.ends_with(".features.json") {
            found.push((name.trim_end_matches(".json").to_string(), path));
        }
    }
    found.sort();
    Ok(found)
}

pub fn tournament_cmd(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let gs = load_games(cfg)?;
    let entries: Vec<(String, PathBuf)> = if cfg.tournament.policies.is_empty() {
        scan_policies(&out.path("policies"))?
    } else {
        cfg.tournament
            .policies
            .iter()
            .map(|p| (p.label.clone(), p.path.clone()))
            .collect()
    };
    let mut pols = Vec::new();
    if cfg.tournament.include_reference {
        pols.push(("ref".to_string(), reference_policy(cfg, &gs)?));
    }
    for (label, path) in entries {
        pols.push((label, load_policy(&gs, &path)?.to_tabular()));
    }
    let w = out.time("tournament", || tournament(&pols, &gs, cfg.tournament.mode))?;
    out.write("reports/tournament.csv", &w.to_csv())?;
    out.write("reports/tournament.json", &w.to_json()?)?;
    for (i, row) in w.w.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
        println!("{:>12} {}", w.labels[i], cells.join(" "));
    }
    Ok(())
}

pub fn converge(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let spec = &cfg.converge;
    let seed = cfg.seed;
    let factory = |s: u64| build_games(&spec.generator, mix_seed(&[seed, s])).map_err(|e| match e.downcast::<maxent_bw::Error>() {
        Ok(err) => err,
        Err(other) => maxent_bw::Error::InvalidArgument(other.to_string()),
    });
    let table = out.time("converge", || {
        convergence_study(factory, &spec.betas, &spec.horizons, &spec.seeds, spec.oracle_iterations)
    })?;
    for c in &table.cells {
        out.add_timing(format!("converge/beta={}/T={}/seed={}", c.beta, c.t, c.seed), c.runtime_ms);
    }
    out.write("reports/converge.csv", &table.to_csv())?;
    out.write("reports/converge.json", &table.to_json()?)?;
    for s in &table.slopes {
        println!("beta={} slope={:.4}", s.beta, s.slope);
    }
    Ok(())
}

#[derive(Serialize)]
struct DiagReport {
    beta: f64,
    value: f64,
    k_star_histogram: Vec<usize>,
    concentrability: Option<f64>,
    max_tv_from_reference: f64,
    blackwell: maxent_bw::eval::BlackwellReport,
}

pub fn diag(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let gs = load_games(cfg)?;
    let pi_ref = reference_policy(cfg, &gs)?;
    let pi = match &cfg.diag.policy {
        Some(p) => load_policy(&gs, p)?.to_tabular(),
        None => pi_ref.clone(),
    };
    let beta = cfg.solve.solver.beta;
    let value = game_value(&gs, &pi, &pi_ref, beta)?;
    let blackwell = blackwell_summary(&pi, &gs, cfg.diag.p, &ComparatorSet::reference_and_pure(&pi_ref))?;
    let report = DiagReport {
        beta,
        value: value.total,
        k_star_histogram: value.k_star_histogram(),
        concentrability: concentrability(&pi, &pi_ref, &gs).ok(),
        max_tv_from_reference: pi.max_tv(&pi_ref),
        blackwell,
    };
    out.write("reports/diag_value.csv", &value.to_csv())?;
    out.write("reports/diag.json", &serde_json::to_string_pretty(&report)?)?;
    println!(
        "V={:.10} blackwell_mean={:.6} k_star={:?}",
        report.value, report.blackwell.mean, report.k_star_histogram
    );
    Ok(())
}
