//! `prosper`: batch front-end for game generation, audits, training and evaluation.

mod commands;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use maxent_bw::config::{Estimator, Variant};
use maxent_bw::eval::TournamentMode;

use output::OutDir;
use settings::{AuditModeKind, GenKind, PolicyClass, PolicyEntry, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "prosper", version, about = "Multi-criterion preference game toolkit")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (parallel builds only).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate or ingest a game set.
    Gen(GenArgs),
    /// Intransitivity audit of a game set.
    Audit(AuditArgs),
    /// Train policies and report their game values.
    Solve(SolveArgs),
    /// Pairwise win rates between policies.
    Tournament(TournamentArgs),
    /// Convergence-rate study of exact mirror descent.
    Converge(ConvergeArgs),
    /// Value, coverage and Blackwell diagnostics for one policy.
    Diag(DiagArgs),
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Option<GenKind>,
    #[arg(long)]
    prompts: Option<usize>,
    /// Responses per prompt.
    #[arg(long = "responses")]
    n: Option<usize>,
    /// Criteria per prompt.
    #[arg(long = "criteria")]
    m: Option<usize>,
    #[arg(long)]
    strength: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct AuditArgs {
    #[arg(long)]
    games: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    mode: Option<AuditModeKind>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SolveArgs {
    #[arg(long)]
    games: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    variant: Option<Vec<Variant>>,
    #[arg(long)]
    estimator: Option<Estimator>,
    #[arg(long)]
    rho: Option<f64>,
    /// Partition samples `M`.
    #[arg(long)]
    samples: Option<usize>,
    /// Rollout pairs `K`.
    #[arg(long)]
    rollouts: Option<usize>,
    #[arg(long)]
    ridge: Option<f64>,
    #[arg(long, value_enum)]
    policy_class: Option<PolicyClass>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct TournamentArgs {
    #[arg(long)]
    games: Option<PathBuf>,
    /// `label=path`, repeatable.
    #[arg(long = "policy", value_parser = parse_policy_entry)]
    policies: Vec<PolicyEntry>,
    /// Switch to sampled mode with this many draws per prompt.
    #[arg(long)]
    sampled: Option<usize>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct ConvergeArgs {
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    horizons: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    oracle_iterations: Option<usize>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct DiagArgs {
    #[arg(long)]
    games: Option<PathBuf>,
    #[arg(long)]
    policy: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
}

fn parse_policy_entry(s: &str) -> Result<PolicyEntry, String> {
    let (label, path) = s.split_once('=').ok_or("expected label=path")?;
    Ok(PolicyEntry {
        label: label.to_string(),
        path: PathBuf::from(path),
    })
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    set(&mut cfg.out, cli.out.clone());
    cfg.solve.solver.seed = cfg.seed;
    match &cli.command {
        Command::Gen(a) => {
            let g = &mut cfg.gen;
            set(&mut g.kind, a.kind);
            set(&mut g.prompts, a.prompts);
            set(&mut g.n, a.n);
            set(&mut g.m, a.m);
            set(&mut g.strength, a.strength);
            set(&mut g.tau, a.tau);
            if a.log.is_some() {
                g.log = a.log.clone();
            }
        }
        Command::Audit(a) => {
            if a.games.is_some() {
                cfg.games = a.games.clone();
            }
            set(&mut cfg.audit.sizes, a.sizes.clone());
            set(&mut cfg.audit.mode, a.mode);
        }
        Command::Solve(a) => {
            if a.games.is_some() {
                cfg.games = a.games.clone();
            }
            let s = &mut cfg.solve.solver;
            set(&mut s.beta, a.beta);
            if a.eta.is_some() {
                s.eta = a.eta;
            }
            set(&mut s.iterations, a.iterations);
            set(&mut s.estimator, a.estimator);
            set(&mut s.rho, a.rho);
            set(&mut s.samples, a.samples);
            set(&mut s.responses, a.rollouts);
            set(&mut s.ridge, a.ridge);
            set(&mut cfg.solve.variants, a.variant.clone());
            set(&mut cfg.solve.policy_class, a.policy_class);
            cfg.solve.solver.validate()?;
        }
        Command::Tournament(a) => {
            if a.games.is_some() {
                cfg.games = a.games.clone();
            }
            if !a.policies.is_empty() {
                cfg.tournament.policies = a.policies.clone();
            }
            if let Some(n) = a.sampled {
                cfg.tournament.mode = TournamentMode::Sampled { n, seed: cfg.seed };
            }
        }
        Command::Converge(a) => {
            let c = &mut cfg.converge;
            set(&mut c.betas, a.betas.clone());
            set(&mut c.horizons, a.horizons.clone());
            set(&mut c.seeds, a.seeds.clone());
            set(&mut c.oracle_iterations, a.oracle_iterations);
        }
        Command::Diag(a) => {
            if a.games.is_some() {
                cfg.games = a.games.clone();
            }
            if a.policy.is_some() {
                cfg.diag.policy = a.policy.clone();
            }
            set(&mut cfg.diag.p, a.p);
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        maxent_bw::exec::configure_threads(n);
    }
    let cfg = effective_config(&cli)?;
    let mut out = OutDir::create(&cfg.out)?;
    let name = match &cli.command {
        Command::Gen(_) => {
            commands::gen(&cfg, &mut out)?;
            "gen"
        }
        Command::Audit(_) => {
            commands::audit_cmd(&cfg, &mut out)?;
            "audit"
        }
        Command::Solve(_) => {
            commands::solve(&cfg, &mut out)?;
            "solve"
        }
        Command::Tournament(_) => {
            commands::tournament_cmd(&cfg, &mut out)?;
            "tournament"
        }
        Command::Converge(_) => {
            commands::converge(&cfg, &mut out)?;
            "converge"
        }
        Command::Diag(_) => {
            commands::diag(&cfg, &mut out)?;
            "diag"
        }
    };
    out.finish(name, &serde_json::to_string(&cfg)?, cfg.seed, cli.threads)
}

fn category(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<maxent_bw::Error>() {
            return e.category();
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "config";
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
    }
    "invalid-argument"
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", category(&e), one_line(&format!("{e:#}")));
            ExitCode::from(1)
        }
    }
}
