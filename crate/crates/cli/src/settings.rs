//! Run configuration file.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use maxent_bw::audit::AuditMode;
use maxent_bw::config::{SolverConfig, Variant, DEFAULT_SEED};
use maxent_bw::eval::TournamentMode;
use maxent_bw::judge::LikertConfig;
use maxent_bw::train::Epoch;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Cyclic,
    RandomUtility,
    /// Ingest a JSON-lines judgment log.
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSpec {
    pub kind: GenKind,
    pub prompts: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub strength: f64,
    pub tau: f64,
    /// Pass the generated games through the Likert judging protocol.
    pub likert: Option<LikertConfig>,
    pub log: Option<PathBuf>,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            kind: GenKind::RandomUtility,
            prompts: 8,
            n: 8,
            m: 3,
            strength: 0.3,
            tau: 1.0,
            likert: None,
            log: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AuditModeKind {
    PerCriterion,
    Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSpec {
    /// Empty means `{2, 4, 8, 16}` capped at the smallest game.
    pub sizes: Vec<usize>,
    pub mode: AuditModeKind,
    pub weights: Option<Vec<f64>>,
}

impl Default for AuditSpec {
    fn default() -> Self {
        Self {
            sizes: Vec::new(),
            mode: AuditModeKind::PerCriterion,
            weights: None,
        }
    }
}

impl AuditSpec {
    pub fn mode(&self) -> AuditMode {
        match self.mode {
            AuditModeKind::PerCriterion => AuditMode::PerCriterion,
            AuditModeKind::Aggregate => AuditMode::Aggregate(self.weights.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyClass {
    Tabular,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveSpec {
    #[serde(flatten)]
    pub solver: SolverConfig,
    pub variants: Vec<Variant>,
    /// Epochs of `(iterations, rho)`; empty runs a single epoch from the solver fields.
    pub schedule: Vec<Epoch>,
    pub policy_class: PolicyClass,
    /// Feature document for the linear class; one-hot when absent.
    pub features: Option<PathBuf>,
    /// Reference policy file; uniform when absent.
    pub reference: Option<PathBuf>,
}

impl Default for SolveSpec {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            variants: vec![Variant::Full],
            schedule: Vec::new(),
            policy_class: PolicyClass::Tabular,
            features: None,
            reference: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyEntry {
    pub label: String,
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TournamentSpec {
    /// Empty means every policy file under `<out>/policies`.
    pub policies: Vec<PolicyEntry>,
    /// Add the uniform reference as `ref`.
    pub include_reference: bool,
    pub mode: TournamentMode,
}

impl Default for TournamentSpec {
    fn default() -> Self {
        Self {
            policies: Vec::new(),
            include_reference: true,
            mode: TournamentMode::Expected,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeSpec {
    pub generator: GenSpec,
    pub betas: Vec<f64>,
    pub horizons: Vec<usize>,
    pub seeds: Vec<u64>,
    pub oracle_iterations: usize,
}

impl Default for ConvergeSpec {
    fn default() -> Self {
        Self {
            generator: GenSpec {
                prompts: 1,
                ..GenSpec::default()
            },
            betas: vec![0.5],
            horizons: vec![100, 1_000, 10_000],
            seeds: vec![1, 2, 3],
            oracle_iterations: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagSpec {
    /// Policy to inspect; the reference when absent.
    pub policy: Option<PathBuf>,
    /// Target level of the Blackwell summary.
    pub p: f64,
}

impl Default for DiagSpec {
    fn default() -> Self {
        Self { policy: None, p: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Input game set; `<out>/games/games.json` when absent.
    pub games: Option<PathBuf>,
    pub gen: GenSpec,
    pub audit: AuditSpec,
    pub solve: SolveSpec,
    pub tournament: TournamentSpec,
    pub converge: ConvergeSpec,
    pub diag: DiagSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            out: PathBuf::from("out"),
            games: None,
            gen: GenSpec::default(),
            audit: AuditSpec::default(),
            solve: SolveSpec::default(),
            tournament: TournamentSpec::default(),
            converge: ConvergeSpec::default(),
            diag: DiagSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn games_path(&self) -> PathBuf {
        self.games
            .clone()
            .unwrap_or_else(|| self.out.join("games").join("games.json"))
    }
}
