//! Tabular and linear-softmax policies over each prompt's responses.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::GameSet;
use crate::numeric::{check_simplex, one_hot, softmax, uniform};

/// One probability vector per prompt, aligned with the owning [`GameSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct TabularPolicy {
    probs: Vec<Vec<f64>>,
}

impl TabularPolicy {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        for (x, p) in probs.iter().enumerate() {
            check_simplex(p, p.len(), &format!("policy at prompt {x}"))?;
        }
        Ok(Self { probs })
    }

    /// Checks that the policy covers exactly the prompts and responses of `gs`.
    pub fn check_shape(&self, gs: &GameSet) -> Result<()> {
        if self.probs.len() != gs.len() {
            return Err(invalid(format!(
                "policy has {} prompts, game set has {}",
                self.probs.len(),
                gs.len()
            )));
        }
        for (x, g) in gs.games().iter().enumerate() {
            if self.probs[x].len() != g.n_responses() {
                return Err(invalid(format!(
                    "policy at prompt `{}` has {} entries, game has N = {}",
                    g.prompt_id(),
                    self.probs[x].len(),
                    g.n_responses()
                )));
            }
        }
        Ok(())
    }

    pub fn uniform(gs: &GameSet) -> Self {
        Self {
            probs: gs.games().iter().map(|g| uniform(g.n_responses())).collect(),
        }
    }

    /// Point mass on response `i` (clamped to `N − 1`) at every prompt.
    pub fn pure(gs: &GameSet, i: usize) -> Self {
        Self {
            probs: gs
                .games()
                .iter()
                .map(|g| one_hot(g.n_responses(), i.min(g.n_responses() - 1)))
                .collect(),
        }
    }

    pub(crate) fn from_probs_unchecked(probs: Vec<Vec<f64>>) -> Self {
        Self { probs }
    }

    pub fn probs(&self, x: usize) -> &[f64] {
        &self.probs[x]
    }

    pub fn all(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Largest per-prompt total-variation distance to `other`.
    pub fn max_tv(&self, other: &TabularPolicy) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| crate::numeric::tv_distance(a, b))
            .fold(0.0, f64::max)
    }

    /// `{"prompt_id": [probabilities]}`
    pub fn to_doc(&self, gs: &GameSet) -> BTreeMap<String, Vec<f64>> {
        gs.games()
            .iter()
            .zip(&self.probs)
            .map(|(g, p)| (g.prompt_id().to_string(), p.clone()))
            .collect()
    }

    pub fn from_doc(doc: &BTreeMap<String, Vec<f64>>, gs: &GameSet) -> Result<Self> {
        let probs = gs
            .games()
            .iter()
            .map(|g| {
                doc.get(g.prompt_id())
                    .cloned()
                    .ok_or_else(|| invalid(format!("policy has no entry for prompt `{}`", g.prompt_id())))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = Self::new(probs)?;
        p.check_shape(gs)?;
        Ok(p)
    }
}

/// Policy `π_θ(·|x) = softmax(Φ(x) θ)` with fixed per-prompt features.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSoftmaxPolicy {
    /// Per prompt, row-major `N × d`.
    features: Vec<Vec<f64>>,
    dim: usize,
    theta: Vec<f64>,
}

impl LinearSoftmaxPolicy {
    /// `features[x]` is the `N_x × d` matrix for prompt `x`.
    pub fn new(features: Vec<Vec<Vec<f64>>>, theta: Vec<f64>, allow_overcomplete: bool) -> Result<Self> {
        let dim = theta.len();
        let total_rows: usize = features.iter().map(|f| f.len()).sum();
        if dim == 0 {
            return Err(invalid("theta must be nonempty"));
        }
        if !allow_overcomplete && dim > total_rows {
            return Err(invalid(format!(
                "feature dimension {dim} exceeds the {total_rows} (prompt, response) pairs"
            )));
        }
        let mut flat = Vec::with_capacity(features.len());
        for (x, rows) in features.into_iter().enumerate() {
            if rows.iter().any(|r| r.len() != dim) {
                return Err(invalid(format!("prompt {x}: feature rows must have length {dim}")));
            }
            if rows.iter().flatten().any(|v| !v.is_finite()) {
                return Err(invalid(format!("prompt {x}: non-finite feature")));
            }
            flat.push(rows.into_iter().flatten().collect());
        }
        Ok(Self {
            features: flat,
            dim,
            theta,
        })
    }

    /// One-hot features per (prompt, response); recovers the tabular class.
    pub fn one_hot(gs: &GameSet, theta: Vec<f64>) -> Result<Self> {
        let total: usize = gs.games().iter().map(|g| g.n_responses()).sum();
        if theta.len() != total {
            return Err(invalid(format!("one-hot theta needs length {total}")));
        }
        let mut offset = 0;
        let features = gs
            .games()
            .iter()
            .map(|g| {
                let n = g.n_responses();
                let rows = (0..n).map(|y| one_hot(total, offset + y)).collect::<Vec<_>>();
                offset += n;
                rows
            })
            .collect();
        Self::new(features, theta, false)
    }

    /// One-hot policy reproducing a strictly positive tabular policy.
    pub fn one_hot_from_tabular(gs: &GameSet, pi: &TabularPolicy) -> Result<Self> {
        let mut theta = Vec::new();
        for (x, p) in pi.all().iter().enumerate() {
            if p.iter().any(|&v| v <= 0.0) {
                return Err(Error::CoverageViolation {
                    prompt: gs.game(x).prompt_id().to_string(),
                    response: p.iter().position(|&v| v <= 0.0).unwrap_or(0),
                });
            }
            theta.extend(p.iter().map(|v| v.ln()));
        }
        Self::one_hot(gs, theta)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn n_prompts(&self) -> usize {
        self.features.len()
    }

    pub fn n_responses(&self, x: usize) -> usize {
        self.features[x].len() / self.dim
    }

    /// Feature row `φ(x, y)`.
    pub fn feature(&self, x: usize, y: usize) -> &[f64] {
        &self.features[x][y * self.dim..(y + 1) * self.dim]
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Self {
        assert_eq!(theta.len(), self.dim);
        Self {
            features: self.features.clone(),
            dim: self.dim,
            theta,
        }
    }

    pub fn logits(&self, x: usize) -> Vec<f64> {
        (0..self.n_responses(x))
            .map(|y| crate::numeric::dot(self.feature(x, y), &self.theta))
            .collect()
    }

    pub fn probs(&self, x: usize) -> Vec<f64> {
        softmax(&self.logits(x))
    }

    pub fn to_tabular(&self) -> TabularPolicy {
        TabularPolicy::from_probs_unchecked((0..self.n_prompts()).map(|x| self.probs(x)).collect())
    }

    /// `{"prompt_id": [[row], …]}` feature document.
    pub fn features_doc(&self, gs: &GameSet) -> BTreeMap<String, Vec<Vec<f64>>> {
        gs.games()
            .iter()
            .enumerate()
            .map(|(x, g)| {
                let rows = self.features[x].chunks(self.dim).map(|r| r.to_vec()).collect();
                (g.prompt_id().to_string(), rows)
            })
            .collect()
    }

    pub fn from_features_doc(
        doc: &BTreeMap<String, Vec<Vec<f64>>>,
        gs: &GameSet,
        theta: Vec<f64>,
    ) -> Result<Self> {
        let features = gs
            .games()
            .iter()
            .map(|g| {
                let rows = doc
                    .get(g.prompt_id())
                    .cloned()
                    .ok_or_else(|| invalid(format!("no features for prompt `{}`", g.prompt_id())))?;
                if rows.len() != g.n_responses() {
                    return Err(invalid(format!(
                        "prompt `{}`: {} feature rows for N = {}",
                        g.prompt_id(),
                        rows.len(),
                        g.n_responses()
                    )));
                }
                Ok(rows)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(features, theta, false)
    }
}

/// A policy of either class.
#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    Tabular(TabularPolicy),
    Linear(LinearSoftmaxPolicy),
}

impl Policy {
    pub fn to_tabular(&self) -> TabularPolicy {
        match self {
            Policy::Tabular(t) => t.clone(),
            Policy::Linear(l) => l.to_tabular(),
        }
    }
}

impl From<TabularPolicy> for Policy {
    fn from(p: TabularPolicy) -> Self {
        Policy::Tabular(p)
    }
}

impl From<LinearSoftmaxPolicy> for Policy {
    fn from(p: LinearSoftmaxPolicy) -> Self {
        Policy::Linear(p)
    }
}

/// On-disk form of a linear policy: `{"theta": [...], "features": path}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearPolicyDoc {
    pub theta: Vec<f64>,
    pub features: PathBuf,
}

/// Writes a policy. Linear policies also write their features next to `path`
/// as `<stem>.features.json`.
pub fn save_policy(policy: &Policy, gs: &GameSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let body = match policy {
        Policy::Tabular(t) => serde_json::to_string_pretty(&t.to_doc(gs))?,
        Policy::Linear(l) => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("policy");
            let feat_name = format!("{stem}.features.json");
            let feat_path = path.with_file_name(&feat_name);
            let feats = serde_json::to_string_pretty(&l.features_doc(gs))?;
            std::fs::write(&feat_path, feats).map_err(|e| Error::io(&feat_path, e))?;
            serde_json::to_string_pretty(&LinearPolicyDoc {
                theta: l.theta.clone(),
                features: PathBuf::from(feat_name),
            })?
        }
    };
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Reads either policy format; relative feature paths resolve against `path`'s directory.
pub fn load_policy(gs: &GameSet, path: impl AsRef<Path>) -> Result<Policy> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("theta").is_some() && value.get("features").is_some() {
        let doc: LinearPolicyDoc = serde_json::from_value(value)?;
        let feat_path = if doc.features.is_absolute() {
            doc.features.clone()
        } else {
            path.parent().unwrap_or(Path::new(".")).join(&doc.features)
        };
        let ftext = std::fs::read_to_string(&feat_path).map_err(|e| Error::io(&feat_path, e))?;
        let fdoc: BTreeMap<String, Vec<Vec<f64>>> = serde_json::from_str(&ftext)?;
        Ok(Policy::Linear(LinearSoftmaxPolicy::from_features_doc(&fdoc, gs, doc.theta)?))
    } else {
        let doc: BTreeMap<String, Vec<f64>> = serde_json::from_value(value)?;
        Ok(Policy::Tabular(TabularPolicy::from_doc(&doc, gs)?))
    }
}

/// `max_{x,y} π(y|x) / π_ref(y|x)`.
pub fn concentrability(pi: &TabularPolicy, pi_ref: &TabularPolicy, gs: &GameSet) -> Result<f64> {
    pi.check_shape(gs)?;
    pi_ref.check_shape(gs)?;
    let mut worst: f64 = 0.0;
    for (x, g) in gs.games().iter().enumerate() {
        for (y, (&p, &r)) in pi.probs(x).iter().zip(pi_ref.probs(x)).enumerate() {
            if r <= 0.0 {
                return Err(Error::CoverageViolation {
                    prompt: g.prompt_id().to_string(),
                    response: y,
                });
            }
            worst = worst.max(p / r);
        }
    }
    Ok(worst)
}
