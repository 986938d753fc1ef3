//! Oracles over rendered screens and the classifier that turns their
//! violations into attack-vector findings.

mod oracles;

use serde::{Deserialize, Serialize};

use crate::assets;
use crate::chain::ChainWorld;
use crate::harness::{has_alert_keyword, RenderedScreen, WalletSession};
use crate::mutator::Strategy;
use crate::seeds::{ScamPattern, Seed, SeedBody, SeedOrigin};

pub use oracles::{oracle_alert, oracle_simulator, oracle_ui, parse_simulation, SimView};

/// Attack vector ids, in report order.
pub const VECTORS: [&str; 13] = ["V1", "V2", "V3", "V4", "V5", "V6", "V7", "V8", "V9", "V10", "V11", "V12", "V13"];
pub const UNCLASSIFIED: &str = "unclassified";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Oracle {
    SimulatorAccuracy,
    AlertReliability,
    UiCorrectnessClarity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeedRef {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
}

impl SeedRef {
    pub fn of(seed: &Seed) -> Self {
        SeedRef {
            id: seed.id.clone(),
            parent: seed.parent.clone(),
            strategy: seed.mutation.as_ref().map(|m| m.strategy),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleVerdict {
    pub oracle: Oracle,
    /// Expectation kind; the classifier keys on it.
    pub kind: String,
    pub expectation: String,
    pub observed: String,
    pub violated: bool,
    pub screen_evidence: RenderedScreen,
    pub seed_ref: SeedRef,
}

/// Lines of a screen in reading order: by row, then by column.
pub fn extract_text(screen: &RenderedScreen) -> Vec<String> {
    let mut lines: Vec<_> = screen.lines.iter().collect();
    lines.sort_by_key(|l| (l.region.y, l.region.x));
    lines.into_iter().map(|l| l.text.clone()).collect()
}

/// A keyword on any screen, or no screen changed at all.
pub fn alerted(screens: &[RenderedScreen]) -> bool {
    screens.iter().all(|s| !s.changed_from_previous)
        || screens.iter().flat_map(extract_text).any(|l| has_alert_keyword(&l))
}

/// One submission as the oracles see it.
#[derive(Debug, Clone, Copy)]
pub struct Submission<'a> {
    pub seed: &'a Seed,
    pub screens: &'a [RenderedScreen],
    pub session_before: &'a WalletSession,
    pub session_after: &'a WalletSession,
    /// Whether the same profile alerted on this seed's parent.
    pub parent_alerted: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// Relative tolerance on simulated amounts; zero means exact equality.
    pub tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { tolerance: 0.0 }
    }
}

/// Every verdict the oracles reach on one submission; never empty.
pub fn verify(world: &ChainWorld, sub: &Submission<'_>, cfg: &VerifyConfig) -> Vec<OracleVerdict> {
    let mut out = Vec::new();
    if matches!(sub.seed.body, SeedBody::Transaction(_) | SeedBody::Message(_)) {
        out.extend(oracle_alert(world, sub));
    }
    if let SeedBody::Transaction(tx) = &sub.seed.body {
        out.extend(oracle_simulator(world, sub.seed, tx, sub.screens, cfg.tolerance));
    }
    out.extend(oracle_ui(world, sub));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierRule {
    pub oracle: Oracle,
    pub kind: String,
    pub vector: String,
    /// Seed kind the rule is limited to; any kind when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ClassifierError {
    #[error("invalid classifier json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported classifier schema `{0}`")]
    Schema(String),
    #[error("rule {oracle:?}/{kind} maps to unknown vector `{vector}`")]
    UnknownVector { oracle: Oracle, kind: String, vector: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classifier {
    pub schema: String,
    pub rules: Vec<ClassifierRule>,
}

impl Classifier {
    pub fn from_json(text: &str) -> Result<Classifier, ClassifierError> {
        let c: Classifier = serde_json::from_str(text)?;
        if c.schema != "classifier/1" {
            return Err(ClassifierError::Schema(c.schema));
        }
        if let Some(r) = c.rules.iter().find(|r| !VECTORS.contains(&r.vector.as_str())) {
            return Err(ClassifierError::UnknownVector {
                oracle: r.oracle,
                kind: r.kind.clone(),
                vector: r.vector.clone(),
            });
        }
        Ok(c)
    }

    pub fn bundled() -> Classifier {
        Self::from_json(assets::CLASSIFIER).expect("bundled classifier")
    }

    pub fn vector_for(&self, oracle: Oracle, kind: &str, family: &str) -> &str {
        self.rules
            .iter()
            .find(|r| r.oracle == oracle && r.kind == kind && r.family.as_deref().is_none_or(|f| f == family))
            .map(|r| r.vector.as_str())
            .unwrap_or(UNCLASSIFIED)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Lineage {
    pub seed_id: String,
    pub origin: SeedOrigin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_seed_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<ScamPattern>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AttackVectorFinding {
    pub vector: String,
    pub profile_name: String,
    pub lineage: Lineage,
    pub verdicts: Vec<OracleVerdict>,
}

/// Groups the violated verdicts of one submission by vector, in order of
/// first appearance.
pub fn classify(
    verdicts: &[OracleVerdict],
    seed: &Seed,
    profile: &str,
    table: &Classifier,
) -> Vec<AttackVectorFinding> {
    let mut out: Vec<AttackVectorFinding> = Vec::new();
    for v in verdicts.iter().filter(|v| v.violated) {
        let vector = table.vector_for(v.oracle, &v.kind, seed.body.kind_name()).to_string();
        match out.iter_mut().find(|f| f.vector == vector) {
            Some(f) => f.verdicts.push(v.clone()),
            None => out.push(AttackVectorFinding {
                vector,
                profile_name: profile.to_string(),
                lineage: Lineage {
                    seed_id: seed.id.clone(),
                    origin: seed.origin,
                    parent_seed_id: seed.parent.clone(),
                    strategy: seed.mutation.as_ref().map(|m| m.strategy),
                    pattern: seed.pattern,
                },
                verdicts: vec![v.clone()],
            }),
        }
    }
    out
}
