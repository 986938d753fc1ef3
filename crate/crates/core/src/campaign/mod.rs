//! Campaign orchestration: corpus construction, parallel submission of
//! every seed to every profile, and replay of single seeds.

mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assets;
use crate::chain::{ChainError, ChainWorld};
use crate::harness::{
    submit_seed, MockWallet, ProfileError, RenderedScreen, WalletAdapter, WalletProfile, WalletSession,
};
use crate::hash::keccak256;
use crate::mutator::{mutate, DEFAULT_BUDGET};
use crate::seeds::ui::{crawl_ui, generate_interactions, CrawlError, FixtureNavigator, UiElementGraph, UiFixture};
use crate::seeds::{
    attacker_addresses, bundled_message_corpus, bundled_scam_catalog, collect_valid_transactions, Seed, SeedBody,
    SeedError, SeedOrigin,
};
use crate::verifier::{
    alerted, classify, verify, AttackVectorFinding, Classifier, OracleVerdict, Submission, VerifyConfig,
};

pub use report::{
    render_markdown, CampaignReport, CorpusStats, MatrixCell, MatrixRow, ProfileReport, Timing, Totals, VectorCount,
    REPORT_SCHEMA_ID,
};

pub const CORPUS_SCHEMA: &str = "corpus/1";
pub const DEFAULT_VALID: usize = 20;
pub const DEFAULT_PER_NODE: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Seed(#[from] SeedError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Crawl(#[from] CrawlError),
    #[error("invalid corpus: {0}")]
    Corpus(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn read(path: &Path) -> Result<String, CampaignError> {
    std::fs::read_to_string(path).map_err(|source| CampaignError::Io { path: path.to_path_buf(), source })
}

/// The bundled world, or a fixture file.
pub fn load_world(path: Option<&Path>) -> Result<ChainWorld, CampaignError> {
    Ok(match path {
        Some(p) => ChainWorld::from_fixture_json(&read(p)?)?,
        None => ChainWorld::from_fixture_json(assets::DEFAULT_WORLD)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    /// World fixture; the bundled one when absent.
    pub world: Option<PathBuf>,
    /// Profile names or files; every known profile when empty.
    pub profiles: Vec<String>,
    /// Pre-built corpus to run instead of building one.
    pub corpus: Option<PathBuf>,
    pub n_valid: usize,
    pub budget: usize,
    pub per_node: usize,
    pub rng_seed: u64,
    pub jobs: usize,
    pub verify: VerifyConfig,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            world: None,
            profiles: Vec::new(),
            corpus: None,
            n_valid: DEFAULT_VALID,
            budget: DEFAULT_BUDGET,
            per_node: DEFAULT_PER_NODE,
            rng_seed: 0,
            jobs: 1,
            verify: VerifyConfig::default(),
        }
    }
}

impl CampaignConfig {
    pub fn load_profiles(&self) -> Result<Vec<WalletProfile>, CampaignError> {
        let names = if self.profiles.is_empty() { WalletProfile::known_names() } else { self.profiles.clone() };
        names.iter().map(|n| WalletProfile::load(n).map_err(CampaignError::from)).collect()
    }

    fn world_label(&self) -> String {
        self.world.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "bundled".into())
    }
}

/// Per-seed random stream derived from the campaign seed and the seed id,
/// so that adding or reordering seeds leaves the other streams untouched.
pub fn seed_rng(rng_seed: u64, id: &str) -> ChaCha8Rng {
    let mut data = rng_seed.to_be_bytes().to_vec();
    data.extend_from_slice(id.as_bytes());
    ChaCha8Rng::from_seed(keccak256(&data))
}

/// Parents in corpus order, each followed by its own mutants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Corpus {
    pub schema: String,
    pub rng_seed: u64,
    pub seeds: Vec<Seed>,
}

impl Corpus {
    pub fn from_json(text: &str) -> Result<Corpus, CampaignError> {
        let c: Corpus = serde_json::from_str(text)?;
        if c.schema != CORPUS_SCHEMA {
            return Err(CampaignError::Corpus(format!("unsupported schema `{}`", c.schema)));
        }
        c.groups()?;
        Ok(c)
    }

    /// Each parent with its mutants. Mutants must follow their parent.
    pub fn groups(&self) -> Result<Vec<(&Seed, Vec<&Seed>)>, CampaignError> {
        let mut out: Vec<(&Seed, Vec<&Seed>)> = Vec::new();
        for s in &self.seeds {
            match &s.parent {
                None => out.push((s, Vec::new())),
                Some(p) => match out.last_mut() {
                    Some((parent, kids)) if &parent.id == p => kids.push(s),
                    _ => return Err(CampaignError::Corpus(format!("mutant {} does not follow parent {p}", s.id))),
                },
            }
        }
        Ok(out)
    }

    pub fn stats(&self) -> CorpusStats {
        let mut st = CorpusStats::default();
        for s in &self.seeds {
            match s.origin {
                SeedOrigin::Mutant => st.mutants += 1,
                SeedOrigin::Mempool => st.valid += 1,
                SeedOrigin::Template => st.messages += 1,
                SeedOrigin::Catalog => st.scams += 1,
                SeedOrigin::Crawl => st.interactions += 1,
            }
        }
        st.parents = st.valid + st.messages + st.scams + st.interactions;
        st.total = st.parents + st.mutants;
        st
    }
}

pub fn crawl_bundled_ui() -> Result<(UiFixture, UiElementGraph), CampaignError> {
    let ui = UiFixture::bundled();
    let mut nav = FixtureNavigator::new(ui.clone());
    let graph = crawl_ui(&mut nav)?;
    Ok((ui, graph))
}

/// Valid transactions, message templates, scam catalog entries and crawled
/// interactions, each followed by its mutants.
pub fn build_corpus(world: &ChainWorld, cfg: &CampaignConfig) -> Result<Corpus, CampaignError> {
    let net = world.default_network;
    let mut parents = Vec::new();
    for (i, t) in collect_valid_transactions(world, net, cfg.n_valid)?.into_iter().enumerate() {
        parents.push(Seed::new(format!("valid-{:04}", i + 1), SeedOrigin::Mempool, SeedBody::Transaction(t)));
    }
    for (i, m) in bundled_message_corpus(net)?.into_iter().enumerate() {
        parents.push(Seed::new(format!("msg-{:04}", i + 1), SeedOrigin::Template, SeedBody::Message(m)));
    }
    let catalog = bundled_scam_catalog(net)?;
    for (i, e) in catalog.iter().enumerate() {
        let mut s = Seed::new(format!("scam-{:04}", i + 1), SeedOrigin::Catalog, e.seed.clone());
        s.pattern = Some(e.pattern);
        s.scam_type = Some(e.scam_type.clone());
        parents.push(s);
    }
    let (_, graph) = crawl_bundled_ui()?;
    let mut ui_rng = seed_rng(cfg.rng_seed, "ui");
    for (i, it) in generate_interactions(&graph, world, net, cfg.per_node, &mut ui_rng).into_iter().enumerate() {
        parents.push(Seed::new(format!("ui-{:04}", i + 1), SeedOrigin::Crawl, SeedBody::Interaction(it)));
    }
    let attackers = attacker_addresses(world, &catalog);
    let mut seeds = Vec::new();
    for p in parents {
        let mutants = mutate(&p, &attackers, cfg.budget, &mut seed_rng(cfg.rng_seed, &p.id));
        seeds.push(p);
        seeds.extend(mutants);
    }
    Ok(Corpus { schema: CORPUS_SCHEMA.into(), rng_seed: cfg.rng_seed, seeds })
}

/// Everything one submission produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmissionRecord {
    pub screens: Vec<RenderedScreen>,
    pub verdicts: Vec<OracleVerdict>,
    pub findings: Vec<AttackVectorFinding>,
    pub crash: Option<String>,
}

/// Submits `seed` on a fresh session and runs the oracles.
pub fn submit_and_verify(
    wallet: &mut MockWallet,
    world: &ChainWorld,
    account: crate::chain::Address,
    seed: &Seed,
    parent_alerted: Option<bool>,
    classifier: &Classifier,
    cfg: &VerifyConfig,
) -> SubmissionRecord {
    wallet.reset();
    let before = WalletSession::for_seed(world, account, &seed.body);
    let mut session = before.clone();
    let screens = match submit_seed(wallet, &mut session, &seed.body) {
        Ok(s) => s,
        Err(e) => {
            return SubmissionRecord {
                screens: Vec::new(),
                verdicts: Vec::new(),
                findings: Vec::new(),
                crash: Some(e.to_string()),
            }
        }
    };
    let sub = Submission { seed, screens: &screens, session_before: &before, session_after: &session, parent_alerted };
    let verdicts = verify(world, &sub, cfg);
    let findings = classify(&verdicts, seed, &wallet.profile.name, classifier);
    SubmissionRecord { screens, verdicts, findings, crash: None }
}

#[derive(Debug, Default)]
struct ItemResult {
    submissions: usize,
    findings: Vec<AttackVectorFinding>,
    crashes: Vec<String>,
}

struct Shared<'a> {
    world: &'a ChainWorld,
    ui: &'a UiFixture,
    classifier: &'a Classifier,
    verify: &'a VerifyConfig,
}

fn run_item(sh: &Shared<'_>, profile: &WalletProfile, parent: &Seed, mutants: &[&Seed]) -> ItemResult {
    let mut wallet = MockWallet::new(profile.clone(), sh.world.clone(), sh.ui.clone());
    let mut res = ItemResult::default();
    let record = |res: &mut ItemResult, seed: &Seed, rec: SubmissionRecord| {
        res.submissions += 1;
        if let Some(c) = rec.crash {
            res.crashes.push(format!("{}: {c}", seed.id));
        }
        res.findings.extend(rec.findings);
    };
    let first = submit_and_verify(&mut wallet, sh.world, sh.ui.account, parent, None, sh.classifier, sh.verify);
    let parent_alerted = first.crash.is_none() && alerted(&first.screens);
    record(&mut res, parent, first);
    for m in mutants {
        let rec =
            submit_and_verify(&mut wallet, sh.world, sh.ui.account, m, Some(parent_alerted), sh.classifier, sh.verify);
        record(&mut res, m, rec);
    }
    res
}

/// Runs every (profile, parent group) pair on `jobs` threads. Results are
/// reduced in item order, so the report does not depend on scheduling.
pub fn run_corpus(
    world: &ChainWorld,
    corpus: &Corpus,
    profiles: &[WalletProfile],
    jobs: usize,
    verify_cfg: &VerifyConfig,
) -> Result<Vec<ProfileReport>, CampaignError> {
    let groups = corpus.groups()?;
    let (ui, _) = crawl_bundled_ui()?;
    let classifier = Classifier::bundled();
    let sh = Shared { world, ui: &ui, classifier: &classifier, verify: verify_cfg };
    let items: Vec<(usize, usize)> = (0..profiles.len()).flat_map(|p| (0..groups.len()).map(move |g| (p, g))).collect();
    let jobs = jobs.clamp(1, items.len().max(1));
    let mut results: Vec<Option<ItemResult>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                let (sh, items, groups) = (&sh, &items, &groups);
                scope.spawn(move || {
                    (w..items.len())
                        .step_by(jobs)
                        .map(|i| {
                            let (p, g) = items[i];
                            let (parent, mutants) = &groups[g];
                            (i, run_item(sh, &profiles[p], parent, mutants))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("campaign worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    let mut reports: Vec<ProfileReport> = profiles
        .iter()
        .map(|p| ProfileReport {
            name: p.name.clone(),
            expect_clean: p.expect_clean,
            submissions: 0,
            crashes: Vec::new(),
            findings: Vec::new(),
        })
        .collect();
    for ((p, _), r) in items.iter().zip(results) {
        let r = r.expect("every item ran");
        let rep = &mut reports[*p];
        rep.submissions += r.submissions;
        rep.crashes.extend(r.crashes);
        rep.findings.extend(r.findings);
    }
    Ok(reports)
}

#[derive(Debug, Clone)]
pub struct CampaignOutput {
    pub corpus: Corpus,
    pub report: CampaignReport,
    pub timing: Timing,
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutput, CampaignError> {
    let start = Instant::now();
    let world = load_world(cfg.world.as_deref())?;
    let profiles = cfg.load_profiles()?;
    let corpus = match &cfg.corpus {
        Some(p) => Corpus::from_json(&read(p)?)?,
        None => build_corpus(&world, cfg)?,
    };
    let corpus_ms = start.elapsed().as_millis() as u64;
    let fuzz_start = Instant::now();
    let profile_reports = run_corpus(&world, &corpus, &profiles, cfg.jobs, &cfg.verify)?;
    let fuzz_ms = fuzz_start.elapsed().as_millis() as u64;
    let report = CampaignReport::assemble(corpus.rng_seed, cfg.world_label(), corpus.stats(), profile_reports);
    let timing = Timing {
        corpus_ms,
        fuzz_ms,
        total_ms: start.elapsed().as_millis() as u64,
        submissions: report.profiles.iter().map(|p| p.submissions).sum(),
        jobs: cfg.jobs.max(1),
    };
    Ok(CampaignOutput { corpus, report, timing })
}

/// A single seed submitted to one profile, with everything the oracles
/// concluded.
#[derive(Debug, Clone)]
pub struct ReplayTrace {
    pub profile: String,
    pub seed: Seed,
    pub parent_alerted: Option<bool>,
    pub record: SubmissionRecord,
}

/// Replays the last seed of `chain`; earlier entries are its ancestors and
/// only decide whether the parent was alerted.
pub fn replay(world: &ChainWorld, chain: &[Seed], profile: &WalletProfile, cfg: &VerifyConfig) -> Option<ReplayTrace> {
    let (seed, ancestors) = chain.split_last()?;
    let ui = UiFixture::bundled();
    let classifier = Classifier::bundled();
    let mut wallet = MockWallet::new(profile.clone(), world.clone(), ui.clone());
    let parent_alerted = ancestors.last().filter(|p| seed.parent.as_deref() == Some(p.id.as_str())).map(|p| {
        let rec = submit_and_verify(&mut wallet, world, ui.account, p, None, &classifier, cfg);
        rec.crash.is_none() && alerted(&rec.screens)
    });
    let record = submit_and_verify(&mut wallet, world, ui.account, seed, parent_alerted, &classifier, cfg);
    Some(ReplayTrace { profile: profile.name.clone(), seed: seed.clone(), parent_alerted, record })
}

impl fmt::Display for ReplayTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "profile: {}", self.profile)?;
        writeln!(f, "seed: {}", self.seed)?;
        if let Some(a) = self.parent_alerted {
            writeln!(f, "parent alerted: {a}")?;
        }
        if let Some(c) = &self.record.crash {
            writeln!(f, "wallet crashed: {c}")?;
        }
        for s in &self.record.screens {
            let mark = if s.changed_from_previous { "" } else { " (unchanged)" };
            writeln!(f, "screen {}{mark}", s.screen_id)?;
            for l in crate::verifier::extract_text(s) {
                writeln!(f, "  | {}", l.escape_debug())?;
            }
        }
        for v in &self.record.verdicts {
            let flag = if v.violated { "VIOLATED" } else { "ok" };
            writeln!(
                f,
                "verdict {flag} {:?}/{}: expected {}; observed {}",
                v.oracle, v.kind, v.expectation, v.observed
            )?;
        }
        if self.record.findings.is_empty() {
            write!(f, "no findings")
        } else {
            let ids: Vec<&str> = self.record.findings.iter().map(|x| x.vector.as_str()).collect();
            write!(f, "findings: {}", ids.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_groups_mutants_under_parents() {
        let world = load_world(None).unwrap();
        let cfg = CampaignConfig { n_valid: 3, budget: 2, per_node: 0, ..Default::default() };
        let c = build_corpus(&world, &cfg).unwrap();
        let groups = c.groups().unwrap();
        assert!(groups
            .iter()
            .all(|(p, kids)| kids.len() <= 2 && kids.iter().all(|k| k.parent.as_deref() == Some(p.id.as_str()))));
        let st = c.stats();
        assert_eq!(st.valid, 3);
        assert_eq!(st.total, c.seeds.len());
    }

    #[test]
    fn corpus_json_round_trips() {
        let world = load_world(None).unwrap();
        let cfg = CampaignConfig { n_valid: 2, budget: 1, per_node: 0, ..Default::default() };
        let c = build_corpus(&world, &cfg).unwrap();
        let back = Corpus::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn orphan_mutant_rejected() {
        let world = load_world(None).unwrap();
        let cfg = CampaignConfig { n_valid: 2, budget: 1, per_node: 0, ..Default::default() };
        let mut c = build_corpus(&world, &cfg).unwrap();
        c.seeds.swap(0, 1);
        assert!(c.groups().is_err());
    }
}
