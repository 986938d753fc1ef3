//! `wallet-fuzz`: build corpora, crawl the mock UI, run campaigns, replay
//! single seeds and render reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use wallet_fuzz::campaign::{
    build_corpus, crawl_bundled_ui, load_world, render_markdown, replay, run_campaign, CampaignConfig, CampaignReport,
};
use wallet_fuzz::harness::WalletProfile;
use wallet_fuzz::seeds::Seed;
use wallet_fuzz::verifier::VerifyConfig;

/// Exit status when a profile expected to be clean produced findings.
const EXIT_FINDINGS: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "wallet-fuzz", version, about = "Differential fuzzing of wallet signing pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// World fixture JSON; the bundled world when omitted.
    #[arg(long, env = "WALLET_FUZZ_WORLD", global = true)]
    world: Option<PathBuf>,
    /// Campaign random seed.
    #[arg(long = "rng-seed", env = "WALLET_FUZZ_RNG_SEED", default_value_t = 0, global = true)]
    rng_seed: u64,
    /// Output directory.
    #[arg(long, env = "WALLET_FUZZ_OUT", default_value = "out", global = true)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the seed corpus and write it to <out>/corpus.json.
    Corpus {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sizes: Sizes,
    },
    /// Crawl the mock wallet UI and export its element graph.
    Crawl {
        #[command(flatten)]
        common: Common,
        #[arg(long, env = "WALLET_FUZZ_PROFILE", default_value = "hardened")]
        profile: String,
    },
    /// Run a campaign and write report.json, report.md and timing.json.
    Fuzz {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sizes: Sizes,
        /// Profile names or files, comma separated; every known profile when omitted.
        #[arg(long, env = "WALLET_FUZZ_PROFILE", value_delimiter = ',')]
        profile: Vec<String>,
        /// Corpus file written by `corpus`; built afresh when omitted.
        #[arg(long, env = "WALLET_FUZZ_SEED")]
        seed: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, env = "WALLET_FUZZ_JOBS", default_value_t = 1)]
        jobs: usize,
        /// Relative tolerance when comparing simulated amounts.
        #[arg(long, env = "WALLET_FUZZ_TOLERANCE", default_value_t = 0.0)]
        tolerance: f64,
    },
    /// Submit one seed to one profile and print the trace.
    Replay {
        #[command(flatten)]
        common: Common,
        /// JSON file holding a seed, or an array whose last element is the
        /// seed and whose earlier elements are its ancestors.
        #[arg(long, env = "WALLET_FUZZ_SEED")]
        seed: PathBuf,
        #[arg(long, env = "WALLET_FUZZ_PROFILE")]
        profile: String,
    },
    /// Print the markdown matrix of a report.
    Report {
        #[command(flatten)]
        common: Common,
        /// Report file; <out>/report.json when omitted.
        report: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct Sizes {
    /// Valid transactions to collect.
    #[arg(long = "valid", env = "WALLET_FUZZ_VALID", default_value_t = wallet_fuzz::campaign::DEFAULT_VALID)]
    n_valid: usize,
    /// Mutants per parent seed.
    #[arg(long, env = "WALLET_FUZZ_BUDGET", default_value_t = wallet_fuzz::mutator::DEFAULT_BUDGET)]
    budget: usize,
    /// Random values per UI input node.
    #[arg(long = "per-node", env = "WALLET_FUZZ_PER_NODE", default_value_t = wallet_fuzz::campaign::DEFAULT_PER_NODE)]
    per_node: usize,
}

fn config(common: &Common, sizes: &Sizes) -> CampaignConfig {
    CampaignConfig {
        world: common.world.clone(),
        rng_seed: common.rng_seed,
        n_valid: sizes.n_valid,
        budget: sizes.budget,
        per_node: sizes.per_node,
        ..CampaignConfig::default()
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn load_profile(name: &str) -> Result<WalletProfile> {
    WalletProfile::load(name)
        .with_context(|| format!("usage: unknown profile `{name}`; known: {}", WalletProfile::known_names().join(", ")))
}

fn read_seed_chain(path: &Path) -> Result<Vec<Seed>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).context("seed file is not JSON")?;
    Ok(if value.is_array() {
        serde_json::from_value(value).context("invalid seed array")?
    } else {
        vec![serde_json::from_value(value).context("invalid seed")?]
    })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Corpus { common, sizes } => {
            let cfg = config(&common, &sizes);
            let world = load_world(cfg.world.as_deref())?;
            let corpus = build_corpus(&world, &cfg)?;
            let path = write(&common.out, "corpus.json", &serde_json::to_string_pretty(&corpus)?)?;
            let st = corpus.stats();
            println!("{} seeds ({} parents, {} mutants) -> {}", st.total, st.parents, st.mutants, path.display());
        }
        Command::Crawl { common, profile } => {
            load_profile(&profile)?;
            let (_, graph) = crawl_bundled_ui()?;
            write(&common.out, "ui-graph.json", &serde_json::to_string_pretty(&graph)?)?;
            let dot = write(&common.out, "ui-graph.dot", &graph.to_dot())?;
            println!("{} nodes, {} edges -> {}", graph.nodes.len(), graph.edges.len(), dot.display());
        }
        Command::Fuzz { common, sizes, profile, seed, jobs, tolerance } => {
            for p in &profile {
                load_profile(p)?;
            }
            let cfg = CampaignConfig {
                profiles: profile,
                corpus: seed,
                jobs,
                verify: VerifyConfig { tolerance },
                ..config(&common, &sizes)
            };
            let out = run_campaign(&cfg)?;
            write(&common.out, "report.json", &out.report.to_json())?;
            write(&common.out, "report.md", &render_markdown(&out.report))?;
            write(&common.out, "timing.json", &serde_json::to_string_pretty(&out.timing)?)?;
            print!("{}", render_markdown(&out.report));
            let bad = out.report.unexpected_findings();
            if !bad.is_empty() {
                eprintln!("findings on profiles expected to be clean: {}", bad.join(", "));
                return Ok(EXIT_FINDINGS);
            }
        }
        Command::Replay { common, seed, profile } => {
            let profile = load_profile(&profile)?;
            let chain = read_seed_chain(&seed)?;
            let world = load_world(common.world.as_deref())?;
            let Some(trace) = replay(&world, &chain, &profile, &VerifyConfig::default()) else {
                bail!("seed file {} holds no seed", seed.display());
            };
            println!("{trace}");
        }
        Command::Report { common, report } => {
            let path = report.unwrap_or_else(|| common.out.join("report.json"));
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let mut rep: CampaignReport = serde_json::from_str(&text).context("invalid report")?;
            let derived = rep.derived_matrix();
            if derived != rep.matrix {
                eprintln!("matrix in {} disagrees with its findings; showing the recomputed one", path.display());
                rep.matrix = derived;
            }
            print!("{}", render_markdown(&rep));
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
