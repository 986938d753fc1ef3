//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails the
//! test if any criterion fails. Run with `--nocapture` to see the lines.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use wallet_fuzz::campaign::{build_corpus, load_world, run_campaign, submit_and_verify, CampaignConfig};
use wallet_fuzz::chain::{Address, Amount, ChainWorld, NetworkId, Transaction, U256};
use wallet_fuzz::codec::abi::AbiValue;
use wallet_fuzz::codec::{approval_semantics, decode_call, encode_call, signing_method_for_name, SigningMethod};
use wallet_fuzz::harness::{MockWallet, WalletProfile, SIMULATION_SCREEN};
use wallet_fuzz::inspect::{inspect_message, Detection};
use wallet_fuzz::mutator::{mutate, normalize_payload};
use wallet_fuzz::seeds::ui::{generate_interactions, DataType, UiFixture};
use wallet_fuzz::seeds::{
    attacker_addresses, bundled_scam_catalog, ground_truth, InteractionSeed, Seed, SeedBody, SeedOrigin, Step,
    StepAction, TransactionSeed,
};
use wallet_fuzz::verifier::{extract_text, AttackVectorFinding, VerifyConfig, VECTORS};

/// Wall-clock budget for the full injection campaign.
const CAMPAIGN_BUDGET: Duration = Duration::from_secs(120);
/// Minimum number of mutants the mutation property is checked over.
const MIN_MUTANTS: usize = 1000;
/// Absolute tolerance on dollar amounts derived from wei and the price feed.
const USD_TOLERANCE: f64 = 1e-9;
/// Relative tolerance of the simulator oracle; exact comparison.
const SIM_TOLERANCE: f64 = 0.0;

const USER: &str = "0x5a0b54d5dc17e0aadc383d2db43b0a0d3e029c4c";
const GAS_BRANCH: &str = "0xf3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3";
const REWARD_POOL: &str = "0xf4f4f4f4f4f4f4f4f4f4f4f4f4f4f4f4f4f4f4f4";
const FRONT_RUNNER: &str = "0xf700000000000000000000000000000000000001";
const VICTIM: &str = "0x2000000000000000000000000000000000000001";
const USDT: &str = "0xaa00000000000000000000000000000000000001";
const APES: &str = "0xbc00000000000000000000000000000000000001";
const SPENDER: &str = "0xbad0000000000000000000000000000000000001";
const MASKED_NAME: &str = "0x11e4857bb9993a50c685a79afad4e6f65d518dda";
const MASKED_TARGET: &str = "0xd77a5b5e6c3c1f1e2d0a9b8c7d6e5f4a3b2c1d0e";

const APPROVAL_RULES: [&str; 7] = [
    "approve",
    "increase-allowance",
    "set-approval-for-all",
    "permit",
    "permit2-single",
    "permit2-batch",
    "permit-for-all",
];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn world() -> ChainWorld {
    load_world(None).unwrap()
}

fn addr(s: &str) -> Address {
    s.parse().unwrap()
}

fn gwei(n: u64) -> Amount {
    Amount::from_u64(n * 1_000_000_000)
}

fn tx_seed(from: &str, to: &str, input: String, context: Vec<Transaction>) -> TransactionSeed {
    TransactionSeed {
        from: addr(from),
        to: addr(to),
        value: Amount::ZERO,
        inputdata: input,
        gas_price: gwei(30),
        chain_id: NetworkId::TESTNET,
        signing_method: SigningMethod::EthSendTransactions,
        context,
    }
}

/// Submits one seed to `profile` and returns the classified findings along
/// with the simulation lines the wallet showed.
fn submit(world: &ChainWorld, profile: WalletProfile, seed: &Seed) -> (Vec<AttackVectorFinding>, Vec<String>) {
    let ui = UiFixture::bundled();
    let account = ui.account;
    let mut wallet = MockWallet::new(profile, world.clone(), ui);
    let classifier = wallet_fuzz::verifier::Classifier::bundled();
    let cfg = VerifyConfig { tolerance: SIM_TOLERANCE };
    let rec = submit_and_verify(&mut wallet, world, account, seed, None, &classifier, &cfg);
    assert!(rec.crash.is_none(), "wallet crashed: {:?}", rec.crash);
    let sim = rec.screens.iter().filter(|s| s.screen_id == SIMULATION_SCREEN).flat_map(extract_text).collect();
    (rec.findings, sim)
}

fn vectors(findings: &[AttackVectorFinding]) -> BTreeSet<String> {
    findings.iter().map(|f| f.vector.clone()).collect()
}

fn only(v: &str) -> BTreeSet<String> {
    BTreeSet::from([v.to_string()])
}

fn without_rules(name: &str, rules: &[&str]) -> WalletProfile {
    let mut p = WalletProfile::hardened();
    p.name = name.into();
    p.expect_clean = false;
    p.alert_rules.retain(|k, _| !rules.contains(&k.as_str()));
    p
}

fn c1_injection_suite() -> Outcome {
    let start = Instant::now();
    let out = run_campaign(&CampaignConfig { jobs: 4, ..CampaignConfig::default() }).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let row = |name: &str| -> BTreeSet<String> {
        let p = out.report.profiles.iter().find(|p| p.name == name).expect("profile in report");
        vectors(&p.findings)
    };
    for v in VECTORS {
        let name = format!("inject-{}", v.to_lowercase());
        let got = row(&name);
        ensure(got == only(v), format!("{name} flagged {got:?}"))?;
    }
    let hardened = &out.report.profiles.iter().find(|p| p.name == "hardened").unwrap().findings;
    ensure(hardened.is_empty(), format!("hardened has {} findings", hardened.len()))?;
    ensure(elapsed < CAMPAIGN_BUDGET, format!("campaign took {elapsed:?}"))?;
    Ok(format!(
        "13/13 injected vectors isolated, hardened clean, {} submissions in {:.2?}",
        out.timing.submissions, elapsed
    ))
}

fn c2_gasprice_branch() -> Outcome {
    let w = world();
    let profile = WalletProfile::load("inject-v2").unwrap();
    ensure(profile.sim_gas_price_default == Amount::ZERO, "simulator gas price default is not zero")?;
    let tx = tx_seed(USER, GAS_BRANCH, String::new(), Vec::new());
    let truth = ground_truth(&w, &tx).unwrap().expect("known network");
    let deltas = truth.deltas_for(&tx.from);
    ensure(truth.is_success(), "ground truth reverted")?;
    ensure(
        !deltas.is_empty() && deltas.iter().all(|d| d.amount.signum() < 0),
        format!("caller deltas at 30 gwei are not negative: {deltas:?}"),
    )?;
    let seed = Seed::new("gasprice-branch", SeedOrigin::Mempool, SeedBody::Transaction(tx));
    let (findings, sim) = submit(&w, profile, &seed);
    ensure(sim.iter().any(|l| l.starts_with("+100 ")), format!("simulation showed {sim:?}"))?;
    ensure(vectors(&findings) == only("V2"), format!("classified as {:?}", vectors(&findings)))?;
    Ok(format!("simulation {:?}, ground truth negative, classified V2", sim))
}

fn c3_front_running() -> Outcome {
    let w = world();
    let net = w.network(NetworkId::TESTNET).unwrap();
    let victim = Transaction {
        from: addr(VICTIM),
        to: addr(REWARD_POOL),
        value: Amount::ZERO,
        input: String::new(),
        gas_price: gwei(30),
    };
    let front = Transaction {
        from: addr(FRONT_RUNNER),
        to: addr(REWARD_POOL),
        value: Amount::ZERO,
        input: String::new(),
        gas_price: gwei(50),
    };

    // Brute force: run the two transactions in both orders on fresh copies.
    let mut victim_deltas = Vec::new();
    for order in [[&victim, &front], [&front, &victim]] {
        let mut copy = w.clone();
        let mut mine = None;
        for t in order {
            let o = copy.execute_transaction(NetworkId::TESTNET, &net.block.for_tx(t), t).unwrap();
            if t == &victim {
                mine = Some(o);
            }
        }
        let o = mine.unwrap();
        let mut d: Vec<_> = o.deltas_for(&victim.from).into_iter().cloned().collect();
        d.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        victim_deltas.push(d);
    }
    let (alone_first, after_front) = (&victim_deltas[0], &victim_deltas[1]);
    ensure(alone_first != after_front, "both orderings agree, no front-running effect")?;

    let seed_tx = tx_seed(VICTIM, REWARD_POOL, String::new(), vec![front.clone()]);
    let mut block: Vec<_> =
        ground_truth(&w, &seed_tx).unwrap().unwrap().deltas_for(&victim.from).into_iter().cloned().collect();
    block.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    ensure(&block == after_front, "block execution does not match the front-run ordering")?;

    let seed = Seed::new("two-tx-block", SeedOrigin::Mempool, SeedBody::Transaction(seed_tx));
    let (findings, sim) = submit(&w, WalletProfile::load("inject-v1").unwrap(), &seed);
    ensure(sim.iter().any(|l| l.starts_with('+')), format!("simulation showed {sim:?}"))?;
    ensure(vectors(&findings) == only("V1"), format!("classified as {:?}", vectors(&findings)))?;
    let (clean, _) = submit(&w, WalletProfile::hardened(), &seed);
    ensure(clean.is_empty(), "hardened flagged the two-transaction block")?;
    Ok(format!("orderings differ, block matches front-run order, simulation {sim:?}, classified V1"))
}

fn c4_signing_table() -> Outcome {
    let expected: [(&str, &[&str]); 6] = [
        ("hash string", &["eth_sign"]),
        ("text string", &["personal_sign"]),
        ("EIP-191", &["personal_sign", "eth_sign"]),
        ("EIP-712", &["eth_signTypedData_v4"]),
        ("EIP-4361", &["eth_signTypedData_v4"]),
        ("transaction", &["eth_sendTransactions"]),
    ];
    for (format, methods) in expected {
        let got: BTreeSet<&str> =
            signing_method_for_name(format).map_err(|e| e.to_string())?.iter().map(|m| m.rpc_name()).collect();
        let want: BTreeSet<&str> = methods.iter().copied().collect();
        ensure(got == want, format!("{format}: {got:?} != {want:?}"))?;
    }
    let err = signing_method_for_name("EIP-9999").err().map(|e| e.to_string()).unwrap_or_default();
    ensure(err.contains("unknown-format"), format!("unknown format error was {err:?}"))?;
    Ok("6/6 rows, EIP-191 maps to {personal_sign, eth_sign}".into())
}

fn c5_mutation_semantics() -> Outcome {
    let w = world();
    let catalog = bundled_scam_catalog(NetworkId::TESTNET).unwrap();
    let attackers = attacker_addresses(&w, &catalog);
    let corpus = build_corpus(&w, &CampaignConfig::default()).map_err(|e| e.to_string())?;
    let parents: Vec<&Seed> = corpus.seeds.iter().filter(|s| s.parent.is_none()).collect();
    let (mut total, mut preserving, mut content) = (0usize, 0usize, 0usize);
    let mut round = 0u64;
    while total < MIN_MUTANTS {
        for p in &parents {
            let mut rng = wallet_fuzz::campaign::seed_rng(round, &p.id);
            let parent_norm = normalize_payload(&p.body);
            for m in mutate(p, &attackers, usize::MAX, &mut rng) {
                let rec = m.mutation.as_ref().expect("mutants carry a record");
                total += 1;
                if rec.semantics_preserving {
                    preserving += 1;
                    ensure(
                        normalize_payload(&m.body) == parent_norm,
                        format!("{} ({}) flagged preserving but normalizes differently", m.id, rec.strategy),
                    )?;
                }
                if !rec.strategy.is_format() {
                    content += 1;
                    ensure(!rec.semantics_preserving, format!("content mutant {} flagged preserving", m.id))?;
                }
            }
        }
        round += 1;
    }
    ensure(preserving > 0 && content > 0, "property held vacuously")?;
    Ok(format!("{total} mutants: {preserving} preserving all normalize-equal, 0/{content} content mutants preserving"))
}

fn c6_ui_dag() -> Outcome {
    let w = world();
    let (_, graph) = wallet_fuzz::campaign::crawl_bundled_ui().map_err(|e| e.to_string())?;
    ensure(graph.is_acyclic(), "crawled graph has a cycle")?;
    // Two screens have an Amount input; take the one the Bridge click reveals.
    let amount = graph
        .nodes
        .iter()
        .find(|n| n.label == "Amount" && graph.parents(&n.id).iter().any(|p| graph.node(p).unwrap().label == "Bridge"))
        .ok_or("no Amount node below Bridge")?;
    let path = graph.backtrack(&amount.id).ok_or("Amount node unreachable")?;
    let labels: Vec<&str> = path[1..].iter().map(|id| graph.node(id).unwrap().label.as_str()).collect();
    ensure(labels == ["Swap", "Bridge", "Amount"], format!("backtrack gave {labels:?}"))?;
    let mut rng = wallet_fuzz::campaign::seed_rng(0, "ui");
    let seeds = generate_interactions(&graph, &w, NetworkId::TESTNET, 3, &mut rng);
    let inputs: Vec<&str> = seeds
        .iter()
        .filter(|s| s.input_step().map(|st| st.path.last() == Some(&amount.id)).unwrap_or(false))
        .filter(|s| s.data_type == DataType::IntegerAmount)
        .filter_map(|s| s.input_step().and_then(|st| st.data.as_deref()))
        .collect();
    ensure(!inputs.is_empty(), "no integer-typed interaction for the Amount node")?;
    ensure(inputs.iter().all(|v| v.parse::<u128>().is_ok()), format!("non-integer values {inputs:?}"))?;
    Ok(format!("backtrack Swap→Bridge→Amount, {} integer inputs", inputs.len()))
}

fn c7_approval_equivalence() -> Outcome {
    let approve =
        encode_call("approve(address,uint256)", &[AbiValue::Address(addr(SPENDER)), AbiValue::Uint(U256::MAX)]);
    let for_all =
        encode_call("setApprovalForAll(address,bool)", &[AbiValue::Address(addr(SPENDER)), AbiValue::Bool(true)]);
    for (label, data) in [("approve(max)", &approve), ("setApprovalForAll", &for_all)] {
        let call = decode_call(data).map_err(|e| e.to_string())?;
        let sem = approval_semantics(&call).ok_or(format!("{label}: no approval semantics"))?;
        ensure(sem.unlimited, format!("{label}: unlimited=false"))?;
    }

    let w = world();
    let others: Vec<&str> = APPROVAL_RULES.iter().copied().filter(|r| *r != "set-approval-for-all").collect();
    let profile = without_rules("set-approval-only", &others);
    let hex = |d: &[u8]| format!("0x{}", hex::encode(d));
    let approve_seed = Seed::new(
        "approve-max",
        SeedOrigin::Catalog,
        SeedBody::Transaction(tx_seed(USER, USDT, hex(&approve), Vec::new())),
    );
    let (findings, _) = submit(&w, profile.clone(), &approve_seed);
    ensure(vectors(&findings) == only("V5"), format!("approve(max) classified as {:?}", vectors(&findings)))?;
    let for_all_seed = Seed::new(
        "set-approval-for-all",
        SeedOrigin::Catalog,
        SeedBody::Transaction(tx_seed(USER, APES, hex(&for_all), Vec::new())),
    );
    let (findings, _) = submit(&w, profile, &for_all_seed);
    ensure(findings.is_empty(), format!("setApprovalForAll flagged {:?}", vectors(&findings)))?;
    let (clean, _) = submit(&w, WalletProfile::hardened(), &approve_seed);
    ensure(clean.is_empty(), "hardened flagged approve(max)")?;
    Ok("both unlimited; profile alerting only on setApprovalForAll flagged V5 on approve(max)".into())
}

fn c8_listing_threshold() -> Outcome {
    let w = world();
    let catalog = bundled_scam_catalog(NetworkId::TESTNET).unwrap();
    let (entry, listing, detection) = catalog
        .iter()
        .find_map(|e| match &e.seed {
            SeedBody::Message(m) => {
                let ins = inspect_message(&w, m);
                let l = ins.listing.clone()?;
                let d = ins.detections.into_iter().find(|d| matches!(d, Detection::NftListing { .. }))?;
                ((l.revenue_usd - 0.05).abs() < USD_TOLERANCE).then_some((e, l, d))
            }
            _ => None,
        })
        .ok_or("no catalog listing with $0.05 revenue")?;
    ensure((listing.floor_usd - 100.0).abs() < USD_TOLERANCE, format!("floor ${}", listing.floor_usd))?;
    ensure(detection.non_benign(), "listing marked benign")?;
    let profile = without_rules("no-listing-alerts", &["nft-listing-single", "nft-listing-multi"]);
    let seed = Seed::new("cheap-listing", SeedOrigin::Catalog, entry.seed.clone());
    let (findings, _) = submit(&w, profile, &seed);
    ensure(vectors(&findings) == only("V6"), format!("classified as {:?}", vectors(&findings)))?;
    let (clean, _) = submit(&w, WalletProfile::hardened(), &seed);
    ensure(clean.is_empty(), "hardened flagged the listing")?;
    Ok(format!("revenue ${:.2} vs floor ${:.0}: non-benign, classified V6", listing.revenue_usd, listing.floor_usd))
}

fn c9_determinism() -> Outcome {
    let cfg = CampaignConfig { rng_seed: 42, jobs: 3, ..CampaignConfig::default() };
    let a = run_campaign(&cfg).map_err(|e| e.to_string())?.report.to_json();
    let b = run_campaign(&CampaignConfig { jobs: 1, ..cfg }).map_err(|e| e.to_string())?.report.to_json();
    ensure(a.as_bytes() == b.as_bytes(), "reports differ")?;
    Ok(format!("two runs with seed 42 gave identical {}-byte reports", a.len()))
}

fn c10_masked_ens() -> Outcome {
    let w = world();
    let path = |ids: &[&str]| ids.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let interaction = InteractionSeed {
        steps: vec![
            Step { path: path(&["send"]), action: StepAction::Click, data: None },
            Step { path: path(&["send", "send-recipient"]), action: StepAction::Input, data: Some(MASKED_NAME.into()) },
            Step { path: path(&["send", "send-next"]), action: StepAction::Click, data: None },
        ],
        expected_semantics: "send-recipient".into(),
        data_type: DataType::Address,
    };
    let seed = Seed::new("masked-ens", SeedOrigin::Crawl, SeedBody::Interaction(interaction));
    ensure(
        w.resolve_ens(NetworkId::TESTNET, &format!("{MASKED_NAME}.eth")) == Some(addr(MASKED_TARGET)),
        "fixture does not register the masked name",
    )?;
    for profile in ["inject-v12", "bitget-like"] {
        let (findings, _) = submit(&w, WalletProfile::load(profile).unwrap(), &seed);
        ensure(vectors(&findings).contains("V12"), format!("{profile} not flagged V12: {:?}", vectors(&findings)))?;
    }
    let (clean, _) = submit(&w, WalletProfile::hardened(), &seed);
    ensure(clean.is_empty(), format!("hardened flagged {:?}", vectors(&clean)))?;
    Ok("0x11e4… resolves to 0xd77… on auto-suggest profiles (V12), hardened clean".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("injection suite", c1_injection_suite),
        ("gas-price branch simulation", c2_gasprice_branch),
        ("front-running block", c3_front_running),
        ("signing method table", c4_signing_table),
        ("mutation semantics", c5_mutation_semantics),
        ("UI dependency graph", c6_ui_dag),
        ("approval equivalence", c7_approval_equivalence),
        ("listing threshold", c8_listing_threshold),
        ("determinism", c9_determinism),
        ("masked ENS name", c10_masked_ens),
    ];
    let mut failed = Vec::new();
    println!();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL {:>2} {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
