use serde_json::Value;

use super::{alerted, extract_text, Oracle, OracleVerdict, SeedRef, Submission};
use crate::chain::{format_units, Address, ChainWorld, ExecutionOutcome, Status};
use crate::codec::eip712::typecast_address;
use crate::codec::parse_eip712;
use crate::harness::{asset_display, RenderedScreen, SIMULATION_SCREEN};
use crate::inspect::{inspect_message, inspect_transaction, ParseMode};
use crate::seeds::{ground_truth, MessagePayload, Seed, SeedBody, TransactionSeed};

fn verdict(
    oracle: Oracle,
    seed: &Seed,
    kind: &str,
    expectation: String,
    observed: String,
    violated: bool,
    screen: &RenderedScreen,
) -> OracleVerdict {
    OracleVerdict {
        oracle,
        kind: kind.to_string(),
        expectation,
        observed,
        violated,
        screen_evidence: screen.clone(),
        seed_ref: SeedRef::of(seed),
    }
}

fn last_screen(screens: &[RenderedScreen]) -> RenderedScreen {
    screens.last().cloned().unwrap_or_else(|| RenderedScreen::unchanged("none"))
}

// ---------------------------------------------------------------------------
// Alert reliability

/// Non-benign requests must raise an alert keyword or leave the UI
/// unchanged. A format mutant must be treated like its parent.
pub fn oracle_alert(world: &ChainWorld, sub: &Submission<'_>) -> Vec<OracleVerdict> {
    let seed = sub.seed;
    let shown = alerted(sub.screens);
    let evidence = last_screen(sub.screens);
    let observed = if shown { "alert shown" } else { "no alert" }.to_string();
    let v = |kind: &str, expectation: String| {
        verdict(Oracle::AlertReliability, seed, kind, expectation, observed.clone(), !shown, &evidence)
    };
    if seed.mutation.as_ref().is_some_and(|m| m.semantics_preserving) && sub.parent_alerted == Some(true) {
        return vec![v("formatMutant", "alert, as for the equivalent parent request".into())];
    }
    let detections = match &seed.body {
        SeedBody::Transaction(t) => inspect_transaction(world, t, ParseMode::Normalize).detections,
        SeedBody::Message(m) => inspect_message(world, m).detections,
        SeedBody::Interaction(_) => return Vec::new(),
    };
    let mut out: Vec<OracleVerdict> = Vec::new();
    for d in detections.iter().filter(|d| d.non_benign()) {
        let Some(kind) = d.reason_kind() else { continue };
        if !out.iter().any(|o| o.kind == kind) {
            out.push(v(kind, format!("alert for {}", d.describe())));
        }
    }
    if sub.session_after.connected_network != sub.session_before.connected_network {
        out.push(v(
            "environmentSwitch",
            format!(
                "alert when the session moves from network {} to {}",
                sub.session_before.connected_network, sub.session_after.connected_network
            ),
        ));
    }
    if out.is_empty() {
        out.push(verdict(
            Oracle::AlertReliability,
            seed,
            "benign",
            "no alert required".into(),
            observed.clone(),
            false,
            &evidence,
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Simulator accuracy

/// What a simulation screen claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimView {
    Unavailable,
    Fail,
    /// `(symbol, signed amount)` pairs, sorted.
    Deltas(Vec<(String, String)>),
}

/// Reads a simulation screen by keyword: `fail` predicts a revert, `+`/`-`
/// or `receive`/`send` prefixes give deltas.
pub fn parse_simulation(lines: &[String]) -> Result<SimView, String> {
    let lower: Vec<String> = lines.iter().map(|l| l.to_lowercase()).collect();
    if lower.iter().any(|l| l.contains("unavailable")) {
        return Ok(SimView::Unavailable);
    }
    if lower.iter().any(|l| l.contains("fail")) {
        return Ok(SimView::Fail);
    }
    let mut deltas = Vec::new();
    for (line, low) in lines.iter().zip(&lower) {
        if low.contains("no balance change") {
            continue;
        }
        let t = line.trim();
        let (sign, rest) = if let Some(r) = t.strip_prefix('+') {
            ('+', r)
        } else if let Some(r) = t.strip_prefix('-') {
            ('-', r)
        } else if low.starts_with("receive ") {
            ('+', &t["receive ".len()..])
        } else if low.starts_with("send ") {
            ('-', &t["send ".len()..])
        } else {
            return Err(line.clone());
        };
        let mut parts = rest.split_whitespace();
        let (Some(num), Some(sym), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(line.clone());
        };
        if num.is_empty() || !num.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
            return Err(line.clone());
        }
        deltas.push((sym.to_string(), format!("{sign}{num}")));
    }
    deltas.sort();
    Ok(SimView::Deltas(deltas))
}

fn outcome_view(world: &ChainWorld, tx: &TransactionSeed, o: &ExecutionOutcome) -> SimView {
    if let Status::Revert(_) = o.status {
        return SimView::Fail;
    }
    let mut deltas: Vec<(String, String)> = o
        .deltas_for(&tx.from)
        .into_iter()
        .filter(|d| !d.amount.is_zero())
        .map(|d| {
            let (sym, dec) = asset_display(world, tx.chain_id, &d.asset);
            (sym, d.amount.format_units(dec))
        })
        .collect();
    deltas.sort();
    SimView::Deltas(deltas)
}

fn amounts_close(a: &str, b: &str, tolerance: f64) -> bool {
    if a == b {
        return true;
    }
    if tolerance <= 0.0 || a.chars().next() != b.chars().next() {
        return false;
    }
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => (x - y).abs() <= tolerance * x.abs().max(y.abs()),
        _ => false,
    }
}

fn views_agree(a: &SimView, b: &SimView, tolerance: f64) -> bool {
    match (a, b) {
        (SimView::Deltas(x), SimView::Deltas(y)) => {
            x.len() == y.len()
                && x.iter().zip(y).all(|((sa, aa), (sb, ab))| sa == sb && amounts_close(aa, ab, tolerance))
        }
        _ => a == b,
    }
}

fn describe_view(v: &SimView) -> String {
    match v {
        SimView::Unavailable => "unavailable".into(),
        SimView::Fail => "revert".into(),
        SimView::Deltas(d) if d.is_empty() => "no balance changes".into(),
        SimView::Deltas(d) => d.iter().map(|(s, a)| format!("{a} {s}")).collect::<Vec<_>>().join(", "),
    }
}

/// Compares the displayed simulation with the block the transaction
/// actually lands in. A mismatch the single-transaction replay under the
/// true environment reproduces comes from the missing block context;
/// otherwise the simulator's guessed environment is at fault.
pub fn oracle_simulator(
    world: &ChainWorld,
    seed: &Seed,
    tx: &TransactionSeed,
    screens: &[RenderedScreen],
    tolerance: f64,
) -> Vec<OracleVerdict> {
    let Some(sim) = screens.iter().find(|s| s.screen_id == SIMULATION_SCREEN) else { return Vec::new() };
    let v = |kind: &str, expectation: String, observed: String, violated: bool| {
        verdict(Oracle::SimulatorAccuracy, seed, kind, expectation, observed, violated, sim)
    };
    let lines = extract_text(sim);
    let shown = match parse_simulation(&lines) {
        Ok(s) => s,
        Err(line) => return vec![v("unparseableSimulation", "parseable simulation display".into(), line, true)],
    };
    if shown == SimView::Unavailable {
        return vec![v("simulationUnavailable", "any outcome".into(), "unavailable".into(), false)];
    }
    let truth = match ground_truth(world, tx) {
        Ok(Some(o)) => outcome_view(world, tx, &o),
        _ => return vec![v("noGroundTruth", "any outcome".into(), describe_view(&shown), false)],
    };
    let expectation = describe_view(&truth);
    if views_agree(&shown, &truth, tolerance) {
        return vec![v("simulationAgrees", expectation, describe_view(&shown), false)];
    }
    if alerted(screens) {
        return vec![v("disclosedByAlert", expectation, describe_view(&shown), false)];
    }
    let single = world.network(tx.chain_id).ok().and_then(|net| {
        let env = net.block.for_tx(&tx.to_transaction());
        world.clone().execute_transaction(tx.chain_id, &env, &tx.to_transaction()).ok()
    });
    let kind = match single {
        Some(o) if views_agree(&outcome_view(world, tx, &o), &shown, tolerance) => "blockContext",
        _ => "envDefault",
    };
    vec![v(kind, expectation, describe_view(&shown), true)]
}

// ---------------------------------------------------------------------------
// UI correctness and clarity

const ADDRESS_LABELS: [&str; 5] = ["From: ", "To: ", "Recipient: ", "Spender: ", "Contract: "];

fn is_canonical_address(s: &str) -> bool {
    let s = s.trim();
    s.len() == 42 && s.starts_with("0x") && s[2..].bytes().all(|b| b.is_ascii_hexdigit())
}

fn unclear(line: &str) -> Option<String> {
    if line.chars().any(|c| c.is_control() || c == '\u{fffd}') {
        return Some(format!("unreadable characters in {:?}", line));
    }
    let t = line.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Some("raw JSON instead of fields".into());
    }
    for label in ADDRESS_LABELS {
        if let Some(v) = line.strip_prefix(label) {
            if !is_canonical_address(v) {
                return Some(format!("{}is not a hex address: {v}", label));
            }
        }
    }
    None
}

fn typed_chain_id(seed: &Seed) -> bool {
    match &seed.body {
        SeedBody::Message(m) => match &m.payload {
            MessagePayload::TypedData { json } => {
                parse_eip712(json).is_ok_and(|(p, _)| p.domain.chain_id_raw.is_some())
            }
            _ => false,
        },
        _ => false,
    }
}

/// Displayed names, recipients and token metadata must match the chain;
/// every screen must be readable and show the important fields.
pub fn oracle_ui(world: &ChainWorld, sub: &Submission<'_>) -> Vec<OracleVerdict> {
    let seed = sub.seed;
    if let SeedBody::Message(m) = &seed.body {
        if matches!(m.payload, MessagePayload::Hash { .. } | MessagePayload::Personal(_)) {
            return Vec::new();
        }
    }
    let mut out: Vec<OracleVerdict> = Vec::new();
    let mut push = |kind: &str, expectation: String, observed: String, screen: &RenderedScreen| {
        if !out.iter().any(|o| o.kind == kind && o.observed == observed) {
            out.push(verdict(Oracle::UiCorrectnessClarity, seed, kind, expectation, observed, true, screen));
        }
    };
    let needs_chain_id = typed_chain_id(seed);
    for screen in sub.screens.iter().filter(|s| s.changed_from_previous) {
        let lines = extract_text(screen);
        for l in &lines {
            if let Some(problem) = unclear(l) {
                push("unreadableOrMissingText", "readable key-value fields".into(), problem, screen);
            }
        }
        if needs_chain_id && !lines.iter().any(|l| l.starts_with("Chain ID: ")) {
            push(
                "unreadableOrMissingText",
                "chain id of the typed-data domain on screen".into(),
                "no Chain ID line".into(),
                screen,
            );
        }
        if let SeedBody::Interaction(i) = &seed.body {
            let input = i.input_step().and_then(|s| s.data.clone()).unwrap_or_default();
            for (kind, expectation, observed) in interaction_checks(world, sub, &input, &lines) {
                push(kind, expectation, observed, screen);
            }
        }
    }
    if out.is_empty() {
        out.push(verdict(
            Oracle::UiCorrectnessClarity,
            seed,
            "consistent",
            "screens match chain records".into(),
            "consistent".into(),
            false,
            &last_screen(sub.screens),
        ));
    }
    out
}

fn interaction_checks(
    world: &ChainWorld,
    sub: &Submission<'_>,
    input: &str,
    lines: &[String],
) -> Vec<(&'static str, String, String)> {
    let mut out = Vec::new();
    let net_id = sub.session_before.connected_network;
    let Ok(net) = world.network(net_id) else { return out };
    let typed = input.trim();
    for l in lines {
        if let Some(shown) = l.strip_prefix("Recipient: ") {
            let Some(shown_addr) = typecast_address(&Value::String(shown.to_string())) else { continue };
            let expected = if typed.to_ascii_lowercase().ends_with(".eth") {
                world.resolve_ens(net_id, typed)
            } else {
                typecast_address(&Value::String(typed.to_string()))
            };
            if expected != Some(shown_addr) {
                let exp = expected.map(|a| a.to_string()).unwrap_or_else(|| "no resolution".into());
                out.push((
                    "ensResolution",
                    format!("recipient {exp} for input {typed:?}"),
                    format!("recipient {shown_addr}"),
                ));
            }
        }
    }
    let field = |label: &str| lines.iter().find_map(|l| l.strip_prefix(label).map(str::to_string));
    if field("Decimals: ").is_some() {
        let token = field("Token: ").and_then(|t| t.parse::<Address>().ok()).and_then(|a| net.tokens.get(&a));
        let Some(token) = token else {
            out.push(("tokenMetadata", "detail of a listed token".into(), "unknown token".into()));
            return out;
        };
        let raw = token.balance_of(&sub.session_before.account());
        let expected = [
            ("Symbol: ", token.symbol.clone()),
            ("Decimals: ", token.decimals.to_string()),
            ("Balance: ", format!("{} {}", format_units(raw, token.decimals as u32), token.symbol)),
        ];
        for (label, want) in expected {
            let got = field(label).unwrap_or_default();
            if got != want {
                out.push(("tokenMetadata", format!("{label}{want}"), format!("{label}{got}")));
            }
        }
        return out;
    }
    for l in lines {
        let Some(rest) = l.strip_prefix("Token: ") else { continue };
        let mut words = rest.split_whitespace();
        let Some(sym) = words.next() else { continue };
        match words.find_map(|w| w.parse::<Address>().ok()) {
            Some(a) => {
                if net.tokens.get(&a).map(|t| t.symbol.as_str()) != Some(sym) {
                    out.push(("tokenMetadata", format!("{a} listed under its on-chain symbol"), l.clone()));
                }
            }
            None => {
                let candidates = net.tokens_by_symbol(sym);
                let unambiguous = candidates.len() == 1 && world.is_trusted_token(&candidates[0].address);
                if !unambiguous {
                    out.push((
                        "tokenMetadata",
                        format!("contract address beside {sym}, which is ambiguous or untrusted"),
                        l.clone(),
                    ));
                }
            }
        }
    }
    out
}
