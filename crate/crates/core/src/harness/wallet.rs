//! In-process mock wallet driven by a [`WalletProfile`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::profile::{AlertLevel, DisplayMode, EnsMode, TokenSearchMode, WalletProfile};
use super::screen::RenderedScreen;
use crate::chain::{format_units, Address, Asset, BlockEnv, ChainWorld, ExecutionOutcome, NetworkId, Status, U256};
use crate::codec::abi::AbiValue;
use crate::codec::eip712::typecast_address;
use crate::codec::{field_role, DecodedChallenge, Eip4361Payload, Eip712Payload, FieldRole};
use crate::inspect::{inspect_message, inspect_transaction, Detection, ListingSummary};
use crate::seeds::ui::{ElementKind, FixtureNavigator, InteractionSeed, StepAction, UiFixture, UiNavigator};
use crate::seeds::{MessagePayload, MessageSeed, SeedBody, TransactionSeed, DEFAULT_CONNECTED_URI};

/// Screen id of the simulation result.
pub const SIMULATION_SCREEN: &str = "simulation";
pub const SIM_UNAVAILABLE: &str = "Simulation unavailable";
pub const NO_BALANCE_CHANGES: &str = "No balance changes";
pub const WILL_FAIL: &str = "Transaction will fail";
/// Largest decimals value the token editor accepts.
pub const MAX_EDITABLE_DECIMALS: u8 = 36;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decimals: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WalletSession {
    pub connected_network: NetworkId,
    pub connected_uri: String,
    pub accounts: Vec<Address>,
    /// Display-only overrides; chain state never sees them.
    pub custom_token_metadata: BTreeMap<Address, TokenOverride>,
}

impl WalletSession {
    pub fn new(world: &ChainWorld, account: Address) -> Self {
        WalletSession {
            connected_network: world.default_network,
            connected_uri: DEFAULT_CONNECTED_URI.to_string(),
            accounts: vec![account],
            custom_token_metadata: BTreeMap::new(),
        }
    }

    /// The session a dapp has open when it submits `body`: messages carry
    /// their own connected network and URI.
    pub fn for_seed(world: &ChainWorld, account: Address, body: &SeedBody) -> Self {
        let mut s = Self::new(world, account);
        if let SeedBody::Message(m) = body {
            s.connected_network = m.connected_network;
            s.connected_uri = m.connected_uri.clone();
        }
        s
    }

    pub fn account(&self) -> Address {
        self.accounts.first().copied().unwrap_or(Address::ZERO)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("wallet-crashed: {0}")]
    WalletCrashed(String),
}

/// The boundary between the campaign and a wallet under test.
pub trait WalletAdapter {
    fn submit_transaction(
        &mut self,
        session: &mut WalletSession,
        tx: &TransactionSeed,
    ) -> Result<Vec<RenderedScreen>, HarnessError>;
    fn submit_message(
        &mut self,
        session: &mut WalletSession,
        msg: &MessageSeed,
    ) -> Result<Vec<RenderedScreen>, HarnessError>;
    fn submit_interaction(
        &mut self,
        session: &mut WalletSession,
        seed: &InteractionSeed,
    ) -> Result<Vec<RenderedScreen>, HarnessError>;
    fn reset(&mut self);
}

pub fn submit_seed(
    wallet: &mut dyn WalletAdapter,
    session: &mut WalletSession,
    body: &SeedBody,
) -> Result<Vec<RenderedScreen>, HarnessError> {
    match body {
        SeedBody::Transaction(t) => wallet.submit_transaction(session, t),
        SeedBody::Message(m) => wallet.submit_message(session, m),
        SeedBody::Interaction(i) => wallet.submit_interaction(session, i),
    }
}

/// Symbol and decimals a wallet shows for an asset of `network`.
pub fn asset_display(world: &ChainWorld, network: NetworkId, asset: &Asset) -> (String, u32) {
    let net = world.network(network).ok();
    match asset {
        Asset::Native => (net.map(|n| n.native_symbol.clone()).unwrap_or_else(|| "ETH".into()), 18),
        Asset::Token(a) => net
            .and_then(|n| n.tokens.get(a))
            .map(|t| (t.symbol.clone(), t.decimals as u32))
            .unwrap_or_else(|| (a.short(), 0)),
        Asset::Nft(a) => net
            .and_then(|n| n.nfts.get(a))
            .map(|t| (if t.symbol.is_empty() { t.name.clone() } else { t.symbol.clone() }, 0))
            .unwrap_or_else(|| (a.short(), 0)),
    }
}

/// Simulation lines for `account`: a failure notice, one `+x SYM` line per
/// changed asset, or a no-change line.
pub fn outcome_lines(
    world: &ChainWorld,
    network: NetworkId,
    outcome: &ExecutionOutcome,
    account: &Address,
) -> Vec<String> {
    if let Status::Revert(reason) = &outcome.status {
        return vec![format!("{WILL_FAIL}: {reason}")];
    }
    let lines: Vec<String> = outcome
        .deltas_for(account)
        .into_iter()
        .filter(|d| !d.amount.is_zero())
        .map(|d| {
            let (sym, dec) = asset_display(world, network, &d.asset);
            format!("{} {sym}", d.amount.format_units(dec))
        })
        .collect();
    if lines.is_empty() {
        vec![NO_BALANCE_CHANGES.to_string()]
    } else {
        lines
    }
}

/// Control and replacement characters written as `\u{..}` escapes.
pub fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if c.is_control() || c == '\u{fffd}' {
            out.push_str(&format!("\\u{{{:04x}}}", c as u32));
        } else {
            out.push(c);
        }
    }
    out
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn abi_text(v: &AbiValue) -> String {
    match v {
        AbiValue::Address(a) => a.to_string(),
        AbiValue::Uint(x) => x.to_string(),
        AbiValue::Int(x) => format!("0x{x:x}"),
        AbiValue::Bool(b) => b.to_string(),
        AbiValue::FixedBytes(b) | AbiValue::Bytes(b) => format!("0x{}", hex::encode(b)),
        AbiValue::String(s) => s.clone(),
        AbiValue::Array(items) | AbiValue::Tuple(items) => {
            format!("[{}]", items.iter().map(abi_text).collect::<Vec<_>>().join(", "))
        }
    }
}

fn has_hex_prefix(s: &str) -> bool {
    s.starts_with("0x") || s.starts_with("0X")
}

enum Gate {
    Pass(Vec<String>),
    Blocked,
}

#[derive(Debug, Clone)]
pub struct MockWallet {
    pub profile: WalletProfile,
    world: ChainWorld,
    nav: FixtureNavigator,
    last_screen: String,
}

impl MockWallet {
    pub fn new(profile: WalletProfile, world: ChainWorld, ui: UiFixture) -> Self {
        let last_screen = ui.home.clone();
        MockWallet { profile, world, nav: FixtureNavigator::new(ui), last_screen }
    }

    pub fn world(&self) -> &ChainWorld {
        &self.world
    }

    fn show(&self, s: &str) -> String {
        if self.profile.type_aware_display {
            escape_text(s)
        } else {
            s.to_string()
        }
    }

    fn unchanged(&self) -> Vec<RenderedScreen> {
        vec![RenderedScreen::unchanged(self.last_screen.clone())]
    }

    fn finish(&mut self, screens: Vec<RenderedScreen>) -> Vec<RenderedScreen> {
        if let Some(s) = screens.last() {
            self.last_screen = s.screen_id.clone();
        }
        screens
    }

    fn network_name(&self, id: NetworkId) -> String {
        self.world.network(id).map(|n| n.name.clone()).unwrap_or_else(|_| id.to_string())
    }

    fn security(&self, detections: &[Detection]) -> Gate {
        let mut lines = Vec::new();
        for d in detections.iter().filter(|d| d.fires()) {
            match self.profile.level(d.rule()) {
                None => {}
                Some(AlertLevel::Block) => return Gate::Blocked,
                Some(AlertLevel::Alert) => lines.push(match d {
                    Detection::StateDependent { .. } => format!("Risk: {}", d.describe()),
                    _ => format!("Warning: {}", d.describe()),
                }),
                Some(AlertLevel::Notification) => lines.push(format!("Notice: {}", d.describe())),
                Some(AlertLevel::Identification) => lines.push(format!("Flagged: {}", d.rule())),
            }
        }
        Gate::Pass(lines)
    }

    /// The wallet's own simulation: a single transaction on a copy of the
    /// world, without pending transactions, under the profile's guessed
    /// gas price and coinbase.
    pub fn simulate(&self, tx: &TransactionSeed) -> Option<ExecutionOutcome> {
        let net = self.world.network(tx.chain_id).ok()?;
        let env = BlockEnv {
            gas_price: self.profile.sim_gas_price_default,
            coinbase: self.profile.sim_coinbase_default,
            ..net.block.clone()
        };
        let mut copy = self.world.clone();
        copy.execute_transaction(tx.chain_id, &env, &tx.to_transaction()).ok()
    }

    fn simulation_screen(&self, tx: &TransactionSeed, readable: bool, detections: &[Detection]) -> RenderedScreen {
        let mut s = RenderedScreen::new(SIMULATION_SCREEN);
        let guarded = self.profile.level("state-dependent-simulation").is_some()
            && detections.iter().any(|d| matches!(d, Detection::StateDependent { .. }));
        match (readable && !guarded).then(|| self.simulate(tx)).flatten() {
            Some(out) => s.lines(outcome_lines(&self.world, tx.chain_id, &out, &tx.from)),
            None => s.line(SIM_UNAVAILABLE),
        };
        s.build()
    }

    fn confirm_screen(
        &self,
        session: &WalletSession,
        tx: &TransactionSeed,
        call: Option<&crate::codec::DecodedCall>,
        detections: &[Detection],
    ) -> RenderedScreen {
        let native = self.world.network(tx.chain_id).map(|n| n.native_symbol.clone()).unwrap_or_else(|_| "ETH".into());
        let mut s = RenderedScreen::new("confirm");
        s.line(format!("From: {}", tx.from))
            .line(format!("To: {}", tx.to))
            .line(format!("Value: {} {native}", format_units(tx.value.0, 18)))
            .line(format!("Network: {}", self.network_name(session.connected_network)));
        let spender = detections.iter().find_map(|d| match d {
            Detection::Approval { spender, .. } => Some(*spender),
            _ => None,
        });
        match call.filter(|c| c.is_known()) {
            Some(c) => {
                s.line(format!("Function: {}", c.function_name.as_deref().unwrap_or_default()));
                for (i, a) in c.args.iter().enumerate() {
                    match &a.value {
                        AbiValue::Address(addr) if Some(*addr) == spender => s.line(format!("Spender: {addr}")),
                        v => s.line(format!("Argument {}: {}", i + 1, self.show(&abi_text(v)))),
                    };
                }
            }
            None if !tx.inputdata.is_empty() => {
                s.line(format!("Data: {}", self.show(&tx.inputdata)));
            }
            None => {}
        }
        s.button("Confirm", "confirm").button("Reject", "reject");
        s.build()
    }

    fn typed_lines(&self, p: &Eip712Payload, listing: Option<&ListingSummary>) -> Option<Vec<String>> {
        let mut out = Vec::new();
        let d = &p.domain;
        if let Some(n) = &d.name {
            out.push(format!("Domain: {}", self.show(n)));
        }
        if self.profile.displays(FieldRole::ChainId) {
            if let Some(raw) = &d.chain_id_raw {
                out.push(format!("Chain ID: {}", self.show(&value_text(raw))));
            }
        }
        if self.profile.displays(FieldRole::TokenAddress) {
            if let Some(vc) = d.verifying_contract {
                out.push(format!("Contract: {vc}"));
            }
        }
        out.push(format!("Type: {}", self.show(&p.primary_type)));
        for (path, ty, v) in p.leaves() {
            let role = field_role(&path);
            if role.is_some_and(|r| !self.profile.displays(r)) {
                continue;
            }
            let is_addr = ty == "address";
            let label = match role {
                Some(FieldRole::Sender) if is_addr => "From".to_string(),
                Some(FieldRole::Recipient) if is_addr => "To".to_string(),
                Some(FieldRole::TokenAddress) if is_addr => "Token".to_string(),
                Some(FieldRole::Value) => "Value".to_string(),
                Some(FieldRole::ChainId) => "Chain ID".to_string(),
                _ => path.clone(),
            };
            let value = if self.profile.type_aware_display {
                if is_addr && typecast_address(&v).is_none() {
                    return None;
                }
                escape_text(&value_text(&p.typecast(&ty, &v)))
            } else {
                value_text(&v)
            };
            out.push(format!("{label}: {value}"));
        }
        if let Some(l) = listing {
            out.push(format!("Listing: {} item(s) for {}", l.items.len(), l.price_text()));
            if self.profile.show_listing_items {
                for (c, id) in &l.items {
                    out.push(format!("Item: {c} #{id}"));
                }
            }
        }
        Some(out)
    }

    fn sign_in_lines(&self, p: &Eip4361Payload) -> Vec<String> {
        let mut out = vec![format!("Domain: {}", self.show(&p.domain))];
        out.push(match p.address {
            Some(a) => format!("Account: {a}"),
            None => format!("Account: {}", self.show(&p.address_raw)),
        });
        if !p.statement.is_empty() {
            out.push(format!("Statement: {}", self.show(&p.statement)));
        }
        out.push(format!("URI: {}", self.show(&p.uri)));
        if self.profile.displays(FieldRole::ChainId) {
            out.push(format!("Chain ID: {}", self.show(&p.chain_id_raw)));
        }
        out.push(format!("Nonce: {}", self.show(&p.nonce)));
        out
    }

    /// The typed-data document as received, minus fields the profile does
    /// not display. Untouched documents keep their exact text.
    fn raw_json_lines(&self, text: &str) -> Vec<String> {
        let Ok(mut doc) = serde_json::from_str::<Value>(text) else { return self.raw_lines(text) };
        let mut pruned = false;
        for (key, role) in [("chainId", FieldRole::ChainId), ("verifyingContract", FieldRole::TokenAddress)] {
            if self.profile.displays(role) {
                continue;
            }
            if let Some(domain) = doc.get_mut("domain").and_then(Value::as_object_mut) {
                pruned |= domain.remove(key).is_some();
            }
            if let Some(fields) = doc.pointer_mut("/types/EIP712Domain").and_then(Value::as_array_mut) {
                fields.retain(|f| f.get("name").and_then(Value::as_str) != Some(key));
            }
        }
        if let Some(m) = doc.get_mut("message") {
            pruned |= self.prune_fields(m);
        }
        if pruned {
            self.raw_lines(&doc.to_string())
        } else {
            self.raw_lines(text)
        }
    }

    fn prune_fields(&self, v: &mut Value) -> bool {
        let mut pruned = false;
        match v {
            Value::Object(obj) => {
                let before = obj.len();
                obj.retain(|k, _| field_role(k).is_none_or(|r| self.profile.displays(r)));
                pruned = obj.len() != before;
                for child in obj.values_mut() {
                    pruned |= self.prune_fields(child);
                }
            }
            Value::Array(items) => {
                for child in items {
                    pruned |= self.prune_fields(child);
                }
            }
            _ => {}
        }
        pruned
    }

    fn raw_lines(&self, text: &str) -> Vec<String> {
        text.lines().map(|l| self.show(l)).collect()
    }

    fn recipient_lines(&self, network: NetworkId, input: &str) -> Vec<String> {
        let ens_net = match self.profile.ens_mode {
            EnsMode::MainnetOnly => NetworkId::MAINNET,
            EnsMode::NetworkAware => network,
        };
        let t = input.trim();
        if t.to_ascii_lowercase().ends_with(".eth") {
            return match self.world.resolve_ens(ens_net, t) {
                Some(a) => vec![format!("Name: {}", self.show(t)), format!("Recipient: {a}")],
                None => vec![format!("Name not found: {}", self.show(t))],
            };
        }
        if self.profile.ens_auto_suggest {
            if let Some(a) = self.world.resolve_ens(ens_net, &format!("{t}.eth")) {
                return vec![format!("Suggested: {}.eth", self.show(t)), format!("Recipient: {a}")];
            }
        }
        if self.profile.type_aware_display {
            match typecast_address(&Value::String(t.to_string())) {
                Some(a) => vec![format!("Recipient: {a}")],
                None => vec!["Invalid address".to_string()],
            }
        } else {
            vec![format!("Recipient: {t}")]
        }
    }

    fn amount_text(&self, input: &str) -> String {
        if self.profile.type_aware_display {
            U256::from_dec_str(input.trim()).map(|x| x.to_string()).unwrap_or_else(|_| "Invalid amount".into())
        } else {
            input.to_string()
        }
    }

    fn display_symbol(session: &WalletSession, token: &crate::chain::TokenContract) -> String {
        session
            .custom_token_metadata
            .get(&token.address)
            .and_then(|o| o.symbol.clone())
            .unwrap_or_else(|| token.symbol.clone())
    }

    fn search_lines(&self, session: &WalletSession, query: &str) -> Vec<String> {
        let q = query.trim().to_lowercase();
        let Ok(net) = self.world.network(session.connected_network) else { return vec!["No tokens found".into()] };
        let lines: Vec<String> = net
            .tokens
            .values()
            .filter(|t| !q.is_empty() && t.symbol.to_lowercase().starts_with(&q))
            .map(|t| {
                let sym = self.show(&Self::display_symbol(session, t));
                match self.profile.token_search_mode {
                    TokenSearchMode::NameOnly => format!("Token: {sym}"),
                    TokenSearchMode::NameAndAddress => format!("Token: {sym} {}", t.address),
                }
            })
            .collect();
        if lines.is_empty() {
            vec!["No tokens found".into()]
        } else {
            lines
        }
    }

    /// The token the edit screen works on: the most recently listed trusted
    /// token of the session network.
    pub fn edited_token(&self, network: NetworkId) -> Option<Address> {
        let net = self.world.network(network).ok()?;
        self.world.trusted_tokens.iter().rev().find(|a| net.tokens.contains_key(a)).copied()
    }

    fn token_detail_lines(&self, session: &mut WalletSession, form: &BTreeMap<String, String>) -> Vec<String> {
        let net_id = session.connected_network;
        let Some(addr) = self.edited_token(net_id) else { return vec!["No token selected".into()] };
        let token = &self.world.network(net_id).expect("edited token network").tokens[&addr];
        if self.profile.metadata_editable {
            let ov = session.custom_token_metadata.entry(addr).or_default();
            if let Some(d) = form.get("token-decimals").and_then(|d| d.trim().parse::<u8>().ok()) {
                if d <= MAX_EDITABLE_DECIMALS {
                    ov.decimals = Some(d);
                }
            }
            if let Some(sym) = form.get("token-symbol").map(|s| s.trim()).filter(|s| !s.is_empty()) {
                ov.symbol = Some(sym.to_string());
            }
        }
        let ov = session.custom_token_metadata.get(&addr).cloned().unwrap_or_default();
        let sym = self.show(&ov.symbol.unwrap_or_else(|| token.symbol.clone()));
        let dec = ov.decimals.unwrap_or(token.decimals);
        let raw = token.balance_of(&session.account());
        vec![
            format!("Token: {addr}"),
            format!("Symbol: {sym}"),
            format!("Decimals: {dec}"),
            format!("Balance: {} {sym}", scaled_balance(raw, token.decimals, dec)),
        ]
    }

    fn render_ui(
        &self,
        session: &mut WalletSession,
        screen_id: &str,
        form: &BTreeMap<String, String>,
    ) -> RenderedScreen {
        let mut s = RenderedScreen::new(screen_id);
        if let Some(spec) = self.nav.fixture.screen(screen_id) {
            s.line(spec.title.clone());
        }
        let field = |suffix: &str| form.iter().find(|(k, _)| k.ends_with(suffix)).map(|(_, v)| v.as_str());
        match screen_id {
            "send-confirm" | "bridge-confirm" => {
                if let Some(r) = field("recipient") {
                    s.lines(self.recipient_lines(session.connected_network, r));
                }
                if let Some(t) = field("token") {
                    s.line(format!("Asset: {}", self.show(t)));
                }
                if let Some(a) = field("amount") {
                    s.line(format!("Amount: {}", self.amount_text(a)));
                }
                s.line(format!("Network: {}", self.network_name(session.connected_network)));
                s.button("Confirm", "confirm");
            }
            "tokens" => {
                if let Some(q) = form.get("token-search") {
                    s.line(format!("Search: {}", self.show(q)));
                    s.lines(self.search_lines(session, q));
                }
            }
            "token-detail" => {
                s.lines(self.token_detail_lines(session, form));
            }
            _ => {
                for (k, v) in form {
                    let label = self.nav.fixture.element(k).map(|e| e.label.clone()).unwrap_or_else(|| k.clone());
                    s.line(format!("Input {label}: {}", self.show(v)));
                }
            }
        }
        s.build()
    }
}

/// Balance text after a decimals edit. The wallet rescales the amount it
/// already shows, so each decimal removed divides the display by ten.
pub fn scaled_balance(raw: U256, chain_decimals: u8, shown_decimals: u8) -> String {
    let exp = 2 * chain_decimals as i32 - shown_decimals as i32;
    if exp >= 0 {
        format_units(raw, exp as u32)
    } else {
        U256::from(10u64)
            .checked_pow(U256::from(-exp as u32))
            .and_then(|m| raw.checked_mul(m))
            .map(|x| x.to_string())
            .unwrap_or_else(|| "overflow".into())
    }
}

impl WalletAdapter for MockWallet {
    fn submit_transaction(
        &mut self,
        session: &mut WalletSession,
        tx: &TransactionSeed,
    ) -> Result<Vec<RenderedScreen>, HarnessError> {
        let input = tx.inputdata.trim();
        if self.profile.quirk_switch_network_on_missing_prefix && !input.is_empty() && !has_hex_prefix(input) {
            session.connected_network = NetworkId::MAINNET;
        }
        let insp = inspect_transaction(&self.world, tx, self.profile.inputdata_parsing);
        let Gate::Pass(alerts) = self.security(&insp.detections) else { return Ok(self.unchanged()) };
        let mut check = RenderedScreen::new("security-check");
        if alerts.is_empty() {
            check.line("Security check passed");
        } else {
            check.lines(alerts);
        }
        let mut screens = vec![check.build()];
        if self.profile.has_simulator {
            screens.push(self.simulation_screen(tx, insp.readable, &insp.detections));
        }
        screens.push(self.confirm_screen(session, tx, insp.call.as_ref(), &insp.detections));
        Ok(self.finish(screens))
    }

    fn submit_message(
        &mut self,
        session: &mut WalletSession,
        msg: &MessageSeed,
    ) -> Result<Vec<RenderedScreen>, HarnessError> {
        session.connected_network = msg.connected_network;
        session.connected_uri = msg.connected_uri.clone();
        let insp = inspect_message(&self.world, msg);
        if self.profile.type_aware_display && !insp.valid {
            return Ok(self.unchanged());
        }
        let Gate::Pass(alerts) = self.security(&insp.detections) else { return Ok(self.unchanged()) };
        let mut s = RenderedScreen::new("signature-request");
        s.line(format!("Origin: {}", self.show(&msg.connected_uri)));
        s.lines(alerts);
        let raw_json = self.profile.display_mode == DisplayMode::RawJson;
        let body = match &msg.payload {
            MessagePayload::Hash { hash } => vec![self.show(hash)],
            MessagePayload::Personal(p) => match &insp.decoded {
                Some(DecodedChallenge::Text(t)) => self.raw_lines(t),
                _ if self.profile.type_aware_display => vec![self.show(&p.challenge)],
                _ => {
                    let body = p.challenge.trim_start_matches("0x").trim_start_matches("0X");
                    match hex::decode(body) {
                        Ok(bytes) => self.raw_lines(&String::from_utf8_lossy(&bytes)),
                        Err(_) => vec![p.challenge.clone()],
                    }
                }
            },
            MessagePayload::TypedData { json } => match (&insp.typed, raw_json) {
                (Some(p), false) => match self.typed_lines(p, insp.listing.as_ref()) {
                    Some(lines) => lines,
                    None => return Ok(self.unchanged()),
                },
                _ => self.raw_json_lines(json),
            },
            MessagePayload::SignIn { text } => match (&insp.sign_in, raw_json) {
                (Some(p), false) => self.sign_in_lines(p),
                _ => self.raw_lines(text),
            },
        };
        s.lines(body);
        s.button("Sign", "sign").button("Reject", "reject");
        Ok(self.finish(vec![s.build()]))
    }

    fn submit_interaction(
        &mut self,
        session: &mut WalletSession,
        seed: &InteractionSeed,
    ) -> Result<Vec<RenderedScreen>, HarnessError> {
        self.nav.home();
        let mut form = BTreeMap::new();
        for step in &seed.steps {
            let Some(target) = step.target() else { return Ok(self.unchanged()) };
            let Some(el) = self.nav.elements().into_iter().find(|e| e.handle == target) else {
                return Ok(self.unchanged());
            };
            match (step.action, el.kind) {
                (StepAction::Click, ElementKind::Clickable) => {
                    self.nav.click(target).map_err(|e| HarnessError::WalletCrashed(e.to_string()))?
                }
                (StepAction::Input, ElementKind::Input) => {
                    form.insert(target.to_string(), step.data.clone().unwrap_or_default());
                }
                _ => return Ok(self.unchanged()),
            }
        }
        let screen_id = self.nav.current_screen().id.clone();
        let screen = self.render_ui(session, &screen_id, &form);
        Ok(self.finish(vec![screen]))
    }

    fn reset(&mut self) {
        self.nav.home();
        self.last_screen = self.nav.fixture.home.clone();
    }
}
