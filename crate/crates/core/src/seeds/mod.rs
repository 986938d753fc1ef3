//! Seed corpora: valid transactions drawn from the mini-chain, signing
//! requests built from message templates, malicious requests from the scam
//! catalog, and UI interaction seeds derived from a crawl.

pub mod ui;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chain::{Address, Amount, ChainError, ChainWorld, Mempool, NetworkId, Transaction};
use crate::codec::abi::{parse_signature, value_from_json};
use crate::codec::{
    encode_call, encode_challenge, parse_eip4361, parse_eip712, signing_method_for, CodecError, DataFormat,
    FunctionCatalog, PersonalSignPayload, Severity, SigningMethod,
};
use crate::mutator::MutationRecord;

pub use ui::{DataType, InteractionSeed, Step, StepAction};

/// Connection used by message seeds that do not name one.
pub const DEFAULT_CONNECTED_URI: &str = "https://app.example.org";

#[derive(Debug, thiserror::Error)]
pub enum SeedError {
    #[error("insufficient-seeds: wanted {wanted}, found {found}")]
    InsufficientSeeds { wanted: usize, found: usize },
    #[error("corpus-incomplete: no template for {0}")]
    CorpusIncomplete(String),
    #[error("bad-catalog: {0}")]
    BadCatalog(String),
    #[error("bad template {0}: {1}")]
    BadTemplate(String, String),
    #[error("cannot read {0}: {1}")]
    Io(String, String),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// A transaction as a dapp submits it. `inputdata` keeps the submitted text
/// verbatim, canonical or not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TransactionSeed {
    pub from: Address,
    pub to: Address,
    #[serde(default)]
    pub value: Amount,
    #[serde(default)]
    pub inputdata: String,
    #[serde(default)]
    pub gas_price: Amount,
    pub chain_id: NetworkId,
    #[serde(default = "send_method")]
    pub signing_method: SigningMethod,
    /// Other pending transactions of the same block.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub context: Vec<Transaction>,
}

fn send_method() -> SigningMethod {
    SigningMethod::EthSendTransactions
}

impl TransactionSeed {
    pub fn to_transaction(&self) -> Transaction {
        Transaction {
            from: self.from,
            to: self.to,
            value: self.value,
            input: self.inputdata.clone(),
            gas_price: self.gas_price,
        }
    }

    /// The context plus this transaction, which arrives last.
    pub fn block_mempool(&self) -> Mempool {
        let mut pool: Mempool = self.context.iter().cloned().collect();
        pool.push(self.to_transaction());
        pool
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum MessagePayload {
    /// A bare 32-byte hash, as sent with `eth_sign`.
    Hash {
        hash: String,
    },
    Personal(PersonalSignPayload),
    /// EIP-712 JSON exactly as submitted.
    TypedData {
        json: String,
    },
    /// EIP-4361 message text.
    SignIn {
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MessageSeed {
    pub format: DataFormat,
    pub signing_method: SigningMethod,
    pub payload: MessagePayload,
    pub connected_network: NetworkId,
    pub connected_uri: String,
}

impl MessageSeed {
    pub fn is_valid_pair(&self) -> bool {
        crate::codec::formats::is_valid_pair(self.format, self.signing_method)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SeedBody {
    Transaction(TransactionSeed),
    Message(MessageSeed),
    Interaction(InteractionSeed),
}

impl SeedBody {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SeedBody::Transaction(_) => "transaction",
            SeedBody::Message(_) => "message",
            SeedBody::Interaction(_) => "interaction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SeedOrigin {
    Mempool,
    Template,
    Catalog,
    Crawl,
    Mutant,
}

/// The six malicious pattern rows of the scam catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ScamPattern {
    DangerousEthSign,
    OverlookedApproval,
    NftListing,
    DeceptiveFunctionName,
    RiskyAddress,
    UnintendedAuthorization,
}

impl ScamPattern {
    pub const ALL: [ScamPattern; 6] = [
        ScamPattern::DangerousEthSign,
        ScamPattern::OverlookedApproval,
        ScamPattern::NftListing,
        ScamPattern::DeceptiveFunctionName,
        ScamPattern::RiskyAddress,
        ScamPattern::UnintendedAuthorization,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Seed {
    pub id: String,
    pub origin: SeedOrigin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<MutationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<ScamPattern>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scam_type: Option<String>,
    #[serde(flatten)]
    pub body: SeedBody,
}

impl Seed {
    pub fn new(id: impl Into<String>, origin: SeedOrigin, body: SeedBody) -> Seed {
        Seed { id: id.into(), origin, parent: None, mutation: None, pattern: None, scam_type: None, body }
    }

    pub fn transaction(&self) -> Option<&TransactionSeed> {
        match &self.body {
            SeedBody::Transaction(t) => Some(t),
            _ => None,
        }
    }

    pub fn message(&self) -> Option<&MessageSeed> {
        match &self.body {
            SeedBody::Message(m) => Some(m),
            _ => None,
        }
    }

    pub fn interaction(&self) -> Option<&InteractionSeed> {
        match &self.body {
            SeedBody::Interaction(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.id, self.body.kind_name())?;
        if let Some(m) = &self.mutation {
            write!(f, " {} of {}", m.strategy, m.parent_seed_id)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Valid transactions

/// Native transfers synthesized when the mempool runs out, in wei steps.
const SYNTH_STEP: u64 = 1_000_000_000_000_000;
const SYNTH_GAS_PRICE: u64 = 20_000_000_000;

/// `n` transactions that succeed against the current snapshot of `network`.
///
/// Pending mempool transactions come first, each carrying the rest of the
/// mempool as block context. Then native transfers between funded
/// externally owned accounts are synthesized with distinct amounts.
pub fn collect_valid_transactions(
    world: &ChainWorld,
    network: NetworkId,
    n: usize,
) -> Result<Vec<TransactionSeed>, SeedError> {
    let net = world.network(network)?;
    let pending = net.mempool.entries().to_vec();
    let mut out = Vec::new();

    for (i, tx) in pending.iter().enumerate() {
        if out.len() == n {
            return Ok(out);
        }
        let context: Vec<Transaction> =
            pending.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, t)| t.clone()).collect();
        let seed = TransactionSeed {
            from: tx.from,
            to: tx.to,
            value: tx.value,
            inputdata: tx.input.clone(),
            gas_price: tx.gas_price,
            chain_id: network,
            signing_method: SigningMethod::EthSendTransactions,
            context,
        };
        if ground_truth(world, &seed)?.map(|o| o.is_success()).unwrap_or(false) {
            out.push(seed);
        }
    }

    let eoas: Vec<Address> = net.accounts.keys().filter(|a| !net.has_code(a)).copied().collect();
    let funded: Vec<Address> = eoas.iter().filter(|a| !net.native_balance(a).is_zero()).copied().collect();
    if eoas.len() >= 2 {
        let mut k: u64 = 0;
        let max_attempts = (n as u64 + 1) * funded.len().max(1) as u64 * 2;
        while out.len() < n && k < max_attempts {
            let from = funded[(k as usize) % funded.len()];
            let pos = eoas.iter().position(|a| *a == from).expect("funded is a subset");
            let to = eoas[(pos + 1 + (k as usize / funded.len()) % (eoas.len() - 1)) % eoas.len()];
            k += 1;
            let seed = TransactionSeed {
                from,
                to,
                value: Amount(crate::chain::U256::from(SYNTH_STEP) * crate::chain::U256::from(k)),
                inputdata: String::new(),
                gas_price: Amount::from_u64(SYNTH_GAS_PRICE),
                chain_id: network,
                signing_method: SigningMethod::EthSendTransactions,
                context: Vec::new(),
            };
            let mut clone = world.clone();
            let env = net.block.for_tx(&seed.to_transaction());
            if clone.execute_transaction(network, &env, &seed.to_transaction())?.is_success() {
                out.push(seed);
            }
        }
    }

    if out.len() < n || n == 0 {
        return Err(SeedError::InsufficientSeeds { wanted: n, found: out.len() });
    }
    Ok(out)
}

/// Outcome of `seed` when its block is formed from the context plus the
/// seed itself. `None` when the seed's network is unknown.
pub fn ground_truth(
    world: &ChainWorld,
    seed: &TransactionSeed,
) -> Result<Option<crate::chain::ExecutionOutcome>, ChainError> {
    if world.network(seed.chain_id).is_err() {
        return Ok(None);
    }
    let mut clone = world.clone();
    let me = seed.to_transaction();
    let results = clone.form_and_execute_block(seed.chain_id, &seed.block_mempool())?;
    Ok(results.into_iter().rev().find(|(t, _)| *t == me).map(|(_, o)| o))
}

// ---------------------------------------------------------------------------
// Message templates and catalog message specs

/// Message description shared by template files and the scam catalog.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MessageSpec {
    #[serde(default)]
    pub name: String,
    /// Restricts the methods used; defaults to every method the format admits.
    #[serde(default)]
    pub signing_methods: Vec<SigningMethod>,
    #[serde(default)]
    pub connected_network: Option<NetworkId>,
    #[serde(default)]
    pub connected_uri: Option<String>,
    #[serde(default)]
    pub hash: Option<String>,
    /// Plain text, hex-encoded into a `personal_sign` challenge.
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub address: Option<String>,
    #[serde(default)]
    pub typed_data: Option<Value>,
    #[serde(default)]
    pub message: Option<String>,
}

impl MessageSpec {
    fn payload(&self, format: DataFormat) -> Result<MessagePayload, String> {
        let missing = |f: &str| format!("{} template lacks `{f}`", format.label());
        Ok(match format {
            DataFormat::HashString => MessagePayload::Hash { hash: self.hash.clone().ok_or_else(|| missing("hash"))? },
            DataFormat::TextString | DataFormat::Eip191 => MessagePayload::Personal(PersonalSignPayload {
                challenge: encode_challenge(self.text.as_deref().ok_or_else(|| missing("text"))?),
                address: self.address.clone().ok_or_else(|| missing("address"))?,
            }),
            DataFormat::Eip712 => MessagePayload::TypedData {
                json: self.typed_data.as_ref().ok_or_else(|| missing("typedData"))?.to_string(),
            },
            DataFormat::Eip4361 => {
                MessagePayload::SignIn { text: self.message.clone().ok_or_else(|| missing("message"))? }
            }
            DataFormat::Transaction => return Err("transactions are not message templates".into()),
        })
    }

    /// One seed per admitted signing method.
    pub fn seeds(&self, format: DataFormat, default_network: NetworkId) -> Result<Vec<MessageSeed>, String> {
        let payload = self.payload(format)?;
        let admitted = signing_method_for(format);
        let methods: Vec<SigningMethod> =
            if self.signing_methods.is_empty() { admitted.to_vec() } else { self.signing_methods.clone() };
        methods
            .into_iter()
            .map(|m| {
                if !admitted.contains(&m) {
                    return Err(format!("{} cannot be signed with {m}", format.label()));
                }
                Ok(MessageSeed {
                    format,
                    signing_method: m,
                    payload: payload.clone(),
                    connected_network: self.connected_network.unwrap_or(default_network),
                    connected_uri: self.connected_uri.clone().unwrap_or_else(|| DEFAULT_CONNECTED_URI.into()),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TemplateFile {
    pub schema: String,
    pub format: DataFormat,
    pub templates: Vec<MessageSpec>,
}

/// Structural violations (errors only) of a message payload.
pub fn payload_errors(payload: &MessagePayload) -> Vec<String> {
    match payload {
        MessagePayload::TypedData { json } => match parse_eip712(json) {
            Err(e) => vec![e.to_string()],
            Ok((_, v)) => v.into_iter().filter(|x| x.severity == Severity::Error).map(|x| x.field).collect(),
        },
        MessagePayload::SignIn { text } => match parse_eip4361(text) {
            Err(e) => vec![e.to_string()],
            Ok((_, v)) => v.into_iter().filter(|x| x.severity == Severity::Error).map(|x| x.field).collect(),
        },
        _ => Vec::new(),
    }
}

/// Builds the message corpus from named template documents. Every seed must
/// parse without errors and every (format, method) pair must be covered.
pub fn build_message_corpus_from(
    files: &[(String, String)],
    default_network: NetworkId,
) -> Result<Vec<MessageSeed>, SeedError> {
    let mut out = Vec::new();
    for (name, text) in files {
        let file: TemplateFile =
            serde_json::from_str(text).map_err(|e| SeedError::BadTemplate(name.clone(), e.to_string()))?;
        if file.schema != "messages/1" {
            return Err(SeedError::BadTemplate(name.clone(), format!("unsupported schema `{}`", file.schema)));
        }
        for spec in &file.templates {
            let seeds =
                spec.seeds(file.format, default_network).map_err(|e| SeedError::BadTemplate(name.clone(), e))?;
            for s in seeds {
                let errors = payload_errors(&s.payload);
                if !errors.is_empty() {
                    return Err(SeedError::BadTemplate(
                        format!("{name}/{}", spec.name),
                        format!("violations: {}", errors.join(", ")),
                    ));
                }
                out.push(s);
            }
        }
    }
    let covered: BTreeSet<(DataFormat, SigningMethod)> = out.iter().map(|s| (s.format, s.signing_method)).collect();
    for f in DataFormat::ALL.into_iter().filter(|f| *f != DataFormat::Transaction) {
        for m in signing_method_for(f) {
            if !covered.contains(&(f, *m)) {
                return Err(SeedError::CorpusIncomplete(format!("{} with {m}", f.label())));
            }
        }
    }
    Ok(out)
}

/// Reads every `*.json` file of `dir` in name order.
pub fn build_message_corpus(dir: &Path, default_network: NetworkId) -> Result<Vec<MessageSeed>, SeedError> {
    let io = |e: std::io::Error| SeedError::Io(dir.display().to_string(), e.to_string());
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    names.sort();
    let files = names
        .iter()
        .map(|p| {
            std::fs::read_to_string(p)
                .map(|t| (p.display().to_string(), t))
                .map_err(|e| SeedError::Io(p.display().to_string(), e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    build_message_corpus_from(&files, default_network)
}

pub fn bundled_message_corpus(default_network: NetworkId) -> Result<Vec<MessageSeed>, SeedError> {
    let files: Vec<(String, String)> =
        crate::assets::MESSAGE_TEMPLATES.iter().map(|(n, t)| (n.to_string(), t.to_string())).collect();
    build_message_corpus_from(&files, default_network)
}

// ---------------------------------------------------------------------------
// Scam catalog

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CallSpec {
    pub signature: String,
    #[serde(default)]
    pub args: Vec<Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TransactionSpec {
    pub from: Address,
    pub to: Address,
    #[serde(default)]
    pub value: Amount,
    #[serde(default)]
    pub gas_price: Amount,
    pub chain_id: NetworkId,
    #[serde(default)]
    pub call: Option<CallSpec>,
    #[serde(default)]
    pub inputdata: Option<String>,
}

impl TransactionSpec {
    fn seed(&self, catalog: &FunctionCatalog) -> Result<TransactionSeed, String> {
        let inputdata = match (&self.call, &self.inputdata) {
            (Some(call), None) => {
                if catalog.by_signature(&call.signature).is_none() {
                    return Err(format!("`{}` is not in the function catalog", call.signature));
                }
                let (_, types) = parse_signature(&call.signature).map_err(|e| e.to_string())?;
                if types.len() != call.args.len() {
                    return Err(format!("`{}` takes {} arguments", call.signature, types.len()));
                }
                let values = types
                    .iter()
                    .zip(&call.args)
                    .map(|(t, v)| value_from_json(t, v))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| e.to_string())?;
                format!("0x{}", hex::encode(encode_call(&call.signature, &values)))
            }
            (None, Some(raw)) => raw.clone(),
            (None, None) => String::new(),
            (Some(_), Some(_)) => return Err("give either `call` or `inputdata`".into()),
        };
        Ok(TransactionSeed {
            from: self.from,
            to: self.to,
            value: self.value,
            inputdata,
            gas_price: self.gas_price,
            chain_id: self.chain_id,
            signing_method: SigningMethod::EthSendTransactions,
            context: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MessageEntrySpec {
    pub format: DataFormat,
    #[serde(flatten)]
    pub spec: MessageSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CatalogEntrySpec {
    pattern: String,
    scam_type: String,
    #[serde(default)]
    transaction: Option<TransactionSpec>,
    #[serde(default)]
    message: Option<MessageEntrySpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogFile {
    schema: String,
    entries: Vec<CatalogEntrySpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScamCatalogEntry {
    pub pattern: ScamPattern,
    pub scam_type: String,
    pub seed: SeedBody,
}

pub fn parse_scam_catalog(text: &str, default_network: NetworkId) -> Result<Vec<ScamCatalogEntry>, SeedError> {
    let bad = |m: String| SeedError::BadCatalog(m);
    let file: CatalogFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if file.schema != "scams/1" {
        return Err(bad(format!("unsupported schema `{}`", file.schema)));
    }
    let functions = FunctionCatalog::bundled();
    let mut out = Vec::new();
    for (i, e) in file.entries.iter().enumerate() {
        let pattern: ScamPattern = serde_json::from_value(Value::String(e.pattern.clone()))
            .map_err(|_| bad(format!("entry {i}: unknown pattern `{}`", e.pattern)))?;
        let mut push =
            |body: SeedBody| out.push(ScamCatalogEntry { pattern, scam_type: e.scam_type.clone(), seed: body });
        match (&e.transaction, &e.message) {
            (Some(t), None) => {
                push(SeedBody::Transaction(t.seed(functions).map_err(|m| bad(format!("entry {i}: {m}")))?))
            }
            (None, Some(m)) => {
                let seeds = m.spec.seeds(m.format, default_network).map_err(|x| bad(format!("entry {i}: {x}")))?;
                for s in seeds {
                    if let Some(err) = payload_errors(&s.payload).first() {
                        return Err(bad(format!("entry {i}: {err}")));
                    }
                    push(SeedBody::Message(s));
                }
            }
            _ => return Err(bad(format!("entry {i}: needs exactly one of transaction or message"))),
        }
    }
    let present: BTreeSet<ScamPattern> = out.iter().map(|e| e.pattern).collect();
    if let Some(missing) = ScamPattern::ALL.iter().find(|p| !present.contains(p)) {
        return Err(bad(format!("no entry for pattern {missing:?}")));
    }
    Ok(out)
}

pub fn load_scam_catalog(path: &Path, default_network: NetworkId) -> Result<Vec<ScamCatalogEntry>, SeedError> {
    let text = std::fs::read_to_string(path).map_err(|e| SeedError::Io(path.display().to_string(), e.to_string()))?;
    parse_scam_catalog(&text, default_network)
}

pub fn bundled_scam_catalog(default_network: NetworkId) -> Result<Vec<ScamCatalogEntry>, SeedError> {
    parse_scam_catalog(crate::assets::SCAMS, default_network)
}

/// Addresses of the catalog's risky-address entries, used as replacement
/// targets by address mutations.
pub fn attacker_addresses(world: &ChainWorld, catalog: &[ScamCatalogEntry]) -> Vec<Address> {
    let mut out: Vec<Address> = catalog
        .iter()
        .filter(|e| e.pattern == ScamPattern::RiskyAddress)
        .filter_map(|e| match &e.seed {
            SeedBody::Transaction(t) => Some(
                std::iter::once(t.to)
                    .chain(
                        crate::codec::inputdata_bytes(&t.inputdata)
                            .ok()
                            .and_then(|b| crate::codec::decode_call(&b).ok())
                            .map(|c| c.addresses())
                            .unwrap_or_default(),
                    )
                    .filter(|a| world.lookup_label(a).is_risky())
                    .collect::<Vec<_>>(),
            ),
            _ => None,
        })
        .flatten()
        .collect();
    out.sort();
    out.dedup();
    out
}

impl From<CodecError> for SeedError {
    fn from(e: CodecError) -> Self {
        SeedError::BadCatalog(e.to_string())
    }
}
