//! Risk detections over seeds, shared by the mock wallet's security module
//! and the verifier's expectations.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chain::{format_units, parse_u256, Address, Amount, ChainWorld, NetworkId, U256};
use crate::codec::eip712::typecast_address;
use crate::codec::{
    approval_semantics, approval_semantics_typed, classify_function, decode_call, decode_challenge,
    normalize_inputdata, parse_eip4361, parse_eip712, uri_origin, ApprovalAmount, ApprovalKind, DecodeFailure,
    DecodedCall, DecodedChallenge, Eip4361Payload, Eip712Payload, FunctionFamily, Severity, SigningMethod,
};
use crate::seeds::{MessagePayload, MessageSeed, TransactionSeed};

/// Listings whose seller revenue is under this many dollars are not benign.
pub const LISTING_MIN_USD: f64 = 0.1;
/// Listings priced under this fraction of the collection floor are not benign.
pub const LISTING_FLOOR_FACTOR: f64 = 0.5;

/// How a wallet reads inputdata text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ParseMode {
    /// Anything [`normalize_inputdata`] accepts.
    Normalize,
    /// Only `0x`-prefixed contiguous hex.
    RawOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detection", rename_all = "camelCase")]
pub enum Detection {
    EthSign,
    Approval {
        kind: ApprovalKind,
        spender: Address,
        unlimited: bool,
        grants: bool,
    },
    NftListing {
        multi: bool,
        revenue_usd: Option<f64>,
        floor_usd: Option<f64>,
    },
    RiskyAddress {
        address: Address,
    },
    DeceptiveName {
        name: String,
    },
    ChainIdMismatch {
        connected: NetworkId,
        requested: Option<NetworkId>,
    },
    UriMismatch {
        connected: String,
        requested: String,
    },
    PersonalSignDecode {
        failure: DecodeFailure,
    },
    MalformedInputdata,
    /// The callee branches on storage other transactions can write first.
    FrontRunProne {
        contract: Address,
    },
    /// The callee branches on block variables a simulator must guess.
    StateDependent {
        contract: Address,
    },
}

impl Detection {
    /// Id of the wallet rule that reacts to this detection.
    pub fn rule(&self) -> &'static str {
        match self {
            Detection::EthSign => "eth-sign",
            Detection::Approval { kind, .. } => match kind {
                ApprovalKind::Approve => "approve",
                ApprovalKind::IncreaseAllowance => "increase-allowance",
                ApprovalKind::SetApprovalForAll => "set-approval-for-all",
                ApprovalKind::Permit => "permit",
                ApprovalKind::Permit2Single => "permit2-single",
                ApprovalKind::Permit2Batch => "permit2-batch",
                ApprovalKind::PermitForAll => "permit-for-all",
            },
            Detection::NftListing { multi: false, .. } => "nft-listing-single",
            Detection::NftListing { multi: true, .. } => "nft-listing-multi",
            Detection::RiskyAddress { .. } => "risky-address",
            Detection::DeceptiveName { .. } => "deceptive-name",
            Detection::ChainIdMismatch { .. } => "chain-id-mismatch",
            Detection::UriMismatch { .. } => "uri-mismatch",
            Detection::PersonalSignDecode { .. } => "personal-sign-decode",
            Detection::MalformedInputdata => "malformed-inputdata",
            Detection::FrontRunProne { .. } => "front-run-prone",
            Detection::StateDependent { .. } => "state-dependent-simulation",
        }
    }

    /// Whether the request puts the user's assets at stake, so that a
    /// reliable wallet must alert on it.
    pub fn non_benign(&self) -> bool {
        match self {
            Detection::Approval { grants, .. } => *grants,
            Detection::NftListing { revenue_usd: None, .. } => true,
            Detection::NftListing { revenue_usd: Some(r), floor_usd, .. } => {
                *r < LISTING_MIN_USD || floor_usd.is_some_and(|f| *r < LISTING_FLOOR_FACTOR * f)
            }
            Detection::FrontRunProne { .. } | Detection::StateDependent { .. } => false,
            _ => true,
        }
    }

    /// Whether a wallet's rule for this detection triggers at all.
    pub fn fires(&self) -> bool {
        self.non_benign() || matches!(self, Detection::FrontRunProne { .. } | Detection::StateDependent { .. })
    }

    /// Expectation kind of the alert oracle; `None` for advisory detections.
    pub fn reason_kind(&self) -> Option<&'static str> {
        Some(match self {
            Detection::EthSign => "ethSign",
            Detection::Approval { .. } => "approvalFamily",
            Detection::NftListing { .. } => "nftListing",
            Detection::RiskyAddress { .. } => "labeledAddress",
            Detection::DeceptiveName { .. } => "deceptiveName",
            Detection::ChainIdMismatch { .. } | Detection::UriMismatch { .. } => "chainIdUriMismatch",
            Detection::PersonalSignDecode { .. } => "personalSignDecode",
            Detection::MalformedInputdata => "nonCompliantInputdata",
            Detection::FrontRunProne { .. } | Detection::StateDependent { .. } => return None,
        })
    }

    pub fn describe(&self) -> String {
        match self {
            Detection::EthSign => "blind eth_sign request".into(),
            Detection::Approval { kind, spender, unlimited, .. } => {
                format!("{kind:?} for {spender}{}", if *unlimited { " (unlimited)" } else { "" })
            }
            Detection::NftListing { multi, revenue_usd, floor_usd } => match (revenue_usd, floor_usd) {
                (Some(r), Some(f)) => format!("NFT listing (multi={multi}) revenue ${r:.2} vs floor ${f:.2}"),
                _ => format!("NFT listing call (multi={multi})"),
            },
            Detection::RiskyAddress { address } => format!("labeled address {address}"),
            Detection::DeceptiveName { name } => format!("deceptive function name {name}"),
            Detection::ChainIdMismatch { connected, requested } => match requested {
                Some(r) => format!("chain id {r} differs from connected {connected}"),
                None => format!("invalid chain id while connected to {connected}"),
            },
            Detection::UriMismatch { connected, requested } => format!("URI {requested} differs from {connected}"),
            Detection::PersonalSignDecode { failure } => format!("challenge does not decode ({failure:?})"),
            Detection::MalformedInputdata => "inputdata does not normalize".into(),
            Detection::FrontRunProne { contract } => format!("{contract} depends on front-runnable storage"),
            Detection::StateDependent { contract } => format!("{contract} depends on block variables"),
        }
    }
}

/// What a wallet made of a transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct TxInspection {
    pub detections: Vec<Detection>,
    pub call: Option<DecodedCall>,
    /// False when the wallet could not read the inputdata at all.
    pub readable: bool,
}

fn is_raw_hex(text: &str) -> bool {
    let t = text.trim();
    let Some(body) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) else { return false };
    body.len() % 2 == 0 && body.bytes().all(|b| b.is_ascii_hexdigit())
}

fn push_unique(out: &mut Vec<Detection>, d: Detection) {
    if !out.contains(&d) {
        out.push(d);
    }
}

fn risky(world: &ChainWorld, addrs: impl IntoIterator<Item = Address>, out: &mut Vec<Detection>) {
    for a in addrs {
        if world.lookup_label(&a).is_risky() {
            push_unique(out, Detection::RiskyAddress { address: a });
        }
    }
}

pub fn inspect_transaction(world: &ChainWorld, seed: &TransactionSeed, mode: ParseMode) -> TxInspection {
    let mut det = Vec::new();
    let mut call = None;
    let mut readable = true;
    let input = seed.inputdata.trim();
    if !input.is_empty() {
        match normalize_inputdata(input) {
            Err(_) => {
                det.push(Detection::MalformedInputdata);
                readable = false;
            }
            Ok(_) if mode == ParseMode::RawOnly && !is_raw_hex(input) => readable = false,
            Ok(canon) => {
                let bytes = hex::decode(&canon[2..]).expect("normalized hex");
                call = decode_call(&bytes).ok();
            }
        }
    }
    risky(world, [seed.to], &mut det);
    if let Some(c) = &call {
        risky(world, c.addresses(), &mut det);
        match classify_function(c) {
            FunctionFamily::Approval => {
                if let Some(a) = approval_semantics(c) {
                    let grants = match a.amount {
                        ApprovalAmount::All => true,
                        ApprovalAmount::Amount(x) => !x.0.is_zero(),
                    };
                    det.push(Detection::Approval { kind: a.kind, spender: a.spender, unlimited: a.unlimited, grants });
                }
            }
            FunctionFamily::NftListing => det.push(Detection::NftListing {
                multi: c.function_name.as_deref() == Some("bulkExecute"),
                revenue_usd: None,
                floor_usd: None,
            }),
            FunctionFamily::DeceptiveName => {
                det.push(Detection::DeceptiveName { name: c.function_name.clone().unwrap_or_default() })
            }
            FunctionFamily::Plain => {}
        }
    }
    if let Some(b) = world.network(seed.chain_id).ok().and_then(|n| n.behaviors.get(&seed.to)) {
        if b.reads_storage() {
            det.push(Detection::FrontRunProne { contract: seed.to });
        }
        if b.reads_environment() {
            det.push(Detection::StateDependent { contract: seed.to });
        }
    }
    TxInspection { detections: det, call, readable }
}

/// A marketplace listing recovered from an order message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ListingSummary {
    pub items: Vec<(Address, Amount)>,
    pub revenue_wei: Amount,
    pub revenue_usd: f64,
    pub floor_usd: f64,
    pub native_symbol: String,
}

impl ListingSummary {
    pub fn price_text(&self) -> String {
        format!("{} {}", format_units(self.revenue_wei.0, 18), self.native_symbol)
    }
}

/// What a wallet made of a signing request.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageInspection {
    pub detections: Vec<Detection>,
    pub typed: Option<Eip712Payload>,
    pub sign_in: Option<Eip4361Payload>,
    pub decoded: Option<DecodedChallenge>,
    pub listing: Option<ListingSummary>,
    /// Parses without structural errors.
    pub valid: bool,
}

fn leaf_u256(v: &Value) -> Option<U256> {
    match v {
        Value::Number(n) => n.as_u64().map(U256::from),
        Value::String(s) => parse_u256(s),
        _ => None,
    }
}

fn u256_to_f64(x: U256) -> f64 {
    // Precision loss is irrelevant at the dollar thresholds involved.
    x.to_string().parse::<f64>().unwrap_or(f64::MAX)
}

/// Seaport-style `OrderComponents`: NFTs offered by the offerer against
/// native-currency consideration paid back to the offerer.
pub fn listing_summary(world: &ChainWorld, p: &Eip712Payload, connected: NetworkId) -> Option<ListingSummary> {
    if p.primary_type != "OrderComponents" {
        return None;
    }
    let offerer = p.message_field("offerer").and_then(typecast_address)?;
    let mut items = Vec::new();
    for o in p.message_field("offer")?.as_array()? {
        let kind = o.get("itemType").and_then(leaf_u256).unwrap_or_default();
        if kind == U256::from(2u64) || kind == U256::from(3u64) {
            let token = o.get("token").and_then(typecast_address)?;
            items.push((token, Amount(o.get("identifierOrCriteria").and_then(leaf_u256).unwrap_or_default())));
        }
    }
    if items.is_empty() {
        return None;
    }
    let mut revenue = U256::zero();
    for c in p.message_field("consideration")?.as_array()? {
        let native = c.get("itemType").and_then(leaf_u256).unwrap_or_default().is_zero();
        if native && c.get("recipient").and_then(typecast_address) == Some(offerer) {
            revenue = revenue.saturating_add(c.get("startAmount").and_then(leaf_u256).unwrap_or_default());
        }
    }
    let net_id = p.domain.chain_id.filter(|id| world.network(*id).is_ok()).unwrap_or(connected);
    let net = world.network(net_id).ok()?;
    let floor: f64 = items
        .iter()
        .map(|(c, _)| world.networks.values().find_map(|n| n.nfts.get(c)).map(|n| n.floor_price_usd).unwrap_or(0.0))
        .sum();
    Some(ListingSummary {
        revenue_usd: u256_to_f64(revenue) / 1e18 * net.usd_per_native,
        items,
        revenue_wei: Amount(revenue),
        floor_usd: floor,
        native_symbol: net.native_symbol.clone(),
    })
}

pub fn inspect_message(world: &ChainWorld, seed: &MessageSeed) -> MessageInspection {
    let mut det = Vec::new();
    let mut out = MessageInspection {
        detections: Vec::new(),
        typed: None,
        sign_in: None,
        decoded: None,
        listing: None,
        valid: true,
    };
    if seed.signing_method == SigningMethod::EthSign {
        det.push(Detection::EthSign);
    }
    let connected = seed.connected_network;
    match &seed.payload {
        MessagePayload::Hash { .. } => {}
        MessagePayload::Personal(p) => {
            let d = decode_challenge(&p.challenge);
            if let DecodedChallenge::Failure(f) = d {
                det.push(Detection::PersonalSignDecode { failure: f });
            }
            out.decoded = Some(d);
        }
        MessagePayload::TypedData { json } => match parse_eip712(json) {
            Err(_) => out.valid = false,
            Ok((p, violations)) => {
                out.valid = !violations.iter().any(|v| v.severity == Severity::Error);
                risky(world, p.addresses().into_iter().chain(p.domain.verifying_contract), &mut det);
                if let Some(a) = approval_semantics_typed(&p) {
                    let grants = match a.amount {
                        ApprovalAmount::All => true,
                        ApprovalAmount::Amount(x) => !x.0.is_zero(),
                    };
                    det.push(Detection::Approval { kind: a.kind, spender: a.spender, unlimited: a.unlimited, grants });
                }
                if let Some(l) = listing_summary(world, &p, connected) {
                    det.push(Detection::NftListing {
                        multi: l.items.len() > 1,
                        revenue_usd: Some(l.revenue_usd),
                        floor_usd: Some(l.floor_usd),
                    });
                    out.listing = Some(l);
                }
                if p.domain.chain_id_raw.is_some() && p.domain.chain_id != Some(connected) {
                    det.push(Detection::ChainIdMismatch { connected, requested: p.domain.chain_id });
                }
                out.typed = Some(p);
            }
        },
        MessagePayload::SignIn { text } => match parse_eip4361(text) {
            Err(_) => out.valid = false,
            Ok((p, violations)) => {
                out.valid = !violations.iter().any(|v| v.severity == Severity::Error);
                risky(world, p.address, &mut det);
                if !p.chain_id_raw.is_empty() && p.chain_id != Some(connected) {
                    det.push(Detection::ChainIdMismatch { connected, requested: p.chain_id });
                }
                if !p.uri.is_empty() && uri_origin(&p.uri) != uri_origin(&seed.connected_uri) {
                    det.push(Detection::UriMismatch {
                        connected: seed.connected_uri.clone(),
                        requested: p.uri.clone(),
                    });
                }
                out.sign_in = Some(p);
            }
        },
    }
    out.detections = det;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::abi::AbiValue;
    use crate::codec::{encode_call, DataFormat};
    use crate::seeds::{bundled_scam_catalog, ScamPattern, SeedBody};

    fn world() -> ChainWorld {
        ChainWorld::from_fixture_json(crate::assets::DEFAULT_WORLD).unwrap()
    }

    fn approve_tx(amount: U256) -> TransactionSeed {
        let data =
            encode_call("approve(address,uint256)", &[AbiValue::Address(Address([0x5b; 20])), AbiValue::Uint(amount)]);
        TransactionSeed {
            from: Address([1; 20]),
            to: Address([0xaa; 20]),
            value: Amount::ZERO,
            inputdata: format!("0x{}", hex::encode(data)),
            gas_price: Amount::ZERO,
            chain_id: NetworkId::TESTNET,
            signing_method: SigningMethod::EthSendTransactions,
            context: Vec::new(),
        }
    }

    #[test]
    fn zero_approval_is_benign() {
        let w = world();
        let d = inspect_transaction(&w, &approve_tx(U256::zero()), ParseMode::Normalize).detections;
        assert!(matches!(d[0], Detection::Approval { grants: false, .. }));
        assert!(!d[0].non_benign());
        let d = inspect_transaction(&w, &approve_tx(U256::MAX), ParseMode::Normalize).detections;
        assert!(matches!(d[0], Detection::Approval { unlimited: true, grants: true, .. }));
    }

    #[test]
    fn raw_only_cannot_read_stripped_prefix() {
        let w = world();
        let mut t = approve_tx(U256::MAX);
        t.inputdata = t.inputdata[2..].to_string();
        let raw = inspect_transaction(&w, &t, ParseMode::RawOnly);
        assert!(!raw.readable);
        assert!(raw.detections.is_empty());
        let norm = inspect_transaction(&w, &t, ParseMode::Normalize);
        assert!(norm.readable && !norm.detections.is_empty());
    }

    #[test]
    fn cheap_listing_is_not_benign() {
        let w = world();
        let cat = bundled_scam_catalog(NetworkId::TESTNET).unwrap();
        let listing = cat
            .iter()
            .filter(|e| e.pattern == ScamPattern::NftListing)
            .find_map(|e| match &e.seed {
                SeedBody::Message(m) if m.format == DataFormat::Eip712 => Some(m.clone()),
                _ => None,
            })
            .unwrap();
        let i = inspect_message(&w, &listing);
        let l = i.listing.unwrap();
        assert!((l.revenue_usd - 0.05).abs() < 1e-9, "{}", l.revenue_usd);
        assert!((l.floor_usd - 100.0).abs() < 1e-9);
        assert!(i.detections.iter().any(|d| matches!(d, Detection::NftListing { .. }) && d.non_benign()));
    }

    #[test]
    fn fair_listing_template_is_benign() {
        let w = world();
        let corpus = crate::seeds::bundled_message_corpus(NetworkId::TESTNET).unwrap();
        let fair = corpus
            .iter()
            .find(|m| matches!(&m.payload, MessagePayload::TypedData { json } if json.contains("OrderComponents")))
            .unwrap();
        let i = inspect_message(&w, fair);
        assert!(i.listing.is_some());
        assert!(i.detections.iter().all(|d| !d.non_benign()), "{:?}", i.detections);
    }

    #[test]
    fn templates_are_benign() {
        let w = world();
        for m in crate::seeds::bundled_message_corpus(NetworkId::TESTNET).unwrap() {
            let i = inspect_message(&w, &m);
            let bad: Vec<_> = i.detections.iter().filter(|d| d.non_benign() && **d != Detection::EthSign).collect();
            assert!(bad.is_empty(), "{bad:?}");
            assert!(i.valid);
        }
    }
}
