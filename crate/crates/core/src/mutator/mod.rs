//! Content and format mutation of seeds, with lineage records.
//!
//! Content strategies change what a seed means. Format strategies change
//! how it is written; `prefixStrip` and `hexToDecimal` are kept only when
//! the mutant normalizes to the same payload as its parent, while
//! `paramSwap` and `pathReorder` deliberately reorder things and are never
//! semantics-preserving.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chain::{parse_u256, pow2, Address, Amount, U256};
use crate::codec::abi::{flat_head_slots, parse_signature, AbiType, AbiValue};
use crate::codec::eip712::typecast_address;
use crate::codec::{
    decimal_token, decode_call, decode_challenge, encode_call, encode_challenge, inputdata_bytes, normalize_inputdata,
    parse_eip4361, parse_eip712, FunctionCatalog, PersonalSignPayload,
};
use crate::seeds::{
    DataType, InteractionSeed, MessagePayload, MessageSeed, Seed, SeedBody, SeedOrigin, Step, StepAction,
    TransactionSeed,
};

/// Default cap on mutants per parent.
pub const DEFAULT_BUDGET: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Strategy {
    ValueZero,
    ValueHuge,
    AddressReplace,
    CharEdit,
    IllegalEncoding,
    BitFlip,
    Arithmetic,
    HexToDecimal,
    ParamSwap,
    PrefixStrip,
    PathReorder,
}

impl Strategy {
    pub const ALL: [Strategy; 11] = [
        Strategy::ValueZero,
        Strategy::ValueHuge,
        Strategy::AddressReplace,
        Strategy::CharEdit,
        Strategy::IllegalEncoding,
        Strategy::BitFlip,
        Strategy::Arithmetic,
        Strategy::HexToDecimal,
        Strategy::ParamSwap,
        Strategy::PrefixStrip,
        Strategy::PathReorder,
    ];

    pub fn is_format(self) -> bool {
        matches!(self, Strategy::HexToDecimal | Strategy::ParamSwap | Strategy::PrefixStrip | Strategy::PathReorder)
    }

    /// Format strategies that may keep the payload's meaning.
    pub fn may_preserve(self) -> bool {
        matches!(self, Strategy::HexToDecimal | Strategy::PrefixStrip)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("strategy serializes");
        f.write_str(v.as_str().expect("unit variant"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MutationRecord {
    pub parent_seed_id: String,
    pub strategy: Strategy,
    pub semantics_preserving: bool,
    /// Field path of the mutated location.
    pub locus: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FieldSemantics {
    Amount,
    Address,
    Bytes,
    Text,
    Unknown,
}

/// Semantic tag of a field from its name and textual value.
pub fn infer_field_semantics(field: &str, value: &str) -> FieldSemantics {
    let name = field.rsplit('.').next().unwrap_or(field).to_ascii_lowercase();
    let v = value.trim();
    let body = v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")).unwrap_or(v);
    let is_hex = !body.is_empty() && body.bytes().all(|b| b.is_ascii_hexdigit());
    if is_hex && body.len() == 64 && body.bytes().take(24).all(|b| b == b'0') {
        return FieldSemantics::Address;
    }
    if is_hex && body.len() == 40 && v.len() == 42 {
        return FieldSemantics::Address;
    }
    const AMOUNT_NAMES: [&str; 6] = ["value", "amount", "wad", "startamount", "endamount", "quantity"];
    let numeric = !v.is_empty() && (v.bytes().all(|b| b.is_ascii_digit()) || (v.starts_with("0x") && is_hex));
    if AMOUNT_NAMES.contains(&name.as_str()) && numeric {
        return FieldSemantics::Amount;
    }
    if v.is_empty() {
        return FieldSemantics::Unknown;
    }
    if v.bytes().all(|b| b.is_ascii_digit()) {
        return FieldSemantics::Amount;
    }
    if is_hex && v.starts_with("0x") {
        return FieldSemantics::Bytes;
    }
    FieldSemantics::Text
}

type Mutant = (SeedBody, MutationRecord);

fn record(parent: &Seed, strategy: Strategy, locus: &str, preserving: bool) -> MutationRecord {
    MutationRecord {
        parent_seed_id: parent.id.clone(),
        strategy,
        semantics_preserving: preserving,
        locus: locus.to_string(),
    }
}

fn huge() -> U256 {
    pow2(255)
}

fn flip_bit(x: U256, rng: &mut impl Rng) -> U256 {
    x ^ (U256::one() << rng.gen_range(0..64))
}

fn arithmetic(x: U256, rng: &mut impl Rng) -> U256 {
    let k = U256::from(rng.gen_range(1u64..=16));
    if rng.gen_bool(0.5) || x < k {
        x.overflowing_add(k).0
    } else {
        x - k
    }
}

/// One of U+0000..U+0008.
fn illegal_char(rng: &mut impl Rng) -> char {
    char::from(rng.gen_range(0u8..=8))
}

/// Random truncation, insertion or replacement of one character.
fn char_edit(text: &str, alphabet: &[u8], rng: &mut impl Rng) -> Option<String> {
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return None;
    }
    let mut out = chars.clone();
    let c = char::from(alphabet[rng.gen_range(0..alphabet.len())]);
    match rng.gen_range(0..3) {
        0 => out.truncate(rng.gen_range(0..chars.len())),
        1 => out.insert(rng.gen_range(0..=chars.len()), c),
        _ => {
            let i = rng.gen_range(0..chars.len());
            out[i] = c;
        }
    }
    let s: String = out.into_iter().collect();
    (s != text).then_some(s)
}

fn insert_char(text: &str, c: char, rng: &mut impl Rng) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    chars.insert(rng.gen_range(0..=chars.len()), c);
    chars.into_iter().collect()
}

const HEX: &[u8] = b"0123456789abcdef";
const PRINTABLE: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789 .:/";

/// Content mutants of `seed`, every one flagged non-preserving.
pub fn mutate_content(seed: &Seed, attackers: &[Address], rng: &mut impl Rng) -> Vec<Mutant> {
    let raw = match &seed.body {
        SeedBody::Transaction(t) => tx_content(t, attackers, rng),
        SeedBody::Message(m) => message_content(m, attackers, rng),
        SeedBody::Interaction(i) => interaction_content(i, attackers, rng),
    };
    raw.into_iter().map(|(body, strategy, locus)| (body, record(seed, strategy, &locus, false))).collect()
}

/// Format mutants of `seed`. Candidates for preserving strategies that do
/// not normalize to the parent's payload are dropped.
pub fn mutate_format(seed: &Seed, rng: &mut impl Rng) -> Vec<Mutant> {
    let raw = match &seed.body {
        SeedBody::Transaction(t) => tx_format(t, rng),
        SeedBody::Message(m) => message_format(m, rng),
        SeedBody::Interaction(i) => interaction_format(i),
    };
    let parent_norm = normalize_payload(&seed.body);
    raw.into_iter()
        .filter_map(|(body, strategy, locus)| {
            let preserving = strategy.may_preserve();
            if preserving && normalize_payload(&body) != parent_norm {
                return None;
            }
            Some((body, record(seed, strategy, &locus, preserving)))
        })
        .collect()
}

/// Single-round mutants of `seed`, format strategies first, capped at
/// `budget`, with lineage ids `<parent>-mNN`.
pub fn mutate(seed: &Seed, attackers: &[Address], budget: usize, rng: &mut impl Rng) -> Vec<Seed> {
    let mut all = mutate_format(seed, rng);
    all.extend(mutate_content(seed, attackers, rng));
    all.truncate(budget);
    all.into_iter()
        .enumerate()
        .map(|(i, (body, rec))| Seed {
            id: format!("{}-m{:02}", seed.id, i + 1),
            origin: SeedOrigin::Mutant,
            parent: Some(seed.id.clone()),
            mutation: Some(rec),
            pattern: seed.pattern,
            scam_type: seed.scam_type.clone(),
            body,
        })
        .collect()
}

type Raw = (SeedBody, Strategy, String);

// ---------------------------------------------------------------------------
// Transactions

struct KnownCall {
    signature: String,
    types: Vec<AbiType>,
    values: Vec<AbiValue>,
}

fn known_call(t: &TransactionSeed) -> Option<KnownCall> {
    let bytes = inputdata_bytes(&t.inputdata).ok()?;
    let call = decode_call(&bytes).ok()?;
    let signature = call.signature?;
    let (_, types) = parse_signature(&signature).ok()?;
    Some(KnownCall { signature, types, values: call.args.into_iter().map(|a| a.value).collect() })
}

fn with_input(t: &TransactionSeed, input: String) -> SeedBody {
    SeedBody::Transaction(TransactionSeed { inputdata: input, ..t.clone() })
}

fn reencode(k: &KnownCall, values: Vec<AbiValue>) -> String {
    format!("0x{}", hex::encode(encode_call(&k.signature, &values)))
}

fn tx_content(t: &TransactionSeed, attackers: &[Address], rng: &mut impl Rng) -> Vec<Raw> {
    let mut out: Vec<Raw> = Vec::new();
    let tx = |v: Amount| SeedBody::Transaction(TransactionSeed { value: v, ..t.clone() });
    if !t.value.0.is_zero() {
        out.push((tx(Amount::ZERO), Strategy::ValueZero, "value".into()));
    }
    out.push((tx(Amount(huge())), Strategy::ValueHuge, "value".into()));
    if t.inputdata.trim().is_empty() {
        if let Some(a) = attackers.choose(rng) {
            if *a != t.to {
                out.push((
                    SeedBody::Transaction(TransactionSeed { to: *a, ..t.clone() }),
                    Strategy::AddressReplace,
                    "to".into(),
                ));
            }
        }
        return out;
    }

    if let Some(k) = known_call(t) {
        let numeric: Vec<usize> = (0..k.values.len()).filter(|i| matches!(k.values[*i], AbiValue::Uint(_))).collect();
        let addresses: Vec<usize> =
            (0..k.values.len()).filter(|i| matches!(k.values[*i], AbiValue::Address(_))).collect();
        let set = |i: usize, v: AbiValue| {
            let mut vals = k.values.clone();
            vals[i] = v;
            reencode(&k, vals)
        };
        let uint = |i: usize| match k.values[i] {
            AbiValue::Uint(x) => x,
            _ => U256::zero(),
        };
        for &i in &numeric {
            let locus = format!("args.{i}");
            if !uint(i).is_zero() {
                out.push((with_input(t, set(i, AbiValue::Uint(U256::zero()))), Strategy::ValueZero, locus.clone()));
            }
            if uint(i) != huge() {
                out.push((with_input(t, set(i, AbiValue::Uint(huge()))), Strategy::ValueHuge, locus));
            }
        }
        if let Some(&i) = numeric.choose(rng) {
            let x = uint(i);
            out.push((with_input(t, set(i, AbiValue::Uint(flip_bit(x, rng)))), Strategy::BitFlip, format!("args.{i}")));
            out.push((
                with_input(t, set(i, AbiValue::Uint(arithmetic(x, rng)))),
                Strategy::Arithmetic,
                format!("args.{i}"),
            ));
        }
        for &i in &addresses {
            if let Some(a) = attackers.choose(rng) {
                if k.values[i] != AbiValue::Address(*a) {
                    out.push((
                        with_input(t, set(i, AbiValue::Address(*a))),
                        Strategy::AddressReplace,
                        format!("args.{i}"),
                    ));
                }
            }
        }
    } else if let Ok(bytes) = inputdata_bytes(&t.inputdata) {
        // Unknown selector: classify raw words by their shape.
        let words: Vec<&[u8]> = bytes.get(4..).unwrap_or_default().chunks(32).filter(|w| w.len() == 32).collect();
        if let Some((i, w)) = words.iter().enumerate().collect::<Vec<_>>().choose(rng).copied() {
            let locus = format!("words.{i}");
            let mut patched = bytes.clone();
            match infer_field_semantics("", &hex::encode(w)) {
                FieldSemantics::Address => {
                    if let Some(a) = attackers.choose(rng) {
                        patched[4 + 32 * i..4 + 32 * (i + 1)].copy_from_slice(&a.to_word());
                        out.push((
                            with_input(t, format!("0x{}", hex::encode(&patched))),
                            Strategy::AddressReplace,
                            locus,
                        ));
                    }
                }
                _ => {
                    let x = flip_bit(U256::from_big_endian(w), rng);
                    let mut word = [0u8; 32];
                    x.to_big_endian(&mut word);
                    patched[4 + 32 * i..4 + 32 * (i + 1)].copy_from_slice(&word);
                    out.push((with_input(t, format!("0x{}", hex::encode(&patched))), Strategy::BitFlip, locus));
                }
            }
        }
    }

    let prefix_len = if t.inputdata.starts_with("0x") || t.inputdata.starts_with("0X") { 2 } else { 0 };
    let (prefix, body) = t.inputdata.split_at(prefix_len);
    if let Some(edited) = char_edit(body, HEX, rng) {
        out.push((with_input(t, format!("{prefix}{edited}")), Strategy::CharEdit, "inputdata".into()));
    }
    let injected = insert_char(body, illegal_char(rng), rng);
    out.push((with_input(t, format!("{prefix}{injected}")), Strategy::IllegalEncoding, "inputdata".into()));
    out
}

fn tx_format(t: &TransactionSeed, rng: &mut impl Rng) -> Vec<Raw> {
    let mut out: Vec<Raw> = Vec::new();
    let input = t.inputdata.trim();
    if input.is_empty() {
        return out;
    }
    if let Some(stripped) = input.strip_prefix("0x").or_else(|| input.strip_prefix("0X")) {
        out.push((with_input(t, stripped.to_string()), Strategy::PrefixStrip, "inputdata".into()));
    }
    let Ok(bytes) = inputdata_bytes(input) else { return out };
    if let Some(text) = decimal_rendering(&bytes) {
        out.push((with_input(t, text), Strategy::HexToDecimal, "inputdata".into()));
    }
    if let Some(k) = known_call(t) {
        let slots = flat_head_slots(&k.types).map(|s| s.len()).unwrap_or(0);
        let words: Vec<[u8; 32]> =
            bytes[4..].chunks(32).filter(|w| w.len() == 32).map(|w| w.try_into().expect("32 bytes")).collect();
        let candidates: Vec<(usize, usize)> = (0..slots.min(words.len()))
            .flat_map(|i| (i + 1..slots.min(words.len())).map(move |j| (i, j)))
            .filter(|(i, j)| words[*i] != words[*j])
            .collect();
        if let Some(&(i, j)) = candidates.choose(rng) {
            let mut swapped = bytes.clone();
            swapped[4 + 32 * i..4 + 32 * (i + 1)].copy_from_slice(&words[j]);
            swapped[4 + 32 * j..4 + 32 * (j + 1)].copy_from_slice(&words[i]);
            out.push((
                with_input(t, format!("0x{}", hex::encode(swapped))),
                Strategy::ParamSwap,
                format!("args.{i},{j}"),
            ));
        }
    }
    out
}

/// Selector followed by one token per word, numeric parameter slots
/// written in decimal. `None` when the function has no numeric slot.
fn decimal_rendering(bytes: &[u8]) -> Option<String> {
    if bytes.len() < 4 || !(bytes.len() - 4).is_multiple_of(32) {
        return None;
    }
    let f = FunctionCatalog::bundled().lookup(&bytes[..4])?;
    let numeric: Vec<bool> = flat_head_slots(&f.params)?.iter().map(|t| t.is_numeric()).collect();
    if !numeric.iter().any(|n| *n) {
        return None;
    }
    let mut text = format!("0x{}", hex::encode(&bytes[..4]));
    for (i, w) in bytes[4..].chunks(32).enumerate() {
        text.push(' ');
        if numeric.get(i).copied().unwrap_or(false) {
            text.push_str(&decimal_token(U256::from_big_endian(w)));
        } else {
            text.push_str(&hex::encode(w));
        }
    }
    Some(text)
}

// ---------------------------------------------------------------------------
// Messages

fn with_payload(m: &MessageSeed, payload: MessagePayload) -> SeedBody {
    SeedBody::Message(MessageSeed { payload, ..m.clone() })
}

fn message_content(m: &MessageSeed, attackers: &[Address], rng: &mut impl Rng) -> Vec<Raw> {
    let mut out: Vec<Raw> = Vec::new();
    match &m.payload {
        MessagePayload::Hash { hash } => {
            let (prefix, body) = hash.split_at(if hash.starts_with("0x") { 2 } else { 0 });
            if let Some(e) = char_edit(body, HEX, rng) {
                out.push((
                    with_payload(m, MessagePayload::Hash { hash: format!("{prefix}{e}") }),
                    Strategy::CharEdit,
                    "hash".into(),
                ));
            }
            let injected = insert_char(body, illegal_char(rng), rng);
            out.push((
                with_payload(m, MessagePayload::Hash { hash: format!("{prefix}{injected}") }),
                Strategy::IllegalEncoding,
                "hash".into(),
            ));
        }
        MessagePayload::Personal(p) => {
            let personal = |challenge: String| {
                MessagePayload::Personal(PersonalSignPayload { challenge, address: p.address.clone() })
            };
            let body_start = if p.challenge.starts_with("0x") { 2 } else { 0 };
            if p.challenge.len() > body_start {
                // Drop one nibble.
                let i = rng.gen_range(body_start..p.challenge.len());
                let mut c = p.challenge.clone();
                c.remove(i);
                out.push((with_payload(m, personal(c)), Strategy::CharEdit, "challenge".into()));
            }
            if let Ok(mut bytes) = hex::decode(&p.challenge[body_start..]) {
                if !bytes.is_empty() {
                    let i = rng.gen_range(0..bytes.len());
                    bytes[i] ^= 1 << rng.gen_range(0..8);
                    out.push((
                        with_payload(m, personal(format!("0x{}", hex::encode(&bytes)))),
                        Strategy::BitFlip,
                        "challenge".into(),
                    ));
                }
            }
            if let crate::codec::DecodedChallenge::Text(text) = decode_challenge(&p.challenge) {
                let injected = insert_char(&text, illegal_char(rng), rng);
                out.push((
                    with_payload(m, personal(encode_challenge(&injected))),
                    Strategy::IllegalEncoding,
                    "challenge".into(),
                ));
            }
        }
        MessagePayload::TypedData { json } => out.extend(typed_content(m, json, attackers, rng)),
        MessagePayload::SignIn { text } => {
            let lines: Vec<String> = text.lines().map(str::to_string).collect();
            let sign_in = |lines: &[String]| with_payload(m, MessagePayload::SignIn { text: lines.join("\n") });
            if let Some(i) = lines.iter().position(|l| l.starts_with("Chain ID: ")) {
                if let Some(x) = parse_u256(lines[i].trim_start_matches("Chain ID: ").trim()) {
                    let mut l = lines.clone();
                    l[i] = format!("Chain ID: {}", arithmetic(x, rng));
                    out.push((sign_in(&l), Strategy::Arithmetic, "Chain ID".into()));
                }
            }
            if let (Some(a), true) = (attackers.choose(rng), lines.len() > 1) {
                let mut l = lines.clone();
                l[1] = a.to_string();
                out.push((sign_in(&l), Strategy::AddressReplace, "address".into()));
            }
            if let Some(i) = lines.iter().position(|l| l.starts_with("URI: ")) {
                if let Some(e) = char_edit(&lines[i]["URI: ".len()..], PRINTABLE, rng) {
                    let mut l = lines.clone();
                    l[i] = format!("URI: {e}");
                    out.push((sign_in(&l), Strategy::CharEdit, "URI".into()));
                }
            }
            if lines.len() > 3 {
                let mut l = lines.clone();
                l[3] = insert_char(&l[3], illegal_char(rng), rng);
                out.push((sign_in(&l), Strategy::IllegalEncoding, "statement".into()));
            }
        }
    }
    out
}

/// A typed-data leaf: (top-level key, path inside it, solidity type).
type Leaf = (String, String, String);

/// Numeric, address and string leaves of a typed-data document.
fn typed_leaves(json: &str) -> Option<(Value, Vec<Leaf>)> {
    let (p, _) = parse_eip712(json).ok()?;
    let mut leaves: Vec<(String, String, String)> =
        p.leaves().into_iter().map(|(path, ty, _)| ("message".to_string(), path, ty)).collect();
    if p.raw.get("domain").and_then(|d| d.get("chainId")).is_some() {
        leaves.push(("domain".into(), "chainId".into(), "uint256".into()));
    }
    Some((p.raw, leaves))
}

fn get_mut<'a>(doc: &'a mut Value, top: &str, path: &str) -> Option<&'a mut Value> {
    let mut cur = doc.get_mut(top)?;
    for part in path.split('.') {
        cur = match cur {
            Value::Object(o) => o.get_mut(part)?,
            Value::Array(a) => a.get_mut(part.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    Some(cur)
}

fn get<'a>(doc: &'a Value, top: &str, path: &str) -> Option<&'a Value> {
    let mut cur = doc.get(top)?;
    for part in path.split('.') {
        cur = match cur {
            Value::Object(o) => o.get(part)?,
            Value::Array(a) => a.get(part.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    Some(cur)
}

fn leaf_uint(v: &Value) -> Option<U256> {
    match v {
        Value::Number(n) => n.as_u64().map(U256::from),
        Value::String(s) => parse_u256(s),
        _ => None,
    }
}

fn typed_with(m: &MessageSeed, doc: &Value, top: &str, path: &str, v: Value) -> Option<SeedBody> {
    let mut d = doc.clone();
    *get_mut(&mut d, top, path)? = v;
    Some(with_payload(m, MessagePayload::TypedData { json: d.to_string() }))
}

/// Stand-in for an unpaired surrogate while building the document; it is
/// replaced by a `\ud800` escape in the final JSON text.
const SURROGATE_MARK: char = '\u{e000}';

fn typed_content(m: &MessageSeed, json: &str, attackers: &[Address], rng: &mut impl Rng) -> Vec<Raw> {
    let mut out: Vec<Raw> = Vec::new();
    let Some((doc, leaves)) = typed_leaves(json) else { return out };
    let of = |pred: &dyn Fn(&str) -> bool| -> Vec<(String, String)> {
        leaves.iter().filter(|(_, _, ty)| pred(ty)).map(|(t, p, _)| (t.clone(), p.clone())).collect()
    };
    let numeric: Vec<(String, String)> = of(&|ty| ty.starts_with("uint") || ty.starts_with("int"))
        .into_iter()
        .filter(|(t, p)| get(&doc, t, p).and_then(leaf_uint).is_some())
        .collect();
    let addresses = of(&|ty| ty == "address");
    let strings = of(&|ty| ty == "string");
    let locus = |t: &str, p: &str| format!("{t}.{p}");

    if let Some((t, p)) = numeric.choose(rng) {
        let x = get(&doc, t, p).and_then(leaf_uint).unwrap_or_default();
        let s = |x: U256| Value::String(x.to_string());
        for (strategy, v) in [
            (Strategy::ValueZero, U256::zero()),
            (Strategy::ValueHuge, huge()),
            (Strategy::BitFlip, flip_bit(x, rng)),
            (Strategy::Arithmetic, arithmetic(x, rng)),
        ] {
            if v != x {
                if let Some(b) = typed_with(m, &doc, t, p, s(v)) {
                    out.push((b, strategy, locus(t, p)));
                }
            }
        }
    }
    if let (Some((t, p)), Some(a)) = (addresses.choose(rng), attackers.choose(rng)) {
        if let Some(b) = typed_with(m, &doc, t, p, Value::String(a.to_string())) {
            out.push((b, Strategy::AddressReplace, locus(t, p)));
        }
    }
    if let Some((t, p)) = strings.choose(rng) {
        let s = get(&doc, t, p).and_then(Value::as_str).unwrap_or_default().to_string();
        if let Some(e) = char_edit(&s, PRINTABLE, rng) {
            if let Some(b) = typed_with(m, &doc, t, p, Value::String(e)) {
                out.push((b, Strategy::CharEdit, locus(t, p)));
            }
        }
        let surrogate = rng.gen_bool(0.5);
        let c = if surrogate { SURROGATE_MARK } else { illegal_char(rng) };
        if let Some(SeedBody::Message(mut msg)) = typed_with(m, &doc, t, p, Value::String(insert_char(&s, c, rng))) {
            if let MessagePayload::TypedData { json } = &mut msg.payload {
                *json = json.replace(SURROGATE_MARK, "\\ud800");
            }
            out.push((SeedBody::Message(msg), Strategy::IllegalEncoding, locus(t, p)));
        }
    }
    out
}

fn message_format(m: &MessageSeed, rng: &mut impl Rng) -> Vec<Raw> {
    let mut out: Vec<Raw> = Vec::new();
    match &m.payload {
        MessagePayload::Hash { hash } => {
            if let Some(s) = hash.strip_prefix("0x") {
                out.push((
                    with_payload(m, MessagePayload::Hash { hash: s.into() }),
                    Strategy::PrefixStrip,
                    "hash".into(),
                ));
            }
        }
        MessagePayload::Personal(p) => {
            if let Some(s) = p.challenge.strip_prefix("0x") {
                let payload = PersonalSignPayload { challenge: s.into(), address: p.address.clone() };
                out.push((
                    with_payload(m, MessagePayload::Personal(payload)),
                    Strategy::PrefixStrip,
                    "challenge".into(),
                ));
            }
            let swapped = PersonalSignPayload { challenge: p.address.clone(), address: p.challenge.clone() };
            out.push((
                with_payload(m, MessagePayload::Personal(swapped)),
                Strategy::ParamSwap,
                "challenge,address".into(),
            ));
        }
        MessagePayload::TypedData { json } => {
            let Some((doc, leaves)) = typed_leaves(json) else { return out };
            let addresses: Vec<&(String, String, String)> = leaves
                .iter()
                .filter(|(t, p, ty)| {
                    ty == "address" && get(&doc, t, p).and_then(Value::as_str).is_some_and(|s| s.starts_with("0x"))
                })
                .collect();
            if let Some((t, p, _)) = addresses.choose(rng) {
                let s = get(&doc, t, p).and_then(Value::as_str).unwrap_or_default();
                if let Some(b) = typed_with(m, &doc, t, p, Value::String(s[2..].to_string())) {
                    out.push((b, Strategy::PrefixStrip, format!("{t}.{p}")));
                }
            }
            if let Some((t, p, _)) = addresses.choose(rng) {
                let s = get(&doc, t, p).and_then(Value::as_str).unwrap_or_default();
                if let Some(a) = Address::parse_lenient(s) {
                    let dec = U256::from_big_endian(a.as_bytes()).to_string();
                    if let Some(b) = typed_with(m, &doc, t, p, Value::String(dec)) {
                        out.push((b, Strategy::HexToDecimal, format!("{t}.{p}")));
                    }
                }
            }
            let distinct: Vec<(&Leaf, &Leaf)> = addresses
                .iter()
                .enumerate()
                .flat_map(|(i, a)| addresses[i + 1..].iter().map(move |b| (*a, *b)))
                .filter(|(a, b)| get(&doc, &a.0, &a.1) != get(&doc, &b.0, &b.1))
                .collect();
            if let Some(((ta, pa, _), (tb, pb, _))) = distinct.choose(rng) {
                let mut d = doc.clone();
                let va = get(&doc, ta, pa).cloned().unwrap_or_default();
                let vb = get(&doc, tb, pb).cloned().unwrap_or_default();
                if let Some(x) = get_mut(&mut d, ta, pa) {
                    *x = vb;
                }
                if let Some(x) = get_mut(&mut d, tb, pb) {
                    *x = va;
                }
                out.push((
                    with_payload(m, MessagePayload::TypedData { json: d.to_string() }),
                    Strategy::ParamSwap,
                    format!("{ta}.{pa},{tb}.{pb}"),
                ));
            }
        }
        MessagePayload::SignIn { .. } => {}
    }
    out
}

// ---------------------------------------------------------------------------
// Interactions

fn with_data(i: &InteractionSeed, data: String) -> SeedBody {
    let mut s = i.clone();
    for step in &mut s.steps {
        if step.action == StepAction::Input {
            step.data = Some(data.clone());
        }
    }
    SeedBody::Interaction(s)
}

fn interaction_content(i: &InteractionSeed, attackers: &[Address], rng: &mut impl Rng) -> Vec<Raw> {
    let mut out: Vec<Raw> = Vec::new();
    let Some(data) = i.input_step().and_then(|s| s.data.clone()) else { return out };
    let locus = || "data".to_string();
    match i.data_type {
        DataType::IntegerAmount => {
            let x = parse_u256(&data).unwrap_or_default();
            for (strategy, v) in [
                (Strategy::ValueZero, U256::zero()),
                (Strategy::ValueHuge, huge()),
                (Strategy::BitFlip, flip_bit(x, rng)),
                (Strategy::Arithmetic, arithmetic(x, rng)),
            ] {
                if v.to_string() != data {
                    out.push((with_data(i, v.to_string()), strategy, locus()));
                }
            }
        }
        DataType::Address => {
            if let Some(a) = attackers.choose(rng) {
                out.push((with_data(i, a.to_string()), Strategy::AddressReplace, locus()));
            }
            if let Some(e) = char_edit(&data, HEX, rng) {
                out.push((with_data(i, e), Strategy::CharEdit, locus()));
            }
        }
        DataType::TokenName | DataType::EnsName | DataType::FreeText => {
            if let Some(e) = char_edit(&data, PRINTABLE, rng) {
                out.push((with_data(i, e), Strategy::CharEdit, locus()));
            }
            out.push((with_data(i, insert_char(&data, illegal_char(rng), rng)), Strategy::IllegalEncoding, locus()));
        }
    }
    out
}

fn interaction_format(i: &InteractionSeed) -> Vec<Raw> {
    let mut out: Vec<Raw> = Vec::new();
    if let Some(data) = i.input_step().and_then(|s| s.data.clone()) {
        if i.data_type == DataType::Address {
            if let Some(s) = data.strip_prefix("0x") {
                out.push((with_data(i, s.to_string()), Strategy::PrefixStrip, "data".into()));
            }
            if let Some(a) = Address::parse_lenient(&data) {
                out.push((
                    with_data(i, U256::from_big_endian(a.as_bytes()).to_string()),
                    Strategy::HexToDecimal,
                    "data".into(),
                ));
            }
        }
    }
    if let Some(input) = i.input_step() {
        if input.path.len() >= 2 {
            let mut route = input.path.clone();
            route.swap(0, 1);
            out.push((SeedBody::Interaction(rebuild(i, &route)), Strategy::PathReorder, "path".into()));
        }
    }
    out
}

/// The same interaction driven along `route` to its input element.
fn rebuild(i: &InteractionSeed, route: &[String]) -> InteractionSeed {
    let data = i.input_step().and_then(|s| s.data.clone());
    let submit = i
        .steps
        .iter()
        .skip_while(|s| s.action != StepAction::Input)
        .nth(1)
        .and_then(|s| s.target().map(str::to_string));
    let mut steps: Vec<Step> =
        (1..route.len()).map(|n| Step { path: route[..n].to_vec(), action: StepAction::Click, data: None }).collect();
    steps.push(Step { path: route.to_vec(), action: StepAction::Input, data });
    if let Some(s) = submit {
        let mut p = route[..route.len() - 1].to_vec();
        p.push(s);
        steps.push(Step { path: p, action: StepAction::Click, data: None });
    }
    InteractionSeed { steps, ..i.clone() }
}

// ---------------------------------------------------------------------------
// Normalization

/// Canonical text of a seed payload. Two payloads a wallet should treat
/// identically normalize to the same string.
pub fn normalize_payload(body: &SeedBody) -> String {
    match body {
        SeedBody::Transaction(t) => {
            let input = if t.inputdata.trim().is_empty() {
                String::new()
            } else {
                normalize_inputdata(&t.inputdata).unwrap_or_else(|_| format!("raw:{}", t.inputdata))
            };
            serde_json::json!({
                "from": t.from, "to": t.to, "value": t.value, "gasPrice": t.gas_price,
                "chainId": t.chain_id, "inputdata": input,
            })
            .to_string()
        }
        SeedBody::Message(m) => {
            let payload = match &m.payload {
                MessagePayload::Hash { hash } => {
                    let h = hash.trim();
                    let body = h.strip_prefix("0x").or_else(|| h.strip_prefix("0X")).unwrap_or(h);
                    format!("hash:0x{}", body.to_ascii_lowercase())
                }
                MessagePayload::Personal(p) => {
                    let addr =
                        Address::parse_lenient(&p.address).map(|a| a.to_string()).unwrap_or_else(|| p.address.clone());
                    format!(
                        "personal:{}|{addr}",
                        serde_json::to_string(&decode_challenge(&p.challenge)).expect("serializes")
                    )
                }
                MessagePayload::TypedData { json } => match parse_eip712(json) {
                    Ok((p, _)) => format!("typed:{}", p.canonical()),
                    Err(_) => format!("typed-raw:{json}"),
                },
                MessagePayload::SignIn { text } => match parse_eip4361(text) {
                    Ok((p, _)) => format!("siwe:{}", serde_json::to_string(&p).expect("serializes")),
                    Err(_) => format!("siwe-raw:{}", text.lines().map(str::trim).collect::<Vec<_>>().join("\n")),
                },
            };
            format!(
                "{}|{}|{}|{}|{payload}",
                serde_json::to_string(&m.format).expect("serializes"),
                m.signing_method,
                m.connected_network,
                m.connected_uri
            )
        }
        SeedBody::Interaction(i) => {
            let steps: Vec<String> = i
                .steps
                .iter()
                .map(|s| {
                    let data = s.data.as_deref().map(|d| typecast_interaction(i.data_type, d)).unwrap_or_default();
                    format!("{:?}:{}:{data}", s.action, s.path.join("/"))
                })
                .collect();
            format!("{}|{}", i.expected_semantics, steps.join(";"))
        }
    }
}

/// Typed reading of interaction input, as a type-aware wallet would store it.
pub fn typecast_interaction(dt: DataType, data: &str) -> String {
    match dt {
        DataType::Address => typecast_address(&Value::String(data.to_string()))
            .map(|a| a.to_string())
            .unwrap_or_else(|| data.to_string()),
        DataType::IntegerAmount => parse_u256(data.trim()).map(|x| x.to_string()).unwrap_or_else(|| data.to_string()),
        _ => data.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::Strategy;
    use super::*;
    use crate::chain::NetworkId;
    use crate::codec::{DataFormat, SigningMethod};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transfer(value: u64) -> Seed {
        let input = encode_call(
            "transfer(address,uint256)",
            &[AbiValue::Address(Address([0x22; 20])), AbiValue::Uint(U256::from(500u64))],
        );
        Seed::new(
            "seed-0042",
            SeedOrigin::Mempool,
            SeedBody::Transaction(TransactionSeed {
                from: Address([1; 20]),
                to: Address([0xaa; 20]),
                value: Amount::from_u64(value),
                inputdata: format!("0x{}", hex::encode(input)),
                gas_price: Amount::from_u64(20),
                chain_id: NetworkId::TESTNET,
                signing_method: SigningMethod::EthSendTransactions,
                context: Vec::new(),
            }),
        )
    }

    fn attackers() -> Vec<Address> {
        vec![Address([0xde; 20])]
    }

    #[test]
    fn field_semantics() {
        assert_eq!(infer_field_semantics("value", "1000000000000000000"), FieldSemantics::Amount);
        let word = format!("{}{}", "0".repeat(24), "ab".repeat(20));
        assert_eq!(infer_field_semantics("", &word), FieldSemantics::Address);
        assert_eq!(infer_field_semantics("memo", "gm"), FieldSemantics::Text);
        assert_eq!(infer_field_semantics("data", "0xdeadbeef"), FieldSemantics::Bytes);
        assert_eq!(infer_field_semantics("memo", ""), FieldSemantics::Unknown);
    }

    #[test]
    fn value_mutants_zero_and_huge() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = mutate_content(&transfer(7), &attackers(), &mut rng);
        let values: Vec<U256> = m
            .iter()
            .filter(|(_, r)| r.locus == "value")
            .filter_map(|(b, _)| match b {
                SeedBody::Transaction(t) => Some(t.value.0),
                _ => None,
            })
            .collect();
        assert!(values.contains(&U256::zero()));
        assert!(values.contains(&pow2(255)));
        assert!(m.iter().all(|(_, r)| !r.semantics_preserving && r.parent_seed_id == "seed-0042"));
    }

    #[test]
    fn address_args_take_attacker() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = mutate_content(&transfer(0), &attackers(), &mut rng);
        let (body, _) = m.iter().find(|(_, r)| r.strategy == Strategy::AddressReplace).expect("address mutant");
        let t = match body {
            SeedBody::Transaction(t) => t,
            _ => unreachable!(),
        };
        let call = decode_call(&inputdata_bytes(&t.inputdata).unwrap()).unwrap();
        assert_eq!(call.addresses(), attackers());
    }

    #[test]
    fn prefix_strip_is_normalize_equal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let parent = transfer(0);
        let m = mutate_format(&parent, &mut rng);
        let strip = m.iter().find(|(_, r)| r.strategy == Strategy::PrefixStrip).expect("strip mutant");
        assert!(strip.1.semantics_preserving);
        assert_eq!(normalize_payload(&strip.0), normalize_payload(&parent.body));
        let dec = m.iter().find(|(_, r)| r.strategy == Strategy::HexToDecimal).expect("decimal mutant");
        match &dec.0 {
            SeedBody::Transaction(t) => assert!(t.inputdata.ends_with(" 500")),
            _ => unreachable!(),
        }
        let swap = m.iter().find(|(_, r)| r.strategy == Strategy::ParamSwap).expect("swap mutant");
        assert!(!swap.1.semantics_preserving);
    }

    #[test]
    fn personal_nibble_drop_and_swap() {
        let parent = Seed::new(
            "msg-0001",
            SeedOrigin::Template,
            SeedBody::Message(MessageSeed {
                format: DataFormat::TextString,
                signing_method: SigningMethod::PersonalSign,
                payload: MessagePayload::Personal(PersonalSignPayload {
                    challenge: encode_challenge("hello wallet"),
                    address: "0x5a0b54d5dc17e0aadc383d2db43b0a0d3e029c4c".into(),
                }),
                connected_network: NetworkId::TESTNET,
                connected_uri: "https://app.example.org".into(),
            }),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let content = mutate_content(&parent, &attackers(), &mut rng);
        let dropped = content.iter().find(|(_, r)| r.strategy == Strategy::CharEdit).unwrap();
        match &dropped.0 {
            SeedBody::Message(MessageSeed { payload: MessagePayload::Personal(p), .. }) => {
                assert_eq!(p.challenge.len(), encode_challenge("hello wallet").len() - 1)
            }
            _ => unreachable!(),
        }
        let format = mutate_format(&parent, &mut rng);
        assert!(format.iter().any(|(_, r)| r.strategy == Strategy::ParamSwap && !r.semantics_preserving));
    }

    #[test]
    fn path_reorder_swaps_leading_elements() {
        let seed = InteractionSeed {
            steps: vec![
                Step { path: vec!["swap".into()], action: StepAction::Click, data: None },
                Step { path: vec!["swap".into(), "bridge".into()], action: StepAction::Click, data: None },
                Step {
                    path: vec!["swap".into(), "bridge".into(), "bridge-amount".into()],
                    action: StepAction::Input,
                    data: Some("10".into()),
                },
            ],
            expected_semantics: "bridge-amount".into(),
            data_type: DataType::IntegerAmount,
        };
        let parent = Seed::new("ui-0001", SeedOrigin::Crawl, SeedBody::Interaction(seed));
        let m = mutate_format(&parent, &mut ChaCha8Rng::seed_from_u64(5));
        let (body, rec) = m.iter().find(|(_, r)| r.strategy == Strategy::PathReorder).unwrap();
        assert!(!rec.semantics_preserving);
        let i = match body {
            SeedBody::Interaction(i) => i,
            _ => unreachable!(),
        };
        assert_eq!(i.input_step().unwrap().path, ["bridge", "swap", "bridge-amount"]);
    }

    #[test]
    fn budget_and_lineage() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ms = mutate(&transfer(7), &attackers(), 4, &mut rng);
        assert_eq!(ms.len(), 4);
        for (i, m) in ms.iter().enumerate() {
            assert_eq!(m.id, format!("seed-0042-m{:02}", i + 1));
            assert_eq!(m.parent.as_deref(), Some("seed-0042"));
        }
    }

    proptest! {
        #[test]
        fn reproducible(seed in any::<u64>()) {
            let a = mutate(&transfer(7), &attackers(), 16, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = mutate(&transfer(7), &attackers(), 16, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn preserving_mutants_normalize_equal(seed in any::<u64>(), value in any::<u64>()) {
            let parent = transfer(value);
            for (body, rec) in mutate_format(&parent, &mut ChaCha8Rng::seed_from_u64(seed)) {
                if rec.semantics_preserving {
                    prop_assert_eq!(normalize_payload(&body), normalize_payload(&parent.body));
                }
            }
        }
    }
}
