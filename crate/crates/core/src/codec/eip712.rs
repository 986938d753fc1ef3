//! Typed structured data (`eth_signTypedData_v4`) parsing.
//!
//! Parsing is tolerant: structural problems are reported as violations and
//! the payload is still returned whenever the top level is a JSON object,
//! because the verifier needs to reason about partially invalid requests.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::call::{ApprovalAmount, ApprovalSemantics};
use super::catalog::ApprovalKind;
use super::CodecError;
use crate::chain::{parse_u256, Address, Amount, NetworkId, U256};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypedField {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Eip712Domain {
    pub name: Option<String>,
    pub version: Option<String>,
    pub salt: Option<String>,
    /// Parsed chain id, when the raw value is a positive integer.
    pub chain_id: Option<NetworkId>,
    pub chain_id_raw: Option<Value>,
    pub verifying_contract: Option<Address>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Eip712Payload {
    pub types: BTreeMap<String, Vec<TypedField>>,
    pub primary_type: String,
    pub domain: Eip712Domain,
    pub message: Value,
    /// The document as received.
    pub raw: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    #[serde(rename = "missing-field")]
    MissingField,
    #[serde(rename = "invalid-chainId")]
    InvalidChainId,
    #[serde(rename = "invalid-type")]
    InvalidType,
    #[serde(rename = "invalid-uri")]
    InvalidUri,
    #[serde(rename = "nonstandard-field")]
    NonstandardField,
    #[serde(rename = "unknown-primary-type")]
    UnknownPrimaryType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Info,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub field: String,
    pub severity: Severity,
}

impl Violation {
    pub fn error(kind: ViolationKind, field: &str) -> Self {
        Violation { kind, field: field.to_string(), severity: Severity::Error }
    }
}

pub const REQUIRED_DOMAIN_FIELDS: [&str; 4] = ["name", "version", "chainId", "verifyingContract"];

pub fn parse_eip712(text: &str) -> Result<(Eip712Payload, Vec<Violation>), CodecError> {
    let raw: Value = serde_json::from_str(text).map_err(|_| CodecError::MalformedJson)?;
    let Value::Object(top) = &raw else {
        return Err(CodecError::MalformedJson);
    };
    let mut violations = Vec::new();
    let mut require = |key: &str| {
        if !top.contains_key(key) {
            violations.push(Violation::error(ViolationKind::MissingField, key));
        }
    };
    for k in ["types", "primaryType", "domain", "message"] {
        require(k);
    }

    let mut types = BTreeMap::new();
    if let Some(t) = top.get("types") {
        match serde_json::from_value::<BTreeMap<String, Vec<TypedField>>>(t.clone()) {
            Ok(map) => types = map,
            Err(_) => violations.push(Violation::error(ViolationKind::InvalidType, "types")),
        }
    }
    let primary_type = top.get("primaryType").and_then(Value::as_str).unwrap_or_default().to_string();
    if top.contains_key("primaryType") && !types.contains_key(&primary_type) {
        violations.push(Violation::error(ViolationKind::UnknownPrimaryType, "primaryType"));
    }

    let empty = Map::new();
    let dom = top.get("domain").and_then(Value::as_object).unwrap_or(&empty);
    if top.contains_key("domain") && !top["domain"].is_object() {
        violations.push(Violation::error(ViolationKind::InvalidType, "domain"));
    }
    let mut domain = Eip712Domain {
        name: dom.get("name").and_then(Value::as_str).map(str::to_string),
        version: dom.get("version").and_then(Value::as_str).map(str::to_string),
        salt: dom.get("salt").and_then(Value::as_str).map(str::to_string),
        ..Default::default()
    };
    let contract_key = if dom.contains_key("verifyingContract") {
        Some("verifyingContract")
    } else if dom.contains_key("verifyContract") {
        violations.push(Violation {
            kind: ViolationKind::NonstandardField,
            field: "domain.verifyContract".into(),
            severity: Severity::Info,
        });
        Some("verifyContract")
    } else {
        None
    };
    for field in REQUIRED_DOMAIN_FIELDS {
        let present = match field {
            "verifyingContract" => contract_key.is_some(),
            f => dom.contains_key(f),
        };
        if !present && top.contains_key("domain") {
            violations.push(Violation::error(ViolationKind::MissingField, &format!("domain.{field}")));
        }
    }
    for field in ["name", "version"] {
        if dom.get(field).is_some_and(|v| !v.is_string()) {
            violations.push(Violation::error(ViolationKind::InvalidType, &format!("domain.{field}")));
        }
    }
    if let Some(c) = dom.get("chainId") {
        domain.chain_id_raw = Some(c.clone());
        match chain_id_of(c) {
            Some(id) => domain.chain_id = Some(id),
            None => violations.push(Violation::error(ViolationKind::InvalidChainId, "domain.chainId")),
        }
    }
    if let Some(key) = contract_key {
        match dom.get(key).and_then(typecast_address) {
            Some(a) => domain.verifying_contract = Some(a),
            None => violations.push(Violation::error(ViolationKind::InvalidType, "domain.verifyingContract")),
        }
    }

    let message = top.get("message").cloned().unwrap_or(Value::Null);
    if top.contains_key("message") && !message.is_object() {
        violations.push(Violation::error(ViolationKind::InvalidType, "message"));
    }
    Ok((Eip712Payload { types, primary_type, domain, message, raw }, violations))
}

/// A chain id given as a JSON integer, a decimal string or a hex string.
pub fn chain_id_of(v: &Value) -> Option<NetworkId> {
    let n = match v {
        Value::Number(n) => n.as_u64()?,
        Value::String(s) => {
            let x = parse_u256(s)?;
            if x.bits() > 64 {
                return None;
            }
            x.low_u64()
        }
        _ => return None,
    };
    (n > 0).then_some(NetworkId(n))
}

/// Reads an address written as hex (any case, optional prefix) or as a
/// decimal integer.
pub fn typecast_address(v: &Value) -> Option<Address> {
    match v {
        Value::String(s) => Address::parse_lenient(s).or_else(|| {
            let t = s.trim();
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            address_from_u256(U256::from_dec_str(t).ok()?)
        }),
        Value::Number(n) => address_from_u256(U256::from(n.as_u64()?)),
        _ => None,
    }
}

fn address_from_u256(x: U256) -> Option<Address> {
    if x.bits() > 160 {
        return None;
    }
    let mut w = [0u8; 32];
    x.to_big_endian(&mut w);
    Address::from_slice(&w[12..])
}

fn typecast_uint(v: &Value) -> Option<U256> {
    match v {
        Value::Number(n) => n.as_u64().map(U256::from),
        Value::String(s) => parse_u256(s),
        _ => None,
    }
}

impl Eip712Payload {
    fn field_types(&self, type_name: &str) -> Option<&Vec<TypedField>> {
        self.types.get(type_name)
    }

    /// Value rewritten according to its declared type: addresses in
    /// canonical hex, integers as decimal strings, byte strings as
    /// lowercase `0x` hex. Values that cannot be read as their type are
    /// left untouched.
    pub fn typecast(&self, ty: &str, v: &Value) -> Value {
        if let Some(inner) =
            ty.strip_suffix("[]").or_else(|| ty.strip_suffix(']').and_then(|t| t.rfind('[').map(|i| &t[..i])))
        {
            return match v {
                Value::Array(items) => Value::Array(items.iter().map(|i| self.typecast(inner, i)).collect()),
                other => other.clone(),
            };
        }
        if let Some(fields) = self.field_types(ty) {
            let Value::Object(obj) = v else { return v.clone() };
            let mut out = Map::new();
            for (k, val) in obj {
                let fty = fields.iter().find(|f| &f.name == k).map(|f| f.ty.as_str());
                out.insert(k.clone(), fty.map(|t| self.typecast(t, val)).unwrap_or_else(|| val.clone()));
            }
            return Value::Object(out);
        }
        match ty {
            "address" => typecast_address(v).map(|a| Value::String(a.to_string())).unwrap_or_else(|| v.clone()),
            t if t.starts_with("uint") || t.starts_with("int") => {
                typecast_uint(v).map(|x| Value::String(x.to_string())).unwrap_or_else(|| v.clone())
            }
            t if t.starts_with("bytes") => match v {
                Value::String(s) => {
                    let body = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
                    if body.bytes().all(|b| b.is_ascii_hexdigit()) {
                        Value::String(format!("0x{}", body.to_ascii_lowercase()))
                    } else {
                        v.clone()
                    }
                }
                _ => v.clone(),
            },
            _ => v.clone(),
        }
    }

    /// The message with every value cast to its declared type.
    pub fn typed_message(&self) -> Value {
        self.typecast(&self.primary_type, &self.message)
    }

    /// Normal form used to compare two encodings of the same request.
    pub fn canonical(&self) -> Value {
        serde_json::json!({
            "types": self.types,
            "primaryType": self.primary_type,
            "domain": {
                "name": self.domain.name,
                "version": self.domain.version,
                "salt": self.domain.salt.as_ref().map(|s| s.to_ascii_lowercase()),
                "chainId": self.domain.chain_id.map(|c| c.0),
                "chainIdRaw": if self.domain.chain_id.is_none() { self.domain.chain_id_raw.clone() } else { None },
                "verifyingContract": self.domain.verifying_contract,
            },
            "message": self.typed_message(),
        })
    }

    /// Every address-typed value of the message.
    pub fn addresses(&self) -> Vec<Address> {
        let mut out = Vec::new();
        self.walk(&self.primary_type, &self.message, "", &mut |_, ty, v| {
            if ty == "address" {
                if let Some(a) = typecast_address(v) {
                    out.push(a);
                }
            }
        });
        out
    }

    /// Leaf fields of the message in document order as `(path, type, value)`.
    pub fn leaves(&self) -> Vec<(String, String, Value)> {
        let mut out = Vec::new();
        self.walk(&self.primary_type, &self.message, "", &mut |p, ty, v| {
            out.push((p.to_string(), ty.to_string(), v.clone()))
        });
        out
    }

    fn walk(&self, ty: &str, v: &Value, path: &str, f: &mut dyn FnMut(&str, &str, &Value)) {
        let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
        if let Some(inner) = ty.strip_suffix("[]") {
            if let Value::Array(items) = v {
                for (i, item) in items.iter().enumerate() {
                    self.walk(inner, item, &join(&i.to_string()), f);
                }
                return;
            }
        }
        if let (Some(fields), Value::Object(obj)) = (self.field_types(ty), v) {
            for (k, val) in obj {
                let fty = fields.iter().find(|fd| &fd.name == k).map(|fd| fd.ty.as_str()).unwrap_or("");
                self.walk(fty, val, &join(k), f);
            }
            return;
        }
        f(path, ty, v);
    }

    pub fn message_field(&self, path: &str) -> Option<&Value> {
        let mut cur = &self.message;
        for part in path.split('.') {
            cur = match cur {
                Value::Object(o) => o.get(part)?,
                Value::Array(a) => a.get(part.parse::<usize>().ok()?)?,
                _ => return None,
            };
        }
        Some(cur)
    }
}

/// Approval semantics of permit-style typed messages.
pub fn approval_semantics_typed(p: &Eip712Payload) -> Option<ApprovalSemantics> {
    let addr = |path: &str| p.message_field(path).and_then(typecast_address);
    let amount = |path: &str| p.message_field(path).and_then(typecast_uint);
    let (kind, spender, amt) = match p.primary_type.as_str() {
        "Permit" => (ApprovalKind::Permit, addr("spender")?, ApprovalAmount::Amount(Amount(amount("value")?))),
        "PermitSingle" => {
            (ApprovalKind::Permit2Single, addr("spender")?, ApprovalAmount::Amount(Amount(amount("details.amount")?)))
        }
        "PermitBatch" => {
            let details = p.message_field("details")?.as_array()?;
            let max = details.iter().filter_map(|d| d.get("amount").and_then(typecast_uint)).max().unwrap_or_default();
            (ApprovalKind::Permit2Batch, addr("spender")?, ApprovalAmount::Amount(Amount(max)))
        }
        "PermitForAll" => {
            let spender = addr("operator").or_else(|| addr("spender"))?;
            let approved = p.message_field("approved").and_then(Value::as_bool).unwrap_or(true);
            let amt = if approved { ApprovalAmount::All } else { ApprovalAmount::Amount(Amount::ZERO) };
            (ApprovalKind::PermitForAll, spender, amt)
        }
        _ => return None,
    };
    Some(ApprovalSemantics::new(kind, spender, amt))
}

/// Display role of a message field, used to decide which fields a wallet
/// shows and which ones a reader needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FieldRole {
    Sender,
    Recipient,
    Value,
    ChainId,
    TokenAddress,
}

impl FieldRole {
    pub const ALL: [FieldRole; 5] =
        [FieldRole::Sender, FieldRole::Recipient, FieldRole::Value, FieldRole::ChainId, FieldRole::TokenAddress];
}

/// Role of a dotted field path: the innermost segment with a known role wins.
pub fn field_role(path: &str) -> Option<FieldRole> {
    path.rsplit('.').find_map(|seg| match seg.to_ascii_lowercase().as_str() {
        "chainid" => Some(FieldRole::ChainId),
        "from" | "sender" | "owner" | "offerer" | "signer" => Some(FieldRole::Sender),
        "to" | "recipient" | "spender" | "operator" => Some(FieldRole::Recipient),
        "value" | "amount" | "startamount" | "endamount" => Some(FieldRole::Value),
        "token" | "verifyingcontract" | "contract" => Some(FieldRole::TokenAddress),
        _ => None,
    })
}
