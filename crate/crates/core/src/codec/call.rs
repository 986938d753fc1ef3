//! Calldata decoding and semantic classification of called functions.

use serde::{Deserialize, Serialize};

use super::abi::{self, AbiType, AbiValue};
use super::catalog::{ApprovalKind, FunctionCatalog, FunctionFamily, KnownFunction};
use super::CodecError;
use crate::chain::{pow2, Address, U256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ArgKind {
    Address,
    Uint,
    Bytes,
    Bool,
    Array,
}

impl ArgKind {
    fn of(ty: &AbiType) -> ArgKind {
        match ty {
            AbiType::Address => ArgKind::Address,
            AbiType::Uint(_) | AbiType::Int(_) => ArgKind::Uint,
            AbiType::Bool => ArgKind::Bool,
            AbiType::Array(_) | AbiType::FixedArray(..) | AbiType::Tuple(_) => ArgKind::Array,
            _ => ArgKind::Bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedArg {
    pub kind: ArgKind,
    pub value: AbiValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedCall {
    pub selector: [u8; 4],
    /// `None` when the selector is absent from the catalog.
    pub function_name: Option<String>,
    pub signature: Option<String>,
    /// For unknown selectors, one `Bytes` argument per 32-byte word.
    pub args: Vec<DecodedArg>,
}

impl DecodedCall {
    pub fn is_known(&self) -> bool {
        self.function_name.is_some()
    }

    /// Every address appearing anywhere in the arguments.
    pub fn addresses(&self) -> Vec<Address> {
        let mut out = Vec::new();
        for a in &self.args {
            collect_addresses(&a.value, &mut out);
        }
        out
    }
}

fn collect_addresses(v: &AbiValue, out: &mut Vec<Address>) {
    match v {
        AbiValue::Address(a) => out.push(*a),
        AbiValue::Array(items) | AbiValue::Tuple(items) => items.iter().for_each(|i| collect_addresses(i, out)),
        _ => {}
    }
}

/// Decodes canonical calldata bytes using the bundled catalog.
pub fn decode_call(data: &[u8]) -> Result<DecodedCall, CodecError> {
    decode_call_with(FunctionCatalog::bundled(), data)
}

pub fn decode_call_with(catalog: &FunctionCatalog, data: &[u8]) -> Result<DecodedCall, CodecError> {
    if data.len() < 4 {
        return Err(CodecError::NoSelector);
    }
    let sel: [u8; 4] = data[..4].try_into().expect("4 bytes");
    let body = &data[4..];
    match catalog.lookup(&sel) {
        Some(f) => {
            let values =
                abi::decode(&f.params, body).map_err(|e| CodecError::BadArguments(f.name.clone(), e.to_string()))?;
            let args =
                f.params.iter().zip(values).map(|(t, v)| DecodedArg { kind: ArgKind::of(t), value: v }).collect();
            Ok(DecodedCall {
                selector: sel,
                function_name: Some(f.name.clone()),
                signature: Some(f.entry.signature.clone()),
                args,
            })
        }
        None => Ok(DecodedCall {
            selector: sel,
            function_name: None,
            signature: None,
            args: body
                .chunks(32)
                .map(|w| DecodedArg { kind: ArgKind::Bytes, value: AbiValue::Bytes(w.to_vec()) })
                .collect(),
        }),
    }
}

/// `selector ‖ abi(args)` for a catalog signature.
pub fn encode_call(signature: &str, args: &[AbiValue]) -> Vec<u8> {
    let mut out = crate::hash::selector(signature).to_vec();
    out.extend(abi::encode(args));
    out
}

pub fn classify_function(call: &DecodedCall) -> FunctionFamily {
    let catalog = FunctionCatalog::bundled();
    if let Some(f) = catalog.lookup(&call.selector) {
        return f.entry.family;
    }
    call.function_name.as_deref().map(classify_name).unwrap_or(FunctionFamily::Plain)
}

/// Classification by bare function name, for calls outside the catalog.
pub fn classify_name(name: &str) -> FunctionFamily {
    let catalog = FunctionCatalog::bundled();
    if catalog.is_deceptive_name(name) {
        return FunctionFamily::DeceptiveName;
    }
    let mut family = FunctionFamily::Plain;
    for f in catalog.functions() {
        if f.name.eq_ignore_ascii_case(name) && f.entry.family != FunctionFamily::Plain {
            family = f.entry.family;
        }
    }
    family
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "camelCase")]
pub enum ApprovalAmount {
    Amount(crate::chain::Amount),
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ApprovalSemantics {
    pub kind: ApprovalKind,
    pub spender: Address,
    pub amount: ApprovalAmount,
    pub unlimited: bool,
}

/// `amount ≥ 2^255`, or `amount = 2^n − 1` for some `n ≥ 128`.
pub fn is_unlimited_amount(amount: U256) -> bool {
    if amount >= pow2(255) {
        return true;
    }
    let next = amount.overflowing_add(U256::one()).0;
    amount.bits() >= 128 && (next.is_zero() || (next & amount).is_zero())
}

impl ApprovalSemantics {
    pub fn new(kind: ApprovalKind, spender: Address, amount: ApprovalAmount) -> Self {
        let unlimited = match amount {
            ApprovalAmount::All => true,
            ApprovalAmount::Amount(a) => is_unlimited_amount(a.0),
        };
        ApprovalSemantics { kind, spender, amount, unlimited }
    }
}

pub fn approval_semantics(call: &DecodedCall) -> Option<ApprovalSemantics> {
    let f = FunctionCatalog::bundled().lookup(&call.selector)?;
    approval_from_layout(f, call)
}

fn approval_from_layout(f: &KnownFunction, call: &DecodedCall) -> Option<ApprovalSemantics> {
    let layout = f.entry.approval.as_ref()?;
    let values: Vec<AbiValue> = call.args.iter().map(|a| a.value.clone()).collect();
    let spender = match resolve_path(&values, &layout.spender).first()? {
        AbiValue::Address(a) => *a,
        _ => return None,
    };
    let amount = if let Some(path) = &layout.approved {
        // Revoking an operator grants nothing; it is reported as a zero
        // amount rather than `All`.
        match resolve_path(&values, path).first()? {
            AbiValue::Bool(true) => ApprovalAmount::All,
            _ => ApprovalAmount::Amount(crate::chain::Amount::ZERO),
        }
    } else {
        let path = layout.amount.as_ref()?;
        let max = resolve_path(&values, path)
            .into_iter()
            .filter_map(|v| match v {
                AbiValue::Uint(x) => Some(*x),
                _ => None,
            })
            .max()
            .unwrap_or_default();
        ApprovalAmount::Amount(crate::chain::Amount(max))
    };
    Some(ApprovalSemantics::new(layout.kind, spender, amount))
}

fn resolve_path<'a>(values: &'a [AbiValue], path: &str) -> Vec<&'a AbiValue> {
    let mut current: Vec<&AbiValue> = Vec::new();
    let mut parts = path.split('.');
    let Some(first) = parts.next().and_then(|p| p.parse::<usize>().ok()) else {
        return current;
    };
    if let Some(v) = values.get(first) {
        current.push(v);
    }
    for part in parts {
        let mut next = Vec::new();
        for v in current {
            let items = match v {
                AbiValue::Tuple(items) | AbiValue::Array(items) => items,
                _ => continue,
            };
            if part == "*" {
                next.extend(items.iter());
            } else if let Some(i) = part.parse::<usize>().ok().and_then(|i| items.get(i)) {
                next.push(i);
            }
        }
        current = next;
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::keccak256;

    fn word_addr(a: &Address) -> String {
        format!("{}{}", "0".repeat(24), hex::encode(a.0))
    }

    #[test]
    fn approve_hand_encoded() {
        // Oracle: selector from the raw hash, arguments padded by hand.
        let sel = &keccak256(b"approve(address,uint256)")[..4];
        let spender = Address([0x5e; 20]);
        let data = hex::decode(format!("{}{}{:064x}", hex::encode(sel), word_addr(&spender), 100)).unwrap();
        let call = decode_call(&data).unwrap();
        assert_eq!(call.function_name.as_deref(), Some("approve"));
        assert_eq!(call.args[0].value, AbiValue::Address(spender));
        assert_eq!(call.args[1].value, AbiValue::Uint(U256::from(100u64)));
        let s = approval_semantics(&call).unwrap();
        assert_eq!(s.kind, ApprovalKind::Approve);
        assert!(!s.unlimited);
    }

    #[test]
    fn max_uint_approve_is_unlimited() {
        let data =
            encode_call("approve(address,uint256)", &[AbiValue::Address(Address([1; 20])), AbiValue::Uint(U256::MAX)]);
        assert!(approval_semantics(&decode_call(&data).unwrap()).unwrap().unlimited);
    }

    #[test]
    fn set_approval_for_all_true() {
        let sel = &keccak256(b"setApprovalForAll(address,bool)")[..4];
        let op = Address([0x0b; 20]);
        let data = hex::decode(format!("{}{}{:064x}", hex::encode(sel), word_addr(&op), 1)).unwrap();
        let call = decode_call(&data).unwrap();
        assert_eq!(call.args[1].value, AbiValue::Bool(true));
        let s = approval_semantics(&call).unwrap();
        assert_eq!(s.amount, ApprovalAmount::All);
        assert!(s.unlimited);
    }

    #[test]
    fn unknown_selector_and_short_input() {
        let call = decode_call(&[0xde, 0xad, 0xbe, 0xef, 1, 2]).unwrap();
        assert!(call.function_name.is_none());
        assert_eq!(classify_function(&call), FunctionFamily::Plain);
        assert_eq!(decode_call(&[1, 2, 3]), Err(CodecError::NoSelector));
    }

    #[test]
    fn classification_examples() {
        let call = decode_call(&encode_call("claimRewards()", &[])).unwrap();
        assert_eq!(classify_function(&call), FunctionFamily::DeceptiveName);
        assert_eq!(classify_name("ClaimRewards"), FunctionFamily::DeceptiveName);
        assert_eq!(classify_name("bulkExecute"), FunctionFamily::NftListing);
        let t =
            encode_call("transfer(address,uint256)", &[AbiValue::Address(Address::ZERO), AbiValue::Uint(U256::one())]);
        assert_eq!(classify_function(&decode_call(&t).unwrap()), FunctionFamily::Plain);
    }

    #[test]
    fn unlimited_threshold() {
        assert!(is_unlimited_amount(U256::MAX));
        assert!(is_unlimited_amount(pow2(255)));
        assert!(is_unlimited_amount(pow2(128) - 1));
        assert!(is_unlimited_amount(pow2(160) - 1));
        assert!(!is_unlimited_amount(pow2(127) - 1));
        assert!(!is_unlimited_amount(pow2(200)));
        assert!(!is_unlimited_amount(U256::from(100u64)));
    }

    #[test]
    fn permit2_batch_takes_largest_amount() {
        let spender = Address([9; 20]);
        let detail = |amt: u64| {
            AbiValue::Tuple(vec![
                AbiValue::Address(Address([7; 20])),
                AbiValue::Uint(U256::from(amt)),
                AbiValue::Uint(U256::zero()),
                AbiValue::Uint(U256::zero()),
            ])
        };
        let data = encode_call(
            "permit(address,((address,uint160,uint48,uint48)[],address,uint256),bytes)",
            &[
                AbiValue::Address(Address([1; 20])),
                AbiValue::Tuple(vec![
                    AbiValue::Array(vec![detail(5), detail(500)]),
                    AbiValue::Address(spender),
                    AbiValue::Uint(U256::zero()),
                ]),
                AbiValue::Bytes(vec![0xaa; 65]),
            ],
        );
        let s = approval_semantics(&decode_call(&data).unwrap()).unwrap();
        assert_eq!(s.kind, ApprovalKind::Permit2Batch);
        assert_eq!(s.spender, spender);
        assert_eq!(s.amount, ApprovalAmount::Amount(crate::chain::Amount::from_u64(500)));
    }
}
