//! Minimal Solidity ABI: signature parsing plus head/tail encoding and
//! strict decoding of static and dynamic parameter types.

use std::fmt;

use crate::chain::{Address, U256};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AbiType {
    Address,
    Uint(u16),
    Int(u16),
    Bool,
    FixedBytes(u8),
    Bytes,
    String,
    Array(Box<AbiType>),
    FixedArray(Box<AbiType>, usize),
    Tuple(Vec<AbiType>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbiValue {
    Address(Address),
    Uint(U256),
    /// Two's-complement word.
    Int(U256),
    Bool(bool),
    FixedBytes(Vec<u8>),
    Bytes(Vec<u8>),
    String(String),
    Array(Vec<AbiValue>),
    Tuple(Vec<AbiValue>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AbiError {
    #[error("invalid signature `{0}`")]
    Signature(String),
    #[error("input too short at offset {0}")]
    Truncated(usize),
    #[error("dirty padding for {0} at offset {1}")]
    Padding(&'static str, usize),
    #[error("offset out of range at {0}")]
    Offset(usize),
    #[error("value does not match type {0}")]
    Mismatch(String),
    #[error("{0} unconsumed trailing bytes")]
    Trailing(usize),
}

impl AbiType {
    pub fn is_dynamic(&self) -> bool {
        match self {
            AbiType::Bytes | AbiType::String | AbiType::Array(_) => true,
            AbiType::FixedArray(inner, _) => inner.is_dynamic(),
            AbiType::Tuple(items) => items.iter().any(AbiType::is_dynamic),
            _ => false,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, AbiType::Uint(_) | AbiType::Int(_))
    }

    /// Size of the head slot in bytes.
    fn head_len(&self) -> usize {
        if self.is_dynamic() {
            return 32;
        }
        match self {
            AbiType::FixedArray(inner, n) => inner.head_len() * n,
            AbiType::Tuple(items) => items.iter().map(AbiType::head_len).sum(),
            _ => 32,
        }
    }

    pub fn parse(text: &str) -> Result<AbiType, AbiError> {
        let t = text.trim();
        let err = || AbiError::Signature(text.to_string());
        if let Some(stripped) = t.strip_suffix(']') {
            let open = stripped.rfind('[').ok_or_else(err)?;
            let inner = AbiType::parse(&stripped[..open])?;
            let dim = &stripped[open + 1..];
            return if dim.is_empty() {
                Ok(AbiType::Array(Box::new(inner)))
            } else {
                Ok(AbiType::FixedArray(Box::new(inner), dim.parse().map_err(|_| err())?))
            };
        }
        if t.starts_with('(') && t.ends_with(')') {
            let parts = split_top_level(&t[1..t.len() - 1]).ok_or_else(err)?;
            return Ok(AbiType::Tuple(parts.iter().map(|p| AbiType::parse(p)).collect::<Result<_, _>>()?));
        }
        let width = |s: &str, default: u16| -> Result<u16, AbiError> {
            if s.is_empty() {
                return Ok(default);
            }
            let w: u16 = s.parse().map_err(|_| err())?;
            if w == 0 || w > 256 || !w.is_multiple_of(8) {
                return Err(err());
            }
            Ok(w)
        };
        Ok(match t {
            "address" => AbiType::Address,
            "bool" => AbiType::Bool,
            "bytes" => AbiType::Bytes,
            "string" => AbiType::String,
            _ if t.starts_with("uint") => AbiType::Uint(width(&t[4..], 256)?),
            _ if t.starts_with("int") => AbiType::Int(width(&t[3..], 256)?),
            _ if t.starts_with("bytes") => {
                let n: u8 = t[5..].parse().map_err(|_| err())?;
                if n == 0 || n > 32 {
                    return Err(err());
                }
                AbiType::FixedBytes(n)
            }
            _ => return Err(err()),
        })
    }
}

impl fmt::Display for AbiType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbiType::Address => f.write_str("address"),
            AbiType::Uint(w) => write!(f, "uint{w}"),
            AbiType::Int(w) => write!(f, "int{w}"),
            AbiType::Bool => f.write_str("bool"),
            AbiType::FixedBytes(n) => write!(f, "bytes{n}"),
            AbiType::Bytes => f.write_str("bytes"),
            AbiType::String => f.write_str("string"),
            AbiType::Array(inner) => write!(f, "{inner}[]"),
            AbiType::FixedArray(inner, n) => write!(f, "{inner}[{n}]"),
            AbiType::Tuple(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn split_top_level(s: &str) -> Option<Vec<String>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        if depth < 0 {
            return None;
        }
        cur.push(c);
    }
    (depth == 0).then(|| {
        parts.push(cur);
        parts
    })
}

/// Splits `name(t1,t2,...)` into the name and parameter types.
pub fn parse_signature(sig: &str) -> Result<(String, Vec<AbiType>), AbiError> {
    let sig = sig.trim();
    let open = sig.find('(').ok_or_else(|| AbiError::Signature(sig.into()))?;
    let name = &sig[..open];
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(AbiError::Signature(sig.into()));
    }
    match AbiType::parse(&sig[open..])? {
        AbiType::Tuple(params) => Ok((name.to_string(), params)),
        _ => Err(AbiError::Signature(sig.into())),
    }
}

pub fn encode(values: &[AbiValue]) -> Vec<u8> {
    encode_sequence(values)
}

fn encode_sequence(values: &[AbiValue]) -> Vec<u8> {
    let head_total: usize = values.iter().map(value_head_len).sum();
    let mut head = Vec::with_capacity(head_total);
    let mut tail = Vec::new();
    for v in values {
        if value_is_dynamic(v) {
            head.extend_from_slice(&word_from_usize(head_total + tail.len()));
            tail.extend(encode_value(v));
        } else {
            head.extend(encode_value(v));
        }
    }
    head.extend(tail);
    head
}

fn value_is_dynamic(v: &AbiValue) -> bool {
    match v {
        AbiValue::Bytes(_) | AbiValue::String(_) | AbiValue::Array(_) => true,
        AbiValue::Tuple(items) => items.iter().any(value_is_dynamic),
        _ => false,
    }
}

fn value_head_len(v: &AbiValue) -> usize {
    if value_is_dynamic(v) {
        return 32;
    }
    match v {
        AbiValue::Tuple(items) => items.iter().map(value_head_len).sum(),
        _ => 32,
    }
}

fn encode_value(v: &AbiValue) -> Vec<u8> {
    match v {
        AbiValue::Address(a) => a.to_word().to_vec(),
        AbiValue::Uint(x) | AbiValue::Int(x) => u256_word(*x).to_vec(),
        AbiValue::Bool(b) => u256_word(U256::from(*b as u8)).to_vec(),
        AbiValue::FixedBytes(b) => {
            let mut w = [0u8; 32];
            w[..b.len().min(32)].copy_from_slice(&b[..b.len().min(32)]);
            w.to_vec()
        }
        AbiValue::Bytes(b) => encode_packed_bytes(b),
        AbiValue::String(s) => encode_packed_bytes(s.as_bytes()),
        AbiValue::Array(items) => {
            let mut out = word_from_usize(items.len()).to_vec();
            out.extend(encode_sequence(items));
            out
        }
        AbiValue::Tuple(items) => encode_sequence(items),
    }
}

fn encode_packed_bytes(b: &[u8]) -> Vec<u8> {
    let mut out = word_from_usize(b.len()).to_vec();
    out.extend_from_slice(b);
    let pad = (32 - b.len() % 32) % 32;
    out.extend(std::iter::repeat_n(0u8, pad));
    out
}

pub fn u256_word(x: U256) -> [u8; 32] {
    let mut w = [0u8; 32];
    x.to_big_endian(&mut w);
    w
}

fn word_from_usize(n: usize) -> [u8; 32] {
    u256_word(U256::from(n))
}

/// Decodes `data` against `types`. Trailing bytes beyond the last tail are
/// rejected, as is any dirty padding.
pub fn decode(types: &[AbiType], data: &[u8]) -> Result<Vec<AbiValue>, AbiError> {
    let (values, consumed) = decode_sequence(types, data, 0)?;
    let head: usize = types.iter().map(AbiType::head_len).sum();
    let end = consumed.max(head);
    if end < data.len() {
        return Err(AbiError::Trailing(data.len() - end));
    }
    Ok(values)
}

/// Returns the values and the furthest byte offset (relative to `base`)
/// touched by any tail.
fn decode_sequence(types: &[AbiType], data: &[u8], base: usize) -> Result<(Vec<AbiValue>, usize), AbiError> {
    let mut out = Vec::with_capacity(types.len());
    let mut pos = base;
    let mut furthest = base;
    for ty in types {
        if ty.is_dynamic() {
            let off = read_usize(data, pos)?;
            let start = base.checked_add(off).ok_or(AbiError::Offset(pos))?;
            if start > data.len() {
                return Err(AbiError::Offset(pos));
            }
            let (v, end) = decode_dynamic(ty, data, start)?;
            furthest = furthest.max(end);
            out.push(v);
            pos += 32;
        } else {
            let (v, end) = decode_static(ty, data, pos)?;
            furthest = furthest.max(end);
            out.push(v);
            pos = end;
        }
    }
    Ok((out, furthest.max(pos)))
}

fn decode_static(ty: &AbiType, data: &[u8], pos: usize) -> Result<(AbiValue, usize), AbiError> {
    match ty {
        AbiType::FixedArray(inner, n) => {
            let types = vec![(**inner).clone(); *n];
            let (vals, end) = decode_sequence(&types, data, pos)?;
            Ok((AbiValue::Array(vals), end))
        }
        AbiType::Tuple(items) => {
            let (vals, end) = decode_sequence(items, data, pos)?;
            Ok((AbiValue::Tuple(vals), end))
        }
        _ => {
            let w = read_word(data, pos)?;
            Ok((decode_word(ty, &w, pos)?, pos + 32))
        }
    }
}

fn decode_dynamic(ty: &AbiType, data: &[u8], start: usize) -> Result<(AbiValue, usize), AbiError> {
    match ty {
        AbiType::Bytes | AbiType::String => {
            let len = read_usize(data, start)?;
            let body = start + 32;
            let end = body.checked_add(len).ok_or(AbiError::Offset(start))?;
            if end > data.len() {
                return Err(AbiError::Truncated(body));
            }
            let bytes = data[body..end].to_vec();
            let padded = body + len.div_ceil(32) * 32;
            if padded > data.len() {
                return Err(AbiError::Truncated(end));
            }
            if data[end..padded].iter().any(|b| *b != 0) {
                return Err(AbiError::Padding("bytes", end));
            }
            let v = if matches!(ty, AbiType::String) {
                AbiValue::String(String::from_utf8(bytes).map_err(|_| AbiError::Mismatch("string".into()))?)
            } else {
                AbiValue::Bytes(bytes)
            };
            Ok((v, padded))
        }
        AbiType::Array(inner) => {
            let n = read_usize(data, start)?;
            if n > data.len() / 32 {
                return Err(AbiError::Truncated(start));
            }
            let types = vec![(**inner).clone(); n];
            let (vals, end) = decode_sequence(&types, data, start + 32)?;
            Ok((AbiValue::Array(vals), end))
        }
        AbiType::FixedArray(inner, n) => {
            let types = vec![(**inner).clone(); *n];
            let (vals, end) = decode_sequence(&types, data, start)?;
            Ok((AbiValue::Array(vals), end))
        }
        AbiType::Tuple(items) => {
            let (vals, end) = decode_sequence(items, data, start)?;
            Ok((AbiValue::Tuple(vals), end))
        }
        _ => decode_static(ty, data, start),
    }
}

fn decode_word(ty: &AbiType, w: &[u8; 32], pos: usize) -> Result<AbiValue, AbiError> {
    let x = U256::from_big_endian(w);
    match ty {
        AbiType::Address => {
            if w[..12].iter().any(|b| *b != 0) {
                return Err(AbiError::Padding("address", pos));
            }
            Ok(AbiValue::Address(Address::from_slice(&w[12..]).expect("20 bytes")))
        }
        AbiType::Uint(bits) => {
            if *bits < 256 && x.bits() > *bits as usize {
                return Err(AbiError::Padding("uint", pos));
            }
            Ok(AbiValue::Uint(x))
        }
        AbiType::Int(_) => Ok(AbiValue::Int(x)),
        AbiType::Bool => match x.low_u64() {
            0 if x.is_zero() => Ok(AbiValue::Bool(false)),
            1 if x.bits() == 1 => Ok(AbiValue::Bool(true)),
            _ => Err(AbiError::Padding("bool", pos)),
        },
        AbiType::FixedBytes(n) => {
            let n = *n as usize;
            if w[n..].iter().any(|b| *b != 0) {
                return Err(AbiError::Padding("bytesN", pos));
            }
            Ok(AbiValue::FixedBytes(w[..n].to_vec()))
        }
        other => Err(AbiError::Mismatch(other.to_string())),
    }
}

fn read_word(data: &[u8], pos: usize) -> Result<[u8; 32], AbiError> {
    let end = pos.checked_add(32).ok_or(AbiError::Truncated(pos))?;
    if end > data.len() {
        return Err(AbiError::Truncated(pos));
    }
    Ok(data[pos..end].try_into().expect("32 bytes"))
}

fn read_usize(data: &[u8], pos: usize) -> Result<usize, AbiError> {
    let x = U256::from_big_endian(&read_word(data, pos)?);
    if x.bits() > 32 {
        return Err(AbiError::Offset(pos));
    }
    Ok(x.low_u64() as usize)
}

/// Head slot layout of a parameter list: for each parameter, the byte
/// offset of its head word(s) and whether it is numeric. Only valid for
/// lists whose parameters all have 32-byte heads (elementary or dynamic).
pub fn flat_head_slots(types: &[AbiType]) -> Option<Vec<&AbiType>> {
    let mut out = Vec::new();
    for t in types {
        match t {
            AbiType::Tuple(items) if !t.is_dynamic() => out.extend(flat_head_slots(items)?),
            AbiType::FixedArray(..) if !t.is_dynamic() => return None,
            _ => out.push(t),
        }
    }
    Some(out)
}

/// Builds a value of type `ty` from JSON: numbers as JSON integers or
/// decimal/`0x` strings, byte strings as hex, tuples and arrays as lists.
pub fn value_from_json(ty: &AbiType, v: &serde_json::Value) -> Result<AbiValue, AbiError> {
    use serde_json::Value;
    let mismatch = || AbiError::Mismatch(format!("{ty:?}"));
    Ok(match (ty, v) {
        (AbiType::Address, Value::String(s)) => AbiValue::Address(s.parse().map_err(|_| mismatch())?),
        (AbiType::Uint(_) | AbiType::Int(_), Value::Number(n)) => {
            let x = U256::from(n.as_u64().ok_or_else(mismatch)?);
            if matches!(ty, AbiType::Int(_)) {
                AbiValue::Int(x)
            } else {
                AbiValue::Uint(x)
            }
        }
        (AbiType::Uint(_) | AbiType::Int(_), Value::String(s)) => {
            let x = crate::chain::parse_u256(s).ok_or_else(mismatch)?;
            if matches!(ty, AbiType::Int(_)) {
                AbiValue::Int(x)
            } else {
                AbiValue::Uint(x)
            }
        }
        (AbiType::Bool, Value::Bool(b)) => AbiValue::Bool(*b),
        (AbiType::FixedBytes(n), Value::String(s)) => {
            let b = hex::decode(s.trim_start_matches("0x")).map_err(|_| mismatch())?;
            if b.len() != *n as usize {
                return Err(mismatch());
            }
            AbiValue::FixedBytes(b)
        }
        (AbiType::Bytes, Value::String(s)) => {
            AbiValue::Bytes(hex::decode(s.trim_start_matches("0x")).map_err(|_| mismatch())?)
        }
        (AbiType::String, Value::String(s)) => AbiValue::String(s.clone()),
        (AbiType::Array(inner), Value::Array(items)) => {
            AbiValue::Array(items.iter().map(|i| value_from_json(inner, i)).collect::<Result<_, _>>()?)
        }
        (AbiType::FixedArray(inner, n), Value::Array(items)) if items.len() == *n => {
            AbiValue::Array(items.iter().map(|i| value_from_json(inner, i)).collect::<Result<_, _>>()?)
        }
        (AbiType::Tuple(types), Value::Array(items)) if items.len() == types.len() => {
            AbiValue::Tuple(types.iter().zip(items).map(|(t, i)| value_from_json(t, i)).collect::<Result<_, _>>()?)
        }
        _ => return Err(mismatch()),
    })
}
