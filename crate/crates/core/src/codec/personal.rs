//! `personal_sign` challenges: hex that should decode to readable text.

use serde::{Deserialize, Serialize};

use crate::chain::Address;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PersonalSignPayload {
    pub challenge: String,
    pub address: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeFailure {
    OddLength,
    NonHex,
    InvalidUtf8,
    /// Valid UTF-8 that contains control characters.
    Unreadable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", content = "value", rename_all = "camelCase")]
pub enum DecodedChallenge {
    Text(String),
    Failure(DecodeFailure),
}

impl DecodedChallenge {
    pub fn is_failure(&self) -> bool {
        matches!(self, DecodedChallenge::Failure(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersonalSignDecoded {
    pub text: DecodedChallenge,
    pub address: Option<Address>,
}

pub fn decode_personal_sign(payload: &PersonalSignPayload) -> PersonalSignDecoded {
    PersonalSignDecoded {
        text: decode_challenge(&payload.challenge),
        address: Address::parse_lenient(&payload.address),
    }
}

pub fn decode_challenge(challenge: &str) -> DecodedChallenge {
    let body = challenge.strip_prefix("0x").or_else(|| challenge.strip_prefix("0X")).unwrap_or(challenge);
    if !body.bytes().all(|b| b.is_ascii_hexdigit()) {
        return DecodedChallenge::Failure(DecodeFailure::NonHex);
    }
    if !body.len().is_multiple_of(2) {
        return DecodedChallenge::Failure(DecodeFailure::OddLength);
    }
    let bytes = hex::decode(body).expect("validated hex");
    match String::from_utf8(bytes) {
        Err(_) => DecodedChallenge::Failure(DecodeFailure::InvalidUtf8),
        Ok(s) if !is_readable(&s) => DecodedChallenge::Failure(DecodeFailure::Unreadable),
        Ok(s) => DecodedChallenge::Text(s),
    }
}

/// No control characters besides line breaks and tabs, and no replacement
/// characters.
pub fn is_readable(s: &str) -> bool {
    s.chars().all(|c| !(c.is_control() && !matches!(c, '\n' | '\r' | '\t')) && c != '\u{fffd}')
}

pub fn encode_challenge(text: &str) -> String {
    format!("0x{}", hex::encode(text.as_bytes()))
}
