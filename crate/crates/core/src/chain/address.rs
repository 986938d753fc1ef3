use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A 20-byte account or contract address.
///
/// The canonical text form is `0x` followed by 40 lowercase hex digits.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address(pub [u8; 20]);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid address `{0}`")]
pub struct AddressParseError(pub String);

impl Address {
    pub const ZERO: Address = Address([0u8; 20]);

    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        let arr: [u8; 20] = bytes.try_into().ok()?;
        Some(Address(arr))
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    /// The 32-byte ABI word holding this address: 12 zero bytes then the
    /// 20 address bytes.
    pub fn to_word(&self) -> [u8; 32] {
        let mut word = [0u8; 32];
        word[12..].copy_from_slice(&self.0);
        word
    }

    /// Lenient parse used wherever user-supplied text designates an address:
    /// optional `0x`/`0X` prefix, any case.
    pub fn parse_lenient(text: &str) -> Option<Self> {
        let t = text.trim();
        let body = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
        if body.len() != 40 {
            return None;
        }
        let bytes = hex::decode(body).ok()?;
        Address::from_slice(&bytes)
    }

    pub fn short(&self) -> String {
        let s = self.to_string();
        format!("{}…{}", &s[..6], &s[38..])
    }
}

impl FromStr for Address {
    type Err = AddressParseError;

    /// Strict parse: requires the `0x` prefix, accepts mixed case.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body =
            s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).ok_or_else(|| AddressParseError(s.to_string()))?;
        if body.len() != 40 {
            return Err(AddressParseError(s.to_string()));
        }
        let bytes = hex::decode(body).map_err(|_| AddressParseError(s.to_string()))?;
        Address::from_slice(&bytes).ok_or_else(|| AddressParseError(s.to_string()))
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_text_is_lowercase() {
        let a: Address = "0xD8dA6BF26964aF9D7eEd9e03E53415D37aA96045".parse().unwrap();
        assert_eq!(a.to_string(), "0xd8da6bf26964af9d7eed9e03e53415d37aa96045");
        assert_eq!(a.to_string().len(), 42);
    }

    #[test]
    fn strict_parse_requires_prefix() {
        assert!("d8da6bf26964af9d7eed9e03e53415d37aa96045".parse::<Address>().is_err());
        assert!(Address::parse_lenient("d8da6bf26964af9d7eed9e03e53415d37aa96045").is_some());
        assert!("0x1234".parse::<Address>().is_err());
    }

    #[test]
    fn word_padding_has_24_zero_nibbles() {
        let a = Address([0xab; 20]);
        let w = hex::encode(a.to_word());
        assert!(w.starts_with(&"0".repeat(24)));
        assert_eq!(&w[24..], "ab".repeat(20));
    }

    proptest! {
        #[test]
        fn text_round_trip(bytes in proptest::array::uniform20(any::<u8>())) {
            let a = Address(bytes);
            let back: Address = a.to_string().parse().unwrap();
            prop_assert_eq!(a, back);
            prop_assert_eq!(a.to_string().len(), 42);
        }
    }
}
