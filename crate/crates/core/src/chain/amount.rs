//! Unsigned 256-bit amounts, signed deltas and decimal rendering.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use primitive_types::U256;

/// Amount wrapper that (de)serializes as a decimal string, or accepts a
/// JSON integer / `0x` hex string on input.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Amount(pub U256);

impl Amount {
    pub const ZERO: Amount = Amount(U256::zero());

    pub fn from_u64(v: u64) -> Self {
        Amount(U256::from(v))
    }

    pub fn parse(text: &str) -> Option<Self> {
        parse_u256(text).map(Amount)
    }
}

impl From<U256> for Amount {
    fn from(v: U256) -> Self {
        Amount(v)
    }
}

impl From<u64> for Amount {
    fn from(v: u64) -> Self {
        Amount(U256::from(v))
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        match &v {
            serde_json::Value::String(s) => {
                Amount::parse(s).ok_or_else(|| serde::de::Error::custom(format!("invalid amount `{s}`")))
            }
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(Amount::from_u64)
                .ok_or_else(|| serde::de::Error::custom(format!("invalid amount `{n}`"))),
            other => Err(serde::de::Error::custom(format!("invalid amount `{other}`"))),
        }
    }
}

/// Parses a decimal string or a `0x`-prefixed hex string into a U256.
pub fn parse_u256(text: &str) -> Option<U256> {
    let t = text.trim();
    if let Some(h) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        if h.is_empty() || h.len() > 64 || !h.bytes().all(|b| b.is_ascii_hexdigit()) {
            return None;
        }
        return U256::from_str_radix(h, 16).ok();
    }
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    U256::from_dec_str(t).ok()
}

/// 2^n as a U256, saturating at 2^255 for n ≥ 255.
pub fn pow2(n: u32) -> U256 {
    U256::one() << n.min(255)
}

/// Renders `raw` scaled down by `decimals`, trimming trailing zeros:
/// `format_units(1500, 3) == "1.5"`.
pub fn format_units(raw: U256, decimals: u32) -> String {
    if decimals == 0 {
        return raw.to_string();
    }
    let digits = raw.to_string();
    let d = decimals as usize;
    let (int_part, frac_part) = if digits.len() > d {
        let split = digits.len() - d;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        ("0".to_string(), format!("{}{}", "0".repeat(d - digits.len()), digits))
    };
    let frac = frac_part.trim_end_matches('0');
    if frac.is_empty() {
        int_part
    } else {
        format!("{int_part}.{frac}")
    }
}

/// Inverse of [`format_units`]. Rejects more fractional digits than
/// `decimals` allows.
pub fn parse_units(text: &str, decimals: u32) -> Option<U256> {
    let t = text.trim();
    let (int_part, frac_part) = match t.split_once('.') {
        Some((i, f)) => (i, f),
        None => (t, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if frac_part.len() > decimals as usize {
        return None;
    }
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let padded = format!(
        "{}{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part,
        "0".repeat(decimals as usize - frac_part.len())
    );
    U256::from_dec_str(&padded).ok()
}

/// A signed quantity used for balance deltas.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedAmount {
    pub negative: bool,
    pub magnitude: Amount,
}

impl SignedAmount {
    pub fn zero() -> Self {
        SignedAmount { negative: false, magnitude: Amount::ZERO }
    }

    pub fn positive(v: U256) -> Self {
        SignedAmount { negative: false, magnitude: Amount(v) }
    }

    pub fn negative(v: U256) -> Self {
        SignedAmount { negative: !v.is_zero(), magnitude: Amount(v) }
    }

    /// `after - before`.
    pub fn diff(before: U256, after: U256) -> Self {
        match after.cmp(&before) {
            Ordering::Greater => SignedAmount::positive(after - before),
            Ordering::Less => SignedAmount::negative(before - after),
            Ordering::Equal => SignedAmount::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude.0.is_zero()
    }

    pub fn signum(&self) -> i8 {
        if self.is_zero() {
            0
        } else if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn negated(self) -> Self {
        if self.is_zero() {
            self
        } else {
            SignedAmount { negative: !self.negative, magnitude: self.magnitude }
        }
    }

    /// Sum of two signed amounts; `None` on overflow.
    pub fn checked_add(self, other: SignedAmount) -> Option<SignedAmount> {
        if self.negative == other.negative {
            let m = self.magnitude.0.checked_add(other.magnitude.0)?;
            Some(SignedAmount { negative: self.negative && !m.is_zero(), magnitude: Amount(m) })
        } else if self.magnitude.0 >= other.magnitude.0 {
            let m = self.magnitude.0 - other.magnitude.0;
            Some(SignedAmount { negative: self.negative && !m.is_zero(), magnitude: Amount(m) })
        } else {
            let m = other.magnitude.0 - self.magnitude.0;
            Some(SignedAmount { negative: other.negative, magnitude: Amount(m) })
        }
    }

    /// `+1.5` / `-3` style rendering with the given decimals.
    pub fn format_units(&self, decimals: u32) -> String {
        let sign = if self.negative { "-" } else { "+" };
        format!("{sign}{}", format_units(self.magnitude.0, decimals))
    }
}

impl fmt::Debug for SignedAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.negative { "-" } else { "+" }, self.magnitude.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn format_trims_zeros() {
        assert_eq!(format_units(U256::from(1500u64), 3), "1.5");
        assert_eq!(format_units(U256::from(100u64) * U256::exp10(18), 18), "100");
        assert_eq!(format_units(U256::from(5u64), 3), "0.005");
        assert_eq!(format_units(U256::zero(), 18), "0");
        assert_eq!(format_units(U256::from(42u64), 0), "42");
    }

    #[test]
    fn parse_units_rejects_excess_precision() {
        assert_eq!(parse_units("1.5", 3), Some(U256::from(1500u64)));
        assert_eq!(parse_units("1.5555", 3), None);
        assert_eq!(parse_units("abc", 3), None);
        assert_eq!(parse_units(".5", 1), Some(U256::from(5u64)));
    }

    #[test]
    fn parse_u256_both_radixes() {
        assert_eq!(parse_u256("0xff"), Some(U256::from(255u64)));
        assert_eq!(parse_u256("255"), Some(U256::from(255u64)));
        assert_eq!(parse_u256("-1"), None);
        assert_eq!(parse_u256("0x"), None);
    }

    #[test]
    fn signed_addition() {
        let a = SignedAmount::positive(U256::from(5u64));
        let b = SignedAmount::negative(U256::from(7u64));
        let s = a.checked_add(b).unwrap();
        assert_eq!(s.signum(), -1);
        assert_eq!(s.magnitude.0, U256::from(2u64));
        assert!(a.checked_add(a.negated()).unwrap().is_zero());
    }

    proptest! {
        #[test]
        fn units_round_trip(raw in any::<u128>(), decimals in 0u32..=36) {
            let v = U256::from(raw);
            let text = format_units(v, decimals);
            prop_assert_eq!(parse_units(&text, decimals), Some(v));
        }
    }
}
