//! Normalization of loosely formatted inputdata text.
//!
//! Accepted forms: optional `0x`/`0X` prefix, any hex case, and tokens
//! separated by whitespace or commas. After the leading hex token, a
//! 64-character token is a hex word; an all-digit token sitting in a numeric
//! parameter slot of a catalog function is read as a decimal number.

use super::abi::flat_head_slots;
use super::catalog::FunctionCatalog;
use super::CodecError;
use crate::chain::U256;

pub fn normalize_inputdata(raw: &str) -> Result<String, CodecError> {
    normalize_with(FunctionCatalog::bundled(), raw)
}

pub fn normalize_with(catalog: &FunctionCatalog, raw: &str) -> Result<String, CodecError> {
    let text = raw.trim();
    let text = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")).unwrap_or(text);
    let mut tokens = text.split(|c: char| c.is_ascii_whitespace() || c == ',').filter(|t| !t.is_empty());
    let head = tokens.next().ok_or(CodecError::Unnormalizable)?;
    if head.len() % 2 != 0 || !head.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(CodecError::Unnormalizable);
    }
    let mut out = head.to_ascii_lowercase();
    let rest: Vec<&str> = tokens.collect();
    if rest.is_empty() {
        return Ok(format!("0x{out}"));
    }
    if out.len() < 8 || (out.len() - 8) % 64 != 0 {
        return Err(CodecError::Unnormalizable);
    }
    let sel = hex::decode(&out[..8]).map_err(|_| CodecError::Unnormalizable)?;
    let numeric: Vec<bool> = catalog
        .lookup(&sel)
        .and_then(|f| flat_head_slots(&f.params))
        .map(|slots| slots.iter().map(|t| t.is_numeric()).collect())
        .unwrap_or_default();
    for tok in rest {
        let slot = (out.len() - 8) / 64;
        if tok.len() == 64 && tok.bytes().all(|b| b.is_ascii_hexdigit()) {
            out.push_str(&tok.to_ascii_lowercase());
        } else if tok.bytes().all(|b| b.is_ascii_digit()) && numeric.get(slot).copied().unwrap_or(false) {
            let v = U256::from_dec_str(tok).map_err(|_| CodecError::Unnormalizable)?;
            out.push_str(&format!("{v:064x}"));
        } else {
            return Err(CodecError::Unnormalizable);
        }
    }
    Ok(format!("0x{out}"))
}

/// Canonical bytes of `raw`.
pub fn inputdata_bytes(raw: &str) -> Result<Vec<u8>, CodecError> {
    let canon = normalize_inputdata(raw)?;
    hex::decode(&canon[2..]).map_err(|_| CodecError::Unnormalizable)
}

/// Decimal rendering of a word for the textual form, padded so a 64-digit
/// number is never mistaken for a hex word.
pub fn decimal_token(v: U256) -> String {
    let s = v.to_string();
    if s.len() == 64 {
        format!("0{s}")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Address;
    use crate::codec::abi::AbiValue;
    use crate::codec::call::encode_call;
    use proptest::prelude::*;

    fn approve_hex(amount: U256) -> String {
        hex::encode(encode_call(
            "approve(address,uint256)",
            &[AbiValue::Address(Address([0xab; 20])), AbiValue::Uint(amount)],
        ))
    }

    #[test]
    fn case_and_prefix() {
        let h = approve_hex(U256::from(7u64));
        let canon = format!("0x{h}");
        assert_eq!(normalize_inputdata(&format!("0x{}", h.to_uppercase())).unwrap(), canon);
        assert_eq!(normalize_inputdata(&h).unwrap(), canon);
        assert_eq!(normalize_inputdata(&format!("0X{h}")).unwrap(), canon);
    }

    #[test]
    fn decimal_slot_matches_hex_rendering() {
        // Oracle: render the amount word in decimal by hand.
        let amount = U256::from(1_000_000_007u64);
        let h = approve_hex(amount);
        let (sel, spender) = (&h[..8], &h[8..72]);
        let mixed = format!("0x{sel} {spender} {amount}");
        assert_eq!(normalize_inputdata(&mixed).unwrap(), format!("0x{h}"));
        // Addresses are not numeric slots.
        let bad = format!("0x{sel} 123 {}", &h[72..]);
        assert_eq!(normalize_inputdata(&bad), Err(CodecError::Unnormalizable));
    }

    #[test]
    fn sixty_four_digit_decimal_needs_padding() {
        let amount = U256::from_dec_str(&"9".repeat(64)).unwrap();
        let h = approve_hex(amount);
        let tok = decimal_token(amount);
        assert_eq!(tok.len(), 65);
        let text = format!("{} {} {tok}", &h[..8], &h[8..72]);
        assert_eq!(normalize_inputdata(&text).unwrap(), format!("0x{h}"));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "0x", "0xabc", "0xzz", "hello", "0x12\u{1}34"] {
            assert_eq!(normalize_inputdata(bad), Err(CodecError::Unnormalizable), "{bad:?}");
        }
    }

    proptest! {
        #[test]
        fn idempotent(s in "(0x)?[0-9a-fA-F ,]{0,80}") {
            if let Ok(n) = normalize_inputdata(&s) {
                prop_assert_eq!(normalize_inputdata(&n).unwrap(), n);
            }
        }

        #[test]
        fn decimal_rendering_preserves_bytes(amount in any::<u128>(), hi in any::<u64>()) {
            let v = (U256::from(hi) << 128) | U256::from(amount);
            let h = approve_hex(v);
            let text = format!("{}, {}, {}", &h[..8], &h[8..72], decimal_token(v));
            prop_assert_eq!(normalize_inputdata(&text).unwrap(), format!("0x{h}"));
        }
    }
}
