//! Sign-In with Ethereum message text.

use serde::{Deserialize, Serialize};

use super::eip712::{Violation, ViolationKind};
use super::CodecError;
use crate::chain::{Address, NetworkId};

const HEADER_SUFFIX: &str = " wants you to sign in with your Ethereum account:";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Eip4361Payload {
    pub domain: String,
    /// Address line as written.
    pub address_raw: String,
    pub address: Option<Address>,
    pub statement: String,
    pub uri: String,
    pub version: String,
    pub chain_id_raw: String,
    pub chain_id: Option<NetworkId>,
    pub nonce: String,
    pub issued_at: String,
}

impl Eip4361Payload {
    pub fn render(&self) -> String {
        let mut s = format!("{}{HEADER_SUFFIX}\n{}\n\n", self.domain, self.address_raw);
        if !self.statement.is_empty() {
            s.push_str(&format!("{}\n\n", self.statement));
        }
        s.push_str(&format!(
            "URI: {}\nVersion: {}\nChain ID: {}\nNonce: {}\nIssued At: {}",
            self.uri, self.version, self.chain_id_raw, self.nonce, self.issued_at
        ));
        s
    }
}

pub fn parse_eip4361(text: &str) -> Result<(Eip4361Payload, Vec<Violation>), CodecError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(CodecError::MalformedSiwe)?;
    let domain = header.strip_suffix(HEADER_SUFFIX).ok_or(CodecError::MalformedSiwe)?.to_string();
    let address_raw = lines.next().ok_or(CodecError::MalformedSiwe)?.trim().to_string();
    let mut statement = Vec::new();
    let mut fields: Vec<(String, String)> = Vec::new();
    for line in lines {
        match line.split_once(": ") {
            Some((k, v)) if is_field_key(k) => fields.push((k.to_string(), v.to_string())),
            _ if fields.is_empty() && !line.is_empty() => statement.push(line),
            _ => {}
        }
    }
    let get = |k: &str| fields.iter().find(|(key, _)| key == k).map(|(_, v)| v.clone());
    let mut violations = Vec::new();
    let mut need = |k: &str| {
        let v = get(k);
        if v.is_none() {
            violations.push(Violation::error(ViolationKind::MissingField, k));
        }
        v.unwrap_or_default()
    };
    let uri = need("URI");
    let version = need("Version");
    let chain_id_raw = need("Chain ID");
    let nonce = need("Nonce");
    let issued_at = need("Issued At");

    let address = address_raw.parse::<Address>().ok();
    if address.is_none() {
        violations.push(Violation::error(ViolationKind::InvalidType, "address"));
    }
    let chain_id = chain_id_raw.trim().parse::<u64>().ok().filter(|n| *n > 0).map(NetworkId);
    if chain_id.is_none() && !chain_id_raw.is_empty() {
        violations.push(Violation::error(ViolationKind::InvalidChainId, "Chain ID"));
    }
    if !uri.is_empty() && url::Url::parse(&uri).is_err() {
        violations.push(Violation::error(ViolationKind::InvalidUri, "URI"));
    }
    Ok((
        Eip4361Payload {
            domain,
            address_raw,
            address,
            statement: statement.join("\n"),
            uri,
            version,
            chain_id_raw,
            chain_id,
            nonce,
            issued_at,
        },
        violations,
    ))
}

fn is_field_key(k: &str) -> bool {
    matches!(
        k,
        "URI" | "Version" | "Chain ID" | "Nonce" | "Issued At" | "Expiration Time" | "Not Before" | "Request ID"
    )
}

/// `scheme://host[:port]` of an absolute URI, lowercased.
pub fn uri_origin(uri: &str) -> Option<String> {
    let u = url::Url::parse(uri.trim()).ok()?;
    match u.origin() {
        url::Origin::Tuple(..) => Some(u.origin().ascii_serialization()),
        url::Origin::Opaque(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIWE: &str = "service.invalid wants you to sign in with your Ethereum account:
0xC02aaA39b223FE8D0A0e5C4F27eAD9083C756Cc2

I accept the ServiceOrg Terms of Service: https://service.invalid/tos

URI: https://service.invalid/login
Version: 1
Chain ID: 1
Nonce: 32891756
Issued At: 2021-09-30T16:25:24Z";

    #[test]
    fn parses_standard_message() {
        let (p, v) = parse_eip4361(SIWE).unwrap();
        assert!(v.is_empty(), "{v:?}");
        assert_eq!(p.domain, "service.invalid");
        assert_eq!(p.chain_id, Some(NetworkId(1)));
        assert_eq!(p.statement, "I accept the ServiceOrg Terms of Service: https://service.invalid/tos");
        let (q, _) = parse_eip4361(&p.render()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn reports_violations() {
        let text = SIWE.replace("Chain ID: 1", "Chain ID: banana").replace("URI: https://service.invalid/login\n", "");
        let (_, v) = parse_eip4361(&text).unwrap();
        assert!(v.iter().any(|x| x.kind == ViolationKind::InvalidChainId));
        assert!(v.iter().any(|x| x.kind == ViolationKind::MissingField && x.field == "URI"));
        assert_eq!(parse_eip4361("hello"), Err(CodecError::MalformedSiwe));
    }

    #[test]
    fn origins() {
        assert_eq!(uri_origin("https://Service.invalid/login").as_deref(), Some("https://service.invalid"));
        assert_eq!(uri_origin("https://service.invalid:443/x"), uri_origin("https://service.invalid/"));
        assert_ne!(uri_origin("https://evil.invalid/login"), uri_origin("https://service.invalid/login"));
        assert_eq!(uri_origin("not a uri"), None);
    }
}
