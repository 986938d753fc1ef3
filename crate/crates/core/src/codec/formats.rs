//! Message data formats and the signing method each one requires.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CodecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DataFormat {
    HashString,
    TextString,
    Eip191,
    Eip712,
    Eip4361,
    Transaction,
}

impl DataFormat {
    pub const ALL: [DataFormat; 6] = [
        DataFormat::HashString,
        DataFormat::TextString,
        DataFormat::Eip191,
        DataFormat::Eip712,
        DataFormat::Eip4361,
        DataFormat::Transaction,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DataFormat::HashString => "hash string",
            DataFormat::TextString => "text string",
            DataFormat::Eip191 => "EIP-191",
            DataFormat::Eip712 => "EIP-712",
            DataFormat::Eip4361 => "EIP-4361",
            DataFormat::Transaction => "transaction",
        }
    }
}

impl FromStr for DataFormat {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Ok(match key.as_str() {
            "hashstring" => DataFormat::HashString,
            "textstring" => DataFormat::TextString,
            "eip191" => DataFormat::Eip191,
            "eip712" => DataFormat::Eip712,
            "eip4361" => DataFormat::Eip4361,
            "transaction" => DataFormat::Transaction,
            _ => return Err(CodecError::UnknownFormat(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SigningMethod {
    #[serde(rename = "eth_sign")]
    EthSign,
    #[serde(rename = "personal_sign")]
    PersonalSign,
    #[serde(rename = "eth_signTypedData_v4")]
    EthSignTypedDataV4,
    /// Serialized with the plural spelling; the singular RPC name is
    /// accepted on input.
    #[serde(rename = "eth_sendTransactions", alias = "eth_sendTransaction")]
    EthSendTransactions,
}

impl SigningMethod {
    pub fn rpc_name(self) -> &'static str {
        match self {
            SigningMethod::EthSign => "eth_sign",
            SigningMethod::PersonalSign => "personal_sign",
            SigningMethod::EthSignTypedDataV4 => "eth_signTypedData_v4",
            SigningMethod::EthSendTransactions => "eth_sendTransactions",
        }
    }
}

impl fmt::Display for SigningMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rpc_name())
    }
}

impl FromStr for SigningMethod {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "eth_sign" => SigningMethod::EthSign,
            "personal_sign" => SigningMethod::PersonalSign,
            "eth_signTypedData_v4" => SigningMethod::EthSignTypedDataV4,
            "eth_sendTransactions" | "eth_sendTransaction" => SigningMethod::EthSendTransactions,
            _ => return Err(CodecError::UnknownFormat(s.to_string())),
        })
    }
}

/// Methods a format may be signed with.
pub fn signing_method_for(format: DataFormat) -> &'static [SigningMethod] {
    match format {
        DataFormat::HashString => &[SigningMethod::EthSign],
        DataFormat::TextString => &[SigningMethod::PersonalSign],
        DataFormat::Eip191 => &[SigningMethod::PersonalSign, SigningMethod::EthSign],
        DataFormat::Eip712 => &[SigningMethod::EthSignTypedDataV4],
        DataFormat::Eip4361 => &[SigningMethod::EthSignTypedDataV4],
        DataFormat::Transaction => &[SigningMethod::EthSendTransactions],
    }
}

/// Same lookup keyed by a format name such as `"EIP-191"`.
pub fn signing_method_for_name(format: &str) -> Result<&'static [SigningMethod], CodecError> {
    Ok(signing_method_for(format.parse()?))
}

pub fn is_valid_pair(format: DataFormat, method: SigningMethod) -> bool {
    signing_method_for(format).contains(&method)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alias_deserializes_to_plural() {
        let m: SigningMethod = serde_json::from_str("\"eth_sendTransaction\"").unwrap();
        assert_eq!(m, SigningMethod::EthSendTransactions);
        assert_eq!(serde_json::to_string(&m).unwrap(), "\"eth_sendTransactions\"");
    }

    #[test]
    fn unknown_format() {
        assert!(matches!(signing_method_for_name("EIP-9999"), Err(CodecError::UnknownFormat(_))));
        assert_eq!(signing_method_for_name("hash string").unwrap(), &[SigningMethod::EthSign]);
    }
}
