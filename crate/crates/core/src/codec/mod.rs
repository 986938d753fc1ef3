//! Parsers, encoders and normalizers for transactions and signing requests.

pub mod abi;
pub mod call;
pub mod catalog;
pub mod eip4361;
pub mod eip712;
pub mod formats;
pub mod inputdata;
pub mod personal;

pub use call::{
    approval_semantics, classify_function, classify_name, decode_call, encode_call, is_unlimited_amount,
    ApprovalAmount, ApprovalSemantics, ArgKind, DecodedArg, DecodedCall,
};
pub use catalog::{ApprovalKind, FunctionCatalog, FunctionFamily};
pub use eip4361::{parse_eip4361, uri_origin, Eip4361Payload};
pub use eip712::{
    approval_semantics_typed, field_role, parse_eip712, Eip712Payload, FieldRole, Severity, Violation, ViolationKind,
};
pub use formats::{signing_method_for, signing_method_for_name, DataFormat, SigningMethod};
pub use inputdata::{decimal_token, inputdata_bytes, normalize_inputdata};
pub use personal::{
    decode_challenge, decode_personal_sign, encode_challenge, DecodeFailure, DecodedChallenge, PersonalSignPayload,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("unnormalizable")]
    Unnormalizable,
    #[error("no-selector")]
    NoSelector,
    #[error("arguments of {0} do not decode: {1}")]
    BadArguments(String, String),
    #[error("malformed-json")]
    MalformedJson,
    #[error("malformed sign-in message")]
    MalformedSiwe,
    #[error("unknown-format: {0}")]
    UnknownFormat(String),
    #[error("bad signature catalog: {0}")]
    BadCatalog(String),
}
