//! Function signature database (`functions/1`).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::abi::{parse_signature, AbiType};
use super::CodecError;
use crate::hash::selector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FunctionFamily {
    Approval,
    NftListing,
    DeceptiveName,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ApprovalKind {
    Approve,
    IncreaseAllowance,
    SetApprovalForAll,
    Permit,
    Permit2Single,
    Permit2Batch,
    PermitForAll,
}

impl ApprovalKind {
    pub const ALL: [ApprovalKind; 7] = [
        ApprovalKind::Approve,
        ApprovalKind::IncreaseAllowance,
        ApprovalKind::SetApprovalForAll,
        ApprovalKind::Permit,
        ApprovalKind::Permit2Single,
        ApprovalKind::Permit2Batch,
        ApprovalKind::PermitForAll,
    ];

    /// Kinds that grant control over every token of a collection.
    pub fn grants_all(self) -> bool {
        matches!(self, ApprovalKind::SetApprovalForAll | ApprovalKind::PermitForAll)
    }
}

/// Where the approval parameters live inside the decoded arguments.
/// Paths are dot-separated indexes into nested tuples; `*` fans out over
/// array elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApprovalLayout {
    pub kind: ApprovalKind,
    pub spender: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amount: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approved: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionEntry {
    pub signature: String,
    pub family: FunctionFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approval: Option<ApprovalLayout>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CatalogFile {
    schema: String,
    deceptive_names: Vec<String>,
    functions: Vec<FunctionEntry>,
}

#[derive(Debug, Clone)]
pub struct KnownFunction {
    pub entry: FunctionEntry,
    pub name: String,
    pub params: Vec<AbiType>,
    pub selector: [u8; 4],
}

#[derive(Debug, Clone)]
pub struct FunctionCatalog {
    by_selector: BTreeMap<[u8; 4], KnownFunction>,
    deceptive_names: Vec<String>,
}

impl FunctionCatalog {
    pub fn from_json(text: &str) -> Result<Self, CodecError> {
        let file: CatalogFile = serde_json::from_str(text).map_err(|e| CodecError::BadCatalog(e.to_string()))?;
        if file.schema != "functions/1" {
            return Err(CodecError::BadCatalog(format!("unsupported schema `{}`", file.schema)));
        }
        let mut by_selector = BTreeMap::new();
        for entry in file.functions {
            let (name, params) =
                parse_signature(&entry.signature).map_err(|e| CodecError::BadCatalog(e.to_string()))?;
            let sel = selector(&entry.signature);
            let known = KnownFunction { entry, name, params, selector: sel };
            if by_selector.insert(sel, known).is_some() {
                return Err(CodecError::BadCatalog(format!("selector clash 0x{}", hex::encode(sel))));
            }
        }
        Ok(FunctionCatalog { by_selector, deceptive_names: file.deceptive_names })
    }

    /// The catalog shipped with the crate.
    pub fn bundled() -> &'static FunctionCatalog {
        static CATALOG: OnceLock<FunctionCatalog> = OnceLock::new();
        CATALOG.get_or_init(|| FunctionCatalog::from_json(crate::assets::FUNCTIONS).expect("bundled catalog is valid"))
    }

    pub fn lookup(&self, sel: &[u8]) -> Option<&KnownFunction> {
        let key: [u8; 4] = sel.get(..4)?.try_into().ok()?;
        self.by_selector.get(&key)
    }

    pub fn by_signature(&self, sig: &str) -> Option<&KnownFunction> {
        self.lookup(&selector(sig))
    }

    pub fn functions(&self) -> impl Iterator<Item = &KnownFunction> {
        self.by_selector.values()
    }

    pub fn deceptive_names(&self) -> &[String] {
        &self.deceptive_names
    }

    /// Case-insensitive membership in a deceptive name family; names that
    /// extend a family stem (`claimRewardsV2`) count too.
    pub fn is_deceptive_name(&self, name: &str) -> bool {
        let lower = name.to_ascii_lowercase();
        self.deceptive_names.iter().any(|d| lower.starts_with(&d.to_ascii_lowercase()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalog_covers_families() {
        let c = FunctionCatalog::bundled();
        let approve = c.by_signature("approve(address,uint256)").unwrap();
        assert_eq!(approve.entry.family, FunctionFamily::Approval);
        assert_eq!(hex::encode(approve.selector), "095ea7b3");
        let kinds: Vec<ApprovalKind> =
            c.functions().filter_map(|f| f.entry.approval.as_ref().map(|a| a.kind)).collect();
        for k in ApprovalKind::ALL {
            assert!(kinds.contains(&k), "{k:?} missing");
        }
        for n in ["fulfillAdvancedOrder", "fulfillBasicOrder", "fulfillOrder", "execute", "bulkExecute"] {
            assert!(c.functions().any(|f| f.name == n && f.entry.family == FunctionFamily::NftListing));
        }
    }

    #[test]
    fn deceptive_names_case_insensitive() {
        let c = FunctionCatalog::bundled();
        assert!(c.is_deceptive_name("ClaimRewards"));
        assert!(c.is_deceptive_name("SECURITYUPDATE"));
        assert!(!c.is_deceptive_name("transfer"));
    }

    #[test]
    fn rejects_bad_schema() {
        assert!(FunctionCatalog::from_json(r#"{"schema":"x","deceptiveNames":[],"functions":[]}"#).is_err());
    }
}
