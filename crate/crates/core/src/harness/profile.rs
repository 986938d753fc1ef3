//! Wallet profiles: which alert rules exist, how strictly they respond,
//! and how the wallet renders what it is asked to sign.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assets;
use crate::chain::{Address, Amount};
use crate::codec::FieldRole;
use crate::inspect::ParseMode;

pub const PROFILE_SCHEMA: &str = "wallet-profile/1";

/// Every alert rule a profile may configure.
pub const RULE_REGISTRY: [&str; 18] = [
    "eth-sign",
    "approve",
    "increase-allowance",
    "set-approval-for-all",
    "permit",
    "permit2-single",
    "permit2-batch",
    "permit-for-all",
    "nft-listing-single",
    "nft-listing-multi",
    "risky-address",
    "deceptive-name",
    "chain-id-mismatch",
    "uri-mismatch",
    "personal-sign-decode",
    "malformed-inputdata",
    "front-run-prone",
    "state-dependent-simulation",
];

/// How loudly a rule responds, weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AlertLevel {
    Identification,
    Notification,
    Alert,
    Block,
}

impl AlertLevel {
    /// Whether a rule at this level meets a check that requires `required`.
    pub fn satisfies(self, required: AlertLevel) -> bool {
        self >= required
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DisplayMode {
    RawJson,
    KeyValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TokenSearchMode {
    NameOnly,
    NameAndAddress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EnsMode {
    /// Names always resolve against mainnet, whatever the session network.
    MainnetOnly,
    NetworkAware,
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("unknown profile `{0}`")]
    Unknown(String),
    #[error("profile `{name}`: unknown alert rule `{rule}`")]
    UnknownRule { name: String, rule: String },
    #[error("unsupported profile schema `{0}`")]
    Schema(String),
    #[error("invalid profile json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read profile: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WalletProfile {
    pub schema: String,
    pub name: String,
    /// A finding on this profile makes the campaign exit with status 2.
    #[serde(default)]
    pub expect_clean: bool,
    pub has_simulator: bool,
    pub sim_gas_price_default: Amount,
    pub sim_coinbase_default: Address,
    pub alert_rules: BTreeMap<String, AlertLevel>,
    pub display_mode: DisplayMode,
    pub displayed_message_fields: Vec<FieldRole>,
    pub token_search_mode: TokenSearchMode,
    pub metadata_editable: bool,
    pub ens_mode: EnsMode,
    pub ens_auto_suggest: bool,
    pub quirk_switch_network_on_missing_prefix: bool,
    pub inputdata_parsing: ParseMode,
    /// Values are cast to their declared types and control characters
    /// escaped before display.
    pub type_aware_display: bool,
    pub show_listing_items: bool,
}

impl WalletProfile {
    pub fn from_json(text: &str) -> Result<WalletProfile, ProfileError> {
        let p: WalletProfile = serde_json::from_str(text)?;
        if p.schema != PROFILE_SCHEMA {
            return Err(ProfileError::Schema(p.schema));
        }
        p.validate()?;
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<WalletProfile, ProfileError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        match self.alert_rules.keys().find(|r| !RULE_REGISTRY.contains(&r.as_str())) {
            Some(r) => Err(ProfileError::UnknownRule { name: self.name.clone(), rule: r.clone() }),
            None => Ok(()),
        }
    }

    /// A bundled profile, an injection profile `inject-vN`, or a JSON file
    /// path.
    pub fn load(name: &str) -> Result<WalletProfile, ProfileError> {
        if let Some((_, text)) = assets::PROFILES.iter().find(|(n, _)| *n == name) {
            return Self::from_json(text);
        }
        if let Some(v) = name.strip_prefix("inject-v").and_then(|n| n.parse::<u8>().ok()) {
            return Self::injecting(v).ok_or_else(|| ProfileError::Unknown(name.to_string()));
        }
        if name.ends_with(".json") && Path::new(name).exists() {
            return Self::from_file(Path::new(name));
        }
        Err(ProfileError::Unknown(name.to_string()))
    }

    pub fn hardened() -> WalletProfile {
        Self::load("hardened").expect("bundled hardened profile")
    }

    /// The hardened profile with exactly one weakness that exposes vector
    /// `v` (1 to 13).
    pub fn injecting(v: u8) -> Option<WalletProfile> {
        let mut p = Self::hardened();
        p.name = format!("inject-v{v}");
        p.expect_clean = false;
        let drop = |p: &mut WalletProfile, rule: &str| {
            p.alert_rules.remove(rule);
        };
        match v {
            1 => drop(&mut p, "front-run-prone"),
            2 => drop(&mut p, "state-dependent-simulation"),
            3 => drop(&mut p, "eth-sign"),
            4 => p.inputdata_parsing = ParseMode::RawOnly,
            5 => drop(&mut p, "approve"),
            6 => drop(&mut p, "nft-listing-single"),
            7 => drop(&mut p, "risky-address"),
            8 => drop(&mut p, "deceptive-name"),
            9 => drop(&mut p, "chain-id-mismatch"),
            10 => drop(&mut p, "personal-sign-decode"),
            11 => p.token_search_mode = TokenSearchMode::NameOnly,
            12 => p.ens_auto_suggest = true,
            13 => p.display_mode = DisplayMode::RawJson,
            _ => return None,
        }
        Some(p)
    }

    /// Names accepted by [`WalletProfile::load`] without a file.
    pub fn known_names() -> Vec<String> {
        let mut out: Vec<String> = assets::PROFILES.iter().map(|(n, _)| n.to_string()).collect();
        out.extend((1..=13).map(|v| format!("inject-v{v}")));
        out
    }

    pub fn level(&self, rule: &str) -> Option<AlertLevel> {
        self.alert_rules.get(rule).copied()
    }

    pub fn displays(&self, role: FieldRole) -> bool {
        self.displayed_message_fields.contains(&role)
    }
}
