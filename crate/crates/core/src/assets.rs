//! Data files compiled into the crate.

pub const FUNCTIONS: &str = include_str!("../assets/catalog/functions.json");
pub const DEFAULT_WORLD: &str = include_str!("../assets/worlds/default.json");
pub const SCAMS: &str = include_str!("../assets/catalog/scams.json");
pub const UI_WALLET: &str = include_str!("../assets/ui/wallet.json");
pub const CLASSIFIER: &str = include_str!("../assets/rules/classifier.json");
pub const REPORT_SCHEMA: &str = include_str!("../assets/schema/campaign-report.schema.json");

/// Message template documents, by file name.
pub const MESSAGE_TEMPLATES: [(&str, &str); 5] = [
    ("eip191.json", include_str!("../assets/catalog/messages/eip191.json")),
    ("eip4361.json", include_str!("../assets/catalog/messages/eip4361.json")),
    ("eip712.json", include_str!("../assets/catalog/messages/eip712.json")),
    ("hash_string.json", include_str!("../assets/catalog/messages/hash_string.json")),
    ("text_string.json", include_str!("../assets/catalog/messages/text_string.json")),
];

/// Wallet profiles shipped as JSON, by profile name.
pub const PROFILES: [(&str, &str); 7] = [
    ("hardened", include_str!("../assets/profiles/hardened.json")),
    ("all-vulnerable", include_str!("../assets/profiles/all-vulnerable.json")),
    ("metamask-like", include_str!("../assets/profiles/metamask-like.json")),
    ("bitget-like", include_str!("../assets/profiles/bitget-like.json")),
    ("no-simulator", include_str!("../assets/profiles/no-simulator.json")),
    ("raw-json", include_str!("../assets/profiles/raw-json.json")),
    ("name-only-search", include_str!("../assets/profiles/name-only-search.json")),
];
