//! The wallet under test: profiles, rendered screens and the mock wallet.

pub mod profile;
pub mod screen;
pub mod wallet;

pub use profile::{AlertLevel, DisplayMode, EnsMode, ProfileError, TokenSearchMode, WalletProfile, RULE_REGISTRY};
pub use screen::{has_alert_keyword, Button, Region, RenderedScreen, ScreenLine, ALERT_KEYWORDS};
pub use wallet::{
    asset_display, escape_text, outcome_lines, submit_seed, HarnessError, MockWallet, TokenOverride, WalletAdapter,
    WalletSession, NO_BALANCE_CHANGES, SIMULATION_SCREEN, SIM_UNAVAILABLE, WILL_FAIL,
};
