//! Deterministic miniature multi-network ledger.
//!
//! This is the ground truth the differential oracles compare wallet
//! displays against: balances, tokens, NFTs, per-network ENS records,
//! address labels, guarded contract programs and a gas-price ordered
//! mempool.

mod address;
mod amount;
mod behavior;
mod exec;
mod fixture;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use address::{Address, AddressParseError};
pub use amount::{format_units, parse_u256, parse_units, pow2, Amount, SignedAmount, U256};
pub use behavior::{
    address_to_u256, Action, Clause, Comparator, Constant, ContractBehavior, EnvVar, Guard, Party, Quantity,
};
pub use exec::{Asset, Delta, Event, ExecutionOutcome, Status, Transaction};
pub use fixture::WorldFixture;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("unknown network {0}")]
    UnknownNetwork(NetworkId),
    #[error("unknown sender {0}")]
    UnknownSender(Address),
    #[error("already-deployed: {0} exists on network {1}")]
    AlreadyDeployed(Address, NetworkId),
    #[error("invalid world fixture: {0}")]
    Fixture(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NetworkId(pub u64);

impl NetworkId {
    pub const MAINNET: NetworkId = NetworkId(1);
    pub const TESTNET: NetworkId = NetworkId(11_155_111);
}

impl fmt::Display for NetworkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `YYYY-MM-DD`, validated on construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Date(String);

impl Date {
    pub fn parse(s: &str) -> Option<Date> {
        let b = s.as_bytes();
        if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
            return None;
        }
        let num = |r: std::ops::Range<usize>| s[r].parse::<u32>().ok();
        let (_y, m, d) = (num(0..4)?, num(5..7)?, num(8..10)?);
        ((1..=12).contains(&m) && (1..=31).contains(&d)).then(|| Date(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Date {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Date::parse(&s).ok_or_else(|| format!("invalid date `{s}`"))
    }
}

impl From<Date> for String {
    fn from(d: Date) -> String {
        d.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TokenContract {
    pub address: Address,
    pub name: String,
    pub symbol: String,
    pub decimals: u8,
    #[serde(default)]
    pub total_supply: Amount,
    #[serde(default)]
    pub balances: BTreeMap<Address, Amount>,
    #[serde(default, skip)]
    pub allowances: BTreeMap<(Address, Address), Amount>,
    #[serde(default, skip)]
    pub operator_approvals: BTreeMap<(Address, Address), bool>,
}

impl TokenContract {
    pub fn balance_of(&self, who: &Address) -> U256 {
        self.balances.get(who).map(|a| a.0).unwrap_or_default()
    }

    pub fn allowance(&self, owner: &Address, spender: &Address) -> U256 {
        self.allowances.get(&(*owner, *spender)).map(|a| a.0).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NftContract {
    pub address: Address,
    pub name: String,
    #[serde(default)]
    pub symbol: String,
    /// token id → owner
    #[serde(default)]
    pub owners: BTreeMap<u64, Address>,
    pub floor_price_usd: f64,
    #[serde(default, skip)]
    pub operator_approvals: BTreeMap<(Address, Address), bool>,
}

impl NftContract {
    pub fn count_owned(&self, who: &Address) -> u64 {
        self.owners.values().filter(|o| *o == who).count() as u64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsRegistry {
    pub records: BTreeMap<String, Address>,
    pub expiry: BTreeMap<String, Date>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockEnv {
    pub coinbase: Address,
    pub timestamp: u64,
    pub number: u64,
    #[serde(default)]
    pub gas_price: Amount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Phishing,
    Drainer,
    Clean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AddressLabel {
    pub address: Address,
    pub label: LabelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labeled_at: Option<Date>,
}

impl AddressLabel {
    pub fn is_risky(&self) -> bool {
        self.label != LabelKind::Clean
    }
}

/// Pending transactions in arrival order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mempool {
    entries: Vec<Transaction>,
}

impl Mempool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tx: Transaction) {
        self.entries.push(tx);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Arrival order.
    pub fn entries(&self) -> &[Transaction] {
        &self.entries
    }

    /// Block order: gas price descending, ties by arrival.
    pub fn ordered(&self) -> Vec<Transaction> {
        let mut v: Vec<(usize, &Transaction)> = self.entries.iter().enumerate().collect();
        v.sort_by(|(ia, a), (ib, b)| b.gas_price.cmp(&a.gas_price).then(ia.cmp(ib)));
        v.into_iter().map(|(_, t)| t.clone()).collect()
    }
}

impl FromIterator<Transaction> for Mempool {
    fn from_iter<I: IntoIterator<Item = Transaction>>(iter: I) -> Self {
        Mempool { entries: iter.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub id: NetworkId,
    pub name: String,
    pub native_symbol: String,
    pub usd_per_native: f64,
    pub block: BlockEnv,
    pub accounts: BTreeMap<Address, U256>,
    pub tokens: BTreeMap<Address, TokenContract>,
    pub nfts: BTreeMap<Address, NftContract>,
    pub ens: EnsRegistry,
    pub behaviors: BTreeMap<Address, ContractBehavior>,
    pub storage: BTreeMap<Address, BTreeMap<String, U256>>,
    pub mempool: Mempool,
}

impl NetworkState {
    pub fn new(id: NetworkId, name: &str) -> Self {
        NetworkState {
            id,
            name: name.to_string(),
            native_symbol: "ETH".into(),
            usd_per_native: 0.0,
            block: BlockEnv { coinbase: Address::ZERO, timestamp: 0, number: 0, gas_price: Amount::ZERO },
            accounts: BTreeMap::new(),
            tokens: BTreeMap::new(),
            nfts: BTreeMap::new(),
            ens: EnsRegistry::default(),
            behaviors: BTreeMap::new(),
            storage: BTreeMap::new(),
            mempool: Mempool::new(),
        }
    }

    pub fn native_balance(&self, who: &Address) -> U256 {
        self.accounts.get(who).copied().unwrap_or_default()
    }

    pub fn has_code(&self, a: &Address) -> bool {
        self.behaviors.contains_key(a) || self.tokens.contains_key(a) || self.nfts.contains_key(a)
    }

    pub fn tokens_by_symbol(&self, symbol: &str) -> Vec<&TokenContract> {
        self.tokens.values().filter(|t| t.symbol.eq_ignore_ascii_case(symbol)).collect()
    }
}

/// The whole multi-network world plus off-chain reference data.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainWorld {
    pub networks: BTreeMap<NetworkId, NetworkState>,
    pub labels: BTreeMap<Address, AddressLabel>,
    /// Network wallet sessions connect to unless a seed says otherwise.
    pub default_network: NetworkId,
    /// Off-chain list of reputable token contracts.
    pub trusted_tokens: Vec<Address>,
}

impl Default for ChainWorld {
    fn default() -> Self {
        ChainWorld {
            networks: BTreeMap::new(),
            labels: BTreeMap::new(),
            default_network: NetworkId::MAINNET,
            trusted_tokens: Vec::new(),
        }
    }
}

impl ChainWorld {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_network(&mut self, state: NetworkState) {
        self.networks.insert(state.id, state);
    }

    pub fn network(&self, id: NetworkId) -> Result<&NetworkState, ChainError> {
        self.networks.get(&id).ok_or(ChainError::UnknownNetwork(id))
    }

    pub fn network_mut(&mut self, id: NetworkId) -> Result<&mut NetworkState, ChainError> {
        self.networks.get_mut(&id).ok_or(ChainError::UnknownNetwork(id))
    }

    /// Looks up `name` in the registry of exactly `network`.
    pub fn resolve_ens(&self, network: NetworkId, name: &str) -> Option<Address> {
        if name.is_empty() {
            return None;
        }
        self.networks.get(&network)?.ens.records.get(&name.to_ascii_lowercase()).copied()
    }

    pub fn register_ens(
        &mut self,
        network: NetworkId,
        name: &str,
        target: Address,
        expiry: Option<Date>,
    ) -> Result<(), ChainError> {
        let net = self.network_mut(network)?;
        let key = name.to_ascii_lowercase();
        net.ens.records.insert(key.clone(), target);
        if let Some(e) = expiry {
            net.ens.expiry.insert(key, e);
        }
        Ok(())
    }

    pub fn label_address(&mut self, address: Address, label: LabelKind, date: Option<Date>) {
        self.labels.insert(address, AddressLabel { address, label, labeled_at: date });
    }

    /// Unlabeled addresses read as clean.
    pub fn lookup_label(&self, address: &Address) -> AddressLabel {
        self.labels.get(address).cloned().unwrap_or(AddressLabel {
            address: *address,
            label: LabelKind::Clean,
            labeled_at: None,
        })
    }

    pub fn is_trusted_token(&self, address: &Address) -> bool {
        self.trusted_tokens.contains(address)
    }

    /// Deploys `behavior` at the CREATE2-style address derived from
    /// `(deployer, salt, hash(behavior))`. The same inputs give the same
    /// address on every network.
    pub fn deploy_create2(
        &mut self,
        network: NetworkId,
        deployer: Address,
        salt: [u8; 32],
        behavior: &ContractBehavior,
    ) -> Result<Address, ChainError> {
        let address = create2_address(&deployer, &salt, &behavior.code_hash());
        let net = self.network_mut(network)?;
        if net.has_code(&address) {
            return Err(ChainError::AlreadyDeployed(address, network));
        }
        let mut deployed = behavior.clone();
        deployed.address = address;
        net.behaviors.insert(address, deployed);
        Ok(address)
    }
}

/// `keccak256(0xff ‖ deployer ‖ salt ‖ code_hash)[12..]`.
pub fn create2_address(deployer: &Address, salt: &[u8; 32], code_hash: &[u8; 32]) -> Address {
    let mut buf = Vec::with_capacity(85);
    buf.push(0xff);
    buf.extend_from_slice(deployer.as_bytes());
    buf.extend_from_slice(salt);
    buf.extend_from_slice(code_hash);
    let digest = crate::hash::keccak256(&buf);
    Address::from_slice(&digest[12..]).expect("20 bytes")
}
