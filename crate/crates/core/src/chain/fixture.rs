//! `world/1` JSON fixture format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::address::Address;
use super::amount::Amount;
use super::behavior::ContractBehavior;
use super::exec::Transaction;
use super::{
    AddressLabel, BlockEnv, ChainError, ChainWorld, Date, EnsRegistry, Mempool, NetworkId, NetworkState, NftContract,
    TokenContract,
};

pub const WORLD_SCHEMA: &str = "world/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WorldFixture {
    pub schema: String,
    pub default_network: NetworkId,
    #[serde(default)]
    pub trusted_tokens: Vec<Address>,
    pub networks: Vec<NetworkFixture>,
    #[serde(default)]
    pub labels: Vec<AddressLabel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnsRecord {
    pub name: String,
    pub address: Address,
    #[serde(default)]
    pub expiry: Option<Date>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NetworkFixture {
    pub id: NetworkId,
    pub name: String,
    #[serde(default = "default_symbol")]
    pub native_symbol: String,
    #[serde(default)]
    pub usd_per_native: f64,
    pub block: BlockEnv,
    #[serde(default)]
    pub accounts: BTreeMap<Address, Amount>,
    #[serde(default)]
    pub tokens: Vec<TokenContract>,
    #[serde(default)]
    pub nfts: Vec<NftContract>,
    #[serde(default)]
    pub ens: Vec<EnsRecord>,
    #[serde(default)]
    pub behaviors: Vec<ContractBehavior>,
    #[serde(default)]
    pub storage: BTreeMap<Address, BTreeMap<String, Amount>>,
    #[serde(default)]
    pub mempool: Vec<Transaction>,
}

fn default_symbol() -> String {
    "ETH".into()
}

impl WorldFixture {
    pub fn from_json(text: &str) -> Result<WorldFixture, ChainError> {
        let f: WorldFixture = serde_json::from_str(text).map_err(|e| ChainError::Fixture(e.to_string()))?;
        if f.schema != WORLD_SCHEMA {
            return Err(ChainError::Fixture(format!("unsupported schema `{}`", f.schema)));
        }
        Ok(f)
    }

    pub fn into_world(self) -> Result<ChainWorld, ChainError> {
        let mut world = ChainWorld::new();
        world.default_network = self.default_network;
        world.trusted_tokens = self.trusted_tokens;
        for n in self.networks {
            if world.networks.contains_key(&n.id) {
                return Err(ChainError::Fixture(format!("duplicate network {}", n.id)));
            }
            let mut state = NetworkState::new(n.id, &n.name);
            state.native_symbol = n.native_symbol;
            state.usd_per_native = n.usd_per_native;
            state.block = n.block;
            state.accounts = n.accounts.into_iter().map(|(a, v)| (a, v.0)).collect();
            for t in n.tokens {
                if t.decimals > 36 {
                    return Err(ChainError::Fixture(format!("token {} decimals out of range", t.address)));
                }
                let held = t.balances.values().fold(Amount::ZERO.0, |acc, b| acc.saturating_add(b.0));
                let mut t = t;
                if t.total_supply.0 < held {
                    t.total_supply = Amount(held);
                }
                state.tokens.insert(t.address, t);
            }
            for nft in n.nfts {
                if nft.floor_price_usd < 0.0 {
                    return Err(ChainError::Fixture(format!("negative floor price for {}", nft.address)));
                }
                state.nfts.insert(nft.address, nft);
            }
            let mut ens = EnsRegistry::default();
            for r in n.ens {
                let key = r.name.to_ascii_lowercase();
                if ens.records.insert(key.clone(), r.address).is_some() {
                    return Err(ChainError::Fixture(format!("duplicate ENS name {}", r.name)));
                }
                if let Some(e) = r.expiry {
                    ens.expiry.insert(key, e);
                }
            }
            state.ens = ens;
            for b in n.behaviors {
                state.behaviors.insert(b.address, b);
            }
            state.storage = n
                .storage
                .into_iter()
                .map(|(a, slots)| (a, slots.into_iter().map(|(k, v)| (k, v.0)).collect()))
                .collect();
            state.mempool = n.mempool.into_iter().collect::<Mempool>();
            world.add_network(state);
        }
        world.network(world.default_network)?;
        for l in self.labels {
            if l.is_risky() && l.labeled_at.is_none() {
                return Err(ChainError::Fixture(format!("label for {} lacks a date", l.address)));
            }
            world.labels.insert(l.address, l);
        }
        Ok(world)
    }
}

impl ChainWorld {
    pub fn from_fixture_json(text: &str) -> Result<ChainWorld, ChainError> {
        WorldFixture::from_json(text)?.into_world()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_fixture_loads() {
        let text = r#"{
            "schema": "world/1",
            "defaultNetwork": 1,
            "networks": [{
                "id": 1, "name": "mainnet",
                "block": {"coinbase": "0x0000000000000000000000000000000000000000", "timestamp": 1, "number": 1},
                "accounts": {"0x0101010101010101010101010101010101010101": "1000"},
                "ens": [{"name": "Alice.eth", "address": "0x0101010101010101010101010101010101010101"}]
            }],
            "labels": [{"address": "0x0202020202020202020202020202020202020202", "label": "phishing", "labeledAt": "2024-06-01"}]
        }"#;
        let w = ChainWorld::from_fixture_json(text).unwrap();
        assert_eq!(w.resolve_ens(NetworkId::MAINNET, "alice.eth"), Some(Address([1; 20])));
        assert!(w.lookup_label(&Address([2; 20])).is_risky());
    }

    #[test]
    fn rejects_wrong_schema_and_undated_labels() {
        assert!(ChainWorld::from_fixture_json(r#"{"schema":"world/2","defaultNetwork":1,"networks":[]}"#).is_err());
        let undated = r#"{"schema":"world/1","defaultNetwork":1,"networks":[{"id":1,"name":"m",
            "block":{"coinbase":"0x0000000000000000000000000000000000000000","timestamp":0,"number":0}}],
            "labels":[{"address":"0x0202020202020202020202020202020202020202","label":"drainer"}]}"#;
        assert!(ChainWorld::from_fixture_json(undated).is_err());
    }
}
