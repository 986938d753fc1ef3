//! Guarded contract programs.
//!
//! A program is an ordered list of clauses. The first clause whose guard
//! holds runs its actions; a clause without a guard always matches.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::address::Address;
use super::amount::{parse_u256, U256};

/// A value a guard can read.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EnvVar {
    GasPrice,
    Coinbase,
    Timestamp,
    BlockNumber,
    Caller,
    Value,
    /// A named storage slot of the executing contract.
    Slot(String),
}

impl EnvVar {
    /// Block-environment variables a local simulator has to guess.
    pub fn is_environmental(&self) -> bool {
        matches!(self, EnvVar::GasPrice | EnvVar::Coinbase | EnvVar::Timestamp | EnvVar::BlockNumber)
    }
}

impl FromStr for EnvVar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "gasprice" => EnvVar::GasPrice,
            "coinbase" => EnvVar::Coinbase,
            "timestamp" => EnvVar::Timestamp,
            "number" => EnvVar::BlockNumber,
            "caller" => EnvVar::Caller,
            "value" => EnvVar::Value,
            other => match other.strip_prefix("slot:") {
                Some(name) if !name.is_empty() => EnvVar::Slot(name.to_string()),
                _ => return Err(format!("unknown guard variable `{other}`")),
            },
        })
    }
}

impl fmt::Display for EnvVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvVar::GasPrice => f.write_str("gasprice"),
            EnvVar::Coinbase => f.write_str("coinbase"),
            EnvVar::Timestamp => f.write_str("timestamp"),
            EnvVar::BlockNumber => f.write_str("number"),
            EnvVar::Caller => f.write_str("caller"),
            EnvVar::Value => f.write_str("value"),
            EnvVar::Slot(name) => write!(f, "slot:{name}"),
        }
    }
}

impl TryFrom<String> for EnvVar {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<EnvVar> for String {
    fn from(v: EnvVar) -> String {
        v.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Comparator {
    pub fn holds(self, lhs: U256, rhs: U256) -> bool {
        match self {
            Comparator::Eq => lhs == rhs,
            Comparator::Ne => lhs != rhs,
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Gt => lhs > rhs,
            Comparator::Ge => lhs >= rhs,
        }
    }
}

/// Constant a guard compares against: a number or an address.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Constant(pub U256);

impl TryFrom<String> for Constant {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        if let Ok(a) = s.parse::<Address>() {
            return Ok(Constant(address_to_u256(&a)));
        }
        parse_u256(&s).map(Constant).ok_or_else(|| format!("invalid guard constant `{s}`"))
    }
}

impl From<Constant> for String {
    fn from(c: Constant) -> String {
        c.0.to_string()
    }
}

pub fn address_to_u256(a: &Address) -> U256 {
    U256::from_big_endian(&a.to_word())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Guard {
    pub var: EnvVar,
    pub cmp: Comparator,
    pub value: Constant,
}

/// Who takes part in an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Party {
    Caller,
    /// The executing contract.
    This,
    Coinbase,
    Addr(Address),
}

impl TryFrom<String> for Party {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Ok(match s.as_str() {
            "caller" => Party::Caller,
            "this" => Party::This,
            "coinbase" => Party::Coinbase,
            other => Party::Addr(other.parse().map_err(|e| format!("{e}"))?),
        })
    }
}

impl From<Party> for String {
    fn from(p: Party) -> String {
        match p {
            Party::Caller => "caller".into(),
            Party::This => "this".into(),
            Party::Coinbase => "coinbase".into(),
            Party::Addr(a) => a.to_string(),
        }
    }
}

/// How much an action moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Quantity {
    Const(U256),
    /// The full balance the `from` party holds of the asset being moved.
    Balance,
    /// `msg.value` of the transaction.
    Value,
}

impl TryFrom<String> for Quantity {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Ok(match s.as_str() {
            "balance" => Quantity::Balance,
            "value" => Quantity::Value,
            other => Quantity::Const(parse_u256(other).ok_or_else(|| format!("invalid quantity `{other}`"))?),
        })
    }
}

impl From<Quantity> for String {
    fn from(q: Quantity) -> String {
        match q {
            Quantity::Const(v) => v.to_string(),
            Quantity::Balance => "balance".into(),
            Quantity::Value => "value".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum Action {
    TransferToken {
        token: Address,
        from: Party,
        to: Party,
        amount: Quantity,
    },
    TransferNative {
        from: Party,
        to: Party,
        amount: Quantity,
    },
    Mint {
        token: Address,
        to: Party,
        amount: Quantity,
    },
    Burn {
        token: Address,
        from: Party,
        amount: Quantity,
    },
    SetAllowance {
        token: Address,
        owner: Party,
        spender: Party,
        amount: Quantity,
    },
    SetOperatorApproval {
        collection: Address,
        owner: Party,
        operator: Party,
        approved: bool,
    },
    SetSlot {
        slot: String,
        value: Quantity,
    },
    EmitEvent {
        name: String,
        #[serde(default)]
        args: Vec<String>,
    },
    Revert {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<Guard>,
    pub actions: Vec<Action>,
}

/// Program attached to a contract address.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractBehavior {
    pub address: Address,
    #[serde(default)]
    pub name: String,
    pub clauses: Vec<Clause>,
}

impl ContractBehavior {
    /// Index of the first clause whose guard holds.
    pub fn select_clause(&self, read: impl Fn(&EnvVar) -> U256) -> Option<usize> {
        self.clauses.iter().position(|c| match &c.when {
            None => true,
            Some(g) => g.cmp.holds(read(&g.var), g.value.0),
        })
    }

    /// True when some guard reads the block environment.
    pub fn reads_environment(&self) -> bool {
        self.guards().any(|g| g.var.is_environmental())
    }

    /// True when some guard reads contract storage, which other
    /// transactions in the same block can write first.
    pub fn reads_storage(&self) -> bool {
        self.guards().any(|g| matches!(g.var, EnvVar::Slot(_)))
    }

    fn guards(&self) -> impl Iterator<Item = &Guard> {
        self.clauses.iter().filter_map(|c| c.when.as_ref())
    }

    /// Hash over the program body (address excluded), used for CREATE2-style
    /// address derivation.
    pub fn code_hash(&self) -> [u8; 32] {
        let body = serde_json::to_vec(&self.clauses).expect("behavior serializes");
        crate::hash::keccak256(&body)
    }
}
