//! Transaction execution against a single network.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::address::Address;
use super::amount::{Amount, SignedAmount, U256};
use super::behavior::{address_to_u256, Action, ContractBehavior, EnvVar, Party, Quantity};
use super::{BlockEnv, ChainError, ChainWorld, NetworkId, NetworkState};
use crate::codec::abi::{self, AbiType, AbiValue};
use crate::codec::normalize_inputdata;
use crate::hash::selector;

/// Flat gas charge: base plus a constant per executed action.
pub const BASE_GAS: u64 = 21_000;
pub const GAS_PER_ACTION: u64 = 5_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Transaction {
    pub from: Address,
    pub to: Address,
    #[serde(default)]
    pub value: Amount,
    /// Inputdata exactly as submitted; normalized at execution time.
    #[serde(default)]
    pub input: String,
    #[serde(default)]
    pub gas_price: Amount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "address", rename_all = "camelCase")]
pub enum Asset {
    Native,
    Token(Address),
    Nft(Address),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Delta {
    pub asset: Asset,
    pub account: Address,
    pub amount: SignedAmount,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "camelCase")]
pub enum Status {
    Success,
    Revert(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExecutionOutcome {
    pub status: Status,
    pub deltas: Vec<Delta>,
    pub events: Vec<Event>,
    pub gas_used: u64,
}

impl ExecutionOutcome {
    pub fn is_success(&self) -> bool {
        self.status == Status::Success
    }

    /// Non-zero deltas of one account.
    pub fn deltas_for(&self, account: &Address) -> Vec<&Delta> {
        self.deltas.iter().filter(|d| &d.account == account).collect()
    }

    pub fn delta_of(&self, asset: Asset, account: &Address) -> SignedAmount {
        self.deltas
            .iter()
            .find(|d| d.asset == asset && &d.account == account)
            .map(|d| d.amount)
            .unwrap_or_else(SignedAmount::zero)
    }
}

impl BlockEnv {
    /// The environment a transaction sees when included in the current block.
    pub fn for_tx(&self, tx: &Transaction) -> BlockEnv {
        BlockEnv { gas_price: tx.gas_price, ..self.clone() }
    }
}

impl ChainWorld {
    /// Executes `tx` on `network` under `env`. State changes only on success.
    pub fn execute_transaction(
        &mut self,
        network: NetworkId,
        env: &BlockEnv,
        tx: &Transaction,
    ) -> Result<ExecutionOutcome, ChainError> {
        let net = self.network_mut(network)?;
        if !net.accounts.contains_key(&tx.from) {
            return Err(ChainError::UnknownSender(tx.from));
        }
        let mut work = net.clone();
        let mut run = Run { net: &mut work, env, tx, events: Vec::new(), actions: 0 };
        let result = run.execute();
        let (events, actions) = (run.events, run.actions);
        let gas_used = BASE_GAS + GAS_PER_ACTION * actions;
        Ok(match result {
            Ok(()) => {
                let deltas = state_diff(net, &work);
                *net = work;
                ExecutionOutcome { status: Status::Success, deltas, events, gas_used }
            }
            Err(reason) => {
                ExecutionOutcome { status: Status::Revert(reason), deltas: Vec::new(), events: Vec::new(), gas_used }
            }
        })
    }

    /// Drains `mempool` in block order (gas price descending, arrival
    /// order on ties) and executes each transaction against the evolving
    /// state. Returned outcomes follow execution order. Senders the network
    /// does not know produce a revert outcome rather than aborting the block.
    pub fn form_and_execute_block(
        &mut self,
        network: NetworkId,
        mempool: &super::Mempool,
    ) -> Result<Vec<(Transaction, ExecutionOutcome)>, ChainError> {
        let block = self.network(network)?.block.clone();
        let mut out = Vec::with_capacity(mempool.len());
        for tx in mempool.ordered() {
            let env = block.for_tx(&tx);
            let outcome = match self.execute_transaction(network, &env, &tx) {
                Ok(o) => o,
                Err(ChainError::UnknownSender(_)) => ExecutionOutcome {
                    status: Status::Revert("unknown-sender".into()),
                    deltas: Vec::new(),
                    events: Vec::new(),
                    gas_used: BASE_GAS,
                },
                Err(e) => return Err(e),
            };
            out.push((tx, outcome));
        }
        let net = self.network_mut(network)?;
        net.block.number += 1;
        net.block.timestamp += 12;
        Ok(out)
    }
}

fn state_diff(before: &NetworkState, after: &NetworkState) -> Vec<Delta> {
    let mut out = Vec::new();
    let keys: BTreeSet<&Address> = before.accounts.keys().chain(after.accounts.keys()).collect();
    for a in keys {
        push_delta(&mut out, Asset::Native, *a, before.native_balance(a), after.native_balance(a));
    }
    for (addr, t_after) in &after.tokens {
        let empty = BTreeMap::new();
        let b_bal = before.tokens.get(addr).map(|t| &t.balances).unwrap_or(&empty);
        let holders: BTreeSet<&Address> = b_bal.keys().chain(t_after.balances.keys()).collect();
        for h in holders {
            let b = b_bal.get(h).map(|x| x.0).unwrap_or_default();
            push_delta(&mut out, Asset::Token(*addr), *h, b, t_after.balance_of(h));
        }
    }
    for (addr, n_after) in &after.nfts {
        let n_before = before.nfts.get(addr);
        let holders: BTreeSet<Address> =
            n_after.owners.values().chain(n_before.into_iter().flat_map(|n| n.owners.values())).copied().collect();
        for h in holders {
            let b = n_before.map(|n| n.count_owned(&h)).unwrap_or(0);
            push_delta(&mut out, Asset::Nft(*addr), h, U256::from(b), U256::from(n_after.count_owned(&h)));
        }
    }
    out
}

fn push_delta(out: &mut Vec<Delta>, asset: Asset, account: Address, before: U256, after: U256) {
    let d = SignedAmount::diff(before, after);
    if !d.is_zero() {
        out.push(Delta { asset, account, amount: d });
    }
}

struct Run<'a> {
    net: &'a mut NetworkState,
    env: &'a BlockEnv,
    tx: &'a Transaction,
    events: Vec<Event>,
    actions: u64,
}

type Step = Result<(), String>;

impl Run<'_> {
    fn execute(&mut self) -> Step {
        let data = if self.tx.input.trim().is_empty() {
            Vec::new()
        } else {
            let canon = normalize_inputdata(&self.tx.input).map_err(|_| "decode-error".to_string())?;
            hex::decode(&canon[2..]).map_err(|_| "decode-error".to_string())?
        };
        let (from, to, value) = (self.tx.from, self.tx.to, self.tx.value.0);
        self.move_native(from, to, value).map_err(|_| "insufficient-funds".to_string())?;

        if let Some(program) = self.net.behaviors.get(&to).cloned() {
            return self.run_program(&program);
        }
        if self.net.tokens.contains_key(&to) {
            return self.token_call(to, &data);
        }
        if self.net.nfts.contains_key(&to) {
            return self.nft_call(to, &data);
        }
        if !data.is_empty() {
            return Err("no-code".into());
        }
        Ok(())
    }

    fn move_native(&mut self, from: Address, to: Address, amount: U256) -> Step {
        if amount.is_zero() {
            return Ok(());
        }
        let bal = self.net.native_balance(&from);
        if bal < amount {
            return Err("insufficient-balance".into());
        }
        self.net.accounts.insert(from, bal - amount);
        let dest = self.net.native_balance(&to);
        self.net.accounts.insert(to, dest + amount);
        Ok(())
    }

    fn read(&self, var: &EnvVar) -> U256 {
        match var {
            EnvVar::GasPrice => self.env.gas_price.0,
            EnvVar::Coinbase => address_to_u256(&self.env.coinbase),
            EnvVar::Timestamp => U256::from(self.env.timestamp),
            EnvVar::BlockNumber => U256::from(self.env.number),
            EnvVar::Caller => address_to_u256(&self.tx.from),
            EnvVar::Value => self.tx.value.0,
            EnvVar::Slot(name) => {
                self.net.storage.get(&self.tx.to).and_then(|s| s.get(name)).copied().unwrap_or_default()
            }
        }
    }

    fn party(&self, p: Party) -> Address {
        match p {
            Party::Caller => self.tx.from,
            Party::This => self.tx.to,
            Party::Coinbase => self.env.coinbase,
            Party::Addr(a) => a,
        }
    }

    fn quantity(&self, q: Quantity, balance: U256) -> U256 {
        match q {
            Quantity::Const(v) => v,
            Quantity::Balance => balance,
            Quantity::Value => self.tx.value.0,
        }
    }

    fn run_program(&mut self, program: &ContractBehavior) -> Step {
        let Some(idx) = program.select_clause(|v| self.read(v)) else {
            return Err("no-matching-clause".into());
        };
        for action in &program.clauses[idx].actions {
            self.actions += 1;
            self.apply(action)?;
        }
        Ok(())
    }

    fn apply(&mut self, action: &Action) -> Step {
        match action {
            Action::TransferToken { token, from, to, amount } => {
                let (from, to) = (self.party(*from), self.party(*to));
                let bal = self.token(token)?.balance_of(&from);
                let amt = self.quantity(*amount, bal);
                self.token_transfer(*token, from, to, amt)
            }
            Action::TransferNative { from, to, amount } => {
                let (from, to) = (self.party(*from), self.party(*to));
                let amt = self.quantity(*amount, self.net.native_balance(&from));
                self.move_native(from, to, amt)
            }
            Action::Mint { token, to, amount } => {
                let to = self.party(*to);
                let amt = self.quantity(*amount, U256::zero());
                let t = self.token_mut(token)?;
                t.total_supply = Amount(t.total_supply.0.checked_add(amt).ok_or("overflow")?);
                let b = t.balance_of(&to);
                t.balances.insert(to, Amount(b + amt));
                self.emit("Transfer", vec![Address::ZERO.to_string(), to.to_string(), amt.to_string()]);
                Ok(())
            }
            Action::Burn { token, from, amount } => {
                let from = self.party(*from);
                let bal = self.token(token)?.balance_of(&from);
                let amt = self.quantity(*amount, bal);
                if bal < amt {
                    return Err("insufficient-balance".into());
                }
                let t = self.token_mut(token)?;
                t.balances.insert(from, Amount(bal - amt));
                t.total_supply = Amount(t.total_supply.0.saturating_sub(amt));
                self.emit("Transfer", vec![from.to_string(), Address::ZERO.to_string(), amt.to_string()]);
                Ok(())
            }
            Action::SetAllowance { token, owner, spender, amount } => {
                let (owner, spender) = (self.party(*owner), self.party(*spender));
                let amt = self.quantity(*amount, U256::zero());
                self.token_mut(token)?.allowances.insert((owner, spender), Amount(amt));
                self.emit("Approval", vec![owner.to_string(), spender.to_string(), amt.to_string()]);
                Ok(())
            }
            Action::SetOperatorApproval { collection, owner, operator, approved } => {
                let (owner, operator) = (self.party(*owner), self.party(*operator));
                if let Some(n) = self.net.nfts.get_mut(collection) {
                    n.operator_approvals.insert((owner, operator), *approved);
                } else {
                    self.token_mut(collection)?.operator_approvals.insert((owner, operator), *approved);
                }
                self.emit("ApprovalForAll", vec![owner.to_string(), operator.to_string(), approved.to_string()]);
                Ok(())
            }
            Action::SetSlot { slot, value } => {
                let v = self.quantity(*value, U256::zero());
                self.net.storage.entry(self.tx.to).or_default().insert(slot.clone(), v);
                Ok(())
            }
            Action::EmitEvent { name, args } => {
                self.emit(name, args.clone());
                Ok(())
            }
            Action::Revert { reason } => Err(reason.clone()),
        }
    }

    fn emit(&mut self, name: &str, args: Vec<String>) {
        self.events.push(Event { name: name.to_string(), args });
    }

    fn token(&self, a: &Address) -> Result<&super::TokenContract, String> {
        self.net.tokens.get(a).ok_or_else(|| "no-token".to_string())
    }

    fn token_mut(&mut self, a: &Address) -> Result<&mut super::TokenContract, String> {
        self.net.tokens.get_mut(a).ok_or_else(|| "no-token".to_string())
    }

    fn token_transfer(&mut self, token: Address, from: Address, to: Address, amt: U256) -> Step {
        let t = self.token_mut(&token)?;
        let bal = t.balance_of(&from);
        if bal < amt {
            return Err("insufficient-balance".into());
        }
        t.balances.insert(from, Amount(bal - amt));
        let dest = t.balance_of(&to);
        t.balances.insert(to, Amount(dest + amt));
        self.emit("Transfer", vec![from.to_string(), to.to_string(), amt.to_string()]);
        Ok(())
    }

    fn token_call(&mut self, token: Address, data: &[u8]) -> Step {
        if data.len() < 4 {
            return Err("no-fallback".into());
        }
        let (sel, args) = (&data[..4], &data[4..]);
        let sender = self.tx.from;
        let matches = |sig: &str| sel == selector(sig);
        self.actions += 1;
        if matches("transfer(address,uint256)") {
            let v = decode_args("address,uint256", args)?;
            self.token_transfer(token, sender, as_addr(&v[0]), as_uint(&v[1]))
        } else if matches("transferFrom(address,address,uint256)") {
            let v = decode_args("address,address,uint256", args)?;
            let (owner, to, amt) = (as_addr(&v[0]), as_addr(&v[1]), as_uint(&v[2]));
            if owner != sender {
                let t = self.token_mut(&token)?;
                let allowed = t.allowance(&owner, &sender);
                if allowed < amt {
                    return Err("insufficient-allowance".into());
                }
                if allowed != U256::MAX {
                    t.allowances.insert((owner, sender), Amount(allowed - amt));
                }
            }
            self.token_transfer(token, owner, to, amt)
        } else if matches("approve(address,uint256)") {
            let v = decode_args("address,uint256", args)?;
            self.set_allowance(token, sender, as_addr(&v[0]), as_uint(&v[1]))
        } else if matches("increaseAllowance(address,uint256)") {
            let v = decode_args("address,uint256", args)?;
            let spender = as_addr(&v[0]);
            let cur = self.token(&token)?.allowance(&sender, &spender);
            self.set_allowance(token, sender, spender, cur.saturating_add(as_uint(&v[1])))
        } else if matches("permit(address,address,uint256,uint256,uint8,bytes32,bytes32)") {
            let v = decode_args("address,address,uint256,uint256,uint8,bytes32,bytes32", args)?;
            self.set_allowance(token, as_addr(&v[0]), as_addr(&v[1]), as_uint(&v[2]))
        } else {
            Err("unknown-selector".into())
        }
    }

    fn set_allowance(&mut self, token: Address, owner: Address, spender: Address, amt: U256) -> Step {
        self.token_mut(&token)?.allowances.insert((owner, spender), Amount(amt));
        self.emit("Approval", vec![owner.to_string(), spender.to_string(), amt.to_string()]);
        Ok(())
    }

    fn nft_call(&mut self, collection: Address, data: &[u8]) -> Step {
        if data.len() < 4 {
            return Err("no-fallback".into());
        }
        let (sel, args) = (&data[..4], &data[4..]);
        let sender = self.tx.from;
        self.actions += 1;
        if sel == selector("setApprovalForAll(address,bool)") {
            let v = decode_args("address,bool", args)?;
            let approved = matches!(v[1], AbiValue::Bool(true));
            let operator = as_addr(&v[0]);
            let n = self.net.nfts.get_mut(&collection).expect("checked by caller");
            n.operator_approvals.insert((sender, operator), approved);
            self.emit("ApprovalForAll", vec![sender.to_string(), operator.to_string(), approved.to_string()]);
            Ok(())
        } else if sel == selector("transferFrom(address,address,uint256)")
            || sel == selector("safeTransferFrom(address,address,uint256)")
        {
            let v = decode_args("address,address,uint256", args)?;
            let (owner, to, id) = (as_addr(&v[0]), as_addr(&v[1]), as_uint(&v[2]));
            if id.bits() > 64 {
                return Err("nonexistent-token".into());
            }
            let n = self.net.nfts.get_mut(&collection).expect("checked by caller");
            match n.owners.get(&id.low_u64()) {
                Some(o) if *o == owner => {}
                _ => return Err("not-owner".into()),
            }
            let approved = n.operator_approvals.get(&(owner, sender)).copied().unwrap_or(false);
            if sender != owner && !approved {
                return Err("not-authorized".into());
            }
            n.owners.insert(id.low_u64(), to);
            self.emit("Transfer", vec![owner.to_string(), to.to_string(), id.to_string()]);
            Ok(())
        } else {
            Err("unknown-selector".into())
        }
    }
}

fn decode_args(types: &str, args: &[u8]) -> Result<Vec<AbiValue>, String> {
    let types: Vec<AbiType> = types.split(',').map(|t| AbiType::parse(t).expect("static type list")).collect();
    abi::decode(&types, args).map_err(|_| "decode-error".to_string())
}

fn as_addr(v: &AbiValue) -> Address {
    match v {
        AbiValue::Address(a) => *a,
        _ => Address::ZERO,
    }
}

fn as_uint(v: &AbiValue) -> U256 {
    match v {
        AbiValue::Uint(x) | AbiValue::Int(x) => *x,
        _ => U256::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{
        behavior::Clause, behavior::Comparator, behavior::Constant, behavior::Guard, Mempool, TokenContract,
    };
    use super::*;

    const GWEI: u64 = 1_000_000_000;

    fn addr(b: u8) -> Address {
        Address([b; 20])
    }

    fn world() -> ChainWorld {
        let mut w = ChainWorld::new();
        let mut n = NetworkState::new(NetworkId::MAINNET, "mainnet");
        n.accounts.insert(addr(1), U256::from(100u64));
        n.accounts.insert(addr(2), U256::from(10u64));
        let mut t = TokenContract {
            address: addr(0x70),
            name: "Reward".into(),
            symbol: "RWD".into(),
            decimals: 0,
            total_supply: Amount::from_u64(50),
            balances: BTreeMap::new(),
            allowances: BTreeMap::new(),
            operator_approvals: BTreeMap::new(),
        };
        t.balances.insert(addr(1), Amount::from_u64(50));
        n.tokens.insert(t.address, t);
        w.add_network(n);
        w
    }

    fn tx(from: u8, to: u8, value: u64, price: u64) -> Transaction {
        Transaction {
            from: addr(from),
            to: addr(to),
            value: Amount::from_u64(value),
            input: String::new(),
            gas_price: Amount::from_u64(price),
        }
    }

    /// gasprice == 0 → mint 100 to caller; else → move caller's whole balance.
    fn gasprice_program() -> ContractBehavior {
        ContractBehavior {
            address: addr(0xf3),
            name: "gasprice-branch".into(),
            clauses: vec![
                Clause {
                    when: Some(Guard { var: EnvVar::GasPrice, cmp: Comparator::Eq, value: Constant(U256::zero()) }),
                    actions: vec![Action::Mint {
                        token: addr(0x70),
                        to: Party::Caller,
                        amount: Quantity::Const(U256::from(100u64)),
                    }],
                },
                Clause {
                    when: None,
                    actions: vec![Action::TransferToken {
                        token: addr(0x70),
                        from: Party::Caller,
                        to: Party::Addr(addr(0xaa)),
                        amount: Quantity::Balance,
                    }],
                },
            ],
        }
    }

    fn env(w: &ChainWorld, gas_price: u64) -> BlockEnv {
        BlockEnv { gas_price: Amount::from_u64(gas_price), ..w.network(NetworkId::MAINNET).unwrap().block.clone() }
    }

    #[test]
    fn native_transfer_conserves_value() {
        let mut w = world();
        let e = env(&w, 0);
        let o = w.execute_transaction(NetworkId::MAINNET, &e, &tx(1, 2, 5, 0)).unwrap();
        assert!(o.is_success());
        assert_eq!(o.delta_of(Asset::Native, &addr(1)), SignedAmount::negative(U256::from(5u64)));
        assert_eq!(o.delta_of(Asset::Native, &addr(2)), SignedAmount::positive(U256::from(5u64)));
        assert_eq!(o.deltas.len(), 2);
    }

    #[test]
    fn revert_leaves_state_untouched() {
        let mut w = world();
        let before = w.clone();
        let e = env(&w, 0);
        let o = w.execute_transaction(NetworkId::MAINNET, &e, &tx(2, 1, 500, 0)).unwrap();
        assert_eq!(o.status, Status::Revert("insufficient-funds".into()));
        assert!(o.deltas.is_empty());
        assert_eq!(w, before);
    }

    #[test]
    fn unknown_sender_and_network() {
        let mut w = world();
        let e = env(&w, 0);
        assert_eq!(
            w.execute_transaction(NetworkId::MAINNET, &e, &tx(9, 1, 0, 0)),
            Err(ChainError::UnknownSender(addr(9)))
        );
        assert!(matches!(w.execute_transaction(NetworkId(5), &e, &tx(1, 2, 0, 0)), Err(ChainError::UnknownNetwork(_))));
    }

    #[test]
    fn data_to_account_without_code_reverts() {
        let mut w = world();
        let e = env(&w, 0);
        let mut t = tx(1, 2, 0, 0);
        t.input = "0xdeadbeef".into();
        let o = w.execute_transaction(NetworkId::MAINNET, &e, &t).unwrap();
        assert_eq!(o.status, Status::Revert("no-code".into()));
        t.input = "0xzz".into();
        let o = w.execute_transaction(NetworkId::MAINNET, &e, &t).unwrap();
        assert_eq!(o.status, Status::Revert("decode-error".into()));
    }

    #[test]
    fn gasprice_program_both_branches() {
        let mut w = world();
        let p = gasprice_program();
        w.network_mut(NetworkId::MAINNET).unwrap().behaviors.insert(p.address, p);
        let call = tx(1, 0xf3, 0, 30 * GWEI);
        let reward = Asset::Token(addr(0x70));

        let mut on_chain = w.clone();
        let e = env(&on_chain, 30 * GWEI);
        let o = on_chain.execute_transaction(NetworkId::MAINNET, &e, &call).unwrap();
        assert_eq!(o.delta_of(reward, &addr(1)), SignedAmount::negative(U256::from(50u64)));
        assert_eq!(o.delta_of(reward, &addr(0xaa)), SignedAmount::positive(U256::from(50u64)));

        let e0 = env(&w, 0);
        let o = w.execute_transaction(NetworkId::MAINNET, &e0, &call).unwrap();
        assert_eq!(o.delta_of(reward, &addr(1)), SignedAmount::positive(U256::from(100u64)));
        // Minting is the one case where token deltas do not sum to zero.
        assert_eq!(o.deltas.len(), 1);
    }

    #[test]
    fn approve_then_transfer_from() {
        let mut w = world();
        let e = env(&w, 0);
        let spender = addr(2);
        let mut t = tx(1, 0x70, 0, 0);
        t.input = format!(
            "0x{}{}",
            hex::encode(selector("approve(address,uint256)")),
            hex::encode(abi::encode(&[AbiValue::Address(spender), AbiValue::Uint(U256::from(20u64))]))
        );
        assert!(w.execute_transaction(NetworkId::MAINNET, &e, &t).unwrap().is_success());
        let mut pull = tx(2, 0x70, 0, 0);
        pull.input = format!(
            "0x{}{}",
            hex::encode(selector("transferFrom(address,address,uint256)")),
            hex::encode(abi::encode(&[
                AbiValue::Address(addr(1)),
                AbiValue::Address(addr(3)),
                AbiValue::Uint(U256::from(15u64)),
            ]))
        );
        let o = w.execute_transaction(NetworkId::MAINNET, &e, &pull).unwrap();
        assert!(o.is_success());
        assert_eq!(o.delta_of(Asset::Token(addr(0x70)), &addr(3)), SignedAmount::positive(U256::from(15u64)));
        let o = w.execute_transaction(NetworkId::MAINNET, &e, &pull).unwrap();
        assert_eq!(o.status, Status::Revert("insufficient-allowance".into()));
    }

    fn slot_program() -> ContractBehavior {
        serde_json::from_value(serde_json::json!({
            "address": "0xf4f4f4f4f4f4f4f4f4f4f4f4f4f4f4f4f4f4f4f4",
            "clauses": [
                {"when": {"var": "caller", "cmp": "==", "value": "0x0202020202020202020202020202020202020202"},
                 "actions": [{"op": "setSlot", "slot": "price", "value": "1"}]},
                {"when": {"var": "slot:price", "cmp": "==", "value": "0"},
                 "actions": [{"op": "mint", "token": "0x7070707070707070707070707070707070707070", "to": "caller", "amount": "100"}]},
                {"actions": [{"op": "transferToken", "token": "0x7070707070707070707070707070707070707070",
                              "from": "caller", "to": "0xaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa", "amount": "balance"}]}
            ]
        }))
        .unwrap()
    }

    #[test]
    fn front_running_changes_victim_outcome() {
        let mut w = world();
        let p = slot_program();
        w.network_mut(NetworkId::MAINNET).unwrap().behaviors.insert(p.address, p);
        let victim = tx(1, 0xf4, 0, 30);
        let front = tx(2, 0xf4, 0, 50);

        let alone =
            w.clone().form_and_execute_block(NetworkId::MAINNET, &[victim.clone()].into_iter().collect()).unwrap();
        let mut single = w.clone();
        let e = single.network(NetworkId::MAINNET).unwrap().block.for_tx(&victim);
        let direct = single.execute_transaction(NetworkId::MAINNET, &e, &victim).unwrap();
        assert_eq!(alone[0].1, direct);
        assert!(direct.is_success(), "{direct:?}");

        // Both arrival orders give the same block order, front-runner first.
        for pool in [vec![victim.clone(), front.clone()], vec![front.clone(), victim.clone()]] {
            let m: Mempool = pool.into_iter().collect();
            let out = w.clone().form_and_execute_block(NetworkId::MAINNET, &m).unwrap();
            assert_eq!(out[0].0, front);
            assert_ne!(out[1].1.deltas, direct.deltas);
        }
    }

    #[test]
    fn independent_transfers_commute() {
        let w = world();
        let a = tx(1, 3, 7, 10);
        let b = tx(2, 4, 3, 10);
        let run = |order: Vec<Transaction>| {
            let out = w.clone().form_and_execute_block(NetworkId::MAINNET, &order.into_iter().collect()).unwrap();
            let mut d: Vec<Delta> = out.into_iter().flat_map(|(_, o)| o.deltas).collect();
            d.sort_by_key(|x| (x.asset, x.account));
            d
        };
        assert_eq!(run(vec![a.clone(), b.clone()]), run(vec![b, a]));
    }

    #[test]
    fn block_advances_environment() {
        let mut w = world();
        let before = w.network(NetworkId::MAINNET).unwrap().block.clone();
        w.form_and_execute_block(NetworkId::MAINNET, &Mempool::new()).unwrap();
        let after = &w.network(NetworkId::MAINNET).unwrap().block;
        assert_eq!(after.number, before.number + 1);
        assert!(after.timestamp >= before.timestamp);
    }
}
