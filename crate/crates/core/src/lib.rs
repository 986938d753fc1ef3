//! Mutation-based differential testing of cryptocurrency wallet pipelines.
//!
//! Seeds (transactions, signing requests and UI interactions) are built
//! from a miniature multi-network chain and bundled catalogs, mutated,
//! submitted to a wallet behind an adapter, and the rendered screens are
//! checked by three oracles whose findings are classified into attack
//! vectors V1 to V13.

pub mod assets;
pub mod campaign;
pub mod chain;
pub mod codec;
pub mod harness;
pub mod hash;
pub mod inspect;
pub mod mutator;
pub mod seeds;
pub mod verifier;
