//! Proof-of-Prestige core: prestige dynamics, simple and progressive mining,
//! composite-signature acknowledgments and the block state machine.
//!
//! Prestige and mining math are generic over [`Scalar`]; the chain runs on
//! `f64`. The aliases below fix the scalar for everyday use.

pub mod ack;
pub mod chain;
pub mod mining;
pub mod prestige;
pub mod scalar;

pub use scalar::{relative_error, Scalar};

/// Coin balances are whole, non-negative units.
pub type Coins = u64;

/// Prestige in the double-precision arithmetic model.
pub type Prestige = f64;

/// Exact rational prestige, for tests that must hold with zero tolerance.
pub type Exact = num_rational::Ratio<i128>;

pub type SystemParams = prestige::SystemParams<Prestige>;
pub type Account = prestige::Account<Prestige>;
pub type TransferRecord = mining::TransferRecord<Prestige>;

pub use ack::{MockScheme, PathAck, SimpleAck, TaskId, VerificationKey};
pub use chain::{Block, ChainError, ChainState, Economics};
pub use mining::{MiningDag, MiningMode};
pub use prestige::{AccountId, ParamsError};
