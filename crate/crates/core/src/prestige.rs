//! Per-block prestige dynamics.
//!
//! Each block every account regenerates prestige from its coin balance and
//! loses a fixed fraction `d` of what it holds:
//!
//! ```text
//! P[t] = C + (1 - d) * P[t-1]
//! ```
//!
//! The map is an affine contraction whose unique attractor is the static
//! value `C / d`.

use std::fmt;

use num_traits::pow;
use thiserror::Error;

use crate::ack::VerificationKey;
use crate::scalar::Scalar;
use crate::Coins;

/// Opaque user identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccountId(pub u32);

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("decay must lie strictly between 0 and 1, got {0}")]
    Decay(String),
    #[error("branch power must be non-negative, got {0}")]
    BranchPower(String),
    #[error("service fee must be non-negative, got {0}")]
    ServiceFee(String),
}

/// System-wide constants: decay `d`, branch power `b` and default service
/// fee `f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams<S> {
    decay: S,
    branch_power: S,
    service_fee: S,
}

impl<S: Scalar> SystemParams<S> {
    // negated so NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(decay: S, branch_power: S, service_fee: S) -> Result<Self, ParamsError> {
        if !(decay > S::zero() && decay < S::one()) {
            return Err(ParamsError::Decay(format!("{decay:?}")));
        }
        if !(branch_power >= S::zero()) {
            return Err(ParamsError::BranchPower(format!("{branch_power:?}")));
        }
        if !(service_fee >= S::zero()) {
            return Err(ParamsError::ServiceFee(format!("{service_fee:?}")));
        }
        Ok(Self {
            decay,
            branch_power,
            service_fee,
        })
    }

    pub fn decay(&self) -> S {
        self.decay
    }

    pub fn branch_power(&self) -> S {
        self.branch_power
    }

    pub fn service_fee(&self) -> S {
        self.service_fee
    }

    /// Fraction of prestige kept from one block to the next, `1 - d`.
    pub fn retention(&self) -> S {
        S::one() - self.decay
    }
}

/// A user identity: coins, prestige and the key used to check the ACKs it
/// signs.
#[derive(Clone, Debug, PartialEq)]
pub struct Account<S> {
    pub id: AccountId,
    pub coins: Coins,
    pub prestige: S,
    pub verification_key: VerificationKey,
}

impl<S: Scalar> Account<S> {
    /// A freshly joined user starts with zero prestige.
    pub fn new(id: AccountId, coins: Coins, verification_key: VerificationKey) -> Self {
        Self {
            id,
            coins,
            prestige: S::zero(),
            verification_key,
        }
    }

    pub fn with_prestige(mut self, prestige: S) -> Self {
        self.prestige = prestige;
        self
    }

    pub fn static_value(&self, params: &SystemParams<S>) -> S {
        static_value(self.coins, params)
    }
}

/// One application of the recurrence to a bare prestige value.
pub fn next_prestige<S: Scalar>(prestige: S, coins: Coins, params: &SystemParams<S>) -> S {
    S::from_coins(coins) + params.retention() * prestige
}

/// Advances one account by one block. Coins are untouched.
pub fn step_account<S: Scalar>(account: &Account<S>, params: &SystemParams<S>) -> Account<S> {
    Account {
        prestige: next_prestige(account.prestige, account.coins, params),
        ..account.clone()
    }
}

/// The fixed point `C / d`.
pub fn static_value<S: Scalar>(coins: Coins, params: &SystemParams<S>) -> S {
    S::from_coins(coins) / params.decay()
}

/// Adds `delta` (possibly negative) to the account's prestige.
pub fn inject_prestige<S: Scalar>(account: &Account<S>, delta: S) -> Account<S> {
    Account {
        prestige: account.prestige + delta,
        ..account.clone()
    }
}

/// Signed distance from the static value after `blocks` steps starting at
/// `initial`: `(P0 - S) * (1 - d)^t`.
pub fn convergence_gap<S: Scalar>(
    initial: S,
    coins: Coins,
    params: &SystemParams<S>,
    blocks: usize,
) -> S {
    (initial - static_value(coins, params)) * pow(params.retention(), blocks)
}

/// Number of blocks until prestige started at zero first reaches `fraction`
/// of the static value.
pub fn blocks_to_reach(fraction: f64, coins: Coins, params: &SystemParams<f64>) -> u64 {
    let target = fraction * static_value(coins, params);
    let mut prestige = 0.0;
    let mut blocks = 0;
    while prestige < target {
        prestige = next_prestige(prestige, coins, params);
        blocks += 1;
    }
    blocks
}
