use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::prestige::{Account, AccountId};
use crate::scalar::Scalar;

use super::dag::{DagError, MiningDag};
use super::retain::{propagate_upstream, retain_simple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MiningMode {
    Simple,
    Progressive,
}

impl MiningMode {
    pub const ALL: [MiningMode; 2] = [MiningMode::Simple, MiningMode::Progressive];

    pub fn as_str(self) -> &'static str {
        match self {
            MiningMode::Simple => "simple",
            MiningMode::Progressive => "progressive",
        }
    }
}

impl fmt::Display for MiningMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MiningMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(MiningMode::Simple),
            "progressive" => Ok(MiningMode::Progressive),
            other => Err(format!("unknown mining mode `{other}` (expected simple or progressive)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransferError {
    #[error("unknown account {0}")]
    UnknownAccount(AccountId),
    #[error("contributor {0} is not in the mining DAG")]
    NotInDag(AccountId),
}

/// Outcome of one acknowledged task: who paid, and who kept how much.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferRecord<S> {
    pub beneficiary: AccountId,
    pub contributor: AccountId,
    pub amount: S,
    pub block: u64,
    pub mode: MiningMode,
    pub retained_by: Vec<(AccountId, S)>,
}

impl<S: Scalar> TransferRecord<S> {
    pub fn retained_total(&self) -> S {
        self.retained_by.iter().fold(S::zero(), |acc, (_, v)| acc + *v)
    }

    pub fn retained_by_account(&self, id: AccountId) -> S {
        self.retained_by
            .iter()
            .filter(|(n, _)| *n == id)
            .fold(S::zero(), |acc, (_, v)| acc + *v)
    }
}

/// Debits `x` from the beneficiary and credits it according to `mode`.
///
/// Every retain fraction is computed from prestige as it stood before this
/// transfer. `b` is only used in progressive mode. Accounts are untouched on
/// error.
#[allow(clippy::too_many_arguments)]
pub fn apply_transfer<S: Scalar>(
    accounts: &mut BTreeMap<AccountId, Account<S>>,
    dag: &MiningDag,
    beneficiary: AccountId,
    contributor: AccountId,
    x: S,
    mode: MiningMode,
    b: S,
    block: u64,
) -> Result<TransferRecord<S>, TransferError> {
    for id in [beneficiary, contributor] {
        if !accounts.contains_key(&id) {
            return Err(TransferError::UnknownAccount(id));
        }
    }
    let retained_by = match mode {
        MiningMode::Simple => vec![(contributor, retain_simple(x))],
        MiningMode::Progressive => {
            let prestige_of = |n: AccountId| accounts.get(&n).map_or(S::zero(), |a| a.prestige);
            let split = propagate_upstream(dag, contributor, x, prestige_of, b).map_err(|e| match e {
                DagError::UnknownNode(n) | DagError::UnknownParent(n) | DagError::DuplicateNode(n) => {
                    TransferError::NotInDag(n)
                }
            })?;
            if let Some((missing, _)) = split.iter().find(|(n, _)| !accounts.contains_key(n)) {
                return Err(TransferError::UnknownAccount(*missing));
            }
            split
        }
    };

    if let Some(a) = accounts.get_mut(&beneficiary) {
        a.prestige = a.prestige - x;
    }
    for (n, kept) in &retained_by {
        if let Some(a) = accounts.get_mut(n) {
            a.prestige = a.prestige + *kept;
        }
    }
    Ok(TransferRecord {
        beneficiary,
        contributor,
        amount: x,
        block,
        mode,
        retained_by,
    })
}
