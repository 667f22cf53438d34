//! Block-by-block state machine.
//!
//! Each block, in this order:
//!
//! 1. every account regenerates and decays its prestige,
//! 2. queued transfers are applied in submission order,
//! 3. a minter is drawn with probability proportional to `max(P, 0)`,
//! 4. the minter collects the subsidy, ACK fees and motivator payouts,
//! 5. the height increments.
//!
//! Coins received in step 4 start regenerating prestige in the next block.

mod election;
mod snapshot;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ack::{
    verify_path_ack, CompositeScheme, KeyPair, MockScheme, PathAck, SimpleAck, TaskId, VerificationKey,
};
use crate::mining::{apply_transfer, DagError, MiningDag, MiningMode, TransferError};
use crate::prestige::{step_account, AccountId};
use crate::{Account, Coins, Prestige, SystemParams, TransferRecord};

pub use election::elect_minter;
pub use snapshot::SnapshotError;

const SECURITY_PARAMETER: u32 = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("chain has no accounts")]
    NoAccounts,
    #[error("unknown account {0}")]
    UnknownAccount(AccountId),
    #[error("no account owns verification key {0}")]
    UnknownKey(VerificationKey),
    #[error("account {0} already exists")]
    DuplicateAccount(AccountId),
    #[error("acknowledgment signature does not verify")]
    InvalidSignature,
    #[error("task {0} was already submitted")]
    DuplicateTask(TaskId),
    #[error("path acknowledgment contradicts the mining DAG")]
    InconsistentPath,
    #[error("insufficient funds: need {need}, have {have}")]
    InsufficientFunds { need: Coins, have: Coins },
    #[error("coin amount overflow")]
    Overflow,
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

/// Coin-side reward channels besides motivators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Economics {
    /// New coins minted to every block's minter.
    pub subsidy: Coins,
    /// Fee the contributor pays the minter per processed ACK.
    pub ack_fee: Coins,
}

/// Motivator funding, paid to the minter of each block while it lasts. The
/// full amount is held in escrow from registration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RewardSchedule {
    pub funder: AccountId,
    pub coins_per_block: Coins,
    pub remaining_blocks: u64,
}

/// A validated transfer waiting for the next block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendingTransfer {
    pub beneficiary: AccountId,
    pub contributor: AccountId,
    pub amount: Prestige,
    pub task_id: Option<TaskId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub height: u64,
    pub minter: AccountId,
    pub processed: Vec<TransferRecord>,
    pub fees_collected: Coins,
    pub subsidy: Coins,
    pub motivator_payout: Coins,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    height: u64,
    accounts: BTreeMap<AccountId, Account>,
    keys: BTreeMap<VerificationKey, AccountId>,
    dag: MiningDag,
    pending: Vec<PendingTransfer>,
    motivators: Vec<RewardSchedule>,
    seen_tasks: BTreeSet<TaskId>,
    params: SystemParams,
    mode: MiningMode,
    economics: Economics,
    rng_seed: u64,
    genesis_coins: u128,
    minted: u128,
    escrow: u128,
    scheme: MockScheme,
}

impl ChainState {
    pub fn new(params: SystemParams, mode: MiningMode, economics: Economics, rng_seed: u64) -> Self {
        Self {
            height: 0,
            accounts: BTreeMap::new(),
            keys: BTreeMap::new(),
            dag: MiningDag::new(),
            pending: Vec::new(),
            motivators: Vec::new(),
            seen_tasks: BTreeSet::new(),
            params,
            mode,
            economics,
            rng_seed,
            genesis_coins: 0,
            minted: 0,
            escrow: 0,
            scheme: MockScheme::setup(SECURITY_PARAMETER).expect("non-zero security parameter"),
        }
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn mode(&self) -> MiningMode {
        self.mode
    }

    pub fn economics(&self) -> Economics {
        self.economics
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn scheme(&self) -> &MockScheme {
        &self.scheme
    }

    pub fn accounts(&self) -> &BTreeMap<AccountId, Account> {
        &self.accounts
    }

    pub fn account(&self, id: AccountId) -> Result<&Account, ChainError> {
        self.accounts.get(&id).ok_or(ChainError::UnknownAccount(id))
    }

    pub fn dag(&self) -> &MiningDag {
        &self.dag
    }

    pub fn pending(&self) -> &[PendingTransfer] {
        &self.pending
    }

    pub fn motivators(&self) -> &[RewardSchedule] {
        &self.motivators
    }

    pub fn is_task_seen(&self, task: &TaskId) -> bool {
        self.seen_tasks.contains(task)
    }

    pub fn total_prestige(&self) -> Prestige {
        self.accounts.values().map(|a| a.prestige).sum()
    }

    pub fn total_coins(&self) -> u128 {
        self.accounts.values().map(|a| a.coins as u128).sum()
    }

    /// Key pair of an account. Simulation keys are derived from the id.
    pub fn keypair(&self, id: AccountId) -> KeyPair {
        let mut seed = b"account".to_vec();
        seed.extend_from_slice(&id.0.to_be_bytes());
        self.scheme.keygen(&seed)
    }

    /// Registers a genesis account with zero prestige.
    pub fn add_account(&mut self, id: AccountId, coins: Coins) -> Result<VerificationKey, ChainError> {
        self.add_account_with_prestige(id, coins, 0.0)
    }

    pub fn add_account_with_prestige(
        &mut self,
        id: AccountId,
        coins: Coins,
        prestige: Prestige,
    ) -> Result<VerificationKey, ChainError> {
        if self.accounts.contains_key(&id) {
            return Err(ChainError::DuplicateAccount(id));
        }
        let vk = self.keypair(id).public;
        self.accounts
            .insert(id, Account::new(id, coins, vk).with_prestige(prestige));
        self.keys.insert(vk, id);
        self.genesis_coins += coins as u128;
        Ok(vk)
    }

    pub fn add_root(&mut self, id: AccountId) -> Result<(), ChainError> {
        self.account(id)?;
        Ok(self.dag.add_root(id)?)
    }

    pub fn attach(&mut self, parent: AccountId, child: AccountId) -> Result<(), ChainError> {
        self.account(child)?;
        Ok(self.dag.attach_node(parent, child)?)
    }

    /// Adds `delta` to an account's prestige outside the block cycle.
    pub fn inject_prestige(&mut self, id: AccountId, delta: Prestige) -> Result<(), ChainError> {
        let a = self.accounts.get_mut(&id).ok_or(ChainError::UnknownAccount(id))?;
        a.prestige += delta;
        Ok(())
    }

    fn id_of(&self, vk: &VerificationKey) -> Result<AccountId, ChainError> {
        self.keys.get(vk).copied().ok_or(ChainError::UnknownKey(*vk))
    }

    /// Queues a simple acknowledgment signed by `beneficiary`.
    pub fn submit_simple_ack(&mut self, ack: &SimpleAck, beneficiary: AccountId) -> Result<(), ChainError> {
        let beneficiary_vk = self.account(beneficiary)?.verification_key;
        if !ack.verify(&self.scheme, &beneficiary_vk).is_valid() {
            return Err(ChainError::InvalidSignature);
        }
        let contributor = self.id_of(&ack.hop.contributor_vk)?;
        let task = ack.task_id();
        if self.seen_tasks.contains(&task) {
            return Err(ChainError::DuplicateTask(task));
        }
        if self.mode == MiningMode::Progressive && !self.dag.contains(contributor) {
            return Err(TransferError::NotInDag(contributor).into());
        }
        self.seen_tasks.insert(task);
        self.pending.push(PendingTransfer {
            beneficiary,
            contributor,
            amount: ack.hop.amount as Prestige,
            task_id: Some(task),
        });
        Ok(())
    }

    /// Queues a path acknowledgment whose last hop was signed by
    /// `beneficiary`.
    ///
    /// The first hop must name a DAG root. Hops already processed are
    /// skipped; new hops attach their signer under their contributor. The
    /// whole submission is rejected if the leaf hop was already processed or
    /// any hop contradicts an existing edge.
    pub fn submit_path_ack(&mut self, ack: &PathAck, beneficiary: AccountId) -> Result<(), ChainError> {
        let leaf_vk = self.account(beneficiary)?.verification_key;
        let hops = ack.hops();
        let contributors = hops
            .iter()
            .map(|h| self.id_of(&h.contributor_vk))
            .collect::<Result<Vec<_>, _>>()?;
        if !self.dag.is_root(contributors[0]) {
            return Err(ChainError::InvalidSignature);
        }
        let root_vk = hops[0].contributor_vk;
        if !verify_path_ack(&self.scheme, ack, &root_vk, &leaf_vk).is_valid() {
            return Err(ChainError::InvalidSignature);
        }
        let leaf_task = ack.leaf().task_id;
        if self.seen_tasks.contains(&leaf_task) {
            return Err(ChainError::DuplicateTask(leaf_task));
        }

        let mut edges = Vec::new();
        let mut queued = Vec::new();
        let mut tasks = BTreeSet::new();
        let mut planned: BTreeMap<AccountId, AccountId> = BTreeMap::new();
        for (k, hop) in hops.iter().enumerate() {
            let contributor = contributors[k];
            let signer = match contributors.get(k + 1) {
                Some(next) => *next,
                None => beneficiary,
            };
            let existing = match self.dag.parent(signer) {
                Ok(p) => Some(p),
                Err(_) => planned.get(&signer).map(|p| Some(*p)),
            };
            match existing {
                Some(Some(parent)) if parent == contributor => {}
                Some(_) => return Err(ChainError::InconsistentPath),
                None => {
                    planned.insert(signer, contributor);
                    edges.push((contributor, signer));
                }
            }
            if !tasks.insert(hop.task_id) {
                return Err(ChainError::DuplicateTask(hop.task_id));
            }
            if !self.seen_tasks.contains(&hop.task_id) {
                queued.push(PendingTransfer {
                    beneficiary: signer,
                    contributor,
                    amount: hop.amount as Prestige,
                    task_id: Some(hop.task_id),
                });
            }
        }

        for (parent, child) in edges {
            self.dag.attach_node(parent, child)?;
        }
        for t in &queued {
            self.seen_tasks.insert(t.task_id.expect("path hops carry task ids"));
        }
        self.pending.extend(queued);
        Ok(())
    }

    /// Queues a transfer without an acknowledgment. Scenarios use this to
    /// drive the economics directly.
    pub fn enqueue_transfer(
        &mut self,
        beneficiary: AccountId,
        contributor: AccountId,
        amount: Prestige,
    ) -> Result<(), ChainError> {
        self.account(beneficiary)?;
        self.account(contributor)?;
        if self.mode == MiningMode::Progressive && !self.dag.contains(contributor) {
            return Err(TransferError::NotInDag(contributor).into());
        }
        self.pending.push(PendingTransfer {
            beneficiary,
            contributor,
            amount,
            task_id: None,
        });
        Ok(())
    }

    /// Escrows `coins_per_block * duration` from `funder`. A zero duration is
    /// a no-op.
    pub fn register_motivator_reward(
        &mut self,
        funder: AccountId,
        coins_per_block: Coins,
        duration: u64,
    ) -> Result<(), ChainError> {
        let have = self.account(funder)?.coins;
        if duration == 0 {
            return Ok(());
        }
        let need = coins_per_block.checked_mul(duration).ok_or(ChainError::Overflow)?;
        if have < need {
            return Err(ChainError::InsufficientFunds { need, have });
        }
        self.accounts.get_mut(&funder).expect("checked above").coins -= need;
        self.escrow += need as u128;
        self.motivators.push(RewardSchedule {
            funder,
            coins_per_block,
            remaining_blocks: duration,
        });
        Ok(())
    }

    fn election_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(self.height);
        rng
    }

    pub fn advance_block(&mut self) -> Result<Block, ChainError> {
        if self.accounts.is_empty() {
            return Err(ChainError::NoAccounts);
        }
        for a in self.accounts.values_mut() {
            *a = step_account(a, &self.params);
        }

        let mut processed = Vec::with_capacity(self.pending.len());
        let mut fees: Coins = 0;
        for t in std::mem::take(&mut self.pending) {
            let payer = self.accounts.get_mut(&t.contributor).ok_or(ChainError::UnknownAccount(t.contributor))?;
            let fee = self.economics.ack_fee.min(payer.coins);
            payer.coins -= fee;
            fees += fee;
            processed.push(apply_transfer(
                &mut self.accounts,
                &self.dag,
                t.beneficiary,
                t.contributor,
                t.amount,
                self.mode,
                self.params.branch_power(),
                self.height + 1,
            )?);
        }

        let minter = elect_minter(&self.accounts, &mut self.election_rng()).ok_or(ChainError::NoAccounts)?;

        let mut motivator_payout: Coins = 0;
        for s in &mut self.motivators {
            motivator_payout += s.coins_per_block;
            s.remaining_blocks -= 1;
        }
        self.motivators.retain(|s| s.remaining_blocks > 0);
        self.escrow -= motivator_payout as u128;
        self.minted += self.economics.subsidy as u128;

        let m = self.accounts.get_mut(&minter).expect("minter drawn from accounts");
        m.coins = m
            .coins
            .checked_add(self.economics.subsidy + fees + motivator_payout)
            .ok_or(ChainError::Overflow)?;

        self.height += 1;
        Ok(Block {
            height: self.height,
            minter,
            processed,
            fees_collected: fees,
            subsidy: self.economics.subsidy,
            motivator_payout,
        })
    }

    /// `sum(coins) + escrow == genesis + minted`. Holds after every
    /// operation.
    pub fn coins_balanced(&self) -> bool {
        self.total_coins() + self.escrow == self.genesis_coins + self.minted
    }

    pub fn minted(&self) -> u128 {
        self.minted
    }

    pub fn escrow(&self) -> u128 {
        self.escrow
    }

    pub fn genesis_coins(&self) -> u128 {
        self.genesis_coins
    }
}
