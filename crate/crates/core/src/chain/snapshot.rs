//! Line-oriented text snapshots of a [`ChainState`].
//!
//! ```text
//! height=3
//! seed=42
//! decay=0.05
//! branch_power=0.5
//! service_fee=200
//! mode=simple
//! [accounts]
//! 0,100,285.25
//! 1,50,142.625
//! ```
//!
//! `key=value` header lines come first. Optional header keys are `subsidy`,
//! `ack_fee`, `genesis_coins`, `minted` and `escrow`. Sections follow, one
//! record per line:
//!
//! * `[accounts]`: `id,coins,prestige`
//! * `[dag]`: `child,parent`, with `-` as the parent of a root
//! * `[motivators]`: `funder,coins_per_block,remaining_blocks`
//! * `[seen]`: processed task id in hex
//! * `[pending]`: `beneficiary,contributor,amount,task` (`-` for no task)
//!
//! Blank lines and lines starting with `#` are ignored. Keys are derived
//! from account ids, so they are not stored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{ChainState, Economics, PendingTransfer, RewardSchedule};
use crate::ack::{TaskId, TASK_ID_LEN};
use crate::mining::MiningMode;
use crate::prestige::AccountId;
use crate::SystemParams;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SnapshotError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing header key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid parameters: {0}")]
    Params(String),
}

fn bad(line: usize, message: impl Into<String>) -> SnapshotError {
    SnapshotError::Line {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Accounts,
    Dag,
    Motivators,
    Seen,
    Pending,
}

fn field<T: std::str::FromStr>(line: usize, raw: &str, what: &str) -> Result<T, SnapshotError> {
    raw.trim()
        .parse()
        .map_err(|_| bad(line, format!("invalid {what} `{}`", raw.trim())))
}

fn fields<const N: usize>(line: usize, text: &str) -> Result<[&str; N], SnapshotError> {
    let parts: Vec<&str> = text.split(',').collect();
    parts
        .try_into()
        .map_err(|p: Vec<&str>| bad(line, format!("expected {N} comma-separated fields, got {}", p.len())))
}

fn task_from_hex(line: usize, raw: &str) -> Result<TaskId, SnapshotError> {
    let bytes = hex::decode(raw.trim()).map_err(|_| bad(line, "task id is not hex"))?;
    let arr: [u8; TASK_ID_LEN] = bytes
        .try_into()
        .map_err(|_| bad(line, "task id must be 32 bytes"))?;
    Ok(TaskId(arr))
}

impl ChainState {
    pub fn to_snapshot(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        // writing into a String cannot fail
        let _ = writeln!(s, "height={}", self.height);
        let _ = writeln!(s, "seed={}", self.rng_seed);
        let _ = writeln!(s, "decay={}", p.decay());
        let _ = writeln!(s, "branch_power={}", p.branch_power());
        let _ = writeln!(s, "service_fee={}", p.service_fee());
        let _ = writeln!(s, "mode={}", self.mode);
        let _ = writeln!(s, "subsidy={}", self.economics.subsidy);
        let _ = writeln!(s, "ack_fee={}", self.economics.ack_fee);
        let _ = writeln!(s, "genesis_coins={}", self.genesis_coins);
        let _ = writeln!(s, "minted={}", self.minted);
        let _ = writeln!(s, "escrow={}", self.escrow);
        s.push_str("[accounts]\n");
        for a in self.accounts.values() {
            let _ = writeln!(s, "{},{},{}", a.id, a.coins, a.prestige);
        }
        s.push_str("[dag]\n");
        for n in self.dag.nodes() {
            match self.dag.parent(n).expect("node from the DAG") {
                Some(parent) => {
                    let _ = writeln!(s, "{n},{parent}");
                }
                None => {
                    let _ = writeln!(s, "{n},-");
                }
            }
        }
        s.push_str("[motivators]\n");
        for m in &self.motivators {
            let _ = writeln!(s, "{},{},{}", m.funder, m.coins_per_block, m.remaining_blocks);
        }
        s.push_str("[seen]\n");
        for t in &self.seen_tasks {
            let _ = writeln!(s, "{t}");
        }
        s.push_str("[pending]\n");
        for t in &self.pending {
            let task = t.task_id.map_or_else(|| "-".to_string(), |t| t.to_string());
            let _ = writeln!(s, "{},{},{},{}", t.beneficiary, t.contributor, t.amount, task);
        }
        s
    }

    pub fn from_snapshot(text: &str) -> Result<Self, SnapshotError> {
        let mut header: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut section = Section::Header;
        let mut accounts = Vec::new();
        let mut edges = Vec::new();
        let mut motivators = Vec::new();
        let mut seen = Vec::new();
        let mut pending = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                section = match name {
                    "accounts" => Section::Accounts,
                    "dag" => Section::Dag,
                    "motivators" => Section::Motivators,
                    "seen" => Section::Seen,
                    "pending" => Section::Pending,
                    other => return Err(bad(line, format!("unknown section `{other}`"))),
                };
                continue;
            }
            match section {
                Section::Header => {
                    let (k, v) = t
                        .split_once('=')
                        .ok_or_else(|| bad(line, "expected key=value"))?;
                    if header.insert(k.trim().to_string(), (line, v.trim().to_string())).is_some() {
                        return Err(bad(line, format!("duplicate key `{}`", k.trim())));
                    }
                }
                Section::Accounts => {
                    let [id, coins, prestige] = fields(line, t)?;
                    let prestige: f64 = field(line, prestige, "prestige")?;
                    if !prestige.is_finite() {
                        return Err(bad(line, "prestige must be finite"));
                    }
                    accounts.push((
                        line,
                        AccountId(field(line, id, "account id")?),
                        field::<u64>(line, coins, "coin balance")?,
                        prestige,
                    ));
                }
                Section::Dag => {
                    let [child, parent] = fields(line, t)?;
                    let child = AccountId(field(line, child, "node id")?);
                    let parent = match parent.trim() {
                        "-" => None,
                        p => Some(AccountId(field(line, p, "parent id")?)),
                    };
                    edges.push((line, child, parent));
                }
                Section::Motivators => {
                    let [funder, per_block, remaining] = fields(line, t)?;
                    let s = RewardSchedule {
                        funder: AccountId(field(line, funder, "funder id")?),
                        coins_per_block: field(line, per_block, "coins per block")?,
                        remaining_blocks: field(line, remaining, "remaining blocks")?,
                    };
                    if s.remaining_blocks == 0 {
                        return Err(bad(line, "exhausted schedules are not stored"));
                    }
                    motivators.push((line, s));
                }
                Section::Seen => seen.push(task_from_hex(line, t)?),
                Section::Pending => {
                    let [ben, con, amount, task] = fields(line, t)?;
                    let task_id = match task.trim() {
                        "-" => None,
                        h => Some(task_from_hex(line, h)?),
                    };
                    pending.push((
                        line,
                        PendingTransfer {
                            beneficiary: AccountId(field(line, ben, "beneficiary id")?),
                            contributor: AccountId(field(line, con, "contributor id")?),
                            amount: field(line, amount, "amount")?,
                            task_id,
                        },
                    ));
                }
            }
        }

        fn get<T: std::str::FromStr>(
            header: &BTreeMap<String, (usize, String)>,
            key: &'static str,
        ) -> Result<Option<T>, SnapshotError> {
            match header.get(key) {
                None => Ok(None),
                Some((line, v)) => field(*line, v, key).map(Some),
            }
        }
        fn need<T: std::str::FromStr>(
            header: &BTreeMap<String, (usize, String)>,
            key: &'static str,
        ) -> Result<T, SnapshotError> {
            get(header, key)?.ok_or(SnapshotError::MissingKey(key))
        }

        const KNOWN: [&str; 11] = [
            "height", "seed", "decay", "branch_power", "service_fee", "mode", "subsidy", "ack_fee",
            "genesis_coins", "minted", "escrow",
        ];
        if let Some((k, (line, _))) = header.iter().find(|(k, _)| !KNOWN.contains(&k.as_str())) {
            return Err(bad(*line, format!("unknown key `{k}`")));
        }

        let params = SystemParams::new(
            need(&header, "decay")?,
            need(&header, "branch_power")?,
            need(&header, "service_fee")?,
        )
        .map_err(|e| SnapshotError::Params(e.to_string()))?;
        let mode: MiningMode = match header.get("mode") {
            None => return Err(SnapshotError::MissingKey("mode")),
            Some((line, v)) => v.parse().map_err(|e: String| bad(*line, e))?,
        };
        let economics = Economics {
            subsidy: get(&header, "subsidy")?.unwrap_or(0),
            ack_fee: get(&header, "ack_fee")?.unwrap_or(0),
        };
        let mut state = ChainState::new(params, mode, economics, need(&header, "seed")?);
        state.height = need(&header, "height")?;

        for (line, id, coins, prestige) in accounts {
            state
                .add_account_with_prestige(id, coins, prestige)
                .map_err(|e| bad(line, e.to_string()))?;
        }
        // parents may be listed after their children
        let mut remaining = edges;
        while !remaining.is_empty() {
            let before = remaining.len();
            let mut deferred = Vec::new();
            for (line, child, parent) in remaining {
                if !state.accounts.contains_key(&child) {
                    return Err(bad(line, format!("DAG node {child} has no account")));
                }
                let placed = match parent {
                    None => state.dag.add_root(child),
                    Some(p) if state.dag.contains(p) => state.dag.attach_node(p, child),
                    Some(_) => {
                        deferred.push((line, child, parent));
                        continue;
                    }
                };
                placed.map_err(|e| bad(line, e.to_string()))?;
            }
            if deferred.len() == before {
                let (line, child, _) = deferred[0];
                return Err(bad(line, format!("node {child} does not reach a root")));
            }
            remaining = deferred;
        }
        for (line, s) in motivators {
            if !state.accounts.contains_key(&s.funder) {
                return Err(bad(line, format!("unknown funder {}", s.funder)));
            }
            state.motivators.push(s);
        }
        state.seen_tasks.extend(seen);
        for (line, t) in pending {
            for id in [t.beneficiary, t.contributor] {
                if !state.accounts.contains_key(&id) {
                    return Err(bad(line, format!("unknown account {id}")));
                }
            }
            if mode == MiningMode::Progressive && !state.dag.contains(t.contributor) {
                return Err(bad(line, format!("contributor {} is not in the DAG", t.contributor)));
            }
            state.pending.push(t);
        }

        let escrow_default: u128 = state
            .motivators
            .iter()
            .map(|m| m.coins_per_block as u128 * m.remaining_blocks as u128)
            .sum();
        state.minted = get(&header, "minted")?.unwrap_or(0);
        state.escrow = get(&header, "escrow")?.unwrap_or(escrow_default);
        let held = state.total_coins() + state.escrow;
        state.genesis_coins = get(&header, "genesis_coins")?.unwrap_or(held.saturating_sub(state.minted));
        Ok(state)
    }
}
