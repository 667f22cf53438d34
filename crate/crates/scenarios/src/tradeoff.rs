//! Wealth against work: cumulative prestige of poor and rich cohorts with
//! different work rates, across decay values.
//!
//! Each block every user serves a task with its cohort's probability. The
//! buyer is drawn among the other users whose current prestige covers the
//! fee; when nobody can pay, no task happens. Mining is simple.
//!
//! The default cohorts earn the same per block on average (10 + 0.25 * 200
//! against 50 + 0.05 * 200), so the poor active cohort only pulls ahead
//! where the poor cannot afford to buy work themselves. Below d = 0.05 that
//! rarely binds and the comparison is a coin flip, so the grid starts there.

use std::collections::BTreeMap;

use pop_core::mining::apply_transfer;
use pop_core::prestige::{step_account, AccountId};
use pop_core::{Account, MiningDag, MiningMode, SystemParams, VerificationKey};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::output::{num, ScenarioOutput, Summary, Table};
use crate::ScenarioError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradeoffCohort {
    pub coins: u64,
    pub work: f64,
    pub users: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TradeoffConfig {
    pub seed: u64,
    pub blocks: u64,
    pub fee: f64,
    pub decay_grid: Vec<f64>,
    pub cohorts: Vec<TradeoffCohort>,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        let c = |coins, work| TradeoffCohort { coins, work, users: 25 };
        Self {
            seed: 1,
            blocks: 1000,
            fee: 200.0,
            decay_grid: vec![0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9],
            cohorts: vec![c(50, 0.05), c(50, 0.25), c(10, 0.05), c(10, 0.25)],
        }
    }
}

/// Mean over each cohort's users of the prestige summed over all blocks.
pub fn cohort_sums(cfg: &TradeoffConfig, decay: f64) -> Result<Vec<f64>, ScenarioError> {
    let params = SystemParams::new(decay, 0.0, cfg.fee).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
    let mut cohort_of = Vec::new();
    let mut accounts: BTreeMap<AccountId, Account> = BTreeMap::new();
    for (k, c) in cfg.cohorts.iter().enumerate() {
        if !(0.0..=1.0).contains(&c.work) {
            return Err(ScenarioError::Invalid(format!("work probability {} outside [0, 1]", c.work)));
        }
        for _ in 0..c.users {
            let id = AccountId(cohort_of.len() as u32);
            accounts.insert(id, Account::new(id, c.coins, VerificationKey::default()));
            cohort_of.push(k);
        }
    }
    let n = cohort_of.len();
    let dag = MiningDag::new();
    // the same work draws for every decay value
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut totals = vec![0.0; n];
    for t in 0..cfg.blocks {
        for a in accounts.values_mut() {
            *a = step_account(a, &params);
        }
        let mut workers: Vec<usize> = (0..n).filter(|&u| rng.gen_bool(cfg.cohorts[cohort_of[u]].work)).collect();
        workers.shuffle(&mut rng);
        for c in workers {
            let buyers: Vec<usize> = (0..n)
                .filter(|&j| j != c && accounts[&AccountId(j as u32)].prestige >= cfg.fee)
                .collect();
            if buyers.is_empty() {
                continue;
            }
            let j = buyers[rng.gen_range(0..buyers.len())];
            apply_transfer(
                &mut accounts,
                &dag,
                AccountId(j as u32),
                AccountId(c as u32),
                cfg.fee,
                MiningMode::Simple,
                0.0,
                t + 1,
            )
            .map_err(|e| ScenarioError::Runtime(e.to_string()))?;
        }
        for (u, a) in accounts.values().enumerate() {
            totals[u] += a.prestige;
        }
    }
    let mut sums = vec![0.0; cfg.cohorts.len()];
    for (u, k) in cohort_of.iter().enumerate() {
        sums[*k] += totals[u] / cfg.cohorts[*k].users as f64;
    }
    Ok(sums)
}

fn label(c: &TradeoffCohort) -> String {
    format!("c{}_w{}", c.coins, num(c.work))
}

pub fn run(cfg: &TradeoffConfig) -> Result<ScenarioOutput, ScenarioError> {
    if cfg.decay_grid.is_empty() || cfg.cohorts.is_empty() {
        return Err(ScenarioError::Invalid("tradeoff needs decay values and cohorts".into()));
    }
    let mut grid = cfg.decay_grid.clone();
    grid.sort_by(f64::total_cmp);
    let mut table = Table::new("tradeoff.csv", &["decay", "cohort", "coins", "work", "prestige_sum"]);
    let mut all = Vec::new();
    for &d in &grid {
        let sums = cohort_sums(cfg, d)?;
        for (c, s) in cfg.cohorts.iter().zip(&sums) {
            table.push(vec![num(d), label(c), c.coins.to_string(), num(c.work), num(*s)]);
        }
        all.push(sums);
    }

    let mut summary = Summary::new();
    let key = |c: &TradeoffCohort| (c.coins, c.work);
    let rich_lazy = (0..cfg.cohorts.len()).max_by(|&a, &b| {
        let (ca, wa) = key(&cfg.cohorts[a]);
        let (cb, wb) = key(&cfg.cohorts[b]);
        ca.cmp(&cb).then(wb.total_cmp(&wa))
    });
    let poor_active = (0..cfg.cohorts.len()).min_by(|&a, &b| {
        let (ca, wa) = key(&cfg.cohorts[a]);
        let (cb, wb) = key(&cfg.cohorts[b]);
        ca.cmp(&cb).then(wb.total_cmp(&wa))
    });
    let (Some(rl), Some(pa)) = (rich_lazy, poor_active) else {
        unreachable!("cohorts checked non-empty");
    };
    summary.put("rich_lazy", label(&cfg.cohorts[rl]));
    summary.put("poor_active", label(&cfg.cohorts[pa]));
    let first = &all[0];
    let last = &all[all.len() - 1];
    summary.put("smallest_decay", num(grid[0]));
    summary.put("largest_decay", num(grid[grid.len() - 1]));
    summary.put("ratio_poor_active_to_rich_lazy_smallest_decay", num(first[pa] / first[rl]));
    summary.put("ratio_poor_active_to_rich_lazy_largest_decay", num(last[pa] / last[rl]));

    // richer never below poorer at the same work rate
    let mut monotone = true;
    for sums in &all {
        for a in 0..cfg.cohorts.len() {
            for b in 0..cfg.cohorts.len() {
                let (ca, cb) = (&cfg.cohorts[a], &cfg.cohorts[b]);
                if ca.work == cb.work && ca.coins > cb.coins {
                    monotone &= sums[a] >= sums[b];
                }
            }
        }
    }
    summary.check("poor_active_wins_at_smallest_decay", first[pa] > first[rl]);
    summary.check("rich_lazy_wins_at_largest_decay", last[rl] > last[pa]);
    summary.check("richer_not_below_poorer_same_work", monotone);
    Ok(ScenarioOutput {
        scenario: "tradeoff".into(),
        tables: vec![table],
        summary,
    })
}
