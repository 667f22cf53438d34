//! Cohorts of poor and rich users with different work rates, all in one
//! distribution DAG, run on the chain for many blocks.
//!
//! Work is bought by an outside consumer account, so a user's prestige above
//! its static value comes from work alone. The DAG root is a separate
//! publisher. Cohorts marked `in_dag = false` never work and sit outside the
//! DAG.

use pop_core::prestige::{static_value, AccountId};
use pop_core::{relative_error, ChainState, Economics, MiningMode, SystemParams};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::forest::random_tree;
use crate::output::{num, ScenarioOutput, Summary, Table};
use crate::{parse_modes, ScenarioError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cohort {
    pub name: String,
    pub coins: u64,
    /// Probability of serving one task in a block.
    pub work: f64,
    pub users: usize,
    pub in_dag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalConfig {
    pub seed: u64,
    pub mode: String,
    pub blocks: u64,
    pub decay: f64,
    /// The progressive orderings need the worker to keep a fair share of its
    /// own fee: they hold for b in about [0.05, 0.3] and break by 0.4.
    pub branch_power: f64,
    pub fee: f64,
    pub fanout: usize,
    pub publisher_coins: u64,
    /// Independent DAG placements and work draws averaged into the cohort
    /// statistics. Per-user rows come from the first one.
    pub replicates: u64,
    /// Largest relative gap between poor and rich cohorts with equal work
    /// rate, simple mode.
    pub same_work_band: f64,
    pub cohorts: Vec<Cohort>,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        let c = |name: &str, coins, work, users, in_dag| Cohort {
            name: name.into(),
            coins,
            work,
            users,
            in_dag,
        };
        Self {
            seed: 1,
            mode: "both".into(),
            blocks: 2000,
            decay: 0.05,
            branch_power: 0.2,
            fee: 200.0,
            fanout: 4,
            publisher_coins: 75,
            replicates: 20,
            same_work_band: 0.1,
            cohorts: vec![
                c("poor_w5", 50, 0.05, 25, true),
                c("poor_w20", 50, 0.20, 25, true),
                c("rich_w5", 100, 0.05, 25, true),
                c("rich_w20", 100, 0.20, 25, true),
                c("idle", 75, 0.0, 10, false),
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohortStats {
    pub name: String,
    /// Mean prestige per block, averaged over the cohort.
    pub mean_prestige: Vec<f64>,
    /// Second-half average of cohort-mean prestige minus static value.
    pub late_excess: f64,
    pub static_value: f64,
}

const PUBLISHER: AccountId = AccountId(0);
const CONSUMER: AccountId = AccountId(1);

/// One replicate. Per-user rows are only collected when `record` is set.
pub fn simulate(
    cfg: &GlobalConfig,
    mode: MiningMode,
    replicate: u64,
    record: bool,
) -> Result<(Vec<CohortStats>, Table), ScenarioError> {
    let invalid = |e: String| ScenarioError::Invalid(e);
    let runtime = |e: pop_core::ChainError| ScenarioError::Runtime(e.to_string());
    if cfg.blocks < 2 || cfg.fanout == 0 || cfg.replicates == 0 {
        return Err(invalid("need at least two blocks, a positive fanout and one replicate".into()));
    }
    if let Some(c) = cfg.cohorts.iter().find(|c| !(0.0..=1.0).contains(&c.work)) {
        return Err(invalid(format!("cohort {} has work probability outside [0, 1]", c.name)));
    }
    if let Some(c) = cfg.cohorts.iter().find(|c| c.work > 0.0 && !c.in_dag) {
        return Err(invalid(format!("cohort {} works but is not in the DAG", c.name)));
    }
    let params = SystemParams::new(cfg.decay, cfg.branch_power, cfg.fee).map_err(|e| invalid(e.to_string()))?;
    let mut chain = ChainState::new(params, mode, Economics::default(), cfg.seed.wrapping_add(replicate));
    chain.add_account(PUBLISHER, cfg.publisher_coins).map_err(runtime)?;
    chain.add_account(CONSUMER, 0).map_err(runtime)?;
    chain.add_root(PUBLISHER).map_err(runtime)?;

    let mut members: Vec<(AccountId, usize)> = Vec::new();
    let mut next = 2u32;
    for (k, c) in cfg.cohorts.iter().enumerate() {
        for _ in 0..c.users {
            chain.add_account(AccountId(next), c.coins).map_err(runtime)?;
            members.push((AccountId(next), k));
            next += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(replicate);
    let mut placed: Vec<AccountId> = members
        .iter()
        .filter(|(_, k)| cfg.cohorts[*k].in_dag)
        .map(|(id, _)| *id)
        .collect();
    placed.shuffle(&mut rng);
    let (parent, _) = random_tree(&mut rng, placed.len() + 1, cfg.fanout);
    for (slot, id) in placed.iter().enumerate() {
        let p = match parent[slot + 1] {
            Some(0) | None => PUBLISHER,
            Some(q) => placed[q - 1],
        };
        chain.attach(p, *id).map_err(runtime)?;
    }

    let mut users = Table::new(
        format!("global_{mode}.csv"),
        &["block", "user", "cohort", "coins", "prestige"],
    );
    // per block, per cohort
    let mut sums = Vec::with_capacity(cfg.blocks as usize);
    for t in 0..cfg.blocks as usize {
        for &(id, k) in &members {
            let w = cfg.cohorts[k].work;
            if w > 0.0 && rng.gen_bool(w) {
                chain.enqueue_transfer(CONSUMER, id, cfg.fee).map_err(runtime)?;
            }
        }
        chain.advance_block().map_err(runtime)?;
        let mut row = vec![0.0; cfg.cohorts.len()];
        for &(id, k) in &members {
            let a = chain.account(id).map_err(runtime)?;
            row[k] += a.prestige;
            if !record {
                continue;
            }
            users.push(vec![
                (t + 1).to_string(),
                id.to_string(),
                cfg.cohorts[k].name.clone(),
                a.coins.to_string(),
                num(a.prestige),
            ]);
        }
        sums.push(row);
    }

    let half = cfg.blocks as usize / 2;
    let stats = cfg
        .cohorts
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let n = c.users.max(1) as f64;
            let mean_prestige: Vec<f64> = sums.iter().map(|row| row[k] / n).collect();
            let sv = static_value(c.coins, &params);
            let late = &mean_prestige[half..];
            let late_excess = late.iter().map(|p| p - sv).sum::<f64>() / late.len() as f64;
            CohortStats {
                name: c.name.clone(),
                mean_prestige,
                late_excess,
                static_value: sv,
            }
        })
        .collect();
    Ok((stats, users))
}

fn find<'a>(stats: &'a [CohortStats], cfg: &GlobalConfig, coins: u64, work: f64) -> Option<&'a CohortStats> {
    cfg.cohorts
        .iter()
        .position(|c| c.coins == coins && c.work == work && c.in_dag)
        .map(|k| &stats[k])
}

pub fn run(cfg: &GlobalConfig) -> Result<ScenarioOutput, ScenarioError> {
    let modes = parse_modes(&cfg.mode)?;
    let mut summary = Summary::new();
    let mut tables = Vec::new();
    let mut checks = Vec::new();
    let mut coins: Vec<u64> = cfg.cohorts.iter().filter(|c| c.in_dag).map(|c| c.coins).collect();
    coins.sort_unstable();
    coins.dedup();
    let mut works: Vec<f64> = cfg.cohorts.iter().filter(|c| c.in_dag).map(|c| c.work).collect();
    works.sort_by(f64::total_cmp);
    works.dedup();
    let (poor, rich) = (coins.first().copied(), coins.last().copied());
    let (lazy, active) = (works.first().copied(), works.last().copied());

    for mode in modes {
        let (mut stats, users) = simulate(cfg, mode, 0, true)?;
        for r in 1..cfg.replicates {
            let (more, _) = simulate(cfg, mode, r, false)?;
            for (s, m) in stats.iter_mut().zip(more) {
                for (a, b) in s.mean_prestige.iter_mut().zip(m.mean_prestige) {
                    *a += b;
                }
                s.late_excess += m.late_excess;
            }
        }
        let n = cfg.replicates as f64;
        for s in &mut stats {
            s.mean_prestige.iter_mut().for_each(|p| *p /= n);
            s.late_excess /= n;
        }
        let m = mode.as_str();
        let mut cohorts = Table::new(
            format!("global_{m}_cohorts.csv"),
            &["block", "cohort", "mean_prestige", "static_value"],
        );
        for t in 0..cfg.blocks as usize {
            for s in &stats {
                cohorts.push(vec![(t + 1).to_string(), s.name.clone(), num(s.mean_prestige[t]), num(s.static_value)]);
            }
        }
        for s in &stats {
            summary.put(format!("{m}_{}_late_excess", s.name), num(s.late_excess));
        }
        let idle: Vec<&CohortStats> = cfg
            .cohorts
            .iter()
            .zip(&stats)
            .filter(|(c, _)| c.work == 0.0)
            .map(|(_, s)| s)
            .collect();
        if !idle.is_empty() {
            let ok = idle.iter().all(|s| relative_error(s.late_excess + s.static_value, s.static_value) < 1e-6);
            checks.push((format!("{m}_idle_at_static_value"), ok));
        }

        if let (Some(poor), Some(rich), Some(lazy), Some(active)) = (poor, rich, lazy, active) {
            let get = |c, w| find(&stats, cfg, c, w).map(|s| s.late_excess);
            match mode {
                MiningMode::Simple => {
                    for w in [lazy, active] {
                        if let (Some(p), Some(r)) = (get(poor, w), get(rich, w)) {
                            let gap = (r - p).abs() / r.abs().max(p.abs());
                            summary.put(format!("simple_poor_rich_gap_w{}", num(w)), num(gap));
                            checks.push((format!("simple_poor_rich_alike_w{}", num(w)), gap < cfg.same_work_band));
                        }
                    }
                }
                MiningMode::Progressive => {
                    if let (Some(ra), Some(pa), Some(rl)) = (get(rich, active), get(poor, active), get(rich, lazy)) {
                        checks.push(("progressive_rich_active_above_poor_active".into(), ra > pa));
                        checks.push(("progressive_poor_active_above_rich_lazy".into(), pa > rl));
                    }
                }
            }
        }
        tables.push(users);
        tables.push(cohorts);
    }
    for (k, ok) in checks {
        summary.check(k, ok);
    }
    Ok(ScenarioOutput {
        scenario: "global".into(),
        tables,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_run_has_rows_for_every_user_and_block() {
        let cfg = GlobalConfig { blocks: 40, mode: "simple".into(), replicates: 2, ..GlobalConfig::default() };
        let out = run(&cfg).unwrap();
        let users: usize = cfg.cohorts.iter().map(|c| c.users).sum();
        assert_eq!(out.tables[0].len(), 40 * users);
        assert_eq!(out.tables[1].len(), 40 * cfg.cohorts.len());
    }

    #[test]
    fn rejects_bad_cohorts() {
        let mut cfg = GlobalConfig { blocks: 10, ..GlobalConfig::default() };
        cfg.cohorts[0].work = 1.5;
        assert!(simulate(&cfg, MiningMode::Simple, 0, true).is_err());
        let mut cfg = GlobalConfig { blocks: 10, ..GlobalConfig::default() };
        cfg.cohorts[4].work = 0.1;
        assert!(simulate(&cfg, MiningMode::Simple, 0, true).is_err());
    }
}
