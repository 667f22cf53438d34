//! Per-user prestige gain over many small random DAGs, in both mining modes.
//!
//! Every user gets a task count drawn uniformly from `0..=max_tasks`. Each
//! task is served for a beneficiary drawn uniformly among the other non-root
//! users and costs `fee`. Prestige does not regenerate during the study;
//! gain is final minus base prestige.

use std::collections::BTreeMap;

use pop_core::ack::{path_ack_len, SIMPLE_ACK_LEN};
use pop_core::mining::apply_transfer;
use pop_core::prestige::AccountId;
use pop_core::{Account, MiningDag, MiningMode, VerificationKey};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::forest::random_tree;
use crate::output::{num, ScenarioOutput, Summary, Table};
use crate::stats::{ols, spearman};
use crate::{parse_modes, ScenarioError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DagStudyConfig {
    pub seed: u64,
    /// `simple`, `progressive` or `both`.
    pub mode: String,
    pub users: usize,
    pub dags: usize,
    pub fanout: usize,
    pub branch_power: f64,
    pub fee: f64,
    /// Base prestige is an integer drawn uniformly from `0..=base_prestige_max`.
    pub base_prestige_max: u32,
    pub max_tasks: u32,
    /// Independent populations pooled into the fits. Group means over one
    /// population of 1000 carry standard errors close to the per-task slope
    /// in progressive mode.
    pub replicates: u64,
    /// Simple-mode slope vs distance counts as flat below this many standard
    /// errors.
    pub flat_slope_se: f64,
    pub min_r_squared: f64,
}

impl Default for DagStudyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            mode: "both".into(),
            users: 1000,
            dags: 100,
            fanout: 4,
            branch_power: 0.5,
            fee: 1.0,
            base_prestige_max: 100,
            max_tasks: 4,
            replicates: 10,
            flat_slope_se: 3.0,
            min_r_squared: 0.95,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub dag: MiningDag,
    pub dag_of: Vec<usize>,
    pub distance: Vec<usize>,
    pub base: Vec<f64>,
    pub tasks: Vec<u32>,
    /// `(beneficiary, contributor)` in processing order.
    pub plan: Vec<(usize, usize)>,
}

pub fn build_population(cfg: &DagStudyConfig, replicate: u64) -> Result<Population, ScenarioError> {
    if cfg.dags == 0 || cfg.users < cfg.dags * 2 || cfg.fanout == 0 {
        return Err(ScenarioError::Invalid("need at least two users per DAG and a positive fanout".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(replicate);
    let mut dag = MiningDag::new();
    let mut dag_of = vec![0; cfg.users];
    let mut distance = vec![0; cfg.users];
    let mut roots = Vec::new();
    let mut start = 0;
    for g in 0..cfg.dags {
        // spread any remainder over the first DAGs
        let size = cfg.users / cfg.dags + usize::from(g < cfg.users % cfg.dags);
        let (parent, depth) = random_tree(&mut rng, size, cfg.fanout);
        for k in 0..size {
            let id = AccountId((start + k) as u32);
            match parent[k] {
                None => {
                    dag.add_root(id).map_err(|e| ScenarioError::Runtime(e.to_string()))?;
                    roots.push(start + k);
                }
                Some(p) => dag
                    .attach_node(AccountId((start + p) as u32), id)
                    .map_err(|e| ScenarioError::Runtime(e.to_string()))?,
            }
            dag_of[start + k] = g;
            distance[start + k] = depth[k];
        }
        start += size;
    }

    let base: Vec<f64> = (0..cfg.users)
        .map(|_| rng.gen_range(0..=cfg.base_prestige_max) as f64)
        .collect();
    let tasks: Vec<u32> = (0..cfg.users).map(|_| rng.gen_range(0..=cfg.max_tasks)).collect();
    let mut contributors: Vec<usize> = (0..cfg.users)
        .flat_map(|u| std::iter::repeat_n(u, tasks[u] as usize))
        .collect();
    contributors.shuffle(&mut rng);
    let non_root: Vec<usize> = (0..cfg.users).filter(|u| !roots.contains(u)).collect();
    let plan = contributors
        .into_iter()
        .map(|c| loop {
            let j = non_root[rng.gen_range(0..non_root.len())];
            if j != c {
                break (j, c);
            }
        })
        .collect();
    Ok(Population {
        dag,
        dag_of,
        distance,
        base,
        tasks,
        plan,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeResult {
    pub mode: MiningMode,
    pub gain: Vec<f64>,
    /// Total prestige each user kept from transfers, before its own spending.
    pub retained: Vec<f64>,
}

pub fn simulate(cfg: &DagStudyConfig, pop: &Population, mode: MiningMode) -> Result<ModeResult, ScenarioError> {
    let mut accounts: BTreeMap<AccountId, Account> = pop
        .base
        .iter()
        .enumerate()
        .map(|(u, &p)| {
            let id = AccountId(u as u32);
            (id, Account::new(id, 0, VerificationKey::default()).with_prestige(p))
        })
        .collect();
    let mut retained = vec![0.0; pop.base.len()];
    for &(j, c) in &pop.plan {
        let rec = apply_transfer(
            &mut accounts,
            &pop.dag,
            AccountId(j as u32),
            AccountId(c as u32),
            cfg.fee,
            mode,
            cfg.branch_power,
            0,
        )
        .map_err(|e| ScenarioError::Runtime(e.to_string()))?;
        for (n, v) in rec.retained_by {
            retained[n.0 as usize] += v;
        }
    }
    let gain = accounts.values().zip(&pop.base).map(|(a, b)| a.prestige - b).collect();
    Ok(ModeResult { mode, gain, retained })
}

fn group_means(keys: &[f64], values: &[f64]) -> Vec<(f64, usize, f64)> {
    let mut groups: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
    for (k, v) in keys.iter().zip(values) {
        let e = groups.entry(*k as i64).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += v;
    }
    groups.into_iter().map(|(k, (n, s))| (k as f64, n, s / n as f64)).collect()
}

pub fn run(cfg: &DagStudyConfig) -> Result<ScenarioOutput, ScenarioError> {
    let modes = parse_modes(&cfg.mode)?;
    if cfg.replicates == 0 {
        return Err(ScenarioError::Invalid("need at least one replicate".into()));
    }
    let pops = (0..cfg.replicates)
        .map(|r| build_population(cfg, r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut users = Table::new(
        "dag_users.csv",
        &["mode", "replicate", "user", "dag", "distance", "base_prestige", "tasks", "gain"],
    );
    let mut groups = Table::new("dag_groups.csv", &["mode", "group_by", "key", "users", "mean_gain"]);
    let mut summary = Summary::new();
    // pooled over replicates, user-major within each
    let distance: Vec<f64> = pops.iter().flat_map(|p| p.distance.iter().map(|&d| d as f64)).collect();
    let tasks: Vec<f64> = pops.iter().flat_map(|p| p.tasks.iter().map(|&t| t as f64)).collect();
    let zero_base: Vec<usize> = pops
        .iter()
        .flat_map(|p| (0..cfg.users).map(move |u| p.base[u] <= 0.0 && !p.dag.is_root(AccountId(u as u32))))
        .enumerate()
        .filter(|(_, z)| *z)
        .map(|(i, _)| i)
        .collect();
    summary.put("users", cfg.users);
    summary.put("dags", cfg.dags);
    summary.put("replicates", cfg.replicates);
    summary.put("tasks", pops[0].plan.len());
    summary.put("max_distance", pops[0].distance.iter().max().copied().unwrap_or(0));

    let mut checks = Vec::new();
    for mode in modes {
        let m = mode.as_str();
        let mut gain = Vec::with_capacity(distance.len());
        let mut retained = Vec::with_capacity(distance.len());
        for (r, pop) in pops.iter().enumerate() {
            let res = simulate(cfg, pop, mode)?;
            for u in 0..cfg.users {
                users.push(vec![
                    m.into(),
                    r.to_string(),
                    u.to_string(),
                    pop.dag_of[u].to_string(),
                    pop.distance[u].to_string(),
                    num(pop.base[u]),
                    pop.tasks[u].to_string(),
                    num(res.gain[u]),
                ]);
            }
            gain.extend(res.gain);
            retained.extend(res.retained);
        }
        for (by, keys) in [("distance", &distance), ("tasks", &tasks)] {
            for (k, n, mean) in group_means(keys, &gain) {
                groups.push(vec![m.into(), by.into(), num(k), n.to_string(), num(mean)]);
            }
        }

        let by_tasks = group_means(&tasks, &gain);
        let xs: Vec<f64> = by_tasks.iter().map(|g| g.0).collect();
        let ys: Vec<f64> = by_tasks.iter().map(|g| g.2).collect();
        let r2 = ols(&xs, &ys).map_or(f64::NAN, |f| f.r_squared);
        summary.put(format!("{m}_gain_vs_tasks_r_squared"), num(r2));
        checks.push((format!("{m}_gain_linear_in_tasks"), r2 > cfg.min_r_squared));

        let deep: Vec<usize> = (0..distance.len()).filter(|&i| distance[i] >= 1.0).collect();
        let dx: Vec<f64> = deep.iter().map(|&i| distance[i]).collect();
        let dy: Vec<f64> = deep.iter().map(|&i| gain[i]).collect();
        let fit = ols(&dx, &dy);
        let rho = spearman(&distance, &gain).unwrap_or(f64::NAN);
        if let Some(f) = fit {
            summary.put(format!("{m}_gain_vs_distance_slope"), num(f.slope));
            summary.put(format!("{m}_gain_vs_distance_slope_se"), num(f.slope_se));
        }
        summary.put(format!("{m}_gain_vs_distance_spearman"), num(rho));

        match mode {
            MiningMode::Simple => {
                let flat = fit.is_some_and(|f| f.slope.abs() < cfg.flat_slope_se * f.slope_se);
                checks.push(("simple_gain_flat_vs_distance".into(), flat));
                summary.put("ack_bytes_simple", pops[0].plan.len() * SIMPLE_ACK_LEN);
            }
            MiningMode::Progressive => {
                checks.push(("progressive_gain_decreases_with_distance".into(), rho < 0.0));
                let kept: f64 = zero_base.iter().map(|&i| retained[i]).sum();
                summary.put("zero_base_users", zero_base.len());
                summary.put("zero_base_retained", num(kept));
                checks.push(("zero_base_retains_nothing".into(), kept == 0.0 && !zero_base.is_empty()));
                // the path from the root to the beneficiary runs through the contributor
                let pop = &pops[0];
                let bytes: usize = pop.plan.iter().map(|&(_, c)| path_ack_len(pop.distance[c] + 1)).sum();
                summary.put("ack_bytes_progressive", bytes);
            }
        }
    }
    for (k, ok) in checks {
        summary.check(k, ok);
    }
    Ok(ScenarioOutput {
        scenario: "dag".into(),
        tables: vec![users, groups],
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> DagStudyConfig {
        DagStudyConfig { users: 120, dags: 12, replicates: 2, ..DagStudyConfig::default() }
    }

    #[test]
    fn population_shape() {
        let pop = build_population(&small(), 0).unwrap();
        assert_eq!(pop.dag.len(), 120);
        assert_eq!(pop.dag.roots().count(), 12);
        assert_eq!(pop.plan.len() as u32, pop.tasks.iter().sum::<u32>());
        assert!(pop.plan.iter().all(|&(j, c)| j != c && !pop.dag.is_root(AccountId(j as u32))));
    }

    #[test]
    fn modes_conserve_and_share_the_plan() {
        let cfg = small();
        let pop = build_population(&cfg, 0).unwrap();
        for mode in MiningMode::ALL {
            let r = simulate(&cfg, &pop, mode).unwrap();
            assert!(r.gain.iter().sum::<f64>().abs() < 1e-9);
            assert!(r.retained.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn single_mode_runs_only_its_checks() {
        let cfg = DagStudyConfig { mode: "simple".into(), ..small() };
        let out = run(&cfg).unwrap();
        assert!(out.summary.get("simple_gain_flat_vs_distance").is_some());
        assert!(out.summary.get("zero_base_retains_nothing").is_none());
    }

    #[test]
    fn too_few_users_rejected() {
        assert!(build_population(&DagStudyConfig { users: 10, dags: 10, ..small() }, 0).is_err());
    }
}
