//! File distribution use case: a season of episodes pushed through viewer
//! trees, paid for by a fixed delivery budget.
//!
//! Each episode gets its own tree with the publisher at the root. Viewers
//! join in attach order and each one pays the service fee to the node it
//! downloaded from, in progressive mode. The episode's share of the budget
//! is then split over viewers in proportion to their clamped final
//! prestige, in whole cents.

use std::collections::BTreeMap;

use pop_core::mining::apply_transfer;
use pop_core::prestige::AccountId;
use pop_core::{Account, MiningDag, MiningMode, VerificationKey};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::forest::random_tree;
use crate::output::{num, ScenarioOutput, Summary, Table};
use crate::stats::median;
use crate::ScenarioError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BbcConfig {
    pub seed: u64,
    /// Fraction of the full audience and budget that is simulated.
    pub scale: f64,
    pub episodes: usize,
    pub viewers_min: f64,
    pub viewers_max: f64,
    /// Full-scale delivery cost in currency units.
    pub budget: f64,
    pub file_mb: f64,
    pub fanout: usize,
    pub base_prestige_min: f64,
    pub base_prestige_max: f64,
    pub fees: Vec<f64>,
    pub branch_powers: Vec<f64>,
    pub reference_fee: f64,
    pub reference_branch_power: f64,
    pub top_reward_min: f64,
    pub top_reward_max: f64,
    pub median_shift_max: f64,
}

impl Default for BbcConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            scale: 0.001,
            episodes: 6,
            viewers_min: 14.0e6,
            viewers_max: 17.0e6,
            budget: 4.7e6,
            file_mb: 250.0,
            fanout: 8,
            base_prestige_min: 1.0,
            base_prestige_max: 10_000.0,
            fees: vec![100.0, 200.0, 300.0],
            branch_powers: vec![0.25, 0.5, 1.0],
            reference_fee: 200.0,
            reference_branch_power: 0.5,
            top_reward_min: 10.0,
            top_reward_max: 100.0,
            median_shift_max: 0.05,
        }
    }
}

impl BbcConfig {
    pub fn viewers(&self) -> Vec<usize> {
        let n = self.episodes;
        (0..n)
            .map(|e| {
                let t = if n > 1 { e as f64 / (n - 1) as f64 } else { 0.0 };
                ((self.viewers_min + t * (self.viewers_max - self.viewers_min)) * self.scale).round() as usize
            })
            .collect()
    }

    pub fn budget_cents(&self) -> u64 {
        (self.budget * self.scale * 100.0).round() as u64
    }
}

/// Split `total` into integer parts proportional to `weights`, handing the
/// leftover units to the largest remainders (ties to the lower index).
/// All-zero weights split evenly.
pub fn apportion(total: u64, weights: &[f64]) -> Vec<u64> {
    if weights.is_empty() {
        return Vec::new();
    }
    let sum: f64 = weights.iter().sum();
    let w: Vec<f64> = if sum > 0.0 { weights.to_vec() } else { vec![1.0; weights.len()] };
    let sum: f64 = w.iter().sum();
    let mut parts = Vec::with_capacity(w.len());
    let mut rems = Vec::with_capacity(w.len());
    for (i, wi) in w.iter().enumerate() {
        let exact = total as f64 * wi / sum;
        let floor = exact.floor() as u64;
        parts.push(floor);
        rems.push((exact - floor as f64, i));
    }
    let assigned: u64 = parts.iter().sum();
    // floating error can push the floors past the total; trim from the smallest remainders
    let mut left = total as i128 - assigned as i128;
    rems.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut k = 0;
    while left > 0 {
        parts[rems[k % rems.len()].1] += 1;
        left -= 1;
        k += 1;
    }
    let mut k = rems.len();
    while left < 0 {
        k = if k == 0 { rems.len() - 1 } else { k - 1 };
        let i = rems[k].1;
        if parts[i] > 0 {
            parts[i] -= 1;
            left += 1;
        }
    }
    parts
}

#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub viewers: usize,
    pub max_depth: usize,
    /// Final prestige per viewer, in attach order.
    pub prestige: Vec<f64>,
    pub depth: Vec<usize>,
    pub publisher: f64,
}

/// Runs one episode. The tree and base prestige depend only on the seed and
/// episode index, so every (fee, branch power) pair sees the same audience.
pub fn run_episode(cfg: &BbcConfig, episode: usize, viewers: usize, fee: f64, b: f64) -> Result<Episode, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(episode as u64);
    let (parent, depth) = random_tree(&mut rng, viewers + 1, cfg.fanout);
    let id = |v: usize| AccountId(v as u32);
    let mut dag = MiningDag::new();
    let mut accounts = BTreeMap::new();
    dag.add_root(id(0)).map_err(|e| ScenarioError::Runtime(e.to_string()))?;
    accounts.insert(id(0), Account::new(id(0), 0, VerificationKey::default()));
    let parent: Vec<usize> = parent[1..].iter().map(|p| p.expect("non-root node has a parent")).collect();
    for (v, &p) in (1..).zip(&parent) {
        dag.attach_node(id(p), id(v)).map_err(|e| ScenarioError::Runtime(e.to_string()))?;
        let base = rng.gen_range(cfg.base_prestige_min..=cfg.base_prestige_max);
        accounts.insert(id(v), Account::new(id(v), 0, VerificationKey::default()).with_prestige(base));
    }
    for (v, &p) in (1..).zip(&parent) {
        apply_transfer(&mut accounts, &dag, id(v), id(p), fee, MiningMode::Progressive, b, episode as u64)
            .map_err(|e| ScenarioError::Runtime(e.to_string()))?;
    }
    Ok(Episode {
        viewers,
        max_depth: depth.iter().copied().max().unwrap_or(0),
        prestige: (1..=viewers).map(|v| accounts[&id(v)].prestige).collect(),
        depth: depth[1..].to_vec(),
        publisher: accounts[&id(0)].prestige,
    })
}

struct ConfigResult {
    fee: f64,
    b: f64,
    /// Per episode: cents per viewer.
    rewards: Vec<Vec<u64>>,
    episodes: Vec<Episode>,
}

fn run_config(cfg: &BbcConfig, fee: f64, b: f64) -> Result<ConfigResult, ScenarioError> {
    let viewers = cfg.viewers();
    let per_episode = apportion(cfg.budget_cents(), &vec![1.0; viewers.len()]);
    let mut rewards = Vec::new();
    let mut episodes = Vec::new();
    for (e, &n) in viewers.iter().enumerate() {
        let ep = run_episode(cfg, e, n, fee, b)?;
        let w: Vec<f64> = ep.prestige.iter().map(|p| p.max(0.0)).collect();
        rewards.push(apportion(per_episode[e], &w));
        episodes.push(ep);
    }
    Ok(ConfigResult { fee, b, rewards, episodes })
}

pub fn run(cfg: &BbcConfig) -> Result<ScenarioOutput, ScenarioError> {
    if !(cfg.scale > 0.0 && cfg.scale <= 1.0) {
        return Err(ScenarioError::Invalid(format!("scale {} outside (0, 1]", cfg.scale)));
    }
    if cfg.episodes == 0 || cfg.fanout == 0 || cfg.viewers().contains(&0) {
        return Err(ScenarioError::Invalid("need episodes, viewers and a positive fanout".into()));
    }
    if cfg.base_prestige_min.partial_cmp(&cfg.base_prestige_max).is_none_or(|o| o.is_gt()) {
        return Err(ScenarioError::Invalid("base prestige range is empty".into()));
    }
    let mut grid: Vec<(f64, f64)> = Vec::new();
    for &f in &cfg.fees {
        for &b in &cfg.branch_powers {
            grid.push((f, b));
        }
    }
    let reference = (cfg.reference_fee, cfg.reference_branch_power);
    if !grid.contains(&reference) {
        grid.push(reference);
    }

    let mut table = Table::new(
        "bbc.csv",
        &[
            "fee", "branch_power", "episode", "viewers", "max_depth", "paid_cents", "top_cents", "median_cents",
            "mb_delivered",
        ],
    );
    let mut rewards_table = Table::new("bbc_rewards.csv", &["episode", "viewer", "depth", "prestige", "reward_cents"]);
    let mut summary = Summary::new();
    let budget = cfg.budget_cents();
    summary.put("budget_cents", budget);
    summary.put("viewers", cfg.viewers().iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "));

    let mut sums_ok = true;
    let mut medians = Vec::new();
    let mut ref_top = 0u64;
    for &(f, b) in &grid {
        let res = run_config(cfg, f, b)?;
        let mut all = Vec::new();
        let mut paid = 0u64;
        for (e, (r, ep)) in res.rewards.iter().zip(&res.episodes).enumerate() {
            let cents: Vec<f64> = r.iter().map(|&c| c as f64).collect();
            let ep_paid: u64 = r.iter().sum();
            paid += ep_paid;
            table.push(vec![
                num(res.fee),
                num(res.b),
                e.to_string(),
                ep.viewers.to_string(),
                ep.max_depth.to_string(),
                ep_paid.to_string(),
                r.iter().max().copied().unwrap_or(0).to_string(),
                num(median(&cents)),
                num(ep.viewers as f64 * cfg.file_mb),
            ]);
            all.extend(cents);
        }
        sums_ok &= paid == budget;
        let med = median(&all);
        medians.push(((f, b), med));
        if (f, b) == reference {
            ref_top = res.rewards.iter().flatten().copied().max().unwrap_or(0);
            for (e, (r, ep)) in res.rewards.iter().zip(&res.episodes).enumerate() {
                for (v, c) in r.iter().enumerate() {
                    rewards_table.push(vec![
                        e.to_string(),
                        (v + 1).to_string(),
                        ep.depth[v].to_string(),
                        num(ep.prestige[v]),
                        c.to_string(),
                    ]);
                }
            }
        }
    }

    // audience and budget shrink together, so a viewer's share needs no rescaling
    let top = ref_top as f64 / 100.0;
    summary.put("top_reward", num(top));
    let ref_median = medians.iter().find(|(k, _)| *k == reference).map(|(_, m)| *m).unwrap_or(0.0);
    let shift = medians
        .iter()
        .map(|(_, m)| if ref_median > 0.0 { (m / ref_median - 1.0).abs() } else { f64::INFINITY })
        .fold(0.0, f64::max);
    summary.put("reference_median_cents", num(ref_median));
    summary.put("max_median_shift", num(shift));
    summary.check("rewards_sum_to_budget", sums_ok);
    summary.check("top_reward_in_band", (cfg.top_reward_min..=cfg.top_reward_max).contains(&top));
    summary.check("median_reward_stable", shift < cfg.median_shift_max);
    Ok(ScenarioOutput {
        scenario: "bbc".into(),
        tables: vec![table, rewards_table],
        summary,
    })
}
