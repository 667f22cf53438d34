//! Prestige trajectories of users with different coins and decay, with a
//! prestige spike and a matching removal.

use pop_core::prestige::{blocks_to_reach, next_prestige, static_value};
use pop_core::{relative_error, SystemParams};
use serde::{Deserialize, Serialize};

use crate::output::{num, ScenarioOutput, Summary, Table};
use crate::ScenarioError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayUser {
    pub coins: u64,
    pub decay: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub blocks: u64,
    pub spike_block: u64,
    pub removal_block: u64,
    pub spike: f64,
    /// Relative distance from the static value that counts as converged.
    pub plateau_band: f64,
    /// Largest allowed spike residual, as a fraction of the spike, for the
    /// d = 0.1 users at the removal block.
    pub residual_band: f64,
    pub users: Vec<DecayUser>,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            blocks: 200,
            spike_block: 100,
            removal_block: 150,
            spike: 200.0,
            plateau_band: 0.01,
            residual_band: 0.1,
            users: vec![
                DecayUser { coins: 100, decay: 0.05 },
                DecayUser { coins: 100, decay: 0.1 },
                DecayUser { coins: 50, decay: 0.1 },
                DecayUser { coins: 50, decay: 0.2 },
            ],
        }
    }
}

/// Prestige after each block `1..=blocks`, starting from zero. The spike is
/// added after block `spike_block` regenerates, the removal after
/// `removal_block`. Returns the trajectory and the spike residual measured
/// at `removal_block` before the removal.
fn trajectory(cfg: &DecayConfig, coins: u64, params: &SystemParams) -> (Vec<f64>, f64) {
    let mut p = 0.0;
    let mut base = 0.0;
    let mut residual = 0.0;
    let mut out = Vec::with_capacity(cfg.blocks as usize);
    for t in 1..=cfg.blocks {
        p = next_prestige(p, coins, params);
        base = next_prestige(base, coins, params);
        if t == cfg.spike_block {
            p += cfg.spike;
        }
        if t == cfg.removal_block {
            residual = p - base;
            p -= cfg.spike;
        }
        out.push(p);
    }
    (out, residual)
}

pub fn run(cfg: &DecayConfig) -> Result<ScenarioOutput, ScenarioError> {
    if cfg.users.is_empty() || cfg.blocks == 0 {
        return Err(ScenarioError::Invalid("decay study needs users and at least one block".into()));
    }
    if !(1..=cfg.blocks).contains(&cfg.spike_block) || !(cfg.spike_block..=cfg.blocks).contains(&cfg.removal_block) {
        return Err(ScenarioError::Invalid("spike and removal must fall inside the run, spike first".into()));
    }
    let mut table = Table::new(
        "decay.csv",
        &["block", "user", "coins", "decay", "prestige", "static_value"],
    );
    let mut summary = Summary::new();
    let mut plateau_before = true;
    let mut plateau_end = true;
    let mut residual_ok = true;
    let mut speeds = Vec::new();

    let mut runs = Vec::new();
    for (u, user) in cfg.users.iter().enumerate() {
        let params = SystemParams::new(user.decay, 0.0, 0.0).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        let s = static_value(user.coins, &params);
        let (traj, residual) = trajectory(cfg, user.coins, &params);
        // prestige at the block before the spike
        let before = match cfg.spike_block {
            1 => 0.0,
            b => traj[b as usize - 2],
        };
        let end = *traj.last().expect("blocks >= 1");
        plateau_before &= relative_error(before, s) < cfg.plateau_band;
        plateau_end &= relative_error(end, s) < cfg.plateau_band;
        let tag = format!("user{u}");
        summary.put(format!("{tag}_static_value"), num(s));
        summary.put(format!("{tag}_prestige_before_spike"), num(before));
        summary.put(format!("{tag}_prestige_final"), num(end));
        summary.put(format!("{tag}_spike_residual"), num(residual));
        if user.decay == 0.1 {
            residual_ok &= residual.abs() / cfg.spike < cfg.residual_band;
        }
        let to_99 = blocks_to_reach(0.99, user.coins, &params);
        summary.put(format!("{tag}_blocks_to_99pct"), to_99);
        speeds.push((user.decay, to_99));
        runs.push((u, user, s, traj));
    }

    for t in 0..cfg.blocks as usize {
        for (u, user, s, traj) in &runs {
            table.push(vec![
                (t + 1).to_string(),
                u.to_string(),
                user.coins.to_string(),
                num(user.decay),
                num(traj[t]),
                num(*s),
            ]);
        }
    }

    speeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let faster = speeds.windows(2).all(|w| w[1].0 == w[0].0 || w[1].1 < w[0].1);
    summary.check("plateau_before_spike", plateau_before);
    summary.check("plateau_at_end", plateau_end);
    summary.check("spike_residual_d0.1_within_band", residual_ok);
    summary.check("higher_decay_converges_faster", faster);
    Ok(ScenarioOutput {
        scenario: "decay".into(),
        tables: vec![table],
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes_and_has_one_row_per_user_block() {
        let out = run(&DecayConfig::default()).unwrap();
        assert!(out.summary.all_passed(), "{}", out.summary.to_text());
        assert_eq!(out.tables[0].len(), 200 * 4);
        assert_eq!(out.summary.get("user0_static_value"), Some("2000"));
    }

    #[test]
    fn residual_matches_closed_form() {
        let cfg = DecayConfig::default();
        let params = SystemParams::new(0.1, 0.0, 0.0).unwrap();
        let (_, residual) = trajectory(&cfg, 100, &params);
        // 200 * 0.9^50
        assert!((residual - 1.030_755_0).abs() < 1e-6, "{residual}");
    }

    #[test]
    fn rejects_bad_schedule() {
        let cfg = DecayConfig { removal_block: 50, ..DecayConfig::default() };
        assert!(run(&cfg).is_err());
    }
}
