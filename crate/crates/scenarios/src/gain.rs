//! Total prestige above the static value produced by a steady per-block
//! injection, across decay values.

use pop_core::prestige::{next_prestige, static_value};
use pop_core::{relative_error, SystemParams};
use serde::{Deserialize, Serialize};

use crate::output::{num, ScenarioOutput, Summary, Table};
use crate::ScenarioError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainConfig {
    pub blocks: u64,
    pub coins: u64,
    pub decay_grid: Vec<f64>,
    /// Prestige added to each user after every block.
    pub injections: Vec<f64>,
}

impl Default for GainConfig {
    fn default() -> Self {
        Self {
            blocks: 10_000,
            coins: 100,
            decay_grid: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 0.99],
            injections: vec![0.0, 10.0, 20.0, 40.0],
        }
    }
}

/// Sum over blocks of `P - S` for a user starting at `S`.
pub fn total_excess(coins: u64, decay: f64, injection: f64, blocks: u64) -> Result<f64, ScenarioError> {
    let params = SystemParams::new(decay, 0.0, 0.0).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
    let s = static_value(coins, &params);
    let mut p = s;
    let mut total = 0.0;
    for _ in 0..blocks {
        p = next_prestige(p, coins, &params) + injection;
        total += p - s;
    }
    Ok(total)
}

pub fn run(cfg: &GainConfig) -> Result<ScenarioOutput, ScenarioError> {
    let mut grid = cfg.decay_grid.clone();
    grid.sort_by(f64::total_cmp);
    let mut table = Table::new("gain.csv", &["decay", "injection", "excess"]);
    let mut excess = vec![vec![0.0; cfg.injections.len()]; grid.len()];
    for (i, &d) in grid.iter().enumerate() {
        for (j, &inj) in cfg.injections.iter().enumerate() {
            excess[i][j] = total_excess(cfg.coins, d, inj, cfg.blocks)?;
            table.push(vec![num(d), num(inj), num(excess[i][j])]);
        }
    }

    let mut summary = Summary::new();
    // floating-point residue of P - S at the fixed point, summed over blocks
    let zero_tol = 1e-9 * cfg.blocks as f64 * cfg.coins as f64 / grid.first().copied().unwrap_or(1.0);
    let mut zero_ok = true;
    let mut decreasing = true;
    let mut linear = true;
    let mut linear_pairs = 0;
    for (j, &inj) in cfg.injections.iter().enumerate() {
        let col: Vec<f64> = excess.iter().map(|r| r[j]).collect();
        if inj == 0.0 {
            let worst = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            summary.put("zero_injection_max_abs_excess", num(worst));
            zero_ok &= worst <= zero_tol;
        } else {
            decreasing &= col.windows(2).all(|w| w[1] < w[0]);
        }
        if let Some(k) = cfg.injections.iter().position(|&x| x == 2.0 * inj && inj != 0.0) {
            linear_pairs += 1;
            linear &= excess.iter().all(|r| relative_error(r[k], 2.0 * r[j]) < 1e-9);
        }
    }
    summary.put("decay_values", grid.len());
    summary.put("doubling_pairs", linear_pairs);
    summary.check("zero_injection_zero_excess", zero_ok);
    summary.check("excess_decreases_with_decay", decreasing);
    summary.check("excess_linear_in_injection", linear && linear_pairs > 0);
    Ok(ScenarioOutput {
        scenario: "gain".into(),
        tables: vec![table],
        summary,
    })
}
