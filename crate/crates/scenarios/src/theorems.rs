//! Randomized checks of the three guarantees: splitting coins over identities
//! changes nothing, transfers conserve total prestige, and splitting under
//! progressive mining never retains more.

use pop_core::mining::{retain_progressive, sybil};
use pop_core::prestige::{next_prestige, static_value, AccountId};
use pop_core::{relative_error, ChainState, Economics, MiningMode, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::output::{num, ScenarioOutput, Summary, Table};
use crate::ScenarioError;

pub use sybil::RetainFn;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoremConfig {
    pub seed: u64,
    pub trials: u64,
    /// Blocks simulated per identity split.
    pub horizon: u64,
    pub max_parts: usize,
    pub accounts: u32,
    pub blocks: u64,
    pub transfers: usize,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 10_000,
            horizon: 50,
            max_parts: 8,
            accounts: 30,
            blocks: 200,
            transfers: 1000,
        }
    }
}

pub const EXACT_TOLERANCE: f64 = 1e-9;
pub const SPLIT_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremResult {
    pub name: &'static str,
    pub samples: u64,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremReport {
    pub results: Vec<TheoremResult>,
}

impl TheoremReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&TheoremResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new("theorems.csv", &["property", "samples", "max_violation", "tolerance", "passed"]);
        for r in &self.results {
            t.push(vec![
                r.name.to_string(),
                r.samples.to_string(),
                num(r.max_violation),
                num(r.tolerance),
                r.passed.to_string(),
            ]);
        }
        t
    }
}

/// Keeps the branch's share instead of the node's. Used as a negative
/// control: it lets a split identity retain more than it would whole.
pub fn corrupted_retain(x: f64, p_i: f64, p_b: f64) -> f64 {
    if p_i + p_b <= 0.0 {
        return 0.0;
    }
    x * p_b / (p_i + p_b)
}

/// Random coin splits over up to `max_parts` identities, each simulated from
/// zero prestige for `horizon` blocks next to the unsplit account.
pub fn check_identity_split(cfg: &TheoremConfig) -> TheoremResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut worst = 0.0f64;
    for _ in 0..cfg.trials {
        let coins: u64 = rng.gen_range(1..=1_000_000);
        let d = rng.gen_range(0.01..=0.99);
        let params = SystemParams::new(d, 0.0, 0.0).expect("decay in range");
        let k = rng.gen_range(1..=cfg.max_parts.max(1));
        let mut cuts: Vec<u64> = (1..k).map(|_| rng.gen_range(0..=coins)).collect();
        cuts.push(0);
        cuts.push(coins);
        cuts.sort_unstable();
        let parts: Vec<u64> = cuts.windows(2).map(|w| w[1] - w[0]).collect();

        let split_static: f64 = parts.iter().map(|&c| static_value(c, &params)).sum();
        worst = worst.max(relative_error(split_static, static_value(coins, &params)));
        let mut whole = 0.0;
        let mut split = vec![0.0; parts.len()];
        for _ in 0..cfg.horizon {
            whole = next_prestige(whole, coins, &params);
            for (p, &c) in split.iter_mut().zip(&parts) {
                *p = next_prestige(*p, c, &params);
            }
            worst = worst.max(relative_error(split.iter().sum(), whole));
        }
    }
    TheoremResult {
        name: "identity_split",
        samples: cfg.trials,
        max_violation: worst,
        tolerance: EXACT_TOLERANCE,
        passed: worst < EXACT_TOLERANCE,
    }
}

fn build_chain(cfg: &TheoremConfig, mode: MiningMode, rng: &mut ChaCha8Rng) -> Result<ChainState, ScenarioError> {
    let params = SystemParams::new(rng.gen_range(0.01..0.5), rng.gen_range(0.0..2.0), 0.0)
        .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
    let mut chain = ChainState::new(params, mode, Economics::default(), rng.gen());
    let runtime = |e: pop_core::ChainError| ScenarioError::Runtime(e.to_string());
    for k in 0..cfg.accounts {
        let id = AccountId(k);
        chain
            .add_account_with_prestige(id, rng.gen_range(0..200), rng.gen_range(-50.0..500.0))
            .map_err(runtime)?;
        if k == 0 || rng.gen_bool(0.1) {
            chain.add_root(id).map_err(runtime)?;
        } else {
            chain.attach(AccountId(rng.gen_range(0..k)), id).map_err(runtime)?;
        }
    }
    Ok(chain)
}

/// Paired chains, one with random transfers and one without; total prestige
/// is compared after every block.
pub fn check_conservation(cfg: &TheoremConfig) -> Result<TheoremResult, ScenarioError> {
    if cfg.accounts == 0 || cfg.blocks == 0 {
        return Err(ScenarioError::Invalid("conservation check needs accounts and blocks".into()));
    }
    let runs = (cfg.trials / 1000).max(1);
    let runtime = |e: pop_core::ChainError| ScenarioError::Runtime(e.to_string());
    let mut worst = 0.0f64;
    let mut samples = 0;
    for mode in MiningMode::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(2);
        for _ in 0..runs {
            let mut with = build_chain(cfg, mode, &mut rng)?;
            let mut without = with.clone();
            let mut schedule = vec![0usize; cfg.blocks as usize];
            for _ in 0..cfg.transfers {
                schedule[rng.gen_range(0..cfg.blocks as usize)] += 1;
            }
            for n in schedule {
                for _ in 0..n {
                    let ben = AccountId(rng.gen_range(0..cfg.accounts));
                    let con = AccountId(rng.gen_range(0..cfg.accounts));
                    with.enqueue_transfer(ben, con, rng.gen_range(0.0..300.0)).map_err(runtime)?;
                }
                with.advance_block().map_err(runtime)?;
                without.advance_block().map_err(runtime)?;
                worst = worst.max(relative_error(with.total_prestige(), without.total_prestige()));
            }
            samples += 1;
        }
    }
    Ok(TheoremResult {
        name: "conservation",
        samples,
        max_violation: worst,
        tolerance: EXACT_TOLERANCE,
        passed: worst < EXACT_TOLERANCE,
    })
}

/// Split against whole retention over random prestige, payments and branch
/// powers. The violation is how much more the split keeps.
pub fn check_progressive_split(cfg: &TheoremConfig, retain: RetainFn<f64>) -> TheoremResult {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(3);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cfg.trials {
        let x: f64 = rng.gen_range(1.0..1000.0);
        let p1 = rng.gen_range(1.0..1000.0);
        let p2 = rng.gen_range(1.0..1000.0);
        let pb = rng.gen_range(0.0..1000.0);
        let b = rng.gen_range(0.0..2.0);
        let whole = sybil::whole_retention(x, p1, p2, pb, retain);
        let split = sybil::split_retention(x, p1, p2, pb, b, retain);
        worst = worst.max(split - whole);
    }
    TheoremResult {
        name: "progressive_split",
        samples: cfg.trials,
        max_violation: worst,
        tolerance: SPLIT_SLACK,
        passed: worst <= SPLIT_SLACK,
    }
}

pub fn run_theorem_checks(cfg: &TheoremConfig, retain: RetainFn<f64>) -> Result<TheoremReport, ScenarioError> {
    if cfg.trials == 0 {
        return Err(ScenarioError::Invalid("trials must be at least 1".into()));
    }
    Ok(TheoremReport {
        results: vec![
            check_identity_split(cfg),
            check_conservation(cfg)?,
            check_progressive_split(cfg, retain),
        ],
    })
}

pub fn run(cfg: &TheoremConfig) -> Result<ScenarioOutput, ScenarioError> {
    let report = run_theorem_checks(cfg, retain_progressive)?;
    let mut summary = Summary::new();
    for r in &report.results {
        summary.put(format!("{}_max_violation", r.name), num(r.max_violation));
        summary.check(r.name, r.passed);
    }
    Ok(ScenarioOutput {
        scenario: "theorems".into(),
        tables: vec![report.to_table()],
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TheoremConfig {
        TheoremConfig {
            trials: 500,
            blocks: 50,
            transfers: 200,
            ..TheoremConfig::default()
        }
    }

    #[test]
    fn honest_retain_passes() {
        let report = run_theorem_checks(&small(), retain_progressive).unwrap();
        assert!(report.all_passed(), "{report:?}");
        assert_eq!(report.results.len(), 3);
    }

    #[test]
    fn corrupted_retain_is_caught() {
        let r = check_progressive_split(&small(), corrupted_retain);
        assert!(!r.passed);
        assert!(r.max_violation > 1.0);
        assert_eq!(corrupted_retain(100.0, 0.0, 0.0), 0.0);
        assert_eq!(corrupted_retain(100.0, 25.0, 75.0), 75.0);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = TheoremConfig { trials: 0, ..TheoremConfig::default() };
        assert!(matches!(run_theorem_checks(&cfg, retain_progressive), Err(ScenarioError::Invalid(_))));
    }
}
