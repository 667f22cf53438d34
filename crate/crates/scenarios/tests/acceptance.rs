//! One line per acceptance criterion, with the tolerances and time limits
//! each one is held to. Everything runs in a single test so the timings are
//! not skewed by sibling tests sharing the machine.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use pop_core::ack::{
    extend_path_ack, make_simple_ack, path_ack_len, CompositeScheme, MessageDescriptor, Signature, SIMPLE_ACK_LEN,
};
use pop_core::chain::elect_minter;
use pop_core::mining::retain_progressive;
use pop_core::prestige::{convergence_gap, next_prestige, AccountId};
use pop_core::{relative_error, Account, MockScheme, PathAck, SystemParams, TaskId, VerificationKey};
use pop_scenarios::stats::chi_square_p;
use pop_scenarios::theorems::{check_conservation, check_identity_split, check_progressive_split};
use pop_scenarios::{bbc, dag_study, run_named, tradeoff, ScenarioOutput, TheoremConfig, SCENARIOS};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Ledger {
    failed: Vec<String>,
}

impl Ledger {
    fn record(&mut self, n: u32, what: &str, ok: bool, detail: String) {
        println!("criterion {n:>2} {}: {what} ({detail})", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(format!("{n} {what}"));
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn checks_pass(out: &ScenarioOutput, keys: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for k in keys {
        let v = out.summary.get(k).unwrap_or("missing");
        ok &= v == "pass";
        detail.push(format!("{k}={v}"));
    }
    (ok, detail.join(" "))
}

fn static_convergence(l: &mut Ledger) {
    let params = SystemParams::new(0.05, 0.0, 0.0).unwrap();
    let ((p, gap), took) = timed(|| {
        let mut p = 0.0;
        for _ in 0..200 {
            p = next_prestige(p, 100, &params);
        }
        (p, convergence_gap(0.0, 100, &params, 200))
    });
    let ok = (p - 2000.0).abs() < 0.1 && relative_error(p - 2000.0, gap) < 1e-9 && took < Duration::from_millis(1);
    l.record(1, "static value convergence", ok, format!("P={p} gap={gap} took={took:?}"));
}

fn theorem_checks(l: &mut Ledger) {
    let cfg = TheoremConfig::default();
    let (r, took) = timed(|| check_identity_split(&cfg));
    let ok = r.passed && r.samples == 10_000 && took < Duration::from_secs(5);
    l.record(2, "identity split", ok, format!("max rel err {:e} over {} splits, took {took:?}", r.max_violation, r.samples));

    let (r, took) = timed(|| check_conservation(&cfg).unwrap());
    let ok = r.passed && cfg.transfers == 1000 && took < Duration::from_secs(10);
    l.record(3, "conservation", ok, format!("max rel err {:e} over {} paired runs, took {took:?}", r.max_violation, r.samples));

    let (r, took) = timed(|| check_progressive_split(&cfg, retain_progressive));
    let ok = r.passed && r.samples == 10_000 && took < Duration::from_secs(1);
    l.record(4, "progressive split", ok, format!("worst split - whole {:e}, took {took:?}", r.max_violation));
}

fn wire_sizes(l: &mut Ledger) {
    let s = MockScheme::setup(128).unwrap();
    let keys: Vec<_> = (0u32..=10).map(|k| s.keygen(&k.to_be_bytes())).collect();
    let simple = make_simple_ack(&s, &keys[1], TaskId::from_u64(1), keys[0].public, 200).unwrap();
    let mut ok = simple.encode().len() == 102 && SIMPLE_ACK_LEN == 102;
    let mut sizes = Vec::new();
    let mut ack: Option<PathAck> = None;
    for n in 1..=10usize {
        ack = Some(extend_path_ack(&s, ack.as_ref(), &keys[n], TaskId::from_u64(n as u64), keys[n - 1].public, 200).unwrap());
        let len = ack.as_ref().unwrap().encode().len();
        ok &= len == 33 + 69 * n && path_ack_len(n) == len;
        sizes.push(len);
    }
    l.record(5, "ack wire sizes", ok, format!("simple={} path={sizes:?}", simple.encode().len()));
}

fn composite_contract(l: &mut Ledger) {
    let s = MockScheme::setup(128).unwrap();
    let ((ok, cases), took) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let parts: Vec<(MessageDescriptor, Signature)> = (0u32..12)
            .map(|k| {
                let kp = s.keygen(&k.to_be_bytes());
                let m = format!("task {k}").into_bytes();
                (MessageDescriptor::single(m.clone(), kp.public), s.sign(&kp.secret, &m))
            })
            .collect();
        let mut ok = true;
        let mut cases = 0;
        for _ in 0..1000 {
            let mut order: Vec<usize> = (0..parts.len()).collect();
            order.shuffle(&mut rng);
            let take = rng.gen_range(2..=parts.len());
            let (mut l, mut sig) = parts[order[0]].clone();
            for &k in &order[1..take] {
                sig = s.compose((&l, &sig), (&parts[k].0, &parts[k].1)).unwrap();
                l = l.union(&parts[k].0);
            }
            ok &= s.verify(&l, &sig).is_valid();

            // subset
            let drop = rng.gen_range(0..l.len());
            let subset: MessageDescriptor =
                l.entries().iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, e)| e.clone()).collect();
            ok &= !s.verify(&subset, &sig).is_valid();
            // superset
            let outside = order[take..].first().copied();
            if let Some(k) = outside {
                ok &= !s.verify(&l.union(&parts[k].0), &sig).is_valid();
            }
            // tampered signature
            let mut bad = sig;
            bad.0[rng.gen_range(0..33)] ^= 1 << rng.gen_range(0..8);
            ok &= !s.verify(&l, &bad).is_valid();
            // overlapping compose and duplicated entries
            let again = order[0];
            ok &= s.compose((&l, &sig), (&parts[again].0, &parts[again].1)).is_none();
            let mut dup = l.clone();
            let (m, vk) = parts[again].0.entries()[0].clone();
            dup.push(m, vk);
            ok &= !s.verify(&dup, &s.combine(&sig, &parts[again].1)).is_valid();
            cases += 1;
        }
        (ok, cases)
    });
    let ok = ok && took < Duration::from_secs(2);
    l.record(6, "composite signature contract", ok, format!("{cases} compose orders with tamper cases, took {took:?}"));
}

fn election(l: &mut Ledger) {
    let prestige = [500.0, 250.0, 125.0, 100.0, 25.0, 0.0, -40.0];
    let accounts: BTreeMap<AccountId, Account> = prestige
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let id = AccountId(k as u32);
            (id, Account::new(id, 1, VerificationKey::default()).with_prestige(p))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut counts = vec![0u64; prestige.len()];
    let n = 100_000;
    for _ in 0..n {
        counts[elect_minter(&accounts, &mut rng).unwrap().0 as usize] += 1;
    }
    let total: f64 = prestige.iter().map(|p: &f64| p.max(0.0)).sum();
    // accounts with no weight must never win; test the rest
    let never = counts[5] + counts[6];
    let expected: Vec<f64> = prestige[..5].iter().map(|p| n as f64 * p / total).collect();
    let (stat, p) = chi_square_p(&counts[..5], &expected).unwrap();
    l.record(7, "election proportional to clamped prestige", p > 0.01 && never == 0, format!("chi2={stat:.3} p={p:.4} zero-weight wins={never}"));
}

fn dag_trends(l: &mut Ledger) {
    let cfg = dag_study::DagStudyConfig::default();
    assert_eq!((cfg.users, cfg.dags, cfg.branch_power), (1000, 100, 0.5));
    let (out, took) = timed(|| dag_study::run(&cfg).unwrap());
    let (ok, detail) = checks_pass(
        &out,
        &[
            "simple_gain_flat_vs_distance",
            "progressive_gain_decreases_with_distance",
            "simple_gain_linear_in_tasks",
            "progressive_gain_linear_in_tasks",
            "zero_base_retains_nothing",
        ],
    );
    l.record(8, "dag study trends", ok && took < Duration::from_secs(60), format!("{detail} took={took:?}"));
}

fn tradeoff_crossover(l: &mut Ledger) {
    let (out, took) = timed(|| tradeoff::run(&tradeoff::TradeoffConfig::default()).unwrap());
    let (ok, detail) = checks_pass(&out, &["poor_active_wins_at_smallest_decay", "rich_lazy_wins_at_largest_decay"]);
    let cohorts = (out.summary.get("poor_active"), out.summary.get("rich_lazy"));
    let ok = ok && cohorts == (Some("c10_w0.25"), Some("c50_w0.05")) && took < Duration::from_secs(30);
    l.record(9, "tradeoff crossover", ok, format!("{detail} took={took:?}"));
}

fn bbc_budget(l: &mut Ledger) {
    let cfg = bbc::BbcConfig::default();
    assert_eq!(cfg.scale, 0.001);
    let (out, took) = timed(|| bbc::run(&cfg).unwrap());
    let (ok, detail) = checks_pass(&out, &["rewards_sum_to_budget", "top_reward_in_band"]);
    let top = out.summary.get("top_reward").unwrap_or("missing");
    l.record(10, "bbc budget split", ok && took < Duration::from_secs(120), format!("{detail} top={top} took={took:?}"));
}

fn determinism(l: &mut Ledger) {
    let mut differing = Vec::new();
    for s in SCENARIOS {
        let a = run_named(s.name, None, &[]).unwrap().files();
        let b = run_named(s.name, None, &[]).unwrap().files();
        if a != b {
            differing.push(s.name);
        }
    }
    l.record(11, "byte-identical reruns", differing.is_empty(), format!("{} scenarios, differing: {differing:?}", SCENARIOS.len()));
}

#[test]
fn acceptance() {
    let mut l = Ledger { failed: Vec::new() };
    static_convergence(&mut l);
    theorem_checks(&mut l);
    wire_sizes(&mut l);
    composite_contract(&mut l);
    election(&mut l);
    dag_trends(&mut l);
    tradeoff_crossover(&mut l);
    bbc_budget(&mut l);
    determinism(&mut l);
    assert!(l.failed.is_empty(), "failed criteria: {:?}", l.failed);
}
