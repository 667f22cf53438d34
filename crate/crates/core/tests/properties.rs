use std::collections::BTreeMap;

use pop_core::ack::{
    extend_path_ack, verify_path_ack, CompositeScheme, MessageDescriptor, MockScheme, PathAck, Signature, TaskId,
};
use pop_core::mining::{apply_transfer, propagate_upstream, retain_progressive, sybil, MiningDag, MiningMode};
use pop_core::prestige::{next_prestige, AccountId};
use pop_core::{relative_error, Account, ChainState, Economics, SystemParams, VerificationKey};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn id(n: u32) -> AccountId {
    AccountId(n)
}

/// Random forest: node k > 0 either starts a new tree or attaches to an
/// earlier node.
fn random_forest(rng: &mut ChaCha8Rng, n: u32) -> MiningDag {
    let mut dag = MiningDag::new();
    dag.add_root(id(0)).unwrap();
    for k in 1..n {
        if rng.gen_bool(0.1) {
            dag.add_root(id(k)).unwrap();
        } else {
            dag.attach_node(id(rng.gen_range(0..k)), id(k)).unwrap();
        }
    }
    dag
}

fn accounts(rng: &mut ChaCha8Rng, n: u32) -> BTreeMap<AccountId, Account> {
    (0..n)
        .map(|k| {
            let a = Account::new(id(k), rng.gen_range(0..200), VerificationKey::default())
                .with_prestige(rng.gen_range(-50.0..500.0));
            (a.id, a)
        })
        .collect()
}

#[test]
fn transfers_conserve_total_prestige_over_time() {
    let params = SystemParams::new(0.05, 0.5, 200.0).unwrap();
    for mode in MiningMode::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let dag = random_forest(&mut rng, 40);
        let mut with = accounts(&mut rng, 40);
        let mut without = with.clone();
        for block in 0..300u64 {
            for a in with.values_mut().chain(without.values_mut()) {
                a.prestige = next_prestige(a.prestige, a.coins, &params);
            }
            for _ in 0..rng.gen_range(0..5) {
                let ben = id(rng.gen_range(0..40));
                let con = id(rng.gen_range(0..40));
                let x = rng.gen_range(0.0..300.0);
                let rec = apply_transfer(&mut with, &dag, ben, con, x, mode, params.branch_power(), block).unwrap();
                assert!(rec.retained_by.iter().all(|(_, v)| *v >= 0.0));
                assert!(relative_error(rec.retained_total(), x) < 1e-9);
            }
            let a: f64 = with.values().map(|a| a.prestige).sum();
            let b: f64 = without.values().map(|a| a.prestige).sum();
            assert!(relative_error(a, b) < 1e-9, "{mode} block {block}: {a} vs {b}");
        }
    }
}

#[test]
fn cross_acknowledging_never_raises_the_pair() {
    let params = SystemParams::new(0.05, 0.5, 200.0).unwrap();
    for mode in MiningMode::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut with = ChainState::new(params, mode, Economics::default(), 1);
        for k in 0..4 {
            with.add_account_with_prestige(id(k), 50 + 20 * k as u64, 100.0).unwrap();
        }
        with.add_root(id(0)).unwrap();
        with.attach(id(0), id(1)).unwrap();
        with.attach(id(1), id(2)).unwrap();
        with.attach(id(0), id(3)).unwrap();
        let mut baseline = with.clone();
        let (i, j) = (id(2), id(3));
        for _ in 0..400 {
            let x_ji = rng.gen_range(0.0..400.0);
            // i pays back at least what it kept from j's payment
            let x_ij = x_ji * rng.gen_range(1.0..1.5);
            with.enqueue_transfer(j, i, x_ji).unwrap();
            with.enqueue_transfer(i, j, x_ij).unwrap();
            with.advance_block().unwrap();
            baseline.advance_block().unwrap();
            let pair = |c: &ChainState| c.account(i).unwrap().prestige + c.account(j).unwrap().prestige;
            assert!(pair(&with) <= pair(&baseline) + 1e-9 * pair(&baseline).abs().max(1.0), "{mode}");
        }
    }
}

#[test]
fn progressive_split_never_beats_whole_10k() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let x: f64 = rng.gen_range(1.0..1000.0);
        let p1 = rng.gen_range(1.0..1000.0);
        let p2 = rng.gen_range(1.0..1000.0);
        let pb = rng.gen_range(0.0..1000.0);
        let b = rng.gen_range(0.0..2.0);
        let whole = sybil::whole_retention(x, p1, p2, pb, retain_progressive);
        let split = sybil::split_retention(x, p1, p2, pb, b, retain_progressive);
        worst = worst.max(split - whole);
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn retained_share_shrinks_with_depth() {
    let mut dag = MiningDag::new();
    dag.add_root(id(0)).unwrap();
    for k in 1..20 {
        dag.attach_node(id(k - 1), id(k)).unwrap();
    }
    let shares: Vec<f64> = (0..20)
        .map(|k| propagate_upstream(&dag, id(k), 100.0, |_| 25.0, 0.5).unwrap()[0].1)
        .collect();
    assert!(shares.windows(2).all(|w| w[1] < w[0]), "{shares:?}");
}

#[test]
fn random_compose_orders_verify() {
    let s = MockScheme::setup(128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let parts: Vec<(MessageDescriptor, Signature)> = (0u32..12)
        .map(|k| {
            let kp = s.keygen(&k.to_be_bytes());
            let m = format!("message {k}").into_bytes();
            (MessageDescriptor::single(m.clone(), kp.public), s.sign(&kp.secret, &m))
        })
        .collect();
    for _ in 0..1000 {
        let mut order: Vec<usize> = (0..parts.len()).collect();
        order.shuffle(&mut rng);
        let take = rng.gen_range(2..=parts.len());
        let (mut l, mut sig) = parts[order[0]].clone();
        for &k in &order[1..take] {
            sig = s.compose((&l, &sig), (&parts[k].0, &parts[k].1)).unwrap();
            l = l.union(&parts[k].0);
        }
        assert!(s.verify(&l, &sig).is_valid());
        // dropping any entry breaks it
        let k = rng.gen_range(0..l.len());
        let subset: MessageDescriptor =
            l.entries().iter().enumerate().filter(|(i, _)| *i != k).map(|(_, e)| e.clone()).collect();
        assert!(!s.verify(&subset, &sig).is_valid());
    }
}

fn build_path(s: &MockScheme, n: u32) -> (Vec<pop_core::ack::KeyPair>, PathAck) {
    let keys: Vec<_> = (0..=n).map(|k| s.keygen(&k.to_be_bytes())).collect();
    let mut ack: Option<PathAck> = None;
    for k in 1..=n as usize {
        ack = Some(
            extend_path_ack(s, ack.as_ref(), &keys[k], TaskId::from_u64(k as u64), keys[k - 1].public, k as u64)
                .unwrap(),
        );
    }
    (keys, ack.unwrap())
}

proptest! {
    #[test]
    fn path_ack_round_trips_and_rejects_tampering(n in 1u32..10, byte in 0usize..1000, bit in 0u8..8) {
        let s = MockScheme::setup(128).unwrap();
        let (keys, ack) = build_path(&s, n);
        let root = keys[0].public;
        let leaf = keys[n as usize].public;
        let bytes = ack.encode();
        prop_assert_eq!(bytes.len(), 33 + 69 * n as usize);
        let decoded = PathAck::decode(&bytes).unwrap();
        prop_assert!(verify_path_ack(&s, &decoded, &root, &leaf).is_valid());

        let mut tampered = bytes.clone();
        let at = byte % tampered.len();
        tampered[at] ^= 1 << bit;
        let t = PathAck::decode(&tampered).unwrap();
        prop_assert!(!verify_path_ack(&s, &t, &root, &leaf).is_valid());
    }
}
