//! Retain functions and upstream propagation.
//!
//! In progressive mining a node keeps `x * P / (P + P_b)` of what reaches it,
//! where `P_b` is `b` times the summed prestige of all its ancestors. The
//! rest moves to the parent, which applies its own fraction, and so on; the
//! root keeps whatever is left.

use crate::prestige::AccountId;
use crate::scalar::Scalar;

use super::dag::{DagError, MiningDag};

/// Simple mining: the contributor keeps everything.
pub fn retain_simple<S: Scalar>(x: S) -> S {
    x
}

/// Progressive mining share for a node with prestige `p_i` under branch
/// power `p_b`. Non-positive prestige keeps nothing.
pub fn retain_progressive<S: Scalar>(x: S, p_i: S, p_b: S) -> S {
    if p_i <= S::zero() {
        S::zero()
    } else if p_b <= S::zero() {
        x
    } else {
        x * p_i / (p_i + p_b)
    }
}

/// `b` times the sum of `max(P, 0)` over every ancestor of `node`.
pub fn branch_power<S: Scalar>(
    dag: &MiningDag,
    node: AccountId,
    prestige_of: impl Fn(AccountId) -> S,
    b: S,
) -> Result<S, DagError> {
    let sum = dag
        .ancestors(node)?
        .into_iter()
        .fold(S::zero(), |acc, a| acc + prestige_of(a).non_negative());
    Ok(b * sum)
}

/// Splits `x` earned by `contributor` along its path to the root. Returns one
/// entry per node on the path, contributor first, root last.
pub fn propagate_upstream<S: Scalar>(
    dag: &MiningDag,
    contributor: AccountId,
    x: S,
    prestige_of: impl Fn(AccountId) -> S,
    b: S,
) -> Result<Vec<(AccountId, S)>, DagError> {
    let mut path = vec![contributor];
    path.extend(dag.ancestors(contributor)?);
    let prestige: Vec<S> = path.iter().map(|&n| prestige_of(n)).collect();

    // above[k] = sum of clamped prestige strictly above path[k]
    let mut above = vec![S::zero(); path.len()];
    for k in (0..path.len() - 1).rev() {
        above[k] = above[k + 1] + prestige[k + 1].non_negative();
    }

    let mut residual = x;
    let mut out = Vec::with_capacity(path.len());
    for k in 0..path.len() {
        let kept = if k + 1 == path.len() {
            residual
        } else {
            retain_progressive(residual, prestige[k], b * above[k])
        };
        residual = residual - kept;
        out.push((path[k], kept));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn id(n: u32) -> AccountId {
        AccountId(n)
    }

    fn chain(prestige: &[f64]) -> (MiningDag, BTreeMap<AccountId, f64>) {
        let mut dag = MiningDag::new();
        dag.add_root(id(0)).unwrap();
        for k in 1..prestige.len() as u32 {
            dag.attach_node(id(k - 1), id(k)).unwrap();
        }
        let map = prestige.iter().enumerate().map(|(k, p)| (id(k as u32), *p)).collect();
        (dag, map)
    }

    #[test]
    fn retain_examples() {
        assert_eq!(retain_simple(200.0), 200.0);
        assert_eq!(retain_simple(0.0), 0.0);
        assert_eq!(retain_simple(13.5), 13.5);
        assert_eq!(retain_progressive(100.0, 100.0, 100.0), 50.0);
        assert_eq!(retain_progressive(100.0, 0.0, 40.0), 0.0);
        assert_eq!(retain_progressive(100.0, 80.0, 0.0), 100.0);
        assert_eq!(retain_progressive(100.0, -5.0, 0.0), 0.0);
        assert_eq!(retain_progressive(0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn branch_power_examples() {
        let (dag, p) = chain(&[150.0, 250.0, 10.0]);
        assert_eq!(branch_power(&dag, id(0), |n| p[&n], 7.0).unwrap(), 0.0);
        assert_eq!(branch_power(&dag, id(2), |n| p[&n], 0.5).unwrap(), 200.0);
        let (dag, p) = chain(&[100.0, 100.0]);
        assert_eq!(branch_power(&dag, id(1), |n| p[&n], 0.5).unwrap(), 50.0);
        // negative ancestors count as zero
        let (dag, p) = chain(&[-300.0, 100.0, 1.0]);
        assert_eq!(branch_power(&dag, id(2), |n| p[&n], 1.0).unwrap(), 100.0);
        assert_eq!(
            branch_power(&dag, id(9), |n| p[&n], 1.0),
            Err(DagError::UnknownNode(id(9)))
        );
    }

    #[test]
    fn propagate_examples() {
        let (dag, p) = chain(&[100.0]);
        assert_eq!(propagate_upstream(&dag, id(0), 100.0, |n| p[&n], 1.0).unwrap(), vec![(id(0), 100.0)]);

        let (dag, p) = chain(&[100.0, 100.0]);
        assert_eq!(
            propagate_upstream(&dag, id(1), 100.0, |n| p[&n], 1.0).unwrap(),
            vec![(id(1), 50.0), (id(0), 50.0)]
        );

        let (dag, p) = chain(&[0.0, 100.0, 0.0]);
        assert_eq!(
            propagate_upstream(&dag, id(2), 100.0, |n| p[&n], 0.5).unwrap(),
            vec![(id(2), 0.0), (id(1), 100.0), (id(0), 0.0)]
        );
    }

    #[test]
    fn exact_propagation_sums_to_x() {
        type Q = Ratio<i128>;
        let mut dag = MiningDag::new();
        dag.add_root(id(0)).unwrap();
        for k in 1..6 {
            dag.attach_node(id(k - 1), id(k)).unwrap();
        }
        let p = |n: AccountId| Q::from_integer(10 + 7 * n.0 as i128);
        let x = Q::from_integer(200);
        let out = propagate_upstream(&dag, id(5), x, p, Q::new(1, 2)).unwrap();
        assert_eq!(out.iter().fold(Q::from_integer(0), |a, (_, v)| a + *v), x);
    }

    #[test]
    fn shorter_branches_retain_more() {
        // equal positive prestige: retained share falls strictly with depth
        let (dag, p) = chain(&[50.0; 12]);
        let mut last = f64::INFINITY;
        for k in 0..12 {
            let pb = branch_power(&dag, id(k), |n| p[&n], 0.5).unwrap();
            let kept = retain_progressive(100.0, 50.0, pb);
            assert!(kept < last, "depth {k}");
            last = kept;
        }
    }

    proptest! {
        #[test]
        fn propagation_is_non_negative_and_conserving(
            prestige in prop::collection::vec(-100.0f64..1000.0, 1..15),
            x in 0.0f64..10_000.0,
            b in 0.0f64..3.0,
        ) {
            let (dag, p) = chain(&prestige);
            let leaf = id(prestige.len() as u32 - 1);
            let out = propagate_upstream(&dag, leaf, x, |n| p[&n], b).unwrap();
            prop_assert_eq!(out.len(), prestige.len());
            prop_assert!(out.iter().all(|(_, v)| *v >= 0.0));
            let sum: f64 = out.iter().map(|(_, v)| v).sum();
            prop_assert!(crate::relative_error(sum, x) < 1e-9);
        }

        #[test]
        fn retain_fraction_in_unit_interval(
            x in 0.0f64..1e6, p in -1e4f64..1e4, pb in 0.0f64..1e4,
        ) {
            let kept = retain_progressive(x, p, pb);
            prop_assert!(kept >= 0.0 && kept <= x);
        }
    }
}
