//! Retention of a user who splits into two identities, against the same user
//! kept whole.
//!
//! Setup: the user has prestige `P = P1 + P2` and sits under a branch of
//! power `P_b`. A beneficiary pays it `x`.
//!
//! Split construction: identity 2 takes the user's place in the DAG,
//! identity 1 hangs below identity 2 and receives the payment. Identity 1
//! then "buys" a fake service from identity 2 for the same `x`, so the user
//! ends up with
//!
//! ```text
//! f1(x) + f2(x - f1(x)) + f2(x) - x = f1(x) - x + f2(2x - f1(x))
//! ```
//!
//! with `f1` using branch power `b * P2 + P_b` and `f2` using `P_b`.

use crate::scalar::Scalar;

/// `(x, P_i, P_b) -> retained`; normally
/// [`retain_progressive`](super::retain_progressive).
pub type RetainFn<S> = fn(S, S, S) -> S;

pub fn whole_retention<S: Scalar>(x: S, p1: S, p2: S, p_b: S, retain: RetainFn<S>) -> S {
    retain(x, p1 + p2, p_b)
}

pub fn split_retention<S: Scalar>(x: S, p1: S, p2: S, p_b: S, b: S, retain: RetainFn<S>) -> S {
    let kept_1 = retain(x, p1, b * p2.non_negative() + p_b);
    let kept_2 = retain(x - kept_1, p2, p_b);
    let fake_2 = retain(x, p2, p_b);
    kept_1 + kept_2 + fake_2 - x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mining::retain_progressive;
    use num_rational::Ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_closed_form() {
        let (x, p1, p2, pb, b) = (100.0, 50.0, 50.0, 100.0, 0.5);
        let f1 = retain_progressive(x, p1, b * p2 + pb);
        let f2 = |y: f64| retain_progressive(y, p2, pb);
        let closed = f1 - x + f2(2.0 * x - f1);
        let split = split_retention(x, p1, p2, pb, b, retain_progressive);
        assert!((split - closed).abs() < 1e-12);
        assert_eq!(whole_retention(x, p1, p2, pb, retain_progressive), 50.0);
    }

    #[test]
    fn no_branch_power_split_breaks_even() {
        let q = Ratio::<i128>::from_integer;
        let split = split_retention(q(100), q(30), q(70), q(0), Ratio::new(1, 2), retain_progressive);
        assert_eq!(split, q(100));
    }

    #[test]
    fn split_never_beats_whole() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let x: f64 = rng.gen_range(0.01..1e4);
            let p1 = rng.gen_range(0.01..1e4);
            let p2 = rng.gen_range(0.01..1e4);
            let pb = rng.gen_range(0.0..1e4);
            let b = rng.gen_range(0.0..2.0);
            let whole = whole_retention(x, p1, p2, pb, retain_progressive);
            let split = split_retention(x, p1, p2, pb, b, retain_progressive);
            assert!(split <= whole + 1e-12 * whole.max(1.0), "{x} {p1} {p2} {pb} {b}");
        }
    }
}
