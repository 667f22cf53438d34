use std::collections::BTreeMap;

use rand::Rng;

use crate::prestige::{Account, AccountId};
use crate::Prestige;

/// Draws a minter with probability proportional to `max(P, 0)`.
///
/// When no account has positive prestige the draw is uniform over accounts
/// holding coins, or over everyone if nobody does. Returns `None` only for an
/// empty account set.
pub fn elect_minter<R: Rng + ?Sized>(
    accounts: &BTreeMap<AccountId, Account<Prestige>>,
    rng: &mut R,
) -> Option<AccountId> {
    if accounts.is_empty() {
        return None;
    }
    let mut cumulative = Vec::with_capacity(accounts.len());
    let mut total = 0.0;
    for a in accounts.values() {
        total += a.prestige.max(0.0);
        cumulative.push(total);
    }
    if total > 0.0 {
        let u = rng.gen::<f64>() * total;
        // first index whose cumulative weight exceeds u; skips zero-weight entries
        let k = cumulative.partition_point(|&c| c <= u).min(accounts.len() - 1);
        return accounts.keys().nth(k).copied();
    }

    let funded: Vec<AccountId> = accounts.values().filter(|a| a.coins > 0).map(|a| a.id).collect();
    let pool: Vec<AccountId> = if funded.is_empty() {
        accounts.keys().copied().collect()
    } else {
        funded
    };
    Some(pool[rng.gen_range(0..pool.len())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ack::VerificationKey;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn accounts(spec: &[(u64, f64)]) -> BTreeMap<AccountId, Account<Prestige>> {
        spec.iter()
            .enumerate()
            .map(|(k, &(c, p))| {
                let id = AccountId(k as u32);
                (id, Account::new(id, c, VerificationKey::default()).with_prestige(p))
            })
            .collect()
    }

    fn counts(acc: &BTreeMap<AccountId, Account<Prestige>>, draws: usize, seed: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut n = vec![0usize; acc.len()];
        for _ in 0..draws {
            n[elect_minter(acc, &mut rng).unwrap().0 as usize] += 1;
        }
        n
    }

    #[test]
    fn frequencies_follow_prestige() {
        let n = counts(&accounts(&[(0, 100.0), (0, 300.0)]), 100_000, 1);
        let share = n[0] as f64 / 100_000.0;
        assert!((share - 0.25).abs() < 0.01, "{share}");
    }

    #[test]
    fn chi_square_against_clamped_weights() {
        let acc = accounts(&[(5, 10.0), (5, 250.0), (0, -40.0), (1, 0.0), (9, 90.5), (2, 649.5)]);
        let draws = 100_000;
        let n = counts(&acc, draws, 11);
        assert_eq!(n[2], 0);
        assert_eq!(n[3], 0);
        let weights: Vec<f64> = acc.values().map(|a| a.prestige.max(0.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut stat = 0.0;
        let mut cells = 0;
        for (obs, w) in n.iter().zip(&weights) {
            if *w > 0.0 {
                let exp = draws as f64 * w / total;
                stat += (*obs as f64 - exp).powi(2) / exp;
                cells += 1;
            }
        }
        let p = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat);
        assert!(p > 0.01, "chi2={stat} p={p}");
    }

    #[test]
    fn single_account_always_wins() {
        let acc = accounts(&[(0, 0.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(elect_minter(&acc, &mut rng), Some(AccountId(0)));
        }
    }

    #[test]
    fn fallbacks() {
        let acc = accounts(&[(0, 0.0), (7, -3.0), (0, 0.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(elect_minter(&acc, &mut rng), Some(AccountId(1)));
        }
        let n = counts(&accounts(&[(0, 0.0), (0, 0.0), (0, -1.0)]), 3000, 2);
        assert!(n.iter().all(|&c| c > 800));
        assert_eq!(elect_minter(&BTreeMap::new(), &mut rng), None);
    }
}
