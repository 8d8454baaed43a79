use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `⌈log₂ n⌉` for `n ≥ 1`.
pub fn ceil_log2(n: usize) -> u32 {
    assert!(n >= 1, "ceil_log2 of zero");
    usize::BITS - (n - 1).leading_zeros()
}

/// Largest admissible price exponent, `⌈log₂ n⌉ + 1`.
pub fn max_price_exponent(n: usize) -> u32 {
    ceil_log2(n) + 1
}

/// Every random choice of one mechanism run, drawn up front.
///
/// Generated from a 64-bit seed with ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`)
/// in a fixed order: one 64-bit word for the second-price coin, one per
/// bidder for the statistics-group coins, and one for the price exponent.
/// A word `w` becomes a uniform `u = (w >> 11) · 2⁻⁵³`; a coin is heads when
/// `u < ε`. The exponent is `w mod (⌈log₂ n⌉ + 2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomTape {
    pub seed: u64,
    pub secprice: bool,
    /// `true` puts the bidder in the statistics group.
    pub group_coins: Vec<bool>,
    pub price_exponent: u32,
}

fn unit(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl RandomTape {
    pub fn from_seed(seed: u64, bidders: usize, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if bidders == 0 {
            return Err(Error::invalid("tape needs at least one bidder"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let secprice = unit(rng.next_u64()) < epsilon;
        let group_coins = (0..bidders)
            .map(|_| unit(rng.next_u64()) < epsilon)
            .collect();
        let levels = u64::from(max_price_exponent(bidders)) + 1;
        let price_exponent = (rng.next_u64() % levels) as u32;
        Ok(RandomTape {
            seed,
            secprice,
            group_coins,
            price_exponent,
        })
    }

    pub fn validate(&self, bidders: usize) -> Result<()> {
        if self.group_coins.len() != bidders {
            return Err(Error::invalid(format!(
                "tape has {} group coins for {bidders} bidders",
                self.group_coins.len()
            )));
        }
        if self.price_exponent > max_price_exponent(bidders) {
            return Err(Error::invalid(format!(
                "price exponent {} exceeds {}",
                self.price_exponent,
                max_price_exponent(bidders)
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_ranges() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(max_price_exponent(1), 1);
    }

    #[test]
    fn tape_is_deterministic_and_in_range() {
        let a = RandomTape::from_seed(42, 6, 0.3).unwrap();
        let b = RandomTape::from_seed(42, 6, 0.3).unwrap();
        assert_eq!(a, b);
        assert!(a.validate(6).is_ok());
        assert!(a.validate(5).is_err());
        for seed in 0..500 {
            let t = RandomTape::from_seed(seed, 1, 0.5).unwrap();
            assert!(t.price_exponent <= 1);
        }
    }

    #[test]
    fn coin_frequencies_track_epsilon() {
        let tapes: Vec<_> = (0..4000)
            .map(|s| RandomTape::from_seed(s, 10, 0.2).unwrap())
            .collect();
        let sec = tapes.iter().filter(|t| t.secprice).count() as f64 / 4000.0;
        let stat = tapes
            .iter()
            .flat_map(|t| &t.group_coins)
            .filter(|&&c| c)
            .count() as f64
            / 40000.0;
        assert!((sec - 0.2).abs() < 0.03, "secprice rate {sec}");
        assert!((stat - 0.2).abs() < 0.01, "stat rate {stat}");
        let mut counts = [0usize; 6];
        for t in &tapes {
            counts[t.price_exponent as usize] += 1;
        }
        assert!(
            counts.iter().all(|&c| (500..=850).contains(&c)),
            "{counts:?}"
        );
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert!(RandomTape::from_seed(1, 3, 0.0).is_err());
        assert!(RandomTape::from_seed(1, 3, 1.0).is_err());
        assert!(RandomTape::from_seed(1, 0, 0.5).is_err());
    }
}
