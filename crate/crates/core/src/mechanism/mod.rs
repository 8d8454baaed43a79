//! The random-sampling auction.
//!
//! With probability `ε` the mechanism runs a second-price auction for a
//! single winner. Otherwise every bidder is independently put into a
//! statistics group with probability `ε`; the largest statistics bid `B`
//! fixes a posted price `p = 2^(−X)·B` with `X` uniform on
//! `{0, …, ⌈log₂ n⌉ + 1}`. Remaining bidders bidding at least `p` are handed
//! to a bid-oblivious packer, and every packed winner pays `p`.
//!
//! Once the [`RandomTape`] is fixed the outcome is a deterministic truthful
//! mechanism: a bidder's report only decides membership in the candidate set
//! (or, in the second-price branch, the Vickrey ranking), never the price.

mod tape;

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Allocation, Instance};
use crate::oracle::{feasible_assignment, OracleLimits};
use crate::packing::Packer;

use tape::check_epsilon;
pub use tape::{ceil_log2, max_price_exponent, RandomTape};

/// Default sampling probability.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Nonnegative single-parameter bids, indexed by bidder id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BidProfile(Vec<f64>);

impl BidProfile {
    pub fn new(bids: Vec<f64>) -> Result<Self> {
        if let Some((i, b)) = bids
            .iter()
            .enumerate()
            .find(|(_, b)| !(b.is_finite() && **b >= 0.0))
        {
            return Err(Error::invalid(format!(
                "bid of bidder {i} must be finite and >= 0, got {b}"
            )));
        }
        Ok(BidProfile(bids))
    }

    /// The profile with bidder `i`'s bid replaced.
    pub fn with_bid(&self, i: usize, bid: f64) -> Result<Self> {
        let mut bids = self.0.clone();
        *bids
            .get_mut(i)
            .ok_or_else(|| Error::invalid(format!("no bidder {i}")))? = bid;
        BidProfile::new(bids)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for BidProfile {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for BidProfile {
    type Error = Error;

    fn try_from(bids: Vec<f64>) -> Result<Self> {
        BidProfile::new(bids)
    }
}

impl From<BidProfile> for Vec<f64> {
    fn from(bids: BidProfile) -> Vec<f64> {
        bids.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    SecondPrice,
    PostedPrice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub allocation: Allocation,
    pub payments: Vec<f64>,
    pub branch: Branch,
    /// Posted price; 0 in the second-price branch.
    pub price: f64,
    /// Bidders handed to the packer (posted-price branch only).
    pub candidates: Vec<usize>,
    /// Bidders that cannot win even alone.
    pub removed_pre: Vec<usize>,
    pub tape: RandomTape,
}

impl Outcome {
    pub fn welfare(&self, values: &[f64]) -> f64 {
        self.allocation.welfare(values)
    }

    pub fn revenue(&self) -> f64 {
        self.payments.iter().sum()
    }
}

/// Second-price auction: highest bid wins (lowest id on ties) and pays the
/// highest competing bid, or 0 without competitors.
pub fn vickrey(bids: &[f64]) -> Result<(usize, f64)> {
    let ids: Vec<usize> = (0..bids.len()).collect();
    vickrey_among(bids, &ids)
}

fn vickrey_among(bids: &[f64], ids: &[usize]) -> Result<(usize, f64)> {
    let Some(&first) = ids.first() else {
        return Err(Error::invalid(
            "second-price auction needs at least one bidder",
        ));
    };
    let mut winner = first;
    for &i in &ids[1..] {
        if bids[i] > bids[winner] {
            winner = i;
        }
    }
    let payment = ids
        .iter()
        .filter(|&&i| i != winner)
        .map(|&i| bids[i])
        .fold(0.0, f64::max);
    Ok((winner, payment))
}

/// Posted price `2^(−exponent)·base` for an `n`-bidder instance.
pub fn sample_price(base: f64, n: usize, exponent: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("price ladder needs n >= 1"));
    }
    let top = max_price_exponent(n);
    if exponent > top {
        return Err(Error::invalid(format!(
            "price exponent {exponent} outside 0..={top}"
        )));
    }
    Ok(base * 2f64.powi(-(exponent as i32)))
}

/// An allocation in which `bidder` alone wins, if one exists.
pub fn solo_allocation(instance: &Instance, bidder: usize) -> Result<Option<Allocation>> {
    instance.check_bidder(bidder)?;
    let limits = OracleLimits {
        max_channels: usize::MAX,
        ..OracleLimits::default()
    };
    feasible_assignment(instance, &[bidder], limits)
}

/// Bidders that can win when served alone. Downward closure makes this the
/// set of bidders appearing in any feasible allocation.
pub fn prefilter(instance: &Instance) -> Result<Vec<usize>> {
    let mut survivors = Vec::new();
    for bidder in instance.bidders() {
        if solo_allocation(instance, bidder)?.is_some() {
            survivors.push(bidder);
        }
    }
    Ok(survivors)
}

/// Runs the mechanism on a fixed tape.
pub fn run_mechanism(
    instance: &Instance,
    bids: &BidProfile,
    epsilon: f64,
    packer: &dyn Packer,
    tape: &RandomTape,
) -> Result<Outcome> {
    let survivors = prefilter(instance)?;
    run_with_survivors(instance, bids, epsilon, packer, tape, &survivors)
}

/// Runs the mechanism on a tape generated from `seed`.
pub fn run_mechanism_seeded(
    instance: &Instance,
    bids: &BidProfile,
    epsilon: f64,
    packer: &dyn Packer,
    seed: u64,
) -> Result<Outcome> {
    let tape = RandomTape::from_seed(seed, instance.num_bidders(), epsilon)?;
    run_mechanism(instance, bids, epsilon, packer, &tape)
}

/// [`run_mechanism`] with a precomputed [`prefilter`] result. The survivor set
/// depends only on the instance, so repeated runs may share it.
pub fn run_with_survivors(
    instance: &Instance,
    bids: &BidProfile,
    epsilon: f64,
    packer: &dyn Packer,
    tape: &RandomTape,
    survivors: &[usize],
) -> Result<Outcome> {
    check_epsilon(epsilon)?;
    let n = instance.num_bidders();
    if bids.len() != n {
        return Err(Error::invalid(format!(
            "{} bids for {n} bidders",
            bids.len()
        )));
    }
    if !packer.supports(instance.kind()) {
        return Err(Error::EnvironmentMismatch {
            operation: "run_mechanism",
            expected: "an environment supported by the packer",
            found: instance.kind().name(),
        });
    }
    tape.validate(n)?;

    let removed_pre: Vec<usize> = instance
        .bidders()
        .filter(|i| !survivors.contains(i))
        .collect();
    let mut payments = vec![0.0; n];
    let k = instance.channels();

    if survivors.is_empty() {
        return Ok(Outcome {
            allocation: Allocation::empty(k),
            payments,
            branch: if tape.secprice {
                Branch::SecondPrice
            } else {
                Branch::PostedPrice
            },
            price: 0.0,
            candidates: Vec::new(),
            removed_pre,
            tape: tape.clone(),
        });
    }

    if tape.secprice {
        let (winner, payment) = vickrey_among(bids, survivors)?;
        let allocation = solo_allocation(instance, winner)?
            .ok_or_else(|| Error::invalid(format!("prefilter kept unservable bidder {winner}")))?;
        payments[winner] = payment;
        return Ok(Outcome {
            allocation,
            payments,
            branch: Branch::SecondPrice,
            price: 0.0,
            candidates: Vec::new(),
            removed_pre,
            tape: tape.clone(),
        });
    }

    let (stat, fixed): (Vec<usize>, Vec<usize>) =
        survivors.iter().partition(|&&i| tape.group_coins[i]);
    let base = stat.iter().map(|&i| bids[i]).fold(0.0, f64::max);
    let price = sample_price(base, n, tape.price_exponent)?;
    let candidates: Vec<usize> = fixed.into_iter().filter(|&i| bids[i] >= price).collect();
    let allocation = packer.pack(&candidates, instance)?;
    for winner in allocation.winners() {
        if candidates.binary_search(&winner).is_err() {
            return Err(Error::invalid(format!(
                "packer {} selected non-candidate {winner}",
                packer.name()
            )));
        }
        payments[winner] = price;
    }
    Ok(Outcome {
        allocation,
        payments,
        branch: Branch::PostedPrice,
        price,
        candidates,
        removed_pre,
        tape: tape.clone(),
    })
}

/// Quasi-linear utility: value minus payment for winners, 0 otherwise.
pub fn utility(outcome: &Outcome, values: &[f64]) -> Vec<f64> {
    (0..values.len())
        .map(|i| {
            if outcome.allocation.is_winner(i) {
                values[i] - outcome.payments[i]
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConflictGraph, Environment, Link, PhysicalParams, Point, PowerScheme};
    use crate::packing::{GreedyConflictPacking, PowerControlPacking};

    fn spread(n: usize, env: Environment) -> Instance {
        let links = (0..n)
            .map(|i| {
                Link::new(
                    i,
                    Point(100.0 * i as f64, 0.0),
                    Point(100.0 * i as f64, 1.0),
                )
            })
            .collect();
        Instance::new(links, 1, PhysicalParams::new(2.0, 1.0, 1.0).unwrap(), env).unwrap()
    }

    fn tape(secprice: bool, coins: Vec<bool>, exponent: u32) -> RandomTape {
        RandomTape {
            seed: 0,
            secprice,
            group_coins: coins,
            price_exponent: exponent,
        }
    }

    #[test]
    fn vickrey_examples() {
        assert_eq!(vickrey(&[5.0, 3.0, 2.0]).unwrap(), (0, 3.0));
        assert_eq!(vickrey(&[4.0, 4.0]).unwrap(), (0, 4.0));
        assert_eq!(vickrey(&[7.0]).unwrap(), (0, 0.0));
        assert_eq!(vickrey(&[1.0, 9.0, 9.0]).unwrap(), (1, 9.0));
        assert!(vickrey(&[]).is_err());
    }

    #[test]
    fn price_ladder() {
        assert_eq!(sample_price(8.0, 4, 3).unwrap(), 1.0);
        assert_eq!(sample_price(8.0, 4, 0).unwrap(), 8.0);
        assert_eq!(sample_price(8.0, 1, 1).unwrap(), 4.0);
        assert!(sample_price(8.0, 1, 2).is_err());
        assert!(sample_price(8.0, 4, 4).is_err());
    }

    #[test]
    fn second_price_branch() {
        let inst = spread(2, Environment::ConflictGraph(ConflictGraph::new(vec![])));
        let bids = BidProfile::new(vec![5.0, 3.0]).unwrap();
        let out = run_mechanism(
            &inst,
            &bids,
            0.1,
            &GreedyConflictPacking,
            &tape(true, vec![false; 2], 0),
        )
        .unwrap();
        assert_eq!(out.branch, Branch::SecondPrice);
        assert_eq!(out.allocation.channels, vec![vec![0]]);
        assert_eq!(out.payments, vec![3.0, 0.0]);
        assert_eq!(out.price, 0.0);
    }

    #[test]
    fn posted_price_trace() {
        // Bidder 0 is in the statistics group with bid 8; X = 3 gives p = 1.
        let inst = spread(3, Environment::SinrPowerControl);
        let bids = BidProfile::new(vec![8.0, 2.0, 0.5]).unwrap();
        let t = tape(false, vec![true, false, false], 3);
        let out = run_mechanism(&inst, &bids, 0.1, &PowerControlPacking, &t).unwrap();
        assert_eq!(out.price, 1.0);
        assert_eq!(out.candidates, vec![1]);
        assert_eq!(out.allocation.winners(), vec![1]);
        assert_eq!(out.payments, vec![0.0, 1.0, 0.0]);
        let u = utility(&out, &bids);
        assert_eq!(u, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn empty_statistics_group_prices_at_zero() {
        let inst = spread(2, Environment::SinrPowerControl);
        let bids = BidProfile::new(vec![1.0, 0.0]).unwrap();
        let out = run_mechanism(
            &inst,
            &bids,
            0.1,
            &PowerControlPacking,
            &tape(false, vec![false; 2], 1),
        )
        .unwrap();
        assert_eq!(out.price, 0.0);
        assert_eq!(out.candidates, vec![0, 1]);
        assert_eq!(out.revenue(), 0.0);
    }

    #[test]
    fn bid_equal_to_price_is_candidate() {
        let inst = spread(2, Environment::SinrPowerControl);
        let bids = BidProfile::new(vec![4.0, 2.0]).unwrap();
        let out = run_mechanism(
            &inst,
            &bids,
            0.1,
            &PowerControlPacking,
            &tape(false, vec![true, false], 1),
        )
        .unwrap();
        assert_eq!(out.price, 2.0);
        assert_eq!(out.candidates, vec![1]);
    }

    #[test]
    fn prefilter_drops_noisy_fixed_power_links() {
        // Uniform power 2, unit length; noise 4 puts bidder 1's solo SINR at 0.5.
        let links = vec![
            Link::new(0, Point(0.0, 0.0), Point(1.0, 0.0)),
            Link::new(1, Point(50.0, 0.0), Point(52.0, 0.0)),
        ];
        let inst = Instance::new(
            links,
            1,
            PhysicalParams::new(2.0, 1.0, 0.5).unwrap(),
            Environment::SinrFixedPower {
                scheme: PowerScheme::Uniform,
                base_power: 1.0,
            },
        )
        .unwrap();
        assert_eq!(prefilter(&inst).unwrap(), vec![0]);
        let pc = spread(4, Environment::SinrPowerControl);
        assert_eq!(prefilter(&pc).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn utility_of_overbidding_winner_is_negative() {
        let inst = spread(2, Environment::SinrPowerControl);
        let bids = BidProfile::new(vec![4.0, 5.0]).unwrap();
        let out = run_mechanism(
            &inst,
            &bids,
            0.1,
            &PowerControlPacking,
            &tape(false, vec![true, false], 0),
        )
        .unwrap();
        assert_eq!(out.payments[1], 4.0);
        assert_eq!(utility(&out, &[4.0, 3.0])[1], -1.0);
    }

    #[test]
    fn input_errors() {
        let inst = spread(2, Environment::SinrPowerControl);
        let bids = BidProfile::new(vec![1.0, 1.0]).unwrap();
        let t = tape(false, vec![false; 2], 0);
        assert!(run_mechanism(&inst, &bids, 0.0, &PowerControlPacking, &t).is_err());
        assert!(run_mechanism(&inst, &bids, 0.1, &GreedyConflictPacking, &t).is_err());
        assert!(run_mechanism(
            &inst,
            &bids,
            0.1,
            &PowerControlPacking,
            &tape(false, vec![false; 3], 0)
        )
        .is_err());
        assert!(BidProfile::new(vec![-1.0]).is_err());
        assert!(BidProfile::new(vec![f64::NAN]).is_err());
    }
}
