use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::generate::derive_seed;
use crate::mechanism::{
    max_price_exponent, prefilter, run_with_survivors, utility, BidProfile, RandomTape,
};
use crate::model::Instance;
use crate::packing::Packer;

/// Minimum number of deviations tried per bidder and tape.
pub const MIN_DEVIATIONS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub epsilon: f64,
    pub tapes: usize,
    pub deviations: usize,
    pub seed: u64,
}

/// One truthful-versus-deviant comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub tape_seed: u64,
    pub bidder: usize,
    pub deviation: f64,
    pub truthful_utility: f64,
    pub deviant_utility: f64,
}

impl AuditEntry {
    pub fn gain(&self) -> f64 {
        self.deviant_utility - self.truthful_utility
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    /// Entries where lying strictly paid off.
    pub violations: Vec<AuditEntry>,
    pub max_violation: f64,
}

impl AuditReport {
    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: AuditReport) {
        self.entries.extend(other.entries);
        self.violations.extend(other.violations);
        self.max_violation = self.max_violation.max(other.max_violation);
    }
}

/// Bids to try in place of the true value `value`.
///
/// Always contains 0, `value/2`, `2·value`, the realized price `p ± 10⁻⁶·B`,
/// every ladder price `2^(−x)·B ± δ`, and the highest competing bid `± δ`;
/// padded with multiples of a scale to at least `count` distinct values.
pub fn deviation_grid(
    value: f64,
    price: f64,
    base: f64,
    rival: f64,
    n: usize,
    count: usize,
) -> Vec<f64> {
    let step = 1e-6 * base.max(1.0);
    let mut grid = vec![
        0.0,
        value / 2.0,
        2.0 * value,
        value / 4.0,
        4.0 * value,
        value + step,
        (value - step).max(0.0),
    ];
    for anchor in std::iter::once(price)
        .chain((0..=max_price_exponent(n)).map(|x| base * 2f64.powi(-(x as i32))))
        .chain(std::iter::once(rival))
    {
        grid.extend([anchor, anchor + step, (anchor - step).max(0.0)]);
    }
    let scale = value.max(base).max(1.0);
    let mut j = 1;
    loop {
        grid.retain(|b| b.is_finite() && *b != value);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        if grid.len() >= count {
            return grid;
        }
        grid.push(scale * j as f64 / 8.0);
        j += 1;
    }
}

/// Replays the mechanism on `config.tapes` tapes, and for every bidder
/// compares truthful utility against each bid in [`deviation_grid`] on the
/// same tape.
pub fn audit_truthfulness(
    instance: &Instance,
    values: &[f64],
    packer: &dyn Packer,
    config: &AuditConfig,
) -> Result<AuditReport> {
    if config.tapes == 0 {
        return Err(Error::invalid("audit needs at least one tape"));
    }
    let n = instance.num_bidders();
    let truthful = BidProfile::new(values.to_vec())?;
    if truthful.len() != n {
        return Err(Error::invalid(format!(
            "{} values for {n} bidders",
            values.len()
        )));
    }
    let survivors = prefilter(instance)?;
    let count = config.deviations.max(MIN_DEVIATIONS);
    let mut report = AuditReport::default();

    for t in 0..config.tapes {
        let tape_seed = derive_seed(config.seed, t as u64);
        let tape = RandomTape::from_seed(tape_seed, n, config.epsilon)?;
        let honest = run_with_survivors(
            instance,
            &truthful,
            config.epsilon,
            packer,
            &tape,
            &survivors,
        )?;
        let honest_utility = utility(&honest, values);
        let base = survivors
            .iter()
            .filter(|&&i| tape.group_coins[i])
            .map(|&i| values[i])
            .fold(0.0, f64::max);
        for bidder in 0..n {
            let rival = (0..n)
                .filter(|&j| j != bidder)
                .map(|j| values[j])
                .fold(0.0, f64::max);
            for deviation in deviation_grid(values[bidder], honest.price, base, rival, n, count) {
                let bids = truthful.with_bid(bidder, deviation)?;
                let lied =
                    run_with_survivors(instance, &bids, config.epsilon, packer, &tape, &survivors)?;
                let entry = AuditEntry {
                    tape_seed,
                    bidder,
                    deviation,
                    truthful_utility: honest_utility[bidder],
                    deviant_utility: utility(&lied, values)[bidder],
                };
                if entry.gain() > 0.0 {
                    report.max_violation = report.max_violation.max(entry.gain());
                    report.violations.push(entry.clone());
                }
                report.entries.push(entry);
            }
        }
    }
    Ok(report)
}
