use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::generate::derive_seed;
use crate::harness::stats::Summary;
use crate::mechanism::{ceil_log2, prefilter, run_with_survivors, BidProfile, Branch, RandomTape};
use crate::model::{check_feasible, Instance, DEFAULT_TOLERANCE};
use crate::oracle::{brute_force_max_cardinality, brute_force_max_welfare, OracleLimits};
use crate::packing::{Memoized, Packer};

/// Standard errors allowed below a Monte Carlo bound.
pub const CONFIDENCE_Z: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelfareConfig {
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    /// Compute the optimum with the exact oracle.
    pub oracle: bool,
}

/// One mechanism run, enough to replay it from `tape_seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub tape_seed: u64,
    pub branch: Branch,
    pub price: f64,
    pub winners: usize,
    pub welfare: f64,
    pub revenue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelfareStats {
    pub packer: String,
    pub bidders: usize,
    pub epsilon: f64,
    pub welfare: Summary,
    pub revenue: Summary,
    pub optimum: Option<f64>,
    /// Mean welfare over the optimum.
    pub ratio: Option<f64>,
    pub psi: Option<f64>,
    /// Guaranteed fraction of the optimum, when `ψ` is known.
    pub floor_factor: Option<f64>,
    /// `floor_factor · optimum`.
    pub floor: Option<f64>,
    pub revenue_above_welfare: usize,
    pub infeasible_outcomes: usize,
}

impl WelfareStats {
    /// Whether the mean clears the floor within [`CONFIDENCE_Z`] standard
    /// errors. `None` when no floor is available.
    pub fn meets_floor(&self) -> Option<bool> {
        self.floor
            .map(|f| self.welfare.mean >= f - CONFIDENCE_Z * self.welfare.std_error)
    }

    pub fn passed(&self) -> bool {
        self.revenue_above_welfare == 0
            && self.infeasible_outcomes == 0
            && self.meets_floor() != Some(false)
    }
}

/// Fraction of the optimal welfare the mechanism guarantees in expectation:
/// `(1−ε)²·ε·ψ / (8·(⌈log₂ n⌉ + 2))`.
pub fn welfare_floor_factor(epsilon: f64, psi: f64, n: usize) -> f64 {
    (1.0 - epsilon).powi(2) * epsilon * psi / (8.0 * (f64::from(ceil_log2(n)) + 2.0))
}

/// Runs the mechanism with truthful bids on `trials` tapes derived from
/// `seed`. Trials run in parallel; results are reduced in trial order.
pub fn welfare_experiment(
    instance: &Instance,
    values: &[f64],
    packer: &dyn Packer,
    config: &WelfareConfig,
) -> Result<(WelfareStats, Vec<TrialRecord>)> {
    if config.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let n = instance.num_bidders();
    let bids = BidProfile::new(values.to_vec())?;
    let survivors = prefilter(instance)?;
    let cached = Memoized::new(packer, instance);

    let trials: Vec<(TrialRecord, bool)> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let tape_seed = derive_seed(config.seed, trial as u64);
            let tape = RandomTape::from_seed(tape_seed, n, config.epsilon)?;
            let outcome =
                run_with_survivors(instance, &bids, config.epsilon, &cached, &tape, &survivors)?;
            let feasible =
                check_feasible(instance, &outcome.allocation, DEFAULT_TOLERANCE)?.is_feasible();
            let record = TrialRecord {
                trial,
                tape_seed,
                branch: outcome.branch,
                price: outcome.price,
                winners: outcome.allocation.num_winners(),
                welfare: outcome.welfare(values),
                revenue: outcome.revenue(),
            };
            Ok((record, feasible))
        })
        .collect::<Result<_>>()?;

    let welfare: Vec<f64> = trials.iter().map(|(r, _)| r.welfare).collect();
    let revenue: Vec<f64> = trials.iter().map(|(r, _)| r.revenue).collect();
    let optimum = if config.oracle {
        Some(brute_force_max_welfare(instance, values, OracleLimits::default())?.best_value)
    } else {
        None
    };
    let welfare = Summary::of(&welfare);
    let psi = packer.psi().value();
    let floor_factor = psi.map(|psi| welfare_floor_factor(config.epsilon, psi, n));
    let stats = WelfareStats {
        packer: packer.name(),
        bidders: n,
        epsilon: config.epsilon,
        welfare,
        revenue: Summary::of(&revenue),
        optimum,
        ratio: optimum.map(|opt| if opt > 0.0 { welfare.mean / opt } else { 1.0 }),
        psi,
        floor_factor,
        floor: floor_factor.zip(optimum).map(|(f, opt)| f * opt),
        revenue_above_welfare: trials.iter().filter(|(r, _)| r.revenue > r.welfare).count(),
        infeasible_outcomes: trials.iter().filter(|(_, ok)| !ok).count(),
    };
    Ok((stats, trials.into_iter().map(|(r, _)| r).collect()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiRow {
    pub index: usize,
    pub environment: String,
    pub bidders: usize,
    pub channels: usize,
    pub packed: usize,
    pub optimum: usize,
    pub ratio: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiTable {
    pub packer: String,
    pub advertised: Option<f64>,
    pub rows: Vec<PsiRow>,
    pub min_ratio: f64,
    pub mean_ratio: f64,
}

impl PsiTable {
    /// Every output is feasible and, when `ψ` is advertised, no ratio falls
    /// below it.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.feasible)
            && self
                .advertised
                .is_none_or(|psi| self.rows.iter().all(|r| r.ratio >= psi - 1e-12))
    }
}

/// Packer size over the exact maximum winner count, with every bidder as a
/// candidate. An empty optimum counts as ratio 1.
pub fn measure_psi(
    packer: &dyn Packer,
    instances: &[Instance],
    limits: OracleLimits,
) -> Result<PsiTable> {
    let rows: Vec<PsiRow> = instances
        .par_iter()
        .enumerate()
        .map(|(index, instance)| {
            let all: Vec<usize> = instance.bidders().collect();
            let alloc = packer.pack(&all, instance)?;
            let feasible = check_feasible(instance, &alloc, DEFAULT_TOLERANCE)?.is_feasible();
            let optimum = brute_force_max_cardinality(instance, &all, limits)?.best_value as usize;
            let packed = alloc.num_winners();
            Ok(PsiRow {
                index,
                environment: instance.kind().name().to_string(),
                bidders: instance.num_bidders(),
                channels: instance.channels(),
                packed,
                optimum,
                ratio: if optimum == 0 {
                    1.0
                } else {
                    packed as f64 / optimum as f64
                },
                feasible,
            })
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    Ok(PsiTable {
        packer: packer.name(),
        advertised: packer.psi().value(),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        mean_ratio: Summary::of(&ratios).mean,
        rows,
    })
}
