use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::sinr::sinr_with;
use crate::model::{meets_threshold, Allocation, EdgeRef, Environment, Instance};

/// Absolute slack allowed below the SINR threshold.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// One violated constraint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Violation {
    DuplicateWinner {
        bidder: usize,
    },
    Sinr {
        channel: usize,
        link: usize,
        sinr: f64,
        beta: f64,
    },
    Conflict {
        channel: usize,
        a: usize,
        b: usize,
    },
    BrokenPath {
        bidder: usize,
        reason: String,
    },
    HopChannelOutOfRange {
        bidder: usize,
        channel: usize,
    },
    EdgeConflict {
        channel: usize,
        a: EdgeRef,
        b: EdgeRef,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every constraint of `allocation` in `instance`'s environment and
/// reports all violations.
pub fn check_feasible(
    instance: &Instance,
    allocation: &Allocation,
    tolerance: f64,
) -> Result<FeasibilityReport> {
    if allocation.channels.len() != instance.channels() {
        return Err(Error::invalid(format!(
            "allocation has {} channel sets, instance has {} channels",
            allocation.channels.len(),
            instance.channels()
        )));
    }
    let mut violations = Vec::new();
    let mut seen = HashMap::new();
    for set in &allocation.channels {
        for &bidder in set {
            instance.check_bidder(bidder)?;
            *seen.entry(bidder).or_insert(0usize) += 1;
        }
    }
    let mut duplicates: Vec<_> = seen
        .iter()
        .filter(|(_, &c)| c > 1)
        .map(|(&b, _)| b)
        .collect();
    duplicates.sort_unstable();
    violations.extend(
        duplicates
            .into_iter()
            .map(|bidder| Violation::DuplicateWinner { bidder }),
    );

    let beta = instance.params().beta;
    match instance.environment() {
        Environment::SinrPowerControl => {
            let powers = allocation
                .powers
                .as_ref()
                .ok_or_else(|| Error::invalid("power-control allocation carries no powers"))?;
            for winner in allocation.winners() {
                match powers.get(&winner) {
                    Some(&p) if p > 0.0 && p.is_finite() => {}
                    _ => {
                        return Err(Error::invalid(format!(
                            "winner {winner} has no positive power"
                        )))
                    }
                }
            }
            for (channel, set) in allocation.channels.iter().enumerate() {
                for &link in set {
                    let sinr = sinr_with(instance, link, set, |j| powers[&j]);
                    if !meets_threshold(sinr, beta, tolerance) {
                        violations.push(Violation::Sinr {
                            channel,
                            link,
                            sinr,
                            beta,
                        });
                    }
                }
            }
        }
        Environment::SinrFixedPower { .. } => {
            for (channel, set) in allocation.channels.iter().enumerate() {
                for &link in set {
                    let sinr = sinr_with(instance, link, set, |j| {
                        instance.fixed_power(j).expect("fixed-power environment")
                    });
                    if !meets_threshold(sinr, beta, tolerance) {
                        violations.push(Violation::Sinr {
                            channel,
                            link,
                            sinr,
                            beta,
                        });
                    }
                }
            }
        }
        Environment::ConflictGraph(graph) => {
            for (channel, set) in allocation.channels.iter().enumerate() {
                for (x, &a) in set.iter().enumerate() {
                    for &b in &set[x + 1..] {
                        if graph.adjacent(a, b) {
                            violations.push(Violation::Conflict { channel, a, b });
                        }
                    }
                }
            }
        }
        Environment::SecondaryNetwork(network) => {
            let empty = BTreeMap::new();
            let paths = match &allocation.paths {
                Some(paths) => paths,
                None if allocation.is_empty() => &empty,
                None => {
                    return Err(Error::invalid(
                        "secondary-network allocation carries no paths",
                    ))
                }
            };
            let mut used: Vec<(EdgeRef, usize)> = Vec::new();
            for bidder in allocation.winners() {
                let Some(hops) = paths.get(&bidder) else {
                    violations.push(Violation::BrokenPath {
                        bidder,
                        reason: "no path".into(),
                    });
                    continue;
                };
                if let Err(reason) = network.validate_path(bidder, hops) {
                    violations.push(Violation::BrokenPath { bidder, reason });
                    continue;
                }
                for hop in hops {
                    if hop.channel >= instance.channels() {
                        violations.push(Violation::HopChannelOutOfRange {
                            bidder,
                            channel: hop.channel,
                        });
                    } else {
                        used.push((EdgeRef(bidder, hop.edge), hop.channel));
                    }
                }
            }
            for (x, &(a, ca)) in used.iter().enumerate() {
                for &(b, cb) in &used[x + 1..] {
                    if ca == cb && network.conflicting(a, b) {
                        violations.push(Violation::EdgeConflict { channel: ca, a, b });
                    }
                }
            }
        }
    }
    Ok(FeasibilityReport { violations })
}

/// Removes `removed` (with its power or path) from a feasible allocation and
/// re-checks feasibility. In a downward-closed environment this is always true.
pub fn downward_closure_probe(
    instance: &Instance,
    allocation: &Allocation,
    removed: usize,
) -> Result<bool> {
    let smaller = allocation.without(removed)?;
    Ok(check_feasible(instance, &smaller, DEFAULT_TOLERANCE)?.is_feasible())
}
