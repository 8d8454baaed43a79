//! Exponential-time exact solvers for small instances.
//!
//! Subsets are explored depth-first over bidders in ascending id, including
//! before excluding, with a branch-and-bound cut on the remaining positive
//! weight. A bidder is only added when the enlarged set is feasible; since
//! every environment is downward closed, an infeasible set has no feasible
//! superset. Feasibility of a set is decided exactly by enumerating channel
//! labelings in canonical form (channel `c` is used only after `c − 1`).
//! Among optimal sets the lexicographically smallest is returned.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::sinr::sinr_with;
use crate::model::{
    meets_threshold, Allocation, EdgeRef, Environment, EnvironmentKind, Instance, PathHop,
    PowerMap, DEFAULT_TOLERANCE,
};
use crate::packing::{normalize_candidates, Packer, Psi};
use crate::power::solve_power_assignment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_bidders: usize,
    pub max_channels: usize,
    /// Cap on simple paths enumerated per bidder network.
    pub max_paths: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_bidders: 14,
            max_channels: 3,
            max_paths: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_value: f64,
    pub witness: Allocation,
    /// Candidate sets whose feasibility was decided.
    pub explored: u64,
}

/// Maximum total bid over feasible winner sets.
pub fn brute_force_max_welfare(
    instance: &Instance,
    bids: &[f64],
    limits: OracleLimits,
) -> Result<OracleResult> {
    if bids.len() != instance.num_bidders() {
        return Err(Error::invalid(format!(
            "{} bids for {} bidders",
            bids.len(),
            instance.num_bidders()
        )));
    }
    if let Some(bad) = bids.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(Error::invalid(format!(
            "bids must be finite and nonnegative, got {bad}"
        )));
    }
    let members: Vec<usize> = instance.bidders().collect();
    let weights: Vec<f64> = members.iter().map(|&i| bids[i]).collect();
    solve(instance, members, weights, limits)
}

/// Maximum number of bidders from `candidates` that can win simultaneously.
pub fn brute_force_max_cardinality(
    instance: &Instance,
    candidates: &[usize],
    limits: OracleLimits,
) -> Result<OracleResult> {
    let members = normalize_candidates(instance, candidates)?;
    let weights = vec![1.0; members.len()];
    solve(instance, members, weights, limits)
}

/// An allocation serving exactly `set`, if one exists.
pub fn feasible_assignment(
    instance: &Instance,
    set: &[usize],
    limits: OracleLimits,
) -> Result<Option<Allocation>> {
    let members = normalize_candidates(instance, set)?;
    check_limits(instance, members.len(), limits)?;
    let full = if members.is_empty() {
        0
    } else {
        u64::MAX >> (64 - members.len())
    };
    let mut search = Search::new(instance, members, limits)?;
    Ok(search.feasible(full).map(|w| search.to_allocation(&w)))
}

fn check_limits(instance: &Instance, size: usize, limits: OracleLimits) -> Result<()> {
    let max_bidders = limits.max_bidders.min(63);
    if size > max_bidders {
        return Err(Error::LimitExceeded {
            what: "bidder count",
            actual: size,
            limit: max_bidders,
        });
    }
    if instance.channels() > limits.max_channels {
        return Err(Error::LimitExceeded {
            what: "channel count",
            actual: instance.channels(),
            limit: limits.max_channels,
        });
    }
    Ok(())
}

fn solve(
    instance: &Instance,
    members: Vec<usize>,
    weights: Vec<f64>,
    limits: OracleLimits,
) -> Result<OracleResult> {
    check_limits(instance, members.len(), limits)?;
    let m = members.len();
    let mut suffix = vec![0.0; m + 1];
    for pos in (0..m).rev() {
        suffix[pos] = suffix[pos + 1] + weights[pos].max(0.0);
    }
    let mut search = Search::new(instance, members, limits)?;
    let mut best = Best {
        value: 0.0,
        mask: 0,
        witness: Witness::empty(instance.channels()),
    };
    let root = Witness::empty(instance.channels());
    search.branch(0, 0, 0.0, root, &weights, &suffix, &mut best);
    let witness = search.to_allocation(&best.witness);
    Ok(OracleResult {
        best_value: best.value,
        witness,
        explored: search.explored,
    })
}

struct Best {
    value: f64,
    mask: u64,
    witness: Witness,
}

#[derive(Clone, Debug)]
enum Witness {
    /// Member mask per channel.
    Channels(Vec<u64>),
    /// Chosen path index per member in the set (ascending), and one label per
    /// edge of those paths in order.
    Paths {
        chosen: Vec<(usize, usize)>,
        labels: Vec<usize>,
    },
}

impl Witness {
    fn empty(channels: usize) -> Self {
        Witness::Channels(vec![0; channels])
    }
}

/// Lexicographic order on the ascending member lists encoded by two masks.
fn lex_less(a: u64, b: u64) -> bool {
    let (mut a, mut b) = (a, b);
    loop {
        match (a == 0, b == 0) {
            (true, true) => return false,
            (true, false) => return true,
            (false, true) => return false,
            _ => {}
        }
        let (ta, tb) = (a.trailing_zeros(), b.trailing_zeros());
        if ta != tb {
            return ta < tb;
        }
        a &= a - 1;
        b &= b - 1;
    }
}

struct Search<'a> {
    instance: &'a Instance,
    members: Vec<usize>,
    channel_cache: HashMap<u64, bool>,
    paths: Vec<Vec<Vec<usize>>>,
    explored: u64,
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, members: Vec<usize>, limits: OracleLimits) -> Result<Self> {
        let paths = match instance.secondary() {
            Some(network) => members
                .iter()
                .map(|&b| network.simple_paths(b, limits.max_paths))
                .collect::<Result<_>>()?,
            None => Vec::new(),
        };
        Ok(Search {
            instance,
            members,
            channel_cache: HashMap::new(),
            paths,
            explored: 0,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn branch(
        &mut self,
        pos: usize,
        mask: u64,
        value: f64,
        witness: Witness,
        weights: &[f64],
        suffix: &[f64],
        best: &mut Best,
    ) {
        if value > best.value || (value == best.value && lex_less(mask, best.mask)) {
            best.value = value;
            best.mask = mask;
            best.witness = witness.clone();
        }
        if pos == self.members.len() || value + suffix[pos] < best.value {
            return;
        }
        let grown = mask | (1 << pos);
        self.explored += 1;
        if let Some(next) = self.feasible(grown) {
            self.branch(
                pos + 1,
                grown,
                value + weights[pos],
                next,
                weights,
                suffix,
                best,
            );
        }
        self.branch(pos + 1, mask, value, witness, weights, suffix, best);
    }

    fn feasible(&mut self, mask: u64) -> Option<Witness> {
        let locals: Vec<usize> = (0..self.members.len())
            .filter(|&i| mask >> i & 1 == 1)
            .collect();
        if self.instance.kind() == EnvironmentKind::SecondaryNetwork {
            let mut chosen = Vec::with_capacity(locals.len());
            return self.choose_paths(&locals, &mut chosen, &mut Vec::new());
        }
        let mut channels = vec![0u64; self.instance.channels()];
        if self.label(&locals, 0, 0, &mut channels) {
            Some(Witness::Channels(channels))
        } else {
            None
        }
    }

    fn label(&mut self, locals: &[usize], at: usize, used: usize, channels: &mut Vec<u64>) -> bool {
        if at == locals.len() {
            return true;
        }
        let bit = 1u64 << locals[at];
        for c in 0..channels.len().min(used + 1) {
            let grown = channels[c] | bit;
            if !self.channel_feasible(grown) {
                continue;
            }
            channels[c] = grown;
            if self.label(locals, at + 1, used.max(c + 1), channels) {
                return true;
            }
            channels[c] &= !bit;
        }
        false
    }

    fn channel_feasible(&mut self, mask: u64) -> bool {
        if let Some(&hit) = self.channel_cache.get(&mask) {
            return hit;
        }
        let set: Vec<usize> = (0..self.members.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.members[i])
            .collect();
        let instance = self.instance;
        let beta = instance.params().beta;
        let ok = match instance.environment() {
            Environment::SinrPowerControl => solve_power_assignment(&set, instance)
                .map(|r| r.is_feasible())
                .unwrap_or(false),
            Environment::SinrFixedPower { .. } => set.iter().all(|&l| {
                let sinr = sinr_with(instance, l, &set, |j| {
                    instance.fixed_power(j).expect("fixed")
                });
                meets_threshold(sinr, beta, DEFAULT_TOLERANCE)
            }),
            Environment::ConflictGraph(graph) => set
                .iter()
                .enumerate()
                .all(|(x, &a)| set[x + 1..].iter().all(|&b| !graph.adjacent(a, b))),
            Environment::SecondaryNetwork(_) => unreachable!("handled by path search"),
        };
        self.channel_cache.insert(mask, ok);
        ok
    }

    fn choose_paths(
        &self,
        locals: &[usize],
        chosen: &mut Vec<(usize, usize)>,
        edges: &mut Vec<EdgeRef>,
    ) -> Option<Witness> {
        let network = self.instance.secondary().expect("secondary environment");
        let k = self.instance.channels();
        let at = chosen.len();
        if at == locals.len() {
            let labels = network.color_edges(edges, k)?;
            return Some(Witness::Paths {
                chosen: chosen.clone(),
                labels,
            });
        }
        let local = locals[at];
        let bidder = self.members[local];
        for (index, path) in self.paths[local].iter().enumerate() {
            let before = edges.len();
            edges.extend(path.iter().map(|&e| EdgeRef(bidder, e)));
            if network.color_edges(edges, k).is_some() {
                chosen.push((local, index));
                if let Some(found) = self.choose_paths(locals, chosen, edges) {
                    return Some(found);
                }
                chosen.pop();
            }
            edges.truncate(before);
        }
        None
    }

    fn to_allocation(&self, witness: &Witness) -> Allocation {
        let instance = self.instance;
        let k = instance.channels();
        let mut alloc = Allocation::empty(k);
        match witness {
            Witness::Channels(masks) => {
                for (c, &mask) in masks.iter().enumerate() {
                    alloc.channels[c] = (0..self.members.len())
                        .filter(|&i| mask >> i & 1 == 1)
                        .map(|i| self.members[i])
                        .collect();
                }
                match instance.kind() {
                    EnvironmentKind::SinrPowerControl => {
                        let mut powers = PowerMap::new();
                        for set in alloc.channels.iter().filter(|s| !s.is_empty()) {
                            let solved = solve_power_assignment(set, instance)
                                .expect("valid power-control set");
                            powers.extend(solved.powers().expect("feasible channel").clone());
                        }
                        alloc.powers = Some(powers);
                    }
                    EnvironmentKind::SinrFixedPower => {
                        alloc.powers = Some(
                            alloc
                                .winners()
                                .into_iter()
                                .map(|l| (l, instance.fixed_power(l).expect("fixed")))
                                .collect(),
                        );
                    }
                    EnvironmentKind::SecondaryNetwork => alloc.paths = Some(BTreeMap::new()),
                    EnvironmentKind::ConflictGraph => {}
                }
            }
            Witness::Paths { chosen, labels } => {
                let mut paths = BTreeMap::new();
                let mut next_label = labels.iter();
                for &(local, index) in chosen {
                    let bidder = self.members[local];
                    let hops: Vec<PathHop> = self.paths[local][index]
                        .iter()
                        .map(|&edge| PathHop {
                            edge,
                            channel: *next_label.next().expect("one label per edge"),
                        })
                        .collect();
                    alloc.channels[hops[0].channel].push(bidder);
                    paths.insert(bidder, hops);
                }
                alloc.paths = Some(paths);
            }
        }
        alloc
    }
}

/// The exact maximum-cardinality solver as a packer (`ψ = 1`).
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactPacking {
    pub limits: OracleLimits,
}

impl Packer for ExactPacking {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn psi(&self) -> Psi {
        Psi::Known(1.0)
    }

    fn supports(&self, _kind: EnvironmentKind) -> bool {
        true
    }

    fn pack(&self, candidates: &[usize], instance: &Instance) -> Result<Allocation> {
        Ok(brute_force_max_cardinality(instance, candidates, self.limits)?.witness)
    }
}
