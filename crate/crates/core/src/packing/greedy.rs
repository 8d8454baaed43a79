use crate::error::Result;
use crate::model::sinr::sinr_with;
use crate::model::{
    meets_threshold, Allocation, EnvironmentKind, Instance, PowerMap, DEFAULT_TOLERANCE,
};
use crate::packing::{normalize_candidates, Packer, Psi};

/// First-fit over bidders in ascending id: each goes to the lowest channel on
/// which it has no conflict-graph neighbor.
pub fn greedy_conflict_packing(candidates: &[usize], instance: &Instance) -> Result<Allocation> {
    instance.require("greedy_conflict_packing", EnvironmentKind::ConflictGraph)?;
    let graph = instance.conflict_graph().expect("checked above");
    let order = normalize_candidates(instance, candidates)?;
    let mut alloc = Allocation::empty(instance.channels());
    for bidder in order {
        if let Some(set) = alloc
            .channels
            .iter_mut()
            .find(|set| set.iter().all(|&other| !graph.adjacent(bidder, other)))
        {
            set.push(bidder);
        }
    }
    Ok(alloc)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyConflictPacking;

impl Packer for GreedyConflictPacking {
    fn name(&self) -> String {
        "conflict".into()
    }

    fn psi(&self) -> Psi {
        Psi::Unknown
    }

    fn supports(&self, kind: EnvironmentKind) -> bool {
        kind == EnvironmentKind::ConflictGraph
    }

    fn pack(&self, candidates: &[usize], instance: &Instance) -> Result<Allocation> {
        greedy_conflict_packing(candidates, instance)
    }
}

/// First-fit under a fixed power scheme, shortest link first. Links that
/// cannot meet the threshold even alone are dropped up front. A link joins the
/// lowest channel on which it and every link already there still meet the
/// SINR threshold.
pub fn fixed_power_greedy(candidates: &[usize], instance: &Instance) -> Result<Allocation> {
    instance.require("fixed_power_greedy", EnvironmentKind::SinrFixedPower)?;
    let power = |j: usize| instance.fixed_power(j).expect("checked above");
    let beta = instance.params().beta;
    let feasible = |set: &[usize]| {
        set.iter()
            .all(|&l| meets_threshold(sinr_with(instance, l, set, power), beta, DEFAULT_TOLERANCE))
    };

    let mut order: Vec<usize> = normalize_candidates(instance, candidates)?
        .into_iter()
        .filter(|&l| feasible(&[l]))
        .collect();
    order.sort_by(|&a, &b| {
        instance
            .length(a)
            .total_cmp(&instance.length(b))
            .then(a.cmp(&b))
    });

    let mut alloc = Allocation::empty(instance.channels());
    for link in order {
        for set in alloc.channels.iter_mut() {
            set.push(link);
            if feasible(set) {
                break;
            }
            set.pop();
        }
    }
    let mut powers = PowerMap::new();
    for set in &mut alloc.channels {
        set.sort_unstable();
        powers.extend(set.iter().map(|&l| (l, power(l))));
    }
    alloc.powers = Some(powers);
    Ok(alloc)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FixedPowerGreedy;

impl Packer for FixedPowerGreedy {
    fn name(&self) -> String {
        "fixed-power".into()
    }

    fn psi(&self) -> Psi {
        Psi::Unknown
    }

    fn supports(&self, kind: EnvironmentKind) -> bool {
        kind == EnvironmentKind::SinrFixedPower
    }

    fn pack(&self, candidates: &[usize], instance: &Instance) -> Result<Allocation> {
        fixed_power_greedy(candidates, instance)
    }
}
