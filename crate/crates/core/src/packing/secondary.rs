use std::collections::BTreeMap;

use crate::error::Result;
use crate::model::{Allocation, EdgeRef, EnvironmentKind, Instance};
use crate::packing::{normalize_candidates, Packer, Psi};

/// Serves bidders in ascending id. Each gets the fewest-hop path that can be
/// labeled without clashing with edges already committed on the same channel;
/// bidders without such a path are skipped.
pub fn secondary_network_greedy(candidates: &[usize], instance: &Instance) -> Result<Allocation> {
    instance.require(
        "secondary_network_greedy",
        EnvironmentKind::SecondaryNetwork,
    )?;
    let network = instance.secondary().expect("checked above");
    let k = instance.channels();
    let mut committed = vec![vec![false; network.total_edges()]; k];
    let mut alloc = Allocation::empty(k);
    let mut paths = BTreeMap::new();
    for bidder in normalize_candidates(instance, candidates)? {
        let Some(hops) = network.greedy_labeled_path(bidder, k, &committed) else {
            continue;
        };
        for hop in &hops {
            committed[hop.channel][network.global(EdgeRef(bidder, hop.edge))] = true;
        }
        alloc.channels[hops[0].channel].push(bidder);
        paths.insert(bidder, hops);
    }
    alloc.paths = Some(paths);
    Ok(alloc)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SecondaryNetworkGreedy;

impl Packer for SecondaryNetworkGreedy {
    fn name(&self) -> String {
        "secondary".into()
    }

    fn psi(&self) -> Psi {
        Psi::Unknown
    }

    fn supports(&self, kind: EnvironmentKind) -> bool {
        kind == EnvironmentKind::SecondaryNetwork
    }

    fn pack(&self, candidates: &[usize], instance: &Instance) -> Result<Allocation> {
        secondary_network_greedy(candidates, instance)
    }
}
