use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transmit powers keyed by link id.
pub type PowerMap = BTreeMap<usize, f64>;

/// One edge of a winner's path in its own network, with the channel it uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathHop {
    /// Index into the bidder's edge list.
    pub edge: usize,
    pub channel: usize,
}

/// Per-channel winner sets, plus powers (SINR modes) or paths (secondary networks).
///
/// Each winner is listed on exactly one channel. In the secondary-network
/// setting a winner's hops may use several channels; the winner is then
/// listed on the channel of its first hop.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub channels: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powers: Option<PowerMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<BTreeMap<usize, Vec<PathHop>>>,
}

impl Allocation {
    pub fn empty(channels: usize) -> Self {
        Allocation {
            channels: vec![Vec::new(); channels],
            powers: None,
            paths: None,
        }
    }

    /// All winners in ascending id order.
    pub fn winners(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.channels.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    pub fn num_winners(&self) -> usize {
        self.channels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.num_winners() == 0
    }

    pub fn is_winner(&self, bidder: usize) -> bool {
        self.channel_of(bidder).is_some()
    }

    pub fn channel_of(&self, bidder: usize) -> Option<usize> {
        self.channels.iter().position(|set| set.contains(&bidder))
    }

    /// Sum of `values` over winners.
    pub fn welfare(&self, values: &[f64]) -> f64 {
        self.winners().iter().map(|&i| values[i]).sum()
    }

    /// The allocation with `bidder` removed along with its power and path.
    pub fn without(&self, bidder: usize) -> Result<Allocation> {
        if !self.is_winner(bidder) {
            return Err(Error::invalid(format!("bidder {bidder} is not a winner")));
        }
        let mut copy = self.clone();
        for set in &mut copy.channels {
            set.retain(|&b| b != bidder);
        }
        if let Some(powers) = &mut copy.powers {
            powers.remove(&bidder);
        }
        if let Some(paths) = &mut copy.paths {
            paths.remove(&bidder);
        }
        Ok(copy)
    }

    /// Relabels channel `c` as `perm[c]`, including path hops.
    pub fn permute_channels(&self, perm: &[usize]) -> Allocation {
        let mut channels = vec![Vec::new(); self.channels.len()];
        for (c, set) in self.channels.iter().enumerate() {
            channels[perm[c]] = set.clone();
        }
        let paths = self.paths.as_ref().map(|paths| {
            paths
                .iter()
                .map(|(&bidder, hops)| {
                    let hops = hops
                        .iter()
                        .map(|hop| PathHop {
                            edge: hop.edge,
                            channel: perm.get(hop.channel).copied().unwrap_or(hop.channel),
                        })
                        .collect();
                    (bidder, hops)
                })
                .collect()
        });
        Allocation {
            channels,
            powers: self.powers.clone(),
            paths,
        }
    }
}
