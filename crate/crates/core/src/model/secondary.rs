//! Secondary networks: each bidder owns a directed graph over a shared node
//! universe and wins by receiving an `s_i`-`d_i` path whose edges carry
//! channel labels. Edges of all bidder graphs form the vertex set of a
//! global conflict graph `H`; two used edges adjacent in `H` may not share a
//! channel.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PathHop;

/// `(bidder, edge index in that bidder's network)`. Serializes as `[bidder, edge]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeRef(pub usize, pub usize);

/// One bidder's network `G_i`. Edges are directed `[from, to]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BidderNetwork {
    pub source: usize,
    pub destination: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondaryNetwork {
    pub node_count: usize,
    pub networks: Vec<BidderNetwork>,
    /// Edges of `H`, as unordered pairs.
    pub conflicts: Vec<[EdgeRef; 2]>,
    #[serde(skip)]
    offsets: Vec<usize>,
    #[serde(skip)]
    conflict_lists: Vec<Vec<usize>>,
}

impl SecondaryNetwork {
    pub fn new(
        node_count: usize,
        networks: Vec<BidderNetwork>,
        conflicts: Vec<[EdgeRef; 2]>,
    ) -> Self {
        SecondaryNetwork {
            node_count,
            networks,
            conflicts,
            offsets: Vec::new(),
            conflict_lists: Vec::new(),
        }
    }

    pub(crate) fn finalize(&mut self) -> Result<()> {
        if self.networks.is_empty() {
            return Err(Error::invalid(
                "secondary network needs at least one bidder",
            ));
        }
        let mut offsets = Vec::with_capacity(self.networks.len() + 1);
        let mut total = 0;
        for (bidder, net) in self.networks.iter().enumerate() {
            if net.source >= self.node_count || net.destination >= self.node_count {
                return Err(Error::invalid(format!(
                    "bidder {bidder}: source or destination outside 0..{}",
                    self.node_count
                )));
            }
            if net.source == net.destination {
                return Err(Error::invalid(format!(
                    "bidder {bidder}: source and destination coincide"
                )));
            }
            let mut seen = HashSet::new();
            for &[u, v] in &net.edges {
                if u >= self.node_count || v >= self.node_count || u == v {
                    return Err(Error::invalid(format!(
                        "bidder {bidder}: invalid edge ({u}, {v})"
                    )));
                }
                if !seen.insert((u, v)) {
                    return Err(Error::invalid(format!(
                        "bidder {bidder}: duplicate edge ({u}, {v})"
                    )));
                }
            }
            offsets.push(total);
            total += net.edges.len();
        }
        offsets.push(total);
        self.offsets = offsets;

        let mut lists = vec![Vec::new(); total];
        let mut seen = HashSet::new();
        for &[a, b] in &self.conflicts {
            let (ga, gb) = (self.checked_global(a)?, self.checked_global(b)?);
            if ga == gb {
                return Err(Error::invalid(format!(
                    "conflict graph has a self-loop on {a:?}"
                )));
            }
            if !seen.insert((ga.min(gb), ga.max(gb))) {
                return Err(Error::invalid(format!("duplicate conflict ({a:?}, {b:?})")));
            }
            lists[ga].push(gb);
            lists[gb].push(ga);
        }
        for list in &mut lists {
            list.sort_unstable();
        }
        self.conflict_lists = lists;
        Ok(())
    }

    fn checked_global(&self, edge: EdgeRef) -> Result<usize> {
        match self.networks.get(edge.0) {
            Some(net) if edge.1 < net.edges.len() => Ok(self.offsets[edge.0] + edge.1),
            _ => Err(Error::invalid(format!(
                "conflict references unknown edge {edge:?}"
            ))),
        }
    }

    /// Index of `edge` among all edges of all bidder networks.
    pub fn global(&self, edge: EdgeRef) -> usize {
        self.offsets[edge.0] + edge.1
    }

    pub fn total_edges(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn conflicting(&self, a: EdgeRef, b: EdgeRef) -> bool {
        self.conflict_lists[self.global(a)]
            .binary_search(&self.global(b))
            .is_ok()
    }

    /// Global indices of edges in conflict with `edge`.
    pub fn conflicts_of(&self, edge: EdgeRef) -> &[usize] {
        &self.conflict_lists[self.global(edge)]
    }

    /// Whether `bidder`'s network contains any source-destination path.
    pub fn has_path(&self, bidder: usize) -> bool {
        let net = &self.networks[bidder];
        let mut visited = vec![false; self.node_count];
        let mut queue = VecDeque::from([net.source]);
        visited[net.source] = true;
        while let Some(u) = queue.pop_front() {
            if u == net.destination {
                return true;
            }
            for &[from, to] in &net.edges {
                if from == u && !visited[to] {
                    visited[to] = true;
                    queue.push_back(to);
                }
            }
        }
        false
    }

    /// Checks that `hops` form a simple source-destination path in `bidder`'s network.
    pub fn validate_path(
        &self,
        bidder: usize,
        hops: &[PathHop],
    ) -> std::result::Result<(), String> {
        let net = &self.networks[bidder];
        if hops.is_empty() {
            return Err("empty path".into());
        }
        let mut at = net.source;
        let mut visited = HashSet::from([at]);
        for hop in hops {
            let Some(&[from, to]) = net.edges.get(hop.edge) else {
                return Err(format!("unknown edge {}", hop.edge));
            };
            if from != at {
                return Err(format!("edge {} starts at {from}, expected {at}", hop.edge));
            }
            if !visited.insert(to) {
                return Err(format!("path revisits node {to}"));
            }
            at = to;
        }
        if at != net.destination {
            return Err(format!("path ends at {at}, expected {}", net.destination));
        }
        Ok(())
    }

    /// All simple source-destination paths of `bidder` as edge-index lists,
    /// ordered by hop count and then lexicographically. Errors when more than
    /// `cap` paths exist.
    pub fn simple_paths(&self, bidder: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
        let net = &self.networks[bidder];
        let mut out = Vec::new();
        let mut on_path = vec![false; self.node_count];
        let mut stack = Vec::new();
        on_path[net.source] = true;
        self.collect_paths(net, net.source, &mut on_path, &mut stack, &mut out, cap)?;
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    fn collect_paths(
        &self,
        net: &BidderNetwork,
        at: usize,
        on_path: &mut [bool],
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if at == net.destination {
            if out.len() == cap {
                return Err(Error::LimitExceeded {
                    what: "simple path count",
                    actual: cap + 1,
                    limit: cap,
                });
            }
            out.push(stack.clone());
            return Ok(());
        }
        for (index, &[from, to]) in net.edges.iter().enumerate() {
            if from == at && !on_path[to] {
                on_path[to] = true;
                stack.push(index);
                self.collect_paths(net, to, on_path, stack, out, cap)?;
                stack.pop();
                on_path[to] = false;
            }
        }
        Ok(())
    }

    /// Fewest-hop path for `bidder` found by breadth-first search, labeling
    /// each hop with the lowest channel not blocked by `committed` (per
    /// channel, a mask over global edge indices) nor by earlier hops on the
    /// same path. Nodes are settled on first visit.
    pub fn greedy_labeled_path(
        &self,
        bidder: usize,
        channels: usize,
        committed: &[Vec<bool>],
    ) -> Option<Vec<PathHop>> {
        let net = &self.networks[bidder];
        let mut settled: Vec<Option<Vec<PathHop>>> = vec![None; self.node_count];
        settled[net.source] = Some(Vec::new());
        let mut queue = VecDeque::from([net.source]);
        while let Some(u) = queue.pop_front() {
            if u == net.destination {
                return settled[u].clone();
            }
            let prefix = settled[u].clone().unwrap_or_default();
            if prefix.len() >= self.node_count {
                continue;
            }
            for (index, &[from, to]) in net.edges.iter().enumerate() {
                if from != u || settled[to].is_some() {
                    continue;
                }
                let edge = EdgeRef(bidder, index);
                let blocked = |channel: usize| {
                    self.conflicts_of(edge)
                        .iter()
                        .any(|&g| committed[channel][g])
                        || prefix.iter().any(|hop| {
                            hop.channel == channel
                                && self.conflicting(EdgeRef(bidder, hop.edge), edge)
                        })
                };
                if let Some(channel) = (0..channels).find(|&c| !blocked(c)) {
                    let mut path = prefix.clone();
                    path.push(PathHop {
                        edge: index,
                        channel,
                    });
                    settled[to] = Some(path);
                    queue.push_back(to);
                }
            }
        }
        None
    }

    /// Backtracking search for a channel labeling of `edges` with at most
    /// `channels` labels such that no two conflicting edges share a label.
    /// Labels are introduced in first-occurrence order.
    pub fn color_edges(&self, edges: &[EdgeRef], channels: usize) -> Option<Vec<usize>> {
        let mut labels = vec![usize::MAX; edges.len()];
        if self.color_from(edges, channels, 0, 0, &mut labels) {
            Some(labels)
        } else {
            None
        }
    }

    fn color_from(
        &self,
        edges: &[EdgeRef],
        channels: usize,
        at: usize,
        used: usize,
        labels: &mut [usize],
    ) -> bool {
        if at == edges.len() {
            return true;
        }
        let limit = channels.min(used + 1);
        for channel in 0..limit {
            let clash =
                (0..at).any(|j| labels[j] == channel && self.conflicting(edges[j], edges[at]));
            if clash {
                continue;
            }
            labels[at] = channel;
            if self.color_from(edges, channels, at + 1, used.max(channel + 1), labels) {
                return true;
            }
        }
        labels[at] = usize::MAX;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(bidders: usize) -> SecondaryNetwork {
        let networks = (0..bidders)
            .map(|_| BidderNetwork {
                source: 0,
                destination: 2,
                edges: vec![[0, 1], [1, 2], [0, 2]],
            })
            .collect();
        let mut net = SecondaryNetwork::new(3, networks, vec![[EdgeRef(0, 0), EdgeRef(0, 1)]]);
        net.finalize().unwrap();
        net
    }

    #[test]
    fn paths_are_ordered_by_length() {
        let net = line(1);
        let paths = net.simple_paths(0, 100).unwrap();
        assert_eq!(paths, vec![vec![2], vec![0, 1]]);
        assert!(net.simple_paths(0, 1).is_err());
    }

    #[test]
    fn coloring_respects_conflicts() {
        let net = line(1);
        let edges = [EdgeRef(0, 0), EdgeRef(0, 1)];
        assert!(net.color_edges(&edges, 1).is_none());
        assert_eq!(net.color_edges(&edges, 2), Some(vec![0, 1]));
    }

    #[test]
    fn validate_path_checks_walk() {
        let net = line(1);
        let hop = |edge| PathHop { edge, channel: 0 };
        assert!(net.validate_path(0, &[hop(2)]).is_ok());
        assert!(net.validate_path(0, &[hop(0), hop(1)]).is_ok());
        assert!(net.validate_path(0, &[hop(1)]).is_err());
        assert!(net.validate_path(0, &[hop(0)]).is_err());
        assert!(net.validate_path(0, &[]).is_err());
    }

    #[test]
    fn rejects_bad_references() {
        let networks = vec![BidderNetwork {
            source: 0,
            destination: 1,
            edges: vec![[0, 1]],
        }];
        let mut bad =
            SecondaryNetwork::new(2, networks.clone(), vec![[EdgeRef(0, 0), EdgeRef(0, 1)]]);
        assert!(bad.finalize().is_err());
        let mut looped = SecondaryNetwork::new(2, networks, vec![[EdgeRef(0, 0), EdgeRef(0, 0)]]);
        assert!(looped.finalize().is_err());
    }

    #[test]
    fn greedy_path_avoids_committed_edges() {
        let net = line(2);
        let mut committed = vec![vec![false; net.total_edges()]];
        let first = net.greedy_labeled_path(0, 1, &committed).unwrap();
        assert_eq!(
            first,
            vec![PathHop {
                edge: 2,
                channel: 0
            }]
        );
        committed[0][net.global(EdgeRef(0, 2))] = true;
        // No conflicts between bidders here, so bidder 1 still routes directly.
        assert!(net.greedy_labeled_path(1, 1, &committed).is_some());
    }
}
