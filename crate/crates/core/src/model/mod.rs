//! Domain types for spectrum auction instances.
//!
//! An [`Instance`] bundles the bidders (links in a 2-D Euclidean plane, or
//! per-bidder networks in the secondary-network setting), the number of
//! identical channels, the physical constants of the SINR model and the
//! interference environment that decides which winner sets are feasible.
//!
//! Instances serialize to JSON. Channel indices are 0-based everywhere.

mod allocation;
mod feasibility;
pub mod secondary;
pub(crate) mod sinr;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use allocation::{Allocation, PathHop, PowerMap};
pub use feasibility::{
    check_feasible, downward_closure_probe, FeasibilityReport, Violation, DEFAULT_TOLERANCE,
};
pub use secondary::{BidderNetwork, EdgeRef, SecondaryNetwork};
pub use sinr::{meets_threshold, sinr_ratio};

/// A point in the plane. Serializes as `[x, y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point(pub f64, pub f64);

impl Point {
    pub fn distance(self, other: Point) -> f64 {
        (self.0 - other.0).hypot(self.1 - other.1)
    }

    fn is_finite(self) -> bool {
        self.0.is_finite() && self.1.is_finite()
    }
}

/// A single-hop communication request from `sender` to `receiver`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: usize,
    pub sender: Point,
    pub receiver: Point,
}

impl Link {
    pub fn new(id: usize, sender: Point, receiver: Point) -> Self {
        Link {
            id,
            sender,
            receiver,
        }
    }

    pub fn length(&self) -> f64 {
        self.sender.distance(self.receiver)
    }
}

/// Path-loss exponent, SINR threshold and ambient noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub alpha: f64,
    pub beta: f64,
    pub noise: f64,
}

impl PhysicalParams {
    pub fn new(alpha: f64, beta: f64, noise: f64) -> Result<Self> {
        let params = PhysicalParams { alpha, beta, noise };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::invalid(format!(
                "alpha must be > 1, got {}",
                self.alpha
            )));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::invalid(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::invalid(format!(
                "noise must be >= 0, got {}",
                self.noise
            )));
        }
        Ok(())
    }
}

/// Fixed power assignment schemes, parameterized by a base constant `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerScheme {
    /// `c`
    Uniform,
    /// `c * len^alpha`
    Linear,
    /// `c * len^(alpha / 2)`
    SquareRoot,
}

impl PowerScheme {
    pub fn power(self, base: f64, length: f64, alpha: f64) -> f64 {
        match self {
            PowerScheme::Uniform => base,
            PowerScheme::Linear => base * length.powf(alpha),
            PowerScheme::SquareRoot => base * length.powf(alpha / 2.0),
        }
    }
}

/// Conflict graph over links. Serialized as an undirected edge list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConflictGraph {
    pub edges: Vec<[usize; 2]>,
    #[serde(skip)]
    neighbors: Vec<Vec<usize>>,
}

impl ConflictGraph {
    pub fn new(edges: Vec<[usize; 2]>) -> Self {
        ConflictGraph {
            edges,
            neighbors: Vec::new(),
        }
    }

    fn finalize(&mut self, n: usize) -> Result<()> {
        let mut neighbors = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for &[a, b] in &self.edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!(
                    "conflict edge ({a}, {b}) references a link outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!(
                    "conflict graph has a self-loop on {a}"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid(format!(
                    "duplicate conflict edge ({a}, {b})"
                )));
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        self.neighbors = neighbors;
        Ok(())
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors
            .get(a)
            .is_some_and(|list| list.binary_search(&b).is_ok())
    }

    pub fn neighbors(&self, a: usize) -> &[usize] {
        &self.neighbors[a]
    }
}

/// The interference environment of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Environment {
    /// SINR constraints; powers are chosen by the allocation.
    SinrPowerControl,
    /// SINR constraints under a fixed power scheme.
    SinrFixedPower {
        scheme: PowerScheme,
        base_power: f64,
    },
    /// Co-channel winners must be non-adjacent in the conflict graph.
    ConflictGraph(ConflictGraph),
    /// Each bidder needs an interference-free path in its own network.
    SecondaryNetwork(SecondaryNetwork),
}

/// Discriminant of [`Environment`], used for dispatch and error messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvironmentKind {
    SinrPowerControl,
    SinrFixedPower,
    ConflictGraph,
    SecondaryNetwork,
}

impl EnvironmentKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvironmentKind::SinrPowerControl => "sinr-power-control",
            EnvironmentKind::SinrFixedPower => "sinr-fixed-power",
            EnvironmentKind::ConflictGraph => "conflict-graph",
            EnvironmentKind::SecondaryNetwork => "secondary-network",
        }
    }

    pub const ALL: [EnvironmentKind; 4] = [
        EnvironmentKind::SinrPowerControl,
        EnvironmentKind::SinrFixedPower,
        EnvironmentKind::ConflictGraph,
        EnvironmentKind::SecondaryNetwork,
    ];
}

impl std::fmt::Display for EnvironmentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Environment {
    pub fn kind(&self) -> EnvironmentKind {
        match self {
            Environment::SinrPowerControl => EnvironmentKind::SinrPowerControl,
            Environment::SinrFixedPower { .. } => EnvironmentKind::SinrFixedPower,
            Environment::ConflictGraph(_) => EnvironmentKind::ConflictGraph,
            Environment::SecondaryNetwork(_) => EnvironmentKind::SecondaryNetwork,
        }
    }
}

#[derive(Deserialize)]
struct InstanceDoc {
    #[serde(default)]
    links: Vec<Link>,
    channels: usize,
    params: PhysicalParams,
    environment: Environment,
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        Instance::new(doc.links, doc.channels, doc.params, doc.environment)
    }
}

/// A validated auction instance. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc")]
pub struct Instance {
    links: Vec<Link>,
    channels: usize,
    params: PhysicalParams,
    environment: Environment,
}

impl Instance {
    pub fn new(
        links: Vec<Link>,
        channels: usize,
        params: PhysicalParams,
        mut environment: Environment,
    ) -> Result<Self> {
        if channels == 0 {
            return Err(Error::invalid("channel count must be at least 1"));
        }
        params.validate()?;
        for (index, link) in links.iter().enumerate() {
            if link.id != index {
                return Err(Error::invalid(format!(
                    "link ids must be contiguous from 0; position {index} has id {}",
                    link.id
                )));
            }
            if !link.sender.is_finite() || !link.receiver.is_finite() {
                return Err(Error::invalid(format!(
                    "link {index} has non-finite coordinates"
                )));
            }
            if link.length().is_nan() || link.length() <= 0.0 {
                return Err(Error::invalid(format!(
                    "link {index} has coincident sender and receiver"
                )));
            }
        }
        match &mut environment {
            Environment::SecondaryNetwork(network) => {
                if !links.is_empty() {
                    return Err(Error::invalid(
                        "secondary-network instances carry their bidders in the environment; links must be empty",
                    ));
                }
                network.finalize()?;
            }
            other => {
                if links.is_empty() {
                    return Err(Error::invalid("instance needs at least one link"));
                }
                match other {
                    Environment::SinrFixedPower { base_power, .. } => {
                        if !(base_power.is_finite() && *base_power > 0.0) {
                            return Err(Error::invalid(format!(
                                "base power must be > 0, got {base_power}"
                            )));
                        }
                    }
                    Environment::ConflictGraph(graph) => graph.finalize(links.len())?,
                    _ => {}
                }
            }
        }
        Ok(Instance {
            links,
            channels,
            params,
            environment,
        })
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: usize) -> &Link {
        &self.links[id]
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn environment(&self) -> &Environment {
        &self.environment
    }

    pub fn kind(&self) -> EnvironmentKind {
        self.environment.kind()
    }

    /// Number of bidders `n`.
    pub fn num_bidders(&self) -> usize {
        match &self.environment {
            Environment::SecondaryNetwork(network) => network.networks.len(),
            _ => self.links.len(),
        }
    }

    pub fn bidders(&self) -> std::ops::Range<usize> {
        0..self.num_bidders()
    }

    /// Distance from the sender of link `from` to the receiver of link `to`.
    pub fn cross_distance(&self, from: usize, to: usize) -> f64 {
        self.links[from].sender.distance(self.links[to].receiver)
    }

    pub fn length(&self, id: usize) -> f64 {
        self.links[id].length()
    }

    /// The same instance with a different channel count.
    pub fn with_channels(&self, channels: usize) -> Result<Instance> {
        if channels == 0 {
            return Err(Error::invalid("channel count must be at least 1"));
        }
        let mut copy = self.clone();
        copy.channels = channels;
        Ok(copy)
    }

    /// Transmit power of `link` under a fixed-power environment.
    pub fn fixed_power(&self, link: usize) -> Option<f64> {
        match self.environment {
            Environment::SinrFixedPower { scheme, base_power } => {
                Some(scheme.power(base_power, self.length(link), self.params.alpha))
            }
            _ => None,
        }
    }

    pub fn conflict_graph(&self) -> Option<&ConflictGraph> {
        match &self.environment {
            Environment::ConflictGraph(graph) => Some(graph),
            _ => None,
        }
    }

    pub fn secondary(&self) -> Option<&SecondaryNetwork> {
        match &self.environment {
            Environment::SecondaryNetwork(network) => Some(network),
            _ => None,
        }
    }

    pub(crate) fn require(&self, operation: &'static str, expected: EnvironmentKind) -> Result<()> {
        if self.kind() == expected {
            Ok(())
        } else {
            Err(Error::EnvironmentMismatch {
                operation,
                expected: expected.name(),
                found: self.kind().name(),
            })
        }
    }

    pub(crate) fn check_bidder(&self, id: usize) -> Result<()> {
        if id < self.num_bidders() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "bidder {id} is not in the instance (n = {})",
                self.num_bidders()
            )))
        }
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
