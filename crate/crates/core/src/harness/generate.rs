use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    BidderNetwork, ConflictGraph, EdgeRef, Environment, EnvironmentKind, Instance, Link,
    PhysicalParams, Point, PowerScheme, SecondaryNetwork,
};

/// Parameters of the random instance generator.
///
/// Links get a uniform sender in `[0, area]²`, a uniform length in
/// `[min_length, max_length]` and a uniform direction. Conflict graphs draw
/// each edge independently with probability `density`. Secondary networks
/// live on a `grid_side × grid_side` grid: each bidder keeps every grid edge
/// (in both directions) with probability `edge_keep`, and two edges sharing
/// a grid node conflict with probability `density`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub environment: EnvironmentKind,
    pub bidders: usize,
    pub channels: usize,
    pub alpha: f64,
    pub beta: f64,
    pub noise: f64,
    pub area: f64,
    pub min_length: f64,
    pub max_length: f64,
    pub density: f64,
    pub scheme: PowerScheme,
    pub base_power: f64,
    pub grid_side: usize,
    pub edge_keep: f64,
}

impl GeneratorSpec {
    pub fn new(environment: EnvironmentKind, bidders: usize, channels: usize) -> Self {
        GeneratorSpec {
            environment,
            bidders,
            channels,
            alpha: 2.5,
            beta: 1.5,
            noise: 1.0,
            area: 100.0,
            min_length: 1.0,
            max_length: 4.0,
            density: 0.3,
            scheme: PowerScheme::Uniform,
            base_power: 100.0,
            grid_side: 3,
            edge_keep: 0.6,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.bidders == 0 {
            return Err(Error::invalid("generator needs at least one bidder"));
        }
        if !(self.area.is_finite() && self.area > 0.0) {
            return Err(Error::invalid("area must be positive"));
        }
        if !(self.min_length > 0.0
            && self.min_length <= self.max_length
            && self.max_length.is_finite())
        {
            return Err(Error::invalid("need 0 < min_length <= max_length"));
        }
        for (name, p) in [("density", self.density), ("edge_keep", self.edge_keep)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.environment == EnvironmentKind::SecondaryNetwork && self.grid_side < 2 {
            return Err(Error::invalid("grid_side must be at least 2"));
        }
        Ok(())
    }
}

/// Seed for the `index`-th member of a family derived from `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(index.wrapping_add(1));
    rng.next_u64()
}

pub fn generate_instance(spec: &GeneratorSpec, seed: u64) -> Result<Instance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = PhysicalParams::new(spec.alpha, spec.beta, spec.noise)?;
    if spec.environment == EnvironmentKind::SecondaryNetwork {
        let network = secondary_network(spec, &mut rng);
        return Instance::new(
            Vec::new(),
            spec.channels,
            params,
            Environment::SecondaryNetwork(network),
        );
    }
    let links = random_links(spec, &mut rng);
    let environment = match spec.environment {
        EnvironmentKind::SinrPowerControl => Environment::SinrPowerControl,
        EnvironmentKind::SinrFixedPower => Environment::SinrFixedPower {
            scheme: spec.scheme,
            base_power: spec.base_power,
        },
        EnvironmentKind::ConflictGraph => {
            let mut edges = Vec::new();
            for a in 0..spec.bidders {
                for b in a + 1..spec.bidders {
                    if rng.random_bool(spec.density) {
                        edges.push([a, b]);
                    }
                }
            }
            Environment::ConflictGraph(ConflictGraph::new(edges))
        }
        EnvironmentKind::SecondaryNetwork => unreachable!(),
    };
    Instance::new(links, spec.channels, params, environment)
}

fn random_links(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<Link> {
    (0..spec.bidders)
        .map(|id| {
            let sender = Point(
                rng.random_range(0.0..=spec.area),
                rng.random_range(0.0..=spec.area),
            );
            let length = rng.random_range(spec.min_length..=spec.max_length);
            let angle = rng.random_range(0.0..TAU);
            let receiver = Point(
                sender.0 + length * angle.cos(),
                sender.1 + length * angle.sin(),
            );
            Link::new(id, sender, receiver)
        })
        .collect()
}

fn secondary_network(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> SecondaryNetwork {
    let side = spec.grid_side;
    let nodes = side * side;
    let mut grid_edges = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let v = r * side + c;
            if c + 1 < side {
                grid_edges.push([v, v + 1]);
            }
            if r + 1 < side {
                grid_edges.push([v, v + side]);
            }
        }
    }
    let networks: Vec<BidderNetwork> = (0..spec.bidders)
        .map(|_| {
            let source = rng.random_range(0..nodes);
            let mut destination = rng.random_range(0..nodes - 1);
            if destination >= source {
                destination += 1;
            }
            let mut edges = Vec::new();
            for &[u, v] in &grid_edges {
                if rng.random_bool(spec.edge_keep) {
                    edges.push([u, v]);
                    edges.push([v, u]);
                }
            }
            BidderNetwork {
                source,
                destination,
                edges,
            }
        })
        .collect();

    let all: Vec<(EdgeRef, [usize; 2])> = networks
        .iter()
        .enumerate()
        .flat_map(|(b, net)| {
            net.edges
                .iter()
                .enumerate()
                .map(move |(e, &uv)| (EdgeRef(b, e), uv))
        })
        .collect();
    let mut conflicts = Vec::new();
    for (i, &(a, [a0, a1])) in all.iter().enumerate() {
        for &(b, [b0, b1]) in &all[i + 1..] {
            let touching = a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1;
            if touching && rng.random_bool(spec.density) {
                conflicts.push([a, b]);
            }
        }
    }
    SecondaryNetwork::new(nodes, networks, conflicts)
}

/// Valuations on a quarter-unit grid in `[0.25, 10]`, so ties occur.
pub fn generate_values(bidders: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..bidders)
        .map(|_| f64::from(rng.random_range(1u32..=40)) * 0.25)
        .collect()
}

/// One bidder valued `dominant`, all others together below `dominant / 8`.
/// Returns the values and the dominant bidder's id.
pub fn dominant_values(bidders: usize, dominant: f64, seed: u64) -> Result<(Vec<f64>, usize)> {
    if bidders == 0 || !(dominant.is_finite() && dominant > 0.0) {
        return Err(Error::invalid("need n >= 1 and a positive dominant value"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let star = rng.random_range(0..bidders);
    let cap = dominant / (8.0 * bidders as f64);
    let values = (0..bidders)
        .map(|i| {
            if i == star {
                dominant
            } else {
                cap * rng.random_range(0.0..1.0)
            }
        })
        .collect();
    Ok((values, star))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let mut spec = GeneratorSpec::new(EnvironmentKind::SinrPowerControl, 6, 2);
        spec.alpha = 2.5;
        spec.beta = 1.5;
        let a = generate_instance(&spec, 42).unwrap();
        let b = generate_instance(&spec, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_ne!(a, generate_instance(&spec, 43).unwrap());
        for l in a.links() {
            assert!((1.0 - 1e-9..=4.0 + 1e-9).contains(&l.length()));
        }
    }

    #[test]
    fn zero_bidders_is_rejected() {
        for kind in EnvironmentKind::ALL {
            assert!(generate_instance(&GeneratorSpec::new(kind, 0, 1), 1).is_err());
        }
    }

    #[test]
    fn zero_density_gives_empty_graph() {
        let mut spec = GeneratorSpec::new(EnvironmentKind::ConflictGraph, 8, 1);
        spec.density = 0.0;
        let inst = generate_instance(&spec, 5).unwrap();
        assert!(inst.conflict_graph().unwrap().edges.is_empty());
    }

    #[test]
    fn every_environment_generates() {
        for kind in EnvironmentKind::ALL {
            let inst = generate_instance(&GeneratorSpec::new(kind, 5, 2), 9).unwrap();
            assert_eq!(inst.kind(), kind);
            assert_eq!(inst.num_bidders(), 5);
        }
    }

    #[test]
    fn dominant_values_respect_the_gap() {
        for seed in 0..50 {
            let (values, star) = dominant_values(7, 10.0, seed).unwrap();
            let rest: f64 = values
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != star)
                .map(|(_, v)| v)
                .sum();
            assert_eq!(values[star], 10.0);
            assert!(rest < 10.0 / 8.0);
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 100);
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
