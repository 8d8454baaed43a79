use crate::error::{Error, Result};
use crate::model::{Allocation, EnvironmentKind, Instance, PowerMap};
use crate::packing::{normalize_candidates, Packer, Psi};
use crate::power::solve_power_assignment;

/// Admission bound `1 / (2 · 3^α · (4β + 2))` on the interference sum.
pub fn admission_threshold(alpha: f64, beta: f64) -> f64 {
    1.0 / (2.0 * 3f64.powf(alpha) * (4.0 * beta + 2.0))
}

/// Selection with power control: links are taken shortest first (ties by id)
/// and placed on the lowest channel whose already-selected links keep the
/// admission sum under [`admission_threshold`]. Powers are then solved per
/// channel.
///
/// Every already-selected link precedes the new one in the processing order,
/// so it is shorter or of equal length with a smaller id. Equal-length links
/// are counted: skipping them lets two tied, nearby links share a channel with
/// no feasible power assignment.
pub fn unweighted_packing_pc(candidates: &[usize], instance: &Instance) -> Result<Allocation> {
    instance.require("unweighted_packing_pc", EnvironmentKind::SinrPowerControl)?;
    let mut order = normalize_candidates(instance, candidates)?;
    order.sort_by(|&a, &b| {
        instance
            .length(a)
            .total_cmp(&instance.length(b))
            .then(a.cmp(&b))
    });

    let alpha = instance.params().alpha;
    let threshold = admission_threshold(alpha, instance.params().beta);
    let mut channels: Vec<Vec<usize>> = vec![Vec::new(); instance.channels()];
    for &new in &order {
        let admits = |set: &Vec<usize>| {
            let sum: f64 = set
                .iter()
                .map(|&old| {
                    let own = instance.length(old).powf(alpha);
                    own / instance.cross_distance(old, new).powf(alpha)
                        + own / instance.cross_distance(new, old).powf(alpha)
                })
                .sum();
            sum <= threshold
        };
        if let Some(set) = channels.iter_mut().find(|set| admits(set)) {
            set.push(new);
        }
    }

    let mut powers = PowerMap::new();
    for (channel, set) in channels.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let solved = solve_power_assignment(set, instance)?;
        match solved.powers() {
            Some(p) => powers.extend(p.iter().map(|(&k, &v)| (k, v))),
            None => {
                return Err(Error::PowerSolveFailed {
                    channel,
                    size: set.len(),
                })
            }
        }
    }
    for set in &mut channels {
        set.sort_unstable();
    }
    Ok(Allocation {
        channels,
        powers: Some(powers),
        paths: None,
    })
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PowerControlPacking;

impl Packer for PowerControlPacking {
    fn name(&self) -> String {
        "pc".into()
    }

    fn psi(&self) -> Psi {
        Psi::Unknown
    }

    fn supports(&self, kind: EnvironmentKind) -> bool {
        kind == EnvironmentKind::SinrPowerControl
    }

    fn pack(&self, candidates: &[usize], instance: &Instance) -> Result<Allocation> {
        unweighted_packing_pc(candidates, instance)
    }
}
