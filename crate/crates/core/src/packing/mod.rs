//! Unweighted packing: given a candidate set `M`, select as many bidders as
//! possible into a feasible allocation. Packers never see bids.

mod greedy;
mod memo;
mod multichannel;
mod power_control;
mod secondary;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Allocation, EnvironmentKind, Instance};
use crate::oracle::ExactPacking;

pub use greedy::{
    fixed_power_greedy, greedy_conflict_packing, FixedPowerGreedy, GreedyConflictPacking,
};
pub use memo::Memoized;
pub use multichannel::{extend_to_multichannel, MultiChannelExtension};
pub use power_control::{admission_threshold, unweighted_packing_pc, PowerControlPacking};
pub use secondary::{secondary_network_greedy, SecondaryNetworkGreedy};

/// Advertised approximation factor of a packer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Psi {
    Known(f64),
    Unknown,
}

impl Psi {
    pub fn value(self) -> Option<f64> {
        match self {
            Psi::Known(v) => Some(v),
            Psi::Unknown => None,
        }
    }
}

impl fmt::Display for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::Known(v) => write!(f, "{v}"),
            Psi::Unknown => f.write_str("unknown"),
        }
    }
}

/// A procedure mapping a candidate set to a feasible allocation over it.
pub trait Packer: Send + Sync {
    fn name(&self) -> String;

    fn psi(&self) -> Psi;

    fn supports(&self, kind: EnvironmentKind) -> bool;

    /// Packs a subset of `candidates`. The output passes `check_feasible`.
    fn pack(&self, candidates: &[usize], instance: &Instance) -> Result<Allocation>;
}

impl<P: Packer + ?Sized> Packer for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn psi(&self) -> Psi {
        (**self).psi()
    }
    fn supports(&self, kind: EnvironmentKind) -> bool {
        (**self).supports(kind)
    }
    fn pack(&self, candidates: &[usize], instance: &Instance) -> Result<Allocation> {
        (**self).pack(candidates, instance)
    }
}

/// Sorted, deduplicated, range-checked copy of a candidate set.
pub(crate) fn normalize_candidates(
    instance: &Instance,
    candidates: &[usize],
) -> Result<Vec<usize>> {
    let mut out = candidates.to_vec();
    out.sort_unstable();
    out.dedup();
    if let Some(&bad) = out.iter().find(|&&b| b >= instance.num_bidders()) {
        return Err(Error::invalid(format!("candidate {bad} is not a bidder")));
    }
    Ok(out)
}

/// Packer selector as named on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PackerSpec {
    PowerControl,
    Conflict,
    FixedPower,
    Secondary,
    Oracle,
    Extend(Box<PackerSpec>),
}

impl PackerSpec {
    pub fn build(&self) -> Box<dyn Packer> {
        match self {
            PackerSpec::PowerControl => Box::new(PowerControlPacking),
            PackerSpec::Conflict => Box::new(GreedyConflictPacking),
            PackerSpec::FixedPower => Box::new(FixedPowerGreedy),
            PackerSpec::Secondary => Box::new(SecondaryNetworkGreedy),
            PackerSpec::Oracle => Box::new(ExactPacking::default()),
            PackerSpec::Extend(inner) => Box::new(MultiChannelExtension::new(inner.build())),
        }
    }

    /// The default greedy packer for an environment.
    pub fn default_for(kind: EnvironmentKind) -> PackerSpec {
        match kind {
            EnvironmentKind::SinrPowerControl => PackerSpec::PowerControl,
            EnvironmentKind::SinrFixedPower => PackerSpec::FixedPower,
            EnvironmentKind::ConflictGraph => PackerSpec::Conflict,
            EnvironmentKind::SecondaryNetwork => PackerSpec::Secondary,
        }
    }
}

impl FromStr for PackerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(inner) = s.strip_prefix("extend:") {
            return Ok(PackerSpec::Extend(Box::new(inner.parse()?)));
        }
        match s {
            "pc" => Ok(PackerSpec::PowerControl),
            "conflict" => Ok(PackerSpec::Conflict),
            "fixed-power" => Ok(PackerSpec::FixedPower),
            "secondary" => Ok(PackerSpec::Secondary),
            "oracle" => Ok(PackerSpec::Oracle),
            other => Err(Error::invalid(format!("unknown packer '{other}'"))),
        }
    }
}

impl fmt::Display for PackerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PackerSpec::PowerControl => f.write_str("pc"),
            PackerSpec::Conflict => f.write_str("conflict"),
            PackerSpec::FixedPower => f.write_str("fixed-power"),
            PackerSpec::Secondary => f.write_str("secondary"),
            PackerSpec::Oracle => f.write_str("oracle"),
            PackerSpec::Extend(inner) => write!(f, "extend:{inner}"),
        }
    }
}
