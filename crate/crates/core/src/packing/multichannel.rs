use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Allocation, EnvironmentKind, Instance, PathHop, PowerMap};
use crate::packing::{normalize_candidates, Packer, Psi};

/// Fills channels one at a time: round `j` runs `single_channel` on a
/// one-channel copy of the instance over the bidders not yet selected and
/// places its output on channel `j`.
pub fn extend_to_multichannel(
    single_channel: &dyn Packer,
    candidates: &[usize],
    instance: &Instance,
) -> Result<Allocation> {
    let k = instance.channels();
    let single = instance.with_channels(1)?;
    let mut remaining = normalize_candidates(instance, candidates)?;
    let mut alloc = Allocation::empty(k);
    let mut powers: Option<PowerMap> = None;
    let mut paths: Option<BTreeMap<usize, Vec<PathHop>>> = None;

    for channel in 0..k {
        let round = single_channel.pack(&remaining, &single)?;
        let [selected] = <[Vec<usize>; 1]>::try_from(round.channels)
            .map_err(|_| Error::invalid("single-channel packer returned more than one channel"))?;
        if let Some(p) = round.powers {
            powers.get_or_insert_with(PowerMap::new).extend(p);
        }
        if let Some(p) = round.paths {
            let relabeled = p.into_iter().map(|(bidder, hops)| {
                let hops = hops
                    .into_iter()
                    .map(|hop| PathHop {
                        edge: hop.edge,
                        channel,
                    })
                    .collect();
                (bidder, hops)
            });
            paths.get_or_insert_with(BTreeMap::new).extend(relabeled);
        }
        remaining.retain(|b| !selected.contains(b));
        alloc.channels[channel] = selected;
    }
    alloc.powers = powers;
    alloc.paths = paths;
    Ok(alloc)
}

/// [`extend_to_multichannel`] as a packer. Advertises `(1 − 1/e)·ψ` when the
/// inner packer's `ψ` is known.
pub struct MultiChannelExtension {
    inner: Box<dyn Packer>,
}

impl MultiChannelExtension {
    pub fn new(inner: Box<dyn Packer>) -> Self {
        MultiChannelExtension { inner }
    }
}

impl Packer for MultiChannelExtension {
    fn name(&self) -> String {
        format!("extend:{}", self.inner.name())
    }

    fn psi(&self) -> Psi {
        match self.inner.psi() {
            Psi::Known(psi) => Psi::Known((1.0 - (-1.0f64).exp()) * psi),
            Psi::Unknown => Psi::Unknown,
        }
    }

    fn supports(&self, kind: EnvironmentKind) -> bool {
        self.inner.supports(kind)
    }

    fn pack(&self, candidates: &[usize], instance: &Instance) -> Result<Allocation> {
        extend_to_multichannel(self.inner.as_ref(), candidates, instance)
    }
}
