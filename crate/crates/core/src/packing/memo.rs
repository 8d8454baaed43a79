use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::Result;
use crate::model::{Allocation, EnvironmentKind, Instance};
use crate::packing::{normalize_candidates, Packer, Psi};

/// Caches a deterministic packer's output per candidate set, for one instance.
///
/// Monte Carlo runs hit the same candidate sets many times; exact packers are
/// too slow to recompute each time.
pub struct Memoized<'a> {
    inner: &'a dyn Packer,
    instance: &'a Instance,
    cache: Mutex<HashMap<Vec<usize>, Allocation>>,
}

impl<'a> Memoized<'a> {
    pub fn new(inner: &'a dyn Packer, instance: &'a Instance) -> Self {
        Memoized {
            inner,
            instance,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl Packer for Memoized<'_> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn psi(&self) -> Psi {
        self.inner.psi()
    }

    fn supports(&self, kind: EnvironmentKind) -> bool {
        self.inner.supports(kind)
    }

    fn pack(&self, candidates: &[usize], instance: &Instance) -> Result<Allocation> {
        if !std::ptr::eq(instance, self.instance) && instance != self.instance {
            return self.inner.pack(candidates, instance);
        }
        let key = normalize_candidates(instance, candidates)?;
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let alloc = self.inner.pack(&key, instance)?;
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, alloc.clone());
        Ok(alloc)
    }
}
