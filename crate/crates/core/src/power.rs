//! Power assignment for a co-channel set under power control.
//!
//! Writing `x_i = σ_i / d_ii^α`, the SINR constraints at equality become the
//! linear system `(I − β·G)·x = β·ν·1` with `G_ij = d_jj^α / d_ji^α` for
//! `j ≠ i`. Because `G` is nonnegative, a positive solution exists exactly
//! when the spectral radius of `β·G` is below one, and it is then the
//! component-wise minimal feasible assignment. With zero noise the system is
//! homogeneous and the SINR is scale-free, so `ν = 1` is used as a surrogate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::sinr::sinr_with;
use crate::model::{EnvironmentKind, Instance, PowerMap, DEFAULT_TOLERANCE};

/// Systems whose 1-norm condition estimate exceeds this are reported infeasible.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum PowerStatus {
    Feasible { powers: PowerMap },
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSolveResult {
    pub status: PowerStatus,
    /// Achieved SINR minus β per link. Empty when no positive solution was found.
    pub residuals: PowerMap,
}

impl PowerSolveResult {
    fn infeasible() -> Self {
        PowerSolveResult {
            status: PowerStatus::Infeasible,
            residuals: PowerMap::new(),
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.status, PowerStatus::Feasible { .. })
    }

    pub fn powers(&self) -> Option<&PowerMap> {
        match &self.status {
            PowerStatus::Feasible { powers } => Some(powers),
            PowerStatus::Infeasible => None,
        }
    }
}

/// Solves for the minimal power assignment making every link in `co_channel`
/// meet the SINR threshold.
pub fn solve_power_assignment(
    co_channel: &[usize],
    instance: &Instance,
) -> Result<PowerSolveResult> {
    instance.require("solve_power_assignment", EnvironmentKind::SinrPowerControl)?;
    if co_channel.is_empty() {
        return Err(Error::invalid("power solve needs a nonempty link set"));
    }
    let n = instance.links().len();
    let mut links = co_channel.to_vec();
    links.sort_unstable();
    links.dedup();
    if links.len() != co_channel.len() {
        return Err(Error::invalid("co-channel set contains duplicates"));
    }
    if let Some(&bad) = links.iter().find(|&&l| l >= n) {
        return Err(Error::invalid(format!("unknown link {bad}")));
    }

    let params = instance.params();
    let alpha = params.alpha;
    let beta = params.beta;
    let noise = if params.noise > 0.0 {
        params.noise
    } else {
        1.0
    };
    let m = links.len();
    let own: Vec<f64> = links
        .iter()
        .map(|&l| instance.length(l).powf(alpha))
        .collect();

    let a = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            1.0
        } else {
            -beta * own[c] / instance.cross_distance(links[c], links[r]).powf(alpha)
        }
    });
    let b = DVector::from_element(m, beta * noise);

    let lu = a.clone().lu();
    let Some(inverse) = lu.try_inverse() else {
        return Ok(PowerSolveResult::infeasible());
    };
    let condition = one_norm(&a) * one_norm(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Ok(PowerSolveResult::infeasible());
    }
    let Some(mut x) = lu.solve(&b) else {
        return Ok(PowerSolveResult::infeasible());
    };
    // One round of iterative refinement.
    let residual = &b - &a * &x;
    if let Some(correction) = lu.solve(&residual) {
        x += correction;
    }
    if x.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return Ok(PowerSolveResult::infeasible());
    }

    let powers: PowerMap = links
        .iter()
        .enumerate()
        .map(|(idx, &l)| (l, x[idx] * own[idx]))
        .collect();
    let residuals: PowerMap = links
        .iter()
        .map(|&l| (l, sinr_with(instance, l, &links, |j| powers[&j]) - beta))
        .collect();
    if residuals.values().any(|&r| r < -DEFAULT_TOLERANCE) {
        return Ok(PowerSolveResult {
            status: PowerStatus::Infeasible,
            residuals,
        });
    }
    Ok(PowerSolveResult {
        status: PowerStatus::Feasible { powers },
        residuals,
    })
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
