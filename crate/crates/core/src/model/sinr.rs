use crate::error::{Error, Result};
use crate::model::{Instance, PowerMap};

/// SINR of link `link` when the links in `co_channel` transmit simultaneously.
///
/// `co_channel` must contain `link`. Returns `+inf` when noise is zero and
/// there are no interferers.
pub fn sinr_ratio(
    instance: &Instance,
    link: usize,
    co_channel: &[usize],
    powers: &PowerMap,
) -> Result<f64> {
    let n = instance.links().len();
    if link >= n {
        return Err(Error::invalid(format!("unknown link {link}")));
    }
    if !co_channel.contains(&link) {
        return Err(Error::invalid(format!(
            "link {link} is not in its co-channel set"
        )));
    }
    for &j in co_channel {
        if j >= n {
            return Err(Error::invalid(format!("unknown link {j}")));
        }
        match powers.get(&j) {
            Some(&p) if p > 0.0 && p.is_finite() => {}
            Some(&p) => {
                return Err(Error::invalid(format!(
                    "link {j} has nonpositive power {p}"
                )))
            }
            None => return Err(Error::invalid(format!("link {j} has no power"))),
        }
    }
    Ok(sinr_with(instance, link, co_channel, |j| powers[&j]))
}

/// SINR with powers supplied by a closure. No validation.
pub(crate) fn sinr_with(
    instance: &Instance,
    link: usize,
    co_channel: &[usize],
    power: impl Fn(usize) -> f64,
) -> f64 {
    let alpha = instance.params().alpha;
    let signal = power(link) / instance.length(link).powf(alpha);
    let interference: f64 = co_channel
        .iter()
        .filter(|&&j| j != link)
        .map(|&j| power(j) / instance.cross_distance(j, link).powf(alpha))
        .sum();
    let denominator = instance.params().noise + interference;
    if denominator == 0.0 {
        f64::INFINITY
    } else {
        signal / denominator
    }
}

/// Whether `sinr` meets the threshold `beta` up to an absolute `tolerance`.
pub fn meets_threshold(sinr: f64, beta: f64, tolerance: f64) -> bool {
    sinr >= beta - tolerance
}
