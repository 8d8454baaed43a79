use serde::{Deserialize, Serialize};

/// Sample mean with its standard error. Sums run in slice order, so equal
/// inputs give bit-identical results.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_error: f64,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Summary {
        let count = samples.len();
        if count == 0 {
            return Summary {
                count,
                mean: 0.0,
                std_error: 0.0,
            };
        }
        let n = count as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std_error = if count > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Summary {
            count,
            mean,
            std_error,
        }
    }

    /// Lower end of the `mean ± z·SE` interval.
    pub fn lower(&self, z: f64) -> f64 {
        self.mean - z * self.std_error
    }

    pub fn upper(&self, z: f64) -> f64 {
        self.mean + z * self.std_error
    }
}
