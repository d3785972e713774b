use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialProfile;

/// A support or resistance level: an interior peak of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub price: f64,
    /// Topographic prominence on the normalized 0..1 scale.
    pub prominence: f64,
    pub bin: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BarrierSet {
    /// Sorted by price.
    pub levels: Vec<Barrier>,
    pub min_prominence: f64,
}

impl BarrierSet {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Interior peaks of `V` whose prominence is at least `min_prominence`.
///
/// A peak's prominence is its height above the highest saddle that
/// separates it from higher ground; the highest peak is measured from 0.
/// Plateaus report their middle bin. Equal-height peaks are ranked left to
/// right, so only the leftmost of them is treated as the summit.
pub fn detect_barriers(potential: &PotentialProfile, min_prominence: f64) -> Result<BarrierSet> {
    if !(min_prominence > 0.0 && min_prominence <= 1.0) {
        return Err(Error::param(format!(
            "min_prominence must lie in (0, 1] (got {min_prominence})"
        )));
    }
    let v = &potential.values;
    let centers = potential.grid.centers();
    let mut levels = Vec::new();
    let mut i = 1;
    while i + 1 < v.len() {
        if v[i] > v[i - 1] {
            let start = i;
            while i + 1 < v.len() && v[i + 1] == v[i] {
                i += 1;
            }
            if i + 1 < v.len() && v[i + 1] < v[i] {
                let prominence = prominence(v, start, i);
                if prominence >= min_prominence {
                    let bin = (start + i) / 2;
                    levels.push(Barrier {
                        price: centers[bin],
                        prominence,
                        bin,
                    });
                }
            }
        }
        i += 1;
    }
    Ok(BarrierSet {
        levels,
        min_prominence,
    })
}

fn prominence(v: &[f64], start: usize, end: usize) -> f64 {
    let height = v[start];
    let mut left = None;
    let mut lowest = height;
    for &x in v[..start].iter().rev() {
        if x >= height {
            left = Some(lowest);
            break;
        }
        lowest = lowest.min(x);
    }
    let mut right = None;
    let mut lowest = height;
    for &x in &v[end + 1..] {
        if x > height {
            right = Some(lowest);
            break;
        }
        lowest = lowest.min(x);
    }
    let saddle = match (left, right) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 0.0,
    };
    height - saddle
}
