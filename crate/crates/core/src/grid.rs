use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `[p_min, p_max]` split into `k` bins of width `2 * half_width`.
///
/// Bin `j` (zero-based) is centered on `p_min + (2j + 1) * half_width` and
/// covers the half-open interval `[center - half_width, center + half_width)`;
/// the last bin also contains `p_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridMeta", into = "GridMeta")]
pub struct PriceGrid {
    p_min: f64,
    p_max: f64,
    half_width: f64,
    centers: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridMeta {
    p_min: f64,
    p_max: f64,
    k: usize,
    half_width: f64,
}

impl From<PriceGrid> for GridMeta {
    fn from(g: PriceGrid) -> Self {
        GridMeta {
            p_min: g.p_min,
            p_max: g.p_max,
            k: g.k(),
            half_width: g.half_width,
        }
    }
}

impl TryFrom<GridMeta> for PriceGrid {
    type Error = Error;

    fn try_from(m: GridMeta) -> Result<Self> {
        build_price_grid(m.p_min, m.p_max, m.k)
    }
}

pub fn build_price_grid(p_min: f64, p_max: f64, k: usize) -> Result<PriceGrid> {
    if !(p_min.is_finite() && p_max.is_finite()) || p_min >= p_max {
        return Err(Error::param(format!(
            "grid needs p_min < p_max (got {p_min}, {p_max})"
        )));
    }
    if k < 2 {
        return Err(Error::param(format!("grid needs k >= 2 (got {k})")));
    }
    let half_width = (p_max - p_min) / (2 * k) as f64;
    let centers = (0..k)
        .map(|j| p_min + (2 * j + 1) as f64 * half_width)
        .collect();
    Ok(PriceGrid {
        p_min,
        p_max,
        half_width,
        centers,
    })
}

impl PriceGrid {
    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    /// Half bin width, `epsilon`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Bin width `2 * epsilon`, which is also the finite-difference step.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn width(&self) -> f64 {
        self.p_max - self.p_min
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// `[lo, hi)` bounds of bin `j`.
    pub fn bin_edges(&self, j: usize) -> (f64, f64) {
        let lo = self.p_min + 2.0 * j as f64 * self.half_width;
        let hi = if j + 1 == self.k() {
            self.p_max
        } else {
            self.p_min + 2.0 * (j + 1) as f64 * self.half_width
        };
        (lo, hi)
    }

    /// Bin containing `price`, or `None` outside `[p_min, p_max]`.
    pub fn bin_of(&self, price: f64) -> Option<usize> {
        if !(price >= self.p_min && price <= self.p_max) {
            return None;
        }
        let j = ((price - self.p_min) / self.spacing()).floor() as usize;
        Some(j.min(self.k() - 1))
    }

    /// Rebuilds a grid from equally spaced bin centers.
    pub fn from_centers(centers: &[f64]) -> Result<PriceGrid> {
        if centers.len() < 2 {
            return Err(Error::param("need at least 2 bin centers"));
        }
        let k = centers.len();
        let step = (centers[k - 1] - centers[0]) / (k - 1) as f64;
        let grid = build_price_grid(centers[0] - step / 2.0, centers[k - 1] + step / 2.0, k)?;
        let tol = 1e-9 * step.abs().max(centers[0].abs());
        if grid
            .centers
            .iter()
            .zip(centers)
            .any(|(a, b)| (a - b).abs() > tol)
        {
            return Err(Error::param("bin centers are not equally spaced"));
        }
        Ok(grid)
    }

    pub(crate) fn ensure_same(&self, other: &PriceGrid, what: &'static str) -> Result<()> {
        if self.k() != other.k()
            || (self.p_min - other.p_min).abs() > 1e-12 * self.width()
            || (self.p_max - other.p_max).abs() > 1e-12 * self.width()
        {
            return Err(Error::GridMismatch(what));
        }
        Ok(())
    }
}
