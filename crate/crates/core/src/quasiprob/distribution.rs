use alloc::sync::Arc;
use alloc::vec::Vec;

use super::grid::SphereGrid;
use super::symbol::{frame_operator, frame_weights};
use crate::spin::{Direction, SpinSpace};
use crate::{CMatrix, Error, Result};

/// Tolerated negative mass before an overlap is refused.
pub const MAX_CLIPPED_MASS: f64 = 1e-6;

/// A real function sampled on the nodes of a [`SphereGrid`].
#[derive(Clone, Debug)]
pub struct SphereDistribution {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

/// Union of polar bands, each given as a closed cos(theta) interval.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarRegion {
    bands: Vec<(f64, f64)>,
}

impl PolarRegion {
    pub fn from_cos_bands(bands: Vec<(f64, f64)>) -> Self {
        Self { bands }
    }

    /// theta in [theta_min, theta_max].
    pub fn theta_band(theta_min: f64, theta_max: f64) -> Self {
        Self { bands: alloc::vec![(libm::cos(theta_max), libm::cos(theta_min))] }
    }

    pub fn northern_hemisphere() -> Self {
        Self { bands: alloc::vec![(0.0, 1.0)] }
    }

    pub fn southern_hemisphere() -> Self {
        Self { bands: alloc::vec![(-1.0, 0.0)] }
    }

    pub fn whole_sphere() -> Self {
        Self { bands: alloc::vec![(-1.0, 1.0)] }
    }

    pub fn cos_bands(&self) -> &[(f64, f64)] {
        &self.bands
    }

    /// Half-open in cos(theta) except at the north pole, so complementary
    /// regions never count a node twice.
    pub fn contains_cos(&self, x: f64) -> bool {
        self.bands.iter().any(|&(lo, hi)| x >= lo && (x < hi || (hi >= 1.0 && x <= 1.0)))
    }

    pub fn contains(&self, d: &Direction) -> bool {
        self.contains_cos(libm::cos(d.theta()))
    }
}

/// Overlap value and the negative mass that had to be clipped to get it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Overlap {
    pub value: f64,
    pub clipped_mass: f64,
}

impl SphereDistribution {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<SphereGrid>, mut f: impl FnMut(Direction) -> f64) -> Self {
        let values = grid.nodes().map(|(d, _)| f(d)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integral(&self) -> f64 {
        self.weighted().sum()
    }

    fn weighted(&self) -> impl Iterator<Item = f64> + '_ {
        let n_phi = self.grid.n_phi();
        self.grid
            .rings()
            .iter()
            .enumerate()
            .flat_map(move |(r, ring)| self.values[r * n_phi..(r + 1) * n_phi].iter().map(move |v| v * ring.node_weight))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Node index and direction of the largest value.
    pub fn argmax(&self) -> (usize, Direction) {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if *v > best.1 { (i, *v) } else { best });
        (i, self.grid.direction(i))
    }

    pub fn integrate_region(&self, region: &PolarRegion) -> f64 {
        let n_phi = self.grid.n_phi();
        self.grid
            .rings()
            .iter()
            .enumerate()
            .filter(|(_, ring)| region.contains_cos(ring.cos_theta))
            .map(|(r, ring)| ring.node_weight * self.values[r * n_phi..(r + 1) * n_phi].iter().sum::<f64>())
            .sum()
    }

    fn check_same_grid(&self, other: &SphereDistribution) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// a f + b g
    pub fn combine(&self, a: f64, other: &SphereDistribution, b: f64) -> Result<SphereDistribution> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(f, g)| a * f + b * g).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    /// Largest |f - g| and where it occurs.
    pub fn max_discrepancy(&self, other: &SphereDistribution) -> Result<(f64, Direction)> {
        self.check_same_grid(other)?;
        let (i, v) = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(f, g)| (f - g).abs())
            .enumerate()
            .fold((0, -1.0), |best, (i, v)| if v > best.1 { (i, v) } else { best });
        Ok((v, self.grid.direction(i)))
    }

    /// ∫ sqrt(f g) dΩ with negative samples clipped to zero.
    pub fn overlap_with_diagnostics(&self, other: &SphereDistribution) -> Result<Overlap> {
        self.check_same_grid(other)?;
        let mut value = 0.0;
        let mut clipped_mass = 0.0;
        let n_phi = self.grid.n_phi();
        for (r, ring) in self.grid.rings().iter().enumerate() {
            let w = ring.node_weight;
            for k in r * n_phi..(r + 1) * n_phi {
                let (f, g) = (self.values[k], other.values[k]);
                if f < 0.0 {
                    clipped_mass -= w * f;
                }
                if g < 0.0 {
                    clipped_mass -= w * g;
                }
                value += w * libm::sqrt(f.max(0.0) * g.max(0.0));
            }
        }
        if clipped_mass > MAX_CLIPPED_MASS {
            return Err(Error::ClippedMass { mass: clipped_mass });
        }
        Ok(Overlap { value, clipped_mass })
    }

    pub fn overlap(&self, other: &SphereDistribution) -> Result<f64> {
        self.overlap_with_diagnostics(other).map(|o| o.value)
    }

    /// ∫ f(Ω) |Ω><Ω| dΩ for spin-j coherent states.
    pub fn coherent_frame_operator(&self, space: SpinSpace) -> CMatrix {
        frame_operator(space, &self.grid, &self.values)
    }
}

/// (2j+1)/4π ∫_region |Ω><Ω| dΩ by quadrature, returned as its diagonal.
///
/// Only exact when the grid breaks include the region edges; used as an
/// independent route to the analytic POVM weights.
pub fn region_frame_diagonal(space: SpinSpace, grid: &SphereGrid, region: &PolarRegion) -> Vec<f64> {
    frame_weights(space, grid, |x| region.contains_cos(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn region_partition_sums_to_total() {
        let g = Arc::new(SphereGrid::new(20, &[0.0, 0.4]).unwrap());
        let f = SphereDistribution::from_fn(g.clone(), |d| 1.0 + libm::cos(d.theta()) + libm::sin(d.phi()));
        let parts = [
            PolarRegion::from_cos_bands(alloc::vec![(-1.0, 0.0)]),
            PolarRegion::from_cos_bands(alloc::vec![(0.0, 0.4)]),
            PolarRegion::from_cos_bands(alloc::vec![(0.4, 1.0)]),
        ];
        let sum: f64 = parts.iter().map(|p| f.integrate_region(p)).sum();
        assert!((sum - f.integral()).abs() < 1e-12);
        let uniform = SphereDistribution::from_fn(g, |_| 1.0 / (4.0 * PI));
        assert!((uniform.integrate_region(&PolarRegion::northern_hemisphere()) - 0.5).abs() < 1e-14);
        let halves = uniform.integrate_region(&PolarRegion::northern_hemisphere())
            + uniform.integrate_region(&PolarRegion::southern_hemisphere());
        assert!((halves - 1.0).abs() < 1e-14);
    }

    #[test]
    fn overlap_rejects_other_grids_and_negative_mass() {
        let g1 = Arc::new(SphereGrid::new(8, &[]).unwrap());
        let g2 = Arc::new(SphereGrid::new(10, &[]).unwrap());
        let a = SphereDistribution::from_fn(g1.clone(), |_| 1.0 / (4.0 * PI));
        let b = SphereDistribution::from_fn(g2, |_| 1.0 / (4.0 * PI));
        assert_eq!(a.overlap(&b), Err(Error::GridMismatch));
        assert!((a.overlap(&a).unwrap() - 1.0).abs() < 1e-14);
        let neg = SphereDistribution::from_fn(g1, |d| libm::cos(d.theta()));
        assert!(matches!(a.overlap(&neg), Err(Error::ClippedMass { .. })));
    }
}
