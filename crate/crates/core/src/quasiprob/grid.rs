use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::special::gauss_legendre;
use crate::spin::{Direction, SpinSpace};
use crate::{Error, Result};

/// One polar ring of a product grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Ring {
    pub theta: f64,
    pub cos_theta: f64,
    /// Weight of every node on this ring (polar weight times 2 pi / n_phi).
    pub node_weight: f64,
}

/// Product quadrature on the sphere: Gauss-Legendre in cos(theta) on each
/// polar band between consecutive breaks, uniform in phi.
///
/// Integrates spherical polynomials of degree up to `band_limit` exactly.
/// Breaks let region integrals over polar bands stay exact; a node never
/// sits on a break.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereGrid {
    band_limit: usize,
    n_phi: usize,
    breaks: Vec<f64>,
    rings: Vec<Ring>,
}

/// Default grid for a spin space: band limit 2 (2j) oversample.
pub fn make_grid(space: SpinSpace, oversample: u32) -> Result<SphereGrid> {
    SphereGrid::for_space(space, oversample, &[])
}

impl SphereGrid {
    /// Band-limited product grid with optional interior cos(theta) breaks.
    pub fn new(band_limit: usize, cos_breaks: &[f64]) -> Result<Self> {
        let band_limit = band_limit.max(1);
        let mut breaks = Vec::with_capacity(cos_breaks.len() + 2);
        breaks.push(-1.0);
        let mut interior: Vec<f64> = cos_breaks.to_vec();
        interior.sort_by(f64::total_cmp);
        for b in interior {
            if !b.is_finite() || b <= -1.0 || b >= 1.0 {
                return Err(Error::InvalidParameter(alloc::format!("break cos(theta) = {b} not inside (-1, 1)")));
            }
            if b - breaks[breaks.len() - 1] > 1e-14 {
                breaks.push(b);
            }
        }
        breaks.push(1.0);

        let n_theta = band_limit / 2 + 1;
        let n_phi = band_limit + 1;
        let mut rings = Vec::with_capacity(n_theta * (breaks.len() - 1));
        for w in breaks.windows(2) {
            let (xs, ws) = gauss_legendre(n_theta, w[0], w[1]);
            for (x, wx) in xs.into_iter().zip(ws) {
                rings.push(Ring { theta: libm::acos(x.clamp(-1.0, 1.0)), cos_theta: x, node_weight: wx * TAU / n_phi as f64 });
            }
        }
        Ok(Self { band_limit, n_phi, breaks, rings })
    }

    /// Grid sized for products of two spin-j coherent-state symbols.
    pub fn for_space(space: SpinSpace, oversample: u32, cos_breaks: &[f64]) -> Result<Self> {
        if oversample == 0 {
            return Err(Error::InvalidParameter("oversample must be >= 1".into()));
        }
        Self::new(2 * space.two_j() as usize * oversample as usize, cos_breaks)
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    /// cos(theta) breaks, ascending, including -1 and 1.
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn len(&self) -> usize {
        self.rings.len() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn phi(&self, l: usize) -> f64 {
        TAU * l as f64 / self.n_phi as f64
    }

    /// Nodes in storage order (ring-major).
    pub fn nodes(&self) -> impl Iterator<Item = (Direction, f64)> + '_ {
        self.rings.iter().flat_map(move |ring| {
            (0..self.n_phi).map(move |l| {
                let theta = ring.theta.clamp(0.0, PI);
                (Direction::new(theta, self.phi(l)).unwrap_or(Direction::NORTH), ring.node_weight)
            })
        })
    }

    pub fn direction(&self, node: usize) -> Direction {
        let ring = &self.rings[node / self.n_phi];
        Direction::new(ring.theta.clamp(0.0, PI), self.phi(node % self.n_phi)).unwrap_or(Direction::NORTH)
    }

    pub fn weight(&self, node: usize) -> f64 {
        self.rings[node / self.n_phi].node_weight
    }

    /// True when every given cos(theta) value is one of the grid breaks.
    pub fn is_aligned_with(&self, cos_cuts: &[f64]) -> bool {
        cos_cuts.iter().all(|c| self.breaks.iter().any(|b| (b - c).abs() < 1e-12))
    }

    pub(crate) fn same_as(&self, other: &SphereGrid) -> bool {
        core::ptr::eq(self, other) || self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(grid: &SphereGrid, f: impl Fn(Direction) -> f64) -> f64 {
        grid.nodes().map(|(d, w)| w * f(d)).sum()
    }

    #[test]
    fn constant_and_cos_squared() {
        let grid = make_grid(SpinSpace::new(6).unwrap(), 2).unwrap();
        assert!((integrate(&grid, |_| 1.0) - 4.0 * PI).abs() < 1e-12);
        let c2 = integrate(&grid, |d| libm::pow(libm::cos(d.theta()), 2.0));
        assert!((c2 - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_up_to_band_limit() {
        // x^a y^b z^c monomials of total degree <= band limit.
        let grid = SphereGrid::new(12, &[0.3]).unwrap();
        let exact = |a: u32, b: u32, c: u32| -> f64 {
            if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
                return 0.0;
            }
            // 2 Gamma(A)Gamma(B)Gamma(C)/Gamma(A+B+C), with A=(a+1)/2 ...
            let g = crate::special::ln_gamma;
            let (aa, bb, cc) = ((a as f64 + 1.0) / 2.0, (b as f64 + 1.0) / 2.0, (c as f64 + 1.0) / 2.0);
            2.0 * libm::exp(g(aa) + g(bb) + g(cc) - g(aa + bb + cc))
        };
        for a in 0..=6 {
            for b in 0..=6 - a {
                for c in 0..=12 - a - b {
                    let q = integrate(&grid, |d| {
                        let [x, y, z] = d.unit_vector();
                        libm::pow(x, a as f64) * libm::pow(y, b as f64) * libm::pow(z, c as f64)
                    });
                    assert!((q - exact(a, b, c)).abs() < 1e-11, "({a},{b},{c}): {q}");
                }
            }
        }
    }

    #[test]
    fn breaks_are_respected() {
        let grid = SphereGrid::new(8, &[0.5, -0.25]).unwrap();
        assert_eq!(grid.breaks(), [-1.0, -0.25, 0.5, 1.0]);
        assert!(grid.is_aligned_with(&[0.5]));
        assert!(!grid.is_aligned_with(&[0.0]));
        assert!(grid.rings().iter().all(|r| r.cos_theta != 0.5 && r.cos_theta != -0.25));
        assert!(SphereGrid::new(8, &[1.0]).is_err());
    }
}
