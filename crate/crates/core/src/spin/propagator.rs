use alloc::vec::Vec;

use super::{DensityMatrix, SpinSpace, StateVector, HERMITIAN_TOL};
use crate::{CMatrix, Result, C64};

/// Spectral form of a Hamiltonian: U_t = V diag(e^{-i E t}) V†.
#[derive(Clone, Debug)]
pub struct Propagator {
    space: SpinSpace,
    energies: Vec<f64>,
    vectors: CMatrix,
    vectors_adj: CMatrix,
}

pub fn diagonalize(h: &CMatrix) -> Result<Propagator> {
    let space = SpinSpace::from_dim(h.dim())?;
    let (energies, vectors) = h.eigh(HERMITIAN_TOL)?;
    let vectors_adj = vectors.adjoint();
    Ok(Propagator { space, energies, vectors, vectors_adj })
}

/// p(t) = |<psi0|psi(t)>|^2 together with the amplitude and its argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Survival {
    pub amplitude: C64,
    pub probability: f64,
    pub phase: f64,
}

impl Propagator {
    pub fn space(&self) -> SpinSpace {
        self.space
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.vectors
    }

    /// V diag(E) V†
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_real_diagonal(&self.energies);
        &(&self.vectors * &d) * &self.vectors_adj
    }

    fn phases(&self, t: f64) -> Vec<C64> {
        self.energies.iter().map(|e| C64::from_polar(1.0, -e * t)).collect()
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        let ph = self.phases(t);
        let n = self.space.dim();
        let scaled = CMatrix::from_fn(n, |r, c| self.vectors[(r, c)] * ph[c]);
        &scaled * &self.vectors_adj
    }

    pub fn evolve_amplitudes(&self, amps: &[C64], t: f64) -> Vec<C64> {
        let ph = self.phases(t);
        let mut coeffs = self.vectors_adj.mul_vec(amps);
        for (c, p) in coeffs.iter_mut().zip(&ph) {
            *c *= p;
        }
        self.vectors.mul_vec(&coeffs)
    }

    pub fn evolve<S: Evolve>(&self, state: &S, t: f64) -> S {
        state.evolved(self, t)
    }

    pub fn survival(&self, psi0: &StateVector, t: f64) -> Survival {
        let psi_t = self.evolve_amplitudes(psi0.amplitudes(), t);
        let amplitude: C64 = psi0.amplitudes().iter().zip(&psi_t).map(|(a, b)| a.conj() * b).sum();
        Survival { amplitude, probability: amplitude.norm_sqr().min(1.0), phase: amplitude.arg() }
    }
}

/// States that can be pushed through a propagator.
pub trait Evolve: Sized {
    fn evolved(&self, p: &Propagator, t: f64) -> Self;
}

impl Evolve for StateVector {
    fn evolved(&self, p: &Propagator, t: f64) -> Self {
        StateVector::from_raw(self.space(), p.evolve_amplitudes(self.amplitudes(), t))
    }
}

impl Evolve for DensityMatrix {
    fn evolved(&self, p: &Propagator, t: f64) -> Self {
        if t == 0.0 {
            return self.clone();
        }
        let u = p.unitary(t);
        let m = &(&u * self.matrix()) * &u.adjoint();
        DensityMatrix::from_raw(self.space(), m.hermitian_part())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{build_hamiltonian, coherent_state, Axis, Direction, HamiltonianSpec};
    use core::f64::consts::PI;

    #[test]
    fn cat_flip_spectrum() {
        let s = SpinSpace::new(10).unwrap();
        let h = build_hamiltonian(&HamiltonianSpec::CatFlip { omega: 0.8 }, s).unwrap();
        let p = diagonalize(&h).unwrap();
        let e = p.energies();
        assert!((e[0] + 0.8).abs() < 1e-14 && (e[10] - 0.8).abs() < 1e-14);
        assert!(e[1..10].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn zero_time_is_identity() {
        let s = SpinSpace::new(5).unwrap();
        let h = build_hamiltonian(&HamiltonianSpec::Rotation { axis: Axis::Y, omega: 1.3 }, s).unwrap();
        let p = diagonalize(&h).unwrap();
        assert!(p.unitary(0.0).max_abs_diff(&CMatrix::identity(6)) < 1e-14);
    }

    #[test]
    fn cat_flip_quarter_period_reaches_bottom() {
        let s = SpinSpace::new(8).unwrap();
        let omega = 1.7;
        let p = diagonalize(&build_hamiltonian(&HamiltonianSpec::CatFlip { omega }, s).unwrap()).unwrap();
        let top = StateVector::basis(s, s.top()).unwrap();
        let half = p.evolve(&top, PI / (4.0 * omega));
        let a = half.amplitudes();
        assert!((a[s.top()].re - libm::sqrt(0.5)).abs() < 1e-12);
        assert!((a[0].re - libm::sqrt(0.5)).abs() < 1e-12);
        let end = p.evolve(&top, PI / (2.0 * omega));
        assert!((end.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_level_survival() {
        let s = SpinSpace::new(3).unwrap();
        let de = 0.9;
        let p = diagonalize(&build_hamiltonian(&HamiltonianSpec::TwoLevel { delta_e: de, lower: 0, upper: 2 }, s).unwrap())
            .unwrap();
        let mut amps = alloc::vec![C64::new(0.0, 0.0); 4];
        amps[0] = C64::new(libm::sqrt(0.5), 0.0);
        amps[2] = C64::new(libm::sqrt(0.5), 0.0);
        let psi0 = StateVector::new(s, amps).unwrap();
        for t in [0.0, 0.4, 2.0, 7.7] {
            let sv = p.survival(&psi0, t);
            let c = libm::cos(de * t / 2.0);
            assert!((sv.probability - c * c).abs() < 1e-13);
        }
        let s0 = p.survival(&psi0, 0.0);
        assert!((s0.probability - 1.0).abs() < 1e-14 && s0.phase.abs() < 1e-14);
        let eigen = StateVector::basis(s, 2).unwrap();
        assert!((p.survival(&eigen, 3.3).probability - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_keeps_coherent_states_coherent() {
        let s = SpinSpace::new(10).unwrap();
        let omega = 1.0;
        let p = diagonalize(&build_hamiltonian(&HamiltonianSpec::Rotation { axis: Axis::X, omega }, s).unwrap()).unwrap();
        let d0 = Direction::new(0.6, 0.9).unwrap();
        let t = 0.8;
        let psi = p.evolve(&coherent_state(s, d0), t);
        // Classical precession about x by angle omega t: (y, z) rotate counter-clockwise.
        let [x, y, z] = d0.unit_vector();
        let (sn, cs) = libm::sincos(omega * t);
        let d1 = Direction::from_vector([x, y * cs - z * sn, y * sn + z * cs]).unwrap();
        assert!((psi.fidelity(&coherent_state(s, d1)) - 1.0).abs() < 1e-12);
    }
}
