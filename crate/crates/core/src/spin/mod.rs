//! Spin-j Hilbert space in the Dicke basis.
//!
//! Basis index `i` runs from 0 to 2j and labels the J_z eigenvalue
//! `m = i - j`, so index 0 is |-j> and index 2j is |+j>.

mod coherent;
mod hamiltonian;
mod operators;
mod propagator;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

pub use coherent::{coherent_amplitude, coherent_moduli, coherent_state};
pub use hamiltonian::{build_hamiltonian, Axis, HamiltonianSpec};
pub use operators::{build_operators, SpinOperators};
pub use propagator::{diagonalize, Evolve, Propagator, Survival};

use crate::{CMatrix, Error, Result, C64};

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Spin length j, stored as the integer 2j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpinSpace {
    two_j: u32,
}

impl SpinSpace {
    pub fn new(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Self { two_j })
    }

    /// Accepts integer or half-integer `j >= 1/2`.
    pub fn from_j(j: f64) -> Result<Self> {
        let two_j = 2.0 * j;
        if !two_j.is_finite() || two_j < 1.0 || (two_j - libm::round(two_j)).abs() > 1e-9 {
            return Err(Error::InvalidSpin(j));
        }
        Self::new(libm::round(two_j) as u32)
    }

    /// Space spanned by the Dicke states that come from `dim` levels.
    pub fn from_dim(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpin((dim as f64 - 1.0) / 2.0));
        }
        Self::new(dim as u32 - 1)
    }

    #[inline]
    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    #[inline]
    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// J_z eigenvalue of basis index `i`.
    #[inline]
    pub fn m(&self, i: usize) -> f64 {
        i as f64 - self.j()
    }

    /// Basis index of eigenvalue `m`, if `m` is a valid level.
    pub fn index_of(&self, m: f64) -> Option<usize> {
        let i = m + self.j();
        let r = libm::round(i);
        if (i - r).abs() > 1e-9 || r < 0.0 || r > self.two_j as f64 {
            return None;
        }
        Some(r as usize)
    }

    /// Index of |+j>.
    #[inline]
    pub fn top(&self) -> usize {
        self.two_j as usize
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found });
        }
        Ok(())
    }
}

/// A point on the unit sphere: polar angle `theta` in [0, pi] and azimuth
/// `phi` in [0, 2 pi).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    /// `phi` is wrapped into [0, 2 pi); `theta` outside [0, pi] is rejected.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidDirection { theta, phi });
        }
        let mut phi = phi % TAU;
        if phi < 0.0 {
            phi += TAU;
        }
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self { theta, phi })
    }

    pub const NORTH: Direction = Direction { theta: 0.0, phi: 0.0 };
    pub const SOUTH: Direction = Direction { theta: PI, phi: 0.0 };

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = libm::sincos(self.theta);
        let (sp, cp) = libm::sincos(self.phi);
        [st * cp, st * sp, ct]
    }

    /// Direction of a non-zero vector.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let r = libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if !(r > 0.0) {
            return Err(Error::InvalidDirection { theta: f64::NAN, phi: f64::NAN });
        }
        let theta = libm::acos((v[2] / r).clamp(-1.0, 1.0));
        let phi = libm::atan2(v[1], v[0]);
        Self::new(theta, phi)
    }

    /// Great-circle angle to another direction.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        libm::acos(dot.clamp(-1.0, 1.0))
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: SpinSpace,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(space: SpinSpace, amplitudes: Vec<C64>) -> Result<Self> {
        space.check_dim(amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { space, amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(space: SpinSpace, mut amplitudes: Vec<C64>) -> Result<Self> {
        space.check_dim(amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm_sqr > 0.0) || !norm_sqr.is_finite() {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let inv = 1.0 / libm::sqrt(norm_sqr);
        for a in &mut amplitudes {
            *a *= inv;
        }
        Ok(Self { space, amplitudes })
    }

    /// Dicke state with basis index `i`.
    pub fn basis(space: SpinSpace, i: usize) -> Result<Self> {
        if i >= space.dim() {
            return Err(Error::InvalidParameter(format!("basis index {i} out of range")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); space.dim()];
        amplitudes[i] = C64::new(1.0, 0.0);
        Ok(Self { space, amplitudes })
    }

    /// Dicke state |m>.
    pub fn dicke(space: SpinSpace, m: f64) -> Result<Self> {
        let i = space
            .index_of(m)
            .ok_or_else(|| Error::InvalidParameter(format!("m = {m} is not a level of j = {}", space.j())))?;
        Self::basis(space, i)
    }

    pub(crate) fn from_raw(space: SpinSpace, amplitudes: Vec<C64>) -> Self {
        Self { space, amplitudes }
    }

    pub fn space(&self) -> SpinSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// <self|other>
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn expectation(&self, op: &CMatrix) -> C64 {
        op.expectation(&self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::pure(self)
    }
}

/// Density operator with coefficients c_{nn'} in the Dicke basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: SpinSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(space: SpinSpace, matrix: CMatrix) -> Result<Self> {
        space.check_dim(matrix.dim())?;
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidDensity(format!("trace = {tr}")));
        }
        let (evals, _) = matrix.eigh(HERMITIAN_TOL)?;
        if let Some(min) = evals.first() {
            if *min < -POSITIVITY_TOL {
                return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(Self { space, matrix: matrix.hermitian_part() })
    }

    pub fn pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        Self { space: state.space(), matrix: CMatrix::outer(a, a) }
    }

    pub fn maximally_mixed(space: SpinSpace) -> Self {
        let d = space.dim();
        Self { space, matrix: CMatrix::identity(d).scale_real(1.0 / d as f64) }
    }

    /// Convex combination of pure states.
    pub fn mixture(space: SpinSpace, parts: &[(f64, &StateVector)]) -> Result<Self> {
        let mut m = CMatrix::zeros(space.dim());
        for (w, s) in parts {
            space.check_dim(s.amplitudes().len())?;
            if *w < 0.0 {
                return Err(Error::InvalidDensity(format!("negative weight {w}")));
            }
            m = &m + &CMatrix::outer(s.amplitudes(), s.amplitudes()).scale_real(*w);
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidDensity(format!("weights sum to {tr}")));
        }
        Ok(Self { space, matrix: m })
    }

    /// Skips validation; for operations already known to preserve validity.
    pub(crate) fn from_raw(space: SpinSpace, matrix: CMatrix) -> Self {
        Self { space, matrix }
    }

    pub fn space(&self) -> SpinSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Tr[rho A]
    pub fn expectation(&self, op: &CMatrix) -> C64 {
        let n = self.matrix.dim();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..n {
            for c in 0..n {
                acc += self.matrix[(r, c)] * op[(c, r)];
            }
        }
        acc
    }

    /// Diagonal populations rho_kk.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.matrix.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Trace distance (1/2)||rho - sigma||_1.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        let diff = &self.matrix - &other.matrix;
        let (evals, _) = diff.hermitian_part().eigh(1e-9)?;
        Ok(0.5 * evals.iter().map(|e| e.abs()).sum::<f64>())
    }
}
