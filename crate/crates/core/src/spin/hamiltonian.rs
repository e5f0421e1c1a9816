use alloc::format;

use super::{build_operators, SpinSpace, HERMITIAN_TOL};
use crate::{CMatrix, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Generator of the dynamics (hbar = 1).
#[derive(Clone, Debug, PartialEq)]
pub enum HamiltonianSpec {
    /// H = omega J_axis
    Rotation { axis: Axis, omega: f64 },
    /// H = i omega (|-j><+j| - |+j><-j|), which maps |+j> to
    /// cos(omega t)|+j> + sin(omega t)|-j>.
    CatFlip { omega: f64 },
    /// Diagonal: level `lower` at energy 0, level `upper` at `delta_e`,
    /// every other level at 0.
    TwoLevel { delta_e: f64, lower: usize, upper: usize },
    Custom(CMatrix),
}

pub fn build_hamiltonian(spec: &HamiltonianSpec, space: SpinSpace) -> Result<CMatrix> {
    let d = space.dim();
    let finite = |x: f64, name: &str| {
        if x.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidHamiltonian(format!("{name} must be finite")))
        }
    };
    match spec {
        HamiltonianSpec::Rotation { axis, omega } => {
            finite(*omega, "omega")?;
            let ops = build_operators(space);
            let j = match axis {
                Axis::X => ops.jx,
                Axis::Y => ops.jy,
                Axis::Z => ops.jz,
            };
            Ok(j.scale_real(*omega))
        }
        HamiltonianSpec::CatFlip { omega } => {
            finite(*omega, "omega")?;
            let mut h = CMatrix::zeros(d);
            let (bottom, top) = (0, space.top());
            h[(bottom, top)] = C64::new(0.0, *omega);
            h[(top, bottom)] = C64::new(0.0, -*omega);
            Ok(h)
        }
        HamiltonianSpec::TwoLevel { delta_e, lower, upper } => {
            finite(*delta_e, "delta_e")?;
            if lower == upper || *lower >= d || *upper >= d {
                return Err(Error::InvalidHamiltonian(format!(
                    "two-level indices ({lower}, {upper}) invalid for dimension {d}"
                )));
            }
            let mut h = CMatrix::zeros(d);
            h[(*upper, *upper)] = C64::new(*delta_e, 0.0);
            Ok(h)
        }
        HamiltonianSpec::Custom(m) => {
            space.check_dim(m.dim())?;
            let deviation = m.hermitian_deviation();
            if deviation > HERMITIAN_TOL {
                return Err(Error::NotHermitian { deviation });
            }
            if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidHamiltonian("non-finite entry".into()));
            }
            Ok(m.hermitian_part())
        }
    }
}
