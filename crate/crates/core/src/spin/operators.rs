use super::SpinSpace;
use crate::{CMatrix, C64};

/// Collective spin components for one spin length.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
    pub j_plus: CMatrix,
    pub j_minus: CMatrix,
}

impl SpinOperators {
    /// n_x Jx + n_y Jy + n_z Jz
    pub fn along(&self, n: [f64; 3]) -> CMatrix {
        &(&self.jx.scale_real(n[0]) + &self.jy.scale_real(n[1])) + &self.jz.scale_real(n[2])
    }
}

/// <m+1|J+|m>
pub(crate) fn raising_element(space: SpinSpace, i: usize) -> f64 {
    let j = space.j();
    let m = space.m(i);
    libm::sqrt((j * (j + 1.0) - m * (m + 1.0)).max(0.0))
}

pub fn build_operators(space: SpinSpace) -> SpinOperators {
    let d = space.dim();
    let jz = CMatrix::from_fn(d, |r, c| if r == c { C64::new(space.m(r), 0.0) } else { C64::new(0.0, 0.0) });
    let j_plus = CMatrix::from_fn(d, |r, c| {
        if r == c + 1 {
            C64::new(raising_element(space, c), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let j_minus = j_plus.adjoint();
    let jx = (&j_plus + &j_minus).scale_real(0.5);
    // (J+ - J-) / 2i
    let jy = (&j_plus - &j_minus).scale(C64::new(0.0, -0.5));
    SpinOperators { jx, jy, jz, j_plus, j_minus }
}
