//! Spin coherent states |theta, phi>.
//!
//! Phase convention: <k|Omega> = sqrt(C(2j, j+k)) cos^{j+k}(theta/2)
//! sin^{j-k}(theta/2) e^{i (j-k) phi}, so the north pole is |+j> with
//! phase +1. This differs from exp(-i phi Jz) exp(-i theta Jy)|+j> only by
//! the global phase e^{i j phi}.

use alloc::vec::Vec;

use super::{Direction, SpinSpace, StateVector};
use crate::special::{ln_binomial, sqrt_binomials};
use crate::C64;

/// x^p with 0^0 = 1, evaluated as exp(p ln x).
#[inline]
fn log_pow(ln_x: f64, p: u32) -> f64 {
    if p == 0 {
        0.0
    } else {
        p as f64 * ln_x
    }
}

/// Above this 2j the binomials no longer fit a double and the moduli are
/// built entirely in log space.
const DIRECT_MAX_TWO_J: u32 = 1000;

fn log_moduli(two_j: u32, theta: f64) -> Vec<f64> {
    let ln_c = libm::log(libm::cos(0.5 * theta).abs());
    let ln_s = libm::log(libm::sin(0.5 * theta).abs());
    (0..=two_j)
        .map(|i| libm::exp(0.5 * ln_binomial(two_j, i) + log_pow(ln_c, i) + log_pow(ln_s, two_j - i)))
        .collect()
}

/// Real moduli |<i|theta, .>| for every basis index.
///
/// Uses exact or multiplicative binomials while they are representable,
/// which keeps the relative error at a few ulp; the log-gamma route takes
/// over for very large j.
pub fn coherent_moduli(space: SpinSpace, theta: f64) -> Vec<f64> {
    let two_j = space.two_j();
    if two_j > DIRECT_MAX_TWO_J {
        return log_moduli(two_j, theta);
    }
    let (c, s) = (libm::cos(0.5 * theta).abs(), libm::sin(0.5 * theta).abs());
    sqrt_binomials(two_j)
        .into_iter()
        .enumerate()
        .map(|(i, b)| b * libm::pow(c, i as f64) * libm::pow(s, (two_j - i as u32) as f64))
        .collect()
}

/// <index|Omega>
pub fn coherent_amplitude(space: SpinSpace, index: usize, dir: Direction) -> C64 {
    debug_assert!(index < space.dim());
    let modulus = coherent_moduli(space, dir.theta())[index];
    C64::from_polar(modulus, (space.two_j() as usize - index) as f64 * dir.phi())
}

/// |Omega>, renormalized to absorb log-gamma rounding.
pub fn coherent_state(space: SpinSpace, dir: Direction) -> StateVector {
    let two_j = space.two_j();
    let moduli = coherent_moduli(space, dir.theta());
    let amps: Vec<C64> = moduli
        .iter()
        .enumerate()
        .map(|(i, r)| C64::from_polar(*r, (two_j - i as u32) as f64 * dir.phi()))
        .collect();
    let norm = libm::sqrt(amps.iter().map(|a| a.norm_sqr()).sum::<f64>());
    StateVector::from_raw(space, amps.into_iter().map(|a| a / norm).collect())
}
