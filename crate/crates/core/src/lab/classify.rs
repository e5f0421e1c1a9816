use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::conditions::{slot_capture, DEFAULT_EPSILON_THRESHOLD};
use crate::measure::{band_weights, SlotPartition};
use crate::spin::{build_hamiltonian, coherent_state, diagonalize, Direction, HamiltonianSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    /// Largest ε a classical Hamiltonian may reach on any kept sample.
    pub threshold: f64,
    /// Half-width in θ of the border zone around each slot boundary;
    /// `None` means 2/sqrt(j).
    pub border_radius: Option<f64>,
    /// Samples whose evolved POVM mass inside the border zone exceeds this
    /// are excluded.
    pub border_mass: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { threshold: DEFAULT_EPSILON_THRESHOLD, border_radius: None, border_mass: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Classification {
    pub classical: bool,
    pub max_epsilon: f64,
    pub mean_epsilon: f64,
    pub worst_time: f64,
    pub worst_direction: Direction,
    /// Samples that entered the statistics.
    pub samples: usize,
    /// Samples dropped as border cases.
    pub excluded: usize,
    pub threshold: f64,
}

/// Directions on a θ-φ lattice; θ runs over `n_theta` equally spaced values
/// from 0 to π inclusive and each pole appears once.
pub fn direction_samples(n_theta: usize, n_phi: usize) -> Vec<Direction> {
    let mut out = Vec::new();
    if n_theta == 0 || n_phi == 0 {
        return out;
    }
    if n_theta == 1 {
        out.push(Direction::NORTH);
        return out;
    }
    for i in 0..n_theta {
        let theta = PI * i as f64 / (n_theta - 1) as f64;
        if i == 0 || i == n_theta - 1 {
            out.push(if i == 0 { Direction::NORTH } else { Direction::SOUTH });
            continue;
        }
        for l in 0..n_phi {
            let phi = 2.0 * PI * l as f64 / n_phi as f64;
            out.push(Direction::new(theta, phi).expect("lattice direction"));
        }
    }
    out
}

/// POVM weight per Dicke level of the union of bands θ_c ± radius.
fn border_weights(partition: &SlotPartition, radius: f64) -> Vec<f64> {
    let space = partition.space();
    let mut bands: Vec<(f64, f64)> = partition
        .cos_cuts()
        .iter()
        .map(|&c| {
            let t = libm::acos(c.clamp(-1.0, 1.0));
            (libm::cos((t + radius).min(PI)), libm::cos((t - radius).max(0.0)))
        })
        .collect();
    bands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for b in bands {
        match merged.last_mut() {
            Some(last) if b.0 <= last.1 => last.1 = last.1.max(b.1),
            _ => merged.push(b),
        }
    }
    let mut w = alloc::vec![0.0; space.dim()];
    for (lo, hi) in merged {
        for (acc, x) in w.iter_mut().zip(band_weights(space, lo, hi)) {
            *acc += x;
        }
    }
    w
}

/// Samples ε = 1 - max_m̄ <psi|P_m̄|psi> over `times` × `directions` and
/// calls the Hamiltonian classical when every kept sample stays within
/// the threshold.
pub fn classify_hamiltonian(
    spec: &HamiltonianSpec,
    partition: &SlotPartition,
    times: &[f64],
    directions: &[Direction],
    options: &ClassifyOptions,
) -> Result<Classification> {
    if times.is_empty() || directions.is_empty() {
        return Err(Error::InvalidParameter("need at least one time and one direction".into()));
    }
    if let Some(t) = times.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidTimes(format!("non-finite sample time {t}")));
    }
    if !(options.threshold.is_finite() && options.threshold >= 0.0) || !(0.0..=1.0).contains(&options.border_mass) {
        return Err(Error::InvalidParameter(format!(
            "threshold {} must be >= 0 and border mass {} in [0, 1]",
            options.threshold, options.border_mass
        )));
    }
    let space = partition.space();
    let radius = options.border_radius.unwrap_or(2.0 / libm::sqrt(space.j()));
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::InvalidParameter(format!("border radius {radius} must be finite and >= 0")));
    }
    let p = diagonalize(&build_hamiltonian(spec, space)?)?;
    let border = border_weights(partition, radius);
    let initial: Vec<_> = directions.iter().map(|&d| coherent_state(space, d)).collect();

    let mut worst = (f64::NEG_INFINITY, times[0], directions[0]);
    let (mut sum, mut kept, mut excluded) = (0.0, 0usize, 0usize);
    for &t in times {
        for (psi0, &dir) in initial.iter().zip(directions) {
            let pops: Vec<f64> = p.evolve_amplitudes(psi0.amplitudes(), t).iter().map(|a| a.norm_sqr()).collect();
            let mass: f64 = pops.iter().zip(&border).map(|(a, b)| a * b).sum();
            if mass > options.border_mass {
                excluded += 1;
                continue;
            }
            let (eps, _) = slot_capture(&pops, partition);
            sum += eps;
            kept += 1;
            if eps > worst.0 {
                worst = (eps, t, dir);
            }
        }
    }
    if kept == 0 {
        return Err(Error::InvalidParameter("every sample fell in the border zone".into()));
    }
    Ok(Classification {
        classical: worst.0 <= options.threshold,
        max_epsilon: worst.0,
        mean_epsilon: sum / kept as f64,
        worst_time: worst.1,
        worst_direction: worst.2,
        samples: kept,
        excluded,
        threshold: options.threshold,
    })
}
