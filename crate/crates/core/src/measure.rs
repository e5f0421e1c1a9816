//! Coarse-grained J_z measurements: slot partitions, their POVM elements
//! and the Hermitian square-root Kraus update.
//!
//! A slot collects the Dicke outcomes whose m lies in a set of m-space
//! intervals; on the sphere this is the polar band cos(theta) = m / j. The
//! weight g(k) of slot m̄ on |k> is (2j+1)/4π ∫ |<k|Ω>|² over the band,
//! which u = cos²(theta/2) turns into a difference of regularized incomplete
//! beta values.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::quasiprob::{q_function, PolarRegion, SphereGrid};
use crate::special::regularized_incomplete_beta;
use crate::spin::{DensityMatrix, SpinSpace};
use crate::{CMatrix, Error, Result};

/// Outcomes rarer than this are left out of the outcome list.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-14;

/// Disjoint m-space slots covering [-j, j].
#[derive(Clone, Debug, PartialEq)]
pub struct SlotPartition {
    space: SpinSpace,
    /// Interior cut points in m, strictly increasing inside (-j, j).
    cuts: Vec<f64>,
    /// Slot id of every elementary interval between consecutive cuts,
    /// ordered from m = -j upwards.
    labels: Vec<usize>,
    n_slots: usize,
    slot_size: Option<f64>,
    /// g[slot][k]
    g: Vec<Vec<f64>>,
}

/// Diagonal POVM element P_m̄ = Σ_k g_m̄(k) |k><k|.
#[derive(Clone, Debug, PartialEq)]
pub struct PovmElement {
    pub slot: usize,
    pub weights: Vec<f64>,
}

/// Diagonal Kraus operator M_m̄ = sqrt(P_m̄).
#[derive(Clone, Debug, PartialEq)]
pub struct KrausOperator {
    pub slot: usize,
    pub diagonal: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub slot: usize,
    pub probability: f64,
    pub state: DensityMatrix,
}

/// Result of one measurement. `dropped` lists slots whose probability fell
/// below [`MIN_OUTCOME_PROBABILITY`], with that probability.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub outcomes: Vec<MeasurementOutcome>,
    pub dropped: Vec<(usize, f64)>,
}

impl Measurement {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum::<f64>() + self.dropped.iter().map(|d| d.1).sum::<f64>()
    }

    pub fn probability_of(&self, slot: usize) -> f64 {
        self.outcomes
            .iter()
            .find(|o| o.slot == slot)
            .map(|o| o.probability)
            .or_else(|| self.dropped.iter().find(|d| d.0 == slot).map(|d| d.1))
            .unwrap_or(0.0)
    }
}

fn u_of(space: SpinSpace, m: f64) -> f64 {
    (0.5 * (1.0 + m / space.j())).clamp(0.0, 1.0)
}

/// Cumulative band weight I_u(i + 1, 2j - i + 1) for every Dicke index.
fn cumulative(space: SpinSpace, u: f64) -> Vec<f64> {
    let n = space.two_j() as f64;
    (0..space.dim())
        .map(|i| {
            let i = i as f64;
            regularized_incomplete_beta(i + 1.0, n - i + 1.0, u)
        })
        .collect()
}

/// (2j+1)/4π ∫ |<k|Ω>|² dΩ over the polar band cos(theta) ∈ [cos_lo, cos_hi],
/// for every Dicke index k.
pub fn band_weights(space: SpinSpace, cos_lo: f64, cos_hi: f64) -> Vec<f64> {
    let lo = cumulative(space, (0.5 * (1.0 + cos_lo)).clamp(0.0, 1.0));
    let hi = cumulative(space, (0.5 * (1.0 + cos_hi)).clamp(0.0, 1.0));
    hi.iter().zip(&lo).map(|(h, l)| (h - l).max(0.0)).collect()
}

impl SlotPartition {
    /// `n_slots` equal-width slots in m.
    pub fn uniform(space: SpinSpace, n_slots: usize) -> Result<Self> {
        if n_slots < 2 {
            return Err(Error::InvalidPartition(format!("need at least 2 slots, got {n_slots}")));
        }
        let width = 2.0 * space.j() / n_slots as f64;
        let cuts = (1..n_slots).map(|i| -space.j() + i as f64 * width).collect();
        let mut p = Self::from_cuts(space, cuts)?;
        p.slot_size = Some(width);
        Ok(p)
    }

    /// Slots of width close to `slot_size`: round(2j / Δm) equal slots.
    pub fn with_slot_size(space: SpinSpace, slot_size: f64) -> Result<Self> {
        let span = 2.0 * space.j();
        if !(slot_size > 0.0) || slot_size > span {
            return Err(Error::InvalidPartition(format!("slot size {slot_size} must lie in (0, 2j = {span}]")));
        }
        let n = libm::round(span / slot_size).max(1.0) as usize;
        if n == 1 {
            let mut p = Self::from_cuts(space, Vec::new())?;
            p.slot_size = Some(span);
            return Ok(p);
        }
        Self::uniform(space, n)
    }

    /// The dichotomic "which hemisphere" partition, cut at m = 0.
    pub fn hemispheres(space: SpinSpace) -> Self {
        Self::uniform(space, 2).expect("two slots are always valid")
    }

    /// One slot per Dicke level, cut at the half-integers between levels.
    pub fn fine_grained(space: SpinSpace) -> Self {
        let cuts = (1..space.dim()).map(|i| space.m(i) - 0.5).collect();
        let mut p = Self::from_cuts(space, cuts).expect("half-integer cuts are interior");
        p.slot_size = Some(1.0);
        p
    }

    /// Arbitrary interior cuts, one slot per interval.
    pub fn from_cuts(space: SpinSpace, cuts: Vec<f64>) -> Result<Self> {
        let labels = (0..=cuts.len()).collect();
        Self::with_labels(space, cuts, labels)
    }

    /// Cuts plus a slot id per interval; equal ids merge intervals into one
    /// slot, e.g. labels [0, 1, 0] put both polar caps in slot 0.
    pub fn with_labels(space: SpinSpace, cuts: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        let j = space.j();
        if cuts.iter().any(|c| !c.is_finite() || *c <= -j || *c >= j) {
            return Err(Error::InvalidPartition(format!("cuts must lie strictly inside (-{j}, {j})")));
        }
        if cuts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPartition("cuts must be strictly increasing".into()));
        }
        if labels.len() != cuts.len() + 1 {
            return Err(Error::InvalidPartition(format!(
                "{} intervals need {} labels, got {}",
                cuts.len() + 1,
                cuts.len() + 1,
                labels.len()
            )));
        }
        let n_slots = labels.iter().max().map_or(0, |m| m + 1);
        if (0..n_slots).any(|s| !labels.contains(&s)) {
            return Err(Error::InvalidPartition("slot ids must be 0..n without gaps".into()));
        }

        let mut bounds = Vec::with_capacity(cuts.len() + 2);
        bounds.push(vec![0.0; space.dim()]);
        for c in &cuts {
            bounds.push(cumulative(space, u_of(space, *c)));
        }
        bounds.push(vec![1.0; space.dim()]);
        let mut g = vec![vec![0.0; space.dim()]; n_slots];
        for (e, slot) in labels.iter().enumerate() {
            for (k, gk) in g[*slot].iter_mut().enumerate() {
                *gk += (bounds[e + 1][k] - bounds[e][k]).max(0.0);
            }
        }
        Ok(Self { space, cuts, labels, n_slots, slot_size: None, g })
    }

    pub fn space(&self) -> SpinSpace {
        self.space
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn slot_size(&self) -> Option<f64> {
        self.slot_size
    }

    /// Δm / sqrt(j), with Δm the uniform width or else the mean slot width.
    pub fn coarse_graining_ratio(&self) -> f64 {
        let dm = self.slot_size.unwrap_or(2.0 * self.space.j() / self.n_slots as f64);
        dm / libm::sqrt(self.space.j())
    }

    /// Cut points as cos(theta) = m / j.
    pub fn cos_cuts(&self) -> Vec<f64> {
        self.cuts.iter().map(|m| m / self.space.j()).collect()
    }

    /// Polar bands making up `slot`.
    pub fn slot_region(&self, slot: usize) -> PolarRegion {
        let cos = self.cos_cuts();
        let edge = |e: usize| if e == 0 { -1.0 } else if e > cos.len() { 1.0 } else { cos[e - 1] };
        let bands = self
            .labels
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == slot)
            .map(|(e, _)| (edge(e), edge(e + 1)))
            .collect();
        PolarRegion::from_cos_bands(bands)
    }

    /// Slot whose region contains the point with the given cos(theta).
    pub fn slot_of_cos(&self, cos_theta: f64) -> usize {
        let m = cos_theta * self.space.j();
        let e = self.cuts.iter().take_while(|c| m >= **c).count();
        self.labels[e]
    }

    pub fn is_dichotomic(&self) -> bool {
        self.n_slots == 2
    }

    /// The slot holding the top interval (m near +j); it carries A = +1 in
    /// a dichotomic protocol.
    pub fn plus_slot(&self) -> usize {
        self.labels[self.labels.len() - 1]
    }

    /// g_m̄(k), indexed [slot][k].
    pub fn g_weights(&self) -> &[Vec<f64>] {
        &self.g
    }

    pub fn povm_elements(&self) -> Vec<PovmElement> {
        self.g.iter().enumerate().map(|(slot, w)| PovmElement { slot, weights: w.clone() }).collect()
    }

    pub fn kraus_operators(&self) -> Vec<KrausOperator> {
        self.g
            .iter()
            .enumerate()
            .map(|(slot, w)| KrausOperator { slot, diagonal: w.iter().map(|g| libm::sqrt(*g)).collect() })
            .collect()
    }

    /// max |Σ_m̄ P_m̄ - 1| over the (diagonal) entries.
    pub fn completeness_error(&self) -> f64 {
        (0..self.space.dim())
            .map(|k| (self.g.iter().map(|g| g[k]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// A grid whose polar breaks sit on the slot borders.
    pub fn aligned_grid(&self, oversample: u32) -> Result<SphereGrid> {
        SphereGrid::for_space(self.space, oversample, &self.cos_cuts())
    }
}

impl PovmElement {
    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_real_diagonal(&self.weights)
    }

    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        rho.populations().iter().zip(&self.weights).map(|(p, g)| p * g).sum()
    }
}

impl KrausOperator {
    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_real_diagonal(&self.diagonal)
    }

    /// M ρ M, unnormalized.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let s = &self.diagonal;
        CMatrix::from_fn(rho.dim(), |r, c| rho[(r, c)] * (s[r] * s[c]))
    }
}

/// w_m̄ = Tr[ρ P_m̄] for every slot.
pub fn outcome_probabilities(rho: &DensityMatrix, partition: &SlotPartition) -> Result<Vec<f64>> {
    partition.space.check_dim(rho.space().dim())?;
    let pops = rho.populations();
    Ok(partition.g.iter().map(|g| pops.iter().zip(g).map(|(p, w)| p * w).sum()).collect())
}

/// Outcomes w_m̄ with post-measurement states M ρ M / w_m̄.
pub fn measure(rho: &DensityMatrix, partition: &SlotPartition) -> Result<Measurement> {
    let probs = outcome_probabilities(rho, partition)?;
    let mut outcomes = Vec::new();
    let mut dropped = Vec::new();
    for (kraus, w) in partition.kraus_operators().into_iter().zip(probs) {
        if w < MIN_OUTCOME_PROBABILITY {
            dropped.push((kraus.slot, w));
            continue;
        }
        let m = kraus.apply(rho.matrix()).scale_real(1.0 / w);
        outcomes.push(MeasurementOutcome {
            slot: kraus.slot,
            probability: w,
            state: DensityMatrix::from_raw(rho.space(), m.hermitian_part()),
        });
    }
    Ok(Measurement { outcomes, dropped })
}

/// Non-selective update Σ_m̄ M_m̄ ρ M_m̄.
pub fn decohere(rho: &DensityMatrix, partition: &SlotPartition) -> Result<DensityMatrix> {
    partition.space.check_dim(rho.space().dim())?;
    let kraus = partition.kraus_operators();
    let m = CMatrix::from_fn(rho.space().dim(), |r, c| {
        let damp: f64 = kraus.iter().map(|k| k.diagonal[r] * k.diagonal[c]).sum();
        rho.matrix()[(r, c)] * damp
    });
    Ok(DensityMatrix::from_raw(rho.space(), m))
}

/// Slot probabilities as Q-function integrals over the slot regions.
///
/// The grid must carry a polar break on every slot border so each band
/// integral stays exact.
pub fn classical_outcome_probs(
    rho: &DensityMatrix,
    partition: &SlotPartition,
    grid: &alloc::sync::Arc<SphereGrid>,
) -> Result<Vec<f64>> {
    partition.space.check_dim(rho.space().dim())?;
    if !grid.is_aligned_with(&partition.cos_cuts()) {
        return Err(Error::GridNotAligned);
    }
    let q = q_function(rho, grid);
    Ok((0..partition.n_slots).map(|s| q.integrate_region(&partition.slot_region(s))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasiprob::region_frame_diagonal;
    use crate::spin::{coherent_state, Direction, StateVector};
    use alloc::sync::Arc;
    use core::f64::consts::PI;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use crate::C64;

    fn kraus_matrix(k: &KrausOperator) -> CMatrix {
        let mut m = CMatrix::zeros(k.diagonal.len());
        for (i, s) in k.diagonal.iter().enumerate() {
            m[(i, i)] = C64::new(*s, 0.0);
        }
        m
    }


    fn random_density(space: SpinSpace, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let d = space.dim();
        let g = CMatrix::from_fn(d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = &g * &g.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new(space, m.scale_real(1.0 / tr).hermitian_part()).unwrap()
    }

    #[test]
    fn spin_one_hemisphere_weights() {
        let p = SlotPartition::hemispheres(SpinSpace::new(2).unwrap());
        assert_eq!(p.cuts(), [0.0]);
        let north = &p.g_weights()[p.plus_slot()];
        assert!((north[2] - 7.0 / 8.0).abs() < 1e-15);
        assert!((north[1] - 0.5).abs() < 1e-15);
        assert!((north[0] - 1.0 / 8.0).abs() < 1e-15);
        let region = p.slot_region(p.plus_slot());
        assert_eq!(region.cos_bands(), [(0.0, 1.0)]);
    }

    #[test]
    fn weights_match_quadrature_oracle() {
        // 1D Simpson rule over the band in u = cos²(theta/2).
        let space = SpinSpace::new(9).unwrap();
        let p = SlotPartition::from_cuts(space, alloc::vec![-2.2, 0.7, 3.1]).unwrap();
        let n = 9.0;
        for (slot, g) in p.g_weights().iter().enumerate() {
            let (lo, hi) = p.slot_region(slot).cos_bands()[0];
            let (ua, ub) = (0.5 * (1.0 + lo), 0.5 * (1.0 + hi));
            for (k, gk) in g.iter().enumerate() {
                let kf = k as f64;
                let binom = libm::exp(crate::special::ln_binomial(9, k as u32));
                let f = |u: f64| (n + 1.0) * binom * libm::pow(u, kf) * libm::pow(1.0 - u, n - kf);
                let steps = 2000;
                let h = (ub - ua) / steps as f64;
                let mut acc = f(ua) + f(ub);
                for s in 1..steps {
                    acc += f(ua + s as f64 * h) * if s % 2 == 1 { 4.0 } else { 2.0 };
                }
                assert!((acc * h / 3.0 - gk).abs() < 1e-12, "slot {slot}, k {k}");
            }
        }
        // and against the 2D sphere quadrature of the frame operator
        let grid = p.aligned_grid(2).unwrap();
        for slot in 0..p.n_slots() {
            let diag = region_frame_diagonal(space, &grid, &p.slot_region(slot));
            for (a, b) in diag.iter().zip(&p.g_weights()[slot]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_and_fine_grained_shapes() {
        let s = SpinSpace::new(100).unwrap();
        let p = SlotPartition::with_slot_size(s, 10.0).unwrap();
        assert_eq!(p.n_slots(), 10);
        assert!((p.coarse_graining_ratio() - 10.0 / libm::sqrt(50.0)).abs() < 1e-12);
        assert!(SlotPartition::with_slot_size(s, 101.0).is_err());
        assert!(SlotPartition::uniform(s, 1).is_err());
        let f = SlotPartition::fine_grained(s);
        assert_eq!(f.n_slots(), 101);
        // g concentrates around the matching level
        let centre = &f.g_weights()[50];
        let peak = centre.iter().copied().fold(0.0, f64::max);
        assert!((centre[50] - peak).abs() < 1e-15);
        assert!(SlotPartition::with_labels(s, alloc::vec![0.0], alloc::vec![0, 2]).is_err());
        assert!(SlotPartition::from_cuts(s, alloc::vec![1.0, 1.0]).is_err());
        assert!(SlotPartition::from_cuts(s, alloc::vec![50.0]).is_err());
    }

    #[test]
    fn large_spin_hemisphere_is_nearly_sharp() {
        let p = SlotPartition::hemispheres(SpinSpace::new(100).unwrap());
        let north = &p.g_weights()[p.plus_slot()];
        assert!((north[100] - (1.0 - libm::pow(0.5, 101.0))).abs() < 1e-15);
        assert!((north[100] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_partition_mirrors() {
        let s = SpinSpace::new(12).unwrap();
        let p = SlotPartition::from_cuts(s, alloc::vec![-3.5, -1.0, 1.0, 3.5]).unwrap();
        let g = p.g_weights();
        let n = p.n_slots();
        for slot in 0..n {
            for k in 0..s.dim() {
                assert!((g[slot][k] - g[n - 1 - slot][s.dim() - 1 - k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn kraus_squares_to_povm() {
        let p = SlotPartition::uniform(SpinSpace::new(15).unwrap(), 4).unwrap();
        for (m, e) in p.kraus_operators().iter().zip(p.povm_elements()) {
            let sq = &kraus_matrix(m) * &kraus_matrix(m);
            assert!(sq.max_abs_diff(&e.to_matrix()) < 1e-15);
            for (s, g) in m.diagonal.iter().zip(&e.weights) {
                assert!((s * s - g).abs() <= f64::EPSILON * g);
            }
        }
        let total = p.povm_elements().iter().fold(CMatrix::zeros(16), |acc, e| &acc + &e.to_matrix());
        assert!(total.max_abs_diff(&CMatrix::identity(16)) < 1e-12);
    }

    #[test]
    fn pole_state_and_mixed_state_probabilities() {
        let s = SpinSpace::new(2).unwrap();
        let p = SlotPartition::hemispheres(s);
        let top = DensityMatrix::pure(&StateVector::basis(s, 2).unwrap());
        let m = measure(&top, &p).unwrap();
        assert!((m.probability_of(p.plus_slot()) - 7.0 / 8.0).abs() < 1e-15);
        let mixed = outcome_probabilities(&DensityMatrix::maximally_mixed(s), &p).unwrap();
        assert!((mixed[0] - 0.5).abs() < 1e-15 && (mixed[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cat_state_collapses_to_poles() {
        let s = SpinSpace::new(40).unwrap();
        let p = SlotPartition::hemispheres(s);
        let (sup, _) = crate::quasiprob::cat_density_pair(s, PI / 4.0);
        let m = measure(&sup, &p).unwrap();
        assert_eq!(m.outcomes.len(), 2);
        for o in &m.outcomes {
            assert!((o.probability - 0.5).abs() < 1e-6);
            let pole = if o.slot == p.plus_slot() { 40 } else { 0 };
            let target = DensityMatrix::pure(&StateVector::basis(s, pole).unwrap());
            assert!(o.state.trace_distance(&target).unwrap() < 1e-6);
        }
        // decohered state is the weighted mixture of the branches
        let dec = decohere(&sup, &p).unwrap();
        let recomposed = m.outcomes.iter().fold(CMatrix::zeros(41), |acc, o| &acc + &o.state.matrix().scale_real(o.probability));
        assert!(dec.matrix().max_abs_diff(&recomposed) < 1e-14);
    }

    #[test]
    fn negligible_outcomes_are_flagged() {
        let s = SpinSpace::new(100).unwrap();
        let p = SlotPartition::uniform(s, 4).unwrap();
        let top = DensityMatrix::pure(&StateVector::basis(s, 100).unwrap());
        let m = measure(&top, &p).unwrap();
        assert!(!m.dropped.is_empty());
        assert!((m.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn q_route_reproduces_operator_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = SpinSpace::new(20).unwrap();
        let p = SlotPartition::uniform(s, 4).unwrap();
        let grid = Arc::new(p.aligned_grid(2).unwrap());
        for _ in 0..5 {
            let rho = random_density(s, &mut rng);
            let a = outcome_probabilities(&rho, &p).unwrap();
            let b = classical_outcome_probs(&rho, &p, &grid).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-8);
            }
        }
        let unaligned = Arc::new(SphereGrid::for_space(s, 2, &[]).unwrap());
        assert_eq!(classical_outcome_probs(&DensityMatrix::maximally_mixed(s), &p, &unaligned), Err(Error::GridNotAligned));
        // a coherent state in the middle of a slot lands there
        let s = SpinSpace::new(200).unwrap();
        let p = SlotPartition::uniform(s, 4).unwrap();
        let grid = Arc::new(p.aligned_grid(2).unwrap());
        let mid = DensityMatrix::pure(&coherent_state(s, Direction::new(libm::acos(0.75), 0.4).unwrap()));
        let w = classical_outcome_probs(&mid, &p, &grid).unwrap();
        assert!(w[3] > 0.99, "{w:?}");
    }

    #[test]
    fn repeated_measurement_is_stable_in_slot_centres() {
        // Quasi-projector behaviour needs slots of about 6 sqrt(j): at 4 sqrt(j)
        // the coherent-state and POVM-kernel spreads still leak a few percent.
        for two_j in [100u32, 200, 400] {
            let s = SpinSpace::new(two_j).unwrap();
            let min_width = 6.0 * libm::sqrt(s.j());
            let n = ((2.0 * s.j() / min_width) as usize).max(2);
            let p = SlotPartition::uniform(s, n).unwrap();
            assert!(p.slot_size().unwrap() >= min_width);
            for slot in 0..p.n_slots() {
                let (lo, hi) = p.slot_region(slot).cos_bands()[0];
                if lo <= -1.0 || hi >= 1.0 {
                    continue;
                }
                let dir = Direction::new(libm::acos(0.5 * (lo + hi)), 1.0).unwrap();
                let rho = DensityMatrix::pure(&coherent_state(s, dir));
                let first = measure(&rho, &p).unwrap();
                let kept = first.outcomes.iter().find(|o| o.slot == slot).unwrap();
                let again = outcome_probabilities(&kept.state, &p).unwrap();
                assert!(again[slot] >= 1.0 - 5e-3, "2j={two_j} slot {slot}: {}", again[slot]);
            }
            // polar caps are centred on the poles themselves
            let top = DensityMatrix::pure(&coherent_state(s, Direction::NORTH));
            let kept = measure(&top, &p).unwrap().outcomes.into_iter().find(|o| o.slot == p.plus_slot()).unwrap();
            assert!(outcome_probabilities(&kept.state, &p).unwrap()[p.plus_slot()] >= 1.0 - 5e-3);
        }
    }

    #[test]
    fn merged_caps_form_one_slot() {
        let s = SpinSpace::new(20).unwrap();
        let p = SlotPartition::with_labels(s, alloc::vec![-5.0, 5.0], alloc::vec![0, 1, 0]).unwrap();
        assert_eq!(p.n_slots(), 2);
        assert_eq!(p.plus_slot(), 0);
        let caps = &p.g_weights()[0];
        assert!(caps[0] > 0.99 && caps[20] > 0.99);
        assert_eq!(p.slot_region(0).cos_bands().len(), 2);
        assert_eq!(p.slot_of_cos(1.0), 0);
        assert_eq!(p.slot_of_cos(0.0), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn completeness_for_random_cuts(two_j in 1u32..=200, raw in proptest::collection::vec(0.001f64..0.999, 1..8)) {
            let s = SpinSpace::new(two_j).unwrap();
            let mut cuts: Vec<f64> = raw.iter().map(|u| (2.0 * u - 1.0) * s.j()).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            let p = SlotPartition::from_cuts(s, cuts).unwrap();
            prop_assert!(p.completeness_error() < 1e-12);
            prop_assert!(p.g_weights().iter().flatten().all(|g| (0.0..=1.0).contains(g)));
        }

        #[test]
        fn probabilities_sum_to_one(seed in 0u64..1000, idx in 0usize..4) {
            let two_j = [2u32, 10, 40, 100][idx];
            let s = SpinSpace::new(two_j).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density(s, &mut rng);
            let p = SlotPartition::uniform(s, 3).unwrap();
            let m = measure(&rho, &p).unwrap();
            prop_assert!((m.total_probability() - 1.0).abs() < 1e-10);
            for o in &m.outcomes {
                prop_assert!((o.state.trace() - 1.0).abs() < 1e-10);
            }
        }
    }
}
