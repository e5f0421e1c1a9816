use alloc::format;
use alloc::sync::Arc;

use crate::measure::{decohere, SlotPartition};
use crate::quasiprob::{q_function, SphereDistribution, SphereGrid};
use crate::spin::{coherent_state, DensityMatrix, Direction, Propagator};
use crate::{Error, Result};

/// Default overlap a distribution comparison must reach to pass.
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.99;
/// Default largest allowed deviation ε for the sufficiency condition.
pub const DEFAULT_EPSILON_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ConditionId {
    /// Q(Ω) against the measurement-weighted mixture Σ w Q_m̄(Ω).
    Mixture,
    /// Undisturbed Q at t_j against the mixture measured at t_i, evolved.
    Evolution,
    /// One slot captures U_t|Ω> entirely.
    Sufficient,
}

impl ConditionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionId::Mixture => "mixture",
            ConditionId::Evolution => "evolution",
            ConditionId::Sufficient => "sufficient",
        }
    }
}

/// Where a condition is violated most.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub direction: Option<Direction>,
    pub time: Option<f64>,
    pub slot: Option<usize>,
    /// Pointwise discrepancy (distributions) or ε (sufficiency) at the witness.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionReport {
    pub condition: ConditionId,
    /// Overlap in [0, 1] for the distribution conditions, ε for sufficiency.
    pub score: f64,
    pub witness: Witness,
    pub threshold: f64,
    pub passed: bool,
}

impl ConditionReport {
    fn judge(condition: ConditionId, score: f64, witness: Witness, threshold: f64) -> Self {
        let passed = match condition {
            ConditionId::Sufficient => score <= threshold,
            _ => score >= threshold,
        };
        Self { condition, score, witness, threshold, passed }
    }

    /// Same scores judged against another threshold.
    pub fn against(&self, threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold >= 0.0) {
            return Err(Error::InvalidParameter(format!("threshold {threshold} must be finite and >= 0")));
        }
        Ok(Self::judge(self.condition, self.score, self.witness, threshold))
    }
}

fn compare(condition: ConditionId, lhs: &SphereDistribution, rhs: &SphereDistribution, time: Option<f64>) -> Result<ConditionReport> {
    let score = lhs.overlap(rhs)?.min(1.0);
    let (value, direction) = lhs.max_discrepancy(rhs)?;
    let witness = Witness { direction: Some(direction), time, slot: None, value };
    Ok(ConditionReport::judge(condition, score, witness, DEFAULT_OVERLAP_THRESHOLD))
}

/// Overlap of Q(Ω) with Σ_m̄ w_m̄ Q_m̄(Ω), the Q-function of the
/// non-selectively measured state.
pub fn mixture_condition(rho: &DensityMatrix, partition: &SlotPartition, grid: &Arc<SphereGrid>) -> Result<ConditionReport> {
    let lhs = q_function(rho, grid);
    let rhs = q_function(&decohere(rho, partition)?, grid);
    compare(ConditionId::Mixture, &lhs, &rhs, None)
}

/// Overlap of the undisturbed Q at t_j with the state measured at t_i and
/// then evolved to t_j.
pub fn evolution_condition(
    rho0: &DensityMatrix,
    p: &Propagator,
    partition: &SlotPartition,
    t_i: f64,
    t_j: f64,
    grid: &Arc<SphereGrid>,
) -> Result<ConditionReport> {
    if !(t_i.is_finite() && t_j.is_finite()) || t_i > t_j {
        return Err(Error::InvalidTimes(format!("need t_i <= t_j, got ({t_i}, {t_j})")));
    }
    let undisturbed = p.evolve(rho0, t_j);
    let measured = decohere(&p.evolve(rho0, t_i), partition)?;
    let lhs = q_function(&undisturbed, grid);
    let rhs = q_function(&p.evolve(&measured, t_j - t_i), grid);
    compare(ConditionId::Evolution, &lhs, &rhs, Some(t_j))
}

/// ε and the capturing slot for |psi> = U_t|Ω>.
pub fn classicality_detail(p: &Propagator, partition: &SlotPartition, t: f64, dir: Direction) -> Result<(f64, usize)> {
    partition.space().check_dim(p.space().dim())?;
    let psi = p.evolve(&coherent_state(p.space(), dir), t);
    let pops: alloc::vec::Vec<f64> = psi.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    Ok(slot_capture(&pops, partition))
}

pub(crate) fn slot_capture(pops: &[f64], partition: &SlotPartition) -> (f64, usize) {
    let (slot, best) = partition
        .g_weights()
        .iter()
        .map(|g| pops.iter().zip(g).map(|(p, w)| p * w).sum::<f64>())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    ((1.0 - best).clamp(0.0, 1.0), slot)
}

/// ε = 1 - max_m̄ <psi|P_m̄|psi> for |psi> = U_t|Ω>.
pub fn classicality_deviation(p: &Propagator, partition: &SlotPartition, t: f64, dir: Direction) -> Result<f64> {
    classicality_detail(p, partition, t, dir).map(|(e, _)| e)
}

/// [`classicality_deviation`] packaged as a report against the default ε threshold.
pub fn classicality_report(p: &Propagator, partition: &SlotPartition, t: f64, dir: Direction) -> Result<ConditionReport> {
    let (eps, slot) = classicality_detail(p, partition, t, dir)?;
    let witness = Witness { direction: Some(dir), time: Some(t), slot: Some(slot), value: eps };
    Ok(ConditionReport::judge(ConditionId::Sufficient, eps, witness, DEFAULT_EPSILON_THRESHOLD))
}
