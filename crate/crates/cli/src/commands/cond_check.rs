use std::sync::Arc;

use macroreal_core::lab::{classicality_report, evolution_condition, mixture_condition, ConditionId, ConditionReport};
use macroreal_core::spin::{build_hamiltonian, diagonalize, DensityMatrix, Direction};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{spin_space, CondCheckConfig};
use crate::error::CliError;
use crate::output::{Artifacts, Check};

#[derive(Serialize)]
struct Entry {
    #[serde(flatten)]
    report: ConditionReport,
    /// (t_i, t_j) for the evolution condition
    times: Option<[f64; 2]>,
}

#[derive(Serialize)]
struct Report {
    passed: usize,
    failed: usize,
    reports: Vec<Entry>,
}

pub fn run(c: &CondCheckConfig) -> Result<Artifacts, CliError> {
    if !(0.0..=1.0).contains(&c.overlap_threshold) {
        return Err(CliError::Config(format!("overlap_threshold {} must lie in [0, 1]", c.overlap_threshold)));
    }
    if !(c.epsilon_threshold.is_finite() && c.epsilon_threshold >= 0.0) {
        return Err(CliError::Config(format!("epsilon_threshold {} must be finite and >= 0", c.epsilon_threshold)));
    }
    if c.oversample == 0 {
        return Err(CliError::Config("oversample must be >= 1".into()));
    }
    if !c.mixture && c.evolution.is_empty() && c.sufficiency.is_empty() {
        return Err(CliError::Config("nothing to check: enable mixture or list evolution/sufficiency samples".into()));
    }
    let space = spin_space(c.j)?;
    let partition = c.partition.build(space)?;
    let p = diagonalize(&build_hamiltonian(&c.hamiltonian.spec(), space)?)?;
    let rho = DensityMatrix::pure(&c.initial.build(space)?);
    let grid = Arc::new(partition.aligned_grid(c.oversample)?);

    let mut entries = Vec::new();
    if c.mixture {
        let r = mixture_condition(&rho, &partition, &grid)?.against(c.overlap_threshold)?;
        entries.push(Entry { report: r, times: None });
    }
    let evo: Vec<Entry> = c
        .evolution
        .par_iter()
        .map(|&[ti, tj]| {
            let r = evolution_condition(&rho, &p, &partition, ti, tj, &grid)?.against(c.overlap_threshold)?;
            Ok(Entry { report: r, times: Some([ti, tj]) })
        })
        .collect::<Result<_, macroreal_core::Error>>()?;
    entries.extend(evo);
    for s in &c.sufficiency {
        let dir = Direction::new(s.theta, s.phi)?;
        let r = classicality_report(&p, &partition, s.t, dir)?.against(c.epsilon_threshold)?;
        entries.push(Entry { report: r, times: None });
    }

    let mut art = Artifacts::default();
    let err = partition.completeness_error();
    art.check(Check::contract("povm_completeness", err <= 1e-12, format!("max |sum g - 1| = {err:.3e}")));
    let in_range = entries.iter().all(|e| match e.report.condition {
        ConditionId::Sufficient => (0.0..=1.0).contains(&e.report.score),
        _ => (0.0..=1.0 + 1e-12).contains(&e.report.score),
    });
    art.check(Check::contract("score_range", in_range, "overlaps and deviations within [0, 1]".into()));
    let passed = entries.iter().filter(|e| e.report.passed).count();
    art.add_json("conditions.json", &Report { passed, failed: entries.len() - passed, reports: entries });
    Ok(art)
}
