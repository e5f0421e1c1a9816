use macroreal_core::lab::{classify_hamiltonian, direction_samples, ClassifyOptions};
use macroreal_core::spin::Direction;
use serde::Serialize;

use crate::config::{spin_space, ClassifyCheck, ClassifyConfig};
use crate::error::CliError;
use crate::output::{Artifacts, Check};

#[derive(Serialize)]
struct Report {
    verdict: &'static str,
    classical: bool,
    max_epsilon: f64,
    mean_epsilon: f64,
    worst_time: f64,
    worst_direction: Direction,
    samples: usize,
    excluded: usize,
    threshold: f64,
    border_radius: f64,
    border_mass: f64,
}

pub fn run(c: &ClassifyConfig) -> Result<Artifacts, CliError> {
    if !(c.threshold.is_finite() && c.threshold >= 0.0) {
        return Err(CliError::Config(format!("threshold {} must be finite and >= 0", c.threshold)));
    }
    if c.border_radius.is_some_and(|r| !(r.is_finite() && r >= 0.0)) {
        return Err(CliError::Config("border_radius must be finite and >= 0".into()));
    }
    let space = spin_space(c.j)?;
    let partition = c.partition.build(space)?;
    let times = c.times.values("times")?;
    let dirs = direction_samples(c.directions.n_theta, c.directions.n_phi);
    if dirs.is_empty() {
        return Err(CliError::Config("direction lattice is empty".into()));
    }
    let options = ClassifyOptions { threshold: c.threshold, border_radius: c.border_radius, border_mass: c.border_mass };
    let r = classify_hamiltonian(&c.hamiltonian.spec(), &partition, &times, &dirs, &options)?;

    let mut art = Artifacts::default();
    let err = partition.completeness_error();
    art.check(Check::contract("povm_completeness", err <= 1e-12, format!("max |sum g - 1| = {err:.3e}")));
    let eps_ok = (0.0..=1.0).contains(&r.max_epsilon) && (0.0..=1.0).contains(&r.mean_epsilon);
    art.check(Check::contract("epsilon_range", eps_ok, format!("max {:.6}, mean {:.6}", r.max_epsilon, r.mean_epsilon)));
    let verdict = if r.classical { "classical" } else { "non-classical" };
    for check in &c.checks {
        art.check(match *check {
            ClassifyCheck::Verdict { classical } => Check::expectation(
                "verdict",
                r.classical == classical,
                format!("got {verdict}, want {}", if classical { "classical" } else { "non-classical" }),
            ),
            ClassifyCheck::MaxEpsilonIn { lo, hi } => Check::expectation(
                "max_epsilon_in",
                (lo..=hi).contains(&r.max_epsilon),
                format!("max epsilon {:.6} in [{lo}, {hi}]", r.max_epsilon),
            ),
        });
    }
    art.add_json(
        "classification.json",
        &Report {
            verdict,
            classical: r.classical,
            max_epsilon: r.max_epsilon,
            mean_epsilon: r.mean_epsilon,
            worst_time: r.worst_time,
            worst_direction: r.worst_direction,
            samples: r.samples,
            excluded: r.excluded,
            threshold: r.threshold,
            border_radius: c.border_radius.unwrap_or(2.0 / space.j().sqrt()),
            border_mass: c.border_mass,
        },
    );
    Ok(art)
}
