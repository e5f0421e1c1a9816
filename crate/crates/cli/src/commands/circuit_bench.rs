use macroreal_core::circuit::{cat_target, gate_count_scaling, simulate_cat_protocol, simulate_global_rotation, QubitRegister};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CircuitBenchConfig, CircuitCheck};
use crate::error::CliError;
use crate::output::{gate_log_jsonl, scaling_csv, Artifacts, Check};

#[derive(Serialize)]
struct Run {
    n: usize,
    interval_counts: Vec<usize>,
    min_fidelity: Option<f64>,
    global_rotation_steps: usize,
    global_rotation_single_qubit_gates: usize,
    /// |<product|cat>|² after the first interval
    global_vs_cat_overlap: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    intervals: usize,
    omega_dt: f64,
    slope: Option<f64>,
    runs: Vec<Run>,
    gate_log: Option<String>,
}

pub fn run(c: &CircuitBenchConfig) -> Result<Artifacts, CliError> {
    if c.n_list.is_empty() {
        return Err(CliError::Config("n_list is empty".into()));
    }
    if !c.omega_dt.is_finite() {
        return Err(CliError::Config("omega_dt must be finite".into()));
    }
    let table = gate_count_scaling(&c.n_list, c.intervals)?;
    let runs: Vec<Run> = c
        .n_list
        .par_iter()
        .map(|&n| {
            let counts: Vec<usize> = table.rows.iter().filter(|r| r.n == n).map(|r| r.gates).collect();
            let (min_fidelity, overlap, steps, gates) = if n <= c.simulate_max {
                let run = simulate_cat_protocol(n, c.omega_dt, c.intervals)?;
                let g = simulate_global_rotation(n, c.omega_dt)?;
                let ov = g.register.fidelity(&cat_target(n, c.omega_dt)?)?;
                (Some(run.fidelities.iter().copied().fold(1.0, f64::min)), Some(ov), g.global_steps, g.single_qubit_gates)
            } else {
                (None, None, 1, n)
            };
            Ok(Run {
                n,
                interval_counts: counts,
                min_fidelity,
                global_rotation_steps: steps,
                global_rotation_single_qubit_gates: gates,
                global_vs_cat_overlap: overlap,
            })
        })
        .collect::<Result<_, macroreal_core::Error>>()?;

    let mut art = Artifacts::default();
    let counts_ok = runs.iter().all(|r| {
        r.interval_counts.first() == Some(&r.n) && r.interval_counts[1..].iter().all(|&g| g == 2 * r.n - 1)
    });
    art.check(Check::contract("gate_counts", counts_ok, "interval 1 = N gates, later intervals = 2N - 1".into()));
    let fid = runs.iter().filter_map(|r| r.min_fidelity).fold(1.0, f64::min);
    art.check(Check::contract("protocol_fidelity", fid >= 1.0 - 1e-9, format!("min fidelity = {fid:.15}")));

    let mut gate_log = None;
    if let Some(n) = c.log_qubits {
        let run = simulate_cat_protocol(n, c.omega_dt, c.intervals)?;
        let mut replay = QubitRegister::all_ones(n)?;
        run.log.replay(&mut replay)?;
        art.check(Check::contract("replay_bit_exact", replay == run.register, format!("{} gates replayed on {n} qubits", run.log.len())));
        art.add_file("gates.jsonl", gate_log_jsonl(&run.log));
        gate_log = Some("gates.jsonl".to_string());
    }
    for check in &c.checks {
        art.check(match *check {
            CircuitCheck::SlopeIn { lo, hi } => match table.slope {
                Some(s) => Check::expectation("slope_in", (lo..=hi).contains(&s), format!("slope {s:.6} in [{lo}, {hi}]")),
                None => Check::expectation("slope_in", false, "slope undefined: need two distinct n and >= 2 intervals".into()),
            },
        });
    }
    art.add_file("scaling.csv", scaling_csv(&table.rows));
    art.add_json("circuit_bench.json", &Report { intervals: c.intervals, omega_dt: c.omega_dt, slope: table.slope, runs, gate_log });
    Ok(art)
}
