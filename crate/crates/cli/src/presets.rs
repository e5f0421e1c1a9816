use std::f64::consts::PI;

use macroreal_core::spin::Axis;

use crate::config::*;
use crate::error::CliError;

pub const PRESETS: [&str; 5] = ["fig1", "cat-lgi", "two-level-lgi", "rotation-classical", "circuit-scaling"];

pub fn preset(name: &str) -> Result<CommandConfig, CliError> {
    Ok(match name {
        "fig1" => CommandConfig::QpfRender(fig1()),
        "cat-lgi" => CommandConfig::LgiScan(cat_lgi()),
        "two-level-lgi" => CommandConfig::LgiScan(two_level_lgi()),
        "rotation-classical" => CommandConfig::Classify(rotation_classical()),
        "circuit-scaling" => CommandConfig::CircuitBench(circuit_scaling()),
        other => {
            return Err(CliError::Config(format!("unknown preset {other:?}; known: {}", PRESETS.join(", "))));
        }
    })
}

/// Config used when a command runs without --config or --preset.
pub fn default_for(kind: CommandKind) -> CommandConfig {
    match kind {
        CommandKind::LgiScan => CommandConfig::LgiScan(cat_lgi()),
        CommandKind::QpfRender => CommandConfig::QpfRender(fig1()),
        CommandKind::Classify => CommandConfig::Classify(rotation_classical()),
        CommandKind::CondCheck => CommandConfig::CondCheck(default_cond_check()),
        CommandKind::CircuitBench => CommandConfig::CircuitBench(circuit_scaling()),
    }
}

pub fn fig1() -> QpfRenderConfig {
    QpfRenderConfig {
        j: 10.0,
        omega_t: PI / 4.0,
        frame: Some(DirectionConfig { theta: PI / 4.0, phi: 3.0 * PI / 2.0 }),
        oversample: 2,
        checks: vec![
            QpfCheck::QOverlapAtLeast { value: 1.0 - 1e-6 },
            QpfCheck::PSupNegative,
            QpfCheck::PMixAtLeast { value: -1e-6 },
            QpfCheck::QSupAtLeast { value: -1e-10 },
        ],
    }
}

pub fn cat_lgi() -> LgiScanConfig {
    LgiScanConfig {
        j: 20.0,
        hamiltonian: HamiltonianConfig::CatFlip { omega: 1.0 },
        initial: InitialState::Top,
        protocol: ProtocolConfig::Coarse,
        partition: PartitionConfig::Hemispheres,
        dt: TimeGrid::linspace(0.0, PI, 50),
        overlay_gap: None,
        checks: vec![
            LgiCheck::OverlayMatch { tolerance: 1e-4 },
            LgiCheck::CorrelatorCosine { frequency: 1.0, tolerance: 1e-6 },
            LgiCheck::CorrelatorCosine { frequency: 2.0, tolerance: 1e-6 },
        ],
    }
}

pub fn two_level_lgi() -> LgiScanConfig {
    LgiScanConfig {
        j: 0.5,
        hamiltonian: HamiltonianConfig::TwoLevel { delta_e: 1.0, lower: 0, upper: 1 },
        initial: InitialState::EqualSuperposition { lower: 0, upper: 1 },
        protocol: ProtocolConfig::Projective,
        partition: PartitionConfig::Hemispheres,
        dt: TimeGrid::linspace(0.0, 2.0 * PI, 400),
        overlay_gap: None,
        checks: vec![
            LgiCheck::OverlayMatch { tolerance: 1e-9 },
            LgiCheck::MaxKNear { value: 1.5, at: vec![PI / 3.0, 5.0 * PI / 3.0] },
        ],
    }
}

pub fn rotation_classical() -> ClassifyConfig {
    ClassifyConfig {
        j: 100.0,
        hamiltonian: HamiltonianConfig::Rotation { axis: Axis::X, omega: 1.0 },
        partition: PartitionConfig::Hemispheres,
        times: TimeGrid::linspace(0.0, 2.0 * PI, 25),
        directions: DirectionLattice { n_theta: 9, n_phi: 6 },
        threshold: macroreal_core::lab::DEFAULT_EPSILON_THRESHOLD,
        border_radius: None,
        border_mass: 0.5,
        checks: vec![ClassifyCheck::Verdict { classical: true }],
    }
}

pub fn circuit_scaling() -> CircuitBenchConfig {
    CircuitBenchConfig {
        n_list: vec![4, 8, 16],
        intervals: 5,
        omega_dt: PI / 40.0,
        simulate_max: 16,
        log_qubits: Some(4),
        checks: vec![CircuitCheck::SlopeIn { lo: 1.9, hi: 2.1 }],
    }
}
