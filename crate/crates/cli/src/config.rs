//! Per-command experiment configs. Every record rejects unknown fields.

use std::f64::consts::PI;

use macroreal_core::measure::SlotPartition;
use macroreal_core::spin::{coherent_state, Axis, Direction, HamiltonianSpec, SpinSpace, StateVector};
use macroreal_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianConfig {
    Rotation { axis: Axis, omega: f64 },
    CatFlip { omega: f64 },
    TwoLevel { delta_e: f64, lower: usize, upper: usize },
}

impl HamiltonianConfig {
    pub fn spec(&self) -> HamiltonianSpec {
        match *self {
            HamiltonianConfig::Rotation { axis, omega } => HamiltonianSpec::Rotation { axis, omega },
            HamiltonianConfig::CatFlip { omega } => HamiltonianSpec::CatFlip { omega },
            HamiltonianConfig::TwoLevel { delta_e, lower, upper } => HamiltonianSpec::TwoLevel { delta_e, lower, upper },
        }
    }

    /// Gap of the effective two-level dynamics, when there is one.
    pub fn effective_gap(&self) -> Option<f64> {
        match *self {
            HamiltonianConfig::CatFlip { omega } => Some(2.0 * omega),
            HamiltonianConfig::TwoLevel { delta_e, .. } => Some(delta_e),
            HamiltonianConfig::Rotation { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionConfig {
    #[default]
    Hemispheres,
    Uniform { slots: usize },
    SlotSize { width: f64 },
    FineGrained,
    /// Slot 0 holds both polar caps |m| > j/2, slot 1 the middle band.
    MergedCaps,
    Cuts { cuts: Vec<f64>, labels: Option<Vec<usize>> },
}

impl PartitionConfig {
    pub fn build(&self, space: SpinSpace) -> Result<SlotPartition, CliError> {
        let j = space.j();
        Ok(match self {
            PartitionConfig::Hemispheres => SlotPartition::hemispheres(space),
            PartitionConfig::Uniform { slots } => SlotPartition::uniform(space, *slots)?,
            PartitionConfig::SlotSize { width } => SlotPartition::with_slot_size(space, *width)?,
            PartitionConfig::FineGrained => SlotPartition::fine_grained(space),
            PartitionConfig::MergedCaps => SlotPartition::with_labels(space, vec![-j / 2.0, j / 2.0], vec![0, 1, 0])?,
            PartitionConfig::Cuts { cuts, labels: None } => SlotPartition::from_cuts(space, cuts.clone())?,
            PartitionConfig::Cuts { cuts, labels: Some(l) } => SlotPartition::with_labels(space, cuts.clone(), l.clone())?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Coherent { theta: f64, phi: f64 },
    /// |+j>
    Top,
    /// |-j>
    Bottom,
    Dicke { m: f64 },
    /// (|lower> + |upper>)/sqrt(2) in the Dicke index basis.
    EqualSuperposition { lower: usize, upper: usize },
}

impl InitialState {
    pub fn build(&self, space: SpinSpace) -> Result<StateVector, CliError> {
        Ok(match *self {
            InitialState::Coherent { theta, phi } => coherent_state(space, Direction::new(theta, phi)?),
            InitialState::Top => StateVector::basis(space, space.top())?,
            InitialState::Bottom => StateVector::basis(space, 0)?,
            InitialState::Dicke { m } => StateVector::dicke(space, m)?,
            InitialState::EqualSuperposition { lower, upper } => {
                if lower == upper || lower >= space.dim() || upper >= space.dim() {
                    return Err(CliError::Config(format!("superposition levels ({lower}, {upper}) invalid for dim {}", space.dim())));
                }
                let mut a = vec![C64::new(0.0, 0.0); space.dim()];
                a[lower] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                a[upper] = a[lower];
                StateVector::new(space, a)?
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn linspace(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points }
    }

    pub fn values(&self, what: &str) -> Result<Vec<f64>, CliError> {
        if self.points == 0 {
            return Err(CliError::Config(format!("{what}: empty grid")));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::Config(format!("{what}: non-finite bounds")));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.start + step * i as f64).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionConfig {
    pub theta: f64,
    pub phi: f64,
}

impl DirectionConfig {
    pub fn direction(&self) -> Result<Direction, CliError> {
        Ok(Direction::new(self.theta, self.phi)?)
    }
}

pub fn spin_space(j: f64) -> Result<SpinSpace, CliError> {
    Ok(SpinSpace::from_j(j)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolConfig {
    Projective,
    Coarse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum LgiCheck {
    /// max |K - K_two_level| over the scan
    OverlayMatch { tolerance: f64 },
    /// K has a local maximum of `value` near each point of `at`, within
    /// the grid resolution.
    MaxKNear { value: f64, at: Vec<f64> },
    /// C12 = C23 = cos(f Δt) and C13 = cos(2 f Δt)
    CorrelatorCosine { frequency: f64, tolerance: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LgiScanConfig {
    pub j: f64,
    pub hamiltonian: HamiltonianConfig,
    pub initial: InitialState,
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    pub dt: TimeGrid,
    /// Gap for the analytic two-level overlay; derived from the Hamiltonian when absent.
    #[serde(default)]
    pub overlay_gap: Option<f64>,
    #[serde(default)]
    pub checks: Vec<LgiCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum QpfCheck {
    QOverlapAtLeast { value: f64 },
    PSupNegative,
    PMixAtLeast { value: f64 },
    QSupAtLeast { value: f64 },
}

fn default_oversample() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpfRenderConfig {
    pub j: f64,
    pub omega_t: f64,
    /// Axis that plays the role of |+j>; the north pole when absent.
    #[serde(default)]
    pub frame: Option<DirectionConfig>,
    #[serde(default = "default_oversample")]
    pub oversample: u32,
    #[serde(default)]
    pub checks: Vec<QpfCheck>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionLattice {
    pub n_theta: usize,
    pub n_phi: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassifyCheck {
    Verdict { classical: bool },
    MaxEpsilonIn { lo: f64, hi: f64 },
}

fn default_epsilon_threshold() -> f64 {
    macroreal_core::lab::DEFAULT_EPSILON_THRESHOLD
}

fn default_overlap_threshold() -> f64 {
    macroreal_core::lab::DEFAULT_OVERLAP_THRESHOLD
}

fn default_border_mass() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub j: f64,
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    pub times: TimeGrid,
    pub directions: DirectionLattice,
    #[serde(default = "default_epsilon_threshold")]
    pub threshold: f64,
    /// 2/sqrt(j) when absent.
    #[serde(default)]
    pub border_radius: Option<f64>,
    #[serde(default = "default_border_mass")]
    pub border_mass: f64,
    #[serde(default)]
    pub checks: Vec<ClassifyCheck>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SufficiencySample {
    pub t: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondCheckConfig {
    pub j: f64,
    pub hamiltonian: HamiltonianConfig,
    pub initial: InitialState,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default = "default_oversample")]
    pub oversample: u32,
    #[serde(default = "default_overlap_threshold")]
    pub overlap_threshold: f64,
    #[serde(default = "default_epsilon_threshold")]
    pub epsilon_threshold: f64,
    /// Run the mixture condition on the initial state.
    #[serde(default)]
    pub mixture: bool,
    /// (t_i, t_j) pairs for the evolution condition.
    #[serde(default)]
    pub evolution: Vec<[f64; 2]>,
    #[serde(default)]
    pub sufficiency: Vec<SufficiencySample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CircuitCheck {
    SlopeIn { lo: f64, hi: f64 },
}

fn default_simulate_max() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitBenchConfig {
    pub n_list: Vec<usize>,
    pub intervals: usize,
    pub omega_dt: f64,
    /// Largest register actually simulated for the fidelity contract.
    #[serde(default = "default_simulate_max")]
    pub simulate_max: usize,
    /// Register size whose gate log is exported as JSON lines.
    #[serde(default)]
    pub log_qubits: Option<usize>,
    #[serde(default)]
    pub checks: Vec<CircuitCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CommandConfig {
    LgiScan(LgiScanConfig),
    QpfRender(QpfRenderConfig),
    Classify(ClassifyConfig),
    CondCheck(CondCheckConfig),
    CircuitBench(CircuitBenchConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    /// Leggett-Garg scan over Δt (CSV + JSON)
    LgiScan,
    /// P and Q distributions of a cat superposition and its mixture (CSV)
    QpfRender,
    /// Hamiltonian classification report (JSON)
    Classify,
    /// Mixture, evolution and sufficiency conditions (JSON)
    CondCheck,
    /// Gate counts and fidelities of the sequential cat circuit (CSV + JSON lines)
    CircuitBench,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::LgiScan => "lgi-scan",
            CommandKind::QpfRender => "qpf-render",
            CommandKind::Classify => "classify",
            CommandKind::CondCheck => "cond-check",
            CommandKind::CircuitBench => "circuit-bench",
        }
    }

    /// Parses a config document for this command.
    pub fn parse(&self, text: &str) -> Result<CommandConfig, CliError> {
        let bad = |e: serde_json::Error| CliError::Config(format!("{} config: {e}", self.name()));
        Ok(match self {
            CommandKind::LgiScan => CommandConfig::LgiScan(serde_json::from_str(text).map_err(bad)?),
            CommandKind::QpfRender => CommandConfig::QpfRender(serde_json::from_str(text).map_err(bad)?),
            CommandKind::Classify => CommandConfig::Classify(serde_json::from_str(text).map_err(bad)?),
            CommandKind::CondCheck => CommandConfig::CondCheck(serde_json::from_str(text).map_err(bad)?),
            CommandKind::CircuitBench => CommandConfig::CircuitBench(serde_json::from_str(text).map_err(bad)?),
        })
    }
}

impl CommandConfig {
    pub fn kind(&self) -> CommandKind {
        match self {
            CommandConfig::LgiScan(_) => CommandKind::LgiScan,
            CommandConfig::QpfRender(_) => CommandKind::QpfRender,
            CommandConfig::Classify(_) => CommandKind::Classify,
            CommandConfig::CondCheck(_) => CommandKind::CondCheck,
            CommandConfig::CircuitBench(_) => CommandKind::CircuitBench,
        }
    }

    /// Applies `--oversample`; commands without a sphere grid reject it.
    pub fn set_oversample(&mut self, k: u32) -> Result<(), CliError> {
        if k == 0 {
            return Err(CliError::Config("--oversample must be >= 1".into()));
        }
        match self {
            CommandConfig::QpfRender(c) => c.oversample = k,
            CommandConfig::CondCheck(c) => c.oversample = k,
            other => {
                return Err(CliError::Config(format!("--oversample does not apply to {}", other.kind().name())));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }
}

/// Default cond-check configuration: a border coherent state under rotation.
pub fn default_cond_check() -> CondCheckConfig {
    CondCheckConfig {
        j: 50.0,
        hamiltonian: HamiltonianConfig::Rotation { axis: Axis::X, omega: 1.0 },
        initial: InitialState::Coherent { theta: PI / 2.0 + 0.3, phi: PI / 2.0 },
        partition: PartitionConfig::Hemispheres,
        oversample: 2,
        overlap_threshold: default_overlap_threshold(),
        epsilon_threshold: default_epsilon_threshold(),
        mixture: true,
        evolution: vec![[0.0, 1.0], [0.5, 2.0], [1.0, 3.0]],
        sufficiency: vec![
            SufficiencySample { t: 0.0, theta: PI / 4.0, phi: 0.0 },
            SufficiencySample { t: 1.0, theta: PI / 4.0, phi: 0.0 },
        ],
    }
}
