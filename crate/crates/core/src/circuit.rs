//! N-qubit statevector simulation of the sequential cat construction.
//!
//! Qubits are numbered from 0; qubit 0 is the leftmost label in |q_0 q_1 … q_{N-1}>
//! and the most significant bit of the amplitude index.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result, C64};

pub const MAX_QUBITS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct QubitRegister {
    n: usize,
    amps: Vec<C64>,
}

impl QubitRegister {
    /// Computational basis state with the given index.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        if index >= 1 << n {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut amps = alloc::vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// |11…1>
    pub fn all_ones(n: usize) -> Result<Self> {
        Self::basis(n, (1usize << n.min(MAX_QUBITS)) - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Index of the basis state whose qubit k holds `bits[k]`.
    pub fn index_of(bits: &[u8]) -> usize {
        bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize)
    }

    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.n {
            return Err(Error::InvalidQubit { index: qubit, n: self.n });
        }
        Ok(1 << (self.n - 1 - qubit))
    }

    fn pair_masks(&self, control: usize, target: usize) -> Result<(usize, usize)> {
        let c = self.mask(control)?;
        let t = self.mask(target)?;
        if control == target {
            return Err(Error::SameQubit(control));
        }
        Ok((c, t))
    }

    /// |1> -> cos θ|1> + sin θ|0>, |0> -> cos θ|0> - sin θ|1>.
    pub fn apply_rotation(&mut self, qubit: usize, angle: f64) -> Result<()> {
        let m = self.mask(qubit)?;
        let (s, c) = libm::sincos(angle);
        for i in (0..self.amps.len()).filter(|i| i & m == 0) {
            let a0 = self.amps[i];
            let a1 = self.amps[i | m];
            self.amps[i] = a0 * c + a1 * s;
            self.amps[i | m] = a1 * c - a0 * s;
        }
        Ok(())
    }

    /// |x>|y> -> |x>|x ⊕ y>.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        let (c, t) = self.pair_masks(control, target)?;
        for i in (0..self.amps.len()).filter(|i| i & c != 0 && i & t == 0) {
            self.amps.swap(i, i | t);
        }
        Ok(())
    }

    /// |x>|y> -> |x>|(1 - x) ⊕ y>: flips the target when the control is 0.
    pub fn apply_open_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        let (c, t) = self.pair_masks(control, target)?;
        for i in (0..self.amps.len()).filter(|i| i & c == 0 && i & t == 0) {
            self.amps.swap(i, i | t);
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: &GateKind) -> Result<()> {
        match *gate {
            GateKind::Rotate { qubit, angle } => self.apply_rotation(qubit, angle),
            GateKind::Cnot { control, target } => self.apply_cnot(control, target),
            GateKind::OpenCnot { control, target } => self.apply_open_cnot(control, target),
        }
    }

    /// |<self|other>|²
    pub fn fidelity(&self, other: &QubitRegister) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.amps.len(), found: other.amps.len() });
        }
        let ip: C64 = self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum();
        Ok(ip.norm_sqr())
    }
}

/// cos(x)|1…1> + sin(x)|0…0>.
pub fn cat_target(n: usize, x: f64) -> Result<QubitRegister> {
    let mut r = QubitRegister::basis(n, 0)?;
    let (s, c) = libm::sincos(x);
    r.amps[0] = C64::new(s, 0.0);
    *r.amps.last_mut().expect("non-empty") = C64::new(c, 0.0);
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum GateKind {
    Rotate { qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    OpenCnot { control: usize, target: usize },
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Rotate { .. } => "rotate",
            GateKind::Cnot { .. } => "cnot",
            GateKind::OpenCnot { .. } => "open_cnot",
        }
    }

    /// Qubits acted on; control first for two-qubit gates.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateKind::Rotate { qubit, .. } => alloc::vec![qubit],
            GateKind::Cnot { control, target } | GateKind::OpenCnot { control, target } => alloc::vec![control, target],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Rotate { angle, .. } => Some(angle),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate {
    /// 1-based interval the gate belongs to.
    pub interval: usize,
    pub kind: GateKind,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GateLog {
    gates: Vec<Gate>,
    counts: Vec<usize>,
}

impl GateLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a gate; intervals must be non-decreasing and start at 1.
    pub fn push(&mut self, interval: usize, kind: GateKind) -> Result<()> {
        if interval == 0 || interval < self.counts.len() {
            return Err(Error::InvalidParameter(format!("interval {interval} after {}", self.counts.len())));
        }
        if self.counts.len() < interval {
            self.counts.resize(interval, 0);
        }
        self.counts[interval - 1] += 1;
        self.gates.push(Gate { interval, kind });
        Ok(())
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Gate count of each interval, interval 1 first.
    pub fn interval_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn replay(&self, reg: &mut QubitRegister) -> Result<()> {
        self.gates.iter().try_for_each(|g| reg.apply(&g.kind))
    }
}

fn check_protocol(n: usize, intervals: usize) -> Result<()> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::QubitCount(n));
    }
    if intervals == 0 {
        return Err(Error::InvalidParameter("need at least one interval".into()));
    }
    Ok(())
}

/// Gate sequence of the cat protocol: interval 1 rotates qubit 0 and runs the
/// open-control cascade 0→1→…→N-1; every later interval undoes the cascade,
/// rotates qubit 0 and redoes it.
pub fn cat_protocol_plan(n: usize, omega_dt: f64, intervals: usize) -> Result<GateLog> {
    check_protocol(n, intervals)?;
    let mut log = GateLog::new();
    let cascade = |k: usize| GateKind::OpenCnot { control: k, target: k + 1 };
    for iv in 1..=intervals {
        if iv > 1 {
            for k in (0..n - 1).rev() {
                log.push(iv, cascade(k))?;
            }
        }
        log.push(iv, GateKind::Rotate { qubit: 0, angle: omega_dt })?;
        for k in 0..n - 1 {
            log.push(iv, cascade(k))?;
        }
    }
    Ok(log)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatProtocolRun {
    pub register: QubitRegister,
    pub log: GateLog,
    /// Fidelity to cos(kωΔt)|1…1> + sin(kωΔt)|0…0> after interval k.
    pub fidelities: Vec<f64>,
}

pub fn simulate_cat_protocol(n: usize, omega_dt: f64, intervals: usize) -> Result<CatProtocolRun> {
    let log = cat_protocol_plan(n, omega_dt, intervals)?;
    let mut reg = QubitRegister::all_ones(n)?;
    let mut fidelities = Vec::with_capacity(intervals);
    let gates = log.gates();
    let mut at = 0;
    for (k, &count) in log.interval_counts().iter().enumerate() {
        for g in &gates[at..at + count] {
            reg.apply(&g.kind)?;
        }
        at += count;
        fidelities.push(reg.fidelity(&cat_target(n, (k + 1) as f64 * omega_dt)?)?);
    }
    Ok(CatProtocolRun { register: reg, log, fidelities })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalRotation {
    pub register: QubitRegister,
    pub global_steps: usize,
    pub single_qubit_gates: usize,
}

/// [cos(ωΔt)|1> + sin(ωΔt)|0>]^⊗N from |1…1>.
pub fn simulate_global_rotation(n: usize, omega_dt: f64) -> Result<GlobalRotation> {
    let mut reg = QubitRegister::all_ones(n)?;
    for q in 0..n {
        reg.apply_rotation(q, omega_dt)?;
    }
    Ok(GlobalRotation { register: reg, global_steps: 1, single_qubit_gates: n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingRow {
    pub n: usize,
    pub interval: usize,
    pub gates: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of steady-state gates per interval against n;
    /// `None` with a single interval or fewer than two distinct n.
    pub slope: Option<f64>,
}

pub fn gate_count_scaling(n_list: &[usize], intervals: usize) -> Result<ScalingTable> {
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &n in n_list {
        let log = cat_protocol_plan(n, 0.0, intervals)?;
        for (k, &gates) in log.interval_counts().iter().enumerate() {
            rows.push(ScalingRow { n, interval: k + 1, gates });
            if k > 0 {
                points.push((n as f64, gates as f64));
            }
        }
    }
    Ok(ScalingTable { rows, slope: fit_slope(&points) })
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let k = points.len() as f64;
    if points.is_empty() {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
