use alloc::format;
use alloc::vec::Vec;

use crate::measure::SlotPartition;
use crate::spin::{DensityMatrix, Propagator, StateVector};
use crate::{CMatrix, Error, Result, C64};

/// K = 2 cos(ΔE Δt) - cos(2 ΔE Δt) for an equal two-level superposition.
pub fn two_level_k(delta_e: f64, dt: f64) -> f64 {
    let x = delta_e * dt;
    2.0 * libm::cos(x) - libm::cos(2.0 * x)
}

/// K = C12 + C23 - C13.
pub fn k_value(c12: f64, c23: f64, c13: f64) -> f64 {
    c12 + c23 - c13
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LgiProtocol {
    /// A = 2|psi0><psi0| - 1 measured projectively.
    Projective,
    /// Which-slot measurement with a two-slot coarse-grained POVM.
    CoarseGrained,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LgiResult {
    pub c12: f64,
    pub c23: f64,
    pub c13: f64,
    pub k: f64,
    pub times: [f64; 3],
    pub protocol: LgiProtocol,
}

impl LgiResult {
    fn new(c12: f64, c23: f64, c13: f64, times: [f64; 3], protocol: LgiProtocol) -> Self {
        Self { c12, c23, c13, k: k_value(c12, c23, c13), times, protocol }
    }
}

/// Projective protocol evaluated both from the survival amplitudes and from
/// explicit sequential measurement statistics (stored in `explicit`).
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveLgi {
    pub explicit: LgiResult,
    pub closed_form_k: f64,
    /// p(Δt) and p(2Δt)
    pub survival: [f64; 2],
    /// γ = 2α - β from the principal arguments of the survival amplitudes.
    pub gamma: f64,
}

/// Joint outcome probabilities of the runs of a dichotomic protocol.
/// Index 0 is the "+" outcome, index 1 the "-" outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct PathTable {
    /// [a][b]: outcome a at t1, b at t2
    pub joint12: [[f64; 2]; 2],
    /// [b][c]: outcome b at t2, c at t3
    pub joint23: [[f64; 2]; 2],
    /// [a][c]: outcome a at t1, c at t3, nothing measured at t2
    pub joint13: [[f64; 2]; 2],
    /// [a][b][c]: measured at all three times
    pub joint123: [[[f64; 2]; 2]; 2],
}

impl PathTable {
    /// p_{1a}
    pub fn p1(&self, a: usize) -> f64 {
        self.joint12[a][0] + self.joint12[a][1]
    }

    /// q_{2b|1a}, if outcome a has non-zero probability.
    pub fn q21(&self, a: usize, b: usize) -> Option<f64> {
        let p = self.p1(a);
        (p > 0.0).then(|| self.joint12[a][b] / p)
    }

    /// q_{3c|1a} from the run without a t2 measurement.
    pub fn q31(&self, a: usize, c: usize) -> Option<f64> {
        let p = self.joint13[a][0] + self.joint13[a][1];
        (p > 0.0).then(|| self.joint13[a][c] / p)
    }

    /// q_{3c|2b,1a} from the three-time run.
    pub fn q3_given_21(&self, a: usize, b: usize, c: usize) -> Option<f64> {
        let p = self.joint123[a][b][0] + self.joint123[a][b][1];
        (p > 0.0).then(|| self.joint123[a][b][c] / p)
    }

    /// max over (a, c) of |q_{3c|1a} - Σ_b q_{2b|1a} q_{3c|2b,1a}|, skipping
    /// first outcomes rarer than `min_p1`. Zero when the t2 measurement
    /// leaves the t1 -> t3 statistics untouched.
    pub fn classical_path_residual(&self, min_p1: f64) -> f64 {
        let mut worst = 0.0_f64;
        for a in 0..2 {
            let p = self.p1(a);
            if p < min_p1 {
                continue;
            }
            for c in 0..2 {
                let paths: f64 = (0..2).map(|b| self.joint123[a][b][c]).sum::<f64>() / p;
                let direct = self.joint13[a][c] / p;
                worst = worst.max((direct - paths).abs());
            }
        }
        worst
    }

    /// Largest disagreement between the t1 marginals of the three runs that
    /// measure at t1, and between the t2 marginals of the runs measuring there.
    pub fn marginal_inconsistency(&self) -> f64 {
        let mut worst = 0.0_f64;
        for a in 0..2 {
            let m12 = self.p1(a);
            let m13 = self.joint13[a][0] + self.joint13[a][1];
            let m123: f64 = self.joint123[a].iter().flatten().sum();
            worst = worst.max((m12 - m13).abs()).max((m12 - m123).abs());
        }
        for b in 0..2 {
            let m12 = self.joint12[0][b] + self.joint12[1][b];
            let m123: f64 = (0..2).map(|a| self.joint123[a][b][0] + self.joint123[a][b][1]).sum();
            worst = worst.max((m12 - m123).abs());
        }
        worst
    }
}

enum Kraus {
    Diagonal(Vec<f64>),
    /// Orthogonal projector; M = M† = M².
    Projector(CMatrix),
}

impl Kraus {
    fn apply(&self, rho: &CMatrix) -> CMatrix {
        match self {
            Kraus::Diagonal(s) => CMatrix::from_fn(rho.dim(), |r, c| rho[(r, c)] * (s[r] * s[c])),
            Kraus::Projector(p) => &(p * rho) * p,
        }
    }

    fn probability(&self, rho: &CMatrix) -> f64 {
        match self {
            Kraus::Diagonal(s) => (0..rho.dim()).map(|k| rho[(k, k)].re * s[k] * s[k]).sum(),
            Kraus::Projector(p) => {
                let n = rho.dim();
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..n {
                    for c in 0..n {
                        acc += p[(r, c)] * rho[(c, r)];
                    }
                }
                acc.re
            }
        }
    }
}

/// Two-outcome instrument, index 0 = "+".
struct Instrument([Kraus; 2]);

fn conjugate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    &(u * rho) * &u.adjoint()
}

struct Engine<'a> {
    propagator: &'a Propagator,
    rho0: &'a CMatrix,
    instrument: Instrument,
}

impl Engine<'_> {
    fn state_at(&self, t: f64) -> CMatrix {
        if t == 0.0 {
            self.rho0.clone()
        } else {
            conjugate(&self.propagator.unitary(t), self.rho0)
        }
    }

    fn step(&self, rho: &CMatrix, dt: f64) -> CMatrix {
        if dt == 0.0 {
            rho.clone()
        } else {
            conjugate(&self.propagator.unitary(dt), rho)
        }
    }

    fn pair(&self, ta: f64, tb: f64) -> [[f64; 2]; 2] {
        let rho = self.state_at(ta);
        let mut out = [[0.0; 2]; 2];
        for (a, ka) in self.instrument.0.iter().enumerate() {
            let branch = self.step(&ka.apply(&rho), tb - ta);
            for (b, kb) in self.instrument.0.iter().enumerate() {
                out[a][b] = kb.probability(&branch).max(0.0);
            }
        }
        out
    }

    fn triple(&self, t: [f64; 3]) -> [[[f64; 2]; 2]; 2] {
        let rho = self.state_at(t[0]);
        let mut out = [[[0.0; 2]; 2]; 2];
        for (a, ka) in self.instrument.0.iter().enumerate() {
            let first = self.step(&ka.apply(&rho), t[1] - t[0]);
            for (b, kb) in self.instrument.0.iter().enumerate() {
                let second = self.step(&kb.apply(&first), t[2] - t[1]);
                for (c, kc) in self.instrument.0.iter().enumerate() {
                    out[a][b][c] = kc.probability(&second).max(0.0);
                }
            }
        }
        out
    }
}

fn correlator(p: &[[f64; 2]; 2]) -> f64 {
    p[0][0] + p[1][1] - p[0][1] - p[1][0]
}

fn check_times(t1: f64, t2: f64, t3: f64) -> Result<()> {
    if !(t1.is_finite() && t2.is_finite() && t3.is_finite()) || t1 > t2 || t2 > t3 {
        return Err(Error::InvalidTimes(format!("need finite t1 <= t2 <= t3, got ({t1}, {t2}, {t3})")));
    }
    Ok(())
}

/// Projective protocol with A = 2|psi0><psi0| - 1 at t = 0, Δt, 2Δt.
pub fn lgi_projective(p: &Propagator, psi0: &StateVector, dt: f64) -> Result<ProjectiveLgi> {
    p.space().check_dim(psi0.space().dim())?;
    check_times(0.0, dt, 2.0 * dt)?;
    let s1 = p.survival(psi0, dt);
    let s2 = p.survival(psi0, 2.0 * dt);
    let gamma = 2.0 * s1.phase - s2.phase;
    let closed = 4.0 * s1.probability * libm::sqrt(s2.probability) * libm::cos(gamma) - 4.0 * s2.probability + 1.0;

    let proj = CMatrix::outer(psi0.amplitudes(), psi0.amplitudes());
    let rest = &CMatrix::identity(proj.dim()) - &proj;
    let rho0 = proj.clone();
    let engine = Engine { propagator: p, rho0: &rho0, instrument: Instrument([Kraus::Projector(proj), Kraus::Projector(rest)]) };
    let times = [0.0, dt, 2.0 * dt];
    let explicit = LgiResult::new(
        correlator(&engine.pair(times[0], times[1])),
        correlator(&engine.pair(times[1], times[2])),
        correlator(&engine.pair(times[0], times[2])),
        times,
        LgiProtocol::Projective,
    );
    Ok(ProjectiveLgi { explicit, closed_form_k: closed, survival: [s1.probability, s2.probability], gamma })
}

fn coarse_engine<'a>(p: &'a Propagator, rho0: &'a DensityMatrix, partition: &SlotPartition) -> Result<Engine<'a>> {
    if !partition.is_dichotomic() {
        return Err(Error::InvalidPartition(format!("need exactly 2 slots, got {}", partition.n_slots())));
    }
    p.space().check_dim(rho0.space().dim())?;
    partition.space().check_dim(rho0.space().dim())?;
    let plus = partition.plus_slot();
    let kraus = partition.kraus_operators();
    let [k0, k1] = [plus, 1 - plus].map(|s| Kraus::Diagonal(kraus[s].diagonal.clone()));
    Ok(Engine { propagator: p, rho0: rho0.matrix(), instrument: Instrument([k0, k1]) })
}

/// Coarse-grained dichotomic protocol evaluated by exact enumeration.
///
/// Three separate runs give C12, C23 and C13; the C13 run has no
/// measurement at t2. A fourth run measuring at all three times fills the
/// path table.
pub fn lgi_coarse(
    p: &Propagator,
    rho0: &DensityMatrix,
    partition: &SlotPartition,
    t1: f64,
    t2: f64,
    t3: f64,
) -> Result<(LgiResult, PathTable)> {
    check_times(t1, t2, t3)?;
    let engine = coarse_engine(p, rho0, partition)?;
    let table = PathTable {
        joint12: engine.pair(t1, t2),
        joint23: engine.pair(t2, t3),
        joint13: engine.pair(t1, t3),
        joint123: engine.triple([t1, t2, t3]),
    };
    let result = LgiResult::new(
        correlator(&table.joint12),
        correlator(&table.joint23),
        correlator(&table.joint13),
        [t1, t2, t3],
        LgiProtocol::CoarseGrained,
    );
    Ok((result, table))
}

/// Only the three correlator runs, without the path table.
pub fn lgi_coarse_correlators(
    p: &Propagator,
    rho0: &DensityMatrix,
    partition: &SlotPartition,
    t1: f64,
    t2: f64,
    t3: f64,
) -> Result<LgiResult> {
    check_times(t1, t2, t3)?;
    let engine = coarse_engine(p, rho0, partition)?;
    Ok(LgiResult::new(
        correlator(&engine.pair(t1, t2)),
        correlator(&engine.pair(t2, t3)),
        correlator(&engine.pair(t1, t3)),
        [t1, t2, t3],
        LgiProtocol::CoarseGrained,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{build_hamiltonian, coherent_state, diagonalize, Axis, Direction, HamiltonianSpec, SpinSpace};
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn two_level(delta_e: f64) -> (Propagator, StateVector) {
        let s = SpinSpace::new(3).unwrap();
        let h = build_hamiltonian(&HamiltonianSpec::TwoLevel { delta_e, lower: 1, upper: 2 }, s).unwrap();
        let mut a = alloc::vec![C64::new(0.0, 0.0); 4];
        a[1] = C64::new(libm::sqrt(0.5), 0.0);
        a[2] = C64::new(libm::sqrt(0.5), 0.0);
        (diagonalize(&h).unwrap(), StateVector::new(s, a).unwrap())
    }

    #[test]
    fn two_level_closed_form_values() {
        assert!((two_level_k(1.0, PI / 3.0) - 1.5).abs() < 1e-15);
        assert!((two_level_k(1.0, 5.0 * PI / 3.0) - 1.5).abs() < 1e-14);
        assert_eq!(two_level_k(2.0, 0.0), 1.0);
    }

    #[test]
    fn projective_two_level_matches_closed_form() {
        let de = 1.3;
        let (p, psi) = two_level(de);
        for i in 0..=60 {
            let dt = 2.0 * PI / de * i as f64 / 60.0;
            let r = lgi_projective(&p, &psi, dt).unwrap();
            assert!((r.closed_form_k - r.explicit.k).abs() < 1e-9);
            assert!((r.explicit.k - two_level_k(de, dt)).abs() < 1e-12, "{i}");
        }
    }

    #[test]
    fn energy_eigenstate_gives_k_one() {
        let (p, _) = two_level(0.8);
        let eigen = StateVector::basis(SpinSpace::new(3).unwrap(), 2).unwrap();
        let r = lgi_projective(&p, &eigen, 0.7).unwrap();
        assert!((r.explicit.k - 1.0).abs() < 1e-12 && (r.closed_form_k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projective_cat_flip_is_a_two_level_system_with_gap_two_omega() {
        for two_j in [1u32, 6, 21] {
            let s = SpinSpace::new(two_j).unwrap();
            let omega = 0.9;
            let p = diagonalize(&build_hamiltonian(&HamiltonianSpec::CatFlip { omega }, s).unwrap()).unwrap();
            let top = StateVector::basis(s, s.top()).unwrap();
            let at = |x: f64| lgi_projective(&p, &top, x / omega).unwrap();
            let r = at(PI / 6.0);
            assert!((r.explicit.k - 1.5).abs() < 1e-9 && (r.closed_form_k - 1.5).abs() < 1e-9);
            assert!((at(PI / 3.0).explicit.k - two_level_k(2.0, PI / 3.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn coarse_cat_flip_correlators() {
        let s = SpinSpace::new(40).unwrap();
        let omega = 1.0;
        let p = diagonalize(&build_hamiltonian(&HamiltonianSpec::CatFlip { omega }, s).unwrap()).unwrap();
        let part = SlotPartition::hemispheres(s);
        let rho = DensityMatrix::pure(&StateVector::basis(s, s.top()).unwrap());
        for dt in [0.1, 0.4, PI / 6.0, 1.0] {
            let (r, table) = lgi_coarse(&p, &rho, &part, 0.0, dt, 2.0 * dt).unwrap();
            assert!((r.c12 - libm::cos(2.0 * omega * dt)).abs() < 1e-6);
            assert!((r.c23 - libm::cos(2.0 * omega * dt)).abs() < 1e-6);
            assert!((r.c13 - libm::cos(4.0 * omega * dt)).abs() < 1e-6);
            assert!(table.marginal_inconsistency() < 1e-12);
        }
        let (r, _) = lgi_coarse(&p, &rho, &part, 0.0, PI / 6.0, PI / 3.0).unwrap();
        assert!((r.k - 1.5).abs() < 1e-6);
    }

    #[test]
    fn frozen_dynamics_gives_unit_correlators() {
        let s = SpinSpace::new(100).unwrap();
        let p = diagonalize(&build_hamiltonian(&HamiltonianSpec::Rotation { axis: Axis::X, omega: 0.0 }, s).unwrap()).unwrap();
        let part = SlotPartition::hemispheres(s);
        for theta in [0.0, 0.6, 2.4] {
            let rho = DensityMatrix::pure(&coherent_state(s, Direction::new(theta, 0.3).unwrap()));
            let (r, _) = lgi_coarse(&p, &rho, &part, 0.0, 1.0, 2.0).unwrap();
            for c in [r.c12, r.c23, r.c13] {
                assert!((c - 1.0).abs() < 1e-3, "theta {theta}: {c}");
            }
            assert!((r.k - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = SpinSpace::new(4).unwrap();
        let p = diagonalize(&build_hamiltonian(&HamiltonianSpec::CatFlip { omega: 1.0 }, s).unwrap()).unwrap();
        let rho = DensityMatrix::maximally_mixed(s);
        let three = SlotPartition::uniform(s, 3).unwrap();
        assert!(matches!(lgi_coarse(&p, &rho, &three, 0.0, 1.0, 2.0), Err(Error::InvalidPartition(_))));
        let two = SlotPartition::hemispheres(s);
        assert!(matches!(lgi_coarse(&p, &rho, &two, 0.0, 2.0, 1.0), Err(Error::InvalidTimes(_))));
    }

    #[test]
    fn label_flip_leaves_correlators_unchanged() {
        let s = SpinSpace::new(12).unwrap();
        let p = diagonalize(&build_hamiltonian(&HamiltonianSpec::Rotation { axis: Axis::X, omega: 0.7 }, s).unwrap()).unwrap();
        let rho = DensityMatrix::pure(&coherent_state(s, Direction::new(1.0, 2.0).unwrap()));
        let part = SlotPartition::hemispheres(s);
        let kraus = part.kraus_operators();
        let plus = part.plus_slot();
        let straight = coarse_engine(&p, &rho, &part).unwrap();
        let flipped = Engine {
            propagator: &p,
            rho0: rho.matrix(),
            instrument: Instrument([1 - plus, plus].map(|s| Kraus::Diagonal(kraus[s].diagonal.clone()))),
        };
        for (ta, tb) in [(0.0, 0.5), (0.3, 1.9), (1.0, 1.0)] {
            let a = correlator(&straight.pair(ta, tb));
            let b = correlator(&flipped.pair(ta, tb));
            assert!((a - b).abs() < 1e-13);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn k_never_exceeds_algebraic_bound(
            two_j in 1u32..24,
            theta in 0.0f64..PI,
            phi in 0.0f64..6.28,
            omega in 0.05f64..3.0,
            dt in 0.0f64..3.0,
            kind in 0usize..3,
            cut in -0.9f64..0.9,
        ) {
            let s = SpinSpace::new(two_j).unwrap();
            let spec = match kind {
                0 => HamiltonianSpec::CatFlip { omega },
                1 => HamiltonianSpec::Rotation { axis: Axis::X, omega },
                _ => HamiltonianSpec::Rotation { axis: Axis::Y, omega },
            };
            let p = diagonalize(&build_hamiltonian(&spec, s).unwrap()).unwrap();
            let psi = coherent_state(s, Direction::new(theta, phi).unwrap());
            let part = SlotPartition::from_cuts(s, alloc::vec![cut * s.j()]).unwrap();
            let (r, table) = lgi_coarse(&p, &DensityMatrix::pure(&psi), &part, 0.0, dt, 2.0 * dt).unwrap();
            prop_assert!(r.k <= 1.5 + 1e-9);
            for c in [r.c12, r.c23, r.c13] {
                prop_assert!(c.abs() <= 1.0 + 1e-10);
            }
            prop_assert!(table.joint123.iter().flatten().flatten().all(|q| (0.0..=1.0 + 1e-12).contains(q)));
            prop_assert!((table.joint123.iter().flatten().flatten().sum::<f64>() - 1.0).abs() < 1e-10);
            let pr = lgi_projective(&p, &psi, dt).unwrap();
            prop_assert!(pr.explicit.k <= 1.5 + 1e-9);
            prop_assert!((pr.explicit.k - pr.closed_form_k).abs() < 1e-9);
        }
    }
}
