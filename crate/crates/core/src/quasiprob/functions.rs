use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::distribution::SphereDistribution;
use super::grid::SphereGrid;
use super::symbol::operator_symbol;
use crate::special::ln_gamma;
use crate::spin::{coherent_state, DensityMatrix, Direction, SpinSpace, StateVector};
use crate::{CMatrix, Error, Result, C64};

/// Smallest transfer coefficient accepted before inversion is refused.
const MIN_TRANSFER: f64 = 1e-290;

/// Q(Ω) = (2j+1)/4π <Ω|ρ|Ω>.
pub fn q_function(rho: &DensityMatrix, grid: &Arc<SphereGrid>) -> SphereDistribution {
    let space = rho.space();
    let norm = space.dim() as f64 / (4.0 * PI);
    let mut values = operator_symbol(space, rho.matrix(), grid);
    for v in &mut values {
        *v *= norm;
    }
    SphereDistribution::new(grid.clone(), values).expect("symbol has one value per node")
}

/// ν_K = ∫ |<Ω|T_K0|Ω>|² dΩ for a Hilbert-Schmidt normalized rank-K tensor.
pub fn transfer_coefficient(space: SpinSpace, rank: u32) -> f64 {
    let n = space.two_j() as f64;
    let k = rank as f64;
    if rank > space.two_j() {
        return 0.0;
    }
    4.0 * PI * libm::exp(2.0 * ln_gamma(n + 1.0) - ln_gamma(n + k + 2.0) - ln_gamma(n - k + 1.0))
}

/// Real orthonormal spherical tensors t_KQ, each stored as its single
/// non-zero diagonal: entry c sits at (row c + Q, column c).
pub(crate) struct MultipoleBasis {
    dim: usize,
    /// tensors[K][Q + K]
    tensors: Vec<Vec<Vec<f64>>>,
}

fn raising(space: SpinSpace, r: isize) -> f64 {
    let d = space.dim() as isize;
    if r < 0 || r >= d - 1 {
        return 0.0;
    }
    let j = space.j();
    let m = space.m(r as usize);
    libm::sqrt((j * (j + 1.0) - m * (m + 1.0)).max(0.0))
}

fn normalize(v: &mut [f64]) {
    let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if n > 0.0 {
        for x in v {
            *x /= n;
        }
    }
}

impl MultipoleBasis {
    pub(crate) fn new(space: SpinSpace) -> Self {
        let d = space.dim();
        let two_j = space.two_j() as usize;
        let mut tensors: Vec<Vec<Vec<f64>>> = Vec::with_capacity(two_j + 1);
        for k in 0..=two_j {
            // (J+)^K lives on diagonal K; its entries are products of raising
            // elements, built in log space.
            let mut top = vec![0.0; d];
            let mut logs = vec![f64::NEG_INFINITY; d];
            for (c, l) in logs.iter_mut().enumerate().take(d - k) {
                *l = (c..c + k).map(|i| libm::log(raising(space, i as isize))).sum();
            }
            let lmax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (t, l) in top.iter_mut().zip(&logs) {
                if l.is_finite() {
                    *t = libm::exp(l - lmax);
                }
            }
            normalize(&mut top);
            let mut chain = Vec::with_capacity(2 * k + 1);
            chain.push(top);
            for q in (-(k as isize) + 1..=k as isize).rev() {
                let prev = chain.last().expect("chain starts non-empty");
                let mut next = vec![0.0; d];
                for (c, slot) in next.iter_mut().enumerate() {
                    let row = c as isize + q - 1;
                    if row < 0 || row >= d as isize {
                        continue;
                    }
                    let here = prev[c];
                    let left = if c > 0 { prev[c - 1] } else { 0.0 };
                    *slot = raising(space, row) * here - left * raising(space, c as isize - 1);
                }
                normalize(&mut next);
                chain.push(next);
            }
            chain.reverse();
            // Re-orthogonalize against lower ranks sharing the same diagonal.
            for (qi, v) in chain.iter_mut().enumerate() {
                let q = qi as isize - k as isize;
                for lower in tensors.iter().filter(|t| t.len() / 2 >= q.unsigned_abs()) {
                    let half = lower.len() / 2;
                    let u = &lower[(half as isize + q) as usize];
                    let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                    for (x, y) in v.iter_mut().zip(u) {
                        *x -= dot * y;
                    }
                }
                normalize(v);
            }
            tensors.push(chain);
        }
        Self { dim: d, tensors }
    }

    #[cfg(test)]
    pub(crate) fn tensor(&self, rank: usize, q: isize) -> CMatrix {
        let v = &self.tensors[rank][(rank as isize + q) as usize];
        let mut m = CMatrix::zeros(self.dim);
        for (c, x) in v.iter().enumerate() {
            let r = c as isize + q;
            if r >= 0 && (r as usize) < self.dim && *x != 0.0 {
                m[(r as usize, c)] = C64::new(*x, 0.0);
            }
        }
        m
    }

    /// Tr(t_KQ† a), indexed [K][Q + K].
    pub(crate) fn coefficients(&self, a: &CMatrix) -> Vec<Vec<C64>> {
        let d = self.dim;
        self.tensors
            .iter()
            .enumerate()
            .map(|(k, chain)| {
                chain
                    .iter()
                    .enumerate()
                    .map(|(qi, v)| {
                        let q = qi as isize - k as isize;
                        (0..d)
                            .filter_map(|c| {
                                let r = c as isize + q;
                                (r >= 0 && (r as usize) < d).then(|| a[(r as usize, c)] * v[c])
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Σ_K Π_K(a) s_K, with Π_K the projector onto rank K.
    pub(crate) fn reweight(&self, a: &CMatrix, scale: impl Fn(usize) -> f64) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d);
        for (k, chain) in self.tensors.iter().enumerate() {
            let s = scale(k);
            for (qi, v) in chain.iter().enumerate() {
                let q = qi as isize - k as isize;
                let cols = (0..d).filter(|&c| {
                    let r = c as isize + q;
                    r >= 0 && (r as usize) < d
                });
                let coef: C64 = cols.clone().map(|c| a[(((c as isize) + q) as usize, c)] * v[c]).sum();
                let coef = coef * s;
                for c in cols {
                    out[(((c as isize) + q) as usize, c)] += coef * v[c];
                }
            }
        }
        out
    }
}

/// Operator X with P(Ω) = <Ω|X|Ω>: every rank-K component of ρ divided by ν_K.
pub fn p_operator(rho: &DensityMatrix) -> Result<CMatrix> {
    let space = rho.space();
    let inv: Vec<f64> = (0..=space.two_j())
        .map(|k| {
            let nu = transfer_coefficient(space, k);
            if nu.is_finite() && nu > MIN_TRANSFER {
                Ok(1.0 / nu)
            } else {
                Err(Error::DegenerateTransfer { rank: k as usize })
            }
        })
        .collect::<Result<_>>()?;
    let basis = MultipoleBasis::new(space);
    Ok(basis.reweight(rho.matrix(), |k| inv[k]).hermitian_part())
}

/// Orthonormal spherical harmonics with the Condon-Shortley phase,
/// Y_KQ = table[K (K+1)/2 + Q] e^{iQφ} for 0 <= Q <= K <= k_max.
fn harmonic_table(k_max: usize, x: f64) -> Vec<f64> {
    let idx = |k: usize, q: usize| k * (k + 1) / 2 + q;
    let mut t = vec![0.0; idx(k_max, k_max) + 1];
    let sin = libm::sqrt((1.0 - x * x).max(0.0));
    t[0] = libm::sqrt(1.0 / (4.0 * PI));
    for q in 0..=k_max {
        if q > 0 {
            let qf = q as f64;
            t[idx(q, q)] = -libm::sqrt((2.0 * qf + 1.0) / (2.0 * qf)) * sin * t[idx(q - 1, q - 1)];
        }
        if q < k_max {
            t[idx(q + 1, q)] = libm::sqrt(2.0 * q as f64 + 3.0) * x * t[idx(q, q)];
        }
        let qf = q as f64;
        for k in q + 2..=k_max {
            let kf = k as f64;
            let a = libm::sqrt((4.0 * kf * kf - 1.0) / (kf * kf - qf * qf));
            let b = libm::sqrt(((kf - 1.0) * (kf - 1.0) - qf * qf) / (4.0 * (kf - 1.0) * (kf - 1.0) - 1.0));
            t[idx(k, q)] = a * (x * t[idx(k - 1, q)] - b * t[idx(k - 2, q)]);
        }
    }
    t
}

/// Band-limited P-function: ∫ P(Ω)|Ω><Ω| dΩ = ρ.
///
/// Each multipole coefficient is mapped straight onto its spherical
/// harmonic, <Ω|t_KQ|Ω> = (-1)^K sqrt(ν_K) Y_KQ(Ω), so the large factors
/// 1/ν_K never meet the cancellation of a Dicke-basis symbol sum.
pub fn p_function(rho: &DensityMatrix, grid: &Arc<SphereGrid>) -> Result<SphereDistribution> {
    let space = rho.space();
    let two_j = space.two_j() as usize;
    let mut gain = Vec::with_capacity(two_j + 1);
    for k in 0..=two_j {
        let nu = transfer_coefficient(space, k as u32);
        if !(nu.is_finite() && nu > MIN_TRANSFER) {
            return Err(Error::DegenerateTransfer { rank: k });
        }
        gain.push(if k % 2 == 0 { 1.0 } else { -1.0 } / libm::sqrt(nu));
    }
    let coef = MultipoleBasis::new(space).coefficients(rho.matrix());
    let n_phi = grid.n_phi();
    let table: Vec<C64> = (0..n_phi).map(|s| C64::from_polar(1.0, core::f64::consts::TAU * s as f64 / n_phi as f64)).collect();
    let mut values = Vec::with_capacity(grid.len());
    let mut h_pos = vec![C64::new(0.0, 0.0); two_j + 1];
    let mut h_neg = vec![C64::new(0.0, 0.0); two_j + 1];
    for ring in grid.rings() {
        let y = harmonic_table(two_j, ring.cos_theta);
        for q in 0..=two_j {
            let sign_q = if q % 2 == 0 { 1.0 } else { -1.0 };
            let (mut hp, mut hn) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for k in q..=two_j {
                let yk = gain[k] * y[k * (k + 1) / 2 + q];
                hp += coef[k][k + q] * yk;
                hn += coef[k][k - q] * (yk * sign_q);
            }
            h_pos[q] = hp;
            h_neg[q] = hn;
        }
        for l in 0..n_phi {
            let mut v = h_pos[0];
            let mut idx = 0usize;
            for q in 1..=two_j {
                idx += l;
                if idx >= n_phi {
                    idx %= n_phi;
                }
                let e = table[idx];
                v += h_pos[q] * e + h_neg[q] * e.conj();
            }
            values.push(v.re);
        }
    }
    SphereDistribution::new(grid.clone(), values)
}

/// Cat state cos(ωt)|Ω₁> + sin(ωt)|Ω₂> and the mixture cos²|Ω₁><Ω₁| +
/// sin²|Ω₂><Ω₂|, with Ω₂ the antipode of `axis`.
pub fn cat_density_pair_along(space: SpinSpace, omega_t: f64, axis: Direction) -> (DensityMatrix, DensityMatrix) {
    let up = coherent_state(space, axis);
    let [x, y, z] = axis.unit_vector();
    let down = coherent_state(space, Direction::from_vector([-x, -y, -z]).unwrap_or(Direction::SOUTH));
    let (s, c) = libm::sincos(omega_t);
    let amps: Vec<C64> = up.amplitudes().iter().zip(down.amplitudes()).map(|(a, b)| a * c + b * s).collect();
    let sup = DensityMatrix::pure(&StateVector::from_raw(space, amps));
    let a = CMatrix::outer(up.amplitudes(), up.amplitudes()).scale_real(c * c);
    let b = CMatrix::outer(down.amplitudes(), down.amplitudes()).scale_real(s * s);
    let mix = DensityMatrix::from_raw(space, (&a + &b).hermitian_part());
    (sup, mix)
}

/// The pair for the cat along z: |+j> and |-j>.
pub fn cat_density_pair(space: SpinSpace, omega_t: f64) -> (DensityMatrix, DensityMatrix) {
    cat_density_pair_along(space, omega_t, Direction::NORTH)
}

/// (Q_sup, Q_mix) at time t for the cat flip with frequency ω.
pub fn q_of_cat_pair(
    space: SpinSpace,
    t: f64,
    omega: f64,
    grid: &Arc<SphereGrid>,
) -> (SphereDistribution, SphereDistribution) {
    let (sup, mix) = cat_density_pair(space, omega * t);
    (q_function(&sup, grid), q_function(&mix, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasiprob::{make_grid, PolarRegion};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_density(space: SpinSpace, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let d = space.dim();
        let g = CMatrix::from_fn(d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = &g * &g.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new(space, m.scale_real(1.0 / tr).hermitian_part()).unwrap()
    }

    fn grid(two_j: u32) -> Arc<SphereGrid> {
        Arc::new(make_grid(SpinSpace::new(two_j).unwrap(), 2).unwrap())
    }

    #[test]
    fn q_of_pole_state() {
        let space = SpinSpace::new(20).unwrap();
        let g = grid(20);
        let q = q_function(&DensityMatrix::pure(&coherent_state(space, Direction::NORTH)), &g);
        assert!((q.integral() - 1.0).abs() < 1e-10);
        for (i, (d, _)) in g.nodes().enumerate().step_by(13) {
            let expect = 21.0 / (4.0 * PI) * libm::pow(libm::cos(d.theta() / 2.0), 40.0);
            assert!((q.values()[i] - expect).abs() < 1e-12);
        }
        let north = coherent_state(space, Direction::NORTH);
        let rho = DensityMatrix::pure(&north);
        let peak = 21.0 / (4.0 * PI) * rho.expectation(&CMatrix::outer(north.amplitudes(), north.amplitudes())).re;
        assert!((peak - 1.6711).abs() < 1e-4);
        assert!(q.max() < peak);
        let north = q.integrate_region(&PolarRegion::northern_hemisphere());
        assert!(north > 0.5 && north < 1.0);
    }

    #[test]
    fn q_normalized_and_positive_for_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for two_j in [2, 10, 20, 100] {
            let space = SpinSpace::new(two_j).unwrap();
            let g = grid(two_j);
            let q = q_function(&random_density(space, &mut rng), &g);
            assert!((q.integral() - 1.0).abs() < 1e-8, "2j = {two_j}");
            assert!(q.min() >= -1e-10);
        }
    }

    #[test]
    fn q_of_maximally_mixed_is_flat() {
        let space = SpinSpace::new(7).unwrap();
        let q = q_function(&DensityMatrix::maximally_mixed(space), &grid(7));
        assert!(q.values().iter().all(|v| (v - 1.0 / (4.0 * PI)).abs() < 1e-14));
    }

    #[test]
    fn transfer_coefficients_match_quadrature() {
        for two_j in [1, 4, 9, 20] {
            let space = SpinSpace::new(two_j).unwrap();
            let basis = MultipoleBasis::new(space);
            let g = make_grid(space, 2).unwrap();
            for k in 0..=two_j as usize {
                let s = operator_symbol(space, &basis.tensor(k, 0), &g);
                let nu: f64 = s.iter().zip(g.nodes()).map(|(v, (_, w))| w * v * v).sum();
                let exact = transfer_coefficient(space, k as u32);
                assert!((nu - exact).abs() < 1e-10 * exact.max(1e-300) + 1e-13, "2j={two_j} K={k}: {nu} vs {exact}");
            }
        }
    }

    #[test]
    fn multipole_basis_is_orthonormal_and_complete() {
        let space = SpinSpace::new(6).unwrap();
        let basis = MultipoleBasis::new(space);
        let mut tensors = Vec::new();
        for k in 0..=6usize {
            for q in -(k as isize)..=k as isize {
                tensors.push(basis.tensor(k, q));
            }
        }
        assert_eq!(tensors.len(), 49);
        for (a, ta) in tensors.iter().enumerate() {
            for (b, tb) in tensors.iter().enumerate() {
                let hs = (&ta.adjoint() * tb).trace();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((hs.re - expect).abs() < 1e-12 && hs.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tensor_symbols_are_signed_harmonics() {
        let space = SpinSpace::new(8).unwrap();
        let basis = MultipoleBasis::new(space);
        let g = make_grid(space, 1).unwrap();
        for k in 0..=8usize {
            let scale = if k % 2 == 0 { 1.0 } else { -1.0 } * libm::sqrt(transfer_coefficient(space, k as u32));
            for q in -(k as isize)..=k as isize {
                let t = basis.tensor(k, q);
                // Re and Im parts of the symbol from two Hermitian combinations.
                let re = operator_symbol(space, &(&t + &t.adjoint()).scale_real(0.5), &g);
                let im = operator_symbol(space, &(&t - &t.adjoint()).scale(C64::new(0.0, -0.5)), &g);
                for (i, (dir, _)) in g.nodes().enumerate().step_by(5) {
                    let y = harmonic_table(8, libm::cos(dir.theta()));
                    let qa = q.unsigned_abs();
                    let mut yv = C64::from_polar(y[k * (k + 1) / 2 + qa], qa as f64 * dir.phi());
                    if q < 0 {
                        yv = yv.conj() * if qa % 2 == 0 { 1.0 } else { -1.0 };
                    }
                    let want = yv * scale;
                    assert!((re[i] - want.re).abs() < 1e-12 && (im[i] - want.im).abs() < 1e-12, "K={k} Q={q}");
                }
            }
        }
    }

    #[test]
    fn p_operator_symbol_matches_harmonic_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let space = SpinSpace::new(6).unwrap();
        let g = grid(6);
        let rho = random_density(space, &mut rng);
        let direct = operator_symbol(space, &p_operator(&rho).unwrap(), &g);
        let p = p_function(&rho, &g).unwrap();
        let scale = p.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in direct.iter().zip(p.values()) {
            assert!((a - b).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn p_of_maximally_mixed_is_flat() {
        let space = SpinSpace::new(9).unwrap();
        let p = p_function(&DensityMatrix::maximally_mixed(space), &grid(9)).unwrap();
        assert!(p.values().iter().all(|v| (v - 1.0 / (4.0 * PI)).abs() < 1e-12));
    }

    #[test]
    fn p_reconstructs_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for two_j in [1, 2, 5, 12, 20] {
            let space = SpinSpace::new(two_j).unwrap();
            let g = grid(two_j);
            let rho = random_density(space, &mut rng);
            let p = p_function(&rho, &g).unwrap();
            let back = p.coherent_frame_operator(space);
            let err = (&back - rho.matrix()).frobenius_norm();
            assert!(err < 1e-6, "2j = {two_j}: {err:e}");
            assert!((p.integral() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn p_of_pole_state_peaks_above_q() {
        let space = SpinSpace::new(20).unwrap();
        let g = grid(20);
        let rho = DensityMatrix::pure(&coherent_state(space, Direction::NORTH));
        let p = p_function(&rho, &g).unwrap();
        let q = q_function(&rho, &g);
        let (_, at) = p.argmax();
        assert!(at.theta() < 0.3);
        assert!(p.max() > q.max());
        let err = (&p.coherent_frame_operator(space) - rho.matrix()).frobenius_norm();
        assert!(err < 1e-6);
    }

    #[test]
    fn cat_p_has_negative_values_and_q_pair_agrees() {
        let space = SpinSpace::new(20).unwrap();
        let g = grid(20);
        let (sup, mix) = cat_density_pair(space, PI / 4.0);
        let p_sup = p_function(&sup, &g).unwrap();
        assert!(p_sup.min() < 0.0);
        let p_mix = p_function(&mix, &g).unwrap();
        assert!(p_mix.min().abs() < 1e-3 * p_sup.min().abs());
        let (qs, qm) = q_of_cat_pair(space, PI / 4.0, 1.0, &g);
        let ov = qs.overlap(&qm).unwrap();
        assert!(ov >= 1.0 - 10.0 * libm::pow(0.5, 20.0), "{ov}");
    }

    #[test]
    fn q_pair_endpoints() {
        let space = SpinSpace::new(8).unwrap();
        let g = grid(8);
        let top = q_function(&DensityMatrix::pure(&StateVector::basis(space, 8).unwrap()), &g);
        let bottom = q_function(&DensityMatrix::pure(&StateVector::basis(space, 0).unwrap()), &g);
        let (s0, m0) = q_of_cat_pair(space, 0.0, 2.0, &g);
        assert!(s0.max_discrepancy(&top).unwrap().0 < 1e-14 && m0.max_discrepancy(&top).unwrap().0 < 1e-14);
        let (s1, m1) = q_of_cat_pair(space, PI / 4.0, 2.0, &g);
        assert!(s1.max_discrepancy(&bottom).unwrap().0 < 1e-12 && m1.max_discrepancy(&bottom).unwrap().0 < 1e-12);
    }

    #[test]
    fn opposite_poles_barely_overlap() {
        let space = SpinSpace::new(100).unwrap();
        let g = grid(100);
        let up = q_function(&DensityMatrix::pure(&coherent_state(space, Direction::NORTH)), &g);
        let down = q_function(&DensityMatrix::pure(&coherent_state(space, Direction::SOUTH)), &g);
        assert!(up.overlap(&down).unwrap() < 1e-10);
        assert!((up.overlap(&up).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rotated_overlap_decays_monotonically() {
        let space = SpinSpace::new(20).unwrap();
        let g = grid(20);
        let base = q_function(&DensityMatrix::pure(&coherent_state(space, Direction::NORTH)), &g);
        let mut last = 1.0 + 1e-12;
        for i in 0..=30 {
            let dt = PI * i as f64 / 30.0;
            let other = q_function(&DensityMatrix::pure(&coherent_state(space, Direction::new(dt, 0.0).unwrap())), &g);
            let ov = base.overlap(&other).unwrap();
            assert!(ov <= last + 1e-12 && ov >= -1e-15, "step {i}: {ov} after {last}");
            last = ov;
        }
        // Antipodal case: ∫ sqrt(Q1 Q2) = (j!)² / (2j)! = 1 / C(2j, j).
        assert!((last - 1.0 / 184756.0).abs() < 1e-12, "{last}");
    }
}
