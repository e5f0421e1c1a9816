//! Ring-by-ring evaluation of coherent-state symbols <Ω|A|Ω> and of
//! coherent-state frame operators ∫ f(Ω)|Ω><Ω| dΩ.
//!
//! With <k|Ω> = r_k(θ) e^{i(j-k)φ}, products of amplitudes only depend on φ
//! through e^{iDφ} with D the Dicke-index difference, so each ring costs one
//! O(d²) reduction plus an O(d n_φ) harmonic sum.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use super::grid::SphereGrid;
use crate::spin::{coherent_moduli, SpinSpace};
use crate::{CMatrix, C64};

fn phase_table(n_phi: usize) -> Vec<C64> {
    (0..n_phi).map(|s| C64::from_polar(1.0, TAU * s as f64 / n_phi as f64)).collect()
}

/// Re <Ω|A|Ω> on every grid node, for Hermitian `a`.
pub(crate) fn operator_symbol(space: SpinSpace, a: &CMatrix, grid: &SphereGrid) -> Vec<f64> {
    let d = space.dim();
    let two_j = space.two_j() as usize;
    let n_phi = grid.n_phi();
    let table = phase_table(n_phi);
    let mut out = Vec::with_capacity(grid.len());
    let mut f = vec![C64::new(0.0, 0.0); d];
    for ring in grid.rings() {
        let r = coherent_moduli(space, ring.theta);
        for (dd, fd) in f.iter_mut().enumerate() {
            *fd = (0..d - dd).map(|l| a[(l + dd, l)] * (r[l + dd] * r[l])).sum();
        }
        for l in 0..n_phi {
            let mut v = f[0].re;
            let mut idx = 0usize;
            for fd in f.iter().take(two_j + 1).skip(1) {
                idx += l;
                if idx >= n_phi {
                    idx %= n_phi;
                }
                let e = table[idx];
                v += 2.0 * (fd.re * e.re - fd.im * e.im);
            }
            out.push(v);
        }
    }
    out
}

/// ∫ f(Ω)|Ω><Ω| dΩ for real samples `values` on `grid`.
pub(crate) fn frame_operator(space: SpinSpace, grid: &SphereGrid, values: &[f64]) -> CMatrix {
    let d = space.dim();
    let n_phi = grid.n_phi();
    let table = phase_table(n_phi);
    let mut out = CMatrix::zeros(d);
    let mut g = vec![C64::new(0.0, 0.0); d];
    for (ri, ring) in grid.rings().iter().enumerate() {
        let vals = &values[ri * n_phi..(ri + 1) * n_phi];
        // G_D = sum_l w f(φ_l) e^{-i D φ_l}
        for (dd, gd) in g.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            let mut idx = 0usize;
            for v in vals {
                acc += table[idx].conj() * *v;
                idx += dd;
                if idx >= n_phi {
                    idx %= n_phi;
                }
            }
            *gd = acc * ring.node_weight;
        }
        let r = coherent_moduli(space, ring.theta);
        // <k|Ω><Ω|l> = r_k r_l e^{i(l-k)φ}; entry (k, l) picks G_{k-l}.
        for k in 0..d {
            for l in 0..d {
                let gd = if k >= l { g[k - l] } else { g[l - k].conj() };
                out[(k, l)] += gd * (r[k] * r[l]);
            }
        }
    }
    out
}

/// Diagonal of (2j+1)/4π ∫ 1_region(cos θ) |Ω><Ω| dΩ.
pub(crate) fn frame_weights(space: SpinSpace, grid: &SphereGrid, in_region: impl Fn(f64) -> bool) -> Vec<f64> {
    let d = space.dim();
    let norm = d as f64 / (4.0 * PI);
    let mut out = vec![0.0; d];
    for ring in grid.rings().iter().filter(|r| in_region(r.cos_theta)) {
        let r = coherent_moduli(space, ring.theta);
        let w = ring.node_weight * grid.n_phi() as f64 * norm;
        for (o, rk) in out.iter_mut().zip(&r) {
            *o += w * rk * rk;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{coherent_state, Direction};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symbol_matches_direct_expectation() {
        let space = SpinSpace::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = CMatrix::from_fn(8, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let h = (&g + &g.adjoint()).scale_real(0.5);
        let grid = SphereGrid::new(6, &[0.2]).unwrap();
        let sym = operator_symbol(space, &h, &grid);
        for (i, (dir, _)) in grid.nodes().enumerate().step_by(7) {
            let st = coherent_state(space, dir);
            let direct = st.expectation(&h).re;
            assert!((sym[i] - direct).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn resolution_of_identity() {
        for two_j in [1, 6, 20, 40] {
            let space = SpinSpace::new(two_j).unwrap();
            let grid = SphereGrid::for_space(space, 1, &[]).unwrap();
            let vals = vec![space.dim() as f64 / (4.0 * PI); grid.len()];
            let frame = frame_operator(space, &grid, &vals);
            let err = frame.max_abs_diff(&CMatrix::identity(space.dim()));
            assert!(err < 1e-8, "2j = {two_j}: {err:e}");
        }
    }

    #[test]
    fn frame_of_point_like_weight_is_projector() {
        // A single non-zero ring sample at the pole reproduces |+j><+j| scaled.
        let space = SpinSpace::new(3).unwrap();
        let grid = SphereGrid::new(4, &[]).unwrap();
        let mut vals = vec![0.0; grid.len()];
        let last = grid.len() - 1;
        vals[last] = 1.0;
        let frame = frame_operator(space, &grid, &vals);
        let st = coherent_state(space, grid.direction(last));
        let expect = CMatrix::outer(st.amplitudes(), st.amplitudes()).scale_real(grid.weight(last));
        assert!(frame.max_abs_diff(&expect) < 1e-14);
        let _ = Direction::NORTH;
    }
}
