use std::sync::Arc;

use macroreal_core::quasiprob::{cat_density_pair_along, make_grid, p_function, q_function, SphereDistribution};
use macroreal_core::spin::Direction;
use serde::Serialize;

use crate::config::{spin_space, QpfCheck, QpfRenderConfig};
use crate::error::CliError;
use crate::output::{distribution_csv, Artifacts, Check};

#[derive(Serialize)]
struct Report {
    nodes: usize,
    band_limit: usize,
    q_overlap: f64,
    q_sup_integral: f64,
    q_mix_integral: f64,
    p_sup_integral: f64,
    p_mix_integral: f64,
    q_sup_min: f64,
    q_mix_min: f64,
    p_sup_min: f64,
    p_mix_min: f64,
    p_sup_max: f64,
    p_mix_max: f64,
}

pub fn run(c: &QpfRenderConfig) -> Result<Artifacts, CliError> {
    if c.oversample == 0 {
        return Err(CliError::Config("oversample must be >= 1".into()));
    }
    let space = spin_space(c.j)?;
    let frame = c.frame.map(|d| d.direction()).transpose()?.unwrap_or(Direction::NORTH);
    let grid = Arc::new(make_grid(space, c.oversample)?);
    let (sup, mix) = cat_density_pair_along(space, c.omega_t, frame);
    let ((p_sup, p_mix), (q_sup, q_mix)) = rayon::join(
        || (p_function(&sup, &grid), p_function(&mix, &grid)),
        || (q_function(&sup, &grid), q_function(&mix, &grid)),
    );
    let (p_sup, p_mix) = (p_sup?, p_mix?);
    let q_overlap = q_sup.overlap(&q_mix)?;

    let mut art = Artifacts::default();
    let norm = |name: &str, d: &SphereDistribution, tol: f64| {
        let e = (d.integral() - 1.0).abs();
        Check::contract(name, e <= tol, format!("|integral - 1| = {e:.3e} (tolerance {tol:e})"))
    };
    art.check(norm("q_sup_normalized", &q_sup, 1e-8));
    art.check(norm("q_mix_normalized", &q_mix, 1e-8));
    art.check(norm("p_sup_normalized", &p_sup, 1e-6));
    art.check(norm("p_mix_normalized", &p_mix, 1e-6));
    for check in &c.checks {
        art.check(match *check {
            QpfCheck::QOverlapAtLeast { value } => {
                Check::expectation("q_overlap_at_least", q_overlap >= value, format!("overlap(Q_sup, Q_mix) = {q_overlap:.12} (want >= {value})"))
            }
            QpfCheck::PSupNegative => {
                Check::expectation("p_sup_negative", p_sup.min() < 0.0, format!("min P_sup = {:.6e}", p_sup.min()))
            }
            QpfCheck::PMixAtLeast { value } => {
                Check::expectation("p_mix_at_least", p_mix.min() >= value, format!("min P_mix = {:.6e} (want >= {value:e})", p_mix.min()))
            }
            QpfCheck::QSupAtLeast { value } => {
                Check::expectation("q_sup_at_least", q_sup.min() >= value, format!("min Q_sup = {:.6e} (want >= {value:e})", q_sup.min()))
            }
        });
    }

    art.add_file("p_sup.csv", distribution_csv(&p_sup));
    art.add_file("p_mix.csv", distribution_csv(&p_mix));
    art.add_file("q_sup.csv", distribution_csv(&q_sup));
    art.add_file("q_mix.csv", distribution_csv(&q_mix));
    art.add_json(
        "qpf_render.json",
        &Report {
            nodes: grid.len(),
            band_limit: grid.band_limit(),
            q_overlap,
            q_sup_integral: q_sup.integral(),
            q_mix_integral: q_mix.integral(),
            p_sup_integral: p_sup.integral(),
            p_mix_integral: p_mix.integral(),
            q_sup_min: q_sup.min(),
            q_mix_min: q_mix.min(),
            p_sup_min: p_sup.min(),
            p_mix_min: p_mix.min(),
            p_sup_max: p_sup.max(),
            p_mix_max: p_mix.max(),
        },
    );
    Ok(art)
}
