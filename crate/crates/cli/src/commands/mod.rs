mod circuit_bench;
mod classify;
mod cond_check;
mod lgi_scan;
mod qpf_render;

use crate::config::CommandConfig;
use crate::error::CliError;
use crate::output::Artifacts;

pub fn execute(config: &CommandConfig) -> Result<Artifacts, CliError> {
    match config {
        CommandConfig::LgiScan(c) => lgi_scan::run(c),
        CommandConfig::QpfRender(c) => qpf_render::run(c),
        CommandConfig::Classify(c) => classify::run(c),
        CommandConfig::CondCheck(c) => cond_check::run(c),
        CommandConfig::CircuitBench(c) => circuit_bench::run(c),
    }
}
