use std::path::Path;
use std::time::SystemTime;

use aloha_bandit::bandit::PolicyKind;
use aloha_bandit::simulator::run_scenario;
use serde::Serialize;

use crate::config::{SimConfig, SweepGrid};
use crate::error::CliError;
use crate::output::{ensure_dir, fmt_float, write_manifest, CsvSink};

pub const HEADER: [&str; 7] = ["load", "alpha", "devices", "seed", "transmissions", "successes", "success_rate"];

#[derive(Serialize)]
struct SweepManifest<'a> {
    base: &'a SimConfig,
    grid: &'a SweepGrid,
}

/// One `sweep.csv` row per grid point per seed, pooling all devices.
/// Grid axes left unset print as empty cells.
pub fn run(base: &SimConfig, grid: &SweepGrid, out: &Path) -> Result<String, CliError> {
    let started = SystemTime::now();
    ensure_dir(out)?;
    let mut csv = CsvSink::create(out.join("sweep.csv"), &HEADER)?;
    let points = grid.points();
    for &(load, alpha, devices) in &points {
        let mut sc = base.scenario.clone();
        if let Some(load) = load {
            sc.interferer_load = vec![load; sc.channels];
        }
        if let Some(n) = devices {
            sc.devices = vec![sc.devices[0].clone(); n];
        }
        if let Some(a) = alpha {
            for d in &mut sc.devices {
                if let PolicyKind::Ucb1 { alpha } = &mut d.policy {
                    *alpha = a;
                }
            }
        }
        for i in 0..base.seeds {
            sc.seed = base.scenario.seed.wrapping_add(i);
            let result = run_scenario(&sc).map_err(|e| CliError::Config(format!("sweep point {:?}: {e}", (load, alpha, devices))))?;
            let n = result.trace.len() as u64;
            let wins = result.trace.iter().filter(|r| r.reward).count() as u64;
            let rate = if n == 0 { 0.0 } else { wins as f64 / n as f64 };
            csv.row([
                load.map(fmt_float).unwrap_or_default(),
                alpha.map(fmt_float).unwrap_or_default(),
                devices.map(|d| d.to_string()).unwrap_or_default(),
                sc.seed.to_string(),
                n.to_string(),
                wins.to_string(),
                fmt_float(rate),
            ])?;
        }
    }
    let path = csv.finish()?;
    let manifest = SweepManifest { base, grid };
    write_manifest(out, "sweep", &manifest, base.scenario.seed, base.seeds, started, &[path])?;
    Ok(format!(
        "{} grid points x {} seeds = {} rows written to {}\n",
        points.len(),
        base.seeds,
        points.len() as u64 * base.seeds,
        out.join("sweep.csv").display()
    ))
}
