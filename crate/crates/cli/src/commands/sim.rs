use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use aloha_bandit::simulator::{run_scenario, SimOutput, Source};

use crate::config::SimConfig;
use crate::error::CliError;
use crate::output::{ensure_dir, flag, fmt_float, write_manifest, CsvSink};

pub const TRACE_HEADER: [&str; 7] = ["device_id", "t_index", "time_s", "channel", "uplink_ok", "ack_ok", "reward"];
pub const TRANSMISSIONS_HEADER: [&str; 6] = ["channel", "start_s", "end_s", "source", "device_id", "message"];
pub const SUMMARY_HEADER: [&str; 9] = [
    "seed",
    "device_id",
    "policy",
    "channel",
    "label",
    "tk",
    "sk",
    "xk",
    "success_rate",
];

fn write_trace(out: &SimOutput, path: PathBuf) -> Result<PathBuf, CliError> {
    let mut csv = CsvSink::create(path, &TRACE_HEADER)?;
    for r in &out.trace {
        csv.row([
            r.device_id.to_string().as_str(),
            &r.t_index.to_string(),
            &fmt_float(r.time),
            &r.channel.to_string(),
            flag(r.uplink_ok),
            flag(r.ack_ok),
            flag(r.reward),
        ])?;
    }
    csv.finish()
}

fn write_transmissions(out: &SimOutput, path: PathBuf) -> Result<PathBuf, CliError> {
    let mut csv = CsvSink::create(path, &TRANSMISSIONS_HEADER)?;
    for t in &out.transmissions {
        let (kind, device, message) = match t.source {
            Source::Interferer => ("interferer", String::new(), String::new()),
            Source::Uplink { device, message } => ("uplink", device.to_string(), message.to_string()),
            Source::Ack { device, message } => ("ack", device.to_string(), message.to_string()),
        };
        csv.row([
            t.channel.to_string().as_str(),
            &fmt_float(t.start),
            &fmt_float(t.end),
            kind,
            &device,
            &message,
        ])?;
    }
    csv.finish()
}

/// Run the scenario for each seed. The trace and the airtime log are written
/// for the first (master) seed; `sim_summary.csv` covers every seed.
pub fn run(cfg: &SimConfig, out: &Path) -> Result<String, CliError> {
    let started = SystemTime::now();
    ensure_dir(out)?;
    let base = &cfg.scenario;
    let mut summary = CsvSink::create(out.join("sim_summary.csv"), &SUMMARY_HEADER)?;
    let mut outputs = Vec::new();
    let mut report = String::new();

    for i in 0..cfg.seeds {
        let mut scenario = base.clone();
        scenario.seed = base.seed.wrapping_add(i);
        let result = run_scenario(&scenario).map_err(|e| CliError::Config(e.to_string()))?;
        if i == 0 {
            outputs.push(write_trace(&result, out.join("sim_trace.csv"))?);
            outputs.push(write_transmissions(&result, out.join("transmissions.csv"))?);
        }
        for (d, dev) in scenario.devices.iter().enumerate() {
            let s = result.summary(d as u32, scenario.channels);
            for (k, c) in s.channels.iter().enumerate() {
                summary.row([
                    scenario.seed.to_string(),
                    d.to_string(),
                    dev.policy.name().to_string(),
                    k.to_string(),
                    scenario.channel_labels[k].clone(),
                    c.pulls.to_string(),
                    c.successes.to_string(),
                    fmt_float(c.empirical_mean()),
                    fmt_float(s.success_rate),
                ])?;
            }
            if i == 0 {
                writeln!(report, "seed {} device {d} ({}):", scenario.seed, dev.policy).unwrap();
                write!(report, "{s}").unwrap();
            }
        }
    }
    outputs.insert(1, summary.finish()?);
    write_manifest(out, "sim", cfg, base.seed, cfg.seeds, started, &outputs)?;
    Ok(report)
}
