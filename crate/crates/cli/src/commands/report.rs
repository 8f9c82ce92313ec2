use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use aloha_bandit::metrics::{self, Observation};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TraceKind {
    Sim,
    Bench,
}

fn parse_err(path: &Path, line: u64, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}:{line}: {msg}", path.display()))
}

fn parse_flag(path: &Path, line: u64, field: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(parse_err(path, line, format!("`{field}` must be 0 or 1, got `{other}`"))),
    }
}

/// Per-channel `Tk`/`Sk`/`Xk` tables for a `sim_trace.csv` (one per device)
/// or `bench_trace.csv` (one per policy, pooled over seeds).
///
/// `channels` fixes the table width; otherwise it is inferred from the
/// largest channel index in the file.
pub fn run(path: &Path, channels: Option<usize>) -> Result<String, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => parse_err(path, 1, format!("{other:?}")),
        })?;
    let headers = reader.headers().map_err(|e| parse_err(path, 1, e))?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let kind = if cols == crate::commands::sim::TRACE_HEADER {
        TraceKind::Sim
    } else if cols == crate::commands::bench::TRACE_HEADER {
        TraceKind::Bench
    } else if cols.is_empty() || (cols.len() == 1 && cols[0].is_empty()) {
        TraceKind::Sim
    } else {
        return Err(parse_err(
            path,
            1,
            format!(
                "unrecognized header `{}`; expected `{}` or `{}`",
                cols.join(","),
                crate::commands::sim::TRACE_HEADER.join(","),
                crate::commands::bench::TRACE_HEADER.join(",")
            ),
        ));
    };

    let mut groups: BTreeMap<String, Vec<Observation>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e)
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let (group, channel, reward) = match kind {
            TraceKind::Sim => {
                let device = rec[0].parse::<u32>().map_err(|e| parse_err(path, line, format!("device_id: {e}")))?;
                (format!("device {device}"), &rec[3], parse_flag(path, line, "reward", &rec[6])?)
            }
            TraceKind::Bench => (format!("policy {}", &rec[0]), &rec[3], parse_flag(path, line, "reward", &rec[4])?),
        };
        let channel = channel
            .parse::<usize>()
            .map_err(|e| parse_err(path, line, format!("channel: {e}")))?;
        if !groups.contains_key(&group) {
            order.push(group.clone());
        }
        groups.entry(group).or_default().push(Observation::new(channel, reward));
    }

    let inferred = groups
        .values()
        .flatten()
        .map(|o| o.channel + 1)
        .max()
        .unwrap_or(0);
    let k = channels.unwrap_or(inferred);
    if k < inferred {
        return Err(CliError::Config(format!("trace uses {inferred} channels but --channels is {k}")));
    }

    let mut out = String::new();
    if groups.is_empty() {
        let s = metrics::table_summary(&[], k, None).expect("empty trace");
        writeln!(out, "(empty trace)").unwrap();
        write!(out, "{s}").unwrap();
        return Ok(out);
    }
    for name in order {
        let s = metrics::table_summary(&groups[&name], k, None).expect("channels sized from the trace");
        writeln!(out, "{name}:").unwrap();
        write!(out, "{s}").unwrap();
        writeln!(
            out,
            "gain over uniform access: {}",
            if s.uniform_baseline() > 0.0 {
                format!("{:.2}x", s.success_rate / s.uniform_baseline())
            } else {
                "n/a".into()
            }
        )
        .unwrap();
    }
    Ok(out)
}
