use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use aloha_bandit::environment::BernoulliEnv;
use aloha_bandit::metrics::{self, MeanStd};
use aloha_bandit::simulator::run_bench;

use crate::config::BenchConfig;
use crate::error::CliError;
use crate::output::{ensure_dir, flag, fmt_float, write_manifest, CsvSink};

pub const TRACE_HEADER: [&str; 5] = ["policy", "seed", "t", "channel", "reward"];
pub const REGRET_HEADER: [&str; 4] = ["policy", "t", "mean_regret", "std_regret"];
pub const SUMMARY_HEADER: [&str; 9] = [
    "policy",
    "seeds",
    "horizon",
    "mean_success_rate",
    "std_success_rate",
    "mean_regret",
    "std_regret",
    "mean_best_fraction_final",
    "std_best_fraction_final",
];

/// Every policy against the Bernoulli channels for every seed. Writes
/// `bench_trace.csv`, `bench_summary.csv`, `regret.csv` and `manifest.json`
/// into `out`; returns a short text report.
pub fn run(cfg: &BenchConfig, out: &Path) -> Result<String, CliError> {
    let started = SystemTime::now();
    ensure_dir(out)?;
    let env = BernoulliEnv::new(cfg.means.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    let best = env.best_channel();
    // final 10 % of rounds
    let window_start = (cfg.horizon - cfg.horizon / 10) as usize;
    let sample_at: Vec<usize> = (1..=cfg.horizon as usize)
        .filter(|t| t % cfg.regret_every as usize == 0 || *t == cfg.horizon as usize)
        .collect();

    let mut trace_csv = CsvSink::create(out.join("bench_trace.csv"), &TRACE_HEADER)?;
    let mut regret_csv = CsvSink::create(out.join("regret.csv"), &REGRET_HEADER)?;
    let mut summary_csv = CsvSink::create(out.join("bench_summary.csv"), &SUMMARY_HEADER)?;
    let mut report = String::new();

    for policy in &cfg.policies {
        let name = policy.name();
        let mut rates = Vec::with_capacity(cfg.seeds as usize);
        let mut regrets = Vec::with_capacity(cfg.seeds as usize);
        let mut fractions = Vec::with_capacity(cfg.seeds as usize);
        let mut curves = Vec::with_capacity(cfg.seeds as usize);
        for i in 0..cfg.seeds {
            let seed = cfg.seed.wrapping_add(i);
            let trace = run_bench(*policy, &env, cfg.horizon, seed, cfg.reset_interval)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let seed_s = seed.to_string();
            for (t, o) in trace.iter().enumerate() {
                trace_csv.row([name, &seed_s, &(t + 1).to_string(), &o.channel.to_string(), flag(o.reward)])?;
            }
            let curve = metrics::regret_curve(&trace, Some(env.means())).expect("means known");
            rates.push(metrics::cumulative_reward(&trace) as f64 / trace.len() as f64);
            regrets.push(*curve.last().expect("horizon >= 1"));
            fractions.push(metrics::channel_fraction(&trace, best, window_start));
            curves.push(sample_at.iter().map(|&t| curve[t - 1]).collect::<Vec<f64>>());
        }
        let envelope = metrics::aggregate(&curves).expect("equal-length curves");
        for (j, &t) in sample_at.iter().enumerate() {
            regret_csv.row([name, &t.to_string(), &fmt_float(envelope.mean[j]), &fmt_float(envelope.std[j])])?;
        }
        let (rate, regret, frac) = (MeanStd::of(&rates), MeanStd::of(&regrets), MeanStd::of(&fractions));
        summary_csv.row([
            name.to_string(),
            cfg.seeds.to_string(),
            cfg.horizon.to_string(),
            fmt_float(rate.mean),
            fmt_float(rate.std),
            fmt_float(regret.mean),
            fmt_float(regret.std),
            fmt_float(frac.mean),
            fmt_float(frac.std),
        ])?;
        writeln!(
            report,
            "{name:<9} success rate {:.4} ± {:.4}, regret {:.1} ± {:.1}, best-channel share (last 10%) {:.3}",
            rate.mean, rate.std, regret.mean, regret.std, frac.mean
        )
        .unwrap();
    }
    writeln!(
        report,
        "uniform-access baseline {:.4}, best channel {} at {:.4}",
        metrics::random_baseline_rate(env.means()),
        best,
        env.best_mean()
    )
    .unwrap();

    let outputs: Vec<PathBuf> = vec![trace_csv.finish()?, summary_csv.finish()?, regret_csv.finish()?];
    write_manifest(out, "bench", cfg, cfg.seed, cfg.seeds, started, &outputs)?;
    Ok(report)
}
