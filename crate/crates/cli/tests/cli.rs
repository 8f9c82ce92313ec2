use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aloha-bandit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(p: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn bench_writes_four_files_and_zero_std_for_one_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bench");
    let o = bin(&["bench", "--seeds", "1", "--horizon", "300", "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["bench_summary.csv", "bench_trace.csv", "manifest.json", "regret.csv"]);

    let trace = read_csv(&out.join("bench_trace.csv"));
    assert_eq!(trace[0], ["policy", "seed", "t", "channel", "reward"]);
    assert_eq!(trace.len(), 1 + 3 * 300);
    assert_eq!(read_csv(&out.join("regret.csv"))[0], ["policy", "t", "mean_regret", "std_regret"]);

    let summary = read_csv(&out.join("bench_summary.csv"));
    let header = &summary[0];
    for row in &summary[1..] {
        for (h, v) in header.iter().zip(row) {
            if h.starts_with("std_") {
                assert_eq!(v, "0", "{h} in {row:?}");
            }
        }
    }

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["horizon"], 300);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn unknown_policy_lists_valid_names() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin(&["bench", "--policy", "ucb1,softmax", "--out", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for name in ["softmax", "ucb1", "thompson", "greedy", "uniform"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.toml");
    fs::write(&cfg, "[scenario]\npreset = \"malin4\"\nack_dealy = 0.3\n").unwrap();
    let o = bin(&["sim", "--config", path(&cfg), "--out", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ack_dealy"), "{}", stderr(&o));
}

#[test]
fn constraint_violation_is_reported_before_running() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.toml");
    fs::write(&cfg, "[[device]]\nuplink_duration = 5.0\nperiod = 5.0\n").unwrap();
    let out = tmp.path().join("run");
    let o = bin(&["sim", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("uplink_duration"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn missing_config_file_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin(&["bench", "--config", path(&tmp.path().join("nope.toml")), "--out", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sim_presets() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("field");
    let o = bin(&["sim", "--preset", "iotligent3", "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("Tk[0] = ") && text.contains("Xk[2] = ") && text.contains("Sk[1] = "), "{text}");
    let trace = read_csv(&out.join("sim_trace.csv"));
    assert_eq!(trace[0], ["device_id", "t_index", "time_s", "channel", "uplink_ok", "ack_ok", "reward"]);
    assert_eq!(trace.len(), 1 + 129);
    assert!(out.join("transmissions.csv").exists());

    for (preset, k) in [("malin4", 4), ("malin16", 16)] {
        let out = tmp.path().join(preset);
        let o = bin(&["sim", "--preset", preset, "--horizon", "200", "--seeds", "2", "--out", path(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        let summary = read_csv(&out.join("sim_summary.csv"));
        assert_eq!(summary.len(), 1 + 2 * k);
    }
}

#[test]
fn report_reproduces_the_field_table() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("sim_trace.csv");
    let mut text = String::from("device_id,t_index,time_s,channel,uplink_ok,ack_ok,reward\n");
    let mut t = 0;
    for (k, tk, sk) in [(0, 29, 0), (1, 61, 7), (2, 39, 2)] {
        for i in 0..tk {
            t += 1;
            let r = u8::from(i < sk);
            text += &format!("0,{t},{},{k},{r},{r},{r}\n", t * 7200);
        }
    }
    fs::write(&trace, text).unwrap();
    let o = bin(&["report", path(&trace)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("Tk[0] = 29\tTk[1] = 61\tTk[2] = 39"), "{out}");
    assert!(out.contains("Xk[0] = 0.000\tXk[1] = 0.115\tXk[2] = 0.051"), "{out}");
    assert!(out.contains("Sk[0] = 0\tSk[1] = 7\tSk[2] = 2"), "{out}");
    assert!(out.contains("uniform-access baseline 5.5%"), "{out}");
}

#[test]
fn report_on_empty_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("sim_trace.csv");
    fs::write(&trace, "device_id,t_index,time_s,channel,uplink_ok,ack_ok,reward\n").unwrap();
    let o = bin(&["report", path(&trace), "--channels", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("Tk[0] = 0\tTk[1] = 0\tTk[2] = 0"), "{}", stdout(&o));
}

#[test]
fn report_flags_truncated_row_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("sim_trace.csv");
    fs::write(
        &trace,
        "device_id,t_index,time_s,channel,uplink_ok,ack_ok,reward\n0,1,5,0,1,1,1\n0,2,10,1,1\n",
    )
    .unwrap();
    let o = bin(&["report", path(&trace)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(":3:"), "{}", stderr(&o));
}

#[test]
fn report_reads_bench_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bench");
    assert!(bin(&["bench", "--seeds", "2", "--horizon", "50", "--policy", "ucb1", "--out", path(&out)]).status.success());
    let o = bin(&["report", path(&out.join("bench_trace.csv"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("policy ucb1:"), "{}", stdout(&o));
}

#[test]
fn sweep_grids() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("sweep.toml");
    fs::write(&cfg, "[scenario]\npreset = \"malin4\"\nhorizon_messages = 30\nseeds = 20\n\n[sweep]\nloads = [0.0, 0.05, 0.1, 0.2]\n").unwrap();
    let out = tmp.path().join("loads");
    let o = bin(&["sweep", "--config", path(&cfg), "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&out.join("sweep.csv"));
    assert_eq!(rows[0], ["load", "alpha", "devices", "seed", "transmissions", "successes", "success_rate"]);
    assert_eq!(rows.len(), 1 + 80);

    let out = tmp.path().join("alpha");
    let o = bin(&["sweep", "--alphas", "0.5,2.0", "--device-counts", "1,2,4", "--horizon", "40", "--seeds", "2", "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 1 + 2 * 3 * 2);
    let alphas: std::collections::BTreeSet<&str> = rows[1..].iter().map(|r| r[1].as_str()).collect();
    assert_eq!(alphas.into_iter().collect::<Vec<_>>(), ["0.5", "2"]);
    // transmissions = devices x horizon
    for r in &rows[1..] {
        let devices: u64 = r[2].parse().unwrap();
        assert_eq!(r[4].parse::<u64>().unwrap(), devices * 40);
    }

    let o = bin(&["sweep", "--out", path(&tmp.path().join("empty"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty sweep grid"), "{}", stderr(&o));
}
