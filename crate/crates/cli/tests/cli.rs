use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vibronic-rf"));
    c.env_remove("VIBRONIC_RF_THREADS");
    c
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn columns(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines().skip(1);
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn propagate_with_partial_sums_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let cfg = config("modelB.json");
    let o = run(&[
        "propagate", "--config", cfg.to_str().unwrap(), "--orders", "0,2,4", "--kt", "6", "--tmax", "0.6",
        "--points", "4", "--oracle", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("U11 on model B"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 2 + 4);
    let oracle = columns(&csv, "re_oracle");
    let d0: f64 = columns(&csv, "re_sum_le_0").iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let d4: f64 = columns(&csv, "re_sum_le_4").iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d4 < d0 / 10.0, "{d4} vs {d0}");
    assert_eq!(columns(&csv, "re_sum_le_4"), columns(&csv, "re"));
}

#[test]
fn response_to_stdout_is_deterministic_across_thread_counts() {
    let cfg = config("modelA.json");
    let args = |threads: &str| {
        let mut c = bin();
        c.args(["--threads", threads, "response", "--config", cfg.to_str().unwrap(), "--pathway", "r2", "--t1", "0.7"])
            .args(["--scan", "t3", "--points", "5", "--nmax", "2", "--kt", "4"]);
        c.output().unwrap()
    };
    let a = args("1");
    let b = args("3");
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# quantity=R2 model=A"));
    assert!(text.contains(" t1=6.99999999999999956e-1 t2=0.00000000000000000e0"));
}

#[test]
fn linear_b_spectrum_in_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let cfg = config("modelB_symmetric.json");
    let o = run(&[
        "response", "--config", cfg.to_str().unwrap(), "--pathway", "linearB", "--points", "16", "--nmax", "2",
        "--kt", "4", "--gamma", "0.2", "--format", "json", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = vibronic_core::SpectrumTable::import_json(&out).unwrap();
    assert_eq!(table.axes[0].0, "w1");
    assert_eq!(table.len(), 16);
}

#[test]
fn fft_needs_power_of_two() {
    let cfg = config("modelA.json");
    let o = run(&["response", "--config", cfg.to_str().unwrap(), "--pathway", "linearA", "--points", "5", "--gamma", "0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("power of two"));
}

#[test]
fn config_and_usage_errors_exit_1() {
    let cfg = config("modelA.json");
    let c = cfg.to_str().unwrap();
    assert_eq!(code(&run(&["propagate", "--config", "/no/such/config.json"])), 1);
    assert_eq!(code(&run(&["response", "--config", c, "--pathway", "R9"])), 1);
    assert_eq!(code(&run(&["response", "--config", c, "--pathway", "R1", "--scan", "t4"])), 1);
    assert_eq!(code(&run(&["response", "--config", c, "--pathway", "linearB"])), 1);
    assert_eq!(code(&run(&["propagate", "--config", c, "--element", "13"])), 1);
    assert_eq!(code(&run(&["propagate", "--config", c, "--orders", "8", "--nmax", "4"])), 1);
    assert_eq!(code(&run(&["validate", "--suite", "everything"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"model":"A","omega_modes":[1.0]}"#).unwrap();
    assert_eq!(code(&run(&["propagate", "--config", bad.to_str().unwrap()])), 1);
}

#[test]
fn unwritable_output_exits_3() {
    let cfg = config("modelA.json");
    let o = run(&["propagate", "--config", cfg.to_str().unwrap(), "--points", "3", "--nmax", "0", "--out", "/no/such/dir/x.csv"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn validate_appendix_suite_passes() {
    let o = run(&["validate", "--suite", "appendix"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("PASS appendix M=7"));
    assert!(text.trim_end().ends_with("0 failed"));
}
