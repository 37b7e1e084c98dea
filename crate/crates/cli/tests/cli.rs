use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn losmimo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_losmimo"))
        .args(args)
        .env_remove("LOSMIMO_THREADS")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = losmimo(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn records(csv_text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn config_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "command = \"table1\"\nn = 32\nseed = 11\n[snr]\nstart_db = -20\nstop_db = 10\nstep_db = 10\n",
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&["--config", path_str(&cfg), "--output", path_str(&a)]);
    ok(&["--config", path_str(&cfg), "--output", path_str(&b)]);
    let first = fs::read(&a).unwrap();
    assert_eq!(first, fs::read(&b).unwrap());

    let (header, rows) = records(std::str::from_utf8(&first).unwrap());
    assert_eq!(rows.len(), 4);
    let svd = column(&header, "rotated_svd_pct");
    for (row, expected) in rows.iter().zip([95.0, 97.1, 99.1, 100.0]) {
        assert!((row[svd] - expected).abs() <= 0.5, "{} vs {expected}", row[svd]);
    }
}

#[test]
fn flags_override_config_values() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(&cfg, r#"{"command": "bound-sweep", "n_tx": 4, "n_rx": 4, "snr": {"start_db": 0, "stop_db": 20, "step_db": 10}}"#)
        .unwrap();
    let (_, base) = records(&ok(&["--config", path_str(&cfg)]));
    assert_eq!(base.len(), 3);
    let (header, rows) = records(&ok(&["--config", path_str(&cfg), "bound-sweep", "--nt", "16", "--snr-step-db", "5"]));
    assert_eq!(rows.len(), 5);
    let rho = column(&header, "rho");
    assert_eq!(rows.last().unwrap()[rho], 4.0);
    assert_eq!(base.last().unwrap()[rho], 4.0);
    let bound = column(&header, "bound_bits_per_s_hz");
    assert!(rows[2][bound] > base[1][bound], "more transmit antennas raise the bound");
}

#[test]
fn headers_name_units() {
    let table = ok(&["table1", "--n", "8", "--snr-start-db", "0", "--snr-stop-db", "0"]);
    let header = table.lines().next().unwrap();
    assert!(header.contains("snr_db") && header.contains("bits_per_s_hz") && header.contains("_pct"));
    let sweep = ok(&["bound-sweep", "--snr-start-db", "0", "--snr-stop-db", "0"]);
    assert!(sweep.starts_with("snr_db,rho,bound_bits_per_s_hz"));
}

#[test]
fn transceive_reads_geometry_files() {
    let dir = TempDir::new().unwrap();
    let physical = dir.path().join("link.toml");
    fs::write(
        &physical,
        "wavelength = 0.005\nrange = 20.0\nn_tx = 16\nn_rx = 16\nspacing_tx = 0.079\nspacing_rx = 0.079\nelev_rx = 1.0\n",
    )
    .unwrap();
    let out = ok(&["transceive", "--geometry", path_str(&physical), "--snr-db", "0", "--model", "exact", "--seed", "5"]);
    assert!(out.starts_with("stream,sinr_db,rate_bits\n"));
    let (_, rows) = records(&out);
    assert!(!rows.is_empty());
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], k as f64);
        let sinr = 10f64.powf(row[1] / 10.0);
        assert!((row[2] - (1.0 + sinr).log2()).abs() < 1e-9);
    }

    let shorthand = dir.path().join("short.json");
    fs::write(&shorthand, r#"{"n_tx": 16, "n_rx": 16, "eta": 0.5}"#).unwrap();
    let (_, fixed) = records(&ok(&["transceive", "--geometry", path_str(&shorthand), "--snr-db", "-10", "--streams", "3"]));
    assert_eq!(fixed.len(), 3);
    let best = ok(&["transceive", "--geometry", path_str(&shorthand), "--snr-db", "-10", "--sweep-streams"]);
    let rate = |rows: &[Vec<f64>]| rows.iter().map(|r| r[2]).sum::<f64>();
    assert!(rate(&records(&best).1) >= rate(&fixed) - 1e-12);
}

#[test]
fn plan_emits_json_record() {
    let out = ok(&["plan", "--r", "0.48", "--snr-min-db", "-10", "--nt", "256", "--nr", "256"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["count"], 3);
    let angles: Vec<f64> = v["angles_deg"].as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).collect();
    assert!(angles[0].abs() < 1e-12 && (angles[1] - 61.0).abs() <= 1.0 && (angles[2] - 77.0).abs() <= 1.0);
    assert!((v["guarantee"].as_f64().unwrap() - 0.959).abs() <= 1e-3);
}

#[test]
fn plot_script_points_at_csv() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("surrogate.csv");
    let script = dir.path().join("surrogate.gp");
    ok(&["surrogate-scaling", "--sizes", "64,128,256,512", "-o", path_str(&csv_path), "--plot-script", path_str(&script)]);
    let text = fs::read_to_string(&script).unwrap();
    assert!(text.contains(path_str(&csv_path)));

    let (header, rows) = records(&fs::read_to_string(&csv_path).unwrap());
    let rel = column(&header, "relative_frobenius_error");
    assert!(rows.windows(2).all(|w| w[1][rel] < w[0][rel]));
}

#[test]
fn polarization_histogram_is_bimodal() {
    let (header, rows) = records(&ok(&["polarization", "--n", "512", "--eta", "0.5", "--bins", "5", "--upper", "1.25"]));
    let frac = column(&header, "fraction");
    let total: f64 = rows.iter().map(|r| r[frac]).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(rows[0][frac] > 0.4, "mass near zero: {}", rows[0][frac]);
    assert!(rows[3][frac] + rows[4][frac] > 0.4, "mass near one");
    assert!(rows[1][frac] + rows[2][frac] < 0.1, "little mass in between");
}

#[test]
fn eta_sweep_envelope_covers_finite_spacings() {
    // 25 log-spaced points on [1/64, 1] include 1/8 and 1.
    let grid = ["--snr-start-db", "-15", "--snr-stop-db", "15", "--snr-step-db", "5"];
    let mut sweep_args = vec!["eta-sweep", "--nt", "64", "--nr", "64", "--eta-points", "25", "--envelope"];
    sweep_args.extend(grid);
    let (sh, sweep) = records(&ok(&sweep_args));
    let mut three_args = vec!["three-spacing", "--n", "64", "--eta-points", "25"];
    three_args.extend(grid);
    let (th, three) = records(&ok(&three_args));
    assert_eq!(sweep.len(), three.len());
    let share = column(&sh, "share_pct");
    let (mid, wide) = (column(&th, "mid_pct"), column(&th, "wide_pct"));
    let (best, full) = (column(&th, "best_of_three_pct"), column(&th, "eta_sweep_pct"));
    for (s, t) in sweep.iter().zip(&three) {
        assert!(s[share] >= t[mid].max(t[wide]) - 1e-6, "{s:?} vs {t:?}");
        assert!(t[full] >= s[share] - 1e-9 && t[full] >= t[best] - 1e-9);
    }
}

#[test]
fn validation_failures_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.toml");
    for args in [
        vec!["table1", "--snr-start-db", "5", "--snr-stop-db", "0"],
        vec!["--config", path_str(&missing)],
        vec!["transceive", "--snr-db", "0"],
        vec!["transceive", "--geometry", path_str(&missing), "--snr-db", "0"],
        vec!["plan", "--r", "1.5"],
        vec!["surrogate-scaling", "--plot-script", "x.gp"],
    ] {
        let out = losmimo(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"), "{args:?} gave no diagnostic");
    }
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "command = \"table1\"\nsnr_grid = 3\n").unwrap();
    assert!(!losmimo(&["--config", path_str(&bad)]).status.success());
}

#[test]
fn thread_count_comes_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_losmimo"))
        .args(["surrogate-scaling", "--sizes", "64"])
        .env("LOSMIMO_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_losmimo"))
        .args(["surrogate-scaling", "--sizes", "64"])
        .env("LOSMIMO_THREADS", "many")
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
