use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quantum_market::market_data::to_csv;
use quantum_market::synthetic::{generate_series, PriceProcess, SyntheticSpec};
use tempfile::TempDir;

fn qmarket(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmarket")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = qmarket(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

fn bimodal_input(dir: &Path, seed: u64) -> String {
    let spec = SyntheticSpec::new(
        400,
        PriceProcess::BimodalAccumulation { peaks: vec![20.0, 26.0], weights: vec![1.0, 1.0] },
        seed,
    );
    write(dir, "bimodal.csv", &to_csv(generate_series(&spec).unwrap().bars()))
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn error_json(out: &Output) -> serde_json::Value {
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn ingest_reports_rotation_and_decay() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("date,open,high,low,close,volume\n");
    for d in 1..=28 {
        csv.push_str(&format!("2021-02-{d:02},10,11,9,10.5,1000\n"));
    }
    let input = write(dir.path(), "flat.csv", &csv);
    let report = ok(&["ingest", "--input", &input, "--free-float", "10000"]);
    assert!(report.starts_with("field,value\nbars,28\nfirst_date,2021-02-01\nlast_date,2021-02-28\n"));
    assert!(report.contains("rotation_period,10\n"));
    assert!(report.contains("turnover_probability,0.1\n"));
    let json: serde_json::Value = serde_json::from_str(&ok(&["ingest", "--input", &input, "--free-float", "10000", "--format", "json"])).unwrap();
    let lambda = json["lambda"].as_f64().unwrap();
    assert!((lambda + (0.9f64).ln()).abs() < 1e-15);
}

#[test]
fn missing_file_names_the_path() {
    let out = qmarket(&["ingest", "--input", "/no/such/bars.csv", "--free-float", "5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = error_json(&out);
    assert_eq!(err["error_code"], "io_error");
    assert!(err["message"].as_str().unwrap().contains("/no/such/bars.csv"));

    let plain = qmarket(&["ingest", "--input", "/no/such/bars.csv", "--free-float", "5"]);
    assert!(!plain.status.success());
    assert!(String::from_utf8_lossy(&plain.stderr).contains("/no/such/bars.csv"));
}

#[test]
fn saturated_turnover_is_an_error() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "big.csv", "date,open,high,low,close,volume\n2021-01-04,1,1,1,1,500\n");
    let err = error_json(&qmarket(&["ingest", "--input", &input, "--free-float", "400", "--format", "json"]));
    assert_eq!(err["error_code"], "turnover_saturated");
}

#[test]
fn empty_input_is_an_error() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "empty.csv", "date,open,high,low,close,volume\n");
    let err = error_json(&qmarket(&["potential", "--input", &input, "--free-float", "10", "--format", "json"]));
    assert_eq!(err["error_code"], "invalid_parameter");
}

#[test]
fn bad_row_reports_line() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "bad.csv", "date,open,high,low,close,volume\n2021-01-04,9.2,9.0,9.5,9.2,10\n");
    let err = error_json(&qmarket(&["ingest", "--input", &input, "--free-float", "10", "--format", "json"]));
    assert_eq!(err["error_code"], "invalid_bar");
    assert_eq!(err["message"], "high < low at line 2");
}

#[test]
fn usage_errors_exit_2() {
    let out = qmarket(&["forecast", "--grid-k", "lots", "--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error_code"], "usage");
    assert_eq!(qmarket(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qmarket(&["--help"]).status.code(), Some(0));
}

#[test]
fn bimodal_potential_peaks_at_the_injected_prices() {
    let dir = TempDir::new().unwrap();
    let input = bimodal_input(dir.path(), 5);
    let potential = rows(&ok(&["potential", "--input", &input, "--free-float", "5000000"]));
    let spacing = potential[1][0] - potential[0][0];
    let local: Vec<&Vec<f64>> = (1..potential.len() - 1)
        .filter(|&j| potential[j][1] > potential[j - 1][1] && potential[j][1] >= potential[j + 1][1])
        .map(|j| &potential[j])
        .collect();
    let mut top: Vec<&Vec<f64>> = local.clone();
    top.sort_by(|a, b| b[1].partial_cmp(&a[1]).unwrap());
    let mut prices: Vec<f64> = top[..2].iter().map(|r| r[0]).collect();
    prices.sort_by(f64::total_cmp);
    assert!((prices[0] - 20.0).abs() <= 1.5 * spacing, "{prices:?}");
    assert!((prices[1] - 26.0).abs() <= 1.5 * spacing, "{prices:?}");
}

#[test]
fn flat_input_gives_flat_potential() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("date,open,high,low,close,volume\n");
    for d in 1..=30 {
        csv.push_str(&format!("2021-03-{d:02},11,12,10,11,5000\n"));
    }
    let input = write(dir.path(), "flat.csv", &csv);
    let v = rows(&ok(&[
        "potential", "--input", &input, "--free-float", "60000", "--intraday", "uniform", "--grid-min", "10",
        "--grid-max", "12", "--grid-k", "40",
    ]));
    let max = v.iter().map(|r| r[1]).fold(f64::MIN, f64::max);
    let min = v.iter().map(|r| r[1]).fold(f64::MAX, f64::min);
    assert!(max / min < 1.2, "max {max} min {min}");
}

#[test]
fn auto_grid_pads_one_bin() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "two.csv",
        "date,open,high,low,close,volume\n2021-01-04,10,11,10,10.5,100\n2021-01-05,10.5,12,10.4,11,100\n",
    );
    let v = rows(&ok(&["potential", "--input", &input, "--free-float", "150", "--grid-k", "12"]));
    let h = v[1][0] - v[0][0];
    assert_eq!(v.len(), 12);
    assert!((v[0][0] - (10.0 - h / 2.0)).abs() < 1e-12);
    assert!((v[11][0] - (12.0 + h / 2.0)).abs() < 1e-12);
    assert_eq!(v[0][1], 0.0);
    assert_eq!(v[11][1], 0.0);
}

fn potential_file(dir: &Path, name: &str, values: &[f64]) -> String {
    let mut csv = String::from("price,value\n");
    for (j, v) in values.iter().enumerate() {
        csv.push_str(&format!("{},{v}\n", 0.5 + j as f64));
    }
    write(dir, name, &csv)
}

#[test]
fn flat_well_forecast_peaks_in_the_middle() {
    let dir = TempDir::new().unwrap();
    let flat = potential_file(dir.path(), "flat.csv", &[0.0; 101]);
    let density = rows(&ok(&["forecast", "--potential", &flat]));
    let peak = density.iter().enumerate().max_by(|a, b| a.1[1].total_cmp(&b.1[1])).unwrap().0;
    assert!(peak.abs_diff(50) <= 1);
    let total: f64 = density.iter().map(|r| r[1]).sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn forecast_writes_all_files() {
    let dir = TempDir::new().unwrap();
    let input = bimodal_input(dir.path(), 1);
    let out = dir.path().join("out");
    ok(&[
        "forecast", "--input", &input, "--free-float", "5000000", "--states", "3", "--out", out.to_str().unwrap(),
    ]);
    let names: Vec<PathBuf> = ["density.csv", "energies.csv", "states.csv"].iter().map(|n| out.join(n)).collect();
    assert!(names.iter().all(|n| n.exists()));
    let states = std::fs::read_to_string(&names[2]).unwrap();
    assert!(states.starts_with("price,psi_1,psi_2,psi_3\n"));
    assert_eq!(states.lines().count(), 201);
    let energies = rows(&std::fs::read_to_string(&names[1]).unwrap());
    assert!(energies.windows(2).all(|w| w[1][1] >= w[0][1]));
}

#[test]
fn tunnel_on_rectangular_potential() {
    let dir = TempDir::new().unwrap();
    let mut v = vec![0.0; 60];
    v[20..40].iter_mut().for_each(|x| *x = 1.0);
    let path = potential_file(dir.path(), "rect.csv", &v);
    let sweep = rows(&ok(&[
        "analyze", "tunnel", "--potential", &path, "--e-min", "0.2", "--e-max", "3", "--steps", "15", "--hbar", "10",
    ]));
    assert_eq!(sweep.len(), 15);
    for r in &sweep {
        assert!((r[1] + r[2] - 1.0).abs() < 1e-8, "{r:?}");
    }
    // energies below the barrier tunnel less than those above it
    assert!(sweep[0][1] < sweep[14][1]);
}

#[test]
fn barriers_on_flat_potential_are_empty() {
    let dir = TempDir::new().unwrap();
    let flat = potential_file(dir.path(), "flat.csv", &[0.0; 30]);
    assert_eq!(ok(&["analyze", "barriers", "--potential", &flat]), "price,prominence,bin\n");
    let json: serde_json::Value =
        serde_json::from_str(&ok(&["analyze", "barriers", "--potential", &flat, "--format", "json"])).unwrap();
    assert_eq!(json["levels"].as_array().unwrap().len(), 0);
}

#[test]
fn breakout_needs_a_channel() {
    let dir = TempDir::new().unwrap();
    let flat = potential_file(dir.path(), "flat.csv", &[0.0; 30]);
    let err = error_json(&qmarket(&["analyze", "breakout", "--potential", &flat, "--format", "json"]));
    assert_eq!(err["error_code"], "no_channel");

    let mut v = vec![0.0; 100];
    v[20] = 1.0;
    v[79] = 1.0;
    let channel = potential_file(dir.path(), "channel.csv", &v);
    let report = ok(&["analyze", "breakout", "--potential", &channel, "--potential-scale", "100"]);
    let fields: Vec<f64> = report.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!((fields[0] - fields[1]).abs() < 1e-10, "{report}");
    assert!((fields[0] + fields[1] + fields[2] - 1.0).abs() < 1e-10);
}

#[test]
fn migrate_with_zero_rates_is_constant() {
    let dir = TempDir::new().unwrap();
    let mut v = vec![0.0; 50];
    v[10] = 1.0;
    v[11] = 0.5;
    let path = potential_file(dir.path(), "peak.csv", &v);
    let json: serde_json::Value = serde_json::from_str(&ok(&[
        "analyze", "migrate", "--potential", &path, "--steps", "4", "--build-rate", "0", "--decay-rate", "0",
        "--format", "json",
    ]))
    .unwrap();
    let frames = json["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 5);
    assert_eq!(frames[0], frames[4]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let input = bimodal_input(dir.path(), 2);
    let cfg = write(dir.path(), "run.cfg", &format!("# run settings\ninput = {input}\nfree-float = 5000000\ngrid-k = 50\n"));
    let from_file = rows(&ok(&["potential", "--config", &cfg]));
    assert_eq!(from_file.len(), 50);
    let overridden = rows(&ok(&["potential", "--config", &cfg, "--grid-k", "70"]));
    assert_eq!(overridden.len(), 70);

    let bad = write(dir.path(), "bad.cfg", "grid-k = 50\ncolour = blue\n");
    let err = error_json(&qmarket(&["potential", "--config", &bad, "--format", "json"]));
    assert_eq!(err["error_code"], "invalid_parameter");
}

#[test]
fn synth_is_seeded() {
    let a = ok(&["synth", "--process", "trend", "--days", "50", "--seed", "3"]);
    let b = ok(&["synth", "--process", "trend", "--days", "50", "--seed", "3"]);
    let c = ok(&["synth", "--process", "trend", "--days", "50", "--seed", "4"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.starts_with("date,open,high,low,close,volume\n2020-01-01,10,"));
    assert_eq!(a.lines().count(), 51);
}
