//! End-to-end runs of the `mzphase` binary: worked examples, config
//! roundtrips, determinism under reseeding and thread caps, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mzphase"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn run_ok(dir: &Path, args: &[&str]) -> String {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "mzphase {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

/// Data rows of a CSV artifact: everything that is not a `#` comment line.
fn csv_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).collect()
}

/// Strips the run timestamp, the only line allowed to differ between
/// reproductions of the same configuration.
fn drop_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains("generated_at"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Turns an artifact's `# key = value` header back into a config file.
fn meta_to_toml(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            out.push_str(rest);
            out.push('\n');
        }
    }
    out
}

fn field(row: &str, index: usize) -> f64 {
    row.split(',').nth(index).expect("column").parse().expect("numeric field")
}

#[test]
fn qfi_qwp_at_ten_photons_is_one_hundred_ten() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_ok(
        dir.path(),
        &["qfi", "--state", "qwp", "--n-bar", "10", "--loss", "0", "--format", "json"],
    );
    let doc: serde_json::Value = serde_json::from_str(&text).expect("json payload");
    let qfi = doc["rows"][0]["qfi"].as_f64().expect("qfi number");
    assert!((qfi - 110.0).abs() < 1e-6 * 110.0, "qfi = {qfi}");
    assert_eq!(doc["meta"]["state"], "qwp");
}

#[test]
fn qfi_noon_at_ten_photons_is_one_hundred() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_ok(dir.path(), &["qfi", "--state", "noon", "--N", "10"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 2, "header and one row");
    assert_eq!(rows[0], "n_bar,qfi,delta_phi_min,delta_phi_sql");
    assert_eq!(field(rows[1], 1), 100.0);
}

#[test]
fn missing_amplitude_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["qfi", "--state", "qwp"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("amplitude"), "stderr: {stderr}");
}

#[test]
fn multi_scheme_sweep_writes_one_file_per_scheme() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        dir.path(),
        &[
            "sweep", "--state", "ecs", "--n-bar", "4", "--loss", "0.05",
            "--scheme", "homodyne,counting,quantum",
            "--axis", "phi", "--from", "0.1", "--to", "3.0", "--points", "7",
            "-o", "sweep.csv",
        ],
    );
    for scheme in ["homodyne", "counting", "quantum"] {
        let path = dir.path().join(format!("sweep.{scheme}.csv"));
        let text = std::fs::read_to_string(&path)
            .unwrap_or_else(|_| panic!("{} missing", path.display()));
        assert!(text.contains(&format!("# scheme = \"{scheme}\"\n")));
        let rows = csv_rows(&text);
        assert_eq!(rows[0], "phi_or_nbar,cfi,qfi,delta_phi,delta_phi_min,delta_phi_sql");
        assert_eq!(rows.len(), 1 + 7, "{scheme}: seven grid rows");
        // the quantum rows carry the bound in both information columns
        if scheme == "quantum" {
            for row in &rows[1..] {
                assert_eq!(field(row, 1), field(row, 2));
            }
        }
    }
}

#[test]
fn echoed_header_reproduces_the_artifact() {
    let first_dir = tempfile::tempdir().unwrap();
    run_ok(
        first_dir.path(),
        &[
            "sweep", "--state", "ecs", "--n-bar", "4", "--loss", "0.05",
            "--scheme", "homodyne,counting",
            "--axis", "phi", "--from", "0.1", "--to", "3.0", "--points", "7",
            "-o", "sweep.csv",
        ],
    );
    let original =
        std::fs::read_to_string(first_dir.path().join("sweep.homodyne.csv")).unwrap();

    let second_dir = tempfile::tempdir().unwrap();
    std::fs::write(second_dir.path().join("cfg.toml"), meta_to_toml(&original)).unwrap();
    run_ok(second_dir.path(), &["sweep", "--config", "cfg.toml"]);
    let replayed =
        std::fs::read_to_string(second_dir.path().join("sweep.homodyne.csv")).unwrap();

    assert_eq!(drop_timestamp(&original), drop_timestamp(&replayed));
}

#[test]
fn equal_seeds_reproduce_sample_records() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sample", "--scheme", "homodyne", "--state", "ecs", "--alpha", "3",
        "--phi", "0.5", "--loss", "0", "--count", "1000", "--seed", "7",
    ];
    let first = run_ok(dir.path(), &args);
    let second = run_ok(dir.path(), &args);
    assert_eq!(drop_timestamp(&first), drop_timestamp(&second));
    let rows = csv_rows(&first);
    assert_eq!(rows[0], "x_plus,x_minus");
    assert_eq!(rows.len(), 1 + 1000);
}

#[test]
fn campaign_output_does_not_depend_on_the_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "mle-campaign", "--scheme", "counting", "--state", "ecs", "--n-bar", "4",
        "--phi", "0.7", "--loss", "0.05", "--M", "50", "--trials", "100",
        "--seed", "99", "--window-lo", "0.1", "--window-hi", "3.0",
    ];
    let mut one = base.to_vec();
    one.extend(["--threads", "1"]);
    let mut four = base.to_vec();
    four.extend(["--threads", "4"]);
    let serial = run_ok(dir.path(), &one);
    let parallel = run_ok(dir.path(), &four);
    assert_eq!(drop_timestamp(&serial), drop_timestamp(&parallel));
    let rows = csv_rows(&serial);
    assert_eq!(rows[0], "trial,phi_hat");
    assert_eq!(rows.len(), 1 + 100);
}

#[test]
fn flags_override_config_file_values() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.toml"),
        "state = \"qwp\"\nn_bar = 4.0\nloss_p = 0.0\n",
    )
    .unwrap();
    let text = run_ok(dir.path(), &["qfi", "--config", "cfg.toml", "--n-bar", "9"]);
    assert!(text.contains("# n_bar = 9.0000000000000000e0\n"));
    let rows = csv_rows(&text);
    // n_bar^2 + n_bar at nine photons, not four
    assert!((field(rows[1], 1) - 90.0).abs() < 1e-6 * 90.0);
}

#[test]
fn config_mistakes_exit_with_the_usage_code() {
    let dir = tempfile::tempdir().unwrap();

    let quantum_records = run_in(
        dir.path(),
        &[
            "sample", "--scheme", "quantum", "--state", "ecs", "--alpha", "2",
            "--phi", "0.5", "--count", "10", "--seed", "1",
        ],
    );
    assert_eq!(quantum_records.status.code(), Some(2));

    std::fs::write(dir.path().join("bad.toml"), "state = \"ecs\"\nwavelength = 3\n").unwrap();
    let unknown_key = run_in(dir.path(), &["qfi", "--config", "bad.toml", "--alpha", "2"]);
    assert_eq!(unknown_key.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown_key.stderr).contains("wavelength"));

    let unsized_noon = run_in(dir.path(), &["qfi", "--state", "noon"]);
    assert_eq!(unsized_noon.status.code(), Some(2));

    let two_amplitudes = run_in(
        dir.path(),
        &["qfi", "--state", "ecs", "--alpha", "2", "--n-bar", "4"],
    );
    assert_eq!(two_amplitudes.status.code(), Some(2));

    let missing_seed = run_in(
        dir.path(),
        &[
            "sample", "--scheme", "homodyne", "--state", "ecs", "--alpha", "2",
            "--phi", "0.5", "--count", "10",
        ],
    );
    assert_eq!(missing_seed.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing_seed.stderr).contains("seed"));
}

#[test]
fn wigner_grid_covers_the_requested_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_ok(
        dir.path(),
        &["wigner", "--alpha", "1.2", "--phi1", "0.5", "--phi2", "0", "--resolution", "41"],
    );
    assert!(text.contains("# state = \"ecs\"\n"), "defaults to the ECS probe");
    assert!(text.contains("# half_extent = 7.2000000000000002e0\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], "x,p,w");
    assert_eq!(rows.len(), 1 + 41 * 41);
}

#[test]
fn sample_records_can_stream_as_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_ok(
        dir.path(),
        &[
            "sample", "--scheme", "counting", "--state", "qwp", "--alpha", "2",
            "--phi", "0.8", "--loss", "0.1", "--chi", "0.2", "--count", "50",
            "--seed", "11", "--format", "json",
        ],
    );
    let mut lines = text.lines();
    let head: serde_json::Value =
        serde_json::from_str(lines.next().expect("meta line")).expect("meta json");
    assert_eq!(head["meta"]["scheme"], "counting");
    let mut records = 0;
    for line in lines {
        let rec: serde_json::Value = serde_json::from_str(line).expect("record json");
        assert!(rec["m"].as_u64().is_some());
        assert!(rec["qubit_x"].as_i64().map(i64::abs) == Some(1));
        records += 1;
    }
    assert_eq!(records, 50);
}
