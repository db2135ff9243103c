//! End-to-end tests of the binary: exit codes, report round-trips, and the
//! calibrate workflow.

use std::path::Path;
use std::process::{Command, Output};

use bss_lca_cli::report::{EvaluateRow, ModeshiftRow, Report, SweepRow};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bss-lca"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn tmpdir() -> tempfile::TempDir {
    tempfile::tempdir_in(env!("CARGO_TARGET_TMPDIR")).unwrap()
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn evaluate_defaults_to_the_three_bundled_systems() {
    let output = run(&["evaluate"]);
    assert!(output.status.success());
    let report = Report::<EvaluateRow>::from_csv(&stdout(&output)).unwrap();
    assert_eq!(report.rows.len(), 3);
    let totals: Vec<f64> = report.rows.iter().map(|r| r.total).collect();
    assert!((totals[0] - 76.59).abs() < 0.06);
    assert!((totals[1] - 122.07).abs() < 0.06);
    assert!((totals[2] - 51.23).abs() < 0.06);
}

#[test]
fn evaluate_json_carries_five_components_and_total() {
    let output = run(&["evaluate", "station_based", "--format", "json"]);
    assert!(output.status.success());
    let report = Report::<EvaluateRow>::from_json(&stdout(&output)).unwrap();
    assert_eq!(report.rows.len(), 1);
    let row = &report.rows[0];
    let sum = row.vehicle_manufacturing
        + row.vehicle_delivery
        + row.vehicle_use
        + row.operational_services
        + row.infrastructure;
    assert!((row.total - sum).abs() < 1e-9);
    assert_eq!(report.manifest.format, "json");
}

#[test]
fn malformed_scenario_exits_2_and_names_the_key() {
    let dir = tmpdir();
    let path = dir.path().join("bad.toml");
    let doc = bss_lca::inventory::STATION_BASED_NOMINAL_TOML
        .replace("lifetime_years = 3.0", "lifetime_years = -1.0");
    write(&path, &doc);
    let output = run(&["evaluate", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr(&output).contains("vehicle.lifetime_years"),
        "{}",
        stderr(&output)
    );
}

#[test]
fn missing_file_exits_1() {
    let output = run(&["evaluate", "/no/such/scenario.toml"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn strict_allocation_changes_autonomous_only() {
    let paper = Report::<EvaluateRow>::from_csv(&stdout(&run(&["evaluate"]))).unwrap();
    let strict =
        Report::<EvaluateRow>::from_csv(&stdout(&run(&["evaluate", "--allocation", "strict"])))
            .unwrap();
    assert_eq!(paper.rows[0].total, strict.rows[0].total);
    assert_eq!(paper.rows[1].total, strict.rows[1].total);
    assert!(strict.rows[2].total > paper.rows[2].total);
    assert_eq!(strict.manifest.allocation, "strict");
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["evaluate"],
        vec!["evaluate", "--format", "json"],
        vec![
            "compare",
            "--baseline",
            "autonomous",
            "--other",
            "station_based",
        ],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn sweep_long_format_and_empty_grid() {
    let dir = tmpdir();
    let spec = dir.path().join("sweep.toml");
    write(
        &spec,
        "parameter = \"rebalancing\"\nvalues = [0.005, 0.011, 0.028, 0.058, 0.1]\nsystems = [\"station_based\", \"dockless\", \"autonomous\"]\n",
    );
    let output = run(&["sweep", "--spec", spec.to_str().unwrap()]);
    assert!(output.status.success());
    let report = Report::<SweepRow>::from_csv(&stdout(&output)).unwrap();
    // 5 grid points x 3 systems x 6 components.
    assert_eq!(report.rows.len(), 5 * 3 * 6);
    assert!(report.rows.iter().all(|r| r.parameter == "rebalancing"));
    // CSV loader reconstructs the report; re-serialization is byte-identical.
    assert_eq!(report.to_csv(), stdout(&output));

    let empty = dir.path().join("empty.toml");
    write(
        &empty,
        "parameter = \"lifetime\"\nvalues = []\nsystems = [\"station_based\"]\n",
    );
    let output = run(&["sweep", "--spec", empty.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn breakeven_below_floor_is_a_validation_error() {
    let output = run(&[
        "breakeven",
        "--moving",
        "autonomous",
        "--target-total",
        "10.0",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("floor"), "{}", stderr(&output));
}

#[test]
fn calibrate_writes_deterministic_constants_and_respects_force() {
    let dir = tmpdir();
    let first = dir.path().join("constants_a.toml");
    let second = dir.path().join("constants_b.toml");
    assert!(run(&["calibrate", "--out", first.to_str().unwrap()])
        .status
        .success());
    assert!(run(&["calibrate", "--out", second.to_str().unwrap()])
        .status
        .success());
    let a = std::fs::read(&first).unwrap();
    let b = std::fs::read(&second).unwrap();
    assert_eq!(a, b, "calibrate output must be byte-identical across runs");

    // Refuses to overwrite without --force.
    let refused = run(&["calibrate", "--out", first.to_str().unwrap()]);
    assert_eq!(refused.status.code(), Some(2));
    assert!(stderr(&refused).contains("--force"));
    assert!(
        run(&["calibrate", "--out", first.to_str().unwrap(), "--force"])
            .status
            .success()
    );
}

#[test]
fn calibrate_reports_rank_deficiency_but_still_emits_constants() {
    let dir = tmpdir();
    let anchors_path = dir.path().join("anchors.toml");
    // Drop the autonomous infrastructure anchor: the 2-unknown solve loses a row.
    let text = bss_lca::constants::BUNDLED_ANCHORS_TOML.replace(
        "[[infrastructure]]\nsystem = \"autonomous\"\ntotal_g_per_pkm = 23.94\nstations_per_pkm = 2.5e-6\nroad_weight_modulation = 1.3116883116883116\n",
        "",
    );
    assert_ne!(text, bss_lca::constants::BUNDLED_ANCHORS_TOML);
    write(&anchors_path, &text);
    let out = dir.path().join("constants.toml");
    let output = run(&[
        "calibrate",
        "--anchors",
        anchors_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("FAILED"), "{}", stdout(&output));
    let constants =
        bss_lca::constants::ConstantsFile::from_toml(&std::fs::read_to_string(&out).unwrap())
            .unwrap();
    assert!(!constants.all_conforming());
    // Partial output: the unrelated constants still came through.
    assert!(constants
        .patch_value("common", "vehicle.energy_kwh_per_km")
        .is_some());
}

#[test]
fn modeshift_requires_constants_and_mentions_calibrate() {
    let output = bin()
        .arg("modeshift")
        .env_remove("BSS_LCA_CONSTANTS")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("calibrate"));
}

#[test]
fn modeshift_grid_filters_and_env_var_constants() {
    let dir = tmpdir();
    let constants = dir.path().join("constants.toml");
    assert!(run(&["calibrate", "--out", constants.to_str().unwrap()])
        .status
        .success());

    // Constants via flag: full 19 x 3 x 2 grid, with residual columns filled.
    let output = run(&["modeshift", "--constants", constants.to_str().unwrap()]);
    assert!(output.status.success());
    let report = Report::<ModeshiftRow>::from_csv(&stdout(&output)).unwrap();
    assert_eq!(report.rows.len(), 114);
    assert!(report.rows.iter().all(|r| r.residual_pp.is_some()));
    assert_eq!(report.to_csv(), stdout(&output));

    // Scenario filter halves the grid.
    let filtered = run(&[
        "modeshift",
        "--constants",
        constants.to_str().unwrap(),
        "--scenario",
        "s2",
    ]);
    let filtered_report = Report::<ModeshiftRow>::from_csv(&stdout(&filtered)).unwrap();
    assert_eq!(filtered_report.rows.len(), 57);
    assert!(filtered_report.rows.iter().all(|r| r.scenario == "s2"));

    // Constants via the environment variable.
    let env_run = bin()
        .arg("modeshift")
        .env("BSS_LCA_CONSTANTS", constants.to_str().unwrap())
        .output()
        .unwrap();
    assert!(env_run.status.success());
    assert_eq!(env_run.stdout, output.stdout);
}

#[test]
fn modeshift_rejects_unknown_profile_columns() {
    let dir = tmpdir();
    let constants = dir.path().join("constants.toml");
    assert!(run(&["calibrate", "--out", constants.to_str().unwrap()])
        .status
        .success());
    let profiles = dir.path().join("profiles.csv");
    write(
        &profiles,
        "label,car_motorcycle,taxi,public_transit,walking,own_bike,scooter\nX,1,0,0,0,0,0\n",
    );
    let output = run(&[
        "modeshift",
        "--constants",
        constants.to_str().unwrap(),
        "--profiles",
        profiles.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("scooter"));
}

#[test]
fn out_flag_writes_the_report_to_disk() {
    let dir = tmpdir();
    let path = dir.path().join("report.csv");
    assert!(run(&["evaluate", "--out", path.to_str().unwrap()])
        .status
        .success());
    let text = std::fs::read_to_string(&path).unwrap();
    let report = Report::<EvaluateRow>::from_csv(&text).unwrap();
    assert_eq!(report.rows.len(), 3);
}

#[test]
fn alt_split_dataset_is_addressable() {
    let output = run(&["evaluate", "autonomous_alt_split"]);
    assert!(output.status.success());
    let report = Report::<EvaluateRow>::from_csv(&stdout(&output)).unwrap();
    // Same nominal total as the default autonomous dataset.
    assert!((report.rows[0].total - 51.2221).abs() < 1e-3);
}
