//! Command implementations: scenario resolution, report assembly, and the
//! calibrate pipeline driver.

use std::path::{Path, PathBuf};

use thiserror::Error;

use bss_lca::constants::{parse_anchors, run_calibration, ConstantsFile, ConstantsMeta};
use bss_lca::engine::{
    compare, evaluate, infrastructure_component, operational_component, vehicle_use_component,
    AllocationMode,
};
use bss_lca::inventory::{bundled_dataset, load_system, SystemDefinition};
use bss_lca::modeshift::{
    load_reported_rows, modeshift_table_from_totals, Scenario, BUNDLED_MODESHIFT_ROWS_CSV,
};
use bss_lca::sweeps::{
    breakeven_utilization, breakeven_utilization_target, run_sweep, total_at_utilization, SweepSpec,
};

use crate::report::{
    sha256_hex, BreakevenRow, CompareRow, EvaluateRow, InputRef, ModeshiftRow, Report, ReportRow,
    RunManifest, SweepRow,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    /// 1 for I/O failures, 2 for validation problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Validation(_) => 2,
        }
    }

    fn invalid(message: impl std::fmt::Display) -> Self {
        CliError::Validation(message.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn name(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

pub struct Context {
    pub allocation: AllocationMode,
    pub format: OutputFormat,
    pub constants: Option<PathBuf>,
}

impl Context {
    fn manifest(&self, command: &str, inputs: Vec<InputRef>) -> RunManifest {
        RunManifest::new(
            command,
            &self.allocation.to_string(),
            self.format.name(),
            inputs,
        )
    }

    fn render<R: ReportRow>(&self, report: &Report<R>) -> String {
        match self.format {
            OutputFormat::Csv => report.to_csv(),
            OutputFormat::Json => report.to_json(),
        }
    }
}

/// Resolve a scenario argument: a bundled name, or a path to a scenario file.
fn resolve_scenario(arg: &str) -> Result<(String, String), CliError> {
    if let Some(text) = bundled_dataset(arg) {
        return Ok((format!("bundled:{arg}"), text.to_string()));
    }
    let text = read_file(Path::new(arg))?;
    Ok((arg.to_string(), text))
}

fn load_scenario(arg: &str) -> Result<(SystemDefinition, InputRef), CliError> {
    let (name, text) = resolve_scenario(arg)?;
    let system = load_system(&text).map_err(|e| CliError::invalid(format!("{name}: {e}")))?;
    Ok((
        system,
        InputRef {
            name,
            sha256: sha256_hex(text.as_bytes()),
        },
    ))
}

const DEFAULT_SCENARIOS: [&str; 3] = ["station_based", "dockless", "autonomous"];

pub fn cmd_evaluate(scenarios: &[String], ctx: &Context) -> Result<String, CliError> {
    let args: Vec<String> = if scenarios.is_empty() {
        DEFAULT_SCENARIOS.iter().map(|s| s.to_string()).collect()
    } else {
        scenarios.to_vec()
    };
    let mut rows = Vec::new();
    let mut inputs = Vec::new();
    for arg in &args {
        let (system, input) = load_scenario(arg)?;
        let b = evaluate(&system, ctx.allocation);
        rows.push(EvaluateRow {
            system: system.name.clone(),
            vehicle_manufacturing: b.vehicle_manufacturing,
            vehicle_delivery: b.vehicle_delivery,
            vehicle_use: b.vehicle_use,
            operational_services: b.operational_services,
            infrastructure: b.infrastructure,
            total: b.total,
        });
        inputs.push(input);
    }
    let report = Report {
        manifest: ctx.manifest("evaluate", inputs),
        rows,
    };
    Ok(ctx.render(&report))
}

pub fn cmd_compare(baseline: &str, other: &str, ctx: &Context) -> Result<String, CliError> {
    let (baseline_sys, input_a) = load_scenario(baseline)?;
    let (other_sys, input_b) = load_scenario(other)?;
    let r = compare(&baseline_sys, &other_sys, ctx.allocation).map_err(CliError::invalid)?;
    let report = Report {
        manifest: ctx.manifest("compare", vec![input_a, input_b]),
        rows: vec![CompareRow {
            baseline: r.baseline,
            other: r.other,
            baseline_total_g_per_pkm: r.baseline_total_g_per_pkm,
            other_total_g_per_pkm: r.other_total_g_per_pkm,
            absolute_difference_g_per_pkm: r.absolute_difference_g_per_pkm,
            relative_difference_pct: r.relative_difference * 100.0,
        }],
    };
    Ok(ctx.render(&report))
}

const BUNDLED_FOR_SWEEPS: [&str; 4] = [
    "station_based",
    "dockless",
    "autonomous",
    "autonomous_alt_split",
];

pub fn cmd_sweep(
    spec_path: &Path,
    scenarios: &[String],
    ctx: &Context,
) -> Result<String, CliError> {
    let spec_text = read_file(spec_path)?;
    let spec = SweepSpec::from_toml(&spec_text).map_err(CliError::invalid)?;
    let mut inputs = vec![InputRef {
        name: spec_path.display().to_string(),
        sha256: sha256_hex(spec_text.as_bytes()),
    }];
    // User files first so they can shadow bundled names.
    let mut available = Vec::new();
    for arg in scenarios {
        let (system, input) = load_scenario(arg)?;
        available.push(system);
        inputs.push(input);
    }
    for name in BUNDLED_FOR_SWEEPS {
        let (system, _) = load_scenario(name)?;
        if !available.iter().any(|s| s.name == system.name) {
            available.push(system);
        }
    }
    let result = run_sweep(&spec, &available, ctx.allocation).map_err(CliError::invalid)?;
    let mut rows = Vec::new();
    for point in &result.points {
        for sp in &point.systems {
            let b = &sp.breakdown;
            let d = &sp.deltas;
            let components = [
                (
                    "vehicle_manufacturing",
                    b.vehicle_manufacturing,
                    d.vehicle_manufacturing,
                ),
                ("vehicle_delivery", b.vehicle_delivery, d.vehicle_delivery),
                ("vehicle_use", b.vehicle_use, d.vehicle_use),
                (
                    "operational_services",
                    b.operational_services,
                    d.operational_services,
                ),
                ("infrastructure", b.infrastructure, d.infrastructure),
                ("total", b.total, d.total),
            ];
            for (component, g_per_pkm, delta_pct) in components {
                rows.push(SweepRow {
                    parameter: result.parameter.clone(),
                    value: point.value.to_string(),
                    system: sp.system.clone(),
                    component: component.to_string(),
                    g_per_pkm,
                    delta_pct,
                });
            }
        }
    }
    let report = Report {
        manifest: ctx.manifest("sweep", inputs),
        rows,
    };
    Ok(ctx.render(&report))
}

pub fn cmd_breakeven(
    moving: &str,
    reference: Option<&str>,
    target_total: Option<f64>,
    ctx: &Context,
) -> Result<String, CliError> {
    let (moving_sys, moving_input) = load_scenario(moving)?;
    let floor = vehicle_use_component(&moving_sys, ctx.allocation)
        + operational_component(&moving_sys)
        + infrastructure_component(&moving_sys);
    let mut inputs = vec![moving_input];
    let (reference_name, target, trips) = match (reference, target_total) {
        (Some(reference), None) => {
            let (reference_sys, reference_input) = load_scenario(reference)?;
            inputs.push(reference_input);
            let trips = breakeven_utilization(&moving_sys, &reference_sys, ctx.allocation)
                .map_err(CliError::invalid)?;
            let achieved = total_at_utilization(&moving_sys, trips, ctx.allocation);
            (reference_sys.name.clone(), achieved, trips)
        }
        (None, Some(target)) => {
            let trips = breakeven_utilization_target(&moving_sys, target, ctx.allocation)
                .map_err(CliError::invalid)?;
            ("fixed_target".to_string(), target, trips)
        }
        _ => {
            return Err(CliError::invalid(
                "pass exactly one of --reference or --target-total",
            ))
        }
    };
    let report = Report {
        manifest: ctx.manifest("breakeven", inputs),
        rows: vec![BreakevenRow {
            moving: moving_sys.name.clone(),
            reference: reference_name,
            target_total_g_per_pkm: target,
            floor_g_per_pkm: floor,
            breakeven_trips_per_bike_day: trips,
        }],
    };
    Ok(ctx.render(&report))
}

pub fn cmd_modeshift(
    profiles_path: Option<&Path>,
    scenario_filter: Option<Scenario>,
    ctx: &Context,
) -> Result<String, CliError> {
    let constants_path = ctx
        .constants
        .clone()
        .or_else(|| std::env::var_os("BSS_LCA_CONSTANTS").map(PathBuf::from))
        .ok_or_else(|| {
            CliError::invalid(
                "mode-shift analysis needs calibrated constants: pass --constants PATH (or set \
                 BSS_LCA_CONSTANTS), generating the file first with `bss-lca calibrate`",
            )
        })?;
    let constants_text = read_file(&constants_path)?;
    let constants = ConstantsFile::from_toml(&constants_text)
        .map_err(|e| CliError::invalid(format!("{}: {e}", constants_path.display())))?;
    let mut factor_sets = constants.factor_sets();
    if factor_sets.is_empty() {
        return Err(CliError::invalid(
            "constants file carries no displaced-mode factors; re-run `bss-lca calibrate`",
        ));
    }
    if let Some(filter) = scenario_filter {
        factor_sets.retain(|f| f.scenario == filter);
    }

    let (profiles_name, profiles_text) = match profiles_path {
        Some(path) => (path.display().to_string(), read_file(path)?),
        None => (
            "bundled:modeshift_rows".to_string(),
            BUNDLED_MODESHIFT_ROWS_CSV.to_string(),
        ),
    };
    let reported = load_reported_rows(&profiles_text).map_err(CliError::invalid)?;
    let profiles: Vec<_> = reported.iter().map(|r| r.profile.clone()).collect();

    let mut totals = Vec::new();
    for name in DEFAULT_SCENARIOS {
        let (system, _) = load_scenario(name)?;
        totals.push((system.name.clone(), evaluate(&system, ctx.allocation).total));
    }
    let cells =
        modeshift_table_from_totals(&totals, &profiles, &factor_sets).map_err(CliError::invalid)?;

    let reference = |label: &str, system: &str, scenario: Scenario| -> Option<f64> {
        reported
            .iter()
            .find(|r| r.profile.label == label)?
            .cells
            .iter()
            .find(|c| c.system == system && c.scenario == scenario)
            .map(|c| c.delta_pct)
    };
    let rows: Vec<ModeshiftRow> = cells
        .iter()
        .map(|cell| {
            let reference_delta = reference(&cell.label, &cell.system, cell.scenario);
            ModeshiftRow {
                label: cell.label.clone(),
                system: cell.system.clone(),
                scenario: cell.scenario.to_string(),
                displaced_g_per_pkm: cell.displaced_g_per_pkm,
                delta_pct: cell.delta_pct,
                reference_delta_pct: reference_delta,
                residual_pp: reference_delta.map(|r| cell.delta_pct - r),
            }
        })
        .collect();

    let inputs = vec![
        InputRef {
            name: profiles_name,
            sha256: sha256_hex(profiles_text.as_bytes()),
        },
        InputRef {
            name: constants_path.display().to_string(),
            sha256: sha256_hex(constants_text.as_bytes()),
        },
    ];
    let report = Report {
        manifest: ctx.manifest("modeshift", inputs),
        rows,
    };
    Ok(ctx.render(&report))
}

/// Run the calibration pipeline and write the constants file. Returns a
/// stdout summary, one line per solved constant.
pub fn cmd_calibrate(
    anchors_path: Option<&Path>,
    out_path: &Path,
    force: bool,
) -> Result<String, CliError> {
    let (anchors_name, anchors_text) = match anchors_path {
        Some(path) => (path.display().to_string(), read_file(path)?),
        None => (
            "bundled:anchors".to_string(),
            bss_lca::constants::BUNDLED_ANCHORS_TOML.to_string(),
        ),
    };
    let anchors = parse_anchors(&anchors_text)
        .map_err(|e| CliError::invalid(format!("{anchors_name}: {e}")))?;
    let meta = ConstantsMeta {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        anchors_sha256: sha256_hex(anchors_text.as_bytes()),
    };
    let constants = run_calibration(&anchors, meta);
    let text = constants
        .to_toml()
        .map_err(|e| CliError::invalid(format!("constants serialization: {e}")))?;
    if out_path.exists() && !force {
        return Err(CliError::invalid(format!(
            "{} exists; pass --force to overwrite",
            out_path.display()
        )));
    }
    std::fs::write(out_path, &text).map_err(|source| CliError::Io {
        path: out_path.display().to_string(),
        source,
    })?;

    let mut summary = String::new();
    for diag in &constants.diagnostics {
        match (diag.value, &diag.error) {
            (Some(value), _) => summary.push_str(&format!(
                "{} = {} {}  residual={:.3e} conforming={}\n",
                diag.parameter,
                value,
                diag.units,
                diag.residual.unwrap_or(f64::NAN),
                diag.conforming
            )),
            (None, Some(error)) => {
                summary.push_str(&format!("{}: FAILED: {error}\n", diag.parameter))
            }
            (None, None) => summary.push_str(&format!("{}: no value\n", diag.parameter)),
        }
    }
    summary.push_str(&format!("wrote {}\n", out_path.display()));
    Ok(summary)
}
