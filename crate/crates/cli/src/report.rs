//! Report plumbing: run manifests, deterministic CSV/JSON emission, and the
//! loaders that read a report back.
//!
//! CSV embeds the manifest as leading `#` comment lines and prints numerics
//! at four decimals (round-half-even, via the formatter's correct rounding of
//! the binary value). JSON carries full precision. Neither format contains
//! timestamps, so identical manifests imply byte-identical reports.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRef {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub allocation: String,
    pub format: String,
    pub inputs: Vec<InputRef>,
    pub content_hash: String,
}

pub fn sha256_hex(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    hex::encode(hasher.finalize())
}

impl RunManifest {
    pub fn new(command: &str, allocation: &str, format: &str, inputs: Vec<InputRef>) -> Self {
        let mut combined = String::new();
        for input in &inputs {
            combined.push_str(&input.name);
            combined.push(':');
            combined.push_str(&input.sha256);
            combined.push('\n');
        }
        RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            allocation: allocation.to_string(),
            format: format.to_string(),
            content_hash: sha256_hex(combined.as_bytes()),
            inputs,
        }
    }

    fn comment_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("# command: {}", self.command),
            format!("# tool_version: {}", self.tool_version),
            format!("# allocation: {}", self.allocation),
            format!("# format: {}", self.format),
        ];
        for input in &self.inputs {
            lines.push(format!("# input: {} sha256={}", input.name, input.sha256));
        }
        lines.push(format!("# content_hash: {}", self.content_hash));
        lines
    }

    fn from_comment_lines(lines: &[&str]) -> Result<Self, String> {
        let mut command = None;
        let mut tool_version = None;
        let mut allocation = None;
        let mut format = None;
        let mut content_hash = None;
        let mut inputs = Vec::new();
        for line in lines {
            let body = line.trim_start_matches('#').trim();
            let Some((key, value)) = body.split_once(':') else {
                continue;
            };
            let value = value.trim();
            match key {
                "command" => command = Some(value.to_string()),
                "tool_version" => tool_version = Some(value.to_string()),
                "allocation" => allocation = Some(value.to_string()),
                "format" => format = Some(value.to_string()),
                "content_hash" => content_hash = Some(value.to_string()),
                "input" => {
                    let (name, hash) = value
                        .rsplit_once(" sha256=")
                        .ok_or_else(|| format!("malformed input line: {line}"))?;
                    inputs.push(InputRef {
                        name: name.to_string(),
                        sha256: hash.to_string(),
                    });
                }
                _ => {}
            }
        }
        Ok(RunManifest {
            command: command.ok_or("manifest missing command")?,
            tool_version: tool_version.ok_or("manifest missing tool_version")?,
            allocation: allocation.ok_or("manifest missing allocation")?,
            format: format.ok_or("manifest missing format")?,
            inputs,
            content_hash: content_hash.ok_or("manifest missing content_hash")?,
        })
    }
}

/// Fixed four-decimal rendering for CSV cells. `format!` rounds the exact
/// binary value to nearest with ties to even.
pub fn fmt_fixed(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v }; // normalize -0.0
    format!("{v:.4}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_fixed).unwrap_or_default()
}

fn parse_f64(field: &str, column: &str) -> Result<f64, String> {
    field
        .parse::<f64>()
        .map_err(|e| format!("column '{column}': {e}"))
}

fn parse_opt(field: &str, column: &str) -> Result<Option<f64>, String> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_f64(field, column).map(Some)
    }
}

pub trait ReportRow: Serialize + DeserializeOwned {
    fn header() -> &'static [&'static str];
    fn to_fields(&self) -> Vec<String>;
    fn from_fields(fields: &[&str]) -> Result<Self, String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<R> {
    pub manifest: RunManifest,
    pub rows: Vec<R>,
}

impl<R: ReportRow> Report<R> {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in self.manifest.comment_lines() {
            out.push_str(&line);
            out.push('\n');
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(R::header()).expect("header");
        for row in &self.rows {
            writer.write_record(row.to_fields()).expect("row");
        }
        out.push_str(&String::from_utf8(writer.into_inner().expect("flush")).expect("utf8"));
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let comment_lines: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
        let manifest = RunManifest::from_comment_lines(&comment_lines)?;
        let body: String = text
            .lines()
            .skip(comment_lines.len())
            .collect::<Vec<_>>()
            .join("\n");
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let headers = reader.headers().map_err(|e| e.to_string())?.clone();
        let expected = R::header();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(format!("unexpected header: {headers:?}"));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| e.to_string())?;
            let fields: Vec<&str> = record.iter().collect();
            rows.push(R::from_fields(&fields)?);
        }
        Ok(Report { manifest, rows })
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateRow {
    pub system: String,
    pub vehicle_manufacturing: f64,
    pub vehicle_delivery: f64,
    pub vehicle_use: f64,
    pub operational_services: f64,
    pub infrastructure: f64,
    pub total: f64,
}

impl ReportRow for EvaluateRow {
    fn header() -> &'static [&'static str] {
        &[
            "system",
            "vehicle_manufacturing",
            "vehicle_delivery",
            "vehicle_use",
            "operational_services",
            "infrastructure",
            "total",
        ]
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.system.clone(),
            fmt_fixed(self.vehicle_manufacturing),
            fmt_fixed(self.vehicle_delivery),
            fmt_fixed(self.vehicle_use),
            fmt_fixed(self.operational_services),
            fmt_fixed(self.infrastructure),
            fmt_fixed(self.total),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        if f.len() != 7 {
            return Err(format!("expected 7 fields, got {}", f.len()));
        }
        Ok(EvaluateRow {
            system: f[0].to_string(),
            vehicle_manufacturing: parse_f64(f[1], "vehicle_manufacturing")?,
            vehicle_delivery: parse_f64(f[2], "vehicle_delivery")?,
            vehicle_use: parse_f64(f[3], "vehicle_use")?,
            operational_services: parse_f64(f[4], "operational_services")?,
            infrastructure: parse_f64(f[5], "infrastructure")?,
            total: parse_f64(f[6], "total")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub baseline: String,
    pub other: String,
    pub baseline_total_g_per_pkm: f64,
    pub other_total_g_per_pkm: f64,
    pub absolute_difference_g_per_pkm: f64,
    pub relative_difference_pct: f64,
}

impl ReportRow for CompareRow {
    fn header() -> &'static [&'static str] {
        &[
            "baseline",
            "other",
            "baseline_total_g_per_pkm",
            "other_total_g_per_pkm",
            "absolute_difference_g_per_pkm",
            "relative_difference_pct",
        ]
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.baseline.clone(),
            self.other.clone(),
            fmt_fixed(self.baseline_total_g_per_pkm),
            fmt_fixed(self.other_total_g_per_pkm),
            fmt_fixed(self.absolute_difference_g_per_pkm),
            fmt_fixed(self.relative_difference_pct),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        if f.len() != 6 {
            return Err(format!("expected 6 fields, got {}", f.len()));
        }
        Ok(CompareRow {
            baseline: f[0].to_string(),
            other: f[1].to_string(),
            baseline_total_g_per_pkm: parse_f64(f[2], "baseline_total_g_per_pkm")?,
            other_total_g_per_pkm: parse_f64(f[3], "other_total_g_per_pkm")?,
            absolute_difference_g_per_pkm: parse_f64(f[4], "absolute_difference_g_per_pkm")?,
            relative_difference_pct: parse_f64(f[5], "relative_difference_pct")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: String,
    pub system: String,
    pub component: String,
    pub g_per_pkm: f64,
    pub delta_pct: Option<f64>,
}

impl ReportRow for SweepRow {
    fn header() -> &'static [&'static str] {
        &[
            "parameter",
            "value",
            "system",
            "component",
            "g_per_pkm",
            "delta_pct",
        ]
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.parameter.clone(),
            self.value.clone(),
            self.system.clone(),
            self.component.clone(),
            fmt_fixed(self.g_per_pkm),
            fmt_opt(self.delta_pct),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        if f.len() != 6 {
            return Err(format!("expected 6 fields, got {}", f.len()));
        }
        Ok(SweepRow {
            parameter: f[0].to_string(),
            value: f[1].to_string(),
            system: f[2].to_string(),
            component: f[3].to_string(),
            g_per_pkm: parse_f64(f[4], "g_per_pkm")?,
            delta_pct: parse_opt(f[5], "delta_pct")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakevenRow {
    pub moving: String,
    pub reference: String,
    pub target_total_g_per_pkm: f64,
    pub floor_g_per_pkm: f64,
    pub breakeven_trips_per_bike_day: f64,
}

impl ReportRow for BreakevenRow {
    fn header() -> &'static [&'static str] {
        &[
            "moving",
            "reference",
            "target_total_g_per_pkm",
            "floor_g_per_pkm",
            "breakeven_trips_per_bike_day",
        ]
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.moving.clone(),
            self.reference.clone(),
            fmt_fixed(self.target_total_g_per_pkm),
            fmt_fixed(self.floor_g_per_pkm),
            fmt_fixed(self.breakeven_trips_per_bike_day),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        if f.len() != 5 {
            return Err(format!("expected 5 fields, got {}", f.len()));
        }
        Ok(BreakevenRow {
            moving: f[0].to_string(),
            reference: f[1].to_string(),
            target_total_g_per_pkm: parse_f64(f[2], "target_total_g_per_pkm")?,
            floor_g_per_pkm: parse_f64(f[3], "floor_g_per_pkm")?,
            breakeven_trips_per_bike_day: parse_f64(f[4], "breakeven_trips_per_bike_day")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeshiftRow {
    pub label: String,
    pub system: String,
    pub scenario: String,
    pub displaced_g_per_pkm: f64,
    pub delta_pct: f64,
    pub reference_delta_pct: Option<f64>,
    pub residual_pp: Option<f64>,
}

impl ReportRow for ModeshiftRow {
    fn header() -> &'static [&'static str] {
        &[
            "label",
            "system",
            "scenario",
            "displaced_g_per_pkm",
            "delta_pct",
            "reference_delta_pct",
            "residual_pp",
        ]
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.label.clone(),
            self.system.clone(),
            self.scenario.clone(),
            fmt_fixed(self.displaced_g_per_pkm),
            fmt_fixed(self.delta_pct),
            fmt_opt(self.reference_delta_pct),
            fmt_opt(self.residual_pp),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self, String> {
        if f.len() != 7 {
            return Err(format!("expected 7 fields, got {}", f.len()));
        }
        Ok(ModeshiftRow {
            label: f[0].to_string(),
            system: f[1].to_string(),
            scenario: f[2].to_string(),
            displaced_g_per_pkm: parse_f64(f[3], "displaced_g_per_pkm")?,
            delta_pct: parse_f64(f[4], "delta_pct")?,
            reference_delta_pct: parse_opt(f[5], "reference_delta_pct")?,
            residual_pp: parse_opt(f[6], "residual_pp")?,
        })
    }
}
