//! Net impact of deploying a bicycle-sharing system, given the mix of
//! transport modes its trips displace.
//!
//! A deployment helps the climate only when the displaced mix emits more per
//! passenger-km than the system itself. Displaced-mode shares come from
//! city-level surveys; emission factors per displaced mode come in two
//! electrification scenarios (S1: combustion cars/taxis and bus transit,
//! S2: battery-electric cars/taxis and rail transit). Newly induced trips
//! displace nothing and always carry a zero factor.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{evaluate, AllocationMode};
use crate::inventory::SystemDefinition;

pub const BUNDLED_MODESHIFT_ROWS_CSV: &str = include_str!("../datasets/modeshift_rows.csv");

#[derive(Debug, Error)]
pub enum ModeShiftError {
    #[error("profile '{label}': shares sum to {sum}, expected within [0.95, 1.05]")]
    ShareSum { label: String, sum: f64 },
    #[error("profile '{label}': {message}")]
    InvalidShare { label: String, message: String },
    #[error("empty profile: all displaced-mode shares are zero")]
    EmptyProfile,
    #[error("displaced-mix intensity is 0 g/pkm; the relative delta is undefined")]
    ZeroDisplacedIntensity,
    #[error("no profiles given")]
    NoProfiles,
    #[error("quantile {0} outside [0, 1]")]
    BadQuantile(f64),
    #[error("profile table: {0}")]
    Table(String),
}

/// Transport modes a shared-bike trip can displace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    CarMotorcycle,
    Taxi,
    PublicTransit,
    Walking,
    OwnBike,
    NewTrip,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::CarMotorcycle,
        Mode::Taxi,
        Mode::PublicTransit,
        Mode::Walking,
        Mode::OwnBike,
        Mode::NewTrip,
    ];

    pub fn column_name(&self) -> &'static str {
        match self {
            Mode::CarMotorcycle => "car_motorcycle",
            Mode::Taxi => "taxi",
            Mode::PublicTransit => "public_transit",
            Mode::Walking => "walking",
            Mode::OwnBike => "own_bike",
            Mode::NewTrip => "new_trip",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.column_name())
    }
}

/// Vehicle-electrification scenario tag for a factor set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    S1,
    S2,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::S1, Scenario::S2];
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scenario::S1 => "s1",
            Scenario::S2 => "s2",
        })
    }
}

/// Displaced-mode share vector; fractions of trips, one slot per mode.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeShares {
    pub car_motorcycle: f64,
    pub taxi: f64,
    pub public_transit: f64,
    pub walking: f64,
    pub own_bike: f64,
    pub new_trip: f64,
}

impl ModeShares {
    pub fn get(&self, mode: Mode) -> f64 {
        match mode {
            Mode::CarMotorcycle => self.car_motorcycle,
            Mode::Taxi => self.taxi,
            Mode::PublicTransit => self.public_transit,
            Mode::Walking => self.walking,
            Mode::OwnBike => self.own_bike,
            Mode::NewTrip => self.new_trip,
        }
    }

    pub fn sum(&self) -> f64 {
        Mode::ALL.iter().map(|m| self.get(*m)).sum()
    }
}

/// One city/study row: a label plus its displaced-mode shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeShareProfile {
    pub label: String,
    pub shares: ModeShares,
}

impl ModeShareProfile {
    /// Row sums may carry survey rounding, hence the tolerant bound.
    pub fn validate(&self) -> Result<(), ModeShiftError> {
        for mode in Mode::ALL {
            let v = self.shares.get(mode);
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(ModeShiftError::InvalidShare {
                    label: self.label.clone(),
                    message: format!("{mode} share must be in [0, 1], got {v}"),
                });
            }
        }
        let sum = self.shares.sum();
        if !(0.95..=1.05).contains(&sum) {
            return Err(ModeShiftError::ShareSum {
                label: self.label.clone(),
                sum,
            });
        }
        Ok(())
    }
}

/// Emission factors per displaced mode, gCO2e per pkm. Induced trips are
/// pinned to zero at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacedModeFactors {
    pub scenario: Scenario,
    pub car_motorcycle: f64,
    pub taxi: f64,
    pub public_transit: f64,
    pub walking: f64,
    pub own_bike: f64,
}

impl DisplacedModeFactors {
    pub fn new(
        scenario: Scenario,
        car_motorcycle: f64,
        taxi: f64,
        public_transit: f64,
        walking: f64,
        own_bike: f64,
    ) -> Self {
        DisplacedModeFactors {
            scenario,
            car_motorcycle,
            taxi,
            public_transit,
            walking,
            own_bike,
        }
    }

    pub fn get(&self, mode: Mode) -> f64 {
        match mode {
            Mode::CarMotorcycle => self.car_motorcycle,
            Mode::Taxi => self.taxi,
            Mode::PublicTransit => self.public_transit,
            Mode::Walking => self.walking,
            Mode::OwnBike => self.own_bike,
            Mode::NewTrip => 0.0,
        }
    }

    pub fn with_mode(mut self, mode: Mode, value: f64) -> Self {
        match mode {
            Mode::CarMotorcycle => self.car_motorcycle = value,
            Mode::Taxi => self.taxi = value,
            Mode::PublicTransit => self.public_transit = value,
            Mode::Walking => self.walking = value,
            Mode::OwnBike => self.own_bike = value,
            Mode::NewTrip => {}
        }
        self
    }

    pub fn validate(&self) -> Result<(), ModeShiftError> {
        for mode in Mode::ALL {
            let v = self.get(mode);
            if !v.is_finite() || v < 0.0 {
                return Err(ModeShiftError::Table(format!(
                    "factor for {mode} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Share-weighted displaced-mix intensity, gCO2e per pkm.
///
/// With `normalize` the shares are first divided by their sum; the default is
/// raw shares, surfacing any row-sum deviation instead of hiding it.
pub fn displaced_intensity(
    profile: &ModeShareProfile,
    factors: &DisplacedModeFactors,
    normalize: bool,
) -> Result<f64, ModeShiftError> {
    let sum = profile.shares.sum();
    if sum == 0.0 {
        return Err(ModeShiftError::EmptyProfile);
    }
    let raw: f64 = Mode::ALL
        .iter()
        .map(|m| profile.shares.get(*m) * factors.get(*m))
        .sum();
    Ok(if normalize { raw / sum } else { raw })
}

/// Relative change in emissions from replacing the displaced mix with the
/// system, in percent. Negative means the deployment reduces emissions.
pub fn impact_delta(
    system_total_g_per_pkm: f64,
    displaced_g_per_pkm: f64,
) -> Result<f64, ModeShiftError> {
    if displaced_g_per_pkm <= 0.0 {
        return Err(ModeShiftError::ZeroDisplacedIntensity);
    }
    Ok((system_total_g_per_pkm - displaced_g_per_pkm) / displaced_g_per_pkm * 100.0)
}

/// The system intensity below which the given quantile of profiles sees a
/// net reduction: the empirical quantile of displaced-mix intensities
/// (nearest rank on the sorted values).
pub fn breakeven_bss_intensity(
    profiles: &[ModeShareProfile],
    factors: &DisplacedModeFactors,
    quantile: f64,
) -> Result<f64, ModeShiftError> {
    if profiles.is_empty() {
        return Err(ModeShiftError::NoProfiles);
    }
    if !(0.0..=1.0).contains(&quantile) || !quantile.is_finite() {
        return Err(ModeShiftError::BadQuantile(quantile));
    }
    let mut intensities = profiles
        .iter()
        .map(|p| displaced_intensity(p, factors, false))
        .collect::<Result<Vec<_>, _>>()?;
    intensities.sort_by(|a, b| a.partial_cmp(b).expect("intensities are finite"));
    let idx = (quantile * (intensities.len() - 1) as f64).round() as usize;
    Ok(intensities[idx])
}

/// One cell of the mode-shift grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeShiftCell {
    pub label: String,
    pub system: String,
    pub scenario: Scenario,
    pub displaced_g_per_pkm: f64,
    pub delta_pct: f64,
}

/// Evaluate the full profiles x systems x scenarios grid, ordered by
/// (profile, system, scenario).
pub fn modeshift_table(
    systems: &[SystemDefinition],
    profiles: &[ModeShareProfile],
    factor_sets: &[DisplacedModeFactors],
    mode: AllocationMode,
) -> Result<Vec<ModeShiftCell>, ModeShiftError> {
    let totals: Vec<(String, f64)> = systems
        .iter()
        .map(|s| (s.name.clone(), evaluate(s, mode).total))
        .collect();
    modeshift_table_from_totals(&totals, profiles, factor_sets)
}

/// Same grid, but from already-evaluated system totals.
pub fn modeshift_table_from_totals(
    system_totals: &[(String, f64)],
    profiles: &[ModeShareProfile],
    factor_sets: &[DisplacedModeFactors],
) -> Result<Vec<ModeShiftCell>, ModeShiftError> {
    let mut cells = Vec::with_capacity(profiles.len() * system_totals.len() * factor_sets.len());
    for profile in profiles {
        profile.validate()?;
        for (system, total) in system_totals {
            for factors in factor_sets {
                let displaced = displaced_intensity(profile, factors, false)?;
                cells.push(ModeShiftCell {
                    label: profile.label.clone(),
                    system: system.clone(),
                    scenario: factors.scenario,
                    displaced_g_per_pkm: displaced,
                    delta_pct: impact_delta(*total, displaced)?,
                });
            }
        }
    }
    Ok(cells)
}

/// Reported reference deltas for one profile, keyed by (system, scenario).
#[derive(Debug, Clone, PartialEq)]
pub struct ReportedRow {
    pub profile: ModeShareProfile,
    pub cells: Vec<ReportedCell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportedCell {
    pub system: String,
    pub scenario: Scenario,
    pub delta_pct: f64,
}

const PROFILE_COLUMNS: [&str; 7] = [
    "label",
    "car_motorcycle",
    "taxi",
    "public_transit",
    "walking",
    "own_bike",
    "new_trip",
];

fn parse_share(label: &str, column: &str, raw: &str) -> Result<f64, ModeShiftError> {
    raw.trim()
        .parse::<f64>()
        .map_err(|e| ModeShiftError::Table(format!("row '{label}', column '{column}': {e}")))
}

/// Load displaced-mode profiles from a delimited table.
///
/// The first seven columns must be exactly `label` plus the six mode shares;
/// any further columns must be reference-delta columns named
/// `<system>_<scenario>` and are ignored here.
pub fn load_profiles(csv_text: &str) -> Result<Vec<ModeShareProfile>, ModeShiftError> {
    let rows = load_reported_rows(csv_text)?;
    Ok(rows.into_iter().map(|r| r.profile).collect())
}

/// Load profiles together with any reference-delta columns present.
pub fn load_reported_rows(csv_text: &str) -> Result<Vec<ReportedRow>, ModeShiftError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| ModeShiftError::Table(e.to_string()))?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if headers.len() < PROFILE_COLUMNS.len() {
        return Err(ModeShiftError::Table(format!(
            "expected at least {} columns, found {}",
            PROFILE_COLUMNS.len(),
            headers.len()
        )));
    }
    for (i, expected) in PROFILE_COLUMNS.iter().enumerate() {
        if headers[i] != *expected {
            return Err(ModeShiftError::Table(format!(
                "unknown column '{}' at position {i}; expected '{expected}'",
                headers[i]
            )));
        }
    }
    let mut delta_cols = Vec::new();
    for header in &headers[PROFILE_COLUMNS.len()..] {
        let (system, scenario) = header.rsplit_once('_').ok_or_else(|| {
            ModeShiftError::Table(format!(
                "unknown column '{header}'; expected <system>_<scenario>"
            ))
        })?;
        let scenario = match scenario {
            "s1" => Scenario::S1,
            "s2" => Scenario::S2,
            other => {
                return Err(ModeShiftError::Table(format!(
                    "unknown scenario suffix '{other}' in column '{header}'"
                )))
            }
        };
        delta_cols.push((system.to_string(), scenario));
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ModeShiftError::Table(e.to_string()))?;
        let label = record.get(0).unwrap_or_default().to_string();
        let share_at =
            |i: usize| parse_share(&label, PROFILE_COLUMNS[i], record.get(i).unwrap_or(""));
        let profile = ModeShareProfile {
            label: label.clone(),
            shares: ModeShares {
                car_motorcycle: share_at(1)?,
                taxi: share_at(2)?,
                public_transit: share_at(3)?,
                walking: share_at(4)?,
                own_bike: share_at(5)?,
                new_trip: share_at(6)?,
            },
        };
        profile.validate()?;
        let mut cells = Vec::with_capacity(delta_cols.len());
        for (j, (system, scenario)) in delta_cols.iter().enumerate() {
            let raw = record.get(PROFILE_COLUMNS.len() + j).unwrap_or("");
            cells.push(ReportedCell {
                system: system.clone(),
                scenario: *scenario,
                delta_pct: parse_share(&label, &format!("{system}_{scenario}"), raw)?,
            });
        }
        rows.push(ReportedRow { profile, cells });
    }
    Ok(rows)
}

/// The bundled city profiles with their reference deltas.
pub fn bundled_reported_rows() -> Vec<ReportedRow> {
    load_reported_rows(BUNDLED_MODESHIFT_ROWS_CSV).expect("bundled mode-shift table must be valid")
}

/// The bundled city profiles alone.
pub fn bundled_profiles() -> Vec<ModeShareProfile> {
    load_profiles(BUNDLED_MODESHIFT_ROWS_CSV).expect("bundled mode-shift table must be valid")
}

/// Known factors for both scenarios, before any fitted values are filled in.
/// Walking and own-bike default to zero here; the calibrated constants file
/// carries the fitted values.
pub fn known_factor_base(scenario: Scenario) -> DisplacedModeFactors {
    match scenario {
        Scenario::S1 => DisplacedModeFactors::new(Scenario::S1, 162.0, 358.0, 91.0, 0.0, 0.0),
        Scenario::S2 => DisplacedModeFactors::new(Scenario::S2, 108.0, 206.0, 52.0, 0.0, 0.0),
    }
}
