//! Typed scenario model for shared-bicycle systems.
//!
//! A [`SystemDefinition`] captures everything the engine needs to evaluate one
//! system: the vehicle, its usage profile, operational services (rebalancing
//! vans and the like), infrastructure, and the electricity grid. Scenarios are
//! stored as TOML documents with units baked into the key names (km, kg, kWh,
//! gCO2e); there is no unit-conversion layer.
//!
//! Three calibrated nominal scenarios ship with the crate and are returned by
//! [`nominal_datasets`]. A fourth, flagged variant of the autonomous system
//! ([`autonomous_alt_split`]) moves part of the autonomy-electronics impact
//! into a per-kilometre amortised slot; see the sweeps module for where that
//! matters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STATION_BASED_NOMINAL_TOML: &str = include_str!("../datasets/station_based_nominal.toml");
pub const DOCKLESS_NOMINAL_TOML: &str = include_str!("../datasets/dockless_nominal.toml");
pub const AUTONOMOUS_NOMINAL_TOML: &str = include_str!("../datasets/autonomous_nominal.toml");
pub const AUTONOMOUS_ALT_SPLIT_TOML: &str = include_str!("../datasets/autonomous_alt_split.toml");

#[derive(Debug, Error)]
pub enum InventoryError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("scenario serialize error: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("{path}: {message}")]
    Invariant { path: String, message: String },
}

impl InventoryError {
    fn invariant(path: &str, message: impl Into<String>) -> Self {
        InventoryError::Invariant {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    StationBased,
    Dockless,
    Autonomous,
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SystemKind::StationBased => "station_based",
            SystemKind::Dockless => "dockless",
            SystemKind::Autonomous => "autonomous",
        };
        f.write_str(s)
    }
}

/// Two-part split of the autonomy-electronics impact, in kgCO2e per vehicle.
///
/// `scaling` is tied to the vehicle (it amortises over whatever lifetime
/// mileage the vehicle achieves); `fixed` accrues per kilometre, so its
/// per-pkm contribution does not move when the lifetime assumption changes.
/// The split only matters to lifetime sensitivity; at the configured lifetime
/// both parts are charged identically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutonomySplit {
    pub scaling: f64,
    pub fixed: f64,
}

impl AutonomySplit {
    pub const ZERO: AutonomySplit = AutonomySplit {
        scaling: 0.0,
        fixed: 0.0,
    };

    /// Total autonomy-components impact, kgCO2e per vehicle.
    pub fn total(&self) -> f64 {
        self.scaling + self.fixed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub weight_kg: f64,
    pub battery_kwh: f64,
    /// Frame and battery manufacture, assembly, maintenance and disposal,
    /// kgCO2e per vehicle.
    pub base_manufacturing_kgco2: f64,
    /// Extra impact of autonomous-driving components; zero for ordinary bikes.
    pub autonomy_kgco2: AutonomySplit,
    /// Delivery at point of purchase, kgCO2e per vehicle.
    pub delivery_kgco2: f64,
    pub lifetime_years: f64,
    /// Well-to-wheel electricity draw, kWh per vehicle-km.
    pub energy_kwh_per_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UsageProfile {
    /// Vehicle-km per day, including empty km for autonomous systems.
    pub daily_mileage_km: f64,
    pub trips_per_bike_day: f64,
    /// Fraction of mileage driven empty to reach the next passenger.
    pub overhead_share: f64,
    /// Fraction of mileage driven empty to reach a charging point.
    pub charging_share: f64,
}

impl UsageProfile {
    /// Fraction of mileage that carries a passenger.
    pub fn passenger_share(&self) -> f64 {
        1.0 - self.overhead_share - self.charging_share
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridProfile {
    /// Life-cycle carbon intensity of electricity, gCO2e per kWh.
    pub gco2_per_kwh: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationalService {
    pub name: String,
    /// Service-vehicle km per passenger-km.
    pub km_per_pkm: f64,
    /// Well-to-wheel intensity of the service vehicle, gCO2e per km.
    pub gco2_per_km: f64,
}

/// Infrastructure is either itemized (stations plus road usage) or a single
/// fixed per-pkm total; exactly one form is active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InfrastructureDoc", into = "InfrastructureDoc")]
pub enum InfrastructureSpec {
    Itemized {
        stations_per_pkm: f64,
        /// Full life-cycle impact of one station, gCO2e.
        station_gco2: f64,
        road_gco2_per_pkm: f64,
        /// Multiplier on the road term; >1 for heavier vehicles.
        road_weight_modulation: f64,
    },
    Fixed {
        fixed_gco2_per_pkm: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InfrastructureDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    stations_per_pkm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    station_gco2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    road_gco2_per_pkm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    road_weight_modulation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_gco2_per_pkm: Option<f64>,
}

impl TryFrom<InfrastructureDoc> for InfrastructureSpec {
    type Error = String;

    fn try_from(doc: InfrastructureDoc) -> Result<Self, String> {
        let itemized_keys = doc.stations_per_pkm.is_some()
            || doc.station_gco2.is_some()
            || doc.road_gco2_per_pkm.is_some()
            || doc.road_weight_modulation.is_some();
        match (doc.fixed_gco2_per_pkm, itemized_keys) {
            (Some(_), true) => Err(
                "infrastructure: fixed_gco2_per_pkm is mutually exclusive with itemized fields"
                    .to_string(),
            ),
            (Some(fixed), false) => Ok(InfrastructureSpec::Fixed {
                fixed_gco2_per_pkm: fixed,
            }),
            (None, _) => {
                let missing = |key: &str| format!("infrastructure.{key}: missing field");
                Ok(InfrastructureSpec::Itemized {
                    stations_per_pkm: doc
                        .stations_per_pkm
                        .ok_or_else(|| missing("stations_per_pkm"))?,
                    station_gco2: doc.station_gco2.ok_or_else(|| missing("station_gco2"))?,
                    road_gco2_per_pkm: doc
                        .road_gco2_per_pkm
                        .ok_or_else(|| missing("road_gco2_per_pkm"))?,
                    road_weight_modulation: doc.road_weight_modulation.unwrap_or(1.0),
                })
            }
        }
    }
}

impl From<InfrastructureSpec> for InfrastructureDoc {
    fn from(spec: InfrastructureSpec) -> Self {
        match spec {
            InfrastructureSpec::Itemized {
                stations_per_pkm,
                station_gco2,
                road_gco2_per_pkm,
                road_weight_modulation,
            } => InfrastructureDoc {
                stations_per_pkm: Some(stations_per_pkm),
                station_gco2: Some(station_gco2),
                road_gco2_per_pkm: Some(road_gco2_per_pkm),
                road_weight_modulation: Some(road_weight_modulation),
                fixed_gco2_per_pkm: None,
            },
            InfrastructureSpec::Fixed { fixed_gco2_per_pkm } => InfrastructureDoc {
                stations_per_pkm: None,
                station_gco2: None,
                road_gco2_per_pkm: None,
                road_weight_modulation: None,
                fixed_gco2_per_pkm: Some(fixed_gco2_per_pkm),
            },
        }
    }
}

/// Full parameterization of one bicycle-sharing system.
///
/// Immutable after load; validation happens once in [`load_system`] or via
/// [`SystemDefinition::validate`] for programmatically built values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDefinition {
    pub name: String,
    pub kind: SystemKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub services: Vec<OperationalService>,
    pub vehicle: VehicleSpec,
    pub usage: UsageProfile,
    pub infrastructure: InfrastructureSpec,
    pub grid: GridProfile,
}

/// The five per-pkm emission components plus their sum, gCO2e per pkm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionBreakdown {
    pub vehicle_manufacturing: f64,
    pub vehicle_delivery: f64,
    pub vehicle_use: f64,
    pub operational_services: f64,
    pub infrastructure: f64,
    pub total: f64,
}

impl EmissionBreakdown {
    /// Build from the five components; the total is their sum by construction.
    pub fn from_components(
        vehicle_manufacturing: f64,
        vehicle_delivery: f64,
        vehicle_use: f64,
        operational_services: f64,
        infrastructure: f64,
    ) -> Self {
        let total = vehicle_manufacturing
            + vehicle_delivery
            + vehicle_use
            + operational_services
            + infrastructure;
        EmissionBreakdown {
            vehicle_manufacturing,
            vehicle_delivery,
            vehicle_use,
            operational_services,
            infrastructure,
            total,
        }
    }

    pub fn components(&self) -> [(&'static str, f64); 5] {
        [
            ("vehicle_manufacturing", self.vehicle_manufacturing),
            ("vehicle_delivery", self.vehicle_delivery),
            ("vehicle_use", self.vehicle_use),
            ("operational_services", self.operational_services),
            ("infrastructure", self.infrastructure),
        ]
    }

    /// Checks nonnegativity and that the stored total matches the component
    /// sum to 1e-9 relative; useful after deserializing a breakdown.
    pub fn validate(&self) -> Result<(), InventoryError> {
        for (name, v) in self.components() {
            if !v.is_finite() || v < 0.0 {
                return Err(InventoryError::invariant(
                    name,
                    format!("component must be finite and >= 0, got {v}"),
                ));
            }
        }
        let sum: f64 = self.components().iter().map(|(_, v)| v).sum();
        let scale = sum.abs().max(1.0);
        if (self.total - sum).abs() > 1e-9 * scale {
            return Err(InventoryError::invariant(
                "total",
                format!("total {} does not match component sum {}", self.total, sum),
            ));
        }
        Ok(())
    }
}

fn check_finite(path: &str, v: f64) -> Result<(), InventoryError> {
    if !v.is_finite() {
        return Err(InventoryError::invariant(
            path,
            format!("must be finite, got {v}"),
        ));
    }
    Ok(())
}

fn check_positive(path: &str, v: f64) -> Result<(), InventoryError> {
    check_finite(path, v)?;
    if v <= 0.0 {
        return Err(InventoryError::invariant(
            path,
            format!("must be > 0, got {v}"),
        ));
    }
    Ok(())
}

fn check_nonneg(path: &str, v: f64) -> Result<(), InventoryError> {
    check_finite(path, v)?;
    if v < 0.0 {
        return Err(InventoryError::invariant(
            path,
            format!("must be >= 0, got {v}"),
        ));
    }
    Ok(())
}

impl SystemDefinition {
    pub fn validate(&self) -> Result<(), InventoryError> {
        if self.name.is_empty() {
            return Err(InventoryError::invariant("name", "must not be empty"));
        }
        let v = &self.vehicle;
        check_positive("vehicle.weight_kg", v.weight_kg)?;
        check_positive("vehicle.battery_kwh", v.battery_kwh)?;
        check_positive(
            "vehicle.base_manufacturing_kgco2",
            v.base_manufacturing_kgco2,
        )?;
        check_nonneg("vehicle.autonomy_kgco2.scaling", v.autonomy_kgco2.scaling)?;
        check_nonneg("vehicle.autonomy_kgco2.fixed", v.autonomy_kgco2.fixed)?;
        // Deliveries can genuinely be free (local assembly), so zero is allowed.
        check_nonneg("vehicle.delivery_kgco2", v.delivery_kgco2)?;
        check_positive("vehicle.lifetime_years", v.lifetime_years)?;
        check_positive("vehicle.energy_kwh_per_km", v.energy_kwh_per_km)?;

        let u = &self.usage;
        check_positive("usage.daily_mileage_km", u.daily_mileage_km)?;
        check_positive("usage.trips_per_bike_day", u.trips_per_bike_day)?;
        check_nonneg("usage.overhead_share", u.overhead_share)?;
        check_nonneg("usage.charging_share", u.charging_share)?;
        if u.overhead_share + u.charging_share >= 1.0 {
            return Err(InventoryError::invariant(
                "usage.overhead_share",
                format!(
                    "overhead_share + charging_share must be < 1, got {}",
                    u.overhead_share + u.charging_share
                ),
            ));
        }

        check_nonneg("grid.gco2_per_kwh", self.grid.gco2_per_kwh)?;

        for (i, s) in self.services.iter().enumerate() {
            check_nonneg(&format!("services[{i}].km_per_pkm"), s.km_per_pkm)?;
            check_nonneg(&format!("services[{i}].gco2_per_km"), s.gco2_per_km)?;
        }

        match &self.infrastructure {
            InfrastructureSpec::Itemized {
                stations_per_pkm,
                station_gco2,
                road_gco2_per_pkm,
                road_weight_modulation,
            } => {
                check_nonneg("infrastructure.stations_per_pkm", *stations_per_pkm)?;
                check_nonneg("infrastructure.station_gco2", *station_gco2)?;
                check_nonneg("infrastructure.road_gco2_per_pkm", *road_gco2_per_pkm)?;
                check_nonneg(
                    "infrastructure.road_weight_modulation",
                    *road_weight_modulation,
                )?;
            }
            InfrastructureSpec::Fixed { fixed_gco2_per_pkm } => {
                check_nonneg("infrastructure.fixed_gco2_per_pkm", *fixed_gco2_per_pkm)?;
            }
        }

        // Autonomy coherence: the kind, the extra component impact, and the
        // empty-mileage shares must agree.
        let autonomy_total = v.autonomy_kgco2.total();
        let empty_share = u.overhead_share + u.charging_share;
        if self.kind == SystemKind::Autonomous {
            if autonomy_total <= 0.0 {
                return Err(InventoryError::invariant(
                    "vehicle.autonomy_kgco2",
                    "autonomous systems must carry a positive autonomy-components impact",
                ));
            }
            if empty_share <= 0.0 {
                return Err(InventoryError::invariant(
                    "usage.overhead_share",
                    "autonomous systems must have a positive overhead or charging share",
                ));
            }
        } else {
            if autonomy_total > 0.0 {
                return Err(InventoryError::invariant(
                    "vehicle.autonomy_kgco2",
                    "non-autonomous systems must have zero autonomy-components impact",
                ));
            }
            if empty_share > 0.0 {
                return Err(InventoryError::invariant(
                    "usage.overhead_share",
                    "non-autonomous systems must have zero overhead and charging shares",
                ));
            }
            if self.services.is_empty() {
                return Err(InventoryError::invariant(
                    "services",
                    "non-autonomous systems require at least one operational service",
                ));
            }
        }
        Ok(())
    }
}

/// Parse a scenario document and check every invariant.
///
/// Unknown keys are rejected; invariant violations name the offending field.
pub fn load_system(document: &str) -> Result<SystemDefinition, InventoryError> {
    let system: SystemDefinition = toml::from_str(document)?;
    system.validate()?;
    Ok(system)
}

/// Serialize a system back to the scenario schema. Round-trips through
/// [`load_system`] up to key ordering.
pub fn serialize_system(system: &SystemDefinition) -> Result<String, InventoryError> {
    Ok(toml::to_string_pretty(system)?)
}

/// Vehicle-km driven over the whole vehicle life: daily mileage x 365 x years.
pub fn lifetime_mileage_km(system: &SystemDefinition) -> f64 {
    system.usage.daily_mileage_km * 365.0 * system.vehicle.lifetime_years
}

/// The three bundled nominal systems, with calibrated constants substituted.
pub fn nominal_datasets() -> Vec<SystemDefinition> {
    [
        STATION_BASED_NOMINAL_TOML,
        DOCKLESS_NOMINAL_TOML,
        AUTONOMOUS_NOMINAL_TOML,
    ]
    .iter()
    .map(|text| load_system(text).expect("bundled dataset must be valid"))
    .collect()
}

/// Flagged alternate amortisation split for the autonomous system; identical
/// to the nominal autonomous scenario except for the autonomy split.
pub fn autonomous_alt_split() -> SystemDefinition {
    load_system(AUTONOMOUS_ALT_SPLIT_TOML).expect("bundled dataset must be valid")
}

/// Raw text of a bundled dataset, addressable by scenario name.
pub fn bundled_dataset(name: &str) -> Option<&'static str> {
    match name {
        "station_based" => Some(STATION_BASED_NOMINAL_TOML),
        "dockless" => Some(DOCKLESS_NOMINAL_TOML),
        "autonomous" => Some(AUTONOMOUS_NOMINAL_TOML),
        "autonomous_alt_split" => Some(AUTONOMOUS_ALT_SPLIT_TOML),
        _ => None,
    }
}
