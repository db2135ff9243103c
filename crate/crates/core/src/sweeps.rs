//! One-at-a-time sensitivity sweeps over the engine, plus break-even
//! utilization root finding.
//!
//! Each sweep substitutes a single parameter into otherwise bit-identical
//! copies of the nominal systems and re-evaluates. Grid points are
//! independent pure evaluations; results are ordered by grid index.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    compare_totals, evaluate, infrastructure_component, operational_component,
    vehicle_use_component, AllocationMode, ComparisonReport,
};
use crate::inventory::{EmissionBreakdown, InfrastructureSpec, SystemDefinition, SystemKind};

/// Reference e-bike weight used to map a vehicle weight onto the road-usage
/// modulation.
pub const REFERENCE_EBIKE_WEIGHT_KG: f64 = 30.8;
/// Weight of the heavier autonomous prototype platform.
pub const PEV_WEIGHT_KG: f64 = 50.0;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("invalid grid value {value} for {parameter}: {message}")]
    InvalidValue {
        parameter: String,
        value: f64,
        message: String,
    },
    #[error("unknown sweep parameter '{0}'")]
    UnknownParameter(String),
    #[error("unknown scenario '{0}' for this sweep parameter")]
    UnknownScenario(String),
    #[error("sweep spec: {0}")]
    Spec(String),
    #[error("system '{0}' not found among the provided scenarios")]
    UnknownSystem(String),
    #[error("autonomy sweep requires an autonomous system")]
    NoAutonomousSystem,
    #[error(
        "target {target} g/pkm is unreachable: the asymptotic floor (use + services + infrastructure) is {floor} g/pkm"
    )]
    NoSolution { target: f64, floor: f64 },
    #[error(
        "totals of '{moving}' and '{reference}' do not cross over the searched utilization range"
    )]
    NoCrossing { moving: String, reference: String },
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
}

/// How infrastructure responds when utilization is rescaled.
///
/// `HoldInfraPerPkm` keeps the per-pkm station density fixed (service demand
/// scales the network with it); `FixedStationCount` pins the absolute station
/// count, so the per-pkm term shrinks as usage grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilizationConvention {
    #[default]
    HoldInfraPerPkm,
    FixedStationCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridVanScenario {
    Nominal,
    ZeroCarbonGrid,
    ZeroCarbonGridBevVans,
}

impl GridVanScenario {
    pub fn name(&self) -> &'static str {
        match self {
            GridVanScenario::Nominal => "nominal",
            GridVanScenario::ZeroCarbonGrid => "zero_carbon_grid",
            GridVanScenario::ZeroCarbonGridBevVans => "zero_carbon_grid_bev_vans",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "nominal" => Some(GridVanScenario::Nominal),
            "zero_carbon_grid" => Some(GridVanScenario::ZeroCarbonGrid),
            "zero_carbon_grid_bev_vans" => Some(GridVanScenario::ZeroCarbonGridBevVans),
            _ => None,
        }
    }
}

/// One-at-a-time variations of the autonomous-system assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutonomyVariation {
    Nominal,
    /// Scale both parts of the autonomy-components impact.
    AutonomyImpactScale(f64),
    /// Scale the per-pkm station term.
    StationTermScale(f64),
    /// Substitute the vehicle weight; the road modulation follows as
    /// weight / reference e-bike weight.
    WeightKg(f64),
    /// Scale the battery capacity. Capacity is documented metadata to the
    /// component formulas, so the total is insensitive to it; the variation
    /// exists to make that explicit in sweep outputs.
    BatteryScale(f64),
}

impl AutonomyVariation {
    /// Named presets: manufacturing and battery at +/-25 %, infrastructure at
    /// half or 1.75x the station term (same per-bicycle station need as the
    /// docked system, or the same absolute station count given the 3.5x
    /// smaller fleet), weight at the light e-bike or the heavy platform.
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "nominal" => Some(AutonomyVariation::Nominal),
            "manuf_low" => Some(AutonomyVariation::AutonomyImpactScale(0.75)),
            "manuf_high" => Some(AutonomyVariation::AutonomyImpactScale(1.25)),
            "infra_low" => Some(AutonomyVariation::StationTermScale(0.5)),
            "infra_high" => Some(AutonomyVariation::StationTermScale(1.75)),
            "weight_low" => Some(AutonomyVariation::WeightKg(REFERENCE_EBIKE_WEIGHT_KG)),
            "weight_high" => Some(AutonomyVariation::WeightKg(PEV_WEIGHT_KG)),
            "battery_low" => Some(AutonomyVariation::BatteryScale(0.75)),
            "battery_high" => Some(AutonomyVariation::BatteryScale(1.25)),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            AutonomyVariation::Nominal => "nominal".to_string(),
            AutonomyVariation::AutonomyImpactScale(s) => format!("autonomy_impact_x{s}"),
            AutonomyVariation::StationTermScale(s) => format!("station_term_x{s}"),
            AutonomyVariation::WeightKg(kg) => format!("weight_{kg}kg"),
            AutonomyVariation::BatteryScale(s) => format!("battery_x{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepParameter {
    Lifetime(Vec<f64>),
    Utilization(Vec<f64>),
    Rebalancing(Vec<f64>),
    GridVan(Vec<GridVanScenario>),
    Autonomy(Vec<AutonomyVariation>),
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Lifetime(_) => "lifetime",
            SweepParameter::Utilization(_) => "utilization",
            SweepParameter::Rebalancing(_) => "rebalancing",
            SweepParameter::GridVan(_) => "grid_van",
            SweepParameter::Autonomy(_) => "autonomy",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepParameter::Lifetime(g)
            | SweepParameter::Utilization(g)
            | SweepParameter::Rebalancing(g) => g.len(),
            SweepParameter::GridVan(g) => g.len(),
            SweepParameter::Autonomy(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Declarative sweep request, as parsed from a sweep spec document.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub systems: Vec<String>,
    pub convention: UtilizationConvention,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpecDoc {
    parameter: String,
    #[serde(default)]
    values: Option<Vec<f64>>,
    #[serde(default)]
    scenarios: Option<Vec<String>>,
    systems: Vec<String>,
    #[serde(default)]
    convention: Option<UtilizationConvention>,
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<SweepSpec, SweepError> {
        let doc: SweepSpecDoc =
            toml::from_str(text).map_err(|e| SweepError::Spec(e.to_string()))?;
        let values = |()| -> Result<Vec<f64>, SweepError> {
            let v = doc.values.clone().ok_or_else(|| {
                SweepError::Spec(format!("parameter '{}' needs `values`", doc.parameter))
            })?;
            Ok(v)
        };
        let parameter = match doc.parameter.as_str() {
            "lifetime" => SweepParameter::Lifetime(values(())?),
            "utilization" => SweepParameter::Utilization(values(())?),
            "rebalancing" => SweepParameter::Rebalancing(values(())?),
            "grid_van" => {
                let names = doc.scenarios.clone().ok_or_else(|| {
                    SweepError::Spec("parameter 'grid_van' needs `scenarios`".to_string())
                })?;
                SweepParameter::GridVan(
                    names
                        .iter()
                        .map(|n| {
                            GridVanScenario::parse(n)
                                .ok_or_else(|| SweepError::UnknownScenario(n.clone()))
                        })
                        .collect::<Result<_, _>>()?,
                )
            }
            "autonomy" => {
                let names = doc.scenarios.clone().ok_or_else(|| {
                    SweepError::Spec("parameter 'autonomy' needs `scenarios`".to_string())
                })?;
                SweepParameter::Autonomy(
                    names
                        .iter()
                        .map(|n| {
                            AutonomyVariation::parse(n)
                                .ok_or_else(|| SweepError::UnknownScenario(n.clone()))
                        })
                        .collect::<Result<_, _>>()?,
                )
            }
            other => return Err(SweepError::UnknownParameter(other.to_string())),
        };
        if parameter.is_empty() {
            return Err(SweepError::EmptyGrid);
        }
        if doc.systems.is_empty() {
            return Err(SweepError::Spec("`systems` must not be empty".to_string()));
        }
        Ok(SweepSpec {
            parameter,
            systems: doc.systems,
            convention: doc.convention.unwrap_or_default(),
        })
    }
}

/// Grid coordinate of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Name(String),
}

impl std::fmt::Display for SweepValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepValue::Number(v) => write!(f, "{v}"),
            SweepValue::Name(s) => f.write_str(s),
        }
    }
}

/// Relative change per component versus nominal, in percent. `None` where the
/// nominal component is zero and the varied one is not.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComponentDeltas {
    pub vehicle_manufacturing: Option<f64>,
    pub vehicle_delivery: Option<f64>,
    pub vehicle_use: Option<f64>,
    pub operational_services: Option<f64>,
    pub infrastructure: Option<f64>,
    pub total: Option<f64>,
}

fn delta_pct(nominal: f64, varied: f64) -> Option<f64> {
    if nominal == 0.0 {
        if varied == 0.0 {
            Some(0.0)
        } else {
            None
        }
    } else {
        Some((varied - nominal) / nominal * 100.0)
    }
}

fn component_deltas(nominal: &EmissionBreakdown, varied: &EmissionBreakdown) -> ComponentDeltas {
    ComponentDeltas {
        vehicle_manufacturing: delta_pct(
            nominal.vehicle_manufacturing,
            varied.vehicle_manufacturing,
        ),
        vehicle_delivery: delta_pct(nominal.vehicle_delivery, varied.vehicle_delivery),
        vehicle_use: delta_pct(nominal.vehicle_use, varied.vehicle_use),
        operational_services: delta_pct(nominal.operational_services, varied.operational_services),
        infrastructure: delta_pct(nominal.infrastructure, varied.infrastructure),
        total: delta_pct(nominal.total, varied.total),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemPoint {
    pub system: String,
    pub breakdown: EmissionBreakdown,
    pub deltas: ComponentDeltas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: SweepValue,
    pub systems: Vec<SystemPoint>,
    /// Every ordered pair of evaluated systems at this grid point.
    pub comparisons: Vec<ComparisonReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: String,
    pub points: Vec<SweepPoint>,
}

fn build_point(
    value: SweepValue,
    varied: Vec<(String, EmissionBreakdown, EmissionBreakdown)>,
) -> Result<SweepPoint, SweepError> {
    let systems: Vec<SystemPoint> = varied
        .iter()
        .map(|(name, nominal, breakdown)| SystemPoint {
            system: name.clone(),
            breakdown: *breakdown,
            deltas: component_deltas(nominal, breakdown),
        })
        .collect();
    let mut comparisons = Vec::new();
    for (i, (name_a, _, bd_a)) in varied.iter().enumerate() {
        for (j, (name_b, _, bd_b)) in varied.iter().enumerate() {
            if i != j {
                comparisons.push(compare_totals(name_a, bd_a.total, name_b, bd_b.total)?);
            }
        }
    }
    Ok(SweepPoint {
        value,
        systems,
        comparisons,
    })
}

fn check_grid(len: usize) -> Result<(), SweepError> {
    if len == 0 {
        Err(SweepError::EmptyGrid)
    } else {
        Ok(())
    }
}

/// Substitute a vehicle lifetime.
///
/// The fixed part of the autonomy impact is amortised per kilometre, so it is
/// re-scaled in proportion to the lifetime to keep its per-pkm contribution
/// invariant; with the default all-scaling split this leaves every non-target
/// field bit-identical.
pub fn with_lifetime(system: &SystemDefinition, years: f64) -> SystemDefinition {
    let mut varied = system.clone();
    varied.vehicle.lifetime_years = years;
    varied.vehicle.autonomy_kgco2.fixed *= years / system.vehicle.lifetime_years;
    varied
}

pub fn sweep_lifetime(
    systems: &[SystemDefinition],
    years: &[f64],
    mode: AllocationMode,
) -> Result<SweepResult, SweepError> {
    check_grid(years.len())?;
    for &y in years {
        if !y.is_finite() || y <= 0.0 {
            return Err(SweepError::InvalidValue {
                parameter: "lifetime".to_string(),
                value: y,
                message: "lifetime must be positive".to_string(),
            });
        }
    }
    let nominals: Vec<EmissionBreakdown> = systems.iter().map(|s| evaluate(s, mode)).collect();
    let mut points = Vec::with_capacity(years.len());
    for &y in years {
        let varied = systems
            .iter()
            .zip(&nominals)
            .map(|(s, nom)| (s.name.clone(), *nom, evaluate(&with_lifetime(s, y), mode)))
            .collect();
        points.push(build_point(SweepValue::Number(y), varied)?);
    }
    Ok(SweepResult {
        parameter: "lifetime".to_string(),
        points,
    })
}

/// Substitute a utilization rate, holding the per-system trip length fixed:
/// daily mileage scales proportionally with trips per bike-day.
pub fn with_utilization(
    system: &SystemDefinition,
    trips_per_bike_day: f64,
    convention: UtilizationConvention,
) -> SystemDefinition {
    let mut varied = system.clone();
    let scale = trips_per_bike_day / system.usage.trips_per_bike_day;
    varied.usage.trips_per_bike_day = trips_per_bike_day;
    varied.usage.daily_mileage_km = system.usage.daily_mileage_km * scale;
    if convention == UtilizationConvention::FixedStationCount && scale != 1.0 {
        varied.infrastructure = match system.infrastructure.clone() {
            InfrastructureSpec::Itemized {
                stations_per_pkm,
                station_gco2,
                road_gco2_per_pkm,
                road_weight_modulation,
            } => InfrastructureSpec::Itemized {
                stations_per_pkm: stations_per_pkm / scale,
                station_gco2,
                road_gco2_per_pkm,
                road_weight_modulation,
            },
            InfrastructureSpec::Fixed { fixed_gco2_per_pkm } => InfrastructureSpec::Fixed {
                fixed_gco2_per_pkm: fixed_gco2_per_pkm / scale,
            },
        };
    }
    varied
}

pub fn sweep_utilization(
    systems: &[SystemDefinition],
    trips_per_bike_day: &[f64],
    convention: UtilizationConvention,
    mode: AllocationMode,
) -> Result<SweepResult, SweepError> {
    check_grid(trips_per_bike_day.len())?;
    for &u in trips_per_bike_day {
        if !u.is_finite() || u <= 0.0 {
            return Err(SweepError::InvalidValue {
                parameter: "utilization".to_string(),
                value: u,
                message: "trips per bike-day must be positive".to_string(),
            });
        }
    }
    let nominals: Vec<EmissionBreakdown> = systems.iter().map(|s| evaluate(s, mode)).collect();
    let mut points = Vec::with_capacity(trips_per_bike_day.len());
    for &u in trips_per_bike_day {
        let varied = systems
            .iter()
            .zip(&nominals)
            .map(|(s, nom)| {
                (
                    s.name.clone(),
                    *nom,
                    evaluate(&with_utilization(s, u, convention), mode),
                )
            })
            .collect();
        points.push(build_point(SweepValue::Number(u), varied)?);
    }
    Ok(SweepResult {
        parameter: "utilization".to_string(),
        points,
    })
}

/// Substitute the rebalancing mileage of non-autonomous systems; autonomous
/// systems have no rebalancing service and pass through unchanged.
pub fn with_rebalancing(system: &SystemDefinition, km_per_pkm: f64) -> SystemDefinition {
    let mut varied = system.clone();
    if system.kind != SystemKind::Autonomous {
        for service in &mut varied.services {
            if service.name == "rebalancing" {
                service.km_per_pkm = km_per_pkm;
            }
        }
    }
    varied
}

pub fn sweep_rebalancing(
    systems: &[SystemDefinition],
    km_per_pkm: &[f64],
    mode: AllocationMode,
) -> Result<SweepResult, SweepError> {
    check_grid(km_per_pkm.len())?;
    for &km in km_per_pkm {
        if !km.is_finite() || km < 0.0 {
            return Err(SweepError::InvalidValue {
                parameter: "rebalancing".to_string(),
                value: km,
                message: "service mileage must be >= 0".to_string(),
            });
        }
    }
    let nominals: Vec<EmissionBreakdown> = systems.iter().map(|s| evaluate(s, mode)).collect();
    let mut points = Vec::with_capacity(km_per_pkm.len());
    for &km in km_per_pkm {
        let varied = systems
            .iter()
            .zip(&nominals)
            .map(|(s, nom)| {
                (
                    s.name.clone(),
                    *nom,
                    evaluate(&with_rebalancing(s, km), mode),
                )
            })
            .collect();
        points.push(build_point(SweepValue::Number(km), varied)?);
    }
    Ok(SweepResult {
        parameter: "rebalancing".to_string(),
        points,
    })
}

/// Apply a grid/van electrification scenario. BEV vans default to a zero
/// well-to-wheel intensity; pass a nonzero value to model them explicitly.
pub fn with_grid_van_scenario(
    system: &SystemDefinition,
    scenario: GridVanScenario,
    bev_van_gco2_per_km: f64,
) -> SystemDefinition {
    let mut varied = system.clone();
    match scenario {
        GridVanScenario::Nominal => {}
        GridVanScenario::ZeroCarbonGrid => {
            varied.grid.gco2_per_kwh = 0.0;
            varied.grid.label = "zero-carbon".to_string();
        }
        GridVanScenario::ZeroCarbonGridBevVans => {
            varied.grid.gco2_per_kwh = 0.0;
            varied.grid.label = "zero-carbon".to_string();
            for service in &mut varied.services {
                service.gco2_per_km = bev_van_gco2_per_km;
            }
        }
    }
    varied
}

pub fn sweep_grid_and_vans(
    systems: &[SystemDefinition],
    scenarios: &[GridVanScenario],
    bev_van_gco2_per_km: f64,
    mode: AllocationMode,
) -> Result<SweepResult, SweepError> {
    check_grid(scenarios.len())?;
    let nominals: Vec<EmissionBreakdown> = systems.iter().map(|s| evaluate(s, mode)).collect();
    let mut points = Vec::with_capacity(scenarios.len());
    for &scenario in scenarios {
        let varied = systems
            .iter()
            .zip(&nominals)
            .map(|(s, nom)| {
                (
                    s.name.clone(),
                    *nom,
                    evaluate(
                        &with_grid_van_scenario(s, scenario, bev_van_gco2_per_km),
                        mode,
                    ),
                )
            })
            .collect();
        points.push(build_point(
            SweepValue::Name(scenario.name().to_string()),
            varied,
        )?);
    }
    Ok(SweepResult {
        parameter: "grid_van".to_string(),
        points,
    })
}

/// Apply one autonomy-assumption variation to the autonomous system.
pub fn with_autonomy_variation(
    system: &SystemDefinition,
    variation: AutonomyVariation,
) -> SystemDefinition {
    let mut varied = system.clone();
    match variation {
        AutonomyVariation::Nominal => {}
        AutonomyVariation::AutonomyImpactScale(s) => {
            varied.vehicle.autonomy_kgco2.scaling *= s;
            varied.vehicle.autonomy_kgco2.fixed *= s;
        }
        AutonomyVariation::StationTermScale(s) => {
            if let InfrastructureSpec::Itemized {
                stations_per_pkm, ..
            } = &mut varied.infrastructure
            {
                *stations_per_pkm *= s;
            }
        }
        AutonomyVariation::WeightKg(kg) => {
            varied.vehicle.weight_kg = kg;
            if let InfrastructureSpec::Itemized {
                road_weight_modulation,
                ..
            } = &mut varied.infrastructure
            {
                *road_weight_modulation = kg / REFERENCE_EBIKE_WEIGHT_KG;
            }
        }
        AutonomyVariation::BatteryScale(s) => {
            varied.vehicle.battery_kwh *= s;
        }
    }
    varied
}

/// One-at-a-time autonomy variations, with comparisons against the unvaried
/// reference systems at every point.
pub fn sweep_autonomy_params(
    base: &SystemDefinition,
    variations: &[AutonomyVariation],
    references: &[SystemDefinition],
    mode: AllocationMode,
) -> Result<SweepResult, SweepError> {
    check_grid(variations.len())?;
    if base.kind != SystemKind::Autonomous {
        return Err(SweepError::NoAutonomousSystem);
    }
    let base_nominal = evaluate(base, mode);
    let reference_breakdowns: Vec<(String, EmissionBreakdown)> = references
        .iter()
        .map(|s| (s.name.clone(), evaluate(s, mode)))
        .collect();
    let mut points = Vec::with_capacity(variations.len());
    for &variation in variations {
        let breakdown = evaluate(&with_autonomy_variation(base, variation), mode);
        let mut varied = vec![(base.name.clone(), base_nominal, breakdown)];
        for (name, reference) in &reference_breakdowns {
            varied.push((name.clone(), *reference, *reference));
        }
        points.push(build_point(SweepValue::Name(variation.name()), varied)?);
    }
    Ok(SweepResult {
        parameter: "autonomy".to_string(),
        points,
    })
}

/// Dispatch a declarative sweep spec against named systems.
pub fn run_sweep(
    spec: &SweepSpec,
    available: &[SystemDefinition],
    mode: AllocationMode,
) -> Result<SweepResult, SweepError> {
    let mut systems = Vec::with_capacity(spec.systems.len());
    for name in &spec.systems {
        let system = available
            .iter()
            .find(|s| &s.name == name)
            .ok_or_else(|| SweepError::UnknownSystem(name.clone()))?;
        systems.push(system.clone());
    }
    match &spec.parameter {
        SweepParameter::Lifetime(grid) => sweep_lifetime(&systems, grid, mode),
        SweepParameter::Utilization(grid) => {
            sweep_utilization(&systems, grid, spec.convention, mode)
        }
        SweepParameter::Rebalancing(grid) => sweep_rebalancing(&systems, grid, mode),
        SweepParameter::GridVan(grid) => sweep_grid_and_vans(&systems, grid, 0.0, mode),
        SweepParameter::Autonomy(grid) => {
            let base = systems
                .iter()
                .find(|s| s.kind == SystemKind::Autonomous)
                .ok_or(SweepError::NoAutonomousSystem)?;
            let references: Vec<SystemDefinition> = systems
                .iter()
                .filter(|s| s.kind != SystemKind::Autonomous)
                .cloned()
                .collect();
            sweep_autonomy_params(base, grid, &references, mode)
        }
    }
}

/// Total at a rescaled utilization under the default convention; the curve
/// the break-even solvers search.
pub fn total_at_utilization(system: &SystemDefinition, trips: f64, mode: AllocationMode) -> f64 {
    evaluate(
        &with_utilization(system, trips, UtilizationConvention::HoldInfraPerPkm),
        mode,
    )
    .total
}

fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol_y: f64) -> f64 {
    // f(lo) > 0 > f(hi); totals are strictly monotone in utilization.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let y = f(mid);
        if y.abs() <= tol_y {
            return mid;
        }
        if y > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Utilization at which the moving system's total falls to a fixed target,
/// found by bisection to 1e-6 g/pkm.
///
/// The total decreases toward an asymptotic floor (use + services +
/// infrastructure) as utilization grows; targets at or below the floor are
/// unreachable and reported as such.
pub fn breakeven_utilization_target(
    moving: &SystemDefinition,
    target_total_g_per_pkm: f64,
    mode: AllocationMode,
) -> Result<f64, SweepError> {
    let floor = vehicle_use_component(moving, mode)
        + operational_component(moving)
        + infrastructure_component(moving);
    if target_total_g_per_pkm <= floor {
        return Err(SweepError::NoSolution {
            target: target_total_g_per_pkm,
            floor,
        });
    }
    let f = |u: f64| total_at_utilization(moving, u, mode) - target_total_g_per_pkm;
    let mut lo = moving.usage.trips_per_bike_day;
    let mut hi = moving.usage.trips_per_bike_day;
    while f(lo) <= 0.0 {
        lo /= 2.0;
    }
    while f(hi) >= 0.0 {
        hi *= 2.0;
    }
    Ok(bisect_decreasing(f, lo, hi, 1e-6))
}

/// Utilization at which the moving system's total crosses the reference
/// system's, with both rescaled to the same trips-per-bike-day.
///
/// This is the break-even of the common-utilization comparison: below the
/// returned rate the moving system emits more per pkm than the reference,
/// above it less.
pub fn breakeven_utilization(
    moving: &SystemDefinition,
    reference: &SystemDefinition,
    mode: AllocationMode,
) -> Result<f64, SweepError> {
    let g =
        |u: f64| total_at_utilization(moving, u, mode) - total_at_utilization(reference, u, mode);
    let (lo, hi) = (1e-3, 1e6);
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(SweepError::NoCrossing {
            moving: moving.name.clone(),
            reference: reference.name.clone(),
        });
    }
    Ok(bisect_decreasing(g, lo, hi, 1e-6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::{autonomous_alt_split, nominal_datasets, serialize_system};

    const P: AllocationMode = AllocationMode::Paper;

    fn systems() -> Vec<SystemDefinition> {
        nominal_datasets()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} not within {tol} of {b}");
    }

    fn total_delta(result: &SweepResult, point: usize, system: &str) -> f64 {
        result.points[point]
            .systems
            .iter()
            .find(|s| s.system == system)
            .unwrap()
            .deltas
            .total
            .unwrap()
    }

    #[test]
    fn lifetime_sweep_reproduces_reference_percentages() {
        let systems = systems();
        let result = sweep_lifetime(&systems, &[1.0, 3.0, 5.0], P).unwrap();
        close(total_delta(&result, 0, "station_based"), 55.67, 0.1);
        close(total_delta(&result, 2, "station_based"), -11.12, 0.1);
        close(total_delta(&result, 0, "dockless"), 79.81, 0.1);
        close(total_delta(&result, 2, "dockless"), -15.96, 0.1);
        // All-scaling split: the documented closed-form values.
        close(total_delta(&result, 0, "autonomous"), 71.8, 0.1);
        close(total_delta(&result, 2, "autonomous"), -14.4, 0.1);
        // Identity at the nominal lifetime.
        for name in ["station_based", "dockless", "autonomous"] {
            assert_eq!(total_delta(&result, 1, name), 0.0);
        }
    }

    #[test]
    fn lifetime_sweep_alt_split_reproduces_flagged_values() {
        let alt = autonomous_alt_split();
        let result = sweep_lifetime(&[alt], &[1.0, 5.0], P).unwrap();
        close(total_delta(&result, 0, "autonomous_alt_split"), 64.45, 0.5);
        close(total_delta(&result, 1, "autonomous_alt_split"), -13.14, 0.5);
    }

    #[test]
    fn lifetime_deltas_match_closed_form() {
        let systems = systems();
        for years in [1.0, 2.0, 4.0, 5.0] {
            let result = sweep_lifetime(&systems, &[years], P).unwrap();
            for system in &systems {
                let nominal = evaluate(system, P);
                let scaling = nominal.vehicle_manufacturing + nominal.vehicle_delivery;
                let expected =
                    (system.vehicle.lifetime_years / years - 1.0) * scaling / nominal.total;
                let actual = total_delta(&result, 0, &system.name) / 100.0;
                close(actual, expected, 1e-9 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn lifetime_sweep_is_one_at_a_time() {
        let systems = systems();
        for system in &systems {
            let varied = with_lifetime(system, 1.0);
            let mut reverted = varied.clone();
            reverted.vehicle.lifetime_years = system.vehicle.lifetime_years;
            reverted.vehicle.autonomy_kgco2.fixed = system.vehicle.autonomy_kgco2.fixed;
            assert_eq!(
                serialize_system(&reverted).unwrap(),
                serialize_system(system).unwrap()
            );
            // Default split has no fixed part, so only the lifetime moved.
            assert_eq!(varied.vehicle.autonomy_kgco2.fixed, 0.0);
        }
    }

    #[test]
    fn utilization_sweep_reproduces_reference_percentages() {
        let systems = systems();
        let result =
            sweep_utilization(&systems, &[8.8], UtilizationConvention::HoldInfraPerPkm, P).unwrap();
        let point = &result.points[0];
        let total = |name: &str| {
            point
                .systems
                .iter()
                .find(|s| s.system == name)
                .unwrap()
                .breakdown
                .total
        };
        close(total("station_based"), 61.3, 0.1);
        let auto_vs_sb = (total("station_based") - total("autonomous")) / total("station_based");
        close(auto_vs_sb * 100.0, 16.4, 1.0);
        let auto_vs_dk = (total("dockless") - total("autonomous")) / total("dockless");
        close(auto_vs_dk * 100.0, 35.4, 1.0);
        // The autonomous system is already at 8.8 trips/bike-day.
        assert_eq!(total_delta(&result, 0, "autonomous"), 0.0);
    }

    #[test]
    fn utilization_rescale_to_own_rate_is_identity() {
        for system in systems() {
            let varied = with_utilization(
                &system,
                system.usage.trips_per_bike_day,
                UtilizationConvention::HoldInfraPerPkm,
            );
            assert_eq!(evaluate(&varied, P), evaluate(&system, P));
        }
    }

    #[test]
    fn fixed_station_count_convention_scales_density() {
        let sb = &systems()[0];
        let varied = with_utilization(sb, 5.0, UtilizationConvention::FixedStationCount);
        match (&sb.infrastructure, &varied.infrastructure) {
            (
                InfrastructureSpec::Itemized {
                    stations_per_pkm: nominal,
                    ..
                },
                InfrastructureSpec::Itemized {
                    stations_per_pkm: scaled,
                    ..
                },
            ) => close(*scaled, nominal * 2.5 / 5.0, 1e-15),
            _ => panic!("expected itemized infrastructure"),
        }
    }

    #[test]
    fn rebalancing_sweep_reproduces_reference_percentages() {
        let systems = systems();
        let result = sweep_rebalancing(&systems, &[0.005], P).unwrap();
        let point = &result.points[0];
        let total = |name: &str| {
            point
                .systems
                .iter()
                .find(|s| s.system == name)
                .unwrap()
                .breakdown
                .total
        };
        close(total("station_based"), 71.07, 0.02);
        let auto_vs_sb = (total("station_based") - total("autonomous")) / total("station_based");
        close(auto_vs_sb * 100.0, 28.1, 0.5);
        let auto_vs_dk = (total("dockless") - total("autonomous")) / total("dockless");
        close(auto_vs_dk * 100.0, 48.0, 0.5);
        // Autonomous systems have no rebalancing service to substitute.
        assert_eq!(total_delta(&result, 0, "autonomous"), 0.0);
    }

    #[test]
    fn rebalancing_zero_clears_the_operational_component() {
        let sb = &systems()[0];
        let varied = with_rebalancing(sb, 0.0);
        assert_eq!(evaluate(&varied, P).operational_services, 0.0);
    }

    #[test]
    fn grid_and_van_sweep_reproduces_reference_percentages() {
        let systems = systems();
        let result = sweep_grid_and_vans(
            &systems,
            &[
                GridVanScenario::Nominal,
                GridVanScenario::ZeroCarbonGrid,
                GridVanScenario::ZeroCarbonGridBevVans,
            ],
            0.0,
            P,
        )
        .unwrap();
        for name in ["station_based", "dockless", "autonomous"] {
            assert_eq!(total_delta(&result, 0, name), 0.0);
        }
        close(total_delta(&result, 1, "station_based"), -11.6, 0.1);
        close(total_delta(&result, 1, "dockless"), -7.3, 0.1);
        close(total_delta(&result, 1, "autonomous"), -17.34, 0.1);

        // Further reductions from electrifying the vans, relative to the
        // zero-carbon-grid totals.
        let total = |point: usize, name: &str| {
            result.points[point]
                .systems
                .iter()
                .find(|s| s.system == name)
                .unwrap()
                .breakdown
                .total
        };
        let further_sb =
            (total(2, "station_based") - total(1, "station_based")) / total(1, "station_based");
        close(further_sb * 100.0, -9.8, 0.1);
        let further_dk = (total(2, "dockless") - total(1, "dockless")) / total(1, "dockless");
        close(further_dk * 100.0, -21.82, 0.1);
    }

    #[test]
    fn autonomy_sweep_reproduces_reference_percentages() {
        let all = systems();
        let references = &all[..2];
        let base = &all[2];
        let result = sweep_autonomy_params(
            base,
            &[
                AutonomyVariation::Nominal,
                AutonomyVariation::AutonomyImpactScale(0.75),
                AutonomyVariation::StationTermScale(0.5),
            ],
            references,
            P,
        )
        .unwrap();
        assert_eq!(total_delta(&result, 0, "autonomous"), 0.0);
        // 25 % less autonomy hardware.
        close(total_delta(&result, 1, "autonomous"), -6.3, 0.1);
        close(total_delta(&result, 1, "autonomous"), -6.8, 1.0);
        // Station need halved: compare against the unvaried docked system.
        let infra_low = &result.points[2];
        let vs_sb = infra_low
            .comparisons
            .iter()
            .find(|c| c.baseline == "autonomous" && c.other == "station_based")
            .unwrap();
        close(vs_sb.relative_difference * 100.0, 46.9, 3.0);
    }

    #[test]
    fn battery_variation_is_documented_metadata() {
        let base = &systems()[2];
        let varied = with_autonomy_variation(base, AutonomyVariation::BatteryScale(1.25));
        assert_eq!(evaluate(&varied, P), evaluate(base, P));
        close(varied.vehicle.battery_kwh, 0.49 * 1.25, 1e-12);
    }

    #[test]
    fn weight_variation_moves_the_road_term_only() {
        let base = &systems()[2];
        let low =
            with_autonomy_variation(base, AutonomyVariation::WeightKg(REFERENCE_EBIKE_WEIGHT_KG));
        let nominal = evaluate(base, P);
        let varied = evaluate(&low, P);
        assert_eq!(nominal.vehicle_manufacturing, varied.vehicle_manufacturing);
        assert!(varied.infrastructure < nominal.infrastructure);
    }

    #[test]
    fn breakeven_crossings_bracket_reference_rates() {
        let all = systems();
        let (sb, dk, au) = (&all[0], &all[1], &all[2]);
        let vs_sb = breakeven_utilization(au, sb, P).unwrap();
        assert!(
            (4.0..=5.3).contains(&vs_sb),
            "crossing vs station-based: {vs_sb}"
        );
        let vs_dk = breakeven_utilization(au, dk, P).unwrap();
        assert!(
            (2.1..=2.7).contains(&vs_dk),
            "crossing vs dockless: {vs_dk}"
        );
        // Frozen crossing roots of the linear totals.
        close(vs_sb, 4.840576486021531, 1e-3);
        close(vs_dk, 2.674570167628732, 1e-3);
    }

    #[test]
    fn breakeven_fixed_target_roots() {
        let all = systems();
        let au = &all[2];
        let sb_total = evaluate(&all[0], P).total;
        let root = breakeven_utilization_target(au, sb_total, P).unwrap();
        close(root, 3.70086044740487, 1e-3);
        let achieved = total_at_utilization(au, root, P);
        assert!((achieved - sb_total).abs() <= 1e-6);

        // Fixed point: the nominal total roots at the nominal utilization.
        let own = breakeven_utilization_target(au, evaluate(au, P).total, P).unwrap();
        close(own, au.usage.trips_per_bike_day, 1e-6);
    }

    #[test]
    fn breakeven_below_floor_reports_the_floor() {
        let all = systems();
        let au = &all[2];
        let err = breakeven_utilization_target(au, 10.0, P).unwrap_err();
        match err {
            SweepError::NoSolution { floor, .. } => close(floor, 32.82, 1e-9),
            other => panic!("expected NoSolution, got {other}"),
        }
    }

    #[test]
    fn breakeven_total_monotone_decreasing() {
        let au = &systems()[2];
        let mut last = f64::INFINITY;
        for u in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            let total = total_at_utilization(au, u, P);
            assert!(total < last);
            last = total;
        }
    }

    #[test]
    fn deltas_invariant_to_uniform_impact_rescaling() {
        let scale = 2.5;
        let scaled: Vec<SystemDefinition> = systems()
            .iter()
            .map(|s| {
                let mut v = s.clone();
                v.vehicle.base_manufacturing_kgco2 *= scale;
                v.vehicle.autonomy_kgco2.scaling *= scale;
                v.vehicle.autonomy_kgco2.fixed *= scale;
                v.vehicle.delivery_kgco2 *= scale;
                v.grid.gco2_per_kwh *= scale;
                for service in &mut v.services {
                    service.gco2_per_km *= scale;
                }
                v.infrastructure = match v.infrastructure.clone() {
                    InfrastructureSpec::Itemized {
                        stations_per_pkm,
                        station_gco2,
                        road_gco2_per_pkm,
                        road_weight_modulation,
                    } => InfrastructureSpec::Itemized {
                        stations_per_pkm,
                        station_gco2: station_gco2 * scale,
                        road_gco2_per_pkm: road_gco2_per_pkm * scale,
                        road_weight_modulation,
                    },
                    InfrastructureSpec::Fixed { fixed_gco2_per_pkm } => InfrastructureSpec::Fixed {
                        fixed_gco2_per_pkm: fixed_gco2_per_pkm * scale,
                    },
                };
                v
            })
            .collect();
        let grid = [1.0, 2.0, 5.0];
        let base = sweep_lifetime(&systems(), &grid, P).unwrap();
        let scaled_result = sweep_lifetime(&scaled, &grid, P).unwrap();
        for (a, b) in base.points.iter().zip(&scaled_result.points) {
            for (sa, sb) in a.systems.iter().zip(&b.systems) {
                let (da, db) = (sa.deltas.total.unwrap(), sb.deltas.total.unwrap());
                close(da, db, 1e-9 * da.abs().max(1.0));
            }
        }
    }

    #[test]
    fn spec_parsing_and_dispatch() {
        let spec = SweepSpec::from_toml(
            "parameter = \"lifetime\"\nvalues = [1.0, 3.0, 5.0]\nsystems = [\"station_based\", \"autonomous\"]\n",
        )
        .unwrap();
        let result = run_sweep(&spec, &systems(), P).unwrap();
        assert_eq!(result.points.len(), 3);
        assert_eq!(result.points[0].systems.len(), 2);
        assert_eq!(result.points[0].comparisons.len(), 2);

        assert!(matches!(
            SweepSpec::from_toml("parameter = \"lifetime\"\nvalues = []\nsystems = [\"x\"]\n"),
            Err(SweepError::EmptyGrid)
        ));
        assert!(matches!(
            SweepSpec::from_toml("parameter = \"voltage\"\nvalues = [1.0]\nsystems = [\"x\"]\n"),
            Err(SweepError::UnknownParameter(_))
        ));
        let spec = SweepSpec::from_toml(
            "parameter = \"grid_van\"\nscenarios = [\"nominal\", \"zero_carbon_grid\"]\nsystems = [\"dockless\"]\n",
        )
        .unwrap();
        assert_eq!(run_sweep(&spec, &systems(), P).unwrap().points.len(), 2);
    }
}
