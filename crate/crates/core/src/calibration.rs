//! Back-solving of model constants from published aggregates.
//!
//! Several constants the engine needs (per-station impact, the road term,
//! service-van intensity, e-bike energy intensity, delivery impact, and the
//! walking/own-bike displacement factors) are not available directly; each is
//! recovered here from the aggregate results it must reproduce, as an explicit
//! small inverse problem. Every result carries its anchors and a residual, so
//! nothing bundled is invented.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{evaluate, AllocationMode};
use crate::inventory::{lifetime_mileage_km, AutonomySplit, SystemDefinition, SystemKind};
use crate::modeshift::{DisplacedModeFactors, Mode, ModeShiftError, ReportedRow, Scenario};

/// Relative tolerance for exact divisions and small linear solves.
pub const EXACT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("{context}: divisor is zero")]
    ZeroDivisor { context: String },
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("rank deficiency: {0}")]
    RankDeficient(String),
    #[error("{0}")]
    Infeasible(String),
    #[error(transparent)]
    ModeShift(#[from] ModeShiftError),
}

/// A published aggregate that pins a calibrated constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub published: f64,
    pub source: String,
}

impl Anchor {
    pub fn new(published: f64, source: &str) -> Self {
        Anchor {
            published,
            source: source.to_string(),
        }
    }
}

/// One back-solved constant with its reproduction diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub parameter: String,
    pub value: f64,
    pub units: String,
    /// Relative error when the value is substituted back into the anchoring
    /// aggregate (for least squares: the grid median absolute deviation).
    pub residual: f64,
    pub tolerance: f64,
    pub conforming: bool,
    pub anchors: Vec<Anchor>,
}

impl CalibrationResult {
    fn new(
        parameter: &str,
        value: f64,
        units: &str,
        residual: f64,
        tolerance: f64,
        anchors: Vec<Anchor>,
    ) -> Self {
        CalibrationResult {
            parameter: parameter.to_string(),
            value,
            units: units.to_string(),
            residual,
            tolerance,
            conforming: residual <= tolerance,
            anchors,
        }
    }
}

fn relative_residual(reproduced: f64, target: f64) -> f64 {
    if target == 0.0 {
        reproduced.abs()
    } else {
        ((reproduced - target) / target).abs()
    }
}

/// Energy intensity that reproduces the target use-phase emissions on the
/// given grid: target / carbon intensity.
pub fn calibrate_energy_intensity(
    target_use_g_per_pkm: f64,
    grid_gco2_per_kwh: f64,
) -> Result<CalibrationResult, CalibrationError> {
    if grid_gco2_per_kwh == 0.0 {
        return Err(CalibrationError::ZeroDivisor {
            context: "energy intensity from a zero-carbon grid".to_string(),
        });
    }
    let value = target_use_g_per_pkm / grid_gco2_per_kwh;
    let residual = relative_residual(value * grid_gco2_per_kwh, target_use_g_per_pkm);
    Ok(CalibrationResult::new(
        "vehicle.energy_kwh_per_km",
        value,
        "kWh/km",
        residual,
        EXACT_TOLERANCE,
        vec![
            Anchor::new(target_use_g_per_pkm, "nominal use-phase emissions, g/pkm"),
            Anchor::new(grid_gco2_per_kwh, "assumed grid carbon intensity, g/kWh"),
        ],
    ))
}

/// Service-vehicle intensity that reproduces a target operational total at
/// the given service mileage: target / km_per_pkm.
pub fn calibrate_van_intensity(
    kind: SystemKind,
    target_ops_g_per_pkm: f64,
    km_per_pkm: f64,
) -> Result<CalibrationResult, CalibrationError> {
    if km_per_pkm == 0.0 {
        return Err(CalibrationError::ZeroDivisor {
            context: format!("van intensity for {kind} with zero service mileage"),
        });
    }
    let value = target_ops_g_per_pkm / km_per_pkm;
    let residual = relative_residual(value * km_per_pkm, target_ops_g_per_pkm);
    Ok(CalibrationResult::new(
        &format!("services.rebalancing.gco2_per_km ({kind})"),
        value,
        "g/km",
        residual,
        EXACT_TOLERANCE,
        vec![
            Anchor::new(
                target_ops_g_per_pkm,
                &format!("nominal {kind} operational-services total, g/pkm"),
            ),
            Anchor::new(
                km_per_pkm,
                &format!("nominal {kind} service mileage, km/pkm"),
            ),
        ],
    ))
}

/// Delivery impact that reproduces a target per-pkm delivery component over
/// the given lifetime mileage: target x mileage / 1000.
pub fn calibrate_delivery(
    target_g_per_pkm: f64,
    lifetime_mileage_km: f64,
) -> Result<CalibrationResult, CalibrationError> {
    if lifetime_mileage_km <= 0.0 {
        return Err(CalibrationError::ZeroDivisor {
            context: "delivery impact over zero lifetime mileage".to_string(),
        });
    }
    let value = target_g_per_pkm * lifetime_mileage_km / 1000.0;
    let residual = relative_residual(value * 1000.0 / lifetime_mileage_km, target_g_per_pkm);
    Ok(CalibrationResult::new(
        "vehicle.delivery_kgco2",
        value,
        "kgCO2e",
        residual,
        EXACT_TOLERANCE,
        vec![
            Anchor::new(
                target_g_per_pkm,
                "nominal vehicle-delivery component, g/pkm",
            ),
            Anchor::new(lifetime_mileage_km, "lifetime mileage, km"),
        ],
    ))
}

/// One equation of the infrastructure solve:
/// stations_per_pkm x E + road_weight_modulation x r = total_g_per_pkm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfraAnchor {
    pub system: String,
    pub total_g_per_pkm: f64,
    pub stations_per_pkm: f64,
    pub road_weight_modulation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfraSolution {
    pub station_gco2: CalibrationResult,
    pub road_gco2_per_pkm: CalibrationResult,
}

/// Solve the two-unknown infrastructure system for the per-station impact E
/// and the road term r by elimination.
pub fn calibrate_infrastructure_from(
    anchors: &[InfraAnchor],
) -> Result<InfraSolution, CalibrationError> {
    if anchors.len() < 2 {
        return Err(CalibrationError::RankDeficient(format!(
            "infrastructure solve needs two anchor systems, got {}",
            anchors.len()
        )));
    }
    let (a, b) = (&anchors[0], &anchors[1]);
    let det = a.stations_per_pkm * b.road_weight_modulation
        - b.stations_per_pkm * a.road_weight_modulation;
    let scale = (a.stations_per_pkm * b.road_weight_modulation)
        .abs()
        .max((b.stations_per_pkm * a.road_weight_modulation).abs())
        .max(f64::MIN_POSITIVE);
    if det.abs() <= 1e-9 * scale {
        return Err(CalibrationError::SingularSystem(format!(
            "anchor rows '{}' and '{}' are proportional under the weight modulation",
            a.system, b.system
        )));
    }
    let station = (a.total_g_per_pkm * b.road_weight_modulation
        - b.total_g_per_pkm * a.road_weight_modulation)
        / det;
    let road =
        (a.stations_per_pkm * b.total_g_per_pkm - b.stations_per_pkm * a.total_g_per_pkm) / det;

    let mut residual: f64 = 0.0;
    let mut result_anchors = Vec::new();
    for anchor in &anchors[..2] {
        let reproduced = anchor.stations_per_pkm * station + anchor.road_weight_modulation * road;
        residual = residual.max(relative_residual(reproduced, anchor.total_g_per_pkm));
        result_anchors.push(Anchor::new(
            anchor.total_g_per_pkm,
            &format!("nominal {} infrastructure total, g/pkm", anchor.system),
        ));
    }

    Ok(InfraSolution {
        station_gco2: CalibrationResult::new(
            "infrastructure.station_gco2",
            station,
            "g/station",
            residual,
            EXACT_TOLERANCE,
            result_anchors.clone(),
        ),
        road_gco2_per_pkm: CalibrationResult::new(
            "infrastructure.road_gco2_per_pkm",
            road,
            "g/pkm",
            residual,
            EXACT_TOLERANCE,
            result_anchors,
        ),
    })
}

/// Infrastructure solve on the bundled nominal anchors.
pub fn calibrate_infrastructure() -> InfraSolution {
    calibrate_infrastructure_from(&default_infra_anchors())
        .expect("bundled infrastructure anchors are well-posed")
}

pub fn default_infra_anchors() -> Vec<InfraAnchor> {
    vec![
        InfraAnchor {
            system: "station_based".to_string(),
            total_g_per_pkm: 39.77,
            stations_per_pkm: 4.38e-6,
            road_weight_modulation: 1.0,
        },
        InfraAnchor {
            system: "autonomous".to_string(),
            total_g_per_pkm: 23.94,
            stations_per_pkm: 2.5e-6,
            road_weight_modulation: 40.4 / 30.8,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutonomySplitResult {
    pub split: AutonomySplit,
    pub diagnostics: CalibrationResult,
}

/// Split the autonomy-components impact so that shortening the lifetime to
/// `at_lifetime_years` raises the total by exactly `target_rel_delta`.
///
/// The lifetime-scaling per-pkm mass is s = delta x total / (L0/L - 1); the
/// scaling kilograms follow by subtracting the base vehicle and delivery
/// impacts, and whatever remains of the autonomy impact goes into the fixed
/// (per-kilometre amortised) slot.
pub fn calibrate_autonomy_split(
    system: &SystemDefinition,
    target_rel_delta: f64,
    at_lifetime_years: f64,
) -> Result<AutonomySplitResult, CalibrationError> {
    let nominal_years = system.vehicle.lifetime_years;
    let leverage = nominal_years / at_lifetime_years - 1.0;
    if leverage == 0.0 {
        return Err(CalibrationError::ZeroDivisor {
            context: "autonomy split at the nominal lifetime".to_string(),
        });
    }
    let total = evaluate(system, AllocationMode::Paper).total;
    let mileage = lifetime_mileage_km(system);
    let scaling_per_pkm = target_rel_delta * total / leverage;
    let scaling_kg = scaling_per_pkm * mileage / 1000.0
        - system.vehicle.base_manufacturing_kgco2
        - system.vehicle.delivery_kgco2;
    let autonomy_total = system.vehicle.autonomy_kgco2.total();
    if !(0.0..=autonomy_total).contains(&scaling_kg) {
        return Err(CalibrationError::Infeasible(format!(
            "required scaling part {scaling_kg:.3} kg falls outside [0, {autonomy_total}]"
        )));
    }
    let split = AutonomySplit {
        scaling: scaling_kg,
        fixed: autonomy_total - scaling_kg,
    };

    // Plug the split back into the closed form and compare against the target.
    let scaling_back =
        (system.vehicle.base_manufacturing_kgco2 + system.vehicle.delivery_kgco2 + split.scaling)
            * 1000.0
            / mileage;
    let achieved = leverage * scaling_back / total;
    let residual = relative_residual(achieved, target_rel_delta);
    Ok(AutonomySplitResult {
        split,
        diagnostics: CalibrationResult::new(
            "vehicle.autonomy_kgco2.scaling",
            split.scaling,
            "kgCO2e",
            residual,
            EXACT_TOLERANCE,
            vec![Anchor::new(
                target_rel_delta,
                &format!("relative total increase at a {at_lifetime_years}-year lifetime"),
            )],
        ),
    })
}

/// Predicted-vs-reported delta for one grid cell of the mode-shift fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitCellResidual {
    pub label: String,
    pub system: String,
    pub scenario: Scenario,
    pub predicted_delta_pct: f64,
    pub reported_delta_pct: f64,
    pub residual_pp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeShiftFit {
    /// Fitted factor per unknown mode, gCO2e/pkm, in input order.
    pub factors: Vec<(Mode, f64)>,
    pub results: Vec<CalibrationResult>,
    /// The input factor sets with fitted values substituted.
    pub fitted_sets: Vec<DisplacedModeFactors>,
    pub cell_residuals: Vec<FitCellResidual>,
    pub median_absolute_deviation_pp: f64,
    pub objective_start: f64,
    pub objective_end: f64,
}

struct FitCell {
    label: String,
    system: String,
    scenario: Scenario,
    known_part: f64,
    unknown_shares: Vec<f64>,
    system_total: f64,
    reported_delta_pct: f64,
}

impl FitCell {
    fn mix(&self, values: &[f64]) -> f64 {
        self.known_part
            + self
                .unknown_shares
                .iter()
                .zip(values)
                .map(|(s, v)| s * v)
                .sum::<f64>()
    }

    fn residual(&self, values: &[f64]) -> f64 {
        (self.system_total / self.mix(values) - 1.0) * 100.0 - self.reported_delta_pct
    }
}

fn sse(cells: &[FitCell], values: &[f64]) -> f64 {
    cells
        .iter()
        .map(|c| c.residual(values) * c.residual(values))
        .sum()
}

/// Gauss-Newton on the selected unknowns over the selected cells, with the
/// iterate projected onto the nonnegative orthant after every step.
fn gauss_newton(
    cells: &[&FitCell],
    values: &mut [f64],
    active: &[usize],
) -> Result<(), CalibrationError> {
    let n = active.len();
    for _ in 0..200 {
        let mut normal = vec![vec![0.0; n]; n];
        let mut rhs = vec![0.0; n];
        for cell in cells {
            let mix = cell.mix(values);
            if mix <= 0.0 || !mix.is_finite() {
                return Err(CalibrationError::Infeasible(format!(
                    "row '{}' has non-positive displaced intensity during the fit",
                    cell.label
                )));
            }
            let residual = cell.residual(values);
            let gradient_base = -100.0 * cell.system_total / (mix * mix);
            let jac: Vec<f64> = active
                .iter()
                .map(|&k| gradient_base * cell.unknown_shares[k])
                .collect();
            for i in 0..n {
                for j in 0..n {
                    normal[i][j] += jac[i] * jac[j];
                }
                rhs[i] -= jac[i] * residual;
            }
        }
        let step = solve_dense(&mut normal, &mut rhs).ok_or_else(|| {
            CalibrationError::RankDeficient(
                "normal equations of the mode-factor fit are singular".to_string(),
            )
        })?;
        let mut moved = 0.0_f64;
        for (i, &k) in active.iter().enumerate() {
            let next = (values[k] + step[i]).max(0.0);
            moved = moved.max((next - values[k]).abs());
            values[k] = next;
        }
        if moved < 1e-12 {
            break;
        }
    }
    Ok(())
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .expect("finite")
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (value, pivot_value) in lower[0].iter_mut().zip(&upper[col]).skip(col) {
                *value -= factor * pivot_value;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        if a[row][row].abs() < 1e-300 {
            return None;
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Fit emission factors for the unknown modes against reported grid deltas.
///
/// The fit is staged by identifiability: an unknown that appears alone in
/// some rows (every other unknown's share zero there) is fitted first on
/// exactly those rows; the remaining unknowns are then fitted jointly over
/// the rows that contain them, with the identified values held. Each stage
/// is damped-free Gauss-Newton least squares on the percentage-delta
/// residuals, projected to nonnegative factors, starting from zero.
///
/// Pass one factor set for a per-scenario fit, or both sets to share the
/// unknowns across scenarios (modes like walking do not electrify).
pub fn fit_modeshift_factors(
    rows: &[ReportedRow],
    known: &[DisplacedModeFactors],
    unknown_modes: &[Mode],
    system_totals: &[(String, f64)],
) -> Result<ModeShiftFit, CalibrationError> {
    if rows.len() < 2 {
        return Err(CalibrationError::RankDeficient(format!(
            "fit needs at least two rows, got {}",
            rows.len()
        )));
    }
    if unknown_modes.is_empty() {
        return Err(CalibrationError::RankDeficient(
            "no unknown modes requested".to_string(),
        ));
    }
    if unknown_modes.contains(&Mode::NewTrip) {
        return Err(CalibrationError::Infeasible(
            "the induced-trip factor is fixed at zero and cannot be fitted".to_string(),
        ));
    }
    for mode in unknown_modes {
        let appearances = rows
            .iter()
            .filter(|r| r.profile.shares.get(*mode) > 0.0)
            .count();
        if appearances < 2 {
            return Err(CalibrationError::RankDeficient(format!(
                "unknown mode {mode} appears with nonzero share in {appearances} row(s); need at least 2"
            )));
        }
    }

    let totals_for = |name: &str| -> Option<f64> {
        system_totals
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| *t)
    };

    let mut cells = Vec::new();
    for row in rows {
        row.profile.validate()?;
        for cell in &row.cells {
            let Some(factors) = known.iter().find(|f| f.scenario == cell.scenario) else {
                continue;
            };
            let Some(total) = totals_for(&cell.system) else {
                return Err(CalibrationError::Infeasible(format!(
                    "no system total provided for '{}'",
                    cell.system
                )));
            };
            let known_part: f64 = Mode::ALL
                .iter()
                .filter(|m| !unknown_modes.contains(m))
                .map(|m| row.profile.shares.get(*m) * factors.get(*m))
                .sum();
            cells.push(FitCell {
                label: row.profile.label.clone(),
                system: cell.system.clone(),
                scenario: cell.scenario,
                known_part,
                unknown_shares: unknown_modes
                    .iter()
                    .map(|m| row.profile.shares.get(*m))
                    .collect(),
                system_total: total,
                reported_delta_pct: cell.delta_pct,
            });
        }
    }
    if cells.is_empty() {
        return Err(CalibrationError::RankDeficient(
            "no reported cells match the provided factor scenarios".to_string(),
        ));
    }

    let mut values = vec![0.0; unknown_modes.len()];
    let objective_start = sse(&cells, &values);

    // Stage one: unknowns with rows of their own.
    let mut deferred = Vec::new();
    for k in 0..unknown_modes.len() {
        let exclusive: Vec<&FitCell> = cells
            .iter()
            .filter(|c| {
                c.unknown_shares[k] > 0.0
                    && c.unknown_shares
                        .iter()
                        .enumerate()
                        .all(|(j, s)| j == k || *s == 0.0)
            })
            .collect();
        if exclusive.is_empty() {
            deferred.push(k);
        } else {
            gauss_newton(&exclusive, &mut values, &[k])?;
        }
    }
    // Stage two: the rest, jointly, on every cell that involves them.
    if !deferred.is_empty() {
        let involved: Vec<&FitCell> = cells
            .iter()
            .filter(|c| deferred.iter().any(|&k| c.unknown_shares[k] > 0.0))
            .collect();
        gauss_newton(&involved, &mut values, &deferred)?;
    }

    let objective_end = sse(&cells, &values);

    let cell_residuals: Vec<FitCellResidual> = cells
        .iter()
        .map(|c| {
            let predicted = (c.system_total / c.mix(&values) - 1.0) * 100.0;
            FitCellResidual {
                label: c.label.clone(),
                system: c.system.clone(),
                scenario: c.scenario,
                predicted_delta_pct: predicted,
                reported_delta_pct: c.reported_delta_pct,
                residual_pp: predicted - c.reported_delta_pct,
            }
        })
        .collect();
    let mut abs_res: Vec<f64> = cell_residuals.iter().map(|r| r.residual_pp.abs()).collect();
    abs_res.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mid = abs_res.len() / 2;
    let mad = if abs_res.len() % 2 == 1 {
        abs_res[mid]
    } else {
        (abs_res[mid - 1] + abs_res[mid]) / 2.0
    };

    let factors: Vec<(Mode, f64)> = unknown_modes
        .iter()
        .copied()
        .zip(values.iter().copied())
        .collect();
    let results = factors
        .iter()
        .map(|(mode, value)| CalibrationResult {
            parameter: format!("modeshift_factors.{mode}"),
            value: *value,
            units: "g/pkm".to_string(),
            residual: mad,
            tolerance: 5.0,
            conforming: mad <= 5.0,
            anchors: vec![Anchor::new(
                cells.len() as f64,
                "reported net-impact grid cells, count",
            )],
        })
        .collect();
    let fitted_sets = known
        .iter()
        .map(|set| {
            let mut out = *set;
            for (mode, value) in &factors {
                out = out.with_mode(*mode, *value);
            }
            out
        })
        .collect();

    Ok(ModeShiftFit {
        factors,
        results,
        fitted_sets,
        cell_residuals,
        median_absolute_deviation_pp: mad,
        objective_start,
        objective_end,
    })
}
