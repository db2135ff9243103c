//! Independent straight-line evaluation used as the oracle for engine
//! properties. Written against the component definitions directly, without
//! going through the engine's code path.

use bss_lca::engine::AllocationMode;
use bss_lca::inventory::{InfrastructureSpec, SystemDefinition};

pub fn straight_line_total(system: &SystemDefinition, mode: AllocationMode) -> f64 {
    let gross_km = system.usage.daily_mileage_km * 365.0 * system.vehicle.lifetime_years;
    let passenger_fraction = 1.0 - system.usage.overhead_share - system.usage.charging_share;
    let denominator = match mode {
        AllocationMode::Paper => gross_km,
        AllocationMode::Strict => gross_km * passenger_fraction,
    };
    let manufacturing = (system.vehicle.base_manufacturing_kgco2
        + system.vehicle.autonomy_kgco2.scaling
        + system.vehicle.autonomy_kgco2.fixed)
        * 1000.0
        / denominator;
    let delivery = system.vehicle.delivery_kgco2 * 1000.0 / denominator;
    let use_phase = match mode {
        AllocationMode::Paper => system.vehicle.energy_kwh_per_km * system.grid.gco2_per_kwh,
        AllocationMode::Strict => {
            system.vehicle.energy_kwh_per_km * system.grid.gco2_per_kwh / passenger_fraction
        }
    };
    let services: f64 = system
        .services
        .iter()
        .map(|s| s.km_per_pkm * s.gco2_per_km)
        .sum();
    let infrastructure = match &system.infrastructure {
        InfrastructureSpec::Fixed { fixed_gco2_per_pkm } => *fixed_gco2_per_pkm,
        InfrastructureSpec::Itemized {
            stations_per_pkm,
            station_gco2,
            road_gco2_per_pkm,
            road_weight_modulation,
        } => stations_per_pkm * station_gco2 + road_gco2_per_pkm * road_weight_modulation,
    };
    manufacturing + delivery + use_phase + services + infrastructure
}

pub fn assert_rel_close(a: f64, b: f64, rel: f64) {
    let scale = a.abs().max(b.abs()).max(1e-30);
    assert!(
        ((a - b) / scale).abs() <= rel,
        "{a} and {b} differ by more than {rel} relative"
    );
}
