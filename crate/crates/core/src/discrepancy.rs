//! Register of reference figures this model does not reproduce, and why.
//!
//! Honest reproduction means saying where the model and the published numbers
//! part ways. Each entry names the reference value, what the model produces
//! instead, and the reading the model follows.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub id: &'static str,
    pub reference_values: &'static str,
    pub model_values: &'static str,
    pub notes: &'static str,
}

pub fn known_discrepancies() -> Vec<Discrepancy> {
    vec![
        Discrepancy {
            id: "utilization-at-dockless-rate",
            reference_values: "autonomous impact 64.7 % / 40.3 % higher at dockless-level utilization",
            model_values: "+73.6 % vs the station-based and +47.5 % vs the dockless totals at 1.1 trips/bike-day",
            notes: "No tested combination of scaling convention and comparison baseline reproduces \
                    the reference pair; excluded from acceptance by design and recorded here.",
        },
        Discrepancy {
            id: "lifetime-sensitivity-autonomous",
            reference_values: "autonomous totals +64.45 % at one year, -13.14 % at five",
            model_values: "+71.85 % / -14.37 % with the all-scaling autonomy split",
            notes: "The reference pair implies only ~16.5 of 18.40 g/pkm scales with lifetime. A \
                    flagged dataset (autonomous_alt_split) moves 87.66 kg of the autonomy impact \
                    into the per-km amortised slot and reproduces +64.45 % / -12.89 %.",
        },
        Discrepancy {
            id: "infrastructure-low-nominal-delta",
            reference_values: "autonomous total 26 % below nominal with the station term halved",
            model_values: "-21.2 % below nominal; cross-system gaps 47.3 % / 66.9 % vs reference 46.9 % / 66.7 %",
            notes: "The cross-system comparisons reproduce closely; the delta against the \
                    autonomous nominal does not.",
        },
        Discrepancy {
            id: "infrastructure-high-nominal-delta",
            reference_values: "autonomous total 23.6 % above nominal with the same absolute station count as the docked fleet",
            model_values: "+31.8 % above nominal; cross-system gaps 11.8 % / 44.7 % vs reference 12.4 % / 45.1 %",
            notes: "Modelled as a 1.75x station term: the per-bicycle station need goes from twice \
                    the docked system's to 3.5x (the docked fleet is 3.5x larger). A literal 3.5x \
                    station term would put the autonomous system above the docked one, which the \
                    reference results rule out.",
        },
        Discrepancy {
            id: "autonomy-impact-asymmetry",
            reference_values: "-6.8 % / +5.9 % total change for -25 % / +25 % autonomy hardware",
            model_values: "-6.33 % / +6.33 %: the component formulas are linear, so the response is symmetric",
            notes: "The reference asymmetry is not reproducible from the published constants.",
        },
        Discrepancy {
            id: "weight-variation-magnitude",
            reference_values: "+/-1.9 % total change across the weight range",
            model_values: "+/-1.02 %: weight enters through the road-usage modulation only",
            notes: "A weight-dependent energy or manufacturing model would contradict the equal \
                    use-phase and fixed manufacturing constants the nominal results pin down.",
        },
        Discrepancy {
            id: "battery-variation",
            reference_values: "+/-0.6 % total change for +/-25 % battery capacity",
            model_values: "0 %: battery capacity is documented metadata to the component formulas",
            notes: "Reproducing the reference response would require a battery-manufacturing \
                    intensity constant (~116 kgCO2e/kWh back-solved) that no published aggregate \
                    pins independently.",
        },
        Discrepancy {
            id: "breakeven-convention",
            reference_values: "break-even utilization 4.65 trips/bike-day against the docked system, 2.44 against the dockless",
            model_values: "same-utilization crossings 4.84 / 2.67; fixed-target roots against the nominal totals 3.70 / 1.82",
            notes: "The reference pair implies mutually inconsistent effective trip lengths \
                    (~3.82 vs ~3.57 km), so no single convention reproduces both exactly. The \
                    crossing of the common-utilization curves brackets both reference values and \
                    is the reading the solver reports.",
        },
        Discrepancy {
            id: "modeshift-irreconcilable-rows",
            reference_values: "several displaced-mode rows (the UK trio in particular) with reported deltas",
            model_values: "residuals up to ~30 pp on those rows; grid median absolute deviation 2.5 pp",
            notes: "Those rows imply negative walking/own-bike factors under any share-weighted \
                    mix, likely from share rounding; the fit constrains factors nonnegative and \
                    reports per-cell residuals instead of absorbing them.",
        },
    ]
}

/// Render the register as a plain-text ledger, one block per entry.
pub fn render_ledger() -> String {
    let mut out = String::from("Unreproduced reference figures\n==============================\n");
    for d in known_discrepancies() {
        out.push_str(&format!(
            "\n[{}]\n  reference: {}\n  model:     {}\n  notes:     {}\n",
            d.id, d.reference_values, d.model_values, d.notes
        ));
    }
    out
}
