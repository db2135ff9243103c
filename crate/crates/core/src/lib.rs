//! Scenario-driven life-cycle GHG emissions engine for shared bicycle
//! systems: evaluation per passenger-kilometre, parameter-sweep sensitivity
//! analysis, constant calibration from published aggregates, and
//! mode-shift net-impact accounting.

pub mod calibration;
pub mod constants;
pub mod discrepancy;
pub mod engine;
pub mod inventory;
pub mod modeshift;
pub mod sweeps;

pub use engine::AllocationMode;
pub use inventory::{load_system, nominal_datasets, EmissionBreakdown, SystemDefinition};
