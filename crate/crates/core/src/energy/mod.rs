//! Network energy and greenhouse-gas scenario calculator.
//!
//! A scenario fixes the per-station power draw, the operator's station
//! count and market share, the carbon intensity of the electricity and the
//! national totals used as denominators. [`run_scenario`] scales the
//! operator's network up to the whole country and reports energy, emissions
//! and per-subscriber consumption.

mod comparison;
pub mod constants;
mod report;
mod scenario;
mod user_side;

pub use comparison::{country_comparison, ComparisonRow, Comparators};
pub use report::{display_round, table_rows, write_markdown, write_table_csv};
pub use scenario::{
    blended_intensity, run_scenario, total_stations, EnergyReport, EnergyScenario, HOURS_PER_YEAR,
};
pub use user_side::{user_side_energy, UsageProfile, UserSideEnergy};
