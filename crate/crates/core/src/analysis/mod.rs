//! Observables computed from simulated configurations and event logs.

pub mod clustering;
pub mod collisions;
pub mod density;
pub mod fit;
pub mod matching;
pub mod running_sum;
pub mod survival;

pub use clustering::{clustering_probe, spatial_agreement, ClusteringEstimate};
pub use collisions::{
    collision_indicator_count, collision_indicators, conservation_ledger, mass_transport_audit, LedgerReport,
    TransportAudit,
};
pub use density::{
    binomial_se, coloring_densities, density_estimate, snapshot_densities, Densities, DensityAccumulator, DensityRow,
    DensityTrace, Moments,
};
pub use fit::{default_snapshot_grid, fit_points, fit_power_law, geometric_grid, scan_density_drop, RateFit};
pub use matching::{
    brute_force_max_matching, brute_force_max_matching_bounded, interval_matching, water_fill_matching, Matching,
    DEFAULT_BRUTE_FORCE_BOUND,
};
pub use running_sum::{running_sums, RunningSumProfile};
pub use survival::{cca_survival_criterion, SurvivalTable};
