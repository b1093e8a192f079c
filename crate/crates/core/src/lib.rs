//! Wake-informed 3D path planning for underwater vehicles.
//!
//! The crate is organized around the pipeline:
//!
//! * [`flowfield`]: voxel grids of fluid speed plus hull occupancy, synthetic
//!   wake generation, field statistics and the `WPF1` binary field format.
//! * [`planner`]: drag-energy A* over the 26-connected grid (current-informed
//!   and wake-informed variants) and a Dijkstra oracle.
//! * [`metrics`]: energy, length, high-velocity and turbulent-cell counts for
//!   any path against any field.
//! * [`dataset`]: scenario sweeps, corpus generation, padding/masking,
//!   z-score normalization and stratified splits.
//! * [`mlp`]: an 8-128-256-390 ReLU regressor trained with Adam on a masked MSE.
//! * [`bench`]: four-way comparison tables bucketed by flow speed.
//! * [`cli`]: the `wakeplan` command line front end.

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod flowfield;
pub mod metrics;
pub mod mlp;
pub mod planner;

pub use error::{Error, Result};
pub use flowfield::{
    field_stats, make_uniform_field, make_wake_field, read_field, strip_wake, write_field,
    FieldStats, FlowField, GridNode, GridSpec, HullModel, ScenarioParams, WakeShapeParams,
};
pub use metrics::{assess, MetricsConfig, PathMetrics};
pub use planner::{
    astar, dijkstra_oracle, HeuristicMode, Path, PlannerConfig, SearchResult, Variant,
};
