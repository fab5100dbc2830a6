//! Truncations that flatten large densities and the residuals of the
//! renormalised equations on discrete trajectories.

pub mod projection;
pub mod residual;

pub use projection::{verify_projection_properties, Jet, LevelMeasure, ProjectionTruncation, PropertyReport};
pub use residual::{
    refinement_study, renormalised_residual_interface, renormalised_residual_outer, weak_form_residual_interface,
    weak_form_residual_outer, Battery, BatteryItem, LevelSummary, RefinementReport, RenormTest, ResidualEntry,
    SeriesPoint, SpaceTimeBump, Target, SHAPES_PER_TARGET,
};
