//! Entropy and dissipation ledgers, truncated relative entropy and the
//! perturbation stability experiment.

mod entropy;
mod relative;
mod stability;
mod truncation;

pub use entropy::{
    dissipation, entropy_inequality_check, entropy_of_constant, interface_dissipation_density,
    reaction_dissipation_density, total_entropy, total_entropy_with, Dissipation, EntropyCheck, EntropyRow,
};
pub use relative::{
    coercivity_check, relative_entropy, CellClass, CoercivityReport, RelativeEntropySetup, RelativeEntropyState,
    DEFAULT_BUMP_RADIUS,
};
pub use stability::{
    fit_growth, stability_experiment, Perturbation, StabilityReport, StabilityRow, StrongSolutionProfile,
    REFERENCE_FLOOR,
};
pub use truncation::{EntropyTruncation, TruncationRegion};
