//! Reduction at a level `μ` of the right momentum map: context, induced
//! connection on `Σ_μ`, and the reduced connection on the orbit.

pub mod context;
pub mod reduced;
pub mod sigma;

pub use context::{build_context, isotropic_correction, ContextOptions, ReductionContext};
pub use reduced::{
    autoparallel_check, horizontal_lift, reduced_covderiv, reduced_form, AutoparallelReport, ReducedConnection,
    SectionFrame,
};
pub use sigma::{autoparallel_defect, sigma_covderiv, totally_geodesic_defect, SigmaConnection, SigmaField};
