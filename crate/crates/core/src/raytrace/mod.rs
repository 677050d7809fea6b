//! The beam experiment: a particle ray passing between the two ball sites,
//! deflected by whatever mass distribution the chosen gravity model implies.

mod beam;
mod channel;
mod integrator;
mod source;

pub use beam::{
    run_beam, run_beam_with, BeamScenario, DetectorReport, Execution, ExitRecord, ExitStatus,
    GEDANKEN_G_SCALE,
};
pub use channel::slc_mutual_information;
pub use integrator::{
    integrate_trajectory, Crossing, PhaseState, StepControl, Trajectory, MIN_STEPS_PER_TRANSIT,
};
pub use source::{source_field, FreeSpace, Site, SourceField, SourceRegime, StaticField};
