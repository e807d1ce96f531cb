//! Two-photon Doppler cooling of an atomic ensemble with photoionization
//! loss: Monte Carlo trajectories, a deterministic master-equation oracle for
//! one-dimensional scenarios, and an intensity optimizer.

mod mc;
mod oracle;
mod optimize;
mod report;
mod rng;
mod scenario;

use thiserror::Error;

use crate::species::SpeciesError;

pub use mc::{
    initial_velocity, run_mc, sample_initial_ensemble, sample_maxwell_boltzmann, step_atom,
    AtomEnsemble, AtomState, AtomStatus,
};
pub use optimize::{
    optimize_intensity, optimize_with, Boundary, ImpulseBudget, IntensityEvaluator,
    IntensityOutcome, MonteCarloEvaluator, Objective, OptimizeResult, SearchBounds,
};
pub use oracle::{rate_equation_oracle, rate_equation_oracle_with, OracleGrid};
pub use report::{
    summary_json, write_series_csv, EnsembleReport, RunHeader, SeriesSample, CSV_COLUMNS,
    SCHEMA_VERSION,
};
pub use rng::{atom_stream, StreamPurpose};
pub use scenario::{
    doppler_limit_temperature, rms_speed_3d, temperature_from_variance, thermal_sigma, Axis,
    BeamGeometry, CoolingScenario, Stepping, MAX_STEP_EVENT_PROBABILITY,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Species(#[from] SpeciesError),
    #[error("time step too large: expected events per step {event_probability} (limit 0.1)")]
    StepTooLarge { event_probability: f64 },
    #[error("rate-equation oracle: {0}")]
    GridResolution(String),
    #[error("unsupported scenario for {what}: {reason}")]
    Unsupported { what: &'static str, reason: String },
    #[error("invalid search bounds: {0}")]
    InvalidBounds(String),
}
