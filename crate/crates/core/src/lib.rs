//! Laser cooling on two-photon transitions driven by mode-locked pulse trains.
//!
//! * [`units`]: constants and unit-tagged quantities,
//! * [`species`]: species parameters and the JSON species registry,
//! * [`comb`]: the frequency comb of a pulse train,
//! * [`excitation`]: CW and pulsed k-photon rates, photoionization,
//! * [`cooling`]: Monte Carlo cooling, the rate-equation oracle, intensity search,
//! * [`scheduler`]: comb coverage and EOM planning for multilevel atoms,
//! * [`reproduce`]: canned scenarios behind the published rate budgets.
//!
//! Physics code is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix it to `f64`, which is what the CLI uses.

pub mod comb;
pub mod cooling;
pub mod excitation;
pub mod reproduce;
pub mod scalar;
pub mod scheduler;
pub mod species;
pub mod units;

pub use scalar::Scalar;

pub type Comb = comb::CombSpectrum<f64>;
pub type Species = species::SpeciesParams<f64>;
pub type Registry = species::SpeciesRegistry<f64>;
pub type Transition = excitation::TransitionSpec<f64>;
pub type Scenario = cooling::CoolingScenario<f64>;
pub type Report = cooling::EnsembleReport<f64>;
pub type Ensemble = cooling::AtomEnsemble<f64>;
pub type LevelSet = scheduler::LevelSet<f64>;
pub type Plan = scheduler::EomPlan<f64>;
