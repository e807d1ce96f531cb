//! Run configuration: a single JSON file, overridden by command-line flags.
//!
//! Every section except `species` has defaults. Parsing reports the exact
//! key path of the first bad value; keys the schema does not know are
//! collected and rejected in strict mode.

use std::path::{Path, PathBuf};

use combcool::comb::CombSpectrum;
use combcool::cooling::{BeamGeometry, CoolingScenario, Objective, SearchBounds, Stepping};
use combcool::excitation::TransitionSpec;
use combcool::scheduler::{EomBand, FeasibilityParams, LevelSet};
use combcool::species::SpeciesRegistry;
use combcool::{Comb, Scenario, Species};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Species name, looked up in `species_file` first, then the builtins.
    pub species: String,
    #[serde(default)]
    pub species_file: Option<PathBuf>,
    /// Effective linewidth override, Hz.
    #[serde(default)]
    pub linewidth_hz: Option<f64>,
    #[serde(default)]
    pub comb: Option<CombConfig>,
    #[serde(default)]
    pub beam: BeamConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub rates: RatesConfig,
    #[serde(default)]
    pub optimize: OptimizeConfig,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombConfig {
    pub carrier_hz: f64,
    pub rep_rate_hz: f64,
    pub duty_cycle: f64,
    /// Time-averaged intensity, W/cm².
    #[serde(default)]
    pub mean_intensity: f64,
    #[serde(default)]
    pub line_count: Option<u64>,
}

impl CombConfig {
    pub fn build(&self) -> Result<Comb, CliError> {
        let comb = match self.line_count {
            Some(n) => CombSpectrum::with_line_count(
                self.carrier_hz,
                self.rep_rate_hz,
                self.duty_cycle,
                self.mean_intensity,
                n,
            ),
            None => CombSpectrum::new(self.carrier_hz, self.rep_rate_hz, self.duty_cycle, self.mean_intensity),
        };
        comb.map_err(|e| CliError::validation(format!("comb: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeamConfig {
    /// W/cm²
    pub intensity_per_beam: f64,
    pub geometry: BeamGeometry,
    /// Hz; defaults to minus half the linewidth.
    pub detuning_hz: Option<f64>,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            intensity_per_beam: 1e5,
            geometry: BeamGeometry::ThreeAxis,
            detuning_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub n_atoms: usize,
    pub seed: u64,
    pub initial_temperature: f64,
    pub max_time: Option<f64>,
    pub max_scatters: Option<u32>,
    pub stepping: Stepping<f64>,
    pub samples: usize,
    pub cooled_speed: Option<f64>,
    pub capture_budget: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = Scenario::hydrogen_default();
        Self {
            n_atoms: s.n_atoms,
            seed: s.seed,
            initial_temperature: s.initial_temperature,
            max_time: s.max_time,
            max_scatters: s.max_scatters,
            stepping: s.stepping,
            samples: s.samples,
            cooled_speed: s.cooled_speed,
            capture_budget: s.capture_budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RatesConfig {
    /// Scatter budget used for the survival line of the table.
    pub scatter_budget: u32,
    /// Optional k-photon transition for the CW and pulsed Rabi frequencies.
    pub transition: Option<TransitionSpec<f64>>,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            scatter_budget: 100,
            transition: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    ImpulseBudget,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeConfig {
    pub objective: Objective,
    pub evaluator: Evaluator,
    pub bounds: SearchBounds<f64>,
    /// Scatters counted as cooled by the impulse-budget evaluator.
    pub scatter_budget: u32,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            objective: Objective::CooledAndSurviving,
            evaluator: Evaluator::ImpulseBudget,
            bounds: SearchBounds::new(1e3, 1e7),
            scatter_budget: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    /// Level-set JSON file; the builtin carbon template when absent.
    #[serde(default)]
    pub levels: Option<PathBuf>,
    pub eom_band_hz: EomBand<f64>,
    #[serde(default)]
    pub merge_tolerance_hz: f64,
    /// Total intensity shared by all levels, W/cm².
    #[serde(default = "default_schedule_intensity")]
    pub total_intensity: f64,
    #[serde(default)]
    pub feasibility: FeasibilityParams<f64>,
}

fn default_schedule_intensity() -> f64 {
    60e3
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Parsed configuration plus the keys nobody asked for.
#[derive(Debug)]
pub struct Loaded {
    pub config: ScenarioConfig,
    pub unknown_keys: Vec<String>,
}

pub fn parse(text: &str) -> Result<Loaded, CliError> {
    let mut unknown_keys = Vec::new();
    let mut json = serde_json::Deserializer::from_str(text);
    let mut record = |path: serde_ignored::Path<'_>| unknown_keys.push(path.to_string());
    let tracked = serde_ignored::Deserializer::new(&mut json, &mut record);
    let config: ScenarioConfig = serde_path_to_error::deserialize(tracked).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::validation(format!("config: {}", e.inner()))
        } else {
            CliError::validation(format!("config key `{path}`: {}", e.inner()))
        }
    })?;
    json.end()
        .map_err(|e| CliError::validation(format!("config: {e}")))?;
    Ok(Loaded {
        config,
        unknown_keys,
    })
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

impl ScenarioConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.run.seed = seed;
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
    }

    /// Canonical JSON with every default spelled out.
    pub fn normalized(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the normalized config, hex encoded. The output directory
    /// is left out so a rerun into a different folder keeps the same hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        hex::encode(Sha256::digest(c.normalized().as_bytes()))
    }

    pub fn species(&self) -> Result<Species, CliError> {
        let mut registry = SpeciesRegistry::builtin();
        if let Some(path) = &self.species_file {
            let file = SpeciesRegistry::load(path)
                .map_err(|e| CliError::validation(format!("species_file: {e}")))?;
            for params in file.species.into_values() {
                registry
                    .insert(params)
                    .map_err(|e| CliError::validation(format!("species_file: {e}")))?;
            }
        }
        let base = registry
            .get(&self.species)
            .map_err(|e| CliError::validation(format!("species: {e}")))?
            .clone();
        match self.linewidth_hz {
            Some(g) => base
                .with_linewidth(g)
                .map_err(|e| CliError::validation(format!("linewidth_hz: {e}"))),
            None => Ok(base),
        }
    }

    pub fn comb(&self) -> Result<Option<Comb>, CliError> {
        self.comb.as_ref().map(CombConfig::build).transpose()
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let species = self.species()?;
        let detuning = self
            .beam
            .detuning_hz
            .unwrap_or(-species.effective_linewidth / 2.0);
        let s = CoolingScenario {
            species,
            intensity_per_beam: self.beam.intensity_per_beam,
            geometry: self.beam.geometry,
            detuning,
            initial_temperature: self.run.initial_temperature,
            n_atoms: self.run.n_atoms,
            max_time: self.run.max_time,
            max_scatters: self.run.max_scatters,
            seed: self.run.seed,
            stepping: self.run.stepping,
            samples: self.run.samples,
            cooled_speed: self.run.cooled_speed,
            capture_budget: self.run.capture_budget,
        };
        s.validate()
            .map_err(|e| CliError::validation(e.to_string()))?;
        Ok(s)
    }

    pub fn levels(&self) -> Result<(LevelSet<f64>, &ScheduleConfig), CliError> {
        let sched = self
            .schedule
            .as_ref()
            .ok_or_else(|| CliError::validation("config key `schedule` is required for this command"))?;
        let levels = match &sched.levels {
            Some(path) => LevelSet::load(path)
                .map_err(|e| CliError::validation(format!("schedule.levels: {e}")))?,
            None => LevelSet::carbon_template(),
        };
        Ok((levels, sched))
    }
}
