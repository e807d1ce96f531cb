//! Species parameters and the JSON species registry.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::units::{ensure_non_negative, UnitError, PLANCK};

/// Relative tolerance for the stored recoil against `k h / (m λ)`.
pub const RECOIL_CONSISTENCY_TOLERANCE: f64 = 0.01;

#[derive(Debug, Error)]
pub enum SpeciesError {
    #[error("species `{name}`: {reason}")]
    Invalid { name: String, reason: String },
    #[error(transparent)]
    Unit(#[from] UnitError),
    #[error("unknown species `{0}`")]
    Unknown(String),
    #[error("species registry I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("species registry JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Everything the rate and cooling models need to know about an atom.
///
/// Rate coefficients use W/cm² as the intensity unit: the resonant k-photon
/// rate is `multiphoton_rate_coefficient * I^k` (Hz W⁻ᵏ cm²ᵏ) and the
/// excited-state photoionization rate is `photoionization_coefficient * I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesParams<T> {
    pub name: String,
    /// kg
    pub mass: T,
    /// Per-photon wavelength of the cooling light, m.
    pub cooling_wavelength: T,
    /// Wavelength of the spontaneous photon on the return path, m.
    pub emission_wavelength: T,
    pub photon_order: u32,
    /// Velocity change along the beam per absorption event, m/s.
    pub recoil_velocity: T,
    /// Effective (quench-broadened) linewidth of the upper state, Hz.
    pub effective_linewidth: T,
    /// Largest reachable effective linewidth, Hz.
    pub max_effective_linewidth: T,
    /// Hz W⁻ᵏ cm²ᵏ
    pub multiphoton_rate_coefficient: T,
    /// Hz W⁻¹ cm²
    pub photoionization_coefficient: T,
}

impl<T: Scalar> SpeciesParams<T> {
    /// Hydrogen 1S–2S with maximal electric-field quenching of 2S.
    pub fn hydrogen() -> Self {
        Self {
            name: "hydrogen".to_owned(),
            mass: T::lit(1.674e-27),
            cooling_wavelength: T::lit(243e-9),
            // Lyman-alpha, 2P -> 1S
            emission_wavelength: T::lit(121.567e-9),
            photon_order: 2,
            recoil_velocity: T::lit(3.25),
            effective_linewidth: T::lit(50e6),
            max_effective_linewidth: T::lit(50e6),
            multiphoton_rate_coefficient: T::lit(2.8e-7),
            photoionization_coefficient: T::lit(11.4),
        }
    }

    /// `k h / (m λ)`: momentum of `k` absorbed photons over the mass.
    pub fn absorption_recoil_from_constants(&self) -> T {
        T::from_u32(self.photon_order).unwrap() * T::lit(PLANCK)
            / (self.mass * self.cooling_wavelength)
    }

    /// `h / (m λ_emit)`: magnitude of the spontaneous-emission kick.
    pub fn emission_recoil(&self) -> T {
        T::lit(PLANCK) / (self.mass * self.emission_wavelength)
    }

    /// Returns a copy with a different effective linewidth, validated against
    /// the species maximum.
    pub fn with_linewidth(&self, linewidth: T) -> Result<Self, SpeciesError> {
        let mut out = self.clone();
        out.effective_linewidth = linewidth;
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), SpeciesError> {
        let invalid = |reason: String| SpeciesError::Invalid {
            name: self.name.clone(),
            reason,
        };
        for (what, v) in [
            ("mass", self.mass),
            ("cooling wavelength", self.cooling_wavelength),
            ("emission wavelength", self.emission_wavelength),
            ("recoil velocity", self.recoil_velocity),
            ("effective linewidth", self.effective_linewidth),
            ("rate coefficient", self.multiphoton_rate_coefficient),
            ("photoionization coefficient", self.photoionization_coefficient),
        ] {
            ensure_non_negative(what, v)?;
        }
        if self.mass <= T::zero() || self.cooling_wavelength <= T::zero() {
            return Err(invalid("mass and cooling wavelength must be positive".into()));
        }
        if self.emission_wavelength <= T::zero() {
            return Err(invalid("emission wavelength must be positive".into()));
        }
        if self.photon_order == 0 {
            return Err(invalid("photon order must be at least 1".into()));
        }
        if !(self.effective_linewidth > T::zero()
            && self.effective_linewidth <= self.max_effective_linewidth)
        {
            return Err(invalid(format!(
                "effective linewidth {} Hz outside (0, {}] Hz",
                self.effective_linewidth, self.max_effective_linewidth
            )));
        }
        let expected = self.absorption_recoil_from_constants();
        let rel = ((self.recoil_velocity - expected) / expected).abs();
        if rel > T::lit(RECOIL_CONSISTENCY_TOLERANCE) {
            return Err(invalid(format!(
                "recoil {} m/s differs from k h/(m lambda) = {} m/s by more than 1%",
                self.recoil_velocity, expected
            )));
        }
        Ok(())
    }
}

/// A named collection of species, loadable from JSON so new atoms can be
/// added without recompiling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesRegistry<T> {
    pub species: BTreeMap<String, SpeciesParams<T>>,
}

impl<T: Scalar> Default for SpeciesRegistry<T> {
    fn default() -> Self {
        Self::builtin()
    }
}

impl<T: Scalar> SpeciesRegistry<T> {
    pub fn builtin() -> Self {
        let h = SpeciesParams::hydrogen();
        let mut species = BTreeMap::new();
        species.insert(h.name.clone(), h);
        Self { species }
    }

    pub fn get(&self, name: &str) -> Result<&SpeciesParams<T>, SpeciesError> {
        self.species
            .get(name)
            .ok_or_else(|| SpeciesError::Unknown(name.to_owned()))
    }

    pub fn insert(&mut self, params: SpeciesParams<T>) -> Result<(), SpeciesError> {
        params.validate()?;
        self.species.insert(params.name.clone(), params);
        Ok(())
    }
}

impl<T> SpeciesRegistry<T>
where
    T: Scalar + Serialize + for<'de> Deserialize<'de>,
{
    pub fn from_json(text: &str) -> Result<Self, SpeciesError> {
        let reg: Self = serde_json::from_str(text)?;
        for (key, s) in &reg.species {
            if key != &s.name {
                return Err(SpeciesError::Invalid {
                    name: s.name.clone(),
                    reason: format!("registry key `{key}` does not match species name"),
                });
            }
            s.validate()?;
        }
        Ok(reg)
    }

    pub fn to_json(&self) -> Result<String, SpeciesError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SpeciesError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SpeciesError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
