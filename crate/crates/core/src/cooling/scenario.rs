use serde::{Deserialize, Serialize};

use crate::excitation::{ionization_probability_per_scatter, saturation_clamp};
use crate::scalar::Scalar;
use crate::species::SpeciesParams;
use crate::units::{BOLTZMANN, PLANCK};

use super::SimError;

/// Largest allowed per-step event probability in fixed-step mode.
pub const MAX_STEP_EVENT_PROBABILITY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Arrangement of running-wave cooling beams. Every beam carries the
/// scenario's per-beam intensity; beams add incoherently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BeamGeometry {
    /// One beam along `+axis` (or `-axis` when `reverse`).
    Single {
        axis: Axis,
        #[serde(default)]
        reverse: bool,
    },
    /// Counterpropagating pair along one axis.
    Pair { axis: Axis },
    /// Three orthogonal counterpropagating pairs.
    ThreeAxis,
}

impl Default for BeamGeometry {
    fn default() -> Self {
        BeamGeometry::ThreeAxis
    }
}

impl BeamGeometry {
    /// Unit propagation vectors.
    pub fn directions<T: Scalar>(&self) -> Vec<[T; 3]> {
        let unit = |axis: Axis, sign: T| {
            let mut d = [T::zero(); 3];
            d[axis.index()] = sign;
            d
        };
        let (one, minus) = (T::one(), -T::one());
        match *self {
            BeamGeometry::Single { axis, reverse } => {
                vec![unit(axis, if reverse { minus } else { one })]
            }
            BeamGeometry::Pair { axis } => vec![unit(axis, one), unit(axis, minus)],
            BeamGeometry::ThreeAxis => [Axis::X, Axis::Y, Axis::Z]
                .into_iter()
                .flat_map(|a| [unit(a, one), unit(a, minus)])
                .collect(),
        }
    }

    /// Axis for one-dimensional geometries.
    pub fn single_axis(&self) -> Option<Axis> {
        match *self {
            BeamGeometry::Single { axis, .. } | BeamGeometry::Pair { axis } => Some(axis),
            BeamGeometry::ThreeAxis => None,
        }
    }

    pub fn mirrored(&self) -> Self {
        match *self {
            BeamGeometry::Single { axis, reverse } => BeamGeometry::Single {
                axis,
                reverse: !reverse,
            },
            other => other,
        }
    }
}

/// Time integration policy for the Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stepping<T> {
    /// Exact event-driven (Gillespie) sampling. Rates only change at scatter
    /// events, so waiting times are exactly exponential.
    EventDriven,
    /// Adaptive fixed steps sized so the per-step event probability stays at
    /// `max_event_probability`.
    Adaptive { max_event_probability: T },
}

impl<T> Default for Stepping<T> {
    fn default() -> Self {
        Stepping::EventDriven
    }
}

/// Full description of a cooling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingScenario<T> {
    pub species: SpeciesParams<T>,
    /// W/cm² in each beam.
    pub intensity_per_beam: T,
    pub geometry: BeamGeometry,
    /// Two-photon detuning of the light from resonance, Hz (red is negative).
    pub detuning: T,
    /// K
    pub initial_temperature: T,
    pub n_atoms: usize,
    /// s
    pub max_time: Option<T>,
    /// Stop each atom once it has scattered this many times.
    pub max_scatters: Option<u32>,
    pub seed: u64,
    pub stepping: Stepping<T>,
    /// Number of time-series intervals over `[0, max_time]`.
    pub samples: usize,
    /// Speed below which a surviving atom counts as cooled, m/s. Defaults to
    /// the 3D RMS speed at ten times the Doppler temperature.
    pub cooled_speed: Option<T>,
    /// Scatter budget used for the capture metric: atoms whose initial speed
    /// is within `capture_budget * recoil` are capturable.
    pub capture_budget: u32,
}

impl<T: Scalar> CoolingScenario<T> {
    /// Hydrogen in three orthogonal beam pairs at 100 kW/cm² per beam, red
    /// detuned by half a linewidth, starting from a 6 K gas.
    pub fn hydrogen_default() -> Self {
        let species = SpeciesParams::<T>::hydrogen();
        let detuning = -species.effective_linewidth / T::lit(2.0);
        Self {
            species,
            intensity_per_beam: T::lit(1e5),
            geometry: BeamGeometry::ThreeAxis,
            detuning,
            initial_temperature: T::lit(6.0),
            n_atoms: 10_000,
            max_time: Some(T::lit(0.1)),
            max_scatters: None,
            seed: 0,
            stepping: Stepping::EventDriven,
            samples: 50,
            cooled_speed: None,
            capture_budget: 100,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.species.validate()?;
        let bad = |m: &str| Err(SimError::InvalidScenario(m.to_owned()));
        if self.n_atoms == 0 {
            return bad("n_atoms must be at least 1");
        }
        if !(self.intensity_per_beam >= T::zero() && self.intensity_per_beam.is_finite()) {
            return bad("intensity must be finite and non-negative");
        }
        if !(self.initial_temperature > T::zero() && self.initial_temperature.is_finite()) {
            return bad("initial temperature must be positive");
        }
        if !self.detuning.is_finite() {
            return bad("detuning must be finite");
        }
        match (self.max_time, self.max_scatters) {
            (None, None) => return bad("set max_time, max_scatters, or both"),
            (Some(t), _) if !(t > T::zero() && t.is_finite()) => {
                return bad("max_time must be positive and finite")
            }
            _ => {}
        }
        if self.samples == 0 {
            return bad("samples must be at least 1");
        }
        if let Some(v) = self.cooled_speed {
            if !(v > T::zero()) {
                return bad("cooled_speed must be positive");
            }
        }
        if let Stepping::Adaptive {
            max_event_probability: p,
        } = self.stepping
        {
            if !(p > T::zero() && p <= T::lit(MAX_STEP_EVENT_PROBABILITY)) {
                return bad("adaptive max_event_probability must be in (0, 0.1]");
            }
        }
        Ok(())
    }

    pub fn beam_directions(&self) -> Vec<[T; 3]> {
        self.geometry.directions()
    }

    /// Total light intensity at the atom, W/cm².
    pub fn total_intensity(&self) -> T {
        self.intensity_per_beam * T::from_usize(self.beam_directions().len()).unwrap()
    }

    /// Ionization probability per scatter, from the total intensity at the atom.
    pub fn ionization_probability(&self) -> T {
        ionization_probability_per_scatter(&self.species, self.total_intensity())
    }

    pub fn cooled_speed_threshold(&self) -> T {
        self.cooled_speed.unwrap_or_else(|| {
            rms_speed_3d(&self.species, T::lit(10.0) * doppler_limit_temperature(&self.species))
        })
    }

    pub fn capture_speed(&self) -> T {
        T::from_u32(self.capture_budget).unwrap() * self.species.recoil_velocity
    }

    /// Upper bound on the total scatter rate of one atom.
    pub fn max_total_rate(&self) -> T {
        let per_beam = (self.species.multiphoton_rate_coefficient
            * self.intensity_per_beam.powi(self.species.photon_order as i32))
        .min(saturation_clamp(&self.species));
        per_beam * T::from_usize(self.beam_directions().len()).unwrap()
    }

    /// Sample times for the time series; only `t = 0` without a time limit.
    pub fn sample_times(&self) -> Vec<T> {
        match self.max_time {
            Some(t) => (0..=self.samples)
                .map(|j| t * T::from_usize(j).unwrap() / T::from_usize(self.samples).unwrap())
                .collect(),
            None => vec![T::zero()],
        }
    }
}

/// Doppler-limited temperature `ħ (2π Γ_eff) / (2 k_B)`.
pub fn doppler_limit_temperature<T: Scalar>(s: &SpeciesParams<T>) -> T {
    T::lit(PLANCK) * s.effective_linewidth / (T::lit(2.0) * T::lit(BOLTZMANN))
}

/// Per-axis thermal velocity spread `sqrt(k_B T / m)`.
pub fn thermal_sigma<T: Scalar>(s: &SpeciesParams<T>, temperature: T) -> T {
    (T::lit(BOLTZMANN) * temperature / s.mass).sqrt()
}

pub fn rms_speed_3d<T: Scalar>(s: &SpeciesParams<T>, temperature: T) -> T {
    T::lit(3.0).sqrt() * thermal_sigma(s, temperature)
}

/// Temperature equivalent of a per-axis velocity variance.
pub fn temperature_from_variance<T: Scalar>(s: &SpeciesParams<T>, variance: T) -> T {
    s.mass * variance / T::lit(BOLTZMANN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn doppler_limit_examples() {
        let h = SpeciesParams::<f64>::hydrogen();
        let td = doppler_limit_temperature(&h);
        // 6.62607015e-34 * 5e7 / (2 * 1.380649e-23)
        assert_relative_eq!(td, 1.199_810_768e-3, max_relative = 1e-9);
        let wide = SpeciesParams {
            effective_linewidth: 1e8,
            max_effective_linewidth: 1e8,
            ..h.clone()
        };
        assert_relative_eq!(doppler_limit_temperature(&wide), 2.0 * td, max_relative = 1e-15);
        let narrow = SpeciesParams {
            effective_linewidth: 1e-30,
            ..h
        };
        assert!(doppler_limit_temperature(&narrow) < 1e-36);
    }

    #[test]
    fn geometry_directions() {
        let d: Vec<[f64; 3]> = BeamGeometry::ThreeAxis.directions();
        assert_eq!(d.len(), 6);
        let sum = d.iter().fold([0.0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
        assert_eq!(sum, [0.0; 3]);
        let single: Vec<[f64; 3]> = BeamGeometry::Single {
            axis: Axis::Z,
            reverse: true,
        }
        .directions();
        assert_eq!(single, vec![[0.0, 0.0, -1.0]]);
    }

    #[test]
    fn validation() {
        let mut s = CoolingScenario::<f64>::hydrogen_default();
        s.validate().unwrap();
        s.n_atoms = 0;
        assert!(s.validate().is_err());
        let mut s = CoolingScenario::<f64>::hydrogen_default();
        s.initial_temperature = 0.0;
        assert!(s.validate().is_err());
        let mut s = CoolingScenario::<f64>::hydrogen_default();
        s.max_time = None;
        assert!(s.validate().is_err());
        s.max_scatters = Some(10);
        s.validate().unwrap();
        let mut s = CoolingScenario::<f64>::hydrogen_default();
        s.stepping = Stepping::Adaptive {
            max_event_probability: 0.2,
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn thermal_spread_of_six_kelvin_hydrogen() {
        let h = SpeciesParams::<f64>::hydrogen();
        assert_relative_eq!(thermal_sigma(&h, 6.0), 222.45, max_relative = 1e-4);
    }
}
