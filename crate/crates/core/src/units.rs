//! Physical constants and unit-tagged quantities.
//!
//! Conventions used throughout the crate:
//!
//! * intensities are W/cm² (every rate coefficient is quoted per W/cm²),
//! * linewidths, detunings and Rabi frequencies are ordinary frequencies in Hz,
//!   never rad/s, unless a name says `angular`,
//! * energies of atomic levels are wavenumbers in cm⁻¹.
//!
//! Constants are CODATA 2018 (exact SI-defining values where applicable).

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Speed of light in cm/s, for wavenumber conversions.
pub const SPEED_OF_LIGHT_CM: f64 = SPEED_OF_LIGHT * 100.0;
/// Unified atomic mass unit, kg (CODATA 2018, relative uncertainty 3e-10).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnitError {
    #[error("cannot convert {from:?} ({from_dim:?}) to {to:?} ({to_dim:?})")]
    DimensionMismatch {
        from: Unit,
        from_dim: Dimension,
        to: Unit,
        to_dim: Dimension,
    },
    #[error("{what} must be non-negative, got {value}")]
    Negative { what: &'static str, value: f64 },
    #[error("{what} must be finite, got {value}")]
    NotFinite { what: &'static str, value: f64 },
}

macro_rules! quantity {
    ($(#[$meta:meta])* $name:ident, $unit:literal, $ctor:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name<T>(pub T);

        impl<T: Scalar> $name<T> {
            #[inline]
            pub fn $ctor(value: T) -> Self {
                Self(value)
            }

            #[inline]
            pub fn value(self) -> T {
                self.0
            }

            pub const UNIT: &'static str = $unit;
        }

        impl<T: Scalar> Add for $name<T> {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self(self.0 + rhs.0)
            }
        }

        impl<T: Scalar> Sub for $name<T> {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self(self.0 - rhs.0)
            }
        }

        impl<T: Scalar> Mul<T> for $name<T> {
            type Output = Self;
            fn mul(self, rhs: T) -> Self {
                Self(self.0 * rhs)
            }
        }

        impl<T: Scalar> Div<T> for $name<T> {
            type Output = Self;
            fn div(self, rhs: T) -> Self {
                Self(self.0 / rhs)
            }
        }

        impl<T: Scalar> fmt::Display for $name<T> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} {}", self.0, $unit)
            }
        }
    };
}

quantity!(
    /// Ordinary frequency in Hz.
    Frequency, "Hz", hz
);
quantity!(
    /// Angular frequency in rad/s.
    AngularFrequency, "rad/s", rad_per_s
);
quantity!(
    /// Intensity in W/cm².
    Intensity, "W/cm^2", w_per_cm2
);
quantity!(Temperature, "K", kelvin);
quantity!(Velocity, "m/s", m_per_s);
quantity!(Mass, "kg", kg);
quantity!(Length, "m", meters);
quantity!(Time, "s", seconds);
quantity!(
    /// Spectroscopic wavenumber in cm⁻¹.
    Wavenumber, "cm^-1", per_cm
);
quantity!(Energy, "J", joules);

impl<T: Scalar> Frequency<T> {
    pub fn to_angular(self) -> AngularFrequency<T> {
        AngularFrequency(self.0 * T::TAU())
    }

    pub fn to_wavenumber(self) -> Wavenumber<T> {
        Wavenumber(self.0 / T::lit(SPEED_OF_LIGHT_CM))
    }

    pub fn mhz(value: T) -> Self {
        Self(value * T::lit(1e6))
    }
}

impl<T: Scalar> AngularFrequency<T> {
    pub fn to_frequency(self) -> Frequency<T> {
        Frequency(self.0 / T::TAU())
    }
}

impl<T: Scalar> Wavenumber<T> {
    pub fn to_frequency(self) -> Frequency<T> {
        Frequency(self.0 * T::lit(SPEED_OF_LIGHT_CM))
    }

    pub fn to_energy(self) -> Energy<T> {
        Energy(self.0 * T::lit(SPEED_OF_LIGHT_CM * PLANCK))
    }
}

impl<T: Scalar> Intensity<T> {
    pub fn kw_per_cm2(value: T) -> Self {
        Self(value * T::lit(1e3))
    }

    pub fn from_w_per_m2(value: T) -> Self {
        Self(value * T::lit(1e-4))
    }

    pub fn to_w_per_m2(self) -> T {
        self.0 * T::lit(1e4)
    }
}

impl<T: Scalar> Length<T> {
    pub fn nanometers(value: T) -> Self {
        Self(value * T::lit(1e-9))
    }
}

impl<T: Scalar> Mass<T> {
    pub fn amu(value: T) -> Self {
        Self(value * T::lit(ATOMIC_MASS_UNIT))
    }
}

/// Rejects negative or non-finite values for quantities that must be physical.
pub fn ensure_non_negative<T: Scalar>(what: &'static str, value: T) -> Result<T, UnitError> {
    if !value.is_finite() {
        return Err(UnitError::NotFinite {
            what,
            value: value.to_f64_lossy(),
        });
    }
    if value < T::zero() {
        return Err(UnitError::Negative {
            what,
            value: value.to_f64_lossy(),
        });
    }
    Ok(value)
}

/// Physical dimension of a [`Unit`]. Spectral units (frequency, angular
/// frequency, wavenumber, photon energy) are mutually convertible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    Spectral,
    Intensity,
    Temperature,
    Velocity,
    Mass,
    Length,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    Hertz,
    MegaHertz,
    RadianPerSecond,
    PerCentimeter,
    Joule,
    WattPerCm2,
    WattPerM2,
    Kelvin,
    MilliKelvin,
    MeterPerSecond,
    Kilogram,
    AtomicMassUnit,
    Meter,
    Nanometer,
    Second,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Hertz | MegaHertz | RadianPerSecond | PerCentimeter | Joule => Dimension::Spectral,
            WattPerCm2 | WattPerM2 => Dimension::Intensity,
            Kelvin | MilliKelvin => Dimension::Temperature,
            MeterPerSecond => Dimension::Velocity,
            Kilogram | AtomicMassUnit => Dimension::Mass,
            Meter | Nanometer => Dimension::Length,
            Second => Dimension::Time,
        }
    }

    // Value in the dimension's base unit (Hz, W/cm², K, m/s, kg, m, s).
    fn to_base<T: Scalar>(self, v: T) -> T {
        use Unit::*;
        match self {
            Hertz | WattPerCm2 | Kelvin | MeterPerSecond | Kilogram | Meter | Second => v,
            MegaHertz => v * T::lit(1e6),
            RadianPerSecond => v / T::TAU(),
            PerCentimeter => v * T::lit(SPEED_OF_LIGHT_CM),
            Joule => v / T::lit(PLANCK),
            WattPerM2 => v * T::lit(1e-4),
            MilliKelvin => v * T::lit(1e-3),
            AtomicMassUnit => v * T::lit(ATOMIC_MASS_UNIT),
            Nanometer => v * T::lit(1e-9),
        }
    }

    fn from_base<T: Scalar>(self, v: T) -> T {
        use Unit::*;
        match self {
            Hertz | WattPerCm2 | Kelvin | MeterPerSecond | Kilogram | Meter | Second => v,
            MegaHertz => v / T::lit(1e6),
            RadianPerSecond => v * T::TAU(),
            PerCentimeter => v / T::lit(SPEED_OF_LIGHT_CM),
            Joule => v * T::lit(PLANCK),
            WattPerM2 => v / T::lit(1e-4),
            MilliKelvin => v / T::lit(1e-3),
            AtomicMassUnit => v / T::lit(ATOMIC_MASS_UNIT),
            Nanometer => v / T::lit(1e-9),
        }
    }
}

/// A dynamically tagged quantity, used at I/O boundaries where the unit is
/// only known at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity<T> {
    pub value: T,
    pub unit: Unit,
}

impl<T: Scalar> Quantity<T> {
    pub fn new(value: T, unit: Unit) -> Self {
        Self { value, unit }
    }
}

/// Converts `q` into `target`, failing if the dimensions differ.
pub fn convert<T: Scalar>(q: Quantity<T>, target: Unit) -> Result<Quantity<T>, UnitError> {
    let (from_dim, to_dim) = (q.unit.dimension(), target.dimension());
    if from_dim != to_dim {
        return Err(UnitError::DimensionMismatch {
            from: q.unit,
            from_dim,
            to: target,
            to_dim,
        });
    }
    if q.unit == target {
        return Ok(q);
    }
    Ok(Quantity::new(target.from_base(q.unit.to_base(q.value)), target))
}
