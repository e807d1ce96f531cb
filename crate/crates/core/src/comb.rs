//! Frequency-domain model of a transform-limited mode-locked pulse train.
//!
//! The train is a comb of equally spaced lines `carrier + k * rep_rate` with
//! equal intensities and zero relative phase. The carrier-envelope offset is
//! folded into `carrier`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{equal_share, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CombError {
    #[error("invalid comb parameter {what} = {value}")]
    InvalidParameter { what: &'static str, value: f64 },
    #[error("comb line index {k} outside [{k_min}, {k_max}]")]
    IndexOutOfRange { k: i64, k_min: i64, k_max: i64 },
    #[error("lowest comb line {lowest} Hz is not positive")]
    NonPositiveLine { lowest: f64 },
}

/// Equal-intensity comb of `line_count` lines indexed `k_min..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombSpectrum<T> {
    carrier: T,
    rep_rate: T,
    duty_cycle: T,
    line_count: u64,
    mean_intensity: T,
    k_min: i64,
    k_max: i64,
}

fn invalid<T: Scalar>(what: &'static str, value: T) -> CombError {
    CombError::InvalidParameter {
        what,
        value: value.to_f64_lossy(),
    }
}

impl<T: Scalar> CombSpectrum<T> {
    /// Builds the comb with `N = round(1 / duty_cycle)` lines (at least one),
    /// centered on the carrier. For even `N` the extra line sits at `+k`.
    pub fn new(carrier: T, rep_rate: T, duty_cycle: T, mean_intensity: T) -> Result<Self, CombError> {
        if !(duty_cycle > T::zero() && duty_cycle <= T::one()) {
            return Err(invalid("duty_cycle", duty_cycle));
        }
        let n = duty_cycle
            .recip()
            .round()
            .to_u64()
            .ok_or_else(|| invalid("duty_cycle", duty_cycle))?
            .max(1);
        Self::with_line_count(carrier, rep_rate, duty_cycle, mean_intensity, n)
    }

    /// Same as [`CombSpectrum::new`] but with an explicit line count, for
    /// lasers whose gain bandwidth sets `N` rather than the duty cycle.
    pub fn with_line_count(
        carrier: T,
        rep_rate: T,
        duty_cycle: T,
        mean_intensity: T,
        line_count: u64,
    ) -> Result<Self, CombError> {
        if !(carrier > T::zero() && carrier.is_finite()) {
            return Err(invalid("carrier", carrier));
        }
        if !(rep_rate > T::zero() && rep_rate.is_finite()) {
            return Err(invalid("rep_rate", rep_rate));
        }
        if !(duty_cycle > T::zero() && duty_cycle <= T::one()) {
            return Err(invalid("duty_cycle", duty_cycle));
        }
        if !(mean_intensity >= T::zero() && mean_intensity.is_finite()) {
            return Err(invalid("mean_intensity", mean_intensity));
        }
        if line_count == 0 || line_count > i64::MAX as u64 / 4 {
            return Err(CombError::InvalidParameter {
                what: "line_count",
                value: line_count as f64,
            });
        }
        let k_min = -(((line_count - 1) / 2) as i64);
        let k_max = k_min + line_count as i64 - 1;
        let comb = Self {
            carrier,
            rep_rate,
            duty_cycle,
            line_count,
            mean_intensity,
            k_min,
            k_max,
        };
        let lowest = comb.frequency_unchecked(k_min);
        if lowest <= T::zero() {
            return Err(CombError::NonPositiveLine {
                lowest: lowest.to_f64_lossy(),
            });
        }
        Ok(comb)
    }

    pub fn carrier(&self) -> T {
        self.carrier
    }

    pub fn rep_rate(&self) -> T {
        self.rep_rate
    }

    pub fn duty_cycle(&self) -> T {
        self.duty_cycle
    }

    pub fn line_count(&self) -> u64 {
        self.line_count
    }

    pub fn mean_intensity(&self) -> T {
        self.mean_intensity
    }

    pub fn index_range(&self) -> (i64, i64) {
        (self.k_min, self.k_max)
    }

    /// Spectral width covered by the lines, `N * rep_rate`.
    pub fn bandwidth(&self) -> T {
        T::from_u64(self.line_count).unwrap() * self.rep_rate
    }

    /// Intensity carried by each line, `I / N`.
    pub fn line_intensity(&self) -> T {
        equal_share(self.mean_intensity, self.line_count as usize)
    }

    pub fn contains(&self, k: i64) -> bool {
        (self.k_min..=self.k_max).contains(&k)
    }

    pub fn line_frequency(&self, k: i64) -> Result<T, CombError> {
        if !self.contains(k) {
            return Err(CombError::IndexOutOfRange {
                k,
                k_min: self.k_min,
                k_max: self.k_max,
            });
        }
        Ok(self.frequency_unchecked(k))
    }

    fn frequency_unchecked(&self, k: i64) -> T {
        self.carrier + T::from_i64(k).unwrap() * self.rep_rate
    }

    /// `(k, frequency, intensity)` for every line, lowest first.
    pub fn lines(&self) -> impl Iterator<Item = (i64, T, T)> + '_ {
        let per_line = self.line_intensity();
        (self.k_min..=self.k_max).map(move |k| (k, self.frequency_unchecked(k), per_line))
    }

    /// Nearest line of the (unbounded) comb grid to `f` and the residual
    /// `f - line`, with the residual in `(-rep/2, rep/2]`.
    pub fn nearest_line(&self, f: T) -> (i64, T) {
        nearest_on_grid(f - self.carrier, self.rep_rate)
    }

    /// Nearest tooth `m` of the two-photon sum comb `2 carrier + m rep` and the
    /// residual, in `(-rep/2, rep/2]`. Any pair of lines sums onto this grid.
    pub fn nearest_two_photon_sum(&self, f: T) -> (i64, T) {
        nearest_on_grid(f - (self.carrier + self.carrier), self.rep_rate)
    }

    /// Frequency of sum-comb tooth `m`.
    pub fn two_photon_sum_frequency(&self, m: i64) -> T {
        self.carrier + self.carrier + T::from_i64(m).unwrap() * self.rep_rate
    }

    /// Tooth range reachable by pairs of lines: `[2 k_min, 2 k_max]`.
    pub fn two_photon_sum_range(&self) -> (i64, i64) {
        (2 * self.k_min, 2 * self.k_max)
    }
}

// offset relative to grid origin; returns (index, residual) with residual in (-s/2, s/2].
fn nearest_on_grid<T: Scalar>(offset: T, spacing: T) -> (i64, T) {
    let half = spacing / T::lit(2.0);
    let x = offset / spacing;
    let mut k = (x - T::lit(0.5)).ceil().to_i64().unwrap_or(0);
    let mut residual = offset - T::from_i64(k).unwrap() * spacing;
    // floating-point rounding near the half-spacing boundary
    if residual > half {
        k += 1;
        residual = offset - T::from_i64(k).unwrap() * spacing;
    } else if residual <= -half {
        k -= 1;
        residual = offset - T::from_i64(k).unwrap() * spacing;
    }
    (k, residual)
}
