//! Excitation-rate physics: CW and pulsed k-photon Rabi frequencies, the
//! resonant multiphoton scattering rate, photoionization loss, and a
//! brute-force pathway enumeration that checks the pulsed/CW relation.
//!
//! All frequencies here are ordinary Hz; the Rabi frequency comes back in the
//! same convention as the intermediate linewidth it is computed from.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comb::CombSpectrum;
use crate::scalar::Scalar;
use crate::species::SpeciesParams;

/// `|detuning| / linewidth` must exceed this for the single-intermediate-state
/// formula to apply.
pub const MIN_DETUNING_RATIO: f64 = 10.0;

/// Comb bandwidth must stay below this fraction of the carrier for the
/// pulsed/CW relation to hold.
pub const MAX_FRACTIONAL_BANDWIDTH: f64 = 0.1;

/// Largest comb enumerated by [`pathway_amplitude_oracle`].
pub const ORACLE_MAX_LINES: u64 = 200;
pub const ORACLE_MAX_ORDER: u32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExcitationError {
    #[error("invalid transition: {0}")]
    InvalidTransition(String),
    #[error("intermediate detuning is zero: the far-detuned Rabi formula is singular")]
    ZeroDetuning,
    #[error("intermediate detuning {detuning} Hz is not far from the {linewidth} Hz linewidth (need > {MIN_DETUNING_RATIO}x)")]
    NotFarDetuned { detuning: f64, linewidth: f64 },
    #[error("negative intensity {0} W/cm^2")]
    NegativeIntensity(f64),
    #[error("comb bandwidth {bandwidth} Hz is not small compared to carrier {carrier} Hz")]
    BandwidthTooLarge { bandwidth: f64, carrier: f64 },
    #[error("pathway oracle supports N in 1..={ORACLE_MAX_LINES}, k in 1..={ORACLE_MAX_ORDER}; got N={lines}, k={order}")]
    OracleOutOfRange { lines: u64, order: u32 },
}

/// A k-photon transition through a single far-detuned intermediate state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar"))]
pub struct TransitionSpec<T> {
    pub photon_order: u32,
    /// Hz
    pub intermediate_linewidth: T,
    /// W/cm²
    pub saturation_intensity: T,
    /// Hz
    pub intermediate_detuning: T,
    #[serde(default = "one")]
    pub rwa_factor: T,
}

fn one<T: Scalar>() -> T {
    T::one()
}

impl<T: Scalar> TransitionSpec<T> {
    pub fn new(photon_order: u32, linewidth: T, saturation_intensity: T, detuning: T) -> Self {
        Self {
            photon_order,
            intermediate_linewidth: linewidth,
            saturation_intensity,
            intermediate_detuning: detuning,
            rwa_factor: T::one(),
        }
    }

    pub fn with_rwa_factor(mut self, rwa_factor: T) -> Self {
        self.rwa_factor = rwa_factor;
        self
    }

    /// The detuning conditions only apply when there is an intermediate
    /// state, i.e. for `k >= 2`.
    pub fn validate(&self) -> Result<(), ExcitationError> {
        if self.photon_order == 0 {
            return Err(ExcitationError::InvalidTransition("photon order must be >= 1".into()));
        }
        if !(self.intermediate_linewidth > T::zero()) {
            return Err(ExcitationError::InvalidTransition(
                "intermediate linewidth must be positive".into(),
            ));
        }
        if !(self.saturation_intensity > T::zero()) {
            return Err(ExcitationError::InvalidTransition(
                "saturation intensity must be positive".into(),
            ));
        }
        if self.photon_order >= 2 {
            if self.intermediate_detuning == T::zero() {
                return Err(ExcitationError::ZeroDetuning);
            }
            if self.intermediate_detuning.abs()
                <= T::lit(MIN_DETUNING_RATIO) * self.intermediate_linewidth
            {
                return Err(ExcitationError::NotFarDetuned {
                    detuning: self.intermediate_detuning.to_f64_lossy(),
                    linewidth: self.intermediate_linewidth.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }
}

/// CW k-photon Rabi frequency at intensity `intensity` (W/cm²):
///
/// `2 η Γ (I / 2 I_sat)^(k/2) (Γ / 2π Δ)^(k-1)`.
pub fn rabi_cw<T: Scalar>(t: &TransitionSpec<T>, intensity: T) -> Result<T, ExcitationError> {
    t.validate()?;
    if intensity < T::zero() {
        return Err(ExcitationError::NegativeIntensity(intensity.to_f64_lossy()));
    }
    let k = T::from_u32(t.photon_order).unwrap();
    let two = T::lit(2.0);
    let gamma = t.intermediate_linewidth;
    let drive = (intensity / (two * t.saturation_intensity)).powf(k / two);
    let ladder = if t.photon_order == 1 {
        T::one()
    } else {
        (gamma / (T::TAU() * t.intermediate_detuning)).powi(t.photon_order as i32 - 1)
    };
    Ok(two * t.rwa_factor * gamma * drive * ladder)
}

/// Pulsed k-photon Rabi frequency for a comb of time-averaged intensity `Ī`:
/// `N^(k/2 - 1)` times the CW value at `Ī`.
pub fn rabi_pulsed<T: Scalar>(
    t: &TransitionSpec<T>,
    comb: &CombSpectrum<T>,
) -> Result<T, ExcitationError> {
    if comb.bandwidth() > T::lit(MAX_FRACTIONAL_BANDWIDTH) * comb.carrier() {
        return Err(ExcitationError::BandwidthTooLarge {
            bandwidth: comb.bandwidth().to_f64_lossy(),
            carrier: comb.carrier().to_f64_lossy(),
        });
    }
    let cw = rabi_cw(t, comb.mean_intensity())?;
    Ok(cw * pulsed_gain::<T>(comb.line_count(), t.photon_order))
}

/// `N^(k/2 - 1)`; exactly one for two-photon transitions.
pub fn pulsed_gain<T: Scalar>(line_count: u64, photon_order: u32) -> T {
    if photon_order == 2 {
        return T::one();
    }
    let n = T::from_u64(line_count).unwrap();
    n.powf(T::from_u32(photon_order).unwrap() / T::lit(2.0) - T::one())
}

/// Result of the exhaustive pathway enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathwayGain {
    pub lines: u64,
    pub order: u32,
    /// Sum-comb tooth (in units of the line index) that was counted.
    pub tooth: i64,
    /// Ordered k-tuples of lines landing on that tooth.
    pub pathways: u64,
    /// Coherent amplitude relative to a single CW line of the full intensity.
    pub gain: f64,
}

/// Enumerates every ordered k-tuple of lines of an `N`-line flat comb whose
/// summed frequency hits the most populated sum-comb tooth. Each pathway has
/// field amplitude `(1/N)^(k/2)` relative to CW, and all add in phase, so the
/// returned gain is `pathways * N^(-k/2)`.
pub fn pathway_amplitude_oracle(lines: u64, order: u32) -> Result<PathwayGain, ExcitationError> {
    if !(1..=ORACLE_MAX_LINES).contains(&lines) || !(1..=ORACLE_MAX_ORDER).contains(&order) {
        return Err(ExcitationError::OracleOutOfRange { lines, order });
    }
    let n = lines as i64;
    // Line indices 0..n; the central tooth of a k-fold sum is round(k (n-1) / 2).
    let tooth = (order as i64 * (n - 1) + 1) / 2;
    let mut pathways = 0u64;
    let mut idx = vec![0i64; order as usize];
    loop {
        if idx.iter().sum::<i64>() == tooth {
            pathways += 1;
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                let gain = pathways as f64 * (lines as f64).powf(-(order as f64) / 2.0);
                return Ok(PathwayGain {
                    lines,
                    order,
                    tooth,
                    pathways,
                    gain,
                });
            }
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// How close an excitation rate is to the saturation clamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Saturation {
    Weak,
    /// Unclamped rate above half the clamp.
    Warning,
    /// Unclamped rate above the clamp; the returned rate was limited.
    Clamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterRate<T> {
    /// Hz
    pub rate: T,
    pub unclamped: T,
    pub saturation: Saturation,
}

/// Normalised Lorentzian of FWHM `linewidth`, equal to one on resonance.
pub fn lorentzian<T: Scalar>(detuning: T, linewidth: T) -> T {
    let g2 = linewidth * linewidth;
    g2 / (g2 + T::lit(4.0) * detuning * detuning)
}

/// Ceiling on the scattering rate, `Γ_eff / 4`.
pub fn saturation_clamp<T: Scalar>(s: &SpeciesParams<T>) -> T {
    s.effective_linewidth / T::lit(4.0)
}

/// Resonant multiphoton scattering rate `c I^k L(δ)`, clamped at `Γ_eff/4`.
pub fn two_photon_scatter_rate<T: Scalar>(
    s: &SpeciesParams<T>,
    intensity: T,
    detuning: T,
) -> ScatterRate<T> {
    let unclamped = unclamped_scatter_rate(s, intensity, detuning);
    let clamp = saturation_clamp(s);
    let (rate, saturation) = if unclamped > clamp {
        (clamp, Saturation::Clamped)
    } else if unclamped > clamp / T::lit(2.0) {
        (unclamped, Saturation::Warning)
    } else {
        (unclamped, Saturation::Weak)
    };
    ScatterRate {
        rate,
        unclamped,
        saturation,
    }
}

#[inline]
pub(crate) fn unclamped_scatter_rate<T: Scalar>(s: &SpeciesParams<T>, intensity: T, detuning: T) -> T {
    s.multiphoton_rate_coefficient
        * intensity.powi(s.photon_order as i32)
        * lorentzian(detuning, s.effective_linewidth)
}

/// Hot-loop version of [`two_photon_scatter_rate`] returning only the rate.
#[inline]
pub(crate) fn clamped_scatter_rate<T: Scalar>(s: &SpeciesParams<T>, intensity: T, detuning: T) -> T {
    unclamped_scatter_rate(s, intensity, detuning).min(saturation_clamp(s))
}

/// Excited-state photoionization rate `c_PI I`; the same for pulsed and CW
/// light since every comb line couples to the continuum.
pub fn photoionization_rate<T: Scalar>(s: &SpeciesParams<T>, intensity: T) -> T {
    s.photoionization_coefficient * intensity
}

/// Probability that one excitation ends in ionization rather than decay:
/// `R_PI / Γ_eff`, capped at one.
pub fn ionization_probability_per_scatter<T: Scalar>(s: &SpeciesParams<T>, intensity: T) -> T {
    if s.effective_linewidth.is_infinite() {
        return T::zero();
    }
    (photoionization_rate(s, intensity) / s.effective_linewidth).min(T::one())
}

/// Survival after `scatters` excitations at intensity `intensity`.
pub fn survival_after<T: Scalar>(s: &SpeciesParams<T>, intensity: T, scatters: u32) -> T {
    let p = ionization_probability_per_scatter(s, intensity);
    (-p * T::from_u32(scatters).unwrap()).exp()
}

/// Single-photon resonant rate under pulsed light: only one line is resonant,
/// so the CW rate drops by `N`.
pub fn single_photon_pulsed_rate<T: Scalar>(cw_rate: T, line_count: u64) -> T {
    assert!(line_count >= 1, "line count must be at least 1");
    cw_rate / T::from_u64(line_count).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn h() -> SpeciesParams<f64> {
        SpeciesParams::hydrogen()
    }

    #[test]
    fn rabi_cw_unit_case() {
        let t = TransitionSpec::new(2, 1.0, 1.0, 1.0 / std::f64::consts::TAU * 100.0);
        // factors chosen so that only the 1/(2πΔ) term differs from one
        let omega = rabi_cw(&t, 2.0).unwrap();
        assert_relative_eq!(omega, 2.0 / 100.0, max_relative = 1e-14);
    }

    #[test]
    fn rabi_cw_hand_evaluated() {
        // 2 * 1e6 * (10/2)^1 * (1e6 / 1e8) = 1e5
        let t = TransitionSpec::new(2, 1e6, 1.0, 1e8 / std::f64::consts::TAU);
        assert_relative_eq!(rabi_cw(&t, 10.0).unwrap(), 1e5, max_relative = 1e-12);
    }

    #[test]
    fn rabi_cw_zero_intensity() {
        for k in 1..=4 {
            let t = TransitionSpec::new(k, 1e6, 1.0, 1e9);
            assert_eq!(rabi_cw(&t, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn rabi_cw_errors() {
        let t = TransitionSpec::new(2, 1e6, 1.0, 0.0);
        assert_eq!(rabi_cw(&t, 1.0), Err(ExcitationError::ZeroDetuning));
        let t = TransitionSpec::new(2, 1e6, 1.0, 1e7);
        assert!(matches!(rabi_cw(&t, 1.0), Err(ExcitationError::NotFarDetuned { .. })));
        let t = TransitionSpec::new(2, 1e6, 1.0, 1e9);
        assert!(matches!(rabi_cw(&t, -1.0), Err(ExcitationError::NegativeIntensity(_))));
        // one-photon transitions have no intermediate state
        let t = TransitionSpec::new(1, 1e6, 1.0, 0.0);
        assert_relative_eq!(rabi_cw(&t, 2.0).unwrap(), 2e6, max_relative = 1e-15);
    }

    #[test]
    fn pulsed_matches_cw_for_single_line() {
        let comb = CombSpectrum::new(1e15, 1e8, 1.0, 1e4).unwrap();
        for k in 1..=3 {
            let t = TransitionSpec::new(k, 1e6, 1.0, 1e9);
            assert_eq!(rabi_pulsed(&t, &comb).unwrap(), rabi_cw(&t, 1e4).unwrap());
        }
    }

    #[test]
    fn pulsed_three_photon_gain() {
        let comb = CombSpectrum::new(1e15, 1e8, 1e-3, 1e4).unwrap();
        let t = TransitionSpec::new(3, 1e6, 1.0, 1e9);
        let ratio = rabi_pulsed(&t, &comb).unwrap() / rabi_cw(&t, 1e4).unwrap();
        assert_relative_eq!(ratio, 1000f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(ratio, 31.6, max_relative = 1e-3);
    }

    #[test]
    fn pulsed_rejects_broad_comb() {
        let comb = CombSpectrum::with_line_count(1e15, 1e12, 1e-3, 1.0, 200).unwrap();
        let t = TransitionSpec::new(2, 1e6, 1.0, 1e9);
        assert!(matches!(rabi_pulsed(&t, &comb), Err(ExcitationError::BandwidthTooLarge { .. })));
    }

    #[test]
    fn oracle_small_cases() {
        assert_eq!(pathway_amplitude_oracle(1, 2).unwrap().gain, 1.0);
        let g = pathway_amplitude_oracle(100, 2).unwrap();
        assert_eq!(g.pathways, 100);
        assert_relative_eq!(g.gain, 1.0, max_relative = 0.02);
        let g = pathway_amplitude_oracle(37, 1).unwrap();
        assert_eq!(g.pathways, 1);
        assert_relative_eq!(g.gain, 37f64.powf(-0.5), max_relative = 1e-12);
        assert!(pathway_amplitude_oracle(201, 2).is_err());
        assert!(pathway_amplitude_oracle(10, 4).is_err());
        assert!(pathway_amplitude_oracle(0, 2).is_err());
    }

    #[test]
    fn oracle_three_photon_count_is_closed_form() {
        // Ordered triples in 0..n summing to s, by inclusion-exclusion:
        // C(s+2,2) - 3 C(s-n+2,2) + 3 C(s-2n+2,2).
        fn c2(x: i64) -> i64 {
            if x < 2 { 0 } else { x * (x - 1) / 2 }
        }
        for n in [2u64, 3, 7, 50, 120] {
            let g = pathway_amplitude_oracle(n, 3).unwrap();
            let (s, n) = (g.tooth, n as i64);
            let expected = c2(s + 2) - 3 * c2(s - n + 2) + 3 * c2(s - 2 * n + 2);
            assert_eq!(g.pathways as i64, expected);
        }
        // flat comb: the central triple count tends to (3/4) N^2
        let g = pathway_amplitude_oracle(50, 3).unwrap();
        assert_eq!(g.pathways, 1875);
        assert_relative_eq!(g.gain / 50f64.sqrt(), 0.75, max_relative = 1e-12);
    }

    #[test]
    fn scatter_rate_examples() {
        let r = two_photon_scatter_rate(&h(), 1e5, 0.0);
        assert_relative_eq!(r.rate, 2.8e3, max_relative = 1e-12);
        assert_eq!(r.saturation, Saturation::Weak);
        assert_eq!(two_photon_scatter_rate(&h(), 0.0, 0.0).rate, 0.0);
        let r = two_photon_scatter_rate(&h(), 1e5, 25e6);
        assert_relative_eq!(r.rate, 1.4e3, max_relative = 1e-12);
    }

    #[test]
    fn scatter_rate_clamps() {
        let clamp = 50e6 / 4.0;
        // c I^2 = clamp at I = sqrt(clamp / c)
        let i_sat = (clamp / 2.8e-7f64).sqrt();
        let r = two_photon_scatter_rate(&h(), 2.0 * i_sat, 0.0);
        assert_eq!(r.saturation, Saturation::Clamped);
        assert_eq!(r.rate, clamp);
        assert!(r.unclamped > clamp);
        let r = two_photon_scatter_rate(&h(), 0.8 * i_sat, 0.0);
        assert_eq!(r.saturation, Saturation::Warning);
        assert_eq!(r.rate, r.unclamped);
    }

    #[test]
    fn photoionization_examples() {
        assert_relative_eq!(photoionization_rate(&h(), 1e5), 1.14e6, max_relative = 1e-12);
        assert_eq!(photoionization_rate(&h(), 0.0), 0.0);
        assert_relative_eq!(photoionization_rate(&h(), 1.0), 11.4, max_relative = 1e-15);
    }

    #[test]
    fn ionization_probability_examples() {
        let p = ionization_probability_per_scatter(&h(), 1e5);
        assert_relative_eq!(p, 0.0228, max_relative = 1e-12);
        assert_relative_eq!(survival_after(&h(), 1e5, 100), (-2.28f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(survival_after(&h(), 1e5, 100), 0.102, max_relative = 0.01);
        assert_eq!(ionization_probability_per_scatter(&h(), 0.0), 0.0);
        let mut wide = h();
        wide.effective_linewidth = f64::INFINITY;
        wide.max_effective_linewidth = f64::INFINITY;
        assert_eq!(ionization_probability_per_scatter(&wide, 1e5), 0.0);
        // capped
        assert_eq!(ionization_probability_per_scatter(&h(), 1e9), 1.0);
    }

    #[test]
    fn single_photon_penalty() {
        assert_eq!(single_photon_pulsed_rate(5.0, 1), 5.0);
        assert_relative_eq!(single_photon_pulsed_rate(5.0, 1000), 5e-3, max_relative = 1e-15);
        // squaring the k = 1 amplitude gain gives the same 1/N penalty
        let gain: f64 = pulsed_gain(1000, 1);
        assert_relative_eq!(gain * gain, single_photon_pulsed_rate(1.0, 1000), max_relative = 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let s = SpeciesParams::<f32>::hydrogen();
        let r = two_photon_scatter_rate(&s, 1e5f32, 0.0);
        assert!((r.rate - 2800.0).abs() / 2800.0 < 1e-5);
        let t = TransitionSpec::<f32>::new(2, 1e6, 1.0, 1e8 / std::f32::consts::TAU);
        assert!((rabi_cw(&t, 10.0).unwrap() - 1e5).abs() / 1e5 < 1e-5);
    }

    proptest! {
        #[test]
        fn two_photon_pulsed_equals_cw(n in 1u64..100_000, i in 0.0f64..1e6) {
            let comb = CombSpectrum::with_line_count(1e15, 1e6, 1e-3, i, n).unwrap();
            let t = TransitionSpec::new(2, 1e6, 3.0, 1e9);
            prop_assert_eq!(rabi_pulsed(&t, &comb).unwrap(), rabi_cw(&t, i).unwrap());
        }

        #[test]
        fn rabi_scales_as_half_power(k in 1u32..5, i in 1e-3f64..1e6, scale in 0.1f64..10.0) {
            let t = TransitionSpec::new(k, 1e6, 3.0, 1e9);
            let ratio = rabi_cw(&t, i * scale).unwrap() / rabi_cw(&t, i).unwrap();
            let expected = scale.powf(k as f64 / 2.0);
            prop_assert!((ratio / expected - 1.0).abs() < 1e-10);
        }

        #[test]
        fn scatter_rate_scales_quadratically(i in 1.0f64..1e5, scale in 0.1f64..10.0, d in -1e8f64..1e8) {
            let a = two_photon_scatter_rate(&h(), i, d);
            let b = two_photon_scatter_rate(&h(), i * scale, d);
            prop_assume!(b.saturation != Saturation::Clamped);
            prop_assert!((b.rate / a.rate / (scale * scale) - 1.0).abs() < 1e-10);
            let pa = photoionization_rate(&h(), i);
            let pb = photoionization_rate(&h(), i * scale);
            prop_assert!((pb / pa / scale - 1.0).abs() < 1e-12);
        }

        #[test]
        fn lorentzian_symmetric_and_monotone(d in 0.0f64..1e9, extra in 0.0f64..1e9) {
            let s = h();
            let plus = two_photon_scatter_rate(&s, 1e5, d).rate;
            let minus = two_photon_scatter_rate(&s, 1e5, -d).rate;
            prop_assert_eq!(plus, minus);
            let further = two_photon_scatter_rate(&s, 1e5, d + extra).rate;
            prop_assert!(further <= plus);
        }

        #[test]
        fn oracle_two_photon_gain_is_unity(n in 1u64..=200) {
            let g = pathway_amplitude_oracle(n, 2).unwrap();
            prop_assert_eq!(g.pathways, n);
            prop_assert!((g.gain - 1.0).abs() < 1e-12);
        }
    }
}
