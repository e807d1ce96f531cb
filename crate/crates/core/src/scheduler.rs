//! Comb coverage planning for atoms with several ground levels.
//!
//! Each required two-photon transition is matched to the nearest tooth of the
//! sum comb `2 carrier + m rep_rate`; the leftover offset has to be supplied
//! by an electro-optic modulator sideband. Drives closer than a merge
//! tolerance are shared. The available intensity is split equally across the
//! levels being pumped.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comb::CombSpectrum;
use crate::scalar::{equal_share, Scalar};
use crate::units::{ATOMIC_MASS_UNIT, BOLTZMANN, PLANCK, SPEED_OF_LIGHT, SPEED_OF_LIGHT_CM};

#[derive(Debug, Error)]
pub enum SchedulerError {
    #[error("invalid level set: {0}")]
    InvalidLevelSet(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("transitions outside the sum-comb span: {}", .offenders.join(", "))]
    Coverage { offenders: Vec<String> },
    #[error("no EOM drive in band for: {}", .transitions.join(", "))]
    Infeasible { transitions: Vec<String> },
    #[error("level file: {0}")]
    Io(#[from] std::io::Error),
    #[error("level file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level<T> {
    pub label: String,
    /// cm⁻¹; `null` until filled in from a level table.
    pub energy: Option<T>,
}

/// Two-photon rate coefficient range, Hz W⁻² cm⁴.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateRange<T> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> Default for RateRange<T> {
    fn default() -> Self {
        Self {
            min: T::lit(1e-5),
            max: T::lit(1e-3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar"))]
pub struct TwoPhotonTransition<T> {
    pub lower: String,
    pub upper: String,
    /// Hz. When absent it is taken from the level energies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<T>,
    #[serde(default)]
    pub rate_coefficient: RateRange<T>,
}

impl<T: Scalar> TwoPhotonTransition<T> {
    pub fn new(lower: &str, upper: &str, frequency: T) -> Self {
        Self {
            lower: lower.into(),
            upper: upper.into(),
            frequency: Some(frequency),
            rate_coefficient: RateRange::default(),
        }
    }

    pub fn label(&self) -> String {
        format!("{}->{}", self.lower, self.upper)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar"))]
pub struct LevelSet<T> {
    pub name: String,
    pub levels: Vec<Level<T>>,
    #[serde(default)]
    pub transitions: Vec<TwoPhotonTransition<T>>,
}

pub const CARBON_GROUND_LOWEST: f64 = -90820.0;
pub const CARBON_GROUND_HIGHEST: f64 = -69172.0;

impl<T: Scalar> LevelSet<T> {
    /// The six ground-configuration levels of carbon, energies relative to the
    /// ionization limit. Only the two endpoints are set; the interior levels
    /// and the transition list are left for the user to fill.
    pub fn carbon_template() -> Self {
        let levels = (1..=6)
            .map(|j| Level {
                label: format!("g{j}"),
                energy: match j {
                    1 => Some(T::lit(CARBON_GROUND_LOWEST)),
                    6 => Some(T::lit(CARBON_GROUND_HIGHEST)),
                    _ => None,
                },
            })
            .collect();
        Self {
            name: "carbon 2s2 2p2".into(),
            levels,
            transitions: Vec::new(),
        }
    }

    pub fn level(&self, label: &str) -> Option<&Level<T>> {
        self.levels.iter().find(|l| l.label == label)
    }

    pub fn validate(&self) -> Result<(), SchedulerError> {
        let bad = |m: String| Err(SchedulerError::InvalidLevelSet(m));
        if self.levels.is_empty() {
            return bad("no levels".into());
        }
        let mut seen = BTreeSet::new();
        for l in &self.levels {
            if !seen.insert(l.label.as_str()) {
                return bad(format!("duplicate level label {:?}", l.label));
            }
            if let Some(e) = l.energy {
                if !e.is_finite() {
                    return bad(format!("level {:?} energy {e} is not finite", l.label));
                }
            }
        }
        for t in &self.transitions {
            for end in [&t.lower, &t.upper] {
                if self.level(end).is_none() {
                    return bad(format!("transition {} refers to unknown level {end:?}", t.label()));
                }
            }
            let RateRange { min, max } = t.rate_coefficient;
            if !(min > T::zero() && max >= min && max.is_finite()) {
                return bad(format!("transition {} rate range [{min}, {max}]", t.label()));
            }
            let f = self.transition_frequency(t)?;
            if !(f > T::zero() && f.is_finite()) {
                return bad(format!("transition {} frequency {f} Hz", t.label()));
            }
        }
        Ok(())
    }

    /// Explicit frequency, or `|E_upper - E_lower| c`.
    pub fn transition_frequency(&self, t: &TwoPhotonTransition<T>) -> Result<T, SchedulerError> {
        if let Some(f) = t.frequency {
            return Ok(f);
        }
        let energy = |label: &str| {
            self.level(label).and_then(|l| l.energy).ok_or_else(|| {
                SchedulerError::InvalidLevelSet(format!(
                    "transition {} has no frequency and level {label:?} has no energy",
                    t.label()
                ))
            })
        };
        let gap = (energy(&t.upper)? - energy(&t.lower)?).abs();
        Ok(gap * T::lit(SPEED_OF_LIGHT_CM))
    }

    pub fn from_json(text: &str) -> Result<Self, SchedulerError> {
        let set: Self = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn to_json(&self) -> Result<String, SchedulerError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SchedulerError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SchedulerError> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombOffset<T> {
    pub transition: String,
    pub frequency: T,
    /// Sum-comb tooth index `m`.
    pub tooth: i64,
    /// `frequency - (2 carrier + m rep_rate)`, in `(-rep_rate/2, rep_rate/2]`.
    pub residual: T,
}

pub fn comb_offsets<T: Scalar>(
    levels: &LevelSet<T>,
    comb: &CombSpectrum<T>,
) -> Result<Vec<CombOffset<T>>, SchedulerError> {
    levels.validate()?;
    let named: Result<Vec<_>, SchedulerError> = levels
        .transitions
        .iter()
        .map(|t| Ok((t.label(), levels.transition_frequency(t)?)))
        .collect();
    frequency_offsets(&named?, comb)
}

/// [`comb_offsets`] for bare `(label, frequency)` pairs.
pub fn frequency_offsets<T: Scalar>(
    transitions: &[(String, T)],
    comb: &CombSpectrum<T>,
) -> Result<Vec<CombOffset<T>>, SchedulerError> {
    let (m_lo, m_hi) = comb.two_photon_sum_range();
    let mut offenders = Vec::new();
    let mut out = Vec::with_capacity(transitions.len());
    for (label, f) in transitions {
        let (tooth, residual) = comb.nearest_two_photon_sum(*f);
        if !f.is_finite() || tooth < m_lo || tooth > m_hi {
            offenders.push(format!("{label} ({f} Hz)"));
            continue;
        }
        out.push(CombOffset {
            transition: label.clone(),
            frequency: *f,
            tooth,
            residual,
        });
    }
    if offenders.is_empty() {
        Ok(out)
    } else {
        Err(SchedulerError::Coverage { offenders })
    }
}

/// Modulation frequencies the EOM can produce, Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EomBand<T> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> EomBand<T> {
    pub fn contains(&self, f: T) -> bool {
        f >= self.min && f <= self.max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sideband {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Assignment<T> {
    /// Residual within the merge tolerance of zero.
    Unmodulated,
    Drive {
        index: usize,
        frequency: T,
        sideband: Sideband,
    },
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry<T> {
    pub transition: String,
    pub tooth: i64,
    pub residual: T,
    pub assignment: Assignment<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EomPlan<T> {
    pub entries: Vec<PlanEntry<T>>,
    /// Distinct modulation frequencies, ascending.
    pub drives: Vec<T>,
    pub band: EomBand<T>,
    pub merge_tolerance: T,
}

impl<T: Scalar> EomPlan<T> {
    pub fn drive_count(&self) -> usize {
        self.drives.len()
    }

    pub fn infeasible(&self) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| e.assignment == Assignment::Infeasible)
            .map(|e| e.transition.clone())
            .collect()
    }

    pub fn is_feasible(&self) -> bool {
        self.infeasible().is_empty()
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<16} {:>8} {:>16} {:>16} {:>8}",
            "transition", "tooth", "residual_Hz", "drive_Hz", "sideband"
        );
        for e in &self.entries {
            let (drive, side) = match e.assignment {
                Assignment::Unmodulated => ("none".to_string(), "-"),
                Assignment::Infeasible => ("INFEASIBLE".to_string(), "-"),
                Assignment::Drive {
                    frequency,
                    sideband,
                    ..
                } => (
                    format!("{:.6e}", frequency.to_f64_lossy()),
                    match sideband {
                        Sideband::Upper => "+",
                        Sideband::Lower => "-",
                    },
                ),
            };
            let _ = writeln!(
                s,
                "{:<16} {:>8} {:>16.6e} {:>16} {:>8}",
                e.transition,
                e.tooth,
                e.residual.to_f64_lossy(),
                drive,
                side
            );
        }
        let _ = writeln!(s, "drives: {}", self.drive_count());
        s
    }
}

/// Builds a drive plan, marking transitions that cannot be served as
/// [`Assignment::Infeasible`] instead of failing.
///
/// In-band offsets are sorted by magnitude and swept greedily: a drive
/// collects every offset within `merge_tolerance` of the smallest unassigned
/// one and sits at the midpoint of that group. Offsets outside the band reuse
/// the nearest drive if it is within tolerance.
pub fn plan_eom<T: Scalar>(
    offsets: &[CombOffset<T>],
    band: EomBand<T>,
    merge_tolerance: T,
) -> Result<EomPlan<T>, SchedulerError> {
    if !(band.min >= T::zero() && band.max >= band.min && band.max.is_finite()) {
        return Err(SchedulerError::InvalidInput(format!(
            "EOM band [{}, {}]",
            band.min, band.max
        )));
    }
    if !(merge_tolerance >= T::zero() && merge_tolerance.is_finite()) {
        return Err(SchedulerError::InvalidInput(format!(
            "merge tolerance {merge_tolerance}"
        )));
    }
    let magnitude: Vec<T> = offsets.iter().map(|o| o.residual.abs()).collect();
    let mut in_band: Vec<usize> = (0..offsets.len())
        .filter(|&j| magnitude[j] > merge_tolerance && band.contains(magnitude[j]))
        .collect();
    in_band.sort_by(|&a, &b| magnitude[a].total_cmp_lossy(&magnitude[b]));

    let mut drives: Vec<T> = Vec::new();
    let mut drive_of = vec![None; offsets.len()];
    let mut j = 0;
    while j < in_band.len() {
        let start = magnitude[in_band[j]];
        let mut end = j;
        while end + 1 < in_band.len() && magnitude[in_band[end + 1]] - start <= merge_tolerance {
            end += 1;
        }
        let last = magnitude[in_band[end]];
        drives.push(start + (last - start) / T::lit(2.0));
        for &member in &in_band[j..=end] {
            drive_of[member] = Some(drives.len() - 1);
        }
        j = end + 1;
    }

    let entries = offsets
        .iter()
        .enumerate()
        .map(|(j, o)| {
            let assignment = if magnitude[j] <= merge_tolerance {
                Assignment::Unmodulated
            } else {
                let index = drive_of[j].or_else(|| {
                    nearest(&drives, magnitude[j]).filter(|&d| (drives[d] - magnitude[j]).abs() <= merge_tolerance)
                });
                match index {
                    Some(index) => Assignment::Drive {
                        index,
                        frequency: drives[index],
                        sideband: if o.residual > T::zero() {
                            Sideband::Upper
                        } else {
                            Sideband::Lower
                        },
                    },
                    None => Assignment::Infeasible,
                }
            };
            PlanEntry {
                transition: o.transition.clone(),
                tooth: o.tooth,
                residual: o.residual,
                assignment,
            }
        })
        .collect();
    Ok(EomPlan {
        entries,
        drives,
        band,
        merge_tolerance,
    })
}

/// Like [`plan_eom`] but any unserved transition is an error.
pub fn eom_plan<T: Scalar>(
    offsets: &[CombOffset<T>],
    band: EomBand<T>,
    merge_tolerance: T,
) -> Result<EomPlan<T>, SchedulerError> {
    let plan = plan_eom(offsets, band, merge_tolerance)?;
    let transitions = plan.infeasible();
    if transitions.is_empty() {
        Ok(plan)
    } else {
        Err(SchedulerError::Infeasible { transitions })
    }
}

fn nearest<T: Scalar>(sorted: &[T], x: T) -> Option<usize> {
    (0..sorted.len()).min_by(|&a, &b| (sorted[a] - x).abs().total_cmp_lossy(&(sorted[b] - x).abs()))
}

trait TotalCmpLossy {
    fn total_cmp_lossy(&self, other: &Self) -> std::cmp::Ordering;
}

impl<T: Scalar> TotalCmpLossy for T {
    fn total_cmp_lossy(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Equal split of `total` over `n` transitions.
pub fn per_transition_power<N>(total: N, n: usize) -> Result<N, SchedulerError>
where
    N: num_traits::Num + num_traits::FromPrimitive + Copy,
{
    if n == 0 {
        return Err(SchedulerError::InvalidInput("zero transitions".into()));
    }
    Ok(equal_share(total, n))
}

/// Split of `total` proportional to `weights`.
pub fn weighted_power<T: Scalar>(total: T, weights: &[T]) -> Result<Vec<T>, SchedulerError> {
    let sum: T = weights.iter().copied().sum();
    if weights.iter().any(|w| !(*w >= T::zero())) || !(sum > T::zero()) {
        return Err(SchedulerError::InvalidInput(
            "weights must be non-negative with a positive sum".into(),
        ));
    }
    Ok(weights.iter().map(|w| total * *w / sum).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Scalar"))]
pub struct FeasibilityParams<T> {
    /// kg
    pub mass: T,
    /// Per-photon wavelength used for the recoil when no transition is listed, m.
    pub laser_wavelength: T,
    /// K
    pub initial_temperature: T,
    /// K
    pub target_temperature: T,
    /// s
    pub max_time: T,
    /// Photoionization rate while cooling, Hz.
    pub photoionization_rate: T,
    /// Smallest acceptable surviving fraction.
    pub min_survival: T,
}

impl<T: Scalar> Default for FeasibilityParams<T> {
    fn default() -> Self {
        Self {
            mass: T::lit(12.0 * ATOMIC_MASS_UNIT),
            laser_wavelength: T::lit(250e-9),
            initial_temperature: T::lit(5.0),
            target_temperature: T::lit(5e-3),
            max_time: T::lit(1.0),
            photoionization_rate: T::zero(),
            min_survival: T::lit(0.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionBudget<T> {
    pub transition: String,
    /// W/cm²
    pub intensity: T,
    /// Hz, at the low and high rate coefficients.
    pub rate_min: T,
    pub rate_max: T,
    /// m/s per scatter
    pub recoil: T,
    pub scatters_needed: u64,
    /// s, at the high and low rates.
    pub cooling_time_min: T,
    pub cooling_time_max: T,
    pub survival: T,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport<T> {
    pub total_intensity: T,
    pub per_transition_intensity: T,
    pub transitions: Vec<TransitionBudget<T>>,
    /// Present when some transition lies outside the comb.
    pub coverage_error: Option<String>,
    pub feasible: bool,
}

/// Rate-band feasibility. The intensity is split over the ground levels
/// (six for carbon); each transition scatters at `c2 (I_total/n)^2` for `c2`
/// across its coefficient range. With no transitions listed the default range
/// and `laser_wavelength` stand in for a generic one.
pub fn carbon_feasibility<T: Scalar>(
    levels: &LevelSet<T>,
    comb: &CombSpectrum<T>,
    total_intensity: T,
    params: &FeasibilityParams<T>,
) -> Result<FeasibilityReport<T>, SchedulerError> {
    levels.validate()?;
    if !(total_intensity >= T::zero() && total_intensity.is_finite()) {
        return Err(SchedulerError::InvalidInput(format!(
            "total intensity {total_intensity}"
        )));
    }
    let per = per_transition_power(total_intensity, levels.levels.len())?;
    let coverage_error = match comb_offsets(levels, comb) {
        Ok(_) => None,
        Err(e @ SchedulerError::Coverage { .. }) => Some(e.to_string()),
        Err(e) => return Err(e),
    };

    let mut lines: Vec<(String, RateRange<T>, T)> = Vec::new();
    for t in &levels.transitions {
        let f = levels.transition_frequency(t)?;
        lines.push((t.label(), t.rate_coefficient, f));
    }
    if lines.is_empty() {
        let f = T::lit(2.0 * SPEED_OF_LIGHT) / params.laser_wavelength;
        lines.push(("generic".into(), RateRange::default(), f));
    }

    let v_rms = |temp: T| (T::lit(3.0 * BOLTZMANN) * temp / params.mass).sqrt();
    let speed_drop = (v_rms(params.initial_temperature) - v_rms(params.target_temperature)).max(T::zero());
    let transitions: Vec<TransitionBudget<T>> = lines
        .into_iter()
        .map(|(transition, range, f)| {
            let recoil = T::lit(PLANCK) * f / (params.mass * T::lit(SPEED_OF_LIGHT));
            let scatters_needed = (speed_drop / recoil).ceil().to_u64().unwrap_or(u64::MAX);
            let n = T::from_u64(scatters_needed).unwrap();
            let rate_min = range.min * per * per;
            let rate_max = range.max * per * per;
            let time = |r: T| if r > T::zero() { n / r } else { T::infinity() };
            let cooling_time_max = time(rate_min);
            let survival = if cooling_time_max.is_finite() {
                (-params.photoionization_rate * cooling_time_max).exp()
            } else {
                T::zero()
            };
            let feasible = rate_min > T::zero()
                && cooling_time_max <= params.max_time
                && survival >= params.min_survival;
            TransitionBudget {
                transition,
                intensity: per,
                rate_min,
                rate_max,
                recoil,
                scatters_needed,
                cooling_time_min: time(rate_max),
                cooling_time_max,
                survival,
                feasible,
            }
        })
        .collect();
    let feasible = coverage_error.is_none() && transitions.iter().all(|t| t.feasible);
    Ok(FeasibilityReport {
        total_intensity,
        per_transition_intensity: per,
        transitions,
        coverage_error,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn offset(label: &str, residual: f64) -> CombOffset<f64> {
        CombOffset {
            transition: label.into(),
            frequency: 1e15 + residual,
            tooth: 0,
            residual,
        }
    }

    const BAND: EomBand<f64> = EomBand { min: 1e6, max: 1e9 };

    #[test]
    fn carbon_template_spans_quoted_range() {
        let set = LevelSet::<f64>::carbon_template();
        assert_eq!(set.levels.len(), 6);
        assert_eq!(set.levels[0].energy, Some(-90820.0));
        assert_eq!(set.levels[5].energy, Some(-69172.0));
        assert!(set.levels[1..5].iter().all(|l| l.energy.is_none()));
        set.validate().unwrap();
    }

    #[test]
    fn shipped_level_file_matches_template() {
        let text = include_str!("../data/carbon_levels.json");
        assert_eq!(LevelSet::<f64>::from_json(text).unwrap(), LevelSet::carbon_template());
    }

    #[test]
    fn frequency_from_energies() {
        let mut set = LevelSet::<f64>::carbon_template();
        set.transitions.push(TwoPhotonTransition {
            lower: "g1".into(),
            upper: "g6".into(),
            frequency: None,
            rate_coefficient: RateRange::default(),
        });
        let f = set.transition_frequency(&set.transitions[0]).unwrap();
        assert!((f / 6.489_907_130_784e14 - 1.0).abs() < 1e-12);
        set.transitions[0].lower = "g2".into();
        assert!(set.validate().is_err());
        set.transitions[0].lower = "nope".into();
        assert!(set.validate().is_err());
    }

    #[test]
    fn zero_residuals_need_no_drive() {
        let offs: Vec<_> = (0..4).map(|j| offset(&format!("t{j}"), 0.0)).collect();
        let plan = eom_plan(&offs, BAND, 0.0).unwrap();
        assert_eq!(plan.drive_count(), 0);
        assert!(plan.entries.iter().all(|e| e.assignment == Assignment::Unmodulated));
    }

    #[test]
    fn tolerance_separates_and_merges() {
        let plan = eom_plan(&[offset("a", 100e6), offset("b", 100.01e6)], BAND, 1e3).unwrap();
        assert_eq!(plan.drive_count(), 2);
        let plan = eom_plan(&[offset("a", 100e6), offset("b", 100.0001e6)], BAND, 1e3).unwrap();
        assert_eq!(plan.drive_count(), 1);
        assert_eq!(plan.drives[0], 100.00005e6);
    }

    #[test]
    fn sideband_follows_sign() {
        let plan = eom_plan(&[offset("a", 2e8), offset("b", -2e8)], BAND, 0.0).unwrap();
        assert_eq!(plan.drive_count(), 1);
        let sides: Vec<_> = plan
            .entries
            .iter()
            .map(|e| match e.assignment {
                Assignment::Drive { sideband, .. } => sideband,
                _ => panic!(),
            })
            .collect();
        assert_eq!(sides, [Sideband::Upper, Sideband::Lower]);
    }

    #[test]
    fn out_of_band_is_flagged_or_merged() {
        let offs = [offset("low", 5e5)];
        let plan = plan_eom(&offs, BAND, 1e3).unwrap();
        assert_eq!(plan.infeasible(), ["low"]);
        assert!(matches!(
            eom_plan(&offs, BAND, 1e3),
            Err(SchedulerError::Infeasible { .. })
        ));
        // just below the band edge but within tolerance of an in-band drive
        let plan = eom_plan(&[offset("a", 1.0e6), offset("b", 0.9995e6)], BAND, 1e3).unwrap();
        assert_eq!(plan.drive_count(), 1);
        // small residual within tolerance of zero
        let plan = eom_plan(&[offset("z", 500.0)], BAND, 1e3).unwrap();
        assert_eq!(plan.entries[0].assignment, Assignment::Unmodulated);
    }

    #[test]
    fn comb_offsets_reports_offenders() {
        let comb = CombSpectrum::with_line_count(5e14, 1e9, 0.1, 1.0, 11).unwrap();
        let mut set = LevelSet::<f64>::carbon_template();
        set.transitions.push(TwoPhotonTransition::new("g1", "g2", 1e15 + 0.3e9));
        set.transitions.push(TwoPhotonTransition::new("g2", "g3", 1e15 + 50e9));
        match comb_offsets(&set, &comb) {
            Err(SchedulerError::Coverage { offenders }) => {
                assert_eq!(offenders.len(), 1);
                assert!(offenders[0].starts_with("g2->g3"));
            }
            other => panic!("{other:?}"),
        }
        set.transitions.pop();
        let offs = comb_offsets(&set, &comb).unwrap();
        assert_eq!(offs[0].tooth, 0);
        assert!((offs[0].residual - 0.3e9).abs() < 1.0);
    }

    #[test]
    fn power_split() {
        assert_eq!(per_transition_power(60e3, 6).unwrap(), 10e3);
        assert_eq!(per_transition_power(7.5, 1).unwrap(), 7.5);
        assert_eq!(per_transition_power(0.0, 2).unwrap(), 0.0);
        assert!(per_transition_power(1.0, 0).is_err());
        assert_eq!(per_transition_power(60_000u64, 6).unwrap(), 10_000);
        let w = weighted_power(10.0, &[1.0, 3.0]).unwrap();
        assert_eq!(w, [2.5, 7.5]);
        assert!(weighted_power(10.0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn carbon_band() {
        let comb = CombSpectrum::new(6e14, 1e9, 0.01, 1.0).unwrap();
        let set = LevelSet::<f64>::carbon_template();
        let r = carbon_feasibility(&set, &comb, 60e3, &FeasibilityParams::default()).unwrap();
        assert_eq!(r.per_transition_intensity, 10e3);
        let t = &r.transitions[0];
        assert!((t.rate_max - 1e5).abs() < 1e-9 * 1e5);
        assert!((t.rate_min - 1e3).abs() < 1e-9 * 1e3);
        assert!((t.rate_max / t.rate_min - 100.0).abs() < 1e-9);
        assert!(t.recoil > 0.2 && t.recoil < 0.35, "{}", t.recoil);
        assert!(r.feasible);

        let r = carbon_feasibility(&set, &comb, 0.0, &FeasibilityParams::default()).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.transitions[0].rate_min, 0.0);
    }
}
