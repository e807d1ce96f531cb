//! Intensity search for the cooling/photoionization trade-off.
//!
//! Low intensity scatters too slowly to cool within the time limit; high
//! intensity ionizes the atoms. The search scans a log-spaced intensity grid,
//! then refines around the best grid point by golden-section search in
//! `ln I` to 1% relative width. Evaluations are deterministic (the Monte
//! Carlo evaluator reuses one seed), so the search is too.

use serde::{Deserialize, Serialize};

use crate::excitation::{clamped_scatter_rate, ionization_probability_per_scatter};
use crate::scalar::Scalar;
use crate::species::SpeciesParams;

use super::mc::run_mc;
use super::scenario::CoolingScenario;
use super::SimError;

/// What one intensity achieves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityOutcome<T> {
    /// Fraction of surviving atoms that count as cooled.
    pub cooled: T,
    pub survival: T,
    /// Mean scatter rate per atom, Hz.
    pub cooling_speed: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `cooled * survival`: the fraction of all atoms cooled and alive.
    CooledAndSurviving,
    SurvivalOnly,
    CoolingSpeedOnly,
}

impl Objective {
    pub fn score<T: Scalar>(self, o: &IntensityOutcome<T>) -> T {
        match self {
            Objective::CooledAndSurviving => o.cooled * o.survival,
            Objective::SurvivalOnly => o.survival,
            Objective::CoolingSpeedOnly => o.cooling_speed,
        }
    }
}

pub trait IntensityEvaluator<T> {
    fn evaluate(&self, intensity: T) -> Result<IntensityOutcome<T>, SimError>;
}

/// Closed-form scatter budget: an atom is cooled once it has scattered
/// `budget` times, the scatter count in `max_time` is Poisson with mean
/// `R(I) max_time`, and surviving `budget` scatters has probability
/// `exp(-budget p_ion(I))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseBudget<T> {
    pub species: SpeciesParams<T>,
    pub detuning: T,
    pub max_time: T,
    pub budget: u32,
    /// Beams illuminating the atom (each at the searched intensity).
    pub beams: u32,
}

impl<T: Scalar> ImpulseBudget<T> {
    pub fn from_scenario(scenario: &CoolingScenario<T>, budget: u32) -> Result<Self, SimError> {
        let max_time = scenario.max_time.ok_or_else(|| {
            SimError::InvalidScenario("impulse budget needs a max_time".into())
        })?;
        Ok(Self {
            species: scenario.species.clone(),
            detuning: scenario.detuning,
            max_time,
            budget,
            beams: scenario.beam_directions().len() as u32,
        })
    }
}

/// `P[X >= k]` for `X ~ Poisson(mean)`.
pub(crate) fn poisson_at_least(mean: f64, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean <= 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut log_term = -mean;
    let mut below = 0.0;
    for j in 0..k {
        if j > 0 {
            log_term += ln_mean - (j as f64).ln();
        }
        below += log_term.exp();
    }
    (1.0 - below).clamp(0.0, 1.0)
}

impl<T: Scalar> IntensityEvaluator<T> for ImpulseBudget<T> {
    fn evaluate(&self, intensity: T) -> Result<IntensityOutcome<T>, SimError> {
        let beams = T::from_u32(self.beams).unwrap();
        let rate = beams * clamped_scatter_rate(&self.species, intensity, self.detuning);
        let mean = (rate * self.max_time).to_f64_lossy();
        let p = ionization_probability_per_scatter(&self.species, intensity * beams);
        Ok(IntensityOutcome {
            cooled: T::lit(poisson_at_least(mean, self.budget)),
            survival: (-p * T::from_u32(self.budget).unwrap()).exp(),
            cooling_speed: rate,
        })
    }
}

/// Runs the full Monte Carlo at each trial intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEvaluator<T> {
    pub scenario: CoolingScenario<T>,
}

impl<T: Scalar> IntensityEvaluator<T> for MonteCarloEvaluator<T> {
    fn evaluate(&self, intensity: T) -> Result<IntensityOutcome<T>, SimError> {
        let mut s = self.scenario.clone();
        s.intensity_per_beam = intensity;
        let r = run_mc(&s)?;
        let cooled_all = r.cooled_fraction.unwrap_or_else(T::zero);
        let cooled = if r.survival_fraction > T::zero() {
            cooled_all / r.survival_fraction
        } else {
            T::zero()
        };
        let speed = if r.end_time > T::zero() {
            r.mean_scatters / r.end_time
        } else {
            T::zero()
        };
        Ok(IntensityOutcome {
            cooled,
            survival: r.survival_fraction,
            cooling_speed: speed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds<T> {
    /// W/cm²
    pub min: T,
    pub max: T,
    pub grid_points: usize,
    /// Relative width of the final bracket.
    pub relative_tolerance: T,
}

impl<T: Scalar> SearchBounds<T> {
    pub fn new(min: T, max: T) -> Self {
        Self {
            min,
            max,
            grid_points: 25,
            relative_tolerance: T::lit(0.01),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult<T> {
    pub intensity: T,
    pub objective: T,
    pub outcome: IntensityOutcome<T>,
    /// Set when the best value sits on a search bound (optimum not bracketed).
    pub boundary: Option<Boundary>,
    pub lower_end: IntensityOutcome<T>,
    pub upper_end: IntensityOutcome<T>,
    /// Low end cools less and high end survives less than the optimum.
    pub tradeoff_verified: bool,
    pub evaluations: usize,
}

/// Searches with the Monte Carlo evaluator on `scenario`.
pub fn optimize_intensity<T: Scalar>(
    scenario: &CoolingScenario<T>,
    objective: Objective,
    bounds: &SearchBounds<T>,
) -> Result<OptimizeResult<T>, SimError> {
    let eval = MonteCarloEvaluator {
        scenario: scenario.clone(),
    };
    optimize_with(&eval, objective, bounds)
}

pub fn optimize_with<T: Scalar, E: IntensityEvaluator<T>>(
    eval: &E,
    objective: Objective,
    bounds: &SearchBounds<T>,
) -> Result<OptimizeResult<T>, SimError> {
    if !(bounds.min > T::zero() && bounds.max > bounds.min && bounds.max.is_finite()) {
        return Err(SimError::InvalidBounds(format!(
            "need 0 < min < max, got [{}, {}]",
            bounds.min, bounds.max
        )));
    }
    if bounds.grid_points < 3 || !(bounds.relative_tolerance > T::zero()) {
        return Err(SimError::InvalidBounds(
            "need at least 3 grid points and a positive tolerance".into(),
        ));
    }
    let mut evaluations = 0usize;
    let mut probe = |ln_i: T| -> Result<(T, IntensityOutcome<T>), SimError> {
        evaluations += 1;
        let o = eval.evaluate(ln_i.exp())?;
        Ok((objective.score(&o), o))
    };

    let (lo, hi) = (bounds.min.ln(), bounds.max.ln());
    let last = bounds.grid_points - 1;
    let xs: Vec<T> = (0..=last)
        .map(|j| lo + (hi - lo) * T::from_usize(j).unwrap() / T::from_usize(last).unwrap())
        .collect();
    let mut scan = Vec::with_capacity(xs.len());
    for &x in &xs {
        scan.push(probe(x)?);
    }
    let best = scan
        .iter()
        .enumerate()
        .fold(0, |b, (j, (f, _))| if *f > scan[b].0 { j } else { b });
    let lower_end = scan[0].1;
    let upper_end = scan[last].1;

    let boundary = match best {
        0 => Some(Boundary::Lower),
        j if j == last => Some(Boundary::Upper),
        _ => None,
    };
    let (x_best, f_best, o_best) = if boundary.is_some() {
        (xs[best], scan[best].0, scan[best].1)
    } else {
        golden_section(&mut probe, xs[best - 1], xs[best + 1], (xs[best], scan[best]), bounds)?
    };
    let tradeoff_verified = lower_end.cooled < o_best.cooled && upper_end.survival < o_best.survival;
    let intensity = match boundary {
        Some(Boundary::Lower) => bounds.min,
        Some(Boundary::Upper) => bounds.max,
        None => x_best.exp(),
    };
    Ok(OptimizeResult {
        intensity,
        objective: f_best,
        outcome: o_best,
        boundary,
        lower_end,
        upper_end,
        tradeoff_verified,
        evaluations,
    })
}

type Probe<'a, T> = dyn FnMut(T) -> Result<(T, IntensityOutcome<T>), SimError> + 'a;

fn golden_section<T: Scalar>(
    probe: &mut Probe<'_, T>,
    mut a: T,
    mut b: T,
    seed: (T, (T, IntensityOutcome<T>)),
    bounds: &SearchBounds<T>,
) -> Result<(T, T, IntensityOutcome<T>), SimError> {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let width_goal = (T::one() + bounds.relative_tolerance).ln();
    let mut best = (seed.0, seed.1 .0, seed.1 .1);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut oc) = probe(c)?;
    let (mut fd, mut od) = probe(d)?;
    while b - a > width_goal {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            od = oc;
            c = b - inv_phi * (b - a);
            (fc, oc) = probe(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            oc = od;
            d = a + inv_phi * (b - a);
            (fd, od) = probe(d)?;
        }
        for (x, f, o) in [(c, fc, oc), (d, fd, od)] {
            if f > best.1 {
                best = (x, f, o);
            }
        }
    }
    Ok(best)
}
