//! Monte Carlo evolution of an atomic ensemble.
//!
//! Each atom is simulated independently on its own counter-based random
//! stream. Between scatter events the velocity is constant and so are the
//! beam rates, which makes the event-driven mode exact. Reductions run over
//! fixed-size chunks merged in index order, so results do not depend on the
//! number of worker threads.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::excitation::{clamped_scatter_rate, two_photon_scatter_rate};
use crate::scalar::Scalar;
use crate::species::SpeciesParams;

use super::report::{EnsembleReport, Moments, SeriesSample};
use super::rng::{atom_stream, StreamPurpose};
use super::scenario::{thermal_sigma, CoolingScenario, Stepping, MAX_STEP_EVENT_PROBABILITY};
use super::SimError;

const CHUNK: usize = 256;
const MAX_BEAMS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomStatus {
    Alive,
    Ionized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomState<T> {
    pub velocity: [T; 3],
    pub status: AtomStatus,
    pub scatter_count: u32,
}

impl<T: Scalar> AtomState<T> {
    pub fn new(velocity: [T; 3]) -> Self {
        Self {
            velocity,
            status: AtomStatus::Alive,
            scatter_count: 0,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.status == AtomStatus::Alive
    }

    pub fn speed(&self) -> T {
        norm(&self.velocity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomEnsemble<T> {
    pub seed: u64,
    pub atoms: Vec<AtomState<T>>,
}

impl<T: Scalar> AtomEnsemble<T> {
    pub fn alive(&self) -> usize {
        self.atoms.iter().filter(|a| a.is_alive()).count()
    }

    pub fn ionized(&self) -> usize {
        self.atoms.len() - self.alive()
    }
}

fn norm<T: Scalar>(v: &[T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Draws one Maxwell–Boltzmann velocity: each component normal with
/// variance `k_B T / m`.
pub fn sample_maxwell_boltzmann<T: Scalar, R: Rng + ?Sized>(
    species: &SpeciesParams<T>,
    temperature: T,
    rng: &mut R,
) -> [T; 3] {
    let sigma = thermal_sigma(species, temperature.max(T::zero()));
    let mut v = [T::zero(); 3];
    for c in &mut v {
        let z: f64 = StandardNormal.sample(rng);
        *c = sigma * T::lit(z);
    }
    v
}

/// Initial velocity of atom `index`; a pure function of `(seed, index)`.
pub fn initial_velocity<T: Scalar>(scenario: &CoolingScenario<T>, index: usize) -> [T; 3] {
    let mut rng = atom_stream(scenario.seed, StreamPurpose::InitialVelocity, index as u64);
    sample_maxwell_boltzmann(&scenario.species, scenario.initial_temperature, &mut rng)
}

/// Thermal ensemble at the scenario's initial temperature.
pub fn sample_initial_ensemble<T: Scalar>(scenario: &CoolingScenario<T>) -> AtomEnsemble<T> {
    let atoms = (0..scenario.n_atoms)
        .into_par_iter()
        .map(|i| AtomState::new(initial_velocity(scenario, i)))
        .collect();
    AtomEnsemble {
        seed: scenario.seed,
        atoms,
    }
}

/// Precomputed per-scenario constants for the inner loop.
pub(crate) struct Dynamics<'a, T> {
    species: &'a SpeciesParams<T>,
    directions: Vec<[T; 3]>,
    intensity: T,
    detuning: T,
    /// Multiphoton Doppler shift per unit velocity along a beam, Hz / (m/s).
    doppler_per_velocity: T,
    recoil: T,
    emission_recoil: T,
    ionization_probability: T,
}

impl<'a, T: Scalar> Dynamics<'a, T> {
    pub fn new(scenario: &'a CoolingScenario<T>) -> Self {
        let s = &scenario.species;
        Self {
            species: s,
            directions: scenario.beam_directions(),
            intensity: scenario.intensity_per_beam,
            detuning: scenario.detuning,
            doppler_per_velocity: T::from_u32(s.photon_order).unwrap() / s.cooling_wavelength,
            recoil: s.recoil_velocity,
            emission_recoil: s.emission_recoil(),
            ionization_probability: scenario.ionization_probability(),
        }
    }

    /// Per-beam rates into `out`; returns their sum.
    pub fn rates(&self, v: &[T; 3], out: &mut [T; MAX_BEAMS]) -> T {
        let mut total = T::zero();
        for (b, d) in self.directions.iter().enumerate() {
            // Atom moving against the beam sees the light blue shifted.
            let seen = self.detuning - self.doppler_per_velocity * dot(v, d);
            let r = clamped_scatter_rate(self.species, self.intensity, seen);
            out[b] = r;
            total += r;
        }
        total
    }

    fn pick_beam(&self, rates: &[T; MAX_BEAMS], total: T, u: T) -> usize {
        let target = u * total;
        let mut acc = T::zero();
        for b in 0..self.directions.len() {
            acc += rates[b];
            if target < acc {
                return b;
            }
        }
        self.directions.len() - 1
    }

    /// Absorption along beam `b`, isotropic spontaneous emission, then the
    /// ionization draw.
    pub fn scatter<R: Rng + ?Sized>(&self, atom: &mut AtomState<T>, b: usize, rng: &mut R) {
        let d = &self.directions[b];
        let n: [f64; 3] = UnitSphere.sample(rng);
        for a in 0..3 {
            atom.velocity[a] += self.recoil * d[a] + self.emission_recoil * T::lit(n[a]);
        }
        atom.scatter_count += 1;
        if T::lit(rng.random::<f64>()) < self.ionization_probability {
            atom.status = AtomStatus::Ionized;
        }
    }
}

/// Advances one alive atom by a fixed step `dt`. At most one scatter happens,
/// with probability `1 - exp(-R dt)`; `R dt` must stay below 0.1.
pub fn step_atom<T: Scalar, R: Rng + ?Sized>(
    atom: &AtomState<T>,
    scenario: &CoolingScenario<T>,
    dt: T,
    rng: &mut R,
) -> Result<AtomState<T>, SimError> {
    let dynamics = Dynamics::new(scenario);
    step_with(&dynamics, atom, dt, rng)
}

fn step_with<T: Scalar, R: Rng + ?Sized>(
    dynamics: &Dynamics<'_, T>,
    atom: &AtomState<T>,
    dt: T,
    rng: &mut R,
) -> Result<AtomState<T>, SimError> {
    let mut next = *atom;
    if !atom.is_alive() {
        return Ok(next);
    }
    let mut rates = [T::zero(); MAX_BEAMS];
    let total = dynamics.rates(&atom.velocity, &mut rates);
    let expected = total * dt;
    if !(expected < T::lit(MAX_STEP_EVENT_PROBABILITY)) {
        return Err(SimError::StepTooLarge {
            event_probability: expected.to_f64_lossy(),
        });
    }
    let p_event = -(-expected).exp_m1();
    let u = T::lit(rng.random::<f64>());
    if u < p_event {
        let b = dynamics.pick_beam(&rates, total, u / p_event);
        dynamics.scatter(&mut next, b, rng);
    }
    Ok(next)
}

struct Limits<T> {
    max_time: T,
    max_scatters: u32,
}

/// Runs one atom to completion, calling `on_sample(j, state)` for every
/// sample time. Returns the final state and the time it was reached.
fn evolve_atom<T: Scalar, R: Rng + ?Sized>(
    dynamics: &Dynamics<'_, T>,
    stepping: Stepping<T>,
    limits: &Limits<T>,
    mut atom: AtomState<T>,
    rng: &mut R,
    sample_times: &[T],
    mut on_sample: impl FnMut(usize, &AtomState<T>),
) -> (AtomState<T>, T) {
    let mut rates = [T::zero(); MAX_BEAMS];
    let mut t = T::zero();
    let mut next_sample = 0usize;
    let finished = |a: &AtomState<T>| !a.is_alive() || a.scatter_count >= limits.max_scatters;
    match stepping {
        Stepping::EventDriven => loop {
            let total = if finished(&atom) {
                T::zero()
            } else {
                dynamics.rates(&atom.velocity, &mut rates)
            };
            let t_next = if total > T::zero() {
                let wait: f64 = Exp::new(total.to_f64_lossy()).unwrap().sample(rng);
                t + T::lit(wait)
            } else {
                T::infinity()
            };
            while next_sample < sample_times.len() && sample_times[next_sample] < t_next {
                on_sample(next_sample, &atom);
                next_sample += 1;
            }
            if t_next.is_infinite() || t_next > limits.max_time {
                let end = if limits.max_time.is_finite() { limits.max_time } else { t };
                return (atom, end);
            }
            t = t_next;
            let u = T::lit(rng.random::<f64>());
            let b = dynamics.pick_beam(&rates, total, u);
            dynamics.scatter(&mut atom, b, rng);
        },
        Stepping::Adaptive {
            max_event_probability,
        } => loop {
            while next_sample < sample_times.len() && sample_times[next_sample] <= t {
                on_sample(next_sample, &atom);
                next_sample += 1;
            }
            let total = if finished(&atom) {
                T::zero()
            } else {
                dynamics.rates(&atom.velocity, &mut rates)
            };
            if total == T::zero() || t >= limits.max_time {
                for j in next_sample..sample_times.len() {
                    on_sample(j, &atom);
                }
                let end = if limits.max_time.is_finite() { limits.max_time } else { t };
                return (atom, end);
            }
            let boundary = sample_times
                .get(next_sample)
                .copied()
                .unwrap_or(limits.max_time)
                .min(limits.max_time);
            let mut dt = max_event_probability / total;
            let clipped = t + dt >= boundary;
            if clipped {
                dt = boundary - t;
            }
            let p_event = -(-(total * dt)).exp_m1();
            let u = T::lit(rng.random::<f64>());
            if u < p_event {
                let b = dynamics.pick_beam(&rates, total, u / p_event);
                dynamics.scatter(&mut atom, b, rng);
            }
            t = if clipped { boundary } else { t + dt };
        },
    }
}

struct ChunkTally<T> {
    samples: Vec<Moments<T>>,
    last: Moments<T>,
    alive: usize,
    ionized: usize,
    cooled: usize,
    capturable: usize,
    histogram: Vec<u64>,
    end_time: T,
}

impl<T: Scalar> ChunkTally<T> {
    fn new(n_samples: usize) -> Self {
        Self {
            samples: vec![Moments::new(); n_samples],
            last: Moments::new(),
            alive: 0,
            ionized: 0,
            cooled: 0,
            capturable: 0,
            histogram: Vec::new(),
            end_time: T::zero(),
        }
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            a.merge(b);
        }
        self.last.merge(&other.last);
        self.alive += other.alive;
        self.ionized += other.ionized;
        self.cooled += other.cooled;
        self.capturable += other.capturable;
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        self.end_time = self.end_time.max(other.end_time);
    }
}

/// Evolves the whole ensemble and summarises it.
pub fn run_mc<T: Scalar>(scenario: &CoolingScenario<T>) -> Result<EnsembleReport<T>, SimError> {
    scenario.validate()?;
    let dynamics = Dynamics::new(scenario);
    let times = scenario.sample_times();
    let limits = Limits {
        max_time: scenario.max_time.unwrap_or_else(T::infinity),
        max_scatters: scenario.max_scatters.unwrap_or(u32::MAX),
    };
    let cooled_speed = scenario.cooled_speed_threshold();
    let capture_speed = scenario.capture_speed();
    let n = scenario.n_atoms;

    let tallies: Vec<ChunkTally<T>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut tally = ChunkTally::new(times.len());
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let v0 = initial_velocity(scenario, i);
                let mut rng = atom_stream(scenario.seed, StreamPurpose::Dynamics, i as u64);
                let samples = &mut tally.samples;
                let (fin, end) = evolve_atom(
                    &dynamics,
                    scenario.stepping,
                    &limits,
                    AtomState::new(v0),
                    &mut rng,
                    &times,
                    |j, a| {
                        if a.is_alive() {
                            samples[j].add(&a.velocity, a.scatter_count);
                        }
                    },
                );
                if fin.is_alive() {
                    tally.alive += 1;
                    tally.last.add(&fin.velocity, fin.scatter_count);
                    if fin.speed() <= cooled_speed {
                        tally.cooled += 1;
                    }
                } else {
                    tally.ionized += 1;
                }
                if norm(&v0) <= capture_speed {
                    tally.capturable += 1;
                }
                let bin = fin.scatter_count as usize;
                if tally.histogram.len() <= bin {
                    tally.histogram.resize(bin + 1, 0);
                }
                tally.histogram[bin] += 1;
                tally.end_time = tally.end_time.max(end);
            }
            tally
        })
        .collect();

    let mut total = ChunkTally::new(times.len());
    for t in &tallies {
        total.merge(t);
    }

    let s = &scenario.species;
    let n_t = T::from_usize(n).unwrap();
    let mut series: Vec<SeriesSample<T>> = times
        .iter()
        .zip(&total.samples)
        .map(|(&time, m)| SeriesSample {
            time,
            temperature: m.temperature(s),
            survival: T::from_u64(m.count).unwrap() / n_t,
            mean_scatters: m.mean_scatters(),
        })
        .collect();
    if scenario.max_time.is_none() {
        series.push(SeriesSample {
            time: total.end_time,
            temperature: total.last.temperature(s),
            survival: T::from_usize(total.alive).unwrap() / n_t,
            mean_scatters: total.last.mean_scatters(),
        });
    }

    Ok(EnsembleReport {
        n_atoms: n,
        alive: total.alive,
        ionized: total.ionized,
        survival_fraction: T::from_usize(total.alive).unwrap() / n_t,
        temperature: total.last.temperature(s),
        temperature_stderr: total.last.temperature_stderr(s),
        mean_velocity: total.last.mean(),
        mean_kinetic_energy: total.last.mean_kinetic_energy(s),
        mean_scatters: total.last.mean_scatters(),
        cooled_fraction: Some(T::from_usize(total.cooled).unwrap() / n_t),
        cooled_speed,
        capturable_fraction: Some(T::from_usize(total.capturable).unwrap() / n_t),
        capture_speed,
        scatter_histogram: Some(total.histogram),
        series,
        end_time: total.end_time,
        saturation: two_photon_scatter_rate(s, scenario.intensity_per_beam, T::zero()).saturation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooling::scenario::{Axis, BeamGeometry};

    fn small(geometry: BeamGeometry) -> CoolingScenario<f64> {
        CoolingScenario {
            geometry,
            n_atoms: 500,
            initial_temperature: 5e-3,
            max_time: Some(0.05),
            intensity_per_beam: 1e5,
            ..CoolingScenario::hydrogen_default()
        }
    }

    #[test]
    fn zero_temperature_gives_zero_velocities() {
        let h = SpeciesParams::<f64>::hydrogen();
        let mut rng = atom_stream(0, StreamPurpose::InitialVelocity, 0);
        assert_eq!(sample_maxwell_boltzmann(&h, 0.0, &mut rng), [0.0; 3]);
    }

    #[test]
    fn ionized_atoms_never_scatter() {
        let s = small(BeamGeometry::Pair { axis: Axis::Z });
        let mut atom = AtomState::new([0.0; 3]);
        atom.status = AtomStatus::Ionized;
        let mut rng = atom_stream(1, StreamPurpose::Dynamics, 0);
        for _ in 0..100 {
            atom = step_atom(&atom, &s, 1e-5, &mut rng).unwrap();
        }
        assert_eq!(atom.scatter_count, 0);
        assert_eq!(atom.velocity, [0.0; 3]);
    }

    #[test]
    fn step_too_large_rejected() {
        let s = small(BeamGeometry::Pair { axis: Axis::Z });
        let mut rng = atom_stream(1, StreamPurpose::Dynamics, 0);
        let atom = AtomState::new([0.0; 3]);
        // total rate on resonance-ish is ~2.2 kHz, so 1 ms gives ~2 expected events
        assert!(matches!(
            step_atom(&atom, &s, 1e-3, &mut rng),
            Err(SimError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn conservation_and_histogram() {
        let r = run_mc(&small(BeamGeometry::ThreeAxis)).unwrap();
        assert_eq!(r.alive + r.ionized, r.n_atoms);
        let hist = r.scatter_histogram.as_ref().unwrap();
        assert_eq!(hist.iter().sum::<u64>(), r.n_atoms as u64);
        assert!((0.0..=1.0).contains(&r.survival_fraction));
        assert!(r.temperature.iter().all(|&t| t >= 0.0));
        for s in &r.series {
            assert!((0.0..=1.0).contains(&s.survival));
        }
        // survival never increases
        for w in r.series.windows(2) {
            assert!(w[1].survival <= w[0].survival);
        }
    }

    #[test]
    fn same_seed_same_report() {
        let s = small(BeamGeometry::Pair { axis: Axis::X });
        assert_eq!(run_mc(&s).unwrap(), run_mc(&s).unwrap());
        let mut other = s.clone();
        other.seed = 1;
        assert_ne!(run_mc(&s).unwrap(), run_mc(&other).unwrap());
    }

    #[test]
    fn adaptive_stepping_runs() {
        let mut s = small(BeamGeometry::Pair { axis: Axis::Z });
        s.n_atoms = 100;
        s.stepping = Stepping::Adaptive {
            max_event_probability: 0.05,
        };
        let r = run_mc(&s).unwrap();
        assert_eq!(r.alive + r.ionized, 100);
        assert_eq!(r.series.len(), s.samples + 1);
    }

    #[test]
    fn scatter_budget_stops_atoms() {
        let mut s = small(BeamGeometry::Single {
            axis: Axis::Z,
            reverse: false,
        });
        s.max_time = None;
        s.max_scatters = Some(7);
        s.detuning = 0.0;
        // wide line so every atom keeps scattering
        s.species.effective_linewidth = 5e7;
        s.initial_temperature = 1e-6;
        let r = run_mc(&s).unwrap();
        let hist = r.scatter_histogram.unwrap();
        assert!(hist.len() <= 8);
        assert_eq!(r.series.len(), 2);
        assert!(r.end_time > 0.0);
    }

    #[test]
    fn runs_in_f32() {
        let s = CoolingScenario::<f32> {
            geometry: BeamGeometry::Pair { axis: Axis::Z },
            n_atoms: 200,
            initial_temperature: 5e-3,
            max_time: Some(0.02),
            ..CoolingScenario::hydrogen_default()
        };
        let r = run_mc(&s).unwrap();
        assert_eq!(r.alive + r.ionized, 200);
        assert!(r.temperature[2] > 0.0);
    }
}
