//! Deterministic master-equation oracle for one-dimensional scenarios.
//!
//! The axial velocity distribution lives on a grid whose spacing divides the
//! absorption recoil exactly. Each scatter along beam `b` moves probability
//! by `±recoil` plus the axial projection of an isotropic emission kick,
//! which is uniform on `[-v_e, v_e]`; a fraction `p_ion` is removed instead.
//! Alongside the distribution `P(v)` the oracle carries `N(v)`, the
//! scatter-count-weighted distribution, which gives the mean scatter count and
//! with it the transverse temperature. The linear system is advanced exactly
//! (to a 1e-14 Poisson tail) by uniformization, so no randomness is involved.

use serde::{Deserialize, Serialize};

use crate::excitation::{clamped_scatter_rate, two_photon_scatter_rate};
use crate::scalar::Scalar;

use super::report::{EnsembleReport, SeriesSample};
use super::scenario::{temperature_from_variance, thermal_sigma, CoolingScenario};
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleGrid {
    /// Grid points per absorption recoil (minimum; refined for cold ensembles).
    pub bins_per_recoil: usize,
    /// Initial half-width of the grid in thermal standard deviations.
    pub span_sigmas: f64,
    pub max_bins: usize,
    /// Largest probability allowed to leave the grid before widening it.
    pub leak_tolerance: f64,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self {
            bins_per_recoil: 8,
            span_sigmas: 10.0,
            max_bins: 400_001,
            leak_tolerance: 1e-9,
        }
    }
}

struct Beam1d<T> {
    shift: isize,
    rates: Vec<T>,
}

struct Grid<T> {
    dv: T,
    center: usize,
    beams: Vec<Beam1d<T>>,
    total_rate: Vec<T>,
    kernel_offset: isize,
    kernel: Vec<T>,
    survive: T,
    /// Unnormalised mass of the initial distribution.
    initial_mass: T,
}

#[derive(Clone)]
struct State<T> {
    p: Vec<T>,
    n: Vec<T>,
    leak: T,
}

impl<T: Scalar> State<T> {
    fn zeros(m: usize) -> Self {
        Self {
            p: vec![T::zero(); m],
            n: vec![T::zero(); m],
            leak: T::zero(),
        }
    }

    fn axpy(&mut self, w: T, x: &Self) {
        for (a, b) in self.p.iter_mut().zip(&x.p) {
            *a += w * *b;
        }
        for (a, b) in self.n.iter_mut().zip(&x.n) {
            *a += w * *b;
        }
        self.leak += w * x.leak;
    }
}

impl<T: Scalar> Grid<T> {
    fn velocity(&self, i: usize) -> T {
        T::from_isize(i as isize - self.center as isize).unwrap() * self.dv
    }

    fn len(&self) -> usize {
        self.total_rate.len()
    }

    /// `y = (I + G / lambda) x` for the uniformization rate `lambda`.
    fn apply(&self, x: &State<T>, lambda: T, y: &mut State<T>) {
        let m = self.len() as isize;
        for i in 0..self.len() {
            let keep = T::one() - self.total_rate[i] / lambda;
            y.p[i] = x.p[i] * keep;
            y.n[i] = x.n[i] * keep;
        }
        y.leak = x.leak;
        for beam in &self.beams {
            for i in 0..self.len() {
                let r = beam.rates[i];
                if r == T::zero() || (x.p[i] == T::zero() && x.n[i] == T::zero()) {
                    continue;
                }
                let flow_p = r * self.survive * x.p[i] / lambda;
                let flow_n = r * self.survive * (x.n[i] + x.p[i]) / lambda;
                let base = i as isize + beam.shift + self.kernel_offset;
                for (j, &w) in self.kernel.iter().enumerate() {
                    let target = base + j as isize;
                    if target < 0 || target >= m {
                        y.leak += w * flow_p;
                    } else {
                        let t = target as usize;
                        y.p[t] += w * flow_p;
                        y.n[t] += w * flow_n;
                    }
                }
            }
        }
    }

    /// Advances `x` by `dt` using uniformization.
    fn advance(&self, x: &State<T>, dt: T, lambda: T) -> State<T> {
        let mean = lambda * dt;
        if mean == T::zero() {
            return x.clone();
        }
        let mut out = State::zeros(self.len());
        let mut term = x.clone();
        let mut scratch = State::zeros(self.len());
        let mean_f = mean.to_f64_lossy();
        let last = (mean_f + 12.0 * mean_f.sqrt() + 40.0).ceil() as usize;
        let log_mean = mean_f.ln();
        let mut log_w = -mean_f;
        for k in 0..=last {
            if k > 0 {
                log_w += log_mean - (k as f64).ln();
                self.apply(&term, lambda, &mut scratch);
                std::mem::swap(&mut term, &mut scratch);
            }
            let w = log_w.exp();
            if w > 0.0 {
                out.axpy(T::lit(w), &term);
            }
        }
        out
    }
}

/// [`rate_equation_oracle_with`] using the default grid.
pub fn rate_equation_oracle<T: Scalar>(
    scenario: &CoolingScenario<T>,
) -> Result<EnsembleReport<T>, SimError> {
    rate_equation_oracle_with(scenario, &OracleGrid::default())
}

/// Deterministic counterpart of [`super::run_mc`] for one-dimensional
/// scenarios with a time limit and no per-atom scatter budget.
pub fn rate_equation_oracle_with<T: Scalar>(
    scenario: &CoolingScenario<T>,
    grid: &OracleGrid,
) -> Result<EnsembleReport<T>, SimError> {
    scenario.validate()?;
    let axis = scenario.geometry.single_axis().ok_or_else(|| SimError::Unsupported {
        what: "rate-equation oracle",
        reason: "needs a one-dimensional beam geometry".into(),
    })?;
    if scenario.max_scatters.is_some() || scenario.max_time.is_none() {
        return Err(SimError::Unsupported {
            what: "rate-equation oracle",
            reason: "needs max_time and no per-atom scatter budget".into(),
        });
    }
    let s = &scenario.species;
    let sigma0 = thermal_sigma(s, scenario.initial_temperature);
    let recoil = s.recoil_velocity;
    let v_emit = s.emission_recoil();
    let doppler = T::from_u32(s.photon_order).unwrap() / s.cooling_wavelength;
    let mut sub = grid.bins_per_recoil.max(1);
    let min_sub = (T::lit(4.0) * recoil / sigma0).ceil().to_usize().unwrap_or(usize::MAX);
    sub = sub.max(min_sub);
    let dv = recoil / T::from_usize(sub).unwrap();
    // velocities reachable by drifting onto resonance, or by every scatter
    // pushing the same way, whichever is smaller
    let resonant = ((scenario.detuning.abs() + T::lit(5.0) * s.effective_linewidth) / doppler).min(
        scenario.max_total_rate() * scenario.max_time.unwrap_or_else(T::zero) * (recoil + v_emit),
    );
    let mut extent = T::lit(grid.span_sigmas) * sigma0
        + T::lit(8.0) * (recoil + v_emit)
        + resonant;

    loop {
        let center = (extent / dv).ceil().to_usize().unwrap_or(usize::MAX);
        if center.saturating_mul(2).saturating_add(1) > grid.max_bins {
            return Err(SimError::GridResolution(format!(
                "grid would need {} bins (limit {}) at spacing {} m/s",
                center.saturating_mul(2).saturating_add(1),
                grid.max_bins,
                dv
            )));
        }
        match solve(scenario, grid, axis.index(), dv, center, sub, doppler, sigma0) {
            Ok(report) => return Ok(report),
            Err(Leaked) => extent = extent * T::lit(2.0),
        }
    }
}

struct Leaked;

#[allow(clippy::too_many_arguments)]
fn solve<T: Scalar>(
    scenario: &CoolingScenario<T>,
    cfg: &OracleGrid,
    axis: usize,
    dv: T,
    center: usize,
    sub: usize,
    doppler: T,
    sigma0: T,
) -> Result<EnsembleReport<T>, Leaked> {
    let s = &scenario.species;
    let m = 2 * center + 1;
    let v_emit = s.emission_recoil();
    let half = dv / T::lit(2.0);

    // Axial projection of the emission kick, binned exactly.
    let reach = ((v_emit / dv) + T::lit(0.5)).ceil().to_isize().unwrap();
    let kernel: Vec<T> = (-reach..=reach)
        .map(|j| {
            let mid = T::from_isize(j).unwrap() * dv;
            let lo = (mid - half).max(-v_emit);
            let hi = (mid + half).min(v_emit);
            ((hi - lo) / (T::lit(2.0) * v_emit)).max(T::zero())
        })
        .collect();

    let mut template = Grid {
        dv,
        center,
        beams: Vec::new(),
        total_rate: vec![T::zero(); m],
        kernel_offset: -reach,
        kernel,
        survive: T::one() - scenario.ionization_probability(),
        initial_mass: T::one(),
    };
    for d in scenario.beam_directions() {
        let sign = d[axis];
        let rates: Vec<T> = (0..m)
            .map(|i| {
                let v = template.velocity(i);
                let seen = scenario.detuning - doppler * v * sign;
                clamped_scatter_rate(s, scenario.intensity_per_beam, seen)
            })
            .collect();
        for (t, r) in template.total_rate.iter_mut().zip(&rates) {
            *t += *r;
        }
        template.beams.push(Beam1d {
            shift: if sign > T::zero() { sub as isize } else { -(sub as isize) },
            rates,
        });
    }
    let mut grid = template;
    let lambda = grid
        .total_rate
        .iter()
        .copied()
        .fold(T::zero(), T::max);

    let mut state = State::zeros(m);
    let two_var = T::lit(2.0) * sigma0 * sigma0;
    for i in 0..m {
        let v = grid.velocity(i);
        state.p[i] = (-(v * v) / two_var).exp();
    }
    grid.initial_mass = state.p.iter().copied().sum();
    let grid = grid;

    let times = scenario.sample_times();
    let mut series = Vec::with_capacity(times.len());
    let mut t_prev = T::zero();
    let leak_limit = T::lit(cfg.leak_tolerance);
    for &t in &times {
        state = if lambda > T::zero() {
            grid.advance(&state, t - t_prev, lambda)
        } else {
            state
        };
        if state.leak > leak_limit * grid.initial_mass {
            return Err(Leaked);
        }
        t_prev = t;
        series.push(summarize(t, &grid, &state, s, axis, sigma0, v_emit));
    }

    let last = series.last().cloned().expect("at least one sample");
    let moments = moments(&grid, &state);
    let survival = moments.mass;
    let n = scenario.n_atoms;
    let alive = (survival * T::from_usize(n).unwrap()).round().to_usize().unwrap_or(0).min(n);
    let mut mean_velocity = [T::zero(); 3];
    mean_velocity[axis] = moments.mean;
    let var_transverse = sigma0 * sigma0 + v_emit * v_emit / T::lit(3.0) * moments.mean_scatters;
    let ke = T::lit(0.5)
        * s.mass
        * (moments.variance + moments.mean * moments.mean + T::lit(2.0) * var_transverse);
    Ok(EnsembleReport {
        n_atoms: n,
        alive,
        ionized: n - alive,
        survival_fraction: survival,
        temperature: last.temperature,
        temperature_stderr: [T::zero(); 3],
        mean_velocity,
        mean_kinetic_energy: ke,
        mean_scatters: moments.mean_scatters,
        cooled_fraction: None,
        cooled_speed: scenario.cooled_speed_threshold(),
        capturable_fraction: None,
        capture_speed: scenario.capture_speed(),
        scatter_histogram: None,
        series,
        end_time: t_prev,
        saturation: two_photon_scatter_rate(s, scenario.intensity_per_beam, T::zero()).saturation,
    })
}

struct GridMoments<T> {
    mass: T,
    mean: T,
    variance: T,
    mean_scatters: T,
}

fn moments<T: Scalar>(grid: &Grid<T>, state: &State<T>) -> GridMoments<T> {
    let raw: T = state.p.iter().copied().sum();
    let mass = raw / grid.initial_mass;
    if raw <= T::zero() {
        return GridMoments {
            mass: T::zero(),
            mean: T::zero(),
            variance: T::zero(),
            mean_scatters: T::zero(),
        };
    }
    let (mut s1, mut s2) = (T::zero(), T::zero());
    for (i, &p) in state.p.iter().enumerate() {
        let v = grid.velocity(i);
        s1 += p * v;
        s2 += p * v * v;
    }
    let mean = s1 / raw;
    let scatters: T = state.n.iter().copied().sum();
    GridMoments {
        mass,
        mean,
        variance: (s2 / raw - mean * mean).max(T::zero()),
        mean_scatters: scatters / raw,
    }
}

fn summarize<T: Scalar>(
    time: T,
    grid: &Grid<T>,
    state: &State<T>,
    s: &crate::species::SpeciesParams<T>,
    axis: usize,
    sigma0: T,
    v_emit: T,
) -> SeriesSample<T> {
    let mo = moments(grid, state);
    let transverse = temperature_from_variance(
        s,
        sigma0 * sigma0 + v_emit * v_emit / T::lit(3.0) * mo.mean_scatters,
    );
    let mut temperature = [transverse; 3];
    temperature[axis] = temperature_from_variance(s, mo.variance);
    SeriesSample {
        time,
        temperature,
        survival: mo.mass,
        mean_scatters: mo.mean_scatters,
    }
}
