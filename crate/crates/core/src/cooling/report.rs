//! Ensemble summaries and their on-disk formats.
//!
//! Time series CSV (schema `v1`): a `#`-prefixed header block followed by
//! `time_s,Tx_K,Ty_K,Tz_K,survival,mean_scatters`. The JSON summary carries
//! `"schema": "v1"` and the same header fields.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::excitation::Saturation;
use crate::scalar::Scalar;
use crate::species::SpeciesParams;

use super::scenario::temperature_from_variance;

pub const SCHEMA_VERSION: &str = "v1";
pub const CSV_COLUMNS: &str = "time_s,Tx_K,Ty_K,Tz_K,survival,mean_scatters";

/// One row of the time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample<T> {
    pub time: T,
    /// Per-axis temperature of surviving atoms, K.
    pub temperature: [T; 3],
    pub survival: T,
    /// Mean scatter count of surviving atoms.
    pub mean_scatters: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport<T> {
    pub n_atoms: usize,
    pub alive: usize,
    pub ionized: usize,
    pub survival_fraction: T,
    /// Final per-axis temperature of surviving atoms, K.
    pub temperature: [T; 3],
    /// Statistical standard error of `temperature`; zero for deterministic runs.
    pub temperature_stderr: [T; 3],
    pub mean_velocity: [T; 3],
    /// Mean kinetic energy of surviving atoms, J.
    pub mean_kinetic_energy: T,
    pub mean_scatters: T,
    /// Surviving atoms with speed at or below `cooled_speed`, as a fraction of all atoms.
    pub cooled_fraction: Option<T>,
    pub cooled_speed: T,
    /// Atoms whose initial speed is within the capture budget, as a fraction of all atoms.
    pub capturable_fraction: Option<T>,
    pub capture_speed: T,
    /// Count of atoms (alive or not) by final scatter count.
    pub scatter_histogram: Option<Vec<u64>>,
    pub series: Vec<SeriesSample<T>>,
    /// Time of the last recorded state, s.
    pub end_time: T,
    /// Worst-case saturation of the on-resonance per-beam rate.
    pub saturation: Saturation,
}

impl<T: Scalar> EnsembleReport<T> {
    /// Binomial standard error of the survival fraction.
    pub fn survival_stderr(&self) -> T {
        let s = self.survival_fraction;
        (s * (T::one() - s) / T::from_usize(self.n_atoms).unwrap()).sqrt()
    }
}

/// Provenance block written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunHeader {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl RunHeader {
    pub fn new(seed: u64, config_hash: impl Into<String>) -> Self {
        Self {
            tool: "combcool".to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            config_hash: config_hash.into(),
        }
    }
}

pub fn write_series_csv<T: Scalar, W: Write>(
    report: &EnsembleReport<T>,
    header: &RunHeader,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "# schema={SCHEMA_VERSION}")?;
    writeln!(out, "# tool={} version={}", header.tool, header.version)?;
    writeln!(out, "# seed={}", header.seed)?;
    writeln!(out, "# config_hash={}", header.config_hash)?;
    writeln!(out, "{CSV_COLUMNS}")?;
    for s in &report.series {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            s.time.to_f64_lossy(),
            s.temperature[0].to_f64_lossy(),
            s.temperature[1].to_f64_lossy(),
            s.temperature[2].to_f64_lossy(),
            s.survival.to_f64_lossy(),
            s.mean_scatters.to_f64_lossy()
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a, T> {
    schema: &'static str,
    #[serde(flatten)]
    header: &'a RunHeader,
    kind: &'a str,
    report: &'a EnsembleReport<T>,
}

/// JSON summary; `kind` names the producer (`mc`, `oracle`, ...).
pub fn summary_json<T: Scalar + Serialize>(
    report: &EnsembleReport<T>,
    header: &RunHeader,
    kind: &str,
) -> serde_json::Result<String> {
    serde_json::to_string_pretty(&Summary {
        schema: SCHEMA_VERSION,
        header,
        kind,
        report,
    })
}

/// Raw velocity moments of a set of surviving atoms. Merging is plain
/// addition, so a fixed merge order gives bitwise-reproducible totals.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Moments<T> {
    pub count: u64,
    s1: [T; 3],
    s2: [T; 3],
    s3: [T; 3],
    s4: [T; 3],
    scatters: T,
}

impl<T: Scalar> Moments<T> {
    pub fn new() -> Self {
        let z = [T::zero(); 3];
        Self {
            count: 0,
            s1: z,
            s2: z,
            s3: z,
            s4: z,
            scatters: T::zero(),
        }
    }

    pub fn add(&mut self, v: &[T; 3], scatters: u32) {
        self.count += 1;
        for a in 0..3 {
            let x = v[a];
            let x2 = x * x;
            self.s1[a] += x;
            self.s2[a] += x2;
            self.s3[a] += x2 * x;
            self.s4[a] += x2 * x2;
        }
        self.scatters += T::from_u32(scatters).unwrap();
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        for a in 0..3 {
            self.s1[a] += other.s1[a];
            self.s2[a] += other.s2[a];
            self.s3[a] += other.s3[a];
            self.s4[a] += other.s4[a];
        }
        self.scatters += other.scatters;
    }

    fn n(&self) -> T {
        T::from_u64(self.count).unwrap()
    }

    pub fn mean(&self) -> [T; 3] {
        if self.count == 0 {
            return [T::zero(); 3];
        }
        let n = self.n();
        [self.s1[0] / n, self.s1[1] / n, self.s1[2] / n]
    }

    pub fn variance(&self) -> [T; 3] {
        if self.count == 0 {
            return [T::zero(); 3];
        }
        let n = self.n();
        let m = self.mean();
        let mut out = [T::zero(); 3];
        for a in 0..3 {
            out[a] = (self.s2[a] / n - m[a] * m[a]).max(T::zero());
        }
        out
    }

    pub fn temperature(&self, s: &SpeciesParams<T>) -> [T; 3] {
        self.variance().map(|v| temperature_from_variance(s, v))
    }

    /// Standard error of the temperature from the sample fourth moment.
    pub fn temperature_stderr(&self, s: &SpeciesParams<T>) -> [T; 3] {
        if self.count < 2 {
            return [T::zero(); 3];
        }
        let n = self.n();
        let m = self.mean();
        let var = self.variance();
        let mut out = [T::zero(); 3];
        for a in 0..3 {
            let (e1, e2, e3, e4) = (m[a], self.s2[a] / n, self.s3[a] / n, self.s4[a] / n);
            let mu4 = e4 - T::lit(4.0) * e1 * e3 + T::lit(6.0) * e1 * e1 * e2
                - T::lit(3.0) * e1.powi(4);
            let var_of_var = ((mu4 - var[a] * var[a]) / n).max(T::zero());
            out[a] = temperature_from_variance(s, var_of_var.sqrt());
        }
        out
    }

    pub fn mean_kinetic_energy(&self, s: &SpeciesParams<T>) -> T {
        if self.count == 0 {
            return T::zero();
        }
        let sum2 = self.s2[0] + self.s2[1] + self.s2[2];
        T::lit(0.5) * s.mass * sum2 / self.n()
    }

    pub fn mean_scatters(&self) -> T {
        if self.count == 0 {
            T::zero()
        } else {
            self.scatters / self.n()
        }
    }
}
