use std::fs;
use std::path::Path;

use combcool::cooling::{
    doppler_limit_temperature, optimize_with, rate_equation_oracle, run_mc, summary_json,
    write_series_csv, ImpulseBudget, MonteCarloEvaluator, RunHeader, SimError, SCHEMA_VERSION,
};
use combcool::excitation::{
    ionization_probability_per_scatter, photoionization_rate, pulsed_gain, rabi_cw, rabi_pulsed,
    single_photon_pulsed_rate, survival_after, two_photon_scatter_rate,
};
use combcool::reproduce::{self, ReproduceId, DEFAULT_SEED};
use combcool::scheduler::{carbon_feasibility, comb_offsets, plan_eom, SchedulerError};
use combcool::Report;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Evaluator, Overrides, ScenarioConfig};
use crate::CliError;

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::InvalidScenario(_)
        | SimError::Species(_)
        | SimError::Unsupported { .. }
        | SimError::InvalidBounds(_) => CliError::validation(e.to_string()),
        SimError::StepTooLarge { .. } | SimError::GridResolution(_) => CliError::runtime(e.to_string()),
    }
}

fn header(cfg: &ScenarioConfig) -> RunHeader {
    RunHeader::new(cfg.run.seed, cfg.hash())
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::runtime(format!("{}: {e}", path.display()))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

pub fn rates(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let s = cfg.scenario()?;
    let sp = &s.species;
    let h = header(cfg);
    let i = s.intensity_per_beam;
    let beams = s.beam_directions().len();
    let resonant = two_photon_scatter_rate(sp, i, 0.0);
    let detuned = two_photon_scatter_rate(sp, i, s.detuning);
    let budget = cfg.rates.scatter_budget;
    println!(
        "# tool={} version={} seed={} config_hash={}",
        h.tool, h.version, h.seed, h.config_hash
    );
    println!("species = {}", sp.name);
    println!("intensity per beam = {i:.4e} W/cm^2 ({beams} beams)");
    println!("R{} = {:.3} kHz (resonant)", sp.photon_order, resonant.rate / 1e3);
    println!(
        "R{} at detuning {:.4e} Hz = {:.3} kHz",
        sp.photon_order,
        s.detuning,
        detuned.rate / 1e3
    );
    println!("saturation = {:?}", resonant.saturation);
    println!("photoionization rate = {:.4e} Hz", photoionization_rate(sp, i));
    println!(
        "ionization per scatter = {:.4e} (one beam), {:.4e} (all beams)",
        ionization_probability_per_scatter(sp, i),
        s.ionization_probability()
    );
    println!(
        "survival after {budget} scatters = {:.4} (one beam)",
        survival_after(sp, i, budget)
    );
    println!(
        "time for {budget} scatters = {:.4e} s (one beam, resonant)",
        budget as f64 / resonant.rate
    );
    println!("recoil = {:.4} m/s absorption, {:.4} m/s emission", sp.recoil_velocity, sp.emission_recoil());
    println!("doppler limit = {:.4e} K", doppler_limit_temperature(sp));
    if let Some(comb) = cfg.comb()? {
        let n = comb.line_count();
        println!("comb lines = {n}, bandwidth = {:.4e} Hz", comb.bandwidth());
        println!(
            "pulsed amplitude gain = {:.4e} (k = {}), one-photon rate penalty = {:.4e}",
            pulsed_gain::<f64>(n, sp.photon_order),
            sp.photon_order,
            single_photon_pulsed_rate(1.0, n)
        );
        if let Some(t) = &cfg.rates.transition {
            let cw = rabi_cw(t, comb.mean_intensity()).map_err(|e| CliError::validation(e.to_string()))?;
            let pulsed = rabi_pulsed(t, &comb).map_err(|e| CliError::validation(e.to_string()))?;
            println!("rabi cw = {cw:.6e} Hz, rabi pulsed = {pulsed:.6e} Hz");
        }
    }
    Ok(())
}

fn ensemble_outputs(cfg: &ScenarioConfig, report: &Report, kind: &str) -> Result<(), CliError> {
    let h = header(cfg);
    let dir = &cfg.output.dir;
    let mut csv = Vec::new();
    write_series_csv(report, &h, &mut csv).expect("in-memory write");
    write(dir, &format!("{kind}_series.csv"), &String::from_utf8(csv).expect("utf-8"))?;
    let summary = summary_json(report, &h, kind).expect("serializable") + "\n";
    write(dir, &format!("{kind}_summary.json"), &summary)?;
    write(dir, "config.normalized.json", &(cfg.normalized() + "\n"))?;
    print!("{summary}");
    Ok(())
}

pub fn mc(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let report = run_mc(&cfg.scenario()?).map_err(sim_error)?;
    ensemble_outputs(cfg, &report, "mc")
}

pub fn oracle(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let report = rate_equation_oracle(&cfg.scenario()?).map_err(sim_error)?;
    ensemble_outputs(cfg, &report, "oracle")
}

pub fn optimize(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let s = cfg.scenario()?;
    let o = &cfg.optimize;
    let result = match o.evaluator {
        Evaluator::ImpulseBudget => {
            let eval = ImpulseBudget::from_scenario(&s, o.scatter_budget).map_err(sim_error)?;
            optimize_with(&eval, o.objective, &o.bounds)
        }
        Evaluator::MonteCarlo => optimize_with(&MonteCarloEvaluator { scenario: s }, o.objective, &o.bounds),
    }
    .map_err(sim_error)?;
    if let Some(b) = result.boundary {
        eprintln!("warning[optimize]: optimum on the {b:?} search bound; widen the bounds");
    }
    let h = header(cfg);
    let out = to_json(&json!({
        "schema": SCHEMA_VERSION,
        "tool": h.tool,
        "version": h.version,
        "seed": h.seed,
        "config_hash": h.config_hash,
        "kind": "optimize",
        "objective": o.objective,
        "evaluator": o.evaluator,
        "result": result,
    }));
    write(&cfg.output.dir, "optimize.json", &out)?;
    write(&cfg.output.dir, "config.normalized.json", &(cfg.normalized() + "\n"))?;
    print!("{out}");
    Ok(())
}

fn scheduler_error(e: SchedulerError) -> CliError {
    match e {
        SchedulerError::Coverage { .. } | SchedulerError::Infeasible { .. } => CliError::runtime(e.to_string()),
        _ => CliError::validation(e.to_string()),
    }
}

pub fn schedule(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let comb = cfg
        .comb()?
        .ok_or_else(|| CliError::validation("config key `comb` is required for schedule"))?;
    let (levels, sched) = cfg.levels()?;
    let offsets = comb_offsets(&levels, &comb).map_err(scheduler_error)?;
    let plan = plan_eom(&offsets, sched.eom_band_hz, sched.merge_tolerance_hz).map_err(scheduler_error)?;
    let feasibility = carbon_feasibility(&levels, &comb, sched.total_intensity, &sched.feasibility)
        .map_err(scheduler_error)?;
    let h = header(cfg);
    let out = to_json(&json!({
        "schema": SCHEMA_VERSION,
        "tool": h.tool,
        "version": h.version,
        "seed": h.seed,
        "config_hash": h.config_hash,
        "kind": "schedule",
        "level_set": levels.name,
        "offsets": offsets,
        "plan": plan,
        "feasibility": feasibility,
    }));
    write(&cfg.output.dir, "schedule.json", &out)?;
    write(&cfg.output.dir, "config.normalized.json", &(cfg.normalized() + "\n"))?;
    println!(
        "# tool={} version={} seed={} config_hash={}",
        h.tool, h.version, h.seed, h.config_hash
    );
    print!("{}", plan.to_table());
    for t in &feasibility.transitions {
        println!(
            "{}: rate {:.3e} .. {:.3e} Hz at {:.3e} W/cm^2, {} scatters, {:.3e} .. {:.3e} s, feasible = {}",
            t.transition,
            t.rate_min,
            t.rate_max,
            t.intensity,
            t.scatters_needed,
            t.cooling_time_min,
            t.cooling_time_max,
            t.feasible
        );
    }
    let infeasible = plan.infeasible();
    if !infeasible.is_empty() {
        return Err(scheduler_error(SchedulerError::Infeasible {
            transitions: infeasible,
        }));
    }
    Ok(())
}

pub fn reproduce(id: &str, overrides: &Overrides) -> Result<(), CliError> {
    let ids: Vec<ReproduceId> = if id == "all" {
        ReproduceId::ALL.to_vec()
    } else {
        vec![id.parse().map_err(|e: reproduce::ReproduceError| {
            CliError::validation(format!(
                "{e}; expected `all` or one of {}",
                ReproduceId::ALL.map(|i| i.as_str()).join(", ")
            ))
        })?]
    };
    let seed = overrides.seed.unwrap_or(DEFAULT_SEED);
    let mut all = Vec::new();
    for id in ids {
        let outcome = reproduce::run(id, seed).map_err(|e| CliError::runtime(e.to_string()))?;
        let hash = hex::encode(Sha256::digest(format!("reproduce:{id}:seed={seed}").as_bytes()));
        let h = RunHeader::new(seed, hash);
        let v = json!({
            "schema": SCHEMA_VERSION,
            "tool": h.tool,
            "version": h.version,
            "seed": h.seed,
            "config_hash": h.config_hash,
            "kind": "reproduce",
            "id": id.as_str(),
            "criterion": id.criterion(),
            "passed": outcome.passed,
            "measured": outcome.measured,
        });
        if let Some(dir) = &overrides.out {
            write(dir, &format!("reproduce_{id}.json"), &to_json(&v))?;
        }
        all.push(v);
    }
    let out = if all.len() == 1 {
        all.pop().expect("one result")
    } else {
        Value::Array(all)
    };
    print!("{}", to_json(&out));
    Ok(())
}
