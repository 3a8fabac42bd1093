//! Experiment orchestration: simulations with artifact bundles, rho sweeps
//! and instance extraction.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shfl_core::data;
use shfl_core::scheduler::{admm_solve, SchedulingInstance, SolverConfig};
use shfl_core::sim::{self, MetricsLog, Scenario, SimConfig, SimState};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::formats::{self, METRICS_SCHEMA_VERSION};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// 0.40, 0.45, ..., 0.80.
pub fn default_rho_values() -> Vec<f64> {
    (8..=16).map(|i| i as f64 * 0.05).map(|r| (r * 100.0).round() / 100.0).collect()
}

pub fn build_scenario(cfg: &SimConfig, seed: u64) -> Result<Scenario> {
    let t = &cfg.topology;
    let d = data::generate(&cfg.data, t.edges, t.devices_per_edge, seed)?;
    Ok(sim::build_scenario(cfg, d, seed)?)
}

/// The scheduling problem the cloud faces in round 1 of a run: the run's
/// placement and radio, with importances from one round of local training.
pub fn first_round_instance(cfg: &RunConfig) -> Result<SchedulingInstance> {
    let sim_cfg = cfg.to_sim_config()?;
    let scenario = build_scenario(&sim_cfg, cfg.seed)?;
    let mut state = SimState::new(&scenario)?;
    let sigma = sim::train_edges(&scenario, &mut state, cfg.seed)?;
    Ok(sim::scheduling_instance(&scenario, &sigma)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub selected_count: usize,
    pub sum_sigma: f64,
    pub max_latency_s: f64,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Solves `inst` once per value of rho.
pub fn sweep_instance(inst: &SchedulingInstance, solver: &SolverConfig, rhos: &[f64]) -> Result<Vec<SweepRow>> {
    rhos.iter()
        .map(|&rho| {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::invalid("rho", format!("{rho} is outside [0, 1]")));
            }
            let inst = SchedulingInstance { rho, ..inst.clone() };
            let s = admm_solve(&inst, solver)?;
            Ok(SweepRow {
                rho,
                selected_count: s.selected_count(),
                sum_sigma: s.achieved_importance,
                max_latency_s: s.achieved_latency,
                objective: s.objective,
                converged: s.converged,
                iterations: s.iterations,
            })
        })
        .collect()
}

/// Sweeps rho over the first-round instance of `base`.
pub fn run_rho_sweep(base: &RunConfig, rhos: &[f64]) -> Result<Vec<SweepRow>> {
    let inst = first_round_instance(base)?;
    sweep_instance(&inst, &base.solver.to_solver(), rhos)
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// SHA-256 of the config's canonical JSON.
pub fn config_hash(cfg: &RunConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub metrics_schema_version: u32,
    pub config_sha256: String,
    pub seed: u64,
    pub rounds: u64,
    pub policy: String,
    pub shfl_version: String,
    pub shfl_core_version: String,
    pub files: Vec<String>,
    /// Rounds in which no edge was selected; the clock did not advance.
    pub empty_rounds: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub manifest: Manifest,
    pub log: MetricsLog,
    pub dir: PathBuf,
}

/// Runs the configured simulation and writes `config.json`, `metrics.csv`,
/// `metrics.json` and `manifest.json` into `out_dir`. Every byte depends
/// only on the config.
pub fn run_experiment(cfg: &RunConfig, out_dir: &Path) -> Result<Artifacts> {
    let sim_cfg = cfg.to_sim_config()?;
    let scenario = build_scenario(&sim_cfg, cfg.seed)?;
    let log = sim::run_simulation(&scenario, cfg.rounds, cfg.seed)?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = ["config.json", "metrics.csv", "metrics.json", "manifest.json"];
    formats::write_file(&out_dir.join(files[0]), cfg.to_json() + "\n")?;
    formats::write_file(&out_dir.join(files[1]), formats::metrics_to_csv(&log)?)?;
    formats::write_file(&out_dir.join(files[2]), formats::metrics_to_json(&log))?;
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        metrics_schema_version: METRICS_SCHEMA_VERSION,
        config_sha256: config_hash(cfg),
        seed: cfg.seed,
        rounds: cfg.rounds,
        policy: sim_cfg.policy.label(),
        shfl_version: env!("CARGO_PKG_VERSION").into(),
        shfl_core_version: shfl_core::VERSION.into(),
        files: files.iter().map(|f| f.to_string()).collect(),
        empty_rounds: log.rows.iter().skip(1).filter(|r| r.selected_count == 0).map(|r| r.round).collect(),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    formats::write_file(&out_dir.join(files[3]), text)?;
    Ok(Artifacts { manifest, log, dir: out_dir.to_path_buf() })
}

/// Writes every device dataset as `edge{k}_device{n}.csv` plus `test.csv`.
pub fn write_datasets(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let sim_cfg = cfg.to_sim_config()?;
    let t = &sim_cfg.topology;
    let d = data::generate(&sim_cfg.data, t.edges, t.devices_per_edge, cfg.seed)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for (i, ds) in d.devices.iter().enumerate() {
        let path = out_dir.join(format!("edge{}_device{}.csv", i / t.devices_per_edge, i % t.devices_per_edge));
        formats::write_file(&path, formats::dataset_to_string(ds))?;
        written.push(path);
    }
    let path = out_dir.join("test.csv");
    formats::write_file(&path, formats::dataset_to_string(&d.test))?;
    written.push(path);
    Ok(written)
}
