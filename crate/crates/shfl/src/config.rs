//! Run configuration: a JSON file, every field optional.
//!
//! Powers are given in dBm and the noise density in dBm/Hz; both are
//! converted to watts when the config is turned into a [`SimConfig`]. An
//! empty file yields the defaults: ten edges of two devices, 20 MHz split
//! 15/5 MHz, device uplink 10 dBm, edge uplink 24 dBm, edge downlink 10 dBm,
//! cloud downlink 24 dBm, N0 = -174 dBm/Hz, CPUs uniform in 2-4 GHz,
//! `rho = 0.8`. Unknown keys are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use shfl_core::data::SyntheticSpec;
use shfl_core::model::TrainingHyper;
use shfl_core::radio::{dbm_to_watts, NetworkConfig};
use shfl_core::scheduler::{InitRule, SolverConfig};
use shfl_core::sim::{EdgeUpdate, Policy, Selection, SimConfig, Topology};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub total_bandwidth_hz: f64,
    pub edge_tier_bandwidth_hz: f64,
    pub cloud_tier_bandwidth_hz: f64,
    pub noise_density_dbm_per_hz: f64,
    pub device_ul_power_dbm: f64,
    pub edge_ul_power_dbm: f64,
    pub edge_dl_power_dbm: f64,
    pub cloud_dl_power_dbm: f64,
    /// Bits per model transfer; `null` means 16 bits per model parameter.
    pub payload_bits: Option<f64>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            total_bandwidth_hz: 20e6,
            edge_tier_bandwidth_hz: 15e6,
            cloud_tier_bandwidth_hz: 5e6,
            noise_density_dbm_per_hz: -174.0,
            device_ul_power_dbm: 10.0,
            edge_ul_power_dbm: 24.0,
            edge_dl_power_dbm: 10.0,
            cloud_dl_power_dbm: 24.0,
            payload_bits: None,
        }
    }
}

impl NetworkSection {
    pub fn to_network(&self, model_params: usize) -> NetworkConfig {
        NetworkConfig {
            total_bandwidth: self.total_bandwidth_hz,
            edge_tier_bandwidth: self.edge_tier_bandwidth_hz,
            cloud_tier_bandwidth: self.cloud_tier_bandwidth_hz,
            noise_density: dbm_to_watts(self.noise_density_dbm_per_hz),
            device_ul_power: dbm_to_watts(self.device_ul_power_dbm),
            edge_ul_power: dbm_to_watts(self.edge_ul_power_dbm),
            edge_dl_power: dbm_to_watts(self.edge_dl_power_dbm),
            cloud_dl_power: dbm_to_watts(self.cloud_dl_power_dbm),
            payload_bits: self
                .payload_bits
                .unwrap_or_else(|| NetworkConfig::payload_for_params(model_params)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Mini-batch steps per round; `null` means one pass over the device's
    /// data.
    pub local_steps: Option<usize>,
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection { learning_rate: 0.1, batch_size: 50, local_steps: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub rho: f64,
    pub nu: f64,
    pub eps_min: f64,
    pub max_iters: usize,
    pub round_threshold: f64,
    pub init: InitRule,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection {
            rho: 0.8,
            nu: s.nu,
            eps_min: s.eps_min,
            max_iters: s.max_iters,
            round_threshold: s.round_threshold,
            init: s.init,
        }
    }
}

impl SolverSection {
    pub fn to_solver(&self) -> SolverConfig {
        SolverConfig {
            nu: self.nu,
            eps_min: self.eps_min,
            max_iters: self.max_iters,
            round_threshold: self.round_threshold,
            init: self.init,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySection {
    /// `proposed`, `full`, `random-M` or `fastest-M`.
    pub selection: String,
    pub edge_update: EdgeUpdate,
}

impl Default for PolicySection {
    fn default() -> Self {
        PolicySection { selection: "proposed".into(), edge_update: EdgeUpdate::Elastic }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub rounds: u64,
    pub network: NetworkSection,
    pub topology: Topology,
    pub data: SyntheticSpec,
    pub training: TrainingSection,
    pub solver: SolverSection,
    pub policy: PolicySection,
    /// Divide the cloud update by the selected edges' data only.
    pub normalize_selected_only: bool,
    /// Layers compared by the elastic update; empty means all.
    pub divergence_layers: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            rounds: 100,
            network: NetworkSection::default(),
            topology: Topology::default(),
            data: SyntheticSpec::default(),
            training: TrainingSection::default(),
            solver: SolverSection::default(),
            policy: PolicySection::default(),
            normalize_selected_only: false,
            divergence_layers: Vec::new(),
        }
    }
}

/// Attaches a field path to a core validation error.
fn at(section: &str, r: shfl_core::Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        shfl_core::Error::InvalidParameter { name, value } => {
            Error::invalid(format!("{section}.{name}"), format!("value {value} out of range"))
        }
        shfl_core::Error::InvalidConfig(msg) => Error::invalid(section, msg),
        other => Error::invalid(section, other),
    })
}

impl RunConfig {
    pub fn selection(&self) -> Result<Selection> {
        self.policy.selection.parse().map_err(|e| Error::invalid("policy.selection", e))
    }

    /// Validates every section and converts to the simulator's config.
    pub fn to_sim_config(&self) -> Result<SimConfig> {
        if !(0.0..=1.0).contains(&self.solver.rho) {
            return Err(Error::invalid("solver.rho", format!("{} is outside [0, 1]", self.solver.rho)));
        }
        let t = &self.topology;
        if t.edges == 0 || t.devices_per_edge == 0 {
            return Err(Error::invalid("topology", "needs at least one edge and one device per edge"));
        }
        at("data", self.data.validate(t.edges * t.devices_per_edge))?;
        let network = self.network.to_network(self.data.model_dim());
        at("network", network.validate())?;
        let samples_per_device = self.data.shards_per_device * self.data.shard_size;
        let hyper = TrainingHyper {
            learning_rate: self.training.learning_rate,
            batch_size: self.training.batch_size,
            local_steps: match self.training.local_steps {
                Some(s) => s,
                None => samples_per_device.div_ceil(self.training.batch_size.max(1)),
            },
        };
        at("training", hyper.validate())?;
        let solver = self.solver.to_solver();
        at("solver", solver.validate())?;
        let policy = Policy { selection: self.selection()?, edge_update: self.policy.edge_update };
        at("policy", policy.validate(t.edges))?;
        let cfg = SimConfig {
            topology: t.clone(),
            network,
            data: self.data.clone(),
            hyper,
            rho: self.solver.rho,
            solver,
            policy,
            normalize_selected_only: self.normalize_selected_only,
            divergence_layers: self.divergence_layers.clone(),
        };
        at("topology", cfg.validate())?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and validates a config document. Blank input means defaults.
pub fn parse_config(text: &str, origin: &Path) -> Result<RunConfig> {
    let text = if text.trim().is_empty() { "{}" } else { text };
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: crate::error::strip_location(&e),
    })?;
    cfg.to_sim_config()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}
