//! Round-by-round simulation of the device -> edge -> cloud procedure on a
//! simulated clock.
//!
//! Every cloud round, all edges train: devices start from their edge's
//! model, run local SGD, and the edge aggregates them. The cloud then picks
//! a subset of edges, folds their models into the global one, and refreshes
//! the selected edges. Unselected edges keep their own models and fall one
//! round further behind. The clock advances by the slowest selected edge's
//! full round time, downlinks included.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use core::fmt;
use core::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::aggregation::{self, EdgeModelReport, LayerSet};
use crate::data::{FederatedData, SyntheticSpec};
use crate::error::{Error, Result};
use crate::model::{self, DeviceProfile, LocalDataset, ParamVector, TrainingHyper};
use crate::radio::{self, BandwidthPlan, DeviceLatency, LinkBudget, NetworkConfig};
use crate::rng;
use crate::scheduler::{self, DeviceTerms, EdgeTerms, SchedulingInstance, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// The ADMM scheduler.
    Proposed,
    /// `m` edges drawn uniformly each round.
    Random(usize),
    Full,
    /// The `m` edges with the shortest round under an even bandwidth split.
    Fastest(usize),
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selection::Proposed => f.write_str("proposed"),
            Selection::Random(m) => write!(f, "random-{m}"),
            Selection::Full => f.write_str("full"),
            Selection::Fastest(m) => write!(f, "fastest-{m}"),
        }
    }
}

/// Parses `proposed`, `full`, `random-M` or `fastest-M`.
impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(alloc::format!("unknown selection `{s}`"));
        match s {
            "proposed" => return Ok(Selection::Proposed),
            "full" => return Ok(Selection::Full),
            _ => {}
        }
        let (kind, m) = s.split_once('-').ok_or_else(bad)?;
        let m: usize = m.parse().map_err(|_| bad())?;
        match kind {
            "random" => Ok(Selection::Random(m)),
            "fastest" => Ok(Selection::Fastest(m)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeUpdate {
    /// Blend toward the cloud model by the layer divergence.
    Elastic,
    /// Overwrite with the cloud model.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub selection: Selection,
    pub edge_update: EdgeUpdate,
}

impl Policy {
    pub fn validate(&self, edges: usize) -> Result<()> {
        match self.selection {
            Selection::Random(m) | Selection::Fastest(m) if m == 0 || m > edges => {
                Err(Error::InvalidParameter { name: "m", value: m as f64 })
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        let sel = self.selection;
        let upd = match self.edge_update {
            EdgeUpdate::Elastic => "elastic",
            EdgeUpdate::Normal => "normal",
        };
        alloc::format!("{sel}/{upd}")
    }
}

/// Placement and hardware ranges; every quantity is drawn uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Topology {
    pub edges: usize,
    pub devices_per_edge: usize,
    pub edge_distance_km: (f64, f64),
    pub device_distance_km: (f64, f64),
    pub cpu_freq_hz: (f64, f64),
    pub cycles_per_sample: f64,
}

impl Default for Topology {
    fn default() -> Self {
        Topology {
            edges: 10,
            devices_per_edge: 2,
            edge_distance_km: (0.1, 1.0),
            device_distance_km: (0.05, 0.5),
            cpu_freq_hz: (2e9, 4e9),
            cycles_per_sample: 2e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub topology: Topology,
    pub network: NetworkConfig,
    pub data: SyntheticSpec,
    pub hyper: TrainingHyper,
    pub rho: f64,
    pub solver: SolverConfig,
    pub policy: Policy,
    /// Divide by the selected edges' data instead of all edges' data in the
    /// cloud update.
    pub normalize_selected_only: bool,
    /// Layers compared by the elastic update; empty means every layer.
    pub divergence_layers: Vec<String>,
}

impl Default for SimConfig {
    /// Ten edges of two devices, default radio with a payload sized to the
    /// logistic model, one local epoch per round, `rho = 0.8`, proposed
    /// selection with elastic updates.
    fn default() -> Self {
        let data = SyntheticSpec::default();
        SimConfig {
            topology: Topology::default(),
            network: NetworkConfig::with_defaults(NetworkConfig::payload_for_params(data.model_dim())),
            data,
            hyper: TrainingHyper { learning_rate: 0.1, batch_size: 50, local_steps: 10 },
            rho: 0.8,
            solver: SolverConfig::default(),
            policy: Policy { selection: Selection::Proposed, edge_update: EdgeUpdate::Elastic },
            normalize_selected_only: false,
            divergence_layers: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let t = &self.topology;
        if t.edges == 0 || t.devices_per_edge == 0 {
            return Err(Error::InvalidConfig("topology needs at least one edge and device".into()));
        }
        model::positive("cycles_per_sample", t.cycles_per_sample)?;
        for (name, (lo, hi)) in [
            ("edge_distance_km", t.edge_distance_km),
            ("device_distance_km", t.device_distance_km),
            ("cpu_freq_hz", t.cpu_freq_hz),
        ] {
            model::positive(name, lo)?;
            if !(hi >= lo) || hi.is_infinite() {
                return Err(Error::InvalidParameter { name, value: hi });
            }
        }
        self.network.validate()?;
        self.data.validate(t.edges * t.devices_per_edge)?;
        self.hyper.validate()?;
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter { name: "rho", value: self.rho });
        }
        self.solver.validate()?;
        self.policy.validate(t.edges)?;
        self.divergence_layer_set(self.data.model_dim()).map(|_| ())
    }

    fn divergence_layer_set(&self, dim: usize) -> Result<LayerSet> {
        let probe = ParamVector::zeros(dim)?;
        if self.divergence_layers.is_empty() {
            return Ok(LayerSet::all_of(&probe));
        }
        let set = LayerSet::new(self.divergence_layers.clone())?;
        if let Some(bad) = set.names().iter().find(|n| probe.layer(n).is_none()) {
            return Err(Error::MissingLayer(bad.clone()));
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSite {
    pub profile: DeviceProfile,
    /// Device-to-edge link, also used for the edge's broadcast with the
    /// edge's downlink power.
    pub uplink: LinkBudget,
    pub downlink: LinkBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSite {
    pub distance_to_cloud_km: f64,
    pub uplink: LinkBudget,
    pub downlink: LinkBudget,
    pub devices: Vec<DeviceSite>,
}

impl EdgeSite {
    pub fn data_count(&self) -> u64 {
        self.devices.iter().map(|d| d.profile.dataset.len() as u64).sum()
    }
}

/// Everything fixed for a run: sites, data, settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub edges: Vec<EdgeSite>,
    pub test: LocalDataset,
    pub network: NetworkConfig,
    pub hyper: TrainingHyper,
    pub rho: f64,
    pub solver: SolverConfig,
    pub policy: Policy,
    pub normalize_selected_only: bool,
    pub layers: LayerSet,
}

fn draw(r: &mut impl rand::Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo { r.gen_range(lo..hi) } else { lo }
}

/// Places edges and devices (seeded) and attaches the device datasets in
/// edge-major order.
pub fn build_scenario(cfg: &SimConfig, data: FederatedData, seed: u64) -> Result<Scenario> {
    cfg.validate()?;
    let t = &cfg.topology;
    if data.devices.len() != t.edges * t.devices_per_edge {
        return Err(Error::DimensionMismatch { expected: t.edges * t.devices_per_edge, found: data.devices.len() });
    }
    let dim = data.test.dim().ok_or(Error::EmptyDataset)?;
    let layers = cfg.divergence_layer_set(dim)?;
    let net = cfg.network;
    let mut r = rng::stream(seed, &[0x7090]);
    let mut datasets = data.devices.into_iter();
    let mut edges = Vec::with_capacity(t.edges);
    for _ in 0..t.edges {
        let d_cloud = draw(&mut r, t.edge_distance_km);
        let g_cloud = radio::path_loss_gain(d_cloud)?;
        let mut devices = Vec::with_capacity(t.devices_per_edge);
        for _ in 0..t.devices_per_edge {
            let d = draw(&mut r, t.device_distance_km);
            let f = draw(&mut r, t.cpu_freq_hz);
            let g = radio::path_loss_gain(d)?;
            let dataset = datasets.next().expect("length checked");
            devices.push(DeviceSite {
                profile: DeviceProfile::new(dataset, t.cycles_per_sample, f, net.device_ul_power, d)?,
                uplink: LinkBudget::new(g, net.device_ul_power)?,
                downlink: LinkBudget::new(g, net.edge_dl_power)?,
            });
        }
        edges.push(EdgeSite {
            distance_to_cloud_km: d_cloud,
            uplink: LinkBudget::new(g_cloud, net.edge_ul_power)?,
            downlink: LinkBudget::new(g_cloud, net.cloud_dl_power)?,
            devices,
        });
    }
    Ok(Scenario {
        edges,
        test: data.test,
        network: net,
        hyper: cfg.hyper,
        rho: cfg.rho,
        solver: cfg.solver,
        policy: cfg.policy,
        normalize_selected_only: cfg.normalize_selected_only,
        layers,
    })
}

/// Per-edge timing state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeClock {
    pub edge_id: usize,
    /// Simulated time at which the edge's latest aggregate is available.
    pub ready_at: f64,
    /// Cloud rounds since the edge last received the cloud model.
    pub staleness: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub cloud_model: ParamVector,
    pub edge_models: Vec<ParamVector>,
    pub device_models: Vec<Vec<ParamVector>>,
    pub clocks: Vec<EdgeClock>,
    pub wall_clock: f64,
    pub round: u64,
}

impl SimState {
    /// All models start at zero.
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let dim = scenario.test.dim().ok_or(Error::EmptyDataset)?;
        let zero = ParamVector::zeros(dim)?;
        Ok(SimState {
            cloud_model: zero.clone(),
            edge_models: vec![zero.clone(); scenario.edges.len()],
            device_models: scenario.edges.iter().map(|e| vec![zero.clone(); e.devices.len()]).collect(),
            clocks: (0..scenario.edges.len())
                .map(|k| EdgeClock { edge_id: k, ready_at: 0.0, staleness: 0 })
                .collect(),
            wall_clock: 0.0,
            round: 0,
        })
    }
}

/// Latency terms of one edge under a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeTiming {
    /// `max_n (compute + uplink + downlink)`.
    pub edge_round: f64,
    pub cloud_uplink: f64,
    pub cloud_downlink: f64,
    /// Full round time: edge round plus both cloud legs.
    pub total: f64,
    /// Scheduler latency: `max_n (compute + uplink) + cloud_uplink`.
    pub objective: f64,
}

/// Timing of edge `k`. Its devices' broadcast shares the edge's device
/// bandwidth; the cloud broadcast uses the whole cloud tier.
pub fn edge_timing(scenario: &Scenario, k: usize, plan: &BandwidthPlan) -> Result<EdgeTiming> {
    let net = &scenario.network;
    let z = net.payload_bits;
    let n0 = net.noise_density;
    let edge = &scenario.edges[k];
    let b_k = plan.edge_downlink_bandwidth(k);
    let per_device: Vec<DeviceLatency> = edge
        .devices
        .iter()
        .zip(&plan.device_ul[k])
        .map(|(d, &b)| {
            Ok(DeviceLatency {
                compute: radio::compute_latency(&d.profile)?,
                uplink: radio::link_latency(z, b, &d.uplink, n0),
                downlink: radio::link_latency(z, b_k, &d.downlink, n0),
            })
        })
        .collect::<Result<_>>()?;
    let edge_round = radio::edge_round_latency(&per_device)?;
    let cloud_uplink = radio::link_latency(z, plan.edge_ul[k], &edge.uplink, n0);
    let cloud_downlink = radio::link_latency(z, net.cloud_tier_bandwidth, &edge.downlink, n0);
    let pairs: Vec<(f64, f64)> = per_device.iter().map(|d| (d.compute, d.uplink)).collect();
    Ok(EdgeTiming {
        edge_round,
        cloud_uplink,
        cloud_downlink,
        total: radio::total_round_latency(edge_round, radio::cloud_round_latency(cloud_uplink, cloud_downlink)),
        objective: radio::objective_latency(&pairs, cloud_uplink)?,
    })
}

/// The scheduler's view of the scenario with importances `sigma`.
pub fn scheduling_instance(scenario: &Scenario, sigma: &[f64]) -> Result<SchedulingInstance> {
    if sigma.len() != scenario.edges.len() {
        return Err(Error::DimensionMismatch { expected: scenario.edges.len(), found: sigma.len() });
    }
    let net = &scenario.network;
    Ok(SchedulingInstance {
        edges: scenario
            .edges
            .iter()
            .zip(sigma)
            .map(|(e, &s)| EdgeTerms {
                importance: s,
                uplink: e.uplink,
                devices: e
                    .devices
                    .iter()
                    .map(|d| DeviceTerms {
                        cycles_per_sample: d.profile.cycles_per_sample,
                        samples: d.profile.dataset.len() as u64,
                        cpu_freq: d.profile.cpu_freq,
                        uplink: d.uplink,
                    })
                    .collect(),
            })
            .collect(),
        edge_tier_bandwidth: net.edge_tier_bandwidth,
        cloud_tier_bandwidth: net.cloud_tier_bandwidth,
        payload_bits: net.payload_bits,
        rho: scenario.rho,
        noise_density: net.noise_density,
    })
}

/// What happened in one cloud round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub selected: Vec<usize>,
    pub sigma: Vec<f64>,
    pub plan: BandwidthPlan,
    pub timings: Vec<EdgeTiming>,
    /// Clock advance: the longest selected round time, 0 if none.
    pub elapsed: f64,
}

fn devices_per_edge(scenario: &Scenario) -> Vec<usize> {
    scenario.edges.iter().map(|e| e.devices.len()).collect()
}

fn select(scenario: &Scenario, sigma: &[f64], round: u64, seed: u64) -> Result<(Vec<bool>, BandwidthPlan)> {
    let k = scenario.edges.len();
    let dpe = devices_per_edge(scenario);
    let uniform = |sel: &[bool]| BandwidthPlan::uniform(&dpe, sel, &scenario.network);
    let mask = |ids: &[usize]| -> Vec<bool> { (0..k).map(|i| ids.contains(&i)).collect() };
    Ok(match scenario.policy.selection {
        Selection::Proposed => {
            let inst = scheduling_instance(scenario, sigma)?;
            let s = scheduler::admm_solve(&inst, &scenario.solver)?;
            (s.selected, s.plan)
        }
        Selection::Full => {
            let sel = vec![true; k];
            let plan = uniform(&sel);
            (sel, plan)
        }
        Selection::Random(m) => {
            let mut r = rng::stream(seed, &[round, 0x5E1EC7]);
            let mut ids = index::sample(&mut r, k, m).into_vec();
            ids.sort_unstable();
            let sel = mask(&ids);
            let plan = uniform(&sel);
            (sel, plan)
        }
        Selection::Fastest(m) => {
            let probe = uniform(&vec![true; m.min(k)].into_iter().chain(vec![false; k - m.min(k)]).collect::<Vec<_>>());
            // Every edge gets the per-edge share it would have if selected.
            let share = probe.edge_ul[0];
            let even = BandwidthPlan { device_ul: probe.device_ul, edge_ul: vec![share; k] };
            let mut order: Vec<(f64, usize)> = (0..k)
                .map(|i| Ok((edge_timing(scenario, i, &even)?.total, i)))
                .collect::<Result<_>>()?;
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let ids: Vec<usize> = order.iter().take(m).map(|p| p.1).collect();
            let sel = mask(&ids);
            let plan = uniform(&sel);
            (sel, plan)
        }
    })
}

/// Local training on every edge for the upcoming round: devices start from
/// their edge's model, the edge aggregates them. Returns each edge's
/// importance, scored at the devices' trained models.
pub fn train_edges(scenario: &Scenario, state: &mut SimState, seed: u64) -> Result<Vec<f64>> {
    let round = state.round + 1;
    let mut sigma = Vec::with_capacity(scenario.edges.len());
    for (k, edge) in scenario.edges.iter().enumerate() {
        let mut locals = Vec::with_capacity(edge.devices.len());
        let mut gnvs = Vec::with_capacity(edge.devices.len());
        for (n, dev) in edge.devices.iter().enumerate() {
            let s = rng::derive_seed(seed, &[round, k as u64, n as u64]);
            let w = model::local_train_round(&state.edge_models[k], &dev.profile, &scenario.hyper, s)?;
            gnvs.push(model::device_gnv(&w, &dev.profile.dataset)?);
            locals.push((w.clone(), dev.profile.dataset.len() as u64));
            state.device_models[k][n] = w;
        }
        state.edge_models[k] = aggregation::edge_aggregate(&locals)?;
        sigma.push(model::edge_gnv(&gnvs)?);
    }
    Ok(sigma)
}

/// One cloud round: local training on every edge, edge aggregation,
/// importance scoring, selection, cloud aggregation, edge refresh and clock
/// update.
pub fn run_cloud_round(scenario: &Scenario, state: &mut SimState, seed: u64) -> Result<RoundReport> {
    let round = state.round + 1;
    let k_edges = scenario.edges.len();
    let sigma = train_edges(scenario, state, seed)?;

    let (selected, plan) = select(scenario, &sigma, round, seed)?;
    let timings: Vec<EdgeTiming> = (0..k_edges).map(|k| edge_timing(scenario, k, &plan)).collect::<Result<_>>()?;

    let reports: Vec<EdgeModelReport> = (0..k_edges)
        .filter(|&k| selected[k])
        .map(|k| EdgeModelReport {
            edge_id: k,
            model: state.edge_models[k].clone(),
            data_count: scenario.edges[k].data_count(),
            gnv: sigma[k],
        })
        .collect();
    let total_data: u64 = if scenario.normalize_selected_only {
        reports.iter().map(|r| r.data_count).sum()
    } else {
        scenario.edges.iter().map(EdgeSite::data_count).sum()
    };
    if !reports.is_empty() {
        state.cloud_model = aggregation::cloud_aggregate(&state.cloud_model, &reports, total_data)?;
    }

    for r in &reports {
        let k = r.edge_id;
        state.edge_models[k] = match scenario.policy.edge_update {
            EdgeUpdate::Normal => state.cloud_model.clone(),
            EdgeUpdate::Elastic => {
                let eps = match aggregation::layer_divergence(&state.edge_models[k], &state.cloud_model, &scenario.layers) {
                    Ok(e) => e,
                    Err(Error::DegenerateReference) => 1.0,
                    Err(e) => return Err(e),
                };
                aggregation::elastic_update(&state.edge_models[k], &state.cloud_model, eps)?
            }
        };
    }

    let start = state.wall_clock;
    let elapsed = (0..k_edges)
        .filter(|&k| selected[k])
        .map(|k| timings[k].total)
        .fold(0.0, f64::max);
    state.wall_clock = start + elapsed;
    for (k, clock) in state.clocks.iter_mut().enumerate() {
        if selected[k] {
            clock.staleness = 0;
            clock.ready_at = state.wall_clock;
        } else {
            clock.staleness += 1;
            clock.ready_at = start + timings[k].total;
        }
    }
    state.round = round;
    Ok(RoundReport {
        selected: (0..k_edges).filter(|&k| selected[k]).collect(),
        sigma,
        plan,
        timings,
        elapsed,
    })
}

/// Accuracy (with `sign(0)` counted as +1) and mean logistic loss.
pub fn evaluate(w: &ParamVector, test: &LocalDataset) -> Result<(f64, f64)> {
    let loss = model::logistic_loss(w, test)?;
    let flat = w.to_flat();
    let correct = test
        .samples()
        .iter()
        .filter(|s| {
            let score: f64 = s.features.iter().zip(&flat).map(|(x, w)| x * w).sum();
            let predicted = if score >= 0.0 { 1.0 } else { -1.0 };
            predicted == s.label
        })
        .count();
    Ok((correct as f64 / test.len() as f64, loss))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub round: u64,
    pub wall_clock_s: f64,
    pub policy: String,
    pub selected_count: usize,
    pub sum_sigma: f64,
    pub max_latency_s: f64,
    pub test_acc: f64,
    pub test_loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsLog {
    pub rows: Vec<MetricsRow>,
}

impl MetricsLog {
    pub fn final_accuracy(&self) -> Option<f64> {
        self.rows.last().map(|r| r.test_acc)
    }
}

/// Runs `rounds` cloud rounds from a fresh state. Row 0 is the initial
/// evaluation.
pub fn run_simulation(scenario: &Scenario, rounds: u64, seed: u64) -> Result<MetricsLog> {
    let mut state = SimState::new(scenario)?;
    let label = scenario.policy.label();
    let (acc, loss) = evaluate(&state.cloud_model, &scenario.test)?;
    let mut log = MetricsLog {
        rows: vec![MetricsRow {
            round: 0,
            wall_clock_s: 0.0,
            policy: label.clone(),
            selected_count: 0,
            sum_sigma: 0.0,
            max_latency_s: 0.0,
            test_acc: acc,
            test_loss: loss,
        }],
    };
    for _ in 0..rounds {
        let report = run_cloud_round(scenario, &mut state, seed)?;
        let (acc, loss) = evaluate(&state.cloud_model, &scenario.test)?;
        log.rows.push(MetricsRow {
            round: state.round,
            wall_clock_s: state.wall_clock,
            policy: label.clone(),
            selected_count: report.selected.len(),
            sum_sigma: report.selected.iter().map(|&k| report.sigma[k]).sum(),
            max_latency_s: report.elapsed,
            test_acc: acc,
            test_loss: loss,
        });
    }
    Ok(log)
}

/// Generates the workload, builds the scenario and runs it.
pub fn simulate(cfg: &SimConfig, rounds: u64, seed: u64) -> Result<MetricsLog> {
    let t = &cfg.topology;
    let data = crate::data::generate(&cfg.data, t.edges, t.devices_per_edge, seed)?;
    let scenario = build_scenario(cfg, data, seed)?;
    run_simulation(&scenario, rounds, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sample;

    #[test]
    fn evaluate_hand_counted() {
        let w = ParamVector::single(vec![1.0, -1.0]).unwrap();
        let s = |a: f64, b: f64, y: f64| Sample { features: vec![a, b], label: y };
        // scores: 1, -1, 0, 2 -> predictions +, -, +, +
        let test = LocalDataset::new(vec![s(1.0, 0.0, 1.0), s(0.0, 1.0, 1.0), s(1.0, 1.0, -1.0), s(2.0, 0.0, 1.0)]).unwrap();
        let (acc, _) = evaluate(&w, &test).unwrap();
        assert_eq!(acc, 0.5);
        let zero = ParamVector::zeros(2).unwrap();
        let (acc, loss) = evaluate(&zero, &test).unwrap();
        assert_eq!(acc, 0.75);
        assert!((loss - core::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn policy_labels_and_bounds() {
        let p = Policy { selection: Selection::Random(5), edge_update: EdgeUpdate::Elastic };
        assert_eq!(p.label(), "random-5/elastic");
        assert!(p.validate(4).is_err());
        assert!(p.validate(5).is_ok());
        for s in ["proposed", "full", "random-5", "fastest-3"] {
            assert_eq!(s.parse::<Selection>().unwrap().to_string(), s);
        }
        for s in ["random", "random-x", "slowest-2", ""] {
            assert!(s.parse::<Selection>().is_err());
        }
    }
}
