use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DeviceTerms, EdgeTerms, SchedulingInstance};
use crate::error::Result;
use crate::radio::{path_loss_gain, LinkBudget, NetworkConfig};
use crate::rng;

/// Distribution of random scheduling instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InstanceSpec {
    pub edges: usize,
    pub devices_per_edge: usize,
    pub rho: f64,
    pub payload_bits: f64,
    pub importance_range: (f64, f64),
    pub edge_distance_km: (f64, f64),
    pub device_distance_km: (f64, f64),
    pub cpu_freq_hz: (f64, f64),
    pub cycles_per_sample: f64,
    pub samples_per_device: u64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec {
            edges: 4,
            devices_per_edge: 2,
            rho: 0.8,
            payload_bits: 1.6e6,
            importance_range: (0.005, 0.15),
            edge_distance_km: (0.1, 1.0),
            device_distance_km: (0.05, 0.5),
            cpu_freq_hz: (2e9, 4e9),
            cycles_per_sample: 2e4,
            samples_per_device: 500,
        }
    }
}

fn uniform(r: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo { r.gen_range(lo..hi) } else { lo }
}

/// Draws an instance on the default network, reproducibly from `seed`.
pub fn random_instance(spec: &InstanceSpec, seed: u64) -> Result<SchedulingInstance> {
    let net = NetworkConfig::with_defaults(spec.payload_bits);
    let mut r = rng::stream(seed, &[0x5C4E]);
    let mut edges = Vec::with_capacity(spec.edges);
    for _ in 0..spec.edges {
        let importance = uniform(&mut r, spec.importance_range);
        let uplink = LinkBudget::new(path_loss_gain(uniform(&mut r, spec.edge_distance_km))?, net.edge_ul_power)?;
        let devices = (0..spec.devices_per_edge)
            .map(|_| {
                Ok(DeviceTerms {
                    cycles_per_sample: spec.cycles_per_sample,
                    samples: spec.samples_per_device,
                    cpu_freq: uniform(&mut r, spec.cpu_freq_hz),
                    uplink: LinkBudget::new(
                        path_loss_gain(uniform(&mut r, spec.device_distance_km))?,
                        net.device_ul_power,
                    )?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        edges.push(EdgeTerms { importance, uplink, devices });
    }
    let inst = SchedulingInstance {
        edges,
        edge_tier_bandwidth: net.edge_tier_bandwidth,
        cloud_tier_bandwidth: net.cloud_tier_bandwidth,
        payload_bits: spec.payload_bits,
        rho: spec.rho,
        noise_density: net.noise_density,
    };
    inst.validate()?;
    Ok(inst)
}
