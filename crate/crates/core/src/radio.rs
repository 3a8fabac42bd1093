//! Channel gains, OFDMA Shannon rates and the latency terms of one round.
//!
//! Units: bandwidth in Hz, power in W, noise density in W/Hz, payload in
//! bits, time in seconds. Rates use `log2`, the path-loss law uses `log10`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::model::{positive, DeviceProfile};

/// Bits used to quantize one model parameter on the wire.
pub const BITS_PER_PARAM: f64 = 16.0;

/// Relative slack allowed when checking bandwidth budgets.
pub const BUDGET_REL_TOL: f64 = 1e-9;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    math::pow(10.0, (dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * math::log10(watts) + 30.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// B, Hz.
    pub total_bandwidth: f64,
    /// B_e: shared by every device-to-edge uplink, Hz.
    pub edge_tier_bandwidth: f64,
    /// B_c = B - B_e: shared by the selected edge-to-cloud uplinks, Hz.
    pub cloud_tier_bandwidth: f64,
    /// N0, W/Hz.
    pub noise_density: f64,
    pub device_ul_power: f64,
    pub edge_ul_power: f64,
    pub edge_dl_power: f64,
    pub cloud_dl_power: f64,
    /// Z, bits per model transfer (same on every tier).
    pub payload_bits: f64,
}

impl NetworkConfig {
    /// 20 MHz split 15/5, device uplink 10 dBm, edge uplink 24 dBm, edge
    /// downlink 10 dBm, cloud downlink 24 dBm, N0 = -174 dBm/Hz.
    pub fn with_defaults(payload_bits: f64) -> Self {
        NetworkConfig {
            total_bandwidth: 20e6,
            edge_tier_bandwidth: 15e6,
            cloud_tier_bandwidth: 5e6,
            noise_density: dbm_to_watts(-174.0),
            device_ul_power: dbm_to_watts(10.0),
            edge_ul_power: dbm_to_watts(24.0),
            edge_dl_power: dbm_to_watts(10.0),
            cloud_dl_power: dbm_to_watts(24.0),
            payload_bits,
        }
    }

    /// Payload for a model with `params` parameters at 16 bits each.
    pub fn payload_for_params(params: usize) -> f64 {
        params as f64 * BITS_PER_PARAM
    }

    pub fn validate(&self) -> Result<()> {
        positive("total_bandwidth", self.total_bandwidth)?;
        positive("edge_tier_bandwidth", self.edge_tier_bandwidth)?;
        positive("cloud_tier_bandwidth", self.cloud_tier_bandwidth)?;
        positive("noise_density", self.noise_density)?;
        positive("device_ul_power", self.device_ul_power)?;
        positive("edge_ul_power", self.edge_ul_power)?;
        positive("edge_dl_power", self.edge_dl_power)?;
        positive("cloud_dl_power", self.cloud_dl_power)?;
        positive("payload_bits", self.payload_bits)?;
        let split = self.edge_tier_bandwidth + self.cloud_tier_bandwidth;
        if math::abs(split - self.total_bandwidth) > BUDGET_REL_TOL * self.total_bandwidth {
            return Err(Error::InvalidConfig(alloc::format!(
                "edge tier ({}) + cloud tier ({}) bandwidth must equal total ({})",
                self.edge_tier_bandwidth,
                self.cloud_tier_bandwidth,
                self.total_bandwidth
            )));
        }
        Ok(())
    }
}

/// Transmit power and linear channel gain of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub gain: f64,
    pub tx_power: f64,
}

impl LinkBudget {
    pub fn new(gain: f64, tx_power: f64) -> Result<Self> {
        positive("gain", gain)?;
        positive("tx_power", tx_power)?;
        Ok(LinkBudget { gain, tx_power })
    }

    /// `P g / N0`, Hz: the bandwidth at which SNR equals one.
    pub fn snr_bandwidth(&self, noise_density: f64) -> f64 {
        self.tx_power * self.gain / noise_density
    }
}

/// Per-link bandwidth assignment for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthPlan {
    /// `device_ul[k][n]`: device n of edge k to its edge, Hz.
    pub device_ul: Vec<Vec<f64>>,
    /// `edge_ul[k]`: edge k to the cloud, Hz.
    pub edge_ul: Vec<f64>,
}

impl BandwidthPlan {
    /// Even split: every device gets `B_e / devices`, every selected edge
    /// `B_c / |selected|`, unselected edges nothing.
    pub fn uniform(devices_per_edge: &[usize], selected: &[bool], net: &NetworkConfig) -> Self {
        let total_devices: usize = devices_per_edge.iter().sum();
        let per_device = net.edge_tier_bandwidth / total_devices.max(1) as f64;
        let picked = selected.iter().filter(|s| **s).count();
        let per_edge = if picked == 0 {
            0.0
        } else {
            net.cloud_tier_bandwidth / picked as f64
        };
        BandwidthPlan {
            device_ul: devices_per_edge.iter().map(|&n| alloc::vec![per_device; n]).collect(),
            edge_ul: selected
                .iter()
                .map(|&s| if s { per_edge } else { 0.0 })
                .collect(),
        }
    }

    /// B_k: the edge's total device bandwidth, reused for its downlink.
    pub fn edge_downlink_bandwidth(&self, edge: usize) -> f64 {
        self.device_ul[edge].iter().sum()
    }

    pub fn device_total(&self) -> f64 {
        self.device_ul.iter().flatten().sum()
    }

    /// `sum_k weight_k * B_ck`.
    pub fn weighted_edge_total(&self, weights: &[f64]) -> f64 {
        self.edge_ul.iter().zip(weights).map(|(b, a)| a * b).sum()
    }

    /// Checks both tier budgets (with [`BUDGET_REL_TOL`] slack) and
    /// non-negativity.
    pub fn check(&self, weights: &[f64], edge_budget: f64, cloud_budget: f64) -> Result<()> {
        if self.edge_ul.len() != weights.len() || self.device_ul.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: self.edge_ul.len(),
            });
        }
        let all = self.device_ul.iter().flatten().chain(&self.edge_ul);
        if all.clone().any(|b| !(*b >= 0.0) || b.is_infinite()) {
            return Err(Error::Infeasible("negative or non-finite bandwidth".into()));
        }
        let used_e = self.device_total();
        if used_e > edge_budget * (1.0 + BUDGET_REL_TOL) {
            return Err(Error::Infeasible(alloc::format!(
                "device uplinks use {used_e} Hz of {edge_budget} Hz"
            )));
        }
        let used_c = self.weighted_edge_total(weights);
        if used_c > cloud_budget * (1.0 + BUDGET_REL_TOL) {
            return Err(Error::Infeasible(alloc::format!(
                "edge uplinks use {used_c} Hz of {cloud_budget} Hz"
            )));
        }
        Ok(())
    }
}

/// Linear gain of the `128.1 + 37.6 log10(d)` dB path-loss law.
pub fn path_loss_gain(distance_km: f64) -> Result<f64> {
    positive("distance_km", distance_km)?;
    let loss_db = 128.1 + 37.6 * math::log10(distance_km);
    Ok(math::pow(10.0, -loss_db / 10.0))
}

/// Shannon rate `B log2(1 + P g / (B N0))`, bits/s. Zero bandwidth gives
/// zero rate.
pub fn shannon_rate(bandwidth: f64, link: &LinkBudget, noise_density: f64) -> f64 {
    if !(bandwidth > 0.0) {
        return 0.0;
    }
    if bandwidth.is_infinite() {
        return rate_ceiling(link, noise_density);
    }
    bandwidth * math::log2_1p(link.snr_bandwidth(noise_density) / bandwidth)
}

/// Limit of the rate as bandwidth grows without bound: `P g / (N0 ln 2)`.
pub fn rate_ceiling(link: &LinkBudget, noise_density: f64) -> f64 {
    link.snr_bandwidth(noise_density) / math::LN_2
}

/// Local computation latency `C |D| / f`.
pub fn compute_latency(device: &DeviceProfile) -> Result<f64> {
    compute_latency_raw(device.cycles_per_sample, device.dataset.len(), device.cpu_freq)
}

pub(crate) fn compute_latency_raw(cycles_per_sample: f64, samples: usize, cpu_freq: f64) -> Result<f64> {
    positive("cpu_freq", cpu_freq)?;
    Ok(cycles_per_sample * samples as f64 / cpu_freq)
}

/// `Z / rate`; a non-positive rate yields `f64::INFINITY`.
pub fn transfer_latency(payload_bits: f64, rate: f64) -> f64 {
    if payload_bits == 0.0 {
        0.0
    } else if !(rate > 0.0) {
        f64::INFINITY
    } else {
        payload_bits / rate
    }
}

/// Uplink latency of `payload_bits` over `bandwidth`.
pub fn link_latency(payload_bits: f64, bandwidth: f64, link: &LinkBudget, noise_density: f64) -> f64 {
    transfer_latency(payload_bits, shannon_rate(bandwidth, link, noise_density))
}

/// Smallest achievable transfer latency (infinite bandwidth).
pub fn latency_floor(payload_bits: f64, link: &LinkBudget, noise_density: f64) -> f64 {
    transfer_latency(payload_bits, rate_ceiling(link, noise_density))
}

/// `-d(latency)/dB`: how much one more Hz shortens the transfer.
///
/// Equals `Z / (B log2(1+s/B))^2 * [log2(1+s/B) - s / ((s + B) ln 2)]`
/// with `s = P g / N0`; strictly decreasing in `B`.
pub fn marginal_latency_reduction(bandwidth: f64, payload_bits: f64, link: &LinkBudget, noise_density: f64) -> f64 {
    let s = link.snr_bandwidth(noise_density);
    let x = s / bandwidth;
    let spectral = math::log2_1p(x);
    let slope = math::log1p_minus_ratio(x) / math::LN_2;
    let denom = bandwidth * spectral;
    payload_bits / (denom * denom) * slope
}

/// Smallest bandwidth meeting a transfer-latency target, or `None` when the
/// target is at or below [`latency_floor`].
pub fn min_bandwidth_for_latency(
    target: f64,
    payload_bits: f64,
    link: &LinkBudget,
    noise_density: f64,
) -> Option<f64> {
    if payload_bits == 0.0 {
        return Some(0.0);
    }
    if !(target > 0.0) {
        return None;
    }
    if target.is_infinite() {
        return Some(0.0);
    }
    let required = payload_bits / target;
    let s = link.snr_bandwidth(noise_density);
    if required >= s / math::LN_2 {
        return None;
    }
    // The rate is concave and increasing in B, so Newton's method started
    // below the root climbs to it monotonically.
    let rate = |b: f64| b * math::log2_1p(s / b);
    let slope = |b: f64| math::log1p_minus_ratio(s / b) / math::LN_2;
    let mut b = {
        let mut lo = required * 1e-3;
        while rate(lo) > required {
            lo *= 1e-3;
        }
        lo
    };
    for _ in 0..200 {
        let gap = required - rate(b);
        if gap <= 0.0 {
            break;
        }
        let step = gap / slope(b);
        let next = b + step;
        if !(next > b) || step <= b * 1e-15 {
            b = next.max(b);
            break;
        }
        b = next;
    }
    Some(b)
}

/// Per-device latency triple for one edge round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceLatency {
    pub compute: f64,
    pub uplink: f64,
    pub downlink: f64,
}

/// Edge round latency: the slowest device's compute + upload + download.
pub fn edge_round_latency(per_device: &[DeviceLatency]) -> Result<f64> {
    if per_device.is_empty() {
        return Err(Error::EmptyInput("device latencies"));
    }
    Ok(per_device
        .iter()
        .map(|d| d.compute + d.uplink + d.downlink)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn cloud_round_latency(uplink: f64, downlink: f64) -> f64 {
    uplink + downlink
}

pub fn total_round_latency(edge: f64, cloud: f64) -> f64 {
    edge + cloud
}

/// Downlink-free latency used by the scheduler:
/// `max_n (T_c + T_u) + T_cu`.
pub fn objective_latency(per_device_uplink: &[(f64, f64)], edge_uplink: f64) -> Result<f64> {
    if per_device_uplink.is_empty() {
        return Err(Error::EmptyInput("device latencies"));
    }
    let slowest = per_device_uplink
        .iter()
        .map(|(c, u)| c + u)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(slowest + edge_uplink)
}
