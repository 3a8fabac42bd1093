//! Min-max bandwidth splitting within one tier.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::SchedulingInstance;
use crate::error::{Error, Result};
use crate::math;
use crate::radio::{self, BandwidthPlan, LinkBudget};

/// One link competing for a tier budget: it finishes at
/// `offset + Z / rate(bandwidth)` and spends `weight * bandwidth` of the
/// budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demand {
    pub offset: f64,
    pub link: LinkBudget,
    pub weight: f64,
}

/// Result of [`min_max_allocate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierAllocation {
    pub bandwidth: Vec<f64>,
    /// Common finishing time of every positive-weight link.
    pub level: f64,
    /// Multiplier of the budget constraint: `d level / d budget`, negated.
    pub budget_multiplier: f64,
    /// Multiplier of each link's `finish <= level` constraint; they sum to
    /// one over the positive-weight links.
    pub link_multipliers: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityRoot {
    pub bandwidth: f64,
    /// Set when the root lay outside `[0, max_bandwidth]`.
    pub clamped: bool,
}

/// Solves `h(B) = ratio` for the bandwidth at which one more Hz shortens the
/// transfer by `ratio` seconds, where `h` is
/// [`radio::marginal_latency_reduction`]. The result is clamped to
/// `[0, max_bandwidth]`.
pub fn bandwidth_stationarity_root(
    ratio: f64,
    payload_bits: f64,
    link: &LinkBudget,
    noise_density: f64,
    max_bandwidth: f64,
) -> Result<StationarityRoot> {
    if ratio.is_nan() {
        return Err(Error::NonFiniteValue);
    }
    if payload_bits == 0.0 || !(ratio > 0.0) {
        return Ok(StationarityRoot { bandwidth: max_bandwidth, clamped: true });
    }
    if ratio.is_infinite() {
        return Ok(StationarityRoot { bandwidth: 0.0, clamped: true });
    }
    let h = |b: f64| radio::marginal_latency_reduction(b, payload_bits, link, noise_density);
    let (mut lo, mut hi) = (1.0, 1.0);
    while h(lo) < ratio {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(StationarityRoot { bandwidth: 0.0, clamped: true });
        }
    }
    while h(hi) > ratio {
        hi *= 2.0;
        if hi > max_bandwidth * 2.0 && hi > 1e300 {
            break;
        }
    }
    for _ in 0..400 {
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
        let mid = math::sqrt(lo * hi);
        if h(mid) > ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = math::sqrt(lo * hi);
    if root > max_bandwidth {
        Ok(StationarityRoot { bandwidth: max_bandwidth, clamped: true })
    } else {
        Ok(StationarityRoot { bandwidth: root, clamped: false })
    }
}

fn need(d: &Demand, level: f64, payload_bits: f64, n0: f64) -> f64 {
    radio::min_bandwidth_for_latency(level - d.offset, payload_bits, &d.link, n0).unwrap_or(f64::INFINITY)
}

fn weighted_need(demands: &[Demand], level: f64, payload_bits: f64, n0: f64) -> f64 {
    demands
        .iter()
        .filter(|d| d.weight > 0.0)
        .map(|d| d.weight * need(d, level, payload_bits, n0))
        .sum()
}

/// Minimizes the latest finishing time among positive-weight links subject to
/// `sum weight_i * B_i <= budget`. Every positive-weight link finishes at the
/// same level; zero-weight links get the bandwidth that would bring them to
/// that level, without charging the budget.
pub fn min_max_allocate(demands: &[Demand], budget: f64, payload_bits: f64, noise_density: f64) -> Result<TierAllocation> {
    if demands.is_empty() {
        return Err(Error::EmptyInput("demands"));
    }
    crate::model::positive("budget", budget)?;
    for d in demands {
        if !(d.weight >= 0.0) || d.weight.is_infinite() {
            return Err(Error::InvalidParameter { name: "weight", value: d.weight });
        }
        if !d.offset.is_finite() {
            return Err(Error::NonFiniteValue);
        }
    }
    let total_weight: f64 = demands.iter().map(|d| d.weight).sum();
    if total_weight <= 0.0 {
        return Ok(TierAllocation {
            bandwidth: vec![0.0; demands.len()],
            level: 0.0,
            budget_multiplier: 0.0,
            link_multipliers: vec![0.0; demands.len()],
        });
    }
    if payload_bits == 0.0 {
        let level = demands
            .iter()
            .filter(|d| d.weight > 0.0)
            .map(|d| d.offset)
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(TierAllocation {
            bandwidth: vec![budget / total_weight; demands.len()],
            level,
            budget_multiplier: 0.0,
            link_multipliers: vec![0.0; demands.len()],
        });
    }

    let mut lo = demands
        .iter()
        .filter(|d| d.weight > 0.0)
        .map(|d| d.offset + radio::latency_floor(payload_bits, &d.link, noise_density))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut gap = lo.abs().max(1e-9);
    let mut hi = lo + gap;
    while weighted_need(demands, hi, payload_bits, noise_density) > budget {
        gap *= 2.0;
        hi = lo + gap;
        if !hi.is_finite() {
            return Err(Error::Infeasible("tier budget cannot carry the payload".into()));
        }
    }
    for _ in 0..300 {
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if weighted_need(demands, mid, payload_bits, noise_density) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let level = hi;
    let mut bandwidth: Vec<f64> = demands.iter().map(|d| need(d, level, payload_bits, noise_density)).collect();
    // Hand out the sliver of budget the bisection left unused.
    let used: f64 = demands.iter().zip(&bandwidth).map(|(d, b)| d.weight * b).sum();
    if used > 0.0 && used < budget {
        let scale = budget / used;
        for (d, b) in demands.iter().zip(bandwidth.iter_mut()) {
            if d.weight > 0.0 {
                *b *= scale;
            }
        }
    }
    let level = demands
        .iter()
        .zip(&bandwidth)
        .filter(|(d, _)| d.weight > 0.0)
        .map(|(d, &b)| d.offset + radio::link_latency(payload_bits, b, &d.link, noise_density))
        .fold(f64::NEG_INFINITY, f64::max);

    let slopes: Vec<f64> = demands
        .iter()
        .zip(&bandwidth)
        .map(|(d, &b)| radio::marginal_latency_reduction(b, payload_bits, &d.link, noise_density))
        .collect();
    let inverse_sum: f64 = demands
        .iter()
        .zip(&slopes)
        .filter(|(d, _)| d.weight > 0.0)
        .map(|(d, h)| d.weight / h)
        .sum();
    let budget_multiplier = 1.0 / inverse_sum;
    let link_multipliers = demands
        .iter()
        .zip(&slopes)
        .map(|(d, h)| budget_multiplier * d.weight / h)
        .collect();
    Ok(TierAllocation { bandwidth, level, budget_multiplier, link_multipliers })
}

/// Splits `B_e` over every device of every edge so that the slowest
/// compute + upload finishes as early as possible.
pub fn device_tier(inst: &SchedulingInstance) -> Result<TierAllocation> {
    let demands: Vec<Demand> = inst
        .edges
        .iter()
        .flat_map(|e| &e.devices)
        .map(|d| Demand { offset: d.compute_latency(), link: d.uplink, weight: 1.0 })
        .collect();
    min_max_allocate(&demands, inst.edge_tier_bandwidth, inst.payload_bits, inst.noise_density)
}

/// Splits `B_c` over the edges with `sum weight_k * B_ck <= B_c`, with every
/// edge starting its upload at `device_level`.
pub fn cloud_tier(inst: &SchedulingInstance, device_level: f64, weights: &[f64]) -> Result<TierAllocation> {
    if weights.len() != inst.num_edges() {
        return Err(Error::DimensionMismatch { expected: inst.num_edges(), found: weights.len() });
    }
    let demands: Vec<Demand> = inst
        .edges
        .iter()
        .zip(weights)
        .map(|(e, &w)| Demand { offset: device_level, link: e.uplink, weight: w })
        .collect();
    min_max_allocate(&demands, inst.cloud_tier_bandwidth, inst.payload_bits, inst.noise_density)
}

pub(crate) fn reshape_devices(inst: &SchedulingInstance, flat: &[f64]) -> Vec<Vec<f64>> {
    let mut it = flat.iter().copied();
    inst.edges
        .iter()
        .map(|e| it.by_ref().take(e.devices.len()).collect())
        .collect()
}

/// Exact bandwidth plan for a binary selection: the given device tier and a
/// min-max cloud tier over the selected edges. Unselected edges get no
/// cloud bandwidth.
pub fn allocate_for_selection(inst: &SchedulingInstance, selected: &[bool], device: &TierAllocation) -> Result<BandwidthPlan> {
    let weights = super::indicator(selected);
    let cloud = cloud_tier(inst, device.level, &weights)?;
    Ok(BandwidthPlan {
        device_ul: reshape_devices(inst, &device.bandwidth),
        edge_ul: cloud
            .bandwidth
            .iter()
            .zip(selected)
            .map(|(&b, &s)| if s { b } else { 0.0 })
            .collect(),
    })
}
