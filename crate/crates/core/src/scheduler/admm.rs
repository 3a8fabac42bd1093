//! Relaxed ADMM with block-coordinate updates.
//!
//! The binary selection `alpha` is relaxed to `[0, 1]` and tied to an
//! auxiliary copy `alpha_aux` through the equality constraints
//! `alpha (1 - alpha_aux) = 0` and `alpha = alpha_aux`, which together force
//! `alpha` to be binary at consensus. Each iteration runs the selection block
//! (PX), the bandwidth block (PB), a dual ascent step, and recomputes the
//! augmented Lagrangian `F`.
//!
//! The cloud-tier budget couples the two blocks: with bandwidth held fixed,
//! raising any `alpha_k` would immediately violate it. PX therefore sees the
//! budget as a linear price on `alpha_k * B_ck` taken from the PB multiplier,
//! and PB re-splits the budget for the new weights.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::alloc_tier::{cloud_tier, device_tier, reshape_devices, TierAllocation};
use super::{evaluate_with_device_tier, Schedule, SchedulingInstance};
use crate::error::{Error, Result};
use crate::math;
use crate::radio::{self, BandwidthPlan};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Penalty parameter nu.
    pub nu: f64,
    /// Stop once `|F_r - F_{r-1}|` drops below this.
    pub eps_min: f64,
    pub max_iters: usize,
    /// Relaxed values at or above this are rounded to selected.
    pub round_threshold: f64,
    pub init: InitRule,
}

/// Starting value of `alpha` and `alpha_aux`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitRule {
    AllSelected,
    Constant(f64),
    /// 1 where the edge's importance outweighs the latency price of its
    /// cloud bandwidth under full selection, else 0; all zeros instead if
    /// that selection scores worse than selecting nothing.
    Marginal,
    /// 0.5 everywhere, with `lambda` chosen so the penalty terms are
    /// stationary at the start and the first move follows the objective.
    Neutral,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { nu: 1.0, eps_min: 1e-4, max_iters: 200, round_threshold: 0.5, init: InitRule::Neutral }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        crate::model::positive("nu", self.nu)?;
        crate::model::positive("eps_min", self.eps_min)?;
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter { name: "max_iters", value: 0.0 });
        }
        if !(0.0..=1.0).contains(&self.round_threshold) {
            return Err(Error::InvalidParameter { name: "round_threshold", value: self.round_threshold });
        }
        Ok(())
    }
}

/// Multipliers of both blocks from the latest iteration.
///
/// Each budget constraint is a single scalar constraint, so its multiplier
/// is a scalar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSet {
    /// `alpha_k L_k <= t`.
    pub mu: Vec<f64>,
    /// `mu / (1 - rho)`; sums to one when `rho < 1`.
    pub kappa: Vec<f64>,
    /// `kappa_k (1 - rho) alpha_k`.
    pub zeta: Vec<f64>,
    /// `alpha_k >= 0`.
    pub psi: Vec<f64>,
    /// `alpha_k <= 1`.
    pub xi: Vec<f64>,
    /// Price on the cloud-tier budget used inside PX.
    pub cloud_price: f64,
    /// Device-tier budget multiplier.
    pub beta: f64,
    /// Per-device level multipliers, flattened edge by edge.
    pub device_link: Vec<f64>,
    /// Cloud-tier budget multiplier.
    pub cloud_budget: f64,
    /// Per-edge level multipliers of the cloud tier.
    pub tau: Vec<f64>,
}

impl MultiplierSet {
    fn zeros(k: usize, devices: usize) -> Self {
        MultiplierSet {
            mu: vec![0.0; k],
            kappa: vec![0.0; k],
            zeta: vec![0.0; k],
            psi: vec![0.0; k],
            xi: vec![0.0; k],
            cloud_price: 0.0,
            beta: 0.0,
            device_link: vec![0.0; devices],
            cloud_budget: 0.0,
            tau: vec![0.0; k],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmState {
    pub alpha: Vec<f64>,
    pub alpha_aux: Vec<f64>,
    /// Dual of `alpha (1 - alpha_aux) = 0`.
    pub lambda: Vec<f64>,
    /// Dual of `alpha = alpha_aux`.
    pub lambda_aux: Vec<f64>,
    pub plan: BandwidthPlan,
    /// X: common device-tier finishing time.
    pub device_level: f64,
    pub multipliers: MultiplierSet,
    pub f_value: f64,
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionUpdate {
    pub alpha: Vec<f64>,
    /// The epigraph variable `t = max_k alpha_k L_k`.
    pub level: f64,
    pub mu: Vec<f64>,
    pub kappa: Vec<f64>,
    pub zeta: Vec<f64>,
    pub psi: Vec<f64>,
    pub xi: Vec<f64>,
    /// Largest violation among stationarity, complementary slackness and
    /// sign conditions.
    pub kkt_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthUpdate {
    pub alpha_aux: Vec<f64>,
    pub plan: BandwidthPlan,
    pub device: TierAllocation,
    pub cloud: TierAllocation,
}

/// Edge latencies `L_k = X + T_cu,k(B_ck)` under `plan`.
fn edge_latencies(inst: &SchedulingInstance, plan: &BandwidthPlan, device_level: f64) -> Vec<f64> {
    inst.edges
        .iter()
        .zip(&plan.edge_ul)
        .map(|(e, &b)| device_level + radio::link_latency(inst.payload_bits, b, &e.uplink, inst.noise_density))
        .collect()
}

/// Quadratic `c_k(a) = q/2 a^2 + l a + const` of one coordinate in PX.
#[derive(Clone, Copy)]
struct Coord {
    q: f64,
    l: f64,
}

impl Coord {
    fn slope(&self, a: f64) -> f64 {
        self.q * a + self.l
    }

    fn free_min(&self) -> f64 {
        -self.l / self.q
    }
}

/// PX: minimizes over `alpha in [0, 1]^K`
///
/// `-rho sigma.alpha + price sum alpha_k B_ck + (1 - rho) max_k alpha_k L_k
///  + 1/(2 nu) sum (alpha_k (1 - aux_k) + nu lambda_k)^2
///  + 1/(2 nu) sum (alpha_k - aux_k + nu lambda_aux_k)^2`
///
/// with bandwidth fixed. The max term is handled through its epigraph
/// `alpha_k L_k <= t`, reducing the problem to a one-dimensional convex
/// search over `t`.
pub fn solve_selection_subproblem(
    inst: &SchedulingInstance,
    state: &AdmmState,
    nu: f64,
) -> Result<SelectionUpdate> {
    crate::model::positive("nu", nu)?;
    let k = inst.num_edges();
    let rho = inst.rho;
    let lat = edge_latencies(inst, &state.plan, state.device_level);
    if lat.iter().any(|l| !(*l > 0.0) || l.is_infinite()) {
        return Err(Error::Infeasible("edge latency is not finite and positive".into()));
    }
    let price = state.multipliers.cloud_price;
    let coords: Vec<Coord> = (0..k)
        .map(|i| {
            let a = 1.0 - state.alpha_aux[i];
            let q = (a * a + 1.0) / nu;
            let l = -rho * inst.edges[i].importance + price * state.plan.edge_ul[i] + a * state.lambda[i]
                + state.lambda_aux[i]
                - state.alpha_aux[i] / nu;
            Coord { q, l }
        })
        .collect();
    let free: Vec<f64> = coords.iter().map(|c| c.free_min().clamp(0.0, 1.0)).collect();
    let alpha_at = |t: f64| -> Vec<f64> { (0..k).map(|i| free[i].min(t / lat[i])).collect() };
    let capped = |i: usize, t: f64| t / lat[i] < free[i];
    // g'(t): derivative of the reduced objective in t.
    let dg = |t: f64| -> f64 {
        (1.0 - rho)
            + (0..k)
                .filter(|&i| capped(i, t))
                .map(|i| coords[i].slope(t / lat[i]) / lat[i])
                .sum::<f64>()
    };

    let t_top = (0..k).map(|i| free[i] * lat[i]).fold(0.0, f64::max);
    let mut t = if t_top == 0.0 || dg(0.0) >= 0.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, t_top);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dg(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        // g' is affine between breakpoints; solve it exactly on the piece
        // the bisection landed on, falling back to the jump point.
        let set: Vec<usize> = (0..k).filter(|&i| capped(i, lo)).collect();
        let num: f64 = (1.0 - rho) + set.iter().map(|&i| coords[i].l / lat[i]).sum::<f64>();
        let den: f64 = set.iter().map(|&i| coords[i].q / (lat[i] * lat[i])).sum();
        let exact = if den > 0.0 { -num / den } else { hi };
        if exact >= lo * (1.0 - 1e-12) && exact <= hi * (1.0 + 1e-12) {
            exact
        } else {
            hi
        }
    };
    // Snap to a breakpoint when within rounding of one.
    for i in 0..k {
        let bp = free[i] * lat[i];
        if bp > 0.0 && (t - bp).abs() <= 1e-12 * bp {
            t = bp;
        }
    }
    let alpha = alpha_at(t);

    // Multipliers.
    let mut mu = vec![0.0; k];
    let mut psi = vec![0.0; k];
    let mut xi = vec![0.0; k];
    let mut jump = Vec::new();
    for i in 0..k {
        let slope = coords[i].slope(alpha[i]);
        let at_cap = t > 0.0 && (alpha[i] * lat[i] - t).abs() <= 1e-12 * t;
        if at_cap && alpha[i] < free[i] {
            mu[i] = (-slope / lat[i]).max(0.0);
        } else if at_cap && alpha[i] >= 1.0 && slope < 0.0 {
            jump.push(i);
        } else if alpha[i] <= 0.0 {
            if t == 0.0 && slope < 0.0 {
                mu[i] = -slope / lat[i];
            } else {
                psi[i] = slope.max(0.0);
            }
        } else if alpha[i] >= 1.0 {
            xi[i] = (-slope).max(0.0);
        }
    }
    let mut spare = (1.0 - rho) - mu.iter().sum::<f64>();
    for &i in &jump {
        let slope = coords[i].slope(alpha[i]);
        let m = spare.clamp(0.0, -slope / lat[i]);
        mu[i] = m;
        xi[i] = -slope - m * lat[i];
        spare -= m;
    }
    let kappa: Vec<f64> = if rho < 1.0 { mu.iter().map(|m| m / (1.0 - rho)).collect() } else { vec![0.0; k] };
    let zeta: Vec<f64> = (0..k).map(|i| mu[i] * alpha[i]).collect();

    // KKT residual of the epigraph problem.
    let mut r: f64 = 0.0;
    let t_stat = (1.0 - rho) - mu.iter().sum::<f64>();
    r = r.max(if t > 0.0 { t_stat.abs() } else { (-t_stat).max(0.0) });
    for i in 0..k {
        let stat = coords[i].slope(alpha[i]) + mu[i] * lat[i] - psi[i] + xi[i];
        r = r.max(stat.abs());
        r = r.max((mu[i] * (alpha[i] * lat[i] - t)).abs());
        r = r.max((psi[i] * alpha[i]).abs());
        r = r.max((xi[i] * (1.0 - alpha[i])).abs());
        r = r.max((alpha[i] * lat[i] - t).max(0.0));
        r = r.max((-mu[i]).max(0.0)).max((-psi[i]).max(0.0)).max((-xi[i]).max(0.0));
    }
    Ok(SelectionUpdate { alpha, level: t, mu, kappa, zeta, psi, xi, kkt_residual: r })
}

/// PB: closed-form `alpha_aux` update, then the device tier over all devices
/// and the cloud tier weighted by `alpha`.
///
/// Fails with [`Error::Infeasible`] if the device tier cannot reach
/// `device_level`.
pub fn solve_bandwidth_subproblem(
    inst: &SchedulingInstance,
    state: &AdmmState,
    alpha: &[f64],
    nu: f64,
) -> Result<BandwidthUpdate> {
    crate::model::positive("nu", nu)?;
    let k = inst.num_edges();
    if alpha.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: alpha.len() });
    }
    let alpha_aux: Vec<f64> = (0..k)
        .map(|i| {
            let a = alpha[i];
            (a * (1.0 + a + nu * state.lambda[i]) + nu * state.lambda_aux[i]) / (1.0 + a * a)
        })
        .collect();
    let device = device_tier(inst)?;
    if device.level > state.device_level * (1.0 + 1e-9) + 1e-15 {
        return Err(Error::Infeasible(alloc::format!(
            "device tier needs {} s, above the level {} s",
            device.level,
            state.device_level
        )));
    }
    let mass: f64 = alpha.iter().sum();
    let weights: Vec<f64> = if mass > 1e-12 { alpha.to_vec() } else { vec![1.0; k] };
    let cloud = cloud_tier(inst, device.level, &weights)?;
    let plan = BandwidthPlan { device_ul: reshape_devices(inst, &device.bandwidth), edge_ul: cloud.bandwidth.clone() };
    Ok(BandwidthUpdate { alpha_aux, plan, device, cloud })
}

/// Dual ascent: `lambda += alpha (1 - aux) / nu`,
/// `lambda_aux += (alpha - aux) / nu`.
pub fn update_duals(state: &mut AdmmState, nu: f64) -> Result<()> {
    crate::model::positive("nu", nu)?;
    for i in 0..state.alpha.len() {
        let (a, aux) = (state.alpha[i], state.alpha_aux[i]);
        state.lambda[i] += a * (1.0 - aux) / nu;
        state.lambda_aux[i] += (a - aux) / nu;
    }
    Ok(())
}

/// Augmented Lagrangian: the relaxed objective plus linear and quadratic
/// penalties on both consensus constraints.
pub fn augmented_lagrangian_f(inst: &SchedulingInstance, state: &AdmmState, nu: f64) -> Result<f64> {
    crate::model::positive("nu", nu)?;
    let lat = edge_latencies(inst, &state.plan, state.device_level);
    let rho = inst.rho;
    let mut importance = 0.0;
    let mut worst: f64 = 0.0;
    let mut penalty = 0.0;
    for i in 0..inst.num_edges() {
        let (a, aux) = (state.alpha[i], state.alpha_aux[i]);
        importance += inst.edges[i].importance * a;
        if a > 0.0 {
            worst = worst.max(a * lat[i]);
        }
        let c1 = a * (1.0 - aux);
        let c2 = a - aux;
        penalty += state.lambda[i] * c1 + state.lambda_aux[i] * c2 + (c1 * c1 + c2 * c2) / (2.0 * nu);
    }
    Ok(-rho * importance + (1.0 - rho) * worst + penalty)
}

/// Starting point chosen by `init`, min-max device tier and a cloud tier
/// weighted by the starting selection. Duals start at zero except under
/// [`InitRule::Neutral`].
pub fn initial_state(inst: &SchedulingInstance, nu: f64, init: InitRule) -> Result<AdmmState> {
    inst.validate()?;
    let k = inst.num_edges();
    let devices: usize = inst.edges.iter().map(|e| e.devices.len()).sum();
    let device = device_tier(inst)?;
    let full = cloud_tier(inst, device.level, &vec![1.0; k])?;
    let start: Vec<f64> = match init {
        InitRule::AllSelected => vec![1.0; k],
        InitRule::Constant(c) => vec![c.clamp(0.0, 1.0); k],
        InitRule::Neutral => vec![0.5; k],
        InitRule::Marginal => {
            let picked: Vec<bool> = (0..k)
                .map(|i| {
                    let cost = (1.0 - inst.rho) * full.budget_multiplier * full.bandwidth[i];
                    inst.rho * inst.edges[i].importance >= cost
                })
                .collect();
            let score = evaluate_with_device_tier(inst, &picked, &device)?.objective;
            if score > 0.0 {
                vec![0.0; k]
            } else {
                super::indicator(&picked)
            }
        }
    };
    let weights = if start.iter().sum::<f64>() > 1e-12 { start.clone() } else { vec![1.0; k] };
    let cloud = cloud_tier(inst, device.level, &weights)?;
    let mut multipliers = MultiplierSet::zeros(k, devices);
    fill_bandwidth_multipliers(&mut multipliers, &device, &cloud);
    let top = start.iter().copied().fold(0.0, f64::max);
    multipliers.cloud_price = (1.0 - inst.rho) * top * cloud.budget_multiplier;
    let mut state = AdmmState {
        alpha: start.clone(),
        alpha_aux: start,
        lambda: match init {
            InitRule::Neutral => vec![-0.25 / nu; k],
            _ => vec![0.0; k],
        },
        lambda_aux: vec![0.0; k],
        plan: BandwidthPlan { device_ul: reshape_devices(inst, &device.bandwidth), edge_ul: cloud.bandwidth },
        device_level: device.level,
        multipliers,
        f_value: 0.0,
        iteration: 0,
    };
    state.f_value = augmented_lagrangian_f(inst, &state, nu)?;
    Ok(state)
}

fn fill_bandwidth_multipliers(m: &mut MultiplierSet, device: &TierAllocation, cloud: &TierAllocation) {
    m.beta = device.budget_multiplier;
    m.device_link = device.link_multipliers.clone();
    m.cloud_budget = cloud.budget_multiplier;
    m.tau = cloud.link_multipliers.clone();
}

fn consensus_residual(state: &AdmmState) -> f64 {
    state
        .alpha
        .iter()
        .zip(&state.alpha_aux)
        .map(|(a, aux)| math::abs(a - aux).max(math::abs(a * (1.0 - aux))))
        .fold(0.0, f64::max)
}

/// Runs the ADMM / block-coordinate loop, rounds the relaxed selection and
/// returns the exact bandwidth plan for the rounded selection.
pub fn admm_solve(inst: &SchedulingInstance, config: &SolverConfig) -> Result<Schedule> {
    config.validate()?;
    let scale = objective_scale(inst)?;
    let nu = config.nu / scale;
    let eps_min = config.eps_min * scale;
    let mut state = initial_state(inst, nu, config.init)?;
    let mut converged = false;
    for r in 1..=config.max_iters {
        let px = solve_selection_subproblem(inst, &state, nu)?;
        state.alpha = px.alpha;
        state.multipliers.mu = px.mu;
        state.multipliers.kappa = px.kappa;
        state.multipliers.zeta = px.zeta;
        state.multipliers.psi = px.psi;
        state.multipliers.xi = px.xi;

        let pb = solve_bandwidth_subproblem(inst, &state, &state.alpha.clone(), nu)?;
        state.alpha_aux = pb.alpha_aux;
        state.plan = pb.plan;
        state.device_level = pb.device.level;
        fill_bandwidth_multipliers(&mut state.multipliers, &pb.device, &pb.cloud);
        let top = state.alpha.iter().copied().fold(0.0, f64::max);
        state.multipliers.cloud_price = (1.0 - inst.rho) * top * pb.cloud.budget_multiplier;

        update_duals(&mut state, nu)?;
        let f = augmented_lagrangian_f(inst, &state, nu)?;
        let delta = math::abs(f - state.f_value);
        state.f_value = f;
        state.iteration = r;
        if delta < eps_min {
            converged = true;
            break;
        }
    }
    finish(inst, &state, config, converged)
}

/// Magnitude of the objective with every edge selected. `nu` and `eps_min`
/// are applied to the objective divided by this, which leaves the minimizer
/// unchanged but makes both settings independent of the units of importance
/// and latency.
pub fn objective_scale(inst: &SchedulingInstance) -> Result<f64> {
    let all = super::evaluate_selection(inst, &vec![true; inst.num_edges()])?;
    let s = inst.rho * all.achieved_importance + (1.0 - inst.rho) * all.achieved_latency;
    Ok(if s > 0.0 && s.is_finite() { s } else { 1.0 })
}

fn finish(inst: &SchedulingInstance, state: &AdmmState, config: &SolverConfig, converged: bool) -> Result<Schedule> {
    let mut selected: Vec<bool> = state.alpha.iter().map(|&a| a >= config.round_threshold).collect();
    let device = device_tier(inst)?;
    let mut schedule = loop {
        match evaluate_with_device_tier(inst, &selected, &device) {
            Ok(s) => break s,
            Err(Error::Infeasible(_)) if selected.iter().any(|s| *s) => {
                // Drop the least important selected edge and retry.
                let worst = (0..selected.len())
                    .filter(|&i| selected[i])
                    .min_by(|&a, &b| inst.edges[a].importance.total_cmp(&inst.edges[b].importance))
                    .expect("non-empty selection");
                selected[worst] = false;
            }
            Err(e) => return Err(e),
        }
    };
    schedule.converged = converged;
    schedule.iterations = state.iteration;
    schedule.relaxed_alpha = state.alpha.clone();
    schedule.consensus_residual = consensus_residual(state);
    Ok(schedule)
}
