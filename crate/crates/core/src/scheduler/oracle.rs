use alloc::vec::Vec;

use super::alloc_tier::device_tier;
use super::{evaluate_with_device_tier, Schedule, SchedulingInstance};
use crate::error::{Error, Result};

/// Enumeration covers `2^K` selections; beyond this it is refused.
pub const ORACLE_MAX_EDGES: usize = 12;

/// Exact optimum by enumerating every selection, each with its min-max
/// bandwidth plan. Ties keep the selection enumerated first (fewest bits of
/// the mask set, lowest mask).
pub fn brute_force_oracle(inst: &SchedulingInstance) -> Result<Schedule> {
    inst.validate()?;
    let k = inst.num_edges();
    if k > ORACLE_MAX_EDGES {
        return Err(Error::TooManyEdges { edges: k, max: ORACLE_MAX_EDGES });
    }
    let device = device_tier(inst)?;
    let mut masks: Vec<u32> = (0..1u32 << k).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut best: Option<Schedule> = None;
    for mask in masks {
        let selected: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
        let s = evaluate_with_device_tier(inst, &selected, &device)?;
        if best.as_ref().map_or(true, |b| s.objective < b.objective) {
            best = Some(s);
        }
    }
    Ok(best.expect("at least the empty selection"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::{random_instance, InstanceSpec};

    #[test]
    fn rho_extremes() {
        let spec = InstanceSpec::default();
        let mut inst = random_instance(&spec, 1).unwrap();
        inst.rho = 1.0;
        assert!(brute_force_oracle(&inst).unwrap().selected.iter().all(|s| *s));
        inst.rho = 0.0;
        assert_eq!(brute_force_oracle(&inst).unwrap().selected_count(), 0);
    }

    #[test]
    fn refuses_large_instances() {
        let spec = InstanceSpec { edges: 13, ..InstanceSpec::default() };
        let inst = random_instance(&spec, 1).unwrap();
        assert!(matches!(brute_force_oracle(&inst), Err(Error::TooManyEdges { .. })));
    }
}
