//! Edge aggregation, semi-asynchronous cloud aggregation and the elastic
//! edge update.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::model::ParamVector;

/// What an edge reports to the cloud after aggregating its devices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeModelReport {
    pub edge_id: usize,
    pub model: ParamVector,
    /// Total samples across the edge's devices.
    pub data_count: u64,
    pub gnv: f64,
}

/// Layers compared by [`layer_divergence`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSet {
    names: Vec<String>,
}

impl LayerSet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::EmptyInput("layer set"));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::DuplicateLayer(n.clone()));
            }
        }
        Ok(LayerSet { names })
    }

    /// Every layer of `model`, in order.
    pub fn all_of(model: &ParamVector) -> Self {
        LayerSet {
            names: model.layer_names().map(String::from).collect(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Data-size weighted mean of device models.
pub fn edge_aggregate(locals: &[(ParamVector, u64)]) -> Result<ParamVector> {
    let (first, _) = locals.first().ok_or(Error::EmptyInput("local models"))?;
    let mut total = 0u64;
    for (model, count) in locals {
        first.check_shape(model)?;
        if *count == 0 {
            return Err(Error::InvalidParameter { name: "data_count", value: 0.0 });
        }
        total += count;
    }
    let mut acc = first.zeros_like();
    for (model, count) in locals {
        acc.axpy(*count as f64 / total as f64, model)?;
    }
    Ok(acc)
}

/// Semi-asynchronous cloud update: moves `w_prev` toward each selected edge
/// model by that edge's share of `total_data`.
///
/// `total_data` is the sample count over all edges, selected or not.
pub fn cloud_aggregate(
    w_prev: &ParamVector,
    selected: &[EdgeModelReport],
    total_data: u64,
) -> Result<ParamVector> {
    if total_data == 0 {
        return Err(Error::InvalidParameter { name: "total_data", value: 0.0 });
    }
    let mut out = w_prev.clone();
    for report in selected {
        w_prev.check_shape(&report.model)?;
        let share = report.data_count as f64 / total_data as f64;
        let mut delta = report.model.clone();
        delta.axpy(-1.0, w_prev)?;
        out.axpy(share, &delta)?;
    }
    Ok(out)
}

/// Relative distance `||w_k - w_c|| / ||w_c||`.
pub fn weight_distance(w_k: &ParamVector, w_c: &ParamVector) -> Result<f64> {
    w_c.check_shape(w_k)?;
    relative_distance(w_k.iter(), w_c.iter())
}

fn relative_distance<'a>(
    a: impl Iterator<Item = &'a f64>,
    reference: impl Iterator<Item = &'a f64> + Clone,
) -> Result<f64> {
    let ref_norm = math::sqrt(reference.clone().map(|v| v * v).sum());
    if ref_norm == 0.0 {
        return Err(Error::DegenerateReference);
    }
    let diff: f64 = a.zip(reference).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(math::sqrt(diff) / ref_norm)
}

/// Mean relative distance over the layers in `layers`.
pub fn layer_divergence(w_k: &ParamVector, w_c: &ParamVector, layers: &LayerSet) -> Result<f64> {
    let mut sum = 0.0;
    for name in layers.names() {
        let missing = || Error::MissingLayer(name.clone());
        let lk = w_k.layer(name).ok_or_else(missing)?;
        let lc = w_c.layer(name).ok_or_else(missing)?;
        if lk.values.len() != lc.values.len() {
            return Err(Error::ShapeMismatch);
        }
        sum += relative_distance(lk.values.iter(), lc.values.iter())?;
    }
    Ok(sum / layers.names().len() as f64)
}

/// `eps * w_c + (1 - eps) * w_k`, with `eps` clamped to `[0, 1]`.
pub fn elastic_update(w_k: &ParamVector, w_c: &ParamVector, eps: f64) -> Result<ParamVector> {
    w_k.check_shape(w_c)?;
    if eps.is_nan() {
        return Err(Error::InvalidParameter { name: "eps", value: eps });
    }
    let eps = eps.clamp(0.0, 1.0);
    if eps == 0.0 {
        return Ok(w_k.clone());
    }
    if eps == 1.0 {
        return Ok(w_c.clone());
    }
    let flat: Vec<f64> = w_k
        .iter()
        .zip(w_c.iter())
        .map(|(k, c)| eps * c + (1.0 - eps) * k)
        .collect();
    w_k.with_flat(&flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Layer;
    use alloc::vec;

    fn w(v: &[f64]) -> ParamVector {
        ParamVector::single(v.to_vec()).unwrap()
    }

    fn report(id: usize, model: &[f64], count: u64) -> EdgeModelReport {
        EdgeModelReport { edge_id: id, model: w(model), data_count: count, gnv: 0.0 }
    }

    #[test]
    fn edge_aggregate_examples() {
        assert_eq!(edge_aggregate(&[(w(&[1.0]), 5), (w(&[3.0]), 5)]).unwrap(), w(&[2.0]));
        assert_eq!(edge_aggregate(&[(w(&[0.0]), 100), (w(&[4.0]), 300)]).unwrap(), w(&[3.0]));
        assert_eq!(edge_aggregate(&[(w(&[0.7, -2.0]), 9)]).unwrap(), w(&[0.7, -2.0]));
        assert!(edge_aggregate(&[]).is_err());
        assert_eq!(edge_aggregate(&[(w(&[1.0]), 1), (w(&[1.0, 2.0]), 1)]), Err(Error::ShapeMismatch));
    }

    #[test]
    fn cloud_aggregate_examples() {
        let prev = w(&[0.5, 1.0]);
        assert_eq!(cloud_aggregate(&prev, &[], 10).unwrap(), prev);
        let all = [report(0, &[0.5, 1.0], 3), report(1, &[0.5, 1.0], 7)];
        assert_eq!(cloud_aggregate(&prev, &all, 10).unwrap(), prev);
        let one = [report(1, &[2.0], 100)];
        assert_eq!(cloud_aggregate(&w(&[0.0]), &one, 200).unwrap(), w(&[1.0]));
        assert!(cloud_aggregate(&prev, &[], 0).is_err());
    }

    #[test]
    fn distance_examples() {
        let c = w(&[3.0, 4.0]);
        assert_eq!(weight_distance(&c, &c).unwrap(), 0.0);
        assert_eq!(weight_distance(&w(&[6.0, 8.0]), &c).unwrap(), 1.0);
        assert_eq!(weight_distance(&c, &w(&[0.0, 0.0])), Err(Error::DegenerateReference));
    }

    #[test]
    fn divergence_averages_layers() {
        let mk = |a: &[f64], b: &[f64]| {
            ParamVector::new(vec![
                Layer { name: "a".into(), values: a.to_vec() },
                Layer { name: "b".into(), values: b.to_vec() },
            ])
            .unwrap()
        };
        let cloud = mk(&[5.0], &[10.0]);
        let edge = mk(&[6.0], &[14.0]); // 0.2 and 0.4
        let both = LayerSet::new(vec!["a".into(), "b".into()]).unwrap();
        assert!((layer_divergence(&edge, &cloud, &both).unwrap() - 0.3).abs() < 1e-15);
        let only_a = LayerSet::new(vec!["a".into()]).unwrap();
        assert!((layer_divergence(&edge, &cloud, &only_a).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(layer_divergence(&cloud, &cloud, &both).unwrap(), 0.0);
        let missing = LayerSet::new(vec!["z".into()]).unwrap();
        assert!(matches!(layer_divergence(&edge, &cloud, &missing), Err(Error::MissingLayer(_))));
        assert!(LayerSet::new(vec![]).is_err());
        assert!(LayerSet::new(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn elastic_examples() {
        let k = w(&[4.0]);
        let c = w(&[2.0]);
        assert_eq!(elastic_update(&k, &c, 0.0).unwrap(), k);
        assert_eq!(elastic_update(&k, &c, 1.0).unwrap(), c);
        assert_eq!(elastic_update(&k, &c, 0.5).unwrap(), w(&[3.0]));
        assert_eq!(elastic_update(&k, &c, 7.0).unwrap(), c);
        assert_eq!(elastic_update(&k, &c, -1.0).unwrap(), k);
    }
}
