//! Logistic-regression training primitives, local SGD and gradient-norm
//! importance scores.
//!
//! The loss is the standard logistic loss `log(1 + exp(-y x^T w))`, averaged
//! over a dataset. Models are [`ParamVector`]s made of named layers; the
//! logistic routines operate on the concatenation of all layers, so a
//! single-layer model (with a constant-1 bias feature) is the common case.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Name of the single layer used by [`ParamVector::single`].
pub const DEFAULT_LAYER: &str = "weights";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub values: Vec<f64>,
}

/// Layered, flat model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Layer>", into = "Vec<Layer>")]
pub struct ParamVector {
    layers: Vec<Layer>,
}

impl TryFrom<Vec<Layer>> for ParamVector {
    type Error = Error;

    fn try_from(layers: Vec<Layer>) -> Result<Self> {
        ParamVector::new(layers)
    }
}

impl From<ParamVector> for Vec<Layer> {
    fn from(p: ParamVector) -> Self {
        p.layers
    }
}

impl ParamVector {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::EmptyInput("layers"));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layers[..i].iter().any(|l| l.name == layer.name) {
                return Err(Error::DuplicateLayer(layer.name.clone()));
            }
            if layer.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue);
            }
        }
        let p = ParamVector { layers };
        if p.total_dim() == 0 {
            return Err(Error::EmptyInput("parameter vector"));
        }
        Ok(p)
    }

    /// Single-layer model named [`DEFAULT_LAYER`].
    pub fn single(values: Vec<f64>) -> Result<Self> {
        Self::new(alloc::vec![Layer {
            name: String::from(DEFAULT_LAYER),
            values,
        }])
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::single(alloc::vec![0.0; dim])
    }

    pub fn zeros_like(&self) -> Self {
        self.map(|_| 0.0)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn layer_names(&self) -> impl Iterator<Item = &str> {
        self.layers.iter().map(|l| l.name.as_str())
    }

    pub fn total_dim(&self) -> usize {
        self.layers.iter().map(|l| l.values.len()).sum()
    }

    /// Iterates over all entries in layer order.
    pub fn iter(&self) -> impl Iterator<Item = &f64> + Clone + '_ {
        self.layers.iter().flat_map(|l| l.values.iter())
    }

    fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.layers.iter_mut().flat_map(|l| l.values.iter_mut())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.iter().copied().collect()
    }

    /// Builds a vector with this layout from flat values.
    pub fn with_flat(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != self.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim(),
                found: flat.len(),
            });
        }
        let mut out = self.clone();
        for (dst, &src) in out.iter_mut().zip(flat) {
            *dst = src;
        }
        Ok(out)
    }

    pub fn same_shape(&self, other: &ParamVector) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.name == b.name && a.values.len() == b.values.len())
    }

    pub(crate) fn check_shape(&self, other: &ParamVector) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &ParamVector) -> Result<()> {
        self.check_shape(x)?;
        for (dst, src) in self.iter_mut().zip(x.iter()) {
            *dst += a * src;
        }
        Ok(())
    }

    pub fn norm_sq(&self) -> f64 {
        self.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sq())
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    /// -1 or +1.
    pub label: f64,
}

/// A device's local training set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Sample>", into = "Vec<Sample>")]
pub struct LocalDataset {
    samples: Vec<Sample>,
}

impl TryFrom<Vec<Sample>> for LocalDataset {
    type Error = Error;

    fn try_from(samples: Vec<Sample>) -> Result<Self> {
        LocalDataset::new(samples)
    }
}

impl From<LocalDataset> for Vec<Sample> {
    fn from(d: LocalDataset) -> Self {
        d.samples
    }
}

impl LocalDataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if let Some(first) = samples.first() {
            let dim = first.features.len();
            for s in &samples {
                if s.features.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: s.features.len(),
                    });
                }
                if s.label != 1.0 && s.label != -1.0 {
                    return Err(Error::InvalidLabel(s.label));
                }
                if s.features.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFiniteValue);
                }
            }
        }
        Ok(LocalDataset { samples })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Feature dimension, `None` for an empty dataset.
    pub fn dim(&self) -> Option<usize> {
        self.samples.first().map(|s| s.features.len())
    }

    pub fn subset(&self, indices: &[usize]) -> LocalDataset {
        LocalDataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }
}

/// A device's dataset plus the constants that set its compute and uplink
/// latency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub dataset: LocalDataset,
    /// CPU cycles to process one sample.
    pub cycles_per_sample: f64,
    /// Hz.
    pub cpu_freq: f64,
    /// Uplink transmit power, watts.
    pub tx_power: f64,
    pub distance_to_edge_km: f64,
}

impl DeviceProfile {
    pub fn new(
        dataset: LocalDataset,
        cycles_per_sample: f64,
        cpu_freq: f64,
        tx_power: f64,
        distance_to_edge_km: f64,
    ) -> Result<Self> {
        positive("cycles_per_sample", cycles_per_sample)?;
        positive("cpu_freq", cpu_freq)?;
        positive("tx_power", tx_power)?;
        positive("distance_to_edge_km", distance_to_edge_km)?;
        Ok(DeviceProfile {
            dataset,
            cycles_per_sample,
            cpu_freq,
            tx_power,
            distance_to_edge_km,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingHyper {
    pub learning_rate: f64,
    /// Capped at the dataset size.
    pub batch_size: usize,
    pub local_steps: usize,
}

impl TrainingHyper {
    pub fn validate(&self) -> Result<()> {
        positive("learning_rate", self.learning_rate)?;
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter { name: "batch_size", value: 0.0 });
        }
        if self.local_steps == 0 {
            return Err(Error::InvalidParameter { name: "local_steps", value: 0.0 });
        }
        Ok(())
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

fn check_dims(w: &ParamVector, data: &LocalDataset) -> Result<()> {
    match data.dim() {
        None => Err(Error::EmptyDataset),
        Some(d) if d != w.total_dim() => Err(Error::DimensionMismatch {
            expected: w.total_dim(),
            found: d,
        }),
        Some(_) => Ok(()),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean logistic loss over `data`.
pub fn logistic_loss(w: &ParamVector, data: &LocalDataset) -> Result<f64> {
    check_dims(w, data)?;
    let flat = w.to_flat();
    let total: f64 = data
        .samples
        .iter()
        .map(|s| math::softplus(-s.label * dot(&s.features, &flat)))
        .sum();
    Ok(total / data.len() as f64)
}

/// Mean gradient over the samples at `indices` (ascending order keeps the
/// summation order identical to a full pass).
fn gradient_over(flat: &[f64], samples: &[Sample], indices: &[usize]) -> Vec<f64> {
    let mut grad = alloc::vec![0.0; flat.len()];
    for &i in indices {
        let s = &samples[i];
        let margin = s.label * dot(&s.features, flat);
        // -y x / (1 + exp(y x^T w)) = -y x sigmoid(-margin)
        let coef = -s.label * math::sigmoid(-margin);
        for (g, x) in grad.iter_mut().zip(&s.features) {
            *g += coef * x;
        }
    }
    let n = indices.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    grad
}

/// Gradient of [`logistic_loss`] with respect to `w`, same layout as `w`.
pub fn logistic_gradient(w: &ParamVector, data: &LocalDataset) -> Result<ParamVector> {
    check_dims(w, data)?;
    let all: Vec<usize> = (0..data.len()).collect();
    w.with_flat(&gradient_over(&w.to_flat(), &data.samples, &all))
}

/// One gradient step `w - lr * grad(w; batch)`.
pub fn local_sgd_step(w: &ParamVector, batch: &LocalDataset, learning_rate: f64) -> Result<ParamVector> {
    if !(learning_rate >= 0.0) {
        return Err(Error::InvalidParameter { name: "learning_rate", value: learning_rate });
    }
    let grad = logistic_gradient(w, batch)?;
    let mut out = w.clone();
    out.axpy(-learning_rate, &grad)?;
    Ok(out)
}

/// Runs `hyper.local_steps` mini-batch SGD steps on the device's dataset.
///
/// Batches are consecutive slices of a seeded Fisher-Yates permutation,
/// reshuffled at every epoch boundary.
pub fn local_train_round(
    w0: &ParamVector,
    device: &DeviceProfile,
    hyper: &TrainingHyper,
    rng_seed: u64,
) -> Result<ParamVector> {
    hyper.validate()?;
    let data = &device.dataset;
    check_dims(w0, data)?;
    let n = data.len();
    let batch = hyper.batch_size.min(n);
    let mut rng = crate::rng::stream(rng_seed, &[]);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut cursor = 0;

    let mut flat = w0.to_flat();
    let mut idx = Vec::with_capacity(batch);
    for _ in 0..hyper.local_steps {
        if cursor + batch > n {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        idx.clear();
        idx.extend_from_slice(&order[cursor..cursor + batch]);
        idx.sort_unstable();
        cursor += batch;
        let grad = gradient_over(&flat, &data.samples, &idx);
        for (w, g) in flat.iter_mut().zip(&grad) {
            *w -= hyper.learning_rate * g;
        }
    }
    w0.with_flat(&flat)
}

/// Squared gradient norm of the local loss: the device's importance score.
pub fn device_gnv(w: &ParamVector, data: &LocalDataset) -> Result<f64> {
    Ok(logistic_gradient(w, data)?.norm_sq())
}

/// Edge importance: the sum of its devices' scores.
pub fn edge_gnv(device_gnvs: &[f64]) -> Result<f64> {
    if device_gnvs.is_empty() {
        return Err(Error::EmptyInput("device GNV list"));
    }
    if let Some(&bad) = device_gnvs.iter().find(|g| !(**g >= 0.0)) {
        return Err(Error::InvalidParameter { name: "device_gnv", value: bad });
    }
    Ok(device_gnvs.iter().sum())
}
