//! Synthetic non-iid workload.
//!
//! Samples come from `num_classes` Gaussian clusters. The binary label is
//! the side of a random teacher hyperplane, flipped with probability
//! `label_noise`. As with image benchmarks, the pool is sorted by cluster,
//! cut into equal shards and each device draws `shards_per_device` shards,
//! so a device sees only a few clusters.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LocalDataset, Sample};
use crate::rng;

/// How class-sorted shards are dealt to devices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    /// Shards shuffled and dealt to devices regardless of edge.
    Shuffled,
    /// Each edge gets a contiguous run of the sorted shards, so devices
    /// behind one edge share clusters. Run order across edges and shard
    /// order within a run are shuffled.
    EdgeGrouped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    /// Features before the constant bias column.
    pub feature_dim: usize,
    /// Standard deviation of cluster centers.
    pub center_scale: f64,
    /// Standard deviation of samples around their center.
    pub noise_scale: f64,
    pub label_noise: f64,
    /// Standard deviation of a per-cluster offset added to the teacher
    /// score, which skews each cluster toward one label.
    pub cluster_bias: f64,
    pub num_shards: usize,
    pub shard_size: usize,
    pub shards_per_device: usize,
    pub partition: Partition,
    pub test_size: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_classes: 10,
            feature_dim: 20,
            center_scale: 1.0,
            noise_scale: 1.0,
            label_noise: 0.05,
            cluster_bias: 0.0,
            num_shards: 100,
            shard_size: 100,
            shards_per_device: 5,
            partition: Partition::EdgeGrouped,
            test_size: 2000,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self, num_devices: usize) -> Result<()> {
        let nonzero = |name, v: usize| {
            if v == 0 {
                Err(Error::InvalidParameter { name, value: 0.0 })
            } else {
                Ok(())
            }
        };
        nonzero("num_classes", self.num_classes)?;
        nonzero("feature_dim", self.feature_dim)?;
        nonzero("shard_size", self.shard_size)?;
        nonzero("shards_per_device", self.shards_per_device)?;
        nonzero("test_size", self.test_size)?;
        if !(0.0..=0.5).contains(&self.label_noise) {
            return Err(Error::InvalidParameter { name: "label_noise", value: self.label_noise });
        }
        for (name, v) in [
            ("center_scale", self.center_scale),
            ("noise_scale", self.noise_scale),
            ("cluster_bias", self.cluster_bias),
        ] {
            if !(v >= 0.0) || v.is_infinite() {
                return Err(Error::InvalidParameter { name, value: v });
            }
        }
        if num_devices * self.shards_per_device > self.num_shards {
            return Err(Error::InvalidConfig(alloc::format!(
                "{num_devices} devices x {} shards exceeds {} shards",
                self.shards_per_device,
                self.num_shards
            )));
        }
        Ok(())
    }

    /// Model dimension including the bias column.
    pub fn model_dim(&self) -> usize {
        self.feature_dim + 1
    }
}

/// Per-device training sets (edge-major order) and a shared test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FederatedData {
    pub devices: Vec<LocalDataset>,
    pub test: LocalDataset,
}

struct Generator {
    centers: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    teacher: Vec<f64>,
}

impl Generator {
    fn sample(&self, class: usize, spec: &SyntheticSpec, r: &mut impl Rng) -> Sample {
        let mut features: Vec<f64> = self.centers[class]
            .iter()
            .map(|c| c + spec.noise_scale * r.sample::<f64, _>(StandardNormal))
            .collect();
        let score: f64 = self.offsets[class] + features.iter().zip(&self.teacher).map(|(x, w)| x * w).sum::<f64>();
        let mut label = if score >= 0.0 { 1.0 } else { -1.0 };
        if r.gen::<f64>() < spec.label_noise {
            label = -label;
        }
        features.push(1.0);
        Sample { features, label }
    }
}

/// Generates the workload for `edges * devices_per_edge` devices,
/// reproducibly from `seed`.
pub fn generate(spec: &SyntheticSpec, edges: usize, devices_per_edge: usize, seed: u64) -> Result<FederatedData> {
    let num_devices = edges * devices_per_edge;
    spec.validate(num_devices)?;
    let d = spec.feature_dim;
    let mut r = rng::stream(seed, &[0xDA7A]);
    let gauss = |r: &mut rand_chacha::ChaCha8Rng, s: f64| -> Vec<f64> {
        (0..d).map(|_| s * r.sample::<f64, _>(StandardNormal)).collect()
    };
    let centers: Vec<Vec<f64>> = (0..spec.num_classes).map(|_| gauss(&mut r, spec.center_scale)).collect();
    let teacher = gauss(&mut r, 1.0);
    let offsets = (0..spec.num_classes)
        .map(|_| spec.cluster_bias * r.sample::<f64, _>(StandardNormal))
        .collect();
    let gen = Generator { centers, offsets, teacher };

    // Pool already in class order.
    let total = spec.num_shards * spec.shard_size;
    let pool: Vec<Sample> = (0..total)
        .map(|i| gen.sample(i * spec.num_classes / total, spec, &mut r))
        .collect();
    let mut shards: Vec<usize> = (0..spec.num_shards).collect();
    match spec.partition {
        Partition::Shuffled => shards.shuffle(&mut r),
        Partition::EdgeGrouped => {
            let run = devices_per_edge * spec.shards_per_device;
            let mut runs: Vec<Vec<usize>> = shards.chunks(run).map(<[usize]>::to_vec).collect();
            runs.truncate(edges);
            runs.shuffle(&mut r);
            for run in &mut runs {
                run.shuffle(&mut r);
            }
            shards = runs.concat();
        }
    }
    let devices = (0..num_devices)
        .map(|dev| {
            let mine = &shards[dev * spec.shards_per_device..(dev + 1) * spec.shards_per_device];
            let samples = mine
                .iter()
                .flat_map(|&s| pool[s * spec.shard_size..(s + 1) * spec.shard_size].iter().cloned())
                .collect();
            LocalDataset::new(samples)
        })
        .collect::<Result<Vec<_>>>()?;
    let test = (0..spec.test_size)
        .map(|i| gen.sample(i % spec.num_classes, spec, &mut r))
        .collect();
    Ok(FederatedData { devices, test: LocalDataset::new(test)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let spec = SyntheticSpec::default();
        let a = generate(&spec, 10, 2, 3).unwrap();
        assert_eq!(a.devices.len(), 20);
        for dev in &a.devices {
            assert_eq!(dev.len(), 500);
            assert_eq!(dev.dim(), Some(21));
            assert!(dev.samples().iter().all(|s| s.features[20] == 1.0));
        }
        assert_eq!(a.test.len(), 2000);
        assert_eq!(a, generate(&spec, 10, 2, 3).unwrap());
        assert_ne!(a, generate(&spec, 10, 2, 4).unwrap());
    }

    #[test]
    fn devices_see_few_clusters() {
        let spec = SyntheticSpec { shards_per_device: 1, ..SyntheticSpec::default() };
        let data = generate(&spec, 10, 1, 1).unwrap();
        // One shard of a class-sorted pool holds a single cluster, so its
        // features vary around one center: the per-device mean sits far from
        // the global mean for at least some devices.
        let mean = |ds: &LocalDataset| -> Vec<f64> {
            let n = ds.len() as f64;
            (0..20).map(|j| ds.samples().iter().map(|s| s.features[j]).sum::<f64>() / n).collect()
        };
        let spread: f64 = data.devices.iter().map(|d| mean(d).iter().map(|m| m * m).sum::<f64>()).sum();
        assert!(spread / 10.0 > 5.0, "{spread}");
    }

    #[test]
    fn too_many_devices() {
        let spec = SyntheticSpec::default();
        assert!(generate(&spec, 21, 1, 0).is_err());
    }
}
