use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shfl_core::model::{logistic_gradient, logistic_loss, LocalDataset, ParamVector, Sample};

fn random_pair(seed: u64) -> (ParamVector, LocalDataset) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let dim = r.gen_range(1..12);
    let n = r.gen_range(1..40);
    let w: Vec<f64> = (0..dim).map(|_| r.gen_range(-2.0..2.0)).collect();
    let samples = (0..n)
        .map(|_| Sample {
            features: (0..dim).map(|_| r.gen_range(-3.0..3.0)).collect(),
            label: if r.gen_bool(0.5) { 1.0 } else { -1.0 },
        })
        .collect();
    (ParamVector::single(w).unwrap(), LocalDataset::new(samples).unwrap())
}

/// Central differences, each coordinate at step `h * max(1, |w_j|)`.
fn numeric_gradient(w: &ParamVector, data: &LocalDataset, h: f64) -> Vec<f64> {
    let flat = w.to_flat();
    (0..flat.len())
        .map(|j| {
            let step = h * flat[j].abs().max(1.0);
            let mut up = flat.clone();
            let mut down = flat.clone();
            up[j] += step;
            down[j] -= step;
            let f_up = logistic_loss(&w.with_flat(&up).unwrap(), data).unwrap();
            let f_down = logistic_loss(&w.with_flat(&down).unwrap(), data).unwrap();
            (f_up - f_down) / (2.0 * step)
        })
        .collect()
}

fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let norm: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / norm.max(1e-8)
}

#[test]
fn gradient_matches_central_differences() {
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let (w, data) = random_pair(seed);
        let g = logistic_gradient(&w, &data).unwrap().to_flat();
        let fd = numeric_gradient(&w, &data, 1e-5);
        worst = worst.max(relative_error(&g, &fd));
    }
    assert!(worst <= 1e-5, "worst relative error {worst:e}");
}

#[test]
fn loss_at_zero_is_ln2() {
    for seed in 0..10 {
        let (w, data) = random_pair(seed);
        let zero = w.zeros_like();
        assert!((logistic_loss(&zero, &data).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }
}

#[test]
fn gradient_on_a_separable_point_shrinks_with_margin() {
    let data = LocalDataset::new(vec![Sample { features: vec![1.0, 1.0], label: 1.0 }]).unwrap();
    let small = logistic_gradient(&ParamVector::single(vec![1.0, 1.0]).unwrap(), &data).unwrap().norm();
    let large = logistic_gradient(&ParamVector::single(vec![10.0, 10.0]).unwrap(), &data).unwrap().norm();
    assert!(large < small);
    assert!(large < 1e-8);
}
