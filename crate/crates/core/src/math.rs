//! Float helpers backed by `libm` so the crate stays `no_std`.

pub(crate) use libm::{exp, fabs as abs, log10, log1p, pow, sqrt};

pub(crate) const LN_2: f64 = core::f64::consts::LN_2;

/// `log(1 + exp(z))` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + log1p(exp(-z))
    } else {
        log1p(exp(z))
    }
}

/// Logistic sigmoid `1 / (1 + exp(-z))`, stable for large |z|.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// `log2(1 + x)`, accurate for small `x`.
pub(crate) fn log2_1p(x: f64) -> f64 {
    log1p(x) / LN_2
}

/// `ln(1 + x) - x / (1 + x)` for `x >= 0`, accurate as `x -> 0` where the
/// two terms cancel to `x^2 / 2`.
pub(crate) fn log1p_minus_ratio(x: f64) -> f64 {
    if x < 1e-3 {
        // sum_{n>=2} (-1)^n (n-1)/n x^n
        let mut term = x * x;
        let mut acc = 0.0;
        for n in 2..12 {
            let nf = n as f64;
            let signed = if n % 2 == 0 { term } else { -term };
            acc += signed * (nf - 1.0) / nf;
            term *= x;
        }
        acc
    } else {
        log1p(x) - x / (1.0 + x)
    }
}
