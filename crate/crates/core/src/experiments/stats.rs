//! Small statistics helpers shared by the experiments.

use alloc::vec::Vec;

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

/// Standard error of the mean of i.i.d. samples.
pub fn std_error(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    libm::sqrt(variance(x) / x.len() as f64)
}

/// Mean and batch-means standard error with `batches` contiguous batches.
pub fn batch_means(x: &[f64], batches: usize) -> (f64, f64) {
    let b = batches.max(2).min(x.len().max(2));
    let len = x.len() / b;
    if len == 0 {
        return (mean(x), f64::INFINITY);
    }
    let bm: Vec<f64> = (0..b).map(|i| mean(&x[i * len..(i + 1) * len])).collect();
    (mean(&x[..b * len]), std_error(&bm))
}

/// Integrated autocorrelation time in samples, with the self-consistent window M ≥ 5τ.
pub fn integrated_autocorrelation(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return 1.0;
    }
    let m = mean(x);
    let c0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for k in 1..n / 2 {
        let ck: f64 = (0..n - k).map(|i| (x[i] - m) * (x[i + k] - m)).sum::<f64>() / n as f64;
        tau += 2.0 * ck / c0;
        if (k as f64) >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Least-squares slope and its standard error.
pub fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len();
    if n < 3 {
        return (f64::NAN, f64::INFINITY);
    }
    let (mt, my) = (mean(t), mean(y));
    let sxx: f64 = t.iter().map(|a| (a - mt) * (a - mt)).sum();
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mt;
    let rss: f64 = t.iter().zip(y).map(|(a, b)| (b - icpt - slope * a) * (b - icpt - slope * a)).sum();
    (slope, libm::sqrt(rss / ((n - 2) as f64 * sxx)))
}

/// Trapezoid rule on a possibly nonuniform grid.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum()
}
