//! Shared oracles for the integration tests: quadrature, one-sample
//! Kolmogorov–Smirnov and chi-square goodness of fit. These stay
//! independent of the library's sampling paths.

#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Composite Simpson rule with `2n` panels.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let m = 2 * n;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Simpson with interval doubling until two refinements agree.
pub fn simpson_refined(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut n = 1 << 12;
    let mut prev = simpson(f, a, b, n);
    for _ in 0..8 {
        n *= 2;
        let next = simpson(f, a, b, n);
        if (next - prev).abs() <= rel_tol * next.abs().max(1e-300) {
            return next;
        }
        prev = next;
    }
    prev
}

/// Asymptotic KS p-value.
pub fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let lambda = (n_eff.sqrt() + 0.12 + 0.11 / n_eff.sqrt()) * d;
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut p = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64 * lambda).powi(2)).exp();
        p += 2.0 * sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// One-sample KS test against a CDF; returns the p-value.
pub fn ks_one_sample(draws: &mut [f64], cdf: &dyn Fn(f64) -> f64) -> f64 {
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = draws.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in draws.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - c).abs());
    }
    ks_p_value(d, n)
}

/// Chi-square goodness-of-fit p-value for observed counts against equal
/// expected bin probabilities.
pub fn chi2_equal_bins_p(counts: &[usize], total: usize) -> f64 {
    let k = counts.len();
    let expect = total as f64 / k as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expect;
            d * d / expect
        })
        .sum();
    let chi = ChiSquared::new((k - 1) as f64).unwrap();
    1.0 - chi.cdf(stat)
}

/// Sample mean and the Monte Carlo standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
