//! Dense univariate polynomials in the power basis, `coeffs[k]` multiplying `x^k`.

pub(crate) fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub(crate) fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| a * k as f64)
        .collect()
}

pub(crate) fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub(crate) fn add_scaled(acc: &mut Vec<f64>, p: &[f64], factor: f64) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, &x) in acc.iter_mut().zip(p) {
        *a += factor * x;
    }
}

/// Power-basis coefficients to Bernstein coefficients over `[0, 1]`.
pub(crate) fn to_bernstein(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len().saturating_sub(1);
    (0..=n)
        .map(|i| {
            (0..=i)
                .map(|k| crate::curves::binomial(i, k) / crate::curves::binomial(n, k) * coeffs[k])
                .sum()
        })
        .collect()
}

/// De Casteljau split of Bernstein coefficients at `lambda`.
pub(crate) fn split_bernstein(b: &[f64], lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = b.len();
    let mut work = b.to_vec();
    let mut left = Vec::with_capacity(n);
    let mut right = vec![0.0; n];
    left.push(work[0]);
    right[n - 1] = work[n - 1];
    for level in 1..n {
        for i in 0..n - level {
            work[i] = (1.0 - lambda) * work[i] + lambda * work[i + 1];
        }
        left.push(work[0]);
        right[n - 1 - level] = work[n - 1 - level];
    }
    (left, right)
}
