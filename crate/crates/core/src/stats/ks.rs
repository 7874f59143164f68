use super::TestReport;
use crate::error::{Error, Result};

/// Largest vertical distance between the two empirical CDFs, by a merge scan
/// over the sorted samples. Ties are consumed together before comparing.
pub fn ks_statistic(x: &[f64], y: &[f64]) -> f64 {
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²)`,
/// summed until a term drops below `1e-10`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1.. {
        let term = (-2.0 * (j as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-10 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<TestReport> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "KS test needs at least 2 points per sample, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in KS sample".into()));
    }
    let d = ks_statistic(x, y);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let lambda = d * (n * m / (n + m)).sqrt();
    Ok(TestReport::new(d, kolmogorov_q(lambda), None, format!("two-sample KS, n={} m={}", x.len(), y.len())))
}
