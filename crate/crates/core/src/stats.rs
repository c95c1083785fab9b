//! Small statistical helpers for Monte Carlo comparisons.

/// Sample mean and its standard error (`NaN` for empty input).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Bernoulli frequency and its standard error.
pub fn proportion(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Half-width of the Dvoretzky–Kiefer–Wolfowitz band at level `alpha`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// `sup_t |F_n(t) − F(t)|` for a continuous reference CDF, checking both
/// one-sided limits at every sample point.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let f = cdf(xs[i]);
        d = d.max((i as f64 / n - f).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic; ties (atoms) are stepped over
/// together so the empirical CDFs are compared only at jump points.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] == v {
            i += 1;
        }
        while j < y.len() && y[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value `c(α)·sqrt((n+m)/(nm))` with
/// `c(α) = sqrt(−ln(α/2)/2)`.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn mean_and_se() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(mean_se(&[]).0.is_nan());
    }

    #[test]
    fn ks_constants() {
        assert!((ks_critical(0.01, 1, 1) / 2f64.sqrt() - 1.6276).abs() < 1e-4);
        assert!((dkw_epsilon(10_000, 0.01) - 0.016276).abs() < 1e-5);
    }

    #[test]
    fn ks_same_and_shifted() {
        let mut r = RngStream::new(3, 0);
        let a: Vec<f64> = (0..5000).map(|_| r.uniform()).collect();
        let b: Vec<f64> = (0..5000).map(|_| r.uniform()).collect();
        let c: Vec<f64> = b.iter().map(|v| v + 0.1).collect();
        let crit = ks_critical(0.01, a.len(), b.len());
        assert!(ks_two_sample(&a, &b) < crit);
        assert!(ks_two_sample(&a, &c) > crit);
        assert!(ks_one_sample(&a, |x| x.clamp(0.0, 1.0)) < dkw_epsilon(a.len(), 0.01));
    }

    #[test]
    fn ks_handles_atoms() {
        let a = vec![1.0; 10];
        let b = vec![1.0; 7];
        assert_eq!(ks_two_sample(&a, &b), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[1.0, 2.0]), 0.5);
    }
}
