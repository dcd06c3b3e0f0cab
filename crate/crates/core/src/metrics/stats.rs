//! Small statistics helpers. Sums run over sorted copies so results do not
//! depend on input order.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    sorted(xs).iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n - 1 denominator); zero for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    sorted(&sq).iter().sum::<f64>() / (xs.len() - 1) as f64
}

/// Normal-approximation 95% interval for the mean.
pub fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let half = 1.959_963_984_540_054 * (variance(xs) / xs.len() as f64).sqrt();
    (m - half, m + half)
}

/// Normal-approximation 95% interval for a proportion.
pub fn proportion_ci(successes: usize, n: usize) -> (f64, f64) {
    let p = successes as f64 / n as f64;
    let half = 1.959_963_984_540_054 * (p * (1.0 - p) / n as f64).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

/// One-sided Welch test of `mean(a) > mean(b)`. Returns (t, df, p), or
/// `None` when either sample has fewer than two values or both have zero
/// variance.
pub fn welch_greater(a: &[f64], b: &[f64]) -> Option<(f64, f64, f64)> {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let (va, vb) = (variance(a) / na, variance(b) / nb);
    let diff = mean(a) - mean(b);
    let se2 = va + vb;
    if se2 == 0.0 {
        return None;
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let p = match StudentsT::new(0.0, 1.0, df) {
        Ok(dist) => 1.0 - dist.cdf(t),
        Err(_) => 1.0 - standard_normal_cdf(t),
    };
    Some((t, df, p))
}

/// One-sided pooled two-proportion z test of `p_a > p_b`. Returns (z, p).
pub fn proportion_greater(sa: usize, na: usize, sb: usize, nb: usize) -> (f64, f64) {
    let (pa, pb) = (sa as f64 / na as f64, sb as f64 / nb as f64);
    let pooled = (sa + sb) as f64 / (na + nb) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / na as f64 + 1.0 / nb as f64)).sqrt();
    if se == 0.0 {
        return (0.0, if pa > pb { 0.0 } else { 1.0 });
    }
    let z = (pa - pb) / se;
    (z, 1.0 - standard_normal_cdf(z))
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("valid").cdf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn moments() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&xs), 5.0);
        assert_abs_diff_eq!(variance(&xs), 32.0 / 7.0, epsilon = 1e-12);
    }

    #[test]
    fn welch_matches_reference_values() {
        // two samples with known Welch statistics (hand-computed)
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [0.0, 0.5, 1.0, 1.5, 2.0];
        let (t, df, p) = welch_greater(&a, &b).unwrap();
        // means 3 and 1, variances 2.5 and 0.625
        let se = (2.5f64 / 5.0 + 0.625 / 5.0).sqrt();
        assert_abs_diff_eq!(t, 2.0 / se, epsilon = 1e-12);
        let want_df = (0.625f64).powi(2) / (0.5f64.powi(2) / 4.0 + 0.125f64.powi(2) / 4.0);
        assert_abs_diff_eq!(df, want_df, epsilon = 1e-9);
        assert!(p > 0.0 && p < 0.05);
        let (_, _, p_rev) = welch_greater(&b, &a).unwrap();
        assert!(welch_greater(&[1.0], &a).is_none());
        assert_abs_diff_eq!(p + p_rev, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn proportions() {
        let (z, p) = proportion_greater(60, 100, 40, 100);
        assert!(z > 2.8 && z < 2.9, "{z}");
        assert!(p < 0.01);
        let (lo, hi) = proportion_ci(50, 100);
        assert_abs_diff_eq!(hi - lo, 2.0 * 1.959963984540054 * 0.05, epsilon = 1e-12);
    }
}
