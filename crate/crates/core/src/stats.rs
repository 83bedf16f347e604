//! Small statistical helpers: moments, correlations, Kolmogorov-Smirnov.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Standard error of the mean for independent samples.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Standard error of the mean of a correlated series via non-overlapping batch means.
pub fn batch_means_se(xs: &[f64], n_batches: usize) -> f64 {
    let len = xs.len() / n_batches;
    let batches: Vec<f64> = xs.chunks_exact(len).take(n_batches).map(mean).collect();
    std_error(&batches)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Ranks with ties assigned their average rank (1-based).
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(&ranks(xs), &ranks(ys))
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample KS statistic of `sample` against a continuous CDF.
pub fn ks_against_cdf(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|x, y| x.total_cmp(y));
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Asymptotic p-value of the two-sample KS statistic.
pub fn ks_pvalue(d: f64, n1: usize, n2: usize) -> f64 {
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let sq = ne.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Trapezoid rule on a (not necessarily uniform) grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Running trapezoid integral, starting at 0.
pub fn cumulative_trapezoid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    out.push(acc);
    for (x, y) in xs.windows(2).zip(ys.windows(2)) {
        acc += 0.5 * (x[1] - x[0]) * (y[0] + y[1]);
        out.push(acc);
    }
    out
}

/// Piecewise-linear interpolation on an increasing grid, clamped at both ends.
/// NaN maps to NaN.
pub fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&g| g <= x) - 1;
    let f = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + f * (ys[k + 1] - ys[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interp_clamps_and_passes_nan() {
        let (xs, ys) = ([0.0, 1.0, 3.0], [0.0, 2.0, 4.0]);
        assert_eq!(interp(&xs, &ys, -1.0), 0.0);
        assert_eq!(interp(&xs, &ys, 2.0), 3.0);
        assert_eq!(interp(&xs, &ys, 9.0), 4.0);
        assert!(interp(&xs, &ys, f64::NAN).is_nan());
    }

    #[test]
    fn spearman_handles_ties_and_monotone() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[0.0, 0.1, 5.0, 9.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(ranks(&[0.0, 0.0, 1.0]), vec![1.5, 1.5, 3.0]);
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&a, &[10.0, 11.0]), 1.0);
        assert!(ks_pvalue(0.0, 100, 100) > 0.99);
        assert!(ks_pvalue(0.5, 100, 100) < 1e-6);
    }

    #[test]
    fn ks_uniform_cdf() {
        let s: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!(ks_against_cdf(&s, |x| x.clamp(0.0, 1.0)) <= 0.005 + 1e-12);
    }

    #[test]
    fn trapezoid_exact_for_linear() {
        let xs = [0.0, 0.5, 2.0];
        let ys = [1.0, 2.0, 5.0];
        assert!((trapezoid(&xs, &ys) - 6.0).abs() < 1e-12);
        assert_eq!(cumulative_trapezoid(&xs, &ys).last().copied(), Some(6.0));
        assert!((interp(&xs, &ys, 1.25) - 3.5).abs() < 1e-12);
    }
}
