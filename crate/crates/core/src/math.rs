//! Small numeric helpers shared across the crate.

/// True for finite, strictly positive values (rejects NaN).
pub fn is_positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Numerically stable `ln(sum(exp(x)))` over a slice.
///
/// Returns negative infinity for an empty slice.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        if x > m {
            m = x;
        }
    }
    if !m.is_finite() {
        return m;
    }
    let mut s = 0.0;
    for &x in xs {
        s += (x - m).exp();
    }
    m + s.ln()
}

/// Exact binomial coefficient C(n, k) in `u128`.
///
/// Panics on overflow; fine for the desk-scale n used here (n <= 64 or so).
pub fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result * (n - i) as u128 / (i + 1) as u128;
    }
    result
}

/// All k-element subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut result = Vec::new();
    let mut combo: Vec<usize> = Vec::with_capacity(k);
    fn recurse(
        start: usize,
        n: usize,
        k: usize,
        combo: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if combo.len() == k {
            out.push(combo.clone());
            return;
        }
        let remaining = k - combo.len();
        for i in start..=(n - remaining) {
            combo.push(i);
            recurse(i + 1, n, k, combo, out);
            combo.pop();
        }
    }
    if k <= n {
        recurse(0, n, k, &mut combo, &mut result);
    }
    result
}

/// In-place lexicographic next permutation. Returns false once the sequence
/// is the last (descending) permutation. Starting from a sorted sequence this
/// visits each distinct multiset permutation exactly once.
pub fn next_permutation<T: Ord>(xs: &mut [T]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut rho = 0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            rho = i + 1;
            theta = t;
        }
    }
    debug_assert!(rho > 0);
    let _ = rho;
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Wilson score interval for a binomial proportion at ~95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// dB to linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio to dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Validates a probability vector: nonnegative entries summing to one within
/// `tol`.
pub fn check_simplex(p: &[f64], tol: f64) -> crate::Result<()> {
    if p.is_empty() {
        return Err(crate::Error::InvalidProbability("empty vector".into()));
    }
    if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(crate::Error::InvalidProbability(
            "entries must be finite and nonnegative".into(),
        ));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(crate::Error::InvalidProbability(format!(
            "entries sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_matches_naive_on_well_scaled_inputs() {
        let xs: [f64; 5] = [0.3, -1.2, 0.07, 2.4, -0.9];
        let naive = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((logsumexp(&xs) - naive).abs() < 1e-12);
    }

    #[test]
    fn logsumexp_stable_for_large_magnitudes() {
        let xs = [1000.0, 998.0];
        let expected = 1000.0 + (1.0 + (-2.0f64).exp()).ln();
        assert!((logsumexp(&xs) - expected).abs() < 1e-12);
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial_u128(4, 2), 6);
        assert_eq!(binomial_u128(8, 6), 28);
        assert_eq!(binomial_u128(6, 4), 15);
        assert_eq!(binomial_u128(40, 20), 137_846_528_820);
        assert_eq!(binomial_u128(3, 5), 0);
    }

    #[test]
    fn k_subsets_lexicographic() {
        let s = k_subsets(4, 2);
        assert_eq!(s.len(), 6);
        assert_eq!(s[0], vec![0, 1]);
        assert_eq!(s[5], vec![2, 3]);
        let mut sorted = s.clone();
        sorted.sort();
        assert_eq!(s, sorted);
    }

    #[test]
    fn next_permutation_visits_distinct_multiset_orderings() {
        let mut xs = vec![1, 2, 2];
        let mut seen = vec![xs.clone()];
        while next_permutation(&mut xs) {
            seen.push(xs.clone());
        }
        assert_eq!(seen, vec![vec![1, 2, 2], vec![2, 1, 2], vec![2, 2, 1]]);
    }

    #[test]
    fn simplex_projection_fixed_point_and_sum() {
        let p = [0.2, 0.5, 0.3];
        let proj = project_to_simplex(&p);
        for (a, b) in p.iter().zip(&proj) {
            assert!((a - b).abs() < 1e-12);
        }
        let q = project_to_simplex(&[1.0, 2.0, -3.0]);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(q.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn wilson_interval_brackets_point_estimate() {
        let (lo, hi) = wilson_interval(10, 1000);
        assert!(lo < 0.01 && 0.01 < hi);
        assert!(lo > 0.0 && hi < 1.0);
    }
}
