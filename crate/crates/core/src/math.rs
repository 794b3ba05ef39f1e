//! Small numeric helpers shared across modules.

/// `ln(n!)` by direct summation. Exact enough for the photon numbers used here
/// (a few hundred at most).
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Table of `ln(k!)` for `k = 0..=n`.
pub fn ln_factorial_table(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(acc);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `C(n,k) p^k (1-p)^(n-k)` with the `0^0 = 1` convention at the endpoints.
pub fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * q.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-14);
        let t = ln_factorial_table(10);
        assert!((t[10] - 3_628_800f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn pmf_endpoints_and_value() {
        assert_eq!(binomial_pmf(3, 0, 0.0), 1.0);
        assert_eq!(binomial_pmf(3, 3, 1.0), 1.0);
        assert_eq!(binomial_pmf(3, 2, 1.0), 0.0);
        assert!((binomial_pmf(3, 2, 0.5) - 0.375).abs() < 1e-15);
    }
}
