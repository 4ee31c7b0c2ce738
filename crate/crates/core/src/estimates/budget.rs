//! Minimal even derivative counts `(N, N', M, M')` for the boundedness theorem
//! and the adjoint calculus.

use std::fmt;

use crate::error::{Error, Result};

/// Largest even integer not greater than `d`.
pub fn floor_even(d: usize) -> usize {
    d - d % 2
}

/// Smallest even integer `k >= 0` with `k > x`.
fn even_above(x: f64) -> usize {
    if x < 0.0 {
        return 0;
    }
    (2.0 * ((x / 2.0).floor() + 1.0)) as usize
}

/// Smallest even integer `k >= 0` with `k >= x`.
fn even_at_least(x: f64) -> usize {
    if x <= 0.0 {
        return 0;
    }
    (2.0 * (x / 2.0).ceil()) as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessBudget {
    pub dim: usize,
    /// Symbol order `m`.
    pub order: f64,
    pub rho: f64,
    pub delta: f64,
    /// `N`: `x`-derivatives of the symbol.
    pub n: usize,
    /// `N'`: `ξ`-derivatives of the symbol.
    pub n_prime: usize,
    /// `M`.
    pub big_m: usize,
    /// `M'`.
    pub big_m_prime: usize,
}

impl fmt::Display for SmoothnessBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} N′={} M={} M′={}", self.n, self.n_prime, self.big_m, self.big_m_prime)
    }
}

/// Thresholds shared by the calculator and the checker.
struct Thresholds {
    n: f64,
    n_prime_six: f64,
    rho_bound: f64,
    nm_strict: f64,
    nm_weak: f64,
    gap: usize,
}

fn thresholds(d: usize, m: f64, rho: f64, delta: f64) -> Thresholds {
    let df = d as f64;
    let e = (floor_even(d) + 2) as f64;
    Thresholds {
        n: ((3.0 - delta) * df + (5.0 - delta) * (1.0 - delta)) / (1.0 - delta).powi(2),
        n_prime_six: 6.0 * df + 12.0,
        rho_bound: (df + m + 1.0) / rho,
        nm_strict: (df + e * delta) / (1.0 - delta),
        nm_weak: (-m + (1.0 - delta) * df + e * delta) / (1.0 - delta),
        gap: floor_even(d) + 2,
    }
}

fn validate(d: usize, m: f64, rho: f64, delta: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if !m.is_finite() {
        return Err(Error::invalid("order m must be finite"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::invalid(format!("rho must lie in (0, 1], got {rho}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(format!("delta must lie in [0, 1), got {delta}")));
    }
    Ok(())
}

/// Componentwise-minimal even `(N, N', M, M')` with `M = 0`.
///
/// Errors with [`Error::Infeasible`] if `M = 0` violates an `N - M` inequality
/// or no even `M'` fits between its lower bounds and `N' - ⌊d⌋₂ - 2`.
pub fn smoothness_budget(d: usize, m: f64, rho: f64, delta: f64) -> Result<SmoothnessBudget> {
    validate(d, m, rho, delta)?;
    let t = thresholds(d, m, rho, delta);
    let n = even_above(t.n);
    let n_prime = even_above(t.n_prime_six).max(even_at_least((d + 1) as f64)).max(even_above(t.rho_bound));
    let big_m = 0usize;

    let mut binding = Vec::new();
    let nm = (n - big_m) as f64;
    if !(nm > t.nm_strict) {
        binding.push(format!("N - M = {nm} must exceed (d + (⌊d⌋₂+2)δ)/(1-δ) = {}", t.nm_strict));
    }
    if !(nm >= t.nm_weak) {
        binding.push(format!("N - M = {nm} must be at least (-m + (1-δ)d + (⌊d⌋₂+2)δ)/(1-δ) = {}", t.nm_weak));
    }
    let lower = even_at_least((d + 1) as f64).max(even_above(t.rho_bound)).max(even_at_least(d as f64));
    let upper = n_prime.checked_sub(t.gap);
    match upper {
        Some(u) if lower <= u => {}
        _ => binding.push(format!(
            "M' >= {lower} (from M' >= d+1, M' > (d+m+1)/ρ = {}, M' >= d) but N' - ⌊d⌋₂ - 2 = {}",
            t.rho_bound,
            n_prime as i64 - t.gap as i64
        )),
    }
    if !binding.is_empty() {
        return Err(Error::Infeasible { binding });
    }
    Ok(SmoothnessBudget { dim: d, order: m, rho, delta, n, n_prime, big_m, big_m_prime: lower })
}

/// Lists every inequality that `b` violates; empty when all hold.
///
/// Written independently of [`smoothness_budget`]: each condition is tested
/// directly on the integers with exact comparisons.
pub fn check_budget(b: &SmoothnessBudget) -> Vec<String> {
    let mut bad = Vec::new();
    let t = thresholds(b.dim, b.order, b.rho, b.delta);
    let d = b.dim as f64;
    let (n, np, mm, mp) = (b.n as f64, b.n_prime as f64, b.big_m as f64, b.big_m_prime as f64);
    let mut need = |ok: bool, what: &str| {
        if !ok {
            bad.push(what.to_string());
        }
    };
    need([b.n, b.n_prime, b.big_m, b.big_m_prime].iter().all(|v| v % 2 == 0), "all counts even");
    need(n > t.n, "N > ((3-δ)d + (5-δ)(1-δ))/(1-δ)²");
    need(np > t.n_prime_six, "N' > 6d + 12");
    need(np >= d + 1.0, "N' >= d + 1");
    need(np > t.rho_bound, "N' > (d+m+1)/ρ");
    need(n - mm > t.nm_strict, "N - M > (d + (⌊d⌋₂+2)δ)/(1-δ)");
    need(n - mm >= t.nm_weak, "N - M >= (-m + (1-δ)d + (⌊d⌋₂+2)δ)/(1-δ)");
    need(b.n_prime >= b.big_m_prime + t.gap, "N' - M' >= ⌊d⌋₂ + 2");
    need(mp >= d + 1.0, "M' >= d + 1");
    need(mp > t.rho_bound, "M' > (d+m+1)/ρ");
    need(mp >= d, "M' >= d");
    bad
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive search for the smallest even values in `0..=limit` passing `check_budget`,
    /// one component at a time with the others held at the calculator's output.
    fn brute_force(d: usize, m: f64, rho: f64, delta: f64, limit: usize) -> (usize, usize, usize, usize) {
        let b = smoothness_budget(d, m, rho, delta).unwrap();
        let ok = |c: SmoothnessBudget| check_budget(&c).is_empty();
        let first = |f: &dyn Fn(usize) -> SmoothnessBudget| (0..=limit).step_by(2).find(|&v| ok(f(v))).unwrap();
        // N' and M' interact through N' - M' >= ⌊d⌋₂ + 2, so N' is searched with M' at its own minimum
        let n = first(&|v| SmoothnessBudget { n: v, ..b });
        let mp = first(&|v| SmoothnessBudget { big_m_prime: v, ..b });
        let np = first(&|v| SmoothnessBudget { n_prime: v, big_m_prime: mp, ..b });
        let mm = first(&|v| SmoothnessBudget { big_m: v, ..b });
        (n, np, mm, mp)
    }

    #[test]
    fn one_dimensional_classical_case() {
        let b = smoothness_budget(1, 0.0, 1.0, 0.0).unwrap();
        assert_eq!((b.n, b.n_prime, b.big_m, b.big_m_prime), (10, 20, 0, 4));
        assert_eq!(b.to_string(), "N=10 N′=20 M=0 M′=4");
        assert!(check_budget(&b).is_empty());
        assert_eq!(brute_force(1, 0.0, 1.0, 0.0, 60), (10, 20, 0, 4));
    }

    #[test]
    fn two_dimensional_half_delta() {
        let b = smoothness_budget(2, 0.0, 1.0, 0.5).unwrap();
        assert_eq!((b.n, b.n_prime), (30, 26));
        let (n, np, _, _) = brute_force(2, 0.0, 1.0, 0.5, 60);
        assert_eq!((n, np), (30, 26));
    }

    #[test]
    fn n_prime_ignores_delta_when_six_d_binds() {
        for d in 1..=3 {
            let np: Vec<usize> =
                [0.0, 0.3, 0.6].iter().map(|&delta| smoothness_budget(d, 0.0, 1.0, delta).unwrap().n_prime).collect();
            assert!(np.iter().all(|&v| v == np[0]), "d={d}: {np:?}");
            assert_eq!(np[0], even_above(6.0 * d as f64 + 12.0));
        }
    }

    #[test]
    fn infeasible_systems_name_their_constraints() {
        // small ρ pushes M' past N' - ⌊d⌋₂ - 2
        match smoothness_budget(1, 0.0, 0.05, 0.0) {
            Err(Error::Infeasible { binding }) => assert!(binding.iter().any(|b| b.contains("M'"))),
            other => panic!("{other:?}"),
        }
        assert!(smoothness_budget(1, 0.0, 0.0, 0.0).is_err());
        assert!(smoothness_budget(1, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn floor_even_values() {
        assert_eq!(floor_even(1), 0);
        assert_eq!(floor_even(2), 2);
        assert_eq!(floor_even(3), 2);
        assert_eq!(even_above(8.0), 10);
        assert_eq!(even_above(7.5), 8);
        assert_eq!(even_at_least(8.0), 8);
    }

    proptest::proptest! {
        #[test]
        fn output_satisfies_every_inequality(
            d in 1usize..=3, m in -4.0f64..1.0, rho in 0.3f64..=1.0, delta in 0.0f64..0.9
        ) {
            if let Ok(b) = smoothness_budget(d, m, rho, delta) {
                proptest::prop_assert!(check_budget(&b).is_empty(), "{:?}", check_budget(&b));
                // minimality: stepping any component down by 2 breaks something
                for lower in [
                    SmoothnessBudget { n: b.n.wrapping_sub(2), ..b },
                    SmoothnessBudget { big_m_prime: b.big_m_prime.wrapping_sub(2), ..b },
                ] {
                    if lower.n <= b.n && lower.big_m_prime <= b.big_m_prime {
                        proptest::prop_assert!(!check_budget(&lower).is_empty());
                    }
                }
            }
        }
    }
}
