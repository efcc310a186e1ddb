//! Sums `Σ j^p` over arithmetic progressions of nonnegative integers,
//! evaluated directly for desk-sized ranges and by a midpoint expansion with
//! derivative correction for astronomically long ones, so cycle-profile norms
//! stay cheap at every block size.

use alloc::format;

use crate::error::{Error, Result};

/// Progressions at most this long are summed term by term.
const DIRECT_CAP: f64 = 1_000_000.0;

/// `Σ x^p` for `x = lo, lo + step, …` up to `hi` inclusive (when `hi` lands
/// on the progression; otherwise the last term below it). Requires
/// `lo ≥ 0`, `step ≥ 1` and `p ≥ 1`. Empty when `hi < lo`.
pub fn power_sum_arith(lo: f64, hi: f64, step: f64, p: f64) -> Result<f64> {
    if !(lo >= 0.0) || !(step >= 1.0) || !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "power_sum_arith needs lo >= 0, step >= 1, p >= 1 (lo = {lo}, step = {step}, p = {p})"
        )));
    }
    if hi < lo {
        return Ok(0.0);
    }
    let count = libm::floor((hi - lo) / step) + 1.0;
    let last = lo + (count - 1.0) * step;
    if count <= DIRECT_CAP {
        return Ok(direct(lo, count, step, p));
    }
    // Split so the expansion only ever runs far from zero, where its error
    // terms (proportional to x^{p−3}) are negligible against the total.
    let head_count = DIRECT_CAP;
    let head_last = lo + (head_count - 1.0) * step;
    Ok(direct(lo, head_count, step, p) + midpoint(head_last + step, last, step, p))
}

fn direct(lo: f64, count: f64, step: f64, p: f64) -> f64 {
    let n = count as u64;
    let mut sum = 0.0;
    // Accumulate small terms first.
    for i in (0..n).rev() {
        let x = lo + i as f64 * step;
        sum += libm::pow(x, p);
    }
    sum
}

/// Midpoint-rule evaluation of `Σ_{x = lo, lo+step, …, hi} x^p` with the
/// first Euler-Maclaurin style correction:
/// `(1/s)·[G(hi + s/2) − G(lo − s/2)] − (s/24)·[g'(hi + s/2) − g'(lo − s/2)]`
/// for `g = x^p`, `G = x^{p+1}/(p+1)`. The next omitted term scales like
/// `s³·p³·x^{p−3}`, immaterial once `lo ≫ 1`.
fn midpoint(lo: f64, hi: f64, step: f64, p: f64) -> f64 {
    let a = lo - step / 2.0;
    let b = hi + step / 2.0;
    let integral = (libm::pow(b, p + 1.0) - libm::pow(a, p + 1.0)) / (p + 1.0);
    let correction = step * step / 24.0 * p * (libm::pow(b, p - 1.0) - libm::pow(a, p - 1.0));
    integral / step - correction / step
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_p1(n: f64) -> f64 {
        n * (n + 1.0) / 2.0
    }

    fn exact_p2(n: f64) -> f64 {
        n * (n + 1.0) * (2.0 * n + 1.0) / 6.0
    }

    fn exact_p3(n: f64) -> f64 {
        let s = exact_p1(n);
        s * s
    }

    #[test]
    fn small_ranges_match_brute_force() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            for lo in 0..6u32 {
                for hi in 0..40u32 {
                    for step in 1..4u32 {
                        let got =
                            power_sum_arith(lo as f64, hi as f64, step as f64, p).unwrap();
                        let mut want = 0.0;
                        let mut x = lo;
                        while x <= hi {
                            want += libm::pow(x as f64, p);
                            x += step;
                        }
                        assert!(
                            (got - want).abs() <= 1e-10 * (1.0 + want),
                            "lo {lo} hi {hi} step {step} p {p}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn huge_ranges_match_polynomial_identities() {
        // [DERIVED] oracle: Faulhaber formulas for integer exponents.
        for n in [1e7, 1e9, 3.5e10] {
            let s1 = power_sum_arith(1.0, n, 1.0, 1.0).unwrap();
            assert!((s1 - exact_p1(n)).abs() <= 1e-9 * exact_p1(n), "p=1, n={n}");
            let s2 = power_sum_arith(1.0, n, 1.0, 2.0).unwrap();
            assert!((s2 - exact_p2(n)).abs() <= 1e-9 * exact_p2(n), "p=2, n={n}");
            let s3 = power_sum_arith(1.0, n, 1.0, 3.0).unwrap();
            assert!((s3 - exact_p3(n)).abs() <= 1e-9 * exact_p3(n), "p=3, n={n}");
        }
    }

    #[test]
    fn huge_stride_two_even_ranges_reduce_to_stride_one() {
        // Σ (2i)^p = 2^p Σ i^p gives an independent closed check.
        for p in [1.0, 2.0, 3.0] {
            let n = 1e9;
            let got = power_sum_arith(2.0, 2.0 * n, 2.0, p).unwrap();
            let want = libm::pow(2.0, p) * power_sum_arith(1.0, n, 1.0, p).unwrap();
            assert!((got - want).abs() <= 1e-8 * want, "p = {p}: {got} vs {want}");
        }
    }

    #[test]
    fn narrow_window_far_from_zero() {
        // 2·10⁶ consecutive integers starting at 10¹²: the head/tail split
        // must agree with the all-direct evaluation via a difference of the
        // p = 2 closed form.
        let lo = 1e12;
        let hi = 1e12 + 2e6;
        let got = power_sum_arith(lo, hi, 1.0, 2.0).unwrap();
        let want = exact_p2(hi) - exact_p2(lo - 1.0);
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn fractional_exponent_consistency_at_the_split() {
        // Continuity check across the direct/midpoint boundary for p = 1.5:
        // summing [1, N] must equal summing [1, M] plus [M+1, N].
        let n = 5e6;
        let m = 2.5e6;
        let whole = power_sum_arith(1.0, n, 1.0, 1.5).unwrap();
        let parts = power_sum_arith(1.0, m, 1.0, 1.5).unwrap()
            + power_sum_arith(m + 1.0, n, 1.0, 1.5).unwrap();
        assert!((whole - parts).abs() <= 1e-9 * whole, "{whole} vs {parts}");
    }

    #[test]
    fn empty_and_invalid() {
        assert_eq!(power_sum_arith(5.0, 4.0, 1.0, 2.0).unwrap(), 0.0);
        assert!(power_sum_arith(-1.0, 4.0, 1.0, 2.0).is_err());
        assert!(power_sum_arith(0.0, 4.0, 0.5, 2.0).is_err());
        assert!(power_sum_arith(0.0, 4.0, 1.0, 0.5).is_err());
    }
}
