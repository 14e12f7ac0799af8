//! Exact resonance functions and resonant index sets.
//!
//! ```text
//! H2(n1, n2)     = (n1 + n2)^5 - n1^5 - n2^5
//!                = (5/2) n1 n2 (n1 + n2) (n1^2 + n2^2 + (n1 + n2)^2)
//! H3(n1, n2, n3) = (n1 + n2 + n3)^5 - n1^5 - n2^5 - n3^5
//!                = (5/2) (n1 + n2)(n1 + n3)(n2 + n3) (n1^2 + n2^2 + n3^2 + (n1 + n2 + n3)^2)
//! ```
//!
//! Values are computed in checked `i128` arithmetic and fall back to big
//! integers when a fifth power would overflow.

use alloc::vec::Vec;
use num_bigint::BigInt;
use num_traits::{Float, Zero};

use crate::dyadic::band_contains;
use crate::equation::EquationParams;

fn pow5(n: i128) -> Option<i128> {
    n.checked_mul(n)?
        .checked_mul(n)?
        .checked_mul(n)?
        .checked_mul(n)
}

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn big_pow5(n: &BigInt) -> BigInt {
    n.pow(5u32)
}

pub(crate) fn h2_i128(n1: i64, n2: i64) -> Option<i128> {
    let (a, b) = (n1 as i128, n2 as i128);
    pow5(a + b)?.checked_sub(pow5(a)?)?.checked_sub(pow5(b)?)
}

fn h2_power_sum(n1: i64, n2: i64) -> BigInt {
    match h2_i128(n1, n2) {
        Some(v) => BigInt::from(v),
        None => big_pow5(&(big(n1) + big(n2))) - big_pow5(&big(n1)) - big_pow5(&big(n2)),
    }
}

/// `(n1 + n2)^5 - n1^5 - n2^5`.
pub fn h2(n1: i64, n2: i64) -> BigInt {
    let v = h2_power_sum(n1, n2);
    debug_assert_eq!(v, h2_factorized(n1, n2));
    v
}

/// `(5/2) n1 n2 (n1 + n2)(n1^2 + n2^2 + (n1 + n2)^2)`; the product `n1 n2 (n1 + n2)` is even.
pub fn h2_factorized(n1: i64, n2: i64) -> BigInt {
    let (a, b) = (big(n1), big(n2));
    let s = &a + &b;
    let cubic = &a * &b * &s;
    let squares = &a * &a + &b * &b + &s * &s;
    cubic * squares * 5 / 2
}

pub(crate) fn h3_i128(n1: i64, n2: i64, n3: i64) -> Option<i128> {
    let (a, b, c) = (n1 as i128, n2 as i128, n3 as i128);
    pow5(a + b + c)?
        .checked_sub(pow5(a)?)?
        .checked_sub(pow5(b)?)?
        .checked_sub(pow5(c)?)
}

fn h3_power_sum(n1: i64, n2: i64, n3: i64) -> BigInt {
    match h3_i128(n1, n2, n3) {
        Some(v) => BigInt::from(v),
        None => {
            let (a, b, c) = (big(n1), big(n2), big(n3));
            big_pow5(&(&a + &b + &c)) - big_pow5(&a) - big_pow5(&b) - big_pow5(&c)
        }
    }
}

/// `(n1 + n2 + n3)^5 - n1^5 - n2^5 - n3^5`.
pub fn h3(n1: i64, n2: i64, n3: i64) -> BigInt {
    let v = h3_power_sum(n1, n2, n3);
    debug_assert_eq!(v, h3_factorized(n1, n2, n3));
    v
}

fn h3_squares(n1: i64, n2: i64, n3: i64) -> BigInt {
    let (a, b, c) = (big(n1), big(n2), big(n3));
    let s = &a + &b + &c;
    &a * &a + &b * &b + &c * &c + &s * &s
}

/// `(5/2)(n1 + n2)(n1 + n3)(n2 + n3)(n1^2 + n2^2 + n3^2 + (n1 + n2 + n3)^2)`.
pub fn h3_factorized(n1: i64, n2: i64, n3: i64) -> BigInt {
    let p = big(n1 + n2) * big(n1 + n3) * big(n2 + n3);
    p * h3_squares(n1, n2, n3) * 5 / 2
}

/// The variant with the repeated factor `(n1 + n2)^2 (n2 + n3)`, kept for the
/// discrepancy report. It disagrees with the power sum, e.g. at `(1, 2, 3)`.
pub fn h3_factorized_printed(n1: i64, n2: i64, n3: i64) -> BigInt {
    let p = big(n1 + n2) * big(n1 + n2) * big(n2 + n3);
    p * h3_squares(n1, n2, n3) * 5 / 2
}

/// Which closed form of `H3` a scan compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum H3Form {
    Corrected,
    Printed,
}

/// First disagreement found by an identity scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub n: Vec<i64>,
    pub power_sum: BigInt,
    pub factorized: BigInt,
}

/// Outcome of an exhaustive identity scan over `|n_i| <= range`.
///
/// Triples are visited shell by shell in the sup norm, so the recorded
/// first mismatch is one of smallest sup norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityScan {
    pub range: i64,
    pub checked: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<Mismatch>,
}

impl IdentityScan {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Exhaustive comparison of `H2` with its factorization.
pub fn scan_h2(range: i64) -> IdentityScan {
    let mut scan = IdentityScan {
        range,
        checked: 0,
        mismatches: 0,
        first_mismatch: None,
    };
    for r in 0..=range {
        for n1 in -r..=r {
            for n2 in -r..=r {
                if n1.abs().max(n2.abs()) != r {
                    continue;
                }
                scan.checked += 1;
                let v = h2_power_sum(n1, n2);
                let f = h2_factorized(n1, n2);
                if v != f {
                    scan.mismatches += 1;
                    scan.first_mismatch.get_or_insert(Mismatch {
                        n: alloc::vec![n1, n2],
                        power_sum: v,
                        factorized: f,
                    });
                }
            }
        }
    }
    scan
}

fn h3_i128_corrected(n1: i64, n2: i64, n3: i64) -> i128 {
    let (a, b, c) = (n1 as i128, n2 as i128, n3 as i128);
    let s = a + b + c;
    let p = (a + b) * (a + c) * (b + c);
    p * (a * a + b * b + c * c + s * s) * 5 / 2
}

fn h3_i128_printed(n1: i64, n2: i64, n3: i64) -> i128 {
    let (a, b, c) = (n1 as i128, n2 as i128, n3 as i128);
    let s = a + b + c;
    let p = (a + b) * (a + b) * (b + c);
    p * (a * a + b * b + c * c + s * s) * 5 / 2
}

/// Exhaustive comparison of `H3` with one of its closed forms.
pub fn scan_h3(range: i64, form: H3Form) -> IdentityScan {
    let mut scan = IdentityScan {
        range,
        checked: 0,
        mismatches: 0,
        first_mismatch: None,
    };
    // i128 is exact for |n| well beyond any practical scan range
    let fast = range <= 1 << 20;
    for r in 0..=range {
        for n1 in -r..=r {
            for n2 in -r..=r {
                let inner = n1.abs().max(n2.abs()) == r;
                let mut visit = |n3: i64| {
                    scan.checked += 1;
                    let equal = if fast {
                        let v = h3_i128(n1, n2, n3).unwrap();
                        let f = match form {
                            H3Form::Corrected => h3_i128_corrected(n1, n2, n3),
                            H3Form::Printed => h3_i128_printed(n1, n2, n3),
                        };
                        v == f
                    } else {
                        h3_power_sum(n1, n2, n3) == closed_h3(n1, n2, n3, form)
                    };
                    if !equal {
                        scan.mismatches += 1;
                        if scan.first_mismatch.is_none() {
                            scan.first_mismatch = Some(Mismatch {
                                n: alloc::vec![n1, n2, n3],
                                power_sum: h3_power_sum(n1, n2, n3),
                                factorized: closed_h3(n1, n2, n3, form),
                            });
                        }
                    }
                };
                if inner {
                    for n3 in -r..=r {
                        visit(n3);
                    }
                } else if r > 0 {
                    visit(-r);
                    visit(r);
                }
            }
        }
    }
    scan
}

fn closed_h3(n1: i64, n2: i64, n3: i64, form: H3Form) -> BigInt {
    match form {
        H3Form::Corrected => h3_factorized(n1, n2, n3),
        H3Form::Printed => h3_factorized_printed(n1, n2, n3),
    }
}

/// `n1^3 + n2^3 - (n1 + n2)^3 = -3 n1 n2 (n1 + n2)`, exactly.
pub fn cubic_defect(n1: i64, n2: i64) -> i128 {
    let (a, b) = (n1 as i128, n2 as i128);
    -3 * a * b * (a + b)
}

/// `G(n1, n2) = mu(n1) + mu(n2) - mu(n1 + n2)`.
///
/// Evaluated as `-H2 + c1 (n1^3 + n2^3 - (n1 + n2)^3)`; the `c2` terms cancel
/// identically, so no large powers are subtracted in floating point.
pub fn g_function(n1: i64, n2: i64, params: &EquationParams) -> f64 {
    let h = match h2_i128(n1, n2) {
        Some(v) => v as f64,
        None => bigint_to_f64(&h2_power_sum(n1, n2)),
    };
    let c1 = if params.is_renormalized() { params.c1() } else { 0.0 };
    -h + c1 * cubic_defect(n1, n2) as f64
}

/// `-G` split as `integer + fraction` with `0 <= fraction < 1`, exact when
/// `|n_i|` stays below about `2^24`.
pub fn minus_g_split(n1: i64, n2: i64, params: &EquationParams) -> (i128, f64) {
    let h = h2_i128(n1, n2).expect("frequencies within i128 range");
    let c1 = if params.is_renormalized() { params.c1() } else { 0.0 };
    // -G = H2 - c1 * defect
    let q = c1 * cubic_defect(n1, n2) as f64;
    let ceil = q.ceil();
    let mut int = h - ceil as i128;
    let mut frac = ceil - q;
    if frac >= 1.0 {
        int += 1;
        frac -= 1.0;
    }
    (int, frac)
}

pub(crate) fn bigint_to_f64(v: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(if v.is_zero() { 0.0 } else { f64::INFINITY })
}

/// `|G| / (|n1 n2 (n1 + n2)| (n1^2 + n2^2 + (n1 + n2)^2))`, the constant in the
/// lower bound for `G`; `None` on the resonant set.
pub fn g_lower_bound_ratio(n1: i64, n2: i64, params: &EquationParams) -> Option<f64> {
    let s = n1 + n2;
    if n1 == 0 || n2 == 0 || s == 0 {
        return None;
    }
    let prod = (n1 as f64 * n2 as f64 * s as f64).abs();
    let squares = (n1 * n1 + n2 * n2 + s * s) as f64;
    Some(g_function(n1, n2, params).abs() / (prod * squares))
}

/// Minimum of [`g_lower_bound_ratio`] over `0 < |n_i| <= range`, `n1 + n2 != 0`.
pub fn g_lower_bound_scan(range: i64, params: &EquationParams) -> (f64, (i64, i64)) {
    let mut best = (f64::INFINITY, (0, 0));
    for n1 in -range..=range {
        for n2 in -range..=range {
            if let Some(r) = g_lower_bound_ratio(n1, n2, params) {
                if r < best.0 {
                    best = (r, (n1, n2));
                }
            }
        }
    }
    best
}

/// Pairs `n1 + n2 = n` with `|n_i| <= nmax` and `n n1 n2 != 0`.
pub fn enumerate_n2(n: i64, nmax: i64) -> Vec<(i64, i64)> {
    if n == 0 {
        return Vec::new();
    }
    (-nmax..=nmax)
        .filter_map(|n1| {
            let n2 = n - n1;
            (n1 != 0 && n2 != 0 && n2.abs() <= nmax).then_some((n1, n2))
        })
        .collect()
}

/// Triples summing to `n` with `|n_i| <= nmax` and `(n1+n2)(n1+n3)(n2+n3) != 0`.
pub fn enumerate_n3(n: i64, nmax: i64) -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    for n1 in -nmax..=nmax {
        for n2 in -nmax..=nmax {
            let n3 = n - n1 - n2;
            if n3.abs() <= nmax && n1 + n2 != 0 && n1 + n3 != 0 && n2 + n3 != 0 {
                out.push((n1, n2, n3));
            }
        }
    }
    out
}

/// Integer support `[lo, hi]` of `|n|` on dyadic band `k`.
pub fn band_range(k: u32) -> (i64, i64) {
    if k == 0 {
        (0, 1)
    } else {
        ((1i64 << (k - 1)) + 1, (1i64 << (k + 1)) - 1)
    }
}

/// Open modulation support of band `j`: `|z| < 2` for `j = 0`,
/// `2^{j-1} < |z| < 2^{j+1}` otherwise.
pub fn modulation_band(j: u32) -> (f64, f64) {
    if j == 0 {
        (0.0, 2.0)
    } else {
        (f64::powi(2.0, j as i32 - 1), f64::powi(2.0, j as i32 + 1))
    }
}

/// Whether `z1 + z2 + z3 = target` has a solution with each `z_i` in the
/// modulation support of `j_i`.
pub fn modulation_feasible(j: [u32; 3], target: f64) -> bool {
    let bands: Vec<(f64, f64)> = j.iter().map(|&ji| modulation_band(ji)).collect();
    for signs in 0..8u32 {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (i, &(a, b)) in bands.iter().enumerate() {
            if a == 0.0 {
                lo -= b;
                hi += b;
            } else if signs >> i & 1 == 0 {
                lo += a;
                hi += b;
            } else {
                lo -= b;
                hi -= a;
            }
        }
        if target > lo && target < hi {
            return true;
        }
    }
    false
}

/// A frequency/modulation configuration that breaks the support relations.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportViolation {
    pub n: [i64; 3],
    pub g: f64,
    pub reason: &'static str,
}

/// Outcome of [`support_property_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SupportReport {
    pub k: [u32; 3],
    pub j: [u32; 3],
    /// Frequency triples `n1 + n2 + n3 = 0`, `n1 n2 n3 != 0`, inside the bands.
    pub frequency_triples: u64,
    /// Triples for which some modulation configuration is admissible.
    pub feasible: u64,
    /// Extremes of `2^{j_max} / max(2^{j_sub}, |G|)` over feasible triples.
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub violation: Option<SupportViolation>,
}

impl SupportReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Constant allowed in the relation `2^{j_max} ~ max(2^{j_sub}, |G|)`.
pub const MODULATION_CONSTANT: f64 = 16.0;

fn sorted3(mut v: [u32; 3]) -> [u32; 3] {
    v.sort_unstable();
    v
}

/// Scans all frequency triples in the bands `k` and checks
/// `2^{k_max} ~ 2^{k_sub}` (within three dyadic steps) and
/// `2^{j_max} ~ max(2^{j_sub}, |G|)` (within [`MODULATION_CONSTANT`]) for every
/// admissible modulation configuration, where `G = G(n1, n2)` and
/// `z1 + z2 + z3 = -G`.
pub fn support_property_check(k: [u32; 3], j: [u32; 3], params: &EquationParams) -> SupportReport {
    let ks = sorted3(k);
    let js = sorted3(j);
    let mut report = SupportReport {
        k,
        j,
        frequency_triples: 0,
        feasible: 0,
        ratio_min: f64::INFINITY,
        ratio_max: 0.0,
        violation: None,
    };
    let (lo1, hi1) = band_range(k[0]);
    let (lo2, hi2) = band_range(k[1]);
    let jmax = f64::powi(2.0, js[2] as i32);
    let jsub = f64::powi(2.0, js[1] as i32);
    for a1 in lo1..=hi1 {
        for a2 in lo2..=hi2 {
            for (n1, n2) in [(a1, a2), (a1, -a2), (-a1, a2), (-a1, -a2)] {
                if (a1 == 0 && n1 < 0) || (a2 == 0 && n2 < 0) {
                    continue;
                }
                let n3 = -n1 - n2;
                if n1 == 0 || n2 == 0 || n3 == 0 || !band_contains(k[2], n3) {
                    continue;
                }
                report.frequency_triples += 1;
                if ks[2] > ks[1] + 3 && report.violation.is_none() {
                    report.violation = Some(SupportViolation {
                        n: [n1, n2, n3],
                        g: g_function(n1, n2, params),
                        reason: "k_max exceeds k_sub by more than 3",
                    });
                }
                let g = g_function(n1, n2, params);
                if !modulation_feasible(j, -g) {
                    continue;
                }
                report.feasible += 1;
                let ratio = jmax / jsub.max(g.abs());
                report.ratio_min = report.ratio_min.min(ratio);
                report.ratio_max = report.ratio_max.max(ratio);
                if !(1.0 / MODULATION_CONSTANT..=MODULATION_CONSTANT).contains(&ratio)
                    && report.violation.is_none()
                {
                    report.violation = Some(SupportViolation {
                        n: [n1, n2, n3],
                        g,
                        reason: "modulation relation fails",
                    });
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::Coefficients;
    use proptest::prelude::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn h2_examples() {
        assert_eq!(h2(1, 3), b(780));
        assert_eq!(h2_factorized(1, 3), b(780));
        assert_eq!(h2(5, -5), b(0));
        for n in 3..40i64 {
            let want = b(5) * b(n) * b(n - 1) * b(n * n + 1 + (n - 1) * (n - 1)) / 2;
            assert_eq!(h2(1, n - 1), want);
        }
        assert_eq!(h2(1, 2), b(210));
    }

    #[test]
    fn h3_examples() {
        assert_eq!(h3(1, 1, 1), b(240));
        assert_eq!(h3_factorized(1, 1, 1), b(240));
        for (n, m) in [(3, 7), (-11, 4), (0, 9)] {
            assert_eq!(h3(n, -n, m), b(0));
        }
        // (1+2+3)^5 - 1 - 32 - 243
        assert_eq!(h3(1, 2, 3), b(7500));
        assert_eq!(h3_factorized_printed(1, 2, 3), b(5625));
    }

    #[test]
    fn big_integer_fallback_for_huge_frequencies() {
        let n = 1i64 << 40;
        let want = big_pow5(&(b(n) + b(3))) - big_pow5(&b(n)) - b(243);
        assert_eq!(h2(n, 3), want);
        assert_eq!(h2_factorized(n, 3), want);
        assert!(h2_i128(n, 3).is_none());
    }

    #[test]
    fn exhaustive_identities_on_a_small_range() {
        assert!(scan_h2(60).passed());
        assert!(scan_h3(25, H3Form::Corrected).passed());
        let printed = scan_h3(4, H3Form::Printed);
        let first = printed.first_mismatch.unwrap();
        assert_eq!(first.n.iter().map(|v| v.abs()).max(), Some(1));
        assert_ne!(first.power_sum, first.factorized);
    }

    #[test]
    fn g_examples() {
        let raw = EquationParams::raw(Coefficients::INTEGRABLE);
        for (n1, n2) in [(1, 3), (-4, 9), (7, 7)] {
            assert_eq!(g_function(n1, n2, &raw), -(bigint_to_f64(&h2(n1, n2))));
        }
        let p = EquationParams::with_constants(Coefficients::INTEGRABLE, 0.37, 4.0).unwrap();
        assert_eq!(g_function(1, -1, &p), 0.0);
        for (n1, n2) in [(2, 3), (-5, 1), (6, -13)] {
            let direct = p.mu(n1) + p.mu(n2) - p.mu(n1 + n2);
            assert!((g_function(n1, n2, &p) - direct).abs() < 1e-9 * direct.abs());
        }
    }

    #[test]
    fn g_lower_bound_on_the_scanned_range() {
        for c1 in [0.5, -0.5] {
            let p = EquationParams::with_constants(Coefficients::INTEGRABLE, c1, 3.0).unwrap();
            let (ratio, _) = g_lower_bound_scan(64, &p);
            assert!(ratio >= 2.25 - 1e-12, "ratio {ratio}");
        }
        // the bound constant is 5/2 + 3 c1 / S, smallest at S = 6 for negative c1
        let p = EquationParams::with_constants(Coefficients::INTEGRABLE, -0.5, 0.0).unwrap();
        assert!((g_lower_bound_ratio(1, 1, &p).unwrap() - 2.25).abs() < 1e-12);
    }

    #[test]
    fn minus_g_split_is_consistent() {
        let p = EquationParams::with_constants(Coefficients::INTEGRABLE, 0.3, 1.0).unwrap();
        for (n1, n2) in [(3, 4), (-100, 37), (1000, -999)] {
            let (i, f) = minus_g_split(n1, n2, &p);
            assert!((0.0..1.0).contains(&f));
            let g = g_function(n1, n2, &p);
            assert!(((i as f64 + f) + g).abs() <= 1e-6 * g.abs().max(1.0));
        }
    }

    #[test]
    fn n2_enumeration() {
        assert!(enumerate_n2(0, 5).is_empty());
        let mut got = enumerate_n2(2, 3);
        got.sort();
        assert_eq!(got, alloc::vec![(-1, 3), (1, 1), (3, -1)]);
        for n in -6..=6 {
            assert_eq!(enumerate_n2(n, 6).len(), enumerate_n2(-n, 6).len());
        }
    }

    #[test]
    fn n3_enumeration_matches_nonzero_h3() {
        let nmax = 5;
        for n in -nmax..=nmax {
            let got = enumerate_n3(n, nmax);
            for &(a, b, c) in &got {
                assert!(!h3(a, b, c).is_zero());
            }
            let mut want = 0;
            for a in -nmax..=nmax {
                for b in -nmax..=nmax {
                    let c = n - a - b;
                    if c.abs() <= nmax && !h3(a, b, c).is_zero() {
                        want += 1;
                    }
                }
            }
            assert_eq!(got.len(), want);
        }
        // entries drawn from {+1, -1}: only (1, 1, 1)-type triples survive
        let two_point: Vec<_> = (-4..=4)
            .flat_map(|n| enumerate_n3(n, 4))
            .filter(|&(a, b, c)| [a, b, c].iter().all(|v: &i64| v.abs() == 1))
            .collect();
        assert_eq!(two_point, alloc::vec![(-1, -1, -1), (1, 1, 1)]);
        assert!(enumerate_n3(3, 4).iter().all(|&(a, b, _)| a + b != 0));
    }

    #[test]
    fn support_property_scans() {
        let p = EquationParams::with_constants(Coefficients::INTEGRABLE, 0.2, 1.5).unwrap();
        let raw = EquationParams::raw(Coefficients::INTEGRABLE);
        for (k, j, params) in [
            ([3u32, 3, 4], [4u32, 8, 17], &p),
            ([5, 6, 6], [2, 7, 27], &raw),
            ([2, 6, 6], [24, 0, 3], &p),
        ] {
            let r = support_property_check(k, j, params);
            assert!(r.frequency_triples > 0);
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn modulation_feasibility() {
        assert!(modulation_feasible([0, 0, 0], 5.9));
        assert!(!modulation_feasible([0, 0, 0], 6.0));
        assert!(modulation_feasible([9, 9, 10], 0.0));
        assert!(!modulation_feasible([1, 1, 10], 0.0));
    }

    proptest! {
        #[test]
        fn h2_identity_random(n1 in -3_000_000i64..3_000_000, n2 in -3_000_000i64..3_000_000) {
            prop_assert_eq!(h2_power_sum(n1, n2), h2_factorized(n1, n2));
        }

        #[test]
        fn h3_identity_random(n1 in -100_000i64..100_000, n2 in -100_000i64..100_000, n3 in -100_000i64..100_000) {
            prop_assert_eq!(h3_power_sum(n1, n2, n3), h3_factorized(n1, n2, n3));
        }
    }
}
