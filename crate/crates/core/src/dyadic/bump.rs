//! Smooth cutoffs `eta0`, `chi_k` and `psi_k`.
//!
//! `eta0` is even, equal to 1 on `[-1, 1]` and 0 outside `(-2, 2)`. On the
//! transition `1 < |x| < 2` it is `S(2 - |x|)` for a ramp `S` rising from 0 at
//! the origin to 1 at one. The bands are `chi_0 = eta0` and
//! `chi_k(x) = eta0(x / 2^k) - eta0(x / 2^{k-1})`, and `psi_k(x) = x chi_k'(x)`.

use alloc::vec::Vec;
use num_traits::Float;

use crate::{Error, Result};

/// Transition ramp between the plateau and the zero set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `S = f(t) / (f(t) + f(1 - t))` with `f(t) = exp(-sharpness / t)`, smooth to all orders.
    MollifiedIndicator { sharpness: f64 },
    /// The `C^order` smoothstep polynomial of degree `2 order + 1`.
    PolynomialSmoothstep { order: u32 },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::MollifiedIndicator { sharpness: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Ramp {
    Mollifier(f64),
    Polynomial(Vec<f64>),
}

/// Value, first and second derivative of the ramp on `[0, 1]`.
fn ramp_eval(ramp: &Ramp, t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    match ramp {
        Ramp::Mollifier(sigma) => {
            let f = |x: f64| -> (f64, f64, f64) {
                let v = (-sigma / x).exp();
                if v == 0.0 {
                    return (0.0, 0.0, 0.0);
                }
                let d1 = sigma / (x * x) * v;
                let d2 = (sigma * sigma / x.powi(4) - 2.0 * sigma / x.powi(3)) * v;
                (v, d1, d2)
            };
            let (a, a1, a2) = f(t);
            let (b, b1, b2) = f(1.0 - t);
            // derivatives of b(t) = f(1 - t)
            let (b1, b2) = (-b1, b2);
            let d = a + b;
            let num1 = a1 * b - a * b1;
            let s = a / d;
            let s1 = num1 / (d * d);
            let s2 = ((a2 * b - a * b2) * d - 2.0 * num1 * (a1 + b1)) / (d * d * d);
            (s, s1, s2)
        }
        Ramp::Polynomial(c) => {
            let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
            for &ci in c.iter().rev() {
                d2 = d2 * t + d1 * 2.0;
                d1 = d1 * t + v;
                v = v * t + ci;
            }
            (v.clamp(0.0, 1.0), d1, d2)
        }
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Coefficients of `t^{p+1} sum_{k=0}^{p} C(p+k, k) C(2p+1, p-k) (-t)^k`.
fn smoothstep_coefficients(p: u32) -> Vec<f64> {
    let p = p as u64;
    let mut c = alloc::vec![0.0; (2 * p + 2) as usize];
    for k in 0..=p {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[(p + 1 + k) as usize] = sign * binomial(p + k, k) * binomial(2 * p + 1, p - k);
    }
    c
}

/// A concrete bump `eta0` with its derived band cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFamily {
    profile: Profile,
    ramp: Ramp,
    d1_bound: f64,
    d2_bound: f64,
}

/// Builds the bump and records `sup |eta0'|` and `sup |eta0''|`.
pub fn make_bump(profile: Profile) -> Result<BumpFamily> {
    let ramp = match profile {
        Profile::MollifiedIndicator { sharpness } => {
            if !(sharpness.is_finite() && sharpness > 0.0) {
                return Err(Error::InvalidBump("sharpness must be positive and finite"));
            }
            Ramp::Mollifier(sharpness)
        }
        Profile::PolynomialSmoothstep { order } => {
            if order < 2 {
                return Err(Error::InvalidBump("smoothstep order must be at least 2"));
            }
            if order > 20 {
                return Err(Error::InvalidBump("smoothstep order above 20 is ill-conditioned"));
            }
            Ramp::Polynomial(smoothstep_coefficients(order))
        }
    };
    let mut family = BumpFamily {
        profile,
        ramp,
        d1_bound: 0.0,
        d2_bound: 0.0,
    };
    let samples = 20_000;
    let mut prev = 1.0;
    for i in 0..=samples {
        let x = 1.0 + i as f64 / samples as f64;
        let v = family.eta0(x);
        if !(0.0..=1.0).contains(&v) || v > prev + 1e-12 {
            return Err(Error::InvalidBump("transition must decrease from 1 to 0"));
        }
        prev = v;
        family.d1_bound = family.d1_bound.max(family.eta0_d1(x).abs());
        family.d2_bound = family.d2_bound.max(family.eta0_d2(x).abs());
    }
    if family.eta0(1.0) != 1.0 || family.eta0(2.0) != 0.0 {
        return Err(Error::InvalidBump("plateau or support endpoint violated"));
    }
    if ramp_eval(&family.ramp, 0.0).1 != 0.0 || ramp_eval(&family.ramp, 1.0 - 1e-9).1.abs() > 1e-3 {
        return Err(Error::InvalidBump("ramp is not flat at its ends"));
    }
    Ok(family)
}

impl Default for BumpFamily {
    fn default() -> Self {
        make_bump(Profile::default()).expect("default profile is valid")
    }
}

fn pow2(k: i32) -> f64 {
    f64::powi(2.0, k)
}

impl BumpFamily {
    pub fn profile(&self) -> Profile {
        self.profile
    }

    /// Sampled `sup |eta0'|` over the transition region.
    pub fn d1_bound(&self) -> f64 {
        self.d1_bound
    }

    /// Sampled `sup |eta0''|` over the transition region.
    pub fn d2_bound(&self) -> f64 {
        self.d2_bound
    }

    pub fn eta0(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= 1.0 {
            1.0
        } else if a >= 2.0 {
            0.0
        } else {
            ramp_eval(&self.ramp, 2.0 - a).0
        }
    }

    pub fn eta0_d1(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= 1.0 || a >= 2.0 {
            0.0
        } else {
            -x.signum() * ramp_eval(&self.ramp, 2.0 - a).1
        }
    }

    pub fn eta0_d2(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= 1.0 || a >= 2.0 {
            0.0
        } else {
            ramp_eval(&self.ramp, 2.0 - a).2
        }
    }

    /// `chi_k(x)`.
    pub fn chi(&self, k: u32, x: f64) -> f64 {
        if k == 0 {
            self.eta0(x)
        } else {
            let s = pow2(k as i32);
            self.eta0(x / s) - self.eta0(2.0 * x / s)
        }
    }

    /// `chi_k'(x)`.
    pub fn chi_d1(&self, k: u32, x: f64) -> f64 {
        if k == 0 {
            self.eta0_d1(x)
        } else {
            let s = pow2(k as i32);
            self.eta0_d1(x / s) / s - self.eta0_d1(2.0 * x / s) * 2.0 / s
        }
    }

    /// `chi_k''(x)`.
    pub fn chi_d2(&self, k: u32, x: f64) -> f64 {
        if k == 0 {
            self.eta0_d2(x)
        } else {
            let s = pow2(k as i32);
            self.eta0_d2(x / s) / (s * s) - self.eta0_d2(2.0 * x / s) * 4.0 / (s * s)
        }
    }

    /// `psi_k(x) = x chi_k'(x)`.
    pub fn psi(&self, k: u32, x: f64) -> f64 {
        x * self.chi_d1(k, x)
    }

    /// `sum_{k=0}^{kmax} chi_k(x)`, which telescopes to `eta0(x / 2^kmax)`.
    pub fn partition_sum(&self, kmax: u32, x: f64) -> f64 {
        (0..=kmax).map(|k| self.chi(k, x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<BumpFamily> {
        alloc::vec![
            make_bump(Profile::MollifiedIndicator { sharpness: 1.0 }).unwrap(),
            make_bump(Profile::MollifiedIndicator { sharpness: 0.3 }).unwrap(),
            make_bump(Profile::PolynomialSmoothstep { order: 2 }).unwrap(),
            make_bump(Profile::PolynomialSmoothstep { order: 5 }).unwrap(),
        ]
    }

    #[test]
    fn invalid_profiles_are_rejected() {
        assert!(make_bump(Profile::PolynomialSmoothstep { order: 1 }).is_err());
        assert!(make_bump(Profile::MollifiedIndicator { sharpness: 0.0 }).is_err());
        assert!(make_bump(Profile::MollifiedIndicator { sharpness: f64::NAN }).is_err());
    }

    #[test]
    fn plateau_support_and_partition() {
        for b in families() {
            for k in 1..12u32 {
                assert_eq!(b.chi(k, pow2(k as i32)), 1.0);
                assert_eq!(b.psi(k, pow2(k as i32)), 0.0);
                assert_eq!(b.chi(k, pow2(k as i32 - 1)), 0.0);
                assert_eq!(b.chi(k, pow2(k as i32 + 1)), 0.0);
            }
            assert!((b.partition_sum(8, 37.0) - 1.0).abs() < 1e-14);
            for n in -128..=128 {
                assert!((b.partition_sum(8, n as f64) - 1.0).abs() < 1e-14);
            }
            assert!(b.d1_bound().is_finite() && b.d1_bound() > 1.0);
            assert!(b.d2_bound().is_finite());
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for b in families() {
            for &x in &[1.1, 1.37, 1.5, 1.81, 1.97, -1.3] {
                let h = 1e-5;
                let fd1 = (b.eta0(x + h) - b.eta0(x - h)) / (2.0 * h);
                let fd2 = (b.eta0(x + h) - 2.0 * b.eta0(x) + b.eta0(x - h)) / (h * h);
                assert!((fd1 - b.eta0_d1(x)).abs() < 1e-6, "{x}");
                assert!((fd2 - b.eta0_d2(x)).abs() < 1e-3 * b.d2_bound().max(1.0), "{x}");
            }
            for k in 1..6 {
                let x = 1.3 * pow2(k as i32);
                let h = 1e-4 * pow2(k as i32);
                let fd = (b.chi(k, x + h) - b.chi(k, x - h)) / (2.0 * h);
                assert!((fd - b.chi_d1(k, x)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn smoothstep_is_the_classical_polynomial() {
        // order 2: 6t^5 - 15t^4 + 10t^3
        assert_eq!(smoothstep_coefficients(2), alloc::vec![0.0, 0.0, 0.0, 10.0, -15.0, 6.0]);
    }
}
