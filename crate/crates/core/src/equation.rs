//! Fourier-side vector field of
//! `u_t = u_xxxxx - a1 u^2 u_x - a2 u_x u_xx - a3 u u_xxx`.
//!
//! The nonlinearity is evaluated in divergence form,
//! `-(a1/3)(u^3)_x - ((a2 - a3)/2)(u_x^2)_x - a3 (u u_xx)_x`, so that every
//! Fourier mode carries an explicit factor `in`. For `|n| <= N`:
//!
//! ```text
//! d/dt u^(n) = i n^5 u^(n)
//!            - (a1/3) K^2 i n  sum_{n1+n2+n3=n} u^(n1) u^(n2) u^(n3)
//!            + ((a2-a3)/2) K i n sum_{n1+n2=n} n1 n2 u^(n1) u^(n2)
//!            + a3 K i n        sum_{n1+n2=n} u^(n1) n2^2 u^(n2)
//! ```
//!
//! with `K = 1/sqrt(2pi)`. The renormalized form moves the resonant parts
//! of the cubic and quadratic sums into the linear symbol
//! `mu(n) = n^5 + c1 n^3 + c2 n`, where `c1 = a3 K u^(0)` and
//! `c2 = -a1 K^2 ||u||^2`. For the integrable coefficients these are
//! `10 * mean(u)` and `30 * mean(u^2)`.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::spectral::{padded_len, PaddedProducts, SpectralField, TorusGrid};
use crate::{Error, Result, KAPPA};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl Coefficients {
    pub const INTEGRABLE: Self = Self {
        a1: -30.0,
        a2: 20.0,
        a3: 10.0,
    };

    pub fn new(a1: f64, a2: f64, a3: f64) -> Self {
        Self { a1, a2, a3 }
    }

    /// True only for the triple `(-30, 20, 10)`, the member of the family
    /// whose third Hamiltonian is conserved.
    pub fn is_integrable(&self) -> bool {
        *self == Self::INTEGRABLE
    }

    /// The Galerkin truncation conserves `||u||_{L^2}` exactly when `a2 = 2 a3`.
    pub fn conserves_l2(&self) -> bool {
        self.a2 == 2.0 * self.a3
    }

    pub fn is_finite(&self) -> bool {
        self.a1.is_finite() && self.a2.is_finite() && self.a3.is_finite()
    }
}

/// Resonant constants `(c1, c2)` of a field for the given coefficients.
pub fn resonant_constants(coeffs: &Coefficients, u: &SpectralField) -> (f64, f64) {
    (
        coeffs.a3 * KAPPA * u.coeff(0).re,
        -coeffs.a1 * KAPPA * KAPPA * u.l2_norm_sq(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationParams {
    coeffs: Coefficients,
    c1: f64,
    c2: f64,
    renormalized: bool,
}

impl EquationParams {
    /// Raw equation with symbol `n^5`.
    pub fn raw(coeffs: Coefficients) -> Self {
        Self {
            coeffs,
            c1: 0.0,
            c2: 0.0,
            renormalized: false,
        }
    }

    /// Renormalized equation with constants frozen from `u0`.
    pub fn renormalized(coeffs: Coefficients, u0: &SpectralField) -> Result<Self> {
        let (c1, c2) = resonant_constants(&coeffs, u0);
        Self::with_constants(coeffs, c1, c2)
    }

    /// Renormalized equation with prescribed constants.
    pub fn with_constants(coeffs: Coefficients, c1: f64, c2: f64) -> Result<Self> {
        if !coeffs.is_finite() || !c1.is_finite() || !c2.is_finite() {
            return Err(Error::InvalidParams("non-finite coefficient"));
        }
        if c2 < 0.0 {
            return Err(Error::InvalidParams("c2 must be nonnegative"));
        }
        Ok(Self {
            coeffs,
            c1,
            c2,
            renormalized: true,
        })
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn is_renormalized(&self) -> bool {
        self.renormalized
    }

    pub fn is_integrable(&self) -> bool {
        self.coeffs.is_integrable()
    }

    /// Dispersion `mu(n)`: `n^5 + c1 n^3 + c2 n` when renormalized, `n^5` otherwise.
    pub fn mu(&self, n: i64) -> f64 {
        let x = n as f64;
        let n5 = (n as i128).pow(5) as f64;
        if self.renormalized {
            n5 + self.c1 * x * x * x + self.c2 * x
        } else {
            n5
        }
    }
}

/// Untruncated quadratic and cubic sums entering the raw nonlinearity.
fn raw_nonlinear_direct(u: &SpectralField, coeffs: &Coefficients) -> Vec<Complex64> {
    let grid = *u.grid();
    let nmax = grid.max_mode();
    let c = |n: i64| u.coeff(n);
    grid.frequencies()
        .map(|n| {
            let mut cubic = ZERO;
            let mut q1 = ZERO;
            let mut q2 = ZERO;
            for n1 in -nmax..=nmax {
                let n2 = n - n1;
                if n2.abs() <= nmax {
                    q1 += c(n1) * c(n2) * (n1 * n2) as f64;
                    q2 += c(n1) * c(n2) * (n2 * n2) as f64;
                }
                if coeffs.a1 != 0.0 {
                    for n2 in -nmax..=nmax {
                        let n3 = n - n1 - n2;
                        if n3.abs() <= nmax {
                            cubic += c(n1) * c(n2) * c(n3);
                        }
                    }
                }
            }
            I * n as f64
                * (cubic * (-coeffs.a1 / 3.0 * KAPPA * KAPPA)
                    + q1 * ((coeffs.a2 - coeffs.a3) / 2.0 * KAPPA)
                    + q2 * (coeffs.a3 * KAPPA))
        })
        .collect()
}

fn field(grid: TorusGrid, coeffs: Vec<Complex64>, real: bool) -> Result<SpectralField> {
    SpectralField::from_coeffs(grid, coeffs, real)
}

/// Raw vector field `i n^5 u^(n) + N(u)(n)` by direct summation.
pub fn rhs_raw(u: &SpectralField, params: &EquationParams) -> Result<SpectralField> {
    let nl = raw_nonlinear_direct(u, params.coefficients());
    let coeffs = u
        .iter()
        .zip(nl)
        .map(|((n, c), v)| I * ((n as i128).pow(5) as f64) * c + v)
        .collect();
    field(*u.grid(), coeffs, u.is_real())
}

/// The renormalized vector field split into its linear part and four
/// nonlinear pieces.
///
/// * `n1`: the resonant cubic remainder `a1 K^2 i n |u^(n)|^2 u^(n)`
/// * `n2`: cubic interactions with `(n1+n2)(n1+n3)(n2+n3) != 0`
/// * `n3`, `n4`: the two quadratic sums restricted to `n n1 n2 != 0`
#[derive(Debug, Clone, PartialEq)]
pub struct RhsSplit {
    pub linear: SpectralField,
    pub n1: SpectralField,
    pub n2: SpectralField,
    pub n3: SpectralField,
    pub n4: SpectralField,
}

impl RhsSplit {
    pub fn nonlinear(&self) -> Result<SpectralField> {
        self.n1.add(&self.n2)?.add(&self.n3)?.add(&self.n4)
    }

    pub fn total(&self) -> Result<SpectralField> {
        self.linear.add(&self.nonlinear()?)
    }
}

/// Renormalized vector field `i mu(n) u^(n) + N1 + N2 + N3 + N4`.
///
/// The linear symbol uses the constants stored in `params`, the four pieces
/// are evaluated from `u` by direct summation over their index sets. When
/// `params` was built from `u` itself the total equals [`rhs_raw`].
pub fn rhs_renormalized(u: &SpectralField, params: &EquationParams) -> Result<RhsSplit> {
    if !params.is_renormalized() {
        return Err(Error::NotRenormalized);
    }
    let co = params.coefficients();
    let grid = *u.grid();
    let nmax = grid.max_mode();
    let c = |n: i64| u.coeff(n);
    let len = grid.len();
    let (mut p1, mut p2, mut p3, mut p4) = (
        vec![ZERO; len],
        vec![ZERO; len],
        vec![ZERO; len],
        vec![ZERO; len],
    );
    for (idx, n) in grid.frequencies().enumerate() {
        if n == 0 {
            continue;
        }
        let inn = I * n as f64;
        p1[idx] = inn * (co.a1 * KAPPA * KAPPA * c(n).norm_sqr()) * c(n);
        let mut cubic = ZERO;
        let mut q1 = ZERO;
        let mut q2 = ZERO;
        for n1 in -nmax..=nmax {
            let n2 = n - n1;
            if n2.abs() <= nmax && n1 != 0 && n2 != 0 {
                q1 += c(n1) * c(n2) * (n1 * n2) as f64;
                q2 += c(n1) * c(n2) * (n2 * n2) as f64;
            }
            if co.a1 != 0.0 {
                for n2 in -nmax..=nmax {
                    let n3 = n - n1 - n2;
                    if n3.abs() <= nmax && n1 + n2 != 0 && n1 + n3 != 0 && n2 + n3 != 0 {
                        cubic += c(n1) * c(n2) * c(n3);
                    }
                }
            }
        }
        p2[idx] = inn * (-co.a1 / 3.0 * KAPPA * KAPPA) * cubic;
        p3[idx] = inn * ((co.a2 - co.a3) / 2.0 * KAPPA) * q1;
        p4[idx] = inn * (co.a3 * KAPPA) * q2;
    }
    let real = u.is_real();
    let linear = u
        .iter()
        .map(|(n, c)| I * params.mu(n) * c)
        .collect();
    Ok(RhsSplit {
        linear: field(grid, linear, real)?,
        n1: field(grid, p1, real)?,
        n2: field(grid, p2, real)?,
        n3: field(grid, p3, real)?,
        n4: field(grid, p4, real)?,
    })
}

/// Fast pseudo-spectral evaluation of the nonlinearity on a padded grid.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    coeffs: Coefficients,
    products: PaddedProducts,
    wavenumbers: Vec<f64>,
    renormalized: bool,
}

impl Nonlinearity {
    /// With `dealias` the padded grid has at least `4N + 1` points, otherwise
    /// products are formed on the native grid and alias.
    pub fn new(grid: TorusGrid, params: &EquationParams, dealias: bool) -> Self {
        let points = if dealias {
            padded_len(3, grid.modes())
        } else {
            grid.points()
        };
        Self {
            coeffs: *params.coefficients(),
            products: PaddedProducts::new(grid, points),
            wavenumbers: grid.frequencies().map(|n| n as f64).collect(),
            renormalized: params.is_renormalized(),
        }
    }

    pub fn padded_points(&self) -> usize {
        self.products.points()
    }

    /// Raw nonlinearity `N(u)` of a Hermitian coefficient vector.
    pub fn raw(&self, u: &[Complex64]) -> Vec<Complex64> {
        let co = &self.coeffs;
        let k = &self.wavenumbers;
        let mut acc = vec![ZERO; u.len()];
        if co.a1 == 0.0 && co.a2 == 0.0 && co.a3 == 0.0 {
            return acc;
        }
        let pp = &self.products;
        let v = pp.synthesize(u);
        let ux: Vec<Complex64> = u.iter().zip(k).map(|(c, n)| I * n * c).collect();
        let vx = pp.synthesize(&ux);
        let mut add = |samples: Vec<Complex64>, w: f64| {
            for (a, s) in acc.iter_mut().zip(pp.analyze(samples)) {
                *a += s * w;
            }
        };
        if co.a1 != 0.0 {
            add(v.iter().map(|x| x * x * x).collect(), -co.a1 / 3.0 * KAPPA * KAPPA);
        }
        if co.a2 != co.a3 {
            add(vx.iter().map(|x| x * x).collect(), -(co.a2 - co.a3) / 2.0 * KAPPA);
        }
        if co.a3 != 0.0 {
            let uxx: Vec<Complex64> = u.iter().zip(k).map(|(c, n)| -(n * n) * c).collect();
            let vxx = pp.synthesize(&uxx);
            add(v.iter().zip(&vxx).map(|(a, b)| a * b).collect(), -co.a3 * KAPPA);
        }
        for (a, n) in acc.iter_mut().zip(k) {
            *a *= I * n;
        }
        hermitize(&mut acc);
        acc
    }

    /// Nonlinear part of the renormalized field: `N(u) - i (c1(u) n^3 + c2(u) n) u^(n)`
    /// with the constants taken from the current state.
    pub fn renormalized(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.raw(u);
        let half = u.len() / 2;
        let c1 = self.coeffs.a3 * KAPPA * u[half].re;
        let c2 = -self.coeffs.a1 * KAPPA * KAPPA * u.iter().map(|c| c.norm_sqr()).sum::<f64>();
        for ((o, c), n) in out.iter_mut().zip(u).zip(&self.wavenumbers) {
            *o -= I * (c1 * n * n * n + c2 * n) * c;
        }
        out
    }

    /// The nonlinear part matching the parameters this evaluator was built for.
    pub fn eval(&self, u: &[Complex64]) -> Vec<Complex64> {
        if self.renormalized {
            self.renormalized(u)
        } else {
            self.raw(u)
        }
    }
}

/// Forces `c(-n) = conj(c(n))` on a vector ordered from `-N` to `N`.
pub(crate) fn hermitize(c: &mut [Complex64]) {
    let len = c.len();
    for i in 0..=len / 2 {
        let j = len - 1 - i;
        let avg = (c[i] + c[j].conj()) * 0.5;
        c[i] = avg;
        c[j] = avg.conj();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::to_spectral;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};

    fn random_field(modes: usize, seed: u64, amp: f64) -> SpectralField {
        let grid = TorusGrid::with_modes(modes);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m: Vec<(i64, Complex64)> = (0..=modes as i64)
            .map(|n| {
                let d = amp / (1.0 + (n * n) as f64);
                (n, Complex64::new(rng.gen_range(-d..d), rng.gen_range(-d..d)))
            })
            .collect();
        SpectralField::real_from_modes(grid, &m).unwrap()
    }

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn max_abs(a: &SpectralField) -> f64 {
        a.coeffs().iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn cosine_constants() {
        let grid = TorusGrid::with_modes(8);
        let u = SpectralField::from_fn(grid, f64::cos);
        let p = EquationParams::renormalized(Coefficients::INTEGRABLE, &u).unwrap();
        assert!(p.c1().abs() < 1e-14);
        // 30 * mean(cos^2) = 15
        assert!((p.c2() - 15.0).abs() < 1e-12);
        let shifted = SpectralField::from_fn(grid, |x| 2.0 + x.cos());
        let p = EquationParams::renormalized(Coefficients::INTEGRABLE, &shifted).unwrap();
        assert!((p.c1() - 20.0).abs() < 1e-12);
        assert!((p.c2() - 30.0 * (4.0 + 0.5)).abs() < 1e-11);
    }

    #[test]
    fn dispersion_symbol() {
        let p = EquationParams::with_constants(Coefficients::INTEGRABLE, 0.5, 2.0).unwrap();
        assert_eq!(p.mu(2), 40.0);
        assert_eq!(p.mu(-2), -40.0);
        assert_eq!(EquationParams::raw(Coefficients::INTEGRABLE).mu(3), 243.0);
        assert!(EquationParams::with_constants(Coefficients::INTEGRABLE, 0.0, -1.0).is_err());
    }

    #[test]
    fn raw_field_matches_physical_derivatives() {
        // low modes on a wide grid so that no product is truncated
        let modes = 24usize;
        let grid = TorusGrid::new(modes, 96).unwrap();
        let low = random_field(4, 7, 1.0).resample(grid);
        let co = Coefficients::new(-3.0, 1.5, 0.7);
        let d = |k: u32| {
            low.map(|n, c| c * (I * n as f64).powu(k))
                .unwrap()
                .to_physical()
                .unwrap()
        };
        let (u, ux, uxx, uxxx, u5) = (d(0), d(1), d(2), d(3), d(5));
        let rhs: Vec<f64> = (0..grid.points())
            .map(|m| {
                u5[m] - co.a1 * u[m] * u[m] * ux[m] - co.a2 * ux[m] * uxx[m] - co.a3 * u[m] * uxxx[m]
            })
            .collect();
        let want = to_spectral(&rhs, grid).unwrap();
        let got = rhs_raw(&low, &EquationParams::raw(co)).unwrap();
        assert!(max_diff(&want, &got) < 1e-11 * max_abs(&want));
    }

    #[test]
    fn split_reassembles_raw_field() {
        for (co, seed) in [
            (Coefficients::INTEGRABLE, 1u64),
            (Coefficients::new(-7.0, 3.0, 2.5), 2),
        ] {
            let u = random_field(16, seed, 1.0);
            let raw = rhs_raw(&u, &EquationParams::raw(co)).unwrap();
            let c2_ok = -co.a1 >= 0.0;
            assert!(c2_ok);
            let split = rhs_renormalized(&u, &EquationParams::renormalized(co, &u).unwrap()).unwrap();
            let total = split.total().unwrap();
            assert!(max_diff(&raw, &total) <= 1e-12 * max_abs(&raw));
        }
    }

    #[test]
    fn split_requires_renormalized_params() {
        let u = random_field(4, 1, 1.0);
        assert_eq!(
            rhs_renormalized(&u, &EquationParams::raw(Coefficients::INTEGRABLE)).unwrap_err(),
            Error::NotRenormalized
        );
    }

    #[test]
    fn resonant_cubic_piece_for_a_single_mode() {
        let grid = TorusGrid::with_modes(6);
        let a = Complex64::new(0.3, -0.2);
        let u = SpectralField::real_from_modes(grid, &[(2, a)]).unwrap();
        let p = EquationParams::renormalized(Coefficients::INTEGRABLE, &u).unwrap();
        let split = rhs_renormalized(&u, &p).unwrap();
        let want = I * 2.0 * (-30.0 / (2.0 * PI) * a.norm_sqr()) * a;
        assert!((split.n1.coeff(2) - want).norm() < 1e-15);
        // a single pair of modes has no non-resonant cubic interaction landing on n = 2
        assert!(split.n2.coeff(2).norm() < 1e-15);
    }

    #[test]
    fn fast_nonlinearity_matches_direct_sums() {
        for co in [Coefficients::INTEGRABLE, Coefficients::new(2.0, -1.0, 4.0)] {
            let u = random_field(20, 11, 1.0);
            let raw = EquationParams::raw(co);
            let fast = Nonlinearity::new(*u.grid(), &raw, true).raw(u.coeffs());
            let lin: Vec<Complex64> = u
                .iter()
                .map(|(n, c)| I * ((n as i128).pow(5) as f64) * c)
                .collect();
            let direct = rhs_raw(&u, &raw).unwrap();
            for ((f, l), d) in fast.iter().zip(&lin).zip(direct.coeffs()) {
                assert!((f + l - d).norm() < 1e-9 * max_abs(&direct));
            }
        }
        let u = random_field(12, 5, 1.0);
        let p = EquationParams::renormalized(Coefficients::INTEGRABLE, &u).unwrap();
        let fast = Nonlinearity::new(*u.grid(), &p, true).eval(u.coeffs());
        let split = rhs_renormalized(&u, &p).unwrap().nonlinear().unwrap();
        for (f, d) in fast.iter().zip(split.coeffs()) {
            assert!((f - d).norm() < 1e-12 * max_abs(&split).max(1.0));
        }
    }

    #[test]
    fn l2_is_conserved_by_the_field_iff_a2_is_twice_a3() {
        let u = random_field(10, 3, 1.0);
        let rate = |co: Coefficients| {
            let f = rhs_raw(&u, &EquationParams::raw(co)).unwrap();
            u.coeffs()
                .iter()
                .zip(f.coeffs())
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
        };
        assert!(rate(Coefficients::INTEGRABLE).abs() < 1e-11);
        assert!(rate(Coefficients::new(1.0, 4.0, 2.0)).abs() < 1e-11);
        assert!(rate(Coefficients::new(1.0, 3.0, 2.0)).abs() > 1e-6);
    }
}
