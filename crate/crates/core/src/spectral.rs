//! Truncated Fourier fields on the torus `[0, 2pi)`.
//!
//! A [`SpectralField`] stores `u^(n)` for `|n| <= N` on a [`TorusGrid`] with
//! `M >= 2N + 1` physical collocation points `x_m = 2 pi m / M`.
//! Physical samples follow `u(x) = KAPPA * sum_n u^(n) e^{inx}` and the
//! discrete forward map is `u^(n) = (sqrt(2pi)/M) sum_m u(x_m) e^{-inx_m}`.
//! With this scaling Parseval reads `int |u|^2 dx = sum_n |u^(n)|^2`.
//!
//! The convolution routines compute bare sums `sum_{n1+n2=n} f(n1) g(n2)`
//! without the factor `KAPPA` that a physical product carries.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use crate::fft::FftPlan;
use crate::{Error, Result, KAPPA, SQRT_TWO_PI};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative Hermitian defect tolerated when a field is flagged real.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    modes: usize,
    points: usize,
}

impl TorusGrid {
    pub fn new(modes: usize, points: usize) -> Result<Self> {
        if points < 2 * modes + 1 {
            return Err(Error::UnderResolvedGrid { modes, points });
        }
        Ok(Self { modes, points })
    }

    /// Grid with the smallest power-of-two point count that resolves `modes`.
    pub fn with_modes(modes: usize) -> Self {
        Self {
            modes,
            points: (2 * modes + 1).next_power_of_two(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Number of stored coefficients, `2N + 1`.
    pub fn len(&self) -> usize {
        2 * self.modes + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.points as f64
    }

    pub fn max_mode(&self) -> i64 {
        self.modes as i64
    }

    pub fn contains(&self, n: i64) -> bool {
        n.unsigned_abs() as usize <= self.modes
    }

    pub fn index(&self, n: i64) -> Option<usize> {
        self.contains(n).then(|| (n + self.modes as i64) as usize)
    }

    pub fn frequency(&self, index: usize) -> i64 {
        index as i64 - self.modes as i64
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> + Clone {
        let n = self.modes as i64;
        -n..=n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
    real: bool,
}

fn hermitian_defect(grid: &TorusGrid, coeffs: &[Complex64]) -> Option<(i64, f64)> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let tol = HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE);
    let mut worst: Option<(i64, f64)> = None;
    for n in 0..=grid.max_mode() {
        let a = coeffs[grid.index(n).unwrap()];
        let b = coeffs[grid.index(-n).unwrap()];
        let defect = (a - b.conj()).norm();
        if !(defect <= tol) && worst.is_none_or(|(_, d)| defect > d) {
            worst = Some((n, defect));
        }
    }
    worst
}

fn symmetrize(grid: &TorusGrid, coeffs: &mut [Complex64]) {
    for n in 0..=grid.max_mode() {
        let i = grid.index(n).unwrap();
        let j = grid.index(-n).unwrap();
        let avg = (coeffs[i] + coeffs[j].conj()) * 0.5;
        coeffs[i] = avg;
        coeffs[j] = avg.conj();
    }
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.len()],
            real: true,
        }
    }

    /// Builds a field from `2N + 1` coefficients ordered from `-N` to `N`.
    ///
    /// Fields flagged `real` must satisfy `u^(-n) = conj(u^(n))` up to
    /// [`HERMITIAN_TOL`]; the stored coefficients are then made exactly
    /// Hermitian.
    pub fn from_coeffs(grid: TorusGrid, mut coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        if real {
            if let Some((n, defect)) = hermitian_defect(&grid, &coeffs) {
                return Err(Error::SymmetryViolation { n, defect });
            }
            symmetrize(&grid, &mut coeffs);
        }
        Ok(Self { grid, coeffs, real })
    }

    /// Real field with the listed modes; each `(n, c)` also sets `u^(-n) = conj(c)`.
    pub fn real_from_modes(grid: TorusGrid, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![ZERO; grid.len()];
        for &(n, c) in modes {
            let i = grid.index(n).ok_or(Error::ModeOutOfRange {
                n,
                modes: grid.modes(),
            })?;
            let j = grid.index(-n).unwrap();
            if n == 0 {
                coeffs[i] = Complex64::new(c.re, 0.0);
            } else {
                coeffs[i] = c;
                coeffs[j] = c.conj();
            }
        }
        Ok(Self {
            grid,
            coeffs,
            real: true,
        })
    }

    /// Interpolates a real function sampled on the grid.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.points()).map(|m| f(grid.x(m))).collect();
        to_spectral(&samples, grid).expect("sample count matches grid")
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn modes(&self) -> usize {
        self.grid.modes()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// `u^(n)`, zero outside the stored band.
    pub fn coeff(&self, n: i64) -> Complex64 {
        self.grid.index(n).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.grid.frequencies().zip(self.coeffs.iter().copied())
    }

    /// Applies `f(n, u^(n))` mode by mode, keeping the realness flag.
    pub fn map(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Result<Self> {
        let coeffs = self.iter().map(|(n, c)| f(n, c)).collect();
        Self::from_coeffs(self.grid, coeffs, self.real)
    }

    /// Multiplies by a real symbol that is even in `n`, which keeps realness.
    pub fn multiply_even(&self, symbol: impl Fn(i64) -> f64) -> Self {
        let coeffs = self.iter().map(|(n, c)| c * symbol(n)).collect();
        Self {
            grid: self.grid,
            coeffs,
            real: self.real,
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.multiply_even(|_| a)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(Self {
            grid: self.grid,
            coeffs,
            real: self.real && other.real,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `sum_n |u^(n)|^2`, the squared `L^2(T)` norm.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `(sum_n <n>^{2s} |u^(n)|^2)^{1/2}` with `<n> = (1 + n^2)^{1/2}`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        self.iter()
            .map(|(n, c)| (1.0 + (n as f64).powi(2)).powf(s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Spatial average `(2pi)^{-1} int u dx = KAPPA * u^(0)`.
    pub fn mean(&self) -> f64 {
        KAPPA * self.coeff(0).re
    }

    /// Spatial average of `u^2`, `(2pi)^{-1} sum_n |u^(n)|^2`.
    pub fn mean_square(&self) -> f64 {
        KAPPA * KAPPA * self.l2_norm_sq()
    }

    /// Projection onto `lo <= |n| <= hi`.
    pub fn band(&self, lo: u64, hi: u64) -> Self {
        self.multiply_even(|n| {
            let a = n.unsigned_abs();
            if a >= lo && a <= hi {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Zero-pads or truncates to another mode count.
    pub fn resample(&self, grid: TorusGrid) -> Self {
        let coeffs = grid.frequencies().map(|n| self.coeff(n)).collect();
        Self {
            grid,
            coeffs,
            real: self.real,
        }
    }

    /// Complex physical samples `KAPPA * sum_n u^(n) e^{inx_m}`.
    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let m = self.grid.points();
        let mut buf = vec![ZERO; m];
        for (n, c) in self.iter() {
            buf[n.rem_euclid(m as i64) as usize] += c;
        }
        FftPlan::new(m).inverse(&mut buf);
        for v in buf.iter_mut() {
            *v *= KAPPA;
        }
        buf
    }

    /// Real physical samples on the grid points.
    pub fn to_physical(&self) -> Result<Vec<f64>> {
        if let Some((n, defect)) = hermitian_defect(&self.grid, &self.coeffs) {
            return Err(Error::SymmetryViolation { n, defect });
        }
        Ok(self.to_physical_complex().into_iter().map(|c| c.re).collect())
    }

    /// Point evaluation `u(x)` straight from the Fourier series.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (n, c) in self.iter() {
            let (s, co) = (n as f64 * x).sin_cos();
            acc += c.re * co - c.im * s;
        }
        KAPPA * acc
    }
}

/// Discrete forward transform of real samples.
pub fn to_spectral(samples: &[f64], grid: TorusGrid) -> Result<SpectralField> {
    let m = grid.points();
    if samples.len() != m {
        return Err(Error::SizeMismatch {
            expected: m,
            got: samples.len(),
        });
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlan::new(m).forward(&mut buf);
    let scale = SQRT_TWO_PI / m as f64;
    let mut coeffs: Vec<Complex64> = grid
        .frequencies()
        .map(|n| buf[n.rem_euclid(m as i64) as usize] * scale)
        .collect();
    symmetrize(&grid, &mut coeffs);
    Ok(SpectralField {
        grid,
        coeffs,
        real: true,
    })
}

fn same_grid(fields: &[&SpectralField]) -> Result<TorusGrid> {
    let grid = *fields[0].grid();
    if fields.iter().any(|f| *f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    Ok(grid)
}

/// Untruncated bare convolution of two coefficient vectors centered at zero.
fn full_convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == ZERO {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn truncate_full(grid: TorusGrid, full: &[Complex64], real: bool) -> SpectralField {
    let half = (full.len() / 2) as i64;
    let mut coeffs: Vec<Complex64> = grid
        .frequencies()
        .map(|n| full[(n + half) as usize])
        .collect();
    if real {
        symmetrize(&grid, &mut coeffs);
    }
    SpectralField {
        grid,
        coeffs,
        real,
    }
}

/// `(f * g)(n) = sum_{n1 + n2 = n} f(n1) g(n2)` for `|n| <= N`, by direct summation.
pub fn convolve_exact(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    let grid = same_grid(&[f, g])?;
    let full = full_convolve(f.coeffs(), g.coeffs());
    Ok(truncate_full(grid, &full, f.is_real() && g.is_real()))
}

/// `sum_{n1 + n2 + n3 = n} f(n1) g(n2) h(n3)` for `|n| <= N`, by direct summation.
pub fn convolve3_exact(f: &SpectralField, g: &SpectralField, h: &SpectralField) -> Result<SpectralField> {
    let grid = same_grid(&[f, g, h])?;
    let full = full_convolve(&full_convolve(f.coeffs(), g.coeffs()), h.coeffs());
    Ok(truncate_full(
        grid,
        &full,
        f.is_real() && g.is_real() && h.is_real(),
    ))
}

/// Smallest power of two that hosts an alias-free `factors`-fold product.
pub fn padded_len(factors: usize, modes: usize) -> usize {
    ((factors + 1) * modes + 1).next_power_of_two()
}

/// Pseudo-spectral products on a zero-padded grid.
///
/// A `factors`-fold product of modes `|n| <= N` is alias free on the
/// retained band once the padded grid has `(factors + 1) N + 1` points.
#[derive(Debug, Clone)]
pub struct PaddedProducts {
    grid: TorusGrid,
    points: usize,
    plan: FftPlan,
}

impl PaddedProducts {
    pub fn new(grid: TorusGrid, points: usize) -> Self {
        Self {
            grid,
            points,
            plan: FftPlan::new(points),
        }
    }

    /// Padded grid that is alias free for products of up to `factors` fields.
    pub fn for_factors(grid: TorusGrid, factors: usize) -> Self {
        Self::new(grid, padded_len(factors, grid.modes()))
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn is_alias_free(&self, factors: usize) -> bool {
        self.points > (factors + 1) * self.grid.modes()
    }

    /// `v_m = sum_n c(n) e^{inx_m}` on the padded grid (no `KAPPA`).
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let p = self.points as i64;
        let mut buf = vec![ZERO; self.points];
        for (n, c) in self.grid.frequencies().zip(coeffs) {
            buf[n.rem_euclid(p) as usize] += c;
        }
        self.plan.inverse(&mut buf);
        buf
    }

    /// Inverse of [`Self::synthesize`], truncated to `|n| <= N`.
    pub fn analyze(&self, mut samples: Vec<Complex64>) -> Vec<Complex64> {
        self.plan.forward(&mut samples);
        let p = self.points as i64;
        let inv = 1.0 / self.points as f64;
        self.grid
            .frequencies()
            .map(|n| samples[n.rem_euclid(p) as usize] * inv)
            .collect()
    }

    /// Bare convolution of the coefficient vectors in `factors`.
    pub fn convolve(&self, factors: &[&[Complex64]]) -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(1.0, 0.0); self.points];
        for f in factors {
            for (a, v) in acc.iter_mut().zip(self.synthesize(f)) {
                *a *= v;
            }
        }
        self.analyze(acc)
    }
}

/// Bare convolution of two or three fields through a padded FFT grid.
pub fn product_padded(factors: &[&SpectralField], padded_points: usize) -> Result<SpectralField> {
    if !(2..=3).contains(&factors.len()) {
        return Err(Error::FactorCount(factors.len()));
    }
    let grid = same_grid(factors)?;
    let required = (factors.len() + 1) * grid.modes() + 1;
    if padded_points < required {
        return Err(Error::PaddingTooSmall {
            points: padded_points,
            factors: factors.len(),
            modes: grid.modes(),
            required,
        });
    }
    let pp = PaddedProducts::new(grid, padded_points);
    let slices: Vec<&[Complex64]> = factors.iter().map(|f| f.coeffs()).collect();
    let coeffs = pp.convolve(&slices);
    let real = factors.iter().all(|f| f.is_real());
    let mut out = SpectralField {
        grid,
        coeffs,
        real,
    };
    if real {
        symmetrize(&grid, &mut out.coeffs);
    }
    Ok(out)
}

/// Uniformly sampled solution history.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<SpectralField>,
}

impl Trajectory {
    /// Time grids must be uniform and strictly monotone; a single state is allowed.
    pub fn new(times: Vec<f64>, states: Vec<SpectralField>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if times.len() != states.len() {
            return Err(Error::SizeMismatch {
                expected: states.len(),
                got: times.len(),
            });
        }
        let grid = *states[0].grid();
        if states.iter().any(|s| *s.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        if times.len() > 1 {
            let dt = times[1] - times[0];
            let span = (times[times.len() - 1] - times[0]).abs();
            let ok = dt != 0.0
                && times.windows(2).all(|w| {
                    let d = w[1] - w[0];
                    d * dt > 0.0 && (d - dt).abs() <= 1e-9 * dt.abs().max(1e-12 * span)
                });
            if !ok {
                return Err(Error::NonUniformTimes);
            }
        }
        Ok(Self { times, states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn grid(&self) -> &TorusGrid {
        self.states[0].grid()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &SpectralField {
        &self.states[i]
    }

    pub fn first(&self) -> &SpectralField {
        &self.states[0]
    }

    pub fn last(&self) -> &SpectralField {
        &self.states[self.states.len() - 1]
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Step between samples; zero for a single state.
    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            (self.t_end() - self.t0()) / (self.times.len() - 1) as f64
        } else {
            0.0
        }
    }

    /// Index of the sample closest to `t`, clamped to the trajectory.
    pub fn nearest_index(&self, t: f64) -> usize {
        let dt = self.dt();
        if dt == 0.0 {
            return 0;
        }
        let i = ((t - self.t0()) / dt).round();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.len() - 1)
        }
    }

    /// Applies `f` to every state.
    pub fn map_states(&self, f: impl Fn(f64, &SpectralField) -> Result<SpectralField>) -> Result<Self> {
        let states = self
            .times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| f(t, s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.times.clone(), states)
    }
}
