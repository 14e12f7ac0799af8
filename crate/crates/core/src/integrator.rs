//! Exponential time stepping with conservation monitoring.
//!
//! The linear part `i mu(n)` is integrated exactly. ETDRK4 (Cox and
//! Matthews) evaluates its phi-function coefficients by averaging over a
//! circle of radius one around `h L` in the complex plane, which avoids the
//! cancellation of the closed forms near `h L = 0`. IFRK4 (classical RK4 in
//! the interaction picture) is the cross-check scheme.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use crate::equation::{EquationParams, Nonlinearity};
use crate::spectral::{padded_len, PaddedProducts, SpectralField, Trajectory};
use crate::{Error, Result, KAPPA, SQRT_TWO_PI};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Etdrk4,
    Ifrk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Step size; negative values integrate backward in time.
    pub dt: f64,
    /// Signed length of the integration interval, same sign as `dt`.
    pub t_end: f64,
    pub scheme: Scheme,
    pub contour_points: usize,
    pub dealias: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-5,
            t_end: 1e-2,
            scheme: Scheme::Etdrk4,
            contour_points: 32,
            dealias: true,
        }
    }
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            ..Self::default()
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt == 0.0 {
            return Err(Error::InvalidConfig("dt must be finite and nonzero"));
        }
        if !self.t_end.is_finite() {
            return Err(Error::InvalidConfig("t_end must be finite"));
        }
        let ratio = self.t_end / self.dt;
        if ratio < 0.0 || (ratio - ratio.round()).abs() > 1e-9 * ratio.abs().max(1.0) {
            return Err(Error::InvalidConfig("t_end must be a nonnegative integer multiple of dt"));
        }
        if self.contour_points < 16 {
            return Err(Error::InvalidConfig("contour_points must be at least 16"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// IFRK4 becomes unreliable once `|dt| N^5` exceeds `1e4`.
    pub fn stability_warning(&self, modes: usize) -> bool {
        self.scheme == Scheme::Ifrk4 && self.dt.abs() * (modes as f64).powi(5) > 1e4
    }
}

/// Precomputed single-step map for a fixed grid, equation and step size.
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme: Scheme,
    h: f64,
    nonlinearity: Nonlinearity,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

fn contour_coefficients(z: Complex64, h: f64, points: usize) -> [Complex64; 4] {
    let mut acc = [ZERO; 4];
    for j in 0..points {
        let theta = 2.0 * PI * (j as f64 + 0.5) / points as f64;
        let lr = z + Complex64::new(theta.cos(), theta.sin());
        let el = lr.exp();
        let el2 = (lr * 0.5).exp();
        let lr3 = lr * lr * lr;
        acc[0] += (el2 - 1.0) / lr;
        acc[1] += (-4.0 - lr + el * (4.0 - 3.0 * lr + lr * lr)) / lr3;
        acc[2] += (2.0 + lr + el * (lr - 2.0)) / lr3;
        acc[3] += (-4.0 - 3.0 * lr - lr * lr + el * (4.0 - lr)) / lr3;
    }
    let w = h / points as f64;
    acc.map(|a| a * w)
}

impl Stepper {
    pub fn new(grid: &crate::spectral::TorusGrid, params: &EquationParams, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let h = cfg.dt;
        let len = grid.len();
        let (mut e, mut e2) = (Vec::with_capacity(len), Vec::with_capacity(len));
        let (mut q, mut f1, mut f2, mut f3) = (
            vec![ZERO; len],
            vec![ZERO; len],
            vec![ZERO; len],
            vec![ZERO; len],
        );
        for (i, n) in grid.frequencies().enumerate() {
            let z = I * params.mu(n) * h;
            e.push(z.exp());
            e2.push((z * 0.5).exp());
            if cfg.scheme == Scheme::Etdrk4 {
                let [a, b, c, d] = contour_coefficients(z, h, cfg.contour_points);
                q[i] = a;
                f1[i] = b;
                f2[i] = c;
                f3[i] = d;
            }
        }
        Ok(Self {
            scheme: cfg.scheme,
            h,
            nonlinearity: Nonlinearity::new(*grid, params, cfg.dealias),
            e,
            e2,
            q,
            f1,
            f2,
            f3,
        })
    }

    pub fn dt(&self) -> f64 {
        self.h
    }

    fn etdrk4(&self, v: &[Complex64]) -> Vec<Complex64> {
        let nl = |x: &[Complex64]| self.nonlinearity.eval(x);
        let nv = nl(v);
        let a: Vec<Complex64> = (0..v.len()).map(|i| self.e2[i] * v[i] + self.q[i] * nv[i]).collect();
        let na = nl(&a);
        let b: Vec<Complex64> = (0..v.len()).map(|i| self.e2[i] * v[i] + self.q[i] * na[i]).collect();
        let nb = nl(&b);
        let c: Vec<Complex64> = (0..v.len())
            .map(|i| self.e2[i] * a[i] + self.q[i] * (2.0 * nb[i] - nv[i]))
            .collect();
        let nc = nl(&c);
        (0..v.len())
            .map(|i| {
                self.e[i] * v[i]
                    + self.f1[i] * nv[i]
                    + 2.0 * self.f2[i] * (na[i] + nb[i])
                    + self.f3[i] * nc[i]
            })
            .collect()
    }

    fn ifrk4(&self, u: &[Complex64]) -> Vec<Complex64> {
        let h = self.h;
        let nl = |x: &[Complex64]| self.nonlinearity.eval(x);
        let k1 = nl(u);
        let u2: Vec<Complex64> = (0..u.len()).map(|i| self.e2[i] * (u[i] + 0.5 * h * k1[i])).collect();
        let k2 = nl(&u2);
        let u3: Vec<Complex64> = (0..u.len()).map(|i| self.e2[i] * u[i] + 0.5 * h * k2[i]).collect();
        let k3 = nl(&u3);
        let u4: Vec<Complex64> = (0..u.len())
            .map(|i| self.e[i] * u[i] + h * self.e2[i] * k3[i])
            .collect();
        let k4 = nl(&u4);
        (0..u.len())
            .map(|i| {
                self.e[i] * u[i]
                    + h / 6.0 * (self.e[i] * k1[i] + 2.0 * self.e2[i] * (k2[i] + k3[i]) + k4[i])
            })
            .collect()
    }

    /// One step applied to a coefficient vector; the result is Hermitian when
    /// the input is.
    pub fn step_coeffs(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = match self.scheme {
            Scheme::Etdrk4 => self.etdrk4(u),
            Scheme::Ifrk4 => self.ifrk4(u),
        };
        crate::equation::hermitize(&mut out);
        out
    }

    /// One step; `index` labels the step in a blow-up error.
    pub fn step(&self, u: &SpectralField, index: usize) -> Result<SpectralField> {
        let out = self.step_coeffs(u.coeffs());
        if out.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::BlowUp { step: index });
        }
        SpectralField::from_coeffs(*u.grid(), out, u.is_real())
    }
}

/// A single step of the configured scheme.
pub fn step(u: &SpectralField, params: &EquationParams, cfg: &SolverConfig) -> Result<SpectralField> {
    Stepper::new(u.grid(), params, cfg)?.step(u, 1)
}

/// Conserved quantities `M = int u/2`, `E = int u^2/2` and
/// `H3 = int (u_xx^2/2 + 5 u u_x^2 + 5 u^4/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonians {
    pub mass: f64,
    pub energy: f64,
    pub h3: f64,
}

/// Evaluates the three functionals with alias-free quadrature on a padded grid.
pub fn hamiltonians(u: &SpectralField) -> Result<Hamiltonians> {
    let grid = *u.grid();
    if !u.is_real() {
        return Err(Error::SymmetryViolation {
            n: 0,
            defect: f64::NAN,
        });
    }
    let pp = PaddedProducts::new(grid, padded_len(3, grid.modes()));
    let ux: Vec<Complex64> = u.iter().map(|(n, c)| I * n as f64 * c).collect();
    let v = pp.synthesize(u.coeffs());
    let vx = pp.synthesize(&ux);
    let w = 2.0 * PI / pp.points() as f64;
    let mut quartic = 0.0;
    for (a, b) in v.iter().zip(&vx) {
        let (p, px) = (KAPPA * a.re, KAPPA * b.re);
        quartic += 5.0 * p * px * px + 2.5 * p * p * p * p;
    }
    let curvature: f64 = u
        .iter()
        .map(|(n, c)| 0.5 * (n as f64).powi(4) * c.norm_sqr())
        .sum();
    Ok(Hamiltonians {
        mass: 0.5 * SQRT_TWO_PI * u.coeff(0).re,
        energy: 0.5 * u.l2_norm_sq(),
        h3: curvature + w * quartic,
    })
}

/// Per-sample conserved quantities along a trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConservationReport {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub h3: Vec<f64>,
}

/// Floor of the drift denominator.
pub const DRIFT_FLOOR: f64 = 1e-14;

fn drift(series: &[f64]) -> Vec<f64> {
    let x0 = series[0];
    series
        .iter()
        .map(|x| (x - x0).abs() / x0.abs().max(DRIFT_FLOOR))
        .collect()
}

impl ConservationReport {
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        let mut r = Self::default();
        for (t, u) in traj.times().iter().zip(traj.states()) {
            r.push(*t, hamiltonians(u)?);
        }
        Ok(r)
    }

    fn push(&mut self, t: f64, h: Hamiltonians) {
        self.times.push(t);
        self.mass.push(h.mass);
        self.energy.push(h.energy);
        self.h3.push(h.h3);
    }

    pub fn drift_mass(&self) -> Vec<f64> {
        drift(&self.mass)
    }

    pub fn drift_energy(&self) -> Vec<f64> {
        drift(&self.energy)
    }

    pub fn drift_h3(&self) -> Vec<f64> {
        drift(&self.h3)
    }

    pub fn max_drift_mass(&self) -> f64 {
        self.drift_mass().into_iter().fold(0.0, f64::max)
    }

    pub fn max_drift_energy(&self) -> f64 {
        self.drift_energy().into_iter().fold(0.0, f64::max)
    }

    pub fn max_drift_h3(&self) -> f64 {
        self.drift_h3().into_iter().fold(0.0, f64::max)
    }
}

/// Integrates from `u0` over `cfg.t_end`, keeping every step.
pub fn evolve(
    u0: &SpectralField,
    params: &EquationParams,
    cfg: &SolverConfig,
) -> Result<(Trajectory, ConservationReport)> {
    let stepper = Stepper::new(u0.grid(), params, cfg)?;
    let steps = cfg.steps();
    let mut states = Vec::with_capacity(steps + 1);
    let mut report = ConservationReport::default();
    report.push(0.0, hamiltonians(u0)?);
    states.push(u0.clone());
    for i in 1..=steps {
        let next = stepper.step(&states[i - 1], i)?;
        report.push(i as f64 * cfg.dt, hamiltonians(&next)?);
        states.push(next);
    }
    let times = (0..=steps).map(|i| i as f64 * cfg.dt).collect();
    Ok((Trajectory::new(times, states)?, report))
}

/// Final state only, without storing the history.
pub fn evolve_final(u0: &SpectralField, params: &EquationParams, cfg: &SolverConfig) -> Result<SpectralField> {
    let stepper = Stepper::new(u0.grid(), params, cfg)?;
    let mut u = u0.clone();
    for i in 1..=cfg.steps() {
        u = stepper.step(&u, i)?;
    }
    Ok(u)
}

/// Outcome of evolving two nearby initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport {
    pub s: f64,
    pub initial_separation: f64,
    pub sup_separation: f64,
}

impl DivergenceReport {
    pub fn ratio(&self) -> f64 {
        self.sup_separation / self.initial_separation
    }
}

/// Tolerance for the level-set test on the mean and `L^2` norm.
pub const LEVEL_SET_TOL: f64 = 1e-10;

/// Evolves `u0` and `v0` with the same equation and reports
/// `sup_t ||u(t) - v(t)||_{H^s}`. With `level_set` both data must share the
/// mean and the `L^2` norm.
pub fn two_solution_divergence(
    u0: &SpectralField,
    v0: &SpectralField,
    params: &EquationParams,
    cfg: &SolverConfig,
    s: f64,
    level_set: bool,
) -> Result<DivergenceReport> {
    if u0.grid() != v0.grid() {
        return Err(Error::GridMismatch);
    }
    if level_set {
        let mean_gap = (u0.coeff(0).re - v0.coeff(0).re).abs();
        let l2_gap = (u0.l2_norm_sq() - v0.l2_norm_sq()).abs();
        if mean_gap > LEVEL_SET_TOL || l2_gap > LEVEL_SET_TOL {
            return Err(Error::LevelSet { mean_gap, l2_gap });
        }
    }
    let stepper = Stepper::new(u0.grid(), params, cfg)?;
    let initial = u0.sub(v0)?.hs_norm(s);
    let (mut u, mut v) = (u0.clone(), v0.clone());
    let mut sup = initial;
    for i in 1..=cfg.steps() {
        u = stepper.step(&u, i)?;
        v = stepper.step(&v, i)?;
        sup = sup.max(u.sub(&v)?.hs_norm(s));
    }
    Ok(DivergenceReport {
        s,
        initial_separation: initial,
        sup_separation: sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::Coefficients;
    use crate::gauge;
    use crate::spectral::TorusGrid;

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.sub(b).unwrap().coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(1e-5, 1e-2).validate().is_ok());
        assert!(SolverConfig::new(-1e-5, -1e-2).validate().is_ok());
        assert!(SolverConfig::new(3e-5, 1e-4).validate().is_err());
        assert!(SolverConfig::new(0.0, 1.0).validate().is_err());
        let c = SolverConfig { contour_points: 8, ..SolverConfig::default() };
        assert!(c.validate().is_err());
        assert!(SolverConfig::default().with_scheme(Scheme::Ifrk4).stability_warning(128));
        assert!(!SolverConfig::default().stability_warning(128));
    }

    #[test]
    fn hamiltonian_examples() {
        let grid = TorusGrid::with_modes(8);
        let h = hamiltonians(&SpectralField::from_fn(grid, f64::cos)).unwrap();
        assert!(h.mass.abs() < 1e-15);
        assert!((h.energy - PI / 2.0).abs() < 1e-14);
        let c = SpectralField::from_fn(grid, |_| KAPPA);
        let h = hamiltonians(&c).unwrap();
        assert!((h.energy - PI * KAPPA * KAPPA).abs() < 1e-15);
        assert!((h.h3 - 2.5 * KAPPA.powi(4) * 2.0 * PI).abs() < 1e-15);
        let z = hamiltonians(&SpectralField::zeros(grid)).unwrap();
        assert_eq!((z.mass, z.energy, z.h3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn h3_density_against_direct_quadrature() {
        let grid = TorusGrid::with_modes(6);
        let f = |x: f64| 0.3 + x.sin() - 0.4 * (2.0 * x).cos() + 0.1 * (5.0 * x).sin();
        let fx = |x: f64| x.cos() + 0.8 * (2.0 * x).sin() + 0.5 * (5.0 * x).cos();
        let fxx = |x: f64| -x.sin() + 1.6 * (2.0 * x).cos() - 2.5 * (5.0 * x).sin();
        let u = SpectralField::from_fn(grid, f);
        let m = 4000;
        let mut want = 0.0;
        for i in 0..m {
            let x = 2.0 * PI * i as f64 / m as f64;
            want += 0.5 * fxx(x).powi(2) + 5.0 * f(x) * fx(x).powi(2) + 2.5 * f(x).powi(4);
        }
        want *= 2.0 * PI / m as f64;
        let got = hamiltonians(&u).unwrap().h3;
        assert!((got - want).abs() < 1e-11 * want.abs());
    }

    #[test]
    fn zero_field_stays_zero() {
        let grid = TorusGrid::with_modes(16);
        let z = SpectralField::zeros(grid);
        let p = EquationParams::raw(Coefficients::INTEGRABLE);
        for scheme in [Scheme::Etdrk4, Scheme::Ifrk4] {
            let out = step(&z, &p, &SolverConfig::new(1e-4, 1e-4).with_scheme(scheme)).unwrap();
            assert!(out.coeffs().iter().all(|c| *c == ZERO));
        }
    }

    #[test]
    fn linear_flow_is_exact() {
        let grid = TorusGrid::with_modes(16);
        let u0 = SpectralField::from_fn(grid, |x| x.cos() + 0.3 * (7.0 * x).sin());
        let p = EquationParams::with_constants(Coefficients::new(0.0, 0.0, 0.0), 0.7, 3.0).unwrap();
        let cfg = SolverConfig::new(1e-3, 2e-2);
        let u = evolve_final(&u0, &p, &cfg).unwrap();
        let want = u0
            .map(|n, c| c * (I * p.mu(n) * 2e-2).exp())
            .unwrap();
        assert!(max_diff(&u, &want) < 1e-12);
    }

    #[test]
    fn blow_up_is_reported_with_step() {
        let grid = TorusGrid::with_modes(8);
        let u0 = SpectralField::from_fn(grid, |x| 1e3 * x.cos());
        let p = EquationParams::raw(Coefficients::new(-3.0e4, 0.0, 0.0));
        let err = evolve(&u0, &p, &SolverConfig::new(1e-1, 10.0).with_scheme(Scheme::Ifrk4)).unwrap_err();
        assert!(matches!(err, Error::BlowUp { step } if step >= 1));
    }

    #[test]
    fn schemes_agree_and_are_fourth_order() {
        let grid = TorusGrid::with_modes(16);
        let u0 = SpectralField::from_fn(grid, f64::cos);
        let p = EquationParams::renormalized(Coefficients::INTEGRABLE, &u0).unwrap();
        let run = |dt: f64, scheme| {
            evolve_final(&u0, &p, &SolverConfig::new(dt, 1e-3).with_scheme(scheme)).unwrap()
        };
        let a = run(1e-4, Scheme::Etdrk4);
        let b = run(5e-5, Scheme::Etdrk4);
        let c = run(2.5e-5, Scheme::Etdrk4);
        let ratio = max_diff(&a, &b) / max_diff(&b, &c);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
        let d = run(2.5e-5, Scheme::Ifrk4);
        assert!(max_diff(&c, &d) < 1e-9);
    }

    #[test]
    fn raw_and_renormalized_flows_agree() {
        let grid = TorusGrid::with_modes(16);
        let u0 = SpectralField::from_fn(grid, |x| 0.4 + 0.5 * x.cos() - 0.2 * (2.0 * x).sin());
        let co = Coefficients::INTEGRABLE;
        let cfg = SolverConfig::new(1e-5, 1e-2);
        let raw = evolve_final(&u0, &EquationParams::raw(co), &cfg).unwrap();
        let ren = evolve_final(&u0, &EquationParams::renormalized(co, &u0).unwrap(), &cfg).unwrap();
        assert!(max_diff(&raw, &ren) < 1e-9);
    }

    #[test]
    fn gauge_equals_linear_phase_on_conserving_flow() {
        let grid = TorusGrid::with_modes(16);
        let u0 = SpectralField::from_fn(grid, |x| 0.5 * x.cos() + 0.2 * (3.0 * x).sin());
        let p = EquationParams::renormalized(Coefficients::INTEGRABLE, &u0).unwrap();
        let (traj, _) = evolve(&u0, &p, &SolverConfig::new(1e-4, 1e-2)).unwrap();
        let (g, _) = gauge::apply_nt(&traj).unwrap();
        for (i, t) in traj.times().iter().enumerate() {
            let want = gauge::linear_phase_shift(traj.state(i), p.c2(), *t).unwrap();
            assert!(max_diff(g.state(i), &want) < 1e-8);
        }
    }

    #[test]
    fn backward_integration_returns_initial_data() {
        let grid = TorusGrid::with_modes(16);
        let u0 = SpectralField::from_fn(grid, |x| 0.3 * x.cos() + 0.1 * (2.0 * x).sin());
        let p = EquationParams::renormalized(Coefficients::INTEGRABLE, &u0).unwrap();
        let fwd = evolve_final(&u0, &p, &SolverConfig::new(1e-4, 1e-2)).unwrap();
        let back = evolve_final(&fwd, &p, &SolverConfig::new(-1e-4, -1e-2)).unwrap();
        assert!(max_diff(&back, &u0) < 1e-6);
    }

    #[test]
    fn mass_is_conserved_exactly() {
        let grid = TorusGrid::with_modes(16);
        let u0 = SpectralField::from_fn(grid, |x| 0.7 + 0.5 * x.cos());
        for co in [Coefficients::INTEGRABLE, Coefficients::new(-30.0, 20.0, 5.0)] {
            let p = EquationParams::raw(co);
            let (_, rep) = evolve(&u0, &p, &SolverConfig::new(1e-4, 5e-3)).unwrap();
            assert!(rep.max_drift_mass() < 1e-13);
        }
    }

    #[test]
    fn level_set_is_enforced() {
        let grid = TorusGrid::with_modes(8);
        let u0 = SpectralField::from_fn(grid, f64::cos);
        let v0 = SpectralField::from_fn(grid, |x| 1.01 * x.cos());
        let p = EquationParams::renormalized(Coefficients::INTEGRABLE, &u0).unwrap();
        let cfg = SolverConfig::new(1e-4, 1e-3);
        assert!(matches!(
            two_solution_divergence(&u0, &v0, &p, &cfg, 2.0, true),
            Err(Error::LevelSet { .. })
        ));
        let r = two_solution_divergence(&u0, &v0, &p, &cfg, 2.0, false).unwrap();
        assert!(r.sup_separation >= r.initial_separation);
    }
}
