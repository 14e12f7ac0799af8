//! The gauge transform `NT(u)^(t, n) = e^{-30 i n Phi(t)} u^(t, n)`.
//!
//! `Phi(t)` integrates the spatial mean square `(2pi)^{-1} ||u(s)||^2` from
//! the first sample, so for an `L^2`-conserving flow `30 Phi(t) = c2 t` and
//! the transform removes the `c2 n` term from the dispersion.

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::spectral::{SpectralField, Trajectory};
use crate::{Error, Result, KAPPA};

/// Coefficient of `n Phi(t)` in the gauge phase.
pub const GAUGE_RATE: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAccumulator {
    times: Vec<f64>,
    phi: Vec<f64>,
}

impl PhaseAccumulator {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    pub fn at(&self, i: usize) -> f64 {
        self.phi[i]
    }
}

/// Trapezoidal running integral of the mean square along the trajectory.
pub fn accumulate_phase(traj: &Trajectory) -> PhaseAccumulator {
    let times = traj.times().to_vec();
    let density: Vec<f64> = traj
        .states()
        .iter()
        .map(|u| KAPPA * KAPPA * u.l2_norm_sq())
        .collect();
    let mut phi = Vec::with_capacity(times.len());
    phi.push(0.0);
    for i in 1..times.len() {
        let h = times[i] - times[i - 1];
        phi.push(phi[i - 1] + 0.5 * h * (density[i] + density[i - 1]));
    }
    PhaseAccumulator { times, phi }
}

fn rotate(traj: &Trajectory, phase: &PhaseAccumulator, sign: f64) -> Result<Trajectory> {
    if phase.times.len() != traj.len() {
        return Err(Error::TimeAxisMismatch);
    }
    let states = traj
        .states()
        .iter()
        .zip(&phase.phi)
        .map(|(u, &phi)| {
            u.map(|n, c| {
                let (s, co) = (sign * GAUGE_RATE * n as f64 * phi).sin_cos();
                c * Complex64::new(co, s)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(traj.times().to_vec(), states)
}

/// `v^(t, n) = e^{-30 i n Phi(t)} u^(t, n)` with the supplied phase.
pub fn apply_nt_with(traj: &Trajectory, phase: &PhaseAccumulator) -> Result<Trajectory> {
    rotate(traj, phase, -1.0)
}

/// Undoes [`apply_nt_with`] for the same phase.
pub fn apply_nt_inverse(traj: &Trajectory, phase: &PhaseAccumulator) -> Result<Trajectory> {
    rotate(traj, phase, 1.0)
}

/// Gauge transform with the phase accumulated from the trajectory itself.
pub fn apply_nt(traj: &Trajectory) -> Result<(Trajectory, PhaseAccumulator)> {
    let phase = accumulate_phase(traj);
    Ok((apply_nt_with(traj, &phase)?, phase))
}

/// Separation of two trajectories before and after the gauge transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicontinuityReport {
    pub s: f64,
    /// `sup_t ||u(t) - v(t)||_{H^s}`
    pub input_separation: f64,
    /// `sup_t ||NT(u)(t) - NT(v)(t)||_{H^s}`
    pub output_separation: f64,
}

impl BicontinuityReport {
    pub fn ratio(&self) -> f64 {
        self.output_separation / self.input_separation
    }
}

fn sup_distance(a: &Trajectory, b: &Trajectory, s: f64) -> Result<f64> {
    let mut sup = 0.0f64;
    for (x, y) in a.states().iter().zip(b.states()) {
        sup = sup.max(x.sub(y)?.hs_norm(s));
    }
    Ok(sup)
}

/// Compares `sup_t ||u - v||_{H^s}` with the separation of the gauged pair,
/// each trajectory rotated by its own phase.
pub fn bicontinuity_experiment(u: &Trajectory, v: &Trajectory, s: f64) -> Result<BicontinuityReport> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    if u.len() != v.len() || u.times().iter().zip(v.times()).any(|(a, b)| a != b) {
        return Err(Error::TimeAxisMismatch);
    }
    let (gu, _) = apply_nt(u)?;
    let (gv, _) = apply_nt(v)?;
    Ok(BicontinuityReport {
        s,
        input_separation: sup_distance(u, v, s)?,
        output_separation: sup_distance(&gu, &gv, s)?,
    })
}

/// Field whose coefficients are rotated by `e^{-i c n t}`; the closed form
/// of the gauge on an `L^2`-conserving flow with `c = c2`.
pub fn linear_phase_shift(u: &SpectralField, c: f64, t: f64) -> Result<SpectralField> {
    u.map(|n, z| {
        let (s, co) = (-c * n as f64 * t).sin_cos();
        z * Complex64::new(co, s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use rand::{Rng, SeedableRng};

    fn random_traj(seed: u64, len: usize) -> Trajectory {
        let grid = TorusGrid::with_modes(8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let states = (0..len)
            .map(|_| {
                let m: Vec<(i64, Complex64)> = (0..=8)
                    .map(|n| (n, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                    .collect();
                SpectralField::real_from_modes(grid, &m).unwrap()
            })
            .collect();
        Trajectory::new((0..len).map(|i| 0.01 * i as f64).collect(), states).unwrap()
    }

    #[test]
    fn constant_norm_phase_is_linear() {
        let grid = TorusGrid::with_modes(4);
        let u = SpectralField::from_fn(grid, |x| 1.0 + x.cos());
        let rho = KAPPA * KAPPA * u.l2_norm_sq();
        let traj = Trajectory::new(
            (0..11).map(|i| 0.1 * i as f64).collect(),
            alloc::vec![u; 11],
        )
        .unwrap();
        let phase = accumulate_phase(&traj);
        for (t, p) in phase.times().iter().zip(phase.values()) {
            assert!((p - rho * t).abs() < 1e-15);
        }
        let zero = Trajectory::new(alloc::vec![0.0, 1.0], alloc::vec![SpectralField::zeros(grid); 2]).unwrap();
        assert!(accumulate_phase(&zero).values().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn gauge_preserves_moduli_and_inverts() {
        for seed in 0..3 {
            let traj = random_traj(seed, 6);
            let (g, phase) = apply_nt(&traj).unwrap();
            assert_eq!(g.first(), traj.first());
            assert!(phase.values().windows(2).all(|w| w[1] >= w[0]));
            for (a, b) in g.states().iter().zip(traj.states()) {
                for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                    assert!((x.norm() - y.norm()).abs() < 1e-15);
                }
                for s in [0.0, 1.0, 2.0] {
                    assert!((a.hs_norm(s) - b.hs_norm(s)).abs() < 1e-12 * b.hs_norm(s));
                }
            }
            let back = apply_nt_inverse(&g, &phase).unwrap();
            for (a, b) in back.states().iter().zip(traj.states()) {
                for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                    assert!((x - y).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bicontinuity_of_identical_trajectories() {
        let traj = random_traj(9, 4);
        let r = bicontinuity_experiment(&traj, &traj, 1.0).unwrap();
        assert_eq!(r.input_separation, 0.0);
        assert_eq!(r.output_separation, 0.0);
    }
}
