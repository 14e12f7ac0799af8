//! Dyadic localization in frequency and modulation.
//!
//! * [`bump`]: the concrete cutoff `eta0` and the bands `chi_k`, `psi_k`
//! * [`spectrum`]: windowed space-time transforms and the `X_k`, `F_k`,
//!   `N_k`, `F^s`, `N^s`, `E^s` norms of sampled solutions
//! * [`trilinear`]: the functional `J` on dyadic pieces and the block estimates

pub mod bump;
pub mod spectrum;
pub mod trilinear;

pub use bump::{make_bump, BumpFamily, Profile};
pub use crate::resonance::band_range;

use crate::spectral::{SpectralField, Trajectory};
use crate::Result;

/// Whether `n` lies in the integer support `2^{k-1} < |n| < 2^{k+1}` of band `k`
/// (`|n| <= 1` for `k = 0`).
pub fn band_contains(k: u32, n: i64) -> bool {
    let (lo, hi) = band_range(k);
    let a = n.abs();
    a >= lo && a <= hi
}

/// `P_k u`, the Fourier multiplier `chi_k(n)`.
pub fn project(u: &SpectralField, k: u32, bumps: &BumpFamily) -> SpectralField {
    u.multiply_even(|n| bumps.chi(k, n as f64))
}

/// `P_k` applied to every state of a trajectory.
pub fn project_trajectory(traj: &Trajectory, k: u32, bumps: &BumpFamily) -> Result<Trajectory> {
    traj.map_states(|_, u| Ok(project(u, k, bumps)))
}

/// Smallest `K` whose partition `sum_{k <= K} chi_k` is one on all modes of a grid.
pub fn covering_band(modes: usize) -> u32 {
    let mut k = 0;
    while (1usize << k) < 2 * modes.max(1) {
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use num_complex::Complex64;

    fn field(modes: usize) -> SpectralField {
        let grid = TorusGrid::with_modes(modes);
        let m: alloc::vec::Vec<(i64, Complex64)> = (0..=modes as i64)
            .map(|n| (n, Complex64::new(1.0 / (1.0 + n as f64), 0.3 * (n as f64).sin())))
            .collect();
        SpectralField::real_from_modes(grid, &m).unwrap()
    }

    #[test]
    fn projections_reconstruct_the_field() {
        let b = BumpFamily::default();
        let u = field(40);
        let kmax = covering_band(40);
        let mut acc = SpectralField::zeros(*u.grid());
        for k in 0..=kmax {
            acc = acc.add(&project(&u, k, &b)).unwrap();
        }
        for (a, c) in acc.coeffs().iter().zip(u.coeffs()) {
            assert!((a - c).norm() < 1e-14);
        }
    }

    #[test]
    fn single_mode_projects_to_its_bands() {
        let b = BumpFamily::default();
        let grid = TorusGrid::with_modes(32);
        let u = SpectralField::real_from_modes(grid, &[(16, Complex64::new(1.0, 0.0))]).unwrap();
        assert_eq!(project(&u, 4, &b).coeff(16).re, 1.0);
        for k in [0, 1, 2, 3, 5, 6] {
            assert_eq!(project(&u, k, &b).l2_norm(), 0.0);
        }
    }

    #[test]
    fn non_neighbour_bands_do_not_overlap() {
        let b = BumpFamily::default();
        for k in 0..10u32 {
            for kp in k + 2..12 {
                for n in 0..4096 {
                    assert_eq!(b.chi(k, n as f64) * b.chi(kp, n as f64), 0.0);
                }
            }
        }
        for k in 0..10u32 {
            for n in 0..4096i64 {
                assert_eq!(b.chi(k, n as f64) != 0.0, band_contains(k, n) && b.chi(k, n as f64) != 0.0);
                if b.chi(k, n as f64) != 0.0 {
                    assert!(band_contains(k, n));
                }
            }
        }
    }
}
