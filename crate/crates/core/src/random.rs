//! Seeded random real fields and perturbations on level sets of mean and `L^2` norm.

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;
use rand::Rng;

use crate::spectral::{SpectralField, TorusGrid};
use crate::{Error, Result};

/// Standard normal deviate by Box-Muller.
fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
}

/// Shape of a random field before it is scaled to its target norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomFieldSpec {
    /// Coefficients on `1 <= |n| <= max_mode` (capped by the grid).
    pub max_mode: usize,
    /// Amplitudes decay like `<n>^{-decay}`.
    pub decay: f64,
    /// Keep the zero mode at zero.
    pub zero_mean: bool,
}

impl Default for RandomFieldSpec {
    fn default() -> Self {
        Self {
            max_mode: 8,
            decay: 2.0,
            zero_mean: true,
        }
    }
}

/// Random real field with Gaussian coefficients of decaying variance,
/// scaled so that `||u||_{H^s} = radius`.
pub fn random_hs_field<R: Rng + ?Sized>(
    grid: TorusGrid,
    spec: &RandomFieldSpec,
    s: f64,
    radius: f64,
    rng: &mut R,
) -> Result<SpectralField> {
    if !(radius.is_finite() && radius >= 0.0) || spec.max_mode == 0 {
        return Err(Error::InvalidConfig("radius must be nonnegative and max_mode positive"));
    }
    let top = spec.max_mode.min(grid.modes()) as i64;
    let mut modes: Vec<(i64, Complex64)> = Vec::new();
    if !spec.zero_mean {
        modes.push((0, Complex64::new(normal(rng), 0.0)));
    }
    for n in 1..=top {
        let w = (1.0 + (n * n) as f64).powf(-spec.decay / 2.0);
        modes.push((n, Complex64::new(normal(rng), normal(rng)) * w));
    }
    let u = SpectralField::real_from_modes(grid, &modes)?;
    let norm = u.hs_norm(s);
    if norm == 0.0 {
        return Ok(u);
    }
    Ok(u.scale(radius / norm))
}

/// `v` with the mean and `L^2` norm of `u` and `||u - v||_{H^s}` close to `eps`.
///
/// A random direction with the same shape as `u` is added to the nonzero
/// modes, which are then rescaled back onto the `L^2` sphere of `u`.
pub fn level_set_perturbation<R: Rng + ?Sized>(
    u: &SpectralField,
    spec: &RandomFieldSpec,
    s: f64,
    eps: f64,
    rng: &mut R,
) -> Result<SpectralField> {
    let dir = random_hs_field(*u.grid(), &RandomFieldSpec { zero_mean: true, ..*spec }, s, 1.0, rng)?;
    let mean = u.coeff(0);
    let oscillation = |f: &SpectralField| f.map(|n, c| if n == 0 { Complex64::new(0.0, 0.0) } else { c });
    let base = oscillation(u)?;
    let target = base.l2_norm();
    if target == 0.0 {
        return Err(Error::InvalidConfig("level-set perturbation needs a nonconstant field"));
    }
    // the secant step shrinks under rescaling; two passes fix the H^s distance to eps
    let mut step = eps;
    let mut v = u.clone();
    for _ in 0..3 {
        let trial = base.add(&dir.scale(step))?;
        let moved = trial.scale(target / trial.l2_norm());
        v = moved.map(|n, c| if n == 0 { mean } else { c })?;
        let dist = u.sub(&v)?.hs_norm(s);
        if dist == 0.0 {
            break;
        }
        step *= eps / dist;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn fields_hit_their_norm_and_are_reproducible() {
        let grid = TorusGrid::with_modes(16);
        let spec = RandomFieldSpec::default();
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let u = random_hs_field(grid, &spec, 1.0, 0.01, &mut a).unwrap();
        let v = random_hs_field(grid, &spec, 1.0, 0.01, &mut b).unwrap();
        assert_eq!(u, v);
        assert!(u.is_real());
        assert!((u.hs_norm(1.0) - 0.01).abs() < 1e-15);
        assert_eq!(u.coeff(0), Complex64::new(0.0, 0.0));
        assert_eq!(u.coeff(9), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn perturbations_stay_on_the_level_set() {
        let grid = TorusGrid::with_modes(16);
        let spec = RandomFieldSpec {
            zero_mean: false,
            ..RandomFieldSpec::default()
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let u = random_hs_field(grid, &spec, 1.0, 0.5, &mut rng).unwrap();
        for eps in [1e-2, 1e-4, 1e-6] {
            let v = level_set_perturbation(&u, &spec, 1.0, eps, &mut rng).unwrap();
            assert_eq!(v.coeff(0), u.coeff(0));
            assert!((v.l2_norm_sq() - u.l2_norm_sq()).abs() < 1e-14);
            let d = u.sub(&v).unwrap().hs_norm(1.0);
            assert!((d / eps - 1.0).abs() < 1e-3, "{d} {eps}");
        }
    }
}
