//! Windowed space-time spectra and the dyadic short-time norms.
//!
//! For a band `k` and a window center `t_c` the data
//! `f(t, n) = eta0(2^{2k}(t - t_c)) chi_k(n) u^(t, n)` is transformed in time,
//! `F(tau, n) = int e^{-i tau t} f(t, n) dt`. Spectra are stored in the
//! modulation variable `sigma = tau - mu(n)`, computed from the interaction
//! profile `e^{-i mu(n) t} u^(t, n)`; this keeps the large phase `mu(n) t` out of
//! the sampled signal so the time grid only has to resolve the nonlinear
//! modulation.
//!
//! ```text
//! X_k(F) = sum_j 2^{j/2} || chi_j(sigma) F ||_{L^2_sigma l^2_n}
//! F_k(u) = sup_{t_k} X_k(F[u; t_k]),   N_k(u) = sup_{t_k} X_k((sigma + i 2^{2k})^{-1} F[u; t_k])
//! ```
//!
//! Outside the sampled interval the solution is extended by the free
//! evolution of the end state times a smooth taper of length `2^{-2k}`, so the
//! reported `F_k`, `N_k` are upper bounds for the infimum over extensions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use super::{band_contains, BumpFamily};
use crate::equation::EquationParams;
use crate::fft::FftPlan;
use crate::spectral::Trajectory;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn pow2(e: i32) -> f64 {
    f64::powi(2.0, e)
}

/// Samples per window-time unit required for band `k`: `dt <= 2^{-2k} / 32`.
pub fn required_dt(k: u32) -> f64 {
    pow2(-2 * k as i32) / 32.0
}

/// Discrete time transform of windowed band data, in modulation coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSpectrum {
    k: u32,
    t_center: f64,
    modes: Vec<i64>,
    d_sigma: f64,
    sigma: Vec<f64>,
    data: Vec<Vec<Complex64>>,
    sample_energy: f64,
}

impl SpaceTimeSpectrum {
    /// Spectrum on an explicit modulation grid; `data[i][q]` belongs to
    /// `modes[i]` and `sigma[q]`, and `d_sigma` is the quadrature weight.
    pub fn from_parts(
        k: u32,
        modes: Vec<i64>,
        sigma: Vec<f64>,
        d_sigma: f64,
        data: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if data.len() != modes.len() {
            return Err(Error::SizeMismatch {
                expected: modes.len(),
                got: data.len(),
            });
        }
        if let Some(row) = data.iter().find(|r| r.len() != sigma.len()) {
            return Err(Error::SizeMismatch {
                expected: sigma.len(),
                got: row.len(),
            });
        }
        let sample_energy = data
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            * d_sigma;
        Ok(Self {
            k,
            t_center: 0.0,
            modes,
            d_sigma,
            sigma,
            data,
            sample_energy,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn t_center(&self) -> f64 {
        self.t_center
    }

    pub fn modes(&self) -> &[i64] {
        &self.modes
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn d_sigma(&self) -> f64 {
        self.d_sigma
    }

    pub fn data(&self) -> &[Vec<Complex64>] {
        &self.data
    }

    /// `sum |F|^2 d_sigma`.
    pub fn spectral_energy(&self) -> f64 {
        self.data.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>() * self.d_sigma
    }

    /// Relative gap between `sum |F|^2 d_sigma` and `2 pi sum |f|^2 dt`.
    pub fn parseval_defect(&self) -> f64 {
        let e = self.spectral_energy();
        (e - self.sample_energy).abs() / self.sample_energy.max(f64::MIN_POSITIVE)
    }

    /// Largest `|sigma|` on the grid.
    pub fn sigma_max(&self) -> f64 {
        self.sigma.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Multiplies by a modulation symbol `m(sigma)`.
    pub fn weighted(&self, m: impl Fn(f64) -> Complex64) -> Self {
        let w: Vec<Complex64> = self.sigma.iter().map(|&s| m(s)).collect();
        let data = self
            .data
            .iter()
            .map(|row| row.iter().zip(&w).map(|(a, b)| a * b).collect())
            .collect();
        Self {
            data,
            ..self.clone()
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.weighted(|_| Complex64::new(a, 0.0))
    }

    /// Sum of two spectra on the same grid.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.modes != other.modes || self.sigma != other.sigma {
            return Err(Error::GridMismatch);
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Self {
            data,
            ..self.clone()
        })
    }

    /// Highest modulation index whose band meets the grid.
    pub fn natural_j_cap(&self) -> u32 {
        let smax = self.sigma_max();
        let mut j = 0;
        while pow2(j as i32 - 1) < smax && j < 200 {
            j += 1;
        }
        j
    }
}

/// Windowed, band-projected, time-transformed data of a trajectory.
///
/// The center snaps to the nearest sample and must lie inside the
/// trajectory; window parts outside it use the tapered free extension.
pub fn windowed_spectrum(
    traj: &Trajectory,
    k: u32,
    t_center: f64,
    bumps: &BumpFamily,
    params: &EquationParams,
) -> Result<SpaceTimeSpectrum> {
    let profile = BandProfile::new(traj, k, bumps, params)?;
    profile.spectrum(traj, t_center, bumps)
}

/// Interaction-picture samples `chi_k(n) e^{-i mu(n) t} u^(t, n)` of one band.
#[derive(Debug, Clone)]
struct BandProfile {
    k: u32,
    dt: f64,
    modes: Vec<i64>,
    samples: Vec<Vec<Complex64>>,
}

impl BandProfile {
    fn new(traj: &Trajectory, k: u32, bumps: &BumpFamily, params: &EquationParams) -> Result<Self> {
        let dt = traj.dt();
        let need = required_dt(k);
        if !(dt > 0.0) || dt > need * (1.0 + 1e-9) {
            return Err(Error::InsufficientResolution {
                k,
                required_dt: need,
                dt,
            });
        }
        let modes: Vec<i64> = traj
            .grid()
            .frequencies()
            .filter(|&n| band_contains(k, n) && bumps.chi(k, n as f64) != 0.0)
            .collect();
        let samples = modes
            .iter()
            .map(|&n| {
                let chi = bumps.chi(k, n as f64);
                let mu = params.mu(n);
                traj.times()
                    .iter()
                    .zip(traj.states())
                    .map(|(&t, u)| {
                        let (s, c) = (-mu * t).sin_cos();
                        u.coeff(n) * Complex64::new(c, s) * chi
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            k,
            dt,
            modes,
            samples,
        })
    }

    fn spectrum(&self, traj: &Trajectory, t_center: f64, bumps: &BumpFamily) -> Result<SpaceTimeSpectrum> {
        let k = self.k;
        if t_center < traj.t0() - 0.5 * self.dt || t_center > traj.t_end() + 0.5 * self.dt {
            return Err(Error::InsufficientSpan { k, t_center });
        }
        let ic = traj.nearest_index(t_center) as i64;
        let tc = traj.times()[ic as usize];
        let len = traj.len() as i64;
        let scale = pow2(2 * k as i32);
        let taper_len = pow2(-2 * k as i32);
        let half = (2.0 * taper_len / self.dt).ceil() as i64;
        let count = (2 * half + 1) as usize;
        let points = (8 * count).next_power_of_two();
        // window times weights, including the taper outside the sampled interval
        let weights: Vec<(i64, f64)> = (-half..=half)
            .map(|m| {
                let idx = ic + m;
                let t = tc + m as f64 * self.dt;
                let mut w = bumps.eta0(scale * (t - tc));
                let outside = if idx < 0 {
                    -idx as f64 * self.dt
                } else if idx >= len {
                    (idx - len + 1) as f64 * self.dt
                } else {
                    0.0
                };
                if outside > 0.0 {
                    w *= bumps.eta0(1.0 + outside / taper_len);
                }
                (idx.clamp(0, len - 1), w)
            })
            .collect();
        let plan = FftPlan::new(points);
        let d_sigma = 2.0 * PI / (points as f64 * self.dt);
        let sigma: Vec<f64> = (0..points)
            .map(|q| {
                let qq = q as i64 - (points / 2) as i64;
                qq as f64 * d_sigma
            })
            .collect();
        let phase: Vec<Complex64> = sigma
            .iter()
            .map(|&s| {
                let (si, co) = (-s * tc).sin_cos();
                Complex64::new(co, si) * self.dt
            })
            .collect();
        let mut sample_energy = 0.0;
        let mut data = Vec::with_capacity(self.modes.len());
        for row in &self.samples {
            let mut buf = vec![ZERO; points];
            for (m, &(idx, w)) in weights.iter().enumerate() {
                let v = row[idx as usize] * w;
                sample_energy += v.norm_sqr();
                let pos = (m as i64 - half).rem_euclid(points as i64) as usize;
                buf[pos] = v;
            }
            plan.forward(&mut buf);
            let out: Vec<Complex64> = (0..points)
                .map(|q| {
                    let bin = (q + points / 2) % points;
                    buf[bin] * phase[q]
                })
                .collect();
            data.push(out);
        }
        Ok(SpaceTimeSpectrum {
            k,
            t_center: tc,
            modes: self.modes.clone(),
            d_sigma,
            sigma,
            data,
            sample_energy: 2.0 * PI * sample_energy * self.dt,
        })
    }
}

/// Per-modulation contributions `2^{j/2} ||chi_j(sigma) F||` for `j <= j_cap`.
pub fn xk_contributions(spec: &SpaceTimeSpectrum, bumps: &BumpFamily, j_cap: u32) -> Vec<f64> {
    let mut acc = vec![0.0; j_cap as usize + 1];
    for (q, &s) in spec.sigma.iter().enumerate() {
        let mass: f64 = spec.data.iter().map(|row| row[q].norm_sqr()).sum();
        if mass == 0.0 {
            continue;
        }
        for j in 0..=j_cap {
            let c = bumps.chi(j, s);
            if c != 0.0 {
                acc[j as usize] += c * c * mass;
            }
        }
    }
    acc.iter()
        .enumerate()
        .map(|(j, &e)| pow2(j as i32).sqrt() * (e * spec.d_sigma).sqrt())
        .collect()
}

/// `X_k` norm of a spectrum, truncated at `j_cap` (default: the grid's natural cap).
pub fn xk_norm(spec: &SpaceTimeSpectrum, bumps: &BumpFamily, j_cap: Option<u32>) -> f64 {
    let cap = j_cap.unwrap_or_else(|| spec.natural_j_cap());
    xk_contributions(spec, bumps, cap).iter().sum()
}

/// The `N_k` weight `(sigma + i 2^{2k})^{-1}` applied to a spectrum.
pub fn nk_weighted(spec: &SpaceTimeSpectrum) -> SpaceTimeSpectrum {
    let shift = pow2(2 * spec.k as i32);
    spec.weighted(|s| Complex64::new(s, shift).inv())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    F,
    N,
}

/// `j` contributions at the maximizing window center of one band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandNorm {
    pub k: u32,
    pub t_k: f64,
    pub stride: f64,
    pub value: f64,
    pub contributions: Vec<f64>,
}

/// Upper-bound surrogate for `||P_k u||_{F_k(T)}` or `N_k(T)`: the supremum of
/// the windowed `X_k` norm over centers `t_k in [t0, min(T, t_end)]` spaced by
/// at most `2^{-2k}/8`. Modulations are truncated at `j_cap`.
pub fn band_norm_upper(
    traj: &Trajectory,
    k: u32,
    t_max: f64,
    params: &EquationParams,
    bumps: &BumpFamily,
    kind: NormKind,
    j_cap: u32,
) -> Result<BandNorm> {
    let profile = BandProfile::new(traj, k, bumps, params)?;
    let dt = profile.dt;
    let stride_steps = ((pow2(-2 * k as i32) / 8.0) / dt).floor().max(1.0) as usize;
    let last = traj.nearest_index(t_max.min(traj.t_end()));
    let mut best = BandNorm {
        k,
        t_k: traj.t0(),
        stride: stride_steps as f64 * dt,
        value: 0.0,
        contributions: vec![0.0; j_cap as usize + 1],
    };
    let mut centers: Vec<usize> = (0..=last).step_by(stride_steps).collect();
    if *centers.last().unwrap() != last {
        centers.push(last);
    }
    for i in centers {
        let spec = profile.spectrum(traj, traj.times()[i], bumps)?;
        let spec = match kind {
            NormKind::F => spec,
            NormKind::N => nk_weighted(&spec),
        };
        let contributions = xk_contributions(&spec, bumps, j_cap);
        let value: f64 = contributions.iter().sum();
        if value > best.value {
            best.value = value;
            best.t_k = spec.t_center();
            best.contributions = contributions;
        }
    }
    Ok(best)
}

/// `F_k` upper bound with the default modulation cap.
pub fn fk_norm_upper(
    traj: &Trajectory,
    k: u32,
    t_max: f64,
    params: &EquationParams,
    bumps: &BumpFamily,
) -> Result<f64> {
    let cap = default_j_cap(k, traj.dt());
    Ok(band_norm_upper(traj, k, t_max, params, bumps, NormKind::F, cap)?.value)
}

/// `N_k` upper bound with the default modulation cap.
pub fn nk_norm_upper(
    traj: &Trajectory,
    k: u32,
    t_max: f64,
    params: &EquationParams,
    bumps: &BumpFamily,
) -> Result<f64> {
    let cap = default_j_cap(k, traj.dt());
    Ok(band_norm_upper(traj, k, t_max, params, bumps, NormKind::N, cap)?.value)
}

/// `min(5 kmax + 10, j)` where `2^{j-1}` first exceeds the Nyquist modulation `pi / dt`.
pub fn default_j_cap(kmax: u32, dt: f64) -> u32 {
    let nyquist = PI / dt;
    let mut j = 0;
    while pow2(j as i32 - 1) < nyquist {
        j += 1;
    }
    j.min(5 * kmax + 10)
}

/// Dyadic assembly of band norms with per-band contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub kind: NormKind,
    pub s: f64,
    pub t_max: f64,
    pub j_cap: u32,
    pub bands: Vec<BandNorm>,
    pub total: f64,
}

fn check_kmax(traj: &Trajectory, kmax: u32) -> Result<()> {
    let (lo, _) = super::band_range(kmax);
    if kmax == 0 || lo > traj.grid().max_mode() {
        return Err(Error::InvalidConfig("kmax must be at least 1 and its band must meet the grid"));
    }
    Ok(())
}

/// `(sum_{k <= kmax} 2^{2sk} ||P_k u||_{F_k(T)}^2)^{1/2}` or the `N^s` analogue.
pub fn dyadic_norm(
    traj: &Trajectory,
    s: f64,
    t_max: f64,
    kmax: u32,
    params: &EquationParams,
    bumps: &BumpFamily,
    kind: NormKind,
) -> Result<NormReport> {
    check_kmax(traj, kmax)?;
    let j_cap = default_j_cap(kmax, traj.dt());
    let mut bands = Vec::new();
    let mut acc = 0.0;
    for k in 0..=kmax {
        let b = band_norm_upper(traj, k, t_max, params, bumps, kind, j_cap)?;
        acc += pow2(2 * k as i32).powf(s) * b.value * b.value;
        bands.push(b);
    }
    Ok(NormReport {
        kind,
        s,
        t_max,
        j_cap,
        bands,
        total: acc.sqrt(),
    })
}

pub fn fs_norm(
    traj: &Trajectory,
    s: f64,
    t_max: f64,
    kmax: u32,
    params: &EquationParams,
    bumps: &BumpFamily,
) -> Result<NormReport> {
    dyadic_norm(traj, s, t_max, kmax, params, bumps, NormKind::F)
}

pub fn ns_norm(
    traj: &Trajectory,
    s: f64,
    t_max: f64,
    kmax: u32,
    params: &EquationParams,
    bumps: &BumpFamily,
) -> Result<NormReport> {
    dyadic_norm(traj, s, t_max, kmax, params, bumps, NormKind::N)
}

/// `(||P_0 u(0)||^2 + sum_{1 <= k <= kmax} sup_{t <= T} 2^{2sk} ||P_k u(t)||^2)^{1/2}`.
pub fn es_norm(traj: &Trajectory, s: f64, t_max: f64, kmax: u32, bumps: &BumpFamily) -> Result<f64> {
    check_kmax(traj, kmax)?;
    let last = traj.nearest_index(t_max.min(traj.t_end()));
    let mut acc = super::project(traj.first(), 0, bumps).l2_norm_sq();
    for k in 1..=kmax {
        let sup = traj.states()[..=last]
            .iter()
            .map(|u| super::project(u, k, bumps).l2_norm_sq())
            .fold(0.0, f64::max);
        acc += pow2(2 * k as i32).powf(s) * sup;
    }
    Ok(acc.sqrt())
}

/// `sup_{t <= T} ||u(t)||_{H^s}` over the samples.
pub fn sup_hs(traj: &Trajectory, s: f64, t_max: f64) -> f64 {
    let last = traj.nearest_index(t_max.min(traj.t_end()));
    traj.states()[..=last]
        .iter()
        .map(|u| u.hs_norm(s))
        .fold(0.0, f64::max)
}
