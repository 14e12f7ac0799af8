//! Frequency-localized modified energy.
//!
//! For `k >= 1`
//!
//! ```text
//! E_k(u) = ||P_k u||^2
//!        + Re[ alpha kappa sum u^(n1) psi_k(n2) u^(n2)/n2 chi_k(n) u^(n)/n ]
//!        + Re[ beta  kappa sum u^(n1) chi_k(n2) u^(n2)/n2 chi_k(n) u^(n)/n ]
//! ```
//!
//! with sums over `n1 + n2 + n = 0`, `n n1 n2 != 0`. The factor `kappa` is the
//! convolution normalization of the cubic terms, the same one carried by the
//! nonlinearity the corrections are built to cancel.

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::dyadic::{band_range, project, BumpFamily};
use crate::spectral::{SpectralField, Trajectory};
use crate::{Error, Result, KAPPA};

/// Weights of the two cubic corrections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCoefficients {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for EnergyCoefficients {
    fn default() -> Self {
        Self { alpha: -4.0, beta: 6.0 }
    }
}

/// One band of the energy at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub t: f64,
    pub k: u32,
    /// `||P_k u||^2`
    pub quadratic: f64,
    /// The `alpha` (`psi_k`) correction after taking the real part.
    pub corr_ii: f64,
    /// The `beta` (`chi_k`) correction after taking the real part.
    pub corr_iii: f64,
    /// Imaginary parts discarded by the real part, relative to the absolute term sums.
    pub imag_ii: f64,
    pub imag_iii: f64,
}

impl EnergyRow {
    /// `E_k = quadratic + corr_ii + corr_iii`.
    pub fn total(&self) -> f64 {
        self.quadratic + self.corr_ii + self.corr_iii
    }
}

/// Rows of `E_k` over bands and times.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    pub rows: Vec<EnergyRow>,
}

impl EnergyLedger {
    /// `sup_t E_k` for each band present.
    pub fn sup_by_band(&self) -> Vec<(u32, f64)> {
        let mut out: Vec<(u32, f64)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(k, _)| *k == r.k) {
                Some((_, v)) => *v = v.max(r.total()),
                None => out.push((r.k, r.total())),
            }
        }
        out.sort_by_key(|p| p.0);
        out
    }

    /// Largest discarded imaginary part over all rows.
    pub fn max_imag(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.imag_ii).max(r.imag_iii))
    }
}

/// Frequencies of the grid where `chi_k` or `psi_k` is nonzero.
fn band_modes(u: &SpectralField, k: u32, bumps: &BumpFamily) -> Vec<(i64, f64, f64)> {
    let (lo, hi) = band_range(k);
    u.grid()
        .frequencies()
        .filter(|n| n.abs() >= lo && n.abs() <= hi && *n != 0)
        .map(|n| (n, bumps.chi(k, n as f64), bumps.psi(k, n as f64)))
        .filter(|&(_, c, p)| c != 0.0 || p != 0.0)
        .collect()
}

/// `E_k(u)` and its parts at time `t`.
pub fn localized_energy(
    u: &SpectralField,
    k: u32,
    coeffs: &EnergyCoefficients,
    bumps: &BumpFamily,
    t: f64,
) -> Result<EnergyRow> {
    if k == 0 {
        return Err(Error::EnergyBandZero);
    }
    let quadratic = project(u, k, bumps).l2_norm_sq();
    let modes = band_modes(u, k, bumps);
    let grid = u.grid();
    let mut ii = Complex64::new(0.0, 0.0);
    let mut iii = Complex64::new(0.0, 0.0);
    let (mut abs_ii, mut abs_iii) = (0.0, 0.0);
    for &(n, chi_n, _) in &modes {
        if chi_n == 0.0 {
            continue;
        }
        let outer = u.coeff(n) * (chi_n / n as f64);
        for &(n2, chi2, psi2) in &modes {
            let n1 = -n - n2;
            if n1 == 0 || !grid.contains(n1) {
                continue;
            }
            let base = u.coeff(n1) * u.coeff(n2) * outer / n2 as f64;
            let a = base * psi2;
            let b = base * chi2;
            ii += a;
            iii += b;
            abs_ii += a.norm();
            abs_iii += b.norm();
        }
    }
    let scale = KAPPA;
    let rel = |z: Complex64, m: f64| if m == 0.0 { 0.0 } else { z.im.abs() / m };
    Ok(EnergyRow {
        t,
        k,
        quadratic,
        corr_ii: coeffs.alpha * scale * ii.re,
        corr_iii: coeffs.beta * scale * iii.re,
        imag_ii: rel(ii, abs_ii),
        imag_iii: rel(iii, abs_iii),
    })
}

/// Largest band whose integer support meets the grid.
pub fn top_band(u: &SpectralField) -> u32 {
    let n = u.grid().max_mode();
    let mut k = 1;
    while band_range(k + 1).0 <= n {
        k += 1;
    }
    k
}

/// Indices of the samples with `t <= t_max`, every `stride`-th plus the last.
fn sample_indices(traj: &Trajectory, t_max: f64, stride: usize) -> Vec<usize> {
    let last = traj.nearest_index(t_max.min(traj.t_end()));
    let mut idx: Vec<usize> = (0..=last).step_by(stride.max(1)).collect();
    if idx.last() != Some(&last) {
        idx.push(last);
    }
    idx
}

/// `E_k` rows for `1 <= k <= kmax` at every `stride`-th sample up to `t_max`.
pub fn energy_ledger(
    traj: &Trajectory,
    t_max: f64,
    kmax: u32,
    coeffs: &EnergyCoefficients,
    bumps: &BumpFamily,
    stride: usize,
) -> Result<EnergyLedger> {
    let mut rows = Vec::new();
    for i in sample_indices(traj, t_max, stride) {
        for k in 1..=kmax {
            rows.push(localized_energy(traj.state(i), k, coeffs, bumps, traj.times()[i])?);
        }
    }
    Ok(EnergyLedger { rows })
}

/// `||P_0 u(0)||^2 + sum_{k=1}^{kmax} 2^{2sk} sup_t E_k(u)(t)` together with its ledger.
pub fn assembled_energy(
    traj: &Trajectory,
    s: f64,
    t_max: f64,
    kmax: u32,
    coeffs: &EnergyCoefficients,
    bumps: &BumpFamily,
    stride: usize,
) -> Result<(f64, EnergyLedger)> {
    if !(s >= 0.0) {
        return Err(Error::InvalidConfig("energy regularity must be nonnegative"));
    }
    let ledger = energy_ledger(traj, t_max, kmax, coeffs, bumps, stride)?;
    let mut total = project(traj.first(), 0, bumps).l2_norm_sq();
    for (k, sup) in ledger.sup_by_band() {
        total += f64::powf(2.0, 2.0 * s * k as f64) * sup;
    }
    Ok((total, ledger))
}

/// `||P_0 u(0)||^2 + sum_{k=1}^{kmax} 2^{2sk} sup_t ||P_k u(t)||^2` on the same samples.
pub fn energy_space_norm_sq(traj: &Trajectory, s: f64, t_max: f64, kmax: u32, bumps: &BumpFamily, stride: usize) -> f64 {
    let idx = sample_indices(traj, t_max, stride);
    let mut total = project(traj.first(), 0, bumps).l2_norm_sq();
    for k in 1..=kmax {
        let sup = idx
            .iter()
            .map(|&i| project(traj.state(i), k, bumps).l2_norm_sq())
            .fold(0.0, f64::max);
        total += f64::powf(2.0, 2.0 * s * k as f64) * sup;
    }
    total
}

/// Two-sided comparison of the modified energy with the energy-space norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparabilityReport {
    pub s: f64,
    pub delta: f64,
    pub sup_hs: f64,
    pub modified: f64,
    pub norm_sq: f64,
}

impl ComparabilityReport {
    /// `E^s_T / ||u||^2_{E^s}`.
    pub fn ratio(&self) -> f64 {
        if self.norm_sq == 0.0 {
            1.0
        } else {
            self.modified / self.norm_sq
        }
    }

    /// `norm/2 <= E^s_T <= 3 norm/2`.
    pub fn passed(&self) -> bool {
        0.5 * self.norm_sq <= self.modified && self.modified <= 1.5 * self.norm_sq
    }
}

/// Checks the comparability bounds; the trajectory must satisfy
/// `sup_t ||u(t)||_{H^s} <= delta`.
pub fn comparability_check(
    traj: &Trajectory,
    s: f64,
    t_max: f64,
    delta: f64,
    coeffs: &EnergyCoefficients,
    bumps: &BumpFamily,
    stride: usize,
) -> Result<ComparabilityReport> {
    let idx = sample_indices(traj, t_max, stride);
    let sup_hs = idx.iter().map(|&i| traj.state(i).hs_norm(s)).fold(0.0, f64::max);
    if sup_hs > delta * (1.0 + 1e-12) {
        return Err(Error::InvalidConfig("trajectory leaves the delta ball"));
    }
    let kmax = top_band(traj.first());
    let (modified, _) = assembled_energy(traj, s, t_max, kmax, coeffs, bumps, stride)?;
    Ok(ComparabilityReport {
        s,
        delta,
        sup_hs,
        modified,
        norm_sq: energy_space_norm_sq(traj, s, t_max, kmax, bumps, stride),
    })
}

/// Largest `delta` of a ladder at and below which every report passes.
pub fn comparability_threshold(reports: &[ComparabilityReport]) -> Option<f64> {
    let mut deltas: Vec<f64> = reports.iter().map(|r| r.delta).collect();
    deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    deltas.dedup();
    let mut best = None;
    for d in deltas {
        if reports.iter().filter(|r| r.delta == d).all(|r| r.passed()) {
            best = Some(d);
        } else {
            break;
        }
    }
    best
}

/// The exactly resonant slices `n_{2,2} = -n` and `n_{2,1} = -n` of the cubic
/// terms generated by the corrections, evaluated as complex sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantSlice {
    pub k: u32,
    /// `|Re[10 alpha i S_psi]|` and `|Re[10 beta i S_chi]|` relative to the sums of term moduli.
    pub alpha_part: f64,
    pub beta_part: f64,
}

/// Contribution of the resonant slices to the time derivative of `E_k`.
pub fn resonant_slice(u: &SpectralField, k: u32, coeffs: &EnergyCoefficients, bumps: &BumpFamily) -> Result<ResonantSlice> {
    if k == 0 {
        return Err(Error::EnergyBandZero);
    }
    let modes = band_modes(u, k, bumps);
    let grid = u.grid();
    let mut s_psi = Complex64::new(0.0, 0.0);
    let mut s_chi = Complex64::new(0.0, 0.0);
    let (mut m_psi, mut m_chi) = (0.0, 0.0);
    for &(n, chi_n, _) in &modes {
        if chi_n == 0.0 {
            continue;
        }
        let outer = u.coeff(n) * (chi_n / n as f64);
        for &(n2, chi2, psi2) in &modes {
            let n1 = -n - n2;
            if n1 == 0 || !grid.contains(n1) {
                continue;
            }
            // n2 = n21 + n22 with one of them equal to -n, the other to -n1
            for (n21, n22) in [(-n1, -n), (-n, -n1)] {
                let inner = u.coeff(n21) * u.coeff(n22) * (n22 * n22) as f64;
                let base = u.coeff(n1) * inner * outer;
                s_psi += base * psi2;
                s_chi += base * chi2;
                m_psi += (base * psi2).norm();
                m_chi += (base * chi2).norm();
            }
        }
    }
    let i = Complex64::new(0.0, 1.0);
    let rel = |z: Complex64, w: f64, m: f64| if m == 0.0 { 0.0 } else { (i * z * (10.0 * w)).re.abs() / (10.0 * w.abs() * m) };
    Ok(ResonantSlice {
        k,
        alpha_part: rel(s_psi, coeffs.alpha, m_psi),
        beta_part: rel(s_chi, coeffs.beta, m_chi),
    })
}

/// Maxima of the normalized commutator symbols on one band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorRow {
    pub k: u32,
    pub n1_limit: i64,
    /// `max |(chi_k(n) - chi_k(n2) - n1 chi_k'(n2)) n2^2 / n1^2|`
    pub taylor_max: f64,
    pub taylor_argmax: [i64; 3],
    /// `max |(chi_k(n) - chi_k(n2)) n2 / n1|`
    pub difference_max: f64,
    pub difference_argmax: [i64; 3],
}

/// Scan over `k in [1, kmax]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorScan {
    pub rows: Vec<CommutatorRow>,
}

impl CommutatorScan {
    pub fn row(&self, k: u32) -> Option<&CommutatorRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    /// Largest symbol value over all bands.
    pub fn constant(&self) -> f64 {
        self.rows
            .iter()
            .fold(0.0, |m, r| m.max(r.taylor_max).max(r.difference_max))
    }

    /// Relative change of both maxima between bands `a` and `b`.
    pub fn variation(&self, a: u32, b: u32) -> Option<f64> {
        let (ra, rb) = (self.row(a)?, self.row(b)?);
        let rel = |x: f64, y: f64| (x - y).abs() / x.max(y);
        Some(rel(ra.taylor_max, rb.taylor_max).max(rel(ra.difference_max, rb.difference_max)))
    }
}

/// Low frequencies `1 <= |n1| <= max(1, 2^{k - 10} * growth)` in the scan.
pub fn commutator_n1_limit(k: u32, growth: i64) -> i64 {
    let scaled = if k >= 10 { growth << (k - 10) } else { growth >> (10 - k) };
    scaled.max(1)
}

/// Evaluates both normalized symbols on all integer triples `n1 + n2 + n = 0`
/// with `1 <= |n1| <= commutator_n1_limit(k, growth)` and `n2` ranging over
/// the bands adjacent to `k`.
pub fn commutator_bound_scan(kmax: u32, growth: i64, bumps: &BumpFamily) -> CommutatorScan {
    let mut rows = Vec::new();
    for k in 1..=kmax {
        let limit = commutator_n1_limit(k, growth);
        let (lo, _) = band_range(k.saturating_sub(1).max(1));
        let (_, hi) = band_range(k + 1);
        let mut row = CommutatorRow {
            k,
            n1_limit: limit,
            taylor_max: 0.0,
            taylor_argmax: [0; 3],
            difference_max: 0.0,
            difference_argmax: [0; 3],
        };
        for n1 in (-limit..=limit).filter(|&m| m != 0) {
            for m2 in lo.max(1)..=hi {
                // the symbols are even under (n1, n2) -> (-n1, -n2), so n2 > 0 suffices
                let n2 = m2;
                let n = -n1 - n2;
                if n == 0 {
                    continue;
                }
                let (x, x2, h) = (n as f64, n2 as f64, n1 as f64);
                // chi_k is even, so chi_k(n) = chi_k(n2 + n1) is a Taylor step of length n1 from n2
                let taylor = ((bumps.chi(k, x) - bumps.chi(k, x2) - h * bumps.chi_d1(k, x2)) * x2 * x2 / (h * h)).abs();
                let difference = ((bumps.chi(k, x) - bumps.chi(k, x2)) * x2 / h).abs();
                if taylor > row.taylor_max {
                    row.taylor_max = taylor;
                    row.taylor_argmax = [n1, n2, n];
                }
                if difference > row.difference_max {
                    row.difference_max = difference;
                    row.difference_argmax = [n1, n2, n];
                }
            }
        }
        rows.push(row);
    }
    CommutatorScan { rows }
}
