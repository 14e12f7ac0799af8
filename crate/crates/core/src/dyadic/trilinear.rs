//! The trilinear functional
//!
//! ```text
//! J(f1, f2, f3) = sum_{n1 + n2 + n3 = 0} int_{z1 + z2 + z3 = -G(n1, n2)} f1(z1, n1) f2(z2, n2) f3(z3, n3)
//! ```
//!
//! on nonnegative pieces localized to `|n| ~ 2^k`, `|z| ~ 2^j` (modulation
//! coordinates `z = tau - mu(n)`), and a randomized check of the block bounds.
//!
//! A piece is piecewise constant on four modulation cells per frequency, so
//! `J` is a finite sum of exact triple box convolutions. The resonance shift is
//! handled in integer arithmetic; only the fractional part of `c1` enters as a
//! float.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;

use super::band_range;
use crate::equation::EquationParams;
use crate::resonance::{minus_g_split, modulation_feasible};
use crate::{Error, Result};

/// The four cells covering the modulation band `j`, as integer intervals.
///
/// `j = 0`: `[-2, -1], [-1, 0], [0, 1], [1, 2]`; `j >= 1`:
/// `[-2^{j+1}, -2^j], [-2^j, -2^{j-1}], [2^{j-1}, 2^j], [2^j, 2^{j+1}]`.
pub fn modulation_cells(j: u32) -> [(i128, i128); 4] {
    if j == 0 {
        [(-2, -1), (-1, 0), (0, 1), (1, 2)]
    } else {
        let a = 1i128 << (j - 1);
        [(-4 * a, -2 * a), (-2 * a, -a), (a, 2 * a), (2 * a, 4 * a)]
    }
}

/// A nonnegative function of `(z, n)` that is constant on each modulation cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPiece {
    k: u32,
    j: u32,
    modes: Vec<i64>,
    values: Vec<[f64; 4]>,
}

impl DyadicPiece {
    /// Modes must be distinct and inside the integer band `k`; values must be
    /// finite and nonnegative.
    pub fn new(k: u32, j: u32, modes: Vec<i64>, values: Vec<[f64; 4]>) -> Result<Self> {
        if modes.len() != values.len() {
            return Err(Error::SizeMismatch {
                expected: modes.len(),
                got: values.len(),
            });
        }
        let (lo, hi) = band_range(k);
        if modes.iter().any(|n| n.abs() < lo.max(1) || n.abs() > hi) {
            return Err(Error::InvalidConfig("piece mode outside its frequency band"));
        }
        if values.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidConfig("piece values must be finite and nonnegative"));
        }
        let mut pairs: Vec<(i64, [f64; 4])> = modes.into_iter().zip(values).collect();
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidConfig("piece modes must be distinct"));
        }
        let (modes, values) = pairs.into_iter().unzip();
        Ok(Self { k, j, modes, values })
    }

    /// Unit value on a single cell of a single mode.
    pub fn atom(k: u32, j: u32, n: i64, cell: usize) -> Result<Self> {
        let mut v = [0.0; 4];
        v[cell.min(3)] = 1.0;
        Self::new(k, j, vec![n], vec![v])
    }

    /// Random piece on the window of `width` consecutive frequencies of the
    /// band starting at `center - width / 2` (sign of `center`). Sparse pieces
    /// switch each mode and each cell off with probability one half.
    pub fn random<R: Rng + ?Sized>(k: u32, j: u32, center: i64, width: usize, sparse: bool, rng: &mut R) -> Self {
        let (lo, hi) = band_range(k);
        let lo = lo.max(1);
        let sign = if center < 0 { -1 } else { 1 };
        let c = center.abs();
        let start = (c - width as i64 / 2).max(lo);
        let end = (start + width as i64 - 1).min(hi);
        let mut modes = Vec::new();
        let mut values = Vec::new();
        for m in start..=end {
            if sparse && rng.gen_bool(0.5) && m != c {
                continue;
            }
            let mut v = [0.0; 4];
            for x in v.iter_mut() {
                if !sparse || rng.gen_bool(0.5) {
                    *x = rng.gen::<f64>();
                }
            }
            modes.push(sign * m);
            values.push(v);
        }
        Self::new(k, j, modes, values).expect("window lies inside the band")
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn modes(&self) -> &[i64] {
        &self.modes
    }

    pub fn values(&self) -> &[[f64; 4]] {
        &self.values
    }

    /// Mass outside the modulation band; zero by construction for cell pieces.
    pub fn leakage(&self) -> f64 {
        0.0
    }

    fn value_at(&self, n: i64) -> Option<&[f64; 4]> {
        self.modes.binary_search(&n).ok().map(|i| &self.values[i])
    }

    /// `||f||_{L^2_z l^2_n}`.
    pub fn l2_norm(&self) -> f64 {
        let cells = modulation_cells(self.j);
        self.values
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&cells)
                    .map(|(x, (a, b))| x * x * (b - a) as f64)
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `f(-z, -n)`.
    pub fn reflected(&self) -> Self {
        let modes = self.modes.iter().map(|n| -n).collect();
        let values = self.values.iter().map(|v| [v[3], v[2], v[1], v[0]]).collect();
        Self::new(self.k, self.j, modes, values).expect("reflection preserves the band")
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v.map(|x| x * a.abs())).collect(),
            ..self.clone()
        }
    }
}

/// Antiderivative of the convolution of indicators of `[0, wa]` and `[0, wb]`, `wa <= wb`.
fn trapezoid_primitive(u: f64, wa: f64, wb: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u <= wa {
        0.5 * u * u
    } else if u <= wb {
        0.5 * wa * wa + wa * (u - wa)
    } else if u < wa + wb {
        let r = wa + wb - u;
        wa * wb - 0.5 * r * r
    } else {
        wa * wb
    }
}

/// Density at `y` of `z1 + z2 + z3` for `z_i` uniform on `[0, w_i]`, times `w1 w2 w3`;
/// that is, the triple convolution of the three indicators.
pub fn box3(y: f64, widths: [f64; 3]) -> f64 {
    let mut w = widths;
    w.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total = w[0] + w[1] + w[2];
    if !(y > 0.0 && y < total) {
        return 0.0;
    }
    let d = y.min(total - y);
    let lo = (d - w[2]).max(0.0);
    let hi = d.min(w[0] + w[1]);
    (trapezoid_primitive(hi, w[0], w[1]) - trapezoid_primitive(lo, w[0], w[1])).max(0.0)
}

/// [`box3`] at `x = int + frac` for cells `[lo_i, hi_i]`, without forming large floats.
fn box3_cells(int: i128, frac: f64, cells: [(i128, i128); 3]) -> f64 {
    let lo: i128 = cells.iter().map(|c| c.0).sum();
    let hi: i128 = cells.iter().map(|c| c.1).sum();
    let total = hi - lo;
    let yi = int - lo;
    if yi < 0 || yi > total || (yi == total && frac > 0.0) {
        return 0.0;
    }
    let widths = cells.map(|(a, b)| (b - a) as f64);
    // distance to the nearer end of the support, which the density is symmetric about
    let d = if 2 * yi < total {
        yi as f64 + frac
    } else {
        (total - yi) as f64 - frac
    };
    box3(d, widths)
}

/// Exact evaluation of `J(f1, f2, f3)` for the resonance function of `params`.
pub fn j_functional(f1: &DyadicPiece, f2: &DyadicPiece, f3: &DyadicPiece, params: &EquationParams) -> f64 {
    let c1 = modulation_cells(f1.j);
    let c2 = modulation_cells(f2.j);
    let c3 = modulation_cells(f3.j);
    let lo: i128 = c1[0].0 + c2[0].0 + c3[0].0;
    let hi: i128 = c1[3].1 + c2[3].1 + c3[3].1;
    let mut acc = 0.0;
    for (&n1, v1) in f1.modes.iter().zip(&f1.values) {
        for (&n2, v2) in f2.modes.iter().zip(&f2.values) {
            let n3 = -(n1 + n2);
            if n3 == 0 {
                continue;
            }
            let Some(v3) = f3.value_at(n3) else { continue };
            let (gi, gf) = minus_g_split(n1, n2, params);
            if gi < lo - 1 || gi > hi {
                continue;
            }
            for (a, x1) in v1.iter().enumerate() {
                if *x1 == 0.0 {
                    continue;
                }
                for (b, x2) in v2.iter().enumerate() {
                    if *x2 == 0.0 {
                        continue;
                    }
                    for (c, x3) in v3.iter().enumerate() {
                        if *x3 == 0.0 {
                            continue;
                        }
                        let m = box3_cells(gi, gf, [c1[a], c2[b], c3[c]]);
                        if m > 0.0 {
                            acc += x1 * x2 * x3 * m;
                        }
                    }
                }
            }
        }
    }
    acc
}

/// The seven block regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockCase {
    A1,
    A2,
    B1,
    B2,
    B3,
    B4,
    C,
}

fn sorted(v: [u32; 3]) -> [u32; 3] {
    let mut s = v;
    s.sort_unstable();
    s
}

impl BlockCase {
    pub const ALL: [BlockCase; 7] = [
        BlockCase::A1,
        BlockCase::A2,
        BlockCase::B1,
        BlockCase::B2,
        BlockCase::B3,
        BlockCase::B4,
        BlockCase::C,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BlockCase::A1 => "a1",
            BlockCase::A2 => "a2",
            BlockCase::B1 => "b1",
            BlockCase::B2 => "b2",
            BlockCase::B3 => "b3",
            BlockCase::B4 => "b4",
            BlockCase::C => "c",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name().eq_ignore_ascii_case(s))
    }

    /// Checks the hypotheses of the case for the frequency and modulation indices.
    pub fn precondition(self, k: [u32; 3], j: [u32; 3]) -> Result<()> {
        let ks = sorted(k);
        let js = sorted(j);
        let (kmin, kmax) = (ks[0], ks[2]);
        let (jmed, jmax) = (js[1], js[2]);
        // some piece carries both the lowest frequency and the highest modulation
        let low_high = (0..3).any(|i| k[i] == kmin && j[i] == jmax);
        let fail = |reason| Err(Error::CasePrecondition { case: self.name(), reason });
        match self {
            BlockCase::A1 | BlockCase::A2 => {
                if kmax - kmin > 5 {
                    return fail("requires k_max - k_min <= 5");
                }
                let low = jmed <= 3 * kmax;
                if self == BlockCase::A1 && !low {
                    return fail("requires j_med <= 3 k_max");
                }
                if self == BlockCase::A2 && low {
                    return fail("requires j_med > 3 k_max");
                }
            }
            BlockCase::B1 | BlockCase::B2 | BlockCase::B3 | BlockCase::B4 => {
                if kmin + 10 > kmax {
                    return fail("requires k_min <= k_max - 10");
                }
                let first = matches!(self, BlockCase::B1 | BlockCase::B2);
                if first && !low_high {
                    return fail("requires the k_min piece to carry j_max");
                }
                if !first && low_high {
                    return fail("requires the k_min piece not to carry j_max");
                }
                match self {
                    BlockCase::B1 if jmed > 3 * kmax + kmin => return fail("requires j_med <= 3 k_max + k_min"),
                    BlockCase::B2 if jmed <= 3 * kmax + kmin => return fail("requires j_med > 3 k_max + k_min"),
                    BlockCase::B3 if jmed > 4 * kmax => return fail("requires j_med <= 4 k_max"),
                    BlockCase::B4 if jmed <= 4 * kmax => return fail("requires j_med > 4 k_max"),
                    _ => {}
                }
            }
            BlockCase::C => {}
        }
        Ok(())
    }

    /// Cases whose hypotheses hold.
    pub fn applicable(k: [u32; 3], j: [u32; 3]) -> Vec<BlockCase> {
        Self::ALL
            .iter()
            .copied()
            .filter(|c| c.precondition(k, j).is_ok())
            .collect()
    }

    /// `log2` of the bound's dyadic factor.
    pub fn bound_log2(self, k: [u32; 3], j: [u32; 3]) -> f64 {
        let ks = sorted(k).map(f64::from);
        let js = sorted(j).map(f64::from);
        let (kmin, kmax) = (ks[0], ks[2]);
        let (jmin, jmed, jmax) = (js[0], js[1], js[2]);
        let sum = jmin + jmed + jmax;
        match self {
            BlockCase::A1 | BlockCase::B1 | BlockCase::B3 => sum / 2.0 - (jmed + jmax) / 2.0,
            BlockCase::A2 => jmin / 2.0 + jmed / 4.0 - 0.75 * kmax,
            BlockCase::B2 => sum / 2.0 - 1.5 * kmax - kmin / 2.0 - jmax / 2.0,
            BlockCase::B4 => sum / 2.0 - 2.0 * kmax - jmax / 2.0,
            BlockCase::C => jmin / 2.0 + kmin / 2.0,
        }
    }

    pub fn bound(self, k: [u32; 3], j: [u32; 3]) -> f64 {
        f64::powf(2.0, self.bound_log2(k, j))
    }
}

/// A frequency pair inside the bands together with its `-G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub n: [i64; 3],
    pub minus_g: f64,
}

fn signed_band(k: u32) -> Vec<i64> {
    let (lo, hi) = band_range(k);
    let lo = lo.max(1);
    (lo..=hi).flat_map(|m| [m, -m]).collect()
}

/// All `(n1, n2, n3)` with `n_i` in band `k_i`, `n1 + n2 + n3 = 0`, sorted by `|G|`.
pub fn frequency_seeds(k: [u32; 3], params: &EquationParams) -> Vec<Seed> {
    let (lo3, hi3) = band_range(k[2]);
    let mut out = Vec::new();
    for &n1 in &signed_band(k[0]) {
        for &n2 in &signed_band(k[1]) {
            let n3 = -(n1 + n2);
            if n3 == 0 || n3.abs() < lo3 || n3.abs() > hi3 {
                continue;
            }
            let (i, f) = minus_g_split(n1, n2, params);
            out.push(Seed {
                n: [n1, n2, n3],
                minus_g: i as f64 + f,
            });
        }
    }
    out.sort_by(|a, b| a.minus_g.abs().partial_cmp(&b.minus_g.abs()).unwrap());
    out
}

/// Seeds whose `-G` is reachable by the modulation supports `j`.
pub fn feasible_seeds(seeds: &[Seed], j: [u32; 3]) -> Vec<Seed> {
    let reach: f64 = j.iter().map(|&ji| f64::powi(2.0, ji as i32 + 1)).sum();
    let end = seeds.partition_point(|s| s.minus_g.abs() < reach);
    seeds[..end]
        .iter()
        .filter(|s| modulation_feasible(j, s.minus_g))
        .copied()
        .collect()
}

/// Whether any seed is feasible, stopping at the first.
pub fn any_feasible(seeds: &[Seed], j: [u32; 3]) -> bool {
    let reach: f64 = j.iter().map(|&ji| f64::powi(2.0, ji as i32 + 1)).sum();
    let end = seeds.partition_point(|s| s.minus_g.abs() < reach);
    seeds[..end].iter().any(|s| modulation_feasible(j, s.minus_g))
}

/// Randomized trial parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub trials: usize,
    /// Frequency window of the first two pieces; the third uses twice this.
    pub width: usize,
    /// A trial passes iff `J <= cap * bound * prod ||f_i||`.
    pub cap: f64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            width: 8,
            cap: 10.0,
        }
    }
}

/// Worst trial of one case on one `(k, j)` combination.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub case: BlockCase,
    pub k: [u32; 3],
    pub j: [u32; 3],
    pub trials: usize,
    /// Trials with `J > 0`.
    pub nonzero: usize,
    pub worst_ratio: f64,
    /// Seed triple of the worst trial.
    pub argmax: [i64; 3],
    pub cap: f64,
}

impl BlockReport {
    pub fn passed(&self) -> bool {
        self.worst_ratio <= self.cap
    }

    /// No frequency triple in the bands can meet the modulation supports.
    pub fn vacuous(&self) -> bool {
        self.nonzero == 0
    }
}

/// Runs `cfg.trials` random trials on `(k, j)` and reports every case in `cases`.
///
/// Each trial draws a feasible seed, puts random nonnegative pieces on
/// frequency windows around it and compares `J` against each bound.
pub fn verify_cases<R: Rng + ?Sized>(
    cases: &[BlockCase],
    k: [u32; 3],
    j: [u32; 3],
    seeds: &[Seed],
    cfg: &TrialConfig,
    params: &EquationParams,
    rng: &mut R,
) -> Result<Vec<BlockReport>> {
    for c in cases {
        c.precondition(k, j)?;
    }
    let mut reports: Vec<BlockReport> = cases
        .iter()
        .map(|&case| BlockReport {
            case,
            k,
            j,
            trials: cfg.trials,
            nonzero: 0,
            worst_ratio: 0.0,
            argmax: [0; 3],
            cap: cfg.cap,
        })
        .collect();
    let feasible = feasible_seeds(seeds, j);
    if feasible.is_empty() {
        return Ok(reports);
    }
    let bounds: Vec<f64> = cases.iter().map(|c| c.bound(k, j)).collect();
    for t in 0..cfg.trials {
        let seed = feasible[rng.gen_range(0..feasible.len())];
        let sparse = t % 2 == 1;
        let f1 = DyadicPiece::random(k[0], j[0], seed.n[0], cfg.width, sparse, rng);
        let f2 = DyadicPiece::random(k[1], j[1], seed.n[1], cfg.width, sparse, rng);
        let f3 = DyadicPiece::random(k[2], j[2], seed.n[2], 2 * cfg.width, sparse, rng);
        let norms = f1.l2_norm() * f2.l2_norm() * f3.l2_norm();
        if norms == 0.0 {
            continue;
        }
        let value = j_functional(&f1, &f2, &f3, params);
        if value <= 0.0 {
            continue;
        }
        for (r, b) in reports.iter_mut().zip(&bounds) {
            r.nonzero += 1;
            let ratio = value / (b * norms);
            if ratio > r.worst_ratio {
                r.worst_ratio = ratio;
                r.argmax = seed.n;
            }
        }
    }
    Ok(reports)
}

/// Single-case verification; computes the frequency seeds itself.
pub fn block_estimate_verify<R: Rng + ?Sized>(
    case: BlockCase,
    k: [u32; 3],
    j: [u32; 3],
    cfg: &TrialConfig,
    params: &EquationParams,
    rng: &mut R,
) -> Result<BlockReport> {
    case.precondition(k, j)?;
    let seeds = frequency_seeds(k, params);
    Ok(verify_cases(&[case], k, j, &seeds, cfg, params, rng)?.remove(0))
}

/// Modulation indices probed for frequency indices `k`: zero, the case
/// thresholds `3 k_max`, `3 k_max + k_min`, `4 k_max` and their successors, and
/// the resonance scale `log2 |G|` of the bands with its neighbors.
pub fn modulation_ladder(k: [u32; 3], seeds: &[Seed]) -> Vec<u32> {
    let ks = sorted(k);
    let (kmin, kmax) = (ks[0], ks[2]);
    let mut l = vec![0, 2 * kmax, 3 * kmax, 3 * kmax + 1, 3 * kmax + kmin + 1, 4 * kmax, 4 * kmax + 1];
    if let Some(s) = seeds.iter().find(|s| s.minus_g.abs() >= 1.0) {
        let jg = s.minus_g.abs().log2().floor() as u32;
        l.extend([jg.saturating_sub(1), jg, jg + 1, jg + 3]);
    }
    l.sort_unstable();
    l.dedup();
    l
}

/// Frequency triples `k1 <= k2 <= k3 <= kmax` (at least one equal to `kmax`
/// when `top_only`) admitting a frequency triple.
pub fn frequency_triples(kmax: u32, top_only: bool) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for k3 in 0..=kmax {
        if top_only && k3 != kmax {
            continue;
        }
        for k2 in 0..=k3 {
            for k1 in 0..=k2 {
                let (_, h1) = band_range(k1);
                let (l2, h2) = band_range(k2);
                let (l3, h3) = band_range(k3);
                // |n1 + n2| sweeps the integers from max(0, l2 - h1) to h1 + h2
                if h1 + h2 >= l3.max(1) && (l2 - h1).max(0) <= h3 {
                    out.push([k1, k2, k3]);
                }
            }
        }
    }
    out
}

/// One `(k, j)` combination of a sweep with its applicable cases.
#[derive(Debug, Clone, PartialEq)]
pub struct Combo {
    pub k: [u32; 3],
    pub j: [u32; 3],
    pub cases: Vec<BlockCase>,
}

/// Frequency seeds of one triple with its non-vacuous combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGroup {
    pub k: [u32; 3],
    pub seeds: Vec<Seed>,
    pub combos: Vec<Combo>,
}

/// Non-vacuous combinations over the modulation ladder of each frequency
/// triple, restricted to the cases accepted by `filter`.
pub fn sweep_combos(ks: &[[u32; 3]], params: &EquationParams, filter: impl Fn(BlockCase) -> bool) -> Vec<SweepGroup> {
    let mut out = Vec::new();
    for &k in ks {
        let seeds = frequency_seeds(k, params);
        if seeds.is_empty() {
            continue;
        }
        let ladder = modulation_ladder(k, &seeds);
        let mut combos = Vec::new();
        for &a in &ladder {
            for &b in &ladder {
                for &c in &ladder {
                    let j = [a, b, c];
                    let cases: Vec<BlockCase> = BlockCase::applicable(k, j).into_iter().filter(|c| filter(*c)).collect();
                    if !cases.is_empty() && any_feasible(&seeds, j) {
                        combos.push(Combo { k, j, cases });
                    }
                }
            }
        }
        if !combos.is_empty() {
            out.push(SweepGroup { k, seeds, combos });
        }
    }
    out
}

/// Per-case worst ratio across a set of reports.
pub fn worst_by_case(reports: &[BlockReport]) -> Vec<BlockReport> {
    let mut out: Vec<BlockReport> = Vec::new();
    for r in reports {
        match out.iter_mut().find(|o| o.case == r.case) {
            Some(o) if r.worst_ratio > o.worst_ratio => *o = r.clone(),
            Some(_) => {}
            None => out.push(r.clone()),
        }
    }
    out.sort_by_key(|r| r.case);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::Coefficients;
    use rand::SeedableRng;

    fn params() -> EquationParams {
        EquationParams::with_constants(Coefficients::INTEGRABLE, 0.05, 0.3).unwrap()
    }

    #[test]
    fn box3_matches_riemann_sum() {
        let widths = [1.0, 2.5, 4.0];
        for &y in &[0.3, 1.2, 2.9, 3.75, 5.0, 7.2] {
            let m = 400;
            let h = widths[0] / m as f64;
            let h2 = widths[1] / m as f64;
            let mut acc = 0.0;
            for a in 0..m {
                for b in 0..m {
                    let z = y - (a as f64 + 0.5) * h - (b as f64 + 0.5) * h2;
                    if z > 0.0 && z < widths[2] {
                        acc += h * h2;
                    }
                }
            }
            assert!((box3(y, widths) - acc).abs() < 2e-2, "{y}");
        }
        assert_eq!(box3(-0.1, widths), 0.0);
        assert_eq!(box3(7.6, widths), 0.0);
        let total: f64 = (0..7500).map(|i| box3((i as f64 + 0.5) * 1e-3, widths) * 1e-3).sum();
        assert!((total - 10.0).abs() < 1e-5);
    }

    #[test]
    fn single_atom_by_hand() {
        let p = EquationParams::raw(Coefficients::INTEGRABLE);
        // G(1, 1) = 1 + 1 - 32, so the modulations must sum to 30:
        // z1, z2 in [0, 1] and z3 in [16, 32] leaves the full unit square
        let f1 = DyadicPiece::atom(0, 0, 1, 2).unwrap();
        let f2 = DyadicPiece::atom(0, 0, 1, 2).unwrap();
        let f3 = DyadicPiece::atom(1, 5, -2, 2).unwrap();
        assert!((j_functional(&f1, &f2, &f3, &p) - 1.0).abs() < 1e-12);
        // z3 in [32, 64] cannot reach 28..30
        let g3 = DyadicPiece::atom(1, 5, -2, 3).unwrap();
        assert_eq!(j_functional(&f1, &f2, &g3, &p), 0.0);
        assert!((f3.l2_norm() - 4.0).abs() < 1e-15);
    }

    fn brute_force(f: [&DyadicPiece; 3], params: &EquationParams) -> f64 {
        let cells: Vec<_> = f.iter().map(|p| modulation_cells(p.j())).collect();
        let mut acc = 0.0;
        for (&n1, v1) in f[0].modes().iter().zip(f[0].values()) {
            for (&n2, v2) in f[1].modes().iter().zip(f[1].values()) {
                let n3 = -(n1 + n2);
                let Some(i3) = f[2].modes().iter().position(|&m| m == n3) else { continue };
                let v3 = f[2].values()[i3];
                let x = -crate::resonance::g_function(n1, n2, params);
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..4 {
                            let lo = (cells[0][a].0 + cells[1][b].0 + cells[2][c].0) as f64;
                            let w = [0, 1, 2].map(|i| {
                                let cc = cells[i][[a, b, c][i]];
                                (cc.1 - cc.0) as f64
                            });
                            acc += v1[a] * v2[b] * v3[c] * box3(x - lo, w);
                        }
                    }
                }
            }
        }
        acc
    }

    #[test]
    fn symmetries_and_oracle_on_random_pieces() {
        let p = params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let k = [3, 3, 4];
        let seeds = frequency_seeds(k, &p);
        let jg = seeds[0].minus_g.abs().log2().floor() as u32;
        for j in [[0, 1, jg + 1], [jg, jg - 1, 2], [jg - 2, jg, jg]] {
            let feas = feasible_seeds(&seeds, j);
            assert!(!feas.is_empty(), "{j:?}");
            for t in 0..6 {
                let s = feas[t * feas.len() / 6];
                let f1 = DyadicPiece::random(k[0], j[0], s.n[0], 6, t % 2 == 0, &mut rng);
                let f2 = DyadicPiece::random(k[1], j[1], s.n[1], 6, false, &mut rng);
                let f3 = DyadicPiece::random(k[2], j[2], s.n[2], 12, false, &mut rng);
                let v = j_functional(&f1, &f2, &f3, &p);
                let tol = 1e-9 * v.max(1.0);
                assert!((v - brute_force([&f1, &f2, &f3], &p)).abs() < tol);
                assert!((v - j_functional(&f2, &f1, &f3, &p)).abs() < tol);
                assert!((v - j_functional(&f3, &f2, &f1, &p)).abs() < tol);
                let r = j_functional(&f1.reflected(), &f2.reflected(), &f3.reflected(), &p);
                assert!((v - r).abs() < tol);
                let s3 = j_functional(&f1.scaled(2.0), &f2, &f3.scaled(0.5), &p);
                assert!((v - s3).abs() < tol);
            }
        }
    }

    #[test]
    fn vanishes_without_frequency_compatibility() {
        let p = params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let f1 = DyadicPiece::random(1, 40, 2, 4, false, &mut rng);
        let f2 = DyadicPiece::random(1, 40, 3, 4, false, &mut rng);
        let f3 = DyadicPiece::random(8, 40, -300, 64, false, &mut rng);
        assert!(f1.l2_norm() > 0.0 && f3.l2_norm() > 0.0);
        assert_eq!(j_functional(&f1, &f2, &f3, &p), 0.0);
        assert!(frequency_seeds([1, 1, 8], &p).is_empty());
        assert!(!frequency_triples(8, true).contains(&[1, 1, 8]));
        assert!(frequency_triples(8, true).contains(&[0, 8, 8]));
    }

    #[test]
    fn case_preconditions() {
        assert!(BlockCase::A1.precondition([4, 5, 6], [0, 3, 40]).is_ok());
        assert!(BlockCase::A2.precondition([4, 5, 6], [0, 3, 40]).is_err());
        assert!(BlockCase::A2.precondition([4, 5, 6], [0, 19, 40]).is_ok());
        assert!(BlockCase::A1.precondition([0, 7, 8], [0, 0, 0]).is_err());
        assert!(BlockCase::B1.precondition([0, 6, 8], [0, 0, 0]).is_err());
        assert!(BlockCase::B1.precondition([0, 10, 10], [40, 2, 30]).is_ok());
        assert!(BlockCase::B2.precondition([0, 10, 10], [40, 31, 30]).is_ok());
        assert!(BlockCase::B3.precondition([0, 10, 10], [5, 40, 30]).is_ok());
        assert!(BlockCase::B4.precondition([0, 10, 10], [5, 41, 42]).is_ok());
        assert_eq!(
            BlockCase::B1.precondition([0, 10, 10], [5, 40, 30]).unwrap_err(),
            Error::CasePrecondition {
                case: "b1",
                reason: "requires the k_min piece to carry j_max"
            }
        );
        assert!(BlockCase::C.precondition([0, 0, 0], [0, 0, 0]).is_ok());
        assert_eq!(BlockCase::from_name("B3"), Some(BlockCase::B3));
        assert!((BlockCase::A1.bound_log2([3, 3, 3], [2, 8, 10]) - 1.0).abs() < 1e-15);
        assert!((BlockCase::C.bound_log2([2, 3, 3], [2, 8, 10]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn small_randomized_verification() {
        let p = params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let cfg = TrialConfig {
            trials: 20,
            ..TrialConfig::default()
        };
        let k = [2, 3, 3];
        let seeds = frequency_seeds(k, &p);
        let jg = modulation_ladder(k, &seeds);
        assert!(jg.contains(&0) && jg.contains(&9));
        let j = [jg[jg.len() - 1], 0, 0];
        let r = block_estimate_verify(BlockCase::C, k, j, &cfg, &p, &mut rng).unwrap();
        assert!(r.nonzero > 0);
        assert!(r.passed(), "{r:?}");
        assert!(block_estimate_verify(BlockCase::B1, k, j, &cfg, &p, &mut rng).is_err());
    }
}
