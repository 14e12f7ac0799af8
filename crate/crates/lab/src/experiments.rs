//! Experiments shared by the subcommands and the acceptance suite.
//!
//! Each routine returns plain rows; writing them out is left to the caller.
//! Random streams are derived from one root seed and the position of the item
//! in the experiment, so results do not depend on the thread count.

use kdv5::counterexample::{self, Branch, RatioScan};
use kdv5::dyadic::spectrum::{fs_norm, sup_hs};
use kdv5::dyadic::trilinear::{sweep_combos, verify_cases, BlockCase, BlockReport, TrialConfig};
use kdv5::dyadic::BumpFamily;
use kdv5::energy::{comparability_check, ComparabilityReport, EnergyCoefficients};
use kdv5::equation::{rhs_raw, rhs_renormalized, Coefficients, EquationParams};
use kdv5::gauge::{apply_nt, apply_nt_inverse, bicontinuity_experiment, linear_phase_shift};
use kdv5::integrator::{evolve, evolve_final, two_solution_divergence, ConservationReport, SolverConfig};
use kdv5::random::{level_set_perturbation, random_hs_field, RandomFieldSpec};
use kdv5::spectral::{SpectralField, TorusGrid, Trajectory};
use kdv5::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::LabResult;

/// Mixes `parts` into `base` with the splitmix64 finalizer.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(p);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

pub fn rng(base: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, parts))
}

fn max_abs_diff(a: &SpectralField, b: &SpectralField) -> LabResult<f64> {
    Ok(a.sub(b)?.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max))
}

fn max_abs(a: &SpectralField) -> f64 {
    a.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationRow {
    pub t: f64,
    pub mass: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "H3")]
    pub h3: f64,
    #[serde(rename = "driftM")]
    pub drift_mass: f64,
    #[serde(rename = "driftE")]
    pub drift_energy: f64,
    #[serde(rename = "driftH3")]
    pub drift_h3: f64,
}

pub fn conservation_rows(report: &ConservationReport) -> Vec<ConservationRow> {
    let (dm, de, dh) = (report.drift_mass(), report.drift_energy(), report.drift_h3());
    (0..report.times.len())
        .map(|i| ConservationRow {
            t: report.times[i],
            mass: report.mass[i],
            energy: report.energy[i],
            h3: report.h3[i],
            drift_mass: dm[i],
            drift_energy: de[i],
            drift_h3: dh[i],
        })
        .collect()
}

/// Index and value of the largest entry.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> (usize, f64) {
    values
        .into_iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
}

/// Worst relative gap `max |raw - split| / max |raw|` between the raw field
/// and the reassembled renormalized split over `count` random fields.
pub fn rhs_consistency(grid: TorusGrid, coeffs: Coefficients, count: usize, seed: u64) -> LabResult<f64> {
    let spec = RandomFieldSpec {
        max_mode: grid.modes(),
        decay: 1.0,
        zero_mean: false,
    };
    let mut worst = 0.0f64;
    for i in 0..count {
        let mut r = rng(seed, &[i as u64]);
        let radius = 0.1 * (1 + i % 10) as f64;
        let u = random_hs_field(grid, &spec, 1.0, radius, &mut r)?;
        let params = EquationParams::renormalized(coeffs, &u)?;
        let raw = rhs_raw(&u, &params)?;
        let split = rhs_renormalized(&u, &params)?.total()?;
        worst = worst.max(max_abs_diff(&raw, &split)? / max_abs(&raw));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderCheck {
    pub dt: f64,
    pub error_coarse: f64,
    pub error_fine: f64,
    pub ratio: f64,
}

/// Successive differences of runs with `dt`, `dt/2` and `dt/4`.
pub fn order_check(u0: &SpectralField, params: &EquationParams, base: &SolverConfig) -> LabResult<OrderCheck> {
    let run = |k: f64| -> LabResult<SpectralField> {
        let cfg = SolverConfig {
            dt: base.dt / k,
            ..*base
        };
        Ok(evolve_final(u0, params, &cfg)?)
    };
    let (a, b, c) = (run(1.0)?, run(2.0)?, run(4.0)?);
    let error_coarse = max_abs_diff(&a, &b)?;
    let error_fine = max_abs_diff(&b, &c)?;
    Ok(OrderCheck {
        dt: base.dt,
        error_coarse,
        error_fine,
        ratio: error_coarse / error_fine,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeCheck {
    /// `max | |NT(u)^(t, n)| - |u^(t, n)| |`
    pub modulus_defect: f64,
    /// `max |NT^{-1}(NT(u)) - u|`
    pub round_trip: f64,
    /// `max |NT(u)(t) - e^{-i c2 n t} u(t)|`
    pub phase_defect: f64,
}

pub fn gauge_check(traj: &Trajectory, params: &EquationParams) -> LabResult<GaugeCheck> {
    let (g, phase) = apply_nt(traj)?;
    let back = apply_nt_inverse(&g, &phase)?;
    let mut out = GaugeCheck {
        modulus_defect: 0.0,
        round_trip: 0.0,
        phase_defect: 0.0,
    };
    for ((u, v), (w, &t)) in traj.states().iter().zip(g.states()).zip(back.states().iter().zip(traj.times())) {
        for (a, b) in u.coeffs().iter().zip(v.coeffs()) {
            out.modulus_defect = out.modulus_defect.max((a.norm() - b.norm()).abs());
        }
        out.round_trip = out.round_trip.max(max_abs_diff(u, w)?);
        let closed = linear_phase_shift(u, params.c2(), t)?;
        out.phase_defect = out.phase_defect.max(max_abs_diff(v, &closed)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub eps: f64,
    pub initial: f64,
    pub sup: f64,
    pub ratio: f64,
}

/// Level-set perturbations of `u0` at each `eps`, all along one random
/// direction, evolved next to `u0`.
pub fn divergence_ladder(
    u0: &SpectralField,
    params: &EquationParams,
    cfg: &SolverConfig,
    spec: &RandomFieldSpec,
    s: f64,
    eps: &[f64],
    seed: u64,
) -> LabResult<Vec<DivergenceRow>> {
    eps.par_iter()
        .map(|&e| {
            let v0 = level_set_perturbation(u0, spec, s, e, &mut rng(seed, &[0]))?;
            let d = two_solution_divergence(u0, &v0, params, cfg, s, true)?;
            Ok(DivergenceRow {
                eps: e,
                initial: d.initial_separation,
                sup: d.sup_separation,
                ratio: d.ratio(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BicontinuityRow {
    pub eps: f64,
    pub input: f64,
    pub output: f64,
    pub ratio: f64,
}

/// Gauge separation against flow separation for the same perturbation ladder.
pub fn bicontinuity_ladder(
    u0: &SpectralField,
    params: &EquationParams,
    cfg: &SolverConfig,
    spec: &RandomFieldSpec,
    s: f64,
    eps: &[f64],
    seed: u64,
) -> LabResult<Vec<BicontinuityRow>> {
    let (base, _) = evolve(u0, params, cfg)?;
    eps.par_iter()
        .map(|&e| {
            let v0 = level_set_perturbation(u0, spec, s, e, &mut rng(seed, &[0]))?;
            let (other, _) = evolve(&v0, params, cfg)?;
            let r = bicontinuity_experiment(&base, &other, s)?;
            Ok(BicontinuityRow {
                eps: e,
                input: r.input_separation,
                output: r.output_separation,
                ratio: r.ratio(),
            })
        })
        .collect()
}

/// `max / min` of a set of positive numbers.
pub fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi / lo
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockRow {
    pub case: &'static str,
    pub k1: u32,
    pub k2: u32,
    pub k3: u32,
    pub j1: u32,
    pub j2: u32,
    pub j3: u32,
    pub trials: usize,
    pub nonzero: usize,
    pub bound_log2: f64,
    pub worst_ratio: f64,
    pub cap: f64,
    pub passed: bool,
}

impl From<&BlockReport> for BlockRow {
    fn from(r: &BlockReport) -> Self {
        Self {
            case: r.case.name(),
            k1: r.k[0],
            k2: r.k[1],
            k3: r.k[2],
            j1: r.j[0],
            j2: r.j[1],
            j3: r.j[2],
            trials: r.trials,
            nonzero: r.nonzero,
            bound_log2: r.case.bound_log2(r.k, r.j),
            worst_ratio: r.worst_ratio,
            cap: r.cap,
            passed: r.passed(),
        }
    }
}

/// Randomized verification of the cases selected by `filter` on every
/// non-vacuous `(k, j)` combination of the given frequency triples.
pub fn block_sweep(
    ks: &[[u32; 3]],
    filter: impl Fn(BlockCase) -> bool,
    cfg: &TrialConfig,
    params: &EquationParams,
    seed: u64,
) -> LabResult<Vec<BlockReport>> {
    let groups = sweep_combos(ks, params, filter);
    let work: Vec<_> = groups
        .iter()
        .flat_map(|g| g.combos.iter().map(move |c| (g, c)))
        .collect();
    let nested: Vec<Vec<BlockReport>> = work
        .par_iter()
        .map(|(g, c)| {
            let tag: Vec<u64> = c.k.iter().chain(&c.j).map(|&x| x as u64).collect();
            let mut r = rng(seed, &tag);
            Ok(verify_cases(&c.cases, c.k, c.j, &g.seeds, cfg, params, &mut r)?)
        })
        .collect::<LabResult<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

pub fn is_a_or_c(c: BlockCase) -> bool {
    matches!(c, BlockCase::A1 | BlockCase::A2 | BlockCase::C)
}

pub fn is_b(c: BlockCase) -> bool {
    matches!(c, BlockCase::B1 | BlockCase::B2 | BlockCase::B3 | BlockCase::B4)
}

/// Seeded trajectories of the renormalized integrable flow from random data
/// with `||u0||_{H^s} = 0.9 delta`, each checked for comparability.
pub fn comparability_corpus(
    grid: TorusGrid,
    spec: &RandomFieldSpec,
    s: f64,
    delta: f64,
    count: usize,
    cfg: &SolverConfig,
    coeffs: &EnergyCoefficients,
    stride: usize,
    seed: u64,
) -> LabResult<Vec<ComparabilityReport>> {
    let bumps = BumpFamily::default();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let u0 = random_hs_field(grid, spec, s, 0.9 * delta, &mut rng(seed, &[i as u64]))?;
            let params = EquationParams::renormalized(Coefficients::INTEGRABLE, &u0)?;
            let (traj, _) = evolve(&u0, &params, cfg)?;
            Ok(comparability_check(&traj, s, cfg.t_end, delta, coeffs, &bumps, stride)?)
        })
        .collect()
}

/// Embedding constant `C` in `sup_t ||u(t)||_{H^1} <= C F^1`, calibrated as the
/// largest ratio over 20 trajectories (decays 1 and 2, ten each, base seed
/// 1000) of the corpus drawn by [`embedding_corpus`] with `N = 32`, `k_max = 4`,
/// `H^1` radius 0.5, `dt = 1e-5` and `T = 1e-2`.
pub const EMBEDDING_CONSTANT: f64 = 0.1928;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingRow {
    pub index: usize,
    pub decay: f64,
    pub sup_hs: f64,
    pub fs: f64,
    pub ratio: f64,
}

/// `sup_t ||u(t)||_{H^s}` against the `F^s` upper bound along trajectories of
/// the renormalized integrable flow from random data of `H^s` radius `radius`.
pub fn embedding_corpus(
    grid: TorusGrid,
    decays: &[f64],
    per_decay: usize,
    s: f64,
    radius: f64,
    kmax: u32,
    cfg: &SolverConfig,
    seed: u64,
) -> LabResult<Vec<EmbeddingRow>> {
    let bumps = BumpFamily::default();
    let items: Vec<(f64, usize)> = decays
        .iter()
        .flat_map(|&d| (0..per_decay).map(move |i| (d, i)))
        .collect();
    items
        .par_iter()
        .enumerate()
        .map(|(index, &(decay, i))| {
            let spec = RandomFieldSpec {
                max_mode: grid.modes() / 2,
                decay,
                zero_mean: false,
            };
            let u0 = random_hs_field(grid, &spec, s, radius, &mut rng(seed, &[i as u64]))?;
            let params = EquationParams::renormalized(Coefficients::INTEGRABLE, &u0)?;
            let (traj, _) = evolve(&u0, &params, cfg)?;
            let fs = fs_norm(&traj, s, cfg.t_end, kmax, &params, &bumps)?.total;
            let sup = sup_hs(&traj, s, cfg.t_end);
            Ok(EmbeddingRow {
                index,
                decay,
                sup_hs: sup,
                fs,
                ratio: sup / fs,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub branch: &'static str,
    pub b: f64,
    pub s: f64,
    #[serde(rename = "N")]
    pub n: i64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub log2ratio: f64,
}

pub fn counterexample_rows(scan: &RatioScan) -> Vec<CounterexampleRow> {
    scan.rows
        .iter()
        .map(|r| CounterexampleRow {
            branch: scan.branch.name(),
            b: scan.b,
            s: scan.s,
            n: r.n,
            lhs: r.lhs,
            rhs: r.rhs,
            ratio: r.ratio,
            log2ratio: r.log2ratio,
        })
        .collect()
}

/// Scans for every `b` of both branches.
pub fn counterexample_scans(
    high_b: &[f64],
    low_b: &[f64],
    s: f64,
    ladder: &[i64],
) -> LabResult<(Vec<RatioScan>, Vec<RatioScan>)> {
    let scan = |bs: &[f64], branch| -> LabResult<Vec<RatioScan>> {
        bs.iter()
            .map(|&b| Ok(counterexample::ratio_scan(b, s, branch, ladder)?))
            .collect()
    };
    Ok((scan(high_b, Branch::High)?, scan(low_b, Branch::Low)?))
}

/// A single real mode `amp cos(n x)`.
pub fn cosine_mode(grid: TorusGrid, n: i64, amp: f64) -> LabResult<SpectralField> {
    let c = Complex64::new(amp * kdv5::SQRT_TWO_PI / 2.0, 0.0);
    Ok(SpectralField::real_from_modes(grid, &[(n, c)])?)
}
