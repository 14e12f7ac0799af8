//! The acceptance suite: eleven criteria at fixed desk-scale settings.

use std::time::Instant;

use kdv5::counterexample::{dyadic_ladder, threshold_report};
use kdv5::dyadic::trilinear::{frequency_triples, worst_by_case, BlockCase, BlockReport, TrialConfig};
use kdv5::dyadic::{band_range, project, BumpFamily};
use kdv5::energy::{commutator_bound_scan, localized_energy, resonant_slice, EnergyCoefficients};
use kdv5::equation::{Coefficients, EquationParams};
use kdv5::integrator::{evolve, SolverConfig};
use kdv5::random::{random_hs_field, RandomFieldSpec};
use kdv5::resonance::{scan_h2, scan_h3, H3Form};
use kdv5::spectral::{SpectralField, TorusGrid};
use serde::Serialize;

use crate::experiments::{self as ex, rng};
use crate::LabResult;

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Criterion {
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {:>2} {:<26} {} ({:.1} s)", self.id, self.name, self.detail, self.seconds)
    }
}

type Check = fn(u64) -> LabResult<(bool, String)>;

/// Criterion ids, names and checks in suite order.
pub const CRITERIA: [(u32, &str, Check); 11] = [
    (1, "resonance identities", resonance_identities),
    (2, "renormalization", renormalization),
    (3, "conservation", conservation),
    (4, "solver order", solver_order),
    (5, "gauge", gauge),
    (6, "partition and commutator", partition_and_commutator),
    (7, "block estimates", block_estimates),
    (8, "modified energy", modified_energy),
    (9, "bilinear counterexample", bilinear_counterexample),
    (10, "embedding constant", embedding),
    (11, "level-set continuity", level_set_continuity),
];

/// Runs one criterion; errors count as failures.
pub fn run_criterion(id: u32, seed: u64) -> Option<Criterion> {
    let &(id, name, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = match check(seed) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(Criterion {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs every criterion in order, calling `each` as results arrive.
pub fn run_all(seed: u64, mut each: impl FnMut(&Criterion)) -> Vec<Criterion> {
    CRITERIA
        .iter()
        .filter_map(|c| {
            let r = run_criterion(c.0, seed)?;
            each(&r);
            Some(r)
        })
        .collect()
}

fn resonance_identities(_: u64) -> LabResult<(bool, String)> {
    let h2 = scan_h2(200);
    let h3 = scan_h3(200, H3Form::Corrected);
    let printed = scan_h3(200, H3Form::Printed);
    let first = printed.first_mismatch.as_ref().map(|m| format!("{:?}", m.n)).unwrap_or_default();
    let passed = h2.passed() && h3.passed() && !printed.passed();
    Ok((
        passed,
        format!(
            "H2 {}/{} and H3 {}/{} mismatches; literal H3 fails {} times, first at {first}",
            h2.mismatches, h2.checked, h3.mismatches, h3.checked, printed.mismatches
        ),
    ))
}

fn renormalization(seed: u64) -> LabResult<(bool, String)> {
    let worst = ex::rhs_consistency(TorusGrid::with_modes(32), Coefficients::INTEGRABLE, 50, seed)?;
    Ok((worst <= 1e-12, format!("max relative gap {worst:.2e} over 50 fields (<= 1e-12)")))
}

/// Smooth four-mode datum shared by the conservation and gauge checks.
pub fn four_mode(grid: TorusGrid) -> SpectralField {
    SpectralField::from_fn(grid, |x| {
        0.5 * x.cos() + 0.3 * (2.0 * x).sin() + 0.2 * (3.0 * x).cos() + 0.1 * (4.0 * x).sin()
    })
}

fn conservation(_: u64) -> LabResult<(bool, String)> {
    let u0 = four_mode(TorusGrid::with_modes(128));
    let cfg = SolverConfig::new(1e-5, 1e-2);
    let (_, rep) = evolve(&u0, &EquationParams::raw(Coefficients::INTEGRABLE), &cfg)?;
    let (_, pert) = evolve(&u0, &EquationParams::raw(Coefficients::new(-30.0, 20.0, 5.0)), &cfg)?;
    let (m, e, h) = (rep.max_drift_mass(), rep.max_drift_energy(), rep.max_drift_h3());
    let ratio = pert.max_drift_h3() / h;
    let passed = m <= 1e-13 && e <= 1e-8 && h <= 1e-6 && ratio >= 1e3;
    Ok((
        passed,
        format!("drift M {m:.1e} E {e:.1e} H3 {h:.1e}; perturbed H3 drift ratio {ratio:.1e} (>= 1e3)"),
    ))
}

fn solver_order(_: u64) -> LabResult<(bool, String)> {
    let u0 = SpectralField::from_fn(TorusGrid::with_modes(16), f64::cos);
    let params = EquationParams::renormalized(Coefficients::INTEGRABLE, &u0)?;
    let r = ex::order_check(&u0, &params, &SolverConfig::new(1e-4, 1e-3))?;
    Ok((
        (12.0..=20.0).contains(&r.ratio),
        format!("dt-halving error ratio {:.2} (in [12, 20])", r.ratio),
    ))
}

fn gauge(_: u64) -> LabResult<(bool, String)> {
    let u0 = four_mode(TorusGrid::with_modes(32));
    let params = EquationParams::renormalized(Coefficients::INTEGRABLE, &u0)?;
    let (traj, _) = evolve(&u0, &params, &SolverConfig::new(1e-5, 1e-2))?;
    let g = ex::gauge_check(&traj, &params)?;
    let passed = g.modulus_defect <= 1e-15 && g.round_trip <= 1e-12 && g.phase_defect <= 1e-8;
    Ok((
        passed,
        format!(
            "modulus {:.1e} (<= 1e-15), round trip {:.1e} (<= 1e-12), phase {:.1e} (<= 1e-8)",
            g.modulus_defect, g.round_trip, g.phase_defect
        ),
    ))
}

fn partition_and_commutator(_: u64) -> LabResult<(bool, String)> {
    let b = BumpFamily::default();
    let kmax = 10;
    // the partition telescopes to eta0(x / 2^kmax), which is 1 up to 2^kmax
    let top = 1i64 << kmax;
    let mut worst = 0.0f64;
    for n in -top..top {
        worst = worst.max((b.partition_sum(kmax, n as f64) - 1.0).abs());
        worst = worst.max((b.partition_sum(kmax, n as f64 + 0.37) - 1.0).abs());
    }
    worst = worst.max((b.partition_sum(kmax, top as f64) - 1.0).abs());
    let scan = commutator_bound_scan(10, 64, &b);
    let var = scan.variation(8, 10).unwrap_or(f64::INFINITY);
    let passed = worst <= 1e-14 && var <= 0.1;
    Ok((
        passed,
        format!(
            "partition defect {worst:.1e} on |x| <= {top}; commutator constant {:.3}, k = 8 vs 10 variation {var:.1e} (<= 0.1)",
            scan.constant()
        ),
    ))
}

fn block_params() -> LabResult<EquationParams> {
    Ok(EquationParams::with_constants(Coefficients::INTEGRABLE, 0.05, 0.3)?)
}

fn block_summary(reports: &[BlockReport]) -> String {
    worst_by_case(reports)
        .iter()
        .map(|r| format!("{} {:.3}", r.case.name(), r.worst_ratio))
        .collect::<Vec<_>>()
        .join(", ")
}

/// A and C cases on every triple with `k_max <= 8`; the B cases need
/// `k_min + 10 <= k_max` and are swept on the top bands `10..=12`.
pub fn acceptance_block_sweep(seed: u64) -> LabResult<(Vec<BlockReport>, Vec<BlockReport>)> {
    let params = block_params()?;
    let cfg = TrialConfig::default();
    let ac = ex::block_sweep(&frequency_triples(8, false), ex::is_a_or_c, &cfg, &params, seed)?;
    let top: Vec<[u32; 3]> = (10..=12).flat_map(|k| frequency_triples(k, true)).collect();
    let b = ex::block_sweep(&top, ex::is_b, &cfg, &params, seed)?;
    Ok((ac, b))
}

fn block_estimates(seed: u64) -> LabResult<(bool, String)> {
    let (ac, b) = acceptance_block_sweep(seed)?;
    let all: Vec<BlockReport> = ac.iter().chain(&b).cloned().collect();
    let failed = all.iter().filter(|r| !r.passed()).count();
    let covered: Vec<BlockCase> = worst_by_case(&all).iter().filter(|r| r.nonzero > 0).map(|r| r.case).collect();
    let passed = failed == 0 && covered.len() == BlockCase::ALL.len();
    Ok((
        passed,
        format!(
            "{} case checks x {} trials, {failed} over cap 10; worst {}",
            all.len(),
            TrialConfig::default().trials,
            block_summary(&all)
        ),
    ))
}

fn modified_energy(seed: u64) -> LabResult<(bool, String)> {
    let b = BumpFamily::default();
    let coeffs = EnergyCoefficients::default();
    let grid = TorusGrid::with_modes(32);
    let mut exact = true;
    for k in 1..=4u32 {
        let (lo, hi) = band_range(k);
        let u = ex::cosine_mode(grid, (lo + hi) / 2, 0.3)?;
        let e = localized_energy(&u, k, &coeffs, &b, 0.0)?;
        exact &= e.total() == project(&u, k, &b).l2_norm_sq();
    }
    let spec = RandomFieldSpec {
        max_mode: 16,
        decay: 1.0,
        zero_mean: false,
    };
    let reports = ex::comparability_corpus(grid, &spec, 1.0, 1e-2, 20, &SolverConfig::new(1e-5, 1e-2), &coeffs, 50, seed)?;
    let comparable = reports.iter().all(|r| r.passed());
    let (lo, hi) = reports
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.ratio()), hi.max(r.ratio())));
    let flat = RandomFieldSpec {
        max_mode: 32,
        decay: 0.0,
        zero_mean: false,
    };
    let u = random_hs_field(grid, &flat, 0.0, 1.0, &mut rng(seed, &[8]))?;
    let mut slice = 0.0f64;
    for k in 1..=5 {
        let r = resonant_slice(&u, k, &coeffs, &b)?;
        slice = slice.max(r.alpha_part).max(r.beta_part);
    }
    let passed = exact && comparable && slice <= 1e-12;
    Ok((
        passed,
        format!(
            "two-mode E_k exact: {exact}; E/||u||^2 in [{lo:.5}, {hi:.5}] on 20 trajectories (in [0.5, 1.5]); resonant slice {slice:.1e} (<= 1e-12)"
        ),
    ))
}

fn bilinear_counterexample(_: u64) -> LabResult<(bool, String)> {
    let ladder = dyadic_ladder(6, 12);
    let (high, low) = ex::counterexample_scans(&[0.3, 0.5, 1.0], &[0.5, 0.75], 0.0, &ladder)?;
    let t = threshold_report(&high, &low)?;
    let slopes = high
        .iter()
        .chain(&low)
        .map(|s| format!("{} b={} {:.3}", s.branch.name(), s.b, s.slope))
        .collect::<Vec<_>>()
        .join(", ");
    let passed = high.iter().chain(&low).all(|s| s.passed()) && t.empty_intersection();
    Ok((
        passed,
        format!("slopes {slopes}; thresholds {:.3} < {:.3}", t.high, t.low),
    ))
}

/// Corpus of the embedding criterion: `N = 32`, decays 1 and 2, three
/// trajectories each, `||u0||_{H^1} = 0.5`, `k_max = 4`.
pub fn acceptance_embedding_corpus(seed: u64) -> LabResult<Vec<ex::EmbeddingRow>> {
    ex::embedding_corpus(TorusGrid::with_modes(32), &[1.0, 2.0], 3, 1.0, 0.5, 4, &SolverConfig::new(1e-5, 1e-2), seed)
}

fn embedding(seed: u64) -> LabResult<(bool, String)> {
    let rows = acceptance_embedding_corpus(seed)?;
    let calibrated = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let drift = calibrated / ex::EMBEDDING_CONSTANT - 1.0;
    let bound_holds = rows.iter().all(|r| r.sup_hs <= 1.2 * ex::EMBEDDING_CONSTANT * r.fs);
    let passed = drift.abs() <= 0.2 && bound_holds;
    Ok((
        passed,
        format!(
            "corpus C {calibrated:.4} vs frozen {:.4} ({:+.1}%, within 20%)",
            ex::EMBEDDING_CONSTANT,
            100.0 * drift
        ),
    ))
}

fn level_set_continuity(seed: u64) -> LabResult<(bool, String)> {
    let spec = RandomFieldSpec {
        max_mode: 16,
        decay: 1.0,
        zero_mean: false,
    };
    let grid = TorusGrid::with_modes(32);
    let eps = [1e-2, 1e-3, 1e-4, 1e-5];
    let mut worst = 0.0f64;
    for (i, radius) in [0.5, 2.0].into_iter().enumerate() {
        let u0 = random_hs_field(grid, &spec, 1.0, radius, &mut rng(seed, &[11, i as u64]))?;
        let params = EquationParams::renormalized(Coefficients::INTEGRABLE, &u0)?;
        let rows = ex::divergence_ladder(&u0, &params, &SolverConfig::new(1e-5, 1e-2), &spec, 1.0, &eps, derive(seed, i))?;
        worst = worst.max(ex::spread(rows.iter().map(|r| r.ratio)));
    }
    Ok((
        worst <= 5.0,
        format!("separation ratio spread {worst:.4} over eps 1e-2..1e-5 (<= 5)"),
    ))
}

fn derive(seed: u64, i: usize) -> u64 {
    ex::derive_seed(seed, &[12, i as u64])
}
