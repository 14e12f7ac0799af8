//! One function per subcommand: run the experiment, write its artifacts and
//! return the asserted invariants.

use kdv5::counterexample::{self, threshold_report, Branch};
use kdv5::dyadic::spectrum::{es_norm, fs_norm, ns_norm, sup_hs, NormReport};
use kdv5::dyadic::trilinear::{frequency_triples, TrialConfig};
use kdv5::dyadic::BumpFamily;
use kdv5::energy::{commutator_bound_scan, energy_ledger, top_band, EnergyCoefficients};
use kdv5::equation::{EquationParams, Nonlinearity};
use kdv5::integrator::evolve;
use kdv5::resonance::{scan_h2, scan_h3, H3Form, IdentityScan};
use kdv5::spectral::{SpectralField, Trajectory};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiments::{self as ex, argmax, derive_seed};
use crate::output::{csv_row, OutputDir};
use crate::report::{Invariant, Report};
use crate::suite;
use crate::{LabError, LabResult};

/// Initial datum, equation and trajectory described by the config.
pub struct Run {
    pub u0: SpectralField,
    pub params: EquationParams,
    pub traj: Trajectory,
    pub conservation: kdv5::integrator::ConservationReport,
}

pub fn initial(cfg: &ExperimentConfig) -> LabResult<(SpectralField, EquationParams)> {
    let grid = cfg.grid.grid()?;
    let u0 = cfg.initial.build(grid, derive_seed(cfg.seed, &[0]))?;
    let params = cfg.equation.params(&u0)?;
    Ok((u0, params))
}

pub fn simulate_run(cfg: &ExperimentConfig) -> LabResult<Run> {
    let (u0, params) = initial(cfg)?;
    let (traj, conservation) = evolve(&u0, &params, &cfg.solver.solver()?)?;
    Ok(Run {
        u0,
        params,
        traj,
        conservation,
    })
}

#[derive(Serialize)]
struct CoefficientRow {
    n: i64,
    re: f64,
    im: f64,
}

fn worst_row(name: &str, file: &str, values: Vec<f64>, limit: f64) -> Invariant {
    let (i, v) = argmax(values);
    Invariant::at_most(name, v, limit).at(file, csv_row(i))
}

pub fn simulate(cfg: &ExperimentConfig, out: &OutputDir) -> LabResult<Report> {
    let run = simulate_run(cfg)?;
    let rows = ex::conservation_rows(&run.conservation);
    out.csv("conservation.csv", &rows)?;
    let last: Vec<CoefficientRow> = run
        .traj
        .last()
        .iter()
        .map(|(n, c)| CoefficientRow { n, re: c.re, im: c.im })
        .collect();
    out.csv("final_state.csv", &last)?;
    let file = "conservation.csv";
    let co = run.params.coefficients();
    let mut inv = vec![worst_row("mass drift", file, run.conservation.drift_mass(), 1e-13)];
    if co.conserves_l2() {
        inv.push(worst_row("energy drift", file, run.conservation.drift_energy(), 1e-8));
    }
    if co.is_integrable() {
        inv.push(worst_row("H3 drift", file, run.conservation.drift_h3(), 1e-6));
    }
    Ok(Report::new("simulate", cfg.seed, inv))
}

#[derive(Serialize)]
struct ScanSummary {
    identity: &'static str,
    range: i64,
    checked: u64,
    mismatches: u64,
    first_mismatch: Option<MismatchSummary>,
}

#[derive(Serialize)]
struct MismatchSummary {
    n: Vec<i64>,
    power_sum: String,
    factorized: String,
}

fn summarize(identity: &'static str, s: &IdentityScan) -> ScanSummary {
    ScanSummary {
        identity,
        range: s.range,
        checked: s.checked,
        mismatches: s.mismatches,
        first_mismatch: s.first_mismatch.as_ref().map(|m| MismatchSummary {
            n: m.n.clone(),
            power_sum: m.power_sum.to_string(),
            factorized: m.factorized.to_string(),
        }),
    }
}

pub fn resonance(cfg: &ExperimentConfig, out: &OutputDir, range: Option<i64>) -> LabResult<Report> {
    let range = range.unwrap_or(cfg.resonance.range);
    if range < 0 {
        return Err(LabError::Config("scan range must be nonnegative".into()));
    }
    let h2 = scan_h2(range);
    let h3 = scan_h3(range, H3Form::Corrected);
    let literal = scan_h3(range, H3Form::Printed);
    out.json(
        "resonance.json",
        &[summarize("h2", &h2), summarize("h3", &h3), summarize("h3_literal", &literal)],
    )?;
    let mut inv = vec![
        Invariant::at_most("H2 factorization mismatches", h2.mismatches as f64, 0.0),
        Invariant::at_most("H3 factorization mismatches", h3.mismatches as f64, 0.0),
    ];
    if range >= 1 {
        inv.push(Invariant::holds(
            "literal H3 form has a counterexample",
            literal.first_mismatch.is_some(),
            "first mismatch recorded",
        ));
    }
    Ok(Report::new("resonance", cfg.seed, inv))
}

pub fn gauge(cfg: &ExperimentConfig, out: &OutputDir) -> LabResult<Report> {
    let run = simulate_run(cfg)?;
    let g = ex::gauge_check(&run.traj, &run.params)?;
    out.json("gauge.json", &g)?;
    let ladder = ex::bicontinuity_ladder(
        &run.u0,
        &run.params,
        &cfg.solver.solver()?,
        &cfg.initial.field_spec(),
        cfg.gauge.s,
        &cfg.gauge.separations,
        derive_seed(cfg.seed, &[1]),
    )?;
    out.csv("bicontinuity.csv", &ladder)?;
    let mut inv = vec![
        Invariant::at_most("NT modulus defect", g.modulus_defect, 1e-15),
        Invariant::at_most("NT round trip", g.round_trip, 1e-12),
    ];
    if run.params.coefficients().conserves_l2() && run.params.is_renormalized() {
        inv.push(Invariant::at_most("NT phase against exp(-i c2 n t)", g.phase_defect, 1e-8));
    }
    inv.push(Invariant::at_most(
        "bicontinuity ratio spread",
        ex::spread(ladder.iter().map(|r| r.ratio)),
        5.0,
    ));
    Ok(Report::new("gauge", cfg.seed, inv))
}

#[derive(Serialize)]
struct BandRow {
    norm: &'static str,
    k: u32,
    t_k: f64,
    value: f64,
}

fn band_rows<'a>(name: &'static str, r: &'a NormReport) -> impl Iterator<Item = BandRow> + 'a {
    r.bands.iter().map(move |b| BandRow {
        norm: name,
        k: b.k,
        t_k: b.t_k,
        value: b.value,
    })
}

#[derive(Serialize)]
struct NormSummary {
    s: f64,
    t_max: f64,
    kmax: u32,
    j_cap: u32,
    fs: f64,
    ns: f64,
    es: f64,
    sup_hs: f64,
    embedding_ratio: f64,
    embedding_constant: f64,
}

fn nonlinear_trajectory(run: &Run) -> LabResult<Trajectory> {
    let grid = *run.traj.grid();
    let nl = Nonlinearity::new(grid, &run.params, true);
    Ok(run
        .traj
        .map_states(|_, u| SpectralField::from_coeffs(grid, nl.eval(u.coeffs()), true))?)
}

pub fn norms(cfg: &ExperimentConfig, out: &OutputDir) -> LabResult<Report> {
    let run = simulate_run(cfg)?;
    let bumps = BumpFamily::default();
    let n = cfg.norms;
    let t_max = n.t_max.unwrap_or(run.traj.t_end());
    let fs = fs_norm(&run.traj, n.s, t_max, n.kmax, &run.params, &bumps)?;
    let ns = ns_norm(&nonlinear_trajectory(&run)?, n.s, t_max, n.kmax, &run.params, &bumps)?;
    let es = es_norm(&run.traj, n.s, t_max, n.kmax, &bumps)?;
    let sup = sup_hs(&run.traj, n.s, t_max);
    let bands: Vec<BandRow> = band_rows("F", &fs).chain(band_rows("N", &ns)).collect();
    out.csv("norm_bands.csv", &bands)?;
    out.json(
        "norms.json",
        &NormSummary {
            s: n.s,
            t_max,
            kmax: n.kmax,
            j_cap: fs.j_cap,
            fs: fs.total,
            ns: ns.total,
            es,
            sup_hs: sup,
            embedding_ratio: sup / fs.total,
            embedding_constant: ex::EMBEDDING_CONSTANT,
        },
    )?;
    let b = cfg.blocks;
    let params = EquationParams::with_constants(*run.params.coefficients(), b.c1, b.c2)?;
    let trial = TrialConfig {
        trials: b.trials,
        width: b.width,
        cap: b.cap,
    };
    let reports = ex::block_sweep(&frequency_triples(b.kmax, false), |_| true, &trial, &params, derive_seed(cfg.seed, &[2]))?;
    let rows: Vec<ex::BlockRow> = reports.iter().map(ex::BlockRow::from).collect();
    out.csv("blocks.csv", &rows)?;
    let mut inv = vec![Invariant::at_most(
        "embedding sup H^s <= C F^s",
        sup / fs.total,
        1.2 * ex::EMBEDDING_CONSTANT,
    )];
    let (i, worst) = argmax(rows.iter().map(|r| r.worst_ratio / r.cap));
    let block = Invariant::at_most("block estimates J / (cap bound)", worst.max(0.0), 1.0);
    inv.push(if rows.is_empty() { block } else { block.at("blocks.csv", csv_row(i)) });
    Ok(Report::new("norms", cfg.seed, inv))
}

#[derive(Serialize)]
struct LedgerRow {
    t: f64,
    k: u32,
    quadratic: f64,
    corr_ii: f64,
    corr_iii: f64,
    total: f64,
    imag_ii: f64,
    imag_iii: f64,
}

#[derive(Serialize)]
struct ComparabilityRow {
    delta: f64,
    index: usize,
    sup_hs: f64,
    modified: f64,
    norm_sq: f64,
    ratio: f64,
    passed: bool,
}

#[derive(Serialize)]
struct CommutatorCsvRow {
    k: u32,
    n1_limit: i64,
    taylor_max: f64,
    difference_max: f64,
}

pub fn energy(cfg: &ExperimentConfig, out: &OutputDir) -> LabResult<Report> {
    let run = simulate_run(cfg)?;
    let bumps = BumpFamily::default();
    let e = &cfg.energy;
    let coeffs = EnergyCoefficients {
        alpha: e.alpha,
        beta: e.beta,
    };
    let kmax = top_band(&run.u0).max(1);
    let ledger = energy_ledger(&run.traj, run.traj.t_end(), kmax, &coeffs, &bumps, cfg.norms.stride)?;
    let rows: Vec<LedgerRow> = ledger
        .rows
        .iter()
        .map(|r| LedgerRow {
            t: r.t,
            k: r.k,
            quadratic: r.quadratic,
            corr_ii: r.corr_ii,
            corr_iii: r.corr_iii,
            total: r.total(),
            imag_ii: r.imag_ii,
            imag_iii: r.imag_iii,
        })
        .collect();
    out.csv("energy_ledger.csv", &rows)?;
    let (i, imag) = argmax(rows.iter().map(|r| r.imag_ii.max(r.imag_iii)));
    let mut inv = vec![Invariant::at_most("discarded imaginary parts", imag.max(0.0), 1e-12).at("energy_ledger.csv", csv_row(i))];

    let grid = cfg.grid.grid()?;
    let solver = cfg.solver.solver()?;
    let mut comp = Vec::new();
    for (d, &delta) in e.deltas.iter().enumerate() {
        let reports = ex::comparability_corpus(
            grid,
            &cfg.initial.field_spec(),
            e.s,
            delta,
            e.trajectories,
            &solver,
            &coeffs,
            cfg.norms.stride,
            derive_seed(cfg.seed, &[3, d as u64]),
        )?;
        comp.extend(reports.iter().enumerate().map(|(index, r)| ComparabilityRow {
            delta,
            index,
            sup_hs: r.sup_hs,
            modified: r.modified,
            norm_sq: r.norm_sq,
            ratio: r.ratio(),
            passed: r.passed(),
        }));
    }
    out.csv("comparability.csv", &comp)?;
    let failing = comp.iter().position(|r| !r.passed);
    let c = Invariant::holds("comparability 1/2 <= E/||u||^2 <= 3/2", failing.is_none(), "every trajectory");
    inv.push(match failing {
        Some(i) => c.at("comparability.csv", csv_row(i)),
        None => c,
    });

    let scan = commutator_bound_scan(e.commutator_kmax, 64, &bumps);
    let crow: Vec<CommutatorCsvRow> = scan
        .rows
        .iter()
        .map(|r| CommutatorCsvRow {
            k: r.k,
            n1_limit: r.n1_limit,
            taylor_max: r.taylor_max,
            difference_max: r.difference_max,
        })
        .collect();
    out.csv("commutator.csv", &crow)?;
    if let Some(v) = scan.variation(8, 10) {
        inv.push(Invariant::at_most("commutator max variation k = 8 vs 10", v, 0.1));
    }
    Ok(Report::new("energy", cfg.seed, inv))
}

#[derive(Serialize)]
struct SlopeRow {
    branch: &'static str,
    b: f64,
    slope: f64,
    expected: f64,
    intercept: f64,
}

pub fn counterexample(cfg: &ExperimentConfig, out: &OutputDir, b: Option<f64>) -> LabResult<Report> {
    let c = &cfg.counterexample;
    let (high, low) = match b {
        Some(b) if Branch::failing(b) == Branch::High => ex::counterexample_scans(&[b], &[], c.s, &c.n_list)?,
        Some(b) => ex::counterexample_scans(&[], &[b], c.s, &c.n_list)?,
        None => ex::counterexample_scans(&c.high_b, &c.low_b, c.s, &c.n_list)?,
    };
    let scans: Vec<_> = high.iter().chain(&low).collect();
    let rows: Vec<ex::CounterexampleRow> = scans.iter().flat_map(|s| ex::counterexample_rows(s)).collect();
    out.csv("counterexample.csv", &rows)?;
    let slopes: Vec<SlopeRow> = scans
        .iter()
        .map(|s| SlopeRow {
            branch: s.branch.name(),
            b: s.b,
            slope: s.slope,
            expected: s.expected_slope(),
            intercept: s.intercept,
        })
        .collect();
    out.csv("slopes.csv", &slopes)?;
    let mut inv: Vec<Invariant> = scans
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let e = s.expected_slope();
            Invariant::within(
                &format!("{} branch slope at b = {}", s.branch.name(), s.b),
                s.slope,
                e - counterexample::SLOPE_TOLERANCE,
                e + counterexample::SLOPE_TOLERANCE,
            )
            .at("slopes.csv", csv_row(i))
        })
        .collect();
    if high.len() >= 2 && low.len() >= 2 {
        let t = threshold_report(&high, &low)?;
        inv.push(Invariant::holds(
            "no b satisfies both branches",
            t.empty_intersection(),
            &format!("high threshold {:.3} < low threshold {:.3}", t.high, t.low),
        ));
    }
    Ok(Report::new("counterexample", cfg.seed, inv))
}

/// The acceptance suite; prints one line per criterion as it finishes.
pub fn all(seed: u64, out: &OutputDir) -> LabResult<Report> {
    let results = suite::run_all(seed, |c| println!("{}", c.line()));
    out.csv("acceptance.csv", &results)?;
    let inv = results
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Invariant::holds(&format!("{} {}", c.id, c.name), c.passed, &c.detail).at("acceptance.csv", csv_row(i))
        })
        .collect();
    Ok(Report::new("all", seed, inv))
}
