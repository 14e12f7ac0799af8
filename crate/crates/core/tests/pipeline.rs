use kdv5::counterexample::{dyadic_ladder, ratio_scan, threshold_report, Branch};
use kdv5::equation::{Coefficients, EquationParams};
use kdv5::gauge::{apply_nt, apply_nt_inverse, bicontinuity_experiment};
use kdv5::integrator::{evolve, SolverConfig};
use kdv5::resonance::{h2, h2_factorized, scan_h3, H3Form};
use kdv5::spectral::{convolve3_exact, product_padded, SpectralField, TorusGrid};
use kdv5::Complex64;

fn two_mode(grid: TorusGrid, a: f64, b: f64) -> SpectralField {
    SpectralField::real_from_modes(grid, &[(1, Complex64::new(a, 0.0)), (2, Complex64::new(0.0, b))]).unwrap()
}

#[test]
fn renormalized_flow_conserves_and_gauges_back() {
    let grid = TorusGrid::with_modes(32);
    let u0 = two_mode(grid, 0.8, 0.3);
    let params = EquationParams::renormalized(Coefficients::INTEGRABLE, &u0).unwrap();
    let (traj, report) = evolve(&u0, &params, &SolverConfig::new(1e-5, 2e-3)).unwrap();
    assert_eq!(traj.len(), 201);
    assert!(report.max_drift_mass() <= 1e-13);
    assert!(report.max_drift_energy() <= 1e-10);
    assert!(report.max_drift_h3() <= 1e-8);

    let (gauged, phase) = apply_nt(&traj).unwrap();
    let back = apply_nt_inverse(&gauged, &phase).unwrap();
    for (a, b) in traj.states().iter().zip(back.states()) {
        assert!(a.sub(b).unwrap().l2_norm() <= 1e-13);
        assert!((a.l2_norm() - b.l2_norm()).abs() <= 1e-13);
    }
}

#[test]
fn nearby_solutions_stay_nearby_after_the_gauge() {
    let grid = TorusGrid::with_modes(16);
    let cfg = SolverConfig::new(1e-5, 1e-3);
    let solve = |u0: &SpectralField| {
        let params = EquationParams::renormalized(Coefficients::INTEGRABLE, u0).unwrap();
        evolve(u0, &params, &cfg).unwrap().0
    };
    let u = solve(&two_mode(grid, 0.5, 0.2));
    let v = solve(&two_mode(grid, 0.5 + 1e-4, 0.2));
    let report = bicontinuity_experiment(&u, &v, 1.0).unwrap();
    assert!(report.input_separation > 0.0);
    assert!((0.2..=5.0).contains(&report.ratio()));
}

#[test]
fn padded_products_agree_with_direct_convolution() {
    let grid = TorusGrid::with_modes(12);
    let u = two_mode(grid, 1.0, -0.5);
    let v = SpectralField::from_fn(grid, |x| (3.0 * x).cos() + 0.25 * x.sin());
    let w = SpectralField::from_fn(grid, |x| (x.cos()).exp());
    let fast = product_padded(&[&u, &v, &w], 64).unwrap();
    let exact = convolve3_exact(&u, &v, &w).unwrap();
    for n in grid.frequencies() {
        assert!((fast.coeff(n) - exact.coeff(n)).norm() <= 1e-12, "n = {n}");
    }
}

#[test]
fn resonance_identities_hold_on_a_small_box() {
    for n1 in -30..=30 {
        for n2 in -30..=30 {
            assert_eq!(h2(n1, n2), h2_factorized(n1, n2));
        }
    }
    let corrected = scan_h3(12, H3Form::Corrected);
    assert!(corrected.passed());
    assert_eq!(corrected.checked, 25u64.pow(3));
    assert!(!scan_h3(12, H3Form::Printed).passed());
}

#[test]
fn counterexample_thresholds_do_not_overlap() {
    let ladder = dyadic_ladder(6, 10);
    let high: Vec<_> = [0.4, 0.8].iter().map(|&b| ratio_scan(b, 0.0, Branch::High, &ladder).unwrap()).collect();
    let low: Vec<_> = [0.5, 0.9].iter().map(|&b| ratio_scan(b, 0.0, Branch::Low, &ladder).unwrap()).collect();
    assert!(high.iter().chain(&low).all(|s| s.passed()));
    let report = threshold_report(&high, &low).unwrap();
    assert!((report.high - 0.25).abs() < 0.05);
    assert!((report.low - 0.75).abs() < 0.05);
    assert!(report.empty_intersection());
}
