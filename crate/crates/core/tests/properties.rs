use std::f64::consts::PI;

use pcurv::blowup::blowup_sweep;
use pcurv::continuation::{rescaled_eta, solve_regularized};
use pcurv::diagnostics::{farfield_fit, gradient_decay, kelvin_transform, pohozaev_residual, volume_residual, FarFieldFit};
use pcurv::integrator::read_csv_nodes;
use pcurv::quadrature::{pohozaev_quantities, pohozaev_quantities_at};
use pcurv::*;
use proptest::prelude::*;

fn bubble_error(u0: f64, controls: &IntegratorControls) -> f64 {
    let spec = CurvatureSpec::constant(1.0).unwrap();
    let prof = integrate(&spec, u0, controls).unwrap();
    let exact = |r: f64| u0 - (1.0 + (2.0 * u0).exp() * r * r / 4.0).ln();
    prof.nodes
        .iter()
        .filter(|n| n.r <= 100.0)
        .map(|n| (n.u - exact(n.r)).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bubble_oracle_for_any_height(u0 in -3.0f64..5.0) {
        let c = IntegratorControls::default();
        prop_assert!(bubble_error(u0, &c) <= 10.0 * c.rel_tol);
    }

    #[test]
    fn divergence_identity(p in 0.2f64..2.5, u0 in 0.0f64..8.0) {
        let c = IntegratorControls::default();
        let prof = integrate(&CurvatureSpec::sign_changing(p).unwrap(), u0, &c).unwrap();
        let worst = prof.divergence_residuals().fold(0.0, f64::max);
        prop_assert!(worst <= 100.0 * c.rel_tol, "{}", worst);
    }

    #[test]
    fn converged_solutions_decrease_and_satisfy_pohozaev(p in 0.3f64..1.9, u0 in 3.0f64..10.0) {
        let spec = CurvatureSpec::sign_changing(p).unwrap();
        let prof = integrate(&spec, u0, &IntegratorControls::default()).unwrap();
        if prof.is_converged() {
            prop_assert!(prof.is_monotone_decreasing(prof.controls.abs_tol));
            let lam = prof.lambda_hat.unwrap();
            prop_assert!(spec.window().unwrap().contains_open(lam));
            let fit = FarFieldFit::anchored(&prof, prof.r_last()).unwrap();
            let rep = pohozaev_quantities(&prof, &fit).unwrap();
            prop_assert!(pohozaev_residual(&rep, p).abs() <= 1e-3);
            prop_assert!(volume_residual(&rep, &spec).abs() <= 1e-3);
        }
    }

    #[test]
    fn profile_files_round_trip(p in 0.2f64..2.0, u0 in -2.0f64..6.0) {
        let spec = CurvatureSpec::sign_changing(p).unwrap();
        let prof = integrate(&spec, u0, &IntegratorControls::default()).unwrap();

        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        let nodes = read_csv_nodes(buf.as_slice()).unwrap();
        prop_assert_eq!(&nodes, &prof.nodes);

        let mut buf = Vec::new();
        prof.write_json(&mut buf).unwrap();
        let back = RadialProfile::read_json(buf.as_slice()).unwrap();
        prop_assert_eq!(back, prof);
    }

    #[test]
    fn kelvin_cancels_pure_log(lambda in 0.5f64..12.0, c in -3.0f64..3.0) {
        let k = lambda / (2.0 * PI);
        let nodes = (0..=80)
            .map(|i| {
                let r = 10f64.powf(i as f64 / 10.0);
                Node { r, u: c - k * r.ln(), w: -k, lam: lambda, vol: 0.0, pw: 0.0 }
            })
            .collect();
        let prof = RadialProfile::from_samples(CurvatureSpec::constant(1.0).unwrap(), nodes, Some(lambda)).unwrap();
        let kt = kelvin_transform(&prof, lambda, &[1.0, 0.3, 1e-2, 1e-5, 1e-8]).unwrap();
        for (_, v) in kt {
            prop_assert!((v - c).abs() < 1e-12);
        }
        prop_assert!((gradient_decay(&prof, (1e2, 1e7)).unwrap() - k).abs() < 1e-14);
        let fit = farfield_fit(&prof, (1e2, 1e6)).unwrap();
        prop_assert!((fit.slope + k).abs() < 1e-12 && (fit.c - c).abs() < 1e-10);
    }

    #[test]
    fn rescaling_is_exact(lambda in 0.01f64..2.0, frac in 0.1f64..0.9) {
        let c = IntegratorControls::default();
        let prof = solve_regularized(1.0, lambda, frac * LAMBDA_SPH, &c).unwrap();
        let step = rescaled_eta(&prof, lambda).unwrap();
        prop_assert!((lambda * step.r_lambda.powi(2) * (2.0 * step.u0).exp() - 1.0).abs() < 1e-14);
        prop_assert!(step.ratio > 0.0);
        prop_assert_eq!(step.eta[0].1, 0.0);
        prop_assert!(step.eta.iter().all(|(_, e)| *e <= 1e-12));
    }
}

#[test]
fn halving_tolerance_halves_bubble_error() {
    let levels = [1e-5, 5e-6, 2.5e-6];
    for u0 in [0.0, 2f64.ln(), 3.0] {
        let errs: Vec<f64> = levels
            .iter()
            .map(|&t| bubble_error(u0, &IntegratorControls { rel_tol: t, abs_tol: 1e-3 * t, max_step: 5.0, ..Default::default() }))
            .collect();
        assert!(errs[1] <= 0.5 * errs[0] && errs[2] <= 0.5 * errs[1], "u0={u0}: {errs:?}");
    }
}

#[test]
fn tail_fraction_shrinks_with_truncation_radius() {
    let spec = CurvatureSpec::sign_changing(1.0).unwrap();
    let shot = solve_for_lambda(&spec, 3.5 * PI, &IntegratorControls::default(), &SolverOptions::default()).unwrap();
    let fractions: Vec<f64> = [1e4, 1e5, 1e6]
        .iter()
        .map(|&r| {
            let fit = FarFieldFit::anchored(&shot.profile, r).unwrap();
            pohozaev_quantities_at(&shot.profile, &fit, r).unwrap().tail_fraction
        })
        .collect();
    assert!(fractions[0] > fractions[1] && fractions[1] > fractions[2], "{fractions:?}");
}

#[test]
fn blowup_sequence_is_monotone() {
    let targets = [3.6 * PI, 3.8 * PI, 3.9 * PI, 3.95 * PI];
    let out = blowup_sweep(1.0, &targets, &IntegratorControls::default(), 10.0, 0.1).unwrap();
    for pair in out.windows(2) {
        let (a, b) = (&pair[0].diagnostics, &pair[1].diagnostics);
        assert!(b.u0 >= a.u0 - 1e-6);
        assert!(b.mu <= a.mu + 1e-6);
        assert!(b.sup_dist <= a.sup_dist + 1e-6);
        assert!(b.mass_in_delta >= a.mass_in_delta - 1e-6);
    }
}

#[test]
fn kelvin_transform_settles_on_far_field_constant() {
    let spec = CurvatureSpec::sign_changing(1.0).unwrap();
    let shot = solve_for_lambda(&spec, 3.5 * PI, &IntegratorControls::default(), &SolverOptions::default()).unwrap();
    let lam = shot.lambda_hat.unwrap();
    let fit = farfield_fit(&shot.profile, (1e3, 1e6)).unwrap();
    let vals: Vec<f64> = kelvin_transform(&shot.profile, lam, &[1e-1, 1e-2, 1e-3, 1e-4])
        .unwrap()
        .into_iter()
        .map(|(_, u)| u)
        .collect();
    let steps: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(steps.windows(2).all(|s| s[1] < s[0]), "{vals:?}");
    assert!((vals[3] - fit.c).abs() <= 0.01 * fit.c.abs(), "{vals:?} vs {}", fit.c);
}
