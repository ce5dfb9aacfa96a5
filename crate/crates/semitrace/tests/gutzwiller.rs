mod common;

use std::f64::consts::{PI, SQRT_2};

use common::poisson;
use num_complex::Complex64;
use semitrace::gutzwiller::*;
use semitrace::heatkernel::{arithmetic_progression, eta_arithmetic_progression, scale_spectrum};
use semitrace::landau::{model_spectrum, ModelParams};
use semitrace::quad::{integrate, Tolerance};
use semitrace::symplectic::OrbitRecord;
use semitrace::Error;

fn f_bump() -> Profile {
    Profile::Bump(Bump::new(0.0, 0.0, 1.2).unwrap())
}

fn window(theta: Bump, lambda: f64) -> Window {
    Window::new(f_bump(), theta, lambda).unwrap()
}

fn chi() -> Bump {
    Bump::new(0.0, 0.5, 1.5).unwrap()
}

fn elliptic() -> ModelGeometry {
    ModelGeometry::new(1.0, 1.0, vec![SQRT_2], vec![1.0]).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn circle_eigenvalues_hit_zero() {
    let g = ModelGeometry::circle(1.0, 2.0 * PI).unwrap();
    let spec = model_eigenvalues(&g, 0.1, &Cutoffs::new(3.0, None)).unwrap();
    let zero = spec.lines.iter().find(|l| l.k == -10).unwrap();
    assert!(zero.value.abs() < 1e-14);
    for pair in spec.lines.windows(2) {
        assert!((pair[1].value - pair[0].value - 2.0 * PI * 0.1).abs() < 1e-12);
    }
}

#[test]
fn spacing_scales_with_period() {
    let g = ModelGeometry::circle(2.5, 1.0).unwrap();
    let spec = model_eigenvalues(&g, 0.03, &Cutoffs::new(1.0, None)).unwrap();
    assert!(spec.lines.len() > 20);
    for pair in spec.lines.windows(2) {
        assert!((pair[1].value - pair[0].value - 2.0 * PI * 0.03 / 2.5).abs() < 1e-12);
    }
    assert!(spec.lines.iter().all(|l| l.value.abs() <= 1.0));
}

#[test]
fn one_block_ground_level() {
    let g = ModelGeometry::new(1.0, 1.0, vec![1.0], vec![]).unwrap();
    let spec = model_eigenvalues(&g, 0.01, &Cutoffs::new(1.1, Some(chi()))).unwrap();
    let l = spec.lines.iter().find(|l| l.k == 0 && l.n == vec![0]).unwrap();
    assert!((l.value + 1.005).abs() < 1e-14);
    assert_eq!(l.weight, 1.0);
}

#[test]
fn blocks_require_transverse_cutoff() {
    let g = elliptic();
    assert!(matches!(model_eigenvalues(&g, 0.01, &Cutoffs::new(0.2, None)), Err(Error::InvalidParameter { .. })));
}

#[test]
fn enumeration_bound_is_enforced() {
    let g = ModelGeometry::circle(1.0, 1.0).unwrap();
    let mut cut = Cutoffs::new(100.0, None);
    cut.bound = 10;
    assert!(matches!(model_eigenvalues(&g, 0.01, &cut), Err(Error::EnumerationBound { bound: 10 })));
}

#[test]
fn resonant_angle_is_refused() {
    let err = ModelGeometry::new(1.0, 1.0, vec![PI], vec![1.0]).unwrap_err();
    assert_eq!(err.code(), "ResonantModel");
    let raw = ModelGeometry { l_gamma: 1.0, t_gamma: 1.0, betas: vec![PI], mu: vec![1.0] };
    let w = window(Bump::new(0.0, 0.4, 1.6).unwrap(), 0.3);
    let opts = CompareOptions { order: AmplitudeOrder::Leading, transverse: Some(chi()) };
    assert!(matches!(trace_compare(&raw, &w, &[0.05], &opts), Err(Error::ResonantModel { .. })));
}

#[test]
fn check_at_zero_is_mean() {
    let t = Bump::new(0.3, 0.4, 1.6).unwrap();
    let tol = Tolerance { abs: 1e-15, rel: 1e-14, max_intervals: 4000 };
    let direct = integrate(|x| t.eval(x), -1.3, 1.9, tol).unwrap().value;
    assert!((t.check(0.0).unwrap().re - direct / (2.0 * PI)).abs() < 1e-10);
    assert!(t.check(0.0).unwrap().im.abs() < 1e-15);
}

#[test]
fn check_matches_direct_transform() {
    let t = Bump::new(-0.7, 0.2, 1.1).unwrap();
    let tol = Tolerance { abs: 1e-15, rel: 1e-13, max_intervals: 4000 };
    for &y in &[0.5, 3.0, 17.0] {
        let re = integrate(|x| t.eval(x) * (x * y).cos(), -1.8, 0.4, tol).unwrap().value;
        let im = integrate(|x| t.eval(x) * (x * y).sin(), -1.8, 0.4, tol).unwrap().value;
        let got = t.check(y).unwrap() * (2.0 * PI);
        assert!((got - Complex64::new(re, im)).norm() < 1e-11, "y = {y}");
    }
}

#[test]
fn plancherel_holds() {
    let t = Bump::new(0.0, 0.4, 1.6).unwrap();
    let tol = Tolerance { abs: 1e-15, rel: 1e-14, max_intervals: 4000 };
    let l2 = integrate(|x| t.eval(x).powi(2), -1.6, 1.6, tol).unwrap().value;
    let got = t.check_l2(400.0).unwrap();
    assert!((got - l2 / (2.0 * PI)).abs() < 1e-8, "{got} vs {}", l2 / (2.0 * PI));
}

#[test]
fn sampled_profile_interpolates() {
    let mut vals: Vec<f64> = (0..=20).map(|i| (PI * i as f64 / 20.0).sin().powi(3)).collect();
    vals[20] = 0.0;
    let p = Profile::sampled(-1.0, 0.1, vals.clone()).unwrap();
    for (i, v) in vals.iter().enumerate() {
        assert!((p.eval(-1.0 + 0.1 * i as f64) - v).abs() < 1e-12);
    }
    assert_eq!(p.eval(-1.01), 0.0);
    assert_eq!(p.eval(1.01), 0.0);
    assert!((p.eval(0.05) - (PI * 10.5 / 20.0).sin().powi(3)).abs() < 1e-3);
    assert!(Profile::sampled(0.0, 0.1, vec![1.0, 2.0, 0.0]).is_err());
}

#[test]
fn vanishing_test_function_gives_zero() {
    let g = ModelGeometry::circle(1.0, 1.0).unwrap();
    let w = Window::new(Profile::Bump(Bump::new(5.0, 0.0, 0.5).unwrap()), Bump::new(0.0, 0.4, 1.6).unwrap(), 0.0).unwrap();
    let mut spec = model_eigenvalues(&g, 0.02, &Cutoffs::new(0.5, None)).unwrap();
    spec.covered = (-1.0, 1.0);
    assert_eq!(spectral_side(&spec, &w, 0.02).unwrap(), Complex64::new(0.0, 0.0));
}

#[test]
fn single_line_is_check_at_zero() {
    let h: f64 = 0.04;
    let lam = 0.5;
    let t = Bump::new(0.0, 0.4, 1.6).unwrap();
    let w = Window::new(Profile::Bump(Bump::new(lam, 0.1, 0.6).unwrap()), t, lam).unwrap();
    let spec = ModelSpectrum {
        lines: vec![SpectralLine { value: lam * h.sqrt(), weight: 1.0, k: 0, n: vec![] }],
        covered: (-1.0, 1.0),
    };
    let got = spectral_side(&spec, &w, h).unwrap();
    let want = t.check(0.0).unwrap() / h;
    assert!((got - want).norm() < 1e-13 * want.norm());
}

#[test]
fn short_spectrum_is_rejected() {
    let g = ModelGeometry::circle(1.0, 1.0).unwrap();
    let w = window(Bump::new(0.0, 0.4, 1.6).unwrap(), 0.0);
    let spec = model_eigenvalues(&g, 0.02, &Cutoffs::new(0.05, None)).unwrap();
    match spectral_side(&spec, &w, 0.02) {
        Err(Error::InsufficientCoverage { tail }) => assert!(tail > 1e-10),
        other => panic!("{other:?}"),
    }
}

#[test]
fn landau_lines_are_accepted() {
    let p = ModelParams::new(vec![1.0], 0.04).unwrap();
    let lines = model_spectrum(&p, 0.3).unwrap();
    let spec = ModelSpectrum::from_eigenlines(&lines, (-0.3, 0.3));
    let w = Window::new(Profile::Bump(Bump::new(0.0, 0.0, 1.4).unwrap()), Bump::new(0.0, 0.4, 1.6).unwrap(), 0.0).unwrap();
    let got = spectral_side(&spec, &w, 0.04).unwrap();
    let zero = Bump::new(0.0, 0.4, 1.6).unwrap().check(0.0).unwrap() / 0.04;
    let mut want = zero;
    for l in &lines {
        if l.value != 0.0 {
            let fv = w.f.eval(l.value / 0.2);
            want += w.theta.check(-l.value / 0.04).unwrap() * (fv * l.multiplicity as f64 / 0.04);
        }
    }
    assert!((got - want).norm() < 1e-12 * want.norm());
}

#[test]
fn circle_spectral_side_matches_poisson() {
    let g = ModelGeometry::circle(1.0, 1.0).unwrap();
    let w = window(Bump::new(0.0, 0.4, 1.6).unwrap(), 0.3);
    let h = 0.02;
    let (a, b) = w.f.support();
    let spec = model_eigenvalues(&g, h, &Cutoffs::new(h.sqrt() * a.abs().max(b.abs()) + 0.2, None)).unwrap();
    let got = spectral_side(&spec, &w, h).unwrap();
    let want = poisson::spectral(&g, &w, None, h, 60);
    assert!(rel(got, want) < 1e-6, "{got} vs {want}");
}

#[test]
fn elliptic_spectral_side_matches_poisson() {
    let g = elliptic();
    let w = window(Bump::new(0.0, 0.4, 1.6).unwrap(), 0.3);
    let h = 0.05;
    let spec = model_eigenvalues(&g, h, &Cutoffs::new(h.sqrt() * 1.2 + 0.4, Some(chi()))).unwrap();
    let got = spectral_side(&spec, &w, h).unwrap();
    let want = poisson::spectral(&g, &w, Some(&chi()), h, 60);
    assert!(rel(got, want) < 1e-8, "{got} vs {want}");
}

#[test]
fn weighted_transform_matches_fourier_route() {
    let w = window(Bump::new(0.0, 0.4, 1.6).unwrap(), 0.3);
    for &(s, h) in &[(0.0, 0.05), (1.0, 0.02), (-1.0, 0.05), (2.5, 0.05)] {
        let got = w.weighted_transform(s, h).unwrap();
        let want = poisson::weighted(&w, s, h);
        assert!((got - want).norm() < 1e-10, "s = {s}: {got} vs {want}");
    }
}

#[test]
fn transform_table_matches_adaptive() {
    let w = window(Bump::new(0.2, 0.4, 1.6).unwrap(), -0.4);
    let h = 0.02;
    let table = w.weights(AmplitudeOrder::Resummed, h, 12.0).unwrap();
    for &s in &[0.0, 0.9, -1.7, 6.0, 11.5] {
        let got = table.at(s).unwrap();
        let want = w.weighted_transform(s, h).unwrap();
        assert!((got - want).norm() < 1e-12, "s = {s}: {got} vs {want}");
    }
}

#[test]
fn weighted_transform_tends_to_leading_weight() {
    let w = window(Bump::new(0.0, 0.4, 1.6).unwrap(), 0.3);
    let lead = w.f.eval(0.3) * w.theta.eval(1.0);
    let e1 = (w.weighted_transform(1.0, 1e-2).unwrap() - lead).norm();
    let e2 = (w.weighted_transform(1.0, 1e-4).unwrap() - lead).norm();
    assert!(e2 < e1 / 5.0, "{e1} {e2}");
}

#[test]
fn elliptic_amplitude() {
    let beta = SQRT_2;
    let o = OrbitRecord::new(1.0, 1.3, 1, elliptic().decomposition()).unwrap();
    let lead = 1.3 / (2.0 * PI) * o.amplitude;
    assert!((lead - 1.3 / (2.0 * PI) / (2.0 * (beta / 2.0).sin().abs())).abs() < 1e-14);
    let t = Bump::new(1.3, 0.2, 0.6).unwrap();
    let w = window(t, 0.0);
    let h = 0.1;
    let term = orbit_term(&o, &w.weights(AmplitudeOrder::Leading, h, 0.0).unwrap(), h).unwrap();
    let want = Complex64::from_polar(1.0, 1.0 / h + 0.5 * PI * o.maslov as f64) * (w.f.eval(0.0) * lead / h);
    assert!((term - want).norm() < 1e-13);
}

#[test]
fn circle_amplitude_per_iterate() {
    let g = ModelGeometry::circle(0.8, 0.5).unwrap();
    let t = Bump::new(0.0, 2.0, 3.0).unwrap();
    let w = window(t, 0.0);
    let h = 0.05;
    for o in g.orbits(3.0).unwrap() {
        assert_eq!(o.maslov, 0);
        assert_eq!(o.amplitude, 1.0);
        let term = orbit_term(&o, &w.weights(AmplitudeOrder::Leading, h, 0.0).unwrap(), h).unwrap();
        let th = w.theta.eval(o.length());
        let want = Complex64::new(2.0 * (o.period() / h).cos(), 0.0) * (0.8 / (2.0 * PI) * th / h);
        assert!((term - want).norm() < 1e-12);
    }
}

#[test]
fn window_away_from_orbits_leaves_local_term() {
    let g = elliptic();
    let w = window(Bump::new(0.0, 0.3, 0.9).unwrap(), 0.2);
    let orbits = g.orbits(0.95).unwrap();
    assert!(orbits.is_empty());
    let far = window(Bump::new(1.5, 0.1, 0.4).unwrap(), 0.2);
    let orbits = g.orbits(2.0).unwrap();
    let side = geometric_side(&orbits, |_| Ok(Complex64::new(7.0, 0.0)), &far, 0.05, AmplitudeOrder::Leading).unwrap();
    assert!(side.dynamical.norm() < 1e-10);
    assert_eq!(side.local, Complex64::new(7.0, 0.0));
    let side = geometric_side(&[], |_| Ok(Complex64::new(1.0, 0.0)), &w, 0.05, AmplitudeOrder::Leading).unwrap();
    assert_eq!(side.dynamical, Complex64::new(0.0, 0.0));
}

#[test]
fn missing_iterate_is_reported() {
    let g = elliptic();
    let w = window(Bump::new(0.0, 1.0, 2.6).unwrap(), 0.2);
    let mut orbits = g.orbits(2.6).unwrap();
    orbits.remove(1);
    match geometric_side(&orbits, |_| Ok(Complex64::new(0.0, 0.0)), &w, 0.05, AmplitudeOrder::Leading) {
        Err(Error::MissingOrbitCoverage { length }) => assert!((length - 2.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn degenerate_iterate_is_reported() {
    let raw = ModelGeometry { l_gamma: 1.0, t_gamma: 1.0, betas: vec![PI], mu: vec![] };
    assert!(matches!(raw.orbits(2.5), Err(Error::DegenerateIterate { ell: 2 })));
}

#[test]
fn support_must_fit_below_first_landau_level() {
    let g = elliptic();
    let w = Window::new(Profile::Bump(Bump::new(0.0, 0.0, 1.5).unwrap()), Bump::new(0.0, 0.4, 1.6).unwrap(), 0.0).unwrap();
    assert!(w.validate_for(&g.mu).is_err());
    assert!(w.validate_for(&[]).is_ok());
}

#[test]
fn circle_trace_is_exact() {
    let g = ModelGeometry::circle(1.0, 1.0).unwrap();
    let w = window(Bump::new(0.0, 0.4, 1.6).unwrap(), 0.3);
    let opts = CompareOptions { order: AmplitudeOrder::Resummed, transverse: None };
    let rep = trace_compare(&g, &w, &[0.05, 0.02, 0.01], &opts).unwrap();
    for r in &rep.rows {
        assert!(r.rel_err < 1e-10, "h = {}: {}", r.h, r.rel_err);
    }
}

#[test]
fn elliptic_resummed_trace_is_close() {
    let g = elliptic();
    let w = window(Bump::new(0.0, 0.4, 1.6).unwrap(), 0.3);
    let opts = CompareOptions { order: AmplitudeOrder::Resummed, transverse: Some(chi()) };
    let rep = trace_compare(&g, &w, &[0.02], &opts).unwrap();
    assert!(rep.rows[0].rel_err < 1e-6, "{:?}", rep.rows[0]);
}

#[test]
fn elliptic_leading_error_decays() {
    let g = elliptic();
    let w = window(Bump::new(0.0, 0.4, 1.6).unwrap(), 0.3);
    let opts = CompareOptions { order: AmplitudeOrder::Leading, transverse: Some(chi()) };
    let rep = trace_compare(&g, &w, &[0.05, 0.02, 0.01], &opts).unwrap();
    let fit = rep.fit.unwrap();
    assert!(fit.slope >= 0.4, "{fit:?} {:?}", rep.rows);
    assert!(rep.rows.windows(2).all(|p| p[1].rel_err < p[0].rel_err));
}

#[test]
fn loglog_fit_recovers_power() {
    let xs = [0.1, 0.05, 0.01];
    let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
    let fit = loglog_fit(&xs, &ys).unwrap();
    assert!((fit.slope - 1.5).abs() < 1e-12);
    assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    assert!(loglog_fit(&xs, &[1.0, 0.0, 1.0]).is_none());
}

#[test]
fn local_coefficient_is_even() {
    let g = ModelGeometry::new(6.0, 1.0, vec![SQRT_2], vec![1.0]).unwrap();
    let t = Bump::new(0.0, 2.0, 3.0).unwrap();
    let f = Profile::Bump(Bump::new(0.0, 0.2, 1.3).unwrap());
    for &lam in &[0.2, 0.5, 0.8] {
        let plus = extract_u0(&g, &Window::new(f.clone(), t, lam).unwrap(), Some(&chi()), 0.005).unwrap();
        let minus = extract_u0(&g, &Window::new(f.clone(), t, -lam).unwrap(), Some(&chi()), 0.005).unwrap();
        assert!((plus - minus).abs() < 1e-6 * plus.abs(), "{lam}: {plus} {minus}");
        let c = 0.5 * chi().integral().unwrap();
        assert!((plus - 6.0 * c / (2.0 * PI)).abs() < 1e-4 * plus, "{plus}");
    }
}

#[test]
fn symmetric_spectrum_has_zero_eta() {
    let p = ModelParams::new(vec![1.0, 1.7], 0.05).unwrap();
    let samples: Vec<_> = [0.1, 0.05, 0.02]
        .iter()
        .map(|&h| {
            let p = ModelParams::new(p.mu.clone(), h).unwrap();
            (h, 0.1, model_spectrum(&p, 1.0).unwrap())
        })
        .collect();
    let rep = eta_limit_check(2, &samples, Some(0.0), 1e-12).unwrap();
    assert!(rep.rows.iter().all(|r| r.smoothed == 0.0 && r.sign_sum == 0.0));
    assert_eq!(rep.limit, 0.0);
    assert!(rep.converged);
}

#[test]
fn circle_eta_matches_hurwitz() {
    let g = ModelGeometry::circle(1.0, 0.7).unwrap();
    let k = 4000.0;
    for &h in &[0.05, 0.02, 0.01] {
        let (a, b) = circle_progression(&g, h).unwrap();
        let spec = model_eigenvalues(&g, h, &Cutoffs::new(a * k, None)).unwrap();
        let lines = arithmetic_progression(a, b, 0);
        let mut eig = Vec::new();
        for l in &spec.lines {
            let mut e = lines[0].clone();
            e.value = l.value;
            eig.push(e);
        }
        let rep = eta_limit_check(0, &[(h, 8.0 / (a * k), eig)], None, 1.0).unwrap();
        let want = eta_arithmetic_progression(a, b).unwrap();
        assert!((rep.rows[0].scaled - want).abs() < 1e-6, "h = {h}: {} vs {want}", rep.rows[0].scaled);
    }
}

#[test]
fn sign_sum_is_scale_invariant() {
    let lines = arithmetic_progression(0.3, 0.11, 50);
    let base = eta_limit_check(0, &[(1.0, 0.01, lines.clone())], None, 1.0).unwrap().rows[0].sign_sum;
    for &c in &[0.5, 2.0] {
        let scaled = scale_spectrum(&lines, c);
        let s = eta_limit_check(0, &[(1.0, 0.01, scaled)], None, 1.0).unwrap().rows[0].sign_sum;
        assert_eq!(s, base);
    }
}

#[test]
fn diverging_sequence_is_flagged() {
    let lines = |n: i64| arithmetic_progression(1.0, 0.5, n);
    let samples = vec![(0.1, 1e-6, lines(3)), (0.05, 1e-6, lines(30)), (0.02, 1e-6, lines(300))];
    let biased: Vec<_> = samples
        .into_iter()
        .enumerate()
        .map(|(i, (h, e, mut l))| {
            l.truncate(l.len() - 2 * i);
            (h, e, l)
        })
        .collect();
    let rep = eta_limit_check(0, &biased, None, 1e-6).unwrap();
    assert!(!rep.converged);
}

#[test]
fn volume_limit_formula() {
    assert_eq!(metric_contact_eta_limit(0, 5.0), 0.0);
    assert!((metric_contact_eta_limit(1, 2.0) + 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
}
