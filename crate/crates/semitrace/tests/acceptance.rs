mod common;

use std::f64::consts::{PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semitrace::clifford::{self as cl, Orientation, SpinMatrix, C64};
use semitrace::gutzwiller as gz;
use semitrace::heatkernel as hk;
use semitrace::landau;
use semitrace::symplectic as sp;
use semitrace::symplectic::{BlockDecomposition, Quadratic};
use semitrace::weylseries::*;

use common::{moment_grid, moment_oracle, rel_err, sinh_oracle};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn clifford_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut traces = Vec::new();
    for m in 1..=3 {
        let g = cl::gammas(m);
        let id = SpinMatrix::identity(m);
        for i in 0..=2 * m {
            for j in 0..=2 * m {
                let ac = g[i].mul(&g[j]).add(&g[j].mul(&g[i]));
                let want = if i == j { id.scale(real(-2.0)) } else { SpinMatrix::zeros(m) };
                ensure!(ac == want, "m={m}: {{γ{i}, γ{j}}} not exact");
            }
            ensure!(g[i].adjoint() == g[i].scale(real(-1.0)), "m={m}: γ{i} not skew-adjoint");
            worst = worst.max(g[i].adjoint().mul(&g[i]).distance(&id));
        }
        let mut prod = g[0].clone();
        for j in 1..=m {
            prod = prod.mul(&g[j]).mul(&g[j + m]);
        }
        let want = real(2f64.powi(m as i32)) / cl::i_pow(m as i64 + 1);
        ensure!(prod.trace() == want, "m={m}: trace {} vs {want}", prod.trace());
        traces.push(format!("{}", cl::sequential_volume(m).trace()));
        let n = 2 * m + 1;
        for mask in 0u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let k = idx.len() as i64;
            let w = cl::ExteriorElement::basis(m, &idx).map_err(|e| e.to_string())?;
            let lhs = cl::clifford_quantize(&w.hodge_star(Orientation::SpinCompatible), m).map_err(|e| e.to_string())?;
            let sign = if (k * (k + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let cw = cl::clifford_quantize(&w, m).map_err(|e| e.to_string())?;
            let rhs = cw.scale(cl::i_pow(m as i64 + 1) * sign);
            worst = worst.max(lhs.distance(&rhs));
            worst = worst.max(cw.adjoint().distance(&cw.scale(real(sign))));
        }
    }
    ensure!(worst < 1e-12, "Hodge/adjoint residual {worst:.3e}");
    Ok(format!(
        "anticommutators and paired-order traces exact, Hodge/adjoint residual {worst:.1e}, index-order traces [{}]",
        traces.join(", ")
    ))
}

fn lemma_residual() -> Outcome {
    let rho = 0.1;
    let bound = (8.0 / rho as f64).sqrt();
    let (mut worst, mut amax): (f64, f64) = (0.0, 0.0);
    for m in 1..=2 {
        let dir: Vec<f64> = (1..=2 * m).map(|j| (j as f64 * 0.7).sin() + 0.3).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..20 {
            let th0 = -1.0 + 2.0 * i as f64 / 19.0;
            let tail = (1.0 - th0 * th0).max(0.0).sqrt();
            let mut theta = vec![th0];
            theta.extend(dir.iter().map(|x| x * tail / norm));
            for j in 0..20 {
                let t = j as f64 / 19.0;
                let d = cl::almost_diagonalizer(&theta, t, rho).map_err(|e| e.to_string())?;
                let lhs = d.v.adjoint().mul(&cl::c_vector(&theta)).mul(&d.v);
                worst = worst.max(lhs.distance(&cl::diagonal_model(&theta, d.a0, d.a1)));
                ensure!(d.v.is_unitary(1e-12), "v not unitary at θ0={th0}, t={t}");
                amax = amax.max(d.a0.abs()).max(d.a1.abs());
            }
        }
    }
    ensure!(worst <= 1e-10, "residual {worst:.3e}");
    ensure!(amax <= bound, "max |a_j| = {amax} exceeds {bound}");
    Ok(format!("residual {worst:.1e}, max |a_j| {amax:.3} <= {bound:.3}"))
}

fn landau_oracle() -> Outcome {
    let cut = 40;
    let mut lines = 0;
    for mu in [vec![1.0], vec![0.6, 1.1]] {
        for h in [0.1, 0.04, 0.01] {
            let p = landau::ModelParams::new(mu.clone(), h).map_err(|e| e.to_string())?;
            let safe = landau::safe_cutoff(&p, cut) - 1e-8;
            let eigs = landau::truncated_eigen(&p, cut, landau::Pairing::ComplexPairs).map_err(|e| e.to_string())?;
            let got = landau::clustered_truncated_spectrum(&eigs, safe, 1e-9);
            let mut want: Vec<(f64, u64)> = Vec::new();
            for l in landau::model_spectrum(&p, safe).map_err(|e| e.to_string())? {
                match want.last_mut() {
                    Some((v, n)) if (l.value - *v).abs() <= 1e-12 => *n += l.multiplicity,
                    _ if l.value.abs() < safe => want.push((l.value, l.multiplicity)),
                    _ => {}
                }
            }
            ensure!(got.len() == want.len(), "m={} h={h}: {} lines vs {}", mu.len(), got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                ensure!((g.0 - w.0).abs() < 1e-8, "m={} h={h}: {} vs {}", mu.len(), g.0, w.0);
                ensure!(g.1 == w.1, "m={} h={h}: multiplicity {} vs {} at {}", mu.len(), g.1, w.1, w.0);
            }
            lines += want.len();
        }
    }
    Ok(format!("{lines} lines matched with multiplicities"))
}

fn integral_tables() -> Outcome {
    let grid = moment_grid();
    let mut worst: f64 = 0.0;
    for &(mu, s, t) in &grid {
        for kind in [hk::MomentKind::Const, hk::MomentKind::X2, hk::MomentKind::X2X2, hk::MomentKind::X4] {
            let closed = hk::gaussian_moment(kind, 1, 2, s, t, &[mu]).map_err(|e| e.to_string())?;
            worst = worst.max(rel_err(closed, moment_oracle(kind, s, t, mu)));
        }
        for kind in 1..=4u8 {
            let closed = hk::sinh_integral(kind, mu, t).map_err(|e| e.to_string())?;
            worst = worst.max(rel_err(closed, sinh_oracle(kind, mu, t)));
        }
    }
    ensure!(worst < 1e-8, "worst relative error {worst:.3e}");
    Ok(format!("{} grid points, worst relative error {worst:.1e}", grid.len()))
}

fn random_jet(rng: &mut ChaCha8Rng, m: usize) -> hk::JetData {
    let mu: Vec<f64> = (0..m).map(|_| rng.gen_range(0.4..2.5)).collect();
    let mut jet = hk::JetData::zeros(mu);
    let n = 2 * m + 1;
    for j in 0..n {
        for k in 0..j {
            for l in 0..n {
                jet.set_antisymmetric(j, k, l, rng.gen_range(-1.0..1.0));
            }
        }
    }
    jet
}

fn u1_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for (m, t, order) in [(1, 0.8, 14), (1, 0.3, 14), (1, 2.0, 14), (2, 0.5, 6)] {
        let jet = random_jet(&mut rng, m);
        worst = worst.max(hk::u1_even_functional(&jet, t, order).map_err(|e| e.to_string())?.abs());
    }
    ensure!(worst < 1e-10, "even part {worst:.3e}");
    let closed = hk::master_integral_closed();
    ensure!((closed - 1.0).abs() < 1e-6, "closed form {closed}");
    let quad = hk::master_integral_quadrature(60.0).map_err(|e| e.to_string())?;
    ensure!((quad - 1.0).abs() < 1e-6, "quadrature {quad}");
    let d = 1e-4;
    for u in [0.05, 0.5, 3.0] {
        let deriv = (hk::master_antiderivative(u + d) - hk::master_antiderivative(u - d)) / (2.0 * d);
        ensure!((deriv - hk::master_integrand(u)).abs() < 1e-7, "antiderivative mismatch at {u}");
    }
    Ok(format!("even part {worst:.1e}, master integral {quad:.10}"))
}

fn symplectic_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let m = 1 + case % 3;
        let d = common::symp::random_decomposition(m, &mut rng);
        let p = sp::assemble_normal_form(&d).map_err(|e| e.to_string())?;
        let s = common::symp::random_symplectic(m, 0.3, &mut rng);
        let conj = &s * &p * sp::symplectic_inverse(&s);
        let got = sp::classify_return_map(&sp::SymplecticMatrix::new(conj.clone()).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let dist = got.distance(&d).ok_or_else(|| format!("case {case}: block counts differ"))?;
        worst = worst.max(dist);
        for ell in 1..=3 {
            let Ok(block) = sp::det_one_minus_signed(&d, ell) else { continue };
            let direct = (DMatrix::identity(2 * m, 2 * m) - conj.pow(ell as u32)).determinant();
            ensure!((block - direct).abs() <= 1e-10 * direct.abs().max(1.0), "det {block} vs {direct}");
        }
    }
    ensure!(worst < 1e-8, "round trip distance {worst:.3e}");
    let mut planted = 0;
    while planted < 200 {
        let c1 = rng.gen_range(1i64..=50);
        let c0 = rng.gen_range(-50i64..=50);
        let b1 = rng.gen_range(0.2..6.0);
        let c2 = rng.gen_range(1i64..=50);
        let b2 = -(c0 as f64 * 2.0 * PI + c1 as f64 * b1) / c2 as f64;
        if !(b2 > 0.0 && b2 < 2.0 * PI) {
            continue;
        }
        let d = BlockDecomposition { elliptic: vec![b1, b2], ..Default::default() };
        let cert = sp::check_nonresonant(&d, 50, 1e-9).map_err(|e| e.to_string())?;
        ensure!(!cert.is_certified(), "missed relation ({c0}, {c1}, {c2})");
        planted += 1;
    }
    for case in 0..200 {
        let n = 2 + case % 3;
        let c: Vec<i64> = (0..n)
            .map(|i| {
                let x = rng.gen_range(-50i64..=50);
                if i == n - 1 && x == 0 { 7 } else { x }
            })
            .collect();
        let mut v: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.1..3.0)).collect();
        let partial: f64 = c.iter().zip(&v).map(|(&a, &b)| a as f64 * b).sum();
        v.push(-partial / c[n - 1] as f64);
        ensure!(sp::find_integer_relation(&v, 50, 1e-9).is_some(), "missed planted relation {c:?}");
    }
    Ok(format!("200 conjugated round trips within {worst:.1e}, 400 planted relations detected"))
}

fn points(m: usize, radius: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..2 * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let r = radius * rng.gen_range(0.2..1.0);
            v.iter().map(|x| x * r / n).collect()
        })
        .collect()
}

fn reeb_flow() -> Outcome {
    let d = BlockDecomposition {
        elliptic: vec![SQRT_2],
        neg_hyp: vec![0.4],
        loxodromic: vec![(0.3, 0.8)],
        pos_hyp: vec![],
    };
    let mut spec = sp::ContactModelSpec::from_decomposition(&d, 2.5).map_err(|e| e.to_string())?;
    spec.phi_plus.terms.push((0.7, vec![0, 0]));
    spec.phi_plus.terms.push((-0.4, vec![1, 2]));
    spec.phi_plus.terms.push((0.3, vec![0, 3]));
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut map_err, mut time_err): (f64, f64) = (0.0, 0.0);
    for x in points(4, 0.1, 6, &mut rng) {
        let f = sp::model_reeb_flow(&spec, &x, 1000).map_err(|e| e.to_string())?;
        let (z, t) = spec.exact_return(&x);
        map_err = f.point.iter().zip(&z).map(|(a, b)| (a - b).abs()).fold(map_err, f64::max);
        time_err = time_err.max((f.return_time - t).abs()).max((t - spec.return_time_formula(&x)).abs());
    }
    ensure!(map_err < 1e-6, "return map error {map_err:.3e}");
    ensure!(time_err < 1e-6, "return time error {time_err:.3e}");
    let r = sp::return_map_relation_check(&spec, &points(4, 0.1, 4, &mut rng), 1000).map_err(|e| e.to_string())?;
    let lin = BlockDecomposition { elliptic: vec![1.3], ..Default::default() };
    let lin = sp::ContactModelSpec::from_decomposition(&lin, 1.0).map_err(|e| e.to_string())?;
    let r = r.max(sp::return_map_relation_check(&lin, &points(1, 0.1, 10, &mut rng), 1000).map_err(|e| e.to_string())?);
    ensure!(r < 1e-5, "relation residual {r:.3e}");
    Ok(format!("map {map_err:.1e}, time {time_err:.1e}, relation {r:.1e}"))
}

type Q = QSqrt2;

fn q(p: i64, r: i64) -> Q {
    Q::rational(p, r)
}

fn exact_model(m: usize, with_blocks: bool) -> Result<WeylModel<Q>, String> {
    let sqrt_mu = [q(1, 1), q(1, 2)][..m].to_vec();
    let mut blocks = Vec::new();
    if with_blocks {
        blocks.push((q(1, 3), Quadratic::Elliptic(1)));
        if m > 1 {
            blocks.push((q(2, 5), Quadratic::Hyperbolic(2)));
        }
    }
    WeylModel::new(sqrt_mu, q(1, 2), blocks).map_err(|e| e.to_string())
}

fn random_series(rng: &mut ChaCha8Rng, m: usize, trunc: usize, lo: usize, hi: usize, terms: usize) -> Series<Q> {
    let mut s = Series::zero(m, trunc);
    for _ in 0..terms {
        let w = rng.gen_range(lo..=hi);
        let monos = monomials_of_weight(m, w);
        let k = monos[rng.gen_range(0..monos.len())].clone();
        s.add_term(k, Q::gaussian(rng.gen_range(-3..=3), rng.gen_range(-2..=2)));
    }
    s
}

fn conjugated_symbol<S: Scalar>(rng: &mut ChaCha8Rng, model: &WeylModel<S>, t: usize) -> Result<KoszulElement<S>, String> {
    let alg = &model.algebra;
    let r = |p: i64, q: i64| S::rational(p, q);
    let eta = normal_form_harmonics(model, &model_symbol(model, t), 2).map_err(|e| e.to_string())?;
    let start = model_symbol(model, t).plus(&eta[0].scaled(&r(1, 2)));
    let mut f = Series::zero(1, t);
    for k in monomials_of_weight(1, 3).into_iter().filter(|k| k.primed_order() >= 1) {
        if rng.gen_bool(0.15) {
            f.add_term(k, r(rng.gen_range(-2..=2), 3));
        }
    }
    let mut a = KoszulElement::zero(1, t);
    a.add(&[1, 2], &Series::monomial(1, t, Monomial::var(1, Slot::X2(1), 2), r(1, 5))).map_err(|e| e.to_string())?;
    a.add(&[0, 1], &Series::monomial(1, t, Monomial::var(1, Slot::Xi1(1), 2), r(-1, 7))).map_err(|e| e.to_string())?;
    let conj = alg.conjugate(&c0_series(&start), &Generator::Scalar(f));
    let conj = alg.conjugate(&conj, &Generator::Matrix(c0_series(&a)));
    Ok(forms_from_spin(&conj, true))
}

fn weyl_normal_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut products = 0;
    for m in 1..=2 {
        for with_blocks in [false, true] {
            let model = exact_model(m, with_blocks)?;
            for _ in 0..15 {
                let (n1, n2) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
                let a = random_series(&mut rng, m, 7, n1, n1 + 1, 3);
                let b = random_series(&mut rng, m, 7, n2, n2 + 1, 3);
                let p = model.algebra.star(&a, &b).map_err(|e| e.to_string())?;
                ensure!(p.min_weight().map_or(true, |w| w >= n1 + n2), "star product below weight {}", n1 + n2);
                let c = model.algebra.commutator(&a, &b).map_err(|e| e.to_string())?;
                for k in c.terms.keys() {
                    ensure!(k.get(Slot::H) >= 1 && k.weight() >= n1 + n2, "commutator term {k:?} out of filtration");
                }
                products += 1;
            }
        }
    }
    let model = exact_model(1, false)?;
    for _ in 0..5 {
        let mut e = KoszulElement::zero(1, 3);
        for subset in [[0usize], [1], [2]] {
            e.add(&subset, &random_series(&mut rng, 1, 3, 3, 3, 4)).map_err(|e| e.to_string())?;
        }
        let parts = hodge_decompose(&model, &e).map_err(|e| e.to_string())?;
        let sum = parts.im_ix_w.plus(&parts.im_w_ix).plus(&parts.harmonic);
        ensure!(sum.minus(&e) == KoszulElement::zero(1, 3), "Hodge pieces do not reconstruct the input");
        ensure!(twisted_laplacian0(&model, &parts.harmonic).is_zero(), "harmonic part not annihilated");
    }
    let c = |x: f64| C64::new(x, 0.0);
    let model = WeylModel::new(vec![c(1.0)], c(0.5), vec![(c(1.0 / 3.0), Quadratic::Elliptic(1))]).map_err(|e| e.to_string())?;
    let point = EvalPoint { u: 0.7, x1: vec![-0.4], xi1: vec![0.9], x2: vec![0.5], xi2: vec![-0.8], h: 0.6 };
    let eps: [f64; 3] = [0.1, 0.05, 0.025];
    let mut slopes = Vec::new();
    for n in 3..=5 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
        let d1 = conjugated_symbol(&mut rng, &model, n + 2)?;
        let nf = birkhoff_normal_form(&model, &d1, n).map_err(|e| e.to_string())?;
        let res = normal_form_residual(&model, &nf);
        let logs: Vec<(f64, f64)> = eps.iter().map(|&e| (e.ln(), res.evaluate(&point, e).norm().ln())).collect();
        let slope = (logs[0].1 - logs[2].1) / (logs[0].0 - logs[2].0);
        ensure!(slope >= n as f64 + 0.9, "N = {n}: slope {slope:.3}");
        slopes.push(format!("N={n}: {slope:.2}"));
    }
    Ok(format!("{products} filtered products, 5 exact Hodge reconstructions, slopes {}", slopes.join(", ")))
}

fn trace_comparison() -> Outcome {
    let f = gz::Profile::Bump(gz::Bump::new(0.0, 0.0, 1.2).map_err(|e| e.to_string())?);
    let theta = gz::Bump::new(0.0, 0.4, 1.6).map_err(|e| e.to_string())?;
    let w = gz::Window::new(f, theta, 0.3).map_err(|e| e.to_string())?;
    let chi = gz::Bump::new(0.0, 0.5, 1.5).map_err(|e| e.to_string())?;
    let hs = [0.05, 0.02, 0.01];

    let circle = gz::ModelGeometry::circle(1.0, 1.0).map_err(|e| e.to_string())?;
    let h: f64 = 0.02;
    let spec = gz::model_eigenvalues(&circle, h, &gz::Cutoffs::new(h.sqrt() * 1.2 + 0.2, None)).map_err(|e| e.to_string())?;
    let got = gz::spectral_side(&spec, &w, h).map_err(|e| e.to_string())?;
    let want = common::poisson::spectral(&circle, &w, None, h, 60);
    let oracle = (got - want).norm() / want.norm();
    ensure!(oracle < 1e-6, "circle spectral side vs Poisson oracle {oracle:.3e}");
    let opts = gz::CompareOptions { order: gz::AmplitudeOrder::Resummed, transverse: None };
    let rep = gz::trace_compare(&circle, &w, &hs, &opts).map_err(|e| e.to_string())?;
    let circle_err = rep.rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    ensure!(circle_err < 1e-6, "circle trace relative error {circle_err:.3e}");

    let elliptic = gz::ModelGeometry::new(1.0, 1.0, vec![SQRT_2], vec![1.0]).map_err(|e| e.to_string())?;
    let opts = gz::CompareOptions { order: gz::AmplitudeOrder::Leading, transverse: Some(chi) };
    let rep = gz::trace_compare(&elliptic, &w, &hs, &opts).map_err(|e| e.to_string())?;
    let slope = rep.fit.ok_or("log-log fit failed")?.slope;
    ensure!(slope >= 0.4, "elliptic slope {slope:.3}");

    let long = gz::ModelGeometry::new(6.0, 1.0, vec![SQRT_2], vec![1.0]).map_err(|e| e.to_string())?;
    let wide = gz::Bump::new(0.0, 2.0, 3.0).map_err(|e| e.to_string())?;
    let g = gz::Profile::Bump(gz::Bump::new(0.0, 0.2, 1.3).map_err(|e| e.to_string())?);
    let mut even: f64 = 0.0;
    for lam in [0.2, 0.5, 0.8] {
        let plus = gz::Window::new(g.clone(), wide, lam).map_err(|e| e.to_string())?;
        let minus = gz::Window::new(g.clone(), wide, -lam).map_err(|e| e.to_string())?;
        let a = gz::extract_u0(&long, &plus, Some(&chi), 0.005).map_err(|e| e.to_string())?;
        let b = gz::extract_u0(&long, &minus, Some(&chi), 0.005).map_err(|e| e.to_string())?;
        even = even.max((a - b).abs() / a.abs());
    }
    ensure!(even < 1e-6, "u0 evenness {even:.3e}");
    Ok(format!(
        "circle oracle {oracle:.1e}, circle trace {circle_err:.1e}, elliptic slope {slope:.2}, u0 evenness {even:.1e}"
    ))
}

fn eta_oracles() -> Outcome {
    let mut samples = Vec::new();
    for h in [0.1, 0.05, 0.02] {
        let p = landau::ModelParams::new(vec![1.0, 1.7], h).map_err(|e| e.to_string())?;
        samples.push((h, 0.1, landau::model_spectrum(&p, 1.0).map_err(|e| e.to_string())?));
    }
    let rep = gz::eta_limit_check(2, &samples, Some(0.0), 1e-12).map_err(|e| e.to_string())?;
    ensure!(rep.rows.iter().all(|r| r.smoothed == 0.0 && r.sign_sum == 0.0), "symmetric spectrum eta not exactly 0");
    for eps in [1e-3, 0.1, 1.0, 5.0] {
        let sym = hk::arithmetic_progression(1.0, 0.0, 2);
        ensure!(hk::eta_smoothed(&sym, eps).map_err(|e| e.to_string())?.smoothed == 0.0, "finite symmetric eta at {eps}");
    }
    let mut worst: f64 = 0.0;
    for &(a, b) in &[(1.0, 0.3), (2.5, 0.7), (0.4, -0.1)] {
        let k = 4000;
        let spec = hk::arithmetic_progression(a, b, k);
        let smoothed = hk::eta_smoothed(&spec, 8.0 / (a * k as f64)).map_err(|e| e.to_string())?.smoothed;
        worst = worst.max((smoothed - hk::eta_arithmetic_progression(a, b).map_err(|e| e.to_string())?).abs());
    }
    let g = gz::ModelGeometry::circle(1.0, 0.7).map_err(|e| e.to_string())?;
    for h in [0.05, 0.02, 0.01] {
        let (a, b) = gz::circle_progression(&g, h).map_err(|e| e.to_string())?;
        let spec = gz::model_eigenvalues(&g, h, &gz::Cutoffs::new(a * 4000.0, None)).map_err(|e| e.to_string())?;
        let template = hk::arithmetic_progression(a, b, 0)[0].clone();
        let eig: Vec<_> = spec
            .lines
            .iter()
            .map(|l| {
                let mut e = template.clone();
                e.value = l.value;
                e
            })
            .collect();
        let rep = gz::eta_limit_check(0, &[(h, 8.0 / (a * 4000.0), eig)], None, 1.0).map_err(|e| e.to_string())?;
        worst = worst.max((rep.rows[0].scaled - hk::eta_arithmetic_progression(a, b).map_err(|e| e.to_string())?).abs());
    }
    ensure!(worst < 1e-6, "Hurwitz deviation {worst:.3e}");
    let lines = hk::arithmetic_progression(0.3, 0.11, 50);
    let base = gz::eta_limit_check(0, &[(1.0, 0.01, lines.clone())], None, 1.0).map_err(|e| e.to_string())?.rows[0].sign_sum;
    for c in [0.5, 2.0, 17.0] {
        let scaled = hk::scale_spectrum(&lines, c);
        let s = gz::eta_limit_check(0, &[(1.0, 0.01, scaled)], None, 1.0).map_err(|e| e.to_string())?.rows[0].sign_sum;
        ensure!(s == base, "sign sum {s} vs {base} at scale {c}");
    }
    Ok(format!("symmetric spectra exactly 0, Hurwitz deviation {worst:.1e}, sign sum scale-invariant"))
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("clifford identities", 1, clifford_identities),
        ("almost-diagonalizer residual", 5, lemma_residual),
        ("truncated Landau spectrum", 30, landau_oracle),
        ("Gaussian and sinh tables", 30, integral_tables),
        ("u1 structure and master integral", 5, u1_structure),
        ("symplectic round trip", 60, symplectic_round_trip),
        ("model Reeb flow", 60, reeb_flow),
        ("Weyl filtration and normal form", 120, weyl_normal_form),
        ("trace comparison", 300, trace_comparison),
        ("eta oracles", 60, eta_oracles),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(msg) if elapsed > Duration::from_secs(budget) => Err(format!("{msg}; over {budget} s budget")),
            r => r,
        };
        let secs = elapsed.as_secs_f64();
        match result {
            Ok(msg) => println!("PASS criterion {:>2} {name} ({secs:.2} s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} ({secs:.2} s): {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
