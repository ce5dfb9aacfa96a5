#![allow(dead_code)]

use std::f64::consts::PI;

use semitrace::heatkernel::{mehler_kernel, HeatParams, MomentKind};
use semitrace::quad::{integrate, Tolerance};

pub fn tight() -> Tolerance {
    Tolerance { abs: 1e-300, rel: 1e-12, max_intervals: 4000 }
}

pub fn nested_2d<F: Fn(f64, f64) -> f64>(f: F, half: f64) -> f64 {
    integrate(
        |x| integrate(|y| f(x, y), -half, half, tight()).expect("inner").value,
        -half,
        half,
        tight(),
    )
    .expect("outer")
    .value
}

/// Transverse moment of `K_{t-s}(0,x) K_s(x,0)` for m = 1 by nested adaptive quadrature.
pub fn moment_oracle(kind: MomentKind, s: f64, t: f64, mu: f64) -> f64 {
    let pl = HeatParams::new(t - s, vec![mu]).unwrap();
    let pr = HeatParams::new(s, vec![mu]).unwrap();
    let norm = (4.0 * PI * (t - s)).sqrt() * (4.0 * PI * s).sqrt();
    let density = |a: f64, b: f64| {
        let x = [0.0, a, b];
        let z = [0.0; 3];
        let l = mehler_kernel(&z, &x, &pl).unwrap().scalar.re;
        let r = mehler_kernel(&x, &z, &pr).unwrap().scalar.re;
        l * r * norm
    };
    let var = 2.0 * (mu * s).sinh() * (mu * (t - s)).sinh() / (mu * (mu * t).sinh());
    let half = 14.0 * var.sqrt();
    match kind {
        MomentKind::Const => nested_2d(density, half),
        MomentKind::X2 => nested_2d(|a, b| a * a * density(a, b), half),
        MomentKind::X2X2 => nested_2d(|a, b| a * a * b * b * density(a, b), half),
        MomentKind::X4 => nested_2d(|a, b| a.powi(4) * density(a, b), half),
    }
}

pub fn sinh_oracle(kind: u8, mu: f64, t: f64) -> f64 {
    let f = move |s: f64| match kind {
        1 => (mu * s).sinh() * (mu * (t - s)).sinh(),
        2 => (mu * s).cosh() * (mu * (t - s)).sinh(),
        3 => s * (mu * s).sinh() * (mu * (t - s)).sinh(),
        _ => s * (mu * s).sinh() * (mu * (t - s)).cosh(),
    };
    integrate(f, 0.0, t, tight()).unwrap().value
}

/// 60 points `(μ, s, t)` with `0 < s < t`.
pub fn moment_grid() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for &mu in &[0.3, 1.0, 2.5, 6.0] {
        for &t in &[0.2, 1.0, 3.0] {
            for &frac in &[0.1, 0.3, 0.5, 0.7, 0.95] {
                out.push((mu, frac * t, t));
            }
        }
    }
    out
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub mod symp {
    use std::f64::consts::PI;

    use nalgebra::DMatrix;
    use rand::Rng;
    use semitrace::symplectic::{standard_j, BlockDecomposition};

    pub fn random_symplectic<R: Rng>(m: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
        let n = 2 * m;
        let mut s = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in i..n {
                let v = rng.gen_range(-scale..scale);
                s[(i, k)] = v;
                s[(k, i)] = v;
            }
        }
        (standard_j(m) * s).exp()
    }

    fn separated(xs: &[f64], x: f64, gap: f64) -> bool {
        xs.iter().all(|&y| (x - y).abs() > gap)
    }

    /// Random decomposition on `m` planes with well-separated eigenvalues.
    pub fn random_decomposition<R: Rng>(m: usize, rng: &mut R) -> BlockDecomposition {
        let gap = 0.05;
        let nl = rng.gen_range(0..=m / 2);
        let mut d = BlockDecomposition::default();
        while d.loxodromic.len() < nl {
            let (a, b) = (rng.gen_range(0.1..1.2), rng.gen_range(0.15..PI - 0.15));
            if d.loxodromic.iter().all(|&(x, y)| (x - a).abs() > gap || (y - b).abs() > gap) {
                d.loxodromic.push((a, b));
            }
        }
        for _ in 0..m - 2 * nl {
            loop {
                match rng.gen_range(0..3) {
                    0 => {
                        let b = rng.gen_range(0.1..2.0 * PI - 0.1);
                        let mirrored: Vec<f64> = d.elliptic.iter().map(|&y| 2.0 * PI - y).collect();
                        if (b - PI).abs() > gap && separated(&d.elliptic, b, gap) && separated(&mirrored, b, gap) {
                            d.elliptic.push(b);
                            break;
                        }
                    }
                    1 => {
                        let a = rng.gen_range(0.1..1.5);
                        if separated(&d.pos_hyp, a, gap) {
                            d.pos_hyp.push(a);
                            break;
                        }
                    }
                    _ => {
                        let a = rng.gen_range(0.1..1.5);
                        if separated(&d.neg_hyp, a, gap) {
                            d.neg_hyp.push(a);
                            break;
                        }
                    }
                }
            }
        }
        d
    }
}

pub mod poisson {
    use std::f64::consts::PI;

    use num_complex::Complex64;
    use semitrace::gutzwiller::{Bump, ModelGeometry, Window};
    use semitrace::quad::{integrate, Tolerance};

    fn tol() -> Tolerance {
        Tolerance { abs: 1e-14, rel: 1e-12, max_intervals: 4000 }
    }

    /// `f̂(ω) = ∫ f(u) e^{-iuω} du`.
    fn f_hat(w: &Window, omega: f64) -> Complex64 {
        let (a, b) = w.f.support();
        let re = integrate(|u| w.f.eval(u) * (u * omega).cos(), a, b, tol()).unwrap().value;
        let im = integrate(|u| -w.f.eval(u) * (u * omega).sin(), a, b, tol()).unwrap().value;
        Complex64::new(re, im)
    }

    /// `(1/2π√h) ∫ θ(t) e^{iλ(t-s)/√h} f̂((t-s)/√h) dt`.
    pub fn weighted(w: &Window, s: f64, h: f64) -> Complex64 {
        let sq = h.sqrt();
        let (a, b) = w.theta.support();
        let g = |t: f64| {
            let om = (t - s) / sq;
            Complex64::from_polar(w.theta.eval(t), w.lambda * om) * f_hat(w, om)
        };
        let re = integrate(|t| g(t).re, a, b, tol()).unwrap().value;
        let im = integrate(|t| g(t).im, a, b, tol()).unwrap().value;
        Complex64::new(re, im) / (2.0 * PI * sq)
    }

    /// Poisson summation over the circle modes of the model spectrum, with the
    /// oscillator levels summed exactly:
    /// `(L/2πh) Σ_ℓ e^{iℓ(T + Lλ√h)/h} Π_j Σ_n χ(h(n+½)) e^{iℓβ_j(n+½)} W(ℓL)`.
    pub fn spectral(g: &ModelGeometry, w: &Window, chi: Option<&Bump>, h: f64, ell_max: i64) -> Complex64 {
        let sq = h.sqrt();
        let mut total = Complex64::new(0.0, 0.0);
        for ell in -ell_max..=ell_max {
            let l = ell as f64;
            let mut levels = Complex64::new(1.0, 0.0);
            for &beta in &g.betas {
                let c = chi.unwrap();
                let n_max = (c.half_width / h).ceil() as i64;
                let mut s = Complex64::new(0.0, 0.0);
                for n in 0..=n_max {
                    let x = n as f64 + 0.5;
                    s += Complex64::from_polar(c.eval(h * x), l * beta * x);
                }
                levels *= s;
            }
            let phase = Complex64::from_polar(1.0, l * (g.t_gamma + g.l_gamma * w.lambda * sq) / h);
            total += phase * levels * weighted(w, l * g.l_gamma, h);
        }
        total * (g.l_gamma / (2.0 * PI * h))
    }
}
