//! Mehler heat kernels on `R^{2m+1}`, Gaussian moment and sinh convolution tables,
//! the first heat coefficient `u_1`, and smoothed eta invariants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::clifford::{gammas, SpinMatrix, C64};
use crate::error::{Error, Result};
use crate::landau::EigenLine;
use crate::quad::{self, Tolerance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatParams {
    pub t: f64,
    pub mu: Vec<f64>,
}

impl HeatParams {
    pub fn new(t: f64, mu: Vec<f64>) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::param("t", "must be positive"));
        }
        if mu.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::param("mu", "all frequencies must be positive"));
        }
        Ok(HeatParams { t, mu })
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }
}

/// Products `μ t` beyond which kernels are reported as underflowed.
pub const OVERFLOW_GUARD: f64 = 700.0;

/// `ln sinh x` for `x > 0`, stable for large `x`.
pub fn ln_sinh(x: f64) -> f64 {
    if x > 30.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `μ/(4π sinh μt)`, through logs when `μt > 30`.
pub fn pair_prefactor(mu: f64, t: f64) -> f64 {
    let x = mu * t;
    if x > 30.0 {
        ((mu / (4.0 * PI)).ln() - ln_sinh(x)).exp()
    } else {
        mu / (4.0 * PI * x.sinh())
    }
}

fn coth(x: f64) -> f64 {
    if x > 20.0 {
        1.0 + 2.0 * (-2.0 * x).exp()
    } else {
        1.0 / x.tanh()
    }
}

/// `F_m = Σ_j μ_j γ_j γ_{j+m}`.
pub fn curvature_matrix(mu: &[f64]) -> SpinMatrix {
    let m = mu.len();
    let g = gammas(m);
    let mut f = SpinMatrix::zeros(m);
    for j in 1..=m {
        f = f.add(&g[j].mul(&g[j + m]).scale(C64::new(mu[j - 1], 0.0)));
    }
    f
}

/// `e^{itF_m}`; diagonal, since `γ_jγ_{j+m} = -i(1 - 2n_j)` on the occupation basis.
pub fn curvature_exponential(mu: &[f64], t: f64) -> SpinMatrix {
    let m = mu.len();
    let d = 1usize << m;
    let mut out = SpinMatrix::zeros(m);
    for r in 0..d {
        let e: f64 = (0..m)
            .map(|j| if r & (1 << (m - 1 - j)) == 0 { mu[j] * t } else { -mu[j] * t })
            .sum();
        out.entries[(r, r)] = C64::new(e.exp(), 0.0);
    }
    out
}

/// Kernel value: `scalar · e^{itF_m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelValue {
    pub scalar: C64,
    pub spin: SpinMatrix,
    pub underflow: bool,
}

impl KernelValue {
    pub fn matrix(&self) -> SpinMatrix {
        self.spin.scale(self.scalar)
    }
}

fn check_points(x: &[f64], y: &[f64], p: &HeatParams) -> Result<()> {
    let n = 2 * p.m() + 1;
    if x.len() != n || y.len() != n {
        return Err(Error::param("x", format!("points must have {n} coordinates")));
    }
    if !(p.t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    Ok(())
}

fn underflowed(p: &HeatParams) -> Option<KernelValue> {
    if p.mu.iter().any(|&mu| mu * p.t > OVERFLOW_GUARD) {
        Some(KernelValue { scalar: C64::new(0.0, 0.0), spin: SpinMatrix::zeros(p.m()), underflow: true })
    } else {
        None
    }
}

/// Mehler kernel in oscillator form:
/// `(4πt)^{-1/2} e^{-(x_0-y_0)²/4t} Π_j μ_j/(4π sinh μ_j t) · m_t(x', y') · e^{itF_m}` with
/// `m_t = exp Σ_j [-(μ_j/(4 tanh μ_j t))(|x_j|² + |y_j|²) + (μ_j/(2 sinh μ_j t)) x_j·y_j]` on each
/// coordinate pair `(x_j, x_{j+m})`.
pub fn mehler_kernel(x: &[f64], y: &[f64], p: &HeatParams) -> Result<KernelValue> {
    check_points(x, y, p)?;
    if let Some(k) = underflowed(p) {
        return Ok(k);
    }
    let m = p.m();
    let t = p.t;
    let mut log = -(x[0] - y[0]).powi(2) / (4.0 * t) - 0.5 * (4.0 * PI * t).ln();
    for j in 0..m {
        let mu = p.mu[j];
        let a = mu * t;
        log += pair_prefactor(mu, t).ln();
        let (xj, xjm, yj, yjm) = (x[1 + j], x[1 + j + m], y[1 + j], y[1 + j + m]);
        let sq = xj * xj + xjm * xjm + yj * yj + yjm * yjm;
        let cross = xj * yj + xjm * yjm;
        let csch = if a > 30.0 { (-(ln_sinh(a))).exp() } else { 1.0 / a.sinh() };
        log += -(mu / 4.0) * coth(a) * sq + (mu / 2.0) * csch * cross;
    }
    Ok(KernelValue { scalar: C64::new(log.exp(), 0.0), spin: curvature_exponential(&p.mu, t), underflow: false })
}

/// Heat kernel of `-∂_0² - Σ∇² - iF_m` with `∇_j = ∂_j + iμ_j x_{j+m}/2`,
/// `∇_{j+m} = ∂_{j+m} - iμ_j x_j/2`; it carries the magnetic phase
/// `exp(-iμ_j(x_j y_{j+m} - x_{j+m} y_j)/2)` and agrees with [`mehler_kernel`] when `x` or `y` is 0.
pub fn magnetic_heat_kernel(x: &[f64], y: &[f64], p: &HeatParams) -> Result<KernelValue> {
    check_points(x, y, p)?;
    if let Some(k) = underflowed(p) {
        return Ok(k);
    }
    let m = p.m();
    let t = p.t;
    let mut log = -(x[0] - y[0]).powi(2) / (4.0 * t) - 0.5 * (4.0 * PI * t).ln();
    let mut phase = 0.0;
    for j in 0..m {
        let mu = p.mu[j];
        log += pair_prefactor(mu, t).ln();
        let (xj, xjm, yj, yjm) = (x[1 + j], x[1 + j + m], y[1 + j], y[1 + j + m]);
        let d2 = (xj - yj).powi(2) + (xjm - yjm).powi(2);
        log += -(mu / 4.0) * coth(mu * t) * d2;
        phase += -0.5 * mu * (xj * yjm - xjm * yj);
    }
    Ok(KernelValue {
        scalar: C64::from_polar(log.exp(), phase),
        spin: curvature_exponential(&p.mu, t),
        underflow: false,
    })
}

/// Connection one-form `a` with `∇_k = ∂_k + i a_k`.
pub fn connection(mu: &[f64], x: &[f64]) -> Vec<f64> {
    let m = mu.len();
    let mut a = vec![0.0; 2 * m + 1];
    for j in 0..m {
        a[1 + j] = 0.5 * mu[j] * x[1 + j + m];
        a[1 + j + m] = -0.5 * mu[j] * x[1 + j];
    }
    a
}

/// Scalar factor of `e^{-(t-s)H}(0,x) e^{-sH}(x,0)` over `R^{2m}`.
pub fn mehler_product_density(xp: &[f64], s: f64, t: f64, mu: &[f64]) -> f64 {
    let m = mu.len();
    let mut v = 1.0;
    for j in 0..m {
        let r2 = xp[j].powi(2) + xp[j + m].powi(2);
        for tau in [t - s, s] {
            v *= pair_prefactor(mu[j], tau) * (-(mu[j] / 4.0) * coth(mu[j] * tau) * r2).exp();
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentKind {
    Const,
    X2,
    X2X2,
    X4,
}

/// `sinh μs sinh μ(t-s) / (μ sinh μt)`.
pub fn sinh_ratio(mu: f64, s: f64, t: f64) -> f64 {
    if mu * t > 30.0 {
        (ln_sinh(mu * s) + ln_sinh(mu * (t - s)) - ln_sinh(mu * t)).exp() / mu
    } else {
        (mu * s).sinh() * (mu * (t - s)).sinh() / (mu * (mu * t).sinh())
    }
}

/// Closed-form transverse moments of the Mehler product density; axes `k, l` index `1..=2m`.
pub fn gaussian_moment(kind: MomentKind, k: usize, l: usize, s: f64, t: f64, mu: &[f64]) -> Result<f64> {
    if !(s > 0.0 && s < t) {
        return Err(Error::param("s", "must lie in (0, t)"));
    }
    let m = mu.len();
    let axis_mu = |i: usize| -> Result<f64> {
        if i == 0 || i > 2 * m {
            return Err(Error::IndexOutOfRange { index: i, max: 2 * m });
        }
        Ok(mu[(i - 1) % m])
    };
    let c: f64 = mu.iter().map(|&u| pair_prefactor(u, t)).product();
    Ok(match kind {
        MomentKind::Const => c,
        MomentKind::X2 => 2.0 * c * sinh_ratio(axis_mu(k)?, s, t),
        MomentKind::X2X2 => {
            if k == l {
                return gaussian_moment(MomentKind::X4, k, k, s, t, mu);
            }
            4.0 * c * sinh_ratio(axis_mu(k)?, s, t) * sinh_ratio(axis_mu(l)?, s, t)
        }
        MomentKind::X4 => 12.0 * c * sinh_ratio(axis_mu(k)?, s, t).powi(2),
    })
}

/// The four `s`-convolution integrals of `sinh`/`cosh` on `[0, t]`:
/// 1. `∫ sinh μs sinh μ(t-s)`, 2. `∫ cosh μs sinh μ(t-s)`,
/// 3. `∫ s sinh μs sinh μ(t-s)`, 4. `∫ s sinh μs cosh μ(t-s)`.
pub fn sinh_integral(kind: u8, mu: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    let x = mu * t;
    if x > OVERFLOW_GUARD {
        return Err(Error::param("mu*t", "exceeds the overflow guard"));
    }
    let (c, s) = (x.cosh(), x.sinh());
    let small = x < 1e-3;
    Ok(match kind {
        1 => {
            if small {
                mu * mu * t.powi(3) / 6.0 * (1.0 + x * x / 10.0)
            } else {
                (x * c - s) / (2.0 * mu)
            }
        }
        2 => x * s / (2.0 * mu),
        3 => {
            if small {
                mu * mu * t.powi(4) / 12.0 * (1.0 + x * x / 10.0)
            } else {
                x * (x * c - s) / (4.0 * mu * mu)
            }
        }
        4 => {
            if small {
                mu * t.powi(3) / 3.0 * (1.0 + 0.3 * x * x)
            } else {
                (x * c - s + x * x * s) / (4.0 * mu * mu)
            }
        }
        _ => return Err(Error::param("kind", "must be 1, 2, 3 or 4")),
    })
}

/// Derivative data of the endomorphism `𝔍` at a point, with `μ_j` and multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetData {
    pub mu: Vec<f64>,
    /// Row-major `A[j][k][l]`, indices `0..=2m`.
    pub a: Vec<f64>,
    pub d: Vec<usize>,
}

impl JetData {
    pub fn zeros(mu: Vec<f64>) -> Self {
        let n = 2 * mu.len() + 1;
        let d = vec![2; mu.len()];
        JetData { mu, a: vec![0.0; n * n * n], d }
    }

    pub fn n(&self) -> usize {
        2 * self.mu.len() + 1
    }

    pub fn get(&self, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n();
        self.a[(j * n + k) * n + l]
    }

    /// Sets `A_{jkl} = v` and `A_{kjl} = -v`.
    pub fn set_antisymmetric(&mut self, j: usize, k: usize, l: usize, v: f64) {
        let n = self.n();
        self.a[(j * n + k) * n + l] = v;
        self.a[(k * n + j) * n + l] = -v;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.a.len() != n * n * n {
            return Err(Error::param("a", format!("expected {} entries", n * n * n)));
        }
        if self.mu.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::param("mu", "all frequencies must be positive"));
        }
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let s = self.get(j, k, l) + self.get(k, j, l);
                    if s.abs() > 1e-12 * (1.0 + self.get(j, k, l).abs()) {
                        return Err(Error::param("a", format!("not antisymmetric at ({j},{k},{l})")));
                    }
                }
            }
        }
        Ok(())
    }

    fn axis_mu(&self, j: usize) -> f64 {
        self.mu[(j - 1) % self.mu.len()]
    }

    fn mu_product(&self) -> f64 {
        self.mu.iter().product()
    }
}

fn pointwise_amplitude(mu: f64, t: f64) -> f64 {
    let x = mu * t;
    if x < 1e-4 {
        2.0 * x / 3.0 - 2.0 * x.powi(3) / 15.0
    } else if x > 30.0 {
        1.0 / x - x * 4.0 * (-2.0 * x).exp()
    } else {
        1.0 / x - x / x.sinh().powi(2)
    }
}

/// `u_1(s e^{-ts²}) = -Σ_{j=1}^{2m} A_{j0j} (Πμ)/(2π)^m (1/2μ_j)(4πt)^{-1/2}[1/(μ_j t) - μ_j t/sinh²(μ_j t)]`.
pub fn u1_pointwise(jet: &JetData, t: f64) -> Result<f64> {
    jet.validate()?;
    if !(t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    let m = jet.mu.len();
    let pre = jet.mu_product() / (2.0 * PI).powi(m as i32) / (4.0 * PI * t).sqrt();
    let mut sum = 0.0;
    for j in 1..=2 * m {
        let mu = jet.axis_mu(j);
        sum += jet.get(j, 0, j) * pre / (2.0 * mu) * pointwise_amplitude(mu, t);
    }
    Ok(-sum)
}

/// The same coefficient from the unsimplified `s`-integrals of the `0kk` and `k0k` pieces,
/// each computed by adaptive quadrature.
pub fn u1_pointwise_unsimplified(jet: &JetData, t: f64) -> Result<f64> {
    jet.validate()?;
    if !(t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    let m = jet.mu.len();
    let pre = jet.mu_product() / (2.0 * PI).powi(m as i32) / (4.0 * PI * t).sqrt() / 3.0;
    let tol = Tolerance { abs: 1e-15, rel: 1e-13, max_intervals: 2000 };
    let mut total = 0.0;
    for k in 1..=2 * m {
        let mu = jet.axis_mu(k);
        let s_ratio = |s: f64| sinh_ratio(mu, s, t);
        let ct = mu * coth(mu * t);
        let i1 = quad::integrate(|s| (ct - mu * coth(mu * s)) * s_ratio(s), 0.0, t, tol)?.value;
        let i2 = quad::integrate(s_ratio, 0.0, t, tol)?.value;
        let u0kk = pre * (2.0 * i1 + 2.0 / t * i2);
        let j1 = quad::integrate(|s| mu * coth(mu * s) * s_ratio(s), 0.0, t, tol)?.value;
        let j2 = quad::integrate(|s| ct * s_ratio(s), 0.0, t, tol)?.value;
        let j3 = quad::integrate(|s| (t - s) / t, 0.0, t, tol)?.value;
        let j4 = quad::integrate(
            |s| (t - s) / t * (mu * s).cosh() * (mu * (t - s)).sinh() / (mu * t).sinh(),
            0.0,
            t,
            tol,
        )?
        .value;
        let uk0k = pre * (j1 - j2 + j3 - 2.0 * j4);
        total += jet.get(0, k, k) * u0kk + jet.get(k, 0, k) * uk0k;
    }
    Ok(-total)
}

/// `u_1(e^{-ts²}) = -tr U_{10}(0,0)`, evaluated as the `(s, x)` integral of the Duhamel term
/// with symmetric Gauss rules; the `x`-integrand is odd, so the result vanishes.
pub fn u1_even_functional(jet: &JetData, t: f64, nodes: usize) -> Result<f64> {
    jet.validate()?;
    if !(t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    let m = jet.mu.len();
    let n = 2 * m + 1;
    let g = gammas(m);
    let i = C64::new(0.0, 1.0);
    let gh = quad::gauss_hermite(nodes);
    let gl = quad::gauss_legendre(nodes);
    let pairs: Vec<SpinMatrix> = (0..n * n).map(|kj| g[kj / n].mul(&g[kj % n])).collect();
    let mut coef = vec![C64::new(0.0, 0.0); n * n];
    let mut total = C64::new(0.0, 0.0);
    for &(sx, sw) in &gl {
        let s = 0.5 * t * (sx + 1.0);
        let ws = 0.5 * t * sw;
        let p_left = HeatParams { t: t - s, mu: jet.mu.clone() };
        let p_right = HeatParams { t: s, mu: jet.mu.clone() };
        let width = (2.0 * s * (t - s) / t).sqrt().max(1e-3) * 2.0;
        let mut idx = vec![0usize; n];
        loop {
            let mut x = vec![0.0; n];
            let mut w = ws;
            for a in 0..n {
                let (u, wu) = gh[idx[a]];
                x[a] = width * u;
                w *= wu * width * (u * u).exp();
            }
            let zero = vec![0.0; n];
            let left = mehler_kernel(&zero, &x, &p_left)?.matrix();
            let right = mehler_kernel(&x, &zero, &p_right)?;
            let rmat = right.matrix();
            let a_conn = connection(&jet.mu, &x);
            let mut grad = vec![0.0; n];
            grad[0] = -x[0] / (2.0 * s);
            for j in 0..m {
                let c = -(jet.mu[j] / 2.0) * coth(jet.mu[j] * s);
                grad[1 + j] = c * x[1 + j];
                grad[1 + j + m] = c * x[1 + j + m];
            }
            let mut scalar = C64::new(0.0, 0.0);
            coef.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let a = jet.get(j, k, l);
                        if a == 0.0 {
                            continue;
                        }
                        let xx = x[k] * x[l];
                        let c = i * (a / 3.0);
                        scalar += c * (C64::new(-2.0 * xx * grad[j], 0.0) - i * 2.0 * a_conn[j] * xx);
                        coef[k * n + j] += c * x[l];
                        coef[l * n + j] += c * x[k];
                    }
                }
            }
            let mut op = SpinMatrix::identity(m).scale(scalar);
            for (c, p) in coef.iter().zip(&pairs) {
                if *c != C64::new(0.0, 0.0) {
                    op.entries += &p.entries * *c;
                }
            }
            total += left.mul(&op).mul(&rmat).trace() * w;
            let mut a = 0;
            loop {
                idx[a] += 1;
                if idx[a] < gh.len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
                if a == n {
                    break;
                }
            }
            if a == n {
                break;
            }
        }
    }
    Ok(-total.re)
}

/// Integrand `1/u² - 1/sinh² u` of the master integral, with its Taylor series near 0.
pub fn master_integrand(u: f64) -> f64 {
    if u < 1e-2 {
        let u2 = u * u;
        1.0 / 3.0 - u2 / 15.0 + 2.0 * u2 * u2 / 189.0
    } else if u > 30.0 {
        1.0 / (u * u) - 4.0 * (-2.0 * u).exp()
    } else {
        1.0 / (u * u) - 1.0 / u.sinh().powi(2)
    }
}

/// Antiderivative `-1/u + 2/(e^{2u}-1)` of the master integrand.
pub fn master_antiderivative(u: f64) -> f64 {
    if u < 1e-3 {
        -1.0 + u / 3.0 - u.powi(3) / 45.0
    } else {
        -1.0 / u + 2.0 / (2.0 * u).exp_m1()
    }
}

/// `I = ∫_0^∞ u^{-1}[u^{-1} - u/sinh² u] du` by adaptive quadrature on `[0, U]` plus the exact tail.
pub fn master_integral_quadrature(cut: f64) -> Result<f64> {
    let body = quad::integrate(master_integrand, 0.0, cut, Tolerance::default())?.value;
    Ok(body - master_antiderivative(cut))
}

/// `I` from the antiderivative limits `F(∞) - F(0⁺) = 0 - (-1)`.
pub fn master_integral_closed() -> f64 {
    0.0 - master_antiderivative(0.0)
}

/// `∫_0^∞ u_1(s e^{-ts²}) dt/√(πt) = -(1/2)(2π)^{-(m+1)} Σ_j (Πμ)(A_{j0j}/μ_j) · I`.
pub fn u1_time_integral(jet: &JetData) -> Result<f64> {
    jet.validate()?;
    let m = jet.mu.len();
    let i_val = master_integral_closed();
    let mut sum = 0.0;
    for j in 1..=2 * m {
        sum += jet.mu_product() * jet.get(j, 0, j) / jet.axis_mu(j);
    }
    Ok(-0.5 * (2.0 * PI).powi(-(m as i32 + 1)) * sum * i_val)
}

/// The same time integral computed by quadrature of [`u1_pointwise`].
pub fn u1_time_integral_quadrature(jet: &JetData) -> Result<f64> {
    jet.validate()?;
    let f = |t: f64| u1_pointwise(jet, t).unwrap_or(0.0) / (PI * t).sqrt();
    let tol = Tolerance { abs: 1e-14, rel: 1e-11, max_intervals: 4000 };
    let head = quad::integrate(f, 0.0, 1.0, tol)?.value;
    let tail = quad::integrate_to_infinity(f, 1.0, tol)?.value;
    Ok(head + tail)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct U1Row {
    pub t: f64,
    pub u1: f64,
    pub quadrature_check: f64,
    pub abs_err: f64,
}

/// `u_1` closed form against the unsimplified quadrature on a list of times.
pub fn u1_table(jet: &JetData, ts: &[f64]) -> Result<Vec<U1Row>> {
    ts.iter()
        .map(|&t| {
            let u1 = u1_pointwise(jet, t)?;
            let q = u1_pointwise_unsimplified(jet, t)?;
            Ok(U1Row { t, u1, quadrature_check: q, abs_err: (u1 - q).abs() })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaValue {
    pub smoothed: f64,
    pub sign_sum: f64,
    pub warning: Option<String>,
}

/// `Σ mult · sign(λ) erfc(ε|λ|)` together with the exact sign-sum `Σ mult · sign(λ)`.
pub fn eta_smoothed(spectrum: &[EigenLine], eps: f64) -> Result<EtaValue> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    if spectrum.is_empty() {
        return Ok(EtaValue { smoothed: 0.0, sign_sum: 0.0, warning: Some("empty spectrum".into()) });
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut sign_sum = 0.0;
    for l in spectrum {
        let w = l.multiplicity as f64 * erfc(eps * l.value.abs());
        if l.value > 0.0 {
            pos.push(w);
            sign_sum += l.multiplicity as f64;
        } else if l.value < 0.0 {
            neg.push(w);
            sign_sum -= l.multiplicity as f64;
        }
    }
    Ok(EtaValue { smoothed: compensated_sum(&pos) - compensated_sum(&neg), sign_sum, warning: None })
}

/// Pairwise-compensated summation of a list of nonnegative values, smallest first.
fn compensated_sum(v: &[f64]) -> f64 {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut s = 0.0;
    let mut c = 0.0;
    for x in sorted {
        let y = x - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

fn bernoulli_even() -> [f64; 12] {
    [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
        43867.0 / 798.0,
        -174611.0 / 330.0,
        854513.0 / 138.0,
        -236364091.0 / 2730.0,
    ]
}

/// Hurwitz zeta `ζ(s, a)` for real `s ≠ 1`, `a > 0`, by Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if (s - 1.0).abs() < 1e-14 {
        return Err(Error::param("s", "pole at s = 1"));
    }
    if !(a > 0.0) {
        return Err(Error::param("a", "must be positive"));
    }
    let n = 20usize;
    let mut sum = 0.0;
    for k in 0..n {
        sum += (k as f64 + a).powf(-s);
    }
    let x = n as f64 + a;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    let mut rising = s;
    let mut fact = 2.0;
    for (k, b) in bernoulli_even().iter().enumerate() {
        let p = 2 * k + 1;
        let term = b / fact * rising * x.powf(-s - p as f64);
        sum += term;
        rising *= (s + p as f64) * (s + p as f64 + 1.0);
        fact *= ((p + 2) * (p + 3)) as f64;
        if rising == 0.0 {
            break;
        }
    }
    Ok(sum)
}

/// Eta invariant of `{a k + b : k ∈ Z}`, `a > 0`, from Hurwitz zeta values at `s = 0`.
pub fn eta_arithmetic_progression(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::param("a", "must be positive"));
    }
    let frac = (b / a).rem_euclid(1.0);
    if frac == 0.0 {
        return Ok(0.0);
    }
    Ok(hurwitz_zeta(0.0, frac)? - hurwitz_zeta(0.0, 1.0 - frac)?)
}

/// Spectrum lines `a k + b` for `|k| ≤ K`, multiplicity 1.
pub fn arithmetic_progression(a: f64, b: f64, k_max: i64) -> Vec<EigenLine> {
    use crate::landau::{LandauLabel, Sign};
    (-k_max..=k_max)
        .map(|k| {
            let value = a * k as f64 + b;
            let sign = if value > 0.0 {
                Sign::Plus
            } else if value < 0.0 {
                Sign::Minus
            } else {
                Sign::ZeroMode
            };
            EigenLine { value, multiplicity: 1, label: LandauLabel { tau: vec![k.unsigned_abs() as u32], sign } }
        })
        .collect()
}

/// Multiplies every eigenvalue by `c`.
pub fn scale_spectrum(spectrum: &[EigenLine], c: f64) -> Vec<EigenLine> {
    spectrum.iter().map(|l| EigenLine { value: l.value * c, ..l.clone() }).collect()
}
