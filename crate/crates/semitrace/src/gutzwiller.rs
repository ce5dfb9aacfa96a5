//! Spectral and orbit sides of the trace formula on the quantized circle-times-oscillator
//! model, plus smoothed eta sequences.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heatkernel::eta_smoothed;
use crate::landau::EigenLine;
use crate::quad::{composite_legendre, integrate, Tolerance};
use crate::symplectic::{check_nonresonant, BlockDecomposition, OrbitRecord, Resonance};

/// Default coefficient bound for the non-resonance certificate.
pub const RESONANCE_BOUND: i64 = 20;
/// Default tolerance for the non-resonance certificate.
pub const RESONANCE_TOL: f64 = 1e-9;
/// Spectral tail mass above which coverage is rejected.
pub const COVERAGE_TAIL: f64 = 1e-10;

fn quad_tol() -> Tolerance {
    Tolerance { abs: 1e-15, rel: 1e-13, max_intervals: 4000 }
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Plateau bump: 1 on `|x - center| ≤ plateau`, 0 beyond `half_width`, smooth in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub plateau: f64,
    pub half_width: f64,
}

impl Bump {
    pub fn new(center: f64, plateau: f64, half_width: f64) -> Result<Self> {
        let b = Bump { center, plateau, half_width };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::param("center", "must be finite"));
        }
        if !(self.plateau >= 0.0 && self.half_width > self.plateau && self.half_width.is_finite()) {
            return Err(Error::param("half_width", "need 0 ≤ plateau < half_width < ∞"));
        }
        Ok(())
    }

    /// Profile as a function of the distance from the center.
    fn radial(&self, u: f64) -> f64 {
        let u = u.abs();
        if u <= self.plateau {
            1.0
        } else if u >= self.half_width {
            0.0
        } else {
            1.0 - smooth_step((u - self.plateau) / (self.half_width - self.plateau))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.radial(x - self.center)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    pub fn integral(&self) -> Result<f64> {
        let tail = integrate(|u| self.radial(u), self.plateau, self.half_width, quad_tol())?;
        Ok(2.0 * (self.plateau + tail.value))
    }

    /// Real part of `e^{-iyc} θ̌(y)`; the bump is symmetric about its center.
    fn centered_check(&self, y: f64) -> Result<f64> {
        let p = self.plateau;
        let flat = if y == 0.0 { 2.0 * p } else { 2.0 * (y * p).sin() / y };
        let tail = integrate(|u| self.radial(u) * (y * u).cos(), p, self.half_width, quad_tol())?;
        Ok((flat + 2.0 * tail.value) / (2.0 * PI))
    }

    /// `θ̌(y) = (1/2π) ∫ e^{iyt} θ(t) dt`.
    pub fn check(&self, y: f64) -> Result<Complex64> {
        Ok(Complex64::from_polar(1.0, y * self.center) * self.centered_check(y)?)
    }

    /// `∫_{-Y}^{Y} |θ̌|²` by quadrature.
    pub fn check_l2(&self, y_max: f64) -> Result<f64> {
        let mut err = None;
        let mut total = 0.0;
        let mut lo = 0.0;
        while lo < y_max {
            let hi = (lo + 4.0).min(y_max);
            let part = integrate(
                |y| match self.centered_check(y) {
                    Ok(v) => v * v,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                lo,
                hi,
                quad_tol(),
            )?;
            total += part.value;
            lo = hi;
        }
        if let Some(e) = err {
            return Err(e);
        }
        Ok(2.0 * total)
    }
}

/// Compactly supported test function, either a bump or a natural cubic spline through
/// equispaced samples that vanish at both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Bump(Bump),
    Sampled { start: f64, step: f64, values: Vec<f64>, second: Vec<f64> },
}

impl Profile {
    pub fn sampled(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 3 {
            return Err(Error::param("values", "need at least 3 samples"));
        }
        if !(step > 0.0) || !start.is_finite() {
            return Err(Error::param("step", "must be positive"));
        }
        if values[0] != 0.0 || values[n - 1] != 0.0 {
            return Err(Error::param("values", "first and last samples must be 0"));
        }
        // natural spline: tridiagonal solve for second derivatives
        let mut second = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let rhs = 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (step * step);
            let denom = 4.0 - c[i - 1];
            c[i] = 1.0 / denom;
            d[i] = (rhs - d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            second[i] = d[i] - c[i] * second[i + 1];
        }
        Ok(Profile::Sampled { start, step, values, second })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Bump(b) => b.eval(x),
            Profile::Sampled { start, step, values, second } => {
                let n = values.len();
                let s = (x - start) / step;
                if !(s > 0.0 && s < (n - 1) as f64) {
                    return 0.0;
                }
                let i = (s.floor() as usize).min(n - 2);
                let t = s - i as f64;
                let u = 1.0 - t;
                let h2 = step * step / 6.0;
                u * values[i] + t * values[i + 1] + h2 * ((u * u * u - u) * second[i] + (t * t * t - t) * second[i + 1])
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Profile::Bump(b) => b.support(),
            Profile::Sampled { start, step, values, .. } => (*start, start + step * (values.len() - 1) as f64),
        }
    }

    fn sup_outside(&self, lo: f64, hi: f64) -> f64 {
        let (a, b) = self.support();
        let mut worst: f64 = 0.0;
        for (x0, x1) in [(a, lo.min(b)), (hi.max(a), b)] {
            if x1 <= x0 {
                continue;
            }
            for i in 0..=256 {
                let x = x0 + (x1 - x0) * i as f64 / 256.0;
                worst = worst.max(self.eval(x).abs());
            }
        }
        worst
    }
}

/// Test function `f`, time window `θ` and spectral parameter `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub f: Profile,
    pub theta: Bump,
    pub lambda: f64,
}

impl Window {
    pub fn new(f: Profile, theta: Bump, lambda: f64) -> Result<Self> {
        theta.validate()?;
        if !lambda.is_finite() {
            return Err(Error::param("lambda", "must be finite"));
        }
        Ok(Window { f, theta, lambda })
    }

    /// Checks `supp f ⊂ (-√(2μ₁), √(2μ₁))`.
    pub fn validate_for(&self, mu: &[f64]) -> Result<()> {
        if let Some(mu1) = mu.iter().copied().reduce(f64::min) {
            let edge = (2.0 * mu1).sqrt();
            let (a, b) = self.f.support();
            if !(a > -edge && b < edge) {
                return Err(Error::param("f", format!("support [{a}, {b}] must lie inside (-{edge}, {edge})")));
            }
        }
        Ok(())
    }

    /// `∫ f(λ - √h y) θ̌(y) e^{-isy} dy`, which tends to `f(λ)θ(s)` as `h → 0`.
    pub fn weighted_transform(&self, s: f64, h: f64) -> Result<Complex64> {
        let sq = h.sqrt();
        let (a, b) = self.f.support();
        let (y0, y1) = ((self.lambda - b) / sq, (self.lambda - a) / sq);
        let shift = self.theta.center - s;
        let mut err = None;
        let mut part = |phase: fn(f64) -> f64| {
            let mut g = |y: f64| {
                let fy = self.f.eval(self.lambda - sq * y);
                if fy == 0.0 {
                    return 0.0;
                }
                match self.theta.centered_check(y) {
                    Ok(r) => fy * r * phase(shift * y),
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            };
            integrate(&mut g, y0, y1, quad_tol()).map(|q| q.value)
        };
        let re = part(f64::cos)?;
        let im = part(f64::sin)?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(Complex64::new(re, im))
    }
}

/// How the orbit and local terms weight the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeOrder {
    /// `f(λ) θ(s)`.
    Leading,
    /// [`Window::weighted_transform`], exact for a linear effective Hamiltonian.
    Resummed,
}

/// [`Window::weighted_transform`] on a fixed Gauss–Legendre grid, valid for `|s| ≤ s_max`.
#[derive(Debug, Clone)]
pub struct TransformTable {
    nodes: Vec<(f64, f64)>,
    center: f64,
    s_max: f64,
}

impl TransformTable {
    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    fn eval(&self, s: f64) -> Complex64 {
        let k = self.center - s;
        let (mut re, mut im) = (0.0, 0.0);
        for &(y, v) in &self.nodes {
            let (sn, cs) = (k * y).sin_cos();
            re += v * cs;
            im += v * sn;
        }
        Complex64::new(re, im)
    }
}

/// Window weight `W(s)` for a given order and `h`.
#[derive(Debug, Clone)]
pub enum WindowWeights<'a> {
    Leading(&'a Window),
    Resummed(&'a Window, f64, TransformTable),
}

impl WindowWeights<'_> {
    pub fn window(&self) -> &Window {
        match self {
            WindowWeights::Leading(w) | WindowWeights::Resummed(w, ..) => w,
        }
    }

    pub fn at(&self, s: f64) -> Result<Complex64> {
        match self {
            WindowWeights::Leading(w) => Ok(Complex64::new(w.f.eval(w.lambda) * w.theta.eval(s), 0.0)),
            WindowWeights::Resummed(w, h, t) => {
                if s.abs() <= t.s_max {
                    Ok(t.eval(s))
                } else {
                    w.weighted_transform(s, *h)
                }
            }
        }
    }
}

impl Window {
    /// Tabulates [`Window::weighted_transform`] for `|s| ≤ s_max`.
    pub fn transform_table(&self, h: f64, s_max: f64) -> Result<TransformTable> {
        if !(h > 0.0) {
            return Err(Error::param("h", "must be positive"));
        }
        let sq = h.sqrt();
        let (a, b) = self.f.support();
        let (y0, y1) = ((self.lambda - b) / sq, (self.lambda - a) / sq);
        let span = y1 - y0;
        let freq = self.theta.center.abs() + s_max.abs() + self.theta.half_width;
        let panels = (span * freq / (2.0 * PI)).ceil() as usize + span.ceil() as usize + 16;
        let rule = composite_legendre(y0, y1, panels, 24);
        let nodes = rule
            .par_iter()
            .map(|&(y, wt)| {
                let fy = self.f.eval(self.lambda - sq * y);
                if fy == 0.0 {
                    return Ok((y, 0.0));
                }
                Ok((y, wt * fy * self.theta.centered_check(y)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let nodes = nodes.into_iter().filter(|n| n.1 != 0.0).collect();
        Ok(TransformTable { nodes, center: self.theta.center, s_max: s_max.abs() })
    }

    pub fn weights(&self, order: AmplitudeOrder, h: f64, s_max: f64) -> Result<WindowWeights<'_>> {
        Ok(match order {
            AmplitudeOrder::Leading => WindowWeights::Leading(self),
            AmplitudeOrder::Resummed => WindowWeights::Resummed(self, h, self.transform_table(h, s_max)?),
        })
    }
}

/// Quantizable model: circle period `L`, action `T` and elliptic transverse angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelGeometry {
    pub l_gamma: f64,
    pub t_gamma: f64,
    pub betas: Vec<f64>,
    pub mu: Vec<f64>,
}

impl ModelGeometry {
    pub fn new(l_gamma: f64, t_gamma: f64, betas: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let g = ModelGeometry { l_gamma, t_gamma, betas, mu };
        g.certify()?;
        Ok(g)
    }

    /// Circle model with no transverse blocks.
    pub fn circle(l_gamma: f64, t_gamma: f64) -> Result<Self> {
        Self::new(l_gamma, t_gamma, Vec::new(), Vec::new())
    }

    pub fn decomposition(&self) -> BlockDecomposition {
        BlockDecomposition { elliptic: self.betas.clone(), pos_hyp: vec![], neg_hyp: vec![], loxodromic: vec![] }
    }

    /// Validates the data and requires a non-resonance certificate.
    pub fn certify(&self) -> Result<()> {
        if !(self.l_gamma > 0.0 && self.l_gamma.is_finite()) {
            return Err(Error::param("l_gamma", "must be positive"));
        }
        if !(self.t_gamma > 0.0 && self.t_gamma.is_finite()) {
            return Err(Error::param("t_gamma", "must be positive"));
        }
        if self.mu.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::param("mu", "entries must be positive"));
        }
        let d = self.decomposition();
        d.validate()?;
        match check_nonresonant(&d, RESONANCE_BOUND, RESONANCE_TOL)? {
            Resonance::Certified { .. } => Ok(()),
            Resonance::Relation { set, coefficients, residual } => Err(Error::ResonantModel {
                relation: format!("{set} relation {coefficients:?} (residual {residual:e})"),
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.betas.len()
    }

    /// Primitive orbit and its iterates up to length `max_len`.
    pub fn orbits(&self, max_len: f64) -> Result<Vec<OrbitRecord>> {
        let count = (max_len / self.l_gamma).floor().max(0.0) as i64;
        (1..=count).map(|ell| OrbitRecord::new(self.t_gamma, self.l_gamma, ell, self.decomposition())).collect()
    }
}

/// Eigenvalue with a cutoff weight; `k` is the circle mode and `n` the oscillator levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub value: f64,
    pub weight: f64,
    pub k: i64,
    pub n: Vec<u32>,
}

impl From<&EigenLine> for SpectralLine {
    fn from(l: &EigenLine) -> Self {
        SpectralLine { value: l.value, weight: l.multiplicity as f64, k: 0, n: l.label.tau.clone() }
    }
}

/// Spectrum together with the interval on which it is complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpectrum {
    pub lines: Vec<SpectralLine>,
    pub covered: (f64, f64),
}

impl ModelSpectrum {
    pub fn from_eigenlines(lines: &[EigenLine], covered: (f64, f64)) -> Self {
        ModelSpectrum { lines: lines.iter().map(SpectralLine::from).collect(), covered }
    }
}

/// Enumeration limits for [`model_eigenvalues`]. The transverse profile `χ` weights
/// level `n` by `Π_j χ(h(n_j + ½))` and must be supplied when the model has blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutoffs {
    pub energy: f64,
    pub transverse: Option<Bump>,
    pub bound: usize,
}

impl Cutoffs {
    pub fn new(energy: f64, transverse: Option<Bump>) -> Self {
        Cutoffs { energy, transverse, bound: 2_000_000 }
    }
}

/// `-(1/L)(2πhk + T + Σ β_j(n_j+½)h)` with `|value| ≤ energy`.
pub fn model_eigenvalues(g: &ModelGeometry, h: f64, cut: &Cutoffs) -> Result<ModelSpectrum> {
    if !(h > 0.0) {
        return Err(Error::param("h", "must be positive"));
    }
    if !(cut.energy >= 0.0) {
        return Err(Error::param("energy", "must be nonnegative"));
    }
    let d = g.dim();
    let chi = match (&cut.transverse, d) {
        (_, 0) => None,
        (Some(c), _) => {
            c.validate()?;
            if c.center != 0.0 {
                return Err(Error::param("transverse", "profile must be centered at 0"));
            }
            Some(*c)
        }
        (None, _) => return Err(Error::param("transverse", "required when the model has oscillator blocks")),
    };
    let n_max = chi.map_or(0, |c| (c.half_width / h - 0.5).ceil().max(0.0) as u32);
    let level_weight: Vec<f64> = (0..=n_max).map(|n| chi.map_or(1.0, |c| c.eval(h * (n as f64 + 0.5)))).collect();
    let mut lines = Vec::new();
    let mut n = vec![0u32; d];
    loop {
        let weight: f64 = n.iter().map(|&j| level_weight[j as usize]).product();
        if weight != 0.0 {
            let shift = g.t_gamma + g.betas.iter().zip(&n).map(|(b, &j)| b * (j as f64 + 0.5) * h).sum::<f64>();
            let step = 2.0 * PI * h;
            let k_lo = ((-cut.energy * g.l_gamma - shift) / step).ceil() as i64 - 1;
            let k_hi = ((cut.energy * g.l_gamma - shift) / step).floor() as i64 + 1;
            for k in k_lo..=k_hi {
                let value = -(step * k as f64 + shift) / g.l_gamma;
                if value.abs() <= cut.energy {
                    if lines.len() >= cut.bound {
                        return Err(Error::EnumerationBound { bound: cut.bound });
                    }
                    lines.push(SpectralLine { value, weight, k, n: n.clone() });
                }
            }
        }
        let mut j = 0;
        while j < d {
            n[j] += 1;
            if n[j] <= n_max {
                break;
            }
            n[j] = 0;
            j += 1;
        }
        if j == d {
            break;
        }
    }
    lines.sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.n.cmp(&b.n)));
    Ok(ModelSpectrum { lines, covered: (-cut.energy, cut.energy) })
}

/// `Σ weight · f(λ_i/√h) · (1/h) θ̌((λ√h - λ_i)/h)`.
pub fn spectral_side(spec: &ModelSpectrum, w: &Window, h: f64) -> Result<Complex64> {
    if !(h > 0.0) {
        return Err(Error::param("h", "must be positive"));
    }
    let sq = h.sqrt();
    let tail = w.f.sup_outside(spec.covered.0 / sq, spec.covered.1 / sq);
    if tail > COVERAGE_TAIL {
        return Err(Error::InsufficientCoverage { tail });
    }
    let terms: Vec<Result<Complex64>> = spec
        .lines
        .par_iter()
        .map(|l| {
            let fv = w.f.eval(l.value / sq);
            if fv == 0.0 || l.weight == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok(w.theta.check((w.lambda * sq - l.value) / h)? * (l.weight * fv / h))
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for t in terms {
        total += t?;
    }
    Ok(total)
}

/// Local and orbit contributions of the geometric side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricSide {
    pub local: Complex64,
    pub dynamical: Complex64,
}

impl GeometricSide {
    pub fn total(&self) -> Complex64 {
        self.local + self.dynamical
    }
}

/// Contribution of one orbit and its reversal. The phase is the action at energy
/// `λ√h`, i.e. `T_γ + λ√h L_γ`; the reversed traversal sits at `-L_γ` with conjugate phase.
pub fn orbit_term(o: &OrbitRecord, weights: &WindowWeights, h: f64) -> Result<Complex64> {
    let len = o.length();
    let action = o.period() + weights.window().lambda * h.sqrt() * len;
    let phase = Complex64::from_polar(1.0, action / h + 0.5 * PI * o.maslov as f64);
    let amp = o.l_prim / (2.0 * PI * h) * o.amplitude;
    let fwd = weights.at(len)?;
    let rev = weights.at(-len)?;
    Ok((phase * fwd + phase.conj() * rev) * amp)
}

/// Orbit sum plus the supplied local term.
pub fn geometric_side<F>(orbits: &[OrbitRecord], local: F, w: &Window, h: f64, order: AmplitudeOrder) -> Result<GeometricSide>
where
    F: FnOnce(f64) -> Result<Complex64>,
{
    if !(h > 0.0) {
        return Err(Error::param("h", "must be positive"));
    }
    let longest = orbits.iter().map(|o| o.length()).fold(0.0, f64::max);
    let weights = w.weights(order, h, longest)?;
    geometric_side_with(orbits, local, &weights, h)
}

/// [`geometric_side`] with precomputed window weights.
pub fn geometric_side_with<F>(orbits: &[OrbitRecord], local: F, weights: &WindowWeights, h: f64) -> Result<GeometricSide>
where
    F: FnOnce(f64) -> Result<Complex64>,
{
    let (a, b) = weights.window().theta.support();
    let reach = a.abs().max(b.abs());
    let mut groups: BTreeMap<(u64, u64), Vec<&OrbitRecord>> = BTreeMap::new();
    for o in orbits {
        groups.entry((o.t_prim.to_bits(), o.l_prim.to_bits())).or_default().push(o);
    }
    for list in groups.values() {
        let l_prim = list[0].l_prim;
        let need = (reach / l_prim).ceil() as i64;
        for ell in 1..need {
            if ell as f64 * l_prim < reach && !list.iter().any(|o| o.ell == ell) {
                return Err(Error::MissingOrbitCoverage { length: ell as f64 * l_prim });
            }
        }
    }
    let terms: Vec<Result<Complex64>> = orbits.par_iter().map(|o| orbit_term(o, weights, h)).collect();
    let mut dynamical = Complex64::new(0.0, 0.0);
    let mut last: BTreeMap<(u64, u64), (i64, Complex64)> = BTreeMap::new();
    for (o, t) in orbits.iter().zip(terms) {
        let t = t?;
        dynamical += t;
        let e = last.entry((o.t_prim.to_bits(), o.l_prim.to_bits())).or_insert((0, t));
        if o.ell >= e.0 {
            *e = (o.ell, t);
        }
    }
    let local = local(h)?;
    if matches!(weights, WindowWeights::Resummed(..)) {
        let scale = (local + dynamical).norm().max(f64::MIN_POSITIVE);
        for (&(_, lb), &(ell, t)) in &last {
            if t.norm() > 1e-12 * scale {
                return Err(Error::MissingOrbitCoverage { length: (ell + 1) as f64 * f64::from_bits(lb) });
            }
        }
    }
    Ok(GeometricSide { local, dynamical })
}

/// `∫₀^∞ χ`.
fn transverse_mass(chi: &Bump) -> Result<f64> {
    Ok(0.5 * chi.integral()?)
}

/// Local term of the model: `(L/2πh) (C_χ/h)^d W(0)` with `C_χ = ∫₀^∞ χ`.
pub fn model_local_term(g: &ModelGeometry, transverse: Option<&Bump>, weights: &WindowWeights, h: f64) -> Result<Complex64> {
    let d = g.dim() as i32;
    let mass = match (transverse, d) {
        (_, 0) => 1.0,
        (Some(c), _) => transverse_mass(c)?,
        (None, _) => return Err(Error::param("transverse", "required when the model has oscillator blocks")),
    };
    let w0 = weights.at(0.0)?;
    Ok(w0 * (g.l_gamma / (2.0 * PI * h) * (mass / h).powi(d)))
}

/// Orbits needed for `order` with matching weights: all iterates inside `supp θ`, and for
/// the resummed order further iterates until three consecutive terms fall below `1e-15`
/// of the local term.
pub fn model_orbits<'a>(
    g: &ModelGeometry,
    transverse: Option<&Bump>,
    w: &'a Window,
    h: f64,
    order: AmplitudeOrder,
) -> Result<(Vec<OrbitRecord>, WindowWeights<'a>, Complex64)> {
    let (a, b) = w.theta.support();
    let reach = a.abs().max(b.abs());
    let mut orbits = g.orbits(reach)?;
    let mut weights = w.weights(order, h, reach + 4.0 * g.l_gamma)?;
    let local = model_local_term(g, transverse, &weights, h)?;
    if let WindowWeights::Resummed(..) = weights {
        let scale = local.norm().max(f64::MIN_POSITIVE);
        let mut quiet = 0;
        let mut ell = orbits.len() as i64 + 1;
        while quiet < 3 {
            if ell > 100_000 {
                return Err(Error::EnumerationBound { bound: 100_000 });
            }
            let o = OrbitRecord::new(g.t_gamma, g.l_gamma, ell, g.decomposition())?;
            if let WindowWeights::Resummed(_, _, t) = &weights {
                if o.length() > t.s_max() {
                    weights = w.weights(order, h, 2.0 * o.length())?;
                }
            }
            let t = orbit_term(&o, &weights, h)?;
            quiet = if t.norm() < 1e-15 * scale { quiet + 1 } else { 0 };
            orbits.push(o);
            ell += 1;
        }
    }
    Ok((orbits, weights, local))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub h: f64,
    pub spectral: Complex64,
    pub geometric: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
}

/// Least-squares line `log y = slope · log x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<LogLogFit> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some(LogLogFit { slope, intercept: my - slope * mx })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub order: AmplitudeOrder,
    pub transverse: Option<Bump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub order: AmplitudeOrder,
    pub rows: Vec<TraceRow>,
    /// Fit of `rel_err` against `h`.
    pub fit: Option<LogLogFit>,
}

/// One row of [`trace_compare`].
pub fn trace_row(g: &ModelGeometry, w: &Window, h: f64, opts: &CompareOptions) -> Result<TraceRow> {
    g.certify()?;
    w.validate_for(&g.mu)?;
    let (a, b) = w.f.support();
    let sq = h.sqrt();
    let energy = sq * a.abs().max(b.abs()) + 2.0 * PI * h / g.l_gamma;
    let spec = model_eigenvalues(g, h, &Cutoffs::new(energy, opts.transverse))?;
    let spectral = spectral_side(&spec, w, h)?;
    let (orbits, weights, local) = model_orbits(g, opts.transverse.as_ref(), w, h, opts.order)?;
    let geo = geometric_side_with(&orbits, |_| Ok(local), &weights, h)?.total();
    let abs_err = (spectral - geo).norm();
    let rel_err = abs_err / spectral.norm().max(f64::MIN_POSITIVE);
    Ok(TraceRow { h, spectral, geometric: geo, abs_err, rel_err })
}

/// Both sides for each `h`, with a log-log fit of the relative error.
pub fn trace_compare(g: &ModelGeometry, w: &Window, h_list: &[f64], opts: &CompareOptions) -> Result<TraceReport> {
    g.certify()?;
    if h_list.is_empty() || h_list.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::param("h_list", "need at least one positive h"));
    }
    let rows = h_list.par_iter().map(|&h| trace_row(g, w, h, opts)).collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.rel_err).collect();
    Ok(TraceReport { order: opts.order, fit: loglog_fit(&hs, &es), rows })
}

/// `u₀(λ)` read off the spectral side with a window whose support contains no orbit:
/// `h^{d+1} S(λ) / f(λ)`.
pub fn extract_u0(g: &ModelGeometry, w: &Window, transverse: Option<&Bump>, h: f64) -> Result<f64> {
    let (a, b) = w.theta.support();
    if a.abs().max(b.abs()) > g.l_gamma {
        return Err(Error::param("theta", "support must stay below the primitive length"));
    }
    let fl = w.f.eval(w.lambda);
    if fl == 0.0 {
        return Err(Error::param("lambda", "f must not vanish at λ"));
    }
    let (fa, fb) = w.f.support();
    let energy = h.sqrt() * fa.abs().max(fb.abs()) + 2.0 * PI * h / g.l_gamma;
    let spec = model_eigenvalues(g, h, &Cutoffs::new(energy, transverse.copied()))?;
    let s = spectral_side(&spec, w, h)?;
    Ok(s.re * h.powi(g.dim() as i32 + 1) / fl)
}

/// Predicted limit `-(m/2)(2π)^{-(m+1)} vol` of `h^m η` on metric-contact data.
pub fn metric_contact_eta_limit(m: usize, volume: f64) -> f64 {
    -(m as f64 / 2.0) * (2.0 * PI).powi(-(m as i32 + 1)) * volume
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaRow {
    pub h: f64,
    pub eps: f64,
    pub smoothed: f64,
    pub sign_sum: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaReport {
    pub rows: Vec<EtaRow>,
    /// Linear-in-`h` extrapolation from the two smallest `h`.
    pub limit: f64,
    pub spread: f64,
    pub converged: bool,
    pub target: Option<f64>,
    pub deviation: Option<f64>,
}

/// `h^m η_ε(spectrum(h))` for each `(h, ε, spectrum)` with an extrapolated limit.
/// `converged` is false when the last two values differ from the limit by more than `tol`.
pub fn eta_limit_check(m: usize, samples: &[(f64, f64, Vec<EigenLine>)], target: Option<f64>, tol: f64) -> Result<EtaReport> {
    if samples.is_empty() {
        return Err(Error::param("samples", "need at least one h"));
    }
    let mut rows = samples
        .iter()
        .map(|(h, eps, spec)| {
            if !(*h > 0.0) {
                return Err(Error::param("h", "must be positive"));
            }
            let e = eta_smoothed(spec, *eps)?;
            Ok(EtaRow { h: *h, eps: *eps, smoothed: e.smoothed, sign_sum: e.sign_sum, scaled: h.powi(m as i32) * e.smoothed })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.h.total_cmp(&a.h));
    let n = rows.len();
    let (limit, spread) = if n == 1 {
        (rows[0].scaled, f64::INFINITY)
    } else {
        let (r1, r2) = (&rows[n - 2], &rows[n - 1]);
        let lim = (r1.h * r2.scaled - r2.h * r1.scaled) / (r1.h - r2.h);
        (lim, (lim - r2.scaled).abs().max((r1.scaled - r2.scaled).abs()))
    };
    let converged = spread.is_finite() && spread <= tol;
    Ok(EtaReport { rows, limit, spread, converged, target, deviation: target.map(|t| (limit - t).abs()) })
}

/// Eigenvalues of the circle model form the progression `a j + b` with `a = 2πh/L`,
/// `b = -T/L`; returns `(a, b)`.
pub fn circle_progression(g: &ModelGeometry, h: f64) -> Result<(f64, f64)> {
    if g.dim() != 0 {
        return Err(Error::param("betas", "circle progression needs a model without blocks"));
    }
    Ok((2.0 * PI * h / g.l_gamma, -g.t_gamma / g.l_gamma))
}
