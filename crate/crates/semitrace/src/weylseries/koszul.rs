use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::algebra::WeylAlgebra;
use super::scalar::Scalar;
use super::series::{Mat, Monomial, Series, Slot, SpinSeries, TermRecord};
use crate::clifford::{gammas, i_pow, C64};
use crate::error::{Error, Result};
use crate::symplectic::{BlockDecomposition, ContactModelSpec, Quadratic};

/// Element of `D_N ⊗ Λ W` with `W = span(e₀, …, e_{2m})`.
///
/// Frame index `2j−1` pairs with `x_j` and `2j` with `ξ_j`; subsets are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct KoszulElement<S: Scalar> {
    pub m: usize,
    pub trunc: usize,
    pub terms: BTreeMap<Vec<usize>, Series<S>>,
}

impl<S: Scalar> KoszulElement<S> {
    pub fn zero(m: usize, trunc: usize) -> Self {
        KoszulElement { m, trunc, terms: BTreeMap::new() }
    }

    pub fn single(subset: &[usize], s: Series<S>) -> Result<Self> {
        let mut e = KoszulElement::zero(s.m, s.trunc);
        e.add(subset, &s)?;
        Ok(e)
    }

    pub fn add(&mut self, subset: &[usize], s: &Series<S>) -> Result<()> {
        if subset.windows(2).any(|w| w[0] >= w[1]) || subset.iter().any(|&i| i > 2 * self.m) {
            return Err(Error::param("subset", "must be strictly increasing within 0..=2m"));
        }
        self.add_unchecked(subset.to_vec(), s);
        Ok(())
    }

    fn add_unchecked(&mut self, subset: Vec<usize>, s: &Series<S>) {
        let cur = match self.terms.remove(&subset) {
            Some(old) => old.plus(s),
            None => s.truncated(self.trunc),
        };
        let cur = cur.truncated(self.trunc);
        if !cur.is_zero() {
            self.terms.insert(subset, cur);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, o: &KoszulElement<S>) -> KoszulElement<S> {
        let mut out = self.clone();
        out.trunc = self.trunc.min(o.trunc);
        for (k, v) in &o.terms {
            out.add_unchecked(k.clone(), v);
        }
        let t = out.trunc;
        out.terms = out.terms.into_iter().map(|(k, v)| (k, v.truncated(t))).filter(|(_, v)| !v.is_zero()).collect();
        out
    }

    pub fn minus(&self, o: &KoszulElement<S>) -> KoszulElement<S> {
        self.plus(&o.scaled(&S::integer(-1)))
    }

    pub fn scaled(&self, c: &S) -> KoszulElement<S> {
        let mut out = KoszulElement::zero(self.m, self.trunc);
        for (k, v) in &self.terms {
            out.add_unchecked(k.clone(), &v.scaled(c));
        }
        out
    }

    pub fn graded(&self, w: usize) -> KoszulElement<S> {
        let mut out = KoszulElement::zero(self.m, self.trunc);
        for (k, v) in &self.terms {
            out.add_unchecked(k.clone(), &v.graded(w));
        }
        out
    }

    pub fn truncated(&self, n: usize) -> KoszulElement<S> {
        let mut out = KoszulElement::zero(self.m, n);
        for (k, v) in &self.terms {
            out.add_unchecked(k.clone(), v);
        }
        out
    }

    pub fn degree_part(&self, k: usize) -> KoszulElement<S> {
        let mut out = KoszulElement::zero(self.m, self.trunc);
        out.terms = self.terms.iter().filter(|(i, _)| i.len() == k).map(|(i, v)| (i.clone(), v.clone())).collect();
        out
    }

    /// Wedge degrees present.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|k| k.len()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn min_weight(&self) -> Option<usize> {
        self.terms.values().filter_map(|s| s.min_weight()).min()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|s| s.max_abs()).fold(0.0, f64::max)
    }

    pub fn to_records(&self) -> Vec<FormRecord> {
        self.terms.iter().map(|(k, v)| FormRecord { subset: k.clone(), terms: v.to_records() }).collect()
    }
}

impl KoszulElement<C64> {
    pub fn from_records(m: usize, trunc: usize, records: &[FormRecord]) -> Result<Self> {
        let mut e = KoszulElement::zero(m, trunc);
        for r in records {
            e.add(&r.subset, &Series::from_records(m, trunc, &r.terms)?)?;
        }
        Ok(e)
    }
}

/// One serialized form component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormRecord {
    pub subset: Vec<usize>,
    pub terms: Vec<TermRecord>,
}

/// Model data entering the Koszul differentials and the model symbol.
#[derive(Debug, Clone)]
pub struct WeylModel<S: Scalar> {
    pub algebra: WeylAlgebra<S>,
    /// `μ_j^{1/2}`.
    pub sqrt_mu: Vec<S>,
    /// `1/L_γ`.
    pub inv_length: S,
    /// `φ̄₂ = Σ c_b Q̄_b`.
    pub blocks: Vec<(S, Quadratic)>,
}

/// `Q̄` in the `(x″, ξ″)` variables.
pub fn bar_quadratic<S: Scalar>(m: usize, q: Quadratic) -> Series<S> {
    let mono2 = |a: Slot, b: Slot| {
        let mut k = Monomial::one(m);
        k.0[a.index(m)] += 1;
        k.0[b.index(m)] += 1;
        k
    };
    let mut s = Series::zero(m, 2);
    match q {
        Quadratic::Elliptic(j) => {
            s.add_term(mono2(Slot::X2(j), Slot::X2(j)), S::rational(1, 4));
            s.add_term(mono2(Slot::Xi2(j), Slot::Xi2(j)), S::rational(1, 4));
        }
        Quadratic::Hyperbolic(j) => s.add_term(mono2(Slot::X2(j), Slot::Xi2(j)), S::rational(-1, 2)),
        Quadratic::LoxRe(p, q) => {
            s.add_term(mono2(Slot::X2(q), Slot::Xi2(p)), S::rational(1, 2));
            s.add_term(mono2(Slot::X2(p), Slot::Xi2(q)), S::rational(-1, 2));
        }
        Quadratic::LoxIm(p, q) => {
            s.add_term(mono2(Slot::X2(p), Slot::Xi2(p)), S::rational(-1, 2));
            s.add_term(mono2(Slot::X2(q), Slot::Xi2(q)), S::rational(-1, 2));
        }
    }
    s
}

impl<S: Scalar> WeylModel<S> {
    pub fn new(sqrt_mu: Vec<S>, inv_length: S, blocks: Vec<(S, Quadratic)>) -> Result<Self> {
        let m = sqrt_mu.len();
        if m == 0 {
            return Err(Error::param("sqrt_mu", "need at least one plane"));
        }
        let mut phi2 = Series::zero(m, 2);
        for (c, q) in &blocks {
            let planes = match *q {
                Quadratic::Elliptic(j) | Quadratic::Hyperbolic(j) => vec![j],
                Quadratic::LoxRe(p, q) | Quadratic::LoxIm(p, q) => vec![p, q],
            };
            if planes.iter().any(|&j| j == 0 || j > m) {
                return Err(Error::param("blocks", "plane index out of range"));
            }
            phi2 = phi2.plus(&bar_quadratic(m, *q).scaled(c));
        }
        Ok(WeylModel { algebra: WeylAlgebra::new(m, phi2)?, sqrt_mu, inv_length, blocks })
    }

    pub fn m(&self) -> usize {
        self.algebra.m
    }

    pub fn mu(&self, j: usize) -> S {
        self.sqrt_mu[j - 1].times(&self.sqrt_mu[j - 1])
    }
}

impl WeylModel<C64> {
    /// Model with `φ̄₂` from the linear part of the contact model of `d`.
    pub fn from_decomposition(mu: &[f64], length: f64, d: &BlockDecomposition) -> Result<Self> {
        if mu.len() != d.m() {
            return Err(Error::DimensionMismatch { expected: d.m(), got: mu.len() });
        }
        if mu.iter().any(|&x| !(x > 0.0)) || !(length > 0.0) {
            return Err(Error::param("mu", "magnetic weights and length must be positive"));
        }
        let spec = ContactModelSpec::from_decomposition(d, 0.0)?;
        let blocks = spec
            .phi_plus
            .terms
            .iter()
            .map(|(c, idx)| (C64::new(*c, 0.0), spec.phi_plus.quadratics[idx[0]]))
            .collect();
        let sqrt_mu = mu.iter().map(|x| C64::new(x.sqrt(), 0.0)).collect();
        WeylModel::new(sqrt_mu, C64::new(1.0 / length, 0.0), blocks)
    }
}

/// Coefficient operation inside a Koszul differential.
#[derive(Debug, Clone, Copy, PartialEq)]
enum CoefOp {
    Mul(Slot),
    Diff(Slot),
    /// `(i/h) ad_u`.
    AdU,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FrameOp {
    Wedge(usize),
    Interior(usize),
}

/// The Koszul differentials on `D_N ⊗ Λ V` and `D_N ⊗ Λ W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KoszulOp {
    Wx0,
    Ix0,
    Wd0,
    Id0,
    TwistedWd0,
    TwistedId0,
    Wx,
    Ix,
    Wd,
    Id,
    TwistedWd,
    TwistedId,
}

fn frame_apply(op: FrameOp, subset: &[usize]) -> Option<(Vec<usize>, bool)> {
    match op {
        FrameOp::Wedge(k) => {
            if subset.contains(&k) {
                return None;
            }
            let pos = subset.iter().filter(|&&i| i < k).count();
            let mut out = subset.to_vec();
            out.insert(pos, k);
            Some((out, pos % 2 == 1))
        }
        FrameOp::Interior(k) => {
            let pos = subset.iter().position(|&i| i == k)?;
            let mut out = subset.to_vec();
            out.remove(pos);
            Some((out, pos % 2 == 1))
        }
    }
}

impl KoszulOp {
    fn components<S: Scalar>(self, model: &WeylModel<S>) -> Vec<(FrameOp, CoefOp, S)> {
        let m = model.m();
        let base = |wedge: bool, diff: bool, twisted: bool, scale: &S| {
            let mut out = Vec::new();
            for j in 1..=m {
                let c = model.sqrt_mu[j - 1].times(scale);
                let f = |k: usize| if wedge { FrameOp::Wedge(k) } else { FrameOp::Interior(k) };
                let (cx, cxi) = if diff {
                    (CoefOp::Diff(Slot::X1(j)), CoefOp::Diff(Slot::Xi1(j)))
                } else {
                    (CoefOp::Mul(Slot::X1(j)), CoefOp::Mul(Slot::Xi1(j)))
                };
                if twisted {
                    out.push((f(2 * j), cx, c.clone()));
                    out.push((f(2 * j - 1), cxi, c.negated()));
                } else {
                    out.push((f(2 * j - 1), cx, c.clone()));
                    out.push((f(2 * j), cxi, c));
                }
            }
            out
        };
        let one = S::one();
        let r2 = S::sqrt2();
        let l = model.inv_length.clone();
        let with_e0 = |mut v: Vec<(FrameOp, CoefOp, S)>, f: FrameOp, c: CoefOp, s: S| {
            v.insert(0, (f, c, s));
            v
        };
        match self {
            KoszulOp::Wx0 => base(true, false, false, &one),
            KoszulOp::Ix0 => base(false, false, false, &one),
            KoszulOp::Wd0 => base(true, true, false, &one),
            KoszulOp::Id0 => base(false, true, false, &one),
            KoszulOp::TwistedWd0 => base(true, true, true, &one),
            KoszulOp::TwistedId0 => base(false, true, true, &one),
            KoszulOp::Wx => with_e0(base(true, false, false, &r2), FrameOp::Wedge(0), CoefOp::Mul(Slot::U), l),
            KoszulOp::Ix => with_e0(base(false, false, false, &r2), FrameOp::Interior(0), CoefOp::Mul(Slot::U), l),
            KoszulOp::Wd => with_e0(base(true, true, false, &r2), FrameOp::Wedge(0), CoefOp::Diff(Slot::U), one),
            KoszulOp::Id => with_e0(base(false, true, false, &r2), FrameOp::Interior(0), CoefOp::Diff(Slot::U), one),
            KoszulOp::TwistedWd => with_e0(base(true, true, true, &r2), FrameOp::Wedge(0), CoefOp::AdU, l),
            KoszulOp::TwistedId => with_e0(base(false, true, true, &r2), FrameOp::Interior(0), CoefOp::AdU, l),
        }
    }

    pub fn apply<S: Scalar>(self, model: &WeylModel<S>, e: &KoszulElement<S>) -> KoszulElement<S> {
        let u = model.algebra.u(e.trunc);
        let mut out = KoszulElement::zero(e.m, e.trunc);
        for (frame, coef, c) in self.components(model) {
            for (subset, s) in &e.terms {
                let Some((target, negative)) = frame_apply(frame, subset) else { continue };
                let t = match coef {
                    CoefOp::Mul(slot) => s.mul_var(slot),
                    CoefOp::Diff(slot) => s.diff(slot),
                    CoefOp::AdU => model.algebra.scalar_ad_over_h(&u, s),
                };
                let c = if negative { c.negated() } else { c.clone() };
                out.add_unchecked(target, &t.scaled(&c));
            }
        }
        out
    }
}

/// `Σ μ_j [ξ_j∂_{x_j} − x_j∂_{ξ_j} + e_{2j} i_{e_{2j−1}} − e_{2j−1} i_{e_{2j}}]`.
pub fn twisted_laplacian0<S: Scalar>(model: &WeylModel<S>, e: &KoszulElement<S>) -> KoszulElement<S> {
    let mut out = KoszulElement::zero(e.m, e.trunc);
    for j in 1..=model.m() {
        let mu = model.mu(j);
        for (subset, s) in &e.terms {
            let rot = s.diff(Slot::X1(j)).mul_var(Slot::Xi1(j)).minus(&s.diff(Slot::Xi1(j)).mul_var(Slot::X1(j)));
            out.add_unchecked(subset.clone(), &rot.scaled(&mu));
            for (from, to, sign) in [(2 * j - 1, 2 * j, 1), (2 * j, 2 * j - 1, -1)] {
                let Some((mid, n1)) = frame_apply(FrameOp::Interior(from), subset) else { continue };
                let Some((target, n2)) = frame_apply(FrameOp::Wedge(to), &mid) else { continue };
                let neg = (n1 != n2) != (sign < 0);
                let c = if neg { mu.negated() } else { mu.clone() };
                out.add_unchecked(target, &s.scaled(&c));
            }
        }
    }
    out
}

/// `w̃_∂⁰ i_x⁰ + i_x⁰ w̃_∂⁰` by composition.
pub fn twisted_laplacian0_composed<S: Scalar>(model: &WeylModel<S>, e: &KoszulElement<S>) -> KoszulElement<S> {
    let a = KoszulOp::TwistedWd0.apply(model, &KoszulOp::Ix0.apply(model, e));
    let b = KoszulOp::Ix0.apply(model, &KoszulOp::TwistedWd0.apply(model, e));
    a.plus(&b)
}

/// Gamma index for a frame index: `e₀ → γ₀`, `e_{2j−1} → γ_j`, `e_{2j} → γ_{j+m}`.
pub fn frame_to_gamma(m: usize, k: usize) -> usize {
    if k == 0 {
        0
    } else if k % 2 == 1 {
        (k + 1) / 2
    } else {
        k / 2 + m
    }
}

/// `c₀(e_I) = i^{k(k+1)/2} γ_{I}` with exact entries.
pub fn c0_basis<S: Scalar>(m: usize, subset: &[usize]) -> Mat<S> {
    let g = gammas(m);
    let d = 1usize << m;
    let k = subset.len() as i64;
    let prod = subset.iter().fold(crate::clifford::SpinMatrix::identity(m), |acc, &i| acc.mul(&g[frame_to_gamma(m, i)]));
    let phase = i_pow(k * (k + 1) / 2);
    let mat = Mat::<S>::from_spin_integral(&prod.scale(phase));
    debug_assert_eq!(mat.d, d);
    mat
}

/// Clifford quantization `c₀` of a form with series coefficients.
pub fn c0_series<S: Scalar>(e: &KoszulElement<S>) -> SpinSeries<S> {
    let mut out = SpinSeries::zero(e.m, e.trunc);
    for (subset, s) in &e.terms {
        let b = c0_basis::<S>(e.m, subset);
        out = out.plus(&SpinSeries::from_scalar(s, &b));
    }
    out
}

/// Inverse of [`c0_series`] on forms of one parity, via the trace pairing.
pub fn forms_from_spin<S: Scalar>(x: &SpinSeries<S>, odd: bool) -> KoszulElement<S> {
    let m = x.m;
    let n = 2 * m + 1;
    let norm = S::rational(1, 1 << m);
    let mut out = KoszulElement::zero(m, x.trunc);
    for bits in 0u32..(1 << n) {
        if (bits.count_ones() % 2 == 1) != odd {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|&i| bits & (1 << i) != 0).collect();
        let b = c0_basis::<S>(m, &subset).adjoint();
        let mut s = Series::zero(m, x.trunc);
        for (k, v) in &x.terms {
            s.add_term(k.clone(), b.mul(v).trace().times(&norm));
        }
        out.add_unchecked(subset, &s);
    }
    out
}
