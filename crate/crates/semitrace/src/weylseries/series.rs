use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::scalar::Scalar;
use crate::clifford::{SpinMatrix, C64};
use crate::error::{Error, Result};

/// Exponent vector `[k, a, x′(m), ξ′(m), x″(m), ξ″(m)]` of
/// `h^k u^a x′^{α′} ξ′^{β′} x″^{α″} ξ″^{β″}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

/// Named position inside a [`Monomial`]; plane indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    H,
    U,
    X1(usize),
    Xi1(usize),
    X2(usize),
    Xi2(usize),
}

impl Slot {
    pub fn index(self, m: usize) -> usize {
        match self {
            Slot::H => 0,
            Slot::U => 1,
            Slot::X1(j) => 1 + j,
            Slot::Xi1(j) => 1 + m + j,
            Slot::X2(j) => 1 + 2 * m + j,
            Slot::Xi2(j) => 1 + 3 * m + j,
        }
    }
}

impl Monomial {
    pub fn one(m: usize) -> Self {
        Monomial(vec![0; 2 + 4 * m])
    }

    pub fn from_parts(k: u32, a: u32, alpha1: &[u32], beta1: &[u32], alpha2: &[u32], beta2: &[u32]) -> Result<Self> {
        let m = alpha1.len();
        if beta1.len() != m || alpha2.len() != m || beta2.len() != m {
            return Err(Error::param("monomial", "all multi-indices must have length m"));
        }
        let mut v = vec![k, a];
        for part in [alpha1, beta1, alpha2, beta2] {
            v.extend_from_slice(part);
        }
        Ok(Monomial(v))
    }

    /// Single variable raised to `p`.
    pub fn var(m: usize, slot: Slot, p: u32) -> Self {
        let mut mono = Monomial::one(m);
        mono.0[slot.index(m)] = p;
        mono
    }

    pub fn m(&self) -> usize {
        (self.0.len() - 2) / 4
    }

    pub fn get(&self, slot: Slot) -> u32 {
        self.0[slot.index(self.m())]
    }

    pub fn with(&self, slot: Slot, p: u32) -> Self {
        let mut out = self.clone();
        let i = slot.index(self.m());
        out.0[i] = p;
        out
    }

    pub fn weight(&self) -> usize {
        2 * self.0[0] as usize + self.0[1..].iter().map(|&p| p as usize).sum::<usize>()
    }

    /// `2k + a + |α′| + |β′|`.
    pub fn primed_order(&self) -> usize {
        let m = self.m();
        2 * self.0[0] as usize + self.0[1..2 + 2 * m].iter().map(|&p| p as usize).sum::<usize>()
    }

    /// `2k + |α″| + |β″|`.
    pub fn double_primed_order(&self) -> usize {
        let m = self.m();
        2 * self.0[0] as usize + self.0[2 + 2 * m..].iter().map(|&p| p as usize).sum::<usize>()
    }

    /// True when no `x′` or `ξ′` appears.
    pub fn free_of_primed_coordinates(&self) -> bool {
        let m = self.m();
        self.0[2..2 + 2 * m].iter().all(|&p| p == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn eval(&self, p: &EvalPoint) -> C64 {
        let m = self.m();
        let mut vals = vec![C64::new(p.h, 0.0), C64::new(p.u, 0.0)];
        for part in [&p.x1, &p.xi1, &p.x2, &p.xi2] {
            for j in 0..m {
                vals.push(C64::new(part[j], 0.0));
            }
        }
        self.0.iter().zip(vals).fold(C64::new(1.0, 0.0), |acc, (&e, v)| acc * v.powu(e))
    }
}

pub fn weight(mono: &Monomial) -> usize {
    mono.weight()
}

/// All monomials in `m` planes of weight exactly `w`.
pub fn monomials_of_weight(m: usize, w: usize) -> Vec<Monomial> {
    let n = 2 + 4 * m;
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(pos: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        let n = cur.len();
        if pos == n - 1 {
            cur[pos] = left as u32;
            out.push(Monomial(cur.clone()));
            return;
        }
        let step = if pos == 0 { 2 } else { 1 };
        let mut p = 0;
        while p * step <= left {
            cur[pos] = p as u32;
            rec(pos + 1, left - p * step, cur, out);
            p += 1;
        }
        cur[pos] = 0;
    }
    rec(0, w, &mut cur, &mut out);
    out
}

/// All monomials of weight at most `n`.
pub fn monomials_up_to(m: usize, n: usize) -> Vec<Monomial> {
    (0..=n).flat_map(|w| monomials_of_weight(m, w)).collect()
}

/// Point `(u, x′, ξ′, x″, ξ″; h)` for numeric evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub u: f64,
    pub x1: Vec<f64>,
    pub xi1: Vec<f64>,
    pub x2: Vec<f64>,
    pub xi2: Vec<f64>,
    pub h: f64,
}

impl EvalPoint {
    /// Variables scaled by `eps`, `h` by `eps²`.
    pub fn scaled(&self, eps: f64) -> EvalPoint {
        let s = |v: &Vec<f64>| v.iter().map(|x| x * eps).collect();
        EvalPoint {
            u: self.u * eps,
            x1: s(&self.x1),
            xi1: s(&self.xi1),
            x2: s(&self.x2),
            xi2: s(&self.xi2),
            h: self.h * eps * eps,
        }
    }
}

/// Truncated formal power series with scalar coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<S: Scalar> {
    pub m: usize,
    pub trunc: usize,
    pub terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> Series<S> {
    pub fn zero(m: usize, trunc: usize) -> Self {
        Series { m, trunc, terms: BTreeMap::new() }
    }

    pub fn constant(m: usize, trunc: usize, c: S) -> Self {
        Series::monomial(m, trunc, Monomial::one(m), c)
    }

    pub fn monomial(m: usize, trunc: usize, mono: Monomial, c: S) -> Self {
        let mut s = Series::zero(m, trunc);
        s.add_term(mono, c);
        s
    }

    pub fn var(m: usize, trunc: usize, slot: Slot) -> Self {
        Series::monomial(m, trunc, Monomial::var(m, slot, 1), S::one())
    }

    pub fn add_term(&mut self, mono: Monomial, c: S) {
        if mono.weight() > self.trunc {
            return;
        }
        let v = match self.terms.remove(&mono) {
            Some(old) => old.plus(&c),
            None => c,
        };
        if !v.vanishes() {
            self.terms.insert(mono, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, o: &Series<S>) -> Series<S> {
        let mut out = self.clone();
        out.trunc = self.trunc.min(o.trunc);
        out.terms.retain(|k, _| k.weight() <= out.trunc);
        for (k, v) in &o.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn minus(&self, o: &Series<S>) -> Series<S> {
        self.plus(&o.scaled(&S::integer(-1)))
    }

    pub fn scaled(&self, c: &S) -> Series<S> {
        let mut out = Series::zero(self.m, self.trunc);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v.times(c));
        }
        out
    }

    /// Commutative (pointwise) product.
    pub fn pointwise(&self, o: &Series<S>) -> Series<S> {
        let mut out = Series::zero(self.m, self.trunc.min(o.trunc));
        for (ka, va) in &self.terms {
            for (kb, vb) in &o.terms {
                if ka.weight() + kb.weight() <= out.trunc {
                    out.add_term(ka.mul(kb), va.times(vb));
                }
            }
        }
        out
    }

    /// Multiply by a single variable.
    pub fn mul_var(&self, slot: Slot) -> Series<S> {
        let mut out = Series::zero(self.m, self.trunc);
        for (k, v) in &self.terms {
            let p = k.get(slot);
            out.add_term(k.with(slot, p + 1), v.clone());
        }
        out
    }

    /// Partial derivative in one variable (`u` derivative is `∂_{ξ₀}` at fixed `x″, ξ″`).
    pub fn diff(&self, slot: Slot) -> Series<S> {
        let mut out = Series::zero(self.m, self.trunc);
        for (k, v) in &self.terms {
            let p = k.get(slot);
            if p > 0 {
                out.add_term(k.with(slot, p - 1), v.times(&S::integer(p as i64)));
            }
        }
        out
    }

    pub fn graded(&self, w: usize) -> Series<S> {
        let mut out = Series::zero(self.m, self.trunc);
        out.terms = self.terms.iter().filter(|(k, _)| k.weight() == w).map(|(k, v)| (k.clone(), v.clone())).collect();
        out
    }

    pub fn truncated(&self, n: usize) -> Series<S> {
        let mut out = Series::zero(self.m, n);
        out.terms = self.terms.iter().filter(|(k, _)| k.weight() <= n).map(|(k, v)| (k.clone(), v.clone())).collect();
        out
    }

    pub fn with_trunc(&self, n: usize) -> Series<S> {
        self.truncated(n)
    }

    pub fn min_weight(&self) -> Option<usize> {
        self.terms.keys().map(|k| k.weight()).min()
    }

    pub fn max_weight(&self) -> Option<usize> {
        self.terms.keys().map(|k| k.weight()).max()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.magnitude()).fold(0.0, f64::max)
    }

    /// Value at `point.scaled(eps)`.
    pub fn evaluate(&self, point: &EvalPoint, eps: f64) -> C64 {
        let p = point.scaled(eps);
        self.terms.iter().map(|(k, v)| v.to_c64() * k.eval(&p)).sum()
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(k, v)| {
                let c = v.to_c64();
                TermRecord { exponents: k.0.clone(), re: c.re, im: c.im }
            })
            .collect()
    }
}

impl Series<C64> {
    pub fn from_records(m: usize, trunc: usize, records: &[TermRecord]) -> Result<Self> {
        let mut s = Series::zero(m, trunc);
        for r in records {
            if r.exponents.len() != 2 + 4 * m {
                return Err(Error::param("exponents", format!("expected length {}", 2 + 4 * m)));
            }
            s.add_term(Monomial(r.exponents.clone()), C64::new(r.re, r.im));
        }
        Ok(s)
    }
}

/// One serialized term: exponent vector and complex coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exponents: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Dense square matrix over a [`Scalar`] field, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<S: Scalar> {
    pub d: usize,
    pub e: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zero(d: usize) -> Self {
        Mat { d, e: vec![S::zero(); d * d] }
    }

    pub fn identity(d: usize) -> Self {
        let mut out = Mat::zero(d);
        for i in 0..d {
            out.e[i * d + i] = S::one();
        }
        out
    }

    /// Exact conversion of a matrix with Gaussian-integer entries.
    pub fn from_spin_integral(s: &SpinMatrix) -> Self {
        let d = s.dim();
        let mut out = Mat::zero(d);
        for i in 0..d {
            for k in 0..d {
                let z = s.entries[(i, k)];
                out.e[i * d + k] = S::gaussian(z.re.round() as i64, z.im.round() as i64);
            }
        }
        out
    }

    pub fn get(&self, i: usize, k: usize) -> &S {
        &self.e[i * self.d + k]
    }

    pub fn mul(&self, o: &Mat<S>) -> Mat<S> {
        let d = self.d;
        let mut out: Mat<S> = Mat::zero(d);
        for i in 0..d {
            for l in 0..d {
                let a = &self.e[i * d + l];
                if a.vanishes() {
                    continue;
                }
                for k in 0..d {
                    let b = &o.e[l * d + k];
                    if !b.vanishes() {
                        out.e[i * d + k] = out.e[i * d + k].plus(&a.times(b));
                    }
                }
            }
        }
        out
    }

    pub fn plus(&self, o: &Mat<S>) -> Mat<S> {
        Mat { d: self.d, e: self.e.iter().zip(&o.e).map(|(a, b)| a.plus(b)).collect() }
    }

    pub fn minus(&self, o: &Mat<S>) -> Mat<S> {
        Mat { d: self.d, e: self.e.iter().zip(&o.e).map(|(a, b)| a.minus(b)).collect() }
    }

    pub fn scaled(&self, c: &S) -> Mat<S> {
        Mat { d: self.d, e: self.e.iter().map(|a| a.times(c)).collect() }
    }

    pub fn adjoint(&self) -> Mat<S> {
        let d = self.d;
        let mut out = Mat::zero(d);
        for i in 0..d {
            for k in 0..d {
                out.e[k * d + i] = self.e[i * d + k].conjugate();
            }
        }
        out
    }

    pub fn trace(&self) -> S {
        (0..self.d).fold(S::zero(), |acc, i| acc.plus(&self.e[i * self.d + i]))
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|x| x.vanishes())
    }

    pub fn max_abs(&self) -> f64 {
        self.e.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.d, self.d, |i, k| self.e[i * self.d + k].to_c64())
    }
}

/// Truncated formal power series with `2^m × 2^m` matrix coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSeries<S: Scalar> {
    pub m: usize,
    pub trunc: usize,
    pub terms: BTreeMap<Monomial, Mat<S>>,
}

impl<S: Scalar> SpinSeries<S> {
    pub fn zero(m: usize, trunc: usize) -> Self {
        SpinSeries { m, trunc, terms: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }

    pub fn add_term(&mut self, mono: Monomial, c: Mat<S>) {
        if mono.weight() > self.trunc {
            return;
        }
        let v = match self.terms.remove(&mono) {
            Some(old) => old.plus(&c),
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(mono, v);
        }
    }

    /// `s ⊗ c`.
    pub fn from_scalar(s: &Series<S>, c: &Mat<S>) -> Self {
        let mut out = SpinSeries::zero(s.m, s.trunc);
        for (k, v) in &s.terms {
            out.add_term(k.clone(), c.scaled(v));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, o: &SpinSeries<S>) -> SpinSeries<S> {
        let mut out = self.truncated(self.trunc.min(o.trunc));
        for (k, v) in &o.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn minus(&self, o: &SpinSeries<S>) -> SpinSeries<S> {
        self.plus(&o.scaled(&S::integer(-1)))
    }

    pub fn scaled(&self, c: &S) -> SpinSeries<S> {
        let mut out = SpinSeries::zero(self.m, self.trunc);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v.scaled(c));
        }
        out
    }

    pub fn graded(&self, w: usize) -> SpinSeries<S> {
        let mut out = SpinSeries::zero(self.m, self.trunc);
        out.terms = self.terms.iter().filter(|(k, _)| k.weight() == w).map(|(k, v)| (k.clone(), v.clone())).collect();
        out
    }

    pub fn truncated(&self, n: usize) -> SpinSeries<S> {
        let mut out = SpinSeries::zero(self.m, n);
        out.terms = self.terms.iter().filter(|(k, _)| k.weight() <= n).map(|(k, v)| (k.clone(), v.clone())).collect();
        out
    }

    pub fn min_weight(&self) -> Option<usize> {
        self.terms.keys().map(|k| k.weight()).min()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.max_abs()).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, point: &EvalPoint, eps: f64) -> DMatrix<C64> {
        let p = point.scaled(eps);
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for (k, v) in &self.terms {
            out += v.to_dmatrix() * k.eval(&p);
        }
        out
    }

    /// Coefficient-wise adjoint (self-adjoint for real variables when equal to `self`).
    pub fn adjoint(&self) -> SpinSeries<S> {
        let mut out = SpinSeries::zero(self.m, self.trunc);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v.adjoint());
        }
        out
    }
}
