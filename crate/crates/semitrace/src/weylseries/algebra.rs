use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use super::scalar::Scalar;
use super::series::{Mat, Monomial, Series, Slot, SpinSeries};
use crate::error::{Error, Result};

type Poly<S> = BTreeMap<Monomial, S>;

fn poly_add<S: Scalar>(p: &mut Poly<S>, k: Monomial, c: S) {
    let v = match p.remove(&k) {
        Some(old) => old.plus(&c),
        None => c,
    };
    if !v.vanishes() {
        p.insert(k, v);
    }
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

fn falling(p: u32, r: u32) -> i64 {
    (0..r).fold(1i64, |acc, i| acc * (p - i) as i64)
}

fn factorial(r: u32) -> i64 {
    (1..=r as i64).product()
}

/// Weyl product on polynomials in `(u, x′, ξ′, x″, ξ″; h)` with `[x_j, ξ_j] = ih`.
///
/// `u` stands for `ξ₀ + φ̄₂(x″, ξ″)`; coefficients are `x₀`-independent so `ξ₀` is central.
/// Products are computed by substituting `u = ξ₀ + φ̄₂`, multiplying, and substituting back.
#[derive(Debug)]
pub struct WeylAlgebra<S: Scalar> {
    pub m: usize,
    /// Quadratic `φ̄₂(x″, ξ″)`.
    pub phi2: Series<S>,
    phi_pows: RefCell<Vec<Poly<S>>>,
    cache: RefCell<HashMap<(Monomial, Monomial, usize), Poly<S>>>,
}

impl<S: Scalar> Clone for WeylAlgebra<S> {
    fn clone(&self) -> Self {
        WeylAlgebra::new(self.m, self.phi2.clone()).expect("validated on construction")
    }
}

impl<S: Scalar> WeylAlgebra<S> {
    pub fn new(m: usize, phi2: Series<S>) -> Result<Self> {
        if phi2.m != m {
            return Err(Error::DimensionMismatch { expected: m, got: phi2.m });
        }
        for k in phi2.terms.keys() {
            if k.weight() != 2 || k.double_primed_order() != 2 || k.get(Slot::H) != 0 {
                return Err(Error::param("phi2", "must be a quadratic form in (x″, ξ″)"));
            }
        }
        let one: Poly<S> = [(Monomial::one(m), S::one())].into_iter().collect();
        Ok(WeylAlgebra {
            m,
            phi2,
            phi_pows: RefCell::new(vec![one]),
            cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn flat(m: usize) -> Self {
        WeylAlgebra::new(m, Series::zero(m, 2)).expect("zero is quadratic")
    }

    fn phi_pow(&self, j: usize) -> Poly<S> {
        let mut pows = self.phi_pows.borrow_mut();
        while pows.len() <= j {
            let last = pows.last().expect("nonempty").clone();
            let mut next = Poly::new();
            for (ka, va) in &last {
                for (kb, vb) in &self.phi2.terms {
                    poly_add(&mut next, ka.mul(kb), va.times(vb));
                }
            }
            pows.push(next);
        }
        pows[j].clone()
    }

    /// `u^a = Σ C(a,j) ξ₀^{a−j} φ̄₂^j` (`sign = 1`) or its inverse (`sign = −1`).
    fn substitute(&self, p: &Poly<S>, n: usize, sign: i64) -> Poly<S> {
        let mut out = Poly::new();
        for (k, c) in p {
            let a = k.get(Slot::U);
            let w = k.weight();
            for j in 0..=a {
                if w + j as usize > n {
                    break;
                }
                let coef = c.times(&S::integer(binomial(a, j) * sign.pow(j)));
                let base = k.with(Slot::U, a - j);
                for (kp, vp) in self.phi_pow(j as usize) {
                    poly_add(&mut out, base.mul(&kp), coef.times(&vp));
                }
            }
        }
        out
    }

    /// Moyal product of two monomials with `ξ₀` central; weight is preserved exactly.
    fn moyal(&self, a: &Monomial, b: &Monomial) -> Poly<S> {
        let m = self.m;
        let mut pairs = Vec::with_capacity(2 * m);
        for j in 1..=m {
            pairs.push((Slot::X1(j), Slot::Xi1(j)));
            pairs.push((Slot::X2(j), Slot::Xi2(j)));
        }
        let mut base = Monomial::one(m);
        base.0[0] = a.0[0] + b.0[0];
        base.0[1] = a.0[1] + b.0[1];
        let mut out = Poly::new();
        let half_i = S::imag_unit().times(&S::rational(1, 2));
        let mut stack = vec![(0usize, base, S::one())];
        while let Some((idx, mono, c)) = stack.pop() {
            if idx == pairs.len() {
                poly_add(&mut out, mono, c);
                continue;
            }
            let (sx, sxi) = pairs[idx];
            let (p, q) = (a.get(sx), a.get(sxi));
            let (p2, q2) = (b.get(sx), b.get(sxi));
            for r in 0..=p.min(q2) {
                for s in 0..=q.min(p2) {
                    let num = falling(p, r) * falling(q2, r);
                    let num2 = falling(q, s) * falling(p2, s);
                    let mut coef = c.times(&S::rational(num, factorial(r))).times(&S::rational(num2, factorial(s)));
                    for _ in 0..r + s {
                        coef = coef.times(&half_i);
                    }
                    if s % 2 == 1 {
                        coef = coef.negated();
                    }
                    let mut next = mono.clone();
                    next.0[0] += r + s;
                    let i_x = sx.index(m);
                    let i_xi = sxi.index(m);
                    next.0[i_x] = p + p2 - r - s;
                    next.0[i_xi] = q + q2 - r - s;
                    stack.push((idx + 1, next, coef));
                }
            }
        }
        out
    }

    /// `a ⋆ b` for two monomials, truncated at weight `n`.
    pub fn mono_star(&self, a: &Monomial, b: &Monomial, n: usize) -> Poly<S> {
        if a.weight() + b.weight() > n {
            return Poly::new();
        }
        let key = (a.clone(), b.clone(), n);
        if let Some(hit) = self.cache.borrow().get(&key) {
            return hit.clone();
        }
        let direct = self.phi2.is_zero() || (a.get(Slot::U) == 0 && b.get(Slot::U) == 0);
        let out = if direct {
            self.moyal(a, b)
        } else {
            let pa = self.substitute(&[(a.clone(), S::one())].into_iter().collect(), n, 1);
            let pb = self.substitute(&[(b.clone(), S::one())].into_iter().collect(), n, 1);
            let mut prod = Poly::new();
            for (ka, va) in &pa {
                for (kb, vb) in &pb {
                    if ka.weight() + kb.weight() > n {
                        continue;
                    }
                    let c = va.times(vb);
                    for (k, v) in self.moyal(ka, kb) {
                        poly_add(&mut prod, k, v.times(&c));
                    }
                }
            }
            self.substitute(&prod, n, -1)
        };
        let out: Poly<S> = out.into_iter().filter(|(k, _)| k.weight() <= n).collect();
        self.cache.borrow_mut().insert(key, out.clone());
        out
    }

    fn bilinear<A, B, O: Clone>(
        &self,
        a: &BTreeMap<Monomial, A>,
        b: &BTreeMap<Monomial, B>,
        n: usize,
        prod: impl Fn(&A, &B) -> O,
        scale: impl Fn(&O, &S) -> O,
        add: impl Fn(&O, &O) -> O,
    ) -> BTreeMap<Monomial, O> {
        let mut out: BTreeMap<Monomial, O> = BTreeMap::new();
        for (ka, va) in a {
            for (kb, vb) in b {
                if ka.weight() + kb.weight() > n {
                    continue;
                }
                let p = prod(va, vb);
                for (k, c) in self.mono_star(ka, kb, n) {
                    let t = scale(&p, &c);
                    let v = match out.remove(&k) {
                        Some(old) => add(&old, &t),
                        None => t,
                    };
                    out.insert(k, v);
                }
            }
        }
        out
    }

    fn check(&self, m1: usize, m2: usize, t1: usize, t2: usize) -> Result<()> {
        if m1 != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: m1 });
        }
        if m2 != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: m2 });
        }
        if t1 != t2 {
            return Err(Error::TruncationMismatch { left: t1, right: t2 });
        }
        Ok(())
    }

    fn raw_star(&self, a: &Series<S>, b: &Series<S>, n: usize) -> Series<S> {
        let terms = self.bilinear(&a.terms, &b.terms, n, |x, y| x.times(y), |x, c| x.times(c), |x, y| x.plus(y));
        let mut out = Series::zero(self.m, n);
        for (k, v) in terms {
            out.add_term(k, v);
        }
        out
    }

    fn raw_spin_star(&self, a: &SpinSeries<S>, b: &SpinSeries<S>, n: usize) -> SpinSeries<S> {
        let terms = self.bilinear(&a.terms, &b.terms, n, |x, y| x.mul(y), |x, c| x.scaled(c), |x, y| x.plus(y));
        let mut out = SpinSeries::zero(self.m, n);
        for (k, v) in terms {
            out.add_term(k, v);
        }
        out
    }

    fn raw_left(&self, f: &Series<S>, x: &SpinSeries<S>, n: usize) -> SpinSeries<S> {
        let terms = self.bilinear(&f.terms, &x.terms, n, |c, y| y.scaled(c), |y, c| y.scaled(c), |x, y| x.plus(y));
        let mut out = SpinSeries::zero(self.m, n);
        for (k, v) in terms {
            out.add_term(k, v);
        }
        out
    }

    fn raw_right(&self, x: &SpinSeries<S>, f: &Series<S>, n: usize) -> SpinSeries<S> {
        let terms = self.bilinear(&x.terms, &f.terms, n, |y, c| y.scaled(c), |y, c| y.scaled(c), |x, y| x.plus(y));
        let mut out = SpinSeries::zero(self.m, n);
        for (k, v) in terms {
            out.add_term(k, v);
        }
        out
    }

    pub fn star(&self, a: &Series<S>, b: &Series<S>) -> Result<Series<S>> {
        self.check(a.m, b.m, a.trunc, b.trunc)?;
        Ok(self.raw_star(a, b, a.trunc))
    }

    pub fn spin_star(&self, a: &SpinSeries<S>, b: &SpinSeries<S>) -> Result<SpinSeries<S>> {
        self.check(a.m, b.m, a.trunc, b.trunc)?;
        Ok(self.raw_spin_star(a, b, a.trunc))
    }

    /// `a ⋆ b − b ⋆ a`.
    pub fn commutator(&self, a: &Series<S>, b: &Series<S>) -> Result<Series<S>> {
        Ok(self.star(a, b)?.minus(&self.star(b, a)?))
    }

    pub fn spin_commutator(&self, a: &SpinSeries<S>, b: &SpinSeries<S>) -> Result<SpinSeries<S>> {
        Ok(self.spin_star(a, b)?.minus(&self.spin_star(b, a)?))
    }

    fn divide_h<T>(terms: BTreeMap<Monomial, T>, mut keep: impl FnMut(Monomial, T)) {
        for (k, v) in terms {
            if k.0[0] > 0 {
                let mut k2 = k.clone();
                k2.0[0] -= 1;
                keep(k2, v);
            }
        }
    }

    /// `(i/h)[f, g]`, truncated at `g.trunc`.
    pub fn scalar_ad_over_h(&self, f: &Series<S>, g: &Series<S>) -> Series<S> {
        let n = g.trunc + 2;
        let c = self.raw_star(f, g, n).minus(&self.raw_star(g, f, n));
        let i = S::imag_unit();
        let mut out = Series::zero(self.m, g.trunc);
        Self::divide_h(c.terms, |k, v| out.add_term(k, v.times(&i)));
        out
    }

    /// `(i/h)[f, X]`, truncated at `X.trunc`.
    pub fn spin_ad_over_h(&self, f: &Series<S>, x: &SpinSeries<S>) -> SpinSeries<S> {
        let n = x.trunc + 2;
        let c = self.raw_left(f, x, n).minus(&self.raw_right(x, f, n));
        let i = S::imag_unit();
        let mut out = SpinSeries::zero(self.m, x.trunc);
        Self::divide_h(c.terms, |k, v| out.add_term(k, v.scaled(&i)));
        out
    }

    /// `i[A, X]`, truncated at `X.trunc`.
    pub fn matrix_ad(&self, a: &SpinSeries<S>, x: &SpinSeries<S>) -> SpinSeries<S> {
        let n = x.trunc;
        let c = self.raw_spin_star(a, x, n).minus(&self.raw_spin_star(x, a, n));
        c.scaled(&S::imag_unit())
    }

    /// `e^{G} X e^{−G}` summed as `Σ ad_Gⁿ X / n!`.
    ///
    /// The generator must raise weight (`f ∈ O₃` or `A ∈ O₁`), which makes the sum finite.
    pub fn conjugate(&self, x: &SpinSeries<S>, g: &Generator<S>) -> SpinSeries<S> {
        let mut out = x.clone();
        let mut term = x.clone();
        for n in 1..=x.trunc + 2 {
            term = match g {
                Generator::Scalar(f) => self.spin_ad_over_h(f, &term),
                Generator::Matrix(a) => self.matrix_ad(a, &term),
                Generator::Mixed(f, a) => self.spin_ad_over_h(f, &term).plus(&self.matrix_ad(a, &term)),
            };
            term = term.scaled(&S::rational(1, n as i64));
            if term.is_zero() {
                break;
            }
            out = out.plus(&term);
        }
        out
    }

    /// Pointwise product at `h = 0` is the leading symbol of the star product.
    pub fn leading(&self, a: &Series<S>, b: &Series<S>) -> Series<S> {
        a.pointwise(b)
    }

    pub fn u(&self, trunc: usize) -> Series<S> {
        Series::var(self.m, trunc, Slot::U)
    }

    pub fn identity_matrix(&self) -> Mat<S> {
        Mat::identity(1 << self.m)
    }
}

/// Generator of a conjugation: `e^{(i/h)f}`, `e^{iA}` or both at once.
#[derive(Debug, Clone)]
pub enum Generator<S: Scalar> {
    Scalar(Series<S>),
    Matrix(SpinSeries<S>),
    /// `e^{(i/h)f + iA}`.
    Mixed(Series<S>, SpinSeries<S>),
}
