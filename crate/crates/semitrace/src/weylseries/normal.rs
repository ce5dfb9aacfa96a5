use std::collections::HashMap;
use std::hash::Hash;

use super::algebra::Generator;
use super::koszul::{c0_series, twisted_laplacian0, KoszulElement, KoszulOp, WeylModel};
use super::linalg::{nullspace, solve, Dense};
use super::scalar::Scalar;
use super::series::{monomials_of_weight, monomials_up_to, Monomial, Series, Slot, SpinSeries};
use crate::error::{Error, Result};

struct Coords<K> {
    index: HashMap<K, usize>,
    keys: Vec<K>,
}

impl<K: Hash + Eq + Clone> Coords<K> {
    fn new() -> Self {
        Coords { index: HashMap::new(), keys: Vec::new() }
    }

    fn id(&mut self, k: &K) -> usize {
        if let Some(&i) = self.index.get(k) {
            return i;
        }
        self.keys.push(k.clone());
        self.index.insert(k.clone(), self.keys.len() - 1);
        self.keys.len() - 1
    }
}

type FormKey = (Vec<usize>, Monomial);

fn form_vector<S: Scalar>(e: &KoszulElement<S>, coords: &mut Coords<FormKey>) -> Vec<(usize, S)> {
    let mut out = Vec::new();
    for (subset, s) in &e.terms {
        for (k, v) in &s.terms {
            out.push((coords.id(&(subset.clone(), k.clone())), v.clone()));
        }
    }
    out
}

fn form_from_vector<S: Scalar>(m: usize, trunc: usize, keys: &[FormKey], x: &[S]) -> KoszulElement<S> {
    let mut e = KoszulElement::zero(m, trunc);
    for ((subset, mono), v) in keys.iter().zip(x) {
        if !v.vanishes() {
            e.add(subset, &Series::monomial(m, trunc, mono.clone(), v.clone())).expect("valid subset");
        }
    }
    e
}

fn subsets_of_sizes(n: usize, sizes: &[usize]) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|b| sizes.contains(&(b.count_ones() as usize)))
        .map(|b| (0..n).filter(|&i| b & (1 << i) != 0).collect())
        .collect()
}

fn dense<S: Scalar>(rows: usize, cols: &[Vec<(usize, S)>]) -> Dense<S> {
    Dense::from_columns(rows, cols)
}

fn combine<S: Scalar>(basis: &[KoszulElement<S>], x: &[S], m: usize, trunc: usize) -> KoszulElement<S> {
    let mut out = KoszulElement::zero(m, trunc);
    for (b, c) in basis.iter().zip(x) {
        if !c.vanishes() {
            out = out.plus(&b.scaled(c));
        }
    }
    out
}

/// Basis of the `Δ̃⁰`-harmonic, `φ̄`-commuting forms of weight exactly `w` in the given degrees.
///
/// Commuting with `φ̄₂` is imposed block by block, `(i/h)[Q̄_b, ω] = 0`.
pub fn harmonic_basis<S: Scalar>(
    model: &WeylModel<S>,
    trunc: usize,
    w: usize,
    degrees: &[usize],
    primed_only: bool,
) -> Vec<KoszulElement<S>> {
    let m = model.m();
    let monos: Vec<Monomial> =
        monomials_of_weight(m, w).into_iter().filter(|k| !primed_only || k.primed_order() >= 1).collect();
    let subsets = subsets_of_sizes(2 * m + 1, degrees);
    let quads: Vec<Series<S>> =
        model.blocks.iter().map(|(_, q)| super::koszul::bar_quadratic::<S>(m, *q)).collect();
    let mut rows: Coords<(usize, Vec<usize>, Monomial)> = Coords::new();
    let mut cols = Vec::new();
    let mut domain = Vec::new();
    for subset in &subsets {
        for mono in &monos {
            let e = KoszulElement::single(subset, Series::monomial(m, trunc, mono.clone(), S::one())).expect("valid");
            let mut col = Vec::new();
            for (sub, s) in &twisted_laplacian0(model, &e).terms {
                for (k, v) in &s.terms {
                    col.push((rows.id(&(0, sub.clone(), k.clone())), v.clone()));
                }
            }
            let coef = &e.terms[subset];
            for (b, q) in quads.iter().enumerate() {
                for (k, v) in &model.algebra.scalar_ad_over_h(q, coef).terms {
                    col.push((rows.id(&(b + 1, subset.clone(), k.clone())), v.clone()));
                }
            }
            cols.push(col);
            domain.push((subset.clone(), mono.clone()));
        }
    }
    if cols.is_empty() {
        return Vec::new();
    }
    let a = dense(rows.keys.len(), &cols);
    if rows.keys.is_empty() {
        return domain
            .iter()
            .map(|(s, k)| KoszulElement::single(s, Series::monomial(m, trunc, k.clone(), S::one())).expect("valid"))
            .collect();
    }
    nullspace(&a).into_iter().map(|v| form_from_vector(m, trunc, &domain, &v)).collect()
}

/// Output of [`hodge_decompose`]: `e = i_x w̃_∂ α + w̃_∂ i_x β + harmonic`.
///
/// `alpha` and `beta` are carried at truncation `N+1`; the image parts are truncated at `N`.
#[derive(Debug, Clone)]
pub struct HodgeParts<S: Scalar> {
    pub im_ix_w: KoszulElement<S>,
    pub im_w_ix: KoszulElement<S>,
    pub harmonic: KoszulElement<S>,
    pub alpha: KoszulElement<S>,
    pub beta: KoszulElement<S>,
}

/// Decomposition of a degree-homogeneous element of `D_N ⊗ Λ^k W`.
///
/// The harmonic slot is the part of the harmonic space orthogonal (coordinate
/// Hermitian product) to its intersection with the image, which makes the sum direct.
pub fn hodge_decompose<S: Scalar>(model: &WeylModel<S>, e: &KoszulElement<S>) -> Result<HodgeParts<S>> {
    let m = model.m();
    if e.m != m {
        return Err(Error::DimensionMismatch { expected: m, got: e.m });
    }
    let n = e.trunc;
    let zero = || KoszulElement::zero(m, n);
    let degrees = e.degrees();
    if degrees.is_empty() {
        return Ok(HodgeParts { im_ix_w: zero(), im_w_ix: zero(), harmonic: zero(), alpha: zero(), beta: zero() });
    }
    if degrees.len() > 1 {
        return Err(Error::param("e", "must be homogeneous in wedge degree"));
    }
    let k = degrees[0];
    let subsets = subsets_of_sizes(2 * m + 1, &[k]);
    let mut coords: Coords<FormKey> = Coords::new();
    let mut basis = Vec::new();
    for subset in &subsets {
        for mono in monomials_up_to(m, n) {
            coords.id(&(subset.clone(), mono.clone()));
            basis.push(KoszulElement::single(subset, Series::monomial(m, n + 1, mono, S::one())).expect("valid"));
        }
    }
    let ix_w = |b: &KoszulElement<S>| KoszulOp::Ix.apply(model, &KoszulOp::TwistedWd.apply(model, b)).truncated(n);
    let w_ix = |b: &KoszulElement<S>| KoszulOp::TwistedWd.apply(model, &KoszulOp::Ix.apply(model, b)).truncated(n);
    let im1: Vec<Vec<(usize, S)>> = basis.iter().map(|b| form_vector(&ix_w(b), &mut coords)).collect();
    let im2: Vec<Vec<(usize, S)>> = basis.iter().map(|b| form_vector(&w_ix(b), &mut coords)).collect();
    let harmonic: Vec<KoszulElement<S>> = (0..=n).flat_map(|w| harmonic_basis(model, n, w, &[k], false)).collect();
    let hcols: Vec<Vec<(usize, S)>> = harmonic.iter().map(|h| form_vector(h, &mut coords)).collect();
    let rows = coords.keys.len();

    // harmonic ∩ image, then its orthogonal complement inside the harmonic space
    let mut stacked = hcols.clone();
    for col in im1.iter().chain(&im2) {
        stacked.push(col.iter().map(|(r, v)| (*r, v.negated())).collect());
    }
    let hdense = dense(rows, &hcols);
    let mut overlap: Vec<Vec<S>> = Vec::new();
    if !hcols.is_empty() {
        for v in nullspace(&dense(rows, &stacked)) {
            let c = &v[..hcols.len()];
            if c.iter().all(|x| x.vanishes()) {
                continue;
            }
            let vec: Vec<S> = (0..rows)
                .map(|r| {
                    (0..hcols.len()).fold(S::zero(), |acc, j| acc.plus(&hdense.data[r * hcols.len() + j].times(&c[j])))
                })
                .collect();
            overlap.push(vec);
        }
    }
    let hc: Vec<KoszulElement<S>> = if overlap.is_empty() {
        harmonic.clone()
    } else {
        let gram: Vec<Vec<(usize, S)>> = (0..hcols.len())
            .map(|j| {
                overlap
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let dot = (0..rows).fold(S::zero(), |acc, r| {
                            acc.plus(&v[r].conjugate().times(&hdense.data[r * hcols.len() + j]))
                        });
                        (i, dot)
                    })
                    .collect()
            })
            .collect();
        nullspace(&dense(overlap.len(), &gram)).into_iter().map(|c| combine(&harmonic, &c, m, n)).collect()
    };
    let hc_cols: Vec<Vec<(usize, S)>> = hc.iter().map(|h| form_vector(h, &mut coords)).collect();
    let rhs_sparse = form_vector(e, &mut coords);
    let rows = coords.keys.len();
    let mut rhs = vec![S::zero(); rows];
    for (r, v) in rhs_sparse {
        rhs[r] = rhs[r].plus(&v);
    }
    let mut all = im1;
    all.extend(im2);
    all.extend(hc_cols);
    let a = dense(rows, &all);
    let x = solve(&a, &rhs).map_err(|inc| {
        let (label, weight) = match inc.witness_row {
            Some(r) => {
                let (s, k) = &coords.keys[r];
                (format!("{:?} ⊗ {:?}", k.0, s), k.weight())
            }
            None => ("unknown".into(), 0),
        };
        Error::ResonantObstruction { weight, detail: format!("rank {}; kernel direction at {}", inc.rank, label) }
    })?;
    let nb = basis.len();
    let alpha = combine(&basis, &x[..nb], m, n + 1);
    let beta = combine(&basis, &x[nb..2 * nb], m, n + 1);
    let harm = combine(&hc, &x[2 * nb..], m, n);
    let im_ix_w = ix_w(&alpha);
    let im_w_ix = w_ix(&beta);
    let recon = im_ix_w.plus(&im_w_ix).plus(&harm).minus(e);
    let ok = if S::is_exact() { recon.is_zero() } else { recon.max_abs() <= 1e-8 * e.max_abs().max(1.0) };
    if !ok {
        return Err(Error::SingularSolve { weight: n });
    }
    Ok(HodgeParts { im_ix_w, im_w_ix, harmonic: harm, alpha, beta })
}

/// `H₁ = (1/L) u e₀ + Σ (2μ_j)^{1/2} (x_j e_{2j−1} + ξ_j e_{2j})` as a form.
pub fn model_symbol<S: Scalar>(model: &WeylModel<S>, trunc: usize) -> KoszulElement<S> {
    let m = model.m();
    let mut e = KoszulElement::zero(m, trunc);
    let u = Series::var(m, trunc, Slot::U).scaled(&model.inv_length);
    e.add(&[0], &u).expect("valid");
    for j in 1..=m {
        let c = model.sqrt_mu[j - 1].times(&S::sqrt2());
        e.add(&[2 * j - 1], &Series::var(m, trunc, Slot::X1(j)).scaled(&c)).expect("valid");
        e.add(&[2 * j], &Series::var(m, trunc, Slot::Xi1(j)).scaled(&c)).expect("valid");
    }
    e
}

/// One weight of the normal-form iteration: conjugate by `e^{(i/h)f + ic₀(a)}`.
#[derive(Debug, Clone)]
pub struct ConjugationStep<S: Scalar> {
    pub weight: usize,
    pub f: Series<S>,
    pub a: KoszulElement<S>,
    pub omega: KoszulElement<S>,
}

#[derive(Debug, Clone)]
pub struct NormalForm<S: Scalar> {
    pub n: usize,
    /// Applied in order; the total conjugation is the ordered product.
    pub steps: Vec<ConjugationStep<S>>,
    pub f: Series<S>,
    pub a: KoszulElement<S>,
    pub omega: KoszulElement<S>,
    pub conjugated: SpinSeries<S>,
}

type SpinKey = (Monomial, usize);

fn spin_vector<S: Scalar>(x: &SpinSeries<S>, coords: &mut Coords<SpinKey>) -> Vec<(usize, S)> {
    let mut out = Vec::new();
    for (k, mat) in &x.terms {
        for (i, v) in mat.e.iter().enumerate() {
            if !v.vanishes() {
                out.push((coords.id(&(k.clone(), i)), v.clone()));
            }
        }
    }
    out
}

fn spin_close<S: Scalar>(x: &SpinSeries<S>, scale: f64) -> bool {
    if S::is_exact() {
        x.is_zero()
    } else {
        x.max_abs() <= 1e-8 * scale.max(1.0)
    }
}

#[derive(Clone)]
struct Candidate<S: Scalar> {
    f: Series<S>,
    a: KoszulElement<S>,
}

impl<S: Scalar> Candidate<S> {
    fn gain(&self) -> usize {
        let gf = self.f.min_weight().map(|w| w.saturating_sub(2));
        let ga = self.a.min_weight();
        gf.into_iter().chain(ga).min().unwrap_or(0).max(1)
    }

    /// First-order effect on `d`, all weights up to `w`.
    fn effect(&self, alg: &super::algebra::WeylAlgebra<S>, d: &SpinSeries<S>, w: usize) -> SpinSeries<S> {
        let mut dd = d.truncated(w.saturating_sub(self.gain()));
        dd.trunc = w;
        let mut out = SpinSeries::zero(d.m, w);
        if !self.f.is_zero() {
            out = out.plus(&alg.spin_ad_over_h(&self.f, &dd));
        }
        if !self.a.is_zero() {
            out = out.plus(&alg.matrix_ad(&c0_series(&self.a), &dd));
        }
        out
    }

    fn combine(cands: &[Candidate<S>], x: &[S], m: usize, t: usize) -> Candidate<S> {
        let mut f = Series::zero(m, t + 1);
        let mut a = KoszulElement::zero(m, t);
        for (c, v) in cands.iter().zip(x) {
            if !v.vanishes() {
                f = f.plus(&c.f.scaled(v));
                a = a.plus(&c.a.scaled(v));
            }
        }
        Candidate { f, a }
    }
}

fn dot_columns<S: Scalar>(p: &[(usize, S)], q: &[(usize, S)]) -> S {
    let qm: HashMap<usize, &S> = q.iter().map(|(r, v)| (*r, v)).collect();
    p.iter().fold(S::zero(), |acc, (r, v)| match qm.get(r) {
        Some(w) => acc.plus(&v.conjugate().times(w)),
        None => acc,
    })
}

fn lin_comb<S: Scalar>(cols: &[Vec<(usize, S)>], c: &[S]) -> Vec<(usize, S)> {
    let mut acc: HashMap<usize, S> = HashMap::new();
    for (col, v) in cols.iter().zip(c) {
        if v.vanishes() {
            continue;
        }
        for (r, x) in col {
            let e = acc.entry(*r).or_insert_with(S::zero);
            *e = e.plus(&x.times(v));
        }
    }
    acc.into_iter().filter(|(_, v)| !v.vanishes()).collect()
}

/// Coefficients (in `h`) spanning the part of `span(h)` orthogonal to `span(h) ∩ span(effects)`.
fn complement_in<S: Scalar>(rows: usize, h: &[Vec<(usize, S)>], effects: &[Vec<(usize, S)>]) -> Vec<Vec<S>> {
    let identity = |n: usize| -> Vec<Vec<S>> {
        (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect()
    };
    if h.is_empty() {
        return Vec::new();
    }
    let mut stacked = h.to_vec();
    stacked.extend(effects.iter().map(|c| c.iter().map(|(r, v)| (*r, v.negated())).collect::<Vec<_>>()));
    let overlap: Vec<Vec<(usize, S)>> = nullspace(&dense(rows, &stacked))
        .into_iter()
        .map(|v| v[..h.len()].to_vec())
        .filter(|c| c.iter().any(|x| !x.vanishes()))
        .map(|c| lin_comb(h, &c))
        .collect();
    if overlap.is_empty() {
        return identity(h.len());
    }
    let gram: Vec<Vec<(usize, S)>> =
        h.iter().map(|hj| overlap.iter().enumerate().map(|(i, v)| (i, dot_columns(v, hj))).collect()).collect();
    nullspace(&dense(overlap.len(), &gram))
}

fn weight_setup<S: Scalar>(
    model: &WeylModel<S>,
    d: &SpinSeries<S>,
    carried: &[Candidate<S>],
    w: usize,
    t: usize,
) -> Result<(Vec<Candidate<S>>, Coords<SpinKey>, Vec<Vec<(usize, S)>>)> {
    let m = model.m();
    let alg = &model.algebra;
    let mut cands: Vec<Candidate<S>> = carried.to_vec();
    for k in monomials_of_weight(m, w + 1) {
        cands.push(Candidate { f: Series::monomial(m, t + 1, k, S::one()), a: KoszulElement::zero(m, t) });
    }
    let even: Vec<usize> = (2..=2 * m + 1).step_by(2).collect();
    for subset in subsets_of_sizes(2 * m + 1, &even) {
        for k in monomials_of_weight(m, w - 1) {
            let a = KoszulElement::single(&subset, Series::monomial(m, t, k, S::one()))?;
            cands.push(Candidate { f: Series::zero(m, t + 1), a });
        }
    }
    let mut coords: Coords<SpinKey> = Coords::new();
    let cols = cands.iter().map(|c| spin_vector(&c.effect(alg, d, w), &mut coords)).collect();
    Ok((cands, coords, cols))
}

/// Primed harmonic odd forms of weight `w` that complement the image of the
/// weight-`w` homological operator at `d₁`, with no carried generators.
pub fn normal_form_harmonics<S: Scalar>(
    model: &WeylModel<S>,
    d1: &KoszulElement<S>,
    w: usize,
) -> Result<Vec<KoszulElement<S>>> {
    let m = model.m();
    let t = d1.trunc;
    if w < 2 || w > t {
        return Err(Error::param("w", format!("weight {w} outside 2..={t}")));
    }
    let d = c0_series(d1);
    let (_, mut coords, cols) = weight_setup(model, &d, &[], w, t)?;
    let odd: Vec<usize> = (1..=2 * m + 1).step_by(2).collect();
    let harmonics = harmonic_basis(model, t, w, &odd, true);
    let hcols: Vec<Vec<(usize, S)>> = harmonics.iter().map(|h| spin_vector(&c0_series(h), &mut coords)).collect();
    let rows = coords.keys.len();
    Ok(complement_in(rows, &hcols, &cols).iter().map(|c| combine(&harmonics, c, m, t)).collect())
}

/// Formal normal form `G d₁ G⁻¹ = H₁ + c₀(ω) + O_{n+1}` with `G` an ordered product of `e^{(i/h)f_w + ic₀(a_w)}`.
///
/// Weight by weight the homological equation is solved over `f` of weight `w+1`,
/// even forms `a` of weight `w−1`, and the generators left in the kernel
/// of the previous weight, which enter linearly. `ω` takes values in the primed
/// harmonic odd forms orthogonal to the image of the conjugations, so it only
/// absorbs what they cannot remove.
pub fn birkhoff_normal_form<S: Scalar>(model: &WeylModel<S>, d1: &KoszulElement<S>, n: usize) -> Result<NormalForm<S>> {
    let m = model.m();
    if d1.m != m {
        return Err(Error::DimensionMismatch { expected: m, got: d1.m });
    }
    let t = d1.trunc;
    if n > t {
        return Err(Error::param("n", format!("order {n} exceeds the truncation {t}")));
    }
    if d1.terms.keys().any(|s| s.len() % 2 == 0) {
        return Err(Error::param("d1", "must be an odd form"));
    }
    let h1_form = model_symbol(model, t);
    let pert = d1.minus(&h1_form);
    if pert.min_weight().is_some_and(|w| w < 2) {
        return Err(Error::param("d1", "perturbation of the model symbol must lie in O₂"));
    }
    let alg = &model.algebra;
    let h1 = c0_series(&h1_form);
    let mut d = c0_series(d1);
    let scale = d.max_abs();
    let mut omega = KoszulElement::zero(m, t);
    let mut f_total = Series::zero(m, t + 1);
    let mut a_total = KoszulElement::zero(m, t);
    let mut steps = Vec::new();
    let odd: Vec<usize> = (1..=2 * m + 1).step_by(2).collect();
    let mut carried: Vec<Candidate<S>> = Vec::new();

    for w in 2..=n {
        let rem = d.minus(&h1).minus(&c0_series(&omega)).graded(w);
        let (cands, mut coords, cols) = weight_setup(model, &d, &carried, w, t)?;
        let harmonics = harmonic_basis(model, t, w, &odd, true);
        let hcols: Vec<Vec<(usize, S)>> =
            harmonics.iter().map(|h| spin_vector(&c0_series(h), &mut coords)).collect();
        let rhs_sparse = spin_vector(&rem.scaled(&S::integer(-1)), &mut coords);
        let rows = coords.keys.len();
        let hc: Vec<KoszulElement<S>> =
            complement_in(rows, &hcols, &cols).iter().map(|c| combine(&harmonics, c, m, t)).collect();
        let mut all = cols.clone();
        for h in &hc {
            let v = spin_vector(&c0_series(h).scaled(&S::integer(-1)), &mut coords);
            all.push(v);
        }
        let rows = coords.keys.len();
        let mut rhs = vec![S::zero(); rows];
        for (r, v) in rhs_sparse {
            rhs[r] = rhs[r].plus(&v);
        }
        let nc = cands.len();
        let x = if rem.is_zero() {
            vec![S::zero(); all.len()]
        } else {
            solve(&dense(rows, &all), &rhs).map_err(|inc| {
                let label = inc
                    .witness_row
                    .map(|r| format!("{:?} entry {}", coords.keys[r].0 .0, coords.keys[r].1))
                    .unwrap_or_else(|| "unknown".into());
                Error::ResonantObstruction { weight: w, detail: format!("rank {}; kernel direction at {}", inc.rank, label) }
            })?
        };
        carried = if w < n {
            nullspace(&dense(rows, &cols)).iter().map(|v| Candidate::combine(&cands, v, m, t)).collect()
        } else {
            Vec::new()
        };
        let Candidate { f, a } = Candidate::combine(&cands, &x[..nc], m, t);
        let om = combine(&hc, &x[nc..], m, t);
        if !f.is_zero() || !a.is_zero() {
            d = alg.conjugate(&d, &Generator::Mixed(f.clone(), c0_series(&a)));
        }
        omega = omega.plus(&om);
        let check = d.minus(&h1).minus(&c0_series(&omega));
        for v in 0..=w {
            if !spin_close(&check.graded(v), scale) {
                return Err(Error::ResonantObstruction {
                    weight: v,
                    detail: format!("remainder at weight {v} did not cancel after the weight-{w} step"),
                });
            }
        }
        f_total = f_total.plus(&f);
        a_total = a_total.plus(&a);
        steps.push(ConjugationStep { weight: w, f, a, omega: om });
    }
    Ok(NormalForm { n, steps, f: f_total, a: a_total, omega, conjugated: d })
}

/// `conjugated − H₁ − c₀(ω)`; all its monomials have weight above `n`.
pub fn normal_form_residual<S: Scalar>(model: &WeylModel<S>, nf: &NormalForm<S>) -> SpinSeries<S> {
    let t = nf.conjugated.trunc;
    nf.conjugated.minus(&c0_series(&model_symbol(model, t))).minus(&c0_series(&nf.omega))
}
