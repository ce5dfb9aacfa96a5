//! Linear symplectic return maps: block classification, non-resonance certificates,
//! `|det(1-P^ℓ)|`, Maslov indices, and the model contact form's Reeb flow.
//!
//! Coordinates on `R^{2m}` are `(x_1..x_m, x_{m+1}..x_{2m})`, `ω = Σ dx_j ∧ dx_{j+m}`,
//! `J = [[0, I], [-I, 0]]`, and the Hamiltonian field of `f` is
//! `ẋ_j = ∂f/∂x_{j+m}`, `ẋ_{j+m} = -∂f/∂x_j`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

pub const UNIT_CIRCLE_TOL: f64 = 1e-8;

pub fn standard_j(m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for k in 0..m {
        j[(k, k + m)] = 1.0;
        j[(k + m, k)] = -1.0;
    }
    j
}

/// `‖PᵀJP - J‖_max`.
pub fn symplectic_defect(p: &DMatrix<f64>) -> f64 {
    let m = p.nrows() / 2;
    let j = standard_j(m);
    (p.transpose() * &j * p - j).amax()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    pub entries: DMatrix<f64>,
}

impl SymplecticMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || n % 2 != 0 || entries.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n + n % 2, got: entries.ncols() });
        }
        let defect = symplectic_defect(&entries);
        let scale = entries.amax().powi(2).max(1.0);
        if !(defect <= 1e-10 * scale) {
            return Err(Error::NonSymplectic { defect });
        }
        Ok(SymplecticMatrix { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: rows.iter().map(|r| r.len()).max().unwrap_or(0) });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn m(&self) -> usize {
        self.entries.nrows() / 2
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub elliptic: Vec<f64>,
    pub pos_hyp: Vec<f64>,
    pub neg_hyp: Vec<f64>,
    pub loxodromic: Vec<(f64, f64)>,
}

impl BlockDecomposition {
    pub fn m(&self) -> usize {
        self.elliptic.len() + self.pos_hyp.len() + self.neg_hyp.len() + 2 * self.loxodromic.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.elliptic.iter().any(|&b| !(b > 0.0 && b < 2.0 * PI)) {
            return Err(Error::param("elliptic", "angles must lie in (0, 2π)"));
        }
        if self.pos_hyp.iter().chain(&self.neg_hyp).any(|&a| !(a > 0.0)) {
            return Err(Error::param("hyperbolic", "exponents must be positive"));
        }
        if self.loxodromic.iter().any(|&(a, b)| !(a > 0.0 && b > 0.0 && b < PI)) {
            return Err(Error::param("loxodromic", "need α > 0 and β ∈ (0, π)"));
        }
        Ok(())
    }

    /// Lists sorted, for multiset comparison.
    pub fn sorted(&self) -> Self {
        let mut d = self.clone();
        d.elliptic.sort_by(f64::total_cmp);
        d.pos_hyp.sort_by(f64::total_cmp);
        d.neg_hyp.sort_by(f64::total_cmp);
        d.loxodromic.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        d
    }

    /// Largest entrywise difference after sorting; `None` if the block counts differ.
    pub fn distance(&self, other: &Self) -> Option<f64> {
        let (a, b) = (self.sorted(), other.sorted());
        if a.elliptic.len() != b.elliptic.len()
            || a.pos_hyp.len() != b.pos_hyp.len()
            || a.neg_hyp.len() != b.neg_hyp.len()
            || a.loxodromic.len() != b.loxodromic.len()
        {
            return None;
        }
        let mut d: f64 = 0.0;
        for (x, y) in a.elliptic.iter().zip(&b.elliptic) {
            d = d.max((x - y).abs());
        }
        for (x, y) in a.pos_hyp.iter().zip(&b.pos_hyp).chain(a.neg_hyp.iter().zip(&b.neg_hyp)) {
            d = d.max((x - y).abs());
        }
        for (x, y) in a.loxodromic.iter().zip(&b.loxodromic) {
            d = d.max((x.0 - y.0).abs()).max((x.1 - y.1).abs());
        }
        Some(d)
    }
}

/// Planes used by each block: elliptic first, then negative- and positive-hyperbolic,
/// loxodromic block `j` (1-based) on planes `m-2j+1, m-2j+2`. Planes are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneLayout {
    pub m: usize,
    pub elliptic: Vec<usize>,
    pub neg_hyp: Vec<usize>,
    pub pos_hyp: Vec<usize>,
    pub loxodromic: Vec<(usize, usize)>,
}

impl PlaneLayout {
    pub fn of(d: &BlockDecomposition) -> Self {
        let m = d.m();
        let ne = d.elliptic.len();
        let nn = d.neg_hyp.len();
        let np = d.pos_hyp.len();
        PlaneLayout {
            m,
            elliptic: (1..=ne).collect(),
            neg_hyp: (ne + 1..=ne + nn).collect(),
            pos_hyp: (ne + nn + 1..=ne + nn + np).collect(),
            loxodromic: (1..=d.loxodromic.len()).map(|j| (m - 2 * j + 1, m - 2 * j + 2)).collect(),
        }
    }
}

fn rot(b: f64) -> Matrix2<f64> {
    Matrix2::new(b.cos(), -b.sin(), b.sin(), b.cos())
}

fn put_plane(p: &mut DMatrix<f64>, m: usize, plane: usize, b: Matrix2<f64>) {
    let (i, k) = (plane - 1, plane - 1 + m);
    p[(i, i)] = b[(0, 0)];
    p[(i, k)] = b[(0, 1)];
    p[(k, i)] = b[(1, 0)];
    p[(k, k)] = b[(1, 1)];
}

/// 4×4 loxodromic block in the ordering `(x_p, x_q, x_{p+m}, x_{q+m})`:
/// positions `e^{-α}R(β)`, momenta `e^{α}R(β)`.
pub fn loxodromic_block(alpha: f64, beta: f64) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(4, 4);
    let r = rot(beta);
    for i in 0..2 {
        for k in 0..2 {
            b[(i, k)] = (-alpha).exp() * r[(i, k)];
            b[(i + 2, k + 2)] = alpha.exp() * r[(i, k)];
        }
    }
    b
}

/// Block-diagonal normal form of a decomposition in the layout of [`PlaneLayout`].
pub fn assemble_normal_form(d: &BlockDecomposition) -> Result<DMatrix<f64>> {
    d.validate()?;
    let lay = PlaneLayout::of(d);
    let m = lay.m;
    let mut p = DMatrix::zeros(2 * m, 2 * m);
    for (&plane, &b) in lay.elliptic.iter().zip(&d.elliptic) {
        put_plane(&mut p, m, plane, rot(b));
    }
    for (&plane, &a) in lay.neg_hyp.iter().zip(&d.neg_hyp) {
        put_plane(&mut p, m, plane, Matrix2::new(-a.exp(), 0.0, 0.0, -(-a).exp()));
    }
    for (&plane, &a) in lay.pos_hyp.iter().zip(&d.pos_hyp) {
        put_plane(&mut p, m, plane, Matrix2::new(a.exp(), 0.0, 0.0, (-a).exp()));
    }
    for (&(pp, qq), &(a, b)) in lay.loxodromic.iter().zip(&d.loxodromic) {
        let blk = loxodromic_block(a, b);
        let idx = [pp - 1, qq - 1, pp - 1 + m, qq - 1 + m];
        for r in 0..4 {
            for c in 0..4 {
                p[(idx[r], idx[c])] = blk[(r, c)];
            }
        }
    }
    Ok(p)
}

/// Inverse of a symplectic matrix, `-J Pᵀ J`.
pub fn symplectic_inverse(p: &DMatrix<f64>) -> DMatrix<f64> {
    let j = standard_j(p.nrows() / 2);
    -(&j * p.transpose() * &j)
}

fn null_vector(a: &DMatrix<Complex64>) -> DVector<Complex64> {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty");
    v_t.row(k).transpose().map(|z| z.conj())
}

/// Partitions the spectrum of `P` into elliptic pairs, real pairs and loxodromic quartets.
/// Elliptic angles are chosen by the Krein sign `-Im(v^H J v) > 0` of the eigenvector.
pub fn classify_return_map(p: &SymplecticMatrix) -> Result<BlockDecomposition> {
    classify_with_tol(p, UNIT_CIRCLE_TOL)
}

pub fn classify_with_tol(p: &SymplecticMatrix, tol: f64) -> Result<BlockDecomposition> {
    let n = p.entries.nrows();
    let m = n / 2;
    let eig: Vec<Complex64> = p.entries.complex_eigenvalues().iter().copied().collect();
    for (i, a) in eig.iter().enumerate() {
        if (a - 1.0).norm() < tol {
            return Err(Error::DegenerateSpectrum { reason: format!("eigenvalue {a} at 1") });
        }
        for b in &eig[i + 1..] {
            if (a - b).norm() < tol * a.norm().max(1.0) {
                return Err(Error::DegenerateSpectrum { reason: format!("eigenvalues {a} and {b} collide") });
            }
        }
    }
    let jc = standard_j(m).map(|x| Complex64::new(x, 0.0));
    let pc = p.entries.map(|x| Complex64::new(x, 0.0));
    let mut d = BlockDecomposition::default();
    for &l in &eig {
        let r = l.norm();
        if (r - 1.0).abs() < tol {
            if l.im.abs() < tol {
                return Err(Error::DegenerateSpectrum { reason: format!("eigenvalue {l} at -1") });
            }
            let shifted = &pc - DMatrix::identity(n, n) * l;
            let v = null_vector(&shifted);
            let krein = -(v.adjoint() * &jc * &v)[(0, 0)].im;
            if krein > 0.0 {
                d.elliptic.push(l.arg().rem_euclid(2.0 * PI));
            }
        } else if l.im.abs() < tol * r {
            if l.re > 1.0 {
                d.pos_hyp.push(l.re.ln());
            } else if l.re < -1.0 {
                d.neg_hyp.push((-l.re).ln());
            }
        } else if r > 1.0 && l.im > 0.0 {
            d.loxodromic.push((r.ln(), l.arg()));
        }
    }
    if d.m() != m {
        return Err(Error::DegenerateSpectrum { reason: format!("blocks cover {} of {m} planes", d.m()) });
    }
    Ok(d)
}

/// Signed `det(1 - P^ℓ)` per block product.
pub fn det_one_minus_signed(d: &BlockDecomposition, ell: i64) -> Result<f64> {
    if ell < 1 {
        return Err(Error::param("ell", "must be at least 1"));
    }
    let l = ell as f64;
    let mut det = 1.0;
    for &b in &d.elliptic {
        let s = (l * b / 2.0).sin();
        if s.abs() < 1e-12 {
            return Err(Error::DegenerateIterate { ell });
        }
        det *= 4.0 * s * s;
    }
    for &a in &d.pos_hyp {
        det *= -4.0 * (l * a / 2.0).sinh().powi(2);
    }
    for &a in &d.neg_hyp {
        det *= if ell % 2 == 1 { 4.0 * (l * a / 2.0).cosh().powi(2) } else { -4.0 * (l * a / 2.0).sinh().powi(2) };
    }
    for &(a, b) in &d.loxodromic {
        let one = Complex64::new(1.0, 0.0);
        let z1 = one - Complex64::new(l * a, l * b).exp();
        let z2 = one - Complex64::new(-l * a, l * b).exp();
        det *= z1.norm_sqr() * z2.norm_sqr();
    }
    Ok(det)
}

/// `|det(1 - P^ℓ)|`.
pub fn det_one_minus(d: &BlockDecomposition, ell: i64) -> Result<f64> {
    det_one_minus_signed(d, ell).map(f64::abs)
}

/// Per-block Conley–Zehnder count: elliptic `1 + 2⌊ℓβ/2π⌋`, positive-hyperbolic and
/// loxodromic 0, negative-hyperbolic `ℓ`.
pub fn maslov_index(d: &BlockDecomposition, ell: i64) -> Result<i64> {
    if ell < 1 {
        return Err(Error::param("ell", "must be at least 1"));
    }
    let mut total = 0;
    for &b in &d.elliptic {
        if (ell as f64 * b / 2.0).sin().abs() < 1e-12 {
            return Err(Error::DegenerateIterate { ell });
        }
        total += 1 + 2 * (ell as f64 * b / (2.0 * PI)).floor() as i64;
    }
    total += ell * d.neg_hyp.len() as i64;
    Ok(total)
}

/// Conley–Zehnder index of a sampled path of 2×2 symplectic matrices from the identity,
/// from the continuously tracked polar angle `θ`: elliptic endpoint `2⌊θ/2π⌋ + 1`,
/// hyperbolic endpoint `θ/π`.
pub fn conley_zehnder_2x2(path: &[Matrix2<f64>]) -> Result<i64> {
    let last = path.last().ok_or_else(|| Error::param("path", "empty"))?;
    let mut theta = 0.0;
    let mut prev = 0.0;
    for p in path {
        let a = (p[(1, 0)] - p[(0, 1)]).atan2(p[(0, 0)] + p[(1, 1)]);
        let mut step = a - prev;
        step -= 2.0 * PI * (step / (2.0 * PI)).round();
        theta += step;
        prev = a;
    }
    let tr = last.trace();
    if (tr - 2.0).abs() < 1e-12 {
        return Err(Error::DegenerateSpectrum { reason: "endpoint has eigenvalue 1".into() });
    }
    if tr.abs() < 2.0 {
        Ok(2 * (theta / (2.0 * PI)).floor() as i64 + 1)
    } else {
        Ok((theta / PI).round() as i64)
    }
}

/// Sampled generating paths of the 2×2 blocks of `d`, iterated `ℓ` times.
pub fn block_paths(d: &BlockDecomposition, ell: i64, samples: usize) -> Vec<Vec<Matrix2<f64>>> {
    let l = ell as f64;
    let grid = |f: &dyn Fn(f64) -> Matrix2<f64>| -> Vec<Matrix2<f64>> {
        (0..=samples).map(|k| f(l * k as f64 / samples as f64)).collect()
    };
    let mut out = Vec::new();
    for &b in &d.elliptic {
        out.push(grid(&|s| rot(s * b)));
    }
    for &a in &d.pos_hyp {
        out.push(grid(&|s| Matrix2::new((s * a).exp(), 0.0, 0.0, (-s * a).exp())));
    }
    for &a in &d.neg_hyp {
        out.push(grid(&|s| rot(PI * s) * Matrix2::new((s * a).exp(), 0.0, 0.0, (-s * a).exp())));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Resonance {
    Certified { bound: i64, tol: f64 },
    Relation { set: String, coefficients: Vec<i64>, residual: f64 },
}

impl Resonance {
    pub fn is_certified(&self) -> bool {
        matches!(self, Resonance::Certified { .. })
    }
}

/// Smallest-`‖c‖₁` integer vector with `‖c‖_∞ ≤ bound` and `|c·v| < tol ‖c‖₁`, sign-normalized.
pub fn find_integer_relation(v: &[f64], bound: i64, tol: f64) -> Option<(Vec<i64>, f64)> {
    let n = v.len();
    if n == 0 || bound < 1 {
        return None;
    }
    let mut best: Option<(Vec<i64>, i64, f64)> = None;
    let last = v[n - 1];
    let mut c = vec![-bound; n - 1];
    loop {
        let partial: f64 = c.iter().zip(v).map(|(&a, &b)| a as f64 * b).sum();
        let head_norm: i64 = c.iter().map(|x| x.abs()).sum();
        let k = if last != 0.0 { (-partial / last).round() as i64 } else { 0 };
        for kk in [k - 1, k, k + 1] {
            if kk.abs() > bound {
                continue;
            }
            let norm1 = head_norm + kk.abs();
            if norm1 == 0 {
                continue;
            }
            let r = partial + kk as f64 * last;
            if r.abs() >= tol * norm1 as f64 {
                continue;
            }
            if let Some((_, bn, _)) = &best {
                if norm1 > *bn {
                    continue;
                }
            }
            let mut full = c.clone();
            full.push(kk);
            if full.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
                full.iter_mut().for_each(|x| *x = -*x);
            }
            let better = match &best {
                None => true,
                Some((b, bn, _)) => norm1 < *bn || (norm1 == *bn && full < *b),
            };
            if better {
                best = Some((full, norm1, r.abs()));
            }
        }
        let mut i = 0;
        loop {
            if i == c.len() {
                return best.map(|(c, _, r)| (c, r));
            }
            c[i] += 1;
            if c[i] <= bound {
                break;
            }
            c[i] = -bound;
            i += 1;
        }
    }
}

/// Rational independence of `{α^±, α^0}` and `{2π, β, β^0}` up to `‖c‖_∞ ≤ bound`.
pub fn check_nonresonant(d: &BlockDecomposition, bound: i64, tol: f64) -> Result<Resonance> {
    if bound < 1 {
        return Err(Error::param("coeff_bound", "must be at least 1"));
    }
    let hyp: Vec<f64> = d.pos_hyp.iter().chain(&d.neg_hyp).copied().chain(d.loxodromic.iter().map(|x| x.0)).collect();
    let mut ell = vec![2.0 * PI];
    ell.extend(d.elliptic.iter().copied());
    ell.extend(d.loxodromic.iter().map(|x| x.1));
    for (name, set) in [("hyperbolic", hyp), ("elliptic", ell)] {
        if let Some((c, r)) = find_integer_relation(&set, bound, tol) {
            return Ok(Resonance::Relation { set: name.into(), coefficients: c, residual: r });
        }
    }
    Ok(Resonance::Certified { bound, tol })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub t_prim: f64,
    pub l_prim: f64,
    pub ell: i64,
    pub decomp: BlockDecomposition,
    pub maslov: i64,
    pub amplitude: f64,
}

impl OrbitRecord {
    pub fn new(t_prim: f64, l_prim: f64, ell: i64, decomp: BlockDecomposition) -> Result<Self> {
        if !(t_prim > 0.0 && l_prim > 0.0) {
            return Err(Error::param("period", "must be positive"));
        }
        decomp.validate()?;
        let det = det_one_minus(&decomp, ell)?;
        let maslov = maslov_index(&decomp, ell)?;
        Ok(OrbitRecord { t_prim, l_prim, ell, decomp, maslov, amplitude: 1.0 / det.sqrt() })
    }

    pub fn period(&self) -> f64 {
        self.ell as f64 * self.t_prim
    }

    pub fn length(&self) -> f64 {
        self.ell as f64 * self.l_prim
    }
}

/// Model quadratic functions in the layout of [`PlaneLayout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadratic {
    /// `(x_j² + x_{j+m}²)/2`
    Elliptic(usize),
    /// `x_j x_{j+m}`
    Hyperbolic(usize),
    /// `x_q x_{p+m} - x_p x_{q+m}`
    LoxRe(usize, usize),
    /// `x_p x_{p+m} + x_q x_{q+m}`
    LoxIm(usize, usize),
}

impl Quadratic {
    /// Symmetric Hessian `S` with `Q = xᵀSx/2`.
    pub fn hessian(&self, m: usize) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(2 * m, 2 * m);
        let mut pair = |i: usize, k: usize, v: f64| {
            s[(i, k)] += v;
            s[(k, i)] += v;
        };
        match *self {
            Quadratic::Elliptic(j) => {
                pair(j - 1, j - 1, 0.5);
                pair(j - 1 + m, j - 1 + m, 0.5);
            }
            Quadratic::Hyperbolic(j) => pair(j - 1, j - 1 + m, 1.0),
            Quadratic::LoxRe(p, q) => {
                pair(q - 1, p - 1 + m, 1.0);
                pair(p - 1, q - 1 + m, -1.0);
            }
            Quadratic::LoxIm(p, q) => {
                pair(p - 1, p - 1 + m, 1.0);
                pair(q - 1, q - 1 + m, 1.0);
            }
        }
        s
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let m = x.len() / 2;
        let s = self.hessian(m);
        let v = DVector::from_column_slice(x);
        0.5 * (v.transpose() * s * &v)[(0, 0)]
    }

    /// Matrix `A = J S` of the linear Hamiltonian field.
    pub fn field_matrix(&self, m: usize) -> DMatrix<f64> {
        standard_j(m) * self.hessian(m)
    }
}

/// `φ⁺ = F(Q)` as a polynomial in the model quadratics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiPlus {
    pub quadratics: Vec<Quadratic>,
    /// `(coefficient, indices into quadratics)`; repeated indices are powers.
    pub terms: Vec<(f64, Vec<usize>)>,
}

impl PhiPlus {
    pub fn linear(quadratics: Vec<Quadratic>, coefficients: &[f64]) -> Self {
        let terms = coefficients.iter().enumerate().map(|(i, &c)| (c, vec![i])).collect();
        PhiPlus { quadratics, terms }
    }

    pub fn q_values(&self, x: &[f64]) -> Vec<f64> {
        self.quadratics.iter().map(|q| q.eval(x)).collect()
    }

    pub fn f(&self, q: &[f64]) -> f64 {
        self.terms.iter().map(|(c, idx)| c * idx.iter().map(|&i| q[i]).product::<f64>()).sum()
    }

    /// `∂F/∂Q_i`.
    pub fn grad(&self, q: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.quadratics.len()];
        for (c, idx) in &self.terms {
            for k in 0..idx.len() {
                let rest: f64 = idx.iter().enumerate().filter(|&(r, _)| r != k).map(|(_, &i)| q[i]).product();
                g[idx[k]] += c * rest;
            }
        }
        g
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.f(&self.q_values(x))
    }

    /// `T^+ = φ⁺ - ½ x·∇φ⁺ = F(Q) - Σ Q_i ∂_iF`.
    pub fn return_time_excess(&self, x: &[f64]) -> f64 {
        let q = self.q_values(x);
        let g = self.grad(&q);
        self.f(&q) - q.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Hamiltonian field matrix with `Q` frozen at `x`: `Σ_i ∂_iF(Q(x)) J S_i`.
    pub fn frozen_field(&self, x: &[f64]) -> DMatrix<f64> {
        let m = x.len() / 2;
        let g = self.grad(&self.q_values(x));
        let mut a = DMatrix::zeros(2 * m, 2 * m);
        for (q, gi) in self.quadratics.iter().zip(g) {
            a += q.field_matrix(m) * gi;
        }
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactModelSpec {
    pub m: usize,
    pub t_gamma: f64,
    pub phi_plus: PhiPlus,
    /// Planes rotated by half a turn, `Q^{h,-} = (π/2) Σ (x_j² + x_{j+m}²)`.
    pub neg_hyp_planes: Vec<usize>,
    /// Half-width of the bumps `χ^±` centred at 1/4 and 3/4.
    pub bump_width: f64,
    pub chart_radius: f64,
}

impl ContactModelSpec {
    /// Linear `φ⁺` whose time-one map, composed after the half-turn, is [`assemble_normal_form`].
    pub fn from_decomposition(d: &BlockDecomposition, t_gamma: f64) -> Result<Self> {
        d.validate()?;
        let lay = PlaneLayout::of(d);
        let mut qs = Vec::new();
        let mut cs = Vec::new();
        for (&j, &b) in lay.elliptic.iter().zip(&d.elliptic) {
            qs.push(Quadratic::Elliptic(j));
            cs.push(-b);
        }
        for (&j, &a) in lay.neg_hyp.iter().zip(&d.neg_hyp).chain(lay.pos_hyp.iter().zip(&d.pos_hyp)) {
            qs.push(Quadratic::Hyperbolic(j));
            cs.push(a);
        }
        for (&(p, q), &(a, b)) in lay.loxodromic.iter().zip(&d.loxodromic) {
            qs.push(Quadratic::LoxRe(p, q));
            cs.push(-b);
            qs.push(Quadratic::LoxIm(p, q));
            cs.push(-a);
        }
        Ok(ContactModelSpec {
            m: lay.m,
            t_gamma,
            phi_plus: PhiPlus::linear(qs, &cs),
            neg_hyp_planes: lay.neg_hyp.clone(),
            bump_width: 0.2,
            chart_radius: 1.0,
        })
    }

    pub fn half_turn_field(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(2 * self.m, 2 * self.m);
        for &j in &self.neg_hyp_planes {
            a += Quadratic::Elliptic(j).field_matrix(self.m) * PI;
        }
        a
    }

    /// `e^{H_{φ⁺}} ∘ e^{H_{Q^{h,-}}}` applied to `x`, with `T_Σ(x)` from the closed form.
    pub fn exact_return(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let v = DVector::from_column_slice(x);
        let y = self.half_turn_field().exp() * v;
        let ys: Vec<f64> = y.iter().copied().collect();
        let z = self.phi_plus.frozen_field(&ys).exp() * &y;
        let t = self.t_gamma + self.phi_plus.return_time_excess(&ys);
        (z.iter().copied().collect(), t)
    }

    pub fn return_time_formula(&self, x: &[f64]) -> f64 {
        self.t_gamma + self.phi_plus.return_time_excess(x)
    }
}

/// Normalized bump `χ(θ)` with support `(c - w, c + w)`.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    norm: f64,
}

impl Bump {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        let raw = |s: f64| if s.abs() < 1.0 { (-1.0 / (1.0 - s * s)).exp() } else { 0.0 };
        let integral = quad::integrate(raw, -1.0, 1.0, Tolerance::default())?.value;
        Ok(Bump { center, width, norm: 1.0 / (width * integral) })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let s = (theta - self.center) / self.width;
        if s.abs() < 1.0 {
            self.norm * (-1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub point: Vec<f64>,
    pub return_time: f64,
    pub steps: usize,
}

struct CachedFields {
    hessians: Vec<DMatrix<f64>>,
    fields: Vec<DMatrix<f64>>,
    half: DMatrix<f64>,
}

impl CachedFields {
    fn new(spec: &ContactModelSpec) -> Self {
        let m = spec.m;
        CachedFields {
            hessians: spec.phi_plus.quadratics.iter().map(|q| q.hessian(m)).collect(),
            fields: spec.phi_plus.quadratics.iter().map(|q| q.field_matrix(m)).collect(),
            half: spec.half_turn_field(),
        }
    }

    fn q_values(&self, x: &DVector<f64>) -> Vec<f64> {
        self.hessians.iter().map(|s| 0.5 * x.dot(&(s * x))).collect()
    }
}

fn rk4_period(spec: &ContactModelSpec, x0: &[f64], steps: usize, minus: &Bump, plus: &Bump) -> Result<(Vec<f64>, f64)> {
    let n = 2 * spec.m;
    let cache = CachedFields::new(spec);
    let rhs = |theta: f64, y: &[f64]| -> Vec<f64> {
        let x = DVector::from_column_slice(&y[..n]);
        let mut out = vec![0.0; n + 1];
        let (cm, cp) = (minus.eval(theta), plus.eval(theta));
        let mut dt = spec.t_gamma;
        if cm != 0.0 {
            let v = &cache.half * &x;
            for i in 0..n {
                out[i] += cm * v[i];
            }
        }
        if cp != 0.0 {
            let q = cache.q_values(&x);
            let g = spec.phi_plus.grad(&q);
            let mut v = DVector::zeros(n);
            for (a, gi) in cache.fields.iter().zip(&g) {
                v += a * &x * *gi;
            }
            for i in 0..n {
                out[i] += cp * v[i];
            }
            let excess = spec.phi_plus.f(&q) - q.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
            dt += cp * excess;
        }
        out[n] = dt;
        out
    };
    let h = 1.0 / steps as f64;
    let mut y: Vec<f64> = x0.iter().copied().chain([0.0]).collect();
    for k in 0..steps {
        let th = k as f64 * h;
        let k1 = rhs(th, &y);
        let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = rhs(th + 0.5 * h, &y2);
        let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = rhs(th + 0.5 * h, &y3);
        let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = rhs(th + h, &y4);
        for i in 0..=n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let r = y[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(r <= spec.chart_radius) {
            return Err(Error::ChartExit { theta: th + h });
        }
    }
    let t = y[n];
    y.truncate(n);
    Ok((y, t))
}

/// Integrates the Reeb field of the model contact form through one `θ`-period with RK4,
/// doubling the step count until two successive runs agree to `1e-11`.
pub fn model_reeb_flow(spec: &ContactModelSpec, x0: &[f64], steps: usize) -> Result<FlowResult> {
    if x0.len() != 2 * spec.m {
        return Err(Error::DimensionMismatch { expected: 2 * spec.m, got: x0.len() });
    }
    if steps < 1000 {
        return Err(Error::param("steps", "need at least 1000 steps per unit θ"));
    }
    let minus = Bump::new(0.25, spec.bump_width)?;
    let plus = Bump::new(0.75, spec.bump_width)?;
    let mut n = steps;
    let mut prev = rk4_period(spec, x0, n, &minus, &plus)?;
    for _ in 0..6 {
        n *= 2;
        let next = rk4_period(spec, x0, n, &minus, &plus)?;
        let diff = prev.0.iter().zip(&next.0).map(|(a, b)| (a - b).abs()).fold((prev.1 - next.1).abs(), f64::max);
        if diff < 1e-11 {
            let point = next.0.iter().zip(&prev.0).map(|(a, b)| a + (a - b) / 15.0).collect();
            let return_time = next.1 + (next.1 - prev.1) / 15.0;
            return Ok(FlowResult { point, return_time, steps: n });
        }
        prev = next;
    }
    Err(Error::StepControl { halvings: 6 })
}

/// `λ = ½ Σ (x_j dx_{j+m} - x_{j+m} dx_j)` applied to `v` at `x`.
pub fn liouville_form(x: &[f64], v: &[f64]) -> f64 {
    let m = x.len() / 2;
    0.5 * (0..m).map(|j| x[j] * v[j + m] - x[j + m] * v[j]).sum::<f64>()
}

/// `max_k |λ_{P(x)}(DP e_k) - λ_x(e_k) - ∂_k T_Σ|` over samples, derivatives by central differences.
pub fn return_map_relation_check(spec: &ContactModelSpec, samples: &[Vec<f64>], steps: usize) -> Result<f64> {
    let n = 2 * spec.m;
    let d = 1e-5;
    let mut worst: f64 = 0.0;
    for x in samples {
        let base = model_reeb_flow(spec, x, steps)?;
        for k in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += d;
            xm[k] -= d;
            let fp = model_reeb_flow(spec, &xp, steps)?;
            let fm = model_reeb_flow(spec, &xm, steps)?;
            let dp: Vec<f64> = fp.point.iter().zip(&fm.point).map(|(a, b)| (a - b) / (2.0 * d)).collect();
            let dt = (fp.return_time - fm.return_time) / (2.0 * d);
            let mut ek = vec![0.0; n];
            ek[k] = 1.0;
            let r = liouville_form(&base.point, &dp) - liouville_form(x, &ek) - dt;
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}
