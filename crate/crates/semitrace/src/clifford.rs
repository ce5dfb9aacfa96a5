//! Spin representation of the Clifford algebra of `W = R^{2m+1}`.
//!
//! The spin space is `Λ^{0,*}` with basis `w_1^{k_1} ∧ … ∧ w_m^{k_m}` ordered
//! lexicographically in `(k_1, …, k_m)`, `k_1` most significant.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `i^n` for any integer `n`.
pub fn i_pow(n: i64) -> C64 {
    match n.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => I,
        2 => C64::new(-1.0, 0.0),
        _ => -I,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinBasisIndex {
    pub m: usize,
    pub rank: usize,
}

impl SpinBasisIndex {
    pub fn from_bits(bits: &[u8]) -> Self {
        let rank = bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b as usize & 1));
        SpinBasisIndex { m: bits.len(), rank }
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.m).map(|j| self.bit(j)).collect()
    }

    /// Occupation `k_{j+1}` (zero-based `j`).
    pub fn bit(&self, j: usize) -> u8 {
        ((self.rank >> (self.m - 1 - j)) & 1) as u8
    }

    pub fn degree(&self) -> u32 {
        self.rank.count_ones()
    }
}

/// Dense `2^m × 2^m` complex matrix acting on the spin space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMatrix {
    pub m: usize,
    pub entries: DMatrix<C64>,
}

impl SpinMatrix {
    pub fn zeros(m: usize) -> Self {
        let d = 1 << m;
        SpinMatrix { m, entries: DMatrix::zeros(d, d) }
    }

    pub fn identity(m: usize) -> Self {
        let d = 1 << m;
        SpinMatrix { m, entries: DMatrix::identity(d, d) }
    }

    pub fn from_matrix(entries: DMatrix<C64>) -> Result<Self> {
        let d = entries.nrows();
        if d != entries.ncols() || !d.is_power_of_two() {
            return Err(Error::param("entries", "matrix must be square with power-of-two size"));
        }
        Ok(SpinMatrix { m: d.trailing_zeros() as usize, entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn adjoint(&self) -> Self {
        SpinMatrix { m: self.m, entries: self.entries.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn mul(&self, other: &SpinMatrix) -> SpinMatrix {
        SpinMatrix { m: self.m, entries: &self.entries * &other.entries }
    }

    pub fn scale(&self, c: C64) -> SpinMatrix {
        SpinMatrix { m: self.m, entries: self.entries.map(|z| z * c) }
    }

    pub fn add(&self, other: &SpinMatrix) -> SpinMatrix {
        SpinMatrix { m: self.m, entries: &self.entries + &other.entries }
    }

    pub fn sub(&self, other: &SpinMatrix) -> SpinMatrix {
        SpinMatrix { m: self.m, entries: &self.entries - &other.entries }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn distance(&self, other: &SpinMatrix) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.distance(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint().mul(self).distance(&SpinMatrix::identity(self.m)) <= tol
    }

    pub fn rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| [self.entries[(r, c)].re, self.entries[(r, c)].im]).collect())
            .collect()
    }
}

impl Serialize for SpinMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpinMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("spin matrix must be square"));
        }
        let m = DMatrix::from_fn(n, n, |r, c| C64::new(rows[r][c][0], rows[r][c][1]));
        SpinMatrix::from_matrix(m).map_err(serde::de::Error::custom)
    }
}

/// Creation operator `w_j ∧` (zero-based `j`) with Jordan–Wigner signs.
fn ladder(m: usize, j: usize, create: bool) -> DMatrix<C64> {
    let d = 1usize << m;
    let mut out = DMatrix::zeros(d, d);
    let bit = 1usize << (m - 1 - j);
    for col in 0..d {
        let occupied = col & bit != 0;
        if occupied == create {
            continue;
        }
        let before = (col >> (m - j)).count_ones();
        let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
        out[(col ^ bit, col)] = C64::new(sign, 0.0);
    }
    out
}

/// The Clifford generator `γ_j = c(e_j)`, `0 ≤ j ≤ 2m`.
pub fn gamma(j: usize, m: usize) -> Result<SpinMatrix> {
    if m == 0 && j != 0 {
        return Err(Error::IndexOutOfRange { index: j, max: 0 });
    }
    if j > 2 * m {
        return Err(Error::IndexOutOfRange { index: j, max: 2 * m });
    }
    let d = 1usize << m;
    let entries = if j == 0 {
        DMatrix::from_fn(d, d, |r, c| {
            if r != c {
                C64::new(0.0, 0.0)
            } else if r.count_ones() % 2 == 0 {
                -I
            } else {
                I
            }
        })
    } else if j <= m {
        let a = ladder(m, j - 1, true) + ladder(m, j - 1, false);
        a.map(|z| z * -I)
    } else {
        ladder(m, j - m - 1, true) - ladder(m, j - m - 1, false)
    };
    Ok(SpinMatrix { m, entries })
}

/// `σ_j = iγ_j`, self-adjoint.
pub fn sigma(j: usize, m: usize) -> Result<SpinMatrix> {
    Ok(gamma(j, m)?.scale(I))
}

/// All generators `γ_0, …, γ_{2m}`.
pub fn gammas(m: usize) -> Vec<SpinMatrix> {
    (0..=2 * m).map(|j| gamma(j, m).expect("in range")).collect()
}

/// `γ_0(γ_1γ_{m+1})…(γ_mγ_{2m})`, the product in the order pairing `e_j` with `Je_j`.
pub fn paired_volume(m: usize) -> SpinMatrix {
    let g = gammas(m);
    let mut out = g[0].clone();
    for j in 1..=m {
        out = out.mul(&g[j]).mul(&g[j + m]);
    }
    out
}

/// `γ_0γ_1…γ_{2m}` in index order.
pub fn sequential_volume(m: usize) -> SpinMatrix {
    gammas(m).iter().fold(SpinMatrix::identity(m), |acc, g| acc.mul(g))
}

/// Element of `Λ*W ⊗ C` keyed by sorted index subsets of `{0, …, 2m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorElement {
    pub m: usize,
    pub terms: BTreeMap<Vec<usize>, C64>,
}

impl ExteriorElement {
    pub fn zero(m: usize) -> Self {
        ExteriorElement { m, terms: BTreeMap::new() }
    }

    pub fn one(m: usize) -> Self {
        let mut e = Self::zero(m);
        e.terms.insert(Vec::new(), C64::new(1.0, 0.0));
        e
    }

    /// Basis monomial `e_{i_1} ∧ … ∧ e_{i_k}` for arbitrary (not necessarily sorted) indices.
    pub fn basis(m: usize, indices: &[usize]) -> Result<Self> {
        let mut e = Self::zero(m);
        e.add_term(indices, C64::new(1.0, 0.0))?;
        Ok(e)
    }

    /// Adds `c · e_{i_1} ∧ … ∧ e_{i_k}`, sorting the indices with the permutation sign.
    pub fn add_term(&mut self, indices: &[usize], c: C64) -> Result<()> {
        if let Some(&bad) = indices.iter().find(|&&i| i > 2 * self.m) {
            return Err(Error::IndexOutOfRange { index: bad, max: 2 * self.m });
        }
        let mut idx = indices.to_vec();
        let mut sign = 1.0;
        for i in 0..idx.len() {
            for j in 0..idx.len() - 1 - i {
                if idx[j] > idx[j + 1] {
                    idx.swap(j, j + 1);
                    sign = -sign;
                } else if idx[j] == idx[j + 1] {
                    return Ok(());
                }
            }
        }
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return Ok(());
        }
        let entry = self.terms.entry(idx).or_insert(C64::new(0.0, 0.0));
        *entry += c * sign;
        self.prune();
        Ok(())
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
    }

    pub fn degree_part(&self, k: usize) -> Self {
        ExteriorElement {
            m: self.m,
            terms: self.terms.iter().filter(|(i, _)| i.len() == k).map(|(i, c)| (i.clone(), *c)).collect(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im == 0.0)
    }

    /// Hodge star with respect to the Euclidean metric and the given orientation.
    pub fn hodge_star(&self, orientation: Orientation) -> Self {
        let n = 2 * self.m + 1;
        let sigma = orientation.sign(self.m);
        let mut out = Self::zero(self.m);
        for (idx, c) in &self.terms {
            let comp: Vec<usize> = (0..n).filter(|i| !idx.contains(i)).collect();
            let mut perm = idx.clone();
            perm.extend_from_slice(&comp);
            let s = permutation_sign(&perm) * sigma;
            out.terms.insert(comp, *c * s);
        }
        out.prune();
        out
    }
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 { 1.0 } else { -1.0 }
}

/// Orientation of `W` used by the Hodge star.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// `e_0 ∧ e_1 ∧ … ∧ e_{2m}`.
    Standard,
    /// The orientation for which the volume form quantizes to `i^{m+1}`.
    SpinCompatible,
}

impl Orientation {
    /// Sign of this orientation relative to `Standard`.
    pub fn sign(self, m: usize) -> f64 {
        match self {
            Orientation::Standard => 1.0,
            Orientation::SpinCompatible => {
                let seq = if m * (m.saturating_sub(1)) / 2 % 2 == 0 { 1.0 } else { -1.0 };
                let ratio = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
                seq * ratio
            }
        }
    }
}

/// Clifford quantization `c(e_{i_1}∧…∧e_{i_k}) = γ_{i_1}…γ_{i_k}`.
pub fn clifford_quantize(omega: &ExteriorElement, m: usize) -> Result<SpinMatrix> {
    if omega.m != m {
        return Err(Error::DimensionMismatch { expected: m, got: omega.m });
    }
    let g = gammas(m);
    let mut out = SpinMatrix::zeros(m);
    for (idx, c) in &omega.terms {
        let prod = idx.iter().fold(SpinMatrix::identity(m), |acc, &i| acc.mul(&g[i]));
        out = out.add(&prod.scale(*c));
    }
    Ok(out)
}

/// `c_0(ω) = i^{k(k+1)/2} c(ω)` on each degree-`k` component.
pub fn c0_quantize(omega: &ExteriorElement, m: usize) -> Result<SpinMatrix> {
    if omega.m != m {
        return Err(Error::DimensionMismatch { expected: m, got: omega.m });
    }
    let mut twisted = ExteriorElement::zero(m);
    for (idx, c) in &omega.terms {
        let k = idx.len() as i64;
        twisted.terms.insert(idx.clone(), *c * i_pow(k * (k + 1) / 2));
    }
    clifford_quantize(&twisted, m)
}

/// Output of [`almost_diagonalizer`].
#[derive(Debug, Clone)]
pub struct AlmostDiagonal {
    pub v: SpinMatrix,
    pub a0: f64,
    pub a1: f64,
}

fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// Time cutoff: `1` on `[0, 1/2]`, `0` at `t = 1`.
pub fn chi0(t: f64) -> f64 {
    1.0 - smooth_step((t - 0.5) / 0.5)
}

/// Polar cutoff: equals `θ_0` below `1-ρ`, equals `-1` above `1-ρ/2`.
pub fn chi1_rho(theta0: f64, rho: f64) -> f64 {
    let s = smooth_step((theta0 - (1.0 - rho)) / (0.5 * rho));
    (1.0 - s) * theta0 - s
}

/// `(χ_1, χ_2, 1 - χ_1, 1 + χ_1)`, the last two without cancellation.
fn cutoffs(theta0: f64, t: f64, rho: f64) -> (f64, f64, f64, f64) {
    let c = (1.0 - chi0(t)).powi(2);
    let cr = chi1_rho(theta0, rho);
    let one_plus = c * (1.0 + cr);
    let chi1 = one_plus - 1.0;
    let one_minus = 2.0 - one_plus;
    if one_plus <= 0.0 || one_minus <= 0.0 {
        return (chi1.clamp(-1.0, 1.0), 0.0, one_minus.max(0.0), one_plus.max(0.0));
    }
    let q = if theta0 < 1.0 - rho { 1.0 } else { (1.0 + cr) / (1.0 + theta0) };
    let chi2 = (one_minus * c * q / (1.0 - theta0)).sqrt();
    (chi1, chi2, one_minus, one_plus)
}

fn check_unit(theta: &[f64]) -> Result<()> {
    let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitVector { norm });
    }
    Ok(())
}

fn build_v(theta: &[f64], m: usize, one_minus: f64, one_plus: f64) -> SpinMatrix {
    let alpha = (one_minus / 2.0).max(0.0).sqrt();
    let beta = (one_plus / 2.0).max(0.0).sqrt();
    let g = gammas(m);
    let mut v = g[0].scale(C64::new(alpha, 0.0));
    let tail: f64 = theta[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    if beta > 0.0 && tail > 0.0 {
        for j in 1..=2 * m {
            v = v.sub(&g[j].scale(C64::new(beta * theta[j] / tail, 0.0)));
        }
    }
    v.scale(I)
}

/// Unitary `v` with `v* c(θ) v = a_0 γ_0 + a_1 Σ_{j≥1} θ_j γ_j`, interpolating between
/// `σ_0` for `t ≤ 1/2` and a diagonalization of `c(θ)` away from the pole `θ_0 = 1`.
pub fn almost_diagonalizer(theta: &[f64], t: f64, rho: f64) -> Result<AlmostDiagonal> {
    if !(rho > 0.0 && rho < 0.125) {
        return Err(Error::param("rho", "must lie in (0, 1/8)"));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::param("t", "must lie in [0, 1]"));
    }
    if theta.len() % 2 == 0 {
        return Err(Error::param("theta", "length must be 2m+1"));
    }
    check_unit(theta)?;
    let m = (theta.len() - 1) / 2;
    let th0 = theta[0];
    let (chi1, chi2, one_minus, one_plus) = cutoffs(th0, t, rho);
    let v = build_v(theta, m, one_minus, one_plus);
    let a0 = -th0 * chi1 - (1.0 - th0 * th0) * chi2;
    let a1 = chi1 - th0 * chi2;
    Ok(AlmostDiagonal { v, a0, a1 })
}

/// Uncut diagonalizer: `v* c(θ) v = -γ_0` for `θ` away from the north pole.
pub fn pole_diagonalizer(theta: &[f64]) -> Result<SpinMatrix> {
    if theta.len() % 2 == 0 {
        return Err(Error::param("theta", "length must be 2m+1"));
    }
    check_unit(theta)?;
    if theta[0] >= 1.0 - 1e-12 {
        return Err(Error::param("theta", "must stay away from the north pole"));
    }
    let m = (theta.len() - 1) / 2;
    Ok(build_v(theta, m, 1.0 - theta[0], 1.0 + theta[0]))
}

/// `a_0 γ_0 + a_1 Σ_{j≥1} θ_j γ_j`.
pub fn diagonal_model(theta: &[f64], a0: f64, a1: f64) -> SpinMatrix {
    let m = (theta.len() - 1) / 2;
    let g = gammas(m);
    let mut out = g[0].scale(C64::new(a0, 0.0));
    for j in 1..theta.len() {
        out = out.add(&g[j].scale(C64::new(a1 * theta[j], 0.0)));
    }
    out
}

/// `c(θ) = Σ θ_j γ_j` for a real vector.
pub fn c_vector(theta: &[f64]) -> SpinMatrix {
    let m = (theta.len() - 1) / 2;
    let g = gammas(m);
    let mut out = SpinMatrix::zeros(m);
    for (j, th) in theta.iter().enumerate() {
        out = out.add(&g[j].scale(C64::new(*th, 0.0)));
    }
    out
}
