//! The model magnetic Dirac operator on `R^m`: exact Landau spectrum and a
//! truncated Hermite ⊗ spin matrix oracle.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::clifford::{gammas, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mu: Vec<f64>,
    pub h: f64,
}

impl ModelParams {
    pub fn new(mu: Vec<f64>, h: f64) -> Result<Self> {
        let p = ModelParams { mu, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.is_empty() {
            return Err(Error::param("mu", "at least one frequency is required"));
        }
        if self.mu.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::param("mu", "all frequencies must be positive"));
        }
        if self.mu.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::param("mu", "frequencies must be sorted ascending"));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::param("h", "must be positive"));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Minus,
    ZeroMode,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LandauLabel {
    pub tau: Vec<u32>,
    pub sign: Sign,
}

impl LandauLabel {
    /// Number of nonzero entries of `τ`.
    pub fn z(&self) -> u32 {
        self.tau.iter().filter(|&&t| t > 0).count() as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenLine {
    pub value: f64,
    pub multiplicity: u64,
    pub label: LandauLabel,
}

/// Default cap on the number of enumerated multi-indices.
pub const DEFAULT_COUNT_BOUND: usize = 2_000_000;

fn enumerate_tau(mu: &[f64], budget: f64, bound: usize) -> Result<Vec<(f64, Vec<u32>)>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; mu.len()];
    fn rec(
        j: usize,
        acc: f64,
        mu: &[f64],
        budget: f64,
        cur: &mut Vec<u32>,
        out: &mut Vec<(f64, Vec<u32>)>,
        bound: usize,
    ) -> Result<()> {
        if j == mu.len() {
            if out.len() >= bound {
                return Err(Error::EnumerationBound { bound });
            }
            out.push((acc, cur.clone()));
            return Ok(());
        }
        let mut t = 0u32;
        loop {
            let a = acc + mu[j] * t as f64;
            if a > budget * (1.0 + 1e-14) {
                break;
            }
            cur[j] = t;
            rec(j + 1, a, mu, budget, cur, out, bound)?;
            t += 1;
        }
        cur[j] = 0;
        Ok(())
    }
    rec(0, 0.0, mu, budget, &mut cur, &mut out, bound)?;
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(out)
}

/// Exact spectrum `±√(μ·τ h)` with multiplicities `2^{Z_τ-1}` and the simple zero mode.
pub fn model_spectrum(p: &ModelParams, energy_cutoff: f64) -> Result<Vec<EigenLine>> {
    model_spectrum_bounded(p, energy_cutoff, DEFAULT_COUNT_BOUND)
}

pub fn model_spectrum_bounded(p: &ModelParams, energy_cutoff: f64, bound: usize) -> Result<Vec<EigenLine>> {
    p.validate()?;
    if !(energy_cutoff > 0.0) {
        return Err(Error::param("energy_cutoff", "must be positive"));
    }
    let budget = energy_cutoff * energy_cutoff / p.h;
    let taus = enumerate_tau(&p.mu, budget, bound)?;
    let mut lines = Vec::with_capacity(2 * taus.len());
    for (mt, tau) in taus {
        let value = (mt * p.h).sqrt();
        if value > energy_cutoff {
            continue;
        }
        let z = tau.iter().filter(|&&t| t > 0).count() as u32;
        if z == 0 {
            lines.push(EigenLine { value: 0.0, multiplicity: 1, label: LandauLabel { tau, sign: Sign::ZeroMode } });
            continue;
        }
        let mult = 1u64 << (z - 1);
        lines.push(EigenLine { value: -value, multiplicity: mult, label: LandauLabel { tau: tau.clone(), sign: Sign::Minus } });
        lines.push(EigenLine { value, multiplicity: mult, label: LandauLabel { tau, sign: Sign::Plus } });
    }
    lines.sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.label.cmp(&b.label)));
    Ok(lines)
}

/// Which Clifford generators pair with `h∂_{x_j}` and `x_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// `γ_{j+m} h∂_{x_j} + iγ_j x_j`, compatible with `Je_j = e_{j+m}`.
    #[default]
    ComplexPairs,
    /// `γ_{2j} h∂_{x_j} + iγ_{2j-1} x_j`.
    Interleaved,
}

/// Sparse complex matrix stored as sorted coordinate triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub dim: usize,
    pub entries: BTreeMap<(usize, usize), C64>,
}

impl SparseMatrix {
    pub fn new(dim: usize) -> Self {
        SparseMatrix { dim, entries: BTreeMap::new() }
    }

    pub fn add(&mut self, r: usize, c: usize, v: C64) {
        if v == C64::new(0.0, 0.0) {
            return;
        }
        let e = self.entries.entry((r, c)).or_insert(C64::new(0.0, 0.0));
        *e += v;
        if *e == C64::new(0.0, 0.0) {
            self.entries.remove(&(r, c));
        }
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries.get(&(r, c)).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for (&(r, c), v) in &self.entries {
            d[(r, c)] = *v;
        }
        d
    }

    pub fn matmul(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); other.dim];
        for (&(r, c), v) in &other.entries {
            rows[r].push((c, *v));
        }
        let mut out = SparseMatrix::new(self.dim);
        for (&(r, k), a) in &self.entries {
            for &(c, b) in &rows[k] {
                out.add(r, c, a * b);
            }
        }
        out
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut out = self.clone();
        for (&(r, c), v) in &other.entries {
            out.add(r, c, -v);
        }
        out
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let mut out = SparseMatrix::new(self.dim);
        for (&(r, c), v) in &self.entries {
            out.add(c, r, v.conj());
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

/// Hermite ⊗ spin basis with levels `0..=basis_cut` per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSpinBasis {
    pub m: usize,
    pub basis_cut: usize,
}

impl HermiteSpinBasis {
    pub fn levels(&self) -> usize {
        self.basis_cut + 1
    }

    pub fn dim(&self) -> usize {
        self.levels().pow(self.m as u32) << self.m
    }

    pub fn index(&self, n: &[usize], spin: usize) -> usize {
        let mut idx = 0;
        for &nj in n {
            idx = idx * self.levels() + nj;
        }
        (idx << self.m) | spin
    }

    pub fn decode(&self, idx: usize) -> (Vec<usize>, usize) {
        let spin = idx & ((1 << self.m) - 1);
        let mut rest = idx >> self.m;
        let mut n = vec![0; self.m];
        for j in (0..self.m).rev() {
            n[j] = rest % self.levels();
            rest /= self.levels();
        }
        (n, spin)
    }

    /// Spin occupation `k_{j+1}` of a spin basis index.
    pub fn occupation(&self, spin: usize, j: usize) -> usize {
        (spin >> (self.m - 1 - j)) & 1
    }
}

/// Matrices of `A = h∂ + x` and `A* = -h∂ + x` on Hermite levels `0..=cut`.
pub fn ladder_matrices(h: f64, cut: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = cut + 1;
    let mut a = DMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = (2.0 * h * k as f64).sqrt();
    }
    let astar = a.transpose();
    (a, astar)
}

/// Truncated matrix of `Σ_j (μ_j/2)^{1/2}[Γ_a h∂_{x_j} + iΓ_b x_j]`.
pub fn build_dirac_matrix(p: &ModelParams, basis_cut: usize, pairing: Pairing) -> Result<SparseMatrix> {
    p.validate()?;
    if basis_cut < 2 {
        return Err(Error::BasisTooSmall { basis_cut, reason: "at least levels 0..=2 are required".into() });
    }
    let m = p.m();
    let basis = HermiteSpinBasis { m, basis_cut };
    let g = gammas(m);
    let i = C64::new(0.0, 1.0);
    let mut out = SparseMatrix::new(basis.dim());
    for j in 0..m {
        let (ga, gb) = match pairing {
            Pairing::ComplexPairs => (&g[j + m + 1], &g[j + 1]),
            Pairing::Interleaved => (&g[2 * j + 2], &g[2 * j + 1]),
        };
        let c = (p.mu[j] / 2.0).sqrt();
        let spin_d = 1usize << m;
        for col in 0..basis.dim() {
            let (n, s) = basis.decode(col);
            let nj = n[j];
            let mut moves: Vec<(usize, f64, f64)> = Vec::with_capacity(2);
            if nj >= 1 {
                let a = (2.0 * p.h * nj as f64).sqrt() * 0.5;
                moves.push((nj - 1, a, a));
            }
            if nj < basis_cut {
                let a = (2.0 * p.h * (nj + 1) as f64).sqrt() * 0.5;
                moves.push((nj + 1, -a, a));
            }
            for (nn, d_coef, x_coef) in moves {
                let mut n2 = n.clone();
                n2[j] = nn;
                for s2 in 0..spin_d {
                    let v = ga.entries[(s2, s)] * d_coef + i * gb.entries[(s2, s)] * x_coef;
                    if v != C64::new(0.0, 0.0) {
                        out.add(basis.index(&n2, s2), col, v * c);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Eigenvalue of the truncated matrix with its truncation-safety flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedEigen {
    pub value: f64,
    pub top_shell_mass: f64,
    pub trusted: bool,
}

/// Mass threshold on the top two Hermite shells above which an eigenvector is not trusted.
pub const SHELL_MASS_GUARD: f64 = 1e-6;

fn components(mat: &SparseMatrix) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..mat.dim).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for &(r, c) in mat.entries.keys() {
        let a = find(&mut parent, r);
        let b = find(&mut parent, c);
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..mat.dim {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// All eigenvalues of the truncated operator, block by block, with shell-mass guards.
pub fn truncated_eigen(p: &ModelParams, basis_cut: usize, pairing: Pairing) -> Result<Vec<TruncatedEigen>> {
    let mat = build_dirac_matrix(p, basis_cut, pairing)?;
    let basis = HermiteSpinBasis { m: p.m(), basis_cut };
    let mut out = Vec::with_capacity(mat.dim);
    for comp in components(&mat) {
        let k = comp.len();
        let mut dense = DMatrix::<C64>::zeros(k, k);
        for (a, &r) in comp.iter().enumerate() {
            for (b, &c) in comp.iter().enumerate() {
                dense[(a, b)] = mat.get(r, c);
            }
        }
        let eig = SymmetricEigen::new(dense);
        for col in 0..k {
            let mut mass = 0.0;
            for (a, &idx) in comp.iter().enumerate() {
                let (n, _) = basis.decode(idx);
                if n.iter().any(|&nj| nj + 1 >= basis_cut) {
                    mass += eig.eigenvectors[(a, col)].norm_sqr();
                }
            }
            out.push(TruncatedEigen { value: eig.eigenvalues[col], top_shell_mass: mass, trusted: mass < SHELL_MASS_GUARD });
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

/// Largest energy below which every exact eigenvalue is fully represented.
pub fn safe_cutoff(p: &ModelParams, basis_cut: usize) -> f64 {
    let mu_min = p.mu.iter().cloned().fold(f64::INFINITY, f64::min);
    (mu_min * (basis_cut as f64 - 2.0).max(0.0) * p.h).sqrt()
}

/// Trusted truncated eigenvalues strictly below `cutoff` in modulus, clustered into lines.
pub fn clustered_truncated_spectrum(eigs: &[TruncatedEigen], cutoff: f64, tol: f64) -> Vec<(f64, u64)> {
    let mut out: Vec<(f64, u64)> = Vec::new();
    for e in eigs.iter().filter(|e| e.trusted && e.value.abs() < cutoff) {
        match out.last_mut() {
            Some((v, n)) if (e.value - *v).abs() <= tol => *n += 1,
            _ => out.push((e.value, 1)),
        }
    }
    out
}

/// Diagonal projector onto `{n_j + k_j = τ_j}` in the complex-pair basis.
pub fn landau_projector(p: &ModelParams, tau: &[u32], basis_cut: usize) -> Result<SparseMatrix> {
    p.validate()?;
    if tau.len() != p.m() {
        return Err(Error::DimensionMismatch { expected: p.m(), got: tau.len() });
    }
    if tau.iter().any(|&t| t as usize >= basis_cut) {
        return Err(Error::BasisTooSmall { basis_cut, reason: format!("tau {tau:?} beyond truncation") });
    }
    let basis = HermiteSpinBasis { m: p.m(), basis_cut };
    let mut out = SparseMatrix::new(basis.dim());
    for idx in 0..basis.dim() {
        let (n, s) = basis.decode(idx);
        let hit = (0..p.m()).all(|j| n[j] + basis.occupation(s, j) == tau[j] as usize);
        if hit {
            out.add(idx, idx, C64::new(1.0, 0.0));
        }
    }
    Ok(out)
}

/// Indices whose Landau level `n_j + k_j` is at most `basis_cut` on every axis.
pub fn interior_indices(p: &ModelParams, basis_cut: usize) -> Vec<usize> {
    let basis = HermiteSpinBasis { m: p.m(), basis_cut };
    (0..basis.dim())
        .filter(|&idx| {
            let (n, s) = basis.decode(idx);
            (0..p.m()).all(|j| n[j] + basis.occupation(s, j) <= basis_cut)
        })
        .collect()
}

/// CSV-ready rows `(value, multiplicity, tau, sign)`.
pub fn spectrum_rows(lines: &[EigenLine]) -> Vec<(f64, u64, String, &'static str)> {
    lines
        .iter()
        .map(|l| {
            let tau = l.label.tau.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
            let sign = match l.label.sign {
                Sign::Plus => "+",
                Sign::Minus => "-",
                Sign::ZeroMode => "0",
            };
            (l.value, l.multiplicity, tau, sign)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_axis_levels() {
        let p = ModelParams::new(vec![1.0], 0.04).unwrap();
        let s = model_spectrum(&p, 0.3).unwrap();
        let v = 0.08f64.sqrt();
        let plus = s.iter().find(|l| l.label.tau == vec![2] && l.label.sign == Sign::Plus).unwrap();
        assert!((plus.value - v).abs() < 1e-15);
        assert_eq!(plus.multiplicity, 1);
        let minus = s.iter().find(|l| l.label.tau == vec![2] && l.label.sign == Sign::Minus).unwrap();
        assert!((minus.value + v).abs() < 1e-15);
    }

    #[test]
    fn zero_mode_simple() {
        let p = ModelParams::new(vec![1.0, 2.0], 0.1).unwrap();
        let s = model_spectrum(&p, 1.0).unwrap();
        let zeros: Vec<_> = s.iter().filter(|l| l.value == 0.0).collect();
        assert_eq!(zeros.len(), 1);
        assert_eq!(zeros[0].multiplicity, 1);
        assert_eq!(zeros[0].label.sign, Sign::ZeroMode);
    }

    #[test]
    fn two_axis_multiplicity() {
        let p = ModelParams::new(vec![1.0, 1.0], 0.01).unwrap();
        let s = model_spectrum(&p, 0.2).unwrap();
        let l = s.iter().find(|l| l.label.tau == vec![1, 1] && l.label.sign == Sign::Plus).unwrap();
        assert!((l.value - 0.02f64.sqrt()).abs() < 1e-15);
        assert_eq!(l.multiplicity, 2);
    }

    #[test]
    fn scaling_identity() {
        let p = ModelParams::new(vec![0.7, 1.3], 0.02).unwrap();
        let q = ModelParams::new(vec![0.7, 1.3], 0.08).unwrap();
        let a = model_spectrum(&p, 0.5).unwrap();
        let b = model_spectrum(&q, 1.0).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((2.0 * x.value - y.value).abs() < 1e-14);
            assert_eq!(x.label, y.label);
        }
    }

    #[test]
    fn ladder_commutator() {
        let h = 0.04;
        let (a, ad) = ladder_matrices(h, 10);
        let c = &a * &ad - &ad * &a;
        for i in 0..10 {
            for j in 0..10 {
                let expect = if i == j { 2.0 * h } else { 0.0 };
                assert!((c[(i, j)] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn matrix_self_adjoint() {
        for pairing in [Pairing::ComplexPairs, Pairing::Interleaved] {
            let p = ModelParams::new(vec![0.8, 1.5], 0.1).unwrap();
            let d = build_dirac_matrix(&p, 6, pairing).unwrap();
            assert!(d.sub(&d.adjoint()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_matches_exact_m1() {
        let p = ModelParams::new(vec![1.0], 0.04).unwrap();
        let eigs = truncated_eigen(&p, 40, Pairing::ComplexPairs).unwrap();
        let got = clustered_truncated_spectrum(&eigs, 0.5, 1e-9);
        let want: Vec<_> = model_spectrum(&p, 0.5).unwrap();
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g.0 - w.value).abs() < 1e-8);
            assert_eq!(g.1, w.multiplicity);
        }
    }

    #[test]
    fn interleaved_same_spectrum() {
        let p = ModelParams::new(vec![0.6, 1.1], 0.1).unwrap();
        let cut = 12;
        let safe = safe_cutoff(&p, cut);
        let a = clustered_truncated_spectrum(&truncated_eigen(&p, cut, Pairing::ComplexPairs).unwrap(), safe, 1e-9);
        let b = clustered_truncated_spectrum(&truncated_eigen(&p, cut, Pairing::Interleaved).unwrap(), safe, 1e-9);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x.0 - y.0).abs() < 1e-9);
            assert_eq!(x.1, y.1);
        }
    }

    #[test]
    fn projector_ranks() {
        let p = ModelParams::new(vec![1.0, 2.0], 0.1).unwrap();
        let p0 = landau_projector(&p, &[0, 0], 5).unwrap();
        assert_eq!(p0.trace(), C64::new(1.0, 0.0));
        let p1 = landau_projector(&p, &[2, 0], 5).unwrap();
        assert_eq!(p1.trace(), C64::new(2.0, 0.0));
        let p2 = landau_projector(&p, &[1, 3], 5).unwrap();
        assert_eq!(p2.trace(), C64::new(4.0, 0.0));
        assert!(p1.matmul(&p2).max_abs() == 0.0);
        assert!(landau_projector(&p, &[5, 0], 5).is_err());
    }

    #[test]
    fn bad_params() {
        assert!(ModelParams::new(vec![2.0, 1.0], 0.1).is_err());
        assert!(ModelParams::new(vec![1.0], 0.0).is_err());
        let p = ModelParams::new(vec![1.0], 0.1).unwrap();
        assert!(matches!(build_dirac_matrix(&p, 1, Pairing::ComplexPairs), Err(Error::BasisTooSmall { .. })));
        assert!(matches!(model_spectrum_bounded(&p, 100.0, 10), Err(Error::EnumerationBound { .. })));
    }
}
