//! Dense Gauss–Jordan elimination over a [`Scalar`] field.

use super::scalar::Scalar;

const FLOAT_PIVOT: f64 = 1e-10;
const FLOAT_RESIDUAL: f64 = 1e-8;

/// Column-major dense matrix built from sparse columns.
#[derive(Debug, Clone)]
pub(crate) struct Dense<S: Scalar> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Dense<S> {
    pub fn from_columns(rows: usize, columns: &[Vec<(usize, S)>]) -> Self {
        let cols = columns.len();
        let mut data = vec![S::zero(); rows * cols];
        for (c, col) in columns.iter().enumerate() {
            for (r, v) in col {
                data[r * cols + c] = data[r * cols + c].plus(v);
            }
        }
        Dense { rows, cols, data }
    }

    fn at(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }

    fn scale(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    /// Row-reduce in place, pivoting only in the first `pivot_cols` columns.
    /// Columns are taken left to right, so earlier columns are preferred as pivots.
    fn rref(&mut self, pivot_cols: usize) -> Vec<usize> {
        let cols = self.cols;
        let floor = if S::is_exact() { 0.0 } else { FLOAT_PIVOT * self.scale().max(1e-300) };
        let mut pivots = Vec::new();
        let mut row = 0;
        for c in 0..pivot_cols {
            if row == self.rows {
                break;
            }
            let pick = if S::is_exact() {
                (row..self.rows).find(|&r| !self.at(r, c).vanishes())
            } else {
                let best = (row..self.rows)
                    .map(|r| (r, self.at(r, c).magnitude()))
                    .fold(None, |acc: Option<(usize, f64)>, x| match acc {
                        Some(a) if a.1 >= x.1 => Some(a),
                        _ => Some(x),
                    });
                best.filter(|&(_, v)| v > floor).map(|(r, _)| r)
            };
            let Some(p) = pick else { continue };
            if p != row {
                for k in 0..cols {
                    self.data.swap(p * cols + k, row * cols + k);
                }
            }
            let inv = self.at(row, c).recip().expect("nonzero pivot");
            for k in 0..cols {
                let v = self.data[row * cols + k].times(&inv);
                self.data[row * cols + k] = v;
            }
            let pivot_row: Vec<S> = self.data[row * cols..(row + 1) * cols].to_vec();
            let nz: Vec<usize> = (0..cols).filter(|&k| !pivot_row[k].vanishes()).collect();
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let f = self.data[r * cols + c].clone();
                if f.vanishes() {
                    continue;
                }
                for &k in &nz {
                    let v = self.data[r * cols + k].minus(&f.times(&pivot_row[k]));
                    self.data[r * cols + k] = v;
                }
                if !S::is_exact() {
                    self.data[r * cols + c] = S::zero();
                }
            }
            pivots.push(c);
            row += 1;
        }
        pivots
    }

    fn mul_vec(&self, x: &[S]) -> Vec<S> {
        (0..self.rows)
            .map(|r| (0..self.cols).fold(S::zero(), |acc, c| {
                let a = self.at(r, c);
                if a.vanishes() || x[c].vanishes() {
                    acc
                } else {
                    acc.plus(&a.times(&x[c]))
                }
            }))
            .collect()
    }

    fn transpose(&self) -> Dense<S> {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.at(r, c).clone());
            }
        }
        Dense { rows: self.cols, cols: self.rows, data }
    }
}

/// Basis of the right null space.
pub(crate) fn nullspace<S: Scalar>(a: &Dense<S>) -> Vec<Vec<S>> {
    let mut m = a.clone();
    let pivots = m.rref(a.cols);
    let mut out = Vec::new();
    for free in (0..a.cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![S::zero(); a.cols];
        v[free] = S::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = m.at(r, free).negated();
        }
        out.push(v);
    }
    out
}

/// Outcome of [`solve`] when the system is inconsistent.
#[derive(Debug, Clone)]
pub(crate) struct Inconsistent {
    pub rank: usize,
    /// Row index carrying the largest weight in a left-null direction `y` with `yᵀb ≠ 0`.
    pub witness_row: Option<usize>,
}

/// Some solution of `A x = b`; free variables are set to zero.
pub(crate) fn solve<S: Scalar>(a: &Dense<S>, b: &[S]) -> Result<Vec<S>, Inconsistent> {
    let (rows, cols) = (a.rows, a.cols);
    let mut aug = Dense { rows, cols: cols + 1, data: Vec::with_capacity(rows * (cols + 1)) };
    for r in 0..rows {
        aug.data.extend_from_slice(&a.data[r * cols..(r + 1) * cols]);
        aug.data.push(b[r].clone());
    }
    let bscale = b.iter().map(|x| x.magnitude()).fold(0.0, f64::max);
    let pivots = aug.rref(cols);
    let rank = pivots.len();
    let tol = if S::is_exact() { 0.0 } else { FLOAT_RESIDUAL * (a.scale() + bscale).max(1e-300) };
    let consistent = (rank..rows).all(|r| {
        let v = aug.at(r, cols);
        if S::is_exact() {
            v.vanishes()
        } else {
            v.magnitude() <= tol
        }
    });
    let fail = |rank| Inconsistent { rank, witness_row: witness(a, b) };
    if !consistent {
        return Err(fail(rank));
    }
    let mut x = vec![S::zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = aug.at(r, cols).clone();
    }
    if !S::is_exact() {
        let ax = a.mul_vec(&x);
        let xs = x.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
        let res = ax.iter().zip(b).map(|(p, q)| p.minus(q).magnitude()).fold(0.0, f64::max);
        if res > FLOAT_RESIDUAL * (a.scale() * xs + bscale).max(1e-300) {
            return Err(fail(rank));
        }
    }
    Ok(x)
}

fn witness<S: Scalar>(a: &Dense<S>, b: &[S]) -> Option<usize> {
    let at = a.transpose();
    let best = nullspace(&at)
        .into_iter()
        .map(|y| {
            let dot = y.iter().zip(b).fold(S::zero(), |acc, (p, q)| acc.plus(&p.times(q)));
            (dot.magnitude(), y)
        })
        .fold(None, |acc: Option<(f64, Vec<S>)>, x| match acc {
            Some(a) if a.0 >= x.0 => Some(a),
            _ => Some(x),
        })?;
    if best.0 == 0.0 {
        return None;
    }
    best.1
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v.magnitude()))
        .fold(None, |acc: Option<(usize, f64)>, x| match acc {
            Some(a) if a.1 >= x.1 => Some(a),
            _ => Some(x),
        })
        .map(|(i, _)| i)
}
