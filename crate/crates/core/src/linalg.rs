//! Dense exact linear algebra: determinants, solves, ranks, kernels and Schur complements.

use std::fmt::Display;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::Field;

/// Dense row-major matrix over the elements of some [`Field`].
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn new(rows: usize, cols: usize, data: Vec<E>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        Matrix { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: E) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<T: Clone>(&self, f: impl FnMut(&E) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Submatrix picking the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<E: Display> Display for Matrix<E> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.data[i * self.cols + j].to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn identity<F: Field>(field: &F, n: usize) -> Matrix<F::Elem> {
    Matrix::from_fn(n, n, |i, j| if i == j { field.one() } else { field.zero() })
}

pub fn zeros<F: Field>(field: &F, rows: usize, cols: usize) -> Matrix<F::Elem> {
    Matrix::filled(rows, cols, field.zero())
}

pub fn mul<F: Field>(field: &F, a: &Matrix<F::Elem>, b: &Matrix<F::Elem>) -> Result<Matrix<F::Elem>> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = zeros(field, a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.get(i, k);
            if field.is_zero(aik) {
                continue;
            }
            for j in 0..b.cols {
                let t = field.mul(aik, b.get(k, j));
                let v = field.add(out.get(i, j), &t);
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

pub fn sub<F: Field>(field: &F, a: &Matrix<F::Elem>, b: &Matrix<F::Elem>) -> Result<Matrix<F::Elem>> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::DimensionMismatch("shape mismatch in subtraction".into()));
    }
    Ok(Matrix::from_fn(a.rows, a.cols, |i, j| field.sub(a.get(i, j), b.get(i, j))))
}

/// Determinant by Gaussian elimination with row pivoting on the first nonzero entry.
pub fn det_gauss<F: Field>(field: &F, m: &Matrix<F::Elem>) -> Result<F::Elem> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows, m.cols));
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut det = field.one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !field.is_zero(a.get(i, k))) else {
            return Ok(field.zero());
        };
        if p != k {
            a.swap_rows(p, k);
            det = field.neg(&det);
        }
        let pivot = a.get(k, k).clone();
        det = field.mul(&det, &pivot);
        let inv = field.inv(&pivot).expect("nonzero pivot");
        for i in k + 1..n {
            if field.is_zero(a.get(i, k)) {
                continue;
            }
            let factor = field.mul(a.get(i, k), &inv);
            for j in k + 1..n {
                let v = field.sub(a.get(i, j), &field.mul(&factor, a.get(k, j)));
                a.set(i, j, v);
            }
        }
    }
    Ok(det)
}

/// Scales every row to integers. Returns the integer matrix and the product of the row scales.
fn integerize(m: &Matrix<BigRational>) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut scale = BigInt::one();
    let rows = (0..m.rows)
        .map(|i| {
            let l = m.row(i).iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            scale *= &l;
            m.row(i).iter().map(|q| q.numer() * (&l / q.denom())).collect()
        })
        .collect();
    (rows, scale)
}

/// Fraction-free (Bareiss) determinant of a rational matrix.
///
/// Rows are first cleared of denominators, so every intermediate value is an
/// integer minor of the scaled matrix.
pub fn det_bareiss(m: &Matrix<BigRational>) -> Result<BigRational> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows, m.cols));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(BigRational::one());
    }
    let (mut a, scale) = integerize(m);
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        // smallest nonzero pivot keeps the intermediate products short
        let Some(p) = (k..n).filter(|&i| !a[i][k].is_zero()).min_by_key(|&i| a[i][k].bits()) else {
            return Ok(BigRational::zero());
        };
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let mut det = a[n - 1][n - 1].clone();
    if negate {
        det = -det;
    }
    Ok(BigRational::new(det, scale))
}

/// Reduced row echelon form in place. Returns the pivot columns.
pub fn rref<F: Field>(field: &F, a: &mut Matrix<F::Elem>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let Some(p) = (row..a.rows).find(|&i| !field.is_zero(a.get(i, col))) else {
            continue;
        };
        a.swap_rows(p, row);
        let inv = field.inv(a.get(row, col)).expect("nonzero pivot");
        for j in col..a.cols {
            let v = field.mul(a.get(row, j), &inv);
            a.set(row, j, v);
        }
        for i in 0..a.rows {
            if i == row || field.is_zero(a.get(i, col)) {
                continue;
            }
            let factor = a.get(i, col).clone();
            for j in col..a.cols {
                let v = field.sub(a.get(i, j), &field.mul(&factor, a.get(row, j)));
                a.set(i, j, v);
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank<F: Field>(field: &F, m: &Matrix<F::Elem>) -> usize {
    let mut a = m.clone();
    rref(field, &mut a).len()
}

/// Basis of the right kernel `{v : M v = 0}`.
pub fn nullspace<F: Field>(field: &F, m: &Matrix<F::Elem>) -> Vec<Vec<F::Elem>> {
    let mut a = m.clone();
    let pivots = rref(field, &mut a);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![field.zero(); m.cols];
            v[f] = field.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(a.get(r, f));
            }
            v
        })
        .collect()
}

/// Exact solution `X` of `A X = B` for square nonsingular `A`.
pub fn solve<F: Field>(field: &F, a: &Matrix<F::Elem>, b: &Matrix<F::Elem>) -> Result<Matrix<F::Elem>> {
    if !a.is_square() {
        return Err(Error::NotSquare(a.rows, a.cols));
    }
    if a.rows != b.rows {
        return Err(Error::DimensionMismatch(format!("right-hand side has {} rows, expected {}", b.rows, a.rows)));
    }
    let n = a.rows;
    let w = b.cols;
    let mut aug = Matrix::from_fn(n, n + w, |i, j| if j < n { a.get(i, j).clone() } else { b.get(i, j - n).clone() });
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !field.is_zero(aug.get(i, k))) else {
            return Err(Error::Singular);
        };
        aug.swap_rows(p, k);
        let inv = field.inv(aug.get(k, k)).expect("nonzero pivot");
        for j in k..n + w {
            let v = field.mul(aug.get(k, j), &inv);
            aug.set(k, j, v);
        }
        for i in 0..n {
            if i == k || field.is_zero(aug.get(i, k)) {
                continue;
            }
            let factor = aug.get(i, k).clone();
            for j in k..n + w {
                let v = field.sub(aug.get(i, j), &field.mul(&factor, aug.get(k, j)));
                aug.set(i, j, v);
            }
        }
    }
    Ok(Matrix::from_fn(n, w, |i, j| aug.get(i, n + j).clone()))
}

/// The four blocks of a matrix split after the first `k` rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks<E> {
    pub m11: Matrix<E>,
    pub m12: Matrix<E>,
    pub m21: Matrix<E>,
    pub m22: Matrix<E>,
}

pub fn split_blocks<E: Clone>(m: &Matrix<E>, k: usize) -> Result<Blocks<E>> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows, m.cols));
    }
    if k > m.rows {
        return Err(Error::DimensionMismatch(format!("split {k} exceeds size {}", m.rows)));
    }
    let head: Vec<usize> = (0..k).collect();
    let tail: Vec<usize> = (k..m.rows).collect();
    Ok(Blocks {
        m11: m.select(&head, &head),
        m12: m.select(&head, &tail),
        m21: m.select(&tail, &head),
        m22: m.select(&tail, &tail),
    })
}

/// Schur complement of the trailing block together with `M11^{-1} M12`.
pub fn schur_with_solution<F: Field>(
    field: &F,
    blocks: &Blocks<F::Elem>,
) -> Result<(Matrix<F::Elem>, Matrix<F::Elem>)> {
    let x = solve(field, &blocks.m11, &blocks.m12)?;
    let correction = mul(field, &blocks.m21, &x)?;
    Ok((sub(field, &blocks.m22, &correction)?, x))
}

/// `M22 - M21 M11^{-1} M12` for `m` split at `k`.
pub fn schur_complement<F: Field>(field: &F, m: &Matrix<F::Elem>, k: usize) -> Result<Matrix<F::Elem>> {
    let blocks = split_blocks(m, k)?;
    Ok(schur_with_solution(field, &blocks)?.0)
}

/// Largest absolute numerator or denominator, in bits. Handy for reporting growth.
pub fn max_bits(m: &Matrix<BigRational>) -> u64 {
    m.data.iter().map(|q| q.numer().abs().bits().max(q.denom().bits())).max().unwrap_or(0)
}
