//! Dense real and complex matrix helpers.
//!
//! Everything here is sized for this simulator: matrices are at most a few
//! hundred thousand rows by a couple dozen columns, and the square systems
//! are K-by-K with K around 18, so simple dense routines with partial
//! pivoting are more than enough.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use crate::error::Error;
use crate::math::{fabs, sqrt};
use crate::Result;

/// Row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = if n_rows == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            assert_eq!(row.len(), n_cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn same_shape(&self, other: &Mat) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    /// Column sums, accumulated row by row.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(r)) {
                *s += v;
            }
        }
        sums
    }

    /// Column sums of squares.
    pub fn col_sums_sq(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(r)) {
                *s += v * v;
            }
        }
        sums
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Complex scalar with the handful of operations the decoders need.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct C64 {
    pub re: f64,
    pub im: f64,
}

impl C64 {
    pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
    pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

    #[inline]
    pub fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }

    #[inline]
    pub fn conj(self) -> Self {
        C64::new(self.re, -self.im)
    }

    #[inline]
    pub fn abs_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn abs(self) -> f64 {
        sqrt(self.abs_sq())
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        C64::new(self.re * s, self.im * s)
    }
}

impl Add for C64 {
    type Output = C64;
    #[inline]
    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for C64 {
    type Output = C64;
    #[inline]
    fn sub(self, o: C64) -> C64 {
        C64::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for C64 {
    type Output = C64;
    #[inline]
    fn mul(self, o: C64) -> C64 {
        C64::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Neg for C64 {
    type Output = C64;
    #[inline]
    fn neg(self) -> C64 {
        C64::new(-self.re, -self.im)
    }
}

/// Complex division; the caller guarantees the divisor is nonzero.
impl Div for C64 {
    type Output = C64;
    #[inline]
    fn div(self, other: C64) -> C64 {
        let d = other.abs_sq();
        C64::new(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )
    }
}

/// Row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::ZERO; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMat { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn same_shape(&self, other: &CMat) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Householder QR factorization of a tall complex matrix (rows >= cols).
///
/// The reflectors are kept in factored form; `R` is the upper-triangular
/// cols-by-cols block. `Q* B` products are applied reflector by reflector,
/// which is all the ZF decoder needs.
pub struct QrFactors {
    rows: usize,
    cols: usize,
    reflectors: Vec<Vec<C64>>,
    taus: Vec<f64>,
    r: CMat,
}

pub fn qr_decompose(a: &CMat) -> Result<QrFactors> {
    let (m, k) = (a.rows(), a.cols());
    if m < k {
        return Err(Error::shape("QR needs at least as many rows as columns"));
    }
    let mut work = a.clone();
    let mut reflectors = Vec::with_capacity(k);
    let mut taus = Vec::with_capacity(k);

    for j in 0..k {
        // Householder vector for column j below the diagonal.
        let mut norm_sq = 0.0;
        for i in j..m {
            norm_sq += work[(i, j)].abs_sq();
        }
        let norm = sqrt(norm_sq);

        let x0 = work[(j, j)];
        // alpha = -phase(x0) * ||x||, so v* x is real and R's diagonal is -phase(x0)*||x||.
        let phase = if x0.abs() > 0.0 {
            x0.scale(1.0 / x0.abs())
        } else {
            C64::ONE
        };
        let alpha = (-phase).scale(norm);

        let mut v: Vec<C64> = Vec::with_capacity(m - j);
        v.push(x0 - alpha);
        for i in (j + 1)..m {
            v.push(work[(i, j)]);
        }
        let v_norm_sq: f64 = v.iter().map(|z| z.abs_sq()).sum();
        let tau = if v_norm_sq > 0.0 {
            2.0 / v_norm_sq
        } else {
            0.0
        };

        // Apply H = I - tau v v* to the trailing columns.
        for c in j..k {
            let mut dot = C64::ZERO; // v* column
            for (offset, vi) in v.iter().enumerate() {
                dot = dot + vi.conj() * work[(j + offset, c)];
            }
            let s = dot.scale(tau);
            for (offset, vi) in v.iter().enumerate() {
                let cur = work[(j + offset, c)];
                work[(j + offset, c)] = cur - *vi * s;
            }
        }

        reflectors.push(v);
        taus.push(tau);
    }

    let r = CMat::from_fn(k, k, |i, j| if j >= i { work[(i, j)] } else { C64::ZERO });
    Ok(QrFactors {
        rows: m,
        cols: k,
        reflectors,
        taus,
        r,
    })
}

impl QrFactors {
    pub fn r(&self) -> &CMat {
        &self.r
    }

    /// True when R's diagonal spread says the factored matrix is numerically
    /// rank deficient.
    pub fn is_rank_deficient(&self) -> bool {
        let mut max_d: f64 = 0.0;
        let mut min_d = f64::INFINITY;
        for j in 0..self.cols {
            let d = self.r[(j, j)].abs();
            max_d = if d > max_d { d } else { max_d };
            min_d = if d < min_d { d } else { min_d };
        }
        min_d.is_nan() || min_d <= 1e-13 * max_d || max_d == 0.0
    }

    /// Top `cols` rows of `Q* b`, i.e. the thin-Q conjugate-transpose product.
    pub fn q_conj_times(&self, b: &CMat) -> Result<CMat> {
        if b.rows() != self.rows {
            return Err(Error::shape("Q* product row count mismatch"));
        }
        let mut work = b.clone();
        let n = b.cols();
        for (j, v) in self.reflectors.iter().enumerate() {
            let tau = self.taus[j];
            if tau == 0.0 {
                continue;
            }
            for c in 0..n {
                let mut dot = C64::ZERO;
                for (offset, vi) in v.iter().enumerate() {
                    dot = dot + vi.conj() * work[(j + offset, c)];
                }
                let s = dot.scale(tau);
                for (offset, vi) in v.iter().enumerate() {
                    let cur = work[(j + offset, c)];
                    work[(j + offset, c)] = cur - *vi * s;
                }
            }
        }
        Ok(CMat::from_fn(self.cols, n, |i, j| work[(i, j)]))
    }
}

/// Solve R X = B for upper-triangular R (cols-by-cols) by back substitution.
pub fn solve_upper_triangular(r: &CMat, b: &CMat) -> Result<CMat> {
    let k = r.rows();
    if r.cols() != k || b.rows() != k {
        return Err(Error::shape("triangular solve dimensions"));
    }
    let n = b.cols();
    let mut x = b.clone();
    for c in 0..n {
        for i in (0..k).rev() {
            let mut acc = x[(i, c)];
            for j in (i + 1)..k {
                acc = acc - r[(i, j)] * x[(j, c)];
            }
            x[(i, c)] = acc / r[(i, i)];
        }
    }
    Ok(x)
}

/// Inverse of an upper-triangular complex matrix.
pub fn invert_upper_triangular(r: &CMat) -> Result<CMat> {
    let k = r.rows();
    let identity = CMat::from_fn(k, k, |i, j| if i == j { C64::ONE } else { C64::ZERO });
    solve_upper_triangular(r, &identity)
}

/// Solve a small dense real system `a x = b` by LU with partial pivoting.
///
/// Returns `None` when the matrix is numerically singular.
pub fn solve_real_system(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return None;
    }
    let mut lu: Vec<f64> = a.iter().collect();
    let mut x: Vec<f64> = b.to_vec();

    for col in 0..n {
        // Partial pivot.
        let mut pivot_row = col;
        let mut pivot_mag = fabs(lu[col * n + col]);
        for row in (col + 1)..n {
            let mag = fabs(lu[row * n + col]);
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        if pivot_mag < 1e-300 {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap(col * n + j, pivot_row * n + j);
            }
            x.swap(col, pivot_row);
        }

        let pivot = lu[col * n + col];
        for row in (col + 1)..n {
            let factor = lu[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in (col + 1)..n {
                lu[row * n + j] -= factor * lu[col * n + j];
            }
            x[row] -= factor * x[col];
        }
    }

    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in (i + 1)..n {
            acc -= lu[i * n + j] * x[j];
        }
        x[i] = acc / lu[i * n + i];
    }
    Some(x)
}
