//! Small dense matrices over `TSeries`, exact `t`-polynomials and constants.

use alloc::format;
use alloc::vec::Vec;

use crate::cinf::{Cinf, EXACT};
use crate::error::{Error, Result};
use crate::tseries::{PolyT, TSeries};

/// The ring operations a matrix entry needs.
pub trait Entry: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    /// Residual size: the smallest exponent not known to vanish.
    fn zero_order(&self) -> i64;
}

impl Entry for Cinf {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn zero_like(&self) -> Self {
        Cinf::zero(self.tower())
    }
    fn one_like(&self) -> Self {
        Cinf::one(self.tower())
    }
    fn zero_order(&self) -> i64 {
        Cinf::zero_order(self)
    }
}

impl Entry for TSeries {
    fn add(&self, o: &Self) -> Self {
        TSeries::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        TSeries::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        TSeries::mul(self, o)
    }
    fn zero_like(&self) -> Self {
        TSeries::zero(self.tower(), self.len())
    }
    fn one_like(&self) -> Self {
        TSeries::one(self.tower(), self.len())
    }
    fn zero_order(&self) -> i64 {
        TSeries::zero_order(self)
    }
}

impl Entry for PolyT {
    fn add(&self, o: &Self) -> Self {
        PolyT::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        PolyT::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        PolyT::mul(self, o)
    }
    fn zero_like(&self) -> Self {
        PolyT::zero(self.tower())
    }
    fn one_like(&self) -> Self {
        PolyT::constant(Cinf::one(self.tower()))
    }
    fn zero_order(&self) -> i64 {
        self.coeffs().iter().map(|c| c.zero_order()).min().unwrap_or(EXACT)
    }
}

/// Row-major `rows × cols` matrix; never empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

pub type TMatrix = Matrix<TSeries>;
pub type ExactMatrix = Matrix<PolyT>;
pub type CMatrix = Matrix<Cinf>;

impl<R: Entry> Matrix<R> {
    pub fn new(rows: usize, cols: usize, data: Vec<R>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}×{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// `n × n` identity built from the unit of `sample`.
    pub fn identity(sample: &R, n: usize) -> Self {
        let data = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    sample.one_like()
                } else {
                    sample.zero_like()
                }
            })
            .collect();
        Matrix { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[R] {
        &self.data
    }

    pub fn map<S, F: FnMut(&R) -> S>(&self, f: F) -> Matrix<S> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<S, F: FnMut(&R) -> Result<S>>(&self, f: F) -> Result<Matrix<S>> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<Vec<_>>>()?,
        })
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}×{} against {}×{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}×{} times {}×{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = self.get(i, 0).mul(o.get(0, j));
                for k in 1..self.cols {
                    acc = acc.add(&self.get(i, k).mul(o.get(k, j)));
                }
                data.push(acc);
            }
        }
        Ok(Matrix {
            rows: self.rows,
            cols: o.cols,
            data,
        })
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn kronecker(&self, o: &Self) -> Self {
        let rows = self.rows * o.rows;
        let cols = self.cols * o.cols;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let a = self.get(i / o.rows, j / o.cols);
                let b = o.get(i % o.rows, j % o.cols);
                data.push(a.mul(b));
            }
        }
        Matrix { rows, cols, data }
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != skip_row) {
            for j in (0..self.cols).filter(|&j| j != skip_col) {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Result<R> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(format!("det of {}×{}", self.rows, self.cols)));
        }
        Ok(self.det_rec())
    }

    fn det_rec(&self) -> R {
        match self.rows {
            1 => self.data[0].clone(),
            2 => self.data[0].mul(&self.data[3]).sub(&self.data[1].mul(&self.data[2])),
            n => {
                let mut acc = self.data[0].zero_like();
                for j in 0..n {
                    if self.get(0, j).zero_order() == EXACT {
                        continue;
                    }
                    let term = self.get(0, j).mul(&self.minor(0, j).det_rec());
                    acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
                }
                acc
            }
        }
    }

    /// Adjugate: `A · adj(A) = det(A) · I`.
    pub fn adjugate(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("adjugate of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 1 {
            return Ok(Matrix::identity(&self.data[0], 1));
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let c = self.minor(j, i).det_rec();
                data.push(if (i + j) % 2 == 0 { c } else { c.zero_like().sub(&c) });
            }
        }
        Ok(Matrix { rows: n, cols: n, data })
    }

    /// Smallest zero order over all entries.
    pub fn zero_order(&self) -> i64 {
        self.data.iter().map(|e| e.zero_order()).min().unwrap_or(EXACT)
    }
}

impl Matrix<Cinf> {
    pub fn inverse(&self) -> Result<Self> {
        let d = self.det()?;
        if d.is_zero() {
            return Err(Error::SingularSpecialization);
        }
        let dinv = d.inv()?;
        Ok(self.adjugate()?.map(|x| x * &dinv))
    }

    pub fn scale(&self, c: &Cinf) -> Self {
        self.map(|x| x * c)
    }
}

impl Matrix<TSeries> {
    pub fn twist(&self, n: u32) -> Result<Self> {
        self.try_map(|x| x.twist(n))
    }

    pub fn scale(&self, c: &Cinf) -> Self {
        self.map(|x| x.scale(c))
    }

    /// Formal inverse `adj(A)/det(A)`; needs `det(A)` with invertible constant term.
    pub fn inverse(&self) -> Result<Self> {
        let dinv = self.det()?.inv()?;
        Ok(self.adjugate()?.map(|x| x.mul(&dinv)))
    }

    pub fn specialize(&self, t0: &Cinf) -> Result<CMatrix> {
        self.try_map(|x| x.specialize(t0))
    }
}

impl Matrix<PolyT> {
    pub fn twist(&self, n: i64) -> Result<Self> {
        self.try_map(|x| x.twist(n))
    }

    pub fn to_tmatrix(&self, t: usize) -> TMatrix {
        self.map(|x| x.to_tseries(t))
    }

    pub fn eval(&self, t0: &Cinf) -> CMatrix {
        self.map(|x| x.eval(t0))
    }
}
