//! Small dense square matrices.
//!
//! Digit matrices are tiny (d is 1 or 2 for every family shipped here), so a flat
//! row-major `Vec` is all the structure needed. [`IntMatrix`] holds the exact
//! nonnegative integer entries of a representation; [`Mat`] is its floating
//! counterpart used by the spectral code.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Square matrix with nonnegative integer entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    data: Vec<u64>,
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidRepresentation("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidRepresentation(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(IntMatrix { dim, data })
    }

    pub fn scalar(value: u64) -> Self {
        IntMatrix {
            dim: 1,
            data: vec![value],
        }
    }

    pub fn zeros(dim: usize) -> Self {
        IntMatrix {
            dim,
            data: vec![0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.data[row * self.dim + col]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.data.chunks(self.dim).map(<[u64]>::to_vec).collect()
    }

    pub fn entries(&self) -> &[u64] {
        &self.data
    }

    pub fn checked_add(&self, other: &IntMatrix) -> Result<IntMatrix> {
        debug_assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.checked_add(*b).ok_or(Error::Overflow("adding matrices")))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix {
            dim: self.dim,
            data,
        })
    }

    pub fn checked_mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut data = vec![0u64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc: u64 = 0;
                for l in 0..d {
                    let term = self.data[i * d + l]
                        .checked_mul(other.data[l * d + j])
                        .ok_or(Error::Overflow("multiplying matrices"))?;
                    acc = acc
                        .checked_add(term)
                        .ok_or(Error::Overflow("multiplying matrices"))?;
                }
                data[i * d + j] = acc;
            }
        }
        Ok(IntMatrix { dim: d, data })
    }

    /// Entrywise difference `self - other`; fails if any entry would go negative.
    pub fn checked_sub(&self, other: &IntMatrix) -> Result<IntMatrix> {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                a.checked_sub(*b)
                    .ok_or(Error::Overflow("subtracting matrices"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix {
            dim: self.dim,
            data,
        })
    }

    /// First zero entry in row-major order, if any.
    pub fn first_zero(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|&x| x == 0)
            .map(|p| (p / self.dim, p % self.dim))
    }

    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|&x| x > 0)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_f64(&self) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().map(|&x| x as f64).collect(),
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

/// Row vector times matrix in exact arithmetic.
pub fn row_times(row: &[BigUint], m: &IntMatrix) -> Vec<BigUint> {
    let d = m.dim();
    (0..d)
        .map(|j| {
            let mut acc = BigUint::zero();
            for (i, r) in row.iter().enumerate() {
                let e = m.get(i, j);
                if e != 0 && !r.is_zero() {
                    acc += r * e;
                }
            }
            acc
        })
        .collect()
}

/// Square matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Mat {
    dim: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Mat {
            dim,
            data: rows.concat(),
        }
    }

    pub fn scalar(value: f64) -> Self {
        Mat {
            dim: 1,
            data: vec![value],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Mat { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for l in 0..d {
                let a = self.data[i * d + l];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * other.data[l * d + j];
                }
            }
        }
        Mat { dim: d, data }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|i| (0..d).map(|j| self.data[i * d + j] * v[j]).sum())
            .collect()
    }

    pub fn scale(&self, factor: f64) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        Mat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}
