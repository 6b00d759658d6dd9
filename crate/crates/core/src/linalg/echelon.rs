//! Reduced row-echelon form, nullspaces and the canonical integer basis.

use crate::linalg::matrix::unit;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Reduced row-echelon form together with its pivot columns (increasing).
#[derive(Debug, Clone, PartialEq)]
pub struct Rref<T> {
    pub matrix: Matrix<T>,
    pub pivots: Vec<usize>,
}

impl<T: Scalar> Rref<T> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Columns that carry no pivot.
    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.matrix.ncols()];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.matrix.ncols()).filter(|&j| !is_pivot[j]).collect()
    }
}

/// Gauss-Jordan elimination. For exact scalars the result is the unique
/// RREF; for floats, partial pivoting on magnitude keeps it stable.
pub fn rref<T: Scalar>(m: &Matrix<T>) -> Rref<T> {
    let mut a = m.clone();
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut best: Option<usize> = None;
        for i in r..rows {
            if a[(i, c)].is_negligible() {
                continue;
            }
            match best {
                Some(b) if a[(b, c)].abs() >= a[(i, c)].abs() => {}
                _ => best = Some(i),
            }
        }
        let Some(p) = best else {
            for i in r..rows {
                a[(i, c)] = T::zero();
            }
            continue;
        };
        a.swap_rows(r, p);
        let inv = T::one() / a[(r, c)].clone();
        for j in c..cols {
            a[(r, j)] = a[(r, j)].clone() * inv.clone();
        }
        let support: Vec<usize> = (c + 1..cols).filter(|&j| !a[(r, j)].is_zero()).collect();
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for &j in &support {
                let v = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                a[(i, j)] = v;
            }
            a[(i, c)] = T::zero();
        }
        pivots.push(c);
        r += 1;
    }
    Rref { matrix: a, pivots }
}

pub fn rank<T: Scalar>(m: &Matrix<T>) -> usize {
    rref(m).rank()
}

/// Basis of `{x : m x = 0}` read off the RREF: one vector per free column,
/// with a 1 in that column.
pub fn nullspace_vectors<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let e = rref(m);
    let cols = m.ncols();
    e.free_columns()
        .into_iter()
        .map(|f| {
            let mut v = unit::<T>(cols, f);
            for (k, &p) in e.pivots.iter().enumerate() {
                v[p] = -e.matrix[(k, f)].clone();
            }
            v
        })
        .collect()
}

/// Canonical integer nullspace basis.
///
/// Each vector is primitive (entries have gcd 1) and its first nonzero
/// entry is positive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullspaceBasis {
    pub dim: usize,
    pub vectors: Vec<Vec<BigInt>>,
    pub canonical: bool,
}

impl NullspaceBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn rational_vectors(&self) -> Vec<Vec<Rational>> {
        self.vectors
            .iter()
            .map(|v| v.iter().cloned().map(Rational::from_integer).collect())
            .collect()
    }

    /// The `d x p` matrix whose rows are the basis vectors.
    pub fn as_matrix(&self) -> Matrix<Rational> {
        Matrix::from_rows(self.rational_vectors(), self.dim).expect("uniform basis")
    }
}

pub fn nullspace(m: &Matrix<Rational>) -> NullspaceBasis {
    let vectors = nullspace_vectors(m)
        .iter()
        .map(|v| primitive_integer_vector(v))
        .collect();
    NullspaceBasis {
        dim: m.ncols(),
        vectors,
        canonical: true,
    }
}

/// Scales a rational vector to the primitive integer vector with a positive
/// leading entry. The zero vector maps to zeros.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let mut out = positive_primitive(v);
    if let Some(first) = out.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            out.iter_mut().for_each(|x| *x = -x.clone());
        }
    }
    out
}

/// Scales by a positive factor only, so sign orientation is kept.
pub fn positive_primitive(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Solves `m x = b` exactly. Returns `None` when inconsistent; free
/// variables are set to zero.
pub fn solve<T: Scalar>(m: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    assert_eq!(m.nrows(), b.len());
    let mut aug = Matrix::zeros(m.nrows(), m.ncols() + 1);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, m.ncols())] = b[i].clone();
    }
    let e = rref(&aug);
    if e.pivots.last() == Some(&m.ncols()) {
        return None;
    }
    let mut x = vec![T::zero(); m.ncols()];
    for (k, &p) in e.pivots.iter().enumerate() {
        x[p] = e.matrix[(k, m.ncols())].clone();
    }
    Some(x)
}
