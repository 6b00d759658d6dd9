//! Parameter redundancy caused by sampling zeros.
//!
//! The zero-adjusted derivative matrix has column `i` equal to
//! `y_i * A_(i)^T`. For positive counts its rank equals the rank of `A_+`
//! (the rows of `A` at positive cells), and `alpha^T D = 0` exactly when
//! `A_+ alpha = 0`. The analysis therefore works on `A_+` directly and is
//! invariant to the actual positive count values.

use crate::error::{Error, Result};
use crate::linalg::{dot, exact_rank, nullspace, rref, Matrix, NullspaceBasis};
use crate::model::DesignMatrix;
use crate::table::Table;
use crate::Rational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct DerivativeStructure {
    pub positive_cells: Vec<usize>,
    pub zero_cells: Vec<usize>,
    pub a_plus: Matrix<Rational>,
    pub a_zero: Matrix<Rational>,
    pub rank: usize,
    pub deficiency: usize,
    pub alpha: NullspaceBasis,
}

impl DerivativeStructure {
    pub fn n_params(&self) -> usize {
        self.a_plus.ncols()
    }

    pub fn is_redundant(&self) -> bool {
        self.deficiency > 0
    }
}

/// The literal derivative matrix `D[s][i] = d(y_i log mu_i)/d theta_s =
/// y_i A[i][s]` (`p x n`).
pub fn derivative_matrix(a: &DesignMatrix, table: &Table) -> Matrix<Rational> {
    let mut d = a.matrix.transpose();
    for (i, &y) in table.counts().iter().enumerate() {
        let y = Rational::from_integer(y.into());
        for s in 0..d.nrows() {
            d[(s, i)] = d[(s, i)].clone() * y.clone();
        }
    }
    d
}

pub fn analyze_redundancy(a: &DesignMatrix, table: &Table) -> Result<DerivativeStructure> {
    if a.n_rows() != table.n_cells() {
        return Err(Error::domain(format!(
            "design has {} rows but the table has {} cells",
            a.n_rows(),
            table.n_cells()
        )));
    }
    let positive_cells = table.positive_cells();
    if positive_cells.is_empty() {
        return Err(Error::EmptyTable);
    }
    let zero_cells = table.zero_cells();
    let a_plus = a.matrix.select_rows(&positive_cells);
    let a_zero = a.matrix.select_rows(&zero_cells);
    let rank = exact_rank(&a_plus);
    let alpha = nullspace(&a_plus);
    let deficiency = a.n_params() - rank;
    if alpha.len() != deficiency {
        return Err(Error::Internal(format!(
            "rank {rank} and nullity {} disagree for {} columns",
            alpha.len(),
            a.n_params()
        )));
    }
    Ok(DerivativeStructure {
        positive_cells,
        zero_cells,
        a_plus,
        a_zero,
        rank,
        deficiency,
        alpha,
    })
}

/// Parameters whose coordinate vanishes in every nullspace vector.
pub fn directly_estimable(ds: &DerivativeStructure) -> Vec<usize> {
    (0..ds.n_params())
        .filter(|&s| ds.alpha.vectors.iter().all(|v| v[s].is_zero()))
        .collect()
}

/// Complement of [`directly_estimable`].
pub fn nonestimable_parameters(ds: &DerivativeStructure) -> Vec<usize> {
    (0..ds.n_params())
        .filter(|&s| ds.alpha.vectors.iter().any(|v| !v[s].is_zero()))
        .collect()
}

/// `c^T theta` for an estimable combination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCombination {
    #[serde(with = "crate::serde_rational::vec")]
    pub coefficients: Vec<Rational>,
    pub display: String,
}

/// Renders `sum c_s label_s` as e.g. `-θ + θ^XY_21`; zero terms are skipped
/// and unit coefficients suppressed.
pub fn render_linear(coefficients: &[Rational], labels: &[String]) -> String {
    let mut out = String::new();
    for (c, label) in coefficients.iter().zip(labels) {
        if c.is_zero() {
            continue;
        }
        let negative = c.is_negative();
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let mag = c.abs();
        if !mag.is_one() {
            if mag.is_integer() {
                out.push_str(&mag.numer().to_string());
            } else {
                out.push_str(&format!("({}/{})", mag.numer(), mag.denom()));
            }
        }
        out.push_str(label);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// The estimable parameter combinations `theta'`.
///
/// The `d x p` matrix of nullspace vectors is brought to RREF; its pivot
/// parameters are eliminated and every other parameter `s` yields
/// `theta_s - sum_k R[k][s] theta_{pivot_k}`. For `d = 1` with the
/// intercept as pivot this is `theta_s - alpha_s theta`.
pub fn estimable_combinations(a: &DesignMatrix, ds: &DerivativeStructure) -> Vec<LinearCombination> {
    let labels = a.labels();
    let p = ds.n_params();
    let (pivots, reduced) = if ds.alpha.is_empty() {
        (Vec::new(), None)
    } else {
        let e = rref(&ds.alpha.as_matrix());
        (e.pivots.clone(), Some(e.matrix))
    };
    (0..p)
        .filter(|s| !pivots.contains(s))
        .map(|s| {
            let mut c = vec![Rational::zero(); p];
            c[s] = Rational::one();
            if let Some(r) = &reduced {
                for (k, &pk) in pivots.iter().enumerate() {
                    c[pk] = -r[(k, s)].clone();
                }
            }
            let display = render_linear(&c, &labels);
            LinearCombination {
                coefficients: c,
                display,
            }
        })
        .collect()
}

/// Cells whose log-mean lies in the row space of `A_+` (0-based, sorted).
pub fn estimable_cells(a: &DesignMatrix, ds: &DerivativeStructure) -> Vec<usize> {
    let alphas = ds.alpha.rational_vectors();
    (0..a.n_rows())
        .filter(|&i| alphas.iter().all(|al| dot(a.row(i), al).is_zero()))
        .collect()
}

#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub estimable_cells: Vec<usize>,
    pub a_prime: Matrix<Rational>,
    pub theta_prime: Vec<LinearCombination>,
    pub df: i64,
}

/// Re-expresses each estimable row of `A` in the `theta'` basis.
pub fn reduce_model(
    a: &DesignMatrix,
    ds: &DerivativeStructure,
    combos: &[LinearCombination],
    cells: &[usize],
) -> Result<ReducedModel> {
    let r = combos.len();
    if r != ds.rank {
        return Err(Error::domain(format!(
            "{r} combinations supplied for a structure of rank {}",
            ds.rank
        )));
    }
    // Every combination has coefficient 1 on its own leading parameter and 0
    // on the other leading parameters, so that coordinate is read directly.
    let leads: Vec<usize> = combos
        .iter()
        .map(|c| {
            c.coefficients
                .iter()
                .enumerate()
                .rev()
                .find(|(_, v)| !v.is_zero())
                .map(|(s, _)| s)
                .expect("nonzero combination")
        })
        .collect();
    let mut rows = Vec::with_capacity(cells.len());
    for &i in cells {
        let row = a.row(i);
        let coords: Vec<Rational> = leads.iter().map(|&s| row[s].clone()).collect();
        let mut rebuilt = vec![Rational::zero(); ds.n_params()];
        for (k, x) in coords.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (s, c) in combos[k].coefficients.iter().enumerate() {
                if !c.is_zero() {
                    rebuilt[s] += x * c;
                }
            }
        }
        if rebuilt.as_slice() != row {
            return Err(Error::Internal(format!(
                "cell {} is not expressible in the estimable combinations",
                i + 1
            )));
        }
        rows.push(coords);
    }
    let a_prime = Matrix::from_rows(rows, r)?;
    if exact_rank(&a_prime) != r {
        return Err(Error::Internal("reduced design lost column rank".into()));
    }
    Ok(ReducedModel {
        estimable_cells: cells.to_vec(),
        a_prime,
        theta_prime: combos.to_vec(),
        df: cells.len() as i64 - r as i64,
    })
}
