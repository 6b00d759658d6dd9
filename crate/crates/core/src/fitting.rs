//! Maximum-likelihood fitting of full-column-rank Poisson log-linear models.
//!
//! The kernel `l(theta) = t^T theta - 1^T exp(X theta)` with `t = X^T y` is
//! strictly concave for full-rank `X`, so Newton's method with step-halving
//! reaches the unique maximiser whenever it exists.

use crate::error::{Error, Result};
use crate::linalg::{exact_rank, Matrix};
use crate::model::DesignMatrix;
use crate::table::Table;
use crate::Rational;
use nalgebra::{DMatrix, DVector, RealField};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Convergence threshold on the max-norm of the score.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 100,
            max_halvings: 50,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T: RealField> {
    pub theta_hat: Vec<T>,
    pub mu_hat: Vec<T>,
    pub log_likelihood: T,
    pub iterations: usize,
    pub converged: bool,
    pub score_norm: T,
}

/// Converts an exact design to a dense real matrix.
pub fn to_real<T: RealField + Copy>(m: &Matrix<Rational>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        nalgebra::convert(m[(i, j)].to_f64().unwrap_or(f64::NAN))
    })
}

pub fn linear_predictor<T: RealField + Copy>(design: &DMatrix<T>, theta: &DVector<T>) -> DVector<T> {
    design * theta
}

pub fn means<T: RealField + Copy>(design: &DMatrix<T>, theta: &DVector<T>) -> DVector<T> {
    linear_predictor(design, theta).map(|e| e.exp())
}

/// `t^T theta - sum exp(X theta)`; the Poisson log-likelihood up to a
/// constant.
pub fn log_likelihood<T: RealField + Copy>(design: &DMatrix<T>, counts: &DVector<T>, theta: &DVector<T>) -> T {
    let eta = linear_predictor(design, theta);
    let mut l = T::zero();
    for (y, e) in counts.iter().zip(eta.iter()) {
        l += *y * *e - e.exp();
    }
    l
}

/// `X^T (y - mu(theta))`.
pub fn score<T: RealField + Copy>(design: &DMatrix<T>, counts: &DVector<T>, theta: &DVector<T>) -> DVector<T> {
    design.tr_mul(&(counts - means(design, theta)))
}

/// Observed (= expected) information `X^T diag(mu) X`.
pub fn information<T: RealField + Copy>(design: &DMatrix<T>, mu: &DVector<T>) -> DMatrix<T> {
    let mut weighted = design.clone();
    for (i, m) in mu.iter().enumerate() {
        weighted.row_mut(i).scale_mut(*m);
    }
    design.tr_mul(&weighted)
}

fn max_abs<T: RealField + Copy>(v: &DVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

fn numerically_full_rank<T: RealField + Copy>(m: &DMatrix<T>) -> bool {
    if m.ncols() == 0 || m.nrows() < m.ncols() {
        return m.ncols() == 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let hi = sv.iter().fold(T::zero(), |a, s| a.max(*s));
    let lo = sv.iter().fold(hi, |a, s| a.min(*s));
    let cutoff: T = nalgebra::convert(m.nrows().max(m.ncols()) as f64);
    lo > hi * T::default_epsilon() * cutoff * nalgebra::convert(1e3)
}

pub fn fit<T: RealField + Copy>(design: &DMatrix<T>, counts: &[T]) -> Result<FitResult<T>> {
    fit_with(design, counts, FitOptions::default())
}

pub fn fit_with<T: RealField + Copy>(design: &DMatrix<T>, counts: &[T], opts: FitOptions) -> Result<FitResult<T>> {
    if counts.len() != design.nrows() {
        return Err(Error::domain(format!(
            "{} counts for a design with {} rows",
            counts.len(),
            design.nrows()
        )));
    }
    if counts.iter().any(|c| c.is_negative()) || counts.iter().all(|c| c.is_zero()) {
        return Err(Error::domain("counts must be non-negative with at least one positive"));
    }
    if !numerically_full_rank(design) {
        return Err(Error::domain("design does not have full column rank"));
    }
    let y = DVector::from_column_slice(counts);
    let mut theta = DVector::<T>::zeros(design.ncols());
    let mut ll = log_likelihood(design, &y, &theta);
    // Rounding in the score grows with the table total.
    let total = counts.iter().fold(T::zero(), |a, c| a + *c);
    let floor: T = T::default_epsilon() * nalgebra::convert(100.0) * (T::one() + total);
    let tol = floor.max(nalgebra::convert(opts.tolerance));
    let mut iterations = 0;
    let mut grad = score(design, &y, &theta);
    let two: T = nalgebra::convert(2.0);

    while max_abs(&grad) >= tol && iterations < opts.max_iterations {
        iterations += 1;
        let info = information(design, &means(design, &theta));
        let step = match info.clone().cholesky() {
            Some(c) => c.solve(&grad),
            None => match info.lu().solve(&grad) {
                Some(s) => s,
                None => break,
            },
        };
        let mut scale = T::one();
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let candidate = &theta + &step * scale;
            let cand_ll = log_likelihood(design, &y, &candidate);
            // Near the optimum the gain drops below the rounding in `ll`.
            let slack = T::default_epsilon() * nalgebra::convert(100.0) * (ll.abs() + total);
            if cand_ll.is_finite() && cand_ll >= ll - slack {
                theta = candidate;
                ll = cand_ll;
                accepted = true;
                break;
            }
            scale /= two;
        }
        grad = score(design, &y, &theta);
        if !accepted {
            break;
        }
    }
    let score_norm = max_abs(&grad);
    let mu = means(design, &theta);
    Ok(FitResult {
        theta_hat: theta.iter().copied().collect(),
        mu_hat: mu.iter().copied().collect(),
        log_likelihood: ll,
        iterations,
        converged: score_norm < tol,
        score_norm,
    })
}

/// Fits an exact design on integer counts in double precision, checking
/// column rank exactly first.
pub fn fit_exact(design: &Matrix<Rational>, counts: &[u64]) -> Result<FitResult<f64>> {
    if exact_rank(design) != design.ncols() {
        return Err(Error::domain("design does not have full column rank"));
    }
    let y: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    fit(&to_real(design), &y)
}

#[derive(Debug, Clone, PartialEq)]
pub enum StandardErrors<T> {
    Finite(Vec<T>),
    /// The information matrix at the optimum is singular.
    NonIdentifiable,
}

/// Square roots of the diagonal of `(X^T diag(mu_hat) X)^{-1}`.
pub fn standard_errors<T: RealField + Copy>(fit: &FitResult<T>, design: &DMatrix<T>) -> Result<StandardErrors<T>> {
    if fit.mu_hat.len() != design.nrows() {
        return Err(Error::domain("fitted means do not match the design rows"));
    }
    let info = information(design, &DVector::from_column_slice(&fit.mu_hat));
    if !numerically_full_rank(&info) {
        return Ok(StandardErrors::NonIdentifiable);
    }
    let inverse = match info.cholesky() {
        Some(c) => c.inverse(),
        None => return Ok(StandardErrors::NonIdentifiable),
    };
    Ok(StandardErrors::Finite(
        (0..inverse.nrows()).map(|i| inverse[(i, i)].sqrt()).collect(),
    ))
}

/// Observed marginals `t = A^T y`.
pub fn sufficient_marginals(a: &DesignMatrix, table: &Table) -> Vec<BigInt> {
    let p = a.n_params();
    let mut t = vec![BigInt::from(0); p];
    for (i, &y) in table.counts().iter().enumerate() {
        if y == 0 {
            continue;
        }
        for (s, v) in a.row(i).iter().enumerate() {
            if !num_traits::Zero::is_zero(v) {
                t[s] += v.numer() * BigInt::from(y) / v.denom();
            }
        }
    }
    t
}
