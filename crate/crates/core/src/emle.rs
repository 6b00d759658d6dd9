//! Existence of the MLE and the facial set of the observed marginals.
//!
//! The MLE of the cell means exists iff no `zeta` has `A_+ zeta = 0` and
//! `A_0 zeta >= 0` with some strictly positive entry. The co-facial set is
//! the largest support `{i : (A zeta)_i > 0}` over such directions; since
//! supports of feasible directions are closed under addition it is unique.

use crate::error::{Error, Result};
use crate::linalg::{
    dot, exact_rank, nullspace, positive_primitive, rref, solve_lp, LpProblem, LpStatus, Matrix,
    Sense,
};
use crate::model::DesignMatrix;
use crate::table::Table;
use crate::Rational;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone)]
pub struct EmleReport {
    pub mle_exists: bool,
    /// 0-based cells of `F`, sorted.
    pub facial_set: Vec<usize>,
    /// 0-based cells of `F^c`, sorted; always zero cells.
    pub co_facial_set: Vec<usize>,
    /// Witness direction, primitive integer, present iff the MLE does not exist.
    pub zeta: Option<Vec<BigInt>>,
    /// Columns of `A` kept in `A*_F` (leftmost independent set).
    pub kept_columns: Vec<usize>,
    pub a_star: Matrix<Rational>,
    pub p_f: usize,
    pub df: i64,
    /// LP solves performed; zero when the rank shortcut applied.
    pub lp_rounds: usize,
}

/// How existence was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExistenceCertificate {
    /// `rank(A_+) = p`: no nonzero direction annihilates `A_+`.
    FullRankPositivePart,
    /// The facial-set LP found no direction (or found one).
    FacialSetSearch,
}

pub fn mle_exists(a: &DesignMatrix, table: &Table) -> Result<(bool, ExistenceCertificate)> {
    let a_plus = a.matrix.select_rows(&table.positive_cells());
    if exact_rank(&a_plus) == a.n_params() {
        return Ok((true, ExistenceCertificate::FullRankPositivePart));
    }
    let report = facial_set(a, table)?;
    Ok((report.mle_exists, ExistenceCertificate::FacialSetSearch))
}

/// Computes `F`, `F^c`, a witness `zeta` and the reduced design `A*_F`.
///
/// Directions are parametrised as `zeta = N w` with `N` a nullspace basis
/// of `A_+`, so `A_+ zeta = 0` holds by construction. Each round solves
///
/// ```text
/// maximize sum s_i  s.t.  (A_0 N w)_i >= s_i, 0 <= s_i <= 1  (uncertified i)
///                         (A_0 N w)_i >= 0                   (certified i)
/// ```
///
/// and certifies every cell left strictly positive; rounds stop when no new
/// cell is certified. The witness is the sum of the round solutions.
pub fn facial_set(a: &DesignMatrix, table: &Table) -> Result<EmleReport> {
    if a.n_rows() != table.n_cells() {
        return Err(Error::domain("design and table sizes differ"));
    }
    let n = table.n_cells();
    let p = a.n_params();
    let positive = table.positive_cells();
    let zeros = table.zero_cells();
    let a_plus = a.matrix.select_rows(&positive);
    let basis = nullspace(&a_plus);

    let mut certified: Vec<usize> = Vec::new();
    let mut zeta = vec![Rational::zero(); p];
    let mut rounds = 0;

    if !basis.is_empty() && !zeros.is_empty() {
        let d = basis.len();
        let nvecs = basis.rational_vectors();
        // B = A_0 N, one row per zero cell.
        let b_rows: Vec<Vec<Rational>> = zeros
            .iter()
            .map(|&i| nvecs.iter().map(|v| dot(a.row(i), v)).collect())
            .collect();
        let candidates: Vec<usize> = (0..zeros.len())
            .filter(|&k| b_rows[k].iter().any(|v| !v.is_zero()))
            .collect();

        loop {
            let open: Vec<usize> = candidates
                .iter()
                .copied()
                .filter(|k| !certified.contains(&zeros[*k]))
                .collect();
            if open.is_empty() {
                break;
            }
            let nvars = d + open.len();
            let mut rows: Vec<Vec<Rational>> = Vec::new();
            let mut senses = Vec::new();
            let mut rhs = Vec::new();
            for &k in &candidates {
                let mut row = vec![Rational::zero(); nvars];
                row[..d].clone_from_slice(&b_rows[k]);
                if let Some(pos) = open.iter().position(|&o| o == k) {
                    row[d + pos] = -Rational::one();
                }
                rows.push(row);
                senses.push(Sense::Ge);
                rhs.push(Rational::zero());
            }
            for pos in 0..open.len() {
                let mut row = vec![Rational::zero(); nvars];
                row[d + pos] = Rational::one();
                rows.push(row);
                senses.push(Sense::Le);
                rhs.push(Rational::one());
            }
            let mut objective = vec![Rational::zero(); nvars];
            objective[d..].iter_mut().for_each(|c| *c = Rational::one());
            let mut free = vec![false; nvars];
            free[..d].iter_mut().for_each(|f| *f = true);
            let prob = LpProblem::new(Matrix::from_rows(rows, nvars)?, senses, rhs, objective)
                .with_free(free);
            let sol = solve_lp(&prob)?;
            rounds += 1;
            if sol.status != LpStatus::Optimal {
                return Err(Error::Internal(format!(
                    "facial-set LP returned {:?}; it is feasible and bounded by construction",
                    sol.status
                )));
            }
            if sol.objective.is_zero() {
                break;
            }
            let w = &sol.x[..d];
            let mut newly = 0;
            for &k in &candidates {
                let v = dot(&b_rows[k], w);
                if v.is_negative() {
                    return Err(Error::Internal("LP witness violates A_0 zeta >= 0".into()));
                }
                if v.is_positive() && !certified.contains(&zeros[k]) {
                    certified.push(zeros[k]);
                    newly += 1;
                }
            }
            for (j, wj) in w.iter().enumerate() {
                for s in 0..p {
                    zeta[s] = zeta[s].clone() + wj.clone() * nvecs[j][s].clone();
                }
            }
            if newly == 0 {
                break;
            }
        }
    }

    certified.sort_unstable();
    let co_facial_set = certified;
    let facial_set: Vec<usize> = (0..n).filter(|i| !co_facial_set.contains(i)).collect();
    let mle_exists = co_facial_set.is_empty();
    let zeta = (!mle_exists).then(|| positive_primitive(&zeta));
    let (a_star, kept_columns) = reduce_design_facial(a, &facial_set)?;
    let p_f = kept_columns.len();
    Ok(EmleReport {
        mle_exists,
        df: facial_set.len() as i64 - p_f as i64,
        facial_set,
        co_facial_set,
        zeta,
        kept_columns,
        a_star,
        p_f,
        lp_rounds: rounds,
    })
}

/// Restricts `A` to the rows in `facial` and keeps the leftmost maximal
/// independent set of columns (the pivot columns of its RREF).
pub fn reduce_design_facial(a: &DesignMatrix, facial: &[usize]) -> Result<(Matrix<Rational>, Vec<usize>)> {
    if facial.is_empty() {
        return Err(Error::domain("facial set is empty"));
    }
    let a_f = a.matrix.select_rows(facial);
    let kept = rref(&a_f).pivots;
    Ok((a_f.select_columns(&kept), kept))
}

/// Checks a candidate `delta` for Haberman's condition: `A^T delta = 0` and
/// `y + delta > 0` cell-wise.
pub fn haberman_delta_check(a: &DesignMatrix, table: &Table, delta: &[Rational]) -> bool {
    if delta.len() != table.n_cells() {
        return false;
    }
    let orthogonal = a
        .matrix
        .transpose()
        .mul_vec(delta)
        .iter()
        .all(|v| v.is_zero());
    let shifted_positive = table
        .counts()
        .iter()
        .zip(delta)
        .all(|(&y, d)| (Rational::from_integer(y.into()) + d).is_positive());
    orthogonal && shifted_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_design_matrix, parse_model_formula};
    use crate::table::default_variables;

    fn setup(levels: &[usize], formula: &str, counts: Vec<u64>) -> (DesignMatrix, Table) {
        let vars = default_variables(levels);
        let a = build_design_matrix(&parse_model_formula(formula, &vars).unwrap(), &vars).unwrap();
        (a, Table::new(vars, counts).unwrap())
    }

    #[test]
    fn all_positive_uses_shortcut() {
        let (a, t) = setup(&[2, 2], "(X,Y)", vec![1, 2, 3, 4]);
        assert_eq!(
            mle_exists(&a, &t).unwrap(),
            (true, ExistenceCertificate::FullRankPositivePart)
        );
        let r = facial_set(&a, &t).unwrap();
        assert!(r.mle_exists && r.co_facial_set.is_empty());
        assert_eq!(r.a_star, a.matrix);
        assert_eq!(r.lp_rounds, 0);
    }

    #[test]
    fn zero_margin_gives_co_facial_cells() {
        // Independence on 2x2 with the whole X=0 row empty.
        let (a, t) = setup(&[2, 2], "(X,Y)", vec![0, 5, 0, 7]);
        let r = facial_set(&a, &t).unwrap();
        assert!(!r.mle_exists);
        assert_eq!(r.co_facial_set, vec![0, 2]);
        assert_eq!(r.facial_set, vec![1, 3]);
        let zeta = r.zeta.unwrap();
        for i in 0..4 {
            let v: BigInt = a
                .row(i)
                .iter()
                .zip(&zeta)
                .map(|(x, z)| x.numer() * z)
                .sum();
            if r.co_facial_set.contains(&i) {
                assert!(v.is_positive());
            } else {
                assert!(v.is_zero());
            }
        }
        assert_eq!(r.p_f, 2);
        assert_eq!(r.df, 0);
    }

    #[test]
    fn zero_delta_with_positive_counts() {
        let (a, t) = setup(&[2, 2], "(X,Y)", vec![1, 2, 3, 4]);
        assert!(haberman_delta_check(&a, &t, &vec![Rational::zero(); 4]));
        assert!(!haberman_delta_check(&a, &t, &vec![Rational::zero(); 3]));
    }
}
