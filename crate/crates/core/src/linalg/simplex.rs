//! Dense two-phase primal simplex with Bland's rule.
//!
//! With an exact scalar the returned vertex satisfies every constraint
//! exactly. Bland's rule guarantees termination on the degenerate cone
//! problems used by the facial-set search.

use crate::error::{Error, Result};
use crate::linalg::matrix::dot;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `maximize objective·x` subject to `constraints x (sense) rhs`, with
/// `x_j >= 0` unless `free[j]`.
#[derive(Debug, Clone)]
pub struct LpProblem<T> {
    pub constraints: Matrix<T>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<T>,
    pub objective: Vec<T>,
    pub free: Vec<bool>,
}

impl<T: Scalar> LpProblem<T> {
    /// A problem with all variables non-negative.
    pub fn new(constraints: Matrix<T>, senses: Vec<Sense>, rhs: Vec<T>, objective: Vec<T>) -> Self {
        let n = constraints.ncols();
        Self {
            constraints,
            senses,
            rhs,
            objective,
            free: vec![false; n],
        }
    }

    pub fn with_free(mut self, free: Vec<bool>) -> Self {
        self.free = free;
        self
    }

    fn validate(&self) -> Result<()> {
        let (m, n) = (self.constraints.nrows(), self.constraints.ncols());
        if self.senses.len() != m || self.rhs.len() != m {
            return Err(Error::domain(format!(
                "LP has {m} constraint rows but {} senses and {} right-hand sides",
                self.senses.len(),
                self.rhs.len()
            )));
        }
        if self.objective.len() != n || self.free.len() != n {
            return Err(Error::domain(format!(
                "LP has {n} variables but objective length {} and free-flag length {}",
                self.objective.len(),
                self.free.len()
            )));
        }
        Ok(())
    }

    /// Whether `x` satisfies every constraint and sign restriction.
    pub fn is_feasible(&self, x: &[T]) -> bool {
        let lhs = self.constraints.mul_vec(x);
        let rows_ok = lhs.iter().zip(&self.rhs).zip(&self.senses).all(|((l, r), s)| {
            let diff = l.clone() - r.clone();
            match s {
                Sense::Le => !is_positive(&diff),
                Sense::Ge => !is_positive(&-diff),
                Sense::Eq => diff.is_negligible(),
            }
        });
        let signs_ok = x
            .iter()
            .zip(&self.free)
            .all(|(v, &f)| f || !is_positive(&-v.clone()));
        rows_ok && signs_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Primal vertex; meaningful only when optimal.
    pub x: Vec<T>,
    pub objective: T,
}

fn is_positive<T: Scalar>(v: &T) -> bool {
    v.is_positive() && !v.is_negligible()
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = T::one() / self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        self.rhs[r] = self.rhs[r].clone() * inv;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for (v, p) in self.rows[i].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v = v.clone() - f.clone() * p.clone();
                }
            }
            self.rows[i][c] = T::zero();
            self.rhs[i] = self.rhs[i].clone() - f * prhs.clone();
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost·x` over the columns flagged in `allowed`.
    fn optimize(&mut self, cost: &[T], allowed: &[bool]) -> Outcome {
        loop {
            let basic_cost: Vec<T> = self.basis.iter().map(|&b| cost[b].clone()).collect();
            let entering = (0..cost.len()).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let column: Vec<T> = self.rows.iter().map(|r| r[j].clone()).collect();
                is_positive(&(cost[j].clone() - dot(&basic_cost, &column)))
            });
            let Some(j) = entering else {
                return Outcome::Optimal;
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if !is_positive(a) {
                    continue;
                }
                let ratio = self.rhs[i].clone() / a.clone();
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Outcome::Unbounded;
            };
            self.pivot(r, j);
        }
    }
}

/// Solves the LP exactly (for exact scalars).
pub fn solve_lp<T: Scalar>(prob: &LpProblem<T>) -> Result<LpSolution<T>> {
    prob.validate()?;
    let (m, n) = (prob.constraints.nrows(), prob.constraints.ncols());

    // Structural columns: one per variable, plus a negative copy for free ones.
    let mut structural: Vec<(usize, bool)> = Vec::new();
    for j in 0..n {
        structural.push((j, false));
        if prob.free[j] {
            structural.push((j, true));
        }
    }
    let ns = structural.len();

    let mut rows: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut senses = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<T> = structural
            .iter()
            .map(|&(j, neg)| {
                let v = prob.constraints[(i, j)].clone();
                if neg {
                    -v
                } else {
                    v
                }
            })
            .collect();
        let mut b = prob.rhs[i].clone();
        let mut s = prob.senses[i];
        if b.is_negative() {
            row.iter_mut().for_each(|v| *v = -v.clone());
            b = -b;
            s = match s {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        rows.push(row);
        rhs.push(b);
        senses.push(s);
    }

    let n_slack = senses.iter().filter(|s| **s != Sense::Eq).count();
    let n_art = senses.iter().filter(|s| **s != Sense::Le).count();
    let total = ns + n_slack + n_art;
    let mut basis = vec![0; m];
    let mut slack_col = ns;
    let mut art_col = ns + n_slack;
    for i in 0..m {
        rows[i].resize(total, T::zero());
        match senses[i] {
            Sense::Le => {
                rows[i][slack_col] = T::one();
                basis[i] = slack_col;
                slack_col += 1;
            }
            Sense::Ge => {
                rows[i][slack_col] = -T::one();
                slack_col += 1;
                rows[i][art_col] = T::one();
                basis[i] = art_col;
                art_col += 1;
            }
            Sense::Eq => {
                rows[i][art_col] = T::one();
                basis[i] = art_col;
                art_col += 1;
            }
        }
    }
    let is_art = |j: usize| j >= ns + n_slack;
    let mut tab = Tableau { rows, rhs, basis };

    // Phase 1: drive the artificials to zero.
    if n_art > 0 {
        let cost: Vec<T> = (0..total)
            .map(|j| if is_art(j) { -T::one() } else { T::zero() })
            .collect();
        let allowed = vec![true; total];
        tab.optimize(&cost, &allowed);
        let infeasibility = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(b, _)| is_art(**b))
            .fold(T::zero(), |acc, (_, v)| acc + v.clone());
        if is_positive(&infeasibility) {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![T::zero(); n],
                objective: T::zero(),
            });
        }
        // Pivot remaining (zero-valued) artificials out, dropping redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if is_art(tab.basis[i]) {
                match (0..ns + n_slack).find(|&j| !tab.rows[i][j].is_negligible()) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // Phase 2.
    let mut cost = vec![T::zero(); total];
    for (k, &(j, neg)) in structural.iter().enumerate() {
        cost[k] = if neg {
            -prob.objective[j].clone()
        } else {
            prob.objective[j].clone()
        };
    }
    let allowed: Vec<bool> = (0..total).map(|j| !is_art(j)).collect();
    if let Outcome::Unbounded = tab.optimize(&cost, &allowed) {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: vec![T::zero(); n],
            objective: T::zero(),
        });
    }

    let mut x = vec![T::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < ns {
            let (j, neg) = structural[b];
            let v = tab.rhs[i].clone();
            x[j] = if neg { x[j].clone() - v } else { x[j].clone() + v };
        }
    }
    let objective = dot(&prob.objective, &x);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
    })
}
