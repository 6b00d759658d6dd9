//! Esoteric constraints: relations among parameters that the likelihood
//! imposes along a redundant direction.
//!
//! For a nullspace direction `alpha` of `A_+`, the directional score is
//! `alpha^T U(theta) = -sum_{i in L_0} (A_0 alpha)_i mu_i(theta)`, because
//! `A_+ alpha = 0` and `y_i = 0` on `L_0`. It can vanish at finite `theta`
//! only when `A_0 alpha` has entries of both signs.

use crate::error::{Error, Result};
use crate::linalg::{dot, exact_rank, Matrix};
use crate::model::DesignMatrix;
use crate::redundancy::{render_linear, DerivativeStructure};
use crate::table::Table;
use crate::Rational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionKind {
    /// `A_0 alpha = 0`: the directional score vanishes identically.
    Vacuous,
    /// Mixed signs: the score vanishes on a hypersurface of finite `theta`.
    Constraint,
    /// Nonzero and one-signed: the likelihood keeps increasing towards an
    /// infinite `theta`.
    Divergent,
}

impl DirectionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DirectionKind::Vacuous => "vacuous",
            DirectionKind::Constraint => "constraint",
            DirectionKind::Divergent => "divergent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionVerdict {
    pub alpha: Vec<Rational>,
    /// `(cell, (A alpha)_cell)` for every zero cell, in table order.
    pub coeffs: Vec<(usize, Rational)>,
    pub kind: DirectionKind,
}

pub fn classify_signs<'a>(values: impl IntoIterator<Item = &'a Rational>) -> DirectionKind {
    let (mut pos, mut neg) = (false, false);
    for v in values {
        pos |= v.is_positive();
        neg |= v.is_negative();
    }
    match (pos, neg) {
        (false, false) => DirectionKind::Vacuous,
        (true, true) => DirectionKind::Constraint,
        _ => DirectionKind::Divergent,
    }
}

/// Classifies a nullspace direction by the sign pattern of `A_0 alpha`.
pub fn score_form(alpha: &[Rational], a: &DesignMatrix, table: &Table) -> Result<DirectionVerdict> {
    if alpha.len() != a.n_params() {
        return Err(Error::domain("direction length differs from parameter count"));
    }
    for i in table.positive_cells() {
        if !dot(a.row(i), alpha).is_zero() {
            return Err(Error::domain(format!(
                "direction is not in the nullspace of A_+ (cell {})",
                i + 1
            )));
        }
    }
    let coeffs: Vec<(usize, Rational)> = table
        .zero_cells()
        .into_iter()
        .map(|i| (i, dot(a.row(i), alpha)))
        .collect();
    let kind = classify_signs(coeffs.iter().map(|(_, c)| c));
    Ok(DirectionVerdict {
        alpha: alpha.to_vec(),
        coeffs,
        kind,
    })
}

/// `alpha^T A^T (y - mu(theta))` evaluated numerically over all cells.
pub fn directional_score(alpha: &[Rational], a: &DesignMatrix, table: &Table, theta: &[f64]) -> f64 {
    let af = a.to_f64();
    let al: Vec<f64> = alpha.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    (0..a.n_rows())
        .map(|i| {
            let eta: f64 = af.row(i).iter().zip(theta).map(|(x, t)| x * t).sum();
            let dir: f64 = af.row(i).iter().zip(&al).map(|(x, t)| x * t).sum();
            dir * (table.counts()[i] as f64 - eta.exp())
        })
        .sum()
}

/// The reduced form `-sum_{L_0} (A_0 alpha)_i exp(A_(i) theta)`.
pub fn reduced_directional_score(verdict: &DirectionVerdict, a: &DesignMatrix, theta: &[f64]) -> f64 {
    let af = a.to_f64();
    -verdict
        .coeffs
        .iter()
        .map(|(i, c)| {
            let eta: f64 = af.row(*i).iter().zip(theta).map(|(x, t)| x * t).sum();
            c.to_f64().unwrap_or(f64::NAN) * eta.exp()
        })
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpTerm {
    #[serde(with = "crate::serde_rational")]
    pub coefficient: Rational,
    /// 0-based cell index.
    pub cell: usize,
}

/// `sum_k c_k exp(A_(cell_k) theta) = 0`, optionally simplified to
/// `g^T theta = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EsotericConstraint {
    pub terms: Vec<ExpTerm>,
    pub linear_form: Option<Vec<Rational>>,
    pub source_alpha: Vec<Rational>,
}

impl EsotericConstraint {
    /// e.g. `-μ(000) + μ(110) = 0`.
    pub fn exp_display(&self, table: &Table) -> String {
        let labels: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("μ({})", table.cell_label(t.cell)))
            .collect();
        let coeffs: Vec<Rational> = self.terms.iter().map(|t| t.coefficient.clone()).collect();
        format!("{} = 0", render_linear(&coeffs, &labels))
    }

    /// e.g. `θ^X + θ^Y + θ^XY = 0`.
    pub fn linear_display(&self, a: &DesignMatrix) -> Option<String> {
        self.linear_form
            .as_ref()
            .map(|g| format!("{} = 0", render_linear(g, &a.labels())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DerivedConstraint {
    Constraint(EsotericConstraint),
    /// Terms cancel identically (zero cells with equal design rows).
    Vacuous,
}

/// Builds the constraint `alpha^T U(theta) = 0` for a mixed-sign direction.
pub fn derive_constraint(verdict: &DirectionVerdict, a: &DesignMatrix) -> Result<DerivedConstraint> {
    if verdict.kind != DirectionKind::Constraint {
        return Err(Error::domain(format!(
            "direction of kind {:?} carries no esoteric constraint",
            verdict.kind
        )));
    }
    // Merge cells that share a design row: their exponentials coincide.
    let mut merged: Vec<ExpTerm> = Vec::new();
    for (cell, c) in &verdict.coeffs {
        if c.is_zero() {
            continue;
        }
        let coefficient = -c.clone();
        match merged.iter_mut().find(|t| a.row(t.cell) == a.row(*cell)) {
            Some(t) => t.coefficient = t.coefficient.clone() + coefficient,
            None => merged.push(ExpTerm {
                coefficient,
                cell: *cell,
            }),
        }
    }
    merged.retain(|t| !t.coefficient.is_zero());
    if classify_signs(merged.iter().map(|t| &t.coefficient)) != DirectionKind::Constraint {
        return Ok(DerivedConstraint::Vacuous);
    }
    let linear_form = match merged.as_slice() {
        [s, t] if s.coefficient == -t.coefficient.clone() => {
            let (pos, neg) = if s.coefficient.is_positive() { (s, t) } else { (t, s) };
            let g: Vec<Rational> = a
                .row(pos.cell)
                .iter()
                .zip(a.row(neg.cell))
                .map(|(x, y)| x - y)
                .collect();
            Some(g)
        }
        _ => None,
    };
    Ok(DerivedConstraint::Constraint(EsotericConstraint {
        terms: merged,
        linear_form,
        source_alpha: verdict.alpha.clone(),
    }))
}

/// Appends each linear constraint row to `A_+` and reports whether the
/// augmented system reaches full column rank, with its rank.
pub fn augmented_identifiability(
    constraints: &[EsotericConstraint],
    ds: &DerivativeStructure,
) -> (bool, usize) {
    let mut m: Matrix<Rational> = ds.a_plus.clone();
    for g in constraints.iter().filter_map(|c| c.linear_form.as_ref()) {
        m.push_row(g).expect("constraint has parameter length");
    }
    let rank = exact_rank(&m);
    (rank == ds.n_params(), rank)
}

/// Log-ratio form check: for a two-term linear constraint,
/// `g^T theta` equals `log mu_pos - log mu_neg`.
pub fn linear_residual(constraint: &EsotericConstraint, theta: &[f64]) -> Option<f64> {
    constraint.linear_form.as_ref().map(|g| {
        g.iter()
            .zip(theta)
            .map(|(c, t)| c.to_f64().unwrap_or(f64::NAN) * t)
            .sum()
    })
}
