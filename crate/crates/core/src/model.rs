//! Log-linear model terms and the corner-point design matrix.

use crate::error::{Error, Result};
use crate::linalg::{exact_rank, Matrix};
use crate::table::VariableSpec;
use crate::Rational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// One parameter: a variable subset with a nonzero level for each member.
///
/// `variables` is sorted by table position and `levels[k]` belongs to
/// `variables[k]`. The intercept has both empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelTerm {
    pub variables: Vec<usize>,
    pub levels: Vec<usize>,
}

impl ModelTerm {
    pub fn intercept() -> Self {
        Self {
            variables: Vec::new(),
            levels: Vec::new(),
        }
    }

    pub fn new(variables: Vec<usize>, levels: Vec<usize>) -> Result<Self> {
        if variables.len() != levels.len() {
            return Err(Error::domain("term needs one level per variable"));
        }
        if variables.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("term variables must be strictly increasing"));
        }
        if levels.contains(&0) {
            return Err(Error::domain(
                "level 0 is the corner-point baseline and carries no parameter",
            ));
        }
        Ok(Self { variables, levels })
    }

    pub fn is_intercept(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn order(&self) -> usize {
        self.variables.len()
    }

    /// Whether this term enters `log mu` at the cell with these digits.
    pub fn is_active(&self, digits: &[usize]) -> bool {
        self.variables
            .iter()
            .zip(&self.levels)
            .all(|(&v, &l)| digits[v] == l)
    }

    /// Renders as `θ`, `θ^X`, `θ^XY_21`. Subscripts are left out when every
    /// variable in the term is binary.
    pub fn label(&self, variables: &[VariableSpec]) -> String {
        if self.is_intercept() {
            return "θ".to_string();
        }
        let multi_char = variables.iter().any(|v| v.name.chars().count() > 1);
        let names: Vec<&str> = self
            .variables
            .iter()
            .map(|&v| variables[v].name.as_str())
            .collect();
        let sup = names.join(if multi_char { ":" } else { "" });
        let binary = self.variables.iter().all(|&v| variables[v].levels == 2);
        if binary {
            return format!("θ^{sup}");
        }
        let wide = self.levels.iter().any(|&l| l >= 10);
        let subs: Vec<String> = self.levels.iter().map(|l| l.to_string()).collect();
        format!("θ^{sup}_{}", subs.join(if wide { "," } else { "" }))
    }
}

/// The ordered set `E` of variable subsets that carry parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub formula: String,
    pub subsets: Vec<Vec<usize>>,
}

impl ModelSpec {
    pub fn includes_intercept(&self) -> bool {
        self.subsets.iter().any(|s| s.is_empty())
    }

    /// Downward closed: every subset of an included subset is included.
    pub fn is_hierarchical(&self) -> bool {
        let set: HashSet<&Vec<usize>> = self.subsets.iter().collect();
        self.subsets.iter().all(|s| {
            (0..(1usize << s.len())).all(|mask| {
                let sub: Vec<usize> = (0..s.len())
                    .filter(|k| mask & (1 << k) != 0)
                    .map(|k| s[k])
                    .collect();
                set.contains(&sub)
            })
        })
    }

    /// Downward closure of generators, in generator order; each generator
    /// contributes its new subsets in binary (Yates) order.
    pub fn hierarchical(generators: &[Vec<usize>], intercept: bool, formula: String) -> Self {
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        for g in generators {
            let mut g = g.clone();
            g.sort_unstable();
            for mask in 0..(1usize << g.len()) {
                let sub: Vec<usize> = (0..g.len())
                    .filter(|k| mask & (1 << k) != 0)
                    .map(|k| g[k])
                    .collect();
                if sub.is_empty() && !intercept {
                    continue;
                }
                if seen.insert(sub.clone()) {
                    subsets.push(sub);
                }
            }
        }
        Self { formula, subsets }
    }

    pub fn saturated(n_variables: usize) -> Self {
        let all: Vec<usize> = (0..n_variables).collect();
        Self::hierarchical(&[all], true, "saturated".to_string())
    }
}

/// Parses a model formula with the intercept included.
///
/// Accepted forms:
/// * `(XY,XZ,YZ)`: hierarchical generators, expanded downward.
/// * `[X, Y, XY]`: explicit subsets, kept in the given order.
/// * `saturated`, `main+2way`.
///
/// Multi-letter variable names are joined with `:` or `*` inside a term.
pub fn parse_model_formula(text: &str, variables: &[VariableSpec]) -> Result<ModelSpec> {
    parse_model_formula_with(text, variables, true)
}

pub fn parse_model_formula_with(
    text: &str,
    variables: &[VariableSpec],
    intercept: bool,
) -> Result<ModelSpec> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::Formula("empty formula".into()));
    }
    let m = variables.len();
    match trimmed.to_ascii_lowercase().as_str() {
        "saturated" => {
            let mut spec = ModelSpec::saturated(m);
            if !intercept {
                spec.subsets.retain(|s| !s.is_empty());
            }
            return Ok(spec);
        }
        "main+2way" | "main + 2way" => {
            let mut subsets = Vec::new();
            if intercept {
                subsets.push(Vec::new());
            }
            subsets.extend((0..m).map(|j| vec![j]));
            for a in 0..m {
                for b in a + 1..m {
                    subsets.push(vec![a, b]);
                }
            }
            return Ok(ModelSpec {
                formula: trimmed.to_string(),
                subsets,
            });
        }
        _ => {}
    }

    let (open, close) = match trimmed.chars().next() {
        Some('(') => ('(', ')'),
        Some('[') => ('[', ']'),
        _ => {
            return Err(Error::Formula(format!(
                "formula must be (generators), [terms], saturated or main+2way; got {trimmed:?}"
            )))
        }
    };
    let inner = trimmed
        .strip_prefix(open)
        .and_then(|s| s.strip_suffix(close))
        .ok_or_else(|| Error::Formula(format!("unbalanced {open}{close} in {trimmed:?}")))?;
    let tokens: Vec<&str> = inner
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.is_empty() {
        return Err(Error::Formula("formula lists no terms".into()));
    }
    let mut parsed: Vec<Vec<usize>> = Vec::new();
    for tok in tokens {
        let subset = parse_subset(tok, variables)?;
        if parsed.contains(&subset) {
            return Err(Error::Formula(format!("duplicate term {tok}")));
        }
        parsed.push(subset);
    }

    if open == '(' {
        return Ok(ModelSpec::hierarchical(
            &parsed,
            intercept,
            trimmed.to_string(),
        ));
    }
    let mut subsets = Vec::new();
    if intercept && !parsed.iter().any(|s| s.is_empty()) {
        subsets.push(Vec::new());
    }
    subsets.extend(parsed);
    Ok(ModelSpec {
        formula: trimmed.to_string(),
        subsets,
    })
}

fn parse_subset(token: &str, variables: &[VariableSpec]) -> Result<Vec<usize>> {
    if token == "1" {
        return Ok(Vec::new());
    }
    let lookup = |name: &str| -> Result<usize> {
        variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::Formula(format!("unknown variable {name:?} in term {token:?}")))
    };
    let names: Vec<String> = if token.contains(':') || token.contains('*') {
        token
            .split([':', '*'])
            .map(|s| s.trim().to_string())
            .collect()
    } else if variables.iter().all(|v| v.name.chars().count() == 1) {
        token.chars().map(|c| c.to_string()).collect()
    } else {
        vec![token.to_string()]
    };
    let mut idx = names
        .iter()
        .map(|n| lookup(n))
        .collect::<Result<Vec<_>>>()?;
    idx.sort_unstable();
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Formula(format!("repeated variable in term {token:?}")));
    }
    Ok(idx)
}

/// One term per combination of nonzero levels of each subset, first
/// variable varying fastest.
pub fn enumerate_terms(model: &ModelSpec, variables: &[VariableSpec]) -> Vec<ModelTerm> {
    let mut terms = Vec::new();
    for subset in &model.subsets {
        let radices: Vec<usize> = subset.iter().map(|&v| variables[v].levels - 1).collect();
        let count: usize = radices.iter().product();
        for k in 0..count {
            let mut rest = k;
            let levels = radices
                .iter()
                .map(|&r| {
                    let d = rest % r;
                    rest /= r;
                    d + 1
                })
                .collect();
            terms.push(ModelTerm {
                variables: subset.clone(),
                levels,
            });
        }
    }
    terms
}

/// `p = sum over E of prod (l_j - 1)`.
pub fn parameter_count(model: &ModelSpec, variables: &[VariableSpec]) -> usize {
    model
        .subsets
        .iter()
        .map(|s| s.iter().map(|&v| variables[v].levels - 1).product::<usize>())
        .sum()
}

/// The 0/1 matrix `A` with `log mu = A theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub matrix: Matrix<Rational>,
    pub terms: Vec<ModelTerm>,
    pub variables: Vec<VariableSpec>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_params(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn labels(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.label(&self.variables)).collect()
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        self.matrix.row(i)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.matrix.map(|v| if v.is_zero() { 0.0 } else { 1.0 })
    }

    /// Entries as 0/1 integers for reporting.
    pub fn to_bits(&self) -> Vec<Vec<u8>> {
        self.matrix
            .rows()
            .map(|r| r.iter().map(|v| u8::from(!v.is_zero())).collect())
            .collect()
    }
}

/// Builds `A` and verifies it has full column rank.
pub fn build_design_matrix(model: &ModelSpec, variables: &[VariableSpec]) -> Result<DesignMatrix> {
    crate::table::validate_variables(variables)?;
    for s in &model.subsets {
        if s.iter().any(|&v| v >= variables.len()) {
            return Err(Error::domain("model refers to a variable the table lacks"));
        }
    }
    let terms = enumerate_terms(model, variables);
    let levels: Vec<usize> = variables.iter().map(|v| v.levels).collect();
    let n: usize = levels.iter().product();
    let mut matrix = Matrix::zeros(n, terms.len());
    for i in 0..n {
        let digits = crate::table::cell_digits(i + 1, &levels)?;
        for (s, term) in terms.iter().enumerate() {
            if term.is_active(&digits) {
                matrix[(i, s)] = Rational::one();
            }
        }
    }
    let rank = exact_rank(&matrix);
    if rank != terms.len() {
        return Err(Error::domain(format!(
            "design matrix has rank {rank} < {} columns; the model is over-parametrised",
            terms.len()
        )));
    }
    Ok(DesignMatrix {
        matrix,
        terms,
        variables: variables.to_vec(),
    })
}
