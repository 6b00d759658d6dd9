//! Contingency tables and the canonical cell ordering.
//!
//! Cells are ordered mixed-radix with the first variable varying fastest:
//! for digits `(i_1, ..., i_m)` with level counts `(l_1, ..., l_m)`,
//! `rank = 1 + i_1 + i_2 l_1 + i_3 l_1 l_2 + ...`. For a uniform `l^m`
//! table this is the usual base-`l` ordering.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub levels: usize,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, levels: usize) -> Self {
        Self {
            name: name.into(),
            levels,
        }
    }
}

/// A cell given both as per-variable levels and as its 1-based rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub digits: Vec<usize>,
    pub linear_rank: usize,
}

/// 1-based rank of a multi-index.
pub fn cell_rank(digits: &[usize], levels: &[usize]) -> Result<usize> {
    if digits.len() != levels.len() {
        return Err(Error::domain(format!(
            "cell has {} digits but the table has {} variables",
            digits.len(),
            levels.len()
        )));
    }
    let mut rank = 0;
    let mut stride = 1;
    for (j, (&d, &l)) in digits.iter().zip(levels).enumerate() {
        if d >= l {
            return Err(Error::domain(format!(
                "digit {d} of variable {} is outside 0..{l}",
                j + 1
            )));
        }
        rank += d * stride;
        stride *= l;
    }
    Ok(rank + 1)
}

/// Inverse of [`cell_rank`].
pub fn cell_digits(rank: usize, levels: &[usize]) -> Result<Vec<usize>> {
    let n: usize = levels.iter().product();
    if rank == 0 || rank > n {
        return Err(Error::domain(format!("cell rank {rank} is outside 1..={n}")));
    }
    let mut rest = rank - 1;
    Ok(levels
        .iter()
        .map(|&l| {
            let d = rest % l;
            rest /= l;
            d
        })
        .collect())
}

/// Renders digits as `201`, or `(2,10,1)` when some level needs two digits.
pub fn digits_label(digits: &[usize], levels: &[usize]) -> String {
    if levels.iter().all(|&l| l <= 10) {
        digits.iter().map(|d| d.to_string()).collect()
    } else {
        let parts: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// Observed counts over the full cross-classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    variables: Vec<VariableSpec>,
    counts: Vec<u64>,
}

impl Table {
    pub fn new(variables: Vec<VariableSpec>, counts: Vec<u64>) -> Result<Self> {
        validate_variables(&variables)?;
        let n: usize = variables.iter().map(|v| v.levels).product();
        if counts.len() != n {
            return Err(Error::domain(format!(
                "table has {n} cells but {} counts were given",
                counts.len()
            )));
        }
        Ok(Self { variables, counts })
    }

    /// A table of the given shape with named variables `X, Y, Z, ...`
    /// (or `V1, V2, ...` beyond three).
    pub fn with_shape(levels: &[usize], counts: Vec<u64>) -> Result<Self> {
        Self::new(default_variables(levels), counts)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn levels(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.levels).collect()
    }

    pub fn n_cells(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// 0-based indices of zero cells (`L_0`).
    pub fn zero_cells(&self) -> Vec<usize> {
        (0..self.counts.len()).filter(|&i| self.counts[i] == 0).collect()
    }

    /// 0-based indices of positive cells (`L_+`).
    pub fn positive_cells(&self) -> Vec<usize> {
        (0..self.counts.len()).filter(|&i| self.counts[i] > 0).collect()
    }

    pub fn cell(&self, index: usize) -> CellIndex {
        let levels = self.levels();
        CellIndex {
            digits: cell_digits(index + 1, &levels).expect("index within table"),
            linear_rank: index + 1,
        }
    }

    pub fn cell_label(&self, index: usize) -> String {
        let levels = self.levels();
        digits_label(&self.cell(index).digits, &levels)
    }

    /// Same shape, different counts.
    pub fn with_counts(&self, counts: Vec<u64>) -> Result<Self> {
        Self::new(self.variables.clone(), counts)
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }
}

pub(crate) fn validate_variables(variables: &[VariableSpec]) -> Result<()> {
    if variables.is_empty() {
        return Err(Error::domain("a table needs at least one variable"));
    }
    let mut seen = HashSet::new();
    for v in variables {
        if v.name.is_empty() {
            return Err(Error::domain("variable names must be non-empty"));
        }
        if v.levels < 2 {
            return Err(Error::domain(format!(
                "variable {} has {} levels; at least 2 are required",
                v.name, v.levels
            )));
        }
        if !seen.insert(v.name.as_str()) {
            return Err(Error::domain(format!("duplicate variable name {}", v.name)));
        }
    }
    Ok(())
}

pub fn default_variables(levels: &[usize]) -> Vec<VariableSpec> {
    let names: Vec<String> = if levels.len() <= 3 {
        ["X", "Y", "Z"][..levels.len()]
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else if levels.len() <= 26 {
        (0..levels.len())
            .map(|j| ((b'A' + j as u8) as char).to_string())
            .collect()
    } else {
        (1..=levels.len()).map(|j| format!("V{j}")).collect()
    };
    names
        .into_iter()
        .zip(levels)
        .map(|(n, &l)| VariableSpec::new(n, l))
        .collect()
}
