//! Table readers.
//!
//! Long CSV: header `V1,...,Vm,count`, one row per cell with 0-based level
//! indices, absent cells counted as zero. A header name may carry its level
//! count as `X:3`; otherwise it is one more than the largest level seen.
//!
//! Dense JSON: `{"variables":[{"name":"X","levels":2},...],"counts":[...]}`
//! in linear rank order, with an optional `"model"` formula.

use crate::error::{Error, Result};
use crate::table::{cell_rank, Table, VariableSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableInput {
    pub table: Table,
    /// Formula stored alongside the table, if any.
    pub model: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DenseTable {
    variables: Vec<VariableSpec>,
    counts: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<String>,
}

pub fn read_table(path: &Path) -> Result<TableInput> {
    let text = std::fs::read_to_string(path)?;
    let is_json = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        parse_dense_json(&text)
    } else {
        parse_long_csv(&text)
    }
}

pub fn parse_dense_json(text: &str) -> Result<TableInput> {
    let dense: DenseTable = serde_json::from_str(text).map_err(|e| {
        Error::parse(e.line(), e.column(), e.to_string())
    })?;
    Ok(TableInput {
        table: Table::new(dense.variables, dense.counts)?,
        model: dense.model,
    })
}

pub fn to_dense_json(table: &Table, model: Option<&str>) -> Result<String> {
    let dense = DenseTable {
        variables: table.variables().to_vec(),
        counts: table.counts().to_vec(),
        model: model.map(str::to_string),
    };
    Ok(serde_json::to_string_pretty(&dense)?)
}

fn parse_header_field(field: &str, column: usize) -> Result<(String, Option<usize>)> {
    let field = field.trim();
    match field.split_once(':') {
        Some((name, levels)) => {
            let levels: usize = levels
                .trim()
                .parse()
                .map_err(|_| Error::parse(1, column, format!("bad level count in {field:?}")))?;
            Ok((name.trim().to_string(), Some(levels)))
        }
        None => Ok((field.to_string(), None)),
    }
}

pub fn parse_long_csv(text: &str) -> Result<TableInput> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(1, 1, e.to_string()))?
        .clone();
    if header.len() < 2 {
        return Err(Error::parse(1, 1, "need at least one variable column and a count column"));
    }
    let m = header.len() - 1;
    if !header[m].trim().eq_ignore_ascii_case("count") {
        return Err(Error::parse(1, m + 1, "last column must be named \"count\""));
    }
    let mut names = Vec::with_capacity(m);
    let mut declared = Vec::with_capacity(m);
    for j in 0..m {
        let (name, levels) = parse_header_field(&header[j], j + 1)?;
        names.push(name);
        declared.push(levels);
    }

    let mut rows: Vec<(usize, Vec<usize>, u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, 1, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != m + 1 {
            return Err(Error::parse(
                line,
                record.len().min(m + 1),
                format!("expected {} fields, found {}", m + 1, record.len()),
            ));
        }
        let mut digits = Vec::with_capacity(m);
        for j in 0..m {
            let d: usize = record[j]
                .parse()
                .map_err(|_| Error::parse(line, j + 1, format!("bad level {:?}", &record[j])))?;
            if let Some(l) = declared[j] {
                if d >= l {
                    return Err(Error::parse(
                        line,
                        j + 1,
                        format!("level {d} out of range for {} levels", l),
                    ));
                }
            }
            digits.push(d);
        }
        let count: u64 = record[m]
            .parse()
            .map_err(|_| Error::parse(line, m + 1, format!("bad count {:?}", &record[m])))?;
        rows.push((line, digits, count));
    }

    let levels: Vec<usize> = (0..m)
        .map(|j| {
            declared[j].unwrap_or_else(|| rows.iter().map(|r| r.1[j] + 1).max().unwrap_or(0))
        })
        .collect();
    let variables: Vec<VariableSpec> = names
        .into_iter()
        .zip(&levels)
        .map(|(n, &l)| VariableSpec::new(n, l))
        .collect();
    crate::table::validate_variables(&variables)?;
    let n: usize = levels.iter().product();
    let mut counts = vec![0u64; n];
    let mut seen = vec![false; n];
    for (line, digits, count) in rows {
        let i = cell_rank(&digits, &levels)? - 1;
        if seen[i] {
            return Err(Error::parse(line, 1, "cell listed twice"));
        }
        seen[i] = true;
        counts[i] = count;
    }
    Ok(TableInput {
        table: Table::new(variables, counts)?,
        model: None,
    })
}
