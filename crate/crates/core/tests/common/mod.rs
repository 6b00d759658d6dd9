#![allow(dead_code)]

use loglin_core::linalg::{solve_lp, LpProblem, LpStatus, Matrix, Sense};
use loglin_core::model::{build_design_matrix, parse_model_formula, DesignMatrix};
use loglin_core::table::{cell_digits, default_variables};
use loglin_core::Rational;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use std::path::PathBuf;
use std::time::{Duration, Instant};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

pub fn ints(v: &[BigInt]) -> Vec<i64> {
    v.iter().map(|x| x.to_i64().expect("small entry")).collect()
}

pub fn design(levels: &[usize], formula: &str) -> DesignMatrix {
    let vars = default_variables(levels);
    build_design_matrix(&parse_model_formula(formula, &vars).unwrap(), &vars).unwrap()
}

pub fn matrix_rows(rows: &[&[i64]]) -> Matrix<Rational> {
    Matrix::from_i64_rows(rows)
}

/// Collects failed checks and prints the one-line verdict.
pub struct Verdict {
    id: usize,
    title: &'static str,
    start: Instant,
    pub failures: Vec<String>,
    /// Stated claims shown false by an independently checked counterexample.
    pub refuted: Vec<String>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn new(id: usize, title: &'static str) -> Self {
        Verdict {
            id,
            title,
            start: Instant::now(),
            failures: Vec::new(),
            refuted: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    pub fn within(&mut self, limit: Duration) {
        let t = self.elapsed();
        self.check(t < limit, format!("runtime {t:?} exceeds {limit:?}"));
    }

    /// Prints the verdict and returns whether it was a PASS. A refuted claim
    /// prints FAIL but only unexplained failures panic.
    pub fn finish(self) -> bool {
        let ok = self.failures.is_empty() && self.refuted.is_empty();
        let status = if ok { "PASS" } else { "FAIL" };
        let mut detail = self.notes.join("; ");
        if !self.refuted.is_empty() {
            detail = format!(
                "claim refuted on {} instance(s), e.g. {}; {detail}",
                self.refuted.len(),
                self.refuted[0]
            );
        }
        if !self.failures.is_empty() {
            detail = format!("{} failure(s): {}", self.failures.len(), self.failures.join(" | "));
        }
        println!(
            "[acceptance {}] {status} {} ({:.2?}) {detail}",
            self.id,
            self.title,
            self.start.elapsed()
        );
        assert!(self.failures.is_empty(), "acceptance {} failed", self.id);
        ok
    }
}

/// Iterative proportional fitting of a hierarchical model given by its
/// generators. `structural` cells start (and stay) at zero.
pub fn ipf(levels: &[usize], counts: &[f64], generators: &[Vec<usize>], structural: &[bool]) -> Vec<f64> {
    let n = counts.len();
    let digits: Vec<Vec<usize>> = (0..n).map(|i| cell_digits(i + 1, levels).unwrap()).collect();
    let key = |i: usize, g: &[usize]| -> Vec<usize> { g.iter().map(|&v| digits[i][v]).collect() };
    let mut m: Vec<f64> = structural.iter().map(|&s| if s { 0.0 } else { 1.0 }).collect();
    for _ in 0..100_000 {
        let mut change: f64 = 0.0;
        for g in generators {
            let mut obs = std::collections::HashMap::<Vec<usize>, f64>::new();
            let mut fit = std::collections::HashMap::<Vec<usize>, f64>::new();
            for i in 0..n {
                *obs.entry(key(i, g)).or_default() += counts[i];
                *fit.entry(key(i, g)).or_default() += m[i];
            }
            for (i, mi) in m.iter_mut().enumerate() {
                let k = key(i, g);
                let f = fit[&k];
                if f > 0.0 {
                    let new = *mi * obs[&k] / f;
                    change = change.max((new - *mi).abs());
                    *mi = new;
                }
            }
        }
        if change < 1e-13 {
            break;
        }
    }
    m
}

/// Co-facial set from one LP over the full parameter space:
/// maximize sum s_i, A_+ z = 0, A_0 z >= s, 0 <= s <= 1. Returns 0-based
/// cells with s_i = 1 and the optimal value.
pub fn cofacial_oracle(a: &DesignMatrix, counts: &[u64]) -> (Vec<usize>, Rational) {
    let p = a.n_params();
    let zeros: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] == 0).collect();
    let nv = p + zeros.len();
    let mut rows = Vec::new();
    let mut senses = Vec::new();
    let mut rhs = Vec::new();
    for i in (0..counts.len()).filter(|&i| counts[i] > 0) {
        let mut r = vec![Rational::zero(); nv];
        r[..p].clone_from_slice(a.row(i));
        rows.push(r);
        senses.push(Sense::Eq);
        rhs.push(Rational::zero());
    }
    for (k, &i) in zeros.iter().enumerate() {
        let mut r = vec![Rational::zero(); nv];
        r[..p].clone_from_slice(a.row(i));
        r[p + k] = -Rational::one();
        rows.push(r);
        senses.push(Sense::Ge);
        rhs.push(Rational::zero());
        let mut b = vec![Rational::zero(); nv];
        b[p + k] = Rational::one();
        rows.push(b);
        senses.push(Sense::Le);
        rhs.push(Rational::one());
    }
    let mut obj = vec![Rational::zero(); nv];
    obj[p..].iter_mut().for_each(|c| *c = Rational::one());
    let mut free = vec![false; nv];
    free[..p].iter_mut().for_each(|f| *f = true);
    let prob = LpProblem::new(Matrix::from_rows(rows, nv).unwrap(), senses, rhs, obj).with_free(free);
    let sol = solve_lp(&prob).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    let cells = zeros
        .iter()
        .enumerate()
        .filter(|(k, _)| sol.x[p + k].is_one())
        .map(|(_, &i)| i)
        .collect();
    (cells, sol.objective)
}

fn names(m: usize) -> Vec<String> {
    default_variables(&vec![2; m]).into_iter().map(|v| v.name).collect()
}

fn subset_name(s: &[usize], names: &[String]) -> String {
    s.iter().map(|&v| names[v].as_str()).collect()
}

fn nonempty_subsets(m: usize) -> Vec<Vec<usize>> {
    (1..(1usize << m))
        .map(|mask| (0..m).filter(|j| mask & (1 << j) != 0).collect())
        .collect()
}

/// Random hierarchical formula over `m` variables, e.g. `(XY,Z)`.
pub fn random_hierarchical<R: Rng>(rng: &mut R, m: usize) -> (String, Vec<Vec<usize>>) {
    let all = nonempty_subsets(m);
    let mut gens: Vec<Vec<usize>> = all.iter().filter(|_| rng.gen_bool(0.35)).cloned().collect();
    if gens.is_empty() {
        gens.push(all.choose(rng).unwrap().clone());
    }
    let names = names(m);
    let body: Vec<String> = gens.iter().map(|g| subset_name(g, &names)).collect();
    (format!("({})", body.join(",")), gens)
}

/// Random explicit term list, not necessarily hierarchical.
pub fn random_explicit<R: Rng>(rng: &mut R, m: usize) -> String {
    let mut all = nonempty_subsets(m);
    all.shuffle(rng);
    let k = rng.gen_range(1..=all.len());
    let names = names(m);
    let body: Vec<String> = all[..k].iter().map(|g| subset_name(g, &names)).collect();
    format!("[{}]", body.join(","))
}

pub fn random_levels<R: Rng>(rng: &mut R, max_vars: usize, max_level: usize) -> Vec<usize> {
    let m = rng.gen_range(1..=max_vars);
    (0..m).map(|_| rng.gen_range(2..=max_level)).collect()
}

/// Positive counts with each cell zeroed with probability `zero_p`, keeping
/// at least one positive cell.
pub fn random_counts<R: Rng>(rng: &mut R, n: usize, zero_p: f64) -> Vec<u64> {
    let mut c: Vec<u64> = (0..n)
        .map(|_| if rng.gen_bool(zero_p) { 0 } else { rng.gen_range(1..=12) })
        .collect();
    if c.iter().all(|&v| v == 0) {
        let i = rng.gen_range(0..n);
        c[i] = rng.gen_range(1..=12);
    }
    c
}
