mod common;

use common::*;
use loglin_core::emle::{haberman_delta_check, mle_exists};
use loglin_core::esoteric::DirectionKind;
use loglin_core::fitting::{fit, log_likelihood, score, to_real};
use loglin_core::io::read_table;
use loglin_core::linalg::dot;
use loglin_core::model::{build_design_matrix, ModelSpec, ModelTerm};
use loglin_core::redundancy::{analyze_redundancy, nonestimable_parameters};
use loglin_core::report::{analyze_full, Analysis, AnalysisOptions, Classification};
use loglin_core::saturated::nonestimable_set_single_zero;
use loglin_core::table::{cell_digits, default_variables};
use loglin_core::{verify_theorem1, Rational, Table};
use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

const FIT_TOL: f64 = 1e-8;
const CONSTRAINT_TOL: f64 = 1e-6;
const GRADIENT_TOL: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-10;
const MARGIN_TOL: f64 = 1e-8;

fn fitted<'a>(an: &'a Analysis, name: &str) -> &'a loglin_core::FitResult64 {
    &an.fits.iter().find(|(n, _)| n == name).expect("fit present").1
}

fn rows_i64(m: &loglin_core::RationalMatrix) -> Vec<Vec<i64>> {
    m.rows()
        .map(|r| r.iter().map(|v| v.to_integer().try_into().unwrap()).collect())
        .collect()
}

fn alpha_vec(an: &Analysis) -> Vec<i64> {
    let first: Vec<_> = an.basis_verdicts[0].alpha.iter().map(|x| x.to_integer()).collect();
    ints(&first)
}

fn criterion_1_sparse_three_way() -> bool {
    let mut v = Verdict::new(1, "3x3x3 sparse table: redundancy, reduced model and facial set");
    let json = read_table(&fixture("sparse_3x3x3.json")).unwrap();
    let csv = read_table(&fixture("csv/sparse_3x3x3.csv")).unwrap();
    v.check(json.table.counts() == csv.table.counts(), "CSV and JSON tables differ");
    let formula = json.model.clone().unwrap();
    let an = analyze_full(&json.table, &formula, AnalysisOptions::default()).unwrap();
    let r = &an.report.redundancy;
    v.check(r.rank == 18, format!("rank {}", r.rank));
    v.check(r.deficiency == 1, format!("d {}", r.deficiency));
    let want_alpha = [1, 0, -1, -1, -1, -1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 0, 0];
    v.check(alpha_vec(&an) == want_alpha, format!("alpha {:?}", alpha_vec(&an)));
    let nonest: Vec<usize> = r.nonestimable_cells.iter().map(|c| c.index).collect();
    v.check(nonest == [1, 2, 15, 18, 19, 20], format!("nonestimable cells {nonest:?}"));
    let est: Vec<usize> = r.estimable_cells.iter().map(|c| c.index).collect();
    v.check(est.contains(&17) && est.contains(&25), "zero cells 17 and 25 should be estimable");
    let want_theta = [
        "θ^X_1", "θ + θ^X_2", "θ + θ^Y_1", "θ + θ^Y_2", "θ + θ^Z_1", "θ^Z_2", "θ^XY_11",
        "-θ + θ^XY_21", "θ^XY_12", "-θ + θ^XY_22", "-θ + θ^YZ_11", "-θ + θ^YZ_21", "θ^YZ_12",
        "θ^YZ_22", "θ^XZ_11", "-θ + θ^XZ_21", "θ^XZ_12", "θ^XZ_22",
    ];
    let got_theta: Vec<&str> = an.reduced.theta_prime.iter().map(|c| c.display.as_str()).collect();
    v.check(got_theta == want_theta, format!("theta' {got_theta:?}"));
    v.check(an.reduced.df == 3, format!("df {}", an.reduced.df));
    v.check(an.classification == Classification::RedundantNoMle, "classification");

    let e = &an.emle;
    let fc: Vec<usize> = e.co_facial_set.iter().map(|i| i + 1).collect();
    v.check(fc == [1, 2, 15, 18, 19, 20], format!("F^c {fc:?}"));
    v.check(
        e.a_star.nrows() == 21 && e.a_star.ncols() == 18,
        format!("A*_F is {}x{}", e.a_star.nrows(), e.a_star.ncols()),
    );
    v.check(e.df == 3, format!("facial df {}", e.df));

    // The same table under the hierarchical spelling orders terms differently.
    let h = analyze_full(&json.table, "(XY,XZ,YZ)", AnalysisOptions { fit: false, intercept: true }).unwrap();
    let by_label = |an: &Analysis| -> BTreeMap<String, i64> {
        an.design.labels().into_iter().zip(alpha_vec(an)).collect()
    };
    let (a1, a2) = (by_label(&an), by_label(&h));
    let negated: BTreeMap<String, i64> = a2.iter().map(|(k, x)| (k.clone(), -x)).collect();
    v.check(a1 == a2 || a1 == negated, "alpha differs under the hierarchical formula");
    v.within(Duration::from_secs(1));
    v.notes.push(format!("r = {}, d = {}, df = {}", r.rank, r.deficiency, an.reduced.df));
    v.finish()
}

fn criterion_2_divergent_two_cubed() -> bool {
    let mut v = Verdict::new(2, "2x2x2 divergent direction and reduced fits");
    let input = read_table(&fixture("divergent_2x2x2.json")).unwrap();
    let an = analyze_full(&input.table, &input.model.unwrap(), AnalysisOptions::default()).unwrap();
    let want_alpha = [1, -1, -1, 1, -1, 1, 1];
    v.check(alpha_vec(&an) == want_alpha, format!("alpha {:?}", alpha_vec(&an)));
    v.check(
        an.basis_verdicts[0].kind == DirectionKind::Divergent,
        format!("verdict {:?}", an.basis_verdicts[0].kind),
    );
    v.check(an.emle.co_facial_set == [0, 7], format!("F^c {:?}", an.emle.co_facial_set));
    let zeta = an.emle.zeta.as_ref().map(|z| ints(z));
    v.check(zeta.as_deref() == Some(&want_alpha[..]), format!("zeta {zeta:?}"));
    let want_a_prime = vec![
        vec![1, 0, 0, 0, 0, 0],
        vec![0, 1, 0, 0, 0, 0],
        vec![1, 1, 1, 0, 0, 0],
        vec![0, 0, 0, 1, 0, 0],
        vec![1, 0, 0, 1, 1, 0],
        vec![0, 1, 0, 1, 0, 1],
    ];
    v.check(rows_i64(&an.reduced.a_prime) == want_a_prime, "A' differs");
    let want_a_star = vec![
        vec![1, 1, 0, 0, 0, 0],
        vec![1, 0, 1, 0, 0, 0],
        vec![1, 1, 1, 1, 0, 0],
        vec![1, 0, 0, 0, 1, 0],
        vec![1, 1, 0, 0, 1, 1],
        vec![1, 0, 1, 0, 1, 0],
    ];
    v.check(rows_i64(&an.emle.a_star) == want_a_star, "A*_F differs");

    let y: Vec<f64> = input.table.counts().iter().map(|&c| c as f64).collect();
    let mut structural = vec![false; 8];
    structural[0] = true;
    structural[7] = true;
    let oracle = ipf(&[2, 2, 2], &y, &[vec![0, 1], vec![0, 2], vec![1, 2]], &structural);
    for (name, cells) in [("a_prime", &an.reduced.estimable_cells), ("a_star_f", &an.emle.facial_set)] {
        let f = fitted(&an, name);
        v.check(f.converged, format!("{name} did not converge"));
        for (k, &i) in cells.iter().enumerate() {
            let err = (f.mu_hat[k] - oracle[i]).abs();
            v.check(err < FIT_TOL, format!("{name} cell {} off by {err:e}", i + 1));
        }
    }
    v.within(Duration::from_secs(1));
    v.finish()
}

fn criterion_3_esoteric_constraint() -> bool {
    let mut v = Verdict::new(3, "2x2x2 esoteric constraint with existing MLE");
    let input = read_table(&fixture("constraint_2x2x2.json")).unwrap();
    let formula = input.model.unwrap();
    let an = analyze_full(&input.table, &formula, AnalysisOptions::default()).unwrap();
    v.check(alpha_vec(&an) == [1, -1, -1, 0, -1, 1, 1], format!("alpha {:?}", alpha_vec(&an)));
    let direct: Vec<&str> = an.report.redundancy.directly_estimable.iter().map(String::as_str).collect();
    v.check(direct == ["θ^XY"], format!("directly estimable {direct:?}"));
    v.check(an.classification == Classification::RedundantWithConstraint, "classification");
    v.check(an.emle.mle_exists && an.emle.co_facial_set.is_empty(), "MLE should exist");
    let form = an.constraints.first().and_then(|c| c.linear_form.clone());
    let want: Vec<Rational> = [0, 1, 1, 1, 0, 0, 0].iter().map(|&x| q(x)).collect();
    v.check(form.as_ref() == Some(&want), format!("linear form {form:?}"));
    v.check(an.report.esoteric.augmented_rank == Some(7), "augmented rank");

    let half = Rational::new(1.into(), 2.into());
    let delta: Vec<Rational> = [1, -1, -1, 1, -1, 1, 1, -1]
        .iter()
        .map(|&s| if s > 0 { half.clone() } else { -half.clone() })
        .collect();
    let a = &an.design;
    let ones = Table::with_shape(&[2, 2, 2], vec![0, 1, 1, 0, 1, 1, 1, 1]).unwrap();
    v.check(haberman_delta_check(a, &ones, &delta), "delta check fails on unit counts");
    v.check(haberman_delta_check(a, &input.table, &delta), "delta check fails on fixture counts");

    let f = fitted(&an, "a_star_f");
    v.check(f.converged && f.theta_hat.len() == 7, "full fit");
    let res: f64 = form
        .map(|g| g.iter().zip(&f.theta_hat).map(|(c, t)| c.to_integer().try_into().unwrap_or(0i64) as f64 * t).sum())
        .unwrap_or(f64::NAN);
    v.check(res.abs() < CONSTRAINT_TOL, format!("constraint residual {res:e}"));
    let y: Vec<f64> = input.table.counts().iter().map(|&c| c as f64).collect();
    let oracle = ipf(&[2, 2, 2], &y, &[vec![0, 1], vec![0, 2], vec![1, 2]], &[false; 8]);
    let worst = f.mu_hat.iter().zip(&oracle).map(|(m, o)| (m - o).abs()).fold(0.0, f64::max);
    v.check(worst < CONSTRAINT_TOL, format!("fit differs from IPF by {worst:e}"));
    v.notes.push(format!("residual {res:.1e}, IPF gap {worst:.1e}"));
    v.within(Duration::from_secs(1));
    v.finish()
}

fn criterion_4_single_zero_rule() -> bool {
    let mut v = Verdict::new(4, "single-zero rule on uniform saturated shapes");
    let shapes: [&[usize]; 6] = [&[2], &[2, 2], &[2, 2, 2], &[3, 3], &[3, 3, 3], &[4, 4]];
    let mut cells = 0;
    for s in shapes {
        let r = verify_theorem1(s).unwrap();
        cells += r.cells_checked;
        v.check(
            r.passed(),
            format!("{s:?}: {} discrepancies, {} deficiency mismatches", r.discrepancies.len(), r.deficiency_mismatches.len()),
        );
    }
    v.notes.push(format!("{cells} cells"));
    v.within(Duration::from_secs(30));
    v.finish()
}

fn exact_nonestimable(a: &loglin_core::DesignMatrix, table: &Table) -> BTreeSet<ModelTerm> {
    let ds = analyze_redundancy(a, table).unwrap();
    nonestimable_parameters(&ds).into_iter().map(|s| a.terms[s].clone()).collect()
}

fn criterion_5_multi_zero_union() -> bool {
    let mut v = Verdict::new(5, "multi-zero nonestimable sets contain the single-zero union");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut trials = 0;
    for shape in [vec![2, 2, 2], vec![3, 3]] {
        let vars = default_variables(&shape);
        let a = build_design_matrix(&ModelSpec::saturated(shape.len()), &vars).unwrap();
        let n: usize = shape.iter().product();
        let single: Vec<BTreeSet<ModelTerm>> = (0..n)
            .map(|i| {
                let mut c = vec![1; n];
                c[i] = 0;
                exact_nonestimable(&a, &Table::with_shape(&shape, c).unwrap())
            })
            .collect();
        for _ in 0..100 {
            let k = rng.gen_range(2..n);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let mut c: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
            idx[..k].iter().for_each(|&i| c[i] = 0);
            let exact = exact_nonestimable(&a, &Table::with_shape(&shape, c).unwrap());
            for &i in &idx[..k] {
                let rule = nonestimable_set_single_zero(&cell_digits(i + 1, &shape).unwrap(), &shape);
                v.check(rule.is_subset(&exact), format!("{shape:?} zeros {:?}: rule set of cell {} missing", &idx[..k], i + 1));
                v.check(single[i].is_subset(&exact), format!("{shape:?} zeros {:?}: exact set of cell {} missing", &idx[..k], i + 1));
            }
            trials += 1;
        }
    }
    v.notes.push(format!("{trials} patterns"));
    v.within(Duration::from_secs(30));
    v.finish()
}

fn criterion_6_random_classification() -> bool {
    let mut v = Verdict::new(6, "random sparse tables: classification, LP and witness consistency");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut tally = [0usize; 3];
    let mut case_ii_d = [0usize; 2];
    for trial in 0..200 {
        // Every fourth instance is a no-three-way model with few zeros, the
        // setting where ridges with an existing MLE occur.
        let (levels, formula, counts) = if trial % 4 == 3 {
            let levels: Vec<usize> = (0..3).map(|_| rng.gen_range(2..=3)).collect();
            let n: usize = levels.iter().product();
            let mut counts = random_counts(&mut rng, n, 0.0);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let k = rng.gen_range(2..=3);
            idx[..k].iter().for_each(|&i| counts[i] = 0);
            (levels, "(XY,XZ,YZ)".to_string(), counts)
        } else {
            let levels = random_levels(&mut rng, 3, 3);
            let n: usize = levels.iter().product();
            let (formula, _) = random_hierarchical(&mut rng, levels.len());
            let zero_p = rng.gen_range(0.15..0.5);
            (levels, formula, random_counts(&mut rng, n, zero_p))
        };
        let n = counts.len();
        let table = Table::with_shape(&levels, counts).unwrap();
        let tag = format!("#{trial} {levels:?} {formula} {:?}", table.counts());
        let an = match analyze_full(&table, &formula, AnalysisOptions { fit: false, intercept: true }) {
            Ok(an) => an,
            Err(e) => {
                v.check(false, format!("{tag}: {e}"));
                continue;
            }
        };
        let a = &an.design;
        let d = an.report.redundancy.deficiency;
        let e = &an.emle;
        v.check(an.classification == Classification::classify(d, e.mle_exists), format!("{tag}: classification"));
        tally[match an.classification {
            Classification::NotRedundant => 0,
            Classification::RedundantNoMle => 1,
            Classification::RedundantWithConstraint => 2,
        }] += 1;

        let (shortcut, _) = mle_exists(a, &table).unwrap();
        v.check(shortcut == e.mle_exists, format!("{tag}: shortcut {shortcut} vs LP {}", e.mle_exists));
        let (oracle, _) = cofacial_oracle(a, table.counts());
        v.check(oracle == e.co_facial_set, format!("{tag}: oracle F^c {oracle:?} vs {:?}", e.co_facial_set));

        match &e.zeta {
            Some(z) => {
                let z: Vec<Rational> = z.iter().cloned().map(Rational::from_integer).collect();
                for i in 0..n {
                    let t = dot(a.row(i), &z);
                    let ok = if table.counts()[i] > 0 {
                        t.is_zero()
                    } else {
                        !t.is_negative() && (t.is_zero() != e.co_facial_set.contains(&i))
                    };
                    v.check(ok, format!("{tag}: witness wrong at cell {}", i + 1));
                }
            }
            None => v.check(e.mle_exists, format!("{tag}: no witness but MLE missing")),
        }

        match an.classification {
            Classification::RedundantNoMle => {
                let est = &an.reduced.estimable_cells;
                let same = e.facial_set == *est && e.df == an.reduced.df;
                v.check(est.iter().all(|i| e.facial_set.contains(i)), format!("{tag}: estimable cell outside F"));
                if d == 1 {
                    v.check(same, format!("{tag}: F {:?} vs estimable {est:?} with d = 1", e.facial_set));
                } else if !same {
                    // F is confirmed by the oracle LP above; with d >= 2 a zero
                    // cell can have a positive extended MLE without being estimable.
                    v.refuted.push(format!(
                        "{tag} d = {d}: F {:?} vs estimable {est:?}, df {} vs {}",
                        e.facial_set, e.df, an.reduced.df
                    ));
                }
                case_ii_d[usize::from(d > 1)] += 1;
            }
            Classification::RedundantWithConstraint => v.check(
                an.basis_verdicts.iter().any(|b| b.kind == DirectionKind::Constraint),
                format!("{tag}: no mixed-sign direction"),
            ),
            Classification::NotRedundant => {}
        }
    }
    v.notes.push(format!(
        "case-i {}, case-ii {} ({} with d = 1), case-iii {}",
        tally[0], tally[1], case_ii_d[0], tally[2]
    ));
    v.within(Duration::from_secs(120));
    v.finish()
}

fn criterion_7_fitting_numerics() -> bool {
    let mut v = Verdict::new(7, "score against finite differences, marginals and closed form");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_grad: f64 = 0.0;
    for _ in 0..20 {
        let levels = random_levels(&mut rng, 3, 3);
        let n: usize = levels.iter().product();
        let (formula, _) = random_hierarchical(&mut rng, levels.len());
        let a = design(&levels, &formula);
        let x: DMatrix<f64> = to_real(&a.matrix);
        let y = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(0..15) as f64));
        let theta = DVector::from_iterator(a.n_params(), (0..a.n_params()).map(|_| rng.gen_range(-0.5..0.5)));
        let g = score(&x, &y, &theta);
        let h = 1e-5;
        for s in 0..a.n_params() {
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[s] += h;
            down[s] -= h;
            let fd = (log_likelihood(&x, &y, &up) - log_likelihood(&x, &y, &down)) / (2.0 * h);
            let rel = (g[s] - fd).abs() / g[s].abs().max(1.0);
            worst_grad = worst_grad.max(rel);
        }
    }
    v.check(worst_grad < GRADIENT_TOL, format!("gradient relative error {worst_grad:e}"));

    let mut worst_margin: f64 = 0.0;
    let mut fits = 0;
    for _ in 0..100 {
        let levels = random_levels(&mut rng, 3, 3);
        let n: usize = levels.iter().product();
        let (formula, _) = random_hierarchical(&mut rng, levels.len());
        let table = Table::with_shape(&levels, random_counts(&mut rng, n, 0.3)).unwrap();
        let Ok(an) = analyze_full(&table, &formula, AnalysisOptions::default()) else {
            v.check(false, format!("{levels:?} {formula} failed"));
            continue;
        };
        for (name, f) in &an.fits {
            if !f.converged {
                continue;
            }
            let (m, cells) = match name.as_str() {
                "a_prime" => (&an.reduced.a_prime, &an.reduced.estimable_cells),
                _ => (&an.emle.a_star, &an.emle.facial_set),
            };
            let x: DMatrix<f64> = to_real(m);
            let yv = DVector::from_iterator(cells.len(), cells.iter().map(|&i| table.counts()[i] as f64));
            let mu = DVector::from_vec(f.mu_hat.clone());
            let gap = (x.transpose() * (&yv - &mu)).amax() / (1.0 + table.total() as f64);
            worst_margin = worst_margin.max(gap);
            fits += 1;
        }
    }
    v.check(worst_margin < MARGIN_TOL, format!("marginal mismatch {worst_margin:e}"));

    let counts = [3.0, 7.0, 1.0, 9.0, 5.0];
    let x = DMatrix::from_element(5, 1, 1.0);
    let f = fit(&x, &counts).unwrap();
    let mean: f64 = counts.iter().sum::<f64>() / 5.0;
    v.check((f.theta_hat[0] - mean.ln()).abs() < CLOSED_FORM_TOL, "intercept-only estimate");
    v.check(f.mu_hat.iter().all(|m| (m - mean).abs() < CLOSED_FORM_TOL), "intercept-only means");
    v.notes.push(format!("gradient {worst_grad:.1e}, margins {worst_margin:.1e} over {fits} fits"));
    v.finish()
}

fn large_table(rng: &mut ChaCha8Rng, structured: bool) -> Table {
    let levels = [3, 3, 3, 3, 3, 2];
    let n: usize = levels.iter().product();
    let mut counts: Vec<u64> = (0..n).map(|_| rng.gen_range(1..20)).collect();
    if structured {
        for (i, c) in counts.iter_mut().enumerate() {
            if i % 3 == 2 && (i / 3) % 3 == 2 {
                *c = 0;
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut zeros = counts.iter().filter(|&&c| c == 0).count();
    for i in idx {
        if zeros == 298 {
            break;
        }
        if counts[i] != 0 {
            counts[i] = 0;
            zeros += 1;
        }
    }
    Table::with_shape(&levels, counts).unwrap()
}

fn criterion_8_scale() -> bool {
    let mut v = Verdict::new(8, "486-cell table, main effects and two-way terms, 298 zeros");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for structured in [false, true] {
        let table = large_table(&mut rng, structured);
        let start = std::time::Instant::now();
        let an = analyze_full(&table, "main+2way", AnalysisOptions::default()).unwrap();
        let t = start.elapsed();
        v.check(an.design.n_params() == 62, format!("p = {}", an.design.n_params()));
        v.check(table.zero_cells().len() == 298, "zero count");
        v.check(t < Duration::from_secs(10), format!("pipeline took {t:?}"));
        v.notes.push(format!(
            "{}: d = {}, |F^c| = {}, {t:.2?}",
            if structured { "structured" } else { "uniform" },
            an.report.redundancy.deficiency,
            an.emle.co_facial_set.len()
        ));
    }
    v.finish()
}

fn criterion_9_positive_tables() -> bool {
    let mut v = Verdict::new(9, "positive tables are never redundant");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..50 {
        let levels = random_levels(&mut rng, 3, 4);
        let n: usize = levels.iter().product();
        let formula = if rng.gen_bool(0.5) {
            random_hierarchical(&mut rng, levels.len()).0
        } else {
            random_explicit(&mut rng, levels.len())
        };
        let table = Table::with_shape(&levels, random_counts(&mut rng, n, 0.0)).unwrap();
        let an = analyze_full(&table, &formula, AnalysisOptions { fit: false, intercept: true }).unwrap();
        let tag = format!("#{trial} {levels:?} {formula}");
        v.check(an.report.redundancy.deficiency == 0, format!("{tag}: d > 0"));
        v.check(an.reduced.estimable_cells.len() == n, format!("{tag}: not all cells estimable"));
        v.check(an.classification == Classification::NotRedundant, format!("{tag}: classification"));
    }
    v.finish()
}

fn main() {
    let criteria: [(usize, fn() -> bool); 9] = [
        (1, criterion_1_sparse_three_way),
        (2, criterion_2_divergent_two_cubed),
        (3, criterion_3_esoteric_constraint),
        (4, criterion_4_single_zero_rule),
        (5, criterion_5_multi_zero_union),
        (6, criterion_6_random_classification),
        (7, criterion_7_fitting_numerics),
        (8, criterion_8_scale),
        (9, criterion_9_positive_tables),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let (mut passed, mut refuted, mut failed) = (0, Vec::new(), Vec::new());
    for (id, run) in criteria {
        let name = format!("criterion_{id}");
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        match std::panic::catch_unwind(run) {
            Ok(true) => passed += 1,
            Ok(false) => refuted.push(id),
            Err(_) => failed.push(id),
        }
    }
    println!(
        "acceptance: {passed} pass, {} fail on a refuted claim {refuted:?}, {} fail unexplained {failed:?}",
        refuted.len(),
        failed.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
