//! Fraction-free rank computation.

use crate::linalg::Matrix;
use crate::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Exact rank of a rational matrix.
///
/// Rows are scaled to integers, then reduced with Bareiss' fraction-free
/// elimination. Pivots are chosen by largest absolute value in the column
/// (ties to the upper row) so the run is deterministic.
pub fn exact_rank(m: &Matrix<Rational>) -> usize {
    let mut rows: Vec<Vec<BigInt>> = m.rows().map(integer_row).collect();
    bareiss_rank(&mut rows, m.ncols())
}

/// Rank of an integer matrix given as rows; the rows are overwritten.
pub fn bareiss_rank(rows: &mut [Vec<BigInt>], cols: usize) -> usize {
    let nrows = rows.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for c in 0..cols {
        if rank == nrows {
            break;
        }
        let pivot = (rank..nrows)
            .filter(|&i| !rows[i][c].is_zero())
            .fold(None::<usize>, |best, i| match best {
                Some(b) if rows[b][c].abs() >= rows[i][c].abs() => Some(b),
                _ => Some(i),
            });
        let Some(pivot) = pivot else { continue };
        rows.swap(rank, pivot);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let prow = &head[rank];
        let p = prow[c].clone();
        for row in tail.iter_mut() {
            let factor = row[c].clone();
            for j in c + 1..cols {
                let v = &p * &row[j] - &factor * &prow[j];
                // Sylvester's identity makes this division exact.
                debug_assert!(v.is_multiple_of(&prev));
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = p;
        rank += 1;
    }
    rank
}

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    row.iter()
        .map(|v| v.numer() * (&lcm / v.denom()))
        .collect()
}
