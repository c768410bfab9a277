//! Exact Gaussian elimination over `Q(i)`.
//!
//! Dense and small (systems here are at most a few dozen unknowns), so a
//! plain row-echelon reduction is all that is needed.

use num_traits::Zero;

use super::coefficient::Coefficient;

/// Reduced row-echelon form in place; returns the pivot columns.
fn reduce(rows: &mut [Vec<Coefficient>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&k| !rows[k][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].inv().expect("nonzero pivot");
        for v in rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        for k in 0..rows.len() {
            if k == r || rows[k][col].is_zero() {
                continue;
            }
            let factor = rows[k][col].clone();
            let (src, dst) = if k < r {
                let (lo, hi) = rows.split_at_mut(r);
                (&hi[0], &mut lo[k])
            } else {
                let (lo, hi) = rows.split_at_mut(k);
                (&lo[r], &mut hi[0])
            };
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d -= &(&factor * s);
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

/// Rank of a dense matrix given as rows.
pub fn rank(matrix: &[Vec<Coefficient>]) -> usize {
    let ncols = matrix.first().map_or(0, Vec::len);
    let mut rows = matrix.to_vec();
    reduce(&mut rows, ncols).len()
}

/// One solution of `A·v = b` with every free variable set to zero, or `None`
/// when the system is inconsistent.
pub fn solve(matrix: &[Vec<Coefficient>], rhs: &[Coefficient]) -> Option<Vec<Coefficient>> {
    assert_eq!(matrix.len(), rhs.len(), "row count mismatch");
    let ncols = matrix.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<Coefficient>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = reduce(&mut rows, ncols);
    // A pivot in the augmented column means 0 = nonzero.
    if rows
        .iter()
        .skip(pivots.len())
        .any(|row| !row[ncols].is_zero())
    {
        return None;
    }
    let mut out = vec![Coefficient::zero(); ncols];
    for (r, &col) in pivots.iter().enumerate() {
        out[col] = rows[r][ncols].clone();
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i64) -> Coefficient {
        Coefficient::from_int(n)
    }

    #[test]
    fn solves_square_system() {
        let a = vec![vec![c(2), c(1)], vec![c(1), c(3)]];
        let b = vec![c(3), c(5)];
        let v = solve(&a, &b).unwrap();
        assert_eq!(v, vec![Coefficient::ratio(4, 5), Coefficient::ratio(7, 5)]);
        assert_eq!(rank(&a), 2);
    }

    #[test]
    fn detects_inconsistency_and_rank_deficiency() {
        let a = vec![vec![c(1), c(2)], vec![c(2), c(4)]];
        assert_eq!(rank(&a), 1);
        assert!(solve(&a, &[c(1), c(3)]).is_none());
        let v = solve(&a, &[c(1), c(2)]).unwrap();
        assert_eq!(v, vec![c(1), c(0)]);
    }
}
