//! Small exact linear algebra over `Q`: row reduction, rank and null spaces.

use crate::numerics::{Point, Rational};

/// Reduced row echelon form in place; returns the pivot columns.
pub(crate) fn rref(rows: &mut [Vec<Rational>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip().expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot = rows[r].clone();
                for (x, p) in rows[i].iter_mut().zip(&pivot).take(ncols) {
                    *x = &*x - &(&f * p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(vectors: &[Point]) -> usize {
    let mut rows: Vec<Vec<Rational>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
    rref(&mut rows).len()
}

/// Basis of `{x : <v, x> = 0 for every v in vectors}` inside `Q^dim`.
pub fn null_space(vectors: &[Point], dim: usize) -> Vec<Point> {
    let mut rows: Vec<Vec<Rational>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
    let pivots = rref(&mut rows);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); dim];
            x[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                x[pc] = -&rows[r][f];
            }
            Point::new(x).expect("dim >= 1")
        })
        .collect()
}

/// Some solution of `A x = b` (rows of `A` given as points), if one exists.
pub fn solve(a: &[Point], b: &[Rational], dim: usize) -> Option<Point> {
    let mut rows: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.coords().to_vec();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut rows);
    if pivots.contains(&dim) {
        return None;
    }
    let mut x = vec![Rational::zero(); dim];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = rows[r][dim].clone();
    }
    Point::new(x).ok()
}

/// Optimal value and solution of a linear program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rational,
    pub x: Vec<Rational>,
}

/// Maximizes `c.x` subject to `A x <= b`, `x >= 0`, where `b >= 0` so the
/// slack basis is feasible. Bland's rule guarantees termination.
///
/// Returns `None` when the objective is unbounded.
pub fn simplex_max(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Option<LpSolution> {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m, "one bound per row");
    assert!(b.iter().all(|x| !x.is_negative()), "slack basis must be feasible");
    let width = n + m + 1;
    let mut rows: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, bi))| {
            assert_eq!(row.len(), n, "row width");
            let mut r = Vec::with_capacity(width);
            r.extend(row.iter().cloned());
            r.extend((0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r.push(bi.clone());
            r
        })
        .collect();
    // Reduced costs; the last entry holds minus the objective value.
    let mut costs: Vec<Rational> = c.iter().cloned().chain((0..=m).map(|_| Rational::zero())).collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    while let Some(enter) = (0..n + m).find(|&j| costs[j].is_positive()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in rows.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[n + m] / &row[enter];
            let better = match &leave {
                None => true,
                Some((k, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*k]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let (pr, _) = leave?;
        let inv = rows[pr][enter].recip().expect("positive pivot");
        for x in rows[pr].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let pivot_row = rows[pr].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == pr || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = &*x - &(&f * p);
                }
            }
        }
        if !costs[enter].is_zero() {
            let f = costs[enter].clone();
            for (x, p) in costs.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = &*x - &(&f * p);
                }
            }
        }
        basis[pr] = enter;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = rows[i][n + m].clone();
        }
    }
    Some(LpSolution {
        value: -&costs[n + m],
        x,
    })
}
