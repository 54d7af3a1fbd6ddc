#![allow(dead_code)]

use std::collections::HashMap;

use anticonc::{CoefficientSystem, DyadicProbability, Point, Rational};
use rand::Rng;

pub type Rows = Vec<Vec<i64>>;

pub fn random_rows<R: Rng>(rng: &mut R, n: usize, d: usize, bound: i64) -> Rows {
    (0..n)
        .map(|_| loop {
            let row: Vec<i64> = (0..d).map(|_| rng.gen_range(-bound..=bound)).collect();
            if row.iter().any(|&x| x != 0) {
                break row;
            }
        })
        .collect()
}

pub fn system(rows: &Rows) -> CoefficientSystem {
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    CoefficientSystem::from_ints(rows[0].len(), &refs).unwrap()
}

/// Calls `visit(g, x)` for every sign vector `g` (bit j set: xi_j = -1) and
/// its sum `x`, walking the cube in Gray-code order.
pub fn for_each_sum(rows: &Rows, mut visit: impl FnMut(usize, &[i64])) {
    let n = rows.len();
    let d = rows[0].len();
    let mut x = vec![0i64; d];
    for r in rows {
        for k in 0..d {
            x[k] += r[k];
        }
    }
    let mut g = 0usize;
    visit(g, &x);
    for step in 1..1usize << n {
        let j = step.trailing_zeros() as usize;
        g ^= 1 << j;
        let sign = if g >> j & 1 == 1 { -2 } else { 2 };
        for k in 0..d {
            x[k] += sign * rows[j][k];
        }
        visit(g, &x);
    }
}

/// Law of `X` as counts over `2^n`.
pub fn law(rows: &Rows) -> HashMap<Vec<i64>, u64> {
    let mut counts = HashMap::new();
    for_each_sum(rows, |_, x| *counts.entry(x.to_vec()).or_insert(0) += 1);
    counts
}

pub fn rho_count(rows: &Rows) -> u64 {
    law(rows).values().copied().max().unwrap()
}

pub fn rho(rows: &Rows) -> DyadicProbability {
    DyadicProbability::new(rho_count(rows), rows.len() as u32)
}

pub fn subset_rows(rows: &Rows, subset: &[usize]) -> Rows {
    subset.iter().map(|&i| rows[i].clone()).collect()
}

pub fn point(x: &[i64]) -> Point {
    Point::from_ints(x)
}

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

/// Binomial coefficient by Pascal's rule.
pub fn binom(n: usize, k: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row.get(k).copied().unwrap_or(0)
}

/// Membership of every sign vector, evaluated point by point.
pub fn membership(rows: &Rows, contains: impl Fn(&[i64]) -> bool) -> Vec<bool> {
    let mut out = vec![false; 1 << rows.len()];
    for_each_sum(rows, |g, x| out[g] = contains(x));
    out
}

pub fn influence_counts(member: &[bool], n: usize) -> Vec<u64> {
    (0..n)
        .map(|i| {
            (0..member.len())
                .filter(|&g| member[g] != member[g ^ (1 << i)])
                .count() as u64
        })
        .collect()
}
