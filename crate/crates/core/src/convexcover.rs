//! Convex position, supporting normals, the `2d`-part cover, Minkowski
//! bad-configuration search and the zonotope vertex bound.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::Serialize;

use crate::distributions::Budget;
use crate::error::{Error, Result};
use crate::linalg::simplex_max;
use crate::numerics::{binomial, Point, Rational};
use crate::sumstruct::BadConfiguration;

fn check_points(points: &[Point]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidInput("point set must be nonempty".into()));
    };
    let dim = first.dim();
    for p in points {
        p.check_dim(dim)?;
    }
    Ok(dim)
}

fn separates(v: &Point, x: &Point, others: &[&Point]) -> bool {
    !v.is_zero() && others.iter().all(|y| v.dot(&(*y - x)).is_negative())
}

/// Normal found by the margin program, or `None` if `x` is not strictly separable.
fn separating_normal(x: &Point, others: &[&Point]) -> Option<(Point, Rational)> {
    let d = x.dim();
    // Variables p (d), n (d), delta; v = p - n.
    // Rows: <p - n, y - x> + delta <= 0, p_i <= 1, n_i <= 1, delta <= 1.
    let nv = 2 * d + 1;
    let mut a = Vec::with_capacity(others.len() + nv);
    let mut b = Vec::with_capacity(others.len() + nv);
    for y in others {
        let w = *y - x;
        let mut row = Vec::with_capacity(nv);
        row.extend(w.coords().iter().cloned());
        row.extend(w.coords().iter().map(|c| -c));
        row.push(Rational::one());
        a.push(row);
        b.push(Rational::zero());
    }
    for j in 0..nv {
        let mut row = vec![Rational::zero(); nv];
        row[j] = Rational::one();
        a.push(row);
        b.push(Rational::one());
    }
    let mut c = vec![Rational::zero(); nv];
    c[nv - 1] = Rational::one();
    let sol = simplex_max(&c, &a, &b).expect("all variables are bounded");
    if !sol.value.is_positive() {
        return None;
    }
    let v = Point::new((0..d).map(|i| &sol.x[i] - &sol.x[d + i]).collect()).expect("d >= 1");
    Some((v, sol.value))
}

/// A strictly separating normal at `x`, trying cheap candidates before the LP.
fn normal_at(points: &[Point], x: &Point) -> Option<(Point, Option<Rational>)> {
    let others: Vec<&Point> = points.iter().filter(|y| *y != x).collect();
    if others.len() + 1 < points.len() {
        // x occurs twice, so it is a convex combination of itself.
        return None;
    }
    if others.is_empty() {
        return Some((Point::unit(x.dim(), 0), None));
    }
    let k = Rational::from_integer(others.len() as i64).recip().expect("nonempty");
    let mean_others = others
        .iter()
        .fold(Point::origin(x.dim()), |acc, y| &acc + *y)
        .scale(&k);
    let candidate = x - &mean_others;
    if separates(&candidate, x, &others) {
        return Some((candidate, None));
    }
    separating_normal(x, &others).map(|(v, margin)| (v, Some(margin)))
}

/// True iff no point is a convex combination of the others (repeated points count as such).
pub fn is_convex_position(points: &[Point]) -> Result<bool> {
    check_points(points)?;
    Ok(points.iter().all(|x| normal_at(points, x).is_some()))
}

/// Vertices of the convex hull, i.e. the points not in the hull of the rest.
pub fn hull_vertices(points: &[Point]) -> Result<Vec<Point>> {
    check_points(points)?;
    let mut unique = points.to_vec();
    unique.sort();
    unique.dedup();
    match unique[0].dim() {
        1 => {
            let mut ends = vec![unique[0].clone()];
            if unique.len() > 1 {
                ends.push(unique[unique.len() - 1].clone());
            }
            return Ok(ends);
        }
        2 => return Ok(planar_hull(&unique)),
        _ => {}
    }
    Ok(unique
        .iter()
        .filter(|x| normal_at(&unique, x).is_some())
        .cloned()
        .collect())
}

fn cross(o: &Point, a: &Point, b: &Point) -> Rational {
    let (o, a, b) = (o.coords(), a.coords(), b.coords());
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Strict hull vertices of sorted distinct planar points (monotone chain), sorted.
fn planar_hull(sorted: &[Point]) -> Vec<Point> {
    if sorted.len() < 3 {
        return sorted.to_vec();
    }
    let mut chain: Vec<&Point> = Vec::with_capacity(2 * sorted.len());
    for pass in [sorted.iter().collect::<Vec<_>>(), sorted.iter().rev().collect()] {
        let floor = chain.len();
        for p in pass {
            while chain.len() >= floor + 2
                && !cross(chain[chain.len() - 2], chain[chain.len() - 1], p).is_positive()
            {
                chain.pop();
            }
            chain.push(p);
        }
        chain.pop();
    }
    let mut hull: Vec<Point> = chain.into_iter().cloned().collect();
    hull.sort();
    hull.dedup();
    hull
}

/// `v` with `<v, y - x> < 0` for every other `y` in the set, re-verified exactly.
pub fn supporting_normal(points: &[Point], x: &Point) -> Result<Point> {
    Ok(supporting_certificate(points, x)?.normal)
}

/// Normal plus the LP margin when the LP was needed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalCertificate {
    pub point: Point,
    pub normal: Point,
    pub margin: Option<Rational>,
}

pub fn supporting_certificate(points: &[Point], x: &Point) -> Result<NormalCertificate> {
    let dim = check_points(points)?;
    x.check_dim(dim)?;
    if !points.contains(x) {
        return Err(Error::InvalidInput(format!("{x} is not in the point set")));
    }
    let (normal, margin) = normal_at(points, x).ok_or_else(|| {
        Error::Infeasible(format!("{x} is a convex combination of the other points"))
    })?;
    let others: Vec<&Point> = points.iter().filter(|y| *y != x).collect();
    if !others.is_empty() && !separates(&normal, x, &others) {
        return Err(Error::Infeasible(format!("certificate at {x} failed re-verification")));
    }
    Ok(NormalCertificate {
        point: x.clone(),
        normal,
        margin,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// The points whose normal has a positive (or negative) `axis` coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverPart {
    /// 0-based coordinate axis.
    pub axis: usize,
    pub side: Side,
    pub points: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverResult {
    pub dim: usize,
    /// Exactly `2d` parts, ordered `(0,+), (0,-), (1,+), ...`.
    pub parts: Vec<CoverPart>,
    pub certificates: Vec<NormalCertificate>,
}

impl CoverResult {
    pub fn part(&self, axis: usize, side: Side) -> &[Point] {
        &self.parts[2 * axis + usize::from(side == Side::Minus)].points
    }

    /// Union of the parts, sorted and deduplicated.
    pub fn union(&self) -> Vec<Point> {
        let set: BTreeSet<&Point> = self.parts.iter().flat_map(|p| &p.points).collect();
        set.into_iter().cloned().collect()
    }
}

/// Cover of a set in convex position by `2d` parts, none containing a sum of `d` pairs.
pub fn convex_cover(points: &[Point]) -> Result<CoverResult> {
    let dim = check_points(points)?;
    let certificates = points
        .iter()
        .map(|x| supporting_certificate(points, x))
        .collect::<Result<Vec<_>>>()?;
    cover_from_normals(dim, certificates)
}

/// Builds the cover from caller-chosen normals, verifying each one.
pub fn convex_cover_with_normals(points: &[Point], normals: &[Point]) -> Result<CoverResult> {
    let dim = check_points(points)?;
    if normals.len() != points.len() {
        return Err(Error::InvalidInput("one normal per point".into()));
    }
    let mut certificates = Vec::with_capacity(points.len());
    for (x, v) in points.iter().zip(normals) {
        v.check_dim(dim)?;
        let others: Vec<&Point> = points.iter().filter(|y| *y != x).collect();
        if v.is_zero() || !separates(v, x, &others) {
            return Err(Error::Infeasible(format!("{v} does not support the set at {x}")));
        }
        certificates.push(NormalCertificate {
            point: x.clone(),
            normal: v.clone(),
            margin: None,
        });
    }
    cover_from_normals(dim, certificates)
}

fn cover_from_normals(dim: usize, certificates: Vec<NormalCertificate>) -> Result<CoverResult> {
    let mut parts = Vec::with_capacity(2 * dim);
    for axis in 0..dim {
        for side in [Side::Plus, Side::Minus] {
            let mut points: Vec<Point> = certificates
                .iter()
                .filter(|c| {
                    let s = c.normal.coords()[axis].signum();
                    (side == Side::Plus && s > 0) || (side == Side::Minus && s < 0)
                })
                .map(|c| c.point.clone())
                .collect();
            points.sort();
            points.dedup();
            parts.push(CoverPart { axis, side, points });
        }
    }
    let cover = CoverResult {
        dim,
        parts,
        certificates,
    };
    let covered = cover.union();
    if cover.certificates.iter().any(|c| covered.binary_search(&c.point).is_err()) {
        return Err(Error::Infeasible("cover misses a point".into()));
    }
    Ok(cover)
}

/// Pairs `A_1, ..., A_k` with `A_1 + ... + A_k ⊆ P`, found exhaustively.
///
/// Witnesses are written `A_1 = {b, b + δ_1}`, `A_i = {0, δ_i}`. Ones with
/// `2^k` distinct sums are preferred over degenerate ones.
pub fn bad_configuration_search(
    points: &[Point],
    k: usize,
    budget: &Budget,
) -> Result<Option<BadConfiguration>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    if points.len() < 2 {
        return Ok(None);
    }
    check_points(points)?;
    let set: BTreeSet<Point> = points.iter().cloned().collect();
    let sorted: Vec<&Point> = set.iter().collect();
    let mut nodes = 0u64;
    for distinct in [true, false] {
        for b in &sorted {
            let deltas: Vec<Point> = sorted.iter().filter(|p| **p != *b).map(|p| *p - b).collect();
            let mut chosen = Vec::with_capacity(k);
            let base = vec![(*b).clone()];
            if extend(&set, &deltas, 0, k, &base, distinct, &mut chosen, &mut nodes, budget)? {
                let origin = Point::origin(b.dim());
                let mut pairs = vec![[(*b).clone(), *b + &chosen[0]]];
                pairs.extend(chosen[1..].iter().map(|d| [origin.clone(), d.clone()]));
                let cfg = BadConfiguration::new(pairs)?;
                if cfg.sumset().iter().any(|p| !set.contains(p)) {
                    return Err(Error::InvalidInput(format!("witness {cfg} failed re-verification")));
                }
                return Ok(Some(cfg));
            }
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn extend(
    set: &BTreeSet<Point>,
    deltas: &[Point],
    from: usize,
    k: usize,
    current: &[Point],
    distinct: bool,
    chosen: &mut Vec<Point>,
    nodes: &mut u64,
    budget: &Budget,
) -> Result<bool> {
    if chosen.len() == k {
        return Ok(true);
    }
    for (j, delta) in deltas.iter().enumerate().skip(from) {
        *nodes += 1;
        if *nodes > budget.max_search_nodes {
            return Err(Error::BudgetExceeded {
                what: "bad configuration search nodes",
                required: *nodes,
                cap: budget.max_search_nodes,
            });
        }
        let shifted: Vec<Point> = current.iter().map(|c| c + delta).collect();
        if !shifted.iter().all(|p| set.contains(p)) {
            continue;
        }
        let mut next: Vec<Point> = current.iter().chain(&shifted).cloned().collect();
        next.sort();
        let before = next.len();
        next.dedup();
        if distinct && next.len() < before {
            continue;
        }
        chosen.push(delta.clone());
        if extend(set, deltas, j, k, &next, distinct, chosen, nodes, budget)? {
            return Ok(true);
        }
        chosen.pop();
    }
    Ok(false)
}

/// `2 * sum_{i<d} binom(m-1, i)`: the most vertices a zonotope with `m` generators in `R^d` can have.
pub fn zonotope_vertex_bound(m: u64, d: u64) -> Result<BigUint> {
    if m == 0 || d == 0 {
        return Err(Error::InvalidInput("m and d must be positive".into()));
    }
    let s: BigUint = (0..d).map(|i| binomial(m - 1, i)).sum();
    Ok(s * 2u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> Point {
        Point::from_ints(v)
    }

    fn diamond() -> Vec<Point> {
        vec![p(&[1, 0]), p(&[-1, 0]), p(&[0, 1]), p(&[0, -1])]
    }

    fn square() -> Vec<Point> {
        vec![p(&[1, 1]), p(&[1, -1]), p(&[-1, 1]), p(&[-1, -1])]
    }

    #[test]
    fn convex_position_examples() {
        assert!(!is_convex_position(&[p(&[0, 0]), p(&[1, 0]), p(&[2, 0])]).unwrap());
        assert!(is_convex_position(&square()).unwrap());
        assert!(!is_convex_position(&[p(&[0, 0]), p(&[3, 0]), p(&[0, 3]), p(&[1, 1])]).unwrap());
        assert!(!is_convex_position(&[p(&[0, 0]), p(&[0, 0])]).unwrap());
        assert!(is_convex_position(&[p(&[5])]).unwrap());
        assert!(is_convex_position(&[]).is_err());
    }

    #[test]
    fn normal_examples() {
        let v = supporting_normal(&diamond(), &p(&[1, 0])).unwrap();
        for y in diamond().iter().skip(1) {
            assert!(v.dot(&(y - &p(&[1, 0]))).is_negative());
        }
        assert_eq!(supporting_normal(&[p(&[2, 3])], &p(&[2, 3])).unwrap(), p(&[1, 0]));
        let line = [p(&[0, 0]), p(&[1, 0]), p(&[2, 0])];
        assert!(matches!(supporting_normal(&line, &p(&[1, 0])), Err(Error::Infeasible(_))));
    }

    #[test]
    fn lp_normal_when_centroid_fails() {
        // The centroid of the others lies beyond the hull edge through x, so the LP decides.
        let pts = [p(&[0, 0]), p(&[100, 1]), p(&[100, -1]), p(&[101, 0])];
        let c = supporting_certificate(&pts, &p(&[100, 1])).unwrap();
        assert!(c.margin.is_some_and(|m| m.is_positive()));
        for y in pts.iter().filter(|y| **y != p(&[100, 1])) {
            assert!(c.normal.dot(&(y - &p(&[100, 1]))).is_negative());
        }
    }

    #[test]
    fn cover_examples() {
        let d = diamond();
        let cover = convex_cover_with_normals(&d, &d).unwrap();
        assert_eq!(cover.part(0, Side::Plus), &[p(&[1, 0])]);
        assert_eq!(cover.part(0, Side::Minus), &[p(&[-1, 0])]);
        assert_eq!(cover.part(1, Side::Plus), &[p(&[0, 1])]);
        assert_eq!(cover.part(1, Side::Minus), &[p(&[0, -1])]);

        let s = square();
        let cover = convex_cover_with_normals(&s, &s).unwrap();
        assert_eq!(cover.part(0, Side::Plus), &[p(&[1, -1]), p(&[1, 1])]);
        assert!(cover.parts.iter().all(|part| part.points.len() == 2));

        let single = convex_cover(&[p(&[0, 0, 0])]).unwrap();
        assert_eq!(single.parts.len(), 6);
        assert_eq!(single.union(), vec![p(&[0, 0, 0])]);

        let cover = convex_cover(&s).unwrap();
        assert_eq!(cover.union(), {
            let mut v = s.clone();
            v.sort();
            v
        });
    }

    #[test]
    fn bad_configuration_examples() {
        let b = Budget::default();
        let line: Vec<Point> = (0..4).map(|x| p(&[x])).collect();
        let w = bad_configuration_search(&line, 2, &b).unwrap().unwrap();
        assert_eq!(w.pairs, vec![[p(&[0]), p(&[1])], [p(&[0]), p(&[2])]]);

        let tri = [p(&[0, 0]), p(&[1, 0]), p(&[0, 1])];
        assert_eq!(bad_configuration_search(&tri, 2, &b).unwrap(), None);
        assert_eq!(bad_configuration_search(&[], 2, &b).unwrap(), None);
        assert_eq!(bad_configuration_search(&[p(&[1])], 2, &b).unwrap(), None);

        // Only a degenerate witness exists in an arithmetic progression of length 3.
        let ap = [p(&[0]), p(&[1]), p(&[2])];
        let w = bad_configuration_search(&ap, 2, &b).unwrap().unwrap();
        assert!(!w.has_distinct_sums());
    }

    #[test]
    fn zonotope_bounds() {
        assert_eq!(zonotope_vertex_bound(3, 2).unwrap(), BigUint::from(6u32));
        assert_eq!(zonotope_vertex_bound(1, 1).unwrap(), BigUint::from(2u32));
        for d in 1..8u64 {
            let expected = (BigUint::from(1u32) << (d + 1) as usize) - 2u32;
            assert_eq!(zonotope_vertex_bound(d + 1, d).unwrap(), expected);
        }
    }

    #[test]
    fn hull_of_square_with_centre() {
        let mut pts = square();
        pts.push(p(&[0, 0]));
        pts.push(p(&[1, 1]));
        let h = hull_vertices(&pts).unwrap();
        assert_eq!(h.len(), 4);
        assert!(is_convex_position(&h).unwrap());
    }

    #[test]
    fn planar_hull_agrees_with_lp() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..40 {
            let k = rng.gen_range(1..14);
            let mut pts: Vec<Point> = (0..k)
                .map(|_| p(&[rng.gen_range(-4..=4), rng.gen_range(-4..=4)]))
                .collect();
            pts.sort();
            pts.dedup();
            let by_lp: Vec<Point> = pts.iter().filter(|x| normal_at(&pts, x).is_some()).cloned().collect();
            assert_eq!(hull_vertices(&pts).unwrap(), by_lp, "{pts:?}");
        }
    }
}
