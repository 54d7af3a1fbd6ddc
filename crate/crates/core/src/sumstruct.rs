//! Sum graphs and hypergraphs, weighted Kővári–Sós–Turán checks, bounded
//! complexity hypergraph bounds, Minkowski bad configurations and GAPs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    full_distribution, hit_probability, partition_with_levels, rho, support_distribution, Budget,
    CoefficientSystem, IndexPartition, RootLevel, SupportDistribution,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::numerics::{
    binomial, default_sqrt_precision, lcm, rational_sqrt_upper, root_power_compare,
    DyadicProbability, Point, Rational,
};
use crate::targets::{LatticeMembership, TargetSet};

/// Vertex weights of one part, as counts over a shared power of two.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Weights {
    counts: Vec<u128>,
    exponent: u32,
}

impl Weights {
    fn from_dyadics(ws: &[DyadicProbability]) -> Result<Self> {
        let exponent = ws.iter().map(DyadicProbability::exponent).max().unwrap_or(0);
        if exponent > 126 {
            return Err(Error::Overflow);
        }
        let counts = ws
            .iter()
            .map(|w| {
                w.numerator_at(exponent)
                    .and_then(|c| c.to_u128())
                    .ok_or(Error::Overflow)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Weights { counts, exponent })
    }

    fn from_law(dist: &SupportDistribution) -> Self {
        Weights {
            counts: dist.lattice_entries().iter().map(|(_, c)| *c).collect(),
            exponent: dist.exponent(),
        }
    }

    fn len(&self) -> usize {
        self.counts.len()
    }

    fn get(&self, i: usize) -> DyadicProbability {
        DyadicProbability::new(self.counts[i], self.exponent)
    }

    fn total_is_one(&self) -> bool {
        let total: u128 = self.counts.iter().sum();
        total == 1u128 << self.exponent
    }

    fn max(&self) -> DyadicProbability {
        DyadicProbability::new(self.counts.iter().copied().max().unwrap_or(0), self.exponent)
    }
}

/// A weighted bipartite graph `A ∪ B` with adjacency stored as bitsets over `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedBipartiteGraph {
    left: Weights,
    right: Weights,
    adjacency: Vec<Vec<u64>>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl WeightedBipartiteGraph {
    /// Both parts must carry total weight exactly 1.
    pub fn new(
        left: &[DyadicProbability],
        right: &[DyadicProbability],
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        let left = Weights::from_dyadics(left)?;
        let right = Weights::from_dyadics(right)?;
        if !left.total_is_one() || !right.total_is_one() {
            return Err(Error::InvalidInput("each part must have total weight 1".into()));
        }
        let mut adjacency = vec![vec![0u64; words(right.len())]; left.len()];
        for &(a, b) in edges {
            if a >= left.len() || b >= right.len() {
                return Err(Error::InvalidInput(format!("edge ({a}, {b}) out of range")));
            }
            adjacency[a][b / 64] |= 1 << (b % 64);
        }
        Ok(WeightedBipartiteGraph {
            left,
            right,
            adjacency,
        })
    }

    /// Random graph with edge density `p` and random positive weights with
    /// denominator `2^exponent` (needs `2^exponent >= ` each part size).
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        left_size: usize,
        right_size: usize,
        p: f64,
        exponent: u32,
    ) -> Result<Self> {
        let left = random_weights(rng, left_size, exponent)?;
        let right = random_weights(rng, right_size, exponent)?;
        let mut edges = Vec::new();
        for a in 0..left_size {
            for b in 0..right_size {
                if rng.gen_bool(p) {
                    edges.push((a, b));
                }
            }
        }
        Self::new(&left, &right, &edges)
    }

    pub fn left_len(&self) -> usize {
        self.left.len()
    }

    pub fn right_len(&self) -> usize {
        self.right.len()
    }

    pub fn left_weight(&self, a: usize) -> DyadicProbability {
        self.left.get(a)
    }

    pub fn right_weight(&self, b: usize) -> DyadicProbability {
        self.right.get(b)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b / 64] >> (b % 64) & 1 == 1
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.left_len() {
            for b in 0..self.right_len() {
                if self.adjacent(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency
            .iter()
            .flatten()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    fn row_weight(&self, row: &[u64]) -> u128 {
        let mut total = 0u128;
        for (i, &w) in row.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                total += self.right.counts[i * 64 + j];
                bits &= bits - 1;
            }
        }
        total
    }

    /// `sum_{a ~ b} w(a) w(b)`.
    pub fn weight(&self) -> DyadicProbability {
        let mut total = BigUint::zero();
        for (a, row) in self.adjacency.iter().enumerate() {
            total += BigUint::from(self.left.counts[a]) * BigUint::from(self.row_weight(row));
        }
        DyadicProbability::new(total, self.left.exponent + self.right.exponent)
    }

    /// `sum_{a ~ b} w(b)`, the left part left unweighted.
    pub fn unweighted_left_weight(&self) -> Rational {
        let total: BigUint = self
            .adjacency
            .iter()
            .map(|row| BigUint::from(self.row_weight(row)))
            .sum();
        DyadicProbability::new(total, self.right.exponent).to_rational()
    }

    /// Weight of the vertices of `B` adjacent to every vertex in `subset`.
    pub fn common_neighborhood_weight(&self, subset: &[usize]) -> Result<DyadicProbability> {
        if subset.is_empty() {
            return Err(Error::InvalidInput("vertex set must be nonempty".into()));
        }
        let mut row = vec![!0u64; words(self.right_len())];
        for &a in subset {
            if a >= self.left_len() {
                return Err(Error::InvalidInput(format!("vertex {a} out of range")));
            }
            for (r, w) in row.iter_mut().zip(&self.adjacency[a]) {
                *r &= w;
            }
        }
        Ok(DyadicProbability::new(self.row_weight(&row), self.right.exponent))
    }

    /// Largest common-neighbourhood weight over `t`-subsets of `A`, with a witness.
    pub fn max_common_neighborhood(&self, t: usize) -> Result<(DyadicProbability, Vec<usize>)> {
        if t == 0 || t > self.left_len() {
            return Err(Error::InvalidInput(format!(
                "t = {t} must lie in 1..={}",
                self.left_len()
            )));
        }
        let mut order: Vec<usize> = (0..self.left_len()).collect();
        order.sort_by(|&a, &b| self.left.counts[b].cmp(&self.left.counts[a]).then(a.cmp(&b)));
        let full = vec![!0u64; words(self.right_len())];
        let mut best: Option<(u128, Vec<usize>)> = None;
        let mut chosen = Vec::with_capacity(t);
        self.scan_subsets(&order, 0, t, &full, &mut chosen, &mut best);
        let (count, mut witness) = best.expect("t <= |A| so some subset exists");
        witness.sort_unstable();
        Ok((DyadicProbability::new(count, self.right.exponent), witness))
    }

    fn scan_subsets(
        &self,
        order: &[usize],
        from: usize,
        t: usize,
        row: &[u64],
        chosen: &mut Vec<usize>,
        best: &mut Option<(u128, Vec<usize>)>,
    ) {
        if chosen.len() == t {
            let w = self.row_weight(row);
            if best.as_ref().is_none_or(|(b, _)| w > *b) {
                *best = Some((w, chosen.clone()));
            }
            return;
        }
        let need = t - chosen.len();
        for k in from..=order.len() - need {
            let a = order[k];
            let next: Vec<u64> = row.iter().zip(&self.adjacency[a]).map(|(x, y)| x & y).collect();
            // Intersections only shrink, so a branch already at or below the best cannot win.
            if let Some((b, _)) = best {
                if self.row_weight(&next) <= *b {
                    continue;
                }
            }
            chosen.push(a);
            self.scan_subsets(order, k + 1, t, &next, chosen, best);
            chosen.pop();
        }
    }

    pub fn kst_check(&self, t: usize) -> Result<KstReport> {
        let (q, witness) = self.max_common_neighborhood(t)?;
        let weight = self.weight();
        let rho = self.left.max();
        let w = weight.to_rational();
        let qr = q.to_rational();
        let rr = rho.to_rational();
        let tt = Rational::from_integer(t as i64);
        let t32 = t as u32;

        let slack = &w - &(&tt * &rr);
        let strong_ok = !slack.is_positive() || root_power_compare(&slack, &qr, t32);

        let weak_weight = self.unweighted_left_weight();
        let n = Rational::from_integer(self.left_len() as i64);
        let excess = &weak_weight - &(&tt - &Rational::one());
        let weak_ok =
            !excess.is_positive() || root_power_compare(&excess, &(&qr * &n.pow(t32)), t32);

        let pairs = Rational::from_integer(BigInt::from(binomial(t as u64, 2)));
        let decoupling_ok = root_power_compare(&w, &(&qr + &(pairs * rr)), t32);

        Ok(KstReport {
            t,
            weight,
            q,
            q_witness: witness,
            rho,
            left_size: self.left_len(),
            unweighted_left_weight: weak_weight,
            strong_ok,
            weak_ok,
            decoupling_ok,
        })
    }
}

fn random_weights<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    exponent: u32,
) -> Result<Vec<DyadicProbability>> {
    if k == 0 || exponent > 62 || (1u64 << exponent) < k as u64 {
        return Err(Error::InvalidInput(format!(
            "cannot split 2^{exponent} into {k} positive parts"
        )));
    }
    let total = 1u64 << exponent;
    let mut cuts: Vec<u64> = sample(rng, (total - 1) as usize, k - 1)
        .into_iter()
        .map(|c| c as u64 + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(total);
    let mut prev = 0;
    Ok(cuts
        .into_iter()
        .map(|c| {
            let w = DyadicProbability::new(c - prev, exponent);
            prev = c;
            w
        })
        .collect())
}

/// Exact quantities behind the weighted Kővári–Sós–Turán inequalities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KstReport {
    pub t: usize,
    /// `w(G)`
    pub weight: DyadicProbability,
    pub q: DyadicProbability,
    pub q_witness: Vec<usize>,
    pub rho: DyadicProbability,
    pub left_size: usize,
    pub unweighted_left_weight: Rational,
    /// `w(G) <= q^(1/t) + t rho`
    pub strong_ok: bool,
    /// `sum_{a~b} w(b) <= q^(1/t) |A| + t - 1`
    pub weak_ok: bool,
    /// `w(G) <= (q + binom(t, 2) rho)^(1/t)`
    pub decoupling_ok: bool,
}

impl KstReport {
    pub fn all_ok(&self) -> bool {
        self.strong_ok && self.weak_ok && self.decoupling_ok
    }
}

/// Bipartite sum graph: `x ~ y` iff `x + y ∈ S`, weighted by the two laws.
#[derive(Clone, Debug)]
pub struct WeightedSumGraph {
    left: Vec<Point>,
    right: Vec<Point>,
    graph: WeightedBipartiteGraph,
    target: TargetSet,
}

impl WeightedSumGraph {
    pub fn left(&self) -> &[Point] {
        &self.left
    }

    pub fn right(&self) -> &[Point] {
        &self.right
    }

    pub fn graph(&self) -> &WeightedBipartiteGraph {
        &self.graph
    }

    pub fn target(&self) -> &TargetSet {
        &self.target
    }

    pub fn edges(&self) -> Vec<(Point, Point)> {
        self.graph
            .edges()
            .into_iter()
            .map(|(a, b)| (self.left[a].clone(), self.right[b].clone()))
            .collect()
    }

    fn left_index(&self, x: &Point) -> Result<usize> {
        self.left
            .binary_search(x)
            .map_err(|_| Error::InvalidInput(format!("{x} is not a vertex of V1")))
    }
}

pub fn build_sum_graph(
    d1: &SupportDistribution,
    d2: &SupportDistribution,
    target: &TargetSet,
    budget: &Budget,
) -> Result<WeightedSumGraph> {
    let h = build_sum_hypergraph(&[d1.clone(), d2.clone()], target, budget)?;
    h.to_graph()
}

pub fn graph_weight(g: &WeightedSumGraph) -> DyadicProbability {
    g.graph.weight()
}

pub fn common_neighborhood_weight(g: &WeightedSumGraph, subset: &[Point]) -> Result<DyadicProbability> {
    let idx = subset
        .iter()
        .map(|x| g.left_index(x))
        .collect::<Result<Vec<_>>>()?;
    g.graph.common_neighborhood_weight(&idx)
}

pub fn kst_check(g: &WeightedSumGraph, t: usize) -> Result<KstReport> {
    g.graph.kst_check(t)
}

/// `m`-partite sum hypergraph: `(v_1, ..., v_m)` is an edge iff `v_1 + ... + v_m ∈ S`.
#[derive(Clone, Debug)]
pub struct WeightedSumHypergraph {
    parts: Vec<Vec<Point>>,
    weights: Vec<Weights>,
    /// Vertex-index tuples in lexicographic order.
    edges: Vec<Vec<u32>>,
    target: TargetSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HyperedgeExport {
    pub vertices: Vec<Point>,
    pub weight: DyadicProbability,
}

impl WeightedSumHypergraph {
    /// Hypergraph on explicit weighted parts (each part totalling weight 1).
    pub fn from_parts(
        parts: Vec<Vec<(Point, DyadicProbability)>>,
        target: &TargetSet,
        budget: &Budget,
    ) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidInput("need at least one part".into()));
        }
        let mut points = Vec::with_capacity(parts.len());
        let mut weights = Vec::with_capacity(parts.len());
        for mut part in parts {
            part.sort_by(|a, b| a.0.cmp(&b.0));
            if part.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidInput("repeated vertex in a part".into()));
            }
            part.retain(|(_, w)| !w.is_zero());
            let ws: Vec<DyadicProbability> = part.iter().map(|(_, w)| w.clone()).collect();
            let w = Weights::from_dyadics(&ws)?;
            if !w.total_is_one() {
                return Err(Error::InvalidInput("each part must have total weight 1".into()));
            }
            for (p, _) in &part {
                p.check_dim(target.dim())?;
            }
            points.push(part.into_iter().map(|(p, _)| p).collect::<Vec<_>>());
            weights.push(w);
        }
        let scale = points
            .iter()
            .flatten()
            .fold(BigInt::from(1), |acc, p| {
                p.coords().iter().fold(acc, |acc, c| lcm(&acc, c.denom()))
            });
        let lattices = points
            .iter()
            .map(|part| {
                part.iter()
                    .map(|p| crate::distributions::to_lattice(p, &scale).ok_or(Error::Overflow))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = enumerate_edges(&lattices, target, scale, budget)?;
        Ok(WeightedSumHypergraph {
            parts: points,
            weights,
            edges,
            target: target.clone(),
        })
    }

    pub fn uniformity(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<Point>] {
        &self.parts
    }

    pub fn vertex_weight(&self, part: usize, v: usize) -> DyadicProbability {
        self.weights[part].get(v)
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn target(&self) -> &TargetSet {
        &self.target
    }

    /// `sum over edges of prod_i w(v_i)`.
    pub fn weight(&self) -> DyadicProbability {
        let mut total = BigUint::zero();
        for e in &self.edges {
            let mut prod = BigUint::from(1u32);
            for (i, &v) in e.iter().enumerate() {
                prod *= self.weights[i].counts[v as usize];
            }
            total += prod;
        }
        let exponent = self.weights.iter().map(|w| w.exponent).sum();
        DyadicProbability::new(total, exponent)
    }

    /// Largest single vertex weight over all parts.
    pub fn max_vertex_weight(&self) -> DyadicProbability {
        self.weights.iter().map(Weights::max).max().expect("m >= 1")
    }

    pub fn export(&self) -> Vec<HyperedgeExport> {
        self.edges
            .iter()
            .map(|e| HyperedgeExport {
                vertices: e
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| self.parts[i][v as usize].clone())
                    .collect(),
                weight: e
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| self.weights[i].get(v as usize))
                    .fold(DyadicProbability::one(), |acc, w| acc * w),
            })
            .collect()
    }

    /// The bipartite view of a 2-uniform hypergraph.
    pub fn to_graph(&self) -> Result<WeightedSumGraph> {
        if self.uniformity() != 2 {
            return Err(Error::InvalidInput("only 2-uniform hypergraphs are graphs".into()));
        }
        let mut adjacency = vec![vec![0u64; words(self.parts[1].len())]; self.parts[0].len()];
        for e in &self.edges {
            let (a, b) = (e[0] as usize, e[1] as usize);
            adjacency[a][b / 64] |= 1 << (b % 64);
        }
        Ok(WeightedSumGraph {
            left: self.parts[0].clone(),
            right: self.parts[1].clone(),
            graph: WeightedBipartiteGraph {
                left: self.weights[0].clone(),
                right: self.weights[1].clone(),
                adjacency,
            },
            target: self.target.clone(),
        })
    }

    /// Checks, recursively, that `decompose` splits this hypergraph into at most
    /// `bound` pieces whose pairwise common links again have complexity `bound`.
    ///
    /// A `false` answer means this decomposition failed, not that the
    /// complexity exceeds `bound`.
    pub fn certify_complexity<F>(&self, bound: usize, decompose: &F) -> bool
    where
        F: Fn(&[Vec<u32>]) -> Vec<Vec<Vec<u32>>>,
    {
        certify(&self.edges, self.uniformity(), bound, decompose)
    }
}

/// The trivial decomposition `H = H_1`.
pub fn identity_decomposition(edges: &[Vec<u32>]) -> Vec<Vec<Vec<u32>>> {
    vec![edges.to_vec()]
}

fn certify<F>(edges: &[Vec<u32>], arity: usize, bound: usize, decompose: &F) -> bool
where
    F: Fn(&[Vec<u32>]) -> Vec<Vec<Vec<u32>>>,
{
    if arity == 1 {
        return edges.len() <= bound;
    }
    let pieces = decompose(edges);
    if pieces.len() > bound {
        return false;
    }
    let all: BTreeSet<&Vec<u32>> = edges.iter().collect();
    let covered: BTreeSet<&Vec<u32>> = pieces.iter().flatten().collect();
    if all != covered {
        return false;
    }
    pieces.iter().all(|piece| {
        let links = links_by_first(piece);
        let heads: Vec<&u32> = links.keys().collect();
        heads.iter().enumerate().all(|(i, x)| {
            heads[i + 1..].iter().all(|y| {
                let common: Vec<Vec<u32>> = links[*x].intersection(&links[*y]).cloned().collect();
                certify(&common, arity - 1, bound, decompose)
            })
        })
    })
}

fn links_by_first(edges: &[Vec<u32>]) -> BTreeMap<u32, BTreeSet<Vec<u32>>> {
    let mut links: BTreeMap<u32, BTreeSet<Vec<u32>>> = BTreeMap::new();
    for e in edges {
        links.entry(e[0]).or_default().insert(e[1..].to_vec());
    }
    links
}

fn enumerate_edges(
    lattices: &[Vec<Vec<i128>>],
    target: &TargetSet,
    scale: BigInt,
    budget: &Budget,
) -> Result<Vec<Vec<u32>>> {
    let tuples = lattices
        .iter()
        .try_fold(1u64, |acc, p| acc.checked_mul(p.len() as u64))
        .unwrap_or(u64::MAX);
    if tuples > budget.max_tuples {
        return Err(Error::BudgetExceeded {
            what: "sum hypergraph tuples",
            required: tuples,
            cap: budget.max_tuples,
        });
    }
    let dim = target.dim();
    let mut membership = LatticeMembership::new(target, scale);
    let mut edges = Vec::new();
    let mut chosen = Vec::with_capacity(lattices.len());
    let origin = vec![0i128; dim];
    walk_tuples(lattices, &origin, &mut chosen, &mut membership, &mut edges)?;
    Ok(edges)
}

fn walk_tuples(
    lattices: &[Vec<Vec<i128>>],
    partial: &[i128],
    chosen: &mut Vec<u32>,
    membership: &mut LatticeMembership<'_>,
    edges: &mut Vec<Vec<u32>>,
) -> Result<()> {
    let depth = chosen.len();
    if depth == lattices.len() {
        if membership.contains(partial)? {
            edges.push(chosen.clone());
        }
        return Ok(());
    }
    for (i, v) in lattices[depth].iter().enumerate() {
        let next = partial
            .iter()
            .zip(v)
            .map(|(a, b)| a.checked_add(*b).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        chosen.push(i as u32);
        walk_tuples(lattices, &next, chosen, membership, edges)?;
        chosen.pop();
    }
    Ok(())
}

pub fn build_sum_hypergraph(
    dists: &[SupportDistribution],
    target: &TargetSet,
    budget: &Budget,
) -> Result<WeightedSumHypergraph> {
    if dists.is_empty() {
        return Err(Error::InvalidInput("need at least one part".into()));
    }
    for d in dists {
        if d.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                found: d.dim(),
            });
        }
    }
    let scale = dists
        .iter()
        .fold(BigInt::from(1), |acc, d| lcm(&acc, d.scale()));
    let lattices = dists
        .iter()
        .map(|d| Ok(d.lattice_at(&scale)?.into_iter().map(|(v, _)| v).collect()))
        .collect::<Result<Vec<Vec<Vec<i128>>>>>()?;
    let edges = enumerate_edges(&lattices, target, scale, budget)?;
    Ok(WeightedSumHypergraph {
        parts: dists.iter().map(SupportDistribution::points).collect(),
        weights: dists.iter().map(Weights::from_law).collect(),
        edges,
        target: target.clone(),
    })
}

/// Pairs `A_1, ..., A_k` whose Minkowski sum lies inside a set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadConfiguration {
    pub pairs: Vec<[Point; 2]>,
}

impl BadConfiguration {
    pub fn new(pairs: Vec<[Point; 2]>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidInput("need at least one pair".into()));
        }
        let dim = pairs[0][0].dim();
        for [a, b] in &pairs {
            a.check_dim(dim)?;
            b.check_dim(dim)?;
            if a == b {
                return Err(Error::InvalidInput(format!("pair ({a}, {b}) is degenerate")));
            }
        }
        Ok(BadConfiguration { pairs })
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    /// All `2^k` sums, with multiplicity, in sign-pattern order.
    pub fn sums(&self) -> Vec<Point> {
        let mut sums = vec![Point::origin(self.pairs[0][0].dim())];
        for pair in &self.pairs {
            sums = sums
                .iter()
                .flat_map(|s| pair.iter().map(move |p| s + p))
                .collect();
        }
        sums
    }

    /// The sumset `A_1 + ... + A_k`, deduplicated and sorted.
    pub fn sumset(&self) -> Vec<Point> {
        let mut s = self.sums();
        s.sort();
        s.dedup();
        s
    }

    pub fn has_distinct_sums(&self) -> bool {
        self.sumset().len() == 1 << self.k()
    }

    pub fn lies_in(&self, target: &TargetSet) -> Result<bool> {
        for p in self.sumset() {
            if !target.contains(&p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for BadConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pairs
            .iter()
            .map(|[a, b]| format!("{{{a}, {b}}}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A `K^(m)_{2,...,2}` in the hypergraph, re-verified against `S`.
///
/// Witnesses whose `2^m` sums are pairwise distinct are preferred; a
/// degenerate one (repeated sums) is returned only when no other exists.
pub fn k222_witness(h: &WeightedSumHypergraph, budget: &Budget) -> Result<Option<BadConfiguration>> {
    let mut nodes = 0u64;
    for distinct in [true, false] {
        let accept = |chosen: &[[u32; 2]]| {
            let cfg = to_configuration(h, chosen);
            !distinct || cfg.has_distinct_sums()
        };
        let mut chosen = Vec::with_capacity(h.uniformity());
        if search_k2(&h.edges, &mut chosen, &accept, &mut nodes, budget)? {
            let cfg = to_configuration(h, &chosen);
            if !cfg.lies_in(&h.target)? {
                return Err(Error::InvalidInput(format!(
                    "witness {cfg} failed re-verification"
                )));
            }
            return Ok(Some(cfg));
        }
    }
    Ok(None)
}

fn to_configuration(h: &WeightedSumHypergraph, chosen: &[[u32; 2]]) -> BadConfiguration {
    BadConfiguration {
        pairs: chosen
            .iter()
            .enumerate()
            .map(|(i, [a, b])| {
                [
                    h.parts[i][*a as usize].clone(),
                    h.parts[i][*b as usize].clone(),
                ]
            })
            .collect(),
    }
}

fn bump(nodes: &mut u64, budget: &Budget) -> Result<()> {
    *nodes += 1;
    if *nodes > budget.max_search_nodes {
        return Err(Error::BudgetExceeded {
            what: "configuration search nodes",
            required: *nodes,
            cap: budget.max_search_nodes,
        });
    }
    Ok(())
}

fn search_k2(
    edges: &[Vec<u32>],
    chosen: &mut Vec<[u32; 2]>,
    accept: &dyn Fn(&[[u32; 2]]) -> bool,
    nodes: &mut u64,
    budget: &Budget,
) -> Result<bool> {
    let Some(first) = edges.first() else {
        return Ok(false);
    };
    if first.len() == 1 {
        let vs: Vec<u32> = edges.iter().map(|e| e[0]).collect::<BTreeSet<_>>().into_iter().collect();
        for (i, &a) in vs.iter().enumerate() {
            for &b in &vs[i + 1..] {
                bump(nodes, budget)?;
                chosen.push([a, b]);
                if accept(chosen) {
                    return Ok(true);
                }
                chosen.pop();
            }
        }
        return Ok(false);
    }
    let links = links_by_first(edges);
    let heads: Vec<u32> = links.keys().copied().collect();
    for (i, &x) in heads.iter().enumerate() {
        for &y in &heads[i + 1..] {
            bump(nodes, budget)?;
            let common: Vec<Vec<u32>> = links[&x].intersection(&links[&y]).cloned().collect();
            if common.len() < 2 {
                continue;
            }
            chosen.push([x, y]);
            if search_k2(&common, chosen, accept, nodes, budget)? {
                return Ok(true);
            }
            chosen.pop();
        }
    }
    Ok(false)
}

/// Certified upper bound for the hypergraph constant: `C_{M,1} = M`,
/// `C_{M,m} = M (sqrt(C_{M,m-1}) + 2)` with square roots rounded up.
pub fn hypergraph_bound_constant(complexity: u32, m: u32) -> Result<Rational> {
    if complexity == 0 || m == 0 {
        return Err(Error::InvalidInput("M and m must be positive".into()));
    }
    let big_m = Rational::from_integer(complexity as i64);
    let two = Rational::from_integer(2);
    let precision = default_sqrt_precision();
    let mut c = big_m.clone();
    for _ in 1..m {
        c = &big_m * &(rational_sqrt_upper(&c, &precision) + two.clone());
    }
    Ok(c)
}

/// `w(H) <= C_{1,m} lambda^(1/2^(m-1))` for a hypergraph of complexity 1.
pub fn hypergraph_bound_holds(h: &WeightedSumHypergraph) -> Result<bool> {
    let m = h.uniformity() as u32;
    let c = hypergraph_bound_constant(1, m)?;
    let ratio = h.weight().to_rational() / c;
    Ok(root_power_compare(&ratio, &h.max_vertex_weight().to_rational(), 1 << (m - 1)))
}

/// Everything computed while checking the point-concentration bound for `Pr(X ∈ S)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelativeBoundReport {
    pub m: u32,
    pub rho: DyadicProbability,
    pub probability: DyadicProbability,
    pub partition: IndexPartition,
    pub block_rhos: Vec<DyadicProbability>,
    pub lambda: DyadicProbability,
    pub hypergraph_weight: DyadicProbability,
    pub edge_count: usize,
    pub constant: Rational,
    /// `w(H) = Pr(X ∈ S)`
    pub identity_ok: bool,
    /// `w(H) <= C lambda^(1/2^(m-1))`
    pub hypergraph_bound_ok: bool,
    /// `Pr(X ∈ S) <= C (2 rho^(1/m))^(1/2^(m-1))`
    pub corollary_ok: bool,
}

impl RelativeBoundReport {
    pub fn all_ok(&self) -> bool {
        self.identity_ok && self.hypergraph_bound_ok && self.corollary_ok
    }
}

/// Partitions with levels `rho^(1/m)`, builds the sum hypergraph over the
/// blocks and, when it is `K_{2,...,2}`-free, verifies the bounds exactly.
pub fn relative_bound_check(
    cs: &CoefficientSystem,
    target: &TargetSet,
    m: u32,
    budget: &Budget,
) -> Result<RelativeBoundReport> {
    if m == 0 || m as usize > cs.len() {
        return Err(Error::InvalidInput(format!("m = {m} must lie in 1..={}", cs.len())));
    }
    let full = full_distribution(cs, budget)?;
    let (rho_all, _) = rho(&full);
    let threshold = DyadicProbability::pow2_neg(m);
    if rho_all >= threshold {
        return Err(Error::Precondition(format!(
            "rho = {rho_all} is not below 2^-{m}, so rho^(1/{m}) < 1/2 fails"
        )));
    }
    let levels = vec![RootLevel::root_of(&rho_all, m); m as usize];
    let partition = partition_with_levels(cs, &levels, budget)?;
    let dists = partition
        .blocks()
        .iter()
        .map(|b| support_distribution(cs, b, budget))
        .collect::<Result<Vec<_>>>()?;
    let block_rhos: Vec<DyadicProbability> = dists.iter().map(|d| rho(d).0).collect();
    let h = build_sum_hypergraph(&dists, target, budget)?;
    if let Some(w) = k222_witness(&h, budget)? {
        return Err(Error::BadConfiguration(Box::new(w)));
    }
    let probability = hit_probability(&full, target)?;
    let hypergraph_weight = h.weight();
    let constant = hypergraph_bound_constant(1, m)?;
    let lambda = h.max_vertex_weight();
    let hypergraph_bound_ok = root_power_compare(
        &(hypergraph_weight.to_rational() / constant.clone()),
        &lambda.to_rational(),
        1 << (m - 1),
    );
    let two_m = Rational::from_integer(BigInt::from(1) << m as usize);
    let corollary_ok = root_power_compare(
        &(probability.to_rational() / constant.clone()),
        &(two_m * rho_all.to_rational()),
        m << (m - 1),
    );
    Ok(RelativeBoundReport {
        m,
        identity_ok: hypergraph_weight == probability,
        rho: rho_all,
        probability,
        partition,
        block_rhos,
        lambda,
        edge_count: h.edges.len(),
        hypergraph_weight,
        constant,
        hypergraph_bound_ok,
        corollary_ok,
    })
}

/// How the two blocks of a generic-intersection check were chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    /// Levels `rho^(1/(d+1))`, `rho^(d/(d+1))`.
    AntiConcentrated,
    /// First half / second half, used when `rho` is too large for the levels.
    Halves,
}

/// Quantities behind `Pr(X ∈ S) <= (M lambda_2)^(1/t) + t lambda_1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GipBoundReport {
    pub split: SplitKind,
    pub partition: IndexPartition,
    pub lambda1: DyadicProbability,
    pub lambda2: DyadicProbability,
    pub probability: DyadicProbability,
    pub graph_weight: DyadicProbability,
    pub kst: KstReport,
    /// `w(G) = Pr(X ∈ S)`
    pub identity_ok: bool,
    /// `q <= M lambda_2`
    pub intersection_ok: bool,
    pub bound_ok: bool,
}

impl GipBoundReport {
    pub fn all_ok(&self) -> bool {
        self.identity_ok && self.intersection_ok && self.bound_ok && self.kst.all_ok()
    }
}

/// Verifies the two-part bound for a set whose `t` distinct translates meet
/// in at most `intersection_bound` points.
pub fn gip_bound_check(
    cs: &CoefficientSystem,
    target: &TargetSet,
    intersection_bound: u32,
    t: usize,
    budget: &Budget,
) -> Result<GipBoundReport> {
    let n = cs.len();
    if n < 2 {
        return Err(Error::InvalidInput("need n >= 2 for a two-block split".into()));
    }
    let full = full_distribution(cs, budget)?;
    let (rho_all, _) = rho(&full);
    let d = cs.dim() as u32;
    let r = rho_all.to_rational();
    let levels = [
        RootLevel {
            radicand: r.clone(),
            root: d + 1,
        },
        RootLevel {
            radicand: r.pow(d),
            root: d + 1,
        },
    ];
    let (split, partition) = if levels[0].below_half() {
        (SplitKind::AntiConcentrated, partition_with_levels(cs, &levels, budget)?)
    } else {
        let half = n / 2;
        (
            SplitKind::Halves,
            IndexPartition::new(vec![(0..half).collect(), (half..n).collect()], n)?,
        )
    };
    let d1 = support_distribution(cs, &partition.blocks()[0], budget)?;
    let d2 = support_distribution(cs, &partition.blocks()[1], budget)?;
    let lambda1 = rho(&d1).0;
    let lambda2 = rho(&d2).0;
    let g = build_sum_graph(&d1, &d2, target, budget)?;
    let graph_weight = graph_weight(&g);
    let probability = hit_probability(&full, target)?;
    let t_eff = t.min(g.graph.left_len());
    let kst = kst_check(&g, t_eff)?;

    let big_m = Rational::from_integer(intersection_bound as i64);
    let m_lambda2 = &big_m * &lambda2.to_rational();
    let intersection_ok = t_eff < t || kst.q.to_rational() <= m_lambda2;
    let tt = Rational::from_integer(t as i64);
    let slack = probability.to_rational() - tt * lambda1.to_rational();
    let bound_ok = !slack.is_positive() || root_power_compare(&slack, &m_lambda2, t as u32);
    Ok(GipBoundReport {
        split,
        partition,
        identity_ok: graph_weight == probability,
        lambda1,
        lambda2,
        probability,
        graph_weight,
        kst,
        intersection_ok,
        bound_ok,
    })
}

/// Generalised arithmetic progression `{b + sum r_i v_i : 0 <= r_i < m_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    base: Point,
    generators: Vec<Point>,
    lengths: Vec<u64>,
}

impl Gap {
    /// Generators must be linearly independent, so the rank is their count.
    pub fn new(base: Point, generators: Vec<Point>, lengths: Vec<u64>) -> Result<Self> {
        if generators.len() != lengths.len() {
            return Err(Error::InvalidInput("one length per generator".into()));
        }
        for g in &generators {
            g.check_dim(base.dim())?;
        }
        if lengths.contains(&0) {
            return Err(Error::InvalidInput("lengths must be positive".into()));
        }
        if linalg::rank(&generators) != generators.len() {
            return Err(Error::InvalidInput("generators are linearly dependent".into()));
        }
        Ok(Gap {
            base,
            generators,
            lengths,
        })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn size(&self) -> u64 {
        self.lengths.iter().product()
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        x.check_dim(self.base.dim())?;
        let dim = self.base.dim();
        let target = x - &self.base;
        if self.generators.is_empty() {
            return Ok(target.is_zero());
        }
        // Columns are the generators: solve sum_i r_i v_i = x - b coordinatewise.
        let rows: Vec<Point> = (0..dim)
            .map(|c| {
                Point::new(self.generators.iter().map(|g| g.coords()[c].clone()).collect())
                    .expect("q >= 1")
            })
            .collect();
        let Some(r) = linalg::solve(&rows, target.coords(), self.rank()) else {
            return Ok(false);
        };
        Ok(r.coords().iter().zip(&self.lengths).all(|(ri, &m)| {
            ri.is_integer() && !ri.is_negative() && ri < &Rational::from_integer(m as i64)
        }))
    }

    pub fn enumerate(&self, budget: &Budget) -> Result<Vec<Point>> {
        let size = self
            .lengths
            .iter()
            .try_fold(1u64, |acc, &m| acc.checked_mul(m))
            .unwrap_or(u64::MAX);
        if size > budget.max_tuples {
            return Err(Error::BudgetExceeded {
                what: "GAP enumeration",
                required: size,
                cap: budget.max_tuples,
            });
        }
        let mut out = vec![self.base.clone()];
        for (g, &m) in self.generators.iter().zip(&self.lengths) {
            let mut next = Vec::with_capacity(out.len() * m as usize);
            for p in &out {
                let mut q = p.clone();
                for _ in 0..m {
                    next.push(q.clone());
                    q = &q + g;
                }
            }
            out = next;
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

pub fn gap_membership(q: &Gap, x: &Point) -> Result<bool> {
    q.contains(x)
}

pub fn gap_enumerate(q: &Gap, budget: &Budget) -> Result<Vec<Point>> {
    q.enumerate(budget)
}
