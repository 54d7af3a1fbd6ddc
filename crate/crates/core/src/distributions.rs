//! Exact laws of Rademacher sums `a_1 xi_1 + ... + a_n xi_n`.
//!
//! Coefficients are scaled to a common integer lattice (the lcm of all
//! coordinate denominators) so the convolution works on `i128` keys and
//! `u128` sign counts; a law over `n` signs stores counts over `2^n`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::numerics::{
    binomial, default_sqrt_precision, lcm, rational_sqrt_upper, DyadicProbability, Point,
    Rational,
};
use crate::targets::TargetSet;

/// Enumeration caps. Exceeding one is an error, never a silent truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Most coefficients whose full law may be convolved.
    pub max_law_terms: usize,
    /// Most coefficients for per-sign-vector sweeps (influences).
    pub max_sweep_terms: usize,
    /// Most vertex tuples a sum graph or hypergraph may enumerate.
    pub max_tuples: u64,
    /// Most candidate nodes an exhaustive configuration search may visit.
    pub max_search_nodes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_law_terms: 24,
            max_sweep_terms: 20,
            max_tuples: 4_000_000,
            max_search_nodes: 20_000_000,
        }
    }
}

impl Budget {
    pub fn with_max_n(mut self, cap: usize) -> Self {
        self.max_law_terms = self.max_law_terms.min(cap);
        self.max_sweep_terms = self.max_sweep_terms.min(cap);
        self
    }
}

/// Nonzero coefficient vectors `a_1, ..., a_n` in `Q^d`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CoefficientSystem {
    dim: usize,
    coefficients: Vec<Point>,
}

impl CoefficientSystem {
    pub fn new(dim: usize, coefficients: Vec<Point>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        if coefficients.is_empty() {
            return Err(Error::InvalidInput("need at least one coefficient".into()));
        }
        for (i, a) in coefficients.iter().enumerate() {
            a.check_dim(dim)?;
            if a.is_zero() {
                return Err(Error::InvalidInput(format!("coefficient {i} is zero")));
            }
        }
        Ok(CoefficientSystem { dim, coefficients })
    }

    pub fn from_ints(dim: usize, rows: &[&[i64]]) -> Result<Self> {
        Self::new(dim, rows.iter().map(|r| Point::from_ints(r)).collect())
    }

    /// One-dimensional system from integer coefficients.
    pub fn scalar(values: &[i64]) -> Result<Self> {
        Self::new(1, values.iter().map(|&v| Point::from_ints(&[v])).collect())
    }

    /// Uniform integer coordinates in `[-bound, bound]`, zero vectors rejected.
    pub fn random_integer<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize, bound: i64) -> Self {
        assert!(bound >= 1 && n >= 1 && dim >= 1);
        let coefficients = (0..n)
            .map(|_| loop {
                let c: Vec<i64> = (0..dim).map(|_| rng.gen_range(-bound..=bound)).collect();
                if c.iter().any(|&x| x != 0) {
                    break Point::from_ints(&c);
                }
            })
            .collect();
        CoefficientSystem { dim, coefficients }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[Point] {
        &self.coefficients
    }

    pub fn subsystem(&self, indices: &[usize]) -> Result<CoefficientSystem> {
        let coefficients = indices
            .iter()
            .map(|&i| {
                self.coefficients
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidInput(format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        CoefficientSystem::new(self.dim, coefficients)
    }

    pub(crate) fn scale(&self) -> BigInt {
        common_scale(self.coefficients.iter())
    }
}

impl fmt::Debug for CoefficientSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coefficients).finish()
    }
}

#[derive(Serialize, Deserialize)]
struct SystemWire {
    d: usize,
    coefficients: Vec<Point>,
}

impl Serialize for CoefficientSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SystemWire {
            d: self.dim,
            coefficients: self.coefficients.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefficientSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = SystemWire::deserialize(d)?;
        CoefficientSystem::new(wire.d, wire.coefficients).map_err(serde::de::Error::custom)
    }
}

/// How a campaign draws coefficient systems.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SystemGenerator {
    /// Every coefficient is the all-ones vector.
    AllOnes,
    /// Uniform nonzero integer vectors with coordinates in `[-bound, bound]`.
    RandomInteger { bound: i64 },
}

impl SystemGenerator {
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, dim: usize) -> Result<CoefficientSystem> {
        if n == 0 || dim == 0 {
            return Err(Error::InvalidInput("n and d must be positive".into()));
        }
        match self {
            SystemGenerator::AllOnes => {
                CoefficientSystem::new(dim, vec![Point::from_ints(&vec![1; dim]); n])
            }
            SystemGenerator::RandomInteger { bound } if *bound >= 1 => {
                Ok(CoefficientSystem::random_integer(rng, n, dim, *bound))
            }
            SystemGenerator::RandomInteger { bound } => Err(Error::InvalidInput(format!(
                "coordinate bound must be >= 1, got {bound}"
            ))),
        }
    }
}

pub(crate) fn common_scale<'a>(points: impl Iterator<Item = &'a Point>) -> BigInt {
    let mut scale = BigInt::one();
    for p in points {
        for c in p.coords() {
            scale = lcm(&scale, c.denom());
        }
    }
    scale
}

pub(crate) fn to_lattice(p: &Point, scale: &BigInt) -> Option<Vec<i128>> {
    p.coords()
        .iter()
        .map(|c| {
            let scaled = c.as_big() * num_rational::BigRational::from_integer(scale.clone());
            if scaled.is_integer() {
                scaled.to_integer().to_i128()
            } else {
                None
            }
        })
        .collect()
}

pub(crate) fn from_lattice(v: &[i128], scale: &BigInt) -> Point {
    Point::new(
        v.iter()
            .map(|&x| Rational::new(BigInt::from(x), scale.clone()).expect("positive scale"))
            .collect(),
    )
    .expect("dim >= 1")
}

/// Exact law of a signed sum: point -> probability, all masses positive.
///
/// Entries are kept sorted lexicographically by point, so iteration order,
/// equality and exports are canonical.
#[derive(Clone, PartialEq, Eq)]
pub struct SupportDistribution {
    dim: usize,
    scale: BigInt,
    exponent: u32,
    entries: Vec<(Vec<i128>, u128)>,
}

impl SupportDistribution {
    /// Law of the empty sum: all mass at the origin.
    pub fn point_mass_at_origin(dim: usize) -> Self {
        SupportDistribution {
            dim,
            scale: BigInt::one(),
            exponent: 0,
            entries: vec![(vec![0; dim], 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// Number of signs this law was convolved from (masses are counts over `2^exponent`).
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, DyadicProbability)> + '_ {
        self.entries.iter().map(move |(v, c)| {
            (
                from_lattice(v, &self.scale),
                DyadicProbability::new(*c, self.exponent),
            )
        })
    }

    pub fn points(&self) -> Vec<Point> {
        self.entries
            .iter()
            .map(|(v, _)| from_lattice(v, &self.scale))
            .collect()
    }

    pub fn masses(&self) -> Vec<DyadicProbability> {
        self.entries
            .iter()
            .map(|(_, c)| DyadicProbability::new(*c, self.exponent))
            .collect()
    }

    pub fn mass(&self, x: &Point) -> DyadicProbability {
        if x.dim() != self.dim {
            return DyadicProbability::zero();
        }
        let Some(key) = to_lattice(x, &self.scale) else {
            return DyadicProbability::zero();
        };
        match self.entries.binary_search_by(|(v, _)| v.as_slice().cmp(&key)) {
            Ok(i) => DyadicProbability::new(self.entries[i].1, self.exponent),
            Err(_) => DyadicProbability::zero(),
        }
    }

    pub fn total_mass(&self) -> DyadicProbability {
        let total: u128 = self.entries.iter().map(|(_, c)| *c).sum();
        DyadicProbability::new(total, self.exponent)
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries.iter().all(|(v, c)| {
            let neg: Vec<i128> = v.iter().map(|x| -x).collect();
            self.entries
                .binary_search_by(|(w, _)| w.as_slice().cmp(&neg))
                .is_ok_and(|i| self.entries[i].1 == *c)
        })
    }

    pub(crate) fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub(crate) fn lattice_entries(&self) -> &[(Vec<i128>, u128)] {
        &self.entries
    }

    /// Entries re-expressed over a multiple of the current scale.
    pub(crate) fn lattice_at(&self, scale: &BigInt) -> Result<Vec<(Vec<i128>, u128)>> {
        let (factor, rem) = scale.div_rem(&self.scale);
        if !rem.is_zero() {
            return Err(Error::InvalidInput("scale is not a multiple".into()));
        }
        let factor = factor.to_i128().ok_or(Error::Overflow)?;
        self.entries
            .iter()
            .map(|(v, c)| {
                let w = v
                    .iter()
                    .map(|x| x.checked_mul(factor).ok_or(Error::Overflow))
                    .collect::<Result<Vec<_>>>()?;
                Ok((w, *c))
            })
            .collect()
    }

    /// Rows for a byte-stable export: `(point, mass)` in sorted order.
    pub fn export(&self) -> Vec<MassEntry> {
        self.iter()
            .map(|(point, mass)| MassEntry { point, mass })
            .collect()
    }
}

impl fmt::Debug for SupportDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.iter()).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassEntry {
    pub point: Point,
    pub mass: DyadicProbability,
}

impl Serialize for SupportDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            d: usize,
            support: Vec<MassEntry>,
        }
        Wire {
            d: self.dim,
            support: self.export(),
        }
        .serialize(s)
    }
}

/// Incremental two-point convolution on a fixed lattice.
pub(crate) struct Convolver {
    dim: usize,
    scale: BigInt,
    steps: u32,
    mass: HashMap<Vec<i128>, u128>,
}

impl Convolver {
    pub(crate) fn new(dim: usize, scale: BigInt) -> Self {
        let mut mass = HashMap::new();
        mass.insert(vec![0; dim], 1);
        Convolver {
            dim,
            scale,
            steps: 0,
            mass,
        }
    }

    pub(crate) fn push(&mut self, a: &Point) -> Result<()> {
        let step = to_lattice(a, &self.scale).ok_or(Error::Overflow)?;
        if self.steps >= 127 {
            return Err(Error::Overflow);
        }
        let mut next: HashMap<Vec<i128>, u128> = HashMap::with_capacity(self.mass.len() * 2);
        for (x, c) in &self.mass {
            for sign in [1i128, -1] {
                let y = x
                    .iter()
                    .zip(&step)
                    .map(|(xi, ai)| xi.checked_add(sign * ai).ok_or(Error::Overflow))
                    .collect::<Result<Vec<_>>>()?;
                *next.entry(y).or_insert(0) += c;
            }
        }
        self.mass = next;
        self.steps += 1;
        Ok(())
    }

    /// Point concentration of the current partial sum, as a count over `2^steps`.
    pub(crate) fn max_count(&self) -> u128 {
        self.mass.values().copied().max().unwrap_or(0)
    }

    pub(crate) fn rho(&self) -> DyadicProbability {
        DyadicProbability::new(self.max_count(), self.steps)
    }

    pub(crate) fn finish(&self) -> SupportDistribution {
        let mut entries: Vec<(Vec<i128>, u128)> =
            self.mass.iter().map(|(k, v)| (k.clone(), *v)).collect();
        // Canonical lattice: divide out any common factor of scale and coordinates.
        let mut g = self.scale.clone();
        for (v, _) in &entries {
            for x in v {
                if g.is_one() {
                    break;
                }
                g = g.gcd(&BigInt::from(*x));
            }
        }
        let scale = if g.is_one() {
            self.scale.clone()
        } else {
            let gi = g.to_i128().expect("divides a small coordinate or the scale");
            for (v, _) in entries.iter_mut() {
                for x in v.iter_mut() {
                    *x /= gi;
                }
            }
            &self.scale / &g
        };
        entries.sort_unstable();
        SupportDistribution {
            dim: self.dim,
            scale,
            exponent: self.steps,
            entries,
        }
    }
}

fn check_law_budget(terms: usize, budget: &Budget) -> Result<()> {
    if terms > budget.max_law_terms {
        return Err(Error::BudgetExceeded {
            what: "full law",
            required: terms as u64,
            cap: budget.max_law_terms as u64,
        });
    }
    Ok(())
}

/// Law of `sum_{j in subset} a_j xi_j` (indices are 0-based).
pub fn support_distribution(
    cs: &CoefficientSystem,
    subset: &[usize],
    budget: &Budget,
) -> Result<SupportDistribution> {
    if subset.is_empty() {
        return Err(Error::InvalidInput("subset must be nonempty".into()));
    }
    let mut seen = vec![false; cs.len()];
    for &i in subset {
        if i >= cs.len() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidInput(format!(
                "index {i} out of range or repeated"
            )));
        }
    }
    check_law_budget(subset.len(), budget)?;
    let scale = common_scale(subset.iter().map(|&i| &cs.coefficients[i]));
    let mut conv = Convolver::new(cs.dim, scale);
    for &i in subset {
        conv.push(&cs.coefficients[i])?;
    }
    Ok(conv.finish())
}

/// Law of the full sum.
pub fn full_distribution(cs: &CoefficientSystem, budget: &Budget) -> Result<SupportDistribution> {
    let all: Vec<usize> = (0..cs.len()).collect();
    support_distribution(cs, &all, budget)
}

/// Law of `X + Y` for independent `X ~ a`, `Y ~ b`.
pub fn convolve(a: &SupportDistribution, b: &SupportDistribution) -> Result<SupportDistribution> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    let scale = lcm(&a.scale, &b.scale);
    let la = a.lattice_at(&scale)?;
    let lb = b.lattice_at(&scale)?;
    let mut mass: HashMap<Vec<i128>, u128> = HashMap::new();
    for (x, cx) in &la {
        for (y, cy) in &lb {
            let z = x
                .iter()
                .zip(y)
                .map(|(p, q)| p.checked_add(*q).ok_or(Error::Overflow))
                .collect::<Result<Vec<_>>>()?;
            let c = cx.checked_mul(*cy).ok_or(Error::Overflow)?;
            *mass.entry(z).or_insert(0) += c;
        }
    }
    let conv = Convolver {
        dim: a.dim,
        scale,
        steps: a.exponent + b.exponent,
        mass,
    };
    Ok(conv.finish())
}

/// Maximum point mass and its lexicographically smallest witness.
pub fn rho(dist: &SupportDistribution) -> (DyadicProbability, Point) {
    let mut best: Option<&(Vec<i128>, u128)> = None;
    for e in &dist.entries {
        // Entries are sorted, so a strict comparison keeps the smallest witness.
        if best.is_none_or(|b| e.1 > b.1) {
            best = Some(e);
        }
    }
    let (v, c) = best.expect("a distribution has nonempty support");
    (
        DyadicProbability::new(*c, dist.exponent),
        from_lattice(v, &dist.scale),
    )
}

/// Point concentration of a coefficient subsystem.
pub fn rho_of(cs: &CoefficientSystem, subset: &[usize], budget: &Budget) -> Result<DyadicProbability> {
    Ok(rho(&support_distribution(cs, subset, budget)?).0)
}

/// `Pr(X in S)` summed exactly over the support.
pub fn hit_probability(dist: &SupportDistribution, target: &TargetSet) -> Result<DyadicProbability> {
    if target.dim() != dist.dim {
        return Err(Error::DimensionMismatch {
            expected: dist.dim,
            found: target.dim(),
        });
    }
    let mut hits: u128 = 0;
    for (v, c) in &dist.entries {
        if target.contains(&from_lattice(v, &dist.scale))? {
            hits += c;
        }
    }
    Ok(DyadicProbability::new(hits, dist.exponent))
}

/// The classical sharp point-concentration bound `binom(n, n/2) / 2^n`.
pub fn elo_bound(n: u32) -> DyadicProbability {
    DyadicProbability::new(binomial(n as u64, (n / 2) as u64), n)
}

/// Disjoint nonempty blocks covering `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexPartition {
    blocks: Vec<Vec<usize>>,
}

impl IndexPartition {
    pub fn new(blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidInput("empty block".into()));
            }
            for &i in b {
                if i >= n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidInput(format!(
                        "index {i} repeated or out of range"
                    )));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidInput("blocks do not cover every index".into()));
        }
        Ok(IndexPartition { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// A level `radicand^(1/root)`, compared exactly by powering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootLevel {
    pub radicand: Rational,
    pub root: u32,
}

impl RootLevel {
    pub fn exact(value: Rational) -> Self {
        RootLevel {
            radicand: value,
            root: 1,
        }
    }

    /// `rho^(1/m)`.
    pub fn root_of(value: &DyadicProbability, m: u32) -> Self {
        RootLevel {
            radicand: value.to_rational(),
            root: m,
        }
    }

    /// `level <= p`
    pub fn at_most(&self, p: &Rational) -> bool {
        self.radicand <= p.pow(self.root)
    }

    /// `p <= factor * level`
    pub fn bounds_scaled(&self, p: &Rational, factor: &Rational) -> bool {
        (p / factor).pow(self.root) <= self.radicand
    }

    pub fn below_half(&self) -> bool {
        self.radicand < Rational::new(1, BigInt::one() << self.root as usize).expect("nonzero")
    }
}

impl From<&DyadicProbability> for RootLevel {
    fn from(d: &DyadicProbability) -> Self {
        RootLevel::exact(d.to_rational())
    }
}

/// Which hypothesis of the anti-concentrated partition construction failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionFailure {
    NoLevels,
    LevelNotBelowHalf { index: usize },
    ConcentrationAboveProduct,
    NoCut { block: usize },
    BlockAboveBound { block: usize },
}

impl fmt::Display for PartitionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionFailure::NoLevels => write!(f, "at least one level is required"),
            PartitionFailure::LevelNotBelowHalf { index } => {
                write!(f, "level {index} is not below 1/2")
            }
            PartitionFailure::ConcentrationAboveProduct => {
                write!(f, "rho exceeds the product of the levels")
            }
            PartitionFailure::NoCut { block } => {
                write!(f, "no prefix concentration in [level, 2*level] for block {block}")
            }
            PartitionFailure::BlockAboveBound { block } => {
                write!(f, "block {block} has rho above twice its level")
            }
        }
    }
}

fn partition_error(f: PartitionFailure) -> Error {
    Error::Partition(f)
}

/// Splits `0..n` into `m` consecutive blocks with `rho(block_j) <= 2 lambda_j`,
/// given `lambda_j < 1/2` and `rho(cs) <= prod lambda_j`.
pub fn partition_anti_concentrated(
    cs: &CoefficientSystem,
    lambdas: &[DyadicProbability],
    budget: &Budget,
) -> Result<IndexPartition> {
    let levels: Vec<RootLevel> = lambdas.iter().map(RootLevel::from).collect();
    partition_with_levels(cs, &levels, budget)
}

/// [`partition_anti_concentrated`] for levels given as exact roots.
pub fn partition_with_levels(
    cs: &CoefficientSystem,
    levels: &[RootLevel],
    budget: &Budget,
) -> Result<IndexPartition> {
    if levels.is_empty() {
        return Err(partition_error(PartitionFailure::NoLevels));
    }
    if let Some(index) = levels.iter().position(|l| !l.below_half()) {
        return Err(partition_error(PartitionFailure::LevelNotBelowHalf { index }));
    }
    let n = cs.len();
    let all: Vec<usize> = (0..n).collect();
    let rho_all = rho_of(cs, &all, budget)?.to_rational();
    if !rho_below_product(&rho_all, levels) {
        return Err(partition_error(PartitionFailure::ConcentrationAboveProduct));
    }

    let two = Rational::from_integer(2);
    let scale = cs.scale();
    let mut blocks = Vec::with_capacity(levels.len());
    let mut start = 0;
    for (j, level) in levels.iter().enumerate() {
        if j + 1 == levels.len() {
            blocks.push((start..n).collect::<Vec<_>>());
            break;
        }
        // The remaining suffix must still satisfy the hypothesis for the
        // remaining levels; Facts 2.1-2.3 guarantee it, so a failure here
        // means the input or an invariant is broken.
        let suffix: Vec<usize> = (start..n).collect();
        let rho_suffix = rho_of(cs, &suffix, budget)?.to_rational();
        if !rho_below_product(&rho_suffix, &levels[j..]) {
            return Err(partition_error(PartitionFailure::ConcentrationAboveProduct));
        }
        let mut conv = Convolver::new(cs.dim, scale.clone());
        let mut cut = None;
        for i in start..n {
            conv.push(&cs.coefficients[i])?;
            let p = conv.rho().to_rational();
            if level.at_most(&p) && level.bounds_scaled(&p, &two) {
                cut = Some(i + 1);
                break;
            }
        }
        match cut {
            Some(end) if end < n => {
                blocks.push((start..end).collect());
                start = end;
            }
            _ => return Err(partition_error(PartitionFailure::NoCut { block: j })),
        }
    }

    for (j, (block, level)) in blocks.iter().zip(levels).enumerate() {
        let r = rho_of(cs, block, budget)?.to_rational();
        if !level.bounds_scaled(&r, &two) {
            return Err(partition_error(PartitionFailure::BlockAboveBound { block: j }));
        }
    }
    IndexPartition::new(blocks, n)
}

/// `rho <= prod_j radicand_j^(1/root_j)`, decided by raising to the lcm of the roots.
fn rho_below_product(rho: &Rational, levels: &[RootLevel]) -> bool {
    let l = levels.iter().fold(1u32, |acc, lv| acc.lcm(&lv.root));
    let rhs = levels
        .iter()
        .fold(Rational::one(), |acc, lv| acc * lv.radicand.pow(l / lv.root));
    rho.pow(l) <= rhs
}

/// Robust-spanning hypothesis and the measured statistic `rho * n^(d/2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HalaszReport {
    pub robustly_spanning: bool,
    pub rho: DyadicProbability,
    /// Upper-rounded `rho * n^(d/2)`.
    pub statistic: Rational,
}

/// Whether no proper linear subspace holds more than half of the coefficients.
pub fn robustly_spanning(cs: &CoefficientSystem) -> bool {
    let d = cs.dim;
    let n = cs.len();
    let vs = cs.coefficients();
    if linalg::rank(vs) < d {
        return false;
    }
    if d == 1 {
        return true;
    }
    // Any proper subspace holding a set of coefficients extends, inside the
    // span of all coefficients, to a hyperplane spanned by coefficients.
    let mut best = 0usize;
    let mut chosen = Vec::with_capacity(d - 1);
    hyperplanes(vs, d, 0, &mut chosen, &mut |normal| {
        let inside = vs.iter().filter(|v| v.dot(normal).is_zero()).count();
        best = best.max(inside);
    });
    2 * best <= n
}

fn hyperplanes(
    vs: &[Point],
    d: usize,
    from: usize,
    chosen: &mut Vec<Point>,
    visit: &mut dyn FnMut(&Point),
) {
    if chosen.len() == d - 1 {
        let normals = linalg::null_space(chosen, d);
        if normals.len() == 1 {
            visit(&normals[0]);
        }
        return;
    }
    for i in from..vs.len() {
        chosen.push(vs[i].clone());
        if linalg::rank(chosen) == chosen.len() {
            hyperplanes(vs, d, i + 1, chosen, visit);
        }
        chosen.pop();
    }
}

pub fn halasz_statistic(cs: &CoefficientSystem, budget: &Budget) -> Result<HalaszReport> {
    let (rho, _) = rho(&full_distribution(cs, budget)?);
    let n = Rational::from_integer(cs.len() as i64);
    let d = cs.dim as u32;
    let mut factor = n.pow(d / 2);
    if d % 2 == 1 {
        factor = factor * rational_sqrt_upper(&n, &default_sqrt_precision());
    }
    Ok(HalaszReport {
        robustly_spanning: robustly_spanning(cs),
        statistic: rho.to_rational() * factor,
        rho,
    })
}
