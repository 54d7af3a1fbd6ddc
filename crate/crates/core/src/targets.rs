//! Target sets `S` with exact membership over rational points.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::distributions::{from_lattice, to_lattice, CoefficientSystem};
use crate::error::{Error, Result};
use crate::linalg;
use crate::numerics::{binomial, Point, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: Rational,
    pub exponents: Vec<u32>,
}

/// Sparse polynomial in `dim` variables with rational coefficients.
///
/// Terms are merged, stripped of zero coefficients and sorted by exponent
/// vector, so structurally equal polynomials compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<Monomial>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("polynomial needs >= 1 variable".into()));
        }
        let mut merged: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for t in terms {
            if t.exponents.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.exponents.len(),
                });
            }
            let slot = merged.entry(t.exponents).or_insert_with(Rational::zero);
            *slot = &*slot + &t.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exponents, coeff)| Monomial { coeff, exponents })
            .collect();
        Ok(Polynomial { dim, terms })
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        Polynomial::new(
            dim,
            vec![Monomial {
                coeff: c,
                exponents: vec![0; dim],
            }],
        )
        .expect("well-formed")
    }

    /// The affine function `<normal, x> + offset`.
    pub fn affine(normal: &Point, offset: Rational) -> Self {
        let dim = normal.dim();
        let mut terms = vec![Monomial {
            coeff: offset,
            exponents: vec![0; dim],
        }];
        for (i, c) in normal.coords().iter().enumerate() {
            let mut e = vec![0; dim];
            e[i] = 1;
            terms.push(Monomial {
                coeff: c.clone(),
                exponents: e,
            });
        }
        Polynomial::new(dim, terms).expect("well-formed")
    }

    /// `|x - center|^2 - radius2`.
    pub fn sphere(center: &Point, radius2: &Rational) -> Self {
        let dim = center.dim();
        let mut terms = vec![Monomial {
            coeff: center.norm2() - radius2,
            exponents: vec![0; dim],
        }];
        for (i, c) in center.coords().iter().enumerate() {
            let mut sq = vec![0; dim];
            sq[i] = 2;
            terms.push(Monomial {
                coeff: Rational::one(),
                exponents: sq,
            });
            let mut lin = vec![0; dim];
            lin[i] = 1;
            terms.push(Monomial {
                coeff: -(c * &Rational::from_integer(2)),
                exponents: lin,
            });
        }
        Polynomial::new(dim, terms).expect("well-formed")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.exponents.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &Point) -> Rational {
        self.terms
            .iter()
            .map(|t| {
                t.exponents
                    .iter()
                    .zip(x.coords())
                    .fold(t.coeff.clone(), |acc, (&e, xi)| acc * xi.pow(e))
            })
            .sum()
    }

    /// `y -> p(y + v)`.
    pub fn shift(&self, v: &Point) -> Polynomial {
        let mut acc: Vec<Monomial> = Vec::new();
        for t in &self.terms {
            // Expand prod_i (y_i + v_i)^{e_i} one variable at a time.
            let mut partial = vec![(t.coeff.clone(), vec![0u32; self.dim])];
            for (i, &e) in t.exponents.iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len() * (e as usize + 1));
                for (c, exps) in &partial {
                    for k in 0..=e {
                        let b = Rational::from_integer(BigInt::from(binomial(e as u64, k as u64)));
                        let factor = b * v.coords()[i].pow(e - k);
                        if factor.is_zero() {
                            continue;
                        }
                        let mut ex = exps.clone();
                        ex[i] = k;
                        next.push((c * &factor, ex));
                    }
                }
                partial = next;
            }
            acc.extend(
                partial
                    .into_iter()
                    .map(|(coeff, exponents)| Monomial { coeff, exponents }),
            );
        }
        Polynomial::new(self.dim, acc).expect("same dimension")
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

/// Boolean combination of sign conditions on polynomials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    /// `p = 0`
    Zero(Vec<Monomial>),
    /// `p > 0`
    Positive(Vec<Monomial>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

/// Formula with parsed polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    Zero(Polynomial),
    Positive(Polynomial),
    Not(Box<Condition>),
    And(Vec<Condition>),
    Or(Vec<Condition>),
}

impl Condition {
    pub fn nonnegative(p: Polynomial) -> Self {
        Condition::Or(vec![Condition::Positive(p.clone()), Condition::Zero(p)])
    }

    fn from_formula(dim: usize, f: Formula) -> Result<Self> {
        Ok(match f {
            Formula::Zero(t) => Condition::Zero(Polynomial::new(dim, t)?),
            Formula::Positive(t) => Condition::Positive(Polynomial::new(dim, t)?),
            Formula::Not(inner) => Condition::Not(Box::new(Self::from_formula(dim, *inner)?)),
            Formula::And(fs) => Condition::And(
                fs.into_iter()
                    .map(|f| Self::from_formula(dim, f))
                    .collect::<Result<_>>()?,
            ),
            Formula::Or(fs) => Condition::Or(
                fs.into_iter()
                    .map(|f| Self::from_formula(dim, f))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    fn to_formula(&self) -> Formula {
        match self {
            Condition::Zero(p) => Formula::Zero(p.terms.clone()),
            Condition::Positive(p) => Formula::Positive(p.terms.clone()),
            Condition::Not(c) => Formula::Not(Box::new(c.to_formula())),
            Condition::And(cs) => Formula::And(cs.iter().map(Condition::to_formula).collect()),
            Condition::Or(cs) => Formula::Or(cs.iter().map(Condition::to_formula).collect()),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Condition::Zero(p) | Condition::Positive(p) if p.dim != dim => {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim,
                })
            }
            Condition::Zero(_) | Condition::Positive(_) => Ok(()),
            Condition::Not(c) => c.check_dim(dim),
            Condition::And(cs) | Condition::Or(cs) => cs.iter().try_for_each(|c| c.check_dim(dim)),
        }
    }

    pub fn eval(&self, x: &Point) -> bool {
        match self {
            Condition::Zero(p) => p.eval(x).is_zero(),
            Condition::Positive(p) => p.eval(x).is_positive(),
            Condition::Not(c) => !c.eval(x),
            Condition::And(cs) => cs.iter().all(|c| c.eval(x)),
            Condition::Or(cs) => cs.iter().any(|c| c.eval(x)),
        }
    }

    fn shift(&self, v: &Point) -> Condition {
        match self {
            Condition::Zero(p) => Condition::Zero(p.shift(v)),
            Condition::Positive(p) => Condition::Positive(p.shift(v)),
            Condition::Not(c) => Condition::Not(Box::new(c.shift(v))),
            Condition::And(cs) => Condition::And(cs.iter().map(|c| c.shift(v)).collect()),
            Condition::Or(cs) => Condition::Or(cs.iter().map(|c| c.shift(v)).collect()),
        }
    }

    /// `(atom count, max atom degree)`.
    fn atom_stats(&self) -> (usize, u32) {
        match self {
            Condition::Zero(p) | Condition::Positive(p) => (1, p.degree()),
            Condition::Not(c) => c.atom_stats(),
            Condition::And(cs) | Condition::Or(cs) => cs
                .iter()
                .map(Condition::atom_stats)
                .fold((0, 0), |(n, d), (n2, d2)| (n + n2, d.max(d2))),
        }
    }
}

/// A target set. Every variant has decidable membership for rational points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TargetSet {
    Sphere { center: Point, radius2: Rational },
    Hypersurface { polynomial: Polynomial },
    SemiAlgebraic { dim: usize, condition: Condition },
    Finite { dim: usize, points: Vec<Point> },
}

impl TargetSet {
    pub fn sphere(center: Point, radius2: Rational) -> Result<Self> {
        if !radius2.is_positive() {
            return Err(Error::InvalidInput(format!(
                "sphere radius^2 must be positive, got {radius2}"
            )));
        }
        Ok(TargetSet::Sphere { center, radius2 })
    }

    /// Centred circle or sphere of radius^2 `r2`.
    pub fn centered_sphere(dim: usize, r2: i64) -> Result<Self> {
        Self::sphere(Point::origin(dim), Rational::from_integer(r2))
    }

    pub fn hypersurface(polynomial: Polynomial) -> Self {
        TargetSet::Hypersurface { polynomial }
    }

    pub fn semi_algebraic(dim: usize, condition: Condition) -> Result<Self> {
        condition.check_dim(dim)?;
        Ok(TargetSet::SemiAlgebraic { dim, condition })
    }

    pub fn finite(dim: usize, mut points: Vec<Point>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        for p in &points {
            p.check_dim(dim)?;
        }
        points.sort();
        points.dedup();
        Ok(TargetSet::Finite { dim, points })
    }

    pub fn empty(dim: usize) -> Self {
        TargetSet::Finite {
            dim,
            points: Vec::new(),
        }
    }

    /// Closed segment between `x` and `y` as a semi-algebraic set: the 2x2
    /// minors of `(z - x, y - x)` vanish and `z` lies between the endpoints.
    pub fn segment(x: &Point, y: &Point) -> Result<Self> {
        y.check_dim(x.dim())?;
        if x == y {
            return Err(Error::InvalidInput("segment endpoints coincide".into()));
        }
        let dim = x.dim();
        let dir = y - x;
        let mut atoms = Vec::new();
        for i in 0..dim {
            for j in i + 1..dim {
                // (z_i - x_i) dir_j - (z_j - x_j) dir_i
                let mut normal = vec![Rational::zero(); dim];
                normal[i] = dir.coords()[j].clone();
                normal[j] = -&dir.coords()[i];
                let normal = Point::new(normal)?;
                let offset = -normal.dot(x);
                atoms.push(Condition::Zero(Polynomial::affine(&normal, offset)));
            }
        }
        atoms.push(Condition::nonnegative(Polynomial::affine(&dir, -dir.dot(x))));
        atoms.push(Condition::nonnegative(Polynomial::affine(&-&dir, dir.dot(y))));
        Self::semi_algebraic(dim, Condition::And(atoms))
    }

    pub fn dim(&self) -> usize {
        match self {
            TargetSet::Sphere { center, .. } => center.dim(),
            TargetSet::Hypersurface { polynomial } => polynomial.dim,
            TargetSet::SemiAlgebraic { dim, .. } | TargetSet::Finite { dim, .. } => *dim,
        }
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        x.check_dim(self.dim())?;
        Ok(match self {
            TargetSet::Sphere { center, radius2 } => &(x - center).norm2() == radius2,
            TargetSet::Hypersurface { polynomial } => polynomial.eval(x).is_zero(),
            TargetSet::SemiAlgebraic { condition, .. } => condition.eval(x),
            TargetSet::Finite { points, .. } => points.binary_search(x).is_ok(),
        })
    }

    /// `S - v`, so that `y in S - v` iff `y + v in S`.
    pub fn translate(&self, v: &Point) -> Result<TargetSet> {
        v.check_dim(self.dim())?;
        Ok(match self {
            TargetSet::Sphere { center, radius2 } => TargetSet::Sphere {
                center: center - v,
                radius2: radius2.clone(),
            },
            TargetSet::Hypersurface { polynomial } => TargetSet::Hypersurface {
                polynomial: polynomial.shift(v),
            },
            TargetSet::SemiAlgebraic { dim, condition } => TargetSet::SemiAlgebraic {
                dim: *dim,
                condition: condition.shift(v),
            },
            TargetSet::Finite { dim, points } => TargetSet::Finite {
                dim: *dim,
                points: points.iter().map(|p| p - v).collect(),
            },
        })
    }

    /// Semi-algebraic description of this set.
    pub fn to_condition(&self) -> Condition {
        match self {
            TargetSet::Sphere { center, radius2 } => {
                Condition::Zero(Polynomial::sphere(center, radius2))
            }
            TargetSet::Hypersurface { polynomial } => Condition::Zero(polynomial.clone()),
            TargetSet::SemiAlgebraic { condition, .. } => condition.clone(),
            TargetSet::Finite { points, .. } => Condition::Or(
                points
                    .iter()
                    .map(|p| Condition::Zero(Polynomial::sphere(p, &Rational::zero())))
                    .collect(),
            ),
        }
    }

    pub fn complement(&self) -> TargetSet {
        TargetSet::SemiAlgebraic {
            dim: self.dim(),
            condition: Condition::Not(Box::new(self.to_condition())),
        }
    }

    /// `max(atom count, max degree)` of the semi-algebraic description.
    pub fn description_complexity(&self) -> usize {
        let (atoms, degree) = self.to_condition().atom_stats();
        atoms.max(degree as usize)
    }

    /// Whether the generic intersection property is certified for this set.
    pub fn gip_status(&self) -> GipStatus {
        match self {
            TargetSet::Sphere { center, .. } if matches!(center.dim(), 2 | 3) => {
                GipStatus::Certified { bound: 2 }
            }
            _ => GipStatus::Unverified,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GipStatus {
    Certified { bound: u32 },
    Unverified,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TargetWire {
    Sphere {
        center: Point,
        radius2: Rational,
    },
    Hypersurface {
        d: usize,
        polynomial: Vec<Monomial>,
    },
    SemiAlgebraic {
        d: usize,
        formula: Formula,
    },
    Finite {
        d: usize,
        points: Vec<Point>,
    },
}

impl Serialize for TargetSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = match self {
            TargetSet::Sphere { center, radius2 } => TargetWire::Sphere {
                center: center.clone(),
                radius2: radius2.clone(),
            },
            TargetSet::Hypersurface { polynomial } => TargetWire::Hypersurface {
                d: polynomial.dim,
                polynomial: polynomial.terms.clone(),
            },
            TargetSet::SemiAlgebraic { dim, condition } => TargetWire::SemiAlgebraic {
                d: *dim,
                formula: condition.to_formula(),
            },
            TargetSet::Finite { dim, points } => TargetWire::Finite {
                d: *dim,
                points: points.clone(),
            },
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TargetSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = TargetWire::deserialize(d)?;
        let built = match wire {
            TargetWire::Sphere { center, radius2 } => TargetSet::sphere(center, radius2),
            TargetWire::Hypersurface { d, polynomial } => {
                Polynomial::new(d, polynomial).map(TargetSet::hypersurface)
            }
            TargetWire::SemiAlgebraic { d, formula } => Condition::from_formula(d, formula)
                .and_then(|c| TargetSet::semi_algebraic(d, c)),
            TargetWire::Finite { d, points } => TargetSet::finite(d, points),
        };
        built.map_err(D::Error::custom)
    }
}

/// Memoized membership for lattice points `v / scale`.
pub(crate) struct LatticeMembership<'a> {
    target: &'a TargetSet,
    scale: BigInt,
    sphere: Option<LatticeSphere>,
    cache: HashMap<Vec<i128>, bool>,
}

/// A sphere whose centre sits on the lattice: membership is an integer test.
struct LatticeSphere {
    center: Vec<i128>,
    /// `radius2 * scale^2` when integral; otherwise no lattice point is on the sphere.
    radius2: Option<i128>,
}

impl<'a> LatticeMembership<'a> {
    pub(crate) fn new(target: &'a TargetSet, scale: BigInt) -> Self {
        let sphere = match target {
            TargetSet::Sphere { center, radius2 } => to_lattice(center, &scale).map(|c| {
                let r2 = radius2 * &Rational::from_integer(&scale * &scale);
                LatticeSphere {
                    center: c,
                    radius2: if r2.is_integer() {
                        r2.numer().to_i128()
                    } else {
                        None
                    },
                }
            }),
            _ => None,
        };
        LatticeMembership {
            target,
            scale,
            sphere,
            cache: HashMap::new(),
        }
    }

    pub(crate) fn contains(&mut self, v: &[i128]) -> Result<bool> {
        if let Some(sphere) = &self.sphere {
            if v.len() != sphere.center.len() {
                return Err(Error::DimensionMismatch {
                    expected: sphere.center.len(),
                    found: v.len(),
                });
            }
            let Some(r2) = sphere.radius2 else {
                return Ok(false);
            };
            let mut acc: i128 = 0;
            for (x, c) in v.iter().zip(&sphere.center) {
                let diff = x.checked_sub(*c).ok_or(Error::Overflow)?;
                let sq = diff.checked_mul(diff).ok_or(Error::Overflow)?;
                acc = acc.checked_add(sq).ok_or(Error::Overflow)?;
            }
            return Ok(acc == r2);
        }
        if let Some(&hit) = self.cache.get(v) {
            return Ok(hit);
        }
        let hit = self.target.contains(&from_lattice(v, &self.scale))?;
        self.cache.insert(v.to_vec(), hit);
        Ok(hit)
    }
}

/// `a_1 = (x + y)/2`, `a_i = (x - y)/(2n)` for `i >= 2`: a sum that lands on
/// the segment `[x, y]` whenever `xi_1 = +1`.
pub fn segment_adversary(x: &Point, y: &Point, n: usize) -> Result<CoefficientSystem> {
    y.check_dim(x.dim())?;
    if x == y {
        return Err(Error::InvalidInput("segment endpoints coincide".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("segment adversary needs n >= 2".into()));
    }
    let half = Rational::new(1, 2)?;
    let first = (x + y).scale(&half);
    if first.is_zero() {
        return Err(Error::InvalidInput(
            "segment midpoint is the origin, so a_1 would vanish".into(),
        ));
    }
    let step = (x - y).scale(&Rational::new(1, 2 * n as i64)?);
    let mut coefficients = vec![first];
    coefficients.extend(std::iter::repeat_n(step, n - 1));
    CoefficientSystem::new(x.dim(), coefficients)
}

/// Cardinality of an intersection of translates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum IntersectionCount {
    Finite(u32),
    Infinite,
}

impl fmt::Display for IntersectionCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntersectionCount::Finite(k) => write!(f, "{k}"),
            IntersectionCount::Infinite => write!(f, "INFINITE"),
        }
    }
}

/// `|(S - t_1) ∩ ... ∩ (S - t_k)|` for a circle in `Q^2` or a sphere in `Q^3`.
pub fn sphere_intersection_count(
    sphere: &TargetSet,
    translates: &[Point],
) -> Result<IntersectionCount> {
    let TargetSet::Sphere { center, radius2 } = sphere else {
        return Err(Error::Unsupported(
            "intersection counts are implemented for spheres only".into(),
        ));
    };
    let d = center.dim();
    if !matches!(d, 2 | 3) {
        return Err(Error::Unsupported(format!(
            "sphere intersection counts need d in {{2, 3}}, got {d}"
        )));
    }
    if translates.is_empty() || translates.len() > d {
        return Err(Error::InvalidInput(format!(
            "need between 1 and {d} translates, got {}",
            translates.len()
        )));
    }
    let mut centers = Vec::with_capacity(translates.len());
    for t in translates {
        t.check_dim(d)?;
        centers.push(center - t);
    }
    centers.sort();
    centers.dedup();

    let four_r2 = radius2 * &Rational::from_integer(4);
    match centers.len() {
        1 => Ok(IntersectionCount::Infinite),
        2 => {
            let dist2 = (&centers[0] - &centers[1]).norm2();
            Ok(match dist2.cmp(&four_r2) {
                std::cmp::Ordering::Less if d == 2 => IntersectionCount::Finite(2),
                // Two distinct spheres in Q^3 meet in a circle.
                std::cmp::Ordering::Less => IntersectionCount::Infinite,
                std::cmp::Ordering::Equal => IntersectionCount::Finite(1),
                std::cmp::Ordering::Greater => IntersectionCount::Finite(0),
            })
        }
        _ => {
            // Equal radii: the radical planes are perpendicular bisectors,
            // 2 <c_j - c_0, p> = |c_j|^2 - |c_0|^2.
            let two = Rational::from_integer(2);
            let rows: Vec<Point> = centers[1..]
                .iter()
                .map(|c| (c - &centers[0]).scale(&two))
                .collect();
            let rhs: Vec<Rational> = centers[1..]
                .iter()
                .map(|c| c.norm2() - centers[0].norm2())
                .collect();
            let Some(base) = linalg::solve(&rows, &rhs, d) else {
                return Ok(IntersectionCount::Finite(0));
            };
            let dirs = linalg::null_space(&rows, d);
            debug_assert_eq!(dirs.len(), 1, "three distinct consistent centers span a plane");
            Ok(line_sphere_count(&base, &dirs[0], &centers[0], radius2))
        }
    }
}

/// Points of the line `base + s * dir` on the sphere `|x - center|^2 = radius2`.
fn line_sphere_count(base: &Point, dir: &Point, center: &Point, radius2: &Rational) -> IntersectionCount {
    let w = base - center;
    let a = dir.norm2();
    let half_b = dir.dot(&w);
    let c = w.norm2() - radius2;
    let disc = &half_b * &half_b - &a * &c;
    IntersectionCount::Finite(match disc.signum() {
        1 => 2,
        0 => 1,
        _ => 0,
    })
}

/// `|S ∩ L|` for a circle `S` in `Q^2` and the line `L = point + s * direction`.
pub fn circle_line_intersection_count(
    circle: &TargetSet,
    point: &Point,
    direction: &Point,
) -> Result<u32> {
    let TargetSet::Sphere { center, radius2 } = circle else {
        return Err(Error::Unsupported("circle expected".into()));
    };
    if center.dim() != 2 {
        return Err(Error::Unsupported("circle-line counts are planar".into()));
    }
    point.check_dim(2)?;
    direction.check_dim(2)?;
    if direction.is_zero() {
        return Err(Error::InvalidInput("line direction must be nonzero".into()));
    }
    match line_sphere_count(point, direction, center, radius2) {
        IntersectionCount::Finite(k) => Ok(k),
        IntersectionCount::Infinite => unreachable!("a line meets a circle finitely"),
    }
}
