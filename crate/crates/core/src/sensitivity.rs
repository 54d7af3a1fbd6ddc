//! Influences and average sensitivity of `1_{X in S}` on the sign cube.
//!
//! Sign vectors are indexed by `g in 0..2^n`; bit `j` of `g` set means
//! `xi_j = -1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{common_scale, to_lattice, Budget, CoefficientSystem, SystemGenerator};
use crate::error::{Error, Result};
use crate::numerics::{default_sqrt_precision, rational_sqrt_upper, DyadicProbability, Rational};
use crate::targets::{LatticeMembership, TargetSet};

const CHUNK_BITS: usize = 14;

/// Membership of `X(xi)` in `S` for every sign vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignCube {
    n: usize,
    member: Vec<bool>,
}

impl SignCube {
    pub fn sweep(cs: &CoefficientSystem, target: &TargetSet, budget: &Budget) -> Result<Self> {
        let n = cs.len();
        if n > budget.max_sweep_terms {
            return Err(Error::BudgetExceeded {
                what: "sign-vector sweep",
                required: n as u64,
                cap: budget.max_sweep_terms as u64,
            });
        }
        if target.dim() != cs.dim() {
            return Err(Error::DimensionMismatch {
                expected: cs.dim(),
                found: target.dim(),
            });
        }
        let scale = common_scale(cs.coefficients().iter());
        let steps = cs
            .coefficients()
            .iter()
            .map(|a| to_lattice(a, &scale).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        let low = n.min(CHUNK_BITS);
        let chunks: Vec<Vec<bool>> = (0..1usize << (n - low))
            .into_par_iter()
            .map(|c| sweep_chunk(&steps, cs.dim(), c << low, low, target, &scale))
            .collect::<Result<_>>()?;
        Ok(SignCube {
            n,
            member: chunks.concat(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, g: usize) -> bool {
        self.member[g]
    }

    pub fn member_count(&self) -> u64 {
        self.member.iter().filter(|&&m| m).count() as u64
    }

    pub fn probability(&self) -> DyadicProbability {
        DyadicProbability::new(self.member_count(), self.n as u32)
    }

    /// Number of sign vectors where flipping `xi_i` toggles membership.
    pub fn toggle_count(&self, i: usize) -> u64 {
        let bit = 1usize << i;
        (0..self.member.len())
            .filter(|&g| self.member[g] != self.member[g ^ bit])
            .count() as u64
    }

    /// Every member can leave `S` by flipping some subset of the first `n_low` signs.
    pub fn escapes_within(&self, n_low: usize) -> bool {
        self.member.chunks(1 << n_low).all(|block| {
            let any_in = block.iter().any(|&m| m);
            !any_in || block.iter().any(|&m| !m)
        })
    }
}

fn sweep_chunk(
    steps: &[Vec<i128>],
    dim: usize,
    base: usize,
    low: usize,
    target: &TargetSet,
    scale: &num_bigint::BigInt,
) -> Result<Vec<bool>> {
    let mut membership = LatticeMembership::new(target, scale.clone());
    let mut sum = vec![0i128; dim];
    for (j, a) in steps.iter().enumerate() {
        let negative = base >> j & 1 == 1;
        for (s, x) in sum.iter_mut().zip(a) {
            *s = if negative { s.checked_sub(*x) } else { s.checked_add(*x) }
                .ok_or(Error::Overflow)?;
        }
    }
    let size = 1usize << low;
    let mut out = vec![false; size];
    let mut gray = 0usize;
    out[0] = membership.contains(&sum)?;
    for k in 1..size {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        let now_negative = gray >> j & 1 == 1;
        for (s, x) in sum.iter_mut().zip(&steps[j]) {
            let twice = x.checked_mul(2).ok_or(Error::Overflow)?;
            *s = if now_negative { s.checked_sub(twice) } else { s.checked_add(twice) }
                .ok_or(Error::Overflow)?;
        }
        out[gray] = membership.contains(&sum)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SensitivityReport {
    pub n: usize,
    pub influences: Vec<DyadicProbability>,
    pub average_sensitivity: Rational,
    pub probability: DyadicProbability,
}

impl SensitivityReport {
    pub fn from_cube(cube: &SignCube) -> Self {
        let influences: Vec<DyadicProbability> = (0..cube.n)
            .map(|i| DyadicProbability::new(cube.toggle_count(i), cube.n as u32))
            .collect();
        let average_sensitivity = influences.iter().map(|p| p.to_rational()).sum();
        SensitivityReport {
            n: cube.n,
            influences,
            average_sensitivity,
            probability: cube.probability(),
        }
    }
}

pub fn influence(
    cs: &CoefficientSystem,
    target: &TargetSet,
    i: usize,
    budget: &Budget,
) -> Result<DyadicProbability> {
    if i >= cs.len() {
        return Err(Error::InvalidInput(format!(
            "index {i} out of range for {} coefficients",
            cs.len()
        )));
    }
    let cube = SignCube::sweep(cs, target, budget)?;
    Ok(DyadicProbability::new(cube.toggle_count(i), cube.n as u32))
}

pub fn average_sensitivity(
    cs: &CoefficientSystem,
    target: &TargetSet,
    budget: &Budget,
) -> Result<SensitivityReport> {
    Ok(SensitivityReport::from_cube(&SignCube::sweep(cs, target, budget)?))
}

/// `Pr(X in S) <= 2^N (Inf_1 + ... + Inf_N)`, with the flip-escape precondition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoostingReport {
    pub n_low: usize,
    pub lhs: DyadicProbability,
    pub rhs: Rational,
    pub precondition_ok: bool,
    /// Whether `lhs <= rhs`, reported even when the precondition fails.
    pub ok: bool,
}

impl BoostingReport {
    pub fn from_cube(cube: &SignCube, n_low: usize) -> Result<Self> {
        if n_low > cube.n {
            return Err(Error::InvalidInput(format!(
                "N = {n_low} exceeds n = {}",
                cube.n
            )));
        }
        let lhs = cube.probability();
        let toggles: u64 = (0..n_low).map(|i| cube.toggle_count(i)).sum();
        let rhs = Rational::from_integer(num_bigint::BigInt::from(toggles) << n_low)
            * DyadicProbability::pow2_neg(cube.n as u32).to_rational();
        let ok = lhs.to_rational() <= rhs;
        Ok(BoostingReport {
            n_low,
            lhs,
            rhs,
            precondition_ok: cube.escapes_within(n_low),
            ok,
        })
    }

    /// The inequality fails although the precondition holds.
    pub fn is_violation(&self) -> bool {
        self.precondition_ok && !self.ok
    }
}

pub fn boosting_check(
    cs: &CoefficientSystem,
    target: &TargetSet,
    n_low: usize,
    budget: &Budget,
) -> Result<BoostingReport> {
    BoostingReport::from_cube(&SignCube::sweep(cs, target, budget)?, n_low)
}

/// Smallest `N` whose flip-escape precondition holds, if any.
pub fn minimal_boosting_n(cube: &SignCube) -> Option<usize> {
    (0..=cube.n).find(|&k| cube.escapes_within(k))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlRow {
    pub n: usize,
    pub trials: usize,
    pub max_average_sensitivity: Rational,
    /// `max AS / sqrt(n)`, rounded up.
    pub max_ratio_upper: Rational,
}

/// Largest `AS(1_S) / sqrt(n)` over seeded random systems for each `n`.
///
/// Trial `k` at size `n` draws from a ChaCha8 stream derived from
/// `(seed, n, k)`, so the table depends only on the seed.
pub fn gl_scaling_probe(
    target: &TargetSet,
    generator: &SystemGenerator,
    n_range: std::ops::RangeInclusive<usize>,
    trials: usize,
    seed: u64,
    budget: &Budget,
) -> Result<Vec<GlRow>> {
    let mut rows = Vec::new();
    for n in n_range {
        let mut best: Option<Rational> = None;
        for k in 0..trials {
            let mut rng = instance_rng(seed, ((n as u64) << 32) | k as u64);
            let cs = generator.generate(&mut rng, n, target.dim())?;
            let report = average_sensitivity(&cs, target, budget)?;
            if best.as_ref().is_none_or(|b| report.average_sensitivity > *b) {
                best = Some(report.average_sensitivity);
            }
        }
        let max_as = best.unwrap_or_else(Rational::zero);
        let inv_n = Rational::new(1, n as i64)?;
        let ratio = &max_as * &rational_sqrt_upper(&inv_n, &default_sqrt_precision());
        rows.push(GlRow {
            n,
            trials,
            max_average_sensitivity: max_as,
            max_ratio_upper: ratio,
        });
    }
    Ok(rows)
}

/// Deterministic per-instance generator.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
