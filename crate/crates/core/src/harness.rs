//! Scenario files, verification campaigns and extremal search.

use num_bigint::BigInt;
use num_integer::Integer;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::convexcover::{bad_configuration_search, convex_cover, hull_vertices};
use crate::distributions::{
    elo_bound, full_distribution, halasz_statistic, hit_probability, rho, Budget,
    CoefficientSystem, SystemGenerator,
};
use crate::error::{Error, Result};
use crate::numerics::{default_sqrt_precision, rational_sqrt_upper, DyadicProbability, Rational};
use crate::sensitivity::{instance_rng, minimal_boosting_n, BoostingReport, SensitivityReport, SignCube};
use crate::sumstruct::{build_sum_graph, gip_bound_check, graph_weight, kst_check, relative_bound_check};
use crate::targets::TargetSet;
use crate::distributions::{support_distribution, IndexPartition};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub target: Option<TargetSet>,
    #[serde(default)]
    pub systems: SystemSource,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub budget: Budget,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSource {
    Fixed {
        systems: Vec<CoefficientSystem>,
    },
    /// Instance `i` has `n = n_min + i mod (n_max - n_min + 1)`.
    Generated {
        generator: SystemGenerator,
        d: usize,
        n_min: usize,
        n_max: usize,
        count: usize,
    },
}

impl Default for SystemSource {
    fn default() -> Self {
        SystemSource::Fixed { systems: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// `rho <= binom(n, n/2) / 2^n`.
    Elo,
    /// Weighted KST inequalities and `w(G) = Pr(X in S)` on the halves split.
    Kst { t: usize },
    /// `Pr(X in S) <= (M lambda_2)^(1/t) + t lambda_1`.
    GipBound { t: usize, intersection_bound: u32 },
    /// Hypergraph bound and its corollary with `m` blocks.
    RelativeBound { m: u32 },
    /// The convex cover of the hull vertices of the support of `X`.
    ConvexCover,
    /// `Pr(X in S) <= 2^N sum_{i<N} Inf_i` at the given `N`, or at the smallest escaping `N`.
    Boosting {
        #[serde(default)]
        n_low: Option<usize>,
    },
    /// Influences, with optional complement symmetry; statistic `AS / sqrt(n)`.
    Sensitivity {
        #[serde(default)]
        complement: bool,
    },
    /// Statistic `Pr(X in S) * n^(p/q)`; `q` must be a power of two.
    HitStatistic { p: u32, q: u32 },
    /// Statistic `rho * n^(d/2)` with the robust-spanning flag.
    Halasz,
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::Elo => "elo",
            Check::Kst { .. } => "kst",
            Check::GipBound { .. } => "gip_bound",
            Check::RelativeBound { .. } => "relative_bound",
            Check::ConvexCover => "convex_cover",
            Check::Boosting { .. } => "boosting",
            Check::Sensitivity { .. } => "sensitivity",
            Check::HitStatistic { .. } => "hit_statistic",
            Check::Halasz => "halasz",
        }
    }

    pub fn class(&self) -> SuiteClass {
        match self {
            Check::HitStatistic { .. } | Check::Halasz => SuiteClass::Measurement,
            _ => SuiteClass::Theorem,
        }
    }

    fn needs_target(&self) -> bool {
        !matches!(self, Check::Elo | Check::Halasz | Check::ConvexCover)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteClass {
    Theorem,
    Measurement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Hypotheses not met; the instance is left out with the reason logged.
    Excluded,
    Measured,
    Error,
}

/// `value = base * n^(p/q)`, kept exactly as `value^q` plus an upper rendering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Statistic {
    pub power: u32,
    /// `value^power`, exact.
    pub exact_power: Rational,
    /// Rounded-up value; normative.
    pub upper: Rational,
    /// Rounded-up six-digit decimal; non-normative.
    pub decimal: String,
}

impl Statistic {
    /// `base * n^(p/q)` for `q` a power of two.
    pub fn scaled(base: &Rational, n: u64, p: i32, q: u32) -> Result<Self> {
        if !q.is_power_of_two() {
            return Err(Error::InvalidInput(format!("exponent denominator {q} is not a power of two")));
        }
        let n_q = Rational::from_integer(n as i64);
        let n_p = if p >= 0 {
            n_q.pow(p as u32)
        } else {
            n_q.pow(p.unsigned_abs()).recip()?
        };
        let exact_power = base.pow(q) * n_p.clone();
        let mut root = n_p;
        let mut k = q;
        while k > 1 {
            root = rational_sqrt_upper(&root, &default_sqrt_precision());
            k /= 2;
        }
        let upper = base * &root;
        Ok(Statistic {
            power: q,
            exact_power,
            decimal: decimal_upper(&upper),
            upper,
        })
    }
}

/// Decimal rendering with six digits, rounded toward `+inf`.
pub fn decimal_upper(x: &Rational) -> String {
    let million = BigInt::from(1_000_000);
    let scaled = x.numer() * &million;
    let (q, r) = scaled.div_mod_floor(x.denom());
    let q = if r == BigInt::from(0) { q } else { q + 1 };
    let negative = q < BigInt::from(0);
    let digits = q.magnitude().to_string();
    let padded = format!("{digits:0>7}");
    let (int, frac) = padded.split_at(padded.len() - 6);
    format!("{}{int}.{frac}", if negative { "-" } else { "" })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: &'static str,
    pub class: SuiteClass,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<Statistic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub details: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceReport {
    pub index: usize,
    pub n: usize,
    pub d: usize,
    pub system: CoefficientSystem,
    pub outcomes: Vec<CheckOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extremum {
    /// Position of the check in the scenario.
    pub check_index: usize,
    pub check: &'static str,
    pub instance: usize,
    pub n: usize,
    pub max: Statistic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Incident {
    pub instance: usize,
    pub check: &'static str,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignReport {
    pub scenario: String,
    pub seed: u64,
    pub version: String,
    pub instance_count: usize,
    pub instances: Vec<InstanceReport>,
    pub extrema: Vec<Extremum>,
    /// Theorem checks that failed; must be empty.
    pub violations: Vec<Incident>,
    pub excluded: Vec<Incident>,
    pub errors: Vec<Incident>,
}

impl CampaignReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_plain(&self) -> String {
        let mut out = format!(
            "scenario {} seed {} instances {}\n",
            self.scenario, self.seed, self.instance_count
        );
        for e in &self.extrema {
            out += &format!(
                "max {}[{}] = {} (~{}) at instance {} (n = {})\n",
                e.check, e.check_index, e.max.upper, e.max.decimal, e.instance, e.n
            );
        }
        for (label, list) in [
            ("violation", &self.violations),
            ("excluded", &self.excluded),
            ("error", &self.errors),
        ] {
            for i in list {
                out += &format!("{label} instance {} {}: {}\n", i.instance, i.check, i.message);
            }
        }
        out += &format!("violations: {}\n", self.violations.len());
        out
    }
}

/// Parses a scenario, reporting the line and column of any error.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("{origin}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    validate(&scenario).map_err(|e| Error::Parse {
        location: origin.to_string(),
        message: e.to_string(),
    })?;
    Ok(scenario)
}

fn validate(s: &Scenario) -> Result<()> {
    let defaults = Budget::default();
    let b = &s.budget;
    if b.max_law_terms > defaults.max_law_terms
        || b.max_sweep_terms > defaults.max_sweep_terms
        || b.max_tuples > defaults.max_tuples
        || b.max_search_nodes > defaults.max_search_nodes
    {
        return Err(Error::InvalidInput("budget exceeds the global caps".into()));
    }
    let dim = match &s.systems {
        SystemSource::Fixed { systems } => {
            let Some(first) = systems.first() else {
                return Ok(());
            };
            if systems.iter().any(|c| c.dim() != first.dim()) {
                return Err(Error::InvalidInput("fixed systems differ in dimension".into()));
            }
            first.dim()
        }
        SystemSource::Generated {
            generator,
            d,
            n_min,
            n_max,
            count,
        } => {
            if *d == 0 || *n_min == 0 || n_min > n_max {
                return Err(Error::InvalidInput("need d >= 1 and 1 <= n_min <= n_max".into()));
            }
            if let SystemGenerator::RandomInteger { bound } = generator {
                if *bound < 1 {
                    return Err(Error::InvalidInput("coordinate bound must be >= 1".into()));
                }
            }
            if *count == 0 {
                return Ok(());
            }
            *d
        }
    };
    if s.checks.iter().any(Check::needs_target) {
        match &s.target {
            None => return Err(Error::InvalidInput("checks need a target".into())),
            Some(t) if t.dim() != dim => {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.dim(),
                })
            }
            _ => {}
        }
    }
    for c in &s.checks {
        if let Check::HitStatistic { q, .. } = c {
            if !q.is_power_of_two() {
                return Err(Error::InvalidInput(format!("hit_statistic q = {q} is not a power of two")));
            }
        }
    }
    Ok(())
}

const BUNDLED: &[(&str, &str)] = &[
    ("elo_sharpness", include_str!("../scenarios/elo_sharpness.json")),
    ("circle_gip", include_str!("../scenarios/circle_gip.json")),
    ("thm15_circle", include_str!("../scenarios/thm15_circle.json")),
    ("gl_probe", include_str!("../scenarios/gl_probe.json")),
    ("halasz_probe", include_str!("../scenarios/halasz_probe.json")),
    ("relative_bound", include_str!("../scenarios/relative_bound.json")),
    ("boosting", include_str!("../scenarios/boosting.json")),
    ("convex_cover", include_str!("../scenarios/convex_cover.json")),
    ("empty", include_str!("../scenarios/empty.json")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn bundled_scenario(name: &str) -> Result<Scenario> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidInput(format!("no bundled scenario named {name}")))?;
    parse_scenario(text, &format!("{name}.json"))
}

impl Scenario {
    pub fn instance_count(&self) -> usize {
        match &self.systems {
            SystemSource::Fixed { systems } => systems.len(),
            SystemSource::Generated { count, .. } => *count,
        }
    }

    /// The coefficient system of instance `index`, drawn from its own RNG stream.
    pub fn system(&self, index: usize) -> Result<CoefficientSystem> {
        match &self.systems {
            SystemSource::Fixed { systems } => systems
                .get(index)
                .cloned()
                .ok_or_else(|| Error::InvalidInput(format!("no instance {index}"))),
            SystemSource::Generated {
                generator,
                d,
                n_min,
                n_max,
                ..
            } => {
                let n = n_min + index % (n_max - n_min + 1);
                let mut rng = instance_rng(self.seed, index as u64);
                generator.generate(&mut rng, n, *d)
            }
        }
    }
}

/// Runs every check on every instance on a pool of `workers` threads.
///
/// The report depends only on the scenario and its seed.
pub fn run_campaign(scenario: &Scenario, workers: usize) -> Result<CampaignReport> {
    validate(scenario)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    let instances: Vec<InstanceReport> = pool.install(|| {
        (0..scenario.instance_count())
            .into_par_iter()
            .map(|i| run_instance(scenario, i))
            .collect::<Result<_>>()
    })?;

    let mut extrema: Vec<Extremum> = Vec::new();
    let mut violations = Vec::new();
    let mut excluded = Vec::new();
    let mut errors = Vec::new();
    for inst in &instances {
        for (k, o) in inst.outcomes.iter().enumerate() {
            let incident = || Incident {
                instance: inst.index,
                check: o.check,
                message: o.message.clone().unwrap_or_default(),
            };
            match o.status {
                Status::Fail => violations.push(incident()),
                Status::Excluded => excluded.push(incident()),
                Status::Error => errors.push(incident()),
                _ => {}
            }
            if let Some(stat) = &o.statistic {
                match extrema.iter_mut().find(|e| e.check_index == k) {
                    Some(e) if e.max.exact_power >= stat.exact_power => {}
                    Some(e) => {
                        e.instance = inst.index;
                        e.n = inst.n;
                        e.max = stat.clone();
                    }
                    None => extrema.push(Extremum {
                        check_index: k,
                        check: o.check,
                        instance: inst.index,
                        n: inst.n,
                        max: stat.clone(),
                    }),
                }
            }
        }
    }
    extrema.sort_by_key(|e| e.check_index);
    Ok(CampaignReport {
        scenario: scenario.id.clone(),
        seed: scenario.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        instance_count: instances.len(),
        instances,
        extrema,
        violations,
        excluded,
        errors,
    })
}

fn run_instance(scenario: &Scenario, index: usize) -> Result<InstanceReport> {
    let cs = scenario.system(index)?;
    let outcomes = scenario
        .checks
        .iter()
        .map(|c| {
            let outcome = evaluate(c, &cs, scenario.target.as_ref(), &scenario.budget);
            outcome.unwrap_or_else(|e| {
                let status = match e {
                    Error::Precondition(_) | Error::Partition(_) | Error::BadConfiguration(_) => {
                        Status::Excluded
                    }
                    _ => Status::Error,
                };
                let details = match &e {
                    Error::BadConfiguration(w) => serde_json::json!({ "witness": w }),
                    _ => Value::Null,
                };
                CheckOutcome {
                    check: c.name(),
                    class: c.class(),
                    status,
                    statistic: None,
                    message: Some(e.to_string()),
                    details,
                }
            })
        })
        .collect();
    Ok(InstanceReport {
        index,
        n: cs.len(),
        d: cs.dim(),
        system: cs,
        outcomes,
    })
}

fn outcome(check: &Check, ok: bool, message: Option<String>, details: Value) -> CheckOutcome {
    CheckOutcome {
        check: check.name(),
        class: check.class(),
        status: if ok { Status::Pass } else { Status::Fail },
        statistic: None,
        message,
        details,
    }
}

fn json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

/// Evaluates one check on one system.
pub fn evaluate(
    check: &Check,
    cs: &CoefficientSystem,
    target: Option<&TargetSet>,
    budget: &Budget,
) -> Result<CheckOutcome> {
    let target = || target.ok_or_else(|| Error::InvalidInput("check needs a target".into()));
    let n = cs.len();
    match check {
        Check::Elo => {
            let (r, at) = rho(&full_distribution(cs, budget)?);
            let bound = elo_bound(n as u32);
            let details = serde_json::json!({
                "rho": r, "at": at, "bound": bound, "equality": r == bound,
            });
            Ok(outcome(check, r <= bound, None, details))
        }
        Check::Kst { t } => {
            let s = target()?;
            if n < 2 {
                return Err(Error::Precondition("need n >= 2 for a two-block split".into()));
            }
            let partition = IndexPartition::new(vec![(0..n / 2).collect(), (n / 2..n).collect()], n)?;
            let d1 = support_distribution(cs, &partition.blocks()[0], budget)?;
            let d2 = support_distribution(cs, &partition.blocks()[1], budget)?;
            let g = build_sum_graph(&d1, &d2, s, budget)?;
            let probability = hit_probability(&full_distribution(cs, budget)?, s)?;
            let weight = graph_weight(&g);
            let t_eff = (*t).min(g.graph().left_len());
            let kst = kst_check(&g, t_eff)?;
            let identity_ok = weight == probability;
            let ok = identity_ok && kst.all_ok();
            let details = serde_json::json!({
                "probability": probability, "graph_weight": weight,
                "identity_ok": identity_ok, "kst": kst,
            });
            Ok(outcome(check, ok, (!ok).then(|| "KST or identity failed".into()), details))
        }
        Check::GipBound { t, intersection_bound } => {
            let r = gip_bound_check(cs, target()?, *intersection_bound, *t, budget)?;
            let ok = r.all_ok();
            Ok(outcome(check, ok, (!ok).then(|| "bound failed".into()), json(&r)))
        }
        Check::RelativeBound { m } => {
            let r = relative_bound_check(cs, target()?, *m, budget)?;
            let ok = r.all_ok();
            Ok(outcome(check, ok, (!ok).then(|| "bound failed".into()), json(&r)))
        }
        Check::ConvexCover => {
            let points = full_distribution(cs, budget)?.points();
            let vertices = hull_vertices(&points)?;
            let d = cs.dim();
            if vertices.len() < 2 {
                return Err(Error::Precondition("support has fewer than two hull vertices".into()));
            }
            let cover = convex_cover(&vertices)?;
            let union_ok = cover.union() == vertices;
            let mut clean = true;
            for part in &cover.parts {
                if bad_configuration_search(&part.points, d, budget)?.is_some() {
                    clean = false;
                }
            }
            let ok = cover.parts.len() == 2 * d && union_ok && clean;
            let sizes: Vec<usize> = cover.parts.iter().map(|p| p.points.len()).collect();
            let details = serde_json::json!({
                "vertices": vertices.len(), "part_sizes": sizes,
                "union_ok": union_ok, "parts_free": clean,
            });
            Ok(outcome(check, ok, (!ok).then(|| "cover check failed".into()), details))
        }
        Check::Boosting { n_low } => {
            let cube = SignCube::sweep(cs, target()?, budget)?;
            let minimal = minimal_boosting_n(&cube);
            let chosen = match n_low {
                Some(k) => *k,
                None => match minimal {
                    Some(k) => k,
                    None => {
                        let r = BoostingReport::from_cube(&cube, n)?;
                        let details = serde_json::json!({ "minimal_n": null, "report": r });
                        return Ok(CheckOutcome {
                            check: check.name(),
                            class: check.class(),
                            status: Status::Excluded,
                            statistic: None,
                            message: Some("no N admits a flip escape".into()),
                            details,
                        });
                    }
                },
            };
            let r = BoostingReport::from_cube(&cube, chosen)?;
            let details = serde_json::json!({ "minimal_n": minimal, "report": r });
            let ok = !r.is_violation();
            Ok(outcome(check, ok, (!ok).then(|| "eq. (1) fails under the precondition".into()), details))
        }
        Check::Sensitivity { complement } => {
            let s = target()?;
            let cube = SignCube::sweep(cs, s, budget)?;
            let r = SensitivityReport::from_cube(&cube);
            let sum: Rational = r.influences.iter().map(|p| p.to_rational()).sum();
            let mut ok = sum == r.average_sensitivity
                && r.influences.iter().all(DyadicProbability::is_probability)
                && r.average_sensitivity <= Rational::from_integer(n as i64);
            let mut symmetric = None;
            if *complement {
                let other = SensitivityReport::from_cube(&SignCube::sweep(cs, &s.complement(), budget)?);
                let same = other.influences == r.influences;
                symmetric = Some(same);
                ok &= same;
            }
            let stat = Statistic::scaled(&r.average_sensitivity, n as u64, -1, 2)?;
            let details = serde_json::json!({ "report": r, "complement_symmetric": symmetric });
            let mut o = outcome(check, ok, (!ok).then(|| "sensitivity invariant failed".into()), details);
            o.statistic = Some(stat);
            Ok(o)
        }
        Check::HitStatistic { p, q } => {
            let probability = hit_probability(&full_distribution(cs, budget)?, target()?)?;
            let stat = Statistic::scaled(&probability.to_rational(), n as u64, *p as i32, *q)?;
            Ok(CheckOutcome {
                check: check.name(),
                class: check.class(),
                status: Status::Measured,
                statistic: Some(stat),
                message: None,
                details: serde_json::json!({ "probability": probability }),
            })
        }
        Check::Halasz => {
            let h = halasz_statistic(cs, budget)?;
            let d = cs.dim() as i32;
            let stat = Statistic::scaled(&h.rho.to_rational(), n as u64, d, 2)?;
            Ok(CheckOutcome {
                check: check.name(),
                class: check.class(),
                status: Status::Measured,
                statistic: Some(stat),
                message: None,
                details: json(&h),
            })
        }
    }
}

/// Result of a hill climb.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub system: CoefficientSystem,
    pub probability: DyadicProbability,
    pub initial_probability: DyadicProbability,
    pub evaluations: u64,
}

/// Hill climbing on nonzero integer systems with coordinates in `[-bound, bound]`.
///
/// Moves change one coordinate of one vector by `±1`; zero vectors are
/// rejected. Each step scans the whole neighbourhood and takes the best
/// strict improvement; at a local maximum the climb restarts from a fresh
/// random system. `evaluations` caps the number of probability evaluations.
pub fn extremal_search(
    target: &TargetSet,
    n: usize,
    d: usize,
    bound: i64,
    evaluations: u64,
    seed: u64,
    budget: &Budget,
) -> Result<SearchResult> {
    if bound < 1 {
        return Err(Error::InvalidInput("coordinate bound must be >= 1".into()));
    }
    if target.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: target.dim(),
        });
    }
    let mut rng = instance_rng(seed, 0);
    let eval = |rows: &[Vec<i64>]| -> Result<DyadicProbability> {
        hit_probability(&full_distribution(&to_system(d, rows)?, budget)?, target)
    };
    let mut current = random_rows(&mut rng, n, d, bound);
    let mut current_p = eval(&current)?;
    let initial_probability = current_p.clone();
    let mut best = (current.clone(), current_p.clone());
    let mut used = 0u64;
    while used < evaluations {
        let mut step: Option<(Vec<Vec<i64>>, DyadicProbability)> = None;
        'scan: for i in 0..n {
            for c in 0..d {
                for delta in [1i64, -1] {
                    let v = current[i][c] + delta;
                    if v.abs() > bound {
                        continue;
                    }
                    let mut next = current.clone();
                    next[i][c] = v;
                    if next[i].iter().all(|&x| x == 0) {
                        continue;
                    }
                    if used >= evaluations {
                        break 'scan;
                    }
                    used += 1;
                    let p = eval(&next)?;
                    if p > *step.as_ref().map_or(&current_p, |s| &s.1) {
                        step = Some((next, p));
                    }
                }
            }
        }
        match step {
            Some((next, p)) => {
                current = next;
                current_p = p;
            }
            None => {
                if used >= evaluations {
                    break;
                }
                current = random_rows(&mut rng, n, d, bound);
                used += 1;
                current_p = eval(&current)?;
            }
        }
        if current_p > best.1 {
            best = (current.clone(), current_p.clone());
        }
    }
    Ok(SearchResult {
        system: to_system(d, &best.0)?,
        probability: best.1,
        initial_probability,
        evaluations: used,
    })
}

fn random_rows<R: Rng>(rng: &mut R, n: usize, d: usize, bound: i64) -> Vec<Vec<i64>> {
    (0..n)
        .map(|_| loop {
            let row: Vec<i64> = (0..d).map(|_| rng.gen_range(-bound..=bound)).collect();
            if row.iter().any(|&x| x != 0) {
                break row;
            }
        })
        .collect()
}

fn to_system(d: usize, rows: &[Vec<i64>]) -> Result<CoefficientSystem> {
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    CoefficientSystem::from_ints(d, &refs)
}
