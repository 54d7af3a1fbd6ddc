//! One pass/fail line per acceptance criterion. Every tolerance is zero:
//! all comparisons are exact rational or integer comparisons.

mod common;

use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use anticonc::convexcover::{
    bad_configuration_search, convex_cover, hull_vertices, is_convex_position, zonotope_vertex_bound,
};
use anticonc::distributions::{elo_bound, rho_of, PartitionFailure};
use anticonc::harness::{bundled_names, bundled_scenario, run_campaign, CampaignReport};
use anticonc::sensitivity::{BoostingReport, SensitivityReport, SignCube};
use anticonc::sumstruct::{
    build_sum_graph, gip_bound_check, graph_weight, relative_bound_check, BadConfiguration,
    SplitKind, WeightedBipartiteGraph,
};
use anticonc::targets::{segment_adversary, Condition, Polynomial};
use anticonc::{
    full_distribution, hit_probability, partition_anti_concentrated, support_distribution, Budget,
    DyadicProbability, Error, Point, Rational, TargetSet,
};
use common::*;
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

static SUM_GRAPHS: AtomicU64 = AtomicU64::new(0);
static IDENTITY_FAILURES: AtomicU64 = AtomicU64::new(0);

fn note_identity(ok: bool) {
    SUM_GRAPHS.fetch_add(1, Ordering::Relaxed);
    if !ok {
        IDENTITY_FAILURES.fetch_add(1, Ordering::Relaxed);
    }
}

struct Line {
    id: u8,
    ok: bool,
    text: String,
}

fn line(id: u8, ok: bool, text: impl Into<String>) -> Line {
    Line {
        id,
        ok,
        text: text.into(),
    }
}

fn rng_for(criterion: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0000 + criterion);
    rng.set_stream(index);
    rng
}

fn budget() -> Budget {
    Budget::default()
}

fn mass_of(counts: u64, n: usize) -> DyadicProbability {
    DyadicProbability::new(counts, n as u32)
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let failures: usize = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(1, i);
            let n = rng.gen_range(1..=14);
            let d = rng.gen_range(1..=3);
            let rows = random_rows(&mut rng, n, d, 8);
            let dist = full_distribution(&system(&rows), &budget()).unwrap();
            let oracle = law(&rows);
            let mut bad = dist.total_mass() != DyadicProbability::one() || !dist.is_symmetric();
            bad |= dist.support_size() != oracle.len();
            for (x, c) in &oracle {
                let neg: Vec<i64> = x.iter().map(|v| -v).collect();
                bad |= dist.mass(&point(x)) != mass_of(*c, n);
                bad |= dist.mass(&point(&neg)) != mass_of(*c, n);
            }
            let mut shuffled = rows.clone();
            shuffled.shuffle(&mut rng);
            bad |= full_distribution(&system(&shuffled), &budget()).unwrap() != dist;
            usize::from(bad)
        })
        .sum();
    let elapsed = start.elapsed();
    let ok = failures == 0 && elapsed < Duration::from_secs(60);
    line(
        1,
        ok,
        format!(
            "mass = 1, mass(x) = mass(-x), permutation invariance and sign-vector oracle agreement on 1000 systems (n <= 14, d <= 3, |coord| <= 8): {failures} failures, {elapsed:.1?} (limit 60 s, tolerance 0)"
        ),
    )
}

fn criterion_2() -> Line {
    let mut sharp_failures = 0;
    for n in 1..=16usize {
        let rows = vec![vec![1i64]; n];
        let dist = full_distribution(&system(&rows), &budget()).unwrap();
        let expected = mass_of(binom(n, n / 2) as u64, n);
        let r = anticonc::rho(&dist).0;
        if r != expected || elo_bound(n as u32) != expected {
            sharp_failures += 1;
        }
    }
    let exceed: usize = (1..=14usize)
        .into_par_iter()
        .map(|n| {
            let bound = binom(n, n / 2) as u64;
            (0..1000u64)
                .filter(|&i| {
                    let mut rng = rng_for(2, (n as u64) << 32 | i);
                    let rows = random_rows(&mut rng, n, 1, 8);
                    let lib = anticonc::rho(&full_distribution(&system(&rows), &budget()).unwrap()).0;
                    let count = rho_count(&rows);
                    count > bound || lib != mass_of(count, n)
                })
                .count()
        })
        .sum();
    line(
        2,
        sharp_failures == 0 && exceed == 0,
        format!(
            "all-ones rho = binom(n, n/2)/2^n for n = 1..16: {sharp_failures} mismatches; 14000 random 1-d systems (n <= 14) above the bound or off the oracle: {exceed} (tolerance 0)"
        ),
    )
}

fn criterion_3() -> Line {
    let results: Vec<[bool; 3]> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(3, i);
            let n = rng.gen_range(2..=12);
            let d = rng.gen_range(1..=3);
            let rows = random_rows(&mut rng, n, d, 8);
            let cs = system(&rows);
            let b = budget();
            let full = rho(&rows);
            let lib_full = rho_of(&cs, &(0..n).collect::<Vec<_>>(), &b).unwrap();

            let k = rng.gen_range(1..=n);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let mut sub = idx[..k].to_vec();
            sub.sort_unstable();
            let sub_rho = rho(&subset_rows(&rows, &sub));
            let fact1 = lib_full == full
                && rho_of(&cs, &sub, &b).unwrap() == sub_rho
                && full <= sub_rho;

            let cut = rng.gen_range(1..n);
            let mut left = idx[..cut].to_vec();
            let mut right = idx[cut..].to_vec();
            left.sort_unstable();
            right.sort_unstable();
            let product = &rho(&subset_rows(&rows, &left)) * &rho(&subset_rows(&rows, &right));
            let fact2 = full >= product;

            let head: Vec<usize> = (0..n - 1).collect();
            let fact3 = full >= rho(&subset_rows(&rows, &head)).half();
            [fact1, fact2, fact3]
        })
        .collect();
    let fails: Vec<usize> = (0..3)
        .map(|k| results.iter().filter(|r| !r[k]).count())
        .collect();
    line(
        3,
        fails.iter().all(|&f| f == 0),
        format!(
            "1000 instances each: rho(all) <= rho(I) fails {}, rho(all) >= rho(I) rho(I^c) fails {}, rho(a_1..a_n) >= rho(a_1..a_(n-1))/2 fails {} (tolerance 0)",
            fails[0], fails[1], fails[2]
        ),
    )
}

fn criterion_4() -> Line {
    let mut accepted = 0usize;
    let mut failures = 0usize;
    let mut attempts = 0u64;
    while accepted < 500 && attempts < 20_000 {
        let mut rng = rng_for(4, attempts);
        attempts += 1;
        let n = rng.gen_range(6..=14);
        let d = rng.gen_range(1..=3);
        let m = rng.gen_range(2..=3usize);
        let rows = random_rows(&mut rng, n, d, 8);
        let c = rho_count(&rows) as u128;
        // Largest k with (2^-k)^m >= c / 2^n.
        let mut k = 0u32;
        while c << ((k + 1) as usize * m) <= 1u128 << n {
            k += 1;
        }
        if k < 2 {
            continue;
        }
        accepted += 1;
        let lambda = DyadicProbability::pow2_neg(k);
        let levels = vec![lambda.clone(); m];
        let ok = match partition_anti_concentrated(&system(&rows), &levels, &budget()) {
            Ok(p) => {
                let mut seen: Vec<usize> = p.blocks().iter().flatten().copied().collect();
                seen.sort_unstable();
                p.blocks().len() == m
                    && seen == (0..n).collect::<Vec<_>>()
                    && p
                        .blocks()
                        .iter()
                        .all(|b| rho(&subset_rows(&rows, b)) <= lambda.scale_int(2))
            }
            Err(_) => false,
        };
        failures += usize::from(!ok);
    }

    let rows = vec![vec![1i64, 0], vec![0, 1], vec![1, 1], vec![2, 1]];
    let cs = system(&rows);
    let half = DyadicProbability::pow2_neg(1);
    let quarter = DyadicProbability::pow2_neg(2);
    let tiny = DyadicProbability::pow2_neg(10);
    let diag_half = matches!(
        partition_anti_concentrated(&cs, &[half, quarter.clone()], &budget()),
        Err(Error::Partition(PartitionFailure::LevelNotBelowHalf { index: 0 }))
    );
    let diag_product = matches!(
        partition_anti_concentrated(&cs, &[tiny, quarter], &budget()),
        Err(Error::Partition(PartitionFailure::ConcentrationAboveProduct))
    );
    let diag_empty = matches!(
        partition_anti_concentrated(&cs, &[], &budget()),
        Err(Error::Partition(PartitionFailure::NoLevels))
    );
    let diagnostics = diag_half && diag_product && diag_empty;
    line(
        4,
        accepted == 500 && failures == 0 && diagnostics,
        format!(
            "{accepted} hypothesis-satisfying instances (m in {{2, 3}}), blocks with rho > 2 lambda or not a partition: {failures}; rejections (level >= 1/2, rho > product, no levels) diagnosed correctly: {diagnostics} (tolerance 0)"
        ),
    )
}

/// Whether `p` lies on the closed segment `[x, y]`.
fn on_segment(p: &Point, x: &Point, y: &Point) -> bool {
    let dir = y - x;
    let off = p - x;
    let len2 = dir.norm2();
    let s = off.dot(&dir) / len2.clone();
    let proj = x + &dir.scale(&s);
    proj == *p && !s.is_negative() && s <= Rational::one()
}

fn criterion_5() -> Line {
    let pairs = [
        (vec![0i64, 0], vec![1i64, 0]),
        (vec![1, 2], vec![3, -1]),
        (vec![1, 0, 0], vec![0, 1, 1]),
        (vec![2], vec![5]),
    ];
    let mut failures = Vec::new();
    for (x, y) in &pairs {
        let (x, y) = (point(x), point(y));
        let seg = TargetSet::segment(&x, &y).unwrap();
        for n in 2..=20usize {
            let cs = segment_adversary(&x, &y, n).unwrap();
            let p = hit_probability(&full_distribution(&cs, &budget()).unwrap(), &seg).unwrap();
            // Oracle: xi_1 and the number j of +1 among the n-1 equal coefficients.
            let a1 = &cs.coefficients()[0];
            let step = &cs.coefficients()[1];
            let mut hits: u128 = 0;
            for s1 in [1i64, -1] {
                for j in 0..n {
                    let k = Rational::from_integer(2 * j as i64 - (n as i64 - 1));
                    let sum = &a1.scale(&Rational::from_integer(s1)) + &step.scale(&k);
                    if on_segment(&sum, &x, &y) {
                        hits += binom(n - 1, j);
                    }
                }
            }
            let oracle = DyadicProbability::new(hits, n as u32);
            if p != oracle || p.to_rational() != q("1/2") {
                failures.push(format!("{x}-{y} n={n}"));
            }
        }
    }
    line(
        5,
        failures.is_empty(),
        format!(
            "segment adversary against [x, y] for 4 segments in d = 1, 2, 3 and n = 2..20: Pr = 1/2 exactly, mismatches {failures:?} (tolerance 0)"
        ),
    )
}

/// Test-side KST inequalities from the graph's weights.
fn kst_oracle(g: &WeightedBipartiteGraph, t: usize) -> (bool, bool) {
    let la = g.left_len();
    let lb = g.right_len();
    let mut w = Rational::zero();
    let mut unweighted = Rational::zero();
    for a in 0..la {
        for b in 0..lb {
            if g.adjacent(a, b) {
                let wb = g.right_weight(b).to_rational();
                w = w + g.left_weight(a).to_rational() * wb.clone();
                unweighted = unweighted + wb;
            }
        }
    }
    let report = g.kst_check(t).unwrap();
    let mut q_ok = g.common_neighborhood_weight(&report.q_witness).unwrap() == report.q
        && report.weight.to_rational() == w;
    if la <= 24 {
        // Exhaustive max over t-subsets.
        let mut best = DyadicProbability::zero();
        let mut subset: Vec<usize> = (0..t).collect();
        loop {
            best = best.max(g.common_neighborhood_weight(&subset).unwrap());
            let mut i = t;
            while i > 0 && subset[i - 1] == la - t + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            subset[i - 1] += 1;
            for j in i..t {
                subset[j] = subset[j - 1] + 1;
            }
        }
        q_ok &= best == report.q;
    }
    let qv = report.q.to_rational();
    let rho = (0..la).map(|a| g.left_weight(a)).max().unwrap().to_rational();
    let tt = Rational::from_integer(t as i64);
    let slack = &w - &(&tt * &rho);
    let strong = !slack.is_positive() || slack.pow(t as u32) <= qv;
    let excess = &unweighted - &(&tt - &Rational::one());
    let weak = !excess.is_positive()
        || excess.pow(t as u32) <= &qv * &Rational::from_integer(la as i64).pow(t as u32);
    let pairs = Rational::from_integer((t * (t - 1) / 2) as i64);
    let decoupling = w.pow(t as u32) <= &qv + &(pairs * rho);
    let oracle_ok = strong && weak && decoupling;
    let agree = report.strong_ok == strong && report.weak_ok == weak && report.decoupling_ok == decoupling;
    (q_ok && agree, oracle_ok)
}

fn criterion_6_graphs() -> (usize, usize, usize) {
    let results: Vec<(bool, bool)> = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(6, i);
            let la = rng.gen_range(1..=64);
            let lb = rng.gen_range(1..=64);
            let t = rng.gen_range(1..=3usize).min(la);
            let p = rng.gen_range(0.05..0.95);
            let g = WeightedBipartiteGraph::random(&mut rng, la, lb, p, 12).unwrap();
            kst_oracle(&g, t)
        })
        .collect();
    let mismatch = results.iter().filter(|r| !r.0).count();
    let violations = results.iter().filter(|r| !r.1).count();
    // Sum graphs from random systems, split into halves.
    (0..500u64).into_par_iter().for_each(|i| {
        let mut rng = rng_for(60, i);
        let n = rng.gen_range(2..=12);
        let d = rng.gen_range(1..=2);
        let rows = random_rows(&mut rng, n, d, 3);
        let cs = system(&rows);
        let r2: i64 = rng.gen_range(1..=10);
        let target = if d == 1 {
            TargetSet::finite(1, vec![point(&[0]), point(&[r2])]).unwrap()
        } else {
            TargetSet::centered_sphere(2, r2).unwrap()
        };
        let b = budget();
        let half = n / 2;
        let d1 = support_distribution(&cs, &(0..half).collect::<Vec<_>>(), &b).unwrap();
        let d2 = support_distribution(&cs, &(half..n).collect::<Vec<_>>(), &b).unwrap();
        let g = build_sum_graph(&d1, &d2, &target, &b).unwrap();
        let mut hits = 0u64;
        for_each_sum(&rows, |_, x| {
            if target.contains(&point(x)).unwrap() {
                hits += 1;
            }
        });
        note_identity(graph_weight(&g) == mass_of(hits, n));
        let t = 2.min(g.graph().left_len());
        let (_, ok) = kst_oracle(g.graph(), t);
        if !ok {
            IDENTITY_FAILURES.fetch_add(1, Ordering::Relaxed);
        }
    });
    (mismatch, violations, results.len())
}

fn criterion_7() -> Line {
    let c12 = anticonc::sumstruct::hypergraph_bound_constant(1, 2).unwrap();
    let c13 = anticonc::sumstruct::hypergraph_bound_constant(1, 3).unwrap();
    // C_{1,3} must dominate sqrt(3) + 2: (C - 2)^2 >= 3, within 2^-20.
    let c13_ok = c13.clone() - Rational::from_integer(2) > Rational::zero()
        && (c13.clone() - Rational::from_integer(2)).pow(2) >= q("3")
        && (c13.clone() - Rational::from_integer(2) - q("1/1048576")).pow(2) < q("3");
    let constants_ok = c12 == q("3") && c13_ok;

    let mut summary = Vec::new();
    let mut all_ok = constants_ok;
    for (m, wanted) in [(2u32, 1000usize), (3, 200)] {
        let mut passed = 0usize;
        let mut failed = 0usize;
        let mut excluded: Vec<BadConfiguration> = Vec::new();
        let mut skipped = 0usize;
        let mut batch = 0u64;
        while passed + failed < wanted && batch < 200 {
            let outcomes: Vec<Option<std::result::Result<bool, BadConfiguration>>> = (0..64u64)
                .into_par_iter()
                .map(|j| {
                    let mut rng = rng_for(7 + 10 * m as u64, batch * 64 + j);
                    let n = rng.gen_range(3 * m as usize..=14);
                    let rows = random_rows(&mut rng, n, 2, 4);
                    let r2 = [5i64, 25, 50, 65][rng.gen_range(0..4)];
                    let target = TargetSet::centered_sphere(2, r2).unwrap();
                    match relative_bound_check(&system(&rows), &target, m, &budget()) {
                        Ok(r) => {
                            let mut hits = 0u64;
                            for_each_sum(&rows, |_, x| {
                                let s: i64 = x.iter().map(|v| v * v).sum();
                                hits += u64::from(s == r2);
                            });
                            let oracle_p = mass_of(hits, n);
                            note_identity(r.hypergraph_weight == oracle_p);
                            let c = r.constant.clone();
                            let e = 1u32 << (m - 1);
                            let thm = (r.hypergraph_weight.to_rational() / c.clone()).pow(e)
                                <= r.lambda.to_rational();
                            let two_m = Rational::from_integer(1i64 << m);
                            let cor = (oracle_p.to_rational() / c).pow(m * e)
                                <= two_m * r.rho.to_rational();
                            let lambda_ok = r.lambda == *r.block_rhos.iter().max().unwrap();
                            Some(Ok(r.all_ok() && thm && cor && lambda_ok && r.probability == oracle_p))
                        }
                        Err(Error::BadConfiguration(w)) => Some(Err(*w)),
                        Err(Error::Precondition(_)) | Err(Error::Partition(_)) => None,
                        Err(e) => panic!("unexpected error {e}"),
                    }
                })
                .collect();
            for o in outcomes {
                match o {
                    Some(Ok(true)) if passed + failed < wanted => passed += 1,
                    Some(Ok(false)) if passed + failed < wanted => failed += 1,
                    Some(Err(w)) => excluded.push(w),
                    None => skipped += 1,
                    _ => {}
                }
            }
            batch += 1;
        }
        let witnesses_ok = excluded.iter().all(|w| w.k() == m as usize);
        all_ok &= passed == wanted && failed == 0 && witnesses_ok;
        summary.push(format!(
            "m = {m}: {passed} K-free instances verified, {failed} violations, {} excluded with a logged witness (e.g. {}), {skipped} outside rho < 2^-m",
            excluded.len(),
            excluded.first().map(ToString::to_string).unwrap_or_else(|| "none".into())
        ));
    }
    line(
        7,
        all_ok,
        format!(
            "C_1,2 = {c12}, C_1,3 = {c13} (outward): {constants_ok}; {} (tolerance 0)",
            summary.join("; ")
        ),
    )
}

fn criterion_8() -> (Line, CampaignReport) {
    let scenario = bundled_scenario("circle_gip").unwrap();
    let report = run_campaign(&scenario, 8).unwrap();
    let target = scenario.target.clone().unwrap();
    let checks: Vec<(bool, SplitKind)> = (0..scenario.instance_count())
        .into_par_iter()
        .map(|i| {
            let cs = scenario.system(i).unwrap();
            let rows: Rows = cs
                .coefficients()
                .iter()
                .map(|p| p.coords().iter().map(|c| c.numer().try_into().unwrap()).collect())
                .collect();
            let r = gip_bound_check(&cs, &target, 2, 2, &budget()).unwrap();
            let mut hits = 0u64;
            for_each_sum(&rows, |_, x| hits += u64::from(x[0] * x[0] + x[1] * x[1] == 1));
            let p = mass_of(hits, rows.len());
            note_identity(r.graph_weight == p);
            let slack = p.to_rational() - Rational::from_integer(2) * r.lambda1.to_rational();
            let m_lambda2 = Rational::from_integer(2) * r.lambda2.to_rational();
            let bound = !slack.is_positive() || slack.pow(2) <= m_lambda2;
            let blocks_ok = rho(&subset_rows(&rows, &r.partition.blocks()[0])) == r.lambda1
                && rho(&subset_rows(&rows, &r.partition.blocks()[1])) == r.lambda2;
            (r.all_ok() && bound && blocks_ok && r.probability == p, r.split)
        })
        .collect();
    let bad = checks.iter().filter(|c| !c.0).count();
    let lemma = checks.iter().filter(|c| c.1 == SplitKind::AntiConcentrated).count();
    let ok = bad == 0
        && report.violations.is_empty()
        && report.errors.is_empty()
        && report.instance_count == 1000;
    let l = line(
        8,
        ok,
        format!(
            "circle_gip: {} instances (n <= 16, M = 2, t = 2, unit circle), campaign violations {}, errors {}, oracle re-check failures {bad}; {lemma} instances used the rho^(1/3), rho^(2/3) partition, the rest (rho >= 1/8) the halves split (tolerance 0)",
            report.instance_count,
            report.violations.len(),
            report.errors.len()
        ),
    );
    (l, report)
}

/// Test-side check that no `b + sum eps_i delta_i` configuration lies in `part`.
fn no_pair_sums(part: &[Point], d: usize) -> bool {
    let set: std::collections::BTreeSet<&Point> = part.iter().collect();
    let k = part.len();
    match d {
        2 => {
            for b in part {
                for y in 0..k {
                    for z in 0..k {
                        let (dy, dz) = (&part[y] - b, &part[z] - b);
                        if dy.is_zero() || dz.is_zero() {
                            continue;
                        }
                        if set.contains(&(&part[y] + &dz)) {
                            return false;
                        }
                    }
                }
            }
            true
        }
        3 => {
            for b in part {
                for y in 0..k {
                    for z in 0..k {
                        for w in 0..k {
                            let ds = [&part[y] - b, &part[z] - b, &part[w] - b];
                            if ds.iter().any(Point::is_zero) {
                                continue;
                            }
                            let all = (1..8usize).all(|mask| {
                                let mut s = b.clone();
                                for (i, di) in ds.iter().enumerate() {
                                    if mask >> i & 1 == 1 {
                                        s = &s + di;
                                    }
                                }
                                set.contains(&s)
                            });
                            if all {
                                return false;
                            }
                        }
                    }
                }
            }
            true
        }
        _ => unreachable!(),
    }
}

/// Exact planar convex-position oracle: no point in a closed triangle or segment of others.
fn planar_convex_position(pts: &[Point]) -> bool {
    let c = |a: &Point, b: &Point, p: &Point| {
        let (a, b, p) = (a.coords(), b.coords(), p.coords());
        (&b[0] - &a[0]) * (&p[1] - &a[1]) - (&b[1] - &a[1]) * (&p[0] - &a[0])
    };
    let k = pts.len();
    for p in 0..k {
        for a in 0..k {
            for b in 0..k {
                if a == p || b == p || a == b {
                    continue;
                }
                if c(&pts[a], &pts[b], &pts[p]).is_zero() {
                    let (ap, bp) = (&pts[a] - &pts[p], &pts[b] - &pts[p]);
                    if !ap.dot(&bp).is_positive() {
                        return false;
                    }
                }
                for e in 0..k {
                    if e == p || e == a || e == b {
                        continue;
                    }
                    let s = [
                        c(&pts[a], &pts[b], &pts[p]).signum(),
                        c(&pts[b], &pts[e], &pts[p]).signum(),
                        c(&pts[e], &pts[a], &pts[p]).signum(),
                    ];
                    if s.iter().all(|&v| v >= 0) || s.iter().all(|&v| v <= 0) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn criterion_9() -> Line {
    let covers: Vec<bool> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(9, i);
            let d = if i % 2 == 0 { 2 } else { 3 };
            let cloud_size = rng.gen_range(d + 2..=24);
            let cloud: Vec<Point> = random_rows(&mut rng, cloud_size, d, 10)
                .iter()
                .map(|r| point(r))
                .collect();
            let hull = hull_vertices(&cloud).unwrap();
            let oracle_convex = d != 2 || planar_convex_position(&hull);
            let cover = convex_cover(&hull).unwrap();
            let labels: Vec<(usize, &str)> = cover
                .parts
                .iter()
                .map(|p| (p.axis, if p.side == anticonc::convexcover::Side::Plus { "+" } else { "-" }))
                .collect();
            let expected: Vec<(usize, &str)> = (0..d).flat_map(|a| [(a, "+"), (a, "-")]).collect();
            let free = cover.parts.iter().all(|p| {
                bad_configuration_search(&p.points, d, &budget()).unwrap().is_none()
                    && no_pair_sums(&p.points, d)
            });
            oracle_convex
                && is_convex_position(&hull).unwrap()
                && labels == expected
                && cover.union() == hull
                && free
        })
        .collect();
    let cover_fail = covers.iter().filter(|c| !**c).count();
    let lemma_fail: usize = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = rng_for(90, i);
            let d = rng.gen_range(1..=3usize);
            let mut sums = vec![vec![0i64; d]];
            for _ in 0..=d {
                let a = random_rows(&mut rng, 1, d, 6).remove(0);
                let delta = random_rows(&mut rng, 1, d, 6).remove(0);
                sums = sums
                    .iter()
                    .flat_map(|s| {
                        let x: Vec<i64> = s.iter().zip(&a).map(|(u, v)| u + v).collect();
                        let y: Vec<i64> = x.iter().zip(&delta).map(|(u, v)| u + v).collect();
                        [x, y]
                    })
                    .collect();
            }
            let mut z: Vec<Point> = sums.iter().map(|s| point(s)).collect();
            z.sort();
            z.dedup();
            is_convex_position(&z).unwrap()
        })
        .count();
    let zono = zonotope_vertex_bound(3, 2).unwrap();
    let ok = cover_fail == 0 && lemma_fail == 0 && zono == BigUint::from(6u32);
    line(
        9,
        ok,
        format!(
            "500 hull-vertex sets (d = 2, 3; clouds of <= 24 points): {cover_fail} covers not exactly 2d labeled parts with exact union and pair-sum-free parts; 1000 sums of d+1 pairs in convex position: {lemma_fail}; zonotope_vertex_bound(3, 2) = {zono} (expected 6, tolerance 0)"
        ),
    )
}

fn half_plane(d: usize, normal: &[i64], offset: i64) -> TargetSet {
    let p = Polynomial::affine(&point(normal), Rational::from_integer(offset));
    TargetSet::semi_algebraic(d, Condition::nonnegative(p)).unwrap()
}

fn criterion_10() -> Line {
    let results: Vec<(bool, bool, usize)> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(10, i);
            let n = rng.gen_range(1..=14usize);
            let d = rng.gen_range(1..=2usize);
            let rows = random_rows(&mut rng, n, d, 3);
            let cs = system(&rows);
            let target = match i % 3 {
                0 if d == 2 => TargetSet::centered_sphere(2, rng.gen_range(1..=20)).unwrap(),
                1 => half_plane(d, &random_rows(&mut rng, 1, d, 3)[0], rng.gen_range(-3..=3)),
                _ => {
                    let pts: Vec<Point> = random_rows(&mut rng, 4, d, 6).iter().map(|r| point(r)).collect();
                    TargetSet::finite(d, pts).unwrap()
                }
            };
            let b = budget();
            let cube = SignCube::sweep(&cs, &target, &b).unwrap();
            let rep = SensitivityReport::from_cube(&cube);
            let comp = SensitivityReport::from_cube(&SignCube::sweep(&cs, &target.complement(), &b).unwrap());
            let member = membership(&rows, |x| target.contains(&point(x)).unwrap());
            let counts = influence_counts(&member, n);
            let oracle_inf: Vec<DyadicProbability> = counts.iter().map(|&c| mass_of(c, n)).collect();
            let sum: Rational = oracle_inf.iter().map(|p| p.to_rational()).sum();
            let exact = rep.influences == oracle_inf
                && comp.influences == oracle_inf
                && rep.average_sensitivity == sum
                && sum <= Rational::from_integer(n as i64);
            let mut eq1 = true;
            let mut verified = 0;
            for k in 0..=n {
                let r = BoostingReport::from_cube(&cube, k).unwrap();
                if n <= 10 {
                    // Escape oracle over all flip subsets of the first k signs.
                    let escape = (0..member.len())
                        .all(|g| !member[g] || (0..1usize << k).any(|t| !member[g ^ t]));
                    eq1 &= escape == r.precondition_ok;
                }
                if r.precondition_ok {
                    verified += 1;
                    let hits = member.iter().filter(|&&m| m).count() as u64;
                    let lhs = mass_of(hits, n).to_rational();
                    let rhs = Rational::from_integer(1i64 << k)
                        * counts[..k].iter().map(|&c| mass_of(c, n).to_rational()).sum::<Rational>();
                    eq1 &= lhs <= rhs && r.ok;
                }
            }
            (exact, eq1, verified)
        })
        .collect();
    let exact_fail = results.iter().filter(|r| !r.0).count();
    let eq1_fail = results.iter().filter(|r| !r.1).count();
    let verified: usize = results.iter().map(|r| r.2).sum();

    let cs = system(&vec![vec![1, 0], vec![0, 1]]);
    let circle = TargetSet::centered_sphere(2, 2).unwrap();
    let cube = SignCube::sweep(&cs, &circle, &budget()).unwrap();
    let rep = SensitivityReport::from_cube(&cube);
    let boost = BoostingReport::from_cube(&cube, 2).unwrap();
    let counterexample = rep.influences.iter().all(DyadicProbability::is_zero)
        && rep.probability == DyadicProbability::one()
        && !boost.precondition_ok
        && boost.lhs.to_rational() == q("1")
        && boost.rhs.is_zero();
    line(
        10,
        exact_fail == 0 && eq1_fail == 0 && counterexample,
        format!(
            "500 instances (n <= 14; circles, half-planes, finite sets): influences, complement influences and AS = sum Inf off the oracle {exact_fail}; eq. (1) failures where the flip-escape precondition holds {eq1_fail} over {verified} (instance, N) pairs; circle r^2 = 2 with a = (1,0), (0,1): Inf = (0, 0), Pr = 1, precondition fails, 1 > 0 reproduced: {counterexample} (tolerance 0)"
        ),
    )
}

/// Regression baselines recorded from the first verified run.
const BASELINES: [(&str, &str); 3] = [
    ("thm15_circle", "54185/131072"),
    ("gl_probe", "1172345/2097152"),
    ("halasz_probe", "1/4"),
];

fn criterion_11() -> Line {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, baseline) in BASELINES {
        let report = run_campaign(&bundled_scenario(name).unwrap(), 8).unwrap();
        let Some(e) = report.extrema.first() else {
            ok = false;
            parts.push(format!("{name}: no statistic"));
            continue;
        };
        ok &= report.errors.is_empty() && report.violations.is_empty();
        ok &= e.max.upper == q(baseline);
        parts.push(format!(
            "{name} max {} = {} (~{}) at n = {} (baseline {baseline})",
            match name {
                "thm15_circle" => "sqrt(n) Pr",
                "gl_probe" => "AS/sqrt(n)",
                _ => "rho n^(d/2)",
            },
            e.max.upper,
            e.max.decimal,
            e.n
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(600);
    line(
        11,
        ok,
        format!(
            "{}; total {elapsed:.1?} (limit 600 s; statistics are exact upper-rounded rationals)",
            parts.join("; ")
        ),
    )
}

fn criterion_12(circle_gip_8: &CampaignReport) -> Line {
    let mut differing = Vec::new();
    for name in bundled_names() {
        let scenario = bundled_scenario(name).unwrap();
        let one = run_campaign(&scenario, 1).unwrap().to_json();
        let eight = if name == "circle_gip" {
            circle_gip_8.to_json()
        } else {
            run_campaign(&scenario, 8).unwrap().to_json()
        };
        if one != eight {
            differing.push(name);
        }
    }
    line(
        12,
        differing.is_empty(),
        format!(
            "{} bundled campaigns re-run at 1 and 8 workers: byte-different reports {differing:?}",
            bundled_names().len()
        ),
    )
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let mut lines = vec![criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5()];
    let (c6_mismatch, c6_violations, c6_count) = criterion_6_graphs();
    lines.push(criterion_7());
    let (c8, circle_gip) = criterion_8();
    lines.push(c8);
    let graphs = SUM_GRAPHS.load(Ordering::Relaxed);
    let identity_failures = IDENTITY_FAILURES.load(Ordering::Relaxed);
    lines.push(line(
        6,
        c6_mismatch == 0 && c6_violations == 0 && identity_failures == 0,
        format!(
            "{c6_count} random weighted bipartite graphs (parts <= 64, t in {{1, 2, 3}}): KST strong/weak/decoupling violations {c6_violations}, disagreements with the brute-force q and test-side inequalities {c6_mismatch}; {graphs} sum graphs and hypergraphs with w = Pr checked against sign enumeration, failures {identity_failures} (tolerance 0)"
        ),
    ));
    lines.push(criterion_9());
    lines.push(criterion_10());
    lines.push(criterion_11());
    lines.push(criterion_12(&circle_gip));
    lines.sort_by_key(|l| l.id);

    let mut out = std::io::stdout().lock();
    for l in &lines {
        writeln!(out, "criterion {:>2}: {} {}", l.id, if l.ok { "PASS" } else { "FAIL" }, l.text).unwrap();
    }
    writeln!(out, "acceptance suite finished in {:.1?}", start.elapsed()).unwrap();
    let failed: Vec<u8> = lines.iter().filter(|l| !l.ok).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
