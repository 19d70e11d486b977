//! Acceptance suite. Runs without the libtest harness so each criterion prints
//! exactly one PASS/FAIL line; the process exits nonzero if any fails.
//!
//! `MOTZKIN_SEED` overrides the seed of the random corpus (default 0).

use std::process::ExitCode;
use std::time::{Duration, Instant};

use motzkin_core::density::{haralambis_upper, mu_exact_small, DEFAULT_STATE_CAP};
use motzkin_core::families::{
    classify_f1, classify_f2, partition_check, replay_proof_witness, BlockFamily, CaseLabel, FamilyCase,
};
use motzkin_core::verify::{verify_pairs, SweepOptions, VerificationRecord};
use motzkin_core::{kappa_exact, kappa_sweep_oracle, normalize, DifferenceSet, Family, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(n: u64, d: u64) -> Rational {
    Rational::from_parts(n, d)
}

fn abs_res(x: u64, m: u64) -> u64 {
    let v = x % m;
    v.min(m - v)
}

/// `max over 2 <= m <= m_max, 1 <= c <= m/2` of `min_i |c m_i|_m / m`,
/// straight from the definition.
fn kappa_literal(set: &[u64], m_max: u64) -> Rational {
    let (mut bn, mut bd) = (0u64, 1u64);
    for m in 2..=m_max {
        for c in 1..=m / 2 {
            let d = set.iter().map(|&x| abs_res(c * x, m)).min().unwrap();
            if (d as u128) * (bd as u128) > (bn as u128) * (m as u128) {
                (bn, bd) = (d, m);
            }
        }
    }
    if set.len() == 1 {
        return r(1, 2);
    }
    r(bn, bd)
}

/// `min_i |c m_i|_m / m` evaluated directly.
fn witness_literal(set: &[u64], c: u64, m: u64) -> Rational {
    r(set.iter().map(|&x| abs_res(c * x, m)).min().unwrap(), m)
}

/// Independence number of the circulant graph on `Z_q` with connection set
/// `{±d mod q}`, or `None` when some `d ≡ 0` (a loop: nothing fits).
fn circulant_alpha(q: u32, diffs: &[u64]) -> Option<u32> {
    let mut nbr = vec![0u32; q as usize];
    for v in 0..q {
        for &d in diffs {
            let d = (d % q as u64) as u32;
            if d == 0 {
                return None;
            }
            nbr[v as usize] |= 1 << ((v + d) % q);
            nbr[v as usize] |= 1 << ((v + q - d) % q);
        }
    }
    fn grow(cand: u32, size: u32, best: &mut u32, nbr: &[u32]) {
        if cand == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + cand.count_ones() <= *best {
            return;
        }
        let v = cand.trailing_zeros();
        grow(cand & !nbr[v as usize] & !(1 << v), size + 1, best, nbr);
        grow(cand & !(1 << v), size, best, nbr);
    }
    // vertex-transitive: some maximum independent set contains 0
    let all = if q == 32 { u32::MAX } else { (1u32 << q) - 1 };
    let mut best = 0;
    grow(all & !nbr[0] & !1, 1, &mut best, &nbr);
    Some(best)
}

/// Best density of a periodic M-set with period at most `q_max`.
fn periodic_oracle(set: &[u64], q_max: u32) -> Rational {
    let mut best = Rational::ZERO;
    for q in 1..=q_max {
        if let Some(alpha) = circulant_alpha(q, set) {
            best = best.max(r(alpha as u64, q as u64));
        }
    }
    best
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn report(id: u32, name: &str, limit: Option<Duration>, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut out = run();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            out.ok = false;
            out.detail.push_str(&format!("; exceeded {limit:?}"));
        }
    }
    println!(
        "[{}] {id}. {name}: {} ({:.2}s)",
        if out.ok { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64()
    );
    out.ok
}

fn violations(records: &[VerificationRecord]) -> Vec<String> {
    records
        .iter()
        .filter(|r| r.kappa_ge_bound == Some(false))
        .map(|r| format!("{}(a={},n={})", r.family, r.a, r.n))
        .collect()
}

fn first_few(v: &[String]) -> String {
    if v.is_empty() {
        String::new()
    } else {
        format!(" [{}]", v.iter().take(5).cloned().collect::<Vec<_>>().join("; "))
    }
}

fn block_members(b: BlockFamily, a: u64, blocks: u64) -> Vec<u64> {
    (0..blocks).flat_map(|i| b.blocks(a, i).unwrap().into_iter().flatten()).collect()
}

fn main() -> ExitCode {
    let seed: u64 = std::env::var("MOTZKIN_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    let lb_opts = SweepOptions {
        skip_mu: true,
        ..SweepOptions::default()
    };
    let mut all_ok = true;
    let mut suite_records: Vec<VerificationRecord> = Vec::new();
    let mut suite1_cases: Vec<FamilyCase> = Vec::new();

    all_ok &= report(1, "exact-equality suite", Some(Duration::from_secs(60)), || {
        let mut bad = Vec::new();
        let (mut cases, mut mu_checked) = (0, 0);
        for a in 1..=3u64 {
            let target = r(a, 3 * a + 1);
            for n in 1..=200u64 {
                let Ok(case) = classify_f1(a, n) else { continue };
                if !matches!(case.label, CaseLabel::F1CaseIJ | CaseLabel::F1N1) {
                    continue;
                }
                cases += 1;
                let raw = [a, a + 1, 2 * a + 1, n];
                let set = normalize(&raw).unwrap();
                let kappa = kappa_exact(&set).value;
                let literal = kappa_literal(set.elements(), 2 * set.max());
                let alpha = haralambis_upper(&set, 3 * a, DEFAULT_STATE_CAP).unwrap().alpha;
                let mut ok = kappa == target && literal == target && alpha == target;
                if raw.iter().max().copied().unwrap() <= 18 {
                    mu_checked += 1;
                    ok &= mu_exact_small(&set, DEFAULT_STATE_CAP).unwrap().mu == target;
                }
                if !ok {
                    bad.push(format!("a={a},n={n}: kappa={kappa} literal={literal} alpha={alpha}"));
                }
                suite1_cases.push(case);
            }
        }
        Outcome {
            ok: bad.is_empty() && cases > 0,
            detail: format!(
                "{cases} cases, {mu_checked} with exact density, {} mismatches{}",
                bad.len(),
                first_few(&bad)
            ),
        }
    });

    all_ok &= report(2, "lower-bound suite, family 1", Some(Duration::from_secs(300)), || {
        let pairs = (1..=6u64).flat_map(|a| (1..=5000u64).map(move |n| (a, n)));
        let recs = verify_pairs(Family::F1, pairs, &lb_opts);
        let checked = recs.iter().filter(|r| r.kappa_ge_bound.is_some()).count();
        let bad = violations(&recs);
        suite_records.extend(recs);
        Outcome {
            ok: bad.is_empty() && checked > 0,
            detail: format!("{checked} covered pairs, {} violations{}", bad.len(), first_few(&bad)),
        }
    });

    let mut f2_records: Vec<VerificationRecord> = Vec::new();
    all_ok &= report(3, "lower-bound suite, family 2", None, || {
        let mut pairs: Vec<(u64, u64)> = Vec::new();
        for a in [4u64, 8] {
            pairs.extend(block_members(BlockFamily::O, a, 3).into_iter().map(|n| (a, n)));
        }
        for a in [1u64, 5] {
            pairs.extend(block_members(BlockFamily::P, a, 3).into_iter().map(|n| (a, n)));
        }
        for a in [2u64, 6] {
            pairs.extend((3 * a + 2..=3 * a + 200).map(|n| (a, n)));
        }
        for a in [3u64, 7] {
            pairs.extend(
                (1..=2000u64)
                    .filter(|&n| classify_f2(a, n).is_ok_and(|c| c.label == CaseLabel::F2S))
                    .map(|n| (a, n)),
            );
        }
        let recs = verify_pairs(Family::F2, pairs, &lb_opts);
        let uncovered = recs.iter().filter(|r| r.theorem_bound.is_none()).count();
        let checked = recs.len() - uncovered;
        let mod4_branches = recs
            .iter()
            .filter(|r| r.case.as_ref().is_some_and(|c| c.label == CaseLabel::F2Mod4))
            .map(|r| r.n % 4 == 0)
            .collect::<std::collections::BTreeSet<_>>()
            .len();
        let bad = violations(&recs);
        f2_records = recs.clone();
        suite_records.extend(recs);
        Outcome {
            ok: bad.is_empty() && uncovered == 0 && mod4_branches == 2,
            detail: format!(
                "{checked} pairs, {uncovered} unexpectedly uncovered, {} violations{}",
                bad.len(),
                first_few(&bad)
            ),
        }
    });

    all_ok &= report(4, "proof-witness replays", None, || {
        let mut bad = Vec::new();
        let mut replays = 0;
        let covered = suite_records
            .iter()
            .filter_map(|r| r.case.clone())
            .chain(suite1_cases.iter().cloned())
            .filter(FamilyCase::is_covered);
        for case in covered {
            replays += 1;
            let bound = case.bound.unwrap();
            let replay = replay_proof_witness(&case).unwrap();
            let set = normalize(&[&case.family.base_elements(case.a)[..], &[case.n]].concat()).unwrap();
            let independent = witness_literal(set.elements(), replay.c, replay.m);
            if !(replay.matches && replay.value == bound && independent == bound) {
                bad.push(format!(
                    "{} a={} n={}: (c={},m={}) gives {} vs {}",
                    case.family, case.a, case.n, replay.c, replay.m, replay.value, bound
                ));
            }
        }
        Outcome {
            ok: bad.is_empty() && replays > 0,
            detail: format!("{replays} replays, {} mismatches{}", bad.len(), first_few(&bad)),
        }
    });

    all_ok &= report(5, "family-2 ceilings at 1/4", None, || {
        let quarter = r(1, 4);
        let bad: Vec<String> = f2_records
            .iter()
            .filter(|rec| rec.computed_kappa.is_some())
            .filter(|rec| {
                let k = rec.computed_kappa.unwrap();
                let ok = if rec.a % 2 == 0 { k <= quarter } else { k < quarter };
                !ok || rec.ceiling_ok != Some(ok)
            })
            .map(|rec| format!("a={},n={}", rec.a, rec.n))
            .collect();
        Outcome {
            ok: bad.is_empty() && !f2_records.is_empty(),
            detail: format!("{} records, {} violations{}", f2_records.len(), bad.len(), first_few(&bad)),
        }
    });

    all_ok &= report(6, "oracle equivalence", Some(Duration::from_secs(30)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = Vec::new();
        for _ in 0..200 {
            let size = rng.gen_range(2..=5usize);
            let raw: Vec<u64> = (0..size).map(|_| rng.gen_range(1..=30u64)).collect();
            let set = normalize(&raw).unwrap();
            let fast = kappa_exact(&set).value;
            let slow = kappa_sweep_oracle(&set, 2 * set.max()).unwrap().value;
            if fast != slow {
                bad.push(format!("{set}: {fast} vs {slow}"));
            }
        }
        Outcome {
            ok: bad.is_empty(),
            detail: format!("200 sets (seed {seed}), {} mismatches{}", bad.len(), first_few(&bad)),
        }
    });

    all_ok &= report(7, "density sandwich and periodic oracle", Some(Duration::from_secs(120)), || {
        let mut subsets: Vec<Vec<u64>> = Vec::new();
        for x in 1..=10u64 {
            subsets.push(vec![x]);
            for y in x + 1..=10 {
                subsets.push(vec![x, y]);
                for z in y + 1..=10 {
                    subsets.push(vec![x, y, z]);
                }
            }
        }
        let mut bad = Vec::new();
        for raw in &subsets {
            let set: DifferenceSet = normalize(raw).unwrap();
            let kappa = kappa_exact(&set).value;
            let mu = mu_exact_small(&set, DEFAULT_STATE_CAP).unwrap();
            let alpha = haralambis_upper(&set, 30, DEFAULT_STATE_CAP).unwrap().alpha;
            let oracle = periodic_oracle(raw, 20);
            if !(kappa <= mu.mu && mu.mu <= alpha && mu.mu == oracle) {
                bad.push(format!(
                    "{raw:?}: kappa={kappa} mu={} (period {}) alpha={alpha} oracle={oracle}",
                    mu.mu,
                    mu.witness.period()
                ));
            }
        }
        Outcome {
            ok: bad.is_empty(),
            detail: format!("{} sets, {} violations{}", subsets.len(), bad.len(), first_few(&bad)),
        }
    });

    all_ok &= report(8, "partition tiling", None, || {
        let mut bad = Vec::new();
        let mut notes = Vec::new();
        let runs = (1..=6u64)
            .map(|a| (BlockFamily::N, a))
            .chain([4u64, 8].map(|a| (BlockFamily::O, a)))
            .chain([1u64, 5].map(|a| (BlockFamily::P, a)));
        for (blocks, a) in runs {
            let rep = partition_check(blocks, a, 100_000).unwrap();
            if !rep.tiles {
                bad.push(format!("{blocks:?} a={a}: overlap {:?} gap {:?}", rep.first_overlap, rep.first_gap));
            }
            notes.push(format!(
                "{blocks:?}(a={a}) union starts at {}, leaving all of 1..={} uncovered, not just {}",
                rep.start, rep.uncovered_below_start, rep.claimed_excluded
            ));
        }
        Outcome {
            ok: bad.is_empty(),
            detail: format!(
                "10 block families tile [start, 100000], {} failures{}; reported: {}",
                bad.len(),
                first_few(&bad),
                notes.join("; ")
            ),
        }
    });

    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
