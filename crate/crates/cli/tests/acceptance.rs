//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always print.

use std::collections::BTreeMap;
use std::fs;
use std::time::{Duration, Instant};

use clap::Parser;
use supercong::bernoulli::{bernoulli_exact, vsc_denominator};
use supercong::congruences::{exact_sides, verify_range, ParamPolicy, PrimeSession, StatementId, VerifyOptions};
use supercong::modring::{from_rational, ratio};
use supercong::primes::{is_prime, primes_in};
use supercong::scanners::{
    residue_in_range, scan_conj_1_1, scan_conj_1_2, search_composites, Conj11Grid, Conj12Config,
    default_exact_workers, Family, ScanTarget, Verdict,
};
use supercong::seqsums::harmonic_exact;
use supercong::{BigRational, PrimePowerModulus};
use supercong_cli::{execute, RunConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, budget_secs: u64) -> bool {
    elapsed <= Duration::from_secs(budget_secs)
}

/// `L2_2` at `k = p-1` off the Wilson primes, and `L3_1a` at `m = 2n+1`.
fn known_erratum(id: &str, p: u64, params: &serde_json::Value) -> bool {
    let get = |k: &str| params.get(k).and_then(|v| v.as_u64());
    match id {
        "L2_2" => get("k") == Some(p - 1) && p != 5 && p != 13,
        "L3_1a" => matches!((get("m"), get("n")), (Some(m), Some(n)) if m == 2 * n + 1),
        _ => false,
    }
}

fn theorem_suite() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite.jsonl");
    let argv = [
        "supercong",
        "verify",
        "--statements",
        "all",
        "--primes",
        "5..499",
        "--guard",
        "2",
        "--format",
        "jsonl",
        "--workers",
        "1",
        "--output",
        out.to_str().unwrap(),
    ];
    let config = RunConfig::try_parse_from(argv).unwrap();
    let start = Instant::now();
    let code = execute(&config).unwrap();
    let elapsed = start.elapsed();
    let text = fs::read_to_string(&out).unwrap();
    let mut records = 0usize;
    let mut fails: BTreeMap<String, usize> = BTreeMap::new();
    let mut unexplained = Vec::new();
    for line in text.lines() {
        records += 1;
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v["pass"].as_bool().unwrap() {
            continue;
        }
        let id = v["statement_id"].as_str().unwrap().to_string();
        let p = v["p"].as_u64().unwrap();
        if !known_erratum(&id, p, &v["params"]) {
            unexplained.push(format!("{id} p={p} {}", v["params"]));
        }
        *fails.entry(id).or_default() += 1;
    }
    let total: usize = fails.values().sum();
    let by_id: Vec<String> = fails.iter().map(|(k, n)| format!("{k}: {n}")).collect();
    outcome(
        code == 0 && total == 0 && within(elapsed, 60),
        format!(
            "{records} records, {total} FAIL ({}), {} outside the L2_2 k=p-1 / L3_1a m=2n+1 errata, exit {code}, {:.1}s on 1 worker (budget 60s)",
            if by_id.is_empty() { "none".into() } else { by_id.join(", ") },
            unexplained.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let policy = ParamPolicy::default();
    let mut points = 0usize;
    let mut mismatches = Vec::new();
    for p in [5u64, 7, 11, 13] {
        let session = PrimeSession::new(p).unwrap();
        for &id in StatementId::ALL {
            for prm in policy.params_for(id, p) {
                let w = id.claim(&prm) + 2;
                let ring = PrimePowerModulus::new(p, w).unwrap();
                let (lhs, rhs) = session.sides(id, &prm, w).unwrap();
                let (el, er) = exact_sides(id, &prm).unwrap();
                points += 1;
                if lhs != from_rational(&el, &ring).unwrap() || rhs != from_rational(&er, &ring).unwrap() {
                    mismatches.push(format!("{id} {prm}"));
                }
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{points} (statement, p, params) points, {} mismatches", mismatches.len()),
    )
}

fn proof_identities() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for p in [5u64, 7, 11, 13] {
        for m in 1..=3u32 {
            let h = harmonic_exact(p - 1, m).unwrap();
            let total: BigRational = h[1..].iter().cloned().sum();
            let correction = if m == 1 {
                BigRational::from_integer((p - 1).into())
            } else {
                harmonic_exact(p - 1, m - 1).unwrap()[p as usize - 1].clone()
            };
            let rhs = BigRational::from_integer(p.into()) * &h[p as usize - 1] - correction;
            checked += 1;
            if total != rhs {
                bad.push(format!("p={p} m={m}"));
            }
        }
    }
    let h = harmonic_exact(4, 1).unwrap();
    let total: BigRational = h[1..].iter().cloned().sum();
    let example = total == ratio(77, 12) && ratio(5, 1) * ratio(25, 12) - ratio(4, 1) == ratio(77, 12);
    outcome(
        bad.is_empty() && example,
        format!("{checked} exact identities, {} mismatches; p=5 m=1 gives {total}", bad.len()),
    )
}

fn bernoulli_integrity() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for n in (2..=600usize).step_by(2) {
        let b = bernoulli_exact(n).unwrap();
        if b.denom().magnitude() != &vsc_denominator(n as u64).unwrap() {
            bad.push(n);
        }
    }
    let b12 = bernoulli_exact(12).unwrap();
    outcome(
        bad.is_empty() && b12 == ratio(-691, 2730),
        format!(
            "300 even n <= 600, {} denominator mismatches; B_12 = {b12}; {:.1}s",
            bad.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn conjecture_1_1() -> Outcome {
    let start = Instant::now();
    let mut records = 0usize;
    let mut violated = 0usize;
    let mut grid_ok = true;
    for p in [2u64, 3, 5, 7, 11] {
        let grid = Conj11Grid::standard(p);
        let points = grid.points(p);
        grid_ok &= (1..=4 * p * p).all(|n| points.contains(&n));
        grid_ok &= (1..=p).all(|a| (0..=4).all(|b| points.contains(&(a * p.pow(b)))));
        for f in Family::BOTH.into_iter().filter(|f| f.applies_to(p)) {
            let recs = scan_conj_1_1(p, f, &points, 2).unwrap();
            records += recs.len();
            violated += recs.iter().filter(|r| r.verdict == Verdict::Violated).count();
        }
    }
    let elapsed = start.elapsed();
    outcome(
        violated == 0 && grid_ok && within(elapsed, 300),
        format!(
            "{records} records over p in {{2, 3, 5, 7, 11}}, both families, {violated} violated, grid complete: {grid_ok}, {:.1}s (budget 300s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn conjecture_1_2() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (part, digits) in [(ScanTarget::Conj1_2i, 3), (ScanTarget::Conj1_2ii, 2)] {
        let cfg = Conj12Config::new(2, 8, 1000);
        let recs = scan_conj_1_2(part, &cfg).unwrap();
        let counted = recs.iter().filter(|r| r.in_hypothesis).count();
        let violated = recs.iter().filter(|r| r.is_violation()).count();
        let easy_fail = recs
            .iter()
            .filter(|r| r.in_hypothesis && r.easy_layer != Some(true))
            .count();
        let wrong_modulus = recs.iter().filter(|r| r.required != digits).count();
        pass &= violated == 0 && easy_fail == 0 && wrong_modulus == 0 && counted > 0;
        parts.push(format!(
            "{part}: {counted} points mod p^{digits}, {violated} violated, {easy_fail} mod-p failures",
        ));
    }
    let elapsed = start.elapsed();
    outcome(
        pass && within(elapsed, 300),
        format!("m <= 8, p < 1000; {}; {:.1}s (budget 300s)", parts.join("; "), elapsed.as_secs_f64()),
    )
}

fn composite_search() -> Outcome {
    let start = Instant::now();
    let recs = search_composites(4, 120, &Family::BOTH, false, default_exact_workers()).unwrap();
    let elapsed = start.elapsed();
    let composites: Vec<u64> = (4..=120).filter(|&n| !is_prime(n)).collect();
    let holds = recs.iter().filter(|r| r.verdict == Verdict::Holds).count();
    let undefined = recs.iter().filter(|r| r.verdict == Verdict::Undefined).count();
    let covered = composites.iter().all(|&n| {
        Family::BOTH
            .iter()
            .all(|&f| recs.iter().any(|r| r.point.n == Some(n) && r.point.family == Some(f)))
    });
    let evidenced = recs.iter().all(|r| {
        let (Some(n), Some(f), Some(ev)) = (r.point.n, r.point.family, r.evidence.as_ref()) else {
            return false;
        };
        !ev.primes.is_empty() && (r.verdict == Verdict::Undefined || residue_in_range(ev, n, f.composite_exponent()))
    });
    outcome(
        holds == 0 && covered && evidenced && within(elapsed, 600),
        format!(
            "{} composites, {} records, {holds} holds, {undefined} undefined, all classified with evidence: {}, {:.1}s (budget 600s)",
            composites.len(),
            recs.len(),
            covered && evidenced,
            elapsed.as_secs_f64()
        ),
    )
}

fn falsification() -> Outcome {
    let primes = primes_in(5, 499);
    let opts = VerifyOptions {
        guard: 2,
        strengthen: StatementId::ALL.iter().copied().collect(),
    };
    let summary = verify_range(StatementId::ALL, &primes, &ParamPolicy::default(), &opts).unwrap();
    let mut caught: BTreeMap<StatementId, usize> = StatementId::ALL.iter().map(|&id| (id, 0)).collect();
    for r in summary.failures() {
        let params = serde_json::to_value(r.params).unwrap();
        let structural = r.statement == StatementId::T1_2 && r.params.m == Some(1);
        let erratum = known_erratum(r.statement.as_str(), r.params.p, &params);
        if !structural && !erratum {
            *caught.get_mut(&r.statement).unwrap() += 1;
        }
    }
    let missed: Vec<String> = caught.iter().filter(|(_, &n)| n == 0).map(|(id, _)| id.to_string()).collect();
    let weakest = caught.iter().min_by_key(|(_, &n)| n).unwrap();
    outcome(
        missed.is_empty(),
        format!(
            "{} statements strengthened by 1, {} escape; fewest failures {} ({})",
            caught.len(),
            missed.len(),
            weakest.0,
            weakest.1
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("theorem suite 5..499", theorem_suite),
        ("oracle equivalence", oracle_equivalence),
        ("exact proof identities", proof_identities),
        ("Bernoulli integrity", bernoulli_integrity),
        ("conj1_1 partial-sum scan", conjecture_1_1),
        ("conj1_2 family scan", conjecture_1_2),
        ("composite search", composite_search),
        ("falsification sensitivity", falsification),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {name}: {status} ({})", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
