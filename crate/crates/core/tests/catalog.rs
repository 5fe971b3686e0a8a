use supercong::congruences::{
    cross_consistency, exact_sides, verify, verify_range, ParamPolicy, Params, PrimeSession,
    StatementId, VerifyOptions,
};
use supercong::modring::{from_rational, PrimePowerModulus};
use supercong::primes::primes_in;
use supercong::Valuation;

#[test]
fn modular_sides_match_exact_rationals() {
    let policy = ParamPolicy::default();
    for p in [5u64, 7, 11, 13] {
        let session = PrimeSession::new(p).unwrap();
        for &id in StatementId::ALL {
            for prm in policy.params_for(id, p) {
                let w = id.claim(&prm) + 2;
                let ring = PrimePowerModulus::new(p, w).unwrap();
                let (lhs, rhs) = session.sides(id, &prm, w).unwrap();
                let (el, er) = exact_sides(id, &prm).unwrap();
                assert_eq!(lhs, from_rational(&el, &ring).unwrap(), "{id} {prm} lhs");
                assert_eq!(rhs, from_rational(&er, &ring).unwrap(), "{id} {prm} rhs");
            }
        }
    }
}

#[test]
fn failures_up_to_100_are_the_known_ones() {
    let primes = primes_in(5, 100);
    let summary = verify_range(
        StatementId::ALL,
        &primes,
        &ParamPolicy::default(),
        &VerifyOptions::with_guard(2),
    )
    .unwrap();
    for r in summary.failures() {
        let known = match r.statement {
            StatementId::L2_2 => r.params.k == Some(r.params.p - 1),
            StatementId::L3_1a => r.params.m == Some(2 * r.params.n.unwrap() + 1),
            _ => false,
        };
        assert!(known, "unexpected failure {} {}", r.statement, r.params);
    }
    // Wilson primes pass at k = p - 1
    for r in summary.reports.iter().filter(|r| r.statement == StatementId::L2_2) {
        if r.params.k == Some(r.params.p - 1) {
            assert_eq!(r.pass, [5, 13].contains(&r.params.p), "p = {}", r.params.p);
        }
    }
}

#[test]
fn guard_only_refines() {
    let policy = ParamPolicy::default();
    for p in [7u64, 11, 17, 23] {
        for &id in StatementId::ALL {
            for prm in policy.params_for(id, p).into_iter().take(4) {
                let reps: Vec<_> = (0..5).map(|g| verify(id, &prm, g).unwrap()).collect();
                for pair in reps.windows(2) {
                    assert!(pair[1].pass || !pair[0].pass, "{id} {prm}");
                    if let Valuation::Exact(v) = pair[0].computed {
                        assert_eq!(pair[1].computed, Valuation::Exact(v), "{id} {prm}");
                    }
                }
            }
        }
    }
}

#[test]
fn verify_is_deterministic() {
    let prm = Params::prime(29).with_m(3).with_n(2);
    let a = verify(StatementId::T1_3_8, &prm, 2).unwrap();
    let b = verify(StatementId::T1_3_8, &prm, 2).unwrap();
    assert_eq!((a.residual, a.computed), (b.residual, b.computed));
}

#[test]
fn specializations_agree_with_the_general_family() {
    for p in primes_in(7, 60) {
        assert!(cross_consistency(p).unwrap().all_equal(), "p = {p}");
    }
}

#[test]
fn full_range_timing() {
    let primes = primes_in(5, 499);
    let t = std::time::Instant::now();
    let summary = verify_range(
        StatementId::ALL,
        &primes,
        &ParamPolicy::default(),
        &VerifyOptions::with_guard(2),
    )
    .unwrap();
    eprintln!("{} reports, {} failures, {:?}", summary.reports.len(), summary.failure_count(), t.elapsed());
}

#[test]
fn claims_are_tight() {
    let primes = primes_in(5, 499);
    let opts = VerifyOptions {
        guard: 2,
        strengthen: StatementId::ALL.iter().copied().collect(),
    };
    let summary = verify_range(StatementId::ALL, &primes, &ParamPolicy::default(), &opts).unwrap();
    for &id in StatementId::ALL {
        let tight = summary.failures().any(|r| {
            r.statement == id
                && !(id == StatementId::L2_2 && r.params.k == Some(r.params.p - 1))
                && !(id == StatementId::L3_1a && r.params.m == Some(2 * r.params.n.unwrap() + 1))
        });
        assert!(tight, "{id} holds one digit beyond its claim everywhere");
    }
}
