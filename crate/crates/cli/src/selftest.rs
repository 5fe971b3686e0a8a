//! Built-in checks: modular pipeline against exact rationals, exact
//! identities, and Bernoulli cross-checks. Output has no timings so two
//! runs print the same bytes.

use num_traits::Zero;
use supercong::bernoulli::{bernoulli_exact, bernoulli_in, vsc_denominator};
use supercong::congruences::{cross_consistency, exact_sides, ParamPolicy, PrimeSession, StatementId};
use supercong::modring::{from_rational, ratio};
use supercong::primes::primes_in;
use supercong::seqsums::{harmonic_exact, inv_power_sum};
use supercong::{BigRational, PrimePowerModulus, Result};

use crate::{CliResult, Output, EXIT_FAIL, EXIT_OK};

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        format!("{status} {}: {}", self.name, self.detail)
    }
}

pub const ORACLE_PRIMES: [u64; 4] = [5, 7, 11, 13];

/// Modular sides equal exact sides reduced into the working ring.
pub fn oracle_equivalence() -> Result<Check> {
    let policy = ParamPolicy::default();
    let mut points = 0usize;
    let mut mismatches = Vec::new();
    for p in ORACLE_PRIMES {
        let session = PrimeSession::new(p)?;
        for &id in StatementId::ALL {
            for prm in policy.params_for(id, p) {
                let w = id.claim(&prm) + 2;
                let ring = PrimePowerModulus::new(p, w)?;
                let (lhs, rhs) = session.sides(id, &prm, w)?;
                let (el, er) = exact_sides(id, &prm)?;
                points += 1;
                if lhs != from_rational(&el, &ring)? || rhs != from_rational(&er, &ring)? {
                    mismatches.push(format!("{id} {prm}"));
                }
            }
        }
    }
    Ok(Check {
        name: "oracle_equivalence",
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            format!("{points} points at p in {{5, 7, 11, 13}}")
        } else {
            format!("{} of {points} points differ, first {}", mismatches.len(), mismatches[0])
        },
    })
}

/// `Σ_{k<p} H_k^(m) = p H_{p-1}^(m) - H_{p-1}^(m-1)` with `H^(0)_{p-1} = p - 1`.
pub fn harmonic_telescoping() -> Result<Check> {
    let mut bad = Vec::new();
    for p in ORACLE_PRIMES {
        for m in 1..=3u32 {
            let h = harmonic_exact(p - 1, m)?;
            let total: BigRational = h[1..].iter().cloned().sum();
            let lower = if m == 1 {
                BigRational::from_integer((p - 1).into())
            } else {
                harmonic_exact(p - 1, m - 1)?[p as usize - 1].clone()
            };
            let rhs = BigRational::from_integer(p.into()) * &h[p as usize - 1] - lower;
            if total != rhs {
                bad.push(format!("p={p} m={m}"));
            }
        }
    }
    let h = harmonic_exact(4, 1)?;
    let example: BigRational = h[1..].iter().cloned().sum();
    if example != ratio(77, 12) {
        bad.push(format!("p=5 m=1 total {example}"));
    }
    Ok(Check {
        name: "harmonic_telescoping",
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "m in 1..=3, p in {5, 7, 11, 13}; p=5 m=1 total 77/12".into()
        } else {
            format!("mismatch at {}", bad.join(", "))
        },
    })
}

/// Recurrence denominators against von Staudt-Clausen, odd indices, `B_12`.
pub fn bernoulli_integrity() -> Result<Check> {
    let mut bad = Vec::new();
    for n in (2..=600usize).step_by(2) {
        if bernoulli_exact(n)?.denom().magnitude() != &vsc_denominator(n as u64)? {
            bad.push(format!("B_{n} denominator"));
        }
    }
    for n in (3..=599usize).step_by(2) {
        if !bernoulli_exact(n)?.is_zero() {
            bad.push(format!("B_{n} nonzero"));
        }
    }
    if bernoulli_exact(12)? != ratio(-691, 2730) {
        bad.push("B_12".into());
    }
    Ok(Check {
        name: "bernoulli_integrity",
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "even n <= 600 match von Staudt-Clausen; odd n vanish; B_12 = -691/2730".into()
        } else {
            format!("{} problems, first {}", bad.len(), bad[0])
        },
    })
}

/// `Σ_{k<p} 1/k^s ≡ p s/(s+1) B_{p-1-s} (mod p^2)` for `s ∈ {2, 4}`.
///
/// Built from the power-sum table and the cached Bernoulli numbers, not
/// through the statement catalog.
pub fn power_sum_bernoulli() -> Result<Check> {
    let mut bad = Vec::new();
    let primes = primes_in(7, 499);
    for &p in &primes {
        let ring = PrimePowerModulus::new(p, 2)?;
        for s in [2u32, 4] {
            let lhs = inv_power_sum(s, &ring)?;
            let b = bernoulli_in((p - 1 - s as u64) as usize, &ring)?;
            let rhs = ring.from_u64(p * s as u64) * ring.from_u64(s as u64 + 1).inverse()? * b;
            if lhs != rhs {
                bad.push(format!("p={p} s={s}"));
            }
        }
    }
    Ok(Check {
        name: "power_sum_bernoulli",
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("s in {{2, 4}} at {} primes 5 < p <= 499", primes.len())
        } else {
            format!("mismatch at {}", bad.join(", "))
        },
    })
}

/// The general family at `m = p ± 1` against its direct specializations.
pub fn specializations() -> Result<Check> {
    let mut checks = 0usize;
    let mut bad = Vec::new();
    for p in primes_in(7, 61) {
        let report = cross_consistency(p)?;
        checks += report.checks.len();
        bad.extend(
            report
                .checks
                .iter()
                .filter(|c| !c.equal)
                .map(|c| format!("p={p} n={} m={}", c.n, c.m)),
        );
    }
    Ok(Check {
        name: "specializations",
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{checks} comparisons for 7 <= p <= 61")
        } else {
            format!("mismatch at {}", bad.join(", "))
        },
    })
}

pub fn all_checks() -> Result<Vec<Check>> {
    Ok(vec![
        oracle_equivalence()?,
        harmonic_telescoping()?,
        bernoulli_integrity()?,
        power_sum_bernoulli()?,
        specializations()?,
    ])
}

pub(crate) fn run_checks(out: &mut Output) -> CliResult<i32> {
    let checks = all_checks()?;
    for c in &checks {
        out.line(&c.line())?;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    out.summary(&format!("selftest: {} checks, {} failed", checks.len(), failed))?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAIL })
}
