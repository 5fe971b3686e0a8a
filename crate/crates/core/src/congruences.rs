//! The statement catalog and the verification engine.
//!
//! Each statement evaluates `LHS - RHS` in `Z/p^{claim+g}` and reports the
//! observed p-adic valuation of the residual. A congruence that fails is a
//! report with `pass = false`, never an error.
//!
//! Every statement also has an exact evaluation over the rationals
//! ([`exact_sides`]), written from the definitions without the modular
//! tables, which the tests use as an oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bernoulli::{self, bernoulli_exact, bernoulli_in};
use crate::error::{Error, Result};
use crate::fracbinom::{binom_exact_all, family_terms};
use crate::modring::{BigRational, PrimePowerModulus, Residue, Valuation};
use crate::seqsums::{self, HarmonicTable, SymTable};

/// Default number of guard digits above the claimed exponent.
pub const DEFAULT_GUARD: u32 = 2;

macro_rules! statement_ids {
    ($($id:ident),* $(,)?) => {
        /// Identifier of one catalogued congruence.
        #[allow(non_camel_case_types)]
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum StatementId {
            $($id),*
        }

        impl StatementId {
            pub const ALL: &'static [StatementId] = &[$(StatementId::$id),*];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $(StatementId::$id => stringify!($id)),*
                }
            }
        }
    };
}

statement_ids!(
    T1_1, R1_4, T1_2, C1_3, R1_5, T1_3_6, T1_3_7, T1_3_8, R1_9, R1_10, L2_1a, L2_1b, L2_2, L2_3,
    L2_4a, L2_4b, L2_5, L2_6, L2_7, L2_8, L3_1a, L3_1b, E3_3, L3_2, R3_1a, R3_1b, A_SU3, A_T23,
    W_PAIR,
);

impl fmt::Display for StatementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatementId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StatementId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown statement id `{s}`")))
    }
}

impl Serialize for StatementId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// A parameter a statement takes besides `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    M,
    N,
    K,
    S,
    Part,
}

/// Catalog record for one statement.
#[derive(Clone, Copy, Debug)]
pub struct Statement {
    pub id: StatementId,
    pub signature: &'static [Param],
    pub formula: &'static str,
}

/// Parameter values for one evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Params {
    pub p: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<u64>,
}

impl Params {
    pub fn prime(p: u64) -> Self {
        Self { p, ..Self::default() }
    }
    pub fn with_m(mut self, m: u64) -> Self {
        self.m = Some(m);
        self
    }
    pub fn with_n(mut self, n: u64) -> Self {
        self.n = Some(n);
        self
    }
    pub fn with_k(mut self, k: u64) -> Self {
        self.k = Some(k);
        self
    }
    pub fn with_s(mut self, s: u64) -> Self {
        self.s = Some(s);
        self
    }
    pub fn with_part(mut self, part: u64) -> Self {
        self.part = Some(part);
        self
    }

    fn get(&self, which: Param) -> Option<u64> {
        match which {
            Param::M => self.m,
            Param::N => self.n,
            Param::K => self.k,
            Param::S => self.s,
            Param::Part => self.part,
        }
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={}", self.p)?;
        for (name, v) in [("m", self.m), ("n", self.n), ("k", self.k), ("s", self.s), ("part", self.part)] {
            if let Some(v) = v {
                write!(f, " {name}={v}")?;
            }
        }
        Ok(())
    }
}

impl StatementId {
    pub fn statement(&self) -> Statement {
        use Param::*;
        use StatementId::*;
        let (signature, formula): (&'static [Param], &'static str) = match self {
            T1_1 => (&[], "sum_{k=0}^{p-1} (-1/(p+1) choose k)^(p+1) = 0 mod p^5"),
            R1_4 => (&[], "sum_{k=0}^{p-1} (-1/(p+1) choose k)^(p+1) = p^5 B_{p-3}/18 mod p^6"),
            T1_2 => (&[M], "sum_{k=0}^{p-1} (-1)^(km) (p/m-1 choose k)^m = 0 mod p^4"),
            C1_3 => (&[], "sum_{k=0}^{p-1} (1/(p-1) choose k)^(p-1) = 0 mod p^4"),
            R1_5 => (&[], "sum_{k=0}^{p-1} (1/(p-1) choose k)^(p-1) = 2 p^4 B_{p-3}/3 mod p^5"),
            T1_3_6 => (&[M], "sum_{k=1}^{p-1} (-1)^(km) (p/m-1 choose k)^m / k^2 = H_{p-1}/p mod p^3"),
            T1_3_7 => (
                &[M, N],
                "sum_{k=1}^{p-1} (-1)^(km) (p/m-1 choose k)^m / k^(2n) = -p B_{p-1-2n}/(2n+1) mod p^2",
            ),
            T1_3_8 => (
                &[M, N],
                "sum_{k=1}^{p-1} (-1)^(km) (p/m-1 choose k)^m / k^(2n-1) \
                 = (1 + (1-m)(2n+1)/(2m)) p^2 n B_{p-1-2n}/(2n+1) mod p^3",
            ),
            R1_9 => (
                &[N],
                "sum_{k=1}^{p-1} (1/(p-1) choose k)^(p-1) / k^(2n-1) = -2 p^2 n^2 B_{p-1-2n}/(2n+1) mod p^3",
            ),
            R1_10 => (
                &[N],
                "sum_{k=1}^{p-1} (-1/(p+1) choose k)^(p+1) / k^(2n-1) = p^2 n B_{p-1-2n}/(2n+1) mod p^3",
            ),
            L2_1a => (&[], "H_{p-1} = -p^2 B_{p-3}/3 mod p^3"),
            L2_1b => (&[], "H_{p-1}^(2) = 2 p B_{p-3}/3 mod p^2"),
            L2_2 => (&[K], "e_k(1, 1/2, ..., 1/(p-1)) = (-1)^(k-1) p B_{p-1-k}/(k+1) mod p^2"),
            L2_3 => (&[], "sum_{k=1}^{p-1} H_k = -p^3 B_{p-3}/3 - p + 1 mod p^4"),
            L2_4a => (&[], "sum_{k=1}^{p-1} H_k^(2) = 0 mod p^2"),
            L2_4b => (&[], "sum_{k=1}^{p-1} H_k^(3) = 0 mod p"),
            L2_5 => (&[], "sum_{k=1}^{p-1} e_2(1, ..., 1/k) = -2 p^2 B_{p-3}/3 + p - 1 mod p^3"),
            L2_6 => (&[], "sum_{k=1}^{p-1} e_3(1, ..., 1/k) = -p B_{p-3}/3 - p + 1 mod p^2"),
            L2_7 => (&[], "sum_{k=1}^{p-1} e_4(1, ..., 1/k) = -1 mod p"),
            L2_8 => (
                &[],
                "sum_{k=1}^{p-1} sum_{1<=i<j<=k} (1/(i j^2) + 1/(i^2 j)) = 0 mod p",
            ),
            L3_1a => (
                &[M, N],
                "sum_{k=1}^{p-1} H_k^(m) / k^(2n+1-m) = (-1)^(m-1) C(2n+1, m) B_{p-1-2n}/(2n+1) mod p",
            ),
            L3_1b => (
                &[M, N],
                "sum_{k=1}^{p-1} H_k^(m) / k^(2n-m) \
                 = p B_{p-1-2n}/(2n+1) (n + (-1)^m (n-m)/(m+1) C(2n+1, m)) mod p^2",
            ),
            E3_3 => (&[S], "sum_{k=1}^{p-1} 1/k^s = p s B_{p-1-s}/(s+1) mod p^2"),
            L3_2 => (&[], "sum_{k=1}^{p-1} (1 - p H_k)/k^2 = H_{p-1}/p mod p^3"),
            R3_1a => (&[], "sum_{k=1}^{p-1} H_k/k^2 = B_{p-3} mod p"),
            R3_1b => (&[], "sum_{k=1}^{p-1} H_k/k^3 = -p B_{p-5}/10 mod p^2"),
            A_SU3 => (&[], "sum_{k=1}^{p-1} H_k^2/k^2 = 0 mod p"),
            A_T23 => (&[], "sum_{1<=j<k<=p-1} 1/(j k^2) = -3 H_{p-1}/p^2 mod p^2"),
            W_PAIR => (
                &[Part],
                "part 1: H_{p-1} = 0 mod p^2; part 2: C(2p-1, p-1) = 1 mod p^3",
            ),
        };
        Statement {
            id: *self,
            signature,
            formula,
        }
    }

    /// Claimed valuation of `LHS - RHS`.
    pub fn claim(&self, params: &Params) -> u32 {
        use StatementId::*;
        match self {
            T1_1 => 5,
            R1_4 => 6,
            T1_2 | C1_3 => 4,
            R1_5 => 5,
            T1_3_6 => 3,
            T1_3_7 => 2,
            T1_3_8 | R1_9 | R1_10 => 3,
            L2_1a => 3,
            L2_1b | L2_2 => 2,
            L2_3 => 4,
            L2_4a => 2,
            L2_4b => 1,
            L2_5 => 3,
            L2_6 => 2,
            L2_7 | L2_8 => 1,
            L3_1a => 1,
            L3_1b | E3_3 => 2,
            L3_2 => 3,
            R3_1a => 1,
            R3_1b => 2,
            A_SU3 => 1,
            A_T23 => 2,
            W_PAIR => {
                if params.part == Some(2) {
                    3
                } else {
                    2
                }
            }
        }
    }

    /// Check the hypotheses of the statement; `Err` carries the reason.
    pub fn applicable(&self, params: &Params) -> std::result::Result<(), String> {
        use StatementId::*;
        let p = params.p;
        if !crate::primes::is_prime(p) {
            return Err(format!("{p} is not prime"));
        }
        let sig = self.statement().signature;
        for which in [Param::M, Param::N, Param::K, Param::S, Param::Part] {
            match (sig.contains(&which), params.get(which)) {
                (true, None) => return Err(format!("missing parameter {which:?}")),
                (false, Some(_)) => return Err(format!("unexpected parameter {which:?}")),
                _ => {}
            }
        }
        let m = params.m.unwrap_or(1);
        let n = params.n.unwrap_or(1);
        let need = |ok: bool, why: &str| if ok { Ok(()) } else { Err(why.to_string()) };
        let p_gt = |bound: u64| need(p > bound, &format!("needs p > {bound}"));
        match self {
            T1_1 | C1_3 | R1_5 | L2_1a | L2_1b | L2_3 | L2_4a | L2_4b | L2_5 | L2_6 | L2_7
            | L2_8 | R3_1a => p_gt(3),
            R1_4 | L3_2 | R3_1b | A_SU3 | A_T23 => p_gt(5),
            T1_2 => {
                p_gt(3)?;
                need(m >= 1 && !m.is_multiple_of(p), "needs m >= 1 with p not dividing m")
            }
            T1_3_6 => {
                p_gt(5)?;
                need(m >= 1 && !m.is_multiple_of(p), "needs m >= 1 with p not dividing m")
            }
            T1_3_7 | T1_3_8 => {
                p_gt(3)?;
                need(m >= 1 && !m.is_multiple_of(p), "needs m >= 1 with p not dividing m")?;
                need(n >= 1 && 2 * n + 3 <= p, "needs 1 <= n <= (p-3)/2")
            }
            R1_9 | R1_10 => {
                p_gt(3)?;
                need(n >= 1 && p > 2 * n + 1, "needs n >= 1 and p > 2n+1")
            }
            L2_2 => {
                p_gt(3)?;
                let k = params.k.unwrap_or(0);
                need(k >= 1 && k < p, "needs 1 <= k <= p-1")
            }
            L3_1a => need(
                n >= 1 && m >= 1 && m <= 2 * n + 1 && p > 2 * n + 1,
                "needs m, n >= 1, m <= 2n+1 and p > 2n+1",
            ),
            L3_1b => need(
                n >= 1 && m >= 1 && m < 2 * n && p > 2 * n + 1,
                "needs m, n >= 1, m < 2n and p > 2n+1",
            ),
            E3_3 => {
                let s = params.s.unwrap_or(0);
                need(p >= 3 && s >= 1 && s + 2 <= p, "needs p >= 3 and 1 <= s <= p-2")
            }
            W_PAIR => {
                p_gt(3)?;
                need(matches!(params.part, Some(1 | 2)), "part must be 1 or 2")
            }
        }
    }
}

/// Outcome of one verification.
#[derive(Clone, Debug, Serialize)]
pub struct CongruenceReport {
    pub statement: StatementId,
    pub params: Params,
    pub working_precision: u32,
    #[serde(serialize_with = "residue_as_string")]
    pub residual: Residue,
    pub computed: Valuation,
    pub claimed: u32,
    pub pass: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

fn residue_as_string<S: Serializer>(r: &Residue, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.value().to_string())
}

impl CongruenceReport {
    /// Observed valuation minus the claim; for `AtLeast` this is a lower bound.
    pub fn margin(&self) -> i64 {
        self.computed.amount() as i64 - self.claimed as i64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Direct {
    /// `(-1/(p+1) choose k)^(p+1)`
    NegInvPlus,
    /// `(1/(p-1) choose k)^(p-1)`
    InvMinus,
}

type Cache<K, V> = Mutex<HashMap<K, Arc<V>>>;

fn cached<K: Eq + Hash, V>(
    cache: &Cache<K, V>,
    key: K,
    build: impl FnOnce() -> Result<V>,
) -> Result<Arc<V>> {
    if let Some(v) = cache.lock().expect("cache lock").get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(build()?);
    Ok(cache
        .lock()
        .expect("cache lock")
        .entry(key)
        .or_insert(v)
        .clone())
}

/// Per-prime tables shared by every statement evaluated at that prime.
#[derive(Debug, Default)]
pub struct PrimeSession {
    p: u64,
    rings: Cache<u32, PrimePowerModulus>,
    inverses: Cache<u32, Vec<Residue>>,
    harmonics: Cache<(u32, u32), HarmonicTable>,
    family: Cache<(u64, u32), Vec<Residue>>,
    direct: Cache<(Direct, u32), Vec<Residue>>,
    sym: Cache<(usize, u32), SymTable>,
    elem_all: Cache<u32, Vec<Residue>>,
}

impl PrimeSession {
    pub fn new(p: u64) -> Result<Self> {
        if !crate::primes::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self {
            p,
            ..Self::default()
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    fn ring(&self, w: u32) -> Result<PrimePowerModulus> {
        cached(&self.rings, w, || PrimePowerModulus::new(self.p, w)).map(|r| (*r).clone())
    }

    /// `1/k` for `k = 0..p` (index 0 holds zero).
    fn inverses(&self, w: u32) -> Result<Arc<Vec<Residue>>> {
        cached(&self.inverses, w, || seqsums::inverse_table(self.p - 1, &self.ring(w)?))
    }

    fn harmonic(&self, order: u32, w: u32) -> Result<Arc<HarmonicTable>> {
        cached(&self.harmonics, (order, w), || {
            Ok(seqsums::harmonic_from_inverses(&self.inverses(w)?, order))
        })
    }

    fn sym(&self, degree: usize, w: u32) -> Result<Arc<SymTable>> {
        cached(&self.sym, (degree, w), || {
            Ok(seqsums::elem_sym_from_inverses(&self.inverses(w)?, degree))
        })
    }

    fn elem_all(&self, w: u32) -> Result<Arc<Vec<Residue>>> {
        cached(&self.elem_all, w, || {
            Ok(seqsums::elem_sym_all_from_inverses(&self.inverses(w)?))
        })
    }

    /// `(-1)^{km} (p/m - 1 choose k)^m` for `k = 0..p`.
    fn family(&self, m: u64, w: u32) -> Result<Arc<Vec<Residue>>> {
        cached(&self.family, (m, w), || {
            Ok(family_terms(self.p, m, self.p - 1, w)?.collect())
        })
    }

    /// Binomial powers with the upper argument built directly from `1/(p±1)`.
    fn direct(&self, which: Direct, w: u32) -> Result<Arc<Vec<Residue>>> {
        cached(&self.direct, (which, w), || {
            let r = self.ring(w)?;
            let inv = self.inverses(w)?;
            let (x, e) = match which {
                Direct::NegInvPlus => (-r.from_u64(self.p + 1).inverse()?, self.p + 1),
                Direct::InvMinus => (r.from_u64(self.p - 1).inverse()?, self.p - 1),
            };
            let mut b = r.one();
            let mut out = vec![r.one()];
            for k in 1..self.p {
                b = b * (&x - &r.from_u64(k - 1)) * &inv[k as usize];
                out.push(b.pow(e));
            }
            Ok(out)
        })
    }

    /// `LHS` and `RHS` of a statement in `Z/p^w`.
    pub fn sides(&self, id: StatementId, prm: &Params, w: u32) -> Result<(Residue, Residue)> {
        use StatementId::*;
        let p = self.p;
        let r = self.ring(w)?;
        let inv = self.inverses(w)?;
        let bern = |n: u64| bernoulli_in(n as usize, &r);
        let frac = |a: i64, b: u64| -> Result<Residue> { Ok(r.from_i64(a) * r.from_u64(b).inverse()?) };
        let pp = |v: u32| r.p_power(v);
        // Σ_{k=1}^{p-1} t_k / k^e
        let weighted = |terms: &[Residue], e: u64| -> Residue {
            (1..p as usize).fold(r.zero(), |acc, k| acc + &terms[k] * &inv[k].pow(e))
        };
        let total = |terms: &[Residue]| -> Residue {
            debug_assert!(terms[0].is_one());
            terms.iter().fold(r.zero(), |acc, t| acc + t)
        };
        let hsum = |order: u32| -> Result<Residue> {
            let h = self.harmonic(order, w)?;
            Ok(h.values()[1..].iter().fold(r.zero(), |acc, x| acc + x))
        };
        // H_{p-1} / p^v, computed v digits higher then divided exactly
        let h_over_p = |v: u32| -> Result<Residue> {
            self.harmonic(1, w + v)?.last().exact_div_by_p(v)
        };
        let m = prm.m.unwrap_or(1);
        let n = prm.n.unwrap_or(1);
        Ok(match id {
            T1_1 => (total(&self.direct(Direct::NegInvPlus, w)?), r.zero()),
            R1_4 => (
                total(&self.direct(Direct::NegInvPlus, w)?),
                pp(5) * frac(1, 18)? * bern(p - 3)?,
            ),
            T1_2 => (total(&self.family(m, w)?), r.zero()),
            C1_3 => (total(&self.direct(Direct::InvMinus, w)?), r.zero()),
            R1_5 => (
                total(&self.direct(Direct::InvMinus, w)?),
                pp(4) * frac(2, 3)? * bern(p - 3)?,
            ),
            T1_3_6 => (weighted(&self.family(m, w)?, 2), h_over_p(1)?),
            T1_3_7 => (
                weighted(&self.family(m, w)?, 2 * n),
                -(pp(1) * frac(1, 2 * n + 1)? * bern(p - 1 - 2 * n)?),
            ),
            T1_3_8 => {
                let inner = r.one()
                    + r.from_i64(1 - m as i64) * r.from_u64(2 * n + 1) * r.from_u64(2 * m).inverse()?;
                (
                    weighted(&self.family(m, w)?, 2 * n - 1),
                    inner * pp(2) * frac(n as i64, 2 * n + 1)? * bern(p - 1 - 2 * n)?,
                )
            }
            R1_9 => (
                weighted(&self.direct(Direct::InvMinus, w)?, 2 * n - 1),
                -(pp(2) * frac(2 * (n * n) as i64, 2 * n + 1)? * bern(p - 1 - 2 * n)?),
            ),
            R1_10 => (
                weighted(&self.direct(Direct::NegInvPlus, w)?, 2 * n - 1),
                pp(2) * frac(n as i64, 2 * n + 1)? * bern(p - 1 - 2 * n)?,
            ),
            L2_1a => (
                self.harmonic(1, w)?.last().clone(),
                -(pp(2) * frac(1, 3)? * bern(p - 3)?),
            ),
            L2_1b => (
                self.harmonic(2, w)?.last().clone(),
                pp(1) * frac(2, 3)? * bern(p - 3)?,
            ),
            L2_2 => {
                let k = prm.k.expect("checked");
                let lhs = self.elem_all(w)?[k as usize].clone();
                let sign = if k % 2 == 1 { 1 } else { -1 };
                let rhs = if k == p - 1 {
                    // p/(k+1) = 1 and B_0 = 1
                    r.from_i64(sign)
                } else {
                    pp(1) * frac(sign, k + 1)? * bern(p - 1 - k)?
                };
                (lhs, rhs)
            }
            L2_3 => (
                hsum(1)?,
                -(pp(3) * frac(1, 3)? * bern(p - 3)?) - pp(1) + r.one(),
            ),
            L2_4a => (hsum(2)?, r.zero()),
            L2_4b => (hsum(3)?, r.zero()),
            L2_5 => (
                self.sym(2, w)?.prefix_sum(),
                -(pp(2) * frac(2, 3)? * bern(p - 3)?) + pp(1) - r.one(),
            ),
            L2_6 => (
                self.sym(3, w)?.prefix_sum(),
                -(pp(1) * frac(1, 3)? * bern(p - 3)?) - pp(1) + r.one(),
            ),
            L2_7 => (self.sym(4, w)?.prefix_sum(), -r.one()),
            L2_8 => {
                let (h1, h2, h3) = (self.harmonic(1, w)?, self.harmonic(2, w)?, self.harmonic(3, w)?);
                let lhs = (1..p as usize)
                    .fold(r.zero(), |acc, k| acc + h1.get(k) * h2.get(k) - h3.get(k));
                (lhs, r.zero())
            }
            L3_1a => {
                let h = self.harmonic(m as u32, w)?;
                let lhs = weighted(h.values(), 2 * n + 1 - m);
                let sign = if m % 2 == 1 { 1 } else { -1 };
                let c = binom_u64(2 * n + 1, m);
                (lhs, frac(sign, 2 * n + 1)? * r.from_u64(c) * bern(p - 1 - 2 * n)?)
            }
            L3_1b => {
                let h = self.harmonic(m as u32, w)?;
                let lhs = weighted(h.values(), 2 * n - m);
                let sign = if m.is_multiple_of(2) { 1 } else { -1 };
                let c = binom_u64(2 * n + 1, m);
                let bracket =
                    r.from_u64(n) + frac(sign * (n as i64 - m as i64), m + 1)? * r.from_u64(c);
                (lhs, pp(1) * frac(1, 2 * n + 1)? * bern(p - 1 - 2 * n)? * bracket)
            }
            E3_3 => {
                let s = prm.s.expect("checked");
                (
                    self.harmonic(s as u32, w)?.last().clone(),
                    pp(1) * frac(s as i64, s + 1)? * bern(p - 1 - s)?,
                )
            }
            L3_2 => {
                let h = self.harmonic(1, w)?;
                let lhs = (1..p as usize).fold(r.zero(), |acc, k| {
                    acc + (r.one() - pp(1) * h.get(k)) * inv[k].pow(2)
                });
                (lhs, h_over_p(1)?)
            }
            R3_1a => (weighted(self.harmonic(1, w)?.values(), 2), bern(p - 3)?),
            R3_1b => (
                weighted(self.harmonic(1, w)?.values(), 3),
                -(pp(1) * frac(1, 10)? * bern(p - 5)?),
            ),
            A_SU3 => {
                let h = self.harmonic(1, w)?;
                let sq: Vec<Residue> = h.values().iter().map(|x| x * x).collect();
                (weighted(&sq, 2), r.zero())
            }
            A_T23 => {
                let h = self.harmonic(1, w)?;
                let lhs = (1..p as usize).fold(r.zero(), |acc, k| acc + h.get(k - 1) * &inv[k].pow(2));
                (lhs, -(r.from_u64(3) * h_over_p(2)?))
            }
            W_PAIR => match prm.part {
                Some(1) => (self.harmonic(1, w)?.last().clone(), r.zero()),
                _ => {
                    // (2p-1 choose p-1) = Π_{j<p} (p+j)/j
                    let c = (1..p as usize)
                        .fold(r.one(), |acc, j| acc * r.from_u64(p + j as u64) * &inv[j]);
                    (c, r.one())
                }
            },
        })
    }
}

fn binom_u64(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Knobs for a verification run.
#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub guard: u32,
    /// Statements whose claim is raised by one.
    pub strengthen: BTreeSet<StatementId>,
}

impl VerifyOptions {
    pub fn with_guard(guard: u32) -> Self {
        Self {
            guard,
            ..Self::default()
        }
    }
}

/// Verify one statement at one parameter point.
pub fn verify(id: StatementId, params: &Params, guard: u32) -> Result<CongruenceReport> {
    let session = PrimeSession::new(params.p)?;
    verify_with(&session, id, params, guard, None)
}

/// Verify through an existing session, optionally overriding the claim.
pub fn verify_with(
    session: &PrimeSession,
    id: StatementId,
    params: &Params,
    guard: u32,
    claim_override: Option<u32>,
) -> Result<CongruenceReport> {
    id.applicable(params).map_err(|reason| Error::NotApplicable {
        id: id.to_string(),
        reason,
    })?;
    if session.p() != params.p {
        return Err(Error::InvalidParameter(format!(
            "session for p = {} used with p = {}",
            session.p(),
            params.p
        )));
    }
    let start = Instant::now();
    let claimed = claim_override.unwrap_or_else(|| id.claim(params));
    let w = claimed + guard;
    let (lhs, rhs) = session.sides(id, params, w)?;
    let residual = lhs - rhs;
    let computed = residual.valuation();
    Ok(CongruenceReport {
        statement: id,
        params: *params,
        working_precision: w,
        pass: computed.meets(claimed),
        residual,
        computed,
        claimed,
        wall_time: start.elapsed(),
    })
}

/// Which parameter points a range run visits.
#[derive(Clone, Debug)]
pub struct ParamPolicy {
    /// `m` runs over `1..=m_max` (skipping multiples of p), plus `p ± 1`.
    pub m_max: u64,
    pub include_p_pm1: bool,
    /// `n` runs over `1..=min(n_cap, (p-3)/2)`.
    pub n_cap: u64,
    /// For `p > s_cap_above`, `s` is capped at `s_cap`.
    pub s_cap: u64,
    pub s_cap_above: u64,
}

impl Default for ParamPolicy {
    fn default() -> Self {
        Self {
            m_max: 12,
            include_p_pm1: true,
            n_cap: 10,
            s_cap: 50,
            s_cap_above: 53,
        }
    }
}

impl ParamPolicy {
    /// Visit every `s` in `1..=p-2`.
    pub fn full_s(mut self) -> Self {
        self.s_cap_above = u64::MAX;
        self
    }

    pub fn m_values(&self, p: u64) -> Vec<u64> {
        let mut ms: Vec<u64> = (1..=self.m_max).filter(|m| m % p != 0).collect();
        if self.include_p_pm1 {
            ms.extend([p - 1, p + 1]);
        }
        ms.sort_unstable();
        ms.dedup();
        ms
    }

    fn n_values(&self, p: u64) -> std::ops::RangeInclusive<u64> {
        1..=self.n_cap.min(p.saturating_sub(3) / 2)
    }

    /// All parameter points for `id` at `p` that satisfy its hypotheses.
    pub fn params_for(&self, id: StatementId, p: u64) -> Vec<Params> {
        use StatementId::*;
        let base = Params::prime(p);
        let mut out: Vec<Params> = match id {
            T1_2 | T1_3_6 => self.m_values(p).into_iter().map(|m| base.with_m(m)).collect(),
            T1_3_7 | T1_3_8 => self
                .m_values(p)
                .into_iter()
                .flat_map(|m| self.n_values(p).map(move |n| base.with_m(m).with_n(n)))
                .collect(),
            R1_9 | R1_10 => self.n_values(p).map(|n| base.with_n(n)).collect(),
            L2_2 => (1..p).map(|k| base.with_k(k)).collect(),
            L3_1a | L3_1b => self
                .n_values(p)
                .flat_map(|n| (1..=2 * n + 1).map(move |m| base.with_m(m).with_n(n)))
                .collect(),
            E3_3 => {
                let top = if p > self.s_cap_above {
                    self.s_cap.min(p - 2)
                } else {
                    p.saturating_sub(2)
                };
                (1..=top).map(|s| base.with_s(s)).collect()
            }
            W_PAIR => vec![base.with_part(1), base.with_part(2)],
            _ => vec![base],
        };
        out.retain(|prm| id.applicable(prm).is_ok());
        out
    }
}

/// Aggregate over one statement.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StatementSummary {
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
    /// Smallest `computed - claimed` seen; a lower bound when the worst case vanished.
    pub min_margin: Option<i64>,
}

/// Result of a range run, sorted by statement, prime and parameters.
#[derive(Clone, Debug, Default)]
pub struct RangeSummary {
    pub reports: Vec<CongruenceReport>,
    pub per_statement: BTreeMap<StatementId, StatementSummary>,
}

impl RangeSummary {
    pub fn failures(&self) -> impl Iterator<Item = &CongruenceReport> {
        self.reports.iter().filter(|r| !r.pass)
    }

    pub fn failure_count(&self) -> usize {
        self.failures().count()
    }

    fn from_reports(mut reports: Vec<CongruenceReport>) -> Self {
        reports.sort_by_key(|a| (a.statement, a.params));
        let mut per_statement: BTreeMap<StatementId, StatementSummary> = BTreeMap::new();
        for r in &reports {
            let s = per_statement.entry(r.statement).or_default();
            s.checked += 1;
            if r.pass {
                s.passed += 1;
            } else {
                s.failed += 1;
            }
            let m = r.margin();
            s.min_margin = Some(s.min_margin.map_or(m, |x| x.min(m)));
        }
        Self {
            reports,
            per_statement,
        }
    }
}

/// Make sure every Bernoulli number the run will touch is cached before fanning out.
pub fn prewarm_bernoulli(max_p: u64) -> Result<()> {
    bernoulli::global().ensure(max_p.saturating_sub(1) as usize)
}

/// Verify the given statements at every prime, over the policy's parameter points.
pub fn verify_range(
    ids: &[StatementId],
    primes: &[u64],
    policy: &ParamPolicy,
    opts: &VerifyOptions,
) -> Result<RangeSummary> {
    if let Some(&max_p) = primes.iter().max() {
        prewarm_bernoulli(max_p)?;
    }
    let per_prime: Vec<Vec<CongruenceReport>> = primes
        .par_iter()
        .map(|&p| {
            let session = PrimeSession::new(p)?;
            let mut out = Vec::new();
            for &id in ids {
                for prm in policy.params_for(id, p) {
                    let claim = opts
                        .strengthen
                        .contains(&id)
                        .then(|| id.claim(&prm) + 1);
                    out.push(verify_with(&session, id, &prm, opts.guard, claim)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(RangeSummary::from_reports(per_prime.into_iter().flatten().collect()))
}

/// One comparison made by [`cross_consistency`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsistencyCheck {
    pub n: u64,
    pub m: u64,
    pub specialization: StatementId,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub p: u64,
    pub checks: Vec<ConsistencyCheck>,
}

impl ConsistencyReport {
    pub fn all_equal(&self) -> bool {
        self.checks.iter().all(|c| c.equal)
    }
}

/// Compare the general family at `m = p ± 1` with its direct specializations.
///
/// Both sides are the same sum built by different routes, so they must agree
/// exactly whatever the truth of the congruences.
pub fn cross_consistency(p: u64) -> Result<ConsistencyReport> {
    let session = PrimeSession::new(p)?;
    let w = StatementId::T1_3_8.claim(&Params::prime(p)) + DEFAULT_GUARD;
    let mut checks = Vec::new();
    for n in 1..=p.saturating_sub(3) / 2 {
        for (m, spec) in [(p - 1, StatementId::R1_9), (p + 1, StatementId::R1_10)] {
            let general = Params::prime(p).with_m(m).with_n(n);
            let special = Params::prime(p).with_n(n);
            let (a, _) = session.sides(StatementId::T1_3_8, &general, w)?;
            let (b, _) = session.sides(spec, &special, w)?;
            checks.push(ConsistencyCheck {
                n,
                m,
                specialization: spec,
                equal: a == b,
            });
        }
    }
    Ok(ConsistencyReport { p, checks })
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn qi(a: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(a))
}

fn qpow(x: &BigRational, e: u64) -> BigRational {
    let e = e as u32;
    BigRational::new(x.numer().pow(e), x.denom().pow(e))
}

/// Exact `LHS` and `RHS` over the rationals, straight from the definitions.
///
/// Intended for small primes; cost grows like `p^3` digit operations.
pub fn exact_sides(id: StatementId, prm: &Params) -> Result<(BigRational, BigRational)> {
    use StatementId::*;
    id.applicable(prm).map_err(|reason| Error::NotApplicable {
        id: id.to_string(),
        reason,
    })?;
    let p = prm.p;
    let pq = qi(p);
    let b = |n: u64| bernoulli_exact(n as usize);
    let h = |n: u64, order: u32| -> BigRational {
        (1..=n).map(|j| qpow(&qi(j), order as u64).recip()).sum()
    };
    // e_s over {1, 1/2, ..., 1/n} by subset recursion
    let e = |s: usize, n: u64| -> BigRational {
        let mut row = vec![BigRational::zero(); s + 1];
        row[0] = BigRational::one();
        for j in 1..=n {
            for t in (1..=s).rev() {
                let add = &row[t - 1] / qi(j);
                row[t] += add;
            }
        }
        row[s].clone()
    };
    let power_sum = |x: BigRational, e: u64, sign_m: u64, weight: u64, from: u64| -> BigRational {
        binom_exact_all(&x, p - 1)
            .into_iter()
            .enumerate()
            .skip(from as usize)
            .map(|(k, bk)| {
                let mut t = qpow(&bk, e);
                if k % 2 == 1 && sign_m % 2 == 1 {
                    t = -t;
                }
                if k > 0 {
                    t /= qpow(&qi(k as u64), weight);
                }
                t
            })
            .sum()
    };
    let neg_inv_plus = -BigRational::new(BigInt::one(), BigInt::from(p + 1));
    let inv_minus = BigRational::new(BigInt::one(), BigInt::from(p - 1));
    let m = prm.m.unwrap_or(1);
    let n = prm.n.unwrap_or(1);
    let fam = || BigRational::new(BigInt::from(p), BigInt::from(m)) - BigRational::one();
    let hp = h(p - 1, 1);
    Ok(match id {
        T1_1 => (power_sum(neg_inv_plus, p + 1, 0, 0, 0), BigRational::zero()),
        R1_4 => (
            power_sum(neg_inv_plus, p + 1, 0, 0, 0),
            qpow(&pq, 5) / qi(18) * b(p - 3)?,
        ),
        T1_2 => (power_sum(fam(), m, m, 0, 0), BigRational::zero()),
        C1_3 => (power_sum(inv_minus, p - 1, 0, 0, 0), BigRational::zero()),
        R1_5 => (
            power_sum(inv_minus, p - 1, 0, 0, 0),
            q(2, 3) * qpow(&pq, 4) * b(p - 3)?,
        ),
        T1_3_6 => (power_sum(fam(), m, m, 2, 1), &hp / &pq),
        T1_3_7 => (
            power_sum(fam(), m, m, 2 * n, 1),
            -(&pq / qi(2 * n + 1)) * b(p - 1 - 2 * n)?,
        ),
        T1_3_8 => {
            let inner = BigRational::one() + q(1 - m as i64, 2 * m as i64) * qi(2 * n + 1);
            (
                power_sum(fam(), m, m, 2 * n - 1, 1),
                inner * qpow(&pq, 2) * qi(n) / qi(2 * n + 1) * b(p - 1 - 2 * n)?,
            )
        }
        R1_9 => (
            power_sum(inv_minus, p - 1, 0, 2 * n - 1, 1),
            -(qi(2) * qpow(&pq, 2) * qi(n * n) / qi(2 * n + 1)) * b(p - 1 - 2 * n)?,
        ),
        R1_10 => (
            power_sum(neg_inv_plus, p + 1, 0, 2 * n - 1, 1),
            qpow(&pq, 2) * qi(n) / qi(2 * n + 1) * b(p - 1 - 2 * n)?,
        ),
        L2_1a => (hp, -(qpow(&pq, 2) / qi(3)) * b(p - 3)?),
        L2_1b => (h(p - 1, 2), q(2, 3) * &pq * b(p - 3)?),
        L2_2 => {
            let k = prm.k.expect("checked");
            let sign = if k % 2 == 1 { 1 } else { -1 };
            (e(k as usize, p - 1), q(sign, k as i64 + 1) * &pq * b(p - 1 - k)?)
        }
        L2_3 => (
            (1..p).map(|k| h(k, 1)).sum(),
            -(qpow(&pq, 3) / qi(3)) * b(p - 3)? - &pq + BigRational::one(),
        ),
        L2_4a => ((1..p).map(|k| h(k, 2)).sum(), BigRational::zero()),
        L2_4b => ((1..p).map(|k| h(k, 3)).sum(), BigRational::zero()),
        L2_5 => (
            (1..p).map(|k| e(2, k)).sum(),
            -(q(2, 3) * qpow(&pq, 2)) * b(p - 3)? + &pq - BigRational::one(),
        ),
        L2_6 => (
            (1..p).map(|k| e(3, k)).sum(),
            -(&pq / qi(3)) * b(p - 3)? - &pq + BigRational::one(),
        ),
        L2_7 => ((1..p).map(|k| e(4, k)).sum(), -BigRational::one()),
        L2_8 => {
            let mut total = BigRational::zero();
            for k in 1..p {
                for j in 2..=k {
                    for i in 1..j {
                        total += (qi(i) * qi(j) * qi(j)).recip() + (qi(i) * qi(i) * qi(j)).recip();
                    }
                }
            }
            (total, BigRational::zero())
        }
        L3_1a => {
            let lhs = (1..p)
                .map(|k| h(k, m as u32) / qpow(&qi(k), 2 * n + 1 - m))
                .sum();
            let sign = if m % 2 == 1 { 1 } else { -1 };
            (
                lhs,
                q(sign, 2 * n as i64 + 1) * qi(binom_u64(2 * n + 1, m)) * b(p - 1 - 2 * n)?,
            )
        }
        L3_1b => {
            let lhs = (1..p).map(|k| h(k, m as u32) / qpow(&qi(k), 2 * n - m)).sum();
            let sign = if m.is_multiple_of(2) { 1 } else { -1 };
            let bracket =
                qi(n) + q(sign * (n as i64 - m as i64), m as i64 + 1) * qi(binom_u64(2 * n + 1, m));
            (lhs, &pq * b(p - 1 - 2 * n)? / qi(2 * n + 1) * bracket)
        }
        E3_3 => {
            let s = prm.s.expect("checked");
            (h(p - 1, s as u32), &pq * q(s as i64, s as i64 + 1) * b(p - 1 - s)?)
        }
        L3_2 => (
            (1..p).map(|k| (BigRational::one() - &pq * h(k, 1)) / qi(k * k)).sum(),
            &hp / &pq,
        ),
        R3_1a => ((1..p).map(|k| h(k, 1) / qi(k * k)).sum(), b(p - 3)?),
        R3_1b => (
            (1..p).map(|k| h(k, 1) / qi(k * k * k)).sum(),
            -(&pq / qi(10)) * b(p - 5)?,
        ),
        A_SU3 => (
            (1..p).map(|k| qpow(&h(k, 1), 2) / qi(k * k)).sum(),
            BigRational::zero(),
        ),
        A_T23 => {
            let mut lhs = BigRational::zero();
            for k in 2..p {
                for j in 1..k {
                    lhs += (qi(j) * qi(k) * qi(k)).recip();
                }
            }
            (lhs, -(qi(3) * &hp / qpow(&pq, 2)))
        }
        W_PAIR => match prm.part {
            Some(1) => (hp, BigRational::zero()),
            _ => {
                let c = (1..p).fold(BigRational::one(), |acc, j| acc * qi(p + j) / qi(j));
                (c, BigRational::one())
            }
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::from_rational;

    #[test]
    fn ids_round_trip() {
        for &id in StatementId::ALL {
            assert_eq!(id.as_str().parse::<StatementId>().unwrap(), id);
        }
        assert_eq!(StatementId::ALL.len(), 29);
        assert!("T9_9".parse::<StatementId>().is_err());
    }

    #[test]
    fn t1_1_at_five() {
        let rep = verify(StatementId::T1_1, &Params::prime(5), 2).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.working_precision, 7);
        let (l, r) = exact_sides(StatementId::T1_1, &Params::prime(5)).unwrap();
        let ring = PrimePowerModulus::new(5, 7).unwrap();
        assert_eq!(rep.residual, from_rational(&(l - r), &ring).unwrap());
    }

    #[test]
    fn m_one_is_structurally_zero() {
        for g in 0..4 {
            let rep = verify(StatementId::T1_2, &Params::prime(7).with_m(1), g).unwrap();
            assert!(rep.residual.is_zero());
            assert_eq!(rep.computed, Valuation::AtLeast(4 + g));
        }
    }

    #[test]
    fn t1_3_7_example() {
        let prm = Params::prime(11).with_m(2).with_n(1);
        let rep = verify(StatementId::T1_3_7, &prm, 2).unwrap();
        assert!(rep.pass);
        let (l, r) = exact_sides(StatementId::T1_3_7, &prm).unwrap();
        let ring = PrimePowerModulus::new(11, 4).unwrap();
        assert_eq!(rep.residual, from_rational(&(l - r), &ring).unwrap());
    }

    #[test]
    fn inapplicable_is_an_error_not_a_failure() {
        let err = verify(StatementId::R1_4, &Params::prime(5), 2).unwrap_err();
        assert!(matches!(err, Error::NotApplicable { .. }));
        let err = verify(StatementId::T1_2, &Params::prime(7).with_m(14), 2).unwrap_err();
        assert!(matches!(err, Error::NotApplicable { .. }));
        let err = verify(StatementId::T1_2, &Params::prime(7), 2).unwrap_err();
        assert!(matches!(err, Error::NotApplicable { .. }));
    }

    #[test]
    fn cross_consistency_examples() {
        for p in [11, 13, 17] {
            let rep = cross_consistency(p).unwrap();
            assert!(!rep.checks.is_empty());
            assert!(rep.all_equal(), "{rep:?}");
        }
    }

    #[test]
    fn policy_shapes() {
        let pol = ParamPolicy::default();
        assert_eq!(pol.m_values(7), vec![1, 2, 3, 4, 5, 6, 8, 9, 10, 11, 12]);
        assert_eq!(pol.params_for(StatementId::L2_2, 7).len(), 6);
        assert_eq!(pol.params_for(StatementId::E3_3, 59).len(), 50);
        assert_eq!(pol.params_for(StatementId::E3_3, 53).len(), 51);
        assert_eq!(pol.params_for(StatementId::R1_4, 5).len(), 0);
        assert_eq!(pol.params_for(StatementId::T1_3_6, 5).len(), 0);
        assert_eq!(pol.params_for(StatementId::T1_3_7, 5).len(), pol.m_values(5).len());
    }
}
