//! Binomial coefficients `(x choose k)` with a p-adic integer upper argument.
//!
//! Two independent routes are provided:
//!
//! * [`binom_stream`] takes `x` as a residue and runs the recurrence
//!   `b_k = b_{k-1} (x - k + 1) / k`, dividing out `p^{ν_p(k)}` exactly. Each such
//!   division costs one digit of precision, so `x` must carry `ν_p(K!)` guard
//!   digits beyond the target.
//! * [`RationalBinomStream`] takes `x = r/d` as an exact rational with `p ∤ d`
//!   and multiplies the integer factors `r - (j-1)d` split into p-power and unit
//!   parts. Nothing is ever divided by `p`, so no precision is lost and long
//!   ranges (`k` far beyond `p`) stay in a single-word ring.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::modring::{from_rational, BigRational, PrimePowerModulus, Residue};
use crate::primes::legendre;

/// One entry of a [`BinomStream`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinomEntry {
    pub k: u64,
    /// `(x choose k)` modulo `p^precision`.
    pub value: Residue,
    pub precision: u32,
}

/// Lazily generated `(x choose k)` for `k = 0..=kmax`.
#[derive(Clone, Debug)]
pub struct BinomStream {
    x: Residue,
    kmax: u64,
    target: u32,
    next_k: u64,
    current: Residue,
    x_here: Residue,
}

/// Build the stream. `x` must live in `Z/p^W` with `W ≥ target + ν_p(kmax!)`.
pub fn binom_stream(x: &Residue, kmax: u64, target: u32) -> Result<BinomStream> {
    let p = x.ring().p();
    let needed = target as u64 + legendre(kmax, p);
    if (x.ring().exponent() as u64) < needed {
        return Err(Error::PrecisionExhausted {
            needed,
            available: x.ring().exponent(),
        });
    }
    Ok(BinomStream {
        x: x.clone(),
        kmax,
        target,
        next_k: 0,
        current: x.ring().one(),
        x_here: x.clone(),
    })
}

impl BinomStream {
    pub fn target(&self) -> u32 {
        self.target
    }
}

impl Iterator for BinomStream {
    type Item = BinomEntry;

    fn next(&mut self) -> Option<BinomEntry> {
        if self.next_k > self.kmax {
            return None;
        }
        let k = self.next_k;
        self.next_k += 1;
        if k > 0 {
            let ring = self.current.ring().clone();
            let p = ring.p();
            let factor = &self.x_here - &ring.from_u64(k - 1);
            let product = &self.current * &factor;
            let e = crate::primes::val_u64(k, p);
            let unit = k / p.pow(e);
            // Divisibility by p^e holds because (x choose k) is p-integral and the
            // construction budgeted enough digits.
            let divided = if e == 0 {
                product
            } else {
                product
                    .exact_div_by_p(e)
                    .expect("padding guarantees exact division")
            };
            let w = divided.ring().from_u64(unit).inverse().expect("unit part");
            self.current = divided * w;
            let now = self.current.ring().exponent();
            if now != self.x_here.ring().exponent() {
                self.x_here = self.x.reduce(now).expect("stream precision only decreases");
            }
        }
        Some(BinomEntry {
            k,
            value: self.current.clone(),
            precision: self.current.ring().exponent(),
        })
    }
}

/// Streams `(r/d choose k)` into `Z/p^c` without precision loss.
#[derive(Clone, Debug)]
pub struct RationalBinomStream {
    r: i128,
    d: i128,
    ring: PrimePowerModulus,
    next_k: u64,
    unit: Residue,
    d_inv: Residue,
    p_exp: u64,
    vanished: bool,
    p_powers: Vec<Residue>,
}

impl RationalBinomStream {
    pub fn new(r: i64, d: u64, ring: &PrimePowerModulus) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidFamily("zero denominator".into()));
        }
        if d.is_multiple_of(ring.p()) {
            return Err(Error::InvalidFamily(format!(
                "denominator {d} divisible by p = {}",
                ring.p()
            )));
        }
        Ok(Self {
            r: r as i128,
            d: d as i128,
            ring: ring.clone(),
            next_k: 0,
            unit: ring.one(),
            d_inv: ring.from_u64(d).inverse()?,
            p_exp: 0,
            vanished: false,
            p_powers: (0..ring.exponent()).map(|v| ring.p_power(v)).collect(),
        })
    }

    fn split(mut n: i128, p: i128) -> (u64, i128) {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        (e, n)
    }

    fn current(&self) -> Residue {
        if self.vanished || self.p_exp >= self.ring.exponent() as u64 {
            return self.ring.zero();
        }
        &self.unit * &self.p_powers[self.p_exp as usize]
    }
}

impl Iterator for RationalBinomStream {
    type Item = Residue;

    fn next(&mut self) -> Option<Residue> {
        let k = self.next_k;
        self.next_k += 1;
        if k > 0 && !self.vanished {
            let p = self.ring.p() as i128;
            let factor = self.r - (k as i128 - 1) * self.d;
            if factor == 0 {
                self.vanished = true;
            } else {
                let (a, u) = Self::split(factor, p);
                let (b, w) = Self::split(k as i128, p);
                let w_inv = self.ring.from_i128(w).inverse().expect("unit part");
                self.unit = &self.unit * &self.ring.from_i128(u);
                self.unit = &self.unit * &w_inv;
                self.unit = &self.unit * &self.d_inv;
                self.p_exp = (self.p_exp + a)
                    .checked_sub(b)
                    .expect("binomial of a p-adic integer is p-integral");
            }
        }
        Some(self.current())
    }
}

/// Sign applied to each summand of a binomial power sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignMode {
    /// No sign.
    Plus,
    /// `(-1)^k`.
    Alternating,
    /// `(-1)^{k m}`.
    AlternatingTimes(u64),
}

impl SignMode {
    pub fn is_negative(&self, k: u64) -> bool {
        match *self {
            SignMode::Plus => false,
            SignMode::Alternating => k % 2 == 1,
            SignMode::AlternatingTimes(m) => k % 2 == 1 && m % 2 == 1,
        }
    }
}

/// `(-1)^{km} (p/m - 1 choose k)^m` modulo `p^c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyTerm {
    pub p: u64,
    pub m: u64,
    pub k: u64,
    pub precision: u32,
    pub value: Residue,
}

fn check_family(p: u64, m: u64) -> Result<()> {
    if m == 0 || m.is_multiple_of(p) {
        return Err(Error::InvalidFamily(format!("m = {m} must be positive and prime to p = {p}")));
    }
    Ok(())
}

/// The upper argument `p/m - 1` realized in `Z/p^W`.
pub fn family_argument(p: u64, m: u64, ring: &PrimePowerModulus) -> Result<Residue> {
    check_family(p, m)?;
    let p_over_m = from_rational(&BigRational::new(BigInt::from(p), BigInt::from(m)), ring)?;
    Ok(p_over_m - ring.one())
}

/// Stream of family terms `(-1)^{km} (p/m - 1 choose k)^m mod p^c`, `k = 0..=kmax`.
pub fn family_terms(
    p: u64,
    m: u64,
    kmax: u64,
    c: u32,
) -> Result<impl Iterator<Item = Residue>> {
    check_family(p, m)?;
    let work = PrimePowerModulus::new(p, c + legendre(kmax, p) as u32)?;
    let x = family_argument(p, m, &work)?;
    let stream = binom_stream(&x, kmax, c)?;
    let sign = SignMode::AlternatingTimes(m);
    Ok(stream.map(move |entry| {
        let v = entry.value.reduce(c).expect("stream keeps target precision");
        crate::modring::signed(v.pow(m), sign.is_negative(entry.k))
    }))
}

/// A single family term.
pub fn family_term(p: u64, m: u64, k: u64, c: u32) -> Result<FamilyTerm> {
    let value = family_terms(p, m, k, c)?
        .last()
        .expect("stream yields k = 0..=kmax");
    Ok(FamilyTerm {
        p,
        m,
        k,
        precision: c,
        value,
    })
}

/// `sign · (r/m choose k)^t mod p^c` for the conjectured families.
pub fn conjecture_term(
    p: u64,
    m: u64,
    r: i64,
    k: u64,
    exponent: u64,
    sign: SignMode,
    c: u32,
) -> Result<Residue> {
    check_family(p, m)?;
    let ring = PrimePowerModulus::new(p, c)?;
    let b = RationalBinomStream::new(r, m, &ring)?
        .nth(k as usize)
        .expect("stream is unbounded");
    Ok(crate::modring::signed(b.pow(exponent), sign.is_negative(k)))
}

/// Exact `(x choose k)`.
pub fn binom_exact(x: &BigRational, k: u64) -> BigRational {
    let mut acc = BigRational::one();
    for j in 1..=k {
        let num = x - BigRational::from_integer(BigInt::from(j - 1));
        acc = acc * num / BigRational::from_integer(BigInt::from(j));
    }
    acc
}

/// Exact `(x choose k)` for `k = 0..=kmax`.
pub fn binom_exact_all(x: &BigRational, kmax: u64) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(kmax as usize + 1);
    let mut acc = BigRational::one();
    out.push(acc.clone());
    for j in 1..=kmax {
        let num = x - BigRational::from_integer(BigInt::from(j - 1));
        acc = acc * num / BigRational::from_integer(BigInt::from(j));
        out.push(acc.clone());
    }
    out
}

/// Exact `(-1)^{km} (p/m - 1 choose k)^m`.
pub fn family_term_exact(p: u64, m: u64, k: u64) -> Result<BigRational> {
    check_family(p, m)?;
    let x = BigRational::new(BigInt::from(p), BigInt::from(m)) - BigRational::one();
    let b = pow_rational(&binom_exact(&x, k), m);
    Ok(if SignMode::AlternatingTimes(m).is_negative(k) { -b } else { b })
}

pub(crate) fn pow_rational(x: &BigRational, e: u64) -> BigRational {
    let e = u32::try_from(e).expect("exponent fits u32");
    BigRational::new(x.numer().pow(e), x.denom().pow(e))
}

/// Exact `Σ_{k=0}^{kmax} sign_k (r/d choose k)^e` over a common denominator.
///
/// Returns `(numerator, denominator)` *unreduced*: the denominator is
/// `(d^kmax · kmax!)^e`. Reducing huge fractions is the expensive part and
/// callers that only need valuations skip it.
pub fn binom_power_sum_exact(
    r: i64,
    d: u64,
    exponent: u64,
    kmax: u64,
    sign: SignMode,
) -> (BigInt, BigUint) {
    let e = u32::try_from(exponent).expect("exponent fits u32");
    let d_big = BigUint::from(d);
    // numerators of (r/d choose k) = Π (r - (j-1)d) / (d^k k!)
    let mut nums = Vec::with_capacity(kmax as usize + 1);
    let mut num = BigInt::one();
    nums.push(num.clone());
    for j in 1..=kmax {
        num *= BigInt::from(r as i128 - (j as i128 - 1) * d as i128);
        nums.push(num.clone());
    }
    // cofactor_k = d^{kmax-k} · kmax!/k!, built from the top down
    let mut total = BigInt::zero();
    let mut cofactor = BigUint::one();
    for k in (0..=kmax).rev() {
        let term = nums[k as usize].pow(e) * BigInt::from(cofactor.pow(e));
        if sign.is_negative(k) {
            total -= term;
        } else {
            total += term;
        }
        if k > 0 {
            cofactor *= &d_big * BigUint::from(k);
        }
    }
    let den = cofactor.pow(e);
    (total, den)
}
