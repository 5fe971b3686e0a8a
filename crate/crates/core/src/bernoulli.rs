//! Bernoulli numbers, exact and reduced modulo prime powers.
//!
//! Convention: `B_1 = -1/2`, from `Σ_{k=0}^{n} C(n+1, k) B_k = 0`.
//!
//! The cache grows on demand and never shrinks. Extension takes the write
//! lock; lookups of an existing prefix only take the read lock.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::modring::{from_rational, BigRational, PrimePowerModulus, Residue};
use crate::primes::is_prime;

pub const DEFAULT_BOUND: usize = 1200;

/// Immutable-prefix cache of `B_0, …, B_N`.
#[derive(Debug)]
pub struct BernoulliCache {
    bound: usize,
    values: RwLock<Vec<BigRational>>,
}

impl Default for BernoulliCache {
    fn default() -> Self {
        Self::new(DEFAULT_BOUND)
    }
}

impl BernoulliCache {
    pub fn new(bound: usize) -> Self {
        Self {
            bound,
            values: RwLock::new(Vec::new()),
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// Number of values computed so far.
    pub fn len(&self) -> usize {
        self.values.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, n: usize) -> Result<BigRational> {
        self.ensure(n)?;
        Ok(self.values.read().expect("cache lock")[n].clone())
    }

    /// Make sure `B_0..=B_n` are available.
    pub fn ensure(&self, n: usize) -> Result<()> {
        if n > self.bound {
            return Err(Error::CacheBoundExceeded {
                index: n,
                bound: self.bound,
            });
        }
        if n < self.len() {
            return Ok(());
        }
        let mut values = self.values.write().expect("cache lock");
        extend(&mut values, n);
        Ok(())
    }

    pub fn snapshot(&self) -> Vec<BigRational> {
        self.values.read().expect("cache lock").clone()
    }

    /// Build a cache from externally supplied values after validating them.
    pub fn from_values(values: Vec<BigRational>, bound: usize) -> Result<Self> {
        validate(&values)?;
        if values.len() > bound + 1 {
            return Err(Error::IrregularCache(format!(
                "{} values exceed bound {bound}",
                values.len()
            )));
        }
        Ok(Self {
            bound,
            values: RwLock::new(values),
        })
    }

    /// Write `index numerator denominator` records, one per line.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, encode(&self.snapshot()))?;
        Ok(())
    }

    pub fn load(path: &Path, bound: usize) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_values(decode(&text)?, bound)
    }

    /// Adopt a validated prefix, keeping whichever prefix is longer.
    pub fn absorb(&self, other: &BernoulliCache) -> Result<()> {
        let theirs = other.snapshot();
        let mut ours = self.values.write().expect("cache lock");
        let common = ours.len().min(theirs.len());
        if ours[..common] != theirs[..common] {
            return Err(Error::IrregularCache(
                "supplied values disagree with computed values".into(),
            ));
        }
        if theirs.len() > ours.len() {
            *ours = theirs;
        }
        Ok(())
    }
}

fn extend(values: &mut Vec<BigRational>, upto: usize) {
    if values.is_empty() {
        values.push(BigRational::one());
    }
    // common multiple of every denominator seen so far
    let mut lcm = values
        .iter()
        .fold(BigUint::one(), |acc, b| acc.lcm(b.denom().magnitude()));
    while values.len() <= upto {
        let n = values.len();
        let mut binom = BigUint::one(); // C(n+1, 0)
        let mut sum = BigInt::zero();
        for (k, b) in values.iter().enumerate() {
            if k > 0 {
                binom = binom * BigUint::from(n + 2 - k) / BigUint::from(k);
            }
            if b.is_zero() {
                continue;
            }
            let scale = &lcm / b.denom().magnitude();
            sum += BigInt::from(&binom * scale) * b.numer();
        }
        let den = BigInt::from(lcm.clone()) * BigInt::from(n + 1);
        let value = BigRational::new(-sum, den);
        lcm = lcm.lcm(value.denom().magnitude());
        values.push(value);
    }
}

fn encode(values: &[BigRational]) -> String {
    let mut out = String::new();
    for (n, b) in values.iter().enumerate() {
        let _ = writeln!(out, "{n} {} {}", b.numer(), b.denom());
    }
    out
}

fn decode(text: &str) -> Result<Vec<BigRational>> {
    let mut values = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::IrregularCache(format!("line {}: {what}", line_no + 1));
        let mut fields = line.split_whitespace();
        let (Some(i), Some(num), Some(den), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad("expected `index numerator denominator`"));
        };
        let i: usize = i.parse().map_err(|_| bad("bad index"))?;
        if i != values.len() {
            return Err(bad("indices must be contiguous from 0"));
        }
        let num: BigInt = num.parse().map_err(|_| bad("bad numerator"))?;
        let den: BigInt = den.parse().map_err(|_| bad("bad denominator"))?;
        if !den.is_positive() {
            return Err(bad("denominator must be positive"));
        }
        if !num.gcd(&den).is_one() {
            return Err(bad("fraction not reduced"));
        }
        values.push(BigRational::new_raw(num, den));
    }
    Ok(values)
}

fn recurrence_holds(values: &[BigRational], n: usize) -> bool {
    let mut binom = BigInt::one();
    let mut sum = BigRational::zero();
    for (k, b) in values.iter().enumerate().take(n + 1) {
        if k > 0 {
            binom = binom * BigInt::from(n + 2 - k) / BigInt::from(k);
        }
        sum += b * BigRational::from_integer(binom.clone());
    }
    sum.is_zero()
}

/// Structural checks plus the defining recurrence on a seeded sample of indices.
fn validate(values: &[BigRational]) -> Result<()> {
    let bad = |msg: String| Err(Error::IrregularCache(msg));
    if values.is_empty() {
        return bad("empty cache".into());
    }
    if !values[0].is_one() {
        return bad("B_0 must be 1".into());
    }
    if values.len() > 1 && values[1] != BigRational::new(BigInt::from(-1), BigInt::from(2)) {
        return bad("B_1 must be -1/2".into());
    }
    for (n, b) in values.iter().enumerate().skip(3).step_by(2) {
        if !b.is_zero() {
            return bad(format!("B_{n} must vanish"));
        }
    }
    let last = values.len() - 1;
    let mut sample: Vec<usize> = vec![last];
    if last >= 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b3e7);
        sample.extend((0..24).map(|_| rng.gen_range(1..=last)));
    }
    sample.sort_unstable();
    sample.dedup();
    for n in sample.into_iter().filter(|&n| n >= 1) {
        if !recurrence_holds(values, n) {
            return bad(format!("recurrence fails at n = {n}"));
        }
    }
    Ok(())
}

static GLOBAL: OnceLock<BernoulliCache> = OnceLock::new();

/// Process-wide cache shared by every verification task.
pub fn global() -> &'static BernoulliCache {
    GLOBAL.get_or_init(BernoulliCache::default)
}

/// Exact `B_n` from the process-wide cache.
pub fn bernoulli_exact(n: usize) -> Result<BigRational> {
    global().get(n)
}

/// `B_n` reduced into `Z/p^j`.
pub fn bernoulli_mod(n: usize, p: u64, j: u32) -> Result<Residue> {
    bernoulli_in(n, &PrimePowerModulus::new(p, j)?)
}

/// `B_n` reduced into the given ring.
pub fn bernoulli_in(n: usize, ring: &PrimePowerModulus) -> Result<Residue> {
    let b = bernoulli_exact(n)?;
    if (b.denom().magnitude() % ring.p()).is_zero() {
        return Err(Error::IrregularReduction { index: n, p: ring.p() });
    }
    from_rational(&b, ring)
}

/// Product of the primes `q` with `(q - 1) | n`, for even `n ≥ 2`.
pub fn vsc_denominator(n: u64) -> Result<BigUint> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "von Staudt-Clausen product needs even n >= 2, got {n}"
        )));
    }
    let mut divisors = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            divisors.push(d);
            divisors.push(n / d);
        }
        d += 1;
    }
    divisors.sort_unstable();
    divisors.dedup();
    Ok(divisors
        .into_iter()
        .map(|d| d + 1)
        .filter(|&q| is_prime(q))
        .fold(BigUint::one(), |acc, q| acc * q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::ratio;

    #[test]
    fn small_values() {
        let c = BernoulliCache::new(40);
        assert_eq!(c.get(0).unwrap(), ratio(1, 1));
        assert_eq!(c.get(1).unwrap(), ratio(-1, 2));
        assert_eq!(c.get(2).unwrap(), ratio(1, 6));
        assert_eq!(c.get(4).unwrap(), ratio(-1, 30));
        assert_eq!(c.get(12).unwrap(), ratio(-691, 2730));
        assert!(c.get(7).unwrap().is_zero());
        assert!(matches!(c.get(41), Err(Error::CacheBoundExceeded { .. })));
    }

    #[test]
    fn reductions() {
        assert_eq!(bernoulli_mod(2, 5, 1).unwrap().to_u64(), Some(1));
        let want = from_rational(&ratio(-1, 30), &PrimePowerModulus::new(7, 2).unwrap()).unwrap();
        assert_eq!(bernoulli_mod(4, 7, 2).unwrap(), want);
        assert!(matches!(bernoulli_mod(4, 5, 1), Err(Error::IrregularReduction { .. })));
    }

    #[test]
    fn vsc_examples() {
        assert_eq!(vsc_denominator(2).unwrap(), BigUint::from(6u32));
        assert_eq!(vsc_denominator(4).unwrap(), BigUint::from(30u32));
        assert_eq!(vsc_denominator(12).unwrap(), BigUint::from(2730u32));
        // n = 36: divisors 1,2,3,4,6,9,12,18,36 -> q in {2,3,5,7,13,19,37}
        assert_eq!(vsc_denominator(36).unwrap(), BigUint::from(2u64 * 3 * 5 * 7 * 13 * 19 * 37));
        assert!(vsc_denominator(3).is_err());
    }

    #[test]
    fn persistence_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bern.txt");
        let c = BernoulliCache::new(100);
        c.ensure(60).unwrap();
        c.save(&path).unwrap();
        let loaded = BernoulliCache::load(&path, 100).unwrap();
        assert_eq!(loaded.snapshot(), c.snapshot());

        let text = std::fs::read_to_string(&path).unwrap();
        let corrupted = text.replace("12 -691 2730", "12 -691 2731");
        std::fs::write(&path, corrupted).unwrap();
        assert!(matches!(BernoulliCache::load(&path, 100), Err(Error::IrregularCache(_))));

        std::fs::write(&path, "0 1 1\n2 1 6\n").unwrap();
        assert!(matches!(BernoulliCache::load(&path, 100), Err(Error::IrregularCache(_))));
    }

    #[test]
    fn sampled_validation_catches_a_wrong_value() {
        let c = BernoulliCache::new(80);
        c.ensure(80).unwrap();
        let mut v = c.snapshot();
        v[80] = &v[80] + ratio(1, 1);
        // the last index is always in the sample
        assert!(BernoulliCache::from_values(v, 80).is_err());
    }
}
