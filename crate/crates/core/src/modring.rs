//! Arithmetic in `Z / p^c Z` plus exact rationals and p-adic valuations.
//!
//! A [`Residue`] always holds the canonical representative in `[0, p^c)`.
//! When `p^c` fits in a machine word the value is kept as a `u64` and products
//! go through `u128`; otherwise it is a [`BigUint`]. The choice is made once,
//! by the modulus, and is invisible to callers.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::primes::is_prime;

struct Inner {
    p: u64,
    exponent: u32,
    modulus: BigUint,
    word: Option<u64>,
}

/// The modulus `p^c` of a residue ring, with `p` prime.
///
/// Cheap to clone; residues hold one of these.
#[derive(Clone)]
pub struct PrimePowerModulus(Arc<Inner>);

impl PrimePowerModulus {
    pub fn new(p: u64, exponent: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Self::new_unchecked(p, exponent)
    }

    fn new_unchecked(p: u64, exponent: u32) -> Result<Self> {
        if exponent == 0 {
            return Err(Error::ZeroExponent);
        }
        let modulus = BigUint::from(p).pow(exponent);
        let word = modulus.to_u64();
        Ok(Self(Arc::new(Inner {
            p,
            exponent,
            modulus,
            word,
        })))
    }

    /// Same prime, different exponent.
    pub fn with_exponent(&self, exponent: u32) -> Result<Self> {
        if exponent == self.exponent() {
            return Ok(self.clone());
        }
        Self::new_unchecked(self.p(), exponent)
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn exponent(&self) -> u32 {
        self.0.exponent
    }

    pub fn modulus(&self) -> &BigUint {
        &self.0.modulus
    }

    /// True when residues of this ring use the single-word path.
    pub fn is_word(&self) -> bool {
        self.0.word.is_some()
    }

    pub fn zero(&self) -> Residue {
        self.from_u64(0)
    }

    pub fn one(&self) -> Residue {
        self.from_u64(1)
    }

    pub fn from_u64(&self, v: u64) -> Residue {
        let value = match self.0.word {
            Some(m) => Value::Word(v % m),
            None => Value::Big(BigUint::from(v) % self.modulus()),
        };
        Residue {
            value,
            ring: self.clone(),
        }
    }

    pub fn from_i64(&self, v: i64) -> Residue {
        let r = self.from_u64(v.unsigned_abs());
        if v < 0 {
            -r
        } else {
            r
        }
    }

    pub fn from_i128(&self, v: i128) -> Residue {
        match self.0.word {
            Some(m) => {
                let r = v.rem_euclid(m as i128) as u64;
                Residue {
                    value: Value::Word(r),
                    ring: self.clone(),
                }
            }
            None => self.from_bigint(&BigInt::from(v)),
        }
    }

    pub fn from_biguint(&self, v: &BigUint) -> Residue {
        let r = v % self.modulus();
        self.wrap_big(r)
    }

    pub fn from_bigint(&self, v: &BigInt) -> Residue {
        let m = BigInt::from(self.modulus().clone());
        let r = v.mod_floor(&m);
        self.wrap_big(r.to_biguint().expect("mod_floor is nonnegative"))
    }

    fn wrap_big(&self, reduced: BigUint) -> Residue {
        let value = match self.0.word {
            Some(_) => Value::Word(reduced.to_u64().expect("reduced below word modulus")),
            None => Value::Big(reduced),
        };
        Residue {
            value,
            ring: self.clone(),
        }
    }

    /// `p^v` reduced into this ring (zero once `v >= c`).
    pub fn p_power(&self, v: u32) -> Residue {
        if v >= self.exponent() {
            return self.zero();
        }
        self.from_biguint(&BigUint::from(self.p()).pow(v))
    }

    fn check_same(&self, other: &PrimePowerModulus) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ModulusMismatch {
                left: format!("{self}"),
                right: format!("{other}"),
            })
        }
    }
}

impl PartialEq for PrimePowerModulus {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.p() == other.p() && self.exponent() == other.exponent())
    }
}

impl Eq for PrimePowerModulus {}

impl fmt::Display for PrimePowerModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p(), self.exponent())
    }
}

impl fmt::Debug for PrimePowerModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimePowerModulus({self})")
    }
}

#[derive(Clone, PartialEq, Eq)]
enum Value {
    Word(u64),
    Big(BigUint),
}

/// An element of `Z / p^c Z`.
#[derive(Clone)]
pub struct Residue {
    value: Value,
    ring: PrimePowerModulus,
}

impl PartialEq for Residue {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.value == other.value
    }
}

impl Eq for Residue {}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Word(v) => write!(f, "{v}"),
            Value::Big(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Debug for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (mod {})", self.ring)
    }
}

impl Residue {
    pub fn ring(&self) -> &PrimePowerModulus {
        &self.ring
    }

    /// The canonical representative.
    pub fn value(&self) -> BigUint {
        match &self.value {
            Value::Word(v) => BigUint::from(*v),
            Value::Big(v) => v.clone(),
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match &self.value {
            Value::Word(v) => Some(*v),
            Value::Big(v) => v.to_u64(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Value::Word(v) => *v == 0,
            Value::Big(v) => v.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.value {
            Value::Word(v) => *v == 1,
            Value::Big(v) => v.is_one(),
        }
    }

    fn word_modulus(&self) -> u64 {
        self.ring.0.word.expect("word path")
    }

    fn binary(&self, rhs: &Residue, op: BinOp) -> Residue {
        let value = match (&self.value, &rhs.value) {
            (Value::Word(a), Value::Word(b)) => {
                let m = self.word_modulus();
                Value::Word(match op {
                    BinOp::Add => {
                        let s = *a as u128 + *b as u128;
                        (if s >= m as u128 { s - m as u128 } else { s }) as u64
                    }
                    BinOp::Sub => {
                        if a >= b {
                            a - b
                        } else {
                            m - (b - a)
                        }
                    }
                    BinOp::Mul => ((*a as u128 * *b as u128) % m as u128) as u64,
                })
            }
            (Value::Big(a), Value::Big(b)) => {
                let m = self.ring.modulus();
                Value::Big(match op {
                    BinOp::Add => {
                        let s = a + b;
                        if &s >= m {
                            s - m
                        } else {
                            s
                        }
                    }
                    BinOp::Sub => {
                        if a >= b {
                            a - b
                        } else {
                            m - (b - a)
                        }
                    }
                    BinOp::Mul => (a * b) % m,
                })
            }
            _ => unreachable!("value representation is fixed by the ring"),
        };
        Residue {
            value,
            ring: self.ring.clone(),
        }
    }

    pub fn try_add(&self, rhs: &Residue) -> Result<Residue> {
        self.ring.check_same(&rhs.ring)?;
        Ok(self.binary(rhs, BinOp::Add))
    }

    pub fn try_sub(&self, rhs: &Residue) -> Result<Residue> {
        self.ring.check_same(&rhs.ring)?;
        Ok(self.binary(rhs, BinOp::Sub))
    }

    pub fn try_mul(&self, rhs: &Residue) -> Result<Residue> {
        self.ring.check_same(&rhs.ring)?;
        Ok(self.binary(rhs, BinOp::Mul))
    }

    /// Multiplicative inverse; requires `p ∤ value`.
    pub fn inverse(&self) -> Result<Residue> {
        let p = self.ring.p();
        let not_invertible = || Error::NotInvertible {
            value: self.to_string(),
            modulus: self.ring.to_string(),
        };
        match &self.value {
            Value::Word(a) => {
                if a % p == 0 {
                    return Err(not_invertible());
                }
                let m = self.word_modulus();
                let inv = inv_mod_u64(*a, m).ok_or_else(not_invertible)?;
                Ok(Residue {
                    value: Value::Word(inv),
                    ring: self.ring.clone(),
                })
            }
            Value::Big(a) => {
                if (a % p).is_zero() {
                    return Err(not_invertible());
                }
                let m = BigInt::from(self.ring.modulus().clone());
                let ext = BigInt::from(a.clone()).extended_gcd(&m);
                if !ext.gcd.is_one() {
                    return Err(not_invertible());
                }
                Ok(self.ring.from_bigint(&ext.x))
            }
        }
    }

    /// `self^e` by square-and-multiply; `pow(0) = 1`.
    pub fn pow(&self, mut e: u64) -> Residue {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.binary(&base, BinOp::Mul);
            }
            e >>= 1;
            if e > 0 {
                base = base.binary(&base, BinOp::Mul);
            }
        }
        acc
    }

    /// Divide a residue known to be divisible by `p^v`, landing in `Z/p^{c-v}`.
    pub fn exact_div_by_p(&self, v: u32) -> Result<Residue> {
        let c = self.ring.exponent();
        if v >= c {
            return Err(Error::PrecisionExhausted {
                needed: v as u64 + 1,
                available: c,
            });
        }
        let pv = BigUint::from(self.ring.p()).pow(v);
        let value = self.value();
        let (q, r) = value.div_rem(&pv);
        if !r.is_zero() {
            return Err(Error::NotDivisible {
                value: self.to_string(),
                p: self.ring.p(),
                v,
            });
        }
        let target = self.ring.with_exponent(c - v)?;
        Ok(target.from_biguint(&q))
    }

    /// Multiply the canonical representative by `p^v`, landing in `Z/p^{c+v}`.
    pub fn shift_up(&self, v: u32) -> Result<Residue> {
        let target = self.ring.with_exponent(self.ring.exponent() + v)?;
        let pv = BigUint::from(self.ring.p()).pow(v);
        Ok(target.from_biguint(&(self.value() * pv)))
    }

    /// Image under the projection `Z/p^c -> Z/p^{c'}`, `c' <= c`.
    pub fn reduce(&self, exponent: u32) -> Result<Residue> {
        if exponent > self.ring.exponent() {
            return Err(Error::PrecisionExhausted {
                needed: exponent as u64,
                available: self.ring.exponent(),
            });
        }
        if exponent == self.ring.exponent() {
            return Ok(self.clone());
        }
        let target = self.ring.with_exponent(exponent)?;
        Ok(match &self.value {
            Value::Word(v) => target.from_u64(*v),
            Value::Big(v) => target.from_biguint(v),
        })
    }

    /// `Exact(v)` with `p^v ‖ value`, or `AtLeast(c)` for the zero residue.
    pub fn valuation(&self) -> Valuation {
        let p = self.ring.p();
        match &self.value {
            Value::Word(v) => {
                if *v == 0 {
                    Valuation::AtLeast(self.ring.exponent())
                } else {
                    Valuation::Exact(crate::primes::val_u64(*v, p))
                }
            }
            Value::Big(v) => {
                if v.is_zero() {
                    Valuation::AtLeast(self.ring.exponent())
                } else {
                    Valuation::Exact(biguint_valuation(v, p))
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
enum BinOp {
    Add,
    Sub,
    Mul,
}

fn inv_mod_u64(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

fn biguint_valuation(v: &BigUint, p: u64) -> u32 {
    let mut n = v.clone();
    let mut count = 0;
    let pb = BigUint::from(p);
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return count;
        }
        n = q;
        count += 1;
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign:ident, $op:expr) => {
        impl $tr<&Residue> for &Residue {
            type Output = Residue;
            fn $method(self, rhs: &Residue) -> Residue {
                assert!(self.ring == rhs.ring, "modulus mismatch: {} vs {}", self.ring, rhs.ring);
                self.binary(rhs, $op)
            }
        }
        impl $tr<Residue> for Residue {
            type Output = Residue;
            fn $method(self, rhs: Residue) -> Residue {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Residue> for Residue {
            type Output = Residue;
            fn $method(self, rhs: &Residue) -> Residue {
                (&self).$method(rhs)
            }
        }
        impl $assign_tr<&Residue> for Residue {
            fn $assign(&mut self, rhs: &Residue) {
                *self = (&*self).$method(rhs);
            }
        }
        impl $assign_tr<Residue> for Residue {
            fn $assign(&mut self, rhs: Residue) {
                *self = (&*self).$method(&rhs);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign, BinOp::Add);
forward_binop!(Sub, sub, SubAssign, sub_assign, BinOp::Sub);
forward_binop!(Mul, mul, MulAssign, mul_assign, BinOp::Mul);

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        self.ring.zero().binary(&self, BinOp::Sub)
    }
}

impl Neg for &Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        self.ring.zero().binary(self, BinOp::Sub)
    }
}

/// A p-adic valuation as observed in a truncated ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "amount")]
pub enum Valuation {
    /// `p^v` exactly divides the value.
    Exact(u32),
    /// The value vanished in the working ring `Z/p^v`.
    AtLeast(u32),
}

impl Valuation {
    pub fn amount(&self) -> u32 {
        match *self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Valuation::Exact(_) => "exact",
            Valuation::AtLeast(_) => "at_least",
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Valuation::Exact(_))
    }

    /// Whether the observation is consistent with a valuation of at least `claimed`.
    pub fn meets(&self, claimed: u32) -> bool {
        self.amount() >= claimed
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// `ν_p(q)` for a nonzero rational; `None` stands for `+∞` (q = 0).
pub fn rational_valuation(q: &BigRational, p: u64) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let num = q.numer().magnitude();
    let den = q.denom().magnitude();
    Some(biguint_valuation(num, p) as i64 - biguint_valuation(den, p) as i64)
}

/// `ν_p` of a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        None
    } else {
        Some(biguint_valuation(n.magnitude(), p))
    }
}

/// Reduce a rational with `p`-coprime denominator into `Z/p^c`.
pub fn from_rational(q: &BigRational, ring: &PrimePowerModulus) -> Result<Residue> {
    let p = ring.p();
    let den = q.denom();
    if (den.magnitude() % p).is_zero() {
        return Err(Error::DenominatorNotCoprime {
            denominator: den.to_string(),
            p,
        });
    }
    let num = ring.from_bigint(q.numer());
    let den = ring.from_bigint(den);
    Ok(num * den.inverse()?)
}

/// Convenience constructor for small rationals.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn signed(r: Residue, negative: bool) -> Residue {
    if negative {
        -r
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, c: u32) -> PrimePowerModulus {
        PrimePowerModulus::new(p, c).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert_eq!(PrimePowerModulus::new(9, 2).unwrap_err(), Error::NotPrime(9));
        assert_eq!(PrimePowerModulus::new(7, 0).unwrap_err(), Error::ZeroExponent);
        let r = ring(5, 4);
        assert_eq!(r.modulus(), &BigUint::from(625u32));
        assert!(r.is_word());
        assert!(!ring(499, 8).is_word());
    }

    #[test]
    fn ring_op_examples() {
        let r = ring(2, 5);
        assert_eq!((r.from_u64(3) + r.from_u64(30)).to_u64(), Some(1));
        assert_eq!((r.from_u64(11) * r.from_u64(3)).to_u64(), Some(1));
        assert_eq!(r.from_i64(-1).to_u64(), Some(31));
        let s = ring(7, 3);
        let x = s.from_u64(200);
        assert_eq!(&x * &s.one(), x);
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = ring(2, 5).from_u64(3);
        let b = ring(2, 6).from_u64(3);
        assert!(matches!(a.try_add(&b), Err(Error::ModulusMismatch { .. })));
        assert!(matches!(a.try_mul(&b), Err(Error::ModulusMismatch { .. })));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(ring(2, 5).from_u64(3).inverse().unwrap().to_u64(), Some(11));
        assert_eq!(ring(5, 3).from_u64(7).inverse().unwrap().to_u64(), Some(18));
        assert!(matches!(
            ring(5, 2).from_u64(5).inverse(),
            Err(Error::NotInvertible { .. })
        ));
        // big path
        let big = ring(499, 9);
        let x = big.from_u64(123_456_789);
        assert!((&x * &x.inverse().unwrap()).is_one());
    }

    #[test]
    fn from_rational_examples() {
        // 6 * 521 = 3126 ≡ 1 (mod 3125)
        let r = ring(5, 5);
        assert_eq!(from_rational(&ratio(-1, 6), &r).unwrap().to_u64(), Some(2604));
        assert!(from_rational(&ratio(0, 1), &r).unwrap().is_zero());
        assert!(matches!(
            from_rational(&ratio(1, 5), &ring(5, 2)),
            Err(Error::DenominatorNotCoprime { .. })
        ));
    }

    #[test]
    fn pow_examples() {
        let r = ring(7, 4);
        assert!(r.from_u64(1234).pow(0).is_one());
        assert!(r.zero().pow(0).is_one());
        assert_eq!(ring(3, 7).from_u64(2).pow(10).to_u64(), Some(1024));
        // (-1/6)^6 = 1/46656
        let r6 = ring(5, 6);
        let x = from_rational(&ratio(-1, 6), &r6).unwrap();
        assert_eq!(x.pow(6), from_rational(&ratio(1, 46656), &r6).unwrap());
    }

    #[test]
    fn exact_division_examples() {
        let r = ring(5, 4);
        let q = r.from_u64(50).exact_div_by_p(2).unwrap();
        assert_eq!(q.to_u64(), Some(2));
        assert_eq!(q.ring().exponent(), 2);
        assert!(matches!(r.from_u64(3).exact_div_by_p(1), Err(Error::NotDivisible { .. })));
        assert!(matches!(r.from_u64(0).exact_div_by_p(4), Err(Error::PrecisionExhausted { .. })));
        // H_6 / 7 reduced mod 7^3, from H_6 mod 7^4
        let r4 = ring(7, 4);
        let h6 = (1..=6).fold(r4.zero(), |acc, k| acc + r4.from_u64(k).inverse().unwrap());
        let got = h6.exact_div_by_p(1).unwrap();
        let want = from_rational(&ratio(49, 20 * 7), &ring(7, 3)).unwrap(); // H_6 = 49/20
        assert_eq!(got, want);
    }

    #[test]
    fn valuation_examples() {
        let r = ring(5, 6);
        assert_eq!(r.from_u64(250).valuation(), Valuation::Exact(3));
        assert_eq!(r.zero().valuation(), Valuation::AtLeast(6));
        assert_eq!(r.from_u64(7).valuation(), Valuation::Exact(0));
        let big = ring(499, 9);
        assert_eq!(big.p_power(4).valuation(), Valuation::Exact(4));
        assert_eq!(big.zero().valuation(), Valuation::AtLeast(9));
        assert_eq!(Valuation::AtLeast(6).to_string(), ">=6");
    }

    #[test]
    fn rational_valuation_examples() {
        assert_eq!(rational_valuation(&ratio(25, 12), 5), Some(2));
        assert_eq!(rational_valuation(&ratio(25, 12), 2), Some(-2));
        assert_eq!(rational_valuation(&ratio(77, 12), 7), Some(1));
        assert_eq!(rational_valuation(&ratio(0, 12), 7), None);
    }

    #[test]
    fn reduce_and_shift() {
        let r = ring(3, 5);
        let x = r.from_u64(200);
        assert_eq!(x.reduce(2).unwrap().to_u64(), Some(200 % 9));
        assert!(x.reduce(6).is_err());
        let up = r.from_u64(7).shift_up(2).unwrap();
        assert_eq!(up.ring().exponent(), 7);
        assert_eq!(up.to_u64(), Some(63));
    }
}
