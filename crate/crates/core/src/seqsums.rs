//! Harmonic numbers, inverse power sums and nested reciprocal sums.
//!
//! Every quantity has a modular form (prefix tables over `Z/p^c`) and an
//! exact form over `BigRational`. The exact forms are the reference the
//! modular ones are checked against, so they are written independently:
//! plain accumulation over rationals, no shared helpers with the modular code.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::modring::{BigRational, PrimePowerModulus, Residue};

/// Exact-rational tables are capped here by default.
pub const EXACT_BOUND: u64 = 2000;

/// `H_0^(m), …, H_n^(m)` in a residue ring.
#[derive(Clone, Debug)]
pub struct HarmonicTable {
    order: u32,
    values: Vec<Residue>,
}

impl HarmonicTable {
    pub fn order(&self) -> u32 {
        self.order
    }

    /// `H_k^(m)`.
    pub fn get(&self, k: usize) -> &Residue {
        &self.values[k]
    }

    pub fn last(&self) -> &Residue {
        self.values.last().expect("table always holds H_0")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[Residue] {
        &self.values
    }
}

fn check_coprime_range(n: u64, ring: &PrimePowerModulus) -> Result<()> {
    if n >= ring.p() {
        return Err(Error::DenominatorNotCoprime {
            denominator: ring.p().to_string(),
            p: ring.p(),
        });
    }
    Ok(())
}

/// `1/k` for `k = 0..=n` (index 0 holds zero), by batch inversion.
pub fn inverse_table(n: u64, ring: &PrimePowerModulus) -> Result<Vec<Residue>> {
    check_coprime_range(n, ring)?;
    let n = n as usize;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(ring.one());
    for k in 1..=n {
        let next = &prefix[k - 1] * &ring.from_u64(k as u64);
        prefix.push(next);
    }
    let mut inv = vec![ring.zero(); n + 1];
    let mut running = prefix[n].inverse()?;
    for k in (1..=n).rev() {
        inv[k] = &running * &prefix[k - 1];
        running = &running * &ring.from_u64(k as u64);
    }
    Ok(inv)
}

/// Prefix table of `H_k^(m) = Σ_{j ≤ k} 1/j^m` for `k ≤ n`; needs `n < p`.
pub fn harmonic(n: u64, order: u32, ring: &PrimePowerModulus) -> Result<HarmonicTable> {
    let inv = inverse_table(n, ring)?;
    Ok(harmonic_from_inverses(&inv, order))
}

pub(crate) fn harmonic_from_inverses(inv: &[Residue], order: u32) -> HarmonicTable {
    let ring = inv[0].ring().clone();
    let mut values = Vec::with_capacity(inv.len());
    let mut acc = ring.zero();
    values.push(acc.clone());
    for x in &inv[1..] {
        acc += x.pow(order as u64);
        values.push(acc.clone());
    }
    HarmonicTable { order, values }
}

fn check_exact_bound(n: u64) -> Result<()> {
    if n > EXACT_BOUND {
        Err(Error::ExactBoundExceeded { n, bound: EXACT_BOUND })
    } else {
        Ok(())
    }
}

fn unit_fraction_power(k: u64, order: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(k).pow(order))
}

/// Exact `H_0^(m), …, H_n^(m)`.
pub fn harmonic_exact(n: u64, order: u32) -> Result<Vec<BigRational>> {
    check_exact_bound(n)?;
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = BigRational::zero();
    out.push(acc.clone());
    for k in 1..=n {
        acc += unit_fraction_power(k, order);
        out.push(acc.clone());
    }
    Ok(out)
}

/// `Σ_{k=1}^{p-1} 1/k^s` in the ring, for `1 ≤ s ≤ p-2`.
pub fn inv_power_sum(s: u32, ring: &PrimePowerModulus) -> Result<Residue> {
    let p = ring.p();
    if s == 0 || s as u64 > p.saturating_sub(2) {
        return Err(Error::InvalidParameter(format!(
            "inverse power sum needs 1 <= s <= p-2, got s = {s}, p = {p}"
        )));
    }
    let inv = inverse_table(p - 1, ring)?;
    Ok(inv[1..].iter().fold(ring.zero(), |acc, x| acc + x.pow(s as u64)))
}

/// Exact `Σ_{k=1}^{n} 1/k^s`.
pub fn inv_power_sum_exact(n: u64, s: u32) -> Result<BigRational> {
    check_exact_bound(n)?;
    Ok((1..=n).fold(BigRational::zero(), |acc, k| acc + unit_fraction_power(k, s)))
}

/// Prefix values `e_s(1, 1/2, …, 1/k)` for `k = 0..=n`.
#[derive(Clone, Debug)]
pub struct SymTable {
    degree: usize,
    values: Vec<Residue>,
}

impl SymTable {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, k: usize) -> &Residue {
        &self.values[k]
    }

    pub fn values(&self) -> &[Residue] {
        &self.values
    }

    /// `Σ_{k=1}^{n} e_s^{(k)}`.
    pub fn prefix_sum(&self) -> Residue {
        let ring = self.values[0].ring().clone();
        self.values[1..].iter().fold(ring.zero(), |acc, x| acc + x)
    }
}

/// Elementary symmetric prefix table via `e_s^{(k)} = e_s^{(k-1)} + e_{s-1}^{(k-1)}/k`.
pub fn elem_sym(degree: usize, n: u64, ring: &PrimePowerModulus) -> Result<SymTable> {
    let inv = inverse_table(n, ring)?;
    Ok(elem_sym_from_inverses(&inv, degree))
}

pub(crate) fn elem_sym_from_inverses(inv: &[Residue], degree: usize) -> SymTable {
    let ring = inv[0].ring().clone();
    // row[t] = e_t^{(k)} for t <= degree
    let mut row = vec![ring.zero(); degree + 1];
    row[0] = ring.one();
    let mut values = Vec::with_capacity(inv.len());
    values.push(row[degree].clone());
    for x in &inv[1..] {
        for t in (1..=degree).rev() {
            let add = &row[t - 1] * x;
            row[t] += add;
        }
        values.push(row[degree].clone());
    }
    SymTable { degree, values }
}

/// All of `e_0, …, e_n` over the full set `{1, 1/2, …, 1/n}`.
pub fn elem_sym_all(n: u64, ring: &PrimePowerModulus) -> Result<Vec<Residue>> {
    let inv = inverse_table(n, ring)?;
    Ok(elem_sym_all_from_inverses(&inv))
}

pub(crate) fn elem_sym_all_from_inverses(inv: &[Residue]) -> Vec<Residue> {
    let ring = inv[0].ring().clone();
    let n = inv.len() - 1;
    let mut coeffs = vec![ring.zero(); n + 1];
    coeffs[0] = ring.one();
    for (k, x) in inv.iter().enumerate().skip(1) {
        for t in (1..=k).rev() {
            let add = &coeffs[t - 1] * x;
            coeffs[t] += add;
        }
    }
    coeffs
}

/// Exact prefix values of `e_s` over `{1, …, 1/k}`, `k = 0..=n`.
pub fn elem_sym_exact(degree: usize, n: u64) -> Result<Vec<BigRational>> {
    check_exact_bound(n)?;
    let mut row = vec![BigRational::zero(); degree + 1];
    row[0] = BigRational::one();
    let mut out = vec![row[degree].clone()];
    for k in 1..=n {
        let x = BigRational::new(BigInt::one(), BigInt::from(k));
        for t in (1..=degree).rev() {
            let add = &row[t - 1] * &x;
            row[t] += add;
        }
        out.push(row[degree].clone());
    }
    Ok(out)
}

/// `Σ_{1 ≤ i < j ≤ k} (1/(i j^2) + 1/(i^2 j))` through the identity
/// `H_k H_k^(2) - H_k^(3)`.
pub fn mixed_pair_sum(k: u64, ring: &PrimePowerModulus) -> Result<Residue> {
    let inv = inverse_table(k, ring)?;
    let h1 = harmonic_from_inverses(&inv, 1);
    let h2 = harmonic_from_inverses(&inv, 2);
    let h3 = harmonic_from_inverses(&inv, 3);
    Ok(h1.last() * h2.last() - h3.last())
}

/// Exact form of [`mixed_pair_sum`] through the same identity.
pub fn mixed_pair_sum_exact(k: u64) -> Result<BigRational> {
    let h1 = harmonic_exact(k, 1)?;
    let h2 = harmonic_exact(k, 2)?;
    let h3 = harmonic_exact(k, 3)?;
    let k = k as usize;
    Ok(&h1[k] * &h2[k] - &h3[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::{from_rational, ratio};

    fn ring(p: u64, c: u32) -> PrimePowerModulus {
        PrimePowerModulus::new(p, c).unwrap()
    }

    #[test]
    fn harmonic_examples() {
        let h = harmonic_exact(4, 1).unwrap();
        assert_eq!(h[4], ratio(25, 12));
        assert_eq!(harmonic_exact(0, 3).unwrap()[0], BigRational::zero());
        let t = harmonic(4, 1, &ring(5, 2)).unwrap();
        assert!(t.last().is_zero());
        assert!(harmonic(3, 3, &ring(5, 2)).unwrap().get(0).is_zero());
        assert!(matches!(harmonic(5, 1, &ring(5, 2)), Err(Error::DenominatorNotCoprime { .. })));
    }

    #[test]
    fn inv_power_sum_examples() {
        assert!(inv_power_sum(1, &ring(5, 2)).unwrap().is_zero());
        let r = ring(7, 2);
        let want = from_rational(&ratio(5_369, 3_600), &r).unwrap();
        assert_eq!(inv_power_sum_exact(6, 2).unwrap(), ratio(5_369, 3_600));
        // one more term brings in 1/49
        assert_eq!(inv_power_sum_exact(7, 2).unwrap(), ratio(266_681, 176_400));
        assert_eq!(inv_power_sum(2, &r).unwrap(), want);
        assert!(inv_power_sum(0, &r).is_err());
        assert!(inv_power_sum(6, &r).is_err());
    }

    #[test]
    fn elem_sym_examples() {
        let e2 = elem_sym_exact(2, 3).unwrap();
        assert_eq!(e2[3], BigRational::one());
        assert_eq!(elem_sym_exact(4, 3).unwrap()[3], BigRational::zero());
        let r = ring(11, 3);
        let e1 = elem_sym(1, 10, &r).unwrap();
        let h = harmonic(10, 1, &r).unwrap();
        assert_eq!(e1.values(), h.values());
        assert!(elem_sym(4, 3, &r).unwrap().get(3).is_zero());
        // full coefficients agree with the degree tables at n
        let all = elem_sym_all(10, &r).unwrap();
        for (s, e) in all.iter().enumerate() {
            assert_eq!(*e, *elem_sym(s, 10, &r).unwrap().get(10));
        }
    }

    #[test]
    fn mixed_pair_examples() {
        assert_eq!(mixed_pair_sum_exact(2).unwrap(), ratio(3, 4));
        assert_eq!(mixed_pair_sum_exact(1).unwrap(), BigRational::zero());
        let brute: BigRational = [(1i64, 2i64), (1, 3), (2, 3)]
            .iter()
            .map(|&(i, j)| ratio(1, i * j * j) + ratio(1, i * i * j))
            .sum();
        assert_eq!(mixed_pair_sum_exact(3).unwrap(), brute);
        let r = ring(7, 3);
        assert_eq!(mixed_pair_sum(3, &r).unwrap(), from_rational(&brute, &r).unwrap());
    }
}
