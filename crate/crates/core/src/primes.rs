//! Primality, prime iteration and small factorizations.

/// Witnesses that make Miller-Rabin deterministic for every `n < 2^64`.
const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &WITNESSES {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes in `lo..=hi`, by a sieve of Eratosthenes.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let hi_us = hi as usize;
    let mut composite = vec![false; hi_us + 1];
    let mut i = 2usize;
    while i * i <= hi_us {
        if !composite[i] {
            let mut j = i * i;
            while j <= hi_us {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    (lo.max(2)..=hi).filter(|&n| !composite[n as usize]).collect()
}

/// Prime factorization by trial division, ascending primes with exponents.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q * q <= n {
        if n.is_multiple_of(q) {
            let mut a = 0;
            while n.is_multiple_of(q) {
                n /= q;
                a += 1;
            }
            out.push((q, a));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `ν_p(n!)` by Legendre's formula.
pub fn legendre(n: u64, p: u64) -> u64 {
    let mut total = 0;
    let mut q = n;
    while q > 0 {
        q /= p;
        total += q;
    }
    total
}

/// `ν_p(n)` for `n > 0`; returns 0 for `n = 0` by convention of the callers.
pub fn val_u64(mut n: u64, p: u64) -> u32 {
    if n == 0 {
        return 0;
    }
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn agrees_with_trial_division() {
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // base-2 strong pseudoprimes and Carmichael numbers
        for n in [2047u64, 3277, 4033, 561, 1105, 3_215_031_751, 3_825_123_056_546_413_051] {
            assert!(!is_prime(n), "{n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557)); // largest 64-bit prime
        assert!(is_prime(1_000_000_007));
    }

    #[test]
    fn sieve_matches_test() {
        let ps = primes_in(5, 499);
        assert_eq!(ps.first(), Some(&5));
        assert_eq!(ps.last(), Some(&499));
        assert_eq!(ps.len(), 93);
        assert!(ps.iter().all(|&p| is_prime(p)));
        assert!(primes_in(24, 28).is_empty());
    }

    #[test]
    fn factorization_and_legendre() {
        assert_eq!(factorize(120), vec![(2, 3), (3, 1), (5, 1)]);
        assert_eq!(factorize(97), vec![(97, 1)]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(legendre(10, 2), 8);
        assert_eq!(legendre(161_051, 11), 16_105);
        assert_eq!(val_u64(250, 5), 3);
    }
}
