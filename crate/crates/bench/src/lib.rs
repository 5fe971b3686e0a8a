//! Shared inputs for the kernel benchmarks.

/// Primes used across benchmark groups, small to large.
pub const PRIMES: [u64; 4] = [31, 101, 251, 499];
