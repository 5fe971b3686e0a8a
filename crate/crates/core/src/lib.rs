//! Verification of supercongruences for harmonic sums and fractional binomials.
//!
//! Arithmetic happens in `Z/p^c` ([`PrimePowerModulus`], [`Residue`]) with
//! exact rationals as the independent reference. The [`congruences`] module
//! holds the statement catalog and verification engine, and [`scanners`]
//! explores the open conjectures.

pub mod bernoulli;
pub mod congruences;
pub mod error;
pub mod fracbinom;
pub mod modring;
pub mod primes;
pub mod scanners;
pub mod seqsums;

pub use congruences::{
    verify, verify_range, CongruenceReport, ParamPolicy, Params, RangeSummary, StatementId,
    VerifyOptions,
};
pub use error::{Error, Result};
pub use modring::{BigRational, PrimePowerModulus, Residue, Valuation};
pub use scanners::{Family, ScanRecord, ScanTarget, Verdict};
