use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Inclusive integer range written `a..b`, `a..=b` or `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IntRange {
    pub lo: i64,
    pub hi: i64,
}

impl IntRange {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    pub fn single(v: i64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn lo_u64(&self) -> u64 {
        self.lo.max(0) as u64
    }

    pub fn hi_u64(&self) -> u64 {
        self.hi.max(0) as u64
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| format!("`{s}` is not an integer range"))
        };
        let range = match s.split_once("..") {
            Some((a, b)) => IntRange::new(parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => IntRange::single(parse(s)?),
        };
        if range.lo > range.hi {
            return Err(format!("empty range `{s}`"));
        }
        Ok(range)
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

impl TryFrom<String> for IntRange {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<IntRange> for String {
    fn from(r: IntRange) -> String {
        r.to_string()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
    #[default]
    Human,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyChoice {
    /// `(-1/(q+1) choose k)^(q+1)`
    #[value(name = "q+1")]
    #[serde(rename = "q+1")]
    PlusOne,
    /// `(1/(q-1) choose k)^(q-1)`
    #[value(name = "q-1")]
    #[serde(rename = "q-1")]
    MinusOne,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanChoice {
    #[value(name = "conj1_1")]
    Conj1_1,
    #[value(name = "conj1_2i")]
    Conj1_2i,
    #[value(name = "conj1_2ii")]
    Conj1_2ii,
}

/// Verify supercongruences and scan related conjectures.
#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "supercong", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Record format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,

    /// Write records here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Flat file of Bernoulli numbers to load (validated) and extend.
    #[arg(long, global = true)]
    pub bernoulli_cache: Option<PathBuf>,

    /// Add per-record wall time and a total to the summary.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Check catalogued congruences over a prime range.
    Verify(VerifyArgs),
    /// Scan one of the conjectures.
    Scan(ScanArgs),
    /// Search composite moduli for the two binomial shapes.
    Search(SearchArgs),
    /// Run the built-in consistency checks.
    Selftest,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// `all` or a comma-separated list of statement ids.
    #[arg(long, default_value = "all")]
    pub statements: String,

    #[arg(long, default_value = "5..499")]
    pub primes: IntRange,

    /// Digits of precision above each claim.
    #[arg(long, default_value_t = 2)]
    pub guard: u32,

    /// Raise the claim of these statements by one (repeatable).
    #[arg(long)]
    pub strengthen: Vec<String>,

    #[arg(long, default_value_t = 12)]
    pub m_max: u64,

    #[arg(long, default_value_t = 10)]
    pub n_cap: u64,

    /// Above p = 53, `s` stops here.
    #[arg(long, default_value_t = 50)]
    pub s_cap: u64,

    /// Visit every `s` up to p-2 regardless of p.
    #[arg(long)]
    pub full_s: bool,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub target: ScanChoice,

    /// Primes for the partial-sum scan.
    #[arg(long, default_value = "2..11")]
    pub primes: IntRange,

    #[arg(long, value_enum, default_value_t = FamilyChoice::Both)]
    pub family: FamilyChoice,

    /// Scan every partial-sum length up to this (default 4p^2).
    #[arg(long)]
    pub full_upto: Option<u64>,

    /// Extra lengths a·p^b with a up to this (default p).
    #[arg(long)]
    pub a_max: Option<u64>,

    #[arg(long, default_value_t = 4)]
    pub b_max: u32,

    #[arg(long, default_value = "2..8")]
    pub m: IntRange,

    /// Restrict `r` (default: every admissible value).
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<IntRange>,

    #[arg(long, default_value_t = 1000)]
    pub pmax: u64,

    #[arg(long, default_value_t = 2)]
    pub guard: u32,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 4)]
    pub nmin: u64,

    #[arg(long, default_value_t = 120)]
    pub nmax: u64,

    #[arg(long, value_enum, default_value_t = FamilyChoice::Both)]
    pub family: FamilyChoice,

    /// Evaluate prime moduli too, as controls.
    #[arg(long)]
    pub include_primes: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!("5..499".parse::<IntRange>().unwrap(), IntRange::new(5, 499));
        assert_eq!("5..=7".parse::<IntRange>().unwrap(), IntRange::new(5, 7));
        assert_eq!("-3".parse::<IntRange>().unwrap(), IntRange::single(-3));
        assert_eq!("-3..2".parse::<IntRange>().unwrap(), IntRange::new(-3, 2));
        assert!("9..3".parse::<IntRange>().is_err());
        assert!("x".parse::<IntRange>().is_err());
    }
}
