//! Command-line harness over the `supercong` core: statement suites,
//! conjecture scans, composite search and a self-test.

pub mod config;
pub mod records;
pub mod selftest;

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::time::Instant;

use rayon::prelude::*;
use supercong::bernoulli::{self, BernoulliCache, DEFAULT_BOUND};
use supercong::congruences::{verify_range, CongruenceReport, ParamPolicy, StatementId, VerifyOptions};
use supercong::primes::{is_prime, primes_in};
use supercong::scanners::{
    scan_conj_1_1, scan_conj_1_2, search_composites, Conj11Grid, Conj12Config,
    default_exact_workers, Family, ScanRecord, ScanTarget, Verdict,
};
use supercong::{Error, Valuation};

pub use config::{Command, FamilyChoice, Format, IntRange, RunConfig, ScanArgs, ScanChoice, SearchArgs, VerifyArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotPrime(_)
            | Error::ZeroExponent
            | Error::InvalidFamily(_)
            | Error::InvalidParameter(_)
            | Error::NotApplicable { .. }
            | Error::CacheBoundExceeded { .. }
            | Error::ExactBoundExceeded { .. } => EXIT_USAGE,
            _ => EXIT_IO,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("I/O: {e}"),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("I/O: {e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Execute `config` and return the process exit code.
pub fn run(config: &RunConfig) -> i32 {
    match execute(config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Like [`run`], but hands errors back instead of printing them.
pub fn execute(config: &RunConfig) -> CliResult<i32> {
    let loaded = load_cache(config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        if w == 0 {
            return Err(CliError::usage("--workers must be at least 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    let mut out = Output::open(config)?;
    let start = Instant::now();
    let code = pool.install(|| match &config.command {
        Command::Verify(args) => run_verify(config, args, &mut out),
        Command::Scan(args) => run_scan(config, args, &mut out),
        Command::Search(args) => run_search(config, args, &mut out),
        Command::Selftest => selftest::run_checks(&mut out),
    })?;
    if config.timings {
        out.summary(&format!("time {:.3}s", start.elapsed().as_secs_f64()))?;
    }
    out.finish()?;
    save_cache(config, loaded)?;
    Ok(code)
}

fn load_cache(config: &RunConfig) -> CliResult<usize> {
    let Some(path) = &config.bernoulli_cache else {
        return Ok(0);
    };
    if !path.exists() {
        return Ok(0);
    }
    let cache = BernoulliCache::load(path, DEFAULT_BOUND)?;
    bernoulli::global().absorb(&cache)?;
    Ok(cache.len())
}

fn save_cache(config: &RunConfig, loaded: usize) -> CliResult<()> {
    if let Some(path) = &config.bernoulli_cache {
        if bernoulli::global().len() > loaded {
            bernoulli::global().save(path)?;
        }
    }
    Ok(())
}

/// Record stream plus summary lines.
///
/// Human output and its summary share one stream. For JSONL and CSV the
/// summary goes to stdout when records go to a file, and to stderr otherwise.
pub struct Output {
    format: Format,
    records: Box<dyn Write + Send>,
    to_file: bool,
    csv: Option<csv::Writer<Box<dyn Write + Send>>>,
}

impl Output {
    fn open(config: &RunConfig) -> CliResult<Self> {
        let (records, to_file): (Box<dyn Write + Send>, bool) = match &config.output {
            Some(path) => (Box::new(BufWriter::new(File::create(path)?)), true),
            None => (Box::new(BufWriter::new(io::stdout())), false),
        };
        Ok(Self {
            format: config.format,
            records,
            to_file,
            csv: None,
        })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    fn line(&mut self, s: &str) -> CliResult<()> {
        writeln!(self.records, "{s}")?;
        Ok(())
    }

    fn json<T: serde::Serialize>(&mut self, row: &T) -> CliResult<()> {
        let text = serde_json::to_string(row).map_err(|e| CliError {
            code: EXIT_IO,
            message: format!("I/O: {e}"),
        })?;
        self.line(&text)
    }

    fn csv_row<T: serde::Serialize>(&mut self, row: &T) -> CliResult<()> {
        if self.csv.is_none() {
            let sink = std::mem::replace(&mut self.records, Box::new(io::sink()));
            self.csv = Some(csv::Writer::from_writer(sink));
        }
        self.csv.as_mut().expect("just set").serialize(row)?;
        Ok(())
    }

    pub fn summary(&mut self, s: &str) -> CliResult<()> {
        match (self.format, self.to_file) {
            (Format::Human, _) => self.line(s),
            (_, true) => {
                println!("{s}");
                Ok(())
            }
            (_, false) => {
                eprintln!("{s}");
                Ok(())
            }
        }
    }

    fn finish(mut self) -> CliResult<()> {
        match self.csv.take() {
            Some(mut w) => w.flush()?,
            None => self.records.flush()?,
        }
        Ok(())
    }
}

/// Parse `all` or a comma-separated id list.
pub fn parse_statements(s: &str) -> CliResult<Vec<StatementId>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(StatementId::ALL.to_vec());
    }
    let mut ids: Vec<StatementId> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| CliError::usage(format!("unknown statement `{}`", t.trim()))))
        .collect::<CliResult<_>>()?;
    if ids.is_empty() {
        return Err(CliError::usage("no statements given"));
    }
    ids.sort();
    ids.dedup();
    Ok(ids)
}

fn prime_list(range: IntRange, min: u64) -> CliResult<Vec<u64>> {
    if range.lo < min as i64 {
        return Err(CliError::usage(format!("prime range must start at {min} or above")));
    }
    let primes = primes_in(range.lo_u64(), range.hi_u64());
    if primes.is_empty() {
        return Err(CliError::usage(format!("no primes in {range}")));
    }
    Ok(primes)
}

fn families(choice: FamilyChoice) -> Vec<Family> {
    match choice {
        FamilyChoice::PlusOne => vec![Family::PlusOne],
        FamilyChoice::MinusOne => vec![Family::MinusOne],
        FamilyChoice::Both => Family::BOTH.to_vec(),
    }
}

fn margin_text(margin: i64, exact: bool) -> String {
    if exact {
        margin.to_string()
    } else {
        format!(">={margin}")
    }
}

/// Worst (smallest) margin, preferring an exact valuation on ties.
fn worst<'a>(items: impl Iterator<Item = (i64, &'a Valuation)>) -> Option<(i64, bool)> {
    items
        .map(|(m, v)| (m, !v.is_exact()))
        .min()
        .map(|(m, at_least)| (m, !at_least))
}

/// Per-statement summary lines in the human format.
pub fn verify_human_lines(reports: &[CongruenceReport]) -> Vec<String> {
    let mut groups: BTreeMap<StatementId, Vec<&CongruenceReport>> = BTreeMap::new();
    for r in reports {
        groups.entry(r.statement).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(id, rs)| {
            let failed = rs.iter().filter(|r| !r.pass).count();
            let (m, exact) = worst(rs.iter().map(|r| (r.margin(), &r.computed))).expect("non-empty group");
            let status = if failed == 0 { "PASS" } else { "FAIL" };
            let mut line = format!(
                "{status} {:<7} checked {:>5}  failed {:>4}  worst margin {}",
                id.as_str(),
                rs.len(),
                failed,
                margin_text(m, exact)
            );
            if let Some(bad) = rs.iter().find(|r| !r.pass) {
                line.push_str(&format!("  first failure {} (v = {}, claimed {})", bad.params, bad.computed, bad.claimed));
            }
            line
        })
        .collect()
}

fn run_verify(config: &RunConfig, args: &VerifyArgs, out: &mut Output) -> CliResult<i32> {
    let ids = parse_statements(&args.statements)?;
    let strengthen: BTreeSet<StatementId> = args
        .strengthen
        .iter()
        .map(|s| parse_statements(s))
        .collect::<CliResult<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let primes = prime_list(args.primes, 5)?;
    let mut policy = ParamPolicy {
        m_max: args.m_max,
        n_cap: args.n_cap,
        s_cap: args.s_cap,
        ..ParamPolicy::default()
    };
    if args.full_s {
        policy = policy.full_s();
    }
    let opts = VerifyOptions {
        guard: args.guard,
        strengthen,
    };
    let summary = verify_range(&ids, &primes, &policy, &opts)?;
    write_verify(config, &summary.reports, out)?;
    let failed = summary.failure_count();
    let min = worst(summary.reports.iter().map(|r| (r.margin(), &r.computed)));
    out.summary(&format!(
        "summary: {} records, {} pass, {} FAIL, min margin {}",
        summary.reports.len(),
        summary.reports.len() - failed,
        failed,
        min.map_or("-".into(), |(m, e)| margin_text(m, e))
    ))?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAIL })
}

fn write_verify(config: &RunConfig, reports: &[CongruenceReport], out: &mut Output) -> CliResult<()> {
    match out.format() {
        Format::Jsonl => {
            for r in reports {
                out.json(&records::verify_json(r, config.timings))?;
            }
        }
        Format::Csv => {
            for r in reports {
                out.csv_row(&records::verify_csv(r, config.timings))?;
            }
        }
        Format::Human => {
            for line in verify_human_lines(reports) {
                out.line(&line)?;
            }
        }
    }
    Ok(())
}

fn run_scan(_config: &RunConfig, args: &ScanArgs, out: &mut Output) -> CliResult<i32> {
    let recs = match args.target {
        ScanChoice::Conj1_1 => {
            let primes = prime_list(args.primes, 2)?;
            let jobs: Vec<(u64, Family)> = primes
                .iter()
                .flat_map(|&p| families(args.family).into_iter().map(move |f| (p, f)))
                .filter(|(p, f)| f.applies_to(*p))
                .collect();
            let per_job: Vec<Vec<ScanRecord>> = jobs
                .par_iter()
                .map(|&(p, f)| {
                    let standard = Conj11Grid::standard(p);
                    let grid = Conj11Grid {
                        full_upto: args.full_upto.unwrap_or(standard.full_upto),
                        a_max: args.a_max.unwrap_or(standard.a_max),
                        b_max: args.b_max,
                    };
                    scan_conj_1_1(p, f, &grid.points(p), args.guard)
                })
                .collect::<supercong::Result<_>>()?;
            per_job.into_iter().flatten().collect::<Vec<_>>()
        }
        ScanChoice::Conj1_2i | ScanChoice::Conj1_2ii => {
            if args.m.lo < 1 {
                return Err(CliError::usage("--m must be positive"));
            }
            let mut cfg = Conj12Config::new(args.m.lo_u64(), args.m.hi_u64(), args.pmax);
            cfg.guard = args.guard;
            if let Some(r) = args.r {
                cfg.r_min = Some(r.lo);
                cfg.r_max = Some(r.hi);
            }
            let part = if args.target == ScanChoice::Conj1_2i {
                ScanTarget::Conj1_2i
            } else {
                ScanTarget::Conj1_2ii
            };
            scan_conj_1_2(part, &cfg)?
        }
    };
    write_scan(&recs, out)?;
    let violations = recs.iter().filter(|r| r.is_violation()).count();
    let outside = recs.iter().filter(|r| !r.in_hypothesis).count();
    let min = worst(
        recs.iter()
            .filter(|r| r.in_hypothesis && r.verdict != Verdict::Undefined)
            .map(|r| (r.observed.amount() as i64 - r.required as i64, &r.observed)),
    );
    out.summary(&format!(
        "summary: {} records, {} violated, {} outside hypothesis, min margin {}",
        recs.len(),
        violations,
        outside,
        min.map_or("-".into(), |(m, e)| margin_text(m, e))
    ))?;
    Ok(if violations == 0 { EXIT_OK } else { EXIT_FAIL })
}

fn run_search(_config: &RunConfig, args: &SearchArgs, out: &mut Output) -> CliResult<i32> {
    if args.nmin < 2 || args.nmin > args.nmax {
        return Err(CliError::usage("need 2 <= nmin <= nmax"));
    }
    let workers = rayon::current_num_threads().min(default_exact_workers()).max(1);
    let recs = search_composites(args.nmin, args.nmax, &families(args.family), args.include_primes, workers)?;
    write_scan(&recs, out)?;
    let composite = |r: &&ScanRecord| r.point.n.is_some_and(|n| !is_prime(n));
    let count = |v: Verdict| recs.iter().filter(composite).filter(|r| r.verdict == v).count();
    let holds = count(Verdict::Holds);
    out.summary(&format!(
        "summary: {} records, {} composite holds, {} violated, {} undefined",
        recs.len(),
        holds,
        count(Verdict::Violated),
        count(Verdict::Undefined)
    ))?;
    Ok(if holds == 0 { EXIT_OK } else { EXIT_FAIL })
}

fn scan_group(rec: &ScanRecord) -> String {
    let fam = rec.point.family.map(|f| format!(" {}", f.label())).unwrap_or_default();
    match rec.target {
        ScanTarget::Conj1_1 => format!("{} p={}{fam}", rec.target, rec.point.p.unwrap_or(0)),
        ScanTarget::Conj1_2i | ScanTarget::Conj1_2ii => format!("{} m={}", rec.target, rec.point.m.unwrap_or(0)),
        ScanTarget::CompositeSearch => format!("{} n={}{fam}", rec.target, rec.point.n.unwrap_or(0)),
    }
}

fn write_scan(recs: &[ScanRecord], out: &mut Output) -> CliResult<()> {
    match out.format() {
        Format::Jsonl => {
            for r in recs {
                out.json(&records::scan_json(r))?;
            }
        }
        Format::Csv => {
            for r in recs {
                out.csv_row(&records::scan_csv(r))?;
            }
        }
        Format::Human => {
            let mut groups: BTreeMap<(usize, String), Vec<&ScanRecord>> = BTreeMap::new();
            let mut order: BTreeMap<String, usize> = BTreeMap::new();
            for r in recs {
                let key = scan_group(r);
                let next = order.len();
                let idx = *order.entry(key.clone()).or_insert(next);
                groups.entry((idx, key)).or_default().push(r);
            }
            for ((_, key), rs) in groups {
                let tally = |v: Verdict| rs.iter().filter(|r| r.verdict == v).count();
                let outside = rs.iter().filter(|r| !r.in_hypothesis).count();
                let min = worst(
                    rs.iter()
                        .filter(|r| r.verdict != Verdict::Undefined)
                        .map(|r| (r.observed.amount() as i64 - r.required as i64, &r.observed)),
                );
                out.line(&format!(
                    "{key}: points {}  holds {}  violated {}  undefined {}  outside hypothesis {}  worst margin {}",
                    rs.len(),
                    tally(Verdict::Holds),
                    tally(Verdict::Violated),
                    tally(Verdict::Undefined),
                    outside,
                    min.map_or("-".into(), |(m, e)| margin_text(m, e))
                ))?;
            }
        }
    }
    Ok(())
}
