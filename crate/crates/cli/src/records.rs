use serde::Serialize;
use supercong::congruences::{CongruenceReport, Params};
use supercong::scanners::{Boundary, CompositeEvidence, ScanRecord, Verdict};

/// One verification. Field order is part of the format.
///
/// JSONL carries `params` as an object and CSV as text like `m=2 n=1`.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyRow<P> {
    pub statement_id: &'static str,
    pub params: P,
    pub claimed: u32,
    pub observed_kind: &'static str,
    pub observed_amount: u32,
    pub pass: bool,
    pub working_precision: u32,
    pub residual: String,
    pub p: u64,
    pub c: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_us: Option<u128>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamsObject {
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

impl From<&Params> for ParamsObject {
    fn from(p: &Params) -> Self {
        Self {
            m: p.m,
            n: p.n,
            k: p.k,
            s: p.s,
            part: p.part,
        }
    }
}

pub fn params_text(prm: &Params) -> String {
    [("m", prm.m), ("n", prm.n), ("k", prm.k), ("s", prm.s), ("part", prm.part)]
        .iter()
        .filter_map(|(name, v)| v.map(|v| format!("{name}={v}")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn verify_row<P>(r: &CongruenceReport, params: P, timings: bool) -> VerifyRow<P> {
    VerifyRow {
        statement_id: r.statement.as_str(),
        params,
        claimed: r.claimed,
        observed_kind: r.computed.kind(),
        observed_amount: r.computed.amount(),
        pass: r.pass,
        working_precision: r.working_precision,
        residual: r.residual.value().to_string(),
        p: r.params.p,
        c: r.residual.ring().exponent(),
        wall_time_us: timings.then_some(r.wall_time.as_micros()),
    }
}

pub fn verify_json(r: &CongruenceReport, timings: bool) -> VerifyRow<ParamsObject> {
    verify_row(r, ParamsObject::from(&r.params), timings)
}

pub fn verify_csv(r: &CongruenceReport, timings: bool) -> VerifyRow<String> {
    verify_row(r, params_text(&r.params), timings)
}

/// One scan point. JSONL keeps `evidence` as an object and CSV as JSON text.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow<E> {
    pub target: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<&'static str>,
    pub required: u32,
    pub observed_kind: &'static str,
    pub observed_amount: u32,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub working_precision: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<&'static str>,
    pub in_hypothesis: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub easy_layer: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<E>,
}

/// Flat CSV row; every column present so the header is stable.
#[derive(Clone, Debug, Serialize)]
pub struct ScanCsvRow {
    pub target: &'static str,
    pub p: Option<u64>,
    pub m: Option<u64>,
    pub r: Option<i64>,
    pub n: Option<u64>,
    pub family: Option<&'static str>,
    pub required: u32,
    pub observed_kind: &'static str,
    pub observed_amount: u32,
    pub verdict: &'static str,
    pub residual: Option<String>,
    pub working_precision: Option<u32>,
    pub boundary: Option<&'static str>,
    pub in_hypothesis: bool,
    pub easy_layer: Option<bool>,
    pub evidence: Option<String>,
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Violated => "violated",
        Verdict::Undefined => "undefined",
    }
}

pub fn scan_json(rec: &ScanRecord) -> ScanRow<&CompositeEvidence> {
    ScanRow {
        target: rec.target.as_str(),
        p: rec.point.p,
        m: rec.point.m,
        r: rec.point.r,
        n: rec.point.n,
        family: rec.point.family.map(|f| f.label()),
        required: rec.required,
        observed_kind: rec.observed.kind(),
        observed_amount: rec.observed.amount(),
        verdict: verdict_str(rec.verdict),
        residual: rec.residual.clone(),
        working_precision: rec.working_precision,
        boundary: rec.boundary.map(|b| match b {
            Boundary::Ceil => "ceil",
            Boundary::Floor => "floor",
        }),
        in_hypothesis: rec.in_hypothesis,
        easy_layer: rec.easy_layer,
        evidence: rec.evidence.as_ref(),
    }
}

pub fn scan_csv(rec: &ScanRecord) -> ScanCsvRow {
    let j = scan_json(rec);
    ScanCsvRow {
        target: j.target,
        p: j.p,
        m: j.m,
        r: j.r,
        n: j.n,
        family: j.family,
        required: j.required,
        observed_kind: j.observed_kind,
        observed_amount: j.observed_amount,
        verdict: j.verdict,
        residual: j.residual,
        working_precision: j.working_precision,
        boundary: j.boundary,
        in_hypothesis: j.in_hypothesis,
        easy_layer: j.easy_layer,
        evidence: j.evidence.map(|e| serde_json::to_string(e).expect("plain data")),
    }
}
