//! Batch job documents: named spaces, metric aliases and a list of queries,
//! run in document order into a report.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::deciders::{decide_interval_cover, finite_subcover, replay_lc, replay_subcover, semidecide_lc_cover, Interval};
use crate::gus::{ball_order, ball_subset, make_space, FormalBall, Gus, GusError, MetricId, Point, SpaceKind};
use crate::numeric::{format_rational, parse_rational, to_f64, Bound, Rational};
use crate::points::{dist_upper, member, point_of_element, sqrt_point, PointApprox};
use crate::uniform::{pf_cover_check, prec, r_x, replay_pf};
use crate::verdict::Verdict;

pub const DEFAULT_BUDGET: u32 = 12;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobDocument {
    #[serde(default)]
    pub spaces: BTreeMap<String, SpaceKind>,
    #[serde(default)]
    pub metrics: BTreeMap<String, MetricDecl>,
    pub queries: Vec<Query>,
}

/// A named metric: the sup of the listed generators of one space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricDecl {
    pub space: String,
    pub generators: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricRef {
    /// An alias from `metrics`, or a single generator id.
    Name(String),
    Generators(Vec<String>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Point,
    /// A rational as a string or a JSON number.
    pub radius: Value,
    #[serde(default)]
    pub metric: Option<MetricRef>,
}

/// A formal point of the completion.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Sqrt { sqrt: u64 },
    Element { element: Point },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Query {
    #[serde(flatten)]
    pub body: QueryBody,
    #[serde(default)]
    pub budget: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QueryBody {
    IntervalCover { target: Interval, u: Vec<Interval> },
    BallCover { space: String, a: BallSpec, u: Vec<BallSpec> },
    PfCover { space: String, a: BallSpec, u: Vec<BallSpec> },
    Subcover { space: String, u: Vec<BallSpec> },
    BallOrder { space: String, a: BallSpec, b: BallSpec, #[serde(default)] strict: bool },
    BallSubset { space: String, a: BallSpec, b: BallSpec },
    Prec { space: String, a: BallSpec, b: BallSpec },
    RX { space: String, a: BallSpec, b: BallSpec },
    Member { space: String, point: PointSpec, ball: BallSpec },
    Dist { space: String, p: PointSpec, q: PointSpec, n: u32, #[serde(default)] metric: Option<MetricRef> },
}

impl QueryBody {
    pub fn kind(&self) -> &'static str {
        match self {
            QueryBody::IntervalCover { .. } => "interval-cover",
            QueryBody::BallCover { .. } => "ball-cover",
            QueryBody::PfCover { .. } => "pf-cover",
            QueryBody::Subcover { .. } => "subcover",
            QueryBody::BallOrder { .. } => "ball-order",
            QueryBody::BallSubset { .. } => "ball-subset",
            QueryBody::Prec { .. } => "prec",
            QueryBody::RX { .. } => "r-x",
            QueryBody::Member { .. } => "member",
            QueryBody::Dist { .. } => "dist",
        }
    }

    fn space(&self) -> Option<&str> {
        match self {
            QueryBody::IntervalCover { .. } => None,
            QueryBody::BallCover { space, .. }
            | QueryBody::PfCover { space, .. }
            | QueryBody::Subcover { space, .. }
            | QueryBody::BallOrder { space, .. }
            | QueryBody::BallSubset { space, .. }
            | QueryBody::Prec { space, .. }
            | QueryBody::RX { space, .. }
            | QueryBody::Member { space, .. }
            | QueryBody::Dist { space, .. } => Some(space),
        }
    }

    /// Every ball of the query with its path below the query.
    fn balls(&self) -> Vec<(String, &BallSpec)> {
        let mut out: Vec<(String, &BallSpec)> = Vec::new();
        match self {
            QueryBody::BallCover { a, u, .. } | QueryBody::PfCover { a, u, .. } => {
                out.push(("a".into(), a));
                out.extend(u.iter().enumerate().map(|(i, b)| (format!("u[{i}]"), b)));
            }
            QueryBody::Subcover { u, .. } => out.extend(u.iter().enumerate().map(|(i, b)| (format!("u[{i}]"), b))),
            QueryBody::BallOrder { a, b, .. } | QueryBody::BallSubset { a, b, .. } | QueryBody::Prec { a, b, .. } | QueryBody::RX { a, b, .. } => {
                out.push(("a".into(), a));
                out.push(("b".into(), b));
            }
            QueryBody::Member { ball, .. } => out.push(("ball".into(), ball)),
            QueryBody::IntervalCover { .. } | QueryBody::Dist { .. } => {}
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum JobError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{path}: unknown space {name:?}")]
    UnknownSpace { path: String, name: String },
    #[error("{path}: space has no exact spatial oracle")]
    OracleMissing { path: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl JobError {
    fn at(path: &str, e: impl fmt::Display) -> Self {
        JobError::Invalid { path: path.to_string(), message: e.to_string() }
    }

    fn space(path: &str, e: GusError) -> Self {
        match e {
            GusError::OracleMissing => JobError::OracleMissing { path: path.to_string() },
            e => JobError::at(path, e),
        }
    }
}

pub fn parse_job(text: &str) -> Result<JobDocument, JobError> {
    serde_json::from_str(text).map_err(|e| JobError::Parse { line: e.line(), column: e.column(), message: e.to_string() })
}

/// A located problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct Context<'a> {
    doc: &'a JobDocument,
    spaces: BTreeMap<String, Gus>,
}

impl<'a> Context<'a> {
    fn build(doc: &'a JobDocument) -> (Self, Vec<JobError>) {
        let mut spaces = BTreeMap::new();
        let mut errors = Vec::new();
        for (name, kind) in &doc.spaces {
            match make_space(kind) {
                Ok(g) => {
                    spaces.insert(name.clone(), g);
                }
                Err(e) => errors.push(JobError::at(&format!("spaces.{name}"), e)),
            }
        }
        for (name, m) in &doc.metrics {
            let path = format!("metrics.{name}");
            match spaces.get(&m.space) {
                None if !doc.spaces.contains_key(&m.space) => {
                    errors.push(JobError::UnknownSpace { path: format!("{path}.space"), name: m.space.clone() })
                }
                None => {}
                Some(g) => {
                    if let Err(e) = MetricId::new(m.generators.clone()).and_then(|id| g.check_metric(&id)) {
                        errors.push(JobError::at(&format!("{path}.generators"), e));
                    }
                }
            }
        }
        (Context { doc, spaces }, errors)
    }

    fn space(&self, path: &str, name: &str) -> Result<&Gus, JobError> {
        self.spaces.get(name).ok_or_else(|| JobError::UnknownSpace { path: format!("{path}.space"), name: name.to_string() })
    }

    fn metric(&self, path: &str, space: &str, g: &Gus, m: &Option<MetricRef>) -> Result<MetricId, JobError> {
        let id = match m {
            None => g.full_metric(),
            Some(MetricRef::Name(n)) => match self.doc.metrics.get(n) {
                Some(decl) if decl.space == space => MetricId::new(decl.generators.clone()).map_err(|e| JobError::at(path, e))?,
                Some(decl) => return Err(JobError::at(path, format!("metric {n:?} belongs to space {:?}", decl.space))),
                None => MetricId::single(n),
            },
            Some(MetricRef::Generators(v)) => MetricId::new(v.clone()).map_err(|e| JobError::at(path, e))?,
        };
        g.check_metric(&id).map_err(|e| JobError::at(path, e))?;
        Ok(id)
    }

    fn ball(&self, path: &str, space: &str, spec: &BallSpec) -> Result<FormalBall, JobError> {
        let g = self.space(path, space)?;
        let metric = self.metric(&format!("{path}.metric"), space, g, &spec.metric)?;
        let radius = rational(&format!("{path}.radius"), &spec.radius)?;
        if !g.contains_point(&spec.center) {
            return Err(JobError::at(&format!("{path}.center"), format!("{} is not in the carrier", spec.center)));
        }
        FormalBall::new(metric, spec.center.clone(), radius).map_err(|e| JobError::at(&format!("{path}.radius"), e))
    }

    fn balls(&self, path: &str, space: &str, specs: &[BallSpec]) -> Result<Vec<FormalBall>, JobError> {
        specs.iter().enumerate().map(|(i, s)| self.ball(&format!("{path}.u[{i}]"), space, s)).collect()
    }

    fn point(&self, path: &str, g: &Gus, spec: &PointSpec) -> Result<PointApprox, JobError> {
        match spec {
            PointSpec::Sqrt { sqrt } => sqrt_point(g, *sqrt).map_err(|e| JobError::at(path, e)),
            PointSpec::Element { element } => point_of_element(g, element).map_err(|e| JobError::at(path, e)),
        }
    }
}

fn rational(path: &str, v: &Value) -> Result<Rational, JobError> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(JobError::at(path, format!("expected a rational, found {other}"))),
    };
    parse_rational(&text).map_err(|e| JobError::at(path, e))
}

/// Reference and shape check of the whole document; runs no query.
pub fn validate(doc: &JobDocument) -> Vec<Diagnostic> {
    let (ctx, errors) = Context::build(doc);
    let mut out: Vec<Diagnostic> = errors.into_iter().map(diagnostic).collect();
    for (i, q) in doc.queries.iter().enumerate() {
        let path = format!("queries[{i}]");
        if let QueryBody::IntervalCover { target, u } = &q.body {
            for (p, iv) in std::iter::once(("target".to_string(), target)).chain(u.iter().enumerate().map(|(k, iv)| (format!("u[{k}]"), iv))) {
                if !iv.is_wellformed() {
                    out.push(Diagnostic { path: format!("{path}.{p}"), message: "interval must have lo < hi".into() });
                }
            }
            continue;
        }
        let space = q.body.space().unwrap_or_default();
        let Some(g) = ctx.spaces.get(space) else {
            if !doc.spaces.contains_key(space) {
                out.push(diagnostic(JobError::UnknownSpace { path: format!("{path}.space"), name: space.to_string() }));
            }
            continue;
        };
        for (p, b) in q.body.balls() {
            if let Err(e) = ctx.ball(&format!("{path}.{p}"), space, b) {
                out.push(diagnostic(e));
            }
        }
        match &q.body {
            QueryBody::Member { point, .. } => {
                if let Err(e) = ctx.point(&format!("{path}.point"), g, point) {
                    out.push(diagnostic(e));
                }
            }
            QueryBody::Dist { p, q: qq, metric, .. } => {
                for (name, s) in [("p", p), ("q", qq)] {
                    if let Err(e) = ctx.point(&format!("{path}.{name}"), g, s) {
                        out.push(diagnostic(e));
                    }
                }
                if let Err(e) = ctx.metric(&format!("{path}.metric"), space, g, metric) {
                    out.push(diagnostic(e));
                }
            }
            _ => {}
        }
    }
    out
}

fn diagnostic(e: JobError) -> Diagnostic {
    match e {
        JobError::Parse { line, column, message } => Diagnostic { path: format!("{line}:{column}"), message },
        JobError::UnknownSpace { path, name } => Diagnostic { path, message: format!("unknown space {name:?}") },
        JobError::OracleMissing { path } => Diagnostic { path, message: "space has no exact spatial oracle".into() },
        JobError::Invalid { path, message } => Diagnostic { path, message },
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub default_budget: u32,
    pub replay: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { default_budget: DEFAULT_BUDGET, replay: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryReport {
    pub index: usize,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tag: Option<&'static str>,
    /// `proved`, `refuted`, `unknown` or `error`.
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    pub budget: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replayed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Timing; not part of the deterministic content.
    pub wall_ms: f64,
}

impl QueryReport {
    pub fn code(&self) -> i32 {
        match self.verdict {
            "proved" => 0,
            "refuted" => 1,
            "unknown" => 2,
            _ => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub queries: Vec<QueryReport>,
    pub exit_code: i32,
}

impl Report {
    /// The report with timing fields zeroed.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        r.queries.iter_mut().for_each(|q| q.wall_ms = 0.0);
        r
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for q in &self.queries {
            let tag = q.tag.map(|t| format!(" [{t}]")).unwrap_or_default();
            s += &format!("#{} {}{}: {} (budget {}, {:.1} ms)", q.index, q.kind, tag, q.verdict, q.budget, q.wall_ms);
            if let Some(r) = q.replayed {
                s += if r { ", replayed" } else { ", REPLAY FAILED" };
            }
            s += "\n";
            if let Some(e) = &q.error {
                s += &format!("  error: {e}\n");
            }
            if let Some(w) = &q.witness {
                s += &format!("  witness: {w}\n");
            }
            if let Some(c) = &q.certificate {
                s += &format!("  certificate: {c}\n");
            }
        }
        s += &format!("exit code {}\n", self.exit_code);
        s
    }
}

struct Outcome {
    verdict: &'static str,
    certificate: Option<Value>,
    witness: Option<Value>,
    replayed: Option<bool>,
}

fn outcome<P: Serialize, R: Serialize>(v: Verdict<P, R>, replay: Option<&dyn Fn(&P) -> bool>) -> Outcome {
    let verdict = v.name();
    match v {
        Verdict::Proved(p) => Outcome {
            verdict,
            replayed: replay.map(|f| f(&p)),
            certificate: Some(serde_json::to_value(&p).unwrap_or(Value::Null)),
            witness: None,
        },
        Verdict::Refuted(r) => {
            Outcome { verdict, certificate: None, witness: Some(serde_json::to_value(&r).unwrap_or(Value::Null)), replayed: None }
        }
        Verdict::Unknown { .. } => Outcome { verdict, certificate: None, witness: None, replayed: None },
    }
}

fn bound_text(b: &Bound) -> Value {
    match b {
        Bound::Finite(q) => json!({ "exact": format_rational(q), "approx": to_f64(q) }),
        Bound::Infinite => json!("inf"),
    }
}

fn run_query(ctx: &Context, path: &str, q: &QueryBody, budget: u32, replay: bool) -> Result<Outcome, JobError> {
    let space = q.space().unwrap_or_default();
    let sp = |e: GusError| JobError::space(path, e);
    Ok(match q {
        QueryBody::IntervalCover { target, u } => {
            let v = decide_interval_cover(target, u).map_err(|e| JobError::at(path, e))?;
            let check = |c: &crate::deciders::ChainCertificate| c.verify(u).is_ok();
            outcome(v.map(|c| c, |q| format_rational(&q)), replay.then_some(&check as &dyn Fn(&_) -> bool))
        }
        QueryBody::BallCover { a, u, .. } => {
            let g = ctx.space(path, space)?;
            let (a, u) = (ctx.ball(&format!("{path}.a"), space, a)?, ctx.balls(path, space, u)?);
            let v = semidecide_lc_cover(g, &a, &u, budget).map_err(sp)?;
            let check = |c: &_| replay_lc(g, &a, &u, c).is_ok();
            outcome(v, replay.then_some(&check as &dyn Fn(&_) -> bool))
        }
        QueryBody::PfCover { a, u, .. } => {
            let g = ctx.space(path, space)?;
            let (a, u) = (ctx.ball(&format!("{path}.a"), space, a)?, ctx.balls(path, space, u)?);
            let v = pf_cover_check(g, &a, &u, budget).map_err(sp)?;
            let check = |c: &_| replay_pf(g, &a, &u, c).is_ok();
            outcome(v, replay.then_some(&check as &dyn Fn(&_) -> bool))
        }
        QueryBody::Subcover { u, .. } => {
            let g = ctx.space(path, space)?;
            let u = ctx.balls(path, space, u)?;
            let v = finite_subcover(g, &u, budget).map_err(sp)?;
            let check = |c: &_| replay_subcover(g, &u, c).is_ok();
            outcome(v, replay.then_some(&check as &dyn Fn(&_) -> bool))
        }
        QueryBody::BallOrder { a, b, strict, .. } => {
            let g = ctx.space(path, space)?;
            let (a, b) = (ctx.ball(&format!("{path}.a"), space, a)?, ctx.ball(&format!("{path}.b"), space, b)?);
            outcome(ball_order(g, &a, &b, *strict, budget), None)
        }
        QueryBody::BallSubset { a, b, .. } => {
            let g = ctx.space(path, space)?;
            let (a, b) = (ctx.ball(&format!("{path}.a"), space, a)?, ctx.ball(&format!("{path}.b"), space, b)?);
            outcome(ball_subset(g, &a, &b, budget).map_err(sp)?, None)
        }
        QueryBody::Prec { a, b, .. } => {
            let g = ctx.space(path, space)?;
            let (a, b) = (ctx.ball(&format!("{path}.a"), space, a)?, ctx.ball(&format!("{path}.b"), space, b)?);
            outcome(prec(g, &a, &b, budget).map_err(sp)?, None)
        }
        QueryBody::RX { a, b, .. } => {
            let g = ctx.space(path, space)?;
            let (a, b) = (ctx.ball(&format!("{path}.a"), space, a)?, ctx.ball(&format!("{path}.b"), space, b)?);
            outcome(r_x(g, &a, &b, budget).map_err(sp)?, None)
        }
        QueryBody::Member { point, ball, .. } => {
            let g = ctx.space(path, space)?;
            let alpha = ctx.point(&format!("{path}.point"), g, point)?;
            let b = ctx.ball(&format!("{path}.ball"), space, ball)?;
            outcome(member(&alpha, &b, budget), None)
        }
        QueryBody::Dist { p, q, n, metric, .. } => {
            let g = ctx.space(path, space)?;
            let d = ctx.metric(&format!("{path}.metric"), space, g, metric)?;
            let (alpha, beta) = (ctx.point(&format!("{path}.p"), g, p)?, ctx.point(&format!("{path}.q"), g, q)?);
            let mut table = Vec::new();
            for k in 0..=*n {
                let up = dist_upper(&alpha, &beta, &d, k).map_err(|e| JobError::at(path, e))?;
                table.push(json!({ "n": k, "upper": bound_text(&up) }));
            }
            Outcome { verdict: "proved", certificate: Some(json!({ "metric": d, "table": table })), witness: None, replayed: None }
        }
    })
}

/// Runs every query in document order. A document that fails validation
/// yields one error record per query it touches.
pub fn run(doc: &JobDocument, opts: &RunOptions) -> Report {
    let (ctx, _) = Context::build(doc);
    let mut queries = Vec::with_capacity(doc.queries.len());
    for (index, q) in doc.queries.iter().enumerate() {
        let budget = q.budget.unwrap_or(opts.default_budget);
        let start = Instant::now();
        let path = format!("queries[{index}]");
        let res = run_query(&ctx, &path, &q.body, budget, opts.replay);
        let wall_ms = start.elapsed().as_secs_f64() * 1000.0;
        let tag = matches!(q.body, QueryBody::PfCover { .. } | QueryBody::Prec { .. } | QueryBody::RX { .. }).then_some("pf");
        let kind = q.body.kind();
        queries.push(match res {
            Ok(o) => QueryReport {
                index,
                kind,
                tag,
                verdict: o.verdict,
                certificate: o.certificate,
                witness: o.witness,
                budget,
                replayed: o.replayed,
                error: None,
                wall_ms,
            },
            Err(e) => QueryReport {
                index,
                kind,
                tag,
                verdict: "error",
                certificate: None,
                witness: None,
                budget,
                replayed: None,
                error: Some(e.to_string()),
                wall_ms,
            },
        });
    }
    let exit_code = queries.iter().map(QueryReport::code).max().unwrap_or(0);
    Report { queries, exit_code }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(queries: Value) -> JobDocument {
        serde_json::from_value(json!({
            "spaces": {
                "Q": { "kind": "rational_line" },
                "R2": { "kind": "rational_box", "dim": 2, "metric": "euclid" }
            },
            "metrics": { "e": { "space": "R2", "generators": ["euclid"] } },
            "queries": queries
        }))
        .unwrap()
    }

    #[test]
    fn runs_the_standard_queries() {
        let d = doc(json!([
            { "kind": "interval-cover", "target": ["0", "1"], "u": [["-1/2", "3/5"], ["2/5", "3/2"]] },
            { "kind": "ball-cover", "space": "R2", "budget": 12,
              "a": { "center": ["0", "0"], "radius": "3", "metric": "e" },
              "u": [{ "center": ["-4", "0"], "radius": 5, "metric": "e" }, { "center": ["4", "0"], "radius": "5", "metric": "e" }] },
            { "kind": "dist", "space": "Q", "p": { "sqrt": 2 }, "q": { "element": "7/5" }, "n": 20 }
        ]));
        assert!(validate(&d).is_empty());
        let r = run(&d, &RunOptions { default_budget: 8, replay: true });
        assert_eq!(r.exit_code, 0, "{}", r.to_text());
        assert_eq!(r.queries[0].replayed, Some(true));
        assert_eq!(r.queries[1].replayed, Some(true));
        let table = r.queries[2].certificate.as_ref().unwrap()["table"].as_array().unwrap().clone();
        let approx: Vec<f64> = table.iter().map(|e| e["upper"]["approx"].as_f64().unwrap()).collect();
        assert!(approx.windows(2).all(|w| w[1] <= w[0]));
        // √2 - 7/5 = 0.0142135...
        assert!((approx[20] - 0.0142135).abs() < 1e-5, "{}", approx[20]);
    }

    #[test]
    fn diagnostics_carry_paths() {
        let d = doc(json!([
            { "kind": "ball-order", "space": "Q", "a": { "center": "0", "radius": "0" }, "b": { "center": "0", "radius": "1" } },
            { "kind": "ball-subset", "space": "R2", "a": { "center": ["0", "0"], "radius": "1", "metric": "nope" },
              "b": { "center": ["0", "0"], "radius": "1" } },
            { "kind": "prec", "space": "Z", "a": { "center": "0", "radius": "1" }, "b": { "center": "0", "radius": "1" } }
        ]));
        let diags = validate(&d);
        assert_eq!(diags.len(), 3, "{diags:?}");
        assert_eq!(diags[0].path, "queries[0].a.radius");
        assert_eq!(diags[0].message, "radius must be positive");
        assert_eq!(diags[1].path, "queries[1].a.metric");
        assert_eq!(diags[2].path, "queries[2].space");
        let r = run(&d, &RunOptions::default());
        assert_eq!(r.exit_code, 3);
        assert!(r.queries.iter().all(|q| q.verdict == "error"));
    }

    #[test]
    fn exit_code_is_the_worst_verdict() {
        let d = doc(json!([
            { "kind": "ball-order", "space": "Q", "a": { "center": "0", "radius": "1" }, "b": { "center": "0", "radius": "2" } },
            { "kind": "ball-order", "space": "Q", "a": { "center": "0", "radius": "2" }, "b": { "center": "0", "radius": "1" } }
        ]));
        assert_eq!(run(&d, &RunOptions::default()).exit_code, 1);
        let d = doc(json!([
            { "kind": "pf-cover", "space": "Q", "a": { "center": "0", "radius": "1" }, "u": [{ "center": "0", "radius": "2" }] }
        ]));
        let r = run(&d, &RunOptions::default());
        assert_eq!((r.exit_code, r.queries[0].tag), (0, Some("pf")));
    }

    #[test]
    fn reports_are_deterministic() {
        let d = doc(json!([
            { "kind": "subcover", "space": "Q", "u": [{ "center": "0", "radius": "1" }] },
            { "kind": "member", "space": "Q", "point": { "sqrt": 2 }, "ball": { "center": "3/2", "radius": "1/10" } }
        ]));
        let a = serde_json::to_string(&run(&d, &RunOptions::default()).without_timing()).unwrap();
        let b = serde_json::to_string(&run(&d, &RunOptions::default()).without_timing()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parse_errors_are_located() {
        let e = parse_job("{\n  \"queries\": [\n    { \"kind\": \"nope\" }\n  ]\n}").unwrap_err();
        assert!(matches!(e, JobError::Parse { line: 3, .. }), "{e}");
    }
}
