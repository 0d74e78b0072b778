//! Generalised metric and uniform spaces over exact rational data: metric
//! families given by generators, formal balls and their orders.

mod geometry;
mod spaces;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::numeric::{format_rational, parse_rational, serde_rational, sqrt_bounds, sqrt_exact, Bound, DedekindReal, Rational, UpperReal};
use crate::verdict::Verdict;

pub use geometry::{replay_cells, Cell, CellProof, End, Inside, Iv, Region, RegionOracle};
pub use spaces::{
    check_homomorphism, gus_countable_truncation, gus_product, make_space, product_generator, product_join, product_split, BoxMetric, HomWitness, Polynomial, SpaceKind,
};

/// Carrier point: a rational, a tuple, or an opaque label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Num(Rational),
    Tuple(Vec<Point>),
    Label(String),
}

impl Point {
    pub fn num(q: Rational) -> Self {
        Point::Num(q)
    }

    /// `ℚⁿ` point; a single coordinate is a plain number.
    pub fn from_coords(c: Vec<Rational>) -> Self {
        if c.len() == 1 {
            Point::Num(c.into_iter().next().unwrap())
        } else {
            Point::Tuple(c.into_iter().map(Point::Num).collect())
        }
    }

    /// Flattened numeric coordinates; labels contribute none.
    pub fn coords(&self) -> Vec<Rational> {
        match self {
            Point::Num(q) => vec![q.clone()],
            Point::Tuple(v) => v.iter().flat_map(|p| p.coords()).collect(),
            Point::Label(_) => vec![],
        }
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Point::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn component(&self, i: usize) -> Option<&Point> {
        match self {
            Point::Tuple(v) => v.get(i),
            _ => None,
        }
    }

    fn from_json(v: &serde_json::Value) -> Result<Point, String> {
        match v {
            serde_json::Value::Number(n) => parse_rational(&n.to_string()).map(Point::Num).map_err(|e| e.to_string()),
            serde_json::Value::String(s) => Ok(parse_rational(s).map(Point::Num).unwrap_or_else(|_| Point::Label(s.clone()))),
            serde_json::Value::Array(a) => a.iter().map(Point::from_json).collect::<Result<_, _>>().map(Point::Tuple),
            other => Err(format!("not a point: {other}")),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Num(q) => write!(f, "{}", format_rational(q)),
            Point::Label(s) => write!(f, "{s}"),
            Point::Tuple(v) => {
                write!(f, "(")?;
                for (i, p) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Point::Num(q) => s.serialize_str(&format_rational(q)),
            Point::Label(l) => s.serialize_str(l),
            Point::Tuple(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Point::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// One piece of a distance value; a distance is the sup of its atoms.
#[derive(Clone, Debug)]
pub enum Atom {
    Exact(Rational),
    /// `√s`, `s ≥ 0`.
    Root(Rational),
    Infinite,
    Real(DedekindReal),
    /// Upper-only value: comparisons can prove `<` but never refute it.
    Upper(UpperReal),
}

impl Atom {
    pub fn root(s: Rational) -> Atom {
        match sqrt_exact(&s) {
            Some(q) => Atom::Exact(q),
            None => Atom::Root(s),
        }
    }

    fn bounds(&self, n: u32) -> (Bound, Bound) {
        match self {
            Atom::Exact(q) => (Bound::Finite(q.clone()), Bound::Finite(q.clone())),
            Atom::Root(s) => {
                let (lo, hi) = sqrt_bounds(s, n);
                (Bound::Finite(lo), Bound::Finite(hi))
            }
            Atom::Infinite => (Bound::Infinite, Bound::Infinite),
            Atom::Real(r) => (Bound::Finite(r.lower(n).unwrap_or_else(Rational::zero)), r.upper(n)),
            Atom::Upper(u) => (Bound::Finite(Rational::zero()), u.query(n)),
        }
    }

    fn two_sided(&self) -> bool {
        !matches!(self, Atom::Upper(_))
    }

    /// `self < r` (strict) or `self ≤ r`.
    fn cmp_below(&self, r: &Rational, strict: bool, budget: u32) -> Verdict<(), ()> {
        let decide = |b: bool| if b { Verdict::Proved(()) } else { Verdict::Refuted(()) };
        match self {
            Atom::Exact(q) => decide(if strict { q < r } else { q <= r }),
            Atom::Root(s) => {
                if r.is_negative() || (strict && r.is_zero()) {
                    return Verdict::Refuted(());
                }
                let r2 = r * r;
                decide(if strict { *s < r2 } else { *s <= r2 })
            }
            Atom::Infinite => Verdict::Refuted(()),
            _ => {
                for n in 0..=budget {
                    let (lo, hi) = self.bounds(n);
                    let proved = match &hi {
                        Bound::Finite(h) => {
                            if strict {
                                h < r
                            } else {
                                h <= r
                            }
                        }
                        Bound::Infinite => false,
                    };
                    if proved {
                        return Verdict::Proved(());
                    }
                    if self.two_sided() {
                        let refuted = match &lo {
                            Bound::Finite(l) => {
                                if strict {
                                    l >= r
                                } else {
                                    l > r
                                }
                            }
                            Bound::Infinite => true,
                        };
                        if refuted {
                            return Verdict::Refuted(());
                        }
                    }
                }
                Verdict::Unknown { budget }
            }
        }
    }
}

/// A distance value `sup atoms`.
#[derive(Clone, Debug)]
pub struct Distance {
    pub atoms: Vec<Atom>,
}

impl Distance {
    pub fn exact(q: Rational) -> Self {
        Distance { atoms: vec![Atom::Exact(q)] }
    }

    pub fn sup(mut self, other: Distance) -> Distance {
        self.atoms.extend(other.atoms);
        self
    }

    pub fn lower(&self, n: u32) -> Bound {
        self.atoms.iter().map(|a| a.bounds(n).0).max().unwrap_or(Bound::Finite(Rational::zero()))
    }

    pub fn upper(&self, n: u32) -> Bound {
        self.atoms.iter().map(|a| a.bounds(n).1).max().unwrap_or(Bound::Finite(Rational::zero()))
    }

    pub fn two_sided(&self) -> bool {
        self.atoms.iter().all(|a| a.two_sided())
    }

    /// Exact value when every atom is exact.
    pub fn exact_value(&self) -> Option<Bound> {
        let mut best = Bound::Finite(Rational::zero());
        for a in &self.atoms {
            let v = match a {
                Atom::Exact(q) => Bound::Finite(q.clone()),
                Atom::Infinite => Bound::Infinite,
                _ => return None,
            };
            best = best.max(v);
        }
        Some(best)
    }

    /// `d < r`.
    pub fn lt(&self, r: &Rational, budget: u32) -> Verdict<(), ()> {
        crate::verdict::all_of(self.atoms.iter().map(|a| a.cmp_below(r, true, budget)), budget)
    }

    /// `d ≤ r`.
    pub fn le(&self, r: &Rational, budget: u32) -> Verdict<(), ()> {
        crate::verdict::all_of(self.atoms.iter().map(|a| a.cmp_below(r, false, budget)), budget)
    }

    /// `self ≤ other` pointwise value comparison.
    pub fn le_dist(&self, other: &Distance, budget: u32) -> Verdict<(), ()> {
        if let (Some(a), Some(b)) = (self.exact_value(), other.exact_value()) {
            return if a <= b { Verdict::Proved(()) } else { Verdict::Refuted(()) };
        }
        if let Some(Bound::Finite(b)) = other.exact_value() {
            return self.le(&b, budget);
        }
        for n in 0..=budget {
            if self.upper(n) <= other.lower(n) {
                return Verdict::Proved(());
            }
            if self.two_sided() && other.two_sided() && self.lower(n) > other.upper(n) {
                return Verdict::Refuted(());
            }
        }
        Verdict::Unknown { budget }
    }
}

/// Evaluated distance at a precision: `lo ≤ d ≤ hi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricValue {
    pub lo: Bound,
    pub hi: Bound,
    pub two_sided: bool,
}

/// How a generator's balls look in `ℚⁿ`, when they are regions the oracle understands.
#[derive(Clone, Debug, PartialEq)]
pub enum GenGeom {
    /// `max_{k∈S} |x_k - y_k|`.
    CoordMax(BTreeSet<usize>),
    /// Euclidean norm over all coordinates.
    Euclid,
}

type EvalFn = Arc<dyn Fn(&Point, &Point) -> Atom + Send + Sync>;

#[derive(Clone)]
pub struct GeneratorMetric {
    pub id: String,
    pub symmetric: bool,
    pub finite: bool,
    pub dedekind: bool,
    eval: EvalFn,
    pub geometry: Option<GenGeom>,
}

impl fmt::Debug for GeneratorMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneratorMetric({})", self.id)
    }
}

impl GeneratorMetric {
    pub fn new(id: &str, eval: impl Fn(&Point, &Point) -> Atom + Send + Sync + 'static) -> Self {
        GeneratorMetric {
            id: id.to_string(),
            symmetric: true,
            finite: true,
            dedekind: true,
            eval: Arc::new(eval),
            geometry: None,
        }
    }

    pub fn with_geometry(mut self, g: GenGeom) -> Self {
        self.geometry = Some(g);
        self
    }

    pub fn with_flags(mut self, symmetric: bool, finite: bool, dedekind: bool) -> Self {
        self.symmetric = symmetric;
        self.finite = finite;
        self.dedekind = dedekind;
        self
    }

    pub fn eval(&self, x: &Point, y: &Point) -> Atom {
        (self.eval)(x, y)
    }
}

/// Inhabited finite set of generator ids; denotes the pointwise sup.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct MetricId(BTreeSet<String>);

impl MetricId {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(ids: I) -> Result<Self, GusError> {
        let s: BTreeSet<String> = ids.into_iter().map(Into::into).collect();
        if s.is_empty() {
            Err(GusError::EmptyMetricId)
        } else {
            Ok(MetricId(s))
        }
    }

    pub fn single(id: &str) -> Self {
        MetricId([id.to_string()].into())
    }

    pub fn generators(&self) -> &BTreeSet<String> {
        &self.0
    }

    /// `self ≤ other` as decided by generator inclusion.
    pub fn below(&self, other: &MetricId) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &MetricId) -> MetricId {
        MetricId(self.0.union(&other.0).cloned().collect())
    }
}

impl TryFrom<Vec<String>> for MetricId {
    type Error = GusError;
    fn try_from(v: Vec<String>) -> Result<Self, GusError> {
        MetricId::new(v)
    }
}

impl From<MetricId> for Vec<String> {
    fn from(m: MetricId) -> Vec<String> {
        m.0.into_iter().collect()
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().cloned().collect::<Vec<_>>().join(","))
    }
}

/// `b_d(x, ε)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FormalBall {
    pub metric: MetricId,
    pub center: Point,
    #[serde(with = "serde_rational")]
    pub radius: Rational,
}

impl FormalBall {
    pub fn new(metric: MetricId, center: Point, radius: Rational) -> Result<Self, GusError> {
        if !radius.is_positive() {
            return Err(GusError::NonPositiveRadius);
        }
        Ok(FormalBall { metric, center, radius })
    }

    pub fn with_radius(&self, r: Rational) -> FormalBall {
        FormalBall { metric: self.metric.clone(), center: self.center.clone(), radius: r }
    }
}

impl fmt::Display for FormalBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b_{}({}, {})", self.metric, self.center, format_rational(&self.radius))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GusError {
    #[error("unknown metric generator {0:?}")]
    UnknownMetric(String),
    #[error("metric id must be inhabited")]
    EmptyMetricId,
    #[error("radius must be positive")]
    NonPositiveRadius,
    #[error("space is not totally bounded for this metric")]
    NotTotallyBounded,
    #[error("invalid metric table: {0}")]
    InvalidMetricTable(String),
    #[error("space has no spatial oracle")]
    OracleMissing,
    #[error("invalid space parameters: {0}")]
    InvalidParams(String),
}

/// Sets of carrier points.
#[derive(Clone)]
pub enum Carrier {
    /// `ℚⁿ ∩ Π spans`.
    Box(Vec<Span>),
    Finite(Vec<Point>),
    Opaque {
        sampler: Arc<dyn Fn(u32) -> Vec<Point> + Send + Sync>,
        member: Arc<dyn Fn(&Point) -> bool + Send + Sync>,
    },
}

/// Closed bounds of a coordinate, `None` for unbounded.
#[derive(Clone, Debug, PartialEq)]
pub struct Span {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

impl Span {
    pub fn unbounded() -> Self {
        Span { lo: None, hi: None }
    }

    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Span { lo: Some(lo), hi: Some(hi) }
    }
}

/// Geometric judgments about ball extents.
pub trait SpatialOracle: Send + Sync {
    /// Whether judgments are exact (never Unknown on supported balls).
    fn exact(&self) -> bool;
    /// `a_* ⊆ b_*`; refutes with a point of `a_*` outside `b_*`.
    fn ball_subset(&self, g: &Gus, a: &FormalBall, b: &FormalBall, budget: u32) -> Verdict<(), Point>;
    /// `a_* ≬ b_*`; proves with a common point.
    fn ball_meets(&self, g: &Gus, a: &FormalBall, b: &FormalBall, budget: u32) -> Verdict<Point, ()>;
    fn eps_net(&self, g: &Gus, m: &MetricId, eps: &Rational) -> Result<Vec<Point>, GusError>;
    /// `a_* ⊆ ⋃ U_*` with a replayable cell proof, or an uncovered point.
    fn cover_inclusion(&self, g: &Gus, a: &FormalBall, u: &[FormalBall], budget: u32) -> Verdict<CellProof, Point>;
    fn replay_inclusion(&self, g: &Gus, a: &FormalBall, u: &[FormalBall], proof: &CellProof) -> Result<(), String>;

    fn uncovered_point(&self, g: &Gus, a: &FormalBall, u: &[FormalBall], budget: u32) -> Option<Point> {
        self.cover_inclusion(g, a, u, budget).refuted()
    }
}

/// A generalised uniform space.
#[derive(Clone)]
pub struct Gus {
    pub name: String,
    carrier: Carrier,
    generators: Vec<GeneratorMetric>,
    oracle: Option<Arc<dyn SpatialOracle>>,
}

impl fmt::Debug for Gus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gus")
            .field("name", &self.name)
            .field("generators", &self.generators.iter().map(|g| &g.id).collect::<Vec<_>>())
            .field("oracle", &self.oracle.is_some())
            .finish()
    }
}

impl Gus {
    pub fn new(name: &str, carrier: Carrier, generators: Vec<GeneratorMetric>) -> Result<Self, GusError> {
        if generators.is_empty() {
            return Err(GusError::InvalidParams("metric family must be inhabited".into()));
        }
        Ok(Gus { name: name.to_string(), carrier, generators, oracle: None })
    }

    pub fn with_oracle(mut self, o: Arc<dyn SpatialOracle>) -> Self {
        self.oracle = Some(o);
        self
    }

    pub fn without_oracle(mut self) -> Self {
        self.oracle = None;
        self
    }

    pub fn oracle(&self) -> Option<&Arc<dyn SpatialOracle>> {
        self.oracle.as_ref()
    }

    pub fn require_oracle(&self) -> Result<&Arc<dyn SpatialOracle>, GusError> {
        self.oracle.as_ref().ok_or(GusError::OracleMissing)
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn generators(&self) -> &[GeneratorMetric] {
        &self.generators
    }

    pub fn generator(&self, id: &str) -> Result<&GeneratorMetric, GusError> {
        self.generators.iter().find(|g| g.id == id).ok_or_else(|| GusError::UnknownMetric(id.to_string()))
    }

    /// The metric made of every generator.
    pub fn full_metric(&self) -> MetricId {
        MetricId(self.generators.iter().map(|g| g.id.clone()).collect())
    }

    /// Inhabited generator subsets, singletons first.
    pub fn metric_ids(&self) -> Vec<MetricId> {
        let ids: Vec<&String> = self.generators.iter().map(|g| &g.id).collect();
        let mut out: Vec<MetricId> = Vec::new();
        for m in 1u32..(1u32 << ids.len().min(8)) {
            let s: BTreeSet<String> = ids.iter().enumerate().filter(|(k, _)| m & (1 << k) != 0).map(|(_, x)| (*x).clone()).collect();
            out.push(MetricId(s));
        }
        out.sort_by_key(|m| m.0.len());
        out
    }

    pub fn check_metric(&self, m: &MetricId) -> Result<(), GusError> {
        m.0.iter().try_for_each(|id| self.generator(id).map(|_| ()))
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        match &self.carrier {
            Carrier::Box(spans) => {
                let c = p.coords();
                c.len() == spans.len()
                    && matches!(p, Point::Num(_) | Point::Tuple(_))
                    && c.iter().zip(spans).all(|(x, s)| {
                        s.lo.as_ref().is_none_or(|l| x >= l) && s.hi.as_ref().is_none_or(|h| x <= h)
                    })
            }
            Carrier::Finite(v) => v.contains(p),
            Carrier::Opaque { member, .. } => member(p),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.carrier {
            Carrier::Box(s) => Some(s.len()),
            _ => None,
        }
    }

    /// Deterministic carrier sample; grows with `n`.
    pub fn sample(&self, n: u32) -> Vec<Point> {
        match &self.carrier {
            Carrier::Finite(v) => v.clone(),
            Carrier::Opaque { sampler, .. } => sampler(n),
            Carrier::Box(spans) => {
                let per_axis: Vec<Vec<Rational>> = spans.iter().map(|s| axis_sample(s, n, spans.len())).collect();
                let mut pts: Vec<Vec<Rational>> = vec![vec![]];
                for vals in per_axis {
                    pts = pts
                        .into_iter()
                        .flat_map(|p| {
                            vals.iter().map(move |v| {
                                let mut q = p.clone();
                                q.push(v.clone());
                                q
                            })
                        })
                        .collect();
                }
                pts.into_iter().map(Point::from_coords).collect()
            }
        }
    }

    /// `d(x, y)` for the metric `m`.
    pub fn dist(&self, m: &MetricId, x: &Point, y: &Point) -> Result<Distance, GusError> {
        let mut atoms = Vec::with_capacity(m.0.len());
        for id in &m.0 {
            atoms.push(self.generator(id)?.eval(x, y));
        }
        Ok(Distance { atoms })
    }

    pub fn is_symmetric(&self, m: &MetricId) -> bool {
        m.0.iter().all(|id| self.generator(id).map(|g| g.symmetric).unwrap_or(false))
    }
}

fn axis_sample(s: &Span, n: u32, dims: usize) -> Vec<Rational> {
    let count: i64 = match dims {
        1 => 4 * (n as i64 + 2),
        2 => 2 * (n as i64 + 2),
        _ => 3,
    }
    .min(64);
    let (lo, hi) = match (&s.lo, &s.hi) {
        (Some(l), Some(h)) => (l.clone(), h.clone()),
        (Some(l), None) => (l.clone(), l + Rational::from_integer((n as i64 + 2).into())),
        (None, Some(h)) => (h - Rational::from_integer((n as i64 + 2).into()), h.clone()),
        (None, None) => {
            let w = Rational::from_integer((n as i64 / 2 + 2).into());
            (-w.clone(), w)
        }
    };
    (0..=count).map(|k| &lo + (&hi - &lo) * Rational::new(k.into(), count.into())).collect()
}

/// `metric_eval`: sup of generator evaluations at precision `n`.
pub fn metric_eval(g: &Gus, m: &MetricId, x: &Point, y: &Point, n: u32) -> Result<MetricValue, GusError> {
    let d = g.dist(m, x, y)?;
    Ok(MetricValue { lo: d.lower(n), hi: d.upper(n), two_sided: d.two_sided() })
}

/// Evidence for `a ≤_X b` (or `<_X`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderCertificate {
    /// Precision index at which the numeric inequality was settled.
    pub precision: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum OrderFailure {
    /// `ρ ≤ d` not established by generator inclusion.
    MetricOrder,
    /// `ρ(x,y) + δ` exceeds the bound.
    Radius,
}

/// `a ≤_X b` (`strict`: `a <_X b`), for `a = b_d(y,δ)`, `b = b_ρ(x,ε)`:
/// `ρ ≤ d ∧ ρ(x,y) + δ ≤ ε`.
pub fn ball_order(g: &Gus, a: &FormalBall, b: &FormalBall, strict: bool, budget: u32) -> Verdict<OrderCertificate, OrderFailure> {
    if !b.metric.below(&a.metric) {
        return Verdict::Refuted(OrderFailure::MetricOrder);
    }
    let Ok(d) = g.dist(&b.metric, &b.center, &a.center) else {
        return Verdict::Unknown { budget };
    };
    let slack = &b.radius - &a.radius;
    let v = if strict { d.lt(&slack, budget) } else { d.le(&slack, budget) };
    v.map(|_| OrderCertificate { precision: budget }, |_| OrderFailure::Radius)
}

/// `x ∈ B_d(c, r)`, i.e. `d(c, x) < r`.
pub fn ball_contains(g: &Gus, a: &FormalBall, x: &Point, budget: u32) -> Verdict<(), ()> {
    match g.dist(&a.metric, &a.center, x) {
        Ok(d) => d.lt(&a.radius, budget),
        Err(_) => Verdict::Unknown { budget },
    }
}

/// A ball strictly between `a <_X b`: `b` shrunk at its own center by half
/// the rational slack.
pub fn interpolate(g: &Gus, a: &FormalBall, b: &FormalBall, budget: u32) -> Option<FormalBall> {
    if !b.metric.below(&a.metric) {
        return None;
    }
    let d = g.dist(&b.metric, &b.center, &a.center).ok()?;
    for n in 0..=budget.max(8) {
        if let Bound::Finite(hi) = d.upper(n) {
            let gap = &b.radius - &hi - &a.radius;
            if gap.is_positive() {
                return Some(b.with_radius(&b.radius - gap / Rational::from_integer(2.into())));
            }
        }
    }
    None
}

pub fn eps_net(g: &Gus, m: &MetricId, eps: &Rational) -> Result<Vec<Point>, GusError> {
    g.check_metric(m)?;
    if !eps.is_positive() {
        return Err(GusError::NonPositiveRadius);
    }
    g.require_oracle()?.eps_net(g, m, eps)
}

pub fn ball_subset(g: &Gus, a: &FormalBall, b: &FormalBall, budget: u32) -> Result<Verdict<(), Point>, GusError> {
    Ok(g.require_oracle()?.ball_subset(g, a, b, budget))
}

pub fn ball_meets(g: &Gus, a: &FormalBall, b: &FormalBall, budget: u32) -> Result<Verdict<Point, ()>, GusError> {
    Ok(g.require_oracle()?.ball_meets(g, a, b, budget))
}
