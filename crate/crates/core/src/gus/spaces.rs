//! Named spaces, products and homomorphism checks.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{Atom, Carrier, GenGeom, GeneratorMetric, Gus, GusError, MetricId, Point, RegionOracle, Span};
use crate::numeric::{int, serde_rational, Rational};
use crate::verdict::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxMetric {
    Sup,
    Euclid,
    Both,
}

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial(#[serde(with = "serde_rational_vec")] pub Vec<Rational>);

impl Polynomial {
    pub fn eval(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }
}

mod serde_rational_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct W<'a>(#[serde(with = "serde_rational")] &'a Rational);
        s.collect_seq(v.iter().map(W))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "serde_rational")] Rational);
        Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

/// Space descriptions accepted by [`make_space`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    RationalLine,
    UnitInterval,
    RationalBox {
        dim: usize,
        metric: BoxMetric,
        #[serde(default, with = "serde_bounds")]
        bounds: Option<(Rational, Rational)>,
    },
    /// Finite carrier with a distance table; `null` entries are infinite.
    FiniteDiscrete {
        points: Vec<String>,
        table: Vec<Vec<Option<String>>>,
    },
    /// `d(x,y) = 0` if `x ≤ y`, else `1`.
    Poset {
        elements: Vec<String>,
        order: Vec<(String, String)>,
    },
    /// `ℚ` with `|f(x) - f(y)|`; no spatial oracle.
    FunctionSeminorm {
        f: Polynomial,
    },
}

mod serde_bounds {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &Option<(Rational, Rational)>, s: S) -> Result<S::Ok, S::Error> {
        match b {
            None => s.serialize_none(),
            Some((lo, hi)) => s.collect_seq([crate::numeric::format_rational(lo), crate::numeric::format_rational(hi)]),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<(Rational, Rational)>, D::Error> {
        let v: Option<(String, String)> = Option::deserialize(d)?;
        v.map(|(a, b)| {
            let p = |s: &str| crate::numeric::parse_rational(s).map_err(serde::de::Error::custom);
            Ok((p(&a)?, p(&b)?))
        })
        .transpose()
    }
}

fn abs_diff(x: &Point, y: &Point) -> Atom {
    match (x.as_num(), y.as_num()) {
        (Some(a), Some(b)) => Atom::Exact((a - b).abs()),
        _ => Atom::Infinite,
    }
}

fn coord_max(ks: BTreeSet<usize>) -> impl Fn(&Point, &Point) -> Atom + Send + Sync {
    move |x, y| {
        let (a, b) = (x.coords(), y.coords());
        let m = ks
            .iter()
            .filter_map(|&k| Some((a.get(k)? - b.get(k)?).abs()))
            .max()
            .unwrap_or_else(Rational::zero);
        Atom::Exact(m)
    }
}

fn euclid(x: &Point, y: &Point) -> Atom {
    let (a, b) = (x.coords(), y.coords());
    Atom::root(a.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).fold(Rational::zero(), |s, t| s + t))
}

pub fn make_space(kind: &SpaceKind) -> Result<Gus, GusError> {
    let oracle = Arc::new(RegionOracle);
    match kind {
        SpaceKind::RationalLine | SpaceKind::UnitInterval => {
            let (name, span) = if matches!(kind, SpaceKind::RationalLine) {
                ("Q", Span::unbounded())
            } else {
                ("[0,1]", Span::closed(int(0), int(1)))
            };
            let d = GeneratorMetric::new("d", abs_diff).with_geometry(GenGeom::CoordMax([0].into()));
            Ok(Gus::new(name, Carrier::Box(vec![span]), vec![d])?.with_oracle(oracle))
        }
        SpaceKind::RationalBox { dim, metric, bounds } => {
            if *dim == 0 {
                return Err(GusError::InvalidParams("dimension must be positive".into()));
            }
            if let Some((lo, hi)) = bounds {
                if lo >= hi {
                    return Err(GusError::InvalidParams("empty bounds".into()));
                }
            }
            let all: BTreeSet<usize> = (0..*dim).collect();
            let mut gens = Vec::new();
            if matches!(metric, BoxMetric::Sup | BoxMetric::Both) {
                gens.push(GeneratorMetric::new("sup", coord_max(all.clone())).with_geometry(GenGeom::CoordMax(all)));
            }
            if matches!(metric, BoxMetric::Euclid | BoxMetric::Both) {
                gens.push(GeneratorMetric::new("euclid", euclid).with_geometry(GenGeom::Euclid));
            }
            let span = match bounds {
                Some((lo, hi)) => Span::closed(lo.clone(), hi.clone()),
                None => Span::unbounded(),
            };
            Ok(Gus::new(&format!("Q^{dim}"), Carrier::Box(vec![span; *dim]), gens)?.with_oracle(oracle))
        }
        SpaceKind::FiniteDiscrete { points, table } => finite_table(points, table).map(|g| g.with_oracle(oracle)),
        SpaceKind::Poset { elements, order } => {
            let mut le: BTreeSet<(String, String)> = order.iter().cloned().collect();
            for e in elements {
                le.insert((e.clone(), e.clone()));
            }
            for (a, b) in order {
                if !elements.contains(a) || !elements.contains(b) {
                    return Err(GusError::InvalidParams(format!("unknown element in {a} <= {b}")));
                }
            }
            // transitive closure
            loop {
                let extra: Vec<(String, String)> = le
                    .iter()
                    .flat_map(|(a, b)| le.iter().filter(move |(c, _)| c == b).map(move |(_, d)| (a.clone(), d.clone())))
                    .filter(|p| !le.contains(p))
                    .collect();
                if extra.is_empty() {
                    break;
                }
                le.extend(extra);
            }
            let d = GeneratorMetric::new("d", move |x, y| match (x, y) {
                (Point::Label(a), Point::Label(b)) if le.contains(&(a.clone(), b.clone())) => Atom::Exact(int(0)),
                _ => Atom::Exact(int(1)),
            })
            .with_flags(false, true, true);
            let pts = elements.iter().cloned().map(Point::Label).collect();
            Ok(Gus::new("poset", Carrier::Finite(pts), vec![d])?.with_oracle(oracle))
        }
        SpaceKind::FunctionSeminorm { f } => {
            let f = f.clone();
            let d = GeneratorMetric::new("d_f", move |x, y| match (x.as_num(), y.as_num()) {
                (Some(a), Some(b)) => Atom::Exact((f.eval(a) - f.eval(b)).abs()),
                _ => Atom::Infinite,
            });
            Gus::new("Q_f", Carrier::Box(vec![Span::unbounded()]), vec![d])
        }
    }
}

fn finite_table(points: &[String], table: &[Vec<Option<String>>]) -> Result<Gus, GusError> {
    let n = points.len();
    if n == 0 || table.len() != n || table.iter().any(|r| r.len() != n) {
        return Err(GusError::InvalidMetricTable("table must be square over the points".into()));
    }
    let mut t: Vec<Vec<Option<Rational>>> = Vec::with_capacity(n);
    for row in table {
        let mut r = Vec::with_capacity(n);
        for e in row {
            r.push(match e {
                None => None,
                Some(s) => {
                    let q = crate::numeric::parse_rational(s).map_err(|e| GusError::InvalidMetricTable(e.to_string()))?;
                    if q.is_negative() {
                        return Err(GusError::InvalidMetricTable(format!("negative distance {s}")));
                    }
                    Some(q)
                }
            });
        }
        t.push(r);
    }
    let add = |a: &Option<Rational>, b: &Option<Rational>| match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    };
    let le = |a: &Option<Rational>, b: &Option<Rational>| match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y,
    };
    for i in 0..n {
        if t[i][i] != Some(Rational::zero()) {
            return Err(GusError::InvalidMetricTable(format!("d({0},{0}) must be 0", points[i])));
        }
        for j in 0..n {
            for k in 0..n {
                if !le(&t[i][k], &add(&t[i][j], &t[j][k])) {
                    return Err(GusError::InvalidMetricTable(format!(
                        "triangle inequality fails at {},{},{}",
                        points[i], points[j], points[k]
                    )));
                }
            }
        }
    }
    let symmetric = (0..n).all(|i| (0..n).all(|j| t[i][j] == t[j][i]));
    let finite = t.iter().flatten().all(Option::is_some);
    let names = points.to_vec();
    let d = GeneratorMetric::new("d", move |x, y| {
        let pos = |p: &Point| match p {
            Point::Label(s) => names.iter().position(|n| n == s),
            _ => None,
        };
        match (pos(x), pos(y)) {
            (Some(i), Some(j)) => t[i][j].clone().map(Atom::Exact).unwrap_or(Atom::Infinite),
            _ => Atom::Infinite,
        }
    })
    .with_flags(symmetric, finite, true);
    Gus::new("finite", Carrier::Finite(points.iter().cloned().map(Point::Label).collect()), vec![d])
}

fn split_pair(p: &Point, dx: Option<usize>) -> Option<(Point, Point)> {
    match dx {
        Some(n) => {
            let c = p.coords();
            if c.len() < n {
                return None;
            }
            let (a, b) = c.split_at(n);
            Some((Point::from_coords(a.to_vec()), Point::from_coords(b.to_vec())))
        }
        None => match p {
            Point::Tuple(v) if v.len() == 2 => Some((v[0].clone(), v[1].clone())),
            _ => None,
        },
    }
}

fn box_dims(x: &Gus, y: &Gus) -> Option<usize> {
    match (x.carrier(), y.carrier()) {
        (Carrier::Box(a), Carrier::Box(_)) => Some(a.len()),
        _ => None,
    }
}

/// Components of a point of [`gus_product`]`(x, y)`.
pub fn product_split(x: &Gus, y: &Gus, p: &Point) -> Option<(Point, Point)> {
    split_pair(p, box_dims(x, y))
}

/// The point of [`gus_product`]`(x, y)` with the given components.
pub fn product_join(x: &Gus, y: &Gus, p: &Point, q: &Point) -> Point {
    match box_dims(x, y) {
        Some(_) => Point::from_coords(p.coords().into_iter().chain(q.coords()).collect()),
        None => Point::Tuple(vec![p.clone(), q.clone()]),
    }
}

/// Name of the product generator built from `g` and `h`.
pub fn product_generator(g: &str, h: &str) -> String {
    format!("({g},{h})")
}

/// `X × Y` with generators `(d, ρ)` evaluating to `max(d, ρ)` on components.
pub fn gus_product(x: &Gus, y: &Gus) -> Result<Gus, GusError> {
    let boxes = match (x.carrier(), y.carrier()) {
        (Carrier::Box(a), Carrier::Box(b)) => Some((a.clone(), b.clone())),
        _ => None,
    };
    let dx = boxes.as_ref().map(|(a, _)| a.len());
    let mut gens = Vec::new();
    for g in x.generators() {
        for h in y.generators() {
            let (g2, h2) = (g.clone(), h.clone());
            let eval = move |p: &Point, q: &Point| match (split_pair(p, dx), split_pair(q, dx)) {
                (Some((p1, p2)), Some((q1, q2))) => {
                    let a = g2.eval(&p1, &q1);
                    let b = h2.eval(&p2, &q2);
                    match (a, b) {
                        (Atom::Exact(u), Atom::Exact(v)) => Atom::Exact(u.max(v)),
                        (Atom::Infinite, _) | (_, Atom::Infinite) => Atom::Infinite,
                        (u, v) => {
                            let (u, v) = (atom_real(u), atom_real(v));
                            let (u2, v2) = (u.clone(), v.clone());
                            Atom::Real(crate::numeric::DedekindReal::from_fns(
                                move |n| Some(u.lower(n)?.max(v.lower(n)?)),
                                move |n| u2.upper(n).max(v2.upper(n)),
                            ))
                        }
                    }
                }
                _ => Atom::Infinite,
            };
            let geometry = match (&g.geometry, &h.geometry, dx) {
                (Some(GenGeom::CoordMax(s)), Some(GenGeom::CoordMax(t)), Some(n)) => {
                    Some(GenGeom::CoordMax(s.iter().copied().chain(t.iter().map(|k| k + n)).collect()))
                }
                _ => None,
            };
            let mut m = GeneratorMetric::new(&product_generator(&g.id, &h.id), eval).with_flags(
                g.symmetric && h.symmetric,
                g.finite && h.finite,
                g.dedekind && h.dedekind,
            );
            m.geometry = geometry;
            gens.push(m);
        }
    }
    let all_geom = gens.iter().all(|g| g.geometry.is_some());
    let name = format!("{}x{}", x.name, y.name);
    let carrier = match boxes {
        Some((a, b)) => Carrier::Box(a.into_iter().chain(b).collect()),
        None => {
            let (x1, y1, x2, y2) = (x.clone(), y.clone(), x.clone(), y.clone());
            Carrier::Opaque {
                sampler: Arc::new(move |n| {
                    let (a, b) = (x1.sample(n), y1.sample(n));
                    a.iter().flat_map(|p| b.iter().map(move |q| Point::Tuple(vec![p.clone(), q.clone()]))).collect()
                }),
                member: Arc::new(move |p| match p {
                    Point::Tuple(v) if v.len() == 2 => x2.contains_point(&v[0]) && y2.contains_point(&v[1]),
                    _ => false,
                }),
            }
        }
    };
    let g = Gus::new(&name, carrier, gens)?;
    Ok(if all_geom { g.with_oracle(Arc::new(RegionOracle)) } else { g })
}

fn atom_real(a: Atom) -> crate::numeric::DedekindReal {
    use crate::numeric::DedekindReal;
    match a {
        Atom::Exact(q) => DedekindReal::from_rational(q),
        Atom::Root(s) => DedekindReal::sqrt(s),
        Atom::Real(r) => r,
        Atom::Upper(u) => DedekindReal::from_fns(|_| Some(Rational::zero()), move |n| u.query(n)),
        Atom::Infinite => DedekindReal::from_fns(|_| None, |_| crate::numeric::Bound::Infinite),
    }
}

/// `Π_{i<n} X_i × {φ_i}_{i≥n}`: points are full tuples whose tail is fixed
/// at the basepoint.
pub fn gus_countable_truncation(spaces: &[Gus], basepoint: &[Point], n: usize) -> Result<Gus, GusError> {
    if spaces.len() != basepoint.len() || n > spaces.len() {
        return Err(GusError::InvalidParams("truncation needs a basepoint per space and n <= count".into()));
    }
    let phi = Point::Tuple(basepoint.to_vec());
    if n == 0 {
        let z = GeneratorMetric::new("0", |_, _| Atom::Exact(int(0)));
        return Gus::new("trunc0", Carrier::Finite(vec![phi]), vec![z]);
    }
    let mut gens = Vec::new();
    for (i, s) in spaces.iter().enumerate().take(n) {
        for g in s.generators() {
            let g2 = g.clone();
            gens.push(
                GeneratorMetric::new(&format!("{i}:{}", g.id), move |p, q| match (p.component(i), q.component(i)) {
                    (Some(a), Some(b)) => g2.eval(a, b),
                    _ => Atom::Infinite,
                })
                .with_flags(g.symmetric, g.finite, g.dedekind),
            );
        }
    }
    let (sp1, sp2) = (spaces[..n].to_vec(), spaces[..n].to_vec());
    let (bp1, bp2) = (basepoint.to_vec(), basepoint.to_vec());
    let carrier = Carrier::Opaque {
        sampler: Arc::new(move |k| {
            let mut pts = vec![bp1.clone()];
            for (i, s) in sp1.iter().enumerate() {
                let vals = s.sample(k.min(1));
                pts = pts
                    .into_iter()
                    .flat_map(|p| {
                        vals.iter().take(5).map(move |v| {
                            let mut q = p.clone();
                            q[i] = v.clone();
                            q
                        })
                    })
                    .collect();
            }
            pts.into_iter().map(Point::Tuple).collect()
        }),
        member: Arc::new(move |p| match p {
            Point::Tuple(v) if v.len() == bp2.len() => {
                v.iter().enumerate().all(|(i, x)| if i < sp2.len() { sp2[i].contains_point(x) } else { x == &bp2[i] })
            }
            _ => false,
        }),
    };
    Gus::new(&format!("trunc{n}"), carrier, gens)
}

/// Assignment of a source metric to each target generator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomWitness {
    pub assignment: Vec<(String, MetricId)>,
    pub pairs_checked: usize,
}

/// Whether `f` is a homomorphism `X → Y` on sampled pairs: each target
/// generator `ρ` needs a source metric `d` with `ρ(fx, fy) ≤ d(x, y)`.
/// Refutes with a generator and pair that fail even for the largest metric.
pub fn check_homomorphism(
    x: &Gus,
    y: &Gus,
    f: &dyn Fn(&Point) -> Point,
    samples: u32,
    budget: u32,
) -> Verdict<HomWitness, (String, Point, Point)> {
    let pts = x.sample(samples);
    let images: Vec<Point> = pts.iter().map(f).collect();
    let pairs: Vec<(usize, usize)> = (0..pts.len()).flat_map(|i| (0..pts.len()).map(move |j| (i, j))).collect();
    let candidates = x.metric_ids();
    let full = x.full_metric();
    let mut assignment = Vec::new();
    let mut unknown = false;
    for rho in y.generators() {
        let rid = MetricId::single(&rho.id);
        let mut found = None;
        for d in &candidates {
            let ok = pairs.iter().all(|&(i, j)| {
                let (Ok(lhs), Ok(rhs)) = (y.dist(&rid, &images[i], &images[j]), x.dist(d, &pts[i], &pts[j])) else {
                    return false;
                };
                lhs.le_dist(&rhs, budget).is_proved()
            });
            if ok {
                found = Some(d.clone());
                break;
            }
        }
        match found {
            Some(d) => assignment.push((rho.id.clone(), d)),
            None => {
                for &(i, j) in &pairs {
                    let (Ok(lhs), Ok(rhs)) = (y.dist(&rid, &images[i], &images[j]), x.dist(&full, &pts[i], &pts[j])) else {
                        continue;
                    };
                    if lhs.le_dist(&rhs, budget).is_refuted() {
                        return Verdict::Refuted((rho.id.clone(), pts[i].clone(), pts[j].clone()));
                    }
                }
                unknown = true;
            }
        }
    }
    if unknown {
        Verdict::Unknown { budget }
    } else {
        Verdict::Proved(HomWitness { assignment, pairs_checked: pairs.len() })
    }
}
