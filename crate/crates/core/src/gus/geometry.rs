//! Exact region geometry for balls in `ℚⁿ` and finite carriers.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{ball_contains, Carrier, FormalBall, GenGeom, Gus, GusError, MetricId, Point, SpatialOracle};
use crate::numeric::{int, serde_rational, Rational};
use crate::verdict::Verdict;

/// Interval end; `v = None` is infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct End {
    pub v: Option<Rational>,
    pub closed: bool,
}

impl End {
    pub fn open(v: Rational) -> Self {
        End { v: Some(v), closed: false }
    }

    pub fn closed(v: Rational) -> Self {
        End { v: Some(v), closed: true }
    }

    pub fn inf() -> Self {
        End { v: None, closed: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Iv {
    pub lo: End,
    pub hi: End,
}

impl Iv {
    pub fn all() -> Self {
        Iv { lo: End::inf(), hi: End::inf() }
    }

    /// Closed interval `[lo, hi]`.
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Iv { lo: End::closed(lo), hi: End::closed(hi) }
    }

    pub fn point(v: Rational) -> Self {
        Iv { lo: End::closed(v.clone()), hi: End::closed(v) }
    }

    pub fn nonempty(&self) -> bool {
        match (&self.lo.v, &self.hi.v) {
            (Some(l), Some(h)) => l < h || (l == h && self.lo.closed && self.hi.closed),
            _ => true,
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let lo_ok = match &self.lo.v {
            None => true,
            Some(l) => x > l || (x == l && self.lo.closed),
        };
        let hi_ok = match &self.hi.v {
            None => true,
            Some(h) => x < h || (x == h && self.hi.closed),
        };
        lo_ok && hi_ok
    }

    pub fn intersect(&self, o: &Iv) -> Iv {
        let lo = match (&self.lo.v, &o.lo.v) {
            (None, _) => o.lo.clone(),
            (_, None) => self.lo.clone(),
            (Some(a), Some(b)) if a > b => self.lo.clone(),
            (Some(a), Some(b)) if a < b => o.lo.clone(),
            (Some(a), _) => End { v: Some(a.clone()), closed: self.lo.closed && o.lo.closed },
        };
        let hi = match (&self.hi.v, &o.hi.v) {
            (None, _) => o.hi.clone(),
            (_, None) => self.hi.clone(),
            (Some(a), Some(b)) if a < b => self.hi.clone(),
            (Some(a), Some(b)) if a > b => o.hi.clone(),
            (Some(a), _) => End { v: Some(a.clone()), closed: self.hi.closed && o.hi.closed },
        };
        Iv { lo, hi }
    }

    /// Inclusion, assuming `self` is nonempty.
    pub fn subset(&self, o: &Iv) -> bool {
        let lo_ok = match (&self.lo.v, &o.lo.v) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a > b || (a == b && (o.lo.closed || !self.lo.closed)),
        };
        let hi_ok = match (&self.hi.v, &o.hi.v) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a < b || (a == b && (o.hi.closed || !self.hi.closed)),
        };
        lo_ok && hi_ok
    }

    fn strictly_inside(&self, x: &Rational) -> bool {
        self.lo.v.as_ref().is_none_or(|l| l < x) && self.hi.v.as_ref().is_none_or(|h| x < h)
    }

    fn width(&self) -> Option<Rational> {
        match (&self.lo.v, &self.hi.v) {
            (Some(l), Some(h)) => Some(h - l),
            _ => None,
        }
    }

    fn bounded(&self) -> bool {
        self.lo.v.is_some() && self.hi.v.is_some()
    }

    fn mid(&self) -> Rational {
        match (&self.lo.v, &self.hi.v) {
            (Some(l), Some(h)) => (l + h) / int(2),
            (Some(l), None) => l + int(1),
            (None, Some(h)) => h - int(1),
            (None, None) => Rational::zero(),
        }
    }

    /// `(below, at, above)` around `x`.
    fn split(&self, x: &Rational) -> (Iv, Iv, Iv) {
        (
            Iv { lo: self.lo.clone(), hi: End::open(x.clone()) },
            Iv::point(x.clone()),
            Iv { lo: End::open(x.clone()), hi: self.hi.clone() },
        )
    }

    /// Closure endpoints (bounded intervals only).
    fn ends(&self) -> Vec<(Rational, bool)> {
        let (l, h) = (self.lo.v.clone().unwrap(), self.hi.v.clone().unwrap());
        if l == h {
            vec![(l, true)]
        } else {
            vec![(l, self.lo.closed), (h, self.hi.closed)]
        }
    }

    /// Candidate points, largest first.
    fn candidates(&self) -> Vec<Rational> {
        if let (Some(l), Some(h)) = (&self.lo.v, &self.hi.v) {
            if l == h {
                return vec![l.clone()];
            }
        }
        let mut v = vec![self.mid()];
        if self.hi.closed {
            v.push(self.hi.v.clone().unwrap());
        }
        if self.lo.closed {
            v.push(self.lo.v.clone().unwrap());
        }
        v
    }
}

/// Extent of a ball.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Box(Vec<Iv>),
    Disk { center: Vec<Rational>, radius: Rational },
    Points(Vec<Point>),
}

fn sq_dist(x: &[Rational], y: &[Rational]) -> Rational {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).fold(Rational::zero(), |s, t| s + t)
}

impl Region {
    pub fn contains(&self, x: &[Rational]) -> bool {
        match self {
            Region::Box(ivs) => ivs.len() == x.len() && ivs.iter().zip(x).all(|(iv, v)| iv.contains(v)),
            Region::Disk { center, radius } => sq_dist(center, x) < radius * radius,
            Region::Points(ps) => ps.iter().any(|p| p.coords() == x),
        }
    }

    pub fn bounding(&self) -> Vec<Iv> {
        match self {
            Region::Box(ivs) => ivs.clone(),
            Region::Disk { center, radius } => {
                center.iter().map(|c| Iv { lo: End::open(c - radius), hi: End::open(c + radius) }).collect()
            }
            Region::Points(_) => vec![],
        }
    }
}

fn box_nonempty(b: &[Iv]) -> bool {
    b.iter().all(Iv::nonempty)
}

fn box_meet(a: &[Iv], b: &[Iv]) -> Vec<Iv> {
    a.iter().zip(b).map(|(x, y)| x.intersect(y)).collect()
}

/// Nearest point of the closure of a nonempty box.
fn clamp(b: &[Iv], c: &[Rational]) -> Vec<Rational> {
    b.iter()
        .zip(c)
        .map(|(iv, x)| {
            let mut v = x.clone();
            if let Some(l) = &iv.lo.v {
                if &v < l {
                    v = l.clone();
                }
            }
            if let Some(h) = &iv.hi.v {
                if &v > h {
                    v = h.clone();
                }
            }
            v
        })
        .collect()
}

fn vertices(b: &[Iv]) -> Vec<(Vec<Rational>, bool)> {
    let mut out: Vec<(Vec<Rational>, bool)> = vec![(vec![], true)];
    for iv in b {
        let ends = iv.ends();
        out = out
            .into_iter()
            .flat_map(|(p, inc)| {
                ends.iter().map(move |(v, c)| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    (q, inc && *c)
                })
            })
            .collect();
    }
    out
}

fn disk_meets_box(center: &[Rational], r: &Rational, b: &[Iv]) -> bool {
    box_nonempty(b) && sq_dist(&clamp(b, center), center) < r * r
}

/// Nonempty bounded box inside an open disk: no closure vertex outside,
/// and none on the circle that belongs to the box.
fn box_in_disk(b: &[Iv], center: &[Rational], r: &Rational) -> bool {
    if !b.iter().all(Iv::bounded) {
        return false;
    }
    let r2 = r * r;
    vertices(b).into_iter().all(|(v, included)| {
        let d2 = sq_dist(&v, center);
        d2 < r2 || (d2 == r2 && !included)
    })
}

fn box_in_region(b: &[Iv], u: &Region) -> bool {
    if !box_nonempty(b) {
        return true;
    }
    match u {
        Region::Box(ub) => b.iter().zip(ub).all(|(x, y)| x.subset(y)),
        Region::Disk { center, radius } => box_in_disk(b, center, radius),
        Region::Points(_) => false,
    }
}

fn region_in_region(a: &Region, u: &Region) -> bool {
    match (a, u) {
        (Region::Box(b), _) => box_in_region(b, u),
        (Region::Disk { center, radius }, Region::Box(ub)) => {
            center.iter().zip(ub).all(|(c, iv)| Iv { lo: End::open(c - radius), hi: End::open(c + radius) }.subset(iv))
        }
        (Region::Disk { center: c1, radius: r1 }, Region::Disk { center: c2, radius: r2 }) => {
            let gap = r2 - r1;
            !gap.is_negative() && sq_dist(c1, c2) <= &gap * &gap
        }
        (Region::Points(ps), Region::Points(qs)) => ps.iter().all(|p| qs.contains(p)),
        _ => false,
    }
}

/// `|x-u|² - |x-a|² ≤ ru² - ra²` at every closure vertex of the cell.
fn radical_ok(cell: &[Iv], a: &Region, u: &Region) -> bool {
    let (Region::Disk { center: ca, radius: ra }, Region::Disk { center: cu, radius: ru }) = (a, u) else {
        return false;
    };
    if !cell.iter().all(Iv::bounded) {
        return false;
    }
    let rhs = ru * ru - ra * ra;
    vertices(cell).into_iter().all(|(v, _)| sq_dist(&v, cu) - sq_dist(&v, ca) <= rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inside {
    Contained,
    Radical,
}

/// Replayable proof that a region lies inside a finite union.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum CellProof {
    Outside,
    Inside {
        member: usize,
        how: Inside,
    },
    Split {
        axis: usize,
        #[serde(with = "serde_rational")]
        at: Rational,
        above: Box<CellProof>,
        on: Box<CellProof>,
        below: Box<CellProof>,
    },
    /// Finite carriers: each point of the ball with a covering member.
    Points { members: Vec<(Point, usize)> },
}

impl CellProof {
    pub fn size(&self) -> usize {
        match self {
            CellProof::Split { above, on, below, .. } => 1 + above.size() + on.size() + below.size(),
            CellProof::Points { members } => members.len(),
            _ => 1,
        }
    }
}

/// A box cell of the search.
pub type Cell = Vec<Iv>;

struct Engine<'a> {
    a: &'a Region,
    us: &'a [Region],
    crit: Vec<BTreeSet<Rational>>,
    nodes: usize,
    limit: usize,
    max_depth: u32,
    witness: Option<Vec<Rational>>,
}

fn leaf(cell: &[Iv], a: &Region, us: &[Region]) -> Option<CellProof> {
    let inner = match a {
        Region::Box(ab) => box_meet(cell, ab),
        Region::Disk { center, radius } => {
            if !disk_meets_box(center, radius, cell) {
                return Some(CellProof::Outside);
            }
            cell.to_vec()
        }
        Region::Points(_) => return None,
    };
    if !box_nonempty(&inner) {
        return Some(CellProof::Outside);
    }
    for (k, u) in us.iter().enumerate() {
        let whole = matches!(a, Region::Disk { .. }) && region_in_region(a, u);
        if whole || box_in_region(&inner, u) {
            return Some(CellProof::Inside { member: k, how: Inside::Contained });
        }
        if radical_ok(cell, a, u) {
            return Some(CellProof::Inside { member: k, how: Inside::Radical });
        }
    }
    None
}

fn check_leaf(cell: &[Iv], a: &Region, us: &[Region], p: &CellProof) -> Result<(), String> {
    match p {
        CellProof::Outside => {
            let empty = match a {
                Region::Box(ab) => !box_nonempty(&box_meet(cell, ab)),
                Region::Disk { center, radius } => !disk_meets_box(center, radius, cell),
                Region::Points(_) => false,
            };
            if empty {
                Ok(())
            } else {
                Err("cell meets the region".into())
            }
        }
        CellProof::Inside { member, how } => {
            let u = us.get(*member).ok_or("member out of range")?;
            let ok = match how {
                Inside::Contained => {
                    let inner = match a {
                        Region::Box(ab) => box_meet(cell, ab),
                        _ => cell.to_vec(),
                    };
                    (matches!(a, Region::Disk { .. }) && region_in_region(a, u)) || box_in_region(&inner, u)
                }
                Inside::Radical => radical_ok(cell, a, u),
            };
            if ok {
                Ok(())
            } else {
                Err(format!("cell not inside member {member}"))
            }
        }
        _ => Err("unexpected node".into()),
    }
}

fn product_candidates(cell: &[Iv]) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = vec![vec![]];
    for iv in cell {
        let c = iv.candidates();
        out = out
            .into_iter()
            .flat_map(|p| {
                c.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    q
                })
            })
            .collect();
    }
    out
}

impl Engine<'_> {
    fn split_children(&mut self, cell: &[Iv], axis: usize, at: Rational, depth: u32) -> Option<CellProof> {
        let (below, on, above) = cell[axis].split(&at);
        let mut parts = Vec::with_capacity(3);
        for iv in [above, on, below] {
            let mut c = cell.to_vec();
            c[axis] = iv;
            let r = self.prove(&c, depth + 1);
            if r.is_none() && self.witness.is_some() {
                return None;
            }
            parts.push(r);
        }
        let mut it = parts.into_iter();
        let (above, on, below) = (it.next()??, it.next()??, it.next()??);
        Some(CellProof::Split { axis, at, above: Box::new(above), on: Box::new(on), below: Box::new(below) })
    }

    fn prove(&mut self, cell: &[Iv], depth: u32) -> Option<CellProof> {
        self.nodes += 1;
        if let Some(p) = leaf(cell, self.a, self.us) {
            return Some(p);
        }
        // split at a critical value strictly inside the cell
        for axis in 0..cell.len() {
            let inside: Vec<&Rational> = self.crit[axis].iter().filter(|x| cell[axis].strictly_inside(x)).collect();
            if !inside.is_empty() {
                let at = inside[inside.len() / 2].clone();
                return self.split_children(cell, axis, at, depth);
            }
        }
        for x in product_candidates(cell) {
            if self.a.contains(&x) && !self.us.iter().any(|u| u.contains(&x)) {
                self.witness = Some(x);
                return None;
            }
        }
        if depth >= self.max_depth || self.nodes > self.limit {
            return None;
        }
        let axis = (0..cell.len())
            .filter_map(|k| cell[k].width().filter(|w| w.is_positive()).map(|w| (w, k)))
            .max_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)))?
            .1;
        let at = cell[axis].mid();
        self.split_children(cell, axis, at, depth)
    }
}

fn critical_values(a: &Region, us: &[Region], dim: usize) -> Vec<BTreeSet<Rational>> {
    let mut crit = vec![BTreeSet::new(); dim];
    let add_region = |r: &Region, crit: &mut Vec<BTreeSet<Rational>>| {
        for (k, iv) in r.bounding().iter().enumerate() {
            crit[k].extend(iv.lo.v.clone());
            crit[k].extend(iv.hi.v.clone());
        }
    };
    add_region(a, &mut crit);
    for u in us {
        add_region(u, &mut crit);
        // axis-aligned radical planes
        if let (Region::Disk { center: ca, radius: ra }, Region::Disk { center: cu, radius: ru }) = (a, u) {
            let diff: Vec<usize> = (0..dim).filter(|&k| ca[k] != cu[k]).collect();
            if diff.len() == 1 {
                let k = diff[0];
                let t = &cu[k] - &ca[k];
                let rhs = (sq(cu) - sq(ca) - ru * ru + ra * ra) / int(2);
                let other: Rational =
                    (0..dim).filter(|&j| j != k).map(|j| &ca[j] * (&cu[j] - &ca[j])).fold(Rational::zero(), |s, x| s + x);
                crit[k].insert((rhs - other) / t);
            }
        }
    }
    crit
}

fn sq(x: &[Rational]) -> Rational {
    x.iter().map(|v| v * v).fold(Rational::zero(), |s, t| s + t)
}

/// Search for a cell proof of `a ⊆ ⋃ us` over `ℚⁿ` regions.
fn prove_cover(a: &Region, us: &[Region], budget: u32) -> Verdict<CellProof, Vec<Rational>> {
    let root = a.bounding();
    let dim = root.len();
    let mut eng = Engine {
        a,
        us,
        crit: critical_values(a, us, dim),
        nodes: 0,
        limit: 2000 * (budget as usize + 1),
        max_depth: 2 * budget + 8,
        witness: None,
    };
    match eng.prove(&root, 0) {
        Some(p) => Verdict::Proved(p),
        None => match eng.witness {
            Some(w) => Verdict::Refuted(w),
            None => Verdict::Unknown { budget },
        },
    }
}

/// Checks a cell proof against `a ⊆ ⋃ us`.
pub fn replay_cells(a: &Region, us: &[Region], proof: &CellProof) -> Result<(), String> {
    fn go(cell: &[Iv], a: &Region, us: &[Region], p: &CellProof) -> Result<(), String> {
        match p {
            CellProof::Split { axis, at, above, on, below } => {
                let iv = cell.get(*axis).ok_or("axis out of range")?;
                if !iv.strictly_inside(at) {
                    return Err("split value outside cell".into());
                }
                let (b, o, ab) = iv.split(at);
                for (iv, child) in [(ab, above), (o, on), (b, below)] {
                    let mut c = cell.to_vec();
                    c[*axis] = iv;
                    go(&c, a, us, child)?;
                }
                Ok(())
            }
            _ => check_leaf(cell, a, us, p),
        }
    }
    go(&a.bounding(), a, us, proof)
}

/// The region oracle for box carriers and finite carriers.
#[derive(Clone, Debug, Default)]
pub struct RegionOracle;

const FINITE_BUDGET: u32 = 32;

impl RegionOracle {
    /// Extent of a ball, when it is a region this oracle handles.
    pub fn region(&self, g: &Gus, a: &FormalBall) -> Option<Region> {
        match g.carrier() {
            Carrier::Finite(pts) => {
                let mut inside = Vec::new();
                for p in pts {
                    match ball_contains(g, a, p, FINITE_BUDGET) {
                        Verdict::Proved(()) => inside.push(p.clone()),
                        Verdict::Refuted(()) => {}
                        Verdict::Unknown { .. } => return None,
                    }
                }
                Some(Region::Points(inside))
            }
            Carrier::Box(spans) => {
                let c = a.center.coords();
                if c.len() != spans.len() {
                    return None;
                }
                let mut geoms = Vec::new();
                for id in a.metric.generators() {
                    geoms.push(g.generator(id).ok()?.geometry.clone()?);
                }
                if geoms.contains(&GenGeom::Euclid) {
                    // a Euclidean ball lies inside every coordinate-max ball of equal radius
                    if spans.iter().all(|s| s.lo.is_none() && s.hi.is_none()) {
                        return Some(Region::Disk { center: c, radius: a.radius.clone() });
                    }
                    return None;
                }
                let mut ivs: Vec<Iv> = spans
                    .iter()
                    .map(|s| Iv {
                        lo: s.lo.clone().map(End::closed).unwrap_or_else(End::inf),
                        hi: s.hi.clone().map(End::closed).unwrap_or_else(End::inf),
                    })
                    .collect();
                for gm in geoms {
                    if let GenGeom::CoordMax(ks) = gm {
                        for k in ks {
                            let open = Iv { lo: End::open(&c[k] - &a.radius), hi: End::open(&c[k] + &a.radius) };
                            ivs[k] = ivs[k].intersect(&open);
                        }
                    }
                }
                Some(Region::Box(ivs))
            }
            Carrier::Opaque { .. } => None,
        }
    }

    fn regions(&self, g: &Gus, a: &FormalBall, u: &[FormalBall]) -> Option<(Region, Vec<Region>)> {
        let ra = self.region(g, a)?;
        let us = u.iter().map(|b| self.region(g, b)).collect::<Option<Vec<_>>>()?;
        Some((ra, us))
    }
}

fn witness_point(g: &Gus, x: Vec<Rational>) -> Point {
    match g.carrier() {
        Carrier::Box(_) => Point::from_coords(x),
        _ => Point::Tuple(vec![]),
    }
}

fn meet_witness(a: &Region, b: &Region) -> Option<Vec<Rational>> {
    match (a, b) {
        (Region::Box(x), Region::Box(y)) => {
            let m = box_meet(x, y);
            box_nonempty(&m).then(|| m.iter().map(pick_inside).collect())
        }
        (Region::Disk { center, radius }, Region::Box(b)) | (Region::Box(b), Region::Disk { center, radius }) => {
            if !disk_meets_box(center, radius, b) {
                return None;
            }
            let p = clamp(b, center);
            let inner: Vec<Rational> = b.iter().map(pick_inside).collect();
            // walk from the clamp point towards an interior point
            for k in 0..64u32 {
                let t = crate::numeric::dyadic(k);
                let q: Vec<Rational> = p.iter().zip(&inner).map(|(x, y)| x + (y - x) * &t).collect();
                if Region::Box(b.clone()).contains(&q) && sq_dist(&q, center) < radius * radius {
                    return Some(q);
                }
            }
            let q: Vec<Rational> = p.clone();
            (Region::Box(b.clone()).contains(&q)).then_some(q)
        }
        (Region::Disk { center: c1, radius: r1 }, Region::Disk { center: c2, radius: r2 }) => {
            let s = r1 + r2;
            if sq_dist(c1, c2) >= &s * &s {
                return None;
            }
            let t = r1 / &s;
            Some(c1.iter().zip(c2).map(|(x, y)| x + (y - x) * &t).collect())
        }
        _ => None,
    }
}

/// A point of a nonempty interval, preferring its middle.
fn pick_inside(iv: &Iv) -> Rational {
    let m = iv.mid();
    if iv.contains(&m) {
        m
    } else {
        iv.lo.v.clone().or_else(|| iv.hi.v.clone()).unwrap_or_else(Rational::zero)
    }
}

impl SpatialOracle for RegionOracle {
    fn exact(&self) -> bool {
        true
    }

    fn ball_subset(&self, g: &Gus, a: &FormalBall, b: &FormalBall, budget: u32) -> Verdict<(), Point> {
        if let (Some(ra), Some(rb)) = (self.region(g, a), self.region(g, b)) {
            if region_in_region(&ra, &rb) {
                return Verdict::Proved(());
            }
        }
        self.cover_inclusion(g, a, std::slice::from_ref(b), budget).map(|_| (), |p| p)
    }

    fn ball_meets(&self, g: &Gus, a: &FormalBall, b: &FormalBall, budget: u32) -> Verdict<Point, ()> {
        let (Some(ra), Some(rb)) = (self.region(g, a), self.region(g, b)) else {
            return Verdict::Unknown { budget };
        };
        if let (Region::Points(p), Region::Points(q)) = (&ra, &rb) {
            return match p.iter().find(|x| q.contains(x)) {
                Some(x) => Verdict::Proved(x.clone()),
                None => Verdict::Refuted(()),
            };
        }
        match meet_witness(&ra, &rb) {
            Some(x) => Verdict::Proved(witness_point(g, x)),
            None => Verdict::Refuted(()),
        }
    }

    fn eps_net(&self, g: &Gus, m: &MetricId, eps: &Rational) -> Result<Vec<Point>, GusError> {
        match g.carrier() {
            Carrier::Finite(pts) => Ok(pts.clone()),
            Carrier::Opaque { .. } => Err(GusError::OracleMissing),
            Carrier::Box(spans) => {
                let n = spans.len();
                let mut used = vec![false; n];
                let mut pitch = eps.clone();
                for id in m.generators() {
                    match g.generator(id)?.geometry.clone() {
                        Some(GenGeom::CoordMax(ks)) => ks.into_iter().for_each(|k| used[k] = true),
                        Some(GenGeom::Euclid) => {
                            used.iter_mut().for_each(|u| *u = true);
                            pitch = eps / int(n as i64);
                        }
                        None => return Err(GusError::OracleMissing),
                    }
                }
                let mut axes: Vec<Vec<Rational>> = Vec::new();
                for (s, &u) in spans.iter().zip(&used) {
                    if !u {
                        axes.push(vec![s.lo.clone().or(s.hi.clone()).unwrap_or_else(Rational::zero)]);
                        continue;
                    }
                    let (Some(lo), Some(hi)) = (&s.lo, &s.hi) else {
                        return Err(GusError::NotTotallyBounded);
                    };
                    let mut vals = Vec::new();
                    let mut x = lo.clone();
                    while &x < hi {
                        vals.push(x.clone());
                        x += &pitch;
                    }
                    vals.push(hi.clone());
                    axes.push(vals);
                }
                let mut pts: Vec<Vec<Rational>> = vec![vec![]];
                for vals in axes {
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
                Ok(pts.into_iter().map(Point::from_coords).collect())
            }
        }
    }

    fn cover_inclusion(&self, g: &Gus, a: &FormalBall, u: &[FormalBall], budget: u32) -> Verdict<CellProof, Point> {
        let Some((ra, us)) = self.regions(g, a, u) else {
            return Verdict::Unknown { budget };
        };
        if let Region::Points(ps) = &ra {
            let mut members = Vec::new();
            for p in ps {
                match us.iter().position(|r| matches!(r, Region::Points(q) if q.contains(p))) {
                    Some(k) => members.push((p.clone(), k)),
                    None => return Verdict::Refuted(p.clone()),
                }
            }
            return Verdict::Proved(CellProof::Points { members });
        }
        prove_cover(&ra, &us, budget).map(|p| p, |x| witness_point(g, x))
    }

    fn replay_inclusion(&self, g: &Gus, a: &FormalBall, u: &[FormalBall], proof: &CellProof) -> Result<(), String> {
        let (ra, us) = self.regions(g, a, u).ok_or("balls have no region")?;
        if let Region::Points(ps) = &ra {
            let CellProof::Points { members } = proof else {
                return Err("expected a point listing".into());
            };
            for p in ps {
                let (_, k) = members.iter().find(|(q, _)| q == p).ok_or_else(|| format!("point {p} not listed"))?;
                match us.get(*k) {
                    Some(Region::Points(q)) if q.contains(p) => {}
                    _ => return Err(format!("point {p} not in member {k}")),
                }
            }
            return Ok(());
        }
        replay_cells(&ra, &us, proof)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gus::{make_space, BoxMetric, SpaceKind};
    use crate::numeric::rat;

    fn disk(x: i64, y: i64, r: i64) -> Region {
        Region::Disk { center: vec![int(x), int(y)], radius: int(r) }
    }

    #[test]
    fn two_disks_cover_middle_disk() {
        let a = disk(0, 0, 3);
        let us = vec![disk(-4, 0, 5), disk(4, 0, 5)];
        let p = prove_cover(&a, &us, 4).proved().expect("cover");
        replay_cells(&a, &us, &p).unwrap();
        // a single disk leaves (-3,0)-side points out
        let w = prove_cover(&a, &us[1..], 6).refuted().expect("witness");
        assert!(a.contains(&w) && !us[1].contains(&w));
    }

    #[test]
    fn tampered_proof_fails() {
        let a = disk(0, 0, 3);
        let us = vec![disk(-4, 0, 5), disk(4, 0, 5)];
        let p = prove_cover(&a, &us, 4).proved().unwrap();
        assert!(replay_cells(&a, &us[..1], &p).is_err());
    }

    #[test]
    fn interval_refutation_prefers_upper_points() {
        let unit = make_space(&SpaceKind::UnitInterval).unwrap();
        let d = MetricId::single("d");
        let a = FormalBall::new(d.clone(), Point::Num(rat(1, 2)), int(1)).unwrap();
        let u = FormalBall::new(d, Point::Num(int(0)), rat(1, 2)).unwrap();
        let w = RegionOracle.cover_inclusion(&unit, &a, &[u], 8).refuted().unwrap();
        let x = w.as_num().unwrap().clone();
        assert!(x > rat(1, 2) && x <= int(1));
    }

    #[test]
    fn tangent_square_in_disk() {
        // open square with corners on the circle
        let b = vec![Iv { lo: End::open(int(-3)), hi: End::open(int(3)) }, Iv { lo: End::open(int(-4)), hi: End::open(int(4)) }];
        assert!(box_in_disk(&b, &[int(0), int(0)], &int(5)));
        let closed = vec![Iv::point(int(3)), Iv::point(int(4))];
        assert!(!box_in_disk(&closed, &[int(0), int(0)], &int(5)));
    }

    #[test]
    fn eps_net_covers_interval() {
        let unit = make_space(&SpaceKind::UnitInterval).unwrap();
        let d = MetricId::single("d");
        let net = RegionOracle.eps_net(&unit, &d, &rat(1, 3)).unwrap();
        assert_eq!(net.len(), 4);
        let line = make_space(&SpaceKind::RationalLine).unwrap();
        assert_eq!(RegionOracle.eps_net(&line, &d, &rat(1, 3)), Err(GusError::NotTotallyBounded));
        let plane = make_space(&SpaceKind::RationalBox { dim: 2, metric: BoxMetric::Sup, bounds: Some((int(0), int(1))) }).unwrap();
        let net = RegionOracle.eps_net(&plane, &MetricId::single("sup"), &rat(1, 2)).unwrap();
        assert_eq!(net.len(), 9);
    }

    #[test]
    fn meets_with_witness() {
        let plane = make_space(&SpaceKind::RationalBox { dim: 2, metric: BoxMetric::Euclid, bounds: None }).unwrap();
        let e = MetricId::single("euclid");
        let a = FormalBall::new(e.clone(), Point::from_coords(vec![int(0), int(0)]), int(1)).unwrap();
        let b = FormalBall::new(e.clone(), Point::from_coords(vec![rat(3, 2), int(0)]), int(1)).unwrap();
        let w = RegionOracle.ball_meets(&plane, &a, &b, 0).proved().unwrap();
        assert!(ball_contains(&plane, &a, &w, 0).is_proved() && ball_contains(&plane, &b, &w, 0).is_proved());
        let c = FormalBall::new(e, Point::from_coords(vec![int(2), int(0)]), int(1)).unwrap();
        assert!(RegionOracle.ball_meets(&plane, &a, &c, 0).is_refuted());
    }
}
