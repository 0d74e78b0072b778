//! The localic completion `U(X)` of a gus: formal balls under `≤_X`, the
//! shrinking axiom `a ◁ {b | b <_X a}` and the uniform axioms `a ◁ C_d^ε`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::deciders::{shrink, LcDecider};
use crate::ftop::{AxiomIndex, AxiomSet, Base, FormalTopology, Sample, Subset, TopologyMap};
use crate::gus::{
    ball_meets, ball_order, check_homomorphism, eps_net, interpolate, product_generator, product_join, product_split,
    CellProof, FormalBall, Gus, GusError, Iv, MetricId, Point, Polynomial, Region, RegionOracle,
};
use crate::numeric::{dyadic, int, Bound, Rational};
use crate::verdict::Verdict;

/// Precision used for order checks inside relations.
const ORDER_PRECISION: u32 = 32;

fn lt(g: &Gus, a: &FormalBall, b: &FormalBall) -> bool {
    ball_order(g, a, b, true, ORDER_PRECISION).is_proved()
}

fn le(g: &Gus, a: &FormalBall, b: &FormalBall) -> bool {
    ball_order(g, a, b, false, ORDER_PRECISION).is_proved()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompletionError {
    #[error("no continuity data for {0}")]
    NoModulus(String),
    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error(transparent)]
    Space(#[from] GusError),
}

/// `U(X)` together with the space it completes.
#[derive(Clone, Debug)]
pub struct CompletionTopology {
    pub space: Gus,
    pub topology: FormalTopology<FormalBall>,
}

fn metric_index(m: &MetricId) -> AxiomIndex {
    AxiomIndex::Seq(m.generators().iter().map(|g| AxiomIndex::Label(g.clone())).collect())
}

fn metric_of_index(i: &AxiomIndex) -> Option<MetricId> {
    match i {
        AxiomIndex::Seq(v) => MetricId::new(
            v.iter()
                .map(|x| match x {
                    AxiomIndex::Label(s) => Some(s.clone()),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()?,
        )
        .ok(),
        _ => None,
    }
}

/// Index of the uniform axiom `a ◁ C_d^ε`.
pub fn uniform_index(d: &MetricId, eps: &Rational) -> AxiomIndex {
    AxiomIndex::Seq(vec![AxiomIndex::label("U2"), metric_index(d), AxiomIndex::Rat(eps.clone())])
}

fn decode_uniform(i: &AxiomIndex) -> Option<(MetricId, Rational)> {
    match i {
        AxiomIndex::Seq(v) => match v.as_slice() {
            [AxiomIndex::Label(l), m, AxiomIndex::Rat(e)] if l == "U2" && e.is_positive() => {
                Some((metric_of_index(m)?, e.clone()))
            }
            _ => None,
        },
        _ => None,
    }
}

fn base_radii(n: u32) -> Vec<Rational> {
    let mut v = vec![int(2)];
    v.extend((0..=n.min(3)).map(dyadic));
    v
}

/// Deterministic sample of `U_X`.
pub fn base_sample(g: &Gus, n: u32) -> Vec<FormalBall> {
    let mut out = Vec::new();
    for m in g.metric_ids() {
        for x in g.sample(n) {
            for r in base_radii(n) {
                out.push(FormalBall { metric: m.clone(), center: x.clone(), radius: r });
            }
        }
    }
    out
}

/// Balls strictly below `a` on a grid: centers from `a` and the carrier
/// sample, radii a dyadic fraction of the slack.
pub fn wb_enumerate(g: &Gus, a: &FormalBall, n: u32) -> Vec<FormalBall> {
    let mut metrics = vec![a.metric.clone()];
    let full = a.metric.union(&g.full_metric());
    if full != a.metric {
        metrics.push(full);
    }
    let mut centers = vec![a.center.clone()];
    centers.extend(g.sample(n.min(2)));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for z in &centers {
        let Ok(d) = g.dist(&a.metric, &a.center, z) else { continue };
        let Bound::Finite(u) = d.upper(24) else { continue };
        let slack = &a.radius - u;
        if !slack.is_positive() {
            continue;
        }
        for j in 1..=n + 1 {
            for r in [&slack * (int(1) - dyadic(j)), &slack * dyadic(j)] {
                for m in &metrics {
                    let b = FormalBall { metric: m.clone(), center: z.clone(), radius: r.clone() };
                    if r.is_positive() && seen.insert(b.clone()) && lt(g, &b, a) {
                        out.push(b);
                    }
                }
            }
        }
    }
    out
}

/// Same-center shrinks `b(x, r(1 - 2^-j))` and `b(x, r 2^-j)`.
pub fn rc_enumerate(a: &FormalBall, n: u32) -> Vec<FormalBall> {
    let mut out: Vec<FormalBall> = Vec::new();
    for j in 1..=n + 1 {
        for r in [&a.radius * (int(1) - dyadic(j)), &a.radius * dyadic(j)] {
            let b = a.with_radius(r);
            if !out.contains(&b) {
                out.push(b);
            }
        }
    }
    out
}

/// `{b | b <_X a}` as a named subset; the body of the shrinking axiom.
pub fn wb_subset(g: &Gus, a: &FormalBall) -> Subset<FormalBall> {
    let (g1, g2, a1, a2) = (g.clone(), g.clone(), a.clone(), a.clone());
    Subset::named(&format!("{}: below {a}", g.name), move |b| lt(&g1, b, &a1), move |n| wb_enumerate(&g2, &a2, n))
}

/// `C_d^ε = {b_d(x, ε) | x ∈ X}`.
pub fn uniform_subset(g: &Gus, d: &MetricId, eps: &Rational) -> Subset<FormalBall> {
    let (g1, g2, d1, d2, e1, e2) = (g.clone(), g.clone(), d.clone(), d.clone(), eps.clone(), eps.clone());
    Subset::named(
        &format!("{}: C {d} {eps}", g.name),
        move |b: &FormalBall| b.metric == d1 && b.radius == e1 && g1.contains_point(&b.center),
        move |n| {
            let centers = eps_net(&g2, &d2, &e2).unwrap_or_else(|_| g2.sample(n));
            centers.into_iter().map(|x| FormalBall { metric: d2.clone(), center: x, radius: e2.clone() }).collect()
        },
    )
}

/// `C_d^ε ↓ a = {c ≤_X a | d ⊆ gens(c), radius(c) ≤ ε}`.
pub fn uniform_below(g: &Gus, d: &MetricId, eps: &Rational, a: &FormalBall) -> Subset<FormalBall> {
    let (g1, g2, d1, e1, a1, a2) = (g.clone(), g.clone(), d.clone(), eps.clone(), a.clone(), a.clone());
    let m = a.metric.union(d);
    let e2 = eps.clone();
    Subset::named(
        &format!("{}: C {d} {eps} below {a}", g.name),
        move |c: &FormalBall| d1.below(&c.metric) && c.radius <= e1 && le(&g1, c, &a1),
        move |n| {
            let mut centers = vec![a2.center.clone()];
            centers.extend(g2.sample(n.min(2)));
            let radii = [e2.clone(), &e2 / int(2), &a2.radius / int(2), &a2.radius / int(4)];
            centers
                .iter()
                .flat_map(|x| {
                    radii.iter().filter(|r| **r <= e2).map(|r| FormalBall { metric: m.clone(), center: x.clone(), radius: r.clone() })
                })
                .collect()
        },
    )
}

/// Builds `U(X)`; with `localised` the uniform bodies are restricted below
/// the covered ball. Spaces with a spatial oracle get the ball-cover plugin.
pub fn completion_topology(g: &Gus, localised: bool) -> CompletionTopology {
    let (g1, g2, g3, g4) = (g.clone(), g.clone(), g.clone(), g.clone());
    let axioms = AxiomSet::new(
        move |_a: &FormalBall, n| {
            let mut idx = vec![AxiomIndex::label("U1")];
            for d in g1.metric_ids() {
                for k in 0..=n.min(3) {
                    idx.push(uniform_index(&d, &dyadic(k)));
                }
            }
            Sample::partial(idx)
        },
        move |a: &FormalBall, i: &AxiomIndex| match i {
            AxiomIndex::Label(l) if l == "U1" => wb_subset(&g2, a),
            _ => match decode_uniform(i) {
                Some((d, e)) if g2.check_metric(&d).is_ok() => {
                    if localised {
                        uniform_below(&g2, &d, &e, a)
                    } else {
                        uniform_subset(&g2, &d, &e)
                    }
                }
                _ => Subset::empty(),
            },
        },
    );
    let base = Base::Enumerated(Arc::new(move |n| base_sample(&g3, n)));
    let mut t = FormalTopology::new(&format!("U({})", g.name), base, move |a, b| le(&g4, a, b), axioms, localised)
        .with_positivity(|_| true)
        .with_meet_hint(|a: &FormalBall, b: &FormalBall| {
            // same-center meets of nested balls
            if a.center == b.center {
                let m = a.metric.union(&b.metric);
                vec![FormalBall { metric: m, center: a.center.clone(), radius: a.radius.clone().min(b.radius.clone()) }]
            } else {
                vec![]
            }
        });
    if g.oracle().is_some() {
        t = t.with_decider(Arc::new(LcDecider { space: g.clone() }));
    }
    CompletionTopology { space: g.clone(), topology: t }
}

impl CompletionTopology {
    /// Restriction to a finite universe: bodies are materialised, uniform
    /// axioms are kept only at radii occurring in the universe, and axioms
    /// with empty materialised bodies are dropped.
    pub fn truncated(&self, universe: Vec<FormalBall>, budget: u32) -> FormalTopology<FormalBall> {
        let radii: BTreeSet<Rational> = universe.iter().map(|b| b.radius.clone()).collect();
        let mut ax = Vec::new();
        for a in &universe {
            for i in self.topology.axioms().index(a, budget).items {
                if let Some((_, e)) = decode_uniform(&i) {
                    if !radii.contains(&e) {
                        continue;
                    }
                }
                let body = self.topology.axioms().body(a, &i).materialize(&universe);
                if !body.is_empty() {
                    ax.push((a.clone(), i, body));
                }
            }
        }
        let g = self.space.clone();
        FormalTopology::finite(
            &format!("{} truncated", self.topology.name),
            universe,
            move |a, b| le(&g, a, b),
            ax,
            self.topology.is_localised(),
        )
    }
}

/// A function between carriers with optional continuity data.
#[derive(Clone)]
pub struct FunctionData {
    pub name: String,
    apply: Arc<dyn Fn(&Point) -> Point + Send + Sync>,
    /// Closed enclosure of the image of a closed box.
    enclosure: Option<Arc<dyn Fn(&[Iv]) -> Option<Vec<Iv>> + Send + Sync>>,
    /// `(source ball, target generator, δ) ↦ (source metric, ε')`.
    modulus: Option<Arc<dyn Fn(&FormalBall, &str, &Rational) -> Option<(MetricId, Rational)> + Send + Sync>>,
}

impl std::fmt::Debug for FunctionData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FunctionData({})", self.name)
    }
}

impl FunctionData {
    pub fn new(name: &str, f: impl Fn(&Point) -> Point + Send + Sync + 'static) -> Self {
        FunctionData { name: name.to_string(), apply: Arc::new(f), enclosure: None, modulus: None }
    }

    pub fn with_enclosure(mut self, e: impl Fn(&[Iv]) -> Option<Vec<Iv>> + Send + Sync + 'static) -> Self {
        self.enclosure = Some(Arc::new(e));
        self
    }

    pub fn with_modulus(
        mut self,
        m: impl Fn(&FormalBall, &str, &Rational) -> Option<(MetricId, Rational)> + Send + Sync + 'static,
    ) -> Self {
        self.modulus = Some(Arc::new(m));
        self
    }

    /// A polynomial on a one-dimensional space with metric `metric`, with
    /// interval enclosure and a Lipschitz modulus on bounded balls.
    pub fn polynomial(p: Polynomial, metric: MetricId) -> Self {
        let (p1, p2, p3) = (p.clone(), p.clone(), p);
        FunctionData::new("polynomial", move |x| match x.as_num() {
            Some(q) => Point::Num(p1.eval(q)),
            None => x.clone(),
        })
        .with_enclosure(move |cell| match cell {
            [iv] => {
                let (lo, hi) = (iv.lo.v.clone()?, iv.hi.v.clone()?);
                let (a, b) = enclose(&p2, &lo, &hi);
                Some(vec![Iv::closed(a, b)])
            }
            _ => None,
        })
        .with_modulus(move |ball, _, delta| {
            let m = ball.center.as_num()?.abs() + &ball.radius;
            let lip: Rational = p3
                .0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.abs() * int(k as i64) * pow(&m, k - 1))
                .fold(Rational::zero(), |s, t| s + t);
            let eps = if lip.is_positive() { delta / lip } else { delta.clone() };
            Some((metric.clone(), eps.min(ball.radius.clone())))
        })
    }

    pub fn apply(&self, x: &Point) -> Point {
        (self.apply)(x)
    }
}

fn pow(x: &Rational, k: usize) -> Rational {
    (0..k).fold(int(1), |acc, _| acc * x)
}

/// Interval Horner enclosure of `p` on `[lo, hi]`.
pub fn enclose(p: &Polynomial, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
    let mut acc = (Rational::zero(), Rational::zero());
    for c in p.0.iter().rev() {
        let prods = [&acc.0 * lo, &acc.0 * hi, &acc.1 * lo, &acc.1 * hi];
        let mn = prods.iter().min().unwrap().clone();
        let mx = prods.iter().max().unwrap().clone();
        acc = (mn + c, mx + c);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapMode {
    /// `a r b ⟺ d ω_f ρ ∧ b_ρ(f(x_a), ε_a) <_Y b`.
    Hom,
    /// `a r b ⟺ ∃ b' <_Y b, f[a_*] ⊆ b'_*`.
    Continuous,
}

/// Closed bounding box; `None` when unbounded.
fn closure(r: &Region) -> Option<Vec<Iv>> {
    r.bounding().iter().map(|iv| Some(Iv::closed(iv.lo.v.clone()?, iv.hi.v.clone()?))).collect()
}

/// The shrink `b'` of `b` with `f[a_*] ⊆ b'_*`, trying `b' = b·k/(k+1)`.
pub fn continuous_witness(f: &FunctionData, x: &Gus, y: &Gus, a: &FormalBall, b: &FormalBall) -> Option<FormalBall> {
    let enc = f.enclosure.as_ref()?;
    let image = enc(&closure(&RegionOracle.region(x, a)?)?)?;
    for k in 1..=8i64 {
        let b2 = b.with_radius(&b.radius * Rational::new(k.into(), (k + 1).into()));
        if !lt(y, &b2, b) {
            continue;
        }
        let Some(Region::Box(target)) = RegionOracle.region(y, &b2) else { continue };
        if image.len() == target.len() && image.iter().zip(&target).all(|(i, t)| i.subset(t)) {
            return Some(b2);
        }
    }
    None
}

fn slack_in(y: &Gus, b: &FormalBall, p: &Point) -> Option<Rational> {
    let Bound::Finite(u) = y.dist(&b.metric, &b.center, p).ok()?.upper(24) else { return None };
    let s = &b.radius - u;
    s.is_positive().then_some(s)
}

/// `r_f : U(X) → U(Y)`. Homomorphism mode needs `f` to pass
/// [`check_homomorphism`] on samples; continuous mode needs an image
/// enclosure.
pub fn map_of_function(
    f: &FunctionData,
    x: &Gus,
    y: &Gus,
    mode: MapMode,
    budget: u32,
) -> Result<TopologyMap<FormalBall, FormalBall>, CompletionError> {
    match mode {
        MapMode::Hom => hom_map(f, x, y, budget),
        MapMode::Continuous => continuous_map(f, x, y),
    }
}

fn hom_map(f: &FunctionData, x: &Gus, y: &Gus, budget: u32) -> Result<TopologyMap<FormalBall, FormalBall>, CompletionError> {
    let apply = f.apply.clone();
    let witness = match check_homomorphism(x, y, &*apply, budget.min(3), ORDER_PRECISION) {
        Verdict::Proved(w) => w,
        Verdict::Refuted((rho, p, q)) => {
            return Err(CompletionError::NotHomomorphism(format!("{rho} expands the pair {p}, {q}")))
        }
        Verdict::Unknown { .. } => return Err(CompletionError::NotHomomorphism("undetermined on samples".into())),
    };
    let omega: Arc<BTreeMap<String, MetricId>> = Arc::new(witness.assignment.into_iter().collect());
    let om = omega.clone();
    let source_metric = move |rho: &MetricId| -> Option<MetricId> {
        let mut it = rho.generators().iter().map(|h| om.get(h).cloned());
        let first = it.next()??;
        it.try_fold(first, |acc, m| Some(acc.union(&m?)))
    };
    let sm1 = source_metric.clone();
    let (y1, y2, y3) = (y.clone(), y.clone(), y.clone());
    let (f1, f2, f3) = (apply.clone(), apply.clone(), apply);
    let x3 = x.clone();
    let sm2 = source_metric.clone();
    let sm3 = source_metric;
    Ok(TopologyMap::new(&format!("r_{}", f.name), move |a: &FormalBall, b: &FormalBall| {
        let Some(d) = sm1(&b.metric) else { return false };
        d.below(&a.metric)
            && lt(&y1, &FormalBall { metric: b.metric.clone(), center: f1(&a.center), radius: a.radius.clone() }, b)
    })
    .with_forward(move |a, n| {
        let fx = f2(&a.center);
        let mut out = Vec::new();
        for m in y2.metric_ids() {
            if sm2(&m).is_some_and(|d| d.below(&a.metric)) {
                for j in 0..=n + 4 {
                    out.push(FormalBall { metric: m.clone(), center: fx.clone(), radius: &a.radius + dyadic(j) });
                }
            }
        }
        out
    })
    .with_fiber(move |b, n| {
        let Some(d) = sm3(&b.metric) else { return vec![] };
        let mut out = Vec::new();
        for p in x3.sample(n) {
            if let Some(s) = slack_in(&y3, b, &f3(&p)) {
                for j in 1..=2 {
                    out.push(FormalBall { metric: d.clone(), center: p.clone(), radius: &s * dyadic(j) });
                }
            }
        }
        out
    }))
}

fn continuous_map(f: &FunctionData, x: &Gus, y: &Gus) -> Result<TopologyMap<FormalBall, FormalBall>, CompletionError> {
    if f.enclosure.is_none() {
        return Err(CompletionError::NoModulus(f.name.clone()));
    }
    let (fa, fb, fc) = (f.clone(), f.clone(), f.clone());
    let (x1, y1, x2, y2, x3, y3) = (x.clone(), y.clone(), x.clone(), y.clone(), x.clone(), y.clone());
    Ok(TopologyMap::new(&format!("r_{}", f.name), move |a: &FormalBall, b: &FormalBall| {
        continuous_witness(&fa, &x1, &y1, a, b).is_some()
    })
    .with_forward(move |a, n| {
        let fx = fb.apply(&a.center);
        let reach = RegionOracle
            .region(&x2, a)
            .and_then(|r| closure(&r))
            .and_then(|c| fb.enclosure.as_ref().and_then(|e| e(&c)))
            .map(|img| {
                let c = fx.coords();
                img.iter()
                    .zip(&c)
                    .map(|(iv, v)| {
                        let lo = iv.lo.v.clone().unwrap_or_default();
                        let hi = iv.hi.v.clone().unwrap_or_default();
                        (v - lo).abs().max((hi - v).abs())
                    })
                    .fold(Rational::zero(), |s, t| s + t)
            });
        let Some(reach) = reach else { return vec![] };
        let mut out = Vec::new();
        for m in y2.metric_ids() {
            for j in 0..=n + 2 {
                out.push(FormalBall { metric: m.clone(), center: fx.clone(), radius: &reach * int(2) + dyadic(j) });
            }
        }
        out
    })
    .with_fiber(move |b, n| {
        let mut out = Vec::new();
        for p in x3.sample(n) {
            let Some(s) = slack_in(&y3, b, &fc.apply(&p)) else { continue };
            let half = &s / int(2);
            let mut radii = vec![];
            if let Some(m) = &fc.modulus {
                let around = FormalBall { metric: x3.full_metric(), center: p.clone(), radius: int(1) };
                for h in b.metric.generators() {
                    if let Some((_, e)) = m(&around, h, &half) {
                        radii.push(e / int(2));
                    }
                }
            }
            radii.extend((1..=n + 2).map(|j| dyadic(j) * &half));
            for r in radii.into_iter().filter(|r| r.is_positive()) {
                out.push(FormalBall { metric: x3.full_metric(), center: p.clone(), radius: r });
            }
        }
        out
    }))
}

/// Evidence for `U ⊑ V`: with `d` the join of the metrics of `V`, every
/// member of `U` lies inside the members of `V` shrunk by `ε`, so every
/// ball of `U ↓ C_d^ε` is below a member of `V`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqCertificate {
    pub metric: MetricId,
    #[serde(with = "crate::numeric::serde_rational")]
    pub eps: Rational,
    pub inclusions: Vec<CellProof>,
}

fn join_metrics(v: &[FormalBall]) -> Option<MetricId> {
    let mut it = v.iter().map(|b| b.metric.clone());
    let first = it.next()?;
    Some(it.fold(first, |a, m| a.union(&m)))
}

/// Semidecides `U ⊑ V` for finite `U`, `V`. Refutes with a point of some
/// member of `U` outside every member of `V`: small balls there lie below
/// `U` but below no member of `V`, whatever the scale.
pub fn sq_below(g: &Gus, u: &[FormalBall], v: &[FormalBall], budget: u32) -> Result<Verdict<SqCertificate, Point>, GusError> {
    let oracle = g.require_oracle()?;
    for a in u {
        if let Verdict::Refuted(x) = oracle.cover_inclusion(g, a, v, budget) {
            let sound = crate::gus::ball_contains(g, a, &x, 64).is_proved()
                && v.iter().all(|b| crate::gus::ball_contains(g, b, &x, 64).is_refuted());
            if sound {
                return Ok(Verdict::Refuted(x));
            }
        }
    }
    let Some(d) = join_metrics(v) else {
        return Ok(if u.is_empty() {
            Verdict::Proved(SqCertificate { metric: g.full_metric(), eps: int(1), inclusions: vec![] })
        } else {
            Verdict::Unknown { budget }
        });
    };
    'scales: for k in 0..=budget {
        let eps = dyadic(k);
        let vs: Vec<FormalBall> = v.iter().filter_map(|b| shrink(b, &eps)).collect();
        let mut inclusions = Vec::new();
        for a in u {
            match oracle.cover_inclusion(g, a, &vs, budget) {
                Verdict::Proved(p) => inclusions.push(p),
                _ => continue 'scales,
            }
        }
        return Ok(Verdict::Proved(SqCertificate { metric: d, eps, inclusions }));
    }
    Ok(Verdict::Unknown { budget })
}

pub fn replay_sq(g: &Gus, u: &[FormalBall], v: &[FormalBall], c: &SqCertificate) -> Result<(), String> {
    let oracle = g.require_oracle().map_err(|e| e.to_string())?;
    if !u.is_empty() && Some(&c.metric) != join_metrics(v).as_ref() {
        return Err("metric is not the join of the cover".into());
    }
    if c.inclusions.len() != u.len() {
        return Err("one inclusion per member".into());
    }
    let vs: Vec<FormalBall> = v.iter().filter_map(|b| shrink(b, &c.eps)).collect();
    for (a, p) in u.iter().zip(&c.inclusions) {
        oracle.replay_inclusion(g, a, &vs, p)?;
    }
    Ok(())
}

/// Order-preserving reparametrisation `t ↦ b(x, r₀ + t(r₁ - r₀))` of
/// `[0, 1] ∩ ℚ` onto the same-center balls between `low` and `high`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scale {
    pub low: FormalBall,
    pub high: FormalBall,
}

impl Scale {
    pub fn at(&self, t: &Rational) -> Option<FormalBall> {
        if t.is_negative() || t > &int(1) {
            return None;
        }
        Some(self.low.with_radius(&self.low.radius + t * (&self.high.radius - &self.low.radius)))
    }
}

pub fn scale_between(g: &Gus, low: &FormalBall, high: &FormalBall) -> Option<Scale> {
    (low.center == high.center && low.metric == high.metric && lt(g, low, high))
        .then(|| Scale { low: low.clone(), high: high.clone() })
}

/// Evidence for `b ⋘ a`: every ball of `C_d^ε` is either below `a` or
/// disjoint from `b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WellInside {
    pub metric: MetricId,
    #[serde(with = "crate::numeric::serde_rational")]
    pub eps: Rational,
    pub checked: usize,
}

/// Checks `b ⋘ a` for a same-center shrink `b` of `a` on sampled elements
/// of `C_d^ε ↓ e` with `ε` half the radius gap. Refutes with a ball that
/// meets `b` without lying below `a`.
pub fn well_inside(g: &Gus, b: &FormalBall, a: &FormalBall, budget: u32) -> Verdict<WellInside, FormalBall> {
    if b.center != a.center || b.metric != a.metric || b.radius >= a.radius {
        return Verdict::Unknown { budget };
    }
    let eps = (&a.radius - &b.radius) / int(2);
    let d = a.metric.clone();
    let mut checked = 0;
    for e in base_sample(g, budget.min(1)) {
        for c in uniform_below(g, &d, &eps, &e).sample(budget.min(2)).items {
            checked += 1;
            if le(g, &c, a) {
                continue;
            }
            match ball_meets(g, &c, b, ORDER_PRECISION) {
                Ok(Verdict::Refuted(())) => {}
                Ok(Verdict::Proved(_)) => return Verdict::Refuted(c),
                _ => return Verdict::Unknown { budget },
            }
        }
    }
    Verdict::Proved(WellInside { metric: d, eps, checked })
}

/// `∃x ∈ X, ∀a ∈ A, x ∈ a_*`. Tries the centroid of the centers, the
/// centers, pairwise meet witnesses and carrier samples. Refutes with a
/// disjoint pair.
pub fn w_member(g: &Gus, a: &[FormalBall], budget: u32) -> Verdict<Point, (usize, usize)> {
    let inside = |x: &Point| {
        g.contains_point(x) && a.iter().all(|b| crate::gus::ball_contains(g, b, x, ORDER_PRECISION).is_proved())
    };
    let mut candidates = Vec::new();
    let coords: Vec<Vec<Rational>> = a.iter().map(|b| b.center.coords()).collect();
    if let Some(first) = coords.first() {
        if !first.is_empty() && coords.iter().all(|c| c.len() == first.len() && matches!(a[0].center, Point::Num(_) | Point::Tuple(_))) {
            let n = int(coords.len() as i64);
            let centroid: Vec<Rational> = (0..first.len()).map(|k| coords.iter().map(|c| c[k].clone()).sum::<Rational>() / &n).collect();
            candidates.push(Point::from_coords(centroid));
        }
    }
    candidates.extend(a.iter().map(|b| b.center.clone()));
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match ball_meets(g, &a[i], &a[j], ORDER_PRECISION) {
                Ok(Verdict::Proved(p)) => candidates.push(p),
                Ok(Verdict::Refuted(())) => return Verdict::Refuted((i, j)),
                _ => {}
            }
        }
    }
    if let Some(x) = candidates.iter().find(|x| inside(x)) {
        return Verdict::Proved(x.clone());
    }
    for k in 0..=budget {
        if let Some(x) = g.sample(k).into_iter().find(|x| inside(x)) {
            return Verdict::Proved(x);
        }
    }
    Verdict::Unknown { budget }
}

/// The three relations comparing `U(X × Y)` with `U(X) × U(Y)`.
#[derive(Clone)]
pub struct ProductIso {
    pub x: Gus,
    pub y: Gus,
    pub product: Gus,
    pub r_x: TopologyMap<FormalBall, FormalBall>,
    pub r_y: TopologyMap<FormalBall, FormalBall>,
    pub r: TopologyMap<(FormalBall, FormalBall), FormalBall>,
}

/// Splits a metric of `X × Y` into its components.
fn split_metric(x: &Gus, y: &Gus, m: &MetricId) -> Option<(MetricId, MetricId)> {
    let mut l = BTreeSet::new();
    let mut r = BTreeSet::new();
    for name in m.generators() {
        let (g, h) = x
            .generators()
            .iter()
            .flat_map(|g| y.generators().iter().map(move |h| (g, h)))
            .find(|(g, h)| &product_generator(&g.id, &h.id) == name)?;
        l.insert(g.id.clone());
        r.insert(h.id.clone());
    }
    Some((MetricId::new(l).ok()?, MetricId::new(r).ok()?))
}

fn join_metric(d: &MetricId, rho: &MetricId) -> MetricId {
    MetricId::new(d.generators().iter().flat_map(|g| rho.generators().iter().map(move |h| product_generator(g, h))))
        .expect("nonempty")
}

/// Component balls `b_d(x, ξ)` and `b_ρ(y, ξ)` of a product ball.
pub fn split_ball(x: &Gus, y: &Gus, c: &FormalBall) -> Option<(FormalBall, FormalBall)> {
    let (d, rho) = split_metric(x, y, &c.metric)?;
    let (p, q) = product_split(x, y, &c.center)?;
    Some((FormalBall { metric: d, center: p, radius: c.radius.clone() }, FormalBall { metric: rho, center: q, radius: c.radius.clone() }))
}

pub fn join_ball(x: &Gus, y: &Gus, a: &FormalBall, b: &FormalBall, radius: Rational) -> FormalBall {
    FormalBall { metric: join_metric(&a.metric, &b.metric), center: product_join(x, y, &a.center, &b.center), radius }
}

pub fn product_iso_witnesses(x: &Gus, y: &Gus) -> Result<ProductIso, GusError> {
    let product = crate::gus::gus_product(x, y)?;
    let proj = |left: bool| {
        let (x1, y1, x2, y2, x3, y3) = (x.clone(), y.clone(), x.clone(), y.clone(), x.clone(), y.clone());
        let name = if left { "r_X" } else { "r_Y" };
        TopologyMap::new(name, move |c: &FormalBall, a: &FormalBall| {
            split_ball(&x1, &y1, c).is_some_and(|(p, q)| lt(if left { &x1 } else { &y1 }, if left { &p } else { &q }, a))
        })
        .with_forward(move |c, n| {
            let Some((p, q)) = split_ball(&x2, &y2, c) else { return vec![] };
            let b = if left { p } else { q };
            (0..=n + 2).map(|j| b.with_radius(&b.radius + dyadic(j))).collect()
        })
        .with_fiber(move |a, n| {
            let other = if left { &y3 } else { &x3 };
            let (first, rest) = match other.sample(0).into_iter().next() {
                Some(p) => (p, other.full_metric()),
                None => return vec![],
            };
            let own = if left { &x3 } else { &y3 };
            let other_ball = FormalBall { metric: rest, center: first, radius: int(1) };
            wb_enumerate(own, a, n.min(2))
                .into_iter()
                .map(|s| {
                    let r = s.radius.clone();
                    if left {
                        join_ball(&x3, &y3, &s, &other_ball, r)
                    } else {
                        join_ball(&x3, &y3, &other_ball, &s, r)
                    }
                })
                .collect()
        })
    };
    let r_x = proj(true);
    let r_y = proj(false);
    let (x1, y1, x2, y2, x3, y3) = (x.clone(), y.clone(), x.clone(), y.clone(), x.clone(), y.clone());
    let r = TopologyMap::new("r", move |ab: &(FormalBall, FormalBall), c: &FormalBall| {
        let Some((p, q)) = split_ball(&x1, &y1, c) else { return false };
        lt(&x1, &ab.0, &p) && lt(&y1, &ab.1, &q)
    })
    .with_forward(move |(a, b), n| {
        let r0 = a.radius.clone().max(b.radius.clone());
        (0..=n + 2).map(|j| join_ball(&x2, &y2, a, b, &r0 + dyadic(j))).collect()
    })
    .with_fiber(move |c, n| {
        let Some((p, q)) = split_ball(&x3, &y3, c) else { return vec![] };
        (1..=n + 1).map(|j| (p.with_radius(&p.radius * (int(1) - dyadic(j))), q.with_radius(&q.radius * (int(1) - dyadic(j))))).collect()
    });
    Ok(ProductIso { x: x.clone(), y: y.clone(), product, r_x, r_y, r })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoReport {
    pub elements: usize,
    pub checks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoViolation {
    pub equation: String,
    pub element: String,
    pub detail: String,
}

fn violation(eq: &str, el: impl std::fmt::Display, detail: &str) -> IsoViolation {
    IsoViolation { equation: eq.into(), element: el.to_string(), detail: detail.into() }
}

/// Checks `r ∘ ⟨r_X, r_Y⟩ = id` on `samples` product balls and
/// `⟨r_X, r_Y⟩ ∘ r = id` on `samples` pairs. Each side checks that related
/// elements are below, and constructs for every sampled member of the
/// shrinking cover an intermediate element relating it to the target.
pub fn iso_equations(iso: &ProductIso, samples: usize, budget: u32) -> Verdict<IsoReport, IsoViolation> {
    let (x, y, xy) = (&iso.x, &iso.y, &iso.product);
    let mut checks = 0;
    let per = (budget as usize).clamp(1, 3);
    let left = "r∘⟨r_X,r_Y⟩";
    for c in spread(base_sample(xy, 0), samples) {
        for e in wb_enumerate(xy, &c, 1).into_iter().take(per) {
            let Some(mid) = interpolate(xy, &e, &c, ORDER_PRECISION) else {
                return Verdict::Unknown { budget };
            };
            let Some((a, b)) = split_ball(x, y, &mid) else {
                return Verdict::Refuted(violation(left, &c, "metric does not split"));
            };
            checks += 1;
            if !(iso.r_x.relates(&e, &a) && iso.r_y.relates(&e, &b) && iso.r.relates(&(a, b), &c)) {
                return Verdict::Refuted(violation(left, &c, &format!("no path through the interpolant for {e}")));
            }
            if !le(xy, &e, &c) {
                return Verdict::Refuted(violation(left, &c, &format!("{e} related but not below")));
            }
        }
    }
    let right = "⟨r_X,r_Y⟩∘r";
    let xs = spread(base_sample(x, 0), samples);
    let ys = spread(base_sample(y, 0), samples);
    for (a2, b2) in xs.iter().zip(ys.iter().rev()) {
        let wa: Vec<FormalBall> = wb_enumerate(x, a2, 1).into_iter().take(per).collect();
        let wb: Vec<FormalBall> = wb_enumerate(y, b2, 1).into_iter().take(per).collect();
        for a in &wa {
            for b in &wb {
                let (Some(ga), Some(gb)) = (gap(x, a, a2), gap(y, b, b2)) else {
                    return Verdict::Unknown { budget };
                };
                let eta = ga.min(gb) / int(2);
                let zs = uniform_below(x, &a.metric, &eta, a).sample(0).items;
                let ws = uniform_below(y, &b.metric, &eta, b).sample(0).items;
                for (z, w) in zs.iter().take(per).zip(ws.iter().take(per)) {
                    checks += 1;
                    let c = join_ball(x, y, z, w, &eta * int(3) / int(2));
                    let pair = (z.clone(), w.clone());
                    if !(iso.r.relates(&pair, &c) && iso.r_x.relates(&c, a2) && iso.r_y.relates(&c, b2)) {
                        return Verdict::Refuted(violation(right, format!("({a2}, {b2})"), &format!("no path through {c}")));
                    }
                    if !(le(x, z, a2) && le(y, w, b2)) {
                        return Verdict::Refuted(violation(right, format!("({a2}, {b2})"), "related pair not below"));
                    }
                }
            }
        }
    }
    Verdict::Proved(IsoReport { elements: 2 * samples, checks })
}

/// `r_{a'} - ρ(x_{a'}, x_a) - r_a`, from an upper bound on the distance.
fn gap(g: &Gus, a: &FormalBall, a2: &FormalBall) -> Option<Rational> {
    let Bound::Finite(u) = g.dist(&a2.metric, &a2.center, &a.center).ok()?.upper(24) else { return None };
    let s = &a2.radius - u - &a.radius;
    s.is_positive().then_some(s)
}

/// `k` elements spread evenly over `v`.
fn spread<T: Clone>(v: Vec<T>, k: usize) -> Vec<T> {
    if v.len() <= k || k == 0 {
        return v;
    }
    (0..k).map(|i| v[i * v.len() / k].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deciders::{decide_interval_cover, formal_reals, Interval};
    use crate::ftop::{check_splitting, cover_check, map_compose, map_equal, replay, saturate_finite};
    use crate::gus::{make_space, BoxMetric, SpaceKind};
    use crate::numeric::rat;

    fn line() -> Gus {
        make_space(&SpaceKind::RationalLine).unwrap()
    }

    fn b1(c: Rational, r: Rational) -> FormalBall {
        FormalBall::new(MetricId::single("d"), Point::Num(c), r).unwrap()
    }

    #[test]
    fn line_completion_matches_formal_reals() {
        let g = line();
        let u = completion_topology(&g, false).topology;
        let reals = formal_reals();
        let iv = |b: &FormalBall| {
            let c = b.center.as_num().unwrap();
            Interval::new(c - &b.radius, c + &b.radius)
        };
        let cases = vec![
            (b1(int(0), int(1)), vec![b1(rat(-1, 2), rat(3, 4)), b1(rat(1, 2), rat(3, 4))]),
            (b1(int(0), int(1)), vec![b1(int(-1), int(1)), b1(int(1), int(1))]),
            (b1(int(0), int(2)), vec![b1(int(0), int(1))]),
            (b1(int(0), int(1)), vec![b1(rat(1, 4), int(2))]),
        ];
        for (a, us) in cases {
            let ivs: Vec<Interval> = us.iter().map(iv).collect();
            let expect = decide_interval_cover(&iv(&a), &ivs).unwrap().is_proved();
            let j = cover_check(&u, &a, &Subset::listed(us.clone()), 8);
            assert_eq!(j.is_proved(), expect, "{a}");
            assert_eq!(j.is_refuted(), !expect, "{a}");
            assert_eq!(cover_check(&reals, &iv(&a), &Subset::listed(ivs), 8).is_proved(), expect);
        }
    }

    #[test]
    fn positivity_is_the_full_base() {
        let u = completion_topology(&line(), false).topology;
        assert!(check_splitting(&u, &Subset::pred(|_| true), 1).is_proved());
    }

    #[test]
    fn shrink_axiom_cover_replays() {
        let g = line();
        let u = completion_topology(&g, true).topology;
        for a in base_sample(&g, 0).into_iter().step_by(7) {
            let w = wb_subset(&g, &a);
            let d = cover_check(&u, &a, &w, 2).proved().unwrap();
            replay(&u, &a, &w, &d).unwrap();
            assert!(wb_enumerate(&g, &a, 2).iter().all(|b| lt(&g, b, &a)));
        }
        let a = b1(int(0), int(1));
        assert!(rc_enumerate(&a, 2).contains(&b1(int(0), rat(1, 2))));
    }

    #[test]
    fn variants_agree_on_truncations() {
        let g = make_space(&SpaceKind::FiniteDiscrete {
            points: vec!["p".into(), "q".into()],
            table: vec![vec![Some("0".into()), Some("1".into())], vec![Some("1".into()), Some("0".into())]],
        })
        .unwrap();
        let d = MetricId::single("d");
        let universe: Vec<FormalBall> = g
            .sample(0)
            .into_iter()
            .flat_map(|p| [rat(1, 2), int(1), int(2)].map(|r| FormalBall { metric: d.clone(), center: p.clone(), radius: r }))
            .collect();
        let plain = completion_topology(&g, false).truncated(universe.clone(), 2);
        let local = completion_topology(&g, true).truncated(universe.clone(), 2);
        for mask in 0u32..(1 << universe.len()) {
            let u: Vec<FormalBall> = (0..universe.len()).filter(|k| mask & (1 << k) != 0).map(|k| universe[k].clone()).collect();
            let s = Subset::listed(u);
            assert_eq!(saturate_finite(&plain, &s).unwrap(), saturate_finite(&local, &s).unwrap());
        }
    }

    #[test]
    fn shift_map() {
        let g = line();
        let f = FunctionData::new("shift", |p| Point::Num(p.as_num().unwrap() + int(1)));
        let r = map_of_function(&f, &g, &g, MapMode::Hom, 2).unwrap();
        assert!(r.relates(&b1(int(0), int(1)), &b1(int(1), int(2))));
        assert!(!r.relates(&b1(int(0), int(1)), &b1(int(1), int(1))));
        let double = FunctionData::new("double", |p| Point::Num(p.as_num().unwrap() * int(2)));
        assert!(matches!(map_of_function(&double, &g, &g, MapMode::Hom, 2), Err(CompletionError::NotHomomorphism(_))));
        assert!(matches!(map_of_function(&f, &g, &g, MapMode::Continuous, 2), Err(CompletionError::NoModulus(_))));
    }

    #[test]
    fn identity_and_composition_laws() {
        let g = line();
        let u = completion_topology(&g, false).topology;
        let id = FunctionData::new("id", |p| p.clone());
        let rid = map_of_function(&id, &g, &g, MapMode::Hom, 2).unwrap();
        assert!(map_equal(&rid, &TopologyMap::identity(), &u, &u, 2).is_proved());
        let f = FunctionData::new("f", |p| Point::Num(p.as_num().unwrap() + int(1)));
        let gf = FunctionData::new("gf", |p| Point::Num(p.as_num().unwrap() + int(1)));
        let rf = map_of_function(&f, &g, &g, MapMode::Hom, 2).unwrap();
        let rgf = map_of_function(&gf, &g, &g, MapMode::Hom, 2).unwrap();
        let comp = map_compose(&rf, &rid, &u, 4);
        assert!(map_equal(&rgf, &comp, &u, &u, 4).is_proved());
    }

    #[test]
    fn square_on_the_unit_interval() {
        let g = make_space(&SpaceKind::UnitInterval).unwrap();
        let sq = FunctionData::polynomial(Polynomial(vec![int(0), int(0), int(1)]), MetricId::single("d"));
        let a = b1(int(0), rat(1, 2));
        assert_eq!(continuous_witness(&sq, &g, &g, &a, &a), Some(b1(int(0), rat(1, 3))));
        let r = map_of_function(&sq, &g, &g, MapMode::Continuous, 2).unwrap();
        assert!(r.relates(&a, &a));
        assert!(!r.relates(&b1(int(1), rat(1, 2)), &b1(int(1), rat(1, 2))));
        assert_eq!(enclose(&Polynomial(vec![int(0), int(0), int(1)]), &int(0), &rat(1, 2)), (int(0), rat(1, 4)));
    }

    #[test]
    fn hom_and_continuous_modes_agree() {
        let g = make_space(&SpaceKind::UnitInterval).unwrap();
        let half = FunctionData::polynomial(Polynomial(vec![int(0), rat(1, 2)]), MetricId::single("d"));
        let u = completion_topology(&g, false).topology;
        let h = map_of_function(&half, &g, &g, MapMode::Hom, 2).unwrap();
        let c = map_of_function(&half, &g, &g, MapMode::Continuous, 2).unwrap();
        assert!(map_equal(&h, &c, &u, &u, 3).is_proved());
    }

    #[test]
    fn sq_examples() {
        let g = line();
        let (a, b) = (b1(int(0), int(1)), b1(rat(1, 4), int(2)));
        let c = sq_below(&g, std::slice::from_ref(&a), std::slice::from_ref(&b), 8).unwrap().proved().unwrap();
        replay_sq(&g, std::slice::from_ref(&a), std::slice::from_ref(&b), &c).unwrap();
        let t = completion_topology(&g, false).topology;
        assert!(cover_check(&t, &a, &Subset::listed([b]), 8).is_proved());
        let w = sq_below(&g, &[b1(int(0), int(2))], &[b1(int(0), int(1))], 8).unwrap().refuted().unwrap();
        assert_eq!(w, Point::Num(rat(3, 2)));
    }

    #[test]
    fn scales_and_well_inside() {
        let g = line();
        let s = scale_between(&g, &b1(int(0), rat(1, 2)), &b1(int(0), int(1))).unwrap();
        let ts: Vec<Rational> = (0..=8).map(|k| rat(k, 8)).collect();
        for w in ts.windows(2) {
            assert!(lt(&g, &s.at(&w[0]).unwrap(), &s.at(&w[1]).unwrap()));
        }
        assert_eq!(s.at(&int(1)).unwrap(), b1(int(0), int(1)));
        assert!(s.at(&int(2)).is_none());
        let a = b1(int(0), int(1));
        for b in rc_enumerate(&a, 2) {
            assert!(well_inside(&g, &b, &a, 2).is_proved(), "{b}");
        }
    }

    #[test]
    fn w_member_examples() {
        let g = line();
        assert_eq!(w_member(&g, &[b1(int(0), int(1))], 2).proved(), Some(Point::Num(int(0))));
        assert_eq!(w_member(&g, &[b1(int(0), int(1)), b1(int(3), int(1))], 2).refuted(), Some((0, 1)));
        let plane = make_space(&SpaceKind::RationalBox { dim: 2, metric: BoxMetric::Both, bounds: None }).unwrap();
        let e = FormalBall::new(MetricId::single("euclid"), Point::from_coords(vec![int(0), int(0)]), int(1)).unwrap();
        let s = FormalBall::new(MetricId::single("sup"), Point::from_coords(vec![rat(1, 2), int(0)]), int(1)).unwrap();
        assert_eq!(w_member(&plane, &[e, s], 2).proved(), Some(Point::from_coords(vec![rat(1, 4), int(0)])));
    }

    #[test]
    fn product_of_lines() {
        let g = line();
        let iso = product_iso_witnesses(&g, &g).unwrap();
        let c = join_ball(&g, &g, &b1(int(0), int(1)), &b1(int(5), int(1)), int(1));
        assert_eq!(split_ball(&g, &g, &c), Some((b1(int(0), int(1)), b1(int(5), int(1)))));
        assert!(iso.r_x.relates(&c, &b1(int(0), int(2))));
        assert!(!iso.r_x.relates(&c, &b1(int(0), int(1))));
        let v = iso_equations(&iso, 10, 4);
        assert!(v.is_proved(), "{v:?}");
    }
}
