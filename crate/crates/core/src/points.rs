//! Formal points of `U(X)` as Cauchy approximants: a point answers each
//! query `(d, ε)` with a center `x` such that `b_d(x, ε)` belongs to it.

use std::fmt;
use std::sync::Arc;

use num_integer::Roots;
use num_traits::Zero;

use crate::ftop::TopologyMap;
use crate::gus::{ball_contains, Carrier, FormalBall, GenGeom, Gus, GusError, MetricId, Point};
use crate::numeric::{dyadic, int, Bound, Rational};
use crate::verdict::Verdict;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PointError {
    #[error("sequence violates its modulus: {0}")]
    IncoherentSequence(String),
    #[error("no approximant found within budget {0}")]
    BudgetExhausted(u32),
    #[error("point {0} is not in the carrier")]
    NotInCarrier(String),
    #[error(transparent)]
    Space(#[from] GusError),
}

type ApproxFn = Arc<dyn Fn(&MetricId, &Rational) -> Result<Point, PointError> + Send + Sync>;

/// A formal point given by its approximants.
#[derive(Clone)]
pub struct PointApprox {
    pub space: Gus,
    pub label: String,
    approx: ApproxFn,
}

impl fmt::Debug for PointApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointApprox({})", self.label)
    }
}

impl PointApprox {
    pub fn new(
        space: &Gus,
        label: &str,
        approx: impl Fn(&MetricId, &Rational) -> Result<Point, PointError> + Send + Sync + 'static,
    ) -> Self {
        PointApprox { space: space.clone(), label: label.to_string(), approx: Arc::new(approx) }
    }

    /// A center `x` with `b_d(x, ε)` in the point.
    pub fn approx(&self, d: &MetricId, eps: &Rational) -> Result<Point, PointError> {
        (self.approx)(d, eps)
    }

    /// The member ball `b_d(x, ε)` answering the query.
    pub fn ball(&self, d: &MetricId, eps: &Rational) -> Result<FormalBall, PointError> {
        Ok(FormalBall { metric: d.clone(), center: self.approx(d, eps)?, radius: eps.clone() })
    }
}

/// `◇x`.
pub fn point_of_element(g: &Gus, x: &Point) -> Result<PointApprox, PointError> {
    if !g.contains_point(x) {
        return Err(PointError::NotInCarrier(x.to_string()));
    }
    let p = x.clone();
    Ok(PointApprox::new(g, &x.to_string(), move |_, _| Ok(p.clone())))
}

type Seq = Arc<dyn Fn(u32) -> Point + Send + Sync>;
type Modulus = Arc<dyn Fn(u32) -> u32 + Send + Sync>;

/// How many modulus steps are cross-checked when building a sequence point.
const MODULUS_CHECKS: u32 = 8;

/// The point of a regular sequence: `d(s(M(m)), s(M(n))) ≤ 2^(1-min(m,n))`
/// for every generator `d`, with `M` the identity when omitted. The query
/// `(d, ε)` is answered by `s(M(k))` for the least `k` with `2^(2-k) < ε`.
/// The modulus is checked on the first steps.
pub fn point_of_cauchy(
    g: &Gus,
    label: &str,
    seq: impl Fn(u32) -> Point + Send + Sync + 'static,
    modulus: Option<Modulus>,
) -> Result<PointApprox, PointError> {
    let seq: Seq = Arc::new(seq);
    let m: Modulus = modulus.unwrap_or_else(|| Arc::new(|k| k));
    let terms: Vec<Point> = (0..=MODULUS_CHECKS).map(|k| seq(m(k))).collect();
    for (k, t) in terms.iter().enumerate() {
        if !g.contains_point(t) {
            return Err(PointError::NotInCarrier(t.to_string()));
        }
        for (j, u) in terms.iter().enumerate().skip(k + 1) {
            let bound = &int(2) * dyadic(k as u32);
            for gen in g.generators() {
                let d = g.dist(&MetricId::single(&gen.id), t, u)?;
                if d.lower(32) > Bound::Finite(bound.clone()) {
                    return Err(PointError::IncoherentSequence(format!("{} between steps {k} and {j}", gen.id)));
                }
            }
        }
    }
    Ok(PointApprox::new(g, label, move |_, eps| {
        let k = (0..).find(|&k| dyadic(k) * int(4) < *eps).expect("ε > 0");
        Ok(seq(m(k)))
    }))
}

/// Newton iterates `x_{n+1} = (x_n + s/x_n)/2` from `max(⌊√s⌋, 1)`; the
/// error after `n` steps is at most `2^(1-2^n)`.
pub fn newton_sqrt(s: u64) -> (impl Fn(u32) -> Point + Send + Sync + 'static, Modulus) {
    let s_q = int(s as i64);
    let start = int((s.sqrt()).max(1) as i64);
    let seq = move |n: u32| {
        if s == 0 {
            return Point::Num(Rational::zero());
        }
        let mut x = start.clone();
        for _ in 0..n {
            x = (&x + &s_q / &x) / int(2);
        }
        Point::Num(x)
    };
    let modulus: Modulus = Arc::new(|k| (1..).find(|&n: &u32| n >= 32 || (1u64 << n) > k as u64).unwrap());
    (seq, modulus)
}

/// `√s` as a formal point of `U(ℚ)`.
pub fn sqrt_point(g: &Gus, s: u64) -> Result<PointApprox, PointError> {
    let (seq, m) = newton_sqrt(s);
    point_of_cauchy(g, &format!("sqrt({s})"), seq, Some(m))
}

/// `b ∈ α` via `d̃(α, ◇x) < ε`, bracketing the distance from the
/// approximants at `2^-k`. Refutation needs a two-sided symmetric metric.
pub fn member(alpha: &PointApprox, b: &FormalBall, budget: u32) -> Verdict<(), ()> {
    let g = &alpha.space;
    let refutable = g.is_symmetric(&b.metric);
    for k in 0..=budget {
        let e = dyadic(k);
        let Ok(y) = alpha.approx(&b.metric, &e) else { return Verdict::Unknown { budget } };
        let Ok(d) = g.dist(&b.metric, &b.center, &y) else { return Verdict::Unknown { budget } };
        if let Bound::Finite(hi) = d.upper(k + 8) {
            if hi + &e < b.radius {
                return Verdict::Proved(());
            }
        }
        if refutable && d.two_sided() {
            match d.lower(k + 8) {
                Bound::Infinite => return Verdict::Refuted(()),
                Bound::Finite(lo) if &lo - &e >= b.radius => return Verdict::Refuted(()),
                _ => {}
            }
        }
    }
    Verdict::Unknown { budget }
}

/// Upper bound for `d̃(α, β)`: running minimum over `k ≤ n` of the distance
/// between the approximants at `2^-k` plus `2·2^-k`.
pub fn dist_upper(alpha: &PointApprox, beta: &PointApprox, d: &MetricId, n: u32) -> Result<Bound, PointError> {
    let mut best = Bound::Infinite;
    for k in 0..=n {
        let e = dyadic(k);
        let (x, y) = (alpha.approx(d, &e)?, beta.approx(d, &e)?);
        let u = alpha.space.dist(d, &x, &y)?.upper(k);
        best = best.min(u.add(&Bound::Finite(e * int(2))));
    }
    Ok(best)
}

/// Lower bound for `d̃(α, β)` on two-sided metrics: running maximum of the
/// lower bounds minus `2·2^-k`, floored at zero.
pub fn dist_lower(alpha: &PointApprox, beta: &PointApprox, d: &MetricId, n: u32) -> Result<Option<Rational>, PointError> {
    let mut best = Rational::zero();
    for k in 0..=n {
        let e = dyadic(k);
        let (x, y) = (alpha.approx(d, &e)?, beta.approx(d, &e)?);
        let dist = alpha.space.dist(d, &x, &y)?;
        if !dist.two_sided() {
            return Ok(None);
        }
        if let Bound::Finite(lo) = dist.lower(k) {
            best = best.max(lo - e * int(2));
        }
    }
    Ok(Some(best))
}

/// `Pt(r)(α)`: the query `(ρ, δ)` is answered by the largest-radius image
/// `b' ≤ b_ρ(y, δ)` of a member ball `b_d(α(d, 2^-k), 2^-k)`, searching
/// `k` upwards.
pub fn pt_map_apply(r: &TopologyMap<FormalBall, FormalBall>, target: &Gus, alpha: &PointApprox, budget: u32) -> PointApprox {
    let (r, a) = (r.clone(), alpha.clone());
    let src_metrics = alpha.space.metric_ids();
    PointApprox::new(target, &format!("{}({})", r.name, alpha.label), move |rho, delta| {
        for k in 0..=budget {
            let e = dyadic(k);
            for d in &src_metrics {
                let ball = a.ball(d, &e)?;
                let mut cands: Vec<FormalBall> = r
                    .forward_sample(None, &ball, budget)
                    .items
                    .into_iter()
                    .filter(|b| rho.below(&b.metric) && &b.radius <= delta)
                    .collect();
                cands.sort_by(|x, y| y.radius.cmp(&x.radius).then(x.cmp(y)));
                if let Some(b) = cands.into_iter().next() {
                    return Ok(b.center);
                }
            }
        }
        Err(PointError::BudgetExhausted(budget))
    })
}

/// Balls around `x` at radii `2^-k`: centered at `x`, and on numeric
/// carriers also shifted by `3/4` and `5/4` of the radius.
pub fn ball_schedule(g: &Gus, x: &Point, count: usize) -> Vec<FormalBall> {
    let metrics = g.metric_ids();
    let mut out = Vec::new();
    let mut k = 0u32;
    while out.len() < count {
        let r = dyadic(k);
        for m in &metrics {
            out.push(FormalBall { metric: m.clone(), center: x.clone(), radius: r.clone() });
            if let Some(v) = x.as_num() {
                for s in [Rational::new(3.into(), 4.into()), Rational::new(5.into(), 4.into())] {
                    out.push(FormalBall { metric: m.clone(), center: Point::Num(v + &r * s), radius: r.clone() });
                }
            }
        }
        k += 1;
    }
    out.truncate(count);
    out
}

/// Compares `α`-membership with `◇x`-membership on the ball schedule.
/// Refutes with a ball on which they disagree.
pub fn convergence_check(alpha: &PointApprox, x: &Point, budget: u32) -> Verdict<(), FormalBall> {
    let g = &alpha.space;
    let mut unknown = false;
    for b in ball_schedule(g, x, 2 * (budget as usize + 1)) {
        let here = ball_contains(g, &b, x, budget + 16);
        let there = member(alpha, &b, budget + 16);
        match (here, there) {
            (Verdict::Proved(_), Verdict::Refuted(_)) | (Verdict::Refuted(_), Verdict::Proved(_)) => return Verdict::Refuted(b),
            (Verdict::Unknown { .. }, _) | (_, Verdict::Unknown { .. }) => unknown = true,
            _ => {}
        }
    }
    if unknown {
        Verdict::Unknown { budget }
    } else {
        Verdict::Proved(())
    }
}

/// Whether `i_X` is injective: a pair of distinct points at distance zero
/// for every generator refutes. Finite carriers are decided; boxes whose
/// generators are coordinate norms are separated.
pub fn separated_check(g: &Gus, samples: u32) -> Verdict<(), (Point, Point)> {
    let zero = |x: &Point, y: &Point| {
        g.generators().iter().all(|gen| {
            g.dist(&MetricId::single(&gen.id), x, y).is_ok_and(|d| d.exact_value() == Some(Bound::Finite(Rational::zero())))
        })
    };
    let pts = g.sample(samples);
    for (i, x) in pts.iter().enumerate() {
        for y in &pts[i + 1..] {
            if x != y && zero(x, y) && zero(y, x) {
                return Verdict::Refuted((x.clone(), y.clone()));
            }
        }
    }
    match g.carrier() {
        Carrier::Finite(_) => Verdict::Proved(()),
        Carrier::Box(spans) => {
            let covered: std::collections::BTreeSet<usize> = g
                .generators()
                .iter()
                .flat_map(|gen| match &gen.geometry {
                    Some(GenGeom::Euclid) => (0..spans.len()).collect::<Vec<_>>(),
                    Some(GenGeom::CoordMax(s)) => s.iter().copied().collect(),
                    None => vec![],
                })
                .collect();
            if covered.len() == spans.len() {
                Verdict::Proved(())
            } else {
                Verdict::Unknown { budget: samples }
            }
        }
        Carrier::Opaque { .. } => Verdict::Unknown { budget: samples },
    }
}

/// Filter conditions of the balls of `α` on sampled queries: the answers
/// are members, members are upward closed under `≤_X`, and two answers
/// share a member below both. Refutes with a description.
pub fn check_filter(alpha: &PointApprox, budget: u32) -> Verdict<usize, String> {
    let g = &alpha.space;
    let metrics = g.metric_ids();
    let mut checked = 0;
    let mut balls = Vec::new();
    for d in &metrics {
        for k in 0..=budget.min(6) {
            match alpha.ball(d, &dyadic(k)) {
                Ok(b) => balls.push(b),
                Err(e) => return Verdict::Refuted(e.to_string()),
            }
        }
    }
    for b in &balls {
        checked += 1;
        if member(alpha, b, budget + 16).is_refuted() {
            return Verdict::Refuted(format!("answer {b} is not a member"));
        }
        let bigger = b.with_radius(&b.radius * int(2));
        if member(alpha, &bigger, budget + 16).is_refuted() {
            return Verdict::Refuted(format!("{bigger} above member {b} is not a member"));
        }
    }
    for a in &balls {
        for b in &balls {
            checked += 1;
            let m = a.metric.union(&b.metric);
            let small = a.radius.clone().min(b.radius.clone()) * dyadic(3);
            let Ok(c) = alpha.ball(&m, &small) else { return Verdict::Refuted("no common refinement".into()) };
            let below = |x: &FormalBall| crate::gus::ball_order(g, &c, x, false, 32);
            if below(a).is_refuted() || below(b).is_refuted() {
                return Verdict::Refuted(format!("{c} is not below both {a} and {b}"));
            }
        }
    }
    Verdict::Proved(checked)
}
