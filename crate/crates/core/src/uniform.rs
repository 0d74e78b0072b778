//! The standard uniform formal topology on the ball base: stars, star
//! refinement, the uniformly-below relation `≺`, the completion cover `◁̄`
//! and the comparison relation `r_X` with the localic completion.
//!
//! Positivity of `b ↓ a` is read as "the extents meet", since every ball
//! with inhabited interior is positive here. The quantifier over all
//! centers in `≺` is only settled with exact geometry.

use serde::{Deserialize, Serialize};

use crate::gus::{
    ball_meets, ball_order, ball_subset, Carrier, CellProof, FormalBall, Gus, GusError, MetricId, OrderCertificate,
    Point, RegionOracle,
};
use crate::numeric::{dyadic, int, serde_rational, Bound, Rational};
use crate::verdict::Verdict;

/// Membership of a ball in `C_d^ε = {b_d(x, ε) | x ∈ X}`.
fn in_cover(c: &FormalBall, d: &MetricId, eps: &Rational) -> bool {
    &c.metric == d && &c.radius == eps
}

/// `S_X` with the uniformity `{C_d^ε}`.
#[derive(Clone, Debug)]
pub struct UniformFTop {
    pub space: Gus,
}

impl UniformFTop {
    pub fn new(space: &Gus) -> Result<Self, GusError> {
        space.require_oracle()?;
        Ok(UniformFTop { space: space.clone() })
    }

    /// `a ⪯_X b`, i.e. `a_* ⊆ b_*`.
    pub fn below(&self, a: &FormalBall, b: &FormalBall, budget: u32) -> Result<Verdict<(), Point>, GusError> {
        ball_subset(&self.space, a, b, budget)
    }

    /// Every sample point lies in the ball of the ε-net nearest to it.
    pub fn net_check(&self, d: &MetricId, eps: &Rational, samples: u32) -> Result<Verdict<(), Point>, GusError> {
        let g = &self.space;
        let net = crate::gus::eps_net(g, d, eps)?;
        for x in g.sample(samples) {
            let hit = net.iter().any(|y| g.dist(d, y, &x).is_ok_and(|v| v.lt(eps, 32).is_proved()));
            if !hit {
                return Ok(Verdict::Refuted(x));
            }
        }
        Ok(Verdict::Proved(()))
    }

    pub fn st_member(&self, c: &FormalBall, cover: (&MetricId, &Rational), a: &FormalBall, budget: u32) -> Result<Verdict<Point, ()>, GusError> {
        st_member(&self.space, c, cover, a, budget)
    }
}

/// `c ∈ St_C(a)` for `C = C_d^ε`: the extents of `c` and `a` meet.
pub fn st_member(g: &Gus, c: &FormalBall, cover: (&MetricId, &Rational), a: &FormalBall, budget: u32) -> Result<Verdict<Point, ()>, GusError> {
    if !in_cover(c, cover.0, cover.1) {
        return Err(GusError::InvalidParams(format!("{c} is not a member of the cover")));
    }
    ball_meets(g, c, a, budget)
}

/// Why `C_fine <* C_coarse` holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StarProof {
    /// Every star of `b_d(z, ε)` lies in `B_d(z, 3ε) ⊆ B_ρ(z, δ)`.
    Triple,
    /// Each star of the finite carrier checked against some coarse ball.
    Enumerated { stars: usize },
}

/// A fine ball whose star fits under no coarse member, with two points of
/// the star.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarFailure {
    pub ball: FormalBall,
    pub points: (Point, Point),
}

/// `C_d^ε <* C_ρ^δ`: every star of the fine cover is `⪯_X`-below one coarse
/// member.
pub fn star_refines(
    g: &Gus,
    fine: (&MetricId, &Rational),
    coarse: (&MetricId, &Rational),
    budget: u32,
) -> Result<Verdict<StarProof, StarFailure>, GusError> {
    g.require_oracle()?;
    g.check_metric(fine.0)?;
    g.check_metric(coarse.0)?;
    let (d, eps) = fine;
    let (rho, delta) = coarse;
    let ball = |m: &MetricId, x: &Point, r: &Rational| FormalBall { metric: m.clone(), center: x.clone(), radius: r.clone() };
    if let Carrier::Finite(pts) = g.carrier() {
        let mut unknown = false;
        for z in pts {
            let a = ball(d, z, eps);
            let mut star = Vec::new();
            for y in pts {
                let c = ball(d, y, eps);
                match ball_meets(g, &c, &a, budget)? {
                    Verdict::Proved(_) => star.push(c),
                    Verdict::Refuted(()) => {}
                    Verdict::Unknown { .. } => unknown = true,
                }
            }
            let mut found = false;
            for w in pts {
                let big = ball(rho, w, delta);
                let mut all = true;
                for c in &star {
                    all &= ball_subset(g, c, &big, budget)?.is_proved();
                }
                if all {
                    found = true;
                    break;
                }
            }
            if !found && !unknown {
                let pick = star.first().map(|c| c.center.clone()).unwrap_or_else(|| z.clone());
                return Ok(Verdict::Refuted(StarFailure { ball: a, points: (z.clone(), pick) }));
            }
            if !found {
                return Ok(Verdict::Unknown { budget });
            }
        }
        return Ok(if unknown { Verdict::Unknown { budget } } else { Verdict::Proved(StarProof::Enumerated { stars: pts.len() }) });
    }
    if g.is_symmetric(d) && rho.below(d) && &(eps * int(3)) <= delta {
        return Ok(Verdict::Proved(StarProof::Triple));
    }
    if g.is_symmetric(rho) && g.dim().is_some() {
        // two star centers at ρ-distance ≥ 2δ fit in no δ-ball
        for z in g.sample(budget.min(4)) {
            let a = ball(d, &z, eps);
            let mut centers = vec![z.clone()];
            for t in -3..=3i64 {
                let mut c = z.coords();
                c[0] += eps * Rational::new(t.into(), 2.into());
                let y = Point::from_coords(c);
                if g.contains_point(&y) && ball_meets(g, &ball(d, &y, eps), &a, budget)?.is_proved() {
                    centers.push(y);
                }
            }
            for p in &centers {
                for q in &centers {
                    let far = g.dist(rho, p, q)?.lower(32);
                    if far >= Bound::Finite(delta * int(2)) {
                        return Ok(Verdict::Refuted(StarFailure { ball: a, points: (p.clone(), q.clone()) }));
                    }
                }
            }
        }
    }
    Ok(Verdict::Unknown { budget })
}


/// Evidence for `a ≺_X b`: every `c ∈ C_d^ε` meeting `a` lies in `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecCertificate {
    pub metric: MetricId,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
}

fn one_dimensional(g: &Gus) -> bool {
    g.dim() == Some(1) && g.generators().iter().all(|gen| gen.geometry.is_some() && gen.symmetric)
}

/// `a ≺_X b` over the schedule `ε = 2^-k`, `k ≤ budget`.
///
/// On boxes the test for `(d, ε)` with `d = a`'s metric is
/// `B_d(x, r + 2ε) ⊆ b_*`, exact for norms on convex carriers. Finite
/// carriers are enumerated. Refutation (for every `ε`) is available on
/// finite carriers and on the line, with a witness the bad centers
/// accumulate at.
pub fn prec(g: &Gus, a: &FormalBall, b: &FormalBall, budget: u32) -> Result<Verdict<PrecCertificate, Point>, GusError> {
    let oracle = g.require_oracle()?;
    if !oracle.exact() {
        return Err(GusError::OracleMissing);
    }
    g.check_metric(&a.metric)?;
    g.check_metric(&b.metric)?;
    if let Carrier::Finite(pts) = g.carrier() {
        return prec_finite(g, pts, a, b, budget);
    }
    if one_dimensional(g) {
        if let Some(w) = prec_line_obstruction(g, a, b) {
            return Ok(Verdict::Refuted(w));
        }
    }
    if !g.is_symmetric(&a.metric) {
        return Ok(Verdict::Unknown { budget });
    }
    for k in 0..=budget {
        let eps = dyadic(k);
        let grown = a.with_radius(&a.radius + &eps * int(2));
        if ball_subset(g, &grown, b, budget)?.is_proved() {
            return Ok(Verdict::Proved(PrecCertificate { metric: a.metric.clone(), eps }));
        }
    }
    Ok(Verdict::Unknown { budget })
}

/// On the line, `≺` fails for every `ε` exactly when an end of `a_*` reaches
/// an end of `b_*` lying inside the carrier.
fn prec_line_obstruction(g: &Gus, a: &FormalBall, b: &FormalBall) -> Option<Point> {
    let Carrier::Box(spans) = g.carrier() else { return None };
    let (c, r) = (a.center.as_num()?, &a.radius);
    let (bc, br) = (b.center.as_num()?, &b.radius);
    let (b_lo, b_hi) = (bc - br, bc + br);
    let hi_ok = c + r < b_hi || spans[0].hi.as_ref().is_some_and(|h| &b_hi > h);
    let lo_ok = c - r > b_lo || spans[0].lo.as_ref().is_some_and(|l| &b_lo < l);
    if !hi_ok {
        Some(Point::Num(b_hi))
    } else if !lo_ok {
        Some(Point::Num(b_lo))
    } else {
        None
    }
}

fn prec_finite(g: &Gus, pts: &[Point], a: &FormalBall, b: &FormalBall, budget: u32) -> Result<Verdict<PrecCertificate, Point>, GusError> {
    // a center whose ε-ball meets a but escapes b, or None when ε works
    let failure = |m: &MetricId, eps: &Rational| -> Result<Option<Point>, GusError> {
        for x in pts {
            let c = FormalBall { metric: m.clone(), center: x.clone(), radius: eps.clone() };
            if ball_meets(g, &c, a, budget)?.is_proved() && !ball_subset(g, &c, b, budget)?.is_proved() {
                return Ok(Some(x.clone()));
            }
        }
        Ok(None)
    };
    for k in 0..=budget {
        let eps = dyadic(k);
        for m in g.metric_ids() {
            if failure(&m, &eps)?.is_none() {
                return Ok(Verdict::Proved(PrecCertificate { metric: m, eps }));
            }
        }
    }
    // below every positive distance the full metric's balls are as small as they get
    let full = g.full_metric();
    let mut least: Option<Rational> = None;
    for x in pts {
        for y in pts {
            if let Bound::Finite(q) = g.dist(&full, x, y)?.lower(32) {
                if q > Rational::from_integer(0.into()) && least.as_ref().is_none_or(|l| &q < l) {
                    least = Some(q);
                }
            }
        }
    }
    let eps = least.map(|q| crate::numeric::dyadic_below(&q) / int(2)).unwrap_or_else(|| dyadic(budget + 1));
    Ok(match failure(&full, &eps)? {
        Some(x) => Verdict::Refuted(x),
        None => Verdict::Unknown { budget },
    })
}

/// Evidence for `a ◁̄_X U` with `U` finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PfCertificate {
    Member { member: usize },
    /// `a ≺_X u`, hence `a ◁̄ {u}`.
    Prec { member: usize, prec: PrecCertificate },
    /// `a ⪯_X u`.
    Below { member: usize },
    /// `a ◁̄ C_d^ε`, and every member of `C_d^ε` meeting `a` lies in some
    /// `u`: the centers `B(x_a, r_a + ε)` are covered by `U` shrunk by `ε`.
    Uniform(UniformStep),
    /// `a ◁̄ {b | b ≺_X a}` with `a_* ⊆ U_*`: each such `b` has a margin
    /// inside `a`; the step shown is the one for the first shrink of `a`
    /// with a Lebesgue number.
    Interior { inclusion: CellProof, shrunk: FormalBall, step: UniformStep },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformStep {
    pub metric: MetricId,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    /// Indices of the members of `U` that survive shrinking by `ε`.
    pub members: Vec<usize>,
    pub proof: CellProof,
}

fn uniform_metric(a: &FormalBall, u: &[FormalBall]) -> MetricId {
    u.iter().fold(a.metric.clone(), |m, b| m.union(&b.metric))
}

fn shrunk_members(u: &[FormalBall], eps: &Rational) -> (Vec<usize>, Vec<FormalBall>) {
    u.iter()
        .enumerate()
        .filter(|(_, b)| &b.radius > eps)
        .map(|(i, b)| (i, b.with_radius(&b.radius - eps)))
        .unzip()
}

fn uniform_step(g: &Gus, a: &FormalBall, u: &[FormalBall], budget: u32) -> Result<Option<UniformStep>, GusError> {
    let oracle = g.require_oracle()?;
    let metric = uniform_metric(a, u);
    if !g.is_symmetric(&metric) {
        return Ok(None);
    }
    for k in 0..=budget {
        let eps = &a.radius * dyadic(k);
        let (members, shrunk) = shrunk_members(u, &eps);
        let grown = a.with_radius(&a.radius + &eps);
        if let Verdict::Proved(proof) = oracle.cover_inclusion(g, &grown, &shrunk, budget) {
            return Ok(Some(UniformStep { metric, eps, members, proof }));
        }
    }
    Ok(None)
}

fn replay_uniform(g: &Gus, a: &FormalBall, u: &[FormalBall], s: &UniformStep) -> Result<(), String> {
    let oracle = g.require_oracle().map_err(|e| e.to_string())?;
    if s.metric != uniform_metric(a, u) || !g.is_symmetric(&s.metric) {
        return Err("uniform step metric does not dominate the balls".into());
    }
    let (members, shrunk) = shrunk_members(u, &s.eps);
    if members != s.members {
        return Err("uniform step members do not match".into());
    }
    oracle.replay_inclusion(g, &a.with_radius(&a.radius + &s.eps), &shrunk, &s.proof)
}

/// Bounded search for `a ◁̄_X U`: membership, `≺`, `⪯`, a uniform cover
/// with a Lebesgue number, then the interior rule. Refutes with a point of
/// `a_*` outside `U_*`.
pub fn pf_cover_check(g: &Gus, a: &FormalBall, u: &[FormalBall], budget: u32) -> Result<Verdict<PfCertificate, Point>, GusError> {
    let oracle = g.require_oracle()?;
    if !oracle.exact() {
        return Err(GusError::OracleMissing);
    }
    g.check_metric(&a.metric)?;
    for b in u {
        g.check_metric(&b.metric)?;
    }
    if let Some(member) = u.iter().position(|b| b == a) {
        return Ok(Verdict::Proved(PfCertificate::Member { member }));
    }
    for (member, b) in u.iter().enumerate() {
        if ball_order(g, a, b, true, 32).is_proved() {
            if let Verdict::Proved(p) = prec(g, a, b, budget)? {
                return Ok(Verdict::Proved(PfCertificate::Prec { member, prec: p }));
            }
        }
    }
    for (member, b) in u.iter().enumerate() {
        if ball_subset(g, a, b, budget)?.is_proved() {
            return Ok(Verdict::Proved(PfCertificate::Below { member }));
        }
    }
    let inclusion = match oracle.cover_inclusion(g, a, u, budget) {
        Verdict::Proved(p) => p,
        Verdict::Refuted(x) => return Ok(Verdict::Refuted(x)),
        Verdict::Unknown { .. } => return Ok(Verdict::Unknown { budget }),
    };
    if let Some(step) = uniform_step(g, a, u, budget)? {
        return Ok(Verdict::Proved(PfCertificate::Uniform(step)));
    }
    for k in 1..=budget.max(1) {
        let shrunk = a.with_radius(&a.radius - &a.radius * dyadic(k));
        if let Some(step) = uniform_step(g, &shrunk, u, budget)? {
            return Ok(Verdict::Proved(PfCertificate::Interior { inclusion, shrunk, step }));
        }
    }
    Ok(Verdict::Unknown { budget })
}

pub fn replay_pf(g: &Gus, a: &FormalBall, u: &[FormalBall], cert: &PfCertificate) -> Result<(), String> {
    let get = |i: usize| u.get(i).ok_or_else(|| "member out of range".to_string());
    match cert {
        PfCertificate::Member { member } => (get(*member)? == a).then_some(()).ok_or_else(|| "not a member".into()),
        PfCertificate::Prec { member, prec: p } => {
            let b = get(*member)?;
            let grown = a.with_radius(&a.radius + &p.eps * int(2));
            let ok = match g.carrier() {
                Carrier::Finite(_) => prec(g, a, b, 64).map_err(|e| e.to_string())?.is_proved(),
                _ => p.metric == a.metric && ball_subset(g, &grown, b, 64).map_err(|e| e.to_string())?.is_proved(),
            };
            ok.then_some(()).ok_or_else(|| format!("{a} is not uniformly below {b}"))
        }
        PfCertificate::Below { member } => {
            let b = get(*member)?;
            ball_subset(g, a, b, 64).map_err(|e| e.to_string())?.is_proved().then_some(()).ok_or_else(|| format!("{a} is not inside {b}"))
        }
        PfCertificate::Uniform(step) => replay_uniform(g, a, u, step),
        PfCertificate::Interior { inclusion, shrunk, step } => {
            let oracle = g.require_oracle().map_err(|e| e.to_string())?;
            oracle.replay_inclusion(g, a, u, inclusion)?;
            if !ball_order(g, shrunk, a, true, 32).is_proved() {
                return Err("shrink is not strictly below the ball".into());
            }
            replay_uniform(g, shrunk, u, step)
        }
    }
}

/// Evidence for `a r_X b`: `b' <_X b` with `a_* ⊆ b'_*`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RxCertificate {
    pub inner: FormalBall,
    pub order: OrderCertificate,
}

/// `a r_X b`. Candidate `b'` centers are the middle of `a_*`'s bounding
/// box, then `b`'s and `a`'s centers; the radius sits three quarters of the
/// way from the enclosing radius to the largest radius strictly below `b`.
/// Refutes when `a_* ⊄ b_*`.
pub fn r_x(g: &Gus, a: &FormalBall, b: &FormalBall, budget: u32) -> Result<Verdict<RxCertificate, Point>, GusError> {
    g.require_oracle()?;
    if let Verdict::Refuted(x) = ball_subset(g, a, b, budget)? {
        return Ok(Verdict::Refuted(x));
    }
    let bounds = RegionOracle.region(g, a).map(|r| r.bounding()).unwrap_or_default();
    let finite: Option<Vec<(Rational, Rational)>> =
        bounds.iter().map(|iv| Some((iv.lo.v.clone()?, iv.hi.v.clone()?))).collect();
    let mut centers = Vec::new();
    if let Some(f) = finite.as_ref().filter(|f| !f.is_empty()) {
        centers.push(Point::from_coords(f.iter().map(|(l, h)| (l + h) / int(2)).collect()));
    }
    centers.push(b.center.clone());
    centers.push(a.center.clone());
    for c in centers {
        if !g.contains_point(&c) {
            continue;
        }
        let Bound::Finite(off) = g.dist(&b.metric, &b.center, &c)?.upper(32) else { continue };
        let room = &b.radius - off;
        let enclosing = match &finite {
            Some(f) if !f.is_empty() => corners(f)
                .into_iter()
                .map(|p| g.dist(&b.metric, &c, &p).map(|d| d.upper(32)))
                .try_fold(Bound::Finite(Rational::from_integer(0.into())), |m, d| d.map(|d| m.max(d)))?,
            _ => Bound::Finite(a.radius.clone()),
        };
        let Bound::Finite(low) = enclosing else { continue };
        if room <= low {
            continue;
        }
        let inner = FormalBall { metric: b.metric.clone(), center: c, radius: (&low + &room * int(3)) / int(4) };
        if let Verdict::Proved(order) = ball_order(g, &inner, b, true, budget.max(8)) {
            if ball_subset(g, a, &inner, budget)?.is_proved() {
                return Ok(Verdict::Proved(RxCertificate { inner, order }));
            }
        }
    }
    Ok(Verdict::Unknown { budget })
}

fn corners(f: &[(Rational, Rational)]) -> Vec<Point> {
    let mut out: Vec<Vec<Rational>> = vec![vec![]];
    for (l, h) in f {
        out = out.into_iter().flat_map(|p| [l, h].map(|v| [p.clone(), vec![v.clone()]].concat())).collect();
    }
    out.into_iter().map(Point::from_coords).collect()
}
