//! Cover deciders: interval chains for the formal reals, ball covers of
//! locally compact spaces, and finite subcovers of totally bounded ones.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::ftop::{
    AxiomIndex, AxiomSet, Base, CoverDecider, CoverJudgment, Derivation, FormalTopology, PluginCertificate,
    PointWitness, Subset,
};
use crate::gus::{ball_contains, ball_order, eps_net, CellProof, FormalBall, Gus, GusError, Inside, Point};
use crate::numeric::{dyadic, format_rational, int, parse_rational, Rational};
use crate::verdict::Verdict;

/// Open rational interval `(lo, hi)`; serialized as `["lo", "hi"]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(String, String)", into = "(String, String)")]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi }
    }

    pub fn is_wellformed(&self) -> bool {
        self.lo < self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo < x && x < &self.hi
    }

    /// `self ≤ other`: `other.lo ≤ self.lo` and `self.hi ≤ other.hi`.
    pub fn below(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `self < other`: strict on both ends.
    pub fn strictly_below(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_rational(&self.lo), format_rational(&self.hi))
    }
}

impl TryFrom<(String, String)> for Interval {
    type Error = String;
    fn try_from((a, b): (String, String)) -> Result<Self, String> {
        Ok(Interval { lo: parse_rational(&a).map_err(|e| e.to_string())?, hi: parse_rational(&b).map_err(|e| e.to_string())? })
    }
}

impl From<Interval> for (String, String) {
    fn from(i: Interval) -> Self {
        (format_rational(&i.lo), format_rational(&i.hi))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeciderError {
    #[error("malformed interval {0}: lower end must be below upper end")]
    MalformedInterval(String),
    #[error(transparent)]
    Space(#[from] GusError),
}

/// One chain element with the index of the cover member containing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLink {
    pub interval: Interval,
    pub parent: usize,
}

/// A chain `p_i ≤ p_{i+1} < q_i ≤ q_{i+1}` through members of `↓U` whose
/// first element starts at or below `target.lo` and whose last ends at or
/// above `target.hi`. Clipping it to any shrink `(p', q')` of the target
/// gives a chain from `p'` to `q'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainCertificate {
    pub target: Interval,
    pub chain: Vec<ChainLink>,
}

impl ChainCertificate {
    /// The chain for the shrink `(p', q')`, ending at the first link that reaches `q'`.
    pub fn for_shrink(&self, shrink: &Interval) -> Option<Vec<ChainLink>> {
        if !shrink.strictly_below(&self.target) && shrink != &self.target {
            return None;
        }
        let mut out = Vec::new();
        for l in &self.chain {
            let lo = l.interval.lo.clone().max(shrink.lo.clone());
            let hi = l.interval.hi.clone().min(shrink.hi.clone());
            if lo >= hi {
                continue;
            }
            let done = hi == shrink.hi;
            out.push(ChainLink { interval: Interval::new(lo, hi), parent: l.parent });
            if done {
                return Some(out);
            }
        }
        None
    }

    /// Structural check against the cover `u`.
    pub fn verify(&self, u: &[Interval]) -> Result<(), String> {
        verify_chain(&self.chain, u)?;
        let (first, last) = (self.chain.first().ok_or("empty chain")?, self.chain.last().unwrap());
        if first.interval.lo > self.target.lo || last.interval.hi < self.target.hi {
            return Err("chain does not span the target".into());
        }
        Ok(())
    }
}

/// Checks `p_i ≤ p_{i+1} < q_i ≤ q_{i+1}` and each link inside its parent.
pub fn verify_chain(chain: &[ChainLink], u: &[Interval]) -> Result<(), String> {
    for (k, l) in chain.iter().enumerate() {
        let parent = u.get(l.parent).ok_or_else(|| format!("link {k}: no member {}", l.parent))?;
        if !l.interval.is_wellformed() || !l.interval.below(parent) {
            return Err(format!("link {k}: {} not inside {}", l.interval, parent));
        }
        if let Some(next) = chain.get(k + 1) {
            let (a, b) = (&l.interval, &next.interval);
            if !(a.lo <= b.lo && b.lo < a.hi && a.hi <= b.hi) {
                return Err(format!("links {k},{} not chained", k + 1));
            }
        }
    }
    Ok(())
}

fn check_intervals(target: &Interval, u: &[Interval]) -> Result<(), DeciderError> {
    for i in std::iter::once(target).chain(u) {
        if !i.is_wellformed() {
            return Err(DeciderError::MalformedInterval(i.to_string()));
        }
    }
    Ok(())
}

/// Decides `(p,q) ◁ U` for a finite family of rational intervals. Every
/// shrink of `(p,q)` is chained by `U` exactly when each point of `(p,q)`
/// lies in some member, which is settled at the member endpoints and the
/// midpoints between consecutive ones. Refutes with the least uncovered
/// such point.
pub fn decide_interval_cover(target: &Interval, u: &[Interval]) -> Result<Verdict<ChainCertificate, Rational>, DeciderError> {
    check_intervals(target, u)?;
    let mut crit: BTreeSet<Rational> = BTreeSet::new();
    for i in u {
        for e in [&i.lo, &i.hi] {
            if target.contains(e) {
                crit.insert(e.clone());
            }
        }
    }
    let mut probes: Vec<Rational> = Vec::new();
    let mut prev = target.lo.clone();
    for c in crit.iter().chain(std::iter::once(&target.hi)) {
        probes.push((&prev + c) / int(2));
        if c != &target.hi {
            probes.push(c.clone());
        }
        prev = c.clone();
    }
    if let Some(x) = probes.iter().find(|x| !u.iter().any(|i| i.contains(x))) {
        return Ok(Verdict::Refuted(x.clone()));
    }
    // greedy chain: start with a member reaching below p, extend by the member
    // overlapping the reach that goes furthest
    let mut chain: Vec<ChainLink> = Vec::new();
    let mut reach = target.lo.clone();
    let mut floor = target.lo.clone();
    let mut first = true;
    while reach < target.hi {
        let best = u
            .iter()
            .enumerate()
            .filter(|(_, i)| if first { i.lo <= reach && i.hi > reach } else { i.lo < reach && i.hi > reach })
            .max_by(|a, b| a.1.hi.cmp(&b.1.hi).then(b.0.cmp(&a.0)));
        let Some((k, i)) = best else {
            // unreachable once every probe is covered
            return Ok(Verdict::Refuted(reach));
        };
        let lo = if first { i.lo.clone() } else { i.lo.clone().max(floor.clone()) };
        floor = lo.clone();
        chain.push(ChainLink { interval: Interval::new(lo, i.hi.clone()), parent: k });
        reach = i.hi.clone();
        first = false;
    }
    Ok(Verdict::Proved(ChainCertificate { target: target.clone(), chain }))
}

/// Exhaustive chain search on a finite grid: every shrink `(p', q')` with
/// ends on the grid must admit a chain whose links have ends on the grid and
/// lie in members of `U`. The grid holds the multiples of `1/den` in
/// `[p, q]`, the quarter points of `(p, q)`, all member endpoints, and the
/// midpoints between neighbours.
pub fn chain_oracle(target: &Interval, u: &[Interval], grid_denominator: u32) -> bool {
    let den = grid_denominator.max(1) as i64;
    // scale everything to integers
    let mut l = num_bigint::BigInt::from(den);
    for i in std::iter::once(target).chain(u) {
        l = l.lcm(i.lo.denom()).lcm(i.hi.denom());
    }
    let scale = Rational::from_integer(l * 8);
    let to_i = |x: &Rational| -> i128 { (x * &scale).to_integer().try_into().expect("grid too large") };
    let (p, q) = (to_i(&target.lo), to_i(&target.hi));
    let step: i128 = to_i(&Rational::new(1.into(), den.into()));
    let mut pts: BTreeSet<i128> = BTreeSet::new();
    let mut x = p;
    while x <= q {
        pts.insert(x);
        x += step;
    }
    pts.insert(q);
    for k in 1..4 {
        pts.insert(p + (q - p) * k / 4);
    }
    let members: Vec<(i128, i128)> = u.iter().map(|i| (to_i(&i.lo), to_i(&i.hi))).collect();
    for &(a, b) in &members {
        for e in [a, b] {
            if p <= e && e <= q {
                pts.insert(e);
            }
        }
    }
    let sorted: Vec<i128> = pts.iter().copied().collect();
    for w in sorted.windows(2) {
        pts.insert((w[0] + w[1]) / 2);
    }
    let grid: Vec<i128> = pts.into_iter().collect();
    let inner: Vec<i128> = grid.iter().copied().filter(|&x| p < x && x < q).collect();
    // shrinks dominated by an already chained shrink need no search
    let mut chained: Vec<(i128, i128)> = Vec::new();
    for &sp in &inner {
        for &sq in inner.iter().rev() {
            if sq <= sp {
                continue;
            }
            if chained.iter().any(|&(a, b)| a <= sp && sq <= b) {
                continue;
            }
            if !grid_chain(&grid, &members, sp, sq) {
                return false;
            }
            chained.push((sp, sq));
        }
    }
    true
}

/// Breadth-first search over the right end reached so far: `[sp, b)` is
/// covered by grid links inside members, and a link `(a, c)` with
/// `sp ≤ a < b < c` extends it.
fn grid_chain(grid: &[i128], members: &[(i128, i128)], sp: i128, sq: i128) -> bool {
    let pts: Vec<i128> = grid.iter().copied().filter(|&x| sp <= x && x <= sq).collect();
    let inside = |a: i128, b: i128| a < b && members.iter().any(|&(lo, hi)| lo <= a && b <= hi);
    let mut seen: BTreeSet<i128> = BTreeSet::new();
    let mut queue: std::collections::VecDeque<i128> = pts.iter().copied().filter(|&b| inside(sp, b)).collect();
    seen.extend(queue.iter().copied());
    while let Some(b) = queue.pop_front() {
        if b == sq {
            return true;
        }
        for &c in pts.iter().filter(|&&x| x > b) {
            if !seen.contains(&c) && pts.iter().any(|&a| a < b && inside(a, c)) {
                seen.insert(c);
                queue.push_back(c);
            }
        }
    }
    false
}

const INTERVAL_PLUGIN: &str = "interval-chain";

/// Decision plugin for the formal reals.
pub struct IntervalDecider;

impl CoverDecider<Interval> for IntervalDecider {
    fn name(&self) -> &str {
        INTERVAL_PLUGIN
    }

    fn decide(&self, a: &Interval, u: &Subset<Interval>, _budget: u32) -> Option<CoverJudgment<Interval>> {
        let members: Vec<Interval> = u.as_listed()?.iter().cloned().collect();
        match decide_interval_cover(a, &members).ok()? {
            Verdict::Proved(c) => Some(Verdict::Proved(Derivation::Plugin {
                element: a.clone(),
                certificate: PluginCertificate { plugin: INTERVAL_PLUGIN.into(), payload: serde_json::to_value(&c).ok()? },
            })),
            Verdict::Refuted(x) => {
                let label = format!("point {}", format_rational(&x));
                Some(Verdict::Refuted(PointWitness::Described { label, member: Arc::new(move |i: &Interval| i.contains(&x)) }))
            }
            Verdict::Unknown { .. } => None,
        }
    }

    fn replay(&self, a: &Interval, u: &Subset<Interval>, cert: &PluginCertificate) -> Result<(), String> {
        let members: Vec<Interval> = u.as_listed().ok_or("cover must be listed")?.iter().cloned().collect();
        let c: ChainCertificate = serde_json::from_value(cert.payload.clone()).map_err(|e| e.to_string())?;
        if &c.target != a {
            return Err("certificate is for another interval".into());
        }
        c.verify(&members)
    }
}

fn dyadic_intervals(n: u32) -> Vec<Interval> {
    let k = n.min(4) as i64 + 1;
    let den = 1i64 << k;
    let span = 2 * den;
    let mut out = Vec::new();
    for a in -span..span {
        for w in [1, 2, den] {
            out.push(Interval::new(Rational::new(a.into(), den.into()), Rational::new((a + w).into(), den.into())));
        }
    }
    out
}

/// The formal reals: rational intervals under inclusion with the shrinking
/// axiom `(p,q) ◁ {(p',q') | p < p' < q' < q}` and the splitting axioms
/// `(p,q) ◁ {(p,s), (r,q)}` for `p < r < s < q`; covers are decided by
/// [`IntervalDecider`].
pub fn formal_reals() -> FormalTopology<Interval> {
    let axioms = AxiomSet::new(
        |a: &Interval, n| {
            let mut idx = vec![AxiomIndex::label("shrink")];
            let w = &a.hi - &a.lo;
            for j in 1..=n.min(4) + 1 {
                let third = &w * dyadic(j) / int(2);
                let r = &a.lo + &third;
                let s = &a.hi - &third;
                if r < s {
                    idx.push(AxiomIndex::Seq(vec![AxiomIndex::label("split"), AxiomIndex::Rat(r), AxiomIndex::Rat(s)]));
                }
            }
            crate::ftop::Sample::partial(idx)
        },
        |a: &Interval, i: &AxiomIndex| match i {
            AxiomIndex::Label(l) if l == "shrink" => {
                let (t, s) = (a.clone(), a.clone());
                Subset::pred_sampled(
                    move |b: &Interval| b.strictly_below(&t),
                    move |n| {
                        let w = &s.hi - &s.lo;
                        (1..=n + 2).map(|j| Interval::new(&s.lo + &w * dyadic(j + 1), &s.hi - &w * dyadic(j + 1))).collect()
                    },
                )
            }
            AxiomIndex::Seq(v) => match v.as_slice() {
                [AxiomIndex::Label(l), AxiomIndex::Rat(r), AxiomIndex::Rat(s)]
                    if l == "split" && &a.lo < r && r < s && s < &a.hi =>
                {
                    Subset::listed([Interval::new(a.lo.clone(), s.clone()), Interval::new(r.clone(), a.hi.clone())])
                }
                _ => Subset::empty(),
            },
            _ => Subset::empty(),
        },
    );
    FormalTopology::new("formal_reals", Base::Enumerated(Arc::new(dyadic_intervals)), |a: &Interval, b: &Interval| a.below(b), axioms, false)
        .with_decider(Arc::new(IntervalDecider))
        .with_positivity(Interval::is_wellformed)
}

/// Shrink steps of the locally compact decider.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkStep {
    pub k: u32,
    pub shrunk: FormalBall,
    /// Members of `V` with the index of the member of `U` each is strictly below.
    pub v: Vec<(FormalBall, usize)>,
    pub proof: CellProof,
}

/// Evidence for `a ◁_X U` on a locally compact space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LcCertificate {
    /// `a ≤_X u`.
    Order { member: usize },
    /// `a_* ⊆ U_*` cell by cell, and the first shrink `b <_X a` of the
    /// schedule with a finite `V <_X U` covering it.
    Inclusion { inclusion: CellProof, step: ShrinkStep },
}

impl LcCertificate {
    /// Indices of `U` the certificate relies on.
    pub fn members_used(&self) -> BTreeSet<usize> {
        match self {
            LcCertificate::Order { member } => [*member].into(),
            LcCertificate::Inclusion { inclusion, step } => {
                let mut s = BTreeSet::new();
                leaf_members(inclusion, &mut s);
                let mut vs = BTreeSet::new();
                leaf_members(&step.proof, &mut vs);
                s.extend(vs.into_iter().map(|k| step.v[k].1));
                s
            }
        }
    }
}

fn leaf_members(p: &CellProof, out: &mut BTreeSet<usize>) {
    match p {
        CellProof::Inside { member, .. } => {
            out.insert(*member);
        }
        CellProof::Split { above, on, below, .. } => {
            leaf_members(above, out);
            leaf_members(on, out);
            leaf_members(below, out);
        }
        CellProof::Points { members } => out.extend(members.iter().map(|m| m.1)),
        CellProof::Outside => {}
    }
}

/// `a` shrunk by `θ`, if the radius stays positive.
pub fn shrink(a: &FormalBall, theta: &Rational) -> Option<FormalBall> {
    let r = &a.radius - theta;
    r.is_positive().then(|| a.with_radius(r))
}

/// Strict order check with a fixed precision budget.
fn strictly_below(g: &Gus, a: &FormalBall, b: &FormalBall) -> bool {
    ball_order(g, a, b, true, 32).is_proved()
}

/// Semidecides `a ◁_X U` for finite `U` on a space whose oracle handles the
/// balls: `a ≤_X u` first, then `a_* ⊆ U_*` by cells, then the dyadic
/// shrink schedule `θ_k = r_a 2^-k` with `V` the members of `U` shrunk by
/// `θ_k / 4`. Refutes with a point of `a_*` outside every member.
pub fn semidecide_lc_cover(
    g: &Gus,
    a: &FormalBall,
    u: &[FormalBall],
    budget: u32,
) -> Result<Verdict<LcCertificate, Point>, GusError> {
    let oracle = g.require_oracle()?;
    g.check_metric(&a.metric)?;
    for b in u {
        g.check_metric(&b.metric)?;
    }
    if let Some(k) = u.iter().position(|b| ball_order(g, a, b, false, 32).is_proved()) {
        return Ok(Verdict::Proved(LcCertificate::Order { member: k }));
    }
    let inclusion = match oracle.cover_inclusion(g, a, u, budget) {
        Verdict::Proved(p) => p,
        Verdict::Refuted(x) => {
            let sound = ball_contains(g, a, &x, 64).is_proved() && u.iter().all(|b| ball_contains(g, b, &x, 64).is_refuted());
            return Ok(if sound { Verdict::Refuted(x) } else { Verdict::Unknown { budget } });
        }
        Verdict::Unknown { .. } => return Ok(Verdict::Unknown { budget }),
    };
    for k in 1..=budget.max(1) {
        let theta = &a.radius * dyadic(k);
        let Some(b) = shrink(a, &theta) else { continue };
        let v: Vec<(FormalBall, usize)> = u
            .iter()
            .enumerate()
            .filter_map(|(i, c)| shrink(c, &(&theta / int(4))).map(|s| (s, i)))
            .filter(|(s, i)| strictly_below(g, s, &u[*i]))
            .collect();
        let vb: Vec<FormalBall> = v.iter().map(|x| x.0.clone()).collect();
        if let Verdict::Proved(proof) = oracle.cover_inclusion(g, &b, &vb, budget) {
            return Ok(Verdict::Proved(LcCertificate::Inclusion { inclusion, step: ShrinkStep { k, shrunk: b, v, proof } }));
        }
    }
    Ok(Verdict::Unknown { budget })
}

pub fn replay_lc(g: &Gus, a: &FormalBall, u: &[FormalBall], cert: &LcCertificate) -> Result<(), String> {
    let oracle = g.require_oracle().map_err(|e| e.to_string())?;
    match cert {
        LcCertificate::Order { member } => {
            let b = u.get(*member).ok_or("member out of range")?;
            if ball_order(g, a, b, false, 32).is_proved() {
                Ok(())
            } else {
                Err(format!("{a} is not below {b}"))
            }
        }
        LcCertificate::Inclusion { inclusion, step } => {
            oracle.replay_inclusion(g, a, u, inclusion)?;
            if !strictly_below(g, &step.shrunk, a) {
                return Err("shrink is not strictly below the ball".into());
            }
            for (v, i) in &step.v {
                let target = u.get(*i).ok_or("member out of range")?;
                if !strictly_below(g, v, target) {
                    return Err(format!("{v} is not strictly below {target}"));
                }
            }
            let vb: Vec<FormalBall> = step.v.iter().map(|x| x.0.clone()).collect();
            oracle.replay_inclusion(g, &step.shrunk, &vb, &step.proof)
        }
    }
}

/// Evidence that the whole base is covered by a finite part of `U`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubcoverCertificate {
    #[serde(with = "crate::numeric::serde_rational")]
    pub eps: Rational,
    /// Balls `b(y, 2ε)` at the ε-net points; every base ball lies below one.
    pub net_balls: Vec<FormalBall>,
    /// Indices into `U` of the chosen subcover.
    pub indices: Vec<usize>,
    pub subcover: Vec<FormalBall>,
    /// Per net ball, a cover certificate against the subcover.
    pub certificates: Vec<LcCertificate>,
}

/// Extracts a finite subcover from `U` on a totally bounded space: for
/// `ε = 2^-k`, every net ball `b(y, 2ε)` must be covered; members actually
/// used form `U₀`. Refutes with a carrier point outside every member.
pub fn finite_subcover(g: &Gus, u: &[FormalBall], budget: u32) -> Result<Verdict<SubcoverCertificate, Point>, GusError> {
    g.require_oracle()?;
    let m = g.full_metric();
    'scales: for k in 0..=budget {
        let eps = dyadic(k);
        let net = eps_net(g, &m, &eps)?;
        let balls: Vec<FormalBall> =
            net.into_iter().map(|y| FormalBall { metric: m.clone(), center: y, radius: &eps * int(2) }).collect();
        let mut used = BTreeSet::new();
        for nb in &balls {
            match semidecide_lc_cover(g, nb, u, budget)? {
                Verdict::Proved(c) => used.extend(c.members_used()),
                Verdict::Refuted(x) => return Ok(Verdict::Refuted(x)),
                Verdict::Unknown { .. } => continue 'scales,
            }
        }
        let indices: Vec<usize> = used.into_iter().collect();
        let sub: Vec<FormalBall> = indices.iter().map(|&i| u[i].clone()).collect();
        let mut certificates = Vec::new();
        for nb in &balls {
            match semidecide_lc_cover(g, nb, &sub, budget)? {
                Verdict::Proved(c) => certificates.push(c),
                _ => continue 'scales,
            }
        }
        return Ok(Verdict::Proved(SubcoverCertificate { eps, net_balls: balls, indices, subcover: sub, certificates }));
    }
    Ok(Verdict::Unknown { budget })
}

pub fn replay_subcover(g: &Gus, u: &[FormalBall], cert: &SubcoverCertificate) -> Result<(), String> {
    let m = g.full_metric();
    let net = eps_net(g, &m, &cert.eps).map_err(|e| e.to_string())?;
    if net.len() != cert.net_balls.len()
        || net.iter().zip(&cert.net_balls).any(|(y, b)| &b.center != y || b.radius != &cert.eps * int(2) || b.metric != m)
    {
        return Err("net balls do not match the ε-net".into());
    }
    for (i, b) in cert.indices.iter().zip(&cert.subcover) {
        if u.get(*i) != Some(b) {
            return Err(format!("subcover member {i} is not in the cover"));
        }
    }
    if cert.certificates.len() != cert.net_balls.len() {
        return Err("one certificate per net ball".into());
    }
    for (nb, c) in cert.net_balls.iter().zip(&cert.certificates) {
        replay_lc(g, nb, &cert.subcover, c)?;
    }
    Ok(())
}

const LC_PLUGIN: &str = "lc";

/// Plugin deciding listed ball covers through [`semidecide_lc_cover`].
pub struct LcDecider {
    pub space: Gus,
}

impl CoverDecider<FormalBall> for LcDecider {
    fn name(&self) -> &str {
        LC_PLUGIN
    }

    fn decide(&self, a: &FormalBall, u: &Subset<FormalBall>, budget: u32) -> Option<CoverJudgment<FormalBall>> {
        let members: Vec<FormalBall> = u.as_listed()?.iter().cloned().collect();
        match semidecide_lc_cover(&self.space, a, &members, budget).ok()? {
            Verdict::Proved(c) => Some(Verdict::Proved(Derivation::Plugin {
                element: a.clone(),
                certificate: PluginCertificate { plugin: LC_PLUGIN.into(), payload: serde_json::to_value(&c).ok()? },
            })),
            Verdict::Refuted(x) => {
                let g = self.space.clone();
                let label = format!("point {x}");
                Some(Verdict::Refuted(PointWitness::Described {
                    label,
                    member: Arc::new(move |b: &FormalBall| ball_contains(&g, b, &x, 64).is_proved()),
                }))
            }
            Verdict::Unknown { .. } => None,
        }
    }

    fn replay(&self, a: &FormalBall, u: &Subset<FormalBall>, cert: &PluginCertificate) -> Result<(), String> {
        let members: Vec<FormalBall> = u.as_listed().ok_or("cover must be listed")?.iter().cloned().collect();
        let c: LcCertificate = serde_json::from_value(cert.payload.clone()).map_err(|e| e.to_string())?;
        replay_lc(&self.space, a, &members, &c)
    }
}

/// Whether a cell proof uses only containment leaves (no radical-axis step).
pub fn is_plain_containment(p: &CellProof) -> bool {
    match p {
        CellProof::Inside { how, .. } => *how == Inside::Contained,
        CellProof::Split { above, on, below, .. } => {
            is_plain_containment(above) && is_plain_containment(on) && is_plain_containment(below)
        }
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftop::{cover_check, replay};
    use crate::gus::{make_space, BoxMetric, MetricId, SpaceKind};
    use crate::numeric::rat;

    fn iv(a: Rational, b: Rational) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn interval_examples() {
        let t = iv(int(0), int(1));
        let u = vec![iv(rat(-1, 2), rat(3, 5)), iv(rat(2, 5), rat(3, 2))];
        let c = decide_interval_cover(&t, &u).unwrap().proved().unwrap();
        c.verify(&u).unwrap();
        let chain = c.for_shrink(&iv(rat(1, 10), rat(9, 10))).unwrap();
        verify_chain(&chain, &u).unwrap();
        assert_eq!(chain.first().unwrap().interval.lo, rat(1, 10));
        assert_eq!(chain.last().unwrap().interval.hi, rat(9, 10));
        assert!(chain_oracle(&t, &u, 16));
        let gap = vec![iv(rat(-1, 2), rat(1, 2)), iv(rat(1, 2), rat(3, 2))];
        assert_eq!(decide_interval_cover(&t, &gap).unwrap().refuted(), Some(rat(1, 2)));
        assert!(!chain_oracle(&t, &gap, 16));
        assert!(decide_interval_cover(&t, &[iv(int(-1), int(2))]).unwrap().is_proved());
        assert!(decide_interval_cover(&t, &[]).unwrap().is_refuted());
        assert!(!chain_oracle(&t, &[], 8));
        assert!(decide_interval_cover(&t, std::slice::from_ref(&t)).unwrap().is_proved());
        assert!(chain_oracle(&t, std::slice::from_ref(&t), 8));
        // narrower than the grid step
        let thin = iv(rat(17, 7), rat(5, 2));
        assert!(!chain_oracle(&thin, &[iv(int(1), rat(7, 4))], 12));
        assert!(chain_oracle(&thin, &[iv(int(2), int(3))], 12));
        assert!(matches!(decide_interval_cover(&iv(int(1), int(1)), &[]), Err(DeciderError::MalformedInterval(_))));
    }

    #[test]
    fn formal_reals_plugin() {
        let r = formal_reals();
        let a = iv(int(0), int(1));
        let u = Subset::listed([iv(int(-1), rat(3, 5)), iv(rat(2, 5), int(2))]);
        let d = cover_check(&r, &a, &u, 4).proved().unwrap();
        replay(&r, &a, &u, &d).unwrap();
        let b = iv(int(0), int(2));
        let w = cover_check(&r, &b, &Subset::listed([iv(int(-1), int(1)), iv(int(1), int(3))]), 4).refuted().unwrap();
        assert_eq!(format!("{w:?}"), "point 1");
        assert!(w.contains(&b));
    }

    fn ball(m: &str, c: Vec<i64>, r: Rational) -> FormalBall {
        FormalBall::new(MetricId::single(m), Point::from_coords(c.into_iter().map(int).collect()), r).unwrap()
    }

    #[test]
    fn two_disk_cover() {
        let g = make_space(&SpaceKind::RationalBox { dim: 2, metric: BoxMetric::Euclid, bounds: None }).unwrap();
        let a = ball("euclid", vec![0, 0], int(3));
        let u = vec![ball("euclid", vec![-4, 0], int(5)), ball("euclid", vec![4, 0], int(5))];
        let c = semidecide_lc_cover(&g, &a, &u, 12).unwrap().proved().unwrap();
        replay_lc(&g, &a, &u, &c).unwrap();
        let json = serde_json::to_value(&c).unwrap();
        let back: LcCertificate = serde_json::from_value(json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn line_refutation_and_order() {
        let g = make_space(&SpaceKind::RationalLine).unwrap();
        let a = ball("d", vec![0], int(2));
        let w = semidecide_lc_cover(&g, &a, &[ball("d", vec![0], int(1))], 6).unwrap().refuted().unwrap();
        assert_eq!(w, Point::Num(rat(3, 2)));
        let small = ball("d", vec![0], int(1));
        assert_eq!(semidecide_lc_cover(&g, &small, &[a], 0).unwrap().proved(), Some(LcCertificate::Order { member: 0 }));
    }

    #[test]
    fn unit_interval_subcovers() {
        let g = make_space(&SpaceKind::UnitInterval).unwrap();
        let d = MetricId::single("d");
        let u: Vec<FormalBall> =
            (0..=8).map(|k| FormalBall::new(d.clone(), Point::Num(rat(k, 8)), rat(3, 16)).unwrap()).collect();
        let c = finite_subcover(&g, &u, 6).unwrap().proved().unwrap();
        replay_subcover(&g, &u, &c).unwrap();
        assert_eq!(c.indices, (0..=8).collect::<Vec<_>>());
        let one = vec![FormalBall::new(d.clone(), Point::Num(rat(1, 2)), int(2)).unwrap()];
        assert_eq!(finite_subcover(&g, &one, 4).unwrap().proved().unwrap().indices, vec![0]);
        let half = vec![FormalBall::new(d, Point::Num(int(0)), rat(1, 2)).unwrap()];
        assert_eq!(finite_subcover(&g, &half, 4).unwrap().refuted(), Some(Point::Num(rat(3, 4))));
        let line = make_space(&SpaceKind::RationalLine).unwrap();
        assert_eq!(finite_subcover(&line, &one, 2), Err(GusError::NotTotallyBounded));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(500))]
        #[test]
        fn decider_agrees_with_chain_search(
            t in (-4i64..4, 1i64..5),
            raw in proptest::collection::vec((-6i64..6, 1i64..6), 0..5),
        ) {
            let target = iv(rat(t.0, 2), rat(t.0 + t.1, 2));
            let u: Vec<Interval> = raw.iter().map(|&(a, w)| iv(rat(a, 2), rat(a + w, 2))).collect();
            let v = decide_interval_cover(&target, &u).unwrap();
            proptest::prop_assert_eq!(v.is_proved(), chain_oracle(&target, &u, 4));
            match v {
                Verdict::Proved(c) => proptest::prop_assert!(c.verify(&u).is_ok()),
                Verdict::Refuted(x) => {
                    proptest::prop_assert!(target.contains(&x));
                    proptest::prop_assert!(!u.iter().any(|i| i.contains(&x)));
                }
                Verdict::Unknown { .. } => proptest::prop_assert!(false),
            }
        }
    }
}
