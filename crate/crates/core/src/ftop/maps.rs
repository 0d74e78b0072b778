use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::cover::{cover_check, cover_search_sampled, saturate_finite};
use super::{Element, FormalTopology, Sample, Subset};
use crate::verdict::Verdict;

type Rel<E, F> = Arc<dyn Fn(&E, &F) -> bool + Send + Sync>;
type Fwd<E, F> = Arc<dyn Fn(&E, u32) -> Vec<F> + Send + Sync>;
type Fib<E, F> = Arc<dyn Fn(&F, u32) -> Vec<E> + Send + Sync>;

/// A relation `r ⊆ S × S'` with optional enumerators of candidates on either side.
#[derive(Clone)]
pub struct TopologyMap<E, F> {
    pub name: String,
    relation: Rel<E, F>,
    forward: Option<Fwd<E, F>>,
    fiber: Option<Fib<E, F>>,
}

impl<E, F> fmt::Debug for TopologyMap<E, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TopologyMap({})", self.name)
    }
}

impl<E: Element> TopologyMap<E, E> {
    pub fn identity() -> Self {
        TopologyMap::new("id", |a: &E, b: &E| a == b)
            .with_forward(|a: &E, _| vec![a.clone()])
            .with_fiber(|b: &E, _| vec![b.clone()])
    }
}

impl<E: Element, F: Element> TopologyMap<E, F> {
    pub fn new(name: &str, relation: impl Fn(&E, &F) -> bool + Send + Sync + 'static) -> Self {
        TopologyMap { name: name.to_string(), relation: Arc::new(relation), forward: None, fiber: None }
    }

    /// Candidates `b` with possibly `a r b`; filtered through the relation on use.
    pub fn with_forward(mut self, f: impl Fn(&E, u32) -> Vec<F> + Send + Sync + 'static) -> Self {
        self.forward = Some(Arc::new(f));
        self
    }

    /// Candidates `a` in `r⁻b`; filtered through the relation on use.
    pub fn with_fiber(mut self, f: impl Fn(&F, u32) -> Vec<E> + Send + Sync + 'static) -> Self {
        self.fiber = Some(Arc::new(f));
        self
    }

    pub fn relates(&self, a: &E, b: &F) -> bool {
        (self.relation)(a, b)
    }

    /// `r⁻b`, exact on a finite source.
    pub fn fiber_sample(&self, src: &FormalTopology<E>, b: &F, budget: u32) -> Sample<E> {
        if let Some(u) = src.finite_base() {
            return Sample::all(u.iter().filter(|a| self.relates(a, b)).cloned().collect());
        }
        let items = match &self.fiber {
            Some(f) => dedup(f(b, budget).into_iter().filter(|a| self.relates(a, b)).collect()),
            None => Vec::new(),
        };
        Sample::partial(items)
    }

    /// `{b | a r b}`, exact on a finite target.
    pub fn forward_sample(&self, tgt: Option<&FormalTopology<F>>, a: &E, budget: u32) -> Sample<F> {
        if let Some(u) = tgt.and_then(|t| t.finite_base()) {
            return Sample::all(u.iter().filter(|b| self.relates(a, b)).cloned().collect());
        }
        let items = match &self.forward {
            Some(f) => dedup(f(a, budget).into_iter().filter(|b| self.relates(a, b)).collect()),
            None => Vec::new(),
        };
        Sample::partial(items)
    }

    /// `r⁻U` as a subset of the source.
    pub fn preimage(&self, u: &Subset<F>, budget: u32) -> Subset<E> {
        let me = self.clone();
        let me2 = self.clone();
        match u {
            Subset::Listed(set) => {
                let set = set.clone();
                let set2 = set.clone();
                Subset::pred_sampled(
                    move |x| set.iter().any(|b| me.relates(x, b)),
                    move |n| set2.iter().flat_map(|b| me2.fiber.as_ref().map(|f| f(b, n)).unwrap_or_default()).collect(),
                )
            }
            Subset::Pred { .. } => {
                let u1 = u.clone();
                let u2 = u.clone();
                Subset::pred_sampled(
                    move |x| {
                        me.forward
                            .as_ref()
                            .map(|f| f(x, budget).iter().any(|b| u1.contains(b) && me.relates(x, b)))
                            .unwrap_or(false)
                    },
                    move |n| {
                        u2.sample(n)
                            .items
                            .iter()
                            .flat_map(|b| me2.fiber.as_ref().map(|f| f(b, n)).unwrap_or_default())
                            .collect()
                    },
                )
            }
        }
    }
}

/// Order-preserving deduplication.
fn dedup<T: Ord + Clone>(v: Vec<T>) -> Vec<T> {
    let mut seen = BTreeSet::new();
    v.into_iter().filter(|x| seen.insert(x.clone())).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FtmCertificate {
    pub exhaustive: bool,
    pub instances: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FtmViolation {
    pub condition: String,
    pub detail: String,
}

fn violation(condition: &str, detail: String) -> Verdict<FtmCertificate, FtmViolation> {
    Verdict::Refuted(FtmViolation { condition: condition.to_string(), detail })
}

/// `a ◁ U` by a plugin or exhaustive search, falling back to sampled search.
fn covered_sampled<E: Element>(t: &FormalTopology<E>, a: &E, u: &Subset<E>, budget: u32) -> bool {
    u.contains(a) || cover_check(t, a, u, budget).is_proved() || cover_search_sampled(t, a, u, budget).is_some()
}

const SAMPLED_TARGETS: usize = 12;
const SAMPLED_FIBER: usize = 8;

/// Checks FTM1, FTM2, FTM3a and FTM3b. Finite bases are checked exactly;
/// otherwise on sampled instances, never refuting.
pub fn check_ftm<E: Element, F: Element>(
    r: &TopologyMap<E, F>,
    s: &FormalTopology<E>,
    s2: &FormalTopology<F>,
    budget: u32,
) -> Verdict<FtmCertificate, FtmViolation> {
    match (s.finite_base(), s2.finite_base()) {
        (Some(sb), Some(tb)) => check_ftm_finite(r, s, s2, sb, tb),
        _ => check_ftm_sampled(r, s, s2, budget),
    }
}

fn check_ftm_finite<E: Element, F: Element>(
    r: &TopologyMap<E, F>,
    s: &FormalTopology<E>,
    s2: &FormalTopology<F>,
    sb: &[E],
    tb: &[F],
) -> Verdict<FtmCertificate, FtmViolation> {
    let pre = |bs: &[F]| -> BTreeSet<E> { sb.iter().filter(|a| bs.iter().any(|b| r.relates(a, b))).cloned().collect() };
    let sat = |set: BTreeSet<E>| saturate_finite(s, &Subset::Listed(set)).expect("finite");
    let mut n = 0;

    let whole = sat(pre(tb));
    if let Some(a) = sb.iter().find(|a| !whole.contains(a)) {
        return violation("FTM1", format!("{a:?} not covered by r⁻S'"));
    }
    for b in tb {
        for b2 in tb {
            n += 1;
            let (f1, f2) = (pre(std::slice::from_ref(b)), pre(std::slice::from_ref(b2)));
            let meet: Vec<F> = s2.down_meet(tb, b, b2);
            let target = sat(pre(&meet));
            for c in sb {
                let below = f1.iter().any(|x| s.le(c, x)) && f2.iter().any(|y| s.le(c, y));
                if below && !target.contains(c) {
                    return violation("FTM2", format!("{c:?} in r⁻{b:?} ↓ r⁻{b2:?}"));
                }
            }
            if s2.le(b, b2) {
                let t2 = sat(f2.clone());
                if let Some(a) = f1.iter().find(|a| !t2.contains(a)) {
                    return violation("FTM3a", format!("{a:?} ∈ r⁻{b:?}, {b:?} ≤ {b2:?}"));
                }
            }
        }
        let fb = pre(std::slice::from_ref(b));
        for i in s2.axioms().index(b, 64).items {
            n += 1;
            let body: Vec<F> = s2.axioms().body(b, &i).materialize(tb).into_iter().collect();
            let t2 = sat(pre(&body));
            if let Some(a) = fb.iter().find(|a| !t2.contains(a)) {
                return violation("FTM3b", format!("{a:?} ∈ r⁻{b:?}, axiom {i}"));
            }
        }
    }
    Verdict::Proved(FtmCertificate { exhaustive: true, instances: n })
}

fn check_ftm_sampled<E: Element, F: Element>(
    r: &TopologyMap<E, F>,
    s: &FormalTopology<E>,
    s2: &FormalTopology<F>,
    budget: u32,
) -> Verdict<FtmCertificate, FtmViolation> {
    let mut n = 0;
    let mut unknown = false;
    let src: Vec<E> = s.base().sample(budget).items.into_iter().take(SAMPLED_TARGETS).collect();
    let tgt: Vec<F> = s2.base().sample(budget).items.into_iter().take(SAMPLED_TARGETS).collect();
    let fib = |b: &F| -> Vec<E> { r.fiber_sample(s, b, budget).items.into_iter().take(SAMPLED_FIBER).collect() };

    let r_all = {
        let r = r.clone();
        let s2c = s2.clone();
        Subset::pred(move |x: &E| !r.forward_sample(Some(&s2c), x, budget).items.is_empty())
    };
    for a in &src {
        n += 1;
        if !covered_sampled(s, a, &r_all, budget) {
            unknown = true;
        }
    }
    for b in tgt.iter().take(4) {
        for b2 in tgt.iter().take(4) {
            let f1 = fib(b);
            let meet_target = {
                let (r, s2c, b, b2) = (r.clone(), s2.clone(), b.clone(), b2.clone());
                Subset::pred(move |x: &E| {
                    r.forward_sample(Some(&s2c), x, budget).items.iter().any(|e| s2c.le(e, &b) && s2c.le(e, &b2))
                })
            };
            for c in f1.iter().filter(|c| r.relates(c, b2)) {
                n += 1;
                if !covered_sampled(s, c, &meet_target, budget) {
                    unknown = true;
                }
            }
            if s2.le(b, b2) {
                let pre_b2 = r.preimage(&Subset::listed([b2.clone()]), budget);
                for a in &f1 {
                    n += 1;
                    if !covered_sampled(s, a, &pre_b2, budget) {
                        unknown = true;
                    }
                }
            }
        }
    }
    for b in tgt.iter().take(6) {
        let fb = fib(b);
        for i in s2.axioms().index(b, budget).items.into_iter().take(4) {
            let body = s2.axioms().body(b, &i);
            let pre = r.preimage(&body, budget);
            for a in &fb {
                n += 1;
                if !covered_sampled(s, a, &pre, budget) {
                    unknown = true;
                }
            }
        }
    }
    if unknown {
        Verdict::Unknown { budget }
    } else {
        Verdict::Proved(FtmCertificate { exhaustive: false, instances: n })
    }
}

/// Relational composite `s ∘ r`; the middle witness is found among the
/// middle base (finite) or `r`'s forward candidates at `budget`.
pub fn map_compose<E: Element, F: Element, G: Element>(
    r: &TopologyMap<E, F>,
    s: &TopologyMap<F, G>,
    middle: &FormalTopology<F>,
    budget: u32,
) -> TopologyMap<E, G> {
    let (r1, s1, m1) = (r.clone(), s.clone(), middle.clone());
    let (r2, s2) = (r.clone(), s.clone());
    let (r3, s3) = (r.clone(), s.clone());
    let mut out = TopologyMap::new(&format!("{}∘{}", s.name, r.name), move |a: &E, c: &G| {
        r1.forward_sample(Some(&m1), a, budget).items.iter().any(|b| s1.relates(b, c))
    });
    if r.forward.is_some() && s.forward.is_some() {
        out = out.with_forward(move |a, n| {
            r2.forward_sample(None, a, n).items.iter().flat_map(|b| s2.forward_sample(None, b, n).items).collect()
        });
    }
    if r.fiber.is_some() && s.fiber.is_some() {
        out = out.with_fiber(move |c, n| {
            let mids = s3.fiber.as_ref().map(|f| f(c, n)).unwrap_or_default();
            mids.iter()
                .filter(|b| s3.relates(b, c))
                .flat_map(|b| r3.fiber.as_ref().map(|f| f(b, n)).unwrap_or_default())
                .collect()
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapEqualCertificate {
    pub exhaustive: bool,
    pub checked: usize,
}

/// Equality as maps: `r⁻b ◁ s⁻b` and `s⁻b ◁ r⁻b` for every target element
/// (sampled on infinite bases). Refutes with `(b, a)`.
pub fn map_equal<E: Element, F: Element>(
    r: &TopologyMap<E, F>,
    s: &TopologyMap<E, F>,
    src: &FormalTopology<E>,
    tgt: &FormalTopology<F>,
    budget: u32,
) -> Verdict<MapEqualCertificate, (F, E)> {
    if let (Some(sb), Some(tb)) = (src.finite_base(), tgt.finite_base()) {
        let mut checked = 0;
        for b in tb {
            for (x, y) in [(r, s), (s, r)] {
                checked += 1;
                let fx: Vec<&E> = sb.iter().filter(|a| x.relates(a, b)).collect();
                let fy: BTreeSet<E> = sb.iter().filter(|a| y.relates(a, b)).cloned().collect();
                let sat = saturate_finite(src, &Subset::Listed(fy)).expect("finite");
                if let Some(a) = fx.into_iter().find(|a| !sat.contains(a)) {
                    return Verdict::Refuted((b.clone(), a.clone()));
                }
            }
        }
        return Verdict::Proved(MapEqualCertificate { exhaustive: true, checked });
    }
    let mut checked = 0;
    for b in tgt.base().sample(budget).items.into_iter().take(SAMPLED_TARGETS) {
        for (x, y) in [(r, s), (s, r)] {
            let target = y.preimage(&Subset::listed([b.clone()]), budget);
            for a in x.fiber_sample(src, &b, budget).items.into_iter().take(SAMPLED_FIBER) {
                checked += 1;
                if !covered_sampled(src, &a, &target, budget) {
                    return Verdict::Unknown { budget };
                }
            }
        }
    }
    Verdict::Proved(MapEqualCertificate { exhaustive: false, checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftop::AxiomIndex;

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn two() -> FormalTopology<String> {
        FormalTopology::finite("two", vec![s("a"), s("b")], |x, y| x == y, vec![], true)
    }

    #[test]
    fn identity_is_a_map() {
        let t = FormalTopology::finite(
            "t",
            vec![s("a"), s("b"), s("c")],
            |x, y| x == y || (x == "a" && y == "b"),
            vec![(s("c"), AxiomIndex::Nat(0), [s("a")].into())],
            true,
        );
        assert!(check_ftm(&TopologyMap::identity(), &t, &t, 0).is_proved());
    }

    #[test]
    fn empty_relation_fails_ftm1() {
        let t = two();
        let r: TopologyMap<String, String> = TopologyMap::new("empty", |_, _| false);
        assert_eq!(check_ftm(&r, &t, &t, 0).refuted().unwrap().condition, "FTM1");
    }

    #[test]
    fn constant_maps_differ() {
        let t = two();
        let ca: TopologyMap<String, String> = TopologyMap::new("ca", |_, b| b == "a");
        let cb: TopologyMap<String, String> = TopologyMap::new("cb", |_, b| b == "b");
        assert!(map_equal(&ca, &ca, &t, &t, 0).is_proved());
        let (b, _) = map_equal(&ca, &cb, &t, &t, 0).refuted().unwrap();
        assert_eq!(b, "a");
        let id = TopologyMap::identity();
        let comp = map_compose(&id, &ca, &t, 0);
        assert!(map_equal(&comp, &ca, &t, &t, 0).is_proved());
    }
}
