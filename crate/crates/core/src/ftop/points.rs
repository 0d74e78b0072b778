use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use super::cover::saturate_finite;
use super::maps::TopologyMap;
use super::{
    AxiomIndex, AxiomSet, CoverDecider, CoverJudgment, Derivation, Element, FormalTopology, FtopError,
    PluginCertificate, PointWitness, Sample, Subset,
};
use crate::verdict::Verdict;

/// The instance at which a point or splitting condition failed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointViolation<E> {
    pub condition: String,
    pub elements: Vec<E>,
    pub index: Option<AxiomIndex>,
}

impl<E> PointViolation<E> {
    fn new(condition: &str, elements: Vec<E>, index: Option<AxiomIndex>) -> Self {
        PointViolation { condition: condition.to_string(), elements, index }
    }
}

const MAX_SAMPLED_MEMBERS: usize = 40;

/// Does `v` meet `body`? `Some(false)` only when the answer is certain.
fn meets<E: Element>(body: &Subset<E>, v: &Subset<E>, universe: Option<&[E]>, budget: u32) -> Option<bool> {
    if let Some(u) = universe {
        return Some(body.materialize(u).iter().any(|c| v.contains(c)));
    }
    let s = body.sample(budget);
    if s.items.iter().any(|c| v.contains(c)) {
        return Some(true);
    }
    if s.exhaustive {
        Some(false)
    } else {
        None
    }
}

fn elements_for<E: Element>(t: &FormalTopology<E>, extra: &Subset<E>, budget: u32) -> (Vec<E>, bool) {
    let s = t.base().sample(budget);
    if s.exhaustive {
        return (s.items, true);
    }
    let mut set: BTreeSet<E> = s.items.into_iter().collect();
    set.extend(extra.sample(budget).items);
    (set.into_iter().collect(), false)
}

/// Checks P1, P2, P3a and P3b for `alpha`. On infinite bases the universal
/// conditions are checked on sampled elements and a missing existential
/// witness yields Unknown.
pub fn check_point<E: Element>(t: &FormalTopology<E>, alpha: &Subset<E>, budget: u32) -> Verdict<(), PointViolation<E>> {
    let (elements, exhaustive) = elements_for(t, alpha, budget);
    let universe = if exhaustive { Some(elements.as_slice()) } else { None };
    let mut members: Vec<E> = elements.iter().filter(|e| alpha.contains(e)).cloned().collect();
    let mut unknown = false;

    if members.is_empty() {
        let certain = exhaustive || matches!(alpha, Subset::Listed(s) if s.is_empty());
        return if certain {
            Verdict::Refuted(PointViolation::new("P1", vec![], None))
        } else {
            Verdict::Unknown { budget }
        };
    }
    if !exhaustive {
        members.truncate(MAX_SAMPLED_MEMBERS);
    }

    for a in &members {
        for b in &members {
            let found = members.iter().any(|c| t.le(c, a) && t.le(c, b))
                || t.meet_candidates(a, b).iter().any(|c| alpha.contains(c) && t.le(c, a) && t.le(c, b));
            if !found {
                if exhaustive {
                    return Verdict::Refuted(PointViolation::new("P2", vec![a.clone(), b.clone()], None));
                }
                unknown = true;
            }
        }
    }

    for a in &members {
        for b in &elements {
            if t.le(a, b) && !alpha.contains(b) {
                return Verdict::Refuted(PointViolation::new("P3a", vec![a.clone(), b.clone()], None));
            }
        }
        let idx = t.axioms().index(a, budget);
        for i in idx.items {
            let body = t.axioms().body(a, &i);
            match meets(&body, alpha, universe, budget) {
                Some(true) => {}
                Some(false) => return Verdict::Refuted(PointViolation::new("P3b", vec![a.clone()], Some(i))),
                None => unknown = true,
            }
        }
    }
    if unknown {
        Verdict::Unknown { budget }
    } else {
        Verdict::Proved(())
    }
}

/// Checks Spl1 and Spl2 (Spl2' for localised axiom-sets) on the base, or on
/// `samples` elements of an infinite base.
pub fn check_splitting<E: Element>(t: &FormalTopology<E>, v: &Subset<E>, samples: u32) -> Verdict<(), PointViolation<E>> {
    let (elements, exhaustive) = elements_for(t, v, samples);
    let universe = if exhaustive { Some(elements.as_slice()) } else { None };
    let mut members: Vec<E> = elements.iter().filter(|e| v.contains(e)).cloned().collect();
    if !exhaustive {
        members.truncate(MAX_SAMPLED_MEMBERS);
    }
    let mut unknown = false;
    for a in &members {
        for b in &elements {
            if t.le(a, b) && !v.contains(b) {
                return Verdict::Refuted(PointViolation::new("Spl1", vec![a.clone(), b.clone()], None));
            }
        }
        if t.is_localised() {
            for i in t.axioms().index(a, samples).items {
                let body = t.axioms().body(a, &i);
                match meets(&body, v, universe, samples) {
                    Some(true) => {}
                    Some(false) => {
                        return Verdict::Refuted(PointViolation::new("Spl2'", vec![a.clone()], Some(i)))
                    }
                    None => unknown = true,
                }
            }
        } else if let Some(u) = universe {
            for b in u.iter().filter(|b| t.le(a, b)) {
                for i in t.axioms().index(b, samples).items {
                    if !t.premise_set(u, a, b, &i).iter().any(|c| v.contains(c)) {
                        return Verdict::Refuted(PointViolation::new("Spl2", vec![a.clone(), b.clone()], Some(i)));
                    }
                }
            }
        } else {
            // Only b = a is reachable without enumerating the elements above a.
            for i in t.axioms().index(a, samples).items {
                let body = t.axioms().body(a, &i);
                let hits = body.sample(samples).items;
                let found = hits.iter().any(|c| {
                    v.contains(c)
                        || t.meet_candidates(a, c).iter().any(|m| v.contains(m) && t.le(m, a) && t.le(m, c))
                });
                if !found {
                    if body.as_listed().is_some_and(|s| s.is_empty()) {
                        return Verdict::Refuted(PointViolation::new("Spl2", vec![a.clone(), a.clone()], Some(i)));
                    }
                    unknown = true;
                }
            }
        }
    }
    if unknown {
        Verdict::Unknown { budget: samples }
    } else {
        Verdict::Proved(())
    }
}

const WC_TAG: &str = "wc";

struct WeaklyClosedDecider<E: Element> {
    inner: Option<Arc<dyn CoverDecider<E>>>,
    v: Subset<E>,
    name: String,
}

impl<E: Element> CoverDecider<E> for WeaklyClosedDecider<E> {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&self, a: &E, u: &Subset<E>, budget: u32) -> Option<CoverJudgment<E>> {
        if !self.v.contains(a) {
            return Some(Verdict::Proved(Derivation::Infinity {
                element: a.clone(),
                via: a.clone(),
                index: AxiomIndex::Seq(vec![AxiomIndex::label(WC_TAG), AxiomIndex::label("restrict")]),
                premises: vec![],
                exhaustive: true,
            }));
        }
        match self.inner.as_ref()?.decide(a, u, budget)? {
            Verdict::Proved(d) => Some(Verdict::Proved(d)),
            Verdict::Refuted(PointWitness::Listed(s)) if s.iter().all(|x| self.v.contains(x)) => {
                Some(Verdict::Refuted(PointWitness::Listed(s)))
            }
            _ => None,
        }
    }

    fn replay(&self, a: &E, u: &Subset<E>, cert: &PluginCertificate) -> Result<(), String> {
        match &self.inner {
            Some(i) => i.replay(a, u, cert),
            None => Err("no inner plugin".into()),
        }
    }
}

/// The overt weakly closed subtopology with positivity `v`, generated by
/// adding `a ◁ V ∩ {a}`.
pub fn weakly_closed<E: Element>(t: &FormalTopology<E>, v: Subset<E>) -> Result<FormalTopology<E>, FtopError> {
    if t.finite_base().is_some() {
        if let Verdict::Refuted(w) = check_splitting(t, &v, 0) {
            return Err(FtopError::NotSplitting(format!("{} fails at {:?}", w.condition, w.elements)));
        }
    }
    let v_body = v.clone();
    let extra = AxiomSet::new(
        |_, _| Sample::all(vec![AxiomIndex::label("restrict")]),
        move |a: &E, _| {
            if v_body.contains(a) {
                Subset::listed([a.clone()])
            } else {
                Subset::empty()
            }
        },
    );
    let mut out = t.clone();
    out.name = format!("{}_V", t.name);
    out.axioms = t.axioms().union(&extra, WC_TAG);
    let vp = v.clone();
    out.positivity = Some(Arc::new(move |a: &E| vp.contains(a)));
    let name = t.decider().map(|d| d.name().to_string()).unwrap_or_else(|| "weakly-closed".into());
    out.decider = Some(Arc::new(WeaklyClosedDecider { inner: t.decider().cloned(), v, name }));
    Ok(out)
}

struct ImageDecider<E: Element, F: Element> {
    src: FormalTopology<E>,
    tgt_base: Vec<F>,
    r: TopologyMap<E, F>,
}

impl<E: Element, F: Element> ImageDecider<E, F> {
    fn fiber(&self, b: &F) -> BTreeSet<E> {
        let universe = self.src.finite_base().expect("finite source");
        universe.iter().filter(|a| self.r.relates(a, b)).cloned().collect()
    }

    fn fiber_of_set(&self, u: &Subset<F>) -> BTreeSet<E> {
        let mut out = BTreeSet::new();
        for b in u.materialize(&self.tgt_base) {
            out.extend(self.fiber(&b));
        }
        out
    }

    fn covers(&self, b: &F, u: &Subset<F>) -> bool {
        let sat = saturate_finite(&self.src, &Subset::Listed(self.fiber_of_set(u))).expect("finite source");
        self.fiber(b).is_subset(&sat)
    }
}

impl<E: Element, F: Element> CoverDecider<F> for ImageDecider<E, F> {
    fn name(&self) -> &str {
        "image"
    }

    fn decide(&self, b: &F, u: &Subset<F>, _budget: u32) -> Option<CoverJudgment<F>> {
        if !self.covers(b, u) {
            return None;
        }
        let pre = Subset::Listed(self.fiber_of_set(u));
        let mut traces = Vec::new();
        for a in self.fiber(b) {
            let d = super::cover::cover_check(&self.src, &a, &pre, 0).proved()?;
            traces.push(serde_json::to_value(&d).ok()?);
        }
        Some(Verdict::Proved(Derivation::Plugin {
            element: b.clone(),
            certificate: PluginCertificate {
                plugin: "image".into(),
                payload: serde_json::json!({ "source_traces": traces }),
            },
        }))
    }

    fn replay(&self, b: &F, u: &Subset<F>, _cert: &PluginCertificate) -> Result<(), String> {
        if self.covers(b, u) {
            Ok(())
        } else {
            Err("fiber not covered in the source".into())
        }
    }
}

/// Image of `src` along `r` on the base of `tgt`: `b ◁ U ⟺ r⁻b ⊆ 𝒜(r⁻U)`.
pub fn image_topology<E: Element, F: Element>(
    r: &TopologyMap<E, F>,
    src: &FormalTopology<E>,
    tgt: &FormalTopology<F>,
) -> Result<FormalTopology<F>, FtopError> {
    let (Some(_), Some(tb)) = (src.finite_base(), tgt.finite_base()) else {
        return Err(FtopError::NonFiniteBase);
    };
    let dec = Arc::new(ImageDecider { src: src.clone(), tgt_base: tb.to_vec(), r: r.clone() });
    let d2 = dec.clone();
    let tgt2 = tgt.clone();
    let mut out = FormalTopology::new(
        &format!("image_{}", src.name),
        tgt.base().clone(),
        move |a, b| tgt2.le(a, b),
        AxiomSet::empty(),
        false,
    )
    .with_saturator(Arc::new(move |u: &BTreeSet<F>| {
        let s = Subset::Listed(u.clone());
        d2.tgt_base.iter().filter(|b| d2.covers(b, &s)).cloned().collect()
    }))
    .with_decider(dec);
    if let Some(pos) = src.positivity().cloned() {
        let sb = src.finite_base().unwrap().to_vec();
        let r2 = r.clone();
        out = out.with_positivity(move |b| sb.iter().any(|a| pos(a) && r2.relates(a, b)));
    }
    Ok(out)
}

/// `a ◁ r⁻r⁻*𝒜{a}` for every `a` of the source; refutes with the failing element.
pub fn embedding_check<E: Element, F: Element>(
    r: &TopologyMap<E, F>,
    src: &FormalTopology<E>,
    tgt: &FormalTopology<F>,
) -> Result<Verdict<(), E>, FtopError> {
    let (Some(sb), Some(tb)) = (src.finite_base(), tgt.finite_base()) else {
        return Err(FtopError::NonFiniteBase);
    };
    for a in sb {
        let sat_a = saturate_finite(src, &Subset::listed([a.clone()]))?;
        let star: Vec<&F> = tb
            .iter()
            .filter(|b| sb.iter().filter(|x| r.relates(x, b)).all(|x| sat_a.contains(x)))
            .collect();
        let back: BTreeSet<E> = sb.iter().filter(|x| star.iter().any(|b| r.relates(x, b))).cloned().collect();
        if !saturate_finite(src, &Subset::Listed(back))?.contains(a) {
            return Ok(Verdict::Refuted(a.clone()));
        }
    }
    Ok(Verdict::Proved(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftop::cover_check;

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn discrete(names: &[&str]) -> FormalTopology<String> {
        FormalTopology::finite("d", names.iter().map(|x| s(x)).collect(), |a, b| a == b, vec![], true)
    }

    #[test]
    fn singleton_point_of_discrete() {
        let t = discrete(&["a", "b"]);
        assert!(check_point(&t, &Subset::listed([s("a")]), 0).is_proved());
        let v = check_point(&t, &Subset::empty(), 0).refuted().unwrap();
        assert_eq!(v.condition, "P1");
        // two incomparable elements have no common lower bound
        assert_eq!(check_point(&t, &Subset::listed([s("a"), s("b")]), 0).refuted().unwrap().condition, "P2");
    }

    #[test]
    fn splitting_examples() {
        let t = FormalTopology::finite(
            "ab",
            vec![s("a"), s("b")],
            |a, b| a == b,
            vec![(s("a"), AxiomIndex::Nat(0), [s("b")].into())],
            true,
        );
        assert!(check_splitting(&t, &Subset::empty(), 0).is_proved());
        let w = check_splitting(&t, &Subset::listed([s("a")]), 0).refuted().unwrap();
        assert_eq!(w.condition, "Spl2'");
        assert!(check_splitting(&t, &Subset::listed([s("a"), s("b")]), 0).is_proved());
        assert!(matches!(weakly_closed(&t, Subset::listed([s("a")])), Err(FtopError::NotSplitting(_))));
    }

    #[test]
    fn full_positivity_leaves_covers_unchanged() {
        let t = FormalTopology::finite(
            "abc",
            vec![s("a"), s("b"), s("c")],
            |a, b| a == b,
            vec![(s("a"), AxiomIndex::Nat(0), [s("b"), s("c")].into())],
            true,
        );
        let all = Subset::listed([s("a"), s("b"), s("c")]);
        let tv = weakly_closed(&t, all).unwrap();
        for a in ["a", "b", "c"] {
            for u in [vec![], vec!["b"], vec!["b", "c"], vec!["a"]] {
                let u = Subset::listed(u.into_iter().map(s));
                assert_eq!(
                    cover_check(&t, &s(a), &u, 0).is_proved(),
                    cover_check(&tv, &s(a), &u, 0).is_proved()
                );
            }
        }
    }

    #[test]
    fn image_under_identity() {
        let t = FormalTopology::finite(
            "abc",
            vec![s("a"), s("b"), s("c")],
            |a, b| a == b,
            vec![(s("a"), AxiomIndex::Nat(0), [s("b")].into())],
            true,
        )
        .with_positivity(|x: &String| x != "c");
        let id = TopologyMap::identity();
        let img = image_topology(&id, &t, &t).unwrap();
        for u in [vec![], vec!["b"], vec!["c"]] {
            let u = Subset::listed(u.into_iter().map(s));
            assert_eq!(saturate_finite(&img, &u).unwrap(), saturate_finite(&t, &u).unwrap());
        }
        assert_eq!(img.is_positive(&s("a")), Some(true));
        assert_eq!(img.is_positive(&s("c")), Some(false));
        assert!(cover_check(&img, &s("a"), &Subset::listed([s("b")]), 0).is_proved());
        assert!(embedding_check(&id, &t, &t).unwrap().is_proved());
    }
}
