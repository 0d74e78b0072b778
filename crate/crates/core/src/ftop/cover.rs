use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::points::check_point;
use super::{AxiomIndex, CoverJudgment, Derivation, Element, FormalTopology, FtopError, PointWitness, Subset};
use crate::verdict::Verdict;

/// Why an element entered the saturation.
#[derive(Clone, Debug, PartialEq)]
pub enum Reason<E> {
    Member,
    Below(E),
    Axiom { via: E, index: AxiomIndex },
}

/// Largest base on which refutation enumerates candidate points.
const REFUTE_LIMIT: usize = 12;
/// Index sampling budget used on finite bases, where index sets are exhaustive.
const FINITE_INDEX_BUDGET: u32 = 64;
const MAX_SEARCH_DEPTH: u32 = 6;

/// `𝒜U` on a finite base: least set containing `U`, closed under `≤`-left and
/// the (≤-)infinity rule.
pub fn saturate_finite<E: Element>(t: &FormalTopology<E>, u: &Subset<E>) -> Result<BTreeSet<E>, FtopError> {
    let universe = t.finite_base().ok_or(FtopError::NonFiniteBase)?;
    if let Some(s) = t.saturator() {
        return Ok(s(&u.materialize(universe)));
    }
    Ok(saturate_with_reasons(t, u, !t.is_localised())?.into_keys().collect())
}

/// Saturation with one reason per element. `le_infinity` selects the
/// (≤-infinity) rule; otherwise only (infinity) at the element itself is used.
pub fn saturate_with_reasons<E: Element>(
    t: &FormalTopology<E>,
    u: &Subset<E>,
    le_infinity: bool,
) -> Result<BTreeMap<E, Reason<E>>, FtopError> {
    let universe = t.finite_base().ok_or(FtopError::NonFiniteBase)?;
    let mut sat: BTreeMap<E, Reason<E>> = BTreeMap::new();
    for x in u.materialize(universe) {
        sat.insert(x, Reason::Member);
    }
    // Premise sets do not depend on U; compute them once.
    let mut rules: Vec<(E, E, AxiomIndex, BTreeSet<E>)> = Vec::new();
    for a in universe {
        let vias: Vec<&E> = if le_infinity {
            universe.iter().filter(|v| t.le(a, v)).collect()
        } else {
            vec![a]
        };
        for via in vias {
            for i in t.axioms().index(via, FINITE_INDEX_BUDGET).items {
                let prem = if le_infinity {
                    t.premise_set(universe, a, via, &i)
                } else {
                    t.axioms().body(a, &i).materialize(universe)
                };
                rules.push((a.clone(), via.clone(), i, prem));
            }
        }
    }
    loop {
        let mut changed = false;
        for a in universe {
            if sat.contains_key(a) {
                continue;
            }
            if let Some(b) = universe.iter().find(|b| sat.contains_key(*b) && t.le(a, b)) {
                sat.insert(a.clone(), Reason::Below(b.clone()));
                changed = true;
                continue;
            }
            if let Some((_, via, i, _)) =
                rules.iter().find(|(x, _, _, p)| x == a && p.iter().all(|c| sat.contains_key(c)))
            {
                sat.insert(a.clone(), Reason::Axiom { via: via.clone(), index: i.clone() });
                changed = true;
            }
        }
        if !changed {
            return Ok(sat);
        }
    }
}

fn trace_from_reasons<E: Element>(
    t: &FormalTopology<E>,
    universe: &[E],
    reasons: &BTreeMap<E, Reason<E>>,
    a: &E,
    le_infinity: bool,
    memo: &mut BTreeMap<E, Derivation<E>>,
) -> Derivation<E> {
    if let Some(d) = memo.get(a) {
        return d.clone();
    }
    let d = match &reasons[a] {
        Reason::Member => Derivation::Reflexivity { element: a.clone() },
        Reason::Below(b) => Derivation::LeLeft {
            element: a.clone(),
            above: b.clone(),
            premise: Box::new(trace_from_reasons(t, universe, reasons, b, le_infinity, memo)),
        },
        Reason::Axiom { via, index } => {
            let prem = if le_infinity {
                t.premise_set(universe, a, via, index)
            } else {
                t.axioms().body(a, index).materialize(universe)
            };
            let premises = prem
                .iter()
                .map(|c| trace_from_reasons(t, universe, reasons, c, le_infinity, memo))
                .collect();
            Derivation::Infinity {
                element: a.clone(),
                via: via.clone(),
                index: index.clone(),
                premises,
                exhaustive: true,
            }
        }
    };
    memo.insert(a.clone(), d.clone());
    d
}

/// Decides or semidecides `a ◁ U`.
///
/// Finite bases are decided by saturation, with refutation by a point found
/// among subsets of small bases. Otherwise a plugin is consulted, then a
/// depth-bounded backward search that only uses fully enumerated premises.
pub fn cover_check<E: Element>(t: &FormalTopology<E>, a: &E, u: &Subset<E>, budget: u32) -> CoverJudgment<E> {
    if u.contains(a) {
        return Verdict::Proved(Derivation::Reflexivity { element: a.clone() });
    }
    if let (Some(universe), None) = (t.finite_base(), t.saturator()) {
        if universe.contains(a) {
            let le_inf = !t.is_localised();
            let reasons = match saturate_with_reasons(t, u, le_inf) {
                Ok(r) => r,
                Err(_) => return Verdict::Unknown { budget },
            };
            if reasons.contains_key(a) {
                let mut memo = BTreeMap::new();
                return Verdict::Proved(trace_from_reasons(t, universe, &reasons, a, le_inf, &mut memo));
            }
            return match refute_finite(t, universe, a, u) {
                Some(w) => Verdict::Refuted(w),
                None => Verdict::Unknown { budget },
            };
        }
    }
    if let Some(d) = t.decider() {
        if let Some(j) = d.decide(a, u, budget) {
            if !j.is_unknown() {
                return j;
            }
        }
    }
    match search(t, a, u, budget, false) {
        Some(d) => Verdict::Proved(d),
        None => Verdict::Unknown { budget },
    }
}

/// Backward search that may sample infinite premise sets. The result is a
/// derivation whose `is_exhaustive` flag says whether it is a proof.
pub fn cover_search_sampled<E: Element>(
    t: &FormalTopology<E>,
    a: &E,
    u: &Subset<E>,
    budget: u32,
) -> Option<Derivation<E>> {
    search(t, a, u, budget, true)
}

fn refute_finite<E: Element>(t: &FormalTopology<E>, universe: &[E], a: &E, u: &Subset<E>) -> Option<PointWitness<E>> {
    if universe.len() > REFUTE_LIMIT {
        return None;
    }
    let candidates: Vec<&E> = universe.iter().filter(|x| *x != a && !u.contains(x)).collect();
    if u.contains(a) {
        return None;
    }
    for mask in 0u32..(1u32 << candidates.len()) {
        let mut alpha: BTreeSet<E> = BTreeSet::new();
        alpha.insert(a.clone());
        for (k, c) in candidates.iter().enumerate() {
            if mask & (1 << k) != 0 {
                alpha.insert((*c).clone());
            }
        }
        let set = alpha.clone();
        if check_point(t, &Subset::Listed(set), 0).is_proved() {
            return Some(PointWitness::Listed(alpha));
        }
    }
    None
}

struct Searcher<'a, E: Element> {
    t: &'a FormalTopology<E>,
    u: &'a Subset<E>,
    u_sample: Vec<E>,
    budget: u32,
    sampled: bool,
    failed: HashSet<(String, u32)>,
    nodes: usize,
    node_limit: usize,
}

fn search<E: Element>(t: &FormalTopology<E>, a: &E, u: &Subset<E>, budget: u32, sampled: bool) -> Option<Derivation<E>> {
    let mut s = Searcher {
        t,
        u,
        u_sample: u.sample(budget).items,
        budget,
        sampled,
        failed: HashSet::new(),
        nodes: 0,
        node_limit: 4000 * (budget as usize + 1),
    };
    let max_depth = budget.min(MAX_SEARCH_DEPTH);
    for depth in 0..=max_depth {
        if let Some(d) = s.prove(a, depth) {
            return Some(d);
        }
        if s.nodes > s.node_limit {
            break;
        }
    }
    None
}

impl<E: Element> Searcher<'_, E> {
    fn prove(&mut self, a: &E, depth: u32) -> Option<Derivation<E>> {
        if self.u.contains(a) {
            return Some(Derivation::Reflexivity { element: a.clone() });
        }
        if let Some(b) = self.u_sample.iter().find(|b| self.t.le(a, b)) {
            return Some(Derivation::LeLeft {
                element: a.clone(),
                above: b.clone(),
                premise: Box::new(Derivation::Reflexivity { element: b.clone() }),
            });
        }
        if depth == 0 || self.nodes > self.node_limit {
            return None;
        }
        let key = (format!("{a:?}"), depth);
        if self.failed.contains(&key) {
            return None;
        }
        self.nodes += 1;
        let idx = self.t.axioms().index(a, self.budget);
        'axioms: for i in idx.items {
            let body = self.t.axioms().body(a, &i);
            if body.same_named(self.u) {
                return Some(Derivation::Infinity {
                    element: a.clone(),
                    via: a.clone(),
                    index: i,
                    premises: vec![],
                    exhaustive: true,
                });
            }
            let (members, exhaustive) = match &body {
                Subset::Listed(s) => (s.iter().cloned().collect::<Vec<_>>(), true),
                Subset::Pred { .. } if self.sampled => (body.sample(self.budget).items, false),
                Subset::Pred { .. } => continue,
            };
            let mut premises = Vec::with_capacity(members.len());
            for c in &members {
                match self.prove(c, depth - 1) {
                    Some(d) => premises.push(d),
                    None => continue 'axioms,
                }
            }
            return Some(Derivation::Infinity {
                element: a.clone(),
                via: a.clone(),
                index: i,
                premises,
                exhaustive,
            });
        }
        self.failed.insert(key);
        None
    }
}

/// Checks a derivation against the rules, rejecting any malformed node.
/// Sampled nodes pass when their premises lie in the body; callers read
/// `is_exhaustive` to tell proofs from sampled evidence.
pub fn replay<E: Element>(t: &FormalTopology<E>, a: &E, u: &Subset<E>, d: &Derivation<E>) -> Result<(), String> {
    if d.element() != a {
        return Err(format!("derivation concludes {:?}, expected {:?}", d.element(), a));
    }
    replay_node(t, u, d)
}

fn replay_node<E: Element>(t: &FormalTopology<E>, u: &Subset<E>, d: &Derivation<E>) -> Result<(), String> {
    match d {
        Derivation::Reflexivity { element } => {
            if u.contains(element) {
                Ok(())
            } else {
                Err(format!("reflexivity: {element:?} not in U"))
            }
        }
        Derivation::LeLeft { element, above, premise } => {
            if !t.le(element, above) {
                return Err(format!("le-left: {element:?} not below {above:?}"));
            }
            if premise.element() != above {
                return Err("le-left: premise concludes the wrong element".into());
            }
            replay_node(t, u, premise)
        }
        Derivation::Infinity { element, via, index, premises, exhaustive } => {
            if !t.le(element, via) {
                return Err(format!("infinity: {element:?} not below {via:?}"));
            }
            if element != via && t.finite_base().is_none() {
                return Err("infinity: shifted application needs a finite base".into());
            }
            let body = t.axioms().body(via, index);
            let covered = |x: &E| premises.iter().any(|p| t.le(x, p.element()));
            if body.same_named(u) {
                // the body is the cover itself
            } else if *exhaustive {
                if let Some(universe) = t.finite_base() {
                    for x in t.premise_set(universe, element, via, index) {
                        if !covered(&x) {
                            return Err(format!("infinity: premise {x:?} uncovered"));
                        }
                    }
                } else {
                    let listed = body
                        .as_listed()
                        .ok_or_else(|| "infinity: exhaustive node over an infinite body".to_string())?;
                    for x in listed {
                        if !covered(x) {
                            return Err(format!("infinity: premise {x:?} uncovered"));
                        }
                    }
                }
            } else {
                for p in premises {
                    if !body.contains(p.element()) {
                        return Err(format!("infinity: sampled premise {:?} not in body", p.element()));
                    }
                }
            }
            premises.iter().try_for_each(|p| replay_node(t, u, p))
        }
        Derivation::Plugin { element, certificate } => {
            let dec = t.decider().ok_or_else(|| "plugin certificate without plugin".to_string())?;
            if dec.name() != certificate.plugin {
                return Err(format!("certificate from {}, topology uses {}", certificate.plugin, dec.name()));
            }
            dec.replay(element, u, certificate)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftop::{AxiomSet, Base};

    fn chain_topology() -> FormalTopology<String> {
        let s = |x: &str| x.to_string();
        FormalTopology::finite(
            "chain",
            vec![s("a"), s("b"), s("c")],
            |x, y| x == y,
            vec![
                (s("a"), AxiomIndex::Nat(0), [s("b")].into()),
                (s("b"), AxiomIndex::Nat(0), [s("c")].into()),
            ],
            true,
        )
    }

    #[test]
    fn saturates_through_axiom_chain() {
        let t = chain_topology();
        let sat = saturate_finite(&t, &Subset::listed(["c".to_string()])).unwrap();
        assert_eq!(sat.len(), 3);
    }

    #[test]
    fn le_left_only() {
        let t = FormalTopology::finite("le", vec![0, 1], |x, y| x <= y, vec![], true);
        let sat = saturate_finite(&t, &Subset::listed([1])).unwrap();
        assert_eq!(sat, [0, 1].into());
        let sat = saturate_finite(&t, &Subset::listed([0])).unwrap();
        assert_eq!(sat, [0].into());
    }

    #[test]
    fn non_finite_base_errors() {
        let t = FormalTopology::new("n", Base::Enumerated(std::sync::Arc::new(|n| (0..n as i64).collect())), |a: &i64, b| a == b, AxiomSet::empty(), true);
        assert_eq!(saturate_finite(&t, &Subset::empty()), Err(FtopError::NonFiniteBase));
    }

    #[test]
    fn proved_traces_replay() {
        let t = chain_topology();
        let u = Subset::listed(["c".to_string()]);
        let d = cover_check(&t, &"a".to_string(), &u, 4).proved().unwrap();
        assert!(d.is_exhaustive());
        replay(&t, &"a".to_string(), &u, &d).unwrap();
    }

    #[test]
    fn refutes_with_point() {
        let t = chain_topology();
        let u = Subset::listed(["a".to_string()]);
        let w = cover_check(&t, &"c".to_string(), &u, 4).refuted().unwrap();
        assert!(w.contains(&"c".to_string()));
        assert!(!w.contains(&"a".to_string()));
    }

    #[test]
    fn tampered_trace_rejected() {
        let t = chain_topology();
        let u = Subset::listed(["c".to_string()]);
        let bad = Derivation::Infinity {
            element: "a".to_string(),
            via: "a".to_string(),
            index: AxiomIndex::Nat(0),
            premises: vec![],
            exhaustive: true,
        };
        assert!(replay(&t, &"a".to_string(), &u, &bad).is_err());
    }

    #[test]
    fn infinite_search_uses_listed_bodies() {
        // n ◁ {n+1} on the naturals; 0 ◁ {3} needs depth three.
        let t = FormalTopology::new(
            "succ",
            Base::Enumerated(std::sync::Arc::new(|n| (0..=n as u64).collect())),
            |a: &u64, b: &u64| a == b,
            AxiomSet::new(
                |_, _| super::super::Sample::all(vec![AxiomIndex::Nat(0)]),
                |a: &u64, _| Subset::listed([a + 1]),
            ),
            true,
        );
        let u = Subset::listed([3u64]);
        let d = cover_check(&t, &0, &u, 4).proved().unwrap();
        replay(&t, &0, &u, &d).unwrap();
        assert!(cover_check(&t, &0, &u, 2).is_unknown());
    }
}
