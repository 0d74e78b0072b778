use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{One, Signed};

use super::{AxiomIndex, AxiomSet, Base, Element, FormalTopology, Sample, Subset};
use crate::numeric::{dyadic, int, rat, Rational, Q};
use crate::verdict::Verdict;

/// `⋀P ⊢ ⋁_i ⋀P_i`, tagged by an index.
#[derive(Clone, Debug)]
pub struct TheoryAxiom<G: Element> {
    pub index: AxiomIndex,
    pub premise: BTreeSet<G>,
    pub conclusion: Subset<BTreeSet<G>>,
}

type AxiomFamily<G> = Arc<dyn Fn(&BTreeSet<G>, u32) -> Sample<TheoryAxiom<G>> + Send + Sync>;

/// Propositional geometric theory over generators `G`.
#[derive(Clone)]
pub struct GeometricTheory<G: Element> {
    pub name: String,
    generators: Base<G>,
    /// Axioms whose premise is exactly the given set.
    axioms: AxiomFamily<G>,
}

impl<G: Element> GeometricTheory<G> {
    pub fn new(
        name: &str,
        generators: Base<G>,
        axioms: impl Fn(&BTreeSet<G>, u32) -> Sample<TheoryAxiom<G>> + Send + Sync + 'static,
    ) -> Self {
        GeometricTheory { name: name.to_string(), generators, axioms: Arc::new(axioms) }
    }

    /// Finitely many generators and axioms `(P, [P_i])`.
    pub fn finite(name: &str, generators: Vec<G>, axioms: Vec<(BTreeSet<G>, Vec<BTreeSet<G>>)>) -> Self {
        let ax: Vec<TheoryAxiom<G>> = axioms
            .into_iter()
            .enumerate()
            .map(|(k, (p, c))| TheoryAxiom {
                index: AxiomIndex::Nat(k as u64),
                premise: p,
                conclusion: Subset::listed(c),
            })
            .collect();
        GeometricTheory::new(name, Base::Finite(generators), move |p, _| {
            Sample::all(ax.iter().filter(|a| &a.premise == p).cloned().collect())
        })
    }

    pub fn generators(&self) -> &Base<G> {
        &self.generators
    }

    pub fn axioms_at(&self, premise: &BTreeSet<G>, budget: u32) -> Sample<TheoryAxiom<G>> {
        (self.axioms)(premise, budget)
    }

    /// Premises to examine: `∅`, singletons and pairs of sampled generators.
    fn premises(&self, budget: u32) -> (Vec<BTreeSet<G>>, bool) {
        let s = self.generators.sample(budget);
        if s.exhaustive && s.items.len() <= POWERSET_LIMIT {
            return (powerset(&s.items), true);
        }
        let mut out = vec![BTreeSet::new()];
        for (k, x) in s.items.iter().enumerate() {
            out.push([x.clone()].into());
            for y in &s.items[k + 1..] {
                out.push([x.clone(), y.clone()].into());
            }
        }
        (out, false)
    }
}

const POWERSET_LIMIT: usize = 10;

fn powerset<T: Clone + Ord>(items: &[T]) -> Vec<BTreeSet<T>> {
    (0u32..(1u32 << items.len()))
        .map(|m| items.iter().enumerate().filter(|(k, _)| m & (1 << k) != 0).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// `S_T`: base `Fin(G)`, `A ≤ B ⟺ B ⊆ A`, axioms `P ◁ {P_i}`.
pub fn topology_of_theory<G: Element>(th: &GeometricTheory<G>) -> FormalTopology<BTreeSet<G>> {
    let (elems, exhaustive) = th.premises(0);
    let base = if exhaustive {
        Base::Finite(elems)
    } else {
        let th2 = th.clone();
        Base::Enumerated(Arc::new(move |n| th2.premises(n).0))
    };
    let (t1, t2) = (th.clone(), th.clone());
    let axioms = AxiomSet::new(
        move |p: &BTreeSet<G>, n| {
            let s = t1.axioms_at(p, n);
            Sample { items: s.items.into_iter().map(|a| a.index).collect(), exhaustive: s.exhaustive }
        },
        move |p: &BTreeSet<G>, i: &AxiomIndex| {
            let s = t2.axioms_at(p, 0);
            if let Some(a) = s.items.into_iter().find(|a| &a.index == i) {
                return a.conclusion;
            }
            // Indices outside the budget-0 sample are regenerated at a larger budget.
            t2.axioms_at(p, 64)
                .items
                .into_iter()
                .find(|a| &a.index == i)
                .map(|a| a.conclusion)
                .unwrap_or_else(Subset::empty)
        },
    );
    FormalTopology::new(&format!("S_{}", th.name), base, |a: &BTreeSet<G>, b: &BTreeSet<G>| b.is_subset(a), axioms, false)
        .with_meet_hint(|a, b| vec![a.union(b).cloned().collect()])
}

/// `m ↦ Fin(m)`.
pub fn model_to_point<G: Element>(m: Subset<G>) -> Subset<BTreeSet<G>> {
    Subset::pred(move |a: &BTreeSet<G>| a.iter().all(|g| m.contains(g)))
}

/// `α ↦ {p | {p} ∈ α}`.
pub fn point_to_model<G: Element>(alpha: Subset<BTreeSet<G>>) -> Subset<G> {
    Subset::pred(move |g: &G| alpha.contains(&[g.clone()].into()))
}

/// Checks every sampled axiom whose premise holds in `m`. Refutes with the
/// index of a violated axiom whose conclusion was fully enumerated.
pub fn is_model<G: Element>(th: &GeometricTheory<G>, m: &Subset<G>, budget: u32) -> Verdict<(), AxiomIndex> {
    let (premises, _) = th.premises(budget);
    let mut unknown = false;
    for p in premises.iter().filter(|p| p.iter().all(|g| m.contains(g))) {
        for ax in th.axioms_at(p, budget).items {
            let concl = ax.conclusion.sample(budget);
            if concl.items.iter().any(|c| c.iter().all(|g| m.contains(g))) {
                continue;
            }
            if concl.exhaustive {
                return Verdict::Refuted(ax.index);
            }
            unknown = true;
        }
    }
    if unknown {
        Verdict::Unknown { budget }
    } else {
        Verdict::Proved(())
    }
}

/// Positive rationals `k/4` and `2^-j` at the given budget.
fn positive_rationals(n: u32) -> Vec<Q> {
    let mut v: BTreeSet<Rational> = (1..=4 * (n as i64 + 2)).map(|k| rat(k, 4)).collect();
    v.extend((1..=n + 2).map(dyadic));
    v.into_iter().map(Q).collect()
}

/// `T_u`: `q ⊢ q'` for `q ≤ q'`, and `q ⊢ ⋁_{q'<q} q'`.
pub fn upper_real_theory() -> GeometricTheory<Q> {
    GeometricTheory::new("upper_reals", Base::Enumerated(Arc::new(positive_rationals)), |p, n| {
        if p.len() != 1 {
            return Sample::all(vec![]);
        }
        let q = p.iter().next().unwrap().0.clone();
        if !q.is_positive() {
            return Sample::all(vec![]);
        }
        let q1 = q.clone();
        let q2 = q.clone();
        let mut out = vec![TheoryAxiom {
            index: AxiomIndex::label("round"),
            premise: p.clone(),
            conclusion: Subset::pred_sampled(
                move |c: &BTreeSet<Q>| c.len() == 1 && c.iter().next().is_some_and(|x| x.0.is_positive() && x.0 < q1),
                move |k| (1..=k + 2).map(|j| [Q(&q2 * (Rational::one() - dyadic(j)))].into()).collect(),
            ),
        }];
        let mut uppers: Vec<Rational> = (0..=n).map(|j| &q + dyadic(j)).collect();
        uppers.push(&q * int(2));
        for q2 in uppers {
            out.push(TheoryAxiom {
                index: AxiomIndex::Seq(vec![AxiomIndex::label("mono"), AxiomIndex::Rat(q2.clone())]),
                premise: p.clone(),
                conclusion: Subset::listed([[Q(q2)].into()]),
            });
        }
        Sample::partial(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftop::{check_point, saturate_finite};

    #[test]
    fn empty_theory_has_only_reflexive_covers() {
        let th: GeometricTheory<String> = GeometricTheory::finite("e", vec!["g".into()], vec![]);
        let t = topology_of_theory(&th);
        let g: BTreeSet<String> = ["g".to_string()].into();
        let sat = saturate_finite(&t, &Subset::listed([g.clone()])).unwrap();
        assert_eq!(sat, [g].into());
    }

    #[test]
    fn upper_reals_have_rounding_axiom() {
        let t = topology_of_theory(&upper_real_theory());
        let one: BTreeSet<Q> = [Q(int(1))].into();
        let idx = t.axioms().index(&one, 4);
        assert!(idx.items.contains(&AxiomIndex::label("round")));
        let body = t.axioms().body(&one, &AxiomIndex::label("round"));
        assert!(body.contains(&[Q(rat(1, 2))].into()));
        assert!(!body.contains(&[Q(int(1))].into()));
    }

    #[test]
    fn half_open_cut_is_a_point() {
        let th = upper_real_theory();
        let t = topology_of_theory(&th);
        let m = Subset::pred(|q: &Q| q.0 > rat(1, 2));
        assert!(is_model(&th, &m, 6).is_proved());
        let alpha = model_to_point(m.clone());
        assert!(check_point(&t, &alpha, 6).is_proved());
        // a closed cut is not rounded
        let closed = Subset::pred(|q: &Q| q.0 >= rat(1, 2));
        assert!(!check_point(&t, &model_to_point(closed), 6).is_proved());
        let back = point_to_model(alpha);
        for q in positive_rationals(6) {
            assert_eq!(back.contains(&q), m.contains(&q));
        }
    }
}
