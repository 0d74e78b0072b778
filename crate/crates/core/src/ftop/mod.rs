//! Formal topologies given by a preorder and an axiom-set, with covers
//! decided by saturation on finite bases and by certified search otherwise.

mod cover;
mod finite;
mod maps;
mod points;
mod product;
mod theory;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::numeric::Rational;
use crate::verdict::Verdict;

pub use cover::{cover_check, cover_search_sampled, replay, saturate_finite, saturate_with_reasons, Reason};
pub use finite::{FiniteMapSpec, FiniteTopologySpec, AxiomRecord};
pub use maps::{check_ftm, map_compose, map_equal, FtmCertificate, FtmViolation, MapEqualCertificate, TopologyMap};
pub use points::{check_point, check_splitting, embedding_check, image_topology, weakly_closed, PointViolation};
pub use product::{binary_pairing, binary_product, family_pairing, family_product, pullback, FinSum};
pub use theory::{
    is_model, model_to_point, point_to_model, topology_of_theory, upper_real_theory, GeometricTheory, TheoryAxiom,
};

/// Bound satisfied by base elements of every topology in this crate.
pub trait Element: Clone + Ord + fmt::Debug + Serialize + Send + Sync + 'static {}
impl<T: Clone + Ord + fmt::Debug + Serialize + Send + Sync + 'static> Element for T {}

/// Structured axiom index; a small term language so products and
/// completions can tag and nest indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxiomIndex {
    Label(String),
    Nat(u64),
    Rat(Rational),
    Seq(Vec<AxiomIndex>),
}

impl AxiomIndex {
    pub fn label(s: &str) -> Self {
        AxiomIndex::Label(s.to_string())
    }

    pub fn tagged(tag: u64, inner: AxiomIndex) -> Self {
        AxiomIndex::Seq(vec![AxiomIndex::Nat(tag), inner])
    }

    /// Splits a `tagged` index.
    pub fn untag(&self) -> Option<(u64, &AxiomIndex)> {
        match self {
            AxiomIndex::Seq(v) if v.len() == 2 => match &v[0] {
                AxiomIndex::Nat(t) => Some((*t, &v[1])),
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for AxiomIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomIndex::Label(s) => write!(f, "{s}"),
            AxiomIndex::Nat(n) => write!(f, "{n}"),
            AxiomIndex::Rat(q) => write!(f, "{q}"),
            AxiomIndex::Seq(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Serialize for AxiomIndex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A finite slice of a possibly infinite enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    pub items: Vec<T>,
    /// True when `items` is the whole set.
    pub exhaustive: bool,
}

impl<T> Sample<T> {
    pub fn all(items: Vec<T>) -> Self {
        Sample { items, exhaustive: true }
    }

    pub fn partial(items: Vec<T>) -> Self {
        Sample { items, exhaustive: false }
    }
}

type Pred<E> = Arc<dyn Fn(&E) -> bool + Send + Sync>;
type Sampler<E> = Arc<dyn Fn(u32) -> Vec<E> + Send + Sync>;

/// A subset of the base: either listed, or a decidable predicate with an
/// optional sampler of its members.
#[derive(Clone)]
pub enum Subset<E> {
    Listed(BTreeSet<E>),
    /// `name`, when present, identifies the predicate intensionally: two
    /// subsets with the same name are the same subset.
    Pred { test: Pred<E>, sample: Option<Sampler<E>>, name: Option<Arc<str>> },
}

impl<E: Element> fmt::Debug for Subset<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subset::Listed(s) => f.debug_set().entries(s.iter()).finish(),
            Subset::Pred { name: Some(n), .. } => write!(f, "<{n}>"),
            Subset::Pred { .. } => write!(f, "<predicate>"),
        }
    }
}

impl<E: Element> Subset<E> {
    pub fn empty() -> Self {
        Subset::Listed(BTreeSet::new())
    }

    pub fn listed(items: impl IntoIterator<Item = E>) -> Self {
        Subset::Listed(items.into_iter().collect())
    }

    pub fn pred(test: impl Fn(&E) -> bool + Send + Sync + 'static) -> Self {
        Subset::Pred { test: Arc::new(test), sample: None, name: None }
    }

    pub fn pred_sampled(
        test: impl Fn(&E) -> bool + Send + Sync + 'static,
        sample: impl Fn(u32) -> Vec<E> + Send + Sync + 'static,
    ) -> Self {
        Subset::Pred { test: Arc::new(test), sample: Some(Arc::new(sample)), name: None }
    }

    /// A sampled predicate with an intensional name.
    pub fn named(
        name: &str,
        test: impl Fn(&E) -> bool + Send + Sync + 'static,
        sample: impl Fn(u32) -> Vec<E> + Send + Sync + 'static,
    ) -> Self {
        Subset::Pred { test: Arc::new(test), sample: Some(Arc::new(sample)), name: Some(name.into()) }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Subset::Pred { name, .. } => name.as_deref(),
            _ => None,
        }
    }

    /// Both named with the same name.
    pub fn same_named(&self, other: &Subset<E>) -> bool {
        matches!((self.name(), other.name()), (Some(a), Some(b)) if a == b)
    }

    pub fn contains(&self, e: &E) -> bool {
        match self {
            Subset::Listed(s) => s.contains(e),
            Subset::Pred { test, .. } => test(e),
        }
    }

    pub fn as_listed(&self) -> Option<&BTreeSet<E>> {
        match self {
            Subset::Listed(s) => Some(s),
            _ => None,
        }
    }

    /// Members at the given budget; predicate members are filtered through the test.
    pub fn sample(&self, budget: u32) -> Sample<E> {
        match self {
            Subset::Listed(s) => Sample::all(s.iter().cloned().collect()),
            Subset::Pred { test, sample, .. } => match sample {
                Some(f) => {
                    let mut v: Vec<E> = f(budget).into_iter().filter(|e| test(e)).collect();
                    v.dedup();
                    Sample::partial(v)
                }
                None => Sample::partial(Vec::new()),
            },
        }
    }

    /// Restriction to a finite universe.
    pub fn materialize(&self, universe: &[E]) -> BTreeSet<E> {
        match self {
            Subset::Listed(s) => s.clone(),
            Subset::Pred { test, .. } => universe.iter().filter(|e| test(e)).cloned().collect(),
        }
    }
}

type IndexFn<E> = Arc<dyn Fn(&E, u32) -> Sample<AxiomIndex> + Send + Sync>;
type BodyFn<E> = Arc<dyn Fn(&E, &AxiomIndex) -> Subset<E> + Send + Sync>;

/// `(I, C)`: indices per element and a body per index.
#[derive(Clone)]
pub struct AxiomSet<E> {
    index: IndexFn<E>,
    body: BodyFn<E>,
}

impl<E: Element> AxiomSet<E> {
    pub fn new(
        index: impl Fn(&E, u32) -> Sample<AxiomIndex> + Send + Sync + 'static,
        body: impl Fn(&E, &AxiomIndex) -> Subset<E> + Send + Sync + 'static,
    ) -> Self {
        AxiomSet { index: Arc::new(index), body: Arc::new(body) }
    }

    pub fn empty() -> Self {
        AxiomSet::new(|_, _| Sample::all(Vec::new()), |_, _| Subset::empty())
    }

    /// Finitely many axioms `a ◁ C`, indexed by position.
    pub fn finite(axioms: Vec<(E, AxiomIndex, BTreeSet<E>)>) -> Self {
        let ax = Arc::new(axioms);
        let ax2 = ax.clone();
        AxiomSet::new(
            move |a, _| {
                Sample::all(ax.iter().filter(|(e, _, _)| e == a).map(|(_, i, _)| i.clone()).collect())
            },
            move |a, i| {
                ax2.iter()
                    .find(|(e, j, _)| e == a && j == i)
                    .map(|(_, _, c)| Subset::Listed(c.clone()))
                    .unwrap_or_else(Subset::empty)
            },
        )
    }

    pub fn index(&self, a: &E, budget: u32) -> Sample<AxiomIndex> {
        (self.index)(a, budget)
    }

    pub fn body(&self, a: &E, i: &AxiomIndex) -> Subset<E> {
        (self.body)(a, i)
    }

    /// Adds the axioms of `other` alongside these (indices must not clash).
    pub fn union(&self, other: &AxiomSet<E>, tag_other: &str) -> AxiomSet<E> {
        let (a1, a2) = (self.clone(), other.clone());
        let (b1, b2) = (self.clone(), other.clone());
        let tag = tag_other.to_string();
        let tag2 = tag.clone();
        AxiomSet::new(
            move |a, n| {
                let s1 = a1.index(a, n);
                let s2 = a2.index(a, n);
                let mut items = s1.items;
                items.extend(
                    s2.items
                        .into_iter()
                        .map(|i| AxiomIndex::Seq(vec![AxiomIndex::Label(tag.clone()), i])),
                );
                Sample { items, exhaustive: s1.exhaustive && s2.exhaustive }
            },
            move |a, i| match i {
                AxiomIndex::Seq(v) if v.len() == 2 && v[0] == AxiomIndex::Label(tag2.clone()) => b2.body(a, &v[1]),
                _ => b1.body(a, i),
            },
        )
    }
}

/// Base handle: finite list, or a sampler indexed by budget.
#[derive(Clone)]
pub enum Base<E> {
    Finite(Vec<E>),
    Enumerated(Sampler<E>),
}

impl<E: Element> Base<E> {
    pub fn sample(&self, budget: u32) -> Sample<E> {
        match self {
            Base::Finite(v) => Sample::all(v.clone()),
            Base::Enumerated(f) => Sample::partial(f(budget)),
        }
    }

    pub fn finite(&self) -> Option<&[E]> {
        match self {
            Base::Finite(v) => Some(v),
            _ => None,
        }
    }
}

/// Certificate emitted by a decision plugin; replayed by the same plugin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PluginCertificate {
    pub plugin: String,
    pub payload: serde_json::Value,
}

/// Nested rule applications proving `element ◁ U`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Derivation<E> {
    Reflexivity {
        element: E,
    },
    LeLeft {
        element: E,
        above: E,
        premise: Box<Derivation<E>>,
    },
    /// `element ≤ via`, `index ∈ I(via)`, and each member of `element ↓ C(via, index)`
    /// (just `C(element, index)` when localised) covered by a premise.
    Infinity {
        element: E,
        via: E,
        index: AxiomIndex,
        premises: Vec<Derivation<E>>,
        exhaustive: bool,
    },
    Plugin {
        element: E,
        certificate: PluginCertificate,
    },
}

impl<E: Element> Derivation<E> {
    pub fn element(&self) -> &E {
        match self {
            Derivation::Reflexivity { element }
            | Derivation::LeLeft { element, .. }
            | Derivation::Infinity { element, .. }
            | Derivation::Plugin { element, .. } => element,
        }
    }

    /// False when some infinite premise set was only sampled.
    pub fn is_exhaustive(&self) -> bool {
        match self {
            Derivation::Reflexivity { .. } | Derivation::Plugin { .. } => true,
            Derivation::LeLeft { premise, .. } => premise.is_exhaustive(),
            Derivation::Infinity { premises, exhaustive, .. } => {
                *exhaustive && premises.iter().all(|p| p.is_exhaustive())
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Derivation::Reflexivity { .. } | Derivation::Plugin { .. } => 1,
            Derivation::LeLeft { premise, .. } => 1 + premise.size(),
            Derivation::Infinity { premises, .. } => 1 + premises.iter().map(|p| p.size()).sum::<usize>(),
        }
    }
}

/// A formal point offered as refutation evidence.
#[derive(Clone)]
pub enum PointWitness<E> {
    Listed(BTreeSet<E>),
    Described { label: String, member: Pred<E> },
}

impl<E: Element> PointWitness<E> {
    pub fn contains(&self, e: &E) -> bool {
        match self {
            PointWitness::Listed(s) => s.contains(e),
            PointWitness::Described { member, .. } => member(e),
        }
    }
}

impl<E: Element> fmt::Debug for PointWitness<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointWitness::Listed(s) => f.debug_set().entries(s.iter()).finish(),
            PointWitness::Described { label, .. } => write!(f, "{label}"),
        }
    }
}

impl<E: Element> Serialize for PointWitness<E> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PointWitness::Listed(set) => set.serialize(s),
            PointWitness::Described { label, .. } => s.serialize_str(label),
        }
    }
}

pub type CoverJudgment<E> = Verdict<Derivation<E>, PointWitness<E>>;

/// Concrete decision procedure attached to a topology.
pub trait CoverDecider<E: Element>: Send + Sync {
    fn name(&self) -> &str;
    /// `None` when the instance is outside the plugin's scope.
    fn decide(&self, a: &E, u: &Subset<E>, budget: u32) -> Option<CoverJudgment<E>>;
    fn replay(&self, a: &E, u: &Subset<E>, cert: &PluginCertificate) -> Result<(), String>;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FtopError {
    #[error("base is not finite")]
    NonFiniteBase,
    #[error("subset is not splitting: {0}")]
    NotSplitting(String),
    #[error("malformed topology: {0}")]
    Malformed(String),
}

type OrderFn<E> = Arc<dyn Fn(&E, &E) -> bool + Send + Sync>;
type MeetFn<E> = Arc<dyn Fn(&E, &E) -> Vec<E> + Send + Sync>;
type Saturator<E> = Arc<dyn Fn(&BTreeSet<E>) -> BTreeSet<E> + Send + Sync>;

/// `(S, ◁, ≤)` inductively generated by an axiom-set.
#[derive(Clone)]
pub struct FormalTopology<E: Element> {
    pub name: String,
    base: Base<E>,
    order: OrderFn<E>,
    axioms: AxiomSet<E>,
    localised: bool,
    decider: Option<Arc<dyn CoverDecider<E>>>,
    positivity: Option<Pred<E>>,
    meet_hint: Option<MeetFn<E>>,
    saturator: Option<Saturator<E>>,
}

impl<E: Element> fmt::Debug for FormalTopology<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormalTopology")
            .field("name", &self.name)
            .field("finite", &self.base.finite().map(|b| b.len()))
            .field("localised", &self.localised)
            .field("decider", &self.decider.as_ref().map(|d| d.name().to_string()))
            .finish()
    }
}

impl<E: Element> FormalTopology<E> {
    pub fn new(
        name: &str,
        base: Base<E>,
        order: impl Fn(&E, &E) -> bool + Send + Sync + 'static,
        axioms: AxiomSet<E>,
        localised: bool,
    ) -> Self {
        FormalTopology {
            name: name.to_string(),
            base,
            order: Arc::new(order),
            axioms,
            localised,
            decider: None,
            positivity: None,
            meet_hint: None,
            saturator: None,
        }
    }

    /// Finite topology with a preorder given by its graph.
    pub fn finite(
        name: &str,
        base: Vec<E>,
        order: impl Fn(&E, &E) -> bool + Send + Sync + 'static,
        axioms: Vec<(E, AxiomIndex, BTreeSet<E>)>,
        localised: bool,
    ) -> Self {
        FormalTopology::new(name, Base::Finite(base), order, AxiomSet::finite(axioms), localised)
    }

    pub fn with_decider(mut self, d: Arc<dyn CoverDecider<E>>) -> Self {
        self.decider = Some(d);
        self
    }

    pub fn with_positivity(mut self, p: impl Fn(&E) -> bool + Send + Sync + 'static) -> Self {
        self.positivity = Some(Arc::new(p));
        self
    }

    pub fn with_meet_hint(mut self, m: impl Fn(&E, &E) -> Vec<E> + Send + Sync + 'static) -> Self {
        self.meet_hint = Some(Arc::new(m));
        self
    }

    pub(crate) fn with_saturator(mut self, s: Saturator<E>) -> Self {
        self.saturator = Some(s);
        self
    }

    pub fn base(&self) -> &Base<E> {
        &self.base
    }

    pub fn finite_base(&self) -> Option<&[E]> {
        self.base.finite()
    }

    pub fn le(&self, a: &E, b: &E) -> bool {
        (self.order)(a, b)
    }

    pub fn axioms(&self) -> &AxiomSet<E> {
        &self.axioms
    }

    pub fn is_localised(&self) -> bool {
        self.localised
    }

    pub fn decider(&self) -> Option<&Arc<dyn CoverDecider<E>>> {
        self.decider.as_ref()
    }

    pub fn positivity(&self) -> Option<&Pred<E>> {
        self.positivity.as_ref()
    }

    pub fn is_positive(&self, a: &E) -> Option<bool> {
        self.positivity.as_ref().map(|p| p(a))
    }

    /// Candidates below both arguments, used by point checks.
    pub fn meet_candidates(&self, a: &E, b: &E) -> Vec<E> {
        self.meet_hint.as_ref().map(|m| m(a, b)).unwrap_or_default()
    }

    /// `a ↓ b` restricted to a finite universe.
    pub fn down_meet(&self, universe: &[E], a: &E, b: &E) -> Vec<E> {
        universe.iter().filter(|c| self.le(c, a) && self.le(c, b)).cloned().collect()
    }

    /// The premise set of `(≤-)infinity` for `a ≤ via` and index `i`, on a finite base.
    pub(crate) fn premise_set(&self, universe: &[E], a: &E, via: &E, i: &AxiomIndex) -> BTreeSet<E> {
        let body = self.axioms.body(via, i);
        if self.localised && a == via {
            return body.materialize(universe);
        }
        let members = body.materialize(universe);
        universe
            .iter()
            .filter(|c| self.le(c, a) && members.iter().any(|x| self.le(c, x)))
            .cloned()
            .collect()
    }

    pub(crate) fn saturator(&self) -> Option<&Saturator<E>> {
        self.saturator.as_ref()
    }
}
