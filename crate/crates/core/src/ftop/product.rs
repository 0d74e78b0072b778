use std::collections::BTreeSet;
use std::sync::Arc;

use super::cover::cover_check;
use super::maps::TopologyMap;
use super::{AxiomIndex, AxiomSet, Base, Element, FormalTopology, Sample, Subset};

/// Element of `Fin(Σ S_i)`: a finite set of tagged elements.
pub type FinSum<E> = BTreeSet<(usize, E)>;

/// Largest disjoint union whose powerset is materialised.
const POWERSET_LIMIT: usize = 12;

fn powerset<T: Clone + Ord>(items: &[T]) -> Vec<BTreeSet<T>> {
    (0u32..(1u32 << items.len()))
        .map(|m| items.iter().enumerate().filter(|(k, _)| m & (1 << k) != 0).map(|(_, x)| x.clone()).collect())
        .collect()
}

fn singleton<E: Element>(i: usize, a: E) -> FinSum<E> {
    [(i, a)].into_iter().collect()
}

fn as_singleton<E: Element>(a: &FinSum<E>) -> Option<(usize, &E)> {
    if a.len() == 1 {
        a.iter().next().map(|(i, x)| (*i, x))
    } else {
        None
    }
}

/// Product of a family, generated on `Fin(Σ S_i)` with `A ≤ B` when every
/// member of `B` lies above a member of `A` with the same tag. Returns the
/// projections `A p_i a ⟺ A = {(i,a)}`.
pub fn family_product<E: Element>(
    parts: &[FormalTopology<E>],
) -> (FormalTopology<FinSum<E>>, Vec<TopologyMap<FinSum<E>, E>>) {
    let parts: Arc<Vec<FormalTopology<E>>> = Arc::new(parts.to_vec());
    let finite_sum: Option<Vec<(usize, E)>> = parts
        .iter()
        .enumerate()
        .map(|(i, p)| p.finite_base().map(|b| b.iter().map(|x| (i, x.clone())).collect::<Vec<_>>()))
        .collect::<Option<Vec<_>>>()
        .map(|v| v.concat());
    let base = match finite_sum {
        Some(sum) if sum.len() <= POWERSET_LIMIT => Base::Finite(powerset(&sum)),
        _ => {
            let p = parts.clone();
            Base::Enumerated(Arc::new(move |n| {
                let sum: Vec<(usize, E)> = p
                    .iter()
                    .enumerate()
                    .flat_map(|(i, t)| t.base().sample(n).items.into_iter().take(6).map(move |x| (i, x)))
                    .collect();
                let mut out: Vec<FinSum<E>> = vec![BTreeSet::new()];
                for (k, x) in sum.iter().enumerate() {
                    out.push([x.clone()].into_iter().collect());
                    for y in &sum[k + 1..] {
                        out.push([x.clone(), y.clone()].into_iter().collect());
                    }
                }
                out
            }))
        }
    };
    let po = parts.clone();
    let order = move |a: &FinSum<E>, b: &FinSum<E>| {
        b.iter().all(|(j, y)| a.iter().any(|(i, x)| i == j && po[*i].le(x, y)))
    };
    let pi = parts.clone();
    let pb = parts.clone();
    let axioms = AxiomSet::new(
        move |a: &FinSum<E>, n| {
            let mut idx = Vec::new();
            let mut exhaustive = true;
            if a.is_empty() {
                idx.extend((0..pi.len()).map(|i| AxiomIndex::Seq(vec![AxiomIndex::label("S1"), AxiomIndex::Nat(i as u64)])));
            } else if a.len() == 2 {
                let v: Vec<&(usize, E)> = a.iter().collect();
                if v[0].0 == v[1].0 {
                    idx.push(AxiomIndex::label("S2"));
                }
            } else if let Some((i, x)) = as_singleton(a) {
                let s = pi[i].axioms().index(x, n);
                exhaustive = s.exhaustive;
                idx.extend(s.items.into_iter().map(|k| AxiomIndex::Seq(vec![AxiomIndex::label("S3"), k])));
            }
            Sample { items: idx, exhaustive }
        },
        move |a: &FinSum<E>, idx: &AxiomIndex| {
            let AxiomIndex::Seq(v) = idx else {
                return s2_body(&pb, a);
            };
            match (&v[0], v.get(1)) {
                (AxiomIndex::Label(l), Some(AxiomIndex::Nat(i))) if l == "S1" => {
                    let i = *i as usize;
                    let part = pb[i].clone();
                    match part.finite_base() {
                        Some(b) => Subset::listed(b.iter().map(|x| singleton(i, x.clone()))),
                        None => Subset::pred_sampled(
                            move |c: &FinSum<E>| as_singleton(c).is_some_and(|(j, _)| j == i),
                            move |n| part.base().sample(n).items.into_iter().map(|x| singleton(i, x)).collect(),
                        ),
                    }
                }
                (AxiomIndex::Label(l), Some(k)) if l == "S3" => {
                    let Some((i, x)) = as_singleton(a) else { return Subset::empty() };
                    match pb[i].axioms().body(x, k) {
                        Subset::Listed(s) => Subset::listed(s.into_iter().map(|y| singleton(i, y))),
                        body => {
                            let b2 = body.clone();
                            Subset::pred_sampled(
                                move |c: &FinSum<E>| as_singleton(c).is_some_and(|(j, y)| j == i && body.contains(y)),
                                move |n| b2.sample(n).items.into_iter().map(|y| singleton(i, y)).collect(),
                            )
                        }
                    }
                }
                _ => Subset::empty(),
            }
        },
    );
    let mut prod = FormalTopology::new("product", base, order, axioms, false);
    if parts.iter().all(|p| p.positivity().is_some()) {
        let pp = parts.clone();
        prod = prod.with_positivity(move |a: &FinSum<E>| {
            a.iter().all(|(i, x)| pp[*i].is_positive(x).unwrap_or(true))
        });
    }
    let projections = (0..parts.len())
        .map(|i| {
            TopologyMap::new(&format!("p{i}"), move |a: &FinSum<E>, x: &E| {
                as_singleton(a).is_some_and(|(j, y)| j == i && y == x)
            })
            .with_forward(move |a: &FinSum<E>, _| match as_singleton(a) {
                Some((j, y)) if j == i => vec![y.clone()],
                _ => vec![],
            })
            .with_fiber(move |x: &E, _| vec![singleton(i, x.clone())])
        })
        .collect();
    (prod, projections)
}

/// (S2) at `{(i,a),(i,b)}`: the singletons below both.
fn s2_body<E: Element>(parts: &Arc<Vec<FormalTopology<E>>>, a: &FinSum<E>) -> Subset<FinSum<E>> {
    let v: Vec<(usize, E)> = a.iter().cloned().collect();
    if v.len() != 2 || v[0].0 != v[1].0 {
        return Subset::empty();
    }
    let (i, x, y) = (v[0].0, v[0].1.clone(), v[1].1.clone());
    let part = parts[i].clone();
    if let Some(b) = part.finite_base() {
        return Subset::listed(part.down_meet(b, &x, &y).into_iter().map(|c| singleton(i, c)));
    }
    let (p2, x2, y2) = (part.clone(), x.clone(), y.clone());
    Subset::pred_sampled(
        move |c: &FinSum<E>| as_singleton(c).is_some_and(|(j, z)| j == i && part.le(z, &x) && part.le(z, &y)),
        move |_| p2.meet_candidates(&x2, &y2).into_iter().map(|c| singleton(i, c)).collect(),
    )
}

/// Mediating map into a family product: `c r A ⟺ c ◁ r_i⁻a` for every `(i,a) ∈ A`.
pub fn family_pairing<D: Element, E: Element>(
    src: &FormalTopology<D>,
    maps: &[TopologyMap<D, E>],
    budget: u32,
) -> TopologyMap<D, FinSum<E>> {
    let (src, maps) = (src.clone(), maps.to_vec());
    TopologyMap::new("pairing", move |c: &D, a: &FinSum<E>| {
        a.iter().all(|(i, x)| {
            let pre = maps[*i].preimage(&Subset::listed([x.clone()]), budget);
            cover_check(&src, c, &pre, budget).is_proved()
        })
    })
}

fn tag_index(side: u64, i: AxiomIndex) -> AxiomIndex {
    AxiomIndex::tagged(side, i)
}

fn lift_body<E: Element, F: Element, X: Element>(
    body: Subset<X>,
    embed: impl Fn(X) -> (E, F) + Send + Sync + Clone + 'static,
    project: impl Fn(&(E, F)) -> Option<X> + Send + Sync + 'static,
) -> Subset<(E, F)> {
    match body {
        Subset::Listed(s) => Subset::listed(s.into_iter().map(embed)),
        body => {
            let b2 = body.clone();
            Subset::pred_sampled(
                move |p: &(E, F)| project(p).is_some_and(|x| body.contains(&x)),
                move |n| b2.sample(n).items.into_iter().map(embed.clone()).collect(),
            )
        }
    }
}

fn binary_axioms<E: Element, F: Element>(s: &FormalTopology<E>, t: &FormalTopology<F>) -> AxiomSet<(E, F)> {
    let (s1, t1, s2, t2) = (s.clone(), t.clone(), s.clone(), t.clone());
    AxiomSet::new(
        move |(a, b): &(E, F), n| {
            let (x, y) = (s1.axioms().index(a, n), t1.axioms().index(b, n));
            let mut items: Vec<AxiomIndex> = x.items.into_iter().map(|i| tag_index(0, i)).collect();
            items.extend(y.items.into_iter().map(|j| tag_index(1, j)));
            Sample { items, exhaustive: x.exhaustive && y.exhaustive }
        },
        move |(a, b): &(E, F), idx| match idx.untag() {
            Some((0, i)) => {
                let (b1, b2) = (b.clone(), b.clone());
                lift_body(
                    s2.axioms().body(a, i),
                    move |x| (x, b1.clone()),
                    move |(x, y): &(E, F)| (*y == b2).then(|| x.clone()),
                )
            }
            Some((1, j)) => {
                let (a1, a2) = (a.clone(), a.clone());
                lift_body(
                    t2.axioms().body(b, j),
                    move |y| (a1.clone(), y),
                    move |(x, y): &(E, F)| (*x == a2).then(|| y.clone()),
                )
            }
            _ => Subset::empty(),
        },
    )
}

fn pair_base<E: Element, F: Element>(s: &FormalTopology<E>, t: &FormalTopology<F>) -> Base<(E, F)> {
    match (s.finite_base(), t.finite_base()) {
        (Some(x), Some(y)) => Base::Finite(x.iter().flat_map(|a| y.iter().map(move |b| (a.clone(), b.clone()))).collect()),
        _ => {
            let (s, t) = (s.clone(), t.clone());
            Base::Enumerated(Arc::new(move |n| {
                let ys = t.base().sample(n).items;
                s.base()
                    .sample(n)
                    .items
                    .into_iter()
                    .flat_map(|a| ys.iter().map(move |b| (a.clone(), b.clone())).collect::<Vec<_>>())
                    .collect()
            }))
        }
    }
}

fn pair_topology<E: Element, F: Element>(
    name: &str,
    s: &FormalTopology<E>,
    t: &FormalTopology<F>,
    axioms: AxiomSet<(E, F)>,
    localised: bool,
) -> FormalTopology<(E, F)> {
    let (so, to) = (s.clone(), t.clone());
    let mut p = FormalTopology::new(
        name,
        pair_base(s, t),
        move |(a, b): &(E, F), (c, d): &(E, F)| so.le(a, c) && to.le(b, d),
        axioms,
        localised,
    );
    let (sm, tm) = (s.clone(), t.clone());
    p = p.with_meet_hint(move |(a, b), (c, d)| {
        let xs = sm.meet_candidates(a, c);
        let ys = tm.meet_candidates(b, d);
        xs.iter().flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone()))).collect()
    });
    if let (Some(ps), Some(pt)) = (s.positivity().cloned(), t.positivity().cloned()) {
        p = p.with_positivity(move |(a, b)| ps(a) && pt(b));
    }
    p
}

fn projections<E: Element, F: Element>(
    prod: &FormalTopology<(E, F)>,
    s: &FormalTopology<E>,
    t: &FormalTopology<F>,
    budget: u32,
) -> (TopologyMap<(E, F), E>, TopologyMap<(E, F), F>) {
    let (p1, p2, so, to) = (prod.clone(), prod.clone(), s.clone(), t.clone());
    let (sf, tf) = (s.clone(), t.clone());
    let left = TopologyMap::new("p1", move |ab: &(E, F), x: &E| {
        so.le(&ab.0, x) || {
            let x = x.clone();
            cover_check(&p1, ab, &Subset::pred(move |p: &(E, F)| p.0 == x), budget).is_proved()
        }
    })
    .with_forward(|ab: &(E, F), _| vec![ab.0.clone()])
    .with_fiber(move |x: &E, n| tf.base().sample(n).items.into_iter().map(|y| (x.clone(), y)).collect());
    let right = TopologyMap::new("p2", move |ab: &(E, F), y: &F| {
        to.le(&ab.1, y) || {
            let y = y.clone();
            cover_check(&p2, ab, &Subset::pred(move |p: &(E, F)| p.1 == y), budget).is_proved()
        }
    })
    .with_forward(|ab: &(E, F), _| vec![ab.1.clone()])
    .with_fiber(move |y: &F, n| sf.base().sample(n).items.into_iter().map(|x| (x, y.clone())).collect());
    (left, right)
}

/// Binary product on `S × T` with the coordinatewise order, generated by
/// `(a,b) ◁ C(a,i) × {b}` and `(a,b) ◁ {a} × D(b,j)`. Projections relate
/// `(a,b)` to `a'` when `(a,b) ◁ {a'} × T`.
#[allow(clippy::type_complexity)]
pub fn binary_product<E: Element, F: Element>(
    s: &FormalTopology<E>,
    t: &FormalTopology<F>,
    budget: u32,
) -> (FormalTopology<(E, F)>, TopologyMap<(E, F), E>, TopologyMap<(E, F), F>) {
    let prod = pair_topology(
        &format!("{}×{}", s.name, t.name),
        s,
        t,
        binary_axioms(s, t),
        s.is_localised() && t.is_localised(),
    );
    let (p1, p2) = projections(&prod, s, t, budget);
    (prod, p1, p2)
}

/// `c ⟨r,s⟩ (a,b) ⟺ c ◁ r⁻a ∧ c ◁ s⁻b`.
pub fn binary_pairing<D: Element, E: Element, F: Element>(
    src: &FormalTopology<D>,
    r: &TopologyMap<D, E>,
    s: &TopologyMap<D, F>,
    budget: u32,
) -> TopologyMap<D, (E, F)> {
    let (src, r, s) = (src.clone(), r.clone(), s.clone());
    let (r2, s2) = (r.clone(), s.clone());
    TopologyMap::new("pairing", move |c: &D, (a, b): &(E, F)| {
        let ra = r.preimage(&Subset::listed([a.clone()]), budget);
        let sb = s.preimage(&Subset::listed([b.clone()]), budget);
        cover_check(&src, c, &ra, budget).is_proved() && cover_check(&src, c, &sb, budget).is_proved()
    })
    .with_forward(move |c, n| {
        let xs = r2.forward_sample(None, c, n).items;
        let ys = s2.forward_sample(None, c, n).items;
        xs.iter().flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone()))).collect()
    })
}

/// Pullback of `r: S₁ → T` and `s: S₂ → T` (finite `T`): the binary product
/// with `(a,b) ◁ S₁ × s⁻c` when `a r c`, and `(a,b) ◁ r⁻c × S₂` when `b s c`.
#[allow(clippy::type_complexity)]
pub fn pullback<E: Element, F: Element, G: Element>(
    s1: &FormalTopology<E>,
    s2: &FormalTopology<F>,
    t: &FormalTopology<G>,
    r: &TopologyMap<E, G>,
    s: &TopologyMap<F, G>,
    budget: u32,
) -> Result<(FormalTopology<(E, F)>, TopologyMap<(E, F), E>, TopologyMap<(E, F), F>), super::FtopError> {
    let tb: Arc<Vec<G>> = Arc::new(t.finite_base().ok_or(super::FtopError::NonFiniteBase)?.to_vec());
    let (r1, s1m, tb1) = (r.clone(), s.clone(), tb.clone());
    let (r2, s2m, tb2) = (r.clone(), s.clone(), tb.clone());
    let (sb1, sb2) = (s1.finite_base().map(|b| b.to_vec()), s2.finite_base().map(|b| b.to_vec()));
    let extra = AxiomSet::new(
        move |(a, b): &(E, F), _| {
            let mut items = Vec::new();
            for (k, c) in tb1.iter().enumerate() {
                if r1.relates(a, c) {
                    items.push(AxiomIndex::Seq(vec![AxiomIndex::label("pb1"), AxiomIndex::Nat(k as u64)]));
                }
                if s1m.relates(b, c) {
                    items.push(AxiomIndex::Seq(vec![AxiomIndex::label("pb2"), AxiomIndex::Nat(k as u64)]));
                }
            }
            Sample::all(items)
        },
        move |_, idx| {
            let AxiomIndex::Seq(v) = idx else { return Subset::empty() };
            let (AxiomIndex::Label(l), Some(AxiomIndex::Nat(k))) = (&v[0], v.get(1)) else {
                return Subset::empty();
            };
            let c = tb2[*k as usize].clone();
            let (r, s) = (r2.clone(), s2m.clone());
            let body = if l == "pb1" {
                Subset::pred(move |(_, y): &(E, F)| s.relates(y, &c))
            } else {
                Subset::pred(move |(x, _): &(E, F)| r.relates(x, &c))
            };
            match (&sb1, &sb2) {
                (Some(x), Some(y)) => {
                    let all: Vec<(E, F)> =
                        x.iter().flat_map(|a| y.iter().map(move |b| (a.clone(), b.clone()))).collect();
                    Subset::Listed(body.materialize(&all))
                }
                _ => body,
            }
        },
    );
    let axioms = binary_axioms(s1, s2).union(&extra, "pb");
    let prod = pair_topology(&format!("{}×_{}{}", s1.name, t.name, s2.name), s1, s2, axioms, false);
    let (p1, p2) = projections(&prod, s1, s2, budget);
    Ok((prod, p1, p2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftop::{check_ftm, map_compose, map_equal, saturate_finite};

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn discrete2() -> FormalTopology<String> {
        FormalTopology::finite("d", vec![s("a"), s("b")], |x, y| x == y, vec![], true)
    }

    fn sierpinski() -> FormalTopology<String> {
        FormalTopology::finite(
            "sp",
            vec![s("top"), s("open")],
            |x, y| x == y || (x == "open" && y == "top"),
            vec![],
            true,
        )
    }

    #[test]
    fn family_product_s2_meets() {
        let (p, proj) = family_product(&[discrete2(), discrete2()]);
        assert_eq!(p.finite_base().unwrap().len(), 16);
        let a0: FinSum<String> = singleton(0, s("a"));
        let b0: FinSum<String> = singleton(0, s("b"));
        let both: FinSum<String> = [(0, s("a")), (0, s("b"))].into_iter().collect();
        // (S2): {(0,a),(0,b)} ◁ ∅ since a and b have no common lower bound
        let sat = saturate_finite(&p, &Subset::empty()).unwrap();
        assert!(sat.contains(&both));
        assert!(!sat.contains(&a0));
        // (S1) at the top: ∅ ◁ {{(0,a)}, {(0,b)}}
        let sat = saturate_finite(&p, &Subset::listed([a0.clone(), b0])).unwrap();
        assert!(sat.contains(&BTreeSet::new()));
        for pr in &proj {
            assert!(check_ftm(pr, &p, &discrete2(), 0).is_proved());
        }
    }

    #[test]
    fn binary_projections_and_pairing() {
        let (p, p1, p2) = binary_product(&discrete2(), &sierpinski(), 0);
        assert!(check_ftm(&p1, &p, &discrete2(), 0).is_proved());
        assert!(check_ftm(&p2, &p, &sierpinski(), 0).is_proved());
        let src = discrete2();
        let r: TopologyMap<String, String> = TopologyMap::identity();
        let c: TopologyMap<String, String> = TopologyMap::new("top", |_, y: &String| y == "top");
        let pair = binary_pairing(&src, &r, &c, 0);
        assert!(check_ftm(&pair, &src, &p, 0).is_proved());
        let back = map_compose(&pair, &p1, &p, 0);
        assert!(map_equal(&back, &r, &src, &discrete2(), 0).is_proved());
    }

    #[test]
    fn pullback_over_point() {
        let one = FormalTopology::finite("1", vec![s("*")], |x, y| x == y, vec![], true);
        let to1: TopologyMap<String, String> = TopologyMap::new("!", |_, _| true);
        let (pb, p1, _) = pullback(&discrete2(), &discrete2(), &one, &to1, &to1, 0).unwrap();
        assert_eq!(pb.finite_base().unwrap().len(), 4);
        assert!(check_ftm(&p1, &pb, &discrete2(), 0).is_proved());
    }
}
