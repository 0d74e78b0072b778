//! Acceptance gate: one PASS/FAIL line per criterion; exits non-zero on any
//! failure.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use locomp::completion::{completion_topology, iso_equations, map_of_function, product_iso_witnesses, FunctionData, MapMode};
use locomp::deciders::{
    chain_oracle, decide_interval_cover, finite_subcover, replay_lc, replay_subcover, semidecide_lc_cover, Interval,
};
use locomp::ftop::{cover_check, map_compose, map_equal, replay, saturate_finite, AxiomIndex, FormalTopology, Subset};
use locomp::gus::{
    ball_order, ball_subset, interpolate, make_space, BoxMetric, FormalBall, Gus, MetricId, Point, RegionOracle, SpaceKind,
    SpatialOracle,
};
use locomp::numeric::{dyadic, int, rat, Bound, Rational};
use locomp::points::{ball_schedule, dist_upper, member, point_of_element, pt_map_apply, sqrt_point};
use locomp::uniform::{prec, r_x};
use locomp::verdict::Verdict;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn line() -> Gus {
    make_space(&SpaceKind::RationalLine).unwrap()
}

fn unit() -> Gus {
    make_space(&SpaceKind::UnitInterval).unwrap()
}

fn sup_plane() -> Gus {
    make_space(&SpaceKind::RationalBox { dim: 2, metric: BoxMetric::Sup, bounds: None }).unwrap()
}

fn ball(m: &str, c: Point, r: Rational) -> FormalBall {
    FormalBall::new(MetricId::single(m), c, r).unwrap()
}

fn b1(c: Rational, r: Rational) -> FormalBall {
    ball("d", Point::Num(c), r)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c1_plane_cover() -> Outcome {
    let g = make_space(&SpaceKind::RationalBox { dim: 2, metric: BoxMetric::Euclid, bounds: None }).unwrap();
    let p = |x: i64| Point::from_coords(vec![int(x), int(0)]);
    let a = ball("euclid", p(0), int(3));
    let u = [ball("euclid", p(-4), int(5)), ball("euclid", p(4), int(5))];
    let start = Instant::now();
    let cert = semidecide_lc_cover(&g, &a, &u, 12).map_err(|e| e.to_string())?.proved().ok_or("not proved at budget 12")?;
    let took = start.elapsed();
    replay_lc(&g, &a, &u, &cert)?;
    if let locomp::deciders::LcCertificate::Inclusion { step, .. } = &cert {
        ensure(step.k <= 12, || format!("{} shrink steps", step.k))?;
    }
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!("proved and replayed in {took:?}"))
}

fn random_interval(r: &mut ChaCha8Rng) -> Interval {
    loop {
        let q = |r: &mut ChaCha8Rng| {
            let den = r.gen_range(1..=12i64);
            rat(r.gen_range(-2 * den..=3 * den), den)
        };
        let (x, y) = (q(r), q(r));
        if x < y {
            return Interval::new(x, y);
        }
    }
}

fn c2_interval_chains() -> Outcome {
    let mut r = rng(2);
    let start = Instant::now();
    let mut proved = 0;
    for case in 0..500 {
        let target = random_interval(&mut r);
        let n = r.gen_range(0..=6);
        let u: Vec<Interval> = (0..n).map(|_| random_interval(&mut r)).collect();
        let v = decide_interval_cover(&target, &u).map_err(|e| e.to_string())?;
        ensure(!v.is_unknown(), || format!("case {case}: unknown"))?;
        let oracle = chain_oracle(&target, &u, 12);
        ensure(v.is_proved() == oracle, || format!("case {case}: {target} {u:?} decider {} oracle {oracle}", v.name()))?;
        if let Verdict::Proved(c) = &v {
            c.verify(&u).map_err(|e| format!("case {case}: {e}"))?;
            proved += 1;
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    Ok(format!("500 families, {proved} covers, 0 disagreements in {took:?}"))
}

fn c3_remark_order_vs_subset() -> Outcome {
    let g = unit();
    let (a, b) = (b1(int(1), int(3)), b1(int(1), int(2)));
    ensure(ball_order(&g, &a, &b, false, 32).is_refuted(), || "order not refuted".into())?;
    ensure(ball_subset(&g, &a, &b, 32).map_err(|e| e.to_string())?.is_proved(), || "inclusion not proved".into())?;
    Ok("order refuted, inclusion proved".into())
}

fn c4_isometry() -> Outcome {
    let g = line();
    let mut r = rng(4);
    let tol = dyadic(16);
    let mut worst = Rational::from_integer(0.into());
    for _ in 0..100 {
        let mut q = || rat(r.gen_range(-1000..=1000), r.gen_range(1..=97));
        let (x, y) = (q(), q());
        let (px, py) = (point_of_element(&g, &Point::Num(x.clone())).unwrap(), point_of_element(&g, &Point::Num(y.clone())).unwrap());
        let Bound::Finite(u) = dist_upper(&px, &py, &MetricId::single("d"), 20).map_err(|e| e.to_string())? else {
            return Err("infinite distance".into());
        };
        let err = (u - (&x - &y).abs()).abs();
        ensure(err <= tol, || format!("{x} {y}: error {err}"))?;
        worst = worst.max(err);
    }
    Ok(format!("100 pairs, worst error {}", locomp::numeric::to_f64(&worst)))
}

/// `√2` to within `2^-n` by bisection on `[1, 2]`.
fn sqrt2_bracket(n: u32) -> (Rational, Rational) {
    let (mut lo, mut hi) = (int(1), int(2));
    while &hi - &lo > dyadic(n) {
        let mid = (&lo + &hi) / int(2);
        if &mid * &mid < int(2) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

fn c5_sqrt_two() -> Outcome {
    let g = line();
    let p = sqrt_point(&g, 2).map_err(|e| e.to_string())?;
    let (lo, hi) = sqrt2_bracket(30);
    let inside = b1(rat(3, 2), rat(1, 10));
    let outside = b1(rat(7, 5), rat(1, 100));
    // oracle: |3/2 - √2| < 1/10 and |√2 - 7/5| ≥ 1/100 on the whole bracket
    let oracle_in = rat(3, 2) - &lo < rat(1, 10) && rat(3, 2) - &hi < rat(1, 10);
    let oracle_out = &lo - rat(7, 5) >= rat(1, 100);
    ensure(oracle_in && oracle_out, || "bisection oracle disagrees with the expected memberships".into())?;
    ensure(member(&p, &inside, 30).is_proved(), || "b(3/2,1/10) not proved".into())?;
    ensure(member(&p, &outside, 30).is_refuted(), || "b(7/5,1/100) not refuted".into())?;
    Ok("member proved, non-member refuted, both agree with bisection".into())
}

fn c6_compactness() -> Outcome {
    let g = unit();
    let u: Vec<FormalBall> = (0..=8).map(|k| b1(rat(k, 8), rat(3, 16))).collect();
    let cert = finite_subcover(&g, &u, 8).map_err(|e| e.to_string())?.proved().ok_or("no subcover")?;
    replay_subcover(&g, &u, &cert)?;
    let w = finite_subcover(&g, &[b1(int(0), rat(1, 2))], 8).map_err(|e| e.to_string())?.refuted().ok_or("not refuted")?;
    let x = w.as_num().ok_or("non-numeric witness")?.clone();
    ensure(x > rat(1, 2) && x <= int(1), || format!("witness {x}"))?;
    Ok(format!("subcover of {} members replayed; witness {}", cert.indices.len(), locomp::numeric::format_rational(&x)))
}

/// Least fixpoint of the cover rules computed by Kleene iteration on bit
/// sets, independent of the engine.
fn naive_saturation(n: usize, le: &[Vec<bool>], axioms: &[(usize, Vec<usize>)], u: u64, localised: bool) -> u64 {
    let mut s = u;
    loop {
        let mut next = s;
        for a in 0..n {
            if (0..n).any(|b| le[a][b] && s >> b & 1 == 1) {
                next |= 1 << a;
            }
            for (via, body) in axioms {
                let premise: Vec<usize> = if localised && *via == a {
                    body.clone()
                } else if le[a][*via] {
                    (0..n).filter(|&c| le[c][a] && body.iter().any(|&x| le[c][x])).collect()
                } else {
                    continue;
                };
                if localised && *via != a {
                    continue;
                }
                if premise.iter().all(|&c| s >> c & 1 == 1) {
                    next |= 1 << a;
                }
            }
        }
        if next == s {
            return s;
        }
        s = next;
    }
}

fn c7_engine_soundness() -> Outcome {
    let mut r = rng(7);
    let mut replayed = 0;
    for case in 0..200 {
        let n = r.gen_range(1..=6usize);
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
            for cell in row.iter_mut() {
                if r.gen_bool(0.2) {
                    *cell = true;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if le[i][k] && le[k][j] {
                        le[i][j] = true;
                    }
                }
            }
        }
        let axioms: Vec<(usize, Vec<usize>)> = (0..r.gen_range(0..=4))
            .map(|_| (r.gen_range(0..n), (0..n).filter(|_| r.gen_bool(0.35)).collect()))
            .collect();
        let localised = r.gen_bool(0.5);
        let u: u64 = r.gen_range(0..(1u64 << n));
        let base: Vec<u32> = (0..n as u32).collect();
        let le2 = le.clone();
        let ax = axioms
            .iter()
            .enumerate()
            .map(|(k, (a, body))| (*a as u32, AxiomIndex::label(&format!("ax{k}")), body.iter().map(|&x| x as u32).collect::<BTreeSet<u32>>()))
            .collect();
        let t = FormalTopology::finite("random", base.clone(), move |a: &u32, b: &u32| le2[*a as usize][*b as usize], ax, localised);
        let us = Subset::listed((0..n as u32).filter(|i| u >> i & 1 == 1));
        let sat = saturate_finite(&t, &us).map_err(|e| e.to_string())?;
        let expect = naive_saturation(n, &le, &axioms, u, localised);
        let got: u64 = sat.iter().map(|&i| 1u64 << i).sum();
        ensure(got == expect, || format!("case {case}: engine {got:b} oracle {expect:b}"))?;
        for a in &base {
            if let Verdict::Proved(d) = cover_check(&t, a, &us, 8) {
                ensure(sat.contains(a), || format!("case {case}: proved {a} outside saturation"))?;
                replay(&t, a, &us, &d).map_err(|e| format!("case {case}: {e}"))?;
                replayed += 1;
            }
        }
    }
    Ok(format!("200 topologies agree; {replayed} traces replayed"))
}

fn random_ball(r: &mut ChaCha8Rng, g: &Gus) -> FormalBall {
    let q = |r: &mut ChaCha8Rng| rat(r.gen_range(-16..=16), 4);
    let radius = rat(r.gen_range(1..=16), 4);
    match g.dim() {
        Some(2) => ball("sup", Point::from_coords(vec![q(r), q(r)]), radius),
        _ => b1(q(r), radius),
    }
}

/// A ball `≤_X b` (or `<_X` when `strict`) with random offset and slack.
fn random_below(r: &mut ChaCha8Rng, g: &Gus, b: &FormalBall, strict: bool) -> Option<FormalBall> {
    let n = b.center.coords().len();
    let room = &b.radius * rat(r.gen_range(1..=4), 4);
    let shift: Vec<Rational> = (0..n).map(|_| &room * rat(r.gen_range(-8..=8), 16)).collect();
    let c: Vec<Rational> = b.center.coords().iter().zip(&shift).map(|(x, s)| x + s).collect();
    let off = shift.iter().map(|s| s.abs()).max()?;
    let slack = if strict || r.gen_bool(0.5) { &b.radius * rat(r.gen_range(1..=4), 16) } else { int(0) };
    let radius = &b.radius - off - slack;
    let p = Point::from_coords(c);
    (radius.is_positive() && g.contains_point(&p)).then(|| FormalBall { metric: b.metric.clone(), center: p, radius })
}

fn c8_order_suite() -> Outcome {
    let mut r = rng(8);
    let spaces = [line(), sup_plane()];
    let mut chains = 0;
    for case in 0..300 {
        let g = &spaces[case % 2];
        let b_outer = random_ball(&mut r, g);
        let b = random_below(&mut r, g, &b_outer, false).unwrap_or_else(|| b_outer.clone());
        let Some(a) = random_below(&mut r, g, &b, true) else { continue };
        let a_inner = random_below(&mut r, g, &a, false).unwrap_or_else(|| a.clone());
        // (1) a' ≤ a < b ≤ b' ⇒ a' < b'
        let prem = [
            ball_order(g, &a_inner, &a, false, 32).is_proved(),
            ball_order(g, &a, &b, true, 32).is_proved(),
            ball_order(g, &b, &b_outer, false, 32).is_proved(),
        ];
        ensure(prem.iter().all(|p| *p), || format!("case {case}: constructed premises {prem:?}"))?;
        ensure(ball_order(g, &a_inner, &b_outer, true, 32).is_proved(), || format!("case {case}: transitivity"))?;
        // (2) interpolation certificate
        let c = interpolate(g, &a, &b, 32).ok_or_else(|| format!("case {case}: no interpolant"))?;
        ensure(ball_order(g, &a, &c, true, 32).is_proved() && ball_order(g, &c, &b, true, 32).is_proved(), || {
            format!("case {case}: {c} not between {a} and {b}")
        })?;
        // (3) order gives inclusion, also on unrelated random pairs
        let x = random_ball(&mut r, g);
        for (p, q) in [(&a_inner, &b_outer), (&a, &b), (&x, &b_outer)] {
            if ball_order(g, p, q, false, 32).is_proved() {
                ensure(ball_subset(g, p, q, 32).map_err(|e| e.to_string())?.is_proved(), || format!("case {case}: {p} ⊄ {q}"))?;
            }
        }
        chains += 1;
    }
    ensure(chains >= 250, || format!("only {chains} chains built"))?;
    Ok(format!("{chains} chains, 0 violations"))
}

fn c9_three_conditions() -> Outcome {
    let mut r = rng(9);
    let spaces = [line(), sup_plane()];
    let (mut positive, mut agree) = (0, 0);
    for case in 0..100 {
        let g = &spaces[case % 2];
        let oracle = RegionOracle;
        let a = random_ball(&mut r, g);
        let u: Vec<FormalBall> = (0..r.gen_range(1..=3)).map(|_| random_ball(&mut r, g)).collect();
        let least = u.iter().map(|b| b.radius.clone()).min().unwrap();
        let (mut c1, mut c2, mut c3) = (false, false, false);
        for k in 1..=16 {
            let theta = &least * dyadic(k);
            let v: Vec<FormalBall> = u.iter().map(|b| b.with_radius(&b.radius - &theta)).collect();
            let strictly = v.iter().zip(&u).all(|(x, y)| ball_order(g, x, y, true, 32).is_proved());
            if !strictly {
                continue;
            }
            c1 |= oracle.cover_inclusion(g, &a, &v, 16).is_proved();
            c2 |= locomp::completion::sq_below(g, std::slice::from_ref(&a), &v, 16).map_err(|e| e.to_string())?.is_proved();
            if let Verdict::Proved(cert) = semidecide_lc_cover(g, &a, &v, 16).map_err(|e| e.to_string())? {
                replay_lc(g, &a, &v, &cert)?;
                c3 = true;
            }
        }
        ensure(c1 == c2 && c2 == c3, || format!("case {case}: {a} {u:?}: {c1} {c2} {c3}"))?;
        agree += 1;
        positive += c1 as usize;
    }
    Ok(format!("{agree} instances agree ({positive} certified)"))
}

fn c10_uniform_comparison() -> Outcome {
    let mut r = rng(10);
    let g = line();
    let mut strict = 0;
    for case in 0..200 {
        let b = random_ball(&mut r, &g);
        let a = if r.gen_bool(0.7) { random_below(&mut r, &g, &b, true) } else { Some(random_ball(&mut r, &g)) };
        let Some(a) = a else { continue };
        if ball_order(&g, &a, &b, true, 32).is_proved() {
            strict += 1;
            ensure(prec(&g, &a, &b, 16).map_err(|e| e.to_string())?.is_proved(), || format!("case {case}: {a} ⊀ {b}"))?;
        }
    }
    let mut triples = 0;
    for case in 0..200 {
        let c = random_ball(&mut r, &g);
        let Some(b) = random_below(&mut r, &g, &c, true) else { continue };
        let Some(a) = random_below(&mut r, &g, &b, false) else { continue };
        if !(ball_subset(&g, &a, &b, 32).map_err(|e| e.to_string())?.is_proved() && ball_order(&g, &b, &c, true, 32).is_proved()) {
            continue;
        }
        triples += 1;
        let cert = semidecide_lc_cover(&g, &a, std::slice::from_ref(&c), 16).map_err(|e| e.to_string())?;
        let cert = cert.proved().ok_or_else(|| format!("case {case}: {a} ◁ {{{c}}} not proved"))?;
        replay_lc(&g, &a, &[c], &cert)?;
    }
    let rx = r_x(&unit(), &b1(int(1), int(3)), &b1(int(1), int(2)), 12).map_err(|e| e.to_string())?;
    let rx = rx.proved().ok_or("r_X not proved")?;
    ensure(rx.inner == b1(rat(1, 2), rat(5, 4)), || format!("r_X witness {}", rx.inner))?;
    ensure(strict >= 100 && triples >= 100, || format!("only {strict} pairs, {triples} triples"))?;
    Ok(format!("{strict} strict pairs uniformly below, {triples} triples covered, r_X via {}", rx.inner))
}

fn c11_functor_laws() -> Outcome {
    let g = line();
    let u = completion_topology(&g, false).topology;
    let f = FunctionData::new("f", |p| Point::Num(p.as_num().unwrap() + int(1)));
    let h = FunctionData::new("g", |p| Point::Num(p.as_num().unwrap() * int(1)));
    let gf = FunctionData::new("g∘f", |p| Point::Num((p.as_num().unwrap() + int(1)) * int(1)));
    let rf = map_of_function(&f, &g, &g, MapMode::Hom, 4).map_err(|e| e.to_string())?;
    let rg = map_of_function(&h, &g, &g, MapMode::Hom, 4).map_err(|e| e.to_string())?;
    let rgf = map_of_function(&gf, &g, &g, MapMode::Hom, 4).map_err(|e| e.to_string())?;
    let comp = map_compose(&rf, &rg, &u, 4);
    let eq = map_equal(&rgf, &comp, &u, &u, 4);
    ensure(eq.is_proved(), || format!("composition: {}", eq.name()))?;
    let mut checked = 0;
    for x in [int(0), rat(1, 3), rat(-5, 2)] {
        let fx = Point::Num(&x + int(1));
        let img = pt_map_apply(&rf, &g, &point_of_element(&g, &Point::Num(x.clone())).unwrap(), 12);
        let direct = point_of_element(&g, &fx).unwrap();
        for b in ball_schedule(&g, &fx, 20) {
            let (p, q) = (member(&img, &b, 24).plain(), member(&direct, &b, 24).plain());
            ensure(p == q && !p.is_unknown(), || format!("{b}: {} vs {}", p.name(), q.name()))?;
            checked += 1;
        }
    }
    Ok(format!("composition equal; {checked} schedule balls agree"))
}

fn c12_products() -> Outcome {
    let g = line();
    let iso = product_iso_witnesses(&g, &g).map_err(|e| e.to_string())?;
    match iso_equations(&iso, 50, 12) {
        Verdict::Proved(rep) => {
            ensure(rep.elements >= 50, || format!("only {} elements", rep.elements))?;
            Ok(format!("{} elements, {} checks", rep.elements, rep.checks))
        }
        Verdict::Refuted(v) => Err(format!("{v:?}")),
        Verdict::Unknown { .. } => Err("unknown".into()),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("plane cover by two disks", c1_plane_cover),
        ("interval chains vs oracle", c2_interval_chains),
        ("order vs inclusion on the unit interval", c3_remark_order_vs_subset),
        ("isometry of the embedding", c4_isometry),
        ("sqrt 2 as a formal point", c5_sqrt_two),
        ("compactness of the unit interval", c6_compactness),
        ("engine soundness on finite topologies", c7_engine_soundness),
        ("ball order suite", c8_order_suite),
        ("three cover conditions agree", c9_three_conditions),
        ("uniform comparison", c10_uniform_comparison),
        ("functor laws", c11_functor_laws),
        ("product preservation", c12_products),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match res {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{took:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{took:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
