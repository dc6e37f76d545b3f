//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use katetov::bergman::{build_chain, encode_word, evaluate_word, verify_distortion, EndoSequence};
use katetov::classes::{check_kind_allowed, k_morphism, k_object, resolve_extension, KObjectResult};
use katetov::limits::{continuity_probe, embed_endomorphisms, extend_partial_morphism, k_omega_morphism, PartialMap};
use katetov::metric::{hat, is_katetov, nonexpansive_push_distance, push, KatetovFunction};
use katetov::par::{self, Execution};
use katetov::pushout::{generic_k, one_point_pushout, realized_types, realizes_all_extensions};
use katetov::structures::{
    all_morphisms, enumerate_one_point_extensions, find_clique, ClassTag, ElemId, FiniteStructure, MapData, Morphism,
    MorphismKind,
};
use katetov::tower::{verify_extension_property, TowerAddress, TowerHandle};
use katetov::Error;
use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::Rng;

use common::{arc, kind_for, random_partial, reps, rng, Res};

const PAR: Execution = Execution::Parallel;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Res<()> {
    if cond {
        Ok(())
    } else {
        Err(msg().into())
    }
}

/// Extension realization: every one-point extension of every small structure embeds in K(A) over η.
fn extension_realization() -> Res<String> {
    use ClassTag::*;
    let plan = [
        (Graph, 4),
        (KnFreeGraph(3), 3),
        (Digraph, 3),
        (LinearOrder, 3),
        (Poset, 4),
        (Tournament, 3),
        (BooleanAlgebra, 3),
        (RationalMetric(1), 3),
        (RationalMetric(2), 3),
        (RationalMetric(3), 3),
    ];
    let mut checked = 0;
    for (class, max) in plan {
        let rs = reps(class, max);
        let counts = par::try_map(PAR, &rs, |a| -> Res<usize> {
            let ka = k_object(a)?;
            let mut n = 0;
            for e in enumerate_one_point_extensions(a)? {
                let g = resolve_extension(&e, &ka)?.with_kind(MorphismKind::Embedding)?;
                ensure(e.inclusion().then(&g)? == *ka.eta(), || format!("{class}: g∘j != η"))?;
                n += 1;
            }
            Ok(n)
        })?;
        checked += counts.iter().sum::<usize>();
    }
    Ok(format!("{checked} extensions realized"))
}

/// Functor laws and naturality of η, exhaustive over structures of size <= 3.
fn functor_laws() -> Res<String> {
    use ClassTag::*;
    let classes = [
        Graph,
        KnFreeGraph(3),
        Digraph,
        LinearOrder,
        Poset,
        Tournament,
        BooleanAlgebra,
        RationalMetric(1),
        RationalMetric(2),
    ];
    let (mut maps, mut squares) = (0, 0);
    for class in classes {
        let rs = reps(class, 3);
        let kind = kind_for(class);
        let ks: Vec<KObjectResult> = rs.iter().map(k_object).collect::<Result<_, _>>()?;
        let pairs: Vec<(usize, usize)> = (0..rs.len()).flat_map(|i| (0..rs.len()).map(move |j| (i, j))).collect();
        let lifted = par::try_map(PAR, &pairs, |&(i, j)| -> Res<Vec<(Morphism, Morphism)>> {
            let mut out = Vec::new();
            for f in all_morphisms(&rs[i], &rs[j], kind) {
                let kf = k_morphism(&f, &ks[i], &ks[j])?;
                ensure(f.then(ks[j].eta())? == ks[i].eta().then(&kf)?, || format!("{class}: η not natural"))?;
                out.push((f, kf));
            }
            Ok(out)
        })?;
        let mut by_map: HashMap<(usize, usize, MapData), Morphism> = HashMap::new();
        for (&(i, j), fs) in pairs.iter().zip(&lifted) {
            for (f, kf) in fs {
                by_map.insert((i, j, f.map().clone()), kf.clone());
            }
        }
        maps += by_map.len();
        for (i, a) in rs.iter().enumerate() {
            let id = Morphism::identity(a.clone());
            let kid = &by_map[&(i, i, id.map().clone())];
            ensure(*kid == Morphism::identity(ks[i].object().clone()), || format!("{class}: K(id) != id"))?;
        }
        let lifted_at = |i: usize, j: usize| &lifted[i * rs.len() + j];
        let triples: Vec<(usize, usize, usize)> = pairs.iter().flat_map(|&(i, j)| (0..rs.len()).map(move |l| (i, j, l))).collect();
        let counts = par::try_map(PAR, &triples, |&(i, j, l)| -> Res<usize> {
            let mut n = 0;
            for (f, kf) in lifted_at(i, j) {
                for (g, kg) in lifted_at(j, l) {
                    let gf = f.then(g)?;
                    let kgf = &by_map[&(i, l, gf.map().clone())];
                    ensure(*kgf == kf.then(kg)?, || format!("{class}: K(g∘f) != K(g)∘K(f)"))?;
                    n += 1;
                }
            }
            Ok(n)
        })?;
        squares += counts.iter().sum::<usize>();
    }
    Ok(format!("{maps} morphisms, {squares} composites"))
}

/// Tower level sizes from the initial objects.
fn tower_counts() -> Res<String> {
    let g = TowerHandle::iterate(arc(FiniteStructure::empty(ClassTag::Graph)), 2)?.level_sizes();
    ensure(g == [0, 1, 3], || format!("graph levels {g:?}"))?;
    let b = TowerHandle::iterate(arc(FiniteStructure::boolean_algebra(1)), 3)?.level_sizes();
    ensure(b == [1, 2, 4, 8], || format!("boolean atoms {b:?}"))?;
    Ok(format!("graph {g:?}, boolean {b:?}"))
}

/// Extension property at base depth 1, size bound 2, witnesses by base depth + 1.
fn extension_property() -> Res<String> {
    let mut notes = Vec::new();
    for class in [ClassTag::Graph, ClassTag::KnFreeGraph(3), ClassTag::Digraph, ClassTag::Poset] {
        let point = enumerate_one_point_extensions(&arc(FiniteStructure::empty(class)))?[0].extension().clone();
        let mut t = TowerHandle::new(point)?;
        let r = verify_extension_property(&mut t, 1, 2, PAR)?;
        ensure(r.passed(), || format!("{class}: {:?}", r.counterexample.as_ref().map(|c| &c.reason)))?;
        let w = r.max_witness_level().unwrap_or(0);
        ensure(w <= 2, || format!("{class}: witness at level {w}"))?;
        notes.push(format!("{class} {}", r.certificates.len()));
    }
    Ok(format!("certificates: {}", notes.join(", ")))
}

/// Henson negative control: K3-free towers stay triangle-free and refuse homomorphisms.
fn henson_control() -> Res<String> {
    let edge = |class| arc(FiniteStructure::from_pairs(class, 2, &[(0, 1)]).unwrap());
    let mut t = TowerHandle::iterate(edge(ClassTag::KnFreeGraph(3)), 2)?;
    let level = t.level(2)?.clone();
    ensure(find_clique(&level, 3).is_none(), || "triangle in the K3-free tower".into())?;
    let g = TowerHandle::iterate(edge(ClassTag::Graph), 2)?;
    ensure(find_clique(g.level(2)?, 3).is_some(), || "control graph tower has no triangle".into())?;

    let contract = |r: katetov::Result<()>| matches!(r, Err(Error::Contract(_)));
    ensure(
        contract(check_kind_allowed(ClassTag::KnFreeGraph(3), MorphismKind::Homomorphism)),
        || "kind check accepted a homomorphism".into(),
    )?;
    let two = arc(FiniteStructure::kn_free_graph(3, 2, &[])?);
    let one = arc(FiniteStructure::kn_free_graph(3, 1, &[])?);
    let collapse = Morphism::points(two.clone(), one.clone(), vec![0, 0], MorphismKind::Homomorphism)?;
    let lifted = k_morphism(&collapse, &k_object(&two)?, &k_object(&one)?).map(|_| ());
    ensure(contract(lifted), || "K accepted a collapsing map".into())?;
    let pm = PartialMap::new(
        vec![TowerAddress::new(0, 0), TowerAddress::new(0, 1)],
        vec![TowerAddress::new(0, 0), TowerAddress::new(0, 0)],
        MorphismKind::Homomorphism,
    )?;
    let ext = extend_partial_morphism(&mut t, &pm, 1, PAR).map(|_| ());
    ensure(contract(ext), || "partial-map extension accepted a homomorphism".into())?;
    Ok(format!("level 2 has {} vertices, no triangle; 3 contract errors", level.len()))
}

/// Homogeneity: random finite partial maps extend to truncated endomorphisms.
fn homogeneity() -> Res<String> {
    use ClassTag::*;
    let mut r = rng(6);
    let mut towers: HashMap<ClassTag, TowerHandle> = HashMap::new();
    let iso_classes = [Graph, KnFreeGraph(3), Digraph, LinearOrder, Poset, Tournament, RationalMetric(2)];
    let mut jobs: Vec<(ClassTag, MorphismKind)> = (0..50).map(|i| (iso_classes[i % iso_classes.len()], MorphismKind::Isomorphism)).collect();
    jobs.extend((0..50).map(|i| ([Graph, Poset][i % 2], MorphismKind::Homomorphism)));
    let mut per_kind = [0usize; 2];
    for (class, kind) in jobs {
        if !towers.contains_key(&class) {
            towers.insert(class, TowerHandle::iterate(arc(FiniteStructure::empty(class)), 2)?);
        }
        let t = towers.get_mut(&class).expect("inserted");
        let level = t.level(2)?.clone();
        let hom = kind == MorphismKind::Homomorphism;
        let k = r.gen_range(1..=3.min(level.len()));
        let (dom, img) = random_partial(&mut r, &level, k, hom).ok_or("no partial map sampled")?;
        let addr = |t: &TowerHandle, ids: &[ElemId]| -> katetov::Result<Vec<TowerAddress>> {
            ids.iter().map(|&x| t.canonical(TowerAddress::new(2, x))).collect()
        };
        let pm = PartialMap::new(addr(t, &dom)?, addr(t, &img)?, kind)?;
        let out = extend_partial_morphism(t, &pm, 2, PAR).map_err(|e| format!("{class} {kind} {dom:?}->{img:?}: {e}"))?;
        ensure(out.extends(&pm), || format!("{class}: extension does not restrict to the map"))?;
        let m = out.to_morphism(t)?;
        m.with_kind(if hom { MorphismKind::Homomorphism } else { MorphismKind::Embedding })?;
        per_kind[usize::from(hom)] += 1;
    }
    Ok(format!("{} partial isomorphisms, {} partial homomorphisms extended", per_kind[0], per_kind[1]))
}

/// Endomorphism embedding: multiplicative, unital, injective on sampled pairs.
fn endomorphism_embedding() -> Res<String> {
    let p3 = [(0, 1), (1, 2)];
    let cyc = [(0, 1), (1, 2), (2, 0)];
    let seeds: Vec<Arc<FiniteStructure>> = vec![
        arc(FiniteStructure::graph(3, &p3)?),
        arc(FiniteStructure::kn_free_graph(3, 3, &p3)?),
        arc(FiniteStructure::digraph(3, &cyc)?),
        arc(FiniteStructure::chain(3)),
        arc(FiniteStructure::poset(3, &[(0, 1), (0, 2)])?),
        arc(FiniteStructure::tournament(3, &cyc)?),
        arc(FiniteStructure::boolean_algebra(3)),
        arc(FiniteStructure::grid_metric(2, &[vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]])?),
    ];
    let mut r = rng(7);
    let mut notes = Vec::new();
    for c in seeds {
        let class = c.class();
        let ends = all_morphisms(&c, &c, kind_for(class));
        let depth = if TowerHandle::iterate(c.clone(), 2).is_ok() { 2 } else { 1 };
        let idx = |m: &Morphism| ends.iter().position(|e| e.map() == m.map()).expect("End is closed");
        let id = idx(&Morphism::identity(c.clone()));
        let sample: Vec<(usize, usize)> = (0..25).map(|_| (r.gen_range(0..ends.len()), r.gen_range(0..ends.len()))).collect();
        if class == ClassTag::BooleanAlgebra {
            let lift = |g: &Morphism| -> Res<Morphism> { Ok(k_omega_morphism(g, depth)?.maps[depth].clone()) };
            let e: Vec<Morphism> = ends.iter().map(lift).collect::<Res<_>>()?;
            ensure(e[id] == Morphism::identity(e[id].source().clone()), || "boolean: identity not preserved".into())?;
            for &(g, h) in &sample {
                let gh = idx(&ends[g].then(&ends[h])?);
                ensure(e[gh] == e[g].then(&e[h])?, || format!("boolean: not multiplicative at ({g}, {h})"))?;
                ensure(g == h || e[g] != e[h], || format!("boolean: endomorphisms {g} and {h} collide"))?;
            }
        } else {
            let (_, e) = embed_endomorphisms(&c, &ends, depth, PAR)?;
            ensure(e[id].table.iter().all(|(x, y)| x.id == y.id), || format!("{class}: identity not preserved"))?;
            for &(g, h) in &sample {
                let gh = idx(&ends[g].then(&ends[h])?);
                ensure(e[gh].agrees_with(&e[g].then(&e[h])?), || format!("{class}: not multiplicative at ({g}, {h})"))?;
                ensure(g == h || !e[g].agrees_with(&e[h]), || format!("{class}: endomorphisms {g} and {h} collide"))?;
            }
        }
        notes.push(format!("{class} |End|={} depth {depth}", ends.len()));
    }
    Ok(notes.join(", "))
}

/// Continuity: K(f_n) settles on K(<S>) exactly when f_n settles on S.
fn continuity() -> Res<String> {
    let xs = [
        arc(FiniteStructure::graph(4, &[(0, 1), (1, 2), (2, 3)])?),
        arc(FiniteStructure::poset(4, &[(0, 1), (0, 2), (1, 3), (2, 3)])?),
        arc(FiniteStructure::grid_metric(2, &[vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]])?),
    ];
    let mut r = rng(8);
    let (mut stab, mut non) = (0, 0);
    for round in 0..40 {
        let x = &xs[round % xs.len()];
        let ends = all_morphisms(x, x, MorphismKind::Homomorphism);
        let (f, s, agree, disagree) = loop {
            let f = ends.choose(&mut r).unwrap().clone();
            let mut ids: Vec<ElemId> = x.elements().collect();
            ids.shuffle(&mut r);
            let s: Vec<ElemId> = ids[..r.gen_range(1..=2)].to_vec();
            let (agree, disagree): (Vec<&Morphism>, Vec<&Morphism>) =
                ends.iter().partition(|g| s.iter().all(|&v| g.at(v) == f.at(v)));
            if !disagree.is_empty() {
                break (f.clone(), s, agree, disagree);
            }
        };
        let len = 6;
        let stabilizing = round < 20;
        let n0 = r.gen_range(0..len);
        let seq: Vec<Morphism> = (0..len)
            .map(|i| {
                let pool = if stabilizing {
                    if i < n0 { &disagree } else { &agree }
                } else if i + 1 == len {
                    &disagree
                } else if r.gen_bool(0.5) {
                    &agree
                } else {
                    &disagree
                };
                (*pool.choose(&mut r).unwrap()).clone()
            })
            .collect();
        let rep = continuity_probe(&f, &seq, &s)?;
        if stabilizing {
            ensure(rep.hypothesis_met() && rep.restriction_stable_from == Some(n0), || format!("round {round}: {rep:?}"))?;
            stab += 1;
        } else {
            ensure(!rep.hypothesis_met(), || format!("round {round}: {rep:?}"))?;
            non += 1;
        }
        ensure(rep.holds(), || format!("round {round}: {rep:?}"))?;
    }
    Ok(format!("{stab} stabilizing, {non} non-stabilizing sequences agree"))
}

/// Pushouts of one-point extensions, and generic K against the hand-crafted K on graphs.
fn pushouts() -> Res<String> {
    let a0s = reps(ClassTag::Graph, 2);
    let a1s = reps(ClassTag::Graph, 3);
    let mut jobs = Vec::new();
    for a0 in &a0s {
        let exts = enumerate_one_point_extensions(a0)?;
        for a1 in &a1s {
            for f in all_morphisms(a0, a1, MorphismKind::Homomorphism) {
                for g in &exts {
                    jobs.push((f.clone(), g.clone()));
                }
            }
        }
    }
    let cocones = par::try_map(PAR, &jobs, |(f, g)| -> Res<usize> {
        let sq = one_point_pushout(f, g)?;
        sq.p_one_point()?;
        let rep = sq.universality_certificate()?;
        ensure(rep.passed(), || format!("certificate failed: {:?}", rep.failure))?;
        Ok(rep.cocones)
    })?;
    for a in reps(ClassTag::Graph, 3) {
        let (gk, hk) = (generic_k(&a)?, k_object(&a)?);
        ensure(gk.object().len() == hk.object().len(), || "generic K has the wrong size".into())?;
        ensure(realized_types(&gk) == realized_types(&hk), || "generic K realizes other types".into())?;
        ensure(realizes_all_extensions(&gk)?, || "generic K misses an extension".into())?;
    }
    Ok(format!("{} squares, {} cocones checked", jobs.len(), cocones.iter().sum::<usize>()))
}

/// All Katětov functions on `x` with values in `{0, 1/q, ..., 2}`.
fn katetov_functions(x: &Arc<FiniteStructure>, q: u32) -> Vec<KatetovFunction> {
    let n = x.len();
    let steps = 2 * q as usize + 1;
    let mut out = Vec::new();
    for code in 0..steps.pow(n as u32) {
        let mut c = code;
        let values: Vec<Rational64> = (0..n)
            .map(|_| {
                let v = Rational64::new((c % steps) as i64, q as i64);
                c /= steps;
                v
            })
            .collect();
        if is_katetov(x, &values) {
            out.push(KatetovFunction::new(x.clone(), values).unwrap());
        }
    }
    out
}

/// Metric pushes, hats, η and K(f), exhaustive for q <= 3 and |X| <= 3.
fn metric_suite() -> Res<String> {
    let mut checks = 0usize;
    for q in 1..=3u32 {
        let spaces: Vec<Arc<FiniteStructure>> = reps(ClassTag::RationalMetric(q), 3).into_iter().filter(|s| !s.is_empty()).collect();
        let ks: Vec<KObjectResult> = spaces.iter().map(k_object).collect::<Result<_, _>>()?;
        let phis: Vec<Vec<KatetovFunction>> = spaces.iter().map(|x| katetov_functions(x, q)).collect();
        let homs: Vec<Vec<Vec<Morphism>>> = spaces
            .iter()
            .map(|x| spaces.iter().map(|y| all_morphisms(x, y, MorphismKind::Homomorphism)).collect())
            .collect();
        let idx: Vec<usize> = (0..spaces.len()).collect();
        let counts = par::try_map(PAR, &idx, |&i| -> Res<usize> {
            let (x, kx) = (&spaces[i], &ks[i]);
            let mut n = 0;
            for a in x.elements() {
                for b in x.elements() {
                    let (ea, eb) = (kx.eta().at(a), kx.eta().at(b));
                    ensure(kx.object().dist(ea, eb) == x.dist(a, b), || "η is not isometric".into())?;
                }
            }
            for (j, y) in spaces.iter().enumerate() {
                for f in &homs[i][j] {
                    for phi in &phis[i] {
                        let pushed = push(phi, f)?;
                        ensure(pushed.is_katetov(), || "push left the Katětov functions".into())?;
                        for (l, _) in spaces.iter().enumerate() {
                            for g in &homs[j][l] {
                                ensure(push(&pushed, g)? == push(phi, &f.then(g)?)?, || "pushes do not compose".into())?;
                                n += 1;
                            }
                        }
                    }
                    for a in x.elements() {
                        ensure(push(&hat(x, a)?, f)? == hat(y, f.at(a))?, || "pushed hat is not the hat".into())?;
                    }
                    for (u, phi) in phis[i].iter().enumerate() {
                        for psi in &phis[i][u..] {
                            ensure(nonexpansive_push_distance(phi, psi, f)?.holds, || "push expands ϱ".into())?;
                        }
                    }
                    let kf = k_morphism(f, kx, &ks[j])?;
                    let (kxo, kyo) = (kx.object(), ks[j].object());
                    let mut isometric = true;
                    for u in kxo.elements() {
                        for v in kxo.elements() {
                            let (before, after) = (kxo.dist(u, v), kyo.dist(kf.at(u), kf.at(v)));
                            ensure(after <= before, || "K(f) expands a distance".into())?;
                            isometric &= after == before;
                        }
                    }
                    let embedding = f.with_kind(MorphismKind::Embedding).is_ok();
                    ensure(isometric == embedding, || format!("K(f) isometric = {isometric}, f embedding = {embedding}"))?;
                    n += 1;
                }
            }
            Ok(n)
        })?;
        checks += counts.iter().sum::<usize>();
    }
    Ok(format!("{checks} checks"))
}

/// Distortion identities on the JEP chain over a three-vertex graph truncation.
fn bergman_suite() -> Res<String> {
    let mut t = TowerHandle::new(arc(FiniteStructure::empty(ClassTag::Graph)))?;
    let chain = build_chain(&mut t, 2, 3)?;
    ensure(chain.base().len() == 3, || "truncation is not three vertices".into())?;
    let ends = all_morphisms(chain.base(), chain.base(), MorphismKind::Homomorphism);
    let mut r = rng(11);
    let mut identities = 0;
    let mut words = 0;
    for _ in 0..10 {
        let maps: Vec<Morphism> = (0..3).map(|_| ends.choose(&mut r).unwrap().clone()).collect();
        let fs = EndoSequence::new(chain.base(), maps)?;
        let rep = verify_distortion(&chain, &fs, 2)?;
        ensure(rep.passed(), || format!("{:?}", rep.mismatches))?;
        identities += rep.counts.iter().map(|c| c.checked).sum::<usize>();
        for n in 1..=2 {
            let f = &fs.maps()[n - 1];
            let want: Vec<TowerAddress> = chain.base().elements().map(|v| chain.addresses()[f.at(v) as usize]).collect();
            for depth in 0..=1 {
                let got = evaluate_word(&mut t, &chain, &fs, &encode_word(n)?, depth)?;
                ensure(got == want, || format!("word {n} at depth {depth}: {got:?} != {want:?}"))?;
                words += 1;
            }
        }
    }
    for n in 1..=6 {
        let w = encode_word(n)?;
        ensure(w.len() == 2 * n + 1, || format!("word {n} has length {}", w.len()))?;
    }
    Ok(format!("{identities} identity instances, {words} word evaluations, word lengths 3..13"))
}

fn main() {
    let criteria: [(&str, fn() -> Res<String>); 11] = [
        ("extension realization", extension_realization),
        ("functor laws and naturality", functor_laws),
        ("tower level counts", tower_counts),
        ("extension property of towers", extension_property),
        ("K3-free negative control", henson_control),
        ("homogeneity of partial maps", homogeneity),
        ("endomorphism embedding", endomorphism_embedding),
        ("continuity of K", continuity),
        ("pushouts and generic K", pushouts),
        ("metric Katětov suite", metric_suite),
        ("JEP distortion suite", bergman_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()).into())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {e} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
