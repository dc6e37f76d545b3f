//! Limit-level services on towers: back-and-forth, extension of partial morphisms to
//! truncated endomorphisms, the embedding of endomorphism monoids, and the pointwise
//! continuity probe for `K` on hom-sets.
//!
//! Towers of point classes share ids across levels, so a limit point is just an id and
//! relations between ids can be read off any level containing both.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classes::{
    check_kind_allowed, k_morphism, k_object, k_restricted, map_k_element, new_point_payload, KElement, KImage,
};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::structures::{ClassTag, ElemId, FiniteStructure, Link, MapData, Morphism, MorphismKind};
use crate::tower::{TowerAddress, TowerHandle};

/// A finite partial map between the limits of two towers (or within one).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialMap {
    pub domain: Vec<TowerAddress>,
    pub images: Vec<TowerAddress>,
    pub kind: MorphismKind,
}

impl PartialMap {
    pub fn new(domain: Vec<TowerAddress>, images: Vec<TowerAddress>, kind: MorphismKind) -> Result<Self> {
        if domain.len() != images.len() {
            return Err(Error::Contract(format!(
                "partial map with {} domain points and {} images",
                domain.len(),
                images.len()
            )));
        }
        Ok(PartialMap { domain, images, kind })
    }

    pub fn empty(kind: MorphismKind) -> Self {
        PartialMap {
            domain: Vec::new(),
            images: Vec::new(),
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    /// The map as a morphism from the induced substructure on its domain into the level of
    /// the second tower holding all images. Both towers must already reach those levels.
    pub fn to_morphism(&self, t1: &TowerHandle, t2: &TowerHandle) -> Result<Morphism> {
        require_points(t1)?;
        require_points(t2)?;
        let l1 = top_level(&self.domain);
        let l2 = top_level(&self.images);
        let dom = ids_at(t1, &self.domain, l1)?;
        let img = ids_at(t2, &self.images, l2)?;
        let src = Arc::new(t1.level(l1)?.induced(&dom)?);
        // A partial isomorphism is an embedding of its domain.
        let kind = self.kind.meet(MorphismKind::Embedding);
        Morphism::points(src, t2.level(l2)?.clone(), img, kind)
    }
}

fn require_points(t: &TowerHandle) -> Result<()> {
    if t.class() == ClassTag::BooleanAlgebra {
        return Err(Error::Unsupported {
            class: t.class(),
            what: "point-level limit services",
        });
    }
    Ok(())
}

fn top_level(addrs: &[TowerAddress]) -> usize {
    addrs.iter().map(|a| a.level).max().unwrap_or(0)
}

fn ids_at(t: &TowerHandle, addrs: &[TowerAddress], level: usize) -> Result<Vec<ElemId>> {
    addrs.iter().map(|&a| t.resolve(a, level)).collect()
}

/// Least level containing `id`, expanding as needed.
fn level_of(t: &mut TowerHandle, id: ElemId) -> Result<usize> {
    let mut l = 0;
    loop {
        budgeted(t, l, "locating a point")?;
        if (id as usize) < t.level(l)?.len() {
            return Ok(l);
        }
        l += 1;
    }
}

fn budgeted(t: &mut TowerHandle, depth: usize, what: &str) -> Result<()> {
    t.expand_to(depth).map_err(|e| match e {
        Error::Capacity { .. } => Error::BudgetExhausted {
            depth: t.depth(),
            what: format!("{what}: {e}"),
        },
        other => other,
    })
}

fn canonical(t: &mut TowerHandle, id: ElemId) -> Result<TowerAddress> {
    Ok(TowerAddress::new(level_of(t, id)?, id))
}

/// Least id `w` of `t`, outside `anchors`, whose links to `anchors` are `links`.
///
/// Searches level by level from `start`; the tower is expanded until a witness appears or
/// the budget runs out.
fn find_witness(
    t: &mut TowerHandle,
    anchors: &[ElemId],
    links: &[Link],
    start: usize,
    exec: Execution,
) -> Result<ElemId> {
    let mut lo = 0;
    let mut l = start;
    loop {
        budgeted(t, l, "searching for a witness")?;
        let lvl = t.level(l)?.clone();
        let hit = par::find_first(exec, lo, lvl.len(), |w| {
            let w = w as ElemId;
            !anchors.contains(&w) && anchors.iter().zip(links).all(|(&a, &k)| lvl.link(w, a) == k)
        });
        if let Some(w) = hit {
            return Ok(w as ElemId);
        }
        lo = lvl.len();
        l += 1;
    }
}

/// Extends a partial isomorphism between two towers of the same class by `steps`
/// alternating forth and back points, each the least id not yet covered on its side,
/// mapped to the least valid witness on the other.
pub fn back_and_forth(
    t1: &mut TowerHandle,
    t2: &mut TowerHandle,
    seed: &PartialMap,
    steps: usize,
    exec: Execution,
) -> Result<PartialMap> {
    require_points(t1)?;
    require_points(t2)?;
    if t1.class() != t2.class() {
        return Err(Error::Contract("back-and-forth needs towers of one class".into()));
    }
    budgeted(t1, top_level(&seed.domain), "seed map")?;
    budgeted(t2, top_level(&seed.images), "seed map")?;
    seed.to_morphism(t1, t2)?.with_kind(MorphismKind::Embedding)?;
    let mut dom = ids_at(t1, &seed.domain, top_level(&seed.domain))?;
    let mut img = ids_at(t2, &seed.images, top_level(&seed.images))?;
    for step in 0..steps {
        let (src, tgt, from, to) = if step % 2 == 0 {
            (&mut *t1, &mut *t2, &mut dom, &mut img)
        } else {
            (&mut *t2, &mut *t1, &mut img, &mut dom)
        };
        let x = (0..).find(|x| !from.contains(x)).expect("ids are unbounded");
        let lx = from.iter().copied().chain([x]).map(|y| level_of(src, y)).collect::<Result<Vec<_>>>()?;
        let lvl = src.level(lx.into_iter().max().unwrap_or(0))?.clone();
        let links: Vec<Link> = from.iter().map(|&d| lvl.link(x, d)).collect();
        let start = to.iter().map(|&y| level_of(tgt, y)).collect::<Result<Vec<_>>>()?;
        let w = find_witness(tgt, to, &links, start.into_iter().max().unwrap_or(0), exec)?;
        from.push(x);
        to.push(w);
    }
    let domain = dom.iter().map(|&x| canonical(t1, x)).collect::<Result<Vec<_>>>()?;
    let images = img.iter().map(|&x| canonical(t2, x)).collect::<Result<Vec<_>>>()?;
    let out = PartialMap::new(domain, images, MorphismKind::Isomorphism)?;
    out.to_morphism(t1, t2)?.with_kind(MorphismKind::Embedding)?;
    Ok(out)
}

/// A truncated endomorphism of a tower's limit: defined on every point of level
/// `depth_in`, with images up to level `depth_out`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndoTruncation {
    pub depth_in: usize,
    pub depth_out: usize,
    pub kind: MorphismKind,
    /// `(point, image)` pairs in id order of the points.
    pub table: Vec<(TowerAddress, TowerAddress)>,
}

impl EndoTruncation {
    pub fn image(&self, id: ElemId) -> Option<TowerAddress> {
        self.table.get(id as usize).map(|&(_, y)| y)
    }

    /// The truncation as a morphism `level depth_in -> level depth_out`, validated at its kind.
    pub fn to_morphism(&self, t: &TowerHandle) -> Result<Morphism> {
        let table = self.table.iter().map(|&(_, y)| y.id).collect();
        Morphism::points(t.level(self.depth_in)?.clone(), t.level(self.depth_out)?.clone(), table, self.kind)
    }

    /// Whether this truncation agrees with `f` on `f`'s domain.
    pub fn extends(&self, f: &PartialMap) -> bool {
        f.domain
            .iter()
            .zip(&f.images)
            .all(|(x, y)| self.image(x.id).map(|z| z.id) == Some(y.id))
    }

    /// `other ∘ self`, defined when every image of `self` lies in `other`'s domain.
    pub fn then(&self, other: &EndoTruncation) -> Result<EndoTruncation> {
        let table = self
            .table
            .iter()
            .map(|&(x, y)| {
                other
                    .image(y.id)
                    .map(|z| (x, z))
                    .ok_or_else(|| Error::Contract(format!("point {} is outside the second truncation", y.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EndoTruncation {
            depth_in: self.depth_in,
            depth_out: other.depth_out,
            kind: self.kind.meet(other.kind),
            table,
        })
    }

    /// Whether two truncations send every common point to the same limit point.
    pub fn agrees_with(&self, other: &EndoTruncation) -> bool {
        self.table
            .iter()
            .zip(&other.table)
            .all(|((x, y), (x2, y2))| x.id == x2.id && y.id == y2.id)
    }
}

/// `K^i(f)` for `i <= depth`, between the towers over `f`'s source and target.
#[derive(Clone, Debug)]
pub struct KOmegaLadder {
    pub source: TowerHandle,
    pub target: TowerHandle,
    pub maps: Vec<Morphism>,
}

impl KOmegaLadder {
    /// Checks every naturality square `K^(i+1)(f) ∘ η = η ∘ K^i(f)`.
    pub fn check_squares(&self) -> Result<()> {
        for i in 0..self.maps.len().saturating_sub(1) {
            let down = self.maps[i].then(self.target.link(i)?)?;
            let across = self.source.link(i)?.then(&self.maps[i + 1])?;
            if down != across {
                return Err(Error::Structural(format!("ladder square {i} does not commute")));
            }
        }
        Ok(())
    }
}

/// The ladder `{K^i(f)}` for `i <= depth`.
pub fn k_omega_morphism(f: &Morphism, depth: usize) -> Result<KOmegaLadder> {
    check_kind_allowed(f.source().class(), f.kind())?;
    let mut source = TowerHandle::new(f.source().clone())?;
    let mut target = TowerHandle::new(f.target().clone())?;
    source.expand_to(depth)?;
    target.expand_to(depth)?;
    let mut maps = vec![f.clone()];
    for i in 0..depth {
        let next = k_morphism(&maps[i], source.expansion(i)?, target.expansion(i)?)?;
        maps.push(next);
    }
    Ok(KOmegaLadder { source, target, maps })
}

/// Work limit for one backtracking embedding search.
const SEARCH_NODES: usize = 100_000;

/// Lexicographically least embedding of `src` into `tgt` extending `fixed`, listed by
/// source id. `Ok(None)` means there is none; running out of search nodes is an error.
pub fn embed_over(
    src: &FiniteStructure,
    tgt: &FiniteStructure,
    fixed: &[(ElemId, ElemId)],
    exec: Execution,
) -> Result<Option<Vec<ElemId>>> {
    search_over(src, tgt, fixed, false, exec)
}

/// Whether sending `x, y` to `u, v` preserves the relation (or does not expand the distance).
fn preserves(src: &FiniteStructure, tgt: &FiniteStructure, x: ElemId, y: ElemId, u: ElemId, v: ElemId) -> bool {
    if src.grid().is_some() {
        return tgt.dist(u, v) <= src.dist(x, y);
    }
    (!src.related(x, y) || tgt.related(u, v)) && (!src.related(y, x) || tgt.related(v, u))
}

fn search_over(
    src: &FiniteStructure,
    tgt: &FiniteStructure,
    fixed: &[(ElemId, ElemId)],
    hom: bool,
    exec: Execution,
) -> Result<Option<Vec<ElemId>>> {
    if src.class() != tgt.class() {
        return Err(Error::Contract("embedding between different classes".into()));
    }
    let mut order: Vec<ElemId> = fixed.iter().map(|&(x, _)| x).collect();
    order.extend(src.elements().filter(|x| !fixed.iter().any(|&(y, _)| y == *x)));
    let mut img: Vec<ElemId> = Vec::with_capacity(order.len());
    for &(_, y) in fixed {
        if y as usize >= tgt.len() {
            return Err(Error::Structural(format!("element {y} outside the target")));
        }
    }
    let fits = |k: usize, w: ElemId, img: &[ElemId]| {
        if hom {
            let x = order[k];
            preserves(src, tgt, x, x, w, w) && (0..k).all(|j| preserves(src, tgt, x, order[j], w, img[j]))
        } else {
            !img[..k].contains(&w) && (0..k).all(|j| tgt.link(w, img[j]) == src.link(order[k], order[j]))
        }
    };
    for (k, &(_, y)) in fixed.iter().enumerate() {
        if !fits(k, y, &img) {
            return Ok(None);
        }
        img.push(y);
    }
    let mut nodes = 0usize;
    fn go(
        k: usize,
        order: &[ElemId],
        img: &mut Vec<ElemId>,
        nodes: &mut usize,
        tgt_len: usize,
        exec: Execution,
        fits: &(dyn Fn(usize, ElemId, &[ElemId]) -> bool + Sync),
    ) -> Option<bool> {
        if k == order.len() {
            return Some(true);
        }
        *nodes += 1;
        if *nodes > SEARCH_NODES {
            return None;
        }
        let snapshot = img.clone();
        let exec = if tgt_len < 1024 { Execution::Sequential } else { exec };
        let ok = par::map_range(exec, tgt_len, |w| fits(k, w as ElemId, &snapshot));
        for (w, _) in ok.into_iter().enumerate().filter(|&(_, b)| b) {
            img.push(w as ElemId);
            match go(k + 1, order, img, nodes, tgt_len, exec, fits) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            img.pop();
        }
        Some(false)
    }
    match go(fixed.len(), &order, &mut img, &mut nodes, tgt.len(), exec, &fits) {
        None => Err(Error::BudgetExhausted {
            depth: 0,
            what: format!("embedding search gave up after {SEARCH_NODES} nodes"),
        }),
        Some(false) => Ok(None),
        Some(true) => {
            let mut out = vec![0; src.len()];
            for (&x, &y) in order.iter().zip(&img) {
                out[x as usize] = y;
            }
            Ok(Some(out))
        }
    }
}

/// Embeds `src` over `fixed` into the least level (from `start`) of `t` that admits it.
/// Levels where the search gives up are skipped; the budget ends the search. With
/// `hom_fallback`, hitting the budget falls back to the least homomorphism over `fixed`
/// into the levels already built.
fn embed_into_tower(
    src: &FiniteStructure,
    t: &mut TowerHandle,
    start: usize,
    fixed: &[(ElemId, ElemId)],
    hom_fallback: bool,
    exec: Execution,
) -> Result<(usize, Vec<ElemId>)> {
    let mut gave_up = None;
    for l in start.. {
        if let Err(e) = budgeted(t, l, "embedding a truncation") {
            if hom_fallback {
                for l in start..l {
                    if let Ok(Some(m)) = search_over(src, t.level(l)?, fixed, true, exec) {
                        return Ok((l, m));
                    }
                }
            }
            return Err(gave_up.unwrap_or(e));
        }
        match embed_over(src, t.level(l)?, fixed, exec) {
            Ok(Some(m)) => return Ok((l, m)),
            Ok(None) => {}
            Err(Error::BudgetExhausted { what, .. }) => {
                gave_up = Some(Error::BudgetExhausted { depth: l, what });
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

/// Extends a partial morphism of `t`'s limit to a truncated endomorphism defined on all of
/// level `depth_in`.
///
/// With `A` the domain and `B` the image of `f`, the extension is `t ∘ K^ω(f) ∘ s⁻¹`:
/// `s⁻¹` identifies level `depth_in` with part of the tower over `A` by back steps
/// starting from `A`, `K^ω(f)` is the ladder over `f: A -> B`, and `t` sends the points of
/// the tower over `B` that are hit back into `t` by forth steps starting from `B`. The
/// levels actually used are reported in the result.
pub fn extend_partial_morphism(
    t: &mut TowerHandle,
    f: &PartialMap,
    depth_in: usize,
    exec: Execution,
) -> Result<EndoTruncation> {
    require_points(t)?;
    let class = t.class();
    check_kind_allowed(class, f.kind)?;
    if top_level(&f.domain) > depth_in {
        return Err(Error::Contract(format!(
            "domain reaches level {} beyond the requested truncation {depth_in}",
            top_level(&f.domain)
        )));
    }
    budgeted(t, depth_in.max(top_level(&f.images)), "truncation")?;
    f.to_morphism(t, t)?;

    let dom = ids_at(t, &f.domain, depth_in)?;
    let mut b_ids: Vec<ElemId> = Vec::new();
    let mut table = Vec::new();
    for &y in &ids_at(t, &f.images, top_level(&f.images))? {
        let pos = b_ids.iter().position(|&b| b == y).unwrap_or_else(|| {
            b_ids.push(y);
            b_ids.len() - 1
        });
        table.push(pos as ElemId);
    }
    let l_b = top_level(&f.images);
    let level_in = t.level(depth_in)?.clone();
    let a = Arc::new(level_in.induced(&dom)?);
    let b = Arc::new(t.level(l_b)?.induced(&b_ids)?);
    let kind = if f.kind == MorphismKind::Isomorphism { MorphismKind::Embedding } else { f.kind };
    let f_ab = Morphism::points(a.clone(), b.clone(), table, kind)?;

    // s⁻¹ and K^ω(f) on sparse chains: each step adds one point of level depth_in to the
    // A side as a new element of K of the previous step, and its K(f)-image to the B side.
    let rest: Vec<ElemId> = (0..level_in.len() as ElemId).filter(|x| !dom.contains(x)).collect();
    let mut order = dom.clone();
    let mut step_a = a;
    let mut step_b = b;
    let mut kf = f_ab;
    for &x in &rest {
        let placed = step_a.len();
        order.push(x);
        let ext = level_in.induced(&order)?;
        let ids: Vec<ElemId> = (0..placed as ElemId).collect();
        let payload = new_point_payload(&step_a, &ext, &ids, placed as ElemId)?;
        let KImage::One(img) = map_k_element(&kf, &KElement::New(payload.clone()))? else {
            unreachable!("point images are single elements")
        };
        let (kb, y) = match img {
            KElement::Old(y) => (k_restricted(&step_b, Vec::new())?, y),
            KElement::New(q) => (k_restricted(&step_b, vec![q])?, step_b.len() as ElemId),
        };
        let ka = k_restricted(&step_a, vec![payload])?;
        if **ka.object() != ext {
            return Err(Error::Structural("sparse chain step does not reproduce the level".into()));
        }
        let mut table: Vec<ElemId> = (0..placed as ElemId).map(|w| kf.at(w)).collect();
        table.push(y);
        kf = Morphism::points(ka.object().clone(), kb.object().clone(), table, kind)?;
        step_a = ka.object().clone();
        step_b = kb.object().clone();
    }
    let pos_in_chain: Vec<usize> = {
        let mut p = vec![0; level_in.len()];
        for (i, &x) in order.iter().enumerate() {
            p[x as usize] = i;
        }
        p
    };

    // t: the B side of the chain into the tower over B, fixing B. Homomorphism requests
    // settle for a homomorphism over B when no embedding fits in the budget.
    let h = (*step_b).clone();
    let fixed_b: Vec<(ElemId, ElemId)> = b_ids.iter().enumerate().map(|(i, &y)| (i as ElemId, y)).collect();
    let (_, pushed) = embed_into_tower(&h, t, l_b, &fixed_b, kind == MorphismKind::Homomorphism, exec)?;

    let mut pairs = Vec::with_capacity(level_in.len());
    for x in 0..level_in.len() as ElemId {
        let y = pushed[kf.at(pos_in_chain[x as usize] as ElemId) as usize];
        pairs.push((canonical(t, x)?, canonical(t, y)?));
    }
    let depth_out = pairs.iter().map(|(_, y)| y.level).max().unwrap_or(0).max(depth_in);
    let out = EndoTruncation {
        depth_in,
        depth_out,
        kind,
        table: pairs,
    };
    out.to_morphism(t)?;
    if !out.extends(f) {
        return Err(Error::Structural("extension does not restrict to the partial map".into()));
    }
    Ok(out)
}

/// `g ↦ K^ω(g)` on the tower over `c`, truncated at `depth`: each endomorphism `g` of `c`
/// becomes `K^depth(g)` acting on level `depth`.
pub fn embed_endomorphisms(
    c: &Arc<FiniteStructure>,
    gs: &[Morphism],
    depth: usize,
    exec: Execution,
) -> Result<(TowerHandle, Vec<EndoTruncation>)> {
    let mut t = TowerHandle::new(c.clone())?;
    require_points(&t)?;
    t.expand_to(depth)?;
    for g in gs {
        if g.source() != c || g.target() != c {
            return Err(Error::Contract("endomorphisms must act on the seed".into()));
        }
        check_kind_allowed(c.class(), g.kind())?;
    }
    let t_ref = &t;
    let outs = par::try_map(exec, gs, |g| {
        let mut m = g.clone();
        for i in 0..depth {
            m = k_morphism(&m, t_ref.expansion(i)?, t_ref.expansion(i)?)?;
        }
        let MapData::Points(table) = m.map() else { unreachable!() };
        let sizes = t_ref.level_sizes();
        let addr = |id: ElemId| {
            let l = sizes.iter().position(|&n| (id as usize) < n).expect("id within level");
            TowerAddress::new(l, id)
        };
        Ok::<_, Error>(EndoTruncation {
            depth_in: depth,
            depth_out: depth,
            kind: m.kind(),
            table: table.iter().enumerate().map(|(x, &y)| (addr(x as ElemId), addr(y))).collect(),
        })
    })?;
    Ok((t, outs))
}

/// Outcome of [`continuity_probe`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    /// Least `n0` with `f_n ↾ S = f ↾ S` for all `n >= n0`, if the sequence ends agreeing.
    pub restriction_stable_from: Option<usize>,
    /// Least `n0` with `K(f_n) ↾ K(⟨S⟩) = K(f) ↾ K(⟨S⟩)` for all `n >= n0`.
    pub k_stable_from: Option<usize>,
}

impl ProbeReport {
    pub fn hypothesis_met(&self) -> bool {
        self.restriction_stable_from.is_some()
    }

    /// The two stabilization points coincide.
    pub fn holds(&self) -> bool {
        self.restriction_stable_from == self.k_stable_from
    }
}

fn stable_from(agree: &[bool]) -> Option<usize> {
    if agree.last() == Some(&false) {
        return None;
    }
    Some(agree.iter().rposition(|&a| !a).map_or(0, |i| i + 1))
}

/// Compares when `f_n` settles on `S` with when `K(f_n)` settles on `K(⟨S⟩)`.
///
/// `S` lists elements (atoms for Boolean algebras) of the source.
pub fn continuity_probe(f: &Morphism, fseq: &[Morphism], s: &[ElemId]) -> Result<ProbeReport> {
    let x = f.source().clone();
    for g in fseq {
        if g.source() != f.source() || g.target() != f.target() {
            return Err(Error::Contract("sequence members must share f's source and target".into()));
        }
    }
    let mut s: Vec<ElemId> = s.to_vec();
    s.sort_unstable();
    s.dedup();
    let inc = if x.class() == ClassTag::BooleanAlgebra {
        let (sub, blocks) = x.generated_subalgebra(&s)?;
        Morphism::new(Arc::new(sub), x.clone(), MapData::Atoms(blocks), MorphismKind::Embedding)?
    } else {
        Morphism::points(Arc::new(x.induced(&s)?), x.clone(), s.clone(), MorphismKind::Embedding)?
    };
    let ks = k_object(inc.source())?;
    let kx = k_object(&x)?;
    let ky = k_object(f.target())?;
    let kinc = k_morphism(&inc, &ks, &kx)?;
    let restricted = |g: &Morphism| -> Result<(MapData, MapData)> {
        let on_s = inc.then(g)?.map().clone();
        let on_ks = kinc.then(&k_morphism(g, &kx, &ky)?)?.map().clone();
        Ok((on_s, on_ks))
    };
    let (f_s, f_ks) = restricted(f)?;
    let mut agree_s = Vec::with_capacity(fseq.len());
    let mut agree_k = Vec::with_capacity(fseq.len());
    for g in fseq {
        let (g_s, g_ks) = restricted(g)?;
        agree_s.push(g_s == f_s);
        agree_k.push(g_ks == f_ks);
    }
    Ok(ProbeReport {
        restriction_stable_from: stable_from(&agree_s),
        k_stable_from: stable_from(&agree_k),
    })
}
