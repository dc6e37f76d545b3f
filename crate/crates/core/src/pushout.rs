//! Free amalgams and pushouts of embeddings against homomorphisms, for graphs.
//!
//! Squares are laid out as
//!
//! ```text
//!   A₂ --q--> B
//!   ^         ^
//!   g         p
//!   |         |
//!   A₀ --f--> A₁
//! ```
//!
//! with `g` and `p` embeddings and `f`, `q` homomorphisms.

use std::collections::HashSet;
use std::sync::Arc;

use crate::classes::{new_point_payload, KElement, KObjectResult};
use crate::error::{Error, Result};
use crate::structures::{
    enumerate_one_point_extensions, ClassTag, Element, ElemId, FiniteStructure, Link, Morphism, MorphismKind,
    OnePointExtension,
};

/// Largest base `generic_k` accepts.
pub const GENERIC_K_CAP: usize = 5;

/// Cocone enumeration stops with a capacity error past this many candidates.
const COCONE_WORK: usize = 1 << 22;

/// `B₁ ⊔_A B₂` with its two canonical embeddings.
#[derive(Clone, Debug)]
pub struct Amalgam {
    pub object: Arc<FiniteStructure>,
    pub left: Morphism,
    pub right: Morphism,
}

/// Free amalgam of two embeddings with a common source. `B₁` keeps its ids; the elements
/// of `B₂` outside the base follow in id order.
pub fn free_amalgam(j1: &Morphism, j2: &Morphism) -> Result<Amalgam> {
    let class = j1.source().class();
    if !matches!(class, ClassTag::Graph | ClassTag::KnFreeGraph(_) | ClassTag::Digraph) {
        return Err(Error::Contract(format!("{class} has no free amalgamation")));
    }
    if j1.source() != j2.source() {
        return Err(Error::Contract("free amalgam needs a common base".into()));
    }
    for j in [j1, j2] {
        if j.kind() == MorphismKind::Homomorphism {
            j.with_kind(MorphismKind::Embedding)?;
        }
    }
    let (b1, b2) = (j1.target(), j2.target());
    let t1 = j1.table().expect("point class");
    let t2 = j2.table().expect("point class");
    let mut right = vec![ElemId::MAX; b2.len()];
    for (a, &y) in t2.iter().enumerate() {
        right[y as usize] = t1[a];
    }
    let mut next = b1.len() as ElemId;
    for slot in right.iter_mut().filter(|s| **s == ElemId::MAX) {
        *slot = next;
        next += 1;
    }
    let mut pairs = b1.pairs();
    pairs.extend(b2.pairs().into_iter().map(|(x, y)| (right[x as usize], right[y as usize])));
    pairs.sort_unstable();
    pairs.dedup();
    let object = Arc::new(FiniteStructure::from_pairs(class, next as usize, &pairs)?);
    let left = Morphism::points(b1.clone(), object.clone(), b1.elements().collect(), MorphismKind::Embedding)?;
    let right = Morphism::points(b2.clone(), object.clone(), right, MorphismKind::Embedding)?;
    Ok(Amalgam { object, left, right })
}

/// A commuting square `p ∘ f = q ∘ g`.
#[derive(Clone, Debug)]
pub struct PushoutSquare {
    pub f: Morphism,
    pub g: Morphism,
    pub b: Arc<FiniteStructure>,
    pub p: Morphism,
    pub q: Morphism,
}

/// Outcome of the bounded universality check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoconeReport {
    /// Commuting pairs `(p′, q′)` examined, up to isomorphism of their common target.
    pub cocones: usize,
    pub largest_cocone: usize,
    pub failure: Option<String>,
}

impl CoconeReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl PushoutSquare {
    fn check(&self) -> Result<()> {
        if self.p.target() != &self.b || self.q.target() != &self.b {
            return Err(Error::Structural("square legs do not meet in B".into()));
        }
        if self.f.then(&self.p)? != self.g.then(&self.q)? {
            return Err(Error::Structural("square does not commute".into()));
        }
        Ok(())
    }

    /// `A₁ ↪· B`, when `B` adds exactly one point to the image of `p`.
    pub fn p_one_point(&self) -> Result<OnePointExtension> {
        let table = self.p.table().expect("point class");
        let outside: Vec<ElemId> = self.b.elements().filter(|y| !table.contains(y)).collect();
        match outside[..] {
            [x] => OnePointExtension::new(self.p.clone(), Element::Point(x)),
            _ => Err(Error::Structural(format!(
                "p misses {} points of B, not one",
                outside.len()
            ))),
        }
    }

    /// Checks every commuting pair `(p′, q′)` of homomorphisms whose images together cover
    /// their target for a unique mediating `h` with `h ∘ p = p′` and `h ∘ q = q′`.
    ///
    /// Such a target is a quotient of `A₁ ⊔ (A₂ ∖ g(A₀))` carrying at least the image
    /// edges, so it has at most `|B|` elements when the square is a pushout; the
    /// enumeration runs over those partitions and edge supersets.
    pub fn universality_certificate(&self) -> Result<CoconeReport> {
        self.check()?;
        let (a1, a2) = (self.f.target(), self.g.target());
        let gt = self.g.table().expect("point class");
        let ft = self.f.table().expect("point class");
        // Cells of U: A₁ first, then the points of A₂ outside g.
        let mut of_a2 = vec![usize::MAX; a2.len()];
        for (a, &y) in gt.iter().enumerate() {
            of_a2[y as usize] = ft[a] as usize;
        }
        let mut u = a1.len();
        for slot in of_a2.iter_mut().filter(|s| **s == usize::MAX) {
            *slot = u;
            u += 1;
        }
        let mut forced: Vec<(usize, usize)> = a1.pairs().into_iter().map(|(x, y)| (x as usize, y as usize)).collect();
        forced.extend(a2.pairs().into_iter().map(|(x, y)| (of_a2[x as usize], of_a2[y as usize])));

        // h on B through p and q, in terms of U.
        let mut via: Vec<Vec<usize>> = vec![Vec::new(); self.b.len()];
        for x in a1.elements() {
            via[self.p.at(x) as usize].push(x as usize);
        }
        for y in a2.elements() {
            via[self.q.at(y) as usize].push(of_a2[y as usize]);
        }
        if let Some(b) = via.iter().position(|v| v.is_empty()) {
            return Ok(CoconeReport {
                cocones: 0,
                largest_cocone: 0,
                failure: Some(format!("element {b} of B is outside the images, so mediators are not unique")),
            });
        }

        let mut report = CoconeReport {
            cocones: 0,
            largest_cocone: 0,
            failure: None,
        };
        let mut work = 0usize;
        for cells in set_partitions(u) {
            let n = cells.iter().max().map_or(0, |&m| m + 1);
            let mut adj = vec![vec![false; n]; n];
            if forced.iter().any(|&(x, y)| cells[x] == cells[y]) {
                continue;
            }
            for &(x, y) in &forced {
                adj[cells[x]][cells[y]] = true;
                adj[cells[y]][cells[x]] = true;
            }
            let free: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !adj[i][j])
                .collect();
            work = work.saturating_add(1usize.checked_shl(free.len() as u32).unwrap_or(usize::MAX));
            if free.len() >= 64 || work > COCONE_WORK {
                return Err(Error::capacity("cocone enumeration", format!("more than {COCONE_WORK} candidates"), COCONE_WORK));
            }
            for mask in 0u64..(1 << free.len()) {
                let mut c = adj.clone();
                for (k, &(i, j)) in free.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        c[i][j] = true;
                        c[j][i] = true;
                    }
                }
                report.cocones += 1;
                report.largest_cocone = report.largest_cocone.max(n);
                if let Err(why) = self.mediator(&via, &cells, &c) {
                    report.failure = Some(format!("cocone with cells {cells:?}: {why}"));
                    return Ok(report);
                }
            }
        }
        Ok(report)
    }

    fn mediator(&self, via: &[Vec<usize>], cells: &[usize], c: &[Vec<bool>]) -> std::result::Result<(), String> {
        let mut h = Vec::with_capacity(via.len());
        for (b, sources) in via.iter().enumerate() {
            let target = cells[sources[0]];
            if sources.iter().any(|&s| cells[s] != target) {
                return Err(format!("p′ and q′ disagree on element {b} of B"));
            }
            h.push(target);
        }
        for (x, y) in self.b.pairs() {
            if !c[h[x as usize]][h[y as usize]] {
                return Err(format!("the mediator breaks the edge {x}~{y}"));
            }
        }
        Ok(())
    }
}

/// Set partitions of `0..n` as restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(n: usize, cur: &mut Vec<usize>, top: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..=top {
            cur.push(c);
            rec(n, cur, top.max(c + 1), out);
            cur.pop();
        }
    }
    rec(n, &mut cur, 0, &mut out);
    out
}

fn require_graph(class: ClassTag) -> Result<()> {
    if class == ClassTag::Graph {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "pushouts along homomorphisms are only computed for graphs, not {class}"
        )))
    }
}

/// Pushout of a homomorphism `f: A₀ → A₁` against a one-point extension `g: A₀ ↪· A₂`:
/// `A₁` plus a point `x̂` adjacent to the `f`-images of the neighbours of `x`.
pub fn one_point_pushout(f: &Morphism, g: &OnePointExtension) -> Result<PushoutSquare> {
    require_graph(f.source().class())?;
    if f.source() != g.base() {
        return Err(Error::Contract("f and g must share their source".into()));
    }
    let a1 = f.target();
    let a2 = g.extension();
    let gt = g.inclusion().table().expect("point class");
    let x = g.new_point().expect("point class");
    let hat = a1.len() as ElemId;
    let mut pairs = a1.pairs();
    for a in g.base().elements() {
        if a2.related(gt[a as usize], x) {
            let y = f.at(a);
            pairs.push((y, hat));
            pairs.push((hat, y));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let b = Arc::new(FiniteStructure::from_pairs(ClassTag::Graph, a1.len() + 1, &pairs)?);
    let p = Morphism::points(a1.clone(), b.clone(), a1.elements().collect(), MorphismKind::Embedding)?;
    let mut qt = vec![hat; a2.len()];
    for (a, &y) in gt.iter().enumerate() {
        qt[y as usize] = f.at(a as ElemId);
    }
    let q = Morphism::points(a2.clone(), b.clone(), qt, MorphismKind::Homomorphism)?;
    let square = PushoutSquare {
        f: f.clone(),
        g: g.inclusion().clone(),
        b,
        p,
        q,
    };
    square.check()?;
    square.p_one_point()?;
    Ok(square)
}

/// Pushout of a homomorphism against any embedding, composed from one-point squares
/// that add the points outside `g` in id order.
pub fn mixed_pushout(f: &Morphism, g: &Morphism) -> Result<PushoutSquare> {
    require_graph(f.source().class())?;
    if f.source() != g.source() {
        return Err(Error::Contract("f and g must share their source".into()));
    }
    let g = if g.kind() == MorphismKind::Homomorphism {
        g.with_kind(MorphismKind::Embedding)?
    } else {
        g.clone()
    };
    let a2 = g.target();
    let mut order: Vec<ElemId> = g.table().expect("point class").to_vec();
    let rest: Vec<ElemId> = a2.elements().filter(|y| !order.contains(y)).collect();

    // f_i: C_i → B_i, where C_i is A₂ on g(A₀) and the first i extra points.
    let mut c = Arc::new(a2.induced(&order)?);
    let mut fi = Morphism::points(c.clone(), f.target().clone(), f.table().expect("point class").to_vec(), f.kind())?;
    let mut p_total: Vec<ElemId> = f.target().elements().collect();
    for &x in &rest {
        order.push(x);
        let next = Arc::new(a2.induced(&order)?);
        let inclusion = Morphism::points(c.clone(), next.clone(), c.elements().collect(), MorphismKind::Embedding)?;
        let step = one_point_pushout(&fi, &OnePointExtension::new(inclusion, Element::Point(c.len() as ElemId))?)?;
        p_total = p_total.into_iter().map(|y| step.p.at(y)).collect();
        fi = step.q;
        c = next;
    }
    let b = fi.target().clone();
    let mut qt = vec![0; a2.len()];
    for (i, &y) in order.iter().enumerate() {
        qt[y as usize] = fi.at(i as ElemId);
    }
    let square = PushoutSquare {
        f: f.clone(),
        q: Morphism::points(a2.clone(), b.clone(), qt, MorphismKind::Homomorphism)?,
        p: Morphism::points(f.target().clone(), b.clone(), p_total, MorphismKind::Embedding)?,
        g,
        b,
    };
    square.check()?;
    Ok(square)
}

/// `K(A)` as the colimit of the chain of pushouts of all one-point extensions of `A`, one
/// per isomorphism type over `A`. The new point of the `n`-th extension gets id `|A| + n`.
pub fn generic_k(a: &Arc<FiniteStructure>) -> Result<KObjectResult> {
    require_graph(a.class())?;
    if a.len() > GENERIC_K_CAP {
        return Err(Error::capacity("generic K", format!("a base of {} elements", a.len()), GENERIC_K_CAP));
    }
    let exts = enumerate_one_point_extensions(a)?;
    let mut p: Arc<FiniteStructure> = a.clone();
    let mut into_p = Morphism::identity(a.clone()).with_kind(MorphismKind::Homomorphism)?;
    let mut index: Vec<KElement> = a.elements().map(KElement::Old).collect();
    for e in &exts {
        let square = one_point_pushout(&into_p, e)?;
        let table = e.inclusion().table().expect("point class");
        let x = e.new_point().expect("point class");
        index.push(KElement::New(new_point_payload(a, e.extension(), table, x)?));
        into_p = into_p.then(&square.p)?;
        p = square.b;
    }
    KObjectResult::assemble(a, (*p).clone(), index)
}

/// Types over the base realized by the points of `K(A)` outside `η(A)`.
pub fn realized_types(k: &KObjectResult) -> HashSet<Vec<Link>> {
    let eta = k.eta().table().expect("point class");
    let obj = k.object();
    obj.elements()
        .filter(|z| !eta.contains(z))
        .map(|z| eta.iter().map(|&e| obj.link(e, z)).collect())
        .collect()
}

/// Whether every one-point extension of the base has its type realized in `K(A)`.
pub fn realizes_all_extensions(k: &KObjectResult) -> Result<bool> {
    let types = realized_types(k);
    Ok(enumerate_one_point_extensions(k.base())?
        .iter()
        .all(|e| types.contains(&e.point_type())))
}
