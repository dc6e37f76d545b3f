//! Strong distortion of endomorphism monoids of limits: the natural JEP functor `(C, D)`,
//! the chain `L₁ ↪ L₂ ↪ …` with `L_n = (L_{n−1}, L)`, and the colimit maps `σ`, `τ`, `φ(f̄)`
//! and `β` on a finite truncation `L` of the limit.
//!
//! Every map is available twice: as a validated [`Morphism`] between chain levels, built
//! from `(·,·)` on morphisms, and pointwise on [`JepPoint`] addresses. The two are
//! cross-checked by [`verify_distortion`].

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::classes::{k_morphism, k_object, KObjectResult};
use crate::error::{Error, Result};
use crate::structures::{ClassTag, ElemId, FiniteStructure, MapData, Morphism, MorphismKind};
use crate::tower::{TowerAddress, TowerHandle};

/// Deepest chain built at desk scale.
pub const MAX_CHAIN_DEPTH: usize = 6;

/// `F(C, D)` with its embeddings `λ_C` and `ρ_D`.
#[derive(Clone, Debug)]
pub struct JepObject {
    pub object: Arc<FiniteStructure>,
    pub left: Morphism,
    pub right: Morphism,
}

fn require_jep(class: ClassTag) -> Result<()> {
    match class {
        ClassTag::Graph | ClassTag::Digraph | ClassTag::Poset | ClassTag::RationalMetric(_) | ClassTag::BooleanAlgebra => {
            Ok(())
        }
        _ => Err(Error::Unsupported {
            class,
            what: "a retractive natural JEP functor",
        }),
    }
}

/// `F(C, D)`: the coproduct for graphs, digraphs and posets, the disjoint union at distance
/// 1 for metric spaces, and the coproduct `C ⊗ D` (atoms are pairs) for Boolean algebras.
/// For point classes `C` keeps its ids and `D` follows.
pub fn jep(c: &Arc<FiniteStructure>, d: &Arc<FiniteStructure>) -> Result<JepObject> {
    let class = c.class();
    require_jep(class)?;
    if d.class() != class {
        return Err(Error::Contract(format!("JEP of {class} with {}", d.class())));
    }
    let (m, n) = (c.len(), d.len());
    let object = match class {
        ClassTag::BooleanAlgebra => FiniteStructure::boolean_algebra(m * n),
        ClassTag::RationalMetric(q) => {
            let one = Rational64::from_integer(1);
            let rows = (0..m + n)
                .map(|i| {
                    (0..m + n)
                        .map(|j| match (i < m, j < m) {
                            (true, true) => c.dist(i as ElemId, j as ElemId),
                            (false, false) => d.dist((i - m) as ElemId, (j - m) as ElemId),
                            _ => one,
                        })
                        .collect()
                })
                .collect();
            FiniteStructure::rational_metric(q, rows)?
        }
        _ => {
            let mut pairs = c.pairs();
            let off = m as ElemId;
            pairs.extend(d.pairs().into_iter().map(|(x, y)| (x + off, y + off)));
            FiniteStructure::from_pairs(class, m + n, &pairs)?
        }
    };
    let object = Arc::new(object);
    let (left, right) = if class == ClassTag::BooleanAlgebra {
        let pair = |a: usize, b: usize| (a * n + b) as ElemId;
        (
            MapData::Atoms((0..m).map(|a| (0..n).map(|b| pair(a, b)).collect()).collect()),
            MapData::Atoms((0..n).map(|b| (0..m).map(|a| pair(a, b)).collect()).collect()),
        )
    } else {
        (
            MapData::Points(c.elements().collect()),
            MapData::Points(d.elements().map(|y| y + m as ElemId).collect()),
        )
    };
    Ok(JepObject {
        left: Morphism::new(c.clone(), object.clone(), left, MorphismKind::Embedding)?,
        right: Morphism::new(d.clone(), object.clone(), right, MorphismKind::Embedding)?,
        object,
    })
}

/// `F(f, g): F(C, D) → F(C′, D′)`, given both pair objects.
pub fn jep_map(f: &Morphism, g: &Morphism, src: &JepObject, tgt: &JepObject) -> Result<Morphism> {
    if src.left.source() != f.source()
        || src.right.source() != g.source()
        || tgt.left.source() != f.target()
        || tgt.right.source() != g.target()
    {
        return Err(Error::Contract("pair objects do not match the morphisms".into()));
    }
    let kind = f.kind().meet(g.kind()).min(MorphismKind::Embedding);
    let map = match (f.map(), g.map()) {
        (MapData::Points(ft), MapData::Points(gt)) => {
            let m2 = f.target().len() as ElemId;
            let mut t: Vec<ElemId> = ft.clone();
            t.extend(gt.iter().map(|&y| y + m2));
            MapData::Points(t)
        }
        (MapData::Atoms(fa), MapData::Atoms(ga)) => {
            let n2 = g.target().len();
            let mut blocks = Vec::with_capacity(fa.len() * ga.len());
            for fb in fa {
                for gb in ga {
                    blocks.push(
                        fb.iter()
                            .flat_map(|&a| gb.iter().map(move |&b| (a as usize * n2 + b as usize) as ElemId))
                            .collect(),
                    );
                }
            }
            MapData::Atoms(blocks)
        }
        _ => return Err(Error::Contract("mixed point and atom maps".into())),
    };
    Morphism::new(src.object.clone(), tgt.object.clone(), map, kind)
}

/// `F(C, C)` with the retractions `λ*` and `ρ*`, both the codiagonal fold.
pub fn jep_retractions(c: &Arc<FiniteStructure>) -> Result<(JepObject, Morphism, Morphism)> {
    let pair = jep(c, c)?;
    let n = c.len();
    let (ls, rs) = if c.class() == ClassTag::BooleanAlgebra {
        // Dual to the diagonal of the atom sets: the atom (a, a) goes to a, the rest to 0.
        let fold: Vec<Vec<ElemId>> = (0..n * n)
            .map(|p| if p / n == p % n { vec![(p / n) as ElemId] } else { Vec::new() })
            .collect();
        (MapData::Atoms(fold.clone()), MapData::Atoms(fold))
    } else {
        let fold: Vec<ElemId> = (0..2 * n).map(|i| (i % n) as ElemId).collect();
        (MapData::Points(fold.clone()), MapData::Points(fold))
    };
    let lambda_star = Morphism::new(pair.object.clone(), c.clone(), ls, MorphismKind::Homomorphism)?;
    let rho_star = Morphism::new(pair.object.clone(), c.clone(), rs, MorphismKind::Homomorphism)?;
    let id = Morphism::identity(c.clone());
    if pair.left.then(&lambda_star)? != id || pair.right.then(&rho_star)? != id {
        return Err(Error::Structural("JEP retractions do not split the embeddings".into()));
    }
    Ok((pair, lambda_star, rho_star))
}

/// One step of a [`JepPoint`] path, read from the outermost pair inwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// A point of `L_n = [L, …, L]`: the path through the nested pairs and the address of the
/// point in the truncation of `L`.
///
/// At level `n` the `k`-th copy of `L` (counting from the innermost) is reached by
/// `Left^(n−k) Right` for `k ≥ 2` and by `Left^(n−1)` for `k = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JepPoint {
    pub path: Vec<Side>,
    pub base: TowerAddress,
}

impl JepPoint {
    /// Which copy of `L` the point lies in, at level `n`.
    pub fn copy(&self, n: usize) -> Result<usize> {
        let lefts = self.path.iter().take_while(|s| **s == Side::Left).count();
        match self.path.len() {
            len if len == lefts && len + 1 == n => Ok(1),
            len if len == lefts + 1 && lefts + 2 <= n => Ok(n - lefts),
            _ => Err(Error::Contract(format!("path {:?} is not a point of level {n}", self.path))),
        }
    }

    fn in_copy(n: usize, k: usize, base: TowerAddress) -> Self {
        let path = if k == 1 {
            vec![Side::Left; n - 1]
        } else {
            let mut p = vec![Side::Left; n - k];
            p.push(Side::Right);
            p
        };
        JepPoint { path, base }
    }
}

impl fmt::Display for JepPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.path {
            f.write_str(if *s == Side::Left { "L" } else { "R" })?;
        }
        write!(f, "·{}:{}", self.base.level, self.base.id)
    }
}

/// The chain `L₁ ↪ L₂ ↪ … ↪ L_depth` over a truncation `L` of a tower.
#[derive(Clone, Debug)]
pub struct JepChain {
    truncation: usize,
    addresses: Vec<TowerAddress>,
    objects: Vec<Arc<FiniteStructure>>,
    /// `pairs[k]` presents `L_{k+2} = (L_{k+1}, L)`.
    pairs: Vec<JepObject>,
    lambda_star: Morphism,
    rho_star: Morphism,
}

/// Builds the chain to `depth` over level `truncation` of `t`.
pub fn build_chain(t: &mut TowerHandle, truncation: usize, depth: usize) -> Result<JepChain> {
    require_jep(t.class())?;
    if depth == 0 || depth > MAX_CHAIN_DEPTH {
        return Err(Error::capacity("JEP chain", format!("depth {depth}"), MAX_CHAIN_DEPTH));
    }
    t.expand_to(truncation)?;
    let l = t.level(truncation)?.clone();
    let addresses = if l.class() == ClassTag::BooleanAlgebra {
        Vec::new()
    } else {
        l.elements()
            .map(|id| t.canonical(TowerAddress::new(truncation, id)))
            .collect::<Result<_>>()?
    };
    let (first, lambda_star, rho_star) = jep_retractions(&l)?;
    let mut objects = vec![l.clone(), first.object.clone()];
    let mut pairs = vec![first];
    while objects.len() < depth {
        let next = jep(objects.last().expect("nonempty"), &l)?;
        objects.push(next.object.clone());
        pairs.push(next);
    }
    objects.truncate(depth);
    pairs.truncate(depth - 1);
    Ok(JepChain {
        truncation,
        addresses,
        objects,
        pairs,
        lambda_star,
        rho_star,
    })
}

/// A map of the colimit restricted to `ι_from`, landing in `L_to`.
#[derive(Clone, Debug)]
pub struct LevelMap {
    pub from: usize,
    pub to: usize,
    pub map: Morphism,
}

impl JepChain {
    pub fn depth(&self) -> usize {
        self.objects.len()
    }

    /// Canonical tower addresses of the points of `L`, by id.
    pub fn addresses(&self) -> &[TowerAddress] {
        &self.addresses
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `L` itself.
    pub fn base(&self) -> &Arc<FiniteStructure> {
        &self.objects[0]
    }

    /// `L_n`, 1-based.
    pub fn level(&self, n: usize) -> Result<&Arc<FiniteStructure>> {
        self.check_level(n)?;
        Ok(&self.objects[n - 1])
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.objects.iter().map(|o| o.len()).collect()
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.depth() {
            Err(Error::BudgetExhausted {
                depth: self.depth(),
                what: format!("level {n} of the JEP chain"),
            })
        } else {
            Ok(())
        }
    }

    fn pair(&self, n: usize) -> Result<&JepObject> {
        self.check_level(n)?;
        if n < 2 {
            return Err(Error::Contract("L₁ is not a pair".into()));
        }
        Ok(&self.pairs[n - 2])
    }

    /// `λ_{L_n}: L_n ↪ L_{n+1}`.
    pub fn link(&self, n: usize) -> Result<&Morphism> {
        Ok(&self.pair(n + 1)?.left)
    }

    /// `ρ_L: L ↪ L₂`.
    pub fn rho(&self) -> Result<&Morphism> {
        Ok(&self.pair(2)?.right)
    }

    pub fn lambda_star(&self) -> &Morphism {
        &self.lambda_star
    }

    pub fn rho_star(&self) -> &Morphism {
        &self.rho_star
    }

    /// `[f, id_L]_j` for `f: L_a → L_b`: a map `L_{a+j} → L_{b+j}`.
    pub fn bracket(&self, f: &Morphism, a: usize, b: usize, j: usize) -> Result<Morphism> {
        let id = Morphism::identity(self.base().clone());
        let mut m = f.clone();
        for i in 1..=j {
            m = jep_map(&m, &id, self.pair(a + i)?, self.pair(b + i)?)?;
        }
        Ok(m)
    }

    /// `[f₁, …, f_n]: L_n → L_n`.
    pub fn tuple(&self, fs: &[Morphism]) -> Result<Morphism> {
        let Some(first) = fs.first() else {
            return Err(Error::Contract("empty endomorphism tuple".into()));
        };
        let mut m = first.clone();
        for (i, f) in fs.iter().enumerate().skip(1) {
            let p = self.pair(i + 1)?;
            m = jep_map(&m, f, p, p)?;
        }
        Ok(m)
    }

    /// `λ_{L_{to−1}} ∘ … ∘ λ_{L_from}`.
    pub fn links(&self, from: usize, to: usize) -> Result<Morphism> {
        let mut m = Morphism::identity(self.level(from)?.clone());
        for n in from..to {
            m = m.then(self.link(n)?)?;
        }
        Ok(m)
    }

    /// `σ ∘ ι_n = ι_{n+1} ∘ [ρ_L, id_L]_{n−1}`.
    pub fn sigma(&self, n: usize) -> Result<LevelMap> {
        Ok(LevelMap {
            from: n,
            to: n + 1,
            map: self.bracket(self.rho()?, 1, 2, n - 1)?,
        })
    }

    /// `τ ∘ ι_{n+1} = ι_n ∘ [ρ*_L, id_L]_{n−1}`; on `ι₁` through `ι₁ = ι₂ ∘ λ_{L₁}`.
    pub fn tau(&self, n: usize) -> Result<LevelMap> {
        self.check_level(n)?;
        if n == 1 {
            return Ok(LevelMap {
                from: 1,
                to: 1,
                map: self.link(1)?.then(&self.rho_star)?,
            });
        }
        Ok(LevelMap {
            from: n,
            to: n - 1,
            map: self.bracket(&self.rho_star, 2, 1, n - 2)?,
        })
    }

    /// `φ(f̄) ∘ ι_n = ι_n ∘ [f₁, …, f_n]`.
    pub fn phi(&self, fs: &EndoSequence, n: usize) -> Result<LevelMap> {
        if fs.len() < n {
            return Err(Error::Contract(format!(
                "φ at level {n} needs {n} endomorphisms, the sequence has {}",
                fs.len()
            )));
        }
        Ok(LevelMap {
            from: n,
            to: n,
            map: self.tuple(&fs.maps()[..n])?,
        })
    }

    /// `β ∘ ι_n`: `id_L` at level 1, then `λ*_L ∘ (β ∘ ι_{n−1}, id_L)`.
    pub fn beta(&self, n: usize) -> Result<Morphism> {
        self.check_level(n)?;
        let id = Morphism::identity(self.base().clone());
        let mut m = id.clone();
        for k in 2..=n {
            let into_pair = jep_map(&m, &id, self.pair(k)?, self.pair(2)?)?;
            m = into_pair.then(&self.lambda_star)?;
        }
        Ok(m)
    }

    /// The point of `L_n` with id `id`; point classes only.
    pub fn point(&self, n: usize, id: ElemId) -> Result<JepPoint> {
        self.require_points()?;
        let s = self.base().len();
        let size = self.level(n)?.len();
        if id as usize >= size {
            return Err(Error::Structural(format!("id {id} outside level {n}")));
        }
        let copy = id as usize / s + 1;
        Ok(JepPoint::in_copy(n, copy, self.addresses[id as usize % s]))
    }

    /// Inverse of [`JepChain::point`].
    pub fn id_of(&self, n: usize, p: &JepPoint) -> Result<ElemId> {
        self.require_points()?;
        let k = p.copy(n)?;
        let v = self.base_id(p.base)?;
        Ok(((k - 1) * self.base().len()) as ElemId + v)
    }

    fn base_id(&self, a: TowerAddress) -> Result<ElemId> {
        self.addresses
            .iter()
            .position(|&b| b == a)
            .map(|i| i as ElemId)
            .ok_or_else(|| Error::Contract(format!("{a:?} is not in the truncation")))
    }

    fn require_points(&self) -> Result<()> {
        if self.base().class() == ClassTag::BooleanAlgebra {
            Err(Error::Unsupported {
                class: ClassTag::BooleanAlgebra,
                what: "point addresses in the JEP chain",
            })
        } else {
            Ok(())
        }
    }

    /// `ι_n(p)` moved to level `n + 1`: `λ` prefixes `Left`.
    pub fn lambda_point(&self, p: &JepPoint) -> JepPoint {
        let mut path = vec![Side::Left];
        path.extend_from_slice(&p.path);
        JepPoint { path, base: p.base }
    }

    /// `σ` on a point of level `n`: the innermost copy moves right, the others stay, and
    /// the result lives at level `n + 1`.
    pub fn sigma_point(&self, n: usize, p: &JepPoint) -> Result<JepPoint> {
        let mut out = p.clone();
        if p.copy(n)? == 1 {
            out.path.push(Side::Right);
        }
        Ok(out)
    }

    /// `τ` on a point of level `n ≥ 2`: the two innermost copies fold into one, at level
    /// `n − 1`. On level 1 it is the identity.
    pub fn tau_point(&self, n: usize, p: &JepPoint) -> Result<JepPoint> {
        let k = p.copy(n)?;
        if n == 1 {
            return Ok(p.clone());
        }
        Ok(JepPoint::in_copy(n - 1, k.saturating_sub(1).max(1), p.base))
    }

    /// `φ(f̄)` on a point of level `n`: the `k`-th copy is acted on by `f_k`.
    pub fn phi_point(&self, fs: &EndoSequence, n: usize, p: &JepPoint) -> Result<JepPoint> {
        let k = p.copy(n)?;
        let f = fs.maps().get(k - 1).ok_or_else(|| {
            Error::Contract(format!("no endomorphism for copy {k}"))
        })?;
        let v = self.base_id(p.base)?;
        Ok(JepPoint {
            path: p.path.clone(),
            base: self.addresses[f.at(v) as usize],
        })
    }

    /// `β` on a point: every copy folds back onto `L`.
    pub fn beta_point(&self, p: &JepPoint) -> TowerAddress {
        p.base
    }
}

/// A finite prefix `(f₁, …, f_m)` of a sequence of endomorphisms of `L`.
#[derive(Clone, Debug)]
pub struct EndoSequence {
    maps: Vec<Morphism>,
}

impl EndoSequence {
    pub fn new(base: &Arc<FiniteStructure>, maps: Vec<Morphism>) -> Result<Self> {
        for (i, f) in maps.iter().enumerate() {
            if f.source() != base || f.target() != base {
                return Err(Error::Contract(format!("f{} is not an endomorphism of L", i + 1)));
            }
        }
        Ok(EndoSequence { maps })
    }

    pub fn maps(&self) -> &[Morphism] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

/// Pass/fail counts for one identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCount {
    pub identity: String,
    pub checked: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub chain_depth: usize,
    pub n_max: usize,
    pub counts: Vec<IdentityCount>,
    pub mismatches: Vec<String>,
}

impl DistortionReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.counts.iter().all(|c| c.failed == 0)
    }
}

struct Tally<'a> {
    report: &'a mut DistortionReport,
}

impl Tally<'_> {
    fn record(&mut self, identity: &str, ok: bool, detail: impl FnOnce() -> String) {
        let c = match self.report.counts.iter_mut().position(|c| c.identity == identity) {
            Some(i) => &mut self.report.counts[i],
            None => {
                self.report.counts.push(IdentityCount {
                    identity: identity.into(),
                    checked: 0,
                    failed: 0,
                });
                self.report.counts.last_mut().expect("just pushed")
            }
        };
        c.checked += 1;
        if !ok {
            c.failed += 1;
            if self.report.mismatches.len() < 20 {
                self.report.mismatches.push(format!("{identity}: {}", detail()));
            }
        }
    }
}

/// Checks `β∘ι₁ = id`, `β∘φ(f̄)∘ι₁ = f₁` and `β∘τⁿ∘φ(f̄)∘σⁿ∘ι₁ = f_{n+1}` for `n ≤ n_max`
/// pointwise on `L`, with the maps composed as morphisms and, for point classes, also
/// evaluated on [`JepPoint`] addresses.
pub fn verify_distortion(chain: &JepChain, fs: &EndoSequence, n_max: usize) -> Result<DistortionReport> {
    if chain.depth() < n_max + 1 {
        return Err(Error::BudgetExhausted {
            depth: chain.depth(),
            what: format!("n = {n_max} needs a chain of depth {}", n_max + 1),
        });
    }
    if fs.len() < n_max + 1 {
        return Err(Error::Contract(format!("n = {n_max} needs {} endomorphisms", n_max + 1)));
    }
    let mut report = DistortionReport {
        chain_depth: chain.depth(),
        n_max,
        counts: Vec::new(),
        mismatches: Vec::new(),
    };
    let mut tally = Tally { report: &mut report };
    let base = chain.base();
    let id = Morphism::identity(base.clone());
    let points = chain.base().class() != ClassTag::BooleanAlgebra;

    let b1 = chain.beta(1)?;
    tally.record("β∘ι₁ = id", b1 == id, || "β on level 1 is not the identity".into());
    for n in 1..chain.depth() {
        let along = chain.link(n)?.then(&chain.beta(n + 1)?)?;
        tally.record("β cone compatibility", along == chain.beta(n)?, || format!("level {n}"));
    }
    let phi1 = chain.phi(fs, 1)?.map.then(&b1)?;
    tally.record("β∘φ∘ι₁ = f₁", phi1 == fs.maps()[0], || "as morphisms".into());

    for n in 1..=n_max {
        let mut m = Morphism::identity(base.clone());
        for k in 1..=n {
            m = m.then(&chain.sigma(k)?.map)?;
        }
        m = m.then(&chain.phi(fs, n + 1)?.map)?;
        for k in (2..=n + 1).rev() {
            m = m.then(&chain.tau(k)?.map)?;
        }
        m = m.then(&b1)?;
        let want = &fs.maps()[n];
        let name = format!("β∘τ^{n}∘φ∘σ^{n}∘ι₁ = f{}", n + 1);
        tally.record(&name, &m == want, || format!("{:?} vs {:?}", m.map(), want.map()));

        let rs = chain.bracket(chain.rho()?, 1, 2, n.saturating_sub(1))?;
        let rss = chain.bracket(chain.rho_star(), 2, 1, n.saturating_sub(1))?;
        tally.record("[ρ*,id]_j ∘ [ρ,id]_j = id", rs.then(&rss)? == Morphism::identity(chain.level(n)?.clone()), || {
            format!("j = {}", n - 1)
        });

        if points {
            for v in base.elements() {
                let mut p = chain.point(1, v)?;
                for k in 1..=n {
                    p = chain.sigma_point(k, &p)?;
                }
                p = chain.phi_point(fs, n + 1, &p)?;
                for k in (2..=n + 1).rev() {
                    p = chain.tau_point(k, &p)?;
                }
                let got = chain.beta_point(&p);
                let want_addr = chain.addresses[want.at(v) as usize];
                tally.record(&format!("{name} on points"), got == want_addr, || {
                    format!("point {v}: {got:?} vs {want_addr:?}")
                });
            }
        }
    }

    if points {
        // The address calculus agrees with the morphisms on every point of every level.
        for n in 1..=chain.depth() {
            let lvl = chain.level(n)?.clone();
            for x in lvl.elements() {
                let p = chain.point(n, x)?;
                tally.record("address round trip", chain.id_of(n, &p)? == x, || format!("{p}"));
                if n < chain.depth() {
                    let s = chain.sigma(n)?;
                    let sp = chain.sigma_point(n, &p)?;
                    tally.record("σ pointwise", chain.id_of(n + 1, &sp)? == s.map.at(x), || format!("{p}"));
                    let lp = chain.lambda_point(&p);
                    tally.record("λ pointwise", chain.id_of(n + 1, &lp)? == chain.link(n)?.at(x), || format!("{p}"));
                }
                let t = chain.tau(n)?;
                let tp = chain.tau_point(n, &p)?;
                tally.record("τ pointwise", chain.id_of(t.to, &tp)? == t.map.at(x), || format!("{p}"));
                if fs.len() >= n {
                    let ph = chain.phi(fs, n)?;
                    let pp = chain.phi_point(fs, n, &p)?;
                    tally.record("φ pointwise", chain.id_of(n, &pp)? == ph.map.at(x), || format!("{p}"));
                }
                let b = chain.beta(n)?;
                tally.record("β pointwise", chain.beta_point(&p) == chain.addresses[b.at(x) as usize], || format!("{p}"));
            }
        }
    }
    Ok(report)
}

/// The five generators `α̃, β̃, σ̃, τ̃, φ̃`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    Alpha,
    Beta,
    Sigma,
    Tau,
    Phi,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::Alpha => "α̃",
            Generator::Beta => "β̃",
            Generator::Sigma => "σ̃",
            Generator::Tau => "τ̃",
            Generator::Phi => "φ̃",
        })
    }
}

/// A word over the generators, written in composition order: the last letter acts first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorWord {
    pub letters: Vec<Generator>,
}

impl GeneratorWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for GeneratorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.letters {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// The word for `f_n`: `β̃φ̃α̃` for `n = 1`, `β̃ τ̃^m φ̃ σ̃^m α̃` for `n = m + 1`.
pub fn encode_word(n: usize) -> Result<GeneratorWord> {
    if n == 0 {
        return Err(Error::Contract("words are indexed from n = 1".into()));
    }
    let m = n - 1;
    let mut letters = vec![Generator::Beta];
    letters.extend(std::iter::repeat(Generator::Tau).take(m));
    letters.push(Generator::Phi);
    letters.extend(std::iter::repeat(Generator::Sigma).take(m));
    letters.push(Generator::Alpha);
    Ok(GeneratorWord { letters })
}

/// `r: K(T_ℓ) = T_{ℓ+1} → T_{ℓ+1}` with `r ∘ η = id`: old points stay, and each new point
/// `New(S)` goes to the least-id vertex adjacent to all of `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Retraction {
    pub level: usize,
    pub table: Vec<TowerAddress>,
}

impl Retraction {
    /// Deepest level any image lives at.
    pub fn target_level(&self) -> usize {
        self.table.iter().map(|a| a.level).max().unwrap_or(self.level)
    }
}

pub fn graph_retraction(t: &mut TowerHandle, level: usize) -> Result<Retraction> {
    if t.class() != ClassTag::Graph {
        return Err(Error::Unsupported {
            class: t.class(),
            what: "graph retractions",
        });
    }
    t.expand_to(level + 1).map_err(|e| match e {
        Error::Capacity { .. } => Error::BudgetExhausted {
            depth: level,
            what: format!("a retraction of level {} needs level {}", level, level + 1),
        },
        other => other,
    })?;
    let kl = t.expansion(level)?.clone();
    let k = kl.object();
    let old = t.level(level)?.len() as ElemId;
    let mut table = Vec::with_capacity(k.len());
    for z in k.elements() {
        let img = if z < old {
            z
        } else {
            let s = k.neighbours(z);
            k.elements()
                .find(|&w| s.iter().all(|&v| k.related(w, v)))
                .expect("New(S) itself is adjacent to all of S")
        };
        table.push(img);
    }
    let r = Morphism::points(k.clone(), k.clone(), table.clone(), MorphismKind::Homomorphism)?;
    if kl.eta().then(&r)? != *kl.eta() {
        return Err(Error::Structural("retraction does not fix the old points".into()));
    }
    Ok(Retraction {
        level,
        table: table
            .into_iter()
            .map(|id| t.canonical(TowerAddress::new(level + 1, id)))
            .collect::<Result<_>>()?,
    })
}

/// Evaluates a word on the points of `L` at `depth` 0 or 1.
///
/// `α̃` sends `y ∈ L` to `η^depth(ι₁(y))`; `σ̃`, `τ̃`, `φ̃` act as `K^depth` of the colimit
/// maps; `β̃` is `β` at depth 0 and `r ∘ K(β)` at depth 1, with `r` from
/// [`graph_retraction`]. The identification `α: K^ω(C) ≅ L` conjugates both sides of the
/// identity being checked, so points are reported in coordinates of `L`. Depth 1 is
/// offered for graphs only.
pub fn evaluate_word(
    t: &mut TowerHandle,
    chain: &JepChain,
    fs: &EndoSequence,
    word: &GeneratorWord,
    depth: usize,
) -> Result<Vec<TowerAddress>> {
    chain.require_points()?;
    if depth > 1 || (depth == 1 && chain.base().class() != ClassTag::Graph) {
        return Err(Error::Unsupported {
            class: chain.base().class(),
            what: "word evaluation at this depth",
        });
    }
    let Some((&Generator::Alpha, rest)) = word.letters.split_last() else {
        return Err(Error::Contract("words start by applying α̃".into()));
    };
    let Some((&Generator::Beta, middle)) = rest.split_first() else {
        return Err(Error::Contract("words end by applying β̃".into()));
    };
    let mut k_levels: Vec<Option<KObjectResult>> = vec![None; chain.depth() + 1];
    let mut k_of = |n: usize| -> Result<KObjectResult> {
        if k_levels[n].is_none() {
            k_levels[n] = Some(k_object(chain.level(n)?)?);
        }
        Ok(k_levels[n].clone().expect("filled"))
    };
    let lift = |m: &LevelMap, k_of: &mut dyn FnMut(usize) -> Result<KObjectResult>| -> Result<Morphism> {
        if depth == 0 {
            Ok(m.map.clone())
        } else {
            k_morphism(&m.map, &k_of(m.from)?, &k_of(m.to)?)
        }
    };
    let mut n = 1;
    let mut current: Vec<ElemId> = chain.base().elements().collect();
    for g in middle.iter().rev() {
        let step = match g {
            Generator::Sigma => chain.sigma(n)?,
            Generator::Tau => chain.tau(n)?,
            Generator::Phi => chain.phi(fs, n)?,
            other => return Err(Error::Contract(format!("{other} may only end a word"))),
        };
        let m = lift(&step, &mut k_of)?;
        current = current.into_iter().map(|x| m.at(x)).collect();
        n = step.to;
    }
    let beta = chain.beta(n)?;
    if depth == 0 {
        return Ok(current.into_iter().map(|x| chain.addresses[beta.at(x) as usize]).collect());
    }
    let trunc = chain.truncation();
    t.expand_to(trunc + 1)?;
    let kl = t.expansion(trunc)?.clone();
    let kb = k_morphism(&beta, &k_of(n)?, &kl)?;
    let r = graph_retraction(t, trunc)?;
    Ok(current.into_iter().map(|x| r.table[kb.at(x) as usize]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::all_morphisms;

    fn arc(s: FiniteStructure) -> Arc<FiniteStructure> {
        Arc::new(s)
    }

    fn graph_tower() -> TowerHandle {
        TowerHandle::new(arc(FiniteStructure::graph(0, &[]).unwrap())).unwrap()
    }

    #[test]
    fn coproduct_of_points() {
        let k1 = arc(FiniteStructure::graph(1, &[]).unwrap());
        let (pair, ls, _) = jep_retractions(&k1).unwrap();
        assert_eq!(pair.object.len(), 2);
        assert!(pair.object.pairs().is_empty());
        assert_eq!(ls.table().unwrap(), &[0, 0]);
    }

    #[test]
    fn metric_pair_is_at_distance_one() {
        let p = arc(FiniteStructure::discrete_metric(2, 1));
        let pair = jep(&p, &p).unwrap();
        assert_eq!(pair.object.dist(0, 1), Rational64::from_integer(1));
    }

    #[test]
    fn boolean_pair_of_two_element_algebras() {
        let b = arc(FiniteStructure::boolean_algebra(1));
        let (pair, _, _) = jep_retractions(&b).unwrap();
        assert_eq!(pair.object.len(), 1);
        let b2 = arc(FiniteStructure::boolean_algebra(2));
        let (pair, _, _) = jep_retractions(&b2).unwrap();
        assert_eq!(pair.object.len(), 4);
    }

    #[test]
    fn chain_sizes_over_three_vertices() {
        let mut t = graph_tower();
        let c = build_chain(&mut t, 2, 3).unwrap();
        assert_eq!(c.level_sizes(), vec![3, 6, 9]);
        assert_eq!(c.level(2).unwrap().pairs().len(), 2 * c.base().pairs().len());
    }

    #[test]
    fn sigma_moves_into_the_right_copy() {
        let mut t = graph_tower();
        let c = build_chain(&mut t, 2, 3).unwrap();
        let v = c.point(1, 1).unwrap();
        let s = c.sigma_point(1, &v).unwrap();
        assert_eq!(s.path, vec![Side::Right]);
        // σ shifts copies outward without touching the path.
        let s2 = c.sigma_point(2, &s).unwrap();
        assert_eq!(s2.path, vec![Side::Right]);
        assert_eq!(s2.copy(3).unwrap(), 3);
        let back = c.tau_point(3, &s2).unwrap();
        assert_eq!(c.tau_point(2, &back).unwrap(), v);
    }

    #[test]
    fn identities_hold_for_all_endomorphisms_of_a_small_truncation() {
        let mut t = graph_tower();
        let c = build_chain(&mut t, 2, 3).unwrap();
        let ends = all_morphisms(c.base(), c.base(), MorphismKind::Homomorphism);
        for f in &ends {
            let fs = EndoSequence::new(c.base(), vec![ends[0].clone(), f.clone(), ends[ends.len() - 1].clone()]).unwrap();
            let report = verify_distortion(&c, &fs, 2).unwrap();
            assert!(report.passed(), "{:?}", report.mismatches);
        }
    }

    #[test]
    fn word_lengths() {
        for n in 1..=6 {
            assert_eq!(encode_word(n).unwrap().len(), 2 * n + 1);
        }
        assert_eq!(encode_word(1).unwrap().to_string(), "β̃φ̃α̃");
    }

    #[test]
    fn retraction_fixes_old_points() {
        let mut t = graph_tower();
        let r = graph_retraction(&mut t, 1).unwrap();
        assert_eq!(r.table[0], TowerAddress::new(1, 0));
        // New(∅) goes to vertex 0; New({0}) needs a neighbour of 0.
        assert_eq!(r.table.len(), 3);
        assert_eq!(r.table[1].id, 0);
        assert_eq!(r.table[2].id, 2);
    }

    #[test]
    fn words_evaluate_to_the_sequence() {
        let mut t = graph_tower();
        let c = build_chain(&mut t, 2, 3).unwrap();
        let ends = all_morphisms(c.base(), c.base(), MorphismKind::Homomorphism);
        let fs = EndoSequence::new(c.base(), ends[ends.len() / 2..][..3].to_vec()).unwrap();
        for depth in 0..=1 {
            for n in 1..=2 {
                let got = evaluate_word(&mut t, &c, &fs, &encode_word(n).unwrap(), depth).unwrap();
                let f = &fs.maps()[n - 1];
                let want: Vec<TowerAddress> = c.base().elements().map(|v| c.addresses[f.at(v) as usize]).collect();
                assert_eq!(got, want, "n = {n}, depth = {depth}");
            }
        }
    }

    #[test]
    fn boolean_and_metric_chains_satisfy_the_identities() {
        let seeds = [
            (arc(FiniteStructure::boolean_algebra(1)), 1),
            (arc(FiniteStructure::discrete_metric(2, 0)), 2),
        ];
        for (seed, level) in seeds {
            let mut t = TowerHandle::new(seed).unwrap();
            let c = build_chain(&mut t, level, 3).unwrap();
            let ends = all_morphisms(c.base(), c.base(), MorphismKind::Homomorphism);
            assert!(ends.len() > 1);
            let fs = EndoSequence::new(c.base(), ends.iter().rev().take(3).cloned().collect()).unwrap();
            let report = verify_distortion(&c, &fs, 2).unwrap();
            assert!(report.passed(), "{:?}", report.mismatches);
        }
    }
}
