use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ClassTag, ElemId, FiniteStructure};
use crate::error::{Error, Result, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphismKind {
    Homomorphism,
    Embedding,
    Isomorphism,
}

impl MorphismKind {
    /// The strongest kind both a map of kind `self` and one of kind `other` guarantee.
    pub fn meet(self, other: MorphismKind) -> MorphismKind {
        self.min(other)
    }
}

impl fmt::Display for MorphismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MorphismKind::Homomorphism => "homomorphism",
            MorphismKind::Embedding => "embedding",
            MorphismKind::Isomorphism => "isomorphism",
        })
    }
}

/// The element table of a morphism.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MapData {
    Points(Vec<ElemId>),
    /// Boolean algebras: each source atom goes to a sorted set of target atoms; the map
    /// extends to the carrier by joins.
    Atoms(Vec<Vec<ElemId>>),
}

/// A carrier element: a point, or for Boolean algebras a join of atoms (sorted, `[]` is 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Point(ElemId),
    Join(Vec<ElemId>),
}

/// A validated structure-preserving map.
#[derive(Clone, Debug)]
pub struct Morphism {
    source: Arc<FiniteStructure>,
    target: Arc<FiniteStructure>,
    map: MapData,
    kind: MorphismKind,
}

impl PartialEq for Morphism {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map
            && (Arc::ptr_eq(&self.source, &other.source) || self.source == other.source)
            && (Arc::ptr_eq(&self.target, &other.target) || self.target == other.target)
    }
}

impl Eq for Morphism {}

impl Morphism {
    /// Builds a morphism and checks it against its declared kind.
    pub fn new(
        source: Arc<FiniteStructure>,
        target: Arc<FiniteStructure>,
        map: MapData,
        kind: MorphismKind,
    ) -> Result<Self> {
        let m = Morphism::unchecked(source, target, map, kind);
        check_morphism(&m)?;
        Ok(m)
    }

    /// Builds a morphism from a point table.
    pub fn points(
        source: Arc<FiniteStructure>,
        target: Arc<FiniteStructure>,
        table: Vec<ElemId>,
        kind: MorphismKind,
    ) -> Result<Self> {
        Morphism::new(source, target, MapData::Points(table), kind)
    }

    /// A morphism whose kind has not been checked; [`check_morphism`] reports on it.
    pub fn unchecked(
        source: Arc<FiniteStructure>,
        target: Arc<FiniteStructure>,
        map: MapData,
        kind: MorphismKind,
    ) -> Self {
        let map = match map {
            MapData::Atoms(mut blocks) => {
                for b in &mut blocks {
                    b.sort_unstable();
                    b.dedup();
                }
                MapData::Atoms(blocks)
            }
            other => other,
        };
        Morphism {
            source,
            target,
            map,
            kind,
        }
    }

    pub fn identity(s: Arc<FiniteStructure>) -> Self {
        let map = if s.class() == ClassTag::BooleanAlgebra {
            MapData::Atoms(s.elements().map(|a| vec![a]).collect())
        } else {
            MapData::Points(s.elements().collect())
        };
        Morphism {
            source: s.clone(),
            target: s,
            map,
            kind: MorphismKind::Isomorphism,
        }
    }

    pub fn source(&self) -> &Arc<FiniteStructure> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteStructure> {
        &self.target
    }

    pub fn kind(&self) -> MorphismKind {
        self.kind
    }

    pub fn map(&self) -> &MapData {
        &self.map
    }

    /// Point table; `None` for Boolean algebras.
    pub fn table(&self) -> Option<&[ElemId]> {
        match &self.map {
            MapData::Points(t) => Some(t),
            MapData::Atoms(_) => None,
        }
    }

    /// Atom table; `None` for point classes.
    pub fn atom_table(&self) -> Option<&[Vec<ElemId>]> {
        match &self.map {
            MapData::Atoms(t) => Some(t),
            MapData::Points(_) => None,
        }
    }

    /// Image of a point. Panics for Boolean algebras or out-of-range ids.
    pub fn at(&self, x: ElemId) -> ElemId {
        match &self.map {
            MapData::Points(t) => t[x as usize],
            MapData::Atoms(_) => panic!("point image requested from a Boolean morphism"),
        }
    }

    /// Image of a carrier element.
    pub fn apply(&self, e: &Element) -> Result<Element> {
        match (&self.map, e) {
            (MapData::Points(t), Element::Point(x)) => t
                .get(*x as usize)
                .map(|&y| Element::Point(y))
                .ok_or_else(|| Error::Structural(format!("element {x} outside the source"))),
            (MapData::Atoms(t), Element::Join(atoms)) => {
                let mut out = Vec::new();
                for &a in atoms {
                    let block = t
                        .get(a as usize)
                        .ok_or_else(|| Error::Structural(format!("atom {a} outside the source")))?;
                    out.extend_from_slice(block);
                }
                out.sort_unstable();
                out.dedup();
                Ok(Element::Join(out))
            }
            _ => Err(Error::Contract("element shape does not match the morphism".into())),
        }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Morphism) -> Result<Morphism> {
        if !Arc::ptr_eq(&self.target, &other.source) && *self.target != *other.source {
            return Err(Error::Contract("composition of non-composable morphisms".into()));
        }
        let map = match (&self.map, &other.map) {
            (MapData::Points(f), MapData::Points(g)) => {
                MapData::Points(f.iter().map(|&y| g[y as usize]).collect())
            }
            (MapData::Atoms(f), MapData::Atoms(g)) => MapData::Atoms(
                f.iter()
                    .map(|block| {
                        let mut out: Vec<ElemId> =
                            block.iter().flat_map(|&b| g[b as usize].iter().copied()).collect();
                        out.sort_unstable();
                        out.dedup();
                        out
                    })
                    .collect(),
            ),
            _ => return Err(Error::Contract("mixed morphism shapes".into())),
        };
        Ok(Morphism {
            source: self.source.clone(),
            target: other.target.clone(),
            map,
            kind: self.kind.meet(other.kind),
        })
    }

    /// Same map, re-declared with another kind and re-checked.
    pub fn with_kind(&self, kind: MorphismKind) -> Result<Morphism> {
        Morphism::new(self.source.clone(), self.target.clone(), self.map.clone(), kind)
    }

    /// The strongest kind this map satisfies.
    pub fn strongest_kind(&self) -> Option<MorphismKind> {
        [
            MorphismKind::Isomorphism,
            MorphismKind::Embedding,
            MorphismKind::Homomorphism,
        ]
        .into_iter()
        .find(|&k| kind_violation(self, k).is_none())
    }

    /// Inverse of an isomorphism.
    pub fn inverse(&self) -> Result<Morphism> {
        if self.kind != MorphismKind::Isomorphism {
            return Err(Error::Contract("only isomorphisms have inverses".into()));
        }
        let map = match &self.map {
            MapData::Points(t) => {
                let mut inv = vec![0; t.len()];
                for (x, &y) in t.iter().enumerate() {
                    inv[y as usize] = x as ElemId;
                }
                MapData::Points(inv)
            }
            MapData::Atoms(t) => {
                let mut inv = vec![Vec::new(); t.len()];
                for (a, block) in t.iter().enumerate() {
                    inv[block[0] as usize] = vec![a as ElemId];
                }
                MapData::Atoms(inv)
            }
        };
        Ok(Morphism {
            source: self.target.clone(),
            target: self.source.clone(),
            map,
            kind: MorphismKind::Isomorphism,
        })
    }

    /// Whether the underlying map is injective on the carrier.
    pub fn is_injective(&self) -> bool {
        match &self.map {
            MapData::Points(t) => {
                let mut seen = vec![false; self.target.len()];
                t.iter().all(|&y| !std::mem::replace(&mut seen[y as usize], true))
            }
            MapData::Atoms(t) => t.iter().all(|b| !b.is_empty()),
        }
    }
}

/// Checks a morphism against its declared kind.
///
/// Ids outside the source or target are a structural error; a well-formed map that fails
/// its kind is reported as [`Error::InvalidMorphism`] with the first violated condition.
pub fn check_morphism(f: &Morphism) -> Result<()> {
    if f.source.class() != f.target.class() {
        return Err(Error::Contract(format!(
            "morphism between classes {} and {}",
            f.source.class(),
            f.target.class()
        )));
    }
    match &f.map {
        MapData::Points(t) => {
            if f.source.class() == ClassTag::BooleanAlgebra {
                return Err(Error::Structural("Boolean morphisms map atoms to atom sets".into()));
            }
            if t.len() != f.source.len() {
                return Err(Error::Structural(format!(
                    "table has {} entries for a source of size {}",
                    t.len(),
                    f.source.len()
                )));
            }
            if let Some(&y) = t.iter().find(|&&y| y as usize >= f.target.len()) {
                return Err(Error::Structural(format!("image {y} outside the target")));
            }
        }
        MapData::Atoms(t) => {
            if f.source.class() != ClassTag::BooleanAlgebra {
                return Err(Error::Structural("atom tables are for Boolean algebras only".into()));
            }
            if t.len() != f.source.len() {
                return Err(Error::Structural("atom table does not cover the source atoms".into()));
            }
            if t.iter().flatten().any(|&y| y as usize >= f.target.len()) {
                return Err(Error::Structural("atom image outside the target".into()));
            }
        }
    }
    match kind_violation(f, f.kind) {
        None => Ok(()),
        Some(v) => Err(Error::InvalidMorphism(v)),
    }
}

fn kind_violation(f: &Morphism, kind: MorphismKind) -> Option<Violation> {
    match &f.map {
        MapData::Points(t) => point_violation(&f.source, &f.target, t, kind),
        MapData::Atoms(t) => atom_violation(f.target.len(), t, kind),
    }
}

fn point_violation(
    a: &FiniteStructure,
    b: &FiniteStructure,
    t: &[ElemId],
    kind: MorphismKind,
) -> Option<Violation> {
    let strict = kind != MorphismKind::Homomorphism;
    for x in a.elements() {
        for y in a.elements() {
            let (fx, fy) = (t[x as usize], t[y as usize]);
            if strict && x != y && fx == fy {
                return Some(Violation::new("injective", format!("{x} and {y} both map to {fx}")));
            }
            if a.class().is_relational() {
                let (r, s) = (a.related(x, y), b.related(fx, fy));
                if r && !s {
                    return Some(Violation::new(
                        "preserves relations",
                        format!("({x}, {y}) related but ({fx}, {fy}) is not"),
                    ));
                }
                if strict && s && !r {
                    return Some(Violation::new(
                        "reflects relations",
                        format!("({fx}, {fy}) related but ({x}, {y}) is not"),
                    ));
                }
            } else {
                let (d, e) = (a.dist(x, y), b.dist(fx, fy));
                if e > d {
                    return Some(Violation::new(
                        "nonexpansive",
                        format!("d({x}, {y}) = {d} but d({fx}, {fy}) = {e}"),
                    ));
                }
                if strict && e != d {
                    return Some(Violation::new(
                        "isometric",
                        format!("d({x}, {y}) = {d} but d({fx}, {fy}) = {e}"),
                    ));
                }
            }
        }
    }
    if kind == MorphismKind::Isomorphism && a.len() != b.len() {
        return Some(Violation::new("surjective", "source and target differ in size"));
    }
    None
}

fn atom_violation(target_atoms: usize, t: &[Vec<ElemId>], kind: MorphismKind) -> Option<Violation> {
    let mut owner = vec![None; target_atoms];
    for (a, block) in t.iter().enumerate() {
        for &b in block {
            if let Some(prev) = owner[b as usize].replace(a) {
                return Some(Violation::new(
                    "preserves meets",
                    format!("atoms {prev} and {a} overlap in target atom {b}"),
                ));
            }
        }
        if kind != MorphismKind::Homomorphism && block.is_empty() {
            return Some(Violation::new("injective", format!("atom {a} maps to 0")));
        }
        if kind == MorphismKind::Isomorphism && block.len() != 1 {
            return Some(Violation::new("surjective", format!("atom {a} does not map to an atom")));
        }
    }
    if let Some(b) = owner.iter().position(Option::is_none) {
        return Some(Violation::new("preserves 1", format!("target atom {b} is not covered")));
    }
    None
}
