//! Finite structures for the supported classes, morphisms between them, isomorphism
//! search and brute-force enumeration of one-point extensions.
//!
//! Elements of a structure of size `n` are the ids `0..n`; their numeric order is the
//! fixed total order every enumeration in the crate derives from. Boolean algebras are
//! stored by their atoms: the carrier is the powerset of the atom set.

mod catalog;
mod dot;
mod extension;
mod iso;
mod json;
mod morphism;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

pub use catalog::{all_maps, all_morphisms, enumerate_structures};
pub use dot::to_dot;
pub use extension::{enumerate_one_point_extensions, extension_orbit_count, OnePointExtension};
pub(crate) use extension::katetov_grid;
pub use iso::{automorphisms, find_isomorphism, iso_test, ISO_SIZE_CAP};
pub use json::StructureJson;
pub use morphism::{check_morphism, Element, MapData, Morphism, MorphismKind};

/// Element id inside one structure.
pub type ElemId = u32;

/// Structures above this size are rejected by the brute-force enumerators.
pub const SIZE_CAP: usize = 9;

/// The classes of finite structures the crate knows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassTag {
    Graph,
    /// Graphs without a clique of the given size (at least 3).
    KnFreeGraph(u32),
    /// Oriented graphs: irreflexive, no 2-cycles.
    Digraph,
    LinearOrder,
    Poset,
    Tournament,
    BooleanAlgebra,
    /// Metric spaces with distances in `{0, 1/q, ..., 1}`.
    RationalMetric(u32),
}

impl ClassTag {
    /// Classes whose relation is a single binary relation stored as a matrix or ranking.
    pub fn is_relational(self) -> bool {
        !matches!(self, ClassTag::BooleanAlgebra | ClassTag::RationalMetric(_))
    }

    /// Whether the class's category contains non-injective homomorphisms that the
    /// Katětov functor acts on.
    pub fn allows_homomorphisms(self) -> bool {
        matches!(
            self,
            ClassTag::Graph | ClassTag::Poset | ClassTag::BooleanAlgebra | ClassTag::RationalMetric(_)
        )
    }

    pub fn is_graph_like(self) -> bool {
        matches!(self, ClassTag::Graph | ClassTag::KnFreeGraph(_))
    }

    pub fn is_order(self) -> bool {
        matches!(self, ClassTag::Poset | ClassTag::LinearOrder)
    }

    pub fn is_oriented(self) -> bool {
        matches!(self, ClassTag::Digraph | ClassTag::Tournament)
    }

    /// Canonical short name, the inverse of [`FromStr`].
    pub fn name(self) -> String {
        match self {
            ClassTag::Graph => "graph".into(),
            ClassTag::KnFreeGraph(n) => format!("k{n}-free"),
            ClassTag::Digraph => "digraph".into(),
            ClassTag::LinearOrder => "linear-order".into(),
            ClassTag::Poset => "poset".into(),
            ClassTag::Tournament => "tournament".into(),
            ClassTag::BooleanAlgebra => "boolean".into(),
            ClassTag::RationalMetric(q) => format!("metric-q{q}"),
        }
    }

    /// Every class with its default parameters (`K3`-free, `q = 2`).
    pub fn defaults() -> [ClassTag; 8] {
        [
            ClassTag::Graph,
            ClassTag::KnFreeGraph(3),
            ClassTag::Digraph,
            ClassTag::LinearOrder,
            ClassTag::Poset,
            ClassTag::Tournament,
            ClassTag::BooleanAlgebra,
            ClassTag::RationalMetric(2),
        ]
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ClassTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let tag = match lower.as_str() {
            "graph" => ClassTag::Graph,
            "digraph" => ClassTag::Digraph,
            "linear-order" | "linearorder" | "chain" => ClassTag::LinearOrder,
            "poset" => ClassTag::Poset,
            "tournament" => ClassTag::Tournament,
            "boolean" | "boolean-algebra" | "booleanalgebra" => ClassTag::BooleanAlgebra,
            "metric" => ClassTag::RationalMetric(2),
            "kn-free" | "henson" => ClassTag::KnFreeGraph(3),
            other => {
                if let Some(n) = other
                    .strip_prefix('k')
                    .and_then(|rest| rest.strip_suffix("-free"))
                {
                    let n: u32 = n
                        .parse()
                        .map_err(|_| Error::Format(format!("bad clique size in {s:?}")))?;
                    if n < 3 {
                        return Err(Error::Contract(format!("K{n}-free needs n >= 3")));
                    }
                    ClassTag::KnFreeGraph(n)
                } else if let Some(q) = other
                    .strip_prefix("metric-q")
                    .or_else(|| other.strip_prefix("metric:"))
                {
                    let q: u32 = q
                        .parse()
                        .map_err(|_| Error::Format(format!("bad denominator in {s:?}")))?;
                    if q == 0 {
                        return Err(Error::Contract("metric denominator must be positive".into()));
                    }
                    ClassTag::RationalMetric(q)
                } else {
                    return Err(Error::Format(format!("unknown class {s:?}")));
                }
            }
        };
        Ok(tag)
    }
}

/// The relation between an ordered pair of elements, as far as the class can see it.
///
/// Two maps agree on "type" exactly when they preserve links, which is how embeddings,
/// isomorphisms and one-point extension types are compared everywhere in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Link {
    Rel { forward: bool, backward: bool },
    Dist(Rational64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Relation {
    /// Row `x` holds every `y` with `R(x, y)`. Graphs are stored symmetric, orders reflexive.
    Binary(Vec<FixedBitSet>),
    /// Linear order by rank: `x <= y` iff `rank[x] <= rank[y]`.
    Ranked(Vec<u32>),
    Atoms,
    /// Row-major distance matrix.
    Distances(Vec<Rational64>),
}

/// A finite structure of one of the supported classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteStructure {
    class: ClassTag,
    size: usize,
    rel: Relation,
}

pub(crate) fn empty_rows(n: usize) -> Vec<FixedBitSet> {
    (0..n).map(|_| FixedBitSet::with_capacity(n)).collect()
}

impl FiniteStructure {
    /// The structure with no elements. For Boolean algebras, which need an atom, this is
    /// the two-element algebra instead (the initial object of the class).
    pub fn empty(class: ClassTag) -> Self {
        let rel = match class {
            ClassTag::LinearOrder => Relation::Ranked(Vec::new()),
            ClassTag::BooleanAlgebra => return FiniteStructure::boolean_algebra(1),
            ClassTag::RationalMetric(_) => Relation::Distances(Vec::new()),
            _ => Relation::Binary(Vec::new()),
        };
        FiniteStructure { class, size: 0, rel }
    }

    /// Binary structure from adjacency rows; linear orders are converted to ranked form.
    pub(crate) fn from_rows(class: ClassTag, rows: Vec<FixedBitSet>) -> Self {
        let size = rows.len();
        FiniteStructure {
            class,
            size,
            rel: Relation::Binary(rows),
        }
        .normalized()
    }

    /// Metric structure from a row-major distance matrix.
    pub(crate) fn from_distances(q: u32, size: usize, d: Vec<Rational64>) -> Self {
        debug_assert_eq!(d.len(), size * size);
        FiniteStructure {
            class: ClassTag::RationalMetric(q),
            size,
            rel: Relation::Distances(d),
        }
    }

    /// Builds a binary-relation structure without checking the class axioms.
    ///
    /// Order classes get their relation as given (no reflexive or transitive closure).
    /// Graph edges are symmetrised. Use [`FiniteStructure::validate`] afterwards.
    pub fn unchecked_binary(class: ClassTag, size: usize, pairs: &[(ElemId, ElemId)]) -> Result<Self> {
        if !class.is_relational() {
            return Err(Error::Contract(format!("{class} is not a binary relational class")));
        }
        let mut rows = empty_rows(size);
        for &(x, y) in pairs {
            let (xi, yi) = (x as usize, y as usize);
            if xi >= size || yi >= size {
                return Err(Error::Structural(format!("pair ({x}, {y}) outside 0..{size}")));
            }
            rows[xi].insert(yi);
            if class.is_graph_like() {
                rows[yi].insert(xi);
            }
        }
        Ok(FiniteStructure {
            class,
            size,
            rel: Relation::Binary(rows),
        })
    }

    /// Builds a metric structure without checking the metric axioms.
    pub fn unchecked_metric(q: u32, rows: Vec<Vec<Rational64>>) -> Result<Self> {
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Structural("distance matrix is not square".into()));
            }
            flat.extend(row);
        }
        Ok(FiniteStructure {
            class: ClassTag::RationalMetric(q),
            size: n,
            rel: Relation::Distances(flat),
        })
    }

    fn checked(self) -> Result<Self> {
        self.validate().map_err(Error::InvalidStructure)?;
        Ok(self.normalized())
    }

    /// Stores a valid linear order given by pairs in ranked form.
    pub(crate) fn normalized(self) -> Self {
        match (&self.rel, self.class) {
            (Relation::Binary(_), ClassTag::LinearOrder) => {
                let rank = self
                    .elements()
                    .map(|x| self.elements().filter(|&y| y != x && self.related(y, x)).count() as u32)
                    .collect();
                FiniteStructure {
                    class: self.class,
                    size: self.size,
                    rel: Relation::Ranked(rank),
                }
            }
            _ => self,
        }
    }

    /// Builds and checks a binary-relation structure; order classes are closed
    /// reflexively and transitively first.
    pub fn from_pairs(class: ClassTag, size: usize, pairs: &[(ElemId, ElemId)]) -> Result<Self> {
        let mut s = Self::unchecked_binary(class, size, pairs)?;
        if class.is_order() {
            if let Relation::Binary(rows) = &mut s.rel {
                close_order(rows);
            }
        }
        s.checked()
    }

    pub fn graph(size: usize, edges: &[(ElemId, ElemId)]) -> Result<Self> {
        Self::unchecked_binary(ClassTag::Graph, size, edges)?.checked()
    }

    pub fn kn_free_graph(clique: u32, size: usize, edges: &[(ElemId, ElemId)]) -> Result<Self> {
        if clique < 3 {
            return Err(Error::Contract(format!("K{clique}-free needs n >= 3")));
        }
        Self::unchecked_binary(ClassTag::KnFreeGraph(clique), size, edges)?.checked()
    }

    pub fn digraph(size: usize, arcs: &[(ElemId, ElemId)]) -> Result<Self> {
        Self::unchecked_binary(ClassTag::Digraph, size, arcs)?.checked()
    }

    pub fn tournament(size: usize, arcs: &[(ElemId, ElemId)]) -> Result<Self> {
        Self::unchecked_binary(ClassTag::Tournament, size, arcs)?.checked()
    }

    /// The poset generated by `le_pairs` (reflexive-transitive closure is taken).
    pub fn poset(size: usize, le_pairs: &[(ElemId, ElemId)]) -> Result<Self> {
        Self::from_pairs(ClassTag::Poset, size, le_pairs)
    }

    /// The linear order listing `bottom_to_top` in increasing order.
    pub fn linear_order(bottom_to_top: &[ElemId]) -> Result<Self> {
        let n = bottom_to_top.len();
        let mut rank = vec![u32::MAX; n];
        for (r, &x) in bottom_to_top.iter().enumerate() {
            let xi = x as usize;
            if xi >= n || rank[xi] != u32::MAX {
                return Err(Error::Structural(format!(
                    "linear order listing is not a permutation of 0..{n}"
                )));
            }
            rank[xi] = r as u32;
        }
        Ok(FiniteStructure {
            class: ClassTag::LinearOrder,
            size: n,
            rel: Relation::Ranked(rank),
        })
    }

    /// The chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        FiniteStructure {
            class: ClassTag::LinearOrder,
            size: n,
            rel: Relation::Ranked((0..n as u32).collect()),
        }
    }

    /// The Boolean algebra with `atoms` atoms.
    pub fn boolean_algebra(atoms: usize) -> Self {
        FiniteStructure {
            class: ClassTag::BooleanAlgebra,
            size: atoms,
            rel: Relation::Atoms,
        }
    }

    /// A metric space with distances on the `1/q` grid in `[0, 1]`.
    pub fn rational_metric(q: u32, rows: Vec<Vec<Rational64>>) -> Result<Self> {
        Self::unchecked_metric(q, rows)?.checked()
    }

    /// The `q`-grid metric space where `dist(i, j) = numerators[i][j] / q`.
    pub fn grid_metric(q: u32, numerators: &[Vec<u32>]) -> Result<Self> {
        let rows = numerators
            .iter()
            .map(|r| r.iter().map(|&k| Rational64::new(k as i64, q as i64)).collect())
            .collect();
        Self::rational_metric(q, rows)
    }

    /// `n` points pairwise at distance 1.
    pub fn discrete_metric(q: u32, n: usize) -> Self {
        let mut d = vec![Rational64::one(); n * n];
        for i in 0..n {
            d[i * n + i] = Rational64::zero();
        }
        FiniteStructure {
            class: ClassTag::RationalMetric(q),
            size: n,
            rel: Relation::Distances(d),
        }
    }

    pub fn class(&self) -> ClassTag {
        self.class
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn elements(&self) -> impl Iterator<Item = ElemId> {
        0..self.size as ElemId
    }

    /// `R(x, y)` for binary classes; `x <= y` for orders. Always false for Boolean algebras
    /// and metric spaces.
    pub fn related(&self, x: ElemId, y: ElemId) -> bool {
        match &self.rel {
            Relation::Binary(rows) => rows[x as usize].contains(y as usize),
            Relation::Ranked(rank) => rank[x as usize] <= rank[y as usize],
            _ => false,
        }
    }

    /// Distance for metric spaces, zero otherwise.
    pub fn dist(&self, x: ElemId, y: ElemId) -> Rational64 {
        match &self.rel {
            Relation::Distances(d) => d[x as usize * self.size + y as usize],
            _ => Rational64::zero(),
        }
    }

    pub fn link(&self, x: ElemId, y: ElemId) -> Link {
        match &self.rel {
            Relation::Distances(_) => Link::Dist(self.dist(x, y)),
            _ => Link::Rel {
                forward: self.related(x, y),
                backward: self.related(y, x),
            },
        }
    }

    /// Denominator of the distance grid (metric classes only).
    pub fn grid(&self) -> Option<u32> {
        match self.class {
            ClassTag::RationalMetric(q) => Some(q),
            _ => None,
        }
    }

    /// Rank of `x` in a linear order.
    pub fn rank(&self, x: ElemId) -> Option<u32> {
        match &self.rel {
            Relation::Ranked(r) => Some(r[x as usize]),
            _ => None,
        }
    }

    /// Elements listed bottom to top (linear orders only).
    pub fn order_listing(&self) -> Option<Vec<ElemId>> {
        let Relation::Ranked(rank) = &self.rel else {
            return None;
        };
        let mut out = vec![0; self.size];
        for (x, &r) in rank.iter().enumerate() {
            out[r as usize] = x as ElemId;
        }
        Some(out)
    }

    /// Pairs `(x, y)`, `x != y`, with `R(x, y)`. Graph edges are reported once with `x < y`.
    pub fn pairs(&self) -> Vec<(ElemId, ElemId)> {
        let mut out = Vec::new();
        for x in self.elements() {
            for y in self.elements() {
                if x == y || (self.class.is_graph_like() && y < x) {
                    continue;
                }
                if self.related(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Neighbourhood of `x` in a graph-like structure.
    pub fn neighbours(&self, x: ElemId) -> Vec<ElemId> {
        self.elements().filter(|&y| y != x && self.related(x, y)).collect()
    }

    /// Induced substructure on `ids`, renumbered `0..ids.len()` in the given order.
    ///
    /// For Boolean algebras use [`FiniteStructure::generated_subalgebra`].
    pub fn induced(&self, ids: &[ElemId]) -> Result<Self> {
        for &x in ids {
            if x as usize >= self.size {
                return Err(Error::Structural(format!("element {x} outside 0..{}", self.size)));
            }
        }
        let distinct: BTreeSet<_> = ids.iter().collect();
        if distinct.len() != ids.len() {
            return Err(Error::Structural("repeated element in substructure".into()));
        }
        let k = ids.len();
        let rel = match &self.rel {
            Relation::Binary(_) => {
                let mut rows = empty_rows(k);
                for (i, &x) in ids.iter().enumerate() {
                    for (j, &y) in ids.iter().enumerate() {
                        if self.related(x, y) {
                            rows[i].insert(j);
                        }
                    }
                }
                Relation::Binary(rows)
            }
            Relation::Ranked(rank) => {
                let mut order: Vec<usize> = (0..k).collect();
                order.sort_by_key(|&i| rank[ids[i] as usize]);
                let mut r = vec![0; k];
                for (pos, i) in order.into_iter().enumerate() {
                    r[i] = pos as u32;
                }
                Relation::Ranked(r)
            }
            Relation::Atoms => {
                return Err(Error::Contract(
                    "Boolean algebras take generated subalgebras, not induced substructures".into(),
                ))
            }
            Relation::Distances(_) => {
                let mut d = Vec::with_capacity(k * k);
                for &x in ids {
                    for &y in ids {
                        d.push(self.dist(x, y));
                    }
                }
                Relation::Distances(d)
            }
        };
        Ok(FiniteStructure {
            class: self.class,
            size: k,
            rel,
        })
    }

    /// Subalgebra generated by the given atoms: its atoms are the listed ones plus, when
    /// nonempty, the join of all the others. Returns the subalgebra and its inclusion.
    pub fn generated_subalgebra(&self, atoms: &[ElemId]) -> Result<(FiniteStructure, Vec<Vec<ElemId>>)> {
        if self.class != ClassTag::BooleanAlgebra {
            return Err(Error::Contract("generated_subalgebra needs a Boolean algebra".into()));
        }
        let chosen: BTreeSet<ElemId> = atoms.iter().copied().collect();
        if chosen.iter().any(|&a| a as usize >= self.size) {
            return Err(Error::Structural("atom outside the algebra".into()));
        }
        let mut blocks: Vec<Vec<ElemId>> = chosen.iter().map(|&a| vec![a]).collect();
        let rest: Vec<ElemId> = self.elements().filter(|a| !chosen.contains(a)).collect();
        if !rest.is_empty() {
            blocks.push(rest);
        }
        Ok((FiniteStructure::boolean_algebra(blocks.len()), blocks))
    }

    /// Checks every class axiom and reports the first failure.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        match (&self.rel, self.class) {
            (Relation::Binary(rows), class) if class.is_relational() && class != ClassTag::LinearOrder => {
                if rows.len() != self.size {
                    return Err(Violation::new("shape", "row count differs from size"));
                }
                self.validate_binary(class)
            }
            (Relation::Binary(_), ClassTag::LinearOrder) => {
                self.validate_order(true)
            }
            (Relation::Ranked(rank), ClassTag::LinearOrder) => {
                let mut seen = vec![false; self.size];
                for &r in rank {
                    if r as usize >= self.size || seen[r as usize] {
                        return Err(Violation::new("total order", "ranks are not a permutation"));
                    }
                    seen[r as usize] = true;
                }
                Ok(())
            }
            (Relation::Atoms, ClassTag::BooleanAlgebra) => {
                if self.size == 0 {
                    Err(Violation::new("atoms", "a Boolean algebra needs at least one atom"))
                } else {
                    Ok(())
                }
            }
            (Relation::Distances(d), ClassTag::RationalMetric(q)) => self.validate_metric(d, q),
            _ => Err(Violation::new("shape", format!("relation payload does not fit class {}", self.class))),
        }
    }

    fn validate_binary(&self, class: ClassTag) -> std::result::Result<(), Violation> {
        match class {
            ClassTag::Graph | ClassTag::KnFreeGraph(_) => {
                for x in self.elements() {
                    if self.related(x, x) {
                        return Err(Violation::new("irreflexive", format!("loop at {x}")));
                    }
                    for y in self.elements() {
                        if self.related(x, y) != self.related(y, x) {
                            return Err(Violation::new("symmetric", format!("edge ({x}, {y}) not symmetric")));
                        }
                    }
                }
                if let ClassTag::KnFreeGraph(n) = class {
                    if let Some(clique) = find_clique(self, n as usize) {
                        return Err(Violation::new("Kn-free", format!("clique {clique:?}")));
                    }
                }
                Ok(())
            }
            ClassTag::Digraph | ClassTag::Tournament => {
                for x in self.elements() {
                    if self.related(x, x) {
                        return Err(Violation::new("irreflexive", format!("loop at {x}")));
                    }
                    for y in self.elements() {
                        if x < y {
                            let (a, b) = (self.related(x, y), self.related(y, x));
                            if a && b {
                                return Err(Violation::new(
                                    "antisymmetric",
                                    format!("both ({x}, {y}) and ({y}, {x}) present"),
                                ));
                            }
                            if class == ClassTag::Tournament && !a && !b {
                                return Err(Violation::new(
                                    "tournament",
                                    format!("neither ({x}, {y}) nor ({y}, {x}) present"),
                                ));
                            }
                        }
                    }
                }
                Ok(())
            }
            ClassTag::Poset => self.validate_order(false),
            _ => unreachable!(),
        }
    }

    fn validate_order(&self, total: bool) -> std::result::Result<(), Violation> {
        for x in self.elements() {
            if !self.related(x, x) {
                return Err(Violation::new("reflexive", format!("{x} <= {x} missing")));
            }
            for y in self.elements() {
                if x != y && self.related(x, y) && self.related(y, x) {
                    return Err(Violation::new("antisymmetric", format!("{x} <= {y} <= {x}")));
                }
                if total && !self.related(x, y) && !self.related(y, x) {
                    return Err(Violation::new("total", format!("{x} and {y} incomparable")));
                }
            }
        }
        // Transitivity: the up-set of anything above x lies inside the up-set of x.
        if let Relation::Binary(rows) = &self.rel {
            for (x, row) in rows.iter().enumerate() {
                for y in row.ones() {
                    if let Some(z) = rows[y].difference(row).next() {
                        return Err(Violation::new("transitive", format!("{x} <= {y} <= {z} but not {x} <= {z}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_metric(&self, d: &[Rational64], q: u32) -> std::result::Result<(), Violation> {
        let n = self.size;
        if d.len() != n * n {
            return Err(Violation::new("shape", "distance matrix is not n x n"));
        }
        let qq = Rational64::from_integer(q as i64);
        for x in 0..n {
            for y in 0..n {
                let v = d[x * n + y];
                if x == y && !v.is_zero() {
                    return Err(Violation::new("identity", format!("d({x}, {x}) = {v}")));
                }
                if x != y && v.is_zero() {
                    return Err(Violation::new("identity", format!("d({x}, {y}) = 0 for distinct points")));
                }
                if v != d[y * n + x] {
                    return Err(Violation::new("symmetry", format!("d({x}, {y}) != d({y}, {x})")));
                }
                if v < Rational64::zero() || v > Rational64::one() {
                    return Err(Violation::new("range", format!("d({x}, {y}) = {v} outside [0, 1]")));
                }
                if !(v * qq).is_integer() {
                    return Err(Violation::new("grid", format!("d({x}, {y}) = {v} is not a multiple of 1/{q}")));
                }
                for z in 0..n {
                    if v > d[x * n + z] + d[z * n + y] {
                        return Err(Violation::new(
                            "triangle",
                            format!("d({x}, {y}) > d({x}, {z}) + d({z}, {y})"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Reflexive-transitive closure in place (Warshall).
fn close_order(rows: &mut [FixedBitSet]) {
    let n = rows.len();
    for (i, row) in rows.iter_mut().enumerate() {
        row.insert(i);
    }
    for k in 0..n {
        let row_k = rows[k].clone();
        for row in rows.iter_mut() {
            if row.contains(k) {
                row.union_with(&row_k);
            }
        }
    }
}

/// Finds a clique of the given size by backtracking.
pub fn find_clique(s: &FiniteStructure, size: usize) -> Option<Vec<ElemId>> {
    fn extend(s: &FiniteStructure, size: usize, cur: &mut Vec<ElemId>, cands: &[ElemId]) -> bool {
        if cur.len() == size {
            return true;
        }
        for (i, &v) in cands.iter().enumerate() {
            if cands.len() - i < size - cur.len() {
                break;
            }
            let next: Vec<ElemId> = cands[i + 1..].iter().copied().filter(|&w| s.related(v, w)).collect();
            cur.push(v);
            if extend(s, size, cur, &next) {
                return true;
            }
            cur.pop();
        }
        false
    }
    if size == 0 {
        return Some(Vec::new());
    }
    let all: Vec<ElemId> = s.elements().collect();
    let mut cur = Vec::new();
    extend(s, size, &mut cur, &all).then_some(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn graph_loop_is_rejected() {
        let g = FiniteStructure::unchecked_binary(ClassTag::Graph, 1, &[(0, 0)]).unwrap();
        let v = g.validate().unwrap_err();
        assert_eq!(v.axiom, "irreflexive");
        assert!(v.to_string().contains("irreflexive violated"));
    }

    #[test]
    fn tournament_with_both_arcs_is_rejected() {
        let t = FiniteStructure::unchecked_binary(ClassTag::Tournament, 2, &[(0, 1), (1, 0)]).unwrap();
        assert!(t.validate().is_err());
        let t = FiniteStructure::unchecked_binary(ClassTag::Tournament, 2, &[]).unwrap();
        assert_eq!(t.validate().unwrap_err().axiom, "tournament");
        assert!(FiniteStructure::tournament(2, &[(1, 0)]).is_ok());
    }

    #[test]
    fn metric_triangle_violation() {
        // q = 1 grid but distances 1, 1, 3: the range check would fire first, so use the
        // grid-free checker on a space scaled into [0, 1] with q = 3.
        let bad = FiniteStructure::unchecked_metric(
            1,
            vec![
                vec![r(0, 1), r(1, 1), r(3, 1)],
                vec![r(1, 1), r(0, 1), r(1, 1)],
                vec![r(3, 1), r(1, 1), r(0, 1)],
            ],
        )
        .unwrap();
        let v = bad.validate().unwrap_err();
        assert!(v.axiom == "triangle" || v.axiom == "range", "{v}");
        let scaled = FiniteStructure::unchecked_metric(
            3,
            vec![
                vec![r(0, 1), r(1, 3), r(1, 1)],
                vec![r(1, 3), r(0, 1), r(1, 3)],
                vec![r(1, 1), r(1, 3), r(0, 1)],
            ],
        )
        .unwrap();
        assert_eq!(scaled.validate().unwrap_err().axiom, "triangle");
    }

    #[test]
    fn kn_free_rejects_cliques() {
        let tri = [(0, 1), (1, 2), (0, 2)];
        assert!(FiniteStructure::kn_free_graph(3, 3, &tri).is_err());
        assert!(FiniteStructure::kn_free_graph(4, 3, &tri).is_ok());
    }

    #[test]
    fn poset_closure_and_antisymmetry() {
        let p = FiniteStructure::poset(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(p.related(0, 2));
        assert!(FiniteStructure::poset(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn digraph_two_cycle_rejected() {
        assert!(FiniteStructure::digraph(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn class_names_round_trip() {
        for c in ClassTag::defaults() {
            assert_eq!(c.name().parse::<ClassTag>().unwrap(), c);
        }
        assert_eq!("k5-free".parse::<ClassTag>().unwrap(), ClassTag::KnFreeGraph(5));
        assert!("k2-free".parse::<ClassTag>().is_err());
    }

    #[test]
    fn induced_linear_order_reranks() {
        let c = FiniteStructure::linear_order(&[2, 0, 1]).unwrap();
        let sub = c.induced(&[1, 2]).unwrap();
        assert!(sub.related(1, 0));
        assert!(!sub.related(0, 1));
    }

    #[test]
    fn generated_subalgebra_adds_rest_block() {
        let b = FiniteStructure::boolean_algebra(3);
        let (sub, blocks) = b.generated_subalgebra(&[1]).unwrap();
        assert_eq!(sub.len(), 2);
        assert_eq!(blocks, vec![vec![1], vec![0, 2]]);
    }
}
