//! Katětov functions on finite metric spaces, the pushforward `φ^f`, and the Katětov
//! functor on grid-valued metric spaces with distances at most 1.
//!
//! Everything is exact `Rational64` arithmetic. Function-level operations accept any
//! nonnegative values; the functor itself only uses values on the `1/q` grid in `[0, 1]`,
//! where there are finitely many Katětov functions.

use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::classes::{KElement, KObjectResult, Payload, DEFAULT_ELEMENT_BUDGET};
use crate::error::{Error, Result};
use crate::structures::{katetov_grid, ClassTag, ElemId, FiniteStructure, Morphism, OnePointExtension};

/// A function on a finite metric space satisfying
/// `|φ(x) - φ(y)| <= d(x, y) <= φ(x) + φ(y)` for all pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KatetovFunction {
    base: Arc<FiniteStructure>,
    values: Vec<Rational64>,
}

/// Both Katětov inequalities over all pairs, plus nonnegativity.
pub fn is_katetov(base: &FiniteStructure, values: &[Rational64]) -> bool {
    if values.len() != base.len() || values.iter().any(|v| v.is_negative()) {
        return false;
    }
    base.elements().all(|x| {
        base.elements().all(|y| {
            let d = base.dist(x, y);
            let (a, b) = (values[x as usize], values[y as usize]);
            (a - b).abs() <= d && d <= a + b
        })
    })
}

impl KatetovFunction {
    pub fn new(base: Arc<FiniteStructure>, values: Vec<Rational64>) -> Result<Self> {
        if base.grid().is_none() {
            return Err(Error::Contract("Katětov functions live on metric spaces".into()));
        }
        if !is_katetov(&base, &values) {
            return Err(Error::Contract(format!("{values:?} is not a Katětov function")));
        }
        Ok(KatetovFunction { base, values })
    }

    pub fn base(&self) -> &Arc<FiniteStructure> {
        &self.base
    }

    pub fn values(&self) -> &[Rational64] {
        &self.values
    }

    pub fn at(&self, x: ElemId) -> Rational64 {
        self.values[x as usize]
    }

    pub fn is_katetov(&self) -> bool {
        is_katetov(&self.base, &self.values)
    }

    /// The point this function is the distance function of, if any.
    pub fn zero_at(&self) -> Option<ElemId> {
        self.values.iter().position(|v| v.is_zero()).map(|x| x as ElemId)
    }
}

/// `x̂ = d(·, a)`.
pub fn hat(base: &Arc<FiniteStructure>, a: ElemId) -> Result<KatetovFunction> {
    if a as usize >= base.len() {
        return Err(Error::Structural(format!("element {a} outside the space")));
    }
    KatetovFunction::new(base.clone(), base.elements().map(|x| base.dist(x, a)).collect())
}

/// `max_x |φ(x) - ψ(x)|`, zero over the empty space.
pub fn sup_distance(phi: &KatetovFunction, psi: &KatetovFunction) -> Result<Rational64> {
    if phi.base != psi.base {
        return Err(Error::Contract("sup distance of functions on different spaces".into()));
    }
    Ok(sup_of(&phi.values, &psi.values))
}

fn sup_of(a: &[Rational64], b: &[Rational64]) -> Rational64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or_else(Rational64::zero)
}

fn check_nonexpansive(f: &Morphism) -> Result<()> {
    let (a, b) = (f.source(), f.target());
    if a.grid().is_none() || b.grid().is_none() {
        return Err(Error::Contract("push needs a map between metric spaces".into()));
    }
    for x in a.elements() {
        for y in a.elements() {
            if b.dist(f.at(x), f.at(y)) > a.dist(x, y) {
                return Err(Error::Contract(format!("the map expands the pair ({x}, {y})")));
            }
        }
    }
    Ok(())
}

fn push_values(values: &[Rational64], f: &Morphism) -> Vec<Rational64> {
    let (a, b) = (f.source(), f.target());
    b.elements()
        .map(|y| {
            a.elements()
                .map(|x| b.dist(y, f.at(x)) + values[x as usize])
                .min()
                .unwrap_or_else(Rational64::one)
        })
        .collect()
}

/// `φ^f(y) = min_x (d(y, f(x)) + φ(x))`.
///
/// Over an empty source there is nothing to minimize; the result is then the constant
/// function 1, the only choice that keeps the sphere functor total.
pub fn push(phi: &KatetovFunction, f: &Morphism) -> Result<KatetovFunction> {
    if phi.base != *f.source() {
        return Err(Error::Contract("φ is not defined on the source of f".into()));
    }
    check_nonexpansive(f)?;
    Ok(KatetovFunction {
        base: f.target().clone(),
        values: push_values(&phi.values, f),
    })
}

/// [`push`] truncated at 1, the action on the sphere.
pub fn push_sphere(phi: &KatetovFunction, f: &Morphism) -> Result<KatetovFunction> {
    let mut out = push(phi, f)?;
    for v in &mut out.values {
        *v = (*v).min(Rational64::one());
    }
    Ok(out)
}

/// Outcome of comparing `ϱ(φ^f, ψ^f)` with `ϱ(φ, ψ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushDistanceCheck {
    pub before: Rational64,
    pub after: Rational64,
    pub isometric: bool,
    /// `after <= before`, with equality when `f` is an isometric embedding.
    pub holds: bool,
}

pub fn nonexpansive_push_distance(
    phi: &KatetovFunction,
    psi: &KatetovFunction,
    f: &Morphism,
) -> Result<PushDistanceCheck> {
    let before = sup_distance(phi, psi)?;
    let after = sup_distance(&push(phi, f)?, &push(psi, f)?)?;
    let isometric = f.is_injective()
        && f.source().elements().all(|x| {
            f.source()
                .elements()
                .all(|y| f.target().dist(f.at(x), f.at(y)) == f.source().dist(x, y))
        });
    let holds = after <= before && (!isometric || after == before);
    Ok(PushDistanceCheck {
        before,
        after,
        isometric,
        holds,
    })
}

/// `K(X)`: all Katětov functions with values on the `1/q` grid in `[0, 1]`, with the sup
/// metric. Distance functions `x̂` are the old points; the rest follow in lexicographic
/// order of their values.
pub fn sphere_k_object(x: &Arc<FiniteStructure>) -> Result<KObjectResult> {
    sphere_k_object_with_budget(x, DEFAULT_ELEMENT_BUDGET)
}

/// Distance matrices are dense, so metric levels stop here whatever the element budget.
pub const MAX_METRIC_POINTS: usize = 2048;

pub(crate) fn sphere_k_object_with_budget(x: &Arc<FiniteStructure>, budget: usize) -> Result<KObjectResult> {
    let ClassTag::RationalMetric(q) = x.class() else {
        return Err(Error::Contract("sphere K needs a grid metric space".into()));
    };
    let n = x.len();
    let limit = budget.min(MAX_METRIC_POINTS).saturating_sub(n);
    let news = katetov_grid(x, q, false, limit).ok_or_else(|| {
        Error::capacity("elements of K(X)", format!("more than {}", n + limit), n + limit)
    })?;
    sphere_build(x, q, news)
}

/// The sphere `K(X)` restricted to the old points and the given Katětov functions.
pub(crate) fn sphere_build(x: &Arc<FiniteStructure>, q: u32, news: Vec<Vec<Rational64>>) -> Result<KObjectResult> {
    let n = x.len();
    let total = n + news.len();
    let mut funcs: Vec<Vec<Rational64>> = x
        .elements()
        .map(|a| x.elements().map(|b| x.dist(a, b)).collect())
        .collect();
    funcs.extend(news.iter().cloned());
    let mut d = Vec::with_capacity(total * total);
    for i in 0..total {
        for j in 0..total {
            d.push(sup_of(&funcs[i], &funcs[j]));
        }
    }
    // For an old point a and any φ, sup |â - φ| = φ(a) by the Katětov inequalities.
    let object = FiniteStructure::from_distances(q, total, d);
    debug_assert!(object.validate().is_ok(), "{:?}", object.validate());
    let mut index: Vec<KElement> = x.elements().map(KElement::Old).collect();
    index.extend(news.into_iter().map(|v| KElement::New(Payload::Katetov(v))));
    KObjectResult::assemble(x, object, index)
}

/// `K(f)` on a New payload: `min(1, φ^f)`, identified with `ŷ` when it vanishes at `y`.
pub(crate) fn map_katetov_payload(f: &Morphism, values: &[Rational64]) -> Result<KElement> {
    check_nonexpansive(f)?;
    let pushed: Vec<Rational64> = push_values(values, f)
        .into_iter()
        .map(|v| v.min(Rational64::one()))
        .collect();
    Ok(match pushed.iter().position(|v| v.is_zero()) {
        Some(y) => KElement::Old(y as ElemId),
        None => KElement::New(Payload::Katetov(pushed)),
    })
}

/// The isometric embedding `g: Y ↪ K(X)` of a one-point metric extension, with
/// `g(s) = d(·, s)` and `g(x) = x̂`.
pub fn realize_metric_extension(e: &OnePointExtension, kx: &KObjectResult) -> Result<Morphism> {
    let ext = e.extension();
    let Some(q) = ext.grid() else {
        return Err(Error::Contract("metric extension expected".into()));
    };
    let s = e
        .new_point()
        .ok_or_else(|| Error::Contract("metric extension without a new point".into()))?;
    let table = e.inclusion().table().expect("point map");
    for &a in table {
        let d = ext.dist(a, s);
        if d.is_zero() {
            return Err(Error::Contract(format!(
                "the new point is at distance 0 from {a}; a metric extension cannot duplicate a point"
            )));
        }
        if !(d * Rational64::from_integer(q as i64)).is_integer() || d > Rational64::one() {
            return Err(Error::Contract(format!("distance {d} is off the 1/{q} grid in [0, 1]")));
        }
    }
    crate::classes::resolve_extension(e, kx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::MorphismKind;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn unit_pair() -> Arc<FiniteStructure> {
        Arc::new(FiniteStructure::grid_metric(2, &[vec![0, 2], vec![2, 0]]).unwrap())
    }

    #[test]
    fn zero_function_on_a_unit_pair_is_not_katetov() {
        assert!(!is_katetov(&unit_pair(), &[r(0, 1), r(0, 1)]));
        assert!(is_katetov(&unit_pair(), &[r(1, 2), r(1, 2)]));
    }

    #[test]
    fn hats_are_isometric() {
        let x = unit_pair();
        let (a, b) = (hat(&x, 0).unwrap(), hat(&x, 1).unwrap());
        assert_eq!(a.values(), &[r(0, 1), r(1, 1)]);
        assert_eq!(sup_distance(&a, &b).unwrap(), x.dist(0, 1));
    }

    #[test]
    fn push_from_a_point() {
        let one = Arc::new(FiniteStructure::grid_metric(2, &[vec![0]]).unwrap());
        let x = unit_pair();
        let f = Morphism::points(one.clone(), x.clone(), vec![1], MorphismKind::Embedding).unwrap();
        let phi = KatetovFunction::new(one, vec![r(1, 2)]).unwrap();
        let pushed = push(&phi, &f).unwrap();
        assert_eq!(pushed.values(), &[r(3, 2), r(1, 2)]);
        assert_eq!(push_sphere(&phi, &f).unwrap().values(), &[r(1, 1), r(1, 2)]);
    }

    #[test]
    fn sphere_over_a_point_with_unit_grid() {
        let one = Arc::new(FiniteStructure::grid_metric(1, &[vec![0]]).unwrap());
        let k = sphere_k_object(&one).unwrap();
        assert_eq!(k.object().len(), 2);
        let empty = Arc::new(FiniteStructure::empty(ClassTag::RationalMetric(3)));
        assert_eq!(sphere_k_object(&empty).unwrap().object().len(), 1);
    }

    #[test]
    fn duplicate_point_extension_is_rejected() {
        let one = Arc::new(FiniteStructure::grid_metric(2, &[vec![0]]).unwrap());
        let dup = Arc::new(FiniteStructure::unchecked_metric(2, vec![vec![r(0, 1); 2]; 2]).unwrap());
        let inc = Morphism::unchecked(
            one.clone(),
            dup,
            crate::structures::MapData::Points(vec![0]),
            MorphismKind::Embedding,
        );
        let e = OnePointExtension::new(inc, crate::structures::Element::Point(1)).unwrap();
        let k = sphere_k_object(&one).unwrap();
        assert!(matches!(realize_metric_extension(&e, &k), Err(Error::Contract(_))));
    }
}
