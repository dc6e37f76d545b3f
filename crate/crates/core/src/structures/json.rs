use std::collections::HashMap;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{ClassTag, ElemId, FiniteStructure};
use crate::error::{Error, Result};

/// Interchange form of a structure: `{class, params, elements, relations}`.
///
/// `elements` are arbitrary JSON labels; relations refer to them. Graph relations are
/// edges, digraph and tournament relations arcs, order relations `[x, y]` pairs meaning
/// `x <= y` (closed reflexively and transitively on load), Boolean algebras list their
/// atoms as elements and no relations, and metric spaces give the distance matrix rows as
/// `"p/q"` strings in element order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureJson {
    pub class: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub elements: Vec<Value>,
    #[serde(default)]
    pub relations: Vec<Value>,
}

fn json_class(class: ClassTag) -> (&'static str, Map<String, Value>) {
    let mut params = Map::new();
    let name = match class {
        ClassTag::Graph => "graph",
        ClassTag::KnFreeGraph(n) => {
            params.insert("n".into(), json!(n));
            "kn-free"
        }
        ClassTag::Digraph => "digraph",
        ClassTag::LinearOrder => "linear-order",
        ClassTag::Poset => "poset",
        ClassTag::Tournament => "tournament",
        ClassTag::BooleanAlgebra => "boolean",
        ClassTag::RationalMetric(q) => {
            params.insert("q".into(), json!(q));
            "metric"
        }
    };
    (name, params)
}

fn param(params: &Map<String, Value>, key: &str) -> Result<u32> {
    params
        .get(key)
        .and_then(Value::as_u64)
        .map(|v| v as u32)
        .ok_or_else(|| Error::Format(format!("missing integer parameter {key:?}")))
}

impl StructureJson {
    pub fn from_structure(s: &FiniteStructure) -> Self {
        let (name, params) = json_class(s.class());
        let elements = s.elements().map(|x| json!(x)).collect();
        let relations = match s.class() {
            ClassTag::BooleanAlgebra => Vec::new(),
            ClassTag::RationalMetric(_) => s
                .elements()
                .map(|x| Value::Array(s.elements().map(|y| json!(s.dist(x, y).to_string())).collect()))
                .collect(),
            _ => s.pairs().into_iter().map(|(x, y)| json!([x, y])).collect(),
        };
        StructureJson {
            class: name.into(),
            params,
            elements,
            relations,
        }
    }

    pub fn class_tag(&self) -> Result<ClassTag> {
        Ok(match self.class.as_str() {
            "kn-free" => {
                let n = param(&self.params, "n")?;
                if n < 3 {
                    return Err(Error::Contract(format!("K{n}-free needs n >= 3")));
                }
                ClassTag::KnFreeGraph(n)
            }
            "metric" => {
                let q = param(&self.params, "q")?;
                if q == 0 {
                    return Err(Error::Contract("metric denominator must be positive".into()));
                }
                ClassTag::RationalMetric(q)
            }
            other => other.parse()?,
        })
    }

    /// Builds and validates the structure.
    pub fn to_structure(&self) -> Result<FiniteStructure> {
        let class = self.class_tag()?;
        let n = self.elements.len();
        let mut index: HashMap<String, ElemId> = HashMap::new();
        for (i, e) in self.elements.iter().enumerate() {
            if index.insert(e.to_string(), i as ElemId).is_some() {
                return Err(Error::Format(format!("duplicate element {e}")));
            }
        }
        let lookup = |v: &Value| {
            index
                .get(&v.to_string())
                .copied()
                .ok_or_else(|| Error::Format(format!("unknown element {v}")))
        };
        match class {
            ClassTag::BooleanAlgebra => {
                if !self.relations.is_empty() {
                    return Err(Error::Format("Boolean algebras take no relations".into()));
                }
                let s = FiniteStructure::boolean_algebra(n);
                s.validate().map_err(Error::InvalidStructure)?;
                Ok(s)
            }
            ClassTag::RationalMetric(q) => {
                if self.relations.len() != n {
                    return Err(Error::Format("distance matrix needs one row per element".into()));
                }
                let rows = self
                    .relations
                    .iter()
                    .map(|row| {
                        let row = row
                            .as_array()
                            .ok_or_else(|| Error::Format("distance row is not an array".into()))?;
                        row.iter().map(parse_rational).collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                FiniteStructure::rational_metric(q, rows)
            }
            _ => {
                let pairs = self
                    .relations
                    .iter()
                    .map(|p| match p.as_array().map(Vec::as_slice) {
                        Some([x, y]) => Ok((lookup(x)?, lookup(y)?)),
                        _ => Err(Error::Format(format!("relation entry {p} is not a pair"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                FiniteStructure::from_pairs(class, n, &pairs)
            }
        }
    }
}

fn parse_rational(v: &Value) -> Result<Rational64> {
    match v {
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad rational {s:?}"))),
        Value::Number(k) if k.is_i64() => Ok(Rational64::from_integer(k.as_i64().unwrap())),
        other => Err(Error::Format(format!("bad rational {other}"))),
    }
}

impl FiniteStructure {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(StructureJson::from_structure(self)).expect("plain data serializes")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let j: StructureJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Format(e.to_string()))?;
        j.to_structure()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: StructureJson = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        j.to_structure()
    }
}
