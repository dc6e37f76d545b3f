use std::fmt::Write;

use super::{ClassTag, FiniteStructure};
use crate::error::{Error, Result};

/// Graphviz rendering: undirected for graphs, arcs for digraphs and tournaments, the Hasse
/// diagram (covering pairs, bottom to top) for orders.
pub fn to_dot(s: &FiniteStructure, name: &str) -> Result<String> {
    let mut out = String::new();
    let class = s.class();
    let (kw, arrow) = match class {
        c if c.is_graph_like() => ("graph", "--"),
        ClassTag::Digraph | ClassTag::Tournament | ClassTag::Poset | ClassTag::LinearOrder => ("digraph", "->"),
        _ => return Err(Error::Unsupported { class, what: "DOT export" }),
    };
    writeln!(out, "{kw} \"{name}\" {{").unwrap();
    if class.is_order() {
        writeln!(out, "  rankdir=BT;").unwrap();
    }
    for x in s.elements() {
        writeln!(out, "  {x};").unwrap();
    }
    for (x, y) in s.pairs() {
        if class.is_order() {
            let covered = s
                .elements()
                .any(|z| z != x && z != y && s.related(x, z) && s.related(z, y));
            if covered {
                continue;
            }
        }
        writeln!(out, "  {x} {arrow} {y};").unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hasse_diagram_drops_transitive_pairs() {
        let c = FiniteStructure::chain(3);
        let dot = to_dot(&c, "c").unwrap();
        assert!(dot.contains("0 -> 1;"));
        assert!(!dot.contains("0 -> 2;"));
    }

    #[test]
    fn graph_edges_once() {
        let g = FiniteStructure::graph(2, &[(0, 1)]).unwrap();
        assert_eq!(to_dot(&g, "g").unwrap().matches("--").count(), 1);
    }
}
