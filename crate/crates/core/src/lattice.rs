//! Qualifier orders and effect semilattices.
//!
//! Qualifiers are the strongly connected components of the flow graph that
//! remains after the cut; a flow edge `(u, v)` requires `q(u) <= q(v)`, so the
//! order is reachability between components. Effect mode completes that
//! order to a join semilattice by closing generator down-sets under union.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{dag_closure, FlowGraph};
use crate::trace::{Edge, NodeId};

pub const BOTTOM_NAME: &str = "⊥";
pub const JOIN_SEPARATOR: &str = "∨";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("unknown element {0}")]
    UnknownElement(String),
}

/// A partial order on `0..n`, stored as its reflexive-transitive closure:
/// row `a` holds every `b` with `a <= b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    above: Vec<FixedBitSet>,
}

impl Poset {
    /// Closes `pairs` (read as `a <= b`) reflexively and transitively.
    /// Fails with the first pair of distinct mutually-related indices.
    pub fn from_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, (usize, usize)> {
        let mut rows = vec![FixedBitSet::with_capacity(n); n];
        for (i, row) in rows.iter_mut().enumerate() {
            row.insert(i);
        }
        for (a, b) in pairs {
            rows[a].insert(b);
        }
        for k in 0..n {
            let via = rows[k].clone();
            for row in rows.iter_mut() {
                if row.contains(k) {
                    row.union_with(&via);
                }
            }
        }
        for i in 0..n {
            for j in rows[i].ones().filter(|&j| j > i) {
                if rows[j].contains(i) {
                    return Err((i, j));
                }
            }
        }
        Ok(Poset { above: rows })
    }

    fn from_closure(above: Vec<FixedBitSet>) -> Self {
        Poset { above }
    }

    /// The same order with `extra` new elements related only to themselves.
    pub fn with_isolated(&self, extra: usize) -> Poset {
        let n = self.len() + extra;
        let mut above: Vec<FixedBitSet> = self
            .above
            .iter()
            .map(|row| {
                let mut row = row.clone();
                row.grow(n);
                row
            })
            .collect();
        for i in self.len()..n {
            let mut row = FixedBitSet::with_capacity(n);
            row.insert(i);
            above.push(row);
        }
        Poset { above }
    }

    pub fn len(&self) -> usize {
        self.above.len()
    }

    pub fn is_empty(&self) -> bool {
        self.above.is_empty()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.above[a].contains(b)
    }

    pub fn relation(&self, a: usize, b: usize) -> OrderRelation {
        match (self.leq(a, b), self.leq(b, a)) {
            (true, true) => OrderRelation::Equal,
            (true, false) => OrderRelation::Less,
            (false, true) => OrderRelation::Greater,
            (false, false) => OrderRelation::Incomparable,
        }
    }

    /// Covering pairs `(a, b)`: `a < b` with nothing strictly between.
    pub fn covers(&self) -> BTreeSet<(usize, usize)> {
        let n = self.len();
        let mut out = BTreeSet::new();
        for a in 0..n {
            for b in self.above[a].ones().filter(|&b| b != a) {
                let between = self.above[a]
                    .ones()
                    .any(|c| c != a && c != b && self.leq(c, b));
                if !between {
                    out.insert((a, b));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderRelation {
    Equal,
    Less,
    Greater,
    Incomparable,
}

impl fmt::Display for OrderRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderRelation::Equal => "equal",
            OrderRelation::Less => "less",
            OrderRelation::Greater => "greater",
            OrderRelation::Incomparable => "incomparable",
        })
    }
}

/// A qualifier or effect: a cluster of nodes, or a synthetic element
/// (bottom, joins, the unknown-node default) with no members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub name: String,
    pub members: BTreeSet<NodeId>,
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualifierOrder {
    elements: Vec<Element>,
    order: Poset,
    assignment: BTreeMap<NodeId, usize>,
    by_name: BTreeMap<String, usize>,
}

impl QualifierOrder {
    pub fn new(
        elements: Vec<Element>,
        order: Poset,
        assignment: BTreeMap<NodeId, usize>,
    ) -> Self {
        debug_assert_eq!(elements.len(), order.len());
        let by_name = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.name.clone(), i))
            .collect();
        QualifierOrder {
            elements,
            order,
            assignment,
            by_name,
        }
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn poset(&self) -> &Poset {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, LatticeError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| LatticeError::UnknownElement(name.to_string()))
    }

    pub fn element(&self, name: &str) -> Result<&Element, LatticeError> {
        Ok(&self.elements[self.index_of(name)?])
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.order.leq(a, b)
    }

    /// Node to element index.
    pub fn assignment(&self) -> &BTreeMap<NodeId, usize> {
        &self.assignment
    }

    pub fn element_of(&self, node: &NodeId) -> Option<&Element> {
        self.assignment.get(node).map(|&i| &self.elements[i])
    }

    /// Classifies two elements, by name, against each other.
    pub fn order_query(&self, a: &str, b: &str) -> Result<OrderRelation, LatticeError> {
        Ok(self.order.relation(self.index_of(a)?, self.index_of(b)?))
    }
}

/// Clusters the retained graph (all edges minus `cut`) into strongly
/// connected components ordered by reachability. Each element is named
/// `Q_` followed by its smallest member.
pub fn build_order(graph: &FlowGraph, cut: &BTreeSet<Edge>) -> QualifierOrder {
    let cond = graph.condense_retained(cut);
    let n = cond.components.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &cond.quotient {
        adj[a].push(b);
    }
    let closure = dag_closure(n, &adj).expect("condensation is acyclic");

    // Components are sorted by smallest member, which is also name order.
    let elements = cond
        .components
        .iter()
        .map(|members| Element {
            name: format!("Q_{}", members[0]),
            members: members.iter().cloned().collect(),
            synthetic: false,
        })
        .collect();
    QualifierOrder::new(elements, Poset::from_closure(closure), cond.component_of)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A cut edge whose flow is still implied by the order.
    CutEdgeDerivable(Edge),
    /// Both endpoints of a cut edge ended up in the same element.
    CutEdgeMerged(Edge),
    /// A negative pair whose source is still below its sink.
    NegativePairDerivable(NodeId, NodeId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CutEdgeDerivable(e) => write!(f, "cut edge {e} is still derivable"),
            Violation::CutEdgeMerged(e) => {
                write!(f, "cut edge {e} has both endpoints in one element")
            }
            Violation::NegativePairDerivable(s, t) => {
                write!(f, "negative flow {s} -> {t} is still permitted")
            }
        }
    }
}

/// Checks that the order actually forbids what the cut and the negative
/// traces say it must. Empty means consistent.
pub fn check_consistency<'a>(
    order: &QualifierOrder,
    cut: &BTreeSet<Edge>,
    negative_pairs: impl IntoIterator<Item = &'a (NodeId, NodeId)>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let lookup = |n: &NodeId| order.assignment.get(n).copied();
    for edge in cut {
        let (Some(u), Some(v)) = (lookup(&edge.src), lookup(&edge.dst)) else {
            continue;
        };
        if u == v {
            out.push(Violation::CutEdgeMerged(edge.clone()));
        } else if order.leq(u, v) {
            out.push(Violation::CutEdgeDerivable(edge.clone()));
        }
    }
    for (s, t) in negative_pairs {
        let (Some(u), Some(v)) = (lookup(s), lookup(t)) else {
            continue;
        };
        if order.leq(u, v) {
            out.push(Violation::NegativePairDerivable(s.clone(), t.clone()));
        }
    }
    out
}

/// A join semilattice over a qualifier order, with a bottom element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectSemilattice {
    order: QualifierOrder,
    join: Vec<Vec<usize>>,
    bottom: usize,
}

impl EffectSemilattice {
    pub fn order(&self) -> &QualifierOrder {
        &self.order
    }

    pub fn bottom(&self) -> &Element {
        &self.order.elements[self.bottom]
    }

    pub fn bottom_index(&self) -> usize {
        self.bottom
    }

    pub fn join_index(&self, a: usize, b: usize) -> usize {
        self.join[a][b]
    }

    /// Least upper bound of two elements, by name.
    pub fn join(&self, a: &str, b: &str) -> Result<&Element, LatticeError> {
        let (a, b) = (self.order.index_of(a)?, self.order.index_of(b)?);
        Ok(&self.order.elements[self.join[a][b]])
    }

    pub fn order_query(&self, a: &str, b: &str) -> Result<OrderRelation, LatticeError> {
        self.order.order_query(a, b)
    }
}

/// Completes an order to a join semilattice.
///
/// Every element is represented by the set of non-synthetic elements below
/// it (its down-set). The empty set becomes bottom, and the family is closed
/// under union; a union matching no existing element becomes a synthetic
/// join named after its maximal generators, e.g. `Q_x∨Q_y`.
pub fn complete_join_semilattice(order: &QualifierOrder) -> EffectSemilattice {
    let generators: Vec<usize> = (0..order.len())
        .filter(|&i| !order.elements[i].synthetic)
        .collect();
    let downset = |x: usize| -> BTreeSet<usize> {
        generators
            .iter()
            .copied()
            .filter(|&g| order.leq(g, x))
            .collect()
    };

    let mut existing: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    for x in 0..order.len() {
        existing.entry(downset(x)).or_insert(x);
    }

    let mut family: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
    let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::from([BTreeSet::new()]);
    for set in existing.keys() {
        if seen.insert(set.clone()) {
            family.push(set.clone());
        }
    }
    let mut i = 0;
    while i < family.len() {
        for j in 0..i {
            let union: BTreeSet<usize> = family[i].union(&family[j]).copied().collect();
            if seen.insert(union.clone()) {
                family.push(union);
            }
        }
        i += 1;
    }

    let mut taken: BTreeSet<String> = order.elements.iter().map(|e| e.name.clone()).collect();
    let mut named: Vec<(BTreeSet<usize>, Element)> = family
        .into_iter()
        .map(|set| {
            let element = if let Some(&x) = existing.get(&set) {
                order.elements[x].clone()
            } else if set.is_empty() {
                Element {
                    name: BOTTOM_NAME.to_string(),
                    members: BTreeSet::new(),
                    synthetic: true,
                }
            } else {
                let mut maximal: Vec<&str> = set
                    .iter()
                    .copied()
                    .filter(|&g| !set.iter().any(|&h| h != g && order.leq(g, h)))
                    .map(|g| order.elements[g].name.as_str())
                    .collect();
                maximal.sort_unstable();
                let mut name = maximal.join(JOIN_SEPARATOR);
                while !taken.insert(name.clone()) {
                    name.push('\'');
                }
                Element {
                    name,
                    members: BTreeSet::new(),
                    synthetic: true,
                }
            };
            (set, element)
        })
        .collect();

    // Bottom first, then by name.
    named.sort_by(|(a, ea), (b, eb)| {
        (!a.is_empty(), &ea.name).cmp(&(!b.is_empty(), &eb.name))
    });
    let index: BTreeMap<BTreeSet<usize>, usize> = named
        .iter()
        .enumerate()
        .map(|(i, (set, _))| (set.clone(), i))
        .collect();

    let n = named.len();
    let mut above = vec![FixedBitSet::with_capacity(n); n];
    let mut join = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in 0..n {
            if named[a].0.is_subset(&named[b].0) {
                above[a].insert(b);
            }
            let union: BTreeSet<usize> = named[a].0.union(&named[b].0).copied().collect();
            join[a][b] = index[&union];
        }
    }

    let remap: BTreeMap<usize, usize> = (0..order.len())
        .map(|x| (x, index[&downset(x)]))
        .collect();
    let assignment = order
        .assignment
        .iter()
        .map(|(node, x)| (node.clone(), remap[x]))
        .collect();
    let bottom = index[&BTreeSet::new()];
    let elements = named.into_iter().map(|(_, e)| e).collect();

    EffectSemilattice {
        order: QualifierOrder::new(elements, Poset::from_closure(above), assignment),
        join,
        bottom,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph_unchecked;
    use crate::oracle::{join_law_violations, order_law_violations};
    use crate::trace::{Corpus, Polarity, Trace};
    use proptest::prelude::*;

    fn graph_of(edges: &[(&str, &str)], extra_nodes: &[&str]) -> FlowGraph {
        let mut c = Corpus::default();
        for (a, b) in edges {
            c.required_edges.insert(Edge::from_names(a, b));
        }
        for n in extra_nodes {
            c.required_edges.insert(Edge::from_names(n, n));
        }
        build_graph_unchecked(&c)
    }

    fn cut(edges: &[(&str, &str)]) -> BTreeSet<Edge> {
        edges.iter().map(|(a, b)| Edge::from_names(a, b)).collect()
    }

    fn names(order: &QualifierOrder) -> Vec<&str> {
        order.elements().iter().map(|e| e.name.as_str()).collect()
    }

    fn chain_order() -> QualifierOrder {
        build_order(&graph_of(&[("a", "b"), ("b", "c")], &[]), &BTreeSet::new())
    }

    fn antichain_order() -> QualifierOrder {
        build_order(&graph_of(&[], &["x", "y"]), &BTreeSet::new())
    }

    #[test]
    fn taint_direction() {
        let g = graph_of(&[("untainted", "tainted"), ("tainted", "untainted")], &[]);
        let order = build_order(&g, &cut(&[("tainted", "untainted")]));
        assert_eq!(names(&order), ["Q_tainted", "Q_untainted"]);
        assert_eq!(order.order_query("Q_untainted", "Q_tainted"), Ok(OrderRelation::Less));
        assert_eq!(order.order_query("Q_tainted", "Q_untainted"), Ok(OrderRelation::Greater));
    }

    #[test]
    fn cycle_collapses_into_one_element() {
        let g = graph_of(&[("a", "b"), ("b", "a"), ("b", "c")], &[]);
        let order = build_order(&g, &BTreeSet::new());
        assert_eq!(names(&order), ["Q_a", "Q_c"]);
        assert_eq!(order.element("Q_a").unwrap().members.len(), 2);
        assert_eq!(order.order_query("Q_a", "Q_c"), Ok(OrderRelation::Less));
        let b = NodeId::new("b").unwrap();
        assert_eq!(order.element_of(&b).unwrap().name, "Q_a");
    }

    #[test]
    fn no_edges_gives_discrete_order() {
        let order = antichain_order();
        assert_eq!(order.order_query("Q_x", "Q_x"), Ok(OrderRelation::Equal));
        assert_eq!(order.order_query("Q_x", "Q_y"), Ok(OrderRelation::Incomparable));
        assert_eq!(
            order.order_query("Q_x", "Q_nope"),
            Err(LatticeError::UnknownElement("Q_nope".into()))
        );
    }

    #[test]
    fn chain_query() {
        assert_eq!(chain_order().order_query("Q_a", "Q_c"), Ok(OrderRelation::Less));
    }

    #[test]
    fn consistency_violations() {
        // path cut leaves a -> c -> b
        let g = graph_of(&[("a", "b"), ("a", "c"), ("c", "b")], &[]);
        let c = cut(&[("a", "b")]);
        let order = build_order(&g, &c);
        assert_eq!(
            check_consistency(&order, &c, &[]),
            vec![Violation::CutEdgeDerivable(Edge::from_names("a", "b"))]
        );

        // cut edge inside a retained cycle
        let g = graph_of(&[("u", "v"), ("u", "w"), ("w", "v"), ("v", "u")], &[]);
        let c = cut(&[("u", "v")]);
        let order = build_order(&g, &c);
        let pairs = [(NodeId::new("u").unwrap(), NodeId::new("v").unwrap())];
        let found = check_consistency(&order, &c, &pairs);
        assert!(found.contains(&Violation::CutEdgeMerged(Edge::from_names("u", "v"))));
        assert!(found.contains(&Violation::NegativePairDerivable(pairs[0].0.clone(), pairs[0].1.clone())));
    }

    #[test]
    fn chain_completion_adds_only_bottom() {
        let lat = complete_join_semilattice(&chain_order());
        assert_eq!(names(lat.order()), [BOTTOM_NAME, "Q_a", "Q_b", "Q_c"]);
        assert_eq!(lat.join("Q_a", "Q_c").unwrap().name, "Q_c");
    }

    #[test]
    fn antichain_completion() {
        let lat = complete_join_semilattice(&antichain_order());
        assert_eq!(names(lat.order()), [BOTTOM_NAME, "Q_x", "Q_x∨Q_y", "Q_y"]);
        assert_eq!(lat.join("Q_x", "Q_y").unwrap().name, "Q_x∨Q_y");
        assert!(lat.join("Q_x", "Q_y").unwrap().synthetic);
        assert_eq!(lat.join("Q_x", "Q_x").unwrap().name, "Q_x");
        assert_eq!(lat.join("Q_x", BOTTOM_NAME).unwrap().name, "Q_x");
        assert_eq!(lat.bottom().name, BOTTOM_NAME);
    }

    #[test]
    fn diamond_top_versus_synthetic_join() {
        // a <= l, a <= r, l <= t, r <= t: down(l) ∪ down(r) = {a,l,r} ≠ down(t)
        let g = graph_of(&[("a", "l"), ("a", "r"), ("l", "t"), ("r", "t")], &[]);
        let lat = complete_join_semilattice(&build_order(&g, &BTreeSet::new()));
        let j = lat.join("Q_l", "Q_r").unwrap();
        assert_eq!(j.name, "Q_l∨Q_r");
        assert!(j.synthetic);
        assert_eq!(lat.order_query("Q_l∨Q_r", "Q_t"), Ok(OrderRelation::Less));

        // a generator top is in its own down-set, so it is never the union
        let g = graph_of(&[("l", "t"), ("r", "t")], &[]);
        let lat = complete_join_semilattice(&build_order(&g, &BTreeSet::new()));
        assert_eq!(lat.join("Q_l", "Q_r").unwrap().name, "Q_l∨Q_r");
    }

    #[test]
    fn existing_top_is_reused_when_it_is_the_union() {
        // down(b) = {a, b, c} already contains down(a)
        let g = graph_of(&[("a", "b"), ("c", "b")], &[]);
        let order = build_order(&g, &BTreeSet::new());
        let lat = complete_join_semilattice(&order);
        assert_eq!(lat.join("Q_b", "Q_a").unwrap().name, "Q_b");
        assert_eq!(lat.join("Q_a", "Q_c").unwrap().name, "Q_a∨Q_c");
    }

    #[test]
    fn poset_rejects_cycles_and_reports_covers() {
        assert_eq!(Poset::from_pairs(2, [(0, 1), (1, 0)]), Err((0, 1)));
        let p = Poset::from_pairs(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(p.covers(), BTreeSet::from([(0, 1), (1, 2)]));
        assert!(p.leq(0, 2) && !p.leq(2, 0));
    }

    fn arb_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<bool>)> {
        (2usize..=6).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec((0..n, 0..n), 0..10),
                proptest::collection::vec(any::<bool>(), 10),
            )
        })
    }

    fn realize(n: usize, edges: &[(usize, usize)], drop: &[bool], prefix: &str) -> (FlowGraph, BTreeSet<Edge>) {
        let name = |i: usize| format!("{prefix}{i}");
        let mut c = Corpus::default();
        for i in 0..n {
            c.required_edges.insert(Edge::from_names(&name(i), &name(i)));
        }
        let mut removed = BTreeSet::new();
        for (k, &(a, b)) in edges.iter().enumerate() {
            let e = Edge::from_names(&name(a), &name(b));
            c.required_edges.insert(e.clone());
            if drop[k] {
                removed.insert(e);
            }
        }
        (build_graph_unchecked(&c), removed)
    }

    proptest! {
        #[test]
        fn built_orders_satisfy_laws_and_soundness((n, edges, drop) in arb_graph()) {
            let (g, removed) = realize(n, &edges, &drop, "v");
            let order = build_order(&g, &removed);
            prop_assert!(order_law_violations(order.len(), |a, b| order.leq(a, b)).is_empty());
            for fe in g.edges().filter(|e| !removed.contains(&e.edge)) {
                let u = order.assignment()[&fe.edge.src];
                let v = order.assignment()[&fe.edge.dst];
                prop_assert!(order.leq(u, v));
            }
        }

        #[test]
        fn completion_satisfies_join_laws((n, edges, drop) in arb_graph()) {
            let (g, removed) = realize(n, &edges, &drop, "v");
            let order = build_order(&g, &removed);
            let lat = complete_join_semilattice(&order);
            let o = lat.order();
            prop_assert!(order_law_violations(o.len(), |a, b| o.leq(a, b)).is_empty());
            prop_assert!(join_law_violations(
                o.len(),
                |a, b| o.leq(a, b),
                |a, b| lat.join_index(a, b),
                lat.bottom_index()
            ).is_empty());
            // order-faithful embedding of the original elements
            for a in order.elements() {
                for b in order.elements() {
                    prop_assert_eq!(
                        order.order_query(&a.name, &b.name).unwrap(),
                        lat.order_query(&a.name, &b.name).unwrap()
                    );
                }
            }
            // every element is a union of generator down-sets: its name lists
            // generators whose join is the element itself
            for (i, e) in o.elements().iter().enumerate() {
                if i == lat.bottom_index() {
                    continue;
                }
                let parts: Vec<usize> = e
                    .name
                    .split(JOIN_SEPARATOR)
                    .map(|p| o.index_of(p).unwrap())
                    .collect();
                let joined = parts.iter().fold(lat.bottom_index(), |acc, &p| lat.join_index(acc, p));
                prop_assert_eq!(joined, i);
            }
        }

        #[test]
        fn rename_invariance((n, edges, drop) in arb_graph()) {
            // v<i> -> w<n-1-i> reverses text order, so element names and
            // representatives change but the transported order must not.
            let (g1, r1) = realize(n, &edges, &drop, "v");
            let mirrored: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (n - 1 - a, n - 1 - b)).collect();
            let (g2, r2) = realize(n, &mirrored, &drop, "w");
            let o1 = build_order(&g1, &r1);
            let o2 = build_order(&g2, &r2);
            prop_assert_eq!(o1.len(), o2.len());
            for i in 0..n {
                for j in 0..n {
                    let (a1, b1) = (o1.assignment()[&NodeId::new(format!("v{i}")).unwrap()], o1.assignment()[&NodeId::new(format!("v{j}")).unwrap()]);
                    let (a2, b2) = (o2.assignment()[&NodeId::new(format!("w{}", n - 1 - i)).unwrap()], o2.assignment()[&NodeId::new(format!("w{}", n - 1 - j)).unwrap()]);
                    prop_assert_eq!(o1.leq(a1, b1), o2.leq(a2, b2));
                }
            }
        }
    }

    #[test]
    fn positive_traces_type_check_after_synthesis() {
        let c = Corpus::new(
            Default::default(),
            vec![
                Trace::from_names("p", Polarity::Positive, &["a", "b", "c"]),
                Trace::from_names("n", Polarity::Negative, &["c", "d", "a"]),
            ],
        );
        let g = build_graph_unchecked(&c);
        let order = build_order(&g, &cut(&[("c", "d")]));
        for w in c.traces[0].nodes.windows(2) {
            let (u, v) = (order.assignment()[&w[0]], order.assignment()[&w[1]]);
            assert!(order.leq(u, v));
        }
    }
}
