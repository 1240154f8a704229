//! Recognition of the admissible graph class and its closure enumeration.
//!
//! The admissible class is the least family of graphs containing the empty
//! graph and closed under two constructions: coning off a complete graph
//! (`K_u` joined to a member whose graph is empty or disconnected) and
//! coproducts (disjoint union of k members plus k-1 extra isolated
//! vertices). [`is_in_gr_p`] decides membership by structural recursion and
//! returns a decomposition witness; [`enumerate_gr_p`] computes the closure
//! as a fixed point and serves as an independent oracle.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ComposeMode, Graph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecognitionError {
    #[error("canonical labelling supports at most {max} vertices, got {got}")]
    TooManyVertices { got: usize, max: usize },
}

/// Maximum vertex count for canonical labelling and enumeration.
pub const CANONICAL_MAX: usize = 10;
pub const ENUMERATE_MAX: usize = 8;

/// Constructive witness that a graph lies in the admissible class.
///
/// `Base` is the empty graph. `Cone(u, child)` is the join of `K_u` with the
/// child's graph; the child is never itself a `Cone` because the dominating
/// clique is removed in full. `Coproduct(children)` is the disjoint union of
/// the children's graphs plus one fewer isolated vertices than children;
/// its children are `Base` or `Cone` nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum DecompositionTree {
    Base,
    Cone {
        clique_size: usize,
        child: Box<DecompositionTree>,
    },
    Coproduct {
        children: Vec<DecompositionTree>,
    },
}

impl DecompositionTree {
    /// Rebuild a graph isomorphic to the recognised one.
    pub fn reconstruct(&self) -> Graph {
        match self {
            DecompositionTree::Base => Graph::empty(),
            DecompositionTree::Cone { clique_size, child } => Graph::compose(
                &[Graph::complete(*clique_size).unwrap(), child.reconstruct()],
                ComposeMode::Join,
            )
            .unwrap(),
            DecompositionTree::Coproduct { children } => {
                let mut parts: Vec<Graph> = children.iter().map(|c| c.reconstruct()).collect();
                for _ in 1..children.len() {
                    parts.push(Graph::edgeless(1).unwrap());
                }
                Graph::compose(&parts, ComposeMode::DisjointUnion).unwrap()
            }
        }
    }
}

/// Structured rejection: why the graph is outside the class, with the
/// vertices that witness the obstruction (in the input labelling).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub reason: RejectionReason,
    pub witness: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionReason {
    ConnectedNoDominatingVertex,
    ResidueStillConnected,
    IsolatedVertexDeficit,
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            RejectionReason::ConnectedNoDominatingVertex => "connected, no dominating vertex",
            RejectionReason::ResidueStillConnected => "residue still connected",
            RejectionReason::IsolatedVertexDeficit => {
                "isolated-vertex deficit: coproduct closure adds one isolated vertex per extra factor"
            }
        };
        write!(f, "{text}")
    }
}

/// Decide membership by deterministic recursion.
///
/// Empty graph: accept. Connected graph: remove the full dominating clique
/// (reject when there is none); accept a now-empty residue, reject a still
/// connected one, otherwise recurse. Disconnected graph with `m` nontrivial
/// components and `m0` isolated vertices: reject when `m0 < m-1`, otherwise
/// recurse into the components and pad with `m0-m+1` base factors.
pub fn is_in_gr_p(g: &Graph) -> Result<DecompositionTree, Rejection> {
    if g.vertex_count() == 0 {
        return Ok(DecompositionTree::Base);
    }
    if g.is_connected() {
        let dom = g.dominating_clique();
        if dom.is_empty() {
            return Err(Rejection {
                reason: RejectionReason::ConnectedNoDominatingVertex,
                witness: (1..=g.vertex_count() as u32).collect(),
            });
        }
        let mut keep = u64::MAX >> (64 - g.vertex_count());
        for &v in &dom {
            keep &= !(1 << (v - 1));
        }
        let (residue, map) = g.induced(keep);
        if residue.vertex_count() == 0 {
            return Ok(DecompositionTree::Cone {
                clique_size: dom.len(),
                child: Box::new(DecompositionTree::Base),
            });
        }
        if residue.is_connected() {
            return Err(Rejection {
                reason: RejectionReason::ResidueStillConnected,
                witness: map,
            });
        }
        let child = is_in_gr_p(&residue).map_err(|r| relabel_rejection(r, &map))?;
        Ok(DecompositionTree::Cone {
            clique_size: dom.len(),
            child: Box::new(child),
        })
    } else {
        let comps = g.components();
        let (m, m0) = (comps.nontrivial, comps.isolated);
        if m0 + 1 < m {
            let isolated: Vec<u32> = comps
                .parts
                .iter()
                .filter(|(c, _)| c.vertex_count() == 1)
                .map(|(_, map)| map[0])
                .collect();
            return Err(Rejection {
                reason: RejectionReason::IsolatedVertexDeficit,
                witness: isolated,
            });
        }
        let mut children = Vec::new();
        for (comp, map) in &comps.parts {
            if comp.vertex_count() < 2 {
                continue;
            }
            let child = is_in_gr_p(comp).map_err(|r| relabel_rejection(r, map))?;
            children.push(child);
        }
        for _ in 0..(m0 + 1 - m) {
            children.push(DecompositionTree::Base);
        }
        Ok(DecompositionTree::Coproduct { children })
    }
}

fn relabel_rejection(r: Rejection, map: &[u32]) -> Rejection {
    Rejection {
        reason: r.reason,
        witness: r.witness.iter().map(|&v| map[v as usize - 1]).collect(),
    }
}

/// Canonical labelling: the vertex permutation minimising the adjacency
/// bitstring, found by branch-and-bound with prefix pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    pub vertices: usize,
    /// Upper-triangle adjacency bits of the canonical labelling. Pairs are
    /// scanned in placement order (1,2), (1,3), (2,3), (1,4), ...; the pair
    /// scanned first occupies the most significant bit, so integer
    /// comparison of `bits` is lexicographic comparison of the strings.
    pub bits: u64,
}

/// Position of the pair (i,k), i < k, in the placement scan (0-based).
fn pair_pos(i: u32, k: u32) -> usize {
    ((k - 1) * (k - 2) / 2 + (i - 1)) as usize
}

fn total_pairs(n: usize) -> usize {
    n * (n.saturating_sub(1)) / 2
}

impl CanonicalForm {
    pub fn to_graph(self) -> Graph {
        let total = total_pairs(self.vertices);
        let mut edges = Vec::new();
        for k in 2..=self.vertices as u32 {
            for i in 1..k {
                let bit = total - 1 - pair_pos(i, k);
                if self.bits & (1 << bit) != 0 {
                    edges.push((i, k));
                }
            }
        }
        Graph::new(self.vertices, edges).unwrap()
    }
}

/// Canonical form plus a labelling that realises it (`perm[new-1] = old`).
pub fn canonical_form(g: &Graph) -> Result<(CanonicalForm, Vec<u32>), RecognitionError> {
    let n = g.vertex_count();
    if n > CANONICAL_MAX {
        return Err(RecognitionError::TooManyVertices {
            got: n,
            max: CANONICAL_MAX,
        });
    }
    if n == 0 {
        return Ok((
            CanonicalForm {
                vertices: 0,
                bits: 0,
            },
            Vec::new(),
        ));
    }
    // Order candidate vertices by degree so low-degree vertices are tried
    // first; the minimal string tends to start with zero bits.
    let mut order: Vec<u32> = (1..=n as u32).collect();
    order.sort_by_key(|&v| g.degree(v));

    let mut best_bits = u64::MAX;
    let mut best_perm: Vec<u32> = Vec::new();
    let mut perm: Vec<u32> = Vec::new();
    let mut used = vec![false; n + 1];

    // Placing a vertex at position k (1-based) fixes its adjacencies to the
    // already placed vertices; those string positions are final afterwards,
    // so a partial string worse than the best one can be pruned.
    fn dfs(
        g: &Graph,
        order: &[u32],
        perm: &mut Vec<u32>,
        used: &mut [bool],
        bits: u64,
        best_bits: &mut u64,
        best_perm: &mut Vec<u32>,
    ) {
        let n = g.vertex_count();
        let total = total_pairs(n);
        let k = perm.len() + 1;
        if k > n {
            if bits < *best_bits {
                *best_bits = bits;
                *best_perm = perm.clone();
            }
            return;
        }
        let base = if k >= 2 { (k - 1) * (k - 2) / 2 } else { 0 };
        let prefix_len = base + k - 1;
        let prefix_mask: u64 = if prefix_len == 0 {
            0
        } else {
            ((1u64 << prefix_len) - 1) << (total - prefix_len)
        };
        for &old in order {
            if used[old as usize] {
                continue;
            }
            let mut next_bits = bits;
            for (i0, &placed) in perm.iter().enumerate() {
                if g.has_edge(placed, old) {
                    next_bits |= 1 << (total - 1 - (base + i0));
                }
            }
            if next_bits & prefix_mask > *best_bits & prefix_mask {
                continue;
            }
            used[old as usize] = true;
            perm.push(old);
            dfs(g, order, perm, used, next_bits, best_bits, best_perm);
            perm.pop();
            used[old as usize] = false;
        }
    }
    dfs(
        g,
        &order,
        &mut perm,
        &mut used,
        0,
        &mut best_bits,
        &mut best_perm,
    );
    Ok((
        CanonicalForm {
            vertices: n,
            bits: best_bits,
        },
        best_perm,
    ))
}

/// Closure enumeration: the least fixed point of the empty graph under the
/// cone and coproduct rules, restricted to at most `n_max` vertices, stored
/// canonically and deduplicated up to isomorphism.
pub fn enumerate_gr_p(n_max: usize) -> Result<BTreeSet<CanonicalForm>, RecognitionError> {
    if n_max > ENUMERATE_MAX {
        return Err(RecognitionError::TooManyVertices {
            got: n_max,
            max: ENUMERATE_MAX,
        });
    }
    let empty = CanonicalForm {
        vertices: 0,
        bits: 0,
    };
    let mut set: BTreeSet<CanonicalForm> = BTreeSet::new();
    set.insert(empty);
    loop {
        let snapshot: Vec<CanonicalForm> = set.iter().copied().collect();
        let mut added = false;
        // Cone rule: K_u joined with a member.
        for &member in &snapshot {
            for u in 1..=(n_max - member.vertices) {
                let joined = Graph::compose(
                    &[Graph::complete(u).unwrap(), member.to_graph()],
                    ComposeMode::Join,
                )
                .unwrap();
                let (canon, _) = canonical_form(&joined)?;
                added |= set.insert(canon);
            }
        }
        // Binary coproduct rule: union of two members plus one isolated
        // vertex. Iterating the binary rule generates all finite coproducts.
        for &a in &snapshot {
            for &b in &snapshot {
                if a.vertices + b.vertices + 1 > n_max {
                    continue;
                }
                let union = Graph::compose(
                    &[a.to_graph(), b.to_graph(), Graph::edgeless(1).unwrap()],
                    ComposeMode::DisjointUnion,
                )
                .unwrap();
                let (canon, _) = canonical_form(&union)?;
                added |= set.insert(canon);
            }
        }
        if !added {
            return Ok(set);
        }
    }
}

/// All isomorphism classes of graphs on exactly `n` vertices, as canonical
/// forms. Built by extending the classes on `n-1` vertices with one new
/// vertex and every possible neighbourhood.
pub fn all_graph_classes(n: usize) -> Result<Vec<CanonicalForm>, RecognitionError> {
    if n > ENUMERATE_MAX {
        return Err(RecognitionError::TooManyVertices {
            got: n,
            max: ENUMERATE_MAX,
        });
    }
    let mut current: BTreeSet<CanonicalForm> = BTreeSet::new();
    current.insert(CanonicalForm {
        vertices: 0,
        bits: 0,
    });
    for k in 1..=n {
        let mut next = BTreeSet::new();
        for member in &current {
            let g = member.to_graph();
            for nb_mask in 0u64..(1 << (k - 1)) {
                let mut doc = g.to_document();
                doc.vertices = k;
                for i in 1..k as u32 {
                    if nb_mask & (1 << (i - 1)) != 0 {
                        doc.edges.push((i, k as u32));
                    }
                }
                let extended = Graph::from_document(&doc).unwrap();
                let (canon, _) = canonical_form(&extended)?;
                next.insert(canon);
            }
        }
        current = next;
    }
    Ok(current.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Pattern;

    fn c4() -> Graph {
        Graph::cycle(4).unwrap()
    }

    fn two_k2() -> Graph {
        Graph::new(4, [(1, 2), (3, 4)]).unwrap()
    }

    fn gamma1() -> Graph {
        Graph::new(5, [(1, 2), (3, 4)]).unwrap()
    }

    #[test]
    fn c4_is_rejected_without_dominating_vertex() {
        let rej = is_in_gr_p(&c4()).unwrap_err();
        assert_eq!(rej.reason, RejectionReason::ConnectedNoDominatingVertex);
        assert_eq!(rej.witness, vec![1, 2, 3, 4]);
    }

    #[test]
    fn two_disjoint_edges_are_rejected() {
        let rej = is_in_gr_p(&two_k2()).unwrap_err();
        assert_eq!(rej.reason, RejectionReason::IsolatedVertexDeficit);
    }

    #[test]
    fn gamma1_is_accepted() {
        // Two nontrivial components and one isolated vertex: the coproduct
        // has exactly two factors, whose union contributes the isolated one.
        let tree = is_in_gr_p(&gamma1()).unwrap();
        match &tree {
            DecompositionTree::Coproduct { children } => {
                assert_eq!(children.len(), 2);
                assert!(children
                    .iter()
                    .all(|c| matches!(c, DecompositionTree::Cone { clique_size: 2, .. })));
            }
            other => panic!("expected coproduct, got {other:?}"),
        }
    }

    #[test]
    fn small_graphs_are_accepted() {
        // Every graph with at most 3 vertices is in the class.
        for n in 0..=3usize {
            let pairs: Vec<(u32, u32)> = (1..=n as u32)
                .flat_map(|u| ((u + 1)..=n as u32).map(move |v| (u, v)))
                .collect();
            for mask in 0u32..(1 << pairs.len()) {
                let edges: Vec<(u32, u32)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &e)| e)
                    .collect();
                let g = Graph::new(n, edges).unwrap();
                assert!(is_in_gr_p(&g).is_ok(), "graph on {n} vertices rejected");
            }
        }
    }

    #[test]
    fn complete_and_edgeless_are_accepted() {
        for n in 0..=8 {
            assert!(is_in_gr_p(&Graph::complete(n).unwrap()).is_ok());
            assert!(is_in_gr_p(&Graph::edgeless(n).unwrap()).is_ok());
        }
    }

    #[test]
    fn reconstruct_matches_input_up_to_isomorphism() {
        for g in [
            gamma1(),
            Graph::complete(5).unwrap(),
            Graph::edgeless(4).unwrap(),
            Graph::new(4, [(1, 2), (1, 3), (1, 4)]).unwrap(),
            Graph::new(6, [(1, 2), (2, 3), (1, 3), (3, 4), (2, 4), (1, 4), (5, 6)]).unwrap(),
        ] {
            if let Ok(tree) = is_in_gr_p(&g) {
                let rebuilt = tree.reconstruct();
                assert_eq!(
                    canonical_form(&rebuilt).unwrap().0,
                    canonical_form(&g).unwrap().0
                );
            }
        }
    }

    #[test]
    fn cone_children_are_never_cones() {
        fn check(tree: &DecompositionTree) {
            match tree {
                DecompositionTree::Base => {}
                DecompositionTree::Cone { child, .. } => {
                    assert!(!matches!(**child, DecompositionTree::Cone { .. }));
                    check(child);
                }
                DecompositionTree::Coproduct { children } => {
                    assert!(children.len() >= 2);
                    for c in children {
                        assert!(!matches!(c, DecompositionTree::Coproduct { .. }));
                        check(c);
                    }
                }
            }
        }
        for n in 0..=8 {
            if let Ok(tree) = is_in_gr_p(&Graph::complete(n).unwrap()) {
                check(&tree);
            }
        }
        check(&is_in_gr_p(&gamma1()).unwrap());
        let wheelish = Graph::new(
            5,
            [
                (1, 2),
                (1, 3),
                (2, 3),
                (3, 4),
                (2, 4),
                (1, 4),
                (1, 5),
                (2, 5),
                (3, 5),
                (4, 5),
            ],
        )
        .unwrap();
        check(&is_in_gr_p(&wheelish).unwrap());
    }

    #[test]
    fn canonical_form_is_isomorphism_invariant() {
        let g = gamma1();
        let (canon, _) = canonical_form(&g).unwrap();
        let perm = vec![3, 5, 1, 2, 4];
        let relabelled = g.relabel(&perm);
        assert_eq!(canonical_form(&relabelled).unwrap().0, canon);
    }

    #[test]
    fn canonical_form_distinguishes_c4_and_p4() {
        let (a, _) = canonical_form(&c4()).unwrap();
        let (b, _) = canonical_form(&Graph::path(4).unwrap()).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn canonical_form_of_complete_graph_is_all_ones() {
        let (canon, _) = canonical_form(&Graph::complete(4).unwrap()).unwrap();
        assert_eq!(canon.bits, (1 << 6) - 1);
    }

    #[test]
    fn canonical_round_trip_preserves_structure() {
        for g in [c4(), gamma1(), Graph::path(5).unwrap()] {
            let (canon, perm) = canonical_form(&g).unwrap();
            assert_eq!(canon.to_graph().edge_count(), g.edge_count());
            let relabelled = g.relabel(&perm);
            assert_eq!(canonical_form(&relabelled).unwrap().0, canon);
            assert_eq!(relabelled, canon.to_graph());
        }
    }

    #[test]
    fn enumerate_tiny_closures() {
        assert_eq!(enumerate_gr_p(0).unwrap().len(), 1);
        let one = enumerate_gr_p(1).unwrap();
        assert_eq!(one.len(), 2); // empty graph and K1
        assert!(one.contains(&CanonicalForm {
            vertices: 1,
            bits: 0
        }));
    }

    #[test]
    fn enumerate_four_vertices_excludes_three_classes() {
        let closure = enumerate_gr_p(4).unwrap();
        let four: Vec<CanonicalForm> = closure
            .iter()
            .filter(|c| c.vertices == 4)
            .copied()
            .collect();
        assert_eq!(four.len(), 8);
        for g in [c4(), two_k2(), Graph::path(4).unwrap()] {
            let (canon, _) = canonical_form(&g).unwrap();
            assert!(!closure.contains(&canon));
        }
    }

    #[test]
    fn graph_class_counts_match_known_values() {
        // Numbers of graphs on n unlabelled vertices: 1, 1, 2, 4, 11, 34, 156.
        let expected = [1usize, 1, 2, 4, 11, 34, 156];
        for (n, &count) in expected.iter().enumerate() {
            assert_eq!(all_graph_classes(n).unwrap().len(), count, "n = {n}");
        }
    }

    #[test]
    fn accepted_graphs_are_pattern_free_but_not_conversely() {
        for canon in all_graph_classes(5).unwrap() {
            let g = canon.to_graph();
            if is_in_gr_p(&g).is_ok() {
                assert!(g.pattern_free(Pattern::C4).is_free());
                assert!(g.pattern_free(Pattern::P4).is_free());
            }
        }
        // Strict inclusion: two disjoint edges avoid both patterns yet are
        // rejected.
        assert!(two_k2().pattern_free(Pattern::C4).is_free());
        assert!(two_k2().pattern_free(Pattern::P4).is_free());
        assert!(is_in_gr_p(&two_k2()).is_err());
    }

    #[test]
    fn acceptance_is_isomorphism_invariant() {
        let perms: [[u32; 5]; 3] = [[2, 1, 4, 3, 5], [5, 4, 3, 2, 1], [3, 1, 5, 2, 4]];
        for g in [
            gamma1(),
            Graph::new(5, [(1, 2), (2, 3), (3, 1), (4, 5)]).unwrap(),
        ] {
            let verdict = is_in_gr_p(&g).is_ok();
            for perm in &perms {
                let relabelled = g.relabel(perm);
                assert_eq!(is_in_gr_p(&relabelled).is_ok(), verdict);
            }
        }
    }
}
