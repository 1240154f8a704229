//! Finite simple undirected graphs with 1-based vertex labels.
//!
//! Graphs here are small (at most [`MAX_VERTICES`] vertices), so adjacency is
//! kept as one bitmask per vertex and every query is a few word operations.
//! Vertices are labelled `1..=d` to match the generator names `x_1..x_d`;
//! label `0` is reserved for the order-2 generator and never appears in a
//! graph.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on vertex count. Adjacency masks are single `u64` words.
pub const MAX_VERTICES: usize = 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph document is not valid JSON: {0}")]
    Json(String),
    #[error("vertex count {0} exceeds the supported maximum {MAX_VERTICES}")]
    TooManyVertices(usize),
    #[error("edge #{index} ({u},{v}): endpoint out of range 1..={vertices}")]
    EndpointOutOfRange {
        index: usize,
        u: u32,
        v: u32,
        vertices: usize,
    },
    #[error("edge #{index} ({u},{u}): self-loops are not allowed")]
    SelfLoop { index: usize, u: u32 },
}

/// JSON wire form of a graph: `{"vertices": n, "edges": [[i,j],...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: usize,
    pub edges: Vec<(u32, u32)>,
}

/// A finite simple undirected graph on vertices `1..=vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    vertex_count: usize,
    /// Normalised edges `(u,v)` with `u < v`, deduplicated, sorted.
    edges: BTreeSet<(u32, u32)>,
    /// `adj[i]` has bit `j-1` set iff `{i+1, j}` is an edge.
    adj: Vec<u64>,
}

impl Graph {
    pub fn new(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, GraphError> {
        if vertex_count > MAX_VERTICES {
            return Err(GraphError::TooManyVertices(vertex_count));
        }
        let mut set = BTreeSet::new();
        let mut adj = vec![0u64; vertex_count];
        for (index, (u, v)) in edges.into_iter().enumerate() {
            if u == v {
                return Err(GraphError::SelfLoop { index, u });
            }
            if u < 1 || v < 1 || u as usize > vertex_count || v as usize > vertex_count {
                return Err(GraphError::EndpointOutOfRange {
                    index,
                    u,
                    v,
                    vertices: vertex_count,
                });
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            set.insert((a, b));
            adj[a as usize - 1] |= 1 << (b - 1);
            adj[b as usize - 1] |= 1 << (a - 1);
        }
        Ok(Graph {
            vertex_count,
            edges: set,
            adj,
        })
    }

    /// The empty graph (no vertices).
    pub fn empty() -> Self {
        Graph::new(0, []).unwrap()
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for u in 1..=n as u32 {
            for v in (u + 1)..=n as u32 {
                edges.push((u, v));
            }
        }
        Graph::new(n, edges)
    }

    /// Edgeless graph on `n` vertices.
    pub fn edgeless(n: usize) -> Result<Self, GraphError> {
        Graph::new(n, [])
    }

    /// Cycle on `n >= 3` vertices: `1-2-...-n-1`.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        let mut edges: Vec<(u32, u32)> = (1..n as u32).map(|u| (u, u + 1)).collect();
        edges.push((n as u32, 1));
        Graph::new(n, edges)
    }

    /// Path on `n` vertices: `1-2-...-n`.
    pub fn path(n: usize) -> Result<Self, GraphError> {
        Graph::new(n, (1..n as u32).map(|u| (u, u + 1)))
    }

    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        Self::from_document(&doc)
    }

    pub fn from_document(doc: &GraphDocument) -> Result<Self, GraphError> {
        Graph::new(doc.vertices, doc.edges.iter().copied())
    }

    /// Canonical wire form: edges sorted lexicographically, each listed once.
    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            vertices: self.vertex_count,
            edges: self.edges.iter().copied().collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        u != v && self.adj[u as usize - 1] & (1 << (v - 1)) != 0
    }

    /// Neighbourhood of `v` as a bitmask (bit `i-1` for vertex `i`).
    pub fn neighbors(&self, v: u32) -> u64 {
        self.adj[v as usize - 1]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize - 1].count_ones() as usize
    }

    /// Induced subgraph on the vertices of `mask`, relabelled `1..=k` in
    /// increasing order of the original labels. Returns the subgraph and the
    /// map `new label -> old label`.
    pub fn induced(&self, mask: u64) -> (Graph, Vec<u32>) {
        let verts: Vec<u32> = (1..=self.vertex_count as u32)
            .filter(|v| mask & (1 << (v - 1)) != 0)
            .collect();
        let mut edges = Vec::new();
        for (i, &u) in verts.iter().enumerate() {
            for (j, &v) in verts.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    edges.push((i as u32 + 1, j as u32 + 1));
                }
            }
        }
        (Graph::new(verts.len(), edges).unwrap(), verts)
    }

    /// Relabel vertices by `perm`, where `perm[new-1] = old`.
    pub fn relabel(&self, perm: &[u32]) -> Graph {
        assert_eq!(perm.len(), self.vertex_count);
        let mut inv = vec![0u32; self.vertex_count + 1];
        for (new0, &old) in perm.iter().enumerate() {
            inv[old as usize] = new0 as u32 + 1;
        }
        let edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .map(|&(u, v)| (inv[u as usize], inv[v as usize]))
            .collect();
        Graph::new(self.vertex_count, edges).unwrap()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count <= 1 {
            return true;
        }
        let mut seen = 1u64;
        let mut frontier = 1u64;
        while frontier != 0 {
            let mut next = 0u64;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.adj[v];
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen.count_ones() as usize == self.vertex_count
    }

    /// All vertices adjacent to every other vertex. Such a set always induces
    /// a complete subgraph.
    pub fn dominating_clique(&self) -> Vec<u32> {
        let all = if self.vertex_count == 0 {
            0
        } else {
            u64::MAX >> (64 - self.vertex_count)
        };
        (1..=self.vertex_count as u32)
            .filter(|&v| self.adj[v as usize - 1] == all & !(1 << (v - 1)))
            .collect()
    }

    /// Connected components with their vertex maps, plus the counts `m`
    /// (components with at least two vertices) and `m0` (isolated vertices).
    pub fn components(&self) -> Components {
        let mut seen = 0u64;
        let mut parts = Vec::new();
        let mut m = 0;
        let mut m0 = 0;
        for v in 0..self.vertex_count {
            if seen & (1 << v) != 0 {
                continue;
            }
            let mut comp = 1u64 << v;
            let mut frontier = comp;
            while frontier != 0 {
                let mut next = 0u64;
                let mut f = frontier;
                while f != 0 {
                    let u = f.trailing_zeros() as usize;
                    f &= f - 1;
                    next |= self.adj[u];
                }
                frontier = next & !comp;
                comp |= next;
            }
            seen |= comp;
            if comp.count_ones() >= 2 {
                m += 1;
            } else {
                m0 += 1;
            }
            let (sub, map) = self.induced(comp);
            parts.push((sub, map));
        }
        Components {
            parts,
            nontrivial: m,
            isolated: m0,
        }
    }

    /// Number of complete subgraphs for each size, including the empty one:
    /// `c_0 = 1`, `c_1 = d`, `c_2 = r`. All complete subgraphs are counted,
    /// not only maximal ones.
    pub fn clique_polynomial(&self) -> CliquePolynomial {
        let mut counts = vec![1u64];
        // Extend cliques over ordered vertex sets: candidates are neighbours
        // of the last chosen vertex with a larger label.
        fn extend(g: &Graph, size: usize, candidates: u64, counts: &mut Vec<u64>) {
            if size > 0 {
                if counts.len() <= size {
                    counts.push(0);
                }
                counts[size] += 1;
            }
            let mut c = candidates;
            while c != 0 {
                let v = c.trailing_zeros() as usize;
                c &= c - 1;
                let higher = !((1u64 << (v + 1)) - 1);
                extend(g, size + 1, candidates & g.adj[v] & higher, counts);
            }
        }
        let all = if self.vertex_count == 0 {
            0
        } else {
            u64::MAX >> (64 - self.vertex_count)
        };
        let mut c = all;
        while c != 0 {
            let v = c.trailing_zeros() as usize;
            c &= c - 1;
            let higher = !((1u64 << (v + 1)) - 1);
            extend(self, 1, all & self.adj[v] & higher, &mut counts);
        }
        if self.vertex_count > 0 && counts.len() == 1 {
            counts.push(self.vertex_count as u64);
        }
        CliquePolynomial {
            coefficients: counts,
        }
    }

    /// Disjoint union or join of a list of graphs, relabelled consecutively.
    pub fn compose(parts: &[Graph], mode: ComposeMode) -> Result<Graph, GraphError> {
        let total: usize = parts.iter().map(|p| p.vertex_count).sum();
        let mut edges = Vec::new();
        let mut offset = 0u32;
        let mut offsets = Vec::new();
        for part in parts {
            offsets.push(offset);
            for (u, v) in part.edges() {
                edges.push((u + offset, v + offset));
            }
            offset += part.vertex_count as u32;
        }
        if mode == ComposeMode::Join {
            for (i, a) in parts.iter().enumerate() {
                for (j, b) in parts.iter().enumerate().skip(i + 1) {
                    for u in 1..=a.vertex_count as u32 {
                        for v in 1..=b.vertex_count as u32 {
                            edges.push((u + offsets[i], v + offsets[j]));
                        }
                    }
                }
            }
        }
        Graph::new(total, edges)
    }

    /// Does any induced 4-vertex subgraph realise `pattern`? Returns the four
    /// witness vertices on failure, in increasing label order.
    pub fn pattern_free(&self, pattern: Pattern) -> PatternCheck {
        let n = self.vertex_count as u32;
        let target = pattern.edge_sets();
        for a in 1..=n {
            for b in (a + 1)..=n {
                for c in (b + 1)..=n {
                    for d in (c + 1)..=n {
                        let quad = [a, b, c, d];
                        let mut code = 0u8;
                        for (idx, (i, j)) in PAIR_INDICES.iter().enumerate() {
                            if self.has_edge(quad[*i], quad[*j]) {
                                code |= 1 << idx;
                            }
                        }
                        if target.contains(&code) {
                            return PatternCheck::Found(quad);
                        }
                    }
                }
            }
        }
        PatternCheck::Free
    }
}

/// Pairs of positions within a 4-element vertex tuple, fixing the bit layout
/// of induced-subgraph codes.
const PAIR_INDICES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComposeMode {
    Join,
    DisjointUnion,
}

/// Four-vertex obstruction patterns: the 4-cycle and the 4-vertex path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    C4,
    P4,
}

impl Pattern {
    /// All 6-bit adjacency codes of labelled 4-vertex graphs isomorphic to
    /// the pattern, in the [`PAIR_INDICES`] bit layout.
    fn edge_sets(self) -> &'static [u8] {
        // Computed once per pattern by running all 24 permutations of a
        // reference labelling.
        use std::sync::OnceLock;
        static C4_CODES: OnceLock<Vec<u8>> = OnceLock::new();
        static P4_CODES: OnceLock<Vec<u8>> = OnceLock::new();
        let (cell, reference): (&OnceLock<Vec<u8>>, &[(usize, usize)]) = match self {
            Pattern::C4 => (&C4_CODES, &[(0, 1), (1, 2), (2, 3), (0, 3)]),
            Pattern::P4 => (&P4_CODES, &[(0, 1), (1, 2), (2, 3)]),
        };
        cell.get_or_init(|| {
            let mut codes = BTreeSet::new();
            let mut perm = [0usize, 1, 2, 3];
            permute(&mut perm, 0, &mut |p| {
                let mut code = 0u8;
                for &(i, j) in reference {
                    let (pi, pj) = (p[i].min(p[j]), p[i].max(p[j]));
                    let idx = PAIR_INDICES
                        .iter()
                        .position(|&(a, b)| (a, b) == (pi, pj))
                        .unwrap();
                    code |= 1 << idx;
                }
                codes.insert(code);
            });
            codes.into_iter().collect()
        })
    }
}

fn permute(items: &mut [usize; 4], k: usize, f: &mut impl FnMut(&[usize; 4])) {
    if k == 4 {
        f(items);
        return;
    }
    for i in k..4 {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternCheck {
    Free,
    Found([u32; 4]),
}

impl PatternCheck {
    pub fn is_free(&self) -> bool {
        matches!(self, PatternCheck::Free)
    }
}

/// Result of [`Graph::components`]: the partition plus the counts used by the
/// coproduct closure rules.
#[derive(Debug, Clone)]
pub struct Components {
    /// Each component as its own graph plus the map `new label -> old label`.
    pub parts: Vec<(Graph, Vec<u32>)>,
    /// Number of components with at least two vertices (`m`).
    pub nontrivial: usize,
    /// Number of isolated vertices (`m0`).
    pub isolated: usize,
}

/// Counts of complete subgraphs by size: `coefficients[n]` is the number of
/// complete subgraphs on `n` vertices, with the empty subgraph giving
/// `coefficients[0] = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliquePolynomial {
    coefficients: Vec<u64>,
}

impl CliquePolynomial {
    pub fn from_coefficients(coefficients: Vec<u64>) -> Result<Self, &'static str> {
        if coefficients.first() != Some(&1) {
            return Err("constant coefficient must be 1");
        }
        if coefficients.last() == Some(&0) && coefficients.len() > 1 {
            return Err("leading coefficient must be nonzero");
        }
        Ok(CliquePolynomial { coefficients })
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Vertex count of the underlying graph (`c_1`).
    pub fn vertex_count(&self) -> u64 {
        self.coefficients.get(1).copied().unwrap_or(0)
    }

    /// Product of clique polynomials; equals the clique polynomial of the
    /// join of the underlying graphs.
    pub fn product(&self, other: &CliquePolynomial) -> CliquePolynomial {
        let mut out = vec![0u64; self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CliquePolynomial { coefficients: out }
    }
}

impl fmt::Display for CliquePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, &c) in self.coefficients.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}t")?,
                _ => write!(f, "{c}t^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
