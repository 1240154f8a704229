//! Quadratic F2-algebra engine.
//!
//! A quadratic presentation is a list of degree-1 generators and a list of
//! relations, each an F2 sum of degree-2 monomials (ordered generator
//! pairs). Commutators expand as `[A,B] = AB + BA`: the characteristic is
//! fixed at 2 throughout, so signs vanish.
//!
//! The module builds the twisted and untwisted group-algebra presentations
//! from a graph, runs the rewriting/confluence check on degree-3 critical
//! monomials, computes truncated Hilbert series by degree-by-degree rank
//! (correct whether or not the presentation is confluent), and computes
//! quadratic duals (cohomology ring presentations).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::f2::{leading_bit, Echelon};
use crate::graph::Graph;
use crate::series::IntSeries;
use crate::words::{validate_delta_action, ZVector};
use num_bigint::BigInt;

/// Degree-2 monomial: an ordered pair of generator indices.
pub type Mon2 = (usize, usize);
/// Degree-3 monomial.
pub type Mon3 = (usize, usize, usize);

const HILBERT_TRUNC_LIMIT: usize = 8;
const HILBERT_COLUMN_LIMIT: usize = 1_500_000;
const REDUCTION_STEP_LIMIT: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuadError {
    #[error("monomial ({0},{1}) uses a generator index outside 0..{2}")]
    GeneratorOutOfRange(usize, usize, usize),
    #[error("twist does not define an order-2 action: {0}")]
    InvalidTwist(String),
    #[error("generator order must list every generator exactly once, got {0:?}")]
    BadOrder(Vec<String>),
    #[error("unknown generator {0:?} in order")]
    UnknownGenerator(String),
    #[error("truncation {got} exceeds the Hilbert series bound {limit}")]
    TruncationTooLarge { got: usize, limit: usize },
    #[error("degree {degree} needs {columns} columns, over the memory budget of {limit}")]
    TooManyColumns {
        degree: usize,
        columns: usize,
        limit: usize,
    },
    #[error("rewriting exceeded {0} steps; the monomial order is not terminating as configured")]
    ReductionDiverged(usize),
    #[error("{0}")]
    Word(String),
}

/// A quadratic presentation over F2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticPresentation {
    generators: Vec<String>,
    relations: Vec<Vec<Mon2>>,
}

/// JSON wire form of a presentation.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PresentationDocument {
    pub generators: Vec<String>,
    pub relations: Vec<Vec<[String; 2]>>,
}

impl QuadraticPresentation {
    /// Normalise each relation (XOR duplicate monomials away), drop zero
    /// relations, and replace a linearly dependent list by an echelon basis.
    pub fn new(generators: Vec<String>, relations: Vec<Vec<Mon2>>) -> Result<Self, QuadError> {
        let g = generators.len();
        let mut cleaned: Vec<Vec<Mon2>> = Vec::new();
        for rel in relations {
            let mut set = BTreeSet::new();
            for &(a, b) in &rel {
                if a >= g || b >= g {
                    return Err(QuadError::GeneratorOutOfRange(a, b, g));
                }
                if !set.remove(&(a, b)) {
                    set.insert((a, b));
                }
            }
            if !set.is_empty() {
                cleaned.push(set.into_iter().collect());
            }
        }
        // Keep the input basis when it is already independent.
        let mut ech = Echelon::new(g * g);
        let mut independent = true;
        for rel in &cleaned {
            let mut row = vec![0u64; (g * g).div_ceil(64)];
            for &(a, b) in rel {
                let c = a * g + b;
                row[c / 64] ^= 1 << (c % 64);
            }
            independent &= ech.insert(row);
        }
        if !independent {
            let mut basis = Vec::new();
            for row in ech.rows() {
                let mut rel = Vec::new();
                for c in 0..g * g {
                    if row[c / 64] & (1 << (c % 64)) != 0 {
                        rel.push((c / g, c % g));
                    }
                }
                basis.push(rel);
            }
            cleaned = basis;
        }
        Ok(QuadraticPresentation {
            generators,
            relations: cleaned,
        })
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relations(&self) -> &[Vec<Mon2>] {
        &self.relations
    }

    pub fn generator_name(&self, i: usize) -> &str {
        &self.generators[i]
    }

    pub fn monomial_name(&self, m: Mon2) -> String {
        format!("{}*{}", self.generators[m.0], self.generators[m.1])
    }

    pub fn relation_name(&self, rel: &[Mon2]) -> String {
        rel.iter()
            .map(|&m| self.monomial_name(m))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Wire form: `{"generators":["X0",...],"relations":[[["X0","X0"]],...]}`
    /// with each relation a list of 2-element monomials, F2 sum implied.
    pub fn to_document(&self) -> PresentationDocument {
        PresentationDocument {
            generators: self.generators.clone(),
            relations: self
                .relations
                .iter()
                .map(|rel| {
                    rel.iter()
                        .map(|&(a, b)| [self.generators[a].clone(), self.generators[b].clone()])
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &PresentationDocument) -> Result<Self, QuadError> {
        let index_of = |name: &str| {
            doc.generators
                .iter()
                .position(|g| g == name)
                .ok_or_else(|| QuadError::UnknownGenerator(name.to_string()))
        };
        let mut relations = Vec::new();
        for rel in &doc.relations {
            let mut monomials = Vec::new();
            for [a, b] in rel {
                monomials.push((index_of(a)?, index_of(b)?));
            }
            relations.push(monomials);
        }
        QuadraticPresentation::new(doc.generators.clone(), relations)
    }

    /// Row space of the relations inside the degree-2 monomial space, in
    /// echelon form over the natural column order `a*g + b`.
    fn relation_echelon(&self) -> Echelon {
        let g = self.generator_count();
        let mut ech = Echelon::new(g * g);
        for rel in &self.relations {
            let mut row = vec![0u64; (g * g).div_ceil(64)];
            for &(a, b) in rel {
                let c = a * g + b;
                row[c / 64] ^= 1 << (c % 64);
            }
            ech.insert(row);
        }
        ech
    }

    /// Two presentations with the same generator count have equal relation
    /// spans iff their echelon forms agree row by row.
    pub fn same_relation_span(&self, other: &QuadraticPresentation) -> bool {
        if self.generator_count() != other.generator_count() {
            return false;
        }
        let mut a = self.relation_echelon();
        let mut b = other.relation_echelon();
        a.normalize();
        b.normalize();
        let mut ra: Vec<&[u64]> = a.rows().collect();
        let mut rb: Vec<&[u64]> = b.rows().collect();
        ra.sort_unstable();
        rb.sort_unstable();
        ra == rb
    }
}

/// Presentation of the twisted group algebra on generators `X0..Xd`:
/// `X0^2`, `[Xu,Xv]` per edge, and `[X0,Xk] + [Xk,eps_k] + Xk^2` per
/// generator, where `eps_k` is the mod-2 abelianised twist entry.
pub fn build_twisted(g: &Graph, z: &ZVector) -> Result<QuadraticPresentation, QuadError> {
    let check = validate_delta_action(g, z).map_err(|e| QuadError::Word(e.to_string()))?;
    if !check.is_valid() {
        return Err(QuadError::InvalidTwist(format!("{check:?}")));
    }
    let d = g.vertex_count();
    let generators: Vec<String> = (0..=d).map(|i| format!("X{i}")).collect();
    let mut relations: Vec<Vec<Mon2>> = vec![vec![(0, 0)]];
    for (u, v) in g.edges() {
        relations.push(vec![(u as usize, v as usize), (v as usize, u as usize)]);
    }
    let eps = z.epsilon();
    for k in 1..=d {
        let mut rel = vec![(0, k), (k, 0), (k, k)];
        let mask = eps[k - 1];
        for j in 1..=d {
            if mask & (1 << (j - 1)) != 0 {
                rel.push((k, j));
                rel.push((j, k));
            }
        }
        relations.push(rel);
    }
    QuadraticPresentation::new(generators, relations)
}

/// Presentation of the untwisted group algebra on `X1..Xd`: one commutator
/// per edge.
pub fn build_untwisted(g: &Graph) -> QuadraticPresentation {
    let d = g.vertex_count();
    let generators: Vec<String> = (1..=d).map(|i| format!("X{i}")).collect();
    let relations: Vec<Vec<Mon2>> = g
        .edges()
        .map(|(u, v)| {
            vec![
                (u as usize - 1, v as usize - 1),
                (v as usize - 1, u as usize - 1),
            ]
        })
        .collect();
    QuadraticPresentation::new(generators, relations).unwrap()
}

/// A total order on generators, listed from largest to smallest. Monomials
/// compare degree-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorOrder {
    /// `descending[0]` is the largest generator (index into the presentation).
    descending: Vec<usize>,
    /// `rank[i]` is the position of generator `i`; smaller rank = larger.
    rank: Vec<usize>,
}

impl GeneratorOrder {
    pub fn new(descending: Vec<usize>, generator_count: usize) -> Result<Self, QuadError> {
        let mut seen = vec![false; generator_count];
        if descending.len() != generator_count {
            return Err(QuadError::BadOrder(
                descending.iter().map(|i| i.to_string()).collect(),
            ));
        }
        for &i in &descending {
            if i >= generator_count || seen[i] {
                return Err(QuadError::BadOrder(
                    descending.iter().map(|i| i.to_string()).collect(),
                ));
            }
            seen[i] = true;
        }
        let mut rank = vec![0usize; generator_count];
        for (pos, &i) in descending.iter().enumerate() {
            rank[i] = pos;
        }
        Ok(GeneratorOrder { descending, rank })
    }

    /// Natural order: the generators as listed, first is largest.
    pub fn natural(generator_count: usize) -> Self {
        GeneratorOrder::new((0..generator_count).collect(), generator_count).unwrap()
    }

    /// Parse a comma-separated list of generator names, largest first,
    /// e.g. `x0,x1,x3,x2,x4`. Names match case-insensitively.
    pub fn parse(text: &str, pres: &QuadraticPresentation) -> Result<Self, QuadError> {
        let mut descending = Vec::new();
        for token in text.split(',') {
            let name = token.trim();
            let idx = pres
                .generators()
                .iter()
                .position(|gname| gname.eq_ignore_ascii_case(name))
                .ok_or_else(|| QuadError::UnknownGenerator(name.to_string()))?;
            descending.push(idx);
        }
        GeneratorOrder::new(descending, pres.generator_count())
    }

    pub fn descending(&self) -> &[usize] {
        &self.descending
    }

    /// True when `m1` is a strictly larger monomial than `m2`.
    pub fn mon2_greater(&self, m1: Mon2, m2: Mon2) -> bool {
        (self.rank[m1.0], self.rank[m1.1]) < (self.rank[m2.0], self.rank[m2.1])
    }

    fn mon2_key(&self, m: Mon2) -> (usize, usize) {
        (self.rank[m.0], self.rank[m.1])
    }
}

/// Leading-monomial rewrite rules extracted from a presentation: each rule
/// maps its head (the largest monomial of a relation) to the F2 sum of the
/// strictly smaller monomials.
#[derive(Debug, Clone)]
pub struct RewritingSystem {
    order: GeneratorOrder,
    rules: BTreeMap<Mon2, Vec<Mon2>>,
}

impl RewritingSystem {
    /// Triangularise the relations against the order: Gaussian elimination
    /// with the largest monomial of each row as pivot, then back
    /// substitution, so heads are distinct and no tail contains a head.
    pub fn new(pres: &QuadraticPresentation, order: &GeneratorOrder) -> Result<Self, QuadError> {
        if order.descending.len() != pres.generator_count() {
            return Err(QuadError::BadOrder(
                order.descending.iter().map(|i| i.to_string()).collect(),
            ));
        }
        let g = pres.generator_count();
        // Columns sorted so that column 0 is the largest monomial.
        let mut mons: Vec<Mon2> = (0..g).flat_map(|a| (0..g).map(move |b| (a, b))).collect();
        mons.sort_by_key(|&m| order.mon2_key(m));
        let col_of: BTreeMap<Mon2, usize> = mons.iter().enumerate().map(|(c, &m)| (m, c)).collect();
        let mut ech = Echelon::new(g * g);
        for rel in pres.relations() {
            let mut row = vec![0u64; (g * g).div_ceil(64)];
            for &m in rel {
                let c = col_of[&m];
                row[c / 64] ^= 1 << (c % 64);
            }
            ech.insert(row);
        }
        ech.normalize();
        let mut rules = BTreeMap::new();
        for row in ech.rows() {
            let head_col = leading_bit(row).expect("echelon rows are nonzero");
            let head = mons[head_col];
            let mut tail = Vec::new();
            for (c, &m) in mons.iter().enumerate() {
                if c != head_col && row[c / 64] & (1 << (c % 64)) != 0 {
                    debug_assert!(order.mon2_greater(head, m));
                    tail.push(m);
                }
            }
            rules.insert(head, tail);
        }
        Ok(RewritingSystem {
            order: order.clone(),
            rules,
        })
    }

    /// The set of leading monomials, one per relation.
    pub fn heads(&self) -> Vec<Mon2> {
        self.rules.keys().copied().collect()
    }

    pub fn order(&self) -> &GeneratorOrder {
        &self.order
    }

    /// Degree-3 overlaps of two heads: `abc` with `ab` and `bc` both heads.
    pub fn critical_monomials(&self) -> Vec<Mon3> {
        let mut out = Vec::new();
        for &(a, b) in self.rules.keys() {
            for &(b2, c) in self.rules.keys() {
                if b == b2 {
                    out.push((a, b, c));
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn prefix_reducible(&self, m: Mon3) -> bool {
        self.rules.contains_key(&(m.0, m.1))
    }

    fn suffix_reducible(&self, m: Mon3) -> bool {
        self.rules.contains_key(&(m.1, m.2))
    }

    fn apply_prefix(&self, m: Mon3, acc: &mut BTreeSet<Mon3>) {
        for &(x, y) in &self.rules[&(m.0, m.1)] {
            toggle(acc, (x, y, m.2));
        }
    }

    fn apply_suffix(&self, m: Mon3, acc: &mut BTreeSet<Mon3>) {
        for &(x, y) in &self.rules[&(m.1, m.2)] {
            toggle(acc, (m.0, x, y));
        }
    }

    /// Exhaustively rewrite a degree-3 sum to normal form: repeatedly pick
    /// the first reducible monomial and apply its prefix rule when possible,
    /// otherwise its suffix rule. Terminates because every rule replaces a
    /// monomial by strictly smaller ones; a step cap guards regressions in
    /// the order.
    pub fn normal_form3(&self, sum: &BTreeSet<Mon3>) -> Result<BTreeSet<Mon3>, QuadError> {
        let mut acc = sum.clone();
        for _ in 0..REDUCTION_STEP_LIMIT {
            let next = acc
                .iter()
                .copied()
                .find(|&m| self.prefix_reducible(m) || self.suffix_reducible(m));
            match next {
                None => return Ok(acc),
                Some(m) => {
                    toggle(&mut acc, m);
                    if self.prefix_reducible(m) {
                        self.apply_prefix(m, &mut acc);
                    } else {
                        self.apply_suffix(m, &mut acc);
                    }
                }
            }
        }
        Err(QuadError::ReductionDiverged(REDUCTION_STEP_LIMIT))
    }

    /// The two reductions of a critical monomial: first step forced through
    /// the prefix (left path) or the suffix (right path), then normal form.
    pub fn reduce_both_ways(&self, m: Mon3) -> Result<(BTreeSet<Mon3>, BTreeSet<Mon3>), QuadError> {
        let mut left = BTreeSet::new();
        self.apply_prefix(m, &mut left);
        let left = self.normal_form3(&left)?;
        let mut right = BTreeSet::new();
        self.apply_suffix(m, &mut right);
        let right = self.normal_form3(&right)?;
        Ok((left, right))
    }

    /// Count degree-`n` monomials containing no head as a factor, by
    /// transfer-matrix dynamic programming.
    pub fn reduced_monomial_count(&self, n: usize) -> BigInt {
        let g = self.order.rank.len();
        if n == 0 {
            return BigInt::from(1);
        }
        let mut v = vec![BigInt::from(1); g];
        for _ in 1..n {
            let mut next = vec![BigInt::from(0); g];
            for b in 0..g {
                for a in 0..g {
                    if !self.rules.contains_key(&(a, b)) {
                        next[b] += &v[a];
                    }
                }
            }
            v = next;
        }
        v.into_iter().sum()
    }
}

fn toggle(set: &mut BTreeSet<Mon3>, m: Mon3) {
    if !set.remove(&m) {
        set.insert(m);
    }
}

/// Outcome of the confluence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PbwOutcome {
    Confluent,
    Counterexample {
        critical: Mon3,
        left: Vec<Mon3>,
        right: Vec<Mon3>,
    },
}

impl PbwOutcome {
    pub fn is_confluent(&self) -> bool {
        matches!(self, PbwOutcome::Confluent)
    }
}

/// Build the rewriting system for the order and reduce every degree-3
/// critical monomial both ways; confluent iff every pair of normal forms
/// agrees.
pub fn pbw_check(
    pres: &QuadraticPresentation,
    order: &GeneratorOrder,
) -> Result<(RewritingSystem, PbwOutcome), QuadError> {
    let system = RewritingSystem::new(pres, order)?;
    for m in system.critical_monomials() {
        let (left, right) = system.reduce_both_ways(m)?;
        if left != right {
            return Ok((
                system.clone(),
                PbwOutcome::Counterexample {
                    critical: m,
                    left: left.into_iter().collect(),
                    right: right.into_iter().collect(),
                },
            ));
        }
    }
    Ok((system, PbwOutcome::Confluent))
}

/// Graded dimensions of the quotient algebra up to `trunc`, by
/// degree-by-degree linear algebra: the degree-n component of the two-sided
/// ideal is spanned by `monomials x relations x monomials`; its rank is
/// computed level by level against a running monomial basis of the
/// quotient, and the dimension is the column count minus the rank. The
/// result does not depend on any monomial order.
pub fn hilbert_series(pres: &QuadraticPresentation, trunc: usize) -> Result<IntSeries, QuadError> {
    if trunc > HILBERT_TRUNC_LIMIT {
        return Err(QuadError::TruncationTooLarge {
            got: trunc,
            limit: HILBERT_TRUNC_LIMIT,
        });
    }
    let g = pres.generator_count();
    let mut dims: Vec<BigInt> = vec![BigInt::from(1)];
    if trunc == 0 {
        return Ok(IntSeries::from_coefficients(dims));
    }
    dims.push(BigInt::from(g));

    // Level n state: the monomial basis B_n of degree n is identified with
    // the non-pivot columns of the level-n elimination, whose columns are
    // pairs (element of B_{n-1}, letter) = monomials of degree n.
    //
    // reducer[n] rewrites any such column as an F2 vector over B_n.
    struct Level {
        ech: Echelon,
        /// Column index -> index in B_n for non-pivot columns.
        basis_index: Vec<Option<usize>>,
    }

    // Level 1: no relations; B_1 = all g letters.
    let mut levels: Vec<Level> = Vec::new();
    {
        let ech = Echelon::new(g);
        let basis_index = (0..g).map(Some).collect();
        levels.push(Level { ech, basis_index });
    }

    let mut prev_basis = g; // |B_{n-1}|
    let mut prev_prev_basis = 1; // |B_{n-2}|
    for n in 2..=trunc {
        let cols = prev_basis * g;
        if cols > HILBERT_COLUMN_LIMIT {
            return Err(QuadError::TooManyColumns {
                degree: n,
                columns: cols,
                limit: HILBERT_COLUMN_LIMIT,
            });
        }
        let words = cols.div_ceil(64);
        let mut ech = Echelon::new(cols);
        let last = n == trunc;
        // Rows: b'' * r for b'' in B_{n-2}, r a relation, projected onto
        // B_{n-1} x V coordinates via the level n-1 reduction.
        for b2 in 0..prev_prev_basis {
            for rel in pres.relations() {
                let mut row = vec![0u64; words];
                for &(a, b) in rel {
                    if n == 2 {
                        // B_0 is the unit; the column is the monomial (a,b).
                        let c = a * g + b;
                        row[c / 64] ^= 1 << (c % 64);
                    } else {
                        let prev = &levels[n - 2]; // level n-1 state
                        let col = b2 * g + a;
                        match prev.basis_index[col] {
                            Some(idx) => {
                                let c = idx * g + b;
                                row[c / 64] ^= 1 << (c % 64);
                            }
                            None => {
                                let prow =
                                    prev.ech.row_for_pivot(col).expect("pivot column has a row");
                                for pc in 0..prev.ech.cols() {
                                    if pc != col && prow[pc / 64] & (1 << (pc % 64)) != 0 {
                                        let idx = prev.basis_index[pc]
                                            .expect("normalized rows touch only non-pivots");
                                        let c = idx * g + b;
                                        row[c / 64] ^= 1 << (c % 64);
                                    }
                                }
                            }
                        }
                    }
                }
                ech.insert(row);
            }
        }
        let rank = ech.rank();
        let dim = cols - rank;
        dims.push(BigInt::from(dim));
        if last {
            break;
        }
        ech.normalize();
        let mut basis_index = vec![None; cols];
        let mut count = 0;
        for c in 0..cols {
            if !ech.is_pivot(c) {
                basis_index[c] = Some(count);
                count += 1;
            }
        }
        debug_assert_eq!(count, dim);
        levels.push(Level { ech, basis_index });
        prev_prev_basis = prev_basis;
        prev_basis = dim;
    }
    Ok(IntSeries::from_coefficients(dims))
}

/// Quadratic dual: generators are renamed duals (X0 -> chi0, Xk -> psik) and
/// the relation space is the orthogonal complement of the input relation
/// span under the monomial-dual pairing, emitted as a reduced basis.
pub fn quadratic_dual(pres: &QuadraticPresentation) -> QuadraticPresentation {
    let g = pres.generator_count();
    let mut ech = pres.relation_echelon();
    ech.normalize();
    let basis = ech.nullspace_basis();
    let relations: Vec<Vec<Mon2>> = basis
        .iter()
        .map(|v| {
            (0..g * g)
                .filter(|&c| v[c / 64] & (1 << (c % 64)) != 0)
                .map(|c| (c / g, c % g))
                .collect()
        })
        .collect();
    let generators = pres
        .generators()
        .iter()
        .map(|name| dual_name(name))
        .collect();
    QuadraticPresentation::new(generators, relations).unwrap()
}

fn dual_name(name: &str) -> String {
    match name.strip_prefix('X') {
        Some("0") => "chi0".to_string(),
        Some(k) => format!("psi{k}"),
        None => format!("dual_{name}"),
    }
}

/// A monomial transversal of the degree-2 component of the quotient: the
/// non-pivot monomials of the relation echelon, pivoting on the smallest
/// monomial of each relation under the order.
#[derive(Debug, Clone)]
pub struct H2Basis {
    /// Transversal monomials, each a residue-class representative.
    pub classes: Vec<Mon2>,
    /// For every degree-2 monomial, its coordinates over `classes`.
    reduction: Vec<Vec<u64>>,
    words: usize,
}

impl H2Basis {
    pub fn dimension(&self) -> usize {
        self.classes.len()
    }

    /// Coordinates of a degree-2 monomial over the transversal.
    pub fn reduce_monomial(&self, g: usize, m: Mon2) -> &[u64] {
        &self.reduction[m.0 * g + m.1]
    }

    pub fn words(&self) -> usize {
        self.words
    }
}

/// Compute the degree-2 transversal of `pres` (typically a quadratic dual)
/// with pivots chosen ascending in the order, so the surviving
/// representatives are the largest monomials of each class.
pub fn h2_basis(
    pres: &QuadraticPresentation,
    order: &GeneratorOrder,
) -> Result<H2Basis, QuadError> {
    let g = pres.generator_count();
    if order.descending.len() != g {
        return Err(QuadError::BadOrder(
            order.descending.iter().map(|i| i.to_string()).collect(),
        ));
    }
    // Columns sorted ascending: column 0 is the smallest monomial.
    let mut mons: Vec<Mon2> = (0..g).flat_map(|a| (0..g).map(move |b| (a, b))).collect();
    mons.sort_by_key(|&m| order.mon2_key(m));
    mons.reverse();
    let col_of: BTreeMap<Mon2, usize> = mons.iter().enumerate().map(|(c, &m)| (m, c)).collect();
    let mut ech = Echelon::new(g * g);
    for rel in pres.relations() {
        let mut row = vec![0u64; (g * g).div_ceil(64)];
        for &m in rel {
            let c = col_of[&m];
            row[c / 64] ^= 1 << (c % 64);
        }
        ech.insert(row);
    }
    ech.normalize();
    let non_pivots = ech.non_pivot_columns();
    let classes: Vec<Mon2> = non_pivots.iter().map(|&c| mons[c]).collect();
    let class_index: BTreeMap<usize, usize> = non_pivots
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i))
        .collect();
    let words = classes.len().div_ceil(64).max(1);
    let mut reduction = vec![vec![0u64; words]; g * g];
    for (c, &m) in mons.iter().enumerate() {
        let natural = m.0 * g + m.1;
        match class_index.get(&c) {
            Some(&i) => reduction[natural][i / 64] |= 1 << (i % 64),
            None => {
                let row = ech.row_for_pivot(c).expect("pivot column has a row");
                for pc in 0..g * g {
                    if pc != c && row[pc / 64] & (1 << (pc % 64)) != 0 {
                        let i = class_index[&pc];
                        reduction[natural][i / 64] ^= 1 << (i % 64);
                    }
                }
            }
        }
    }
    Ok(H2Basis {
        classes,
        reduction,
        words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::series::gocha_series;

    fn c4() -> Graph {
        Graph::cycle(4).unwrap()
    }

    fn shipped_order(pres: &QuadraticPresentation) -> GeneratorOrder {
        GeneratorOrder::parse("x0,x1,x3,x2,x4", pres).unwrap()
    }

    #[test]
    fn twisted_presentation_for_c4_has_nine_relations() {
        let pres = build_twisted(&c4(), &ZVector::trivial(4)).unwrap();
        assert_eq!(pres.generator_count(), 5);
        assert_eq!(pres.relations().len(), 9);
    }

    #[test]
    fn twisted_presentation_for_empty_graph() {
        let pres = build_twisted(&Graph::empty(), &ZVector::trivial(0)).unwrap();
        assert_eq!(pres.generator_count(), 1);
        assert_eq!(pres.relations(), &[vec![(0, 0)]]);
    }

    #[test]
    fn twisted_presentation_tracks_epsilon() {
        // Twist (1,1,x5,x5,1): the k=3 relation is [X0,X3]+[X3,X5]+X3^2.
        let g = Graph::new(5, [(1, 2), (3, 4)]).unwrap();
        let z = ZVector::parse(r#"{"z":["1","1","x5","x5","1"]}"#, 5).unwrap();
        let pres = build_twisted(&g, &z).unwrap();
        let expected: Vec<Mon2> = {
            let mut v = vec![(0usize, 3usize), (3, 0), (3, 3), (3, 5), (5, 3)];
            v.sort_unstable();
            v
        };
        assert!(
            pres.relations().iter().any(|r| {
                let mut r = r.clone();
                r.sort_unstable();
                r == expected
            }),
            "missing twisted relation for k=3"
        );
    }

    #[test]
    fn heads_match_the_fixed_order() {
        let pres = build_twisted(&c4(), &ZVector::trivial(4)).unwrap();
        let system = RewritingSystem::new(&pres, &shipped_order(&pres)).unwrap();
        let mut expected: Vec<Mon2> = vec![
            (0, 0),
            (1, 2),
            (3, 2),
            (3, 4),
            (1, 4),
            (0, 1),
            (0, 2),
            (0, 3),
            (0, 4),
        ];
        expected.sort_unstable();
        assert_eq!(system.heads(), expected);
    }

    #[test]
    fn c4_twisted_algebra_is_confluent_with_the_known_reduction() {
        let pres = build_twisted(&c4(), &ZVector::trivial(4)).unwrap();
        let order = shipped_order(&pres);
        let (system, outcome) = pbw_check(&pres, &order).unwrap();
        assert!(outcome.is_confluent());
        // The double reduction of X0*X1*X2 ends at X2X1X0 + X2^2 X1 + X2 X1^2
        // on both paths.
        let (left, right) = system.reduce_both_ways((0, 1, 2)).unwrap();
        let expected: BTreeSet<Mon3> = [(2, 1, 0), (2, 2, 1), (2, 1, 1)].into_iter().collect();
        assert_eq!(left, expected);
        assert_eq!(right, expected);
    }

    #[test]
    fn no_relations_is_trivially_confluent() {
        let pres = QuadraticPresentation::new(vec!["X1".into(), "X2".into()], vec![]).unwrap();
        let (system, outcome) = pbw_check(&pres, &GeneratorOrder::natural(2)).unwrap();
        assert!(system.critical_monomials().is_empty());
        assert!(outcome.is_confluent());
    }

    #[test]
    fn seeded_non_confluent_fixture_is_detected() {
        // Generators X > Y with the single relation XX + XY: the overlap
        // X^3 reduces to XYX on the left and XYY on the right.
        let pres =
            QuadraticPresentation::new(vec!["X".into(), "Y".into()], vec![vec![(0, 0), (0, 1)]])
                .unwrap();
        let (_, outcome) = pbw_check(&pres, &GeneratorOrder::natural(2)).unwrap();
        match outcome {
            PbwOutcome::Counterexample {
                critical,
                left,
                right,
            } => {
                assert_eq!(critical, (0, 0, 0));
                assert_eq!(left, vec![(0, 1, 0)]);
                assert_eq!(right, vec![(0, 1, 1)]);
            }
            PbwOutcome::Confluent => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn hilbert_series_free_algebra() {
        let pres = QuadraticPresentation::new(vec!["X".into(), "Y".into()], vec![]).unwrap();
        let s = hilbert_series(&pres, 4).unwrap();
        let expected: Vec<BigInt> = [1, 2, 4, 8, 16].iter().map(|&c| BigInt::from(c)).collect();
        assert_eq!(s.coefficients(), expected.as_slice());
    }

    #[test]
    fn hilbert_series_commuting_pair() {
        let pres =
            QuadraticPresentation::new(vec!["X".into(), "Y".into()], vec![vec![(0, 1), (1, 0)]])
                .unwrap();
        let s = hilbert_series(&pres, 4).unwrap();
        let expected: Vec<BigInt> = [1, 2, 3, 4, 5].iter().map(|&c| BigInt::from(c)).collect();
        assert_eq!(s.coefficients(), expected.as_slice());
    }

    #[test]
    fn hilbert_series_c4_matches_series_formula() {
        let pres = build_twisted(&c4(), &ZVector::trivial(4)).unwrap();
        let s = hilbert_series(&pres, 4).unwrap();
        assert_eq!(s, gocha_series(&c4().clique_polynomial(), 4));
        let expected: Vec<BigInt> = [1, 5, 16, 44, 112]
            .iter()
            .map(|&c| BigInt::from(c))
            .collect();
        assert_eq!(s.coefficients(), expected.as_slice());
    }

    #[test]
    fn hilbert_series_is_twist_independent() {
        // The graded dimensions depend only on the graph, not on the twist:
        // the twisted relation [X0,X3]+[X3,X5]+X3^2 changes the ideal but
        // not its degreewise ranks.
        let g = Graph::new(5, [(1, 2), (3, 4)]).unwrap();
        let trivial = build_twisted(&g, &ZVector::trivial(5)).unwrap();
        let z = ZVector::parse(r#"{"z":["1","1","x5","x5","1"]}"#, 5).unwrap();
        let twisted = build_twisted(&g, &z).unwrap();
        let a = hilbert_series(&trivial, 5).unwrap();
        let b = hilbert_series(&twisted, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, gocha_series(&g.clique_polynomial(), 5));
    }

    #[test]
    fn dual_hilbert_series_matches_the_cohomology_series() {
        for g in [
            c4(),
            Graph::complete(3).unwrap(),
            Graph::new(5, [(1, 2), (3, 4)]).unwrap(),
        ] {
            let pres = build_twisted(&g, &ZVector::trivial(g.vertex_count())).unwrap();
            let dual = quadratic_dual(&pres);
            let s = hilbert_series(&dual, 5).unwrap();
            let expected = crate::series::poincare_series(&g.clique_polynomial(), 5);
            assert_eq!(s, expected, "dual dimensions for {:?}", g.to_document());
        }
    }

    #[test]
    fn hilbert_series_rejects_large_truncation() {
        let pres = QuadraticPresentation::new(vec!["X".into()], vec![]).unwrap();
        assert!(matches!(
            hilbert_series(&pres, 9),
            Err(QuadError::TruncationTooLarge { .. })
        ));
    }

    #[test]
    fn reduced_monomial_count_matches_hilbert_when_confluent() {
        let pres = build_twisted(&c4(), &ZVector::trivial(4)).unwrap();
        let order = shipped_order(&pres);
        let (system, outcome) = pbw_check(&pres, &order).unwrap();
        assert!(outcome.is_confluent());
        let s = hilbert_series(&pres, 6).unwrap();
        for n in 0..=6 {
            assert_eq!(
                system.reduced_monomial_count(n),
                s.coefficient(n),
                "degree {n}"
            );
        }
    }

    #[test]
    fn presentation_document_round_trip() {
        let pres = build_twisted(&c4(), &ZVector::trivial(4)).unwrap();
        let doc = pres.to_document();
        assert_eq!(doc.generators, vec!["X0", "X1", "X2", "X3", "X4"]);
        assert_eq!(doc.relations.len(), 9);
        assert_eq!(doc.relations[0], vec![["X0".to_string(), "X0".to_string()]]);
        let back = QuadraticPresentation::from_document(&doc).unwrap();
        assert!(back.same_relation_span(&pres));
        let json = serde_json::to_string(&doc).unwrap();
        let parsed: PresentationDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.generators, doc.generators);
    }

    #[test]
    fn dual_of_free_algebra_has_all_degree_two_relations() {
        let pres = QuadraticPresentation::new(vec!["X1".into(), "X2".into()], vec![]).unwrap();
        let dual = quadratic_dual(&pres);
        assert_eq!(dual.relations().len(), 4);
        let h2 = h2_basis(&dual, &GeneratorOrder::natural(2)).unwrap();
        assert_eq!(h2.dimension(), 0);
    }

    #[test]
    fn dual_of_c4_twisted_matches_known_relationset() {
        let pres = build_twisted(&c4(), &ZVector::trivial(4)).unwrap();
        let dual = quadratic_dual(&pres);
        assert_eq!(dual.generators(), &["chi0", "psi1", "psi2", "psi3", "psi4"]);
        // chi0 psi_i + psi_i chi0, psi_i psi_j + psi_j psi_i (i<j),
        // chi0 psi_i + psi_i^2, psi1 psi3, psi2 psi4.
        let mut relations: Vec<Vec<Mon2>> = Vec::new();
        for i in 1..=4usize {
            relations.push(vec![(0, i), (i, 0)]);
            relations.push(vec![(0, i), (i, i)]);
        }
        for i in 1..=4usize {
            for j in (i + 1)..=4 {
                relations.push(vec![(i, j), (j, i)]);
            }
        }
        relations.push(vec![(1, 3)]);
        relations.push(vec![(2, 4)]);
        let expected = QuadraticPresentation::new(dual.generators().to_vec(), relations).unwrap();
        assert!(dual.same_relation_span(&expected));
    }

    #[test]
    fn dual_of_c4_untwisted_matches_known_relationset() {
        let pres = build_untwisted(&c4());
        let dual = quadratic_dual(&pres);
        // psi_i^2, psi1 psi3 (both orders), psi2 psi4, and the symmetrised
        // products of adjacent generators.
        let mut relations: Vec<Vec<Mon2>> = (0..4).map(|i| vec![(i, i)]).collect();
        relations.push(vec![(0, 2)]);
        relations.push(vec![(2, 0)]);
        relations.push(vec![(1, 3)]);
        relations.push(vec![(3, 1)]);
        for (u, v) in [(0usize, 1usize), (1, 2), (2, 3), (0, 3)] {
            relations.push(vec![(u, v), (v, u)]);
        }
        let expected = QuadraticPresentation::new(dual.generators().to_vec(), relations).unwrap();
        assert!(dual.same_relation_span(&expected));
    }

    #[test]
    fn h2_basis_of_c4_twisted_matches_known_classes() {
        let pres = build_twisted(&c4(), &ZVector::trivial(4)).unwrap();
        let dual = quadratic_dual(&pres);
        let order = shipped_order(&pres);
        let h2 = h2_basis(&dual, &order).unwrap();
        assert_eq!(h2.dimension(), 9);
        let mut classes = h2.classes.clone();
        classes.sort_unstable();
        let mut expected: Vec<Mon2> = vec![
            (0, 0),
            (0, 1),
            (0, 2),
            (0, 3),
            (0, 4),
            (1, 2),
            (1, 4),
            (3, 2),
            (3, 4),
        ];
        expected.sort_unstable();
        assert_eq!(classes, expected);
    }

    #[test]
    fn h2_basis_of_c4_untwisted_matches_known_classes() {
        let pres = build_untwisted(&c4());
        let dual = quadratic_dual(&pres);
        let h2 = h2_basis(&dual, &GeneratorOrder::natural(4)).unwrap();
        assert_eq!(h2.dimension(), 4);
        let mut classes = h2.classes.clone();
        classes.sort_unstable();
        // psi1 psi2, psi2 psi3, psi3 psi4, psi1 psi4 in 0-based indices.
        let mut expected: Vec<Mon2> = vec![(0, 1), (1, 2), (2, 3), (0, 3)];
        expected.sort_unstable();
        assert_eq!(classes, expected);
    }

    #[test]
    fn h2_dimension_formula_for_single_vertex() {
        let g = Graph::complete(1).unwrap();
        let pres = build_twisted(&g, &ZVector::trivial(1)).unwrap();
        let dual = quadratic_dual(&pres);
        let h2 = h2_basis(&dual, &GeneratorOrder::natural(2)).unwrap();
        assert_eq!(h2.dimension(), 2); // d + r + 1 = 1 + 0 + 1
    }

    #[test]
    fn dual_is_an_involution_on_relation_spans() {
        for (g, z) in [
            (c4(), ZVector::trivial(4)),
            (Graph::complete(3).unwrap(), ZVector::trivial(3)),
            (
                Graph::new(5, [(1, 2), (3, 4)]).unwrap(),
                ZVector::trivial(5),
            ),
        ] {
            let pres = build_twisted(&g, &z).unwrap();
            let double = quadratic_dual(&quadratic_dual(&pres));
            assert!(double.same_relation_span(&pres));
        }
    }

    #[test]
    fn koszul_numerical_criterion_for_c4() {
        // hilbert(p)(t) * hilbert(dual p)(-t) = 1 for the twisted algebra.
        let pres = build_twisted(&c4(), &ZVector::trivial(4)).unwrap();
        let dual = quadratic_dual(&pres);
        let trunc = 5;
        let a = hilbert_series(&pres, trunc).unwrap();
        let b = hilbert_series(&dual, trunc).unwrap().negate_variable();
        assert_eq!(a.mul(&b).unwrap(), IntSeries::one(trunc));
    }
}
