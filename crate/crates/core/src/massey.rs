//! Cup products, the cup-vanishing classification, constructive Massey
//! solvers, and kernel-unipotent witnesses for three fixed targets: the
//! twisted group over the 4-cycle, the plain group over the 4-cycle, and
//! free products of k involutions.
//!
//! Everything returned here is machine-verified before it is returned: the
//! solvers re-check the relator equations and the superdiagonal contract,
//! and treat any failure as an internal error rather than an input error.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::quad::h2_basis;
use crate::quad::{build_twisted, build_untwisted, quadratic_dual, GeneratorOrder, H2Basis};
use crate::unipotent::{full_shift, inverting_involution, verify_morphism, UnipotentMatrix};
use crate::words::{z_pres_relators, GroupWord, ZVector};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MasseyError {
    #[error("character has {got} coordinates, target needs {expected}")]
    CharacterLength { got: usize, expected: usize },
    #[error("cup product of characters {0} and {1} does not vanish")]
    ConsecutiveCupNonzero(usize, usize),
    #[error("character is zero")]
    ZeroCharacter,
    #[error("characters do not satisfy any vanishing class; this input should be impossible")]
    NoVanishingClass,
    #[error("internal solver postcondition failed: {0}")]
    Internal(String),
    #[error("invalid character syntax: {0:?}")]
    Syntax(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KuError {
    #[error("element is trivial in the target group")]
    TrivialElement,
    #[error("element has filtration depth beyond {trunc}; rerun with a larger truncation")]
    DepthExceedsTruncation { trunc: usize },
    #[error("word uses generator {0}, outside the target's range {1}")]
    GeneratorRange(u32, usize),
    #[error("internal witness postcondition failed: {0}")]
    Internal(String),
}

/// The three groups the solvers understand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Twisted group over the 4-cycle, generators `x0..x4`.
    C4Delta,
    /// Plain group over the 4-cycle, generators `x1..x4`.
    C4Raag,
    /// Free product of `k` involutions, generators `y1..yk`.
    Sap(usize),
}

impl Target {
    /// Number of character coordinates.
    pub fn character_len(self) -> usize {
        match self {
            Target::C4Delta => 5,
            Target::C4Raag => 4,
            Target::Sap(k) => k,
        }
    }

    /// Generator indices used in relator words.
    pub fn generator_indices(self) -> Vec<u32> {
        match self {
            Target::C4Delta => (0..=4).collect(),
            Target::C4Raag => (1..=4).collect(),
            Target::Sap(k) => (1..=k as u32).collect(),
        }
    }

    /// Length of an image table indexed directly by generator index.
    pub fn image_slots(self) -> usize {
        match self {
            Target::C4Delta => 5,
            Target::C4Raag => 5,
            Target::Sap(k) => k + 1,
        }
    }

    /// Value of a character at a generator.
    fn char_value(self, alpha: &Character, gen: u32) -> bool {
        match self {
            Target::C4Delta => alpha.bit(gen as usize),
            Target::C4Raag | Target::Sap(_) => alpha.bit(gen as usize - 1),
        }
    }

    pub fn relators(self) -> Vec<GroupWord> {
        match self {
            Target::C4Delta => z_pres_relators(&Graph::cycle(4).unwrap(), &ZVector::trivial(4)),
            Target::C4Raag => {
                let g = Graph::cycle(4).unwrap();
                g.edges()
                    .map(|(u, v)| {
                        GroupWord::commutator(&GroupWord::generator(u), &GroupWord::generator(v))
                    })
                    .collect()
            }
            Target::Sap(k) => (1..=k as u32)
                .map(|i| GroupWord::generator(i).concat(&GroupWord::generator(i)))
                .collect(),
        }
    }
}

/// An F2 character on the target's generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Character {
    bits: u32,
    len: usize,
}

impl Character {
    pub fn new(bits: u32, len: usize) -> Self {
        debug_assert!(len <= 32);
        Character {
            bits: bits & mask(len),
            len,
        }
    }

    pub fn zero(len: usize) -> Self {
        Character { bits: 0, len }
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits & (1 << i) != 0
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn add(&self, other: &Character) -> Character {
        Character::new(self.bits ^ other.bits, self.len)
    }

    /// Parse a comma-separated bit list like `0,1,0,0,0`.
    pub fn parse(text: &str, len: usize) -> Result<Self, MasseyError> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != len {
            return Err(MasseyError::CharacterLength {
                got: parts.len(),
                expected: len,
            });
        }
        let mut bits = 0u32;
        for (i, p) in parts.iter().enumerate() {
            match *p {
                "0" => {}
                "1" => bits |= 1 << i,
                _ => return Err(MasseyError::Syntax(text.to_string())),
            }
        }
        Ok(Character::new(bits, len))
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = (0..self.len)
            .map(|i| if self.bit(i) { "1".into() } else { "0".into() })
            .collect();
        write!(f, "{}", s.join(","))
    }
}

fn mask(len: usize) -> u32 {
    if len >= 32 {
        u32::MAX
    } else {
        (1u32 << len) - 1
    }
}

/// The bilinear cup product on degree-1 classes, in the coordinates of a
/// degree-2 monomial transversal of the dual algebra.
#[derive(Debug, Clone)]
pub struct CupTable {
    generator_count: usize,
    h2: H2Basis,
    class_names: Vec<String>,
}

impl CupTable {
    fn from_dual(dual: &crate::quad::QuadraticPresentation, order: &GeneratorOrder) -> Self {
        let h2 = h2_basis(dual, order).expect("order covers the dual generators");
        let class_names = h2.classes.iter().map(|&m| dual.monomial_name(m)).collect();
        CupTable {
            generator_count: dual.generator_count(),
            h2,
            class_names,
        }
    }

    /// Table for the twisted 4-cycle group, coordinates (chi0, psi1..psi4).
    pub fn c4_delta() -> Self {
        let pres = build_twisted(&Graph::cycle(4).unwrap(), &ZVector::trivial(4)).unwrap();
        let dual = quadratic_dual(&pres);
        let order = GeneratorOrder::parse("x0,x1,x3,x2,x4", &pres).unwrap();
        Self::from_dual(&dual, &order)
    }

    /// Table for the plain 4-cycle group, coordinates (psi1..psi4).
    pub fn c4_raag() -> Self {
        let pres = build_untwisted(&Graph::cycle(4).unwrap());
        let dual = quadratic_dual(&pres);
        let order = GeneratorOrder::natural(pres.generator_count());
        Self::from_dual(&dual, &order)
    }

    pub fn dimension(&self) -> usize {
        self.h2.dimension()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Cup product in transversal coordinates.
    pub fn cup(&self, a: &Character, b: &Character) -> Result<Vec<u64>, MasseyError> {
        if a.len() != self.generator_count || b.len() != self.generator_count {
            return Err(MasseyError::CharacterLength {
                got: a.len().max(b.len()),
                expected: self.generator_count,
            });
        }
        let mut acc = vec![0u64; self.h2.words()];
        for i in 0..self.generator_count {
            if !a.bit(i) {
                continue;
            }
            for j in 0..self.generator_count {
                if !b.bit(j) {
                    continue;
                }
                for (w, &v) in self
                    .h2
                    .reduce_monomial(self.generator_count, (i, j))
                    .iter()
                    .enumerate()
                {
                    acc[w] ^= v;
                }
            }
        }
        Ok(acc)
    }

    pub fn cup_vanishes(&self, a: &Character, b: &Character) -> Result<bool, MasseyError> {
        Ok(self.cup(a, b)?.iter().all(|&w| w == 0))
    }
}

/// Cup vanishing for the free product of involutions: the degree-2
/// cohomology splits over the factors, so a cup product vanishes iff the
/// coordinatewise product is zero everywhere.
pub fn sap_cup_vanishes(a: &Character, b: &Character) -> bool {
    a.bits() & b.bits() == 0
}

fn cup_vanishes(
    target: Target,
    table: Option<&CupTable>,
    a: &Character,
    b: &Character,
) -> Result<bool, MasseyError> {
    match target {
        Target::Sap(_) => Ok(sap_cup_vanishes(a, b)),
        Target::C4Delta | Target::C4Raag => table
            .expect("table provided for cup targets")
            .cup_vanishes(a, b),
    }
}

/// Classification of a vanishing pair over the twisted 4-cycle group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaVanishingClass {
    /// Both in the span of (chi0, psi1, psi3), both different from chi0.
    BothG13,
    /// Both in the span of (chi0, psi2, psi4), both different from chi0.
    BothG24,
    /// Second = first + chi0, neither in either span.
    ChiShift,
}

/// Classification of a vanishing pair over the plain 4-cycle group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RaagVanishingClass {
    BothF13,
    BothF24,
    Equal,
}

const G13_MASK: u32 = 0b01011; // chi0, psi1, psi3
const G24_MASK: u32 = 0b10101; // chi0, psi2, psi4
const CHI0: u32 = 0b00001;
const F13_MASK: u32 = 0b0101; // psi1, psi3
const F24_MASK: u32 = 0b1010; // psi2, psi4

fn in_span(c: &Character, mask: u32) -> bool {
    c.bits() & !mask == 0
}

/// Classify a nonzero vanishing pair over the twisted 4-cycle group. The
/// three classes are mutually exclusive and cover every vanishing pair;
/// violating either property is an internal error, not an input error.
pub fn classify_vanishing_pair_delta(
    table: &CupTable,
    a: &Character,
    b: &Character,
) -> Result<DeltaVanishingClass, MasseyError> {
    if a.is_zero() || b.is_zero() {
        return Err(MasseyError::ZeroCharacter);
    }
    if !table.cup_vanishes(a, b)? {
        return Err(MasseyError::ConsecutiveCupNonzero(0, 1));
    }
    let both_g13 =
        in_span(a, G13_MASK) && in_span(b, G13_MASK) && a.bits() != CHI0 && b.bits() != CHI0;
    let both_g24 =
        in_span(a, G24_MASK) && in_span(b, G24_MASK) && a.bits() != CHI0 && b.bits() != CHI0;
    let neither = |c: &Character| !in_span(c, G13_MASK) && !in_span(c, G24_MASK);
    let shift = b.bits() == a.bits() ^ CHI0 && neither(a) && neither(b);
    match (both_g13, both_g24, shift) {
        (true, false, false) => Ok(DeltaVanishingClass::BothG13),
        (false, true, false) => Ok(DeltaVanishingClass::BothG24),
        (false, false, true) => Ok(DeltaVanishingClass::ChiShift),
        (false, false, false) => Err(MasseyError::NoVanishingClass),
        _ => Err(MasseyError::Internal(format!(
            "vanishing pair {a}, {b} satisfies more than one class"
        ))),
    }
}

/// Classify a nonzero vanishing pair over the plain 4-cycle group. The
/// stated alternatives can overlap (equal characters inside a common
/// factor), so the classifier reports the first that applies, in the order
/// F13, F24, equal.
pub fn classify_vanishing_pair_raag(
    table: &CupTable,
    a: &Character,
    b: &Character,
) -> Result<RaagVanishingClass, MasseyError> {
    if a.is_zero() || b.is_zero() {
        return Err(MasseyError::ZeroCharacter);
    }
    if !table.cup_vanishes(a, b)? {
        return Err(MasseyError::ConsecutiveCupNonzero(0, 1));
    }
    if in_span(a, F13_MASK) && in_span(b, F13_MASK) {
        Ok(RaagVanishingClass::BothF13)
    } else if in_span(a, F24_MASK) && in_span(b, F24_MASK) {
        Ok(RaagVanishingClass::BothF24)
    } else if a == b {
        Ok(RaagVanishingClass::Equal)
    } else {
        Err(MasseyError::NoVanishingClass)
    }
}

/// Which construction solved one maximal nonzero run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunCase {
    /// Delegated to the free-product superdiagonal construction through the
    /// (x0,x1,x3) subgroup.
    SubgroupG13,
    /// Same through (x0,x2,x4).
    SubgroupG24,
    /// Alternating chain `alpha + chi0`: shift matrix plus an inverting
    /// involution.
    ChiChain,
    /// Plain group, characters inside (psi1, psi3).
    FactorF13,
    /// Plain group, characters inside (psi2, psi4).
    FactorF24,
    /// Plain group, all characters equal: a single shift matrix.
    EqualChain,
    /// Free product of involutions: superdiagonal matrices.
    Superdiagonal,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    /// 1-based index of the first character of the run.
    pub start: usize,
    /// 1-based index of the last character of the run.
    pub end: usize,
    pub case: RunCase,
    /// Short case letter for the twisted 4-cycle target: a (subgroup
    /// through x1,x3), b (subgroup through x2,x4), c (chain).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub letter: Option<char>,
}

/// A verified solution: one unitriangular image per generator with the
/// prescribed superdiagonals.
#[derive(Debug, Clone)]
pub struct MasseySolution {
    pub target_size: usize,
    /// `images[g]` is the image of generator `g` (slot 0 unused for targets
    /// without an order-2 generator).
    pub images: Vec<UnipotentMatrix>,
    pub runs: Vec<RunReport>,
}

/// Solve the prescribed-superdiagonal lifting problem for a character
/// sequence with vanishing consecutive cup products.
///
/// Zero characters split the sequence into maximal nonzero runs; each run is
/// solved in its own block and the blocks are assembled block-diagonally,
/// which keeps every zero superdiagonal position zero. The output is
/// re-verified against the target's relators and the superdiagonal contract
/// before being returned.
pub fn strong_massey_solve(
    target: Target,
    alphas: &[Character],
) -> Result<MasseySolution, MasseyError> {
    let clen = target.character_len();
    for a in alphas {
        if a.len() != clen {
            return Err(MasseyError::CharacterLength {
                got: a.len(),
                expected: clen,
            });
        }
    }
    let table = match target {
        Target::C4Delta => Some(CupTable::c4_delta()),
        Target::C4Raag => Some(CupTable::c4_raag()),
        Target::Sap(_) => None,
    };
    for i in 0..alphas.len().saturating_sub(1) {
        if !cup_vanishes(target, table.as_ref(), &alphas[i], &alphas[i + 1])? {
            return Err(MasseyError::ConsecutiveCupNonzero(i + 1, i + 2));
        }
    }

    let n = alphas.len();
    let size = n + 1;
    let mut images = vec![UnipotentMatrix::identity(size).unwrap(); target.image_slots()];
    let mut runs = Vec::new();

    let mut start = 0;
    while start < n {
        if alphas[start].is_zero() {
            start += 1;
            continue;
        }
        let mut end = start;
        while end + 1 < n && !alphas[end + 1].is_zero() {
            end += 1;
        }
        let run = &alphas[start..=end];
        let (block, case) = solve_run(target, run)?;
        for (g, image) in block.iter().enumerate() {
            for i in 1..=run.len() + 1 {
                for j in (i + 1)..=run.len() + 1 {
                    if image.entry(i, j) {
                        images[g].set_entry(start + i, start + j, true);
                    }
                }
            }
        }
        runs.push(RunReport {
            start: start + 1,
            end: end + 1,
            case,
            letter: match case {
                RunCase::SubgroupG13 => Some('a'),
                RunCase::SubgroupG24 => Some('b'),
                RunCase::ChiChain => Some('c'),
                _ => None,
            },
        });
        start = end + 1;
    }

    let solution = MasseySolution {
        target_size: size,
        images,
        runs,
    };
    check_massey_postconditions(target, alphas, &solution)?;
    Ok(solution)
}

fn check_massey_postconditions(
    target: Target,
    alphas: &[Character],
    solution: &MasseySolution,
) -> Result<(), MasseyError> {
    let verdict = verify_morphism(&target.relators(), &solution.images)
        .map_err(|e| MasseyError::Internal(e.to_string()))?;
    if let Err(failure) = verdict {
        return Err(MasseyError::Internal(format!(
            "relator {} evaluates to a non-identity matrix",
            failure.relator
        )));
    }
    for &g in &target.generator_indices() {
        let image = &solution.images[g as usize];
        for (i, alpha) in alphas.iter().enumerate() {
            let want = target.char_value(alpha, g);
            if image.entry(i + 1, i + 2) != want {
                return Err(MasseyError::Internal(format!(
                    "superdiagonal {} of generator {} disagrees with the character",
                    i + 1,
                    g
                )));
            }
        }
    }
    Ok(())
}

/// Solve one run of nonzero characters; returns images in `U_{m+1}` indexed
/// by generator slot.
fn solve_run(
    target: Target,
    run: &[Character],
) -> Result<(Vec<UnipotentMatrix>, RunCase), MasseyError> {
    let m = run.len();
    let size = m + 1;
    match target {
        Target::Sap(k) => {
            let mut images = vec![UnipotentMatrix::identity(size).unwrap(); k + 1];
            for j in 1..=k {
                for (i, alpha) in run.iter().enumerate() {
                    if alpha.bit(j - 1) {
                        images[j].set_entry(i + 1, i + 2, true);
                    }
                }
            }
            Ok((images, RunCase::Superdiagonal))
        }
        Target::C4Raag => {
            let all_f13 = run.iter().all(|a| in_span(a, F13_MASK));
            let all_f24 = run.iter().all(|a| in_span(a, F24_MASK));
            let all_equal = run.windows(2).all(|w| w[0] == w[1]);
            let mut images = vec![UnipotentMatrix::identity(size).unwrap(); 5];
            if all_f13 || all_f24 {
                for j in 1..=4u32 {
                    for (i, alpha) in run.iter().enumerate() {
                        if alpha.bit(j as usize - 1) {
                            images[j as usize].set_entry(i + 1, i + 2, true);
                        }
                    }
                }
                Ok((
                    images,
                    if all_f13 {
                        RunCase::FactorF13
                    } else {
                        RunCase::FactorF24
                    },
                ))
            } else if all_equal {
                let shift = full_shift(size).map_err(|e| MasseyError::Internal(e.to_string()))?;
                for j in 1..=4usize {
                    if run[0].bit(j - 1) {
                        images[j] = shift.clone();
                    }
                }
                Ok((images, RunCase::EqualChain))
            } else {
                Err(MasseyError::NoVanishingClass)
            }
        }
        Target::C4Delta => {
            let chi0 = Character::new(CHI0, 5);
            let chain = m >= 2 && run.windows(2).all(|w| w[1] == w[0].add(&chi0));
            if chain {
                return solve_delta_chain(run).map(|imgs| (imgs, RunCase::ChiChain));
            }
            let all_g13 = run.iter().all(|a| in_span(a, G13_MASK));
            let all_g24 = run.iter().all(|a| in_span(a, G24_MASK));
            if all_g13 {
                solve_delta_subgroup(run, 1, 3).map(|imgs| (imgs, RunCase::SubgroupG13))
            } else if all_g24 {
                solve_delta_subgroup(run, 2, 4).map(|imgs| (imgs, RunCase::SubgroupG24))
            } else if m == 1 {
                solve_delta_chain(run).map(|imgs| (imgs, RunCase::ChiChain))
            } else {
                Err(MasseyError::NoVanishingClass)
            }
        }
    }
}

/// Case: every character lies in the subgroup generated by x0 and the two
/// RAAG generators `u`, `v`. That subgroup is a free product of three
/// involutions `y1 = x0`, `y2 = x0 x_u`, `y3 = x0 x_v`, so pull the
/// characters back, solve with superdiagonal involutions, and push forward:
/// `x0 -> s1`, `x_u -> s1 s2`, `x_v -> s1 s3`; the other generators map to
/// the identity.
fn solve_delta_subgroup(
    run: &[Character],
    u: usize,
    v: usize,
) -> Result<Vec<UnipotentMatrix>, MasseyError> {
    let m = run.len();
    let size = m + 1;
    let mut sigma = vec![UnipotentMatrix::identity(size).unwrap(); 4];
    for (i, alpha) in run.iter().enumerate() {
        let g1 = alpha.bit(0);
        let g2 = alpha.bit(0) ^ alpha.bit(u);
        let g3 = alpha.bit(0) ^ alpha.bit(v);
        // Pulled-back consecutive products must vanish coordinatewise;
        // guaranteed by the vanishing classification.
        if i + 1 < m {
            let next = &run[i + 1];
            let n1 = next.bit(0);
            let n2 = next.bit(0) ^ next.bit(u);
            let n3 = next.bit(0) ^ next.bit(v);
            if (g1 && n1) || (g2 && n2) || (g3 && n3) {
                return Err(MasseyError::Internal(
                    "subgroup pullback has a nonvanishing consecutive product".into(),
                ));
            }
        }
        for (j, bit) in [g1, g2, g3].into_iter().enumerate() {
            if bit {
                sigma[j + 1].set_entry(i + 1, i + 2, true);
            }
        }
    }
    let mut images = vec![UnipotentMatrix::identity(size).unwrap(); 5];
    images[0] = sigma[1].clone();
    images[u] = sigma[1]
        .mul(&sigma[2])
        .map_err(|e| MasseyError::Internal(e.to_string()))?;
    images[v] = sigma[1]
        .mul(&sigma[3])
        .map_err(|e| MasseyError::Internal(e.to_string()))?;
    Ok(images)
}

/// Case: the characters alternate `alpha, alpha + chi0, alpha, ...` (or the
/// run is a single character outside both subgroups). The order-2 generator
/// maps to an involution with the alternating superdiagonal that conjugates
/// the full shift to its inverse; every RAAG generator with character value
/// 1 maps to the shift.
fn solve_delta_chain(run: &[Character]) -> Result<Vec<UnipotentMatrix>, MasseyError> {
    let m = run.len();
    let size = m + 1;
    let b = inverting_involution(size, run[0].bit(0))
        .map_err(|e| MasseyError::Internal(e.to_string()))?;
    let a = full_shift(size).map_err(|e| MasseyError::Internal(e.to_string()))?;
    let mut images = vec![UnipotentMatrix::identity(size).unwrap(); 5];
    images[0] = b;
    for j in 1..=4usize {
        if run[0].bit(j) {
            images[j] = a.clone();
        }
    }
    Ok(images)
}

/// Noncommutative F2 series on `Y1..Yk` modulo all squares `Yi^2`,
/// truncated by degree. The basis is the set of words with no two adjacent
/// equal letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries2 {
    k: usize,
    trunc: usize,
    /// Words with coefficient 1; the empty word is the constant term.
    terms: BTreeSet<Vec<u8>>,
}

impl TruncatedSeries2 {
    pub fn one(k: usize, trunc: usize) -> Self {
        let mut terms = BTreeSet::new();
        terms.insert(Vec::new());
        TruncatedSeries2 { k, trunc, terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = &Vec<u8>> {
        self.terms.iter()
    }

    pub fn contains(&self, word: &[u8]) -> bool {
        self.terms.contains(word)
    }

    pub fn mul(&self, other: &TruncatedSeries2) -> TruncatedSeries2 {
        debug_assert_eq!(self.k, other.k);
        debug_assert_eq!(self.trunc, other.trunc);
        let mut terms = BTreeSet::new();
        for t1 in &self.terms {
            for t2 in &other.terms {
                if t1.len() + t2.len() > self.trunc {
                    continue;
                }
                // Adjacent equal letters square to zero.
                if let (Some(&last), Some(&first)) = (t1.last(), t2.first()) {
                    if last == first {
                        continue;
                    }
                }
                let mut w = t1.clone();
                w.extend_from_slice(t2);
                if !terms.remove(&w) {
                    terms.insert(w);
                }
            }
        }
        TruncatedSeries2 {
            k: self.k,
            trunc: self.trunc,
            terms,
        }
    }

    /// Smallest degree >= 1 with a nonzero coefficient.
    pub fn min_positive_degree(&self) -> Option<usize> {
        self.terms
            .iter()
            .filter(|w| !w.is_empty())
            .map(|w| w.len())
            .min()
    }

    /// Words of one degree, in lexicographic order.
    pub fn terms_of_degree(&self, d: usize) -> Vec<Vec<u8>> {
        self.terms
            .iter()
            .filter(|w| w.len() == d)
            .cloned()
            .collect()
    }
}

/// Image of a word under `y_i -> 1 + Y_i` in the truncated series ring.
/// Exponents are normalised mod 2: the generators are involutions, so an
/// inverse letter contributes the same factor.
pub fn magnus_expand(k: usize, w: &GroupWord, trunc: usize) -> Result<TruncatedSeries2, KuError> {
    let mut acc = TruncatedSeries2::one(k, trunc);
    for letter in w.letters() {
        if letter.gen < 1 || letter.gen as usize > k {
            return Err(KuError::GeneratorRange(letter.gen, k));
        }
        let mut factor = TruncatedSeries2::one(k, trunc);
        factor.terms.insert(vec![letter.gen as u8]);
        acc = acc.mul(&factor);
    }
    Ok(acc)
}

/// Normal form in the free product of involutions: exponents collapse mod 2
/// and adjacent equal letters cancel.
pub fn free_product_reduce(letters: impl IntoIterator<Item = u8>) -> Vec<u8> {
    let mut stack: Vec<u8> = Vec::new();
    for l in letters {
        if stack.last() == Some(&l) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    stack
}

fn word_to_sap_letters(w: &GroupWord, k: usize) -> Result<Vec<u8>, KuError> {
    let mut out = Vec::with_capacity(w.len());
    for letter in w.letters() {
        if letter.gen < 1 || letter.gen as usize > k {
            return Err(KuError::GeneratorRange(letter.gen, k));
        }
        out.push(letter.gen as u8);
    }
    Ok(out)
}

/// A representation detecting a nontrivial element of the free product of
/// involutions.
#[derive(Debug, Clone)]
pub struct SapWitness {
    /// Matrix size: one more than the detected filtration depth.
    pub n: usize,
    /// The witness word whose coefficient drives the construction.
    pub word: Vec<u8>,
    /// `images[i]` is the image of `y_i` (slot 0 unused).
    pub images: Vec<UnipotentMatrix>,
    /// The value of the element, with a 1 in the top-right corner.
    pub value: UnipotentMatrix,
}

/// Detect `g != 1` in the free product of `k` involutions and build a
/// unitriangular representation with `rho(g) != I`.
///
/// The element's expansion `1 + sum eps_W(g) W + higher` has a least degree
/// `n-1`; the lexicographically least word `W` with coefficient 1 drives
/// the construction `y_i -> I + sum_{W_j = i} delta_{j,j+1}` in `U_n`, which
/// sends `g` to a matrix with top-right entry 1.
pub fn ku_witness_sap(k: usize, g: &GroupWord, trunc: usize) -> Result<SapWitness, KuError> {
    let reduced = free_product_reduce(word_to_sap_letters(g, k)?);
    if reduced.is_empty() {
        return Err(KuError::TrivialElement);
    }
    let reduced_word = GroupWord::from_letters(reduced.iter().map(|&l| (l as u32, false)));
    let series = magnus_expand(k, &reduced_word, trunc)?;
    let depth = series
        .min_positive_degree()
        .ok_or(KuError::DepthExceedsTruncation { trunc })?;
    let n = depth + 1;
    let word = series
        .terms_of_degree(depth)
        .into_iter()
        .next()
        .expect("a term exists at the minimal degree");
    let mut images = vec![UnipotentMatrix::identity(n).unwrap(); k + 1];
    for (j, &letter) in word.iter().enumerate() {
        images[letter as usize].set_entry(j + 1, j + 2, true);
    }
    let mut value = UnipotentMatrix::identity(n).unwrap();
    for &l in &reduced {
        value = value
            .mul(&images[l as usize])
            .map_err(|e| KuError::Internal(e.to_string()))?;
    }
    if value.is_identity() || !value.entry(1, n) {
        return Err(KuError::Internal(
            "witness value does not detect the element".into(),
        ));
    }
    for i in 1..=k {
        if !images[i].is_involution() {
            return Err(KuError::Internal(format!(
                "image of y{i} is not an involution"
            )));
        }
    }
    Ok(SapWitness {
        n,
        word,
        images,
        value,
    })
}

/// Which retraction detected the element of the twisted 4-cycle group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum C4Projection {
    G13,
    G24,
}

#[derive(Debug, Clone)]
pub struct C4Witness {
    pub projection: C4Projection,
    pub n: usize,
    pub word: Vec<u8>,
    /// `images[g]` is the image of `x_g`, g = 0..4.
    pub images: Vec<UnipotentMatrix>,
    pub value: UnipotentMatrix,
}

/// Letters of the image of one generator under the retraction that kills
/// the complementary pair of RAAG generators and identifies the remaining
/// subgroup with a free product of three involutions.
fn c4_projection_letters(gen: u32, inverse: bool, keep: (u32, u32)) -> Vec<u8> {
    let image: Vec<u8> = if gen == 0 {
        vec![1]
    } else if gen == keep.0 {
        vec![1, 2]
    } else if gen == keep.1 {
        vec![1, 3]
    } else {
        vec![]
    };
    if inverse {
        image.into_iter().rev().collect()
    } else {
        image
    }
}

fn project_c4_word(w: &GroupWord, keep: (u32, u32)) -> Vec<u8> {
    let mut letters = Vec::new();
    for l in w.letters() {
        letters.extend(c4_projection_letters(l.gen, l.inverse, keep));
    }
    free_product_reduce(letters)
}

/// Detect a nontrivial element of the twisted 4-cycle group and produce a
/// representation with a non-identity value at it.
///
/// The group splits over the subgroups generated by (x0,x1,x3) and
/// (x0,x2,x4); the two retractions are morphisms and are jointly faithful,
/// so an element killed by both is trivial. A retraction image that is
/// nontrivial but has filtration depth beyond the truncation makes the
/// check inconclusive at this truncation, which is reported rather than
/// asserted trivial.
pub fn ku_witness_c4(g: &GroupWord, trunc: usize) -> Result<C4Witness, KuError> {
    for l in g.letters() {
        if l.gen > 4 {
            return Err(KuError::GeneratorRange(l.gen, 4));
        }
    }
    let mut depth_exceeded = false;
    for (projection, keep) in [
        (C4Projection::G13, (1u32, 3u32)),
        (C4Projection::G24, (2, 4)),
    ] {
        let image = project_c4_word(g, keep);
        if image.is_empty() {
            continue;
        }
        let image_word = GroupWord::from_letters(image.iter().map(|&l| (l as u32, false)));
        match ku_witness_sap(3, &image_word, trunc) {
            Ok(w) => {
                let mut images = vec![UnipotentMatrix::identity(w.n).unwrap(); 5];
                images[0] = w.images[1].clone();
                let compose = |a: &UnipotentMatrix, b: &UnipotentMatrix| a.mul(b).unwrap();
                images[keep.0 as usize] = compose(&w.images[1], &w.images[2]);
                images[keep.1 as usize] = compose(&w.images[1], &w.images[3]);
                let mut value = UnipotentMatrix::identity(w.n).unwrap();
                for l in g.letters() {
                    let img = &images[l.gen as usize];
                    let factor = if l.inverse {
                        img.inverse()
                    } else {
                        img.clone()
                    };
                    value = value.mul(&factor).unwrap();
                }
                if value.is_identity() {
                    return Err(KuError::Internal(
                        "projected witness failed to detect the element".into(),
                    ));
                }
                let relators = Target::C4Delta.relators();
                let verdict = verify_morphism(&relators, &images)
                    .map_err(|e| KuError::Internal(e.to_string()))?;
                if verdict.is_err() {
                    return Err(KuError::Internal(
                        "composed images do not satisfy the relators".into(),
                    ));
                }
                return Ok(C4Witness {
                    projection,
                    n: w.n,
                    word: w.word,
                    images,
                    value,
                });
            }
            Err(KuError::DepthExceedsTruncation { .. }) => {
                depth_exceeded = true;
            }
            Err(e) => return Err(e),
        }
    }
    if depth_exceeded {
        Err(KuError::DepthExceedsTruncation { trunc })
    } else {
        Err(KuError::TrivialElement)
    }
}
