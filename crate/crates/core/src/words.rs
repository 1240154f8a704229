//! Exact element arithmetic in discrete right-angled Artin groups.
//!
//! Words are sequences of signed generators. Equality in the pro-2 RAAG is
//! decided in the discrete RAAG: discrete RAAGs are residually 2, so they
//! embed in their pro-2 completions and word inputs are equal in one group
//! iff they are equal in the other.
//!
//! The normal form is the unique lexicographically least fully reduced
//! representative: first cancel inverse pairs of the same generator whenever
//! all letters between them commute with it, then take the least
//! linearisation of the resulting trace (greedily emit the smallest letter
//! among those with no earlier non-commuting letter pending).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("invalid word syntax at token {index}: {token:?}")]
    Syntax { index: usize, token: String },
    #[error("generator index {0} out of range 1..={1}")]
    OutOfRange(u32, usize),
    #[error("generator x0 is reserved and is not a RAAG generator")]
    ReservedGenerator,
    #[error("twist vector has {got} entries, expected {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("twist document is not valid JSON: {0}")]
    Json(String),
}

/// One signed generator occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: u32,
    pub inverse: bool,
}

/// A word in generators `x_0..x_d`, as written (not reduced). Index 0 is
/// reserved for the order-2 generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupWord {
    letters: Vec<Letter>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    pub fn from_letters(letters: impl IntoIterator<Item = (u32, bool)>) -> Self {
        GroupWord {
            letters: letters
                .into_iter()
                .map(|(gen, inverse)| Letter { gen, inverse })
                .collect(),
        }
    }

    /// A single generator `x_k`.
    pub fn generator(gen: u32) -> Self {
        GroupWord::from_letters([(gen, false)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter {
                    gen: l.gen,
                    inverse: !l.inverse,
                })
                .collect(),
        }
    }

    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        GroupWord { letters }
    }

    /// Commutator `[a,b] = a^-1 b^-1 a b`.
    pub fn commutator(a: &GroupWord, b: &GroupWord) -> GroupWord {
        a.inverse().concat(&b.inverse()).concat(a).concat(b)
    }

    pub fn max_generator(&self) -> Option<u32> {
        self.letters.iter().map(|l| l.gen).max()
    }

    /// Exponent sum of each generator modulo 2, as a bitmask over
    /// generators `1..=d` (bit `k-1` for `x_k`). Index 0 is ignored.
    pub fn exponent_parity(&self, d: usize) -> u64 {
        let mut bits = 0u64;
        for l in &self.letters {
            if l.gen >= 1 && l.gen as usize <= d {
                bits ^= 1 << (l.gen - 1);
            }
        }
        bits
    }

    /// Parse the text form: `*`-separated tokens `x<k>`, `x<k>^-1`, or `1`.
    /// `prefix` is the generator letter, usually `x` (use `y` for free
    /// products of involutions).
    pub fn parse_with_prefix(text: &str, prefix: char) -> Result<Self, WordError> {
        let mut letters = Vec::new();
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(WordError::Syntax {
                index: 0,
                token: String::new(),
            });
        }
        for (index, raw) in trimmed.split('*').enumerate() {
            let token = raw.trim();
            if token == "1" {
                continue;
            }
            let body = token
                .strip_prefix(prefix)
                .ok_or_else(|| WordError::Syntax {
                    index,
                    token: token.to_string(),
                })?;
            let (digits, inverse) = match body.strip_suffix("^-1") {
                Some(d) => (d, true),
                None => (body, false),
            };
            let gen: u32 = digits.parse().map_err(|_| WordError::Syntax {
                index,
                token: token.to_string(),
            })?;
            letters.push(Letter { gen, inverse });
        }
        Ok(GroupWord { letters })
    }

    pub fn parse(text: &str) -> Result<Self, WordError> {
        Self::parse_with_prefix(text, 'x')
    }

    fn check_raag_range(&self, d: usize) -> Result<(), WordError> {
        for l in &self.letters {
            if l.gen == 0 {
                return Err(WordError::ReservedGenerator);
            }
            if l.gen as usize > d {
                return Err(WordError::OutOfRange(l.gen, d));
            }
        }
        Ok(())
    }

    pub fn display_with_prefix(&self, prefix: char) -> String {
        if self.letters.is_empty() {
            return "1".to_string();
        }
        self.letters
            .iter()
            .map(|l| {
                if l.inverse {
                    format!("{prefix}{}^-1", l.gen)
                } else {
                    format!("{prefix}{}", l.gen)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with_prefix('x'))
    }
}

/// An element of the RAAG over a fixed graph, stored in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RaagElement {
    letters: Vec<Letter>,
}

impl RaagElement {
    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn word(&self) -> GroupWord {
        GroupWord {
            letters: self.letters.clone(),
        }
    }
}

impl fmt::Display for RaagElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.word())
    }
}

/// Letters commute iff they involve distinct generators joined by an edge.
fn commute(g: &Graph, a: u32, b: u32) -> bool {
    a != b && g.has_edge(a, b)
}

/// Normal form of `w` in the RAAG over `g`. Two words have equal normal
/// forms iff they represent the same group element.
pub fn normal_form(g: &Graph, w: &GroupWord) -> Result<RaagElement, WordError> {
    w.check_raag_range(g.vertex_count())?;
    let mut letters = w.letters.clone();
    reduce(g, &mut letters);
    let canonical = least_linearisation(g, &letters);
    Ok(RaagElement { letters: canonical })
}

/// Cancel inverse pairs of the same generator separated only by letters
/// commuting with it, to a fixpoint. The result is a geodesic representative.
fn reduce(g: &Graph, letters: &mut Vec<Letter>) {
    'outer: loop {
        for i in 0..letters.len() {
            let li = letters[i];
            let mut j = i + 1;
            while j < letters.len() {
                let lj = letters[j];
                if lj.gen == li.gen {
                    if lj.inverse != li.inverse {
                        letters.remove(j);
                        letters.remove(i);
                        continue 'outer;
                    }
                    break;
                }
                if !commute(g, li.gen, lj.gen) {
                    break;
                }
                j += 1;
            }
        }
        return;
    }
}

/// Lexicographically least linearisation of the trace of a reduced word:
/// repeatedly emit the smallest letter all of whose earlier letters commute
/// with it.
fn least_linearisation(g: &Graph, letters: &[Letter]) -> Vec<Letter> {
    let mut remaining: Vec<Letter> = letters.to_vec();
    let mut out = Vec::with_capacity(letters.len());
    while !remaining.is_empty() {
        let mut best: Option<usize> = None;
        'cand: for (idx, cand) in remaining.iter().enumerate() {
            for earlier in &remaining[..idx] {
                if !commute(g, earlier.gen, cand.gen) {
                    continue 'cand;
                }
            }
            match best {
                None => best = Some(idx),
                Some(b) if *cand < remaining[b] => best = Some(idx),
                _ => {}
            }
        }
        let idx = best.expect("a minimal letter always exists");
        out.push(remaining.remove(idx));
    }
    out
}

/// Twist vector: one word per RAAG generator, written in generators
/// `x_1..x_d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZVector {
    entries: Vec<GroupWord>,
}

/// JSON wire form of a twist vector: `{"z": ["1","1","x5","x5","1"]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZVectorDocument {
    pub z: Vec<String>,
}

impl ZVector {
    pub fn new(entries: Vec<GroupWord>) -> Self {
        ZVector { entries }
    }

    /// The trivial twist `(1,...,1)` on `d` generators.
    pub fn trivial(d: usize) -> Self {
        ZVector {
            entries: vec![GroupWord::identity(); d],
        }
    }

    pub fn parse(text: &str, expected_len: usize) -> Result<Self, WordError> {
        let doc: ZVectorDocument =
            serde_json::from_str(text).map_err(|e| WordError::Json(e.to_string()))?;
        Self::from_document(&doc, expected_len)
    }

    pub fn from_document(doc: &ZVectorDocument, expected_len: usize) -> Result<Self, WordError> {
        if doc.z.len() != expected_len {
            return Err(WordError::WrongLength {
                got: doc.z.len(),
                expected: expected_len,
            });
        }
        let entries = doc
            .z
            .iter()
            .map(|s| GroupWord::parse(s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ZVector { entries })
    }

    pub fn to_document(&self) -> ZVectorDocument {
        ZVectorDocument {
            z: self.entries.iter().map(|w| w.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, k: usize) -> &GroupWord {
        &self.entries[k - 1]
    }

    pub fn entries(&self) -> &[GroupWord] {
        &self.entries
    }

    pub fn is_trivial(&self) -> bool {
        self.entries.iter().all(|w| w.is_empty())
    }

    /// Degree-1 images: `epsilon[k-1]` is the exponent-sum vector of `z_k`
    /// reduced mod 2, as a bitmask over generators `1..=d`.
    pub fn epsilon(&self) -> Vec<u64> {
        let d = self.entries.len();
        self.entries.iter().map(|w| w.exponent_parity(d)).collect()
    }
}

/// Outcome of checking that the twist defines an order-two automorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeltaActionCheck {
    Valid,
    /// `[phi(x_u), phi(x_v)]` is not trivial for the edge `{u,v}`.
    EdgeViolation {
        u: u32,
        v: u32,
        commutator_normal_form: String,
    },
    /// `phi(phi(x_i))` differs from `x_i`.
    InvolutionViolation {
        i: u32,
        normal_form: String,
    },
}

impl DeltaActionCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, DeltaActionCheck::Valid)
    }
}

/// The generator images of the candidate automorphism:
/// `phi(x_i) = z_i^-1 x_i^-1 z_i`.
fn phi_images(z: &ZVector) -> Vec<GroupWord> {
    (1..=z.len() as u32)
        .map(|i| {
            let zi = z.entry(i as usize);
            zi.inverse()
                .concat(&GroupWord::from_letters([(i, true)]))
                .concat(zi)
        })
        .collect()
}

/// Apply `phi` to a word letter by letter.
fn phi_apply(images: &[GroupWord], w: &GroupWord) -> GroupWord {
    let mut out = GroupWord::identity();
    for l in w.letters() {
        let img = &images[l.gen as usize - 1];
        out = if l.inverse {
            out.concat(&img.inverse())
        } else {
            out.concat(img)
        };
    }
    out
}

/// Check that `x_i -> z_i^-1 x_i^-1 z_i` extends to an automorphism of the
/// RAAG of order at most two, so the twisted semidirect product is
/// well-defined: (a) edge relations are preserved, (b) the square of the map
/// fixes every generator.
pub fn validate_delta_action(g: &Graph, z: &ZVector) -> Result<DeltaActionCheck, WordError> {
    if z.len() != g.vertex_count() {
        return Err(WordError::WrongLength {
            got: z.len(),
            expected: g.vertex_count(),
        });
    }
    for entry in z.entries() {
        entry.check_raag_range(g.vertex_count())?;
    }
    let images = phi_images(z);
    for (u, v) in g.edges() {
        let c = GroupWord::commutator(&images[u as usize - 1], &images[v as usize - 1]);
        let nf = normal_form(g, &c)?;
        if !nf.is_identity() {
            return Ok(DeltaActionCheck::EdgeViolation {
                u,
                v,
                commutator_normal_form: nf.to_string(),
            });
        }
    }
    for i in 1..=g.vertex_count() as u32 {
        let twice = phi_apply(&images, &images[i as usize - 1]);
        let nf = normal_form(g, &twice)?;
        if nf.word().letters()
            != [Letter {
                gen: i,
                inverse: false,
            }]
        {
            return Ok(DeltaActionCheck::InvolutionViolation {
                i,
                normal_form: nf.to_string(),
            });
        }
    }
    Ok(DeltaActionCheck::Valid)
}

/// Relator words of the twisted presentation on generators `x_0..x_d`:
/// `[x_u,x_v]` per edge, `[x_0,x_i^-1] x_i^2 [x_i,z_i]` per generator, and
/// `x_0^2`.
pub fn z_pres_relators(g: &Graph, z: &ZVector) -> Vec<GroupWord> {
    assert_eq!(z.len(), g.vertex_count());
    let x0 = GroupWord::generator(0);
    let mut relators = Vec::new();
    for (u, v) in g.edges() {
        relators.push(GroupWord::commutator(
            &GroupWord::generator(u),
            &GroupWord::generator(v),
        ));
    }
    for i in 1..=g.vertex_count() as u32 {
        let xi = GroupWord::generator(i);
        let xi_inv = xi.inverse();
        let square = xi.concat(&xi);
        let rel = GroupWord::commutator(&x0, &xi_inv)
            .concat(&square)
            .concat(&GroupWord::commutator(&xi, z.entry(i as usize)));
        relators.push(rel);
    }
    relators.push(x0.concat(&x0));
    relators
}
