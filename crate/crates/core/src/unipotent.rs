//! Exact arithmetic in the group of upper unitriangular matrices over F2.
//!
//! A matrix is stored as one bit row per matrix row, strictly upper entries
//! only; the diagonal is implicitly 1. Size is capped at 64 so each row is a
//! single word. The commutator convention is `[x,y] = x^-1 y^-1 x y`.

use std::fmt;

use thiserror::Error;

use crate::words::GroupWord;

pub const MAX_SIZE: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UnipotentError {
    #[error("matrix sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("matrix size {0} exceeds the supported maximum {MAX_SIZE}")]
    TooLarge(usize),
    #[error("word uses generator {0} but only {1} images were given")]
    MissingImage(u32, usize),
    #[error("the commutator equations have no solution of size {0}; the search was exhaustive")]
    SearchExhausted(usize),
    #[error("size must be greater than 2, got {0}")]
    SizeTooSmall(usize),
}

/// Upper unitriangular matrix over F2.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnipotentMatrix {
    size: usize,
    /// `rows[i]` bit `j` set iff the entry at (i,j) is 1, for j > i
    /// (0-based). Bits at positions <= i are always clear.
    rows: Vec<u64>,
}

impl UnipotentMatrix {
    pub fn identity(size: usize) -> Result<Self, UnipotentError> {
        if size > MAX_SIZE {
            return Err(UnipotentError::TooLarge(size));
        }
        Ok(UnipotentMatrix {
            size,
            rows: vec![0; size],
        })
    }

    /// Identity plus the elementary matrix with a single 1 at 1-based
    /// position (i, j), i < j.
    pub fn delta(size: usize, i: usize, j: usize) -> Result<Self, UnipotentError> {
        let mut m = Self::identity(size)?;
        assert!(
            i >= 1 && i < j && j <= size,
            "delta entry must be strictly upper"
        );
        m.rows[i - 1] |= 1 << (j - 1);
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Entry at 1-based position (i, j).
    pub fn entry(&self, i: usize, j: usize) -> bool {
        if i == j {
            return true;
        }
        if j < i {
            return false;
        }
        self.rows[i - 1] & (1 << (j - 1)) != 0
    }

    pub fn set_entry(&mut self, i: usize, j: usize, value: bool) {
        assert!(i >= 1 && i < j && j <= self.size);
        if value {
            self.rows[i - 1] |= 1 << (j - 1);
        } else {
            self.rows[i - 1] &= !(1 << (j - 1));
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    /// The superdiagonal entries (i, i+1), i = 1..size-1.
    pub fn superdiagonal(&self) -> Vec<bool> {
        (1..self.size).map(|i| self.entry(i, i + 1)).collect()
    }

    fn check_size(&self, other: &Self) -> Result<(), UnipotentError> {
        if self.size != other.size {
            return Err(UnipotentError::SizeMismatch(self.size, other.size));
        }
        Ok(())
    }

    /// Product: with `A = I + N` and `B = I + M`, the strictly upper part of
    /// `AB` is `N + M + NM`, computed row-wise.
    pub fn mul(&self, other: &Self) -> Result<Self, UnipotentError> {
        self.check_size(other)?;
        let mut rows = vec![0u64; self.size];
        for i in 0..self.size {
            let mut acc = self.rows[i] ^ other.rows[i];
            let mut support = self.rows[i];
            while support != 0 {
                let k = support.trailing_zeros() as usize;
                support &= support - 1;
                acc ^= other.rows[k];
            }
            rows[i] = acc;
        }
        Ok(UnipotentMatrix {
            size: self.size,
            rows,
        })
    }

    /// Inverse via the nilpotent geometric series `I + N + N^2 + ...`.
    pub fn inverse(&self) -> Self {
        let mut acc = self.rows.clone(); // N + N^2 + ...
        let mut power = self.rows.clone(); // current N^k
        loop {
            // next = N * power
            let mut next = vec![0u64; self.size];
            let mut nonzero = false;
            for i in 0..self.size {
                let mut row = 0u64;
                let mut support = self.rows[i];
                while support != 0 {
                    let k = support.trailing_zeros() as usize;
                    support &= support - 1;
                    row ^= power[k];
                }
                next[i] = row;
                nonzero |= row != 0;
            }
            if !nonzero {
                break;
            }
            for i in 0..self.size {
                acc[i] ^= next[i];
            }
            power = next;
        }
        UnipotentMatrix {
            size: self.size,
            rows: acc,
        }
    }

    /// Commutator `[a, b] = a^-1 b^-1 a b`.
    pub fn commutator(a: &Self, b: &Self) -> Result<Self, UnipotentError> {
        a.inverse().mul(&b.inverse())?.mul(a)?.mul(b)
    }

    pub fn pow(&self, exponent: i64) -> Self {
        let base = if exponent < 0 {
            self.inverse()
        } else {
            self.clone()
        };
        let mut result = UnipotentMatrix::identity(self.size).unwrap();
        for _ in 0..exponent.unsigned_abs() {
            result = result.mul(&base).unwrap();
        }
        result
    }

    /// `I + N` is an involution iff `N^2 = 0`.
    pub fn is_involution(&self) -> bool {
        self.mul(self).map(|sq| sq.is_identity()).unwrap_or(false)
    }

    /// Row-wise bit strings including the diagonal, e.g. `["110", "011", "001"]`.
    pub fn row_strings(&self) -> Vec<String> {
        (1..=self.size)
            .map(|i| {
                (1..=self.size)
                    .map(|j| if self.entry(i, j) { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for UnipotentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.row_strings() {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

/// Evaluation failure of one relator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismFailure {
    pub relator_index: usize,
    pub relator: String,
    pub value: UnipotentMatrix,
}

/// Evaluate every relator word on the generator images (`images[k]` is the
/// image of generator `k`); ok iff all evaluate to the identity.
pub fn verify_morphism(
    relators: &[GroupWord],
    images: &[UnipotentMatrix],
) -> Result<Result<(), MorphismFailure>, UnipotentError> {
    let size = match images.first() {
        Some(m) => m.size(),
        None => {
            return Ok(Ok(()));
        }
    };
    for m in images {
        if m.size() != size {
            return Err(UnipotentError::SizeMismatch(size, m.size()));
        }
    }
    for (relator_index, word) in relators.iter().enumerate() {
        let mut acc = UnipotentMatrix::identity(size)?;
        for letter in word.letters() {
            let img = images
                .get(letter.gen as usize)
                .ok_or(UnipotentError::MissingImage(letter.gen, images.len()))?;
            let factor = if letter.inverse {
                img.inverse()
            } else {
                img.clone()
            };
            acc = acc.mul(&factor)?;
        }
        if !acc.is_identity() {
            return Ok(Err(MorphismFailure {
                relator_index,
                relator: word.to_string(),
                value: acc,
            }));
        }
    }
    Ok(Ok(()))
}

/// The shift matrix `I + sum delta_{i,i+1}` of the given size.
pub fn full_shift(size: usize) -> Result<UnipotentMatrix, UnipotentError> {
    let mut a = UnipotentMatrix::identity(size)?;
    for i in 1..size {
        a.set_entry(i, i + 1, true);
    }
    Ok(a)
}

/// Search for an involution `B` in `U_size` with the prescribed
/// superdiagonal and `B A B = A^-1`, where `A` is the full shift. The
/// superdiagonal alternates starting from `first_bit`. Free entries are
/// found by backtracking over the diagonals at distance 2, 3, ....
pub fn inverting_involution(
    size: usize,
    first_bit: bool,
) -> Result<UnipotentMatrix, UnipotentError> {
    let a = full_shift(size)?;
    let a_inv = a.inverse();
    let mut b = UnipotentMatrix::identity(size)?;
    let mut bit = first_bit;
    for i in 1..size {
        b.set_entry(i, i + 1, bit);
        bit = !bit;
    }

    // Entries of B^2 and of (BA B)A - shaped constraints at distance e are
    // fixed once the diagonals of B at distance < e are fixed, so assigning
    // diagonal by diagonal lets partial solutions fail early.
    fn consistent_up_to(
        b: &UnipotentMatrix,
        a: &UnipotentMatrix,
        a_inv: &UnipotentMatrix,
        dist: usize,
    ) -> bool {
        let n = b.size();
        let square = b.mul(b).unwrap();
        let bab = b.mul(a).unwrap().mul(b).unwrap();
        for i in 1..=n {
            for j in (i + 1)..=n.min(i + dist) {
                if square.entry(i, j) {
                    return false;
                }
                if bab.entry(i, j) != a_inv.entry(i, j) {
                    return false;
                }
            }
        }
        true
    }

    fn assign(
        b: &mut UnipotentMatrix,
        a: &UnipotentMatrix,
        a_inv: &UnipotentMatrix,
        dist: usize,
    ) -> bool {
        let n = b.size();
        if dist > n - 1 {
            return consistent_up_to(b, a, a_inv, n);
        }
        let cells: Vec<usize> = (1..=n - dist).collect();
        let count = cells.len();
        for mask in 0u64..(1 << count) {
            for (idx, &i) in cells.iter().enumerate() {
                b.set_entry(i, i + dist, mask & (1 << idx) != 0);
            }
            if !consistent_up_to(b, a, a_inv, dist) {
                continue;
            }
            if assign(b, a, a_inv, dist + 1) {
                return true;
            }
        }
        for &i in &cells {
            b.set_entry(i, i + dist, false);
        }
        false
    }

    if !consistent_up_to(&b, &a, &a_inv, 1) {
        return Err(UnipotentError::SearchExhausted(size));
    }
    if assign(&mut b, &a, &a_inv, 2) {
        Ok(b)
    } else {
        Err(UnipotentError::SearchExhausted(size))
    }
}

/// Matrices `A1, A2, B1, B2` in `U_{n+1}` with all-ones superdiagonals on
/// the `A`s, alternating superdiagonals `1,0,1,...` on `B1` and `0,1,0,...`
/// on `B2`, each `B` an involution inverting the corresponding `A` by
/// conjugation, so `[A_i, B_i] = A_i^-2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmquadSolution {
    pub n: usize,
    pub a1: UnipotentMatrix,
    pub a2: UnipotentMatrix,
    pub b1: UnipotentMatrix,
    pub b2: UnipotentMatrix,
}

impl LemmquadSolution {
    /// Re-evaluate every claimed identity from scratch.
    pub fn verify(&self) -> bool {
        let ones = vec![true; self.n];
        let alt1: Vec<bool> = (0..self.n).map(|i| i % 2 == 0).collect();
        let alt2: Vec<bool> = (0..self.n).map(|i| i % 2 == 1).collect();
        let conj_ok = |a: &UnipotentMatrix, b: &UnipotentMatrix| {
            let bab = b.mul(a).unwrap().mul(b).unwrap();
            let comm = UnipotentMatrix::commutator(a, b).unwrap();
            bab == a.inverse() && comm == a.pow(-2)
        };
        self.a1.superdiagonal() == ones
            && self.a2.superdiagonal() == ones
            && self.b1.superdiagonal() == alt1
            && self.b2.superdiagonal() == alt2
            && self.b1.is_involution()
            && self.b2.is_involution()
            && conj_ok(&self.a1, &self.b1)
            && conj_ok(&self.a2, &self.b2)
    }
}

/// Solve for the four matrices in `U_{n+1}`; `n` must exceed 2. The `A`s
/// are the full shift; the `B`s are found by backtracking over their
/// unspecified strictly-upper entries.
pub fn solve_lemmquad(n: usize) -> Result<LemmquadSolution, UnipotentError> {
    if n <= 2 {
        return Err(UnipotentError::SizeTooSmall(n));
    }
    let size = n + 1;
    let a = full_shift(size)?;
    let solution = LemmquadSolution {
        n,
        a1: a.clone(),
        a2: a,
        b1: inverting_involution(size, true)?,
        b2: inverting_involution(size, false)?,
    };
    debug_assert!(solution.verify());
    Ok(solution)
}
