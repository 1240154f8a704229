//! Bit-packed linear algebra over F2.
//!
//! Rows are `u64` words, 64 columns per word. This is the shared substrate
//! for the quadratic-algebra ranks and the unipotent matrices.

/// A growable matrix over F2 with a fixed column count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct F2Matrix {
    cols: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl F2Matrix {
    pub fn new(cols: usize) -> Self {
        F2Matrix {
            cols,
            words: cols.div_ceil(64),
            rows: Vec::new(),
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn zero_row(&self) -> Vec<u64> {
        vec![0u64; self.words]
    }

    pub fn push_row(&mut self, row: Vec<u64>) {
        debug_assert_eq!(row.len(), self.words);
        self.rows.push(row);
    }

    pub fn push_row_from_bits(&mut self, bits: impl IntoIterator<Item = usize>) {
        let mut row = self.zero_row();
        for b in bits {
            debug_assert!(b < self.cols);
            row[b / 64] ^= 1 << (b % 64);
        }
        self.rows.push(row);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i][j / 64] & (1 << (j % 64)) != 0
    }

    pub fn rank(&self) -> usize {
        self.clone().into_echelon().rank()
    }
}

pub fn leading_bit(row: &[u64]) -> Option<usize> {
    for (w, &word) in row.iter().enumerate() {
        if word != 0 {
            return Some(w * 64 + word.trailing_zeros() as usize);
        }
    }
    None
}

pub fn xor_in(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Row echelon form with unique pivot columns, built incrementally.
#[derive(Debug, Clone)]
pub struct Echelon {
    cols: usize,
    words: usize,
    /// `pivot_row[c]` is the index into `rows` of the row with leading
    /// column `c`, if any.
    pivot_row: Vec<Option<usize>>,
    rows: Vec<Vec<u64>>,
}

impl Echelon {
    pub fn new(cols: usize) -> Self {
        Echelon {
            cols,
            words: cols.div_ceil(64),
            pivot_row: vec![None; cols],
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Reduce `row` against the current pivots in place; afterwards it is
    /// either zero or has a leading column with no pivot.
    pub fn reduce(&self, row: &mut [u64]) {
        loop {
            match leading_bit(row) {
                None => return,
                Some(c) => match self.pivot_row[c] {
                    Some(r) => xor_in(row, &self.rows[r]),
                    None => return,
                },
            }
        }
    }

    /// Reduce and, if independent, insert. Returns true when the row
    /// increased the rank.
    pub fn insert(&mut self, mut row: Vec<u64>) -> bool {
        debug_assert_eq!(row.len(), self.words);
        self.reduce(&mut row);
        match leading_bit(&row) {
            None => false,
            Some(c) => {
                self.pivot_row[c] = Some(self.rows.len());
                self.rows.push(row);
                true
            }
        }
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = (0..self.cols)
            .filter(|&c| self.pivot_row[c].is_some())
            .collect();
        cols.sort_unstable();
        cols
    }

    pub fn non_pivot_columns(&self) -> Vec<usize> {
        (0..self.cols)
            .filter(|&c| self.pivot_row[c].is_none())
            .collect()
    }

    pub fn is_pivot(&self, c: usize) -> bool {
        self.pivot_row[c].is_some()
    }

    /// Back-substitute so every pivot column appears in exactly one row.
    pub fn normalize(&mut self) {
        let order: Vec<usize> = self.pivot_columns();
        // Eliminate later pivots from earlier rows, working backwards.
        for &c in order.iter().rev() {
            let r = self.pivot_row[c].unwrap();
            let row = self.rows[r].clone();
            for i in 0..self.rows.len() {
                if i != r && self.rows[i][c / 64] & (1 << (c % 64)) != 0 {
                    xor_in(&mut self.rows[i], &row);
                }
            }
        }
    }

    /// The fully reduced row whose leading column is `c`, if `c` is a pivot.
    pub fn row_for_pivot(&self, c: usize) -> Option<&[u64]> {
        self.pivot_row[c].map(|r| self.rows[r].as_slice())
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.rows.iter().map(|r| r.as_slice())
    }

    /// Membership solve: is `row` in the span of the inserted rows?
    pub fn contains(&self, row: &[u64]) -> bool {
        let mut r = row.to_vec();
        self.reduce(&mut r);
        leading_bit(&r).is_none()
    }

    /// Basis of the null space (right kernel) of the row span, one vector
    /// per non-pivot column. Requires [`Echelon::normalize`] first.
    pub fn nullspace_basis(&self) -> Vec<Vec<u64>> {
        let mut basis = Vec::new();
        for free in self.non_pivot_columns() {
            let mut v = vec![0u64; self.words];
            v[free / 64] |= 1 << (free % 64);
            for &c in &self.pivot_columns() {
                let r = self.pivot_row[c].unwrap();
                if self.rows[r][free / 64] & (1 << (free % 64)) != 0 {
                    v[c / 64] ^= 1 << (c % 64);
                }
            }
            basis.push(v);
        }
        basis
    }
}

impl F2Matrix {
    pub fn into_echelon(self) -> Echelon {
        let mut ech = Echelon::new(self.cols);
        for row in self.rows {
            ech.insert(row);
        }
        ech
    }
}
