//! Exact integer polynomial and truncated power series arithmetic.
//!
//! All coefficients are arbitrary-precision integers; there is no floating
//! point. A series is a coefficient vector `a_0..a_N` with every operation
//! exact modulo `t^{N+1}`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::graph::CliquePolynomial;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("division requires the divisor to have constant term 1 or -1, got {0}")]
    NonUnitDivisor(BigInt),
    #[error(
        "series is not a product of factors (1+t^n)^l_n: degree {degree} needs a negative exponent"
    )]
    NotRealizable { degree: usize },
    #[error("truncation orders differ: {0} vs {1}")]
    TruncationMismatch(usize, usize),
}

/// Truncated integer power series: coefficients of `t^0..t^N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntSeries {
    coefficients: Vec<BigInt>,
}

impl IntSeries {
    pub fn from_coefficients(coefficients: Vec<BigInt>) -> Self {
        assert!(!coefficients.is_empty());
        IntSeries { coefficients }
    }

    pub fn from_i64(coefficients: &[i64]) -> Self {
        IntSeries {
            coefficients: coefficients.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }

    pub fn one(trunc: usize) -> Self {
        let mut coefficients = vec![BigInt::zero(); trunc + 1];
        coefficients[0] = BigInt::one();
        IntSeries { coefficients }
    }

    /// The polynomial embedded as a series truncated at `trunc`.
    pub fn from_polynomial(p: &CliquePolynomial, trunc: usize) -> Self {
        let mut coefficients = vec![BigInt::zero(); trunc + 1];
        for (n, &c) in p.coefficients().iter().enumerate() {
            if n > trunc {
                break;
            }
            coefficients[n] = BigInt::from(c);
        }
        IntSeries { coefficients }
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coefficients
    }

    pub fn coefficient(&self, n: usize) -> BigInt {
        self.coefficients
            .get(n)
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    /// Substitute `t -> -t` (negate odd coefficients).
    pub fn negate_variable(&self) -> IntSeries {
        IntSeries {
            coefficients: self
                .coefficients
                .iter()
                .enumerate()
                .map(|(n, c)| if n % 2 == 1 { -c } else { c.clone() })
                .collect(),
        }
    }

    pub fn add(&self, other: &IntSeries) -> Result<IntSeries, SeriesError> {
        self.check_trunc(other)?;
        Ok(IntSeries {
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn mul(&self, other: &IntSeries) -> Result<IntSeries, SeriesError> {
        self.check_trunc(other)?;
        let n = self.coefficients.len();
        let mut out = vec![BigInt::zero(); n];
        for (i, a) in self.coefficients.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coefficients.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                out[i + j] += a * b;
            }
        }
        Ok(IntSeries { coefficients: out })
    }

    /// Exact division modulo `t^{N+1}`; the divisor's constant term must be
    /// a unit (1 or -1).
    pub fn div(&self, divisor: &IntSeries) -> Result<IntSeries, SeriesError> {
        self.check_trunc(divisor)?;
        let lead = &divisor.coefficients[0];
        if !lead.is_one() && *lead != -BigInt::one() {
            return Err(SeriesError::NonUnitDivisor(lead.clone()));
        }
        let n = self.coefficients.len();
        let mut out = vec![BigInt::zero(); n];
        for k in 0..n {
            let mut acc = self.coefficients[k].clone();
            for j in 0..k {
                acc -= &divisor.coefficients[k - j] * &out[j];
            }
            // lead is 1 or -1, so this is exact.
            out[k] = if lead.is_one() { acc } else { -acc };
        }
        Ok(IntSeries { coefficients: out })
    }

    fn check_trunc(&self, other: &IntSeries) -> Result<(), SeriesError> {
        if self.coefficients.len() != other.coefficients.len() {
            return Err(SeriesError::TruncationMismatch(
                self.truncation(),
                other.truncation(),
            ));
        }
        Ok(())
    }

    /// Coefficients formatted for JSON output (exact decimal strings are
    /// avoided: values are emitted as arbitrary-precision decimal strings
    /// only when they overflow i64).
    pub fn to_json_values(&self) -> Vec<serde_json::Value> {
        self.coefficients
            .iter()
            .map(|c| match i64::try_from(c.clone()) {
                Ok(v) => serde_json::Value::from(v),
                Err(_) => serde_json::Value::String(c.to_string()),
            })
            .collect()
    }
}

/// `(1+t) / Gamma(-t)` truncated at `trunc`: the graded dimension series of
/// the twisted group algebra determined by the clique polynomial.
pub fn gocha_series(p: &CliquePolynomial, trunc: usize) -> IntSeries {
    let numerator = IntSeries::from_polynomial(
        &CliquePolynomial::from_coefficients(vec![1, 1]).unwrap(),
        trunc,
    );
    let denominator = IntSeries::from_polynomial(p, trunc).negate_variable();
    numerator.div(&denominator).expect("constant term is 1")
}

/// `Gamma(t) / (1-t)` truncated at `trunc`: the cohomology dimension series
/// determined by the clique polynomial.
pub fn poincare_series(p: &CliquePolynomial, trunc: usize) -> IntSeries {
    let numerator = IntSeries::from_polynomial(p, trunc);
    let denominator = IntSeries::from_i64(
        &std::iter::once(1)
            .chain(std::iter::once(-1))
            .chain(std::iter::repeat(0))
            .take(trunc + 1)
            .collect::<Vec<_>>(),
    );
    numerator.div(&denominator).expect("constant term is 1")
}

/// Unique nonnegative `l_1..l_N` with `prod (1+t^n)^{l_n} = s mod t^{N+1}`,
/// by iterative division. These are the graded dimensions of the restricted
/// Lie algebra attached to a series of F2 algebra dimensions. `trunc` is
/// capped at the truncation of `s`: coefficients beyond it are unknown, not
/// zero.
pub fn lie_dims_from_gocha(s: &IntSeries, trunc: usize) -> Result<Vec<BigInt>, SeriesError> {
    assert!(s.coefficient(0).is_one(), "series must start at 1");
    let trunc = trunc.min(s.truncation());
    let mut residual = IntSeries {
        coefficients: s.coefficients()[..=trunc].to_vec(),
    };
    let mut dims = Vec::with_capacity(trunc);
    for n in 1..=trunc {
        let l = residual.coefficient(n);
        if l.is_negative() {
            return Err(SeriesError::NotRealizable { degree: n });
        }
        // Divide by (1+t^n)^l. The exponent fits small graphs comfortably,
        // but divide via binary powering on the series to stay exact for
        // large dimensions.
        if !l.is_zero() {
            let mut factor = IntSeries::one(trunc);
            factor.coefficients[n] = BigInt::one();
            let power = series_pow(&factor, &l, trunc);
            residual = residual.div(&power)?;
        }
        dims.push(l);
    }
    Ok(dims)
}

fn series_pow(base: &IntSeries, exp: &BigInt, trunc: usize) -> IntSeries {
    let mut result = IntSeries::one(trunc);
    let mut sq = base.clone();
    let (_, bits) = exp.to_radix_le(2);
    for (i, bit) in bits.iter().enumerate() {
        if *bit == 1 {
            result = result.mul(&sq).unwrap();
        }
        if i + 1 < bits.len() {
            sq = sq.mul(&sq).unwrap();
        }
    }
    result
}

/// Which constant the witness parts must sum to: the vertex count `d` or
/// `d + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMode {
    VertexCount,
    VertexCountPlusOne,
}

impl SumMode {
    pub fn target(self, d: u64) -> u64 {
        match self {
            SumMode::VertexCount => d,
            SumMode::VertexCountPlusOne => d + 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SumMode::VertexCount => "d",
            SumMode::VertexCountPlusOne => "d+1",
        }
    }
}

/// A decomposition of the clique polynomial as
/// `(1+t)^{s-1} + t * sum_i a_i (1+t)^i`, with nonnegative `a_i`,
/// `a_{s-1} >= 1`, and `sum a_i + s` equal to the configured constant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealizabilityWitness {
    pub s: u64,
    pub parts: Vec<u64>,
}

/// Search for a witness. For each `s` the coefficients `a_i` are forced by
/// expanding `(Gamma(t) - (1+t)^{s-1}) / t` in the basis `(1+t)^i`, so the
/// scan over `s = 1..=d+1` visits candidate witnesses in `(s, lexicographic
/// a)` order and returns the first valid one.
pub fn realizability_check(p: &CliquePolynomial, mode: SumMode) -> Option<RealizabilityWitness> {
    let d = p.vertex_count();
    let gamma: Vec<BigInt> = p.coefficients().iter().map(|&c| BigInt::from(c)).collect();
    for s in 1..=d + 1 {
        if let Some(parts) = witness_parts(&gamma, s) {
            let total: u64 = parts.iter().sum::<u64>() + s;
            if total == mode.target(d) && parts[s as usize - 1] >= 1 {
                return Some(RealizabilityWitness { s, parts });
            }
        }
    }
    None
}

/// Forced coefficients for a fixed `s`, or `None` when they are not
/// nonnegative integers of degree below `s`.
fn witness_parts(gamma: &[BigInt], s: u64) -> Option<Vec<u64>> {
    // q(t) = (gamma(t) - (1+t)^{s-1}) / t
    let binom = binomial_row(s - 1);
    let len = gamma.len().max(binom.len());
    let mut diff = vec![BigInt::zero(); len];
    for (i, c) in gamma.iter().enumerate() {
        diff[i] += c;
    }
    for (i, c) in binom.iter().enumerate() {
        diff[i] -= c;
    }
    if !diff[0].is_zero() {
        return None;
    }
    let mut q: Vec<BigInt> = diff[1..].to_vec();
    if q.is_empty() {
        q.push(BigInt::zero());
    }
    // Expand q in the basis (1+t)^i: repeatedly a_i = q(-1), q = (q-a_i)/(1+t).
    let mut parts: Vec<BigInt> = Vec::new();
    while parts.len() < s as usize {
        let at_minus_one =
            q.iter().enumerate().fold(
                BigInt::zero(),
                |acc, (n, c)| {
                    if n % 2 == 0 {
                        acc + c
                    } else {
                        acc - c
                    }
                },
            );
        parts.push(at_minus_one.clone());
        q[0] -= at_minus_one;
        // Divide by (1+t): synthetic division.
        let mut quotient = vec![BigInt::zero(); q.len().saturating_sub(1).max(1)];
        let mut carry = BigInt::zero();
        for i in (1..q.len()).rev() {
            let coeff = &q[i] - &carry;
            quotient[i - 1] = coeff.clone();
            carry = coeff;
        }
        if q.len() == 1 {
            quotient[0] = BigInt::zero();
        }
        q = quotient;
    }
    if q.iter().any(|c| !c.is_zero()) {
        return None; // degree of q is at least s
    }
    let mut out = Vec::with_capacity(parts.len());
    for c in parts {
        if c.is_negative() {
            return None;
        }
        out.push(u64::try_from(c).ok()?);
    }
    Some(out)
}

fn binomial_row(n: u64) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for _ in 0..n {
        let mut next = vec![BigInt::one()];
        for w in row.windows(2) {
            next.push(&w[0] + &w[1]);
        }
        next.push(BigInt::one());
        row = next;
    }
    row
}

/// Verify that a witness reproduces the polynomial; used to cross-check
/// search results.
pub fn witness_reproduces(p: &CliquePolynomial, w: &RealizabilityWitness) -> bool {
    let mut expected = binomial_row(w.s - 1);
    // + t * sum_i a_i (1+t)^i
    for (i, &a) in w.parts.iter().enumerate() {
        let row = binomial_row(i as u64);
        for (j, c) in row.iter().enumerate() {
            let idx = j + 1;
            if expected.len() <= idx {
                expected.resize(idx + 1, BigInt::zero());
            }
            expected[idx] += c * BigInt::from(a);
        }
    }
    while expected.len() > 1 && expected.last().unwrap().is_zero() {
        expected.pop();
    }
    let gamma: Vec<BigInt> = p.coefficients().iter().map(|&c| BigInt::from(c)).collect();
    expected == gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn series_i64(s: &IntSeries) -> Vec<i64> {
        s.coefficients()
            .iter()
            .map(|c| i64::try_from(c.clone()).unwrap())
            .collect()
    }

    /// Independent recurrence for (1+t)/Gamma(-t): with denominator
    /// 1 - c1 t + c2 t^2 - ..., b_n = sum_k (-1)^{k+1} (-1)^k ... expanded
    /// directly from the defining product.
    fn gocha_brute(gamma: &[i64], trunc: usize) -> Vec<i64> {
        // denominator d_k = (-1)^k gamma_k
        let mut b = vec![0i64; trunc + 1];
        b[0] = 1;
        for n in 1..=trunc {
            let mut acc = 0i64;
            for k in 1..=n.min(gamma.len() - 1) {
                let dk = if k % 2 == 0 { gamma[k] } else { -gamma[k] };
                acc -= dk * b[n - k];
            }
            b[n] = acc;
        }
        // multiply by (1+t)
        let mut out = vec![0i64; trunc + 1];
        for n in 0..=trunc {
            out[n] = b[n] + if n > 0 { b[n - 1] } else { 0 };
        }
        out
    }

    #[test]
    fn gocha_c4() {
        let p = Graph::cycle(4).unwrap().clique_polynomial();
        let s = gocha_series(&p, 4);
        assert_eq!(gocha_brute(&[1, 4, 4], 4), vec![1, 5, 16, 44, 112]);
        assert_eq!(series_i64(&s), vec![1, 5, 16, 44, 112]);
    }

    #[test]
    fn gocha_empty_graph() {
        let p = Graph::empty().clique_polynomial();
        let s = gocha_series(&p, 5);
        assert_eq!(series_i64(&s), vec![1, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn gocha_single_vertex_is_geometric_doubled() {
        let p = Graph::complete(1).unwrap().clique_polynomial();
        let s = gocha_series(&p, 5);
        assert_eq!(series_i64(&s), vec![1, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn poincare_c4() {
        let p = Graph::cycle(4).unwrap().clique_polynomial();
        let s = poincare_series(&p, 5);
        assert_eq!(series_i64(&s), vec![1, 5, 9, 9, 9, 9]);
    }

    #[test]
    fn poincare_empty_graph() {
        let p = Graph::empty().clique_polynomial();
        assert_eq!(series_i64(&poincare_series(&p, 4)), vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn poincare_gamma1() {
        let p = CliquePolynomial::from_coefficients(vec![1, 5, 2]).unwrap();
        assert_eq!(series_i64(&poincare_series(&p, 4)), vec![1, 6, 8, 8, 8]);
    }

    #[test]
    fn poincare_low_coefficients_match_counts() {
        for g in [
            Graph::cycle(4).unwrap(),
            Graph::new(5, [(1, 2), (3, 4)]).unwrap(),
            Graph::complete(6).unwrap(),
        ] {
            let s = poincare_series(&g.clique_polynomial(), 3);
            assert_eq!(s.coefficient(1), BigInt::from(g.vertex_count() as u64 + 1));
            assert_eq!(
                s.coefficient(2),
                BigInt::from(g.vertex_count() as u64 + g.edge_count() as u64 + 1)
            );
        }
    }

    #[test]
    fn koszul_duality_sanity_identity() {
        // gocha(t) * poincare(-t) = ((1+t)/Gamma(-t)) * (Gamma(-t)/(1+t)) = 1.
        for g in [
            Graph::cycle(4).unwrap(),
            Graph::new(5, [(1, 2), (3, 4)]).unwrap(),
            Graph::complete(3).unwrap(),
            Graph::empty(),
        ] {
            let p = g.clique_polynomial();
            let trunc = 8;
            let product = gocha_series(&p, trunc)
                .mul(&poincare_series(&p, trunc).negate_variable())
                .unwrap();
            assert_eq!(product, IntSeries::one(trunc));
        }
    }

    #[test]
    fn lie_dims_examples() {
        // Single order-2 generator: 1 + t.
        let dims = lie_dims_from_gocha(&IntSeries::from_i64(&[1, 1, 0, 0]), 3).unwrap();
        assert_eq!(dims, vec![BigInt::from(1), BigInt::zero(), BigInt::zero()]);

        // C4 series: l1 = 5, l2 = 16 - C(5,2) = 6.
        let p = Graph::cycle(4).unwrap().clique_polynomial();
        let dims = lie_dims_from_gocha(&gocha_series(&p, 4), 4).unwrap();
        assert_eq!(dims[0], BigInt::from(5));
        assert_eq!(dims[1], BigInt::from(6));

        // Twisted single vertex: [1,2,2,2,...] gives l1 = 2, l2 = 1.
        let p = Graph::complete(1).unwrap().clique_polynomial();
        let dims = lie_dims_from_gocha(&gocha_series(&p, 4), 4).unwrap();
        assert_eq!(dims[0], BigInt::from(2));
        assert_eq!(dims[1], BigInt::from(1));
    }

    #[test]
    fn lie_dims_detect_non_realizable() {
        // 1 + t + t^2: dividing out (1+t) and (1+t^2) leaves -t^3.
        let err = lie_dims_from_gocha(&IntSeries::from_i64(&[1, 1, 1, 0]), 3).unwrap_err();
        assert_eq!(err, SeriesError::NotRealizable { degree: 3 });
    }

    #[test]
    fn lie_dims_reconstruct_round_trip() {
        let trunc = 6;
        for dims in [
            vec![3u32, 1, 0, 2, 0, 1],
            vec![1, 1, 1, 1, 1, 1],
            vec![5, 0, 0, 0, 0, 0],
        ] {
            let mut product = IntSeries::one(trunc);
            for (n, &l) in dims.iter().enumerate() {
                let mut factor = IntSeries::one(trunc);
                factor.coefficients[n + 1] = BigInt::one();
                product = product
                    .mul(&series_pow(&factor, &BigInt::from(l), trunc))
                    .unwrap();
            }
            let recovered = lie_dims_from_gocha(&product, trunc).unwrap();
            let expected: Vec<BigInt> = dims.iter().map(|&l| BigInt::from(l)).collect();
            assert_eq!(recovered, expected);
        }
    }

    #[test]
    fn realizability_c4_has_no_witness() {
        let p = CliquePolynomial::from_coefficients(vec![1, 4, 4]).unwrap();
        assert_eq!(realizability_check(&p, SumMode::VertexCount), None);
        assert_eq!(realizability_check(&p, SumMode::VertexCountPlusOne), None);
    }

    #[test]
    fn realizability_single_vertex() {
        let p = CliquePolynomial::from_coefficients(vec![1, 1]).unwrap();
        let w = realizability_check(&p, SumMode::VertexCountPlusOne).unwrap();
        assert_eq!((w.s, w.parts.as_slice()), (1, &[1u64][..]));
        assert!(witness_reproduces(&p, &w));
        assert_eq!(realizability_check(&p, SumMode::VertexCount), None);
    }

    #[test]
    fn realizability_gamma1() {
        // t-coefficient: 1 + a0 + a1 = 5, t^2: a1 = 2, so (a0, a1) = (2, 2).
        let p = CliquePolynomial::from_coefficients(vec![1, 5, 2]).unwrap();
        let w = realizability_check(&p, SumMode::VertexCountPlusOne).unwrap();
        assert_eq!((w.s, w.parts.as_slice()), (2, &[2u64, 2][..]));
        assert!(witness_reproduces(&p, &w));
    }

    #[test]
    fn realizability_complete_and_edgeless() {
        // Complete graph on n vertices: (1+t)^n = (1+t)^{n-1} + t (1+t)^{n-1}.
        for n in 1..=6u64 {
            let g = Graph::complete(n as usize).unwrap();
            let w = realizability_check(&g.clique_polynomial(), SumMode::VertexCountPlusOne)
                .expect("complete graphs admit a witness");
            assert_eq!(w.s, n);
            assert!(witness_reproduces(&g.clique_polynomial(), &w));
        }
        // Edgeless graph on m vertices: 1 + m t with s = 1, a0 = m.
        for m in 1..=6u64 {
            let g = Graph::edgeless(m as usize).unwrap();
            let w = realizability_check(&g.clique_polynomial(), SumMode::VertexCountPlusOne)
                .expect("edgeless graphs admit a witness");
            assert_eq!((w.s, w.parts.as_slice()), (1, &[m][..]));
        }
    }
}
