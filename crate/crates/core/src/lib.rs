//! Exact-arithmetic toolkit for pro-2 Delta-RAAGs.
//!
//! A Delta-RAAG is a semidirect product of a pro-2 right-angled Artin group
//! `G_Gamma` by the order-2 group `Delta = <x_0>`, where `x_0` inverts each
//! canonical generator up to conjugation by a twist word `z_i`. This crate
//! decides whether a finite simple graph is the underlying graph of such a
//! group arising as the maximal pro-2 quotient of the absolute Galois group
//! of a formally real Pythagorean field of finite type, and computes the
//! attached combinatorial-algebra data:
//!
//! * clique polynomials and the exact gocha / Poincare power series,
//! * a constructive recognition of the admissible graph class with a
//!   cone/coproduct decomposition witness, plus an independent
//!   closure-enumeration oracle,
//! * the quadratic F2 group algebra, its PBW confluence check, truncated
//!   Hilbert series, and the quadratic dual (cohomology ring presentation),
//! * cup products, the cup-vanishing classification, and explicit
//!   unitriangular representations witnessing strong Massey vanishing and
//!   the kernel-unipotent property.
//!
//! Everything is computed in exact integer / F2 arithmetic; there is no
//! floating point anywhere. All values are immutable after construction and
//! all operations are pure, so they are safe to share across threads.

pub mod f2;
pub mod graph;
pub mod massey;
pub mod quad;
pub mod recognition;
pub mod report;
pub mod series;
pub mod unipotent;
pub mod words;

pub use graph::{CliquePolynomial, ComposeMode, Graph, Pattern};
pub use recognition::{DecompositionTree, Rejection};
pub use series::{IntSeries, SumMode};
pub use words::{GroupWord, ZVector};
