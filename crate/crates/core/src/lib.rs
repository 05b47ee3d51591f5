//! Exact construction and decomposition of local representations of the
//! Chekhov-Fock quantum torus algebra of a triangulated punctured surface,
//! at an odd root of unity.
//!
//! The pipeline: [`triangulation`] parses and validates ideal triangulations
//! and derives their combinatorial data (Weil-Petersson skew form, puncture
//! profiles); [`qtorus`] gives the quantum torus algebra with its Weyl
//! ordering and central elements; [`trianglerep`] builds the cyclic triangle
//! representations and tensors them into local representations; and
//! [`decomposer`] splits a local representation into joint eigenspaces of the
//! puncture invariants with exact spectral projectors, certifying block
//! ranks, multiplicities and commutants over a cyclotomic field
//! ([`cyclotomic`]).  All arithmetic is exact; no floats anywhere.

pub mod cyclotomic;
pub mod decomposer;
pub mod par;
pub mod qtorus;
pub mod sparse;
pub mod triangulation;
pub mod trianglerep;
