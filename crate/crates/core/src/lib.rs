//! Exact combinatorics and Monte Carlo tooling for the spectra of principal
//! submatrices of rotationally invariant Hermitian random matrices.
//!
//! The library is organised in layers:
//!
//! * [`nc`] — the lattice of non-crossing partitions: enumeration, the
//!   refinement order, Kreweras complementation, and the decomposition of a
//!   partition into an outer part plus an inner part inserted at a Kreweras
//!   point. Includes the Möbius function of the lattice, computed by an
//!   interval sieve.
//! * [`perm`] — small permutations, cycle bookkeeping, Cayley-graph geodesics
//!   with respect to the full cycle, and the embedding of non-crossing
//!   partitions into the symmetric group.
//! * [`weingarten`] — exact rational Weingarten functions for integration of
//!   polynomials over the unitary group, their large-`N` asymptotics, and
//!   mixed moments of Haar-conjugated matrix products.
//! * [`transform`] — moment sequences, free cumulants, and the Markov–Krein
//!   correspondence between a spectral measure and its transition measure;
//!   predictions for the moments of Rayleigh measures.
//! * [`sim`] — sampling of matrix ensembles (GUE, rotated fixed spectra,
//!   Wishart), Hermitian eigensolving, Cauchy interlacing checks, and
//!   concentration experiments for Rayleigh-measure moments.
//! * [`verify`] — self-check suites cross-validating the exact layers against
//!   each other; these back the `mklab verify` subcommand.
//!
//! Everything on the combinatorial side is exact (big-rational or integer);
//! floating point enters only at the Monte Carlo boundary in [`sim`].

pub mod nc;
pub mod perm;
pub mod scalar;
pub mod sim;
pub mod transform;
pub mod verify;
pub mod weingarten;

pub use nc::NonCrossingPartition;
pub use perm::Permutation;
