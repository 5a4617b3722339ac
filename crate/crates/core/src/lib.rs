//! Coherent magnetization transport in nearest-neighbour spin-1/2 chains.
//!
//! The double-quantum (DQ) Hamiltonian `½ Σ d (σxσx − σyσy)` and the XX
//! Hamiltonian `½ Σ d (σxσx + σyσy)` both map onto free fermions. This crate
//! evaluates the resulting closed-form transport amplitudes (Bessel-function
//! image sums), maps evolved states onto the quadratic fermion-bilinear
//! operator space, and checks all of it against a dense density-matrix
//! simulator for short chains. On top of that sit the mirror-time and scaling
//! analyses, a three-parameter signal fit and a command-line front end.
//!
//! Conventions used throughout:
//!
//! * sites are 1-based, `1..=n_sites`;
//! * the dimensionless time is `x = 2·d·t` (coupling `d` in rad/s);
//! * the fermion vacuum is the all-up state, `c_h = −(Π_{l<h} σz_l) σ⁺_h`, so
//!   `c†_h c_h = (1 − σz_h)/2`;
//! * states are deviation density operators: `single_site(j)` is `−σz_j`,
//!   `thermal` is `−Σ σz_j`;
//! * expectation values use the normalized trace `Tr(·)/2^N`.

pub mod analysis;
pub mod chain;
pub mod cli;
pub mod error;
pub mod io;
pub mod liouville;
pub mod oracle;
pub mod special;

pub use chain::{ChainSpec, HamiltonianKind, InitialState, ReplicaCap};
pub use error::{Error, Result};
pub use num_complex::Complex64;
