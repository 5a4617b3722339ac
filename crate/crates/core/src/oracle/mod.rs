//! Dense density-matrix simulator for short chains.
//!
//! Everything here works on full `2^N × 2^N` matrices and serves as ground
//! truth for the closed-form results elsewhere in the crate.

mod cycles;
mod dense;
mod fermion;
mod monomial;
mod mqc;
mod series;

pub use cycles::{
    average_hamiltonian, cycle_defect, cycle_propagator, repeated_cycle_defect, CycleKind, PulseCycle,
};
pub use dense::{
    build_hamiltonian, build_hamiltonian_with_cap, evolve_density, CouplingKind, DenseOperator,
    HamiltonianSpec, Propagator, DEFAULT_SIZE_CAP,
};
pub use fermion::{
    all_bilinear_indices, bilinear_operator, coefficients_to_dense, dq_space_indices, initial_density,
    leakage_fraction, leakage_series, pauli_string_operator, project_bilinear, site_magnetization,
    two_spin_correlation,
};
pub use monomial::Monomial;
pub use mqc::{mq_spectrum, rotate, spectrum_of};
pub use series::{commutator_closed_form, component, h2, h3, h4, short_time_series};
