//! Quantum states, observables and losses for online state learning.

pub mod hamiltonian;
pub mod loss;
pub mod pauli;
pub mod states;

pub use hamiltonian::{
    cumulants_by_recursion, cumulants_from_moments, gibbs_relative_entropy_series, gibbs_state, hamiltonian_cumulants,
    normalized_moments, sample_gue, sample_hamiltonian, sample_rsps, HamiltonianEnsemble, HamiltonianSample,
};
pub use loss::{loss_and_grad, LossKind};
pub use pauli::{Pauli, PauliString};
pub use states::{
    depolarize_global, depolarize_local, haar_subsystem_state, noisy_circuit_state, pauli_second_moment, qubit_count,
    qubit_state, random_product_state, BlochEnsemble, MAX_QUBITS,
};
