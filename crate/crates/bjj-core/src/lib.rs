//! Simulation of a two-component bosonic Josephson junction as a 2D
//! lattice of evanescently coupled optical waveguides.
//!
//! `N_A` bosons of one species and `N_B` of another tunnel between two
//! wells and interact on site. Expanded over the Fock states `|k,l>`
//! (left-well occupations of each species) the dynamics is a tight-binding
//! problem on an `(N_A+1) x (N_B+1)` lattice, which maps one-to-one onto
//! coherent light propagating through a waveguide array: evolution time is
//! the propagation distance, site detunings encode interactions, and the
//! measurable site intensities are the Fock-state probabilities.
//!
//! The crate provides:
//!
//! - [`fock_lattice`]: lattice index space and effective Hamiltonians;
//! - [`propagation`]: exact spectral time evolution with a unitarity
//!   contract;
//! - [`angular`]: the coupled-spin picture (Wigner d-functions,
//!   Clebsch-Gordan coefficients, coupled-basis states, the closed-form
//!   non-interacting propagator);
//! - [`photonics`]: inverse design of physical waveguide positions and the
//!   parasitic diagonal-coupling model;
//! - [`observables`]: population-imbalance distributions, moments,
//!   interference metrics and the +-U symmetry check.

pub mod angular;
pub mod error;
pub mod fock_lattice;
pub mod observables;
pub mod photonics;
pub mod propagation;

pub use error::{Error, Result};
pub use fock_lattice::{
    build_hamiltonian, coupling_a, coupling_b, detuning, shifted_detuning, CouplingOverlay,
    DetuningMode, EffectiveHamiltonian, FockLabel, LatticeShape, ModelParams,
};
pub use observables::{
    imbalance_distribution, mean_imbalance, odd_suppression_metric, sign_flip_check,
    site_probabilities, variance_imbalance, ImbalanceDistribution, ProbabilityGrid,
    SignFlipReport,
};
pub use propagation::{decompose, evolve, evolve_trajectory, AmplitudeField, SpectralPropagator};
