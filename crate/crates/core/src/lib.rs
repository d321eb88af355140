//! Upper bounds on the secret-key capacity of one-mode phase-insensitive
//! Gaussian channels from finite-energy teleportation simulation.
//!
//! The pipeline: a channel `(tau, v)` is simulated by teleportation over a
//! resource state of chosen purity ([`resource`]); the relative entropy of
//! that state to a fixed separable candidate ([`relent`]) bounds the key
//! capacity; minimising over the resource family at fixed purity gives
//! `B_mu` ([`bounds`]), which approaches the infinite-energy bound `B0` as
//! the purity goes to zero.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channels;
pub mod error;
pub mod relent;
pub mod resource;
pub mod symplectic;
pub mod verify;

pub use bounds::{
    b0, b_mu, h, inverse_gaussian_cdf, phi_n, BoundResult, NonAsymptoticSpec, SecondOrder,
};
pub use channels::{ChannelKind, PhaseInsensitiveChannel};
pub use error::{Error, Result};
pub use relent::{
    closest_separable_candidate, ree_upper, relative_entropy, relative_entropy_variance, StatePair,
};
pub use resource::{additive_resource_state, resource_state, ResourceSpectrum, ResourceState};
pub use symplectic::{CovarianceMatrix, GibbsMatrix, SymplecticSpectrum};
