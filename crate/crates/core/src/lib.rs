// SPDX-License-Identifier: Apache-2.0

//! Continuous-variable quantum teleportation computed entirely with
//! Wigner characteristic functions.
//!
//! Units follow ħ = 1/2 with α = x + ip, and the characteristic-function
//! argument of each mode is ξ = w + iz.  Resources are built from the
//! two-mode squeezing operator `S(ζ) = exp(-ζ a†b† + ζ* ab)`, ζ = r e^{iφ},
//! whose action on displacement arguments is [`phase_space::bogoliubov_pair`].

pub mod closed_forms;
pub mod error;
pub mod fock_rep;
pub mod measures;
pub mod optimize;
pub mod overlap;
pub mod phase_space;
pub mod protocol;
pub mod quadrature;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use phase_space::ConjVar;
