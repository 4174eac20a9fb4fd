// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("Fock truncation: tail mass {tail_mass:.3e} exceeds {tail_tol:.1e} at N_max = {n_max}")]
    Truncation {
        n_max: usize,
        tail_mass: f64,
        tail_tol: f64,
    },

    #[error("quadrature did not converge: orders {orders:?} gave {values:?} (tolerance {tol:.1e})")]
    Quadrature {
        orders: Vec<usize>,
        values: Vec<f64>,
        tol: f64,
    },

    #[error("integral is negative beyond roundoff: {0:.3e}")]
    Negative(f64),

    #[error("finite differences did not settle: {0}")]
    Differentiation(String),

    #[error("optimizer: {0}")]
    Optimizer(String),

    #[error("threshold not bracketed in [{lo}, {hi}]: F-1/2 = {f_lo:.3e} .. {f_hi:.3e}")]
    ThresholdOutOfRange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
}

pub(crate) fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} is not finite ({v})")))
    }
}
