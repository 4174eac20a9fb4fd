// SPDX-License-Identifier: Apache-2.0

//! Analytic fidelities for coherent-state inputs and the optimal Bell angles.
//!
//! All expressions assume the ideal unit-gain channel, squeezing phase φ = π
//! and superposition phase θ = 0.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};

/// Thermal photon numbers of the noise fields on the two resource modes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThermalContext {
    pub n_a: f64,
    pub n_b: f64,
}

impl ThermalContext {
    pub const PURE: ThermalContext = ThermalContext { n_a: 0.0, n_b: 0.0 };

    pub fn new(n_a: f64, n_b: f64) -> Result<Self> {
        ensure_finite("n_th_A", n_a)?;
        ensure_finite("n_th_B", n_b)?;
        if n_a < 0.0 || n_b < 0.0 {
            return Err(Error::Spec(format!("thermal photon numbers ({n_a}, {n_b}) must be nonnegative")));
        }
        Ok(Self { n_a, n_b })
    }

    /// Equal noise on both modes.
    pub fn symmetric(n: f64) -> Result<Self> {
        Self::new(n, n)
    }

    /// f_th = 1 + n_A + n_B.
    pub fn f_th(&self) -> f64 {
        1.0 + self.n_a + self.n_b
    }
}

/// 1 / (1 + e^{-2r}): twin-beam resource, coherent input.
pub fn fidelity_tmsv(r: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * r).exp())
}

/// Twin beam superimposed on thermal noise; the δ = 0 case of [`fidelity_bell_thermal`].
pub fn fidelity_tmsv_thermal(r: f64, ctx: ThermalContext) -> f64 {
    1.0 / ((-2.0 * r).exp() + ctx.f_th())
}

/// Squeezed Bell-like resource (angle δ) with thermal noise, coherent input.
pub fn fidelity_bell_thermal(r: f64, ctx: ThermalContext, delta: f64) -> f64 {
    let q = (2.0 * r).exp() * ctx.f_th();
    let num = 1.0 + q + q * q + q * (2.0 * delta).cos() + (1.0 + q) * (2.0 * delta).sin();
    num / ((-2.0 * r).exp() * (1.0 + q).powi(3))
}

/// Squeezed cat-like resource with amplitude γ and angle δ, coherent input.
pub fn fidelity_cat(r: f64, delta: f64, gamma: Complex64) -> f64 {
    let q = 1.0 + (2.0 * r).exp();
    let g2 = gamma.norm_sqr();
    let im = gamma - gamma.conj();
    let (s, c) = delta.sin_cos();
    let cross = (-g2).exp() * ((gamma * gamma / q).exp() + (gamma.conj() * gamma.conj() / q).exp()).re;
    let num = c * c + (im * im / q).exp().re * s * s + cross * s * c;
    num / ((1.0 + (-2.0 * r).exp()) * (1.0 + (-g2).exp() * (2.0 * delta).sin()))
}

/// [`fidelity_cat`] at real γ = |γ| and δ = π/4.
pub fn fidelity_cat_simplified(r: f64, gamma_abs: f64) -> f64 {
    let g2 = gamma_abs * gamma_abs;
    let em = (-2.0 * r).exp();
    (1.0 + (-g2 / (1.0 + em)).exp()) / ((1.0 + em) * (1.0 + (-g2).exp()))
}

/// [`fidelity_cat_simplified`] with thermal noise on the resource.
pub fn fidelity_cat_thermal(r: f64, ctx: ThermalContext, gamma_abs: f64) -> f64 {
    let g2 = gamma_abs * gamma_abs;
    let q = (2.0 * r).exp() * ctx.f_th();
    (1.0 + (-g2).exp() * (g2 / (1.0 + q)).exp()) / ((-2.0 * r).exp() * (1.0 + q) * (1.0 + (-g2).exp()))
}

/// Bell angle maximizing the coherent-input fidelity.
pub fn delta_opt_coherent(r: f64) -> f64 {
    0.5 * (1.0 + (-2.0 * r).exp()).atan()
}

/// Bell angle maximizing the single-photon-input fidelity; π/4 at r = 0 as a limit.
pub fn delta_opt_fock(r: f64) -> f64 {
    let e2 = (2.0 * r).exp();
    let den = 3.0 * (e2 - 1.0).powi(2);
    if den == 0.0 {
        return FRAC_PI_4;
    }
    // the argument is positive for r > 0, so the principal branch stays in (π/8, π/4)
    0.5 * ((1.0 - e2 + e2 * e2 + 3.0 * e2 * e2 * e2) / (e2 * den)).atan()
}

/// [`delta_opt_coherent`] with thermal noise on the resource.
pub fn delta_opt_coherent_thermal(r: f64, ctx: ThermalContext) -> f64 {
    0.5 * (1.0 + (-2.0 * r).exp() / ctx.f_th()).atan()
}
