// SPDX-License-Identifier: Apache-2.0

//! Linear maps on the conjugate phase-space variables ξ = w + iz.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};

/// One conjugate phase-space coordinate ξ = w + iz.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConjVar {
    pub w: f64,
    pub z: f64,
}

impl ConjVar {
    pub const ZERO: ConjVar = ConjVar { w: 0.0, z: 0.0 };

    pub const fn new(w: f64, z: f64) -> Self {
        Self { w, z }
    }

    pub fn from_complex(c: Complex64) -> Self {
        Self { w: c.re, z: c.im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.w, self.z)
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.z * self.z
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.z.is_finite()
    }

    pub fn checked(self) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::Domain(format!("non-finite phase-space point {self:?}")))
        }
    }
}

impl std::ops::Neg for ConjVar {
    type Output = ConjVar;
    fn neg(self) -> ConjVar {
        ConjVar::new(-self.w, -self.z)
    }
}

impl From<Complex64> for ConjVar {
    fn from(c: Complex64) -> Self {
        ConjVar::from_complex(c)
    }
}

/// Precomputed two-mode squeezing map ξ'_i = cosh r ξ_i + e^{iφ} sinh r ξ_j*.
#[derive(Debug, Clone, Copy)]
pub struct Bogoliubov {
    cosh: f64,
    sinh_phase: Complex64,
}

impl Bogoliubov {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        ensure_finite("squeezing r", r)?;
        ensure_finite("squeezing phase", phi)?;
        Ok(Self {
            cosh: r.cosh(),
            sinh_phase: Complex64::from_polar(r.sinh(), phi),
        })
    }

    #[inline]
    pub fn apply(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        (
            self.cosh * a + self.sinh_phase * b.conj(),
            self.cosh * b + self.sinh_phase * a.conj(),
        )
    }

    /// The map as a real 4×4 matrix on (w_A, z_A, w_B, z_B).
    pub fn real_matrix(&self) -> Matrix4<f64> {
        let c = self.cosh;
        let (sc, ss) = (self.sinh_phase.re, self.sinh_phase.im);
        // e^{iφ} sinh r (w - iz) = (sc w + ss z) + i (ss w - sc z)
        Matrix4::new(
            c, 0.0, sc, ss, //
            0.0, c, ss, -sc, //
            sc, ss, c, 0.0, //
            ss, -sc, 0.0, c,
        )
    }
}

/// Bogoliubov transformation induced by `S(ζ)` on a pair of displacement arguments.
pub fn bogoliubov_pair(
    xi_a: ConjVar,
    xi_b: ConjVar,
    r: f64,
    phi: f64,
) -> Result<(ConjVar, ConjVar)> {
    xi_a.checked()?;
    xi_b.checked()?;
    let (a, b) = Bogoliubov::new(r, phi)?.apply(xi_a.to_complex(), xi_b.to_complex());
    Ok((a.into(), b.into()))
}

/// Beam-splitter rotation of two displacement arguments.
pub fn beam_split(xi_a: ConjVar, xi_b: ConjVar, theta: f64) -> Result<(ConjVar, ConjVar)> {
    xi_a.checked()?;
    xi_b.checked()?;
    ensure_finite("beam-splitter angle", theta)?;
    let (s, c) = theta.sin_cos();
    Ok((
        ConjVar::new(c * xi_a.w - s * xi_b.w, c * xi_a.z - s * xi_b.z),
        ConjVar::new(s * xi_a.w + c * xi_b.w, s * xi_a.z + c * xi_b.z),
    ))
}

/// Phase e^{2i(z x' - w p')} picked up by χ under a displacement α = x' + ip'.
pub fn displacement_phase(xi: ConjVar, alpha: Complex64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * (xi.z * alpha.re - xi.w * alpha.im))
}

/// Real 2×2 matrix of the single-mode map ξ ↦ cosh s ξ + e^{iφ} sinh s ξ*.
pub(crate) fn single_mode_squeeze_matrix(s: f64, phi: f64) -> Matrix2<f64> {
    let c = s.cosh();
    let (sc, ss) = (s.sinh() * phi.cos(), s.sinh() * phi.sin());
    Matrix2::new(c + sc, ss, ss, c - sc)
}
