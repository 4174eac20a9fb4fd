// SPDX-License-Identifier: Apache-2.0

//! Teleportation channels as linear maps on characteristic-function arguments.
//!
//! Every supported variant has the form
//!
//! χ_out(x) = χ_in(L_in x) · χ_AB(L_A x, L_B x) · exp(-xᵀ E x),  x = (w, z),
//!
//! so a channel reduces to a [`LinearForm`].

use nalgebra::{Matrix2, Matrix4, SMatrix, Vector2};
use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::phase_space::ConjVar;
use crate::states::{InputChi, InputStateSpec, ResourceChi, ResourceSpec, SingleModeChi, TwoModeChi};

/// Squeezed thermal state feeding a lossy beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExternalMode {
    pub n_bar: f64,
    pub s: f64,
}

impl ExternalMode {
    pub const VACUUM: ExternalMode = ExternalMode { n_bar: 0.0, s: 0.0 };

    pub fn new(n_bar: f64, s: f64) -> Self {
        Self { n_bar, s }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelVariant {
    Ideal,
    /// Asymmetric input beam splitter with angle θ ∈ (0, π/2); θ = π/4 is balanced.
    AsymmetricBS { theta: f64 },
    /// Gaussian measurement imprecision with widths (r_m, s_m) on x and p.
    ImpreciseMeasurement { r_m: f64, s_m: f64 },
    /// Homodyne detection behind beam splitters of angles `phi_x` (x̂ arm) and
    /// `phi_p` (p̂ arm), with external modes `ext_u` and `ext_v` entering the open ports.
    LossyHomodyne { phi_x: f64, phi_p: f64, ext_u: ExternalMode, ext_v: ExternalMode },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub g_x: f64,
    pub g_p: f64,
    pub variant: ChannelVariant,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self::ideal()
    }
}

impl ChannelSpec {
    pub fn ideal() -> Self {
        Self { g_x: 1.0, g_p: 1.0, variant: ChannelVariant::Ideal }
    }

    pub fn new(variant: ChannelVariant) -> Self {
        Self { g_x: 1.0, g_p: 1.0, variant }
    }

    pub fn with_gains(mut self, g_x: f64, g_p: f64) -> Self {
        self.g_x = g_x;
        self.g_p = g_p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("g_x", self.g_x), ("g_p", self.g_p)] {
            ensure_finite(name, g)?;
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::Spec(format!("gain {name} = {g} outside (0, 1]")));
            }
        }
        match self.variant {
            ChannelVariant::Ideal => Ok(()),
            ChannelVariant::AsymmetricBS { theta } => {
                ensure_finite("beam-splitter angle", theta)?;
                if theta <= 0.0 || theta >= std::f64::consts::FRAC_PI_2 {
                    return Err(Error::Spec(format!("beam-splitter angle {theta} outside (0, π/2)")));
                }
                Ok(())
            }
            ChannelVariant::ImpreciseMeasurement { r_m, s_m } => {
                ensure_finite("r_m", r_m)?;
                ensure_finite("s_m", s_m)
            }
            ChannelVariant::LossyHomodyne { phi_x, phi_p, ext_u, ext_v } => {
                if self.g_x != 1.0 || self.g_p != 1.0 {
                    return Err(Error::Spec("lossy homodyne models its own losses; gains must be 1".into()));
                }
                for (name, v) in [
                    ("phi_x", phi_x),
                    ("phi_p", phi_p),
                    ("ext_u.n_bar", ext_u.n_bar),
                    ("ext_u.s", ext_u.s),
                    ("ext_v.n_bar", ext_v.n_bar),
                    ("ext_v.s", ext_v.s),
                ] {
                    ensure_finite(name, v)?;
                }
                if ext_u.n_bar < 0.0 || ext_v.n_bar < 0.0 {
                    return Err(Error::Spec("external-mode photon numbers must be nonnegative".into()));
                }
                Ok(())
            }
        }
    }

    /// The channel's argument maps and Gaussian smearing.
    pub fn linear_form(&self) -> Result<LinearForm> {
        self.validate()?;
        let (gx, gp) = (self.g_x, self.g_p);
        let ideal = LinearForm {
            l_in: Matrix2::new(gp, 0.0, 0.0, gx),
            l_a: Matrix2::new(gp, 0.0, 0.0, -gx),
            l_b: Matrix2::identity(),
            noise: Matrix2::zeros(),
        };
        Ok(match self.variant {
            ChannelVariant::Ideal => ideal,
            ChannelVariant::AsymmetricBS { theta } => {
                let (t, ct) = (theta.tan(), 1.0 / theta.tan());
                LinearForm {
                    l_in: Matrix2::new(gp * t, 0.0, 0.0, gx * ct),
                    l_b: Matrix2::new(t, 0.0, 0.0, ct),
                    ..ideal
                }
            }
            ChannelVariant::ImpreciseMeasurement { r_m, s_m } => LinearForm {
                noise: Matrix2::new(
                    2.0 * (-2.0 * s_m).exp() * gp * gp,
                    0.0,
                    0.0,
                    2.0 * (-2.0 * r_m).exp() * gx * gx,
                ),
                ..ideal
            },
            ChannelVariant::LossyHomodyne { phi_x, phi_p, ext_u, ext_v } => {
                let (cx, cp) = (phi_x.cos(), phi_p.cos());
                // thermal external χ exp(-n̄²(e^{-2s} z² + e^{2s} w²)) at i√2 sin φ_x z and √2 sin φ_p w
                let nw = 2.0 * ext_v.n_bar.powi(2) * (2.0 * ext_v.s).exp() * phi_p.sin().powi(2);
                let nz = 2.0 * ext_u.n_bar.powi(2) * (-2.0 * ext_u.s).exp() * phi_x.sin().powi(2);
                LinearForm {
                    l_in: Matrix2::new(cp, 0.0, 0.0, cx),
                    l_a: Matrix2::new(cp, 0.0, 0.0, -cx),
                    l_b: Matrix2::identity(),
                    noise: Matrix2::new(nw, 0.0, 0.0, nz),
                }
            }
        })
    }
}

/// χ_out(x) = χ_in(L_in x) χ_AB(L_A x, L_B x) exp(-xᵀ E x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearForm {
    pub l_in: Matrix2<f64>,
    pub l_a: Matrix2<f64>,
    pub l_b: Matrix2<f64>,
    pub noise: Matrix2<f64>,
}

fn to_complex(v: Vector2<f64>) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl LinearForm {
    pub fn output_chi<I: SingleModeChi + ?Sized, R: TwoModeChi + ?Sized>(
        &self,
        input: &I,
        resource: &R,
        xi: Complex64,
    ) -> Complex64 {
        let x = Vector2::new(xi.re, xi.im);
        let v = input.chi(to_complex(self.l_in * x)) * resource.chi(to_complex(self.l_a * x), to_complex(self.l_b * x));
        let e = (x.transpose() * self.noise * x)[0];
        if e == 0.0 {
            v
        } else {
            v * (-e).exp()
        }
    }

    /// Decay of χ_out given the input and resource envelopes.
    pub fn output_envelope(&self, m_in: &Matrix2<f64>, m_ab: &Matrix4<f64>) -> Matrix2<f64> {
        let mut stack = SMatrix::<f64, 4, 2>::zeros();
        stack.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.l_a);
        stack.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.l_b);
        self.l_in.transpose() * m_in * self.l_in + stack.transpose() * m_ab * stack + self.noise
    }
}

/// Output state of one teleportation run, usable wherever a single-mode χ is.
#[derive(Debug, Clone)]
pub struct OutputState<I = InputChi, R = ResourceChi> {
    pub input: I,
    pub resource: R,
    pub form: LinearForm,
}

impl<I: SingleModeChi, R: TwoModeChi> OutputState<I, R> {
    pub fn from_parts(form: LinearForm, input: I, resource: R) -> Self {
        Self { input, resource, form }
    }
}

impl<I: SingleModeChi, R: TwoModeChi> SingleModeChi for OutputState<I, R> {
    fn chi(&self, xi: Complex64) -> Complex64 {
        self.form.output_chi(&self.input, &self.resource, xi)
    }

    fn envelope(&self) -> Matrix2<f64> {
        self.form.output_envelope(&self.input.envelope(), &self.resource.envelope())
    }
}

pub fn output_state(channel: &ChannelSpec, input: &InputStateSpec, resource: &ResourceSpec) -> Result<OutputState> {
    Ok(OutputState::from_parts(channel.linear_form()?, input.evaluator()?, resource.evaluator()?))
}

pub fn output_chi(
    channel: &ChannelSpec,
    input: &InputStateSpec,
    resource: &ResourceSpec,
    xi_b: ConjVar,
) -> Result<Complex64> {
    xi_b.checked()?;
    Ok(output_state(channel, input, resource)?.chi(xi_b.to_complex()))
}

/// Formal maximally entangled resource with χ ≡ 1; not square integrable.
#[cfg(test)]
pub(crate) struct EprResource;

#[cfg(test)]
impl TwoModeChi for EprResource {
    fn chi(&self, _: Complex64, _: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn envelope(&self) -> Matrix4<f64> {
        Matrix4::zeros()
    }
}
