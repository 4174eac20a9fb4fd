// SPDX-License-Identifier: Apache-2.0

//! Phase-space trace integrals: fidelity, purity and overlaps.
//!
//! Tr(ρ₁ρ₂) = π^{-n} ∫ χ₁(x) χ₂(-x) dx.  The Gaussian decay of the integrand is
//! the sum of the two evaluators' envelopes; it is whitened away and the
//! polynomial or shifted-Gaussian remainder goes to tensor Gauss–Hermite.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, SMatrix, SVector, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::protocol::{ChannelSpec, LinearForm, OutputState};
use crate::quadrature::{integrate, integrate_converged};
use crate::states::{InputStateSpec, ResourceSpec, SingleModeChi, TwoModeChi};

/// Tolerance for roundoff outside [0, 1] before a trace is declared invalid.
pub const CLAMP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Nodes per axis for single-mode integrals.
    pub order: usize,
    /// Nodes per axis for two-mode integrals.
    pub order_4d: usize,
    /// Multiplier on the envelope read off the integrand.
    pub envelope_scale: f64,
    /// Relative agreement required between successive order doublings.
    pub convergence: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { order: 48, order_4d: 24, envelope_scale: 1.0, convergence: 1e-9 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 8 || self.order_4d < 8 {
            return Err(Error::Spec(format!(
                "quadrature orders {} / {} below the minimum of 8",
                self.order, self.order_4d
            )));
        }
        if !(self.envelope_scale > 0.0 && self.envelope_scale.is_finite()) {
            return Err(Error::Spec(format!("envelope scale {} must be positive", self.envelope_scale)));
        }
        if !(self.convergence > 0.0) {
            return Err(Error::Spec(format!("convergence tolerance {} must be positive", self.convergence)));
        }
        Ok(())
    }
}

/// A characteristic function of either mode count.
#[derive(Clone, Copy)]
pub enum Chi<'a> {
    One(&'a dyn SingleModeChi),
    Two(&'a dyn TwoModeChi),
}

impl Chi<'_> {
    pub fn modes(&self) -> usize {
        match self {
            Chi::One(_) => 1,
            Chi::Two(_) => 2,
        }
    }
}

fn run<const D: usize, F>(f: &F, q: &SMatrix<f64, D, D>, order: usize, cfg: &QuadratureConfig, converge: bool) -> Result<Complex64>
where
    F: Fn(&SVector<f64, D>) -> Complex64 + Sync,
{
    cfg.validate()?;
    let q = q * cfg.envelope_scale;
    if converge {
        integrate_converged(f, &q, order, cfg.convergence)
    } else {
        integrate(f, &q, order)
    }
}

/// π^{-1} ∫ a(x) b(-x) over ℝ².
pub fn trace_product_1<A, B>(a: &A, b: &B, cfg: &QuadratureConfig, converge: bool) -> Result<Complex64>
where
    A: SingleModeChi + ?Sized,
    B: SingleModeChi + ?Sized,
{
    let f = |x: &Vector2<f64>| {
        let xi = Complex64::new(x[0], x[1]);
        a.chi(xi) * b.chi(-xi)
    };
    let q: Matrix2<f64> = a.envelope() + b.envelope();
    Ok(run(&f, &q, cfg.order, cfg, converge)? / PI)
}

/// π^{-2} ∫ a(x) b(-x) over ℝ⁴, x = (w_A, z_A, w_B, z_B).
pub fn trace_product_2<A, B>(a: &A, b: &B, cfg: &QuadratureConfig, converge: bool) -> Result<Complex64>
where
    A: TwoModeChi + ?Sized,
    B: TwoModeChi + ?Sized,
{
    let f = |x: &Vector4<f64>| {
        let (xa, xb) = (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
        a.chi(xa, xb) * b.chi(-xa, -xb)
    };
    let q: Matrix4<f64> = a.envelope() + b.envelope();
    Ok(run(&f, &q, cfg.order_4d, cfg, converge)? / (PI * PI))
}

/// Real part of a trace known to lie in [0, 1], clamped after the roundoff check.
pub fn clamp_unit(v: Complex64) -> Result<f64> {
    let x = v.re;
    if !x.is_finite() {
        return Err(Error::Domain(format!("trace integral is not finite ({v})")));
    }
    if x < -CLAMP_TOL {
        return Err(Error::Negative(x));
    }
    if x > 1.0 + CLAMP_TOL {
        return Err(Error::Domain(format!("trace integral {x} exceeds 1")));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Fidelity Tr(ρ_in ρ_out) for arbitrary evaluators.
pub fn fidelity_of<I, R>(form: &LinearForm, input: &I, resource: &R, cfg: &QuadratureConfig, converge: bool) -> Result<f64>
where
    I: SingleModeChi,
    R: TwoModeChi,
{
    let out = OutputState::from_parts(*form, input, resource);
    clamp_unit(trace_product_1(input, &out, cfg, converge)?)
}

pub fn fidelity(
    channel: &ChannelSpec,
    input: &InputStateSpec,
    resource: &ResourceSpec,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    fidelity_of(&channel.linear_form()?, &input.evaluator()?, &resource.evaluator()?, cfg, true)
}

/// Fidelity at `cfg.order` only; for optimizer inner loops.
pub fn fidelity_single_order(
    channel: &ChannelSpec,
    input: &InputStateSpec,
    resource: &ResourceSpec,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    fidelity_of(&channel.linear_form()?, &input.evaluator()?, &resource.evaluator()?, cfg, false)
}

/// Tr(ρ_i ρ_out[ρ_j]) where ρ_out[ρ_j] is the channel output for input ρ_j.
pub fn cross_trace<I, J, R>(form: &LinearForm, rho_i: &I, rho_j: &J, resource: &R, cfg: &QuadratureConfig) -> Result<Complex64>
where
    I: SingleModeChi,
    J: SingleModeChi,
    R: TwoModeChi,
{
    let out = OutputState::from_parts(*form, rho_j, resource);
    trace_product_1(rho_i, &out, cfg, true)
}

/// Tr ρ².
pub fn purity(chi: Chi<'_>, cfg: &QuadratureConfig) -> Result<f64> {
    state_overlap(chi, chi, cfg)
}

/// Tr(ρ₁ρ₂).
pub fn state_overlap(a: Chi<'_>, b: Chi<'_>, cfg: &QuadratureConfig) -> Result<f64> {
    let v = match (a, b) {
        (Chi::One(a), Chi::One(b)) => trace_product_1(a, b, cfg, true)?,
        (Chi::Two(a), Chi::Two(b)) => trace_product_2(a, b, cfg, true)?,
        _ => {
            return Err(Error::Spec(format!(
                "overlap of a {}-mode and a {}-mode state",
                a.modes(),
                b.modes()
            )))
        }
    };
    clamp_unit(v)
}

// blanket impls so borrowed evaluators compose
impl<T: SingleModeChi + ?Sized> SingleModeChi for &T {
    fn chi(&self, xi: Complex64) -> Complex64 {
        (**self).chi(xi)
    }

    fn envelope(&self) -> Matrix2<f64> {
        (**self).envelope()
    }
}

impl<T: TwoModeChi + ?Sized> TwoModeChi for &T {
    fn chi(&self, xi_a: Complex64, xi_b: Complex64) -> Complex64 {
        (**self).chi(xi_a, xi_b)
    }

    fn envelope(&self) -> Matrix4<f64> {
        (**self).envelope()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{ChannelVariant, ExternalMode};
    use crate::states::{ResourceFamily, ResourceMixture};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn tmsv(r: f64) -> ResourceSpec {
        ResourceSpec::new(ResourceFamily::Tmsv, r)
    }

    #[test]
    fn fidelity_examples() {
        let ideal = ChannelSpec::ideal();
        let coh = InputStateSpec::coherent(c(0.0, 0.0));
        let f = fidelity(&ideal, &coh, &tmsv(0.0), &cfg()).unwrap();
        assert_abs_diff_eq!(f, 0.5, epsilon = 1e-12);
        let f = fidelity(&ideal, &coh, &tmsv(0.5), &cfg()).unwrap();
        assert_abs_diff_eq!(f, 1.0 / (1.0 + (-1.0f64).exp()), epsilon = 1e-12);
        let sqf = ResourceSpec::new(ResourceFamily::SqueezedFock11, 0.0);
        let f = fidelity(&ideal, &coh, &sqf, &cfg()).unwrap();
        assert_abs_diff_eq!(f, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn tmsv_fidelity_matches_gaussian_formula() {
        // coherent input through TMSV with thermal noise: 1/(1 + e^{-2r} + n_A + n_B)
        for (r, n) in [(0.3, 0.0), (0.9, 0.05), (1.5, 0.15)] {
            let spec = tmsv(r).with_thermal(n, n);
            let f = fidelity(&ChannelSpec::ideal(), &InputStateSpec::coherent(c(0.5, 0.2)), &spec, &cfg()).unwrap();
            assert_abs_diff_eq!(f, 1.0 / (1.0 + (-2.0 * r).exp() + 2.0 * n), epsilon = 1e-10);
        }
    }

    #[test]
    fn overlap_examples() {
        let vac = InputStateSpec::coherent(c(0.0, 0.0)).evaluator().unwrap();
        let one = InputStateSpec::Fock1.evaluator().unwrap();
        let coh = InputStateSpec::coherent(c(1.0, 0.0)).evaluator().unwrap();
        assert_abs_diff_eq!(state_overlap(Chi::One(&vac), Chi::One(&vac), &cfg()).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(state_overlap(Chi::One(&vac), Chi::One(&one), &cfg()).unwrap(), 0.0, epsilon = 1e-12);
        let v = state_overlap(Chi::One(&vac), Chi::One(&coh), &cfg()).unwrap();
        assert_abs_diff_eq!(v, (-1.0f64).exp(), epsilon = 1e-12);
        let w = state_overlap(Chi::One(&coh), Chi::One(&vac), &cfg()).unwrap();
        assert_abs_diff_eq!(v, w, epsilon = 1e-12);
        let pair = tmsv(0.3).evaluator().unwrap();
        assert!(state_overlap(Chi::One(&vac), Chi::Two(&pair), &cfg()).is_err());
    }

    #[test]
    fn pure_states_have_unit_purity() {
        for spec in [
            InputStateSpec::coherent(c(0.3, 1.0)),
            InputStateSpec::squeezed_vacuum(0.8),
            InputStateSpec::Fock1,
            InputStateSpec::squeezed_fock1(0.8),
            InputStateSpec::photon_added_coherent(c(0.3, 0.0)),
        ] {
            let e = spec.evaluator().unwrap();
            assert_abs_diff_eq!(purity(Chi::One(&e), &cfg()).unwrap(), 1.0, epsilon = 1e-8);
        }
        for fam in [
            ResourceFamily::Tmsv,
            ResourceFamily::PhotonAdded,
            ResourceFamily::bell(0.9),
            ResourceFamily::sssf(0.7, 0.5, 0.3),
            ResourceFamily::cat(0.6, c(1.0, 0.3)),
        ] {
            let e = ResourceSpec::new(fam.clone(), 0.5).evaluator().unwrap();
            let p = purity(Chi::Two(&e), &cfg()).unwrap();
            assert_abs_diff_eq!(p, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn mixture_purity() {
        let mix = InputStateSpec::Mixture(vec![
            (0.5, InputStateSpec::coherent(c(0.0, 0.0))),
            (0.5, InputStateSpec::Fock1),
        ]);
        let e = mix.evaluator().unwrap();
        assert_abs_diff_eq!(purity(Chi::One(&e), &cfg()).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn thermal_tmsv_purity() {
        // Gaussian χ = exp(-xᵀ C x / 2) has purity det(C)^{-1/2}
        let mut last = 1.0 + 1e-12;
        for n in [0.0, 0.05, 0.1, 0.15] {
            let spec = tmsv(0.6).with_thermal(n, n);
            let e = spec.evaluator().unwrap();
            let p = purity(Chi::Two(&e), &cfg()).unwrap();
            let c = e.envelope() * 2.0;
            assert_abs_diff_eq!(p, 1.0 / c.determinant().sqrt(), epsilon = 1e-10);
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn resource_mixture_linearity() {
        let (a, b) = (
            ResourceSpec::new(ResourceFamily::bell(0.7), 0.6),
            ResourceSpec::new(ResourceFamily::PhotonSubtracted, 0.9).with_thermal(0.05, 0.1),
        );
        let ch = ChannelSpec::ideal().with_gains(0.9, 0.95);
        for input in [InputStateSpec::coherent(c(0.2, 0.0)), InputStateSpec::squeezed_fock1(0.8)] {
            let fa = fidelity(&ch, &input, &a, &cfg()).unwrap();
            let fb = fidelity(&ch, &input, &b, &cfg()).unwrap();
            let mix = ResourceMixture::new(&[(0.3, a.clone()), (0.7, b.clone())]).unwrap();
            let fm = fidelity_of(&ch.linear_form().unwrap(), &input.evaluator().unwrap(), &mix, &cfg(), true).unwrap();
            assert_abs_diff_eq!(fm, 0.3 * fa + 0.7 * fb, epsilon = 1e-10);
        }
    }

    #[test]
    fn input_mixture_bilinearity() {
        let parts = vec![
            (0.25, InputStateSpec::coherent(c(0.3, -0.1))),
            (0.45, InputStateSpec::Fock1),
            (0.30, InputStateSpec::squeezed_vacuum(0.8)),
        ];
        let mix = InputStateSpec::Mixture(parts.clone());
        let res = ResourceSpec::new(ResourceFamily::sssf(0.7, 0.5, 0.3), 0.7);
        let ch = ChannelSpec::new(ChannelVariant::ImpreciseMeasurement { r_m: 1.0, s_m: 0.8 });
        let direct = fidelity(&ch, &mix, &res, &cfg()).unwrap();
        let form = ch.linear_form().unwrap();
        let r = res.evaluator().unwrap();
        let mut sum = Complex64::new(0.0, 0.0);
        for (wi, si) in &parts {
            for (wj, sj) in &parts {
                let v = cross_trace(&form, &si.evaluator().unwrap(), &sj.evaluator().unwrap(), &r, &cfg()).unwrap();
                sum += v * (wi * wj);
            }
        }
        assert_abs_diff_eq!(direct, sum.re, epsilon = 1e-10);
        assert_abs_diff_eq!(sum.im, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn coherent_amplitude_is_irrelevant_at_unit_gain() {
        let res = ResourceSpec::new(ResourceFamily::bell(0.5), 0.8);
        let fs: Vec<f64> = [c(0.0, 0.0), c(0.5, 0.0), c(1.0, -1.0), c(-2.0, 0.7), c(0.0, 3.0)]
            .iter()
            .map(|b| fidelity(&ChannelSpec::ideal(), &InputStateSpec::coherent(*b), &res, &cfg()).unwrap())
            .collect();
        let spread = fs.iter().cloned().fold(f64::MIN, f64::max) - fs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-9, "{fs:?}");
    }

    #[test]
    fn order_doubling_is_stable() {
        let ch = ChannelSpec::ideal();
        let specs = [
            (InputStateSpec::Fock1, ResourceSpec::new(ResourceFamily::sssf(0.5, 0.6, 0.62), 1.5)),
            (InputStateSpec::squeezed_fock1(0.8), ResourceSpec::new(ResourceFamily::PhotonAdded, 1.2)),
            (InputStateSpec::coherent(c(0.0, 0.0)), ResourceSpec::new(ResourceFamily::cat(0.7, c(2.5, 0.0)), 1.0)),
        ];
        for (inp, res) in specs {
            let a = fidelity_single_order(&ch, &inp, &res, &cfg()).unwrap();
            let b = fidelity_single_order(&ch, &inp, &res, &QuadratureConfig { order: 96, ..cfg() }).unwrap();
            assert!((a - b).abs() < 1e-9, "{inp:?} {res:?}: {a} vs {b}");
        }
    }

    #[test]
    fn config_validation() {
        let bad = [
            QuadratureConfig { order: 4, ..cfg() },
            QuadratureConfig { order_4d: 0, ..cfg() },
            QuadratureConfig { envelope_scale: 0.0, ..cfg() },
            QuadratureConfig { convergence: -1.0, ..cfg() },
        ];
        for b in bad {
            assert!(fidelity(&ChannelSpec::ideal(), &InputStateSpec::Fock1, &tmsv(0.3), &b).is_err());
        }
    }

    #[test]
    fn clamping() {
        assert_eq!(clamp_unit(c(-1e-12, 0.0)).unwrap(), 0.0);
        assert_eq!(clamp_unit(c(1.0 + 1e-12, 0.0)).unwrap(), 1.0);
        assert!(matches!(clamp_unit(c(-1e-6, 0.0)), Err(Error::Negative(_))));
        assert!(clamp_unit(c(1.1, 0.0)).is_err());
        assert!(clamp_unit(c(f64::NAN, 0.0)).is_err());
    }

    fn channel_strategy() -> impl Strategy<Value = ChannelSpec> {
        prop_oneof![
            (0.3..1.0f64, 0.3..1.0f64).prop_map(|(gx, gp)| ChannelSpec::ideal().with_gains(gx, gp)),
            (0.3..1.2f64).prop_map(|t| ChannelSpec::new(ChannelVariant::AsymmetricBS { theta: t })),
            (-1.0..2.0f64, -1.0..2.0f64)
                .prop_map(|(r_m, s_m)| ChannelSpec::new(ChannelVariant::ImpreciseMeasurement { r_m, s_m })),
            (0.0..0.8f64, 0.0..0.8f64, 0.0..0.5f64).prop_map(|(px, pp, n)| ChannelSpec::new(
                ChannelVariant::LossyHomodyne {
                    phi_x: px,
                    phi_p: pp,
                    ext_u: ExternalMode::new(n, 0.1),
                    ext_v: ExternalMode::new(n, -0.1)
                }
            )),
        ]
    }

    fn resource_strategy() -> impl Strategy<Value = ResourceSpec> {
        (0usize..5, 0.0..1.2f64, 0.0..3.1f64, 0.0..0.15f64).prop_map(|(k, r, d, n)| {
            let fam = match k {
                0 => ResourceFamily::Tmsv,
                1 => ResourceFamily::SqueezedFock11,
                2 => ResourceFamily::PhotonAdded,
                3 => ResourceFamily::bell(d),
                _ => ResourceFamily::cat(d, c(1.0, 0.2)),
            };
            ResourceSpec::new(fam, r).with_thermal(n, n)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn fidelity_is_a_probability(ch in channel_strategy(), res in resource_strategy(), k in 0usize..4) {
            let input = [
                InputStateSpec::coherent(c(0.4, 0.1)),
                InputStateSpec::squeezed_vacuum(0.8),
                InputStateSpec::Fock1,
                InputStateSpec::photon_added_coherent(c(0.3, 0.0)),
            ][k].clone();
            let f = fidelity(&ch, &input, &res, &cfg()).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}
