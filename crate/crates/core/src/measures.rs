// SPDX-License-Identifier: Apache-2.0

//! Resource properties: moments, inseparability, entropy, non-Gaussianity and
//! squeezed-vacuum affinity.
//!
//! Moments come from derivatives of χ at the origin, in symmetric ordering:
//! ⟨a⟩ = -½(∂_w + i∂_z)χ, ⟨{a†a}⟩ = -¼(∂²_w + ∂²_z)χ and
//! ⟨a_A a_B⟩ = ¼(∂_{w_A} + i∂_{z_A})(∂_{w_B} + i∂_{z_B})χ.

use nalgebra::{Matrix4, SMatrix, SVector, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::fock_rep::{reduced_density, synthesize_resource_fock_auto};
use crate::optimize::maximize_1d;
use crate::overlap::{state_overlap, Chi, QuadratureConfig};
use crate::states::{ResourceSpec, TwoModeChi};

/// Base finite-difference step in whitened units.
pub const FD_STEP: f64 = 2e-2;
/// Agreement required between the two Richardson estimates.
pub const FD_TOL: f64 = 1e-9;
/// Tail mass allowed when synthesizing tensors for entropy and affinity. Amplitude
/// roundoff alone reaches ~1e-13 near r = 1.5, so tighter bounds cannot be met.
pub const MEASURE_TAIL_TOL: f64 = 1e-11;
/// Default upper end of the affinity search.
pub const AFFINITY_S_MAX: f64 = 5.0;

type Grad = SVector<Complex64, 4>;
type Hess = SMatrix<Complex64, 4, 4>;

/// Normally ordered photon numbers, pair correlation and means of a two-mode state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoments {
    pub n_a: f64,
    pub n_b: f64,
    /// ⟨a_A a_B⟩.
    pub cross: Complex64,
    pub mean_a: Complex64,
    pub mean_b: Complex64,
}

/// Gaussian characteristic function exp(i mᵀx - ½ xᵀCx), x = (w_A, z_A, w_B, z_B).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChi {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl TwoModeChi for GaussianChi {
    fn chi(&self, xi_a: Complex64, xi_b: Complex64) -> Complex64 {
        let x = Vector4::new(xi_a.re, xi_a.im, xi_b.re, xi_b.im);
        let q = (x.transpose() * self.cov * x)[0];
        Complex64::from_polar((-0.5 * q).exp(), self.mean.dot(&x))
    }

    fn envelope(&self) -> Matrix4<f64> {
        self.cov * 0.5
    }
}

fn derivatives_at(chi: &dyn TwoModeChi, h: f64) -> (Grad, Hess) {
    let f = |x: Vector4<f64>| chi.chi(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
    let e = |i: usize| Vector4::from_fn(|k, _| if k == i { h } else { 0.0 });
    let f0 = f(Vector4::zeros());
    let mut g = Grad::zeros();
    let mut hs = Hess::zeros();
    let mut plus = [Complex64::default(); 4];
    let mut minus = [Complex64::default(); 4];
    for i in 0..4 {
        plus[i] = f(e(i));
        minus[i] = f(-e(i));
        g[i] = (plus[i] - minus[i]) / (2.0 * h);
        hs[(i, i)] = (plus[i] - 2.0 * f0 + minus[i]) / (h * h);
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let v = (f(e(i) + e(j)) - f(e(i) - e(j)) - f(e(j) - e(i)) + f(-e(i) - e(j))) / (4.0 * h * h);
            hs[(i, j)] = v;
            hs[(j, i)] = v;
        }
    }
    (g, hs)
}

fn richardson<const R: usize, const C: usize>(
    d: &[SMatrix<Complex64, R, C>],
) -> SMatrix<Complex64, R, C> {
    // central differences have even error expansions: eliminate h² then h⁴
    let k = |v: f64| Complex64::new(v, 0.0);
    let r1a = (d[1] * k(4.0) - d[0]) * k(1.0 / 3.0);
    let r1b = (d[2] * k(4.0) - d[1]) * k(1.0 / 3.0);
    (r1b * k(16.0) - r1a) * k(1.0 / 15.0)
}

fn agree<const R: usize, const C: usize>(a: &SMatrix<Complex64, R, C>, b: &SMatrix<Complex64, R, C>) -> Option<f64> {
    let worst = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm() / y.norm().max(1.0))
        .fold(0.0, f64::max);
    (worst > FD_TOL).then_some(worst)
}

/// Gradient and Hessian of χ at the origin.
///
/// Steps h, h/2, h/4 and h/2, h/4, h/8 with h = FD_STEP/√λ_max(envelope) are
/// each Richardson-extrapolated; the two estimates must agree to [`FD_TOL`].
pub fn chi_derivatives(chi: &dyn TwoModeChi) -> Result<(Grad, Hess)> {
    let lam = chi.envelope().symmetric_eigenvalues().max();
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::Differentiation(format!("envelope eigenvalue {lam} gives no step scale")));
    }
    let h = FD_STEP / lam.sqrt();
    let levels: Vec<(Grad, Hess)> = (0..4).map(|k| derivatives_at(chi, h / f64::from(1u32 << k))).collect();
    let grads: Vec<Grad> = levels.iter().map(|l| l.0).collect();
    let hess: Vec<Hess> = levels.iter().map(|l| l.1).collect();
    let (g_coarse, g_fine) = (richardson(&grads[0..3]), richardson(&grads[1..4]));
    let (h_coarse, h_fine) = (richardson(&hess[0..3]), richardson(&hess[1..4]));
    if let Some(w) = agree(&g_coarse, &g_fine).or(agree(&h_coarse, &h_fine)) {
        return Err(Error::Differentiation(format!(
            "Richardson estimates at h = {h:.3e} differ by {w:.3e} (tolerance {FD_TOL:.0e})"
        )));
    }
    Ok((g_fine, h_fine))
}

pub fn moments_of(chi: &dyn TwoModeChi) -> Result<SecondMoments> {
    let (g, h) = chi_derivatives(chi)?;
    let i = Complex64::i();
    let mean = |k: usize| -(g[k] + i * g[k + 1]) * 0.5;
    let sym_n = |k: usize| -0.25 * (h[(k, k)] + h[(k + 1, k + 1)]).re;
    let cross = (h[(0, 2)] + i * h[(0, 3)] + i * h[(1, 2)] - h[(1, 3)]) * 0.25;
    Ok(SecondMoments {
        n_a: sym_n(0) - 0.5,
        n_b: sym_n(2) - 0.5,
        cross,
        mean_a: mean(0),
        mean_b: mean(2),
    })
}

pub fn second_moments(resource: &ResourceSpec) -> Result<SecondMoments> {
    moments_of(&resource.evaluator()?)
}

/// Gaussian state with the same first and second moments as `chi`.
pub fn gaussian_twin(chi: &dyn TwoModeChi) -> Result<GaussianChi> {
    let (g, h) = chi_derivatives(chi)?;
    // for exp(i mᵀx - ½xᵀCx): ∇ = i m and ∇∇ᵀ = -C - m mᵀ
    let mean = Vector4::from_fn(|k, _| g[k].im);
    let cov = -h.map(|v| v.re) - mean * mean.transpose();
    let cov = (cov + cov.transpose()) * 0.5;
    Ok(GaussianChi { mean, cov })
}

/// Δ = n_A n_B - |⟨a_A a_B⟩|²; negative values witness entanglement.
pub fn inseparability_delta(resource: &ResourceSpec) -> Result<f64> {
    let m = second_moments(resource)?;
    Ok(m.n_a * m.n_b - m.cross.norm_sqr())
}

fn require_pure(resource: &ResourceSpec, what: &str) -> Result<()> {
    resource.validate()?;
    if !resource.is_pure() {
        return Err(Error::Spec(format!("{what} is defined here for pure resources only")));
    }
    Ok(())
}

/// -Σ λ log₂ λ over a spectrum, ignoring roundoff-level eigenvalues.
pub fn entropy_bits(eigenvalues: impl IntoIterator<Item = f64>) -> f64 {
    eigenvalues
        .into_iter()
        .filter(|&l| l > 1e-300)
        .map(|l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Entanglement entropy of a pure resource, in bits.
pub fn von_neumann_entropy(resource: &ResourceSpec) -> Result<f64> {
    require_pure(resource, "entanglement entropy")?;
    let t = synthesize_resource_fock_auto(resource, MEASURE_TAIL_TOL)?;
    let rho = reduced_density(&t);
    let eig = SymmetricEigen::new(rho).eigenvalues;
    Ok(entropy_bits(eig.iter().copied()))
}

/// Normalized Hilbert–Schmidt distance to the Gaussian twin.
pub fn non_gaussianity(resource: &ResourceSpec, cfg: &QuadratureConfig) -> Result<f64> {
    require_pure(resource, "non-Gaussianity")?;
    let chi = resource.evaluator()?;
    let g = gaussian_twin(&chi)?;
    if g.cov.cholesky().is_none() {
        return Err(Error::Differentiation("Gaussian twin covariance is not positive definite".into()));
    }
    let p = state_overlap(Chi::Two(&chi), Chi::Two(&chi), cfg)?;
    let pg = state_overlap(Chi::Two(&g), Chi::Two(&g), cfg)?;
    let o = state_overlap(Chi::Two(&chi), Chi::Two(&g), cfg)?;
    Ok(((p + pg - 2.0 * o) / (2.0 * p)).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affinity {
    pub g: f64,
    pub s_star: f64,
    /// The maximum sits on the upper end of the search interval.
    pub at_boundary: bool,
}

/// max over s ∈ [0, s_max] of |⟨TMSV(s)|ψ⟩|², TMSV taken with the resource's φ.
pub fn vacuum_affinity(resource: &ResourceSpec, s_max: f64) -> Result<Affinity> {
    require_pure(resource, "squeezed-vacuum affinity")?;
    ensure_finite("s_max", s_max)?;
    if s_max <= 0.0 {
        return Err(Error::Spec(format!("affinity search bound {s_max} must be positive")));
    }
    let t = synthesize_resource_fock_auto(resource, MEASURE_TAIL_TOL)?;
    let diag: Vec<Complex64> = (0..=t.n_max()).map(|n| t.amplitudes()[(n, n)]).collect();
    let phase = -Complex64::from_polar(1.0, resource.phi);
    let overlap = |s: f64| -> Result<f64> {
        let (ts, cs) = (s.tanh(), s.cosh());
        let mut acc = Complex64::new(0.0, 0.0);
        let mut coef = Complex64::new(1.0 / cs, 0.0);
        for d in &diag {
            acc += coef.conj() * d;
            coef *= phase * ts;
        }
        Ok(acc.norm_sqr())
    };
    let m = maximize_1d(overlap, 0.0, s_max, 256, 1e-7)?;
    Ok(Affinity { g: m.f, s_star: m.x, at_boundary: m.at_upper })
}

/// (F_opt - F_ref) / F_ref.
pub fn relative_fidelity(f_opt: f64, f_ref: f64) -> Result<f64> {
    ensure_finite("F_opt", f_opt)?;
    ensure_finite("F_ref", f_ref)?;
    if f_ref <= 0.0 {
        return Err(Error::Domain(format!("reference fidelity {f_ref} must be positive")));
    }
    Ok((f_opt - f_ref) / f_ref)
}
