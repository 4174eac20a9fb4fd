// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock-basis synthesis of inputs and resources.
//!
//! This is the brute-force oracle layer: it shares no formulas with
//! [`crate::states`] beyond the squeezing convention itself.  Two-mode
//! squeezing is applied in disentangled form, S|n,n⟩ = (n!)⁻¹ (S a†S†)ⁿ(S b†S†)ⁿ S|0,0⟩,
//! with S a† S† = cosh r a† + e^{-iφ} sinh r b on an index grid padded beyond
//! N_max so that every kept coefficient is exact.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase_space::ConjVar;
use crate::states::{InputStateSpec, ResourceFamily, ResourceSpec};

pub const DEFAULT_N_MAX: usize = 40;
pub const MAX_N_MAX: usize = 320;
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

const PAD: usize = 6;
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Pure two-mode state ψ[n_A][n_B], 0 ≤ n_A, n_B ≤ N_max.
#[derive(Debug, Clone)]
pub struct FockTensor {
    amps: DMatrix<Complex64>,
    tail_mass: f64,
}

impl FockTensor {
    /// Wraps amplitudes whose full (untruncated) state had unit norm.
    pub fn from_amplitudes(amps: DMatrix<Complex64>) -> Self {
        assert!(amps.is_square(), "two-mode amplitudes must be square");
        let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        Self { amps, tail_mass: (1.0 - kept).max(0.0) }
    }

    pub fn vacuum(n_max: usize) -> Self {
        let mut amps = DMatrix::zeros(n_max + 1, n_max + 1);
        amps[(0, 0)] = Complex64::new(1.0, 0.0);
        Self::from_amplitudes(amps)
    }

    pub fn amplitudes(&self) -> &DMatrix<Complex64> {
        &self.amps
    }

    pub fn n_max(&self) -> usize {
        self.amps.nrows() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }
}

/// Pure single-mode state truncated at N_max.
#[derive(Debug, Clone)]
pub struct FockVector {
    amps: DVector<Complex64>,
    tail_mass: f64,
}

impl FockVector {
    pub fn from_amplitudes(amps: DVector<Complex64>) -> Self {
        let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        Self { amps, tail_mass: (1.0 - kept).max(0.0) }
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// ρ[m][n] = ψ_m ψ_n*.
    pub fn density(&self) -> DMatrix<Complex64> {
        &self.amps * self.amps.adjoint()
    }
}

/// ln n! for n < 2048.
pub fn log_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let mut v = vec![0.0; 2048];
        for k in 1..v.len() {
            v[k] = v[k - 1] + (k as f64).ln();
        }
        v
    });
    t[n]
}

/// Matrix ⟨m|D(α)|n⟩ for 0 ≤ m, n < dim, from the associated-Laguerre closed form.
pub fn displacement_matrix(alpha: Complex64, dim: usize) -> DMatrix<Complex64> {
    let mut d = DMatrix::from_element(dim, dim, ZERO);
    let x = alpha.norm_sqr();
    if x == 0.0 {
        d.fill_with_identity();
        return d;
    }
    let (ln_abs, arg) = (0.5 * x.ln(), alpha.arg());
    for k in 0..dim {
        let kf = k as f64;
        let lower = Complex64::from_polar(1.0, kf * arg);
        let upper = Complex64::from_polar(1.0, kf * (std::f64::consts::PI - arg));
        // L_n^{(k)}(x) by the three-term recurrence in n
        let (mut l_prev, mut l_cur) = (0.0, 1.0);
        for n in 0..dim - k {
            if n == 1 {
                l_prev = 1.0;
                l_cur = 1.0 + kf - x;
            } else if n > 1 {
                let j = (n - 1) as f64;
                let next = ((2.0 * j + 1.0 + kf - x) * l_cur - (j + kf) * l_prev) / (j + 1.0);
                l_prev = l_cur;
                l_cur = next;
            }
            let m = n + k;
            let mag = (0.5 * (log_factorial(n) - log_factorial(m)) + kf * ln_abs - 0.5 * x).exp() * l_cur;
            d[(m, n)] = lower * mag;
            if k > 0 {
                d[(n, m)] = upper * mag;
            }
        }
    }
    d
}

fn tmsv_coefficient(n: usize, t: f64, c: f64, phi: f64) -> Complex64 {
    // (cosh r)^{-1} (-e^{iφ} tanh r)^n
    if n == 0 {
        return Complex64::new(1.0 / c, 0.0);
    }
    if t == 0.0 {
        return ZERO;
    }
    let nf = n as f64;
    let phase = nf * (phi + std::f64::consts::PI) + if t < 0.0 { nf * std::f64::consts::PI } else { 0.0 };
    Complex64::from_polar((nf * t.abs().ln()).exp() / c, phase)
}

/// Padded two-mode grid with ladder operators.
struct Grid {
    k: usize,
}

impl Grid {
    fn raise_a(&self, v: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.k, self.k, |m, n| if m == 0 { ZERO } else { v[(m - 1, n)] * (m as f64).sqrt() })
    }

    fn lower_a(&self, v: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.k, self.k, |m, n| {
            if m + 1 >= self.k {
                ZERO
            } else {
                v[(m + 1, n)] * ((m + 1) as f64).sqrt()
            }
        })
    }

    fn raise_b(&self, v: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.raise_a(&v.transpose()).transpose()
    }

    fn lower_b(&self, v: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.lower_a(&v.transpose()).transpose()
    }

    fn tmsv(&self, r: f64, phi: f64) -> DMatrix<Complex64> {
        let (t, c) = (r.tanh(), r.cosh());
        DMatrix::from_fn(self.k, self.k, |m, n| if m == n { tmsv_coefficient(n, t, c, phi) } else { ZERO })
    }

    /// Applies (S a† S†)(S b† S†) once.
    fn squeezed_pair_creation(&self, v: &DMatrix<Complex64>, r: f64, phi: f64) -> DMatrix<Complex64> {
        let c = r.cosh();
        let es = Complex64::from_polar(r.sinh(), -phi);
        let inner = self.raise_b(v) * Complex64::new(c, 0.0) + self.lower_a(v) * es;
        self.raise_a(&inner) * Complex64::new(c, 0.0) + self.lower_b(&inner) * es
    }

    /// S(ζ)|n,n⟩ for n ≤ 2.
    fn squeezed_nn(&self, n: usize, r: f64, phi: f64) -> DMatrix<Complex64> {
        let mut v = self.tmsv(r, phi);
        for _ in 0..n {
            v = self.squeezed_pair_creation(&v, r, phi);
        }
        let fact = [1.0, 1.0, 2.0][n];
        v / Complex64::new(fact, 0.0)
    }
}

fn truncate(v: &DMatrix<Complex64>, n_max: usize) -> DMatrix<Complex64> {
    v.view((0, 0), (n_max + 1, n_max + 1)).into_owned()
}

/// Amplitudes of a pure resource on indices 0..=n_max; the full state has unit norm.
fn resource_amplitudes(spec: &ResourceSpec, n_max: usize) -> Result<DMatrix<Complex64>> {
    let (r, phi) = (spec.r, spec.phi);
    let grid = Grid { k: n_max + 1 + PAD };
    let amps = match &spec.family {
        ResourceFamily::Tmsv => truncate(&grid.tmsv(r, phi), n_max),
        ResourceFamily::SqueezedFock11 => truncate(&grid.squeezed_nn(1, r, phi), n_max),
        ResourceFamily::PhotonSubtracted | ResourceFamily::PhotonAdded => {
            // kept entries are exact on the padded grid; the norm is analytic
            let tm = grid.tmsv(r, phi);
            let v = if spec.family == ResourceFamily::PhotonSubtracted {
                grid.lower_a(&grid.lower_b(&tm))
            } else {
                grid.raise_a(&grid.raise_b(&tm))
            };
            let expect = if spec.family == ResourceFamily::PhotonSubtracted {
                // ‖ab|TMSV⟩‖² = Σ n² t^{2n}/c² = sinh²r (sinh²r + cosh²r)
                r.sinh().powi(2) * (r.sinh().powi(2) + r.cosh().powi(2))
            } else {
                // ‖a†b†|TMSV⟩‖² = Σ (n+1)² t^{2n}/c² = cosh²r (sinh²r + cosh²r)
                r.cosh().powi(2) * (r.sinh().powi(2) + r.cosh().powi(2))
            };
            if expect == 0.0 {
                // r → 0 limit of the normalized subtracted state is the vacuum
                return Ok(truncate(&tm, n_max));
            }
            truncate(&v, n_max) / Complex64::new(expect.sqrt(), 0.0)
        }
        ResourceFamily::SqueezedBell { delta, theta } => {
            let v = grid.squeezed_nn(0, r, phi) * Complex64::new(delta.cos(), 0.0)
                + grid.squeezed_nn(1, r, phi) * Complex64::from_polar(delta.sin(), *theta);
            truncate(&v, n_max)
        }
        ResourceFamily::Sssf { c, theta1, theta2 } => {
            let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            let v = grid.squeezed_nn(0, r, phi) * Complex64::new(c[0] / norm, 0.0)
                + grid.squeezed_nn(1, r, phi) * Complex64::from_polar(c[1] / norm, *theta1)
                + grid.squeezed_nn(2, r, phi) * Complex64::from_polar(c[2] / norm, *theta2);
            truncate(&v, n_max)
        }
        ResourceFamily::SqueezedCat { delta, theta, gamma } => cat_amplitudes(r, phi, *delta, *theta, *gamma, n_max),
    };
    Ok(amps)
}

fn tmsv_extent(r: f64) -> usize {
    // enough extra levels that t^{2k} drops below 1e-40
    let t2 = r.tanh().powi(2);
    if t2 == 0.0 {
        0
    } else {
        ((-92.0 / t2.ln()).ceil() as usize).min(2000)
    }
}

/// N[cos δ S|0,0⟩ + e^{iθ} sin δ S D(γ)⊗D(γ)|0,0⟩] with S D(γ) S† = D(γ'') in each mode,
/// γ'' = cosh r γ − e^{iφ} sinh r γ*.
fn cat_amplitudes(r: f64, phi: f64, delta: f64, theta: f64, gamma: Complex64, n_max: usize) -> DMatrix<Complex64> {
    let (t, c) = (r.tanh(), r.cosh());
    let g2 = r.cosh() * gamma - Complex64::from_polar(r.sinh(), phi) * gamma.conj();
    let k = (n_max + 1).max(tmsv_extent(r) + 1);
    let d = displacement_matrix(g2, k.max(n_max + 1));
    let coeffs: Vec<Complex64> = (0..k).map(|j| tmsv_coefficient(j, t, c, phi)).collect();
    let norm2 = 1.0 / (1.0 + (-gamma.norm_sqr()).exp() * (2.0 * delta).sin() * theta.cos());
    let norm = norm2.sqrt();
    let cross = Complex64::from_polar(delta.sin() * norm, theta);
    DMatrix::from_fn(n_max + 1, n_max + 1, |m, n| {
        let mut disp = ZERO;
        for (j, cj) in coeffs.iter().enumerate() {
            disp += *cj * d[(m, j)] * d[(n, j)];
        }
        let vac = if m == n { coeffs.get(n).copied().unwrap_or(ZERO) } else { ZERO };
        vac * (delta.cos() * norm) + cross * disp
    })
}

/// Fock tensor of a pure resource truncated at `n_max`; fails if the discarded
/// norm exceeds `tail_tol`.
pub fn synthesize_resource_fock_with(spec: &ResourceSpec, n_max: usize, tail_tol: f64) -> Result<FockTensor> {
    spec.validate()?;
    if !spec.is_pure() {
        return Err(Error::Spec("Fock synthesis needs a pure resource (n_th = 0)".into()));
    }
    if n_max < 2 {
        return Err(Error::Spec(format!("N_max = {n_max} is below the minimum of 2")));
    }
    let t = FockTensor::from_amplitudes(resource_amplitudes(spec, n_max)?);
    if t.tail_mass > tail_tol {
        return Err(Error::Truncation { n_max, tail_mass: t.tail_mass, tail_tol });
    }
    Ok(t)
}

pub fn synthesize_resource_fock(spec: &ResourceSpec, n_max: usize) -> Result<FockTensor> {
    synthesize_resource_fock_with(spec, n_max, DEFAULT_TAIL_TOL)
}

/// Synthesis starting at N_max = 40 and raised until the tail is below `tail_tol`.
pub fn synthesize_resource_fock_auto(spec: &ResourceSpec, tail_tol: f64) -> Result<FockTensor> {
    auto_raise(|n| synthesize_resource_fock_with(spec, n, tail_tol))
}

fn auto_raise<T>(mut f: impl FnMut(usize) -> Result<T>) -> Result<T> {
    let mut n = DEFAULT_N_MAX;
    loop {
        match f(n) {
            Err(Error::Truncation { .. }) if n < MAX_N_MAX => n = (n + 40).min(MAX_N_MAX),
            other => return other,
        }
    }
}

fn input_amplitudes(spec: &InputStateSpec, n_max: usize) -> Result<DVector<Complex64>> {
    let k = n_max + 1 + PAD;
    let coherent = |beta: Complex64, k: usize| {
        DVector::from_fn(k, |n, _| {
            if beta.norm_sqr() == 0.0 {
                return if n == 0 { Complex64::new(1.0, 0.0) } else { ZERO };
            }
            let nf = n as f64;
            let mag = (nf * beta.norm().ln() - 0.5 * log_factorial(n) - 0.5 * beta.norm_sqr()).exp();
            Complex64::from_polar(mag, nf * beta.arg())
        })
    };
    let squeezed_vacuum = |s: f64, phi: f64, k: usize| {
        // (cosh s)^{-1/2} Σ (-½ e^{iφ} tanh s)^j √((2j)!)/j! |2j⟩
        let ts = s.tanh();
        DVector::from_fn(k, |n, _| {
            if n % 2 == 1 {
                return ZERO;
            }
            let j = n / 2;
            if j == 0 {
                return Complex64::new(s.cosh().powf(-0.5), 0.0);
            }
            if ts == 0.0 {
                return ZERO;
            }
            let jf = j as f64;
            let mag = (-0.5 * s.cosh().ln() + jf * (0.5 * ts.abs()).ln() + 0.5 * log_factorial(2 * j)
                - log_factorial(j))
            .exp();
            let phase = jf * (phi + std::f64::consts::PI) + if ts < 0.0 { jf * std::f64::consts::PI } else { 0.0 };
            Complex64::from_polar(mag, phase)
        })
    };
    let raise = |v: &DVector<Complex64>| DVector::from_fn(v.len(), |n, _| if n == 0 { ZERO } else { v[n - 1] * (n as f64).sqrt() });
    let lower = |v: &DVector<Complex64>| {
        DVector::from_fn(v.len(), |n, _| if n + 1 >= v.len() { ZERO } else { v[n + 1] * ((n + 1) as f64).sqrt() })
    };
    let full = match spec {
        InputStateSpec::Coherent { beta } => coherent(*beta, k),
        InputStateSpec::PhotonAddedCoherent { beta } => raise(&coherent(*beta, k)) / Complex64::new((1.0 + beta.norm_sqr()).sqrt(), 0.0),
        InputStateSpec::Fock1 => DVector::from_fn(k, |n, _| if n == 1 { Complex64::new(1.0, 0.0) } else { ZERO }),
        InputStateSpec::SqueezedVacuum { s, phi_s } => squeezed_vacuum(*s, *phi_s, k),
        InputStateSpec::SqueezedFock1 { s, phi_s } => {
            // S a† S† = cosh s a† + e^{-iφ} sinh s a
            let sv = squeezed_vacuum(*s, *phi_s, k);
            raise(&sv) * Complex64::new(s.cosh(), 0.0) + lower(&sv) * Complex64::from_polar(s.sinh(), -phi_s)
        }
        InputStateSpec::Mixture(_) => {
            return Err(Error::Spec("a mixture has no single amplitude vector; synthesize its components".into()))
        }
    };
    Ok(full.rows(0, n_max + 1).into_owned())
}

pub fn synthesize_input_fock_with(spec: &InputStateSpec, n_max: usize, tail_tol: f64) -> Result<FockVector> {
    spec.validate()?;
    if n_max < 2 {
        return Err(Error::Spec(format!("N_max = {n_max} is below the minimum of 2")));
    }
    let v = FockVector::from_amplitudes(input_amplitudes(spec, n_max)?);
    if v.tail_mass > tail_tol {
        return Err(Error::Truncation { n_max, tail_mass: v.tail_mass, tail_tol });
    }
    Ok(v)
}

pub fn synthesize_input_fock(spec: &InputStateSpec, n_max: usize) -> Result<FockVector> {
    synthesize_input_fock_with(spec, n_max, DEFAULT_TAIL_TOL)
}

pub fn synthesize_input_fock_auto(spec: &InputStateSpec, tail_tol: f64) -> Result<FockVector> {
    auto_raise(|n| synthesize_input_fock_with(spec, n, tail_tol))
}

/// χ(ξ_A, ξ_B) = Σ ψ*_{m_A m_B} ψ_{n_A n_B} ⟨m_A|D(ξ_A)|n_A⟩⟨m_B|D(ξ_B)|n_B⟩.
pub fn chi_from_fock(t: &FockTensor, xi_a: ConjVar, xi_b: ConjVar) -> Complex64 {
    let dim = t.amps.nrows();
    let da = displacement_matrix(xi_a.to_complex(), dim);
    let db = displacement_matrix(xi_b.to_complex(), dim);
    let inner = da * &t.amps * db.transpose();
    t.amps.iter().zip(inner.iter()).map(|(p, q)| p.conj() * q).sum()
}

/// χ(ξ) = ⟨ψ|D(ξ)|ψ⟩ for a single mode.
pub fn chi_from_fock_single(v: &FockVector, xi: ConjVar) -> Complex64 {
    let d = displacement_matrix(xi.to_complex(), v.amps.len());
    (v.amps.adjoint() * d * &v.amps)[(0, 0)]
}

/// ρ_A[m][n] = Σ_k ψ[m][k] ψ*[n][k].
pub fn reduced_density(t: &FockTensor) -> DMatrix<Complex64> {
    &t.amps * t.amps.adjoint()
}

/// (⟨a†a⟩, ⟨b†b⟩, ⟨ab⟩) summed directly over the amplitudes.
pub fn ladder_moments(t: &FockTensor) -> (f64, f64, Complex64) {
    let a = &t.amps;
    let dim = a.nrows();
    let (mut na, mut nb, mut ab) = (0.0, 0.0, ZERO);
    for m in 0..dim {
        for n in 0..dim {
            let p = a[(m, n)];
            na += m as f64 * p.norm_sqr();
            nb += n as f64 * p.norm_sqr();
            if m + 1 < dim && n + 1 < dim {
                ab += p.conj() * a[(m + 1, n + 1)] * (((m + 1) * (n + 1)) as f64).sqrt();
            }
        }
    }
    (na, nb, ab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::TwoModeChi;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// ⟨m|D(α)|n⟩ from the ladder recurrence √(m+1) D_{m+1,n} = √n D_{m,n-1} + α D_{m,n}.
    fn displacement_by_recurrence(alpha: Complex64, dim: usize) -> DMatrix<Complex64> {
        let big = dim + 60;
        let mut d = DMatrix::from_element(big, big, ZERO);
        let e = (-0.5 * alpha.norm_sqr()).exp();
        let mut v = c(e, 0.0);
        for n in 0..big {
            d[(0, n)] = v;
            v = v * (-alpha.conj()) / ((n + 1) as f64).sqrt();
        }
        for m in 0..big - 1 {
            for n in 0..big {
                let left = if n > 0 { d[(m, n - 1)] * (n as f64).sqrt() } else { ZERO };
                d[(m + 1, n)] = (left + alpha * d[(m, n)]) / ((m + 1) as f64).sqrt();
            }
        }
        d.view((0, 0), (dim, dim)).into_owned()
    }

    #[test]
    fn displacement_elements_agree_with_recurrence() {
        for alpha in [c(0.3, -0.2), c(-1.1, 0.7), c(0.0, 2.0)] {
            let a = displacement_matrix(alpha, 30);
            let b = displacement_by_recurrence(alpha, 30);
            let worst = (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(worst < 1e-10, "{alpha}: {worst}");
        }
    }

    #[test]
    fn displacement_columns_are_unit_norm() {
        let d = displacement_matrix(c(1.2, -0.9), 201);
        for n in 0..60 {
            let norm: f64 = d.column(n).iter().map(|x| x.norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn vacuum_tensor_chi() {
        let v = FockTensor::vacuum(10);
        assert_abs_diff_eq!(chi_from_fock(&v, ConjVar::ZERO, ConjVar::ZERO).re, 1.0, epsilon = 1e-15);
        let xi = ConjVar::new(0.6, -0.8);
        let got = chi_from_fock(&v, xi, ConjVar::ZERO);
        assert_abs_diff_eq!((got - (-0.5 * xi.norm_sqr()).exp()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn tmsv_coefficients() {
        assert_abs_diff_eq!(
            synthesize_resource_fock(&ResourceSpec::new(ResourceFamily::Tmsv, 0.0), 10).unwrap().amplitudes()[(0, 0)].re,
            1.0
        );
        let r = 0.7;
        for phi in [0.0, PI] {
            let t = synthesize_resource_fock(&ResourceSpec::new(ResourceFamily::Tmsv, r).with_phi(phi), 60).unwrap();
            for n in 0..10 {
                let want = r.tanh().powi(n as i32) / r.cosh();
                assert_abs_diff_eq!(t.amplitudes()[(n, n)].norm(), want, epsilon = 1e-15);
            }
            // positive coefficients at φ = π, alternating at φ = 0
            let sign = t.amplitudes()[(1, 1)].re.signum();
            assert_eq!(sign, if phi == PI { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn bell_without_squeezing() {
        let (delta, theta) = (0.4, 1.3);
        let spec = ResourceSpec::new(ResourceFamily::SqueezedBell { delta, theta }, 0.0);
        let t = synthesize_resource_fock(&spec, 5).unwrap();
        assert_abs_diff_eq!((t.amplitudes()[(0, 0)] - delta.cos()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((t.amplitudes()[(1, 1)] - Complex64::from_polar(delta.sin(), theta)).norm(), 0.0, epsilon = 1e-15);
        assert!(t.tail_mass() < 1e-15);
    }

    #[test]
    fn input_examples() {
        let v = synthesize_input_fock(&InputStateSpec::coherent(c(0.0, 0.0)), 10).unwrap();
        assert_eq!(v.amplitudes()[0], c(1.0, 0.0));
        let v = synthesize_input_fock(&InputStateSpec::Fock1, 10).unwrap();
        assert_eq!(v.amplitudes()[1], c(1.0, 0.0));
        let v = synthesize_input_fock(&InputStateSpec::coherent(c(1.0, 0.0)), 40).unwrap();
        let mut fact = 1.0f64;
        for n in 0..15 {
            if n > 0 {
                fact *= n as f64;
            }
            assert_abs_diff_eq!(v.amplitudes()[n].re, (-0.5f64).exp() / fact.sqrt(), epsilon = 1e-15);
        }
        assert!(synthesize_input_fock(&InputStateSpec::Mixture(vec![(1.0, InputStateSpec::Fock1)]), 10).is_err());
    }

    #[test]
    fn input_chi_matches_closed_forms() {
        let specs = [
            InputStateSpec::coherent(c(0.7, -0.4)),
            InputStateSpec::SqueezedVacuum { s: 0.8, phi_s: 0.5 },
            InputStateSpec::Fock1,
            InputStateSpec::SqueezedFock1 { s: 0.8, phi_s: -0.3 },
            InputStateSpec::photon_added_coherent(c(0.3, 0.2)),
            InputStateSpec::photon_added_coherent(c(-1.2, 0.9)),
        ];
        let points = [ConjVar::new(0.3, 0.2), ConjVar::new(-1.1, 0.4), ConjVar::new(0.5, -1.7)];
        for spec in &specs {
            let v = synthesize_input_fock_auto(spec, 1e-14).unwrap();
            let e = spec.evaluator().unwrap();
            for xi in points {
                use crate::states::SingleModeChi;
                let d = (chi_from_fock_single(&v, xi) - e.chi(xi.to_complex())).norm();
                assert!(d < 1e-10, "{spec:?} at {xi:?}: {d}");
            }
        }
    }

    fn families() -> Vec<ResourceFamily> {
        vec![
            ResourceFamily::Tmsv,
            ResourceFamily::SqueezedFock11,
            ResourceFamily::PhotonSubtracted,
            ResourceFamily::PhotonAdded,
            ResourceFamily::SqueezedBell { delta: 0.7, theta: 0.4 },
            ResourceFamily::Sssf { c: [0.8, 0.5, -0.3], theta1: 0.2, theta2: 1.1 },
            ResourceFamily::SqueezedCat { delta: 0.6, theta: 0.9, gamma: c(0.7, -0.4) },
            ResourceFamily::cat(FRAC_PI_4, c(1.3, 0.0)),
        ]
    }

    #[test]
    fn resource_chi_matches_closed_forms_at_reference_point() {
        let (a, b) = (ConjVar::new(0.3, 0.2), ConjVar::new(-0.1, 0.4));
        for phi in [PI, 0.0, 0.9] {
            for f in families() {
                let spec = ResourceSpec::new(f.clone(), 0.5).with_phi(phi);
                let t = synthesize_resource_fock(&spec, 40).unwrap();
                let want = spec.evaluator().unwrap().chi(a.to_complex(), b.to_complex());
                let d = (chi_from_fock(&t, a, b) - want).norm();
                assert!(d < 1e-10, "{f:?} φ={phi}: {d}");
            }
        }
    }

    #[test]
    fn schmidt_diagonality_and_norm() {
        for f in families().into_iter().take(6) {
            let t = synthesize_resource_fock(&ResourceSpec::new(f.clone(), 0.8), 80).unwrap();
            let a = t.amplitudes();
            let off: f64 = (0..a.nrows())
                .flat_map(|m| (0..a.ncols()).map(move |n| (m, n)))
                .filter(|(m, n)| m != n)
                .map(|(m, n)| a[(m, n)].norm_sqr())
                .sum();
            assert!(off < 1e-12, "{f:?}");
            let kept: f64 = a.iter().map(|x| x.norm_sqr()).sum();
            assert_abs_diff_eq!(kept + t.tail_mass(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn truncation_errors_and_auto_raise() {
        let spec = ResourceSpec::new(ResourceFamily::Tmsv, 1.5);
        assert!(matches!(synthesize_resource_fock(&spec, 40), Err(Error::Truncation { .. })));
        let t = synthesize_resource_fock_auto(&spec, 1e-10).unwrap();
        assert!(t.tail_mass() <= 1e-10);
        assert!(t.n_max() > 40 && t.n_max() <= MAX_N_MAX);
        let huge = ResourceSpec::new(ResourceFamily::Tmsv, 4.0);
        assert!(synthesize_resource_fock_auto(&huge, 1e-10).is_err());
        let noisy = ResourceSpec::new(ResourceFamily::Tmsv, 0.5).with_thermal(0.1, 0.1);
        assert!(matches!(synthesize_resource_fock(&noisy, 40), Err(Error::Spec(_))));
    }

    #[test]
    fn reduced_density_examples() {
        let rho = reduced_density(&FockTensor::vacuum(4));
        assert_eq!(rho[(0, 0)], c(1.0, 0.0));
        assert_abs_diff_eq!(rho.iter().map(|x| x.norm()).sum::<f64>(), 1.0);

        let bell = synthesize_resource_fock(&ResourceSpec::new(ResourceFamily::bell(FRAC_PI_4), 0.0), 4).unwrap();
        let rho = reduced_density(&bell);
        assert_abs_diff_eq!(rho[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho[(1, 1)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho[(0, 1)].norm(), 0.0, epsilon = 1e-15);

        let r = 0.9;
        let t = synthesize_resource_fock_auto(&ResourceSpec::new(ResourceFamily::Tmsv, r), 1e-12).unwrap();
        let rho = reduced_density(&t);
        for n in 0..10 {
            assert_abs_diff_eq!(rho[(n, n)].re, r.tanh().powi(2 * n as i32) / r.cosh().powi(2), epsilon = 1e-15);
        }
    }

    #[test]
    fn tmsv_ladder_moments() {
        let r = 0.6;
        for phi in [PI, 0.3] {
            let t = synthesize_resource_fock_auto(&ResourceSpec::new(ResourceFamily::Tmsv, r).with_phi(phi), 1e-14).unwrap();
            let (na, nb, ab) = ladder_moments(&t);
            assert_abs_diff_eq!(na, r.sinh().powi(2), epsilon = 1e-12);
            assert_abs_diff_eq!(nb, r.sinh().powi(2), epsilon = 1e-12);
            let want = -Complex64::from_polar(r.cosh() * r.sinh(), phi);
            assert_abs_diff_eq!((ab - want).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn degaussified_limits_at_zero_squeezing() {
        // subtraction tends to the vacuum, matching the closed form
        let spec = ResourceSpec::new(ResourceFamily::PhotonSubtracted, 0.0);
        let pss = synthesize_resource_fock(&spec, 10).unwrap();
        assert_abs_diff_eq!(pss.amplitudes()[(0, 0)].norm(), 1.0, epsilon = 1e-15);
        let xi = c(0.3, -0.5);
        let want = spec.evaluator().unwrap().chi(xi, xi);
        assert_abs_diff_eq!((chi_from_fock(&pss, xi.into(), xi.into()) - want).norm(), 0.0, epsilon = 1e-14);
        // addition reaches |1,1⟩
        let pas = synthesize_resource_fock(&ResourceSpec::new(ResourceFamily::PhotonAdded, 0.0), 10).unwrap();
        assert_abs_diff_eq!(pas.amplitudes()[(1, 1)].norm(), 1.0, epsilon = 1e-15);
        let e = ResourceSpec::new(ResourceFamily::PhotonAdded, 0.0).evaluator().unwrap();
        let xi = c(0.4, 0.1);
        let got = chi_from_fock(&pas, xi.into(), xi.into());
        assert_abs_diff_eq!((got - e.chi(xi, xi)).norm(), 0.0, epsilon = 1e-14);
    }
}
