// SPDX-License-Identifier: Apache-2.0

//! Closed-form characteristic functions of input states and two-mode resources.
//!
//! Specs are plain values.  Calling `evaluator()` validates a spec once and
//! precomputes its constants; the returned evaluator is then infallible and
//! cheap enough to sit inside quadrature loops.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::phase_space::{single_mode_squeeze_matrix, Bogoliubov, ConjVar};

/// A single-mode characteristic function with a known Gaussian decay.
pub trait SingleModeChi: Sync {
    fn chi(&self, xi: Complex64) -> Complex64;

    /// Quadratic form `M` with |χ(x)| ≲ poly(x) exp(-xᵀ M x), x = (w, z).
    fn envelope(&self) -> Matrix2<f64>;
}

/// A two-mode characteristic function with a known Gaussian decay.
pub trait TwoModeChi: Sync {
    fn chi(&self, xi_a: Complex64, xi_b: Complex64) -> Complex64;

    /// Quadratic form on (w_A, z_A, w_B, z_B); see [`SingleModeChi::envelope`].
    fn envelope(&self) -> Matrix4<f64>;
}

// ---------------------------------------------------------------------------
// Input states

#[derive(Debug, Clone, PartialEq)]
pub enum InputStateSpec {
    Coherent { beta: Complex64 },
    SqueezedVacuum { s: f64, phi_s: f64 },
    Fock1,
    SqueezedFock1 { s: f64, phi_s: f64 },
    PhotonAddedCoherent { beta: Complex64 },
    Mixture(Vec<(f64, InputStateSpec)>),
}

impl InputStateSpec {
    pub fn coherent(beta: Complex64) -> Self {
        Self::Coherent { beta }
    }

    pub fn squeezed_vacuum(s: f64) -> Self {
        Self::SqueezedVacuum { s, phi_s: 0.0 }
    }

    pub fn squeezed_fock1(s: f64) -> Self {
        Self::SqueezedFock1 { s, phi_s: 0.0 }
    }

    pub fn photon_added_coherent(beta: Complex64) -> Self {
        Self::PhotonAddedCoherent { beta }
    }

    pub fn is_mixture(&self) -> bool {
        matches!(self, Self::Mixture(_))
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_at_depth(0)
    }

    fn validate_at_depth(&self, depth: usize) -> Result<()> {
        match self {
            Self::Coherent { beta } | Self::PhotonAddedCoherent { beta } => {
                ensure_finite("input amplitude", beta.re)?;
                ensure_finite("input amplitude", beta.im)
            }
            Self::SqueezedVacuum { s, phi_s } | Self::SqueezedFock1 { s, phi_s } => {
                ensure_finite("input squeezing", *s)?;
                ensure_finite("input squeezing phase", *phi_s)
            }
            Self::Fock1 => Ok(()),
            Self::Mixture(parts) => {
                if depth > 0 {
                    return Err(Error::Spec("mixtures may not be nested".into()));
                }
                if parts.is_empty() {
                    return Err(Error::Spec("mixture has no components".into()));
                }
                let mut total = 0.0;
                for (w, part) in parts {
                    if !(w.is_finite() && *w >= 0.0) {
                        return Err(Error::Spec(format!("mixture weight {w} is not a nonnegative number")));
                    }
                    total += w;
                    part.validate_at_depth(depth + 1)?;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Spec(format!("mixture weights sum to {total}, not 1")));
                }
                Ok(())
            }
        }
    }

    /// Weighted pure components; a pure state is its own single component.
    pub fn components(&self) -> Vec<(f64, InputStateSpec)> {
        match self {
            Self::Mixture(parts) => parts.clone(),
            other => vec![(1.0, other.clone())],
        }
    }

    pub fn evaluator(&self) -> Result<InputChi> {
        self.validate()?;
        Ok(InputChi(self.build()))
    }

    fn build(&self) -> InputRepr {
        match *self {
            Self::Coherent { beta } => InputRepr::Coherent { beta },
            Self::PhotonAddedCoherent { beta } => InputRepr::PhotonAdded {
                beta,
                norm: 1.0 / (1.0 + beta.norm_sqr()),
            },
            Self::Fock1 => InputRepr::Squeezed { squeeze: None, fock: true },
            Self::SqueezedVacuum { s, phi_s } => InputRepr::Squeezed {
                squeeze: Some(SingleSqueeze::new(s, phi_s)),
                fock: false,
            },
            Self::SqueezedFock1 { s, phi_s } => InputRepr::Squeezed {
                squeeze: Some(SingleSqueeze::new(s, phi_s)),
                fock: true,
            },
            Self::Mixture(ref parts) => {
                InputRepr::Mixture(parts.iter().map(|(w, p)| (*w, p.build())).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct SingleSqueeze {
    cosh: f64,
    sinh_phase: Complex64,
    s: f64,
    phi: f64,
}

impl SingleSqueeze {
    fn new(s: f64, phi: f64) -> Self {
        Self {
            cosh: s.cosh(),
            sinh_phase: Complex64::from_polar(s.sinh(), phi),
            s,
            phi,
        }
    }

    #[inline]
    fn apply(&self, xi: Complex64) -> Complex64 {
        self.cosh * xi + self.sinh_phase * xi.conj()
    }
}

/// Validated, precomputed input-state characteristic function.
#[derive(Debug, Clone)]
pub struct InputChi(InputRepr);

#[derive(Debug, Clone)]
enum InputRepr {
    Coherent { beta: Complex64 },
    PhotonAdded { beta: Complex64, norm: f64 },
    Squeezed { squeeze: Option<SingleSqueeze>, fock: bool },
    Mixture(Vec<(f64, InputRepr)>),
}

impl SingleModeChi for InputChi {
    fn chi(&self, xi: Complex64) -> Complex64 {
        self.0.chi(xi)
    }

    fn envelope(&self) -> Matrix2<f64> {
        self.0.envelope()
    }
}

impl InputRepr {
    fn chi(&self, xi: Complex64) -> Complex64 {
        match self {
            Self::Coherent { beta } => {
                let ph = 2.0 * (xi * beta.conj()).im;
                Complex64::from_polar((-0.5 * xi.norm_sqr()).exp(), ph)
            }
            Self::PhotonAdded { beta, norm } => {
                let im = (xi * beta.conj()).im;
                let x = xi.norm_sqr();
                let base = Complex64::from_polar((-0.5 * x).exp(), 2.0 * im);
                base * Complex64::new(1.0 + beta.norm_sqr() - x, 2.0 * im) * *norm
            }
            Self::Squeezed { squeeze, fock } => {
                let p = squeeze.map_or(xi, |sq| sq.apply(xi));
                let x = p.norm_sqr();
                let g = (-0.5 * x).exp();
                Complex64::new(if *fock { g * (1.0 - x) } else { g }, 0.0)
            }
            Self::Mixture(parts) => parts.iter().map(|(w, p)| *w * p.chi(xi)).sum(),
        }
    }

    fn envelope(&self) -> Matrix2<f64> {
        match self {
            Self::Coherent { .. } | Self::PhotonAdded { .. } => Matrix2::identity() * 0.5,
            Self::Squeezed { squeeze, .. } => match squeeze {
                None => Matrix2::identity() * 0.5,
                Some(sq) => {
                    let t = single_mode_squeeze_matrix(sq.s, sq.phi);
                    t.transpose() * t * 0.5
                }
            },
            Self::Mixture(parts) => {
                // isotropic lower bound of every component's decay
                let mu = parts
                    .iter()
                    .map(|(_, p)| p.envelope().symmetric_eigenvalues().min())
                    .fold(f64::INFINITY, f64::min);
                Matrix2::identity() * mu
            }
        }
    }
}

pub fn chi_input(spec: &InputStateSpec, xi: ConjVar) -> Result<Complex64> {
    xi.checked()?;
    Ok(spec.evaluator()?.chi(xi.to_complex()))
}

// ---------------------------------------------------------------------------
// Resources

#[derive(Debug, Clone, PartialEq)]
pub enum ResourceFamily {
    Tmsv,
    SqueezedFock11,
    PhotonSubtracted,
    PhotonAdded,
    SqueezedBell { delta: f64, theta: f64 },
    Sssf { c: [f64; 3], theta1: f64, theta2: f64 },
    SqueezedCat { delta: f64, theta: f64, gamma: Complex64 },
}

impl ResourceFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Tmsv => "tmsv",
            Self::SqueezedFock11 => "squeezed-fock",
            Self::PhotonSubtracted => "photon-subtracted",
            Self::PhotonAdded => "photon-added",
            Self::SqueezedBell { .. } => "bell",
            Self::Sssf { .. } => "sssf",
            Self::SqueezedCat { .. } => "cat",
        }
    }

    pub fn bell(delta: f64) -> Self {
        Self::SqueezedBell { delta, theta: 0.0 }
    }

    pub fn sssf(c0: f64, c1: f64, c2: f64) -> Self {
        Self::Sssf { c: [c0, c1, c2], theta1: 0.0, theta2: 0.0 }
    }

    pub fn cat(delta: f64, gamma: Complex64) -> Self {
        Self::SqueezedCat { delta, theta: 0.0, gamma }
    }
}

/// A two-mode resource: a squeezed family member, optionally superimposed on
/// thermal noise in each mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceSpec {
    pub family: ResourceFamily,
    pub r: f64,
    pub phi: f64,
    pub n_th_a: f64,
    pub n_th_b: f64,
}

impl ResourceSpec {
    /// Resource with the protocol's squeezing phase φ = π and no thermal noise.
    pub fn new(family: ResourceFamily, r: f64) -> Self {
        Self { family, r, phi: PI, n_th_a: 0.0, n_th_b: 0.0 }
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_thermal(mut self, n_th_a: f64, n_th_b: f64) -> Self {
        self.n_th_a = n_th_a;
        self.n_th_b = n_th_b;
        self
    }

    pub fn is_pure(&self) -> bool {
        self.n_th_a == 0.0 && self.n_th_b == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("resource squeezing r", self.r)?;
        ensure_finite("resource squeezing phase", self.phi)?;
        for n in [self.n_th_a, self.n_th_b] {
            if !(n.is_finite() && n >= 0.0) {
                return Err(Error::Spec(format!("thermal parameter {n} must be finite and nonnegative")));
            }
        }
        match &self.family {
            ResourceFamily::SqueezedBell { delta, theta } => {
                ensure_finite("superposition angle", *delta)?;
                ensure_finite("superposition phase", *theta)
            }
            ResourceFamily::Sssf { c, theta1, theta2 } => {
                for v in c.iter().chain([theta1, theta2]) {
                    ensure_finite("superposition parameter", *v)?;
                }
                if c.iter().all(|v| *v == 0.0) {
                    return Err(Error::Spec("superposition coefficients are all zero".into()));
                }
                Ok(())
            }
            ResourceFamily::SqueezedCat { delta, theta, gamma } => {
                for v in [*delta, *theta, gamma.re, gamma.im] {
                    ensure_finite("cat parameter", v)?;
                }
                let arg = 1.0 + (-gamma.norm_sqr()).exp() * (2.0 * delta).sin() * theta.cos();
                if !(arg > 0.0) {
                    return Err(Error::Spec(format!("cat normalization argument {arg} is not positive")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn evaluator(&self) -> Result<ResourceChi> {
        self.validate()?;
        let bog = Bogoliubov::new(self.r, self.phi)?;
        let t = self.r.tanh();
        let squeeze_phase = Complex64::from_polar(1.0, -self.phi);
        let kind = match &self.family {
            ResourceFamily::Tmsv => Kind::Tmsv,
            ResourceFamily::SqueezedFock11 => Kind::SqueezedFock,
            ResourceFamily::PhotonSubtracted => Kind::Degaussified { added: false, t, phase: squeeze_phase },
            ResourceFamily::PhotonAdded => Kind::Degaussified { added: true, t, phase: squeeze_phase },
            ResourceFamily::SqueezedBell { delta, theta } => Kind::Bell {
                cos: delta.cos(),
                sin: delta.sin(),
                phase: Complex64::from_polar(1.0, -theta),
            },
            ResourceFamily::Sssf { c, theta1, theta2 } => {
                let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                let amp = [
                    Complex64::new(c[0] / norm, 0.0),
                    Complex64::from_polar(c[1] / norm, *theta1),
                    Complex64::from_polar(c[2] / norm, *theta2),
                ];
                let mut weights = [[Complex64::new(0.0, 0.0); 3]; 3];
                for (m, row) in weights.iter_mut().enumerate() {
                    for (n, w) in row.iter_mut().enumerate() {
                        *w = amp[m].conj() * amp[n];
                    }
                }
                Kind::Sssf { weights }
            }
            ResourceFamily::SqueezedCat { delta, theta, gamma } => {
                let g2 = gamma.norm_sqr();
                Kind::Cat {
                    gamma: *gamma,
                    g2,
                    cos2: delta.cos().powi(2),
                    sin2: delta.sin().powi(2),
                    cross: delta.cos() * delta.sin(),
                    phase: Complex64::from_polar(1.0, *theta),
                    norm2: 1.0 / (1.0 + (-g2).exp() * (2.0 * delta).sin() * theta.cos()),
                }
            }
        };
        Ok(ResourceChi { bog, kind, n_a: self.n_th_a, n_b: self.n_th_b })
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Tmsv,
    SqueezedFock,
    Degaussified { added: bool, t: f64, phase: Complex64 },
    Bell { cos: f64, sin: f64, phase: Complex64 },
    Sssf { weights: [[Complex64; 3]; 3] },
    Cat { gamma: Complex64, g2: f64, cos2: f64, sin2: f64, cross: f64, phase: Complex64, norm2: f64 },
}

/// Validated, precomputed resource characteristic function.
#[derive(Debug, Clone)]
pub struct ResourceChi {
    bog: Bogoliubov,
    kind: Kind,
    n_a: f64,
    n_b: f64,
}

/// ⟨m|D(α)|n⟩ e^{|α|²/2} for m, n ≤ 2, with the explicit low-order Laguerre polynomials.
fn low_order_elements(alpha: Complex64) -> [[Complex64; 3]; 3] {
    let x = alpha.norm_sqr();
    let lag = |n: usize, k: f64| match n {
        0 => 1.0,
        1 => 1.0 + k - x,
        _ => 0.5 * (k + 2.0) * (k + 1.0) - (k + 2.0) * x + 0.5 * x * x,
    };
    let fact = [1.0, 1.0, 2.0];
    let mac = -alpha.conj();
    let mut d = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (m, row) in d.iter_mut().enumerate() {
        for (n, e) in row.iter_mut().enumerate() {
            *e = if m >= n {
                let k = (m - n) as i32;
                alpha.powi(k) * ((fact[n] / fact[m]) as f64).sqrt() * lag(n, k as f64)
            } else {
                let k = (n - m) as i32;
                mac.powi(k) * ((fact[m] / fact[n]) as f64).sqrt() * lag(m, k as f64)
            };
        }
    }
    d
}

impl ResourceChi {
    fn pure_chi(&self, pa: Complex64, pb: Complex64) -> Complex64 {
        let (xa, xb) = (pa.norm_sqr(), pb.norm_sqr());
        let half = -0.5 * (xa + xb);
        let q = (1.0 - xa) * (1.0 - xb);
        let real = |v: f64| Complex64::new(half.exp() * v, 0.0);
        match &self.kind {
            Kind::Tmsv => real(1.0),
            Kind::SqueezedFock => real(q),
            Kind::Degaussified { added, t, phase } => {
                let cross = 2.0 * t * (phase * pa * pb).re;
                let (t2, n2) = (t * t, 1.0 / (1.0 + t * t));
                let poly = if *added { t2 - cross + q } else { 1.0 - cross + t2 * q };
                real(n2 * poly)
            }
            Kind::Bell { cos, sin, phase } => {
                let cross = 2.0 * cos * sin * (phase * pa * pb).re;
                real(cos * cos + cross + sin * sin * q)
            }
            Kind::Sssf { weights } => {
                let da = low_order_elements(pa);
                let db = low_order_elements(pb);
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..3 {
                    for n in 0..3 {
                        acc += weights[m][n] * da[m][n] * db[m][n];
                    }
                }
                acc * half.exp()
            }
            Kind::Cat { gamma, g2, cos2, sin2, cross, phase, norm2 } => {
                let s = pa + pb;
                let gs = gamma.conj() * s;
                let vac = Complex64::new(half.exp() * cos2, 0.0);
                let both = Complex64::from_polar(half.exp() * sin2, 2.0 * gs.im);
                let up = (Complex64::new(half - g2, 0.0) + gs).exp() * phase.conj();
                let down = (Complex64::new(half - g2, 0.0) - gs.conj()).exp() * *phase;
                (vac + both + (up + down) * *cross) * *norm2
            }
        }
    }
}

impl TwoModeChi for ResourceChi {
    fn chi(&self, xi_a: Complex64, xi_b: Complex64) -> Complex64 {
        let (pa, pb) = self.bog.apply(xi_a, xi_b);
        let v = self.pure_chi(pa, pb);
        if self.n_a == 0.0 && self.n_b == 0.0 {
            v
        } else {
            v * (-self.n_a * xi_a.norm_sqr() - self.n_b * xi_b.norm_sqr()).exp()
        }
    }

    fn envelope(&self) -> Matrix4<f64> {
        let b = self.bog.real_matrix();
        let mut m = b.transpose() * b * 0.5;
        m[(0, 0)] += self.n_a;
        m[(1, 1)] += self.n_a;
        m[(2, 2)] += self.n_b;
        m[(3, 3)] += self.n_b;
        m
    }
}

pub fn chi_resource(spec: &ResourceSpec, xi_a: ConjVar, xi_b: ConjVar) -> Result<Complex64> {
    xi_a.checked()?;
    xi_b.checked()?;
    Ok(spec.evaluator()?.chi(xi_a.to_complex(), xi_b.to_complex()))
}

/// Convex combination of resources.
#[derive(Debug, Clone)]
pub struct ResourceMixture(Vec<(f64, ResourceChi)>);

impl ResourceMixture {
    pub fn new(parts: &[(f64, ResourceSpec)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Spec("empty resource mixture".into()));
        }
        let mut total = 0.0;
        let mut out = Vec::with_capacity(parts.len());
        for (w, spec) in parts {
            ensure_finite("mixture weight", *w)?;
            if *w < 0.0 {
                return Err(Error::Spec(format!("negative mixture weight {w}")));
            }
            total += w;
            out.push((*w, spec.evaluator()?));
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Spec(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(Self(out))
    }
}

impl TwoModeChi for ResourceMixture {
    fn chi(&self, xi_a: Complex64, xi_b: Complex64) -> Complex64 {
        self.0.iter().map(|(w, r)| *w * r.chi(xi_a, xi_b)).sum()
    }

    fn envelope(&self) -> Matrix4<f64> {
        let mu = self
            .0
            .iter()
            .map(|(_, r)| r.envelope().symmetric_eigenvalues().min())
            .fold(f64::INFINITY, f64::min);
        Matrix4::identity() * mu
    }
}

/// Normalization N = (1 + tanh²r)^{-1/2} of the degaussified states.
pub fn degaussified_norm(r: f64) -> f64 {
    1.0 / (1.0 + r.tanh().powi(2)).sqrt()
}
