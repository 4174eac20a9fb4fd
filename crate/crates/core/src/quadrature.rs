// SPDX-License-Identifier: Apache-2.0

//! Tensor-product Gauss–Hermite quadrature with a quadratic-form envelope.
//!
//! An integrand f on ℝ^D with |f(x)| ≲ poly(x)·exp(-xᵀQx) is integrated in
//! whitened coordinates u, x = L^{-T} u with Q = L Lᵀ, so that the rule's
//! e^{-|u|²} weight absorbs the envelope exactly.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss–Hermite rule for the weight e^{-x²}.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `weights[i] * exp(nodes[i]^2)`, computed without forming either factor alone.
    pub scaled_weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite order must be positive");
        const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
        let nf = n as f64;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut ws = vec![0.0; n];
        let m = n.div_ceil(2);
        let mut z = 0.0f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            let mut log_p = 0.0;
            for _ in 0..200 {
                // orthonormal recurrence kept in scaled form to avoid overflow at large z
                let (mut p1, mut p2) = (PIM4, 0.0f64);
                let mut log_scale = 0.0f64;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                    let a = p1.abs();
                    if a > 1e150 {
                        p1 /= a;
                        p2 /= a;
                        log_scale += a.ln();
                    }
                }
                pp = (2.0 * nf).sqrt() * p2;
                log_p = log_scale;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            // w = 2 / pp², with pp carrying the factor e^{log_p}
            let lw = 2f64.ln() - 2.0 * (pp.abs().ln() + log_p);
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = lw.exp();
            w[n - 1 - i] = w[i];
            ws[i] = (lw + z * z).exp();
            ws[n - 1 - i] = ws[i];
        }
        if n % 2 == 1 {
            x[m - 1] = 0.0;
        }
        // ascending order
        x.reverse();
        w.reverse();
        ws.reverse();
        Self { nodes: x, weights: w, scaled_weights: ws }
    }

    /// Shared, lazily built rule of the given order.
    pub fn cached(n: usize) -> Arc<GaussHermite> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard.entry(n).or_insert_with(|| Arc::new(GaussHermite::new(n))).clone()
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: Complex64) {
        self.sum.re = neumaier(self.sum.re, v.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, v.im, &mut self.comp.im);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

#[inline]
fn neumaier(sum: f64, v: f64, comp: &mut f64) -> f64 {
    let t = sum + v;
    if sum.abs() >= v.abs() {
        *comp += (sum - t) + v;
    } else {
        *comp += (v - t) + sum;
    }
    t
}

/// Whitening map x = T u for a positive-definite envelope Q, and the Jacobian |det T|.
pub fn whitening<const D: usize>(q: &SMatrix<f64, D, D>) -> Result<(SMatrix<f64, D, D>, f64)> {
    let sym = (q + q.transpose()) * 0.5;
    let chol = nalgebra::Cholesky::new(sym)
        .ok_or_else(|| Error::Domain(format!("quadrature envelope is not positive definite: {sym}")))?;
    let l = chol.l();
    let det: f64 = (0..D).map(|i| l[(i, i)]).product();
    let t = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Domain("singular quadrature envelope".into()))?;
    Ok((t, 1.0 / det))
}

/// ∫_{ℝ^D} f(x) dx at a single tensor order.
///
/// The outer axis is split across threads; every partial sum is formed in a
/// fixed order and the partials are combined sequentially, so the result does
/// not depend on the thread count.
pub fn integrate<const D: usize, F>(f: &F, q: &SMatrix<f64, D, D>, order: usize) -> Result<Complex64>
where
    F: Fn(&SVector<f64, D>) -> Complex64 + Sync,
{
    let (t, jac) = whitening(q)?;
    let rule = GaussHermite::cached(order);
    let n = rule.nodes.len();
    let partials: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|i0| {
            let mut acc = CompensatedSum::default();
            let mut idx = [0usize; D];
            idx[0] = i0;
            loop {
                let mut u = SVector::<f64, D>::zeros();
                let mut weight = 1.0;
                for k in 0..D {
                    u[k] = rule.nodes[idx[k]];
                    weight *= rule.scaled_weights[idx[k]];
                }
                acc.add(f(&(t * u)) * weight);
                // odometer over axes 1..D
                let mut k = D - 1;
                loop {
                    if k == 0 {
                        return acc.value();
                    }
                    idx[k] += 1;
                    if idx[k] < n {
                        break;
                    }
                    idx[k] = 0;
                    k -= 1;
                }
            }
        })
        .collect();
    let mut total = CompensatedSum::default();
    for p in partials {
        total.add(p);
    }
    Ok(total.value() * jac)
}

/// Integrate at `order`, `2·order`, `4·order` until two successive values agree
/// to `tol` (relative to max(|I|, 1)); the higher-order value is returned.
pub fn integrate_converged<const D: usize, F>(
    f: &F,
    q: &SMatrix<f64, D, D>,
    order: usize,
    tol: f64,
) -> Result<Complex64>
where
    F: Fn(&SVector<f64, D>) -> Complex64 + Sync,
{
    let mut orders = vec![order];
    let mut values = vec![integrate(f, q, order)?];
    for k in 1..=2 {
        let o = order << k;
        let v = integrate(f, q, o)?;
        let prev = *values.last().expect("nonempty");
        orders.push(o);
        values.push(v);
        if (v - prev).norm() <= tol * v.norm().max(1.0) {
            return Ok(v);
        }
    }
    Err(Error::Quadrature {
        orders,
        values: values.iter().map(|v| v.re).collect(),
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Matrix2, Matrix4, Vector2};
    use std::f64::consts::PI;

    #[test]
    fn rule_is_exact_for_moments() {
        for n in [8, 24, 48, 96, 192] {
            let r = GaussHermite::new(n);
            let s0: f64 = r.weights.iter().sum();
            assert_relative_eq!(s0, PI.sqrt(), max_relative = 1e-13);
            let s2: f64 = r.weights.iter().zip(&r.nodes).map(|(w, x)| w * x * x).sum();
            assert_relative_eq!(s2, PI.sqrt() / 2.0, max_relative = 1e-13);
            let s6: f64 = r.weights.iter().zip(&r.nodes).map(|(w, x)| w * x.powi(6)).sum();
            assert_relative_eq!(s6, 15.0 * PI.sqrt() / 8.0, max_relative = 1e-12);
            for (i, w) in r.scaled_weights.iter().enumerate() {
                let direct = r.weights[i] * r.nodes[i].powi(2).exp();
                assert_relative_eq!(*w, direct, max_relative = 1e-9);
            }
            assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn nodes_are_symmetric() {
        let r = GaussHermite::new(33);
        for i in 0..33 {
            assert_relative_eq!(r.nodes[i], -r.nodes[32 - i], epsilon = 1e-14);
        }
        assert_eq!(r.nodes[16], 0.0);
    }

    #[test]
    fn anisotropic_gaussian() {
        let q = Matrix2::new(3.0, 0.4, 0.4, 0.2);
        let f = |x: &Vector2<f64>| Complex64::new((-(x.transpose() * q * x)[0]).exp(), 0.0);
        let got = integrate(&f, &q, 16).unwrap();
        assert_relative_eq!(got.re, PI / q.determinant().sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn shifted_gaussian_with_looser_envelope() {
        // ∫ exp(-2|x|² + x_0) over ℝ⁴ = (π/2)² e^{1/8}
        let f = |x: &nalgebra::Vector4<f64>| Complex64::new((-2.0 * x.norm_squared() + x[0]).exp(), 0.0);
        let q = Matrix4::identity() * 2.0;
        let got = integrate_converged(&f, &q, 12, 1e-12).unwrap();
        assert_relative_eq!(got.re, (PI / 2.0).powi(2) * (0.125f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn non_positive_envelope_is_rejected() {
        let q = Matrix2::new(1.0, 0.0, 0.0, -1.0);
        let f = |_: &Vector2<f64>| Complex64::new(1.0, 0.0);
        assert!(integrate(&f, &q, 8).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        // envelope far too tight for the integrand's actual width
        let f = |x: &Vector2<f64>| Complex64::new((-1e-3 * x.norm_squared()).exp(), 0.0);
        let q = Matrix2::identity() * 50.0;
        assert!(matches!(integrate_converged(&f, &q, 8, 1e-9), Err(Error::Quadrature { .. })));
    }
}
