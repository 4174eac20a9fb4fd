// SPDX-License-Identifier: Apache-2.0

//! Fidelity optimization over resource parameters and noise-threshold roots.
//!
//! 1-D searches bracket the maximum on a coarse grid and refine by golden
//! section; the two-angle SSSF search seeds Nelder–Mead from a grid.  Inner
//! loops use single-order quadrature and the reported optimum is re-evaluated
//! with the convergence check.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::closed_forms::{fidelity_bell_thermal, fidelity_cat_thermal, fidelity_tmsv_thermal, ThermalContext};
use crate::error::{Error, Result};
use crate::measures::{inseparability_delta, relative_fidelity};
use crate::overlap::{fidelity, fidelity_single_order, QuadratureConfig};
use crate::protocol::ChannelSpec;
use crate::states::{degaussified_norm, InputStateSpec, ResourceFamily, ResourceSpec};

pub const GRID_1D: usize = 256;
pub const TOL_1D: f64 = 1e-6;
pub const GRID_SSSF: usize = 32;
pub const TOL_SIMPLEX: f64 = 1e-7;
pub const GAMMA_MAX: f64 = 8.0;
pub const THRESHOLD_BRACKET: (f64, f64) = (0.0, 2.0);
pub const THRESHOLD_TOL: f64 = 1e-8;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a 1-D maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Max1d {
    pub x: f64,
    pub f: f64,
    pub evaluations: usize,
    pub at_lower: bool,
    pub at_upper: bool,
}

/// Maximizes `f` on [lo, hi]: `grid` evenly spaced samples (evaluated in
/// parallel) bracket the best point, golden section refines it to `tol`.
pub fn maximize_1d<F>(f: F, lo: f64, hi: f64, grid: usize, tol: f64) -> Result<Max1d>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(lo < hi) || grid < 3 {
        return Err(Error::Optimizer(format!("bad search interval [{lo}, {hi}] with {grid} points")));
    }
    let step = (hi - lo) / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid).map(|k| if k == grid - 1 { hi } else { lo + step * k as f64 }).collect();
    let fs = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (k, v) in fs.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Optimizer(format!("objective is not finite at {}", xs[k])));
        }
        if *v > fs[best] {
            best = k;
        }
    }
    let mut evaluations = grid;
    let (mut a, mut b) = (xs[best.saturating_sub(1)], xs[(best + 1).min(grid - 1)]);
    let (mut x_best, mut f_best) = (xs[best], fs[best]);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    evaluations += 2;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        evaluations += 1;
        for (x, v) in [(c, fc), (d, fd)] {
            if v > f_best {
                x_best = x;
                f_best = v;
            }
        }
    }
    Ok(Max1d {
        x: x_best,
        f: f_best,
        evaluations,
        at_lower: x_best - lo <= tol,
        at_upper: hi - x_best <= tol,
    })
}

/// Result of a 2-D Nelder–Mead maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Max2d {
    pub x: [f64; 2],
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead maximization from `x0` with initial edge `step`; stops when
/// the simplex diameter falls below `tol`.
pub fn nelder_mead<F>(f: F, x0: [f64; 2], step: f64, tol: f64, max_iter: usize) -> Result<Max2d>
where
    F: Fn([f64; 2]) -> Result<f64>,
{
    let add = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let mut pts = [x0, [x0[0] + step, x0[1]], [x0[0], x0[1] + step]];
    let mut vals = [f(pts[0])?, f(pts[1])?, f(pts[2])?];
    let mut evaluations = 3;
    let mut converged = false;
    for _ in 0..max_iter {
        // order best..worst by value (maximizing)
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);
        let diam = pts[1..]
            .iter()
            .map(|p| (p[0] - pts[0][0]).hypot(p[1] - pts[0][1]))
            .fold(0.0, f64::max);
        if diam < tol {
            converged = true;
            break;
        }
        let centroid = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let xr = add(centroid, pts[2], -1.0);
        let fr = f(xr)?;
        evaluations += 1;
        if fr > vals[0] {
            let xe = add(centroid, pts[2], -2.0);
            let fe = f(xe)?;
            evaluations += 1;
            (pts[2], vals[2]) = if fe > fr { (xe, fe) } else { (xr, fr) };
        } else if fr > vals[1] {
            (pts[2], vals[2]) = (xr, fr);
        } else {
            let (xc, fc) = if fr > vals[2] {
                let xc = add(centroid, xr, 0.5);
                (xc, f(xc)?)
            } else {
                let xc = add(centroid, pts[2], 0.5);
                (xc, f(xc)?)
            };
            evaluations += 1;
            if fc > vals[2].max(fr) {
                (pts[2], vals[2]) = (xc, fc);
            } else {
                for k in 1..3 {
                    pts[k] = add(pts[0], pts[k], 0.5);
                    vals[k] = f(pts[k])?;
                    evaluations += 1;
                }
            }
        }
    }
    let best = (0..3).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).expect("three vertices");
    Ok(Max2d { x: pts[best], f: vals[best], evaluations, converged })
}

/// Bisection for a sign change of `f` on [lo, hi]; `f(lo) ≥ 0 > f(hi)` expected
/// (either orientation is accepted).
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::ThresholdOutOfRange { lo, hi, f_lo, f_hi });
    }
    let (mut a, mut b, mut fa) = (lo, hi, f_lo);
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Argmax {
    /// Bell angle δ.
    Delta(f64),
    /// SSSF angles and the normalized coefficients they encode (c0 ≥ 0).
    Sssf { delta1: f64, delta2: f64, c: [f64; 3] },
    /// Cat amplitude |γ|.
    Gamma(f64),
    /// Squeezing s of the geometric SSSF family c ∝ (1, tanh s, tanh² s).
    Squeezing(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptResult {
    pub f_opt: f64,
    pub argmax: Argmax,
    pub evaluations: usize,
    pub converged: bool,
    /// The maximum sits on a search-interval endpoint.
    pub at_boundary: bool,
}

fn bell_resource(r: f64, delta: f64, ctx: ThermalContext) -> ResourceSpec {
    ResourceSpec::new(ResourceFamily::bell(delta), r).with_thermal(ctx.n_a, ctx.n_b)
}

/// Maximizes the unit-gain fidelity over the Bell angle δ ∈ [0, π] (θ = 0, φ = π).
pub fn optimize_bell(r: f64, input: &InputStateSpec, ctx: ThermalContext, cfg: &QuadratureConfig) -> Result<OptResult> {
    let ch = ChannelSpec::ideal();
    let m = maximize_1d(
        |d| fidelity_single_order(&ch, input, &bell_resource(r, d, ctx), cfg),
        0.0,
        PI,
        GRID_1D,
        TOL_1D,
    )?;
    let f_opt = fidelity(&ch, input, &bell_resource(r, m.x, ctx), cfg)?;
    // δ and δ + π are the same state, so the endpoints are not real boundaries
    Ok(OptResult { f_opt, argmax: Argmax::Delta(m.x), evaluations: m.evaluations + 1, converged: true, at_boundary: false })
}

/// Maximizes over (δ, θ) jointly; used to check that θ = 0 is optimal.
pub fn optimize_bell_with_phase(r: f64, input: &InputStateSpec, cfg: &QuadratureConfig) -> Result<(f64, f64, f64)> {
    let ch = ChannelSpec::ideal();
    let f = |p: [f64; 2]| {
        let res = ResourceSpec::new(ResourceFamily::SqueezedBell { delta: p[0], theta: p[1] }, r);
        fidelity_single_order(&ch, input, &res, cfg)
    };
    let seeds: Vec<[f64; 2]> = (0..16)
        .flat_map(|i| (0..16).map(move |j| [PI * i as f64 / 16.0, 2.0 * PI * j as f64 / 16.0]))
        .collect();
    let vals = seeds.par_iter().map(|&p| f(p)).collect::<Result<Vec<f64>>>()?;
    let best = (0..seeds.len()).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).expect("nonempty grid");
    let m = nelder_mead(f, seeds[best], PI / 16.0, TOL_SIMPLEX, 2000)?;
    Ok((m.f, m.x[0], m.x[1]))
}

/// Coefficients (cos δ1, sin δ1 cos δ2, sin δ1 sin δ2).
pub fn sssf_coefficients(delta1: f64, delta2: f64) -> [f64; 3] {
    [delta1.cos(), delta1.sin() * delta2.cos(), delta1.sin() * delta2.sin()]
}

fn canonical_sign(c: [f64; 3]) -> [f64; 3] {
    let lead = c.iter().copied().find(|v| v.abs() > 1e-14).unwrap_or(1.0);
    if lead < 0.0 {
        c.map(|v| -v)
    } else {
        c
    }
}

fn sssf_resource(r: f64, c: [f64; 3]) -> ResourceSpec {
    ResourceSpec::new(ResourceFamily::sssf(c[0], c[1], c[2]), r)
}

/// Maximizes over the SSSF angles (δ1, δ2) with θ1 = θ2 = 0.
pub fn optimize_sssf(r: f64, input: &InputStateSpec, cfg: &QuadratureConfig) -> Result<OptResult> {
    let ch = ChannelSpec::ideal();
    let f = |p: [f64; 2]| fidelity_single_order(&ch, input, &sssf_resource(r, sssf_coefficients(p[0], p[1])), cfg);
    let n = GRID_SSSF;
    let h = PI / (n - 1) as f64;
    let seeds: Vec<[f64; 2]> = (0..n).flat_map(|i| (0..n).map(move |j| [h * i as f64, h * j as f64])).collect();
    let vals = seeds.par_iter().map(|&p| f(p)).collect::<Result<Vec<f64>>>()?;
    let best = (0..seeds.len()).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).expect("nonempty grid");
    let first = nelder_mead(&f, seeds[best], h, TOL_SIMPLEX, 2000)?;
    // one restart guards against a collapsed simplex
    let m = nelder_mead(&f, first.x, h / 4.0, TOL_SIMPLEX, 2000)?;
    let c = canonical_sign(sssf_coefficients(m.x[0], m.x[1]));
    let f_opt = fidelity(&ch, input, &sssf_resource(r, c), cfg)?;
    Ok(OptResult {
        f_opt,
        argmax: Argmax::Sssf { delta1: m.x[0], delta2: m.x[1], c },
        evaluations: seeds.len() + first.evaluations + m.evaluations + 1,
        converged: m.converged,
        at_boundary: false,
    })
}

/// Maximizes over the geometric SSSF family c ∝ (1, t, t²), t = tanh s, s ∈ [-4, 4].
pub fn optimize_sssf_geometric(r: f64, input: &InputStateSpec, cfg: &QuadratureConfig) -> Result<OptResult> {
    let ch = ChannelSpec::ideal();
    let coeffs = |s: f64| {
        let t = s.tanh();
        [1.0, t, t * t]
    };
    let m = maximize_1d(
        |s| fidelity_single_order(&ch, input, &sssf_resource(r, coeffs(s)), cfg),
        -4.0,
        4.0,
        GRID_1D,
        TOL_1D,
    )?;
    let f_opt = fidelity(&ch, input, &sssf_resource(r, coeffs(m.x)), cfg)?;
    Ok(OptResult {
        f_opt,
        argmax: Argmax::Squeezing(m.x),
        evaluations: m.evaluations + 1,
        converged: true,
        at_boundary: m.at_lower || m.at_upper,
    })
}

/// Maximizes the analytic cat fidelity (real γ, δ = π/4) over |γ| ∈ (0, 8].
pub fn optimize_cat(r: f64, ctx: ThermalContext) -> Result<OptResult> {
    let m = maximize_1d(|g| Ok(fidelity_cat_thermal(r, ctx, g)), 1e-9, GAMMA_MAX, GRID_1D, TOL_1D)?;
    Ok(OptResult {
        f_opt: m.f,
        argmax: Argmax::Gamma(m.x),
        evaluations: m.evaluations,
        converged: true,
        at_boundary: m.at_upper,
    })
}

/// Analytic optimum over the Bell angle for coherent inputs with thermal noise.
pub fn optimize_bell_analytic(r: f64, ctx: ThermalContext) -> Result<OptResult> {
    let m = maximize_1d(|d| Ok(fidelity_bell_thermal(r, ctx, d)), 0.0, PI, GRID_1D, 1e-9)?;
    Ok(OptResult { f_opt: m.f, argmax: Argmax::Delta(m.x), evaluations: m.evaluations, converged: true, at_boundary: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdFamily {
    Tmsv,
    BellOptimized,
    CatOptimized,
}

/// Optimized coherent-input fidelity of a family at squeezing r and symmetric noise n.
pub fn optimized_thermal_fidelity(family: ThresholdFamily, r: f64, n: f64) -> Result<f64> {
    let ctx = ThermalContext::symmetric(n)?;
    Ok(match family {
        ThresholdFamily::Tmsv => fidelity_tmsv_thermal(r, ctx),
        ThresholdFamily::BellOptimized => optimize_bell_analytic(r, ctx)?.f_opt,
        ThresholdFamily::CatOptimized => optimize_cat(r, ctx)?.f_opt,
    })
}

/// Noise n_th (on each mode) at which the optimized fidelity falls to the classical ½.
pub fn classical_threshold(family: ThresholdFamily, r: f64) -> Result<f64> {
    let (lo, hi) = THRESHOLD_BRACKET;
    bisect(|n| Ok(optimized_thermal_fidelity(family, r, n)? - 0.5), lo, hi, THRESHOLD_TOL)
}

/// Noise n_th at which the twin beam's inseparability witness Δ reaches zero.
pub fn separability_threshold(r: f64) -> Result<f64> {
    let (lo, hi) = THRESHOLD_BRACKET;
    let delta = |n: f64| inseparability_delta(&ResourceSpec::new(ResourceFamily::Tmsv, r).with_thermal(n, n));
    if delta(lo)? >= 0.0 {
        return Ok(lo);
    }
    bisect(delta, lo, hi, THRESHOLD_TOL)
}

/// Point where the optimized Bell resource meets the photon-subtracted state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangency {
    pub r_bar: f64,
    /// Relative fidelity gain of the optimized Bell state over the PSS at r̄.
    pub delta_f: f64,
    pub delta_opt: f64,
    /// arccos N(r̄): the Bell angle that reproduces the PSS.
    pub delta_pss: f64,
}

/// Relative fidelity gain of the optimized Bell resource over the PSS.
pub fn relative_gain_over_pss(r: f64, input: &InputStateSpec, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let bell = optimize_bell(r, input, ThermalContext::PURE, cfg)?;
    let pss = fidelity(&ChannelSpec::ideal(), input, &ResourceSpec::new(ResourceFamily::PhotonSubtracted, r), cfg)?;
    let Argmax::Delta(d) = bell.argmax else { unreachable!("Bell optimizer returns an angle") };
    Ok((relative_fidelity(bell.f_opt, pss)?, d))
}

/// Minimizes ΔF(r) against the PSS over [r_lo, r_hi]; ΔF ≥ 0 touches zero at r̄.
pub fn pss_tangency(input: &InputStateSpec, r_lo: f64, r_hi: f64, cfg: &QuadratureConfig) -> Result<Tangency> {
    let m = maximize_1d(|r| Ok(-relative_gain_over_pss(r, input, cfg)?.0), r_lo, r_hi, 16, TOL_1D)?;
    let (delta_f, delta_opt) = relative_gain_over_pss(m.x, input, cfg)?;
    Ok(Tangency { r_bar: m.x, delta_f, delta_opt, delta_pss: degaussified_norm(m.x).acos() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{delta_opt_coherent, delta_opt_coherent_thermal, delta_opt_fock};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_4;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn coherent() -> InputStateSpec {
        InputStateSpec::coherent(Complex64::new(0.0, 0.0))
    }

    fn delta_of(r: &OptResult) -> f64 {
        match r.argmax {
            Argmax::Delta(d) => d,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn maximize_1d_quadratic_and_boundary() {
        let m = maximize_1d(|x| Ok(-(x - 0.3).powi(2)), -1.0, 2.0, 64, 1e-9).unwrap();
        assert_abs_diff_eq!(m.x, 0.3, epsilon = 1e-8);
        assert!(!m.at_lower && !m.at_upper);
        let m = maximize_1d(|x| Ok(x), 0.0, 1.0, 16, 1e-9).unwrap();
        assert!(m.at_upper);
        assert!(maximize_1d(|x| Ok(x), 1.0, 0.0, 16, 1e-9).is_err());
        assert!(maximize_1d(|_| Ok(f64::NAN), 0.0, 1.0, 16, 1e-9).is_err());
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let m = nelder_mead(|p| Ok(-(1.0 - p[0]).powi(2) - 100.0 * (p[1] - p[0] * p[0]).powi(2)), [-1.0, 1.0], 0.5, 1e-10, 5000)
            .unwrap();
        assert!(m.converged);
        assert_abs_diff_eq!(m.x[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.x[1], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn bisect_root_and_bracket_error() {
        let x = bisect(|x| Ok(2.0 - x * x), 0.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, 2f64.sqrt(), epsilon = 1e-11);
        assert!(matches!(bisect(|x| Ok(x + 1.0), 0.0, 1.0, 1e-9), Err(Error::ThresholdOutOfRange { .. })));
    }

    #[test]
    fn bell_optimum_matches_analytic_angles() {
        for r in [0.0, 0.5, 1.0] {
            let c = optimize_bell(r, &coherent(), ThermalContext::PURE, &cfg()).unwrap();
            assert_abs_diff_eq!(delta_of(&c), delta_opt_coherent(r), epsilon = 1e-4);
            assert_abs_diff_eq!(c.f_opt, fidelity_bell_thermal(r, ThermalContext::PURE, delta_opt_coherent(r)), epsilon = 1e-8);
            let f = optimize_bell(r, &InputStateSpec::Fock1, ThermalContext::PURE, &cfg()).unwrap();
            assert_abs_diff_eq!(delta_of(&f), delta_opt_fock(r), epsilon = 1e-4);
        }
        let ctx = ThermalContext::symmetric(0.1).unwrap();
        let t = optimize_bell(0.5, &coherent(), ctx, &cfg()).unwrap();
        assert_abs_diff_eq!(delta_of(&t), delta_opt_coherent_thermal(0.5, ctx), epsilon = 1e-4);
    }

    #[test]
    fn nonzero_bell_phase_does_not_help() {
        for input in [coherent(), InputStateSpec::Fock1] {
            let (f2, _, _) = optimize_bell_with_phase(0.6, &input, &cfg()).unwrap();
            let f1 = optimize_bell(0.6, &input, ThermalContext::PURE, &cfg()).unwrap().f_opt;
            assert!(f2 <= f1 + 1e-9, "{input:?}: {f2} vs {f1}");
        }
    }

    #[test]
    fn cat_optimum_without_squeezing() {
        let c = optimize_cat(0.0, ThermalContext::PURE).unwrap();
        assert_abs_diff_eq!(c.f_opt, 1.0 / (4.0 * (2f64.sqrt() - 1.0)), epsilon = 1e-12);
        let Argmax::Gamma(g) = c.argmax else { panic!() };
        assert_abs_diff_eq!(g, (2.0 * (1.0 + 2f64.sqrt()).ln()).sqrt(), epsilon = 1e-5);
        assert!(!c.at_boundary);
    }

    #[test]
    fn cat_sits_between_tmsv_and_bell() {
        for k in 1..=12 {
            let r = 0.1 * k as f64;
            let cat = optimize_cat(r, ThermalContext::PURE).unwrap().f_opt;
            let bell = optimize_bell_analytic(r, ThermalContext::PURE).unwrap().f_opt;
            let tm = fidelity_tmsv_thermal(r, ThermalContext::PURE);
            assert!(bell >= cat && cat >= tm, "r={r}: {bell} {cat} {tm}");
        }
    }

    #[test]
    fn sssf_nests_bell_and_geometric() {
        for (r, input) in [(0.4, coherent()), (0.9, InputStateSpec::Fock1)] {
            let full = optimize_sssf(r, &input, &cfg()).unwrap();
            let bell = optimize_bell(r, &input, ThermalContext::PURE, &cfg()).unwrap();
            let geom = optimize_sssf_geometric(r, &input, &cfg()).unwrap();
            assert!(full.f_opt >= bell.f_opt - 1e-9);
            assert!(full.f_opt >= geom.f_opt - 1e-9);
            assert!(full.converged);
        }
    }

    #[test]
    fn thresholds() {
        for r in [0.0f64, 0.3, 0.8, 1.5] {
            let want = (1.0 - (-2.0 * r).exp()) / 2.0;
            assert_abs_diff_eq!(classical_threshold(ThresholdFamily::Tmsv, r).unwrap(), want, epsilon = 1e-7);
            assert_abs_diff_eq!(separability_threshold(r).unwrap(), want, epsilon = 1e-7);
        }
        for r in [0.0, 0.5, 1.0, 1.5] {
            let tm = classical_threshold(ThresholdFamily::Tmsv, r).unwrap();
            let bell = classical_threshold(ThresholdFamily::BellOptimized, r).unwrap();
            let cat = classical_threshold(ThresholdFamily::CatOptimized, r).unwrap();
            assert!(bell > tm && bell >= cat, "r={r}: {bell} {cat} {tm}");
        }
    }

    #[test]
    fn pss_meets_optimized_bell() {
        let t = pss_tangency(&coherent(), 0.2, 1.0, &cfg()).unwrap();
        assert!((t.delta_opt - t.delta_pss).abs() < 1e-4, "{t:?}");
        assert!(t.delta_f.abs() < 1e-8);
        // δ_opt(r) = arctan(tanh r) closed-form location
        let r = t.r_bar;
        assert_abs_diff_eq!(delta_opt_coherent(r), r.tanh().atan(), epsilon = 1e-4);
        assert!(FRAC_PI_4 > t.delta_opt);
    }
}
