// SPDX-License-Identifier: Apache-2.0

//! Quick oracle checks of the numerical engine against closed forms and the Fock basis.

use std::f64::consts::FRAC_PI_4;

use cvtele::closed_forms::{
    delta_opt_coherent, fidelity_bell_thermal, fidelity_cat_simplified, fidelity_tmsv, ThermalContext,
};
use cvtele::fock_rep::{chi_from_fock, synthesize_resource_fock};
use cvtele::measures::von_neumann_entropy;
use cvtele::optimize::{classical_threshold, optimize_bell, separability_threshold, Argmax, ThresholdFamily};
use cvtele::overlap::{fidelity, QuadratureConfig};
use cvtele::protocol::ChannelSpec;
use cvtele::states::{chi_resource, InputStateSpec, ResourceFamily, ResourceSpec};
use cvtele::{Complex64, ConjVar};

pub struct Check {
    pub name: &'static str,
    pub error: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error <= self.tol
    }
}

fn coherent() -> InputStateSpec {
    InputStateSpec::coherent(Complex64::new(0.0, 0.0))
}

fn worst(it: impl IntoIterator<Item = cvtele::Result<f64>>) -> cvtele::Result<f64> {
    it.into_iter().try_fold(0.0f64, |m, e| Ok(m.max(e?.abs())))
}

pub fn run(quad: &QuadratureConfig) -> cvtele::Result<Vec<Check>> {
    let ch = ChannelSpec::ideal();
    let fid = |input: &InputStateSpec, res: &ResourceSpec| fidelity(&ch, input, res, quad);
    let mut out = Vec::new();

    let e = worst([0.0, 0.5, 1.5].map(|r| Ok(fid(&coherent(), &ResourceSpec::new(ResourceFamily::Tmsv, r))? - fidelity_tmsv(r))))?;
    out.push(Check { name: "twin-beam fidelity vs closed form", error: e, tol: 1e-6 });

    let e = worst([(0.0, 0.3, 0.0), (0.5, FRAC_PI_4, 0.05), (1.0, 1.2, 0.15)].map(|(r, d, n)| {
        let res = ResourceSpec::new(ResourceFamily::bell(d), r).with_thermal(n, n);
        Ok(fid(&coherent(), &res)? - fidelity_bell_thermal(r, ThermalContext::symmetric(n)?, d))
    }))?;
    out.push(Check { name: "noisy Bell fidelity vs closed form", error: e, tol: 1e-6 });

    let e = worst([(0.0, 1.33), (0.8, 2.0)].map(|(r, g)| {
        let res = ResourceSpec::new(ResourceFamily::cat(FRAC_PI_4, Complex64::new(g, 0.0)), r);
        Ok(fid(&coherent(), &res)? - fidelity_cat_simplified(r, g))
    }))?;
    out.push(Check { name: "cat fidelity vs closed form", error: e, tol: 1e-6 });

    let e = fid(&coherent(), &ResourceSpec::new(ResourceFamily::SqueezedFock11, 0.0))? - 0.25;
    out.push(Check { name: "squeezed Fock benchmark 1/4", error: e.abs(), tol: 1e-6 });

    let r = 0.7f64;
    let want = (1.0 - (-2.0 * r).exp()) / 2.0;
    let e = (classical_threshold(ThresholdFamily::Tmsv, r)? - want).abs().max((separability_threshold(r)? - want).abs());
    out.push(Check { name: "classical and separability thresholds", error: e, tol: 1e-6 });

    let o = optimize_bell(0.5, &coherent(), ThermalContext::PURE, quad)?;
    let d = match o.argmax {
        Argmax::Delta(d) => d,
        _ => f64::NAN,
    };
    out.push(Check { name: "numerical Bell optimum vs closed form", error: (d - delta_opt_coherent(0.5)).abs(), tol: 1e-4 });

    let points = [(ConjVar::new(0.3, 0.2), ConjVar::new(-0.1, 0.4)), (ConjVar::new(-0.8, 0.5), ConjVar::new(0.6, -0.2))];
    let families = [
        ResourceFamily::Tmsv,
        ResourceFamily::SqueezedFock11,
        ResourceFamily::PhotonSubtracted,
        ResourceFamily::PhotonAdded,
        ResourceFamily::SqueezedBell { delta: 0.6, theta: 0.3 },
        ResourceFamily::Sssf { c: [0.7, 0.5, 0.4], theta1: 0.2, theta2: -0.4 },
        ResourceFamily::SqueezedCat { delta: 0.8, theta: 0.2, gamma: Complex64::new(0.6, 0.3) },
    ];
    let mut e = 0.0f64;
    for fam in families {
        let spec = ResourceSpec::new(fam, 0.6);
        let t = synthesize_resource_fock(&spec, 50)?;
        for (a, b) in points {
            e = e.max((chi_resource(&spec, a, b)? - chi_from_fock(&t, a, b)).norm());
        }
    }
    out.push(Check { name: "closed-form chi vs Fock-basis oracle", error: e, tol: 1e-8 });

    let r = 0.8f64;
    let (c2, s2) = (r.cosh().powi(2), r.sinh().powi(2));
    let e = von_neumann_entropy(&ResourceSpec::new(ResourceFamily::Tmsv, r))? - (c2 * c2.log2() - s2 * s2.log2());
    out.push(Check { name: "twin-beam entropy vs Schmidt formula", error: e.abs(), tol: 1e-8 });

    Ok(out)
}
