// SPDX-License-Identifier: Apache-2.0

//! Resolution of a parsed config into per-point core calls, and their evaluation.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;

use cvtele::closed_forms::{delta_opt_coherent, delta_opt_coherent_thermal, delta_opt_fock, ThermalContext};
use cvtele::measures::{
    inseparability_delta, non_gaussianity, relative_fidelity, vacuum_affinity, von_neumann_entropy, AFFINITY_S_MAX,
};
use cvtele::optimize::{
    classical_threshold, optimize_bell, optimize_bell_analytic, optimize_cat, optimize_sssf, optimize_sssf_geometric,
    separability_threshold, Argmax, OptResult, ThresholdFamily,
};
use cvtele::overlap::{fidelity, QuadratureConfig};
use cvtele::protocol::{ChannelSpec, ChannelVariant, ExternalMode};
use cvtele::states::{InputStateSpec, ResourceFamily, ResourceSpec};
use cvtele::Complex64;

use crate::config::{parse_complex, parse_real, ConfigError, Entry, ExperimentConfig, ExperimentKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Fidelity,
    FidelityOpt,
    RelativeTmsv,
    RelativePss,
    Entropy,
    NonGaussianity,
    Affinity,
    Inseparability,
    ClassicalThreshold,
    SeparabilityThreshold,
}

impl Quantity {
    const ALL: [(Quantity, &'static str, ExperimentKind); 10] = [
        (Quantity::Fidelity, "fidelity", ExperimentKind::FidelitySweep),
        (Quantity::FidelityOpt, "fidelity-opt", ExperimentKind::OptimizeSweep),
        (Quantity::RelativeTmsv, "relative-tmsv", ExperimentKind::OptimizeSweep),
        (Quantity::RelativePss, "relative-pss", ExperimentKind::OptimizeSweep),
        (Quantity::Entropy, "entropy", ExperimentKind::MeasuresSweep),
        (Quantity::NonGaussianity, "non-gaussianity", ExperimentKind::MeasuresSweep),
        (Quantity::Affinity, "affinity", ExperimentKind::MeasuresSweep),
        (Quantity::Inseparability, "inseparability", ExperimentKind::MeasuresSweep),
        (Quantity::ClassicalThreshold, "classical-threshold", ExperimentKind::ThresholdSweep),
        (Quantity::SeparabilityThreshold, "separability-threshold", ExperimentKind::ThresholdSweep),
    ];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().find(|(_, n, _)| *n == s).map(|(q, _, _)| *q)
    }

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(q, _, _)| *q == self).map(|(_, n, _)| *n).expect("listed")
    }

    fn kind(self) -> ExperimentKind {
        Self::ALL.iter().find(|(q, _, _)| *q == self).map(|(_, _, k)| *k).expect("listed")
    }

    fn default_for(kind: ExperimentKind) -> Option<Self> {
        match kind {
            ExperimentKind::FidelitySweep => Some(Self::Fidelity),
            ExperimentKind::OptimizeSweep => Some(Self::FidelityOpt),
            ExperimentKind::ThresholdSweep => Some(Self::ClassicalThreshold),
            _ => None,
        }
    }

    fn choices(kind: ExperimentKind) -> String {
        Self::ALL.iter().filter(|(_, _, k)| *k == kind).map(|(_, n, _)| *n).collect::<Vec<_>>().join(", ")
    }
}

/// Replace the resource by the member of its family that is optimal for a given input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tune {
    None,
    Coherent,
    Fock,
    /// The configured input.
    Input,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Numeric,
    /// Closed-form objective (Bell and cat families, coherent input).
    Analytic,
    /// SSSF restricted to c ∝ (1, tanh s, tanh² s).
    Geometric,
}

/// Everything needed to evaluate one series at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub input: InputStateSpec,
    pub resource: ResourceSpec,
    pub channel: ChannelSpec,
    pub quad: QuadratureConfig,
    pub quantity: Quantity,
    pub tune: Tune,
    pub method: Method,
}

struct Lookup<'a> {
    base: &'a BTreeMap<String, Entry>,
    series: Option<&'a BTreeMap<String, Entry>>,
    axes: &'a [(&'a str, f64)],
    series_line: Option<usize>,
}

enum Source<'a> {
    Text(&'a Entry),
    Axis(f64),
}

impl<'a> Lookup<'a> {
    fn get(&self, key: &str) -> Option<Source<'a>> {
        if let Some((_, v)) = self.axes.iter().find(|(k, _)| *k == key) {
            return Some(Source::Axis(*v));
        }
        self.series.and_then(|s| s.get(key)).or_else(|| self.base.get(key)).map(Source::Text)
    }

    fn has(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        match self.get(key) {
            Some(Source::Text(e)) => Some(e.line),
            _ => self.series_line,
        }
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::new(self.line_of(key), Some(key), message)
    }

    fn word(&self, key: &str, default: &'a str) -> Result<&'a str, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Source::Text(e)) => Ok(e.value.as_str()),
            Some(Source::Axis(_)) => Err(self.error(key, "cannot be swept")),
        }
    }

    fn real(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Source::Axis(v)) => Ok(v),
            Some(Source::Text(e)) => parse_real(&e.value).ok_or_else(|| self.error(key, "expected a real number")),
        }
    }

    fn complex(&self, key: &str, default: Complex64) -> Result<Complex64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Source::Axis(v)) => Ok(Complex64::new(v, 0.0)),
            Some(Source::Text(e)) => parse_complex(&e.value).ok_or_else(|| self.error(key, "expected a complex number")),
        }
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Source::Text(e)) => e.value.parse().map_err(|_| self.error(key, "expected an integer")),
            Some(Source::Axis(_)) => Err(self.error(key, "cannot be swept")),
        }
    }

    fn reals3(&self, key: &str, default: [f64; 3]) -> Result<[f64; 3], ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Source::Text(e)) => {
                let v: Option<Vec<f64>> = e.value.split_whitespace().map(parse_real).collect();
                match v.as_deref() {
                    Some(&[a, b, c]) => Ok([a, b, c]),
                    _ => Err(self.error(key, "expected three real numbers")),
                }
            }
            Some(Source::Axis(_)) => Err(self.error(key, "cannot be swept")),
        }
    }
}

fn resolve_input(l: &Lookup) -> Result<InputStateSpec, ConfigError> {
    let beta = l.complex("input.beta", Complex64::new(0.0, 0.0))?;
    let s = l.real("input.s", 0.0)?;
    let phi_s = l.real("input.phi_s", 0.0)?;
    Ok(match l.word("input.kind", "coherent")? {
        "coherent" => InputStateSpec::coherent(beta),
        "squeezed-vacuum" => InputStateSpec::SqueezedVacuum { s, phi_s },
        "fock" => InputStateSpec::Fock1,
        "squeezed-fock" => InputStateSpec::SqueezedFock1 { s, phi_s },
        "photon-added-coherent" => InputStateSpec::photon_added_coherent(beta),
        other => {
            return Err(l.error(
                "input.kind",
                format!("unknown input `{other}` (coherent, squeezed-vacuum, fock, squeezed-fock, photon-added-coherent)"),
            ))
        }
    })
}

fn resolve_resource(l: &Lookup) -> Result<ResourceSpec, ConfigError> {
    let delta = l.real("resource.delta", 0.0)?;
    let theta = l.real("resource.theta", 0.0)?;
    let family = match l.word("resource.family", "tmsv")? {
        "tmsv" => ResourceFamily::Tmsv,
        "squeezed-fock" => ResourceFamily::SqueezedFock11,
        "photon-subtracted" => ResourceFamily::PhotonSubtracted,
        "photon-added" => ResourceFamily::PhotonAdded,
        "bell" => ResourceFamily::SqueezedBell { delta, theta },
        "sssf" => ResourceFamily::Sssf {
            c: l.reals3("resource.c", [1.0, 0.0, 0.0])?,
            theta1: l.real("resource.theta1", 0.0)?,
            theta2: l.real("resource.theta2", 0.0)?,
        },
        "cat" => ResourceFamily::SqueezedCat { delta, theta, gamma: l.complex("resource.gamma", Complex64::new(0.0, 0.0))? },
        other => {
            return Err(l.error(
                "resource.family",
                format!("unknown family `{other}` (tmsv, squeezed-fock, photon-subtracted, photon-added, bell, sssf, cat)"),
            ))
        }
    };
    let n = l.real("resource.n_th", 0.0)?;
    let spec = ResourceSpec::new(family, l.real("resource.r", 0.0)?)
        .with_phi(l.real("resource.phi", PI)?)
        .with_thermal(l.real("resource.n_th_a", n)?, l.real("resource.n_th_b", n)?);
    spec.validate().map_err(|e| l.error("resource.family", e.to_string()))?;
    Ok(spec)
}

fn resolve_channel(l: &Lookup) -> Result<ChannelSpec, ConfigError> {
    let variant = match l.word("channel.variant", "ideal")? {
        "ideal" => ChannelVariant::Ideal,
        "asymmetric-bs" => ChannelVariant::AsymmetricBS { theta: l.real("channel.theta", FRAC_PI_4)? },
        "imprecise" => {
            for k in ["channel.r_m", "channel.s_m"] {
                if !l.has(k) {
                    return Err(l.error(k, "required by the imprecise-measurement channel"));
                }
            }
            ChannelVariant::ImpreciseMeasurement { r_m: l.real("channel.r_m", 0.0)?, s_m: l.real("channel.s_m", 0.0)? }
        }
        "lossy" => ChannelVariant::LossyHomodyne {
            phi_x: l.real("channel.phi_x", 0.0)?,
            phi_p: l.real("channel.phi_p", 0.0)?,
            ext_u: ExternalMode::new(l.real("channel.n_u", 0.0)?, l.real("channel.s_u", 0.0)?),
            ext_v: ExternalMode::new(l.real("channel.n_v", 0.0)?, l.real("channel.s_v", 0.0)?),
        },
        other => {
            return Err(l.error("channel.variant", format!("unknown channel `{other}` (ideal, asymmetric-bs, imprecise, lossy)")))
        }
    };
    let ch = ChannelSpec::new(variant).with_gains(l.real("channel.g_x", 1.0)?, l.real("channel.g_p", 1.0)?);
    ch.validate().map_err(|e| l.error("channel.variant", e.to_string()))?;
    Ok(ch)
}

fn resolve_quadrature(l: &Lookup, defaults: QuadratureConfig) -> Result<QuadratureConfig, ConfigError> {
    let q = QuadratureConfig {
        order: l.count("quadrature.order", defaults.order)?,
        order_4d: l.count("quadrature.order_4d", defaults.order_4d)?,
        envelope_scale: l.real("quadrature.envelope_scale", defaults.envelope_scale)?,
        convergence: l.real("quadrature.convergence", defaults.convergence)?,
    };
    q.validate().map_err(|e| l.error("quadrature.order", e.to_string()))?;
    Ok(q)
}

fn is_coherent(input: &InputStateSpec) -> bool {
    matches!(input, InputStateSpec::Coherent { .. })
}

fn is_ideal(ch: &ChannelSpec) -> bool {
    *ch == ChannelSpec::ideal()
}

impl Setup {
    fn resolve(kind: ExperimentKind, l: &Lookup, quad: QuadratureConfig) -> Result<Self, ConfigError> {
        let quantity = match l.get("quantity") {
            Some(_) => {
                let w = l.word("quantity", "")?;
                Quantity::parse(w).ok_or_else(|| l.error("quantity", format!("unknown quantity `{w}`")))?
            }
            None => Quantity::default_for(kind)
                .ok_or_else(|| l.error("quantity", format!("required for {} ({})", kind.name(), Quantity::choices(kind))))?,
        };
        if quantity.kind() != kind {
            return Err(l.error(
                "quantity",
                format!("`{}` does not belong to {} ({})", quantity.name(), kind.name(), Quantity::choices(kind)),
            ));
        }
        let tune = match l.word("resource.tune", "none")? {
            "none" => Tune::None,
            "coherent" => Tune::Coherent,
            "fock" => Tune::Fock,
            "input" => Tune::Input,
            other => return Err(l.error("resource.tune", format!("unknown target `{other}` (none, coherent, fock, input)"))),
        };
        let method = match l.word("optimize.method", "numeric")? {
            "numeric" => Method::Numeric,
            "analytic" => Method::Analytic,
            "geometric" => Method::Geometric,
            other => return Err(l.error("optimize.method", format!("unknown method `{other}` (numeric, analytic, geometric)"))),
        };
        let s = Setup {
            input: resolve_input(l)?,
            resource: resolve_resource(l)?,
            channel: resolve_channel(l)?,
            quad: resolve_quadrature(l, quad)?,
            quantity,
            tune,
            method,
        };
        s.check(l)?;
        Ok(s)
    }

    fn optimizes(&self) -> bool {
        matches!(self.quantity, Quantity::FidelityOpt | Quantity::RelativeTmsv | Quantity::RelativePss)
    }

    /// Whether the family has free parameters the optimizers know about.
    fn tunable(&self) -> bool {
        matches!(
            self.resource.family,
            ResourceFamily::SqueezedBell { .. } | ResourceFamily::Sssf { .. } | ResourceFamily::SqueezedCat { .. }
        )
    }

    fn target_input(&self) -> InputStateSpec {
        match self.tune {
            Tune::Coherent => InputStateSpec::coherent(Complex64::new(0.0, 0.0)),
            Tune::Fock => InputStateSpec::Fock1,
            _ => self.input.clone(),
        }
    }

    fn check(&self, l: &Lookup) -> Result<(), ConfigError> {
        let fam = &self.resource.family;
        let searching = self.optimizes() || self.tune != Tune::None;
        if self.tune != Tune::None {
            if self.optimizes() {
                return Err(l.error("resource.tune", "optimize-sweep already optimizes the resource"));
            }
            if !self.tunable() {
                return Err(l.error("resource.tune", format!("family `{}` has no parameters to tune", fam.name())));
            }
        }
        let optimized_family = searching && self.tunable();
        if optimized_family {
            if self.resource.phi != PI {
                return Err(l.error("resource.phi", "the optimizers fix the squeezing phase at pi"));
            }
            if matches!(fam, ResourceFamily::SqueezedCat { .. }) && !is_coherent(&self.target_input()) {
                return Err(l.error("resource.family", "the cat optimum is available for coherent inputs only"));
            }
            if matches!(fam, ResourceFamily::Sssf { .. }) && !self.resource.is_pure() {
                return Err(l.error("resource.n_th", "the SSSF optimizer works with pure resources only"));
            }
        }
        if self.optimizes() && !is_ideal(&self.channel) {
            return Err(l.error("channel.variant", "optimize-sweep uses the ideal unit-gain channel"));
        }
        match self.method {
            Method::Numeric => {}
            Method::Analytic => {
                let ok = searching
                    && matches!(fam, ResourceFamily::SqueezedBell { .. })
                    && is_coherent(&self.target_input());
                if !ok {
                    return Err(l.error("optimize.method", "analytic optimization covers the Bell family with coherent inputs"));
                }
            }
            Method::Geometric => {
                if !(searching && matches!(fam, ResourceFamily::Sssf { .. })) {
                    return Err(l.error("optimize.method", "the geometric method applies to optimized SSSF resources"));
                }
            }
        }
        match self.quantity {
            Quantity::ClassicalThreshold => {
                if !matches!(fam, ResourceFamily::Tmsv | ResourceFamily::SqueezedBell { .. } | ResourceFamily::SqueezedCat { .. }) {
                    return Err(l.error("resource.family", "classical thresholds cover tmsv, bell and cat"));
                }
            }
            Quantity::SeparabilityThreshold => {
                if *fam != ResourceFamily::Tmsv {
                    return Err(l.error("resource.family", "the separability threshold is computed for tmsv"));
                }
            }
            Quantity::Entropy | Quantity::NonGaussianity | Quantity::Affinity => {
                if !self.resource.is_pure() {
                    return Err(l.error("resource.n_th", format!("{} needs a pure resource", self.quantity.name())));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn parameter_columns(&self) -> Vec<&'static str> {
        match (&self.resource.family, self.method) {
            (ResourceFamily::SqueezedBell { .. }, _) => vec!["delta"],
            (ResourceFamily::SqueezedCat { .. }, _) => vec!["gamma"],
            (ResourceFamily::Sssf { .. }, Method::Geometric) => vec!["s"],
            (ResourceFamily::Sssf { .. }, _) => vec!["c0", "c1", "c2"],
            _ => vec![],
        }
    }

    /// Column suffixes after the main value.
    pub fn extra_columns(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.quantity == Quantity::Affinity {
            v.push("s_star");
        }
        if self.tune != Tune::None || (self.optimizes() && self.tunable()) {
            v.extend(self.parameter_columns());
        }
        v
    }

    fn thermal(&self) -> cvtele::Result<ThermalContext> {
        ThermalContext::new(self.resource.n_th_a, self.resource.n_th_b)
    }

    fn with_family(&self, family: ResourceFamily) -> ResourceSpec {
        ResourceSpec { family, ..self.resource.clone() }
    }

    /// Optimum of the resource family for `input`: (F, resource, parameters).
    fn optimum(&self, input: &InputStateSpec) -> cvtele::Result<(f64, ResourceSpec, Vec<f64>)> {
        let r = self.resource.r;
        let ctx = self.thermal()?;
        let unpack = |o: OptResult| -> (f64, ResourceFamily, Vec<f64>) {
            match o.argmax {
                Argmax::Delta(d) => (o.f_opt, ResourceFamily::bell(d), vec![d]),
                Argmax::Gamma(g) => (o.f_opt, ResourceFamily::cat(FRAC_PI_4, Complex64::new(g, 0.0)), vec![g]),
                Argmax::Sssf { c, .. } => (o.f_opt, ResourceFamily::sssf(c[0], c[1], c[2]), c.to_vec()),
                Argmax::Squeezing(s) => {
                    let t = s.tanh();
                    (o.f_opt, ResourceFamily::sssf(1.0, t, t * t), vec![s])
                }
            }
        };
        let (f, fam, params) = match (&self.resource.family, self.method) {
            (ResourceFamily::SqueezedBell { .. }, Method::Analytic) => unpack(optimize_bell_analytic(r, ctx)?),
            (ResourceFamily::SqueezedBell { .. }, _) => unpack(optimize_bell(r, input, ctx, &self.quad)?),
            (ResourceFamily::Sssf { .. }, Method::Geometric) => unpack(optimize_sssf_geometric(r, input, &self.quad)?),
            (ResourceFamily::Sssf { .. }, _) => unpack(optimize_sssf(r, input, &self.quad)?),
            (ResourceFamily::SqueezedCat { .. }, _) => unpack(optimize_cat(r, ctx)?),
            _ => return Ok((fidelity(&self.channel, input, &self.resource, &self.quad)?, self.resource.clone(), vec![])),
        };
        Ok((f, self.with_family(fam), params))
    }

    /// The resource after tuning, with the chosen parameters.
    fn tuned(&self) -> cvtele::Result<(ResourceSpec, Vec<f64>)> {
        if self.tune == Tune::None {
            return Ok((self.resource.clone(), vec![]));
        }
        let r = self.resource.r;
        let ctx = self.thermal()?;
        // closed-form Bell angles where they exist
        if matches!(self.resource.family, ResourceFamily::SqueezedBell { .. }) {
            let d = match (self.tune, self.resource.is_pure()) {
                (Tune::Coherent, true) => Some(delta_opt_coherent(r)),
                (Tune::Coherent, false) => Some(delta_opt_coherent_thermal(r, ctx)),
                (Tune::Fock, true) => Some(delta_opt_fock(r)),
                _ => None,
            };
            if let Some(d) = d {
                return Ok((self.with_family(ResourceFamily::bell(d)), vec![d]));
            }
        }
        let (_, spec, params) = self.optimum(&self.target_input())?;
        Ok((spec, params))
    }

    pub fn evaluate(&self) -> cvtele::Result<Vec<f64>> {
        let r = self.resource.r;
        Ok(match self.quantity {
            Quantity::Fidelity => {
                let (spec, params) = self.tuned()?;
                std::iter::once(fidelity(&self.channel, &self.input, &spec, &self.quad)?).chain(params).collect()
            }
            Quantity::FidelityOpt => {
                let (f, _, params) = self.optimum(&self.input)?;
                std::iter::once(f).chain(params).collect()
            }
            Quantity::RelativeTmsv | Quantity::RelativePss => {
                let (f, _, params) = self.optimum(&self.input)?;
                let base = if self.quantity == Quantity::RelativeTmsv {
                    ResourceFamily::Tmsv
                } else {
                    ResourceFamily::PhotonSubtracted
                };
                let f_ref = fidelity(&self.channel, &self.input, &self.with_family(base), &self.quad)?;
                std::iter::once(relative_fidelity(f, f_ref)?).chain(params).collect()
            }
            Quantity::Entropy => {
                let (spec, params) = self.tuned()?;
                std::iter::once(von_neumann_entropy(&spec)?).chain(params).collect()
            }
            Quantity::NonGaussianity => {
                let (spec, params) = self.tuned()?;
                std::iter::once(non_gaussianity(&spec, &self.quad)?).chain(params).collect()
            }
            Quantity::Affinity => {
                let (spec, params) = self.tuned()?;
                let a = vacuum_affinity(&spec, AFFINITY_S_MAX)?;
                [a.g, a.s_star].into_iter().chain(params).collect()
            }
            Quantity::Inseparability => {
                let (spec, params) = self.tuned()?;
                std::iter::once(inseparability_delta(&spec)?).chain(params).collect()
            }
            Quantity::ClassicalThreshold => {
                let fam = match self.resource.family {
                    ResourceFamily::Tmsv => ThresholdFamily::Tmsv,
                    ResourceFamily::SqueezedBell { .. } => ThresholdFamily::BellOptimized,
                    _ => ThresholdFamily::CatOptimized,
                };
                vec![classical_threshold(fam, r)?]
            }
            Quantity::SeparabilityThreshold => vec![separability_threshold(r)?],
        })
    }
}

/// A fully resolved experiment: one setup per grid point and series.
#[derive(Debug, Clone)]
pub struct Plan {
    pub axis_names: Vec<String>,
    pub grid: Vec<Vec<f64>>,
    pub series_names: Vec<String>,
    pub columns: Vec<String>,
    /// `setups[point][series]`.
    pub setups: Vec<Vec<Setup>>,
}

#[derive(Debug, thiserror::Error)]
#[error("series `{series}` at {point}: {source}")]
pub struct EvalError {
    pub series: String,
    pub point: String,
    pub source: cvtele::Error,
}

pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Plan {
    pub fn new(cfg: &ExperimentConfig, quad: QuadratureConfig) -> Result<Self, ConfigError> {
        if cfg.kind == ExperimentKind::Figure {
            return Err(ConfigError::new(None, Some("experiment"), "figure configs are expanded before planning"));
        }
        let axis_names: Vec<String> = cfg.axes.iter().map(|a| a.param.clone()).collect();
        let grid = cfg.grid();
        let implicit = cfg.series.is_empty();
        let series_names: Vec<String> = if implicit {
            let q = cfg.params.get("quantity").map(|e| e.value.clone());
            vec![q.or_else(|| Quantity::default_for(cfg.kind).map(|q| q.name().to_string())).unwrap_or_else(|| "value".into())]
        } else {
            cfg.series.iter().map(|s| s.name.clone()).collect()
        };

        let mut setups = Vec::with_capacity(grid.len());
        for point in &grid {
            let axes: Vec<(&str, f64)> = axis_names.iter().map(String::as_str).zip(point.iter().copied()).collect();
            let row = (0..series_names.len())
                .map(|k| {
                    let s = (!implicit).then(|| &cfg.series[k]);
                    let l = Lookup {
                        base: &cfg.params,
                        series: s.map(|s| &s.overrides),
                        axes: &axes,
                        series_line: s.map(|s| s.line),
                    };
                    Setup::resolve(cfg.kind, &l, quad)
                })
                .collect::<Result<Vec<_>, _>>()?;
            setups.push(row);
        }

        let mut columns = axis_names.clone();
        for (k, name) in series_names.iter().enumerate() {
            columns.push(name.clone());
            if let Some(first) = setups.first() {
                columns.extend(first[k].extra_columns().iter().map(|c| format!("{name}.{c}")));
            }
        }
        Ok(Self { axis_names, grid, series_names, columns, setups })
    }

    fn describe_point(&self, p: usize) -> String {
        if self.axis_names.is_empty() {
            return "the single point".into();
        }
        self.axis_names.iter().zip(&self.grid[p]).map(|(n, v)| format!("{n}={v:?}")).collect::<Vec<_>>().join(", ")
    }

    /// Evaluates every (point, series) on the current rayon pool; rows come back in grid order.
    pub fn execute(&self) -> Result<Table, EvalError> {
        let ns = self.series_names.len();
        let results: Vec<cvtele::Result<Vec<f64>>> =
            (0..self.grid.len() * ns).into_par_iter().map(|t| self.setups[t / ns][t % ns].evaluate()).collect();
        let mut rows = Vec::with_capacity(self.grid.len());
        let mut it = results.into_iter();
        for (p, point) in self.grid.iter().enumerate() {
            let mut row = point.clone();
            for k in 0..ns {
                let vals = it.next().expect("one result per task").map_err(|source| EvalError {
                    series: self.series_names[k].clone(),
                    point: self.describe_point(p),
                    source,
                })?;
                row.extend(vals);
            }
            rows.push(row);
        }
        Ok(Table { columns: self.columns.clone(), rows })
    }
}
