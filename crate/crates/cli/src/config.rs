// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` experiment files.
//!
//! ```text
//! experiment = fidelity-sweep
//! input.kind = coherent
//! sweep.r = resource.r 0 1.5 31
//! series.tmsv = resource.family = tmsv
//! series.bell = resource.family = bell; resource.delta = pi/4
//! ```
//!
//! Keys have at most two dotted levels. `sweep.<label>` declares an axis
//! (parameter, start, stop, steps); axes nest in file order, the first outermost.
//! `series.<name>` holds `;`-separated parameter overrides and yields one group of
//! output columns.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use cvtele::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "line {l} ({k}): {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "{k}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl ConfigError {
    pub fn new(line: Option<usize>, field: Option<&str>, message: impl Into<String>) -> Self {
        Self { line, field: field.map(str::to_string), message: message.into() }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    FidelitySweep,
    OptimizeSweep,
    MeasuresSweep,
    ThresholdSweep,
    Figure,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "fidelity-sweep" => Self::FidelitySweep,
            "optimize-sweep" => Self::OptimizeSweep,
            "measures-sweep" => Self::MeasuresSweep,
            "threshold-sweep" => Self::ThresholdSweep,
            "figure" => Self::Figure,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FidelitySweep => "fidelity-sweep",
            Self::OptimizeSweep => "optimize-sweep",
            Self::MeasuresSweep => "measures-sweep",
            Self::ThresholdSweep => "threshold-sweep",
            Self::Figure => "figure",
        }
    }
}

/// Parameters that may appear at top level, in a series, or (if numeric) on an axis.
pub const PARAM_KEYS: &[(&str, ValueKind)] = &[
    ("quantity", ValueKind::Word),
    ("input.kind", ValueKind::Word),
    ("input.beta", ValueKind::Complex),
    ("input.s", ValueKind::Real),
    ("input.phi_s", ValueKind::Real),
    ("resource.family", ValueKind::Word),
    ("resource.r", ValueKind::Real),
    ("resource.phi", ValueKind::Real),
    ("resource.delta", ValueKind::Real),
    ("resource.theta", ValueKind::Real),
    ("resource.c", ValueKind::Reals(3)),
    ("resource.theta1", ValueKind::Real),
    ("resource.theta2", ValueKind::Real),
    ("resource.gamma", ValueKind::Complex),
    ("resource.n_th", ValueKind::Real),
    ("resource.n_th_a", ValueKind::Real),
    ("resource.n_th_b", ValueKind::Real),
    ("resource.tune", ValueKind::Word),
    ("optimize.method", ValueKind::Word),
    ("channel.variant", ValueKind::Word),
    ("channel.g_x", ValueKind::Real),
    ("channel.g_p", ValueKind::Real),
    ("channel.theta", ValueKind::Real),
    ("channel.r_m", ValueKind::Real),
    ("channel.s_m", ValueKind::Real),
    ("channel.phi_x", ValueKind::Real),
    ("channel.phi_p", ValueKind::Real),
    ("channel.n_u", ValueKind::Real),
    ("channel.s_u", ValueKind::Real),
    ("channel.n_v", ValueKind::Real),
    ("channel.s_v", ValueKind::Real),
    ("quadrature.order", ValueKind::Count),
    ("quadrature.order_4d", ValueKind::Count),
    ("quadrature.envelope_scale", ValueKind::Real),
    ("quadrature.convergence", ValueKind::Real),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Word,
    Real,
    Reals(usize),
    Complex,
    Count,
}

pub fn param_kind(key: &str) -> Option<ValueKind> {
    PARAM_KEYS.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

/// A value together with the line it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub line: usize,
}

impl Axis {
    /// Evenly spaced values; the endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.stop } else { self.start + (self.stop - self.start) * k as f64 / n })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub overrides: BTreeMap<String, Entry>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Recipe id when `kind` is `figure`.
    pub figure: Option<String>,
    pub title: Option<String>,
    /// Output file stem.
    pub name: Option<String>,
    pub params: BTreeMap<String, Entry>,
    pub axes: Vec<Axis>,
    pub series: Vec<Series>,
    /// Verbatim text, hashed into the CSV metadata.
    pub source: String,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn split_key_value(text: &str, line: usize) -> Result<(String, String)> {
    let Some((k, v)) = text.split_once('=') else {
        return Err(ConfigError::new(Some(line), None, format!("expected `key = value`, found `{}`", text.trim())));
    };
    let key = k.trim();
    if key.is_empty() {
        return Err(ConfigError::new(Some(line), None, "empty key"));
    }
    if key.split('.').count() > 2 || key.split('.').any(str::is_empty) {
        return Err(ConfigError::new(Some(line), Some(key), "keys have at most two non-empty dotted parts"));
    }
    Ok((key.to_string(), v.trim().to_string()))
}

/// Parses a real, accepting multiples and fractions of `pi` (`pi/4`, `-2pi`, `3*pi/8`).
pub fn parse_real(s: &str) -> Option<f64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(v) = t.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let i = t.find("pi")?;
    let (head, tail) = (&t[..i], &t[i + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let factor = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().ok()?,
    };
    let div = match tail {
        "" => 1.0,
        d => d.strip_prefix('/')?.parse::<f64>().ok()?,
    };
    let v = factor * PI / div;
    v.is_finite().then_some(v)
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also `i`, `1+i`).
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i') else {
        return parse_real(&t).map(|re| Complex64::new(re, 0.0));
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        v => parse_real(v),
    };
    match split {
        Some(k) => Some(Complex64::new(parse_real(&body[..k])?, imag(&body[k..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

fn parse_count(s: &str) -> Option<usize> {
    s.trim().parse::<usize>().ok()
}

/// Checks that `value` has the shape `key` expects.
pub fn check_value(key: &str, value: &str, line: usize) -> Result<()> {
    let kind = param_kind(key).ok_or_else(|| ConfigError::new(Some(line), Some(key), "unknown parameter"))?;
    let ok = match kind {
        ValueKind::Word => !value.is_empty() && !value.contains(char::is_whitespace),
        ValueKind::Real => parse_real(value).is_some(),
        ValueKind::Reals(n) => {
            let parts: Vec<&str> = value.split_whitespace().collect();
            parts.len() == n && parts.iter().all(|p| parse_real(p).is_some())
        }
        ValueKind::Complex => parse_complex(value).is_some(),
        ValueKind::Count => parse_count(value).is_some(),
    };
    if ok {
        Ok(())
    } else {
        let want = match kind {
            ValueKind::Word => "a single word".to_string(),
            ValueKind::Real => "a real number".to_string(),
            ValueKind::Reals(n) => format!("{n} real numbers"),
            ValueKind::Complex => "a complex number such as 1+0.5i".to_string(),
            ValueKind::Count => "a nonnegative integer".to_string(),
        };
        Err(ConfigError::new(Some(line), Some(key), format!("expected {want}, found `{value}`")))
    }
}

fn parse_axis(label: &str, value: &str, line: usize) -> Result<Axis> {
    let key = format!("sweep.{label}");
    let err = |m: String| ConfigError::new(Some(line), Some(&key), m);
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.is_empty() {
        return Err(err("empty sweep axis".into()));
    }
    if parts.len() != 4 {
        return Err(err(format!("expected `<parameter> <start> <stop> <steps>`, found `{value}`")));
    }
    let param = parts[0];
    if param_kind(param) != Some(ValueKind::Real) {
        return Err(err(format!("`{param}` is not a sweepable real parameter")));
    }
    let start = parse_real(parts[1]).ok_or_else(|| err(format!("bad start `{}`", parts[1])))?;
    let stop = parse_real(parts[2]).ok_or_else(|| err(format!("bad stop `{}`", parts[2])))?;
    let steps = parse_count(parts[3]).ok_or_else(|| err(format!("bad step count `{}`", parts[3])))?;
    if steps < 2 {
        return Err(err(format!("a sweep axis needs at least 2 steps, found {steps}")));
    }
    Ok(Axis { label: label.to_string(), param: param.to_string(), start, stop, steps, line })
}

fn parse_series(name: &str, value: &str, line: usize) -> Result<Series> {
    let mut overrides = BTreeMap::new();
    for part in value.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = split_key_value(part, line)?;
        if k.starts_with("sweep.") || k.starts_with("series.") {
            return Err(ConfigError::new(Some(line), Some(&k), "series may only override parameters"));
        }
        check_value(&k, &v, line)?;
        if overrides.insert(k.clone(), Entry { value: v, line }).is_some() {
            return Err(ConfigError::new(Some(line), Some(&k), format!("repeated in series `{name}`")));
        }
    }
    Ok(Series { name: name.to_string(), overrides, line })
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut figure = None;
        let mut title = None;
        let mut name = None;
        let mut params = BTreeMap::new();
        let mut axes: Vec<Axis> = Vec::new();
        let mut series: Vec<Series> = Vec::new();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = split_key_value(body, line)?;
            if let Some(prev) = seen.insert(key.clone(), line) {
                return Err(ConfigError::new(Some(line), Some(&key), format!("duplicate key (first set on line {prev})")));
            }
            match key.split_once('.') {
                None if key == "experiment" => {
                    kind = Some(ExperimentKind::parse(&value).ok_or_else(|| {
                        ConfigError::new(
                            Some(line),
                            Some("experiment"),
                            format!("unknown kind `{value}` (fidelity-sweep, optimize-sweep, measures-sweep, threshold-sweep, figure)"),
                        )
                    })?);
                }
                None if key == "figure" => figure = Some(value),
                None if key == "title" => title = Some(value),
                Some(("output", "name")) => {
                    if !valid_name(&value) {
                        return Err(ConfigError::new(Some(line), Some(&key), "use letters, digits, `-`, `_` and `.` only"));
                    }
                    name = Some(value);
                }
                Some(("sweep", label)) => axes.push(parse_axis(label, &value, line)?),
                Some(("series", s)) => {
                    if !valid_name(s) {
                        return Err(ConfigError::new(Some(line), Some(&key), "series names use letters, digits, `-`, `_` and `.`"));
                    }
                    series.push(parse_series(s, &value, line)?);
                }
                _ => {
                    check_value(&key, &value, line)?;
                    params.insert(key, Entry { value, line });
                }
            }
        }

        let kind = kind.ok_or_else(|| ConfigError::new(None, Some("experiment"), "missing experiment kind"))?;
        match (kind, &figure) {
            (ExperimentKind::Figure, None) => {
                return Err(ConfigError::new(None, Some("figure"), "a figure experiment names a recipe id"))
            }
            (ExperimentKind::Figure, Some(_)) => {
                if !params.is_empty() || !axes.is_empty() || !series.is_empty() {
                    return Err(ConfigError::new(None, None, "a figure experiment takes no parameters, axes or series"));
                }
            }
            (_, Some(_)) => {
                return Err(ConfigError::new(Some(seen["figure"]), Some("figure"), "only valid with `experiment = figure`"))
            }
            _ => {}
        }

        for (i, a) in axes.iter().enumerate() {
            if let Some(b) = axes[..i].iter().find(|b| b.param == a.param) {
                return Err(ConfigError::new(
                    Some(a.line),
                    Some(&format!("sweep.{}", a.label)),
                    format!("`{}` is already swept by sweep.{}", a.param, b.label),
                ));
            }
            if let Some(s) = series.iter().find(|s| s.overrides.contains_key(&a.param)) {
                return Err(ConfigError::new(
                    Some(s.line),
                    Some(&format!("series.{}", s.name)),
                    format!("overrides the swept parameter `{}`", a.param),
                ));
            }
        }
        Ok(Self { kind, figure, title, name, params, axes, series, source: text.to_string() })
    }

    /// Row-major grid, first axis outermost.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let mut rows = vec![Vec::new()];
        for axis in &self.axes {
            let vals = axis.values();
            rows = rows
                .into_iter()
                .flat_map(|row| {
                    vals.iter().map(move |&v| {
                        let mut r = row.clone();
                        r.push(v);
                        r
                    })
                })
                .collect();
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# teleport a coherent state
experiment = fidelity-sweep
input.kind = coherent   # amplitude irrelevant
sweep.r = resource.r 0 1.5 4
sweep.n = resource.n_th 0 0.1 2
series.tmsv = resource.family = tmsv
series.bell = resource.family = bell; resource.delta = pi/4
";

    #[test]
    fn parses_sample() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.kind, ExperimentKind::FidelitySweep);
        assert_eq!(c.axes.len(), 2);
        assert_eq!(c.axes[0].values(), vec![0.0, 0.5, 1.0, 1.5]);
        assert_eq!(c.series[1].overrides["resource.delta"].value, "pi/4");
        assert_eq!(c.params["input.kind"].value, "coherent");
        let g = c.grid();
        assert_eq!(g.len(), 8);
        assert_eq!(g[1], vec![0.0, 0.1]);
        assert_eq!(g[7], vec![1.5, 0.1]);
    }

    #[test]
    fn axis_values_hit_endpoints() {
        let a = Axis { label: "r".into(), param: "resource.r".into(), start: 0.0, stop: 1.5, steps: 31, line: 1 };
        let v = a.values();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[6], 0.3);
        assert_eq!(v[30], 1.5);
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_real("pi/4"), Some(PI / 4.0));
        assert_eq!(parse_real("-2pi"), Some(-2.0 * PI));
        assert_eq!(parse_real("3*pi/8"), Some(3.0 * PI / 8.0));
        assert_eq!(parse_real("1e-3"), Some(1e-3));
        assert_eq!(parse_real("pie"), None);
        assert_eq!(parse_real("inf"), None);
        assert_eq!(parse_complex("1+i"), Some(Complex64::new(1.0, 1.0)));
        assert_eq!(parse_complex("2i"), Some(Complex64::new(0.0, 2.0)));
        assert_eq!(parse_complex("-0.5-2.5i"), Some(Complex64::new(-0.5, -2.5)));
        assert_eq!(parse_complex("1e-3+1e-2i"), Some(Complex64::new(1e-3, 1e-2)));
        assert_eq!(parse_complex("0.3"), Some(Complex64::new(0.3, 0.0)));
        assert_eq!(parse_complex("-i"), Some(Complex64::new(0.0, -1.0)));
        assert_eq!(parse_complex("x"), None);
    }

    fn err(text: &str) -> ConfigError {
        ExperimentConfig::parse(text).unwrap_err()
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let e = err("experiment = fidelity-sweep\nresource.r = abc\n");
        assert_eq!((e.line, e.field.as_deref()), (Some(2), Some("resource.r")));
        let e = err("experiment = fidelity-sweep\nsweep.r =\n");
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("empty sweep axis"));
        let e = err("experiment = fidelity-sweep\nsweep.r = resource.r 0 1 1\n");
        assert!(e.message.contains("at least 2"));
        let e = err("experiment = fidelity-sweep\nresource.bogus = 1\n");
        assert!(e.message.contains("unknown parameter"));
        let e = err("experiment = fidelity-sweep\nresource.r = 1\nresource.r = 2\n");
        assert_eq!(e.line, Some(3));
        let e = err("experiment = fidelity-sweep\na.b.c = 1\n");
        assert!(e.message.contains("two"));
        let e = err("input.kind = coherent\n");
        assert_eq!(e.field.as_deref(), Some("experiment"));
        let e = err("experiment = fidelity-sweep\njust words\n");
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn structural_conflicts() {
        let e = err("experiment = fidelity-sweep\nsweep.r = resource.r 0 1 3\nseries.a = resource.r = 1\n");
        assert!(e.message.contains("swept"));
        let e = err("experiment = fidelity-sweep\nsweep.a = resource.r 0 1 3\nsweep.b = resource.r 0 1 3\n");
        assert!(e.message.contains("already swept"));
        let e = err("experiment = figure\n");
        assert_eq!(e.field.as_deref(), Some("figure"));
        let e = err("experiment = figure\nfigure = 3.1-I\nresource.r = 1\n");
        assert!(e.message.contains("no parameters"));
        let e = err("experiment = fidelity-sweep\nsweep.k = resource.family 0 1 3\n");
        assert!(e.message.contains("sweepable"));
    }
}
