// SPDX-License-Identifier: Apache-2.0

//! CSV and gnuplot emission. The CSV layout is described in `schema/csv-v1.md`.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::experiment::Table;

pub const SCHEMA: &str = "cvtele-csv/1";

pub struct Metadata<'a> {
    pub experiment: &'a str,
    pub title: Option<&'a str>,
    pub figure: Option<&'a str>,
    pub config_text: &'a str,
    pub reproducible: bool,
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Shortest decimal that parses back to the same double.
pub fn format_value(v: f64) -> String {
    format!("{v:?}")
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

pub fn render_csv(table: &Table, meta: &Metadata) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema: {SCHEMA}");
    let _ = writeln!(out, "# generator: simulate {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# experiment: {}", meta.experiment);
    if let Some(f) = meta.figure {
        let _ = writeln!(out, "# figure: {}", one_line(f));
    }
    if let Some(t) = meta.title {
        let _ = writeln!(out, "# title: {}", one_line(t));
    }
    let _ = writeln!(out, "# config-sha256: {}", sha256_hex(meta.config_text));
    if !meta.reproducible {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let _ = writeln!(out, "# generated-unix-seconds: {secs}");
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Script plotting every value column against the last swept axis, one curve per
/// value of the outer axis when there are two.
pub fn render_gnuplot(csv_file: &str, table: &Table, axes: &[String], outer_values: &[f64]) -> Option<String> {
    let n_axes = axes.len();
    if n_axes == 0 || n_axes > 2 {
        return None;
    }
    let x = n_axes;
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script for {csv_file}");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "set xlabel '{}'", axes[x - 1]);
    let _ = writeln!(s, "set grid");
    let mut curves = Vec::new();
    for (k, name) in table.columns.iter().enumerate().skip(n_axes) {
        let col = k + 1;
        if n_axes == 1 {
            curves.push(format!("'{csv_file}' using {x}:{col} with lines title '{name}'"));
        } else {
            for v in outer_values {
                let v = format_value(*v);
                curves.push(format!(
                    "'{csv_file}' using {x}:($1 == {v} ? ${col} : NaN) with lines title '{name} ({} = {v})'",
                    axes[0]
                ));
            }
        }
    }
    let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        Table { columns: vec!["resource.r".into(), "tmsv".into()], rows: vec![vec![0.0, 0.5], vec![0.1, 0.549833997312478]] }
    }

    #[test]
    fn values_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 0.549833997312478] {
            let s = format_value(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_value(0.1), "0.1");
        assert_eq!(format_value(1.0), "1.0");
    }

    #[test]
    fn reproducible_csv_has_no_timestamp() {
        let meta = Metadata {
            experiment: "fidelity-sweep",
            title: Some("t"),
            figure: None,
            config_text: "experiment = fidelity-sweep\n",
            reproducible: true,
        };
        let a = render_csv(&table(), &meta);
        assert_eq!(a, render_csv(&table(), &meta));
        assert!(!a.contains("generated"));
        assert!(a.contains("resource.r,tmsv\n0.0,0.5\n0.1,0.549833997312478\n"));
        let b = render_csv(&table(), &Metadata { reproducible: false, ..meta });
        assert!(b.contains("# generated-unix-seconds: "));
    }

    #[test]
    fn hash_is_sha256() {
        assert_eq!(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn gnuplot_scripts() {
        let s = render_gnuplot("x.csv", &table(), &["resource.r".into()], &[]).unwrap();
        assert!(s.contains("using 1:2 with lines title 'tmsv'"));
        let t = Table { columns: vec!["a".into(), "b".into(), "f".into()], rows: vec![] };
        let s = render_gnuplot("y.csv", &t, &["a".into(), "b".into()], &[0.0, 0.5]).unwrap();
        assert!(s.contains("using 2:($1 == 0.5 ? $3 : NaN)"));
        assert!(render_gnuplot("z.csv", &t, &[], &[]).is_none());
    }
}
