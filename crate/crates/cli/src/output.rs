//! Rendering helpers: complex matrices as aligned text or JSON, CSV
//! emitters with fixed headers, and the manifest sidecar that records how
//! a data file was produced.

use std::io;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde_json::{json, Value};

use uqsd_core::linalg::{OperatorMatrix, C64};
use uqsd_core::optimize::{OptimumRow, SweepCurve};
use uqsd_core::tol;

/// Signed fixed-point rendering, `+re+imi`, at the given precision.
pub fn format_complex(z: C64, precision: usize) -> String {
    format!("{:+.prec$}{:+.prec$}i", z.re, z.im, prec = precision)
}

/// One bracketed line per matrix row, entries space-aligned.
pub fn matrix_lines(m: &OperatorMatrix, precision: usize) -> Vec<String> {
    (0..m.rows())
        .map(|i| {
            let entries: Vec<String> = (0..m.cols())
                .map(|j| format_complex(m[(i, j)], precision))
                .collect();
            format!("  [ {} ]", entries.join("  "))
        })
        .collect()
}

/// Full-precision JSON form: `{"rows", "cols", "entries": [[{"re", "im"},
/// ...], ...]}`.
pub fn matrix_json(m: &OperatorMatrix) -> Value {
    let entries: Vec<Value> = (0..m.rows())
        .map(|i| {
            Value::Array(
                (0..m.cols())
                    .map(|j| json!({ "re": m[(i, j)].re, "im": m[(i, j)].im }))
                    .collect(),
            )
        })
        .collect();
    json!({ "rows": m.rows(), "cols": m.cols(), "entries": entries })
}

/// CSV for optimizer tables; header and 6-decimal formatting are part of
/// the file contract.
pub fn table_csv(rows: &[OptimumRow]) -> String {
    let mut out = String::from("m,kappa,p_in,p_b,p_c,p_s\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.m, r.kappa, r.p_in, r.p_b, r.p_c, r.p_s
        ));
    }
    out
}

/// CSV for coupling-ratio sweeps; header and 6-decimal formatting are part
/// of the file contract.
pub fn sweep_csv(curve: &SweepCurve) -> String {
    let mut out = String::from("kappa,p_b,p_c,p_in,p_s\n");
    for p in &curve.points {
        out.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            p.kappa, p.p_b, p.p_c, p.p_in, p.p_s
        ));
    }
    out
}

/// The numerical tolerances in effect, echoed into manifests and verify
/// reports.
pub fn tolerances_json() -> Value {
    json!({
        "unitarity": tol::UNITARITY_TOL,
        "hermiticity": tol::HERMITICITY_TOL,
        "psd": tol::PSD_TOL,
        "normalization": tol::NORMALIZATION_TOL,
        "completeness": tol::COMPLETENESS_TOL,
        "unambiguity": tol::UNAMBIGUITY_TOL,
        "closed_form_agreement": tol::CLOSED_FORM_AGREEMENT_TOL,
        "zero_probability": tol::ZERO_PROB_TOL,
        "probability_sum": tol::PROBABILITY_SUM_TOL,
        "probability_range": tol::PROBABILITY_RANGE_TOL,
    })
}

/// Manifest describing one emitted data file. The timestamp is the only
/// field that varies between identical runs.
pub fn manifest(command: &str, parameters: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "parameters": parameters,
        "tolerances": tolerances_json(),
        "timestamp": Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
    })
}

/// Sidecar path for a data file: the full file name plus
/// `.manifest.json`.
pub fn manifest_path(data_path: &Path) -> PathBuf {
    let mut name = data_path.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes to stdout, treating a closed pipe downstream as a normal end
/// of output rather than an error.
pub fn print_stdout(content: &str) -> io::Result<()> {
    use std::io::Write;

    let mut out = io::stdout().lock();
    let outcome = out.write_all(content.as_bytes()).and_then(|()| out.flush());
    match outcome {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

/// Writes `content` to the file, or to stdout when no path is given. A
/// file write also drops the manifest sidecar next to it.
pub fn emit(output: Option<&Path>, content: &str, command: &str, parameters: Value) -> io::Result<()> {
    match output {
        None => print_stdout(content),
        Some(path) => {
            std::fs::write(path, content)?;
            let sidecar = manifest_path(path);
            let manifest = manifest(command, parameters);
            std::fs::write(&sidecar, format!("{:#}\n", manifest))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_formatting_is_signed_and_fixed_width() {
        assert_eq!(format_complex(C64::new(1.0, -0.5), 3), "+1.000-0.500i");
        assert_eq!(format_complex(C64::new(-0.25, 0.0), 2), "-0.25+0.00i");
    }

    #[test]
    fn matrix_json_round_trips_entries() {
        let mut m = OperatorMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.5, -1.5);
        let value = matrix_json(&m);
        assert_eq!(value["rows"], 2);
        assert_eq!(value["entries"][0][1]["re"], 0.5);
        assert_eq!(value["entries"][0][1]["im"], -1.5);
    }

    #[test]
    fn csv_headers_are_pinned() {
        assert!(table_csv(&[]).starts_with("m,kappa,p_in,p_b,p_c,p_s\n"));
        let empty = SweepCurve { m: 0, q1: 0.5, points: vec![] };
        assert!(sweep_csv(&empty).starts_with("kappa,p_b,p_c,p_in,p_s\n"));
    }

    #[test]
    fn manifest_sidecar_name_appends_to_the_full_file_name() {
        assert_eq!(
            manifest_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.csv.manifest.json")
        );
    }
}
