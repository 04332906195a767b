//! On-disk formats: the binary field format, constants sidecars, and the
//! CSV writers for trajectories and stability reports.
//!
//! Binary field format: magic bytes "LEFD", unsigned 32-bit little-endian
//! interior resolution n, then n·n 64-bit little-endian floats, row-major.
//! read ∘ write is bit-exact on the payload.
//!
//! CSV numbers are rendered with 17 significant digits, which round-trips
//! every finite f64 exactly; reports never contain timestamps or other
//! machine-dependent state, so identical runs produce identical bytes.

use crate::error::{Error, Result};
use crate::euler::Trajectory;
use crate::grid::{Grid, ScalarField};
use crate::lane_emden::LaneEmdenSolution;
use crate::stability::StabilityReport;
use ndarray::Array2;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const FIELD_MAGIC: [u8; 4] = *b"LEFD";

/// Disclaimer embedded in every report header: a finite set of sampled
/// perturbations over a finite horizon corroborates stability, it cannot
/// establish it for all admissible initial data.
pub const REPORT_SCOPE_NOTE: &str = "finite-horizon experiment with sampled perturbations; \
results corroborate orbital stability on the stated horizon but cannot establish it \
for all admissible initial data";

/// 17-significant-digit rendering; lossless for f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_field(path: &Path, field: &ScalarField) -> Result<()> {
    let n = field.grid().n();
    let mut buf = Vec::with_capacity(8 + 8 * n * n);
    buf.extend_from_slice(&FIELD_MAGIC);
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    for v in field.values().iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_field(path: &Path) -> Result<ScalarField> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 8 {
        return Err(Error::format(path, "truncated header"));
    }
    if bytes[0..4] != FIELD_MAGIC {
        return Err(Error::format(path, "magic mismatch"));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let expected = 8 + 8 * n * n;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!("expected {expected} bytes for n = {n}, found {}", bytes.len()),
        ));
    }
    let grid = Grid::new(n).map_err(|e| Error::format(path, e.to_string()))?;
    let mut values = Array2::zeros((n, n));
    for (i, v) in values.iter_mut().enumerate() {
        let off = 8 + 8 * i;
        *v = f64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
    }
    ScalarField::from_values(grid, values).map_err(|e| Error::format(path, e.to_string()))
}

/// key=value sidecar with the constants of a computed solution; fields that
/// do not apply to the exponent regime are written as `na`.
pub fn write_constants(
    path: &Path,
    solution: &LaneEmdenSolution,
    config_echo: &serde_json::Value,
) -> Result<()> {
    let opt = |v: Option<f64>| v.map_or_else(|| "na".to_string(), fmt_float);
    let mut text = String::new();
    let _ = writeln!(text, "# config: {config_echo}");
    let _ = writeln!(text, "p={}", fmt_float(solution.p));
    let _ = writeln!(text, "c_p={}", opt(solution.c_p));
    let _ = writeln!(text, "mu_p={}", fmt_float(solution.mu_p));
    let _ = writeln!(text, "M_p={}", opt(solution.m_p));
    let _ = writeln!(text, "residual={}", fmt_float(solution.residual));
    let _ = writeln!(text, "iterations={}", solution.iterations);
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Trajectory diagnostics as CSV: `t` plus one column per observer.
pub fn write_trajectory(
    path: &Path,
    traj: &Trajectory,
    config_echo: &serde_json::Value,
) -> Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "# config: {config_echo}");
    let _ = writeln!(text, "t,{}", traj.names.join(","));
    for rec in &traj.records {
        let _ = write!(text, "{}", fmt_float(rec.t));
        for v in &rec.values {
            let _ = write!(text, ",{}", fmt_float(*v));
        }
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Stability report as CSV: a `#`-prefixed header echoing the resolved
/// configuration and flags, then one row per record step with columns
/// t, dist_L{s}…, dist_E, energy_drift, l{s}_drift…, rearrangement_drift.
pub fn write_report(path: &Path, report: &StabilityReport) -> Result<()> {
    fs::write(path, render_report(report)).map_err(|e| Error::io(path, e))
}

pub fn render_report(report: &StabilityReport) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "# config: {}", report.config);
    let _ = writeln!(text, "# note: {REPORT_SCOPE_NOTE}");
    let _ = writeln!(text, "# complete: {}", report.complete);
    let _ = writeln!(text, "# valid: {}", report.valid);
    let _ = write!(text, "t");
    for s in &report.norms_s {
        let _ = write!(text, ",dist_L{s}");
    }
    let _ = write!(text, ",dist_E,energy_drift");
    for s in &report.norms_s {
        let _ = write!(text, ",l{s}_drift");
    }
    let _ = writeln!(text, ",rearrangement_drift");
    for (k, t) in report.times.iter().enumerate() {
        let _ = write!(text, "{}", fmt_float(*t));
        for series in &report.dist_ls {
            let _ = write!(text, ",{}", fmt_float(series[k]));
        }
        let _ = write!(text, ",{}", fmt_float(report.dist_e[k]));
        let _ = write!(text, ",{}", fmt_float(report.energy_drift[k]));
        for series in &report.ls_drift {
            let _ = write!(text, ",{}", fmt_float(series[k]));
        }
        let _ = writeln!(text, ",{}", fmt_float(report.rearrangement_drift[k]));
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_band_limited;
    use tempfile::tempdir;

    #[test]
    fn field_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("w.field");
        let grid = Grid::new(17).unwrap();
        let field = random_band_limited(grid, 17, 5).inverse();
        write_field(&path, &field).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back.grid().n(), 17);
        for (a, b) in field.values().iter().zip(back.values().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn read_rejects_corrupted_files() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("w.field");
        let grid = Grid::new(8).unwrap();
        let field = ScalarField::zeros(grid);
        write_field(&path, &field).unwrap();

        let good = fs::read(&path).unwrap();
        fs::write(&path, &good[..good.len() - 3]).unwrap();
        assert!(matches!(read_field(&path), Err(Error::Format { .. })));

        let mut bad_magic = good.clone();
        bad_magic[0..4].copy_from_slice(b"XXXX");
        fs::write(&path, &bad_magic).unwrap();
        assert!(matches!(read_field(&path), Err(Error::Format { .. })));

        fs::write(&path, &good[..5]).unwrap();
        assert!(matches!(read_field(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn float_rendering_round_trips_exactly() {
        for x in [
            0.0,
            1.0 / 3.0,
            std::f64::consts::PI,
            -2.2250738585072014e-308,
            6.02e23,
            f64::MIN_POSITIVE,
        ] {
            let parsed: f64 = fmt_float(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits(), "{x} did not round-trip");
        }
    }

    #[test]
    fn report_csv_shape_and_reparse() {
        let report = StabilityReport {
            times: vec![0.0, 0.5],
            norms_s: vec![2.0],
            dist_ls: vec![vec![0.1, 1.0 / 3.0]],
            dist_e: vec![0.0, 0.25],
            energy_drift: vec![0.0, 1e-9],
            ls_drift: vec![vec![0.0, 2e-7]],
            rearrangement_drift: vec![0.0, 3e-5],
            delta: 0.1,
            complete: true,
            valid: true,
            config: serde_json::json!({"p": 2.0}),
        };
        let text = render_report(&report);
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# config:"));
        assert!(lines.next().unwrap().starts_with("# note:"));
        assert!(lines.next().unwrap().starts_with("# complete: true"));
        assert!(lines.next().unwrap().starts_with("# valid: true"));
        assert_eq!(
            lines.next().unwrap(),
            "t,dist_L2,dist_E,energy_drift,l2_drift,rearrangement_drift"
        );
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(row.len(), 6);
        // 17-digit rendering reparses exactly
        let row2: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(row2[1].to_bits(), (1.0_f64 / 3.0).to_bits());

        // header-only report for an empty series
        let empty = StabilityReport {
            times: vec![],
            dist_ls: vec![vec![]],
            dist_e: vec![],
            energy_drift: vec![],
            ls_drift: vec![vec![]],
            rearrangement_drift: vec![],
            ..report
        };
        let text = render_report(&empty);
        assert_eq!(text.lines().count(), 5); // 4 comment lines + header row
    }
}
