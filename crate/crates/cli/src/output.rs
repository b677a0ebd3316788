use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};
use serde_json::Value;

use ehyp_core::verify::SampleRecord;

use crate::CliError;

/// Writes floats in `{:.16e}` form (17 significant digits, round-trip exact).
struct FixedFloats;

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// Deterministic JSON text: keys sorted (via `Value`'s ordered maps), floats
/// at 17 significant digits, non-finite floats as `null`.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v: Value = serde_json::to_value(value).map_err(|e| CliError::Other(e.to_string()))?;
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FixedFloats);
    v.serialize(&mut ser).map_err(|e| CliError::Other(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Unwritable(path.display().to_string(), e.to_string()))
}

/// Serializes `value` to `path` deterministically.
pub fn emit_report<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let text = to_json_string(value)?;
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Unwritable(path.display().to_string(), e.to_string()))
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub const GRID_COLUMNS: &[&str] = &[
    "u1",
    "u2",
    "t1",
    "t2",
    "mean_curvature",
    "c_estimate",
    "einstein_constant",
    "lambda1",
    "lambda2",
    "lambda3",
    "lambda4",
    "alpha1",
    "alpha2",
    "alpha3",
    "alpha4",
    "einstein_residual",
    "gauss_equation_residual",
    "gauss_map_rank",
    "leaf_geodesy_residual",
    "xi_parallel_residual",
    "leaf_curvature",
    "holomorphic_curvature",
    "kahler_residual",
    "lambda_gap",
    "min_singular_value",
    "gram_min_eigenvalue",
    "normal_residual",
    "membership_residual",
    "consistency_residual",
];

fn record_row(r: &SampleRecord) -> Vec<String> {
    let mut row = vec![fmt(r.u[0]), fmt(r.u[1]), fmt(r.t[0]), fmt(r.t[1])];
    row.extend([r.mean_curvature, r.c_estimate, r.einstein_constant].map(fmt));
    row.extend(r.lambda.map(fmt));
    row.extend((0..4).map(|i| opt(r.alpha.get(i).copied())));
    row.extend([r.einstein_residual, r.gauss_equation_residual].map(fmt));
    row.push(r.gauss_map_rank.to_string());
    row.extend([r.leaf_geodesy_residual, r.xi_parallel_residual, r.leaf_curvature].map(opt));
    row.push(fmt(r.holomorphic_curvature));
    row.push(opt(r.kahler_residual));
    row.extend(
        [r.lambda_gap, r.min_singular_value, r.gram_min_eigenvalue, r.normal_residual, r.membership_residual, r.consistency_residual].map(fmt),
    );
    row
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
    let bad = |e: &dyn std::fmt::Display| CliError::Unwritable(path.display().to_string(), e.to_string());
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| bad(&e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| bad(&e))?;
    }
    w.flush().map_err(|e| bad(&e))
}

/// One CSV row per accepted sample.
pub fn write_grid_dump(records: &[SampleRecord], path: &Path) -> Result<(), CliError> {
    write_rows(path, GRID_COLUMNS, records.iter().map(record_row))
}

pub(crate) fn write_surface_csv(rows: &[ehyp_core::surface::SurfacePointCheck], path: &Path) -> Result<(), CliError> {
    let width = rows.iter().map(|r| r.residuals.len()).max().unwrap_or(0);
    let mut header: Vec<String> = vec!["u1".into(), "u2".into()];
    header.extend((0..width).map(|i| format!("residual{}", i + 1)));
    header.extend(["legendrian_angle", "dp_rank", "centro_affine_curvature"].map(String::from));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(
        path,
        &header,
        rows.iter().map(|r| {
            let mut row = vec![fmt(r.u[0]), fmt(r.u[1])];
            row.extend((0..width).map(|i| opt(r.residuals.get(i).copied())));
            row.push(opt(r.legendrian_angle));
            row.push(r.dp_rank.map(|k| k.to_string()).unwrap_or_default());
            row.push(opt(r.centro_affine_curvature));
            row
        }),
    )
}
