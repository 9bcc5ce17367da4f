//! CSV ingestion and plot-data emission.

use invp_core::contour::Polyline;
use invp_core::discretization::ConvergenceRow;
use invp_core::estimate::{DensityCurve, DensityGrid2};
use invp_core::Sample;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Read a sample from a file with one numeric value per line.
///
/// A single non-numeric first line is treated as a header and skipped.
/// Decimal parsing is locale independent (the typographic minus U+2212 is
/// accepted as a sign).
pub fn ingest_csv(path: &Path) -> Result<Sample, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim().replace('\u{2212}', "-");
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if idx == 0 && values.is_empty() => continue, // header
            Err(_) => {
                return Err(format!(
                    "{}: unparsable value at line {}",
                    path.display(),
                    idx + 1
                ))
            }
        }
    }
    if values.is_empty() {
        return Err(format!("{}: no numeric data", path.display()));
    }
    Sample::new(values).map_err(|e| format!("{}: {e}", path.display()))
}

/// `t,f_plain,f_star` rows for a one-dimensional density curve.
pub fn render_density_csv(curve: &DensityCurve) -> String {
    let mut out = String::from("t,f_plain,f_star\n");
    for i in 0..curve.grid.len() {
        let _ = writeln!(out, "{},{},{}", curve.grid[i], curve.f_plain[i], curve.f_star[i]);
    }
    out
}

/// `t1,t2,f_plain,f_star` rows for a two-dimensional density grid
/// (row-major over the second axis).
pub fn render_density2_csv(grid: &DensityGrid2) -> String {
    let mut out = String::from("t1,t2,f_plain,f_star\n");
    for (iy, &y) in grid.y.iter().enumerate() {
        for (ix, &x) in grid.x.iter().enumerate() {
            let idx = iy * grid.x.len() + ix;
            let _ = writeln!(out, "{},{},{},{}", x, y, grid.f_plain[idx], grid.f_star[idx]);
        }
    }
    out
}

/// `curve_id,t3,t4` rows; polylines are emitted one after another (closed
/// loops repeat their first point).
pub fn render_contour_csv(curves: &[(&str, &[Polyline])]) -> String {
    let mut out = String::from("curve_id,t3,t4\n");
    for (id, lines) in curves {
        for line in *lines {
            for (x, y) in line {
                let _ = writeln!(out, "{},{},{}", id, x, y);
            }
        }
    }
    out
}

/// `width,p_discrete,p_continuous,gap` rows for the refinement sweep.
pub fn render_convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("width,p_discrete,p_continuous,gap\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.width, r.p_discrete, r.p_continuous, r.gap);
    }
    out
}

/// Read a two-column CSV of `label,value` pairs (no header), for discrete
/// probability functions.
pub fn ingest_pmf_csv(path: &Path) -> Result<Vec<(String, f64)>, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (label, value) = line
            .rsplit_once(',')
            .ok_or_else(|| format!("{}: missing comma at line {}", path.display(), idx + 1))?;
        let v = value
            .trim()
            .replace('\u{2212}', "-")
            .parse::<f64>()
            .map_err(|_| format!("{}: unparsable probability at line {}", path.display(), idx + 1))?;
        pairs.push((label.trim().to_string(), v));
    }
    if pairs.is_empty() {
        return Err(format!("{}: no rows", path.display()));
    }
    Ok(pairs)
}

/// Read a two-column CSV of `from,to` label pairs used as a pushforward map.
pub fn ingest_map_csv(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (from, to) = line
            .split_once(',')
            .ok_or_else(|| format!("{}: missing comma at line {}", path.display(), idx + 1))?;
        pairs.push((from.trim().to_string(), to.trim().to_string()));
    }
    Ok(pairs)
}
