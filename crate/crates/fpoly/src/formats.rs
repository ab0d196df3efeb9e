//! CSV and JSON writers plus the observation reader.
//!
//! CSV output uses `.` decimals, no thousands separators and LF endings;
//! floats print in shortest round-trip form so files are byte-stable.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use fpoly_core::densities::TargetDensity;
use fpoly_core::estimator::{fp_evaluate, histogram, sigma_kernel, BinCounts};
use fpoly_core::experiments::SweepTable;
use fpoly_core::fields::FieldSample;
use fpoly_core::mixing::Lemma1Table;

use crate::error::CliError;

/// Writes `content` to `path`, creating parent directories.
pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    std::fs::write(path, content).map_err(|e| CliError::io(path, e))
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

/// `i1,...,id,value`, one row per site in region order.
pub fn field_csv(sample: &FieldSample) -> String {
    let d = sample.region.dim();
    let mut out = String::new();
    for n in 1..=d {
        let _ = write!(out, "i{n},");
    }
    out.push_str("value\n");
    for (site, v) in sample.region.iter().zip(&sample.values) {
        for c in site {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{v}");
    }
    out
}

/// `k,left_edge,count,histogram_height` over the occupied bin range.
pub fn histogram_csv(counts: &BinCounts) -> String {
    let mut out = String::from("k,left_edge,count,histogram_height\n");
    for row in histogram(counts) {
        let _ = writeln!(out, "{},{},{},{}", row.k, row.left_edge, row.count, row.height);
    }
    out
}

/// Grid abscissae `j b / points_per_bin` covering both `[min - b, max + b]`
/// and the whole support of the polygon.
pub fn polygon_grid(counts: &BinCounts, min: f64, max: f64, points_per_bin: u32) -> Vec<f64> {
    let b = counts.grid().bin_width();
    let (lo_k, hi_k) = counts.range();
    let lo = (min - b).min((lo_k as f64 - 1.5) * b);
    let hi = (max + b).max((hi_k as f64 + 0.5) * b);
    let ppb = f64::from(points_per_bin);
    let j0 = (lo / b * ppb).floor() as i64;
    let j1 = (hi / b * ppb).ceil() as i64;
    (j0..=j1).map(|j| j as f64 * b / ppb).collect()
}

/// `x,fp_value[,fn_value]`; `fn_value` is empty where the density vanishes.
pub fn polygon_csv(counts: &BinCounts, grid: &[f64], density: Option<&TargetDensity>) -> Result<String, CliError> {
    let mut out = String::from(if density.is_some() { "x,fp_value,fn_value\n" } else { "x,fp_value\n" });
    for &x in grid {
        let fp = fp_evaluate(counts, x)?;
        match density {
            None => {
                let _ = writeln!(out, "{x},{fp}");
            }
            Some(f) => {
                let fx = f.pdf(x);
                if fx > 0.0 {
                    let s = sigma_kernel(x, counts.grid(), fx)?;
                    let _ = writeln!(out, "{x},{fp},{}", fp / s.value.sqrt());
                } else {
                    let _ = writeln!(out, "{x},{fp},");
                }
            }
        }
    }
    Ok(out)
}

/// One row per replicate, one column per evaluation point.
pub fn statistics_csv(eval_points: &[f64], rows: &[Vec<f64>]) -> String {
    let mut out = String::from("replicate");
    for x in eval_points {
        let _ = write!(out, ",x={x}");
    }
    out.push('\n');
    for (r, row) in rows.iter().enumerate() {
        let _ = write!(out, "{r}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn lemma1_csv(table: &Lemma1Table) -> String {
    let mut out = String::from("b,v,m,m_pow_d_times_b,tail_ratio\n");
    for r in &table.rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.b, r.v, r.m, r.volume_ratio, r.tail_ratio);
    }
    out
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("side,region_size,bin_width,lambda_b,point,scaled_variance,ks_p_value,oracle_ratio\n");
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in &table.rows {
        for (j, sv) in r.scaled_variance.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.side,
                r.region_size,
                r.bin_width,
                r.lambda_b,
                j,
                sv,
                opt(r.ks_p_value[j]),
                opt(r.oracle_ratio[j])
            );
        }
    }
    out
}

/// Observations from the last column of a CSV file. A non-numeric first
/// line is taken as a header; blank lines are skipped.
pub fn read_observations(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_observations(&text)
}

pub fn parse_observations(text: &str) -> Result<Vec<f64>, CliError> {
    let mut values = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => return Err(CliError::Input(format!("line {}: non-finite value {v}", n + 1))),
            Err(_) if n == 0 => {}
            Err(_) => {
                return Err(CliError::Input(format!("line {}: non-numeric value {field:?}", n + 1)));
            }
        }
    }
    if values.is_empty() {
        return Err(CliError::Input("no observations in input".into()));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpoly_core::estimator::bin_counts;
    use fpoly_core::grid::BinGrid;

    #[test]
    fn observation_parsing() {
        assert_eq!(parse_observations("value\n1\n2.5\n\n3\n").unwrap(), [1.0, 2.5, 3.0]);
        assert_eq!(parse_observations("0,0,1.5\n0,1,2\n").unwrap(), [1.5, 2.0]);
        let err = parse_observations("x\n1\nfoo\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(parse_observations("x\n").is_err());
        assert!(parse_observations("").is_err());
    }

    #[test]
    fn grid_covers_polygon_support() {
        let c = bin_counts(&[0.5], &BinGrid::new(1.0).unwrap()).unwrap();
        let g = polygon_grid(&c, 0.5, 0.5, 4);
        assert_eq!(g.first(), Some(&-0.5));
        assert_eq!(g.last(), Some(&1.5));
        assert_eq!(g.len(), 9);
    }
}
