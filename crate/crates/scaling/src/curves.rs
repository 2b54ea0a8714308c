//! CSV emission of the scaling curves and of regime tables.

use std::io::Write;

use serde::Serialize;

use crate::functions::{f_beta, g_beta, j_beta};
use crate::regimes::RegimeResult;
use crate::ScalingError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub beta: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "J")]
    pub j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub rho: f64,
    pub regime: &'static str,
    pub value_log: f64,
    pub value_sign: f64,
}

impl RegimeRow {
    pub fn new(n: usize, rho: f64, r: &RegimeResult) -> Self {
        RegimeRow { n, rho, regime: r.regime.as_str(), value_log: r.log_value, value_sign: r.sign }
    }
}

/// `F`, `G`, `J` on `points` equally spaced values of `β` in `[lo, hi]`.
pub fn scaling_curve(lo: f64, hi: f64, points: usize) -> Result<Vec<CurveRow>, ScalingError> {
    if points < 2 || !(lo < hi) {
        return Err(ScalingError::Domain(format!("need lo < hi and at least two points (got [{lo}, {hi}], {points})")));
    }
    (0..points)
        .map(|i| {
            let beta = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            Ok(CurveRow { beta, f: f_beta(beta)?, g: g_beta(beta)?, j: j_beta(beta)? })
        })
        .collect()
}

fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_curve_csv<W: Write>(w: W, rows: &[CurveRow]) -> csv::Result<()> {
    write_rows(w, rows)
}

pub fn write_regime_csv<W: Write>(w: W, rows: &[RegimeRow]) -> csv::Result<()> {
    write_rows(w, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_csv_header_and_rows() {
        let rows = scaling_curve(-1.0, 1.0, 3).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "beta,F,G,J");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("0.0,1.0,"));
    }
}
