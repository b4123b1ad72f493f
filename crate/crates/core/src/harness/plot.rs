use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const PLOTDATA_HEADER: &str = "figure_id,series,x,y";

/// One line or bar group of a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub figure_id: String,
    pub series: String,
    pub points: Vec<(f64, f64)>,
}

impl PlotSeries {
    pub fn new(figure_id: &str, series: &str, points: Vec<(f64, f64)>) -> Self {
        PlotSeries { figure_id: figure_id.into(), series: series.into(), points }
    }
}

/// Long-format rows `figure_id,series,x,y`, one per point, in input order.
pub fn emit_plotdata(series: &[PlotSeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Usage("no plot series to emit".into()));
    }
    let mut s = String::from(PLOTDATA_HEADER);
    s.push('\n');
    for p in series {
        if p.figure_id.contains(',') || p.series.contains(',') {
            return Err(Error::Usage(format!("plot labels may not contain commas: {}/{}", p.figure_id, p.series)));
        }
        for (x, y) in &p.points {
            let _ = writeln!(s, "{},{},{x},{y}", p.figure_id, p.series);
        }
    }
    Ok(s)
}
