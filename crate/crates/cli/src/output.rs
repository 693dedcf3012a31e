//! CSV and JSON writers. Numbers are written with 17 significant digits so
//! they parse back to the same `f64`; undefined values are left empty.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use hcsf_core::curves::{
    curvature_profile, enclosed_area, gauss_bonnet_defect, hyperbolic_length, DiscreteCurve,
};
use hcsf_core::front_tracking::StepRecord;
use serde::Serialize;

pub const SNAPSHOT_HEADER: [&str; 5] = ["t", "node_index", "x", "y", "kappa"];
pub const DIAGNOSTICS_HEADER: [&str; 7] = [
    "t",
    "length",
    "area",
    "gb_defect",
    "area_law_residual",
    "min_y",
    "max_kappa",
];
pub const GRID_HEADER: [&str; 3] = ["tau", "phi_index", "value"];

/// `x` with 17 significant digits; empty for `NaN`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.16e}")
    }
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub struct Table {
    w: csv::Writer<BufWriter<File>>,
}

impl Table {
    pub fn create(path: &Path, header: &[&str]) -> io::Result<Self> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(header).map_err(csv_err)?;
        Ok(Table { w })
    }

    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        self.w.write_record(fields).map_err(csv_err)
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.w.flush()
    }
}

/// Appends the nodes of `c` with their curvature as one snapshot block.
pub fn snapshot_rows(t: &mut Table, time: f64, c: &DiscreteCurve) -> io::Result<()> {
    let kappa = curvature_profile(c)
        .map(|f| f.kappa)
        .unwrap_or_else(|_| vec![f64::NAN; c.len()]);
    for (i, (p, k)) in c.nodes().iter().zip(kappa).enumerate() {
        t.row(&[num(time), i.to_string(), num(p.x), num(p.y), num(k)])?;
    }
    Ok(())
}

/// One diagnostics row; fields that do not apply are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub length: f64,
    pub area: f64,
    pub gb_defect: f64,
    pub area_law_residual: f64,
    pub min_y: f64,
    pub max_kappa: f64,
}

impl DiagnosticsRow {
    pub fn fields(&self) -> [String; 7] {
        [
            num(self.t),
            num(self.length),
            num(self.area),
            num(self.gb_defect),
            num(self.area_law_residual),
            num(self.min_y),
            num(self.max_kappa),
        ]
    }

    /// Diagnostics computed from the curve alone. `area0` at `t0` is the
    /// reference for the area law; pass `NaN` to leave it empty.
    pub fn of_curve(t: f64, c: &DiscreteCurve, t0: f64, area0: f64) -> Self {
        let (area, gb_defect) = if c.is_closed() {
            (
                enclosed_area(c).unwrap_or(f64::NAN),
                gauss_bonnet_defect(c).unwrap_or(f64::NAN),
            )
        } else {
            (f64::NAN, f64::NAN)
        };
        let law = (area0 + std::f64::consts::TAU) * (t0 - t).exp() - std::f64::consts::TAU;
        DiagnosticsRow {
            t,
            length: hyperbolic_length(c),
            area,
            gb_defect,
            area_law_residual: area - law,
            min_y: c.min_y(),
            max_kappa: curvature_profile(c)
                .map(|f| f.max_abs_kappa())
                .unwrap_or(f64::NAN),
        }
    }
}

impl From<&StepRecord> for DiagnosticsRow {
    fn from(r: &StepRecord) -> Self {
        DiagnosticsRow {
            t: r.t,
            length: r.length,
            area: r.area,
            gb_defect: r.gb_defect,
            area_law_residual: r.area_law_residual,
            min_y: r.min_y,
            max_kappa: r.max_kappa,
        }
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(io::Error::other)?;
    f.write_all(b"\n")?;
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert_eq!(
                s.split('e').next().unwrap().trim_start_matches('-').len(),
                18
            );
        }
        assert_eq!(num(f64::NAN), "");
    }
}
