//! Validation reports: JSON document, CSV table, histogram tables.

use std::io::Write;

use serde::{Serialize, Serializer};

use crate::config::ExperimentConfig;

pub const SCHEMA: &str = "taxrisk-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Reported without a pass rule.
    Info,
    /// The predicted limit is infinite; judged by the trend instead.
    Divergent,
    /// The quantity could not be computed at this level.
    Error,
}

/// Finite numbers as JSON numbers, infinities as `"inf"`/`"-inf"`, NaN as null.
fn ser_num<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_finite() => s.serialize_f64(*x),
        Some(x) if x.is_infinite() => s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" }),
        _ => s.serialize_none(),
    }
}

fn ser_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    ser_num(&Some(*v), s)
}

/// Shortest round-trip decimal; empty for a missing value.
pub fn fmt_num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_nan() => String::from("nan"),
        Some(x) if x.is_infinite() => String::from(if x > 0.0 { "inf" } else { "-inf" }),
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub u: f64,
    pub quantity: String,
    #[serde(serialize_with = "ser_num")]
    pub predicted: Option<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub estimate: f64,
    #[serde(serialize_with = "ser_num")]
    pub stderr: Option<f64>,
    pub n: u64,
    #[serde(serialize_with = "ser_num")]
    pub z: Option<f64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Monotonicity of one quantity across the level grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trend {
    pub quantity: String,
    pub direction: Direction,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub estimator: &'static str,
    #[serde(serialize_with = "ser_num")]
    pub alpha: Option<f64>,
    pub approximate: bool,
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub trends: Vec<Trend>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl Report {
    pub fn rows_for<'a>(&'a self, quantity: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.quantity == quantity)
    }

    pub fn row(&self, u: f64, quantity: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.u == u && r.quantity == quantity)
    }

    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.status == Status::Error)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub const CSV_HEADER: [&'static str; 7] = ["u", "quantity", "predicted", "estimate", "stderr", "n", "z"];

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::CSV_HEADER)?;
        for r in &self.rows {
            out.write_record([
                fmt_num(Some(r.u)),
                r.quantity.clone(),
                fmt_num(r.predicted),
                fmt_num(Some(r.estimate)),
                fmt_num(r.stderr),
                r.n.to_string(),
                fmt_num(r.z),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory csv");
        String::from_utf8(buf).expect("utf-8")
    }
}

/// One marginal of the joint law at one level, with the limiting density
/// where it is known.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramTable {
    pub u: f64,
    pub marginal: &'static str,
    pub lo: f64,
    pub width: f64,
    pub density: Vec<f64>,
    pub reference: Option<Vec<f64>>,
    pub mass_above: f64,
}

impl HistogramTable {
    pub fn file_name(&self) -> String {
        format!("hist_u{}_{}.csv", fmt_num(Some(self.u)), self.marginal)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["lo", "hi", "density", "reference"])?;
        for (i, d) in self.density.iter().enumerate() {
            let lo = self.lo + i as f64 * self.width;
            let reference = self.reference.as_ref().map(|r| r[i]);
            out.write_record([fmt_num(Some(lo)), fmt_num(Some(lo + self.width)), fmt_num(Some(*d)), fmt_num(reference)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Wall-clock figures, kept out of the report so reports stay reproducible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub workers: usize,
    pub total_seconds: f64,
    pub per_level: Vec<LevelTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelTiming {
    pub u: f64,
    pub seconds: f64,
    pub paths: u64,
}

impl Timing {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("timing serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_format_for_csv() {
        assert_eq!(fmt_num(Some(0.1)), "0.1");
        assert_eq!(fmt_num(Some(f64::INFINITY)), "inf");
        assert_eq!(fmt_num(None), "");
        assert_eq!(fmt_num(Some(2.0)), "2");
    }

    #[test]
    fn infinite_prediction_serializes_as_string() {
        let row = Row {
            u: 5.0,
            quantity: "ruin_constant".into(),
            predicted: Some(f64::INFINITY),
            estimate: 1.5,
            stderr: Some(0.1),
            n: 100,
            z: None,
            status: Status::Divergent,
            formula: None,
            note: None,
        };
        let v = serde_json::to_value(&row).unwrap();
        assert_eq!(v["predicted"], "inf");
        assert!(v["z"].is_null());
        assert_eq!(v["status"], "divergent");
    }
}
