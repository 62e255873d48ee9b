//! Flat CSV form of ruin records, for `simulate` and `estimate`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use taxrisk_core::engine::{Outcome, Ruin, RuinRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub u: f64,
    pub replica: u64,
    pub outcome: String,
    pub tau: Option<f64>,
    pub g: Option<f64>,
    pub undershoot: Option<f64>,
    pub overshoot: Option<f64>,
    pub depth: Option<f64>,
    pub duration: Option<f64>,
    pub tax: Option<f64>,
    pub disc_tax: Option<f64>,
    pub weight: Option<f64>,
    pub first_excursion: Option<bool>,
    pub residual_bound: Option<f64>,
    pub end_time: f64,
    pub events: u64,
    pub approximate: bool,
}

impl RecordRow {
    pub fn new(u: f64, replica: u64, r: &RuinRecord) -> Self {
        let mut row = RecordRow {
            u,
            replica,
            outcome: String::new(),
            tau: None,
            g: None,
            undershoot: None,
            overshoot: None,
            depth: None,
            duration: None,
            tax: None,
            disc_tax: None,
            weight: None,
            first_excursion: None,
            residual_bound: None,
            end_time: r.end_time,
            events: r.events,
            approximate: r.approximate,
        };
        match r.outcome {
            Outcome::Ruined(x) => {
                row.outcome = "ruined".into();
                row.tau = Some(x.tau);
                row.g = Some(x.g);
                row.undershoot = Some(x.undershoot);
                row.overshoot = Some(x.overshoot);
                row.depth = Some(x.depth);
                row.duration = Some(x.duration);
                row.tax = Some(x.tax);
                row.disc_tax = Some(x.disc_tax);
                row.weight = Some(x.weight);
                row.first_excursion = Some(x.first_excursion);
            }
            Outcome::Truncated { residual_bound } => {
                row.outcome = "truncated".into();
                row.residual_bound = residual_bound;
            }
            Outcome::StepLimit => row.outcome = "step_limit".into(),
        }
        row
    }

    pub fn to_record(&self) -> Result<RuinRecord, String> {
        let outcome = match self.outcome.as_str() {
            "ruined" => {
                let need = |v: Option<f64>, name: &str| v.ok_or_else(|| format!("replica {}: missing {name}", self.replica));
                Outcome::Ruined(Ruin {
                    tau: need(self.tau, "tau")?,
                    g: need(self.g, "g")?,
                    undershoot: need(self.undershoot, "undershoot")?,
                    overshoot: need(self.overshoot, "overshoot")?,
                    depth: need(self.depth, "depth")?,
                    duration: need(self.duration, "duration")?,
                    tax: need(self.tax, "tax")?,
                    disc_tax: need(self.disc_tax, "disc_tax")?,
                    weight: need(self.weight, "weight")?,
                    first_excursion: self.first_excursion.unwrap_or(false),
                })
            }
            "truncated" => Outcome::Truncated { residual_bound: self.residual_bound },
            "step_limit" => Outcome::StepLimit,
            other => return Err(format!("replica {}: unknown outcome {other:?}", self.replica)),
        };
        Ok(RuinRecord { outcome, end_time: self.end_time, events: self.events, approximate: self.approximate })
    }
}

pub fn write_rows<W: Write>(w: W, rows: impl IntoIterator<Item = RecordRow>) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> csv::Result<Vec<RecordRow>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use taxrisk_core::engine::{Measure, SimOptions, Simulator};
    use taxrisk_core::{ModelSpec, TaxPolicy};

    #[test]
    fn records_round_trip_through_csv() {
        let m = ModelSpec::cramer_lundberg(1.5, 1.0, 1.0).unwrap();
        let sim = Simulator::new(m, TaxPolicy::constant(0.3).unwrap(), 2.0, Measure::Physical, SimOptions::default()).unwrap();
        let recs = sim.run_batch(200, 3);
        let mut buf = Vec::new();
        write_rows(&mut buf, recs.iter().enumerate().map(|(i, r)| RecordRow::new(2.0, i as u64, r))).unwrap();
        let back: Vec<RuinRecord> = read_rows(&buf[..]).unwrap().iter().map(|r| r.to_record().unwrap()).collect();
        assert_eq!(back, recs);
    }
}
