//! The validation pipeline: simulate each level, estimate, compare with the
//! large-`u` predictions.

use std::time::Instant;

use taxrisk_core::asymptotics::{
    predict_edpf, predict_ruin_constant, predict_ruin_ratio, predict_tax_value, JointDensity, Prediction,
};
use taxrisk_core::engine::{Measure, RuinRecord, SimOptions, Simulator};
use taxrisk_core::estimators::{
    edpf, first_excursion_ratio, paired_ruin_ratio, ruin_prob, tax_value, Batch, Estimate, JointLaw, Marginal,
    DEFAULT_BINS,
};
use taxrisk_core::{ModelSpec, TaxPolicy};

use crate::config::{ExperimentConfig, Output};
use crate::report::{Direction, HistogramTable, LevelTiming, Report, Row, Status, Timing, Trend, SCHEMA};
use crate::runner::{batch_seed, Runner};

/// Pre-registered limits for the joint-law distances.
pub const KS_OVERSHOOT_MAX: f64 = 0.02;
pub const KS_DEPTH_MAX: f64 = 0.03;
pub const BELOW_DEPTH_MAX: f64 = 0.005;

const ROLE_MAIN: u64 = 0;

pub struct RunOutput {
    pub report: Report,
    pub histograms: Vec<HistogramTable>,
    pub timing: Timing,
}

struct Predictions {
    constant: Result<Prediction, String>,
    ratio: Option<Result<Prediction, String>>,
    edpf: Result<Prediction, String>,
    tax: Result<Prediction, String>,
}

fn describe<T>(r: taxrisk_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

impl Predictions {
    fn new(config: &ExperimentConfig, model: &ModelSpec, policy: &TaxPolicy) -> Self {
        let ratio = match *policy {
            TaxPolicy::Constant { gamma } => Some(describe(predict_ruin_ratio(model, gamma))),
            _ => None,
        };
        Predictions {
            constant: describe(predict_ruin_constant(model, policy)),
            ratio,
            edpf: describe(predict_edpf(model, config.penalty.into())),
            tax: describe(predict_tax_value(model, policy, config.discount)),
        }
    }
}

struct Judge<'a> {
    config: &'a ExperimentConfig,
}

impl Judge<'_> {
    fn row(&self, u: f64, quantity: &str, est: &Estimate, pred: Option<&Prediction>) -> Row {
        let mut row = Row {
            u,
            quantity: quantity.to_string(),
            predicted: pred.map(|p| p.value),
            estimate: est.mean,
            stderr: Some(est.stderr),
            n: est.n,
            z: None,
            status: Status::Info,
            formula: pred.map(|p| p.formula.as_str().to_string()),
            note: None,
        };
        if est.degenerate {
            row.note = Some("no ruins observed".into());
            return row;
        }
        let Some(p) = pred else { return row };
        if !p.finite {
            row.status = Status::Divergent;
            row.note = Some(format!("limit is infinite; finite iff {}", p.condition));
            return row;
        }
        let diff = est.mean - p.value;
        if est.stderr > 0.0 {
            row.z = Some(diff / est.stderr);
        }
        let rel = self.config.check.rel.get(quantity).copied().unwrap_or(0.0);
        // the floor only absorbs rounding in exact cases (zero stderr)
        let slack = self.config.check.abs.max(rel * p.value.abs()).max(self.config.check.k * est.stderr).max(1e-12 * p.value.abs());
        row.status = if diff.abs() <= slack { Status::Pass } else { Status::Fail };
        row
    }

    fn bound(&self, u: f64, quantity: &str, value: f64, max: f64, n: u64) -> Row {
        Row {
            u,
            quantity: quantity.to_string(),
            predicted: Some(0.0),
            estimate: value,
            stderr: None,
            n,
            z: None,
            status: if value < max { Status::Pass } else { Status::Fail },
            formula: None,
            note: Some(format!("pass below {max}")),
        }
    }

    fn error(&self, u: f64, quantity: &str, message: String) -> Row {
        Row {
            u,
            quantity: quantity.to_string(),
            predicted: None,
            estimate: f64::NAN,
            stderr: None,
            n: 0,
            z: None,
            status: Status::Error,
            formula: None,
            note: Some(message),
        }
    }
}

fn with_prediction(p: &Result<Prediction, String>, notes: &mut Vec<String>, what: &str) -> Option<Prediction> {
    match p {
        Ok(p) => Some(p.clone()),
        Err(e) => {
            let msg = format!("{what}: no prediction ({e})");
            if !notes.contains(&msg) {
                notes.push(msg);
            }
            None
        }
    }
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    model: ModelSpec,
    policy: TaxPolicy,
    measure: Measure,
    options: SimOptions,
    preds: Predictions,
    joint: Option<JointDensity>,
}

#[derive(Default)]
struct Collected {
    rows: Vec<Row>,
    notes: Vec<String>,
    histograms: Vec<HistogramTable>,
    per_level: Vec<LevelTiming>,
    alpha: Option<f64>,
    approximate: bool,
}

impl<'a> Context<'a> {
    fn new(config: &'a ExperimentConfig) -> Self {
        let model = config.model_spec();
        let policy = config.tax_policy();
        Context {
            config,
            model,
            measure: config.measure(),
            options: config.sim_options(),
            preds: Predictions::new(config, &model, &policy),
            joint: JointDensity::new(&model).ok(),
            policy,
        }
    }

    fn simulator(&self, u: f64, policy: TaxPolicy) -> taxrisk_core::Result<Simulator> {
        Simulator::new(self.model, policy, u, self.measure, self.options)
    }

    /// Rows for one level from its batch and, for the ratio, the untaxed
    /// batch on the same streams.
    fn level(&self, out: &mut Collected, u: f64, batch: &Batch, untaxed: Option<&Batch>) {
        let judge = Judge { config: self.config };
        let config = self.config;
        let (rows, notes) = (&mut out.rows, &mut out.notes);
        out.alpha = batch.meta.alpha;
        out.approximate |= batch.records.iter().any(|r| r.approximate);
        if batch.truncated() > 0 {
            notes.push(format!("u={u}: {} paths alive at the horizon, counted as survivors", batch.truncated()));
        }
        if batch.step_limited() > 0 {
            notes.push(format!("u={u}: {} paths hit the event limit", batch.step_limited()));
        }
        if config.wants(Output::Ruin) {
            ruin_rows(&judge, rows, notes, batch, &self.policy, &self.preds, u);
        }
        if config.wants(Output::Ratio) {
            match (&self.preds.ratio, untaxed) {
                (None, _) => push_note(notes, "ruin_ratio: needs a constant-rate policy".into()),
                (Some(_), None) => push_note(notes, "ruin_ratio: needs the untaxed companion batch".into()),
                (Some(pred), Some(base)) => {
                    let pred = with_prediction(pred, notes, "ruin_ratio");
                    match paired_ruin_ratio(batch, base) {
                        Ok(e) => rows.push(judge.row(u, "ruin_ratio", &e, pred.as_ref())),
                        Err(e) => rows.push(judge.error(u, "ruin_ratio", e.to_string())),
                    }
                }
            }
        }
        if config.wants(Output::Edpf) {
            let pred = with_prediction(&self.preds.edpf, notes, "edpf");
            match edpf(batch, config.penalty.into()) {
                Ok(e) => rows.push(judge.row(u, "edpf", &e, pred.as_ref())),
                Err(e) => rows.push(judge.error(u, "edpf", e.to_string())),
            }
        }
        if config.wants(Output::Tax) {
            let pred = with_prediction(&self.preds.tax, notes, "tax_value");
            match tax_value(batch) {
                Ok(e) => rows.push(judge.row(u, "tax_value", &e, pred.as_ref())),
                Err(e) => rows.push(judge.error(u, "tax_value", e.to_string())),
            }
        }
        if config.wants(Output::Joint) {
            match (&self.joint, JointLaw::from_batch(batch)) {
                (None, _) => push_note(notes, "joint: limit law available for exponential claims only".into()),
                (Some(_), Err(e)) => rows.push(judge.error(u, "joint", e.to_string())),
                (Some(j), Ok(law)) => {
                    let n = batch.ruin_count();
                    let ks_o = law.ks_distance(Marginal::Overshoot, |x| j.overshoot_cdf(x));
                    let ks_d = law.ks_distance(Marginal::Depth, |y| j.depth_cdf(y));
                    rows.push(judge.bound(u, "ks_overshoot", ks_o, KS_OVERSHOOT_MAX, n));
                    rows.push(judge.bound(u, "ks_depth", ks_d, KS_DEPTH_MAX, n));
                    rows.push(judge.bound(u, "undershoot_below_depth", law.undershoot_below_depth, BELOW_DEPTH_MAX, n));
                    if config.histograms {
                        out.histograms.extend(histogram_tables(&law, j, u));
                    }
                }
            }
        }
        if config.wants(Output::Diagnostic) {
            match first_excursion_ratio(batch) {
                Ok(e) => {
                    let mut row = judge.row(u, "first_excursion_ratio", &e, None);
                    row.predicted = Some(0.0);
                    rows.push(row);
                }
                Err(e) => rows.push(judge.error(u, "first_excursion_ratio", e.to_string())),
            }
        }
    }

    fn finish(self, out: Collected, workers: usize, started: Instant) -> RunOutput {
        let trends = trends(&out.rows, self.config.u.len());
        let passed = out.rows.iter().all(|r| !matches!(r.status, Status::Fail | Status::Error))
            && trends.iter().all(|t| t.holds);
        let report = Report {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.config.seed.0,
            estimator: self.measure.as_str(),
            alpha: out.alpha,
            approximate: out.approximate,
            config: self.config.clone(),
            rows: out.rows,
            trends,
            notes: out.notes,
            passed,
        };
        let timing = Timing { workers, total_seconds: started.elapsed().as_secs_f64(), per_level: out.per_level };
        RunOutput { report, histograms: out.histograms, timing }
    }
}

/// Runs every level of `config` and assembles the report.
pub fn run_experiment(config: &ExperimentConfig, runner: &Runner) -> RunOutput {
    let started = Instant::now();
    let ctx = Context::new(config);
    let mut out = Collected::default();
    let wants_ratio = config.wants(Output::Ratio) && ctx.preds.ratio.is_some();
    for &u in &config.u {
        let level_start = Instant::now();
        let seed = batch_seed(config.seed.0, u, ROLE_MAIN);
        let sim = match ctx.simulator(u, ctx.policy.clone()) {
            Ok(s) => s,
            Err(e) => {
                out.rows.push(Judge { config }.error(u, "simulation", e.to_string()));
                continue;
            }
        };
        let batch = runner.batch(&sim, config.n, seed);
        let mut paths = config.n;
        let untaxed = if wants_ratio {
            let base = ctx.simulator(u, TaxPolicy::constant(0.0).expect("zero rate")).expect("same model and level");
            paths += config.n;
            Some(runner.batch(&base, config.n, seed))
        } else {
            None
        };
        ctx.level(&mut out, u, &batch, untaxed.as_ref());
        out.per_level.push(LevelTiming { u, seconds: level_start.elapsed().as_secs_f64(), paths });
    }
    ctx.finish(out, runner.workers(), started)
}

/// Estimates from stored records, grouped by level. The ratio is skipped
/// since stored records carry no untaxed companion.
pub fn estimate_records(config: &ExperimentConfig, levels: Vec<(f64, Vec<RuinRecord>)>) -> RunOutput {
    let started = Instant::now();
    let ctx = Context::new(config);
    let mut out = Collected::default();
    for (u, records) in levels {
        let level_start = Instant::now();
        match ctx.simulator(u, ctx.policy.clone()) {
            Ok(sim) => {
                let paths = records.len() as u64;
                ctx.level(&mut out, u, &Batch::new(&sim, records), None);
                out.per_level.push(LevelTiming { u, seconds: level_start.elapsed().as_secs_f64(), paths });
            }
            Err(e) => out.rows.push(Judge { config }.error(u, "simulation", e.to_string())),
        }
    }
    ctx.finish(out, 1, started)
}

fn push_note(notes: &mut Vec<String>, msg: String) {
    if !notes.contains(&msg) {
        notes.push(msg);
    }
}

fn ruin_rows(
    judge: &Judge,
    rows: &mut Vec<Row>,
    notes: &mut Vec<String>,
    batch: &Batch,
    policy: &TaxPolicy,
    preds: &Predictions,
    u: f64,
) {
    let est = match ruin_prob(batch) {
        Ok(e) => e,
        Err(e) => {
            rows.push(judge.error(u, "ruin_probability", e.to_string()));
            return;
        }
    };
    if policy.is_full() {
        let mut row = judge.row(u, "ruin_probability", &est, None);
        row.note = Some("reflected case: P(ruin)=1, no Cramér comparison".into());
        rows.push(row);
        return;
    }
    let constant = with_prediction(&preds.constant, notes, "ruin_constant");
    let Some(alpha) = batch.meta.alpha else {
        rows.push(judge.row(u, "ruin_probability", &est, None));
        return;
    };
    let scale = (alpha * u).exp();
    let prob_pred = constant.as_ref().map(|c| Prediction { value: c.value / scale, ..c.clone() });
    rows.push(judge.row(u, "ruin_probability", &est, prob_pred.as_ref()));
    rows.push(judge.row(u, "ruin_constant", &est.scaled(scale), constant.as_ref()));
}

fn histogram_tables(law: &JointLaw, j: &JointDensity, u: f64) -> Vec<HistogramTable> {
    Marginal::ALL
        .iter()
        .map(|&m| {
            let h = law.histogram(m, DEFAULT_BINS);
            let width = h.bin_width();
            let reference: Option<Vec<f64>> = match m {
                Marginal::Duration => None,
                _ => Some(
                    (0..h.density.len())
                        .map(|i| {
                            let x = h.lo + (i as f64 + 0.5) * width;
                            match m {
                                Marginal::Depth => j.depth_density(x),
                                Marginal::Overshoot => j.overshoot_density(x),
                                _ => j.undershoot_density(x),
                            }
                        })
                        .collect(),
                ),
            };
            HistogramTable { u, marginal: m.as_str(), lo: h.lo, width, density: h.density, reference, mass_above: h.mass_above }
        })
        .collect()
}

fn trends(rows: &[Row], levels: usize) -> Vec<Trend> {
    let mut out = Vec::new();
    if levels < 2 {
        return out;
    }
    let series = |q: &str| -> Vec<&Row> { rows.iter().filter(|r| r.quantity == q).collect() };
    let constant = series("ruin_constant");
    if constant.len() >= 2 && constant.iter().all(|r| r.status == Status::Divergent) {
        let holds = constant.windows(2).all(|w| w[1].estimate > w[0].estimate);
        out.push(Trend { quantity: "ruin_constant".into(), direction: Direction::Increasing, holds });
    }
    let fe = series("first_excursion_ratio");
    if fe.len() >= 2 {
        let holds = fe.windows(2).all(|w| w[1].estimate < w[0].estimate);
        out.push(Trend { quantity: "first_excursion_ratio".into(), direction: Direction::Decreasing, holds });
    }
    out
}
