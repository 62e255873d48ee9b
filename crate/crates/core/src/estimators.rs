//! Monte Carlo estimators over batches of [`RuinRecord`]s.
//!
//! Every estimator is a ratio `ΣA/ΣB` of per-path quantities (plain means
//! use `B ≡ 1`), with a delta-method standard error. Sums are exact, so
//! merging the moments of two batches gives bit-for-bit the moments of the
//! combined batch.

use alloc::vec::Vec;

use libm::{exp, fabs, sqrt};

use crate::engine::{Measure, Ruin, RuinRecord, Simulator};
use crate::model::ModelSpec;
use crate::sum::ExactSum;
use crate::tax::TaxPolicy;
use crate::{Error, Result};

/// Everything that must agree for two batches to be pooled.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchMeta {
    pub model: ModelSpec,
    pub policy: TaxPolicy,
    pub u: f64,
    pub measure: Measure,
    pub alpha: Option<f64>,
    pub discount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub meta: BatchMeta,
    pub records: Vec<RuinRecord>,
}

impl Batch {
    pub fn new(sim: &Simulator, records: Vec<RuinRecord>) -> Self {
        let meta = BatchMeta {
            model: *sim.model(),
            policy: sim.policy().clone(),
            u: sim.u(),
            measure: sim.measure(),
            alpha: sim.alpha(),
            discount: sim.options().discount,
        };
        Batch { meta, records }
    }

    pub fn merge(mut self, other: Batch) -> Result<Batch> {
        if self.meta != other.meta {
            return Err(Error::MixedBatch);
        }
        self.records.extend(other.records);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ruins(&self) -> impl Iterator<Item = &Ruin> {
        self.records.iter().filter_map(RuinRecord::ruin)
    }

    pub fn ruin_count(&self) -> u64 {
        self.ruins().count() as u64
    }

    /// Paths still alive at the time horizon.
    pub fn truncated(&self) -> u64 {
        self.records.iter().filter(|r| matches!(r.outcome, crate::engine::Outcome::Truncated { .. })).count() as u64
    }

    /// Paths that neither ruined nor were truncated.
    pub fn step_limited(&self) -> u64 {
        self.records.iter().filter(|r| matches!(r.outcome, crate::engine::Outcome::StepLimit)).count() as u64
    }
}

/// Exact running sums of `A`, `B` and their second moments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    a: ExactSum,
    b: ExactSum,
    aa: ExactSum,
    ab: ExactSum,
    bb: ExactSum,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, a: f64, b: f64) {
        self.n += 1;
        self.a.add(a);
        self.b.add(b);
        self.aa.add(a * a);
        self.ab.add(a * b);
        self.bb.add(b * b);
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.a.merge(&other.a);
        self.b.merge(&other.b);
        self.aa.merge(&other.aa);
        self.ab.merge(&other.ab);
        self.bb.merge(&other.bb);
    }

    pub fn sum_a(&self) -> f64 {
        self.a.value()
    }

    pub fn sum_b(&self) -> f64 {
        self.b.value()
    }

    /// `ΣA/ΣB` with delta-method standard error.
    pub fn ratio(&self, kind: Measure) -> Estimate {
        let n = self.n as f64;
        let (sa, sb) = (self.a.value(), self.b.value());
        if self.n == 0 || sb == 0.0 {
            return Estimate::degenerate(0.0, self.n, kind);
        }
        let r = sa / sb;
        let var = if self.n > 1 {
            let s = self.aa.value() - 2.0 * r * self.ab.value() + r * r * self.bb.value();
            s.max(0.0) / (n - 1.0)
        } else {
            0.0
        };
        let stderr = sqrt(var / n) / (sb / n);
        let mut e = Estimate::new(r, stderr, self.n, kind);
        e.ratio = Some(RatioParts { numerator: sa / n, denominator: sb / n });
        e
    }

    /// Plain mean of `A`, ignoring `B`.
    pub fn mean(&self, kind: Measure) -> Estimate {
        let n = self.n as f64;
        if self.n == 0 {
            return Estimate::degenerate(0.0, 0, kind);
        }
        let mean = self.a.value() / n;
        let var = if self.n > 1 {
            let mut centred = self.aa.clone();
            centred.add(-self.a.value() * mean);
            centred.value().max(0.0) / (n - 1.0)
        } else {
            0.0
        };
        Estimate::new(mean, sqrt(var / n), self.n, kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioParts {
    pub numerator: f64,
    pub denominator: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub ci95: (f64, f64),
    pub kind: Measure,
    pub ratio: Option<RatioParts>,
    /// No ruins were observed; mean and stderr carry no information.
    pub degenerate: bool,
}

impl Estimate {
    pub fn new(mean: f64, stderr: f64, n: u64, kind: Measure) -> Self {
        Estimate {
            mean,
            stderr,
            n,
            ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
            kind,
            ratio: None,
            degenerate: false,
        }
    }

    fn degenerate(mean: f64, n: u64, kind: Measure) -> Self {
        Estimate { degenerate: true, ..Estimate::new(mean, 0.0, n, kind) }
    }

    /// The estimate of `k·θ` for a known constant `k > 0`.
    pub fn scaled(&self, k: f64) -> Estimate {
        let mut e = Estimate::new(self.mean * k, self.stderr * fabs(k), self.n, self.kind);
        e.degenerate = self.degenerate;
        e.ratio = self.ratio;
        e
    }

    pub fn relative_stderr(&self) -> f64 {
        self.stderr / fabs(self.mean)
    }

    /// Whether the 95% intervals of the two estimates intersect.
    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci95.0 <= other.ci95.1 && other.ci95.0 <= self.ci95.1
    }
}

/// Per-path contribution `W·1{ruin}`.
fn ruin_weight(r: &RuinRecord) -> f64 {
    r.ruin().map_or(0.0, |x| x.weight)
}

/// Moments of the ruin-probability estimator.
pub fn ruin_moments(batch: &Batch) -> Moments {
    let mut m = Moments::new();
    for r in &batch.records {
        m.push(ruin_weight(r), 1.0);
    }
    m
}

/// `P(τ_u < ∞)`: the ruin frequency under the physical measure, or the mean
/// likelihood ratio under the tilted one (where every path must ruin).
pub fn ruin_prob(batch: &Batch) -> Result<Estimate> {
    let kind = batch.meta.measure;
    if kind.is_weighted() {
        let missing = batch.len() as u64 - batch.ruin_count();
        if missing > 0 {
            return Err(Error::IncompleteTilted(missing));
        }
    }
    let m = ruin_moments(batch);
    if batch.ruin_count() == 0 {
        return Ok(Estimate::degenerate(0.0, m.n, kind));
    }
    Ok(m.mean(kind))
}

/// Moments for `E[G | τ_u < ∞]` as `E[W·G·1{ruin}] / E[W·1{ruin}]`.
pub fn conditional_moments<F: Fn(&Ruin) -> f64>(batch: &Batch, functional: F) -> Moments {
    let mut m = Moments::new();
    for r in &batch.records {
        match r.ruin() {
            Some(x) => m.push(x.weight * functional(x), x.weight),
            None => m.push(0.0, 0.0),
        }
    }
    m
}

pub fn conditional_mean<F: Fn(&Ruin) -> f64>(batch: &Batch, functional: F) -> Result<Estimate> {
    if batch.ruin_count() == 0 {
        return Err(Error::NoRuins);
    }
    Ok(conditional_moments(batch, functional).ratio(batch.meta.measure))
}

/// Penalty parameters `(λ, η, δ)` of the discounted penalty functional
/// `exp(−λ·depth + η·overshoot − δ·duration)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    pub lambda: f64,
    pub eta: f64,
    pub delta: f64,
}

impl Penalty {
    pub fn evaluate(&self, r: &Ruin) -> f64 {
        exp(-self.lambda * r.depth + self.eta * r.overshoot - self.delta * r.duration)
    }

    /// Checks `λ, δ ≥ 0`, `η ≤ α` and `η + λ − α ≠ 0`.
    pub fn check(&self, alpha: f64) -> Result<()> {
        if !(self.lambda >= 0.0 && self.delta >= 0.0) {
            return Err(Error::Parameter { field: "penalty", reason: "lambda and delta must be >= 0" });
        }
        if !(self.eta <= alpha) {
            return Err(Error::Parameter { field: "eta", reason: "must not exceed the Lundberg root" });
        }
        if fabs(self.eta + self.lambda - alpha) <= 1e-9 * alpha {
            return Err(Error::Parameter { field: "eta", reason: "eta + lambda - alpha must be nonzero" });
        }
        Ok(())
    }
}

pub fn edpf(batch: &Batch, penalty: Penalty) -> Result<Estimate> {
    let alpha = batch.meta.alpha.ok_or(Error::NoPositiveRoot { mean: batch.meta.model.mean_increment() })?;
    penalty.check(alpha)?;
    conditional_mean(batch, |r| penalty.evaluate(r))
}

/// Expected discounted tax paid up to ruin, given ruin.
pub fn tax_value(batch: &Batch) -> Result<Estimate> {
    conditional_mean(batch, |r| r.disc_tax)
}

/// Conditional probability that ruin did not happen during the first
/// excursion of the reflected process above height `u`.
pub fn first_excursion_ratio(batch: &Batch) -> Result<Estimate> {
    conditional_mean(batch, |r| if r.first_excursion { 0.0 } else { 1.0 })
}

/// `P̂_a / P̂_b` for two batches driven by the same random streams, so that
/// record `i` of each describes the same underlying path.
pub fn paired_ruin_ratio(a: &Batch, b: &Batch) -> Result<Estimate> {
    if a.len() != b.len() || a.meta.measure != b.meta.measure || a.meta.u != b.meta.u {
        return Err(Error::MixedBatch);
    }
    let (pa, pb) = (ruin_prob(a)?, ruin_prob(b)?);
    if pa.degenerate || pb.degenerate {
        return Err(Error::NoRuins);
    }
    let mut m = Moments::new();
    for (ra, rb) in a.records.iter().zip(&b.records) {
        m.push(ruin_weight(ra), ruin_weight(rb));
    }
    Ok(m.ratio(a.meta.measure))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginal {
    Depth,
    Overshoot,
    Undershoot,
    Duration,
}

impl Marginal {
    pub const ALL: [Marginal; 4] = [Marginal::Depth, Marginal::Overshoot, Marginal::Undershoot, Marginal::Duration];

    pub fn of(self, r: &Ruin) -> f64 {
        match self {
            Marginal::Depth => r.depth,
            Marginal::Overshoot => r.overshoot,
            Marginal::Undershoot => r.undershoot,
            Marginal::Duration => r.duration,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Marginal::Depth => "depth",
            Marginal::Overshoot => "overshoot",
            Marginal::Undershoot => "undershoot",
            Marginal::Duration => "duration",
        }
    }
}

/// Weighted histogram normalised to a density on `[lo, hi]`; mass above `hi`
/// is reported separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub density: Vec<f64>,
    pub mass_above: f64,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.density.len() as f64
    }
}

/// Weighted empirical law of the ruin functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLaw {
    samples: [Vec<(f64, f64)>; 4],
    total_weight: f64,
    /// Weighted mass of `{undershoot < depth}`.
    pub undershoot_below_depth: f64,
    /// Kish effective sample size of the weights.
    pub effective_n: f64,
}

pub const DEFAULT_BINS: usize = 64;

impl JointLaw {
    pub fn from_batch(batch: &Batch) -> Result<Self> {
        if batch.ruin_count() == 0 {
            return Err(Error::NoRuins);
        }
        let ruins: Vec<&Ruin> = batch.ruins().collect();
        let total: ExactSum = ruins.iter().map(|r| r.weight).collect();
        let squares: ExactSum = ruins.iter().map(|r| r.weight * r.weight).collect();
        let total_weight = total.value();
        let below: ExactSum = ruins.iter().filter(|r| r.undershoot < r.depth).map(|r| r.weight).collect();
        let samples = Marginal::ALL.map(|m| {
            let mut v: Vec<(f64, f64)> = ruins.iter().map(|r| (m.of(r), r.weight)).collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        });
        Ok(JointLaw {
            samples,
            total_weight,
            undershoot_below_depth: below.value() / total_weight,
            effective_n: total_weight * total_weight / squares.value(),
        })
    }

    fn sorted(&self, m: Marginal) -> &[(f64, f64)] {
        &self.samples[m as usize]
    }

    pub fn weighted_mean(&self, m: Marginal) -> f64 {
        let s: ExactSum = self.sorted(m).iter().map(|&(v, w)| v * w).collect();
        s.value() / self.total_weight
    }

    /// `bins` equal bins over `[0, 8·mean]`.
    pub fn histogram(&self, m: Marginal, bins: usize) -> Histogram {
        let hi = 8.0 * self.weighted_mean(m);
        let hi = if hi > 0.0 { hi } else { 1.0 };
        let width = hi / bins as f64;
        let mut mass = alloc::vec![0.0; bins];
        let mut above = 0.0;
        for &(v, w) in self.sorted(m) {
            let k = (v / width) as usize;
            if v >= hi {
                above += w;
            } else {
                mass[k.min(bins - 1)] += w;
            }
        }
        let density = mass.iter().map(|&x| x / (self.total_weight * width)).collect();
        Histogram { lo: 0.0, hi, density, mass_above: above / self.total_weight }
    }

    /// Kolmogorov–Smirnov distance between the weighted empirical CDF and `cdf`.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, m: Marginal, cdf: F) -> f64 {
        let xs = self.sorted(m);
        let mut acc = 0.0;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < xs.len() {
            let v = xs[i].0;
            let f = cdf(v);
            let before = acc / self.total_weight;
            while i < xs.len() && xs[i].0 == v {
                acc += xs[i].1;
                i += 1;
            }
            let after = acc / self.total_weight;
            d = d.max(fabs(before - f)).max(fabs(after - f));
        }
        d
    }
}
