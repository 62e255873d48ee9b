//! Event-driven simulation of the taxed surplus `R^Γ = X + ∫Γ d|X̲|`.
//!
//! For the compound Poisson models `X` is linear between jumps, so every
//! quantity is advanced exactly. Each drift stretch is split at the instant
//! `X` returns to its running minimum; from then on the minimum descends with
//! `X` and tax accrues. The Brownian model uses a fixed grid instead
//! ([`brownian`]); its records are flagged approximate.

pub mod brownian;
pub mod event;
pub mod source;
pub mod switched;

use alloc::vec::Vec;

use libm::{exp, log};

pub use event::{Event, EventKind, EventSink, NoEvents};
pub use source::{replica_rng, JumpSource, RandomJumps, ScriptedJumps};
pub use switched::{SwitchGrid, SwitchPlan};

use rand::Rng;
use switched::PassageLog;

use crate::model::{ModelSpec, Upsilon};
use crate::tax::TaxPolicy;
use crate::{Error, Result};

/// Probability measure the paths are drawn under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// The original dynamics.
    Physical,
    /// The Esscher-tilted dynamics `dQ = e^{αX_t} dP`, under which every
    /// path is ruined. Records carry the likelihood ratio `e^{−αX_τ}`.
    Tilted,
    /// A mixture of tilts that switch on once the running minimum passes a
    /// random depth (see [`switched`]). Every path is ruined.
    Switched,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Physical => "crude",
            Measure::Tilted => "tilted",
            Measure::Switched => "switched",
        }
    }

    /// Whether records carry likelihood ratios and every path must ruin.
    pub fn is_weighted(self) -> bool {
        self != Measure::Physical
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Discount rate for the discounted tax.
    pub discount: f64,
    /// Physical-measure paths stop once the taxed level drops below
    /// `−truncation`. `None` picks `ln(1000)/α`.
    pub truncation: Option<f64>,
    /// Upper bound on jumps (or grid steps) per path.
    pub max_events: u64,
    /// Grid step for the Brownian model.
    pub bm_step: f64,
    /// Switching depths for [`Measure::Switched`].
    pub switch: SwitchPlan,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { discount: 0.0, truncation: None, max_events: 50_000_000, bm_step: 1e-3, switch: SwitchPlan::default() }
    }
}

/// Path functionals at the ruin time `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ruin {
    pub tau: f64,
    /// Last time before `τ` at which `R^Γ` sat at its running maximum.
    pub g: f64,
    /// `u − R^Γ_{τ−}`.
    pub undershoot: f64,
    /// `R^Γ_τ − u`.
    pub overshoot: f64,
    /// `u − max_{s<τ} R^Γ_s`.
    pub depth: f64,
    /// `τ − g`.
    pub duration: f64,
    pub tax: f64,
    pub disc_tax: f64,
    /// Likelihood ratio `dP/dQ` on the path; one under the physical measure.
    pub weight: f64,
    /// Ruin happened during the first excursion of `X − X̲` above height `u`.
    pub first_excursion: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Ruined(Ruin),
    /// Stopped without ruin. `residual_bound` bounds the probability of a
    /// later ruin when one is available.
    Truncated { residual_bound: Option<f64> },
    StepLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuinRecord {
    pub outcome: Outcome,
    pub end_time: f64,
    pub events: u64,
    /// Produced by the Brownian grid rather than exact simulation.
    pub approximate: bool,
}

impl RuinRecord {
    pub fn ruin(&self) -> Option<&Ruin> {
        match &self.outcome {
            Outcome::Ruined(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_ruined(&self) -> bool {
        matches!(self.outcome, Outcome::Ruined(_))
    }
}

/// Everything needed to simulate one `(model, policy, u, measure)` cell.
#[derive(Debug, Clone)]
pub struct Simulator {
    model: ModelSpec,
    dynamics: ModelSpec,
    policy: TaxPolicy,
    u: f64,
    measure: Measure,
    alpha: Option<f64>,
    truncation: f64,
    residual_constant: Option<f64>,
    grid: Option<SwitchGrid>,
    options: SimOptions,
}

impl Simulator {
    pub fn new(model: ModelSpec, policy: TaxPolicy, u: f64, measure: Measure, options: SimOptions) -> Result<Self> {
        model.validate()?;
        policy.validate()?;
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::Parameter { field: "u", reason: "must be finite and > 0" });
        }
        if !(options.discount >= 0.0 && options.discount.is_finite()) {
            return Err(Error::Parameter { field: "discount", reason: "must be finite and >= 0" });
        }
        if !(options.bm_step > 0.0) {
            return Err(Error::Parameter { field: "bm_step", reason: "must be > 0" });
        }
        let alpha = model.lundberg_root().ok();
        let dynamics = match measure {
            Measure::Physical => model,
            Measure::Tilted | Measure::Switched => {
                let a = alpha.ok_or(Error::NoPositiveRoot { mean: model.mean_increment() })?;
                model.esscher_tilt(a)?
            }
        };
        let grid = match measure {
            Measure::Switched if !model.has_jumps() => {
                return Err(Error::UnsupportedModel("switched sampling needs a jump model"));
            }
            Measure::Switched => {
                let plan = options.switch;
                if !(plan.tilt_mass > 0.0 && plan.tilt_mass <= 1.0 && plan.min_depth > 0.0 && plan.max_depth >= plan.min_depth) {
                    return Err(Error::Parameter { field: "switch", reason: "invalid depth grid" });
                }
                alpha.map(|a| SwitchGrid::new(&plan, a))
            }
            _ => None,
        };
        let truncation = match (options.truncation, alpha) {
            (Some(t), _) if t > 0.0 => t,
            (Some(_), _) => return Err(Error::Parameter { field: "truncation", reason: "must be > 0" }),
            (None, Some(a)) => log(1000.0) / a,
            (None, None) => f64::INFINITY,
        };
        // R^Γ is dominated by the constant-rate process at the supremum rate,
        // whose ruin constant is Υ/(1 − γ̄) for the models with Υ known.
        let residual_constant = match (model.cramer_upsilon(), policy.bounded_away_from_one(), alpha) {
            (Upsilon::Exact(y), true, Some(_)) => Some(y / (1.0 - policy.sup_rate())),
            _ => None,
        };
        Ok(Simulator { model, dynamics, policy, u, measure, alpha, truncation, residual_constant, grid, options })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    /// Model actually simulated (the tilted one under [`Measure::Tilted`]).
    pub fn dynamics(&self) -> &ModelSpec {
        &self.dynamics
    }

    pub fn policy(&self) -> &TaxPolicy {
        &self.policy
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn options(&self) -> &SimOptions {
        &self.options
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// Replica `replica` of a batch seeded with `seed`.
    pub fn run_replica(&self, seed: u64, replica: u64) -> RuinRecord {
        self.run_replica_logged(seed, replica, &mut NoEvents)
    }

    pub fn run_replica_logged<S: EventSink>(&self, seed: u64, replica: u64, sink: &mut S) -> RuinRecord {
        let mut rng = replica_rng(seed, replica);
        if let Some(grid) = &self.grid {
            // the mixture component is the first draw of the stream
            let k = grid.pick(rng.random());
            let depth = grid.depths[k];
            let start = if depth == 0.0 { &self.dynamics } else { &self.model };
            let mut source = RandomJumps::new(start, rng);
            self.run_jumps(&mut source, sink, Some(depth))
        } else if self.dynamics.has_jumps() {
            self.run_with_source(&mut RandomJumps::new(&self.dynamics, rng), sink)
        } else {
            brownian::bm_step_path(self, rng, sink)
        }
    }

    /// `n` replicas in order; identical to running them one at a time.
    pub fn run_batch(&self, n: u64, seed: u64) -> Vec<RuinRecord> {
        (0..n).map(|i| self.run_replica(seed, i)).collect()
    }

    fn weight(&self, x: f64) -> f64 {
        match (self.measure, self.alpha) {
            (Measure::Tilted, Some(a)) => exp(-a * x),
            _ => 1.0,
        }
    }

    pub fn switch_grid(&self) -> Option<&SwitchGrid> {
        self.grid.as_ref()
    }

    fn truncated(&self, rg: f64) -> Outcome {
        let residual_bound = match self.alpha {
            Some(a) => self.residual_constant.map(|k| (k * exp(-a * (self.u - rg))).min(1.0)),
            None => Some(0.0),
        };
        Outcome::Truncated { residual_bound }
    }

    /// Simulates one path of a jump model with arrivals from `source`.
    ///
    /// Under [`Measure::Switched`] this runs the undelayed component; the
    /// source must already follow the tilted dynamics.
    pub fn run_with_source<J: JumpSource, S: EventSink>(&self, source: &mut J, sink: &mut S) -> RuinRecord {
        self.run_jumps(source, sink, self.grid.as_ref().map(|_| 0.0))
    }

    // `switch_at` is the depth at which the source is retargeted to the
    // tilted dynamics (switched measure only).
    fn run_jumps<J: JumpSource, S: EventSink>(&self, source: &mut J, sink: &mut S, switch_at: Option<f64>) -> RuinRecord {
        let c = self.dynamics.premium().expect("jump models have a premium");
        let u = self.u;
        let delta = self.options.discount;
        let mut st = PathState::default();
        let mut passages = match (&self.grid, self.alpha) {
            (Some(grid), Some(a)) => Some(PassageLog::new(grid, a)),
            _ => None,
        };
        let mut pending_switch = switch_at.filter(|&d| d > 0.0);
        sink.record(st.event(EventKind::Start));

        let mut events = 0u64;
        loop {
            if events >= self.options.max_events {
                sink.record(st.event(EventKind::StepLimit));
                return RuinRecord { outcome: Outcome::StepLimit, end_time: st.t, events, approximate: false };
            }
            let (wait, jump) = source.next_jump();

            // drift down to the running minimum, if reached before the jump
            let gap = st.x - st.xmin;
            let to_min = gap / c;
            if wait < to_min {
                st.x -= c * wait;
                st.rg -= c * wait;
                st.t += wait;
            } else {
                st.t += to_min;
                st.x = st.xmin;
                st.rg = st.x + st.tax;
                if gap > 0.0 {
                    st.close_excursion(u);
                    sink.record(st.event(EventKind::Minimum));
                }
                let mut rest = wait - to_min;
                let mut switch_now = false;
                if let Some(d) = pending_switch {
                    let needed = (d + st.xmin) / c;
                    if needed <= rest {
                        rest = needed.max(0.0);
                        switch_now = true;
                    }
                }
                if rest == f64::INFINITY {
                    // no more jumps: R^Γ never increases again
                    sink.record(st.event(EventKind::Truncation));
                    return RuinRecord {
                        outcome: Outcome::Truncated { residual_bound: Some(0.0) },
                        end_time: st.t,
                        events,
                        approximate: false,
                    };
                }
                let (paid, discounted) = self.policy.segment_tax(delta, st.t, -st.xmin, c, rest);
                st.t += rest;
                st.x -= c * rest;
                st.xmin = st.x;
                st.tax += paid;
                st.disc_tax += discounted;
                st.rg = st.x + st.tax;
                if let Some(log) = passages.as_mut() {
                    log.pass(-st.xmin, |d| -d);
                }
                if switch_now {
                    // the pending arrival is discarded; waits are memoryless
                    st.touch_max();
                    source.retarget(&self.dynamics);
                    pending_switch = None;
                    continue;
                }
            }
            st.touch_max();
            events += 1;
            sink.record(st.event(EventKind::PreJump));

            if jump > 0.0 {
                let before = st.rg;
                st.x += jump;
                st.rg += jump;
                st.exc_height = st.exc_height.max(st.x - st.xmin);
                if st.rg > u {
                    sink.record(st.event(EventKind::Ruin));
                    let ruin = Ruin {
                        tau: st.t,
                        g: st.g,
                        undershoot: u - before,
                        overshoot: st.rg - u,
                        depth: u - st.rg_max,
                        duration: st.t - st.g,
                        tax: st.tax,
                        disc_tax: st.disc_tax,
                        weight: match &passages {
                            Some(log) => log.weight(st.x),
                            None => self.weight(st.x),
                        },
                        first_excursion: !st.high_seen,
                    };
                    return RuinRecord { outcome: Outcome::Ruined(ruin), end_time: st.t, events, approximate: false };
                }
            } else if jump < 0.0 {
                let above = st.x > st.xmin;
                st.x += jump;
                if st.x <= st.xmin {
                    let (paid, discounted) = self.policy.jump_tax(delta, st.t, -st.xmin, -st.x);
                    st.xmin = st.x;
                    st.tax += paid;
                    st.disc_tax += discounted;
                    if above {
                        st.close_excursion(u);
                    }
                    let landed = st.x;
                    if let Some(log) = passages.as_mut() {
                        log.pass(-landed, |_| landed);
                    }
                    if pending_switch.is_some_and(|d| -landed >= d) {
                        source.retarget(&self.dynamics);
                        pending_switch = None;
                    }
                }
                st.rg = st.x + st.tax;
            }
            st.touch_max();
            sink.record(st.event(EventKind::Jump));

            if self.measure == Measure::Physical && st.rg < -self.truncation {
                sink.record(st.event(EventKind::Truncation));
                return RuinRecord { outcome: self.truncated(st.rg), end_time: st.t, events, approximate: false };
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct PathState {
    pub t: f64,
    pub x: f64,
    pub xmin: f64,
    pub rg: f64,
    pub rg_max: f64,
    pub g: f64,
    pub tax: f64,
    pub disc_tax: f64,
    pub exc_height: f64,
    pub high_seen: bool,
}

impl PathState {
    fn event(&self, kind: EventKind) -> Event {
        Event { time: self.t, kind, x: self.x, xmin: self.xmin, rgamma: self.rg, tax: self.tax }
    }

    fn close_excursion(&mut self, u: f64) {
        if self.exc_height > u {
            self.high_seen = true;
        }
        self.exc_height = 0.0;
    }

    // ties count as a new visit, so g is the latest time at the maximum
    fn touch_max(&mut self) {
        if self.rg >= self.rg_max {
            self.rg_max = self.rg;
            self.g = self.t;
        }
    }
}
