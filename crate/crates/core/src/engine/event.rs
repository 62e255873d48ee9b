//! Optional per-path event log.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Start,
    /// The surplus returned to its running minimum, closing an excursion.
    Minimum,
    /// State just before a jump is applied.
    PreJump,
    Jump,
    /// One step of the Brownian grid.
    Step,
    Ruin,
    Truncation,
    StepLimit,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Start => "start",
            EventKind::Minimum => "minimum",
            EventKind::PreJump => "pre_jump",
            EventKind::Jump => "jump",
            EventKind::Step => "step",
            EventKind::Ruin => "ruin",
            EventKind::Truncation => "truncation",
            EventKind::StepLimit => "step_limit",
        }
    }
}

/// State of the path at an event time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub x: f64,
    pub xmin: f64,
    pub rgamma: f64,
    pub tax: f64,
}

pub trait EventSink {
    fn record(&mut self, event: Event);
}

/// Discards every event.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoEvents;

impl EventSink for NoEvents {
    #[inline]
    fn record(&mut self, _: Event) {}
}

impl EventSink for Vec<Event> {
    fn record(&mut self, event: Event) {
        self.push(event);
    }
}
