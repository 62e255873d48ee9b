//! Loss-carried-forward tax policies.
//!
//! A policy gives the tax rate as a function of the depth `d = |X̲|` of the
//! running minimum of the claims surplus. Tax is paid only while that depth
//! increases.

use alloc::vec::Vec;
use core::fmt;

use libm::{exp, expm1, log};

use crate::quad::integrate;
use crate::{Error, Result};

/// Absolute tolerance for quadrature inside [`TaxPolicy::segment_tax`].
pub const SEGMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum TaxPolicy {
    /// Fixed rate `γ ∈ [0, 1]`.
    Constant { gamma: f64 },
    /// No tax down to depth `β`, then `1 − β/d`. The rate tends to one, so
    /// the policy is not bounded away from full taxation.
    Hyperbolic { beta: f64 },
    /// Step function: `rates[i]` applies on `[breakpoints[i], breakpoints[i+1])`,
    /// the last rate on `[breakpoints[n-1], ∞)`. `breakpoints[0]` is zero.
    Table { breakpoints: Vec<f64>, rates: Vec<f64> },
}

fn check_rate(rate: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::Parameter { field: "rate", reason: "must lie in [0, 1]" })
    }
}

impl TaxPolicy {
    pub fn constant(gamma: f64) -> Result<Self> {
        check_rate(gamma)?;
        Ok(TaxPolicy::Constant { gamma })
    }

    pub fn hyperbolic(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 0.0 {
            Ok(TaxPolicy::Hyperbolic { beta })
        } else {
            Err(Error::Parameter { field: "beta", reason: "must be finite and > 0" })
        }
    }

    pub fn table(breakpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != rates.len() {
            return Err(Error::Parameter { field: "breakpoints", reason: "need one rate per breakpoint" });
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::Parameter { field: "breakpoints", reason: "first breakpoint must be 0" });
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::Parameter { field: "breakpoints", reason: "must be finite and strictly increasing" });
        }
        for &r in &rates {
            check_rate(r)?;
        }
        Ok(TaxPolicy::Table { breakpoints, rates })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TaxPolicy::Constant { gamma } => Self::constant(*gamma).map(|_| ()),
            TaxPolicy::Hyperbolic { beta } => Self::hyperbolic(*beta).map(|_| ()),
            TaxPolicy::Table { breakpoints, rates } => Self::table(breakpoints.clone(), rates.clone()).map(|_| ()),
        }
    }

    /// Tax rate at running-minimum depth `depth ≥ 0`.
    pub fn rate_at(&self, depth: f64) -> f64 {
        match self {
            TaxPolicy::Constant { gamma } => *gamma,
            TaxPolicy::Hyperbolic { beta } => {
                if depth <= *beta {
                    0.0
                } else {
                    1.0 - beta / depth
                }
            }
            TaxPolicy::Table { breakpoints, rates } => rates[table_index(breakpoints, depth)],
        }
    }

    /// `1 − rate_at(depth)`, without cancellation for rates near one.
    pub fn retained_rate(&self, depth: f64) -> f64 {
        match self {
            TaxPolicy::Hyperbolic { beta } if depth > *beta => beta / depth,
            _ => 1.0 - self.rate_at(depth),
        }
    }

    pub fn sup_rate(&self) -> f64 {
        match self {
            TaxPolicy::Constant { gamma } => *gamma,
            TaxPolicy::Hyperbolic { .. } => 1.0,
            TaxPolicy::Table { rates, .. } => rates.iter().copied().fold(0.0, f64::max),
        }
    }

    /// `lim_{d→∞} rate_at(d)`.
    pub fn tail_rate(&self) -> f64 {
        match self {
            TaxPolicy::Constant { gamma } => *gamma,
            TaxPolicy::Hyperbolic { .. } => 1.0,
            TaxPolicy::Table { rates, .. } => rates[rates.len() - 1],
        }
    }

    /// True iff `sup_d rate(d) < 1`. The hyperbolic policy never is, even
    /// though it never reaches one.
    pub fn bounded_away_from_one(&self) -> bool {
        match self {
            TaxPolicy::Hyperbolic { .. } => false,
            _ => self.sup_rate() < 1.0,
        }
    }

    /// True for a policy that never taxes.
    pub fn is_zero(&self) -> bool {
        match self {
            TaxPolicy::Constant { gamma } => *gamma == 0.0,
            TaxPolicy::Hyperbolic { .. } => false,
            TaxPolicy::Table { rates, .. } => rates.iter().all(|&r| r == 0.0),
        }
    }

    /// True for `Γ ≡ 1`, where the taxed process is the reflected process.
    pub fn is_full(&self) -> bool {
        match self {
            TaxPolicy::Constant { gamma } => *gamma == 1.0,
            TaxPolicy::Hyperbolic { .. } => false,
            TaxPolicy::Table { rates, .. } => rates.iter().all(|&r| r == 1.0),
        }
    }

    /// Depths where the rate is not smooth.
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            TaxPolicy::Constant { .. } => &[],
            TaxPolicy::Hyperbolic { beta } => core::slice::from_ref(beta),
            TaxPolicy::Table { breakpoints, .. } => &breakpoints[1..],
        }
    }

    /// `∫₀^t rate(s) ds`: the tax paid while the minimum descends from 0 to depth `t`.
    pub fn cumulative_tax(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self {
            TaxPolicy::Constant { gamma } => gamma * t,
            TaxPolicy::Hyperbolic { beta } => {
                if t <= *beta {
                    0.0
                } else {
                    (t - beta) - beta * log(t / beta)
                }
            }
            TaxPolicy::Table { breakpoints, rates } => {
                let mut acc = 0.0;
                for (i, (&d, &r)) in breakpoints.iter().zip(rates).enumerate() {
                    if d >= t {
                        break;
                    }
                    let end = breakpoints.get(i + 1).map_or(t, |&n| n.min(t));
                    acc += r * (end - d);
                }
                acc
            }
        }
    }

    /// Retained descending height `Ĥ^Γ(t) = ∫₀^t (1 − rate(s)) ds`.
    pub fn hhat_gamma(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self {
            TaxPolicy::Hyperbolic { beta } => {
                if t <= *beta {
                    t
                } else {
                    beta + beta * log(t / beta)
                }
            }
            TaxPolicy::Table { breakpoints, rates } => {
                let mut acc = 0.0;
                for (i, (&d, &r)) in breakpoints.iter().zip(rates).enumerate() {
                    if d >= t {
                        break;
                    }
                    let end = breakpoints.get(i + 1).map_or(t, |&n| n.min(t));
                    acc += (1.0 - r) * (end - d);
                }
                acc
            }
            TaxPolicy::Constant { gamma } => (1.0 - gamma) * t,
        }
    }

    /// Tax on a stretch where the minimum descends linearly from depth `d0`
    /// at time `s0` with speed `c` for `dt` time units.
    ///
    /// Returns `(∫ rate·c ds, ∫ e^{−δs} rate·c ds)`.
    pub fn segment_tax(&self, delta: f64, s0: f64, d0: f64, c: f64, dt: f64) -> (f64, f64) {
        if dt <= 0.0 || c <= 0.0 {
            return (0.0, 0.0);
        }
        let d1 = d0 + c * dt;
        let paid = self.cumulative_tax(d1) - self.cumulative_tax(d0);
        if delta == 0.0 {
            return (paid, paid);
        }
        let discounted = match self {
            TaxPolicy::Constant { gamma } => gamma * c * discounted_length(delta, s0, dt),
            TaxPolicy::Table { breakpoints, rates } => {
                let mut acc = 0.0;
                let start = table_index(breakpoints, d0);
                for i in start..rates.len() {
                    let lo = breakpoints[i].max(d0);
                    let hi = breakpoints.get(i + 1).map_or(d1, |&n| n.min(d1));
                    if hi <= lo {
                        if lo >= d1 {
                            break;
                        }
                        continue;
                    }
                    let t_lo = s0 + (lo - d0) / c;
                    acc += rates[i] * c * discounted_length(delta, t_lo, (hi - lo) / c);
                }
                acc
            }
            TaxPolicy::Hyperbolic { beta } => {
                if d1 <= *beta {
                    0.0
                } else {
                    let lo = d0.max(*beta);
                    // in the depth variable the discount is e^{−δ(s0 + (d − d0)/c)}
                    let integrand = |d: f64| exp(-delta * (s0 + (d - d0) / c)) * (1.0 - beta / d);
                    match integrate(integrand, lo, d1, &[], SEGMENT_TOL) {
                        Ok(r) => r.value,
                        Err(Error::Quadrature { value, .. }) => value,
                        Err(_) => f64::NAN,
                    }
                }
            }
        };
        (paid, discounted)
    }

    /// Tax for an instantaneous move of the minimum from depth `d0` to `d1`
    /// at time `t` (a downward jump or a grid step), discounted at `t`.
    pub fn jump_tax(&self, delta: f64, t: f64, d0: f64, d1: f64) -> (f64, f64) {
        if d1 <= d0 {
            return (0.0, 0.0);
        }
        let paid = self.cumulative_tax(d1) - self.cumulative_tax(d0);
        (paid, paid * exp(-delta * t))
    }
}

// ∫_{s0}^{s0+dt} e^{−δs} ds
fn discounted_length(delta: f64, s0: f64, dt: f64) -> f64 {
    if delta == 0.0 {
        dt
    } else {
        -exp(-delta * s0) * expm1(-delta * dt) / delta
    }
}

fn table_index(breakpoints: &[f64], depth: f64) -> usize {
    breakpoints.partition_point(|&b| b <= depth).saturating_sub(1)
}

impl fmt::Display for TaxPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaxPolicy::Constant { gamma } => write!(f, "constant(gamma={gamma})"),
            TaxPolicy::Hyperbolic { beta } => write!(f, "hyperbolic(beta={beta})"),
            TaxPolicy::Table { breakpoints, rates } => {
                write!(f, "table(")?;
                for (i, (d, r)) in breakpoints.iter().zip(rates).enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{d}:{r}")?;
                }
                write!(f, ")")
            }
        }
    }
}
