//! Supported Lévy claims-surplus models and their analytic quantities.
//!
//! `X` is the claims surplus process: claims minus collected premium. Ruin
//! from initial capital `u` happens when the (taxed) process exceeds `u`.
//! All exponents use the convention `ψ(θ) = log E e^{θ X₁}`.

mod ladder;

pub use ladder::{LadderExponents, Normalization};

use crate::roots::newton_bisect;
use crate::{Error, Result};

/// Relative tolerance for every root solved in this module.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    /// Compound Poisson claims with exponential sizes against a constant
    /// premium: `X_t = Σ claims − c·t`.
    CramerLundberg {
        premium: f64,
        claim_intensity: f64,
        claim_rate: f64,
    },
    /// As [`ModelSpec::CramerLundberg`] plus downward jumps (gains) arriving
    /// at `gain_intensity` with exponential sizes of rate `gain_rate`.
    TwoSided {
        premium: f64,
        claim_intensity: f64,
        claim_rate: f64,
        gain_intensity: f64,
        gain_rate: f64,
    },
    /// `X_t = σ B_t − p t`.
    BrownianDrift { drift: f64, volatility: f64 },
}

/// The Cramér constant `Υ = lim e^{αu} P(τ_u < ∞)` of the untaxed model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upsilon {
    Exact(f64),
    /// No closed form; calibrate from simulation.
    Empirical,
}

impl Upsilon {
    pub fn exact(self) -> Option<f64> {
        match self {
            Upsilon::Exact(v) => Some(v),
            Upsilon::Empirical => None,
        }
    }
}

fn positive(value: f64, field: &'static str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter { field, reason: "must be finite and > 0" })
    }
}

fn non_negative(value: f64, field: &'static str) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter { field, reason: "must be finite and >= 0" })
    }
}

impl ModelSpec {
    /// Claim intensity may be zero (a premium-only path); every other rate
    /// must be strictly positive.
    pub fn cramer_lundberg(premium: f64, claim_intensity: f64, claim_rate: f64) -> Result<Self> {
        let m = ModelSpec::CramerLundberg { premium, claim_intensity, claim_rate };
        m.validate()?;
        Ok(m)
    }

    /// A zero gain intensity degrades to [`ModelSpec::CramerLundberg`].
    pub fn two_sided(
        premium: f64,
        claim_intensity: f64,
        claim_rate: f64,
        gain_intensity: f64,
        gain_rate: f64,
    ) -> Result<Self> {
        non_negative(gain_intensity, "gain_intensity")?;
        positive(gain_rate, "gain_rate")?;
        if gain_intensity == 0.0 {
            return Self::cramer_lundberg(premium, claim_intensity, claim_rate);
        }
        let m = ModelSpec::TwoSided { premium, claim_intensity, claim_rate, gain_intensity, gain_rate };
        m.validate()?;
        Ok(m)
    }

    /// Zero volatility is accepted as a deterministic drift path.
    pub fn brownian_drift(drift: f64, volatility: f64) -> Result<Self> {
        let m = ModelSpec::BrownianDrift { drift, volatility };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::CramerLundberg { premium, claim_intensity, claim_rate } => {
                positive(premium, "premium")?;
                non_negative(claim_intensity, "claim_intensity")?;
                positive(claim_rate, "claim_rate")
            }
            ModelSpec::TwoSided { premium, claim_intensity, claim_rate, gain_intensity, gain_rate } => {
                positive(premium, "premium")?;
                non_negative(claim_intensity, "claim_intensity")?;
                positive(claim_rate, "claim_rate")?;
                non_negative(gain_intensity, "gain_intensity")?;
                positive(gain_rate, "gain_rate")
            }
            ModelSpec::BrownianDrift { drift, volatility } => {
                positive(drift, "drift")?;
                non_negative(volatility, "volatility")
            }
        }
    }

    /// Checks the net-profit condition `E X₁ < 0` needed for Cramér's condition.
    pub fn check_net_profit(&self) -> Result<()> {
        let mean = self.mean_increment();
        if mean < 0.0 {
            Ok(())
        } else {
            Err(Error::NoPositiveRoot { mean })
        }
    }

    /// `E X₁`.
    pub fn mean_increment(&self) -> f64 {
        match *self {
            ModelSpec::CramerLundberg { premium, claim_intensity, claim_rate } => {
                claim_intensity / claim_rate - premium
            }
            ModelSpec::TwoSided { premium, claim_intensity, claim_rate, gain_intensity, gain_rate } => {
                claim_intensity / claim_rate - gain_intensity / gain_rate - premium
            }
            ModelSpec::BrownianDrift { drift, .. } => -drift,
        }
    }

    /// True when `X` has no downward jumps, so the descending ladder height
    /// can be taken as the depth of the running minimum.
    pub fn is_spectrally_positive(&self) -> bool {
        !matches!(self, ModelSpec::TwoSided { .. })
    }

    pub fn has_jumps(&self) -> bool {
        !matches!(self, ModelSpec::BrownianDrift { .. })
    }

    /// Open interval on which `ψ` is finite.
    pub fn exponent_domain(&self) -> (f64, f64) {
        match *self {
            ModelSpec::CramerLundberg { claim_rate, .. } => (f64::NEG_INFINITY, claim_rate),
            ModelSpec::TwoSided { claim_rate, gain_rate, .. } => (-gain_rate, claim_rate),
            ModelSpec::BrownianDrift { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn check_domain(&self, theta: f64) -> Result<()> {
        let (lower, upper) = self.exponent_domain();
        if theta > lower && theta < upper {
            Ok(())
        } else {
            Err(Error::Domain { theta, lower, upper })
        }
    }

    /// `ψ(θ) = log E e^{θ X₁}`.
    pub fn laplace_exponent(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        Ok(match *self {
            ModelSpec::CramerLundberg { premium, claim_intensity, claim_rate } => {
                -premium * theta + claim_intensity * theta / (claim_rate - theta)
            }
            ModelSpec::TwoSided { premium, claim_intensity, claim_rate, gain_intensity, gain_rate } => {
                -premium * theta + claim_intensity * theta / (claim_rate - theta)
                    - gain_intensity * theta / (gain_rate + theta)
            }
            ModelSpec::BrownianDrift { drift, volatility } => {
                0.5 * volatility * volatility * theta * theta - drift * theta
            }
        })
    }

    /// `ψ'(θ)`.
    pub fn laplace_exponent_derivative(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        Ok(match *self {
            ModelSpec::CramerLundberg { premium, claim_intensity, claim_rate } => {
                let d = claim_rate - theta;
                -premium + claim_intensity * claim_rate / (d * d)
            }
            ModelSpec::TwoSided { premium, claim_intensity, claim_rate, gain_intensity, gain_rate } => {
                let d = claim_rate - theta;
                let e = gain_rate + theta;
                -premium + claim_intensity * claim_rate / (d * d) - gain_intensity * gain_rate / (e * e)
            }
            ModelSpec::BrownianDrift { drift, volatility } => volatility * volatility * theta - drift,
        })
    }

    /// `ψ''(θ)`.
    pub fn laplace_exponent_second_derivative(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        Ok(match *self {
            ModelSpec::CramerLundberg { claim_intensity, claim_rate, .. } => {
                let d = claim_rate - theta;
                2.0 * claim_intensity * claim_rate / (d * d * d)
            }
            ModelSpec::TwoSided { claim_intensity, claim_rate, gain_intensity, gain_rate, .. } => {
                let d = claim_rate - theta;
                let e = gain_rate + theta;
                2.0 * claim_intensity * claim_rate / (d * d * d) + 2.0 * gain_intensity * gain_rate / (e * e * e)
            }
            ModelSpec::BrownianDrift { volatility, .. } => volatility * volatility,
        })
    }

    // ψ and ψ' without the domain check, for use inside brackets already
    // known to lie in the domain.
    fn psi(&self, theta: f64) -> f64 {
        self.laplace_exponent(theta).unwrap_or(f64::INFINITY)
    }

    fn psi_prime(&self, theta: f64) -> f64 {
        self.laplace_exponent_derivative(theta).unwrap_or(f64::INFINITY)
    }

    /// Minimiser of `ψ` on `(0, upper)`; lies strictly inside `(0, α)`.
    pub(crate) fn exponent_minimiser(&self) -> Result<f64> {
        self.check_net_profit()?;
        let (_, pole) = self.exponent_domain();
        let hi = self.approach_from_below(0.0, pole, |t| self.psi_prime(t) > 0.0)?;
        newton_bisect(
            |t| self.psi_prime(t),
            |t| self.laplace_exponent_second_derivative(t).unwrap_or(f64::INFINITY),
            0.0,
            hi,
            ROOT_TOL,
            0.0,
        )
    }

    /// Moves from `lo` towards `upper` (a pole or +∞) until `done` holds.
    fn approach_from_below<P: Fn(f64) -> bool>(&self, lo: f64, upper: f64, done: P) -> Result<f64> {
        let mut hi = if upper.is_finite() { 0.5 * (lo + upper) } else { lo + 1.0 };
        for _ in 0..1100 {
            if done(hi) {
                return Ok(hi);
            }
            hi = if upper.is_finite() { 0.5 * (hi + upper) } else { 2.0 * hi + 1.0 };
            if upper.is_finite() && hi >= upper {
                break;
            }
        }
        Err(Error::RootFinding("could not bracket towards the domain boundary"))
    }

    /// The Lundberg root: the unique `α > 0` with `ψ(α) = 0`.
    pub fn lundberg_root(&self) -> Result<f64> {
        self.check_net_profit()?;
        let (_, pole) = self.exponent_domain();
        let lo = self
            .exponent_minimiser()
            .map_err(|_| Error::NoPositiveRoot { mean: self.mean_increment() })?;
        if self.psi(lo) >= 0.0 {
            return Err(Error::NoPositiveRoot { mean: self.mean_increment() });
        }
        let hi = self
            .approach_from_below(lo, pole, |t| self.psi(t) > 0.0)
            .map_err(|_| Error::NoPositiveRoot { mean: self.mean_increment() })?;
        newton_bisect(|t| self.psi(t), |t| self.psi_prime(t), lo, hi, ROOT_TOL, 0.0)
    }

    /// Dynamics under `dQ = e^{αX_t} dP`, expressed in the same family.
    pub fn esscher_tilt(&self, alpha: f64) -> Result<ModelSpec> {
        self.check_domain(alpha)?;
        Ok(match *self {
            ModelSpec::CramerLundberg { premium, claim_intensity, claim_rate } => ModelSpec::CramerLundberg {
                premium,
                claim_intensity: claim_intensity * claim_rate / (claim_rate - alpha),
                claim_rate: claim_rate - alpha,
            },
            ModelSpec::TwoSided { premium, claim_intensity, claim_rate, gain_intensity, gain_rate } => {
                ModelSpec::TwoSided {
                    premium,
                    claim_intensity: claim_intensity * claim_rate / (claim_rate - alpha),
                    claim_rate: claim_rate - alpha,
                    gain_intensity: gain_intensity * gain_rate / (gain_rate + alpha),
                    gain_rate: gain_rate + alpha,
                }
            }
            ModelSpec::BrownianDrift { drift, volatility } => ModelSpec::BrownianDrift {
                // negative drift means X drifts upward under Q
                drift: drift - alpha * volatility * volatility,
                volatility,
            },
        })
    }

    /// Right inverse of the dual exponent: the unique `θ ≥ 0` with `ψ(−θ) = a`.
    pub fn phi_hat(&self, a: f64) -> Result<f64> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::Parameter { field: "a", reason: "must be finite and >= 0" });
        }
        if !self.is_spectrally_positive() {
            return Err(Error::UnsupportedModel("phi_hat needs a model without downward jumps"));
        }
        self.check_net_profit()?;
        if a == 0.0 {
            return Ok(0.0);
        }
        let dual = |t: f64| self.psi(-t) - a;
        let mut hi = 1.0;
        while dual(hi) <= 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::RootFinding("phi_hat bracket overflow"));
            }
        }
        newton_bisect(dual, |t| -self.psi_prime(-t), 0.0, hi, ROOT_TOL, 0.0)
    }

    /// Cramér constant of the untaxed model, where known in closed form.
    pub fn cramer_upsilon(&self) -> Upsilon {
        match *self {
            ModelSpec::CramerLundberg { premium, claim_intensity, claim_rate } => {
                Upsilon::Exact(claim_intensity / (premium * claim_rate))
            }
            ModelSpec::BrownianDrift { .. } => Upsilon::Exact(1.0),
            ModelSpec::TwoSided { .. } => Upsilon::Empirical,
        }
    }

    pub fn ladder_exponents(&self) -> Result<LadderExponents> {
        LadderExponents::new(*self)
    }

    /// Premium rate `c` for the jump models.
    pub fn premium(&self) -> Option<f64> {
        match *self {
            ModelSpec::CramerLundberg { premium, .. } | ModelSpec::TwoSided { premium, .. } => Some(premium),
            ModelSpec::BrownianDrift { .. } => None,
        }
    }
}

#[cfg(test)]
/// Positive root of `A x² + B x + C = 0` for `A > 0`, `C ≤ 0`, computed
/// without cancellation.
pub(crate) fn positive_quadratic_root(a: f64, b: f64, c: f64) -> f64 {
    let disc = libm::sqrt(b * b - 4.0 * a * c);
    if b >= 0.0 {
        -2.0 * c / (b + disc)
    } else {
        (disc - b) / (2.0 * a)
    }
}
