//! Large-`u` limits of the taxed ruin quantities.
//!
//! With no downward jumps the descending ladder height can be taken as the
//! depth of the running minimum itself, so the retained height `Ĥ^Γ(t)` is
//! the deterministic [`TaxPolicy::hhat_gamma`] and every limit reduces to a
//! one-dimensional integral, in closed form where the policy allows.

use alloc::format;
use alloc::string::String;

use libm::{exp, fabs};

use crate::estimators::Penalty;
use crate::model::{LadderExponents, ModelSpec, Upsilon};
use crate::quad::integrate_to_infinity;
use crate::tax::TaxPolicy;
use crate::{Error, Result};

/// Absolute tolerance of every quadrature in this module.
pub const QUAD_TOL: f64 = 1e-10;

// Depth at which the tail of e^{−αĤ^Γ} is classified.
const TAIL_PROBE: f64 = 1e12;
const TAIL_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    /// `Υ κ̂(0,α) / κ̂(0,α(1−γ))`.
    RuinConstantConstantRate,
    /// `Υ (αβ − 1 + e^{−αβ}) / (αβ − 1)`.
    RuinConstantHyperbolic,
    /// `Υ κ̂(0,α) ∫ e^{−αĤ^Γ(t)} dt` by quadrature.
    RuinConstantQuadrature,
    /// `κ̂(0,α) / κ̂(0,α(1−γ))`.
    RuinRatio,
    /// `α(κ(δ,λ−α) − κ(δ,−η)) / (q(η+λ−α))`.
    PenaltyFunction,
    /// `γ / (α(1−γ) + κ̂(δ,0))`.
    TaxValueConstantRate,
    /// `αβ²e^{−αβ} / ((αβ−1)(αβ−2)(αβ−1+e^{−αβ}))`.
    TaxValueHyperbolic,
    /// Ratio of two quadratures over the retained height.
    TaxValueQuadrature,
}

impl Formula {
    pub fn as_str(self) -> &'static str {
        match self {
            Formula::RuinConstantConstantRate => "ruin_constant/constant_rate",
            Formula::RuinConstantHyperbolic => "ruin_constant/hyperbolic",
            Formula::RuinConstantQuadrature => "ruin_constant/quadrature",
            Formula::RuinRatio => "ruin_ratio/constant_rate",
            Formula::PenaltyFunction => "penalty_function",
            Formula::TaxValueConstantRate => "tax_value/constant_rate",
            Formula::TaxValueHyperbolic => "tax_value/hyperbolic",
            Formula::TaxValueQuadrature => "tax_value/quadrature",
        }
    }
}

/// Inputs a prediction was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Inputs {
    pub model: ModelSpec,
    pub policy: Option<TaxPolicy>,
    pub penalty: Option<Penalty>,
    pub discount: Option<f64>,
    pub upsilon: Option<f64>,
}

impl Inputs {
    fn new(model: &ModelSpec) -> Self {
        Inputs { model: *model, policy: None, penalty: None, discount: None, upsilon: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// `+∞` when the finiteness condition fails.
    pub value: f64,
    pub formula: Formula,
    pub finite: bool,
    /// Condition under which the limit is finite, in terms of the inputs.
    pub condition: String,
    pub inputs: Inputs,
}

impl Prediction {
    fn new(value: f64, formula: Formula, condition: String, inputs: Inputs) -> Self {
        Prediction { value, formula, finite: value.is_finite(), condition, inputs }
    }
}

fn spectrally_positive(model: &ModelSpec) -> Result<LadderExponents> {
    if !model.is_spectrally_positive() {
        return Err(Error::UnsupportedModel("needs a model without downward jumps"));
    }
    model.ladder_exponents()
}

/// Whether `∫ e^{−αĤ^Γ(t)} t^k dt` converges, judged from the logarithmic
/// slope `α t (1 − rate(t))` of `e^{αĤ^Γ}` far out.
fn tail_converges(policy: &TaxPolicy, alpha: f64, k: f64) -> bool {
    let slope = alpha * TAIL_PROBE * policy.retained_rate(TAIL_PROBE);
    slope > (1.0 + k) * (1.0 + TAIL_MARGIN)
}

fn quad_split(policy: &TaxPolicy, alpha: f64) -> f64 {
    let last = policy.breakpoints().last().copied().unwrap_or(0.0);
    (2.0 * last).max(10.0 / alpha)
}

/// `∫₀^∞ e^{−αĤ^Γ(t)} dt`, or `+∞`.
pub fn retained_height_integral(policy: &TaxPolicy, alpha: f64) -> Result<f64> {
    if !tail_converges(policy, alpha, 0.0) {
        return Ok(f64::INFINITY);
    }
    let f = |t: f64| exp(-alpha * policy.hhat_gamma(t));
    Ok(integrate_to_infinity(f, 0.0, quad_split(policy, alpha), policy.breakpoints(), QUAD_TOL)?.value)
}

/// `∫₀^∞ e^{−αĤ^Γ(t)} ∫₀^t rate(r) e^{−φr} dr dt`, or `+∞`.
pub fn discounted_tax_integral(policy: &TaxPolicy, alpha: f64, phi: f64) -> Result<f64> {
    // with φ = 0 and a positive limiting rate the inner integral grows linearly
    let k = if phi == 0.0 && policy.tail_rate() > 0.0 { 1.0 } else { 0.0 };
    if !tail_converges(policy, alpha, k) {
        return Ok(f64::INFINITY);
    }
    let f = |t: f64| exp(-alpha * policy.hhat_gamma(t)) * policy.segment_tax(phi, 0.0, 0.0, 1.0, t).1;
    Ok(integrate_to_infinity(f, 0.0, quad_split(policy, alpha), policy.breakpoints(), QUAD_TOL)?.value)
}

/// `lim e^{αu} P(τ^Γ_u < ∞)`. Needs the closed-form Cramér constant; see
/// [`predict_ruin_constant_with`] for the two-sided model.
pub fn predict_ruin_constant(model: &ModelSpec, policy: &TaxPolicy) -> Result<Prediction> {
    match model.cramer_upsilon() {
        Upsilon::Exact(y) => predict_ruin_constant_with(model, policy, y),
        Upsilon::Empirical => Err(Error::NeedsEmpiricalUpsilon),
    }
}

/// As [`predict_ruin_constant`] with a supplied (e.g. calibrated) `Υ`.
pub fn predict_ruin_constant_with(model: &ModelSpec, policy: &TaxPolicy, upsilon: f64) -> Result<Prediction> {
    policy.validate()?;
    let lx = model.ladder_exponents()?;
    let alpha = lx.alpha();
    let mut inputs = Inputs::new(model);
    inputs.policy = Some(policy.clone());
    inputs.upsilon = Some(upsilon);
    match *policy {
        TaxPolicy::Constant { gamma } => {
            let ratio = ratio_value(&lx, gamma)?;
            let cond = String::from("gamma < 1");
            Ok(Prediction::new(upsilon * ratio, Formula::RuinConstantConstantRate, cond, inputs))
        }
        TaxPolicy::Hyperbolic { beta } => {
            spectrally_positive(model)?;
            let ab = alpha * beta;
            let value = if ab > 1.0 + TAIL_MARGIN { upsilon * (ab - 1.0 + exp(-ab)) / (ab - 1.0) } else { f64::INFINITY };
            Ok(Prediction::new(value, Formula::RuinConstantHyperbolic, format!("alpha*beta > 1 (alpha*beta = {ab})"), inputs))
        }
        TaxPolicy::Table { .. } => {
            spectrally_positive(model)?;
            let value = upsilon * lx.kappa_hat(0.0, alpha)? * retained_height_integral(policy, alpha)?;
            let cond = String::from("last rate < 1");
            Ok(Prediction::new(value, Formula::RuinConstantQuadrature, cond, inputs))
        }
    }
}

fn ratio_value(lx: &LadderExponents, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Parameter { field: "gamma", reason: "must lie in [0, 1]" });
    }
    let alpha = lx.alpha();
    let den = lx.kappa_hat(0.0, alpha * (1.0 - gamma))?;
    let num = lx.kappa_hat(0.0, alpha)?;
    Ok(if den > 0.0 { num / den } else { f64::INFINITY })
}

/// `lim P(τ^γ_u < ∞) / P(τ_u < ∞)` for a constant rate; free of `Υ`.
pub fn predict_ruin_ratio(model: &ModelSpec, gamma: f64) -> Result<Prediction> {
    let lx = model.ladder_exponents()?;
    let mut inputs = Inputs::new(model);
    inputs.policy = Some(TaxPolicy::constant(gamma)?);
    Ok(Prediction::new(ratio_value(&lx, gamma)?, Formula::RuinRatio, String::from("gamma < 1"), inputs))
}

/// Limit of the conditional discounted penalty function.
pub fn predict_edpf(model: &ModelSpec, penalty: Penalty) -> Result<Prediction> {
    let lx = model.ladder_exponents()?;
    let alpha = lx.alpha();
    penalty.check(alpha)?;
    let Penalty { lambda, eta, delta } = penalty;
    let num = lx.kappa(delta, lambda - alpha)? - lx.kappa(delta, -eta)?;
    let value = alpha * num / (lx.q() * (eta + lambda - alpha));
    let mut inputs = Inputs::new(model);
    inputs.penalty = Some(penalty);
    Ok(Prediction::new(value, Formula::PenaltyFunction, String::from("eta <= alpha, eta + lambda != alpha"), inputs))
}

/// Limit of the expected discounted tax paid up to ruin, given ruin.
pub fn predict_tax_value(model: &ModelSpec, policy: &TaxPolicy, delta: f64) -> Result<Prediction> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Parameter { field: "discount", reason: "must be finite and >= 0" });
    }
    policy.validate()?;
    let lx = spectrally_positive(model)?;
    let alpha = lx.alpha();
    let phi = lx.kappa_hat(delta, 0.0)?;
    let mut inputs = Inputs::new(model);
    inputs.policy = Some(policy.clone());
    inputs.discount = Some(delta);
    match *policy {
        TaxPolicy::Constant { gamma } => {
            let den = alpha * (1.0 - gamma) + phi;
            let value = if den > 0.0 { gamma / den } else { f64::INFINITY };
            Ok(Prediction::new(value, Formula::TaxValueConstantRate, String::from("gamma < 1 or delta > 0"), inputs))
        }
        TaxPolicy::Hyperbolic { beta } if delta == 0.0 => {
            let ab = alpha * beta;
            let value = if ab > 2.0 * (1.0 + TAIL_MARGIN) {
                alpha * beta * beta * exp(-ab) / ((ab - 1.0) * (ab - 2.0) * (ab - 1.0 + exp(-ab)))
            } else {
                f64::INFINITY
            };
            Ok(Prediction::new(value, Formula::TaxValueHyperbolic, format!("alpha*beta > 2 (alpha*beta = {ab})"), inputs))
        }
        _ => {
            let num = discounted_tax_integral(policy, alpha, phi)?;
            let den = retained_height_integral(policy, alpha)?;
            let value = if num.is_finite() && den.is_finite() { num / den } else { f64::INFINITY };
            let cond = String::from("both retained-height integrals finite");
            Ok(Prediction::new(value, Formula::TaxValueQuadrature, cond, inputs))
        }
    }
}

/// Limiting joint law of (depth `y`, overshoot `x`, undershoot `v`) given
/// ruin, for exponential claims.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDensity {
    alpha: f64,
    q: f64,
    lambda: f64,
    mu: f64,
}

impl JointDensity {
    pub fn new(model: &ModelSpec) -> Result<Self> {
        let ModelSpec::CramerLundberg { claim_intensity, claim_rate, .. } = *model else {
            return Err(Error::UnsupportedModel("joint density is available for exponential claims only"));
        };
        let lx = model.ladder_exponents()?;
        Ok(JointDensity { alpha: lx.alpha(), q: lx.q(), lambda: claim_intensity, mu: claim_rate })
    }

    /// `(α/q) e^{αy} 1{v ≥ y} λμ e^{−μ(v+x)}`.
    pub fn density(&self, y: f64, x: f64, v: f64) -> f64 {
        if y < 0.0 || x < 0.0 || v < y {
            return 0.0;
        }
        self.alpha / self.q * exp(self.alpha * y) * self.lambda * self.mu * exp(-self.mu * (v + x))
    }

    /// Integral of [`JointDensity::density`] over its support.
    pub fn total_mass(&self) -> f64 {
        let (a, m) = (self.alpha, self.mu);
        a * self.lambda / (self.q * m * (m - a))
    }

    /// Depth marginal: `(αλ/(qμ)) e^{−(μ−α)y}`.
    pub fn depth_density(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        self.alpha * self.lambda / (self.q * self.mu) * exp(-(self.mu - self.alpha) * y)
    }

    pub fn depth_cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let r = self.mu - self.alpha;
        self.alpha * self.lambda / (self.q * self.mu * r) * -libm::expm1(-r * y)
    }

    /// Overshoot marginal: `μ e^{−μx}`.
    pub fn overshoot_density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.mu * exp(-self.mu * x)
        }
    }

    pub fn overshoot_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -libm::expm1(-self.mu * x)
        }
    }

    /// Undershoot marginal: `(λ/q)(e^{αv} − 1) e^{−μv}`.
    pub fn undershoot_density(&self, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        self.lambda / self.q * libm::expm1(self.alpha * v) * exp(-self.mu * v)
    }

    pub fn undershoot_cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let (a, m) = (self.alpha, self.mu);
        let r = m - a;
        self.lambda / self.q * (-libm::expm1(-r * v) / r + libm::expm1(-m * v) / m)
    }
}

/// `(α/q)·e^{αy}·1{v≥y}·λμe^{−μ(v+x)}` for the exponential-claims model.
pub fn predict_joint_density(model: &ModelSpec, y: f64, x: f64, v: f64) -> Result<f64> {
    Ok(JointDensity::new(model)?.density(y, x, v))
}

/// `|κ(0,0) − αλ/(μ(μ−α))|`: the killing rate against the value that
/// normalises the joint density.
pub fn q_consistency(model: &ModelSpec) -> Result<f64> {
    let ModelSpec::CramerLundberg { claim_intensity, claim_rate, .. } = *model else {
        return Err(Error::UnsupportedModel("q consistency is defined for exponential claims only"));
    };
    let lx = model.ladder_exponents()?;
    let a = lx.alpha();
    Ok(fabs(lx.q() - a * claim_intensity / (claim_rate * (claim_rate - a))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn base() -> ModelSpec {
        ModelSpec::cramer_lundberg(1.5, 1.0, 1.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        fabs(a - b) <= tol * (1.0 + fabs(b))
    }

    #[test]
    fn constant_rate_ruin_constant() {
        let p = predict_ruin_constant(&base(), &TaxPolicy::constant(0.5).unwrap()).unwrap();
        assert!(close(p.value, 4.0 / 3.0, 1e-12));
        assert_eq!(p.formula, Formula::RuinConstantConstantRate);
        let zero = predict_ruin_constant(&base(), &TaxPolicy::constant(0.0).unwrap()).unwrap();
        assert!(close(zero.value, 2.0 / 3.0, 1e-12));
        let full = predict_ruin_constant(&base(), &TaxPolicy::constant(1.0).unwrap()).unwrap();
        assert!(!full.finite);
    }

    #[test]
    fn hyperbolic_ruin_constant() {
        let p = predict_ruin_constant(&base(), &TaxPolicy::hyperbolic(6.0).unwrap()).unwrap();
        assert!(close(p.value, 2.0 / 3.0 * (1.0 + exp(-2.0)), 1e-12));
        assert!(fabs(p.value - 0.75689) < 1e-5);
        assert!(p.condition.starts_with("alpha*beta > 1"));
        let edge = predict_ruin_constant(&base(), &TaxPolicy::hyperbolic(3.0).unwrap()).unwrap();
        assert!(!edge.finite);
    }

    #[test]
    fn quadrature_agrees_with_hyperbolic_closed_form() {
        let a = 1.0 / 3.0;
        for beta in [4.0, 6.0, 9.0, 15.0] {
            let p = TaxPolicy::hyperbolic(beta).unwrap();
            let ab = a * beta;
            let closed = (ab - 1.0 + exp(-ab)) / (a * (ab - 1.0));
            assert!(close(retained_height_integral(&p, a).unwrap(), closed, 1e-9), "beta={beta}");
        }
        assert_eq!(retained_height_integral(&TaxPolicy::hyperbolic(3.0).unwrap(), a).unwrap(), f64::INFINITY);
        assert_eq!(retained_height_integral(&TaxPolicy::hyperbolic(2.0).unwrap(), a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn tax_quadrature_agrees_with_hyperbolic_closed_form() {
        let m = base();
        let p = TaxPolicy::hyperbolic(9.0).unwrap();
        let closed = predict_tax_value(&m, &p, 0.0).unwrap();
        assert!(fabs(closed.value - 0.3279) < 1e-4);
        let a = 1.0 / 3.0;
        let quad = discounted_tax_integral(&p, a, 0.0).unwrap() / retained_height_integral(&p, a).unwrap();
        assert!(close(quad, closed.value, 1e-8));
        assert!(!predict_tax_value(&m, &TaxPolicy::hyperbolic(6.0).unwrap(), 0.0).unwrap().finite);
        // with discounting the inner integral is bounded and αβ > 1 suffices
        assert!(predict_tax_value(&m, &TaxPolicy::hyperbolic(6.0).unwrap(), 0.1).unwrap().finite);
    }

    #[test]
    fn table_equivalent_to_constant() {
        let m = base();
        let t = TaxPolicy::table(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        let c = TaxPolicy::constant(0.5).unwrap();
        let pt = predict_ruin_constant(&m, &t).unwrap();
        assert!(close(pt.value, 4.0 / 3.0, 1e-9));
        for delta in [0.0, 0.1] {
            let vt = predict_tax_value(&m, &t, delta).unwrap().value;
            let vc = predict_tax_value(&m, &c, delta).unwrap().value;
            assert!(close(vt, vc, 1e-8), "delta={delta}: {vt} vs {vc}");
        }
        let full_tail = TaxPolicy::table(vec![0.0, 2.0], vec![0.2, 1.0]).unwrap();
        assert!(!predict_ruin_constant(&m, &full_tail).unwrap().finite);
    }

    #[test]
    fn tax_value_constant_rate() {
        let m = base();
        let c = TaxPolicy::constant(0.5).unwrap();
        assert!(close(predict_tax_value(&m, &c, 0.0).unwrap().value, 3.0, 1e-12));
        let v = predict_tax_value(&m, &c, 0.1).unwrap().value;
        assert!(fabs(v - 1.5436) < 1e-3, "{v}");
    }

    #[test]
    fn penalty_function_values() {
        let m = base();
        let one = predict_edpf(&m, Penalty { lambda: 0.0, eta: 0.0, delta: 0.0 }).unwrap();
        assert!(close(one.value, 1.0, 1e-12));
        let half = predict_edpf(&m, Penalty { lambda: 2.0 / 3.0, eta: 0.0, delta: 0.0 }).unwrap();
        assert!(close(half.value, 0.5, 1e-12));
        let a = m.lundberg_root().unwrap();
        assert!(matches!(
            predict_edpf(&m, Penalty { lambda: 0.0, eta: a, delta: 0.0 }),
            Err(Error::Parameter { .. })
        ));
    }

    #[test]
    fn ratio_values() {
        assert!(close(predict_ruin_ratio(&base(), 0.5).unwrap().value, 2.0, 1e-12));
        assert!(close(predict_ruin_ratio(&base(), 0.0).unwrap().value, 1.0, 1e-15));
        let ts = ModelSpec::two_sided(1.5, 1.0, 1.0, 0.2, 2.0).unwrap();
        let r = predict_ruin_ratio(&ts, 0.5).unwrap().value;
        assert!(r > 1.9 && r < 2.0, "{r}");
        assert_eq!(predict_ruin_constant(&ts, &TaxPolicy::constant(0.5).unwrap()), Err(Error::NeedsEmpiricalUpsilon));
    }

    #[test]
    fn joint_density_normalisation() {
        let j = JointDensity::new(&base()).unwrap();
        assert!(close(j.total_mass(), 1.0, 1e-12));
        assert_eq!(j.density(2.0, 0.5, 1.0), 0.0);
        assert!(close(j.depth_density(1.5), 2.0 / 3.0 * exp(-1.0), 1e-12));
        assert!(close(j.depth_cdf(1e3), 1.0, 1e-12));
        assert!(close(j.undershoot_cdf(1e3), 1.0, 1e-12));
        assert!(q_consistency(&base()).unwrap() <= 1e-9);
        assert!(q_consistency(&ModelSpec::cramer_lundberg(2.0, 1.0, 1.0).unwrap()).unwrap() <= 1e-9);
    }
}
