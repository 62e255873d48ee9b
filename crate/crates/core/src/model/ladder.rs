//! Bivariate ladder exponents `κ(a, θ)` (ascending) and `κ̂(a, b)`
//! (descending), normalised so that `κ(a,θ)·κ̂(a,−θ) = a − ψ(−θ)`.

use libm::fabs;

use super::{ModelSpec, ROOT_TOL};
use crate::roots::newton_bisect;
use crate::{Error, Result};

/// Which descending local time the exponents are normalised against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `L̂ = |X̲|`, so the descending ladder height is `Ĥ_t = t` and
    /// `κ̂(a, b) = Φ̂(a) + b`. Used for models without downward jumps.
    DepthLocalTime,
    /// `κ̂(a, s) ~ s` as `s → ∞`. Used for the two-sided model.
    UnitDescendingDrift,
}

// Below this distance from Φ̂(a) the quotient form of κ loses digits to
// cancellation and a second-order expansion is used instead.
const EXPANSION_WINDOW: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderExponents {
    model: ModelSpec,
    alpha: f64,
    q: f64,
    d_h: f64,
    normalization: Normalization,
}

/// The three real roots `ρ₁ < ρ₂ < ρ₃` of `(a − ψ(−θ))(μ+θ)(μ₋−θ)` for the
/// two-sided model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots(pub [f64; 3]);

impl LadderExponents {
    pub(super) fn new(model: ModelSpec) -> Result<Self> {
        model.validate()?;
        let alpha = model.lundberg_root()?;
        let (normalization, d_h) = match model {
            ModelSpec::CramerLundberg { .. } => (Normalization::DepthLocalTime, 0.0),
            ModelSpec::BrownianDrift { volatility, .. } => {
                (Normalization::DepthLocalTime, 0.5 * volatility * volatility)
            }
            ModelSpec::TwoSided { .. } => (Normalization::UnitDescendingDrift, 0.0),
        };
        let mut ladder = LadderExponents { model, alpha, q: 0.0, d_h, normalization };
        ladder.q = ladder.kappa(0.0, 0.0)?;
        Ok(ladder)
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    /// Lundberg root of the underlying model.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Killing rate `q = κ(0, 0)` of the ascending ladder process.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Drift of the ascending ladder height.
    pub fn d_h(&self) -> f64 {
        self.d_h
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Ascending exponent `κ(a, θ)`, continued analytically to `θ > −μ`
    /// (all real `θ` for the Brownian model).
    pub fn kappa(&self, a: f64, theta: f64) -> Result<f64> {
        check_a(a)?;
        match self.model {
            ModelSpec::TwoSided { premium, claim_rate, .. } => {
                if theta <= -claim_rate {
                    return Err(Error::Domain { theta, lower: -claim_rate, upper: f64::INFINITY });
                }
                let CubicRoots([r1, _, _]) = self.cubic_roots(a)?;
                Ok(premium * (theta - r1) / (theta + claim_rate))
            }
            _ => {
                let phi = self.model.phi_hat(a)?;
                let h = theta - phi;
                if fabs(h) <= EXPANSION_WINDOW * (1.0 + fabs(phi)) {
                    let d1 = self.model.laplace_exponent_derivative(-phi)?;
                    let d2 = self.model.laplace_exponent_second_derivative(-phi)?;
                    Ok(-d1 + 0.5 * d2 * h)
                } else {
                    let psi = self.model.laplace_exponent(-theta)?;
                    Ok((a - psi) / (phi - theta))
                }
            }
        }
    }

    /// Descending exponent `κ̂(a, b)`.
    pub fn kappa_hat(&self, a: f64, b: f64) -> Result<f64> {
        check_a(a)?;
        match self.model {
            ModelSpec::TwoSided { gain_rate, .. } => {
                if b <= -gain_rate {
                    return Err(Error::Domain { theta: b, lower: -gain_rate, upper: f64::INFINITY });
                }
                let CubicRoots([_, r2, r3]) = self.cubic_roots(a)?;
                Ok((b + r2) * (b + r3) / (b + gain_rate))
            }
            _ => Ok(self.model.phi_hat(a)? + b),
        }
    }

    /// Real roots of the characteristic cubic of the two-sided model.
    ///
    /// Under net profit the cubic is negative at `−μ` and at `μ₋`, positive
    /// at `−m` (with `m` the minimiser of `ψ`) and at `+∞`, which isolates
    /// one root in each of `(−μ, −m)`, `(−m, μ₋)` and `(μ₋, ∞)`.
    pub fn cubic_roots(&self, a: f64) -> Result<CubicRoots> {
        let ModelSpec::TwoSided { premium: c, claim_intensity: l, claim_rate: m, gain_intensity: lm, gain_rate: mm } =
            self.model
        else {
            return Err(Error::UnsupportedModel("characteristic cubic exists only for the two-sided model"));
        };
        check_a(a)?;
        let c2 = -a - c * (mm - m) - l - lm;
        let c1 = a * (mm - m) - c * m * mm + l * mm - lm * m;
        let c0 = a * m * mm;
        let p = |t: f64| ((c * t + c2) * t + c1) * t + c0;
        let dp = |t: f64| (3.0 * c * t + 2.0 * c2) * t + c1;

        let mid = -self.model.exponent_minimiser()?;
        let mut hi = 2.0 * mm + 1.0;
        while p(hi) <= 0.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Factorization("no root above the gain pole"));
            }
        }
        let brackets = [(-m, mid), (mid, mm), (mm, hi)];
        let mut roots = [0.0; 3];
        for (slot, (lo, hi)) in roots.iter_mut().zip(brackets) {
            if !(p(lo) < 0.0 && p(hi) > 0.0 || p(lo) > 0.0 && p(hi) < 0.0) {
                return Err(Error::Factorization("characteristic cubic lacks the expected sign changes"));
            }
            *slot = newton_bisect(p, dp, lo, hi, ROOT_TOL, 1e-300)
                .map_err(|_| Error::Factorization("root isolation did not converge"))?;
        }
        Ok(CubicRoots(roots))
    }
}

fn check_a(a: f64) -> Result<()> {
    if a >= 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter { field: "a", reason: "must be finite and >= 0" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::positive_quadratic_root;

    fn base() -> LadderExponents {
        ModelSpec::cramer_lundberg(1.5, 1.0, 1.0).unwrap().ladder_exponents().unwrap()
    }

    fn two_sided() -> LadderExponents {
        ModelSpec::two_sided(1.5, 1.0, 1.0, 0.2, 2.0).unwrap().ladder_exponents().unwrap()
    }

    // κ for exponential claims factors as c(θ − ρ₁)/(θ + μ), where ρ₁ is the
    // other root of cθ² + (cμ − λ − a)θ − aμ.
    fn cl_kappa_oracle(a: f64, theta: f64) -> f64 {
        let (c, l, m) = (1.5, 1.0, 1.0);
        let phi = positive_quadratic_root(c, c * m - l - a, -a * m);
        let rho1 = (l + a - c * m) / c - phi;
        c * (theta - rho1) / (theta + m)
    }

    #[test]
    fn base_model_constants() {
        let lx = base();
        assert!((lx.q() - 0.5).abs() < 1e-12);
        assert!(lx.kappa(0.0, -1.0 / 3.0).unwrap().abs() < 1e-12);
        assert!((lx.kappa_hat(0.0, 1.0 / 3.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(lx.d_h(), 0.0);
        assert_eq!(lx.normalization(), Normalization::DepthLocalTime);
    }

    #[test]
    fn kappa_matches_factorised_oracle() {
        let lx = base();
        for &a in &[0.0, 0.05, 0.1, 1.0, 3.0] {
            for i in 0..40 {
                let theta = -0.9 + 0.1 * i as f64;
                let got = lx.kappa(a, theta).unwrap();
                let want = cl_kappa_oracle(a, theta);
                assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "a={a} θ={theta}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn kappa_is_continuous_through_phi_hat() {
        let lx = base();
        let a = 0.1;
        let phi = lx.model().phi_hat(a).unwrap();
        for &h in &[-2e-5, -1e-5, -1e-9, 0.0, 1e-9, 1e-5, 2e-5] {
            let got = lx.kappa(a, phi + h).unwrap();
            assert!((got - cl_kappa_oracle(a, phi + h)).abs() < 1e-10, "h={h}");
        }
    }

    #[test]
    fn edpf_inputs_for_base_model() {
        assert!((base().kappa(0.0, 1.0 / 3.0).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn brownian_ladder() {
        let lx = ModelSpec::brownian_drift(1.0, 2.0).unwrap().ladder_exponents().unwrap();
        assert_eq!(lx.d_h(), 2.0);
        assert!((lx.q() - 1.0).abs() < 1e-12);
        // κ(a,θ) = (σ²/2)(θ − ρ₁) is affine with slope d_H
        let s = lx.kappa(0.3, 2.0).unwrap() - lx.kappa(0.3, 1.0).unwrap();
        assert!((s - 2.0).abs() < 1e-10);
    }

    #[test]
    fn two_sided_roots_are_bracketed() {
        let lx = two_sided();
        let alpha = lx.alpha();
        let CubicRoots([r1, r2, r3]) = lx.cubic_roots(0.0).unwrap();
        assert!((r1 + alpha).abs() < 1e-12);
        assert!(r2.abs() < 1e-12);
        assert!(r3 > 2.0);
        let CubicRoots([s1, s2, s3]) = lx.cubic_roots(0.7).unwrap();
        assert!(-1.0 < s1 && s1 < s2 && s2 < 2.0 && s3 > 2.0);
    }

    #[test]
    fn two_sided_q_equals_negative_mean() {
        let lx = two_sided();
        // q = cα/μ; under unit descending drift this is not −E X₁
        assert!((lx.q() - 1.5 * lx.alpha()).abs() < 1e-12);
        assert!(lx.kappa_hat(0.0, 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn wiener_hopf_residuals() {
        for lx in [base(), two_sided(), ModelSpec::brownian_drift(1.0, 1.0).unwrap().ladder_exponents().unwrap()] {
            for &a in &[0.0, 0.1, 0.5, 2.0] {
                for i in 0..30 {
                    let theta = -0.95 + 0.095 * i as f64;
                    let lhs = lx.kappa(a, theta).unwrap() * lx.kappa_hat(a, -theta).unwrap();
                    let rhs = a - lx.model().laplace_exponent(-theta).unwrap();
                    assert!((lhs - rhs).abs() <= 1e-9, "{:?} a={a} θ={theta}: {lhs} vs {rhs}", lx.model());
                }
            }
        }
    }

    #[test]
    fn kappa_domain_checked() {
        assert!(matches!(base().kappa(0.0, -1.0), Err(Error::Domain { .. })));
        assert!(matches!(two_sided().kappa_hat(0.0, -2.0), Err(Error::Domain { .. })));
        assert!(matches!(base().kappa(-1.0, 0.0), Err(Error::Parameter { .. })));
    }
}
