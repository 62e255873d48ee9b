//! Mixture of delayed Esscher tilts.
//!
//! Component `k` follows the original dynamics until the running minimum
//! first reaches depth `D_k` and the tilted dynamics afterwards (`D_0 = 0` is
//! the plain tilt). With `σ_k` that passage time, the component's density on
//! a ruined path is `e^{α(X_τ − X_{σ_k})}` if `σ_k < τ` and one otherwise, so
//! the mixture likelihood ratio only needs `X` at each passage. Deep minima,
//! which the plain tilt almost never visits, are sampled directly.

use alloc::vec::Vec;

use libm::{exp, log, log1p, pow};

/// Shape of the depth grid, with depths in units of `1/α`.
///
/// Points are geometric with `per_octave` points per doubling, but never
/// more than `max_spacing` apart: once switched, the minimum seldom goes
/// more than a few `1/α` deeper, so wider gaps would be sampled only through
/// very large weights. Masses follow a `1/d` density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchPlan {
    /// Mixture mass of the undelayed tilt.
    pub tilt_mass: f64,
    pub min_depth: f64,
    pub max_depth: f64,
    pub per_octave: u32,
    pub max_spacing: f64,
}

impl Default for SwitchPlan {
    fn default() -> Self {
        SwitchPlan { tilt_mass: 0.5, min_depth: 1.0, max_depth: 3000.0, per_octave: 4, max_spacing: 1.0 }
    }
}

/// Switching depths and their mixture masses; entry 0 is depth zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchGrid {
    pub depths: Vec<f64>,
    pub masses: Vec<f64>,
}

impl SwitchGrid {
    pub fn new(plan: &SwitchPlan, alpha: f64) -> Self {
        let ratio = pow(2.0, 1.0 / plan.per_octave.max(1) as f64);
        let cap = plan.max_spacing / alpha;
        let top = plan.max_depth / alpha * (1.0 + 1e-12);
        let mut depths = alloc::vec![0.0];
        let mut raw = alloc::vec![0.0];
        let mut d = plan.min_depth / alpha;
        while d <= top {
            let next = (d * ratio).min(d + cap);
            depths.push(d);
            raw.push((next - d) / d);
            d = next;
        }
        let total: f64 = raw.iter().sum();
        let tilt = if total > 0.0 { plan.tilt_mass } else { 1.0 };
        let masses = raw.iter().enumerate().map(|(k, &r)| if k == 0 { tilt } else { (1.0 - tilt) * r / total }).collect();
        SwitchGrid { depths, masses }
    }

    /// Index drawn from the masses by a uniform `p ∈ [0, 1)`.
    pub fn pick(&self, p: f64) -> usize {
        let mut acc = 0.0;
        for (k, &m) in self.masses.iter().enumerate() {
            acc += m;
            if p < acc {
                return k;
            }
        }
        self.masses.len() - 1
    }
}

/// Running `log Σ_{reached} m_k e^{−αX_{σ_k}}` and the reached mass.
#[derive(Debug, Clone)]
pub(crate) struct PassageLog<'a> {
    grid: &'a SwitchGrid,
    alpha: f64,
    next: usize,
    log_sum: f64,
    reached: f64,
}

impl<'a> PassageLog<'a> {
    pub fn new(grid: &'a SwitchGrid, alpha: f64) -> Self {
        let mut log = PassageLog { grid, alpha, next: 0, log_sum: f64::NEG_INFINITY, reached: 0.0 };
        log.pass(0.0, |_| 0.0);
        log
    }

    /// The minimum has reached `depth`; `x_at(D)` is `X` when depth `D` was passed.
    pub fn pass<F: Fn(f64) -> f64>(&mut self, depth: f64, x_at: F) {
        while self.next < self.grid.depths.len() && self.grid.depths[self.next] <= depth {
            let d = self.grid.depths[self.next];
            let m = self.grid.masses[self.next];
            let term = log(m) - self.alpha * x_at(d);
            self.log_sum = log_add(self.log_sum, term);
            self.reached += m;
            self.next += 1;
        }
    }

    /// `dP/dQ_mix` for a path ruined with `X_τ = x`.
    pub fn weight(&self, x: f64) -> f64 {
        let unreached = (1.0 - self.reached).max(0.0);
        let e = self.alpha * x + self.log_sum;
        if unreached == 0.0 {
            exp(-e)
        } else {
            1.0 / (exp(e) + unreached)
        }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + log1p(exp(lo - hi))
}
