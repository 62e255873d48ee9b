use taxrisk_core::engine::{Measure, SimOptions, Simulator};
use taxrisk_core::estimators::{ruin_prob, Batch};
use taxrisk_core::{ModelSpec, TaxPolicy};

fn estimate(step: f64, n: u64) -> (f64, f64) {
    let model = ModelSpec::brownian_drift(1.0, 1.0).unwrap();
    let options = SimOptions { bm_step: step, ..SimOptions::default() };
    let sim = Simulator::new(model, TaxPolicy::constant(0.0).unwrap(), 1.0, Measure::Tilted, options).unwrap();
    let batch = Batch::new(&sim, sim.run_batch(n, 21));
    let e = ruin_prob(&batch).unwrap();
    (e.mean, e.stderr)
}

// psi(1) = exp(-2) for unit drift and volatility; grid monitoring misses
// crossings between steps, so the estimate is biased low by O(sqrt(step)).
#[test]
fn fine_grid_is_within_five_percent() {
    let exact = (-2.0f64).exp();
    let (fine, se) = estimate(1e-4, 2000);
    assert!(((fine - exact) / exact).abs() < 0.05, "{fine} vs {exact} (se {se})");
}

#[test]
fn bias_shrinks_with_step() {
    let exact = (-2.0f64).exp();
    let (coarse, _) = estimate(1e-2, 2000);
    let (fine, _) = estimate(1e-4, 2000);
    assert!(coarse < exact);
    assert!((fine - exact).abs() < (coarse - exact).abs(), "coarse {coarse} fine {fine}");
}
