use taxrisk_core::engine::{Event, EventKind, Measure, SimOptions, Simulator};
use taxrisk_core::{ModelSpec, TaxPolicy};

const PATHS: u64 = 1000;

fn models() -> Vec<(&'static str, ModelSpec)> {
    vec![
        ("cl", ModelSpec::cramer_lundberg(1.5, 1.0, 1.0).unwrap()),
        ("two-sided", ModelSpec::two_sided(1.5, 1.0, 1.0, 0.2, 2.0).unwrap()),
        ("bm", ModelSpec::brownian_drift(1.0, 1.0).unwrap()),
    ]
}

fn policies() -> Vec<TaxPolicy> {
    vec![
        TaxPolicy::constant(0.0).unwrap(),
        TaxPolicy::constant(0.5).unwrap(),
        TaxPolicy::hyperbolic(2.0).unwrap(),
        TaxPolicy::table(vec![0.0, 0.5, 1.5], vec![0.1, 0.6, 0.3]).unwrap(),
    ]
}

fn sim(model: ModelSpec, policy: TaxPolicy, measure: Measure) -> Simulator {
    let u = if matches!(model, ModelSpec::BrownianDrift { .. }) { 1.5 } else { 4.0 };
    Simulator::new(model, policy, u, measure, SimOptions { discount: 0.05, ..SimOptions::default() }).unwrap()
}

fn log(s: &Simulator, replica: u64) -> Vec<Event> {
    let mut events = Vec::new();
    s.run_replica_logged(11, replica, &mut events);
    events
}

#[test]
fn reflected_identity_and_tax_bound() {
    for (name, model) in models() {
        for policy in policies() {
            for measure in [Measure::Physical, Measure::Tilted] {
                let s = sim(model, policy.clone(), measure);
                for replica in 0..PATHS {
                    let mut rmin = f64::INFINITY;
                    for e in log(&s, replica) {
                        rmin = rmin.min(e.rgamma);
                        let scale = 1.0 + e.x.abs() + e.xmin.abs();
                        let lhs = e.rgamma - rmin;
                        let rhs = e.x - e.xmin;
                        assert!(
                            (lhs - rhs).abs() <= 1e-10 * scale,
                            "{name} {policy} {} replica {replica} t={}: {lhs} vs {rhs}",
                            measure.as_str(),
                            e.time
                        );
                        assert!(e.tax <= -e.xmin + 1e-10 * scale, "{name} {policy} replica {replica}");
                        assert!((e.rgamma - e.x - e.tax).abs() <= 1e-10 * scale);
                    }
                }
            }
        }
    }
}

#[test]
fn larger_rates_give_larger_taxed_paths() {
    // Γ₁ ≤ Γ₂ pointwise; same seed gives the same X under the original measure
    let pairs = [
        (TaxPolicy::constant(0.2).unwrap(), TaxPolicy::constant(0.7).unwrap()),
        (TaxPolicy::hyperbolic(3.0).unwrap(), TaxPolicy::hyperbolic(1.0).unwrap()),
        (
            TaxPolicy::table(vec![0.0, 1.0], vec![0.1, 0.4]).unwrap(),
            TaxPolicy::table(vec![0.0, 1.0], vec![0.3, 0.9]).unwrap(),
        ),
    ];
    for (name, model) in models() {
        for (low, high) in &pairs {
            let a = sim(model, low.clone(), Measure::Physical);
            let b = sim(model, high.clone(), Measure::Physical);
            for replica in 0..PATHS {
                let (ea, eb) = (log(&a, replica), log(&b, replica));
                for (x, y) in ea.iter().zip(&eb) {
                    if x.kind != y.kind || x.kind == EventKind::Truncation {
                        break;
                    }
                    assert_eq!(x.time, y.time);
                    assert_eq!(x.x, y.x);
                    assert!(y.rgamma >= x.rgamma - 1e-12, "{name} replica {replica} t={}", x.time);
                }
                let (ra, rb) = (a.run_replica(11, replica), b.run_replica(11, replica));
                if let Some(r) = ra.ruin() {
                    let tb = rb.ruin().map(|r| r.tau);
                    assert!(tb.is_some_and(|t| t <= r.tau), "{name} replica {replica}: {tb:?} vs {}", r.tau);
                }
            }
        }
    }
}

#[test]
fn ruin_record_matches_event_log() {
    let model = ModelSpec::cramer_lundberg(1.5, 1.0, 1.0).unwrap();
    let s = sim(model, TaxPolicy::constant(0.5).unwrap(), Measure::Tilted);
    for replica in 0..200 {
        let events = log(&s, replica);
        let rec = s.run_replica(11, replica);
        let r = rec.ruin().expect("tilted paths ruin");
        let last = events.last().unwrap();
        assert_eq!(last.kind, EventKind::Ruin);
        assert_eq!(last.time, r.tau);
        assert!((last.rgamma - s.u() - r.overshoot).abs() < 1e-12);
        assert!((last.tax - r.tax).abs() < 1e-12);
        assert!(r.undershoot >= 0.0 && r.overshoot >= 0.0 && r.depth >= 0.0);
        assert!(r.g <= r.tau && r.duration >= 0.0);
    }
}
