use taxrisk_core::engine::{Measure, SimOptions, Simulator};
use taxrisk_core::estimators::{ruin_moments, ruin_prob, tax_value, Batch, Moments};
use taxrisk_core::{Error, ModelSpec, TaxPolicy};

fn sim(measure: Measure) -> Simulator {
    let m = ModelSpec::cramer_lundberg(1.5, 1.0, 1.0).unwrap();
    Simulator::new(m, TaxPolicy::constant(0.5).unwrap(), 5.0, measure, SimOptions::default()).unwrap()
}

fn chunk(s: &Simulator, seed: u64, range: std::ops::Range<u64>) -> Batch {
    Batch::new(s, range.map(|r| s.run_replica(seed, r)).collect())
}

#[test]
fn merge_order_does_not_change_estimates() {
    let s = sim(Measure::Tilted);
    let parts = [chunk(&s, 5, 0..700), chunk(&s, 5, 700..1500), chunk(&s, 5, 1500..3000)];
    let left = parts[0].clone().merge(parts[1].clone()).unwrap().merge(parts[2].clone()).unwrap();
    let right = parts[2].clone().merge(parts[0].clone().merge(parts[1].clone()).unwrap()).unwrap();
    let whole = chunk(&s, 5, 0..3000);
    for b in [&left, &right] {
        assert_eq!(ruin_prob(b).unwrap().mean.to_bits(), ruin_prob(&whole).unwrap().mean.to_bits());
        assert_eq!(ruin_prob(b).unwrap().stderr.to_bits(), ruin_prob(&whole).unwrap().stderr.to_bits());
        assert_eq!(tax_value(b).unwrap().mean.to_bits(), tax_value(&whole).unwrap().mean.to_bits());
    }
}

#[test]
fn moments_merge_is_associative() {
    let s = sim(Measure::Tilted);
    let mk = |r: std::ops::Range<u64>| ruin_moments(&chunk(&s, 9, r));
    let (a, b, c) = (mk(0..300), mk(300..800), mk(800..1000));
    let mut ab_c = a.clone();
    ab_c.merge(&b);
    ab_c.merge(&c);
    let mut bc = b.clone();
    bc.merge(&c);
    let mut a_bc = a.clone();
    a_bc.merge(&bc);
    assert_eq!(ab_c, a_bc);
    assert_eq!(ab_c, mk(0..1000));
    let mut empty = Moments::new();
    empty.merge(&a);
    assert_eq!(empty, a);
}

#[test]
fn mixed_batches_are_rejected() {
    let a = chunk(&sim(Measure::Tilted), 1, 0..10);
    let b = chunk(&sim(Measure::Physical), 1, 0..10);
    assert!(matches!(a.merge(b), Err(Error::MixedBatch)));
}

#[test]
fn crude_estimate_is_a_binomial_proportion() {
    let s = sim(Measure::Physical);
    let b = chunk(&s, 3, 0..2000);
    let e = ruin_prob(&b).unwrap();
    let p = b.ruin_count() as f64 / b.len() as f64;
    assert!((e.mean - p).abs() < 1e-15);
    let n = b.len() as f64;
    assert!((e.stderr - (p * (1.0 - p) / (n - 1.0)).sqrt()).abs() < 1e-12);
}
