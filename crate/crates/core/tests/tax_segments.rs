use taxrisk_core::TaxPolicy;

// midpoint rule in time
fn riemann(p: &TaxPolicy, delta: f64, s0: f64, d0: f64, c: f64, dt: f64) -> (f64, f64) {
    let n = 4_000_000;
    let h = dt / n as f64;
    let (mut paid, mut disc) = (0.0, 0.0);
    for i in 0..n {
        let s = (i as f64 + 0.5) * h;
        let f = p.rate_at(d0 + c * s) * c * h;
        paid += f;
        disc += f * (-delta * (s0 + s)).exp();
    }
    (paid, disc)
}

fn policies() -> Vec<TaxPolicy> {
    vec![
        TaxPolicy::constant(0.35).unwrap(),
        TaxPolicy::hyperbolic(1.2).unwrap(),
        TaxPolicy::table(vec![0.0, 0.7, 2.0, 2.5], vec![0.0, 0.5, 0.9, 0.2]).unwrap(),
    ]
}

#[test]
fn segment_tax_matches_riemann_sum() {
    let cases = [(0.0, 0.0, 0.0, 1.5, 3.0), (0.1, 2.0, 0.4, 1.5, 2.5), (0.7, 0.3, 1.9, 0.8, 4.0), (0.05, 10.0, 5.0, 2.0, 0.3)];
    for p in policies() {
        for &(delta, s0, d0, c, dt) in &cases {
            let (paid, disc) = p.segment_tax(delta, s0, d0, c, dt);
            let (rp, rd) = riemann(&p, delta, s0, d0, c, dt);
            assert!((paid - rp).abs() < 1e-6, "{p} paid {paid} vs {rp}");
            assert!((disc - rd).abs() < 1e-6, "{p} discounted {disc} vs {rd}");
        }
    }
}

#[test]
fn segments_are_additive() {
    for p in policies() {
        let whole = p.segment_tax(0.2, 1.0, 0.3, 1.5, 2.0);
        let a = p.segment_tax(0.2, 1.0, 0.3, 1.5, 0.7);
        let b = p.segment_tax(0.2, 1.7, 0.3 + 1.5 * 0.7, 1.5, 1.3);
        assert!((whole.0 - a.0 - b.0).abs() < 1e-12, "{p}");
        assert!((whole.1 - a.1 - b.1).abs() < 1e-11, "{p}");
    }
}

#[test]
fn jump_tax_is_cumulative_difference() {
    for p in policies() {
        let (paid, disc) = p.jump_tax(0.3, 2.0, 0.5, 3.1);
        let expect = p.cumulative_tax(3.1) - p.cumulative_tax(0.5);
        assert!((paid - expect).abs() < 1e-12, "{p}");
        assert!((disc - expect * (-0.6f64).exp()).abs() < 1e-12, "{p}");
        assert_eq!(p.jump_tax(0.3, 2.0, 3.1, 0.5), (0.0, 0.0));
    }
}

#[test]
fn retained_height_complements_cumulative_tax() {
    for p in policies() {
        for t in [0.0, 0.5, 1.2, 2.2, 7.0, 100.0] {
            assert!((p.hhat_gamma(t) + p.cumulative_tax(t) - t).abs() < 1e-12 * (1.0 + t), "{p} t={t}");
        }
    }
}
