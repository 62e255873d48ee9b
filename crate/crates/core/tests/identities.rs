use proptest::prelude::*;
use taxrisk_core::asymptotics::{predict_edpf, predict_ruin_constant, q_consistency, JointDensity};
use taxrisk_core::estimators::Penalty;
use taxrisk_core::{ModelSpec, TaxPolicy, Upsilon};

fn all_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::cramer_lundberg(1.5, 1.0, 1.0).unwrap(),
        ModelSpec::two_sided(1.5, 1.0, 1.0, 0.2, 2.0).unwrap(),
        ModelSpec::brownian_drift(0.5, 1.2).unwrap(),
    ]
}

#[test]
fn tilt_shifts_the_exponent() {
    for m in all_models() {
        let a = m.lundberg_root().unwrap();
        let q = m.esscher_tilt(a).unwrap();
        let (lo, hi) = m.exponent_domain();
        for i in 0..=40 {
            let theta = (lo.max(-5.0) - a) + (hi.min(5.0) - lo.max(-5.0)) * (0.01 + 0.98 * i as f64 / 40.0);
            if theta + a <= lo || theta + a >= hi {
                continue;
            }
            let lhs = q.laplace_exponent(theta).unwrap();
            let rhs = m.laplace_exponent(theta + a).unwrap() - m.laplace_exponent(a).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "{m:?} θ={theta}: {lhs} vs {rhs}");
        }
        assert!(q.mean_increment() > 0.0);
    }
}

#[test]
fn ladder_exponent_vanishes_at_minus_alpha() {
    for m in all_models() {
        let lx = m.ladder_exponents().unwrap();
        assert!(lx.kappa(0.0, -lx.alpha()).unwrap().abs() <= 1e-9, "{m:?}");
    }
}

#[test]
fn unit_penalty_limit_is_one() {
    for m in all_models() {
        let p = predict_edpf(&m, Penalty { lambda: 0.0, eta: 0.0, delta: 0.0 }).unwrap();
        assert!((p.value - 1.0).abs() <= 1e-9, "{m:?}: {}", p.value);
    }
}

#[test]
fn untaxed_limit_is_the_cramer_constant() {
    for m in [ModelSpec::cramer_lundberg(1.5, 1.0, 1.0).unwrap(), ModelSpec::brownian_drift(0.5, 1.2).unwrap()] {
        let Upsilon::Exact(y) = m.cramer_upsilon() else { panic!() };
        for p in [TaxPolicy::constant(0.0).unwrap(), TaxPolicy::table(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap()] {
            assert!((predict_ruin_constant(&m, &p).unwrap().value - y).abs() < 1e-9, "{m:?} {p}");
        }
    }
}

#[test]
fn ruin_constant_is_monotone_in_the_policy() {
    let m = ModelSpec::cramer_lundberg(1.5, 1.0, 1.0).unwrap();
    let mut last = 0.0;
    for r in [0.0, 0.1, 0.3, 0.5, 0.8] {
        let p = TaxPolicy::table(vec![0.0, 1.0, 3.0], vec![r, r * 0.5, r]).unwrap();
        let v = predict_ruin_constant(&m, &p).unwrap().value;
        assert!(v >= last, "{r}: {v} < {last}");
        last = v;
    }
}

#[test]
fn joint_density_integrates_to_one() {
    let j = JointDensity::new(&ModelSpec::cramer_lundberg(1.5, 1.0, 1.0).unwrap()).unwrap();
    // midpoint rule in (y, w) with v = y + w; x integrates out to 1/μ = 1
    let (n, top) = (400, 40.0);
    let h = top / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let y = (i as f64 + 0.5) * h;
        for k in 0..n {
            let w = (k as f64 + 0.5) * h;
            total += j.density(y, 0.0, y + w) * h * h;
        }
    }
    assert!((total - 1.0).abs() < 1e-3, "{total}");
    assert!((j.total_mass() - 1.0).abs() <= 1e-9);
}

proptest! {
    #[test]
    fn q_consistency_holds(premium in 1.05f64..5.0, lambda in 0.1f64..3.0, mu in 0.2f64..4.0) {
        prop_assume!(premium * mu > lambda * 1.01);
        let m = ModelSpec::cramer_lundberg(premium, lambda, mu).unwrap();
        prop_assert!(q_consistency(&m).unwrap() <= 1e-9);
    }

    #[test]
    fn wiener_hopf_residual(premium in 1.05f64..5.0, lambda in 0.1f64..3.0, mu in 0.2f64..4.0, a in 0.0f64..2.0, t in -0.9f64..3.0) {
        prop_assume!(premium * mu > lambda * 1.01);
        let m = ModelSpec::cramer_lundberg(premium, lambda, mu).unwrap();
        let lx = m.ladder_exponents().unwrap();
        // κ(a, θ)·κ̂(a, −θ) = a − ψ(−θ) wherever both sides are defined
        let theta = t * mu;
        prop_assume!(-theta < mu && theta > -mu);
        let lhs = lx.kappa(a, theta).unwrap() * lx.kappa_hat(a, -theta).unwrap();
        let rhs = a - m.laplace_exponent(-theta).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
    }
}
