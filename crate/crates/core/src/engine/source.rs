//! Jump arrivals for the compound Poisson models.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::model::ModelSpec;

/// Supplies `(time since previous jump, signed jump size)` pairs. An
/// infinite time means no further jumps.
pub trait JumpSource {
    fn next_jump(&mut self) -> (f64, f64);

    /// Continue with the jump law of `model` from the next draw on.
    fn retarget(&mut self, _model: &ModelSpec) {}
}

/// Stream for replica `replica` of a batch seeded with `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Random arrivals drawn in a fixed order per event: inter-arrival time,
/// size, then (two-sided model only) the sign.
#[derive(Debug, Clone)]
pub struct RandomJumps {
    rng: ChaCha8Rng,
    total_rate: f64,
    up_prob: f64,
    up_rate: f64,
    down_rate: f64,
}

impl RandomJumps {
    /// Panics for the Brownian model, which has no jumps.
    pub fn new(model: &ModelSpec, rng: ChaCha8Rng) -> Self {
        let mut s = RandomJumps { rng, total_rate: 0.0, up_prob: 1.0, up_rate: 1.0, down_rate: 1.0 };
        s.retarget(model);
        s
    }
}

impl JumpSource for RandomJumps {
    fn retarget(&mut self, model: &ModelSpec) {
        let (total, up_prob, up_rate, down_rate) = match *model {
            ModelSpec::CramerLundberg { claim_intensity, claim_rate, .. } => (claim_intensity, 1.0, claim_rate, 1.0),
            ModelSpec::TwoSided { claim_intensity, claim_rate, gain_intensity, gain_rate, .. } => {
                let total = claim_intensity + gain_intensity;
                let up = if total > 0.0 { claim_intensity / total } else { 1.0 };
                (total, up, claim_rate, gain_rate)
            }
            ModelSpec::BrownianDrift { .. } => panic!("Brownian model has no jump source"),
        };
        self.total_rate = total;
        self.up_prob = up_prob;
        self.up_rate = up_rate;
        self.down_rate = down_rate;
    }

    fn next_jump(&mut self) -> (f64, f64) {
        if self.total_rate == 0.0 {
            return (f64::INFINITY, 0.0);
        }
        let wait: f64 = self.rng.sample::<f64, _>(Exp1) / self.total_rate;
        let size: f64 = self.rng.sample(Exp1);
        if self.up_prob < 1.0 {
            let coin: f64 = self.rng.random();
            if coin >= self.up_prob {
                return (wait, -size / self.down_rate);
            }
        }
        (wait, size / self.up_rate)
    }
}

/// Jumps at prescribed absolute times; used for hand-checked traces.
#[derive(Debug, Clone)]
pub struct ScriptedJumps {
    jumps: Vec<(f64, f64)>,
    next: usize,
    last_time: f64,
}

impl ScriptedJumps {
    /// `jumps` are `(absolute time, signed size)` in increasing time order.
    pub fn new(jumps: Vec<(f64, f64)>) -> Self {
        ScriptedJumps { jumps, next: 0, last_time: 0.0 }
    }
}

impl JumpSource for ScriptedJumps {
    fn next_jump(&mut self) -> (f64, f64) {
        match self.jumps.get(self.next) {
            Some(&(time, size)) => {
                self.next += 1;
                let wait = (time - self.last_time).max(0.0);
                self.last_time = time;
                (wait, size)
            }
            None => (f64::INFINITY, 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn scripted_waits_are_differences() {
        let mut s = ScriptedJumps::new(vec![(1.0, 2.0), (2.5, -1.0)]);
        assert_eq!(s.next_jump(), (1.0, 2.0));
        assert_eq!(s.next_jump(), (1.5, -1.0));
        assert_eq!(s.next_jump().0, f64::INFINITY);
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let m = ModelSpec::cramer_lundberg(1.5, 1.0, 1.0).unwrap();
        let mut a = RandomJumps::new(&m, replica_rng(7, 0));
        let mut b = RandomJumps::new(&m, replica_rng(7, 0));
        let mut c = RandomJumps::new(&m, replica_rng(7, 1));
        let (xa, xb, xc) = (a.next_jump(), b.next_jump(), c.next_jump());
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn two_sided_sign_frequency() {
        let m = ModelSpec::two_sided(1.5, 1.0, 1.0, 0.25, 2.0).unwrap();
        let mut s = RandomJumps::new(&m, replica_rng(3, 0));
        let n = 20_000;
        let down = (0..n).filter(|_| s.next_jump().1 < 0.0).count() as f64 / n as f64;
        assert!((down - 0.2).abs() < 0.015, "{down}");
    }
}
