use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{PairDistance, PointSet};

use super::{Decider, DecisionConfig};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RandomizedTrace {
    pub iterations: usize,
    pub decision_calls: usize,
    /// Number of strictly closer pairs seen after each sample.
    pub closer_counts: Vec<usize>,
}

/// Randomized search: sample a pair, collect every strictly closer pair,
/// resample among those, and stop when none (or exactly one) remain.
///
/// Uses ChaCha8 seeded with `seed`, so runs are reproducible across platforms.
pub fn closest_pair_randomized(
    points: &PointSet,
    seed: u64,
    config: &DecisionConfig,
) -> Result<PairDistance> {
    closest_pair_randomized_traced(points, seed, config).map(|(pair, _)| pair)
}

pub fn closest_pair_randomized_traced(
    points: &PointSet,
    seed: u64,
    config: &DecisionConfig,
) -> Result<(PairDistance, RandomizedTrace)> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decider = Decider::new(points, config);
    let mut trace = RandomizedTrace::default();

    // Uniform over unordered pairs.
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let mut sample = PairDistance::new(i, j, decider.distance(i, j));

    let result = loop {
        let closer = decider.decide(sample.dist, true)?;
        trace.iterations += 1;
        if let Some(&previous) = trace.closer_counts.last() {
            assert!(closer.len() < previous, "closer-pair set failed to shrink");
        }
        trace.closer_counts.push(closer.len());
        match closer.pairs.as_slice() {
            [] => break sample,
            [(a, b)] => break PairDistance::new(*a, *b, decider.distance(*a, *b)),
            pairs => {
                let (a, b) = pairs[rng.gen_range(0..pairs.len())];
                sample = PairDistance::new(a, b, decider.distance(a, b));
            }
        }
    };
    trace.decision_calls = decider.calls();
    Ok((result, trace))
}
