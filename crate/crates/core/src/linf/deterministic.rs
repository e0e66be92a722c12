//! Deterministic search for the closest-pair distance.
//!
//! The optimum is a coordinate difference `q_t[k] - q_i[k]` between two
//! points in the sorted order of some coordinate. For every `(k, i)` we keep
//! the range of later positions whose differences still lie strictly inside
//! the bracket `(lower, upper)`, where `lower` is infeasible and `upper` is
//! feasible. Each round probes the midpoint difference of every range,
//! bisects those values with the decision procedure, and cuts every range in
//! half. Once few differences remain they are enumerated and bisected
//! directly.

use crate::error::{Error, Result};
use crate::geometry::{linf, PairDistance, PointSet, RankTable};

use super::{closest_pair_bruteforce, Decider, DecisionConfig, ThresholdReport};

/// Surviving-difference count at which enumeration takes over (at least `2d`).
pub const ENUMERATION_THRESHOLD: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeterministicOptions {
    /// Recompute the optimum by brute force and assert the bracket and
    /// halving invariants after every round.
    pub verify_invariants: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundStats {
    pub surviving_before: usize,
    pub surviving_after: usize,
    /// Distinct midpoint differences probed this round.
    pub candidates: usize,
    pub decision_calls: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchTrace {
    pub rounds: Vec<RoundStats>,
    /// Distinct differences enumerated in the final bisection.
    pub final_candidates: usize,
    pub decision_calls: usize,
    /// The duplicate check at `delta = 0` answered the query.
    pub duplicate_shortcut: bool,
}

/// Positions `lo..hi` of `order[k]` paired with the point at position `anchor`.
#[derive(Debug, Clone, Copy)]
struct Range {
    k: usize,
    anchor: usize,
    lo: usize,
    hi: usize,
}

impl Range {
    fn len(&self) -> usize {
        self.hi - self.lo
    }
}

struct Sorted<'a> {
    points: &'a PointSet,
    ranks: RankTable,
}

impl Sorted<'_> {
    #[inline]
    fn value(&self, k: usize, pos: usize) -> f64 {
        self.points.point(self.ranks.order(k)[pos])[k]
    }

    /// `q_pos[k] - q_anchor[k]` in coordinate `k`'s sorted order.
    #[inline]
    fn diff(&self, k: usize, anchor: usize, pos: usize) -> f64 {
        self.value(k, pos) - self.value(k, anchor)
    }
}

pub fn closest_pair_deterministic(
    points: &PointSet,
    config: &DecisionConfig,
) -> Result<PairDistance> {
    closest_pair_deterministic_traced(points, config, DeterministicOptions::default())
        .map(|(pair, _)| pair)
}

pub fn closest_pair_deterministic_traced(
    points: &PointSet,
    config: &DecisionConfig,
    options: DeterministicOptions,
) -> Result<(PairDistance, SearchTrace)> {
    let (n, d) = (points.len(), points.dim());
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let decider = Decider::new(points, config);
    let mut trace = SearchTrace::default();

    // The bracket below excludes zero, so coincident points are settled first.
    let zero = decider.decide(0.0, false)?;
    if let Some(&(i, j)) = zero.pairs.first() {
        trace.duplicate_shortcut = true;
        trace.decision_calls = decider.calls();
        return Ok((PairDistance::new(i, j, 0.0), trace));
    }

    let optimum = if options.verify_invariants {
        Some(closest_pair_bruteforce(points)?.dist)
    } else {
        None
    };

    let sorted = Sorted {
        points,
        ranks: RankTable::build(points),
    };
    let mut lower = 0.0;
    let mut upper = decider.distance(0, 1) + 1.0;
    let mut upper_report: Option<ThresholdReport> = None;

    let mut ranges: Vec<Range> = Vec::new();
    for k in 0..d {
        for anchor in 0..n - 1 {
            let tail = anchor + 1..n;
            let lo = anchor + 1 + partition(tail.clone(), |t| sorted.diff(k, anchor, t) <= lower);
            let hi = anchor + 1 + partition(tail, |t| sorted.diff(k, anchor, t) < upper);
            if lo < hi {
                ranges.push(Range { k, anchor, lo, hi });
            }
        }
    }
    let mut surviving: usize = ranges.iter().map(Range::len).sum();
    let threshold = ENUMERATION_THRESHOLD.max(2 * d);

    while surviving > threshold {
        let calls_before = decider.calls();
        let mids: Vec<f64> = ranges
            .iter()
            .map(|r| sorted.diff(r.k, r.anchor, r.lo + r.len() / 2))
            .collect();
        let mut candidates = mids.clone();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();

        let (first_feasible, report) = smallest_feasible(&candidates, &decider)?;
        if let Some(report) = report {
            upper = candidates[first_feasible];
            upper_report = Some(report);
        }
        if first_feasible > 0 {
            lower = candidates[first_feasible - 1];
        }

        for (range, &mid_value) in ranges.iter_mut().zip(&mids) {
            let mid = range.lo + range.len() / 2;
            if mid_value <= lower {
                range.lo = mid + 1;
            } else {
                debug_assert!(mid_value >= upper);
                range.hi = mid;
            }
        }
        // The bracket may have moved past values kept by the halving step.
        for range in ranges.iter_mut() {
            let (k, anchor) = (range.k, range.anchor);
            range.lo += partition(range.lo..range.hi, |t| sorted.diff(k, anchor, t) <= lower);
            range.hi =
                range.lo + partition(range.lo..range.hi, |t| sorted.diff(k, anchor, t) < upper);
        }
        ranges.retain(|r| r.lo < r.hi);
        let after: usize = ranges.iter().map(Range::len).sum();

        if let Some(opt) = optimum {
            assert!(
                lower < opt && opt <= upper,
                "optimum {opt} left ({lower}, {upper}]"
            );
            assert!(2 * after <= surviving, "round kept {after} of {surviving}");
        }
        trace.rounds.push(RoundStats {
            surviving_before: surviving,
            surviving_after: after,
            candidates: candidates.len(),
            decision_calls: decider.calls() - calls_before,
            lower,
            upper,
        });
        surviving = after;
    }

    // Enumerate what is left; `upper` is feasible and above every survivor.
    let mut finals: Vec<f64> = ranges
        .iter()
        .flat_map(|r| (r.lo..r.hi).map(move |t| (r.k, r.anchor, t)))
        .map(|(k, anchor, t)| sorted.diff(k, anchor, t))
        .collect();
    finals.sort_by(f64::total_cmp);
    finals.dedup();
    trace.final_candidates = finals.len() + 1;
    let (idx, report) = smallest_feasible(&finals, &decider)?;
    let report = match report {
        Some(report) => report,
        None => match upper_report {
            Some(report) => report,
            None => decider.decide(upper, false)?,
        },
    };
    let best = if idx < finals.len() {
        finals[idx]
    } else {
        upper
    };
    debug_assert_eq!(report.delta, best);
    if let Some(opt) = optimum {
        assert_eq!(best, opt);
    }

    // Every reported pair is within `best`, and nothing closer exists.
    let &(i, j) = report
        .pairs
        .first()
        .expect("feasible threshold reports a pair");
    let dist = linf(points.point(i), points.point(j));
    debug_assert_eq!(dist, best);
    trace.decision_calls = decider.calls();
    Ok((PairDistance::new(i, j, dist), trace))
}

/// Number of leading positions in `range` satisfying `pred` (which must hold
/// on a prefix).
fn partition(range: std::ops::Range<usize>, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (range.start, range.end);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo - range.start
}

/// Bisects sorted `candidates` for the first feasible one, treating the
/// position past the end as feasible. Returns its index and, when it is a
/// real candidate, the decision report at that threshold.
fn smallest_feasible(
    candidates: &[f64],
    decider: &Decider<'_>,
) -> Result<(usize, Option<ThresholdReport>)> {
    let (mut lo, mut hi) = (0, candidates.len());
    let mut best = None;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let report = decider.decide(candidates[mid], false)?;
        if report.is_empty() {
            lo = mid + 1;
        } else {
            hi = mid;
            best = Some(report);
        }
    }
    let report = best.filter(|r| lo < candidates.len() && r.delta == candidates[lo]);
    Ok((lo, report))
}
