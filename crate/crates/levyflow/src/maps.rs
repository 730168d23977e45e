//! Intermittent interval maps with a neutral fixed point.
//!
//! Two families are provided, both parametrised by a tail exponent
//! `alpha` in (1, 2) and both uniformly expanding away from their neutral
//! fixed points:
//!
//! * `Lsv`: two full branches on [0, 1/2) and [1/2, 1], neutral at 0,
//!   with return set Z = [1/2, 1];
//! * `Pm`: three full branches on [0, 1/3), [1/3, 2/3) and [2/3, 1],
//!   neutral at both 0 and 1, symmetric under y -> 1 - y, with return set
//!   Z = [1/3, 2/3].
//!
//! Near the neutral point(s) the map behaves like
//! `y (1 + (base * y)^(1/alpha))`, which makes the return time to Z
//! heavy-tailed with index `alpha`: escape from a neighbourhood of the
//! neutral point takes `~ k` steps from the `k`-th branch interval, and the
//! branch endpoints `a_k` decay like `alpha^alpha / base * k^(-alpha)`.
//!
//! The module computes orbits, first returns to Z, the branch-interval
//! endpoints `a_k` (by bisection on the defining recursion), and
//! orbit-based estimates of the invariant density and return-time tail that
//! downstream limit-law constants consume.

use rand::Rng;
use thiserror::Error;

/// Default iteration cap for first-return searches.
pub const DEFAULT_MAX_RETURN_ITER: u64 = 100_000_000;

/// Default histogram bin width for boundary-density estimation.
pub const DEFAULT_BIN_WIDTH: f64 = 1e-3;

/// Minimum number of observed returns below which orbit statistics are
/// considered meaningless.
pub const MIN_RETURNS: u64 = 1_000;

const ONE_THIRD: f64 = 1.0 / 3.0;
const TWO_THIRDS: f64 = 2.0 / 3.0;

/// Which map family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    /// Two-branch map, neutral fixed point at 0 only.
    Lsv,
    /// Three-branch symmetric map, neutral fixed points at 0 and 1.
    Pm,
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("tail exponent alpha must lie strictly inside (1, 2), got {0}")]
    InvalidAlpha(f64),
    #[error("orbit from {start} did not return to the return set within {max_iter} iterations")]
    NonReturning { start: f64, max_iter: u64 },
    #[error("bisection for branch point a_{k} stalled at residual {residual:e} (tolerance {tol:e})")]
    ToleranceNotReached { k: usize, residual: f64, tol: f64 },
    #[error("observed only {observed} returns, need at least {required} for stable statistics")]
    InsufficientReturns { observed: u64, required: u64 },
}

/// One first-return event: the return time and the landing point `f^tau(z)`.
#[derive(Clone, Copy, Debug)]
pub struct ReturnSample {
    pub tau: u64,
    pub point: f64,
}

/// Orbit-based estimates of invariant-measure quantities.
#[derive(Clone, Debug)]
pub struct InvariantStats {
    /// Density of the invariant probability measure at the lower endpoint of
    /// the return set, estimated from a histogram bin of width `bin_width`
    /// just inside the return set.
    pub h_boundary: f64,
    /// Mean return time to the return set.
    pub tau_bar: f64,
    /// `tail[k-1]` is the fraction of observed returns with `tau > k`.
    pub tail: Vec<f64>,
    /// Fraction of orbit points inside the return set.
    pub fraction_in_return_set: f64,
    /// Number of return events observed along the orbit.
    pub returns_observed: u64,
    /// Orbit length used.
    pub orbit_len: u64,
    /// Histogram bin width used for `h_boundary`.
    pub bin_width: f64,
}

impl InvariantStats {
    /// Kac defect `|tau_bar * mu(Z) - 1|`; zero in the limit of an infinite
    /// orbit because the mean return time is the reciprocal of the measure
    /// of the return set.
    pub fn kac_defect(&self) -> f64 {
        (self.tau_bar * self.fraction_in_return_set - 1.0).abs()
    }
}

/// Options for [`IntermittentMap::invariant_stats`].
#[derive(Clone, Copy, Debug)]
pub struct InvariantStatsOpts {
    pub orbit_len: u64,
    pub bin_width: f64,
    /// Track the empirical return-time tail up to this lag.
    pub tail_max: usize,
}

impl Default for InvariantStatsOpts {
    fn default() -> Self {
        Self { orbit_len: 10_000_000, bin_width: DEFAULT_BIN_WIDTH, tail_max: 64 }
    }
}

/// An intermittent interval map with fixed kind and tail exponent.
#[derive(Clone, Copy, Debug)]
pub struct IntermittentMap {
    kind: MapKind,
    alpha: f64,
    /// 1 / alpha.
    inv_alpha: f64,
    /// base^(1/alpha), the coefficient in the neutral branch.
    coef: f64,
}

impl IntermittentMap {
    pub fn new(kind: MapKind, alpha: f64) -> Result<Self, MapError> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(MapError::InvalidAlpha(alpha));
        }
        let base: f64 = match kind {
            MapKind::Lsv => 2.0,
            MapKind::Pm => 3.0,
        };
        Ok(Self { kind, alpha, inv_alpha: 1.0 / alpha, coef: base.powf(1.0 / alpha) })
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of full branches (2 or 3).
    pub fn base(&self) -> f64 {
        match self.kind {
            MapKind::Lsv => 2.0,
            MapKind::Pm => 3.0,
        }
    }

    /// The return set Z as a closed interval.
    pub fn return_set(&self) -> (f64, f64) {
        match self.kind {
            MapKind::Lsv => (0.5, 1.0),
            MapKind::Pm => (ONE_THIRD, TWO_THIRDS),
        }
    }

    pub fn in_return_set(&self, y: f64) -> bool {
        let (lo, hi) = self.return_set();
        (lo..=hi).contains(&y)
    }

    /// One step of the map. Defined on [0, 1]; the result is clamped to
    /// [0, 1] to absorb rounding at branch suprema.
    ///
    /// Rounding guard: just inside 1 the three-branch update
    /// `1 - w (1 + coef w^(1/alpha))` moves by `coef w^(1+1/alpha)`, which
    /// falls below half an ulp of 1 once `w` is around 1e-10. There the
    /// computed image equals the input and the orbit would freeze at a
    /// spurious fixed point; long orbits reach that strip every ~1e8 steps
    /// through near-misses of the branch-point ladder, which visibly
    /// poisons Birkhoff averages. When the image equals the input at a
    /// point that is not a genuine fixed point of the exact map, the orbit
    /// is advanced one ulp in the escape direction instead. The forced
    /// creep crosses the stalled strip in ~1e6 steps (the exact map takes
    /// comparably long), so return-time statistics are unaffected at any
    /// feasible sample size.
    pub fn step(&self, y: f64) -> f64 {
        let out = match self.kind {
            MapKind::Lsv => {
                if y < 0.5 {
                    y * (1.0 + self.coef * y.powf(self.inv_alpha))
                } else {
                    2.0 * y - 1.0
                }
            }
            MapKind::Pm => {
                if y < ONE_THIRD {
                    y * (1.0 + self.coef * y.powf(self.inv_alpha))
                } else if y < TWO_THIRDS {
                    3.0 * y - 1.0
                } else {
                    let w = 1.0 - y;
                    1.0 - w * (1.0 + self.coef * w.powf(self.inv_alpha))
                }
            }
        };
        let out = out.clamp(0.0, 1.0);
        if out == y && y > 0.0 && y < 1.0 {
            // neutral branches escape away from their endpoint; the only
            // other stall is an exactly representable repelling fixed
            // point (1/2 for the three-branch map), where either side
            // escapes
            return match self.kind {
                MapKind::Lsv => y.next_up(),
                MapKind::Pm if y < TWO_THIRDS => y.next_up(),
                MapKind::Pm => y.next_down(),
            };
        }
        out
    }

    /// The orbit `y0, f(y0), ..., f^len(y0)` (length `len + 1`).
    pub fn orbit(&self, y0: f64, len: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(len + 1);
        let mut y = y0;
        out.push(y);
        for _ in 0..len {
            y = self.step(y);
            out.push(y);
        }
        out
    }

    /// First return to the return set from `z` (which should lie in it):
    /// the smallest `tau >= 1` with `f^tau(z)` back in the set, together
    /// with the landing point.
    pub fn first_return(&self, z: f64, max_iter: u64) -> Result<ReturnSample, MapError> {
        let mut y = z;
        for tau in 1..=max_iter {
            y = self.step(y);
            if self.in_return_set(y) {
                return Ok(ReturnSample { tau, point: y });
            }
        }
        Err(MapError::NonReturning { start: z, max_iter })
    }

    /// A chain of successive first returns started from a uniform point of
    /// the return set, after a short burn-in. The return times sample the
    /// heavy-tailed return distribution; the landing points sample the
    /// induced invariant measure on Z.
    pub fn return_chain(
        &self,
        count: usize,
        max_iter: u64,
        rng: &mut impl Rng,
    ) -> Result<Vec<ReturnSample>, MapError> {
        const BURN_IN: usize = 100;
        let (lo, hi) = self.return_set();
        let mut z = lo + rng.random::<f64>() * (hi - lo);
        let mut out = Vec::with_capacity(count);
        for i in 0..count + BURN_IN {
            let sample = self.first_return(z, max_iter)?;
            z = sample.point;
            if i >= BURN_IN {
                out.push(sample);
            }
        }
        Ok(out)
    }

    /// Endpoints `a_1 > a_2 > ...` of the branch intervals accumulating at
    /// the neutral fixed point: `a_1` is the first branch cut (1/2 or 1/3)
    /// and `a_(k+1)` solves `x (1 + (base x)^(1/alpha)) = a_k`, i.e. the
    /// neutral branch maps `a_(k+1)` to `a_k`. Solved by bisection; errors
    /// if the residual at the bisected root exceeds `tol`.
    pub fn branch_points(&self, count: usize, tol: f64) -> Result<Vec<f64>, MapError> {
        let base = self.base();
        let mut out = Vec::with_capacity(count);
        let mut prev = 1.0 / base;
        out.push(prev);
        for k in 2..=count {
            let g = |x: f64| x * (1.0 + (base * x).powf(self.inv_alpha)) - prev;
            let mut lo = 0.0;
            let mut hi = prev;
            // g(0) = -prev < 0 and g(prev) > 0, so the root is bracketed;
            // bisect until the bracket collapses to adjacent floats.
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            let residual = g(root).abs();
            if residual >= tol {
                return Err(MapError::ToleranceNotReached { k, residual, tol });
            }
            out.push(root);
            prev = root;
        }
        Ok(out)
    }

    /// Leading-order prediction `a_k ~ alpha^alpha / base * k^(-alpha)` for
    /// the branch endpoints, with relative error O(log k / k).
    pub fn branch_point_asymptote(&self, k: u64) -> f64 {
        self.alpha.powf(self.alpha) / self.base() * (k as f64).powf(-self.alpha)
    }

    /// Estimate invariant-measure quantities along a single orbit started
    /// uniformly at random: the density just inside the return set, the
    /// mean return time, the return-time tail and the occupation fraction
    /// of the return set.
    pub fn invariant_stats(
        &self,
        opts: &InvariantStatsOpts,
        rng: &mut impl Rng,
    ) -> Result<InvariantStats, MapError> {
        const BURN_IN: u64 = 1_000;
        // double-precision orbits are eventually periodic; restarting from
        // a fresh point every few million steps keeps any spurious cycle
        // from dominating the tallies, at a burn-in cost of ~0.1%
        const SEGMENT_LEN: u64 = 1 << 22;
        let (lo, _) = self.return_set();

        let mut boundary_hits: u64 = 0;
        let mut in_set: u64 = 0;
        let mut returns: u64 = 0;
        let mut tau_sum: u64 = 0;
        let mut tail_counts = vec![0u64; opts.tail_max];

        let mut remaining = opts.orbit_len;
        while remaining > 0 {
            let seg = remaining.min(SEGMENT_LEN);
            remaining -= seg;
            let mut y = rng.random::<f64>();
            for _ in 0..BURN_IN {
                y = self.step(y);
            }
            // return intervals are only counted within a segment
            let mut last_visit: Option<u64> = None;
            for t in 0..seg {
                if y >= lo && y < lo + opts.bin_width {
                    boundary_hits += 1;
                }
                if self.in_return_set(y) {
                    in_set += 1;
                    if let Some(s) = last_visit {
                        let tau = t - s;
                        returns += 1;
                        tau_sum += tau;
                        // tail_counts[k-1] counts returns with tau > k
                        let upto = (tau.saturating_sub(1)).min(opts.tail_max as u64) as usize;
                        for c in tail_counts.iter_mut().take(upto) {
                            *c += 1;
                        }
                    }
                    last_visit = Some(t);
                }
                y = self.step(y);
            }
        }

        if returns < MIN_RETURNS {
            return Err(MapError::InsufficientReturns { observed: returns, required: MIN_RETURNS });
        }

        let n = opts.orbit_len as f64;
        Ok(InvariantStats {
            h_boundary: boundary_hits as f64 / n / opts.bin_width,
            tau_bar: tau_sum as f64 / returns as f64,
            tail: tail_counts.iter().map(|&c| c as f64 / returns as f64).collect(),
            fraction_in_return_set: in_set as f64 / n,
            returns_observed: returns,
            orbit_len: opts.orbit_len,
            bin_width: opts.bin_width,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::root_rng;
    use proptest::prelude::*;

    /// Branch points from a 50-digit bisection of the same recursion.
    const PM_A15_REFS: [(usize, f64); 6] = [
        (2, 0.1958932676192460584),
        (3, 0.12814344503438678391),
        (4, 0.090322070370408371611),
        (5, 0.067211179118764980834),
        (10, 0.024358796123994225914),
        (12, 0.018367194535633830085),
    ];
    const LSV_A15_REFS: [(usize, f64); 3] = [
        (2, 0.2938399014288690876),
        (3, 0.19221516755158017587),
        (5, 0.10081676867814747125),
    ];

    #[test]
    fn rejects_alpha_outside_open_interval() {
        for bad in [0.5, 1.0, 2.0, 2.5, f64::NAN] {
            assert!(IntermittentMap::new(MapKind::Pm, bad).is_err(), "alpha = {bad}");
        }
        assert!(IntermittentMap::new(MapKind::Pm, 1.0 + 1e-9).is_ok());
    }

    #[test]
    fn branch_points_match_high_precision_references() {
        let pm = IntermittentMap::new(MapKind::Pm, 1.5).unwrap();
        let pts = pm.branch_points(12, 1e-12).unwrap();
        assert_eq!(pts[0], ONE_THIRD);
        for (k, want) in PM_A15_REFS {
            let got = pts[k - 1];
            assert!(
                (got - want).abs() < 1e-13,
                "pm a_{k}: got {got}, want {want}"
            );
        }
        let lsv = IntermittentMap::new(MapKind::Lsv, 1.5).unwrap();
        let pts = lsv.branch_points(5, 1e-12).unwrap();
        assert_eq!(pts[0], 0.5);
        for (k, want) in LSV_A15_REFS {
            let got = pts[k - 1];
            assert!(
                (got - want).abs() < 1e-13,
                "lsv a_{k}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn step_sends_each_branch_point_to_the_previous_one() {
        // the step formula and the branch-point recursion are written
        // independently; f(a_{k+1}) = a_k ties them together
        for alpha in [1.1, 1.5, 1.9] {
            for kind in [MapKind::Lsv, MapKind::Pm] {
                let map = IntermittentMap::new(kind, alpha).unwrap();
                let pts = map.branch_points(20, 1e-12).unwrap();
                for k in 0..pts.len() - 1 {
                    let err = (map.step(pts[k + 1]) - pts[k]).abs();
                    assert!(err < 1e-12, "{kind:?} alpha={alpha} k={k}: err {err:e}");
                }
            }
        }
    }

    #[test]
    fn pm_map_is_symmetric_about_one_half() {
        let map = IntermittentMap::new(MapKind::Pm, 1.4).unwrap();
        for i in 0..=1000 {
            let y = i as f64 / 1000.0;
            let defect = (map.step(1.0 - y) - (1.0 - map.step(y))).abs();
            assert!(defect < 1e-13, "symmetry defect {defect:e} at y = {y}");
        }
    }

    #[test]
    fn neutral_fixed_points_are_fixed() {
        let pm = IntermittentMap::new(MapKind::Pm, 1.5).unwrap();
        assert_eq!(pm.step(0.0), 0.0);
        assert_eq!(pm.step(1.0), 1.0);
        let lsv = IntermittentMap::new(MapKind::Lsv, 1.5).unwrap();
        assert_eq!(lsv.step(0.0), 0.0);
        assert_eq!(lsv.step(1.0), 1.0);
    }

    #[test]
    fn known_first_returns() {
        let pm = IntermittentMap::new(MapKind::Pm, 1.5).unwrap();
        // 0.5 is the (repelling) fixed point of the middle branch; the
        // stall guard moves it one ulp so chains cannot sit on it
        let r = pm.first_return(0.5, 10).unwrap();
        assert_eq!(r.tau, 1);
        assert_eq!(r.point, 0.5f64.next_up());

        let lsv = IntermittentMap::new(MapKind::Lsv, 1.5).unwrap();
        let r = lsv.first_return(0.75, 10).unwrap();
        assert_eq!(r.tau, 1);
        assert_eq!(r.point, 0.5);
        // 0.6 -> 0.2 leaves Z and must climb back through the neutral branch
        let r = lsv.first_return(0.6, 10_000).unwrap();
        assert!(r.tau > 1);
        assert!(lsv.in_return_set(r.point));
    }

    #[test]
    fn sub_ulp_stall_near_one_is_nudged() {
        let pm = IntermittentMap::new(MapKind::Pm, 1.5).unwrap();
        // a state observed to freeze a long orbit before the stall guard:
        // its exact image sits under half an ulp of 1 away
        let y = f64::from_bits(0x3feffffffff52830);
        assert!(1.0 - y < 1.2e-10 && y < 1.0);
        let next = pm.step(y);
        assert_eq!(next, y.next_down(), "stalled state must creep towards escape");
        // the creep makes visible progress: five thousand steps cover at
        // least five thousand ulps, where the frozen orbit covered none
        let mut z = y;
        for _ in 0..5_000 {
            z = pm.step(z);
        }
        assert!(y - z >= 5_000.0 * (f64::EPSILON / 2.0), "creep too slow: {:e}", y - z);
        // points outside the stall strip are untouched by the guard
        let clear: f64 = 1.0 - 1e-6;
        let w = 1.0 - clear;
        let exact = 1.0 - w * (1.0 + pm.coef * w.powf(pm.inv_alpha));
        assert_eq!(pm.step(clear), exact);
    }

    #[test]
    fn orbit_hitting_neutral_point_never_returns() {
        // f(1/3) = 0 under the middle branch and 0 is fixed
        let pm = IntermittentMap::new(MapKind::Pm, 1.5).unwrap();
        match pm.first_return(ONE_THIRD, 1_000) {
            Err(MapError::NonReturning { max_iter: 1_000, .. }) => {}
            other => panic!("expected NonReturning, got {other:?}"),
        }
    }

    #[test]
    fn branch_point_asymptote_tracks_exact_values() {
        // relative error O(log k / k): generous envelope at k = 100
        for alpha in [1.3, 1.7] {
            let map = IntermittentMap::new(MapKind::Pm, alpha).unwrap();
            let pts = map.branch_points(100, 1e-12).unwrap();
            let rel = (pts[99] / map.branch_point_asymptote(100) - 1.0).abs();
            assert!(rel < 0.12, "alpha = {alpha}: rel {rel}");
        }
    }

    #[test]
    fn invariant_stats_satisfy_kac_and_tail_monotonicity() {
        let map = IntermittentMap::new(MapKind::Pm, 1.5).unwrap();
        let opts = InvariantStatsOpts { orbit_len: 1_000_000, ..Default::default() };
        let stats = map.invariant_stats(&opts, &mut root_rng(11)).unwrap();
        assert!(stats.kac_defect() < 0.05, "kac defect {}", stats.kac_defect());
        assert!(stats.tau_bar > 1.0);
        assert!(stats.h_boundary > 0.0);
        for w in stats.tail.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "tail must be non-increasing");
        }
        assert!(stats.tail[0] < 1.0, "some returns have tau = 1");
    }

    #[test]
    fn short_orbit_reports_insufficient_returns() {
        let map = IntermittentMap::new(MapKind::Pm, 1.5).unwrap();
        let opts = InvariantStatsOpts { orbit_len: 100, ..Default::default() };
        match map.invariant_stats(&opts, &mut root_rng(1)) {
            Err(MapError::InsufficientReturns { .. }) => {}
            other => panic!("expected InsufficientReturns, got {other:?}"),
        }
    }

    #[test]
    fn return_chain_is_reproducible_and_lands_in_z() {
        let map = IntermittentMap::new(MapKind::Lsv, 1.5).unwrap();
        let a = map.return_chain(500, DEFAULT_MAX_RETURN_ITER, &mut root_rng(5)).unwrap();
        let b = map.return_chain(500, DEFAULT_MAX_RETURN_ITER, &mut root_rng(5)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.tau, y.tau);
            assert_eq!(x.point, y.point);
        }
        assert!(a.iter().all(|s| map.in_return_set(s.point)));
        assert!(a.iter().all(|s| s.tau >= 1));
    }

    proptest! {
        #[test]
        fn step_preserves_unit_interval(
            y in 0.0f64..=1.0,
            alpha in 1.01f64..1.99,
            pm in proptest::bool::ANY,
        ) {
            let kind = if pm { MapKind::Pm } else { MapKind::Lsv };
            let map = IntermittentMap::new(kind, alpha).unwrap();
            let fy = map.step(y);
            prop_assert!((0.0..=1.0).contains(&fy), "f({y}) = {fy}");
        }

        #[test]
        fn first_return_map_expands_synchronised_pairs(
            seed in any::<u64>(),
            alpha in 1.05f64..1.95,
            pm in proptest::bool::ANY,
        ) {
            let kind = if pm { MapKind::Pm } else { MapKind::Lsv };
            let map = IntermittentMap::new(kind, alpha).unwrap();
            let (lo, hi) = map.return_set();
            let mut r = root_rng(seed);
            let z1 = lo + rand::Rng::random::<f64>(&mut r) * (hi - lo) * 0.999;
            let z2 = z1 + 1e-9;
            // walk the pair together; only same-itinerary pairs are
            // informative (they stay in one branch of the induced map)
            let mut y1 = z1;
            let mut y2 = z2;
            let mut synced = true;
            for _ in 0..200_000 {
                y1 = map.step(y1);
                y2 = map.step(y2);
                let c1 = map.in_return_set(y1);
                let c2 = map.in_return_set(y2);
                if c1 != c2 {
                    synced = false;
                    break;
                }
                if c1 {
                    break;
                }
            }
            prop_assume!(synced && map.in_return_set(y1));
            prop_assert!(
                (y1 - y2).abs() >= (z1 - z2).abs() * (1.0 - 1e-9),
                "induced map contracted: |Fz1 - Fz2| = {} < {}",
                (y1 - y2).abs(),
                (z1 - z2).abs()
            );
        }

        #[test]
        fn branch_points_decrease_and_stay_positive(
            alpha in 1.05f64..1.95,
            pm in proptest::bool::ANY,
        ) {
            let kind = if pm { MapKind::Pm } else { MapKind::Lsv };
            let map = IntermittentMap::new(kind, alpha).unwrap();
            let pts = map.branch_points(30, 1e-10).unwrap();
            for w in pts.windows(2) {
                prop_assert!(w[1] > 0.0 && w[1] < w[0]);
            }
        }
    }
}
