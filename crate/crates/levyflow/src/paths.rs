//! Cadlag sample paths and exact p-variation.
//!
//! A [`CadlagPath`] is a right-continuous piecewise-constant path recorded
//! at strictly increasing sample times, the first of which is 0. Values are
//! post-jump: the path jumps from `point(k-1)` to `point(k)` at
//! `times[k]` and holds `point(k)` until the next sample time.
//!
//! For paths observed at finitely many times the p-variation supremum over
//! all partitions is attained on partitions made of sample times only
//! (dropping a non-sample point from a partition never decreases the sum),
//! so p-variation reduces to a finite maximisation over subsequences. Three
//! implementations are provided:
//!
//! * [`p_variation`]: a pruned dynamic program that organises prefix points
//!   into dyadic blocks and skips whole blocks whose radius bound shows they
//!   cannot improve the running maximum. Exact, near-linear in practice;
//! * [`p_variation_reference`]: the plain quadratic dynamic program;
//! * [`p_variation_bruteforce`]: exhaustive enumeration of all
//!   subsequences, limited to 14 points.
//!
//! All three return the p-variation norm `(sup sum |increment|^p)^(1/p)` and
//! are cross-checked against each other in tests.

use crate::util::{all_finite, dist, sub};
use thiserror::Error;

/// Hard cap for [`p_variation_bruteforce`]: 2^(n-2) subsequences.
pub const BRUTEFORCE_MAX_POINTS: usize = 14;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("a path needs at least one sample time")]
    EmptyTimes,
    #[error("sample times must start at 0, got {0}")]
    FirstTimeNotZero(f64),
    #[error("sample times must be strictly increasing (violated at index {index})")]
    TimesNotIncreasing { index: usize },
    #[error("expected {expected} values for {times} times in dimension {dim}, got {got}")]
    LengthMismatch { expected: usize, got: usize, times: usize, dim: usize },
    #[error("path contains a non-finite coordinate at sample {index}")]
    NonFinite { index: usize },
    #[error("horizon {horizon} lies before the last sample time {last}")]
    HorizonBeforeLastTime { horizon: f64, last: f64 },
    #[error("brute-force p-variation is limited to {BRUTEFORCE_MAX_POINTS} points, got {n}")]
    TooLarge { n: usize },
}

/// Piecewise-constant cadlag path in `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct CadlagPath {
    dim: usize,
    times: Vec<f64>,
    values: Vec<f64>,
    horizon: f64,
}

impl CadlagPath {
    /// Build a path from samples. `values` is row-major: sample `k`
    /// occupies `values[k*dim .. (k+1)*dim]`. The horizon must not precede
    /// the last sample time.
    pub fn new(
        dim: usize,
        times: Vec<f64>,
        values: Vec<f64>,
        horizon: f64,
    ) -> Result<Self, PathError> {
        assert!(dim >= 1, "dimension must be positive");
        if times.is_empty() {
            return Err(PathError::EmptyTimes);
        }
        if times[0] != 0.0 {
            return Err(PathError::FirstTimeNotZero(times[0]));
        }
        for i in 1..times.len() {
            if !(times[i] > times[i - 1]) {
                return Err(PathError::TimesNotIncreasing { index: i });
            }
        }
        if values.len() != times.len() * dim {
            return Err(PathError::LengthMismatch {
                expected: times.len() * dim,
                got: values.len(),
                times: times.len(),
                dim,
            });
        }
        if let Some(bad) = values.chunks_exact(dim).position(|v| !all_finite(v)) {
            return Err(PathError::NonFinite { index: bad });
        }
        let last = *times.last().unwrap();
        if !(horizon >= last) || !horizon.is_finite() {
            return Err(PathError::HorizonBeforeLastTime { horizon, last });
        }
        Ok(Self { dim, times, values, horizon })
    }

    /// Path on the uniform grid `k * horizon / n` obtained by summing the
    /// given increments, starting from the origin. `increments` holds `n`
    /// rows of `dim` entries.
    pub fn from_uniform_increments(
        dim: usize,
        increments: &[f64],
        horizon: f64,
    ) -> Result<Self, PathError> {
        assert_eq!(increments.len() % dim, 0);
        let n = increments.len() / dim;
        let mut times = Vec::with_capacity(n + 1);
        let mut values = vec![0.0; (n + 1) * dim];
        times.push(0.0);
        for k in 0..n {
            times.push((k + 1) as f64 * horizon / n as f64);
            for c in 0..dim {
                values[(k + 1) * dim + c] = values[k * dim + c] + increments[k * dim + c];
            }
        }
        Self::new(dim, times, values, horizon)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples (including the one at time 0).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a valid path always has at least one sample
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn end_value(&self) -> &[f64] {
        self.point(self.len() - 1)
    }

    /// Right-continuous evaluation: the value at the last sample time <= t.
    pub fn value_at(&self, t: f64) -> &[f64] {
        assert!(
            (0.0..=self.horizon).contains(&t),
            "t = {t} outside [0, {}]",
            self.horizon
        );
        let k = self.times.partition_point(|&s| s <= t);
        self.point(k.saturating_sub(1).min(self.len() - 1))
    }

    /// The `k`-th increment (k >= 1), written into `out`.
    pub fn increment_into(&self, k: usize, out: &mut [f64]) {
        sub(self.point(k), self.point(k - 1), out);
    }

    /// Euclidean magnitude of the `k`-th increment (k >= 1).
    pub fn increment_magnitude(&self, k: usize) -> f64 {
        dist(self.point(k), self.point(k - 1))
    }

    /// Sum of squared increment magnitudes; the small-jump control quantity
    /// in forward-versus-Marcus gap bounds.
    pub fn jump_sum_sq(&self) -> f64 {
        (1..self.len()).map(|k| { let d = self.increment_magnitude(k); d * d }).sum()
    }

    /// Largest increment magnitude (0 for a single-sample path).
    pub fn max_jump(&self) -> f64 {
        (1..self.len()).map(|k| self.increment_magnitude(k)).fold(0.0, f64::max)
    }

    /// Exact p-variation norm over the sample points.
    pub fn p_variation(&self, p: f64) -> f64 {
        p_variation(&self.values, self.dim, p)
    }
}

fn check_p(p: f64) {
    assert!(p >= 1.0 && p.is_finite(), "p-variation needs finite p >= 1, got {p}");
}

/// Exact p-variation norm of a point sequence (row-major, `dim` columns).
///
/// Dynamic program over prefixes with dyadic-block pruning: points are
/// grouped into blocks of length `2^l`; each block stores the radius of the
/// ball around its centre point containing all its members, and a whole
/// block of candidate predecessors is skipped when centre distance plus
/// radius cannot beat the required improvement distance. The result is
/// exactly the quadratic dynamic program's, only faster.
pub fn p_variation(values: &[f64], dim: usize, p: f64) -> f64 {
    check_p(p);
    p_variation_sum(values, dim, p).powf(1.0 / p)
}

/// Plain quadratic dynamic program for the same quantity; kept as an
/// independent cross-check for the pruned version.
pub fn p_variation_reference(values: &[f64], dim: usize, p: f64) -> f64 {
    check_p(p);
    let n = values.len() / dim;
    if n < 2 {
        return 0.0;
    }
    let pt = |i: usize| &values[i * dim..(i + 1) * dim];
    let mut run = vec![0.0f64; n];
    for j in 1..n {
        let mut best = f64::NEG_INFINITY;
        for m in 0..j {
            let cand = run[m] + dist(pt(m), pt(j)).powf(p);
            if cand > best {
                best = cand;
            }
        }
        run[j] = best;
    }
    run[n - 1].powf(1.0 / p)
}

/// Exhaustive p-variation over all subsequences containing the endpoints.
/// Exponential in the number of points; refuses more than
/// [`BRUTEFORCE_MAX_POINTS`].
pub fn p_variation_bruteforce(values: &[f64], dim: usize, p: f64) -> Result<f64, PathError> {
    check_p(p);
    let n = values.len() / dim;
    if n > BRUTEFORCE_MAX_POINTS {
        return Err(PathError::TooLarge { n });
    }
    if n < 2 {
        return Ok(0.0);
    }
    let pt = |i: usize| &values[i * dim..(i + 1) * dim];
    let interior = n - 2;
    let mut best = 0.0f64;
    for mask in 0u32..(1 << interior) {
        let mut sum = 0.0;
        let mut prev = 0usize;
        for b in 0..interior {
            if mask >> b & 1 == 1 {
                let here = b + 1;
                sum += dist(pt(prev), pt(here)).powf(p);
                prev = here;
            }
        }
        sum += dist(pt(prev), pt(n - 1)).powf(p);
        if sum > best {
            best = sum;
        }
    }
    Ok(best.powf(1.0 / p))
}

/// The supremum of `sum |increment|^p` itself (no 1/p root).
pub fn p_variation_sum(values: &[f64], dim: usize, p: f64) -> f64 {
    check_p(p);
    let n = values.len() / dim;
    if n < 2 {
        return 0.0;
    }
    let pt = |i: usize| &values[i * dim..(i + 1) * dim];
    let s = n - 1;
    let mut levels = 0usize;
    while (s >> levels) > 0 {
        levels += 1;
    }
    // Block bookkeeping. Level l >= 1 groups indices into blocks of 2^l;
    // the block of index j starts at (j >> l) << l and its centre is the
    // start plus 2^(l-1). radius[(s >> l) + (j >> l)] bounds the distance
    // from the centre to every block member folded in so far. The last
    // block at a level is unusable when bit l-1 of s is 0: its centre
    // index would exceed s (and its slot would collide with the next
    // level's region), so the guard below excludes exactly that case.
    let slot = |j: usize, l: usize| (s >> l) + (j >> l);
    let centre = |j: usize, l: usize| ((j >> l) << l) + (1usize << (l - 1));
    let usable = |j: usize, l: usize| !((j >> l) == (s >> l) && (s >> (l - 1)) & 1 == 0);
    let mut radius = vec![0.0f64; s];
    // run[j]: maximal sum of |increment|^p over subsequences of 0..=j
    // ending at j; non-decreasing in j because appending j to the best
    // subsequence for j-1 never lowers the sum.
    let mut run = vec![0.0f64; n];

    for j in 0..n {
        for l in 1..=levels {
            if usable(j, l) {
                let r = &mut radius[slot(j, l)];
                let d = dist(pt(centre(j, l)), pt(j));
                if d > *r {
                    *r = d;
                }
            }
        }
        if j == 0 {
            continue;
        }
        let vj = pt(j);
        let mut m = j - 1;
        // delta is maintained as a lower bound for the distance a candidate
        // at index <= m must reach to improve `best` (run is non-decreasing,
        // so the exact requirement only grows as m decreases).
        let mut delta = dist(pt(m), vj);
        let mut best = run[m] + delta.powf(p);
        let mut l = 0usize;
        while m > 0 {
            while l < levels && (m >> l) & 1 == 0 {
                l += 1;
            }
            m -= 1;
            let mut skipped = false;
            let mut delta_fresh = false;
            while l > 0 {
                if usable(m, l) {
                    let reach = radius[slot(m, l)] + dist(pt(centre(m, l)), vj);
                    if delta >= reach {
                        skipped = true;
                        break;
                    }
                    if !delta_fresh {
                        delta = (best - run[m]).max(0.0).powf(1.0 / p);
                        delta_fresh = true;
                        if delta >= reach {
                            skipped = true;
                            break;
                        }
                    }
                }
                l -= 1;
            }
            if skipped {
                // the whole block [block start, m] cannot improve `best`
                m = (m >> l) << l;
                continue;
            }
            let d = dist(pt(m), vj);
            if d >= delta {
                let cand = run[m] + d.powf(p);
                if cand >= best {
                    best = cand;
                    delta = d;
                }
            }
        }
        run[j] = best;
    }
    run[n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// 8-point planar path whose exhaustive p-variation was computed
    /// independently with 40-digit arithmetic.
    const PLANAR: [f64; 16] = [
        0.0, 0.0, 1.0, -0.5, 0.2, 0.3, 0.9, 1.1, -0.4, 0.7, 0.1, 0.0, 1.3, -0.2, 0.6, 0.4,
    ];
    const PLANAR_REFS: [(f64, f64); 3] = [
        (2.5, 2.7622420046610473258),
        (1.0, 7.6713059492885755085),
        (6.0, 2.1267148433687623265),
    ];
    /// 10-point scalar path with sign changes, same provenance.
    const SCALAR: [f64; 10] = [0.0, 0.4, 0.1, 0.9, 0.8, 1.4, -0.3, -0.1, -0.6, 0.2];
    const SCALAR_REF_P17: f64 = 2.8224091545659085779;

    #[test]
    fn all_three_implementations_match_frozen_references() {
        for (p, want) in PLANAR_REFS {
            let fast = p_variation(&PLANAR, 2, p);
            let refr = p_variation_reference(&PLANAR, 2, p);
            let brute = p_variation_bruteforce(&PLANAR, 2, p).unwrap();
            for (name, got) in [("pruned", fast), ("reference", refr), ("brute", brute)] {
                assert!(
                    (got - want).abs() < 1e-12,
                    "{name} p={p}: got {got}, want {want}"
                );
            }
        }
        let got = p_variation(&SCALAR, 1, 1.7);
        assert!((got - SCALAR_REF_P17).abs() < 1e-12, "scalar p=1.7: {got}");
    }

    #[test]
    fn two_point_path_has_pvar_equal_to_increment() {
        let v = [1.0, 2.0, 4.0, -2.0];
        for p in [1.0, 1.5, 3.0] {
            let want = 5.0; // dist((1,2),(4,-2))
            assert!((p_variation(&v, 2, p) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone_scalar_path_has_pvar_equal_to_total_displacement() {
        let v: Vec<f64> = (0..50).map(|i| (i as f64).sqrt()).collect();
        let want = v[49] - v[0];
        for p in [1.0, 1.3, 2.0, 4.0] {
            let got = p_variation(&v, 1, p);
            assert!((got - want).abs() < 1e-12, "p = {p}: {got} vs {want}");
        }
    }

    #[test]
    fn total_variation_of_zigzag_sums_all_moves() {
        let v = [0.0, 1.0, -1.0, 2.0, 0.5];
        let want = 1.0 + 2.0 + 3.0 + 1.5;
        assert!((p_variation(&v, 1, 1.0) - want).abs() < 1e-13);
    }

    #[test]
    fn bruteforce_refuses_large_inputs() {
        let v = vec![0.0; 15];
        match p_variation_bruteforce(&v, 1, 2.0) {
            Err(PathError::TooLarge { n: 15 }) => {}
            other => panic!("expected TooLarge, got {other:?}"),
        }
    }

    #[test]
    fn path_validation_catches_malformed_inputs() {
        assert!(matches!(
            CadlagPath::new(1, vec![], vec![], 1.0),
            Err(PathError::EmptyTimes)
        ));
        assert!(matches!(
            CadlagPath::new(1, vec![0.1, 0.2], vec![0.0, 1.0], 1.0),
            Err(PathError::FirstTimeNotZero(_))
        ));
        assert!(matches!(
            CadlagPath::new(1, vec![0.0, 0.2, 0.2], vec![0.0; 3], 1.0),
            Err(PathError::TimesNotIncreasing { index: 2 })
        ));
        assert!(matches!(
            CadlagPath::new(2, vec![0.0, 0.5], vec![0.0; 3], 1.0),
            Err(PathError::LengthMismatch { .. })
        ));
        assert!(matches!(
            CadlagPath::new(1, vec![0.0, 0.5], vec![0.0, f64::NAN], 1.0),
            Err(PathError::NonFinite { index: 1 })
        ));
        assert!(matches!(
            CadlagPath::new(1, vec![0.0, 0.5], vec![0.0, 1.0], 0.4),
            Err(PathError::HorizonBeforeLastTime { .. })
        ));
    }

    #[test]
    fn value_at_is_right_continuous_with_left_limits() {
        let path =
            CadlagPath::new(1, vec![0.0, 0.25, 0.5], vec![1.0, 2.0, 3.0], 1.0).unwrap();
        assert_eq!(path.value_at(0.0), &[1.0]);
        assert_eq!(path.value_at(0.24), &[1.0]);
        assert_eq!(path.value_at(0.25), &[2.0]); // right-continuous at jumps
        assert_eq!(path.value_at(0.49), &[2.0]);
        assert_eq!(path.value_at(0.5), &[3.0]);
        assert_eq!(path.value_at(1.0), &[3.0]);
    }

    #[test]
    fn jump_statistics_match_hand_computation() {
        let path = CadlagPath::new(
            2,
            vec![0.0, 1.0, 2.0],
            vec![0.0, 0.0, 3.0, 4.0, 3.0, 1.0],
            2.0,
        )
        .unwrap();
        assert!((path.jump_sum_sq() - (25.0 + 9.0)).abs() < 1e-14);
        assert!((path.max_jump() - 5.0).abs() < 1e-14);
        assert!((path.increment_magnitude(2) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_increment_constructor_cumulates() {
        let path = CadlagPath::from_uniform_increments(1, &[1.0, -2.0, 0.5], 1.0).unwrap();
        assert_eq!(path.times(), &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(path.values(), &[0.0, 1.0, -1.0, -0.5]);
    }

    fn arb_points(max_len: usize) -> impl Strategy<Value = (Vec<f64>, usize)> {
        (1usize..=3).prop_flat_map(move |dim| {
            proptest::collection::vec(-10.0f64..10.0, dim * 2..=dim * max_len)
                .prop_map(move |mut v| {
                    v.truncate(v.len() / dim * dim);
                    (v, dim)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pruned_matches_reference((v, dim) in arb_points(120), p in 1.0f64..6.0) {
            let a = p_variation(&v, dim, p);
            let b = p_variation_reference(&v, dim, p);
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b), "pruned {a} vs reference {b}");
        }

        #[test]
        fn reference_matches_bruteforce((v, dim) in arb_points(11), p in 1.0f64..6.0) {
            let a = p_variation_reference(&v, dim, p);
            let b = p_variation_bruteforce(&v, dim, p).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b), "reference {a} vs brute {b}");
        }

        #[test]
        fn pvar_norm_is_nonincreasing_in_p((v, dim) in arb_points(60), p in 1.0f64..4.0, dq in 0.1f64..3.0) {
            let lo = p_variation(&v, dim, p);
            let hi = p_variation(&v, dim, p + dq);
            prop_assert!(hi <= lo * (1.0 + 1e-9), "pvar({}) = {hi} > pvar({p}) = {lo}", p + dq);
        }

        #[test]
        fn pvar_is_positively_homogeneous((v, dim) in arb_points(40), p in 1.0f64..5.0, c in -3.0f64..3.0) {
            let base = p_variation(&v, dim, p);
            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            let got = p_variation(&scaled, dim, p);
            prop_assert!((got - c.abs() * base).abs() <= 1e-9 * (1.0 + base), "{got} vs {}", c.abs() * base);
        }

        #[test]
        fn pvar_dominates_endpoint_increment((v, dim) in arb_points(60), p in 1.0f64..5.0) {
            let n = v.len() / dim;
            let end = crate::util::dist(&v[..dim], &v[(n - 1) * dim..]);
            prop_assert!(p_variation(&v, dim, p) >= end - 1e-12);
        }
    }
}
