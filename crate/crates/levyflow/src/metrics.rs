//! Computable upper bounds for Skorokhod-type path distances.
//!
//! Both metrics are evaluated as minimax dynamic-time-warping distances
//! over monotone couplings of finite vertex sequences, with the Skorokhod
//! cost `max(|time gap|, |value gap|)` per coupled pair. Restricting the
//! reparametrisations to monotone couplings of sampled vertices can only
//! overestimate the true infimum, so the returned values are upper bounds;
//! on the step and piecewise-linear paths used throughout this crate they
//! tighten to the exact distances as `grid_resolution` shrinks.
//!
//! The two topologies differ in how a jump may be matched:
//!
//! * [`sj1_distance`] requires jumps to line up with jumps. Its couplings
//!   walk the corner sequences of both paths (each jump contributes a pre-
//!   and post-jump corner at the same time), and a move that crosses one
//!   path's jump may not simultaneously cross a positive-duration stretch
//!   of the other, since an instantaneous jump cannot absorb elapsed time
//!   on the other side.
//! * [`sm1_distance`] walks completed graphs: jump segments are filled
//!   linearly (jointly across coordinates) and subdivided at the grid
//!   resolution, so a jump may also be matched by a steep run of small
//!   increments.
//! * [`sm1_embedded_distance`] is the completed-graph distance for
//!   already-continuous embedded polylines, used to compare paths opened
//!   with different bridge rules.

use crate::embed::EmbeddedPath;
use crate::paths::CadlagPath;
use crate::util::dist;

/// Default refinement resolution for the metric couplings.
pub const DEFAULT_GRID_RESOLUTION: f64 = 1.0 / 1024.0;

/// Vertex sequence with nondecreasing times; equal consecutive times mark
/// jump risers.
struct Polyline {
    dim: usize,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Polyline {
    fn len(&self) -> usize {
        self.times.len()
    }

    fn vertex(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Whether the edge arriving at vertex `k` is a riser (zero duration).
    fn riser_into(&self, k: usize) -> bool {
        self.times[k] == self.times[k - 1]
    }

    /// Corner sequence of a step path: post-jump samples plus a pre-jump
    /// corner at every actual jump, closed with the horizon endpoint.
    fn corners(path: &CadlagPath) -> Self {
        let dim = path.dim();
        let n = path.len();
        let mut times = Vec::with_capacity(2 * n);
        let mut values = Vec::with_capacity(2 * n * dim);
        times.push(path.times()[0]);
        values.extend_from_slice(path.point(0));
        for k in 1..n {
            if path.increment_magnitude(k) > 0.0 {
                times.push(path.times()[k]);
                values.extend_from_slice(path.point(k - 1));
            }
            times.push(path.times()[k]);
            values.extend_from_slice(path.point(k));
        }
        if path.horizon() > *path.times().last().unwrap() {
            times.push(path.horizon());
            values.extend_from_slice(path.end_value());
        }
        Polyline { dim, times, values }
    }

    fn from_embedded(e: &EmbeddedPath) -> Self {
        Polyline { dim: e.dim(), times: e.times().to_vec(), values: e.values().to_vec() }
    }

    /// Subdivide every edge whose span exceeds `grid`. The span is the
    /// time gap alone when `by_time_only` (runs of a step path carry
    /// constant values, and risers must stay unsplit so jumps remain
    /// atomic), otherwise the larger of time gap and value displacement.
    fn refine(self, grid: f64, by_time_only: bool) -> Self {
        assert!(grid > 0.0, "grid resolution must be positive");
        let dim = self.dim;
        let n = self.len();
        let mut times = Vec::with_capacity(2 * n);
        let mut values = Vec::with_capacity(2 * n * dim);
        times.push(self.times[0]);
        values.extend_from_slice(self.vertex(0));
        for k in 1..n {
            let dt = self.times[k] - self.times[k - 1];
            let span = if by_time_only {
                dt
            } else {
                dt.max(dist(self.vertex(k), self.vertex(k - 1)))
            };
            let pieces = if span > grid { (span / grid).ceil() as usize } else { 1 };
            let (prev, next) = (self.vertex(k - 1), self.vertex(k));
            for j in 1..pieces {
                let s = j as f64 / pieces as f64;
                times.push(self.times[k - 1] + s * dt);
                for i in 0..dim {
                    values.push(prev[i] + s * (next[i] - prev[i]));
                }
            }
            times.push(self.times[k]);
            values.extend_from_slice(next);
        }
        Polyline { dim, times, values }
    }
}

/// Minimax cost over monotone couplings of the two vertex sequences.
/// `sync_jumps` forbids diagonal moves that cross a riser edge on one side
/// and a positive-duration edge on the other.
fn coupling_distance(a: &Polyline, b: &Polyline, sync_jumps: bool) -> f64 {
    assert_eq!(a.dim, b.dim, "paths must share a dimension");
    let (na, nb) = (a.len(), b.len());
    let cost = |i: usize, j: usize| {
        (a.times[i] - b.times[j]).abs().max(dist(a.vertex(i), b.vertex(j)))
    };
    let mut prev = vec![f64::INFINITY; nb];
    let mut cur = vec![f64::INFINITY; nb];
    for i in 0..na {
        std::mem::swap(&mut prev, &mut cur);
        for j in 0..nb {
            let c = cost(i, j);
            cur[j] = if i == 0 && j == 0 {
                c
            } else {
                let mut reach = f64::INFINITY;
                if i > 0 {
                    reach = reach.min(prev[j]);
                }
                if j > 0 {
                    reach = reach.min(cur[j - 1]);
                }
                if i > 0 && j > 0 && !(sync_jumps && (a.riser_into(i) != b.riser_into(j))) {
                    reach = reach.min(prev[j - 1]);
                }
                reach.max(c)
            };
        }
    }
    cur[nb - 1]
}

fn check_compatible(a: &CadlagPath, b: &CadlagPath) {
    assert_eq!(a.dim(), b.dim(), "paths must share a dimension");
    assert_eq!(a.horizon(), b.horizon(), "paths must share a horizon");
}

/// Jump-matching (J1-type) distance: monotone time warpings that keep the
/// two paths synchronised, so a jump can only be matched by a jump at a
/// nearby time. Upper bound, tightening as `grid_resolution` shrinks.
pub fn sj1_distance(a: &CadlagPath, b: &CadlagPath, grid_resolution: f64) -> f64 {
    check_compatible(a, b);
    let pa = Polyline::corners(a).refine(grid_resolution, true);
    let pb = Polyline::corners(b).refine(grid_resolution, true);
    coupling_distance(&pa, &pb, true)
}

/// Completed-graph (M1-type) distance: jumps are filled with linear
/// segments traversed jointly across coordinates, so a jump may also be
/// matched by a steep monotone climb. Upper bound, tightening as
/// `grid_resolution` shrinks; never exceeds [`sj1_distance`].
pub fn sm1_distance(a: &CadlagPath, b: &CadlagPath, grid_resolution: f64) -> f64 {
    check_compatible(a, b);
    let pa = Polyline::corners(a).refine(grid_resolution, false);
    let pb = Polyline::corners(b).refine(grid_resolution, false);
    coupling_distance(&pa, &pb, false)
}

/// Completed-graph distance between two continuous embedded polylines.
pub fn sm1_embedded_distance(a: &EmbeddedPath, b: &EmbeddedPath, grid_resolution: f64) -> f64 {
    assert_eq!(a.dim(), b.dim(), "paths must share a dimension");
    assert_eq!(a.horizon(), b.horizon(), "paths must share a horizon");
    let pa = Polyline::from_embedded(a).refine(grid_resolution, false);
    let pb = Polyline::from_embedded(b).refine(grid_resolution, false);
    coupling_distance(&pa, &pb, false)
}
