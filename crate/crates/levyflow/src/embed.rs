//! Fictitious-time embeddings: continuous reparametrisations of step paths.
//!
//! A cadlag path is opened into a continuous piecewise-linear path by
//! inserting a fictitious time window at every jump and traversing a
//! prescribed bridge inside the window. Jumps are ranked by magnitude with
//! ties broken by earlier time; the k-th ranked jump receives a window of
//! width `delta * r_k` for a summable weight sequence `r`, and the
//! reparametrised path is rescaled back to the original horizon. Collapsing
//! the windows recovers the original path exactly, so nothing is lost in
//! the round trip.
//!
//! Two bridge families are provided:
//!
//! * [`PathFunction::Linear`] joins the jump endpoints with a straight
//!   segment, which is the completed-graph convention;
//! * [`PathFunction::FlowBridge`] applies to coupled driver-solution paths
//!   in `R^(d+m)`: the leading `d` coordinates move linearly while the
//!   trailing `m` coordinates follow the flow of a noise field along that
//!   segment, which is how a geometric (Marcus) solution actually crosses
//!   a jump. The bridge is defined only when the recorded post-jump state
//!   agrees with the flow endpoint; pairs produced by a forward solve
//!   violate that once jumps are sizeable, and embedding them fails with
//!   [`EmbedError::DomainViolation`].
//!
//! Only the `max_jumps` largest jumps are opened; the rest are traversed by
//! a zero-width linear segment at their slot, so the sampled polyline may
//! contain vertical risers. The p-variation of the embedded path depends on
//! neither `delta` nor the weight rule (those move vertex times only, and
//! p-variation is a function of the vertex values), which makes
//! [`EmbeddedPath::p_variation`] a well-defined norm for the pair
//! (path, bridge rule).

use crate::paths::CadlagPath;
use crate::rde::{flow_bridge, OdeOpts, RdeError, VectorField};
use crate::util::dist;
use std::f64::consts::PI;
use thiserror::Error;

/// Default cap on the number of jumps opened into fictitious windows.
pub const DEFAULT_MAX_JUMPS: usize = 128;

/// Default fictitious-time budget multiplier.
pub const DEFAULT_DELTA: f64 = 1.0;

/// Largest allowed gap between a recorded post-jump state and the flow
/// bridge endpoint before the jump is declared outside the bridge domain.
pub const FLOW_ENDPOINT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum EmbedError {
    /// The post-jump state does not lie on the flow through the pre-jump
    /// state, so no flow bridge connects the two points.
    #[error(
        "jump at sample {jump_index} lies outside the flow bridge domain: \
         endpoint gap {gap:.3e} exceeds {tolerance:.1e}"
    )]
    DomainViolation { jump_index: usize, gap: f64, tolerance: f64 },
    #[error("flow bridge integration failed while opening a jump")]
    Bridge(#[from] RdeError),
}

/// Bridge assigned to each opened jump.
#[derive(Clone, Debug)]
pub enum PathFunction {
    /// Straight segment between the jump endpoints.
    Linear,
    /// For paths of pair values `(w, x)`: `w` moves linearly and `x`
    /// integrates `dx = b(x) dw` along that segment with `ode_steps`
    /// initial RK4 steps.
    FlowBridge { field: VectorField, ode_steps: usize },
}

/// Summable weight sequence distributing fictitious time over jump ranks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RWeights {
    /// `r_k = 2^-k`.
    Dyadic,
    /// `r_k = 6 / (pi^2 k^2)`, normalised to total mass 1.
    InverseSquare,
}

impl RWeights {
    /// Window weight for 1-based rank `rank`.
    pub fn weight(&self, rank: usize) -> f64 {
        assert!(rank >= 1, "ranks are 1-based");
        match self {
            RWeights::Dyadic => 0.5f64.powi(rank as i32),
            RWeights::InverseSquare => {
                let k = rank as f64;
                6.0 / (PI * PI * k * k)
            }
        }
    }
}

/// Continuous piecewise-linear reparametrisation of a cadlag path, sampled
/// as a vertex polyline over the original horizon.
///
/// Vertex times are nondecreasing; equal consecutive times mark the
/// zero-width risers of truncated jumps. Each base sample is pinned to a
/// vertex (its mark), and [`EmbeddedPath::restore`] reads the base path
/// back off those vertices exactly.
#[derive(Clone, Debug)]
pub struct EmbeddedPath {
    base: CadlagPath,
    delta: f64,
    weights: RWeights,
    dim: usize,
    times: Vec<f64>,
    values: Vec<f64>,
    marks: Vec<usize>,
    fictitious: f64,
}

impl EmbeddedPath {
    pub fn base(&self) -> &CadlagPath {
        &self.base
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn weights(&self) -> RWeights {
        self.weights
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of polyline vertices.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Vertex times, nondecreasing in `[0, horizon]`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Row-major vertex values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vertex(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn horizon(&self) -> f64 {
        self.base.horizon()
    }

    /// Vertex index carrying base sample `k`.
    pub fn mark(&self, k: usize) -> usize {
        self.marks[k]
    }

    /// Total fictitious time inserted before rescaling, `delta * sum r_k`
    /// over the opened jumps.
    pub fn fictitious_total(&self) -> f64 {
        self.fictitious
    }

    /// Collapse the fictitious windows: the base path, recovered exactly.
    pub fn restore(&self) -> CadlagPath {
        let mut values = Vec::with_capacity(self.marks.len() * self.dim);
        for &mark in &self.marks {
            values.extend_from_slice(self.vertex(mark));
        }
        CadlagPath::new(self.dim, self.base.times().to_vec(), values, self.base.horizon())
            .expect("marked vertices reproduce a valid path")
    }

    /// p-variation of the embedded polyline (exact on the vertex skeleton;
    /// independent of `delta` and of the weight rule).
    pub fn p_variation(&self, p: f64) -> f64 {
        crate::paths::p_variation(&self.values, self.dim, p)
    }
}

/// Open the `max_jumps` largest jumps of `path` into fictitious windows
/// bridged by `phi`, with the default dyadic weights.
pub fn embed(
    path: &CadlagPath,
    phi: &PathFunction,
    delta: f64,
    max_jumps: usize,
) -> Result<EmbeddedPath, EmbedError> {
    embed_with_weights(path, phi, delta, max_jumps, RWeights::Dyadic)
}

/// [`embed`] with an explicit weight rule.
pub fn embed_with_weights(
    path: &CadlagPath,
    phi: &PathFunction,
    delta: f64,
    max_jumps: usize,
    weights: RWeights,
) -> Result<EmbeddedPath, EmbedError> {
    assert!(delta > 0.0 && delta.is_finite(), "delta must be positive");
    let dim = path.dim();
    if let PathFunction::FlowBridge { field, ode_steps } = phi {
        assert!(*ode_steps >= 1);
        assert_eq!(
            dim,
            field.dim_noise() + field.dim_state(),
            "flow bridging needs pair values (driver noise, then state)"
        );
    }

    let n = path.len();
    // rank jumps by magnitude, earlier time first on ties
    let mut jumps: Vec<(usize, f64)> = (1..n)
        .filter_map(|k| {
            let g = path.increment_magnitude(k);
            (g > 0.0).then_some((k, g))
        })
        .collect();
    jumps.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut width = vec![0.0; n];
    let mut fictitious = 0.0;
    for (rank0, &(k, _)) in jumps.iter().take(max_jumps).enumerate() {
        let w = delta * weights.weight(rank0 + 1);
        width[k] = w;
        fictitious += w;
    }

    let horizon = path.horizon();
    let scale = horizon / (horizon + fictitious);

    let mut times = Vec::with_capacity(n + 2);
    let mut values = Vec::with_capacity((n + 2) * dim);
    let mut marks = Vec::with_capacity(n);
    times.push(path.times()[0]);
    values.extend_from_slice(path.point(0));
    marks.push(0);

    let mut shift = 0.0;
    for k in 1..n {
        let t = path.times()[k];
        let pre = path.point(k - 1);
        let post = path.point(k);
        if path.increment_magnitude(k) > 0.0 {
            // pre-jump corner, then the bridge across the window
            times.push((t + shift) * scale);
            values.extend_from_slice(pre);
            if width[k] > 0.0 {
                if let PathFunction::FlowBridge { field, ode_steps } = phi {
                    let d = field.dim_noise();
                    let (w1, x1) = pre.split_at(d);
                    let (w2, x2) = post.split_at(d);
                    let opts = OdeOpts { steps_per_jump: *ode_steps, ..OdeOpts::default() };
                    let bridge = flow_bridge(field, x1, w1, w2, *ode_steps, &opts)?;
                    let gap = dist(bridge.endpoint(), x2);
                    if gap > FLOW_ENDPOINT_TOL {
                        return Err(EmbedError::DomainViolation {
                            jump_index: k,
                            gap,
                            tolerance: FLOW_ENDPOINT_TOL,
                        });
                    }
                    let steps = bridge.len() - 1;
                    for j in 1..steps {
                        let s = j as f64 / steps as f64;
                        times.push((t + shift + width[k] * s) * scale);
                        for i in 0..d {
                            values.push(w1[i] + s * (w2[i] - w1[i]));
                        }
                        values.extend_from_slice(bridge.point(j));
                    }
                }
                shift += width[k];
            }
            times.push((t + shift) * scale);
            values.extend_from_slice(post);
            marks.push(times.len() - 1);
        } else {
            // no jump: the run continues through this sample
            times.push((t + shift) * scale);
            values.extend_from_slice(post);
            marks.push(times.len() - 1);
        }
    }

    if horizon > *path.times().last().unwrap() {
        times.push(horizon);
        values.extend_from_slice(path.end_value());
    }

    Ok(EmbeddedPath {
        base: path.clone(),
        delta,
        weights,
        dim,
        times,
        values,
        marks,
        fictitious,
    })
}
