//! The coupled fast-slow iteration over intermittent maps, its driver
//! path, and excursion statistics of the induced (first-return) system.
//!
//! The fast variable is an orbit of an intermittent interval map. For a
//! centered observable `v` the driver is the normalised Birkhoff sum
//!
//! ```text
//! W_n(t) = n^(-1/alpha) * sum_{j < floor(n t)} v(f^j y0),
//! ```
//!
//! and the slow state follows the explicit Euler/jump recursion
//!
//! ```text
//! x_{k+1} = x_k + n^(-1) a(x_k) + n^(-1/alpha) b(x_k) v(y_k),
//! ```
//!
//! which is precisely the forward solution driven by `W_n` on the step
//! grid; tests cross-check the two implementations sample by sample.
//!
//! Excursions of the induced system carry the induced observable
//! `V(z) = sum_{j < tau(z)} v(f^j z)` and the excursion-shape statistic
//! `V*`, the defect of the excursion's partial-sum path from being a
//! monotone straight run towards `V`. `V*` vanishing in the small-jump
//! limit is what upgrades convergence to the Marcus topology, so its
//! scaled maximum is exposed as a diagnostic.

use crate::maps::{IntermittentMap, MapError, DEFAULT_MAX_RETURN_ITER};
use crate::paths::CadlagPath;
use crate::rde::VectorField;
use crate::rng::replica_rng;
use crate::util::{all_finite, axpy, dot, norm};
use rand::Rng;
use thiserror::Error;

/// Calibration orbit length used by the command-line tool when centering
/// an observable; tests use much shorter orbits.
pub const DEFAULT_CALIBRATION_ITERS: u64 = 100_000_000;

/// Observables must stay nonzero at the neutral fixed points; this is the
/// tolerance for that check.
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FastSlowError {
    #[error("observable vanishes at the fixed point y = {at}")]
    DegenerateObservable { at: f64 },
    #[error("slow state escaped the representable range at step {step}")]
    NonFinite { step: usize },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Built-in observable shapes on [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservableKind {
    /// d=1: `cos(2 pi y)`.
    Cos2Pi,
    /// d=2: `(cos(2 pi y), sin(2 pi y))`.
    Circle,
}

impl ObservableKind {
    pub fn dim(self) -> usize {
        match self {
            ObservableKind::Cos2Pi => 1,
            ObservableKind::Circle => 2,
        }
    }

    fn raw_into(self, y: f64, out: &mut [f64]) {
        let t = 2.0 * std::f64::consts::PI * y;
        match self {
            ObservableKind::Cos2Pi => out[0] = t.cos(),
            ObservableKind::Circle => {
                out[0] = t.cos();
                out[1] = t.sin();
            }
        }
    }
}

/// A Hölder observable centered to mean zero under the invariant measure.
///
/// The invariant measure has no closed form, so centering constants are
/// Birkhoff averages over a long calibration orbit; the residual mean is
/// the dominant systematic error of the whole simulation and is therefore
/// recorded rather than hidden.
#[derive(Clone, Debug)]
pub struct Observable {
    kind: ObservableKind,
    centering: Vec<f64>,
    sup_norm: f64,
    holder_note: &'static str,
}

impl Observable {
    /// Center with an explicitly supplied constant (e.g. one recorded from
    /// an earlier calibration run).
    pub fn with_centering(
        kind: ObservableKind,
        centering: Vec<f64>,
    ) -> Result<Self, FastSlowError> {
        assert_eq!(centering.len(), kind.dim());
        // raw(0) = raw(1) for both shapes, so one probe covers both
        // neutral fixed points
        let mut probe = vec![0.0; kind.dim()];
        kind.raw_into(0.0, &mut probe);
        for (p, c) in probe.iter_mut().zip(&centering) {
            *p -= c;
        }
        if norm(&probe) < DEGENERACY_TOL {
            return Err(FastSlowError::DegenerateObservable { at: 0.0 });
        }
        // sup over the unit circle of |raw - m| is exactly 1 + |m| for
        // both shapes (cosine fills [-1,1]; the circle is the unit circle)
        let sup_norm = 1.0 + norm(&centering);
        let holder_note = match kind {
            ObservableKind::Cos2Pi => "smooth: cos(2 pi y), Lipschitz on [0,1]",
            ObservableKind::Circle => "smooth: unit-circle embedding, Lipschitz on [0,1]",
        };
        Ok(Self { kind, centering, sup_norm, holder_note })
    }

    /// Center empirically with a Birkhoff average over `iters` iterates.
    ///
    /// The orbit is split into segments of a few million steps, restarted
    /// from fresh points drawn deterministically from `y0`, because
    /// double-precision orbits are eventually periodic and a single long
    /// orbit would let one spurious cycle poison the average. Each segment
    /// discards a short burn-in. The estimate fluctuates at the stable
    /// scale `L^(1/alpha - 1)` per segment of length `L`, so averaging
    /// segments tightens it; the error still matters downstream, since a
    /// centering error `eps` shifts the driver endpoint by
    /// `n^(1 - 1/alpha) eps`.
    pub fn calibrated(
        kind: ObservableKind,
        map: &IntermittentMap,
        iters: u64,
        y0: f64,
    ) -> Result<Self, FastSlowError> {
        assert!(iters >= 1);
        const SEGMENT_LEN: u64 = 1 << 22;
        const BURN_IN: u64 = 10_000;
        let d = kind.dim();
        let mut mean = vec![0.0; d];
        let mut buf = vec![0.0; d];
        let mut starts = replica_rng(y0.to_bits(), 0);
        let mut remaining = iters;
        while remaining > 0 {
            let seg = remaining.min(SEGMENT_LEN);
            remaining -= seg;
            let mut y = starts.random::<f64>();
            for _ in 0..BURN_IN {
                y = map.step(y);
            }
            for _ in 0..seg {
                kind.raw_into(y, &mut buf);
                axpy(&mut mean, 1.0, &buf);
                y = map.step(y);
            }
        }
        for m in &mut mean {
            *m /= iters as f64;
        }
        Self::with_centering(kind, mean)
    }

    pub fn kind(&self) -> ObservableKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn centering(&self) -> &[f64] {
        &self.centering
    }

    /// Exact supremum of |v| over [0, 1].
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn holder_note(&self) -> &'static str {
        self.holder_note
    }

    /// Centered value `v(y)`.
    pub fn eval_into(&self, y: f64, out: &mut [f64]) {
        self.kind.raw_into(y, out);
        for (o, c) in out.iter_mut().zip(&self.centering) {
            *o -= c;
        }
    }

    /// Mean of the centered observable along a fresh orbit; a direct
    /// measure of the centering residual.
    pub fn birkhoff_residual(&self, map: &IntermittentMap, iters: u64, y0: f64) -> Vec<f64> {
        let d = self.dim();
        let mut acc = vec![0.0; d];
        let mut buf = vec![0.0; d];
        let mut y = y0;
        for _ in 0..iters {
            self.eval_into(y, &mut buf);
            axpy(&mut acc, 1.0, &buf);
            y = map.step(y);
        }
        for a in &mut acc {
            *a /= iters as f64;
        }
        acc
    }
}

/// One realisation of the coupled system: the driver and the slow path on
/// the grid `k/n`, `k = 0..n`.
#[derive(Clone, Debug)]
pub struct FastSlowRun {
    pub n: usize,
    pub alpha: f64,
    pub wn: CadlagPath,
    pub xn: CadlagPath,
    /// Final fast-variable position (handy for chaining runs).
    pub y_end: f64,
}

/// Iterate the coupled recursion for `n` steps from slow state `xi` and
/// fast state `y0`, accumulating the driver alongside.
pub fn run_fast_slow(
    map: &IntermittentMap,
    obs: &Observable,
    field: &VectorField,
    xi: &[f64],
    n: usize,
    y0: f64,
) -> Result<FastSlowRun, FastSlowError> {
    assert!(n >= 1);
    assert_eq!(field.dim_noise(), obs.dim(), "observable/noise dimension mismatch");
    assert_eq!(xi.len(), field.dim_state(), "initial state dimension mismatch");
    assert!((0.0..=1.0).contains(&y0));
    assert!(all_finite(xi));

    let d = obs.dim();
    let m = field.dim_state();
    let alpha = map.alpha();
    let scale = (n as f64).powf(-1.0 / alpha);
    let dt = 1.0 / n as f64;

    let mut y = y0;
    let mut x = xi.to_vec();
    let mut v = vec![0.0; d];
    let mut dw = vec![0.0; d];
    let mut a = vec![0.0; m];
    let mut bdw = vec![0.0; m];

    let mut w_values = vec![0.0; (n + 1) * d];
    let mut x_values = Vec::with_capacity((n + 1) * m);
    x_values.extend_from_slice(&x);

    for k in 0..n {
        obs.eval_into(y, &mut v);
        for (o, vi) in dw.iter_mut().zip(&v) {
            *o = scale * vi;
        }
        for c in 0..d {
            w_values[(k + 1) * d + c] = w_values[k * d + c] + dw[c];
        }
        field.drift_into(&x, &mut a);
        field.noise_apply(&x, &dw, &mut bdw);
        axpy(&mut x, dt, &a);
        axpy(&mut x, 1.0, &bdw);
        if !all_finite(&x) {
            return Err(FastSlowError::NonFinite { step: k + 1 });
        }
        x_values.extend_from_slice(&x);
        y = map.step(y);
    }

    let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let wn = CadlagPath::new(d, times.clone(), w_values, 1.0)
        .expect("driver path grid is valid by construction");
    let xn = CadlagPath::new(m, times, x_values, 1.0)
        .expect("slow path grid is valid by construction");
    Ok(FastSlowRun { n, alpha, wn, xn, y_end: y })
}

/// Just the driver `W_n`, without a slow system attached.
pub fn sample_driver(
    map: &IntermittentMap,
    obs: &Observable,
    n: usize,
    y0: f64,
) -> Result<CadlagPath, FastSlowError> {
    assert!(n >= 1);
    assert!((0.0..=1.0).contains(&y0));
    let d = obs.dim();
    let scale = (n as f64).powf(-1.0 / map.alpha());
    let mut increments = vec![0.0; n * d];
    let mut y = y0;
    let mut v = vec![0.0; d];
    for k in 0..n {
        obs.eval_into(y, &mut v);
        for c in 0..d {
            increments[k * d + c] = scale * v[c];
        }
        y = map.step(y);
    }
    Ok(CadlagPath::from_uniform_increments(d, &increments, 1.0)
        .expect("driver increments are finite"))
}

/// One excursion of the induced system.
#[derive(Clone, Debug)]
pub struct InducedSample {
    /// Induced observable: sum of `v` along the excursion.
    pub v: Vec<f64>,
    /// Excursion-shape defect (zero iff the partial sums run straight and
    /// monotonically from 0 to `v`).
    pub vstar: f64,
    /// Return time.
    pub tau: u64,
    /// Landing point back in the return set (the next induced state).
    pub point: f64,
}

/// Run one excursion from `z` in the return set: the induced observable,
/// the shape statistic and the return time.
pub fn induced_sample(
    map: &IntermittentMap,
    obs: &Observable,
    z: f64,
    max_iter: u64,
) -> Result<InducedSample, FastSlowError> {
    assert!(map.in_return_set(z), "excursions start inside the return set");
    let d = obs.dim();
    let mut partials = vec![0.0; d];
    let mut v = vec![0.0; d];
    let mut y = z;
    let mut tau = 0u64;
    loop {
        obs.eval_into(y, &mut v);
        let last = partials[partials.len() - d..].to_vec();
        partials.extend(last.iter().zip(&v).map(|(s, vi)| s + vi));
        tau += 1;
        y = map.step(y);
        if map.in_return_set(y) {
            break;
        }
        if tau >= max_iter {
            return Err(MapError::NonReturning { start: z, max_iter }.into());
        }
    }
    let total = partials[partials.len() - d..].to_vec();
    let vstar = excursion_shape_defect(&partials, d);
    Ok(InducedSample { v: total, vstar, tau, point: y })
}

/// The infimum over unit directions `c` of
/// `max_{k<=l} c.(S_k - S_l) + max_k |S_k - (c.S_k) c|`
/// for the partial-sum path `S_0 = 0, ..., S_tau`.
///
/// The infimum over the sphere is replaced by a minimum over the direction
/// of the endpoint plus a fixed grid ({+1,-1} for d=1, exact; 64 angles
/// for d=2). Any grid minimum upper-bounds the infimum, which is the safe
/// side for a statistic whose job is to converge to zero.
pub(crate) fn excursion_shape_defect(partials: &[f64], d: usize) -> f64 {
    assert!(d == 1 || d == 2, "shape statistic implemented for d <= 2");
    assert_eq!(partials.len() % d, 0);
    let rows = partials.len() / d;
    let total = &partials[(rows - 1) * d..];

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let tnorm = norm(total);
    if tnorm > 0.0 {
        candidates.push(total.iter().map(|t| t / tnorm).collect());
    }
    match d {
        1 => {
            candidates.push(vec![1.0]);
            candidates.push(vec![-1.0]);
        }
        _ => {
            for i in 0..64 {
                let th = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
                candidates.push(vec![th.cos(), th.sin()]);
            }
        }
    }

    let mut best = f64::INFINITY;
    for c in &candidates {
        // max over k <= l of c.(S_k - S_l): running max of c.S minus the
        // current projection; never negative because k = l is allowed
        let mut run_max = f64::NEG_INFINITY;
        let mut drop = 0.0f64;
        let mut ortho = 0.0f64;
        for r in 0..rows {
            let s = &partials[r * d..(r + 1) * d];
            let proj = dot(c, s);
            run_max = run_max.max(proj);
            drop = drop.max(run_max - proj);
            let mut o2 = 0.0;
            for (si, ci) in s.iter().zip(c) {
                let dev = si - proj * ci;
                o2 += dev * dev;
            }
            ortho = ortho.max(o2.sqrt());
        }
        best = best.min(drop + ortho);
    }
    best
}

/// Per-replica empirical law of `n^(-1/alpha) max_{k<n} V* o F^k`, the
/// quantity whose convergence to zero is the Marcus-mode hypothesis.
/// Each replica chains `n` excursions from an independent uniform start
/// in the return set.
pub fn vstar_max_diagnostic(
    map: &IntermittentMap,
    obs: &Observable,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<f64>, FastSlowError> {
    assert!(n >= 1 && replicas >= 1);
    let (lo, hi) = map.return_set();
    let scale = (n as f64).powf(-1.0 / map.alpha());
    let mut out = Vec::with_capacity(replicas);
    for r in 0..replicas {
        let mut rng = replica_rng(seed, r as u64);
        let mut z = lo + rng.random::<f64>() * (hi - lo);
        let mut max_vstar = 0.0f64;
        for _ in 0..n {
            let s = induced_sample(map, obs, z, DEFAULT_MAX_RETURN_ITER)?;
            max_vstar = max_vstar.max(s.vstar);
            z = s.point;
        }
        out.push(scale * max_vstar);
    }
    Ok(out)
}

/// `(tau, V*)` pairs over a chain of excursions, for envelope checks and
/// scatter diagnostics.
pub fn excursion_scatter(
    map: &IntermittentMap,
    obs: &Observable,
    count: usize,
    seed: u64,
) -> Result<Vec<(u64, f64)>, FastSlowError> {
    let (lo, hi) = map.return_set();
    let mut rng = replica_rng(seed, 0);
    let mut z = lo + rng.random::<f64>() * (hi - lo);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let s = induced_sample(map, obs, z, DEFAULT_MAX_RETURN_ITER)?;
        out.push((s.tau, s.vstar));
        z = s.point;
    }
    Ok(out)
}

/// Summary statistics of one driver realisation.
#[derive(Clone, Debug)]
pub struct DriverStats {
    pub p_var: f64,
    pub jump_sum_sq: f64,
    pub end_value: Vec<f64>,
}

/// p-variation, squared-jump sum and terminal value of a driver path.
pub fn driver_statistics(wn: &CadlagPath, p: f64) -> DriverStats {
    DriverStats {
        p_var: wn.p_variation(p),
        jump_sum_sq: wn.jump_sum_sq(),
        end_value: wn.end_value().to_vec(),
    }
}
