//! Forward and Marcus solvers for differential equations driven by step
//! paths.
//!
//! Drivers here are cadlag step paths with finitely many jumps plus a drift
//! clock, so every continuous piece of the dynamics is a classical ODE and
//! fixed-step RK4 (with step doubling until two refinements agree) replaces
//! generic rough-path numerics. Two jump conventions are implemented:
//!
//! * forward: `X(t) = X(t-) + b(X(t-)) dW` (the Euler/jump rule; the
//!   fast-slow iteration in this crate is exactly this scheme);
//! * Marcus (geometric): the state rides the flow of `b(.) dW` across a
//!   fictitious unit of time, i.e. the jump endpoint is the time-1 value of
//!   the flow bridge `dPi/ds = b(Pi)(w2 - w1)`.
//!
//! The Marcus solver has a second, independent implementation that embeds
//! the driver (clock and noise jointly) as a continuous piecewise-linear
//! path, solves the continuous equation segment by segment and removes the
//! fictitious time; both routes must agree and tests enforce it.
//!
//! The forward-versus-Marcus discrepancy is quadratic in jump sizes: a
//! single jump of size `h` contributes at most
//! `lip(b) sup(b) / 2 * h^2`, and over a whole driver the p-variation gap
//! is controlled by a constant times the sum of squared jumps. The gap
//! report returns both numbers so callers can watch the gap vanish in the
//! small-jump limit.

use crate::paths::CadlagPath;
use crate::util::{all_finite, axpy, dist, norm, sub};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RdeError {
    #[error("flow bridge diverged (field blow-up along a jump)")]
    BridgeDiverged,
    #[error("solution became non-finite near time {time}")]
    NonFinite { time: f64 },
}

/// Drift part `a` of the dynamics.
#[derive(Clone, Debug)]
pub enum Drift {
    Zero,
    /// `a(x) = c`.
    Constant(Vec<f64>),
    /// `a(x) = -rate * x`.
    Damping { rate: f64 },
}

/// Named noise coefficient forms. All are affine in the state, so their
/// Lipschitz constants are global; supremum bounds are recorded over a
/// stated box.
#[derive(Clone, Debug)]
enum NoiseForm {
    /// m=2, d=1: `b(x) = (-x2, x1)` as a single column; jumps rotate.
    Rotation,
    /// m=2, d=2: columns `(-x2, x1)` and `(x1, x2)`.
    Figure3,
    /// `b(x) = B0 + sum_i x_i Bi`, all matrices m-by-d row-major.
    Affine { b0: Vec<f64>, bx: Vec<Vec<f64>> },
}

/// Drift plus noise coefficient with recorded bounds.
///
/// `sup_bound` and `lip_bound` dominate the Frobenius norm of `b(x)` over
/// the recorded box and the global Frobenius Lipschitz constant; they feed
/// the quadratic jump-gap estimates. With tanh damping the state is passed
/// through `x -> scale * tanh(x / scale)` componentwise before the noise
/// form, which bounds the field globally (the box becomes infinite) while
/// keeping it smooth and leaving it unchanged near the origin.
#[derive(Clone, Debug)]
pub struct VectorField {
    drift: Drift,
    noise: NoiseForm,
    dim_state: usize,
    dim_noise: usize,
    damp_scale: Option<f64>,
    box_half_width: f64,
    sup_bound: f64,
    lip_bound: f64,
}

impl VectorField {
    /// Planar rotation noise (m=2, d=1), bounds recorded on the box
    /// `[-l, l]^2`.
    pub fn rotation(l: f64) -> Self {
        assert!(l > 0.0);
        Self {
            drift: Drift::Zero,
            noise: NoiseForm::Rotation,
            dim_state: 2,
            dim_noise: 1,
            damp_scale: None,
            box_half_width: l,
            sup_bound: 2.0f64.sqrt() * l,
            lip_bound: 1.0,
        }
    }

    /// The two-column planar field with columns `(-x2, x1)` and `(x1, x2)`
    /// (m=2, d=2), bounds recorded on `[-l, l]^2`.
    pub fn figure3(l: f64) -> Self {
        assert!(l > 0.0);
        Self {
            drift: Drift::Zero,
            noise: NoiseForm::Figure3,
            dim_state: 2,
            dim_noise: 2,
            damp_scale: None,
            box_half_width: l,
            sup_bound: 2.0 * l,
            lip_bound: 2.0f64.sqrt(),
        }
    }

    /// General affine noise `b(x) = B0 + sum_i x_i Bi` with m-by-d
    /// matrices row-major; `bx` has one matrix per state coordinate.
    pub fn affine(m: usize, d: usize, b0: Vec<f64>, bx: Vec<Vec<f64>>, l: f64) -> Self {
        assert!(m >= 1 && d >= 1 && l > 0.0);
        assert_eq!(b0.len(), m * d);
        assert_eq!(bx.len(), m);
        for bi in &bx {
            assert_eq!(bi.len(), m * d);
        }
        let frob = |a: &[f64]| norm(a);
        let sup = frob(&b0) + l * bx.iter().map(|bi| frob(bi)).sum::<f64>();
        let lip = bx.iter().map(|bi| { let f = frob(bi); f * f }).sum::<f64>().sqrt();
        Self {
            drift: Drift::Zero,
            noise: NoiseForm::Affine { b0, bx },
            dim_state: m,
            dim_noise: d,
            damp_scale: None,
            box_half_width: l,
            sup_bound: sup,
            lip_bound: lip,
        }
    }

    /// Scalar multiplicative noise `b(x) = x` (m=d=1) on `[-l, l]`.
    pub fn scalar_linear(l: f64) -> Self {
        Self::affine(1, 1, vec![0.0], vec![vec![1.0]], l)
    }

    /// Scalar constant noise `b(x) = c` (m=d=1).
    pub fn scalar_constant(c: f64) -> Self {
        Self::affine(1, 1, vec![c], vec![vec![0.0]], 1.0)
    }

    /// Replace the state by `scale * tanh(x / scale)` before the noise
    /// form. The result is globally bounded, so the recorded box becomes
    /// the whole space; the supremum bound is re-derived with the box
    /// radius replaced by `scale`, the Lipschitz bound is unchanged
    /// (`|d/dx scale tanh(x/scale)| <= 1`).
    pub fn with_tanh_damping(mut self, scale: f64) -> Self {
        assert!(scale > 0.0);
        assert!(self.damp_scale.is_none(), "damping is applied once");
        let sup = match &self.noise {
            NoiseForm::Rotation => 2.0f64.sqrt() * scale,
            NoiseForm::Figure3 => 2.0 * scale,
            NoiseForm::Affine { b0, bx } => {
                norm(b0) + scale * bx.iter().map(|bi| norm(bi)).sum::<f64>()
            }
        };
        self.damp_scale = Some(scale);
        self.box_half_width = f64::INFINITY;
        self.sup_bound = sup;
        self
    }

    /// Attach a drift term.
    pub fn with_drift(mut self, drift: Drift) -> Self {
        if let Drift::Constant(c) = &drift {
            assert_eq!(c.len(), self.dim_state);
        }
        self.drift = drift;
        self
    }

    pub fn dim_state(&self) -> usize {
        self.dim_state
    }

    pub fn dim_noise(&self) -> usize {
        self.dim_noise
    }

    /// Recorded bound for the Frobenius norm of `b` over the box.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Recorded global Frobenius Lipschitz bound for `b`.
    pub fn lip_bound(&self) -> f64 {
        self.lip_bound
    }

    /// Half-width of the box on which `sup_bound` is certified
    /// (infinite for tanh-damped fields).
    pub fn box_half_width(&self) -> f64 {
        self.box_half_width
    }

    fn damped(&self, x: &[f64], buf: &mut Vec<f64>) {
        buf.clear();
        match self.damp_scale {
            None => buf.extend_from_slice(x),
            Some(s) => buf.extend(x.iter().map(|&v| s * (v / s).tanh())),
        }
    }

    /// `out = a(x)`.
    pub fn drift_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.drift {
            Drift::Zero => out.fill(0.0),
            Drift::Constant(c) => out.copy_from_slice(c),
            Drift::Damping { rate } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = -rate * v;
                }
            }
        }
    }

    /// `out = b(x) dw`.
    pub fn noise_apply(&self, x: &[f64], dw: &[f64], out: &mut [f64]) {
        debug_assert_eq!(dw.len(), self.dim_noise);
        debug_assert_eq!(out.len(), self.dim_state);
        let mut u = Vec::new();
        self.damped(x, &mut u);
        match &self.noise {
            NoiseForm::Rotation => {
                out[0] = -u[1] * dw[0];
                out[1] = u[0] * dw[0];
            }
            NoiseForm::Figure3 => {
                out[0] = -u[1] * dw[0] + u[0] * dw[1];
                out[1] = u[0] * dw[0] + u[1] * dw[1];
            }
            NoiseForm::Affine { b0, bx } => {
                let d = self.dim_noise;
                for (r, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (c, w) in dw.iter().enumerate() {
                        let mut entry = b0[r * d + c];
                        for (i, ui) in u.iter().enumerate() {
                            entry += ui * bx[i][r * d + c];
                        }
                        acc += entry * w;
                    }
                    *o = acc;
                }
            }
        }
    }

    /// The full matrix `b(x)`, row-major m-by-d; used by bound checks.
    pub fn noise_matrix(&self, x: &[f64]) -> Vec<f64> {
        let (m, d) = (self.dim_state, self.dim_noise);
        let mut out = vec![0.0; m * d];
        let mut e = vec![0.0; d];
        let mut col = vec![0.0; m];
        for c in 0..d {
            e.fill(0.0);
            e[c] = 1.0;
            self.noise_apply(x, &e, &mut col);
            for r in 0..m {
                out[r * d + c] = col[r];
            }
        }
        out
    }
}

/// How the drift clock advances along a driver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriverClock {
    /// Physical time flows continuously between samples; the drift ODE is
    /// integrated across each inter-sample cell and noise jumps fire at
    /// sample times.
    Continuous,
    /// Time itself advances in discrete increments at the sample times,
    /// jointly with the noise (the fast-slow iteration's convention): each
    /// grid step is one joint jump of `(dt, dw)`.
    StepGrid,
}

/// A step-path driver: noise component plus drift-clock convention.
#[derive(Clone, Debug)]
pub struct DriverPath {
    w: CadlagPath,
    clock: DriverClock,
}

impl DriverPath {
    /// The noise path must start at the origin and its horizon must equal
    /// its last sample time (solutions are sampled exactly on the grid).
    pub fn new(w: CadlagPath, clock: DriverClock) -> Self {
        assert!(w.point(0).iter().all(|&v| v == 0.0), "driver noise must start at 0");
        assert_eq!(
            *w.times().last().unwrap(),
            w.horizon(),
            "driver grid must reach its horizon"
        );
        Self { w, clock }
    }

    pub fn continuous(w: CadlagPath) -> Self {
        Self::new(w, DriverClock::Continuous)
    }

    pub fn step_grid(w: CadlagPath) -> Self {
        Self::new(w, DriverClock::StepGrid)
    }

    pub fn w(&self) -> &CadlagPath {
        &self.w
    }

    pub fn clock(&self) -> DriverClock {
        self.clock
    }

    /// Scalar staircase with `k` equal jumps reaching `rise` at time 1:
    /// the step-path approximation of the linear ramp `t -> rise * t`.
    pub fn staircase(rise: f64, k: usize) -> Self {
        assert!(k >= 1);
        let mut times = Vec::with_capacity(k + 1);
        let mut values = Vec::with_capacity(k + 1);
        for j in 0..=k {
            times.push(j as f64 / k as f64);
            values.push(j as f64 * rise / k as f64);
        }
        Self::continuous(CadlagPath::new(1, times, values, 1.0).unwrap())
    }

    /// Scalar driver that is 0 before `at`, climbs to `rise` in `substeps`
    /// equal jumps spread over `[at, at + width]`, and holds `rise` until
    /// time 1: the step-path stand-in for a steep linear ramp.
    pub fn ramp(rise: f64, at: f64, width: f64, substeps: usize) -> Self {
        assert!(substeps >= 1);
        assert!(at >= 0.0 && width > 0.0 && at + width <= 1.0);
        let mut times = Vec::with_capacity(substeps + 2);
        let mut values = Vec::with_capacity(substeps + 2);
        if at > 0.0 {
            times.push(0.0);
            values.push(0.0);
        }
        for j in 0..=substeps {
            times.push(at + width * j as f64 / substeps as f64);
            values.push(rise * j as f64 / substeps as f64);
        }
        if at + width < 1.0 {
            times.push(1.0);
            values.push(rise);
        }
        Self::continuous(CadlagPath::new(1, times, values, 1.0).unwrap())
    }
}

/// Step counts and acceptance tolerance for the RK4 substrate.
#[derive(Clone, Copy, Debug)]
pub struct OdeOpts {
    /// Initial steps for each jump bridge.
    pub steps_per_jump: usize,
    /// Initial steps for each inter-jump drift cell.
    pub steps_per_cell: usize,
    /// If set, step counts are doubled until two successive refinements'
    /// endpoints differ by less than this (capped by `max_doublings`).
    pub refine_tol: Option<f64>,
    pub max_doublings: u32,
}

impl Default for OdeOpts {
    fn default() -> Self {
        Self { steps_per_jump: 64, steps_per_cell: 16, refine_tol: Some(1e-9), max_doublings: 8 }
    }
}

impl OdeOpts {
    /// Fixed-step variant for Monte Carlo hot loops.
    pub fn fixed(steps_per_jump: usize, steps_per_cell: usize) -> Self {
        Self { steps_per_jump, steps_per_cell, refine_tol: None, max_doublings: 0 }
    }
}

/// Scratch buffers for the classical RK4 stages.
struct Rk4Buf {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Buf {
    fn new(m: usize) -> Self {
        Self {
            k1: vec![0.0; m],
            k2: vec![0.0; m],
            k3: vec![0.0; m],
            k4: vec![0.0; m],
            tmp: vec![0.0; m],
        }
    }

    fn step<F: Fn(&[f64], &mut [f64])>(&mut self, f: &F, x: &mut [f64], tau: f64) {
        let m = x.len();
        f(x, &mut self.k1);
        for i in 0..m {
            self.tmp[i] = x[i] + 0.5 * tau * self.k1[i];
        }
        f(&self.tmp, &mut self.k2);
        for i in 0..m {
            self.tmp[i] = x[i] + 0.5 * tau * self.k2[i];
        }
        f(&self.tmp, &mut self.k3);
        for i in 0..m {
            self.tmp[i] = x[i] + tau * self.k3[i];
        }
        f(&self.tmp, &mut self.k4);
        for i in 0..m {
            x[i] += tau / 6.0 * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

/// One RK4 pass for `dx/ds = f(x)` over `s` in [0, 1].
fn rk4_unit<F: Fn(&[f64], &mut [f64])>(f: &F, x: &mut [f64], steps: usize) {
    let mut buf = Rk4Buf::new(x.len());
    let tau = 1.0 / steps as f64;
    for _ in 0..steps {
        buf.step(f, x, tau);
    }
}

/// As `rk4_unit`, appending the state after every step to `out`.
fn rk4_record<F: Fn(&[f64], &mut [f64])>(
    f: &F,
    x: &mut [f64],
    steps: usize,
    out: &mut Vec<f64>,
) {
    let mut buf = Rk4Buf::new(x.len());
    let tau = 1.0 / steps as f64;
    for _ in 0..steps {
        buf.step(f, x, tau);
        out.extend_from_slice(x);
    }
}

/// RK4 with step doubling: integrate from `x0`, doubling `steps` until two
/// successive endpoints agree within the tolerance. Returns the endpoint
/// and the accepted step count, or an error if the iterates blow up.
fn rk4_refined<F: Fn(&[f64], &mut [f64])>(
    f: &F,
    x0: &[f64],
    steps: usize,
    opts: &OdeOpts,
) -> Result<(Vec<f64>, usize), RdeError> {
    let mut steps = steps.max(1);
    let mut x = x0.to_vec();
    rk4_unit(f, &mut x, steps);
    if !all_finite(&x) {
        return Err(RdeError::BridgeDiverged);
    }
    let Some(tol) = opts.refine_tol else {
        return Ok((x, steps));
    };
    for _ in 0..opts.max_doublings {
        let mut finer = x0.to_vec();
        rk4_unit(f, &mut finer, steps * 2);
        if !all_finite(&finer) {
            return Err(RdeError::BridgeDiverged);
        }
        let gap = dist(&finer, &x);
        x = finer;
        steps *= 2;
        if gap < tol {
            break;
        }
    }
    Ok((x, steps))
}

/// The flow bridge across one jump: the sampled solution of
/// `dPi/ds = b(Pi)(w2 - w1)`, `Pi(0) = x`, on `s` in [0, 1].
#[derive(Clone, Debug)]
pub struct BridgePath {
    dim: usize,
    points: Vec<f64>,
}

impl BridgePath {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of sampled points (steps + 1).
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn endpoint(&self) -> &[f64] {
        self.point(self.len() - 1)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Integrate the flow bridge for the jump `w1 -> w2` started at `x`,
/// beginning with `ode_steps` RK4 steps and doubling per `opts` until the
/// endpoint settles. The returned trajectory is sampled at the accepted
/// resolution.
pub fn flow_bridge(
    field: &VectorField,
    x: &[f64],
    w1: &[f64],
    w2: &[f64],
    ode_steps: usize,
    opts: &OdeOpts,
) -> Result<BridgePath, RdeError> {
    assert!(ode_steps >= 1);
    assert_eq!(x.len(), field.dim_state());
    let mut dw = vec![0.0; field.dim_noise()];
    sub(w2, w1, &mut dw);
    let deriv = |y: &[f64], out: &mut [f64]| field.noise_apply(y, &dw, out);
    let (_, steps) = rk4_refined(&deriv, x, ode_steps, opts)?;

    // re-run at the accepted resolution, recording the trajectory
    let m = field.dim_state();
    let mut points = Vec::with_capacity((steps + 1) * m);
    points.extend_from_slice(x);
    let mut cur = x.to_vec();
    rk4_record(&deriv, &mut cur, steps, &mut points);
    if !all_finite(&points) {
        return Err(RdeError::BridgeDiverged);
    }
    Ok(BridgePath { dim: m, points })
}

/// Endpoint of the flow bridge: the Marcus jump destination.
pub fn marcus_jump(
    field: &VectorField,
    x: &[f64],
    dw: &[f64],
    ode_steps: usize,
    opts: &OdeOpts,
) -> Result<Vec<f64>, RdeError> {
    assert_eq!(x.len(), field.dim_state());
    let deriv = |y: &[f64], out: &mut [f64]| field.noise_apply(y, dw, out);
    let (end, _) = rk4_refined(&deriv, x, ode_steps, opts)?;
    Ok(end)
}

/// A driver together with the solution sampled on the same time grid.
#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub driver: DriverPath,
    pub solution: CadlagPath,
}

impl SolutionPair {
    /// Interleave driver and solution into one path in `R^(d+m)` with values
    /// `(w, x)` per sample, the space in which jump bridges for the coupled
    /// pair live.
    pub fn pair_path(&self) -> CadlagPath {
        let w = self.driver.w();
        let x = &self.solution;
        assert_eq!(w.len(), x.len());
        let d = w.dim();
        let m = x.dim();
        let mut values = Vec::with_capacity(w.len() * (d + m));
        for k in 0..w.len() {
            values.extend_from_slice(w.point(k));
            values.extend_from_slice(x.point(k));
        }
        CadlagPath::new(d + m, w.times().to_vec(), values, w.horizon()).unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum JumpRule {
    Forward,
    Marcus,
}

/// Bridge one RK4 trajectory per step: shared solver core for both jump
/// conventions. With no noise jumps and a continuous clock the two rules
/// execute identical arithmetic.
fn solve(
    driver: &DriverPath,
    field: &VectorField,
    xi: &[f64],
    opts: &OdeOpts,
    rule: JumpRule,
) -> Result<SolutionPair, RdeError> {
    let w = driver.w();
    assert_eq!(w.dim(), field.dim_noise(), "driver/noise dimension mismatch");
    assert_eq!(xi.len(), field.dim_state(), "initial state dimension mismatch");
    assert!(all_finite(xi));

    let m = field.dim_state();
    let mut x = xi.to_vec();
    let mut values = Vec::with_capacity(w.len() * m);
    values.extend_from_slice(&x);
    let mut dw = vec![0.0; w.dim()];
    let mut buf = vec![0.0; m];

    for k in 1..w.len() {
        let t = w.times()[k];
        let dt = t - w.times()[k - 1];
        w.increment_into(k, &mut dw);
        let jumped = dw.iter().any(|&v| v != 0.0);
        match driver.clock() {
            DriverClock::StepGrid => match rule {
                JumpRule::Forward => {
                    // the explicit Euler/jump step: x += a(x) dt + b(x) dw
                    field.drift_into(&x, &mut buf);
                    let drift = buf.clone();
                    field.noise_apply(&x, &dw, &mut buf);
                    axpy(&mut x, dt, &drift);
                    axpy(&mut x, 1.0, &buf);
                }
                JumpRule::Marcus => {
                    // joint bridge across the (dt, dw) jump
                    let deriv = |y: &[f64], out: &mut [f64]| {
                        let mut a = vec![0.0; y.len()];
                        field.drift_into(y, &mut a);
                        field.noise_apply(y, &dw, out);
                        axpy(out, dt, &a);
                    };
                    let (end, _) = rk4_refined(&deriv, &x, opts.steps_per_jump, opts)
                        .map_err(|_| RdeError::NonFinite { time: t })?;
                    x = end;
                }
            },
            DriverClock::Continuous => {
                // drift cell over (t_{k-1}, t_k), then the jump at t_k
                if !matches!(field.drift, Drift::Zero) {
                    let deriv = |y: &[f64], out: &mut [f64]| {
                        field.drift_into(y, out);
                        for o in out.iter_mut() {
                            *o *= dt;
                        }
                    };
                    let (end, _) = rk4_refined(&deriv, &x, opts.steps_per_cell, opts)
                        .map_err(|_| RdeError::NonFinite { time: t })?;
                    x = end;
                }
                if jumped {
                    match rule {
                        JumpRule::Forward => {
                            field.noise_apply(&x, &dw, &mut buf);
                            axpy(&mut x, 1.0, &buf);
                        }
                        JumpRule::Marcus => {
                            x = marcus_jump(field, &x, &dw, opts.steps_per_jump, opts)
                                .map_err(|_| RdeError::NonFinite { time: t })?;
                        }
                    }
                }
            }
        }
        if !all_finite(&x) {
            return Err(RdeError::NonFinite { time: t });
        }
        values.extend_from_slice(&x);
    }

    let solution = CadlagPath::new(m, w.times().to_vec(), values, w.horizon())
        .expect("solution grid mirrors a valid driver grid");
    Ok(SolutionPair { driver: driver.clone(), solution })
}

/// Solve with the forward jump rule `X -> X + b(X) dW`.
pub fn forward_solve(
    driver: &DriverPath,
    field: &VectorField,
    xi: &[f64],
    opts: &OdeOpts,
) -> Result<SolutionPair, RdeError> {
    solve(driver, field, xi, opts, JumpRule::Forward)
}

/// Solve with the Marcus jump rule (flow-bridge endpoints).
pub fn marcus_solve(
    driver: &DriverPath,
    field: &VectorField,
    xi: &[f64],
    opts: &OdeOpts,
) -> Result<SolutionPair, RdeError> {
    solve(driver, field, xi, opts, JumpRule::Marcus)
}

/// Independent Marcus implementation: write the driver (clock and noise
/// jointly) as a continuous piecewise-linear path in `R^(1+d)`, integrate
/// `dX = a(X) dPhi_0 + b(X) dPhi_(1..d)` segment by segment, and read the
/// solution off at the segment ends that correspond to physical times.
pub fn marcus_solve_embedded(
    driver: &DriverPath,
    field: &VectorField,
    xi: &[f64],
    opts: &OdeOpts,
) -> Result<SolutionPair, RdeError> {
    let w = driver.w();
    assert_eq!(w.dim(), field.dim_noise());
    assert_eq!(xi.len(), field.dim_state());

    let m = field.dim_state();
    let mut x = xi.to_vec();
    let mut values = Vec::with_capacity(w.len() * m);
    values.extend_from_slice(&x);
    let mut dw = vec![0.0; w.dim()];

    // each physical step expands into at most two linear segments of the
    // embedded path: (dt, 0) for the clock (continuous case), then
    // (0, dw) for the jump window; the step-grid case is one joint
    // (dt, dw) segment
    for k in 1..w.len() {
        let t = w.times()[k];
        let dt = t - w.times()[k - 1];
        w.increment_into(k, &mut dw);
        let segments: Vec<(f64, Vec<f64>, usize)> = match driver.clock() {
            DriverClock::StepGrid => vec![(dt, dw.clone(), opts.steps_per_jump)],
            DriverClock::Continuous => vec![
                (dt, vec![0.0; w.dim()], opts.steps_per_cell),
                (0.0, dw.clone(), opts.steps_per_jump),
            ],
        };
        for (dc, dn, steps) in segments {
            if dc == 0.0 && dn.iter().all(|&v| v == 0.0) {
                continue;
            }
            let deriv = |y: &[f64], out: &mut [f64]| {
                let mut a = vec![0.0; y.len()];
                field.drift_into(y, &mut a);
                field.noise_apply(y, &dn, out);
                axpy(out, dc, &a);
            };
            let (end, _) = rk4_refined(&deriv, &x, steps, opts)
                .map_err(|_| RdeError::NonFinite { time: t })?;
            x = end;
        }
        if !all_finite(&x) {
            return Err(RdeError::NonFinite { time: t });
        }
        values.extend_from_slice(&x);
    }

    let solution = CadlagPath::new(m, w.times().to_vec(), values, w.horizon())
        .expect("solution grid mirrors a valid driver grid");
    Ok(SolutionPair { driver: driver.clone(), solution })
}

/// Configuration for the forward-versus-Marcus gap report.
#[derive(Clone, Copy, Debug)]
pub struct GapOpts {
    /// Exponent for the p-variation of the difference path.
    pub p: f64,
    /// Stand-in for the uncomputable constant in the p-variation gap
    /// bound; the bound is reported, not certified.
    pub k_hat: f64,
    pub ode: OdeOpts,
}

impl Default for GapOpts {
    fn default() -> Self {
        Self { p: 1.5, k_hat: 1.0, ode: OdeOpts::default() }
    }
}

/// Forward-versus-Marcus discrepancy for one driver.
#[derive(Clone, Debug)]
pub struct GapReport {
    /// p-variation of the pointwise difference of the two solutions.
    pub p_var_gap: f64,
    /// `lip(b) * sup(b) * k_hat * sum of squared driver jumps`.
    pub bound: f64,
    /// The sum of squared driver jumps itself.
    pub jump_sum_sq: f64,
    /// Euclidean gap of the endpoints.
    pub end_gap: f64,
}

/// Solve both ways and report the discrepancy alongside the quadratic
/// jump bound it should track.
pub fn marcus_forward_gap(
    driver: &DriverPath,
    field: &VectorField,
    xi: &[f64],
    opts: &GapOpts,
) -> Result<GapReport, RdeError> {
    let fwd = forward_solve(driver, field, xi, &opts.ode)?;
    let mar = marcus_solve(driver, field, xi, &opts.ode)?;
    let m = field.dim_state();
    let n = fwd.solution.len();
    let mut diff = vec![0.0; n * m];
    for i in 0..n * m {
        diff[i] = fwd.solution.values()[i] - mar.solution.values()[i];
    }
    let p_var_gap = crate::paths::p_variation(&diff, m, opts.p);
    let jump_sum_sq = driver.w().jump_sum_sq();
    let end_gap = dist(fwd.solution.end_value(), mar.solution.end_value());
    Ok(GapReport {
        p_var_gap,
        bound: field.lip_bound() * field.sup_bound() * opts.k_hat * jump_sum_sq,
        jump_sum_sq,
        end_gap,
    })
}
