//! Multivariate alpha-stable laws with discrete spectral measures.
//!
//! A law is determined by a tail exponent `alpha` in (1, 2) and a finite
//! collection of weighted unit directions (the spectral measure). Its
//! characteristic function is
//!
//! ```text
//! E exp(i u . X) = exp( -sum_i  w_i |u . s_i|^alpha
//!                                (1 - i sgn(u . s_i) tan(pi alpha / 2)) )
//! ```
//!
//! and a draw is the sum over atoms of independent totally skewed scalar
//! stable variables pushed along the atom directions. Scalar draws use the
//! Chambers-Mallows-Stuck construction; the exact characteristic function
//! doubles as an independent cross-check of the sampler in tests.
//!
//! [`limit_spectral_measure`] assembles the law of the limiting driver at
//! time 1 for the fast-slow systems in this crate from map-level
//! quantities: the observable's values at the neutral fixed points, the
//! invariant density at the return-set boundary and the mean return time.

use crate::maps::MapKind;
use crate::paths::CadlagPath;
use crate::rng;
use crate::special::gamma;
use crate::util::{dist, dot, norm};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

#[derive(Debug, thiserror::Error)]
pub enum StableError {
    #[error("stability index alpha must lie strictly inside (1, 2), got {0}")]
    InvalidAlpha(f64),
    #[error("a spectral measure needs at least one atom")]
    EmptyMeasure,
    #[error("atom {index} direction has norm {norm}, expected a unit vector")]
    BadDirection { index: usize, norm: f64 },
    #[error("atom {index} has non-positive or non-finite weight {weight}")]
    BadWeight { index: usize, weight: f64 },
    #[error("atom {index} has dimension {got}, measure has dimension {dim}")]
    DimensionMismatch { index: usize, got: usize, dim: usize },
    #[error("observable vanishes at every neutral fixed point; the limit law is degenerate")]
    DegenerateObservable,
    #[error("mean return time must exceed 1, got {0}")]
    InvalidTauBar(f64),
}

/// One weighted unit direction of a spectral measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub direction: Vec<f64>,
    pub weight: f64,
}

/// A finite discrete measure on the unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl SpectralMeasure {
    /// Build a measure from `(direction, weight)` pairs. Directions must be
    /// unit vectors (tolerance 1e-12) and weights positive. Atoms whose
    /// directions coincide within 1e-12 are merged by adding weights, so
    /// the atom list is a canonical representation of the measure.
    pub fn new(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self, StableError> {
        assert!(dim >= 1);
        if atoms.is_empty() {
            return Err(StableError::EmptyMeasure);
        }
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for (index, (direction, weight)) in atoms.into_iter().enumerate() {
            if direction.len() != dim {
                return Err(StableError::DimensionMismatch {
                    index,
                    got: direction.len(),
                    dim,
                });
            }
            let n = norm(&direction);
            if (n - 1.0).abs() > 1e-12 || !n.is_finite() {
                return Err(StableError::BadDirection { index, norm: n });
            }
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(StableError::BadWeight { index, weight });
            }
            match merged.iter_mut().find(|a| dist(&a.direction, &direction) < 1e-12) {
                Some(a) => a.weight += weight,
                None => merged.push(Atom { direction, weight }),
            }
        }
        Ok(Self { dim, atoms: merged })
    }

    /// Convenience: the symmetric scalar measure with atoms at +1 and -1,
    /// each carrying `weight`.
    pub fn symmetric_scalar(weight: f64) -> Self {
        Self::new(1, vec![(vec![1.0], weight), (vec![-1.0], weight)]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// The same directions with all weights multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0 && factor.is_finite());
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.weight *= factor;
        }
        out
    }
}

/// An alpha-stable law on `R^dim` with zero shift.
#[derive(Clone, Debug)]
pub struct StableLaw {
    alpha: f64,
    measure: SpectralMeasure,
    /// Cached per-atom scalar scales `weight^(1/alpha)`.
    scales: Vec<f64>,
}

impl StableLaw {
    pub fn new(alpha: f64, measure: SpectralMeasure) -> Result<Self, StableError> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(StableError::InvalidAlpha(alpha));
        }
        let scales = measure.atoms().iter().map(|a| a.weight.powf(1.0 / alpha)).collect();
        Ok(Self { alpha, measure, scales })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.measure
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    /// Exact characteristic function at frequency `u`.
    pub fn char_function(&self, u: &[f64]) -> Complex64 {
        assert_eq!(u.len(), self.dim());
        let t = (PI * self.alpha / 2.0).tan();
        let mut re = 0.0;
        let mut im = 0.0;
        for a in self.measure.atoms() {
            let us = dot(u, &a.direction);
            let amp = a.weight * us.abs().powf(self.alpha);
            re += amp;
            im += amp * us.signum() * t;
        }
        // exp(-re + i*im); us.signum() is 0 at us = 0 where amp = 0 too
        Complex64::new(-re, im).exp()
    }

    /// One draw, written into `out`: independent totally skewed scalar
    /// stables pushed along the atom directions.
    pub fn sample_into(&self, rng: &mut impl Rng, out: &mut [f64]) {
        assert_eq!(out.len(), self.dim());
        out.fill(0.0);
        for (a, &scale) in self.measure.atoms().iter().zip(&self.scales) {
            let z = sample_scalar_stable(self.alpha, scale, 1.0, rng);
            for (o, d) in out.iter_mut().zip(&a.direction) {
                *o += z * d;
            }
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }
}

/// One draw of a scalar alpha-stable law with scale `scale`, skewness
/// `skew` in [-1, 1] and zero shift, in the parametrisation with
/// characteristic function
///
/// ```text
/// exp( -scale^alpha |u|^alpha (1 - i skew sgn(u) tan(pi alpha / 2)) ).
/// ```
///
/// Chambers-Mallows-Stuck: a uniform angle and an independent exponential
/// are pushed through a closed-form transform.
pub fn sample_scalar_stable(alpha: f64, scale: f64, skew: f64, rng: &mut impl Rng) -> f64 {
    assert!(alpha > 1.0 && alpha < 2.0, "alpha must lie in (1, 2), got {alpha}");
    assert!((-1.0..=1.0).contains(&skew), "skew must lie in [-1, 1], got {skew}");
    assert!(scale > 0.0 && scale.is_finite());

    let t = (PI * alpha / 2.0).tan();
    let b = (skew * t).atan() / alpha;
    let s = (1.0 + skew * skew * t * t).powf(0.5 / alpha);
    let v = (rng.random::<f64>() - 0.5) * PI;
    // rejection of the measure-zero u = 0 keeps the exponential positive
    let w = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break -u.ln();
        }
    };
    let x = s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
        * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha);
    scale * x
}

/// Positive constant relating the excursion scale `c` to the spectral
/// mass of the limit law: `cos(pi alpha / 2) * Gamma(1 - alpha)`, which is
/// a product of two negative factors on (1, 2).
pub fn skew_prefactor(alpha: f64) -> f64 {
    assert!(alpha > 1.0 && alpha < 2.0);
    (PI * alpha / 2.0).cos() * gamma(1.0 - alpha)
}

/// Map-level inputs determining the limiting driver law.
#[derive(Clone, Debug)]
pub struct LimitInputs {
    pub kind: MapKind,
    pub alpha: f64,
    /// Observable value at the neutral fixed point 0.
    pub v_at_0: Vec<f64>,
    /// Observable value at the neutral fixed point 1 (three-branch maps
    /// only; ignored for the two-branch family, which is regular at 1).
    pub v_at_1: Vec<f64>,
    /// Invariant density at the lower boundary of the return set.
    pub h_boundary: f64,
    /// Mean return time to the return set.
    pub tau_bar: f64,
}

/// The law of the limiting driver at time 1.
///
/// Long excursions near a neutral fixed point contribute jumps in the
/// direction of the observable's value there, with weight proportional to
/// that value's alpha-th power; the overall mass combines the branch
/// geometry (the 1/4 or 1/9 factor and `alpha^alpha` from the excursion
/// tail), the invariant density at the return-set boundary, the mean
/// return time and the positive constant [`skew_prefactor`]. Directions
/// where the observable vanishes drop out; if every direction drops the
/// law is degenerate and an error is returned.
pub fn limit_spectral_measure(inputs: &LimitInputs) -> Result<StableLaw, StableError> {
    let LimitInputs { kind, alpha, v_at_0, v_at_1, h_boundary, tau_bar } = inputs;
    let (alpha, h_boundary, tau_bar) = (*alpha, *h_boundary, *tau_bar);
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(StableError::InvalidAlpha(alpha));
    }
    if !(tau_bar > 1.0) {
        return Err(StableError::InvalidTauBar(tau_bar));
    }
    assert!(h_boundary > 0.0 && h_boundary.is_finite());

    let contributions: Vec<&[f64]> = match kind {
        MapKind::Lsv => vec![v_at_0.as_slice()],
        MapKind::Pm => vec![v_at_0.as_slice(), v_at_1.as_slice()],
    };
    let dim = contributions[0].len();
    let branch_factor = match kind {
        MapKind::Lsv => 0.25,
        MapKind::Pm => 1.0 / 9.0,
    };

    let mut atoms = Vec::new();
    let mut strength = 0.0;
    for v in contributions {
        assert_eq!(v.len(), dim, "observable values must share a dimension");
        let m = norm(v);
        if m < 1e-12 {
            continue;
        }
        strength += m.powf(alpha);
        atoms.push((v.iter().map(|x| x / m).collect::<Vec<_>>(), m.powf(alpha)));
    }
    if atoms.is_empty() {
        return Err(StableError::DegenerateObservable);
    }

    let c = branch_factor * strength * alpha.powf(alpha) * h_boundary * tau_bar;
    let mass = c * skew_prefactor(alpha) / tau_bar;
    // normalise directional weights to a probability mixture, then scale
    // the whole measure to total mass `mass`
    let sigma = SpectralMeasure::new(
        dim,
        atoms.into_iter().map(|(d, w)| (d, w / strength)).collect(),
    )?;
    StableLaw::new(alpha, sigma.scaled(mass))
}

/// A sample path of the Levy process with marginal law `law` at time 1,
/// on the uniform n-point grid of [0, 1]: partial sums of n independent
/// copies of `n^(-1/alpha) X`.
pub fn sample_levy_path(law: &StableLaw, n: usize, rng: &mut impl Rng) -> CadlagPath {
    assert!(n >= 1);
    let dim = law.dim();
    let scale = (n as f64).powf(-1.0 / law.alpha());
    let mut increments = vec![0.0; n * dim];
    let mut draw = vec![0.0; dim];
    for k in 0..n {
        law.sample_into(rng, &mut draw);
        for c in 0..dim {
            increments[k * dim + c] = scale * draw[c];
        }
    }
    CadlagPath::from_uniform_increments(dim, &increments, 1.0)
        .expect("uniform grid with finite increments is always a valid path")
}

/// Lightweight seeded access used by validation suites: `replicas`
/// independent draws of `law`, flattened row-major.
pub fn sample_many(law: &StableLaw, replicas: usize, seed: u64) -> Vec<f64> {
    let dim = law.dim();
    let mut out = vec![0.0; replicas * dim];
    let mut rng = rng::root_rng(seed);
    for r in 0..replicas {
        let row = &mut out[r * dim..(r + 1) * dim];
        law.sample_into(&mut rng, row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::root_rng;
    use proptest::prelude::*;

    fn two_atom_law() -> StableLaw {
        let m = SpectralMeasure::new(
            2,
            vec![(vec![1.0, 0.0], 0.7), (vec![0.6, 0.8], 0.5)],
        )
        .unwrap();
        StableLaw::new(1.5, m).unwrap()
    }

    #[test]
    fn char_function_matches_high_precision_reference() {
        // reference computed symbolically at 50 digits
        let law = two_atom_law();
        let got = law.char_function(&[1.1, -0.4]);
        let want = Complex64::new(0.24890987172647069584, -0.31802452598352334268);
        assert!((got - want).norm() < 1e-14, "got {got}, want {want}");
    }

    #[test]
    fn char_function_is_one_at_zero_and_conjugate_symmetric() {
        let law = two_atom_law();
        assert!((law.char_function(&[0.0, 0.0]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for k in 0..50 {
            let u = [(k as f64 - 25.0) * 0.17, (k as f64).sin()];
            let neg = [-u[0], -u[1]];
            let defect = (law.char_function(&neg) - law.char_function(&u).conj()).norm();
            assert!(defect < 1e-15, "conjugate symmetry defect {defect:e}");
        }
    }

    #[test]
    fn char_function_modulus_separates_mass_from_skew() {
        let law = two_atom_law();
        for u in [[0.3, 0.9], [-1.2, 0.4], [2.0, 2.0]] {
            let want: f64 = law
                .measure()
                .atoms()
                .iter()
                .map(|a| a.weight * dot(&u, &a.direction).abs().powf(law.alpha()))
                .sum();
            let got = law.char_function(&u).norm();
            assert!((got - (-want).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn measure_validation_rejects_bad_atoms() {
        assert!(matches!(
            SpectralMeasure::new(2, vec![]),
            Err(StableError::EmptyMeasure)
        ));
        assert!(matches!(
            SpectralMeasure::new(2, vec![(vec![1.0, 1.0], 0.5)]),
            Err(StableError::BadDirection { index: 0, .. })
        ));
        assert!(matches!(
            SpectralMeasure::new(2, vec![(vec![1.0, 0.0], -0.5)]),
            Err(StableError::BadWeight { index: 0, .. })
        ));
        assert!(matches!(
            SpectralMeasure::new(2, vec![(vec![1.0], 0.5)]),
            Err(StableError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            StableLaw::new(2.0, SpectralMeasure::symmetric_scalar(1.0)),
            Err(StableError::InvalidAlpha(_))
        ));
    }

    #[test]
    fn duplicate_directions_merge() {
        let m = SpectralMeasure::new(
            1,
            vec![(vec![1.0], 0.25), (vec![-1.0], 0.5), (vec![1.0], 0.75)],
        )
        .unwrap();
        assert_eq!(m.atoms().len(), 2);
        assert!((m.total_mass() - 1.5).abs() < 1e-15);
        let plus = m.atoms().iter().find(|a| a.direction[0] > 0.0).unwrap();
        assert!((plus.weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn skew_prefactor_is_positive_and_hits_closed_form() {
        // at alpha = 3/2: cos(3 pi / 4) Gamma(-1/2) = sqrt(2 pi)
        let want = (2.0 * PI).sqrt();
        assert!((skew_prefactor(1.5) - want).abs() < 1e-12);
        for i in 1..=19 {
            let alpha = 1.0 + 0.05 * i as f64 - 0.025;
            assert!(skew_prefactor(alpha) > 0.0, "prefactor at {alpha}");
        }
    }

    #[test]
    fn limit_measure_matches_frozen_synthetic_cases() {
        // two-branch family: single direction along v(0)
        let lsv = limit_spectral_measure(&LimitInputs {
            kind: MapKind::Lsv,
            alpha: 1.5,
            v_at_0: vec![2.0],
            v_at_1: vec![],
            h_boundary: 0.9,
            tau_bar: 3.0,
        })
        .unwrap();
        assert_eq!(lsv.measure().atoms().len(), 1);
        assert_eq!(lsv.measure().atoms()[0].direction, vec![1.0]);
        let mass = lsv.measure().total_mass();
        assert!((mass - 2.9305850809609840204).abs() < 1e-12, "lsv mass {mass}");

        // three-branch family: both neutral points contribute
        let pm = limit_spectral_measure(&LimitInputs {
            kind: MapKind::Pm,
            alpha: 1.3,
            v_at_0: vec![1.5],
            v_at_1: vec![-0.5],
            h_boundary: 1.1,
            tau_bar: 2.2,
        })
        .unwrap();
        assert_eq!(pm.measure().atoms().len(), 2);
        let mass = pm.measure().total_mass();
        assert!((mass - 0.70916102878459071239).abs() < 1e-12, "pm mass {mass}");
        let w_plus = pm
            .measure()
            .atoms()
            .iter()
            .find(|a| a.direction[0] > 0.0)
            .unwrap()
            .weight;
        assert!((w_plus / mass - 0.80662007218235937137).abs() < 1e-12);
    }

    #[test]
    fn limit_measure_drops_vanishing_directions_and_rejects_degenerate() {
        let one_sided = limit_spectral_measure(&LimitInputs {
            kind: MapKind::Pm,
            alpha: 1.5,
            v_at_0: vec![1.0, 0.0],
            v_at_1: vec![0.0, 0.0],
            h_boundary: 1.0,
            tau_bar: 2.0,
        })
        .unwrap();
        assert_eq!(one_sided.measure().atoms().len(), 1);

        let degenerate = limit_spectral_measure(&LimitInputs {
            kind: MapKind::Lsv,
            alpha: 1.5,
            v_at_0: vec![0.0],
            v_at_1: vec![],
            h_boundary: 1.0,
            tau_bar: 2.0,
        });
        assert!(matches!(degenerate, Err(StableError::DegenerateObservable)));

        let bad_tau = limit_spectral_measure(&LimitInputs {
            kind: MapKind::Lsv,
            alpha: 1.5,
            v_at_0: vec![1.0],
            v_at_1: vec![],
            h_boundary: 1.0,
            tau_bar: 0.9,
        });
        assert!(matches!(bad_tau, Err(StableError::InvalidTauBar(_))));
    }

    /// Two-sample Kolmogorov-Smirnov statistic.
    fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (n, m) = (a.len(), b.len());
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < n && j < m {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
        }
        d
    }

    #[test]
    fn scalar_sampler_scaling_self_similarity() {
        // (X1 + X2) / 2^(1/alpha) has the law of X; two-sample KS below
        // the 1% critical value 1.628 sqrt((n+m)/(n m))
        let mut rng = root_rng(2024);
        for (alpha, beta) in [(1.3, 1.0), (1.5, 0.0), (1.7, -0.6)] {
            let n = 40_000;
            let scaled: Vec<f64> = (0..n)
                .map(|_| {
                    let x1 = sample_scalar_stable(alpha, 1.0, beta, &mut rng);
                    let x2 = sample_scalar_stable(alpha, 1.0, beta, &mut rng);
                    (x1 + x2) / 2.0f64.powf(1.0 / alpha)
                })
                .collect();
            let fresh: Vec<f64> =
                (0..n).map(|_| sample_scalar_stable(alpha, 1.0, beta, &mut rng)).collect();
            let crit = 1.628 * ((2 * n) as f64 / (n * n) as f64).sqrt();
            let d = ks_statistic(scaled, fresh);
            assert!(d < crit, "alpha={alpha} beta={beta}: KS {d} >= {crit}");
        }
    }

    #[test]
    fn scalar_sampler_symmetric_case_has_median_near_zero() {
        let mut rng = root_rng(7);
        let mut xs: Vec<f64> =
            (0..1_000_000).map(|_| sample_scalar_stable(1.5, 1.0, 0.0, &mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let median = xs[xs.len() / 2];
        assert!(median.abs() < 0.02, "median {median}");
    }

    #[test]
    fn scalar_sampler_matches_char_function_on_frequency_grid() {
        // empirical characteristic function against the exact one; the
        // variance proxy (1 - |phi|^2) / n gives the standard error scale
        let n = 150_000;
        for (alpha, beta, seed) in [(1.2, 1.0, 1u64), (1.5, 0.0, 2), (1.8, -0.7, 3)] {
            let mut rng = root_rng(seed);
            let xs: Vec<f64> =
                (0..n).map(|_| sample_scalar_stable(alpha, 1.0, beta, &mut rng)).collect();
            let m = SpectralMeasure::new(
                1,
                vec![
                    (vec![1.0], (1.0 + beta) / 2.0 + 1e-15),
                    (vec![-1.0], (1.0 - beta) / 2.0 + 1e-15),
                ],
            )
            .unwrap();
            let law = StableLaw::new(alpha, m).unwrap();
            for u in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
                let mut re = 0.0;
                let mut im = 0.0;
                for &x in &xs {
                    let (s, c) = (u * x).sin_cos();
                    re += c;
                    im += s;
                }
                let emp = Complex64::new(re / n as f64, im / n as f64);
                let theo = law.char_function(&[u]);
                let se = ((1.0 - theo.norm_sqr()).max(0.0) / n as f64).sqrt();
                let gap = (emp - theo).norm();
                assert!(
                    gap < 3.0 * se + 1e-12,
                    "alpha={alpha} beta={beta} u={u}: gap {gap}, 3se {}",
                    3.0 * se
                );
            }
        }
    }

    #[test]
    fn vector_sampler_single_atom_stays_on_its_ray() {
        let m = SpectralMeasure::new(2, vec![(vec![1.0, 0.0], 1.0)]).unwrap();
        let law = StableLaw::new(1.5, m).unwrap();
        let mut rng = root_rng(9);
        for _ in 0..1_000 {
            let x = law.sample(&mut rng);
            assert_eq!(x[1], 0.0, "off-ray component must vanish exactly");
        }
    }

    #[test]
    fn vector_sampler_symmetric_atoms_have_negligible_trimmed_skewness() {
        let law = StableLaw::new(1.5, SpectralMeasure::symmetric_scalar(0.5)).unwrap();
        let mut rng = root_rng(31);
        let mut xs: Vec<f64> = (0..1_000_000).map(|_| law.sample(&mut rng)[0]).collect();
        xs.sort_by(f64::total_cmp);
        // trim 0.5% from each tail so the third moment exists empirically
        let cut = xs.len() / 200;
        let core = &xs[cut..xs.len() - cut];
        let n = core.len() as f64;
        let mean = core.iter().sum::<f64>() / n;
        let m2 = core.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m3 = core.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
        let skew = m3 / m2.powf(1.5);
        assert!(skew.abs() < 0.05, "trimmed skewness {skew}");
    }

    #[test]
    fn levy_path_shape_and_determinism() {
        let law = two_atom_law();
        let path = sample_levy_path(&law, 1000, &mut root_rng(5));
        assert_eq!(path.len(), 1001);
        assert_eq!(path.dim(), 2);
        assert_eq!(path.point(0), &[0.0, 0.0]);
        assert_eq!(path.horizon(), 1.0);
        let again = sample_levy_path(&law, 1000, &mut root_rng(5));
        assert_eq!(path, again);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn char_function_modulus_bounded_and_ray_decreasing(
            alpha in 1.05f64..1.95,
            ux in -3.0f64..3.0,
            uy in -3.0f64..3.0,
            t in 1.0f64..4.0,
        ) {
            let m = SpectralMeasure::new(
                2,
                vec![(vec![1.0, 0.0], 0.7), (vec![0.6, 0.8], 0.5)],
            ).unwrap();
            let law = StableLaw::new(alpha, m).unwrap();
            let phi = law.char_function(&[ux, uy]).norm();
            prop_assert!(phi <= 1.0 + 1e-15);
            let further = law.char_function(&[t * ux, t * uy]).norm();
            prop_assert!(further <= phi + 1e-15, "|phi| must decrease along rays");
        }

        #[test]
        fn scalar_sampler_produces_finite_values(
            alpha in 1.05f64..1.95,
            skew in -1.0f64..=1.0,
            seed in any::<u64>(),
        ) {
            let mut rng = root_rng(seed);
            for _ in 0..32 {
                let x = sample_scalar_stable(alpha, 1.0, skew, &mut rng);
                prop_assert!(x.is_finite());
            }
        }
    }
}
