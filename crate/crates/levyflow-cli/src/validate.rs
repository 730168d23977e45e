//! Named validation suites.
//!
//! Each suite binds a statistical or exact claim about the library to the
//! thresholds configured under its own key prefix and returns a report
//! with one check per criterion. Auxiliary randomness (random test
//! instances, label shuffles) runs on streams far outside the replica
//! range, so suite instances never share draws with experiment replicas:
//! channel `c` uses stream `2^62 + c` of the run seed, and the Monte
//! Carlo reference side of the homogenisation suite keys its replica
//! streams off `seed + 1`.

use anyhow::{bail, Context, Result};
use levyflow::embed::{embed, PathFunction, DEFAULT_MAX_JUMPS};
use levyflow::fastslow::{run_fast_slow, sample_driver};
use levyflow::maps::{IntermittentMap, DEFAULT_MAX_RETURN_ITER};
use levyflow::metrics::{sm1_distance, sm1_embedded_distance};
use levyflow::paths::{p_variation, p_variation_bruteforce, CadlagPath};
use levyflow::rde::{
    marcus_forward_gap, marcus_jump, marcus_solve, DriverPath, GapOpts, OdeOpts, VectorField,
};
use levyflow::rng::replica_rng;
use levyflow::stable::{sample_levy_path, sample_many, SpectralMeasure, StableLaw};
use levyflow::stats::{
    default_ecf_grid, ecf_distance, energy_permutation, hill_default_k, hill_estimator,
    quantile_stability,
};
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::config::{predicted_law, Config};
use crate::experiments::observable_with_note;
use crate::output::{component_labels, Check, OutDir, Report};

pub const SUITES: &[&str] = &[
    "branch-points",
    "circle",
    "homogenise",
    "marcus-gap",
    "pvar-oracle",
    "pvar-tight",
    "stable-law",
    "tail-index",
];

fn aux_rng(seed: u64, channel: u64) -> ChaCha12Rng {
    replica_rng(seed, (1 << 62) + channel)
}

/// Fresh initial fast state for replica `r`, avoiding the fixed point 0.
fn uniform_y(seed: u64, r: u64) -> f64 {
    let mut rng = replica_rng(seed, r);
    loop {
        let y = rng.random::<f64>();
        if y > 0.0 {
            return y;
        }
    }
}

pub fn run_suite(name: &str, cfg: &Config, out: &mut OutDir) -> Result<Report> {
    let report = match name {
        "branch-points" => branch_points(cfg)?,
        "circle" => circle(cfg)?,
        "homogenise" => homogenise(cfg, out)?,
        "marcus-gap" => marcus_gap(cfg)?,
        "pvar-oracle" => pvar_oracle(cfg)?,
        "pvar-tight" => pvar_tight(cfg, out)?,
        "stable-law" => stable_law(cfg, out)?,
        "tail-index" => tail_index(cfg)?,
        other => bail!("unknown suite `{other}`; available: {}", SUITES.join(", ")),
    };
    Ok(report.seal())
}

/// Neutral-branch geometry: the k-th branch point of the configured map
/// family must follow its closed-form power law.
fn branch_points(cfg: &Config) -> Result<Report> {
    let mut report = Report::new("branch-points", &cfg.digest(), cfg.seed());
    let k = cfg.usize("branch-points.k")?;
    let tol = cfg.f64("branch-points.tol")?;
    let kind = cfg.map()?.kind();
    for alpha in cfg.list_f64("branch-points.alphas")? {
        let map = IntermittentMap::new(kind, alpha).context("branch-points.alphas out of range")?;
        // bisection residual far below the asymptote scale being judged
        let points = map.branch_points(k, 1e-12)?;
        let a_k = points[k - 1];
        let rel_err = (a_k / map.branch_point_asymptote(k as u64) - 1.0).abs();
        report.number(&format!("a_k_alpha_{alpha}"), a_k);
        report.check(Check::below(format!("power-law-alpha-{alpha}"), rel_err, tol));
    }
    report.number("k", k as f64);
    Ok(report)
}

/// Return-time tail: the Hill estimate over a long chain of first returns
/// must recover the map's tail exponent.
fn tail_index(cfg: &Config) -> Result<Report> {
    let mut report = Report::new("tail-index", &cfg.digest(), cfg.seed());
    let map = cfg.map()?;
    let count = cfg.usize("tail-index.count")?;
    let target = if cfg.is_set("tail-index.target") {
        cfg.f64("tail-index.target")?
    } else {
        map.alpha()
    };
    let tol = cfg.f64("tail-index.tol")?;
    let mut rng = replica_rng(cfg.seed(), 0);
    let samples = map.return_chain(count, DEFAULT_MAX_RETURN_ITER, &mut rng)?;
    let taus: Vec<f64> = samples.iter().map(|s| s.tau as f64).collect();
    let estimate = hill_estimator(&taus, hill_default_k(taus.len()))?;
    report.number("alpha_hat", estimate.alpha_hat);
    report.number("order_statistics", estimate.k as f64);
    report.number("standard_error", estimate.standard_error);
    report.check(Check::below("tail-index-error", (estimate.alpha_hat - target).abs(), tol));
    Ok(report)
}

/// Exact p-variation against the exhaustive oracle on short random step
/// paths: the pruned dynamic program must agree bitwise.
fn pvar_oracle(cfg: &Config) -> Result<Report> {
    let mut report = Report::new("pvar-oracle", &cfg.digest(), cfg.seed());
    let paths = cfg.usize("pvar-oracle.paths")?;
    let max_points = cfg.usize("pvar-oracle.max_points")?;
    let ps = cfg.list_f64("pvar-oracle.ps")?;
    let mut rng = aux_rng(cfg.seed(), 3);
    let mut equal = 0u64;
    let mut total = 0u64;
    for _ in 0..paths {
        let n = 3 + (rng.random::<u32>() as usize) % (max_points - 2);
        let dim = 1 + (rng.random::<u32>() as usize) % 2;
        let mut values = vec![0.0; dim];
        for k in 1..n {
            for c in 0..dim {
                let prev = values[(k - 1) * dim + c];
                values.push(prev + 2.0 * rng.random::<f64>() - 1.0);
            }
        }
        for &p in &ps {
            let fast = p_variation(&values, dim, p);
            let oracle = p_variation_bruteforce(&values, dim, p)?;
            total += 1;
            if fast == oracle {
                equal += 1;
            }
        }
    }
    report.number("comparisons", total as f64);
    report.number("equal", equal as f64);
    report.check(Check::above("oracle-agreement", equal as f64 / total as f64, 1.0));
    Ok(report)
}

/// Tightness proxy: the upper quantile of the driver's p-variation must
/// stay within a fixed relative band as the time scale grows.
fn pvar_tight(cfg: &Config, out: &mut OutDir) -> Result<Report> {
    let mut report = Report::new("pvar-tight", &cfg.digest(), cfg.seed());
    let map = cfg.map()?;
    let obs = observable_with_note(cfg, &map)?;
    let p = map.alpha() + cfg.f64("pvar-tight.p_offset")?;
    let ns = cfg.list_usize("pvar-tight.ns")?;
    if ns.len() < 2 {
        bail!("`pvar-tight.ns` needs at least two lengths");
    }
    let replicas = cfg.usize("pvar-tight.replicas")?;
    let mut series = Vec::with_capacity(ns.len());
    for (ni, &n) in ns.iter().enumerate() {
        eprintln!("sampling {replicas} drivers at n = {n}...");
        let mut pvars = Vec::with_capacity(replicas);
        for r in 0..replicas {
            let y0 = uniform_y(cfg.seed(), (ni * replicas + r) as u64);
            let wn = sample_driver(&map, &obs, n, y0)?;
            pvars.push(wn.p_variation(p));
        }
        series.push((n, pvars));
    }
    let stability = quantile_stability(&series, 0.95);
    let rows: Vec<Vec<f64>> =
        stability.quantiles.iter().map(|&(n, q)| vec![n as f64, q]).collect();
    out.write_table_csv("quantiles.csv", &["n", "q95"], &rows)?;
    for &(n, q) in &stability.quantiles {
        report.number(&format!("q95_n{n}"), q);
    }
    report.number("p", p);
    report.check(Check::below(
        "q95-relative-spread",
        stability.max_rel_spread,
        cfg.f64("pvar-tight.spread")?,
    ));
    Ok(report)
}

/// A full rotation delivered in a narrow ramp: the solved state returns
/// to its start, the linear-bridged pair stays far from the constant
/// limit, and the flow-bridged pair collapses onto it.
fn circle(cfg: &Config) -> Result<Report> {
    let mut report = Report::new("circle", &cfg.digest(), cfg.seed());
    let theta = cfg.f64("circle.theta")?;
    let n = cfg.usize("circle.n")?;
    let grid = cfg.f64("circle.grid")?;
    let delta = cfg.f64("circle.delta")?;
    let field = VectorField::rotation(2.0);
    let xi = [1.0, 0.0];
    let driver = DriverPath::ramp(theta, 0.5, 0.125, n);
    let solved = marcus_solve(&driver, &field, &xi, &OdeOpts::default())?;

    let end = solved.solution.end_value();
    let endpoint_gap = ((end[0] - xi[0]).powi(2) + (end[1] - xi[1]).powi(2)).sqrt();
    report.number("endpoint_gap", endpoint_gap);
    report.check(Check::below("turn-returns-home", endpoint_gap, cfg.f64("circle.endpoint_tol")?));

    // constant limit of the pair: the driver jumps by theta at the ramp
    // time while the state never moves
    let pair = solved.pair_path();
    let limit = CadlagPath::new(
        3,
        vec![0.0, 0.5],
        vec![0.0, xi[0], xi[1], theta, xi[0], xi[1]],
        1.0,
    )
    .expect("two-point limit path is valid");
    let d_lin = sm1_distance(&pair, &limit, grid);
    report.number("linear_bridged_distance", d_lin);
    report.check(Check::above("linear-bridging-stays-apart", d_lin, cfg.f64("circle.sm1_floor")?));

    let phi = PathFunction::FlowBridge { field, ode_steps: 32 };
    let e_pair = embed(&pair, &phi, delta, DEFAULT_MAX_JUMPS)?;
    let e_limit = embed(&limit, &phi, delta, DEFAULT_MAX_JUMPS)?;
    let d_flow = sm1_embedded_distance(&e_pair, &e_limit, grid);
    report.number("flow_bridged_distance", d_flow);
    report.check(Check::below("flow-bridging-collapses", d_flow, cfg.f64("circle.flow_tol")?));
    report.check(Check::below(
        "flow-to-linear-ratio",
        d_flow / d_lin,
        cfg.f64("circle.flow_frac")?,
    ));
    Ok(report)
}

/// Forward-versus-Marcus discrepancies: the single-jump second-order
/// bound on random affine fields, gap-to-jump-mass proportionality under
/// staircase refinement, and the exact exponential form of the scalar
/// geometric solution.
fn marcus_gap(cfg: &Config) -> Result<Report> {
    let mut report = Report::new("marcus-gap", &cfg.digest(), cfg.seed());
    let tight = OdeOpts { refine_tol: Some(1e-12), ..OdeOpts::default() };

    // single jumps: |marcus - forward| against (lip sup / 2) h^2
    let field_count = cfg.usize("marcus-gap.fields")?;
    let hs = cfg.list_f64("marcus-gap.hs")?;
    let mut rng = aux_rng(cfg.seed(), 1);
    for &h in &hs {
        let mut max_ratio = 0.0f64;
        for _ in 0..field_count {
            let m = 1 + (rng.random::<u32>() as usize) % 2;
            let d = 1 + (rng.random::<u32>() as usize) % 2;
            let mut mat = |scale: f64| -> Vec<f64> {
                (0..m * d).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect()
            };
            let b0 = mat(0.6);
            let bx = (0..m).map(|_| mat(0.6)).collect::<Vec<_>>();
            let field = VectorField::affine(m, d, b0, bx, 5.0);
            let x: Vec<f64> = (0..m).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            let mut dw: Vec<f64> = (0..d).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            let norm = dw.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut dw {
                *v *= h / norm;
            }
            let jumped = marcus_jump(&field, &x, &dw, 64, &tight)?;
            let mut forward = vec![0.0; m];
            field.noise_apply(&x, &dw, &mut forward);
            let disc = jumped
                .iter()
                .zip(x.iter().zip(&forward))
                .map(|(j, (xi, f))| (j - xi - f).powi(2))
                .sum::<f64>()
                .sqrt();
            let bound = 0.5 * field.lip_bound() * field.sup_bound() * h * h;
            max_ratio = max_ratio.max(disc / bound);
        }
        report.number(&format!("max_gap_to_bound_h_{h}"), max_ratio);
        report.check(Check::below(format!("single-jump-bound-h-{h}"), max_ratio, 1.0));
    }

    // staircase refinement: the gap must shrink like the jump mass
    let field = VectorField::rotation(2.0);
    let mut ratios = Vec::new();
    for k in cfg.list_usize("marcus-gap.stair_ks")? {
        let driver = DriverPath::staircase(1.0, k);
        let gap = marcus_forward_gap(
            &driver,
            &field,
            &[1.0, 0.0],
            &GapOpts { p: 1.5, k_hat: 1.0, ode: OdeOpts::default() },
        )?;
        report.number(&format!("gap_over_jump_mass_k{k}"), gap.p_var_gap / gap.jump_sum_sq);
        ratios.push(gap.p_var_gap / gap.jump_sum_sq);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    report.check(Check::below(
        "staircase-ratio-drift",
        hi / lo - 1.0,
        cfg.f64("marcus-gap.ratio_drift")?,
    ));

    // scalar geometric solutions: endpoint equals xi * exp(sum of jumps)
    let chain_drivers = cfg.usize("marcus-gap.chain_drivers")?;
    let chain_tol = cfg.f64("marcus-gap.chain_tol")?;
    let field = VectorField::scalar_linear(20.0);
    let mut rng = aux_rng(cfg.seed(), 2);
    let mut max_err = 0.0f64;
    for _ in 0..chain_drivers {
        let jumps = 1 + (rng.random::<u32>() as usize) % 10;
        let mut times = vec![0.0];
        let mut stamps: Vec<f64> =
            (0..jumps).map(|_| 0.05 + 0.9 * rng.random::<f64>()).collect();
        stamps.sort_unstable_by(f64::total_cmp);
        stamps.dedup();
        times.extend(&stamps);
        let mut values = vec![0.0];
        let mut total = 0.0;
        for _ in &stamps {
            let dw = 0.5 * (rng.random::<f64>() - 0.5);
            total += dw;
            values.push(values.last().unwrap() + dw);
        }
        // step-grid drivers must be defined out to the horizon
        times.push(1.0);
        values.push(*values.last().unwrap());
        let xi = 0.5 + rng.random::<f64>();
        let w = CadlagPath::new(1, times, values, 1.0).expect("sorted stamps form a path");
        let solved = marcus_solve(&DriverPath::step_grid(w), &field, &[xi], &tight)?;
        let err = (solved.solution.end_value()[0] - xi * total.exp()).abs();
        max_err = max_err.max(err);
    }
    report.number("max_exponential_error", max_err);
    report.check(Check::below("geometric-solution-exponential", max_err, chain_tol));
    Ok(report)
}

/// Endpoint law of the rescaled driver against the stable law predicted
/// from map data, plus self-consistency of the stable sampler itself on
/// random spectral measures.
fn stable_law(cfg: &Config, out: &mut OutDir) -> Result<Report> {
    let mut report = Report::new("stable-law", &cfg.digest(), cfg.seed());
    let se_mult = cfg.f64("stable-law.se_mult")?;
    let sample_count = cfg.usize("stable-law.samples")?;
    let measure_count = cfg.usize("stable-law.measures")?;
    let mut rng = aux_rng(cfg.seed(), 4);

    // sampler versus its own characteristic function
    for alpha in cfg.list_f64("stable-law.alphas")? {
        let mut worst = 0.0f64;
        for i in 0..measure_count {
            let dim = 1 + i % 3;
            let atom_count = 1 + (rng.random::<u32>() as usize) % 3;
            let atoms: Vec<(Vec<f64>, f64)> = (0..atom_count)
                .map(|_| {
                    let mut dir: Vec<f64> =
                        (0..dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
                    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
                    for v in &mut dir {
                        *v /= norm;
                    }
                    (dir, 0.2 + 1.3 * rng.random::<f64>())
                })
                .collect();
            let measure = SpectralMeasure::new(dim, atoms).expect("unit atoms are valid");
            let law = StableLaw::new(alpha, measure)?;
            let seed = cfg.seed().wrapping_add(977 * (i as u64 + 1));
            let samples = sample_many(&law, sample_count, seed);
            let rep = ecf_distance(&samples, dim, &law, &default_ecf_grid(&law));
            for (k, (emp, theo)) in rep.empirical.iter().zip(&rep.theoretical).enumerate() {
                let gap = (emp - theo).norm();
                worst = worst.max(gap / (se_mult * rep.monte_carlo_se[k]));
            }
        }
        report.number(&format!("sampler_worst_gap_in_se_units_alpha_{alpha}"), worst * se_mult);
        report.check(Check::below(format!("sampler-ecf-alpha-{alpha}"), worst, 1.0));
    }

    // driver endpoints versus the predicted law
    let map = cfg.map()?;
    let obs = observable_with_note(cfg, &map)?;
    eprintln!("estimating invariant statistics over {} iterates...", cfg.u64("law.stats_len")?);
    let predicted = predicted_law(cfg, &map, &obs)?;
    report.number("h_boundary", predicted.stats.h_boundary);
    report.number("tau_bar", predicted.stats.tau_bar);
    report.check(Check::below(
        "return-time-measure-identity",
        predicted.stats.kac_defect(),
        cfg.f64("stable-law.kac_tol")?,
    ));

    let n = cfg.usize("stable-law.driver_n")?;
    let replicas = cfg.usize("stable-law.driver_replicas")?;
    eprintln!("sampling {replicas} driver endpoints at n = {n}...");
    let dim = obs.dim();
    let mut endpoints = Vec::with_capacity(replicas * dim);
    for r in 0..replicas {
        let wn = sample_driver(&map, &obs, n, uniform_y(cfg.seed(), r as u64))?;
        endpoints.extend_from_slice(wn.end_value());
    }
    let mut header: Vec<String> = vec!["replica".into()];
    header.extend(component_labels('w', dim));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = endpoints
        .chunks(dim)
        .enumerate()
        .map(|(r, w)| {
            let mut row = vec![r as f64];
            row.extend_from_slice(w);
            row
        })
        .collect();
    out.write_table_csv("driver-endpoints.csv", &header_refs, &rows)?;

    let rep = ecf_distance(&endpoints, dim, &predicted.law, &default_ecf_grid(&predicted.law));
    report.number("endpoint_ecf_max_gap", rep.max_abs_gap);
    report.number("endpoint_ecf_max_se", rep.max_se());
    report.check(Check::below(
        "endpoint-ecf-every-grid-point",
        rep.max_abs_gap,
        cfg.f64("stable-law.ecf_tol")?,
    ));
    Ok(report)
}

/// End-to-end distributional comparison: slow-variable endpoints from the
/// deterministic system against Monte Carlo endpoints of the limiting
/// equation, judged by a permutation-calibrated energy distance.
fn homogenise(cfg: &Config, out: &mut OutDir) -> Result<Report> {
    let mut report = Report::new("homogenise", &cfg.digest(), cfg.seed());
    let map = cfg.map()?;
    let obs = observable_with_note(cfg, &map)?;
    let field = cfg.field()?;
    if obs.dim() != field.dim_noise() {
        bail!(
            "observable dimension {} does not match the field's noise dimension {}",
            obs.dim(),
            field.dim_noise()
        );
    }
    let xi = cfg.xi(field.dim_state())?;
    let m = field.dim_state();
    let n = cfg.usize("homogenise.n")?;
    let replicas = cfg.usize("homogenise.replicas")?;

    eprintln!("running {replicas} fast-slow replicas at n = {n}...");
    let mut deterministic = Vec::with_capacity(replicas * m);
    for r in 0..replicas {
        let run = run_fast_slow(&map, &obs, &field, &xi, n, uniform_y(cfg.seed(), r as u64))?;
        deterministic.extend_from_slice(run.xn.end_value());
    }

    eprintln!("estimating invariant statistics over {} iterates...", cfg.u64("law.stats_len")?);
    let predicted = predicted_law(cfg, &map, &obs)?;
    report.number("h_boundary", predicted.stats.h_boundary);
    report.number("tau_bar", predicted.stats.tau_bar);
    report.number("kac_defect", predicted.stats.kac_defect());

    let mc_n = cfg.usize("homogenise.mc_n")?;
    eprintln!("solving {replicas} limiting-equation replicas on {mc_n}-point paths...");
    let opts = OdeOpts::fixed(4, 1);
    let mut reference = Vec::with_capacity(replicas * m);
    for r in 0..replicas {
        let mut rng = replica_rng(cfg.seed().wrapping_add(1), r as u64);
        let path = sample_levy_path(&predicted.law, mc_n, &mut rng);
        let solved = marcus_solve(&DriverPath::step_grid(path), &field, &xi, &opts)?;
        reference.extend_from_slice(solved.solution.end_value());
    }

    let labels = component_labels('x', m);
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let mut header = vec!["replica"];
    header.extend(&label_refs);
    let to_rows = |flat: &[f64]| -> Vec<Vec<f64>> {
        flat.chunks(m)
            .enumerate()
            .map(|(r, x)| {
                let mut row = vec![r as f64];
                row.extend_from_slice(x);
                row
            })
            .collect()
    };
    out.write_table_csv("fastslow-endpoints.csv", &header, &to_rows(&deterministic))?;
    out.write_table_csv("mc-endpoints.csv", &header, &to_rows(&reference))?;

    let permutations = cfg.usize("homogenise.permutations")?;
    eprintln!("calibrating energy distance with {permutations} relabelings...");
    let perm = energy_permutation(
        &deterministic,
        &reference,
        m,
        permutations,
        cfg.seed().wrapping_add(2),
    );
    report.number("energy_statistic", perm.statistic);
    report.number("permutation_q95", perm.quantile95);
    report.number("permutation_q99", perm.quantile99);
    report.number("p_value", perm.p_value);
    report.check(Check {
        name: "energy-below-permutation-q95".into(),
        value: perm.statistic,
        threshold: perm.quantile95,
        pass: perm.statistic <= perm.quantile95,
    });
    Ok(report)
}
