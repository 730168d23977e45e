//! The data-producing subcommands: each composes library calls from the
//! effective config, writes path CSVs and a stats report, and leaves the
//! manifest bookkeeping to the caller.

use anyhow::{bail, Context, Result};
use levyflow::fastslow::{driver_statistics, run_fast_slow, sample_driver, Observable};
use levyflow::maps::{IntermittentMap, DEFAULT_MAX_RETURN_ITER};
use levyflow::rde::{forward_solve, marcus_forward_gap, marcus_solve, DriverPath, GapOpts, OdeOpts};
use levyflow::rng::replica_rng;
use levyflow::stable::{sample_levy_path, StableLaw};
use levyflow::stats::{hill_default_k, hill_estimator, quantile};
use rand::Rng;

use crate::config::{predicted_law, Config};
use crate::output::{component_labels, OutDir, Report};

/// Initial fast state for replica `r`: the configured point, or a fresh
/// uniform draw from the replica's stream.
fn initial_y(cfg: &Config, r: u64) -> Result<f64> {
    if cfg.is_set("run.y0") {
        if cfg.usize("run.replicas")? > 1 {
            bail!("`run.y0` fixes one orbit; leave it empty when `run.replicas` > 1");
        }
        let y0 = cfg.f64("run.y0")?;
        if !(0.0 < y0 && y0 < 1.0) {
            bail!("`run.y0` must lie strictly inside (0, 1), got {y0}");
        }
        return Ok(y0);
    }
    let mut rng = replica_rng(cfg.seed(), r);
    loop {
        let y = rng.random::<f64>();
        if y > 0.0 {
            return Ok(y);
        }
    }
}

/// Centered observable, with a progress note around the long calibration
/// orbit when no explicit centering is configured.
pub fn observable_with_note(cfg: &Config, map: &IntermittentMap) -> Result<Observable> {
    if !cfg.is_set("observable.center") {
        eprintln!(
            "calibrating observable over {} iterates...",
            cfg.u64("observable.calibration")?
        );
    }
    cfg.observable(map)
}

/// The driver law for `levy` and levy-driven `rde` runs: explicit atoms,
/// or the law predicted from map data (which costs a calibration orbit
/// plus invariant statistics).
fn driver_law(cfg: &Config, report: &mut Report) -> Result<StableLaw> {
    match cfg.str("law.source") {
        "atoms" => cfg.atom_law(),
        "limit" => {
            let map = cfg.map()?;
            let obs = observable_with_note(cfg, &map)?;
            eprintln!("estimating invariant statistics over {} iterates...", cfg.u64("law.stats_len")?);
            let predicted = predicted_law(cfg, &map, &obs)?;
            report.number("h_boundary", predicted.stats.h_boundary);
            report.number("tau_bar", predicted.stats.tau_bar);
            report.number("kac_defect", predicted.stats.kac_defect());
            Ok(predicted.law)
        }
        other => bail!("`law.source` = `{other}`: expected atoms or limit"),
    }
}

pub fn map_orbit(cfg: &Config, out: &mut OutDir) -> Result<()> {
    let map = cfg.map()?;
    let n = cfg.usize("run.n")?;
    let y0 = initial_y(cfg, 0)?;
    let orbit = map.orbit(y0, n);
    let rows: Vec<Vec<f64>> = orbit.iter().enumerate().map(|(k, &y)| vec![k as f64, y]).collect();
    out.write_table_csv("orbit.csv", &["t", "y"], &rows)?;

    let mut report = Report::new("map_orbit", &cfg.digest(), cfg.seed());
    let inside = orbit.iter().filter(|&&y| map.in_return_set(y)).count();
    report.number("points", orbit.len() as f64);
    report.number("fraction_in_return_set", inside as f64 / orbit.len() as f64);
    report.number("y0", y0);
    out.write_report("stats.json", &report.seal())
}

pub fn returns(cfg: &Config, out: &mut OutDir) -> Result<()> {
    let map = cfg.map()?;
    let count = cfg.usize("returns.count")?;
    let mut rng = replica_rng(cfg.seed(), 0);
    let samples = map
        .return_chain(count, DEFAULT_MAX_RETURN_ITER, &mut rng)
        .context("return sampling failed")?;
    let rows: Vec<Vec<f64>> =
        samples.iter().map(|s| vec![s.tau as f64, s.point]).collect();
    out.write_table_csv("returns.csv", &["tau", "point"], &rows)?;

    let taus: Vec<f64> = samples.iter().map(|s| s.tau as f64).collect();
    let estimate = hill_estimator(&taus, hill_default_k(taus.len()))
        .context("tail estimation failed")?;
    let mut report = Report::new("hill_tail_index", &cfg.digest(), cfg.seed());
    report.number("alpha_hat", estimate.alpha_hat);
    report.number("order_statistics", estimate.k as f64);
    report.number("standard_error", estimate.standard_error);
    report.number("mean_tau", taus.iter().sum::<f64>() / taus.len() as f64);
    out.write_report("stats.json", &report.seal())
}

pub fn driver(cfg: &Config, out: &mut OutDir) -> Result<()> {
    let map = cfg.map()?;
    let obs = observable_with_note(cfg, &map)?;
    let n = cfg.usize("run.n")?;
    let replicas = cfg.usize("run.replicas")?;
    let ps = cfg.p_exponents()?;

    let mut report = Report::new("driver_statistics", &cfg.digest(), cfg.seed());
    let wn = sample_driver(&map, &obs, n, initial_y(cfg, 0)?)?;
    out.write_path_csv("driver.csv", &wn, &component_labels('w', wn.dim()))?;

    if replicas == 1 {
        for &p in &ps {
            let stats = driver_statistics(&wn, p);
            report.number(&format!("p_var_{p}"), stats.p_var);
        }
        let stats = driver_statistics(&wn, ps[0]);
        report.number("jump_sum_sq", stats.jump_sum_sq);
        for (i, v) in stats.end_value.iter().enumerate() {
            report.number(&format!("end_w{}", i + 1), *v);
        }
        return out.write_report("stats.json", &report.seal());
    }

    let dim = obs.dim();
    let mut header: Vec<String> = vec!["replica".into()];
    header.extend(component_labels('w', dim));
    header.extend(ps.iter().map(|p| format!("pvar_{p}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(replicas);
    let mut pvars: Vec<Vec<f64>> = vec![Vec::with_capacity(replicas); ps.len()];
    for r in 0..replicas {
        let wn = sample_driver(&map, &obs, n, initial_y(cfg, r as u64)?)?;
        let mut row = vec![r as f64];
        row.extend_from_slice(wn.end_value());
        for (j, &p) in ps.iter().enumerate() {
            let pv = wn.p_variation(p);
            pvars[j].push(pv);
            row.push(pv);
        }
        rows.push(row);
    }
    out.write_table_csv("endpoints.csv", &header_refs, &rows)?;
    for (j, &p) in ps.iter().enumerate() {
        pvars[j].sort_unstable_by(f64::total_cmp);
        report.number(&format!("p_var_{p}_median"), quantile(&pvars[j], 0.5));
        report.number(&format!("p_var_{p}_q95"), quantile(&pvars[j], 0.95));
    }
    report.number("replicas", replicas as f64);
    out.write_report("stats.json", &report.seal())
}

pub fn fastslow(cfg: &Config, out: &mut OutDir) -> Result<()> {
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
    let n = cfg.usize("run.n")?;
    let replicas = cfg.usize("run.replicas")?;
    let ps = cfg.p_exponents()?;

    let run = run_fast_slow(&map, &obs, &field, &xi, n, initial_y(cfg, 0)?)?;
    out.write_path_csv("wn.csv", &run.wn, &component_labels('w', run.wn.dim()))?;
    out.write_path_csv("xn.csv", &run.xn, &component_labels('x', run.xn.dim()))?;

    let mut report = Report::new("fast_slow_run", &cfg.digest(), cfg.seed());
    let stats = driver_statistics(&run.wn, ps[0]);
    report.number(&format!("p_var_{}", ps[0]), stats.p_var);
    report.number("jump_sum_sq", stats.jump_sum_sq);
    for (i, v) in run.xn.end_value().iter().enumerate() {
        report.number(&format!("end_x{}", i + 1), *v);
    }

    if replicas > 1 {
        let mut header: Vec<String> = vec!["replica".into()];
        header.extend(component_labels('w', obs.dim()));
        header.extend(component_labels('x', field.dim_state()));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut rows = Vec::with_capacity(replicas);
        for r in 0..replicas {
            let run = run_fast_slow(&map, &obs, &field, &xi, n, initial_y(cfg, r as u64)?)?;
            let mut row = vec![r as f64];
            row.extend_from_slice(run.wn.end_value());
            row.extend_from_slice(run.xn.end_value());
            rows.push(row);
        }
        out.write_table_csv("endpoints.csv", &header_refs, &rows)?;
        report.number("replicas", replicas as f64);
    }
    out.write_report("stats.json", &report.seal())
}

pub fn levy(cfg: &Config, out: &mut OutDir) -> Result<()> {
    let mut report = Report::new("levy_path", &cfg.digest(), cfg.seed());
    let law = driver_law(cfg, &mut report)?;
    let n = cfg.usize("levy.n")?;
    let replicas = cfg.usize("run.replicas")?;

    let path = sample_levy_path(&law, n, &mut replica_rng(cfg.seed(), 0));
    out.write_path_csv("levy.csv", &path, &component_labels('w', path.dim()))?;

    report.number("alpha", law.alpha());
    report.number("total_mass", law.measure().total_mass());
    report.number("atoms", law.measure().atoms().len() as f64);
    report.number("max_jump", path.max_jump());

    if replicas > 1 {
        let mut header: Vec<String> = vec!["replica".into()];
        header.extend(component_labels('w', law.dim()));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<f64>> = (0..replicas)
            .map(|r| {
                let path = sample_levy_path(&law, n, &mut replica_rng(cfg.seed(), r as u64));
                let mut row = vec![r as f64];
                row.extend_from_slice(path.end_value());
                row
            })
            .collect();
        out.write_table_csv("endpoints.csv", &header_refs, &rows)?;
    }
    out.write_report("stats.json", &report.seal())
}

/// Solver options from the `rde.*` keys; a zero tolerance disables the
/// endpoint refinement loop.
pub fn ode_opts(cfg: &Config) -> Result<OdeOpts> {
    let tol = cfg.f64("rde.refine_tol")?;
    Ok(OdeOpts {
        steps_per_jump: cfg.usize("rde.steps_per_jump")?,
        steps_per_cell: cfg.usize("rde.steps_per_cell")?,
        refine_tol: (tol > 0.0).then_some(tol),
        max_doublings: cfg.u64("rde.max_doublings")? as u32,
    })
}

pub fn rde(cfg: &Config, out: &mut OutDir) -> Result<()> {
    let field = cfg.field()?;
    let mut report = Report::new("rde_solve", &cfg.digest(), cfg.seed());
    let driver = match cfg.str("rde.driver") {
        "ramp" => DriverPath::ramp(
            cfg.f64("rde.rise")?,
            cfg.f64("rde.at")?,
            cfg.f64("rde.width")?,
            cfg.usize("rde.substeps")?,
        ),
        "staircase" => DriverPath::staircase(cfg.f64("rde.rise")?, cfg.usize("rde.k")?),
        "levy" => {
            let law = driver_law(cfg, &mut report)?;
            let path = sample_levy_path(&law, cfg.usize("levy.n")?, &mut replica_rng(cfg.seed(), 0));
            DriverPath::step_grid(path)
        }
        other => bail!("`rde.driver` = `{other}`: expected ramp, staircase, or levy"),
    };
    if driver.w().dim() != field.dim_noise() {
        bail!(
            "driver dimension {} does not match the field's noise dimension {}",
            driver.w().dim(),
            field.dim_noise()
        );
    }
    let xi = cfg.xi(field.dim_state())?;
    let opts = ode_opts(cfg)?;
    let labels = component_labels('x', field.dim_state());

    match cfg.str("rde.rule") {
        "marcus" => {
            let pair = marcus_solve(&driver, &field, &xi, &opts)?;
            out.write_path_csv("marcus.csv", &pair.solution, &labels)?;
            for (i, v) in pair.solution.end_value().iter().enumerate() {
                report.number(&format!("end_x{}", i + 1), *v);
            }
        }
        "forward" => {
            let pair = forward_solve(&driver, &field, &xi, &opts)?;
            out.write_path_csv("forward.csv", &pair.solution, &labels)?;
            for (i, v) in pair.solution.end_value().iter().enumerate() {
                report.number(&format!("end_x{}", i + 1), *v);
            }
        }
        "both" => {
            let marcus = marcus_solve(&driver, &field, &xi, &opts)?;
            let forward = forward_solve(&driver, &field, &xi, &opts)?;
            out.write_path_csv("marcus.csv", &marcus.solution, &labels)?;
            out.write_path_csv("forward.csv", &forward.solution, &labels)?;
            let p = cfg.p_exponents()?[0];
            let gap = marcus_forward_gap(
                &driver,
                &field,
                &xi,
                &GapOpts { p, k_hat: 1.0, ode: opts },
            )?;
            report.number("p_var_gap", gap.p_var_gap);
            report.number("bound", gap.bound);
            report.number("jump_sum_sq", gap.jump_sum_sq);
            report.number("end_gap", gap.end_gap);
        }
        other => bail!("`rde.rule` = `{other}`: expected marcus, forward, or both"),
    }
    out.write_report("stats.json", &report.seal())
}
