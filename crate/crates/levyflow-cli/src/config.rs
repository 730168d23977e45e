//! Flat key=value run configuration.
//!
//! A config file is one `key = value` assignment per line, `#` starts a
//! comment, blank lines are ignored. Keys are dotted lowercase names from
//! a fixed catalog; anything outside the catalog is an error that names
//! the offending line. Every size, tolerance, and catalog name the binary
//! consumes lives here, so a run is fully described by its effective
//! config, and the manifest digest is computed over exactly that text.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::hash::Hasher;

use anyhow::{bail, Context, Result};
use fnv::FnvHasher;
use levyflow::fastslow::{Observable, ObservableKind};
use levyflow::maps::{IntermittentMap, InvariantStats, InvariantStatsOpts, MapKind};
use levyflow::rde::{Drift, VectorField};
use levyflow::rng::replica_rng;
use levyflow::stable::{LimitInputs, SpectralMeasure, StableLaw};

/// One catalog row: the key, its default (parsed like user input), and a
/// short description surfaced in error messages.
struct Spec {
    key: &'static str,
    default: &'static str,
    help: &'static str,
}

macro_rules! catalog {
    ($(($key:literal, $default:literal, $help:literal),)*) => {
        &[$(Spec { key: $key, default: $default, help: $help },)*]
    };
}

/// Recognised keys. Empty defaults mean "derived at use time"; the
/// derivation rule is part of the help string.
static CATALOG: &[Spec] = catalog![
    // dynamics
    ("map.kind", "pm", "interval map family: pm (two neutral points) or lsv (one)"),
    ("map.alpha", "1.5", "tail exponent in (1, 2)"),
    ("observable.kind", "circle", "observable on the fast space: circle (d=2) or cos2pi (d=1)"),
    ("observable.center", "", "comma list: fixed centering; empty = calibrate from a long orbit"),
    ("observable.calibration", "100000000", "orbit length for empirical centering"),
    ("observable.y0", "0.374", "start point of the calibration orbit, in (0, 1)"),
    // vector fields for the slow equation
    ("fields.b", "figure3-tanh-damped", "noise field: rotation | figure3 | affine | scalar-linear | scalar-constant, optionally with -tanh-damped suffix"),
    ("fields.a", "zero", "drift field: zero | constant | damping"),
    ("fields.box", "5.0", "half width of the box the field bounds are quoted on"),
    ("fields.damp", "1.0", "tanh damping scale (only with a -tanh-damped field)"),
    ("fields.c", "1.0", "constant value for scalar-constant"),
    ("fields.b0", "", "affine only: constant matrix, comma list of m*d entries"),
    ("fields.bx", "", "affine only: m state matrices, semicolon-separated comma lists"),
    ("fields.a_const", "", "constant drift vector (fields.a = constant)"),
    ("fields.a_rate", "0.5", "damping rate (fields.a = damping)"),
    // run shape
    ("run.seed", "0", "root seed; replica r draws from stream (seed, r)"),
    ("run.n", "10000", "time-scale parameter: driver steps per unit time"),
    ("run.replicas", "1", "independent replicas"),
    ("run.xi", "", "initial slow state, comma list; empty = first basis vector"),
    ("run.y0", "", "fixed initial fast state in (0, 1); empty = uniform draw per replica"),
    ("run.p", "", "comma list of p-variation exponents; empty = alpha + 0.2"),
    ("returns.count", "100000", "number of first returns to sample"),
    // stable laws
    ("law.source", "atoms", "levy/rde driver law: atoms (explicit) or limit (predicted from map data)"),
    ("law.alpha", "1.5", "stability index of the explicit law"),
    ("law.atoms", "1,0,1; 0,1,1; -1,0,1; 0,-1,1", "atom list `d1,..,dk,weight; ...` (direction then weight)"),
    ("law.stats_len", "20000000", "orbit length for the invariant statistics behind law.source = limit"),
    ("levy.n", "10000", "grid points of a sampled stable path"),
    // differential equation runs
    ("rde.driver", "levy", "driver path: ramp | staircase | levy"),
    ("rde.rule", "marcus", "jump rule: marcus | forward | both"),
    ("rde.rise", "6.283185307179586", "total rise of ramp/staircase drivers"),
    ("rde.at", "0.5", "ramp start time"),
    ("rde.width", "0.125", "ramp duration"),
    ("rde.substeps", "32", "ramp jump count"),
    ("rde.k", "32", "staircase jump count"),
    ("rde.steps_per_jump", "64", "initial RK4 steps per jump bridge"),
    ("rde.steps_per_cell", "16", "initial RK4 steps per drift cell"),
    ("rde.refine_tol", "1e-9", "endpoint tolerance for step doubling; 0 disables refinement"),
    ("rde.max_doublings", "8", "cap on refinement rounds"),
    // validation suites: every threshold is visible here
    ("branch-points.k", "10000", "branch index the asymptote is checked at"),
    ("branch-points.alphas", "1.3,1.5,1.7", "tail exponents covered"),
    ("branch-points.tol", "0.05", "relative error allowed against the power law"),
    ("tail-index.count", "1000000", "first returns fed to the tail estimator"),
    ("tail-index.target", "", "expected index; empty = map.alpha"),
    ("tail-index.tol", "0.1", "allowed |estimate - target|"),
    ("stable-law.measures", "5", "random spectral measures per stability index"),
    ("stable-law.alphas", "1.2,1.5,1.8", "stability indices for the sampler check"),
    ("stable-law.samples", "20000", "draws per sampler check"),
    ("stable-law.se_mult", "3.0", "allowed gap in Monte Carlo standard errors"),
    ("stable-law.driver_n", "10000", "driver length for the endpoint-law check"),
    ("stable-law.driver_replicas", "10000", "endpoint sample size"),
    ("stable-law.ecf_tol", "0.05", "allowed characteristic-function gap at every grid point"),
    ("stable-law.kac_tol", "0.1", "allowed defect in the return-time/measure identity"),
    ("pvar-tight.ns", "1000,10000,100000", "driver lengths compared"),
    ("pvar-tight.replicas", "200", "replicas per length"),
    ("pvar-tight.spread", "0.25", "allowed relative spread of the upper quantile"),
    ("pvar-tight.p_offset", "0.2", "p = alpha + offset"),
    ("circle.n", "1000", "ramp substeps for the rotation run"),
    ("circle.theta", "6.283185307179586", "total rotation angle"),
    ("circle.endpoint_tol", "0.001", "allowed endpoint distance from the assembled turn"),
    ("circle.sm1_floor", "1.0", "distance the linear-bridged comparison must exceed"),
    ("circle.flow_tol", "0.5", "distance the flow-bridged comparison must stay below"),
    ("circle.flow_frac", "0.25", "flow-bridged distance as a fraction of linear-bridged"),
    ("circle.delta", "0.05", "fictitious-time budget of the embeddings"),
    ("circle.grid", "0.00390625", "time-grid resolution of the path distances"),
    ("marcus-gap.fields", "100", "random affine fields for the single-jump bound"),
    ("marcus-gap.hs", "0.1,0.01", "jump sizes tested"),
    ("marcus-gap.ratio_drift", "0.2", "allowed drift of gap/jump-mass across staircase refinement"),
    ("marcus-gap.stair_ks", "8,16,32,64", "staircase jump counts"),
    ("marcus-gap.chain_drivers", "50", "random drivers for the geometric-solution identity"),
    ("marcus-gap.chain_tol", "1e-8", "allowed endpoint error against the exact exponential"),
    ("homogenise.n", "10000", "fast-slow time-scale parameter"),
    ("homogenise.replicas", "2000", "endpoint samples per side"),
    ("homogenise.mc_n", "10000", "grid points of each reference Levy path"),
    ("homogenise.permutations", "200", "relabelings for the energy-distance calibration"),
    ("pvar-oracle.paths", "200", "random step paths checked"),
    ("pvar-oracle.max_points", "12", "largest path length (exhaustive oracle is exponential)"),
    ("pvar-oracle.ps", "1,1.3,1.7,2", "variation exponents"),
];

fn lookup(key: &str) -> Option<&'static Spec> {
    CATALOG.iter().find(|s| s.key == key)
}

/// Effective configuration: catalog defaults overlaid with file entries
/// and `--set` pairs, in that order.
pub struct Config {
    values: BTreeMap<&'static str, String>,
    /// Line number of the file entry that set each key, for duplicate
    /// detection.
    file_lines: BTreeMap<&'static str, usize>,
}

impl Config {
    pub fn from_defaults() -> Self {
        Self {
            values: CATALOG.iter().map(|s| (s.key, s.default.to_string())).collect(),
            file_lines: BTreeMap::new(),
        }
    }

    /// Overlay a config file. Unknown keys, malformed lines, and
    /// duplicate assignments are errors naming the line.
    pub fn apply_file(&mut self, text: &str, origin: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(cut) => &raw[..cut],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{origin} line {line_no}: expected `key = value`, got `{line}`");
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(spec) = lookup(key) else {
                bail!("{origin} line {line_no}: unknown key `{key}`");
            };
            if let Some(prev) = self.file_lines.insert(spec.key, line_no) {
                bail!("{origin} line {line_no}: `{key}` already set on line {prev}");
            }
            self.values.insert(spec.key, value.to_string());
        }
        Ok(())
    }

    /// Apply one `--set key=value` override.
    pub fn apply_set(&mut self, pair: &str) -> Result<()> {
        let Some((key, value)) = pair.split_once('=') else {
            bail!("--set expects key=value, got `{pair}`");
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(spec) = lookup(key) else {
            bail!("--set: unknown key `{key}`");
        };
        self.values.insert(spec.key, value.to_string());
        Ok(())
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.values.insert("run.seed", seed.to_string());
    }

    /// Canonical text the digest is computed over: every catalog key with
    /// its effective value, one per line, in catalog order.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for spec in CATALOG {
            let _ = writeln!(out, "{} = {}", spec.key, self.values[spec.key]);
        }
        out
    }

    /// FNV-1a digest of the canonical text, hex with a scheme prefix.
    pub fn digest(&self) -> String {
        let mut hasher = FnvHasher::default();
        hasher.write(self.canonical().as_bytes());
        format!("fnv1a64:{:016x}", hasher.finish())
    }

    fn raw(&self, key: &str) -> &str {
        let spec = lookup(key).unwrap_or_else(|| panic!("key `{key}` not in catalog"));
        &self.values[spec.key]
    }

    fn help(&self, key: &str) -> &'static str {
        lookup(key).expect("catalogued").help
    }

    pub fn str(&self, key: &str) -> &str {
        self.raw(key)
    }

    pub fn is_set(&self, key: &str) -> bool {
        !self.raw(key).is_empty()
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let raw = self.raw(key);
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .with_context(|| format!("`{key}` = `{raw}`: expected a number ({})", self.help(key)))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let raw = self.raw(key);
        raw.parse::<u64>()
            .ok()
            .with_context(|| format!("`{key}` = `{raw}`: expected an unsigned integer ({})", self.help(key)))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.u64(key)? as usize)
    }

    pub fn list_f64(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(key);
        raw.split(',')
            .map(|part| {
                part.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .with_context(|| format!("`{key}` = `{raw}`: expected comma-separated numbers"))
            })
            .collect()
    }

    pub fn list_usize(&self, key: &str) -> Result<Vec<usize>> {
        let raw = self.raw(key);
        raw.split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .with_context(|| format!("`{key}` = `{raw}`: expected comma-separated integers"))
            })
            .collect()
    }

    pub fn seed(&self) -> u64 {
        self.u64("run.seed").expect("seed validated on entry")
    }

    // ---- assembled domain objects ----

    pub fn map(&self) -> Result<IntermittentMap> {
        let kind = match self.str("map.kind") {
            "pm" => MapKind::Pm,
            "lsv" => MapKind::Lsv,
            other => bail!("`map.kind` = `{other}`: expected pm or lsv"),
        };
        let alpha = self.f64("map.alpha")?;
        IntermittentMap::new(kind, alpha).context("`map.alpha` out of range")
    }

    pub fn observable_kind(&self) -> Result<ObservableKind> {
        match self.str("observable.kind") {
            "circle" => Ok(ObservableKind::Circle),
            "cos2pi" => Ok(ObservableKind::Cos2Pi),
            other => bail!("`observable.kind` = `{other}`: expected circle or cos2pi"),
        }
    }

    /// Build the centered observable: from an explicit centering vector
    /// when `observable.center` is set, otherwise by running the
    /// configured calibration orbit (the expensive path; callers print
    /// progress around it).
    pub fn observable(&self, map: &IntermittentMap) -> Result<Observable> {
        let kind = self.observable_kind()?;
        if self.is_set("observable.center") {
            let center = self.list_f64("observable.center")?;
            return Observable::with_centering(kind, center)
                .context("`observable.center` rejected");
        }
        let iters = self.u64("observable.calibration")?;
        let y0 = self.f64("observable.y0")?;
        Observable::calibrated(kind, map, iters, y0).context("observable calibration failed")
    }

    pub fn field(&self) -> Result<VectorField> {
        let name = self.str("fields.b");
        let (base, damped) = match name.strip_suffix("-tanh-damped") {
            Some(prefix) => (prefix, true),
            None => (name, false),
        };
        let l = self.f64("fields.box")?;
        if !(l > 0.0) {
            bail!("`fields.box` must be positive, got {l}");
        }
        let mut field = match base {
            "rotation" => VectorField::rotation(l),
            "figure3" => VectorField::figure3(l),
            "scalar-linear" => VectorField::scalar_linear(l),
            "scalar-constant" => VectorField::scalar_constant(self.f64("fields.c")?),
            "affine" => {
                let b0 = self.list_f64("fields.b0").context("affine needs `fields.b0`")?;
                let raw = self.str("fields.bx");
                if raw.is_empty() {
                    bail!("affine needs `fields.bx` (semicolon-separated rows)");
                }
                let bx: Vec<Vec<f64>> = raw
                    .split(';')
                    .map(|row| {
                        row.split(',')
                            .map(|part| {
                                part.trim().parse::<f64>().ok().filter(|v| v.is_finite()).with_context(
                                    || format!("`fields.bx` entry `{part}` is not a number"),
                                )
                            })
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<_>>()?;
                let m = bx.len();
                if b0.len() % m != 0 {
                    bail!(
                        "`fields.b0` has {} entries, not divisible by the {m} rows of `fields.bx`",
                        b0.len()
                    );
                }
                let d = b0.len() / m;
                for (i, bi) in bx.iter().enumerate() {
                    if bi.len() != m * d {
                        bail!("`fields.bx` row {i} has {} entries, expected {}", bi.len(), m * d);
                    }
                }
                VectorField::affine(m, d, b0, bx, l)
            }
            other => bail!(
                "`fields.b` = `{other}`: expected rotation, figure3, affine, scalar-linear, \
                 or scalar-constant (optionally -tanh-damped)"
            ),
        };
        if damped {
            let scale = self.f64("fields.damp")?;
            if !(scale > 0.0) {
                bail!("`fields.damp` must be positive, got {scale}");
            }
            field = field.with_tanh_damping(scale);
        }
        let drift = match self.str("fields.a") {
            "zero" => Drift::Zero,
            "constant" => {
                let c = self.list_f64("fields.a_const").context("constant drift needs `fields.a_const`")?;
                if c.len() != field.dim_state() {
                    bail!(
                        "`fields.a_const` has {} entries, the field state dimension is {}",
                        c.len(),
                        field.dim_state()
                    );
                }
                Drift::Constant(c)
            }
            "damping" => Drift::Damping { rate: self.f64("fields.a_rate")? },
            other => bail!("`fields.a` = `{other}`: expected zero, constant, or damping"),
        };
        Ok(field.with_drift(drift))
    }

    /// Initial slow state: `run.xi`, or the first basis vector of the
    /// field's state space when unset.
    pub fn xi(&self, dim_state: usize) -> Result<Vec<f64>> {
        if self.is_set("run.xi") {
            let xi = self.list_f64("run.xi")?;
            if xi.len() != dim_state {
                bail!("`run.xi` has {} entries, the field state dimension is {dim_state}", xi.len());
            }
            return Ok(xi);
        }
        let mut xi = vec![0.0; dim_state];
        xi[0] = 1.0;
        Ok(xi)
    }

    pub fn p_exponents(&self) -> Result<Vec<f64>> {
        if self.is_set("run.p") {
            let ps = self.list_f64("run.p")?;
            for &p in &ps {
                if p < 1.0 {
                    bail!("`run.p` entries must be at least 1, got {p}");
                }
            }
            return Ok(ps);
        }
        Ok(vec![self.f64("map.alpha")? + 0.2])
    }

    /// Explicit stable law from `law.alpha` and the `law.atoms` list.
    pub fn atom_law(&self) -> Result<StableLaw> {
        let alpha = self.f64("law.alpha")?;
        let raw = self.str("law.atoms");
        let mut atoms = Vec::new();
        let mut dim = None;
        for chunk in raw.split(';') {
            let parts: Vec<f64> = chunk
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .with_context(|| format!("`law.atoms` entry `{}` is not a number", p.trim()))
                })
                .collect::<Result<_>>()?;
            if parts.len() < 2 {
                bail!("`law.atoms`: each atom needs direction components plus a weight");
            }
            let d = parts.len() - 1;
            if *dim.get_or_insert(d) != d {
                bail!("`law.atoms`: atoms disagree on dimension");
            }
            atoms.push((parts[..d].to_vec(), parts[d]));
        }
        let dim = dim.expect("split never yields zero chunks");
        let measure = SpectralMeasure::new(dim, atoms).context("`law.atoms` rejected")?;
        StableLaw::new(alpha, measure).context("`law.alpha` rejected")
    }
}

/// Invariant statistics plus the stable law they predict for the driver
/// endpoint; shared by the levy/rde experiments and two validation suites.
pub struct PredictedLaw {
    pub law: StableLaw,
    pub stats: InvariantStats,
}

/// Derive the endpoint law from map data: invariant statistics estimate
/// the boundary density and mean return time, and the observable's values
/// at the neutral points set the atom directions.
pub fn predicted_law(cfg: &Config, map: &IntermittentMap, obs: &Observable) -> Result<PredictedLaw> {
    let opts = InvariantStatsOpts {
        orbit_len: cfg.u64("law.stats_len")?,
        ..InvariantStatsOpts::default()
    };
    let mut rng = replica_rng(cfg.seed(), u64::MAX);
    let stats = map.invariant_stats(&opts, &mut rng).context("invariant statistics failed")?;
    let dim = obs.dim();
    let mut v_at_0 = vec![0.0; dim];
    obs.eval_into(0.0, &mut v_at_0);
    let mut v_at_1 = vec![0.0; dim];
    obs.eval_into(1.0, &mut v_at_1);
    let law = levyflow::stable::limit_spectral_measure(&LimitInputs {
        kind: map.kind(),
        alpha: map.alpha(),
        v_at_0,
        v_at_1,
        h_boundary: stats.h_boundary,
        tau_bar: stats.tau_bar,
    })
    .context("predicted endpoint law is degenerate")?;
    Ok(PredictedLaw { law, stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_every_key_and_parse() {
        let cfg = Config::from_defaults();
        // every key with a non-empty default must satisfy its own getter
        assert!(cfg.map().is_ok());
        assert!(cfg.field().is_ok());
        assert!(cfg.atom_law().is_ok());
        assert!(cfg.p_exponents().is_ok());
        assert_eq!(cfg.seed(), 0);
    }

    #[test]
    fn file_rejects_unknown_and_duplicate_keys_with_lines() {
        let mut cfg = Config::from_defaults();
        let err = cfg.apply_file("map.kind = pm\nnope.key = 1\n", "test.cfg").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(err.to_string().contains("nope.key"), "{err}");

        let mut cfg = Config::from_defaults();
        let err = cfg
            .apply_file("run.n = 10\n# comment\nrun.n = 20\n", "test.cfg")
            .unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let mut cfg = Config::from_defaults();
        cfg.apply_file("\n# full comment\nrun.n = 42 # trailing\n\n", "t").unwrap();
        assert_eq!(cfg.usize("run.n").unwrap(), 42);
    }

    #[test]
    fn digest_tracks_every_effective_value() {
        let mut a = Config::from_defaults();
        let b = Config::from_defaults();
        assert_eq!(a.digest(), b.digest());
        a.apply_set("run.n=10001").unwrap();
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn field_names_assemble_the_catalog() {
        let mut cfg = Config::from_defaults();
        cfg.apply_set("fields.b=rotation").unwrap();
        let f = cfg.field().unwrap();
        assert_eq!((f.dim_state(), f.dim_noise()), (2, 1));

        cfg.apply_set("fields.b=figure3-tanh-damped").unwrap();
        assert!(cfg.field().unwrap().sup_bound().is_finite());

        cfg.apply_set("fields.b=affine").unwrap();
        cfg.apply_set("fields.b0=0,1").unwrap();
        cfg.apply_set("fields.bx=1,0;0,1").unwrap();
        let f = cfg.field().unwrap();
        assert_eq!((f.dim_state(), f.dim_noise()), (2, 1));

        cfg.apply_set("fields.b=mystery").unwrap();
        assert!(cfg.field().is_err());
    }

    #[test]
    fn atom_law_parses_directions_and_weights() {
        let mut cfg = Config::from_defaults();
        cfg.apply_set("law.atoms=1,0,0.7; 0.6,0.8,0.5").unwrap();
        let law = cfg.atom_law().unwrap();
        assert_eq!(law.dim(), 2);
        assert_eq!(law.measure().atoms().len(), 2);

        cfg.apply_set("law.atoms=1,1; 0.6,0.8,0.5").unwrap();
        assert!(cfg.atom_law().is_err(), "mixed dimensions must be rejected");
    }
}
