//! Config-driven experiments on the battery: solve, analyze, write artifacts.
//!
//! A config is a set of `key = value` pairs, read from a file and/or given
//! directly (later pairs override earlier ones). Keys accept `-` or `_`.
//!
//! | key | value |
//! |---|---|
//! | `field` | battery id (required) |
//! | `manifold` | `sphere:n` / `euclidean:n`; must match the field |
//! | `start` | comma-separated coordinates, or `auto:distance=<r>,seed=<s>` |
//! | `tol_field`, `tol_step`, `singular_threshold` | positive reals |
//! | `max_iters` | positive integer |
//! | `selection` | `midpoint`, `lower`, `upper`, `random:<seed>` |
//! | `analyses` | comma-separated subset of [`Analysis`] names, or `all` |
//! | `out` | output prefix: writes `<out>.trace.csv`, `<out>.report.txt` |
//! | `seed` | sampling seed for analyses and default `auto` starts |

use crate::analysis::{
    estimate_kp, estimate_lipschitz, estimate_order, kantorovich_check, lipschitz_to_metric,
    max_inverse_norm, random_point_at_distance, regularity_radius_probe, rng, semismooth_scan,
};
use crate::fields::{battery_entry, BatteryEntry, SelectionRule, BATTERY_IDS};
use crate::geometry::{distance, ManifoldKind, ManifoldPoint};
use crate::solver::{newton_solve, NewtonTrace, SolverConfig, Termination};
use crate::Error;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const DEFAULT_AUTO_DISTANCE: f64 = 0.1;
const KP_SAMPLES: usize = 10_000;
const LIPSCHITZ_SAMPLES: usize = 1_000;
const LIPSCHITZ_RADIUS: f64 = 0.5;
const SCAN_SAMPLES: usize = 20;
const REGULARITY_SAMPLES: usize = 50;
const REGULARITY_RADII: [f64; 5] = [1e-3, 1e-2, 1e-1, 0.2, 0.5];
/// `δ̄` is chosen this factor above the smallest admissible value.
const DELTA_BAR_MARGIN: f64 = 1.25;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown field '{0}' (see list-fields)")]
    UnknownField(String),
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("invalid value for '{key}': {reason}")]
    Invalid { key: String, reason: String },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerics(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl ExperimentError {
    /// Every failure before or outside the solve maps to exit code 1.
    pub fn exit_code(&self) -> i32 {
        1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Analysis {
    Order,
    SemismoothScan,
    Kantorovich,
    Kp,
    Lipschitz,
    Regularity,
}

impl Analysis {
    pub const ALL: [Analysis; 6] = [
        Analysis::Order,
        Analysis::SemismoothScan,
        Analysis::Kantorovich,
        Analysis::Kp,
        Analysis::Lipschitz,
        Analysis::Regularity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Analysis::Order => "order",
            Analysis::SemismoothScan => "semismooth-scan",
            Analysis::Kantorovich => "kantorovich",
            Analysis::Kp => "kp",
            Analysis::Lipschitz => "lipschitz",
            Analysis::Regularity => "regularity",
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Analysis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Analysis::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| format!("unknown analysis '{}'", s.trim()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StartSpec {
    Explicit(Vec<f64>),
    /// Random point at geodesic distance `distance` from the known solution.
    Auto {
        distance: f64,
        seed: u64,
    },
}

impl FromStr for StartSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("auto") {
            let rest = rest.strip_prefix(':').unwrap_or(rest);
            let mut distance = DEFAULT_AUTO_DISTANCE;
            let mut seed = 0;
            for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| format!("expected key=value in '{part}'"))?;
                match k.trim() {
                    "distance" => distance = parse_num(v)?,
                    "seed" => seed = parse_num(v)?,
                    other => return Err(format!("unknown auto option '{other}'")),
                }
            }
            if !(distance >= 0.0 && distance.is_finite()) {
                return Err(format!("distance must be nonnegative, got {distance}"));
            }
            return Ok(StartSpec::Auto { distance, seed });
        }
        let coords = s
            .split(',')
            .map(parse_num)
            .collect::<Result<Vec<f64>, String>>()?;
        Ok(StartSpec::Explicit(coords))
    }
}

impl fmt::Display for StartSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartSpec::Explicit(c) => {
                let parts: Vec<String> = c.iter().map(|x| format!("{x:?}")).collect();
                f.write_str(&parts.join(","))
            }
            StartSpec::Auto { distance, seed } => {
                write!(f, "auto:distance={distance:?},seed={seed}")
            }
        }
    }
}

fn parse_num<N: FromStr>(s: &str) -> Result<N, String>
where
    N::Err: fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e| format!("cannot parse '{}': {e}", s.trim()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub field: String,
    pub manifold: ManifoldKind,
    pub start: StartSpec,
    pub solver: SolverConfig<f64>,
    pub analyses: Vec<Analysis>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

/// Splits `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Invalid {
            key: format!("line {}", n + 1),
            reason: format!("expected 'key = value', got '{line}'"),
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

impl ExperimentConfig {
    /// Builds a config from pairs; a key given twice keeps its last value.
    pub fn from_pairs<K: AsRef<str>, V: AsRef<str>>(
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> Result<Self, ConfigError> {
        let mut field = None;
        let mut manifold = None;
        let mut start = None;
        let mut solver = SolverConfig::<f64>::default();
        let mut analyses = Vec::new();
        let mut out = None;
        let mut seed = 0u64;

        for (k, v) in pairs {
            let key = k.as_ref().trim().replace('-', "_");
            let value = v.as_ref().trim();
            let invalid = |reason: String| ConfigError::Invalid {
                key: key.clone(),
                reason,
            };
            match key.as_str() {
                "field" => field = Some(value.to_string()),
                "manifold" => {
                    manifold = Some(
                        value
                            .parse::<ManifoldKind>()
                            .map_err(|e| invalid(e.to_string()))?,
                    )
                }
                "start" => start = Some(value.parse::<StartSpec>().map_err(invalid)?),
                "tol_field" => solver.tol_field = parse_num(value).map_err(invalid)?,
                "tol_step" => solver.tol_step = parse_num(value).map_err(invalid)?,
                "singular_threshold" => {
                    solver.singular_threshold = parse_num(value).map_err(invalid)?
                }
                "max_iters" => solver.max_iters = parse_num(value).map_err(invalid)?,
                "selection" => {
                    solver.selection = value
                        .parse::<SelectionRule>()
                        .map_err(|e| invalid(e.to_string()))?
                }
                "analyses" => {
                    analyses = if value == "all" {
                        Analysis::ALL.to_vec()
                    } else {
                        value
                            .split(',')
                            .filter(|s| !s.trim().is_empty())
                            .map(str::parse)
                            .collect::<Result<Vec<Analysis>, String>>()
                            .map_err(invalid)?
                    };
                    analyses.sort();
                    analyses.dedup();
                }
                "out" => out = (!value.is_empty()).then(|| PathBuf::from(value)),
                "seed" => seed = parse_num(value).map_err(invalid)?,
                _ => return Err(ConfigError::UnknownKey(k.as_ref().trim().to_string())),
            }
        }

        let field = field.ok_or(ConfigError::Missing("field"))?;
        let entry =
            battery_entry::<f64>(&field).ok_or_else(|| ConfigError::UnknownField(field.clone()))?;
        let kind = entry.manifold();
        if let Some(m) = manifold {
            if m != kind {
                return Err(ConfigError::Invalid {
                    key: "manifold".into(),
                    reason: format!("field '{field}' lives on {kind}, not {m}"),
                });
            }
        }
        solver.validate().map_err(|e| ConfigError::Invalid {
            key: "solver".into(),
            reason: e.to_string(),
        })?;
        let start = start.unwrap_or(StartSpec::Auto {
            distance: DEFAULT_AUTO_DISTANCE,
            seed,
        });
        let cfg = ExperimentConfig {
            field,
            manifold: kind,
            start,
            solver,
            analyses,
            out,
            seed,
        };
        cfg.start_point(&entry)?;
        Ok(cfg)
    }

    /// Reads a config file, then applies `overrides` on top.
    pub fn load(
        file: Option<&Path>,
        overrides: &[(String, String)],
    ) -> Result<Self, ExperimentError> {
        let mut pairs = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                parse_config_text(&text)?
            }
            None => Vec::new(),
        };
        pairs.extend(overrides.iter().cloned());
        Ok(Self::from_pairs(pairs)?)
    }

    pub fn start_point(
        &self,
        entry: &BatteryEntry<f64>,
    ) -> Result<ManifoldPoint<f64>, ConfigError> {
        let invalid = |reason: String| ConfigError::Invalid {
            key: "start".into(),
            reason,
        };
        match &self.start {
            StartSpec::Explicit(coords) => {
                let n = self.manifold.ambient_dim();
                if coords.len() != n {
                    return Err(invalid(format!(
                        "{} coordinates given, {} needs {n}",
                        coords.len(),
                        self.manifold
                    )));
                }
                if self.manifold.is_sphere() {
                    ManifoldPoint::normalized(self.manifold, coords.clone())
                } else {
                    ManifoldPoint::new(self.manifold, coords.clone())
                }
                .map_err(|e| invalid(e.to_string()))
            }
            StartSpec::Auto { distance, seed } => {
                if let Some(inj) = self.manifold.injectivity_radius::<f64>() {
                    if *distance >= inj {
                        return Err(invalid(format!(
                            "distance {distance} is not below the injectivity radius {inj}"
                        )));
                    }
                }
                if *distance == 0.0 {
                    return Ok(entry.solution.clone());
                }
                random_point_at_distance(&entry.solution, *distance, &mut rng(*seed))
                    .map_err(|e| invalid(e.to_string()))
            }
        }
    }
}

/// One report record: an analysis name, a descriptive anchor and its values.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub analysis: String,
    pub anchor: &'static str,
    pub fields: Vec<(String, String)>,
}

impl Record {
    fn new(analysis: &str, anchor: &'static str) -> Self {
        Record {
            analysis: analysis.to_string(),
            anchor,
            fields: Vec::new(),
        }
    }

    fn put(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.put(key, fmt_f64(value))
    }

    fn opt(&mut self, key: &str, value: Option<impl fmt::Display>) -> &mut Self {
        match value {
            Some(v) => self.put(key, v),
            None => self.put(key, "not-applicable"),
        }
    }

    fn list(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let parts: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.put(key, parts.join(","))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub trace: NewtonTrace<f64>,
    pub solution: ManifoldPoint<f64>,
    pub records: Vec<Record>,
    pub csv: String,
    pub report: String,
}

impl ExperimentOutcome {
    pub fn exit_code(&self) -> i32 {
        exit_code(self.trace.termination)
    }
}

pub fn exit_code(t: Termination) -> i32 {
    match t {
        Termination::FieldTolerance | Termination::StepTolerance => 0,
        Termination::SingularElement => 2,
        Termination::MaxIters => 3,
    }
}

/// Solves, runs the requested analyses and, if `out` is set, writes
/// `<out>.trace.csv` and `<out>.report.txt`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    let entry = battery_entry::<f64>(&cfg.field)
        .ok_or_else(|| ConfigError::UnknownField(cfg.field.clone()))?;
    let p0 = cfg.start_point(&entry)?;
    let trace = newton_solve(entry.field.as_ref(), &p0, &cfg.solver)?;
    let records = cfg
        .analyses
        .iter()
        .map(|&a| run_analysis(a, cfg, &entry, &trace))
        .collect::<Result<Vec<_>, Error>>()?;
    let csv = trace_csv(&trace, Some(&entry.solution))?;
    let report = render_report(cfg, &entry, &trace, &records)?;
    if let Some(out) = &cfg.out {
        write_artifact(out, "trace.csv", &csv)?;
        write_artifact(out, "report.txt", &report)?;
    }
    Ok(ExperimentOutcome {
        trace,
        solution: entry.solution.clone(),
        records,
        csv,
        report,
    })
}

pub fn artifact_path(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

fn write_artifact(out: &Path, suffix: &str, contents: &str) -> Result<(), ExperimentError> {
    let path = artifact_path(out, suffix);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(&path, contents).map_err(|source| ExperimentError::Io { path, source })
}

/// `iter,x0,...,x{n-1},field_norm,step_norm,dist_to_solution`; a step norm
/// belongs to the step leaving that row's iterate.
pub fn trace_csv(
    trace: &NewtonTrace<f64>,
    solution: Option<&ManifoldPoint<f64>>,
) -> Result<String, Error> {
    let n = trace.iterates[0].coords().len();
    let mut csv = String::from("iter");
    for i in 0..n {
        let _ = write!(csv, ",x{i}");
    }
    csv.push_str(",field_norm,step_norm,dist_to_solution\n");
    for (k, p) in trace.iterates.iter().enumerate() {
        let _ = write!(csv, "{k}");
        for &x in p.coords() {
            let _ = write!(csv, ",{}", fmt_f64(x));
        }
        let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let dist = solution.map(|s| distance(p, s)).transpose()?;
        let _ = writeln!(
            csv,
            ",{},{},{}",
            cell(trace.field_norms.get(k).copied()),
            cell(trace.step_norms.get(k).copied()),
            cell(dist)
        );
    }
    Ok(csv)
}

fn render_report(
    cfg: &ExperimentConfig,
    entry: &BatteryEntry<f64>,
    trace: &NewtonTrace<f64>,
    records: &[Record],
) -> Result<String, Error> {
    let mut r = String::new();
    let coords = |p: &ManifoldPoint<f64>| {
        p.coords()
            .iter()
            .map(|&x| fmt_f64(x))
            .collect::<Vec<_>>()
            .join(",")
    };
    let _ = writeln!(r, "[experiment]");
    let _ = writeln!(r, "field = {}", cfg.field);
    let _ = writeln!(r, "manifold = {}", cfg.manifold);
    let _ = writeln!(r, "start = {}", cfg.start);
    let _ = writeln!(r, "start_point = {}", coords(&trace.iterates[0]));
    let _ = writeln!(r, "selection = {}", cfg.solver.selection);
    let _ = writeln!(r, "tol_field = {}", fmt_f64(cfg.solver.tol_field));
    let _ = writeln!(r, "tol_step = {}", fmt_f64(cfg.solver.tol_step));
    let _ = writeln!(r, "max_iters = {}", cfg.solver.max_iters);
    let _ = writeln!(
        r,
        "singular_threshold = {}",
        fmt_f64(cfg.solver.singular_threshold)
    );
    let _ = writeln!(r, "seed = {}", cfg.seed);
    let _ = writeln!(r);
    let _ = writeln!(r, "[solve]");
    let _ = writeln!(r, "termination = {}", trace.termination);
    let _ = writeln!(r, "iterations = {}", trace.steps());
    let _ = writeln!(r, "final_point = {}", coords(trace.last()));
    let _ = writeln!(
        r,
        "final_field_norm = {}",
        fmt_f64(*trace.field_norms.last().unwrap_or(&f64::NAN))
    );
    let _ = writeln!(
        r,
        "final_dist_to_solution = {}",
        fmt_f64(distance(trace.last(), &entry.solution)?)
    );
    if let Some(s) = trace.singular_value {
        let _ = writeln!(r, "singular_value = {}", fmt_f64(s));
    }
    for rec in records {
        let _ = writeln!(r);
        let _ = writeln!(r, "[analysis]");
        let _ = writeln!(r, "analysis = {}", rec.analysis);
        let _ = writeln!(r, "anchor = {}", rec.anchor);
        for (k, v) in &rec.fields {
            let _ = writeln!(r, "{k} = {v}");
        }
    }
    Ok(r)
}

fn scan_radii(r_max: f64) -> Vec<f64> {
    (0..7)
        .map(|k| r_max * 10f64.powf(-0.5 * k as f64))
        .collect()
}

fn run_analysis(
    a: Analysis,
    cfg: &ExperimentConfig,
    entry: &BatteryEntry<f64>,
    trace: &NewtonTrace<f64>,
) -> Result<Record, Error> {
    let field = entry.field.as_ref();
    let p_star = &entry.solution;
    let seed = cfg.seed;
    let mut rec;
    match a {
        Analysis::Order => {
            rec = Record::new(a.name(), "convergence-order");
            match estimate_order(trace, p_star) {
                Ok(est) => {
                    rec.put("status", "ok")
                        .list("distances", &est.distances)
                        .list("orders", &est.orders)
                        .num("final_order", est.final_order)
                        .list("ratios", &est.ratios)
                        .put("superlinear", est.superlinear);
                }
                Err(Error::InsufficientData(msg)) => {
                    rec.put("status", "insufficient-data").put("reason", msg);
                }
                Err(e) => return Err(e),
            }
        }
        Analysis::SemismoothScan => {
            rec = Record::new(a.name(), "mu-order-semismoothness");
            let radii = scan_radii(0.1);
            let scan = semismooth_scan(
                field,
                p_star,
                &radii,
                SCAN_SAMPLES,
                cfg.solver.selection,
                seed,
            )?;
            rec.put("rule", cfg.solver.selection)
                .list("radii", &scan.radii)
                .list("residuals", &scan.residuals);
            match scan.fitted_mu {
                Some(mu) => rec.num("fitted_mu", mu),
                None => rec.put("fitted_mu", "exceeds-scan-precision"),
            };
            rec.num("fitted_eps", scan.fitted_eps)
                .opt("raw_slope", scan.raw_slope.map(fmt_f64))
                .put("mu_above_one", scan.mu_above_one())
                .num("expected_mu", entry.expected_mu);
        }
        Analysis::Kantorovich => {
            rec = Record::new(a.name(), "kantorovich-existence");
            let p0 = &trace.iterates[0];
            let d0 = distance(p0, p_star)?;
            // conservative: the sampled elements at both ends of the run
            let lambda0 = match max_inverse_norm(field, p0, seed)
                .and_then(|l0| Ok(l0.max(max_inverse_norm(field, p_star, seed)?)))
            {
                Ok(l) => l,
                Err(Error::RegularityViolation { sigma_min }) => {
                    rec.put("status", "singular-element")
                        .num("sigma_min", sigma_min);
                    return Ok(rec);
                }
                Err(e) => return Err(e),
            };
            let cap = entry
                .manifold()
                .injectivity_radius::<f64>()
                .map_or(1.0, |inj| 0.5 * inj);
            let r_max = (4.0 * d0).clamp(1e-3, cap);
            let scan = semismooth_scan(
                field,
                p_star,
                &scan_radii(r_max),
                SCAN_SAMPLES,
                cfg.solver.selection,
                seed,
            )?;
            let eps = scan.order_constant(0.0).max(f64::EPSILON);
            let provisional = kantorovich_check(field, p0, r_max, eps, lambda0)?;
            let delta_bar = provisional.required_radius.map_or(r_max, |req| {
                (DELTA_BAR_MARGIN * req).clamp(f64::EPSILON, r_max)
            });
            let cert = kantorovich_check(field, p0, delta_bar, eps, lambda0)?;
            rec.put("status", "ok")
                .put(
                    "p0",
                    p0.coords()
                        .iter()
                        .map(|&x| fmt_f64(x))
                        .collect::<Vec<_>>()
                        .join(","),
                )
                .num("lambda0", cert.lambda0)
                .num("eps", cert.eps)
                .num("eps_scan_radius", r_max)
                .num("delta_bar", cert.delta_bar)
                .num("field_norm_p0", cert.field_norm)
                .put("cond1", cert.cond1)
                .opt("cond2", cert.cond2)
                .opt("required_radius", cert.required_radius.map(fmt_f64))
                .opt(
                    "predicted_error_coeff",
                    cert.predicted_error_coeff.map(fmt_f64),
                )
                .put("certified", cert.certified())
                .put("eps_covers_ball", d0 + cert.delta_bar <= r_max);
            match cert.check_error_bound(trace, p_star) {
                Ok(check) => {
                    rec.put("error_bound_holds", check.holds());
                }
                Err(_) => {
                    rec.put("error_bound_holds", "not-applicable");
                }
            }
        }
        Analysis::Kp => {
            rec = Record::new(a.name(), "geodesic-spread-kp");
            let kp = estimate_kp(entry.manifold(), p_star, KP_SAMPLES, seed)?;
            rec.put("samples", KP_SAMPLES).num("kp_estimate", kp);
        }
        Analysis::Lipschitz => {
            rec = Record::new(a.name(), "lipschitz-continuity");
            let l = estimate_lipschitz(field, p_star, LIPSCHITZ_RADIUS, LIPSCHITZ_SAMPLES, seed)?;
            rec.num("radius", LIPSCHITZ_RADIUS)
                .put("samples", LIPSCHITZ_SAMPLES)
                .num("lipschitz_estimate", l)
                .num("metric_lipschitz", lipschitz_to_metric(l));
        }
        Analysis::Regularity => {
            rec = Record::new(a.name(), "regularity-radius");
            let scan = semismooth_scan(
                field,
                p_star,
                &scan_radii(0.5),
                SCAN_SAMPLES,
                cfg.solver.selection,
                seed,
            )?;
            let eps = scan.order_constant(0.0).max(f64::EPSILON);
            match regularity_radius_probe(
                field,
                p_star,
                eps,
                &REGULARITY_RADII,
                REGULARITY_SAMPLES,
                seed,
            ) {
                Ok(probe) => {
                    rec.put("status", "ok")
                        .num("eps", eps)
                        .num("lambda", probe.lambda)
                        .num("inverse_norm_bound", probe.bound)
                        .list("radii", &REGULARITY_RADII)
                        .num("regular_radius", probe.radius);
                }
                Err(Error::RegularityViolation { sigma_min }) => {
                    rec.put("status", "regularity-violation")
                        .num("sigma_min", sigma_min);
                }
                Err(Error::Contract(msg)) => {
                    rec.put("status", "not-applicable")
                        .num("eps", eps)
                        .put("reason", msg);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(rec)
}

/// One line per battery field, in battery order.
pub fn list_fields() -> String {
    let mut s = String::from("id\tmanifold\tdim\tsolution\texpected_mu\n");
    for id in BATTERY_IDS {
        let e = battery_entry::<f64>(id).expect("battery ids resolve");
        let sol: Vec<String> = e
            .solution
            .coords()
            .iter()
            .map(|x| format!("{x:.6}"))
            .collect();
        let _ = writeln!(
            s,
            "{id}\t{}\t{}\t({})\t{}",
            e.manifold(),
            e.manifold().dim(),
            sol.join(", "),
            e.expected_mu
        );
    }
    s
}

#[derive(Debug)]
pub struct BatchResult {
    pub config: PathBuf,
    pub result: Result<i32, ExperimentError>,
}

impl BatchResult {
    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Ok(code) => *code,
            Err(e) => e.exit_code(),
        }
    }
}

/// Runs every `*.conf` in `dir` concurrently, in file-name order.
///
/// A config without `out` writes next to itself, at `<dir>/<stem>`.
pub fn run_batch(
    dir: &Path,
    overrides: &[(String, String)],
) -> Result<Vec<BatchResult>, ExperimentError> {
    let io = |source| ExperimentError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    files.retain(|p| p.extension().is_some_and(|e| e == "conf") && p.is_file());
    files.sort();

    let run_one = |path: &Path| -> Result<i32, ExperimentError> {
        let mut cfg = ExperimentConfig::load(Some(path), overrides)?;
        if cfg.out.is_none() {
            cfg.out = Some(path.with_extension(""));
        }
        Ok(run_experiment(&cfg)?.exit_code())
    };
    let results = std::thread::scope(|s| {
        let handles: Vec<_> = files
            .iter()
            .map(|path| s.spawn(move || run_one(path)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect::<Vec<_>>()
    });
    Ok(files
        .into_iter()
        .zip(results)
        .map(|(config, result)| BatchResult { config, result })
        .collect())
}
