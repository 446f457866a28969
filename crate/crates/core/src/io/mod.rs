//! Experiment runner: config in, coefficient tables, residual curves and a
//! JSON report out.
//!
//! Exit-code contract of [`exit_code`]: `0` all checks pass, `1` a check
//! failed, `2` configuration error, `3` numerical failure.

pub mod checks;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use checks::{CheckInfo, CHECKS};
pub use config::{ConfigError, ExperimentConfig};
pub use report::{CheckOutcome, CoefficientRow, DecompositionSummary, ResidualRow, RunReport};

use crate::faber::BasisTag;
use crate::series::{project_with_basis, FaberBasis, SeriesDecomposition, SeriesOptions, TargetForm};
use crate::surface::{OneForm, Surface, DEFAULT_MARGIN};
use crate::C64;
use config::{build_caps, parse_complex, parse_point, TargetBlock};

/// Command-line overrides of a config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOverrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub strict: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    /// The pipeline failed; the partial report is still written.
    #[error("numerical failure: {message}")]
    Numerical { message: String, report: Box<Option<RunReport>> },
}

pub fn exit_code(result: &Result<RunReport, RunError>) -> i32 {
    match result {
        Ok(r) if r.passed => 0,
        Ok(_) => 1,
        Err(RunError::Config(_)) => 2,
        Err(RunError::Numerical { .. }) => 3,
    }
}

/// Check catalog, one line per check.
pub fn list_checks() -> String {
    CHECKS
        .iter()
        .map(|c| format!("{:<20} [{}]\n{:<20} {}\n", c.id, c.anchor, "", c.description))
        .collect()
}

/// A config turned into pipeline objects.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub surface: Arc<Surface>,
    pub basis: FaberBasis,
    pub target: TargetForm,
    /// Coefficients the target was built from, when known.
    pub construction: Option<Vec<(BasisTag, C64)>>,
    pub options: SeriesOptions,
    pub checks: Vec<String>,
}

pub fn build_surface(config: &ExperimentConfig) -> Result<Surface, ConfigError> {
    let sb = &config.surface;
    let caps = build_caps(config)?;
    let w0 = parse_complex("surface.w0", &sb.w0)?;
    match sb.genus {
        0 => {
            if sb.tau.is_some() {
                return Err(ConfigError::new("surface.tau", "the sphere takes no lattice parameter"));
            }
            let q = parse_point("surface.q", sb.q.as_deref().unwrap_or("inf"))?;
            Surface::sphere(caps, q, w0).map_err(|e| ConfigError::new("surface", e.to_string()))
        }
        1 => {
            let tau_text = sb.tau.as_deref().ok_or_else(|| ConfigError::new("surface.tau", "required on the torus"))?;
            let tau = parse_complex("surface.tau", tau_text)?;
            if !(tau.im > 0.0) {
                return Err(ConfigError::new("surface.tau", format!("Im tau must be positive, got {tau}")));
            }
            let q = parse_point("surface.q", sb.q.as_deref().unwrap_or("inf"))?
                .ok_or_else(|| ConfigError::new("surface.q", "the torus needs a finite base point"))?;
            let corner = parse_complex("surface.corner", sb.corner.as_deref().unwrap_or("0"))?;
            let margin = sb.margin.unwrap_or(DEFAULT_MARGIN);
            Surface::torus(tau, caps, q, w0, corner, margin).map_err(|e| ConfigError::new("surface", e.to_string()))
        }
        g => Err(ConfigError::new("surface.genus", format!("genus must be 0 or 1, got {g}"))),
    }
}

fn build_target(
    block: &TargetBlock,
    surface: &Surface,
    basis: &FaberBasis,
    seed: u64,
) -> Result<(TargetForm, Option<Vec<(BasisTag, C64)>>), ConfigError> {
    let n = surface.cap_count();
    match block {
        TargetBlock::DoublePole { at } => {
            let a = parse_complex("target.at", at)?;
            let t = TargetForm::double_pole(surface, a).map_err(|e| ConfigError::new("target.at", e.to_string()))?;
            Ok((t, None))
        }
        TargetBlock::FaberAlpha { cap, m } => {
            if *cap == 0 || *cap > n {
                return Err(ConfigError::new("target.cap", format!("cap index must lie in 1..={n}, got {cap}")));
            }
            let el = basis
                .evaluator(cap - 1)
                .and_then(|e| e.element(*m))
                .map_err(|e| ConfigError::new("target.m", e.to_string()))?;
            let t = TargetForm::new(el.form, format!("alpha(k={cap}, m={m})")).expect("holomorphic");
            Ok((t, Some(vec![(el.tag, C64::new(1.0, 0.0))])))
        }
        TargetBlock::FaberCombination { max_m, seed: own } => {
            let mut rng = ChaCha8Rng::seed_from_u64(own.unwrap_or(seed));
            let mut draw = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let mut terms: Vec<(C64, OneForm)> = Vec::new();
            let mut tags = Vec::new();
            for k in 0..n.saturating_sub(1) {
                let c = draw();
                terms.push((c, surface.beta_form(k).expect("index checked")));
                tags.push((BasisTag::Beta(k), c));
            }
            for (j, g) in surface.gamma_basis().into_iter().enumerate() {
                let c = draw();
                terms.push((c, g));
                tags.push((BasisTag::Gamma(j), c));
            }
            for m in 1..=*max_m {
                for k in 0..n {
                    let el = basis
                        .evaluator(k)
                        .and_then(|e| e.element(m))
                        .map_err(|e| ConfigError::new("target.max_m", e.to_string()))?;
                    let c = draw();
                    terms.push((c, el.form));
                    tags.push((el.tag, c));
                }
            }
            let form = OneForm::combination(&terms).expect("holomorphic terms");
            let t = TargetForm::new(form, format!("random combination up to m = {max_m}")).expect("holomorphic");
            Ok((t, Some(tags)))
        }
        TargetBlock::Poles { poles } => {
            let parsed = poles
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let at = parse_complex(&format!("target.poles[{}].at", i + 1), &p.at)?;
                    let residue = parse_complex(&format!("target.poles[{}].residue", i + 1), &p.residue)?;
                    if p.order == 0 {
                        return Err(ConfigError::new(format!("target.poles[{}].order", i + 1), "order must be positive"));
                    }
                    Ok((at, p.order as i32, residue))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let form = OneForm::holomorphic(move |w| parsed.iter().map(|(a, k, r)| r * (w - a).powi(-k)).sum());
            Ok((TargetForm::new(form, "rational target").expect("holomorphic"), None))
        }
    }
}

impl Experiment {
    pub fn from_config(config: ExperimentConfig, seed: u64) -> Result<Self, ConfigError> {
        let surface = Arc::new(build_surface(&config)?);
        let run = &config.run;
        if run.truncations.is_empty() || run.truncations.contains(&0) {
            return Err(ConfigError::new("run.truncations", "truncation orders must be positive"));
        }
        let basis = FaberBasis::new(surface.clone()).map_err(|e| ConfigError::new("caps", e.to_string()))?;
        let max_order = basis.evaluator(0).map(|e| e.max_order()).unwrap_or(0);
        if let Some(m) = run.truncations.iter().find(|m| **m > max_order) {
            return Err(ConfigError::new("run.truncations", format!("order {m} exceeds the limit {max_order}")));
        }
        let (target, construction) = build_target(&config.target, &surface, &basis, seed)?;
        let checks = if run.checks.is_empty() {
            CHECKS.iter().map(|c| c.id.to_string()).collect()
        } else {
            for (i, id) in run.checks.iter().enumerate() {
                if checks::info(id).is_none() {
                    return Err(ConfigError::new(format!("run.checks[{}]", i + 1), format!("unknown check `{id}`")));
                }
            }
            let mut ids = run.checks.clone();
            ids.dedup();
            ids
        };
        parse_complex("run.invariance_shift", &run.invariance_shift)?;
        for fmt in &config.output.formats {
            if fmt != "csv" && fmt != "json" {
                return Err(ConfigError::new("output.formats", format!("unknown format `{fmt}`")));
            }
        }
        let options = SeriesOptions {
            truncations: run.truncations.clone(),
            boundary_nodes: run.boundary_nodes,
            ..SeriesOptions::default()
        };
        Ok(Self { config, surface, basis, target, construction, options, checks })
    }
}

fn recovery_error(decomposition: &SeriesDecomposition, construction: &[(BasisTag, C64)]) -> f64 {
    decomposition
        .coefficients()
        .iter()
        .map(|(tag, v)| {
            let expect = construction.iter().find(|(t, _)| t == tag).map_or(C64::new(0.0, 0.0), |(_, c)| *c);
            (v - expect).norm()
        })
        .fold(0.0, f64::max)
}

/// Runs a config file.
pub fn run(path: &Path, overrides: &RunOverrides) -> Result<RunReport, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
    run_config(ExperimentConfig::from_toml(&text)?, overrides)
}

/// Runs a parsed config.
pub fn run_config(mut config: ExperimentConfig, overrides: &RunOverrides) -> Result<RunReport, RunError> {
    if let Some(dir) = &overrides.out_dir {
        config.output.dir = dir.clone();
    }
    if overrides.strict {
        config.run.strict = true;
    }
    let seed = overrides.seed.unwrap_or(config.run.seed);
    let mut timings = Vec::new();
    let clock = Instant::now();
    let experiment = Experiment::from_config(config.clone(), seed)?;
    timings.push(report::Timing { stage: "setup".into(), seconds: clock.elapsed().as_secs_f64() });

    let mut report = RunReport {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        config: config.clone(),
        decomposition: None,
        checks: Vec::new(),
        timings,
        error: None,
        passed: false,
    };
    let out_dir = config.output.dir.clone();
    let fail = |mut report: RunReport, message: String| -> RunError {
        report.error = Some(message.clone());
        let _ = write_outputs(&out_dir, &report, None, &config.output.formats);
        RunError::Numerical { message, report: Box::new(Some(report)) }
    };

    let clock = Instant::now();
    let decomposition = match project_with_basis(&experiment.target, &experiment.basis, &experiment.options) {
        Ok(d) => d,
        Err(e) => return Err(fail(report, e.to_string())),
    };
    report.timings.push(report::Timing { stage: "decomposition".into(), seconds: clock.elapsed().as_secs_f64() });
    if config.run.strict && decomposition.regularized {
        let message = format!(
            "Gram matrix regularized (condition {:.3e}) and strict mode is on",
            decomposition.gram_condition
        );
        return Err(fail(report, message));
    }

    let clock = Instant::now();
    let points = checks::uniform_points(&experiment.surface, config.run.uniform_distance);
    let sup_errors: Vec<(u32, f64)> = decomposition
        .residual_history
        .iter()
        .map(|t| {
            let e = if points.is_empty() {
                f64::NAN
            } else {
                crate::series::uniform_error(&experiment.target, &decomposition, &points, 0.0, t.order)
                    .unwrap_or(f64::NAN)
            };
            (t.order, e)
        })
        .collect();
    let residuals: Vec<ResidualRow> = decomposition
        .residual_history
        .iter()
        .zip(&sup_errors)
        .map(|(t, (_, e))| ResidualRow { order: t.order, l2_residual: t.l2_residual, sup_error: e.is_finite().then_some(*e) })
        .collect();
    report.decomposition = Some(DecompositionSummary {
        order: decomposition.order,
        epsilon: decomposition.epsilon.clone(),
        c: decomposition.c.clone(),
        d: decomposition.d.clone(),
        gram_condition: decomposition.gram_condition,
        regularized: decomposition.regularized,
        residuals,
    });

    let shift = parse_complex("run.invariance_shift", &config.run.invariance_shift)?;
    let ctx = checks::Context {
        surface: &experiment.surface,
        target: &experiment.target,
        decomposition: &decomposition,
        sup_errors: &sup_errors,
        run: &config.run,
        shift,
        recovery: experiment.construction.as_deref().map(|c| recovery_error(&decomposition, c)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for id in &experiment.checks {
        report.checks.push(checks::run_check(id, &ctx, &mut rng));
    }
    report.timings.push(report::Timing { stage: "checks".into(), seconds: clock.elapsed().as_secs_f64() });
    report.passed = report.checks.iter().all(|c| c.passed);

    write_outputs(&out_dir, &report, Some(&decomposition), &config.output.formats).map_err(|e| RunError::Numerical {
        message: format!("cannot write outputs to {}: {e}", out_dir.display()),
        report: Box::new(Some(report.clone())),
    })?;
    Ok(report)
}

fn write_outputs(
    dir: &Path,
    report: &RunReport,
    decomposition: Option<&SeriesDecomposition>,
    formats: &[String],
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    if formats.iter().any(|f| f == "csv") {
        if let Some(d) = decomposition {
            report::write_coefficients(&dir.join("coefficients.csv"), &report::coefficient_rows(d))?;
        }
        if let Some(summary) = &report.decomposition {
            report::write_residuals(&dir.join("residuals.csv"), &summary.residuals)?;
        }
    }
    if formats.iter().any(|f| f == "json") {
        report::write_report(&dir.join("report.json"), report)?;
    }
    Ok(())
}
