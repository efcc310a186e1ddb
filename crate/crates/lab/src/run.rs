//! Configuration-driven experiment runner: builds the configured operator,
//! sweeps orbits over the horizon, classifies vectors, runs the property
//! suites, and writes deterministic CSV/report files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_bigint::BigUint;
use num_traits::One;
use wildorbit_core::diagonal::{iterate_closed_form, orbit_norm};
use wildorbit_core::forms::{make_forms, SeparatingSequence};
use wildorbit_core::hajek::{
    build_hs_layout, hs_divergence_recurrence_report, hs_orbit_norm, iterate_r_hs, HSLayout,
    HsTraceRow, HsVector,
};
use wildorbit_core::lines::{classify_base_point, BaseClass};
use wildorbit_core::rotation::{iterate_closed_form_real, orbit_norm_real};
use wildorbit_core::schedule::{build_schedule, ModulusSchedule};
use wildorbit_core::vector::{lp_norm, project_p, NormSpec, SparseVector};
use wildorbit_core::Error as CoreError;

use crate::config::{
    parse_big, ExperimentConfig, FieldChoice, HorizonConfig, OperatorChoice, VectorConfig,
};
use crate::suite::{self, Suite};

/// Environment variable overriding the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "WILDDYN_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prediction {
    PredictA,
    PredictB,
}

impl Prediction {
    pub fn label(&self) -> &'static str {
        match self {
            Prediction::PredictA => "PredictA",
            Prediction::PredictB => "PredictB",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub prediction: Prediction,
    /// `(label, certified bound)` rows backing the prediction.
    pub evidence: Vec<(String, f64)>,
    /// Whether the observed trend matches the prediction: climbing lower
    /// bounds for A, shrinking return bounds for B.
    pub consistent: bool,
}

/// The operator assembled from a config.
pub enum OperatorContext {
    Diagonal {
        schedule: ModulusSchedule,
        forms: SeparatingSequence,
    },
    Rotation {
        schedule: ModulusSchedule,
        forms: SeparatingSequence,
    },
    HajekSmith {
        layout: HSLayout,
        forms: SeparatingSequence,
    },
    BackwardShift,
}

pub fn build_operator(cfg: &ExperimentConfig) -> Result<OperatorContext> {
    let p = cfg.norm_spec()?;
    match cfg.operator {
        OperatorChoice::BackwardShift => Ok(OperatorContext::BackwardShift),
        OperatorChoice::Diagonal | OperatorChoice::Rotation => {
            let f = cfg.line_union()?;
            let forms = make_forms(&f, cfg.depth).map_err(|e| anyhow::anyhow!("{e}"))?;
            let schedule = build_schedule(&forms, cfg.depth, cfg.epsilon_value()?)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            if cfg.operator == OperatorChoice::Rotation {
                if cfg.field != FieldChoice::Real {
                    bail!("rotation model requires field = \"real\"");
                }
                Ok(OperatorContext::Rotation { schedule, forms })
            } else {
                Ok(OperatorContext::Diagonal { schedule, forms })
            }
        }
        OperatorChoice::HajekSmith => {
            if cfg.field != FieldChoice::Real {
                bail!("hajek_smith model requires field = \"real\"");
            }
            let f = cfg.line_union()?;
            let forms = make_forms(&f, cfg.depth.max(2) + 1).map_err(|e| anyhow::anyhow!("{e}"))?;
            let layout =
                build_hs_layout(&forms, cfg.depth, p).map_err(|e| anyhow::anyhow!("{e}"))?;
            Ok(OperatorContext::HajekSmith { layout, forms })
        }
    }
}

/// Resolves horizon times; "windows" samples the divergence windows and the
/// recurrence return times of the built operator.
pub fn horizon_times(cfg: &ExperimentConfig, op: &OperatorContext) -> Result<Vec<BigUint>> {
    match &cfg.horizon {
        HorizonConfig::List(ts) => ts.iter().map(|s| parse_big(s)).collect(),
        HorizonConfig::Auto(_) => {
            let mut out = vec![BigUint::one()];
            match op {
                OperatorContext::Diagonal { schedule, .. }
                | OperatorContext::Rotation { schedule, .. } => {
                    for k in 3..=schedule.depth() {
                        let m_prev = schedule.m(k - 1).map_err(|e| anyhow::anyhow!("{e}"))?;
                        out.push(m_prev.clone());
                        out.push(m_prev * 2u32);
                    }
                }
                OperatorContext::HajekSmith { layout, .. } => {
                    for k in 1..=layout.blocks() {
                        let m_k = layout.m(k).map_err(|e| anyhow::anyhow!("{e}"))?;
                        out.push(m_k * 2u32);
                        out.push(layout.h(k).map_err(|e| anyhow::anyhow!("{e}"))?.clone());
                    }
                }
                OperatorContext::BackwardShift => {
                    out.extend((2..=16u32).map(BigUint::from));
                }
            }
            out.sort();
            out.dedup();
            Ok(out)
        }
    }
}

/// One CSV row: certified intervals for `‖R^t x‖` and `‖R^t x − x‖`.
#[derive(Debug, Clone)]
pub struct OrbitRow {
    pub t: BigUint,
    pub norm_lo: f64,
    pub norm_hi: f64,
    pub dist0_lo: f64,
    pub dist0_hi: f64,
}

fn interval_or_wide(r: std::result::Result<(f64, f64), CoreError>) -> Result<(f64, f64)> {
    match r {
        Ok(v) => Ok(v),
        Err(CoreError::UnusableInterval { lo, hi }) => Ok((lo, hi)),
        Err(e) => Err(anyhow::anyhow!("{e}")),
    }
}

pub fn orbit_row_sparse(
    op: &OperatorContext,
    x: &SparseVector,
    t: &BigUint,
    trunc: usize,
    p: NormSpec,
) -> Result<OrbitRow> {
    match op {
        OperatorContext::Diagonal { schedule, forms } => {
            let state = iterate_closed_form(x, t.clone(), schedule, forms, trunc);
            let (norm_lo, norm_hi) = interval_or_wide(orbit_norm(&state, p))?;
            let (v, tail) = state.materialize().map_err(|e| anyhow::anyhow!("{e}"))?;
            let d = lp_norm(&v.sub(x), p);
            Ok(OrbitRow {
                t: t.clone(),
                norm_lo,
                norm_hi,
                dist0_lo: (d - tail).max(0.0),
                dist0_hi: d + tail,
            })
        }
        OperatorContext::Rotation { schedule, forms } => {
            let state = iterate_closed_form_real(x, t.clone(), schedule, forms, trunc)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let (norm_lo, norm_hi) = interval_or_wide(orbit_norm_real(&state, p))?;
            let (v, tail) = state.materialize().map_err(|e| anyhow::anyhow!("{e}"))?;
            let d = lp_norm(&v.sub(x), p);
            Ok(OrbitRow {
                t: t.clone(),
                norm_lo,
                norm_hi,
                dist0_lo: (d - tail).max(0.0),
                dist0_hi: d + tail,
            })
        }
        OperatorContext::BackwardShift => {
            if p.is_sup() {
                bail!("backward shift demo needs a finite p");
            }
            let v = backward_shift_power(x, t, p.p())?;
            let norm = lp_norm(&v, p);
            let d = lp_norm(&v.sub(x), p);
            Ok(OrbitRow {
                t: t.clone(),
                norm_lo: norm,
                norm_hi: norm,
                dist0_lo: d,
                dist0_hi: d,
            })
        }
        OperatorContext::HajekSmith { .. } => {
            bail!("cycle-model vectors use orbit_row_hs")
        }
    }
}

pub fn orbit_row_hs(
    layout: &HSLayout,
    forms: &SeparatingSequence,
    x: &HsVector,
    t: &BigUint,
    trunc: usize,
) -> Result<OrbitRow> {
    let p = layout.p();
    let (norm_lo, norm_hi) =
        hs_orbit_norm(x, t, layout, forms, trunc).map_err(|e| anyhow::anyhow!("{e}"))?;
    let (v, tail) = iterate_r_hs(x, t, layout, forms, trunc).map_err(|e| anyhow::anyhow!("{e}"))?;
    let d = v.sub(x).norm(p);
    Ok(OrbitRow {
        t: t.clone(),
        norm_lo,
        norm_hi,
        dist0_lo: (d - tail).max(0.0),
        dist0_hi: d + tail,
    })
}

/// `B^t x` for the weighted backward shift `B e_i = (i/(i−1))^{1/p} e_{i−1}`.
pub fn backward_shift_power(x: &SparseVector, t: &BigUint, p: f64) -> Result<SparseVector> {
    let mut out = SparseVector::new(x.field());
    let Some(max) = x.max_support() else {
        return Ok(out);
    };
    let t = match num_traits::ToPrimitive::to_u64(t) {
        Some(t) => t,
        None => return Ok(out), // beyond any finite support: annihilated
    };
    if t >= max {
        return Ok(out);
    }
    for (i, z) in x.iter() {
        if i <= t {
            continue;
        }
        let mut c = 1.0;
        for s in 0..t {
            let idx = (i - s) as f64;
            c *= (idx / (idx - 1.0)).powf(1.0 / p);
        }
        out.add(i - t, z * c).map_err(|e| anyhow::anyhow!("{e}"))?;
    }
    Ok(out)
}

pub fn classify_sparse(
    op: &OperatorContext,
    x: &SparseVector,
    p: NormSpec,
    trunc: usize,
) -> Result<Classification> {
    let (schedule, forms, real) = match op {
        OperatorContext::Diagonal { schedule, forms } => (schedule, forms, false),
        OperatorContext::Rotation { schedule, forms } => (schedule, forms, true),
        _ => bail!("classification for sparse vectors needs the diagonal or rotation model"),
    };
    let base = project_p(x);
    let (class, _) = classify_base_point(&base, forms.f_set());
    let mut evidence = Vec::new();
    if class == BaseClass::NotInF {
        let x_norm = lp_norm(x, p);
        let slack = if real { std::f64::consts::SQRT_2 } else { 1.0 };
        for k in 3..=schedule.depth().min(forms.len()) {
            let f_val = forms.eval(k, &base).map_err(|e| anyhow::anyhow!("{e}"))?.norm();
            let bound = 2.0 / std::f64::consts::PI * f_val / slack - x_norm;
            evidence.push((format!("window k={k}"), bound));
        }
        let consistent = evidence.len() >= 2
            && evidence.last().unwrap().1 > evidence.first().unwrap().1;
        return Ok(Classification {
            prediction: Prediction::PredictA,
            evidence,
            consistent,
        });
    }
    if real {
        // Real model: certify ‖R^t x − x‖ directly at the return times.
        for n in 3..=schedule.depth().min(forms.len()) {
            let k_n = if base.is_zero() {
                n
            } else {
                forms
                    .best_prefix_index(&base, n)
                    .map_err(|e| anyhow::anyhow!("{e}"))?
                    .0
            };
            let t = schedule
                .m(k_n.saturating_sub(1).max(2))
                .map_err(|e| anyhow::anyhow!("{e}"))?
                * 2u32;
            let state = iterate_closed_form_real(x, t.clone(), schedule, forms, trunc)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let (v, tail) = state.materialize().map_err(|e| anyhow::anyhow!("{e}"))?;
            let bound = lp_norm(&v.sub(x), p) + tail;
            evidence.push((format!("n={n} t={t}"), bound));
        }
    } else {
        for n in 3..=schedule.depth().min(forms.len()) {
            let rec =
                wildorbit_core::diagonal::recurrence_estimate(x, n, schedule, forms, trunc, p)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
            evidence.push((format!("n={n} t=2m_{}", rec.k_n.max(3) - 1), rec.bound));
        }
    }
    let best = evidence.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let consistent = evidence.len() >= 2 && best <= evidence.first().unwrap().1;
    Ok(Classification {
        prediction: Prediction::PredictB,
        evidence,
        consistent,
    })
}

pub fn classify_hs(
    layout: &HSLayout,
    forms: &SeparatingSequence,
    x: &HsVector,
) -> Result<Classification> {
    let report = hs_divergence_recurrence_report(x, layout, forms, layout.blocks())
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut evidence = Vec::new();
    if report.in_f {
        for row in &report.rows {
            if let HsTraceRow::Recurrent { t, k_n, bound } = row {
                evidence.push((format!("k_n={k_n} t={t}"), *bound));
            }
        }
        let best = evidence.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        let consistent =
            !evidence.is_empty() && best <= evidence.first().map(|e| e.1).unwrap_or(f64::INFINITY);
        Ok(Classification {
            prediction: Prediction::PredictB,
            evidence,
            consistent,
        })
    } else {
        for row in &report.rows {
            if let HsTraceRow::Divergent {
                k, lower_bound, ..
            } = row
            {
                evidence.push((format!("window k={k}"), *lower_bound));
            }
        }
        let consistent = evidence.len() >= 2
            && evidence.last().unwrap().1 > evidence.first().unwrap().1;
        Ok(Classification {
            prediction: Prediction::PredictA,
            evidence,
            consistent,
        })
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub all_pass: bool,
    pub summary: String,
}

pub fn resolve_output_dir(cfg: &ExperimentConfig) -> PathBuf {
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(cfg.output_dir.clone().unwrap_or_else(|| "wilddyn-out".into()))
}

fn csv_of_rows(rows: &[OrbitRow]) -> String {
    let mut out = String::from("t,norm_lo,norm_hi,dist0_lo,dist0_hi\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e}",
            r.t, r.norm_lo, r.norm_hi, r.dist0_lo, r.dist0_hi
        );
    }
    out
}

fn vector_rows(
    cfg: &ExperimentConfig,
    op: &OperatorContext,
    vcfg: &VectorConfig,
    times: &[BigUint],
) -> Result<(Vec<OrbitRow>, Option<Classification>)> {
    let p = cfg.norm_spec()?;
    match op {
        OperatorContext::HajekSmith { layout, forms } => {
            let x = vcfg.to_hs()?;
            let mut rows = Vec::new();
            for t in times {
                rows.push(orbit_row_hs(layout, forms, &x, t, cfg.trunc)?);
            }
            Ok((rows, Some(classify_hs(layout, forms, &x)?)))
        }
        OperatorContext::BackwardShift => {
            let x = vcfg.to_sparse(cfg.scalar_field())?;
            let mut rows = Vec::new();
            for t in times {
                rows.push(orbit_row_sparse(op, &x, t, cfg.trunc, p)?);
            }
            Ok((rows, None))
        }
        _ => {
            let x = vcfg.to_sparse(cfg.scalar_field())?;
            let mut rows = Vec::new();
            for t in times {
                rows.push(orbit_row_sparse(op, &x, t, cfg.trunc, p)?);
            }
            Ok((rows, Some(classify_sparse(op, &x, p, cfg.trunc)?)))
        }
    }
}

/// Runs the configured experiment, writing one orbit CSV per vector, a
/// classification report, a property-suite report, and a gnuplot helper
/// script. Partial outputs are removed if any step fails.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let dir = resolve_output_dir(cfg);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = run_experiment_inner(cfg, &dir, &mut written);
    if result.is_err() {
        for f in &written {
            let _ = std::fs::remove_file(f);
        }
    }
    result
}

fn write_file(dir: &Path, written: &mut Vec<PathBuf>, name: &str, content: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    written.push(path.clone());
    Ok(path)
}

fn run_experiment_inner(
    cfg: &ExperimentConfig,
    dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<RunOutcome> {
    let op = build_operator(cfg)?;
    let times = horizon_times(cfg, &op)?;
    let mut all_pass = true;
    let mut summary = String::new();
    let mut classification_report = String::from("vector,prediction,consistent,evidence\n");
    let mut csv_names = Vec::new();

    for vcfg in &cfg.vectors {
        let (rows, class) = vector_rows(cfg, &op, vcfg, &times)
            .with_context(|| format!("vector {}", vcfg.name))?;
        let name = format!("orbit_{}.csv", vcfg.name);
        write_file(dir, written, &name, &csv_of_rows(&rows))?;
        csv_names.push(name);
        if let Some(class) = class {
            if !class.consistent {
                all_pass = false;
            }
            let evidence = class
                .evidence
                .iter()
                .map(|(label, v)| format!("{label}: {v:e}"))
                .collect::<Vec<_>>()
                .join("; ");
            let _ = writeln!(
                classification_report,
                "{},{},{},\"{}\"",
                vcfg.name,
                class.prediction.label(),
                class.consistent,
                evidence
            );
        } else {
            let _ = writeln!(classification_report, "{},n/a,true,\"\"", vcfg.name);
        }
    }
    write_file(dir, written, "classification.csv", &classification_report)?;

    // Property-suite report for the configured module plus its dependencies.
    let suites = suite::suites_for_operator(cfg.operator.name(), cfg.seed)?;
    let mut suite_report = String::from("suite,check,pass,detail\n");
    for s in &suites {
        for c in &s.checks {
            if !c.pass {
                all_pass = false;
            }
            let _ = writeln!(
                suite_report,
                "{},{},{},\"{}\"",
                s.name, c.name, c.pass, c.detail
            );
        }
    }
    write_file(dir, written, "suite_report.csv", &suite_report)?;

    let mut gp = String::from("set datafile separator ','\nset key autotitle columnhead\nset logscale y\n");
    for name in &csv_names {
        let _ = writeln!(gp, "plot '{name}' using 0:2 with lines, '' using 0:4 with lines");
    }
    write_file(dir, written, "plot.gp", &gp)?;

    let _ = writeln!(
        summary,
        "{} vectors, {} horizon points, {} suites, all_pass = {}",
        cfg.vectors.len(),
        times.len(),
        suites.len(),
        all_pass
    );
    Ok(RunOutcome {
        files: written.clone(),
        all_pass,
        summary,
    })
}

/// The `spectrum` subcommand: eigenvalues of the configured truncation.
pub fn run_spectrum(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let dir = resolve_output_dir(cfg);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let op = build_operator(cfg)?;
    let trunc = cfg.trunc.clamp(4, 256);
    let (matrix, expected_radius) = match &op {
        OperatorContext::Diagonal { schedule, forms } => (
            crate::matrices::diagonal_truncation(schedule, forms, trunc.min(schedule.depth()))?,
            1.0,
        ),
        OperatorContext::Rotation { schedule, forms } => (
            crate::matrices::rotation_truncation(
                schedule,
                forms,
                (trunc / 2).min(schedule.depth()).max(2),
            )?,
            1.0,
        ),
        OperatorContext::HajekSmith { layout, .. } => {
            let h = layout
                .h(1)
                .map_err(|e| anyhow::anyhow!("{e}"))?
                .clone();
            let h = num_traits::ToPrimitive::to_usize(&h)
                .filter(|&h| h <= crate::matrices::DENSE_CAP)
                .context("first cycle too long for a dense eigensolve")?;
            (crate::matrices::cycle_truncation(h)?, 1.0)
        }
        OperatorContext::BackwardShift => bail!("the backward shift demo has no truncation spectrum command; use `demo backward-shift`"),
    };
    let eigs = matrix.eigenvalues()?;
    let radius = matrix.spectral_radius()?;
    let all_pass = (radius - expected_radius).abs() <= 1e-9;
    let mut csv = String::from("re,im,modulus\n");
    let mut sorted = eigs.clone();
    sorted.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.norm().total_cmp(&b.norm())));
    for z in &sorted {
        let _ = writeln!(csv, "{:e},{:e},{:e}", z.re, z.im, z.norm());
    }
    write_file(&dir, &mut written, "spectrum.csv", &csv)?;
    Ok(RunOutcome {
        files: written,
        all_pass,
        summary: format!(
            "{}: {} eigenvalues, spectral radius {radius:.12} (expected {expected_radius})\n",
            matrix.provenance,
            sorted.len()
        ),
    })
}

/// Collects suites for `suite [--module NAME]`.
pub fn run_suites(module: Option<&str>, seed: u64) -> Result<(Vec<Suite>, bool)> {
    let suites = match module {
        None => suite::all_suites(seed)?,
        Some(name) => vec![suite::suite_by_name(name, seed)?],
    };
    let all_pass = suites.iter().all(|s| s.checks.iter().all(|c| c.pass));
    Ok((suites, all_pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    // The output-dir env var is process-global; serialize tests touching it.
    static ENV_LOCK: std::sync::Mutex<()> = std::sync::Mutex::new(());

    fn sample_config(dir: &Path) -> ExperimentConfig {
        let text = format!(
            r#"
field = "complex"
p = "2"
operator = "diagonal"
depth = 8
horizon = "windows"
trunc = 16
seed = 3
output_dir = "{}"

[f_set]
points = [{{ re = "0/1" }}]

[[vectors]]
name = "off_f"
entries = [{{ index = 1, re = "1/1" }}, {{ index = 2, re = "2/1" }}]

[[vectors]]
name = "on_f"
entries = [{{ index = 1, re = "1/1" }}, {{ index = 3, re = "1/2" }}]
"#,
            dir.display()
        );
        ExperimentConfig::from_str_validated(&text).unwrap()
    }

    #[test]
    fn run_is_deterministic_and_classifies() {
        let _guard = ENV_LOCK.lock().unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let cfg = sample_config(tmp.path());
        let first = run_experiment(&cfg).unwrap();
        let mut snapshots = Vec::new();
        for f in &first.files {
            snapshots.push((f.clone(), std::fs::read(f).unwrap()));
        }
        let second = run_experiment(&cfg).unwrap();
        assert_eq!(first.files, second.files);
        for (path, bytes) in &snapshots {
            assert_eq!(&std::fs::read(path).unwrap(), bytes, "{}", path.display());
        }
        let report = std::fs::read_to_string(tmp.path().join("classification.csv")).unwrap();
        assert!(report.contains("off_f,PredictA,true"), "{report}");
        assert!(report.contains("on_f,PredictB,true"), "{report}");
    }

    #[test]
    fn empty_vector_list_still_writes_suite_report() {
        let _guard = ENV_LOCK.lock().unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = sample_config(tmp.path());
        cfg.vectors.clear();
        let outcome = run_experiment(&cfg).unwrap();
        assert!(outcome
            .files
            .iter()
            .any(|f| f.ends_with("suite_report.csv")));
        assert!(!outcome.files.iter().any(|f| f
            .file_name()
            .unwrap()
            .to_string_lossy()
            .starts_with("orbit_")));
    }

    #[test]
    fn scaling_invariance_of_classification() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = sample_config(tmp.path());
        let op = build_operator(&cfg).unwrap();
        let p = cfg.norm_spec().unwrap();
        for vcfg in &cfg.vectors {
            let x = vcfg.to_sparse(cfg.scalar_field()).unwrap();
            let doubled = x.scaled(num_complex::Complex64::new(2.0, 0.0));
            let a = classify_sparse(&op, &x, p, cfg.trunc).unwrap();
            let b = classify_sparse(&op, &doubled, p, cfg.trunc).unwrap();
            assert_eq!(a.prediction, b.prediction, "vector {}", vcfg.name);
        }
    }

    #[test]
    fn env_var_overrides_output_dir() {
        let _guard = ENV_LOCK.lock().unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let cfg = sample_config(Path::new("ignored-dir"));
        std::env::set_var(OUTPUT_DIR_ENV, tmp.path());
        let resolved = resolve_output_dir(&cfg);
        std::env::remove_var(OUTPUT_DIR_ENV);
        assert_eq!(resolved, tmp.path());
        assert_eq!(resolve_output_dir(&cfg), Path::new("ignored-dir"));
    }

    #[test]
    fn backward_shift_rows_annihilate() {
        let text = r#"
field = "real"
p = "2"
operator = "backward_shift"
depth = 3
horizon = ["1", "4", "5", "6"]
seed = 0

[f_set]
lines = ["0/1"]

[[vectors]]
name = "e5"
entries = [{ index = 5, re = "1/1" }]
"#;
        let cfg = ExperimentConfig::from_str_validated(text).unwrap();
        let op = build_operator(&cfg).unwrap();
        let times = horizon_times(&cfg, &op).unwrap();
        let x = cfg.vectors[0].to_sparse(cfg.scalar_field()).unwrap();
        let p = cfg.norm_spec().unwrap();
        let rows: Vec<OrbitRow> = times
            .iter()
            .map(|t| orbit_row_sparse(&op, &x, t, cfg.trunc, p).unwrap())
            .collect();
        assert!(rows[0].norm_lo > 1.0); // one shift picks up weight > 1
        assert_eq!(rows[2].norm_lo, 0.0); // t = 5 kills e5
        assert_eq!(rows[3].norm_lo, 0.0);
    }
}
