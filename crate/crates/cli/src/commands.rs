use std::fs;
use std::path::{Path, PathBuf};

use bbcool::dynamics::sample_arc;
use bbcool::oracle::{
    ermakov_check_with, pmp_check_with, schedule_conjugate_residuals, ErmakovCheck, Tolerances,
    VerificationReport,
};
use bbcool::switching::switching_curves;
use bbcool::synthesis::{synthesize_with, SynthesisOptions, SynthesisResult};
use bbcool::{Control, ControlBounds, ControlSchedule, Point, Polyline};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::doc::*;
use crate::error::CliError;

/// Conjugate-point parallelism residual accepted by `verify`.
pub const CONJUGATE_TOL: f64 = 1e-7;

#[derive(Serialize)]
struct Meta<'a> {
    schema: &'static str,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    files: Vec<String>,
}

fn write_meta(path: &Path, command: &str, cfg: &RunConfig, files: Vec<String>) -> Result<(), CliError> {
    let meta = Meta {
        schema: SCHEMA,
        tool: "bbcool",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: cfg,
        files,
    };
    fs::write(path, to_json(&meta))?;
    Ok(())
}

fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Writes to `--output` plus a metadata side record, or to stdout.
fn emit(cfg: &RunConfig, command: &str, text: &str) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => {
            fs::write(path, text)?;
            let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
            write_meta(&meta_path(path), command, cfg, vec![name])
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn options(cfg: &RunConfig) -> SynthesisOptions {
    SynthesisOptions {
        n_max_override: cfg.n_max_override,
        tol: cfg.tol,
    }
}

fn bounds_doc(b: &ControlBounds) -> BoundsDoc {
    BoundsDoc { u1: b.u1(), u2: b.u2() }
}

pub fn time_rows(cfg: &RunConfig) -> Result<Vec<TimeRow>, CliError> {
    let bounds = cfg.bounds();
    let opts = options(cfg);
    let results = cfg
        .gammas()
        .par_iter()
        .map(|&g| synthesize_with(g, &bounds, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(results
        .iter()
        .flat_map(|r| {
            r.candidates.iter().map(|c| TimeRow {
                gamma: r.gamma,
                n: c.n,
                feasible: c.feasible,
                s: c.s,
                total_time: c.total_time,
            })
        })
        .collect())
}

pub fn cmd_times(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.gamma.is_none() {
        return Err(CliError::Usage("times needs --gamma or --gamma-range".into()));
    }
    let rows = time_rows(cfg)?;
    let text = match cfg.format {
        Format::Csv => times_csv(&rows),
        Format::Json => to_json(&TimesDoc {
            schema: SCHEMA.into(),
            bounds: bounds_doc(&cfg.bounds()),
            rows,
        }),
    };
    emit(cfg, "times", &text)
}

pub fn synthesize_config(cfg: &RunConfig) -> Result<SynthesisResult, CliError> {
    let gamma = cfg.single_gamma()?;
    Ok(synthesize_with(gamma, &cfg.bounds(), &options(cfg))?)
}

pub fn cmd_synthesize(cfg: &RunConfig) -> Result<(), CliError> {
    let r = synthesize_config(cfg)?;
    eprintln!(
        "gamma {}: optimal n = {}, T = {:.15}, {} switch(es){}",
        r.gamma,
        r.optimal_n,
        r.schedule.total_time(),
        r.schedule.switch_count(),
        if r.cut_locus_hit { ", on a cut locus" } else { "" }
    );
    let text = match cfg.format {
        Format::Json => to_json(&ScheduleDoc::from_result(&r)),
        Format::Csv => schedule_csv(&r.schedule),
    };
    emit(cfg, "synthesize", &text)
}

/// Closed-form samples of a schedule, `per_arc` points on each arc.
pub fn sample_schedule(schedule: &ControlSchedule, per_arc: usize) -> Result<Vec<(f64, Point, Control)>, CliError> {
    let mut out = Vec::new();
    let mut t0 = 0.0;
    for arc in schedule.arcs() {
        let pts = sample_arc(arc.start, arc.ctrl, arc.duration, per_arc, schedule.bounds())?;
        let denom = per_arc.saturating_sub(1).max(1) as f64;
        for (i, p) in pts.into_iter().enumerate() {
            out.push((t0 + arc.duration * i as f64 / denom, p, arc.ctrl));
        }
        t0 += arc.duration;
    }
    Ok(out)
}

#[derive(Serialize)]
struct TrajectoryDoc {
    gamma: f64,
    optimal_n: u32,
    samples: Vec<(f64, Point, Control)>,
}

#[derive(Serialize)]
struct CurvesDoc {
    schema: &'static str,
    bounds: BoundsDoc,
    curves: Vec<Polyline>,
    trajectories: Vec<TrajectoryDoc>,
}

pub fn cmd_curves(cfg: &RunConfig, resolution: usize, overlay: &[f64]) -> Result<(), CliError> {
    let Some(dir) = &cfg.output else {
        return Err(CliError::Usage("curves needs --output DIR".into()));
    };
    if cfg.gamma.is_none() {
        return Err(CliError::Usage("curves needs --gamma-range (or --gamma)".into()));
    }
    if resolution == 0 {
        return Err(CliError::Usage("--resolution must be >= 1".into()));
    }
    if let Some(g) = overlay.iter().find(|g| !(**g > 1.0 && g.is_finite())) {
        return Err(CliError::Usage(format!("overlay gamma must be > 1, got {g}")));
    }
    let bounds = cfg.bounds();
    let curves = switching_curves(&bounds, &cfg.gammas(), resolution)?;
    let opts = options(cfg);
    let trajectories = overlay
        .par_iter()
        .map(|&g| {
            let r = synthesize_with(g, &bounds, &opts)?;
            Ok(TrajectoryDoc {
                gamma: g,
                optimal_n: r.optimal_n,
                samples: sample_schedule(&r.schedule, resolution)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    match cfg.format {
        Format::Csv => {
            for c in &curves {
                let name = format!("{}.csv", c.label);
                fs::write(dir.join(&name), points_csv(&c.points))?;
                files.push(name);
            }
            for (i, t) in trajectories.iter().enumerate() {
                let name = format!("trajectory_{i}.csv");
                fs::write(dir.join(&name), trajectory_csv(&t.samples))?;
                files.push(name);
            }
        }
        Format::Json => {
            let doc = CurvesDoc {
                schema: SCHEMA,
                bounds: bounds_doc(&bounds),
                curves,
                trajectories,
            };
            fs::write(dir.join("curves.json"), to_json(&doc))?;
            files.push("curves.json".into());
        }
    }
    write_meta(&dir.join("curves.meta.json"), "curves", cfg, files)
}

#[derive(Debug, Serialize)]
pub struct VerifyDoc {
    pub schema: &'static str,
    pub gamma: f64,
    pub bounds: BoundsDoc,
    pub step: f64,
    pub passed: bool,
    pub pmp: VerificationReport,
    pub ermakov: ErmakovCheck,
    pub conjugate_residuals: Vec<f64>,
}

pub fn verify_schedule(schedule: &ControlSchedule, step: f64) -> Result<VerifyDoc, CliError> {
    let tol = Tolerances::default();
    let integration = |e: bbcool::Error| match e {
        bbcool::Error::DomainProximity { .. } => CliError::VerifyFailed(e.to_string()),
        e => e.into(),
    };
    let pmp = pmp_check_with(schedule, None, step, &tol).map_err(integration)?;
    let ermakov = ermakov_check_with(schedule, schedule.gamma(), step, tol.endpoint).map_err(integration)?;
    let conjugate_residuals = schedule_conjugate_residuals(schedule, step).map_err(integration)?;
    let passed = pmp.passed && ermakov.passed && conjugate_residuals.iter().all(|&r| r <= CONJUGATE_TOL);
    Ok(VerifyDoc {
        schema: SCHEMA,
        gamma: schedule.gamma(),
        bounds: bounds_doc(schedule.bounds()),
        step,
        passed,
        pmp,
        ermakov,
        conjugate_residuals,
    })
}

fn verify_csv(v: &VerifyDoc) -> String {
    let mut rows = vec![
        ("passed".to_string(), v.passed.to_string()),
        ("endpoint_error".into(), num(v.pmp.endpoint_error)),
        ("max_abs_H".into(), num(v.pmp.max_abs_h)),
        ("phi_sign_violations".into(), v.pmp.phi_sign_violations.to_string()),
        ("min_costate_norm".into(), num(v.pmp.min_costate_norm)),
        ("ermakov_residual".into(), num(v.ermakov.residual)),
    ];
    for (i, x) in v.pmp.lambda2_at_switches.iter().enumerate() {
        rows.push((format!("lambda2_switch{}", i + 1), num(*x)));
    }
    for (i, x) in v.pmp.lambda1_x2_at_switches.iter().enumerate() {
        rows.push((format!("lambda1_x2_switch{}", i + 1), num(*x)));
    }
    for (i, x) in v.pmp.switch_alignment.iter().enumerate() {
        rows.push((format!("alignment_switch{}", i + 1), num(*x)));
    }
    for (i, x) in v.conjugate_residuals.iter().enumerate() {
        rows.push((format!("conjugate_arc{}", i + 1), num(*x)));
    }
    let mut out = String::from("metric,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

pub fn cmd_verify(cfg: &RunConfig, schedule_file: Option<&Path>) -> Result<(), CliError> {
    let schedule = match schedule_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let doc: ScheduleDoc = serde_json::from_str(&text)?;
            doc.to_schedule()?
        }
        None => synthesize_config(cfg)?.schedule,
    };
    let report = verify_schedule(&schedule, cfg.step)?;
    let text = match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => verify_csv(&report),
    };
    emit(cfg, "verify", &text)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(format!(
            "endpoint error {:.3e}, max |H| {:.3e}, {} sign violation(s)",
            report.pmp.endpoint_error, report.pmp.max_abs_h, report.pmp.phi_sign_violations
        )))
    }
}
