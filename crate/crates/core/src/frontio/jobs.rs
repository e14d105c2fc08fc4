//! The CLI jobs. Each writes its artifacts into an output directory and
//! reports whether a numeric threshold was exceeded.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::classify::{classify_window, Classification, SingularityReport};
use crate::error::{Error, Result};
use crate::frontio::config::{JobConfig, Output};
use crate::frontio::mesh::{sample_wavefronts, MeshFile};
use crate::identities::{run_identity_suite, IdentityOptions, IdentityReport};
use crate::normalform::{extract_normal_form, round_trip, NormalFormModel, RoundTrip};

/// Round-trip residual bound for a normal form.
pub const ROUND_TRIP_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    NumericFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobOutcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
    /// Short machine-readable summary, also printed by the CLI.
    pub summary: serde_json::Value,
}

/// Exit status: 0 success, 1 validation error, 2 numeric failure.
pub fn exit_code(result: &Result<JobOutcome>) -> i32 {
    match result {
        Ok(JobOutcome {
            status: Status::Success,
            ..
        }) => 0,
        Ok(_) => 2,
        Err(
            Error::Config { .. }
            | Error::Lex { .. }
            | Error::Parse { .. }
            | Error::PartitionViolation { .. }
            | Error::InvalidPartition(_)
            | Error::Precondition(_)
            | Error::NotCorankOne { .. }
            | Error::Io(_),
        ) => 1,
        Err(_) => 2,
    }
}

fn write(dir: &Path, name: &str, text: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, text)?;
    files.push(path);
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn require(cfg: &JobConfig, wanted: &[Output], job: &str) -> Result<()> {
    if wanted.iter().any(|o| cfg.wants(*o)) {
        Ok(())
    } else {
        Err(Error::Config {
            key: "outputs".into(),
            message: format!("nothing for `{job}` to write"),
        })
    }
}

/// Canonical form of the expression and its partial derivatives.
pub fn parse_check(cfg: &JobConfig) -> Result<JobOutcome> {
    let g = cfg.generating_function()?;
    let chart: Vec<String> = g.partition().chart_vars().iter().map(|v| v.to_string()).collect();
    let gradient: BTreeMap<String, String> = chart
        .iter()
        .zip(g.gradient_exprs())
        .map(|(v, d)| (v.clone(), d.to_string()))
        .collect();
    Ok(JobOutcome {
        status: Status::Success,
        files: Vec::new(),
        summary: json!({
            "expression": g.to_string(),
            "chart": chart,
            "transcendental": g.is_transcendental(),
            "gradient": gradient,
        }),
    })
}

pub fn sample(cfg: &JobConfig) -> Result<(MeshFile, MeshFile)> {
    let g = cfg.generating_function()?;
    let singular = crate::classify::find_singular_set(&g, &cfg.window, cfg.tolerances.tol_root);
    Ok(sample_wavefronts(&g, &cfg.window, &singular))
}

pub fn run_sample(cfg: &JobConfig, out: &Path) -> Result<JobOutcome> {
    require(cfg, &[Output::MeshE, Output::MeshM], "sample")?;
    let (e, m) = sample(cfg)?;
    let mut files = Vec::new();
    for (mesh, name, wanted) in [(&e, "mesh_e", Output::MeshE), (&m, "mesh_m", Output::MeshM)] {
        if !cfg.wants(wanted) {
            continue;
        }
        if let Some(obj) = mesh.to_obj() {
            write(out, &format!("{name}.obj"), &obj, &mut files)?;
        }
        write(out, &format!("{name}.csv"), &mesh.to_csv(), &mut files)?;
    }
    let summary = json!({
        "vertices": e.vertex_count(),
        "dropped": e.dropped(),
        "faces": e.faces().len(),
        "singular_curves": m.singular.len(),
        "singular_points": m.singular.iter().map(Vec::len).sum::<usize>(),
    });
    write(out, "sample_summary.json", &to_json(&summary), &mut files)?;
    Ok(JobOutcome {
        status: Status::Success,
        files,
        summary,
    })
}

/// A classified point, or the error that stopped its classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportRecord {
    Report(Box<SingularityReport>),
    Failed { point: Vec<f64>, error: String },
}

impl ReportRecord {
    pub fn classification(&self) -> Option<Classification> {
        match self {
            ReportRecord::Report(r) => Some(r.classification),
            ReportRecord::Failed { .. } => None,
        }
    }
}

pub fn classify(cfg: &JobConfig) -> Result<Vec<ReportRecord>> {
    let g = cfg.generating_function()?;
    Ok(classify_window(&g, &cfg.window, &cfg.tolerances)
        .into_iter()
        .map(|(point, r)| match r {
            Ok(r) => ReportRecord::Report(Box::new(r)),
            Err(e) => ReportRecord::Failed {
                point,
                error: e.to_string(),
            },
        })
        .collect())
}

pub fn histogram(records: &[ReportRecord]) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for r in records {
        let label = match r.classification() {
            Some(c) => format!("{c:?}"),
            None => "Error".into(),
        };
        *h.entry(label).or_insert(0) += 1;
    }
    h
}

pub fn run_classify(cfg: &JobConfig, out: &Path) -> Result<JobOutcome> {
    require(cfg, &[Output::Reports], "classify")?;
    let records = classify(cfg)?;
    let summary = json!({
        "singular_points": records.len(),
        "histogram": histogram(&records),
    });
    let mut files = Vec::new();
    write(out, "reports.json", &to_json(&records), &mut files)?;
    write(out, "summary.json", &to_json(&summary), &mut files)?;
    Ok(JobOutcome {
        status: Status::Success,
        files,
        summary,
    })
}

pub fn identities(cfg: &JobConfig, opts: IdentityOptions) -> Result<IdentityReport> {
    let g = cfg.generating_function()?;
    run_identity_suite(&g, &cfg.window, &cfg.tolerances, cfg.identity_trials, cfg.seed, opts)
}

pub fn run_identities(cfg: &JobConfig, out: &Path, opts: IdentityOptions) -> Result<JobOutcome> {
    require(cfg, &[Output::Identities], "identities")?;
    let report = identities(cfg, opts)?;
    let mut files = Vec::new();
    write(out, "identities.json", &to_json(&report), &mut files)?;
    Ok(JobOutcome {
        status: if report.pass {
            Status::Success
        } else {
            Status::NumericFailure
        },
        files,
        summary: json!({
            "max_residual": report.residuals.max(),
            "threshold": report.threshold,
            "pass": report.pass,
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    #[serde(flatten)]
    pub round_trip: RoundTrip,
    pub threshold: f64,
    pub pass: bool,
}

pub fn normal_form(cfg: &JobConfig) -> Result<(NormalFormModel, ResidualReport)> {
    let g = cfg.generating_function()?;
    let (nf, _) = extract_normal_form(&g, &cfg.window, &cfg.tolerances)?;
    let rt = round_trip(&nf, &g, &cfg.window)?;
    let pass = rt.max_residual <= ROUND_TRIP_THRESHOLD && rt.samples > 0;
    Ok((
        nf,
        ResidualReport {
            round_trip: rt,
            threshold: ROUND_TRIP_THRESHOLD,
            pass,
        },
    ))
}

pub fn run_normalform(cfg: &JobConfig, out: &Path) -> Result<JobOutcome> {
    require(cfg, &[Output::Normalform], "normal-form")?;
    let (nf, residual) = normal_form(cfg)?;
    let mut files = Vec::new();
    write(out, "normalform.json", &to_json(&nf), &mut files)?;
    write(out, "normalform_residual.json", &to_json(&residual), &mut files)?;
    Ok(JobOutcome {
        status: if residual.pass {
            Status::Success
        } else {
            Status::NumericFailure
        },
        files,
        summary: json!({
            "kind": nf.kind,
            "max_residual": residual.round_trip.max_residual,
            "pass": residual.pass,
        }),
    })
}
