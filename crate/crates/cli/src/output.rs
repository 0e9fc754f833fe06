//! CSV and JSON writers for experiment results.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use nsmo_core::fem::Mesh;
use nsmo_core::solver::StepKind;
use nsmo_core::{DirectionStatus, Primal, RunRecord};

use crate::experiment::{ExperimentSummary, FieldData, RunSummary};

pub const FRONT_HEADER: [&str; 10] = [
    "run_id",
    "problem",
    "h_max",
    "start_label",
    "J1",
    "J2",
    "iters",
    "status",
    "wall_ms",
    "max_xi_set",
];
pub const TRACE_HEADER: [&str; 13] = [
    "iter",
    "eps",
    "delta",
    "J1",
    "J2",
    "v_norm",
    "step",
    "step_kind",
    "direction_status",
    "xi_set_size",
    "inner_iters",
    "func_evals",
    "subgrad_evals",
];
pub const FIELD_HEADER: [&str; 7] = ["node_id", "x1", "x2", "u", "y", "psi", "active"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> anyhow::Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn step_kind_str(kind: StepKind) -> &'static str {
    match kind {
        StepKind::Armijo => "armijo",
        StepKind::Floor => "floor",
        StepKind::Null => "null",
    }
}

pub fn direction_status_str(status: DirectionStatus) -> &'static str {
    match status {
        DirectionStatus::CriticalWithinDelta => "critical",
        DirectionStatus::AcceptableDescent => "descent",
        DirectionStatus::SamplingFailed => "sampling_failed",
    }
}

/// One row per run in the order given. Runs with a single objective leave
/// `J2` empty; failed runs leave both objective columns empty.
pub fn write_front(path: &Path, runs: &[RunSummary]) -> anyhow::Result<()> {
    anyhow::ensure!(!runs.is_empty(), "no runs to export");
    let mut w = writer(path)?;
    w.write_record(FRONT_HEADER)?;
    for r in runs {
        w.write_record([
            r.run_id.clone(),
            r.problem.clone(),
            opt(r.h_max),
            r.start_label.clone(),
            opt(r.values.first().copied()),
            opt(r.values.get(1).copied()),
            r.iters.to_string(),
            r.status.clone(),
            r.wall_ms.to_string(),
            r.max_xi_set.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: &Path, record: &RunRecord) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRACE_HEADER)?;
    for row in &record.rows {
        w.write_record([
            row.iter.to_string(),
            row.eps.to_string(),
            row.delta.to_string(),
            opt(row.values.first().copied()),
            opt(row.values.get(1).copied()),
            row.v_norm.to_string(),
            opt(row.step),
            row.step_kind.map(step_kind_str).unwrap_or_default().to_string(),
            direction_status_str(row.direction_status).to_string(),
            row.xi_set_size.to_string(),
            row.inner_iters.to_string(),
            row.func_evals.to_string(),
            row.subgrad_evals.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_field(path: &Path, mesh: &Mesh, field: &FieldData, psi: &Primal) -> anyhow::Result<()> {
    let mut w = writer(path)?;
    w.write_record(FIELD_HEADER)?;
    for (i, p) in mesh.nodes().iter().enumerate() {
        w.write_record([
            i.to_string(),
            p[0].to_string(),
            p[1].to_string(),
            field.u.coeffs()[i].to_string(),
            field.y.coeffs()[i].to_string(),
            psi.coeffs()[i].to_string(),
            u8::from(field.active[i]).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, summary: &ExperimentSummary) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, summary)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
