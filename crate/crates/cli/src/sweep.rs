//! Peak emitter population against rect pulse length.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use wgqed_core::analytic::{pop_1photon_rect, HierarchyOptions};
use wgqed_core::{CouplingKind, TimeGrid};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::format::{Csv, Field};
use crate::output::{OutputDir, OutputFile};
use crate::run::{run_engine, Engine, Versions};

pub const HEADER: [&str; 7] = ["gamma_tp", "engine", "peak_n1", "peak_n2", "r21", "closed_form_n1", "status"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma_tp: f64,
    pub engine: Engine,
    pub peak_n1: f64,
    pub peak_n2: f64,
    /// max n²_TLS / max n¹_TLS.
    pub r21: f64,
    pub closed_form_n1: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepManifest {
    pub command: &'static str,
    pub config: ScenarioConfig,
    pub versions: Versions,
    pub threads: usize,
    pub wall_time_s: f64,
    pub points: usize,
    pub failed: usize,
    pub outputs: Vec<OutputFile>,
}

/// Peak n_TLS over the grid t ∈ (0, t_p + tail] for one point.
fn peak(sc: &Scenario, tp: f64, photons: u32, engine: Engine, tail: f64) -> Result<f64, String> {
    let dt = sc.grid.dt();
    let pulse = sc.config.build_pulse(Some(tp), dt).map_err(|e| e.to_string())?;
    let pulse = pulse.with_photons(photons).map_err(|e| e.to_string())?;
    let grid = TimeGrid::covering(dt, tp + tail).map_err(|e| e.to_string())?;
    let point = Scenario { pulse, grid, omegas: Vec::new(), ..sc.clone() };
    let run = run_engine(engine, &point, false, HierarchyOptions::default()).map_err(|e| e.to_string())?;
    Ok(run.record.n_tls.max())
}

pub fn sweep_rows(sc: &Scenario) -> CliResult<Vec<SweepRow>> {
    let sweep = sc.config.sweep.as_ref().ok_or_else(|| CliError::Config("the sweep command needs a [sweep] section".into()))?;
    let mut engines = Vec::new();
    if sc.config.engines.analytic {
        engines.push(Engine::Analytic);
    }
    if sc.config.engines.mps {
        engines.push(Engine::Mps);
    }
    let jobs: Vec<(f64, Engine, u32)> = sweep
        .gamma_tp
        .iter()
        .flat_map(|&tp| engines.iter().flat_map(move |&e| sweep.photons.iter().map(move |&n| (tp, e, n))))
        .collect();
    let results: Vec<Result<f64, String>> =
        jobs.par_iter().map(|&(tp, e, n)| peak(sc, tp, n, e, sweep.gamma_tail)).collect();

    let kind = sc.params.kind();
    let mut rows = Vec::new();
    for &tp in &sweep.gamma_tp {
        for &engine in &engines {
            let mut row = SweepRow {
                gamma_tp: tp,
                engine,
                peak_n1: f64::NAN,
                peak_n2: f64::NAN,
                r21: f64::NAN,
                closed_form_n1: match kind {
                    Some(k) if sc.params.delta() == 0.0 => closed_form_peak(k, tp),
                    _ => f64::NAN,
                },
                status: "ok".into(),
            };
            let mut errors = Vec::new();
            for ((jtp, je, n), result) in jobs.iter().zip(&results) {
                if *jtp != tp || *je != engine {
                    continue;
                }
                match result {
                    Ok(p) if *n == 1 => row.peak_n1 = *p,
                    Ok(p) => row.peak_n2 = *p,
                    Err(e) => errors.push(format!("n={n}: {e}")),
                }
            }
            row.r21 = row.peak_n2 / row.peak_n1;
            if !errors.is_empty() {
                row.status = format!("failed ({})", errors.join("; "));
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

fn closed_form_peak(kind: CouplingKind, tp: f64) -> f64 {
    // the one-photon population grows for as long as the rect pulse lasts
    pop_1photon_rect(kind, tp, tp).unwrap_or(f64::NAN)
}

/// Runs the sweep, writes `sweep.csv` and the manifest. Failed points are
/// reported in their rows and turn into an error once everything is written.
pub fn run_sweep(sc: &Scenario, out: &mut OutputDir) -> CliResult<SweepManifest> {
    let start = Instant::now();
    let rows = sweep_rows(sc)?;
    let mut csv = Csv::new(&HEADER);
    for r in &rows {
        csv.row_fields(&[
            Field::Num(r.gamma_tp),
            Field::Text(r.engine.name()),
            Field::Num(r.peak_n1),
            Field::Num(r.peak_n2),
            Field::Num(r.r21),
            Field::Num(r.closed_form_n1),
            Field::Text(&r.status),
        ]);
    }
    out.write_csv("sweep.csv", csv)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    let manifest = SweepManifest {
        command: "sweep",
        config: sc.config.clone(),
        versions: Versions::current(),
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        points: rows.len(),
        failed,
        outputs: out.files().to_vec(),
    };
    out.write_json("manifest.json", &manifest)?;
    if failed > 0 {
        return Err(CliError::SweepFailed { failed, total: rows.len() });
    }
    Ok(manifest)
}
