//! `simulate` and `spectra`: run the requested engines on one scenario and
//! write their observables.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use wgqed_core::analytic::{flux_general_with, g1_free_pulse, g1_qrt, stationary_spectrum, EmissionRecord, HierarchyOptions};
use wgqed_core::mps::{evolve, g1_matrix, write_checkpoint, Channels, TimeBinMps};
use wgqed_core::spectra::{long_time_spectrum, spectrum_and_intensity, SpectrogramGrid};
use wgqed_core::{G1Matrix, TimeSeries};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::format::Csv;
use crate::output::{OutputDir, OutputFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Mps,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Mps => "mps",
        }
    }
}

/// What one engine produced for a scenario.
#[derive(Debug, Clone)]
pub struct EngineRun {
    pub engine: Engine,
    pub record: EmissionRecord,
    pub g1: Option<G1Matrix>,
    pub state: Option<TimeBinMps>,
    pub max_bond: Option<usize>,
    pub discarded_weight: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residuals {
    /// max_t |N_R + N_L + n_TLS − photons fed in so far|.
    pub conservation_error: f64,
    /// |N_R + N_L + n_TLS − n| at the end of the grid.
    pub final_excitation_error: f64,
    pub peak_n_tls: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_bond: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discarded_weight: Option<f64>,
}

impl EngineRun {
    pub fn residuals(&self) -> Residuals {
        Residuals {
            conservation_error: self.record.conservation_error(),
            final_excitation_error: self.record.final_excitation_error(),
            peak_n_tls: self.record.n_tls.max(),
            max_bond: self.max_bond,
            discarded_weight: self.discarded_weight,
        }
    }
}

/// Runs one engine. The analytic correlator exists for one photon only;
/// `want_g1` is ignored for it otherwise.
pub fn run_engine(
    engine: Engine,
    sc: &Scenario,
    want_g1: bool,
    opts: HierarchyOptions,
) -> wgqed_core::Result<EngineRun> {
    let start = Instant::now();
    let mut run = match engine {
        Engine::Analytic => {
            let record = flux_general_with(&sc.params, &sc.pulse, &sc.grid, opts)?;
            let g1 = if want_g1 && sc.photons() == 1 { Some(g1_qrt(&sc.params, &sc.pulse, &sc.grid)?) } else { None };
            EngineRun { engine, record, g1, state: None, max_bond: None, discarded_weight: None, seconds: 0.0 }
        }
        Engine::Mps => {
            let input = TimeBinMps::build_input(&sc.pulse, &sc.grid, Channels::for_params(&sc.params))?;
            let ev = evolve(input, &sc.params, &sc.policy)?;
            let g1 = if want_g1 { Some(g1_matrix(&ev.state)?) } else { None };
            EngineRun {
                engine,
                record: ev.record,
                g1,
                state: Some(ev.state),
                max_bond: Some(ev.max_bond),
                discarded_weight: Some(ev.discarded_weight),
                seconds: 0.0,
            }
        }
    };
    run.seconds = start.elapsed().as_secs_f64();
    Ok(run)
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub wgqed_core: &'static str,
    pub wgqed_cli: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self { wgqed_core: wgqed_core::VERSION, wgqed_cli: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub gamma_dt: f64,
    pub n_steps: usize,
    pub gamma_t_end: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EngineReport {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Residuals>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiffRow {
    pub quantity: &'static str,
    pub max_abs_error: f64,
    pub rms_error: f64,
}

/// Everything needed to audit and re-run a job. Re-running with the stored
/// `config` reproduces the listed files byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub free_pulse: bool,
    pub config: ScenarioConfig,
    pub versions: Versions,
    pub threads: usize,
    pub wall_time_s: f64,
    pub grid: GridSummary,
    pub engines: BTreeMap<&'static str, EngineReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diff: Vec<DiffRow>,
    pub outputs: Vec<OutputFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Job {
    Simulate,
    Spectra,
}

impl Job {
    pub fn command(self) -> &'static str {
        match self {
            Job::Simulate => "simulate",
            Job::Spectra => "spectra",
        }
    }
}

/// Turns on the outputs a spectra job always emits.
pub fn spectra_outputs(config: &mut ScenarioConfig) {
    config.outputs.spectrum = true;
    config.outputs.intensity = true;
    config.outputs.stationary = true;
}

fn enabled(config: &ScenarioConfig) -> Vec<Engine> {
    let mut e = Vec::new();
    if config.engines.analytic {
        e.push(Engine::Analytic);
    }
    if config.engines.mps {
        e.push(Engine::Mps);
    }
    e
}

fn grid_summary(sc: &Scenario) -> GridSummary {
    GridSummary { gamma_dt: sc.grid.dt(), n_steps: sc.grid.n_steps(), gamma_t_end: sc.grid.t_end() }
}

/// Runs the enabled engines (concurrently) and writes their outputs.
pub fn run_scenario(job: Job, sc: &Scenario, out: &mut OutputDir) -> CliResult<Manifest> {
    let start = Instant::now();
    let config = &sc.config;
    let want_g1 = config.wants_correlations();
    let engines = enabled(config);
    let results: Vec<(Engine, wgqed_core::Result<EngineRun>)> = {
        let (a, b) = rayon::join(
            || engines.contains(&Engine::Analytic).then(|| run_engine(Engine::Analytic, sc, want_g1, HierarchyOptions::default())),
            || engines.contains(&Engine::Mps).then(|| run_engine(Engine::Mps, sc, want_g1, HierarchyOptions::default())),
        );
        [(Engine::Analytic, a), (Engine::Mps, b)].into_iter().filter_map(|(e, r)| r.map(|r| (e, r))).collect()
    };

    let mut reports = BTreeMap::new();
    let mut runs = Vec::new();
    let mut failure = None;
    for (engine, result) in results {
        match result {
            Ok(run) => {
                reports.insert(
                    engine.name(),
                    EngineReport {
                        status: "ok",
                        error: None,
                        wall_time_s: Some(run.seconds),
                        residuals: Some(run.residuals()),
                    },
                );
                runs.push(run);
            }
            Err(e) => {
                reports.insert(
                    engine.name(),
                    EngineReport { status: "failed", error: Some(e.to_string()), wall_time_s: None, residuals: None },
                );
                failure.get_or_insert((engine, e));
            }
        }
    }
    if let Some((engine, source)) = failure {
        #[derive(Serialize)]
        struct ErrorReport<'a> {
            command: &'static str,
            failed_engine: &'static str,
            error: String,
            config: &'a ScenarioConfig,
            engines: &'a BTreeMap<&'static str, EngineReport>,
        }
        out.write_json(
            "error.json",
            &ErrorReport {
                command: job.command(),
                failed_engine: engine.name(),
                error: source.to_string(),
                config,
                engines: &reports,
            },
        )?;
        return Err(CliError::Engine { engine: engine.name(), source });
    }

    for run in &runs {
        write_engine_outputs(sc, run.engine.name(), run, out)?;
    }
    let diff = if runs.len() == 2 { diff_rows(&runs[0].record, &runs[1].record) } else { Vec::new() };
    if !diff.is_empty() {
        let mut csv = Csv::new(&["quantity", "max_abs_error", "rms_error"]);
        for d in &diff {
            csv.row_mixed(&[d.quantity], &[d.max_abs_error, d.rms_error]);
        }
        out.write_csv("diff_summary.csv", csv)?;
    }
    if config.mps.checkpoint {
        if let Some(state) = runs.iter().find_map(|r| r.state.as_ref()) {
            let mut bytes = Vec::new();
            write_checkpoint(state, &mut bytes).map_err(|source| CliError::Engine { engine: "mps", source })?;
            out.write_bytes("mps_state.bin", &bytes, None)?;
        }
    }
    if job == Job::Spectra {
        out.write_bytes(crate::plot::SCRIPT_NAME, crate::plot::script().as_bytes(), None)?;
    }
    Ok(Manifest {
        command: job.command(),
        free_pulse: false,
        config: config.clone(),
        versions: Versions::current(),
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        grid: grid_summary(sc),
        engines: reports,
        diff,
        outputs: out.files().to_vec(),
    })
}

/// Spectra of the pulse alone, without an emitter in the guide.
pub fn run_free_pulse(sc: &Scenario, out: &mut OutputDir) -> CliResult<Manifest> {
    let start = Instant::now();
    let g1 = g1_free_pulse(&sc.pulse, &sc.grid);
    write_spectra(sc, "free", &g1, |w| sc.pulse.envelope_spectrum(w), out)?;
    out.write_bytes(crate::plot::SCRIPT_NAME, crate::plot::script().as_bytes(), None)?;
    Ok(Manifest {
        command: Job::Spectra.command(),
        free_pulse: true,
        config: sc.config.clone(),
        versions: Versions::current(),
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        grid: grid_summary(sc),
        engines: BTreeMap::new(),
        diff: Vec::new(),
        outputs: out.files().to_vec(),
    })
}

fn write_engine_outputs(sc: &Scenario, label: &str, run: &EngineRun, out: &mut OutputDir) -> CliResult<()> {
    let o = &sc.config.outputs;
    let r = &run.record;
    if o.population {
        let mut csv = Csv::new(&["gamma_t", "n_tls", "photons_r", "photons_l", "photons_in"]);
        for k in 0..r.n_tls.len() {
            csv.row(&[r.n_tls.time(k), r.n_tls.values[k], r.cum_r.values[k], r.cum_l.values[k], r.cum_in.values[k]]);
        }
        out.write_csv(&format!("population_{label}.csv"), csv)?;
    }
    if o.flux {
        let mut csv = Csv::new(&["gamma_t", "flux_r", "flux_l"]);
        for k in 0..r.flux_r.len() {
            csv.row(&[r.flux_r.time(k), r.flux_r.values[k], r.flux_l.values[k]]);
        }
        out.write_csv(&format!("flux_{label}.csv"), csv)?;
    }
    if let Some(g1) = &run.g1 {
        if o.g1 {
            write_g1(g1, o.stride, &format!("g1_{label}.csv"), out)?;
        }
        let closed = |w: f64| if sc.photons() == 1 { stationary_spectrum(&sc.params, &sc.pulse, w) } else { f64::NAN };
        write_spectra(sc, label, g1, closed, out)?;
    }
    Ok(())
}

fn write_g1(g1: &G1Matrix, stride: usize, name: &str, out: &mut OutputDir) -> CliResult<()> {
    let grid = g1.grid();
    let n = g1.n();
    let mut csv = Csv::new(&["gamma_t", "gamma_tau", "g1_re", "g1_im"]);
    let mut rows: Vec<usize> = (0..n).step_by(stride).collect();
    if rows.last() != Some(&(n - 1)) {
        rows.push(n - 1);
    }
    for i in rows {
        let t = g1.stamp().time(grid, i);
        for (j, v) in g1.row(i).iter().enumerate().step_by(stride) {
            csv.row(&[t, j as f64 * grid.dt(), v.re, v.im]);
        }
    }
    out.write_csv(name, csv)
}

fn spectrogram_csv(grid: &SpectrogramGrid, column: &str) -> Csv {
    let mut csv = Csv::new(&["gamma_t", "omega_minus_wp_over_gamma", column]);
    for (ti, &t) in grid.times.iter().enumerate() {
        for (w, v) in grid.omegas.iter().zip(grid.time_row(ti)) {
            csv.row(&[t, *w, *v]);
        }
    }
    csv
}

fn write_spectra(
    sc: &Scenario,
    label: &str,
    g1: &G1Matrix,
    closed_form: impl Fn(f64) -> f64,
    out: &mut OutputDir,
) -> CliResult<()> {
    let o = &sc.config.outputs;
    let engine_err = |source| CliError::Engine { engine: "spectra", source };
    if o.spectrum || o.intensity {
        let (s, i) = spectrum_and_intensity(g1, &sc.omegas, o.stride).map_err(engine_err)?;
        if o.spectrum {
            out.write_csv(&format!("spectrum_{label}.csv"), spectrogram_csv(&s, "s"))?;
        }
        if o.intensity {
            out.write_csv(&format!("intensity_{label}.csv"), spectrogram_csv(&i, "i"))?;
        }
    }
    if o.stationary {
        let s = long_time_spectrum(g1, &sc.omegas).map_err(engine_err)?;
        let mut csv = Csv::new(&["omega_minus_wp_over_gamma", "s", "input_spectrum", "closed_form"]);
        for (&w, v) in sc.omegas.iter().zip(&s) {
            csv.row(&[w, *v, sc.pulse.envelope_spectrum(w), closed_form(w)]);
        }
        out.write_csv(&format!("stationary_{label}.csv"), csv)?;
    }
    Ok(())
}

fn series_diff(quantity: &'static str, a: &TimeSeries, b: &TimeSeries) -> DiffRow {
    let n = a.len().min(b.len()).max(1);
    let (mut max, mut sq) = (0.0f64, 0.0);
    for (x, y) in a.values.iter().zip(&b.values) {
        let d = (x - y).abs();
        max = max.max(d);
        sq += d * d;
    }
    DiffRow { quantity, max_abs_error: max, rms_error: (sq / n as f64).sqrt() }
}

/// Engine differences on quantities both engines report at the bin ends.
/// Fluxes are left out: the two engines stamp them half a bin apart.
pub fn diff_rows(a: &EmissionRecord, b: &EmissionRecord) -> Vec<DiffRow> {
    vec![
        series_diff("n_tls", &a.n_tls, &b.n_tls),
        series_diff("photons_r", &a.cum_r, &b.cum_r),
        series_diff("photons_l", &a.cum_l, &b.cum_l),
    ]
}
