//! Built-in verification suite: physical identities and cross-engine checks
//! that every correct build must satisfy.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use wgqed_core::analytic::{flux_chiral_rect, flux_general_with, g1_qrt, pop_1photon_rect, EmissionRecord, HierarchyOptions};
use wgqed_core::mps::{evolve, g1_matrix, Channels, TimeBinMps, TruncationPolicy};
use wgqed_core::spectra::{integrate_intensity, spectrum_and_intensity, uniform_omegas};
use wgqed_core::{CouplingKind, EmitterParams, PulseSpec, TimeGrid};

use crate::config::Scenario;
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;
use crate::run::{diff_rows, run_engine, Engine, Versions};

/// Suite time step and pulse.
const DT: f64 = 0.005;
const TP: f64 = 2.0;
const TAIL: f64 = 15.0;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub versions: Versions,
    pub inject_drive_sign_flip: bool,
    pub wall_time_s: f64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

fn at_most(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> Check {
    Check { name: name.into(), value, tolerance, passed: value <= tolerance, detail: detail.into() }
}

fn failed(name: impl Into<String>, error: impl ToString) -> Check {
    Check { name: name.into(), value: f64::NAN, tolerance: f64::NAN, passed: false, detail: error.to_string() }
}

fn max_abs(a: impl Iterator<Item = f64>) -> f64 {
    a.fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

struct Suite {
    opts: HierarchyOptions,
}

type Res<T> = wgqed_core::Result<T>;

impl Suite {
    fn analytic(&self, params: &EmitterParams, pulse: &PulseSpec, grid: &TimeGrid) -> Res<EmissionRecord> {
        flux_general_with(params, pulse, grid, self.opts)
    }

    fn mps(&self, params: &EmitterParams, pulse: &PulseSpec, grid: &TimeGrid) -> Res<EmissionRecord> {
        let input = TimeBinMps::build_input(pulse, grid, Channels::for_params(params))?;
        Ok(evolve(input, params, &TruncationPolicy::default())?.record)
    }

    fn record(&self, engine: Engine, params: &EmitterParams, pulse: &PulseSpec, grid: &TimeGrid) -> Res<EmissionRecord> {
        match engine {
            Engine::Analytic => self.analytic(params, pulse, grid),
            Engine::Mps => self.mps(params, pulse, grid),
        }
    }

    /// N_R + N_L + n_TLS against the photons fed in, at every time and at the end.
    fn conservation(&self) -> Vec<Check> {
        let cases: Vec<(CouplingKind, u32, Engine)> = [CouplingKind::Chiral, CouplingKind::Symmetric]
            .into_iter()
            .flat_map(|k| [1, 2].into_iter().flat_map(move |n| [Engine::Analytic, Engine::Mps].map(|e| (k, n, e))))
            .collect();
        cases
            .par_iter()
            .map(|&(kind, n, engine)| {
                let name = format!("conservation/{}/n{n}/{}", kind.name(), engine.name());
                let run = || -> Res<Check> {
                    let pulse = PulseSpec::rect(TP, n)?;
                    let grid = TimeGrid::covering(DT, TP + TAIL)?;
                    let rec = self.record(engine, &kind.params(1.0, 0.0)?, &pulse, &grid)?;
                    let (running, last) = (rec.conservation_error(), rec.final_excitation_error());
                    Ok(at_most(
                        &name,
                        running.max(last),
                        1e-3,
                        format!("max running error {running:.2e}, |N_R + N_L + n_TLS − {n}| at t_end = {last:.2e}"),
                    ))
                };
                run().unwrap_or_else(|e| failed(&name, e))
            })
            .collect()
    }

    /// Symmetric one-photon population is half the chiral one.
    fn factor_two(&self) -> Vec<Check> {
        [Engine::Analytic, Engine::Mps]
            .par_iter()
            .map(|&engine| {
                let name = format!("factor_two/{}", engine.name());
                let run = || -> Res<Check> {
                    let pulse = PulseSpec::rect(TP, 1)?;
                    let grid = TimeGrid::covering(DT, TP + TAIL)?;
                    let sym = self.record(engine, &EmitterParams::symmetric(), &pulse, &grid)?;
                    let (chiral, tol): (Vec<f64>, f64) = match engine {
                        // against the chiral closed form; RK4 error alone is ~1e-10
                        Engine::Analytic => (
                            grid.times().map(|t| pop_1photon_rect(CouplingKind::Chiral, TP, t)).collect::<Res<_>>()?,
                            1e-6,
                        ),
                        Engine::Mps => (self.mps(&EmitterParams::chiral(), &pulse, &grid)?.n_tls.values, 2e-3),
                    };
                    let d = max_abs(sym.n_tls.values.iter().zip(&chiral).map(|(s, c)| s - c / 2.0));
                    Ok(at_most(&name, d, tol, "max |n_sym − n_chiral/2|"))
                };
                run().unwrap_or_else(|e| failed(&name, e))
            })
            .collect()
    }

    /// Transmitted flux of the hierarchy against its closed form, and its integral.
    fn flux_integral(&self) -> Vec<Check> {
        let run = || -> Res<Vec<Check>> {
            let pulse = PulseSpec::rect(TP, 1)?;
            let grid = TimeGrid::covering(DT, TP + TAIL)?;
            let rec = self.analytic(&EmitterParams::chiral(), &pulse, &grid)?;
            let mut pointwise = 0.0f64;
            for (t, v) in rec.flux_r.iter() {
                pointwise = pointwise.max((v - flux_chiral_rect(TP, t)?).abs());
            }
            let total = rec.cum_r.last();
            Ok(vec![
                at_most("flux/closed_form", pointwise, 1e-6, "max |flux_R − closed form|, chiral rect"),
                at_most("flux/integral", (total - 1.0).abs(), 1e-6, format!("∫flux_R dt = {total:.9}")),
            ])
        };
        run().unwrap_or_else(|e| vec![failed("flux", e)])
    }

    /// G¹(t, t) is the emitted flux.
    fn g1_diagonal(&self) -> Vec<Check> {
        let pulse = PulseSpec::rect(TP, 1).expect("valid pulse");
        let params = EmitterParams::chiral();
        let grid = TimeGrid::covering(DT, 8.0).expect("valid grid");
        let analytic = || -> Res<Check> {
            let g = g1_qrt(&params, &pulse, &grid)?;
            let rec = self.analytic(&params, &pulse, &grid)?;
            let d = max_abs(rec.flux_r.values.iter().enumerate().map(|(k, f)| g.get(k, 0).re - f));
            Ok(at_most("g1_diagonal/analytic", d, 1e-6, "max |G¹(t,t) − flux_R(t)|"))
        };
        let mps = || -> Res<Check> {
            let input = TimeBinMps::build_input(&pulse, &grid, Channels::Right)?;
            let ev = evolve(input, &params, &TruncationPolicy::default())?;
            let g = g1_matrix(&ev.state)?;
            let d = max_abs(ev.record.flux_r.values.iter().enumerate().map(|(k, f)| g.get(k, 0).re - f));
            Ok(at_most("g1_diagonal/mps", d, 1e-9, "max |G¹(t,t) − flux_R(t)|"))
        };
        vec![
            analytic().unwrap_or_else(|e| failed("g1_diagonal/analytic", e)),
            mps().unwrap_or_else(|e| failed("g1_diagonal/mps", e)),
        ]
    }

    /// Σ_t I(ω, t) Δt equals S(ω, t_end).
    fn intensity_integral(&self) -> Check {
        let run = || -> Res<Check> {
            let pulse = PulseSpec::rect(TP, 1)?;
            let grid = TimeGrid::covering(DT, 8.0)?;
            let g = g1_qrt(&EmitterParams::symmetric(), &pulse, &grid)?;
            let (s, i) = spectrum_and_intensity(&g, &uniform_omegas(-5.0, 5.0, 41), 1)?;
            let integral = integrate_intensity(&i, &grid)?;
            let scale = s.max();
            let d = max_abs(integral.iter().zip(s.last_row()).map(|(a, b)| a - b)) / scale;
            Ok(at_most("intensity_integral", d, 1e-9, "max |∫I dt − S(t_end)| / max S"))
        };
        run().unwrap_or_else(|e| failed("intensity_integral", e))
    }

    /// MPS against the hierarchy at Δt and 2Δt; the collision model is first order.
    fn cross_engine(&self) -> Vec<Check> {
        let errors: Vec<Res<f64>> = [DT, 2.0 * DT]
            .par_iter()
            .map(|&dt| {
                let pulse = PulseSpec::rect(TP, 1)?;
                let grid = TimeGrid::covering(dt, TP + TAIL)?;
                let params = EmitterParams::chiral();
                let a = self.analytic(&params, &pulse, &grid)?;
                let m = self.mps(&params, &pulse, &grid)?;
                Ok(diff_rows(&a, &m)[0].max_abs_error)
            })
            .collect();
        match (&errors[0], &errors[1]) {
            (Ok(e1), Ok(e2)) => {
                let ratio = e2 / e1;
                vec![
                    at_most("cross_engine/dt", *e1, 2e-3, format!("max |Δn_TLS| at dt = {DT}")),
                    at_most("cross_engine/2dt", *e2, 4e-3, format!("max |Δn_TLS| at dt = {}", 2.0 * DT)),
                    Check {
                        name: "cross_engine/order".into(),
                        value: ratio,
                        tolerance: 0.5,
                        passed: (ratio - 2.0).abs() <= 0.5,
                        detail: "error ratio when dt doubles; first order gives 2 ± 0.5".into(),
                    },
                ]
            }
            (Err(e), _) | (_, Err(e)) => vec![failed("cross_engine", e)],
        }
    }

    /// Peak ratio of two- and one-photon excitation.
    fn r21(&self) -> Vec<Check> {
        let ratio = |tp: f64, dt: f64| -> Res<f64> {
            let grid = TimeGrid::covering(dt, tp + 2.0)?;
            let params = EmitterParams::chiral();
            let one = self.analytic(&params, &PulseSpec::rect(tp, 1)?, &grid)?.n_tls.max();
            let two = self.analytic(&params, &PulseSpec::rect(tp, 2)?, &grid)?.n_tls.max();
            Ok(two / one)
        };
        let long = match ratio(200.0, 0.05) {
            Ok(r) => at_most("r21/tp200", (r / 2.0 - 1.0).abs(), 0.05, format!("R21 = {r:.4}, within 5% of 2")),
            Err(e) => failed("r21/tp200", e),
        };
        let short = match ratio(TP, DT) {
            Ok(r) => Check {
                name: "r21/tp2".into(),
                value: r,
                tolerance: 2.0,
                passed: r < 2.0,
                detail: format!("R21 = {r:.4}, strictly below 2"),
            },
            Err(e) => failed("r21/tp2", e),
        };
        vec![long, short]
    }
}

/// Conservation and, with both engines, agreement for a user scenario.
fn scenario_checks(sc: &Scenario, opts: HierarchyOptions) -> Vec<Check> {
    let mut engines = Vec::new();
    if sc.config.engines.analytic {
        engines.push(Engine::Analytic);
    }
    if sc.config.engines.mps {
        engines.push(Engine::Mps);
    }
    let runs: Vec<_> = engines.par_iter().map(|&e| (e, run_engine(e, sc, false, opts))).collect();
    let mut checks = Vec::new();
    let mut records = Vec::new();
    for (engine, run) in runs {
        let name = format!("scenario/conservation/{}", engine.name());
        match run {
            Ok(run) => {
                let running = run.record.conservation_error();
                checks.push(at_most(&name, running, 1e-3, "max |N_R + N_L + n_TLS − photons fed in|"));
                records.push(run.record);
            }
            Err(e) => checks.push(failed(&name, e)),
        }
    }
    if let [a, b] = records.as_slice() {
        let d = diff_rows(a, b)[0].max_abs_error;
        checks.push(at_most("scenario/cross_engine", d, 2e-3, "max |Δn_TLS| between engines"));
    }
    checks
}

/// Runs the suite (plus `scenario`, if given), prints one line per check and
/// writes `verify_report.json`.
pub fn run_verify(scenario: Option<&Scenario>, inject_drive_sign_flip: bool, out: &OutputDir) -> CliResult<VerifyReport> {
    let start = Instant::now();
    let opts = HierarchyOptions { flip_population_drive: inject_drive_sign_flip };
    let suite = Suite { opts };
    let mut checks = Vec::new();
    checks.extend(suite.conservation());
    checks.extend(suite.factor_two());
    checks.extend(suite.flux_integral());
    checks.extend(suite.g1_diagonal());
    checks.push(suite.intensity_integral());
    checks.extend(suite.cross_engine());
    checks.extend(suite.r21());
    if let Some(sc) = scenario {
        checks.extend(scenario_checks(sc, opts));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!(
            "{} {:<34} {:>11.3e}  (tol {:.1e})  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance,
            c.detail
        );
    }
    let report = VerifyReport {
        versions: Versions::current(),
        inject_drive_sign_flip,
        wall_time_s: start.elapsed().as_secs_f64(),
        passed: checks.len() - failed,
        failed,
        checks,
    };
    out.write_json("verify_report.json", &report)?;
    println!("{} passed, {} failed", report.passed, report.failed);
    if failed > 0 {
        return Err(CliError::VerificationFailed { count: failed });
    }
    Ok(report)
}
