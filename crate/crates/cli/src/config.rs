//! Scenario files: TOML with strict keys, resolved and validated before any
//! engine runs. All quantities are in units of the total decay rate γ.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wgqed_core::mps::TruncationPolicy;
use wgqed_core::spectra::uniform_omegas;
use wgqed_core::{CouplingKind, EmitterParams, PulseShape, PulseSpec, TimeGrid};

use crate::error::{CliError, CliResult};

/// Largest t-axis for which the (t, τ) correlation triangle is materialised.
pub const MAX_G1_STEPS: usize = 8000;
/// Default grid extension past the pulse support.
pub const DEFAULT_TAIL: f64 = 15.0;
const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Analytic,
    Mps,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Chiral,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Rect,
    Gaussian,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSection {
    pub kind: Kind,
    #[serde(default)]
    pub delta_over_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub shape: Shape,
    /// Rect duration or Gaussian width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_tp: Option<f64>,
    /// Gaussian centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_tc: Option<f64>,
    pub photons: u32,
    /// Sampled envelope, one value per grid bin from t = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_dt")]
    pub gamma_dt: f64,
    /// Defaults to the end of the pulse support plus 15/γ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_tmax: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnginesSection {
    #[serde(default = "yes")]
    pub analytic: bool,
    #[serde(default = "yes")]
    pub mps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpsSection {
    #[serde(default = "default_cutoff")]
    pub svd_cutoff: f64,
    #[serde(default = "default_max_bond")]
    pub max_bond: usize,
    /// Write the final chain as a binary checkpoint.
    #[serde(default)]
    pub checkpoint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "yes")]
    pub population: bool,
    #[serde(default = "yes")]
    pub flux: bool,
    #[serde(default)]
    pub g1: bool,
    #[serde(default)]
    pub spectrum: bool,
    #[serde(default)]
    pub intensity: bool,
    #[serde(default)]
    pub stationary: bool,
    /// Row stride for the (t, τ) and (t, ω) grids written to disk.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraSection {
    #[serde(default = "default_omega_min")]
    pub omega_min: f64,
    #[serde(default = "default_omega_max")]
    pub omega_max: f64,
    #[serde(default = "default_n_omega")]
    pub n_omega: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub gamma_tp: Vec<f64>,
    #[serde(default = "default_sweep_photons")]
    pub photons: Vec<u32>,
    /// Time simulated past the end of each pulse.
    #[serde(default = "default_sweep_tail")]
    pub gamma_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub emitter: EmitterSection,
    pub pulse: PulseSection,
    #[serde(default = "GridSection::default_section")]
    pub grid: GridSection,
    #[serde(default = "EnginesSection::default_section")]
    pub engines: EnginesSection,
    #[serde(default = "MpsSection::default_section")]
    pub mps: MpsSection,
    #[serde(default = "OutputsSection::default_section")]
    pub outputs: OutputsSection,
    #[serde(default = "SpectraSection::default_section")]
    pub spectra: SpectraSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn yes() -> bool {
    true
}
fn default_dt() -> f64 {
    0.005
}
fn default_cutoff() -> f64 {
    1e-12
}
fn default_max_bond() -> usize {
    64
}
fn default_stride() -> usize {
    10
}
fn default_omega_min() -> f64 {
    -10.0
}
fn default_omega_max() -> f64 {
    10.0
}
fn default_n_omega() -> usize {
    401
}
fn default_sweep_photons() -> Vec<u32> {
    vec![1, 2]
}
fn default_sweep_tail() -> f64 {
    2.0
}

impl GridSection {
    fn default_section() -> Self {
        Self { gamma_dt: default_dt(), gamma_tmax: None }
    }
}
impl EnginesSection {
    fn default_section() -> Self {
        Self { analytic: true, mps: true }
    }
}
impl MpsSection {
    fn default_section() -> Self {
        Self { svd_cutoff: default_cutoff(), max_bond: default_max_bond(), checkpoint: false }
    }
}
impl OutputsSection {
    fn default_section() -> Self {
        Self {
            population: true,
            flux: true,
            g1: false,
            spectrum: false,
            intensity: false,
            stationary: false,
            stride: default_stride(),
        }
    }
}
impl SpectraSection {
    fn default_section() -> Self {
        Self { omega_min: default_omega_min(), omega_max: default_omega_max(), n_omega: default_n_omega() }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn core(e: wgqed_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    /// Reads a TOML scenario, or the resolved scenario stored in a run
    /// manifest (`*.json`).
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
            let config = value.get("config").ok_or_else(|| bad("manifest has no `config` entry"))?;
            serde_json::from_value(config.clone()).map_err(|e| bad(e.to_string()))
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn apply_engine(&mut self, choice: EngineChoice) {
        self.engines.analytic = matches!(choice, EngineChoice::Analytic | EngineChoice::Both);
        self.engines.mps = matches!(choice, EngineChoice::Mps | EngineChoice::Both);
    }

    pub fn wants_correlations(&self) -> bool {
        let o = &self.outputs;
        o.g1 || o.spectrum || o.intensity || o.stationary
    }

    /// Checks every field and builds the engine inputs. The returned
    /// scenario carries a copy of `self` with all defaults filled in.
    pub fn validate(&self) -> CliResult<Scenario> {
        let dt = self.grid.gamma_dt;
        if !(dt > 0.0 && dt <= 0.05) {
            return Err(bad(format!("grid.gamma_dt must lie in (0, 0.05], got {dt}")));
        }
        let photons = self.pulse.photons;
        if !(1..=2).contains(&photons) {
            return Err(bad(format!("pulse.photons must be 1 or 2, got {photons}")));
        }
        let delta = self.emitter.delta_over_gamma;
        if !delta.is_finite() {
            return Err(bad("emitter.delta_over_gamma must be finite"));
        }
        let kind = match self.emitter.kind {
            Kind::Chiral => CouplingKind::Chiral,
            Kind::Symmetric => CouplingKind::Symmetric,
        };
        let params = kind.params(1.0, delta).map_err(core)?;
        // a sweep supplies its own durations; the first one stands in for the base pulse
        let base_tp = self.pulse.gamma_tp.or_else(|| self.sweep.as_ref().and_then(|s| s.gamma_tp.first().copied()));
        let pulse = self.build_pulse(base_tp, dt)?;

        let support = pulse.support_end();
        let t_max = self.grid.gamma_tmax.unwrap_or(support + DEFAULT_TAIL);
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(bad(format!("grid.gamma_tmax must be positive, got {t_max}")));
        }
        if t_max < support * (1.0 - 1e-12) {
            return Err(bad(format!("grid.gamma_tmax = {t_max} ends before the pulse support ({support})")));
        }
        if t_max / dt > MAX_STEPS as f64 {
            return Err(bad(format!("grid has more than {MAX_STEPS} steps")));
        }
        let grid = TimeGrid::covering(dt, t_max).map_err(core)?;

        if !self.engines.analytic && !self.engines.mps {
            return Err(bad("at least one engine must be enabled"));
        }
        if self.engines.analytic && delta != 0.0 {
            return Err(bad("the analytic engine is resonant only; set delta_over_gamma = 0 or use the mps engine"));
        }
        let policy = TruncationPolicy { svd_cutoff: self.mps.svd_cutoff, max_bond: self.mps.max_bond };
        if self.engines.mps {
            policy.validate().map_err(core)?;
            if policy.max_bond < photons as usize + 1 {
                return Err(bad(format!("mps.max_bond must be >= {} for {photons} photon(s)", photons + 1)));
            }
        }

        let o = &self.outputs;
        if o.stride == 0 {
            return Err(bad("outputs.stride must be >= 1"));
        }
        if self.wants_correlations() {
            if photons == 2 && !self.engines.mps {
                return Err(bad("two-photon correlations and spectra need the mps engine"));
            }
            if grid.n_steps() > MAX_G1_STEPS {
                return Err(bad(format!(
                    "correlation outputs are limited to {MAX_G1_STEPS} time steps, the grid has {}",
                    grid.n_steps()
                )));
            }
        }
        let s = &self.spectra;
        if s.n_omega == 0 || !(s.omega_min.is_finite() && s.omega_max.is_finite()) || s.omega_min > s.omega_max {
            return Err(bad("spectra: need n_omega >= 1 and finite omega_min <= omega_max"));
        }
        if let Some(sweep) = &self.sweep {
            self.validate_sweep(sweep)?;
        }

        let mut resolved = self.clone();
        resolved.grid.gamma_tmax = Some(grid.t_end());
        if resolved.pulse.shape != Shape::Sampled {
            resolved.pulse.gamma_tp = base_tp;
        }
        Ok(Scenario {
            config: resolved,
            params,
            pulse,
            grid,
            policy,
            omegas: uniform_omegas(s.omega_min, s.omega_max, s.n_omega),
        })
    }

    /// Pulse from the config with an optional replacement duration.
    pub fn build_pulse(&self, tp: Option<f64>, dt: f64) -> CliResult<PulseSpec> {
        let p = &self.pulse;
        let pulse = match p.shape {
            Shape::Rect => {
                let tp = tp.ok_or_else(|| bad("rect pulses need pulse.gamma_tp"))?;
                let pulse = PulseSpec::rect(tp, p.photons).map_err(core)?;
                let bins = tp / dt;
                if (bins - bins.round()).abs() > 1e-9 * bins.max(1.0) {
                    return Err(bad(format!("rect gamma_tp = {tp} must be a whole number of gamma_dt = {dt} steps")));
                }
                pulse
            }
            Shape::Gaussian => {
                let tp = tp.ok_or_else(|| bad("gaussian pulses need pulse.gamma_tp (width)"))?;
                let tc = p.gamma_tc.ok_or_else(|| bad("gaussian pulses need pulse.gamma_tc (centre)"))?;
                PulseSpec::gaussian(tc, tp, p.photons).map_err(core)?
            }
            Shape::Sampled => {
                let values = p.samples.clone().ok_or_else(|| bad("sampled pulses need pulse.samples"))?;
                if values.is_empty() {
                    return Err(bad("pulse.samples is empty"));
                }
                let grid = TimeGrid::new(dt, values.len()).map_err(core)?;
                PulseSpec::sampled(grid, values, p.photons).map_err(core)?
            }
        };
        Ok(pulse)
    }

    fn validate_sweep(&self, sweep: &SweepSection) -> CliResult<()> {
        if self.pulse.shape != Shape::Rect {
            return Err(bad("sweeps vary the duration of rect pulses; set pulse.shape = \"rect\""));
        }
        if sweep.gamma_tp.is_empty() {
            return Err(bad("sweep.gamma_tp is empty"));
        }
        if sweep.photons.is_empty() || sweep.photons.iter().any(|n| !(1..=2).contains(n)) {
            return Err(bad("sweep.photons must be a nonempty subset of [1, 2]"));
        }
        if !(sweep.gamma_tail.is_finite() && sweep.gamma_tail >= 0.0) {
            return Err(bad("sweep.gamma_tail must be >= 0"));
        }
        for &tp in &sweep.gamma_tp {
            if !(tp.is_finite() && tp > 0.0) {
                return Err(bad(format!("sweep.gamma_tp entries must be positive, got {tp}")));
            }
            self.build_pulse(Some(tp), self.grid.gamma_dt)?;
        }
        Ok(())
    }
}

/// A validated scenario, ready for the engines.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub params: EmitterParams,
    pub pulse: PulseSpec,
    pub grid: TimeGrid,
    pub policy: TruncationPolicy,
    pub omegas: Vec<f64>,
}

impl Scenario {
    pub fn photons(&self) -> u32 {
        self.pulse.photons()
    }

    pub fn is_rect(&self) -> bool {
        matches!(self.pulse.shape(), PulseShape::Rect { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[emitter]
kind = "chiral"

[pulse]
shape = "rect"
gamma_tp = 2.0
photons = 1
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ScenarioConfig::from_toml(BASE).unwrap();
        let s = c.validate().unwrap();
        assert_eq!(s.grid.dt(), 0.005);
        assert_eq!(s.grid.n_steps(), 3400);
        assert_eq!(s.config.grid.gamma_tmax, Some(17.0));
        assert!(c.engines.analytic && c.engines.mps);
        assert_eq!(s.omegas.len(), 401);
    }

    #[test]
    fn unknown_keys_are_fatal() {
        let text = format!("{BASE}\n[grid]\ngamma_dt = 0.01\nstep = 3\n");
        assert!(matches!(ScenarioConfig::from_toml(&text), Err(CliError::Config(_))));
        let text = BASE.replace("kind =", "flavour = \"x\"\nkind =");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn range_checks() {
        let check = |extra: &str| ScenarioConfig::from_toml(&format!("{BASE}{extra}")).and_then(|c| c.validate().map(|_| ()));
        assert!(check("\n[grid]\ngamma_dt = 0.06\n").is_err());
        assert!(check("\n[grid]\ngamma_dt = 0.0\n").is_err());
        assert!(check("\n[grid]\ngamma_dt = 0.05\n").is_ok());
        assert!(check("\n[grid]\ngamma_dt = 0.003\n").is_err(), "2/0.003 is not whole");
        assert!(check("\n[grid]\ngamma_dt = 0.01\ngamma_tmax = 1.0\n").is_err());
        assert!(check("\n[engines]\nanalytic = false\nmps = false\n").is_err());
        assert!(check("\n[mps]\nmax_bond = 1\n").is_err());
        assert!(check("\n[outputs]\nstride = 0\n").is_err());
        assert!(check("\n[outputs]\nspectrum = true\n").is_ok());
        assert!(check("\n[outputs]\nspectrum = true\n[grid]\ngamma_dt = 0.001\ngamma_tmax = 10.0\n").is_err());
        let three = BASE.replace("photons = 1", "photons = 3");
        assert!(ScenarioConfig::from_toml(&three).unwrap().validate().is_err());
    }

    #[test]
    fn detuning_needs_the_mps_engine() {
        let text = BASE.replace("kind = \"chiral\"", "kind = \"symmetric\"\ndelta_over_gamma = 0.5");
        let mut c = ScenarioConfig::from_toml(&text).unwrap();
        assert!(c.validate().is_err());
        c.apply_engine(EngineChoice::Mps);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn sampled_pulses() {
        let text = "[emitter]\nkind = \"chiral\"\n[pulse]\nshape = \"sampled\"\nphotons = 1\nsamples = [0.0, 0.0, 0.0]\n[grid]\ngamma_dt = 0.01\n";
        assert!(matches!(ScenarioConfig::from_toml(text).unwrap().validate(), Err(CliError::Config(_))));
        let ok = text.replace("[0.0, 0.0, 0.0]", "[1.0, 2.0, 1.0]");
        let s = ScenarioConfig::from_toml(&ok).unwrap().validate().unwrap();
        assert!((s.grid.t_end() - 15.03).abs() < 1e-9);
    }

    #[test]
    fn two_photon_spectra_need_mps() {
        let text = BASE.replace("photons = 1", "photons = 2");
        let mut c = ScenarioConfig::from_toml(&format!("{text}\n[outputs]\nstationary = true\n")).unwrap();
        c.apply_engine(EngineChoice::Analytic);
        assert!(c.validate().is_err());
        c.apply_engine(EngineChoice::Both);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn sweep_section() {
        let text = format!("{BASE}\n[sweep]\ngamma_tp = [10.0, 60.0]\n");
        let c = ScenarioConfig::from_toml(&text).unwrap();
        assert!(c.validate().is_ok());
        assert_eq!(c.sweep.as_ref().unwrap().photons, vec![1, 2]);
        let bad = format!("{BASE}\n[sweep]\ngamma_tp = []\n");
        assert!(ScenarioConfig::from_toml(&bad).unwrap().validate().is_err());
    }

    #[test]
    fn resolved_config_round_trips_through_json() {
        let s = ScenarioConfig::from_toml(BASE).unwrap().validate().unwrap();
        let json = serde_json::to_string(&s.config).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s.config);
        assert_eq!(back.validate().unwrap().grid, s.grid);
    }
}
