//! Closed ODE hierarchy for an emitter driven by an n-photon Fock pulse.
//!
//! Level k (k = 1..n) tracks the emitter population n_k and coherence s_k
//! conditioned on k photons remaining in the pulse:
//!
//! ```text
//! ds_k/dt = −(γ/2) s_k − √(k γ_R) f (1 − 2 n_{k−1})
//! dn_k/dt = −γ n_k − √(k γ_R) (f* s_k + f s_k*)        n_0 ≡ 0
//! ```
//!
//! The hierarchy only closes on resonance, so δ ≠ 0 is rejected.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{CouplingKind, EmitterParams, PulseSpec, TimeGrid};

/// Knobs that are not physics parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HierarchyOptions {
    /// Flips the sign of the drive term in the population equations. This
    /// deliberately breaks the model and is only used to check that the
    /// verification suite notices.
    pub flip_population_drive: bool,
}

/// Level-resolved solution sampled at the bin ends t(k) = (k+1)·dt.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyHistory {
    grid: TimeGrid,
    photons: u32,
    // populations[level - 1][k]
    populations: Vec<Vec<f64>>,
    coherences: Vec<Vec<C64>>,
    // running ∫flux_R, ∫flux_L and photons fed in, integrated alongside
    pub(crate) counts: [Vec<f64>; 3],
}

impl HierarchyHistory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    /// n_k at the bin ends, for `level` in 1..=photons.
    pub fn population(&self, level: u32) -> &[f64] {
        &self.populations[level as usize - 1]
    }

    pub fn coherence(&self, level: u32) -> &[C64] {
        &self.coherences[level as usize - 1]
    }

    /// Population for the actual photon number of the pulse.
    pub fn emitter_population(&self) -> &[f64] {
        self.population(self.photons)
    }

    pub fn emitter_coherence(&self) -> &[C64] {
        self.coherence(self.photons)
    }
}

/// Flat state: for each level (n_k, Re s_k, Im s_k), followed by the
/// running counts (N_R, N_L, N_in) of the top level. The counts are part of
/// the RK4 state so that N_R + N_L + n_TLS = N_in holds to rounding.
#[derive(Clone)]
pub(crate) struct Hierarchy {
    half: f64,
    gamma: f64,
    gamma_r: f64,
    gamma_l: f64,
    drive: Vec<f64>,
    sign: f64,
}

impl Hierarchy {
    pub(crate) fn new(params: &EmitterParams, photons: u32, opts: HierarchyOptions) -> Result<Self> {
        if params.delta() != 0.0 {
            return Err(Error::NonZeroDetuning(params.delta()));
        }
        if !(1..=2).contains(&photons) {
            return Err(Error::UnsupportedPhotonNumber(photons));
        }
        let gr = params.gamma_r();
        Ok(Self {
            half: params.total_rate() / 2.0,
            gamma: params.total_rate(),
            gamma_r: gr,
            gamma_l: params.gamma_l(),
            drive: (1..=photons).map(|k| (k as f64 * gr).sqrt()).collect(),
            sign: if opts.flip_population_drive { -1.0 } else { 1.0 },
        })
    }

    pub(crate) fn levels(&self) -> usize {
        self.drive.len()
    }

    pub(crate) fn state_len(&self) -> usize {
        3 * self.levels() + 3
    }

    fn rhs(&self, f: f64, y: &[f64], out: &mut [f64]) {
        let mut prev_n = 0.0;
        for (k, g) in self.drive.iter().enumerate() {
            let (n, sr, si) = (y[3 * k], y[3 * k + 1], y[3 * k + 2]);
            // f real: f* s + f s* = 2 f Re s
            out[3 * k] = -self.gamma * n - self.sign * g * 2.0 * f * sr;
            out[3 * k + 1] = -self.half * sr - g * f * (1.0 - 2.0 * prev_n);
            out[3 * k + 2] = -self.half * si;
            prev_n = n;
        }
        let top = 3 * (self.levels() - 1);
        let photons = self.levels() as f64;
        let (n, sr) = (y[top], y[top + 1]);
        let c = 3 * self.levels();
        out[c] = photons * f * f + 2.0 * self.drive[self.levels() - 1] * f * sr + self.gamma_r * n;
        out[c + 1] = self.gamma_l * n;
        out[c + 2] = photons * f * f;
    }

    /// One RK4 step of length `h` with envelope values at the start (right
    /// limit), midpoint and end (left limit) of the step. Using one-sided
    /// limits keeps steps that end exactly on a pulse edge exact.
    pub(crate) fn step(&self, y: &mut [f64], h: f64, f: [f64; 3]) {
        let m = y.len();
        let mut k1 = vec![0.0; m];
        let mut k2 = vec![0.0; m];
        let mut k3 = vec![0.0; m];
        let mut k4 = vec![0.0; m];
        let mut tmp = vec![0.0; m];
        self.rhs(f[0], y, &mut k1);
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        self.rhs(f[1], &tmp, &mut k2);
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        self.rhs(f[1], &tmp, &mut k3);
        for i in 0..m {
            tmp[i] = y[i] + h * k3[i];
        }
        self.rhs(f[2], &tmp, &mut k4);
        for i in 0..m {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Envelope values (start⁺, midpoint, end⁻) for the step (a, a + h].
pub(crate) fn stage_values(pulse: &PulseSpec, a: f64, h: f64) -> [f64; 3] {
    [pulse.envelope_right(a), pulse.envelope(a + 0.5 * h), pulse.envelope_left(a + h)]
}

/// Integrates the hierarchy over `grid` with fixed-step RK4 (one step per bin).
pub fn hierarchy_integrate(params: &EmitterParams, pulse: &PulseSpec, grid: &TimeGrid) -> Result<HierarchyHistory> {
    hierarchy_integrate_with(params, pulse, grid, HierarchyOptions::default())
}

pub fn hierarchy_integrate_with(
    params: &EmitterParams,
    pulse: &PulseSpec,
    grid: &TimeGrid,
    opts: HierarchyOptions,
) -> Result<HierarchyHistory> {
    let photons = pulse.photons();
    let h = Hierarchy::new(params, photons, opts)?;
    let levels = h.levels();
    let n = grid.n_steps();
    let dt = grid.dt();
    let mut populations = vec![Vec::with_capacity(n); levels];
    let mut coherences = vec![Vec::with_capacity(n); levels];
    let mut counts = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut y = vec![0.0; h.state_len()];
    for k in 0..n {
        h.step(&mut y, dt, stage_values(pulse, grid.bin_start(k), dt));
        for l in 0..levels {
            populations[l].push(y[3 * l]);
            coherences[l].push(C64::new(y[3 * l + 1], y[3 * l + 2]));
        }
        for (c, v) in counts.iter_mut().zip(&y[3 * levels..]) {
            c.push(*v);
        }
    }
    Ok(HierarchyHistory { grid: *grid, photons, populations, coherences, counts })
}

/// Emitter population for a two-photon top-hat pulse of length `tp` at time `t`.
///
/// There is no usable closed form, so the hierarchy is integrated to
/// min(t, t_p) with a step of at most 2e-3; after the pulse the emitter
/// decays freely.
pub fn pop_2photon_rect(kind: CouplingKind, tp: f64, t: f64) -> Result<f64> {
    let pulse = PulseSpec::rect(tp, 2)?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let params = kind.params(1.0, 0.0)?;
    let until = t.min(tp);
    let steps = (until / 2e-3).ceil().max(1.0) as usize;
    let grid = TimeGrid::new(until / steps as f64, steps)?;
    let h = Hierarchy::new(&params, 2, HierarchyOptions::default())?;
    let mut y = vec![0.0; h.state_len()];
    for k in 0..steps {
        h.step(&mut y, grid.dt(), stage_values(&pulse, grid.bin_start(k), grid.dt()));
    }
    Ok(y[3] * (-(t - until) * params.total_rate()).exp())
}
