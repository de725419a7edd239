//! Domain types shared by every engine: emitter couplings, pulse envelopes,
//! the uniform time-bin grid and the sampled observables living on it.
//!
//! Units: the total decay rate and the group velocity are both 1, so times
//! are in units of 1/γ and frequencies (detunings, ω − ω_p) in units of γ.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

/// Relative tolerance used when deciding on which side of a pulse edge a
/// grid time falls. Grid times are products `k * dt` and land a few ulps
/// away from edges that are exact multiples of `dt`.
const EDGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingKind {
    /// γ_R = γ, γ_L = 0.
    Chiral,
    /// γ_R = γ_L = γ/2.
    Symmetric,
}

impl CouplingKind {
    pub fn params(self, gamma: f64, delta: f64) -> Result<EmitterParams> {
        match self {
            CouplingKind::Chiral => EmitterParams::new(gamma, 0.0, delta),
            CouplingKind::Symmetric => EmitterParams::new(gamma / 2.0, gamma / 2.0, delta),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CouplingKind::Chiral => "chiral",
            CouplingKind::Symmetric => "symmetric",
        }
    }
}

/// Emitter decay rates into the right- and left-moving channels, and the
/// emitter–pulse detuning δ = ω_a − ω_p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterParams {
    gamma_r: f64,
    gamma_l: f64,
    delta: f64,
}

impl EmitterParams {
    pub fn new(gamma_r: f64, gamma_l: f64, delta: f64) -> Result<Self> {
        if !(gamma_r.is_finite() && gamma_r >= 0.0) {
            return Err(invalid("gamma_R", format!("must be finite and >= 0, got {gamma_r}")));
        }
        if !(gamma_l.is_finite() && gamma_l >= 0.0) {
            return Err(invalid("gamma_L", format!("must be finite and >= 0, got {gamma_l}")));
        }
        if gamma_r + gamma_l <= 0.0 {
            return Err(invalid("gamma_R + gamma_L", "total decay rate must be positive"));
        }
        if !delta.is_finite() {
            return Err(invalid("delta", "must be finite"));
        }
        Ok(Self { gamma_r, gamma_l, delta })
    }

    pub fn chiral() -> Self {
        Self { gamma_r: 1.0, gamma_l: 0.0, delta: 0.0 }
    }

    pub fn symmetric() -> Self {
        Self { gamma_r: 0.5, gamma_l: 0.5, delta: 0.0 }
    }

    pub fn with_detuning(self, delta: f64) -> Result<Self> {
        Self::new(self.gamma_r, self.gamma_l, delta)
    }

    pub fn gamma_r(&self) -> f64 {
        self.gamma_r
    }

    pub fn gamma_l(&self) -> f64 {
        self.gamma_l
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// γ = γ_R + γ_L.
    pub fn total_rate(&self) -> f64 {
        self.gamma_r + self.gamma_l
    }

    /// The preset this coupling corresponds to, if any.
    pub fn kind(&self) -> Option<CouplingKind> {
        let g = self.total_rate();
        if self.gamma_l == 0.0 {
            Some(CouplingKind::Chiral)
        } else if (self.gamma_r - self.gamma_l).abs() <= 1e-14 * g {
            Some(CouplingKind::Symmetric)
        } else {
            None
        }
    }
}

/// Temporal envelope of the input pulse.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// Top hat of length `tp`, supported on (0, tp].
    Rect { tp: f64 },
    /// Gaussian centred at `tc` with width `tp`, truncated to t > 0.
    Gaussian { tc: f64, tp: f64 },
    /// Piecewise-constant samples: `values[k]` holds on (k·dt, (k+1)·dt].
    Sampled { grid: TimeGrid, values: Vec<f64> },
}

/// A normalised n-photon Fock pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    shape: PulseShape,
    photons: u32,
    // multiplies the raw shape so that ∫|f|² dt = 1
    amplitude: f64,
}

fn check_photons(photons: u32) -> Result<()> {
    match photons {
        1 | 2 => Ok(()),
        n => Err(Error::UnsupportedPhotonNumber(n)),
    }
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {x}")))
    }
}

impl PulseSpec {
    pub fn rect(tp: f64, photons: u32) -> Result<Self> {
        check_positive("t_p", tp)?;
        check_photons(photons)?;
        Ok(Self { shape: PulseShape::Rect { tp }, photons, amplitude: 1.0 / tp.sqrt() })
    }

    /// Gaussian `exp(-(t - tc)² / 2 tp²)` on t > 0, renormalised by quadrature.
    pub fn gaussian(tc: f64, tp: f64, photons: u32) -> Result<Self> {
        check_positive("t_p", tp)?;
        check_photons(photons)?;
        if !tc.is_finite() {
            return Err(invalid("t_c", "must be finite"));
        }
        let end = tc + 12.0 * tp;
        if end <= 0.0 {
            return Err(Error::Unnormalizable(format!(
                "gaussian centred at {tc} with width {tp} has no weight at t > 0"
            )));
        }
        let raw = |t: f64| (-(t - tc).powi(2) / (2.0 * tp * tp)).exp();
        let norm = simpson(|t| raw(t).powi(2), 0.0, end, 200_000);
        if !(norm > 1e-300) {
            return Err(Error::Unnormalizable("gaussian weight on t > 0 underflows".into()));
        }
        Ok(Self { shape: PulseShape::Gaussian { tc, tp }, photons, amplitude: 1.0 / norm.sqrt() })
    }

    /// Piecewise-constant envelope on `grid`, rescaled to unit norm.
    pub fn sampled(grid: TimeGrid, values: Vec<f64>, photons: u32) -> Result<Self> {
        check_photons(photons)?;
        if values.len() != grid.n_steps() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} bins",
                values.len(),
                grid.n_steps()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Unnormalizable("non-finite sample".into()));
        }
        let norm: f64 = values.iter().map(|v| v * v).sum::<f64>() * grid.dt();
        if !(norm > 0.0) {
            return Err(Error::Unnormalizable("all samples are zero".into()));
        }
        Ok(Self { shape: PulseShape::Sampled { grid, values }, photons, amplitude: 1.0 / norm.sqrt() })
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    /// Same envelope carrying a different photon number.
    pub fn with_photons(&self, photons: u32) -> Result<Self> {
        check_photons(photons)?;
        Ok(Self { photons, ..self.clone() })
    }

    /// Time after which the envelope is zero (rect, sampled) or below
    /// e^{-32} of its peak (Gaussian, at t_c + 8 t_p).
    pub fn support_end(&self) -> f64 {
        match &self.shape {
            PulseShape::Rect { tp } => *tp,
            PulseShape::Gaussian { tc, tp } => (tc + 8.0 * tp).max(0.0),
            PulseShape::Sampled { grid, .. } => grid.t_end(),
        }
    }

    /// True when the envelope vanishes identically after `support_end`.
    pub fn has_compact_support(&self) -> bool {
        !matches!(self.shape, PulseShape::Gaussian { .. })
    }

    /// f(t). Rect and sampled envelopes are left-continuous (half-open bins).
    pub fn envelope(&self, t: f64) -> f64 {
        self.eval(t, Side::Left)
    }

    /// lim_{s→t⁺} f(s).
    pub fn envelope_right(&self, t: f64) -> f64 {
        self.eval(t, Side::Right)
    }

    /// lim_{s→t⁻} f(s).
    pub fn envelope_left(&self, t: f64) -> f64 {
        self.eval(t, Side::Left)
    }

    fn eval(&self, t: f64, side: Side) -> f64 {
        match &self.shape {
            PulseShape::Rect { tp } => {
                let inside = match side {
                    Side::Left => t > EDGE_TOL && t <= tp * (1.0 + EDGE_TOL),
                    Side::Right => t >= -EDGE_TOL && t < tp * (1.0 - EDGE_TOL),
                };
                if inside {
                    self.amplitude
                } else {
                    0.0
                }
            }
            PulseShape::Gaussian { tc, tp } => {
                let positive = match side {
                    Side::Left => t > 0.0,
                    Side::Right => t >= 0.0,
                };
                if positive {
                    self.amplitude * (-(t - tc).powi(2) / (2.0 * tp * tp)).exp()
                } else {
                    0.0
                }
            }
            PulseShape::Sampled { grid, values } => {
                let x = t / grid.dt();
                let k = match side {
                    Side::Left => (x - EDGE_TOL * x.abs().max(1.0)).ceil() - 1.0,
                    Side::Right => (x + EDGE_TOL * x.abs().max(1.0)).floor(),
                };
                if k >= 0.0 && (k as usize) < values.len() {
                    self.amplitude * values[k as usize]
                } else {
                    0.0
                }
            }
        }
    }

    /// |f(ω)|² with f(ω) = (2π)^{-1/2} ∫ f(t) e^{iωt} dt, so that
    /// ∫ |f(ω)|² dω = 1.
    pub fn envelope_spectrum(&self, omega: f64) -> f64 {
        match &self.shape {
            PulseShape::Rect { tp } => {
                let s = sinc(omega * tp / 2.0);
                tp * s * s / (2.0 * PI)
            }
            PulseShape::Gaussian { tc, tp } => {
                let end = tc + 12.0 * tp;
                let span = end.max(1e-12);
                // resolve the oscillation: ~0.05 rad per panel, at least 2000 panels
                let panels = ((span * omega.abs() / 0.05).ceil() as usize).clamp(2000, 2_000_000);
                let re = simpson(|t| self.envelope(t) * (omega * t).cos(), 0.0, end, panels);
                let im = simpson(|t| self.envelope(t) * (omega * t).sin(), 0.0, end, panels);
                (re * re + im * im) / (2.0 * PI)
            }
            PulseShape::Sampled { grid, values } => {
                let dt = grid.dt();
                let mut acc = C64::new(0.0, 0.0);
                for (k, v) in values.iter().enumerate() {
                    let a = k as f64 * dt;
                    // ∫_a^{a+dt} e^{iωt} dt = e^{iω(a+dt/2)} dt sinc(ω dt / 2)
                    let phase = C64::from_polar(1.0, omega * (a + dt / 2.0));
                    acc += phase * (v * dt * sinc(omega * dt / 2.0));
                }
                self.amplitude * self.amplitude * acc.norm_sqr() / (2.0 * PI)
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Composite Simpson rule with `panels` (rounded up to even) intervals.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Uniform discretisation into `n_steps` bins of width `dt`. Bin k covers
/// (k·dt, (k+1)·dt] and its nominal time is t(k) = (k+1)·dt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        check_positive("dt", dt)?;
        if n_steps == 0 {
            return Err(invalid("n_steps", "must be >= 1"));
        }
        Ok(Self { dt, n_steps })
    }

    /// Smallest grid with step `dt` reaching `t_end`.
    pub fn covering(dt: f64, t_end: f64) -> Result<Self> {
        check_positive("dt", dt)?;
        check_positive("t_end", t_end)?;
        let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
        Self::new(dt, n)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn time(&self, k: usize) -> f64 {
        (k + 1) as f64 * self.dt
    }

    pub fn bin_start(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_steps).map(move |k| self.time(k))
    }
}

/// Where within bin k a sampled value is located.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stamp {
    /// t = (k+1)·dt: emitter observables read after the k-th interaction.
    BinEnd,
    /// t = (k+½)·dt: outgoing time-bin observables.
    BinCenter,
}

impl Stamp {
    pub fn time(self, grid: &TimeGrid, k: usize) -> f64 {
        match self {
            Stamp::BinEnd => grid.time(k),
            Stamp::BinCenter => grid.bin_center(k),
        }
    }
}

/// One sample per bin of `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T = f64> {
    pub grid: TimeGrid,
    pub stamp: Stamp,
    pub values: Vec<T>,
    pub label: String,
}

impl<T: Copy> TimeSeries<T> {
    pub fn new(grid: TimeGrid, stamp: Stamp, values: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.n_steps() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} bins",
                values.len(),
                grid.n_steps()
            )));
        }
        Ok(Self { grid, stamp, values, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.stamp.time(&self.grid, k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, T)> + '_ {
        self.values.iter().enumerate().map(move |(k, v)| (self.time(k), *v))
    }
}

impl TimeSeries<f64> {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("time series is never empty")
    }
}

/// First-order correlation v_g⟨a_R†(t_i) a_R(t_i + τ_j)⟩ on the τ ≥ 0
/// triangle: `get(i, j)` exists for j < n_steps − i, with τ_j = j·dt.
#[derive(Debug, Clone, PartialEq)]
pub struct G1Matrix {
    grid: TimeGrid,
    stamp: Stamp,
    data: Vec<C64>,
}

fn row_offset(n: usize, i: usize) -> usize {
    // rows have lengths n, n-1, ..., so row i starts after Σ_{r<i} (n - r)
    i * n - i * i.saturating_sub(1) / 2
}

impl G1Matrix {
    pub fn zeros(grid: TimeGrid, stamp: Stamp) -> Self {
        let n = grid.n_steps();
        Self { grid, stamp, data: vec![C64::new(0.0, 0.0); n * (n + 1) / 2] }
    }

    /// Builds the triangle row by row; `fill(i, row)` writes row i in place.
    pub fn from_rows(grid: TimeGrid, stamp: Stamp, fill: impl Fn(usize, &mut [C64]) + Sync) -> Self {
        use rayon::prelude::*;
        let mut m = Self::zeros(grid, stamp);
        let n = grid.n_steps();
        let mut rows: Vec<&mut [C64]> = Vec::with_capacity(n);
        let mut rest: &mut [C64] = &mut m.data;
        for i in 0..n {
            let (head, tail) = rest.split_at_mut(n - i);
            rows.push(head);
            rest = tail;
        }
        rows.into_par_iter().enumerate().for_each(|(i, row)| fill(i, row));
        m
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn stamp(&self) -> Stamp {
        self.stamp
    }

    pub fn n(&self) -> usize {
        self.grid.n_steps()
    }

    pub fn row(&self, i: usize) -> &[C64] {
        let n = self.n();
        let start = row_offset(n, i);
        &self.data[start..start + (n - i)]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        let n = self.n();
        let start = row_offset(n, i);
        &mut self.data[start..start + (n - i)]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.row(i)[j]
    }

    /// Hermitian two-time kernel K(t_a, t_b) on the full square.
    pub fn kernel(&self, a: usize, b: usize) -> C64 {
        if b >= a {
            self.get(a, b - a)
        } else {
            self.get(b, a - b).conj()
        }
    }

    /// The τ = 0 diagonal (a photon flux).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, 0).re).collect()
    }

    /// Entrywise maximum |a − b| over the triangle.
    pub fn max_abs_diff(&self, other: &G1Matrix) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::GridMismatch(format!("{} vs {} bins", self.n(), other.n())));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}
