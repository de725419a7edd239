//! Time-dependent spectra from a first-order correlation triangle.
//!
//! With Δ = ω − ω_p and the triangle G(t_i, t_i + τ_j):
//!
//! ```text
//! S(ω, t) = (1/π) Re ∫_0^t dt' ∫_0^{t−t'} dτ G(t', t'+τ) e^{iΔτ}
//! I(ω, t) = (1/π) Re ∫_0^∞ dτ G(t, t+τ) e^{iΔτ}
//! ```
//!
//! The 1/π makes S(ω, ∞) integrate to the photon number over ω; for a
//! transparent emitter it equals |f(ω)|².
//!
//! Quadrature: bins along t', trapezoid along τ (half weight at τ = 0).
//! The triangular domain {t' + τ ≤ t_n} is swept by anti-diagonals, so
//! S(ω, t_n) − S(ω, t_{n−1}) is one anti-diagonal sum. With this weighting
//! S(ω, t_n) = (Δt²/2π) v†Kv for the Hermitian kernel K restricted to the
//! first n+1 bins and v_i = e^{iΔt_i}, hence S ≥ 0 whenever K is positive.
//! I is the row sum with the same weights, so Σ_i I(ω, t_i)Δt = S(ω, t_end)
//! holds exactly on the grid.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::model::{G1Matrix, TimeGrid};

/// A real quantity sampled on (time × frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramGrid {
    /// ω − ω_p in units of γ.
    pub omegas: Vec<f64>,
    pub times: Vec<f64>,
    /// Row-major: `data[t_index * omegas.len() + omega_index]`.
    pub data: Vec<f64>,
}

impl SpectrogramGrid {
    pub fn get(&self, ti: usize, wi: usize) -> f64 {
        self.data[ti * self.omegas.len() + wi]
    }

    pub fn time_row(&self, ti: usize) -> &[f64] {
        let w = self.omegas.len();
        &self.data[ti * w..(ti + 1) * w]
    }

    pub fn omega_column(&self, wi: usize) -> Vec<f64> {
        (0..self.times.len()).map(|ti| self.get(ti, wi)).collect()
    }

    /// The row at the last time.
    pub fn last_row(&self) -> &[f64] {
        self.time_row(self.times.len() - 1)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `n` evenly spaced points on [lo, hi].
pub fn uniform_omegas(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// 401 points on [−10γ, 10γ].
pub fn default_omegas() -> Vec<f64> {
    uniform_omegas(-10.0, 10.0, 401)
}

/// Row indices kept at output stride `stride`: 0, stride, 2·stride, … and
/// always the last row.
fn strided(n: usize, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
    if idx.last() != Some(&(n - 1)) {
        idx.push(n - 1);
    }
    idx
}

fn check(g1: &G1Matrix, omegas: &[f64]) -> Result<()> {
    if omegas.is_empty() {
        return Err(invalid("omegas", "at least one frequency is required"));
    }
    if omegas.iter().any(|w| !w.is_finite()) {
        return Err(invalid("omegas", "frequencies must be finite"));
    }
    if g1.n() == 0 {
        return Err(Error::GridMismatch("empty correlation triangle".into()));
    }
    Ok(())
}

/// Per-frequency sums over the triangle: anti-diagonal sums H_m and row sums R_i.
struct Sums {
    anti: Vec<C64>,
    rows: Vec<C64>,
}

fn sums(g1: &G1Matrix, omega: f64) -> Sums {
    let n = g1.n();
    let dt = g1.grid().dt();
    let phase: Vec<C64> = (0..n).map(|j| C64::from_polar(1.0, omega * j as f64 * dt)).collect();
    let mut anti = vec![C64::new(0.0, 0.0); n];
    let mut rows = vec![C64::new(0.0, 0.0); n];
    for (i, r) in rows.iter_mut().enumerate() {
        let row = g1.row(i);
        let mut acc = -0.5 * row[0];
        for (j, (g, ph)) in row.iter().zip(&phase).enumerate() {
            let v = g * ph;
            anti[i + j] += v;
            acc += v;
        }
        anti[i] -= 0.5 * row[0];
        *r = acc;
    }
    Sums { anti, rows }
}

/// Both S(ω, t) and I(ω, t) from a single pass over the triangle per ω.
///
/// S carries an extra leading row at t = 0 (where it vanishes); both are
/// then reported at the stamp times of rows 0, stride, 2·stride, … and the
/// last row.
pub fn spectrum_and_intensity(
    g1: &G1Matrix,
    omegas: &[f64],
    stride: usize,
) -> Result<(SpectrogramGrid, SpectrogramGrid)> {
    check(g1, omegas)?;
    let n = g1.n();
    let grid = *g1.grid();
    let dt = grid.dt();
    let keep = strided(n, stride);
    let columns: Vec<(Vec<f64>, Vec<f64>)> = omegas
        .par_iter()
        .map(|&w| {
            let Sums { anti, rows } = sums(g1, w);
            let mut s_col = Vec::with_capacity(keep.len() + 1);
            s_col.push(0.0);
            let mut acc = 0.0;
            let mut next = 0;
            for (m, h) in anti.iter().enumerate() {
                acc += dt * dt / PI * h.re;
                if keep.get(next) == Some(&m) {
                    s_col.push(acc);
                    next += 1;
                }
            }
            let i_col = keep.iter().map(|&i| dt / PI * rows[i].re).collect();
            (s_col, i_col)
        })
        .collect();
    let times: Vec<f64> = keep.iter().map(|&i| g1.stamp().time(&grid, i)).collect();
    let mut s_times = vec![0.0];
    s_times.extend(&times);
    let width = omegas.len();
    let mut s_data = vec![0.0; s_times.len() * width];
    let mut i_data = vec![0.0; times.len() * width];
    for (wi, (s_col, i_col)) in columns.iter().enumerate() {
        for (ti, v) in s_col.iter().enumerate() {
            s_data[ti * width + wi] = *v;
        }
        for (ti, v) in i_col.iter().enumerate() {
            i_data[ti * width + wi] = *v;
        }
    }
    let s = SpectrogramGrid {
        omegas: omegas.to_vec(),
        data: s_data,
        times: s_times,
    };
    let i = SpectrogramGrid {
        omegas: omegas.to_vec(),
        data: i_data,
        times,
    };
    Ok((s, i))
}

/// S(ω, t) at every grid time (plus t = 0).
pub fn time_dependent_spectrum(g1: &G1Matrix, omegas: &[f64]) -> Result<SpectrogramGrid> {
    Ok(spectrum_and_intensity(g1, omegas, 1)?.0)
}

/// I(ω, t) at every grid time. The τ integral is cut at the end of the grid.
pub fn spectral_intensity(g1: &G1Matrix, omegas: &[f64]) -> Result<SpectrogramGrid> {
    Ok(spectrum_and_intensity(g1, omegas, 1)?.1)
}

/// S(ω, t_end), the long-time spectrum.
pub fn long_time_spectrum(g1: &G1Matrix, omegas: &[f64]) -> Result<Vec<f64>> {
    check(g1, omegas)?;
    let dt = g1.grid().dt();
    // only the τ-profile H(τ) = Σ_t g1(t, τ) matters once t runs to the end
    let mut h = vec![C64::new(0.0, 0.0); g1.n()];
    for i in 0..g1.n() {
        for (acc, g) in h.iter_mut().zip(g1.row(i)) {
            *acc += g;
        }
    }
    h[0] *= 0.5;
    Ok(omegas
        .par_iter()
        .map(|&w| {
            let s: f64 = h.iter().enumerate().map(|(j, v)| (v * C64::from_polar(1.0, w * j as f64 * dt)).re).sum();
            dt * dt / PI * s
        })
        .collect())
}

/// ∫ I(ω, t) dt over the run, per ω, by the rectangle rule on the bins.
pub fn integrate_intensity(intensity: &SpectrogramGrid, grid: &TimeGrid) -> Result<Vec<f64>> {
    if intensity.times.len() != grid.n_steps() {
        return Err(Error::GridMismatch(format!(
            "intensity has {} rows, grid {} bins (use stride 1)",
            intensity.times.len(),
            grid.n_steps()
        )));
    }
    let w = intensity.omegas.len();
    Ok((0..w).map(|wi| intensity.omega_column(wi).iter().sum::<f64>() * grid.dt()).collect())
}

/// Free-decay value of I after the pulse: g1(t, 0) Re[1/(γ/2 − iΔ)] / π.
pub fn free_decay_intensity(flux: f64, gamma: f64, omega: f64) -> f64 {
    let z = C64::new(gamma / 2.0, -omega);
    flux * (1.0 / z).re / PI
}

/// sqrt(mean((a − b)²)) / max|b|.
pub fn relative_rms(a: &[f64], reference: &[f64]) -> f64 {
    assert_eq!(a.len(), reference.len());
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ms = a.iter().zip(reference).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64;
    ms.sqrt() / scale
}

/// ∫ s(ω) dω by the trapezoid rule on a uniform or non-uniform grid.
pub fn integrate_over_omega(omegas: &[f64], s: &[f64]) -> f64 {
    omegas.windows(2).zip(s.windows(2)).map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1])).sum()
}

/// Full width at half maximum of the lobe containing the global maximum,
/// with linear interpolation of the crossings. `None` if a crossing lies
/// outside the sampled range.
pub fn central_lobe_fwhm(omegas: &[f64], s: &[f64]) -> Option<f64> {
    let (peak, &top) = s.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let half = top / 2.0;
    let cross = |a: usize, b: usize| {
        let t = (half - s[a]) / (s[b] - s[a]);
        omegas[a] + t * (omegas[b] - omegas[a])
    };
    let mut l = peak;
    while l > 0 && s[l - 1] >= half {
        l -= 1;
    }
    if l == 0 {
        return None;
    }
    let mut r = peak;
    while r + 1 < s.len() && s[r + 1] >= half {
        r += 1;
    }
    if r + 1 == s.len() {
        return None;
    }
    Some(cross(r, r + 1) - cross(l - 1, l))
}

/// Interior local minima (strictly below both neighbours) with |ω| ≤ `window`.
pub fn local_minima(omegas: &[f64], s: &[f64], window: f64) -> Vec<usize> {
    (1..s.len().saturating_sub(1))
        .filter(|&k| omegas[k].abs() <= window && s[k] < s[k - 1] && s[k] < s[k + 1])
        .collect()
}
