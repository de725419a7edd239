//! Two-time correlation of the transmitted field via the quantum regression
//! theorem, for one-photon pulses of arbitrary shape.
//!
//! With a_R(t) = f(t) + √γ_R σ⁻(t) acting on |1⟩ the correlation splits into
//!
//! ```text
//! C1 = f(t) f(t+τ)               C2 = √γ_R f(t) s(t+τ)
//! C3 = √γ_R s*(t) f(t+τ)          C4 = γ_R c(τ)
//! ```
//!
//! where c(τ) = ⟨σ⁺(t) σ⁻(t+τ)⟩ obeys
//! dc/dτ = −(γ/2) c − √γ_R f(t+τ) s*(t) with c(0) = n(t).

use num_complex::Complex64 as C64;

use crate::analytic::closed_form::G1Terms;
use crate::analytic::hierarchy::{hierarchy_integrate, stage_values};
use crate::error::{invalid, Error, Result};
use crate::model::{EmitterParams, G1Matrix, PulseSpec, Stamp, TimeGrid};

/// G¹(t_i, t_i + τ_j) on the grid, stamped at the bin ends.
pub fn g1_qrt(params: &EmitterParams, pulse: &PulseSpec, grid: &TimeGrid) -> Result<G1Matrix> {
    g1_qrt_terms(params, pulse, grid, G1Terms::ALL)
}

/// As [`g1_qrt`], keeping only the selected terms. Dropping C4 gives a
/// kernel that is no longer positive and yields negative spectra.
pub fn g1_qrt_terms(params: &EmitterParams, pulse: &PulseSpec, grid: &TimeGrid, terms: G1Terms) -> Result<G1Matrix> {
    if pulse.photons() != 1 {
        return Err(invalid(
            "photons",
            format!("regression-theorem correlator handles one-photon pulses, got {}", pulse.photons()),
        ));
    }
    if params.delta() != 0.0 {
        return Err(Error::NonZeroDetuning(params.delta()));
    }
    let hist = hierarchy_integrate(params, pulse, grid)?;
    let pop = hist.emitter_population();
    let coh = hist.emitter_coherence();
    let n = grid.n_steps();
    let dt = grid.dt();
    let sg = params.gamma_r().sqrt();
    let kappa = params.total_rate() / 2.0;
    let [w1, w2, w3, w4] = terms.weights();

    let f: Vec<f64> = (0..n).map(|k| pulse.envelope(grid.time(k))).collect();

    // One RK4 step of the linear c-equation over bin b is the affine map
    // c ← P c + Q_b K with K = √γ_R s*(t). P is shared by every bin.
    let rk4 = |c: C64, g: [f64; 3], k: C64| {
        let rhs = |c: C64, f: f64| -kappa * c - k * f;
        let k1 = rhs(c, g[0]);
        let k2 = rhs(c + 0.5 * dt * k1, g[1]);
        let k3 = rhs(c + 0.5 * dt * k2, g[1]);
        let k4 = rhs(c + dt * k3, g[2]);
        c + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let p = rk4(one, [0.0; 3], zero);
    let q: Vec<C64> = (0..n).map(|b| rk4(zero, stage_values(pulse, grid.bin_start(b), dt), one)).collect();

    Ok(G1Matrix::from_rows(*grid, Stamp::BinEnd, |i, row| {
        let si = coh[i];
        let k = sg * si.conj();
        let mut c = C64::new(pop[i], 0.0);
        for (j, out) in row.iter_mut().enumerate() {
            let l = i + j;
            if j > 0 {
                c = p * c + q[l] * k;
            }
            let v = w1 * f[i] * f[l]
                + w2 * sg * f[i] * coh[l]
                + w3 * sg * si.conj() * f[l]
                + w4 * params.gamma_r() * c;
            *out = v;
        }
    }))
}

/// n f(t) f(t+τ): the correlation of the pulse travelling without an emitter.
pub fn g1_free_pulse(pulse: &PulseSpec, grid: &TimeGrid) -> G1Matrix {
    let n = pulse.photons() as f64;
    let f: Vec<f64> = (0..grid.n_steps()).map(|k| pulse.envelope(grid.time(k))).collect();
    G1Matrix::from_rows(*grid, Stamp::BinEnd, |i, row| {
        for (j, out) in row.iter_mut().enumerate() {
            *out = C64::new(n * f[i] * f[i + j], 0.0);
        }
    })
}
