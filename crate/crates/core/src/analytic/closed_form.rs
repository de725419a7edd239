//! Closed-form results for a one-photon top-hat pulse on resonance (γ = 1).

use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};
use crate::model::{CouplingKind, EmitterParams, PulseSpec};

const EDGE_TOL: f64 = 1e-12;

fn check_tp(tp: f64) -> Result<()> {
    if tp.is_finite() && tp > 0.0 {
        Ok(())
    } else {
        Err(invalid("t_p", format!("must be finite and > 0, got {tp}")))
    }
}

fn kind_scale(kind: CouplingKind) -> f64 {
    match kind {
        CouplingKind::Chiral => 1.0,
        CouplingKind::Symmetric => 0.5,
    }
}

fn within_pulse(t: f64, tp: f64) -> bool {
    t <= tp * (1.0 + EDGE_TOL)
}

/// Emitter population ⟨1,g|σ⁺σ⁻(t)|1,g⟩ for a top-hat pulse of length `tp`.
///
/// Chiral: (4/t_p)(e^{-t/2} − 1)² during the pulse, then free e^{-t} decay.
/// The symmetric emitter sees half the drive power and reaches exactly half
/// the chiral population.
pub fn pop_1photon_rect(kind: CouplingKind, tp: f64, t: f64) -> Result<f64> {
    check_tp(tp)?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let chiral = if within_pulse(t, tp) {
        4.0 / tp * ((-t / 2.0).exp() - 1.0).powi(2)
    } else {
        4.0 / tp * (tp / 2.0).exp_m1().powi(2) * (-t).exp()
    };
    Ok(kind_scale(kind) * chiral)
}

/// Coherence ⟨0,g|σ⁻(t)|1,g⟩. After the pulse it decays as e^{-(t − t_p)/2}.
pub fn coherence_1photon_rect(kind: CouplingKind, tp: f64, t: f64) -> Result<f64> {
    check_tp(tp)?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let chiral = if within_pulse(t, tp) {
        2.0 / tp.sqrt() * (-t / 2.0).exp_m1()
    } else {
        2.0 / tp.sqrt() * (-tp / 2.0).exp_m1() * (-(t - tp) / 2.0).exp()
    };
    Ok(kind_scale(kind).sqrt() * chiral)
}

/// Transmitted flux v_g⟨a_R†a_R⟩(t) behind a chiral emitter.
pub fn flux_chiral_rect(tp: f64, t: f64) -> Result<f64> {
    check_tp(tp)?;
    if t < 0.0 {
        return Ok(0.0);
    }
    let x = (-t / 2.0).exp_m1();
    Ok(if within_pulse(t, tp) {
        1.0 / tp + 4.0 / tp * x + 4.0 / tp * x * x
    } else {
        4.0 / tp * (tp / 2.0).exp_m1().powi(2) * (-t).exp()
    })
}

/// Selects which of the four parts of G¹ = C1 + C2 + C3 + C4 to keep:
/// C1 is the free pulse, C2/C3 the pulse–emitter cross terms and C4 the
/// emitter (population) term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct G1Terms {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub c4: bool,
}

impl G1Terms {
    pub const ALL: G1Terms = G1Terms { c1: true, c2: true, c3: true, c4: true };
    pub const WITHOUT_POPULATION: G1Terms = G1Terms { c1: true, c2: true, c3: true, c4: false };
    pub const PULSE_ONLY: G1Terms = G1Terms { c1: true, c2: false, c3: false, c4: false };

    pub(crate) fn weights(self) -> [f64; 4] {
        [self.c1, self.c2, self.c3, self.c4].map(|b| if b { 1.0 } else { 0.0 })
    }
}

impl Default for G1Terms {
    fn default() -> Self {
        Self::ALL
    }
}

/// The four parts [C1, C2, C3, C4] of v_g⟨a_R†(t) a_R(t+τ)⟩ for a chiral
/// emitter and a one-photon top-hat pulse.
pub fn g1_chiral_rect_parts(tp: f64, t: f64, tau: f64) -> Result<[f64; 4]> {
    check_tp(tp)?;
    if !(tau >= 0.0) {
        return Err(invalid("tau", format!("must be >= 0, got {tau}")));
    }
    if t <= 0.0 {
        return Ok([0.0; 4]);
    }
    let e = f64::exp;
    let s = t + tau;
    let k = 4.0 / tp;
    let parts = if within_pulse(t, tp) {
        if within_pulse(s, tp) {
            [
                1.0 / tp,
                2.0 / tp * (e(-s / 2.0) - 1.0),
                2.0 / tp * (e(-t / 2.0) - 1.0),
                k * (1.0 - e(-t / 2.0) + e(-(t + tau / 2.0)) - e(-s / 2.0)),
            ]
        } else {
            [
                0.0,
                2.0 / tp * (1.0 - e(tp / 2.0)) * e(-s / 2.0),
                0.0,
                k * e(-tau / 2.0)
                    * (-e(tp / 2.0 - t) + e((tp - t) / 2.0) + e(-t) - e(-t / 2.0)),
            ]
        }
    } else {
        [0.0, 0.0, 0.0, k * (tp / 2.0).exp_m1().powi(2) * e(-(t + tau / 2.0))]
    };
    Ok(parts)
}

/// G¹(t, t+τ) for a chiral emitter and a one-photon top-hat pulse. Real on
/// resonance, returned as complex for uniformity with the numerical engines.
pub fn g1_chiral_rect(tp: f64, t: f64, tau: f64) -> Result<C64> {
    g1_chiral_rect_terms(tp, t, tau, G1Terms::ALL)
}

pub fn g1_chiral_rect_terms(tp: f64, t: f64, tau: f64, terms: G1Terms) -> Result<C64> {
    let p = g1_chiral_rect_parts(tp, t, tau)?;
    let w = terms.weights();
    Ok(C64::new(p.iter().zip(w).map(|(a, b)| a * b).sum(), 0.0))
}

/// Long-time transmitted spectrum for a single photon.
///
/// Uses the one-photon transmission |t(ω)|² = ((γ/2 − γ_R)² + (ω−δ)²) /
/// ((γ/2)² + (ω−δ)²): unity for a chiral emitter, and
/// 1 − (γ²/4)/((ω−δ)² + γ²/4) for a symmetric one. The photon number of
/// `pulse` is ignored.
pub fn stationary_spectrum(params: &EmitterParams, pulse: &PulseSpec, omega: f64) -> f64 {
    let half = params.total_rate() / 2.0;
    let detuning = omega - params.delta();
    let d2 = detuning * detuning;
    let transmission = ((half - params.gamma_r()).powi(2) + d2) / (half * half + d2);
    pulse.envelope_spectrum(omega) * transmission
}
