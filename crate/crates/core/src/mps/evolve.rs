use faer::Mat;
use num_complex::Complex64 as C64;

use super::svd::{svd_truncate, TruncationPolicy};
use super::tensor::SiteTensor;
use super::{scale_rows, BinLayout, Channels, TimeBinMps, EMITTER_DIM};
use crate::analytic::EmissionRecord;
use crate::error::{invalid, Error, Result};
use crate::model::{EmitterParams, Stamp, TimeSeries};

/// U = exp(−i h) on emitter ⊗ bin, basis index e·dim(bin) + p, with
///
/// ```text
/// h = δ Δt σ⁺σ⁻ + i √(γ_R Δt) (σ⁺ b_R − σ⁻ b_R†) + i √(γ_L Δt) (σ⁺ b_L − σ⁻ b_L†)
/// ```
pub fn pair_unitary(params: &EmitterParams, dt: f64, layout: BinLayout) -> Result<Mat<C64>> {
    if params.gamma_l() > 0.0 && layout.channels != Channels::Both {
        return Err(invalid("channels", "a left-moving decay channel needs bidirectional bins"));
    }
    let db = layout.dim();
    let n = EMITTER_DIM * db;
    let (ar, al) = ((params.gamma_r() * dt).sqrt(), (params.gamma_l() * dt).sqrt());
    // A = −i h
    let mut a = Mat::<C64>::zeros(n, n);
    for p in 0..db {
        a[(db + p, db + p)] += C64::new(0.0, -params.delta() * dt);
        let (nr, nl) = (layout.n_r(p), layout.n_l(p));
        // σ⁺ b_R |g, p⟩ = √n_R |e, p − 1_R⟩, and −σ⁻ b_R† as its negative adjoint
        if nr > 0 {
            let q = layout.index(nr - 1, nl);
            let c = ar * (nr as f64).sqrt();
            a[(db + q, p)] += c;
            a[(p, db + q)] -= c;
        }
        if nl > 0 && layout.channels == Channels::Both {
            let q = layout.index(nr, nl - 1);
            let c = al * (nl as f64).sqrt();
            a[(db + q, p)] += c;
            a[(p, db + q)] -= c;
        }
    }
    Ok(expm(&a))
}

/// Matrix exponential by scaling and squaring of the Taylor series.
fn expm(a: &Mat<C64>) -> Mat<C64> {
    let n = a.nrows();
    let norm1 = (0..n).map(|c| (0..n).map(|r| a[(r, c)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = 2f64.powi(squarings as i32);
    let scaled = Mat::from_fn(n, n, |r, c| a[(r, c)] / scale);
    let mut result = Mat::<C64>::identity(n, n);
    let mut term = Mat::<C64>::identity(n, n);
    for k in 1..64 {
        let next = &term * &scaled;
        term = Mat::from_fn(n, n, |r, c| next[(r, c)] / k as f64);
        result = Mat::from_fn(n, n, |r, c| result[(r, c)] + term[(r, c)]);
        if term.norm_l2() < 1e-18 * result.norm_l2() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Final state and observables of a run.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: TimeBinMps,
    pub record: EmissionRecord,
    /// Largest bond dimension encountered.
    pub max_bond: usize,
    /// Total discarded Schmidt weight.
    pub discarded_weight: f64,
}

/// Runs the collision model over every bin of the input state.
///
/// n_TLS and the cumulative counts are recorded after each collision (bin
/// end); the fluxes ⟨n_b⟩/Δt of the freshly emitted bin are stamped at the
/// bin centre, where the first-order splitting error is smallest.
pub fn evolve(mut state: TimeBinMps, params: &EmitterParams, policy: &TruncationPolicy) -> Result<Evolution> {
    policy.validate()?;
    if state.emitter != 0 {
        return Err(invalid("state", "evolution must start with the emitter at the head of the chain"));
    }
    let needed = state.photons as usize + 1;
    if policy.max_bond < needed {
        return Err(invalid("max_bond", format!("must be >= {needed} for a {}-photon pulse", state.photons)));
    }
    state.move_oc(0)?;
    let grid = state.grid;
    let dt = grid.dt();
    let layout = state.layout;
    let u = pair_unitary(params, dt, layout)?;
    let db = layout.dim();
    let n_steps = state.n_bins();

    let mut n_tls = Vec::with_capacity(n_steps);
    let mut flux_r = Vec::with_capacity(n_steps);
    let mut flux_l = Vec::with_capacity(n_steps);
    let mut cum_r = Vec::with_capacity(n_steps);
    let mut cum_l = Vec::with_capacity(n_steps);
    let mut cum_in = Vec::with_capacity(n_steps);
    let (mut nr_acc, mut nl_acc, mut in_acc) = (0.0, 0.0, 0.0);
    let mut max_bond = state.max_bond_dim();
    let mut discarded_total = 0.0;
    let zero = C64::new(0.0, 0.0);

    for k in 0..n_steps {
        let e = &state.sites[k];
        let b = &state.sites[k + 1];
        let (dl, dm, dr) = (e.dl, e.dr, b.dr);
        debug_assert_eq!(b.dl, dm);

        // theta[l, e, p, r] = Σ_m E[l, e, m] B[m, p, r]
        let mut theta = vec![zero; dl * EMITTER_DIM * db * dr];
        for l in 0..dl {
            for s in 0..EMITTER_DIM {
                for m in 0..dm {
                    let ev = e.get(l, s, m);
                    if ev == zero {
                        continue;
                    }
                    for p in 0..db {
                        for r in 0..dr {
                            theta[((l * EMITTER_DIM + s) * db + p) * dr + r] += ev * b.get(m, p, r);
                        }
                    }
                }
            }
        }
        // photons about to enter, read before the collision
        let pair = EMITTER_DIM * db;
        for (x, v) in theta.iter().enumerate() {
            let p = (x / dr) % db;
            in_acc += (layout.n_r(p) + layout.n_l(p)) as f64 * v.norm_sqr();
        }

        // apply U on the (e, p) pair
        let mut out = vec![zero; theta.len()];
        for l in 0..dl {
            for r in 0..dr {
                for x in 0..pair {
                    let v = theta[(l * pair + x) * dr + r];
                    if v == zero {
                        continue;
                    }
                    for y in 0..pair {
                        out[(l * pair + y) * dr + r] += u[(y, x)] * v;
                    }
                }
            }
        }

        let (mut pe, mut pr, mut pl) = (0.0, 0.0, 0.0);
        for l in 0..dl {
            for s in 0..EMITTER_DIM {
                for p in 0..db {
                    for r in 0..dr {
                        let w = out[((l * EMITTER_DIM + s) * db + p) * dr + r].norm_sqr();
                        pe += s as f64 * w;
                        pr += layout.n_r(p) as f64 * w;
                        pl += layout.n_l(p) as f64 * w;
                    }
                }
            }
        }
        n_tls.push(pe);
        flux_r.push(pr / dt);
        flux_l.push(pl / dt);
        nr_acc += pr;
        nl_acc += pl;
        cum_r.push(nr_acc);
        cum_l.push(nl_acc);
        cum_in.push(in_acc);

        // M[(l, p), (e, r)]: the bin goes left, the emitter right
        let m = Mat::from_fn(dl * db, EMITTER_DIM * dr, |row, col| {
            let (l, p) = (row / db, row % db);
            let (s, r) = (col / dr, col % dr);
            out[((l * EMITTER_DIM + s) * db + p) * dr + r]
        });
        let svd = svd_truncate(&m, policy)?;
        if svd.needed_rank > policy.max_bond {
            return Err(Error::BondOverflow { step: k, needed: svd.needed_rank, max_bond: policy.max_bond });
        }
        if svd.discarded_weight > policy.discard_budget() {
            return Err(Error::TruncationBudget {
                step: k,
                discarded: svd.discarded_weight,
                budget: policy.discard_budget(),
            });
        }
        discarded_total += svd.discarded_weight;
        max_bond = max_bond.max(svd.rank());
        state.sites[k] = SiteTensor::from_left_matrix(&svd.u, dl, db);
        state.sites[k + 1] = SiteTensor::from_right_matrix(&scale_rows(&svd.v_t, &svd.s), EMITTER_DIM, dr);
        state.emitter = k + 1;
        state.oc = k + 1;
    }

    let series = |v, stamp, label: &str| TimeSeries::new(grid, stamp, v, label);
    let record = EmissionRecord {
        photons: state.photons,
        n_tls: series(n_tls, Stamp::BinEnd, "n_tls")?,
        flux_r: series(flux_r, Stamp::BinCenter, "flux_r")?,
        flux_l: series(flux_l, Stamp::BinCenter, "flux_l")?,
        cum_r: series(cum_r, Stamp::BinEnd, "cum_r")?,
        cum_l: series(cum_l, Stamp::BinEnd, "cum_l")?,
        cum_in: series(cum_in, Stamp::BinEnd, "cum_in")?,
    };
    Ok(Evolution { state, record, max_bond, discarded_weight: discarded_total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PulseSpec, TimeGrid};
    use approx::assert_abs_diff_eq;

    #[test]
    fn pair_unitary_is_unitary() {
        let params = EmitterParams::new(0.3, 0.7, 0.4).unwrap();
        let layout = BinLayout { channels: Channels::Both, cap: 2 };
        let u = pair_unitary(&params, 0.05, layout).unwrap();
        let n = u.nrows();
        assert!((u.adjoint() * &u - Mat::<C64>::identity(n, n)).norm_l2() < 1e-14);
    }

    #[test]
    fn one_photon_collision_is_a_rotation() {
        let dt = 0.01;
        let layout = BinLayout { channels: Channels::Right, cap: 1 };
        let u = pair_unitary(&EmitterParams::chiral(), dt, layout).unwrap();
        let th = dt.sqrt();
        // |g,1⟩ = index 1 → cos θ |g,1⟩ + sin θ |e,0⟩
        assert_abs_diff_eq!(u[(1, 1)].re, th.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(u[(2, 1)].re, th.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(u[(1, 2)].re, -th.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(u[(0, 0)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_missing_left_channel() {
        let layout = BinLayout { channels: Channels::Right, cap: 1 };
        assert!(pair_unitary(&EmitterParams::symmetric(), 0.01, layout).is_err());
    }

    #[test]
    fn evolution_conserves_excitations() {
        let pulse = PulseSpec::rect(1.0, 2).unwrap();
        let grid = TimeGrid::new(0.02, 600).unwrap();
        let params = EmitterParams::symmetric();
        let input = TimeBinMps::build_input(&pulse, &grid, Channels::Both).unwrap();
        let run = evolve(input, &params, &TruncationPolicy::default()).unwrap();
        assert!(run.record.conservation_error() < 1e-10, "{}", run.record.conservation_error());
        assert!(run.record.final_excitation_error() < 1e-4);
        assert_abs_diff_eq!(run.state.norm_sqr(), 1.0, epsilon = 1e-10);
        assert_eq!(run.state.emitter_site(), 600);
        assert!(run.max_bond <= 6);
    }

    #[test]
    fn bond_overflow_is_reported() {
        let pulse = PulseSpec::gaussian(1.0, 0.3, 2).unwrap();
        let grid = TimeGrid::new(0.05, 80).unwrap();
        let input = TimeBinMps::build_input(&pulse, &grid, Channels::Both).unwrap();
        let policy = TruncationPolicy { svd_cutoff: 1e-12, max_bond: 3 };
        assert!(matches!(
            evolve(input, &EmitterParams::symmetric(), &policy),
            Err(Error::BondOverflow { .. })
        ));
    }
}
