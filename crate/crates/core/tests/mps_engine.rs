mod common;

use common::dense_collision;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use wgqed_core::analytic::{flux_chiral_rect, g1_chiral_rect, pop_1photon_rect};
use wgqed_core::mps::{evolve, g1_matrix, two_bin_correlator, Channels, TimeBinMps, TruncationPolicy};
use wgqed_core::{CouplingKind, EmitterParams, PulseSpec, TimeGrid};

fn run(params: &EmitterParams, pulse: &PulseSpec, grid: &TimeGrid, channels: Channels) -> wgqed_core::mps::Evolution {
    let input = TimeBinMps::build_input(pulse, grid, channels).unwrap();
    evolve(input, params, &TruncationPolicy::default()).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Compares observables and the final state with the brute-force oracle.
fn check_against_dense(params: EmitterParams, pulse: PulseSpec, grid: TimeGrid, channels: Channels) {
    let two = channels == Channels::Both;
    let dense = dense_collision(&params, &pulse, &grid, two);
    let mps = run(&params, &pulse, &grid, channels);
    let rec = &mps.record;
    assert!(max_diff(&rec.n_tls.values, &dense.n_tls) < 1e-10);
    assert!(max_diff(&rec.flux_r.values, &dense.flux_r) < 1e-10);
    assert!(max_diff(&rec.flux_l.values, &dense.flux_l) < 1e-10);

    // final chain is [bins…, emitter]; the oracle stores [emitter, bins…]
    let psi = mps.state.to_dense().unwrap();
    let nb = grid.n_steps();
    let db = dense.bin_dim;
    let bins = db.pow(nb as u32);
    let mut worst = 0.0f64;
    for e in 0..2 {
        for b in 0..bins {
            worst = worst.max((psi[b * 2 + e] - dense.state[e * bins + b]).norm());
        }
    }
    assert!(worst < 1e-10, "state mismatch {worst}");

    let g = g1_matrix(&mps.state).unwrap();
    for i in 0..nb {
        for j in i..nb {
            let d = dense.g1(i, j);
            assert!((g.get(i, j - i) - d).norm() < 1e-10, "g1({i},{j})");
            assert!((two_bin_correlator(&mps.state, i, j).unwrap() - d).norm() < 1e-10);
        }
    }
}

#[test]
fn dense_oracle_chiral_one_photon() {
    let grid = TimeGrid::new(0.2, 10).unwrap();
    check_against_dense(EmitterParams::chiral(), PulseSpec::rect(1.2, 1).unwrap(), grid, Channels::Right);
}

#[test]
fn dense_oracle_symmetric_one_photon_detuned() {
    let grid = TimeGrid::new(0.2, 10).unwrap();
    let params = EmitterParams::symmetric().with_detuning(0.7).unwrap();
    check_against_dense(params, PulseSpec::gaussian(1.0, 0.3, 1).unwrap(), grid, Channels::Both);
}

#[test]
fn dense_oracle_chiral_two_photons() {
    let grid = TimeGrid::new(0.25, 10).unwrap();
    check_against_dense(EmitterParams::chiral(), PulseSpec::rect(1.5, 2).unwrap(), grid, Channels::Right);
}

#[test]
fn dense_oracle_symmetric_two_photons() {
    let grid = TimeGrid::new(0.3, 6).unwrap();
    check_against_dense(EmitterParams::symmetric(), PulseSpec::rect(1.5, 2).unwrap(), grid, Channels::Both);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn dense_oracle_random_couplings(gr in 0.05f64..1.0, gl in 0.0f64..1.0, delta in -2.0f64..2.0, photons in 1u32..=2) {
        let params = EmitterParams::new(gr, gl, delta).unwrap();
        let grid = TimeGrid::new(0.3, 6).unwrap();
        let pulse = PulseSpec::rect(1.2, photons).unwrap();
        check_against_dense(params, pulse, grid, Channels::Both);
    }
}

#[test]
fn vacuum_input_stays_dark() {
    let grid = TimeGrid::new(0.01, 500).unwrap();
    let input = TimeBinMps::vacuum(&grid, Channels::Both).unwrap();
    let out = evolve(input, &EmitterParams::symmetric(), &TruncationPolicy::default()).unwrap();
    assert!(out.record.n_tls.values.iter().all(|v| v.abs() < 1e-15));
    assert!(out.record.flux_l.values.iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn chiral_population_converges_to_closed_form() {
    let pulse = PulseSpec::rect(2.0, 1).unwrap();
    let mut errs = Vec::new();
    for dt in [0.02, 0.01] {
        let grid = TimeGrid::covering(dt, 8.0).unwrap();
        let out = run(&EmitterParams::chiral(), &pulse, &grid, Channels::Right);
        let exact: Vec<f64> = (0..grid.n_steps())
            .map(|k| pop_1photon_rect(CouplingKind::Chiral, 2.0, grid.time(k)).unwrap())
            .collect();
        errs.push(max_diff(&out.record.n_tls.values, &exact));
    }
    let ratio = errs[0] / errs[1];
    assert!((1.6..2.4).contains(&ratio), "{errs:?}");
    assert!(errs[1] < 1e-3);
}

#[test]
fn chiral_flux_and_correlation_follow_closed_forms() {
    let pulse = PulseSpec::rect(2.0, 1).unwrap();
    let grid = TimeGrid::covering(0.01, 6.0).unwrap();
    let out = run(&EmitterParams::chiral(), &pulse, &grid, Channels::Right);
    let flux = &out.record.flux_r;
    for k in 0..grid.n_steps() {
        let exact = flux_chiral_rect(2.0, flux.time(k)).unwrap();
        assert!((flux.values[k] - exact).abs() < 3e-3, "k={k}");
    }
    let g = g1_matrix(&out.state).unwrap();
    let dt = grid.dt();
    for i in (0..grid.n_steps()).step_by(17) {
        for j in (0..grid.n_steps() - i).step_by(13) {
            let t = (i as f64 + 0.5) * dt;
            let exact = g1_chiral_rect(2.0, t, j as f64 * dt).unwrap();
            // the τ-grid straddles the pulse edge differently from the
            // closed form only within one bin; skip that bin
            if ((t + j as f64 * dt) - 2.0).abs() < dt {
                continue;
            }
            assert!((g.get(i, j) - exact).norm() < 4e-3, "({i},{j})");
        }
    }
}

#[test]
fn free_pulse_correlator_on_the_input_state() {
    let pulse = PulseSpec::gaussian(1.0, 0.3, 1).unwrap();
    let grid = TimeGrid::new(0.05, 60).unwrap();
    let input = TimeBinMps::build_input(&pulse, &grid, Channels::Right).unwrap();
    let g = g1_matrix(&input).unwrap();
    let c: Vec<f64> = (0..60).map(|k| pulse.envelope(grid.bin_center(k)) * 0.05f64.sqrt()).collect();
    let norm: f64 = c.iter().map(|v| v * v).sum();
    for i in 0..60 {
        for j in 0..60 - i {
            let exact = C64::new(c[i] * c[i + j] / norm / 0.05, 0.0);
            assert!((g.get(i, j) - exact).norm() < 1e-12);
        }
    }
}

#[test]
fn two_photon_bond_dimension_stays_small() {
    let pulse = PulseSpec::rect(2.0, 2).unwrap();
    let grid = TimeGrid::covering(0.01, 10.0).unwrap();
    let out = run(&EmitterParams::symmetric(), &pulse, &grid, Channels::Both);
    assert!(out.max_bond <= 6, "{}", out.max_bond);
    assert!(out.record.final_excitation_error() < 1e-3);
    assert!(out.discarded_weight < 1e-15);
}

#[test]
fn correlator_rejects_bad_indices() {
    let pulse = PulseSpec::rect(1.0, 1).unwrap();
    let grid = TimeGrid::new(0.1, 10).unwrap();
    let input = TimeBinMps::build_input(&pulse, &grid, Channels::Right).unwrap();
    assert!(two_bin_correlator(&input, 3, 10).is_err());
}
