//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use wgqed_core::{EmitterParams, PulseSpec, TimeGrid};

/// Brute-force collision model on the full state vector, ordered
/// [emitter, bin_0, …, bin_{N−1}] with the emitter most significant. Bins
/// hold (n_R, n_L) with n ≤ cap, fused as n_R·(cap+1) + n_L when `two_channels`.
pub struct DenseRun {
    pub n_tls: Vec<f64>,
    pub flux_r: Vec<f64>,
    pub flux_l: Vec<f64>,
    pub state: Vec<C64>,
    pub bin_dim: usize,
    pub n_bins: usize,
    dt: f64,
    cap: usize,
    two_channels: bool,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl DenseRun {
    fn decode(&self, p: usize) -> (usize, usize) {
        if self.two_channels {
            (p / (self.cap + 1), p % (self.cap + 1))
        } else {
            (p, 0)
        }
    }

    fn digit(&self, idx: usize, bin: usize) -> usize {
        (idx / self.bin_dim.pow((self.n_bins - 1 - bin) as u32)) % self.bin_dim
    }

    /// ⟨b_R,i† b_R,j⟩ / Δt on the final state.
    pub fn g1(&self, i: usize, j: usize) -> C64 {
        // ⟨ψ|b_i† b_j|ψ⟩ = ⟨b_i ψ|b_j ψ⟩
        let lower = |k: usize| {
            let stride = self.bin_dim.pow((self.n_bins - 1 - k) as u32);
            let mut v = vec![zero(); self.state.len()];
            for (idx, amp) in self.state.iter().enumerate() {
                let (nr, nl) = self.decode(self.digit(idx, k));
                if nr == 0 {
                    continue;
                }
                let to = idx - stride * self.digit(idx, k) + stride * self.encode(nr - 1, nl);
                v[to] += amp * (nr as f64).sqrt();
            }
            v
        };
        let (bi, bj) = (lower(i), lower(j));
        bi.iter().zip(&bj).map(|(a, b)| a.conj() * b).sum::<C64>() / self.dt
    }

    fn encode(&self, nr: usize, nl: usize) -> usize {
        if self.two_channels {
            nr * (self.cap + 1) + nl
        } else {
            nr
        }
    }
}

/// exp(−i h Δt) for the emitter–bin pair built from scratch with nalgebra.
pub fn reference_unitary(params: &EmitterParams, dt: f64, cap: usize, two_channels: bool) -> DMatrix<C64> {
    let m = cap + 1;
    let db = if two_channels { m * m } else { m };
    let n = 2 * db;
    // mode lowering operators on the bin
    let lower = |channel: usize| {
        DMatrix::from_fn(db, db, |row, col| {
            let (r0, l0) = if two_channels { (col / m, col % m) } else { (col, 0) };
            let (r1, l1) = if two_channels { (row / m, row % m) } else { (row, 0) };
            let ok = match channel {
                0 => r0 >= 1 && r1 == r0 - 1 && l1 == l0,
                _ => l0 >= 1 && l1 == l0 - 1 && r1 == r0,
            };
            if ok {
                C64::new(((if channel == 0 { r0 } else { l0 }) as f64).sqrt(), 0.0)
            } else {
                zero()
            }
        })
    };
    let sm = DMatrix::from_row_slice(2, 2, &[zero(), C64::new(1.0, 0.0), zero(), zero()]);
    let sp = sm.adjoint();
    let id_b = DMatrix::<C64>::identity(db, db);
    let i = C64::new(0.0, 1.0);
    let mut h = (&sp * &sm).kronecker(&id_b) * C64::new(params.delta() * dt, 0.0);
    let br = lower(0);
    h += (sp.kronecker(&br) - sm.kronecker(&br.adjoint())) * (i * (params.gamma_r() * dt).sqrt());
    if two_channels {
        let bl = lower(1);
        h += (sp.kronecker(&bl) - sm.kronecker(&bl.adjoint())) * (i * (params.gamma_l() * dt).sqrt());
    }
    assert_eq!(h.nrows(), n);
    (h * (-i)).exp()
}

pub fn dense_collision(params: &EmitterParams, pulse: &PulseSpec, grid: &TimeGrid, two_channels: bool) -> DenseRun {
    let photons = pulse.photons() as usize;
    let cap = photons;
    let m = cap + 1;
    let db = if two_channels { m * m } else { m };
    let n_bins = grid.n_steps();
    let dt = grid.dt();
    let mut c: Vec<f64> = (0..n_bins).map(|k| pulse.envelope((k as f64 + 0.5) * dt) * dt.sqrt()).collect();
    let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    c.iter_mut().for_each(|v| *v /= norm);

    let size = 2 * db.pow(n_bins as u32);
    let mut run = DenseRun {
        n_tls: Vec::new(),
        flux_r: Vec::new(),
        flux_l: Vec::new(),
        state: vec![zero(); size],
        bin_dim: db,
        n_bins,
        dt,
        cap,
        two_channels,
    };
    let stride = |k: usize| db.pow((n_bins - 1 - k) as u32);
    let r1 = run.encode(1, 0);
    match photons {
        1 => {
            for k in 0..n_bins {
                run.state[r1 * stride(k)] = C64::new(c[k], 0.0);
            }
        }
        2 => {
            let r2 = run.encode(2, 0);
            for k in 0..n_bins {
                run.state[r2 * stride(k)] = C64::new(c[k] * c[k], 0.0);
                for l in k + 1..n_bins {
                    run.state[r1 * stride(k) + r1 * stride(l)] = C64::new(2f64.sqrt() * c[k] * c[l], 0.0);
                }
            }
        }
        _ => unreachable!(),
    }

    let u = reference_unitary(params, dt, cap, two_channels);
    let e_stride = db.pow(n_bins as u32);
    for k in 0..n_bins {
        let s = stride(k);
        let mut buf = vec![zero(); 2 * db];
        // every index with emitter = 0 and bin k = 0 is a base point
        for base in 0..e_stride {
            if (base / s) % db != 0 {
                continue;
            }
            for e in 0..2 {
                for p in 0..db {
                    buf[e * db + p] = run.state[e * e_stride + base + p * s];
                }
            }
            let out = &u * nalgebra::DVector::from_column_slice(&buf);
            for e in 0..2 {
                for p in 0..db {
                    run.state[e * e_stride + base + p * s] = out[e * db + p];
                }
            }
        }
        let (mut pe, mut pr, mut pl) = (0.0, 0.0, 0.0);
        for (idx, amp) in run.state.iter().enumerate() {
            let w = amp.norm_sqr();
            if w == 0.0 {
                continue;
            }
            if idx >= e_stride {
                pe += w;
            }
            let (nr, nl) = run.decode((idx % e_stride / s) % db);
            pr += nr as f64 * w;
            pl += nl as f64 * w;
        }
        run.n_tls.push(pe);
        run.flux_r.push(pr / dt);
        run.flux_l.push(pl / dt);
    }
    run
}
