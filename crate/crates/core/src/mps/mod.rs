//! Time-bin matrix-product-state collision model.
//!
//! The waveguide field is discretised into time bins of width Δt. The chain
//! holds the emitter plus one site per bin, laid out as
//! `[output bins…, emitter, input bins…]`. Each step entangles the emitter
//! with the next input bin through the pair unitary and moves it past that
//! bin, which becomes an output bin. The orthogonality centre always sits on
//! the emitter, so local expectation values need no environment contraction.
//!
//! Bin k's photons are described by c_k = f(t_k + Δt/2)·√Δt. A bin is one
//! mode (chiral) or a fused pair of modes p = n_R·d + n_L (bidirectional),
//! each truncated at the pulse photon number.

mod checkpoint;
mod correlator;
mod evolve;
mod svd;
mod tensor;

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::model::{EmitterParams, PulseSpec, TimeGrid};

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use correlator::{g1_matrix, two_bin_correlator};
pub use evolve::{evolve, pair_unitary, Evolution};
pub use svd::{svd_truncate, TruncatedSvd, TruncationPolicy};
pub use tensor::SiteTensor;

use tensor::{identity_env, transfer_left, SparseOp};

/// Field modes carried by each time bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channels {
    /// Right-moving mode only.
    Right,
    /// Right- and left-moving modes.
    Both,
}

impl Channels {
    /// The smallest layout able to represent `params`.
    pub fn for_params(params: &EmitterParams) -> Self {
        if params.gamma_l() > 0.0 {
            Channels::Both
        } else {
            Channels::Right
        }
    }

    fn count(self) -> usize {
        match self {
            Channels::Right => 1,
            Channels::Both => 2,
        }
    }
}

/// Local Hilbert space of a time bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinLayout {
    pub channels: Channels,
    /// Maximum occupation per mode.
    pub cap: usize,
}

impl BinLayout {
    pub fn mode_dim(&self) -> usize {
        self.cap + 1
    }

    pub fn dim(&self) -> usize {
        self.mode_dim().pow(self.channels.count() as u32)
    }

    pub fn index(&self, n_r: usize, n_l: usize) -> usize {
        n_r * if self.channels == Channels::Both { self.mode_dim() } else { 1 } + n_l
    }

    pub fn n_r(&self, p: usize) -> usize {
        match self.channels {
            Channels::Right => p,
            Channels::Both => p / self.mode_dim(),
        }
    }

    pub fn n_l(&self, p: usize) -> usize {
        match self.channels {
            Channels::Right => 0,
            Channels::Both => p % self.mode_dim(),
        }
    }

    pub(crate) fn op_identity(&self) -> SparseOp {
        (0..self.dim()).map(|p| (p, p, 1.0)).collect()
    }

    /// ⟨p|b_R|p'⟩ entries.
    pub(crate) fn op_lower_r(&self) -> SparseOp {
        (0..self.dim())
            .filter(|&pk| self.n_r(pk) > 0)
            .map(|pk| (self.index(self.n_r(pk) - 1, self.n_l(pk)), pk, (self.n_r(pk) as f64).sqrt()))
            .collect()
    }

    pub(crate) fn op_raise_r(&self) -> SparseOp {
        self.op_lower_r().into_iter().map(|(p, pk, c)| (pk, p, c)).collect()
    }

    pub(crate) fn op_number_r(&self) -> SparseOp {
        (0..self.dim()).filter(|&p| self.n_r(p) > 0).map(|p| (p, p, self.n_r(p) as f64)).collect()
    }
}

pub(crate) const EMITTER_DIM: usize = 2;

/// The emitter and the field time bins as a matrix product state.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBinMps {
    pub(crate) sites: Vec<SiteTensor>,
    pub(crate) emitter: usize,
    pub(crate) oc: usize,
    pub(crate) layout: BinLayout,
    pub(crate) grid: TimeGrid,
    pub(crate) photons: u32,
}

/// Relative tolerance on Σ|c_k|² = 1 for the sampled pulse.
const NORM_TOL: f64 = 1e-3;

fn sample_amplitudes(pulse: &PulseSpec, grid: &TimeGrid) -> Result<Vec<f64>> {
    let sdt = grid.dt().sqrt();
    let c: Vec<f64> = (0..grid.n_steps()).map(|k| pulse.envelope(grid.bin_center(k)) * sdt).collect();
    let norm: f64 = c.iter().map(|v| v * v).sum();
    if !((norm - 1.0).abs() <= NORM_TOL) {
        return Err(Error::Unnormalizable(format!(
            "bin amplitudes have Σ|c|² = {norm:.6}; the grid must cover the pulse and resolve its edges"
        )));
    }
    let scale = 1.0 / norm.sqrt();
    Ok(c.into_iter().map(|v| v * scale).collect())
}

impl TimeBinMps {
    /// Emitter in |g⟩, one-photon wavepacket in the bins.
    pub fn build_input_1photon(pulse: &PulseSpec, grid: &TimeGrid, channels: Channels) -> Result<Self> {
        if pulse.photons() != 1 {
            return Err(invalid("photons", "build_input_1photon needs a one-photon pulse"));
        }
        let c = sample_amplitudes(pulse, grid)?;
        let layout = BinLayout { channels, cap: 1 };
        // bond = number of photons already placed to the left
        let bins = Self::counting_bins(&c, layout, 1, |k, from, to| match to - from {
            0 => Some(C64::new(1.0, 0.0)),
            1 => Some(C64::new(c[k], 0.0)),
            _ => None,
        });
        Self::assemble(bins, layout, *grid, 1)
    }

    /// Emitter in |g⟩, two-photon Fock state (1/√2)(Σ_k c_k b_k†)²|0⟩.
    pub fn build_input_2photon(pulse: &PulseSpec, grid: &TimeGrid, channels: Channels) -> Result<Self> {
        if pulse.photons() != 2 {
            return Err(invalid("photons", "build_input_2photon needs a two-photon pulse"));
        }
        let c = sample_amplitudes(pulse, grid)?;
        let layout = BinLayout { channels, cap: 2 };
        let s2 = std::f64::consts::SQRT_2;
        let bins = Self::counting_bins(&c, layout, 2, |k, from, to| match (from, to) {
            (a, b) if a == b => Some(C64::new(1.0, 0.0)),
            (0, 1) => Some(C64::new(s2 * c[k], 0.0)),
            (1, 2) => Some(C64::new(c[k], 0.0)),
            (0, 2) => Some(C64::new(c[k] * c[k], 0.0)),
            _ => None,
        });
        Self::assemble(bins, layout, *grid, 2)
    }

    /// Dispatches on the photon number of `pulse`.
    pub fn build_input(pulse: &PulseSpec, grid: &TimeGrid, channels: Channels) -> Result<Self> {
        match pulse.photons() {
            1 => Self::build_input_1photon(pulse, grid, channels),
            2 => Self::build_input_2photon(pulse, grid, channels),
            n => Err(Error::UnsupportedPhotonNumber(n)),
        }
    }

    /// Emitter in |g⟩ and every bin empty.
    pub fn vacuum(grid: &TimeGrid, channels: Channels) -> Result<Self> {
        let layout = BinLayout { channels, cap: 1 };
        let bins = (0..grid.n_steps())
            .map(|_| {
                let mut t = SiteTensor::zeros(1, layout.dim(), 1);
                t.set(0, 0, 0, C64::new(1.0, 0.0));
                t
            })
            .collect();
        let mut s = Self::assemble(bins, layout, *grid, 0)?;
        s.photons = 0;
        Ok(s)
    }

    /// Bin tensors whose bond counts the photons created so far; `amp(k,
    /// from, to)` is the amplitude for bin k to hold to − from photons in the
    /// R mode.
    fn counting_bins(
        c: &[f64],
        layout: BinLayout,
        photons: usize,
        amp: impl Fn(usize, usize, usize) -> Option<C64>,
    ) -> Vec<SiteTensor> {
        let n = c.len();
        let bond = photons + 1;
        (0..n)
            .map(|k| {
                // first site only sees bond 0 on the left, last only bond `photons` on the right
                let lefts: Vec<usize> = if k == 0 { vec![0] } else { (0..bond).collect() };
                let rights: Vec<usize> = if k == n - 1 { vec![photons] } else { (0..bond).collect() };
                let mut t = SiteTensor::zeros(lefts.len(), layout.dim(), rights.len());
                for (a, &from) in lefts.iter().enumerate() {
                    for (b, &to) in rights.iter().enumerate() {
                        if to < from {
                            continue;
                        }
                        if let Some(v) = amp(k, from, to) {
                            t.set(a, layout.index(to - from, 0), b, v);
                        }
                    }
                }
                t
            })
            .collect()
    }

    fn assemble(bins: Vec<SiteTensor>, layout: BinLayout, grid: TimeGrid, photons: u32) -> Result<Self> {
        let mut emitter = SiteTensor::zeros(1, EMITTER_DIM, 1);
        emitter.set(0, 0, 0, C64::new(1.0, 0.0));
        let mut sites = Vec::with_capacity(bins.len() + 1);
        sites.push(emitter);
        sites.extend(bins);
        let last = sites.len() - 1;
        let mut mps = Self { sites, emitter: 0, oc: last, layout, grid, photons };
        mps.move_oc(0)?;
        Ok(mps)
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn n_bins(&self) -> usize {
        self.sites.len() - 1
    }

    pub fn emitter_site(&self) -> usize {
        self.emitter
    }

    pub fn orthogonality_center(&self) -> usize {
        self.oc
    }

    pub fn layout(&self) -> BinLayout {
        self.layout
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    pub fn site(&self, i: usize) -> &SiteTensor {
        &self.sites[i]
    }

    /// Chain position of time bin `k`.
    pub fn bin_site(&self, k: usize) -> usize {
        if k < self.emitter {
            k
        } else {
            k + 1
        }
    }

    /// Dimensions of the n_sites − 1 internal bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1].iter().map(|s| s.dr).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Moves the orthogonality centre with exact (untruncated) QR-like SVD sweeps.
    pub fn move_oc(&mut self, target: usize) -> Result<()> {
        if target >= self.sites.len() {
            return Err(Error::IndexOutOfRange(format!("site {target} of {}", self.sites.len())));
        }
        let exact = TruncationPolicy { svd_cutoff: 0.0, max_bond: usize::MAX };
        while self.oc < target {
            let i = self.oc;
            let t = &self.sites[i];
            let (dl, d) = (t.dl, t.d);
            let svd = svd_truncate(&t.left_matrix(), &exact)?;
            let sv = scale_rows(&svd.v_t, &svd.s);
            self.sites[i] = SiteTensor::from_left_matrix(&svd.u, dl, d);
            self.sites[i + 1] = self.sites[i + 1].mul_left(&sv);
            self.oc += 1;
        }
        while self.oc > target {
            let i = self.oc;
            let t = &self.sites[i];
            let (d, dr) = (t.d, t.dr);
            let svd = svd_truncate(&t.right_matrix(), &exact)?;
            let us = scale_cols(&svd.u, &svd.s);
            self.sites[i] = SiteTensor::from_right_matrix(&svd.v_t, d, dr);
            self.sites[i - 1] = self.sites[i - 1].mul_right(&us);
            self.oc -= 1;
        }
        Ok(())
    }

    /// ⟨ψ|ψ⟩ by full contraction.
    pub fn norm_sqr(&self) -> f64 {
        let mut env = identity_env(1);
        for s in &self.sites {
            let id: SparseOp = (0..s.d).map(|p| (p, p, 1.0)).collect();
            env = transfer_left(&env, s, &id);
        }
        env[0].re
    }

    /// Emitter excited-state population.
    pub fn emitter_population(&self) -> f64 {
        self.local_expectation(self.emitter, &[(1, 1, 1.0)])
    }

    /// Mean number of R photons in bin `k`.
    pub fn bin_occupation_r(&self, k: usize) -> f64 {
        self.local_expectation(self.bin_site(k), &self.layout.op_number_r())
    }

    fn local_expectation(&self, site: usize, op: &[(usize, usize, f64)]) -> f64 {
        let mut env = identity_env(1);
        for (i, s) in self.sites.iter().enumerate() {
            let o: SparseOp = if i == site { op.to_vec() } else { (0..s.d).map(|p| (p, p, 1.0)).collect() };
            env = transfer_left(&env, s, &o);
        }
        env[0].re
    }

    /// Full state vector, first site most significant. Only for small chains.
    pub fn to_dense(&self) -> Result<Vec<C64>> {
        let total: usize = self.sites.iter().map(|s| s.d).product();
        if total > 1 << 22 {
            return Err(invalid("to_dense", format!("state vector of {total} amplitudes is too large")));
        }
        // psi[(prefix, bond)]
        let mut psi = vec![C64::new(1.0, 0.0)];
        let mut bond = 1;
        for s in &self.sites {
            let prefix = psi.len() / bond;
            let mut next = vec![C64::new(0.0, 0.0); prefix * s.d * s.dr];
            for x in 0..prefix {
                for a in 0..bond {
                    let v = psi[x * bond + a];
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for p in 0..s.d {
                        for b in 0..s.dr {
                            next[(x * s.d + p) * s.dr + b] += v * s.get(a, p, b);
                        }
                    }
                }
            }
            psi = next;
            bond = s.dr;
        }
        Ok(psi)
    }
}

pub(crate) fn scale_rows(m: &Mat<C64>, s: &[f64]) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * s[r])
}

pub(crate) fn scale_cols(m: &Mat<C64>, s: &[f64]) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * s[c])
}
