//! Two-time field correlations ⟨b_i† b_j⟩/Δt between output time bins.

use num_complex::Complex64 as C64;

use super::tensor::{close, identity_env, transfer_left, transfer_right, SparseOp};
use super::TimeBinMps;
use crate::error::{Error, Result};
use crate::model::{G1Matrix, Stamp};

fn check_bin(state: &TimeBinMps, k: usize) -> Result<()> {
    if k >= state.n_bins() {
        return Err(Error::IndexOutOfRange(format!("bin {k} of {}", state.n_bins())));
    }
    Ok(())
}

/// v_g⟨a_R†(t_i) a_R(t_j)⟩ ≈ ⟨b_i† b_j⟩/Δt by a full contraction of the chain.
///
/// Works in any gauge; use [`g1_matrix`] for the whole triangle.
pub fn two_bin_correlator(state: &TimeBinMps, i: usize, j: usize) -> Result<C64> {
    check_bin(state, i)?;
    check_bin(state, j)?;
    if i > j {
        return Ok(two_bin_correlator(state, j, i)?.conj());
    }
    let (si, sj) = (state.bin_site(i), state.bin_site(j));
    let layout = state.layout;
    let mut env = identity_env(1);
    for (s, site) in state.sites.iter().enumerate() {
        let op: SparseOp = if s == si && s == sj {
            layout.op_number_r()
        } else if s == si {
            layout.op_raise_r()
        } else if s == sj {
            layout.op_lower_r()
        } else {
            (0..site.d).map(|p| (p, p, 1.0)).collect()
        };
        env = transfer_left(&env, site, &op);
    }
    Ok(env[0] / state.grid.dt())
}

/// The full τ ≥ 0 correlation triangle of the R channel, stamped at the bin
/// centres. Rows are independent and computed in parallel.
pub fn g1_matrix(state: &TimeBinMps) -> Result<G1Matrix> {
    let mut st = state.clone();
    let last = st.n_sites() - 1;
    st.move_oc(last)?;
    // every site left of `last` is now left-normalised, so the left
    // environment of any site is the identity
    let n_sites = st.n_sites();
    let mut right = vec![Vec::new(); n_sites];
    right[last] = identity_env(1);
    for s in (0..last).rev() {
        right[s] = transfer_right(&right[s + 1], &st.sites[s + 1]);
    }
    let layout = st.layout;
    let (raise, lower, number) = (layout.op_raise_r(), layout.op_lower_r(), layout.op_number_r());
    let inv_dt = 1.0 / st.grid.dt();
    let n_bins = st.n_bins();
    let st = &st;
    let right = &right;
    Ok(G1Matrix::from_rows(st.grid, Stamp::BinCenter, |i, row| {
        let si = st.bin_site(i);
        let start = identity_env(st.sites[si].dl);
        row[0] = close(&transfer_left(&start, &st.sites[si], &number), &right[si]) * inv_dt;
        let mut env = transfer_left(&start, &st.sites[si], &raise);
        let mut s = si + 1;
        for j in i + 1..n_bins {
            let sj = st.bin_site(j);
            while s < sj {
                // the emitter between two bins
                let id: SparseOp = (0..st.sites[s].d).map(|p| (p, p, 1.0)).collect();
                env = transfer_left(&env, &st.sites[s], &id);
                s += 1;
            }
            let site = &st.sites[sj];
            row[j - i] = close(&transfer_left(&env, site, &lower), &right[sj]) * inv_dt;
            if j + 1 < n_bins {
                env = transfer_left(&env, site, &layout.op_identity());
            }
            s = sj + 1;
        }
    }))
}
