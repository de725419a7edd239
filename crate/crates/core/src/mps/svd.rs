use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

/// How aggressively bonds are truncated after each two-site update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Singular values s_i ≤ cutoff · s_max are discarded.
    pub svd_cutoff: f64,
    pub max_bond: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { svd_cutoff: 1e-12, max_bond: 64 }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.svd_cutoff >= 0.0 && self.svd_cutoff < 1.0) {
            return Err(invalid("svd_cutoff", format!("must lie in [0, 1), got {}", self.svd_cutoff)));
        }
        if self.max_bond == 0 {
            return Err(invalid("max_bond", "must be >= 1"));
        }
        Ok(())
    }

    /// Largest discarded Schmidt weight tolerated in one step.
    pub fn discard_budget(&self) -> f64 {
        self.svd_cutoff * 1e3
    }
}

/// M ≈ U diag(s) V†, singular values in descending order.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: Mat<C64>,
    pub s: Vec<f64>,
    pub v_t: Mat<C64>,
    /// Σ s_i² over the dropped singular values.
    pub discarded_weight: f64,
    /// Rank demanded by the cutoff alone, before capping at `max_bond`.
    pub needed_rank: usize,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }
}

pub fn svd_truncate(m: &Mat<C64>, policy: &TruncationPolicy) -> Result<TruncatedSvd> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if (0..cols).any(|c| (0..rows).any(|r| !m[(r, c)].is_finite())) {
        return Err(Error::SvdNonConvergence { rows, cols });
    }
    let svd = m.thin_svd().map_err(|_| Error::SvdNonConvergence { rows, cols })?;
    let (u, v) = (svd.U(), svd.V());
    let sv: Vec<f64> = svd.S().column_vector().iter().map(|c| c.re).collect();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let s_max = order.first().map(|&i| sv[i]).unwrap_or(0.0);
    let threshold = policy.svd_cutoff * s_max;
    let needed = order.iter().filter(|&&i| sv[i] > threshold).count().max(1);
    let keep = needed.min(policy.max_bond);
    let discarded_weight = order[keep..].iter().map(|&i| sv[i] * sv[i]).sum();
    let kept = &order[..keep];
    Ok(TruncatedSvd {
        u: Mat::from_fn(rows, keep, |r, c| u[(r, kept[c])]),
        s: kept.iter().map(|&i| sv[i]).collect(),
        v_t: Mat::from_fn(keep, cols, |r, c| v[(c, kept[r])].conj()),
        discarded_weight,
        needed_rank: needed,
    })
}
