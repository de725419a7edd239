use faer::Mat;
use num_complex::Complex64 as C64;

/// Rank-3 site tensor A[left, phys, right], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    pub(crate) dl: usize,
    pub(crate) d: usize,
    pub(crate) dr: usize,
    pub(crate) data: Vec<C64>,
}

impl SiteTensor {
    pub fn zeros(dl: usize, d: usize, dr: usize) -> Self {
        Self { dl, d, dr, data: vec![C64::new(0.0, 0.0); dl * d * dr] }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.dl, self.d, self.dr)
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub(crate) fn idx(&self, a: usize, p: usize, b: usize) -> usize {
        (a * self.d + p) * self.dr + b
    }

    #[inline]
    pub fn get(&self, a: usize, p: usize, b: usize) -> C64 {
        self.data[self.idx(a, p, b)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, p: usize, b: usize, v: C64) {
        let i = self.idx(a, p, b);
        self.data[i] = v;
    }

    /// (left·phys) × right.
    pub(crate) fn left_matrix(&self) -> Mat<C64> {
        Mat::from_fn(self.dl * self.d, self.dr, |row, col| self.data[row * self.dr + col])
    }

    /// left × (phys·right).
    pub(crate) fn right_matrix(&self) -> Mat<C64> {
        let w = self.d * self.dr;
        Mat::from_fn(self.dl, w, |row, col| self.data[row * w + col])
    }

    pub(crate) fn from_left_matrix(m: &Mat<C64>, dl: usize, d: usize) -> Self {
        debug_assert_eq!(m.nrows(), dl * d);
        let dr = m.ncols();
        let mut t = Self::zeros(dl, d, dr);
        for row in 0..dl * d {
            for col in 0..dr {
                t.data[row * dr + col] = m[(row, col)];
            }
        }
        t
    }

    pub(crate) fn from_right_matrix(m: &Mat<C64>, d: usize, dr: usize) -> Self {
        debug_assert_eq!(m.ncols(), d * dr);
        let dl = m.nrows();
        let mut t = Self::zeros(dl, d, dr);
        let w = d * dr;
        for row in 0..dl {
            for col in 0..w {
                t.data[row * w + col] = m[(row, col)];
            }
        }
        t
    }

    /// Contracts `m` (dr × k) into the right bond.
    pub(crate) fn mul_right(&self, m: &Mat<C64>) -> Self {
        Self::from_left_matrix(&(&self.left_matrix() * m), self.dl, self.d)
    }

    /// Contracts `m` (k × dl) into the left bond.
    pub(crate) fn mul_left(&self, m: &Mat<C64>) -> Self {
        Self::from_right_matrix(&(m * &self.right_matrix()), self.d, self.dr)
    }
}

/// Sparse single-site operator: entries (bra, ket, ⟨bra|O|ket⟩).
pub(crate) type SparseOp = Vec<(usize, usize, f64)>;

/// Transfer of a left environment through one site with operator `op`:
/// L'[r, r'] = Σ conj(A[l, p, r]) L[l, l'] O[p, p'] A[l', p', r'].
pub(crate) fn transfer_left(env: &[C64], a: &SiteTensor, op: &[(usize, usize, f64)]) -> Vec<C64> {
    let (dl, dr) = (a.dl, a.dr);
    debug_assert_eq!(env.len(), dl * dl);
    let mut out = vec![C64::new(0.0, 0.0); dr * dr];
    let mut x = vec![C64::new(0.0, 0.0); dl * dr];
    for &(p, pk, c) in op {
        // x[l, r'] = Σ_l' L[l, l'] A[l', pk, r']
        x.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for l in 0..dl {
            for lk in 0..dl {
                let e = env[l * dl + lk];
                if e == C64::new(0.0, 0.0) {
                    continue;
                }
                let base = a.idx(lk, pk, 0);
                let row = &a.data[base..base + dr];
                let xr = &mut x[l * dr..(l + 1) * dr];
                for (xv, av) in xr.iter_mut().zip(row) {
                    *xv += e * av;
                }
            }
        }
        for l in 0..dl {
            let base = a.idx(l, p, 0);
            for r in 0..dr {
                let bra = a.data[base + r].conj() * c;
                if bra == C64::new(0.0, 0.0) {
                    continue;
                }
                let xr = &x[l * dr..(l + 1) * dr];
                let or = &mut out[r * dr..(r + 1) * dr];
                for (o, xv) in or.iter_mut().zip(xr) {
                    *o += bra * xv;
                }
            }
        }
    }
    out
}

/// R'[a, a'] = Σ_{p, r, r'} conj(A[a, p, r]) R[r, r'] A[a', p, r'].
pub(crate) fn transfer_right(env: &[C64], a: &SiteTensor) -> Vec<C64> {
    let (dl, d, dr) = (a.dl, a.d, a.dr);
    let mut out = vec![C64::new(0.0, 0.0); dl * dl];
    for ak in 0..dl {
        for p in 0..d {
            // y[r] = Σ_r' R[r, r'] A[a', p, r']
            let base = a.idx(ak, p, 0);
            let ket = &a.data[base..base + dr];
            let y: Vec<C64> = (0..dr)
                .map(|r| env[r * dr..(r + 1) * dr].iter().zip(ket).map(|(e, k)| e * k).sum())
                .collect();
            for ab in 0..dl {
                let b0 = a.idx(ab, p, 0);
                let s: C64 = a.data[b0..b0 + dr].iter().zip(&y).map(|(b, yv)| b.conj() * yv).sum();
                out[ab * dl + ak] += s;
            }
        }
    }
    out
}

pub(crate) fn identity_env(n: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }
    v
}

/// Σ_{r, r'} L[r, r'] R[r, r'].
pub(crate) fn close(l: &[C64], r: &[C64]) -> C64 {
    l.iter().zip(r).map(|(a, b)| a * b).sum()
}
