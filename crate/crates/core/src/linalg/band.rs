use crate::error::{Error, Result};

/// LU factorization with partial pivoting of a general banded matrix.
///
/// After pivoting, row `k` of `U` spans columns `k..=k + kl + ku`.
#[derive(Debug, Clone)]
pub(crate) struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    upper: Vec<f64>,
    lower: Vec<f64>,
    perm: Vec<usize>,
}

impl BandLu {
    /// `entries(i)` yields `(j, a_ij)` for the nonzeros of row `i`, all with
    /// `i - kl <= j <= i + ku`.
    pub(crate) fn factor<F, I>(n: usize, kl: usize, ku: usize, tiny: f64, entries: F) -> Self
    where
        F: Fn(usize) -> I,
        I: IntoIterator<Item = (usize, f64)>,
    {
        let width = kl + ku + 1;
        let mut start: Vec<usize> = (0..n).map(|i| i.saturating_sub(kl)).collect();
        let mut rows = vec![0.0; n * width];
        for i in 0..n {
            for (j, v) in entries(i) {
                debug_assert!(j + kl >= i && j <= i + ku);
                rows[i * width + (j - start[i])] += v;
            }
        }
        let mut lower = vec![0.0; n * kl.max(1)];
        let mut perm = vec![0; n];
        let mut upper = vec![0.0; n * width];
        // rows are addressed through `slot` so swaps move indices, not data
        let mut slot: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            for r in k..=last {
                let s = slot[r];
                let shift = k - start[s];
                if shift > 0 {
                    let row = &mut rows[s * width..(s + 1) * width];
                    row.copy_within(shift.., 0);
                    row[width - shift..].fill(0.0);
                    start[s] = k;
                }
            }
            let mut p = k;
            for r in k + 1..=last {
                if rows[slot[r] * width].abs() > rows[slot[p] * width].abs() {
                    p = r;
                }
            }
            perm[k] = p;
            slot.swap(k, p);
            let ps = slot[k];
            if rows[ps * width] == 0.0 {
                rows[ps * width] = tiny;
            }
            let pivot_row: Vec<f64> = rows[ps * width..(ps + 1) * width].to_vec();
            for r in k + 1..=last {
                let s = slot[r];
                let m = rows[s * width] / pivot_row[0];
                lower[k * kl.max(1) + (r - k - 1)] = m;
                if m != 0.0 {
                    let row = &mut rows[s * width..(s + 1) * width];
                    for (a, b) in row.iter_mut().zip(&pivot_row).skip(1) {
                        *a -= m * b;
                    }
                }
                rows[s * width] = 0.0;
            }
            upper[k * width..(k + 1) * width].copy_from_slice(&pivot_row);
        }
        Self {
            n,
            kl,
            width,
            upper,
            lower,
            perm,
        }
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, w) = (self.n, self.kl, self.width);
        for k in 0..n {
            b.swap(k, self.perm[k]);
            let bk = b[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                b[r] -= self.lower[k * kl.max(1) + (r - k - 1)] * bk;
            }
        }
        for k in (0..n).rev() {
            let row = &self.upper[k * w..(k + 1) * w];
            let mut v = b[k];
            for j in 1..w.min(n - k) {
                v -= row[j] * b[k + j];
            }
            b[k] = v / row[0];
        }
    }
}

/// Cholesky factorization `A = L L^T` of a symmetric positive definite band
/// matrix with half-bandwidth `bw`.
#[derive(Debug, Clone)]
pub(crate) struct BandCholesky {
    n: usize,
    bw: usize,
    // row i stores L[i][i - bw ..= i]
    l: Vec<f64>,
}

impl BandCholesky {
    /// `entries(i)` yields `(j, a_ij)` for `i - bw <= j <= i` (lower triangle only).
    pub(crate) fn factor<F, I>(n: usize, bw: usize, entries: F) -> Result<Self>
    where
        F: Fn(usize) -> I,
        I: IntoIterator<Item = (usize, f64)>,
    {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in entries(i) {
                debug_assert!(j <= i && j + bw >= i);
                l[i * w + j + bw - i] += v;
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut s = l[i * w + j + bw - i];
                for k in klo..j {
                    s -= l[i * w + k + bw - i] * l[j * w + k + bw - j];
                }
                if j < i {
                    l[i * w + j + bw - i] = s / l[j * w + bw];
                } else {
                    if !(s > 0.0) {
                        return Err(Error::Solver {
                            message: format!("band Cholesky: non-positive pivot at row {i}"),
                            residual: s,
                        });
                    }
                    l[i * w + bw] = s.sqrt();
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = b[i];
            for k in lo..i {
                s -= self.l[i * w + k + bw - i] * b[k];
            }
            b[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            b[i] /= self.l[i * w + bw];
            let lo = i.saturating_sub(bw);
            let bi = b[i];
            for k in lo..i {
                b[k] -= self.l[i * w + k + bw - i] * bi;
            }
        }
    }
}
