use super::band::BandLu;
use super::jacobi_eigen;
use super::{axpy_neg, dot, norm, scale};
use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with an optional periodic corner.
///
/// `corner` couples row 0 with row `n - 1`. With a corner the matrix is no longer
/// tridiagonal, but a symmetric elimination that carries one spike column towards
/// the last row keeps every Sturm count and solve linear in `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub corner: Option<f64>,
}

/// `L D L^T` factorization of `T - shift * I` (no pivoting).
#[derive(Debug, Clone)]
pub struct Ldl {
    pivots: Vec<f64>,
    next: Vec<f64>,
    spike: Vec<f64>,
    negatives: usize,
}

impl Ldl {
    /// Number of negative pivots, i.e. the number of eigenvalues below the shift.
    pub fn negatives(&self) -> usize {
        self.negatives
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.pivots.len();
        let last = n - 1;
        for i in 0..last {
            let xi = x[i];
            if i + 2 < n {
                x[i + 1] -= self.next[i] * xi;
            }
            x[last] -= self.spike[i] * xi;
        }
        for (xi, d) in x.iter_mut().zip(&self.pivots) {
            *xi /= d;
        }
        let x_last = x[last];
        for i in (0..last).rev() {
            let mut v = x[i] - self.spike[i] * x_last;
            if i + 2 < n {
                v -= self.next[i] * x[i + 1];
            }
            x[i] = v;
        }
    }
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>, corner: Option<f64>) -> Self {
        assert_eq!(
            off.len() + 1,
            diag.len(),
            "off-diagonal length must be n - 1"
        );
        assert!(
            corner.is_none() || diag.len() >= 3,
            "periodic corner needs at least three rows"
        );
        Self { diag, off, corner }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
        if let Some(c) = self.corner {
            y[0] += c * x[n - 1];
            y[n - 1] += c * x[0];
        }
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            if let Some(c) = self.corner {
                if i == 0 || i == n - 1 {
                    r += c.abs();
                }
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn scale_norm(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    pub fn factor(&self, shift: f64) -> Ldl {
        let n = self.len();
        let pivmin = self.scale_norm() * 1e-290;
        let guard = |d: f64| if d.abs() <= pivmin { -pivmin } else { d };
        let last = n - 1;
        let mut pivots = vec![0.0; n];
        let mut next = vec![0.0; n.saturating_sub(1)];
        let mut spike = vec![0.0; n.saturating_sub(1)];
        let mut negatives = 0;
        if n == 1 {
            pivots[0] = guard(self.diag[0] - shift);
            negatives = usize::from(pivots[0] < 0.0);
            return Ldl {
                pivots,
                next,
                spike,
                negatives,
            };
        }
        let mut cur = self.diag[0] - shift;
        // coupling of the current row to the last row
        let mut g = if n == 2 {
            self.off[0]
        } else {
            self.corner.unwrap_or(0.0)
        };
        let mut last_diag = self.diag[last] - shift;
        for i in 0..last {
            let d = guard(cur);
            pivots[i] = d;
            negatives += usize::from(d < 0.0);
            spike[i] = g / d;
            last_diag -= g * spike[i];
            if i + 2 < n {
                let l = self.off[i] / d;
                next[i] = l;
                cur = self.diag[i + 1] - shift - self.off[i] * l;
                let direct = if i + 2 == last {
                    self.off[last - 1]
                } else {
                    0.0
                };
                g = direct - l * g;
            }
        }
        pivots[last] = guard(last_diag);
        negatives += usize::from(pivots[last] < 0.0);
        Ldl {
            pivots,
            next,
            spike,
            negatives,
        }
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        self.factor(x).negatives()
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection on Sturm counts.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len());
        let (mut lo, mut hi) = self.gershgorin();
        let span = self.scale_norm();
        lo -= span * f64::EPSILON;
        hi += span * f64::EPSILON;
        let floor = span * f64::EPSILON;
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= floor.max(2.0 * f64::EPSILON * lo.abs().max(hi.abs())) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn smallest_eigenvalues(&self, count: usize) -> Vec<f64> {
        (0..count).map(|k| self.eigenvalue(k)).collect()
    }

    /// The `count` smallest eigenpairs, values ascending, vectors unit length.
    ///
    /// Bisection locates the eigenvalues; inverse iteration (orthogonalizing within
    /// clusters closer than `1e-3 |T|`) builds the vectors; a Rayleigh-Ritz step on
    /// each group of nearly equal values then fixes the final values. The periodic
    /// elimination is only accurate to about `sqrt(eps) |T|` at degenerate
    /// eigenvalues, and the Ritz step restores full accuracy there.
    pub fn smallest_eigenpairs(&self, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.len();
        assert!(count >= 1 && count <= n);
        let span = self.scale_norm();
        let group_gap = 1e-6 * span;
        // extend so no group of near-equal eigenvalues is cut at the end
        let mut approx = self.smallest_eigenvalues(count);
        while approx.len() < n {
            let next = self.eigenvalue(approx.len());
            if next - approx[approx.len() - 1] > group_gap {
                break;
            }
            approx.push(next);
        }
        let mut vectors = self.inverse_iteration(&approx)?;
        let mut values = vec![0.0; approx.len()];
        let mut tmp = vec![0.0; n];
        let mut start = 0;
        while start < approx.len() {
            let mut end = start + 1;
            while end < approx.len() && approx[end] - approx[end - 1] <= group_gap {
                end += 1;
            }
            let k = end - start;
            let mut g = vec![0.0; k * k];
            let images: Vec<Vec<f64>> = vectors[start..end]
                .iter()
                .map(|x| {
                    self.matvec(x, &mut tmp);
                    tmp.clone()
                })
                .collect();
            for i in 0..k {
                for j in 0..k {
                    g[i * k + j] = 0.5
                        * (dot(&vectors[start + i], &images[j])
                            + dot(&vectors[start + j], &images[i]));
                }
            }
            if k == 1 {
                values[start] = g[0];
            } else {
                let e = jacobi_eigen(&g, k);
                let rotated: Vec<Vec<f64>> = (0..k)
                    .map(|c| {
                        let mut x = vec![0.0; n];
                        for r in 0..k {
                            let coef = e.vectors[r * k + c];
                            x.iter_mut()
                                .zip(&vectors[start + r])
                                .for_each(|(a, b)| *a += coef * b);
                        }
                        let xn = norm(&x);
                        scale(&mut x, 1.0 / xn);
                        x
                    })
                    .collect();
                for (c, x) in rotated.into_iter().enumerate() {
                    vectors[start + c] = x;
                    values[start + c] = e.values[c];
                }
            }
            start = end;
        }
        let target = 1e3 * 64.0 * f64::EPSILON * span * (n as f64).sqrt();
        for (x, &v) in vectors.iter().zip(&values) {
            self.matvec(x, &mut tmp);
            axpy_neg(&mut tmp, v, x);
            let residual = norm(&tmp);
            if residual > target {
                return Err(Error::Solver {
                    message: format!("eigenpair residual too large for eigenvalue {v}"),
                    residual,
                });
            }
        }
        values.truncate(count);
        vectors.truncate(count);
        Ok((values, vectors))
    }

    /// Pivoted LU of `T - shift I`. A periodic matrix is reordered as
    /// `0, n-1, 1, n-2, ...`, which turns the ring into a band of half-width 2.
    fn shifted_lu(&self, shift: f64) -> ShiftedLu {
        let n = self.len();
        let tiny = f64::EPSILON * self.scale_norm();
        match self.corner {
            None => {
                let lu = BandLu::factor(n, 1, 1, tiny, |i| {
                    let mut row = Vec::with_capacity(3);
                    if i > 0 {
                        row.push((i - 1, self.off[i - 1]));
                    }
                    row.push((i, self.diag[i] - shift));
                    if i + 1 < n {
                        row.push((i + 1, self.off[i]));
                    }
                    row
                });
                ShiftedLu { lu, order: None }
            }
            Some(c) => {
                let order: Vec<usize> = (0..n)
                    .map(|q| if q % 2 == 0 { q / 2 } else { n - 1 - q / 2 })
                    .collect();
                let mut position = vec![0; n];
                for (q, &node) in order.iter().enumerate() {
                    position[node] = q;
                }
                let lu = BandLu::factor(n, 2, 2, tiny, |q| {
                    let i = order[q];
                    let mut row = vec![(q, self.diag[i] - shift)];
                    let left = if i > 0 {
                        Some((i - 1, self.off[i - 1]))
                    } else {
                        Some((n - 1, c))
                    };
                    let right = if i + 1 < n {
                        Some((i + 1, self.off[i]))
                    } else {
                        Some((0, c))
                    };
                    for (j, v) in left.into_iter().chain(right) {
                        row.push((position[j], v));
                    }
                    row
                });
                ShiftedLu {
                    lu,
                    order: Some(order),
                }
            }
        }
    }

    /// Inverse iteration at the given approximate eigenvalues (ascending).
    fn inverse_iteration(&self, values: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.len();
        let span = self.scale_norm();
        let cluster_gap = 1e-3 * span;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut tmp = vec![0.0; n];
        for (j, &lambda) in values.iter().enumerate() {
            let lu = self.shifted_lu(lambda);
            let mut x: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * (0.7 + 0.37 * j as f64)).sin())
                .collect();
            let cluster_start = values[..j]
                .iter()
                .rposition(|&v| (lambda - v).abs() > cluster_gap)
                .map_or(0, |p| p + 1);
            let mut last_rq = f64::NAN;
            for _ in 0..16 {
                let xn = norm(&x);
                scale(&mut x, 1.0 / xn);
                lu.solve(&mut x);
                for _ in 0..2 {
                    for prev in &out[cluster_start..j] {
                        let c = dot(&x, prev);
                        axpy_neg(&mut x, c, prev);
                    }
                }
                let xn = norm(&x);
                if !(xn.is_finite() && xn > 0.0) {
                    return Err(Error::Solver {
                        message: format!("inverse iteration broke down near eigenvalue {lambda}"),
                        residual: f64::INFINITY,
                    });
                }
                scale(&mut x, 1.0 / xn);
                self.matvec(&x, &mut tmp);
                let rq = dot(&x, &tmp);
                if (rq - last_rq).abs() <= 4.0 * f64::EPSILON * span {
                    break;
                }
                last_rq = rq;
            }
            out.push(x);
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = self.diag[i];
            if i + 1 < n {
                a[i * n + i + 1] = self.off[i];
                a[(i + 1) * n + i] = self.off[i];
            }
        }
        if let Some(c) = self.corner {
            a[n - 1] += c;
            a[(n - 1) * n] += c;
        }
        a
    }
}

struct ShiftedLu {
    lu: BandLu,
    order: Option<Vec<usize>>,
}

impl ShiftedLu {
    fn solve(&self, x: &mut [f64]) {
        match &self.order {
            None => self.lu.solve_in_place(x),
            Some(order) => {
                let mut y: Vec<f64> = order.iter().map(|&i| x[i]).collect();
                self.lu.solve_in_place(&mut y);
                for (q, &i) in order.iter().enumerate() {
                    x[i] = y[q];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize, periodic: bool) -> SymTridiagonal {
        let mut diag = vec![2.0; n];
        if !periodic {
            diag[0] = 1.0;
            diag[n - 1] = 1.0;
        }
        SymTridiagonal::new(diag, vec![-1.0; n - 1], periodic.then_some(-1.0))
    }

    #[test]
    fn periodic_counts_match_dense() {
        let t = SymTridiagonal::new(
            vec![3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.0],
            vec![0.5, -1.0, 2.0, 0.25, -0.75, 1.25],
            Some(0.8),
        );
        let dense = jacobi_eigen(&t.to_dense(), t.len());
        for (k, v) in dense.values.iter().enumerate() {
            assert!((t.eigenvalue(k) - v).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn closed_form_ring_spectrum() {
        let n = 40;
        let t = laplacian(n, true);
        let (vals, _) = t.smallest_eigenpairs(7).unwrap();
        let mut exact: Vec<f64> = (0..n)
            .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        exact.sort_by(f64::total_cmp);
        for (k, e) in exact.iter().enumerate().take(7) {
            assert!((vals[k] - e).abs() < 1e-14, "k={k}");
            assert!((t.eigenvalue(k) - e).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_pair_gets_orthonormal_vectors() {
        let t = laplacian(32, true);
        let (_, vecs) = t.smallest_eigenpairs(3).unwrap();
        assert!(dot(&vecs[1], &vecs[2]).abs() < 1e-10);
        assert!(dot(&vecs[0], &vecs[1]).abs() < 1e-10);
        for v in &vecs {
            assert!((norm(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ldl_solve_inverts() {
        for periodic in [false, true] {
            let t = laplacian(17, periodic);
            let ldl = t.factor(-0.3);
            let b: Vec<f64> = (0..17).map(|i| (i as f64).cos()).collect();
            let mut x = b.clone();
            ldl.solve_in_place(&mut x);
            let mut y = vec![0.0; 17];
            t.matvec(&x, &mut y);
            let mut r = y.clone();
            axpy_neg(&mut r, -0.3, &x);
            let err: f64 = r
                .iter()
                .zip(&b)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "periodic={periodic} err={err}");
        }
    }
}
