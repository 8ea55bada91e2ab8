use super::{axpy_neg, dot, jacobi_eigen, norm, scale, SymTridiagonal};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LanczosResult {
    /// Largest Ritz values of the inverse operator, descending.
    pub theta: Vec<f64>,
    /// Matching unit Ritz vectors.
    pub vectors: Vec<Vec<f64>>,
    pub steps: usize,
}

/// Lanczos with full reorthogonalization on a symmetric positive operator given
/// only through `apply` (typically a factored `(A + sI)^{-1}`).
///
/// Returns the `count` largest eigenvalues of that operator. Each copy of a
/// repeated eigenvalue is found at most once until rounding resolves it.
pub fn lanczos_shift_invert<F>(
    n: usize,
    mut apply: F,
    count: usize,
    max_steps: usize,
    tol: f64,
) -> Result<LanczosResult>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    assert!(count >= 1 && count <= n);
    let max_steps = max_steps.min(n);
    // deterministic, structure-free start vector
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut q: Vec<f64> = (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let qn = norm(&q);
    scale(&mut q, 1.0 / qn);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut worst = f64::INFINITY;

    for j in 0..max_steps {
        let mut w = apply(&basis[j]);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                axpy_neg(&mut w, c, v);
            }
        }
        let b = norm(&w);

        let k = alpha.len();
        if k >= count {
            // top Ritz pairs; y holds the Ritz vectors in the Lanczos basis
            let (theta, y) = ritz(&alpha, &beta, count)?;
            worst = (0..count)
                .map(|c| (b * y[c][k - 1]).abs() / theta[c].abs())
                .fold(0.0, f64::max);
            if worst <= tol || b <= f64::EPSILON * a.abs() || j + 1 == max_steps {
                if worst > tol && b > f64::EPSILON * a.abs() {
                    return Err(Error::Solver {
                        message: format!("shift-invert Lanczos exhausted {max_steps} steps"),
                        residual: worst,
                    });
                }
                let vectors = y
                    .iter()
                    .map(|yc| {
                        let mut x = vec![0.0; n];
                        for (v, yi) in basis.iter().zip(yc) {
                            x.iter_mut().zip(v).for_each(|(xe, ve)| *xe += yi * ve);
                        }
                        let xn = norm(&x);
                        scale(&mut x, 1.0 / xn);
                        x
                    })
                    .collect();
                return Ok(LanczosResult {
                    theta,
                    vectors,
                    steps: k,
                });
            }
        }
        if b <= f64::EPSILON * a.abs() {
            break;
        }
        beta.push(b);
        scale(&mut w, 1.0 / b);
        basis.push(w);
    }
    Err(Error::Solver {
        message: "Lanczos recurrence broke down before the requested Ritz values converged".into(),
        residual: worst,
    })
}

fn ritz(alpha: &[f64], beta: &[f64], count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let k = alpha.len();
    if k < 3 {
        let mut t = vec![0.0; k * k];
        for i in 0..k {
            t[i * k + i] = alpha[i];
            if i + 1 < k {
                t[i * k + i + 1] = beta[i];
                t[(i + 1) * k + i] = beta[i];
            }
        }
        let e = jacobi_eigen(&t, k);
        let top = (0..count).map(|c| k - 1 - c);
        let vecs = top
            .clone()
            .map(|c| (0..k).map(|i| e.vectors[i * k + c]).collect())
            .collect();
        return Ok((top.map(|c| e.values[c]).collect(), vecs));
    }
    // largest of T = smallest of -T
    let neg = SymTridiagonal::new(
        alpha.iter().map(|a| -a).collect(),
        beta[..k - 1].iter().map(|b| -b).collect(),
        None,
    );
    let (vals, vecs) = neg.smallest_eigenpairs(count)?;
    Ok((
        vals[..count].iter().map(|v| -v).collect(),
        vecs[..count].to_vec(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymTridiagonal;

    #[test]
    fn recovers_bottom_of_path_laplacian() {
        let n = 200;
        let mut diag = vec![2.0; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        let t = SymTridiagonal::new(diag, vec![-1.0; n - 1], None);
        let shift = 0.01;
        let ldl = t.factor(-shift);
        let res = lanczos_shift_invert(
            n,
            |x| {
                let mut y = x.to_vec();
                ldl.solve_in_place(&mut y);
                y
            },
            3,
            120,
            1e-13,
        )
        .unwrap();
        for (k, th) in res.theta.iter().enumerate() {
            let lambda = 1.0 / th - shift;
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos();
            assert!((lambda - exact).abs() < 1e-11, "k={k} {lambda} {exact}");
        }
    }
}
