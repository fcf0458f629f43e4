//! Small dense linear-algebra helpers on top of faer.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;

use crate::exec::{self, Exec};

/// Row-major dense matrix-vector product.
pub fn matvec(exec: Exec, a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    let m = a.len() / n;
    debug_assert_eq!(x.len(), n);
    exec::map_range(exec, m, |i| {
        let row = &a[i * n..(i + 1) * n];
        row.iter().zip(x).map(|(p, q)| p * q).sum()
    })
}

pub fn to_col(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn from_col(m: &Mat<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

pub fn lu_solve(lu: &PartialPivLu<f64>, b: &[f64]) -> Vec<f64> {
    from_col(&lu.solve(to_col(b)))
}

pub fn lu_solve_transpose(lu: &PartialPivLu<f64>, b: &[f64]) -> Vec<f64> {
    from_col(&lu.solve_transpose(to_col(b)))
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Maximum absolute column sum.
pub fn norm1(a: &Mat<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager--Higham estimate of `||A^{-1}||_1` from an LU factorisation.
pub fn inverse_norm1_estimate(lu: &PartialPivLu<f64>, n: usize) -> f64 {
    let mut x = vec![1.0 / n as f64; n];
    let mut est = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = lu_solve(lu, &x);
        est = y.iter().map(|v| v.abs()).sum::<f64>();
        if !est.is_finite() {
            return f64::INFINITY;
        }
        let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
        let z = lu_solve_transpose(lu, &xi);
        let (j, zmax) = z
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bj, bm), (j, v)| if v.abs() > bm { (j, v.abs()) } else { (bj, bm) });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
        if zmax <= ztx || j == last_j {
            break;
        }
        last_j = j;
        x = vec![0.0; n];
        x[j] = 1.0;
    }
    let alt: Vec<f64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
        })
        .collect();
    let y = lu_solve(lu, &alt);
    let est2 = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
    est.max(est2)
}

/// 1-norm condition estimate.
pub fn condition_estimate(a: &Mat<f64>, lu: &PartialPivLu<f64>) -> f64 {
    norm1(a) * inverse_norm1_estimate(lu, a.nrows())
}

/// Outcome of a restarted GMRES run.
#[derive(Clone, Debug)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Restarted GMRES with modified Gram--Schmidt and Givens rotations.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    restart: usize,
    tol: f64,
    max_iter: usize,
) -> GmresOutcome {
    let n = b.len();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return GmresOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut total = 0;
    let mut rel = 1.0;
    while total < max_iter {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm2(&r);
        rel = beta / bnorm;
        if rel <= tol {
            return GmresOutcome {
                x,
                iterations: total,
                relative_residual: rel,
                converged: true,
            };
        }
        let m = restart.min(max_iter - total);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|q| q / beta).collect()];
        let mut hmat = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let mut w = apply(&v[k]);
            for (i, vi) in v.iter().enumerate() {
                let hik: f64 = w.iter().zip(vi).map(|(p, q)| p * q).sum();
                hmat[i][k] = hik;
                w.iter_mut().zip(vi).for_each(|(p, q)| *p -= hik * q);
            }
            let hn = norm2(&w);
            hmat[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * hmat[i][k] + sn[i] * hmat[i + 1][k];
                hmat[i + 1][k] = -sn[i] * hmat[i][k] + cs[i] * hmat[i + 1][k];
                hmat[i][k] = t;
            }
            let den = hmat[k][k].hypot(hmat[k + 1][k]);
            cs[k] = hmat[k][k] / den;
            sn[k] = hmat[k + 1][k] / den;
            hmat[k][k] = den;
            hmat[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            rel = g[k + 1].abs() / bnorm;
            if rel <= tol || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|q| q / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = ((i + 1)..k_used).map(|j| hmat[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / hmat[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut().zip(&v[j]).for_each(|(p, q)| *p += yj * q);
        }
    }
    let ax = apply(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    rel = rel.max(norm2(&r) / bnorm);
    GmresOutcome {
        x,
        iterations: total,
        relative_residual: norm2(&r) / bnorm,
        converged: rel <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> Mat<f64> {
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                4.0 + i as f64 * 0.1
            } else {
                1.0 / (1.0 + (i as f64 - j as f64).abs())
            }
        })
    }

    #[test]
    fn condition_estimate_close_to_exact_for_diagonal() {
        let a = Mat::from_fn(20, 20, |i, j| if i == j { 1.0 + i as f64 } else { 0.0 });
        let lu = a.partial_piv_lu();
        let c = condition_estimate(&a, &lu);
        assert!((c - 20.0).abs() < 1e-10, "{c}");
    }

    #[test]
    fn gmres_matches_lu() {
        let n = 40;
        let a = test_matrix(n);
        let rm: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let lu = a.partial_piv_lu();
        let x_lu = lu_solve(&lu, &b);
        let out = gmres(|v| matvec(Exec::Sequential, &rm, n, v), &b, 10, 1e-13, 500);
        assert!(out.converged);
        for (p, q) in out.x.iter().zip(&x_lu) {
            assert!((p - q).abs() < 1e-11);
        }
    }
}
