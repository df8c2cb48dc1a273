//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use num_complex::Complex64;

type C = Complex64;

/// Determinant and solution of `a x = b` by Gaussian elimination with
/// partial pivoting.
fn solve_det(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> (C, Vec<C>) {
    let n = b.len();
    let mut det = C::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        if piv != col {
            a.swap(piv, col);
            b.swap(piv, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in col + 1..n {
            let f = a[r][col] / p;
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: C = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    (det, x)
}

/// CF of the Hermitian form `z^H F z` with `z ~ CN(mu, diag(var))`:
/// `exp(j nu mu^H F (I - j nu R F)^-1 mu) / det(I - j nu R F)`.
pub fn quadratic_form_cf(f: &[Vec<f64>], var: &[f64], mu: &[C], nu: f64) -> C {
    let n = mu.len();
    let j = C::new(0.0, 1.0);
    let a: Vec<Vec<C>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let id = if r == c { 1.0 } else { 0.0 };
                    C::new(id, 0.0) - j * nu * var[r] * f[r][c]
                })
                .collect()
        })
        .collect();
    let (det, x) = solve_det(a, mu.to_vec());
    let mut quad = C::new(0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            quad += mu[r].conj() * f[r][c] * x[c];
        }
    }
    (j * nu * quad).exp() / det
}

/// Joint-form CF of the SSK metric difference `|y - a_t|^2 - |y - a_q|^2`
/// (antenna `q` sent) at one receive antenna, for `z = (y, a^_q, a^_t)`.
pub fn ssk_joint_cf(aq: C, at: C, noise_var: f64, est_var: f64, nu: f64) -> C {
    let f = vec![vec![0.0, 1.0, -1.0], vec![1.0, -1.0, 0.0], vec![-1.0, 0.0, 1.0]];
    quadratic_form_cf(&f, &[noise_var, est_var, est_var], &[aq, aq, at], nu)
}

/// Joint-form CF of the TOSD metric difference `m(q) - m(t)` with
/// `m(x) = Re(a^_x* y_x) - |a^_x|^2 / 2`, for `z = (a^_q, y_q, a^_t, y_t)`.
pub fn tosd_joint_cf(aq: C, at: C, noise_var: f64, est_var: f64, nu: f64) -> C {
    let f = vec![
        vec![-0.5, 0.5, 0.0, 0.0],
        vec![0.5, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.5, -0.5],
        vec![0.0, 0.0, -0.5, 0.0],
    ];
    let zero = C::new(0.0, 0.0);
    quadratic_form_cf(&f, &[est_var, noise_var, est_var, noise_var], &[aq, aq, at, zero], nu)
}

/// Gaussian tail `Q(x)`.
pub fn q_func(x: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    1.0 - Normal::new(0.0, 1.0).unwrap().cdf(x)
}
