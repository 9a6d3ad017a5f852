//! Derivative-free minimization and finite-difference curvature.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when `|f_worst - f_best| <= ftol * (|f_best| + ftol)`.
    pub ftol: f64,
    /// ... and every vertex lies within `xtol` of the best in each coordinate.
    pub xtol: f64,
    /// Initial simplex offset per coordinate.
    pub step: f64,
    /// Restart once from the optimum to escape a collapsed simplex.
    pub restart: bool,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 5000,
            ftol: 1e-8,
            xtol: 1e-6,
            step: 0.1,
            restart: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f`. Non-finite values are treated as `+∞`.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let mut m = nm_once(&f, x0, opts, opts.max_evals);
    if opts.restart && m.evals < opts.max_evals {
        let again = nm_once(&f, &m.x, opts, opts.max_evals - m.evals);
        let evals = m.evals + again.evals;
        if again.f <= m.f {
            m = again;
        }
        m.evals = evals;
    }
    m
}

fn nm_once(f: &impl Fn(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions, budget: usize) -> Minimum {
    let n = x0.len();
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut evals = 0;
    if n == 0 {
        let v = eval(x0, &mut evals);
        return Minimum { x: vec![], f: v, evals, converged: true };
    }
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += if x[i] != 0.0 { opts.step * x[i].abs().max(1.0) } else { opts.step };
        simplex.push(x);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();
    let mut converged = false;
    while evals < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fv = order.iter().map(|&i| fv[i]).collect();
        let (fl, fh) = (fv[0], fv[n]);
        let spread = simplex[1..]
            .iter()
            .flat_map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if fl.is_finite() && (fh - fl).abs() <= opts.ftol * (fl.abs() + opts.ftol) && spread <= opts.xtol {
            converged = true;
            break;
        }
        let mut c = vec![0.0; n];
        for x in &simplex[..n] {
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            c.iter().zip(&simplex[n]).map(|(ci, hi)| ci + t * (ci - hi)).collect()
        };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < fv[0] {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
            continue;
        }
        if fr < fv[n - 1] {
            simplex[n] = xr;
            fv[n] = fr;
            continue;
        }
        // outside contraction if the reflection improved on the worst point
        let xc = along(if fr < fv[n] { 0.5 } else { -0.5 });
        let fc = eval(&xc, &mut evals);
        if fc < fv[n].min(fr) {
            simplex[n] = xc;
            fv[n] = fc;
            continue;
        }
        for i in 1..=n {
            let xs: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, x)| b + 0.5 * (x - b))
                .collect();
            fv[i] = eval(&xs, &mut evals);
            simplex[i] = xs;
        }
    }
    let best = (0..=n).min_by(|&a, &b| fv[a].total_cmp(&fv[b])).unwrap();
    Minimum {
        x: simplex[best].clone(),
        f: fv[best],
        evals,
        converged,
    }
}

/// Central-difference Hessian with step `1e-4 * max(|x_i|, 1)`.
/// `None` if any evaluation is non-finite.
pub fn hessian(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Option<DMatrix<f64>> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
    let f0 = f(x);
    if !f0.is_finite() {
        return None;
    }
    let at = |shifts: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in shifts {
            y[i] += s;
        }
        f(&y)
    };
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let fp = at(&[(i, h[i])]);
        let fm = at(&[(i, -h[i])]);
        let v = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        if !v.is_finite() {
            return None;
        }
        out[(i, i)] = v;
        for j in 0..i {
            let fpp = at(&[(i, h[i]), (j, h[j])]);
            let fpm = at(&[(i, h[i]), (j, -h[j])]);
            let fmp = at(&[(i, -h[i]), (j, h[j])]);
            let fmm = at(&[(i, -h[i]), (j, -h[j])]);
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            if !v.is_finite() {
                return None;
            }
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Some(out)
}

/// Inverse of a symmetric positive-definite matrix, `None` otherwise.
pub fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let inv = m.clone().cholesky()?.inverse();
    inv.iter().all(|v| v.is_finite()).then_some(inv)
}

/// Symmetric square root `V^{1/2}` with negative eigenvalues clipped to 0.
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let d = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()));
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}
