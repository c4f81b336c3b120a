//! BFGS with a backtracking (Armijo) line search.
//!
//! The objective returns `None` (or a non-finite value) where it cannot be
//! evaluated; the line search treats such points as infinitely bad and keeps
//! shrinking the step.

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Converged once `|grad| <= grad_tol * (1 + |f|)`.
    pub grad_tol: f64,
    pub armijo: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iter: 500,
            grad_tol: 1e-6,
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimize `objective`, which returns the value and gradient at a point.
///
/// Returns `None` when the objective cannot be evaluated at `x0`.
pub fn minimize<F>(mut objective: F, x0: &[f64], opts: &BfgsOptions) -> Option<Minimum>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut eval = |x: &[f64]| {
        objective(x).filter(|(f, g)| f.is_finite() && g.iter().all(|v| v.is_finite()))
    };
    let mut x = x0.to_vec();
    let (mut f, mut g) = eval(&x)?;
    // Inverse Hessian approximation, row-major.
    let mut h = identity(n);
    let mut scaled = false;
    let mut iterations = 0;

    let converged = |f: f64, g: &[f64]| norm(g) <= opts.grad_tol * (1.0 + f.abs());

    while iterations < opts.max_iter && !converged(f, &g) {
        iterations += 1;
        let mut dir: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            // Lost descent; restart from steepest descent.
            h = identity(n);
            scaled = false;
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            if let Some((ft, gt)) = eval(&trial) {
                if ft <= f + opts.armijo * step * slope {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= opts.shrink;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            if !scaled {
                let gamma = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= gamma);
                scaled = true;
            }
            bfgs_update(&mut h, &s, &y, sy);
        }
        let stalled = f - f_new <= f64::EPSILON * f.abs() && norm(&s) <= f64::EPSILON * (1.0 + norm(&x));
        x = x_new;
        f = f_new;
        g = g_new;
        if stalled {
            break;
        }
    }

    let grad_norm = norm(&g);
    Some(Minimum {
        converged: converged(f, &g),
        x,
        value: f,
        grad_norm,
        iterations,
    })
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ];
            Some((v, g))
        };
        let m = minimize(f, &[-1.2, 1.0], &BfgsOptions::default()).unwrap();
        assert!(m.converged, "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn quadratic_with_infeasible_region() {
        // log-barrier: undefined for x <= 0
        let f = |x: &[f64]| {
            if x[0] <= 0.0 {
                return None;
            }
            Some((x[0] - x[0].ln(), vec![1.0 - 1.0 / x[0]]))
        };
        let m = minimize(f, &[5.0], &BfgsOptions::default()).unwrap();
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5);
        assert!(minimize(f, &[-1.0], &BfgsOptions::default()).is_none());
    }
}
