//! Box-constrained quasi-Newton minimizer used by the likelihood fitter.
//!
//! Dense BFGS with gradient projection onto the box: components pinned at a
//! bound with an outward-pointing gradient are frozen out of the search
//! direction, and the backtracking line search walks the projected path.
//! Problem sizes here are small (rarely above 100 parameters), so the dense
//! inverse-Hessian update is fine.

/// Stopping rules and budgets.
#[derive(Debug, Clone)]
pub struct OptimOptions {
    pub max_iterations: usize,
    /// Converged when `|f_new - f| < f_tol * (1 + |f|)` together with the
    /// step-size rule below.
    pub f_tol: f64,
    /// Converged when the max-norm of the accepted step falls under this.
    pub step_tol: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions {
            max_iterations: 500,
            f_tol: 1e-9,
            step_tol: 1e-8,
        }
    }
}

/// Result of a minimization run.
#[derive(Debug, Clone)]
pub struct OptimOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

const BOUND_EPS: f64 = 1e-12;

/// Minimizes `f` over the box `[lower_i, upper_i]` starting from `x0`
/// (projected into the box if needed). `grad` must return the gradient of
/// `f`; the caller chooses between numerical and analytic differentiation.
pub fn minimize_box<F, G>(
    f: &F,
    grad: &G,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &OptimOptions,
) -> OptimOutcome
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let clamp = |x: &mut [f64]| {
        for i in 0..n {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };

    let mut x = x0.to_vec();
    clamp(&mut x);
    let mut fx = f(&x);
    let mut g = grad(&x);
    // inverse Hessian approximation, row-major
    let mut h = identity(n);

    for iter in 1..=opts.max_iterations {
        // Freeze coordinates pinned at a bound with the gradient pushing
        // further outward.
        let active: Vec<bool> = (0..n)
            .map(|i| {
                (x[i] <= lower[i] + BOUND_EPS && g[i] > 0.0)
                    || (x[i] >= upper[i] - BOUND_EPS && g[i] < 0.0)
            })
            .collect();
        let gm: Vec<f64> = (0..n).map(|i| if active[i] { 0.0 } else { g[i] }).collect();
        let gm_norm = gm.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gm_norm == 0.0 {
            return OptimOutcome {
                x,
                f: fx,
                iterations: iter - 1,
                converged: true,
            };
        }

        let mut d = neg_mat_vec(&h, &gm);
        for i in 0..n {
            if active[i] {
                d[i] = 0.0;
            }
        }
        // Fall back to steepest descent if the quasi-Newton direction has
        // lost descent (can happen after curvature-update skips).
        let dir_deriv: f64 = d.iter().zip(&g).map(|(di, gi)| di * gi).sum();
        if dir_deriv >= 0.0 {
            h = identity(n);
            for i in 0..n {
                d[i] = -gm[i];
            }
        }

        // Backtracking Armijo search along the projected path.
        let mut alpha = 1.0;
        let mut x_new = x.clone();
        let mut f_new = fx;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = (x[i] + alpha * d[i]).clamp(lower[i], upper[i]);
            }
            f_new = f(&x_new);
            let lin: f64 = (0..n).map(|i| (x_new[i] - x[i]) * g[i]).sum();
            if lin < 0.0 && f_new <= fx + 1e-4 * lin {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No decrease found down to tiny steps: numerically stationary.
            return OptimOutcome {
                x,
                f: fx,
                iterations: iter,
                converged: true,
            };
        }

        let step: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let step_max = step.iter().fold(0.0f64, |a, s| a.max(s.abs()));
        let g_new = grad(&x_new);

        // BFGS update on the inverse Hessian (skip when curvature is bad).
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy: f64 = step.iter().zip(&y).map(|(s, yi)| s * yi).sum();
        let s_norm = step.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if sy > 1e-10 * s_norm * y_norm {
            bfgs_update(&mut h, &step, &y, sy);
        }

        let f_delta = (fx - f_new).abs();
        x = x_new;
        fx = f_new;
        g = g_new;

        if f_delta < opts.f_tol * (1.0 + fx.abs()) && step_max < opts.step_tol {
            return OptimOutcome {
                x,
                f: fx,
                iterations: iter,
                converged: true,
            };
        }
    }

    OptimOutcome {
        x,
        f: fx,
        iterations: opts.max_iterations,
        converged: false,
    }
}

/// Unconstrained minimization through the smooth reparameterization
/// `x_i = bound_i * tanh(eta_i)`; used as a fallback when the boxed run
/// finishes pinned at a bound.
pub fn minimize_tanh<F, G>(
    f: &F,
    grad: &G,
    x0: &[f64],
    bound: f64,
    opts: &OptimOptions,
) -> OptimOutcome
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let to_x = |eta: &[f64]| -> Vec<f64> { eta.iter().map(|e| bound * e.tanh()).collect() };
    let eta0: Vec<f64> = x0
        .iter()
        .map(|&x| {
            let r = (x / bound).clamp(-1.0 + 1e-12, 1.0 - 1e-12);
            r.atanh()
        })
        .collect();
    let f_eta = |eta: &[f64]| f(&to_x(eta));
    let g_eta = |eta: &[f64]| -> Vec<f64> {
        let x = to_x(eta);
        let gx = grad(&x);
        (0..n)
            .map(|i| gx[i] * bound * (1.0 - eta[i].tanh().powi(2)))
            .collect()
    };
    let wide = vec![-20.0; n];
    let wide_hi = vec![20.0; n];
    let out = minimize_box(&f_eta, &g_eta, &eta0, &wide, &wide_hi, opts);
    OptimOutcome {
        x: to_x(&out.x),
        f: out.f,
        iterations: out.iterations,
        converged: out.converged,
    }
}

/// Central-difference gradient with step `h_i = scale * max(1, |x_i|)`.
pub fn central_difference<F>(f: &F, x: &[f64], scale: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut work = x.to_vec();
    for i in 0..n {
        let h = scale * x[i].abs().max(1.0);
        let xi = x[i];
        work[i] = xi + h;
        let fu = f(&work);
        work[i] = xi - h;
        let fd = f(&work);
        work[i] = xi;
        g[i] = (fu - fd) / (2.0 * h);
    }
    g
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn neg_mat_vec(h: &[f64], g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let row = &h[i * n..(i + 1) * n];
        out[i] = -row.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
    }
    out
}

/// Sherman-Morrison form of the BFGS inverse update:
/// `H <- (I - s y'/sy) H (I - y s'/sy) + s s'/sy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let mut hy = vec![0.0; n];
    for i in 0..n {
        hy[i] = h[i * n..(i + 1) * n]
            .iter()
            .zip(y)
            .map(|(a, b)| a * b)
            .sum();
    }
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    let c = (1.0 + yhy / sy) / sy;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += c * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(center: &[f64]) -> impl Fn(&[f64]) -> f64 + '_ {
        move |x: &[f64]| {
            x.iter()
                .zip(center)
                .enumerate()
                .map(|(i, (xi, ci))| (i + 1) as f64 * (xi - ci).powi(2))
                .sum()
        }
    }

    #[test]
    fn finds_interior_quadratic_minimum() {
        let center = [0.3, -0.4, 0.1];
        let f = quadratic(&center);
        let g = |x: &[f64]| central_difference(&f, x, 1e-6);
        let out = minimize_box(
            &f,
            &g,
            &[0.0, 0.0, 0.0],
            &[-1.0; 3],
            &[1.0; 3],
            &OptimOptions::default(),
        );
        assert!(out.converged);
        for (xi, ci) in out.x.iter().zip(&center) {
            assert!((xi - ci).abs() < 1e-6, "{xi} vs {ci}");
        }
    }

    #[test]
    fn respects_active_bound() {
        // Unconstrained minimum at 2.0, box caps at 1.0.
        let f = |x: &[f64]| (x[0] - 2.0).powi(2);
        let g = |x: &[f64]| central_difference(&f, x, 1e-6);
        let out = minimize_box(&f, &g, &[0.0], &[-1.0], &[1.0], &OptimOptions::default());
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rosenbrock_two_dimensional() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let g = |x: &[f64]| central_difference(&f, x, 1e-7);
        let out = minimize_box(
            &f,
            &g,
            &[-1.2, 1.0],
            &[-5.0; 2],
            &[5.0; 2],
            &OptimOptions {
                max_iterations: 2000,
                ..OptimOptions::default()
            },
        );
        assert!(out.converged, "did not converge: {out:?}");
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn tanh_fallback_reaches_interior_optimum() {
        let f = |x: &[f64]| (x[0] - 0.5).powi(2) + (x[1] + 0.25).powi(2);
        let g = |x: &[f64]| central_difference(&f, x, 1e-6);
        let out = minimize_tanh(&f, &g, &[0.9, -0.9], 0.9999999, &OptimOptions::default());
        assert!(out.converged);
        assert!((out.x[0] - 0.5).abs() < 1e-6);
        assert!((out.x[1] + 0.25).abs() < 1e-6);
    }

    #[test]
    fn iteration_budget_is_reported() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let g = |x: &[f64]| central_difference(&f, x, 1e-7);
        let out = minimize_box(
            &f,
            &g,
            &[-1.2, 1.0],
            &[-5.0; 2],
            &[5.0; 2],
            &OptimOptions {
                max_iterations: 3,
                ..OptimOptions::default()
            },
        );
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }
}
