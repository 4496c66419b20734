//! Quasi-Newton minimization with a backtracking line search.

use log::debug;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when the gradient max-norm falls below this...
    pub grad_tol: f64,
    /// ...and the last relative change of the objective is below this.
    pub rel_tol: f64,
    /// A stalled line search is accepted when the gradient max-norm is below this.
    pub stall_grad_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-5,
            rel_tol: 1e-9,
            stall_grad_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub rel_change: f64,
    /// The line search could not improve but the gradient was already small.
    pub stalled: bool,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, which returns the value and gradient. Evaluation errors during
/// the line search are treated as an infinite objective.
pub fn minimize<F>(f: F, x0: &[f64], opts: &BfgsOptions) -> Result<BfgsOutcome>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    minimize_bounded(f, x0, &vec![f64::NEG_INFINITY; x0.len()], opts)
}

/// [`minimize`] subject to `x ≥ lower`, by projection. A coordinate sitting on its
/// bound with a gradient pushing outward is held there and left out of the
/// convergence test.
pub fn minimize_bounded<F>(
    f: F,
    x0: &[f64],
    lower: &[f64],
    opts: &BfgsOptions,
) -> Result<BfgsOutcome>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = x0.len();
    if lower.len() != n {
        return Err(Error::dim("lower bounds", n, lower.len()));
    }
    let project =
        |x: Vec<f64>| -> Vec<f64> { x.into_iter().zip(lower).map(|(v, &l)| v.max(l)).collect() };
    let mut x = project(x0.to_vec());
    let (mut fx, mut g) = f(&x)?;
    if !fx.is_finite() {
        return Err(Error::NonConvergence {
            iterations: 0,
            grad_norm: f64::NAN,
        });
    }
    let identity = |n: usize| {
        let mut h = vec![0.0; n * n];
        (0..n).for_each(|i| h[i * n + i] = 1.0);
        h
    };
    let projected = |x: &[f64], g: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                if x[i] <= lower[i] && g[i] > 0.0 {
                    0.0
                } else {
                    g[i]
                }
            })
            .collect()
    };
    let mut h = identity(n);
    let mut fresh = true;
    let mut rel_change = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let pg = projected(&x, &g);
        let gn = max_norm(&pg);
        if n == 0 || (gn < opts.grad_tol && (iter == 0 || rel_change < opts.rel_tol)) {
            return Ok(BfgsOutcome {
                x,
                f: fx,
                grad: g,
                iterations: iter,
                grad_norm: gn,
                rel_change,
                stalled: false,
            });
        }
        let direction = |h: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    if pg[i] == 0.0 && g[i] != 0.0 {
                        0.0
                    } else {
                        -dot(&h[i * n..(i + 1) * n], &pg)
                    }
                })
                .collect()
        };
        let mut d = direction(&h);
        if dot(&pg, &d) >= 0.0 {
            h = identity(n);
            fresh = true;
            d = direction(&h);
        }
        let mut step = if fresh {
            (1.0 / max_norm(&d)).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            let xn = project(x.iter().zip(&d).map(|(a, b)| a + step * b).collect());
            let moved: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            if let Ok((fnew, gnew)) = f(&xn) {
                if fnew.is_finite() && fnew <= fx + 1e-4 * dot(&g, &moved) {
                    accepted = Some((xn, fnew, gnew));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            if !fresh {
                debug!("line search failed at iteration {iter}; resetting curvature");
                h = identity(n);
                fresh = true;
                continue;
            }
            if gn < opts.stall_grad_tol {
                return Ok(BfgsOutcome {
                    x,
                    f: fx,
                    grad: g,
                    iterations: iter,
                    grad_norm: gn,
                    rel_change,
                    stalled: true,
                });
            }
            return Err(Error::NonConvergence {
                iterations: iter,
                grad_norm: gn,
            });
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if fresh {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= scale);
            }
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            fresh = false;
        }
        rel_change = (fx - fnew).abs() / fx.abs().max(1.0);
        x = xn;
        fx = fnew;
        g = gnew;
        debug!(
            "iteration {iter}: f = {fx:.6}, |g| = {:.3e}",
            max_norm(&projected(&x, &g))
        );
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        grad_norm: max_norm(&projected(&x, &g)),
    })
}
