//! Newton projection back onto {F = 0, G = 0}.

use crate::variety::{eval_f, eval_g, f_relative, grad_f, grad_g, State};

const MAX_ITERATIONS: usize = 5;

/// Moves `q` along span{∇F, ∇G} until |F|/x1^12 and |G|/max(1, x2^2) fall below `tol`.
///
/// Falls back to a G-only correction when the two gradients are nearly parallel.
/// Stops early once the correction reaches roundoff size. Returns whether the
/// tolerance was met.
pub fn project(q: &mut State, tol: f64) -> bool {
    for _ in 0..MAX_ITERATIONS {
        if converged(q, tol) {
            return true;
        }
        let Ok(df) = grad_f(q) else { return false };
        let dg = grad_g(q);
        let (f, g) = (eval_f(q), eval_g(q));
        let ff = dot(&df, &df);
        let fg = dot(&df, &dg);
        let gg = dot(&dg, &dg);
        let det = ff * gg - fg * fg;
        let (a, b) = if det > 1e-12 * ff * gg {
            // minimum-norm correction: J^T (J J^T)^{-1} (-r)
            ((-f * gg + g * fg) / det, (f * fg - g * ff) / det)
        } else if gg > 0.0 {
            (0.0, -g / gg)
        } else {
            return false;
        };
        let mut moved = 0.0;
        for k in 0..6 {
            let delta = a * df[k] + b * dg[k];
            q[k] += delta;
            moved += delta * delta;
        }
        if moved.sqrt() <= 1e-15 * dot(q, q).sqrt() {
            break;
        }
    }
    converged(q, tol)
}

fn converged(q: &State, tol: f64) -> bool {
    f_relative(q) <= tol && eval_g(q).abs() <= tol * q[1].powi(2).max(1.0)
}

fn dot(a: &State, b: &State) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variety::{sample_point, SolveFor};

    #[test]
    fn restores_perturbed_point() {
        let p = sample_point(1.0, 2.0, [1.0, 0.0], SolveFor::Y2, 1.0).unwrap();
        let mut q = *p.state();
        q[0] += 1e-6;
        q[4] -= 1e-5;
        assert!(project(&mut q, 1e-10));
        assert!(f_relative(&q) <= 1e-10);
        assert!(eval_g(&q).abs() <= 1e-12 * q[1] * q[1]);
        let moved: f64 = q.iter().zip(p.state()).map(|(a, b)| (a - b).abs()).sum();
        assert!(moved < 1e-4);
    }
}
