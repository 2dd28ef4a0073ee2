//! The constraint polynomials G and F, their gradients and the functions A1, A2, A3.

use super::{check_positive, State};
use crate::error::Result;

/// G(x, y) = x2^2 - x1^2 - x3^2.
pub fn eval_g(q: &State) -> f64 {
    let [x1, x2, x3, ..] = *q;
    x2 * x2 - x1 * x1 - x3 * x3
}

/// Gradient of G; it does not depend on y.
pub fn grad_g(q: &State) -> State {
    let [x1, x2, x3, ..] = *q;
    [-2.0 * x1, 2.0 * x2, -2.0 * x3, 0.0, 0.0, 0.0]
}

/// The degree-12 polynomial F whose zero set (together with G = 0) is the variety.
pub fn eval_f(q: &State) -> f64 {
    let [x1, x2, x3, y1, y2, y3] = *q;
    let (s1, s2, s3) = (x1 * x1, x2 * x2, x3 * x3);
    9.0 * s1 * s3.powi(4) * (s2 + s3) * y1 * y1 + 9.0 * s1.powi(4) * s2 * (s1 - s3) * y2 * y2
        - 9.0 * s2.powi(4) * s3 * (s1 + s2) * y3 * y3
        - s1 * s2 * s3 * constant_bracket(s1, s2, s3)
}

/// 2x1^2x2^4 - 2x1^2x3^4 - 2x2^2x3^4 - x1^2x2^2x3^2, written in the squares s_i = x_i^2.
fn constant_bracket(s1: f64, s2: f64, s3: f64) -> f64 {
    2.0 * s1 * s2 * s2 - 2.0 * s1 * s3 * s3 - 2.0 * s2 * s3 * s3 - s1 * s2 * s3
}

/// |F(q)| / x1^12, the scale-free membership measure.
pub fn f_relative(q: &State) -> f64 {
    eval_f(q).abs() / q[0].powi(12)
}

/// Exact gradient of F.
///
/// Works off the variety as well; x-positivity is only required for parity with the
/// other evaluators, which divide by x.
pub fn grad_f(q: &State) -> Result<State> {
    check_positive(q)?;
    let [x1, x2, x3, y1, y2, y3] = *q;
    let (s1, s2, s3) = (x1 * x1, x2 * x2, x3 * x3);
    let (w1, w2, w3) = (y1 * y1, y2 * y2, y3 * y3);
    let k = constant_bracket(s1, s2, s3);
    // partial derivatives of the bracket with respect to s_i
    let dk1 = 2.0 * s2 * s2 - 2.0 * s3 * s3 - s2 * s3;
    let dk2 = 4.0 * s1 * s2 - 2.0 * s3 * s3 - s1 * s3;
    let dk3 = -4.0 * s1 * s3 - 4.0 * s2 * s3 - s1 * s2;
    // dF/ds_i, then chain rule ds_i/dx_i = 2 x_i
    let df_ds1 = 9.0 * s3.powi(4) * (s2 + s3) * w1
        + 9.0 * s2 * (5.0 * s1.powi(4) - 4.0 * s1.powi(3) * s3) * w2
        - 9.0 * s2.powi(4) * s3 * w3
        - s2 * s3 * (k + s1 * dk1);
    let df_ds2 = 9.0 * s1 * s3.powi(4) * w1 + 9.0 * s1.powi(4) * (s1 - s3) * w2
        - 9.0 * s3 * (4.0 * s1 * s2.powi(3) + 5.0 * s2.powi(4)) * w3
        - s1 * s3 * (k + s2 * dk2);
    let df_ds3 = 9.0 * s1 * (4.0 * s2 * s3.powi(3) + 5.0 * s3.powi(4)) * w1
        - 9.0 * s1.powi(4) * s2 * w2
        - 9.0 * s2.powi(4) * (s1 + s2) * w3
        - s1 * s2 * (k + s3 * dk3);
    Ok([
        2.0 * x1 * df_ds1,
        2.0 * x2 * df_ds2,
        2.0 * x3 * df_ds3,
        18.0 * s1 * s3.powi(4) * (s2 + s3) * y1,
        18.0 * s1.powi(4) * s2 * (s1 - s3) * y2,
        -18.0 * s2.powi(4) * (s1 + s2) * s3 * y3,
    ])
}

/// The gradient components in the reduced form valid on the variety.
///
/// The x-components are the premultiplied expressions x_i dF/dx_i, divided by x_i.
/// They agree with [`grad_f`] only where F = 0 and G = 0.
pub fn grad_f_on_variety(q: &State) -> Result<State> {
    check_positive(q)?;
    let [x1, x2, x3, y1, y2, y3] = *q;
    let p1 = 18.0 * x1.powi(8) * x2.powi(2) * (4.0 * x1.powi(2) - 3.0 * x3.powi(2)) * y2 * y2
        + 18.0 * x2.powi(10) * x3.powi(2) * y3 * y3
        - 2.0
            * x1.powi(4)
            * x2.powi(2)
            * x3.powi(2)
            * (2.0 * x2.powi(4) - x2.powi(2) * x3.powi(2) - 2.0 * x3.powi(4));
    let p2 = -18.0 * x1.powi(2) * x3.powi(10) * y1 * y1
        - 18.0 * x2.powi(8) * x3.powi(2) * (3.0 * x1.powi(2) + 4.0 * x2.powi(2)) * y3 * y3
        - 2.0
            * x1.powi(2)
            * x2.powi(4)
            * x3.powi(2)
            * (4.0 * x1.powi(2) * x2.powi(2) - x1.powi(2) * x3.powi(2) - 2.0 * x3.powi(4));
    let p3 = 18.0 * x1.powi(2) * x3.powi(8) * (3.0 * x2.powi(2) + 4.0 * x3.powi(2)) * y1 * y1
        - 18.0 * x1.powi(10) * x2.powi(2) * y2 * y2
        + 2.0
            * x1.powi(2)
            * x2.powi(2)
            * x3.powi(4)
            * (x1.powi(2) * x2.powi(2)
                + 4.0 * x1.powi(2) * x3.powi(2)
                + 4.0 * x2.powi(2) * x3.powi(2));
    Ok([
        p1 / x1,
        p2 / x2,
        p3 / x3,
        18.0 * x1.powi(2) * x3.powi(8) * (x2.powi(2) + x3.powi(2)) * y1,
        18.0 * x1.powi(8) * x2.powi(2) * (x1.powi(2) - x3.powi(2)) * y2,
        -18.0 * x2.powi(8) * (x1.powi(2) + x2.powi(2)) * x3.powi(2) * y3,
    ])
}

/// The functions (A1, A2, A3) that form the diagonal y-slots of the three fields.
pub fn eval_a(q: &State) -> Result<[f64; 3]> {
    check_positive(q)?;
    let [x1, x2, x3, y1, y2, y3] = *q;
    let a1 = (3.0 * x2.powi(4) - x3.powi(4)) / x2.powi(4) * y1 * y1
        - x1.powi(6) / x3.powi(8) * (3.0 * x1 * x1 - 2.0 * x3 * x3) * y2 * y2
        + x2.powi(4) / (x1 * x1 * x3.powi(4)) * (3.0 * x1 * x1 + 2.0 * x2 * x2) * y3 * y3
        + (5.0 * x1.powi(4) + 2.0 * x2 * x2 * x3 * x3) / (9.0 * x3.powi(4));
    let a2 = -x3.powi(4) / (x1.powi(4) * x2 * x2) * (3.0 * x2 * x2 + 2.0 * x3 * x3) * y1 * y1
        - (x1.powi(4) - 3.0 * x3.powi(4)) / x3.powi(4) * y2 * y2
        - x2.powi(6) / x1.powi(8) * (2.0 * x1 * x1 + 3.0 * x2 * x2) * y3 * y3
        - (5.0 * x2.powi(4) - 2.0 * x1 * x1 * x3 * x3) / (9.0 * x1.powi(4));
    let a3 = x3.powi(6) / x2.powi(8) * (2.0 * x2 * x2 + 3.0 * x3 * x3) * y1 * y1
        + x1.powi(4) / (x2.powi(4) * x3 * x3) * (2.0 * x1 * x1 - 3.0 * x3 * x3) * y2 * y2
        + (3.0 * x1.powi(4) - x2.powi(4)) / x1.powi(4) * y3 * y3
        + (5.0 * x3.powi(4) + 2.0 * x1 * x1 * x2 * x2) / (9.0 * x2.powi(4));
    Ok([a1, a2, a3])
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn g_examples() {
        assert_eq!(eval_g(&[3.0, 5.0, 4.0, 0.0, 0.0, 1.0]), 0.0);
        assert!(eval_g(&[1.0, SQRT2, 1.0, 0.0, 1.0, 0.0]).abs() < 1e-15);
        assert_eq!(eval_g(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]), -1.0);
    }

    #[test]
    fn f_constant_term() {
        let q = [1.0, 5f64.sqrt(), 2.0, 0.0, 0.0, 0.0];
        assert!((eval_f(&q) - 3240.0).abs() < 1e-9);
    }

    #[test]
    fn f_vanishes_on_positive_singular_line() {
        assert!(eval_f(&[1.0, SQRT2, 1.0, 0.0, 1.0, 0.0]).abs() < 1e-13);
    }

    #[test]
    fn gradient_y_components_vanish_on_singular_line() {
        let g = grad_f(&[1.0, SQRT2, 1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(g[3], 0.0);
        assert!(g[4].abs() < 1e-13);
        assert_eq!(g[5], 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let q = [1.0, 5f64.sqrt(), 2.0, 1.0, 2.0, 1.0];
        let g = grad_f(&q).unwrap();
        for k in 0..6 {
            let step = 1e-6;
            let (mut a, mut b) = (q, q);
            a[k] += step;
            b[k] -= step;
            let fd = (eval_f(&a) - eval_f(&b)) / (2.0 * step);
            assert!((fd - g[k]).abs() <= 1e-6 * g[k].abs().max(1.0), "component {k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn a_vanishes_on_singular_line() {
        let a = eval_a(&[1.0, SQRT2, 1.0, 0.0, 1.0, 0.0]).unwrap();
        for v in a {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_positive_x() {
        assert!(eval_a(&[0.0, 1.0, 1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(grad_f(&[1.0, -1.0, 1.0, 0.0, 0.0, 0.0]).is_err());
    }
}
