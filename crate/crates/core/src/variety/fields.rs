//! The commuting vector fields X1, X2, X3 and their constant-mean-curvature generalization.

use super::polynomials::eval_a;
use super::{check_positive, Axis, State};
use crate::error::Result;

/// X_i(q): the tangent field whose flow moves the leaf coordinate u_i.
pub fn eval_x(axis: Axis, q: &State) -> Result<State> {
    let a = eval_a(q)?;
    let [x1, x2, x3, y1, y2, y3] = *q;
    let out = match axis {
        Axis::U1 => {
            let d = x2.powi(4);
            [
                (x2.powi(4) + x2 * x2 * x3 * x3 + x3.powi(4)) * x1 * y1 / d,
                x2.powi(5) * y1 / d,
                x3.powi(5) * y1 / d,
                a[0],
                2.0 * x1 * x1 * x2 * x2 * y1 * y2 / d,
                (8.0 * x3 * x3 + 2.0 * x1 * x1) * x3 * x3 * y1 * y3 / d,
            ]
        }
        Axis::U2 => {
            let d = x3.powi(4);
            [
                x1.powi(5) * y2 / d,
                (x1.powi(4) - x1 * x1 * x3 * x3 + x3.powi(4)) * x2 * y2 / d,
                x3.powi(5) * y2 / d,
                (8.0 * x1 * x1 - 2.0 * x2 * x2) * x1 * x1 * y1 * y2 / d,
                a[1],
                2.0 * x2 * x2 * x3 * x3 * y2 * y3 / d,
            ]
        }
        Axis::U3 => {
            let d = x1.powi(4);
            [
                x1.powi(5) * y3 / d,
                x2.powi(5) * y3 / d,
                (x1.powi(4) + x1 * x1 * x2 * x2 + x2.powi(4)) * x3 * y3 / d,
                -2.0 * x1 * x1 * x3 * x3 * y1 * y3 / d,
                (8.0 * x2 * x2 - 2.0 * x3 * x3) * x2 * x2 * y2 * y3 / d,
                a[2],
            ]
        }
    };
    Ok(out)
}

/// Right-hand side of the reduced system for a holonomic hypersurface with constant
/// mean curvature `h` in a space form of curvature `c`, in direction u_i.
///
/// Slots are (dv1, dv2, dv3, dalpha1, dalpha2, dalpha3) / du_i.
pub fn eval_field_general(axis: Axis, q: &State, h: f64, c: f64) -> Result<State> {
    check_positive(q)?;
    let [v1, v2, v3, a1, a2, a3] = *q;
    let out = match axis {
        Axis::U1 => [
            v1 / v2.powi(4) * (v2.powi(4) + v2 * v2 * v3 * v3 + v3.powi(4)) * a1,
            v2 * a1,
            v3.powi(5) / v2.powi(4) * a1,
            (3.0 * v2.powi(4) - v3.powi(4)) / v2.powi(4) * a1 * a1
                - v1.powi(6) / v3.powi(8) * (3.0 * v1 * v1 - 2.0 * v3 * v3) * a2 * a2
                + v2.powi(4) / (v1 * v1 * v3.powi(4)) * (3.0 * v1 * v1 + 2.0 * v2 * v2) * a3 * a3
                + (5.0 * v1.powi(4) + 2.0 * v2 * v2 * v3 * v3) / (9.0 * v3.powi(4))
                - v1 * v1 * v2 * v2 / (v3 * v3) * c
                + v1 * v2 / (18.0 * v3.powi(3)) * (v2 * v2 + v3 * v3 - 2.0 * v1 * v2 * v3 * h) * h,
            2.0 * v1 * v1 / (v2 * v2) * a1 * a2,
            2.0 * v3 * v3 / v2.powi(4) * (4.0 * v3 * v3 + v1 * v1) * a1 * a3,
        ],
        Axis::U2 => [
            v1.powi(5) / v3.powi(4) * a2,
            v2 / v3.powi(4) * (v1.powi(4) - v1 * v1 * v3 * v3 + v3.powi(4)) * a2,
            v3 * a2,
            2.0 * v1 * v1 / v3.powi(4) * (4.0 * v1 * v1 - v2 * v2) * a1 * a2,
            -v3.powi(4) / (v1.powi(4) * v2 * v2) * (3.0 * v2 * v2 + 2.0 * v3 * v3) * a1 * a1
                - (v1.powi(4) - 3.0 * v3.powi(4)) / v3.powi(4) * a2 * a2
                - v2.powi(6) / v1.powi(8) * (2.0 * v1 * v1 + 3.0 * v2 * v2) * a3 * a3
                - (5.0 * v2.powi(4) - 2.0 * v1 * v1 * v3 * v3) / (9.0 * v1.powi(4))
                + v2 * v2 * v3 * v3 / (v1 * v1) * c
                - v2 * v3 / (18.0 * v1.powi(3)) * (v1 * v1 - v3 * v3 - 2.0 * v1 * v2 * v3 * h) * h,
            2.0 * v2 * v2 / (v3 * v3) * a2 * a3,
        ],
        Axis::U3 => [
            v1 * a3,
            v2.powi(5) / v1.powi(4) * a3,
            v3 / v1.powi(4) * (v1.powi(4) + v1 * v1 * v2 * v2 + v2.powi(4)) * a3,
            -2.0 * v3 * v3 / (v1 * v1) * a1 * a3,
            2.0 * v2 * v2 / v1.powi(4) * (4.0 * v2 * v2 - v3 * v3) * a2 * a3,
            v3.powi(6) / v2.powi(8) * (2.0 * v2 * v2 + 3.0 * v3 * v3) * a1 * a1
                + v1.powi(4) / (v2.powi(4) * v3 * v3) * (2.0 * v1 * v1 - 3.0 * v3 * v3) * a2 * a2
                + (3.0 * v1.powi(4) - v2.powi(4)) / v1.powi(4) * a3 * a3
                + (5.0 * v3.powi(4) + 2.0 * v1 * v1 * v2 * v2) / (9.0 * v2.powi(4))
                - v1 * v1 * v3 * v3 / (v2 * v2) * c
                - v1 * v3 / (18.0 * v2.powi(3)) * (v1 * v1 + v2 * v2 + 2.0 * v1 * v2 * v3 * h) * h,
        ],
    };
    Ok(out)
}

/// The algebraic obstruction to constant mean curvature.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CmcObstruction {
    pub m: [f64; 3],
    /// F/(27 v1 v2 v3), the normalization used by the constant mean curvature relations.
    pub f_reduced: f64,
    /// Bracketed factors that multiply alpha2, alpha3 and alpha1 respectively.
    pub relations: [f64; 3],
}

/// Evaluates m1, m2, m3, the reduced F and the three relation residuals at (q, H, c).
pub fn cmc_obstruction(q: &State, h: f64, c: f64) -> Result<CmcObstruction> {
    check_positive(q)?;
    let [v1, v2, v3, ..] = *q;
    let vvv = v1 * v2 * v3;
    let m1 = (v2 * v2 + 4.0 * v3 * v3) * (4.0 * v2 * v2 + v3 * v3) - 8.0 * vvv * (v2 * v2 + v3 * v3) * h;
    let m2 = (v1 * v1 - 4.0 * v3 * v3) * (4.0 * v1 * v1 - v3 * v3) - 8.0 * vvv * (v1 * v1 - v3 * v3) * h;
    let m3 = (v1 * v1 + 4.0 * v2 * v2) * (4.0 * v1 * v1 + v2 * v2) + 8.0 * vvv * (v1 * v1 + v2 * v2) * h;
    let f = super::polynomials::eval_f(q) / (27.0 * vvv);
    let r1 = 30.0 * v1 / (v2 * v3.powi(9)) * f - 4.0 * v1.powi(4) * v2 * v2 / v3.powi(6) * (v1 * v1 - v3 * v3) * c
        + v1.powi(3) * v2 / (18.0 * v3.powi(7)) * m2 * h;
    let r2 = 30.0 * v2 / (v1.powi(9) * v3) * f + 4.0 * v2.powi(4) * v3 * v3 / v1.powi(6) * (v1 * v1 + v2 * v2) * c
        + v3 * v2.powi(3) / (18.0 * v1.powi(7)) * m3 * h;
    let r3 = 30.0 * v3 / (v1 * v2.powi(9)) * f - 4.0 * v1 * v1 * v3.powi(4) / v2.powi(6) * (v2 * v2 + v3 * v3) * c
        + v1 * v3.powi(3) / (18.0 * v2.powi(7)) * m1 * h;
    Ok(CmcObstruction { m: [m1, m2, m3], f_reduced: f, relations: [r1, r2, r3] })
}

/// H^2 - 7(v1^2 + v2^2) H / (8 v1 v2 v3) + 9c, the quadratic a constant mean curvature
/// state with two nonvanishing alphas must annihilate.
pub fn cmc_quadratic(q: &State, h: f64, c: f64) -> Result<f64> {
    check_positive(q)?;
    let [v1, v2, v3, ..] = *q;
    Ok(h * h - 7.0 * (v1 * v1 + v2 * v2) * h / (8.0 * v1 * v2 * v3) + 9.0 * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;
    const L_PLUS: State = [1.0, SQRT2, 1.0, 0.0, 1.0, 0.0];

    #[test]
    fn x2_on_positive_line_is_radial() {
        let x = eval_x(Axis::U2, &L_PLUS).unwrap();
        let want = [1.0, SQRT2, 1.0, 0.0, 0.0, 0.0];
        for k in 0..6 {
            assert!((x[k] - want[k]).abs() < 1e-14, "{x:?}");
        }
    }

    #[test]
    fn x1_and_x3_vanish_on_positive_line() {
        for axis in [Axis::U1, Axis::U3] {
            let x = eval_x(axis, &L_PLUS).unwrap();
            assert!(x.iter().all(|v| v.abs() < 1e-14), "{x:?}");
        }
    }

    #[test]
    fn general_field_reduces_at_zero_curvature() {
        let q = [1.3, 2.1, 0.7, -0.4, 0.9, 1.6];
        for axis in Axis::ALL {
            let a = eval_field_general(axis, &q, 0.0, 0.0).unwrap();
            let b = eval_x(axis, &q).unwrap();
            for k in 0..6 {
                assert!((a[k] - b[k]).abs() <= 1e-12 * b[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn cone_alpha2_slot_of_direction_two_vanishes() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let q = [r, 1.0, r, 0.0, 1.0, 0.0];
        let out = eval_field_general(Axis::U2, &q, 0.0, 0.0).unwrap();
        assert!(out[4].abs() < 1e-14);
    }

    #[test]
    fn mean_curvature_coefficient_of_alpha1_slot() {
        let q = [0.8, 1.7, 1.5, 0.3, -0.2, 0.6];
        let [v1, v2, v3, ..] = q;
        for h0 in [-0.7, 0.0, 0.4] {
            let step = 1e-5;
            let up = eval_field_general(Axis::U1, &q, h0 + step, 0.0).unwrap()[3];
            let dn = eval_field_general(Axis::U1, &q, h0 - step, 0.0).unwrap()[3];
            let fd = (up - dn) / (2.0 * step);
            let want = v1 * v2 * (v2 * v2 + v3 * v3 - 4.0 * v1 * v2 * v3 * h0) / (18.0 * v3.powi(3));
            assert!((fd - want).abs() < 1e-8 * want.abs().max(1.0), "{fd} vs {want}");
        }
    }

    #[test]
    fn obstruction_vanishes_on_line_without_curvature() {
        let o = cmc_obstruction(&L_PLUS, 0.0, 0.0).unwrap();
        assert!(o.relations.iter().all(|r| r.abs() < 1e-12));
        let o = cmc_obstruction(&L_PLUS, 0.1, 0.0).unwrap();
        assert!(o.relations.iter().any(|r| r.abs() > 1e-3));
    }
}
