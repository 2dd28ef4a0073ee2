//! Embedded Dormand–Prince 5(4) integrator for autonomous systems of fixed dimension.

/// Step-size control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 0.05, min_step: 1e-14, max_steps: 1_000_000 }
    }
}

/// What the per-step hook wants the integrator to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// The requested end time was reached.
    Reached,
    /// The hook asked to stop.
    Stopped,
    /// The step size fell below `min_step` or the step budget ran out.
    Underflow,
}

#[derive(Debug, Clone)]
pub struct Integration<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
    pub outcome: Outcome,
}

// Dormand–Prince coefficients; the system is autonomous so the nodes c_i are not needed
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step of size `h`: returns the 5th-order solution and the
/// embedded error estimate, or `None` if the right-hand side failed or produced
/// non-finite values.
fn dp_step<const N: usize, F>(rhs: &mut F, y: &[f64; N], h: f64) -> Option<([f64; N], [f64; N])>
where
    F: FnMut(&[f64; N]) -> Option<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    for s in 0..7 {
        let mut stage = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    stage[i] += h * a * kj[i];
                }
            }
        }
        let f = rhs(&stage)?;
        if f.iter().any(|v| !v.is_finite()) {
            return None;
        }
        k[s] = f;
    }
    let mut y5 = *y;
    let mut err = [0.0; N];
    for i in 0..N {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        err[i] = h * (d5 - d4);
    }
    Some((y5, err))
}

/// Integrates y' = rhs(y) from t = 0 to `t_end` (either sign).
///
/// `after_step` runs after every accepted step and may modify the state in place
/// (constraint projection) or stop the integration.
pub fn integrate<const N: usize, F, H>(
    mut rhs: F,
    y0: [f64; N],
    t_end: f64,
    ctl: &StepControl,
    mut after_step: H,
) -> Integration<N>
where
    F: FnMut(&[f64; N]) -> Option<[f64; N]>,
    H: FnMut(f64, &mut [f64; N]) -> Control,
{
    let direction = if t_end < 0.0 { -1.0 } else { 1.0 };
    let span = t_end.abs();
    let mut out = Integration { t: 0.0, y: y0, accepted: 0, rejected: 0, outcome: Outcome::Reached };
    if span == 0.0 {
        return out;
    }
    let mut step = ctl.max_step.min(span);
    let mut elapsed = 0.0;
    loop {
        let remaining = span - elapsed;
        if remaining <= 1e-14 * span.max(1.0) {
            out.t = t_end;
            return out;
        }
        if out.accepted + out.rejected >= ctl.max_steps {
            out.outcome = Outcome::Underflow;
            return out;
        }
        let last = step >= remaining;
        let h = if last { remaining } else { step };
        let trial = dp_step(&mut rhs, &out.y, direction * h);
        let (ynew, err) = match trial.filter(|(y, e)| y.iter().chain(e).all(|v| v.is_finite())) {
            Some(v) => v,
            None => {
                out.rejected += 1;
                step = h * 0.2;
                if step < ctl.min_step {
                    out.outcome = Outcome::Underflow;
                    return out;
                }
                continue;
            }
        };
        let mut sum = 0.0;
        for i in 0..N {
            let scale = ctl.abs_tol + ctl.rel_tol * out.y[i].abs().max(ynew[i].abs());
            sum += (err[i] / scale).powi(2);
        }
        let norm = (sum / N as f64).sqrt();
        if norm <= 1.0 {
            elapsed = if last { span } else { elapsed + h };
            out.y = ynew;
            out.t = direction * elapsed;
            out.accepted += 1;
            let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
            step = (h * factor).min(ctl.max_step);
            if after_step(out.t, &mut out.y) == Control::Stop {
                out.outcome = Outcome::Stopped;
                return out;
            }
            if last {
                out.t = t_end;
                return out;
            }
        } else {
            out.rejected += 1;
            step = h * (0.9 * norm.powf(-0.2)).clamp(0.2, 1.0);
            if step < ctl.min_step {
                out.outcome = Outcome::Underflow;
                return out;
            }
        }
    }
}
