//! Dormand–Prince 5(4) for complex linear systems with a step-size cap.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type State = DVector<Complex64>;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Steps below this fraction of the interval length count as collapse.
pub const MIN_STEP_FRACTION: f64 = 1e-12;
const MAX_STEPS: usize = 50_000_000;

#[derive(Clone, Debug)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates `y' = f(t, y)` from `t0` and records the state at every
/// sample time (ascending, inside `[t0, t1]`). The local error estimate is
/// kept below `tol · max(|y_n|, |y_{n+1}|)`; `max_step(t)` caps the step.
pub fn integrate(
    f: impl Fn(f64, &State) -> State,
    max_step: impl Fn(f64) -> f64,
    y0: State,
    (t0, t1): (f64, f64),
    samples: &[f64],
    tol: f64,
) -> Result<Solution> {
    let span = t1 - t0;
    if !(span > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("bad interval [{t0}, {t1}] or tolerance {tol}")));
    }
    let h_min = MIN_STEP_FRACTION * span;
    let mut sol = Solution { times: Vec::new(), states: Vec::new(), accepted: 0, rejected: 0 };
    let mut next = 0;
    while next < samples.len() && samples[next] <= t0 {
        sol.times.push(samples[next]);
        sol.states.push(y0.clone());
        next += 1;
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = max_step(t).min(0.01 * span);
    let mut k: Vec<State> = Vec::with_capacity(7);
    for _ in 0..MAX_STEPS {
        if t >= t1 {
            break;
        }
        let stop = samples.get(next).copied().unwrap_or(t1).min(t1);
        let cap = max_step(t);
        let h_try = h.min(cap);
        let clipped = t + h_try >= stop;
        let step = if clipped { stop - t } else { h_try };

        k.clear();
        k.push(k1.clone());
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[s][j] != 0.0 {
                    ys.axpy(Complex64::new(step * A[s][j], 0.0), kj, Complex64::new(1.0, 0.0));
                }
            }
            k.push(f(t + C[s] * step, &ys));
        }
        let mut y_new = y.clone();
        for (j, kj) in k.iter().take(6).enumerate() {
            if A[6][j] != 0.0 {
                y_new.axpy(Complex64::new(step * A[6][j], 0.0), kj, Complex64::new(1.0, 0.0));
            }
        }
        let mut err = State::zeros(y.len());
        for (j, kj) in k.iter().enumerate() {
            if E[j] != 0.0 {
                err.axpy(Complex64::new(step * E[j], 0.0), kj, Complex64::new(1.0, 0.0));
            }
        }
        let y_norm = y.norm();
        let new_norm = y_new.norm();
        if !new_norm.is_finite() || new_norm > 1e300 {
            return Err(Error::NonFiniteState { t });
        }
        let scale = tol * y_norm.max(new_norm).max(f64::MIN_POSITIVE);
        let ratio = err.norm() / scale;
        if !ratio.is_finite() {
            return Err(Error::NonFiniteState { t });
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        if ratio <= 1.0 {
            t = if clipped { stop } else { t + step };
            y = y_new;
            k1 = k.pop().expect("seven stages");
            sol.accepted += 1;
            if !clipped {
                h = step * factor;
            } else {
                h = h.max(step * factor);
            }
            while next < samples.len() && samples[next] <= t {
                sol.times.push(samples[next]);
                sol.states.push(y.clone());
                next += 1;
            }
        } else {
            sol.rejected += 1;
            h = step * factor;
            if h < h_min {
                return Err(Error::StiffnessFailure { t, step: h });
            }
        }
    }
    if t < t1 {
        return Err(Error::StiffnessFailure { t, step: h });
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(c: Complex64) -> State {
        State::from_vec(vec![c])
    }

    #[test]
    fn oscillator_phase() {
        // y' = iωy
        let w = 20.0;
        let f = |_: f64, y: &State| y * Complex64::new(0.0, w);
        let sol = integrate(f, |_| 0.5 / (1.0 + w), scalar(Complex64::new(1.0, 0.0)), (0.0, 1.0), &[0.5, 1.0], 1e-10).unwrap();
        let exact = Complex64::from_polar(1.0, w);
        assert!((sol.states[1][0] - exact).norm() < 1e-8);
        assert!((sol.states[0][0] - Complex64::from_polar(1.0, 0.5 * w)).norm() < 1e-8);
    }

    #[test]
    fn polynomial_exponent() {
        // y' = i t ξ y, y(1) = exp(iξ/2)
        let xi = 50.0;
        let f = |t: f64, y: &State| y * Complex64::new(0.0, t * xi);
        let sol = integrate(f, |_| 0.5 / (1.0 + xi), scalar(Complex64::new(1.0, 0.0)), (0.0, 1.0), &[1.0], 1e-10).unwrap();
        assert!((sol.states[0][0] - Complex64::from_polar(1.0, xi / 2.0)).norm() < 1e-8);
    }

    #[test]
    fn error_decreases_with_tolerance() {
        let w = 10.0;
        let f = |_: f64, y: &State| y * Complex64::new(0.0, w);
        let exact = Complex64::from_polar(1.0, w);
        let errs: Vec<f64> = [1e-5, 1e-7, 1e-9]
            .iter()
            .map(|&tol| {
                let sol = integrate(f, |_| 1.0, scalar(Complex64::new(1.0, 0.0)), (0.0, 1.0), &[1.0], tol).unwrap();
                (sol.states[0][0] - exact).norm()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn overflow_is_reported() {
        let f = |_: f64, y: &State| y * Complex64::new(2000.0, 0.0);
        let err = integrate(f, |_| 1.0, scalar(Complex64::new(1.0, 0.0)), (0.0, 1.0), &[1.0], 1e-6).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { .. }));
    }
}
