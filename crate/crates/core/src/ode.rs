//! Adaptive Dormand-Prince 5(4) integration of the Hamiltonian flows.

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::model::{flow_field, hamiltonians, ModelParams, PhaseState};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Spin norm drift that triggers a projection back onto the spheres.
pub const RENORM_THRESHOLD: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    /// max_j |H_j(end) - H_j(start)| / (1 + |H_j(start)|)
    pub hamiltonian_drift: f64,
    /// Largest spin-norm error seen before any projection.
    pub max_casimir_error: f64,
    pub renormalizations: usize,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("trajectory is never empty")
    }
}

enum Output<'a> {
    EveryStep,
    At(&'a [f64]),
}

/// Integrate the flow of sum_i coeffs[i] H_i for `duration` (may be negative),
/// recording every accepted step.
pub fn evolve(
    params: &ModelParams,
    state: &PhaseState,
    coeffs: &[f64],
    duration: f64,
    tol: f64,
) -> Result<Trajectory> {
    integrate(params, state, coeffs, duration, tol, Output::EveryStep)
}

/// Integrate and report the state exactly at the requested times, which must
/// be sorted in the direction of integration and start at or after 0.
pub fn evolve_sampled(
    params: &ModelParams,
    state: &PhaseState,
    coeffs: &[f64],
    times: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    let duration = times.last().copied().unwrap_or(0.0);
    integrate(params, state, coeffs, duration, tol, Output::At(times))
}

/// Final state only.
pub fn evolve_to(
    params: &ModelParams,
    state: &PhaseState,
    coeffs: &[f64],
    duration: f64,
    tol: f64,
) -> Result<PhaseState> {
    let tr = evolve_sampled(params, state, coeffs, &[duration], tol)?;
    Ok(tr.last().clone())
}

fn integrate(
    params: &ModelParams,
    state: &PhaseState,
    coeffs: &[f64],
    duration: f64,
    tol: f64,
    output: Output,
) -> Result<Trajectory> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    if coeffs.len() != params.n + 1 {
        return Err(Error::InvalidParams(format!(
            "expected {} flow coefficients, got {}",
            params.n + 1,
            coeffs.len()
        )));
    }
    let h_start = hamiltonians(params, state);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![state.clone()],
        hamiltonian_drift: 0.0,
        max_casimir_error: 0.0,
        renormalizations: 0,
        steps: 0,
    };
    let mut targets: Vec<f64> = match output {
        Output::EveryStep => Vec::new(),
        Output::At(ts) => {
            traj.times.clear();
            traj.states.clear();
            ts.to_vec()
        }
    };
    targets.reverse();
    while let Some(&t0) = targets.last() {
        if t0 * duration.signum() > 0.0 {
            break;
        }
        traj.times.push(t0);
        traj.states.push(state.clone());
        targets.pop();
    }
    if duration == 0.0 {
        return Ok(traj);
    }

    let dir = duration.signum();
    let span = duration.abs();
    let rhs = |y: &[f64]| -> Vec<f64> {
        flow_field(params, &PhaseState::from_slice(y), coeffs).to_vec()
    };

    let mut y = state.to_vec();
    let mut t = 0.0_f64;
    let mut h = initial_step(&rhs, &y, tol, span);
    let mut k1 = rhs(&y);
    let dim = y.len();
    let min_step = 1e-14 * span;

    while t < span {
        // next stopping point: either a requested sample or the end
        let stop = targets.last().map_or(span, |s| s.abs().min(span));
        let h_free = h;
        let hit = t + h >= stop;
        if hit {
            h = stop - t;
        }
        let mut k = vec![k1.clone()];
        let mut ytmp = vec![0.0; dim];
        for stage in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += A[stage][j] * kj[i];
                }
                ytmp[i] = y[i] + dir * h * acc;
            }
            k.push(rhs(&ytmp));
        }
        // ytmp holds the 5th order solution (last row of A equals B5).
        let mut err: f64 = 0.0;
        for i in 0..dim {
            let mut e = 0.0;
            for s in 0..7 {
                e += (B5[s] - B4[s]) * k[s][i];
            }
            let sc = tol * (1.0 + y[i].abs().max(ytmp[i].abs()));
            err = err.max((h * e).abs() / sc);
        }
        if !err.is_finite() {
            return Err(Error::IntegratorFailure(format!("non-finite state at t = {}", dir * t)));
        }
        let h_used = h;
        if err <= 1.0 {
            y = ytmp;
            t = if hit { stop } else { t + h };
            traj.steps += 1;
            k1 = k.pop().expect("seven stages");
            let mut st = PhaseState::from_slice(&y);
            let drift = st.casimir_error(params.s);
            traj.max_casimir_error = traj.max_casimir_error.max(drift);
            if drift > RENORM_THRESHOLD * params.s.max(1.0) {
                st.renormalize(params.s);
                y = st.to_vec();
                k1 = rhs(&y);
                traj.renormalizations += 1;
            }
            match output {
                Output::EveryStep => {
                    traj.times.push(dir * t);
                    traj.states.push(st);
                }
                Output::At(_) => {
                    while let Some(&target) = targets.last() {
                        if target.abs() > t {
                            break;
                        }
                        traj.times.push(target);
                        traj.states.push(st.clone());
                        targets.pop();
                    }
                }
            }
        }
        let fac = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
        h = h_used * fac.clamp(0.2, 5.0);
        if hit && err <= 1.0 {
            h = h.max(h_free);
        }
        if h < min_step && span - t > min_step {
            return Err(Error::StepSizeUnderflow { t: dir * t, step: h });
        }
    }
    if traj.renormalizations > 0 {
        debug!(
            "spin norms projected {} times over {} steps",
            traj.renormalizations, traj.steps
        );
    }
    if !targets.is_empty() {
        warn!("{} sample times beyond the integration span were dropped", targets.len());
    }
    let end = PhaseState::from_slice(&y);
    let h_end = hamiltonians(params, &end);
    traj.hamiltonian_drift = h_start
        .values
        .iter()
        .zip(&h_end.values)
        .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
        .fold(0.0, f64::max);
    Ok(traj)
}

fn initial_step<F: Fn(&[f64]) -> Vec<f64>>(rhs: &F, y: &[f64], tol: f64, span: f64) -> f64 {
    let f0 = rhs(y);
    let d0 = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let d1 = f0.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let h = if d1 < 1e-12 { 1e-2 * span } else { 0.1 * tol.powf(0.2) * (1.0 + d0) / d1 };
    h.min(span).max(1e-10 * span)
}
