//! Symplectic invariants of a focus-focus point, the coefficients of the
//! periodic flow, the regularized form and its monodromy, and a direct
//! numerical in-out measurement through the pinched torus.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bethe::BetheData;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::normal::{normal_coordinates, normal_generator_coeffs, state_from_normal};
use crate::ode::evolve_sampled;
use crate::poly::C64;
use crate::quad::simpson_weights;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn reduce_angle(g: f64) -> f64 {
    let mut g = g % (2.0 * PI);
    if g <= -PI {
        g += 2.0 * PI;
    } else if g > PI {
        g -= 2.0 * PI;
    }
    g
}

fn check_pair(bethe: &BetheData, j: usize) -> Result<()> {
    bethe.require_focus_focus()?;
    if j >= bethe.m() {
        return Err(Error::InvalidParams(format!(
            "focus index {} out of range (m = {})",
            j + 1,
            bethe.m()
        )));
    }
    Ok(())
}

/// rho_j e^{i gamma_j} as a complex number.
pub fn diagonal_invariant_complex(params: &ModelParams, bethe: &BetheData, j: usize) -> Result<C64> {
    check_pair(bethe, j)?;
    let (e, eb) = (bethe.upper(j), bethe.lower(j));
    let mut v = -16.0 / (I * bethe.aprime_lower(j)) * (eb - e).powi(4);
    for k in 0..bethe.m() {
        if k != j {
            v *= (eb - bethe.lower(k)).powi(2) * (eb - bethe.upper(k)).powi(2);
        }
    }
    for &eps in &params.epsilon {
        v /= (eb - eps) * (eb - eps);
    }
    Ok(v)
}

/// (rho_j, gamma_j) with gamma in (-pi, pi].
pub fn diagonal_invariant(params: &ModelParams, bethe: &BetheData, j: usize) -> Result<(f64, f64)> {
    let v = diagonal_invariant_complex(params, bethe, j)?;
    Ok((v.norm(), reduce_angle(v.arg())))
}

/// -(8/s) (2s - eps^2)^{3/2} (-eps + i sqrt(2s - eps^2)).
pub fn one_spin_closed_form(s: f64, eps1: f64) -> Result<C64> {
    let d = 2.0 * s - eps1 * eps1;
    if !(d > 0.0) || !(s > 0.0) {
        return Err(Error::NotFocusFocus);
    }
    Ok(-(8.0 / s) * d.powf(1.5) * C64::new(-eps1, d.sqrt()))
}

/// rho_zk and rho_wk for k != j, in pair order.
pub fn offdiagonal_invariants(bethe: &BetheData, j: usize) -> Result<(Vec<C64>, Vec<C64>)> {
    check_pair(bethe, j)?;
    let (e, eb) = (bethe.upper(j), bethe.lower(j));
    let mut rz = Vec::new();
    let mut rw = Vec::new();
    for k in (0..bethe.m()).filter(|&k| k != j) {
        let ek = bethe.upper(k);
        rz.push(((ek - e) / (ek - eb)).powi(2));
        rw.push(((ek - eb) / (ek - e)).powi(2).conj());
    }
    Ok((rz, rw))
}

/// Periodic-flow coefficients on the fiber with K_j + i L_j = c, taking
/// arg c as given (so the caller can follow it continuously).
pub fn periodic_coeffs_with_arg(
    params: &ModelParams,
    bethe: &BetheData,
    j: usize,
    modulus: f64,
    arg: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if modulus == 0.0 {
        return Err(Error::SingularFiber);
    }
    let (rho, gamma) = diagonal_invariant(params, bethe, j)?;
    let (rz, _) = offdiagonal_invariants(bethe, j)?;
    let m = bethe.m();
    let mut alpha = vec![0.0; m];
    let mut beta = vec![0.0; m];
    alpha[j] = -(modulus / rho).ln() / (2.0 * PI);
    beta[j] = (arg - gamma) / (2.0 * PI);
    for (k, r) in (0..m).filter(|&k| k != j).zip(rz) {
        alpha[k] = -r.norm().ln() / (2.0 * PI);
        let mut b = -r.arg() / (2.0 * PI);
        if b <= -0.5 {
            b += 1.0;
        }
        beta[k] = b;
    }
    Ok((alpha, beta))
}

pub fn periodic_coeffs(params: &ModelParams, bethe: &BetheData, j: usize, c: C64) -> Result<(Vec<f64>, Vec<f64>)> {
    periodic_coeffs_with_arg(params, bethe, j, c.norm(), c.arg())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmegaForm {
    /// Coefficients of (dK_1, dL_1, dK_2, dL_2, ...).
    pub full: Vec<f64>,
    pub singular: Vec<f64>,
    pub regular: Vec<f64>,
}

/// Omega^(j) at the point with c_j = K_j + i L_j, split into the singular
/// part -(1/4 pi)(log c dc + log cbar dcbar) and the regular remainder.
pub fn omega_form(params: &ModelParams, bethe: &BetheData, j: usize, c: C64) -> Result<OmegaForm> {
    let (alpha, beta) = periodic_coeffs(params, bethe, j, c)?;
    let m = bethe.m();
    let mut full = Vec::with_capacity(2 * m);
    for k in 0..m {
        full.push(alpha[k]);
        full.push(beta[k]);
    }
    let mut singular = vec![0.0; 2 * m];
    singular[2 * j] = -c.norm().ln() / (2.0 * PI);
    singular[2 * j + 1] = c.arg() / (2.0 * PI);
    let regular = full.iter().zip(&singular).map(|(f, s)| f - s).collect();
    Ok(OmegaForm {
        full,
        singular,
        regular,
    })
}

/// Omega^reg on the singular fiber: (log rho_j / 2 pi, -gamma_j / 2 pi) on
/// (dK_j, dL_j) and (alpha_k, beta_k) elsewhere.
pub fn omega_regular(params: &ModelParams, bethe: &BetheData, j: usize) -> Result<Vec<f64>> {
    let (rho, gamma) = diagonal_invariant(params, bethe, j)?;
    let (alpha, beta) = periodic_coeffs(params, bethe, j, C64::new(1.0, 0.0))?;
    let mut out = Vec::with_capacity(2 * bethe.m());
    for k in 0..bethe.m() {
        if k == j {
            out.push(rho.ln() / (2.0 * PI));
            out.push(-gamma / (2.0 * PI));
        } else {
            out.push(alpha[k]);
            out.push(beta[k]);
        }
    }
    Ok(out)
}

/// Integral of Omega^(j) around the loop c_k = radius e^{i theta},
/// theta in [gamma_k, gamma_k + 2 pi], with composite Simpson. The other
/// c's are held at their value at the loop's base point (c_j = radius e^{i gamma_j}
/// when k != j). arg c_j is followed continuously.
pub fn monodromy_integral(
    params: &ModelParams,
    bethe: &BetheData,
    j: usize,
    k: usize,
    radius: f64,
    samples: usize,
) -> Result<f64> {
    check_pair(bethe, j)?;
    check_pair(bethe, k)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidParams(format!("radius must be positive, got {radius}")));
    }
    let n = samples.max(2) + samples % 2;
    let (_, gamma) = diagonal_invariant(params, bethe, j)?;
    let g0 = if k == j { gamma } else { 0.0 };
    let h = 2.0 * PI / n as f64;
    let w = simpson_weights(n, h);
    let mut acc = 0.0;
    for (s, ws) in w.iter().enumerate() {
        let th = g0 + s as f64 * h;
        let (alpha, beta) = if k == j {
            periodic_coeffs_with_arg(params, bethe, j, radius, th)?
        } else {
            periodic_coeffs_with_arg(params, bethe, j, radius, gamma)?
        };
        // dK = -r sin, dL = r cos along the loop
        acc += ws * (alpha[k] * (-radius * th.sin()) + beta[k] * radius * th.cos());
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    /// 1-based focus index.
    pub j: usize,
    pub rho: f64,
    pub gamma: f64,
    pub rho_z: Vec<C64>,
    pub rho_w: Vec<C64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub omega_reg: Vec<f64>,
    /// Measured Phi^0 and the duration 2T it refers to, when available.
    pub phi0: Option<(C64, f64)>,
}

/// Closed-form report; alpha and beta refer to the fiber c_j = 1.
pub fn invariant_report(params: &ModelParams, bethe: &BetheData, j: usize) -> Result<InvariantReport> {
    let (rho, gamma) = diagonal_invariant(params, bethe, j)?;
    let (rho_z, rho_w) = offdiagonal_invariants(bethe, j)?;
    let (alpha, beta) = periodic_coeffs(params, bethe, j, C64::new(1.0, 0.0))?;
    Ok(InvariantReport {
        j: j + 1,
        rho,
        gamma,
        rho_z,
        rho_w,
        alpha,
        beta,
        omega_reg: omega_regular(params, bethe, j)?,
        phi0: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InOutReport {
    /// Phi^0 = w_j^out conj(z_j^in).
    pub phi0: C64,
    /// c_j e^{(alpha_j - i beta_j) tau}, the value Phi^0 should approach.
    pub phi0_predicted: C64,
    /// z_k^out / z_k^in for k != j.
    pub rho_z: Vec<C64>,
    /// w_k^out / w_k^in for k != j (None where w_k^in = 0).
    pub rho_w: Vec<Option<C64>>,
    /// Duration 2T of the excursion and the remaining time tau.
    pub duration: f64,
    pub tau: f64,
    /// Change of K_j + i L_j between start and end, from the Hamiltonians.
    pub c_drift: f64,
}

/// Start at normal coordinates z_j = delta, w_j = c_j / delta and
/// z_k = delta / 2, w_k = c_k / conj(z_k); flow with alpha_j K_j + beta_j L_j
/// for 2T = 2 pi log(rho / delta^2) / log(rho / |c_j|) and read the normal
/// coordinates again.
pub fn in_out_experiment(
    params: &ModelParams,
    bethe: &BetheData,
    j: usize,
    delta: f64,
    c_values: &[C64],
    tol: f64,
) -> Result<InOutReport> {
    check_pair(bethe, j)?;
    let m = bethe.m();
    if c_values.len() != m {
        return Err(Error::InvalidParams(format!("expected {m} values of c")));
    }
    let cj = c_values[j];
    if cj.norm() == 0.0 {
        return Err(Error::SingularFiber);
    }
    if !(delta > 0.0) || !(cj.norm() <= delta * delta) {
        return Err(Error::InvalidParams("need 0 < |c_j| < delta^2".into()));
    }
    let (rho, _) = diagonal_invariant(params, bethe, j)?;
    let mut z = vec![C64::new(0.5 * delta, 0.0); m];
    z[j] = C64::new(delta, 0.0);
    let w: Vec<C64> = z.iter().zip(c_values).map(|(z, c)| c / z.conj()).collect();
    let state = state_from_normal(params, bethe, &z, &w)?;
    let zin = normal_coordinates(params, bethe, &state)?;

    let (alpha, beta) = periodic_coeffs(params, bethe, j, cj)?;
    let gens = normal_generator_coeffs(params, bethe)?;
    let mut a = vec![0.0; m];
    let mut b = vec![0.0; m];
    a[j] = alpha[j];
    b[j] = beta[j];
    let coeffs = gens.combine(&a, &b);
    let duration = 2.0 * PI * (rho / (delta * delta)).ln() / (rho / cj.norm()).ln();
    let tau = 2.0 * PI - duration;
    if tau < 0.0 {
        return Err(Error::InvalidParams("delta^2 too small for the period".into()));
    }
    let tr = evolve_sampled(params, &state, &coeffs, &[duration], tol)?;
    let out = tr.last();
    let zout = normal_coordinates(params, bethe, out)?;
    let reach = zout
        .z
        .iter()
        .chain(&zout.w)
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if reach > 2.0 * delta {
        return Err(Error::LeftNeighborhood(reach));
    }
    let (k0, l0) = gens.evaluate(params, bethe, &state);
    let (k1, l1) = gens.evaluate(params, bethe, out);
    let c_drift = (C64::new(k1[j], l1[j]) - C64::new(k0[j], l0[j])).norm();

    let others: Vec<usize> = (0..m).filter(|&k| k != j).collect();
    Ok(InOutReport {
        phi0: zout.w[j] * zin.z[j].conj(),
        phi0_predicted: cj * C64::new(alpha[j] * tau, -beta[j] * tau).exp(),
        rho_z: others.iter().map(|&k| zout.z[k] / zin.z[k]).collect(),
        rho_w: others
            .iter()
            .map(|&k| {
                if zin.w[k].norm() == 0.0 {
                    None
                } else {
                    Some(zout.w[k] / zin.w[k])
                }
            })
            .collect(),
        duration,
        tau,
        c_drift,
    })
}
