//! Phase space of the Jaynes-Cummings-Gaudin model, its Lax matrix and the
//! n+1 commuting Hamiltonians.
//!
//! Bracket conventions: {s^a, s^b} = -eps_abc s^c, {b, bbar} = i, and a
//! Hamiltonian H generates x_dot = {H, x}. In terms of gradients this is
//! b_dot = -i dH/dbbar and s_j_dot = grad_{s_j} H x s_j, where the Wirtinger
//! derivative is dH/dbbar = (dH/dRe b + i dH/dIm b)/2.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{self, C64};

pub const DEFAULT_GAP_TOL: f64 = 1e-9;
pub const CASIMIR_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: usize,
    pub s: f64,
    pub omega: f64,
    pub epsilon: Vec<f64>,
    pub signs: Vec<i8>,
}

impl ModelParams {
    pub fn new(s: f64, omega: f64, epsilon: Vec<f64>, signs: Vec<i8>) -> Result<Self> {
        let p = ModelParams {
            n: epsilon.len(),
            s,
            omega,
            epsilon,
            signs,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_gap(DEFAULT_GAP_TOL)
    }

    pub fn validate_with_gap(&self, gap_tol: f64) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if !(self.s > 0.0) || !self.s.is_finite() {
            return Err(Error::InvalidParams(format!("s must be positive, got {}", self.s)));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidParams("omega must be finite".into()));
        }
        if self.epsilon.len() != self.n {
            return Err(Error::InvalidParams(format!(
                "epsilon has {} entries, n = {}",
                self.epsilon.len(),
                self.n
            )));
        }
        if self.signs.len() != self.n {
            return Err(Error::InvalidParams(format!(
                "signs has {} entries, n = {}",
                self.signs.len(),
                self.n
            )));
        }
        if let Some(bad) = self.signs.iter().find(|&&e| e != 1 && e != -1) {
            return Err(Error::InvalidParams(format!("sign {bad} is not +1 or -1")));
        }
        for (i, &a) in self.epsilon.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::InvalidParams("epsilon must be finite".into()));
            }
            for &b in &self.epsilon[i + 1..] {
                if (a - b).abs() <= gap_tol {
                    return Err(Error::InvalidParams(format!(
                        "epsilon values {a} and {b} are not distinct"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same model with another sign pattern.
    pub fn with_signs(&self, signs: &[i8]) -> Result<Self> {
        let mut p = self.clone();
        p.signs = signs.to_vec();
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn check_pole(&self, lambda: C64) -> Result<()> {
        for &e in &self.epsilon {
            if (lambda - e).norm() < 1e-9 * (1.0 + e.abs()) {
                return Err(Error::PoleAtEpsilon(e));
            }
        }
        Ok(())
    }

    /// prod_j (lambda - eps_j) as a polynomial.
    pub fn eps_poly(&self) -> Vec<C64> {
        poly::from_real_roots(&self.epsilon)
    }

    /// prod_{k != j} (lambda - eps_k).
    pub fn eps_poly_without(&self, j: usize) -> Vec<C64> {
        let rest: Vec<f64> = self
            .epsilon
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &e)| e)
            .collect();
        poly::from_real_roots(&rest)
    }

    /// prod_{k != j} (eps_j - eps_k).
    pub fn eps_gap_product(&self, j: usize) -> f64 {
        let ej = self.epsilon[j];
        self.epsilon
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &e)| ej - e)
            .product()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState {
    pub b: C64,
    pub spins: Vec<[f64; 3]>,
}

impl PhaseState {
    pub fn s_plus(&self, j: usize) -> C64 {
        C64::new(self.spins[j][0], self.spins[j][1])
    }

    pub fn s_minus(&self, j: usize) -> C64 {
        C64::new(self.spins[j][0], -self.spins[j][1])
    }

    pub fn s_z(&self, j: usize) -> f64 {
        self.spins[j][2]
    }

    /// Largest | |s_j| - s |.
    pub fn casimir_error(&self, s: f64) -> f64 {
        self.spins
            .iter()
            .map(|v| (norm3(v) - s).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 + 3 * self.spins.len());
        y.push(self.b.re);
        y.push(self.b.im);
        for v in &self.spins {
            y.extend_from_slice(v);
        }
        y
    }

    pub fn from_slice(y: &[f64]) -> Self {
        let spins = y[2..].chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        PhaseState {
            b: C64::new(y[0], y[1]),
            spins,
        }
    }

    /// Rescale every spin onto the sphere of radius s.
    pub fn renormalize(&mut self, s: f64) {
        for v in &mut self.spins {
            let r = norm3(v);
            if r > 0.0 {
                for c in v.iter_mut() {
                    *c *= s / r;
                }
            }
        }
    }
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn make_state(params: &ModelParams, b: C64, spins: Vec<[f64; 3]>) -> Result<PhaseState> {
    if spins.len() != params.n {
        return Err(Error::InvalidParams(format!(
            "expected {} spins, got {}",
            params.n,
            spins.len()
        )));
    }
    if !b.is_finite() || spins.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams("state has non-finite entries".into()));
    }
    for (j, v) in spins.iter().enumerate() {
        let r = norm3(v);
        if (r - params.s).abs() > CASIMIR_TOL * params.s {
            return Err(Error::CasimirViolation {
                index: j,
                norm: r,
                expected: params.s,
            });
        }
    }
    Ok(PhaseState { b, spins })
}

/// Static state b = 0, s_j = (0, 0, s e_j).
pub fn critical_state(params: &ModelParams, signs: &[i8]) -> PhaseState {
    PhaseState {
        b: C64::new(0.0, 0.0),
        spins: signs
            .iter()
            .map(|&e| [0.0, 0.0, params.s * f64::from(e)])
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaxSample {
    pub lambda: C64,
    pub a: C64,
    pub b: C64,
    pub c: C64,
}

pub fn lax_entries(params: &ModelParams, state: &PhaseState, lambda: C64) -> Result<LaxSample> {
    params.check_pole(lambda)?;
    let mut a = 2.0 * lambda;
    let mut b = 2.0 * state.b;
    let mut c = 2.0 * state.b.conj();
    for j in 0..params.n {
        let d = 1.0 / (lambda - params.epsilon[j]);
        a += state.s_z(j) * d;
        b += state.s_minus(j) * d;
        c += state.s_plus(j) * d;
    }
    Ok(LaxSample { lambda, a, b, c })
}

/// Lambda(lambda) = A^2 + B C.
pub fn spectral_invariant(params: &ModelParams, state: &PhaseState, lambda: C64) -> Result<C64> {
    let l = lax_entries(params, state, lambda)?;
    Ok(l.a * l.a + l.b * l.c)
}

/// Numerators of A, B, C over prod_j (lambda - eps_j).
#[derive(Clone, Debug)]
pub struct LaxNumerators {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub c: Vec<C64>,
}

pub fn lax_numerators(params: &ModelParams, state: &PhaseState) -> LaxNumerators {
    let pe = params.eps_poly();
    let mut a = poly::mul(&pe, &[C64::new(0.0, 0.0), C64::new(2.0, 0.0)]);
    let mut b = poly::scale(&pe, 2.0 * state.b);
    let mut c = poly::scale(&pe, 2.0 * state.b.conj());
    for j in 0..params.n {
        let q = params.eps_poly_without(j);
        a = poly::add(&a, &poly::scale(&q, C64::new(state.s_z(j), 0.0)));
        b = poly::add(&b, &poly::scale(&q, state.s_minus(j)));
        c = poly::add(&c, &poly::scale(&q, state.s_plus(j)));
    }
    LaxNumerators { a, b, c }
}

/// Coefficients of Q(lambda) = Lambda(lambda) prod_j (lambda - eps_j)^2,
/// lowest degree first, by interpolation at Chebyshev nodes.
pub fn spectral_polynomial(params: &ModelParams, state: &PhaseState) -> Vec<C64> {
    let nums = lax_numerators(params, state);
    let deg = 2 * params.n + 2;
    let npts = deg + 1;
    let lo = params.epsilon.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = params.epsilon.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (lo + hi);
    let radius = 0.5 * (hi - lo) + params.s.sqrt() + state.b.norm() + 1.0;

    let mut vander = DMatrix::<C64>::zeros(npts, npts);
    let mut rhs = DVector::<C64>::zeros(npts);
    for k in 0..npts {
        let x = (std::f64::consts::PI * (k as f64 + 0.5) / npts as f64).cos();
        let lam = C64::new(center + radius * x, 0.0);
        let pa = poly::eval(&nums.a, lam);
        let pb = poly::eval(&nums.b, lam);
        let pc = poly::eval(&nums.c, lam);
        rhs[k] = pa * pa + pb * pc;
        let mut xp = C64::new(1.0, 0.0);
        for col in 0..npts {
            vander[(k, col)] = xp;
            xp *= x;
        }
    }
    let q = vander
        .lu()
        .solve(&rhs)
        .expect("Chebyshev Vandermonde matrix is nonsingular");
    poly::unscale(q.as_slice(), center, radius)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianVector {
    /// H_1..H_n followed by H_{n+1}.
    pub values: Vec<f64>,
    pub physical: f64,
}

pub fn hamiltonians(params: &ModelParams, state: &PhaseState) -> HamiltonianVector {
    let n = params.n;
    let mut values = vec![0.0; n + 1];
    values[n] = state.b.norm_sqr() + (0..n).map(|j| state.s_z(j)).sum::<f64>();
    for j in 0..n {
        let mut h = 2.0 * params.epsilon[j] * state.s_z(j)
            + 2.0 * (state.b * state.s_plus(j)).re;
        for k in 0..n {
            if k != j {
                h += dot3(&state.spins[j], &state.spins[k])
                    / (params.epsilon[j] - params.epsilon[k]);
            }
        }
        values[j] = h;
    }
    let physical = params.omega * values[n] + values[..n].iter().sum::<f64>();
    HamiltonianVector { values, physical }
}

/// Gradient of a real function on phase space: Wirtinger derivative with
/// respect to bbar and the Euclidean gradient in each spin.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub db: C64,
    pub ds: Vec<[f64; 3]>,
}

/// Gradient of sum_i coeffs[i] H_i (coeffs has n+1 entries).
pub fn hamiltonian_gradient(params: &ModelParams, state: &PhaseState, coeffs: &[f64]) -> Gradient {
    let n = params.n;
    let cn = coeffs[n];
    let mut db = cn * state.b;
    let mut ds = vec![[0.0, 0.0, cn]; n];
    for j in 0..n {
        let cj = coeffs[j];
        if cj == 0.0 {
            continue;
        }
        db += cj * state.s_minus(j);
        ds[j][0] += cj * 2.0 * state.b.re;
        ds[j][1] -= cj * 2.0 * state.b.im;
        ds[j][2] += cj * 2.0 * params.epsilon[j];
        for k in 0..n {
            if k == j {
                continue;
            }
            let w = cj / (params.epsilon[j] - params.epsilon[k]);
            for a in 0..3 {
                ds[j][a] += w * state.spins[k][a];
                ds[k][a] += w * state.spins[j][a];
            }
        }
    }
    Gradient { db, ds }
}

/// {F, G} for real F, G given by their gradients.
pub fn poisson_bracket(state: &PhaseState, f: &Gradient, g: &Gradient) -> f64 {
    let mut out = -2.0 * (f.db.conj() * g.db).im;
    for (j, s) in state.spins.iter().enumerate() {
        out -= dot3(&cross3(&f.ds[j], &g.ds[j]), s);
    }
    out
}

/// Time derivative of the state along sum_i coeffs[i] H_i.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    pub db: C64,
    pub ds: Vec<[f64; 3]>,
}

impl Tangent {
    pub fn ds_plus(&self, j: usize) -> C64 {
        C64::new(self.ds[j][0], self.ds[j][1])
    }

    pub fn ds_z(&self, j: usize) -> f64 {
        self.ds[j][2]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut y = vec![self.db.re, self.db.im];
        for v in &self.ds {
            y.extend_from_slice(v);
        }
        y
    }
}

pub fn flow_field(params: &ModelParams, state: &PhaseState, coeffs: &[f64]) -> Tangent {
    let g = hamiltonian_gradient(params, state, coeffs);
    Tangent {
        db: C64::new(0.0, -1.0) * g.db,
        ds: g
            .ds
            .iter()
            .zip(&state.spins)
            .map(|(gr, s)| cross3(gr, s))
            .collect(),
    }
}

/// Coefficient vector selecting the physical Hamiltonian omega H_{n+1} + sum H_j.
pub fn physical_coeffs(params: &ModelParams) -> Vec<f64> {
    let mut c = vec![1.0; params.n + 1];
    c[params.n] = params.omega;
    c
}

/// Unit coefficient vector on H_{i+1} (0-based index; i = n is H_{n+1}).
pub fn unit_coeffs(params: &ModelParams, i: usize) -> Vec<f64> {
    let mut c = vec![0.0; params.n + 1];
    c[i] = 1.0;
    c
}

/// |{H_i, H_j}| from analytic gradients; indices are 0-based.
pub fn poisson_commutation_residual(
    params: &ModelParams,
    state: &PhaseState,
    i: usize,
    j: usize,
) -> f64 {
    if i == j {
        return 0.0;
    }
    let gi = hamiltonian_gradient(params, state, &unit_coeffs(params, i));
    let gj = hamiltonian_gradient(params, state, &unit_coeffs(params, j));
    poisson_bracket(state, &gi, &gj).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_spin() -> ModelParams {
        ModelParams::new(1.0, 0.0, vec![0.0], vec![1]).unwrap()
    }

    #[test]
    fn casimir_checks() {
        let p = one_spin();
        assert!(make_state(&p, C64::new(1.0, 0.0), vec![[1.0, 0.0, 0.0]]).is_ok());
        let bad = make_state(&p, C64::new(0.0, 0.0), vec![[1.0, 1.0, 0.0]]);
        assert!(matches!(bad, Err(Error::CasimirViolation { .. })));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 0.0, vec![0.0, 0.0], vec![1, 1]).is_err());
        assert!(ModelParams::new(-1.0, 0.0, vec![0.0], vec![1]).is_err());
        assert!(ModelParams::new(1.0, 0.0, vec![0.0], vec![2]).is_err());
        assert!(ModelParams::new(1.0, 0.0, vec![0.0, 1.0], vec![1]).is_err());
    }

    #[test]
    fn pole_guard() {
        let p = one_spin();
        let st = critical_state(&p, &[1]);
        assert!(matches!(
            lax_entries(&p, &st, C64::new(1e-12, 0.0)),
            Err(Error::PoleAtEpsilon(_))
        ));
    }

    #[test]
    fn one_spin_spectral_polynomial() {
        let p = one_spin();
        let st = critical_state(&p, &[1]);
        let q = spectral_polynomial(&p, &st);
        let want = [1.0, 0.0, 4.0, 0.0, 4.0];
        for (c, w) in q.iter().zip(want) {
            assert!((c - w).norm() < 1e-12, "{q:?}");
        }
    }

    #[test]
    fn u1_flow_rotates_b() {
        let p = ModelParams::new(1.0, 0.0, vec![-0.5, 0.7], vec![1, -1]).unwrap();
        let st = PhaseState {
            b: C64::new(0.3, -0.2),
            spins: vec![[0.6, 0.0, 0.8], [0.0, -0.6, 0.8]],
        };
        let t = flow_field(&p, &st, &[0.0, 0.0, 1.0]);
        assert!((t.db - C64::new(0.0, -1.0) * st.b).norm() < 1e-15);
        for j in 0..2 {
            assert!((t.ds_plus(j) - C64::new(0.0, 1.0) * st.s_plus(j)).norm() < 1e-15);
            assert_eq!(t.ds_z(j), 0.0);
        }
    }
}
