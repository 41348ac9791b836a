//! Normal coordinates near a focus-focus critical point and the quadratic
//! generators K_j, L_j expressed through the commuting Hamiltonians.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bethe::BetheData;
use crate::error::{Error, Result};
use crate::model::{
    critical_state, hamiltonians, lax_entries, spectral_invariant, ModelParams, PhaseState,
};
use crate::poly::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct NormalCoords {
    pub z: Vec<C64>,
    pub w: Vec<C64>,
    /// Largest disagreement between the B-based values and the conjugated
    /// C-based values; small for real states.
    pub mismatch: f64,
}

/// z_j = B(E_j) / (-i a'(E_j)), w_j = B(conj E_j).
pub fn normal_coordinates(
    params: &ModelParams,
    bethe: &BetheData,
    state: &PhaseState,
) -> Result<NormalCoords> {
    bethe.require_focus_focus()?;
    let m = bethe.m();
    let mut z = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    let mut mismatch: f64 = 0.0;
    for j in 0..m {
        let up = lax_entries(params, state, bethe.upper(j))?;
        let lo = lax_entries(params, state, bethe.lower(j))?;
        let zj = up.b / (-I * bethe.aprime_upper(j));
        let wj = lo.b;
        let zbar = lo.c / (I * bethe.aprime_lower(j));
        let wbar = up.c;
        mismatch = mismatch
            .max((wj - wbar.conj()).norm())
            .max((zj - zbar.conj()).norm());
        z.push(zj);
        w.push(wj);
    }
    Ok(NormalCoords { z, w, mismatch })
}

/// K_j + i L_j = w_j conj(z_j).
pub fn kl_from_normal(coords: &NormalCoords) -> (Vec<f64>, Vec<f64>) {
    coords
        .z
        .iter()
        .zip(&coords.w)
        .map(|(z, w)| {
            let c = w * z.conj();
            (c.re, c.im)
        })
        .unzip()
}

/// Quadratic generators from the spectral invariant at the Bethe roots:
/// K_j = (i/2)(Lambda(E_j)/a'(E_j) - Lambda(Ebar_j)/a'(Ebar_j)),
/// L_j = -(1/2)(Lambda(E_j)/a'(E_j) + Lambda(Ebar_j)/a'(Ebar_j)).
/// Lambda(E) is linear in the deviations of the Hamiltonians, so these are
/// exactly the combinations given by `normal_generator_coeffs`.
pub fn kl_quadratic(
    params: &ModelParams,
    bethe: &BetheData,
    state: &PhaseState,
) -> Result<(Vec<f64>, Vec<f64>)> {
    bethe.require_focus_focus()?;
    let m = bethe.m();
    let mut k = Vec::with_capacity(m);
    let mut l = Vec::with_capacity(m);
    for j in 0..m {
        let u = spectral_invariant(params, state, bethe.upper(j))? / bethe.aprime_upper(j);
        let d = spectral_invariant(params, state, bethe.lower(j))? / bethe.aprime_lower(j);
        k.push((0.5 * I * (u - d)).re);
        l.push((-0.5 * (u + d)).re);
    }
    Ok((k, l))
}

/// Coefficients of delta H_i (i = 1..n+1) in K_j and L_j.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalGenerators {
    pub coeffs_k: Vec<Vec<f64>>,
    pub coeffs_l: Vec<Vec<f64>>,
    /// Largest imaginary part discarded when taking the real coefficients.
    pub max_imag: f64,
}

impl NormalGenerators {
    /// K, L from the Hamiltonian deviations relative to the critical point.
    pub fn evaluate(
        &self,
        params: &ModelParams,
        bethe: &BetheData,
        state: &PhaseState,
    ) -> (Vec<f64>, Vec<f64>) {
        let h = hamiltonians(params, state).values;
        let h0 = hamiltonians(params, &critical_state(params, &bethe.signs)).values;
        let dh: Vec<f64> = h.iter().zip(&h0).map(|(a, b)| a - b).collect();
        let apply = |rows: &Vec<Vec<f64>>| -> Vec<f64> {
            rows.iter()
                .map(|r| r.iter().zip(&dh).map(|(c, d)| c * d).sum())
                .collect()
        };
        (apply(&self.coeffs_k), apply(&self.coeffs_l))
    }

    /// Flow coefficients for sum_j (alpha_j K_j + beta_j L_j).
    pub fn combine(&self, alpha: &[f64], beta: &[f64]) -> Vec<f64> {
        let cols = self.coeffs_k.first().map_or(0, Vec::len);
        (0..cols)
            .map(|i| {
                alpha
                    .iter()
                    .zip(&self.coeffs_k)
                    .map(|(a, r)| a * r[i])
                    .chain(beta.iter().zip(&self.coeffs_l).map(|(b, r)| b * r[i]))
                    .sum()
            })
            .collect()
    }
}

pub fn normal_generator_coeffs(params: &ModelParams, bethe: &BetheData) -> Result<NormalGenerators> {
    bethe.require_focus_focus()?;
    let m = bethe.m();
    let n = params.n;
    let mut coeffs_k = vec![vec![0.0; n + 1]; m];
    let mut coeffs_l = vec![vec![0.0; n + 1]; m];
    let mut max_imag: f64 = 0.0;
    for j in 0..m {
        let (e, eb) = (bethe.upper(j), bethe.lower(j));
        let (ap, apb) = (bethe.aprime_upper(j), bethe.aprime_lower(j));
        for i in 0..=n {
            let (u, d) = if i < n {
                let eps = params.epsilon[i];
                (1.0 / (ap * (e - eps)), 1.0 / (apb * (eb - eps)))
            } else {
                (2.0 / ap, 2.0 / apb)
            };
            let kc = I * (u - d);
            let lc = -(u + d);
            max_imag = max_imag.max(kc.im.abs()).max(lc.im.abs());
            coeffs_k[j][i] = kc.re;
            coeffs_l[j][i] = lc.re;
        }
    }
    Ok(NormalGenerators {
        coeffs_k,
        coeffs_l,
        max_imag,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Block {
    /// Real root; eta = -sign(a'(E)).
    Elliptic { root: usize, eta: i8 },
    FocusFocus { upper: usize, lower: usize },
}

pub fn classify_blocks(bethe: &BetheData) -> Vec<Block> {
    let mut out = Vec::new();
    for (l, &p) in bethe.pairing.iter().enumerate() {
        if p == l {
            let eta = if bethe.aprime[l].re > 0.0 { -1 } else { 1 };
            out.push(Block::Elliptic { root: l, eta });
        } else if bethe.roots[l].im > 0.0 {
            out.push(Block::FocusFocus { upper: l, lower: p });
        }
    }
    out
}

/// First-order inverse of the normal coordinates: the state whose B(E_j),
/// B(conj E_j) reproduce the requested (z, w), with s_j^z on the branch
/// of the critical sign pattern.
pub fn state_from_normal(
    params: &ModelParams,
    bethe: &BetheData,
    z: &[C64],
    w: &[C64],
) -> Result<PhaseState> {
    bethe.require_focus_focus()?;
    let m = bethe.m();
    if z.len() != m || w.len() != m {
        return Err(Error::InvalidParams(format!("expected {m} normal coordinates")));
    }
    let n = params.n;
    let mut a = DMatrix::<C64>::zeros(n + 1, n + 1);
    let mut rhs = DVector::<C64>::zeros(n + 1);
    for l in 0..=n {
        let e = bethe.roots[l];
        a[(l, 0)] = C64::new(2.0, 0.0);
        for j in 0..n {
            a[(l, j + 1)] = 1.0 / (e - params.epsilon[j]);
        }
        rhs[l] = if l < m {
            -I * bethe.aprime[l] * z[l]
        } else {
            w[l - m]
        };
    }
    let x = a.lu().solve(&rhs).ok_or(Error::SingularDeterminant)?;
    let spins = (0..n)
        .map(|j| {
            let sm = x[j + 1];
            let rest = params.s * params.s - sm.norm_sqr();
            if rest < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "normal coordinates too large: |s_{}^-| exceeds s",
                    j + 1
                )));
            }
            Ok([sm.re, -sm.im, f64::from(bethe.signs[j]) * rest.sqrt()])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseState { b: x[0], spins })
}
