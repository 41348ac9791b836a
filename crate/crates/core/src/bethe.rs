//! Critical points, the classical Bethe equation a(E) = 0 and the pairing of
//! its roots.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{critical_state, ModelParams, PhaseState};
use crate::poly::{self, C64};

pub const MAX_ENUMERATED_SPINS: usize = 20;

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub signs: Vec<i8>,
    pub state: PhaseState,
}

pub fn enumerate_critical_points(params: &ModelParams) -> Result<Vec<CriticalPoint>> {
    let n = params.n;
    if n > MAX_ENUMERATED_SPINS {
        return Err(Error::TooManySpins(n));
    }
    Ok((0..1usize << n)
        .map(|mask| {
            let signs: Vec<i8> = (0..n)
                .map(|j| if mask >> j & 1 == 0 { 1 } else { -1 })
                .collect();
            let state = critical_state(params, &signs);
            CriticalPoint { signs, state }
        })
        .collect())
}

/// Coefficients (lowest first) of a(lambda) prod_j (lambda - eps_j).
pub fn bethe_polynomial(params: &ModelParams, signs: &[i8]) -> Vec<f64> {
    let mut p = poly::mul(&params.eps_poly(), &[C64::new(0.0, 0.0), C64::new(2.0, 0.0)]);
    for (j, &e) in signs.iter().enumerate() {
        let q = params.eps_poly_without(j);
        p = poly::add(&p, &poly::scale(&q, C64::new(params.s * f64::from(e), 0.0)));
    }
    p.iter().map(|c| c.re).collect()
}

/// a(E) = 2E + sum_j s e_j / (E - eps_j).
pub fn a_value(params: &ModelParams, signs: &[i8], e: C64) -> Result<C64> {
    params.check_pole(e)?;
    Ok(signs
        .iter()
        .zip(&params.epsilon)
        .fold(2.0 * e, |acc, (&sg, &eps)| acc + params.s * f64::from(sg) / (e - eps)))
}

/// a'(E) = 2 - sum_j s e_j / (E - eps_j)^2.
pub fn a_prime(params: &ModelParams, signs: &[i8], e: C64) -> Result<C64> {
    params.check_pole(e)?;
    Ok(signs.iter().zip(&params.epsilon).fold(C64::new(2.0, 0.0), |acc, (&sg, &eps)| {
        acc - params.s * f64::from(sg) / ((e - eps) * (e - eps))
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Williamson {
    pub me: usize,
    pub mh: usize,
    pub mff: usize,
}

/// Roots of the Bethe equation in canonical order: the m roots with Im > 0
/// sorted by real part, then their conjugates in the same order, then the
/// real roots sorted increasingly.
#[derive(Clone, Debug)]
pub struct BetheData {
    pub signs: Vec<i8>,
    pub roots: Vec<C64>,
    /// pairing[l] is the index of conj(E_l); real roots map to themselves.
    pub pairing: Vec<usize>,
    pub aprime: Vec<C64>,
    pub williamson: Williamson,
}

impl BetheData {
    /// Number of focus-focus pairs.
    pub fn m(&self) -> usize {
        self.williamson.mff
    }

    pub fn is_focus_focus(&self) -> bool {
        self.williamson.me == 0 && self.williamson.mff > 0
    }

    pub fn require_focus_focus(&self) -> Result<()> {
        if self.is_focus_focus() {
            Ok(())
        } else {
            Err(Error::NotFocusFocus)
        }
    }

    /// E_j with Im > 0 for pair j (0-based).
    pub fn upper(&self, j: usize) -> C64 {
        self.roots[j]
    }

    /// conj(E_j).
    pub fn lower(&self, j: usize) -> C64 {
        self.roots[self.m() + j]
    }

    pub fn aprime_upper(&self, j: usize) -> C64 {
        self.aprime[j]
    }

    pub fn aprime_lower(&self, j: usize) -> C64 {
        self.aprime[self.m() + j]
    }

    /// Copy with E_j and conj(E_j) exchanged for pair j.
    pub fn swapped(&self, j: usize) -> BetheData {
        let mut out = self.clone();
        let m = self.m();
        out.roots.swap(j, m + j);
        out.aprime.swap(j, m + j);
        out
    }
}

fn is_real(e: C64) -> bool {
    e.im.abs() < 1e-9 * (1.0 + e.re.abs())
}

pub fn solve_bethe(params: &ModelParams, signs: &[i8], tol: f64) -> Result<BetheData> {
    if signs.len() != params.n {
        return Err(Error::InvalidParams(format!(
            "expected {} signs, got {}",
            params.n,
            signs.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let coeffs: Vec<C64> = bethe_polynomial(params, signs)
        .iter()
        .map(|&c| C64::new(c, 0.0))
        .collect();
    let raw = poly::roots(&coeffs)?;

    let mut roots = Vec::with_capacity(raw.len());
    for r in raw {
        roots.push(polish_on_a(params, signs, r)?);
    }
    for e in &mut roots {
        if is_real(*e) {
            e.im = 0.0;
        }
        let res = a_value(params, signs, *e)?.norm();
        if res >= tol * (1.0 + e.norm()) {
            return Err(Error::NoConvergence(0));
        }
    }
    let scale = 1.0 + roots.iter().map(|e| e.norm()).fold(0.0, f64::max);
    for i in 0..roots.len() {
        for k in i + 1..roots.len() {
            if (roots[i] - roots[k]).norm() < 1e-7 * scale {
                return Err(Error::DegenerateRoots(i, k));
            }
        }
    }

    // Greedy nearest-conjugate matching of the complex roots.
    let mut upper: Vec<C64> = roots.iter().copied().filter(|e| e.im > 0.0).collect();
    let mut lower: Vec<C64> = roots.iter().copied().filter(|e| e.im < 0.0).collect();
    let mut real: Vec<f64> = roots.iter().filter(|e| e.im == 0.0).map(|e| e.re).collect();
    if upper.len() != lower.len() {
        return Err(Error::NoConvergence(0));
    }
    upper.sort_by(|a, b| b.im.total_cmp(&a.im));
    let mut pairs = Vec::with_capacity(upper.len());
    for u in upper {
        let (idx, _) = lower
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - u.conj()).norm().total_cmp(&(b.1 - u.conj()).norm()))
            .expect("as many lower as upper roots");
        let l = lower.swap_remove(idx);
        // symmetrize so the pair is exactly conjugate
        pairs.push(0.5 * (u + l.conj()));
    }
    pairs.sort_by(|a, b| a.re.total_cmp(&b.re));
    real.sort_by(f64::total_cmp);

    let m = pairs.len();
    let mut ordered: Vec<C64> = pairs.clone();
    ordered.extend(pairs.iter().map(|e| e.conj()));
    ordered.extend(real.iter().map(|&x| C64::new(x, 0.0)));
    let mut pairing: Vec<usize> = (0..ordered.len()).collect();
    for j in 0..m {
        pairing[j] = m + j;
        pairing[m + j] = j;
    }
    let aprime = ordered
        .iter()
        .map(|&e| a_prime(params, signs, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(BetheData {
        signs: signs.to_vec(),
        roots: ordered,
        pairing,
        aprime,
        williamson: Williamson {
            me: real.len(),
            mh: 0,
            mff: m,
        },
    })
}

fn polish_on_a(params: &ModelParams, signs: &[i8], mut e: C64) -> Result<C64> {
    for _ in 0..20 {
        let step = a_value(params, signs, e)? / a_prime(params, signs, e)?;
        if !step.is_finite() {
            break;
        }
        e -= step;
        if step.norm() <= 1e-16 * (1.0 + e.norm()) {
            break;
        }
    }
    Ok(e)
}

/// max_j |2 prod_k (eps_j - E_k) / prod_{k != j} (eps_j - eps_k) - s e_j|.
pub fn residue_identity_check(params: &ModelParams, signs: &[i8], roots: &[C64]) -> f64 {
    (0..params.n)
        .map(|j| {
            let ej = params.epsilon[j];
            let num: C64 = roots.iter().map(|&e| ej - e).product();
            let v = 2.0 * num / params.eps_gap_product(j);
            (v - params.s * f64::from(signs[j])).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_spin_polynomials() {
        let p = ModelParams::new(1.0, 0.0, vec![0.0], vec![1]).unwrap();
        assert_eq!(bethe_polynomial(&p, &[1]), vec![1.0, 0.0, 2.0]);
        assert_eq!(bethe_polynomial(&p, &[-1]), vec![-1.0, 0.0, 2.0]);
    }

    #[test]
    fn one_spin_roots() {
        let p = ModelParams::new(1.0, 0.0, vec![0.0], vec![1]).unwrap();
        let b = solve_bethe(&p, &[1], 1e-12).unwrap();
        let r = 0.5f64.sqrt();
        assert!((b.roots[0] - C64::new(0.0, r)).norm() < 1e-14);
        assert!((b.roots[1] - C64::new(0.0, -r)).norm() < 1e-14);
        assert_eq!(b.williamson, Williamson { me: 0, mh: 0, mff: 1 });
        assert!((b.aprime[0] - 4.0).norm() < 1e-13);

        let b = solve_bethe(&p, &[-1], 1e-12).unwrap();
        assert!((b.roots[0] - C64::new(-r, 0.0)).norm() < 1e-14);
        assert!((b.roots[1] - C64::new(r, 0.0)).norm() < 1e-14);
        assert_eq!(b.williamson, Williamson { me: 2, mh: 0, mff: 0 });
    }

    #[test]
    fn perturbed_roots_fail_identity() {
        let p = ModelParams::new(1.0, 0.0, vec![-1.0, 0.0, 1.0], vec![1, -1, 1]).unwrap();
        let b = solve_bethe(&p, &p.signs, 1e-12).unwrap();
        assert!(residue_identity_check(&p, &p.signs, &b.roots) < 1e-12);
        let mut bad = b.roots.clone();
        bad[0] += 0.1;
        assert!(residue_identity_check(&p, &p.signs, &bad) > 1e-3);
    }
}
