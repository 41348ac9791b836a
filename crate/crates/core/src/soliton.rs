//! Exact solutions on the pinched torus of a (0,0,m) focus-focus point.
//!
//! A soliton is fixed by m complex amplitudes X_l, one per conjugate pair;
//! the partner amplitudes follow from the reality condition
//! conj(X_l) X_lbar = -1/4. All 2m amplitudes evolve by pure exponentials and
//! determine the state through the linear system
//! P^-(E_l) = bbar X_l P^+(E_l), with P^- monic of degree m and P^+ monic of
//! degree m-1.

use nalgebra::{DMatrix, DVector};

use crate::bethe::BetheData;
use crate::error::{Error, Result};
use crate::model::{ModelParams, PhaseState, CASIMIR_TOL};
use crate::poly::{self, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug)]
pub struct SolitonState {
    pub bethe: BetheData,
    half: Vec<C64>,
}

impl SolitonState {
    /// Amplitudes of the roots with Im E > 0.
    pub fn x_half(&self) -> &[C64] {
        &self.half
    }

    /// All 2m amplitudes in the root order of `bethe`.
    pub fn x(&self) -> Vec<C64> {
        let mut out = self.half.clone();
        out.extend(self.half.iter().map(|x| partner(*x)));
        out
    }

    /// max_l |conj(X_l) X_lbar + 1/4|.
    pub fn reality_residual(&self) -> f64 {
        let x = self.x();
        let m = self.half.len();
        (0..m)
            .map(|l| (x[l].conj() * x[m + l] + 0.25).norm())
            .fold(0.0, f64::max)
    }

    fn with_half(&self, half: Vec<C64>) -> SolitonState {
        SolitonState {
            bethe: self.bethe.clone(),
            half,
        }
    }
}

fn partner(x: C64) -> C64 {
    -0.25 / x.conj()
}

pub fn init_soliton(bethe: &BetheData, xhalf: &[C64]) -> Result<SolitonState> {
    bethe.require_focus_focus()?;
    if xhalf.len() != bethe.m() {
        return Err(Error::InvalidParams(format!(
            "expected {} amplitudes, got {}",
            bethe.m(),
            xhalf.len()
        )));
    }
    if let Some(i) = xhalf.iter().position(|x| x.norm() == 0.0 || !x.is_finite()) {
        return Err(Error::ZeroAmplitude(i));
    }
    Ok(SolitonState {
        bethe: bethe.clone(),
        half: xhalf.to_vec(),
    })
}

/// Exponent i(sum_i s e_i t_i / (E - eps_i) - t_{n+1}) for one root.
fn phase(params: &ModelParams, signs: &[i8], e: C64, times: &[f64]) -> C64 {
    let n = params.n;
    let mut acc = C64::new(-times[n], 0.0);
    for i in 0..n {
        acc += params.s * f64::from(signs[i]) * times[i] / (e - params.epsilon[i]);
    }
    I * acc
}

/// X_l({t}) for all 2m roots.
pub fn amplitudes_at(params: &ModelParams, soliton: &SolitonState, times: &[f64]) -> Vec<C64> {
    advance(params, soliton, times).x()
}

/// The soliton after the multi-time flow {t_i}.
pub fn advance(params: &ModelParams, soliton: &SolitonState, times: &[f64]) -> SolitonState {
    let b = &soliton.bethe;
    let half = soliton
        .half
        .iter()
        .enumerate()
        .map(|(l, &x)| x * phase(params, &b.signs, b.upper(l), times).exp())
        .collect();
    soliton.with_half(half)
}

/// Flow of K_l for time `a` and L_l for time `theta` (l is 0-based).
pub fn normal_flow_map(soliton: &SolitonState, l: usize, a: f64, theta: f64) -> SolitonState {
    let mut half = soliton.half.clone();
    half[l] *= C64::new(a, theta).exp();
    soliton.with_half(half)
}

/// Periodic-type flow sum_l (alpha_l K_l + beta_l L_l) for time t.
pub fn combined_normal_flow(
    soliton: &SolitonState,
    alpha: &[f64],
    beta: &[f64],
    t: f64,
) -> SolitonState {
    let half = soliton
        .half
        .iter()
        .enumerate()
        .map(|(l, &x)| x * C64::new(alpha[l] * t, beta[l] * t).exp())
        .collect();
    soliton.with_half(half)
}

/// sum_i s e_i / ((E_k - eps_i)(E_l - eps_i)) over the Bethe roots k, l.
pub fn telescoping_sum(params: &ModelParams, bethe: &BetheData, k: usize, l: usize) -> C64 {
    let (ek, el) = (bethe.roots[k], bethe.roots[l]);
    (0..params.n)
        .map(|i| {
            let eps = params.epsilon[i];
            params.s * f64::from(bethe.signs[i]) / ((ek - eps) * (el - eps))
        })
        .sum()
}

#[derive(Clone, Debug)]
pub struct SolitonPolys {
    /// Monic, degree m.
    pub p_minus: Vec<C64>,
    /// Monic, degree m-1.
    pub p_plus: Vec<C64>,
    pub bbar: C64,
    pub d0: C64,
    pub dn1: C64,
}

impl SolitonPolys {
    /// Numerator of C(lambda) over prod_j (lambda - eps_j): 2 bbar P^- P^+.
    pub fn c_numerator(&self) -> Vec<C64> {
        poly::scale(&poly::mul(&self.p_minus, &self.p_plus), 2.0 * self.bbar)
    }
}

fn det_checked(mat: DMatrix<C64>) -> Result<C64> {
    let bound: f64 = mat
        .row_iter()
        .map(|r| r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
        .product();
    let d = mat.lu().determinant();
    if !d.is_finite() || d.norm() <= 1e-14 * bound {
        return Err(Error::SingularDeterminant);
    }
    Ok(d)
}

/// Rows (1, E, .., E^p, X, XE, .., XE^q) over all 2m roots.
fn bordered_rows(roots: &[C64], x: &[C64], p: usize, q: Option<usize>) -> DMatrix<C64> {
    let ncols = p + 1 + q.map_or(0, |q| q + 1);
    DMatrix::from_fn(roots.len(), ncols, |l, c| {
        if c <= p {
            roots[l].powi(c as i32)
        } else {
            x[l] * roots[l].powi((c - p - 1) as i32)
        }
    })
}

/// D_{n+1} = det(1, E, .., E^{m-1}, X, .., XE^{m-1}).
pub fn det_d(roots: &[C64], x: &[C64]) -> Result<C64> {
    let m = roots.len() / 2;
    det_checked(bordered_rows(roots, x, m - 1, Some(m - 1)))
}

/// D_0 = det(1, E, .., E^m, X, .., XE^{m-2}).
pub fn det_d0(roots: &[C64], x: &[C64]) -> Result<C64> {
    let m = roots.len() / 2;
    let q = if m >= 2 { Some(m - 2) } else { None };
    det_checked(bordered_rows(roots, x, m, q))
}

fn bordered_with_top(roots: &[C64], x: &[C64], top: Vec<C64>) -> DMatrix<C64> {
    let m = roots.len() / 2;
    let body = bordered_rows(roots, x, m, Some(m - 1));
    DMatrix::from_fn(2 * m + 1, 2 * m + 1, |r, c| {
        if r == 0 {
            top[c]
        } else {
            body[(r - 1, c)]
        }
    })
}

/// D_1(lambda): top row (1, lambda, .., lambda^m, 0, .., 0).
pub fn det_d1(roots: &[C64], x: &[C64], lambda: C64) -> C64 {
    let m = roots.len() / 2;
    let top = (0..=2 * m)
        .map(|c| if c <= m { lambda.powi(c as i32) } else { C64::new(0.0, 0.0) })
        .collect();
    bordered_with_top(roots, x, top).lu().determinant()
}

/// D_2(lambda): top row (0, .., 0, 1, lambda, .., lambda^{m-1}).
pub fn det_d2(roots: &[C64], x: &[C64], lambda: C64) -> C64 {
    let m = roots.len() / 2;
    let top = (0..=2 * m)
        .map(|c| if c <= m { C64::new(0.0, 0.0) } else { lambda.powi((c - m - 1) as i32) })
        .collect();
    bordered_with_top(roots, x, top).lu().determinant()
}

/// Solve the linear system for P^-, bbar P^+ at the current amplitudes.
pub fn soliton_polys(soliton: &SolitonState) -> Result<SolitonPolys> {
    let roots = &soliton.bethe.roots;
    let x = soliton.x();
    let m = soliton.half.len();
    let mut a = DMatrix::<C64>::zeros(2 * m, 2 * m);
    let mut rhs = DVector::<C64>::zeros(2 * m);
    for l in 0..2 * m {
        let e = roots[l];
        let mut ek = C64::new(1.0, 0.0);
        for k in 0..m {
            a[(l, k)] = ek;
            a[(l, m + k)] = -x[l] * ek;
            ek *= e;
        }
        rhs[l] = -ek;
    }
    let dn1 = det_d(roots, &x)?;
    let d0 = if m >= 1 { det_d0(roots, &x).unwrap_or(C64::new(0.0, 0.0)) } else { C64::new(0.0, 0.0) };
    let sol = a.lu().solve(&rhs).ok_or(Error::SingularDeterminant)?;
    let mut p_minus: Vec<C64> = sol.as_slice()[..m].to_vec();
    p_minus.push(C64::new(1.0, 0.0));
    let r: Vec<C64> = sol.as_slice()[m..].to_vec();
    let bbar = r[m - 1];
    if bbar.norm() == 0.0 {
        return Err(Error::SingularDeterminant);
    }
    let p_plus = poly::scale(&r, 1.0 / bbar);
    Ok(SolitonPolys {
        p_minus,
        p_plus,
        bbar,
        d0,
        dn1,
    })
}

/// |b|^2 from the roots of P^-: 4 sum prod_l (lambda^- - E_l) / (P^-'(lambda^-) P^+(lambda^-)).
pub fn bbar_b_from_roots(polys: &SolitonPolys, roots: &[C64]) -> Result<C64> {
    let lm = poly::roots(&polys.p_minus)?;
    let dpm = poly::derivative(&polys.p_minus);
    Ok(lm
        .iter()
        .map(|&l| {
            let num: C64 = roots.iter().map(|&e| l - e).product();
            4.0 * num / (poly::eval(&dpm, l) * poly::eval(&polys.p_plus, l))
        })
        .sum())
}

/// S^+ and S^- built from their root sums; S^- carries the linear shift
/// (lambda + Sigma) P^+ whose constant Sigma is fixed by matching the
/// lambda^{m-1} coefficient against conj(P^-). Returned together with the
/// residual of |b|^2 conj(P) = 4 S^- S^+.
pub fn s_polynomials(polys: &SolitonPolys, roots: &[C64]) -> Result<(Vec<C64>, Vec<C64>, f64)> {
    let lm = poly::roots(&polys.p_minus)?;
    let lp = poly::roots(&polys.p_plus)?;
    let dpm = poly::derivative(&polys.p_minus);
    let dpp = poly::derivative(&polys.p_plus);
    let prod_e = |l: C64| -> C64 { roots.iter().map(|&e| l - e).product() };
    let drop = |rs: &[C64], i: usize| -> Vec<C64> {
        let rest: Vec<C64> = rs.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &r)| r).collect();
        poly::from_roots(&rest)
    };

    let mut s_plus = vec![C64::new(0.0, 0.0)];
    for (i, &l) in lm.iter().enumerate() {
        let w = prod_e(l) / (poly::eval(&dpm, l) * poly::eval(&polys.p_plus, l));
        s_plus = poly::add(&s_plus, &poly::scale(&drop(&lm, i), w));
    }
    let mut s_minus = vec![C64::new(0.0, 0.0)];
    for (i, &l) in lp.iter().enumerate() {
        let w = prod_e(l) / (poly::eval(&dpp, l) * poly::eval(&polys.p_minus, l));
        s_minus = poly::add(&s_minus, &poly::scale(&drop(&lp, i), w));
    }
    let m = polys.p_minus.len() - 1;
    let lin = poly::mul(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)], &polys.p_plus);
    let partial = poly::add(&s_minus, &lin);
    let target = polys.p_minus[m - 1].conj();
    let shift = target - partial.get(m - 1).copied().unwrap_or_default();
    let s_minus = poly::add(&partial, &poly::scale(&polys.p_plus, shift));

    let bb = polys.bbar.norm_sqr();
    let pbar = poly::conj(&poly::mul(&polys.p_minus, &polys.p_plus));
    let lhs = poly::scale(&pbar, C64::new(bb, 0.0));
    let rhs = poly::scale(&poly::mul(&s_minus, &s_plus), C64::new(4.0, 0.0));
    let resid = poly::max_abs(&poly::sub(&lhs, &rhs)) / (1.0 + poly::max_abs(&lhs));
    Ok((s_plus, s_minus, resid))
}

/// Diagnostics of a reconstruction.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub state: PhaseState,
    pub polys: SolitonPolys,
    /// |b|^2 from the root formula.
    pub bbar_b: f64,
    /// Max difference between the two forms of P_{n+1}.
    pub p_mismatch: f64,
}

pub fn reconstruct(params: &ModelParams, soliton: &SolitonState, times: &[f64]) -> Result<Reconstruction> {
    let moved = advance(params, soliton, times);
    let polys = soliton_polys(&moved)?;
    let roots = &soliton.bethe.roots;
    let bb_direct = polys.bbar.norm_sqr();
    let bb_roots = bbar_b_from_roots(&polys, roots)?;
    let scale = 1.0 + bb_direct;
    if bb_roots.re < -1e-9 * scale {
        return Err(Error::NegativeBBbar(bb_roots.re));
    }

    let prod_e = poly::from_roots(roots);
    let p_from_plus = poly::sub(
        &poly::scale(&prod_e, C64::new(2.0, 0.0)),
        &poly::scale(&poly::mul(&polys.p_plus, &poly::conj(&polys.p_plus)), C64::new(bb_direct, 0.0)),
    );
    let p_from_minus = poly::add(
        &poly::scale(&prod_e, C64::new(-2.0, 0.0)),
        &poly::scale(&poly::mul(&polys.p_minus, &poly::conj(&polys.p_minus)), C64::new(4.0, 0.0)),
    );
    let p_mismatch = poly::max_abs(&poly::sub(&p_from_plus, &p_from_minus));

    let c_num = polys.c_numerator();
    let mut spins = Vec::with_capacity(params.n);
    for j in 0..params.n {
        let ej = C64::new(params.epsilon[j], 0.0);
        let g = params.eps_gap_product(j);
        let sp = poly::eval(&c_num, ej) / g;
        let sz = poly::eval(&p_from_plus, ej) / g;
        spins.push([sp.re, sp.im, sz.re]);
    }
    let state = PhaseState {
        b: polys.bbar.conj(),
        spins,
    };
    let cas = state.casimir_error(params.s);
    if cas > CASIMIR_TOL.max(1e-6) * params.s {
        return Err(Error::NotRealSlice(cas));
    }
    Ok(Reconstruction {
        state,
        polys,
        bbar_b: bb_roots.re,
        p_mismatch,
    })
}

pub fn reconstruct_state(params: &ModelParams, soliton: &SolitonState, times: &[f64]) -> Result<PhaseState> {
    Ok(reconstruct(params, soliton, times)?.state)
}

/// C(lambda) = -2 D_1(lambda) D_2(lambda) / (D^2 prod_j (lambda - eps_j)).
pub fn c_of_lambda(params: &ModelParams, soliton: &SolitonState, times: &[f64], lambda: C64) -> Result<C64> {
    params.check_pole(lambda)?;
    let x = advance(params, soliton, times).x();
    let roots = &soliton.bethe.roots;
    let d = det_d(roots, &x)?;
    let d1 = det_d1(roots, &x, lambda);
    let d2 = det_d2(roots, &x, lambda);
    let pe: C64 = params.epsilon.iter().map(|&e| lambda - e).product();
    Ok(-2.0 * d1 * d2 / (d * d * pe))
}

fn partner_root(bethe: &BetheData, i: usize) -> C64 {
    bethe.roots[bethe.pairing[i]]
}

/// Leading form of C(lambda) when the amplitudes X_i, i in `iset`, are large.
pub fn asymptotic_c(params: &ModelParams, bethe: &BetheData, iset: &[usize], x: &[C64], lambda: C64) -> C64 {
    let pe: C64 = params.epsilon.iter().map(|&e| lambda - e).product();
    let front: C64 = iset.iter().map(|&i| lambda - partner_root(bethe, i)).product();
    let sum: C64 = iset
        .iter()
        .map(|&j| {
            let ej = bethe.roots[j];
            let mut t = (partner_root(bethe, j) - ej) / x[j];
            for &k in iset {
                if k != j {
                    let ek = bethe.roots[k];
                    t *= (partner_root(bethe, k) - ej) / (ek - ej) * (lambda - ek);
                }
            }
            t
        })
        .sum();
    -2.0 / pe * front * sum
}

/// Leading C(E_j), j in `iset`, for large amplitudes.
pub fn asymptotic_c_at_root(params: &ModelParams, bethe: &BetheData, iset: &[usize], x: &[C64], j: usize) -> C64 {
    let ej = bethe.roots[j];
    let pe: C64 = params.epsilon.iter().map(|&e| ej - e).product();
    let prod: C64 = iset.iter().map(|&k| (ej - partner_root(bethe, k)).powi(2)).product();
    2.0 / (x[j] * pe) * prod
}

/// Leading B(E_j), j in `iset`, when those amplitudes go to zero.
pub fn asymptotic_b_at_root(params: &ModelParams, bethe: &BetheData, iset: &[usize], x: &[C64], j: usize) -> C64 {
    let ej = bethe.roots[j];
    let pe: C64 = params.epsilon.iter().map(|&e| ej - e).product();
    let prod: C64 = iset.iter().map(|&k| (ej - partner_root(bethe, k)).powi(2)).product();
    -8.0 * x[j] / pe * prod
}

/// Leading (D_1, D_2, D) when the amplitudes of the upper roots are large.
pub fn asymptotic_determinants(bethe: &BetheData, x: &[C64], lambda: C64) -> (C64, C64, C64) {
    let m = bethe.m();
    let mut pref = 1.0;
    for i in 0..m {
        for j in i + 1..m {
            pref *= (bethe.upper(j) - bethe.upper(i)).norm_sqr();
        }
    }
    let xprod: C64 = x[..m].iter().product();
    let d1 = pref * (0..m).map(|j| lambda - bethe.lower(j)).product::<C64>() * xprod;
    let sum: C64 = (0..m)
        .map(|j| {
            let ej = bethe.upper(j);
            let mut t = (bethe.lower(j) - ej) / (x[j] * (lambda - ej));
            for k in 0..m {
                if k != j {
                    t *= (bethe.lower(k) - ej) / (bethe.upper(k) - ej);
                }
            }
            t
        })
        .sum();
    let d2 = pref * (0..m).map(|j| lambda - bethe.upper(j)).product::<C64>() * sum * xprod;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    (d1, d2, sign * pref * xprod)
}

/// Roots of P^- and P^+ (the separated variables) at one time of a
/// normal flow.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorSample {
    pub t: f64,
    pub minus: Vec<C64>,
    pub plus: Vec<C64>,
}

/// Follow the divisor under sum_l (alpha_l K_l + beta_l L_l). Times where
/// the linear system is singular give None.
pub fn divisor_track(
    soliton: &SolitonState,
    alpha: &[f64],
    beta: &[f64],
    times: &[f64],
) -> Vec<(f64, Option<DivisorSample>)> {
    let sort = |v: &mut Vec<C64>| v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    times
        .iter()
        .map(|&t| {
            let moved = combined_normal_flow(soliton, alpha, beta, t);
            let sample = soliton_polys(&moved).ok().and_then(|p| {
                let mut minus = poly::roots(&p.p_minus).ok()?;
                let mut plus = if p.p_plus.len() > 1 { poly::roots(&p.p_plus).ok()? } else { Vec::new() };
                sort(&mut minus);
                sort(&mut plus);
                Some(DivisorSample { t, minus, plus })
            });
            (t, sample)
        })
        .collect()
}
