//! Separated variables: the zeros lambda_k of C(lambda) and mu_k = A(lambda_k).

use crate::error::{Error, Result};
use crate::model::{lax_entries, lax_numerators, HamiltonianVector, ModelParams, PhaseState};
use crate::poly::{self, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const COINCIDENT_TOL: f64 = 1e-7;
const DIVISION_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SeparatedCoords {
    pub lambdas: Vec<C64>,
    pub mus: Vec<C64>,
    pub bbar: C64,
}

fn sort_canonical(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

pub fn separated_coords(params: &ModelParams, state: &PhaseState) -> Result<SeparatedCoords> {
    let bbar = state.b.conj();
    if bbar.norm() <= 1e-10 {
        return Err(Error::OscillatorVanishes);
    }
    let c = lax_numerators(params, state).c;
    let mut lambdas = poly::roots(&c)?;
    sort_canonical(&mut lambdas);
    let mus = lambdas
        .iter()
        .map(|&l| lax_entries(params, state, l).map(|s| s.a))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparatedCoords { lambdas, mus, bbar })
}

fn check_distinct(lambdas: &[C64]) -> Result<()> {
    let scale = 1.0 + lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max);
    for i in 0..lambdas.len() {
        for k in i + 1..lambdas.len() {
            if (lambdas[i] - lambdas[k]).norm() < COINCIDENT_TOL * scale {
                return Err(Error::CoincidentLambdas(i, k));
            }
        }
    }
    Ok(())
}

/// Q(lambda) = Lambda(lambda) prod_j (lambda - eps_j)^2 assembled from the
/// values of the Hamiltonians.
pub fn spectral_polynomial_from_hamiltonians(params: &ModelParams, h: &[f64]) -> Vec<C64> {
    let n = params.n;
    let pe = params.eps_poly();
    let pe2 = poly::mul(&pe, &pe);
    let lam2 = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(4.0, 0.0)];
    let mut q = poly::mul(&pe2, &lam2);
    q = poly::add(&q, &poly::scale(&pe2, C64::new(4.0 * h[n], 0.0)));
    for j in 0..n {
        let rest = params.eps_poly_without(j);
        q = poly::add(&q, &poly::scale(&poly::mul(&pe, &rest), C64::new(2.0 * h[j], 0.0)));
        let sq = poly::mul(&rest, &rest);
        q = poly::add(&q, &poly::scale(&sq, C64::new(params.s * params.s, 0.0)));
    }
    q
}

/// Lagrange form of the numerator of A(lambda).
pub fn p_from_separated(params: &ModelParams, sep: &SeparatedCoords) -> Result<Vec<C64>> {
    check_distinct(&sep.lambdas)?;
    let pe = params.eps_poly();
    let mut p = poly::mul(&pe, &[C64::new(0.0, 0.0), C64::new(2.0, 0.0)]);
    for (i, (&li, &mi)) in sep.lambdas.iter().zip(&sep.mus).enumerate() {
        params.check_pole(li)?;
        let rest: Vec<C64> = sep
            .lambdas
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != i)
            .map(|(_, &x)| x)
            .collect();
        let denom: C64 = rest.iter().map(|&x| li - x).product();
        let w = (mi - 2.0 * li) * poly::eval(&pe, li) / denom;
        p = poly::add(&p, &poly::scale(&poly::from_roots(&rest), w));
    }
    Ok(p)
}

/// Rebuild the full state from separated variables, bbar and the values of
/// the Hamiltonians (which fix Q).
pub fn reconstruct_from_separated(
    params: &ModelParams,
    sep: &SeparatedCoords,
    hams: &HamiltonianVector,
) -> Result<PhaseState> {
    let n = params.n;
    let p = p_from_separated(params, sep)?;
    let q = spectral_polynomial_from_hamiltonians(params, &hams.values);
    let pc = poly::scale(&poly::from_roots(&sep.lambdas), 2.0 * sep.bbar);
    let mut num = poly::sub(&q, &poly::mul(&p, &p));
    num.resize(2 * n + 3, C64::new(0.0, 0.0));
    // the two leading coefficients cancel identically
    let top = num[2 * n + 1].norm().max(num[2 * n + 2].norm());
    num.truncate(2 * n + 1);
    let (pb, rem) = poly::divide(&num, &pc);
    let resid = (poly::max_abs(&rem) + top) / (1.0 + poly::max_abs(&num));
    if resid > DIVISION_TOL {
        return Err(Error::DivisionResidue(resid));
    }
    let b = pb.get(n).copied().unwrap_or_default() / 2.0;
    let mut spins = Vec::with_capacity(n);
    let mut reality: f64 = (b - sep.bbar.conj()).norm();
    for j in 0..n {
        let ej = C64::new(params.epsilon[j], 0.0);
        let g = params.eps_gap_product(j);
        let sp = poly::eval(&pc, ej) / g;
        let sm = poly::eval(&pb, ej) / g;
        let sz = poly::eval(&p, ej) / g;
        reality = reality.max((sm - sp.conj()).norm()).max(sz.im.abs());
        spins.push([sp.re, sp.im, sz.re]);
    }
    let scale = 1.0 + params.s + sep.bbar.norm();
    if reality > 1e-6 * scale {
        return Err(Error::NotRealSlice(reality));
    }
    Ok(PhaseState {
        b: sep.bbar.conj(),
        spins,
    })
}

/// Closed-form inverse of B_kj = 1 / (lambda_k - eps_j); rows indexed by j.
pub fn b_inverse(params: &ModelParams, lambdas: &[C64]) -> Result<Vec<Vec<C64>>> {
    check_distinct(lambdas)?;
    let n = params.n;
    let mut out = vec![vec![C64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let ej = params.epsilon[j];
        let gap = params.eps_gap_product(j);
        for p in 0..n {
            let lp = lambdas[p];
            let mut num: C64 = params.epsilon.iter().map(|&e| lp - e).product();
            let mut den = C64::new(gap, 0.0);
            for (l, &ll) in lambdas.iter().enumerate() {
                if l != p {
                    num *= ej - ll;
                    den *= lp - ll;
                }
            }
            out[j][p] = num / den;
        }
    }
    Ok(out)
}

pub fn b_matrix(params: &ModelParams, lambdas: &[C64]) -> Vec<Vec<C64>> {
    lambdas
        .iter()
        .map(|&l| params.epsilon.iter().map(|&e| 1.0 / (l - e)).collect())
        .collect()
}

pub fn hamiltonians_from_separated(params: &ModelParams, sep: &SeparatedCoords, hnp1: f64) -> Result<Vec<f64>> {
    let binv = b_inverse(params, &sep.lambdas)?;
    let s2 = params.s * params.s;
    let v: Vec<C64> = sep
        .lambdas
        .iter()
        .zip(&sep.mus)
        .map(|(&l, &m)| {
            let poles: C64 = params.epsilon.iter().map(|&e| s2 / ((l - e) * (l - e))).sum();
            0.5 * (m * m - 4.0 * l * l - 4.0 * hnp1 - poles)
        })
        .collect();
    Ok(binv
        .iter()
        .map(|row| row.iter().zip(&v).map(|(b, v)| b * v).sum::<C64>().re)
        .collect())
}

/// d lambda_k / d t_i for the flow of H_i (0-based, i < n).
pub fn separated_flow_field(params: &ModelParams, sep: &SeparatedCoords, i: usize) -> Result<Vec<C64>> {
    let binv = b_inverse(params, &sep.lambdas)?;
    Ok(sep
        .mus
        .iter()
        .enumerate()
        .map(|(k, &m)| I * m * binv[i][k])
        .collect())
}

/// Largest |mu_k^2 - Lambda(lambda_k)| with Lambda taken from the Hamiltonians.
pub fn curve_residual(params: &ModelParams, sep: &SeparatedCoords, h: &[f64]) -> f64 {
    let q = spectral_polynomial_from_hamiltonians(params, h);
    let pe = params.eps_poly();
    sep.lambdas
        .iter()
        .zip(&sep.mus)
        .map(|(&l, &m)| {
            let d = poly::eval(&pe, l);
            (m * m - poly::eval(&q, l) / (d * d)).norm()
        })
        .fold(0.0, f64::max)
}

/// On the critical level set, mu_k = 2 sign_k prod_l (lambda_k - E_l) / prod_j (lambda_k - eps_j).
/// Returns sign_k, or None where both signs fit equally well (branch points).
pub fn branch_signs(params: &ModelParams, roots: &[C64], sep: &SeparatedCoords) -> Vec<Option<i8>> {
    let pe = params.eps_poly();
    sep.lambdas
        .iter()
        .zip(&sep.mus)
        .map(|(&l, &m)| {
            let r: C64 = 2.0 * roots.iter().map(|&e| l - e).product::<C64>() / poly::eval(&pe, l);
            let (dp, dm) = ((m - r).norm(), (m + r).norm());
            if (dp - dm).abs() <= 1e-9 * (1.0 + m.norm()) {
                None
            } else if dp < dm {
                Some(1)
            } else {
                Some(-1)
            }
        })
        .collect()
}
