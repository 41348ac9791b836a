//! Dense complex polynomials, coefficients stored lowest degree first.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const MAX_ABERTH_ITERS: usize = 500;

pub fn eval(p: &[C64], x: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Value and first derivative by Horner.
pub fn eval_with_derivative(p: &[C64], x: C64) -> (C64, C64) {
    let mut v = C64::new(0.0, 0.0);
    let mut d = C64::new(0.0, 0.0);
    for &c in p.iter().rev() {
        d = d * x + v;
        v = v * x + c;
    }
    (v, d)
}

pub fn degree(p: &[C64]) -> usize {
    p.iter().rposition(|c| *c != C64::new(0.0, 0.0)).unwrap_or(0)
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or_default() + b.get(i).copied().unwrap_or_default())
        .collect()
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or_default() - b.get(i).copied().unwrap_or_default())
        .collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|&c| c * s).collect()
}

pub fn conj(a: &[C64]) -> Vec<C64> {
    a.iter().map(|c| c.conj()).collect()
}

pub fn derivative(p: &[C64]) -> Vec<C64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[C64]) -> Vec<C64> {
    roots.iter().fold(vec![C64::new(1.0, 0.0)], |acc, &r| {
        mul(&acc, &[-r, C64::new(1.0, 0.0)])
    })
}

pub fn from_real_roots(roots: &[f64]) -> Vec<C64> {
    let r: Vec<C64> = roots.iter().map(|&x| C64::new(x, 0.0)).collect();
    from_roots(&r)
}

/// Euclidean division; returns (quotient, remainder).
pub fn divide(num: &[C64], den: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let dd = degree(den);
    let lead = den[dd];
    let mut rem: Vec<C64> = num.to_vec();
    let nd = degree(num);
    if nd < dd {
        return (vec![C64::new(0.0, 0.0)], rem);
    }
    let mut quo = vec![C64::new(0.0, 0.0); nd - dd + 1];
    for k in (0..=nd - dd).rev() {
        let q = rem[k + dd] / lead;
        quo[k] = q;
        for j in 0..=dd {
            rem[k + j] -= q * den[j];
        }
    }
    rem.truncate(dd.max(1));
    (quo, rem)
}

/// Rewrite q(x) with x = (lambda - center)/radius as a polynomial in lambda.
pub fn unscale(q: &[C64], center: f64, radius: f64) -> Vec<C64> {
    let lin = [C64::new(-center / radius, 0.0), C64::new(1.0 / radius, 0.0)];
    let mut out = vec![C64::new(0.0, 0.0)];
    for &c in q.iter().rev() {
        out = add(&mul(&out, &lin), &[c]);
    }
    out
}

pub fn max_abs(p: &[C64]) -> f64 {
    p.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// All roots of `p` by Aberth-Ehrlich simultaneous iteration.
pub fn roots(p: &[C64]) -> Result<Vec<C64>> {
    let d = degree(p);
    if d == 0 {
        return Ok(Vec::new());
    }
    let p = &p[..=d];
    let dp = derivative(p);
    let lead = p[d].norm();

    // Cauchy-type radius for the starting circle.
    let radius = (0..d)
        .map(|k| (p[k].norm() / lead).powf(1.0 / (d - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<C64> = (0..d)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4;
            C64::from_polar(radius, th)
        })
        .collect();

    for _ in 0..MAX_ABERTH_ITERS {
        let mut max_step: f64 = 0.0;
        for i in 0..d {
            let v = eval(p, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / eval(&dp, z[i]);
            let mut s = C64::new(0.0, 0.0);
            for j in 0..d {
                if j != i {
                    s += 1.0 / (z[i] - z[j]);
                }
            }
            let w = ratio / (1.0 - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-15 {
            return Ok(z);
        }
    }
    // Accept if the residuals are already at roundoff level.
    let scale: f64 = p.iter().map(|c| c.norm()).sum();
    let worst = z
        .iter()
        .map(|&x| eval(p, x).norm() / (scale * (1.0 + x.norm()).powi(d as i32)))
        .fold(0.0, f64::max);
    if worst < 1e-12 {
        Ok(z)
    } else {
        Err(Error::NoConvergence(MAX_ABERTH_ITERS))
    }
}

/// Newton steps on `p` from `z0` until the correction stalls.
pub fn polish(p: &[C64], z0: C64) -> C64 {
    let mut z = z0;
    for _ in 0..8 {
        let (v, d) = eval_with_derivative(p, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = v / d;
        z -= step;
        if step.norm() <= 1e-17 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn horner_matches_naive() {
        let p = [c(1.0, 0.0), c(-2.0, 1.0), c(0.5, 0.0), c(0.0, 3.0)];
        let x = c(0.3, -0.7);
        let naive: C64 = p.iter().enumerate().map(|(k, &a)| a * x.powi(k as i32)).sum();
        assert!((eval(&p, x) - naive).norm() < 1e-14);
        let (_, d) = eval_with_derivative(&p, x);
        let dn: C64 = derivative(&p)
            .iter()
            .enumerate()
            .map(|(k, &a)| a * x.powi(k as i32))
            .sum();
        assert!((d - dn).norm() < 1e-14);
    }

    #[test]
    fn roots_of_product() {
        let r = [c(1.0, 2.0), c(-0.5, 0.0), c(3.0, -1.0), c(0.0, 0.1)];
        let p = from_roots(&r);
        let mut found = roots(&p).unwrap();
        for want in r {
            let (i, _) = found
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - want).norm().total_cmp(&(b.1 - want).norm()))
                .unwrap();
            assert!((found[i] - want).norm() < 1e-10);
            found.remove(i);
        }
    }

    #[test]
    fn division_is_exact_for_multiples() {
        let a = from_roots(&[c(1.0, 0.0), c(2.0, 1.0)]);
        let b = from_roots(&[c(-1.0, 0.5), c(0.0, 2.0), c(4.0, 0.0)]);
        let prod = mul(&a, &b);
        let (q, r) = divide(&prod, &b);
        assert!(max_abs(&r) < 1e-12);
        assert!(max_abs(&sub(&q, &a)) < 1e-12);
    }

    #[test]
    fn unscale_round_trip() {
        let p = [c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.0)];
        let q = unscale(&p, 0.5, 2.0);
        let lam = c(1.3, 0.2);
        let x = (lam - 0.5) / 2.0;
        assert!((eval(&q, lam) - eval(&p, x)).norm() < 1e-14);
    }
}
