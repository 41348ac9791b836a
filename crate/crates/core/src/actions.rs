//! Action integrals of sqrt(Lambda) over cycles of the spectral curve
//! y^2 = Q(lambda), with the square root tracked continuously along the
//! contour.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bethe::BetheData;
use crate::error::{Error, Result};
use crate::model::{spectral_polynomial, ModelParams, PhaseState};
use crate::poly::{self, C64};
use crate::quad::gauss_legendre;

const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const DEFAULT_SAMPLES: usize = 2048;
const MAX_SAMPLES: usize = 1 << 20;
const CONVERGENCE_TOL: f64 = 1e-9;
const GL_ORDER: usize = 16;

#[derive(Clone, Debug)]
pub struct SpectralCurve {
    pub q: Vec<C64>,
    pub epsilon: Vec<f64>,
    pub branch_points: Vec<C64>,
    /// a_pairs[l] holds the two branch points that merge into E_l on the
    /// critical fiber (only with a reference).
    pub a_pairs: Vec<(usize, usize)>,
    reference: Option<(f64, BetheData)>,
}

impl SpectralCurve {
    /// Lambda(lambda) = Q / prod (lambda - eps_j)^2.
    pub fn lambda_fn(&self, lambda: C64) -> C64 {
        let d: C64 = self.epsilon.iter().map(|&e| lambda - e).product();
        poly::eval(&self.q, lambda) / (d * d)
    }

    /// Value used to pick the branch of sqrt(Lambda) at a starting point:
    /// a(lambda) of the reference critical fiber, else the principal root.
    fn branch_hint(&self, lambda: C64) -> C64 {
        match &self.reference {
            Some((s, b)) => b
                .signs
                .iter()
                .zip(&self.epsilon)
                .fold(2.0 * lambda, |acc, (&sg, &e)| acc + s * f64::from(sg) / (lambda - e)),
            None => self.lambda_fn(lambda).sqrt(),
        }
    }

    /// Branch points and poles, excluding the listed branch point indices.
    fn singularities_except(&self, skip: &[usize]) -> Vec<C64> {
        self.branch_points
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .map(|(_, &b)| b)
            .chain(self.epsilon.iter().map(|&e| C64::new(e, 0.0)))
            .collect()
    }

    fn all_singularities(&self) -> Vec<C64> {
        self.singularities_except(&[])
    }
}

pub fn build_curve(
    params: &ModelParams,
    state: &PhaseState,
    reference: Option<&BetheData>,
) -> Result<SpectralCurve> {
    let q = spectral_polynomial(params, state);
    let branch_points = match poly::roots(&q) {
        Ok(r) => r,
        Err(Error::NoConvergence(_)) => return Err(Error::RootConditioning(f64::NAN)),
        Err(e) => return Err(e),
    };
    let worst = branch_points
        .iter()
        .map(|&r| {
            let scale: f64 = q.iter().rev().fold(0.0, |acc, c| acc * r.norm() + c.norm());
            poly::eval(&q, r).norm() / scale
        })
        .fold(0.0, f64::max);
    if worst > 1e-6 {
        return Err(Error::RootConditioning(worst));
    }
    let a_pairs = match reference {
        Some(b) => pair_with_roots(&branch_points, &b.roots),
        None => Vec::new(),
    };
    Ok(SpectralCurve {
        q,
        epsilon: params.epsilon.clone(),
        branch_points,
        a_pairs,
        reference: reference.map(|b| (params.s, b.clone())),
    })
}

/// Greedy assignment of two branch points to each double root, closest first.
fn pair_with_roots(points: &[C64], roots: &[C64]) -> Vec<(usize, usize)> {
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (l, &e) in roots.iter().enumerate() {
        for (i, &p) in points.iter().enumerate() {
            cand.push(((p - e).norm(), l, i));
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used = vec![false; points.len()];
    let mut got: Vec<Vec<usize>> = vec![Vec::new(); roots.len()];
    for (_, l, i) in cand {
        if !used[i] && got[l].len() < 2 {
            used[i] = true;
            got[l].push(i);
        }
    }
    got.into_iter()
        .map(|v| (v[0], *v.get(1).unwrap_or(&v[0])))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ActionResult {
    /// (1/2 pi i) times the closed contour integral.
    pub raw: C64,
    /// The normalized value (for A-cycles, K_j + i L_j).
    pub value: C64,
    pub converged: bool,
    pub samples_used: usize,
}

/// Walk the samples of sqrt(Lambda) keeping the branch continuous.
struct Tracker {
    prev: C64,
}

impl Tracker {
    fn next(&mut self, lam: C64) -> Result<C64> {
        let mut v = lam.sqrt();
        if (v - self.prev).norm() > (v + self.prev).norm() {
            v = -v;
        }
        if self.prev.norm() > 0.0 && v.norm() > 0.0 {
            let turn = (v / self.prev).arg().abs();
            if turn > PI / 4.0 {
                return Err(Error::BranchTrackingLoss);
            }
        }
        self.prev = v;
        Ok(v)
    }
}

/// Circle around the pair of branch points that merge into E_l.
#[derive(Clone, Copy, Debug)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

pub fn a_cycle_circle(curve: &SpectralCurve, root: usize) -> Result<Circle> {
    let &(i, k) = curve
        .a_pairs
        .get(root)
        .ok_or_else(|| Error::InvalidParams(format!("no branch-point pair for root {root}")))?;
    let (p, q) = (curve.branch_points[i], curve.branch_points[k]);
    let center = 0.5 * (p + q);
    let half = 0.5 * (p - q).norm();
    let dist = curve
        .singularities_except(&[i, k])
        .iter()
        .map(|s| (s - center).norm())
        .fold(f64::INFINITY, f64::min);
    if dist <= half * 1.01 {
        return Err(Error::ContourCollision(dist));
    }
    Ok(Circle {
        center,
        radius: (half * dist).sqrt(),
    })
}

fn circle_integral(curve: &SpectralCurve, c: Circle, samples: usize) -> Result<C64> {
    let start = c.center + c.radius;
    let mut tr = Tracker {
        prev: curve.branch_hint(start),
    };
    let first = tr.next(curve.lambda_fn(start))?;
    let mut acc = C64::new(0.0, 0.0);
    let h = 2.0 * PI / samples as f64;
    for s in 0..samples {
        let e = (I * (s as f64 * h)).exp();
        let v = if s == 0 { first } else { tr.next(curve.lambda_fn(c.center + c.radius * e))? };
        acc += v * I * c.radius * e * h;
    }
    let back = tr.next(curve.lambda_fn(start))?;
    if (back - first).norm() > (back + first).norm() {
        return Err(Error::BranchTrackingLoss);
    }
    Ok(acc / (2.0 * PI * I))
}

/// Trapezoid rule on the circle around the pair merging into conj(E_j),
/// doubling the sample count until successive values agree. `value` is
/// -2i times the raw integral, which is K_j + i L_j near the critical fiber.
pub fn a_cycle_action(curve: &SpectralCurve, pair: usize, samples: usize) -> Result<ActionResult> {
    let (_, b) = curve
        .reference
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("A-cycles need a reference critical fiber".into()))?;
    if pair >= b.m() {
        return Err(Error::InvalidParams(format!("pair index {pair} out of range")));
    }
    let root = b.m() + pair;
    let (i, k) = curve.a_pairs[root];
    let sep = (curve.branch_points[i] - curve.branch_points[k]).norm();
    if sep == 0.0 {
        return Ok(ActionResult {
            raw: C64::new(0.0, 0.0),
            value: C64::new(0.0, 0.0),
            converged: true,
            samples_used: 0,
        });
    }
    let circle = a_cycle_circle(curve, root)?;
    let mut n = samples.max(8);
    let mut prev = circle_integral(curve, circle, n)?;
    loop {
        let next = circle_integral(curve, circle, 2 * n)?;
        n *= 2;
        let converged = (next - prev).norm() < CONVERGENCE_TOL;
        if converged || n >= MAX_SAMPLES {
            return Ok(ActionResult {
                raw: next,
                value: -2.0 * I * next,
                converged,
                samples_used: n,
            });
        }
        prev = next;
    }
}

fn segment_distance(a: C64, b: C64, p: C64) -> f64 {
    let d = b - a;
    let t = if d.norm_sqr() == 0.0 {
        0.0
    } else {
        (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0)
    };
    (a + d * t - p).norm()
}

/// Split [a, b] until every panel is shorter than `frac` times its
/// distance to the nearest singularity.
fn panels(a: C64, b: C64, sing: &[C64], frac: f64, out: &mut Vec<(C64, C64)>) -> Result<()> {
    let dist = sing
        .iter()
        .map(|&s| segment_distance(a, b, s))
        .fold(f64::INFINITY, f64::min);
    let len = (b - a).norm();
    if dist <= 1e-12 * (1.0 + len) {
        return Err(Error::ContourCollision(dist));
    }
    if len <= frac * dist || out.len() > 1 << 22 {
        out.push((a, b));
        return Ok(());
    }
    let mid = 0.5 * (a + b);
    panels(a, mid, sing, frac, out)?;
    panels(mid, b, sing, frac, out)
}

fn polygon_integral(curve: &SpectralCurve, pts: &[C64], frac: f64) -> Result<(C64, usize)> {
    let sing = curve.all_singularities();
    let mut pan = Vec::new();
    for w in 0..pts.len() {
        let (a, b) = (pts[w], pts[(w + 1) % pts.len()]);
        if (b - a).norm() > 0.0 {
            panels(a, b, &sing, frac, &mut pan)?;
        }
    }
    let (x, wts) = gauss_legendre(GL_ORDER);
    let mut tr = Tracker {
        prev: curve.branch_hint(pts[0]),
    };
    let first = tr.next(curve.lambda_fn(pts[0]))?;
    let mut acc = C64::new(0.0, 0.0);
    for &(a, b) in &pan {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(&wts) {
            let v = tr.next(curve.lambda_fn(mid + half * *xi))?;
            acc += v * half * *wi;
        }
        tr.next(curve.lambda_fn(b))?;
    }
    if (tr.prev - first).norm() > (tr.prev + first).norm() {
        return Err(Error::BranchTrackingLoss);
    }
    Ok((acc / (2.0 * PI * I), pan.len() * GL_ORDER))
}

/// (1/2 pi i) times the integral of sqrt(Lambda) around a closed polygon.
/// Tracking starts at the first waypoint, which should sit well away from
/// branch points. `samples` sets the initial resolution; panels are refined
/// until successive values agree.
pub fn b_cycle_action(curve: &SpectralCurve, waypoints: &[C64], samples: usize) -> Result<ActionResult> {
    if waypoints.len() < 3 {
        return Err(Error::InvalidParams("a closed contour needs at least 3 waypoints".into()));
    }
    let mut frac = (64.0 / samples.max(64) as f64).min(1.0);
    let (mut prev, _) = polygon_integral(curve, waypoints, frac)?;
    loop {
        frac *= 0.5;
        let (next, used) = polygon_integral(curve, waypoints, frac)?;
        let converged = (next - prev).norm() < CONVERGENCE_TOL * (1.0 + next.norm());
        if converged || used >= MAX_SAMPLES {
            return Ok(ActionResult {
                raw: next,
                value: next,
                converged,
                samples_used: used,
            });
        }
        prev = next;
    }
}

/// Closed polygon around the path from a branch point near E_j to one near
/// conj(E_j) (the members with smaller real part), crossing the real axis
/// away from the poles. The contour runs counterclockwise and starts at the
/// crossing, where the branch of sqrt(Lambda) follows a(lambda).
pub fn default_b_contour(curve: &SpectralCurve, pair: usize) -> Result<Vec<C64>> {
    let (_, b) = curve
        .reference
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("B-cycles need a reference critical fiber".into()))?;
    if pair >= b.m() {
        return Err(Error::InvalidParams(format!("pair index {pair} out of range")));
    }
    let pick = |root: usize| -> (usize, usize) {
        let (i, k) = curve.a_pairs[root];
        if curve.branch_points[i].re <= curve.branch_points[k].re {
            (i, k)
        } else {
            (k, i)
        }
    };
    let (ip, ip2) = pick(pair);
    let (iq, iq2) = pick(b.m() + pair);
    let (p, q) = (curve.branch_points[ip], curve.branch_points[iq]);
    let (pp, qp) = (curve.branch_points[ip2], curve.branch_points[iq2]);

    // where to cross the real axis
    let scale = p.im.abs().min(q.im.abs());
    let mut eps = curve.epsilon.clone();
    eps.sort_by(f64::total_cmp);
    let mut cands = vec![0.5 * (p.re + q.re), eps[0] - 1.0, eps[eps.len() - 1] + 1.0];
    cands.extend(eps.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    let target = 0.5 * (p.re + q.re);
    let clear = |x: f64| {
        curve
            .all_singularities()
            .iter()
            .map(|s| (s - C64::new(x, 0.0)).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let x0 = cands
        .iter()
        .copied()
        .filter(|&x| clear(x) >= 0.25 * scale)
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .ok_or(Error::ContourCollision(0.0))?;
    let cross = C64::new(x0, 0.0);

    // leave each end point away from its partner
    let lead = 0.25 * scale;
    let away = |x: C64, partner: C64| -> C64 {
        let d = x - partner;
        if d.norm() == 0.0 {
            x
        } else {
            x + d / d.norm() * lead
        }
    };
    let path = [p, away(p, pp), cross, away(q, qp), q];
    let others = curve.singularities_except(&[ip, iq]);
    let clearance = others
        .iter()
        .map(|&s| {
            path.windows(2)
                .map(|w| segment_distance(w[0], w[1], s))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min);
    if clearance <= 0.0 {
        return Err(Error::ContourCollision(clearance));
    }
    Ok(reversed(&racetrack(&path, 0.3 * clearance, 2)))
}

/// Clockwise offset polygon of width r around an open polyline; starts at
/// the offset of vertex `start` on the left side.
fn racetrack(path: &[C64], r: f64, start: usize) -> Vec<C64> {
    let k = path.len();
    let dir = |i: usize| {
        let d = path[i + 1] - path[i];
        d / d.norm()
    };
    let normal = |d: C64| I * d;
    let mut left = Vec::with_capacity(k);
    let mut right = Vec::with_capacity(k);
    for i in 0..k {
        let n = if i == 0 {
            normal(dir(0))
        } else if i == k - 1 {
            normal(dir(k - 2))
        } else {
            let m = normal(dir(i - 1)) + normal(dir(i));
            let m = m / m.norm();
            // miter length, bounded for sharp turns
            let c = (m.conj() * normal(dir(i))).re.max(0.3);
            m / c
        };
        left.push(path[i] + r * n);
        right.push(path[i] - r * n);
    }
    let cap = |center: C64, from: C64, out: &mut Vec<C64>| {
        // half circle from `from` around `center`, clockwise
        let a0 = (from - center).arg();
        for s in 1..8 {
            let a = a0 - PI * s as f64 / 8.0;
            out.push(center + r * (I * a).exp());
        }
    };
    let mut poly = Vec::with_capacity(2 * k + 14);
    poly.extend(left.iter().copied());
    cap(path[k - 1], left[k - 1], &mut poly);
    poly.extend(right.iter().rev().copied());
    cap(path[0], right[0], &mut poly);
    let n = poly.len();
    let mut out = poly[start..].to_vec();
    out.extend_from_slice(&poly[..start]);
    debug_assert_eq!(out.len(), n);
    out
}

/// Reverse a closed contour, keeping the same starting point.
pub fn reversed(contour: &[C64]) -> Vec<C64> {
    let mut out = vec![contour[0]];
    out.extend(contour[1..].iter().rev().copied());
    out
}
