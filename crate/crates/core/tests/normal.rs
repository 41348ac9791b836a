use std::f64::consts::PI;

use jcg_core::bethe::{solve_bethe, BetheData};
use jcg_core::model::{critical_state, hamiltonians, make_state, spectral_invariant, unit_coeffs, ModelParams, PhaseState};
use jcg_core::normal::*;
use jcg_core::ode::evolve_to;
use jcg_core::Complex64 as C64;

fn setup() -> (ModelParams, BetheData) {
    let p = ModelParams::new(1.0, 0.0, vec![-1.0, 0.0, 1.0], vec![1, -1, 1]).unwrap();
    let b = solve_bethe(&p, &p.signs, 1e-12).unwrap();
    (p, b)
}

fn near(p: &ModelParams, b: &BetheData, d: f64) -> PhaseState {
    let z = [C64::new(d, 0.3 * d), C64::new(-0.5 * d, 0.8 * d)];
    let w = [C64::new(0.7 * d, -0.2 * d), C64::new(0.4 * d, 0.9 * d)];
    state_from_normal(p, b, &z, &w).unwrap()
}

#[test]
fn critical_state_is_the_origin() {
    let (p, b) = setup();
    let nc = normal_coordinates(&p, &b, &critical_state(&p, &p.signs)).unwrap();
    assert!(nc.z.iter().chain(&nc.w).all(|v| v.norm() == 0.0));
    let (k, l) = kl_quadratic(&p, &b, &critical_state(&p, &p.signs)).unwrap();
    assert!(k.iter().chain(&l).all(|v| v.abs() < 1e-14));
}

#[test]
fn real_states_pass_the_cross_check() {
    let (p, b) = setup();
    let nc = normal_coordinates(&p, &b, &near(&p, &b, 0.05)).unwrap();
    assert!(nc.mismatch < 1e-8);
}

#[test]
fn kl_phase_invariance() {
    let nc = NormalCoords {
        z: vec![C64::new(0.3, -0.1)],
        w: vec![C64::new(-0.2, 0.4)],
        mismatch: 0.0,
    };
    let r = C64::new(0.0, 1.1).exp();
    let rot = NormalCoords {
        z: vec![nc.z[0] * r],
        w: vec![nc.w[0] * r],
        mismatch: 0.0,
    };
    let (a, b) = (kl_from_normal(&nc), kl_from_normal(&rot));
    assert!((a.0[0] - b.0[0]).abs() < 1e-15 && (a.1[0] - b.1[0]).abs() < 1e-15);
}

#[test]
fn linear_in_a_spin_displacement() {
    let (p, b) = setup();
    let coords = |d: f64| {
        let th = d / p.s;
        let mut spins: Vec<[f64; 3]> = p.signs.iter().map(|&e| [0.0, 0.0, f64::from(e) * p.s]).collect();
        spins[0] = [p.s * th.sin(), 0.0, p.s * th.cos()];
        normal_coordinates(&p, &b, &make_state(&p, C64::new(0.0, 0.0), spins).unwrap()).unwrap()
    };
    let (a, h) = (coords(1e-3), coords(5e-4));
    for j in 0..2 {
        // z(d) - 2 z(d/2) is second order
        let dz = (a.z[j] - 2.0 * h.z[j]).norm();
        assert!(dz < 1e-5 * a.z[j].norm(), "{dz}");
    }
}

#[test]
fn quadratic_generators_agree_to_third_order() {
    let (p, b) = setup();
    let err = |d: f64| {
        let st = near(&p, &b, d);
        let (k1, l1) = kl_from_normal(&normal_coordinates(&p, &b, &st).unwrap());
        let (k2, l2) = kl_quadratic(&p, &b, &st).unwrap();
        (0..2).map(|j| (k1[j] - k2[j]).abs().max((l1[j] - l2[j]).abs())).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.02), err(0.01));
    let order = (e1 / e2).log2();
    assert!(order > 2.6, "order {order}");
}

#[test]
fn coefficients_reproduce_the_quadratic_generators() {
    let (p, b) = setup();
    let g = normal_generator_coeffs(&p, &b).unwrap();
    assert!(g.max_imag < 1e-12);
    let st = near(&p, &b, 0.05);
    let (k1, l1) = g.evaluate(&p, &b, &st);
    let (k2, l2) = kl_quadratic(&p, &b, &st).unwrap();
    for j in 0..2 {
        assert!((k1[j] - k2[j]).abs() < 1e-12 && (l1[j] - l2[j]).abs() < 1e-12);
    }
}

#[test]
fn bc_at_roots_is_the_spectral_invariant_to_higher_order() {
    let (p, b) = setup();
    let gap = |d: f64| {
        let st = near(&p, &b, d);
        (0..4)
            .map(|l| {
                let e = b.roots[l];
                let lax = jcg_core::model::lax_entries(&p, &st, e).unwrap();
                let lam = spectral_invariant(&p, &st, e).unwrap();
                ((lax.b * lax.c - lam).norm(), lam.norm())
            })
            .fold((0.0, 0.0), |a, v| (f64::max(a.0, v.0), f64::max(a.1, v.1)))
    };
    let (g1, lam1) = gap(0.02);
    let (g2, _) = gap(0.01);
    assert!(g1 < 1e-3 * lam1);
    assert!((g1 / g2).log2() > 3.5, "{}", (g1 / g2).log2());
}

#[test]
fn normal_flows_act_linearly() {
    let (p, b) = setup();
    let g = normal_generator_coeffs(&p, &b).unwrap();
    let st = near(&p, &b, 1e-4);
    let nc0 = normal_coordinates(&p, &b, &st).unwrap();
    // L_1 for 2 pi is the identity, K_1 scales z_1 by e^a and w_1 by e^-a
    let back = evolve_to(&p, &st, &g.combine(&[0.0, 0.0], &[1.0, 0.0]), 2.0 * PI, 1e-12).unwrap();
    let nc1 = normal_coordinates(&p, &b, &back).unwrap();
    for j in 0..2 {
        assert!((nc1.z[j] - nc0.z[j]).norm() < 1e-3 * nc0.z[j].norm());
    }
    let a = 0.8;
    let moved = evolve_to(&p, &st, &g.combine(&[1.0, 0.0], &[0.0, 0.0]), a, 1e-12).unwrap();
    let nc2 = normal_coordinates(&p, &b, &moved).unwrap();
    assert!((nc2.z[0] - nc0.z[0] * a.exp()).norm() < 1e-3 * nc0.z[0].norm());
    assert!((nc2.w[0] - nc0.w[0] * (-a).exp()).norm() < 1e-3 * nc0.w[0].norm());
    assert!((nc2.z[1] - nc0.z[1]).norm() < 1e-3 * nc0.z[1].norm());
}

#[test]
fn generators_ignore_the_phase_flow() {
    let (p, b) = setup();
    let st = near(&p, &b, 0.05);
    let moved = evolve_to(&p, &st, &unit_coeffs(&p, 3), 1.3, 1e-12).unwrap();
    let (k1, l1) = kl_quadratic(&p, &b, &st).unwrap();
    let (k2, l2) = kl_quadratic(&p, &b, &moved).unwrap();
    for j in 0..2 {
        assert!((k1[j] - k2[j]).abs() < 1e-12 && (l1[j] - l2[j]).abs() < 1e-12);
    }
    let _ = hamiltonians(&p, &st);
}

#[test]
fn blocks_for_three_spins() {
    let (_, b) = setup();
    let blocks = classify_blocks(&b);
    assert_eq!(
        blocks,
        vec![Block::FocusFocus { upper: 0, lower: 2 }, Block::FocusFocus { upper: 1, lower: 3 }]
    );
}
