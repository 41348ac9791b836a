use jcg_core::bethe::solve_bethe;
use jcg_core::model::{lax_entries, unit_coeffs, ModelParams};
use jcg_core::ode::evolve_to;
use jcg_core::soliton::*;
use jcg_core::Complex64 as C64;

fn three_spin() -> ModelParams {
    ModelParams::new(1.0, 0.0, vec![-1.0, 0.0, 1.0], vec![1, -1, 1]).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn reconstruction_follows_every_flow() {
    let p = three_spin();
    let b = solve_bethe(&p, &p.signs, 1e-12).unwrap();
    let sol = init_soliton(&b, &[c(0.5, 0.2), c(-0.4, 0.9)]).unwrap();
    let s0 = reconstruct_state(&p, &sol, &[0.0; 4]).unwrap();
    for i in 0..4 {
        let mut t = [0.0; 4];
        t[i] = 0.7;
        let exact = reconstruct_state(&p, &sol, &t).unwrap();
        let num = evolve_to(&p, &s0, &unit_coeffs(&p, i), 0.7, 1e-12).unwrap();
        let err = (exact.b - num.b).norm().max(
            exact
                .spins
                .iter()
                .zip(&num.spins)
                .flat_map(|(a, b)| (0..3).map(move |k| (a[k] - b[k]).abs()))
                .fold(0.0, f64::max),
        );
        assert!(err < 1e-9, "flow {i}: {err}");
    }
}

#[test]
fn determinant_form_of_c_matches_lax_matrix() {
    let p = three_spin();
    let b = solve_bethe(&p, &p.signs, 1e-12).unwrap();
    let sol = init_soliton(&b, &[c(-0.3, 1.1), c(0.6, 0.2)]).unwrap();
    let t = [0.2, -0.4, 0.1, 0.3];
    let st = reconstruct_state(&p, &sol, &t).unwrap();
    for lam in [c(0.3, 0.4), c(2.0, -1.0), c(-0.5, 0.0)] {
        let direct = lax_entries(&p, &st, lam).unwrap().c;
        let det = c_of_lambda(&p, &sol, &t, lam).unwrap();
        assert!((direct - det).norm() < 1e-10 * (1.0 + direct.norm()), "{direct} {det}");
    }
}

#[test]
fn two_routes_to_the_spectral_polynomial_agree() {
    let p = three_spin();
    let b = solve_bethe(&p, &p.signs, 1e-12).unwrap();
    let sol = init_soliton(&b, &[c(0.8, -0.1), c(0.2, 0.5)]).unwrap();
    let r = reconstruct(&p, &sol, &[0.1, 0.2, 0.3, 0.4]).unwrap();
    assert!(r.p_mismatch < 1e-12);
    assert!((r.bbar_b - r.polys.bbar.norm_sqr()).abs() < 1e-10);
    let (_, _, resid) = s_polynomials(&r.polys, &b.roots).unwrap();
    assert!(resid < 1e-10, "{resid}");
}

#[test]
fn telescoping_identity() {
    let p = three_spin();
    let b = solve_bethe(&p, &p.signs, 1e-12).unwrap();
    for k in 0..4 {
        for l in 0..4 {
            let v = telescoping_sum(&p, &b, k, l);
            let want = if k == l { 2.0 - b.aprime[k] } else { c(2.0, 0.0) };
            assert!((v - want).norm() < 1e-12);
        }
    }
}

#[test]
fn reality_survives_long_random_flows() {
    use rand::{Rng, SeedableRng};
    let p = three_spin();
    let b = solve_bethe(&p, &p.signs, 1e-12).unwrap();
    let mut sol = init_soliton(&b, &[c(0.5, 0.2), c(-0.4, 0.9)]).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let l = rng.gen_range(0..2);
        sol = normal_flow_map(&sol, l, rng.gen_range(-0.1..0.1), rng.gen_range(-3.0..3.0));
        assert!(sol.reality_residual() < 1e-14);
    }
}

#[test]
fn asymptotic_c_has_second_order_error() {
    let p = three_spin();
    let b = solve_bethe(&p, &p.signs, 1e-12).unwrap();
    let lam = c(0.3, 0.25);
    let mut errs = Vec::new();
    for scale in [20.0, 40.0, 80.0] {
        let sol = init_soliton(&b, &[c(scale, 0.3 * scale), c(-0.5 * scale, scale)]).unwrap();
        let x = sol.x();
        let exact = c_of_lambda(&p, &sol, &[0.0; 4], lam).unwrap();
        let approx = asymptotic_c(&p, &b, &[0, 1], &x, lam);
        errs.push((exact - approx).norm() / approx.norm());
        let at = asymptotic_c_at_root(&p, &b, &[0, 1], &x, 0);
        let ex = c_of_lambda(&p, &sol, &[0.0; 4], b.upper(0)).unwrap();
        assert!((ex - at).norm() < 0.1 * at.norm());
        let (d1, d2, d) = asymptotic_determinants(&b, &x, lam);
        let xs = x.clone();
        let rd = det_d(&b.roots, &xs).unwrap();
        assert!((rd - d).norm() < 0.05 * d.norm());
        assert!((det_d1(&b.roots, &xs, lam) - d1).norm() < 0.05 * d1.norm());
        assert!((det_d2(&b.roots, &xs, lam) - d2).norm() < 0.05 * d2.norm());
    }
    for w in errs.windows(2) {
        let slope = (w[1] / w[0]).log2();
        assert!((slope + 2.0).abs() < 0.3, "slope {slope}");
    }
}

#[test]
fn mixed_index_set_asymptotics() {
    // large amplitudes on E_1 and conj(E_2)
    let p = three_spin();
    let b = solve_bethe(&p, &p.signs, 1e-12).unwrap();
    let lam = c(-0.2, 0.6);
    let mut errs = Vec::new();
    for scale in [20.0, 40.0, 80.0] {
        let sol = init_soliton(&b, &[c(scale, 0.2 * scale), c(0.3 / scale, 0.1 / scale)]).unwrap();
        let x = sol.x();
        let exact = c_of_lambda(&p, &sol, &[0.0; 4], lam).unwrap();
        let approx = asymptotic_c(&p, &b, &[0, 3], &x, lam);
        errs.push((exact - approx).norm() / approx.norm());
    }
    assert!(errs[2] < errs[0] / 8.0, "{errs:?}");
}

#[test]
fn b_at_root_for_small_amplitudes() {
    let p = three_spin();
    let b = solve_bethe(&p, &p.signs, 1e-12).unwrap();
    for scale in [1e-2, 1e-3] {
        let sol = init_soliton(&b, &[c(scale, 0.5 * scale), c(-0.7 * scale, scale)]).unwrap();
        let x = sol.x();
        let st = reconstruct_state(&p, &sol, &[0.0; 4]).unwrap();
        let exact = lax_entries(&p, &st, b.upper(0)).unwrap().b;
        let approx = asymptotic_b_at_root(&p, &b, &[0, 1], &x, 0);
        assert!((exact - approx).norm() < 10.0 * scale * approx.norm(), "{exact} {approx}");
    }
}
