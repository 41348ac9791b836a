use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use jcg_core::actions::{a_cycle_action, b_cycle_action, build_curve};
use jcg_core::bethe::{residue_identity_check, solve_bethe, BetheData};
use jcg_core::invariants::{
    diagonal_invariant, in_out_experiment, invariant_report, monodromy_integral, omega_regular,
    periodic_coeffs,
};
use jcg_core::model::{hamiltonians, make_state, physical_coeffs, ModelParams, PhaseState};
use jcg_core::normal::{kl_from_normal, normal_coordinates};
use jcg_core::ode::evolve_sampled;
use jcg_core::soliton::{divisor_track, init_soliton, reconstruct, DivisorSample};
use jcg_core::Complex64 as C64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::output::{cx, cx_list, emit, render_json, Table};
use crate::{Command, ModelArg, Reproduce};

const BETHE_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {msg}")]
    Config { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] jcg_core::Error),
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use jcg_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Config { .. } => 1,
            CliError::Core(
                E::InvalidParams(_)
                | E::CasimirViolation { .. }
                | E::PoleAtEpsilon(_)
                | E::TooManySpins(_)
                | E::NotFocusFocus
                | E::ZeroAmplitude(_)
                | E::SingularFiber,
            ) => 1,
            CliError::Core(_) | CliError::Check(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Cx {
    re: f64,
    im: f64,
}

impl From<&Cx> for C64 {
    fn from(c: &Cx) -> C64 {
        C64::new(c.re, c.im)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    b: Cx,
    spins: Vec<[f64; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolitonFile {
    x0: Vec<Cx>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn load_model(arg: &ModelArg) -> Result<ModelParams> {
    let mut p: ModelParams = read_json(&arg.config)?;
    if let Some(signs) = &arg.signs {
        p.signs = signs.clone();
    }
    p.validate()?;
    Ok(p)
}

fn load_state(params: &ModelParams, path: &Path) -> Result<PhaseState> {
    let f: StateFile = read_json(path)?;
    Ok(make_state(params, C64::from(&f.b), f.spins)?)
}

fn state_json(st: &PhaseState) -> Value {
    json!({ "b": cx(st.b), "spins": st.spins })
}

fn bethe_for(params: &ModelParams) -> Result<BetheData> {
    Ok(solve_bethe(params, &params.signs, BETHE_TOL)?)
}

/// Parse "a+bi", "a-bi", "a", "bi".
pub fn parse_complex(s: &str) -> Result<C64> {
    let bad = || CliError::Usage(format!("cannot parse complex number '{s}'"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => x.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, imag(&body[k..])?))
        }
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

fn focus_index(bethe: &BetheData, focus: usize) -> Result<usize> {
    if focus == 0 || focus > bethe.m() {
        return Err(CliError::Usage(format!(
            "focus must be between 1 and {}, got {focus}",
            bethe.m()
        )));
    }
    Ok(focus - 1)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![b];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn print_json(v: &Value) -> Result<()> {
    emit(&render_json(v), None).map_err(|source| CliError::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn write_out(text: &str, out: Option<&Path>) -> Result<()> {
    emit(text, out).map_err(|source| CliError::Io {
        path: out.map_or_else(|| "<stdout>".into(), Path::to_path_buf),
        source,
    })
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Bethe { model } => {
            let p = load_model(&model)?;
            let b = bethe_for(&p)?;
            print_json(&json!({
                "signs": b.signs,
                "roots": cx_list(&b.roots),
                "pairing": b.pairing,
                "williamson": { "me": b.williamson.me, "mh": b.williamson.mh, "mff": b.williamson.mff },
                "aprime": cx_list(&b.aprime),
                "residue_check": residue_identity_check(&p, &b.signs, &b.roots),
            }))
        }
        Command::Normal { model, state } => {
            let p = load_model(&model)?;
            let b = bethe_for(&p)?;
            let st = load_state(&p, &state)?;
            let nc = normal_coordinates(&p, &b, &st)?;
            let (k, l) = kl_from_normal(&nc);
            print_json(&json!({
                "z": cx_list(&nc.z),
                "w": cx_list(&nc.w),
                "K": k,
                "L": l,
                "mismatch": nc.mismatch,
            }))
        }
        Command::Evolve { model, state, coeffs, duration, samples, tol, out } => {
            let p = load_model(&model)?;
            if !(tol > 0.0) {
                return Err(CliError::Usage("tol must be positive".into()));
            }
            let st = load_state(&p, &state)?;
            let coeffs = coeffs.unwrap_or_else(|| physical_coeffs(&p));
            if coeffs.len() != p.n + 1 {
                return Err(CliError::Usage(format!("expected {} coefficients", p.n + 1)));
            }
            let times = linspace(0.0, duration, samples.max(2));
            let tr = evolve_sampled(&p, &st, &coeffs, &times, tol)?;
            log::info!(
                "{} steps, H drift {:.3e}, {} renormalizations",
                tr.steps,
                tr.hamiltonian_drift,
                tr.renormalizations
            );
            let mut header = vec!["t".to_string(), "re_b".into(), "im_b".into()];
            for j in 1..=p.n {
                header.extend(["x", "y", "z"].map(|c| format!("s{j}_{c}")));
            }
            header.extend((1..=p.n + 1).map(|i| format!("H{i}")));
            let rows = tr
                .times
                .iter()
                .zip(&tr.states)
                .map(|(&t, s)| {
                    let mut r = vec![s.b.re, s.b.im];
                    r.extend(s.spins.iter().flatten());
                    r.extend(hamiltonians(&p, s).values);
                    (t, Some(r))
                })
                .collect();
            write_out(&Table { header, rows }.render(), out.as_deref())
        }
        Command::Soliton { model, soliton, times, out } => {
            let p = load_model(&model)?;
            if times.len() != p.n + 1 {
                return Err(CliError::Usage(format!("expected {} times", p.n + 1)));
            }
            let b = bethe_for(&p)?;
            let f: SolitonFile = read_json(&soliton)?;
            let x0: Vec<C64> = f.x0.iter().map(C64::from).collect();
            let sol = init_soliton(&b, &x0)?;
            let r = reconstruct(&p, &sol, &times)?;
            log::info!("P mismatch {:.3e}, |b|^2 = {:.6e}", r.p_mismatch, r.bbar_b);
            write_out(&render_json(&state_json(&r.state)), out.as_deref())
        }
        Command::Divisor { model, soliton, duration, samples, focus, c1, out } => {
            let p = load_model(&model)?;
            let b = bethe_for(&p)?;
            let j = focus_index(&b, focus)?;
            let c = parse_complex(&c1)?;
            let f: SolitonFile = read_json(&soliton)?;
            let x0: Vec<C64> = f.x0.iter().map(C64::from).collect();
            let sol = init_soliton(&b, &x0)?;
            let (alpha, beta) = periodic_coeffs(&p, &b, j, c)?;
            let times = linspace(-0.5 * duration, 0.5 * duration, samples);
            let track = divisor_track(&sol, &alpha, &beta, &times);
            write_out(&divisor_table(p.n, b.m(), &track).render(), out.as_deref())
        }
        Command::Actions { model, state, cycle, samples } => {
            let p = load_model(&model)?;
            let st = load_state(&p, &state)?;
            let b = solve_bethe(&p, &p.signs, BETHE_TOL).ok().filter(BetheData::is_focus_focus);
            let curve = build_curve(&p, &st, b.as_ref())?;
            let res = match cycle.split_once(':') {
                Some(("A", j)) => {
                    let b = b.ok_or(jcg_core::Error::NotFocusFocus)?;
                    let j = j
                        .parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("bad cycle '{cycle}'")))?;
                    a_cycle_action(&curve, focus_index(&b, j)?, samples)?
                }
                Some(("B", path)) => {
                    let pts: Vec<Cx> = read_json(Path::new(path))?;
                    let pts: Vec<C64> = pts.iter().map(C64::from).collect();
                    b_cycle_action(&curve, &pts, samples)?
                }
                _ => return Err(CliError::Usage(format!("cycle must be A:<j> or B:<file>, got '{cycle}'"))),
            };
            print_json(&json!({
                "value": cx(res.value),
                "converged": res.converged,
                "samples_used": res.samples_used,
            }))
        }
        Command::Invariants { model, focus } => {
            let p = load_model(&model)?;
            let b = bethe_for(&p)?;
            let r = invariant_report(&p, &b, focus_index(&b, focus)?)?;
            print_json(&json!({
                "j": r.j,
                "rho": r.rho,
                "gamma": r.gamma,
                "rho_z": cx_list(&r.rho_z),
                "rho_w": cx_list(&r.rho_w),
                "alpha": r.alpha,
                "beta": r.beta,
                "omega_reg": r.omega_reg,
            }))
        }
        Command::Monodromy { model, focus, loop_index, radius, samples } => {
            let p = load_model(&model)?;
            let b = bethe_for(&p)?;
            let j = focus_index(&b, focus)?;
            let k = focus_index(&b, loop_index)?;
            let (rho, gamma) = diagonal_invariant(&p, &b, j)?;
            let radius = radius.unwrap_or(rho);
            let value = monodromy_integral(&p, &b, j, k, radius, samples)?;
            let expected = if j == k { radius * gamma.sin() } else { 0.0 };
            print_json(&json!({
                "focus": focus,
                "loop": loop_index,
                "radius": radius,
                "samples": samples,
                "value": value,
                "expected": expected,
            }))
        }
        Command::Inout { model, focus, delta, c1, tol } => {
            let p = load_model(&model)?;
            let b = bethe_for(&p)?;
            let j = focus_index(&b, focus)?;
            let mut cs = vec![C64::new(0.0, 0.0); b.m()];
            cs[j] = parse_complex(&c1)?;
            let r = in_out_experiment(&p, &b, j, delta, &cs, tol)?;
            let rho_w: Vec<Value> = r.rho_w.iter().map(|v| v.map_or(Value::Null, cx)).collect();
            print_json(&json!({
                "phi0": cx(r.phi0),
                "phi0_predicted": cx(r.phi0_predicted),
                "rho_z": cx_list(&r.rho_z),
                "rho_w": rho_w,
                "duration": r.duration,
                "tau": r.tau,
                "c_drift": r.c_drift,
            }))
        }
        Command::Reproduce { which: Reproduce::OneSpin } => reproduce_one_spin(),
        Command::Reproduce { which: Reproduce::Fig3 { samples, out } } => reproduce_fig3(samples, out.as_deref()),
    }
}

fn divisor_table(n: usize, m: usize, track: &[(f64, Option<DivisorSample>)]) -> Table {
    let np = n - m;
    let mut header = vec!["t".to_string()];
    for (tag, count) in [("minus", m), ("plus", np)] {
        for k in 1..=count {
            header.push(format!("re_lambda_{tag}_{k}"));
            header.push(format!("im_lambda_{tag}_{k}"));
        }
    }
    let rows = track
        .iter()
        .map(|(t, s)| {
            let row = s
                .as_ref()
                .filter(|s| s.minus.len() == m && s.plus.len() == np)
                .map(|s| s.minus.iter().chain(&s.plus).flat_map(|z| [z.re, z.im]).collect());
            if row.is_none() {
                log::warn!("divisor singular at t = {t}");
            }
            (*t, row)
        })
        .collect();
    Table { header, rows }
}

fn reproduce_one_spin() -> Result<()> {
    let p = ModelParams::new(1.0, 0.0, vec![0.0], vec![1])?;
    let b = bethe_for(&p)?;
    let (rho, gamma) = diagonal_invariant(&p, &b, 0)?;
    let reg = omega_regular(&p, &b, 0)?;
    let checks = [
        ("log rho = 5 log2", rho.ln(), 5.0 * 2f64.ln()),
        ("gamma = -pi/2", gamma, -PI / 2.0),
        ("Omega_reg dK = 5 log2 / 2pi", reg[0], 5.0 * 2f64.ln() / (2.0 * PI)),
        ("Omega_reg dL = (pi/2) / 2pi", reg[1], 0.25),
    ];
    let mut failed = Vec::new();
    for (name, got, want) in checks {
        let ok = (got - want).abs() < 1e-10;
        println!("{name}: {} (measured {got:.16e}, expected {want:.16e})", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}

fn reproduce_fig3(samples: usize, out: Option<&Path>) -> Result<()> {
    let p = ModelParams::new(1.0, 0.0, vec![-1.0, 0.0, 1.0], vec![1, -1, 1])?;
    let b = bethe_for(&p)?;
    let sol = init_soliton(&b, &[C64::new(0.5, 0.0), C64::new(0.0, 0.5)])?;
    let (alpha, beta) = periodic_coeffs(&p, &b, 0, C64::new(1e-8, 0.0))?;
    let times = linspace(-PI, PI, samples.max(2));
    let track = divisor_track(&sol, &alpha, &beta, &times);
    let near = |v: &[C64], e: C64| v.iter().map(|r| (r - e).norm()).fold(f64::INFINITY, f64::min);
    for (t, s) in [track.first(), track.last()].into_iter().flatten() {
        if let Some(s) = s {
            let (a, c) = if *t < 0.0 { (b.upper(0), b.lower(0)) } else { (b.lower(0), b.upper(0)) };
            log::info!(
                "t = {t:.4}: lambda^- to {a:.6}: {:.2e}, lambda^+ to {c:.6}: {:.2e}",
                near(&s.minus, a),
                near(&s.plus, c)
            );
        }
    }
    write_out(&divisor_table(p.n, b.m(), &track).render(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let c = |s: &str| parse_complex(s).unwrap();
        assert_eq!(c("1e-5+0i"), C64::new(1e-5, 0.0));
        assert_eq!(c("-2.5-3i"), C64::new(-2.5, -3.0));
        assert_eq!(c("1e-3-2e-4i"), C64::new(1e-3, -2e-4));
        assert_eq!(c("4"), C64::new(4.0, 0.0));
        assert_eq!(c("-i"), C64::new(0.0, -1.0));
        assert_eq!(c("2.5i"), C64::new(0.0, 2.5));
        assert!(parse_complex("x+1i").is_err());
    }
}
