//! Acceptance criteria 1-10, one line each on stderr. Run with
//! `cargo test -p dispersym --test acceptance`.
//!
//! Criteria 3, 4 and 9 are red as stated. `acceptance_report` checks that
//! everything around the defect is green and that the defect is still there;
//! the strict forms are the ignored `*_strict` tests.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::Command;
use std::time::Instant;

use dispersym_core::algebra::{equivalent_mod_derivatives, normal_form, q, GaussianRational, Polynomial, Rational};
use dispersym_core::operator::DiffOperator;
use dispersym_core::recursion::{verify_structure, x_atom, RecursionState};
use dispersym_lab::chi::unit_bump;
use dispersym_lab::fft::Plan;
use dispersym_lab::hoelder::hoelder_ratio;
use dispersym_lab::sampled::SampledFunction;
use dispersym_lab::spectral::{
    evolve, frequency_sweep, multiplier_oracle, sample_operator, selfadjoint_part, stability_limit, wavepacket,
    CoeffField, SimConfig, WavepacketSpec,
};
use dispersym_lab::tarama::tarama_symbol_numeric;
use dispersym_lab::CoeffExpr;
use num_complex::Complex64;
use serde_json::Value;

struct Verdict {
    pass: bool,
    /// Everything except a documented defect holds.
    sound: bool,
    detail: String,
}

impl Verdict {
    fn green(pass: bool, detail: String) -> Self {
        Verdict { pass, sound: pass, detail }
    }
}

fn cli(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_dispersym")).args(args).output().expect("binary runs");
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), json)
}

fn f(name: &str) -> Polynomial {
    Polynomial::full(name, 0)
}

fn fd(name: &str, d: u32) -> Polynomial {
    Polynomial::full(name, d)
}

fn r(n: i128, d: i128) -> Polynomial {
    Polynomial::rational(q(n, d))
}

fn ir(n: i128, d: i128) -> Polynomial {
    Polynomial::constant(GaussianRational::imag(q(n, d)))
}

/// Compares `conditions` output against `(q, exponent, complex form)` triples.
fn matches_forms(out: &Value, expected: &[(u32, Rational, Polynomial)]) -> Result<(), String> {
    let entries = out["entries"].as_array().ok_or("no entries")?;
    if entries.len() != expected.len() {
        return Err(format!("{} entries, expected {}", entries.len(), expected.len()));
    }
    for (e, (qq, exp, form)) in entries.iter().zip(expected) {
        let poly = |key: &str| e[key].as_str().and_then(Polynomial::parse_dump).ok_or(format!("q={qq}: bad {key}"));
        let complex = poly("complex_form")?;
        let integrand = poly("integrand")?;
        if e["q"].as_u64() != Some(*qq as u64) || e["exponent"].as_str() != Some(exp.to_string().as_str()) {
            return Err(format!("q={qq}: index or exponent differs"));
        }
        if !equivalent_mod_derivatives(&complex, form) {
            return Err(format!("q={qq}: complex form {complex}"));
        }
        if integrand != normal_form(&form.im_part()) {
            return Err(format!("q={qq}: integrand {integrand}"));
        }
    }
    Ok(())
}

fn general_forms(k: u32) -> Vec<(u32, Rational, Polynomial)> {
    let kk = k as i128;
    let forms =
        [f("b"), f("c"), f("d") - f("b").pow(2) * r(kk - 3, 2 * kk), f("e") - &f("b") * &f("c") * r(kk - 4, kk)];
    (2..k).map(|qq| (qq, q(qq as i128 - 1, kk - 1), forms[(qq - 2) as usize].clone())).collect()
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let mut fails = Vec::new();
    for k in 3..=6u32 {
        let (code, out) = cli(&["conditions", "--k", &k.to_string()]);
        if code != 0 {
            fails.push(format!("k={k}: exit {code}"));
        } else if let Err(e) = matches_forms(&out, &general_forms(k)) {
            fails.push(format!("k={k}: {e}"));
        }
    }
    // the theorem sets, written out
    let five = [(2, q(1, 4), f("b")), (3, q(1, 2), f("c")), (4, q(3, 4), f("d") - f("b").pow(2) * r(1, 5))];
    let six = [
        (2, q(1, 5), f("b")),
        (3, q(2, 5), f("c")),
        (4, q(3, 5), f("d") - f("b").pow(2) * r(1, 4)),
        (5, q(4, 5), f("e") - &f("b") * &f("c") * r(1, 3)),
    ];
    for (k, set) in [(5u32, &five[..]), (6, &six[..])] {
        if let Err(e) = matches_forms(&cli(&["conditions", "--k", &k.to_string()]).1, set) {
            fails.push(format!("k={k} theorem set: {e}"));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Verdict::green(fails.is_empty() && secs <= 10.0, format!("k=3..6 exact, {secs:.2}s {}", fails.join("; ")))
}

fn criterion_2() -> Verdict {
    let t = Instant::now();
    let (a, b, c, d, e) = (f("a"), f("b"), f("c"), f("d"), f("e"));
    let (a1, a2) = (fd("a", 1), fd("a", 2));
    let five = vec![
        (1, Rational::ZERO, a.clone()),
        (2, q(1, 4), &b - &(a.pow(2) * r(2, 5))),
        (3, q(1, 2), &c - &(&a * &b * r(3, 5)) + a.pow(3) * r(4, 25)),
        (
            4,
            q(3, 4),
            &d - &(b.pow(2) * r(1, 5)) - &a * &c * r(2, 5) + a.pow(2) * &b * r(7, 25)
                - a.pow(4) * r(7, 125)
                - &a1 * &b * ir(1, 5)
                + a1.pow(2) * r(1, 5),
        ),
    ];
    let six_top = &e - &(&b * &c * r(1, 3)) - &a * &d * r(1, 3) + &a * &b.pow(2) * r(2, 9) + a.pow(2) * &c * r(2, 9)
        - a.pow(3) * &b * r(14, 81)
        + a.pow(5) * r(7, 243)
        - &a2 * &b * r(4, 9)
        - &a1 * &c * ir(1, 3)
        + &a * &a1 * &b * ir(2, 9)
        - &a * &a1.pow(2) * r(10, 27);
    let six = vec![
        (1, Rational::ZERO, a.clone()),
        (2, q(1, 5), &b - &(a.pow(2) * r(5, 12))),
        (3, q(2, 5), &c - &(&a * &b * r(2, 3)) + a.pow(3) * r(5, 27)),
        (
            4,
            q(3, 5),
            &d - &(b.pow(2) * r(1, 4)) - &a * &c * r(1, 2) + a.pow(2) * &b * r(3, 8)
                - a.pow(4) * r(5, 64)
                - &a1 * &b * ir(1, 4)
                + a1.pow(2) * r(5, 16),
        ),
        (5, q(4, 5), six_top),
    ];
    let mut fails = Vec::new();
    for (k, set) in [(5u32, five), (6, six)] {
        if let Err(e) = matches_forms(&cli(&["conditions", "--k", &k.to_string(), "--gauged"]).1, &set) {
            fails.push(format!("k={k}: {e}"));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Verdict::green(fails.is_empty() && secs <= 30.0, format!("9 integrands exact, {secs:.2}s {}", fails.join("; ")))
}

/// `(stage, pass, faults detected, fault sites)` for every stage of order k.
fn stage_results(k: u32, repaired: bool) -> Vec<(String, bool, u64, u64)> {
    let mut args = vec!["verify", "--all", "--faults", "--k"];
    let ks = k.to_string();
    args.push(&ks);
    if repaired {
        args.push("--repaired");
    }
    let (_, out) = cli(&args);
    out["results"]
        .as_array()
        .map(|rs| {
            rs.iter()
                .map(|r| {
                    (
                        r["stage"].as_str().unwrap_or("?").to_string(),
                        r["pass"].as_bool().unwrap_or(false),
                        r["faults"]["detected"].as_u64().unwrap_or(0),
                        r["faults"]["sites"].as_u64().unwrap_or(0),
                    )
                })
                .collect()
        })
        .unwrap_or_default()
}

fn criterion_3() -> Verdict {
    let t = Instant::now();
    let printed: Vec<_> = [5, 6].iter().flat_map(|&k| stage_results(k, false)).collect();
    let repaired = stage_results(6, true);
    let secs = t.elapsed().as_secs_f64();
    let failing: Vec<&str> = printed.iter().filter(|s| !s.1).map(|s| s.0.as_str()).collect();
    let faults_ok = |rs: &[(String, bool, u64, u64)]| rs.iter().filter(|s| s.1).all(|s| s.3 > 0 && s.2 == s.3);
    let repaired_ok = repaired.len() == 4 && repaired.iter().all(|s| s.1) && faults_ok(&repaired);
    let pass = printed.len() == 7 && failing.is_empty() && faults_ok(&printed) && secs <= 60.0;
    Verdict {
        pass,
        sound: printed.len() == 7 && failing == ["k=6 stage 2"] && faults_ok(&printed) && repaired_ok && secs <= 60.0,
        detail: format!(
            "{}/7 printed stages pass (failing: {failing:?}); repaired k=6 weight {}; faults all detected: {}; {secs:.2}s",
            7 - failing.len(),
            if repaired_ok { "passes" } else { "FAILS" },
            faults_ok(&printed)
        ),
    }
}

fn reduction(k: u32, repaired: bool) -> bool {
    let ks = k.to_string();
    let mut args = vec!["verify", "--appendix-a", "--k", &ks];
    if repaired {
        args.push("--repaired");
    }
    let (code, out) = cli(&args);
    code == 0 && out["pass"].as_bool() == Some(true)
}

fn criterion_4() -> Verdict {
    let t = Instant::now();
    let (five, six, six_fixed) = (reduction(5, false), reduction(6, false), reduction(6, true));
    let secs = t.elapsed().as_secs_f64();
    Verdict {
        pass: five && six && secs <= 10.0,
        sound: five && !six && six_fixed && secs <= 10.0,
        detail: format!("k=5 {five}, k=6 printed {six}, k=6 repaired correction {six_fixed}; {secs:.2}s"),
    }
}

fn criterion_5() -> Verdict {
    let t = Instant::now();
    let mut ok = true;
    for k in 3..=6 {
        let rep = verify_structure(k).unwrap();
        ok &= rep.passed() && rep.levels == k - 1;
    }
    // e^{-ixξ-itξ²}(D_t - D² - conj(b0))e^{ixξ+itξ²} = D_t - 2ξD - D² - conj(b0)
    let s = RecursionState::base_case(2).unwrap();
    let mut cells: Vec<_> = s.cells().map(|(l, j, p)| (l, j, p.clone())).collect();
    cells.sort_by_key(|(l, j, _)| (*l, *j));
    ok &= cells == vec![(0, 0, Polynomial::atom(x_atom(0, 0))), (0, 2, Polynomial::one())];
    ok &= s.cell(1, 1) == Polynomial::int(2) && s.cell(2, 0) == Polynomial::one();
    let secs = t.elapsed().as_secs_f64();
    Verdict::green(ok && secs <= 20.0, format!("k=3..6 all levels, k=2 base case; {secs:.2}s"))
}

fn criterion_6() -> Verdict {
    let consts = [(3, Complex64::new(0.02, -0.001)), (2, Complex64::new(-0.1, 0.0)), (1, Complex64::new(0.3, 0.01))];
    let mut cfg = SimConfig::new(5, 4.0, 256, 0.01, 1.0);
    for (j, b) in consts {
        cfg = cfg.with_coeff(j, CoeffField::Constant(b));
    }
    let n = cfg.n;
    let mut uh: Vec<Complex64> =
        (0..n).map(|m| Complex64::new(((m * 7) % 11) as f64 / 11.0, ((m * 3) % 5) as f64 / 5.0)).collect();
    for (m, v) in uh.iter_mut().enumerate() {
        if cfg.kappa(m).abs() * cfg.r > n as f64 / 4.0 || m == n / 2 {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    let plan = Plan::new(n);
    let mut u0 = uh.clone();
    plan.inverse(&mut u0);
    let mut out = evolve(&cfg, &u0).unwrap().u_final;
    plan.forward(&mut out);
    let worst = (0..n)
        .filter(|&m| uh[m].norm() > 0.0)
        .map(|m| {
            let expected = uh[m] * multiplier_oracle(5, &consts, cfg.kappa(m), 1.0);
            (out[m] - expected).norm() / expected.norm()
        })
        .fold(0.0, f64::max);
    Verdict::green(worst <= 1e-8, format!("worst relative mode error {worst:.2e}"))
}

fn expr(s: &str) -> CoeffExpr {
    CoeffExpr::parse(s).unwrap()
}

/// The printed self-adjoint forms, symmetrized to `(A + A*)/2`.
fn selfadjoint_run(k: u32) -> f64 {
    let re = Polynomial::re;
    let i = |n, d| GaussianRational::imag(q(n, d));
    let a = match k {
        5 => DiffOperator::new(5)
            .with_coeff(3, re("alpha", 0))
            .with_coeff(2, re("beta", 0) + re("alpha", 1).scale(i(-3, 2)))
            .with_coeff(1, re("gamma", 0) + re("beta", 1).scale(i(-1, 1))),
        _ => DiffOperator::new(6)
            .with_coeff(4, re("alpha", 0))
            .with_coeff(3, re("beta", 0) + re("alpha", 1).scale(i(-2, 1)))
            .with_coeff(2, re("gamma", 0) + re("beta", 1).scale(i(-3, 2)))
            .with_coeff(1, re("delta", 0) + re("gamma", 1).scale(i(-1, 1)) + re("alpha", 3).scale(i(-1, 1))),
    };
    let fields = BTreeMap::from([
        ("alpha".to_string(), expr("0.2*sin(x/64)")),
        ("beta".to_string(), expr("0.1*cos(x/64)")),
        ("gamma".to_string(), expr("0.05*sin(x/32)")),
        ("delta".to_string(), expr("0.02*cos(x/32)")),
    ]);
    let mut cfg = SimConfig::new(k, 64.0, 1024, 1.0, 1.0);
    for (j, v) in sample_operator(&selfadjoint_part(&a), &fields, &cfg.grid()).unwrap() {
        cfg = cfg.with_coeff(j, CoeffField::Samples(v));
    }
    cfg.dt = stability_limit(&cfg).unwrap();
    let spec = WavepacketSpec::new(3.0, cfg.length() / 2.0, 2);
    let u0 = wavepacket(&spec, &cfg.grid(), (0.0, cfg.length()), None).unwrap();
    let res = evolve(&cfg, &u0).unwrap();
    res.l2.iter().map(|n| (n / res.l2[0] - 1.0).abs()).fold(0.0, f64::max)
}

fn criterion_7() -> Verdict {
    let (d5, d6) = (selfadjoint_run(5), selfadjoint_run(6));
    Verdict::green(d5 <= 1e-6 && d6 <= 1e-6, format!("L2 drift k=5 {d5:.2e}, k=6 {d6:.2e}"))
}

fn criterion_8() -> Verdict {
    let t = Instant::now();
    let xis = [8.0, 16.0, 24.0, 32.0];
    let mut ok = true;
    let mut detail = Vec::new();
    for (k, time) in [(5u32, 1e-4), (6, 1e-5)] {
        for (label, field) in [
            ("imag", CoeffField::Constant(Complex64::new(0.0, -0.05))),
            ("real", CoeffField::Expr(expr("0.2*sin(x/64)"))),
        ] {
            let mut cfg = SimConfig::new(k, 64.0, 8192, 1.0, time).with_coeff(k - 2, field);
            cfg.dt = stability_limit(&cfg).unwrap().min(time);
            let g: Vec<f64> = frequency_sweep(&cfg, &xis, 1).unwrap().iter().map(|r| r.growth).collect();
            ok &= if label == "imag" {
                g.windows(2).all(|w| w[1] > w[0])
            } else {
                g.iter().all(|v| (0.9..=1.1).contains(v))
            };
            detail.push(format!("k={k} {label} {:?}", g.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Verdict::green(ok && secs <= 300.0, format!("{}; {secs:.1}s", detail.join(", ")))
}

fn criterion_9() -> Verdict {
    let real = |g: fn(f64) -> f64| move |x: f64| Complex64::new(g(x), 0.0);
    let one = SampledFunction::on_interval(0.0, 16.0, 4096, real(|_| 1.0)).unwrap();
    let s1 = hoelder_ratio(&one, q(1, 4)).unwrap().sup_ratio;
    let cosine = SampledFunction::on_interval(0.0, 4.0 * std::f64::consts::PI, 4096, real(f64::cos)).unwrap();
    let s2 = hoelder_ratio(&cosine, q(1, 2)).unwrap().sup_ratio;
    // sup_d 2|sin(d/2)|/√d, by direct search
    let continuum = (1..200_000)
        .map(|j| {
            let d = j as f64 * 1e-4;
            2.0 * (d / 2.0).sin().abs() / d.sqrt()
        })
        .fold(0.0, f64::max);
    let a = (s1 - 8.0).abs() < 1e-3;
    let b = (s2 - 2f64.sqrt()).abs() < 1e-3;
    Verdict {
        pass: a && b,
        sound: a && !b && (s2 - continuum).abs() < 1e-3,
        detail: format!("h=1: {s1:.6}; cos: {s2:.6} (continuum sup {continuum:.6}, stated √2 = 1.414214)"),
    }
}

fn criterion_10() -> Verdict {
    let h = SampledFunction::on_interval(-2.0, 2.0, 801, |x| Complex64::new(unit_bump(x, 0.0, 2.0), 0.0)).unwrap();
    let t = tarama_symbol_numeric(&h, 4.0, 1.0, &[4.0, 8.0, 16.0, 32.0]).unwrap();
    let (sh, sd) = (t.slope_h.unwrap_or(f64::NAN), t.slope_defect.unwrap_or(f64::NAN));
    Verdict::green(sh <= 1.15 && sd <= -2.7, format!("slope H {sh:.3} (≤ 1.15), defect {sd:.3} (≤ -2.7)"))
}

const KNOWN_RED: [u32; 3] = [3, 4, 9];

type Criterion = (u32, &'static str, fn() -> Verdict);

fn all_criteria() -> Vec<Criterion> {
    vec![
        (1, "condition derivation", criterion_1 as fn() -> Verdict),
        (2, "gauged corollaries", criterion_2),
        (3, "stage identities", criterion_3),
        (4, "self-adjoint reductions", criterion_4),
        (5, "recursion structure", criterion_5),
        (6, "spectral oracle", criterion_6),
        (7, "conservation", criterion_7),
        (8, "illposedness trend", criterion_8),
        (9, "Hoelder closed forms", criterion_9),
        (10, "smoothing symbol slopes", criterion_10),
    ]
}

#[test]
fn acceptance_report() {
    let mut problems = Vec::new();
    for (id, name, run) in all_criteria() {
        let v = run();
        let tag = if v.pass {
            "PASS"
        } else if KNOWN_RED.contains(&id) {
            "FAIL (known)"
        } else {
            "FAIL"
        };
        // straight to the handle, so the lines show up even when output is captured
        let _ = writeln!(std::io::stderr(), "criterion {id:>2} {tag:<12} {name}: {}", v.detail);
        let expected = !KNOWN_RED.contains(&id);
        if v.pass != expected || !v.sound {
            problems.push(id);
        }
    }
    assert!(problems.is_empty(), "criteria off their recorded state: {problems:?}");
}

#[test]
#[ignore = "known red: the printed k=6 stage 2 weight leaves an order-1 residual"]
fn criterion_3_strict() {
    assert!(criterion_3().pass);
}

#[test]
#[ignore = "known red: the printed k=6 correction leaves an order-1 residual"]
fn criterion_4_strict() {
    assert!(criterion_4().pass);
}

#[test]
#[ignore = "known red: the cos supremum is about 1.2039, not √2"]
fn criterion_9_strict() {
    assert!(criterion_9().pass);
}
