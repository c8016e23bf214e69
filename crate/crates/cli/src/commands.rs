use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use dispersym_core::algebra::Rational;
use dispersym_core::gauge::corollary_conditions;
use dispersym_core::recursion::{necessary_conditions, run_levels, ConditionSet};
use dispersym_core::verify::selfadjoint::{
    conjugated_symbol, correction, repaired_correction, residual_with, verify_repaired_reduction,
    verify_selfadjoint_reduction,
};
use dispersym_core::verify::{
    build_stage, fault_sites, inject, stages_for, verify_identity, StageOptions, VerifyError,
};
use dispersym_lab::conditions::{check_conditions, CheckError, Coefficient, SampledGrid};
use dispersym_lab::spectral::{
    duality_probe, evolve, frequency_sweep, stability_limit, wavepacket, CoeffField, Integrator, Profile, SimConfig,
    SpectralError, WavepacketSpec,
};
use dispersym_lab::{CoeffExpr, SampledFunction};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::VerifyArgs;

/// What a command produced, in both output formats.
pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub pass: bool,
}

impl Outcome {
    fn ok(json: Value, text: String) -> Self {
        Outcome { json, text, pass: true }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit code 2.
    Usage(String),
    /// The computation itself failed: exit code 1.
    Failure(String),
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn condition_set_json(set: &ConditionSet) -> Value {
    let entries: Vec<Value> = set
        .entries
        .iter()
        .map(|c| {
            json!({
                "q": c.q,
                "level": c.level,
                "exponent": c.exponent.to_string(),
                "complex_form": c.complex_form.dump_inline(),
                "integrand": c.integrand.dump_inline(),
                "display": c.integrand.to_string(),
            })
        })
        .collect();
    json!({ "k": set.k, "gauged": set.gauged, "entries": entries })
}

pub fn conditions(k: u32, gauged: bool) -> Result<Outcome, CliError> {
    let set = if gauged { corollary_conditions(k).map_err(usage)? } else { necessary_conditions(k).map_err(usage)? };
    let mut text = format!("k = {k}{}: {} conditions\n", if gauged { ", gauged" } else { "" }, set.entries.len());
    for c in &set.entries {
        let _ = writeln!(text, "  q={}  |∫_x^y {}| ≲ |x-y|^({})", c.q, c.integrand, c.exponent);
    }
    Ok(Outcome::ok(condition_set_json(&set), text))
}

pub fn recursion(k: u32, m: Option<u32>, out: Option<&Path>) -> Result<Outcome, CliError> {
    let m = m.unwrap_or(k.saturating_sub(2));
    let levels = run_levels(k, m).map_err(usage)?;
    let violations: Vec<String> = levels.iter().flat_map(|s| s.audit()).map(|e| e.to_string()).collect();
    let passed = violations.is_empty();
    let tables: Vec<_> = levels.iter().map(|s| s.to_table()).collect();
    let json = json!({
        "k": k,
        "levels": tables,
        "structure": { "passed": passed, "violations": violations },
    });
    let mut text = String::new();
    for t in &tables {
        let _ = writeln!(text, "level {}:", t.m);
        for c in &t.cells {
            let _ = writeln!(text, "  P[{}, {}] = {}", c.l, c.j, c.poly);
        }
    }
    let _ = writeln!(text, "structure: {}", if passed { "pass" } else { "FAIL" });
    if let Some(path) = out {
        let body = serde_json::to_string_pretty(&json).expect("serializable");
        std::fs::write(path, body).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    Ok(Outcome { json, text, pass: passed })
}

fn stage_options(k: u32, i: u32, repaired: bool) -> StageOptions {
    StageOptions { repaired_weight: repaired && (k, i) == (6, 2), ..StageOptions::default() }
}

fn error_text(e: &VerifyError) -> String {
    e.to_string()
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    if a.selfadjoint {
        if !(5..=6).contains(&a.k) {
            return Err(usage("the self-adjoint reduction exists for k = 5 and 6 only"));
        }
        let r = if a.repaired { verify_repaired_reduction(a.k) } else { verify_selfadjoint_reduction(a.k) };
        let (pass, entry) = match r {
            Ok(rep) => (
                true,
                json!({ "stage": rep.stage, "pass": true, "residual_order": rep.residual_order, "elapsed_ms": rep.elapsed_ms }),
            ),
            Err(e) => (
                false,
                json!({ "stage": format!("k={} self-adjoint reduction", a.k), "pass": false, "error": error_text(&e) }),
            ),
        };
        let mut text = format!("{}: {}", entry["stage"].as_str().unwrap_or(""), if pass { "pass" } else { "FAIL" });
        if let Some(e) = entry["error"].as_str() {
            let _ = write!(text, " ({e})");
        }
        text.push('\n');
        return Ok(Outcome {
            json: json!({ "k": a.k, "repaired": a.repaired, "results": [entry], "pass": pass }),
            text,
            pass,
        });
    }
    let available = stages_for(a.k);
    let stages = match a.stage {
        Some(i) if available.contains(&i) => vec![i],
        Some(i) => return Err(usage(format!("no stage {i} for k = {} (have {available:?})", a.k))),
        None => available,
    };
    let mut results = Vec::new();
    let mut text = String::new();
    let mut all_pass = true;
    for i in stages {
        let st = build_stage(a.k, i, &stage_options(a.k, i, a.repaired)).map_err(usage)?;
        let r = verify_identity(&st);
        let pass = r.is_ok();
        all_pass &= pass;
        let mut entry = match &r {
            Ok(rep) => {
                json!({ "stage": rep.stage, "index": i, "pass": true, "residual_order": rep.residual_order, "elapsed_ms": rep.elapsed_ms })
            }
            Err(e) => json!({ "stage": st.label(), "index": i, "pass": false, "error": error_text(e) }),
        };
        let _ = write!(text, "{}: {}", st.label(), if pass { "pass" } else { "FAIL" });
        if let Err(e) = &r {
            let _ = write!(text, " ({})", error_text(e));
        }
        if a.faults && pass {
            let sites = fault_sites(&st);
            let detected = sites
                .iter()
                .filter(|s| matches!(verify_identity(&inject(&st, s)), Err(VerifyError::IdentityFailure { .. })))
                .count();
            all_pass &= detected == sites.len();
            entry["faults"] = json!({ "sites": sites.len(), "detected": detected });
            let _ = write!(text, ", faults detected {detected}/{}", sites.len());
        }
        text.push('\n');
        results.push(entry);
    }
    Ok(Outcome {
        json: json!({ "k": a.k, "repaired": a.repaired, "results": results, "pass": all_pass }),
        text,
        pass: all_pass,
    })
}

pub fn dump_symbols(k: u32, stage: Option<u32>, selfadjoint: bool, repaired: bool) -> Result<Outcome, CliError> {
    let sections: Vec<(&str, String)> = if selfadjoint {
        if !(5..=6).contains(&k) {
            return Err(usage("the self-adjoint reduction exists for k = 5 and 6 only"));
        }
        let fail = |e: VerifyError| CliError::Failure(e.to_string());
        let phi = if repaired { repaired_correction(k) } else { correction(k) }.map_err(fail)?;
        let res = residual_with(k, &phi).map_err(fail)?;
        vec![
            ("conjugated", conjugated_symbol(k).map_err(fail)?.dump()),
            ("correction", phi.dump()),
            ("residual", res.dump()),
        ]
    } else {
        let i = stage.ok_or_else(|| usage("give --stage or --appendix-a"))?;
        let st = build_stage(k, i, &stage_options(k, i, repaired)).map_err(usage)?;
        vec![
            ("rule", st.rule.dump()),
            ("bracket", st.bracket.dump()),
            ("source", st.source.dump()),
            ("target", st.target.dump()),
        ]
    };
    let mut obj = serde_json::Map::new();
    obj.insert("k".into(), json!(k));
    if let Some(i) = stage.filter(|_| !selfadjoint) {
        obj.insert("stage".into(), json!(i));
    }
    let mut text = String::new();
    for (name, body) in &sections {
        obj.insert((*name).into(), json!(body));
        let _ = writeln!(text, "== {name} ==\n{body}");
    }
    Ok(Outcome::ok(Value::Object(obj), text))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoeffInput {
    Expr(String),
    Samples(SampledFunction),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffFile {
    window: Option<(f64, f64)>,
    n: Option<usize>,
    coeffs: BTreeMap<String, CoeffInput>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let body = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&body).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_overrides(items: &[String]) -> Result<BTreeMap<u32, Rational>, CliError> {
    let mut out = BTreeMap::new();
    for s in items {
        let (q, t) = s.split_once('=').ok_or_else(|| usage(format!("theta override {s:?} is not q=theta")))?;
        let q: u32 = q.trim().parse().map_err(|_| usage(format!("bad condition index in {s:?}")))?;
        let t: Rational = t.trim().parse().map_err(usage)?;
        out.insert(q, t);
    }
    Ok(out)
}

pub fn check(k: u32, coeffs: &Path, gauged: bool, overrides: &[String]) -> Result<Outcome, CliError> {
    let file: CoeffFile = read_json(coeffs)?;
    let overrides = parse_overrides(overrides)?;
    let mut map = BTreeMap::new();
    for (name, input) in file.coeffs {
        let c = match input {
            CoeffInput::Expr(s) => {
                let expr = CoeffExpr::parse(&s).map_err(|e| usage(format!("coefficient {name}: {e}")))?;
                let (Some((a, b)), Some(n)) = (file.window, file.n) else {
                    return Err(usage("expression coefficients need \"window\" and \"n\""));
                };
                Coefficient::Expr { expr, grid: SampledGrid::interval(a, b, n) }
            }
            CoeffInput::Samples(s) => {
                s.validate().map_err(|e| usage(format!("coefficient {name}: {e}")))?;
                Coefficient::Sampled(s)
            }
        };
        map.insert(name, c);
    }
    let report = check_conditions(k, gauged, &map, &overrides).map_err(|e| match e {
        CheckError::Hoelder(_) | CheckError::Conditions(_) => CliError::Failure(e.to_string()),
        other => usage(other),
    })?;
    let mut text = format!("k = {k}, window [{}, {}]\n", report.window.0, report.window.1);
    for e in &report.entries {
        let _ = writeln!(
            text,
            "  q={}  theta={}  sup={:.6e}  at ({:.4}, {:.4}){}",
            e.q,
            e.theta,
            e.hoelder.sup_ratio,
            e.hoelder.argmax.0,
            e.hoelder.argmax.1,
            if e.vanishes { "  (vanishes)" } else { "" }
        );
    }
    let json = serde_json::to_value(&report).expect("serializable");
    Ok(Outcome::ok(json, text))
}

fn default_r() -> f64 {
    64.0
}

fn default_n() -> usize {
    1024
}

fn default_true() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    k: u32,
    #[serde(rename = "R", default = "default_r")]
    r: f64,
    #[serde(rename = "N", default = "default_n")]
    n: usize,
    dt: Option<f64>,
    #[serde(rename = "T", default)]
    t: f64,
    #[serde(default)]
    coeffs: BTreeMap<String, String>,
    #[serde(default)]
    integrator: Integrator,
    #[serde(default)]
    dealias: bool,
    #[serde(default = "default_true")]
    exact_means: bool,
    experiment: Experiment,
}

#[derive(Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "lowercase")]
enum Experiment {
    Single(SingleParams),
    Sweep(SweepParams),
    Probe(ProbeParams),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SingleParams {
    xi0: f64,
    #[serde(default = "one")]
    m: u32,
    x1: Option<f64>,
    #[serde(default = "one_usize")]
    record_every: usize,
    sobolev_index: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepParams {
    xis: Vec<f64>,
    #[serde(default = "one")]
    m: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeParams {
    xis: Vec<f64>,
    #[serde(default = "one")]
    m: u32,
}

fn one() -> u32 {
    1
}

fn one_usize() -> usize {
    1
}

/// `"3"` or `"b3"`.
fn coeff_index(key: &str) -> Result<u32, CliError> {
    key.trim_start_matches('b').parse().map_err(|_| usage(format!("coefficient key {key:?} is not j or bj")))
}

fn spectral_err(e: SpectralError) -> CliError {
    match e {
        SpectralError::BlowupDetected { .. } | SpectralError::NoPacket => CliError::Failure(e.to_string()),
        other => usage(other),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let io = |e: csv::Error| usage(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(io)?;
    }
    w.flush().map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn simulate(config: &Path, csv: Option<&Path>) -> Result<Outcome, CliError> {
    let rc: RunConfig = read_json(config)?;
    let mut exprs = BTreeMap::new();
    for (key, s) in &rc.coeffs {
        let j = coeff_index(key)?;
        let e = CoeffExpr::parse(s).map_err(|e| usage(format!("coefficient {key}: {e}")))?;
        exprs.insert(j, e);
    }
    if let Experiment::Probe(p) = &rc.experiment {
        let rows = p
            .xis
            .iter()
            .map(|&xi| duality_probe(rc.k, p.m, &exprs, xi, &Profile::Bump))
            .collect::<Result<Vec<_>, _>>()
            .map_err(spectral_err)?;
        let mut text = format!("duality probe k={} m={}\n", rc.k, p.m);
        for r in &rows {
            let _ =
                writeln!(text, "  xi={}  ratio={:.6e}  ratio/xi^{}={:.6e}", r.xi, r.ratio, r.predicted_power, r.scaled);
        }
        if let Some(path) = csv {
            let table: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.xi, r.ratio, r.scaled]).collect();
            write_csv(path, &["xi", "ratio", "scaled"], &table)?;
        }
        return Ok(Outcome::ok(json!({ "experiment": "probe", "k": rc.k, "rows": rows }), text));
    }
    let mut cfg = SimConfig::new(rc.k, rc.r, rc.n, 1.0, rc.t);
    cfg.integrator = rc.integrator;
    cfg.dealias = rc.dealias;
    cfg.exact_means = rc.exact_means;
    for (j, e) in exprs {
        cfg = cfg.with_coeff(j, CoeffField::Expr(e));
    }
    let limit = stability_limit(&cfg).map_err(spectral_err)?;
    cfg.dt = match rc.dt {
        Some(dt) => dt,
        None if limit.is_finite() => limit.min(rc.t.abs().max(f64::MIN_POSITIVE)),
        None => rc.t.abs().max(f64::MIN_POSITIVE),
    };
    match rc.experiment {
        Experiment::Sweep(p) => {
            let rows = frequency_sweep(&cfg, &p.xis, p.m).map_err(spectral_err)?;
            let mut text = format!("sweep k={} T={} dt={:e}\n", rc.k, rc.t, cfg.dt);
            for r in &rows {
                let _ = writeln!(text, "  xi={}  growth={:.9}", r.xi, r.growth);
            }
            if let Some(path) = csv {
                let table: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.xi, r.growth]).collect();
                write_csv(path, &["xi", "growth"], &table)?;
            }
            Ok(Outcome::ok(json!({ "experiment": "sweep", "k": rc.k, "dt": cfg.dt, "rows": rows }), text))
        }
        Experiment::Single(p) => {
            cfg.record_every = p.record_every;
            cfg.sobolev_index = p.sobolev_index;
            let spec = WavepacketSpec::new(p.xi0, p.x1.unwrap_or(cfg.length() / 2.0), p.m);
            let u0 = wavepacket(&spec, &cfg.grid(), (0.0, cfg.length()), None).map_err(spectral_err)?;
            let r = evolve(&cfg, &u0).map_err(spectral_err)?;
            let text = format!("single k={} T={} steps={} growth={:.9}\n", rc.k, rc.t, r.steps, r.growth);
            if let Some(path) = csv {
                let table: Vec<Vec<f64>> = r.times.iter().zip(&r.l2).map(|(t, n)| vec![*t, *n]).collect();
                write_csv(path, &["t", "l2"], &table)?;
            }
            Ok(Outcome::ok(json!({ "experiment": "single", "k": rc.k, "dt": cfg.dt, "result": r }), text))
        }
        Experiment::Probe(_) => unreachable!("handled above"),
    }
}
