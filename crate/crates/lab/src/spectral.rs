//! Periodic pseudospectral solver for `∂_t u = i(D^k u + Σ_j b_j(x) D^j u)`,
//! `D = -i∂_x`, on `[0, 2πR)` with `N` modes.
//!
//! The principal part, and by default the spatial means of the
//! coefficients, are integrated exactly in Fourier space. The remainder is
//! stepped either by integrating-factor RK4 or by Strang splitting with a
//! Cayley step for the variable part. The torus is only a stand-in for the
//! line: packets must stay well inside the window for the run to mean
//! anything about the problem on ℝ.

use std::collections::BTreeMap;

use dispersym_core::algebra::{Atom, Family, Polynomial};
use dispersym_core::operator::DiffOperator;
use dispersym_core::recursion::run_levels;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chi::chi_deriv;
use crate::coeff_expr::CoeffExpr;
use crate::fft::{wavenumber, Plan};

pub const BLOWUP_GUARD: f64 = 1e150;
pub const DEFAULT_C_STAB: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("norm {norm:e} at t = {t} exceeds the overflow guard")]
    BlowupDetected { t: f64, norm: f64 },
    #[error("dt = {dt:e} exceeds the stability limit {limit:e}")]
    StabilityViolation { dt: f64, limit: f64 },
    #[error("packet support ({lo}, {hi}) leaves the window ({0}, {1})", window.0, window.1)]
    SupportOverflow { lo: f64, hi: f64, window: (f64, f64) },
    #[error("the wave packet vanishes identically")]
    NoPacket,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    ExponentialSplitting,
    Rk4IntegratingFactor,
}

/// A coefficient `b_j(x)`, sampled on the grid at run time.
#[derive(Clone, Debug)]
pub enum CoeffField {
    Constant(Complex64),
    Expr(CoeffExpr),
    Samples(Vec<Complex64>),
}

impl CoeffField {
    fn sample(&self, xs: &[f64]) -> Result<Vec<Complex64>, SpectralError> {
        Ok(match self {
            CoeffField::Constant(c) => vec![*c; xs.len()],
            CoeffField::Expr(e) => xs.iter().map(|&x| e.eval(x)).collect(),
            CoeffField::Samples(v) => {
                if v.len() != xs.len() {
                    return Err(SpectralError::InvalidConfig(format!(
                        "coefficient has {} samples on a grid of {}",
                        v.len(),
                        xs.len()
                    )));
                }
                v.clone()
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub k: u32,
    /// Window `[0, 2πR)`.
    pub r: f64,
    pub n: usize,
    pub dt: f64,
    /// Final time; negative values run backwards.
    pub t_final: f64,
    /// `b_j` by order `j < k`.
    pub coeffs: BTreeMap<u32, CoeffField>,
    pub integrator: Integrator,
    pub dealias: bool,
    /// Put the coefficient means into the exact Fourier multiplier.
    pub exact_means: bool,
    pub c_stab: f64,
    /// Record the norm every this many steps (the last step is always recorded).
    pub record_every: usize,
    /// Also record the `H^s` norm for this `s`.
    pub sobolev_index: Option<f64>,
    pub keep_spectra: bool,
}

impl SimConfig {
    pub fn new(k: u32, r: f64, n: usize, dt: f64, t_final: f64) -> Self {
        SimConfig {
            k,
            r,
            n,
            dt,
            t_final,
            coeffs: BTreeMap::new(),
            integrator: Integrator::default(),
            dealias: false,
            exact_means: true,
            c_stab: DEFAULT_C_STAB,
            record_every: 1,
            sobolev_index: None,
            keep_spectra: false,
        }
    }

    pub fn with_coeff(mut self, j: u32, c: CoeffField) -> Self {
        self.coeffs.insert(j, c);
        self
    }

    pub fn length(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.r
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.length() / self.n as f64;
        (0..self.n).map(|j| j as f64 * h).collect()
    }

    /// Physical wavenumber of FFT slot `j`.
    pub fn kappa(&self, j: usize) -> f64 {
        wavenumber(j, self.n) / self.r
    }

    fn validate(&self) -> Result<(), SpectralError> {
        let bad = |s: String| Err(SpectralError::InvalidConfig(s));
        if !(2..=8).contains(&self.k) {
            return bad(format!("k = {} outside 2..=8", self.k));
        }
        if self.n < 16 || !self.n.is_power_of_two() {
            return bad(format!("N = {} must be a power of two, at least 16", self.n));
        }
        if !(self.r > 0.0) || !(self.dt > 0.0) || !self.t_final.is_finite() {
            return bad("R and dt must be positive, T finite".into());
        }
        if let Some(j) = self.coeffs.keys().find(|&&j| j >= self.k) {
            return bad(format!("coefficient index {j} must be below k = {}", self.k));
        }
        Ok(())
    }
}

/// `exp(it(ξ^k + Σ b_j ξ^j))` for constant coefficients.
pub fn multiplier_oracle(k: u32, coeffs: &[(u32, Complex64)], xi: f64, t: f64) -> Complex64 {
    let mut symbol = Complex64::new(xi.powi(k as i32), 0.0);
    for &(j, b) in coeffs {
        symbol += b * xi.powi(j as i32);
    }
    (Complex64::i() * t * symbol).exp()
}

#[derive(Clone, Debug, Serialize)]
pub struct SimResult {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hs: Option<Vec<f64>>,
    /// `|û|` at the start and the end when requested.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub spectra: Vec<Vec<f64>>,
    pub growth: f64,
    pub steps: usize,
    pub dt_used: f64,
    #[serde(skip)]
    pub u_final: Vec<Complex64>,
}

/// The variable part `i Σ v_j(x) D^j` plus the exact multiplier.
struct Stepper {
    plan: Plan,
    /// `λ(κ)` with `e^{λt}` the exact part.
    lambda: Vec<Complex64>,
    vars: Vec<(u32, Vec<Complex64>)>,
    kappa: Vec<f64>,
    keep: Vec<bool>,
}

impl Stepper {
    fn new(cfg: &SimConfig) -> Result<Self, SpectralError> {
        let xs = cfg.grid();
        let n = cfg.n;
        let kappa: Vec<f64> = (0..n).map(|j| cfg.kappa(j)).collect();
        let cutoff = n as f64 / 3.0;
        let keep = (0..n).map(|j| !cfg.dealias || wavenumber(j, n).abs() <= cutoff).collect();
        let mut means = Vec::new();
        let mut vars = Vec::new();
        for (&j, field) in &cfg.coeffs {
            let mut s = field.sample(&xs)?;
            let mean = if cfg.exact_means { s.iter().sum::<Complex64>() / n as f64 } else { Complex64::new(0.0, 0.0) };
            for v in &mut s {
                *v -= mean;
            }
            means.push((j, mean));
            if s.iter().any(|v| v.norm() > 0.0) {
                vars.push((j, s));
            }
        }
        let lambda = kappa
            .iter()
            .map(|&kp| {
                let mut sym = Complex64::new(kp.powi(cfg.k as i32), 0.0);
                for &(j, m) in &means {
                    sym += m * kp.powi(j as i32);
                }
                Complex64::i() * sym
            })
            .collect();
        Ok(Stepper { plan: Plan::new(n), lambda, vars, kappa, keep })
    }

    /// `max_j max_x|v_j| κ_max^j`.
    fn variable_size(&self) -> f64 {
        let kmax = self.kappa.iter().zip(&self.keep).filter(|(_, &k)| k).map(|(kp, _)| kp.abs()).fold(0.0, f64::max);
        self.vars
            .iter()
            .map(|(j, v)| v.iter().map(|c| c.norm()).fold(0.0, f64::max) * kmax.powi(*j as i32))
            .fold(0.0, f64::max)
    }

    /// `F[i Σ v_j · F^{-1}[κ^j û]]`.
    fn apply_var(&self, uh: &[Complex64]) -> Vec<Complex64> {
        let n = uh.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (j, v) in &self.vars {
            for m in 0..n {
                buf[m] = if self.keep[m] { uh[m] * self.kappa[m].powi(*j as i32) } else { Complex64::new(0.0, 0.0) };
            }
            self.plan.inverse(&mut buf);
            for m in 0..n {
                acc[m] += v[m] * buf[m];
            }
        }
        self.plan.forward(&mut acc);
        for m in 0..n {
            acc[m] = if self.keep[m] { acc[m] * Complex64::i() } else { Complex64::new(0.0, 0.0) };
        }
        acc
    }

    fn exp_step(&self, uh: &mut [Complex64], h: f64) {
        for (u, l) in uh.iter_mut().zip(&self.lambda) {
            *u *= (l * h).exp();
        }
    }

    fn rk4(&self, uh: &[Complex64], h: f64) -> Vec<Complex64> {
        let n = uh.len();
        let half: Vec<Complex64> = self.lambda.iter().map(|l| (l * (h / 2.0)).exp()).collect();
        let full: Vec<Complex64> = half.iter().map(|e| e * e).collect();
        let k1 = self.apply_var(uh);
        let a: Vec<Complex64> = (0..n).map(|m| half[m] * (uh[m] + k1[m] * (h / 2.0))).collect();
        let k2 = self.apply_var(&a);
        let b: Vec<Complex64> = (0..n).map(|m| half[m] * uh[m] + k2[m] * (h / 2.0)).collect();
        let k3 = self.apply_var(&b);
        let c: Vec<Complex64> = (0..n).map(|m| full[m] * uh[m] + half[m] * k3[m] * h).collect();
        let k4 = self.apply_var(&c);
        (0..n)
            .map(|m| full[m] * uh[m] + (full[m] * k1[m] + 2.0 * half[m] * (k2[m] + k3[m]) + k4[m]) * (h / 6.0))
            .collect()
    }

    /// `(I - hV/2) u⁺ = (I + hV/2) u` by fixed-point iteration; contracts
    /// because `h‖V‖ <= C_stab < 2`.
    fn cayley(&self, uh: &[Complex64], h: f64) -> Vec<Complex64> {
        let n = uh.len();
        let vu = self.apply_var(uh);
        let rhs: Vec<Complex64> = (0..n).map(|m| uh[m] + vu[m] * (h / 2.0)).collect();
        let scale = rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let mut cur = rhs.clone();
        for _ in 0..200 {
            let vc = self.apply_var(&cur);
            let next: Vec<Complex64> = (0..n).map(|m| rhs[m] + vc[m] * (h / 2.0)).collect();
            let change = next.iter().zip(&cur).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            cur = next;
            if change <= 1e-15 * scale {
                break;
            }
        }
        cur
    }

    fn step(&self, uh: &mut Vec<Complex64>, h: f64, integrator: Integrator) {
        if self.vars.is_empty() {
            self.exp_step(uh, h);
            return;
        }
        match integrator {
            Integrator::Rk4IntegratingFactor => *uh = self.rk4(uh, h),
            Integrator::ExponentialSplitting => {
                self.exp_step(uh, h / 2.0);
                *uh = self.cayley(uh, h);
                self.exp_step(uh, h / 2.0);
            }
        }
    }
}

fn l2_from_hat(uh: &[Complex64], length: f64) -> f64 {
    // Parseval: Σ|u_j|² dx = (L/N²) Σ|û_m|²
    let n = uh.len() as f64;
    (uh.iter().map(|v| v.norm_sqr()).sum::<f64>() * length / (n * n)).sqrt()
}

fn hs_from_hat(uh: &[Complex64], cfg: &SimConfig, s: f64) -> f64 {
    let n = uh.len() as f64;
    let sum: f64 = uh.iter().enumerate().map(|(m, v)| (1.0 + cfg.kappa(m).powi(2)).powf(s) * v.norm_sqr()).sum();
    (sum * cfg.length() / (n * n)).sqrt()
}

pub fn l2_norm(u: &[Complex64], length: f64) -> f64 {
    (u.iter().map(|v| v.norm_sqr()).sum::<f64>() * length / u.len() as f64).sqrt()
}

/// Stability limit `C_stab / max_j(max_x|b_j - mean| κ_max^j)`, infinite without a variable part.
pub fn stability_limit(cfg: &SimConfig) -> Result<f64, SpectralError> {
    cfg.validate()?;
    let size = Stepper::new(cfg)?.variable_size();
    Ok(if size > 0.0 { cfg.c_stab / size } else { f64::INFINITY })
}

pub fn evolve(cfg: &SimConfig, u0: &[Complex64]) -> Result<SimResult, SpectralError> {
    cfg.validate()?;
    if u0.len() != cfg.n {
        return Err(SpectralError::InvalidConfig(format!("u0 has {} samples, N = {}", u0.len(), cfg.n)));
    }
    let stepper = Stepper::new(cfg)?;
    let size = stepper.variable_size();
    let limit = if size > 0.0 { cfg.c_stab / size } else { f64::INFINITY };
    if cfg.dt > limit {
        return Err(SpectralError::StabilityViolation { dt: cfg.dt, limit });
    }
    let span = cfg.t_final.abs();
    let steps = if span == 0.0 { 0 } else { (span / cfg.dt).ceil() as usize };
    let h = if steps == 0 { 0.0 } else { cfg.t_final / steps as f64 };
    let mut uh = u0.to_vec();
    stepper.plan.forward(&mut uh);
    let length = cfg.length();
    let n0 = l2_from_hat(&uh, length);
    let mut times = vec![0.0];
    let mut l2 = vec![n0];
    let mut hs = cfg.sobolev_index.map(|s| vec![hs_from_hat(&uh, cfg, s)]);
    let spectrum = |uh: &[Complex64]| uh.iter().map(|v| v.norm()).collect::<Vec<f64>>();
    let mut spectra = if cfg.keep_spectra { vec![spectrum(&uh)] } else { Vec::new() };
    let every = cfg.record_every.max(1);
    for s in 1..=steps {
        stepper.step(&mut uh, h, cfg.integrator);
        if s % every == 0 || s == steps {
            let t = h * s as f64;
            let norm = l2_from_hat(&uh, length);
            if !norm.is_finite() || norm > BLOWUP_GUARD {
                return Err(SpectralError::BlowupDetected { t, norm });
            }
            times.push(t);
            l2.push(norm);
            if let (Some(v), Some(sx)) = (hs.as_mut(), cfg.sobolev_index) {
                v.push(hs_from_hat(&uh, cfg, sx));
            }
        }
    }
    if cfg.keep_spectra {
        spectra.push(spectrum(&uh));
    }
    let growth = if n0 > 0.0 { l2[l2.len() - 1] / n0 } else { 1.0 };
    let mut u_final = uh;
    stepper.plan.inverse(&mut u_final);
    Ok(SimResult { times, l2, hs, spectra, growth, steps, dt_used: h.abs(), u_final })
}

/// Profile `f ∈ C_c^∞(-1, 1)` of a wave packet.
#[derive(Clone, Debug, Default)]
pub enum Profile {
    /// `χ(2t)`: plateau on `[-1/2, 1/2]`, support `(-1, 1)`.
    #[default]
    Bump,
    Expr(CoeffExpr),
}

impl Profile {
    pub fn eval(&self, t: f64, deriv: u32) -> Complex64 {
        match self {
            Profile::Bump => Complex64::new(2f64.powi(deriv as i32) * chi_deriv(2.0 * t, deriv as usize), 0.0),
            Profile::Expr(e) => {
                if t.abs() >= 1.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    e.derivative_n(deriv).eval(t)
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct WavepacketSpec {
    pub xi0: f64,
    pub x1: f64,
    pub m: u32,
    pub profile: Profile,
    pub normalize: bool,
}

impl WavepacketSpec {
    pub fn new(xi0: f64, x1: f64, m: u32) -> Self {
        WavepacketSpec { xi0, x1, m, profile: Profile::Bump, normalize: false }
    }

    /// Half-width `ξ^m` of the support.
    pub fn half_width(&self) -> f64 {
        self.xi0.powi(self.m as i32)
    }
}

/// `e^{ixξ} e^{ψ(x)} f((x - x1)/ξ^m)` on `xs`, inside the window `[lo, hi]`.
pub fn wavepacket(
    spec: &WavepacketSpec,
    xs: &[f64],
    window: (f64, f64),
    psi: Option<&[Complex64]>,
) -> Result<Vec<Complex64>, SpectralError> {
    let w = spec.half_width();
    let (lo, hi) = (spec.x1 - w, spec.x1 + w);
    if lo < window.0 || hi > window.1 {
        return Err(SpectralError::SupportOverflow { lo, hi, window });
    }
    if let Some(p) = psi {
        if p.len() != xs.len() {
            return Err(SpectralError::InvalidConfig("phase and grid lengths differ".into()));
        }
    }
    let mut v: Vec<Complex64> = xs
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let env = spec.profile.eval((x - spec.x1) / w, 0);
            let phase = Complex64::new(0.0, x * spec.xi0) + psi.map_or(Complex64::new(0.0, 0.0), |p| p[j]);
            env * phase.exp()
        })
        .collect();
    if spec.normalize {
        let len = window.1 - window.0;
        let nrm = l2_norm(&v, len);
        if nrm > 0.0 {
            for z in &mut v {
                *z /= nrm;
            }
        }
    }
    Ok(v)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub xi: f64,
    pub growth: f64,
    pub steps: usize,
}

/// Growth `‖u(T)‖/‖u_0‖` of packets centred in the window, one run per `ξ`.
pub fn frequency_sweep(cfg: &SimConfig, xis: &[f64], m: u32) -> Result<Vec<SweepRow>, SpectralError> {
    let xs = cfg.grid();
    let window = (0.0, cfg.length());
    let center = cfg.length() / 2.0;
    xis.par_iter()
        .map(|&xi| {
            let spec = WavepacketSpec::new(xi, center, m);
            let u0 = wavepacket(&spec, &xs, window, None)?;
            let r = evolve(cfg, &u0)?;
            Ok(SweepRow { xi, growth: r.growth, steps: r.steps })
        })
        .collect()
}

/// Samples `c_j(x)` of a core operator, atoms resolved through `fields`.
pub fn sample_operator(
    op: &DiffOperator,
    fields: &BTreeMap<String, CoeffExpr>,
    xs: &[f64],
) -> Result<BTreeMap<u32, Vec<Complex64>>, SpectralError> {
    let mut out = BTreeMap::new();
    for (&j, c) in &op.coeffs {
        out.insert(j, sample_polynomial(c, fields, xs)?);
    }
    Ok(out)
}

fn atom_value(a: &Atom, v: Complex64) -> Complex64 {
    match a.family {
        Family::Re => Complex64::new(v.re, 0.0),
        Family::Im => Complex64::new(v.im, 0.0),
        Family::Conj => v.conj(),
        Family::Full | Family::Formal => v,
    }
}

pub fn sample_polynomial(
    p: &Polynomial,
    fields: &BTreeMap<String, CoeffExpr>,
    xs: &[f64],
) -> Result<Vec<Complex64>, SpectralError> {
    let mut derivs: BTreeMap<(String, u32), CoeffExpr> = BTreeMap::new();
    for a in p.atoms() {
        let name = a.name.as_str().to_string();
        let e = fields.get(&name).ok_or_else(|| SpectralError::InvalidConfig(format!("no field for atom {name}")))?;
        derivs.entry((name, a.deriv)).or_insert_with(|| e.derivative_n(a.deriv));
    }
    Ok(xs
        .iter()
        .map(|&x| p.eval(&|a: &Atom| atom_value(a, derivs[&(a.name.as_str().to_string(), a.deriv)].eval(x))))
        .collect())
}

/// Coefficients of the exactly self-adjoint part `(A + A*)/2` of `A = Σ c_j D^j`.
pub fn selfadjoint_part(op: &DiffOperator) -> DiffOperator {
    let adj = op.adjoint();
    let mut out = DiffOperator { coeffs: BTreeMap::new(), ..op.clone() };
    for j in 0..op.k {
        let c = (op.coeff(j) + adj.coeff(j)).scale_r(dispersym_core::algebra::Rational::new(1, 2));
        out = out.with_coeff(j, c.canonicalize_complex());
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub k: u32,
    pub m: u32,
    pub xi: f64,
    pub ratio: f64,
    /// `k - 2 - m`.
    pub predicted_power: i32,
    /// `ratio / ξ^{k-2-m}`.
    pub scaled: f64,
    pub n: usize,
}

/// `‖L* v‖/‖v‖` at `t = 0` for the approximate solution
/// `v = e^{ixξ} e^{ψ} f((x - x1 + kξ^{k-1}t)/ξ^m) e^{itξ^k}` of `L* v = 0`,
/// where `ψ' = Σ_{q=1}^m a'_q ξ^{-q}` comes from the recursion pivots.
///
/// `coeffs` holds `b_j` for `j <= k - 2`; the gauge is assumed done.
pub fn duality_probe(
    k: u32,
    m: u32,
    coeffs: &BTreeMap<u32, CoeffExpr>,
    xi: f64,
    profile: &Profile,
) -> Result<ProbeReport, SpectralError> {
    if !(3..=8).contains(&k) || m == 0 || m > k - 2 {
        return Err(SpectralError::InvalidConfig(format!("need 3 <= k <= 8 and 1 <= m <= k-2, got k={k}, m={m}")));
    }
    if let Some(j) = coeffs.keys().find(|&&j| j > k - 2) {
        return Err(SpectralError::InvalidConfig(format!("b_{j} must be gauged away")));
    }
    let w = xi.powi(m as i32);
    let x1 = 0.0;
    let len = 8.0 * w;
    let x0 = x1 - len / 2.0;
    // resolve ξ plus the packet bandwidth with room to spare
    let k_needed = 2.0 * (xi + 20.0);
    let n = ((len * k_needed / std::f64::consts::PI).ceil() as usize).next_power_of_two().max(64);
    let dx = len / n as f64;
    let xs: Vec<f64> = (0..n).map(|j| x0 + j as f64 * dx).collect();

    let fields: BTreeMap<String, CoeffExpr> = (0..=k - 2)
        .map(|j| {
            let e = coeffs.get(&j).cloned().unwrap_or_else(CoeffExpr::zero);
            (dispersym_core::recursion::coefficient_name(j), e)
        })
        .collect();
    let levels = run_levels(k, m - 1).map_err(|e| SpectralError::InvalidConfig(e.to_string()))?;
    let kk = k as f64;
    let mut psi_prime = vec![Complex64::new(0.0, 0.0); n];
    for qq in 1..=m {
        let pivot = levels[(qq - 1) as usize].cell((k - 1 - qq) as i32, 0);
        if pivot.is_zero() {
            continue;
        }
        let vals = sample_polynomial(&pivot, &fields, &xs)?;
        for (p, v) in psi_prime.iter_mut().zip(vals) {
            *p += -Complex64::i() / kk * v / xi.powi(qq as i32);
        }
    }
    // ψ(x) = ∫_{x1}^x ψ'
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..n {
        psi[j] = psi[j - 1] + (psi_prime[j - 1] + psi_prime[j]) * (0.5 * dx);
    }
    let j1 = ((x1 - x0) / dx).round() as usize;
    let at_center = psi[j1];
    for p in &mut psi {
        *p -= at_center;
    }
    let spec = WavepacketSpec { profile: profile.clone(), ..WavepacketSpec::new(xi, x1, m) };
    let v = wavepacket(&spec, &xs, (x0, x0 + len), Some(&psi))?;
    let nv = l2_norm(&v, len);
    if nv == 0.0 {
        return Err(SpectralError::NoPacket);
    }
    let plan = Plan::new(n);
    let d_pow = |u: &[Complex64], p: u32| crate::fft::spectral_d(u, len, p, &plan);

    let mut res: Vec<Complex64> = v.iter().map(|z| z * xi.powi(k as i32)).collect();
    for (j, &x) in xs.iter().enumerate() {
        let carrier = (Complex64::new(0.0, x * xi) + psi[j]).exp();
        let fp = profile.eval((x - x1) / w, 1);
        res[j] -= Complex64::i() * kk * xi.powi(k as i32 - 1 - m as i32) * carrier * fp;
    }
    let dk = d_pow(&v, k);
    for (r, d) in res.iter_mut().zip(dk) {
        *r -= d;
    }
    for (j, e) in coeffs {
        let bv: Vec<Complex64> = xs.iter().zip(&v).map(|(&x, z)| e.eval(x).conj() * z).collect();
        let d = d_pow(&bv, *j);
        for (r, dd) in res.iter_mut().zip(d) {
            *r -= dd;
        }
    }
    let ratio = l2_norm(&res, len) / nv;
    let predicted_power = k as i32 - 2 - m as i32;
    Ok(ProbeReport { k, m, xi, ratio, predicted_power, scaled: ratio / xi.powi(predicted_power), n })
}
