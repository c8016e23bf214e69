use dispersym_core::algebra::q;
use dispersym_lab::hoelder::hoelder_ratio;
use dispersym_lab::sampled::SampledFunction;
use num_complex::Complex64;

fn real(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Complex64 {
    move |x| Complex64::new(f(x), 0.0)
}

#[test]
fn constant_density_on_sixteen() {
    let h = SampledFunction::on_interval(0.0, 16.0, 4096, real(|_| 1.0)).unwrap();
    let r = hoelder_ratio(&h, q(1, 4)).unwrap();
    assert!((r.sup_ratio - 8.0).abs() < 1e-3);
    assert_eq!(r.argmax, (0.0, 16.0));
    // the profile is |x-y|^{3/4}, increasing in the separation
    for w in r.profile.windows(2) {
        assert!(w[1].max_ratio >= w[0].max_ratio);
    }
}

/// `sup_d 2|sin(d/2)|/√d`, the continuum value for `cos` on a long window.
fn cosine_sup() -> (f64, f64) {
    let mut best = (0.0, 0.0);
    for j in 1..200_000 {
        let d = j as f64 * 1e-4;
        let v = 2.0 * (d / 2.0).sin().abs() / d.sqrt();
        if v > best.0 {
            best = (v, d);
        }
    }
    best
}

#[test]
fn cosine_matches_the_continuum_supremum() {
    let h = SampledFunction::on_interval(0.0, 4.0 * std::f64::consts::PI, 4096, real(f64::cos)).unwrap();
    let r = hoelder_ratio(&h, q(1, 2)).unwrap();
    let (sup, at) = cosine_sup();
    assert!((r.sup_ratio - sup).abs() < 1e-3, "{} vs {sup}", r.sup_ratio);
    assert!(((r.argmax.1 - r.argmax.0) - at).abs() < 0.01);
    // strictly below the envelope min(2, d)/√d, whose peak √2 sits at d = 2
    assert!(r.sup_ratio < 2f64.sqrt() - 0.2);
}

#[test]
fn refinement_converges_to_the_continuum() {
    let (sup, _) = cosine_sup();
    let mut errs = Vec::new();
    for n in [257, 513, 1025, 2049] {
        let h = SampledFunction::on_interval(0.0, 4.0 * std::f64::consts::PI, n, real(f64::cos)).unwrap();
        errs.push((hoelder_ratio(&h, q(1, 2)).unwrap().sup_ratio - sup).abs());
    }
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] + 1e-6, "{errs:?}");
    }
    assert!(errs[3] < 1e-4);
}

#[test]
fn derivative_densities_obey_the_oscillation_bound() {
    // h = p' with p bounded: |H(y) - H(x)| ≈ |p(y) - p(x)| <= 2 max|p|
    let p = |x: f64| (3.0 * x).sin() * (-0.1 * x * x).exp() + 0.3 * (0.7 * x).cos();
    let dp = |x: f64| {
        3.0 * (3.0 * x).cos() * (-0.1 * x * x).exp()
            - 0.2 * x * (3.0 * x).sin() * (-0.1 * x * x).exp()
            - 0.21 * (0.7 * x).sin()
    };
    let h = SampledFunction::on_interval(-10.0, 10.0, 2001, real(dp)).unwrap();
    let max_p = (0..h.len()).map(|j| p(h.x(j)).abs()).fold(0.0, f64::max);
    for theta in [q(0, 1), q(1, 4), q(1, 2), q(3, 4)] {
        let r = hoelder_ratio(&h, theta).unwrap();
        let bound = 2.0 * max_p / h.dx.powf(theta.to_f64());
        assert!(r.sup_ratio <= bound * (1.0 + 1e-3), "θ={theta}: {} > {bound}", r.sup_ratio);
    }
}

#[test]
fn tiny_grids_are_rejected() {
    let h = SampledFunction { x0: 0.0, dx: 1.0, values: vec![Complex64::new(1.0, 0.0)] };
    assert!(hoelder_ratio(&h, q(1, 2)).is_err());
}
