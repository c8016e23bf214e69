use dispersym_lab::chi::unit_bump;
use dispersym_lab::sampled::SampledFunction;
use dispersym_lab::tarama::{bracket, tarama_defect, tarama_h, tarama_symbol_numeric, TaramaError};
use num_complex::Complex64;

const XIS: [f64; 4] = [4.0, 8.0, 16.0, 32.0];

fn bump_density() -> SampledFunction {
    SampledFunction::on_interval(-2.0, 2.0, 801, |x| Complex64::new(unit_bump(x, 0.0, 2.0), 0.0)).unwrap()
}

#[test]
fn zero_density_gives_zero_symbol() {
    let h = SampledFunction::on_interval(-1.0, 1.0, 64, |_| Complex64::new(0.0, 0.0)).unwrap();
    let t = tarama_symbol_numeric(&h, 4.0, 1.0, &XIS).unwrap();
    assert!(t.rows.iter().all(|r| r.max_h == 0.0 && r.max_defect == 0.0));
    assert_eq!(t.slope_h, None);
}

#[test]
fn bump_slopes_for_k5() {
    // p = 1/4, q = 4: H ∈ S^{pq} = S^1 and ∂_x H - h ∈ S^{pq-q} = S^{-3}
    let t = tarama_symbol_numeric(&bump_density(), 4.0, 1.0, &XIS).unwrap();
    let sh = t.slope_h.unwrap();
    let sd = t.slope_defect.unwrap();
    assert!(sh <= 1.0 + 0.15, "H slope {sh}");
    assert!(sd <= -3.0 + 0.3, "defect slope {sd}");
    // a unit-mass bump saturates the plateau, so max|H| is its mass
    for r in &t.rows {
        assert!((r.max_h - 1.0).abs() < 1e-6, "{r:?}");
        assert!((r.width - bracket(r.xi, 1.0).powi(4)).abs() < 1e-9 * r.width);
    }
}

#[test]
fn defect_matches_a_difference_quotient() {
    let h = bump_density();
    let w = bracket(4.0, 1.0).powi(4);
    for s in [0.3, 0.9, 1.2, 1.5, 1.8] {
        // past the support h vanishes, so the defect is ∂_x H itself
        let x = 2.0 + s * w;
        let d = 1e-4 * w;
        let fd = (tarama_h(&h, x + d, w) - tarama_h(&h, x - d, w)) / (2.0 * d);
        let exact = tarama_defect(&h, x, w);
        assert!((fd - exact).norm() <= 1e-5 * exact.norm().max(1.0 / w), "s={s}: {fd} vs {exact}");
    }
}

#[test]
fn support_must_fit_the_grid() {
    let h = SampledFunction::on_interval(-0.5, 0.5, 101, |x| Complex64::new(unit_bump(x, 0.0, 2.0), 0.0)).unwrap();
    assert!(matches!(tarama_symbol_numeric(&h, 4.0, 1.0, &XIS), Err(TaramaError::SupportOverflow(_))));
}
