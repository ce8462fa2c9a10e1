use memwave::dispersion::*;
use num_complex::Complex64;

fn longwave_pair() -> [Complex64; 2] {
    let h = 3f64.sqrt() / 2.0;
    [Complex64::new(-0.5, h), Complex64::new(-0.5, -h)]
}

#[test]
fn long_waves_follow_four_thirds_law() {
    let k = 1e-3;
    let roots = admissible_roots(k, 0.0).unwrap();
    assert_eq!(roots.len(), 2);
    for target in longwave_pair() {
        let hit = roots
            .iter()
            .any(|r| (r.mu / k.powf(4.0 / 3.0) - target).norm() <= 0.05);
        assert!(hit, "no root near {target}");
    }
    for r in solve_dispersion(k, 0.0).unwrap() {
        assert!(r.residual < 1e-10 * (1.0 + r.mu.norm().powi(4)));
    }
}

#[test]
fn roots_reproduce_quartic_coefficients() {
    for &(k, eps) in &[(1e-3, 0.0), (0.5, 0.2), (3.0, 1.0), (100.0, 0.5)] {
        let mu: Vec<Complex64> = solve_dispersion(k, eps).unwrap().iter().map(|r| r.mu).collect();
        let e1: Complex64 = mu.iter().sum();
        let e2: Complex64 = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).map(|(i, j)| mu[i] * mu[j]).sum();
        let e3: Complex64 = (0..4).map(|i| mu.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, m)| m).product::<Complex64>()).sum();
        let e4: Complex64 = mu.iter().product();
        // μ⁴ - μ³ + (2-ε²)k²μ² + k⁴
        let coeffs = [1.0, (2.0 - eps * eps) * k * k, 0.0, k.powi(4)];
        let vieta = [e1, e2, -e3, e4];
        for (got, want) in vieta.iter().zip(coeffs) {
            let scale = want.abs().max(k.max(1.0).powi(4) * 1e-6);
            assert!((got - want).norm() <= 1e-10 * scale.max(1.0), "k={k} eps={eps}: {got} vs {want}");
        }
    }
}

#[test]
fn short_waves_travel_at_unit_speed() {
    let roots = admissible_roots(100.0, 0.0).unwrap();
    let r = roots.iter().find(|r| r.mu.im < 0.0).unwrap();
    assert!((r.mu.im / -100.0 - 1.0).abs() < 0.05);
    let damping = -r.mu.re;
    assert!(damping > 0.0 && damping < 2.0 * 100f64.sqrt());
}

#[test]
fn viscous_short_waves_are_damped_proportionally() {
    let rate = |k: f64| {
        admissible_roots(k, 0.5)
            .unwrap()
            .iter()
            .map(|r| -r.mu.re)
            .fold(f64::INFINITY, f64::min)
    };
    let (a, b) = (rate(100.0), rate(1000.0));
    assert!((b / a - 10.0).abs() < 0.5, "{a} -> {b}");
}

#[test]
fn admissible_roots_do_not_grow() {
    for &eps in &[0.0, 0.1, 1.0] {
        for i in 0..=30 {
            let k = 10f64.powf(-4.0 + 0.2 * i as f64);
            for r in admissible_roots(k, eps).unwrap() {
                assert!(r.mu.re <= 1e-12 * r.mu.norm().max(1.0));
                assert!(r.gamma.re > 0.0);
            }
        }
    }
}

#[test]
fn fractional_relation_agrees_with_eps_zero_quartic() {
    let k = 1e-3;
    let mut frac = fractional_dispersion(k).unwrap();
    let mut coupled: Vec<Complex64> = admissible_roots(k, 0.0).unwrap().iter().map(|r| r.mu).collect();
    assert_eq!(frac.len(), coupled.len());
    let key = |z: &Complex64| z.im;
    frac.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    coupled.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    for (a, b) in frac.iter().zip(&coupled) {
        assert!((a - b).norm() < 1e-6);
    }
    for mu in frac {
        assert!(fractional_residual(mu, k).norm() < 1e-10);
    }
}

#[test]
fn long_wave_speed() {
    for &k in &[1e-4, 1e-3] {
        for mu in fractional_dispersion(k).unwrap() {
            let speed = mu.im / k;
            let expected = 3f64.sqrt() / 2.0 * k.powf(1.0 / 3.0);
            assert!((speed.abs() / expected - 1.0).abs() < 0.05);
        }
    }
}

#[test]
fn asymptote_ratios_tend_to_one() {
    let long_ratio = |k: f64| {
        let target = longwave_asymptote(k)[0];
        admissible_roots(k, 0.0)
            .unwrap()
            .iter()
            .map(|r| (r.mu / target - 1.0).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let long: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&k| long_ratio(k)).collect();
    assert!(long.windows(2).all(|w| w[1] < w[0]), "{long:?}");

    let short_ratio = |k: f64, eps: f64| {
        let target = shortwave_asymptote(k, eps);
        admissible_roots(k, eps)
            .unwrap()
            .iter()
            .map(|r| (r.mu / target - 1.0).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let short: Vec<f64> = [1e1, 1e2, 1e3, 1e4].iter().map(|&k| short_ratio(k, 0.0)).collect();
    assert!(short.windows(2).all(|w| w[1] < w[0]), "{short:?}");
    assert!(short[3] < 1e-2);

    // for eps > 0 the short-wave formula is also leading order in eps: the
    // exact limit is μ/k → −ε/2 − i√(1 − ε²/4), the formula's is −ε/2 − i
    let eps: f64 = 0.5;
    let exact = Complex64::new(-eps / 2.0, -(1.0 - eps * eps / 4.0).sqrt());
    let plateau = (exact / Complex64::new(-eps / 2.0, -1.0) - 1.0).norm();
    assert!((short_ratio(1e4, eps) - plateau).abs() < 1e-3);
}
