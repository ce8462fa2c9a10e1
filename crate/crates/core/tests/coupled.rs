use memwave::coupled::*;
use memwave::halfline::ZGrid;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_state(spec: &SurfaceSpec, grid: &ZGrid, amps: &[(f64, f64, f64, f64, f64)]) -> FieldState {
    let nodes = grid.nodes();
    let modes = spec
        .wavenumbers()
        .into_iter()
        .zip(amps)
        .map(|(k, &(ur, ui, vr, vi, decay))| {
            let (u, v) = if k == 0.0 { (c(ur, 0.0), c(vr, 0.0)) } else { (c(ur, ui), c(vr, vi)) };
            let mut bulk: Vec<Complex64> = nodes
                .iter()
                .map(|&z| v * (decay * z).exp() + c(0.3 * ui, 0.0) * z * (z).exp())
                .collect();
            *bulk.last_mut().unwrap() = c(0.0, 0.0);
            ModeState::new(k, u, v, bulk).unwrap()
        })
        .collect();
    FieldState { modes }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn energy_never_increases(
        amps in prop::collection::vec(
            (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.5..3.0f64), 3),
        eps in prop::sample::select(vec![0.0, 0.1, 1.0]),
    ) {
        let spec = SurfaceSpec::new(2.0 * std::f64::consts::PI, 3).unwrap();
        let grid = ZGrid::new(8.0, 160).unwrap();
        let w0 = random_state(&spec, &grid, &amps);
        let run = simulate_coupled(&spec, &grid, &w0, eps, 0.01, 1.0).unwrap();
        prop_assert!(run.audit.is_nonincreasing(1e-10), "increase {}", run.audit.max_relative_increase());
        run.final_state.check_no_slip(1e-12).unwrap();
    }
}

#[test]
fn energy_drop_matches_dissipation() {
    let spec = SurfaceSpec::new(3.0, 2).unwrap();
    let grid = ZGrid::new(10.0, 400).unwrap();
    let w0 = FieldState::from_amplitudes(&spec, &grid, &[c(0.4, 0.0), c(1.0, 0.5)], &[c(0.0, 0.0), c(0.2, 0.0)]).unwrap();
    let run = simulate_coupled(&spec, &grid, &w0, 0.3, 2.5e-3, 1.0).unwrap();
    let rel = run.audit.max_residual() / run.audit.energy[0];
    assert!(rel < 1e-3, "balance residual {rel}");
}

#[test]
fn self_convergence_is_second_order() {
    let spec = SurfaceSpec::new(2.0 * std::f64::consts::PI, 2).unwrap();
    let run = |dt: f64, nz: usize| {
        let grid = ZGrid::new(10.0, nz).unwrap();
        let w0 = FieldState::from_amplitudes(&spec, &grid, &[c(0.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0); 2]).unwrap();
        simulate_coupled(&spec, &grid, &w0, 0.2, dt, 1.0).unwrap().membrane.last().unwrap()[1].0
    };
    let (a, b, f) = (run(0.02, 100), run(0.01, 200), run(0.005, 400));
    let ratio = (a - b).norm() / (b - f).norm();
    assert!(ratio > 3.0, "refinement ratio {ratio}");
}

#[test]
fn real_field_energy_matches_parseval() {
    let spec = SurfaceSpec::new(2.5, 3).unwrap();
    let grid = ZGrid::new(6.0, 120).unwrap();
    let w = FieldState::from_amplitudes(
        &spec,
        &grid,
        &[c(0.7, 0.0), c(0.3, -0.4), c(0.1, 0.2)],
        &[c(0.2, 0.0), c(-0.5, 0.1), c(0.0, 0.3)],
    )
    .unwrap();
    let n_x = 16;
    let f = w.synthesize_real(&spec, &grid, n_x).unwrap();
    let dx = spec.period() / n_x as f64;
    let energy: f64 = (0..n_x)
        .map(|i| {
            let bulk: Vec<f64> = f.bulk[i].iter().map(|v| v * v).collect();
            0.5 * (f.velocity[i].powi(2) + f.displacement_dx[i].powi(2) + grid.trapezoid(&bulk)) * dx
        })
        .sum();
    let e0 = energy_e0(&w, &spec, &grid);
    assert!((energy - e0).abs() < 1e-12 * e0, "{energy} vs {e0}");
}

#[test]
fn zero_state_stays_zero() {
    let spec = SurfaceSpec::new(1.0, 4).unwrap();
    let grid = ZGrid::new(5.0, 50).unwrap();
    let w0 = FieldState::zero(&spec, &grid);
    let run = simulate_coupled(&spec, &grid, &w0, 0.5, 0.01, 0.5).unwrap();
    assert!(run.audit.energy.iter().all(|&e| e == 0.0));
}

#[test]
fn step_mode_matches_stepper() {
    let grid = ZGrid::new(6.0, 60).unwrap();
    let s0 = ModeState::at_rest(1.5, c(1.0, 0.0), &grid).unwrap();
    let a = step_mode(&s0, 0.2, 0.01, &grid).unwrap();
    let mut b = s0.clone();
    ModeStepper::new(1.5, 0.2, 0.01, &grid).unwrap().step(&mut b);
    assert_eq!(a, b);
}

#[test]
fn mismatched_state_is_rejected() {
    let spec = SurfaceSpec::new(1.0, 2).unwrap();
    let grid = ZGrid::new(5.0, 50).unwrap();
    let w0 = FieldState::zero(&SurfaceSpec::new(1.0, 3).unwrap(), &grid);
    assert!(simulate_coupled(&spec, &grid, &w0, 0.1, 0.01, 0.1).is_err());
    let mut bad = FieldState::zero(&spec, &grid);
    bad.modes[1].velocity = c(1.0, 0.0);
    assert!(simulate_coupled(&spec, &grid, &bad, 0.1, 0.01, 0.1).is_err());
}
